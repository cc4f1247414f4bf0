"""Command-line front end.

Subcommands: energy-density, spectrum, energy, sweep, verify.  Output is
a deterministic CSV (UTF-8, comma-separated, one header row, LF endings)
or JSON; numbers use Python's shortest round-trip decimal formatting so
identical runs produce byte-identical files.  Exit codes: 0 success,
2 usage or malformed configuration, 3 physics divergence, 4 resource
exhaustion, 1 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict

import numpy as np

from . import cavity as cav
from .config import (OptionsSpec, OutputSpec, PhysicsSpec, RunConfig,
                     deserialize, serialize)
from .errors import (DensityDivergenceError, EnergyDivergenceError,
                     SeriesConvergenceError)
from .iteration import CavityConfig, threshold_status
from .quadrature import GridSpec
from .single_mirror import SingleMirrorConfig, sample_density, sample_spectrum
from .specfun import SeriesControl

EXIT_USAGE = 2
EXIT_DIVERGENCE = 3
EXIT_RESOURCE = 4

_ENERGY_FIELDS = ("E_u", "E_v", "E_total", "E_intracavity",
                  "approx_E", "approx_intracavity", "balance_ratio")


def _fmt(x) -> str:
    """Shortest decimal that parses back to the same float."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _sanitize(obj):
    """Strict-JSON payloads: non-finite floats become null."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def _write_json(path, payload):
    text = json.dumps(_sanitize(payload), sort_keys=True, indent=2,
                      allow_nan=False) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _add_physics_args(p: argparse.ArgumentParser):
    p.add_argument("--K", type=int, default=1, help="resonance order (Omega L = K pi)")
    p.add_argument("--Omega", type=float, default=1.0, help="mechanical frequency")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--alpha", type=float, help="per-reflection rapidity")
    g.add_argument("--alpha-eff", type=float, dest="alpha_eff",
                   help="finesse-amplified rapidity 2 alpha / rho")
    m = p.add_mutually_exclusive_group()
    m.add_argument("--r", type=float, help="round-trip reflection sqrt(R1 R2)")
    m.add_argument("--rho", type=float, help="cavity losses, r = exp(-2 rho)")
    p.add_argument("--R1", type=float, help="left mirror intensity reflectivity")
    p.add_argument("--R2", type=float, help="right mirror intensity reflectivity")
    p.add_argument("--R", type=float, help="single-mirror reflectivity (single system)")
    p.add_argument("--single", action="store_true", help="single mirror instead of a cavity")


def _add_common_args(p: argparse.ArgumentParser):
    p.add_argument("--points", type=int, default=None, help="samples per period / spectrum")
    p.add_argument("--nu-max", type=float, dest="nu_max", default=3.0)
    p.add_argument("--eps-levels", type=int, dest="eps_levels", default=7,
                   help="number of point-splitting separations")
    p.add_argument("--tol", type=float, default=None, help="series relative tolerance")
    p.add_argument("--out", type=str, default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--envelope", action="store_true")
    p.add_argument("--denominators", choices=("static", "dynamic"), default="static")
    p.add_argument("--direction", choices=("right", "left"), default="right")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--figure", type=str, default=None,
                   help="also render a figure to this file")
    p.add_argument("--config", type=str, default=None,
                   help="JSON run configuration (overrides other flags)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cavrad",
        description="Vacuum radiation of oscillating mirrors and cavities: "
                    "densities, energies, spectra (units hbar = c = 1).",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("energy-density", "time-resolved emitted energy density over one period"),
        ("spectrum", "photon-number spectral density over reduced frequency"),
        ("energy", "closed-form radiated/intracavity energy report"),
        ("sweep", "energy report over a parameter grid"),
        ("verify", "run the invariant and acceptance checks"),
    ):
        p = sub.add_parser(name, help=doc)
        if name != "verify":
            _add_physics_args(p)
            _add_common_args(p)
        if name == "sweep":
            p.add_argument("--alphas", type=str, default=None,
                           help="comma-separated rapidities")
            p.add_argument("--alpha-ratios", type=str, dest="alpha_ratios", default=None,
                           help="comma-separated alpha/rho ratios")
            p.add_argument("--rhos", type=str, default=None)
            p.add_argument("--Ks", type=str, default=None)
    return ap


def _physics_from_args(args) -> PhysicsSpec:
    return PhysicsSpec(
        system="single" if args.single else "cavity",
        K=args.K, Omega=args.Omega, alpha=args.alpha, alpha_eff=args.alpha_eff,
        r=args.r, rho=args.rho, R1=args.R1, R2=args.R2, R=args.R,
    )


def _parse_list(text, cast=float):
    return None if text is None else tuple(cast(v) for v in text.split(","))


def _run_config_from_args(args) -> RunConfig:
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            return deserialize(fh.read())
    command = args.command
    default_points = 4096 if command == "energy-density" else 3000
    default_tol = 1e-6 if command == "spectrum" else 1e-12
    grid_points = args.points if command == "energy-density" and args.points else 4096
    eps = tuple(1e-2 * 0.5**k for k in range(max(2, args.eps_levels)))
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("CAVRAD_THREADS", "1"))
    return RunConfig(
        command=command,
        physics=_physics_from_args(args),
        grid=GridSpec(points_per_period=grid_points, eps_levels=eps),
        series=SeriesControl(rel_tol=args.tol if args.tol else default_tol),
        options=OptionsSpec(
            points=args.points if args.points else default_points,
            nu_max=args.nu_max, envelope=args.envelope,
            denominators=args.denominators, direction=args.direction,
            threads=threads,
            alphas=_parse_list(getattr(args, "alphas", None)),
            alpha_ratios=_parse_list(getattr(args, "alpha_ratios", None)),
            rhos=_parse_list(getattr(args, "rhos", None)),
            Ks=_parse_list(getattr(args, "Ks", None), int),
        ),
        output=OutputSpec(path=args.out, format=args.format or
                          ("json" if command == "energy" else "csv"),
                          figure=args.figure),
    )


def run(cfg: RunConfig) -> int:
    """Execute a run configuration; returns the process exit status."""
    if cfg.command == "verify":
        from .verify import run_verification
        return run_verification()
    handler = {
        "energy-density": _cmd_energy_density,
        "spectrum": _cmd_spectrum,
        "energy": _cmd_energy,
        "sweep": _cmd_sweep,
    }[cfg.command]
    return handler(cfg)


def _cmd_energy_density(cfg: RunConfig) -> int:
    if cfg.physics.system == "single":
        samples = sample_density(cfg.physics.single(), cfg.grid)
    else:
        conf = cfg.physics.cavity()
        samples = cav.energy_density_cavity(
            conf, grid=cfg.grid, denominators=cfg.options.denominators,
            direction=cfg.options.direction)
    period = 2.0 * math.pi / cfg.physics.Omega
    rows = list(zip((samples.u / period).tolist(), samples.values.tolist()))
    if cfg.output.format == "json":
        _write_json(cfg.output.path, {
            "u_over_period": (samples.u / period).tolist(),
            "e_u_in_hbar_Omega2": samples.values.tolist(),
            "n_roundtrips": samples.n_roundtrips,
        })
    else:
        _write_csv(cfg.output.path, ("u_over_period", "e_u_in_hbar_Omega2"), rows)
    if cfg.output.figure:
        from .plotting import save_density_figure
        save_density_figure(samples, cfg.output.figure)
    return 0


def _cmd_spectrum(cfg: RunConfig) -> int:
    if cfg.physics.system == "single":
        samples = sample_spectrum(cfg.physics.single(), cfg.options.nu_max,
                                  cfg.options.points, cfg.series)
    else:
        conf = cfg.physics.cavity()
        samples = cav.spectrum_cavity(conf, nu_max=cfg.options.nu_max,
                                      points=cfg.options.points, ctl=cfg.series,
                                      envelope=cfg.options.envelope)
    if cfg.options.envelope and samples.envelope is not None:
        header = ("nu", "n_nu", "n_nu_envelope")
        rows = list(zip(samples.nu.tolist(), samples.values.tolist(),
                        samples.envelope.tolist()))
    else:
        header = ("nu", "n_nu")
        rows = list(zip(samples.nu.tolist(), samples.values.tolist()))
    if cfg.output.format == "json":
        _write_json(cfg.output.path, {h: [r[i] for r in rows]
                                      for i, h in enumerate(header)})
    else:
        _write_csv(cfg.output.path, header, rows)
    if cfg.output.figure:
        from .plotting import save_spectrum_figure
        save_spectrum_figure(samples, cfg.output.figure)
    return 0


def _cmd_energy(cfg: RunConfig) -> int:
    if cfg.physics.system == "single":
        from .single_mirror import energy_per_period
        conf = cfg.physics.single()
        pair = energy_per_period(conf, cfg.grid)
        payload = {"E_u": pair.closed_form, "E_u_quadrature": pair.quadrature,
                   "units": "hbar Omega", "Omega": conf.Omega}
    else:
        conf = cfg.physics.cavity()
        report = cav.radiated_energy(conf, cfg.series)
        payload = asdict(report)
        payload["flags"] = list(report.flags)
    if cfg.output.format == "csv":
        keys = sorted(k for k in payload if isinstance(payload[k], float))
        _write_csv(cfg.output.path, tuple(keys), [tuple(payload[k] for k in keys)])
    else:
        _write_json(cfg.output.path, payload)
    return 0


def _sweep_grid(cfg: RunConfig):
    o = cfg.options
    Ks = o.Ks or (cfg.physics.K,)
    rhos = o.rhos
    if rhos is None:
        base = cfg.physics.cavity()
        rhos = (base.rho,)
    if o.alphas is not None and o.alpha_ratios is not None:
        raise ValueError("give alphas or alpha_ratios, not both")
    points = []
    for K in Ks:
        for rho in rhos:
            # alpha/rho ratios use the value of rho the config will derive
            # back from r, so ratio 1.0 lands exactly on the divergence
            rho_derived = -0.5 * math.log(math.exp(-2.0 * rho))
            if o.alphas is not None:
                alphas = o.alphas
            elif o.alpha_ratios is not None:
                alphas = tuple(x * rho_derived for x in o.alpha_ratios)
            else:
                raise ValueError("sweep needs --alphas or --alpha-ratios")
            for alpha in alphas:
                points.append((int(K), float(rho), float(alpha)))
    return points


def _sweep_row(index, K, rho, alpha, Omega, ctl):
    row = {"index": index, "K": K, "Omega": Omega, "alpha": alpha, "rho": rho,
           "r": math.exp(-2.0 * rho), "R1": math.exp(-2.0 * rho),
           "R2": math.exp(-2.0 * rho), "alpha_eff": 2.0 * alpha / rho,
           "threshold_status": "", "error": ""}
    for f in _ENERGY_FIELDS:
        row[f] = ""
    try:
        conf = CavityConfig.symmetric(K, alpha=alpha, rho=rho, Omega=Omega)
        row["threshold_status"] = threshold_status(conf).value
        report = cav.radiated_energy(conf, ctl)
        for f in _ENERGY_FIELDS:
            row[f] = getattr(report, f)
    except EnergyDivergenceError:
        row["error"] = "energy_divergent"
    except DensityDivergenceError:
        row["error"] = "density_divergent"
    return row


def _cmd_sweep(cfg: RunConfig) -> int:
    points = _sweep_grid(cfg)
    threads = max(1, cfg.options.threads or 1)
    ctl = cfg.series
    Omega = cfg.physics.Omega

    def work(item):
        i, (K, rho, alpha) = item
        return _sweep_row(i, K, rho, alpha, Omega, ctl)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, enumerate(points)))
    else:
        rows = [work(item) for item in enumerate(points)]
    header = ("index", "K", "Omega", "alpha", "rho", "r", "R1", "R2",
              "alpha_eff", "threshold_status") + _ENERGY_FIELDS + ("error",)
    table = [tuple(row[h] for h in header) for row in rows]
    if cfg.output.format == "json":
        _write_json(cfg.output.path, [dict(zip(header, r)) for r in table])
    else:
        _write_csv(cfg.output.path, header, table)
    if cfg.output.figure:
        from .plotting import save_sweep_figure
        save_sweep_figure(rows, cfg.output.figure)
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _run_config_from_args(args)
        return run(cfg)
    except (DensityDivergenceError, EnergyDivergenceError) as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except SeriesConvergenceError as exc:
        print(f"resource: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
