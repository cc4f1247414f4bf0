"""Figure rendering for the report paths.

Kept separate from the computational core: the CSV output is the
contract, a figure is an optional companion artifact written next to it.
Uses the non-interactive Agg backend so figure generation works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def save_density_figure(samples, path: str, title: str = ""):
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(samples.u / samples.u[-1] if samples.u[-1] else samples.u,
            samples.values, lw=1.0)
    ax.set_xlabel("u / period")
    ax.set_ylabel(r"$e_u$  [$\hbar\Omega^2$]")
    if title:
        ax.set_title(title, fontsize=9)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_spectrum_figure(samples, path: str, title: str = ""):
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(samples.nu, samples.values, lw=0.8, label=r"$n_\nu$")
    if samples.envelope is not None:
        ax.plot(samples.nu, samples.envelope, "--", lw=1.0, label="envelope")
        ax.legend(fontsize=8)
    ax.set_xlabel(r"$\nu = \omega/\Omega$")
    ax.set_ylabel(r"$n_\nu$")
    if title:
        ax.set_title(title, fontsize=9)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_figure(rows, path: str):
    """Total radiated energy against alpha_eff, one curve per (K, rho)."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    groups = {}
    for row in rows:
        if row.get("error"):
            continue
        groups.setdefault((row["K"], row["rho"]), []).append(
            (row["alpha_eff"], row["E_total"]))
    for (K, rho), pts in sorted(groups.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", ms=3,
                label=f"K={K}, rho={rho:g}")
    ax.set_xlabel(r"$\alpha_{\rm eff}$")
    ax.set_ylabel(r"$E$  [$\hbar\Omega$]")
    ax.set_yscale("log")
    if groups:
        ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
