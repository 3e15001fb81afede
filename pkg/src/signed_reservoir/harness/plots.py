"""Static SVG figures from sweep records."""
from __future__ import annotations

import math
import re
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .records import ResultRecord  # noqa: E402

PLOT_KINDS = ("scatter", "rank", "symmetry", "memory", "contour")
_SVG_META = {"Date": None}


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name)


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path


def emit_plots(records: list[ResultRecord], kind: str, out_dir: str | Path, grid=None) -> list[Path]:
    """Write SVG figures for ``records``; returns the files written.

    ``scatter`` (testing error vs flip fraction) and ``rank`` produce one file
    per case; ``symmetry`` plots log testing error against log group order;
    ``memory`` plots capacity against flip fraction; ``contour`` needs the
    ``ContourGrid`` from a sparsity sweep.
    """
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
    if not records:
        raise ValueError("no records to plot")
    plt.rcParams["svg.hashsalt"] = "signed-reservoir"
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ok = [r for r in records if r.ok]
    cases = sorted({r.case for r in records})
    written: list[Path] = []

    if kind in ("scatter", "rank"):
        for case in cases:
            rs = [r for r in ok if r.case == case]
            fig, ax = plt.subplots(figsize=(5, 4))
            if kind == "scatter":
                xs = [r.epsilon_f if r.epsilon_f is not None else 0.5 for r in rs]
                ax.scatter(xs, [r.delta_tx for r in rs], s=8, label=r"$\Delta_{tx}$")
                ax.scatter(xs, [r.delta_rc for r in rs], s=8, marker="x", label=r"$\Delta_{RC}$")
                ax.set_yscale("log")
                ax.set_ylabel("error")
                ax.legend()
            else:
                xs = [r.epsilon_f for r in rs]
                ax.scatter(xs, [r.gamma_ulp for r in rs], s=8, label="ulp tolerance")
                ax.scatter(xs, [r.gamma_1e6 for r in rs], s=8, marker="s", label="1e-6 relative")
                ax.set_ylabel(r"covariance rank $\Gamma$")
                ax.legend()
            ax.set_xlabel(r"fraction flipped $\varepsilon_f$")
            ax.set_title(case)
            written.append(_save(fig, out / f"{_safe(case)}_{kind}.svg"))
    elif kind == "symmetry":
        fig, ax = plt.subplots(figsize=(5, 4))
        for case in cases:
            rs = [r for r in ok if r.case == case and r.symmetry_count]
            ax.scatter([math.log10(r.symmetry_count) for r in rs], [math.log10(r.delta_tx) for r in rs],
                       s=8, label=case)
        ax.set_xlabel(r"$\log_{10} \zeta_s$")
        ax.set_ylabel(r"$\log_{10} \Delta_{tx}$")
        ax.legend()
        written.append(_save(fig, out / "symmetry.svg"))
    elif kind == "memory":
        fig, ax = plt.subplots(figsize=(5, 4))
        for case in cases:
            rs = [r for r in ok if r.case == case]
            ax.scatter([r.epsilon_f for r in rs], [r.mc_total for r in rs], s=8, label=case)
        ax.set_xlabel(r"fraction flipped $\varepsilon_f$")
        ax.set_ylabel("memory capacity")
        ax.legend()
        written.append(_save(fig, out / "memory.svg"))
    else:
        if grid is None:
            raise ValueError("contour plots need the aggregated grid")
        fig, (top, bottom) = plt.subplots(2, 1, figsize=(5, 7))
        X, Y = np.meshgrid(grid.epsilons, grid.phis)
        for ax, z, label in ((top, grid.median_log10_delta_tx, r"$\log_{10}\Delta_{tx}$"),
                             (bottom, grid.mean_gamma_ulp, r"$\Gamma$")):
            if min(z.shape) >= 2:
                cs = ax.contourf(X, Y, z)
            else:
                cs = ax.pcolormesh(X, Y, z, shading="nearest")
            fig.colorbar(cs, ax=ax, label=label)
            ax.set_xlabel(r"$\varepsilon_f$")
            ax.set_ylabel(r"sparsity $\phi$")
        written.append(_save(fig, out / "contour.svg"))
    return written
