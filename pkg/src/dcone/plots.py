"""Figure rendering for the CLI report paths.

Each renderer takes the structured result a subcommand already computed and
writes a single PNG next to the delimited output.  Kept separate so the
library itself never imports matplotlib.
"""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def render_g(rows, alpha: float, branch: str, path) -> None:
    z = np.array([r[0] for r in rows])
    g = np.array([r[1] for r in rows])
    pole = np.array([r[2] for r in rows], dtype=bool)
    g_masked = np.where(pole | ~np.isfinite(g), np.nan, g)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(z, g_masked, lw=1.2)
    span = np.nanpercentile(np.abs(g_masked), 98)
    ax.set_ylim(-1.5 * span, 1.5 * span)
    ax.axhline(0.0, color="k", lw=0.5)
    name = "g" if branch == "trig" else "g~"
    ax.set_xlabel("z")
    ax.set_ylabel(f"{name}_{alpha:g}(z)")
    ax.set_title(f"{branch} level function, alpha = {alpha:g}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_profile(report, path) -> None:
    t = report.w.grid.nodes
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, report.w.values, lw=1.2)
    ax.axhline(1.0, color="k", lw=0.5, ls="--")
    for iv in report.intervals:
        ax.axvspan(iv.center - iv.half_width, iv.center + iv.half_width,
                   alpha=0.12, color="tab:orange")
    ax.set_xlabel("t")
    ax.set_ylabel("w(t)")
    ax.set_title(f"minimizer: E = {report.energy:.4f}, lambda = {report.lam:.4f}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_fold(solution, path) -> None:
    t = solution.candidate.w.grid.nodes
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, solution.candidate.w.values, lw=1.2)
    ax.axhline(1.0, color="k", lw=0.5, ls="--")
    ax.set_xlabel("t")
    ax.set_ylabel("w(t)")
    ax.set_title(f"single fold: 2z = {solution.opening_deg:.2f} deg, "
                 f"E = {solution.candidate.energy:.4f}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_gamma(result, path) -> None:
    hs = [r.h for r in result.rows]
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    axes[0].loglog(hs, [r.rel_err for r in result.rows], "o-")
    axes[0].set_xlabel("h")
    axes[0].set_ylabel("relative energy error")
    axes[1].loglog(hs, [r.gap_pre_close for r in result.rows], "o-", label="endpoint gap")
    axes[1].loglog(hs, [r.a_norm for r in result.rows], "s-", label="|a|")
    axes[1].loglog(hs, [abs(r.det_jac) for r in result.rows], "^-", label="|det Df|")
    axes[1].set_xlabel("h")
    axes[1].legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
