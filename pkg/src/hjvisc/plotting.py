"""Figure rendering for interval-valued functions and solver output.

Proper interval values are drawn explicitly: shaded bands over pieces where
the bounds differ and shaded vertical bars at jump nodes, so the gap between
the lower and upper bound is visible at a glance.  Figures are written with
matplotlib; an ``.svg`` path produces a scalable plot with stripped volatile
metadata so identical runs produce identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "hjvisc"  # deterministic element ids

import matplotlib.pyplot as plt  # noqa: E402

from .perron import GridFn  # noqa: E402
from .pwfn import PiecewiseFn, _aff  # noqa: E402

_COLORS = ("tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple",
           "tab:brown", "tab:pink", "tab:gray")


def draw_function(ax, f: PiecewiseFn, color: str = "tab:blue",
                  label: str | None = None, band_alpha: float = 0.25) -> None:
    """Draw lower/upper bounds, interval bands, and jump bars of ``f``."""
    first = True
    for j, piece in enumerate(f.pieces):
        x0, x1 = f.breakpoints[j], f.breakpoints[j + 1]
        lo = [_aff(piece.lower, x0), _aff(piece.lower, x1)]
        hi = [_aff(piece.upper, x0), _aff(piece.upper, x1)]
        ax.plot([x0, x1], lo, color=color, lw=1.6,
                label=label if first else None)
        first = False
        if not piece.is_point:
            ax.plot([x0, x1], hi, color=color, lw=1.6, ls="--")
            ax.fill_between([x0, x1], lo, hi, color=color, alpha=band_alpha,
                            linewidth=0)
    for j, node in enumerate(f.nodes, start=1):
        x = f.breakpoints[j]
        if node.hi > node.lo:
            ax.plot([x, x], [node.lo, node.hi], color=color, lw=5,
                    alpha=band_alpha * 2, solid_capstyle="butt")
        else:
            ax.plot([x], [node.lo], color=color, marker=".", ms=6)


def draw_grid(ax, g: GridFn, color: str = "tab:red",
              label: str | None = None) -> None:
    xs = g.xs()
    ax.plot(xs, g.lo, color=color, lw=1.4, label=label)
    if not g.is_point_valued():
        ax.plot(xs, g.hi, color=color, lw=1.4, ls="--")
        ax.fill_between(xs, g.lo, g.hi, color=color, alpha=0.2, linewidth=0)


def render_functions(items: list[tuple[str, PiecewiseFn]], path: str,
                     title: str = "") -> None:
    """Overlay the named functions and write the figure to ``path``."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for k, (name, f) in enumerate(items):
        draw_function(ax, f, color=_COLORS[k % len(_COLORS)], label=name)
    _finish(fig, ax, path, title)


def render_solution(grid: GridFn, brackets: list[tuple[str, PiecewiseFn]],
                    path: str, title: str = "") -> None:
    """Solver iterate over its brackets."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for k, (name, f) in enumerate(brackets):
        draw_function(ax, f, color=_COLORS[k % len(_COLORS)], label=name,
                      band_alpha=0.15)
    draw_grid(ax, grid, color="tab:red", label="solution")
    _finish(fig, ax, path, title)


def _finish(fig, ax, path: str, title: str) -> None:
    ax.set_xlabel("x")
    ax.set_ylabel("value")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    if path.endswith(".svg"):
        fig.savefig(path, metadata={"Date": None})
    else:
        fig.savefig(path)
    plt.close(fig)
