"""Shared random-function generators for the test suite.

Everything is driven by explicit ``random.Random`` instances so each suite
is reproducible from its stated seed.
"""

from __future__ import annotations

import random

from hjvisc.interval import Interval
from hjvisc.pwfn import Piece, PiecewiseFn

DOM = (0.0, 1.0)


def random_breakpoints(rng: random.Random, max_interior: int = 4,
                       min_gap: float = 2e-3) -> list[float]:
    k = rng.randint(0, max_interior)
    pts = sorted(round(rng.uniform(0.05, 0.95), 6) for _ in range(k))
    out: list[float] = []
    for p in pts:
        if not out or p - out[-1] > min_gap:
            out.append(p)
    return out


def _limits(pieces: list[Piece], bps: list[float], j: int) -> tuple[float, float, float, float]:
    """(lower-left, lower-right, upper-left, upper-right) limits at bps[j]."""
    x = bps[j]
    pl, pr = pieces[j - 1], pieces[j]
    return (pl.lower[0] + pl.lower[1] * x, pr.lower[0] + pr.lower[1] * x,
            pl.upper[0] + pl.upper[1] * x, pr.upper[0] + pr.upper[1] * x)


def random_pwfn(rng: random.Random, max_interior: int = 4,
                band_prob: float = 0.4, spike_prob: float = 0.25,
                jump_prob: float = 0.45) -> PiecewiseFn:
    """General interval-valued function: bands, jumps, spikes allowed."""
    bps = [DOM[0], *random_breakpoints(rng, max_interior), DOM[1]]
    pieces: list[Piece] = []
    for j in range(len(bps) - 1):
        x0, x1 = bps[j], bps[j + 1]
        y0, y1 = rng.uniform(-2, 2), rng.uniform(-2, 2)
        slope = (y1 - y0) / (x1 - x0)
        lower = (y0 - slope * x0, slope)
        if rng.random() < band_prob:
            w0, w1 = rng.uniform(0, 1.5), rng.uniform(0, 1.5)
            ws = (w1 - w0) / (x1 - x0)
            upper = (lower[0] + w0 - ws * x0, lower[1] + ws)
        else:
            upper = lower
        pieces.append(Piece(lower, upper))
    nodes: list[Interval] = []
    for j in range(1, len(bps) - 1):
        llo, rlo, lhi, rhi = _limits(pieces, bps, j)
        base_lo, base_hi = min(llo, rlo), max(lhi, rhi)
        r = rng.random()
        if r < spike_prob:
            off = rng.uniform(0.1, 1.0)
            v = base_hi + off if rng.random() < 0.5 else base_lo - off
            nodes.append(Interval.point(v))
        elif r < spike_prob + jump_prob:
            lo = rng.uniform(base_lo - 0.5, base_hi)
            hi = rng.uniform(lo, base_hi + 0.5)
            nodes.append(Interval(lo, hi))
        else:
            nodes.append(Interval.point(rng.choice((llo, rlo, lhi, rhi))))
    return PiecewiseFn((bps[0], bps[-1]), tuple(bps), tuple(pieces), tuple(nodes))


def random_point_valued(rng: random.Random, max_interior: int = 4,
                        spike_prob: float = 0.25) -> PiecewiseFn:
    """Point-valued function with possible jumps and spikes at breakpoints."""
    return random_pwfn(rng, max_interior, band_prob=0.0,
                       spike_prob=spike_prob, jump_prob=0.0)


def random_continuous(rng: random.Random, max_interior: int = 4) -> PiecewiseFn:
    xs = [DOM[0], *random_breakpoints(rng, max_interior), DOM[1]]
    return PiecewiseFn.from_points([(x, rng.uniform(-2, 2)) for x in xs])


def random_hcontinuous(rng: random.Random, max_interior: int = 4) -> PiecewiseFn:
    """Graph completion of a point-valued function without spikes."""
    f = random_pwfn(rng, max_interior, band_prob=0.0, spike_prob=0.0,
                    jump_prob=0.0)
    g = f.graph_completion()
    assert g.is_h_continuous()
    return g


def random_hcontinuous_with_jump(rng: random.Random) -> PiecewiseFn:
    """Hausdorff-continuous function with at least one proper jump."""
    for _ in range(100):
        g = random_hcontinuous(rng, max_interior=4)
        if any(n.hi > n.lo for n in g.nodes):
            return g
    at = round(rng.uniform(0.2, 0.8), 6)
    lo, hi = sorted((rng.uniform(-1, 0), rng.uniform(0.5, 1.5)))
    return PiecewiseFn.step(DOM, at, lo, hi)


# ---------------------------------------------------------------------------
# Sub/supersolution generators for the two acceptance Hamiltonians
# ---------------------------------------------------------------------------

def random_lipschitz(rng: random.Random, bound: float = 1.0,
                     max_interior: int = 4) -> PiecewiseFn:
    """Continuous function with all slopes in [-bound, bound]."""
    xs = [DOM[0], *random_breakpoints(rng, max_interior), DOM[1]]
    y = rng.uniform(-1, 1)
    pts = [(xs[0], y)]
    for x0, x1 in zip(xs, xs[1:]):
        y += rng.uniform(-bound, bound) * (x1 - x0)
        pts.append((x1, y))
    return PiecewiseFn.from_points(pts)


def random_slope_bounded_jumpy(rng: random.Random, *, max_slope: float | None,
                               min_slope: float | None,
                               max_interior: int = 4) -> PiecewiseFn:
    """Piecewise-affine with constrained slopes; jumps are one-sided.

    With ``max_slope`` set, jumps go down and node values sit at the left
    limit (upper semicontinuous).  With ``min_slope`` set, jumps go up and
    node values sit at the left limit as well (lower semicontinuous).
    """
    bps = [DOM[0], *random_breakpoints(rng, max_interior), DOM[1]]
    pieces: list[Piece] = []
    nodes: list[Interval] = []
    y = rng.uniform(-1, 1)
    for j in range(len(bps) - 1):
        x0, x1 = bps[j], bps[j + 1]
        if max_slope is not None:
            slope = rng.uniform(max_slope - 2.0, max_slope)
        else:
            slope = rng.uniform(min_slope, min_slope + 2.0)
        c = (y - slope * x0, slope)
        pieces.append(Piece(c, c))
        y_end = y + slope * (x1 - x0)
        if j < len(bps) - 2:
            nodes.append(Interval.point(y_end))
            if rng.random() < 0.5:
                jump = rng.uniform(0.1, 0.8)
                y = y_end - jump if max_slope is not None else y_end + jump
            else:
                y = y_end
        else:
            y = y_end
    return PiecewiseFn((bps[0], bps[-1]), tuple(bps), tuple(pieces), tuple(nodes))


def random_concave_steep(rng: random.Random) -> PiecewiseFn:
    """Concave continuous function whose slopes all satisfy |s| >= 1."""
    k = rng.randint(1, 3)
    bps = [DOM[0], *random_breakpoints(rng, k), DOM[1]]
    n_pos = rng.randint(0, len(bps) - 1)
    slopes = sorted((rng.uniform(1.0, 3.0) for _ in range(n_pos)), reverse=True)
    slopes += sorted((rng.uniform(-3.0, -1.0)
                      for _ in range(len(bps) - 1 - n_pos)), reverse=True)
    y = rng.uniform(-1, 1)
    pts = [(bps[0], y)]
    for (x0, x1), s in zip(zip(bps, bps[1:]), slopes):
        y += s * (x1 - x0)
        pts.append((x1, y))
    return PiecewiseFn.from_points(pts)


def subsolution_family(rng: random.Random, phi_name: str, size: int) -> list[PiecewiseFn]:
    if phi_name == "p - 1":
        return [random_slope_bounded_jumpy(rng, max_slope=1.0, min_slope=None)
                for _ in range(size)]
    if phi_name == "abs(p) - 1":
        return [random_lipschitz(rng, 1.0) for _ in range(size)]
    raise ValueError(phi_name)


def supersolution_family(rng: random.Random, phi_name: str, size: int) -> list[PiecewiseFn]:
    if phi_name == "p - 1":
        return [random_slope_bounded_jumpy(rng, max_slope=None, min_slope=1.0)
                for _ in range(size)]
    if phi_name == "abs(p) - 1":
        return [random_concave_steep(rng) for _ in range(size)]
    raise ValueError(phi_name)
