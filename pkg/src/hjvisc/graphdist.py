"""Hausdorff distance between completed graphs, treated as planar sets.

The graph of a completed piecewise-affine interval-valued function is a
union of planar features: one segment per point-valued piece, one convex
band (a quadrilateral with vertical sides) per proper-interval piece, and
one vertical segment per interior breakpoint whose value is a proper
interval.  Functions are completed before their graphs are taken, matching
the definition of the distance, and the graphs are closed (domain-endpoint
limits included), which leaves the distance unchanged.

The symmetric distance is the maximum of two directed sup-inf distances.
Each directed distance is resolved by branch and bound: the distance to any
single convex feature is a convex function of the query point, so its
maximum over a segment or band is attained at the corners, which yields a
certified upper bound per region; regions are bisected until the bound
meets the best evaluated point.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Union

from .pwfn import DomainMismatchError, PiecewiseFn, _aff

NORMS = ("euclid", "max")

Point = tuple[float, float]


def _norm_dist(dx: float, dy: float, norm: str) -> float:
    if norm == "euclid":
        return math.hypot(dx, dy)
    return max(abs(dx), abs(dy))


def _point_segment_dist(p: Point, a: Point, b: Point, norm: str) -> float:
    px, py = p
    ax, ay = a
    bx, by = b
    if p == a or p == b:
        return 0.0
    ddx = bx - ax
    ddy = by - ay
    if norm == "euclid":
        ll = ddx * ddx + ddy * ddy
        if ll == 0.0:
            return math.hypot(px - ax, py - ay)
        t = ((px - ax) * ddx + (py - ay) * ddy) / ll
        if t <= 0.0:
            return math.hypot(px - ax, py - ay)
        if t >= 1.0:
            return math.hypot(px - bx, py - by)
        return math.hypot(px - (ax + t * ddx), py - (ay + t * ddy))
    # max norm: minimize max(|dx0 + t ddx|, |dy0 + t ddy|), convex in t
    dx0 = ax - px
    dy0 = ay - py
    cands = [0.0, 1.0]
    for c2, s2 in ((dy0, ddy), (-dy0, -ddy)):
        denom = ddx - s2
        if denom != 0.0:
            cands.append((c2 - dx0) / denom)
    if ddx != 0.0:
        cands.append(-dx0 / ddx)
    if ddy != 0.0:
        cands.append(-dy0 / ddy)
    best = math.inf
    for t in cands:
        t = min(1.0, max(0.0, t))
        best = min(best, max(abs(dx0 + t * ddx), abs(dy0 + t * ddy)))
    return best


@dataclass(frozen=True, slots=True)
class Segment:
    a: Point
    b: Point

    def corners(self) -> tuple[Point, ...]:
        return (self.a, self.b)

    def dist(self, p: Point, norm: str) -> float:
        return _point_segment_dist(p, self.a, self.b, norm)

    def diameter(self) -> float:
        return math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])

    def split(self) -> tuple["Segment", "Segment"]:
        mid = (0.5 * (self.a[0] + self.b[0]), 0.5 * (self.a[1] + self.b[1]))
        return Segment(self.a, mid), Segment(mid, self.b)

    def boundary_segments(self) -> tuple["Segment", ...]:
        return (self,)


@dataclass(frozen=True, slots=True)
class Band:
    """Convex region between two affine bounds over [x0, x1] (vertical sides)."""

    x0: float
    x1: float
    lo0: float  # lower bound value at x0
    hi0: float  # upper bound value at x0
    lo1: float  # lower bound value at x1
    hi1: float  # upper bound value at x1

    def corners(self) -> tuple[Point, ...]:
        return ((self.x0, self.lo0), (self.x1, self.lo1),
                (self.x1, self.hi1), (self.x0, self.hi0))

    def _bounds_at(self, x: float) -> tuple[float, float]:
        t = (x - self.x0) / (self.x1 - self.x0)
        return (self.lo0 + t * (self.lo1 - self.lo0),
                self.hi0 + t * (self.hi1 - self.hi0))

    def contains(self, p: Point) -> bool:
        x, y = p
        if not (self.x0 <= x <= self.x1):
            return False
        lo, hi = self._bounds_at(x)
        return lo <= y <= hi

    def boundary_segments(self) -> tuple[Segment, ...]:
        c = self.corners()
        return (Segment(c[0], c[1]), Segment(c[1], c[2]),
                Segment(c[2], c[3]), Segment(c[3], c[0]))

    def dist(self, p: Point, norm: str) -> float:
        if self.contains(p):
            return 0.0
        return min(s.dist(p, norm) for s in self.boundary_segments())

    def diameter(self) -> float:
        return math.hypot(self.x1 - self.x0,
                          max(self.hi0, self.hi1) - min(self.lo0, self.lo1))

    def split(self) -> tuple["Band", ...]:
        width = self.x1 - self.x0
        height = max(self.hi0 - self.lo0, self.hi1 - self.lo1)
        if width >= height:
            xm = 0.5 * (self.x0 + self.x1)
            lom, him = self._bounds_at(xm)
            return (Band(self.x0, xm, self.lo0, self.hi0, lom, him),
                    Band(xm, self.x1, lom, him, self.lo1, self.hi1))
        m0 = 0.5 * (self.lo0 + self.hi0)
        m1 = 0.5 * (self.lo1 + self.hi1)
        return (Band(self.x0, self.x1, self.lo0, m0, self.lo1, m1),
                Band(self.x0, self.x1, m0, self.hi0, m1, self.hi1))


Feature = Union[Segment, Band]


@dataclass(frozen=True, slots=True)
class GraphSet:
    """Closed graph of a completed function as a union of planar features."""

    features: tuple[Feature, ...]

    def boundary_segments(self) -> list[Segment]:
        out: list[Segment] = []
        for f in self.features:
            out.extend(f.boundary_segments())
        return out

    def csv_rows(self) -> list[tuple[float, float, float, float]]:
        return [(s.a[0], s.a[1], s.b[0], s.b[1]) for s in self.boundary_segments()]


def graph_of(f: PiecewiseFn) -> GraphSet:
    """Planar feature set of the completed graph of ``f``."""
    g = f.graph_completion()
    feats: list[Feature] = []
    for j, piece in enumerate(g.pieces):
        x0, x1 = g.breakpoints[j], g.breakpoints[j + 1]
        lo0, lo1 = _aff(piece.lower, x0), _aff(piece.lower, x1)
        hi0, hi1 = _aff(piece.upper, x0), _aff(piece.upper, x1)
        if piece.is_point:
            feats.append(Segment((x0, lo0), (x1, lo1)))
        else:
            feats.append(Band(x0, x1, lo0, hi0, lo1, hi1))
    for j in range(1, len(g.breakpoints) - 1):
        node = g.nodes[j - 1]
        if node.hi > node.lo:
            x = g.breakpoints[j]
            feats.append(Segment((x, node.lo), (x, node.hi)))
    return GraphSet(tuple(feats))


def _point_to_set(p: Point, feats: tuple[Feature, ...], norm: str) -> float:
    best = math.inf
    for f in feats:
        d = f.dist(p, norm)
        if d < best:
            best = d
            if best == 0.0:
                return 0.0
    return best


def _region_upper_bound(region: Feature, feats: tuple[Feature, ...], norm: str) -> float:
    corners = region.corners()
    best = math.inf
    for f in feats:
        worst = 0.0
        for c in corners:
            d = f.dist(c, norm)
            if d > worst:
                worst = d
            if worst >= best:
                break
        if worst < best:
            best = worst
    return best


def _directed_distance(src: GraphSet, dst: GraphSet, norm: str, tol: float) -> float:
    feats = dst.features
    best_lo = 0.0
    heap: list[tuple[float, int, Feature]] = []
    counter = 0
    for region in src.features:
        for c in region.corners():
            best_lo = max(best_lo, _point_to_set(c, feats, norm))
        ub = _region_upper_bound(region, feats, norm)
        heapq.heappush(heap, (-ub, counter, region))
        counter += 1
    max_pops = 200_000
    while heap:
        neg_ub, _, region = heapq.heappop(heap)
        ub = -neg_ub
        if ub <= best_lo + tol:
            break
        if region.diameter() <= tol * 0.25:
            # region essentially a point: its supremum is what we evaluated
            best_lo = max(best_lo, _point_to_set(region.corners()[0], feats, norm))
            continue
        for child in region.split():
            for c in child.corners():
                best_lo = max(best_lo, _point_to_set(c, feats, norm))
            child_ub = _region_upper_bound(child, feats, norm)
            if child_ub > best_lo + tol:
                heapq.heappush(heap, (-child_ub, counter, child))
                counter += 1
        max_pops -= 1
        if max_pops <= 0:
            raise RuntimeError("directed distance refinement did not converge")
    return best_lo


def hausdorff_distance(f: PiecewiseFn, g: PiecewiseFn, norm: str = "euclid",
                       tol: float = 1e-9) -> float:
    """Hausdorff distance between the completed graphs of ``f`` and ``g``.

    Symmetric max of the two directed sup-inf distances, resolved to within
    ``tol``.  Zero exactly when the completed graphs coincide as closed sets.
    """
    if norm not in NORMS:
        raise ValueError(f"norm must be one of {NORMS}, got {norm!r}")
    if f.domain != g.domain:
        raise DomainMismatchError(f"domains differ: {f.domain} vs {g.domain}")
    A = graph_of(f)
    B = graph_of(g)
    return max(_directed_distance(A, B, norm, tol),
               _directed_distance(B, A, norm, tol))
