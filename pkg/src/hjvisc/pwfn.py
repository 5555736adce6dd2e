"""Exact piecewise-affine interval-valued functions on an open interval.

A :class:`PiecewiseFn` represents a function on Omega = (a, b) whose value at
each point is a closed bounded interval.  Between consecutive breakpoints the
lower and upper bounds are affine; at each interior breakpoint the value is a
stored interval.  The two outermost breakpoints are bookkeeping sentinels at
``a`` and ``b`` and carry no values, since the domain is open.

For this representation class the semicontinuous envelopes are exact: the
inf/sup over shrinking neighborhoods stabilizes once the neighborhood meets
only the two adjacent pieces, so one-sided limits at breakpoints decide
everything.  Envelopes, graph completion, the continuity predicates, the
componentwise order, and finite lattice suprema/infima are all computed
without approximation.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

from .interval import Interval


class DomainError(ValueError):
    """Evaluation point outside the open domain."""


class DomainMismatchError(ValueError):
    """Binary operation on functions with different domains."""


class InclusionError(ValueError):
    """Replacement value not included in the current value."""


class NotHContinuousError(ValueError):
    """Lattice operation input fails the Hausdorff-continuity predicate."""


Affine = tuple[float, float]  # (intercept, slope)

# Order verdicts tolerate rounding noise of differently-routed arithmetic:
# evaluating c0 + c1*x loses absolute accuracy of order eps*|c1*x| under
# cancellation.  The slack stays three orders below the 1e-9 verdict
# tolerance; structural equality remains exact.
_ORDER_SLACK = 1e-12
_ULP_SLACK = 64 * 2.220446049250313e-16


def _aff(c: Affine, x: float) -> float:
    return c[0] + c[1] * x


def _gt(a: float, b: float) -> bool:
    """a > b beyond rounding noise."""
    return a - b > _ORDER_SLACK * max(1.0, abs(a), abs(b))


def _aff_gt_at(cf: Affine, cg: Affine, x: float) -> bool:
    """cf(x) > cg(x) beyond the cancellation error of affine evaluation."""
    scale = max(1.0, abs(cf[0]), abs(cg[0]), abs(cf[1] * x), abs(cg[1] * x))
    slack = max(_ORDER_SLACK, _ULP_SLACK * scale)
    return _aff(cf, x) - _aff(cg, x) > slack


@dataclass(frozen=True, slots=True)
class Piece:
    """Affine lower and upper bound on one open subinterval."""

    lower: Affine
    upper: Affine

    def __post_init__(self) -> None:
        object.__setattr__(self, "lower", (float(self.lower[0]), float(self.lower[1])))
        object.__setattr__(self, "upper", (float(self.upper[0]), float(self.upper[1])))

    @property
    def is_point(self) -> bool:
        return self.lower == self.upper


@dataclass(frozen=True, slots=True)
class PiecewiseFn:
    """Piecewise-affine interval-valued function on an open interval."""

    domain: tuple[float, float]
    breakpoints: tuple[float, ...]
    pieces: tuple[Piece, ...]
    nodes: tuple[Interval, ...]

    def __post_init__(self) -> None:
        a, b = float(self.domain[0]), float(self.domain[1])
        bps = tuple(float(x) for x in self.breakpoints)
        pieces = tuple(self.pieces)
        nodes = tuple(self.nodes)
        if not (a < b):
            raise ValueError(f"domain must satisfy a < b, got ({a}, {b})")
        if len(bps) < 2 or bps[0] != a or bps[-1] != b:
            raise ValueError("breakpoints must run from a to b")
        if any(bps[i] >= bps[i + 1] for i in range(len(bps) - 1)):
            raise ValueError("breakpoints must be strictly increasing")
        if len(pieces) != len(bps) - 1:
            raise ValueError("need one piece per subinterval")
        if len(nodes) != len(bps) - 2:
            raise ValueError("need one node value per interior breakpoint")
        for j, piece in enumerate(pieces):
            for x in (bps[j], bps[j + 1]):
                if _aff(piece.lower, x) > _aff(piece.upper, x):
                    raise ValueError(
                        f"lower bound exceeds upper bound on piece {j} at x={x}"
                    )
        object.__setattr__(self, "domain", (a, b))
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "nodes", nodes)

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def constant(cls, domain: tuple[float, float], value: float | Interval) -> PiecewiseFn:
        iv = value if isinstance(value, Interval) else Interval.point(float(value))
        return cls(domain, (domain[0], domain[1]),
                   (Piece((iv.lo, 0.0), (iv.hi, 0.0)),), ())

    @classmethod
    def affine(cls, domain: tuple[float, float], intercept: float, slope: float) -> PiecewiseFn:
        c = (float(intercept), float(slope))
        return cls(domain, (domain[0], domain[1]), (Piece(c, c),), ())

    @classmethod
    def band(cls, domain: tuple[float, float], lower: Affine, upper: Affine) -> PiecewiseFn:
        return cls(domain, (domain[0], domain[1]), (Piece(lower, upper),), ())

    @classmethod
    def from_points(cls, points: Sequence[tuple[float, float]]) -> PiecewiseFn:
        """Continuous piecewise-affine interpolant through (x, y) knots.

        The first and last x become the (open) domain endpoints.
        """
        if len(points) < 2:
            raise ValueError("need at least two points")
        xs = [float(x) for x, _ in points]
        ys = [float(y) for _, y in points]
        pieces = []
        for j in range(len(xs) - 1):
            dx = xs[j + 1] - xs[j]
            if dx <= 0:
                raise ValueError("x coordinates must be strictly increasing")
            slope = (ys[j + 1] - ys[j]) / dx
            c = (ys[j] - slope * xs[j], slope)
            pieces.append(Piece(c, c))
        nodes = tuple(Interval.point(y) for y in ys[1:-1])
        return cls((xs[0], xs[-1]), tuple(xs), tuple(pieces), nodes)

    @classmethod
    def step(cls, domain: tuple[float, float], at: float,
             left: float | Interval, right: float | Interval,
             node: float | Interval | None = None) -> PiecewiseFn:
        """Two constant pieces with a jump at ``at``.

        Without an explicit node value the jump is filled with the hull of
        the two levels, i.e. the completed step.
        """
        li = left if isinstance(left, Interval) else Interval.point(float(left))
        ri = right if isinstance(right, Interval) else Interval.point(float(right))
        if node is None:
            nd = li.hull(ri)
        else:
            nd = node if isinstance(node, Interval) else Interval.point(float(node))
        return cls(domain, (domain[0], float(at), domain[1]),
                   (Piece((li.lo, 0.0), (li.hi, 0.0)),
                    Piece((ri.lo, 0.0), (ri.hi, 0.0))), (nd,))

    # ------------------------------------------------------------------
    # Basic queries
    # ------------------------------------------------------------------

    @property
    def interior_breakpoints(self) -> tuple[float, ...]:
        return self.breakpoints[1:-1]

    def eval(self, x: float) -> Interval:
        """Value at an interior point; node value at interior breakpoints."""
        a, b = self.domain
        x = float(x)
        if not (a < x < b):
            raise DomainError(f"x={x} outside open domain ({a}, {b})")
        i = bisect_left(self.breakpoints, x)
        if self.breakpoints[i] == x:
            return self.nodes[i - 1]
        piece = self.pieces[i - 1]
        return Interval(_aff(piece.lower, x), _aff(piece.upper, x))

    def __call__(self, x: float) -> Interval:
        return self.eval(x)

    def is_point_valued(self) -> bool:
        return all(p.is_point for p in self.pieces) and all(n.is_point for n in self.nodes)

    def _limits(self, j: int, bound: str) -> tuple[float, float]:
        """One-sided limits (left, right) of a bound at interior breakpoint j."""
        x = self.breakpoints[j]
        left = getattr(self.pieces[j - 1], bound)
        right = getattr(self.pieces[j], bound)
        return _aff(left, x), _aff(right, x)

    # ------------------------------------------------------------------
    # Envelopes and graph completion
    # ------------------------------------------------------------------

    def lower_envelope(self) -> PiecewiseFn:
        """Largest lower-semicontinuous minorant (point-valued)."""
        pieces = tuple(Piece(p.lower, p.lower) for p in self.pieces)
        nodes = []
        for j in range(1, len(self.breakpoints) - 1):
            left, right = self._limits(j, "lower")
            nodes.append(Interval.point(min(self.nodes[j - 1].lo, left, right)))
        return PiecewiseFn(self.domain, self.breakpoints, pieces, tuple(nodes))

    def upper_envelope(self) -> PiecewiseFn:
        """Least upper-semicontinuous majorant (point-valued)."""
        pieces = tuple(Piece(p.upper, p.upper) for p in self.pieces)
        nodes = []
        for j in range(1, len(self.breakpoints) - 1):
            left, right = self._limits(j, "upper")
            nodes.append(Interval.point(max(self.nodes[j - 1].hi, left, right)))
        return PiecewiseFn(self.domain, self.breakpoints, pieces, tuple(nodes))

    def graph_completion(self) -> PiecewiseFn:
        """Interval hull of the lower and upper envelopes; idempotent."""
        nodes = []
        for j in range(1, len(self.breakpoints) - 1):
            llo, rlo = self._limits(j, "lower")
            lhi, rhi = self._limits(j, "upper")
            old = self.nodes[j - 1]
            nodes.append(Interval(min(old.lo, llo, rlo), max(old.hi, lhi, rhi)))
        return PiecewiseFn(self.domain, self.breakpoints, self.pieces, tuple(nodes))

    def is_s_continuous(self) -> bool:
        """Fixed point of graph completion."""
        return self.graph_completion().equals(self)

    def is_h_continuous(self) -> bool:
        """S-continuous with bounds that are each other's envelopes."""
        if not self.is_s_continuous():
            return False
        lower = self.lower_part()
        upper = self.upper_part()
        return (lower.upper_envelope().equals(upper)
                and upper.lower_envelope().equals(lower))

    def width_fn(self) -> PiecewiseFn:
        """Pointwise gap between upper and lower bound (point-valued)."""
        pieces = tuple(
            Piece((p.upper[0] - p.lower[0], p.upper[1] - p.lower[1]),
                  (p.upper[0] - p.lower[0], p.upper[1] - p.lower[1]))
            for p in self.pieces
        )
        nodes = tuple(Interval.point(n.width()) for n in self.nodes)
        return PiecewiseFn(self.domain, self.breakpoints, pieces, nodes)

    def lower_part(self) -> PiecewiseFn:
        """The lower bound as a point-valued function."""
        pieces = tuple(Piece(p.lower, p.lower) for p in self.pieces)
        nodes = tuple(Interval.point(n.lo) for n in self.nodes)
        return PiecewiseFn(self.domain, self.breakpoints, pieces, nodes)

    def upper_part(self) -> PiecewiseFn:
        """The upper bound as a point-valued function."""
        pieces = tuple(Piece(p.upper, p.upper) for p in self.pieces)
        nodes = tuple(Interval.point(n.hi) for n in self.nodes)
        return PiecewiseFn(self.domain, self.breakpoints, pieces, nodes)

    # ------------------------------------------------------------------
    # Structure: refinement, canonical form, equality, order
    # ------------------------------------------------------------------

    def refine(self, xs: Iterable[float]) -> PiecewiseFn:
        """Insert redundant breakpoints at the given interior points."""
        a, b = self.domain
        present = set(self.breakpoints)
        extra = sorted({float(x) for x in xs if a < float(x) < b} - present)
        if not extra:
            return self
        bps: list[float] = [a]
        pieces: list[Piece] = []
        nodes: list[Interval] = []
        for j, piece in enumerate(self.pieces):
            x0, x1 = self.breakpoints[j], self.breakpoints[j + 1]
            for e in extra:
                if x0 < e < x1:
                    pieces.append(piece)
                    bps.append(e)
                    nodes.append(Interval(_aff(piece.lower, e), _aff(piece.upper, e)))
            pieces.append(piece)
            bps.append(x1)
            if j < len(self.pieces) - 1:
                nodes.append(self.nodes[j])
        return PiecewiseFn(self.domain, tuple(bps), tuple(pieces), tuple(nodes))

    def canonical(self) -> PiecewiseFn:
        """Drop interior breakpoints where adjacent pieces are collinear and
        the node equals the shared piece value."""
        bps: list[float] = [self.breakpoints[0]]
        pieces: list[Piece] = [self.pieces[0]]
        nodes: list[Interval] = []
        for j in range(1, len(self.breakpoints) - 1):
            x = self.breakpoints[j]
            nxt = self.pieces[j]
            prev = pieces[-1]
            node = self.nodes[j - 1]
            redundant = (
                prev.lower == nxt.lower
                and prev.upper == nxt.upper
                and node == Interval(_aff(prev.lower, x), _aff(prev.upper, x))
            )
            if not redundant:
                bps.append(x)
                nodes.append(node)
                pieces.append(nxt)
        bps.append(self.breakpoints[-1])
        return PiecewiseFn(self.domain, tuple(bps), tuple(pieces), tuple(nodes))

    def _aligned(self, other: PiecewiseFn) -> tuple[PiecewiseFn, PiecewiseFn]:
        if self.domain != other.domain:
            raise DomainMismatchError(
                f"domains differ: {self.domain} vs {other.domain}"
            )
        union = sorted(set(self.interior_breakpoints) | set(other.interior_breakpoints))
        return self.refine(union), other.refine(union)

    def equals(self, other: PiecewiseFn, tol: float = 0.0) -> bool:
        """Value equality at every point, compared on merged breakpoints."""
        if self.domain != other.domain:
            return False
        f, g = self._aligned(other)
        for nf, ng in zip(f.nodes, g.nodes):
            if abs(nf.lo - ng.lo) > tol or abs(nf.hi - ng.hi) > tol:
                return False
        for j in range(len(f.pieces)):
            x0, x1 = f.breakpoints[j], f.breakpoints[j + 1]
            pf, pg = f.pieces[j], g.pieces[j]
            for bound in ("lower", "upper"):
                cf = getattr(pf, bound)
                cg = getattr(pg, bound)
                if (abs(_aff(cf, x0) - _aff(cg, x0)) > tol
                        or abs(_aff(cf, x1) - _aff(cg, x1)) > tol):
                    return False
        return True

    def leq(self, other: PiecewiseFn) -> bool:
        """Componentwise order: both bounds below at every point.

        Decided from piece values at merged-breakpoint endpoints and node
        values.  Comparisons carry a few ulps of slack so that one-sided
        limits computed along different arithmetic routes (e.g. at inserted
        crossing breakpoints) do not flip the verdict.
        """
        f, g = self._aligned(other)
        for nf, ng in zip(f.nodes, g.nodes):
            if _gt(nf.lo, ng.lo) or _gt(nf.hi, ng.hi):
                return False
        for j in range(len(f.pieces)):
            x0, x1 = f.breakpoints[j], f.breakpoints[j + 1]
            pf, pg = f.pieces[j], g.pieces[j]
            for bound in ("lower", "upper"):
                cf = getattr(pf, bound)
                cg = getattr(pg, bound)
                if _aff_gt_at(cf, cg, x0) or _aff_gt_at(cf, cg, x1):
                    return False
        return True

    def shrink_at(self, x: float, sub: Interval) -> PiecewiseFn:
        """Replace the value at an interior breakpoint by a subinterval."""
        x = float(x)
        try:
            j = self.breakpoints.index(x)
        except ValueError:
            raise DomainError(f"x={x} is not an interior breakpoint") from None
        if j == 0 or j == len(self.breakpoints) - 1:
            raise DomainError(f"x={x} is not an interior breakpoint")
        current = self.nodes[j - 1]
        if not current.contains(sub):
            raise InclusionError(f"{sub} is not included in {current} at x={x}")
        nodes = list(self.nodes)
        nodes[j - 1] = sub
        return PiecewiseFn(self.domain, self.breakpoints, self.pieces, tuple(nodes))

    def vertical_shift(self, dy: float) -> PiecewiseFn:
        """Translate both bounds upward by ``dy``."""
        dy = float(dy)
        pieces = tuple(
            Piece((p.lower[0] + dy, p.lower[1]), (p.upper[0] + dy, p.upper[1]))
            for p in self.pieces
        )
        nodes = tuple(Interval(n.lo + dy, n.hi + dy) for n in self.nodes)
        return PiecewiseFn(self.domain, self.breakpoints, pieces, nodes)

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "domain": [self.domain[0], self.domain[1]],
            "breakpoints": list(self.breakpoints),
            "pieces": [
                {"lower": list(p.lower), "upper": list(p.upper)} for p in self.pieces
            ],
            "nodes": [n.to_json() for n in self.nodes],
        }

    @classmethod
    def from_json(cls, data: dict) -> PiecewiseFn:
        try:
            domain = (float(data["domain"][0]), float(data["domain"][1]))
            bps = tuple(float(x) for x in data["breakpoints"])
            pieces = tuple(
                Piece((float(p["lower"][0]), float(p["lower"][1])),
                      (float(p["upper"][0]), float(p["upper"][1])))
                for p in data["pieces"]
            )
            nodes = tuple(Interval.from_json(n) for n in data["nodes"])
        except (KeyError, TypeError, IndexError) as exc:
            raise ValueError(f"malformed piecewise function object: {exc}") from exc
        return cls(domain, bps, pieces, nodes)

    def __repr__(self) -> str:
        a, b = self.domain
        return f"PiecewiseFn(({a}, {b}), {len(self.pieces)} pieces)"


# ---------------------------------------------------------------------------
# Pointwise extrema and lattice operations
# ---------------------------------------------------------------------------

def _pointwise_extremum(f: PiecewiseFn, g: PiecewiseFn, use_max: bool) -> PiecewiseFn:
    if not (f.is_point_valued() and g.is_point_valued()):
        raise ValueError("pointwise extremum requires point-valued operands")
    F, G = f._aligned(g)
    pick = max if use_max else min
    a, b = F.domain
    bps: list[float] = [a]
    pieces: list[Piece] = []
    nodes: list[Interval] = []
    for j in range(len(F.pieces)):
        x0, x1 = F.breakpoints[j], F.breakpoints[j + 1]
        c1 = F.pieces[j].lower
        c2 = G.pieces[j].lower
        d0 = _aff(c1, x0) - _aff(c2, x0)
        d1 = _aff(c1, x1) - _aff(c2, x1)
        wins0 = d0 >= 0 if use_max else d0 <= 0
        wins1 = d1 >= 0 if use_max else d1 <= 0
        if wins0 and wins1:
            segments = [(x1, c1)]
        elif not wins0 and not wins1:
            segments = [(x1, c2)]
        else:
            denom = c1[1] - c2[1]
            xc = (c2[0] - c1[0]) / denom if denom != 0.0 else x0
            if x0 < xc < x1:
                first, second = (c1, c2) if wins0 else (c2, c1)
                segments = [(xc, first), (x1, second)]
            else:
                # tie at an endpoint: one line dominates the whole piece
                xm = 0.5 * (x0 + x1)
                winner = c1 if pick(_aff(c1, xm), _aff(c2, xm)) == _aff(c1, xm) else c2
                segments = [(x1, winner)]
        for xe, c in segments:
            pieces.append(Piece(c, c))
            bps.append(xe)
            if xe != x1:
                nodes.append(Interval.point(pick(_aff(c1, xe), _aff(c2, xe))))
        if j < len(F.pieces) - 1:
            nodes.append(Interval.point(pick(F.nodes[j].lo, G.nodes[j].lo)))
    return PiecewiseFn((a, b), tuple(bps), tuple(pieces), tuple(nodes)).canonical()


def pointwise_max(f: PiecewiseFn, g: PiecewiseFn) -> PiecewiseFn:
    """Pointwise maximum of two point-valued functions."""
    return _pointwise_extremum(f, g, True)


def pointwise_min(f: PiecewiseFn, g: PiecewiseFn) -> PiecewiseFn:
    """Pointwise minimum of two point-valued functions."""
    return _pointwise_extremum(f, g, False)


def _check_family(fs: Sequence[PiecewiseFn]) -> list[PiecewiseFn]:
    fs = list(fs)
    if not fs:
        raise ValueError("empty family")
    for i, f in enumerate(fs[1:], start=1):
        if f.domain != fs[0].domain:
            raise DomainMismatchError(f"family member {i} has a different domain")
    for i, f in enumerate(fs):
        if not f.is_h_continuous():
            raise NotHContinuousError(f"family member {i} is not Hausdorff-continuous")
    return fs


def lattice_sup(fs: Sequence[PiecewiseFn]) -> PiecewiseFn:
    """Supremum of a finite family in the Hausdorff-continuous lattice.

    Computed as the graph completion of the upper-semicontinuous envelope of
    the pointwise maximum of the upper bounds; the result is
    Hausdorff-continuous and bounds every input from above.
    """
    fs = _check_family(fs)
    psi = reduce(pointwise_max, (f.upper_part() for f in fs))
    return psi.upper_envelope().graph_completion().canonical()


def lattice_inf(fs: Sequence[PiecewiseFn]) -> PiecewiseFn:
    """Infimum of a finite family; dual of :func:`lattice_sup`."""
    fs = _check_family(fs)
    psi = reduce(pointwise_min, (f.lower_part() for f in fs))
    return psi.lower_envelope().graph_completion().canonical()
