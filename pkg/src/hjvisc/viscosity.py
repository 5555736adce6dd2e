"""Slope sets and viscosity sub/supersolution verifiers.

For a point-valued piecewise-affine function the gradients of smooth test
functions touching the graph from above (below) at a point form a set with
one of six shapes: empty, a single slope, a bounded slope interval at a
kink, a half line at a jump, or the whole line at an isolated spike.  These
sets are computed exactly from one-sided slopes and limits, so the verifiers
only approximate where the set itself is unbounded: half lines and the whole
line are sampled on a symmetric grid truncated at a configurable bound, and
every truncation is disclosed in the report.
"""

from __future__ import annotations

import random
from bisect import bisect_left
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .hamiltonian import Hamiltonian
from .pwfn import DomainError, PiecewiseFn, _gt


def _near(a: float, b: float) -> bool:
    return not _gt(a, b) and not _gt(b, a)


class NotSContinuousError(ValueError):
    """Interval-solution verifier input is not a graph completion."""


class SemicontinuityError(ValueError):
    """Function fails the one-sided continuity the differential requires."""


class SlopeKind(str, Enum):
    EMPTY = "empty"
    POINT = "point"
    INTERVAL = "interval"
    HALF_LINE_UP = "half_line_up"
    HALF_LINE_DOWN = "half_line_down"
    WHOLE_LINE = "whole_line"


@dataclass(frozen=True, slots=True)
class SlopeSet:
    """Set of admissible test-function slopes at a point."""

    kind: SlopeKind
    lo: float | None = None
    hi: float | None = None

    @classmethod
    def empty(cls) -> SlopeSet:
        return cls(SlopeKind.EMPTY)

    @classmethod
    def point(cls, s: float) -> SlopeSet:
        return cls(SlopeKind.POINT, s, s)

    @classmethod
    def closed(cls, lo: float, hi: float) -> SlopeSet:
        if lo == hi:
            return cls.point(lo)
        return cls(SlopeKind.INTERVAL, lo, hi)

    @classmethod
    def at_least(cls, s: float) -> SlopeSet:
        return cls(SlopeKind.HALF_LINE_UP, s, None)

    @classmethod
    def at_most(cls, s: float) -> SlopeSet:
        return cls(SlopeKind.HALF_LINE_DOWN, None, s)

    @classmethod
    def whole_line(cls) -> SlopeSet:
        return cls(SlopeKind.WHOLE_LINE)

    @property
    def is_unbounded(self) -> bool:
        return self.kind in (SlopeKind.HALF_LINE_UP, SlopeKind.HALF_LINE_DOWN,
                             SlopeKind.WHOLE_LINE)

    def contains(self, p: float) -> bool:
        if self.kind is SlopeKind.EMPTY:
            return False
        if self.kind is SlopeKind.WHOLE_LINE:
            return True
        if self.kind is SlopeKind.POINT:
            return p == self.lo
        if self.kind is SlopeKind.INTERVAL:
            return self.lo <= p <= self.hi
        if self.kind is SlopeKind.HALF_LINE_UP:
            return p >= self.lo
        return p <= self.hi

    def sample(self, p_max: float, n: int) -> tuple[list[float], bool]:
        """Representative slopes; second value reports truncation."""
        if self.kind is SlopeKind.EMPTY:
            return [], False
        if self.kind is SlopeKind.POINT:
            return [self.lo], False
        if self.kind is SlopeKind.INTERVAL:
            return [self.lo, 0.5 * (self.lo + self.hi), self.hi], False
        if self.kind is SlopeKind.WHOLE_LINE:
            return list(_grid(-p_max, p_max, n)), True
        if self.kind is SlopeKind.HALF_LINE_UP:
            lo = self.lo
            hi = max(p_max, lo)
            return sorted({lo, *_grid(max(lo, -p_max), hi, n)}), True
        hi = self.hi
        lo = min(-p_max, hi)
        return sorted({hi, *_grid(lo, min(hi, p_max), n)}), True

    def describe(self) -> str:
        if self.kind is SlopeKind.EMPTY:
            return "{}"
        if self.kind is SlopeKind.POINT:
            return f"{{{self.lo}}}"
        if self.kind is SlopeKind.INTERVAL:
            return f"[{self.lo}, {self.hi}]"
        if self.kind is SlopeKind.HALF_LINE_UP:
            return f"[{self.lo}, +inf)"
        if self.kind is SlopeKind.HALF_LINE_DOWN:
            return f"(-inf, {self.hi}]"
        return "(-inf, +inf)"


def _grid(lo: float, hi: float, n: int) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def _require_point_valued(f: PiecewiseFn, what: str) -> None:
    if not f.is_point_valued():
        raise ValueError(
            f"{what} is defined for point-valued functions; "
            "split interval-valued inputs into their bounds first"
        )


def _locate(f: PiecewiseFn, x: float) -> tuple[int, bool]:
    """(index, at_breakpoint): piece index, or breakpoint index if exact hit."""
    a, b = f.domain
    if not (a < x < b):
        raise DomainError(f"x={x} outside open domain ({a}, {b})")
    i = bisect_left(f.breakpoints, x)
    if f.breakpoints[i] == x:
        return i, True
    return i - 1, False


def superdifferential(f: PiecewiseFn, x: float) -> SlopeSet:
    """Slopes of test functions touching an u.s.c. point-valued f from above.

    Value-versus-limit comparisons carry the package's rounding slack, so
    one-sided limits evaluated through affine coefficients cannot flip the
    classification at genuine continuity points.
    """
    _require_point_valued(f, "the superdifferential")
    x = float(x)
    idx, at_bp = _locate(f, x)
    if not at_bp:
        return SlopeSet.point(f.pieces[idx].lower[1])
    v = f.nodes[idx - 1].lo
    left, right = f._limits(idx, "lower")
    s_left = f.pieces[idx - 1].lower[1]
    s_right = f.pieces[idx].lower[1]
    if _gt(max(left, right), v):
        raise SemicontinuityError(f"not upper semicontinuous at x={x}")
    if _gt(v, left) and _gt(v, right):
        return SlopeSet.whole_line()
    if _near(left, right):
        if s_right <= s_left:
            return SlopeSet.closed(s_right, s_left)
        return SlopeSet.empty()
    if _near(v, right):
        return SlopeSet.at_least(s_right)
    return SlopeSet.at_most(s_left)


def subdifferential(f: PiecewiseFn, x: float) -> SlopeSet:
    """Slopes of test functions touching an l.s.c. point-valued f from below."""
    _require_point_valued(f, "the subdifferential")
    x = float(x)
    idx, at_bp = _locate(f, x)
    if not at_bp:
        return SlopeSet.point(f.pieces[idx].lower[1])
    v = f.nodes[idx - 1].lo
    left, right = f._limits(idx, "lower")
    s_left = f.pieces[idx - 1].lower[1]
    s_right = f.pieces[idx].lower[1]
    if _gt(v, min(left, right)):
        raise SemicontinuityError(f"not lower semicontinuous at x={x}")
    if _gt(left, v) and _gt(right, v):
        return SlopeSet.whole_line()
    if _near(left, right):
        if s_left <= s_right:
            return SlopeSet.closed(s_left, s_right)
        return SlopeSet.empty()
    if _near(v, right):
        return SlopeSet.at_most(s_right)
    return SlopeSet.at_least(s_left)


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class SampleConfig:
    """Sampling policy for the verifiers.

    ``extra`` random interior points per piece guard against Hamiltonians
    whose x-dependence changes sign inside a piece; slope sets themselves
    are constant there.
    """

    tolerance: float = 1e-9
    p_max: float = 1e3
    samples: int = 41
    extra: int = 32
    seed: int = 0


@dataclass(frozen=True, slots=True)
class SiteSample:
    x: float
    p: float | None
    phi: float | None
    ok: bool
    tag: str | None = None

    def to_json(self) -> dict:
        return {"x": self.x, "p": self.p, "phi": self.phi, "ok": self.ok,
                "tag": self.tag}


@dataclass(frozen=True, slots=True)
class TruncationNote:
    x: float
    kind: str
    p_max: float
    count: int

    def to_json(self) -> dict:
        return {"x": self.x, "kind": self.kind, "p_max": self.p_max,
                "count": self.count}


@dataclass(slots=True)
class VerificationReport:
    """Per-site pass/fail evidence; verdict is true iff every site passed."""

    verdict: bool
    sites: list[SiteSample]
    truncation: list[TruncationNote]
    tolerance: float
    seed: int | None = None
    notes: list[str] = field(default_factory=list)

    def failures(self) -> list[SiteSample]:
        return [s for s in self.sites if not s.ok]

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "sites": [s.to_json() for s in self.sites],
            "truncation": [t.to_json() for t in self.truncation],
            "notes": list(self.notes),
        }

    def summary(self, max_rows: int = 8) -> str:
        lines = [f"verdict: {'PASS' if self.verdict else 'FAIL'}",
                 f"sites checked: {len(self.sites)}  tolerance: {self.tolerance}"]
        for note in self.notes:
            lines.append(f"note: {note}")
        if self.truncation:
            worst = max(t.p_max for t in self.truncation)
            lines.append(
                f"truncation: {len(self.truncation)} unbounded slope set(s) "
                f"sampled up to |p| <= {worst}"
            )
        bad = self.failures()
        if bad:
            lines.append(f"failing sites ({len(bad)}):")
            for s in bad[:max_rows]:
                tag = f" [{s.tag}]" if s.tag else ""
                lines.append(f"  x={s.x:.6g} p={s.p} phi={s.phi}{tag}")
            if len(bad) > max_rows:
                lines.append(f"  ... and {len(bad) - max_rows} more")
        return "\n".join(lines)


def _check_points(f: PiecewiseFn, cfg: SampleConfig,
                  rng: random.Random) -> list[float]:
    pts = set(f.interior_breakpoints)
    for j in range(len(f.pieces)):
        x0, x1 = f.breakpoints[j], f.breakpoints[j + 1]
        pts.add(0.5 * (x0 + x1))
        for _ in range(cfg.extra):
            pts.add(rng.uniform(x0, x1))
    a, b = f.domain
    return sorted(p for p in pts if a < p < b)


def _verify_onesided(f: PiecewiseFn, ham: Hamiltonian, cfg: SampleConfig,
                     sub: bool, tag: str | None = None) -> VerificationReport:
    _require_point_valued(f, "the verifier")
    rng = random.Random(cfg.seed)
    sites: list[SiteSample] = []
    truncs: list[TruncationNote] = []
    differential = superdifferential if sub else subdifferential
    for x in _check_points(f, cfg, rng):
        sset = differential(f, x)
        slopes, truncated = sset.sample(cfg.p_max, cfg.samples)
        if truncated:
            truncs.append(TruncationNote(x, sset.kind.value, cfg.p_max,
                                         len(slopes)))
        if not slopes:
            sites.append(SiteSample(x, None, None, True, tag))
            continue
        u = f.eval(x).lo
        for p in slopes:
            phi = ham.eval(x, u, p)
            ok = phi <= cfg.tolerance if sub else phi >= -cfg.tolerance
            sites.append(SiteSample(x, p, phi, ok, tag))
    return VerificationReport(
        verdict=all(s.ok for s in sites),
        sites=sites,
        truncation=truncs,
        tolerance=cfg.tolerance,
        seed=cfg.seed,
    )


def verify_subsolution(f: PiecewiseFn, ham: Hamiltonian,
                       cfg: SampleConfig | None = None) -> VerificationReport:
    """Check Phi(x, f(x), p) <= tol for all admissible slopes from above."""
    return _verify_onesided(f, ham, cfg or SampleConfig(), sub=True)


def verify_supersolution(f: PiecewiseFn, ham: Hamiltonian,
                         cfg: SampleConfig | None = None) -> VerificationReport:
    """Check Phi(x, f(x), p) >= -tol for all admissible slopes from below."""
    return _verify_onesided(f, ham, cfg or SampleConfig(), sub=False)


def verify_interval_solution(f: PiecewiseFn, ham: Hamiltonian,
                             cfg: SampleConfig | None = None) -> VerificationReport:
    """Interval viscosity solution check for an S-continuous function.

    The lower bound must be a supersolution and the upper bound a
    subsolution; for an S-continuous input those bounds are automatically
    l.s.c. and u.s.c. respectively.
    """
    cfg = cfg or SampleConfig()
    if not f.is_s_continuous():
        raise NotSContinuousError(
            "input is not a graph completion; apply graph_completion first"
        )
    lower = _verify_onesided(f.lower_part(), ham, cfg, sub=False, tag="lower")
    upper = _verify_onesided(f.upper_part(), ham, cfg, sub=True, tag="upper")
    return VerificationReport(
        verdict=lower.verdict and upper.verdict,
        sites=lower.sites + upper.sites,
        truncation=lower.truncation + upper.truncation,
        tolerance=cfg.tolerance,
        seed=cfg.seed,
    )


def verify_envelope_solution(u: PiecewiseFn, z1: Sequence[PiecewiseFn],
                             z2: Sequence[PiecewiseFn], ham: Hamiltonian,
                             cfg: SampleConfig | None = None) -> VerificationReport:
    """Check that u is an envelope solution for the given witness families.

    Every member of ``z1`` must be a subsolution and every member of ``z2``
    a supersolution, and the pointwise sup over ``z1`` and inf over ``z2``
    must both equal ``u`` on the check set.  Only the supplied finite
    families at finitely many sites are examined; no finitary criterion for
    infinite families exists, and the report discloses this.
    """
    cfg = cfg or SampleConfig()
    z1 = list(z1)
    z2 = list(z2)
    if not z1 or not z2:
        raise ValueError("witness families must be nonempty")
    _require_point_valued(u, "the envelope check")
    sites: list[SiteSample] = []
    truncs: list[TruncationNote] = []
    verdict = True
    for k, w in enumerate(z1):
        rep = _verify_onesided(w, ham, cfg, sub=True, tag=f"z1[{k}]")
        verdict &= rep.verdict
        sites.extend(rep.sites)
        truncs.extend(rep.truncation)
    for k, w in enumerate(z2):
        rep = _verify_onesided(w, ham, cfg, sub=False, tag=f"z2[{k}]")
        verdict &= rep.verdict
        sites.extend(rep.sites)
        truncs.extend(rep.truncation)
    rng = random.Random(cfg.seed)
    pts = set(u.interior_breakpoints)
    for w in z1 + z2:
        pts.update(w.interior_breakpoints)
    a, b = u.domain
    ordered = sorted(pts)
    for x0, x1 in zip([a, *ordered], [*ordered, b]):
        pts.add(0.5 * (x0 + x1))
    for _ in range(cfg.extra):
        pts.add(rng.uniform(a, b))
    for x in sorted(p for p in pts if a < p < b):
        uv = u.eval(x).lo
        sup1 = max(w.eval(x).lo for w in z1)
        inf2 = min(w.eval(x).lo for w in z2)
        ok_sup = abs(sup1 - uv) <= cfg.tolerance
        ok_inf = abs(inf2 - uv) <= cfg.tolerance
        sites.append(SiteSample(x, None, sup1 - uv, ok_sup, "sup(z1)=u"))
        sites.append(SiteSample(x, None, inf2 - uv, ok_inf, "inf(z2)=u"))
        verdict &= ok_sup and ok_inf
    return VerificationReport(
        verdict=bool(verdict),
        sites=sites,
        truncation=truncs,
        tolerance=cfg.tolerance,
        seed=cfg.seed,
        notes=[
            "envelope check examines the supplied finite families at "
            "finitely many sites; infinite families are out of reach"
        ],
    )
