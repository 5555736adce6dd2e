"""Grid-based Perron construction of a solution between two brackets.

The solver realizes the supremum of the admissible family
{w : w below the upper bracket, upper bound of w a subsolution}
on a uniform grid.  Two monotone mechanisms drive the iterate upward from
the lower bracket:

* cap-constrained raise sweeps: each node is raised as far as the discrete
  subsolution test at the affected nodes and the sampled upper bracket
  allow (the constructive counterpart of taking the supremum of the whole
  admissible family, without which slope-bounded Hamiltonians such as
  ``p - 1`` would stall at the lower bracket, whose supersolution test
  never fails);
* local bumps at nodes where the discrete supersolution test still fails:
  a parabolic cap with a witness slope from the discrete subdifferential,
  accepted only when its postconditions hold and it stays below the
  bracket.

Both mechanisms preserve nodewise monotonicity and the bracket, so the
iteration converges; it stops when no node fails the supersolution test by
more than the residual tolerance.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .hamiltonian import EvalError, Hamiltonian
from .pwfn import PiecewiseFn, _aff
from .viscosity import (
    SampleConfig,
    SiteSample,
    VerificationReport,
    verify_subsolution,
    verify_supersolution,
)


class PreconditionError(ValueError):
    """Solver bracket hypotheses violated."""


class BumpError(RuntimeError):
    pass


class BumpUnwarrantedError(BumpError):
    """Requested a bump where the supersolution test passes."""


class BumpPostconditionError(BumpError):
    def __init__(self, which: str, message: str):
        super().__init__(f"bump postcondition {which} failed: {message}")
        self.which = which


class NonConvergenceError(RuntimeError):
    def __init__(self, message: str, trace: "SolveTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass
class GridFn:
    """Uniform-grid sampled interval-valued function on (a, b)."""

    domain: tuple[float, float]
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise ValueError("lower and upper value arrays must match in length")
        if self.n < 3:
            raise ValueError("need at least 3 grid nodes")
        if np.any(self.lo > self.hi):
            raise ValueError("lower values must not exceed upper values")

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def h(self) -> float:
        a, b = self.domain
        return (b - a) / (self.n - 1)

    def xs(self) -> np.ndarray:
        a, b = self.domain
        return np.linspace(a, b, self.n)

    def copy(self) -> GridFn:
        return GridFn(self.domain, self.lo.copy(), self.hi.copy())

    def is_point_valued(self) -> bool:
        return bool(np.all(self.lo == self.hi))

    def to_json(self) -> dict:
        return {
            "domain": [self.domain[0], self.domain[1]],
            "lower": self.lo.tolist(),
            "upper": self.hi.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> GridFn:
        return cls((float(data["domain"][0]), float(data["domain"][1])),
                   np.array(data["lower"], dtype=float),
                   np.array(data["upper"], dtype=float))


def sample_to_grid(f: PiecewiseFn, n: int) -> GridFn:
    """Node values of ``f`` on a uniform grid; the open-domain endpoints get
    the one-sided limits of the adjacent piece."""
    if n < 3:
        raise ValueError("need at least 3 grid nodes")
    a, b = f.domain
    xs = np.linspace(a, b, n)
    lo = np.empty(n)
    hi = np.empty(n)
    lo[0] = _aff(f.pieces[0].lower, a)
    hi[0] = _aff(f.pieces[0].upper, a)
    lo[-1] = _aff(f.pieces[-1].lower, b)
    hi[-1] = _aff(f.pieces[-1].upper, b)
    for i in range(1, n - 1):
        v = f.eval(float(xs[i]))
        lo[i] = v.lo
        hi[i] = v.hi
    return GridFn(f.domain, lo, hi)


def _erode(v: np.ndarray) -> np.ndarray:
    left = np.concatenate(([v[0]], v[:-1]))
    right = np.concatenate((v[1:], [v[-1]]))
    return np.minimum(np.minimum(left, v), right)


def _dilate(v: np.ndarray) -> np.ndarray:
    left = np.concatenate(([v[0]], v[:-1]))
    right = np.concatenate((v[1:], [v[-1]]))
    return np.maximum(np.maximum(left, v), right)


def discrete_envelopes(g: GridFn) -> GridFn:
    """One-cell discrete graph completion: erode lowers, dilate uppers."""
    return GridFn(g.domain, _erode(g.lo), _dilate(g.hi))


# ---------------------------------------------------------------------------
# Discrete verification
# ---------------------------------------------------------------------------

def _phi_extremes(ham: Hamiltonian, xs: np.ndarray, us: np.ndarray,
                  lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Min and max of Phi over the slope samples {lo, mid, hi} per node."""
    phis = np.stack([
        ham.eval_array(xs, us, lo),
        ham.eval_array(xs, us, 0.5 * (lo + hi)),
        ham.eval_array(xs, us, hi),
    ])
    return np.min(phis, axis=0), np.max(phis, axis=0)


def _sub_ok(vhi: np.ndarray, xs: np.ndarray, h: float, ham: Hamiltonian,
            tol: float) -> np.ndarray:
    """Discrete subsolution test per node (boundary nodes pass vacuously)."""
    s = np.diff(vhi) / h
    sm = s[:-1]
    sp = s[1:]
    nonempty = sp <= sm
    _, phi_max = _phi_extremes(ham, xs[1:-1], vhi[1:-1], sp, sm)
    ok_inner = np.where(nonempty, phi_max <= tol, True)
    return np.concatenate(([True], ok_inner, [True]))


def _super_violation(vlo: np.ndarray, xs: np.ndarray, h: float,
                     ham: Hamiltonian) -> np.ndarray:
    """Supersolution violation magnitude per node (0 where the test holds)."""
    s = np.diff(vlo) / h
    sm = s[:-1]
    sp = s[1:]
    nonempty = sm <= sp
    phi_min, _ = _phi_extremes(ham, xs[1:-1], vlo[1:-1], sm, sp)
    viol = np.where(nonempty & np.isfinite(phi_min), np.maximum(0.0, -phi_min), 0.0)
    viol = np.where(nonempty & ~np.isfinite(phi_min), np.inf, viol)
    return np.concatenate(([0.0], viol, [0.0]))


def discrete_verify(g: GridFn, ham: Hamiltonian, mode: str,
                    cfg: SampleConfig | None = None) -> VerificationReport:
    """One-sided difference-quotient verification on the grid.

    ``mode`` selects the side: "sub" tests the upper values against the
    discrete superdifferential, "super" the lower values against the
    discrete subdifferential.  Slope sets here are bounded intervals, so no
    truncation occurs.
    """
    if mode not in ("sub", "super"):
        raise ValueError(f"mode must be 'sub' or 'super', got {mode!r}")
    cfg = cfg or SampleConfig()
    v = g.hi if mode == "sub" else g.lo
    xs = g.xs()
    h = g.h
    s = np.diff(v) / h
    sites: list[SiteSample] = []
    for i in range(1, g.n - 1):
        sm = s[i - 1]
        sp = s[i]
        if mode == "sub":
            if sp > sm:
                sites.append(SiteSample(float(xs[i]), None, None, True))
                continue
            slopes = (sp, 0.5 * (sm + sp), sm)
        else:
            if sm > sp:
                sites.append(SiteSample(float(xs[i]), None, None, True))
                continue
            slopes = (sm, 0.5 * (sm + sp), sp)
        for p in slopes:
            phi = ham.eval(float(xs[i]), float(v[i]), float(p))
            ok = phi <= cfg.tolerance if mode == "sub" else phi >= -cfg.tolerance
            sites.append(SiteSample(float(xs[i]), float(p), float(phi), ok))
    return VerificationReport(
        verdict=all(site.ok for site in sites),
        sites=sites,
        truncation=[],
        tolerance=cfg.tolerance,
        seed=cfg.seed,
    )


# ---------------------------------------------------------------------------
# Bump
# ---------------------------------------------------------------------------

def bump(g: GridFn, y_index: int, delta: float, r: float, ham: Hamiltonian,
         cfg: SampleConfig | None = None) -> GridFn:
    """Raise ``g`` near node ``y_index`` with a parabolic cap.

    The cap uses a witness slope from the discrete subdifferential at the
    node, where the supersolution test must fail; the result equals ``g``
    outside the open ball of radius ``r``, dominates ``g`` everywhere, keeps
    the upper values a discrete subsolution, and keeps the raised lower
    values below ``max(lower, lower[y] + delta)`` inside the ball.  Any of
    these failing raises :class:`BumpPostconditionError`; callers retry with
    smaller ``delta`` and ``r``.
    """
    cfg = cfg or SampleConfig()
    if not (1 <= y_index <= g.n - 2):
        raise ValueError(f"bump site {y_index} must be an interior node")
    if delta <= 0 or r <= 0:
        raise ValueError("delta and r must be positive")
    xs = g.xs()
    h = g.h
    y = float(xs[y_index])
    sm = (g.lo[y_index] - g.lo[y_index - 1]) / h
    sp = (g.lo[y_index + 1] - g.lo[y_index]) / h
    if sm > sp:
        raise BumpUnwarrantedError(
            f"empty discrete subdifferential at node {y_index}"
        )
    slopes = (sm, 0.5 * (sm + sp), sp)
    phis = [ham.eval(y, float(g.lo[y_index]), float(p)) for p in slopes]
    best = int(np.argmin(phis))
    if phis[best] >= -cfg.tolerance:
        raise BumpUnwarrantedError(
            f"supersolution test passes at node {y_index}; bump unwarranted"
        )
    witness = float(slopes[best])
    dx = xs - y
    mask = np.abs(dx) < r
    b_vals = np.full(g.n, -np.inf)
    b_vals[mask] = (g.lo[y_index] + delta + witness * dx[mask]
                    - dx[mask] ** 2 / r)
    new_lo = np.maximum(g.lo, b_vals)
    new_hi = np.maximum(g.hi, b_vals)
    w = GridFn(g.domain, new_lo, new_hi)

    sub_before = _sub_ok(g.hi, xs, h, ham, cfg.tolerance)
    sub_after = _sub_ok(w.hi, xs, h, ham, cfg.tolerance)
    if np.any(sub_before & ~sub_after):
        raise BumpPostconditionError(
            "(i)", "upper values no longer pass the subsolution test")
    if np.any(w.lo < g.lo) or np.any(w.hi < g.hi):
        raise BumpPostconditionError("(ii)", "result does not dominate input")
    if np.array_equal(w.lo, g.lo) and np.array_equal(w.hi, g.hi):
        raise BumpPostconditionError("(iii)", "result equals input")
    if (np.any(w.lo[~mask] != g.lo[~mask])
            or np.any(w.hi[~mask] != g.hi[~mask])):
        raise BumpPostconditionError("(iv)", "changed outside the ball")
    cap = np.maximum(g.lo[mask], g.lo[y_index] + delta)
    if np.any(w.lo[mask] > cap):
        raise BumpPostconditionError(
            "(v)", "raised lower values exceed the local cap")
    return w


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class SolveConfig:
    residual_tol: float = 1e-8
    max_iters: int = 20000
    bump_retries: int = 20
    sweeps: bool = True
    sweep_bisections: int = 46
    tolerance: float = 1e-9
    p_max: float = 1e3
    samples: int = 41
    seed: int = 0
    max_snapshots: int = 32


@dataclass(slots=True)
class BumpRecord:
    kind: str
    iteration: int
    site: int
    x: float
    residual: float
    delta: float
    radius: float
    retries: int
    accepted: bool
    pre_value: float = 0.0
    post_value: float = 0.0
    reason: str = ""


@dataclass(slots=True)
class SweepRecord:
    kind: str
    iteration: int
    passes: int
    total_raise: float
    residual_before: float = float("nan")


@dataclass(slots=True)
class SolveTrace:
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    termination: str = ""
    iterations: int = 0
    final_residual: float = float("nan")
    stalled: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "termination": self.termination,
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "stalled": list(self.stalled),
            "records": [asdict(r) for r in self.records],
            "snapshots": [
                {"iteration": it, "lower": lo, "upper": hi}
                for it, lo, hi in self.snapshots
            ],
        }


def _snapshot(trace: SolveTrace, cfg: SolveConfig, iteration: int,
              u: GridFn, force: bool = False) -> None:
    if force or len(trace.snapshots) < cfg.max_snapshots:
        trace.snapshots.append((iteration, u.lo.tolist(), u.hi.tolist()))


def _raise_admissible(hi: np.ndarray, idx: np.ndarray, deltas: np.ndarray,
                      xs: np.ndarray, h: float, ham: Hamiltonian,
                      tol: float) -> np.ndarray:
    """Per-candidate admissibility of raising hi[idx] by deltas.

    Candidates are spaced at stride 3, so the three test nodes around one
    candidate never touch another candidate's quotients.
    """
    trial = hi.copy()
    trial[idx] += deltas
    ok = _sub_ok(trial, xs, h, ham, tol)
    okpad = np.concatenate(([True], ok, [True]))
    return okpad[idx] & okpad[idx + 1] & okpad[idx + 2]


def _sweep_stage(u: GridFn, cap: GridFn, ham: Hamiltonian, cfg: SolveConfig,
                 xs: np.ndarray) -> tuple[float, int]:
    """Monotone Gauss-Seidel raises toward the cap; returns (raise, passes)."""
    h = u.h
    scale = max(1.0, float(np.max(np.abs(cap.hi))))
    floor = 1e-12 * scale
    total = 0.0
    passes = 0
    max_passes = 4 * u.n
    while passes < max_passes:
        passes += 1
        pass_raise = 0.0
        for color in range(3):
            idx = np.arange(color, u.n, 3)
            slack = np.minimum(cap.hi[idx] - u.hi[idx], cap.lo[idx] - u.lo[idx])
            slack = np.maximum(slack, 0.0)
            live = slack > floor
            if not np.any(live):
                continue
            idx = idx[live]
            slack = slack[live]
            accepted = np.zeros_like(slack)
            ok = _raise_admissible(u.hi, idx, slack, xs, h, ham, cfg.tolerance)
            accepted[ok] = slack[ok]
            pending = ~ok
            if np.any(pending):
                lo_f = np.zeros(int(pending.sum()))
                hi_f = slack[pending]
                pid = idx[pending]
                for _ in range(cfg.sweep_bisections):
                    mid = 0.5 * (lo_f + hi_f)
                    okm = _raise_admissible(u.hi, pid, mid, xs, h, ham,
                                            cfg.tolerance)
                    lo_f = np.where(okm, mid, lo_f)
                    hi_f = np.where(okm, hi_f, mid)
                accepted[pending] = lo_f
            grew = accepted > floor
            if np.any(grew):
                gidx = idx[grew]
                # clamp: v + (cap - v) can overshoot cap by one ulp
                u.hi[gidx] = np.minimum(u.hi[gidx] + accepted[grew],
                                        cap.hi[gidx])
                u.lo[gidx] = np.minimum(u.lo[gidx] + accepted[grew],
                                        cap.lo[gidx])
                pass_raise += float(accepted[grew].sum())
        total += pass_raise
        if pass_raise <= floor:
            break
    return total, passes


def _check_preconditions(ham: Hamiltonian, u1: PiecewiseFn, u2: PiecewiseFn,
                         cfg: SolveConfig) -> None:
    scfg = SampleConfig(tolerance=cfg.tolerance, p_max=cfg.p_max,
                        samples=cfg.samples, seed=cfg.seed)
    if not u1.is_h_continuous():
        raise PreconditionError("lower bracket is not Hausdorff-continuous")
    if not u2.is_h_continuous():
        raise PreconditionError("upper bracket is not Hausdorff-continuous")
    if not verify_subsolution(u1.upper_part(), ham, scfg).verdict:
        raise PreconditionError(
            "upper bound of the lower bracket is not a subsolution")
    if not verify_supersolution(u2.lower_part(), ham, scfg).verdict:
        raise PreconditionError(
            "lower bound of the upper bracket is not a supersolution")
    if not u1.leq(u2):
        raise PreconditionError("brackets are not ordered: need u1 <= u2")


def perron_solve(ham: Hamiltonian, u1: PiecewiseFn, u2: PiecewiseFn, n: int,
                 cfg: SolveConfig | None = None) -> tuple[GridFn, SolveTrace]:
    """Construct a grid solution between the brackets.

    Returns the final grid function (nodewise between the sampled brackets,
    passing the discrete subsolution test throughout and the supersolution
    test within ``residual_tol``) together with the iteration trace.
    """
    cfg = cfg or SolveConfig()
    _check_preconditions(ham, u1, u2, cfg)
    u = sample_to_grid(u1, n)
    cap = sample_to_grid(u2, n)
    if np.any(u.lo > cap.lo) or np.any(u.hi > cap.hi):
        raise PreconditionError("sampled brackets are not nodewise ordered")
    lower_bracket = u.copy()
    xs = u.xs()
    h = u.h
    scfg = SampleConfig(tolerance=cfg.tolerance, p_max=cfg.p_max,
                        samples=cfg.samples, seed=cfg.seed)
    trace = SolveTrace()
    _snapshot(trace, cfg, 0, u)
    stalled: set[int] = set()
    iteration = 0
    residual = np.inf
    while iteration < cfg.max_iters:
        iteration += 1
        prev_lo = u.lo.copy()
        prev_hi = u.hi.copy()
        if cfg.sweeps:
            residual_before = float(np.max(_super_violation(u.lo, xs, h, ham)))
            raised, passes = _sweep_stage(u, cap, ham, cfg, xs)
            if raised > 0.0:
                trace.records.append(
                    SweepRecord("sweep", iteration, passes, raised,
                                residual_before))
                stalled.clear()
        if np.any(u.lo < prev_lo) or np.any(u.hi < prev_hi):
            raise AssertionError("iterate lost monotonicity")
        if np.any(u.lo > cap.lo) or np.any(u.hi > cap.hi):
            raise AssertionError("iterate escaped the bracket")
        viol = _super_violation(u.lo, xs, h, ham)
        residual = float(np.max(viol))
        if residual <= cfg.residual_tol:
            trace.termination = "converged"
            break
        order = np.argsort(viol)[::-1]
        site = next((int(i) for i in order
                     if viol[i] > cfg.residual_tol and int(i) not in stalled),
                    None)
        if site is None:
            trace.termination = "stalled"
            break
        accepted = None
        reason = ""
        delta0 = max(h, float(viol[site]) * h)
        radius0 = 4.0 * h
        retries = 0
        for k in range(cfg.bump_retries):
            retries = k + 1
            delta = delta0 / 2.0 ** k
            radius = radius0 / 2.0 ** k
            try:
                w = bump(u, site, delta, radius, ham, scfg)
            except (BumpError, EvalError) as exc:
                reason = str(exc)
                continue
            if np.any(w.lo > cap.lo) or np.any(w.hi > cap.hi):
                reason = "candidate exceeds the sampled upper bracket"
                continue
            accepted = (w, delta, radius)
            break
        if accepted is None:
            stalled.add(site)
            trace.records.append(BumpRecord(
                "bump", iteration, site, float(xs[site]), float(viol[site]),
                delta0, radius0, retries, False,
                float(u.lo[site]), float(u.lo[site]), reason))
            continue
        w, delta, radius = accepted
        trace.records.append(BumpRecord(
            "bump", iteration, site, float(xs[site]), float(viol[site]),
            delta, radius, retries, True,
            float(u.lo[site]), float(w.lo[site])))
        u = w
        _snapshot(trace, cfg, iteration, u)
        stalled.clear()
    else:
        trace.termination = "max_iters"
    trace.iterations = iteration
    trace.final_residual = residual
    trace.stalled = sorted(stalled)
    _snapshot(trace, cfg, iteration, u, force=True)
    if np.any(u.lo < lower_bracket.lo) or np.any(u.hi < lower_bracket.hi):
        raise AssertionError("iterate fell below the lower bracket")
    if trace.termination != "converged":
        raise NonConvergenceError(
            f"solver stopped ({trace.termination}) with residual {residual:g}",
            trace)
    return u, trace
