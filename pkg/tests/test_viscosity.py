import random
from functools import reduce

import pytest

from conftest import (
    DOM,
    random_point_valued,
    subsolution_family,
    supersolution_family,
)
from hjvisc.hamiltonian import parse
from hjvisc.interval import Interval
from hjvisc.pwfn import PiecewiseFn, pointwise_max, pointwise_min
from hjvisc.viscosity import (
    NotSContinuousError,
    SampleConfig,
    SemicontinuityError,
    SlopeKind,
    SlopeSet,
    subdifferential,
    superdifferential,
    verify_envelope_solution,
    verify_interval_solution,
    verify_subsolution,
    verify_supersolution,
)

IDENT = PiecewiseFn.affine(DOM, 0.0, 1.0)
SPIKE = PiecewiseFn.step(DOM, 0.5, 0.0, 0.0, node=1.0)       # one-point peak
ANTISPIKE = PiecewiseFn.step(DOM, 0.5, 1.0, 1.0, node=0.0)   # one-point dip
TENT = PiecewiseFn.from_points([(0, 0), (0.5, 0.5), (1, 0)])
VEE = PiecewiseFn.from_points([(0, 0.5), (0.5, 0.0), (1, 0.5)])


# ---------------------------------------------------------------------------
# Slope sets
# ---------------------------------------------------------------------------

def test_superdifferential_examples():
    assert superdifferential(SPIKE, 0.5).kind is SlopeKind.WHOLE_LINE
    assert superdifferential(IDENT, 0.37) == SlopeSet.point(1.0)
    kink = superdifferential(TENT, 0.5)
    assert kink == SlopeSet.closed(-1.0, 1.0)


def test_subdifferential_examples():
    assert subdifferential(ANTISPIKE, 0.5).kind is SlopeKind.WHOLE_LINE
    assert subdifferential(IDENT, 0.37) == SlopeSet.point(1.0)
    assert subdifferential(VEE, 0.5) == SlopeSet.closed(-1.0, 1.0)
    assert subdifferential(TENT, 0.5).kind is SlopeKind.EMPTY
    assert superdifferential(VEE, 0.5).kind is SlopeKind.EMPTY


def test_halfline_slope_sets_at_jumps():
    up = PiecewiseFn.step(DOM, 0.5, 0.0, 1.0, node=1.0)   # usc up-jump
    s = superdifferential(up, 0.5)
    assert s.kind is SlopeKind.HALF_LINE_UP and s.lo == 0.0
    down = PiecewiseFn.step(DOM, 0.5, 1.0, 0.0, node=1.0)  # usc down-jump
    s = superdifferential(down, 0.5)
    assert s.kind is SlopeKind.HALF_LINE_DOWN and s.hi == 0.0
    up_lsc = PiecewiseFn.step(DOM, 0.5, 0.0, 1.0, node=0.0)
    s = subdifferential(up_lsc, 0.5)
    assert s.kind is SlopeKind.HALF_LINE_UP and s.lo == 0.0


def test_semicontinuity_enforced():
    not_usc = PiecewiseFn.step(DOM, 0.5, 0.0, 1.0, node=0.5)
    with pytest.raises(SemicontinuityError):
        superdifferential(not_usc, 0.5)
    with pytest.raises(SemicontinuityError):
        subdifferential(SPIKE, 0.5)


def test_interval_valued_inputs_rejected():
    z = PiecewiseFn.band(DOM, (0.0, 1.0), (1.0, 1.0))
    with pytest.raises(ValueError):
        superdifferential(z, 0.5)
    with pytest.raises(ValueError):
        verify_subsolution(z, parse("p - 1"))


def test_slope_set_sampling_and_truncation():
    ps, truncated = SlopeSet.whole_line().sample(1e3, 41)
    assert truncated and len(ps) == 41 and ps[0] == -1e3 and ps[-1] == 1e3
    ps, truncated = SlopeSet.at_least(2.0).sample(1e3, 41)
    assert truncated and min(ps) == 2.0 and max(ps) == 1e3
    ps, truncated = SlopeSet.closed(-1, 1).sample(1e3, 41)
    assert not truncated and ps == [-1.0, 0.0, 1.0]
    assert SlopeSet.empty().sample(1e3, 41) == ([], False)


# ---------------------------------------------------------------------------
# Verifier examples
# ---------------------------------------------------------------------------

def test_verify_subsolution_examples():
    xp1 = PiecewiseFn.affine(DOM, 1.0, 1.0)
    assert verify_subsolution(xp1, parse("p - 1")).verdict
    rep = verify_subsolution(SPIKE, parse("-u * p^2"))
    assert rep.verdict and rep.truncation
    assert rep.truncation[0].kind == "whole_line"
    assert not verify_subsolution(IDENT, parse("p + 1")).verdict


def test_verify_supersolution_examples():
    assert verify_supersolution(IDENT, parse("p - 1")).verdict
    rep = verify_supersolution(ANTISPIKE, parse("-u * p^2"))
    assert rep.verdict and rep.truncation
    assert verify_supersolution(TENT, parse("abs(p) - 1")).verdict


def test_verify_interval_solution_examples():
    z = PiecewiseFn.band(DOM, (0.0, 1.0), (1.0, 1.0))
    assert verify_interval_solution(z, parse("p - 1")).verdict
    const01 = PiecewiseFn.constant(DOM, Interval(0, 1))
    assert verify_interval_solution(const01, parse("-u * p^2")).verdict
    assert verify_interval_solution(IDENT, parse("p - 1")).verdict
    with pytest.raises(NotSContinuousError):
        verify_interval_solution(SPIKE, parse("p - 1"))


def test_verify_envelope_solution_examples():
    h = parse("p - 1")
    assert verify_envelope_solution(IDENT, [IDENT], [IDENT], h).verdict
    below = PiecewiseFn.affine(DOM, -1.0, 1.0)
    rep = verify_envelope_solution(IDENT, [below], [IDENT], h)
    assert not rep.verdict
    with pytest.raises(ValueError):
        verify_envelope_solution(IDENT, [], [IDENT], h)


def test_report_summary_mentions_failures():
    rep = verify_subsolution(IDENT, parse("p + 1"))
    text = rep.summary()
    assert "FAIL" in text and "x=" in text
    assert rep.to_json()["verdict"] is False


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------

def test_point_and_interval_definitions_agree():
    rng = random.Random(300)
    hams = [parse("p - 1"), parse("abs(p) - 1"), parse("-u * p^2")]
    for k in range(60):
        f = random_point_valued(rng)
        ham = hams[k % len(hams)]
        upper_ok = verify_subsolution(f.upper_envelope(), ham).verdict
        lower_ok = verify_supersolution(f.lower_envelope(), ham).verdict
        combined = verify_interval_solution(f.graph_completion(), ham).verdict
        assert combined == (upper_ok and lower_ok)


def _usc_sup(members):
    return reduce(pointwise_max, members).upper_envelope()


def _lsc_inf(members):
    return reduce(pointwise_min, members).lower_envelope()


def test_envelope_of_sup_of_subsolutions_is_subsolution():
    rng = random.Random(301)
    for phi_src in ("p - 1", "abs(p) - 1"):
        ham = parse(phi_src)
        for _ in range(30):
            members = subsolution_family(rng, phi_src, rng.randint(1, 4))
            for w in members:
                assert verify_subsolution(w, ham).verdict
            assert verify_subsolution(_usc_sup(members), ham).verdict


def test_envelope_of_inf_of_supersolutions_is_supersolution():
    rng = random.Random(302)
    for phi_src in ("p - 1", "abs(p) - 1"):
        ham = parse(phi_src)
        for _ in range(30):
            members = supersolution_family(rng, phi_src, rng.randint(1, 4))
            for w in members:
                assert verify_supersolution(w, ham).verdict
            assert verify_supersolution(_lsc_inf(members), ham).verdict


def test_lower_bound_of_solution_is_envelope_solution():
    # an H-continuous solution whose lower bound is a sup of subsolutions:
    # witnesses built from downward translates plus the bound itself
    ham = parse("p - 1")
    u = IDENT.graph_completion()
    lower = u.lower_part()
    z1 = [lower, lower.vertical_shift(-0.5), lower.vertical_shift(-1.0)]
    rep = verify_envelope_solution(lower, z1, [lower], ham)
    assert rep.verdict

    ham2 = parse("abs(p) - 1")
    t = TENT
    z1 = [t, t.vertical_shift(-0.25),
          PiecewiseFn.from_points([(0, 0), (0.5, 0.25), (1, 0)])]
    rep = verify_envelope_solution(t, z1, [t], ham2)
    assert rep.verdict


def test_x_dependent_sign_change_caught_by_extra_samples():
    # phi = p - x vanishes exactly at the piece midpoint, so the breakpoint
    # and midpoint sites alone would miss the violation on the left half
    f = PiecewiseFn.affine(DOM, 0.0, 0.5)
    ham = parse("p - x")
    blind = SampleConfig(extra=0)
    assert verify_subsolution(f, ham, blind).verdict  # midpoint-only miss
    rep = verify_subsolution(f, ham, SampleConfig(extra=32))
    assert not rep.verdict
    assert all(s.x < 0.5 for s in rep.failures())


def test_classical_affine_solutions_pass_exactly():
    rng = random.Random(303)
    for _ in range(40):
        c = rng.uniform(-3, 3)
        f = PiecewiseFn.affine(DOM, c, 1.0)
        for rep in (verify_subsolution(f, parse("p - 1")),
                    verify_supersolution(f, parse("p - 1"))):
            assert rep.verdict
            assert all(s.phi == 0.0 for s in rep.sites)


def _local_samples(f, x, p):
    """Offsets small enough that the one-sided affine behavior dominates."""
    gaps = []
    j = f.breakpoints.index(x) if x in f.breakpoints else None
    if j is not None:
        v = f.nodes[j - 1].lo
        left, right = f._limits(j, "lower")
        sides = ((left, f.pieces[j - 1].lower[1],
                  f.breakpoints[j] - f.breakpoints[j - 1]),
                 (right, f.pieces[j].lower[1],
                  f.breakpoints[j + 1] - f.breakpoints[j]))
        for limit, slope, piece_width in sides:
            gaps.append(piece_width)
            gap = v - limit
            if gap > 1e-9:
                gaps.append(gap / (abs(slope) + abs(p) + 1))
    else:
        # stay inside the current piece: the inequality is only local
        gaps.append(min(abs(x - b) for b in f.breakpoints))
    d = min(gaps) / 4
    return [x - d, x - d / 2, x + d / 2, x + d]


def test_superdifferential_defining_inequality():
    rng = random.Random(304)
    eps = 1e-9
    checked_inside = checked_outside = 0
    while checked_inside < 120 or checked_outside < 120:
        f = random_point_valued(rng)
        xs = list(f.interior_breakpoints) or [0.5]
        x = rng.choice(xs + [rng.uniform(0.1, 0.9)])
        try:
            sset = superdifferential(f, x)
        except SemicontinuityError:
            continue
        v = f.eval(x).lo
        if sset.kind is not SlopeKind.EMPTY and checked_inside < 200:
            ps, _ = sset.sample(50.0, 9)
            p = rng.choice(ps)
            for y in _local_samples(f, x, p):
                if not (DOM[0] < y < DOM[1]):
                    continue
                assert f.eval(y).lo <= v + p * (y - x) + eps
            checked_inside += 1
        if sset.kind in (SlopeKind.POINT, SlopeKind.INTERVAL,
                         SlopeKind.HALF_LINE_UP, SlopeKind.HALF_LINE_DOWN,
                         SlopeKind.EMPTY):
            margin = 0.5
            if sset.kind is SlopeKind.HALF_LINE_DOWN:
                p_out = sset.hi + margin
            elif sset.kind is SlopeKind.EMPTY:
                p_out = rng.uniform(-3, 3)
            else:
                p_out = sset.lo - margin
            violated = False
            for y in _local_samples(f, x, p_out):
                if not (DOM[0] < y < DOM[1]):
                    continue
                if f.eval(y).lo > v + p_out * (y - x) + eps:
                    violated = True
            if violated:
                checked_outside += 1
            else:
                # exclusion must be witnessed for interior slopes of pieces
                assert sset.kind is not SlopeKind.POINT or x in f.breakpoints \
                    or violated
