import math
from fractions import Fraction

import numpy as np
import pytest

from conicwalk import (
    BranchMismatch,
    ClassIndex,
    ConicParams,
    Distribution,
    IndexMismatch,
    NotErgodic,
    boost_check,
    build_table,
    ergodicity_check,
    evolve,
    geometric_decay_check,
    haar,
    kernel,
    kernel_for_step,
    make_field,
    make_prime_field,
    max_tv_curve,
    minorization_constant,
    minorization_reference,
    mixing_report,
    mixing_time,
    mixing_time_bound,
    stationary,
    tv_distance,
)

EPS_REF = 1.0 / (2.0 * math.e)


def _cls(spec, v):
    return ClassIndex.finite(spec.element(v))


@pytest.fixture(scope="module")
def k7():
    return kernel_for_step(ConicParams(make_prime_field(7), 1, 1))


@pytest.fixture(scope="module")
def k13():
    return kernel_for_step(ConicParams(make_prime_field(13), 1, 1))


@pytest.fixture(scope="module")
def pi7(k7):
    return haar(k7.params)


@pytest.fixture(scope="module")
def pi13(k13):
    return haar(k13.params)


# ---------------------------------------------------------------------------
# kernel construction
# ---------------------------------------------------------------------------

def test_kernel_shapes(k7, k13):
    assert k7.mat.shape == (7, 7)
    assert k13.mat.shape == (14, 14)
    assert np.allclose(k7.mat.sum(axis=1), 1.0, atol=1e-15)


def test_kernel_power_rows_stay_stochastic(k7, k13):
    for k in (k7, k13):
        for m in (2, 4, 8, 16):
            mat = np.linalg.matrix_power(k.mat, m)
            assert np.abs(mat.sum(axis=1) - 1.0).max() <= m * 1e-15


def test_kernel_zero_step_is_identity():
    p7 = ConicParams(make_prime_field(7), 1, 1)
    k = kernel_for_step(p7, _cls(p7.spec, 0))
    assert np.array_equal(k.mat, np.eye(7))


def test_kernel_from_table_matches_direct(k7):
    t = build_table(k7.params)
    via_table = kernel(t, _cls(k7.params.spec, 1))
    assert via_table.rat == k7.rat


def test_kernel_entries_are_structure_constants(k13):
    t = build_table(k13.params)
    s = _cls(k13.params.spec, 1)
    for i, ci in enumerate(k13.classes):
        for j, cj in enumerate(k13.classes):
            assert k13.rat[i][j] == t.n(ci, s, cj)


# ---------------------------------------------------------------------------
# evolve
# ---------------------------------------------------------------------------

def test_evolve_zero_steps(k7, pi7):
    d0 = Distribution.point_mass(k7.classes, k7.classes[3])
    assert np.array_equal(evolve(d0, k7, 0).probs, d0.probs)


def test_evolve_identity_class_step(k7):
    d0 = Distribution.point_mass(k7.classes, _cls(k7.params.spec, 0))
    d1 = evolve(d0, k7, 1)
    assert d1.probs[1] == 1.0  # one step from the origin class lands on the step class


def test_evolve_two_steps_matches_convolution_row(k7):
    t = build_table(k7.params)
    spec = k7.params.spec
    one = _cls(spec, 1)
    d0 = Distribution.point_mass(k7.classes, _cls(spec, 0))
    d2 = evolve(d0, k7, 2, exact=True)
    assert d2.exact == t.row(one, one)


def test_evolve_exact_matches_float(k13):
    d0 = Distribution.point_mass(k13.classes, k13.classes[0])
    for n in (1, 3, 8):
        ex = evolve(d0, k13, n, exact=True)
        fl = evolve(d0, k13, n)
        assert np.abs(ex.probs - fl.probs).max() < 1e-14


# ---------------------------------------------------------------------------
# haar and stationarity
# ---------------------------------------------------------------------------

def test_haar_gf7(pi7):
    assert pi7.exact[0] == Fraction(1, 49)
    assert all(v == Fraction(8, 49) for v in pi7.exact[1:])
    assert sum(pi7.exact) == 1


def test_haar_gf13(pi13):
    assert pi13.exact[0] == Fraction(1, 169)
    assert pi13.exact[-1] == Fraction(24, 169)
    assert all(v == Fraction(12, 169) for v in pi13.exact[1:-1])
    assert sum(pi13.exact) == 1


def test_stationary_matches_haar(k7, pi7, k13, pi13):
    for k, pi in ((k7, pi7), (k13, pi13)):
        st = stationary(k, method="power")
        assert np.abs(st.probs - pi.probs).max() <= 1e-12
        ex = stationary(k, method="exact")
        assert ex.exact == pi.exact


def test_stationary_exact_fixed_point(k7, pi7):
    n = k7.size
    for j in range(n):
        assert sum(pi7.exact[i] * k7.rat[i][j] for i in range(n)) == pi7.exact[j]


def test_stationary_not_ergodic_for_identity_kernel():
    p7 = ConicParams(make_prime_field(7), 1, 1)
    k = kernel_for_step(p7, _cls(p7.spec, 0))
    with pytest.raises(NotErgodic):
        stationary(k)


# ---------------------------------------------------------------------------
# ergodicity
# ---------------------------------------------------------------------------

def test_ergodicity_check(k7, k13):
    for k in (k7, k13):
        rep = ergodicity_check(k)
        assert rep.ergodic and rep.irreducible and rep.period == 1
        assert not rep.unreachable


def test_ergodicity_identity_kernel_fails():
    p7 = ConicParams(make_prime_field(7), 1, 1)
    k = kernel_for_step(p7, _cls(p7.spec, 0))
    rep = ergodicity_check(k)
    assert not rep.ergodic and not rep.irreducible


def test_all_nonzero_steps_ergodic_gf13(k13):
    t = build_table(k13.params)
    for s in t.classes:
        if s.is_zero:
            continue
        assert ergodicity_check(kernel(t, s)).ergodic


# ---------------------------------------------------------------------------
# tv distance
# ---------------------------------------------------------------------------

def test_tv_basic(k7, pi7):
    assert tv_distance(pi7, pi7) == 0.0
    a = Distribution.point_mass(k7.classes, k7.classes[0])
    b = Distribution.point_mass(k7.classes, k7.classes[1])
    assert tv_distance(a, b) == 1.0
    assert abs(tv_distance(a, pi7) - 48 / 49) < 1e-15


def test_tv_index_mismatch(k7, k13, pi7, pi13):
    with pytest.raises(IndexMismatch):
        tv_distance(pi7, pi13)


def test_tv_equals_max_subset_gap(k7, pi7):
    import itertools

    d1 = evolve(Distribution.point_mass(k7.classes, k7.classes[0]), k7, 2)
    for mu, nu in ((d1, pi7), (pi7, d1)):
        direct = tv_distance(mu, nu)
        best = 0.0
        for r in range(len(k7.classes) + 1):
            for subset in itertools.combinations(range(len(k7.classes)), r):
                gap = abs(sum(mu.probs[list(subset)]) - sum(nu.probs[list(subset)]))
                best = max(best, gap)
        assert abs(direct - best) < 1e-12


# ---------------------------------------------------------------------------
# mixing time
# ---------------------------------------------------------------------------

def test_mixing_time_trivial_eps(k7, pi7):
    assert mixing_time(k7, pi7, 1.0) == 0
    assert mixing_time(k7, pi7, 1.5) == 0


def test_mixing_time_gf7(k7, pi7):
    tau, curve = mixing_time(k7, pi7, EPS_REF, return_curve=True)
    assert 0 < tau <= 96
    assert curve[-1] <= EPS_REF < curve[-2]
    assert all(curve[t + 1] <= curve[t] + 1e-12 for t in range(len(curve) - 1))


def test_mixing_time_gf13(k13, pi13):
    assert mixing_time(k13, pi13, EPS_REF) <= mixing_time_bound(13, 1)


def test_mixing_time_not_ergodic():
    p7 = ConicParams(make_prime_field(7), 1, 1)
    k = kernel_for_step(p7, _cls(p7.spec, 0))
    with pytest.raises(NotErgodic):
        mixing_time(k, haar(p7), 0.1)


def test_max_tv_curve_non_increasing(k7, k13, pi7, pi13):
    for k, pi in ((k7, pi7), (k13, pi13)):
        curve = max_tv_curve(k, pi, 40)
        assert all(curve[t + 1] <= curve[t] + 1e-12 for t in range(40))


def test_mixing_time_same_for_all_steps():
    for p, d in [(7, 1), (11, 1), (13, 1), (3, 2)]:
        spec = make_field(p, d)
        params = ConicParams(spec, 1, 1)
        t = build_table(params)
        pi = haar(params)
        taus = set()
        for s in t.classes:
            if s.is_zero or s.is_isotropic:
                continue
            taus.add(mixing_time(kernel(t, s), pi, EPS_REF))
        assert len(taus) == 1


def test_mixing_time_same_for_sampled_steps_larger_fields():
    for p, d in [(17, 1), (3, 3), (23, 1)]:
        spec = make_field(p, d)
        params = ConicParams(spec, 1, 1)
        pi = haar(params)
        sampled = [1, 2, spec.q - 1]
        taus = {mixing_time(kernel_for_step(params, _cls(spec, s)), pi, EPS_REF)
                for s in sampled}
        assert len(taus) == 1


def test_mixing_time_bound_values():
    assert mixing_time_bound(7, 3) == 96
    assert mixing_time_bound(11, 3) == 120
    assert mixing_time_bound(13, 1) == 402


def test_mixing_time_bound_branch_mismatch():
    with pytest.raises(BranchMismatch):
        mixing_time_bound(7, 1)
    with pytest.raises(BranchMismatch):
        mixing_time_bound(13, 3)
    with pytest.raises(BranchMismatch):
        mixing_time_bound(7, 2)


# ---------------------------------------------------------------------------
# minorization and decay
# ---------------------------------------------------------------------------

def test_minorization_gf7(k7, pi7):
    exact, approx = minorization_constant(k7, pi7, 4)
    ref = Fraction(49 * 6, 8**4)
    assert exact is not None and exact >= ref
    assert abs(float(exact) - approx) < 1e-12


def test_minorization_gf13(k13, pi13):
    exact, _ = minorization_constant(k13, pi13, 6)
    assert exact >= Fraction(1, 39)


def test_minorization_gf5_computed_but_small_q():
    # below the six-step hypothesis threshold: computed, not asserted against 1/(3q)
    p5 = ConicParams(make_prime_field(5), 1, 1)
    k = kernel_for_step(p5)
    exact, approx = minorization_constant(k, haar(p5), 6)
    assert exact is not None and exact >= 0
    assert approx >= 0


def test_minorization_reference_values():
    m3, c3 = minorization_reference(7, 3)
    assert (m3, c3) == (4, Fraction(294, 4096))
    m1, c1 = minorization_reference(13, 1)
    assert (m1, c1) == (6, Fraction(1, 39))


def test_geometric_decay_gf7(k7, pi7):
    checks = geometric_decay_check(k7, pi7, 4, Fraction(294, 4096), n_max=30)
    assert len(checks) == 30
    assert all(c.ok for c in checks)


def test_geometric_decay_gf13(k13, pi13):
    checks = geometric_decay_check(k13, pi13, 6, Fraction(1, 39), n_max=30)
    assert all(c.ok for c in checks)


def test_boost_gf7(k7, pi7):
    res = boost_check(k7, pi7, 0.01)
    assert res.ok
    assert res.factor == 5
    with pytest.raises(ValueError):
        boost_check(k7, pi7, 0.5)


def test_boost_gf13(k13, pi13):
    assert boost_check(k13, pi13, 0.001).ok


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def test_mixing_report_json(k13):
    rep = mixing_report(k13.params)
    d = rep.to_json()
    assert d["q"] == 13 and d["branch"] == 1 and d["class_count"] == 14
    assert d["tau"] <= d["tau_bound"]
    assert d["minorization"]["ok"]
    assert d["minorization"]["reference"] == "1/39"


def test_distribution_validation(k7):
    with pytest.raises(ValueError):
        Distribution(k7.classes, [0.5] * 7)
    with pytest.raises(ValueError):
        Distribution(k7.classes, [1.0, 0.0])
