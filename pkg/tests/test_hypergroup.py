from fractions import Fraction

import pytest

from conicwalk import (
    CapExceeded,
    ClassIndex,
    ConicParams,
    IndexInvalid,
    build_table,
    index_set,
    make_field,
    make_prime_field,
    oracle_table,
    structure_constant,
    two_step_support,
    verify_axioms,
)
from conicwalk.errata import errata_entries

from conftest import TEST_FIELDS, smallest_nonsquare, smallest_square_above_one


def _cls(spec, v):
    return ClassIndex.finite(spec.element(v))


# ---------------------------------------------------------------------------
# oracle table
# ---------------------------------------------------------------------------

def test_oracle_identity_row_gf7():
    f7 = make_prime_field(7)
    t = oracle_table(ConicParams(f7, 1, 1))
    zero = _cls(f7, 0)
    for j in t.classes:
        for k in t.classes:
            expected = Fraction(1) if j == k else Fraction(0)
            assert t.n(zero, j, k) == expected


def test_oracle_values_gf7():
    f7 = make_prime_field(7)
    t = oracle_table(ConicParams(f7, 1, 1))
    one = _cls(f7, 1)
    assert t.n(one, one, _cls(f7, 4)) == Fraction(1, 8)
    assert t.n(one, one, one) == Fraction(0)


def test_oracle_cap():
    f7 = make_prime_field(7)
    with pytest.raises(CapExceeded):
        oracle_table(ConicParams(f7, 1, 1), cap=5)


def test_row_sums_and_commutativity_oracle_gf9():
    t = oracle_table(ConicParams(make_field(3, 2), 1, 1))
    for i in t.classes:
        for j in t.classes:
            assert sum(t.row(i, j)) == 1
            assert t.row(i, j) == t.row(j, i)


# ---------------------------------------------------------------------------
# closed form
# ---------------------------------------------------------------------------

def test_structure_constant_examples_gf13():
    f13 = make_prime_field(13)
    p = ConicParams(f13, 1, 1)
    iso = ClassIndex.isotropic(f13)
    one = _cls(f13, 1)
    zero = _cls(f13, 0)
    for j in index_set(p):
        for k in index_set(p):
            expected = Fraction(1) if j == k else Fraction(0)
            assert structure_constant(zero, j, k, p) == expected
    assert structure_constant(one, one, iso, p) == 0
    assert structure_constant(iso, iso, iso, p) == Fraction(11, 24)
    assert structure_constant(iso, iso, zero, p) == Fraction(1, 24)
    assert structure_constant(iso, one, zero, p) == 0
    assert structure_constant(iso, one, iso, p) == Fraction(1, 12)


def test_structure_constant_rejects_foreign_index():
    f13 = make_prime_field(13)
    f7 = make_prime_field(7)
    p = ConicParams(f13, 1, 1)
    with pytest.raises(IndexInvalid):
        structure_constant(_cls(f7, 1), _cls(f13, 1), _cls(f13, 1), p)


def test_build_table_shapes():
    f7 = make_prime_field(7)
    t = build_table(ConicParams(f7, 1, 1))
    assert t.size == 7
    assert sum(len(row) for plane in t.entries for row in plane) == 7**3
    f13 = make_prime_field(13)
    t13 = build_table(ConicParams(f13, 1, 1))
    assert t13.size == 14


@pytest.mark.parametrize("p,d", [(5, 1), (7, 1), (3, 2), (11, 1), (13, 1)])
def test_closed_form_equals_oracle(p, d):
    spec = make_field(p, d)
    params = ConicParams(spec, 1, 1)
    assert build_table(params, "closed-form") == oracle_table(params)


def test_closed_form_equals_oracle_nontrivial_weights():
    spec = make_prime_field(11)
    g = smallest_nonsquare(spec)
    params = ConicParams(spec, g, g)
    assert build_table(params, "closed-form") == oracle_table(params)


@pytest.mark.parametrize("p,d", [(7, 1), (13, 1)])
def test_table_independent_of_weights(p, d):
    spec = make_field(p, d)
    g = smallest_nonsquare(spec)
    s = smallest_square_above_one(spec)
    t1 = build_table(ConicParams(spec, 1, 1))
    t2 = build_table(ConicParams(spec, g, g))
    t3 = build_table(ConicParams(spec, 1, s))
    assert t1.entries == t2.entries == t3.entries


def test_constants_depend_only_on_discriminant_character():
    from conicwalk import f_discriminant, quadratic_character

    for p, d in [(7, 1), (13, 1)]:
        spec = make_field(p, d)
        params = ConicParams(spec, 1, 1)
        t = build_table(params)
        groups: dict[int, set] = {}
        for i in spec.elements()[1:]:
            for j in spec.elements()[1:]:
                for k in spec.elements()[1:]:
                    chi = quadratic_character(f_discriminant(i, j, k))
                    v = t.n(_cls(spec, i.idx), _cls(spec, j.idx), _cls(spec, k.idx))
                    groups.setdefault(chi, set()).add(v)
        den = spec.q + 1 if spec.q % 4 == 3 else spec.q - 1
        assert groups[-1] == {Fraction(0)}
        assert groups[0] == {Fraction(1, den)}
        assert groups[1] == {Fraction(2, den)}


def _integer_scaled(table):
    """Table entries as exact integers over the common denominator."""
    import math

    import numpy as np

    den = 1
    for plane in table.entries:
        for row in plane:
            for v in row:
                den = den * v.denominator // math.gcd(den, v.denominator)
    arr = np.empty((table.size,) * 3, dtype=np.int64)
    for i, plane in enumerate(table.entries):
        for j, row in enumerate(plane):
            for k, v in enumerate(row):
                scaled = v * den
                assert scaled.denominator == 1
                arr[i, j, k] = scaled.numerator
    return arr, den


def test_convolution_associativity_exhaustive():
    # sum_x n[i,j,x] n[x,k,l] == sum_x n[j,k,x] n[i,x,l] for every quadruple;
    # checked in scaled integers, so the comparison is exact
    import numpy as np

    for p, d in [(5, 1), (7, 1), (3, 2), (11, 1), (13, 1)]:
        spec = make_field(p, d)
        t = build_table(ConicParams(spec, 1, 1))
        arr, _ = _integer_scaled(t)
        lhs = np.einsum("ijx,xkl->ijkl", arr, arr)
        rhs = np.einsum("jkx,ixl->ijkl", arr, arr)
        assert np.array_equal(lhs, rhs)


def test_convolution_associativity_randomized_larger():
    import random

    rng = random.Random(20240811)
    for p, d in [(17, 1), (3, 3)]:
        spec = make_field(p, d)
        t = build_table(ConicParams(spec, 1, 1))
        m = t.size
        e = t.entries
        for _ in range(200):
            i, j, k, l = (rng.randrange(m) for _ in range(4))
            lhs = sum(e[i][j][x] * e[x][k][l] for x in range(m))
            rhs = sum(e[j][k][x] * e[i][x][l] for x in range(m))
            assert lhs == rhs


# ---------------------------------------------------------------------------
# axioms
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("p,d", TEST_FIELDS)
def test_axioms_pass_on_closed_tables(p, d, closed_tables):
    q = p**d
    report = verify_axioms(closed_tables[q])
    assert report.all_pass, report.violations


def test_axioms_pass_on_oracle_gf13():
    f13 = make_prime_field(13)
    report = verify_axioms(oracle_table(ConicParams(f13, 1, 1)))
    assert report.all_pass


def test_unsplit_diagnostic_fails_hermitian_gf13():
    f13 = make_prime_field(13)
    t = oracle_table(ConicParams(f13, 1, 1), split=False)
    report = verify_axioms(t)
    assert not report.hermitian_support
    assert not report.all_pass
    assert report.positivity and report.normalization and report.commutativity


def test_published_isotropic_row_breaks_normalization():
    f13 = make_prime_field(13)
    params = ConicParams(f13, 1, 1)
    t = build_table(params, published_isotropic_row=True)
    iso = ClassIndex.isotropic(f13)
    row = t.row(iso, _cls(f13, 1))
    assert sum(row) == Fraction(13, 12)  # q/(q-1): the stated support cannot be right
    report = verify_axioms(t)
    assert not report.normalization
    assert not report.hermitian_support


def test_corrected_isotropic_row_matches_oracle():
    f13 = make_prime_field(13)
    params = ConicParams(f13, 1, 1)
    oracle = oracle_table(params)
    iso = ClassIndex.isotropic(f13)
    j = _cls(f13, 1)
    row = oracle.row(iso, j)
    expected = []
    for c in oracle.classes:
        if c == j or c.is_zero:
            expected.append(Fraction(0))
        else:
            expected.append(Fraction(1, 12))
    assert row == expected


# ---------------------------------------------------------------------------
# two-step support
# ---------------------------------------------------------------------------

def test_two_step_support_gf7(closed_tables):
    t = closed_tables[7]
    nonzero = [c for c in t.classes if not c.is_zero]
    step = ClassIndex.finite(t.params.spec.one)
    for i in nonzero:
        for j in nonzero:
            k = two_step_support(i, j, t)
            assert k is not None
            assert t.n(i, step, k) > 0 and t.n(k, step, j) > 0


def test_two_step_support_gf13_includes_isotropic(closed_tables):
    t = closed_tables[13]
    nonzero = [c for c in t.classes if not c.is_zero]
    assert any(c.is_isotropic for c in nonzero)
    for i in nonzero:
        for j in nonzero:
            assert two_step_support(i, j, t) is not None


def test_two_step_support_same_class():
    t = build_table(ConicParams(make_prime_field(7), 1, 1))
    for i in t.classes:
        if i.is_zero:
            continue
        k = two_step_support(i, i, t)
        assert k is not None


def test_two_step_support_counterexamples_small_split_fields():
    # for q = 1 (mod 4) below 13 the witness property genuinely fails:
    # from class 1 one unit step reaches {0, 2, 4} in GF(5), none of which
    # steps into class 2.  The two-step kernel power is zero there even
    # though the walk is still ergodic via longer paths.
    f5 = make_prime_field(5)
    t5 = build_table(ConicParams(f5, 1, 1))
    assert two_step_support(_cls(f5, 1), _cls(f5, 2), t5) is None
    from conicwalk import ergodicity_check, kernel

    k = kernel(t5, _cls(f5, 1))
    assert ergodicity_check(k).ergodic
    power2 = k.rational_power(2)
    assert power2[t5.position(_cls(f5, 1))][t5.position(_cls(f5, 2))] == 0

    f9 = make_field(3, 2)
    t9 = build_table(ConicParams(f9, 1, 1))
    assert two_step_support(_cls(f9, 1), _cls(f9, 4), t9) is None
    assert ergodicity_check(kernel(t9, _cls(f9, 1))).ergodic


# ---------------------------------------------------------------------------
# serialization and errata
# ---------------------------------------------------------------------------

def test_table_csv_and_json():
    t = build_table(ConicParams(make_prime_field(5), 1, 1))
    rows = list(t.to_csv_rows())
    assert len(rows) == t.size**3
    assert rows[0][:3] == ("0", "0", "0")
    d = t.to_json_dict()
    assert d["classes"][-1] == "iso"
    assert d["sizes"] == [1, 4, 4, 4, 4, 8]


def test_errata_entries_shape():
    entries = errata_entries()
    assert len(entries) == 4
    for e in entries:
        assert set(e) == {"location", "published_value", "oracle_value"}
    locations = {e["location"] for e in entries}
    assert "isotropic_times_finite_row_support" in locations
