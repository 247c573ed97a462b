import pytest

from conicwalk import ConicParams, build_table, make_field

# (p, d) per branch; q = 3 (mod 4) and q = 1 (mod 4)
BRANCH3_FIELDS = [(7, 1), (11, 1), (19, 1), (23, 1), (3, 3)]
BRANCH1_FIELDS = [(5, 1), (3, 2), (13, 1), (17, 1), (5, 2)]
TEST_FIELDS = sorted(BRANCH3_FIELDS + BRANCH1_FIELDS, key=lambda pd: pd[0] ** pd[1])


def q_of(pd):
    return pd[0] ** pd[1]


def smallest_nonsquare(spec):
    return next(e for e in spec.elements() if spec.chi_idx(e.idx) == -1)


def smallest_square_above_one(spec):
    return next(e for e in spec.elements() if e.idx > 1 and spec.chi_idx(e.idx) == 1)


@pytest.fixture(scope="session")
def specs():
    return {q_of(pd): make_field(*pd) for pd in TEST_FIELDS}


@pytest.fixture(scope="session")
def params11(specs):
    return {q: ConicParams(spec, 1, 1) for q, spec in specs.items()}


@pytest.fixture(scope="session")
def closed_tables(params11):
    return {q: build_table(p, "closed-form") for q, p in params11.items()}
