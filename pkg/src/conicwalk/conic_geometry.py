"""Weighted quadrance, weighted circles, point counts, intersection counts.

The quadratic form a*x^2 + b*y^2 (with a*b a nonzero square, c its canonical
square root) partitions the plane GF(q)^2 into level sets of the quadrance
from the origin.  When q = 1 (mod 4) the null cone contains points besides
the origin and is split off as a separate "isotropic" class; the unsplit
partition is kept available as a diagnostic because it fails the hypergroup
axioms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapExceeded, FieldMismatch, IndexInvalid, ZeroQuadranceArg
from .finite_field import FieldElement, FieldSpec, quadratic_character, sqrt

ORACLE_CAP = 125
EXHAUSTIVE_CENTER_CAP = 31


class ConicParams:
    """The weight triple (a, b, c), all nonzero with a*b = c^2."""

    __slots__ = ("spec", "a", "b", "c")

    def __init__(self, spec: FieldSpec, a, b, c=None):
        self.spec = spec
        self.a = spec.element(a)
        self.b = spec.element(b)
        if not self.a or not self.b:
            raise ValueError("a and b must be nonzero")
        ab = self.a * self.b
        if c is None:
            root = sqrt(ab)
            if root is None:
                raise ValueError(f"a*b = {ab!r} is not a square in {spec!r}; no valid c")
            self.c = root
        else:
            self.c = spec.element(c)
            if not self.c or self.c * self.c != ab:
                raise ValueError("c must be nonzero with c^2 = a*b")

    @property
    def q(self) -> int:
        return self.spec.q

    @property
    def branch(self) -> int:
        return self.spec.q % 4

    @property
    def split(self) -> bool:
        """Whether the null cone splits into origin + isotropic class."""
        return self.spec.q % 4 == 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConicParams):
            return NotImplemented
        return (self.spec, self.a, self.b, self.c) == (other.spec, other.a, other.b, other.c)

    def __hash__(self) -> int:
        return hash((self.spec, self.a.idx, self.b.idx, self.c.idx))

    def __repr__(self) -> str:
        return f"ConicParams({self.spec!r}, a={self.a!r}, b={self.b!r}, c={self.c!r})"

    def to_json(self) -> dict:
        return {
            "field": self.spec.to_json(),
            "a": self.a.to_json(),
            "b": self.b.to_json(),
            "c": self.c.to_json(),
        }


@dataclass(frozen=True)
class Point:
    x: FieldElement
    y: FieldElement

    def __add__(self, other: "Point") -> "Point":
        return Point(self.x + other.x, self.y + other.y)

    def __repr__(self) -> str:
        return f"({self.x!r},{self.y!r})"

    def to_json(self):
        return [self.x.to_json(), self.y.to_json()]


class ClassIndex:
    """Label of a weighted-circle class: a quadrance value, or the isotropic class.

    The isotropic label exists only when q = 1 (mod 4).  Ordering puts finite
    labels in canonical field order and the isotropic label last.
    """

    __slots__ = ("spec", "_val")

    def __init__(self, spec: FieldSpec, value: FieldElement | None):
        self.spec = spec
        self._val = value

    @classmethod
    def finite(cls, value: FieldElement) -> "ClassIndex":
        return cls(value.spec, value)

    @classmethod
    def isotropic(cls, spec: FieldSpec) -> "ClassIndex":
        if spec.q % 4 != 1:
            raise IndexInvalid(f"no isotropic class for q = {spec.q} = 3 (mod 4)")
        return cls(spec, None)

    @property
    def is_isotropic(self) -> bool:
        return self._val is None

    @property
    def value(self) -> FieldElement:
        if self._val is None:
            raise IndexInvalid("isotropic class has no quadrance value")
        return self._val

    @property
    def is_zero(self) -> bool:
        return self._val is not None and self._val.idx == 0

    def label(self) -> str:
        return "iso" if self._val is None else str(self._val.idx)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ClassIndex):
            return NotImplemented
        if self.spec != other.spec:
            return False
        if self._val is None or other._val is None:
            return self._val is None and other._val is None
        return self._val.idx == other._val.idx

    def __lt__(self, other: "ClassIndex") -> bool:
        if self.spec != other.spec:
            raise FieldMismatch("ordering classes over different fields")
        if self._val is None:
            return False
        if other._val is None:
            return True
        return self._val.idx < other._val.idx

    def __hash__(self) -> int:
        v = -1 if self._val is None else self._val.idx
        return hash((v, self.spec.p, self.spec.d))

    def __repr__(self) -> str:
        return f"C[{self.label()}]"


def index_set(params: ConicParams, split: bool = True) -> list[ClassIndex]:
    """Canonical class labels: F_q in field order, isotropic last when present."""
    classes = [ClassIndex.finite(e) for e in params.spec.elements()]
    if split and params.split:
        classes.append(ClassIndex.isotropic(params.spec))
    return classes


def quadrance(a1: Point, a2: Point, params: ConicParams) -> FieldElement:
    """a*(x2 - x1)^2 + b*(y2 - y1)^2."""
    spec = params.spec
    for e in (a1.x, a1.y, a2.x, a2.y):
        if e.spec != spec:
            raise FieldMismatch(f"point over {e.spec!r} with params over {spec!r}")
    dx = a2.x - a1.x
    dy = a2.y - a1.y
    return params.a * dx * dx + params.b * dy * dy


def classify(p: Point, params: ConicParams, split: bool = True) -> ClassIndex:
    """Class of a point relative to the origin-centred partition."""
    spec = params.spec
    v = quadrance(Point(spec.zero, spec.zero), p, params)
    if split and params.split and v.idx == 0 and (p.x.idx or p.y.idx):
        return ClassIndex.isotropic(spec)
    return ClassIndex.finite(v)


def class_size(i: ClassIndex, params: ConicParams) -> int:
    """Closed-form point count of a class; equals len(circle_points(i, params))."""
    q = params.q
    if i.is_isotropic:
        return 2 * (q - 1)
    if i.value.idx == 0:
        return 1
    return q + 1 if q % 4 == 3 else q - 1


def circle_points(
    i: ClassIndex, params: ConicParams, split: bool = True, cap: int = ORACLE_CAP
) -> list[Point]:
    """All points of the class, by exhaustive enumeration in lex (x, y) order."""
    q = params.q
    if q > cap:
        raise CapExceeded(f"q = {q} exceeds the enumeration cap {cap}")
    spec = params.spec
    els = spec.elements()
    out = []
    for x in els:
        for y in els:
            p = Point(x, y)
            if classify(p, params, split=split) == i:
                out.append(p)
    return out


_INV4_CACHE: dict[FieldSpec, int] = {}


def _inv4_idx(spec: FieldSpec) -> int:
    idx = _INV4_CACHE.get(spec)
    if idx is None:
        two = spec.add_idx(1, 1)
        idx = spec.inv_idx(spec.add_idx(two, two))
        _INV4_CACHE[spec] = idx
    return idx


def f_discriminant(i: FieldElement, j: FieldElement, k: FieldElement) -> FieldElement:
    """The symmetric intersection discriminant (2ij + 2jk + 2ki - i^2 - j^2 - k^2)/4.

    Equal to i*j - (i + j - k)^2 / 4 and invariant under every permutation
    of (i, j, k).
    """
    spec = i.spec
    s = i + j - k
    return i * j - (s * s) * FieldElement(spec, _inv4_idx(spec))


def intersection_count(
    i: FieldElement, j: FieldElement, k: FieldElement, params: ConicParams
) -> int:
    """Number of common points of radius-i and radius-j circles whose centres
    are at quadrance k, by the discriminant trichotomy (0 / 1 / 2)."""
    if not (i and j and k):
        raise ZeroQuadranceArg("intersection counts require i, j, k all nonzero")
    chi = quadratic_character(f_discriminant(i, j, k))
    if chi == 0:
        return 1
    return 2 if chi == 1 else 0


def circle_csv_rows(i: ClassIndex, params: ConicParams, cap: int = ORACLE_CAP):
    """(class, x, y) rows of a circle dump, in canonical point order."""
    for p in circle_points(i, params, cap=cap):
        yield (i.label(), p.x.to_json(), p.y.to_json())


def intersection_points(
    i: FieldElement, j: FieldElement, x: Point, y: Point, params: ConicParams,
    cap: int = ORACLE_CAP,
) -> list[Point]:
    """Brute-force common points Z with Q(X,Z) = i and Q(Y,Z) = j."""
    if params.q > cap:
        raise CapExceeded(f"q = {params.q} exceeds the enumeration cap {cap}")
    els = params.spec.elements()
    out = []
    for zx in els:
        for zy in els:
            z = Point(zx, zy)
            if quadrance(x, z, params) == i and quadrance(y, z, params) == j:
                out.append(z)
    return out


# ---------------------------------------------------------------------------
# vectorised quadrance grid + exhaustive intersection verification
# ---------------------------------------------------------------------------

def quadrance_value_grid(params: ConicParams) -> np.ndarray:
    """(q^2, q^2) array: entry [u, w] is the quadrance value index between the
    points with ids u = x*q + y and w."""
    spec = params.spec
    q = spec.q
    xs = np.repeat(np.arange(q), q)
    ys = np.tile(np.arange(q), q)
    a, b = params.a.idx, params.b.idx
    if spec.d == 1:
        dx = (xs[None, :] - xs[:, None]) % q
        dy = (ys[None, :] - ys[:, None]) % q
        return (a * dx * dx + b * dy * dy) % q
    add = spec.add_table()
    mul = spec.mul_table()
    neg = np.array([spec.neg_idx(i) for i in range(q)])
    dx = add[neg[xs[:, None]], xs[None, :]]
    dy = add[neg[ys[:, None]], ys[None, :]]
    sq_dx = mul[dx, dx]
    sq_dy = mul[dy, dy]
    return add[mul[a, sq_dx], mul[b, sq_dy]]


def origin_quadrance_values(params: ConicParams) -> np.ndarray:
    """(q^2,) array of quadrance value indices from the origin, by point id."""
    spec = params.spec
    q = spec.q
    xs = np.repeat(np.arange(q), q)
    ys = np.tile(np.arange(q), q)
    a, b = params.a.idx, params.b.idx
    if spec.d == 1:
        return (a * xs * xs + b * ys * ys) % q
    mul = spec.mul_table()
    add = spec.add_table()
    return add[mul[a, mul[xs, xs]], mul[b, mul[ys, ys]]]


def predicted_intersection_table(params: ConicParams) -> np.ndarray:
    """(q, q, q) int8 array of predicted counts for i, j, k all nonzero.

    Entries with any zero argument are set to -1 (outside the hypotheses).
    """
    spec = params.spec
    q = spec.q
    idx = np.arange(q)
    i = idx[:, None, None]
    j = idx[None, :, None]
    k = idx[None, None, :]
    inv4 = spec.inv_idx(spec.add_idx(spec.add_idx(1, 1), spec.add_idx(1, 1)))
    if spec.d == 1:
        s = (i + j - k) % q
        f = (i * j - s * s * inv4) % q
    else:
        add = spec.add_table()
        mul = spec.mul_table()
        neg = np.array([spec.neg_idx(t) for t in range(q)])
        s = add[add[i, j], neg[k]]
        f = add[mul[i, j], neg[mul[mul[s, s], inv4]]]
    chi = spec.chi_table()[f]
    pred = np.where(chi == 0, 1, np.where(chi == 1, 2, 0)).astype(np.int8)
    pred[0, :, :] = -1
    pred[:, 0, :] = -1
    pred[:, :, 0] = -1
    return pred


def verify_intersection_trichotomy(
    params: ConicParams,
    exhaustive_cap: int = EXHAUSTIVE_CENTER_CAP,
    sample_centers: int = 200,
    seed: int = 0,
) -> dict:
    """Check measured pairwise circle intersections against the trichotomy.

    For q <= ``exhaustive_cap`` every unordered centre pair X != Y with
    nonzero separation quadrance is checked against every nonzero (i, j);
    larger fields check a seeded sample of centre pairs.  Returns a summary
    dict with the number of centre pairs checked and any mismatches.
    """
    q = params.q
    grid = quadrance_value_grid(params).astype(np.int64)
    pred = predicted_intersection_table(params)
    n_pts = q * q
    mismatches: list[tuple] = []
    pairs_checked = 0
    offsets = np.arange(n_pts, dtype=np.int64) * (q * q)

    if q <= exhaustive_cap:
        batches = ((x, np.arange(x + 1, n_pts)) for x in range(n_pts))
    else:
        rng = np.random.default_rng(seed)
        starts = rng.integers(0, n_pts, size=sample_centers)
        others = rng.integers(0, n_pts, size=sample_centers)
        batches = (
            (int(x), np.array([int(y)])) for x, y in zip(starts, others) if x != y
        )

    for x, ys in batches:
        if len(ys) == 0:
            continue
        keys = grid[x][None, :] * q + grid[ys] + offsets[: len(ys), None]
        counts = np.bincount(keys.ravel(), minlength=len(ys) * q * q)
        counts = counts.reshape(len(ys), q, q)
        k_vals = grid[x, ys]
        valid = k_vals != 0
        if not valid.any():
            continue
        measured = counts[valid][:, 1:, 1:]
        expected = pred[1:, 1:, :][:, :, k_vals[valid]].transpose(2, 0, 1)
        pairs_checked += int(valid.sum())
        if not np.array_equal(measured, expected):
            bad = np.argwhere(measured != expected)
            y_sel = ys[valid]
            for r, ii, jj in bad[:20]:
                mismatches.append(
                    (int(x), int(y_sel[r]), int(ii + 1), int(jj + 1),
                     int(measured[r, ii, jj]), int(expected[r, ii, jj]))
                )
    return {
        "q": q,
        "pairs_checked": pairs_checked,
        "mismatches": mismatches,
        "ok": not mismatches,
    }
