"""Structure constants of the weighted-circle classes, exact and verified.

Translating a point of class i by a point of class j lands in class k a
fixed fraction n[i,j,k] of the time; those fractions are convex weights and
make the classes a hermitian commutative hypergroup.  This module provides
the closed-form constants, a brute-force enumeration oracle that counts all
q^4 translation pairs, and the axiom checker.

For q = 1 (mod 4) the closed form follows the enumeration oracle where the
commonly stated case analysis is wrong: the row of (isotropic, j) is uniform
over the q-1 classes (F_q^* with j replaced by the isotropic class), not
over "everything but j".  The stated variant is kept behind
``published_isotropic_row=True`` for diagnostics; see :mod:`conicwalk.errata`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .conic_geometry import (
    ClassIndex,
    ConicParams,
    ORACLE_CAP,
    class_size,
    f_discriminant,
    index_set,
)
from .errors import CapExceeded, IndexInvalid
from .finite_field import quadratic_character


class StructureTable:
    """Dense table of exact structure constants n[i,j,k] plus class sizes."""

    def __init__(
        self,
        params: ConicParams,
        classes: list[ClassIndex],
        sizes: list[int],
        entries: list[list[list[Fraction]]],
        source: str,
        split: bool = True,
        validate: bool = True,
    ):
        self.params = params
        self.classes = list(classes)
        self.sizes = list(sizes)
        self.entries = entries
        self.source = source
        self.split = split
        self._pos = {c: t for t, c in enumerate(self.classes)}
        if validate:
            one = Fraction(1)
            for i, plane in enumerate(entries):
                for j, row in enumerate(plane):
                    if any(v < 0 for v in row):
                        raise ValueError(f"negative entry in row ({i},{j})")
                    if sum(row) != one:
                        raise ValueError(f"row ({i},{j}) sums to {sum(row)} != 1")

    @property
    def size(self) -> int:
        return len(self.classes)

    def position(self, c: ClassIndex) -> int:
        try:
            return self._pos[c]
        except KeyError:
            raise IndexInvalid(f"{c!r} is not in this table's index set") from None

    def n(self, i: ClassIndex, j: ClassIndex, k: ClassIndex) -> Fraction:
        return self.entries[self.position(i)][self.position(j)][self.position(k)]

    def row(self, i: ClassIndex, j: ClassIndex) -> list[Fraction]:
        return self.entries[self.position(i)][self.position(j)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, StructureTable):
            return NotImplemented
        return (
            self.classes == other.classes
            and self.sizes == other.sizes
            and self.entries == other.entries
        )

    def mismatches(self, other: "StructureTable", limit: int = 50) -> list[dict]:
        """Entry-level differences against another table on the same index set."""
        if self.classes != other.classes:
            raise IndexInvalid("tables have different index sets")
        out = []
        for i, ci in enumerate(self.classes):
            for j, cj in enumerate(self.classes):
                for k, ck in enumerate(self.classes):
                    a = self.entries[i][j][k]
                    b = other.entries[i][j][k]
                    if a != b:
                        out.append(
                            {
                                "i": ci.label(),
                                "j": cj.label(),
                                "k": ck.label(),
                                self.source: str(a),
                                other.source: str(b),
                            }
                        )
                        if len(out) >= limit:
                            return out
        return out

    def to_csv_rows(self):
        """Rows (i, j, k, num, den, N_i, N_j) in canonical order."""
        for i, ci in enumerate(self.classes):
            for j, cj in enumerate(self.classes):
                for k, ck in enumerate(self.classes):
                    v = self.entries[i][j][k]
                    yield (
                        ci.label(),
                        cj.label(),
                        ck.label(),
                        v.numerator,
                        v.denominator,
                        self.sizes[i],
                        self.sizes[j],
                    )

    def to_json_dict(self) -> dict:
        return {
            "params": self.params.to_json(),
            "source": self.source,
            "split": self.split,
            "classes": [c.label() for c in self.classes],
            "sizes": self.sizes,
            "rows": [
                [[f"{v.numerator}/{v.denominator}" for v in row] for row in plane]
                for plane in self.entries
            ],
        }


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

def _class_array(params: ConicParams, split: bool) -> np.ndarray:
    """Class position of every point id (x*q + y); isotropic last."""
    from .conic_geometry import origin_quadrance_values

    q = params.q
    vals = origin_quadrance_values(params)
    cls = vals.astype(np.int64)
    if split and params.split:
        origin = 0
        iso_mask = (vals == 0) & (np.arange(q * q) != origin)
        cls[iso_mask] = q
    return cls


def oracle_table(
    params: ConicParams, split: bool = True, cap: int = ORACLE_CAP
) -> StructureTable:
    """Exact structure constants by enumerating all q^4 ordered point pairs."""
    q = params.q
    if q > cap:
        raise CapExceeded(f"q = {q} exceeds the oracle cap {cap}")
    spec = params.spec
    split = split and params.split
    classes = index_set(params, split=split)
    n_classes = len(classes)
    cls = _class_array(params, split)
    n_pts = q * q
    xs = np.repeat(np.arange(q), q)
    ys = np.tile(np.arange(q), q)

    counts = np.zeros(n_classes**3, dtype=np.int64)
    block = max(1, 2_000_000 // n_pts)
    for start in range(0, n_pts, block):
        stop = min(start + block, n_pts)
        sx = spec.add_array(xs[start:stop, None], xs[None, :])
        sy = spec.add_array(ys[start:stop, None], ys[None, :])
        sum_cls = cls[sx * q + sy]
        key = (cls[start:stop, None] * n_classes + cls[None, :]) * n_classes + sum_cls
        counts += np.bincount(key.ravel(), minlength=n_classes**3)
    counts = counts.reshape(n_classes, n_classes, n_classes)

    sizes = np.bincount(cls, minlength=n_classes)
    entries = [
        [
            [Fraction(int(counts[i, j, k]), int(sizes[i] * sizes[j])) for k in range(n_classes)]
            for j in range(n_classes)
        ]
        for i in range(n_classes)
    ]
    return StructureTable(params, classes, [int(s) for s in sizes], entries, "oracle", split)


# ---------------------------------------------------------------------------
# closed form
# ---------------------------------------------------------------------------

def _trichotomy(params: ConicParams, i, j, k, den: int) -> Fraction:
    chi = quadratic_character(f_discriminant(i, j, k))
    if chi == 1:
        return Fraction(2, den)
    if chi == 0:
        return Fraction(1, den)
    return Fraction(0)


def closed_row(
    params: ConicParams,
    ci: ClassIndex,
    cj: ClassIndex,
    published_isotropic_row: bool = False,
) -> list[Fraction]:
    """The closed-form row over k of n[ci, cj, k], in canonical class order."""
    q = params.q
    spec = params.spec
    classes = index_set(params)
    zero_f = Fraction(0)

    def delta(target: ClassIndex) -> list[Fraction]:
        return [Fraction(1) if c == target else zero_f for c in classes]

    if ci.is_zero:
        return delta(cj)
    if cj.is_zero:
        return delta(ci)

    if params.branch == 3:
        den = q + 1
        i, j = ci.value, cj.value
        return [_trichotomy(params, i, j, ck.value, den) for ck in classes]

    den = q - 1
    if ci.is_isotropic and cj.is_isotropic:
        return [Fraction(1, 2 * den)] * q + [Fraction(q - 2, 2 * den)]
    if ci.is_isotropic or cj.is_isotropic:
        j = cj.value if ci.is_isotropic else ci.value
        row = []
        for ck in classes:
            if ck.is_isotropic:
                row.append(Fraction(1, den))
            elif ck.value == j:
                row.append(zero_f)
            elif ck.is_zero:
                # the stated variant puts mass here; the enumeration says none
                row.append(Fraction(1, den) if published_isotropic_row else zero_f)
            else:
                row.append(Fraction(1, den))
        return row
    i, j = ci.value, cj.value
    row = []
    for ck in classes:
        if ck.is_isotropic:
            row.append(zero_f if i == j else Fraction(2, den))
        elif ck.is_zero:
            row.append(Fraction(1, den) if i == j else zero_f)
        else:
            row.append(_trichotomy(params, i, j, ck.value, den))
    return row


def structure_constant(
    i: ClassIndex,
    j: ClassIndex,
    k: ClassIndex,
    params: ConicParams,
    published_isotropic_row: bool = False,
) -> Fraction:
    """Closed-form n[i,j,k]; exact, agrees with the oracle on every triple."""
    classes = index_set(params)
    for c in (i, j, k):
        if c not in classes:
            raise IndexInvalid(f"{c!r} is not a class index over {params.spec!r}")
    row = closed_row(params, i, j, published_isotropic_row=published_isotropic_row)
    return row[classes.index(k)]


def build_table(
    params: ConicParams,
    source: str = "closed-form",
    split: bool = True,
    published_isotropic_row: bool = False,
    cap: int = ORACLE_CAP,
) -> StructureTable:
    """Materialize the full table from the chosen source."""
    if source == "oracle":
        return oracle_table(params, split=split, cap=cap)
    if source != "closed-form":
        raise ValueError(f"unknown source {source!r}")
    if not split and params.split:
        raise ValueError("no closed form for the unsplit diagnostic; use the oracle")
    classes = index_set(params)
    sizes = [class_size(c, params) for c in classes]
    entries = [
        [closed_row(params, ci, cj, published_isotropic_row) for cj in classes]
        for ci in classes
    ]
    return StructureTable(
        params, classes, sizes, entries, "closed-form", split=True,
        validate=not published_isotropic_row,
    )


# ---------------------------------------------------------------------------
# axioms
# ---------------------------------------------------------------------------

@dataclass
class AxiomReport:
    """Pass/fail per hypergroup axiom, with the violating triples listed."""

    positivity: bool = True
    normalization: bool = True
    hermitian_support: bool = True
    commutativity: bool = True
    identity_row: bool = True
    violations: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return (
            self.positivity
            and self.normalization
            and self.hermitian_support
            and self.commutativity
            and self.identity_row
        )

    def to_json(self) -> dict:
        return {
            "positivity": self.positivity,
            "normalization": self.normalization,
            "hermitian_support": self.hermitian_support,
            "commutativity": self.commutativity,
            "identity_row": self.identity_row,
            "all_pass": self.all_pass,
            "violations": self.violations,
        }


def verify_axioms(table: StructureTable, max_violations: int = 20) -> AxiomReport:
    """Check positivity, exact normalization, hermitian support at the
    identity (n[i,j,0] > 0 iff i = j), commutativity, and the identity row."""
    report = AxiomReport()
    classes = table.classes
    m = len(classes)
    entries = table.entries
    viol: dict[str, list] = {}

    def record(axiom: str, item) -> None:
        viol.setdefault(axiom, [])
        if len(viol[axiom]) < max_violations:
            viol[axiom].append(item)

    zero_pos = next(
        t for t, c in enumerate(classes) if not c.is_isotropic and c.value.idx == 0
    )
    one = Fraction(1)
    for i in range(m):
        for j in range(m):
            row = entries[i][j]
            if any(v < 0 for v in row):
                report.positivity = False
                record("positivity", (classes[i].label(), classes[j].label()))
            if sum(row) != one:
                report.normalization = False
                record(
                    "normalization",
                    (classes[i].label(), classes[j].label(), str(sum(row))),
                )
            support_at_zero = row[zero_pos] > 0
            if support_at_zero != (i == j):
                report.hermitian_support = False
                record(
                    "hermitian_support",
                    (classes[i].label(), classes[j].label(), str(row[zero_pos])),
                )
            for k in range(m):
                if entries[i][j][k] != entries[j][i][k]:
                    report.commutativity = False
                    record(
                        "commutativity",
                        (classes[i].label(), classes[j].label(), classes[k].label()),
                    )
    for j in range(m):
        row = entries[zero_pos][j]
        expected = [one if k == j else Fraction(0) for k in range(m)]
        if row != expected:
            report.identity_row = False
            record("identity_row", (classes[j].label(),))
    report.violations = viol
    return report


def two_step_support(
    i: ClassIndex, j: ClassIndex, table: StructureTable, step: ClassIndex | None = None
) -> ClassIndex | None:
    """A class k with n[i,step,k] > 0 and n[k,step,j] > 0, or None."""
    if step is None:
        step = ClassIndex.finite(table.params.spec.one)
    row_i = table.row(i, step)
    jpos = table.position(j)
    for t, mass in enumerate(row_i):
        if mass > 0 and table.entries[t][table.position(step)][jpos] > 0:
            return table.classes[t]
    return None
