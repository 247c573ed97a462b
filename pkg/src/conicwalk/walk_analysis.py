"""Random walk driven by a fixed class: kernel, stationarity, mixing.

The kernel K(i, j) = n[i, s, j] is kept both as exact rationals and as
float64.  Exact arithmetic is used for stationarity/minorization statements
at desk scale; kernel powers beyond the exact caps run in float64 with
explicit tolerances (mixing times here are O(q) steps, so accumulated error
stays far below them).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .conic_geometry import ClassIndex, ConicParams, class_size, index_set
from .errors import (
    BranchMismatch,
    IndexInvalid,
    IndexMismatch,
    InternalCheckError,
    NotErgodic,
    WalkTimeout,
)
from .hypergroup import StructureTable, closed_row

EXACT_SIZE_CAP = 32   # largest index-set size for exact rational solves
EXACT_POWER_CAP = 8   # largest exact kernel power
STATIONARY_TOL = 1e-13
DECAY_SLACK = 1e-10
MONOTONE_SLACK = 1e-12


class Kernel:
    """Row-stochastic matrix of the class walk with step class ``step``."""

    def __init__(self, params: ConicParams, classes: list[ClassIndex],
                 step: ClassIndex, rows: list[list[Fraction]]):
        self.params = params
        self.classes = list(classes)
        self.step = step
        self.rat = [list(r) for r in rows]
        one = Fraction(1)
        for t, row in enumerate(self.rat):
            if sum(row) != one:
                raise ValueError(f"kernel row {t} sums to {sum(row)} != 1")
        self.mat = np.array([[float(v) for v in row] for row in self.rat])
        err = np.abs(self.mat.sum(axis=1) - 1.0).max()
        if err > 1e-15:
            raise ValueError(f"float kernel row sum off by {err}")
        self._pos = {c: t for t, c in enumerate(self.classes)}

    @property
    def size(self) -> int:
        return len(self.classes)

    @property
    def q(self) -> int:
        return self.params.q

    @property
    def branch(self) -> int:
        return self.params.branch

    def position(self, c: ClassIndex) -> int:
        try:
            return self._pos[c]
        except KeyError:
            raise IndexInvalid(f"{c!r} not in kernel index set") from None

    def rational_power(self, m: int) -> list[list[Fraction]]:
        if m > EXACT_POWER_CAP or self.size > EXACT_SIZE_CAP:
            raise ValueError(f"exact power capped at m <= {EXACT_POWER_CAP}, "
                             f"size <= {EXACT_SIZE_CAP}")
        n = self.size
        out = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        for _ in range(m):
            out = [
                [sum(out[i][t] * self.rat[t][j] for t in range(n)) for j in range(n)]
                for i in range(n)
            ]
        return out

    def to_json_dict(self) -> dict:
        return {
            "params": self.params.to_json(),
            "step": self.step.label(),
            "classes": [c.label() for c in self.classes],
            "rows": [[f"{v.numerator}/{v.denominator}" for v in row] for row in self.rat],
        }


class Distribution:
    """Probability vector over the class index set (float, optionally exact)."""

    def __init__(self, classes: list[ClassIndex], probs,
                 exact: list[Fraction] | None = None):
        self.classes = list(classes)
        self.probs = np.asarray(probs, dtype=float)
        self.exact = list(exact) if exact is not None else None
        if self.probs.shape != (len(self.classes),):
            raise ValueError("probability vector has wrong length")
        if self.probs.min() < -1e-15 or abs(self.probs.sum() - 1.0) > 1e-12:
            raise ValueError("not a probability vector")
        if self.exact is not None and sum(self.exact) != 1:
            raise ValueError("exact probabilities do not sum to 1")

    @classmethod
    def point_mass(cls, classes: list[ClassIndex], at: ClassIndex) -> "Distribution":
        try:
            pos = classes.index(at)
        except ValueError:
            raise IndexInvalid(f"{at!r} not in index set") from None
        vec = np.zeros(len(classes))
        vec[pos] = 1.0
        exact = [Fraction(int(t == pos)) for t in range(len(classes))]
        return cls(classes, vec, exact)

    def __getitem__(self, c: ClassIndex) -> float:
        return float(self.probs[self.classes.index(c)])

    def to_json(self) -> dict:
        out = {
            "classes": [c.label() for c in self.classes],
            "probs": [float(v) for v in self.probs],
        }
        if self.exact is not None:
            out["exact"] = [f"{v.numerator}/{v.denominator}" for v in self.exact]
        return out


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def kernel(table: StructureTable, s: ClassIndex) -> Kernel:
    """K(i, j) = n[i, s, j] from a materialized table."""
    table.position(s)
    rows = [table.row(ci, s) for ci in table.classes]
    return Kernel(table.params, table.classes, s, rows)


def kernel_for_step(params: ConicParams, s: ClassIndex | None = None) -> Kernel:
    """Kernel straight from the closed form; avoids building the q^3 table."""
    if s is None:
        s = ClassIndex.finite(params.spec.one)
    classes = index_set(params)
    if s not in classes:
        raise IndexInvalid(f"{s!r} not a class over {params.spec!r}")
    rows = [closed_row(params, ci, s) for ci in classes]
    return Kernel(params, classes, s, rows)


def evolve(d0: Distribution, k: Kernel, n: int, exact: bool = False) -> Distribution:
    """d0 K^n by iterated vector-matrix products."""
    if d0.classes != k.classes:
        raise IndexMismatch("distribution and kernel index sets differ")
    if n < 0:
        raise ValueError("n must be >= 0")
    if exact:
        if n > 64:
            raise ValueError("exact evolution capped at n <= 64")
        if d0.exact is None:
            raise ValueError("exact evolution needs an exact-backed distribution")
        vec = list(d0.exact)
        m = k.size
        for _ in range(n):
            vec = [sum(vec[t] * k.rat[t][j] for t in range(m)) for j in range(m)]
        return Distribution(k.classes, [float(v) for v in vec], vec)
    vec = d0.probs.copy()
    for _ in range(n):
        vec = vec @ k.mat
    return Distribution(k.classes, vec)


def haar(params: ConicParams) -> Distribution:
    """Class sizes over q^2: the walk's limiting distribution."""
    classes = index_set(params)
    q2 = params.q ** 2
    exact = [Fraction(class_size(c, params), q2) for c in classes]
    return Distribution(classes, [float(v) for v in exact], exact)


# ---------------------------------------------------------------------------
# ergodicity and stationarity
# ---------------------------------------------------------------------------

@dataclass
class ErgodicityReport:
    ergodic: bool
    irreducible: bool
    period: int | None
    unreachable: list[str]
    self_loop: str | None

    def __bool__(self) -> bool:
        return self.ergodic

    def to_json(self) -> dict:
        return {
            "ergodic": self.ergodic,
            "irreducible": self.irreducible,
            "period": self.period,
            "unreachable": self.unreachable,
            "self_loop": self.self_loop,
        }


def ergodicity_check(k: Kernel) -> ErgodicityReport:
    """Irreducibility by reachability on the support digraph, aperiodicity by
    the gcd of cycle-length differences through state 0."""
    n = k.size
    support = [[j for j in range(n) if k.rat[i][j] > 0] for i in range(n)]
    reverse = [[i for i in range(n) if k.rat[i][j] > 0] for j in range(n)]

    def reach(adj):
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen

    fwd = reach(support)
    bwd = reach(reverse)
    unreachable = sorted(set(range(n)) - (fwd & bwd))
    irreducible = not unreachable
    period = None
    if irreducible:
        # BFS levels; gcd of (level[u] + 1 - level[v]) over support edges
        level = [-1] * n
        level[0] = 0
        frontier = [0]
        while frontier:
            nxt = []
            for u in frontier:
                for v in support[u]:
                    if level[v] < 0:
                        level[v] = level[u] + 1
                        nxt.append(v)
            frontier = nxt
        g = 0
        for u in range(n):
            for v in support[u]:
                g = math.gcd(g, level[u] + 1 - level[v])
        period = abs(g) if g else 0
    self_loop = next((k.classes[i].label() for i in range(n) if k.rat[i][i] > 0), None)
    ergodic = irreducible and period == 1
    return ErgodicityReport(
        ergodic=ergodic,
        irreducible=irreducible,
        period=period,
        unreachable=[k.classes[t].label() for t in unreachable],
        self_loop=self_loop,
    )


def stationary(k: Kernel, method: str = "auto") -> Distribution:
    """The unique pi with pi K = pi (exact solve at desk scale, else power
    iteration to a 1e-13 residual)."""
    if not ergodicity_check(k):
        raise NotErgodic(f"kernel with step {k.step!r} is not ergodic")
    if method == "auto":
        method = "exact" if k.size <= EXACT_SIZE_CAP else "power"
    if method == "exact":
        exact = _stationary_exact(k)
        return Distribution(k.classes, [float(v) for v in exact], exact)
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    n = k.size
    vec = np.full(n, 1.0 / n)
    for _ in range(100_000):
        nxt = vec @ k.mat
        if np.abs(nxt - vec).max() <= STATIONARY_TOL:
            nxt /= nxt.sum()
            return Distribution(k.classes, nxt)
        vec = nxt
    raise WalkTimeout("power iteration did not reach the residual tolerance")


def _stationary_exact(k: Kernel) -> list[Fraction]:
    """Solve (K^T - I) pi = 0, sum(pi) = 1 by fraction-exact elimination."""
    n = k.size
    rows = [
        [k.rat[j][i] - Fraction(int(i == j)) for j in range(n)] + [Fraction(0)]
        for i in range(n)
    ]
    rows.append([Fraction(1)] * n + [Fraction(1)])
    pivots = []
    r = 0
    for col in range(n):
        pivot = next((t for t in range(r, len(rows)) if rows[t][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][col]
        rows[r] = [v / pv for v in rows[r]]
        for t in range(len(rows)):
            if t != r and rows[t][col] != 0:
                factor = rows[t][col]
                rows[t] = [a - factor * b for a, b in zip(rows[t], rows[r])]
        pivots.append(col)
        r += 1
    if len(pivots) != n:
        raise NotErgodic("stationary system is rank-deficient")
    sol = [Fraction(0)] * n
    for t, col in enumerate(pivots):
        sol[col] = rows[t][n]
    return sol


# ---------------------------------------------------------------------------
# distances and mixing
# ---------------------------------------------------------------------------

def tv_distance(mu: Distribution, nu: Distribution) -> float:
    """Half the l1 distance; equals the max event-probability gap."""
    if mu.classes != nu.classes:
        raise IndexMismatch("distributions live on different index sets")
    return 0.5 * float(np.abs(mu.probs - nu.probs).sum())


def _tv_rows(mat: np.ndarray, pi: np.ndarray) -> float:
    return 0.5 * np.abs(mat - pi[None, :]).sum(axis=1).max()


def max_tv_curve(k: Kernel, pi: Distribution, t_max: int) -> list[float]:
    """Worst-initial-state TV to pi for t = 0..t_max (scans every start)."""
    if pi.classes != k.classes:
        raise IndexMismatch("stationary vector on a different index set")
    mat = np.eye(k.size)
    curve = [_tv_rows(mat, pi.probs)]
    for _ in range(t_max):
        mat = mat @ k.mat
        curve.append(_tv_rows(mat, pi.probs))
    return curve


def mixing_time_bound(q: int, branch: int) -> int:
    """Proven upper bound on the mixing time at epsilon = 1/(2e).

    branch 3: 4 * ceil((1+ln 2) (q+1)^4 / (q^2 (q-1))), from the four-step
    minorization constant q^2(q-1)/(q+1)^4.
    branch 1: 6 * ceil((1+ln 2) * 3q), from the six-step constant 1/(3q).
    """
    if branch not in (1, 3):
        raise BranchMismatch(f"branch must be 1 or 3, got {branch}")
    if q % 4 != branch:
        raise BranchMismatch(f"q = {q} is not {branch} (mod 4)")
    c0 = 1.0 + math.log(2.0)
    if branch == 3:
        return 4 * math.ceil(c0 * (q + 1) ** 4 / (q * q * (q - 1)))
    return 6 * math.ceil(c0 * 3 * q)


def minorization_reference(q: int, branch: int) -> tuple[int, Fraction]:
    """(m, c) with K^m >= c pi proven for the branch: (4, q^2(q-1)/(q+1)^4)
    or (6, 1/(3q))."""
    if branch not in (1, 3):
        raise BranchMismatch(f"branch must be 1 or 3, got {branch}")
    if q % 4 != branch:
        raise BranchMismatch(f"q = {q} is not {branch} (mod 4)")
    if branch == 3:
        return 4, Fraction(q * q * (q - 1), (q + 1) ** 4)
    return 6, Fraction(1, 3 * q)


def mixing_time(k: Kernel, pi: Distribution, eps: float,
                return_curve: bool = False):
    """Smallest t with worst-start TV at most eps; the curve is checked to be
    non-increasing (it provably is for these kernels)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if eps >= 1:
        return (0, [0.0]) if return_curve else 0
    if not ergodicity_check(k):
        raise NotErgodic(f"kernel with step {k.step!r} is not ergodic")
    limit = 100 * mixing_time_bound(k.q, k.branch)
    mat = np.eye(k.size)
    curve = [_tv_rows(mat, pi.probs)]
    t = 0
    while curve[-1] > eps:
        if t > limit:
            raise WalkTimeout(f"no mixing below eps={eps} within {limit} steps")
        mat = mat @ k.mat
        t += 1
        curve.append(_tv_rows(mat, pi.probs))
        if curve[-1] > curve[-2] + MONOTONE_SLACK:
            raise InternalCheckError(
                f"worst-start TV increased at t={t}: {curve[-2]} -> {curve[-1]}"
            )
    return (t, curve) if return_curve else t


def minorization_constant(k: Kernel, pi: Distribution, m: int) -> tuple[Fraction | None, float]:
    """min over (i, j) of K^m(i, j) / pi(j), exact when within caps."""
    if m < 1:
        raise ValueError("m must be >= 1")
    exact: Fraction | None = None
    if m <= EXACT_POWER_CAP and k.size <= EXACT_SIZE_CAP and pi.exact is not None:
        power = k.rational_power(m)
        exact = min(
            power[i][j] / pi.exact[j]
            for i in range(k.size)
            for j in range(k.size)
        )
    mat = np.linalg.matrix_power(k.mat, m)
    ratio = float((mat / pi.probs[None, :]).min())
    return exact, ratio


@dataclass
class DecayCheck:
    n: int
    measured: float
    bound: float
    ok: bool


def geometric_decay_check(k: Kernel, pi: Distribution, m: int, c,
                          n_max: int = 30) -> list[DecayCheck]:
    """Worst-start TV at step m*n against (1-c)^n + slack for n = 1..n_max."""
    c = float(c)
    step = np.linalg.matrix_power(k.mat, m)
    mat = np.eye(k.size)
    out = []
    for n in range(1, n_max + 1):
        mat = mat @ step
        measured = _tv_rows(mat, pi.probs)
        bound = (1.0 - c) ** n + DECAY_SLACK
        out.append(DecayCheck(n=n, measured=measured, bound=bound, ok=measured <= bound))
    return out


@dataclass
class BoostCheck:
    eps: float
    tau_eps: int
    tau_ref: int
    factor: int
    ok: bool


def boost_check(k: Kernel, pi: Distribution, eps: float) -> BoostCheck:
    """tau(eps) <= tau(1/(2e)) * ceil(ln(1/eps))."""
    ref_eps = 1.0 / (2.0 * math.e)
    if not 0 < eps < ref_eps:
        raise ValueError(f"eps must lie in (0, {ref_eps})")
    tau_eps = mixing_time(k, pi, eps)
    tau_ref = mixing_time(k, pi, ref_eps)
    factor = math.ceil(math.log(1.0 / eps))
    return BoostCheck(eps=eps, tau_eps=tau_eps, tau_ref=tau_ref, factor=factor,
                      ok=tau_eps <= tau_ref * factor)


# ---------------------------------------------------------------------------
# aggregate report
# ---------------------------------------------------------------------------

@dataclass
class MixingReport:
    q: int
    branch: int
    class_count: int
    step: str
    eps: float
    tau: int
    tau_bound: int
    curve: list[float]
    minorization_m: int
    minorization_measured: float
    minorization_measured_exact: str | None
    minorization_reference: str
    minorization_ok: bool

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "branch": self.branch,
            "class_count": self.class_count,
            "step": self.step,
            "eps": self.eps,
            "tau": self.tau,
            "tau_bound": self.tau_bound,
            "curve": self.curve,
            "minorization": {
                "m": self.minorization_m,
                "measured": self.minorization_measured,
                "measured_exact": self.minorization_measured_exact,
                "reference": self.minorization_reference,
                "ok": self.minorization_ok,
            },
        }


def mixing_report(params: ConicParams, s: ClassIndex | None = None,
                  eps: float = 1.0 / (2.0 * math.e)) -> MixingReport:
    """Measured mixing time, proven bound, TV curve and minorization ratio."""
    k = kernel_for_step(params, s)
    pi = haar(params)
    tau, curve = mixing_time(k, pi, eps, return_curve=True)
    m, ref = minorization_reference(k.q, k.branch)
    exact, measured = minorization_constant(k, pi, m)
    applicable = k.branch == 3 or k.q >= 13
    ok = (exact >= ref) if exact is not None else (measured >= float(ref) - 1e-12)
    return MixingReport(
        q=k.q,
        branch=k.branch,
        class_count=k.size,
        step=k.step.label(),
        eps=eps,
        tau=tau,
        tau_bound=mixing_time_bound(k.q, k.branch),
        curve=curve,
        minorization_m=m,
        minorization_measured=measured,
        minorization_measured_exact=(
            f"{exact.numerator}/{exact.denominator}" if exact is not None else None
        ),
        minorization_reference=f"{ref.numerator}/{ref.denominator}",
        minorization_ok=ok if applicable else True,
    )
