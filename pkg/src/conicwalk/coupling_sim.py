"""Seeded Monte Carlo walks and the classic two-chain coupling.

One chain starts from a fixed class, the other from the stationary
distribution; they move independently until they first meet and together
afterwards.  The tail of the meeting time dominates the exact TV distance,
which is what the simulations validate.

All randomness comes from numpy's PCG64 generator.  Trial t of a batch uses
the sub-stream seeded by SeedSequence((seed, t)), so batches are
reproducible and trials are independent regardless of execution order.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from .conic_geometry import ClassIndex
from .errors import IndexInvalid, WalkTimeout
from .walk_analysis import Distribution, Kernel

COALESCENCE_STEP_LIMIT = 10**6


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def _cumrows(k: Kernel) -> list[list[float]]:
    out = []
    for row in k.mat:
        acc = 0.0
        cum = []
        for v in row:
            acc += float(v)
            cum.append(acc)
        cum[-1] = 1.0
        out.append(cum)
    return out


def _draw(cum: list[float], u: float) -> int:
    return bisect.bisect_right(cum, u)


@dataclass
class WalkState:
    """Mutable walk position plus its deterministic generator."""

    current: ClassIndex
    steps: int
    rng: np.random.Generator

    @classmethod
    def start(cls, at: ClassIndex, seed) -> "WalkState":
        return cls(current=at, steps=0, rng=_rng(seed))


def sample_step(state: WalkState, k: Kernel) -> ClassIndex:
    """Advance one step: inverse-CDF draw over the canonical class order."""
    pos = k.position(state.current)
    u = state.rng.random()
    acc = 0.0
    row = k.mat[pos]
    nxt = k.size - 1
    for j in range(k.size):
        acc += row[j]
        if u < acc:
            nxt = j
            break
    state.current = k.classes[nxt]
    state.steps += 1
    return state.current


def coupled_run(i: ClassIndex, k: Kernel, pi: Distribution, seed,
                step_limit: int = COALESCENCE_STEP_LIMIT) -> int:
    """First meeting time of the fixed-start chain and a stationary chain.

    The stationary chain's start is drawn from pi; both chains step
    independently (first chain draws first) until they coincide.
    """
    if pi.classes != k.classes:
        raise IndexInvalid("pi and kernel index sets differ")
    rng = _rng(seed)
    cum = _cumrows(k)
    pi_cum = []
    acc = 0.0
    for v in pi.probs:
        acc += float(v)
        pi_cum.append(acc)
    pi_cum[-1] = 1.0

    x = k.position(i)
    y = _draw(pi_cum, rng.random())
    t = 0
    while x != y:
        if t >= step_limit:
            raise WalkTimeout(f"no coalescence within {step_limit} steps")
        x = _draw(cum[x], rng.random())
        y = _draw(cum[y], rng.random())
        t += 1
    return t


@dataclass
class CouplingStats:
    """Per-trial coalescence times of a seeded coupling batch."""

    start: str
    step: str
    trials: int
    seed: int
    times: list[int]
    marginal_counts: dict = field(default_factory=dict)

    @property
    def mean_time(self) -> float:
        return sum(self.times) / len(self.times)

    def tail(self, t: int) -> float:
        """Empirical P(T > t)."""
        return sum(1 for v in self.times if v > t) / self.trials

    def tail_curve(self) -> list[float]:
        top = max(self.times)
        hist = [0] * (top + 1)
        for v in self.times:
            hist[v] += 1
        out = []
        above = self.trials
        for t in range(top + 1):
            above -= hist[t]
            out.append(above / self.trials)
        return out

    def tail_stderr(self, t: int) -> float:
        p = self.tail(t)
        return (p * (1.0 - p) / self.trials) ** 0.5

    def to_json(self) -> dict:
        return {
            "start": self.start,
            "step": self.step,
            "trials": self.trials,
            "seed": self.seed,
            "mean_time": self.mean_time,
            "times": self.times,
            "tail": self.tail_curve(),
            "marginal_counts": {str(t): c for t, c in self.marginal_counts.items()},
        }


def run_coupling_trials(k: Kernel, pi: Distribution, start: ClassIndex,
                        trials: int, seed: int,
                        marginal_steps: tuple[int, ...] = ()) -> CouplingStats:
    """Independent coupled runs; trial t uses sub-seed (seed, t).

    ``marginal_steps`` additionally records the stationary chain's class at
    the requested steps (it should stay pi-distributed for all t).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if pi.classes != k.classes:
        raise IndexInvalid("pi and kernel index sets differ")
    cum = _cumrows(k)
    pi_cum = []
    acc = 0.0
    for v in pi.probs:
        acc += float(v)
        pi_cum.append(acc)
    pi_cum[-1] = 1.0
    x0 = k.position(start)
    n = k.size
    want_marginals = tuple(sorted(set(marginal_steps)))
    marg = {t: [0] * n for t in want_marginals}
    horizon = max(want_marginals, default=0)

    times = []
    for trial in range(trials):
        rng = _rng((seed, trial))
        x = x0
        y = _draw(pi_cum, rng.random())
        t = 0
        met = x == y
        coalesced_at = 0 if met else None
        while True:
            if coalesced_at is None:
                if t >= COALESCENCE_STEP_LIMIT:
                    raise WalkTimeout(f"no coalescence within {COALESCENCE_STEP_LIMIT} steps")
                x = _draw(cum[x], rng.random())
                y = _draw(cum[y], rng.random())
                t += 1
                if x == y:
                    coalesced_at = t
            else:
                if t >= horizon:
                    break
                # moved together: one draw advances both chains
                x = y = _draw(cum[x], rng.random())
                t += 1
            if t in marg:
                marg[t][y] += 1
        times.append(coalesced_at)
    return CouplingStats(
        start=start.label(),
        step=k.step.label(),
        trials=trials,
        seed=seed,
        times=times,
        marginal_counts=marg,
    )


@dataclass
class MonteCarloTV:
    """Plug-in TV estimate with a conservative bootstrap interval."""

    t: int
    trials: int
    seed: int
    estimate: float
    ci_low: float
    ci_high: float
    counts: list[int]

    def brackets(self, exact: float) -> bool:
        return self.ci_low <= exact <= self.ci_high

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "trials": self.trials,
            "seed": self.seed,
            "estimate": self.estimate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "counts": self.counts,
        }


def monte_carlo_tv(i: ClassIndex, t: int, trials: int, seed: int,
                   k: Kernel, pi: Distribution,
                   bootstrap: int = 1000) -> MonteCarloTV:
    """Empirical TV between the law of X_t (started at i) and pi.

    The interval comes from the triangle inequality
    |TV(emp, pi) - TV(law, pi)| <= TV(emp, law): the bootstrap distribution
    of TV(resample, emp) estimates the sampling deviation TV(emp, law), and
    its 97.5th percentile radius around the plug-in estimate gives a
    conservative 95% interval.  This stays honest when the true TV is far
    below the sampling noise floor, where a plain percentile interval of the
    (upward-biased) plug-in statistic cannot reach the true value.
    """
    if trials < 1000:
        raise ValueError("trials must be >= 1000")
    if pi.classes != k.classes:
        raise IndexInvalid("pi and kernel index sets differ")
    cum = _cumrows(k)
    x0 = k.position(i)
    n = k.size
    counts = [0] * n
    for trial in range(trials):
        rng = _rng((seed, trial))
        x = x0
        for _ in range(t):
            x = _draw(cum[x], rng.random())
        counts[x] += 1
    emp = np.array(counts, dtype=float) / trials
    estimate = 0.5 * float(np.abs(emp - pi.probs).sum())

    boot_rng = _rng((seed, 1 << 32))  # sub-seed outside the trial-index range
    resampled = boot_rng.multinomial(trials, emp / emp.sum(), size=bootstrap) / trials
    boot_noise = 0.5 * np.abs(resampled - emp[None, :]).sum(axis=1)
    radius = float(np.percentile(boot_noise, 97.5))
    return MonteCarloTV(
        t=t,
        trials=trials,
        seed=seed,
        estimate=estimate,
        ci_low=max(0.0, estimate - radius),
        ci_high=min(1.0, estimate + radius),
        counts=counts,
    )
