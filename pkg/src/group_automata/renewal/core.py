from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from group_automata.chains.kernels import Kernel
from group_automata.errors import DomainError

from .laws import GeometricLaw
from .laws import InterarrivalLaw
from .laws import regeneration_law
from .laws import renewal_sequence

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

MIN_TRIALS = 1000


@dataclass(frozen=True)
class RenewalStats:
    """One realization of a renewal process observed on [0, span)."""

    times: IntArray
    span: int

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=np.int64)
        if len(times) and ((np.diff(times) <= 0).any() or times[0] < 0 or times[-1] >= self.span):
            raise DomainError("renewal times must be strictly increasing inside [0, span)")
        object.__setattr__(self, "times", times)

    @property
    def interarrivals(self) -> IntArray:
        return np.diff(self.times)

    @property
    def beta_hat(self) -> float:
        return len(self.times) / self.span

    def survival_hat(self, K: int) -> FloatArray:
        """Empirical F(k) = P(X > k) from the observed gaps."""
        gaps = self.interarrivals
        if len(gaps) == 0:
            raise DomainError("need at least two events for interarrival statistics")
        return (gaps[None, :] > np.arange(K + 1)[:, None]).mean(axis=1)

    def fbar_hat(self, K: int) -> FloatArray:
        """Empirical Fbar(k) = sum_{j >= k} F(j), k = 0..K."""
        top = int(self.interarrivals.max())
        F = self.survival_hat(max(K, top))
        return np.cumsum(F[::-1])[::-1][: K + 1]

    def residuals(self, n: int, k: int = 0) -> IntArray:
        """S_n seen from every event taken as time 0, capped at k + 1.

        S_n is the first event strictly after n minus n, so S_n >= 1. Only
        origins whose window [origin, origin + n + k] lies inside the span are
        used, which is enough to decide S_n > k.
        """
        if n < 0 or k < 0:
            raise DomainError(f"n and k must be >= 0, got n={n}, k={k}")
        origins = self.times[self.times + n + k < self.span]
        after = np.searchsorted(self.times, origins + n, side="right")
        nxt = np.append(self.times, np.iinfo(np.int64).max)[after]
        return np.minimum(nxt - origins - n, k + 1)


@dataclass(frozen=True)
class MissEstimate:
    estimate: float
    stderr: float
    trials: int


def counting_measure(times: Iterable[int] | IntArray, A: Iterable[int]) -> int:
    """N(A), the number of event times falling in A."""
    a = np.fromiter(A, dtype=np.int64)
    if len(a) == 0:
        return 0
    return int(np.isin(np.asarray(times, dtype=np.int64), a).sum())


def stationary_delay(law: InterarrivalLaw, K: int) -> FloatArray:
    """P(T_1 = k) = beta F(k), k = 0..K."""
    return law.beta * law.survival(K)


def _first_times(law: InterarrivalLaw, rng: np.random.Generator, size: int) -> IntArray:
    if isinstance(law, GeometricLaw):
        return rng.geometric(law.beta, size=size).astype(np.int64) - 1
    K = law.horizon()
    delay = stationary_delay(law, K)
    return rng.choice(K + 1, size=size, p=delay / delay.sum())


def _renewal_paths(
    law: InterarrivalLaw, horizon: int, trials: int, rng: np.random.Generator, stationary: bool
) -> list[IntArray]:
    starts = _first_times(law, rng, trials) if stationary else np.zeros(trials, dtype=np.int64)
    chunk = int(horizon * law.beta * 1.5) + 16
    paths = []
    for start in starts.tolist():
        pieces = [np.array([start], dtype=np.int64)]
        last = start
        while last < horizon:
            more = last + np.cumsum(law.sample(rng, chunk))
            pieces.append(more)
            last = int(more[-1])
        times = np.concatenate(pieces)
        paths.append(times[times < horizon])
    return paths


def simulate_renewal(
    law: InterarrivalLaw, span: int, seed: int, stationary: bool = True
) -> RenewalStats:
    """Events on [0, span): stationary start by default, else an event at 0."""
    if span < 1:
        raise DomainError(f"span must be >= 1, got {span}")
    rng = np.random.default_rng(seed)
    times = _renewal_paths(law, span, 1, rng, stationary)[0]
    return RenewalStats(times=times, span=span)


def _as_law(source: Kernel | InterarrivalLaw) -> InterarrivalLaw:
    return regeneration_law(source) if isinstance(source, Kernel) else source


def miss_probability(
    source: Kernel | InterarrivalLaw, A: Iterable[int], trials: int, seed: int
) -> MissEstimate:
    """Monte Carlo P{N(A) = 0} for the stationary renewal process.

    A kernel stands for the stationary process of its regeneration times.
    """
    if trials < MIN_TRIALS:
        raise DomainError(f"miss probability needs at least {MIN_TRIALS} trials, got {trials}")
    law = _as_law(source)
    a = np.fromiter(A, dtype=np.int64)
    if len(a) == 0:
        return MissEstimate(estimate=1.0, stderr=0.0, trials=trials)
    if (a < 0).any():
        raise DomainError("A must hold nonnegative times")
    rng = np.random.default_rng(seed)
    paths = _renewal_paths(law, int(a.max()) + 1, trials, rng, stationary=True)
    misses = sum(1 for times in paths if not np.isin(times, a).any())
    p = misses / trials
    logger.debug("miss probability for |A|=%d: %.5f over %d trials", len(a), p, trials)
    return MissEstimate(estimate=p, stderr=float(np.sqrt(p * (1 - p) / trials)), trials=trials)


def spread_subset(A: Iterable[int], ell: int) -> list[int]:
    """Greedy left-to-right subset of A with consecutive gaps >= [|A| / ell]."""
    points = sorted(set(A))
    if ell < 1:
        raise DomainError(f"ell must be >= 1, got {ell}")
    if not points:
        return []
    gap = len(points) // ell
    chosen = [points[0]]
    for x in points[1:]:
        if x - chosen[-1] >= gap:
            chosen.append(x)
    return chosen


def bound_parameters(law: InterarrivalLaw, horizon: int = 10_000) -> tuple[float, int]:
    """(delta, n0): delta = beta / 2 and n0 the index from which u_k > delta up to `horizon`."""
    if law.period != 1:
        raise DomainError(f"{law.name} law has period {law.period}; the bound needs aperiodicity")
    delta = law.beta / 2
    u = renewal_sequence(law, horizon)
    low = np.flatnonzero(u <= delta)
    n0 = int(low[-1]) + 1 if len(low) else 0
    if n0 > horizon:
        raise DomainError(f"renewal sequence does not settle above {delta} within {horizon}")
    return delta, n0


def epsilon_bound(law: InterarrivalLaw, n: int, ell: int, delta: float, n0: int) -> float:
    """(1 - delta)^ell + (ell - 1) Fbar([n/ell] - n0) + P{T_1 > [n/ell] - n0}, capped at 1."""
    if not 1 <= ell <= n:
        raise DomainError(f"need 1 <= ell <= n, got ell={ell}, n={n}")
    if not 0 < delta < law.beta:
        raise DomainError(f"need 0 < delta < beta={law.beta}, got {delta}")
    if n0 < 0:
        raise DomainError(f"n0 must be >= 0, got {n0}")
    k = n // ell - n0
    return float(min(1.0, _bound_terms(law, np.array([ell]), np.array([k]), delta)[0]))


def _bound_terms(
    law: InterarrivalLaw, ells: IntArray, ks: IntArray, delta: float
) -> FloatArray:
    top = int(max(ks.max(), 0)) + 1
    fbar = law.tail_sum(top)
    idx = np.clip(ks, 0, top)
    # P(T_1 > k) = beta Fbar(k + 1), and 1 for k < 0
    residual = np.where(ks < 0, 1.0, law.beta * fbar[np.clip(ks + 1, 0, top)])
    return (1.0 - delta) ** ells + (ells - 1) * fbar[idx] + residual


def epsilon_curve(law: InterarrivalLaw, n_max: int) -> FloatArray:
    """eps(0), ..., eps(n_max): the bound minimized over ell and made nonincreasing.

    eps(0) = 1. A set of size n contains sets of every smaller size, so the
    running minimum over n' <= n is still a bound for size n.
    """
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    delta, n0 = bound_parameters(law)
    out = np.ones(n_max + 1)
    for n in range(1, n_max + 1):
        ells = np.arange(1, n + 1)
        out[n] = min(1.0, float(_bound_terms(law, ells, n // ells - n0, delta).min()))
    return np.minimum.accumulate(out)


def epsilon(source: Kernel | InterarrivalLaw, n: int) -> float:
    """Constructive eps(n) with P{N(A) = 0} <= eps(|A|)."""
    return float(epsilon_curve(_as_law(source), n)[n])


def residual_tail_exact(law: InterarrivalLaw, n: int, k: int) -> float:
    """F_n(k) = P(S_n > k | event at 0) = sum_{j=0}^n F(j + k) u_{n-j}."""
    if n < 0 or k < 0:
        raise DomainError(f"n and k must be >= 0, got n={n}, k={k}")
    u = renewal_sequence(law, n)
    F = law.survival(n + k)
    return float(F[k : n + k + 1] @ u[::-1])


def residual_distribution(stats: RenewalStats, n: int, k: int) -> MissEstimate:
    """Empirical F_n(k) with its binomial standard error."""
    s = stats.residuals(n, k)
    if len(s) == 0:
        raise DomainError(f"no event leaves room for n={n}, k={k} inside span {stats.span}")
    p = float((s > k).mean())
    return MissEstimate(estimate=p, stderr=float(np.sqrt(p * (1 - p) / len(s))), trials=len(s))
