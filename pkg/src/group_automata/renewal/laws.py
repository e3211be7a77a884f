"""Interarrival laws on {1, 2, ...} and their renewal sequences.

For a law with pmf f, F(k) = P(X > k) is the survival function and
Fbar(k) = sum_{j >= k} F(j) its tail sum; the renewal sequence
u_k = P(event at k | event at 0) solves u_k = sum_j f(j) u_{k-j}.
"""

from __future__ import annotations

import logging
import math
from abc import ABC
from abc import abstractmethod
from collections.abc import Sequence
from functools import reduce
from typing import ClassVar

import numpy as np
import numpy.typing as npt

from group_automata._typing import override
from group_automata.chains.kernels import Kernel
from group_automata.chains.sampler import check_levels
from group_automata.errors import CapacityError
from group_automata.errors import DomainError

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

MAX_SUPPORT = 1_000_000
MASS_TOLERANCE = 1e-9


class InterarrivalLaw(ABC):
    name: ClassVar[str]

    @abstractmethod
    def pmf(self, K: int) -> FloatArray:
        """f(0), ..., f(K); f(0) is always 0."""

    @property
    @abstractmethod
    def mean(self) -> float: ...

    @property
    @abstractmethod
    def support_max(self) -> int | None:
        """Largest value with positive mass, None for unbounded support."""

    @abstractmethod
    def sample(self, rng: np.random.Generator, size: int) -> IntArray: ...

    @property
    def beta(self) -> float:
        """Event density 1/mean."""
        return 1.0 / self.mean

    @property
    def period(self) -> int:
        return 1

    def survival(self, K: int) -> FloatArray:
        """F(k) = P(X > k) for k = 0..K."""
        return np.clip(1.0 - np.cumsum(self.pmf(K)), 0.0, 1.0)

    def tail_sum(self, K: int) -> FloatArray:
        """Fbar(k) = sum_{j >= k} F(j) for k = 0..K."""
        F = self.survival(K)
        head = np.cumsum(F) - F
        return np.clip(self.mean - head, 0.0, None)

    def horizon(self, tol: float = 1e-15) -> int:
        """Smallest K with F(K) <= tol."""
        top = self.support_max
        if top is not None:
            return top
        K = 64
        while self.survival(K)[-1] > tol:
            if K >= MAX_SUPPORT:
                raise CapacityError(f"{self.name} law has mass beyond {MAX_SUPPORT}")
            K *= 2
        return int(np.argmax(self.survival(K) <= tol))


class GeometricLaw(InterarrivalLaw):
    """P(X = k) = beta (1 - beta)^(k-1), the memoryless law."""

    name = "geometric"

    def __init__(self, beta: float) -> None:
        if not 0 < beta <= 1:
            raise DomainError(f"geometric beta must lie in (0, 1], got {beta}")
        self._beta = beta

    @override
    def pmf(self, K: int) -> FloatArray:
        k = np.arange(K + 1, dtype=np.float64)
        out = self._beta * (1.0 - self._beta) ** np.maximum(k - 1, 0)
        out[0] = 0.0
        return out

    @override
    def survival(self, K: int) -> FloatArray:
        return (1.0 - self._beta) ** np.arange(K + 1, dtype=np.float64)

    @property
    @override
    def mean(self) -> float:
        return 1.0 / self._beta

    @property
    @override
    def support_max(self) -> None:
        return None

    @override
    def sample(self, rng: np.random.Generator, size: int) -> IntArray:
        return rng.geometric(self._beta, size=size).astype(np.int64)


class PmfLaw(InterarrivalLaw):
    """Finite support law given by masses at 1, 2, ..., len(masses)."""

    name = "pmf"

    def __init__(self, masses: Sequence[float] | FloatArray) -> None:
        arr = np.asarray(masses, dtype=np.float64)
        if arr.ndim != 1 or len(arr) == 0:
            raise DomainError("pmf law needs a nonempty list of masses")
        if len(arr) > MAX_SUPPORT:
            raise CapacityError(f"pmf support {len(arr)} exceeds cap {MAX_SUPPORT}")
        if (arr < 0).any():
            raise DomainError("pmf masses must be nonnegative")
        if abs(arr.sum() - 1.0) > MASS_TOLERANCE:
            raise DomainError(f"pmf masses sum to {arr.sum()}, not 1")
        nonzero = np.flatnonzero(arr > 0)
        self.masses = arr[: nonzero[-1] + 1] / arr.sum()
        self._values = nonzero + 1

    @override
    def pmf(self, K: int) -> FloatArray:
        out = np.zeros(K + 1)
        top = min(K, len(self.masses))
        out[1 : top + 1] = self.masses[:top]
        return out

    @property
    @override
    def mean(self) -> float:
        return float(np.arange(1, len(self.masses) + 1) @ self.masses)

    @property
    @override
    def support_max(self) -> int:
        return len(self.masses)

    @property
    @override
    def period(self) -> int:
        return reduce(math.gcd, self._values.tolist())

    @override
    def sample(self, rng: np.random.Generator, size: int) -> IntArray:
        return rng.choice(np.arange(1, len(self.masses) + 1), size=size, p=self.masses)


class TwoPointLaw(PmfLaw):
    """P(X = a) = weight, P(X = b) = 1 - weight."""

    name = "two-point"

    def __init__(self, a: int, b: int, weight: float) -> None:
        if not 1 <= a < b:
            raise DomainError(f"two-point law needs 1 <= a < b, got a={a}, b={b}")
        if not 0 < weight < 1:
            raise DomainError(f"two-point weight must lie in (0, 1), got {weight}")
        masses = np.zeros(b)
        masses[a - 1] = weight
        masses[b - 1] = 1.0 - weight
        super().__init__(masses)
        self.a = a
        self.b = b
        self.weight = weight


def renewal_sequence(law: InterarrivalLaw, K: int) -> FloatArray:
    """u_0, ..., u_K from u_0 = 1, u_k = sum_{j=1}^k f(j) u_{k-j}."""
    if K < 0:
        raise DomainError(f"K must be >= 0, got {K}")
    f = law.pmf(K)
    u = np.zeros(K + 1)
    u[0] = 1.0
    for k in range(1, K + 1):
        u[k] = f[1 : k + 1] @ u[k - 1 :: -1]
    return u


def invert_renewal_sequence(u: FloatArray) -> FloatArray:
    """The pmf f(0..K) whose renewal sequence starts with u_0..u_K."""
    K = len(u) - 1
    f = np.zeros(K + 1)
    for k in range(1, K + 1):
        f[k] = u[k] - f[1:k] @ u[k - 1 : 0 : -1]
    return f


def regeneration_law(kernel: Kernel, tol: float = 1e-12) -> PmfLaw:
    """Interarrival law of the regeneration times of `kernel`.

    Given a regeneration at 0, one at k happens with probability
    u_k = a_{-1} a_0 ... a_{k-2}; the law is the inverse of that renewal
    sequence, extended until the missing mass is below `tol`.
    """
    levels = check_levels(kernel)
    K = max(64, 4 * len(levels))
    while True:
        padded = np.ones(K + 1)
        padded[1 : min(K, len(levels)) + 1] = levels[:K]
        u = np.concatenate([[1.0], np.cumprod(padded[1:])])[: K + 1]
        f = invert_renewal_sequence(u)
        missing = 1.0 - f.sum()
        if missing <= tol:
            break
        if K >= MAX_SUPPORT // 8:
            raise CapacityError(
                f"regeneration law of the {kernel.family} kernel keeps mass {missing:.3e} past {K}"
            )
        K *= 2
    logger.debug(
        "Regeneration law of %s kernel: support %d, beta %.6f", kernel.family, K, u[-1]
    )
    f = np.clip(f[1:], 0.0, None)
    return PmfLaw(f / f.sum())
