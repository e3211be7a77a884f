"""Conditional laws P(g | past) with complete connections and summable decay.

Pasts are sequences of element codes, newest first: past[0] = w_{-1}.
Three families are provided; each knows its exact infima over unseen tails,
which is what the interval construction relies on.
"""

from __future__ import annotations

import itertools
import logging
from abc import ABC
from abc import abstractmethod
from collections.abc import Sequence
from enum import Enum
from typing import ClassVar

import numpy as np
import numpy.typing as npt

from group_automata._typing import override
from group_automata.errors import CapacityError
from group_automata.errors import DomainError
from group_automata.group.core import GroupElement
from group_automata.group.core import GroupSpec

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

NORMALIZATION_TOLERANCE = 1e-9
ONE_SLACK = 1e-12
DEFAULT_ENUMERATION_CAP = 1 << 16


class TailMode(str, Enum):
    DEFAULT = "default"
    WORST = "worst"
    BEST = "best"


def _probability_vector(values: Sequence[float] | FloatArray, q: int, what: str) -> FloatArray:
    vec = np.asarray(values, dtype=np.float64)
    if vec.shape != (q,):
        raise DomainError(f"{what} needs {q} entries, got shape {vec.shape}")
    if (vec < 0).any():
        raise DomainError(f"{what} has negative entries")
    if abs(vec.sum() - 1.0) > NORMALIZATION_TOLERANCE:
        raise DomainError(f"{what} sums to {vec.sum()}, not 1")
    return vec


def _clamp_one(a: float) -> float:
    return 1.0 if a > 1.0 - ONE_SLACK else a


class Kernel(ABC):
    family: ClassVar[str]

    def __init__(self, spec: GroupSpec) -> None:
        self.spec = spec

    @property
    def q(self) -> int:
        return self.spec.q

    @property
    @abstractmethod
    def memory(self) -> int | None:
        """Number of past coordinates the law depends on, None when unbounded."""

    @abstractmethod
    def conditional(self, past: Sequence[int], tail: TailMode = TailMode.DEFAULT) -> FloatArray:
        """P(. | past, tail) as a vector over G.

        DEFAULT fills the unseen coordinates with the family's default tail;
        WORST and BEST return, for each g separately, the inf and sup over all
        tails.
        """

    @abstractmethod
    def gamma(self, m: int) -> float:
        """Bound on |P(g|w)/P(g|v) - 1| over pasts agreeing on m coordinates."""

    @abstractmethod
    def gamma_tail(self, k: int) -> float:
        """Bound on sum_{m >= k} gamma_m."""

    @abstractmethod
    def a_scalar(self, k: int) -> float:
        """a_k = min over length-k prefixes of sum_g a_k(g | prefix), k >= 0."""

    def default_fill(self, depth: int) -> list[int]:
        """Codes of the default tail at positions 1..depth beyond a finite past."""
        return [0] * depth

    def complete_past(self, past: Sequence[int], k: int) -> list[int]:
        head = list(past[:k])
        if len(head) < k:
            head += self.default_fill(k)[len(head) :]
        return head

    def infimum(self) -> float:
        """a_{-1}(g|w): inf of P(z|v) over every symbol and every past."""
        return float(self.conditional((), TailMode.WORST).min())

    def lower_levels(self, past: Sequence[int], K: int) -> FloatArray:
        """a_k(g | past) for k = 0..K, rows indexed by k.

        The past is completed by the default tail where it is shorter than k.
        """
        return np.stack(
            [self.conditional(self.complete_past(past, k), TailMode.WORST) for k in range(K + 1)]
        )

    def a_scalars(self, K: int) -> FloatArray:
        """(a_{-1}, a_0, ..., a_K) with a_{-1} = q inf P, the mass of level -1."""
        out = [_clamp_one(self.q * self.infimum())]
        out += [self.a_scalar(k) for k in range(K + 1)]
        return np.asarray(out)

    def stable_index(self) -> int | None:
        """Smallest k with a_j = 1 for every j >= k, None if never."""
        return self.memory


class ProductKernel(Kernel):
    family = "product"

    def __init__(self, spec: GroupSpec, pi: Sequence[float] | FloatArray) -> None:
        super().__init__(spec)
        self.pi = _probability_vector(pi, spec.q, "product law pi")
        if (self.pi <= 0).any():
            raise DomainError("product law pi must be strictly positive")

    @classmethod
    def bernoulli(cls, theta: float) -> ProductKernel:
        """Z_2 with P(x = 1) = theta."""
        return cls(GroupSpec.cyclic(2), [1.0 - theta, theta])

    @classmethod
    def uniform(cls, spec: GroupSpec) -> ProductKernel:
        return cls(spec, spec.uniform_measure())

    @property
    @override
    def memory(self) -> int:
        return 0

    @override
    def conditional(self, past: Sequence[int], tail: TailMode = TailMode.DEFAULT) -> FloatArray:
        return self.pi.copy()

    @override
    def gamma(self, m: int) -> float:
        return 0.0

    @override
    def gamma_tail(self, k: int) -> float:
        return 0.0

    @override
    def a_scalar(self, k: int) -> float:
        return 1.0


class MarkovKernel(Kernel):
    """Order-k0 chain; transition[w_{-1}, ..., w_{-k0}, g] = P(g | w)."""

    family = "markov"

    def __init__(
        self,
        spec: GroupSpec,
        order: int,
        transition: Sequence[Sequence[float]] | FloatArray,
        initial_past: Sequence[int] | None = None,
    ) -> None:
        super().__init__(spec)
        if order < 1:
            raise DomainError(f"Markov order must be >= 1, got {order}")
        q = spec.q
        rows = np.asarray(transition, dtype=np.float64)
        if rows.shape != (q**order, q):
            raise DomainError(
                f"order-{order} table over q={q} needs shape {(q**order, q)}, got {rows.shape}"
            )
        for i, row in enumerate(rows):
            _probability_vector(row, q, f"transition row {i}")
        if (rows <= 0).any():
            raise DomainError("transition probabilities must be strictly positive")
        self.order = order
        self.rows = rows
        self.table = rows.reshape((q,) * order + (q,))
        past = list(initial_past) if initial_past is not None else [0] * order
        if len(past) != order or any(not 0 <= c < q for c in past):
            raise DomainError(f"initial past must be {order} codes in [0, {q})")
        self.initial_past = tuple(past)

    @classmethod
    def sticky(cls, spec: GroupSpec, stay: float, order: int = 1) -> MarkovKernel:
        """P(x_0 = w_{-1}) = stay, the remaining mass spread uniformly."""
        q = spec.q
        if not 0 < stay < 1:
            raise DomainError(f"stay must lie in (0, 1), got {stay}")
        move = (1.0 - stay) / (q - 1)
        rows = np.full((q**order, q), move)
        for state in range(q**order):
            newest = state // q ** (order - 1)
            rows[state, newest] = stay
        return cls(spec, order, rows)

    @property
    @override
    def memory(self) -> int:
        return self.order

    @property
    def n_states(self) -> int:
        return self.q**self.order

    def state_of(self, past: Sequence[int]) -> int:
        full = self.complete_past(past, self.order)
        return int(np.ravel_multi_index(tuple(full), (self.q,) * self.order))

    def next_state(self, state: int, g: int) -> int:
        return g * self.q ** (self.order - 1) + state // self.q

    @override
    def default_fill(self, depth: int) -> list[int]:
        fill = list(self.initial_past) + [0] * max(0, depth - self.order)
        return fill[:depth]

    @override
    def conditional(self, past: Sequence[int], tail: TailMode = TailMode.DEFAULT) -> FloatArray:
        known = list(past[: self.order])
        if tail is TailMode.DEFAULT or len(known) == self.order:
            return self.rows[self.state_of(known)].copy()
        block = self.table[tuple(known)]
        axes = tuple(range(block.ndim - 1))
        return block.min(axis=axes) if tail is TailMode.WORST else block.max(axis=axes)

    @override
    def gamma(self, m: int) -> float:
        if m >= self.order:
            return 0.0
        block = self.table.reshape((self.q,) * m + (-1, self.q))
        return float((block.max(axis=-2) / block.min(axis=-2) - 1.0).max())

    @override
    def gamma_tail(self, k: int) -> float:
        return sum(self.gamma(m) for m in range(max(k, 0), self.order))

    @override
    def a_scalar(self, k: int) -> float:
        if k < 0:
            raise DomainError(f"a_k needs k >= 0, got {k}")
        if k >= self.order:
            return 1.0
        block = self.table.reshape((self.q,) * k + (-1, self.q))
        return _clamp_one(float(block.min(axis=-2).sum(axis=-1).min()))


class MixtureKernel(Kernel):
    """P(g|w) = delta0/q + (1 - delta0) sum_{j>=1} lambda_j f_j(g | w_{-j}).

    lambda_j = (1 - rho) rho^(j-1); f_j = tables[min(j, L) - 1] where
    tables[i][h, g] is the single-site law of g given the symbol h at lag i+1.
    The default tail is the identity element.
    """

    family = "mixture"

    def __init__(
        self,
        spec: GroupSpec,
        tables: Sequence[Sequence[Sequence[float]]] | FloatArray,
        rho: float = 0.5,
        delta0: float = 0.05,
    ) -> None:
        super().__init__(spec)
        q = spec.q
        arr = np.asarray(tables, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[1:] != (q, q) or arr.shape[0] < 1:
            raise DomainError(f"mixture tables need shape (L, {q}, {q}), got {arr.shape}")
        for i, table in enumerate(arr):
            for h, row in enumerate(table):
                _probability_vector(row, q, f"mixture table {i} row {h}")
        if not 0 <= rho < 1:
            raise DomainError(f"rho must lie in [0, 1), got {rho}")
        if not 0 < delta0 <= 1:
            raise DomainError(f"delta0 must lie in (0, 1], got {delta0}")
        self.tables = arr
        self.rho = rho
        self.delta0 = delta0
        self._min = arr.min(axis=1)
        self._max = arr.max(axis=1)

    @classmethod
    def sticky(
        cls, spec: GroupSpec, stay: float, rho: float = 0.5, delta0: float = 0.05
    ) -> MixtureKernel:
        q = spec.q
        table = np.full((q, q), (1.0 - stay) / (q - 1))
        np.fill_diagonal(table, stay)
        return cls(spec, [table], rho=rho, delta0=delta0)

    @property
    @override
    def memory(self) -> None:
        return None

    @property
    def L(self) -> int:
        return self.tables.shape[0]

    def weight(self, j: int) -> float:
        return (1.0 - self.rho) * self.rho ** (j - 1)

    def _weights(self, n: int) -> FloatArray:
        return (1.0 - self.rho) * self.rho ** np.arange(n, dtype=np.float64)

    def _table_index(self, n: int) -> npt.NDArray[np.int64]:
        """Table used at lags 1..n."""
        return np.minimum(np.arange(n), self.L - 1)

    def _extreme(self, tail: TailMode) -> FloatArray:
        match tail:
            case TailMode.WORST:
                return self._min
            case TailMode.BEST:
                return self._max
            case TailMode.DEFAULT:
                return self.tables[:, 0, :]

    @override
    def conditional(self, past: Sequence[int], tail: TailMode = TailMode.DEFAULT) -> FloatArray:
        past = np.asarray(past, dtype=np.int64)
        n = len(past)
        head = max(n, self.L - 1)
        weights = self._weights(head)
        idx = self._table_index(head)
        rows = self._extreme(tail)[idx].copy()
        if n:
            rows[:n] = self.tables[idx[:n], past, :]
        mix = weights @ rows + self.rho**head * self._extreme(tail)[self.L - 1]
        return self.delta0 / self.q + (1.0 - self.delta0) * mix

    @override
    def lower_levels(self, past: Sequence[int], K: int) -> FloatArray:
        past = np.asarray(self.complete_past(past, K), dtype=np.int64)
        head = max(K, self.L - 1)
        weights = self._weights(head)[:, None]
        idx = self._table_index(head)
        worst = weights * self._min[idx]
        known = weights[:K] * self.tables[idx[:K], past, :]
        tail = self.rho**head * self._min[self.L - 1]
        # level k keeps lags 1..k and takes the infimum over lags > k
        known_cum = np.vstack([np.zeros(self.q), np.cumsum(known, axis=0)])
        worst_rev = np.vstack([np.cumsum(worst[::-1], axis=0)[::-1], np.zeros(self.q)])
        mix = known_cum + worst_rev[: K + 1] + tail
        return self.delta0 / self.q + (1.0 - self.delta0) * mix

    @override
    def gamma(self, m: int) -> float:
        return (1.0 - self.delta0) * self.rho**m / self.infimum()

    @override
    def gamma_tail(self, k: int) -> float:
        return (1.0 - self.delta0) * self.rho ** max(k, 0) / ((1.0 - self.rho) * self.infimum())

    def _tail_mass_deficit(self, k: int) -> float:
        """sum_{j>k} lambda_j (1 - sum_g min_h f_j(g|h))."""
        deficit = 1.0 - self._min.sum(axis=1)
        head = max(k, self.L - 1)
        explicit = sum(self.weight(j) * deficit[min(j, self.L) - 1] for j in range(k + 1, head + 1))
        return explicit + self.rho**head * deficit[self.L - 1]

    @override
    def a_scalar(self, k: int) -> float:
        if k < 0:
            raise DomainError(f"a_k needs k >= 0, got {k}")
        return _clamp_one(1.0 - (1.0 - self.delta0) * self._tail_mass_deficit(k))

    @override
    def a_scalars(self, K: int) -> FloatArray:
        deficit = 1.0 - self._min.sum(axis=1)
        head = max(K, self.L - 1)
        terms = self._weights(head) * deficit[self._table_index(head)]
        tails = np.append(np.cumsum(terms[::-1])[::-1], 0.0)
        tails = tails + self.rho**head * deficit[self.L - 1]
        a = 1.0 - (1.0 - self.delta0) * tails[: K + 1]
        a = np.where(a > 1.0 - ONE_SLACK, 1.0, a)
        return np.concatenate([[_clamp_one(self.q * self.infimum())], a])


KernelSpec = ProductKernel | MarkovKernel | MixtureKernel


def eval_kernel(
    kernel: Kernel,
    g: GroupElement,
    past: Sequence[GroupElement],
    tail_mode: TailMode = TailMode.DEFAULT,
) -> float:
    spec = kernel.spec
    codes = [spec.code(h) for h in past]
    return float(kernel.conditional(codes, tail_mode)[spec.code(g)])


def gamma_bound(kernel: Kernel, upto: int) -> FloatArray:
    """gamma_0, ..., gamma_upto."""
    return np.array([kernel.gamma(m) for m in range(upto + 1)])


def compute_a(
    kernel: Kernel, k: int, prefix: Sequence[int] = ()
) -> tuple[FloatArray, float]:
    """(a_k(g | prefix) for every g, a_k).

    k = -1 gives the global infimum, identical for every g and every past,
    and the level mass a_{-1} = q inf P. For k >= 0 the prefix must hold at
    least k codes.
    """
    if k < -1:
        raise DomainError(f"a_k is defined for k >= -1, got {k}")
    if k == -1:
        inf = kernel.infimum()
        return np.full(kernel.q, inf), _clamp_one(kernel.q * inf)
    if len(prefix) < k:
        raise DomainError(f"a_{k} needs a prefix of {k} codes, got {len(prefix)}")
    per_g = kernel.conditional(list(prefix[:k]), TailMode.WORST)
    return per_g, kernel.a_scalar(k)


def a_scalar_enumerated(kernel: Kernel, k: int, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """a_k by brute force over every prefix in G^k."""
    if kernel.q**k > cap:
        raise CapacityError(f"enumerating G^{k} over q={kernel.q} exceeds cap {cap}")
    best = min(
        float(kernel.conditional(list(prefix), TailMode.WORST).sum())
        for prefix in itertools.product(range(kernel.q), repeat=k)
    )
    return _clamp_one(best)
