"""Exact laws of weighted sums sum_k c_k x_k for finite-memory initial laws.

The chain is carried as a distribution over (partial sums in G^J, chain
state). Positions with a zero coefficient only move the chain state, so long
gaps collapse to a matrix power and the Cesaro scan advances every m at once
along the columns of the coefficient triangle.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from group_automata.automaton.core import AutomatonParams
from group_automata.automaton.core import coefficient_columns
from group_automata.automaton.core import coefficients
from group_automata.chains.kernels import Kernel
from group_automata.chains.kernels import MarkovKernel
from group_automata.chains.kernels import ProductKernel
from group_automata.errors import CapacityError
from group_automata.errors import DomainError
from group_automata.errors import UnsupportedExactError
from group_automata.group.core import GroupSpec

from .lemma import SumSpec
from .output import DistributionTable

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

MAX_SPAN = 1_000_000
MAX_STATES = 1 << 24


def _emissions(kernel: Kernel, w: Sequence[int]) -> tuple[FloatArray, int]:
    """E[g, s, z] = P(emit g and move from state s to z), and the start state."""
    q = kernel.q
    match kernel:
        case ProductKernel():
            return kernel.pi.reshape(q, 1, 1).copy(), 0
        case MarkovKernel():
            S = kernel.n_states
            E = np.zeros((q, S, S))
            for s in range(S):
                for g in range(q):
                    E[g, s, kernel.next_state(s, g)] = kernel.rows[s, g]
            return E, kernel.state_of(list(w))
        case _:
            raise UnsupportedExactError(
                f"exact laws need a product or Markov initial law, got {kernel.family}"
            )


class _SumStates:
    """Index bookkeeping for partial sums in G^J."""

    def __init__(self, spec: GroupSpec, width: int) -> None:
        self.spec = spec
        self.width = width
        self.T = spec.q**width
        shape = (spec.q,) * width
        self.digits = np.stack(np.unravel_index(np.arange(self.T), shape), axis=1)
        self.weights = spec.q ** np.arange(width - 1, -1, -1, dtype=np.int64)

    def step(self, V: FloatArray, c: IntArray, E: FloatArray) -> FloatArray:
        """Add c_j x to every partial sum j while the chain emits x.

        V has shape (n, T, S) and c shape (n, width), one coefficient row per
        distribution in the batch.
        """
        spec = self.spec
        rows = np.arange(len(V))[:, None]
        out = np.zeros_like(V)
        for g in range(spec.q):
            neg = spec.neg_table[spec.mul_table[c, g]]
            src = (spec.add_table[self.digits[None, :, :], neg[:, None, :]] * self.weights).sum(
                axis=-1
            )
            out += V[rows, src] @ E[g]
        return out


def _check_states(n: int, T: int, S: int) -> None:
    if n * T * S > MAX_STATES:
        raise CapacityError(f"{n} x {T} sums x {S} chain states exceeds the cap {MAX_STATES}")


def _joint_sum_law(
    kernel: Kernel, w: Sequence[int], positions: IntArray, coeffs: IntArray
) -> FloatArray:
    """Law over G^J of (sum_i coeffs[j, i] x_{positions[i]})_j."""
    E, s0 = _emissions(kernel, w)
    S = E.shape[1]
    states = _SumStates(kernel.spec, coeffs.shape[0])
    _check_states(1, states.T, S)
    transition = E.sum(axis=0)
    V = np.zeros((1, states.T, S))
    V[0, 0, s0] = 1.0
    prev = -1
    for pos, col in zip(positions.tolist(), coeffs.T):
        gap = pos - prev - 1
        if gap and S > 1:
            V = V @ np.linalg.matrix_power(transition, gap)
        V = states.step(V, col[None, :], E)
        prev = pos
    return V[0].sum(axis=1)


def exact_sum_distribution(
    sums: SumSpec, kernel: Kernel, w: Sequence[int] = ()
) -> DistributionTable:
    """Exact law of S = sum_r a_r x_r.

    Product laws go through the character transform E[chi_u(S)] =
    prod_r phi(a_r u); Markov laws through the transfer recursion.
    """
    spec = kernel.spec
    if sums.R and sums.R[-1] >= MAX_SPAN:
        raise CapacityError(f"index span {sums.R[-1] + 1} exceeds cap {MAX_SPAN}")
    a = np.asarray(sums.coeffs, dtype=np.int64) % spec.exponent_modulus
    match kernel:
        case ProductKernel():
            chi = spec.character_table
            phi = chi @ kernel.pi
            transform = phi[spec.mul_table[a]].prod(axis=0)
            law = (chi.conj().T @ transform).real / spec.q
        case _:
            law = _joint_sum_law(kernel, w, np.asarray(sums.R, dtype=np.int64), a[None, :])
    return DistributionTable.from_array(law, spec.q, (0,))


def iterate_marginal_exact(
    kernel: Kernel,
    m: int,
    J: Sequence[int],
    params: AutomatonParams,
    w: Sequence[int] = (),
) -> DistributionTable:
    """Exact joint law of ((phi^{m+j} x)_0 : j in J).

    Site j at time m is site 0 at time m + j, so only site 0 is ever needed.
    """
    if m < 0:
        raise DomainError(f"m must be >= 0, got {m}")
    J = tuple(sorted(set(J)))
    if not J or J[0] < 0:
        raise DomainError(f"J must be a nonempty set of nonnegative sites, got {J}")
    span = m + J[-1] + 1
    if span > MAX_SPAN:
        raise CapacityError(f"index span {span} exceeds cap {MAX_SPAN}")
    coeffs = np.zeros((len(J), span), dtype=np.int64)
    for i, j in enumerate(J):
        coeffs[i, : m + j + 1] = coefficients(m + j, params).coeffs
    positions = np.flatnonzero(coeffs.any(axis=0))
    law = _joint_sum_law(kernel, w, positions, coeffs[:, positions])
    return DistributionTable.from_array(law, kernel.q, J)


def marginal_laws(
    kernel: Kernel,
    J: Sequence[int],
    M: int,
    params: AutomatonParams,
    w: Sequence[int] = (),
) -> FloatArray:
    """Exact laws over G^J of ((phi^{m+j} x)_0)_j for every m < M, shape (M, q^|J|)."""
    J = tuple(sorted(set(J)))
    if not J or J[0] < 0:
        raise DomainError(f"J must be a nonempty set of nonnegative sites, got {J}")
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    E, s0 = _emissions(kernel, w)
    S = E.shape[1]
    states = _SumStates(kernel.spec, len(J))
    _check_states(M, states.T, S)
    length = M + J[-1]
    if length > MAX_SPAN:
        raise CapacityError(f"index span {length} exceeds cap {MAX_SPAN}")
    transition = E.sum(axis=0)
    offsets = np.asarray(J, dtype=np.int64)
    V = np.zeros((M, states.T, S))
    V[:, 0, s0] = 1.0
    logger.debug("Exact marginal laws - M: %d, |J|: %d, chain states: %d", M, len(J), S)
    for k, col in enumerate(coefficient_columns(params, length)):
        # rows m < k - max J have no coefficient left at k or beyond
        lo = max(0, k - J[-1])
        if lo >= M:
            break
        c = col[np.arange(lo, M)[:, None] + offsets[None, :]]
        active = V[lo:]
        moved = active @ transition if S > 1 else active * transition[0, 0]
        hit = np.flatnonzero(c.any(axis=1))
        if hit.size:
            moved[hit] = states.step(active[hit], c[hit], E)
        V[lo:] = moved
    return V.sum(axis=2)
