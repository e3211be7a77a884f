"""The partition of [0, 1) into level slices B_k(g|w).

Intervals are half-open and laid out level by level (k = -1, 0, 1, ..., K),
g ascending inside each level; a uniform exactly on a boundary belongs to the
interval on its right.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from group_automata.errors import CapacityError
from group_automata.errors import DomainError
from group_automata.errors import KernelInconsistencyError

from .kernels import ONE_SLACK
from .kernels import Kernel

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

NEGATIVE_TOLERANCE = 1e-12
INITIAL_TRUNCATION = 16
MAX_TRUNCATION = 1024


@dataclass(frozen=True)
class IntervalLayout:
    past: tuple[int, ...]
    lower: FloatArray
    """a_k(g|w), rows k = -1..K."""
    lengths: FloatArray
    """b_k(g|w), rows k = -1..K."""
    a_seq: FloatArray
    """a_{-1}, a_0, ..., a_K."""
    truncation: int

    @property
    def q(self) -> int:
        return self.lengths.shape[1]

    @property
    def boundaries(self) -> FloatArray:
        """Right edges of the flattened intervals in layout order."""
        return np.cumsum(self.lengths.ravel())

    @property
    def covered(self) -> float:
        return float(self.lengths.sum())

    def level_mass(self, k: int) -> float:
        """|B_k(w)|, the total length of level k."""
        return float(self.lengths[k + 1].sum())

    def interval(self, k: int, g: int) -> tuple[float, float]:
        flat = (k + 1) * self.q + g
        hi = float(self.boundaries[flat])
        return hi - float(self.lengths[k + 1, g]), hi

    def split(self, flat: int) -> tuple[int, int]:
        """Flat interval index to (g, k)."""
        level, g = divmod(flat, self.q)
        return g, level - 1

    def locate(self, u: float) -> tuple[int, int] | None:
        """(g, k) with u in B_k(g|w), or None when u lies past the covered mass."""
        flat = int(np.searchsorted(self.boundaries, u, side="right"))
        if flat >= self.lengths.size:
            return None
        return self.split(flat)

    def last_nonempty(self) -> tuple[int, int]:
        nonzero = np.flatnonzero(self.lengths.ravel() > 0)
        return self.split(int(nonzero[-1]))


def build_layout(kernel: Kernel, past: Sequence[int], K: int) -> IntervalLayout:
    if K < 0:
        raise DomainError(f"truncation K must be >= 0, got {K}")
    inf = kernel.infimum()
    lower = np.vstack([np.full(kernel.q, inf), kernel.lower_levels(past, K)])
    lengths = np.diff(lower, axis=0, prepend=0.0)
    worst = float(lengths.min())
    if worst < -NEGATIVE_TOLERANCE:
        k, g = np.unravel_index(int(lengths.argmin()), lengths.shape)
        raise KernelInconsistencyError(
            f"{kernel.family} kernel gives b_{int(k) - 1}({int(g)}|w) = {worst:.3e} < 0"
        )
    lengths = np.clip(lengths, 0.0, None)
    return IntervalLayout(
        past=tuple(int(c) for c in past[:K]),
        lower=lower,
        lengths=lengths,
        a_seq=kernel.a_scalars(K),
        truncation=K,
    )


def locate(
    kernel: Kernel,
    past: Sequence[int],
    u: float,
    K: int = INITIAL_TRUNCATION,
    max_K: int = MAX_TRUNCATION,
) -> tuple[int, int, int]:
    """(g, k, K) for the uniform u, doubling the truncation K until u is covered.

    Once K reaches the kernel's memory (or max_K) a gap of at most 1e-12 left
    by rounding is absorbed by the last nonempty interval.
    """
    while True:
        layout = build_layout(kernel, past, K)
        hit = layout.locate(u)
        if hit is not None:
            return hit[0], hit[1], K
        complete = kernel.memory is not None and K >= kernel.memory
        if complete or K >= max_K:
            if 1.0 - layout.covered <= ONE_SLACK:
                g, k = layout.last_nonempty()
                return g, k, K
            raise CapacityError(
                f"u={u!r} beyond covered mass {layout.covered!r} at truncation K={K}"
            )
        logger.debug("Escalating layout truncation %d -> %d for u=%r", K, 2 * K, u)
        K = min(2 * K, max_K)
