from __future__ import annotations

import logging
from bisect import bisect_right
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field

import numpy as np
import numpy.typing as npt
from scipy import stats

from group_automata.errors import DomainError

from .kernels import Kernel
from .kernels import MarkovKernel
from .layout import INITIAL_TRUNCATION
from .layout import MAX_TRUNCATION
from .layout import build_layout
from .layout import locate
from .rng import uniforms

logger = logging.getLogger(__name__)

IntArray = npt.NDArray[np.int64]
FloatArray = npt.NDArray[np.float64]

DEFAULT_TAIL_TOLERANCE = 1e-6
MAX_CHECK_DEPTH = 4096


def _empty_int() -> IntArray:
    return np.zeros(0, dtype=np.int64)


def _empty_float() -> FloatArray:
    return np.zeros(0, dtype=np.float64)


@dataclass(frozen=True)
class RegenDetection:
    times: IntArray
    tolerances: FloatArray
    candidates: IntArray
    depth: int
    """Levels a_{-1}..a_{depth-1} were checked; beyond them a_k rounds to 1."""


@dataclass(frozen=True)
class RegenSample:
    w: tuple[int, ...]
    """Initial past as codes, newest first."""
    xs: IntArray
    us: FloatArray
    levels: IntArray
    """Level k of the interval each U_n fell into."""
    seed: int
    regens: IntArray = field(default_factory=_empty_int)
    tail_tolerance: FloatArray = field(default_factory=_empty_float)
    candidates: IntArray = field(default_factory=_empty_int)

    def __post_init__(self) -> None:
        logger.debug(
            "RegenSample created - N: %d, seed: %d, regenerations: %d, candidates: %d",
            len(self.xs),
            self.seed,
            len(self.regens),
            len(self.candidates),
        )

    @property
    def N(self) -> int:
        return len(self.xs)


@dataclass(frozen=True)
class Block:
    start: int
    symbols: IntArray

    @property
    def length(self) -> int:
        return len(self.symbols)


def check_levels(kernel: Kernel, limit: int = MAX_CHECK_DEPTH) -> FloatArray:
    """(a_{-1}, a_0, ..., a_{D-1}) with a_k equal to 1 for every k >= D, or D = limit."""
    stable = kernel.stable_index()
    depth = limit if stable is None else min(stable, limit)
    levels = [float(kernel.a_scalars(0)[0])]
    for k in range(depth):
        a = kernel.a_scalar(k)
        if a == 1.0:
            break
        levels.append(a)
    return np.asarray(levels)


def regeneration_rate(kernel: Kernel) -> float:
    """beta = a_{-1} a_0 a_1 ..., the density of regeneration times."""
    return float(np.prod(check_levels(kernel)))


def _finite_memory_path(
    kernel: Kernel, w: Sequence[int], us: FloatArray
) -> tuple[IntArray, IntArray]:
    q = kernel.q
    memory = kernel.memory or 0
    if isinstance(kernel, MarkovKernel):
        n_states = kernel.n_states
        pasts = [
            [int(c) for c in np.unravel_index(s, (q,) * memory)] for s in range(n_states)
        ]
        next_state = [[kernel.next_state(s, g) for g in range(q)] for s in range(n_states)]
        state = kernel.state_of(w)
    else:
        pasts = [[]]
        next_state = [[0] * q]
        state = 0
    cums: list[list[float]] = []
    fallback: list[int] = []
    for past in pasts:
        layout = build_layout(kernel, past, memory)
        cums.append(layout.boundaries.tolist())
        fallback.append(int(np.flatnonzero(layout.lengths.ravel() > 0)[-1]))
    xs = np.empty(len(us), dtype=np.int64)
    levels = np.empty(len(us), dtype=np.int64)
    for n, u in enumerate(us.tolist()):
        cum = cums[state]
        flat = bisect_right(cum, u)
        if flat >= len(cum):
            flat = fallback[state]
        level, g = divmod(flat, q)
        xs[n] = g
        levels[n] = level - 1
        state = next_state[state][g]
    return xs, levels


def _unbounded_memory_path(
    kernel: Kernel, w: Sequence[int], us: FloatArray
) -> tuple[IntArray, IntArray]:
    N = len(us)
    history = np.concatenate([np.asarray(w[::-1], dtype=np.int64), np.zeros(N, dtype=np.int64)])
    offset = len(w)
    levels = np.empty(N, dtype=np.int64)
    deepest = INITIAL_TRUNCATION
    for n, u in enumerate(us.tolist()):
        pos = offset + n
        past = history[max(0, pos - MAX_TRUNCATION) : pos][::-1]
        g, k, K = locate(kernel, past, u)
        deepest = max(deepest, K)
        history[pos] = g
        levels[n] = k
    if deepest > INITIAL_TRUNCATION:
        logger.debug("Path needed layout truncation up to K=%d", deepest)
    return history[offset:].copy(), levels


def draw_path(
    kernel: Kernel, w: Sequence[int], N: int, seed: int
) -> tuple[IntArray, FloatArray, IntArray]:
    """(xs, us, levels) of x_0..x_{N-1}, without looking for regenerations.

    x_0 uses the layout of w alone; x_n uses (x_{n-1}, ..., x_0, w).
    """
    if N < 1:
        raise DomainError(f"path length N must be >= 1, got {N}")
    w = [int(c) for c in w]
    if any(not 0 <= c < kernel.q for c in w):
        raise DomainError(f"past codes must lie in [0, {kernel.q})")
    us = uniforms(seed, N)
    if kernel.memory is not None:
        xs, levels = _finite_memory_path(kernel, w, us)
    else:
        xs, levels = _unbounded_memory_path(kernel, w, us)
    return xs, us, levels


def sample_path(
    kernel: Kernel,
    w: Sequence[int],
    N: int,
    seed: int,
    tail_tol: float = DEFAULT_TAIL_TOLERANCE,
) -> RegenSample:
    """Sample x_0..x_{N-1} from the past w by locating U_n in the interval layout."""
    logger.info("Sampling %s path - N: %d, seed: %d", kernel.family, N, seed)
    xs, us, levels = draw_path(kernel, w, N, seed)
    found = regeneration_times(us, kernel, tail_tol)
    return RegenSample(
        w=tuple(int(c) for c in w),
        xs=xs,
        us=us,
        levels=levels,
        seed=seed,
        regens=found.times,
        tail_tolerance=found.tolerances,
        candidates=found.candidates,
    )


def regeneration_times(
    us: FloatArray, kernel: Kernel, tail_tol: float = DEFAULT_TAIL_TOLERANCE
) -> RegenDetection:
    """Regeneration times read off a uniform sequence; see `detect_regenerations`."""
    if tail_tol <= 0:
        raise DomainError(f"tail tolerance must be positive, got {tail_tol}")
    N = len(us)
    levels = check_levels(kernel, min(MAX_CHECK_DEPTH, N))
    depth = len(levels) - 1
    ok = us <= levels[0]
    for j in range(1, min(depth, N - 1) + 1):
        ok[: N - j] &= us[j:] <= levels[j]
    tails = np.array([kernel.gamma_tail(k) for k in range(depth + 1)])
    unchecked_from = np.minimum(depth, N - 1 - np.arange(N))
    tolerances = tails[unchecked_from]
    certified = ok & (tolerances <= tail_tol)
    times = np.flatnonzero(certified)
    candidates = np.flatnonzero(ok & ~certified)
    logger.debug(
        "Detected %d regenerations and %d candidates (depth %d)",
        len(times),
        len(candidates),
        depth,
    )
    return RegenDetection(
        times=times,
        tolerances=tolerances[times],
        candidates=candidates,
        depth=depth,
    )


def detect_regenerations(
    sample: RegenSample, kernel: Kernel, tail_tol: float = DEFAULT_TAIL_TOLERANCE
) -> RegenDetection:
    """Times n with U_{n+j} <= a_{j-1} for every checkable j.

    The condition ranges over all j >= 0 and only j < N - n can be checked;
    the unchecked part is bounded by sum_{k >= N-n-1} gamma_k. Times whose bound
    exceeds `tail_tol` go to `candidates`. The result depends on the uniforms
    alone, never on the past w.
    """
    return regeneration_times(sample.us, kernel, tail_tol)


def regeneration_blocks(sample: RegenSample) -> list[Block]:
    """Blocks (x_{T_i}, ..., x_{T_{i+1}-1}) between consecutive regenerations."""
    times = sample.regens
    if len(times) < 2:
        return []
    return [
        Block(start=int(a), symbols=sample.xs[a:b])
        for a, b in zip(times[:-1].tolist(), times[1:].tolist())
    ]


def chi_square_uniformity(codes: Sequence[int] | IntArray, q: int) -> tuple[float, float]:
    """Chi-square statistic and p-value of the symbol counts against uniform on G."""
    counts = np.bincount(np.asarray(codes, dtype=np.int64), minlength=q)
    if counts.sum() == 0:
        raise DomainError("chi-square test needs at least one observation")
    result = stats.chisquare(counts)
    return float(result.statistic), float(result.pvalue)


def lag_one_correlation(
    lengths: Sequence[int] | IntArray, permutations: int = 200, seed: int = 0
) -> tuple[float, float]:
    """Lag-1 correlation of successive block lengths and its permutation spread.

    The spread is the standard deviation of the same statistic over random
    reorderings, so |r| <= 3 * spread is the no-dependence band.
    """
    arr = np.asarray(lengths, dtype=np.float64)
    if len(arr) < 3:
        raise DomainError(f"lag-1 correlation needs at least 3 blocks, got {len(arr)}")

    def corr(x: FloatArray) -> float:
        a, b = x[:-1], x[1:]
        if a.std() == 0 or b.std() == 0:
            return 0.0
        return float(np.corrcoef(a, b)[0, 1])

    rng = np.random.default_rng(seed)
    null = [corr(rng.permutation(arr)) for _ in range(permutations)]
    return corr(arr), float(np.std(null))
