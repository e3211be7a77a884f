from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from group_automata.automaton.core import AutomatonParams
from group_automata.automaton.core import closed_form_batch
from group_automata.automaton.core import pascal_rows
from group_automata.chains.kernels import Kernel
from group_automata.chains.kernels import MixtureKernel
from group_automata.chains.rng import child_seeds
from group_automata.chains.sampler import draw_path
from group_automata.errors import CapacityError
from group_automata.errors import ConfigError
from group_automata.errors import DomainError

from .exact import marginal_laws
from .output import CesaroReport
from .output import CrossCheckReport
from .output import Mode

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

DEFAULT_TRIALS = 2000
MAX_MC_SITES = 1 << 26
"""Cap on trials x sites for the sampled automaton values."""
MAX_MC_CELLS = 1 << 24
"""Cap on trials x grid points x cylinders for the running counts."""


def dyadic_grid(top: int) -> list[int]:
    """1, 2, 4, ..., 2^top."""
    if top < 0:
        raise DomainError(f"grid exponent must be >= 0, got {top}")
    return [1 << t for t in range(top + 1)]


def _check_grid(grid: Sequence[int]) -> list[int]:
    grid = [int(M) for M in grid]
    if not grid or grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError(f"M grid must be strictly increasing positive integers, got {grid}")
    return grid


def _check_sites(J: Sequence[int]) -> tuple[int, ...]:
    J = tuple(sorted(set(int(j) for j in J)))
    if not J or J[0] < 0:
        raise DomainError(f"J must be a nonempty set of nonnegative sites, got {J}")
    return J


def site_zero_values(
    kernel: Kernel,
    w: Sequence[int],
    n_times: int,
    params: AutomatonParams,
    trials: int,
    seed: int,
) -> IntArray:
    """Codes of (phi^n x)_0 for n < n_times, one row per sampled path."""
    spec = kernel.spec
    paths = np.empty((trials, n_times), dtype=np.int64)
    logger.debug("Drawing %d %s paths of length %d", trials, kernel.family, n_times)
    for t, child in enumerate(child_seeds(seed, trials)):
        paths[t] = draw_path(kernel, w, n_times, child)[0]
    coords = spec.coords_table[paths]
    values = np.empty((trials, n_times), dtype=np.int64)
    for n, row in enumerate(pascal_rows(params, n_times - 1)):
        values[:, n] = spec.encode(closed_form_batch(coords, row, spec))
    return values


def _mc_averages(
    kernel: Kernel,
    w: Sequence[int],
    J: tuple[int, ...],
    grid: list[int],
    params: AutomatonParams,
    trials: int,
    seed: int,
) -> tuple[FloatArray, FloatArray]:
    q = kernel.q
    cells = q ** len(J)
    top = grid[-1]
    if trials * (top + J[-1]) > MAX_MC_SITES:
        raise CapacityError(f"{trials} trials x {top + J[-1]} sites exceeds {MAX_MC_SITES}")
    if trials * len(grid) * cells > MAX_MC_CELLS:
        raise CapacityError(
            f"{trials} trials x {len(grid)} grid points x {cells} cells exceeds {MAX_MC_CELLS}"
        )
    values = site_zero_values(kernel, w, top + J[-1], params, trials, seed)
    joint = np.zeros((trials, top), dtype=np.int64)
    for j in J:
        joint = joint * q + values[:, j : j + top]
    # bucket b holds the m with grid[b-1] <= m < grid[b]
    bounds = np.asarray(grid, dtype=np.int64)
    bucket = np.searchsorted(bounds, np.arange(top), side="right")
    n_buckets = len(grid)
    flat = (np.arange(trials)[:, None] * n_buckets + bucket[None, :]) * cells + joint
    counts = np.bincount(flat.ravel(), minlength=trials * n_buckets * cells)
    running = np.cumsum(counts.reshape(trials, n_buckets, cells), axis=1)
    per_trial = running / bounds.astype(np.float64)[None, :, None]
    averages = per_trial.mean(axis=0)
    stderr = per_trial.std(axis=0, ddof=1) / np.sqrt(trials)
    return averages, stderr


def cesaro_scan(
    kernel: Kernel,
    w: Sequence[int],
    J: Sequence[int],
    M_grid: Sequence[int],
    params: AutomatonParams,
    mode: Mode = Mode.EXACT,
    seed: int = 0,
    g_values: Sequence[int] | None = None,
    trials: int = DEFAULT_TRIALS,
) -> CesaroReport:
    """Running averages (1/M) sum_{m<M} P_w{(phi^{m+j} x)_0 = g_j, j in J} over the grid.

    Exact mode accumulates the per-m laws of `marginal_laws`; Monte Carlo
    samples paths, applies the automaton and averages cylinder indicators.
    """
    J = _check_sites(J)
    grid = _check_grid(M_grid)
    if g_values is not None:
        g_values = tuple(int(g) for g in g_values)
        if len(g_values) != len(J) or any(not 0 <= g < kernel.q for g in g_values):
            raise DomainError(f"g values {g_values} do not name a cylinder over J={J}")
    if params.spec != kernel.spec:
        raise ConfigError(f"automaton group {params.spec} differs from kernel group {kernel.spec}")
    logger.info(
        "Cesaro scan - mode: %s, kernel: %s, J: %s, M up to %d",
        mode.value,
        kernel.family,
        J,
        grid[-1],
    )
    match mode:
        case Mode.EXACT:
            if isinstance(kernel, MixtureKernel):
                raise ConfigError(
                    "exact mode needs a product or Markov kernel; use mode = mc for mixtures"
                )
            laws = marginal_laws(kernel, J, grid[-1], params, w)
            running = np.cumsum(laws, axis=0)[np.asarray(grid) - 1]
            averages = running / np.asarray(grid, dtype=np.float64)[:, None]
            stderr = None
        case Mode.MC:
            if trials < 2:
                raise DomainError(f"Monte Carlo needs at least 2 trials, got {trials}")
            averages, stderr = _mc_averages(kernel, w, J, grid, params, trials, seed)
    report = CesaroReport.from_averages(mode, kernel.q, J, grid, averages, stderr, g_values)
    for M, tv in zip(report.grid, report.tv):
        logger.debug("Cesaro M=%d tv=%.6g", M, tv)
    logger.info("Cesaro scan complete - final tv: %.6g", report.tv[-1])
    return report


def cross_check(
    kernel: Kernel,
    w: Sequence[int],
    J: Sequence[int],
    M_grid: Sequence[int],
    params: AutomatonParams,
    seed: int = 0,
    trials: int = DEFAULT_TRIALS,
    threshold: float = 4.0,
) -> CrossCheckReport:
    """Compare Monte Carlo and exact averages cell by cell in units of the MC error."""
    exact = cesaro_scan(kernel, w, J, M_grid, params, Mode.EXACT)
    mc = cesaro_scan(kernel, w, J, M_grid, params, Mode.MC, seed=seed, trials=trials)
    want = np.array([p.table.probabilities for p in exact.points])
    got = np.array([p.table.probabilities for p in mc.points])
    sigma = np.maximum(np.array([p.stderr for p in mc.points]), 1.0 / trials)
    delta = np.abs(got - want)
    report = CrossCheckReport(
        cells=int(delta.size),
        max_abs_delta=float(delta.max()),
        max_sigma=float((delta / sigma).max()),
        threshold=threshold,
    )
    logger.info(
        "Cross-check - max |delta|: %.3g, max sigma: %.2f, passed: %s",
        report.max_abs_delta,
        report.max_sigma,
        report.passed,
    )
    return report
