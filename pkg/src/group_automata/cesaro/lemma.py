from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterable
from collections.abc import Mapping
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from group_automata.automaton.core import AutomatonParams
from group_automata.automaton.core import coefficients
from group_automata.chains.kernels import Kernel
from group_automata.chains.rng import child_seeds
from group_automata.chains.sampler import DEFAULT_TAIL_TOLERANCE
from group_automata.chains.sampler import check_levels
from group_automata.chains.sampler import draw_path
from group_automata.chains.sampler import regeneration_times
from group_automata.errors import CapacityError
from group_automata.errors import DomainError
from group_automata.errors import HypothesisViolationError
from group_automata.errors import IneligibleError
from group_automata.group.core import GroupSpec
from group_automata.group.core import is_prime
from group_automata.group.digits import digits_of
from group_automata.group.digits import in_r_double_prime
from group_automata.group.digits import in_r_prime
from group_automata.group.digits import log_log
from group_automata.group.digits import lucas_binomial
from group_automata.renewal.core import epsilon
from group_automata.renewal.laws import regeneration_law

from .output import Lemma41Report

logger = logging.getLogger(__name__)

IntArray = npt.NDArray[np.int64]

MAX_FAMILY_SIZE = 1 << 22


@dataclass(frozen=True)
class SumSpec:
    """S = sum_{r in R} a_r x_r over a finite increasing index sequence R."""

    R: tuple[int, ...]
    coeffs: tuple[int, ...]
    spec: GroupSpec

    def __post_init__(self) -> None:
        object.__setattr__(self, "R", tuple(int(r) for r in self.R))
        object.__setattr__(self, "coeffs", tuple(int(a) for a in self.coeffs))
        if len(self.R) != len(self.coeffs):
            raise DomainError(f"{len(self.R)} indices for {len(self.coeffs)} coefficients")
        if any(r < 0 for r in self.R) or any(b <= a for a, b in zip(self.R, self.R[1:])):
            raise DomainError("R must be strictly increasing and nonnegative")

    @classmethod
    def automaton(cls, m: int, params: AutomatonParams) -> SumSpec:
        """(phi^m x)_0 = sum_{k <= m} c_k x_k."""
        return cls(R=tuple(range(m + 1)), coeffs=coefficients(m, params).coeffs, spec=params.spec)

    @property
    def r_star(self) -> tuple[int, ...]:
        """Indices whose coefficient is a unit mod p."""
        return tuple(r for r, a in zip(self.R, self.coeffs) if a % self.spec.p)

    @property
    def n_star(self) -> int:
        return len(self.r_star)

    def coefficient(self, r: int) -> int:
        """a_r, zero off R."""
        try:
            return self.coeffs[self.R.index(r)]
        except ValueError:
            return 0


def validate_family(sums: Sequence[SumSpec], family: Sequence[Iterable[int]]) -> None:
    """Check (H1), (H2), (H3) for index sets family[j] against sums[j]."""
    if len(sums) != len(family):
        raise DomainError(f"{len(family)} index sets for {len(sums)} sums")
    sets = [set(f) for f in family]
    for j, (s, chosen) in enumerate(zip(sums, sets)):
        units = set(s.r_star)
        outside = sorted(chosen - units)
        if outside:
            raise HypothesisViolationError("H1", (j, outside[0]), "index is not a unit position")
    for i, j in itertools.combinations(range(len(sets)), 2):
        common = sets[i] & sets[j]
        if common:
            raise HypothesisViolationError("H2", (i, j), f"sets share index {min(common)}")
    for j, chosen in enumerate(sets):
        for i in range(j):
            p = sums[i].spec.p
            for r in sorted(chosen & set(sums[i].R)):
                if sums[i].coefficient(r) % p:
                    raise HypothesisViolationError(
                        "H3", (i, j), f"a_{r} of sum {i} is a unit mod {p}"
                    )


def validate_rtilde(m: int, J: Sequence[int], family: Mapping[int, Iterable[int]], p: int) -> None:
    """(H1), (H2), (H3) for the sums (phi^{m+j} x)_0, decided by Lucas' theorem alone."""
    J = sorted(J)
    sets = {j: set(family[j]) for j in J}
    for j in J:
        for k in sorted(sets[j]):
            if k > m + j or lucas_binomial(m + j, k, p) == 0:
                raise HypothesisViolationError("H1", (j, k), f"C({m + j}, {k}) = 0 mod {p}")
    for i, j in itertools.combinations(J, 2):
        common = sets[i] & sets[j]
        if common:
            raise HypothesisViolationError("H2", (i, j), f"sets share index {min(common)}")
    for j in J:
        for i in (i for i in J if i < j):
            for k in sorted(sets[j]):
                if lucas_binomial(m + i, k, p) != 0:
                    raise HypothesisViolationError(
                        "H3", (i, j), f"C({m + i}, {k}) != 0 mod {p} for k in R~^{j}"
                    )


@dataclass(frozen=True)
class RtildeFamily:
    m: int
    J: tuple[int, ...]
    p: int
    M: int
    cut: int
    """Positions n <= cut are the pinned low digits."""
    sets: dict[int, IntArray]
    threshold: float
    """2^(eps' loglog M), the size every set must reach."""

    @property
    def n_tilde(self) -> int:
        return min(len(s) for s in self.sets.values())


def build_Rtilde(
    m: int,
    J: Sequence[int],
    p: int,
    M: int,
    eps: float,
    eps_prime: float,
    alpha: float | None = None,
) -> RtildeFamily:
    """Index sets R~^j, j in J, for the sums (phi^{m+j} x)_0.

    R~^j holds the k whose digits above eps loglog M range over [0, m_i] on
    the support of m and whose digits at or below it equal those of m + j.
    Requires m + j in R'_M and R''_M (with ell = max J) and that adding j
    never carries above the pinned digits.
    """
    if not is_prime(p):
        raise DomainError(f"p={p} is not prime")
    J = tuple(sorted(set(J)))
    if not J or J[0] < 0:
        raise DomainError(f"J must be a nonempty set of nonnegative integers, got {J}")
    if alpha is not None and not (0 < eps < alpha < 0.5 and 0 < eps_prime < (alpha - eps) / 2):
        raise DomainError(
            f"need 0 < eps < alpha < 1/2 and 0 < eps' < (alpha - eps)/2, "
            f"got alpha={alpha}, eps={eps}, eps'={eps_prime}"
        )
    ll = log_log(M, p)
    ell = J[-1]
    for j in J:
        if m < 0 or m + j > M:
            raise IneligibleError(m, f"m+{j} <= M={M}")
        if not in_r_prime(m + j, M, ell, eps, p):
            raise IneligibleError(m, f"R'_M at m+{j}")
        if not in_r_double_prime(m + j, M, eps, eps_prime, p):
            raise IneligibleError(m, f"R''_M at m+{j}")
    cut = math.floor(eps * ll)
    block = p ** (cut + 1)
    for j in J:
        if (m + j) // block != m // block:
            raise IneligibleError(m, f"no carry above digit {cut} when adding {j}")

    high = [(i, d) for i, d in enumerate(digits_of(m, p)) if i > cut and d]
    size = math.prod(d + 1 for _, d in high)
    if size > MAX_FAMILY_SIZE:
        raise CapacityError(f"|R~^j| = {size} exceeds cap {MAX_FAMILY_SIZE}")
    upper = np.zeros(1, dtype=np.int64)
    for i, d in high:
        upper = (upper[:, None] + np.arange(d + 1, dtype=np.int64)[None, :] * p**i).ravel()
    upper.sort()
    threshold = 2.0 ** (eps_prime * ll)
    if size < threshold:
        raise IneligibleError(m, f"|R~^j| = {size} >= 2^(eps' loglog M) = {threshold:.3f}")
    sets = {j: upper + (m + j) % block for j in J}
    logger.debug("R~ for m=%d J=%s p=%d: %d indices per set, cut %d", m, J, p, size, cut)
    return RtildeFamily(m=m, J=J, p=p, M=M, cut=cut, sets=sets, threshold=threshold)


def _cells(
    sums: Sequence[SumSpec], paths: IntArray, spec: GroupSpec
) -> IntArray:
    """Joint cell code of (S_0, ..., S_{|J|-1}) for every path row."""
    coords = spec.coords_table[paths]
    codes = np.zeros(len(paths), dtype=np.int64)
    for s in sums:
        idx = np.asarray(s.R, dtype=np.int64)
        a = np.asarray(s.coeffs, dtype=np.int64)
        value = np.einsum("r,brd->bd", a, coords[:, idx, :]) % spec.moduli_array
        codes = codes * spec.q + spec.encode(value)
    return codes


def lemma41_diagnostic(
    sums: SumSpec | Sequence[SumSpec],
    kernel: Kernel,
    w: Sequence[int],
    trials: int,
    seed: int,
    family: Sequence[Iterable[int]] | None = None,
    tail_tol: float = DEFAULT_TAIL_TOLERANCE,
) -> Lemma41Report:
    """Monte Carlo sup-deviation of the law of the sums from uniform.

    One sum is compared with 2 eps(n* + 1); several sums need an (H1)-(H3)
    family and are compared jointly with 2 |J| eps(n~ + 1).
    """
    group = [sums] if isinstance(sums, SumSpec) else list(sums)
    if not group:
        raise DomainError("need at least one sum")
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    spec = kernel.spec
    joint = len(group) > 1
    if joint:
        if family is None:
            raise DomainError("a joint diagnostic needs an index family R~")
        validate_family(group, family)
        chosen = [set(f) for f in family]
        n_star = min(len(f) for f in chosen)
    else:
        chosen = [set(group[0].r_star)]
        n_star = group[0].n_star

    cells = spec.q ** len(group)
    span = max((s.R[-1] for s in group if s.R), default=0) + 1
    extra = len(check_levels(kernel)) + 1
    paths = np.empty((trials, span), dtype=np.int64)
    missed = 0
    for t, child in enumerate(child_seeds(seed, trials)):
        xs, us, _ = draw_path(kernel, w, span + extra, child)
        paths[t] = xs[:span]
        regens = set(regeneration_times(us, kernel, tail_tol).times.tolist())
        missed += any(not (regens & units) for units in chosen)

    counts = np.bincount(_cells(group, paths, spec), minlength=cells)
    freq = counts / trials
    worst = int(np.argmax(np.abs(freq - 1.0 / cells)))
    deviation = float(abs(freq[worst] - 1.0 / cells))
    stderr = float(np.sqrt(max(freq[worst] * (1 - freq[worst]), 1.0 / trials) / trials))

    if n_star == 0:
        bound = 1.0
    else:
        eps = epsilon(regeneration_law(kernel), n_star + 1)
        bound = min(1.0, 2 * len(group) * eps)
    vacuous = n_star == 0 or bound >= 1.0 - 1.0 / cells
    logger.info(
        "Lemma diagnostic - n*: %d, deviation: %.5f +- %.5f, bound: %.5f%s",
        n_star,
        deviation,
        stderr,
        bound,
        " (vacuous)" if vacuous else "",
    )
    return Lemma41Report(
        joint=joint,
        n_star=n_star,
        cells=cells,
        deviation=deviation,
        stderr=stderr,
        bound=bound,
        vacuous=vacuous,
        miss_fraction=missed / trials,
        trials=trials,
    )
