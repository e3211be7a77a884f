"""Base-p digit machinery: Lucas binomials, p-expansions and density-one sets."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from group_automata.errors import CapacityError
from group_automata.errors import DomainError

from .core import is_prime

logger = logging.getLogger(__name__)

MAX_DENSITY_M = 1 << 26


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise DomainError(f"p={p} is not prime")


def digits_of(m: int, p: int) -> list[int]:
    """Base-p digits of m, least significant first; empty for m = 0."""
    if m < 0:
        raise DomainError(f"p-expansion needs m >= 0, got {m}")
    out: list[int] = []
    while m:
        m, d = divmod(m, p)
        out.append(d)
    return out


@dataclass(frozen=True)
class PExpansion:
    m: int
    p: int
    digits: tuple[int, ...]

    @property
    def support(self) -> frozenset[int]:
        """I(m), the positions of the nonzero digits."""
        return frozenset(i for i, d in enumerate(self.digits) if d)

    @property
    def deltas(self) -> tuple[int, ...]:
        return tuple(sorted(self.support, reverse=True))

    @property
    def s(self) -> int:
        return len(self.support)

    @property
    def leading_digits(self) -> tuple[int, ...]:
        """m^{(i)}: the digit sitting at delta_i, in the same order as `deltas`."""
        return tuple(self.digits[i] for i in self.deltas)

    def digit(self, i: int) -> int:
        return self.digits[i] if 0 <= i < len(self.digits) else 0

    def value(self) -> int:
        return sum(d * self.p**i for i, d in enumerate(self.digits))


def p_expansion(m: int, p: int) -> PExpansion:
    _check_prime(p)
    return PExpansion(m=m, p=p, digits=tuple(digits_of(m, p)))


def lucas_binomial(m: int, k: int, p: int) -> int:
    """(m choose k) mod p as the product of digitwise binomials.

    >>> lucas_binomial(5, 2, 2)
    0
    >>> lucas_binomial(10, 1, 3)
    1
    """
    _check_prime(p)
    if m < 0 or k < 0:
        raise DomainError(f"lucas_binomial needs m, k >= 0, got {m}, {k}")
    result = 1
    while m or k:
        m, mi = divmod(m, p)
        k, ki = divmod(k, p)
        if ki > mi:
            return 0
        result = result * math.comb(mi, ki) % p
    return result


def log_log(M: int, p: int) -> float:
    """log_p log_p M, the scale every density-one threshold is measured in."""
    if M < 16:
        raise DomainError(f"density sets need M >= 16, got {M}")
    inner = math.log(M, p)
    if inner <= 1:
        raise DomainError(f"log_p log_p M is not positive for M={M}, p={p}")
    return math.log(inner, p)


def _digit_matrix(M: int, p: int) -> npt.NDArray[np.int64]:
    if M + 1 > MAX_DENSITY_M:
        raise CapacityError(f"M={M} exceeds the enumeration cap {MAX_DENSITY_M}")
    width = max(1, len(digits_of(M, p)))
    m = np.arange(M + 1, dtype=np.int64)
    out = np.empty((M + 1, width), dtype=np.int64)
    for i in range(width):
        m, out[:, i] = np.divmod(m, p)
    return out


def density_set(M: int, alpha: float, p: int) -> tuple[int, float]:
    """Size and density of R_M = {m <= M : |I(m)| >= alpha log_p log_p M}."""
    _check_prime(p)
    threshold = alpha * log_log(M, p)
    support_sizes = (_digit_matrix(M, p) != 0).sum(axis=1)
    count = int((support_sizes >= threshold).sum())
    logger.debug("R_M for M=%d alpha=%s p=%d: %d members", M, alpha, p, count)
    return count, count / M


def _r_prime_index(ell: int, p: int) -> tuple[float, int]:
    level = math.log(2 * (ell + 1), p)
    return level, max(1, math.floor(level))


def _check_prime_params(M: int, ell: int, eps: float, eps_prime: float) -> None:
    if ell < 0:
        raise DomainError(f"ell must be >= 0, got {ell}")
    if not 0 < eps < 0.5:
        raise DomainError(f"eps must lie in (0, 1/2), got {eps}")
    if eps_prime <= 0:
        raise DomainError(f"eps_prime must be positive, got {eps_prime}")


def density_sets_prime(
    M: int, ell: int, eps: float, eps_prime: float, p: int
) -> tuple[int, int]:
    """Exact sizes of R'_M and R''_M by enumerating the digits of every m <= M.

    R'_M  = {m : G_m >= log(2(ell+1)), beta_{[log 2(ell+1)], m} <= eps loglog M}
    R''_M = {m : delta_{1,m} > eps loglog M,
             |I(m) cap [eps loglog M, delta_{1,m}]| >= eps' loglog M}

    where G_m counts the positions n <= delta_{1,m} with m_n < p - 1 and
    beta_{t,m} is the t-th smallest of them.
    """
    _check_prime(p)
    _check_prime_params(M, ell, eps, eps_prime)
    ll = log_log(M, p)
    digits = _digit_matrix(M, p)
    positions = np.arange(digits.shape[1])

    nonzero = digits != 0
    has_top = nonzero.any(axis=1)
    top = np.where(has_top, digits.shape[1] - 1 - np.argmax(nonzero[:, ::-1], axis=1), -1)
    below_top = positions[None, :] <= top[:, None]

    level, t = _r_prime_index(ell, p)
    room = below_top & (digits < p - 1)
    g_m = room.sum(axis=1)
    reached = np.cumsum(room, axis=1) >= t
    beta_t = np.where(g_m >= t, np.argmax(reached, axis=1), np.iinfo(np.int64).max)
    in_prime = (g_m >= level) & (g_m >= t) & (beta_t <= eps * ll)

    window = (positions[None, :] >= eps * ll) & below_top
    upper_support = (nonzero & window).sum(axis=1)
    in_double = (top > eps * ll) & (upper_support >= eps_prime * ll)

    return int(in_prime.sum()), int(in_double.sum())


def in_r(m: int, M: int, alpha: float, p: int) -> bool:
    return 0 <= m <= M and p_expansion(m, p).s >= alpha * log_log(M, p)


def in_r_prime(m: int, M: int, ell: int, eps: float, p: int) -> bool:
    _check_prime_params(M, ell, eps, 1.0)
    if not 0 <= m <= M:
        return False
    ll = log_log(M, p)
    exp = p_expansion(m, p)
    if not exp.digits:
        return False
    level, t = _r_prime_index(ell, p)
    room = [n for n in range(len(exp.digits)) if exp.digits[n] < p - 1]
    return len(room) >= level and len(room) >= t and room[t - 1] <= eps * ll


def in_r_double_prime(m: int, M: int, eps: float, eps_prime: float, p: int) -> bool:
    _check_prime_params(M, 0, eps, eps_prime)
    if not 0 <= m <= M:
        return False
    ll = log_log(M, p)
    exp = p_expansion(m, p)
    if not exp.digits:
        return False
    top = exp.deltas[0]
    upper = [i for i in exp.support if eps * ll <= i <= top]
    return top > eps * ll and len(upper) >= eps_prime * ll
