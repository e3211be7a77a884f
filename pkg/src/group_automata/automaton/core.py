from __future__ import annotations

import logging
from collections.abc import Iterator
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from group_automata.errors import DomainError
from group_automata.group.core import GroupElement
from group_automata.group.core import GroupSpec
from group_automata.group.core import is_unit_scalar
from group_automata.group.digits import lucas_binomial

logger = logging.getLogger(__name__)

IntArray = npt.NDArray[np.int64]


@dataclass(frozen=True)
class AutomatonParams:
    """The rule (phi x)_n = mu x_n + nu x_{n+1} over `spec`.

    mu and nu must be prime to p. `exploratory=True` lets other values through
    with a warning; nothing about the Cesaro limit is promised for them.
    """

    mu: int
    nu: int
    spec: GroupSpec
    exploratory: bool = False

    def __post_init__(self) -> None:
        bad = [
            name
            for name, value in (("mu", self.mu), ("nu", self.nu))
            if not is_unit_scalar(value, self.spec)
        ]
        if not bad:
            return
        message = f"{' and '.join(bad)} not prime to p={self.spec.p} (mu={self.mu}, nu={self.nu})"
        if not self.exploratory:
            raise DomainError(message)
        logger.warning("Exploratory automaton: %s", message)

    @property
    def modulus(self) -> int:
        return self.spec.exponent_modulus


@dataclass(frozen=True)
class Word:
    """A finite window x_start, ..., x_{start+len-1} of a configuration."""

    start: int
    elems: tuple[GroupElement, ...]

    def __post_init__(self) -> None:
        if not self.elems:
            raise DomainError("a word needs at least one element")
        object.__setattr__(self, "elems", tuple(self.elems))

    def __len__(self) -> int:
        return len(self.elems)

    def __getitem__(self, i: int) -> GroupElement:
        """Element at absolute site index i."""
        offset = i - self.start
        if not 0 <= offset < len(self.elems):
            raise DomainError(
                f"site {i} outside window [{self.start}, {self.start + len(self)})"
            )
        return self.elems[offset]

    @classmethod
    def from_coords(cls, start: int, coords: IntArray) -> Word:
        return cls(
            start=start,
            elems=tuple(GroupElement(tuple(int(c) for c in row)) for row in coords),
        )

    @classmethod
    def from_codes(cls, start: int, codes: Sequence[int], spec: GroupSpec) -> Word:
        return cls.from_coords(start, spec.coords_table[np.asarray(codes, dtype=np.int64)])

    def coords(self, spec: GroupSpec) -> IntArray:
        for g in self.elems:
            spec.check(g)
        return np.array([g.coords for g in self.elems], dtype=np.int64)


@dataclass(frozen=True)
class CoeffVector:
    """c_k = C(m, k) mu^(m-k) nu^k mod p^r for k = 0..m, with unit flags."""

    m: int
    coeffs: tuple[int, ...]
    units: tuple[bool, ...]
    modulus: int

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.m + 1 or len(self.units) != self.m + 1:
            raise DomainError(f"coefficient vector for m={self.m} needs m+1 entries")


def _step_coords(coords: IntArray, params: AutomatonParams) -> IntArray:
    mu = params.mu % params.modulus
    nu = params.nu % params.modulus
    return (mu * coords[:-1] + nu * coords[1:]) % params.spec.moduli_array


def step(w: Word, params: AutomatonParams) -> Word:
    if len(w) < 2:
        raise DomainError(f"step needs a window of length >= 2, got {len(w)}")
    return Word.from_coords(w.start, _step_coords(w.coords(params.spec), params))


def iterate(w: Word, m: int, params: AutomatonParams) -> Word:
    if m < 0:
        raise DomainError(f"iterate needs m >= 0, got {m}")
    if len(w) < m + 1:
        raise DomainError(f"iterating {m} times needs a window of length >= {m + 1}")
    coords = w.coords(params.spec)
    for _ in range(m):
        coords = _step_coords(coords, params)
    return Word.from_coords(w.start, coords)


def coefficients(m: int, params: AutomatonParams) -> CoeffVector:
    """Closed-form coefficients of phi^m, exact binomials reduced mod p^r."""
    if m < 0:
        raise DomainError(f"coefficients need m >= 0, got {m}")
    mod = params.modulus
    mu = params.mu % mod
    nu = params.nu % mod
    binom = 1
    coeffs: list[int] = []
    for k in range(m + 1):
        coeffs.append(binom % mod * pow(mu, m - k, mod) * pow(nu, k, mod) % mod)
        binom = binom * (m - k) // (k + 1)
    units = tuple(lucas_binomial(m, k, params.spec.p) != 0 for k in range(m + 1))
    return CoeffVector(m=m, coeffs=tuple(coeffs), units=units, modulus=mod)


def pascal_rows(params: AutomatonParams, m_max: int) -> Iterator[IntArray]:
    """Rows c^(0), ..., c^(m_max) by the recurrence c^(m)_k = mu c^(m-1)_k + nu c^(m-1)_{k-1}."""
    mod = params.modulus
    mu = params.mu % mod
    nu = params.nu % mod
    row = np.ones(1, dtype=np.int64)
    yield row
    for _ in range(m_max):
        nxt = np.zeros(len(row) + 1, dtype=np.int64)
        nxt[:-1] += mu * row
        nxt[1:] += nu * row
        row = nxt % mod
        yield row


def coefficient_columns(params: AutomatonParams, length: int) -> Iterator[IntArray]:
    """Columns of the coefficient triangle: the k-th yield is (c^(m)_k : m < length).

    With mu invertible mod p^r the column recurrence becomes a cumulative sum
    after scaling by mu^-m; otherwise it is run site by site.
    """
    mod = params.modulus
    mu = params.mu % mod
    nu = params.nu % mod
    m = np.arange(length, dtype=np.int64)
    mu_pow = np.array([pow(mu, int(i), mod) for i in m], dtype=np.int64)
    if is_unit_scalar(mu, params.spec):
        ratio = nu * pow(mu, -1, mod) % mod
        scaled = np.ones(length, dtype=np.int64)
        for _ in range(length):
            yield scaled * mu_pow % mod
            shifted = np.concatenate(([0], np.cumsum(scaled)[:-1] % mod))
            scaled = ratio * shifted % mod
    else:
        col = mu_pow.copy()
        for _ in range(length):
            yield col
            nxt = np.zeros(length, dtype=np.int64)
            for i in range(1, length):
                nxt[i] = (mu * nxt[i - 1] + nu * col[i - 1]) % mod
            col = nxt


def apply_closed_form(w: Word, m: int, i: int, params: AutomatonParams) -> GroupElement:
    """(phi^m x)_i = sum_k c_k x_{i+k}, evaluated on the window."""
    if i < w.start or i + m >= w.start + len(w):
        raise DomainError(
            f"closed form at site {i} with m={m} needs sites {i}..{i + m}, "
            f"window covers {w.start}..{w.start + len(w) - 1}"
        )
    coeffs = np.asarray(coefficients(m, params).coeffs, dtype=np.int64)
    offset = i - w.start
    window = w.coords(params.spec)[offset : offset + m + 1]
    value = (coeffs[:, None] * window).sum(axis=0) % params.spec.moduli_array
    return GroupElement(tuple(int(c) for c in value))


def closed_form_batch(
    coords: IntArray, row: IntArray, spec: GroupSpec, offset: int = 0
) -> IntArray:
    """sum_k row[k] x_{offset+k} for a batch of paths, coords of shape (batch, L, d)."""
    span = coords[:, offset : offset + len(row), :]
    if span.shape[1] != len(row):
        raise DomainError(f"paths of length {coords.shape[1]} too short for {len(row)} terms")
    return np.einsum("k,bkd->bd", row, span) % spec.moduli_array
