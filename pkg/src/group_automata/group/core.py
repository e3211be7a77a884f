from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import numpy.typing as npt

from group_automata.errors import DomainError
from group_automata.errors import StructuralError

logger = logging.getLogger(__name__)

IntArray = npt.NDArray[np.int64]


def is_prime(n: int) -> bool:
    """Trial division primality test.

    >>> [k for k in range(20) if is_prime(k)]
    [2, 3, 5, 7, 11, 13, 17, 19]
    """
    if n < 2:
        return False
    for d in range(2, math.isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


@dataclass(frozen=True)
class GroupElement:
    coords: tuple[int, ...]

    def __str__(self) -> str:
        return "(" + ",".join(str(c) for c in self.coords) + ")"


@dataclass(frozen=True)
class GroupSpec:
    """A finite abelian p-group written as a product of cyclic p-power groups.

    G = Z_{p^e_1} x ... x Z_{p^e_d}. Elements are also addressed by an integer
    code in [0, q), the mixed-radix index of their coordinates (last
    coordinate least significant), which is the order `elements()` enumerates
    them in and the order every probability vector over G uses.
    """

    p: int
    exponents: tuple[int, ...]

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise DomainError(f"p={self.p} is not prime")
        if len(self.exponents) < 1:
            raise DomainError("a group needs at least one cyclic factor")
        if any(e < 1 for e in self.exponents):
            raise DomainError(f"exponents must be >= 1, got {self.exponents}")
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))

    @classmethod
    def cyclic(cls, p: int, e: int = 1) -> GroupSpec:
        return cls(p=p, exponents=(e,))

    def __str__(self) -> str:
        return " x ".join(f"Z_{m}" for m in self.moduli)

    @property
    def d(self) -> int:
        return len(self.exponents)

    @cached_property
    def moduli(self) -> tuple[int, ...]:
        return tuple(self.p**e for e in self.exponents)

    @cached_property
    def q(self) -> int:
        return self.p ** sum(self.exponents)

    @cached_property
    def r(self) -> int:
        return max(self.exponents)

    @cached_property
    def exponent_modulus(self) -> int:
        """p^r; every g satisfies p^r g = 0, so scalars live in Z_{p^r}."""
        return self.p**self.r

    @property
    def zero(self) -> GroupElement:
        return GroupElement((0,) * self.d)

    def element(self, *coords: int) -> GroupElement:
        if len(coords) != self.d:
            raise StructuralError(f"expected {self.d} coordinates, got {len(coords)}")
        return GroupElement(tuple(c % m for c, m in zip(coords, self.moduli)))

    def check(self, g: GroupElement) -> None:
        if len(g.coords) != self.d:
            raise StructuralError(
                f"element {g} has {len(g.coords)} coordinates, group {self} has {self.d}"
            )
        for c, m in zip(g.coords, self.moduli):
            if not 0 <= c < m:
                raise DomainError(f"coordinate {c} of {g} outside [0, {m})")

    def elements(self) -> Iterator[GroupElement]:
        for coords in itertools.product(*(range(m) for m in self.moduli)):
            yield GroupElement(coords)

    def code(self, g: GroupElement) -> int:
        self.check(g)
        return int(np.ravel_multi_index(g.coords, self.moduli))

    def from_code(self, code: int) -> GroupElement:
        if not 0 <= code < self.q:
            raise DomainError(f"code {code} outside [0, {self.q})")
        return GroupElement(tuple(int(c) for c in np.unravel_index(code, self.moduli)))

    @cached_property
    def coords_table(self) -> IntArray:
        """Row `code` holds the coordinates of that element, shape (q, d)."""
        idx = np.unravel_index(np.arange(self.q), self.moduli)
        return np.stack(idx, axis=1).astype(np.int64)

    @cached_property
    def moduli_array(self) -> IntArray:
        return np.asarray(self.moduli, dtype=np.int64)

    def encode(self, coords: IntArray) -> IntArray:
        """Codes of a (..., d) coordinate array."""
        coords = np.asarray(coords, dtype=np.int64) % self.moduli_array
        return np.ravel_multi_index(
            tuple(np.moveaxis(coords, -1, 0)), self.moduli
        ).astype(np.int64)

    @cached_property
    def add_table(self) -> IntArray:
        c = self.coords_table
        return self.encode(c[:, None, :] + c[None, :, :])

    @cached_property
    def neg_table(self) -> IntArray:
        return self.encode(-self.coords_table)

    @cached_property
    def mul_table(self) -> IntArray:
        """mul_table[a, code] = code of a.g for scalar residues a in [0, p^r)."""
        a = np.arange(self.exponent_modulus, dtype=np.int64)
        return self.encode(a[:, None, None] * self.coords_table[None, :, :])

    @cached_property
    def character_table(self) -> npt.NDArray[np.complex128]:
        """chi[u, g] = exp(2 pi i sum_i u_i g_i / n_i), dual group identified with G."""
        c = self.coords_table.astype(np.float64)
        phase = (c[:, None, :] * c[None, :, :] / self.moduli_array).sum(axis=-1)
        return np.exp(2j * np.pi * phase)

    def uniform_measure(self) -> npt.NDArray[np.float64]:
        return np.full(self.q, 1.0 / self.q)


def add(a: GroupElement, b: GroupElement, spec: GroupSpec) -> GroupElement:
    spec.check(a)
    spec.check(b)
    return GroupElement(
        tuple((x + y) % m for x, y, m in zip(a.coords, b.coords, spec.moduli))
    )


def scalar_mul(n: int, g: GroupElement, spec: GroupSpec) -> GroupElement:
    """n.g computed per coordinate, n reduced mod p^{e_i} first."""
    spec.check(g)
    return GroupElement(
        tuple(((n % m) * c) % m for c, m in zip(g.coords, spec.moduli))
    )


def is_unit_scalar(a: int, spec: GroupSpec) -> bool:
    """True iff g -> a.g is a bijection of G, i.e. a is not divisible by p."""
    return a % spec.p != 0
