from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from group_automata.errors import CapacityError
from group_automata.errors import PreconditionError
from group_automata.errors import StructuralError

from .core import GroupElement
from .core import GroupSpec

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 1 << 20

Matrix = Sequence[Sequence[int]]


def _square(matrix: Matrix) -> np.ndarray:
    a = np.asarray(matrix, dtype=object)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise StructuralError(f"expected a nonempty square matrix, got shape {a.shape}")
    if any(int(x) < 0 for x in a.flat):
        raise StructuralError("system (S) coefficients must be nonnegative integers")
    return a


def h_prime_violations(matrix: Matrix, p: int) -> list[tuple[int, int]]:
    """Entries breaking (H'): a_ii != 0 mod p and a_ij = 0 mod p for i < j."""
    a = _square(matrix)
    n = a.shape[0]
    bad = [(i, i) for i in range(n) if int(a[i, i]) % p == 0]
    bad += [(i, j) for i in range(n) for j in range(i + 1, n) if int(a[i, j]) % p]
    return bad


def system_kernel(
    matrix: Matrix, spec: GroupSpec, cap: int = DEFAULT_ENUMERATION_CAP
) -> list[tuple[GroupElement, ...]]:
    """Every (g_1, ..., g_l) in G^l with A g = 0, by exhaustive enumeration."""
    a = _square(matrix)
    ell = a.shape[0]
    states = spec.q**ell
    if states > cap:
        raise CapacityError(
            f"system (S) over {spec} with l={ell} has {states} states, cap is {cap}"
        )
    reduced = np.array(
        [[int(x) % spec.exponent_modulus for x in row] for row in a], dtype=np.int64
    )
    codes = np.stack(
        np.unravel_index(np.arange(states), (spec.q,) * ell), axis=1
    ).astype(np.int64)
    coords = spec.coords_table[codes]
    images = np.einsum("ij,njd->nid", reduced, coords) % spec.moduli_array
    solutions = codes[(images == 0).all(axis=(1, 2))]
    logger.debug("system (S) over %s: %d solutions", spec, len(solutions))
    return [tuple(spec.from_code(int(c)) for c in row) for row in solutions]


def check_system_S(
    matrix: Matrix, spec: GroupSpec, cap: int = DEFAULT_ENUMERATION_CAP
) -> bool:
    """True iff the only solution of the (H') system A g = 0 is g = 0."""
    bad = h_prime_violations(matrix, spec.p)
    if bad:
        raise PreconditionError(f"matrix violates (H') at entries {bad}")
    solutions = system_kernel(matrix, spec, cap)
    zero = (spec.zero,) * len(matrix)
    return solutions == [zero]
