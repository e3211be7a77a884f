"""Counter-based uniforms: U_n depends only on (seed, n).

Replaying a path from another past must see the same U_n, so every stream is
a Philox generator keyed by the seed and read from counter zero.
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from group_automata.errors import DomainError

MAX_SEED = (1 << 64) - 1


def _check_seed(seed: int) -> None:
    if not 0 <= seed <= MAX_SEED:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")


def uniform_stream(seed: int) -> np.random.Generator:
    _check_seed(seed)
    return np.random.Generator(np.random.Philox(key=seed))


def uniforms(seed: int, count: int, start: int = 0) -> npt.NDArray[np.float64]:
    """U_start, ..., U_{start+count-1} of the stream keyed by `seed`."""
    if count < 0 or start < 0:
        raise DomainError(f"need start >= 0 and count >= 0, got {start}, {count}")
    return uniform_stream(seed).random(start + count)[start:]


def child_seeds(seed: int, n: int) -> list[int]:
    """Independent 64-bit seeds for n parallel trials derived from one seed."""
    _check_seed(seed)
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]
