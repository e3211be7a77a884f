from __future__ import annotations

from .core import GroupElement
from .core import GroupSpec
from .core import add
from .core import is_unit_scalar
from .core import scalar_mul
from .digits import PExpansion
from .digits import density_set
from .digits import density_sets_prime
from .digits import lucas_binomial
from .digits import p_expansion
from .system import check_system_S
from .system import system_kernel

__all__ = [
    "GroupElement",
    "GroupSpec",
    "PExpansion",
    "add",
    "check_system_S",
    "density_set",
    "density_sets_prime",
    "is_unit_scalar",
    "lucas_binomial",
    "p_expansion",
    "scalar_mul",
    "system_kernel",
]
