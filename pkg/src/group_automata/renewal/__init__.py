from __future__ import annotations

from .core import MissEstimate
from .core import RenewalStats
from .core import counting_measure
from .core import epsilon
from .core import epsilon_bound
from .core import epsilon_curve
from .core import miss_probability
from .core import residual_distribution
from .core import residual_tail_exact
from .core import simulate_renewal
from .core import spread_subset
from .laws import GeometricLaw
from .laws import InterarrivalLaw
from .laws import PmfLaw
from .laws import TwoPointLaw
from .laws import regeneration_law
from .laws import renewal_sequence

__all__ = [
    "GeometricLaw",
    "InterarrivalLaw",
    "MissEstimate",
    "PmfLaw",
    "RenewalStats",
    "TwoPointLaw",
    "counting_measure",
    "epsilon",
    "epsilon_bound",
    "epsilon_curve",
    "miss_probability",
    "regeneration_law",
    "renewal_sequence",
    "residual_distribution",
    "residual_tail_exact",
    "simulate_renewal",
    "spread_subset",
]
