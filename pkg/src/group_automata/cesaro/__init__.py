from __future__ import annotations

from .exact import exact_sum_distribution
from .exact import iterate_marginal_exact
from .exact import marginal_laws
from .lemma import RtildeFamily
from .lemma import SumSpec
from .lemma import build_Rtilde
from .lemma import lemma41_diagnostic
from .lemma import validate_family
from .lemma import validate_rtilde
from .output import CesaroReport
from .output import CesaroRow
from .output import CrossCheckReport
from .output import DistributionTable
from .output import Lemma41Report
from .output import Mode
from .scan import cesaro_scan
from .scan import cross_check
from .scan import dyadic_grid

__all__ = [
    "CesaroReport",
    "CesaroRow",
    "CrossCheckReport",
    "DistributionTable",
    "Lemma41Report",
    "Mode",
    "RtildeFamily",
    "SumSpec",
    "build_Rtilde",
    "cesaro_scan",
    "cross_check",
    "dyadic_grid",
    "exact_sum_distribution",
    "iterate_marginal_exact",
    "lemma41_diagnostic",
    "marginal_laws",
    "validate_family",
    "validate_rtilde",
]
