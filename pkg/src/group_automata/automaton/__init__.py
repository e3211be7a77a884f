from __future__ import annotations

from .core import AutomatonParams
from .core import CoeffVector
from .core import Word
from .core import apply_closed_form
from .core import closed_form_batch
from .core import coefficient_columns
from .core import coefficients
from .core import iterate
from .core import pascal_rows
from .core import step

__all__ = [
    "AutomatonParams",
    "CoeffVector",
    "Word",
    "apply_closed_form",
    "closed_form_batch",
    "coefficient_columns",
    "coefficients",
    "iterate",
    "pascal_rows",
    "step",
]
