from __future__ import annotations

from .kernels import Kernel
from .kernels import KernelSpec
from .kernels import MarkovKernel
from .kernels import MixtureKernel
from .kernels import ProductKernel
from .kernels import TailMode
from .kernels import compute_a
from .kernels import eval_kernel
from .kernels import gamma_bound
from .layout import IntervalLayout
from .layout import build_layout
from .sampler import Block
from .sampler import RegenDetection
from .sampler import RegenSample
from .sampler import detect_regenerations
from .sampler import draw_path
from .sampler import regeneration_blocks
from .sampler import regeneration_rate
from .sampler import regeneration_times
from .sampler import sample_path

__all__ = [
    "Block",
    "IntervalLayout",
    "Kernel",
    "KernelSpec",
    "MarkovKernel",
    "MixtureKernel",
    "ProductKernel",
    "RegenDetection",
    "RegenSample",
    "TailMode",
    "build_layout",
    "compute_a",
    "detect_regenerations",
    "draw_path",
    "eval_kernel",
    "gamma_bound",
    "regeneration_blocks",
    "regeneration_rate",
    "regeneration_times",
    "sample_path",
]
