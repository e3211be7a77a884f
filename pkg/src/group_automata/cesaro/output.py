from __future__ import annotations

from enum import Enum

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import model_validator

NORMALIZATION_SLACK = 1e-10
NEGATIVE_SLACK = 1e-12


class Mode(str, Enum):
    EXACT = "exact"
    MC = "mc"


def cylinder_label(codes: tuple[int, ...]) -> str:
    return "(" + ",".join(str(c) for c in codes) + ")"


class DistributionTable(BaseModel):
    """A law over G^J, cells in code order with the first index of J most significant."""

    model_config = ConfigDict(frozen=True)

    q: int
    J: tuple[int, ...]
    probabilities: tuple[float, ...]
    slack: float = 0.0

    @model_validator(mode="after")
    def check_normalized(self) -> DistributionTable:
        if len(self.probabilities) != self.q ** len(self.J):
            raise ValueError(
                f"{len(self.probabilities)} cells for q={self.q}, |J|={len(self.J)}"
            )
        if min(self.probabilities) < 0:
            raise ValueError("probabilities must be nonnegative")
        if self.slack > NORMALIZATION_SLACK:
            raise ValueError(f"probabilities sum to 1 only within {self.slack:.3e}")
        return self

    @classmethod
    def from_array(
        cls, values: npt.ArrayLike, q: int, J: tuple[int, ...]
    ) -> DistributionTable:
        arr = np.real_if_close(np.asarray(values)).astype(np.float64).ravel()
        if (arr < -NEGATIVE_SLACK).any():
            raise ValueError(f"negative probability {arr.min():.3e}")
        arr = np.clip(arr, 0.0, None)
        return cls(
            q=q,
            J=tuple(J),
            probabilities=tuple(float(x) for x in arr),
            slack=float(abs(arr.sum() - 1.0)),
        )

    @property
    def cells(self) -> int:
        return len(self.probabilities)

    def as_array(self) -> npt.NDArray[np.float64]:
        return np.asarray(self.probabilities).reshape((self.q,) * len(self.J))

    def probability(self, codes: tuple[int, ...]) -> float:
        return float(self.as_array()[tuple(codes)])

    def tv_to_uniform(self) -> float:
        arr = np.asarray(self.probabilities)
        return float(0.5 * np.abs(arr - 1.0 / self.cells).sum())


class CesaroRow(BaseModel):
    M: int
    cylinder: str
    probability: float
    tv: float
    stderr: float


class CesaroPoint(BaseModel):
    M: int
    table: DistributionTable
    tv: float
    stderr: tuple[float, ...]

    @model_validator(mode="after")
    def check_tv(self) -> CesaroPoint:
        if not 0.0 <= self.tv <= 1.0:
            raise ValueError(f"total variation {self.tv} outside [0, 1]")
        return self


class CesaroReport(BaseModel):
    mode: Mode
    J: tuple[int, ...]
    g_values: tuple[int, ...] | None = None
    points: list[CesaroPoint]

    @model_validator(mode="after")
    def check_points(self) -> CesaroReport:
        grid = [point.M for point in self.points]
        if grid != sorted(set(grid)):
            raise ValueError(f"M grid must be strictly increasing, got {grid}")
        if self.mode is Mode.EXACT and any(any(p.stderr) for p in self.points):
            raise ValueError("exact reports carry zero error bars")
        return self

    @classmethod
    def from_averages(
        cls,
        mode: Mode,
        q: int,
        J: tuple[int, ...],
        grid: list[int],
        averages: npt.NDArray[np.float64],
        stderr: npt.NDArray[np.float64] | None = None,
        g_values: tuple[int, ...] | None = None,
    ) -> CesaroReport:
        """averages[i] is the Cesaro-averaged law over G^J at M = grid[i]."""
        match mode:
            case Mode.EXACT:
                errors = np.zeros_like(averages)
            case Mode.MC:
                errors = np.zeros_like(averages) if stderr is None else stderr
        points = []
        for M, avg, err in zip(grid, averages, errors):
            table = DistributionTable.from_array(avg, q, J)
            points.append(
                CesaroPoint(
                    M=M,
                    table=table,
                    tv=min(1.0, table.tv_to_uniform()),
                    stderr=tuple(float(e) for e in err),
                )
            )
        return cls(mode=mode, J=J, g_values=g_values, points=points)

    @property
    def grid(self) -> list[int]:
        return [point.M for point in self.points]

    @property
    def tv(self) -> list[float]:
        return [point.tv for point in self.points]

    def rows(self) -> list[CesaroRow]:
        """One row per (M, cylinder); only the g_values cylinder when it is set."""
        out = []
        for point in self.points:
            q = point.table.q
            shape = (q,) * len(self.J)
            for flat, prob in enumerate(point.table.probabilities):
                codes = tuple(int(c) for c in np.unravel_index(flat, shape))
                if self.g_values is not None and codes != self.g_values:
                    continue
                out.append(
                    CesaroRow(
                        M=point.M,
                        cylinder=cylinder_label(codes),
                        probability=prob,
                        tv=point.tv,
                        stderr=point.stderr[flat],
                    )
                )
        return out


class CrossCheckReport(BaseModel):
    cells: int
    max_abs_delta: float
    max_sigma: float
    threshold: float = 4.0

    @property
    def passed(self) -> bool:
        return self.max_sigma <= self.threshold


class Lemma41Report(BaseModel):
    """Measured deviation from uniform against the constructive bound.

    `n_star` is n(R*) for a single sum and the smallest |R~^j| for a family.
    `miss_fraction` is the share of trials with no regeneration time in the
    unit positions; trials that never see one count as censored there.
    """

    joint: bool
    n_star: int
    cells: int
    deviation: float
    stderr: float
    bound: float
    vacuous: bool
    miss_fraction: float
    trials: int

    @property
    def within_bound(self) -> bool:
        return self.vacuous or self.deviation <= self.bound + 3 * self.stderr
