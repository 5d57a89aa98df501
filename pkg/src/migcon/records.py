"""Run records: everything one simulation leaves behind.

A RunRecord bundles the echoed configuration, the channel series, the
snapshot index, and a snapshot accessor.  Snapshots either live in memory
(small in-process runs) or on disk behind a loader closure; audits and the
harness consume records without caring which.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .functionals import FunctionalSeries
from .grid import Grid


@dataclass(frozen=True)
class SnapshotRef:
    index: int
    step: int
    t: float


@dataclass
class RunRecord:
    grid: Grid
    series: FunctionalSeries
    snapshots: list[SnapshotRef]
    loader: Callable[[int], tuple[np.ndarray, np.ndarray]]
    complete: bool
    meta: dict = field(default_factory=dict)
    config_text: str = ""

    def snapshot(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        """(u, v) value arrays of snapshot `index`."""
        return self.loader(index)

    def snapshot_times(self) -> np.ndarray:
        return np.array([ref.t for ref in self.snapshots])

    @property
    def alpha(self) -> float:
        return float(self.meta["alpha"])

    @property
    def eps(self) -> float:
        return float(self.meta["eps"])

    @property
    def ubar0(self) -> float:
        return float(self.meta["ubar0"])
