"""Time series of system-level populations, shared by both engines.

Stroboscopic (collision-step) and continuous-time (master-equation) runs
produce the same shape: one row per sample with the three system-level
populations.  Two-level effective states are zero-padded on level 2 so
every trajectory is directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation
from .operators import DensityOperator

POPULATION_SUM_TOL = 1e-8


@dataclass(frozen=True)
class Trajectory:
    """Populations indexed by step and physical time (units 1/g).

    ``snapshots`` optionally carries full reduced states at a stride
    chosen by the producer.
    """

    steps: np.ndarray
    times: np.ndarray
    populations: np.ndarray
    snapshots: tuple[tuple[int, DensityOperator], ...] = field(default=(), repr=False)

    def __post_init__(self):
        steps = np.asarray(self.steps, dtype=int)
        times = np.asarray(self.times, dtype=float)
        pops = np.asarray(self.populations, dtype=float)
        if not (len(steps) == len(times) == len(pops)):
            raise ValueError("steps, times, populations must have equal length")
        if pops.ndim != 2 or pops.shape[1] != 3:
            raise ValueError(f"populations must have shape (n, 3), got {pops.shape}")
        for arr, name in ((steps, "steps"), (times, "times"), (pops, "populations")):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.times)

    def validate(self) -> "Trajectory":
        """Check population normalization and time ordering."""
        sums = self.populations.sum(axis=1)
        worst = float(np.max(np.abs(sums - 1.0)))
        if worst > POPULATION_SUM_TOL:
            idx = int(np.argmax(np.abs(sums - 1.0)))
            raise InvariantViolation(
                f"populations at entry {idx} sum to {sums[idx]:.12f} (deviation {worst:.3e})"
            )
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise InvariantViolation("times are not strictly increasing")
        return self

    def population(self, level: int) -> np.ndarray:
        return self.populations[:, level]

    def final_window_mean(self, frac: float = 0.1) -> np.ndarray:
        """Mean populations over the trailing ``frac`` of the entries."""
        n = max(1, int(round(frac * len(self))))
        return self.populations[-n:].mean(axis=0)
