"""State-space primitives: vectors, time grids and nested refinement schedules.

Vectors are plain 1-D float64 numpy arrays.  Time grids used by refinement
schedules are dyadic subdivisions of [0, T] so that nestedness holds exactly
in floating point (multiplying a node index by 2 and halving the step are
both exact operations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange

# Relative tolerance used by norm/zero checks on vectors.
VECTOR_TOL = 1e-14


def as_vector(x) -> np.ndarray:
    """Coerce to a read-only 1-D float64 array."""
    v = np.array(x, dtype=float, copy=True)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    v.flags.writeable = False
    return v


def inner(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.dot(u, v))


def norm(u: np.ndarray) -> float:
    return float(np.linalg.norm(u))


def unit(u: np.ndarray) -> np.ndarray:
    n = norm(u)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return u / n


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing finite subdivision of a time interval."""

    times: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float, copy=True)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("a time grid needs at least two nodes")
        if not np.all(np.diff(t) > 0):
            raise ValueError("grid nodes must be strictly increasing")
        t.flags.writeable = False
        object.__setattr__(self, "times", t)

    @staticmethod
    def uniform(horizon: float, intervals: int) -> "TimeGrid":
        if horizon <= 0 or intervals < 1:
            raise ValueError("horizon must be positive and intervals >= 1")
        h = horizon / intervals
        return TimeGrid(np.arange(intervals + 1) * h)

    @staticmethod
    def dyadic(horizon: float, k: int) -> "TimeGrid":
        """Uniform grid with 2**k intervals; nodes j*(T/2**k) are exactly nested across k."""
        if k < 0 or k > 24:
            raise ValueError("dyadic resolution out of the supported range [0, 24]")
        return TimeGrid.uniform(horizon, 2**k)

    @property
    def t_first(self) -> float:
        return float(self.times[0])

    @property
    def t_last(self) -> float:
        return float(self.times[-1])

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.times)))

    @property
    def n_intervals(self) -> int:
        return len(self.times) - 1

    def anticipate(self, t: float) -> float:
        """Smallest grid node >= t (and t_first at t_first).

        Satisfies 0 <= anticipate(t) - t <= mesh on the whole span.
        """
        if t < self.t_first or t > self.t_last:
            raise OutOfRange(f"t={t} outside [{self.t_first}, {self.t_last}]")
        idx = int(np.searchsorted(self.times, t, side="left"))
        return float(self.times[idx])

    def refines(self, coarser: "TimeGrid") -> bool:
        """True when every node of `coarser` is exactly a node of this grid."""
        pos = np.searchsorted(self.times, coarser.times)
        if np.any(pos >= len(self.times)):
            return False
        return bool(np.all(self.times[pos] == coarser.times))

    def __eq__(self, other):
        if not isinstance(other, TimeGrid):
            return NotImplemented
        return np.array_equal(self.times, other.times)

    def __repr__(self):
        return (
            f"TimeGrid({self.n_intervals} intervals on "
            f"[{self.t_first:g}, {self.t_last:g}], mesh={self.mesh:.3g})"
        )


@dataclass(frozen=True)
class RefinementSchedule:
    """Nested refinement data: decreasing tolerances, step lengths and dyadic grids.

    eps[n] bounds every catching-up jump at level n; delta[n] is a step length
    certified against the family's one-sided continuity; grids[n] has mesh
    <= delta[n] and its nodes are a subset of grids[n+1]'s.  eps follows a
    geometric template eps0 * ratio**n, hence sums to a finite value.
    """

    eps: tuple
    delta: tuple
    grids: tuple
    r: float
    eps0: float
    ratio: float

    def __post_init__(self):
        if len(self.eps) != len(self.delta) or len(self.eps) != len(self.grids):
            raise ValueError("eps, delta and grids must have equal lengths")
        if len(self.eps) < 1:
            raise ValueError("a schedule needs at least one level")
        if not (0.0 < self.ratio < 1.0):
            raise ValueError("eps ratio must lie in (0, 1)")
        for n, e in enumerate(self.eps):
            if not (0.0 < e < self.r):
                raise ValueError(f"eps[{n}]={e} violates 0 < eps < r={self.r}")
            if n > 0 and not e < self.eps[n - 1]:
                raise ValueError("eps must be strictly decreasing")
            if not math.isclose(e, self.eps0 * self.ratio**n, rel_tol=1e-12):
                raise ValueError("eps must follow the geometric template")
        for n, (d, g) in enumerate(zip(self.delta, self.grids)):
            if d <= 0:
                raise ValueError(f"delta[{n}] must be positive")
            if g.mesh > d:
                raise ValueError(f"grids[{n}].mesh={g.mesh} exceeds delta[{n}]={d}")
        for n in range(len(self.grids) - 1):
            if not self.grids[n + 1].refines(self.grids[n]):
                raise ValueError(f"grids[{n + 1}] does not refine grids[{n}]")

    @property
    def levels(self) -> int:
        return len(self.eps)

    @property
    def horizon(self) -> float:
        return self.grids[0].t_last

    @property
    def summable(self) -> bool:
        # Geometric with ratio < 1, enforced at construction.
        return True
