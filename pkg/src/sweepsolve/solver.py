"""Catching-up solver: implicit time stepping by projection onto the moving set.

Each step projects the previous iterate onto the next slice, so the step
vector is (minus) a proximal normal there and its length equals the distance
to the slice.  Certification re-checks that normal-cone membership a
posteriori via sampled hypo-monotonicity residuals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CertificationFailed, InitialInfeasible, OutOfRange, TubeViolation
from .families import MovingFamily
from .geometry import TimeGrid
from .sets import NormalResidualReport, normal_residual, sample_points

# Strict jump bound is accepted up to eps * (1 + this slack) to absorb rounding.
JUMP_EPS_SLACK = 1e-12

CERTIFICATION_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class DiscreteTrajectory:
    """Catching-up output on a grid: points[j] lies in the slice at times[j]
    and consecutive points differ by strictly less than eps_level."""

    grid: TimeGrid
    points: np.ndarray
    level: int
    eps_level: float

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim != 2 or pts.shape[0] != len(self.grid.times):
            raise ValueError("points must be a (nodes, dim) array matching the grid")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        if self.eps_level <= 0:
            raise ValueError("eps_level must be positive")
        worst = float(np.max(self.jump_norms)) if len(self.jump_norms) else 0.0
        if worst >= self.eps_level * (1.0 + JUMP_EPS_SLACK):
            raise ValueError(
                f"jump of norm {worst:.6g} violates the strict bound eps={self.eps_level:.6g}"
            )

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def jumps(self) -> np.ndarray:
        """Step vectors y_j - y_{j-1}, one per interval (index j-1)."""
        return np.diff(self.points, axis=0)

    @property
    def jump_norms(self) -> np.ndarray:
        return np.linalg.norm(self.jumps, axis=1)

    @property
    def variation_total(self) -> float:
        return float(np.sum(self.jump_norms))


def solve(
    family: MovingFamily,
    y0,
    grid: TimeGrid,
    eps_level: float,
    level: int = 0,
) -> DiscreteTrajectory:
    """Run the catching-up recursion y_j = P_{C(t_j)}(y_{j-1}) along the grid.

    Raises InitialInfeasible when y0 lies outside the initial slice and
    TubeViolation(j) when an iterate is at distance >= r from the next slice
    (the grid is too coarse for this family; refinement is the caller's call).
    """
    y0 = np.asarray(y0, dtype=float)
    if grid.t_first != 0.0:
        raise ValueError("the grid must start at t=0")
    if grid.t_last > family.horizon:
        raise ValueError("the grid extends beyond the family horizon")
    first = family.at(grid.t_first)
    if not first.contains(y0):
        raise InitialInfeasible(
            f"y0 has containment defect {first.membership_defect(y0):.3e} at t=0"
        )
    points = np.empty((len(grid.times), len(y0)))
    points[0] = y0
    y = y0
    for j, t in enumerate(grid.times[1:], start=1):
        slice_t = family.at(float(t))
        d = slice_t.distance(y)
        if d >= family.r:
            raise TubeViolation(j, d, family.r)
        y = slice_t.project(y)
        points[j] = y
    return DiscreteTrajectory(grid=grid, points=points, level=level, eps_level=eps_level)


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Right-continuous step interpolant: the value on [t_{j-1}, t_j) is
    points[j-1], and the final point at the right endpoint."""

    times: np.ndarray
    values: np.ndarray

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr < self.times[0]) or np.any(t_arr > self.times[-1]):
            raise OutOfRange("evaluation outside the trajectory span")
        idx = np.searchsorted(self.times, t_arr, side="right") - 1
        idx = np.clip(idx, 0, len(self.times) - 1)
        out = self.values[idx]
        return out if np.asarray(t).ndim else out[0]


@dataclass(frozen=True, eq=False)
class AffineFunction:
    """Continuous piecewise-affine interpolant through (times[j], values[j])."""

    times: np.ndarray
    values: np.ndarray

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr < self.times[0]) or np.any(t_arr > self.times[-1]):
            raise OutOfRange("evaluation outside the trajectory span")
        idx = np.searchsorted(self.times, t_arr, side="right") - 1
        idx = np.clip(idx, 0, len(self.times) - 2)
        h = self.times[idx + 1] - self.times[idx]
        frac = (t_arr - self.times[idx]) / h
        out = self.values[idx] + frac[:, None] * (self.values[idx + 1] - self.values[idx])
        return out if np.asarray(t).ndim else out[0]


def step_interpolant(traj: DiscreteTrajectory) -> StepFunction:
    return StepFunction(traj.grid.times, traj.points)


def affine_interpolant(traj: DiscreteTrajectory) -> AffineFunction:
    return AffineFunction(traj.grid.times, traj.points)


@dataclass(frozen=True)
class StepCertificate:
    """Per-step evidence that the step vector is an inward proximal normal."""

    j: int
    distance_moved: float
    excess_bound_used: float
    normal_report: NormalResidualReport

    def __post_init__(self):
        if self.distance_moved > self.excess_bound_used * (1.0 + 1e-12):
            raise ValueError(
                f"step {self.j} moved {self.distance_moved:.6g}, "
                f"beyond the excess bound {self.excess_bound_used:.6g}"
            )


def certify_steps(
    family: MovingFamily,
    traj: DiscreteTrajectory,
    samples_per_step: int = 100,
    seed: int = 0,
    region_halfwidth: float = 3.0,
) -> list:
    """Check -step_vector against sampled slice members for every nonzero step.

    Zero steps are skipped (the zero vector lies in every normal cone).  The
    residual uses the slice's finite r when it has one.  Raises
    CertificationFailed when a residual exceeds 1e-6: that indicates a
    projection bug, not a modeling problem.
    """
    rate = family.analytic_rate()
    certificates = []
    jump_norms = traj.jump_norms
    for j in range(1, len(traj.grid.times)):
        moved = float(jump_norms[j - 1])
        if moved == 0.0:
            continue
        t = float(traj.grid.times[j])
        dt = t - float(traj.grid.times[j - 1])
        bound = rate * dt if rate is not None else traj.eps_level
        x = traj.points[j]
        n_vec = traj.points[j - 1] - traj.points[j]
        slice_t = family.at(t)
        region = (x - region_halfwidth, x + region_halfwidth)
        z = sample_points(slice_t, region, samples_per_step, seed + j)
        report = normal_residual(slice_t, x, n_vec, z)
        if report.worst_residual > CERTIFICATION_TOL:
            raise CertificationFailed(j, report.worst_residual)
        certificates.append(StepCertificate(j, moved, bound, report))
    return certificates


def write_trajectory_csv(traj: DiscreteTrajectory, family: MovingFamily, path) -> None:
    """Node table: t, coordinates, arriving jump norm, distance to the slice."""
    dim = traj.dim
    header = "t," + ",".join(f"x_{i}" for i in range(dim)) + ",jump_norm,dist_to_set"
    lines = [header]
    jump_norms = np.concatenate([[0.0], traj.jump_norms])
    for j, t in enumerate(traj.grid.times):
        dist = family.at(float(t)).distance(traj.points[j])
        cells = [f"{float(t):.17g}"]
        cells += [f"{float(c):.17g}" for c in traj.points[j]]
        cells.append(f"{float(jump_norms[j]):.17g}")
        cells.append(f"{dist:.17g}")
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
