"""Pointwise variation, a-priori variation bounds and the empirical
convergence harness over a refinement schedule.

The ball bound applies when a fixed ball B_rho(w) sits inside every slice and
the compatibility margin 2*r*rho - alpha^2 is positive; the cone bound covers
interior-cone families via the persistence horizon tau.  Convergence is
checked empirically: squared sup-norm gaps between consecutive interpolants,
divided by the level tolerance, must stay bounded.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InapplicableBound, NoFeasibleEps, TubeViolation
from .families import Modulus, MovingFamily, compute_tau
from .geometry import RefinementSchedule, norm
from .solver import DiscreteTrajectory, affine_interpolant, solve

# Effective prox-regularity constant used inside bound formulas for convex
# scenarios (the bounds shrink as r grows, so the cap is conservative).
BOUND_R_CAP = 1e9


def variation(traj: DiscreteTrajectory, t_from: float, t_to: float) -> float:
    """Sum of jump norms over grid nodes in (t_from, t_to]; exact for the
    right-continuous step output of the solver."""
    T = traj.grid.t_last
    if not (0.0 <= t_from <= t_to <= T):
        raise ValueError(f"window [{t_from}, {t_to}] not inside [0, {T}]")
    times = traj.grid.times[1:]
    mask = (times > t_from) & (times <= t_to)
    return float(np.sum(traj.jump_norms[mask]))


def sampled_variation(fn, times) -> float:
    """Variation of fn along the given sample times (a lower bound for the
    true variation of fn)."""
    values = np.array([np.atleast_1d(fn(float(t))) for t in times])
    return float(np.sum(np.linalg.norm(np.diff(values, axis=0), axis=1)))


@dataclass(frozen=True)
class BallBoundParams:
    """Inputs of the fixed-inner-ball variation bound."""

    r: float
    w: tuple
    rho: float
    alpha: float
    y0: tuple

    def __post_init__(self):
        if self.r <= 0 or self.rho <= 0:
            raise ValueError("r and rho must be positive")
        object.__setattr__(self, "w", tuple(float(x) for x in self.w))
        object.__setattr__(self, "y0", tuple(float(x) for x in self.y0))


def ball_alpha(y0, w, rho: float, slack: float) -> float:
    """alpha = slack + |y0 - w| + rho, slack covering the initial distance and
    every one-step excess along the run (eps of the level suffices)."""
    return slack + norm(np.asarray(y0, float) - np.asarray(w, float)) + rho


def ball_variation_bound(params: BallBoundParams) -> float:
    """max{ r*(|y0-w|^2 - rho^2) / (2*r*rho - alpha^2), 0 }."""
    denom = 2.0 * params.r * params.rho - params.alpha**2
    if denom <= 0:
        raise InapplicableBound(
            f"alpha^2={params.alpha**2:.6g} >= 2*r*rho={2 * params.r * params.rho:.6g}"
        )
    if denom < 1e-9 * 2.0 * params.r * params.rho:
        warnings.warn(
            "ball variation bound evaluated near its applicability pole",
            RuntimeWarning,
            stacklevel=2,
        )
    gap2 = norm(np.array(params.y0) - np.array(params.w)) ** 2 - params.rho**2
    return max(params.r * gap2 / denom, 0.0)


@dataclass(frozen=True)
class ConeBoundParams:
    """Inputs of the interior-cone variation bound."""

    r: float
    R: float
    d: float
    lam: float
    tau: float
    eps_bar: float

    def __post_init__(self):
        if min(self.r, self.R, self.d) <= 0:
            raise ValueError("r, R, d must be positive")
        if not (0.0 < self.lam < 1.0):
            raise ValueError("lambda must lie in (0, 1)")
        if self.eps_bar < 0:
            raise ValueError("eps_bar must be nonnegative")

    @property
    def alpha(self) -> float:
        return self.lam * self.d + self.lam * self.R / 2.0 + self.eps_bar


def cone_variation_bound(params: ConeBoundParams, horizon: float) -> float:
    """ceil(2T/tau) * ( r*(d^2 - (lam*R/2)^2) / (lam*r*R - alpha^2) + eps_bar )."""
    if horizon == 0.0:
        return 0.0
    if params.tau <= 0:
        raise InapplicableBound("tau must be positive")
    if params.lam * (params.d + params.R / 2.0) ** 2 >= params.r * params.R:
        raise InapplicableBound("lambda*(d + R/2)^2 must stay below r*R")
    half_rho = params.lam * params.R / 2.0
    if params.d < half_rho:
        raise InapplicableBound("d must be at least lambda*R/2 for a nonnegative numerator")
    denom = params.lam * params.r * params.R - params.alpha**2
    if denom <= 0:
        raise InapplicableBound(
            f"alpha^2={params.alpha**2:.6g} >= lambda*r*R={params.lam * params.r * params.R:.6g}"
        )
    windows = math.ceil(2.0 * horizon / params.tau)
    per_window = params.r * (params.d**2 - half_rho**2) / denom
    return windows * (per_window + params.eps_bar)


def choose_cone_params(
    r: float,
    R: float,
    d: float,
    omega: Modulus,
    eps_candidates=(),
) -> ConeBoundParams:
    """Pick lambda = 0.9*r*R/(d+R/2)^2 (capped below 1), tau from the
    inner-ball persistence recipe with rho0 = lam*R, rho = lam*R/2, and the
    largest feasible tolerance among eps_candidates (a safe default without
    candidates)."""
    if min(r, R, d) <= 0:
        raise ValueError("r, R, d must be positive")
    lam = min(0.9 * r * R / (d + R / 2.0) ** 2, 0.99)
    tau = compute_tau(omega, r, lam * R, lam * R / 2.0)
    headroom = math.sqrt(lam * r * R) - lam * (d + R / 2.0)
    eps_max = min(r / 2.0, headroom)
    if eps_max <= 0:
        raise NoFeasibleEps("no positive tolerance satisfies the smallness conditions")
    if eps_candidates:
        feasible = [e for e in eps_candidates if 0.0 < e < eps_max]
        if not feasible:
            raise NoFeasibleEps(
                f"no candidate tolerance lies below the feasibility cap {eps_max:.6g}"
            )
        eps_bar = max(feasible)
    else:
        eps_bar = 0.9 * eps_max
    return ConeBoundParams(r=r, R=R, d=d, lam=lam, tau=tau, eps_bar=eps_bar)


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    """Per-level convergence diagnostics.

    All arrays share the schedule length; sup_diffs[n] and cauchy_ratios[n]
    compare level n against level n+1, so their last entry is NaN (there is
    no successor level to compare against).
    """

    levels: tuple
    eps: tuple
    sup_diffs: tuple
    variations: tuple
    cauchy_ratios: tuple
    constraint_residuals: tuple
    wall_seconds: tuple
    trajectories: tuple = field(repr=False)

    def to_json_dict(self) -> dict:
        def clean(values):
            return [None if (isinstance(v, float) and math.isnan(v)) else v for v in values]

        return {
            "levels": list(self.levels),
            "eps": list(self.eps),
            "sup_diffs": clean(self.sup_diffs),
            "variations": list(self.variations),
            "cauchy_ratios": clean(self.cauchy_ratios),
            "constraint_residuals": list(self.constraint_residuals),
            "wall_seconds": list(self.wall_seconds),
        }


def union_sample_times(fine_times: np.ndarray, coarse_times: np.ndarray, oversample: int = 10):
    """Union of both node sets plus equispaced interior points per fine interval."""
    extra = []
    for a, b in zip(fine_times[:-1], fine_times[1:]):
        h = b - a
        extra.extend(a + (i / oversample) * h for i in range(1, oversample))
    return np.unique(np.concatenate([fine_times, coarse_times, np.array(extra)]))


def sup_norm_gap(f, g, ts) -> float:
    fa = f(ts)
    ga = g(ts)
    return float(np.max(np.linalg.norm(fa - ga, axis=1)))


def converge_study(
    family: MovingFamily,
    y0,
    schedule: RefinementSchedule,
    oversample: int = 10,
) -> ConvergenceReport:
    """Solve at every schedule level and report consecutive sup-norm gaps,
    variations, squared-gap-to-tolerance ratios and worst node containment
    residuals (the ratios staying bounded is the empirical convergence law)."""
    trajectories = []
    wall = []
    for n in range(schedule.levels):
        start = time.perf_counter()
        try:
            traj = solve(family, y0, schedule.grids[n], schedule.eps[n], level=n)
        except TubeViolation as err:
            err.level = n
            raise
        wall.append(time.perf_counter() - start)
        trajectories.append(traj)
    variations = [t.variation_total for t in trajectories]
    residuals = [
        max(
            family.at(float(t)).distance(traj.points[j])
            for j, t in enumerate(traj.grid.times)
        )
        for traj in trajectories
    ]
    sup_diffs, ratios = [], []
    for n in range(schedule.levels - 1):
        ts = union_sample_times(
            schedule.grids[n + 1].times, schedule.grids[n].times, oversample
        )
        gap = sup_norm_gap(
            affine_interpolant(trajectories[n + 1]),
            affine_interpolant(trajectories[n]),
            ts,
        )
        sup_diffs.append(gap)
        ratios.append(gap**2 / schedule.eps[n])
    sup_diffs.append(math.nan)
    ratios.append(math.nan)
    return ConvergenceReport(
        levels=tuple(range(schedule.levels)),
        eps=tuple(schedule.eps),
        sup_diffs=tuple(sup_diffs),
        variations=tuple(variations),
        cauchy_ratios=tuple(ratios),
        constraint_residuals=tuple(residuals),
        wall_seconds=tuple(wall),
        trajectories=tuple(trajectories),
    )
