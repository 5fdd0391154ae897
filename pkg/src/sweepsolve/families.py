"""Time-parametrized set families, the one-sided excess semidistance, its
continuity modulus, inner-ball persistence horizons and refinement schedules.

The excess of A over B is sup_{a in A} d(a, B): zero iff A is contained in
the closure of B, asymmetric otherwise.  Families built from the declared
path forms carry an analytic linear modulus omega(delta) = rate * delta;
everything else falls back to seeded sampling that reports honest lower
bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    ModulusUnavailable,
    NoPositiveTau,
    OutOfRange,
    OutsideTube,
)
from .geometry import RefinementSchedule, TimeGrid, norm
from .paths import Path
from .sets import (
    Ball,
    BallComplement,
    Box,
    HalfSpace,
    Polytope,
    ProxSet,
    RigidImage,
    rotation_matrix_2d,
    sample_points,
)

# Admissible discontinuities may only expand the set: the excess of the left
# slice over the right slice must vanish to this tolerance.
JUMP_TOL = 1e-9

TAU_MARGIN = 1e-9
TAU_BISECTION_ITERS = 64

# Large finite stand-in for r = inf, used only when validating schedules.
CONVEX_R_CAP = 1e9


@dataclass(frozen=True)
class SamplingBudget:
    count: int = 160
    hill_steps: int = 40
    seed: int = 0
    region: object = None


@dataclass(frozen=True)
class ExcessEstimate:
    """Excess value with provenance: analytic values are exact, sampled ones
    are lower bounds attained by the witness point."""

    lower: float
    witness: np.ndarray
    method: str  # "analytic" | "sampled"
    sample_count: int


def _analytic_excess(A: ProxSet, B: ProxSet):
    if isinstance(A, Ball) and isinstance(B, Ball):
        gap = A._c - B._c
        dist = norm(gap)
        value = max(dist + A.radius - B.radius, 0.0)
        direction = gap / dist if dist > 0 else np.eye(A.dim)[0]
        if value > 0:
            witness = A._c + A.radius * direction
        else:
            witness = A._c.copy()
        return value, witness
    if isinstance(A, HalfSpace) and isinstance(B, HalfSpace):
        if float(A._a @ B._a) >= 1.0 - 1e-12:
            value = max(A.offset - B.offset, 0.0)
            return value, A.boundary_anchor()
        return None
    if isinstance(A, BallComplement) and isinstance(B, BallComplement):
        gap = B._c - A._c
        dist = norm(gap)
        nearest = max(A.radius - dist, 0.0)
        value = max(B.radius - nearest, 0.0)
        if dist >= A.radius:
            witness = B._c.copy()
        else:
            direction = gap / dist if dist > 0 else np.eye(A.dim)[0]
            witness = A._c + A.radius * direction
        return value, witness
    if isinstance(A, Box) and isinstance(B, Box):
        ext_a = np.array(A.hi) - np.array(A.lo)
        ext_b = np.array(B.hi) - np.array(B.lo)
        if norm(ext_a - ext_b) <= 1e-12:
            shift = np.array(A.lo) - np.array(B.lo)
            witness = np.where(shift >= 0, A._hi, A._lo).astype(float)
            return norm(shift), witness
        return None
    return None


def _sampled_excess(A: ProxSet, B: ProxSet, budget: SamplingBudget) -> ExcessEstimate:
    region = budget.region if budget.region is not None else A.bounding_region()
    pts = sample_points(A, region, budget.count, budget.seed)
    dists = [B.distance(p) for p in pts]
    best_i = int(np.argmax(dists))
    best, x = dists[best_i], pts[best_i]
    rng = np.random.default_rng(budget.seed + 1)
    lo, hi = np.asarray(region[0], float), np.asarray(region[1], float)
    scale = float(np.mean(hi - lo)) / 8.0
    for _ in range(budget.hill_steps):
        prop = x + scale * rng.standard_normal(A.dim)
        if not A.contains(prop):
            try:
                prop = A.project(prop)
            except OutsideTube:
                scale *= 0.7
                continue
        d = B.distance(prop)
        if d > best:
            best, x = d, prop
        else:
            scale *= 0.9
    return ExcessEstimate(float(best), x, "sampled", budget.count)


def excess(A: ProxSet, B: ProxSet, budget: SamplingBudget | None = None) -> ExcessEstimate:
    """One-sided excess of A over B: exact for supported pairs, sampled lower
    bound (member sampling plus local hill-climbing) otherwise."""
    if A.dim != B.dim:
        raise DimensionMismatch(f"excess between dim {A.dim} and dim {B.dim}")
    analytic = _analytic_excess(A, B)
    if analytic is not None:
        value, witness = analytic
        return ExcessEstimate(float(value), witness, "analytic", 0)
    return _sampled_excess(A, B, budget or SamplingBudget())


@dataclass(frozen=True)
class Modulus:
    """Nondecreasing bound omega(delta) on the excess over forward pairs at
    most delta apart; analytic moduli are linear with the stored rate."""

    horizon: float
    analytic: bool
    rate: float | None
    fn: object = field(compare=False, repr=False)

    def __call__(self, delta: float) -> float:
        if delta <= 0:
            return 0.0
        return float(self.fn(min(delta, self.horizon)))


def _linear_modulus(horizon: float, rate: float) -> Modulus:
    return Modulus(horizon, True, rate, lambda d: rate * d)


class MovingFamily:
    """t -> C(t) on [0, horizon], uniformly r-prox-regular."""

    horizon: float

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def r(self) -> float:
        raise NotImplementedError

    def at(self, t: float) -> ProxSet:
        raise NotImplementedError

    def analytic_rate(self) -> float | None:
        raise NotImplementedError

    def breakpoints(self) -> tuple:
        return ()

    def _check_time(self, t: float):
        if t < 0.0 or t > self.horizon:
            raise OutOfRange(f"t={t} outside [0, {self.horizon}]")

    def modulus(self, budget: SamplingBudget | None = None) -> Modulus:
        rate = self.analytic_rate()
        if rate is not None:
            return _linear_modulus(self.horizon, rate)
        fam = self
        b = budget or SamplingBudget(count=48, hill_steps=20)
        return Modulus(
            self.horizon, False, None, lambda d: _sampled_omega(fam, d, b)
        )

    def _validate_declared_r(self, declared_r, natural_r) -> float:
        if declared_r is None:
            return natural_r
        if not (0.0 < declared_r <= natural_r):
            raise ValueError(
                f"declared r={declared_r} must lie in (0, natural r={natural_r}]"
            )
        return float(declared_r)


def translate_shape(base: ProxSet, u: np.ndarray) -> ProxSet:
    """The same shape moved by u."""
    if isinstance(base, HalfSpace):
        return HalfSpace(base.normal, base.offset + float(base._a @ u))
    if isinstance(base, Ball):
        return Ball(tuple(base._c + u), base.radius)
    if isinstance(base, Box):
        return Box(tuple(base._lo + u), tuple(base._hi + u))
    if isinstance(base, BallComplement):
        return BallComplement(tuple(base._c + u), base.radius)
    if isinstance(base, Polytope):
        faces = tuple(
            HalfSpace(f.normal, f.offset + float(f._a @ u)) for f in base.faces
        )
        return Polytope(faces, tuple(base._interior + u))
    if isinstance(base, RigidImage):
        return RigidImage(base.base, base.rotation, tuple(base._u + u))
    raise TypeError(f"unsupported shape {type(base).__name__}")


@dataclass(frozen=True)
class TranslateFamily(MovingFamily):
    base: ProxSet
    path: Path
    horizon: float
    declared_r: float | None = None
    _r: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        object.__setattr__(self, "_r", self._validate_declared_r(self.declared_r, self.base.r))

    @property
    def dim(self):
        return self.base.dim

    @property
    def r(self):
        return self._r

    def at(self, t):
        self._check_time(t)
        return translate_shape(self.base, np.atleast_1d(self.path(t)))

    def analytic_rate(self):
        return self.path.max_speed()


@dataclass(frozen=True)
class RadiusFamily(MovingFamily):
    """Ball (or ball complement) with drifting center and scheduled radius."""

    center: Path
    radius: Path
    complement: bool
    horizon: float
    declared_r: float | None = None
    _r: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self._min_radius() <= 0:
            raise ValueError("radius schedule must stay positive on the horizon")
        natural = self._min_radius() if self.complement else math.inf
        object.__setattr__(self, "_r", self._validate_declared_r(self.declared_r, natural))

    def _radius_knots(self):
        ts = {0.0, self.horizon}
        if hasattr(self.radius, "pieces"):
            ts.update(u for u, _ in self.radius.pieces if 0.0 < u < self.horizon)
        return sorted(ts)

    def _min_radius(self):
        return min(float(self.radius(t)) for t in self._radius_knots())

    @property
    def dim(self):
        return len(np.atleast_1d(self.center(0.0)))

    @property
    def r(self):
        return self._r

    def at(self, t):
        self._check_time(t)
        c = tuple(np.atleast_1d(self.center(t)))
        rad = float(self.radius(t))
        return BallComplement(c, rad) if self.complement else Ball(c, rad)

    def analytic_rate(self):
        # Excess grows when a ball shrinks, or when an excluded ball grows.
        if self.complement:
            radial = max(0.0, self.radius.max_signed_rate())
        else:
            radial = max(0.0, -self.radius.min_signed_rate())
        return self.center.max_speed() + radial


@dataclass(frozen=True)
class RigidFamily(MovingFamily):
    """Planar rigid motion: rotation about a fixed pivot plus a drift."""

    base: ProxSet
    angle: Path
    pivot: tuple
    horizon: float
    translation: Path | None = None
    circumradius: float | None = None
    declared_r: float | None = None
    _r: float = field(init=False, repr=False, compare=False)
    _circum: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.base.dim != 2:
            raise ValueError("rigid families are implemented for dim 2")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        object.__setattr__(self, "pivot", tuple(float(x) for x in self.pivot))
        object.__setattr__(self, "_r", self._validate_declared_r(self.declared_r, self.base.r))
        object.__setattr__(self, "_circum", self._resolve_circumradius())

    def _resolve_circumradius(self) -> float:
        if self.circumradius is not None:
            if self.circumradius <= 0:
                raise ValueError("circumradius must be positive")
            return float(self.circumradius)
        p = np.array(self.pivot)
        if isinstance(self.base, Ball):
            return norm(self.base._c - p) + self.base.radius
        if isinstance(self.base, Box):
            corners = [
                np.array([x, y])
                for x in (self.base.lo[0], self.base.hi[0])
                for y in (self.base.lo[1], self.base.hi[1])
            ]
            return max(norm(c - p) for c in corners)
        if isinstance(self.base, Polytope):
            verts = self.base.vertices_2d()
            if verts:
                return max(norm(v - p) for v in verts)
        raise ValueError("circumradius must be declared for this base shape")

    @property
    def dim(self):
        return 2

    @property
    def r(self):
        return self._r

    def at(self, t):
        self._check_time(t)
        Q = np.array(rotation_matrix_2d(float(self.angle(t))))
        p = np.array(self.pivot)
        u = p - Q @ p
        if self.translation is not None:
            u = u + np.atleast_1d(self.translation(t))
        return RigidImage(self.base, tuple(map(tuple, Q)), tuple(u))

    def analytic_rate(self):
        # Chord length under rotation is at most angle * circumradius.
        rate = self.angle.max_speed() * self._circum
        if self.translation is not None:
            rate += self.translation.max_speed()
        return rate


@dataclass(frozen=True)
class PiecewiseFamily(MovingFamily):
    """Concatenation of families; slices are right-continuous at breakpoints
    and discontinuities must be expansions (left slice inside right slice)."""

    pieces: tuple  # ((until, family), ...), untils strictly increasing
    declared_r: float | None = None
    jump_budget: SamplingBudget | None = None
    _r: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.pieces) < 1:
            raise ValueError("piecewise family needs at least one piece")
        pieces = tuple((float(u), fam) for u, fam in self.pieces)
        dims = {fam.dim for _, fam in pieces}
        if len(dims) != 1:
            raise ValueError("piece dimensions differ")
        last = 0.0
        for until, fam in pieces:
            if until <= last:
                raise ValueError("piece breakpoints must be strictly increasing")
            if fam.horizon < until - 1e-12:
                raise ValueError("piece family horizon does not cover its interval")
            last = until
        object.__setattr__(self, "pieces", pieces)
        natural = min(fam.r for _, fam in pieces)
        object.__setattr__(self, "_r", self._validate_declared_r(self.declared_r, natural))
        for t_star, left, right in self._junctions():
            est = excess(left.at(min(t_star, left.horizon)), right.at(t_star),
                         self.jump_budget)
            if est.lower > JUMP_TOL:
                raise ValueError(
                    f"inadmissible jump at t={t_star}: left slice sticks out by {est.lower:.3e}"
                )

    def _junctions(self):
        out = []
        for i in range(len(self.pieces) - 1):
            t_star = self.pieces[i][0]
            out.append((t_star, self.pieces[i][1], self.pieces[i + 1][1]))
        return out

    @property
    def horizon(self):
        return self.pieces[-1][0]

    @property
    def dim(self):
        return self.pieces[0][1].dim

    @property
    def r(self):
        return self._r

    def breakpoints(self):
        return tuple(u for u, _ in self.pieces[:-1])

    def _piece_at(self, t):
        for until, fam in self.pieces[:-1]:
            if t < until:
                return fam
        return self.pieces[-1][1]

    def at(self, t):
        self._check_time(t)
        return self._piece_at(t).at(t)

    def analytic_rate(self):
        rates = [fam.analytic_rate() for _, fam in self.pieces]
        if any(rate is None for rate in rates):
            return None
        return max(rates)


@dataclass(frozen=True)
class StaticFamily(MovingFamily):
    """Constant family C(t) == base."""

    base: ProxSet
    horizon: float
    declared_r: float | None = None
    _r: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        object.__setattr__(self, "_r", self._validate_declared_r(self.declared_r, self.base.r))

    @property
    def dim(self):
        return self.base.dim

    @property
    def r(self):
        return self._r

    def at(self, t):
        self._check_time(t)
        return self.base

    def analytic_rate(self):
        return 0.0


def _sampled_omega(family: MovingFamily, delta: float, budget: SamplingBudget) -> float:
    """Max sampled excess over forward pairs at most delta apart."""
    T = family.horizon
    worst = 0.0
    pair_index = 0
    for sub in (delta, delta / 2.0, delta / 4.0):
        if sub <= 0:
            continue
        starts = list(np.linspace(0.0, max(T - sub, 0.0), 64))
        for t_star in family.breakpoints():
            starts.extend([t_star - sub, t_star - sub / 2.0, t_star])
        for s in starts:
            s = min(max(s, 0.0), T)
            t = min(s + sub, T)
            if t <= s:
                continue
            pair_budget = SamplingBudget(
                count=budget.count,
                hill_steps=budget.hill_steps,
                seed=budget.seed + pair_index,
                region=budget.region,
            )
            pair_index += 1
            est = excess(family.at(s), family.at(t), pair_budget)
            worst = max(worst, est.lower)
    return worst


def estimate_modulus(family: MovingFamily, deltas, budget: SamplingBudget | None = None):
    """Nondecreasing estimates [(delta, omega_hat)], exact when analytic."""
    ds = sorted(float(d) for d in deltas)
    if any(d <= 0 or d > family.horizon for d in ds):
        raise ValueError("deltas must be positive and at most the horizon")
    rate = family.analytic_rate()
    if rate is not None:
        return [(d, rate * d) for d in ds]
    b = budget or SamplingBudget(count=48, hill_steps=20)
    out = []
    running = 0.0
    for d in ds:
        running = max(running, _sampled_omega(family, d, b))
        out.append((d, running))
    return out


def compute_tau(omega: Modulus, r: float, rho0: float, rho: float) -> float:
    """Persistence horizon: largest delta with omega(delta) < min{eta, rho} - margin,
    eta = min{rho0 - rho, r}; over this horizon a ball of radius rho0 inside a
    slice keeps radius rho inside all later slices."""
    if not (0.0 < rho < rho0):
        raise ValueError("require 0 < rho < rho0")
    if r <= 0:
        raise ValueError("require r > 0")
    eta = min(rho0 - rho, r)
    threshold = min(eta, rho) - TAU_MARGIN
    if threshold <= 0:
        raise NoPositiveTau(f"threshold min(eta, rho)={min(eta, rho):.3e} leaves no room")
    T = omega.horizon
    if omega(T) < threshold:
        return T
    lo, hi = 0.0, T
    for _ in range(TAU_BISECTION_ITERS):
        mid = 0.5 * (lo + hi)
        if omega(mid) < threshold:
            lo = mid
        else:
            hi = mid
    if lo <= 0.0:
        raise NoPositiveTau("the modulus exceeds the inner-ball threshold at every scale")
    return lo


def _largest_delta_below(omega: Modulus, eps: float, horizon: float) -> float:
    if omega(horizon) < eps:
        return horizon
    lo, hi = 0.0, horizon
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if omega(mid) < eps:
            lo = mid
        else:
            hi = mid
    if lo <= horizon * 2.0**-55:
        raise ModulusUnavailable(
            f"no step length certifies excess below eps={eps:.3e}"
        )
    return lo


def build_schedule(
    family: MovingFamily,
    horizon: float,
    eps0: float,
    ratio: float,
    levels: int,
    base_resolution: int = 1,
    budget: SamplingBudget | None = None,
) -> RefinementSchedule:
    """Nested dyadic refinement schedule for the family on [0, horizon].

    eps follows the geometric template eps0 * ratio**n; each step length
    delta[n] is found by bisection against the modulus and halved once as a
    safety margin (except when the whole horizon already certifies), and the
    dyadic grid level is the coarsest one with mesh <= delta[n].
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if not (0.0 < ratio < 1.0):
        raise ValueError("eps ratio must lie in (0, 1)")
    if horizon <= 0 or horizon > family.horizon:
        raise ValueError("horizon must be positive and within the family horizon")
    if not (0.0 < eps0 < family.r):
        raise ValueError(f"eps0={eps0} violates 0 < eps0 < r={family.r}")
    omega = family.modulus(budget)
    eps, deltas, ks = [], [], []
    for n in range(levels):
        e = eps0 * ratio**n
        if omega(horizon) < e:
            d = horizon
        else:
            d = _largest_delta_below(omega, e, horizon) / 2.0
        k = 0
        while horizon / 2**k > d:
            k += 1
            if k > 24:
                raise ModulusUnavailable(
                    "certified step length needs a dyadic grid finer than 2^24 intervals"
                )
        if n == 0:
            k = max(k, base_resolution)
        else:
            k = max(k, ks[-1] + 1)
        eps.append(e)
        deltas.append(d)
        ks.append(k)
    grids = tuple(TimeGrid.dyadic(horizon, k) for k in ks)
    return RefinementSchedule(
        eps=tuple(eps),
        delta=tuple(deltas),
        grids=grids,
        r=min(family.r, CONVEX_R_CAP),
        eps0=eps0,
        ratio=ratio,
    )


@dataclass(frozen=True)
class InnerBallCert:
    """Claim that the open ball B_rho(w) stays inside C(t) on a time window."""

    w: tuple
    rho: float
    valid_from: float
    valid_to: float

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.valid_to < self.valid_from:
            raise ValueError("empty validity window")
        object.__setattr__(self, "w", tuple(float(x) for x in self.w))


def verify_inner_ball(
    family: MovingFamily,
    cert: InnerBallCert,
    sphere_samples: int = 100,
    time_samples: int = 50,
    seed: int = 0,
) -> float:
    """Worst containment defect of sampled sphere points of B_rho(w) over the window."""
    rng = np.random.default_rng(seed)
    w = np.array(cert.w)
    dirs = rng.standard_normal((sphere_samples, family.dim))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    times = np.linspace(cert.valid_from, cert.valid_to, time_samples)
    worst = -math.inf
    for t in times:
        slice_t = family.at(float(t))
        for u in dirs:
            worst = max(worst, slice_t.membership_defect(w + cert.rho * u))
    return worst


def validate_analytic_modulus(
    family: MovingFamily,
    pairs: int = 200,
    seed: int = 0,
    budget: SamplingBudget | None = None,
) -> float:
    """Max of sampled_excess - omega(t-s)*(1+1e-6) over random forward pairs;
    nonpositive values are consistent with the declared analytic modulus."""
    rate = family.analytic_rate()
    if rate is None:
        raise ValueError("family has no analytic modulus to validate")
    omega = family.modulus()
    rng = np.random.default_rng(seed)
    b = budget or SamplingBudget(count=48, hill_steps=20)
    worst = -math.inf
    for i in range(pairs):
        s, t = sorted(rng.random(2) * family.horizon)
        if t <= s:
            continue
        pair_budget = SamplingBudget(b.count, b.hill_steps, b.seed + i, b.region)
        est = excess(family.at(s), family.at(t), pair_budget)
        worst = max(worst, est.lower - omega(t - s) * (1.0 + 1e-6))
    return worst
