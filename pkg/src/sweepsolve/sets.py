"""Static prox-regular set primitives.

Each shape supports exact distance, single-valued projection inside its tube
of radius r, containment via the defining inequalities, normal-cone residual
checks and seeded member sampling.  Convex shapes carry r = inf and bypass
curvature terms entirely; the ball complement is the nonconvex primitive with
r equal to its radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AtSingularity,
    DidNotConverge,
    DimensionMismatch,
    EmptyIntersection,
    NotAMember,
    OutsideTube,
)
from .geometry import norm

# Absolute tolerance on the defining inequalities; distances below it snap to 0
# so the catching-up containment invariant stays testable under rounding.
CONTAINMENT_TOL = 1e-10

DYKSTRA_TOL = 1e-13
DYKSTRA_MAX_SWEEPS = 100_000

SAMPLING_MAX_ATTEMPTS = 1_000_000


class ProxSet:
    """Common interface: immutable value, pure operations."""

    dim: int
    r: float

    def membership_defect(self, y: np.ndarray) -> float:
        """Worst violation of the defining inequalities (<= 0 means inside)."""
        raise NotImplementedError

    def _raw_distance(self, y: np.ndarray) -> float:
        raise NotImplementedError

    def _raw_project(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def bounding_region(self, pad: float = 0.5):
        """Axis-aligned window enclosing (a representative part of) the set."""
        raise NotImplementedError

    def _check_dim(self, y: np.ndarray):
        if y.shape != (self.dim,):
            raise DimensionMismatch(f"expected dim {self.dim}, got shape {y.shape}")

    def contains(self, y, tol: float = CONTAINMENT_TOL) -> bool:
        y = np.asarray(y, dtype=float)
        self._check_dim(y)
        return self.membership_defect(y) <= tol

    def distance(self, y) -> float:
        y = np.asarray(y, dtype=float)
        self._check_dim(y)
        if self.membership_defect(y) <= CONTAINMENT_TOL:
            return 0.0
        return self._raw_distance(y)

    def project(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        self._check_dim(y)
        if self.membership_defect(y) <= CONTAINMENT_TOL:
            return y.copy()
        d = self._raw_distance(y)
        if d >= self.r:
            self._tube_error(y, d)
        return self._raw_project(y)

    def _tube_error(self, y, d):
        raise OutsideTube(
            f"distance {d:.6g} >= r {self.r:.6g}: projection not certified unique",
            distance=d,
            radius=self.r,
        )


def _ro(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class HalfSpace(ProxSet):
    """{x : <normal, x> <= offset} with a unit normal."""

    normal: tuple
    offset: float
    _a: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = np.array(self.normal, dtype=float)
        n = norm(a)
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"half-space normal must be unit (|a|={n!r}); use halfspace()")
        object.__setattr__(self, "normal", tuple(float(x) for x in a))
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "_a", _ro(a))

    @property
    def dim(self) -> int:
        return len(self.normal)

    @property
    def r(self) -> float:
        return math.inf

    def membership_defect(self, y):
        return float(self._a @ y) - self.offset

    def _raw_distance(self, y):
        return max(float(self._a @ y) - self.offset, 0.0)

    def _raw_project(self, y):
        excess = max(float(self._a @ y) - self.offset, 0.0)
        return y - excess * self._a

    def boundary_anchor(self) -> np.ndarray:
        return self.offset * self._a

    def bounding_region(self, pad: float = 0.5):
        anchor = self.boundary_anchor()
        half = 1.0 + pad
        return anchor - half, anchor + half


def halfspace(normal, offset: float) -> HalfSpace:
    """Build a half-space, normalizing the normal (and scaling the offset)."""
    a = np.asarray(normal, dtype=float)
    n = norm(a)
    if n == 0.0:
        raise ValueError("half-space normal must be nonzero")
    if abs(n - 1.0) <= 1e-12:
        # Already unit: avoid perturbing the stored floats (round-trip stability).
        return HalfSpace(tuple(a), float(offset))
    return HalfSpace(tuple(a / n), float(offset) / n)


@dataclass(frozen=True)
class Ball(ProxSet):
    center: tuple
    radius: float
    _c: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")
        c = np.array(self.center, dtype=float)
        object.__setattr__(self, "center", tuple(float(x) for x in c))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "_c", _ro(c))

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def r(self) -> float:
        return math.inf

    def membership_defect(self, y):
        return norm(y - self._c) - self.radius

    def _raw_distance(self, y):
        return max(norm(y - self._c) - self.radius, 0.0)

    def _raw_project(self, y):
        d = y - self._c
        return self._c + self.radius * d / norm(d)

    def bounding_region(self, pad: float = 0.5):
        half = self.radius + pad
        return self._c - half, self._c + half


@dataclass(frozen=True)
class Box(ProxSet):
    lo: tuple
    hi: tuple
    _lo: np.ndarray = field(init=False, repr=False, compare=False)
    _hi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float)
        hi = np.array(self.hi, dtype=float)
        if lo.shape != hi.shape or np.any(lo >= hi):
            raise ValueError("box requires lo < hi componentwise")
        object.__setattr__(self, "lo", tuple(float(x) for x in lo))
        object.__setattr__(self, "hi", tuple(float(x) for x in hi))
        object.__setattr__(self, "_lo", _ro(lo))
        object.__setattr__(self, "_hi", _ro(hi))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def r(self) -> float:
        return math.inf

    def membership_defect(self, y):
        return float(np.max(np.maximum(self._lo - y, y - self._hi)))

    def _raw_distance(self, y):
        return norm(y - np.clip(y, self._lo, self._hi))

    def _raw_project(self, y):
        return np.clip(y, self._lo, self._hi)

    def bounding_region(self, pad: float = 0.5):
        return self._lo - pad, self._hi + pad


@dataclass(frozen=True)
class Polytope(ProxSet):
    """Intersection of half-spaces with a stored strictly feasible interior point."""

    faces: tuple
    interior: tuple
    _interior: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.faces) < 1:
            raise ValueError("polytope needs at least one face")
        dims = {f.dim for f in self.faces}
        if len(dims) != 1:
            raise ValueError("polytope faces must share a dimension")
        p = np.array(self.interior, dtype=float)
        if p.shape != (dims.pop(),):
            raise ValueError("interior point has wrong dimension")
        worst = max(f.membership_defect(p) for f in self.faces)
        if worst >= 0:
            raise ValueError(f"interior point is not strictly feasible (defect {worst:.3e})")
        object.__setattr__(self, "faces", tuple(self.faces))
        object.__setattr__(self, "interior", tuple(float(x) for x in p))
        object.__setattr__(self, "_interior", _ro(p))

    @property
    def dim(self) -> int:
        return self.faces[0].dim

    @property
    def r(self) -> float:
        return math.inf

    def membership_defect(self, y):
        return max(f.membership_defect(y) for f in self.faces)

    def _dykstra(self, y):
        """Cyclic projections with correction vectors: exact limit for convex intersections."""
        x = y.copy()
        corrections = [np.zeros_like(y) for _ in self.faces]
        for _ in range(DYKSTRA_MAX_SWEEPS):
            moved = 0.0
            for i, f in enumerate(self.faces):
                z = x + corrections[i]
                x_new = f._raw_project(z)
                corrections[i] = z - x_new
                moved = max(moved, norm(x_new - x))
                x = x_new
            if moved < DYKSTRA_TOL and self.membership_defect(x) <= CONTAINMENT_TOL:
                return x
        raise DidNotConverge(
            f"cyclic projection did not settle within {DYKSTRA_MAX_SWEEPS} sweeps"
        )

    def _raw_distance(self, y):
        return norm(y - self._dykstra(y))

    def _raw_project(self, y):
        return self._dykstra(y)

    def vertices_2d(self) -> list:
        """Vertices of a 2-D polytope via pairwise face intersections."""
        if self.dim != 2:
            raise ValueError("vertex enumeration is implemented for dim 2 only")
        verts = []
        m = len(self.faces)
        for i in range(m):
            for j in range(i + 1, m):
                A = np.array([self.faces[i]._a, self.faces[j]._a])
                b = np.array([self.faces[i].offset, self.faces[j].offset])
                if abs(np.linalg.det(A)) < 1e-12:
                    continue
                v = np.linalg.solve(A, b)
                if self.membership_defect(v) <= 1e-9:
                    verts.append(v)
        return verts

    def bounding_region(self, pad: float = 0.5):
        verts = self.vertices_2d() if self.dim == 2 else []
        if verts:
            vs = np.array(verts)
            return vs.min(axis=0) - pad, vs.max(axis=0) + pad
        half = 1.0 + pad
        return self._interior - half, self._interior + half


@dataclass(frozen=True)
class BallComplement(ProxSet):
    """{x : |x - center| >= radius}; prox-regular with r equal to the radius."""

    center: tuple
    radius: float
    _c: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("excluded-ball radius must be positive")
        c = np.array(self.center, dtype=float)
        object.__setattr__(self, "center", tuple(float(x) for x in c))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "_c", _ro(c))

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def r(self) -> float:
        return self.radius

    def membership_defect(self, y):
        return self.radius - norm(y - self._c)

    def _raw_distance(self, y):
        return max(self.radius - norm(y - self._c), 0.0)

    def _raw_project(self, y):
        d = y - self._c
        return self._c + self.radius * d / norm(d)

    def _tube_error(self, y, d):
        if norm(y - self._c) == 0.0:
            # d == radius == r exactly: every sphere point is nearest.
            raise AtSingularity(
                "projection from the excluded-ball center is multi-valued",
                distance=self.radius,
                radius=self.r,
            )
        super()._tube_error(y, d)

    def bounding_region(self, pad: float = 0.5):
        half = 2.5 * self.radius + pad
        return self._c - half, self._c + half


@dataclass(frozen=True)
class RigidImage(ProxSet):
    """Q*base + u for an orthogonal Q; inherits the base prox-regularity radius."""

    base: ProxSet
    rotation: tuple
    translation: tuple
    _Q: np.ndarray = field(init=False, repr=False, compare=False)
    _u: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        Q = np.array(self.rotation, dtype=float)
        u = np.array(self.translation, dtype=float)
        d = self.base.dim
        if Q.shape != (d, d) or u.shape != (d,):
            raise ValueError("rotation/translation dimensions do not match the base")
        if norm((Q.T @ Q - np.eye(d)).ravel()) > 1e-10:
            raise ValueError("rotation matrix is not orthogonal")
        object.__setattr__(self, "rotation", tuple(tuple(float(x) for x in row) for row in Q))
        object.__setattr__(self, "translation", tuple(float(x) for x in u))
        object.__setattr__(self, "_Q", _ro(Q))
        object.__setattr__(self, "_u", _ro(u))

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def r(self) -> float:
        return self.base.r

    def _pull(self, y):
        return self._Q.T @ (y - self._u)

    def membership_defect(self, y):
        return self.base.membership_defect(self._pull(y))

    def _raw_distance(self, y):
        return self.base._raw_distance(self._pull(y))

    def _raw_project(self, y):
        return self._Q @ self.base._raw_project(self._pull(y)) + self._u

    def bounding_region(self, pad: float = 0.5):
        lo, hi = self.base.bounding_region(pad)
        corners = np.array([[lo[i] if (k >> i) & 1 == 0 else hi[i] for i in range(self.dim)]
                            for k in range(2**self.dim)])
        moved = corners @ self._Q.T + self._u
        return moved.min(axis=0), moved.max(axis=0)


def rotation_matrix_2d(angle: float) -> tuple:
    c, s = math.cos(angle), math.sin(angle)
    return ((c, -s), (s, c))


@dataclass(frozen=True)
class NormalResidualReport:
    """Worst hypo-monotonicity defect of a candidate normal over sampled members."""

    worst_residual: float
    worst_witness: np.ndarray
    samples: int


def normal_residual(s: ProxSet, x, n, z_samples) -> NormalResidualReport:
    """Max over z of <n, z-x> - (|n|/(2r))|z-x|^2; convex shapes drop the curvature term.

    A nonpositive worst residual is consistent with n being a proximal normal
    at x.  Raises NotAMember when x (or any sample) fails containment.
    """
    x = np.asarray(x, dtype=float)
    n = np.asarray(n, dtype=float)
    s._check_dim(x)
    if not s.contains(x):
        raise NotAMember(f"x has containment defect {s.membership_defect(x):.3e}")
    z = np.asarray(z_samples, dtype=float)
    if z.ndim == 1:
        z = z[None, :]
    for zi in z:
        if not s.contains(zi):
            raise NotAMember(f"sample has containment defect {s.membership_defect(zi):.3e}")
    diffs = z - x
    lin = diffs @ n
    if math.isinf(s.r):
        residuals = lin
    else:
        residuals = lin - (norm(n) / (2.0 * s.r)) * np.einsum("ij,ij->i", diffs, diffs)
    worst = int(np.argmax(residuals))
    return NormalResidualReport(float(residuals[worst]), z[worst].copy(), len(z))


def sample_points(s: ProxSet, region, count: int, seed: int) -> list:
    """Seeded member samples in an axis-aligned window.

    Uniform draws that land in the set are kept as-is; rejected draws are
    projected onto the set so boundaries are represented.  Raises
    EmptyIntersection when rejection sampling finds no direct member.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    lo = np.asarray(region[0], dtype=float)
    hi = np.asarray(region[1], dtype=float)
    if lo.shape != (s.dim,) or hi.shape != (s.dim,) or np.any(lo >= hi):
        raise ValueError("region must be a nonempty axis-aligned box of matching dimension")
    rng = np.random.default_rng(seed)
    points: list = []
    direct_hits = 0
    attempts = 0
    while (len(points) < count or direct_hits == 0) and attempts < SAMPLING_MAX_ATTEMPTS:
        attempts += 1
        p = lo + rng.random(s.dim) * (hi - lo)
        if s.contains(p):
            direct_hits += 1
            if len(points) < count:
                points.append(p)
        else:
            try:
                projected = s.project(p)
            except OutsideTube:
                continue
            if len(points) < count:
                points.append(projected)
    if direct_hits == 0:
        raise EmptyIntersection(
            f"no member found in the region after {attempts} rejection attempts"
        )
    if len(points) < count:
        raise EmptyIntersection("sampling budget exhausted before reaching the requested count")
    return points[:count]
