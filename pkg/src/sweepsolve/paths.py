"""Time-parametrized path descriptors restricted to declared analytic forms.

Only constant, linear (a + b*t) and continuous piecewise-linear paths are
supported, so every moving family built from them carries a certified
one-sided continuity rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import norm


class Path:
    """Scalar- or vector-valued map of time; immutable descriptor."""

    def __call__(self, t: float):
        raise NotImplementedError

    def max_speed(self) -> float:
        raise NotImplementedError

    def max_signed_rate(self) -> float:
        """Largest (most positive) instantaneous rate; scalar paths only."""
        raise NotImplementedError

    def min_signed_rate(self) -> float:
        raise NotImplementedError


def _value(v):
    if np.isscalar(v):
        return float(v)
    return tuple(float(x) for x in v)


@dataclass(frozen=True)
class ConstantPath(Path):
    value: object

    def __post_init__(self):
        object.__setattr__(self, "value", _value(self.value))

    def __call__(self, t):
        if isinstance(self.value, tuple):
            return np.array(self.value)
        return self.value

    def max_speed(self):
        return 0.0

    def max_signed_rate(self):
        return 0.0

    def min_signed_rate(self):
        return 0.0


@dataclass(frozen=True)
class LinearPath(Path):
    """t -> value + rate * t."""

    value: object
    rate: object

    def __post_init__(self):
        v, r = _value(self.value), _value(self.rate)
        if isinstance(v, tuple) != isinstance(r, tuple):
            raise ValueError("value and rate must both be scalars or both vectors")
        if isinstance(v, tuple) and len(v) != len(r):
            raise ValueError("value and rate dimensions differ")
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "rate", r)

    def __call__(self, t):
        if isinstance(self.value, tuple):
            return np.array(self.value) + t * np.array(self.rate)
        return self.value + t * self.rate

    def max_speed(self):
        if isinstance(self.rate, tuple):
            return norm(np.array(self.rate))
        return abs(self.rate)

    def max_signed_rate(self):
        if isinstance(self.rate, tuple):
            raise ValueError("signed rate is defined for scalar paths only")
        return self.rate

    def min_signed_rate(self):
        if isinstance(self.rate, tuple):
            raise ValueError("signed rate is defined for scalar paths only")
        return self.rate


@dataclass(frozen=True)
class PiecewisePath(Path):
    """Continuous concatenation of paths; pieces listed as (until, path).

    Piece i applies on [until_{i-1}, until_i); the last piece also covers its
    right endpoint.  Junction continuity is validated to 1e-9.
    """

    pieces: tuple

    def __post_init__(self):
        if len(self.pieces) < 1:
            raise ValueError("piecewise path needs at least one piece")
        pieces = tuple((float(u), p) for u, p in self.pieces)
        for i in range(1, len(pieces)):
            if pieces[i][0] <= pieces[i - 1][0]:
                raise ValueError("piece breakpoints must be strictly increasing")
            t_star = pieces[i - 1][0]
            left = np.atleast_1d(pieces[i - 1][1](t_star))
            right = np.atleast_1d(pieces[i][1](t_star))
            if norm(left - right) > 1e-9:
                raise ValueError(f"path discontinuity {norm(left - right):.3e} at t={t_star}")
        object.__setattr__(self, "pieces", pieces)

    def _piece(self, t):
        for until, p in self.pieces[:-1]:
            if t < until:
                return p
        return self.pieces[-1][1]

    def __call__(self, t):
        return self._piece(t)(t)

    def max_speed(self):
        return max(p.max_speed() for _, p in self.pieces)

    def max_signed_rate(self):
        return max(p.max_signed_rate() for _, p in self.pieces)

    def min_signed_rate(self):
        return min(p.min_signed_rate() for _, p in self.pieces)
