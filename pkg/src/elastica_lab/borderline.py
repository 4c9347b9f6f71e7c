"""Closed-form transition-layer elastica with a general initial angle.

The layer is the unique monotone solution of |phi'|^2 = 1 - cos(phi) that
starts at a prescribed angle and decays to zero: an arctan-of-exponential
angle profile with curvature -sign * sqrt(2) * sech((s + shift)/sqrt(2)).
Negative initial angles are the x-axis reflection of the positive ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from elastica_lab.geometry import DiscreteCurve, weighted_variation

__all__ = [
    "BorderlineSpec",
    "borderline_angle",
    "borderline_curvature",
    "borderline_energy",
    "borderline_point",
    "sample_layer",
    "shift_for_angle",
]

_SQRT2 = math.sqrt(2.0)


def shift_for_angle(theta: float) -> float:
    """Arc-length shift placing the layer's start at angle theta.

    Solves 4 * arctan(exp(-shift/sqrt(2))) = |theta|; zero exactly at
    |theta| = pi and divergent as theta -> 0 (which raises).
    """
    if theta == 0.0 or abs(theta) > math.pi:
        raise ValueError(f"initial angle must satisfy 0 < |theta| <= pi, got {theta}")
    if abs(theta) == math.pi:
        return 0.0
    return max(0.0, -_SQRT2 * math.log(math.tan(abs(theta) / 4.0)))


@dataclass(frozen=True)
class BorderlineSpec:
    """Initial angle, its arc-length shift, and the reflection sign."""

    theta: float
    shift: float
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 1) or self.sign != (1 if self.theta > 0 else -1):
            raise ValueError("sign must be +-1 and match the sign of theta")
        if not self.shift >= 0.0 or not math.isfinite(self.shift):
            raise ValueError(f"shift must be finite and >= 0, got {self.shift}")
        residual = self.sign * 4.0 * math.atan(math.exp(-self.shift / _SQRT2))
        if abs(residual - self.theta) > 1e-9:
            raise ValueError("shift does not reproduce the initial angle")

    @classmethod
    def from_angle(cls, theta: float) -> "BorderlineSpec":
        return cls(theta, shift_for_angle(theta), 1 if theta > 0 else -1)


def borderline_angle(spec: BorderlineSpec, s):
    """Tangential angle of the layer at arc length s >= 0."""
    s = np.asarray(s, dtype=float)
    val = spec.sign * 4.0 * np.arctan(np.exp(-(s + spec.shift) / _SQRT2))
    return float(val) if val.ndim == 0 else val


def borderline_curvature(spec: BorderlineSpec, s):
    """Signed curvature -sign * sqrt(2) * sech((s + shift)/sqrt(2))."""
    s = np.asarray(s, dtype=float)
    val = -spec.sign * _SQRT2 / np.cosh((s + spec.shift) / _SQRT2)
    return float(val) if val.ndim == 0 else val


def borderline_point(spec: BorderlineSpec, s):
    """Position of the layer at arc length s, starting from the origin.

    Antiderivative of (cos phi, sin phi) in closed form; the tangential
    angle at s is borderline_angle(spec, s).
    """
    s = np.asarray(s, dtype=float)
    a = (s + spec.shift) / _SQRT2
    a0 = spec.shift / _SQRT2
    x = s - 2.0 * _SQRT2 * (np.tanh(a) - math.tanh(a0))
    y = spec.sign * 2.0 * _SQRT2 * (math.cosh(a0) ** -1 - 1.0 / np.cosh(a))
    if x.ndim == 0:
        return np.array([float(x), float(y)])
    return np.stack([x, y], axis=-1)


def borderline_energy(spec: BorderlineSpec, s0: float, s1: float) -> float:
    """Phase energy of the layer over [s0, s1] in closed form.

    Equals |V(phi(s1)) - V(phi(s0))| by the layer's energy identity;
    s1 = inf is allowed (the angle decays to 0).
    """
    if not 0.0 <= s0 <= s1:
        raise ValueError("need 0 <= s0 <= s1")
    v0 = weighted_variation(borderline_angle(spec, s0))
    v1 = 0.0 if math.isinf(s1) else weighted_variation(borderline_angle(spec, s1))
    return abs(v1 - v0)


def sample_layer(spec: BorderlineSpec, window: float, n: int = 4096) -> DiscreteCurve:
    """The layer's initial piece of arc length `window` as a DiscreteCurve."""
    if not window > 0.0:
        raise ValueError("window must be positive")
    s = np.linspace(0.0, window, n + 1)
    return DiscreteCurve(window, borderline_angle(spec, s))
