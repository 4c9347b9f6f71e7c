"""Discrete constant-speed curves and their energies.

A curve is stored as tangential-angle samples on a uniform arc-length grid
(a continuous, unwrapped representative) plus the total length.  Curvature
is the arc-length derivative of the angle, discretized with second-order
central differences (one-sided second order at the two boundary nodes);
all integrals are composite trapezoid so that energies split exactly over
node partitions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BoundaryCondition",
    "DiscreteCurve",
    "EnergyReport",
    "curvature",
    "energies",
    "f_eps_split",
    "reconstruct_positions",
    "reduce_angle",
    "rescale",
    "weighted_variation",
    "winding_number",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class BoundaryCondition:
    """Clamped data: endpoint distance l and tangent angles at both ends."""

    l: float
    theta0: float
    theta1: float

    def __post_init__(self):
        if not self.l > 0.0:
            raise ValueError(f"endpoint distance must be positive, got {self.l}")
        if abs(self.theta0) > math.pi or abs(self.theta1) > math.pi:
            raise ValueError("boundary angles must lie in [-pi, pi]")

    def reflected(self) -> "BoundaryCondition":
        """The x-axis mirror condition (-theta0, -theta1)."""
        return BoundaryCondition(self.l, -self.theta0, -self.theta1)


@dataclass
class DiscreteCurve:
    """Constant-speed planar curve: length and N+1 angle samples."""

    length: float
    theta: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if not self.length > 0.0:
            raise ValueError(f"curve length must be positive, got {self.length}")
        if self.theta.ndim != 1 or self.theta.size < 3:
            raise ValueError("theta must be a 1-d array with at least 3 samples")
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("theta samples must be finite")

    @property
    def n_segments(self) -> int:
        return self.theta.size - 1

    @property
    def h(self) -> float:
        return self.length / self.n_segments

    @property
    def s(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.theta.size)

    def is_resolved(self) -> bool:
        """True when adjacent angle samples stay within pi of each other."""
        return bool(np.max(np.abs(np.diff(self.theta))) < math.pi)

    def copy(self) -> "DiscreteCurve":
        return DiscreteCurve(self.length, self.theta.copy())

    def to_json(self) -> str:
        return json.dumps({"length": self.length, "theta": self.theta.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "DiscreteCurve":
        data = json.loads(text)
        return cls(float(data["length"]), np.asarray(data["theta"], dtype=float))

    @classmethod
    def segment(cls, length: float, n: int = 4096) -> "DiscreteCurve":
        return cls(length, np.zeros(n + 1))


@dataclass(frozen=True)
class EnergyReport:
    """Bending energy B, length L, E_eps = eps^2 B + L, and the phase form."""

    bending: float
    length: float
    e_eps: float
    f_eps: float


def curvature(curve: DiscreteCurve) -> np.ndarray:
    """Nodal signed curvature, O(h^2) everywhere."""
    th = curve.theta
    h = curve.h
    kappa = np.empty_like(th)
    kappa[1:-1] = (th[2:] - th[:-2]) / (2.0 * h)
    kappa[0] = (-3.0 * th[0] + 4.0 * th[1] - th[2]) / (2.0 * h)
    kappa[-1] = (3.0 * th[-1] - 4.0 * th[-2] + th[-3]) / (2.0 * h)
    return kappa


def reconstruct_positions(curve: DiscreteCurve) -> np.ndarray:
    """Positions of all nodes, starting from the origin.

    Composite-trapezoid integral of (cos theta, sin theta); global error
    O((L/N)^2).
    """
    h = curve.h
    cx, sy = np.cos(curve.theta), np.sin(curve.theta)
    pts = np.empty((curve.theta.size, 2))
    pts[0] = 0.0
    pts[1:, 0] = np.cumsum(0.5 * h * (cx[1:] + cx[:-1]))
    pts[1:, 1] = np.cumsum(0.5 * h * (sy[1:] + sy[:-1]))
    return pts


def endpoint(curve: DiscreteCurve) -> np.ndarray:
    """Trapezoid endpoint position without materializing all nodes."""
    h = curve.h
    w = np.ones(curve.theta.size)
    w[0] = w[-1] = 0.5
    return h * np.array(
        [np.dot(w, np.cos(curve.theta)), np.dot(w, np.sin(curve.theta))]
    )


def energies(curve: DiscreteCurve, eps: float) -> EnergyReport:
    """Energy report at bending scale eps > 0."""
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    h = curve.h
    kap2 = curvature(curve) ** 2
    bending = float(np.trapezoid(kap2, dx=h))
    f_eps = float(
        np.trapezoid(eps * kap2 + (1.0 - np.cos(curve.theta)) / eps, dx=h)
    )
    return EnergyReport(
        bending=bending,
        length=curve.length,
        e_eps=eps * eps * bending + curve.length,
        f_eps=f_eps,
    )


def f_eps_split(curve: DiscreteCurve, eps: float, cuts) -> np.ndarray:
    """Phase-form energy of the parts cut at the given interior node indices.

    The nodal integrand is computed once on the whole curve, so the part
    energies sum to the total exactly (same quadrature) and each part is
    nonnegative.
    """
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    g = eps * curvature(curve) ** 2 + (1.0 - np.cos(curve.theta)) / eps
    bounds = [0, *sorted(int(c) for c in cuts), curve.theta.size - 1]
    h = curve.h
    return np.array(
        [
            float(np.trapezoid(g[a : b + 1], dx=h))
            for a, b in zip(bounds[:-1], bounds[1:])
        ]
    )


def reduce_angle(theta):
    """Representative in [-pi, pi) of theta modulo 2*pi."""
    return (np.asarray(theta) + math.pi) % (2.0 * math.pi) - math.pi


def weighted_variation(theta):
    """The potential V(theta): integral of 2 sqrt(1 - cos phi) from 0.

    Strictly increasing, odd, C^1; equals sign(r) * 8 sqrt(2) sin^2(r/4)
    plus 8 sqrt(2) per full period, with r the reduced angle.
    """
    theta = np.asarray(theta, dtype=float)
    m = np.floor((theta + math.pi) / (2.0 * math.pi))
    r = theta - 2.0 * math.pi * m
    val = np.sign(r) * 8.0 * _SQRT2 * np.sin(r / 4.0) ** 2 + 8.0 * _SQRT2 * m
    return float(val) if val.ndim == 0 else val


def winding_number(curve: DiscreteCurve, bc: BoundaryCondition) -> int:
    """Integer class (total turning + theta0 - theta1) / 2 pi.

    The curve must carry the boundary angles of bc modulo 2*pi; a result
    further than 1e-6 from an integer signals an inconsistent pair.
    """
    for sample, target, name in (
        (curve.theta[0], bc.theta0, "theta0"),
        (curve.theta[-1], bc.theta1, "theta1"),
    ):
        gap = reduce_angle(sample - target)
        if min(abs(gap), 2.0 * math.pi - abs(gap)) > 1e-6:
            raise ValueError(f"curve does not satisfy {name} modulo 2 pi")
    w = ((curve.theta[-1] - curve.theta[0]) + bc.theta0 - bc.theta1) / (
        2.0 * math.pi
    )
    m = round(w)
    if abs(w - m) > 1e-6:
        raise ValueError(f"winding functional {w} is not near an integer")
    return int(m)


def rescale(curve: DiscreteCurve, eps: float, window: float) -> DiscreteCurve:
    """Zoom: the initial piece of arc length `window`, in units of eps.

    Angles are resampled by linear interpolation; curvature transforms as
    kappa_hat(s_hat) = eps * kappa(eps * s_hat).
    """
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if window > curve.length * (1.0 + 1e-12):
        raise ValueError(
            f"window {window} exceeds curve length {curve.length}"
        )
    window = min(window, curve.length)
    n = curve.n_segments
    s_new = np.linspace(0.0, window, n + 1)
    theta_new = np.interp(s_new, curve.s, curve.theta)
    return DiscreteCurve(window / eps, theta_new)
