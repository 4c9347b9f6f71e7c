"""Convex reformulation on monotone-angle curves.

In Gauss-map coordinates (radius of curvature rho as a function of the
tangential angle phi) the clamped problem becomes the strictly convex
program: minimize the integral of eps^2/rho + rho over [theta0, theta1]
subject to the two linear endpoint constraints
integral rho cos(phi) = l and integral rho sin(phi) = 0.
Pointwise stationarity of the Lagrangian gives the closed form

    rho(phi) = eps / sqrt(1 + a cos(phi) + b sin(phi)),

reducing the program to a damped 2-variable Newton root-find.  The
derivation is unit-tested against a direct projected-gradient solve of
the discretized convex program.

Numerical care: for small eps the radicand minimum wmin = 1 - hypot(a, b)
is exponentially small (the curve is straight in the middle and rho blows
up there), so (a, b) doubles cannot represent the solution and uniform
grids cannot see the rho spike.  Newton therefore runs in (ln wmin,
spike direction) coordinates, the radicand is evaluated cancellation-free
as wmin + 2 (1 - wmin) sin^2((phi - spike)/2) about the folded spike, and
every integral uses a composite Gauss rule on a spike-graded grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from elastica_lab.geometry import BoundaryCondition, DiscreteCurve

__all__ = ["ConvexInfeasibleError", "RhoProfile", "rho_to_curve", "solve_convex"]

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(16)
_WMIN_FLOOR = 1e-60


class ConvexInfeasibleError(RuntimeError):
    """The monotone-angle class is infeasible or degenerate for (bc, eps)."""


def _fold_spike(phi0, lo, hi):
    # location of the radicand minimum, folded next to the interval
    s = phi0 + math.pi
    mid = 0.5 * (lo + hi)
    return s - 2.0 * math.pi * round((s - mid) / (2.0 * math.pi))


def _weight(phi, wmin, spike):
    q = np.sin(0.5 * (np.asarray(phi, dtype=float) - spike))
    return wmin + 2.0 * (1.0 - wmin) * q * q


def _graded_nodes(lo, hi, wmin, spike, base=64):
    nodes = list(np.linspace(lo, hi, base + 1))
    if lo < spike < hi:
        w_eff = max(wmin, _WMIN_FLOOR)
        r_eff = max(1.0 - wmin, 1e-30)
        width = math.sqrt(2.0 * w_eff / r_eff)
        for lev in width * 2.0 ** np.arange(-12.0, 44.0):
            if lev > hi - lo:
                break
            for side in (spike - lev, spike + lev):
                if lo < side < hi:
                    nodes.append(side)
        nodes.append(spike)
    return np.unique(np.asarray(nodes))


def _integrate(f, nodes):
    half = 0.5 * np.diff(nodes)
    mids = nodes[:-1, None] + half[:, None] * (1.0 + _GAUSS_X[None, :])
    return float(np.sum(half * (f(mids) @ _GAUSS_W)))


@dataclass
class RhoProfile:
    """Radius-of-curvature samples on the uniform angle grid theta0 -> theta1.

    (a, b) are the stationarity multipliers; rho holds uniform samples for
    export and sample-level work, while energy/constraint evaluations use
    the closed form on the spike-graded grid.
    """

    theta0: float
    theta1: float
    a: float
    b: float
    rho: np.ndarray = field(repr=False)
    eps: float = 0.0
    wmin: float | None = None  # exact radicand minimum when known

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        if self.theta0 == self.theta1:
            raise ValueError("need theta0 != theta1")
        if np.any(self.rho <= 0.0):
            raise ValueError("rho samples must be positive")
        if self.wmin is None:
            self.wmin = 1.0 - math.hypot(self.a, self.b)

    @property
    def phi(self) -> np.ndarray:
        return np.linspace(self.theta0, self.theta1, self.rho.size)

    @property
    def dphi(self) -> float:
        return abs(self.theta1 - self.theta0) / (self.rho.size - 1)

    def _frame(self):
        lo, hi = sorted((self.theta0, self.theta1))
        spike = _fold_spike(math.atan2(self.b, self.a), lo, hi)
        return lo, hi, spike

    def weight(self, phi):
        """Stationarity radicand 1 + a cos(phi) + b sin(phi), cancellation-free."""
        _, _, spike = self._frame()
        return _weight(phi, self.wmin, spike)

    def objective(self) -> float:
        """Value of the convex functional (equals E_eps of the curve)."""
        lo, hi, spike = self._frame()
        nodes = _graded_nodes(lo, hi, self.wmin, spike)
        w = lambda p: _weight(p, self.wmin, spike)
        return _integrate(
            lambda p: self.eps * np.sqrt(w(p)) + self.eps / np.sqrt(w(p)), nodes
        )

    def constraint_residuals(self, l: float) -> tuple[float, float]:
        lo, hi, spike = self._frame()
        nodes = _graded_nodes(lo, hi, self.wmin, spike)
        rho = lambda p: self.eps / np.sqrt(_weight(p, self.wmin, spike))
        cx = _integrate(lambda p: rho(p) * np.cos(p), nodes)
        cy = _integrate(lambda p: rho(p) * np.sin(p), nodes)
        return cx - l, cy

    def to_json(self) -> str:
        return json.dumps(
            {
                "theta0": self.theta0,
                "theta1": self.theta1,
                "a": self.a,
                "b": self.b,
                "rho": self.rho.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str, eps: float = 0.0) -> "RhoProfile":
        data = json.loads(text)
        return cls(
            float(data["theta0"]),
            float(data["theta1"]),
            float(data["a"]),
            float(data["b"]),
            np.asarray(data["rho"], dtype=float),
            eps,
        )


def _interval_feasible(lo, hi, wmin, spike):
    if _weight(lo, wmin, spike) <= 0.0 or _weight(hi, wmin, spike) <= 0.0:
        return False
    return not (lo < spike < hi) or wmin > 0.0


def _newton_system(lo, hi, wmin, spike, eps, l, coords):
    """Constraint vector and Jacobian in the requested coordinates."""
    nodes = _graded_nodes(lo, hi, wmin, spike)

    def w(p):
        return _weight(p, wmin, spike)

    g = np.array(
        [
            _integrate(lambda p: eps / np.sqrt(w(p)) * np.cos(p), nodes) - l,
            _integrate(lambda p: eps / np.sqrt(w(p)) * np.sin(p), nodes),
        ]
    )
    if coords == "ab":
        dw1 = np.cos
        dw2 = np.sin
    else:  # (ln wmin, spike position)
        dw1 = lambda p: wmin * np.cos(p - spike)
        dw2 = lambda p: -(1.0 - wmin) * np.sin(p - spike)
    jac = np.empty((2, 2))
    for col, dw in enumerate((dw1, dw2)):
        for row, trig in enumerate((np.cos, np.sin)):
            jac[row, col] = _integrate(
                lambda p: -0.5 * eps * w(p) ** -1.5 * dw(p) * trig(p), nodes
            )
    return g, jac


def solve_convex(
    bc: BoundaryCondition,
    eps: float,
    m: int = 4096,
    start: tuple[float, float] = (0.0, 0.0),
) -> RhoProfile:
    """Unique monotone-angle minimizer via damped Newton.

    Raises ConvexInfeasibleError when the positivity domain collapses or
    Newton fails to converge within 100 damped steps.
    """
    if bc.theta0 == bc.theta1:
        raise ValueError("convex solve needs theta0 != theta1")
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    lo, hi = sorted((bc.theta0, bc.theta1))
    tol = 1e-11 * max(1.0, bc.l)

    r0 = math.hypot(*start)
    wmin = 1.0 - r0
    spike = _fold_spike(math.atan2(start[1], start[0]), lo, hi)
    if not _interval_feasible(lo, hi, wmin, spike):
        raise ConvexInfeasibleError("starting point violates positivity")

    for _ in range(100):
        # far from the unit circle, Newton in (a, b) is well conditioned;
        # close to it, the constraints depend logarithmically on the
        # radicand minimum, so switch to (ln wmin, spike) coordinates
        coords = "ab" if (wmin > 0.3 or wmin <= 0.0) else "logw"
        g, jac = _newton_system(lo, hi, wmin, spike, eps, bc.l, coords)
        if max(abs(g[0]), abs(g[1])) <= tol:
            break
        scale = np.maximum(np.abs(jac).max(axis=0), 1e-300)
        try:
            step = np.linalg.solve(jac / scale, -g) / scale
        except np.linalg.LinAlgError as exc:
            raise ConvexInfeasibleError("singular Newton system") from exc

        gnorm = np.linalg.norm(g)
        t = 1.0
        for _damp in range(60):
            if coords == "ab":
                a_new = (1.0 - wmin) * math.cos(spike - math.pi) + t * step[0]
                b_new = (1.0 - wmin) * math.sin(spike - math.pi) + t * step[1]
                wmin_new = 1.0 - math.hypot(a_new, b_new)
                spike_new = _fold_spike(math.atan2(b_new, a_new), lo, hi)
            else:
                wmin_new = min(
                    1.0,
                    max(
                        _WMIN_FLOOR,
                        wmin * math.exp(max(-200.0, min(200.0, t * step[0]))),
                    ),
                )
                spike_new = spike + t * step[1]
            if _interval_feasible(lo, hi, wmin_new, spike_new):
                g_new, _ = _newton_system(
                    lo, hi, wmin_new, spike_new, eps, bc.l, coords
                )
                if np.linalg.norm(g_new) < gnorm:
                    break
            t *= 0.5
        else:
            raise ConvexInfeasibleError(
                "positivity domain collapsed during Newton damping"
            )
        wmin, spike = wmin_new, spike_new
    else:
        raise ConvexInfeasibleError("Newton did not converge in 100 damped steps")

    phi0 = spike - math.pi
    a = (1.0 - wmin) * math.cos(phi0)
    b = (1.0 - wmin) * math.sin(phi0)
    phi = np.linspace(bc.theta0, bc.theta1, m + 1)
    rho = eps / np.sqrt(_weight(phi, wmin, spike))
    return RhoProfile(bc.theta0, bc.theta1, a, b, rho, eps, wmin=wmin)


def rho_to_curve(profile: RhoProfile, n: int = 4096) -> DiscreteCurve:
    """Restore the strictly monotone-angle curve from its rho profile.

    Arc length is the cumulative integral of rho over the angle; angle
    samples are obtained by inverting the strictly increasing s(phi) onto
    a uniform arc-length grid.  Profiles matching the stationary closed
    form are integrated on the spike-graded grid so the restoration stays
    accurate when rho is sharply peaked; other sample sets fall back to
    the trapezoid of the stored samples.
    """
    lo, hi, spike = profile._frame()
    phi_s = profile.phi
    analytic = profile.eps > 0.0 and np.allclose(
        profile.rho,
        profile.eps
        / np.sqrt(np.maximum(_weight(phi_s, profile.wmin, spike), 1e-300)),
        rtol=1e-9,
        atol=0.0,
    )
    descending = profile.theta1 < profile.theta0

    if analytic:
        grid = _graded_nodes(lo, hi, profile.wmin, spike, base=profile.rho.size - 1)
        half = 0.5 * np.diff(grid)
        mids = grid[:-1, None] + half[:, None] * (1.0 + _GAUSS_X[None, :])
        vals = profile.eps / np.sqrt(_weight(mids, profile.wmin, spike))
        seg = half * (vals @ _GAUSS_W)
        s_tab = np.concatenate([[0.0], np.cumsum(seg)])
        phi_tab = grid
        if descending:  # traverse from theta0 down to theta1
            s_tab = s_tab[-1] - s_tab[::-1]
            phi_tab = phi_tab[::-1]
    else:
        dphi = profile.dphi
        seg = 0.5 * dphi * (profile.rho[1:] + profile.rho[:-1])
        s_tab = np.concatenate([[0.0], np.cumsum(seg)])
        phi_tab = phi_s

    total = float(s_tab[-1])
    s_new = np.linspace(0.0, total, n + 1)
    theta = np.interp(s_new, s_tab, phi_tab)
    theta[0], theta[-1] = profile.theta0, profile.theta1
    return DiscreteCurve(total, theta)
