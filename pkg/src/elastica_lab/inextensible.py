"""Fixed-length bending minimization through the eps <-> length dictionary.

The length of the free-length global minimizer is nondecreasing in eps,
so hitting a prescribed length is a bisection in eps; the curve found
there also minimizes the bending energy at its own length.  Straightening
sweeps solve at the enlarged endpoint distance and dilate back, recording
(L - l) / eps_tilde against the closed-form limit coefficient.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from elastica_lab.diagnostics import count_inflections, has_self_intersection
from elastica_lab.geometry import BoundaryCondition, DiscreteCurve, energies
from elastica_lab.solve_extensible import SolveOptions, minimize_extensible

__all__ = [
    "LengthJumpError",
    "LengthRow",
    "LengthTable",
    "SweepRow",
    "dilate",
    "length_of_min",
    "measure_length",
    "solve_inextensible",
    "straightening_sweep",
]


class LengthJumpError(RuntimeError):
    """The target length falls inside a jump of the length function.

    Carries the two nearest attained (eps, length) pairs.
    """

    def __init__(self, below, above):
        self.below = below
        self.above = above
        super().__init__(
            "non-attained length; nearest pair returned: "
            f"eps={below[0]} -> L={below[1]}, eps={above[0]} -> L={above[1]}"
        )


@dataclass
class LengthRow:
    eps: float
    length: float
    energy: float
    curve: DiscreteCurve
    tie_lengths: list = field(default_factory=list)


@dataclass
class LengthTable:
    """Rows of (eps, minimizer length), kept sorted and monotone."""

    rows: list = field(default_factory=list)

    def add(self, row: LengthRow):
        self.rows.append(row)
        self.rows.sort(key=lambda r: r.eps)
        self.validate()

    def validate(self):
        for a, b in zip(self.rows[:-1], self.rows[1:]):
            if b.length < a.length - 1e-8:
                raise ValueError(
                    "length table is not nondecreasing "
                    f"(L({a.eps})={a.length} > L({b.eps})={b.length}); "
                    "a global solve likely failed"
                )


def measure_length(
    bc: BoundaryCondition, eps: float, opts: SolveOptions | None = None
) -> LengthRow:
    """Length of the solved global minimizer, with energy-tie lengths."""
    curve, cert = minimize_extensible(bc, eps, opts)
    ties = []
    if cert.ties:
        warnings.warn(
            f"energy ties at eps={eps}: the length function may be multi-valued"
        )
    return LengthRow(eps, curve.length, cert.energy.e_eps, curve, ties)


def length_of_min(
    bc: BoundaryCondition, eps: float, opts: SolveOptions | None = None
) -> float:
    return measure_length(bc, eps, opts).length


def dilate(curve: DiscreteCurve, factor: float) -> DiscreteCurve:
    """Uniform dilation: length scales by factor, angles unchanged."""
    if not factor > 0.0:
        raise ValueError(f"dilation factor must be positive, got {factor}")
    return DiscreteCurve(curve.length * factor, curve.theta.copy())


def _quick_opts(opts: SolveOptions) -> SolveOptions:
    return SolveOptions(
        **{**vars(opts), "winding_classes": (0,), "reflections": False}
    )


class _LengthBisector:
    """Shared warm-start cache for repeated length evaluations in eps."""

    def __init__(self, bc, opts):
        self.bc = bc
        self.opts = opts
        self.quick = _quick_opts(opts)
        self.cache = []  # (eps, curve), kept sorted by eps

    def length_at(self, eps):
        warm = None
        if self.cache:
            warm = min(self.cache, key=lambda t: abs(t[0] - eps))[1]
        curve, _ = minimize_extensible(self.bc, eps, self.quick, initial=warm)
        self.cache.append((eps, curve))
        return curve.length, curve

    def solve(self, target, tol):
        bc = self.bc
        lo, hi = 1e-4 * bc.l, 0.5 * bc.l
        len_lo, curve_lo = self.length_at(lo)
        len_hi, curve_hi = self.length_at(hi)
        for _ in range(60):
            if len_hi >= target:
                break
            hi *= 2.0
            len_hi, curve_hi = self.length_at(hi)
        for _ in range(60):
            if len_lo <= target:
                break
            lo *= 0.5
            len_lo, curve_lo = self.length_at(lo)
        if not len_lo <= target <= len_hi:
            raise RuntimeError("could not bracket the target length")

        # regula falsi with bisection fallback: the length is smooth and
        # monotone between jumps, so secant steps converge superlinearly
        for it in range(200):
            if abs(len_lo - target) <= tol:
                return lo, curve_lo
            if abs(len_hi - target) <= tol:
                return hi, curve_hi
            if hi - lo <= 1e-14 * max(1.0, lo):
                raise LengthJumpError((lo, len_lo), (hi, len_hi))
            if it % 3 == 2 or len_hi == len_lo:
                mid = 0.5 * (lo + hi)
            else:
                mid = lo + (target - len_lo) * (hi - lo) / (len_hi - len_lo)
                width = hi - lo
                mid = min(max(mid, lo + 1e-3 * width), hi - 1e-3 * width)
            len_mid, curve_mid = self.length_at(mid)
            if len_mid < target:
                lo, len_lo, curve_lo = mid, len_mid, curve_mid
            else:
                hi, len_hi, curve_hi = mid, len_mid, curve_mid
        raise RuntimeError("bisection failed to converge")


def solve_inextensible(
    L: float,
    bc: BoundaryCondition,
    tol: float = 1e-8,
    opts: SolveOptions | None = None,
):
    """Fixed-length minimizer of the bending energy via eps bisection.

    Returns (eps_tilde, curve): the curve whose free-length solve at
    eps_tilde has length within tol of L; it minimizes bending among
    curves of its length by the dictionary between the two problems.
    The buckling data theta0 = theta1 = 0 is rejected.
    """
    if abs(bc.theta0) + abs(bc.theta1) == 0.0:
        raise ValueError(
            "theta0 = theta1 = 0 is the buckling case; it cannot be read "
            "through the free-length problem"
        )
    if not L > bc.l:
        raise ValueError(f"target length {L} must exceed the distance {bc.l}")
    opts = opts or SolveOptions()
    bisector = _LengthBisector(bc, opts)
    eps_t, _ = bisector.solve(L, tol)
    # certify at the found eps with the full multistart
    curve, cert = minimize_extensible(bc, eps_t, opts)
    if abs(curve.length - L) > 10.0 * tol:
        warnings.warn(
            "multistart length disagrees with the bisection branch; "
            "possible jump of the length function"
        )
    return eps_t, curve


@dataclass
class SweepRow:
    l: float
    eps_tilde: float
    ratio: float  # (L - l) / eps_tilde
    energy: float  # bending energy of the distance-l curve
    inflections: int
    self_intersections: bool
    curve: DiscreteCurve = None


def straightening_sweep(
    L: float,
    theta0: float,
    theta1: float,
    l_values,
    tol: float = 1e-8,
    opts: SolveOptions | None = None,
) -> list[SweepRow]:
    """Fixed-length solves at distances l -> L via the dilation trick.

    Each row solves at distance L with target length L^2/l, then dilates
    by l/L; the recorded ratio (L - l)/eps_tilde trends to the
    4 sqrt(2) (sin^2(theta0/4) + sin^2(theta1/4)) coefficient.
    """
    if abs(theta0) + abs(theta1) == 0.0:
        raise ValueError("theta0 = theta1 = 0 is the buckling case")
    opts = opts or SolveOptions()
    bc = BoundaryCondition(L, theta0, theta1)
    bisector = _LengthBisector(bc, opts)
    rows = []
    for l in sorted(l_values):
        if not 0.0 < l < L:
            raise ValueError(f"need 0 < l < L, got l={l}")
        eps_t, curve_at_L = bisector.solve(L * L / l, tol)
        curve = dilate(curve_at_L, l / L)
        rows.append(
            SweepRow(
                l=l,
                eps_tilde=eps_t,
                ratio=(L - l) / eps_t,
                energy=energies(curve, eps_t).bending,
                inflections=count_inflections(curve),
                self_intersections=has_self_intersection(curve),
                curve=curve,
            )
        )
    return rows
