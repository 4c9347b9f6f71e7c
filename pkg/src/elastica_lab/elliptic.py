"""Elliptic integrals of the first kind and Jacobi elliptic functions.

Everything here is dependency-free double precision: the complete integral
K(k) comes from the arithmetic-geometric mean, the incomplete integral
F(xi; k) from Carlson's symmetric form R_F, and sn/cn/dn from a descending
Landen recursion on the modulus.  All routines accept scalars or numpy
arrays in the argument x / xi and a scalar modulus k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "JacobiTriple",
    "ellint_F",
    "ellint_K",
    "ellint_K_cpl",
    "jacobi",
    "jacobi_cpl",
]

_AGM_TOL = 1e-15
# below this modulus sn/cn/dn are sin/cos/1 to double precision
_LANDEN_FLOOR = 1e-10


@dataclass(frozen=True)
class JacobiTriple:
    """Values of sn, cn, dn at a common argument and modulus."""

    sn: float | np.ndarray
    cn: float | np.ndarray
    dn: float | np.ndarray

    def __iter__(self):
        return iter((self.sn, self.cn, self.dn))


def _check_modulus(k: float) -> float:
    k = float(k)
    if not 0.0 <= k <= 1.0 or math.isnan(k):
        raise ValueError(f"modulus k must lie in [0, 1], got {k}")
    return k


def _K_from_kp(kp: float) -> float:
    a, b = 1.0, kp
    while abs(a - b) > _AGM_TOL * a:
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


def ellint_K(k: float) -> float:
    """Complete elliptic integral of the first kind, AGM evaluation.

    Diverges logarithmically as k -> 1; k = 1 raises.
    """
    k = _check_modulus(k)
    if k == 1.0:
        raise ValueError("K(k) diverges at k = 1")
    return _K_from_kp(math.sqrt((1.0 - k) * (1.0 + k)))


def ellint_K_cpl(kp: float) -> float:
    """K parameterized by the complementary modulus (kp -> 0 diverges)."""
    if not 0.0 < kp <= 1.0:
        raise ValueError(f"complementary modulus must lie in (0, 1], got {kp}")
    return _K_from_kp(kp)


def _carlson_rf(x: float, y: float, z: float) -> float:
    # Carlson's R_F by the duplication theorem; args >= 0, at most one zero.
    for _ in range(200):
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        mu = (x + y + z) / 3.0
        if max(abs(x - mu), abs(y - mu), abs(z - mu)) < 1e-4 * mu:
            break
    dx, dy, dz = 1.0 - x / mu, 1.0 - y / mu, 1.0 - z / mu
    e2 = dx * dy + dy * dz + dz * dx
    e3 = dx * dy * dz
    s = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0
    return s / math.sqrt(mu)


def ellint_F(xi: float, k: float) -> float:
    """Incomplete elliptic integral of the first kind in Jacobi form.

    Returns the integral of 1/(sqrt(1-t^2) sqrt(1-k^2 t^2)) from 0 to xi,
    for |xi| <= 1.  Odd in xi; F(1, k) = K(k).  The combination |xi| = 1,
    k = 1 diverges and raises.
    """
    k = _check_modulus(k)
    xi = float(xi)
    if not abs(xi) <= 1.0:
        raise ValueError(f"ellint_F requires |xi| <= 1, got {xi}")
    if abs(xi) == 1.0:
        if k == 1.0:
            raise ValueError("F(+-1, 1) diverges")
        return math.copysign(ellint_K(k), xi)
    if k == 1.0:
        return math.atanh(xi)
    if xi == 0.0:
        return 0.0
    # F(xi; k) = xi * R_F(1 - xi^2, 1 - k^2 xi^2, 1)
    c2 = (1.0 - xi) * (1.0 + xi)
    d2 = (1.0 - k * xi) * (1.0 + k * xi)
    return xi * _carlson_rf(c2, d2, 1.0)


def _landen_moduli(k: float, kp: float) -> list[float]:
    # descending sequence k = k_0 > k_1 > ... until below the floor; the
    # complementary modulus is carried alongside so moduli exponentially
    # close to 1 do not collapse in the 1 - k^2 cancellation
    ks, cur_k, cur_kp = [k], k, kp
    while ks[-1] > _LANDEN_FLOOR:
        cur_k, cur_kp = (
            (1.0 - cur_kp) / (1.0 + cur_kp),
            2.0 * math.sqrt(cur_kp) / (1.0 + cur_kp),
        )
        ks.append(cur_k)
        if len(ks) > 64:  # pragma: no cover - cannot happen for kp > 0
            raise RuntimeError("Landen recursion failed to converge")
    return ks


def jacobi(x, k: float) -> JacobiTriple:
    """Jacobi sn, cn, dn of argument x (scalar or array) and modulus k.

    k = 0 and k = 1 use the degenerate closed forms (sin/cos/1 and
    tanh/sech/sech).  For 0 < k < 1 the argument is folded by the exact
    period 4K with compensated summation, then a descending Landen
    recursion reduces the modulus to the trig regime.
    """
    k = _check_modulus(k)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)

    if k == 0.0:
        sn, cn, dn = np.sin(x), np.cos(x), np.ones_like(x)
    elif k == 1.0:
        sn, cn = np.tanh(x), 1.0 / np.cosh(x)
        dn = cn.copy()
    else:
        sn, cn, dn = _jacobi_reduced(x, k, math.sqrt((1.0 - k) * (1.0 + k)))

    if scalar:
        return JacobiTriple(float(sn[0]), float(cn[0]), float(dn[0]))
    return JacobiTriple(sn, cn, dn)


def jacobi_cpl(x, kp: float) -> JacobiTriple:
    """sn, cn, dn parameterized by the complementary modulus kp.

    For moduli exponentially close to 1 the value k = sqrt(1 - kp^2) is
    not representable to the needed resolution in doubles; this entry
    keeps kp exact through the Landen recursion.
    """
    if not 0.0 < kp <= 1.0:
        raise ValueError(f"complementary modulus must lie in (0, 1], got {kp}")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    k = math.sqrt((1.0 - kp) * (1.0 + kp))
    sn, cn, dn = _jacobi_reduced(x, k, kp)
    if scalar:
        return JacobiTriple(float(sn[0]), float(cn[0]), float(dn[0]))
    return JacobiTriple(sn, cn, dn)


def _landen_ascend(v: np.ndarray, ks: list[float]):
    s, c = np.sin(v), np.cos(v)
    d = np.ones_like(v)
    for mu in reversed(ks[1:]):
        t = 1.0 + mu * s * s
        s, c, d = (1.0 + mu) * s / t, c * d / t, (1.0 - mu * s * s) / t
    return s, c, d


def _jacobi_reduced(x: np.ndarray, k: float, kp: float):
    K = _K_from_kp(kp)
    # fold into [-K, K] using the 2K antiperiod of sn/cn; split 2K into
    # high/low parts so huge arguments keep the fold exact
    two_k = 2.0 * K
    hi = float(np.float64(two_k).astype(np.float32))  # coarse head
    lo = two_k - hi
    n = np.round(x / two_k)
    r = (x - n * hi) - n * lo
    flip = (n % 2.0) != 0.0

    # near the quarter period evaluate at the small complement K - |r| and
    # map back through sn(K-u) = cn/dn etc., which keeps the steep sn branch
    # accurate to the last bit
    a = np.abs(r)
    comp = a > 0.9 * K
    w = np.where(comp, K - a, r)

    ks = _landen_moduli(k, kp)
    scale = 1.0
    for ki in ks[1:]:
        scale *= 1.0 + ki
    s, c, d = _landen_ascend(w / scale, ks)

    # sn(K-u) = cn/dn written as 1 - (1-k^2) sn^2/(dn (dn+cn)) so the gap
    # from 1 is formed from the small, fully accurate sn(u)
    sn_comp = 1.0 - kp * kp * s * s / (d * (d + c))
    s, c, d = (
        np.where(comp, np.sign(r) * sn_comp, s),
        np.where(comp, kp * s / d, c),
        np.where(comp, kp / d, d),
    )

    s = np.where(flip, -s, s)
    c = np.where(flip, -c, c)
    return s, c, d
