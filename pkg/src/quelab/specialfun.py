r"""Special functions used as numerical primitives.

K-Bessel functions of real or purely imaginary (more generally complex)
order, the Bessel product moment, the Gamma-ratio asymptotic behind the
Luo-Sarnak lemma, local Whittaker norms and the archimedean triple-product
factors.  Large-weight quantities are formed in log space and exponentiated
at the end.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy import integrate, special

from .errors import DivergentIntegral, DomainError, PrecisionLossWarning, Underflow


@dataclass(frozen=True)
class BesselOrder:
    """Order of a K-Bessel function: ``kind`` is ``"real"`` or ``"imaginary"``.

    For ``imaginary`` the order is ``i * value``.
    """

    kind: str
    value: float

    @property
    def nu(self) -> complex:
        return complex(self.value) if self.kind == "real" else complex(0.0, self.value)

    @classmethod
    def of(cls, nu) -> BesselOrder:
        if isinstance(nu, BesselOrder):
            return nu
        nu = complex(nu)
        if nu.imag == 0:
            return cls("real", nu.real)
        if nu.real == 0:
            return cls("imaginary", nu.imag)
        raise ValueError("use bessel_k_complex for general complex order")


def _k_integral(nu: complex, x: float) -> complex:
    """K_nu(x) by the trapezoid rule on int_0^inf exp(-x cosh t) cosh(nu t) dt.

    The integrand is analytic and decays doubly exponentially, so the
    trapezoid rule converges geometrically in 1/h.
    """
    b = abs(nu.imag)
    a = abs(nu.real)
    h = min(0.1, math.pi ** 2 / (math.pi * b + 45.0))
    # truncate where x(cosh t - 1) - a t exceeds ~ 45 (relative 1e-19)
    tmax = 1.0
    while x * (math.cosh(tmax) - 1.0) - a * tmax < 45.0 + abs(math.log(max(x, 1e-300))):
        tmax *= 1.3
        if tmax > 200:
            break
    n = int(math.ceil(tmax / h))
    t = np.arange(n + 1) * h
    # scale by exp(-x): integrand exp(-x(cosh t - 1)) cosh(nu t)
    ex = -x * (np.cosh(t) - 1.0)
    vals = np.exp(ex + nu * t) * 0.5 + np.exp(ex - nu * t) * 0.5
    vals[0] *= 0.5
    return complex(h * vals.sum()) * math.exp(-x)


def bessel_k_complex(nu: complex, x: float) -> complex:
    """K_nu(x) for complex order and x > 0."""
    if not x > 0:
        raise DomainError("x must be positive")
    nu = complex(nu)
    if nu.imag == 0:
        return complex(special.kv(nu.real, x))
    if math.pi * abs(nu.imag) / 2 - x > 10:
        # cancellation in the trapezoid sum; fall back to arbitrary precision
        warnings.warn(f"K_{nu}({x}) outside validated double envelope; using mpmath",
                      PrecisionLossWarning, stacklevel=2)
        with mpmath.workdps(30 + int(abs(nu.imag))):
            return complex(mpmath.besselk(mpmath.mpc(nu.real, nu.imag), x))
    return _k_integral(nu, x)


def bessel_k(order, x: float) -> float:
    """K-Bessel function of real or purely imaginary order, real valued for x > 0."""
    order = BesselOrder.of(order)
    if not x > 0:
        raise DomainError("x must be positive")
    if abs(order.value) > 500 or x > 1e4:
        warnings.warn("outside validated envelope", PrecisionLossWarning, stacklevel=2)
    if order.kind == "real":
        return float(special.kv(order.value, x))
    return bessel_k_complex(order.nu, x).real


def bessel_k_mp(nu, x, dps: int = 40) -> complex:
    """High-precision reference K_nu(x) via mpmath."""
    with mpmath.workdps(dps):
        return complex(mpmath.besselk(mpmath.mpmathify(complex(nu)), x))


# ---------------------------------------------------------------- moments
def bessel_product_moment(lam: float, mu, nu, mode: str = "closed-form") -> float:
    r"""int_0^inf y^lam K_mu(y) K_nu(y) dy for real or imaginary orders."""
    m = BesselOrder.of(mu).nu
    n = BesselOrder.of(nu).nu
    args = [(1 + lam + s1 * m + s2 * n) / 2 for s1 in (1, -1) for s2 in (1, -1)]
    if min(a.real for a in args) <= 0:
        raise DivergentIntegral("need 1 + lam +- mu +- nu with positive real part")
    if mode == "closed-form":
        logv = (lam - 2) * math.log(2) - special.gammaln(lam + 1)
        prod = 1 + 0j
        for a in args:
            prod *= complex(special.gamma(a)) if a.imag else special.gamma(a.real)
        return float((math.exp(logv) * prod).real)
    if mode != "quadrature":
        raise ValueError(mode)

    def f(y):
        return y ** lam * bessel_k(BesselOrder.of(mu), y) * bessel_k(BesselOrder.of(nu), y)

    total = 0.0
    for lo, hi in ((0, 1e-6), (1e-6, 1e-3), (1e-3, 1), (1, 10), (10, 80)):
        v, _ = integrate.quad(f, lo, hi, epsabs=1e-15, epsrel=1e-12, limit=400)
        total += v
    return total


def gamma_ratio_error(s: complex, k: int) -> float:
    """|Gamma(s+k-1)/Gamma(k-1) (k-1)^(-s) - 1|."""
    s = complex(s)
    if s.imag == 0 and s.real == int(s.real) and s.real > 0:
        # exact rational evaluation for positive integer s
        n = int(s.real)
        num = Fraction(1)
        for j in range(n):
            num *= (k - 1 + j)
        return float(abs(num / Fraction(k - 1) ** n - 1))
    lg = special.loggamma(s + k - 1) - special.loggamma(k - 1) - s * math.log(k - 1)
    return float(abs(np.expm1(lg)))


# ------------------------------------------------------------- whittaker
def whittaker_sq(place: str, k: int, y: float) -> float:
    """|K(y)|^2 for the lowest-weight Whittaker vector at one place."""
    if place == "real":
        return y ** k * math.exp(-4 * math.pi * y)
    tot = 0.0
    for j in range(k + 1):
        tot += math.comb(k, j) * special.kv(k / 2 - j, 4 * math.pi * y) ** 2
    return y ** (k + 2) * tot


def _log_whittaker_closed(place: str, k: int) -> float:
    if place == "real":
        return -k * math.log(4 * math.pi) + special.gammaln(k)
    return -5 * math.log(2) - 2 * math.log(math.pi) - k * math.log(2 * math.pi) \
        + 2 * special.gammaln(1 + k / 2)


def whittaker_l2_local(place: str, k: int, mode: str = "closed-form", log: bool = False) -> float:
    r"""Local L^2 norm of the Whittaker vector of weight k.

    Real place: int_0^inf y^k e^{-4 pi y} dy^x = (4 pi)^{-k} Gamma(k).
    Complex place: int_0^inf y^{k+1} sum_j C(k,j) K_{k/2-j}(4 pi y)^2 dy,
    which equals 2^-5 pi^-2 (2 pi)^-k Gamma(1+k/2)^2.
    """
    if k < 2 or k % 2:
        raise DomainError("k must be an even integer >= 2")
    if place not in ("real", "complex"):
        raise ValueError(place)
    if mode == "closed-form":
        lv = _log_whittaker_closed(place, k)
    elif mode == "quadrature":
        if k > 60:
            raise Underflow("quadrature mode is limited to k <= 60")
        lv = _log_whittaker_quad(place, k)
    else:
        raise ValueError(mode)
    if log:
        return lv
    if abs(lv) > 700:
        raise Underflow(f"log value {lv:.1f} outside double range; use log=True")
    return math.exp(lv)


def _log_whittaker_quad(place: str, k: int) -> float:
    # integrate in u = log y with the integrand rescaled by its peak
    if place == "real":
        def logf(u):
            y = math.exp(u)
            return k * u - 4 * math.pi * y
        upeak = math.log(k / (4 * math.pi))
    else:
        def logf(u):
            y = math.exp(u)
            z = 4 * math.pi * y
            terms = [math.log(math.comb(k, j)) + 2 * (math.log(special.kve(k / 2 - j, z)) - z)
                     for j in range(k + 1)]
            mx = max(terms)
            return (k + 2) * u + mx + math.log(sum(math.exp(t - mx) for t in terms))
        upeak = max(math.log(max(k, 1) / (8 * math.pi)), -5.0)
        grid = np.linspace(upeak - 6, upeak + 6, 241)
        upeak = float(grid[np.argmax([logf(g) for g in grid])])
    ref = logf(upeak)
    lo = math.log(1e-9) if place == "complex" else upeak - 60
    # beyond upeak + 7 the factor exp(-4 pi y) has killed the integrand
    pts = [p for p in (lo, upeak - 3, upeak, upeak + 3, upeak + 7) if p >= lo]
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        v, _ = integrate.quad(lambda u: math.exp(logf(u) - ref), a, b, epsabs=0, epsrel=1e-13, limit=200)
        total += v
    return ref + math.log(total)


def binomial_gamma_identity(k: int) -> tuple[int, int]:
    """(sum_j C(k,j) j! (k-j)!, (k+1)!) as exact integers."""
    lhs = sum(math.comb(k, j) * math.factorial(j) * math.factorial(k - j) for j in range(k + 1))
    return lhs, math.factorial(k + 1)


# -------------------------------------------------- triple-product factors
def _log_gamma_r(s: complex) -> complex:
    return -s / 2 * math.log(math.pi) + special.loggamma(s / 2)


def archimedean_triple_factor(place: str, k: int, rp: float, variant: str = "printed") -> float:
    r"""Archimedean local factor of the triple product, constant set to 1.

    Complex place: Gamma((1+k+-ir)/2)^2 Gamma((1+-ir)/2)^2 /
    (Gamma(1+k/2)^4 Gamma(1+-ir)^2).

    Real place, ``variant="printed"``: the Gamma_R ratio
    Gamma_R(k-1/2+-ir) Gamma_R(k+1/2+-ir) Gamma_R(1/2+-ir) Gamma_R(3/2+-ir) /
    (Gamma_R(k-1/2)^2 Gamma_R(k+1/2)^2 Gamma_R(1/2+-2ir)).
    ``variant="watson"`` replaces the weight part of the denominator by
    Gamma_C(k)^2, the symmetric-square factor L_inf(1, sym^2)^2, which gives the
    expected 1/k decay.
    """
    if k < 4:
        raise DomainError("k >= 4 required")
    r = float(rp)
    pm = (1j * r, -1j * r)
    if place == "complex":
        lv = 0j
        for e in pm:
            lv += 2 * special.loggamma((1 + k + e) / 2) + 2 * special.loggamma((1 + e) / 2)
            lv -= 2 * special.loggamma(1 + e)
        lv -= 4 * special.gammaln(1 + k / 2)
        return float(np.exp(lv).real)
    if place != "real":
        raise ValueError(place)
    lv = 0j
    for e in pm:
        lv += _log_gamma_r(k - 0.5 + e) + _log_gamma_r(k + 0.5 + e)
        lv += _log_gamma_r(0.5 + e) + _log_gamma_r(1.5 + e)
    if variant == "printed":
        lv -= 2 * _log_gamma_r(k - 0.5) + 2 * _log_gamma_r(k + 0.5)
    elif variant == "watson":
        lv -= 2 * (math.log(2) - k * math.log(2 * math.pi) + special.gammaln(k))
    else:
        raise ValueError(variant)
    # the +- product in the denominator Gamma_R(1/2 +- 2ir)
    for e in pm:
        lv -= _log_gamma_r(0.5 + 2 * e)
    return float(np.exp(lv).real)
