r"""Dirichlet series and Euler products.

Dedekind zeta functions and Hecke L-series of the supported fields,
partial Euler products for :math:`L(1, \mathrm{sym}^2 f)`, the weak
Ramanujan block sums and the quantity :math:`M_k` together with the
inequalities that bound it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np

from .errors import AbscissaViolation, PoleAtS1
from .numberfield import NumberFieldDesc, ideal_coefficients, kronecker_table, rational_primes
from .specialfun import archimedean_triple_factor  # noqa: F401  (re-exported)


# ------------------------------------------------------------- zeta values
@dataclass(frozen=True)
class SeriesValue:
    """A truncated series value with an estimate of the omitted tail."""

    value: complex
    tail: float
    cutoff: int


def zeta_residue(field: NumberFieldDesc) -> float:
    """Residue of the Dedekind zeta function at s = 1 (class number one)."""
    return 2 ** field.r1 * (2 * math.pi) ** field.r2 * field.R / (field.w * math.sqrt(abs(field.D)))


@lru_cache(maxsize=32)
def _coeffs(field: NumberFieldDesc, m: tuple, N: int) -> np.ndarray:
    c = ideal_coefficients(field, m, N)
    c.setflags(write=False)
    return c


def dedekind_zeta(field: NumberFieldDesc, s: complex, m: Sequence[int] | None = None,
                  cutoff: int = 100000, correct_tail: bool = True) -> SeriesValue:
    r"""Truncated Hecke L-series zeta(s, lambda_m) = sum_a lambda_m(a) N(a)^(-s).

    For the trivial character the smooth part of the tail,
    rho N^(1-s)/(s-1), is added when ``correct_tail`` is set; what remains is
    reported as ``tail``.  For nontrivial m the reported tail is the
    absolute-value comparison bound.
    """
    s = complex(s)
    if s.real <= 1:
        raise AbscissaViolation("direct sums need Re(s) > 1")
    m = tuple(m) if m is not None else field.zero_m()
    N = int(cutoff)
    c = _coeffs(field, m, N)
    n = np.arange(1, N + 1, dtype=float)
    val = complex(np.sum(c[1:] * np.exp(-s * np.log(n))))
    sig = s.real
    rho = zeta_residue(field)
    trivial = all(v == 0 for v in m)
    if trivial and correct_tail:
        val += rho * N ** (1 - s) / (s - 1)
        tail = 4 * field.n * N ** (0.5 - sig)
    else:
        tail = rho * N ** (1 - sig) / (sig - 1) * 1.5
    if trivial and s.imag == 0:
        val = complex(val.real, 0.0)
    return SeriesValue(val, float(tail), N)


def dirichlet_l(D: int, s) -> mpmath.mpc:
    """L(s, chi_D) for the Kronecker character of discriminant D (analytically continued)."""
    return mpmath.dirichlet(s, [int(v) for v in kronecker_table(D)])


def dedekind_zeta_exact(field: NumberFieldDesc, s) -> complex:
    """zeta_F(s) = zeta(s) L(s, chi_D), valid for all s != 1."""
    s = mpmath.mpmathify(complex(s))
    if abs(s - 1) < 1e-14:
        raise PoleAtS1("zeta_F has a pole at s = 1")
    if field.kind == "rational":
        return complex(mpmath.zeta(s))
    return complex(mpmath.zeta(s) * dirichlet_l(field.D, s))


def character_sum_l(D: int, s: float, N: int = 10 ** 6) -> float:
    """Direct partial sum of L(s, chi_D) used as an independent oracle."""
    n = np.arange(1, N + 1)
    tab = kronecker_table(D).astype(float)
    return float(np.sum(tab[n % len(tab)] / n.astype(float) ** s))


# --------------------------------------------------------------- Euler data
@dataclass(frozen=True)
class EulerData:
    """Normalized Hecke eigenvalues lambda(p) at primes p (rational primes here).

    ``primes`` and ``lam`` are parallel arrays sorted by p.  Satake parameters
    satisfy alpha + beta = lambda(p), alpha beta = 1.
    """

    primes: np.ndarray
    lam: np.ndarray
    label: str = ""
    meta: dict = dc_field(default_factory=dict, compare=False)

    @property
    def cutoff(self) -> int:
        return int(self.primes[-1]) if len(self.primes) else 0

    def restrict(self, P: float) -> EulerData:
        keep = self.primes <= P
        return EulerData(self.primes[keep], self.lam[keep], self.label, self.meta)

    def satake(self) -> tuple[np.ndarray, np.ndarray]:
        lam = np.clip(self.lam, -2, 2).astype(complex)
        alpha = lam / 2 + 1j * np.sqrt(1 - (lam.real / 2) ** 2)
        return alpha, np.conj(alpha)

    def power_sums(self, j: int) -> np.ndarray:
        """alpha^j + beta^j at every prime (Chebyshev recursion)."""
        lam = self.lam
        prev, cur = np.full_like(lam, 2.0), lam.copy()
        if j == 0:
            return prev
        for _ in range(j - 1):
            prev, cur = cur, lam * cur - prev
        return cur

    def hecke_power(self, j: int) -> np.ndarray:
        """lambda(p^j) via lambda(p^{a+1}) = lambda(p) lambda(p^a) - lambda(p^{a-1})."""
        lam = self.lam
        prev, cur = np.ones_like(lam), lam.copy()
        if j == 0:
            return prev
        for _ in range(j - 1):
            prev, cur = cur, lam * cur - prev
        return cur


def constant_euler(value: float, P: int, label: str = "") -> EulerData:
    p = rational_primes(P)
    return EulerData(p, np.full(len(p), float(value)), label or f"const{value}")


@dataclass(frozen=True)
class Sym2Value:
    value: float
    lo: float
    hi: float
    cutoff: int

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


def sym2_log_factors(euler: EulerData) -> np.ndarray:
    """log of the local factors [(1 - 1/p)(1 - (lambda^2 - 2)/p + 1/p^2)]^{-1}."""
    p = euler.primes.astype(float)
    lam2 = euler.lam ** 2
    return -(np.log1p(-1 / p) + np.log1p(-(lam2 - 2) / p + 1 / p ** 2))


def sym2_band_halfwidth(P: float) -> float:
    """Half-width (in log) of the tail band beyond P.

    Under Sato-Tate statistics lambda(p)^2 - 1 has mean 0 and variance 1, so the
    tail sum_{p>P} (lambda^2-1)/p behaves like a random walk of size
    (P log P)^(-1/2); the second term covers the O(1/p^2) remainder.
    """
    PlP = P * math.log(P)
    return 4 * math.sqrt(2 / PlP) + 4 / PlP


def sym2_l_value(euler: EulerData, P: float | None = None) -> Sym2Value:
    """Partial Euler product for L(1, sym^2) with a tail band."""
    e = euler.restrict(P) if P is not None else euler
    P = e.cutoff
    logv = float(math.fsum(sym2_log_factors(e)))
    hw = sym2_band_halfwidth(P)
    return Sym2Value(math.exp(logv), math.exp(logv - hw), math.exp(logv + hw), P)


def sym2_trivial_band(euler: EulerData, P: float, P_far: float) -> tuple[float, float]:
    """Band from prod_{P<p<=P_far} (1 +- 3/p)^{-+1}; widens without limit as P_far grows."""
    ps = rational_primes(P_far)
    ps = ps[ps > P].astype(float)
    lo = float(np.sum(np.log1p(-3 / ps)))
    hi = -float(np.sum(np.log1p(-3 / ps)))
    return lo, hi


def rankin_selberg_partial(lam_n: np.ndarray, X: Sequence[int]) -> np.ndarray:
    """sum_{n<=X} lambda(n)^2 / n for each X; lam_n[n] indexed from 0."""
    n = np.arange(len(lam_n), dtype=float)
    n[0] = 1.0
    terms = lam_n ** 2 / n
    terms[0] = 0.0
    cs = np.cumsum(terms)
    return np.array([cs[int(x)] for x in X])


# ---------------------------------------------------------- block sums
def weak_ramanujan_blocks(euler: EulerData, xs: Sequence[float]) -> list[tuple[float, float]]:
    r"""sum_{x < n <= e x} |lambda_pi(n)|^2 Lambda(n)/n over prime powers n = p^j.

    Here lambda_pi(p^j) = alpha^j + beta^j is the coefficient of -L'/L.
    """
    out = []
    p = euler.primes.astype(float)
    logp = np.log(p)
    for x in xs:
        hi = math.e * x
        if hi > euler.cutoff:
            raise ValueError(f"prime data stops at {euler.cutoff} < e x = {hi:.0f}")
        tot = 0.0
        j = 1
        while 2 ** j <= hi:
            pj = p ** j
            sel = (pj > x) & (pj <= hi)
            if sel.any():
                c = euler.power_sums(j)[sel]
                tot += float(np.sum(np.abs(c) ** 2 * logp[sel] / pj[sel]))
            j += 1
        out.append((float(x), tot))
    return out


def mertens_block(x: float) -> float:
    """sum_{x < p <= e x} log p / p."""
    p = rational_primes(math.e * x)
    p = p[p > x].astype(float)
    return float(np.sum(np.log(p) / p))


# ---------------------------------------------------------------- M_k
@dataclass(frozen=True)
class MkReport:
    k: float
    L1sym2: float
    prime_product: float
    Mk: float
    core: float
    mkbound_rhs: float
    sym2lower_rhs: float

    @property
    def core_ratio(self) -> float:
        """core * (log k)^0.2 / M_k; at least 1 when the slackened bound holds."""
        return self.core * math.log(self.k) ** 0.2 / self.Mk


def m_k(euler: EulerData, k: float, L1sym2: float) -> MkReport:
    """M_k together with the right-hand sides of the bounds that control it."""
    e = euler.restrict(k)
    p = e.primes.astype(float)
    a = np.abs(e.lam)
    logk = math.log(k)
    prod = math.exp(math.fsum(np.log1p(2 * a / p)))
    Mk = prod / (logk ** 2 * L1sym2)
    core = math.exp(-math.fsum((a - 1) ** 2 / p))
    bound = logk ** (1 / 6) * math.log(logk) ** 4.5 * math.sqrt(L1sym2)
    lower = math.log(logk) ** -3 * math.exp(math.fsum((e.lam ** 2 - 1) / p))
    return MkReport(float(k), float(L1sym2), prod, Mk, core, bound, lower)


def pointwise_quadratic_check(xs: Sequence) -> bool:
    """Exact check of 2|x| <= 2/3 + (3/2) x^2 on rational inputs."""
    from fractions import Fraction
    return all(2 * abs(Fraction(x)) <= Fraction(2, 3) + Fraction(3, 2) * Fraction(x) ** 2 for x in xs)
