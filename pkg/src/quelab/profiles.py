"""Test-function profiles on the positive half-line.

Log-Gaussian bumps have closed-form Mellin transforms.  They are truncated
to a compact support where their value is below ``1e-14`` of the peak, which
keeps coset sums finite while leaving every numerical identity intact at the
tolerances used.  A classical compact bump is provided as well; its Mellin
transform is computed by quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

TRUNC_SIGMAS = 8.0


@dataclass(frozen=True)
class LogGaussian:
    r"""psi(y) = amp * exp(-(log y - mu)^2 / (2 sigma^2)) on its truncated support."""

    mu: float
    sigma: float
    amp: float = 1.0
    name: str = ""

    @property
    def support(self) -> tuple[float, float]:
        w = TRUNC_SIGMAS * self.sigma
        return math.exp(self.mu - w), math.exp(self.mu + w)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        t = np.log(np.where(y > 0, y, 1.0))
        lo, hi = self.support
        v = self.amp * np.exp(-((t - self.mu) ** 2) / (2 * self.sigma ** 2))
        return np.where((y >= lo) & (y <= hi), v, 0.0)

    def mellin(self, w):
        """int_0^inf psi(y) y^w dy/y (untruncated Gaussian, closed form)."""
        w = np.asarray(w, dtype=complex)
        return self.amp * self.sigma * math.sqrt(2 * math.pi) * np.exp(self.mu * w + self.sigma ** 2 * w ** 2 / 2)

    def scaled(self, c: float) -> LogGaussian:
        return LogGaussian(self.mu, self.sigma, self.amp * c, self.name)


@dataclass(frozen=True)
class CompactBump:
    """exp(-1/(1 - u^2)) in u = (log y - mid)/half on |u| < 1."""

    lo: float
    hi: float
    amp: float = 1.0
    name: str = ""

    @property
    def support(self) -> tuple[float, float]:
        return self.lo, self.hi

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        a, b = math.log(self.lo), math.log(self.hi)
        u = (np.log(np.where(y > 0, y, 1.0)) - (a + b) / 2) / ((b - a) / 2)
        inside = np.abs(u) < 1
        uu = np.where(inside, u, 0.0)
        return np.where(inside, self.amp * np.exp(1 - 1 / (1 - uu ** 2)), 0.0)

    def mellin(self, w):
        w = complex(w)
        a, b = math.log(self.lo), math.log(self.hi)
        re = integrate.quad(lambda t: float(self(math.exp(t))) * (math.exp(w.real * t) * math.cos(w.imag * t)),
                            a, b, epsabs=1e-15, epsrel=1e-12, limit=200)[0]
        im = integrate.quad(lambda t: float(self(math.exp(t))) * (math.exp(w.real * t) * math.sin(w.imag * t)),
                            a, b, epsabs=1e-15, epsrel=1e-12, limit=200)[0]
        return complex(re, im)


@dataclass(frozen=True)
class ProductProfile:
    """g(y) = prod_i g_i(y_i) on the positive orthant of R^r."""

    factors: tuple

    def __call__(self, y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        out = np.ones(y.shape[0])
        for i, f in enumerate(self.factors):
            out = out * f(y[:, i])
        return out

    @property
    def supports(self):
        return [f.support for f in self.factors]


class ZeroProfile:
    support = (1.0, 1.0)

    def __call__(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def mellin(self, w):
        return np.zeros_like(np.asarray(w, dtype=complex))


# the fixed library used by the QUE experiments: broad bumps low, middle and
# high in the cusp (narrow bumps fluctuate too much from weight to weight)
PSI1 = LogGaussian(math.log(1.0), 0.3, name="psi1")
PSI2 = LogGaussian(math.log(1.6), 0.3, name="psi2")
PSI3 = LogGaussian(math.log(2.5), 0.3, name="psi3")
LIBRARY = (PSI1, PSI2, PSI3)


def by_name(name: str):
    for p in LIBRARY:
        if p.name == name:
            return p
    raise KeyError(name)


def gauss_legendre(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return (b - a) / 2 * x + (a + b) / 2, (b - a) / 2 * w


def profile_quadrature(psi, n: int = 400) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights in y covering the support of psi (Gauss-Legendre in log y)."""
    lo, hi = psi.support
    t, w = gauss_legendre(math.log(lo), math.log(hi), n)
    y = np.exp(t)
    return y, w * y


def inverse_square_integral(psi) -> float:
    """int_0^inf psi(y) y^{-2} dy = Mellin transform at w = -1."""
    if hasattr(psi, "mu"):
        return float(np.real(psi.mellin(-1.0)))
    y, w = profile_quadrature(psi)
    return float(np.sum(psi(y) * w / y ** 2))
