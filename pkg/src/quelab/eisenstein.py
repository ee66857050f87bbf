r"""Eisenstein series over the supported fields.

The complete series

    E(s, m, z) = sum_{Gamma_inf \ Gamma} N(y(gamma z))^s lambda_m(y(gamma z))

is evaluated two independent ways: by a lattice sum over pairs (c, d) and
by its Fourier expansion in K-Bessel functions.  Pure incomplete and
unipotent series are finite coset sums for compactly supported profiles.

Conventions.  A point of the product of half-spaces has one coordinate per
infinite place: ``x`` real at real places and complex at the complex place,
``y > 0`` throughout.  At place i the exponent is s_i = s + beta(m, i)/delta_i
so that N y^s lambda_m(y) = prod y_i^(delta_i s_i).  The Fourier expansion is
in the characters x -> e(tr(xi kappa x)) with xi in O and kappa the
codifferent generator; at a complex place tr is 2 Re.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate, special

from .errors import DivergentIntegral, NotConvergent, PoleAtS1, PoleOnPath, SupportTooWide
from .lfunctions import dedekind_zeta, dedekind_zeta_exact, zeta_residue
from .numberfield import (NumberFieldDesc, RingElement, _disc_points, _real_box, divisor_generators,
                          embed_array, factor_element, lambda_char, normalize_generator)
from .specialfun import bessel_k_complex

# smooth cutoff exp(-(|t|/H)^(2P)) for the lattice sums in direct mode
_CUT_P = 4
_CUT_REACH = 1.75


# ---------------------------------------------------------------- types
@dataclass(frozen=True)
class EisParams:
    field: NumberFieldDesc
    s: complex
    m: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        m = tuple(int(v) for v in self.m) if self.m else self.field.zero_m()
        object.__setattr__(self, "m", m)
        self.field.beta(m)  # validates the length

    @property
    def trivial(self) -> bool:
        return all(v == 0 for v in self.m)

    def s_places(self) -> np.ndarray:
        """s_i = s + beta(m, i) / delta_i."""
        return self.s + self.field.beta(self.m) / np.asarray(self.field.delta, dtype=float)


@dataclass(frozen=True)
class PointOnH:
    x: tuple
    y: tuple

    def __post_init__(self):
        if any(v <= 0 for v in self.y):
            raise ValueError("all y_i must be positive")

    @classmethod
    def make(cls, x, y) -> PointOnH:
        return cls(tuple(np.atleast_1d(x).tolist()), tuple(float(v) for v in np.atleast_1d(y)))

    @property
    def xa(self) -> np.ndarray:
        return np.asarray(self.x)

    @property
    def ya(self) -> np.ndarray:
        return np.asarray(self.y, dtype=float)

    def norm_y(self, field: NumberFieldDesc) -> float:
        return float(np.prod(self.ya ** np.asarray(field.delta)))


@dataclass(frozen=True)
class EisValue:
    """A numerical Eisenstein value with an estimate of the truncation error."""

    value: complex
    tail: float
    terms: int


# ------------------------------------------------------------- helpers
def _covol(field: NumberFieldDesc) -> float:
    """Covolume of O in R^r1 x C^r2: 2^-r2 sqrt|D|."""
    return 2.0 ** (-field.r2) * math.sqrt(abs(field.D))


def _log_gamma(z):
    return special.loggamma(complex(z))


def _place_integral(delta: int, si: complex) -> complex:
    """int over R (or C) of (1 + |t|^2)^(-delta s_i) dt."""
    if delta == 1:
        return complex(math.sqrt(math.pi) * np.exp(_log_gamma(si - 0.5) - _log_gamma(si)))
    return math.pi / (2 * si - 1)


def _lam_y(field: NumberFieldDesc, m: tuple, y: np.ndarray) -> complex:
    if field.r == 1:
        return 1.0 + 0j
    return complex(lambda_char(field, m, y))


def _neg(m: tuple) -> tuple:
    return tuple(-v for v in m)


def zeta_2s(params: EisParams, shift: int = 0, cutoff: int = 100000) -> complex:
    """zeta(2s - shift, lambda_{-2m}); continued analytically for m = 0."""
    w = 2 * params.s - shift
    if params.trivial:
        if abs(w - 1) < 1e-12:
            raise PoleAtS1("zeta_F(2s - 1) has a pole at s = 1")
        return complex(dedekind_zeta_exact(params.field, w))
    mm = tuple(-2 * v for v in params.m)
    if w.real <= 1:
        raise NotConvergent("Hecke L-series with m != 0 needs Re > 1 here")
    return complex(dedekind_zeta(params.field, w, mm, cutoff=cutoff).value)


def _theta_free_phi(params: EisParams) -> complex:
    field = params.field
    sp = params.s_places()
    g = 1 + 0j
    for dl, si in zip(field.delta, sp):
        g *= _place_integral(dl, si)
    return g / _covol(field) * zeta_2s(params, 1) / zeta_2s(params, 0)


def scattering_phi(params: EisParams) -> complex:
    r"""phi(s, m), the coefficient of N y^(1-s) lambda_{-m}(y) in the constant term.

    phi = 2^r2 / sqrt|D| prod_real sqrt(pi) Gamma(s_i - 1/2)/Gamma(s_i)
    prod_complex pi/(2 s_i - 1) zeta(2s-1, lambda_{-2m}) / zeta(2s, lambda_{-2m}).
    """
    if params.trivial and abs(params.s - 1) < 1e-6:
        raise PoleOnPath("s = 1 is a pole of phi")
    if params.trivial and abs(params.s - 0.5) < 1e-9:
        raise PoleOnPath("s = 1/2 is on the path of the continued factors")
    return _theta_free_phi(params)


def scattering_residue(field: NumberFieldDesc, radius: float = 1e-3, nodes: int = 64) -> float:
    """Res_{s=1} phi(s) by the trapezoid rule on a circle around s = 1."""
    th = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
    pts = 1 + radius * np.exp(1j * th)
    vals = [scattering_phi(EisParams(field, s)) * (s - 1) for s in pts]
    return float(np.mean(vals).real)


def scattering_residue_formula(field: NumberFieldDesc) -> float:
    """2^(r2-1) pi^((n+r1)/2) Res zeta_F(1) / (sqrt|D| zeta_F(2))."""
    z2 = dedekind_zeta_exact(field, 2.0).real
    return 2.0 ** (field.r2 - 1) * math.pi ** ((field.n + field.r1) / 2) * zeta_residue(field) \
        / (math.sqrt(abs(field.D)) * z2)


# ----------------------------------------------------- ideal generators
@lru_cache(maxsize=64)
def ideal_generators(field: NumberFieldDesc, X: float) -> tuple:
    """One normalized generator per nonzero integral ideal of norm <= X, sorted by norm."""
    if field.kind == "rational":
        return tuple(field.element(a) for a in range(1, int(X) + 1))
    if field.kind == "real":
        e1 = field.element(*field.eps_plus).embeddings()[0]
        a, b = _real_box(field, (0.0, 0.0), (math.sqrt(X) * e1 * 1.01, math.sqrt(X) * 1.01))
    else:
        a, b = _disc_points(field, math.sqrt(X))
    seen = {}
    for aa, bb in zip(a.tolist(), b.tolist()):
        if aa == 0 and bb == 0:
            continue
        el = field.element(aa, bb)
        nm = abs(int(el.norm()))
        if nm > X:
            continue
        g = normalize_generator(el)
        seen[(g.a, g.b)] = (nm, g)
    return tuple(g for _, g in sorted(seen.values(), key=lambda t: (t[0], t[1].a, t[1].b)))


def _emb(g: RingElement) -> np.ndarray:
    return np.asarray(g.embeddings())


# ------------------------------------------------------------ direct sum
def _lattice_points(field: NumberFieldDesc, center: np.ndarray, radius: np.ndarray):
    """Elements d with |d_i - center_i| <= radius_i; returns their embeddings."""
    if field.kind == "rational":
        a = np.arange(math.floor(center[0] - radius[0]), math.ceil(center[0] + radius[0]) + 1)
        return a[:, None].astype(float)
    if field.kind == "real":
        a, b = _real_box(field, tuple(center - radius), tuple(center + radius))
        return embed_array(field, a, b)
    a, b = _disc_points(field, abs(center[0]) + radius[0])
    e = embed_array(field, a, b)
    return e[np.abs(e[:, 0] - center[0]) <= radius[0]]


def _cut(u: np.ndarray) -> np.ndarray:
    return np.exp(-np.abs(u) ** (2 * _CUT_P))


def _tail_integral(delta: int, si: complex, y: float, a: float, H: float) -> complex:
    """int f_i (1 - w) over R or C, f_i(t) = (y / (a^2 + |t|^2))^(delta s_i)."""
    e = delta * si

    def f(t):
        base = np.exp(e * (math.log(y) - np.log(a * a + t * t)))
        wt = -np.expm1(-(t / H) ** (2 * _CUT_P))
        meas = 2.0 if delta == 1 else 2 * math.pi * t
        return base * wt * meas

    tot = 0j
    edges = [0.0, 0.5 * H, H, 2 * H, 8 * H, np.inf]
    for lo, hi in zip(edges[:-1], edges[1:]):
        re = integrate.quad(lambda t: f(t).real, lo, hi, epsabs=0, epsrel=1e-12, limit=200)[0]
        im = integrate.quad(lambda t: f(t).imag, lo, hi, epsabs=0, epsrel=1e-12, limit=200)[0]
        tot += complex(re, im)
    return tot


def _full_integral(delta: int, si: complex, y: float, a: float) -> complex:
    """int f_i over R or C in closed form."""
    e = delta * si
    return np.exp(e * math.log(y) + (delta - 2 * e) * math.log(a)) * _place_integral(delta, si)


def _c_block(field: NumberFieldDesc, sp: np.ndarray, z: PointOnH, c: np.ndarray,
             H0: float) -> complex:
    """sum over d in O of prod_i (y_i / |c_i z_i + d_i|^2)^(delta_i s_i) for one c != 0."""
    x, y = z.xa, z.ya
    delta = np.asarray(field.delta)
    a = np.abs(c) * y
    H = H0 * np.maximum(a, 1.0)
    center = -c * x
    pts = _lattice_points(field, center, _CUT_REACH * H)
    t = pts - center[None, :]
    q = a[None, :] ** 2 + np.abs(t) ** 2
    logterm = ((delta * sp)[None, :] * (np.log(y)[None, :] - np.log(q))).sum(axis=1)
    w = np.prod(_cut(np.abs(t) / H[None, :]), axis=1)
    lattice = complex(np.sum(np.exp(logterm) * w))
    full = [_full_integral(int(dl), si, yi, ai) for dl, si, yi, ai in zip(delta, sp, y, a)]
    tail = [_tail_integral(int(dl), si, yi, ai, Hi) for dl, si, yi, ai, Hi in zip(delta, sp, y, a, H)]
    head = [fi - ti for fi, ti in zip(full, tail)]
    return lattice + (np.prod(full) - np.prod(head)) / _covol(field)


def _norm_cutoff(field: NumberFieldDesc, z: PointOnH, target: float = 30.0) -> float:
    """Norm X beyond which the lattice sum over d equals its integral to e^-target."""
    ny = z.norm_y(field)
    if field.kind == "rational":
        return math.ceil(target / (2 * math.pi * z.y[0])) + 1
    if field.kind == "real":
        # min_eta sum |eta_i c_i| y_i >= 2 sqrt(N(eta) N(c) N(y)) with N(eta) >= 1/D
        need = (target / (2 * math.pi)) ** 2 * abs(field.D) / (4 * ny)
        return math.ceil(need) + 1
    # complex place: frequency 2|eta| with |eta| >= |kappa| = 1/sqrt|D|
    need = (target / (2 * math.pi * z.y[0] * 2 / math.sqrt(abs(field.D)))) ** 2
    return math.ceil(need) + 1


def eisenstein_direct(params: EisParams, z: PointOnH, cutoff: float | None = None,
                      H0: float = 25.0) -> EisValue:
    r"""E(s, m, z) from the lattice sum over all pairs (c, d) modulo units.

    Summing over every nonzero pair gives zeta(2s, lambda_{-2m}) E(s, m, z).
    Pairs with c = 0 contribute N y^s lambda_m(y) zeta(2s, lambda_{-2m}).
    For each c of norm <= ``cutoff`` the sum over d in O is taken over a
    smoothly weighted box, with the complementary weight integrated exactly;
    for larger N(c) the d-sum equals its integral up to e^-30 and is summed in
    closed form against zeta(2s - 1, lambda_{-2m}).
    """
    s = params.s
    if s.real <= 1:
        raise NotConvergent("direct sums need Re(s) > 1")
    field = params.field
    sp = params.s_places()
    X = cutoff if cutoff is not None else _norm_cutoff(field, z)
    ny = z.norm_y(field)
    y = z.ya
    lam_y = _lam_y(field, params.m, y)
    z2s = zeta_2s(params, 0)
    delta = np.asarray(field.delta)
    total = ny ** s * lam_y * z2s
    partial = 0j
    gens = ideal_generators(field, X)
    for g in gens:
        c = _emb(g)
        total += _c_block(field, sp, z, c, H0)
        partial += np.exp(np.sum(delta * (1 - 2 * sp) * np.log(np.abs(c))))
    gfac = np.prod([_place_integral(int(dl), si) for dl, si in zip(delta, sp)])
    big = zeta_2s(params, 1) - partial
    total += gfac / _covol(field) * ny ** (1 - s) * _lam_y(field, _neg(params.m), y) * big
    tail = math.exp(-30.0) * abs(total)
    val = total / z2s
    if params.trivial and s.imag == 0:
        val = complex(val.real, 0.0)
    return EisValue(complex(val), float(tail / abs(z2s)), len(gens))


# ------------------------------------------------------- Fourier expansion
@lru_cache(maxsize=4096)
def _divisors(xi: RingElement) -> tuple:
    return tuple(divisor_generators(xi))


def divisor_sum(params: EisParams, xi: RingElement) -> complex:
    """sigma(xi) = sum over ideals (c) | (xi) of prod_i |c_i|^(delta_i (1 - 2 s_i))."""
    sp = params.s_places()
    delta = np.asarray(params.field.delta)
    tot = 0j
    for c in _divisors(xi):
        tot += np.exp(np.sum(delta * (1 - 2 * sp) * np.log(np.abs(_emb(c)))))
    return tot


def _bessel_factor(delta: int, si: complex, a: float, y: float) -> complex:
    """Place factor of a_xi: the Fourier transform of (y/(y^2+|x|^2))^(delta s_i) at frequency a."""
    a = abs(a)
    if delta == 1:
        v = 2 * np.exp(si * math.log(math.pi) + (si - 0.5) * math.log(a) - _log_gamma(si)) * math.sqrt(y)
        return v * bessel_k_complex(si - 0.5, 2 * math.pi * a * y)
    u = 4 * math.pi * a * y
    v = 2 * math.pi * np.exp((2 - 2 * si) * math.log(y) + (2 * si - 1) * math.log(u)
                             - (2 * si - 1) * math.log(2) - _log_gamma(2 * si))
    return v * bessel_k_complex(2 * si - 1, u)


def _xi_candidates(field: NumberFieldDesc, z: PointOnH, T: float):
    """Nonzero xi with 2 pi sum_i delta_i |xi_i kappa_i| y_i <= T."""
    kap = np.abs(_emb(field.kappa))
    y = z.ya
    delta = np.asarray(field.delta)
    bound = T / (2 * math.pi)
    if field.kind == "rational":
        n = int(bound / y[0]) + 1
        a = np.array([v for v in range(-n, n + 1) if v != 0])
        b = np.zeros_like(a)
    elif field.kind == "real":
        r = bound / (kap * y)
        a, b = _real_box(field, tuple(-r), tuple(r))
    else:
        a, b = _disc_points(field, bound / (2 * kap[0] * y[0]))
    e = embed_array(field, a, b)
    score = (delta[None, :] * np.abs(e) * kap[None, :] * y[None, :]).sum(axis=1)
    keep = (score <= bound) & ((a != 0) | (b != 0))
    order = np.lexsort((b[keep], a[keep], score[keep]))
    return a[keep][order], b[keep][order], e[keep][order]


def eisenstein_fourier(params: EisParams, z: PointOnH, nterms: int = 10000,
                       T: float = 40.0) -> EisValue:
    r"""E(s, m, z) from its Fourier expansion.

    Constant term N y^s lambda_m(y) + phi(s, m) N y^(1-s) lambda_{-m}(y); the
    xi-th term is sigma(xi) prod_i B_i(xi_i kappa_i, y_i) e(tr(xi kappa x)) /
    (covol zeta(2s, lambda_{-2m})), summed over 2 pi sum delta_i |xi_i kappa_i| y_i <= T
    in increasing order of that quantity.
    """
    s = params.s
    field = params.field
    if s.real <= 0.5:
        raise NotConvergent("Fourier mode needs Re(s) > 1/2")
    if params.trivial and abs(s - 1) < 1e-6:
        raise PoleAtS1("E(s, z) has a pole at s = 1")
    sp = params.s_places()
    y, x = z.ya, z.xa
    delta = np.asarray(field.delta)
    ny = z.norm_y(field)
    const = ny ** s * _lam_y(field, params.m, y) \
        + scattering_phi(params) * ny ** (1 - s) * _lam_y(field, _neg(params.m), y)
    a, b, e = _xi_candidates(field, z, T)
    if len(a) > nterms:
        raise NotConvergent(f"{len(a)} Fourier terms exceed nterms = {nterms}")
    kap = _emb(field.kappa)
    z2s = zeta_2s(params, 0)
    tot = 0j
    for aa, bb, ee in zip(a.tolist(), b.tolist(), e):
        xi = field.element(aa, bb)
        sig = divisor_sum(params, xi)
        eta = ee * kap
        prod = 1 + 0j
        for dl, si, et, yi in zip(delta, sp, eta, y):
            prod *= _bessel_factor(int(dl), si, abs(et), yi)
        phase = np.sum(np.where(delta == 1, eta * x, 2 * np.real(eta * x))).real
        tot += sig * prod * np.exp(2j * math.pi * phase)
    val = const + tot / (_covol(field) * z2s)
    if params.trivial and s.imag == 0:
        val = complex(val.real, 0.0)
    tail = math.exp(-T) * max(1.0, abs(val))
    return EisValue(complex(val), float(tail), int(len(a)))


# ------------------------------------------------------ group action
def act_inversion(field: NumberFieldDesc, z: PointOnH) -> PointOnH:
    """z -> -1/z at every place."""
    xs, ys = [], []
    for dl, x, y in zip(field.delta, z.x, z.y):
        if dl == 1:
            w = -1 / complex(x, y)
            xs.append(w.real)
            ys.append(w.imag)
        else:
            r = abs(x) ** 2 + y * y
            xs.append(-np.conj(x) / r)
            ys.append(y / r)
    return PointOnH.make(xs, ys)


def act_translation(field: NumberFieldDesc, z: PointOnH, b: RingElement) -> PointOnH:
    return PointOnH.make(z.xa + _emb(b), z.ya)


def act_unit(field: NumberFieldDesc, z: PointOnH, u: RingElement) -> PointOnH:
    """z -> u^2 z, from the diagonal matrix (u, 0; 0, u^-1)."""
    e = _emb(u)
    return PointOnH.make(z.xa * e ** 2, z.ya * np.abs(e) ** 2)


# ------------------------------------------------- incomplete series
def _coprime(c: RingElement, d: RingElement, primes) -> bool:
    return not any(P.contains(d) for P in primes)


def _profile_support(psi) -> tuple[float, float]:
    return tuple(float(v) for v in psi.support)


def _coset_pairs(field: NumberFieldDesc, z: PointOnH, ny_min: float, max_pairs: int = 10 ** 7):
    """Coprime pairs (c, d) modulo units with N y(gamma z) >= ny_min, c != 0.

    Yields (c embeddings, d embeddings, N y(gamma z), y(gamma z)).
    """
    y, x = z.ya, z.xa
    delta = np.asarray(field.delta)
    ny = z.norm_y(field)
    nc_max = 1 / math.sqrt(ny_min * ny)
    if field.kind == "rational":
        gens = ideal_generators(field, math.floor(nc_max))
    else:
        gens = ideal_generators(field, nc_max)
    count = 0
    for g in gens:
        c = _emb(g)
        a = np.abs(c) * y
        lim = ny / ny_min  # prod q_i^delta_i <= lim
        base = np.prod(a ** (2 * delta))
        if base > lim:
            continue
        rad = np.sqrt(np.maximum((lim / base * a ** (2 * delta)) ** (1 / delta) - a ** 2, 0.0))
        center = -c * x
        if field.kind == "rational":
            lo, hi = math.ceil(center[0] - rad[0]), math.floor(center[0] + rad[0])
            ds = [field.element(v) for v in range(lo, hi + 1)]
        elif field.kind == "real":
            aa, bb = _real_box(field, tuple(center - rad), tuple(center + rad))
            ds = [field.element(int(p), int(q)) for p, q in zip(aa, bb)]
        else:
            aa, bb = _disc_points(field, abs(center[0]) + rad[0])
            ds = [field.element(int(p), int(q)) for p, q in zip(aa, bb)]
        count += len(ds)
        if count > max_pairs:
            raise SupportTooWide(f"more than {max_pairs} candidate pairs")
        primes = [P for P, _ in factor_element(g)] if abs(g.norm()) > 1 else []
        for d in ds:
            if field.kind == "rational":
                if math.gcd(int(g.a), int(d.a)) != 1:
                    continue
            elif primes and not _coprime(g, d, primes):
                continue
            de = _emb(d)
            q = a ** 2 + np.abs(c * x + de) ** 2
            yg = y / q
            nyg = float(np.prod(yg ** delta))
            if nyg >= ny_min * (1 - 1e-12):
                yield c, de, nyg, yg


def incomplete_eisenstein(field: NumberFieldDesc, psi, m: Sequence[int] | None, z: PointOnH) -> complex:
    r"""E(psi, m | z) = sum_{Gamma_inf \ Gamma} psi(N y(gamma z)) lambda_m(y(gamma z))."""
    m = tuple(m) if m is not None else field.zero_m()
    lo, hi = _profile_support(psi)
    if hi / lo > 100 ** 2 * 1.0001:
        raise SupportTooWide("profile support must lie in [1/a, a] with a <= 100")
    ny = z.norm_y(field)
    tot = complex(psi(np.array([ny]))[0]) * _lam_y(field, m, z.ya)
    if lo <= 0:
        raise SupportTooWide("support must be bounded away from 0")
    for _, _, nyg, yg in _coset_pairs(field, z, lo):
        v = float(psi(np.array([nyg]))[0])
        if v:
            tot += v * _lam_y(field, m, yg)
    return tot


def incomplete_eisenstein_mellin(field: NumberFieldDesc, psi, m: Sequence[int] | None, z: PointOnH,
                                 sigma: float = 2.0, h: float = 0.2, tmax: float | None = None) -> complex:
    r"""(1/2 pi i) int_{(sigma)} Psi(-s) E(s, m, z) ds by the trapezoid rule in Im s.

    ``psi`` needs a closed-form Mellin transform Psi(w) = int psi(t) t^w dt/t.
    """
    m = tuple(m) if m is not None else field.zero_m()
    if tmax is None:
        sg = getattr(psi, "sigma", 0.3)
        tmax = math.sqrt(2 * 36 * math.log(10)) / sg
    ts = np.arange(-tmax, tmax + h / 2, h)
    tot = 0j
    for t in ts:
        s = complex(sigma, t)
        E = eisenstein_fourier(EisParams(field, s, m), z).value
        tot += complex(psi.mellin(-s)) * E
    return tot * h / (2 * math.pi)


# -------------------------------------------------- unipotent series
def _unit_power_range(field: NumberFieldDesc, yg: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> range:
    """Integers j with eps_plus^j * yg inside the box [lo, hi] at the first place."""
    L = math.log(field.element(*field.eps_plus).embeddings()[0])
    a = (math.log(lo[0]) - math.log(yg[0])) / L
    b = (math.log(hi[0]) - math.log(yg[0])) / L
    return range(math.floor(a) - 1, math.ceil(b) + 2)


def _ep_powers(field: NumberFieldDesc, j: int) -> np.ndarray:
    e = np.asarray(field.element(*field.eps_plus).embeddings(), dtype=float)
    return e ** j


def unipotent_eisenstein(field: NumberFieldDesc, g, z: PointOnH, method: str = "pairs") -> float:
    r"""E(g | z) = sum_{Gamma_U \ Gamma} g(y(gamma z)) for a compactly supported g on R_+^r.

    Coset representatives are coprime pairs (c, d) modulo roots of unity (not
    modulo the free unit group), the identity coset appearing with all its
    unit translates (0, eps^j).  ``method="orbits"`` sums instead over pairs
    modulo all units and resums each orbit against eps_plus^j.
    """
    supports = [tuple(float(v) for v in s) for s in (g.supports if hasattr(g, "supports") else [g.support])]
    lo = np.array([s[0] for s in supports])
    hi = np.array([s[1] for s in supports])
    delta = np.asarray(field.delta)
    ny_min = float(np.prod(lo ** delta))
    y = z.ya

    def gval(yy):
        return float(np.asarray(g(np.atleast_2d(yy)) if field.r > 1 or hasattr(g, "factors")
                                else g(np.atleast_1d(yy))).ravel()[0])

    if field.kind != "real":
        tot = gval(y)
        for _, _, _, yg in _coset_pairs(field, z, ny_min):
            tot += gval(yg)
        return tot
    if method == "orbits":
        tot = 0.0
        for yg in [y] + [yg for _, _, _, yg in _coset_pairs(field, z, ny_min)]:
            for j in _unit_power_range(field, yg, lo, hi):
                tot += gval(yg * _ep_powers(field, j))
        return tot
    if method != "pairs":
        raise ValueError(method)
    return _unipotent_pairs(field, g, z, lo, hi, gval)


def _unipotent_pairs(field, g, z, lo, hi, gval) -> float:
    """Direct enumeration of pairs (c, d) mod +-1 with y(gamma z) in the support box."""
    y, x = z.ya, z.xa
    # identity coset and its unit translates (0, eps^j): y -> y / eps_plus^j
    tot = 0.0
    for j in _unit_power_range(field, y, lo, hi):
        tot += gval(y * _ep_powers(field, j))
    # c != 0: y_i / (c_i^2 y_i^2 + (c_i x_i + d_i)^2) >= lo_i bounds c_i and d_i
    cmax = np.sqrt(1 / (y * lo))
    aa, bb = _real_box(field, tuple(-cmax), tuple(cmax))
    for p, q in zip(aa.tolist(), bb.tolist()):
        if p == 0 and q == 0:
            continue
        c = field.element(p, q)
        ce = _emb(c)
        if ce[0] < 0:
            continue  # modulo -1
        a = np.abs(ce) * y
        rad2 = y / lo - a ** 2
        if np.any(rad2 < 0):
            continue
        rad = np.sqrt(rad2)
        center = -ce * x
        da, db = _real_box(field, tuple(center - rad), tuple(center + rad))
        primes = [P for P, _ in factor_element(c)] if abs(c.norm()) > 1 else []
        for u, v in zip(da.tolist(), db.tolist()):
            d = field.element(u, v)
            if primes and not _coprime(c, d, primes):
                continue
            de = _emb(d)
            yg = y / (a ** 2 + (ce * x + de) ** 2)
            if np.all(yg >= lo) and np.all(yg <= hi):
                tot += gval(yg)
    return tot


def unipotent_inner_product(field: NumberFieldDesc, g, n: int = 200) -> tuple[float, float]:
    r"""<E(g|.), 1> two ways: (covol / omega_plus) times a quadrature of
    int g(y) N y^-1 dy^x over the cusp coordinates, and the closed form
    2^-r2 omega_plus^-1 sqrt|D| G(-1, 0) with G from the Mellin transforms.
    """
    from .profiles import gauss_legendre

    factors = g.factors if hasattr(g, "factors") else (g,)
    quad = 1.0
    closed = 1.0
    for dl, f in zip(field.delta, factors):
        lo, hi = f.support
        t, w = gauss_legendre(math.log(lo), math.log(hi), n)
        yy = np.exp(t)
        quad *= float(np.sum(f(yy) * yy ** (-dl) * w))
        closed *= float(np.real(f.mellin(-dl)))
    pref = _covol(field) / field.omega_plus
    return pref * quad, 2.0 ** (-field.r2) / field.omega_plus * math.sqrt(abs(field.D)) * closed


# -------------------------------------------------------------- volumes
def volume_Y(field: NumberFieldDesc, cutoff: int = 100000, zeta: str = "exact") -> float:
    """2^(-4 r2 + 1) |D|^(3/2) zeta_F(2) / pi^n.

    zeta_F(2) = zeta(2) L(2, chi_D) by default; ``zeta="ideal-sum"`` uses the
    truncated ideal sum up to ``cutoff`` instead (accurate to about 1e-10).
    """
    if zeta == "exact":
        z2 = dedekind_zeta_exact(field, 2.0).real
    elif zeta == "ideal-sum":
        z2 = dedekind_zeta(field, 2.0, cutoff=cutoff).value.real
    else:
        raise ValueError(zeta)
    return 2.0 ** (-4 * field.r2 + 1) * abs(field.D) ** 1.5 * z2 / math.pi ** field.n


def cusp_volume_element(field: NumberFieldDesc) -> float:
    """V_c = 2^(r1 - r2 - 1 + [r1 = 0]) R."""
    return 2.0 ** (field.r1 - field.r2 - 1 + (1 if field.r1 == 0 else 0)) * field.R


def cusp_volume_jacobian(field: NumberFieldDesc, h: float = 1e-6) -> float:
    """|det d(log y)/d(log Y0, Y1, ...)| by central differences of the map Y -> y.

    The cusp measure prod dy_i/y_i^(1+delta_i) equals this constant times
    dY / Y0^2, so it must agree with :func:`cusp_volume_element`.
    """
    A = np.asarray(field.A)

    def logy(v):
        return A @ v

    r = field.r
    J = np.zeros((r, r))
    base = np.zeros(r)
    for j in range(r):
        e = np.zeros(r)
        e[j] = h
        J[:, j] = (logy(base + e) - logy(base - e)) / (2 * h)
    return abs(float(np.linalg.det(J)))


def volume_residue_oracle(field: NumberFieldDesc) -> float:
    """V_c 2^-r2 omega_plus^-1 sqrt|D| / Res_{s=1} phi(s), residue by contour quadrature."""
    return cusp_volume_element(field) * 2.0 ** (-field.r2) / field.omega_plus \
        * math.sqrt(abs(field.D)) / scattering_residue(field)


def volume_by_quadrature(field: NumberFieldDesc, n: int = 200) -> float:
    """Hyperbolic volume of a classical fundamental domain (Q and Q(i) only).

    Q: {|x| <= 1/2, |z| >= 1}.  Q(i): the Picard domain
    {|Re x| <= 1/2, 0 <= Im x <= 1/2, |x|^2 + y^2 >= 1} with dv = dx dy / y^3.
    """
    from .profiles import gauss_legendre

    if field.kind == "rational":
        return integrate.quad(lambda x: 1 / math.sqrt(1 - x * x), -0.5, 0.5, epsabs=1e-15)[0]
    if field.kind == "imaginary" and field.d == -1:
        u, wu = gauss_legendre(-0.5, 0.5, n)
        v, wv = gauss_legendre(0.0, 0.5, n)
        U, V = np.meshgrid(u, v)
        vals = 1 / (2 * (1 - U ** 2 - V ** 2))
        return float(np.einsum("i,ij,j->", wv, vals, wu))
    raise DivergentIntegral("no classical fundamental domain implemented for this field")
