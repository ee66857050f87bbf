r"""Holomorphic Hecke eigenforms on SL(2, Z) and the experiments built on them.

q-expansions are exact (python-flint integer polynomials).  Eigenforms in
spaces of dimension > 1 are found by diagonalizing T_2 exactly: the
characteristic polynomial is factored over Q and each eigenvector is solved
for in Q[x]/(chi).  Floating values are derived from the exact data at the
end, using certified real roots of chi.
"""
from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import flint
import mpmath
import numpy as np
from scipy import optimize, special

from .errors import InsufficientPrecision, QuadratureBudgetExceeded, TailNotBounded, ZeroOnContour
from .numberfield import rational_primes
from .profiles import gauss_legendre, inverse_square_integral, profile_quadrature

fmpz_poly = flint.fmpz_poly
fmpq_poly = flint.fmpq_poly

WEIGHTS = tuple(k for k in range(12, 62, 2) if k != 14)


# ------------------------------------------------------------ q-expansions
@dataclass(frozen=True, eq=False)
class QExpansion:
    """Exact q-expansion a(0..N-1) of a weight-k form."""

    k: int
    poly: fmpz_poly
    N: int

    def __getitem__(self, n: int) -> int:
        if n >= self.N:
            raise IndexError(n)
        return int(self.poly[n])

    def coeffs(self) -> list[int]:
        c = [int(v) for v in self.poly.coeffs()]
        return c + [0] * (self.N - len(c))

    def __mul__(self, other: QExpansion) -> QExpansion:
        N = min(self.N, other.N)
        return QExpansion(self.k + other.k, self.poly.mul_low(other.poly, N), N)

    def __add__(self, other: QExpansion) -> QExpansion:
        if self.k != other.k:
            raise ValueError("weights differ")
        N = min(self.N, other.N)
        return QExpansion(self.k, (self.poly + other.poly).truncate(N), N)

    def __sub__(self, other: QExpansion) -> QExpansion:
        N = min(self.N, other.N)
        return QExpansion(self.k, (self.poly - other.poly).truncate(N), N)

    def scale(self, c: int) -> QExpansion:
        return QExpansion(self.k, self.poly * c, self.N)

    def pow(self, e: int) -> QExpansion:
        if e == 0:
            return QExpansion(0, fmpz_poly([1]), self.N)
        return QExpansion(self.k * e, self.poly.pow_trunc(e, self.N), self.N)

    def equals(self, other: QExpansion) -> bool:
        N = min(self.N, other.N)
        return self.poly.truncate(N) == other.poly.truncate(N)


def _sigma_poly(r: int, N: int, scale: int) -> fmpz_poly:
    sig = np.zeros(N, dtype=object)
    sig[:] = 0
    for d in range(1, N):
        sig[d::d] += d ** r
    coeffs = [1] + [scale * int(v) for v in sig[1:]]
    return fmpz_poly(coeffs)


def _cache_path(ident: str, k: int, N: int) -> str | None:
    root = os.environ.get("QUELAB_CACHE")
    if not root:
        return None
    return os.path.join(root, f"{ident}_k{k}_N{N}.txt")


def _cache_load(ident: str, k: int, N: int) -> QExpansion | None:
    path = _cache_path(ident, k, N)
    if path is None or not os.path.exists(path):
        return None
    coeffs = [0] * N
    with open(path) as fh:
        for line in fh:
            kk, idx, c = line.split()
            if int(kk) != k:
                return None
            coeffs[int(idx)] = int(c)
    return QExpansion(k, fmpz_poly(coeffs), N)


def _cache_store(ident: str, q: QExpansion) -> None:
    path = _cache_path(ident, q.k, q.N)
    if path is None:
        return
    os.makedirs(os.path.dirname(path), exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        for i, c in enumerate(q.coeffs()):
            fh.write(f"{q.k} {i} {c}\n")
    os.replace(tmp, path)


def eta_delta(N: int) -> QExpansion:
    """Delta = q prod (1 - q^n)^24 via the cube of eta: prod(1-q^n)^3 = sum (-1)^m (2m+1) q^{m(m+1)/2}."""
    J = [0] * N
    m = 0
    while m * (m + 1) // 2 < N:
        J[m * (m + 1) // 2] = (-1) ** m * (2 * m + 1)
        m += 1
    P = fmpz_poly(J).pow_trunc(8, max(N - 1, 1))
    return QExpansion(12, P.left_shift(1).truncate(N), N)


@lru_cache(maxsize=16)
def qexp_basic(ident: str, N: int) -> QExpansion:
    """E4, E6 or Delta to N terms (indices 0..N-1), exact."""
    k = {"E4": 4, "E6": 6, "Delta": 12}[ident]
    cached = _cache_load(ident, k, N)
    if cached is not None:
        return cached
    if ident == "E4":
        q = QExpansion(4, _sigma_poly(3, N, 240), N)
    elif ident == "E6":
        q = QExpansion(6, _sigma_poly(5, N, -504), N)
    else:
        q = eta_delta(N)
    _cache_store(ident, q)
    return q


def delta_identity_holds(N: int) -> bool:
    """E4^3 - E6^2 == 1728 Delta exactly to N terms."""
    E4, E6, D = qexp_basic("E4", N), qexp_basic("E6", N), qexp_basic("Delta", N)
    return (E4.pow(3) - E6.pow(2)).equals(D.scale(1728))


def eisenstein_monomial(w: int, N: int) -> QExpansion:
    """A form of weight w with constant term 1 built from E4 and E6."""
    if w == 0:
        return QExpansion(0, fmpz_poly([1]), N)
    b = 0 if w % 4 == 0 else 1
    a = (w - 6 * b) // 4
    if a < 0 or w == 2:
        raise ValueError(f"no form of weight {w}")
    out = qexp_basic("E4", N).pow(a)
    if b:
        out = out * qexp_basic("E6", N)
    return out


def cusp_dimension(k: int) -> int:
    if k % 2 or k < 12:
        return 0
    return k // 12 - (1 if k % 12 == 2 else 0)


def miller_basis(k: int, N: int) -> list[QExpansion]:
    """Integral echelon basis f_i = q^i + O(q^{d+1}), i = 1..d, of S_k."""
    d = cusp_dimension(k)
    D = qexp_basic("Delta", N)
    raw = [D.pow(i) * eisenstein_monomial(k - 12 * i, N) for i in range(1, d + 1)]
    # raw[i] = q^{i+1} + ..., unitriangular; clear entries above the diagonal
    basis = list(raw)
    for i in range(d - 1, -1, -1):
        for j in range(i + 1, d):
            c = basis[i][j + 1]
            if c:
                basis[i] = basis[i] - basis[j].scale(c)
    return basis


def hecke_image_coeff(a: Callable[[int], object], p: int, k: int, n: int):
    """Coefficient n of T_p f from the coefficient function a."""
    v = a(p * n)
    if n % p == 0:
        v = v + p ** (k - 1) * a(n // p)
    return v


def hecke_matrix(k: int, p: int, N: int | None = None) -> flint.fmpz_mat:
    """Matrix of T_p on the echelon basis, T_p f_i = sum_j M[i, j] f_j."""
    d = cusp_dimension(k)
    N = N or p * d + 2
    B = miller_basis(k, N)
    rows = []
    for f in B:
        rows.append([int(hecke_image_coeff(lambda n: f[n], p, k, j)) for j in range(1, d + 1)])
    return flint.fmpz_mat(rows)


# ------------------------------------------------- arithmetic in Q[x]/(chi)
class _NF:
    """Arithmetic in Q[x]/(chi) with chi irreducible."""

    def __init__(self, chi: fmpz_poly):
        self.chi = fmpq_poly(chi)

    def red(self, a: fmpq_poly) -> fmpq_poly:
        return a % self.chi

    def inv(self, a: fmpq_poly) -> fmpq_poly:
        g, s, _ = a.xgcd(self.chi)
        if g.degree() != 0:
            raise ZeroDivisionError
        return self.red(s / g)

    def solve_left_eigvec(self, M: list[list[int]]) -> list[fmpq_poly]:
        """v with v M = x v and v[0] = 1, by elimination on (M - x)^T."""
        d = len(M)
        x = fmpq_poly([0, 1])
        A = [[fmpq_poly([M[j][i]]) - (x if i == j else 0) for j in range(d)] for i in range(d)]
        # row-reduce A (rows indexed by equation i: sum_j v_j (M[j][i] - x delta) = 0)
        piv_cols = []
        r = 0
        for c in range(d):
            pr = next((i for i in range(r, d) if not self.red(A[i][c]).is_zero()), None)
            if pr is None:
                continue
            A[r], A[pr] = A[pr], A[r]
            inv = self.inv(self.red(A[r][c]))
            A[r] = [self.red(v * inv) for v in A[r]]
            for i in range(d):
                if i != r:
                    f = self.red(A[i][c])
                    if not f.is_zero():
                        A[i] = [self.red(A[i][j] - f * A[r][j]) for j in range(d)]
            piv_cols.append(c)
            r += 1
        free = [c for c in range(d) if c not in piv_cols]
        if len(free) != 1:
            raise ArithmeticError("eigenspace is not one-dimensional")
        v = [fmpq_poly([0])] * d
        v[free[0]] = fmpq_poly([1])
        for row, c in enumerate(piv_cols):
            v[c] = self.red(-A[row][free[0]])
        inv0 = self.inv(v[0])
        return [self.red(t * inv0) for t in v]


def _certified_real_roots(chi: fmpz_poly, prec: int = 128) -> list[mpmath.mpf]:
    old = flint.ctx.prec
    flint.ctx.prec = prec
    try:
        roots = chi.complex_roots()
    finally:
        flint.ctx.prec = old
    out = []
    for r, mult in roots:
        if mult != 1:
            raise InsufficientPrecision("repeated root")
        if not r.imag.contains(0):
            raise InsufficientPrecision("T_2 eigenvalue is not certified real")
        mid = r.real.mid().str(50, radius=False)
        rad = float(r.real.rad().str(5, radius=False)) if hasattr(r.real, "rad") else 0.0
        out.append((mpmath.mpf(mid), rad))
    out.sort(key=lambda t: t[0])
    for (a, ra), (b, rb) in zip(out[:-1], out[1:]):
        if b - a <= ra + rb:
            raise InsufficientPrecision("root intervals overlap")
    return [t[0] for t in out]


# ------------------------------------------------------------------ forms
@dataclass(eq=False)
class Eigenform:
    """Normalized Hecke eigenform, a(1) = 1.

    Exact coefficients are a(n) = (sum_j A[j][n] alpha^j) / den where alpha is
    the T_2 eigenvalue (a root of ``chi``); for one-dimensional spaces chi is
    None and a(n) = A[0][n].
    """

    k: int
    A: list
    den: int
    chi: fmpz_poly | None
    alpha: mpmath.mpf | None
    N: int
    label: str = ""
    _lam: np.ndarray | None = dc_field(default=None, repr=False)
    _norm: float | None = dc_field(default=None, repr=False)

    @property
    def degree(self) -> int:
        return 1 if self.chi is None else self.chi.degree()

    def a_exact(self, n: int):
        """a(n) as an int (dimension one) or an element of Q[x]/(chi)."""
        if n >= self.N:
            raise TailNotBounded(f"coefficient {n} beyond stored N = {self.N}")
        if self.chi is None:
            return int(self.A[0][n])
        return fmpq_poly([int(Aj[n]) for Aj in self.A]) / self.den

    def a_exact_list(self, nmax: int) -> list:
        if self.chi is None:
            c = self.A[0].coeffs()
            c = [int(v) for v in c] + [0] * max(0, nmax + 1 - len(c))
            return c[: nmax + 1]
        cols = [[int(v) for v in Aj.coeffs()] for Aj in self.A]
        cols = [c + [0] * max(0, nmax + 1 - len(c)) for c in cols]
        return [fmpq_poly([c[n] for c in cols]) / self.den for n in range(nmax + 1)]

    def a_float(self, nmax: int) -> np.ndarray:
        """Unnormalized a(n) as floats for n = 0..nmax (may be large)."""
        return self.lam(nmax) * np.arange(nmax + 1, dtype=float) ** ((self.k - 1) / 2)

    def lam(self, nmax: int | None = None) -> np.ndarray:
        """Normalized eigenvalues lambda(n) = a(n) / n^{(k-1)/2}, index 0 unused."""
        nmax = self.N - 1 if nmax is None else nmax
        if nmax >= self.N:
            raise TailNotBounded(f"coefficient {nmax} beyond stored N = {self.N}")
        if self._lam is not None and len(self._lam) > nmax:
            return self._lam[: nmax + 1]
        out = np.zeros(nmax + 1)
        h = (self.k - 1) / 2
        if self.chi is None:
            c = self.A[0]
            for n in range(1, nmax + 1):
                v = int(c[n])
                if v:
                    out[n] = math.copysign(math.exp(math.log(abs(v)) - h * math.log(n)), v)
        else:
            with mpmath.workdps(60):
                al = [self.alpha ** j for j in range(len(self.A))]
                cols = [[int(v) for v in Aj.coeffs()] for Aj in self.A]
                for n in range(1, nmax + 1):
                    s = mpmath.mpf(0)
                    for j, c in enumerate(cols):
                        if n < len(c) and c[n]:
                            s += c[n] * al[j]
                    out[n] = float(s / self.den / mpmath.power(n, h))
        self._lam = out
        return out

    def lam_primes(self, P: int) -> tuple[np.ndarray, np.ndarray]:
        p = rational_primes(min(P, self.N - 1))
        lam = self.lam(int(p[-1]))
        return p, lam[p]


def _dim_one_form(k: int, N: int) -> Eigenform:
    D = qexp_basic("Delta", N)
    f = D * eisenstein_monomial(k - 12, N) if k > 12 else D
    return Eigenform(k, [f.poly], 1, None, None, N, label=f"k{k}")


@lru_cache(maxsize=64)
def eigenforms(k: int, N: int = 2000) -> tuple[Eigenform, ...]:
    """All normalized Hecke eigenforms of weight k, coefficients a(0..N-1)."""
    d = cusp_dimension(k)
    if d == 0:
        return ()
    if d == 1:
        return (_dim_one_form(k, N),)
    B = miller_basis(k, max(N, 2 * d + 2))
    M = hecke_matrix(k, 2)
    chi_full = M.charpoly()
    _, facs = chi_full.factor()
    Mlist = [[int(M[i, j]) for j in range(d)] for i in range(d)]
    out = []
    for g, mult in facs:
        if mult != 1:
            raise ArithmeticError("T_2 has a repeated eigenvalue")
        if g.leading_coefficient() < 0:
            g = -g
        nf = _NF(g)
        v = nf.solve_left_eigvec(Mlist)
        e = g.degree()
        den = math.lcm(*[int(t.q) for t in v])
        A = []
        for j in range(e):
            acc = fmpz_poly([])
            for i in range(d):
                c = v[i][j] * den
                acc += B[i].poly * int(c.p)
            A.append(acc.truncate(N))
        roots = _certified_real_roots(g)
        for idx, r in enumerate(roots):
            out.append(Eigenform(k, A, den, g, r, N, label=f"k{k}_{idx}"))
    out.sort(key=lambda f: float(f.lam(2)[2]))
    # stable labels after sorting by lambda(2)
    for i, f in enumerate(out):
        f.label = f"k{k}" if len(out) == 1 else f"k{k}_{i}"
    return tuple(out)


def representative(k: int, N: int = 2000) -> Eigenform:
    """The eigenform of weight k with the largest lambda(2); fixed choice for k-families."""
    return eigenforms(k, N)[-1]


def delta_form(N: int) -> Eigenform:
    return _dim_one_form(12, N)


def delta_prime_lambdas(P: int) -> tuple[np.ndarray, np.ndarray]:
    """Normalized tau(p)/p^{11/2} for all primes p <= P, from the exact series."""
    D = qexp_basic("Delta", P + 1)
    ps = rational_primes(P)
    lam = np.array([int(D.poly[int(p)]) / float(p) ** 5.5 for p in ps])
    return ps, lam


# ------------------------------------------------------ exact Hecke checks
def check_hecke_relations(f: Eigenform, nmax: int) -> tuple[bool, int]:
    """a(p) a(n) = a(pn) + p^{k-1} a(n/p) for all p n <= nmax, and a(m) a(n) = a(mn) for coprime m, n.

    Returns (all hold, number of identities checked).
    """
    a = f.a_exact_list(nmax)
    red = (lambda x: x) if f.chi is None else (lambda x: x % fmpq_poly(f.chi))
    checked = 0
    for p in rational_primes(nmax):
        p = int(p)
        pk = p ** (f.k - 1)
        for n in range(1, nmax // p + 1):
            rhs = a[p * n] + (pk * a[n // p] if n % p == 0 else 0)
            if red(a[p] * a[n] - rhs) != 0:
                return False, checked
            checked += 1
    for m in range(2, int(math.isqrt(nmax)) + 1):
        for n in range(m + 1, nmax // m + 1):
            if math.gcd(m, n) == 1:
                if red(a[m] * a[n] - a[m * n]) != 0:
                    return False, checked
                checked += 1
    return True, checked


def deligne_holds(f: Eigenform, P: int) -> bool:
    """|a(p)| <= 2 p^{(k-1)/2} at every prime p <= P, compared exactly via squares.

    For forms with an irrational field of coefficients the check uses the
    real embedding with 50-digit arithmetic.
    """
    for p in rational_primes(P):
        p = int(p)
        if f.chi is None:
            ap = f.a_exact(p)
            if ap * ap > 4 * p ** (f.k - 1):
                return False
        else:
            if abs(f.lam(p)[p]) > 2:
                return False
    return True


# ---------------------------------------------------------- evaluation
def _terms_needed(k: int, ymin: float, tol: float = 1e-17) -> int:
    """n beyond which d(n) n^{(k-1)/2} e^{-2 pi n y} is below tol times its peak."""
    h = (k - 1) / 2
    n_peak = max(1.0, h / (2 * math.pi * ymin))
    peak = h * math.log(n_peak) - 2 * math.pi * n_peak * ymin
    n = n_peak
    while h * math.log(n) + 2 * math.log(n) - 2 * math.pi * n * ymin > peak + math.log(tol):
        n *= 1.2
    return int(n) + 2


def evaluate_scaled(f: Eigenform, z, nterms: int | None = None) -> np.ndarray:
    """y^{k/2} f(z) for an array of points z, computed term-wise in log scale."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    y = z.imag
    ymin = float(y.min())
    if ymin < 0.05:
        raise TailNotBounded("Im z must be at least 0.05")
    N = nterms or _terms_needed(f.k, ymin)
    if N >= f.N:
        raise TailNotBounded(f"need {N} coefficients, have {f.N}")
    lam = f.lam(N)
    n = np.arange(1, N + 1, dtype=float)
    h = (f.k - 1) / 2
    out = np.zeros(z.shape, dtype=complex)
    logy = np.log(y)
    for chunk in np.array_split(np.arange(len(z)), max(1, len(z) // 2000)):
        zz = z[chunk]
        ex = (h * np.log(n))[None, :] + (f.k / 2) * logy[chunk][:, None] - 2 * np.pi * n[None, :] * zz.imag[:, None]
        ph = 2 * np.pi * n[None, :] * zz.real[:, None]
        out[chunk] = np.sum(lam[1:][None, :] * np.exp(ex + 1j * ph), axis=1)
    return out


def evaluate_form(f: Eigenform, z: complex, tol: float = 1e-12) -> complex:
    """f(z) by its q-series with the Deligne tail below tol relative to the peak term."""
    y = complex(z).imag
    N = _terms_needed(f.k, y, tol=min(tol, 1e-3) * 1e-3)
    return complex(evaluate_scaled(f, [z], N)[0]) * y ** (-f.k / 2)


# ---------------------------------------------------------- norms and mass
Y0 = 1.2


def _log_upper_gamma_terms(k: int, lam: np.ndarray, ylo: float) -> np.ndarray:
    """log of lam(n)^2 (4 pi)^{1-k} Gamma(k-1, 4 pi n ylo) term by term."""
    n = np.arange(1, len(lam), dtype=float)
    x = 4 * np.pi * n * ylo
    lg = special.gammaln(k - 1) + np.log(np.maximum(special.gammaincc(k - 1, x), 1e-300))
    # gammaincc underflows for large x; use the leading asymptotic term there
    big = special.gammaincc(k - 1, x) < 1e-280
    lg = np.where(big, (k - 2) * np.log(x) - x, lg)
    return 2 * np.log(np.abs(lam[1:]) + 1e-300) + (1 - k) * math.log(4 * math.pi) + lg


def petersson_upper(f: Eigenform, ylo: float = Y0) -> float:
    """int_{ylo}^inf int_0^1 y^k |f|^2 dx dy / y^2 by Parseval."""
    N = _terms_needed(f.k, ylo, 1e-20)
    lam = f.lam(N)
    return float(np.sum(np.exp(_log_upper_gamma_terms(f.k, lam, ylo))))


def _domain_nodes(nx: int, ny: int, ytop: float):
    """Tensor Gauss-Legendre nodes for {0 <= x <= 1/2, sqrt(1-x^2) <= y <= ytop} (half domain)."""
    xs, wx = gauss_legendre(0.0, 0.5, nx)
    Z, W = [], []
    for x, w in zip(xs, wx):
        yb = math.sqrt(1 - x * x)
        ys, wy = gauss_legendre(yb, ytop, ny)
        Z.append(x + 1j * ys)
        W.append(w * wy)
    return np.concatenate(Z), np.concatenate(W)


def petersson_lower(f: Eigenform, ytop: float = Y0, nx: int = 48, ny: int = 48) -> float:
    """int over the part of the fundamental domain below ytop, 2-D Gauss-Legendre."""
    Z, W = _domain_nodes(nx, ny, ytop)
    F = evaluate_scaled(f, Z)
    return float(2 * np.sum(W * np.abs(F) ** 2 / Z.imag ** 2))


def petersson_norm_sq(f: Eigenform) -> float:
    """<f, f> = int_F y^k |f|^2 dx dy / y^2 (split quadrature at y = 1.2)."""
    if f._norm is None:
        f._norm = petersson_lower(f) + petersson_upper(f)
    return f._norm


def holonorm_petersson(k: int, L1sym2: float) -> float:
    """<f, f> implied by |a(1)|^2 = (4 pi)^k / Gamma(k) * (pi/2) / L(1, sym^2) for a(1) = 1."""
    return math.exp(special.gammaln(k) - k * math.log(4 * math.pi)) * 2 * L1sym2 / math.pi


@dataclass
class MassMeasure:
    """mu_f = y^k |f|^2 dmu / <f, f> on the modular surface."""

    f: Eigenform

    @property
    def norm_sq(self) -> float:
        return petersson_norm_sq(self.f)

    def unfold(self, psi, nquad: int = 300) -> float:
        """mu_f(E(psi|.)) = sum_n |a(n)|^2 int psi(y) y^{k-2} e^{-4 pi n y} dy / <f,f>."""
        k = self.f.k
        ys, ws = profile_quadrature(psi, nquad)
        N = _terms_needed(k, float(ys.min()), 1e-22)
        lam = self.f.lam(N)
        n = np.arange(1, N + 1, dtype=float)
        logt = (k - 1) * np.log(n)[:, None] + (k - 2) * np.log(ys)[None, :] - 4 * np.pi * n[:, None] * ys[None, :]
        vals = (lam[1:] ** 2)[:, None] * np.exp(logt) * (psi(ys) * ws)[None, :]
        return float(vals.sum() / self.norm_sq)

    def quadrature(self, phi: Callable, ytop: float | None = None, nx: int = 64, ny: int = 64,
                   max_nodes: int = 10 ** 6) -> float:
        """int_F phi |F|^2 dmu by tensor Gauss-Legendre over the truncated domain.

        ``phi`` is evaluated on arrays of points z.  The domain is truncated
        where y^k |f|^2 has decayed below 1e-30 of its peak.
        """
        k = self.f.k
        ytop = ytop or max(3.0, 3 * k / (4 * math.pi) + 4.0)
        segs = [(Y0, min(ytop, 2.5))] + ([(2.5, ytop)] if ytop > 2.5 else [])
        if nx * ny * (1 + len(segs)) > max_nodes:
            raise QuadratureBudgetExceeded("too many nodes")
        Z, W = _domain_nodes(nx, ny, Y0)
        Z = np.concatenate([Z, -np.conj(Z)])
        W = np.concatenate([W, W])
        for a, b in segs:
            xs, wx = gauss_legendre(-0.5, 0.5, nx)
            ys, wy = gauss_legendre(a, b, ny)
            XX, YY = np.meshgrid(xs, ys)
            Z = np.concatenate([Z, (XX + 1j * YY).ravel()])
            W = np.concatenate([W, np.outer(wy, wx).ravel()])
        F = evaluate_scaled(self.f, Z)
        vals = np.asarray(phi(Z), dtype=float)
        return float(np.sum(W * vals * np.abs(F) ** 2 / Z.imag ** 2) / self.norm_sq)


def mass_integral(mm: MassMeasure, phi, method: str = "unfold", **kw) -> float:
    """mu_f(phi); ``unfold`` needs phi to be a profile psi of E(psi|.)."""
    if method == "unfold":
        return mm.unfold(phi, **kw)
    if method == "quadrature":
        return mm.quadrature(phi, **kw)
    raise ValueError(method)


def que_discrepancy(f: Eigenform, psi) -> float:
    """|mu_f(E(psi|.)) - (3/pi) int psi(y) y^-2 dy|."""
    mm = MassMeasure(f)
    return abs(mm.unfold(psi) - 3 / math.pi * inverse_square_integral(psi))


def family_que_discrepancy(k: int, psi, N: int = 3000) -> float:
    """Mean of the QUE discrepancy over the Hecke eigenbasis of weight k."""
    return float(np.mean([que_discrepancy(f, psi) for f in eigenforms(k, N)]))


# ---------------------------------------------------------- shifted sums
def shifted_sum(lam: np.ndarray, l: int, x: int) -> float:
    """sum_{n <= x} |lambda(n) lambda(n + l)|."""
    if x + l >= len(lam):
        raise TailNotBounded("coefficients do not reach x + l")
    return float(np.sum(np.abs(lam[1: x + 1] * lam[1 + l: x + 1 + l])))


def shifted_sum_ratio(lam: np.ndarray, l: int, xs: Sequence[int]) -> list[float]:
    """R(x) = S_l(x) (log x)^2 / (x prod_{p<=x} (1 + 2|lambda(p)|/p)) for each x."""
    out = []
    for x in xs:
        ps = rational_primes(x).astype(int)
        prod = math.exp(math.fsum(np.log1p(2 * np.abs(lam[ps]) / ps)))
        out.append(shifted_sum(lam, l, int(x)) * math.log(x) ** 2 / (x * prod))
    return out


def ems_average(lam: np.ndarray, xs: Sequence[int]) -> list[float]:
    """sum_{n <= x} |lambda(n)| / x for each x."""
    cs = np.cumsum(np.abs(lam))
    return [float(cs[int(x)] / x) for x in xs]


# ---------------------------------------------------------- sup norm
def sup_mass(f: Eigenform, nx: int = 40, ny: int = 120, ytop: float = 10.0) -> tuple[float, complex]:
    """max of y^{k/2} |f(z)| / ||f|| over the fundamental domain, with local refinement."""
    norm = math.sqrt(petersson_norm_sq(f))
    xs = np.linspace(0, 0.5, nx)
    best = (-1.0, 0j)
    for x in xs:
        yb = math.sqrt(1 - x * x)
        ys = np.geomspace(yb, ytop, ny)
        v = np.abs(evaluate_scaled(f, x + 1j * ys))
        i = int(np.argmax(v))
        if v[i] > best[0]:
            best = (float(v[i]), complex(x, ys[i]))

    def neg(p):
        x, y = p
        x = min(max(x, 0.0), 0.5)
        y = max(y, math.sqrt(1 - x * x), 0.06)
        return -abs(evaluate_scaled(f, [complex(x, y)])[0])

    res = optimize.minimize(neg, [best[1].real, best[1].imag], method="Nelder-Mead",
                            options={"xatol": 1e-9, "fatol": 1e-14})
    val = -res.fun
    if val > best[0]:
        x = min(max(res.x[0], 0.0), 0.5)
        best = (val, complex(x, max(res.x[1], math.sqrt(1 - x * x))))
    return best[0] / norm, best[1]


def integraltest_check(g: Callable, delta: float, t: Sequence[float] | float, nmax: int = 10 ** 6):
    """Sum of g over the lattice delta Z_+ versus 4 (int g + g(t)) in one dimension.

    ``t`` is the maximizer of g.  Returns (lhs, rhs).
    """
    from scipy import integrate

    n = np.arange(1, nmax + 1) * delta
    lhs = float(np.sum(g(n)))
    tt = float(np.atleast_1d(t)[0])
    integ = integrate.quad(g, 0, np.inf, limit=400)[0]
    return lhs, 4 * (integ + float(g(tt)))


def integraltest_scaled(g: Callable, delta: float, t: float, nmax: int = 10 ** 6):
    """Same comparison with the integral measured in lattice units (int g / delta)."""
    from scipy import integrate

    n = np.arange(1, nmax + 1) * delta
    lhs = float(np.sum(g(n)))
    integ = integrate.quad(g, 0, np.inf, limit=400)[0] / delta
    return lhs, 4 * (integ + float(g(t)))


# ---------------------------------------------------------- zeros
RHO = complex(0.5, math.sqrt(3) / 2)


@dataclass(frozen=True)
class Zero:
    z: complex
    order: int
    kind: str  # "i", "rho" or "generic"

    @property
    def weight(self) -> Fraction:
        return Fraction(self.order, {"i": 2, "rho": 3}.get(self.kind, 1))


@dataclass(frozen=True)
class ZeroSet:
    k: int
    zeros: tuple
    cusp_order: int

    def valence(self) -> Fraction:
        return self.cusp_order + sum((z.weight for z in self.zeros), Fraction(0))

    def valence_holds(self) -> bool:
        return self.valence() == Fraction(self.k, 12)


def _g_and_dg(coef: np.ndarray, z: np.ndarray):
    """g = f / q and its derivative by Horner in q; coef[j] = a(j+1)."""
    q = np.exp(2j * np.pi * np.asarray(z, dtype=complex))
    g = np.zeros_like(q)
    dg = np.zeros_like(q)
    for j in range(len(coef) - 1, -1, -1):
        dg = dg * q + j * coef[j]
        g = g * q + coef[j]
    # dg currently holds sum j a q^{j}/q; derivative in z is 2 pi i sum j a q^j
    return g, 2j * np.pi * dg * q / np.where(q == 0, 1, q) * 1.0


def _scaled_coeffs(f: Eigenform, ymin: float) -> tuple[np.ndarray, float]:
    """Coefficients of g = f/q rescaled by a constant to stay inside double range."""
    N = _terms_needed(f.k, ymin, 1e-20)
    lam = f.lam(N)
    n = np.arange(1, N + 1, dtype=float)
    loga = (f.k - 1) / 2 * np.log(n)
    shift = float(np.max(loga - 2 * np.pi * (n - 1) * ymin))
    return lam[1:] * np.exp(loga - shift), shift


def _winding(gfun, corners, min_pts: int = 64, tol: float = 0.6) -> tuple[int, float]:
    """Winding number of g around a rectangle, with adaptive refinement.

    Returns (winding, min |g| seen on the contour).
    """
    x0, x1, y0, y1 = corners
    path = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1), complex(x0, y0)]
    total = 0.0
    gmin = np.inf
    for a, b in zip(path[:-1], path[1:]):
        t = np.linspace(0, 1, min_pts)
        for _ in range(30):
            z = a + (b - a) * t
            g = gfun(z)
            gmin = min(gmin, float(np.min(np.abs(g))))
            d = np.angle(g[1:] / g[:-1])
            bad = np.abs(d) > tol
            if not bad.any():
                break
            mids = (t[:-1][bad] + t[1:][bad]) / 2
            t = np.sort(np.concatenate([t, mids]))
        else:
            raise ZeroOnContour("contour refinement did not resolve the argument")
        total += float(np.sum(d))
    return int(round(total / (2 * np.pi))), gmin


def reduce_to_fundamental_domain(z: complex) -> complex:
    """Standard reduction into |x| <= 1/2, |z| >= 1 with boundary identifications."""
    z = complex(z)
    for _ in range(200):
        z = complex(z.real - math.floor(z.real + 0.5), z.imag)
        if abs(z) < 1 - 1e-13:
            z = -1 / z
        else:
            break
    x, y = z.real, z.imag
    if abs(x + 0.5) < 1e-9:
        x = 0.5
    if abs(abs(complex(x, y)) - 1) < 1e-9 and x < 0:
        x = -x
    return complex(x + 0.0, y)


def _classify(z: complex, tol: float = 1e-6) -> str:
    if abs(z - 1j) < tol:
        return "i"
    if abs(z - RHO) < tol or abs(z - (RHO - 1)) < tol:
        return "rho"
    return "generic"


def zeros_in_domain(f: Eigenform, tol: float = 1e-10, y0: float = 0.45, delta: float = 0.031,
                    retries: int = 5) -> ZeroSet:
    """Zeros of f in the closed fundamental domain by the argument principle.

    The rectangle [-1/2-delta, 1/2+delta] x [y0, Ytop] contains a closure of the
    fundamental domain; zeros found there are refined by Newton's method,
    reduced into the domain and deduplicated.  Elliptic points get their
    orders from the winding number around a small circle.
    """
    k = f.k
    ytop = 1.5 * (k - 1) / (4 * math.pi) + 1.5
    coef, _ = _scaled_coeffs(f, y0 * 0.9)

    def g(z):
        return _g_and_dg(coef, z)[0]

    for attempt in range(retries):
        try:
            return _find_zeros(f, g, coef, y0, ytop, delta, tol)
        except ZeroOnContour:
            y0 *= 1.0137
            delta *= 1.171
    raise ZeroOnContour("failed after perturbations")


def _find_zeros(f, g, coef, y0, ytop, delta, tol) -> ZeroSet:
    x0, x1 = -0.5 - delta, 0.5 + delta
    wind, _ = _winding(g, (x0, x1, y0, ytop))
    found: list[tuple[complex, int]] = []
    stack = [((x0, x1, y0, ytop), wind)]
    while stack:
        (a, b, c, d), w = stack.pop()
        if w == 0:
            continue
        if max(b - a, d - c) < 2e-4:
            found.append((complex((a + b) / 2, (c + d) / 2), w))
            continue
        # split along the longer side at an off-centre point to avoid symmetric zeros
        if b - a >= d - c:
            m = a + (b - a) * 0.4871
            parts = [(a, m, c, d), (m, b, c, d)]
        else:
            m = c + (d - c) * 0.5129
            parts = [(a, b, c, m), (a, b, m, d)]
        ws = []
        for r in parts:
            wr, gm = _winding(g, r)
            ws.append(wr)
        if sum(ws) != w:
            raise ZeroOnContour("subdivision windings do not add up")
        for r, wr in zip(parts, ws):
            if wr:
                stack.append((r, wr))
    zeros = []
    for z, w in found:
        for _ in range(60):
            gv, dv = _g_and_dg(coef, np.array([z]))
            if dv[0] == 0:
                break
            step = w * gv[0] / dv[0]
            z = z - step
            if abs(step) < 1e-14:
                break
        zeros.append((z, w))
    reduced: list[Zero] = []
    for z, w in zeros:
        zr = reduce_to_fundamental_domain(z)
        kind = _classify(zr, 1e-5)
        if kind == "i":
            zr = 1j
        elif kind == "rho":
            zr = RHO
        if any(abs(zr - other.z) < 1e-6 for other in reduced):
            continue
        reduced.append(Zero(zr, w, kind))
    reduced.sort(key=lambda t: (t.z.imag, t.z.real))
    cusp = next(n for n in range(1, f.N) if f.lam(n)[n] != 0)
    return ZeroSet(f.k, tuple(reduced), cusp)


def j_polynomial_roots(f: Eigenform) -> tuple[np.ndarray, int, int]:
    """Roots of P with f = Delta^m E_r P(j), an independent oracle for the zeros.

    Returns (roots in j, exponent of E4 in E_r, exponent of E6 in E_r).
    P is read off the q-expansion of f / (Delta^m E_r) by peeling powers of j.
    """
    k = f.k
    m = k // 12
    r = k - 12 * m
    if r == 2:
        m -= 1
        r = 14
    b = 0 if r % 4 == 0 else 1
    a = (r - 6 * b) // 4
    N = m + 4
    with mpmath.workdps(60):
        D = [mpmath.mpf(int(v)) for v in qexp_basic("Delta", N + 2).coeffs()]
        E4 = [mpmath.mpf(int(v)) for v in qexp_basic("E4", N + 2).coeffs()]
        E6 = [mpmath.mpf(int(v)) for v in qexp_basic("E6", N + 2).coeffs()]
        if f.chi is None:
            fc = [mpmath.mpf(int(v)) for v in f.A[0].coeffs()[: N + 2]]
        else:
            al = [f.alpha ** j for j in range(len(f.A))]
            fc = [sum(int(Aj[n]) * al[j] for j, Aj in enumerate(f.A)) / f.den for n in range(N + 2)]

        def mul(u, v):
            return [sum(u[i] * v[n - i] for i in range(n + 1)) for n in range(N)]

        def inv(u):
            out = [1 / u[0]] + [mpmath.mpf(0)] * (N - 1)
            for n in range(1, N):
                out[n] = -sum(u[i] * out[n - i] for i in range(1, n + 1)) / u[0]
            return out

        den = D[1:] + [mpmath.mpf(0)]  # Delta / q
        den = den[:N]
        Er = [mpmath.mpf(1)] + [mpmath.mpf(0)] * (N - 1)
        for _ in range(a):
            Er = mul(Er, E4[:N])
        for _ in range(b):
            Er = mul(Er, E6[:N])
        # f / (Delta^m E_r) = P(j) with j = E4^3/Delta; multiply by q^{m} to get series
        Dm = [mpmath.mpf(1)] + [mpmath.mpf(0)] * (N - 1)
        for _ in range(m):
            Dm = mul(Dm, den)
        # H = f / ((Delta/q)^m E_r) = q^m P(j); j q = E4^3 / (Delta/q)
        h = mul(fc[:N], inv(mul(Dm, Er)))
        jq = mul(mul(mul(E4[:N], E4[:N]), E4[:N]), inv(den))
        coeffs = [mpmath.mpf(0)] * (m + 1)
        rem = list(h)
        for deg in range(m, -1, -1):
            # leading behaviour: (jq)^deg contributes q^{m-deg}
            pw = [mpmath.mpf(1)] + [mpmath.mpf(0)] * (N - 1)
            for _ in range(deg):
                pw = mul(pw, jq)
            idx = m - deg
            c = rem[idx] / pw[0]
            coeffs[deg] = c
            shifted = [mpmath.mpf(0)] * idx + pw[: N - idx]
            rem = [rem[i] - c * shifted[i] for i in range(N)]
        poly = [coeffs[d] for d in range(m, -1, -1)]
        while poly and abs(poly[0]) < mpmath.mpf(10) ** -40:
            poly = poly[1:]
        roots = mpmath.polyroots(poly, maxsteps=200, extraprec=200) if len(poly) > 1 else []
    return np.array([complex(r) for r in roots]), a, b


def j_invariant(z) -> np.ndarray:
    """j(z) by q-series of E4^3 / Delta."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    N = 60
    E4 = np.array([float(v) for v in qexp_basic("E4", N).coeffs()])
    D = np.array([float(v) for v in qexp_basic("Delta", N).coeffs()])
    q = np.exp(2j * np.pi * z)
    qp = q[:, None] ** np.arange(N)[None, :]
    e4 = qp @ E4
    dd = qp @ D
    return e4 ** 3 / dd


def hyperbolic_area_strip(y1: float, y2: float) -> float:
    """Hyperbolic area of {z in F : y1 <= Im z <= y2}."""
    from scipy import integrate

    lo = max(y1, math.sqrt(3) / 2)
    if y2 <= lo:
        return 0.0

    def width(y):
        return 1.0 if y >= 1 else 1 - 2 * math.sqrt(1 - y * y)

    pts = [p for p in (lo, 1.0, y2) if lo <= p <= y2]
    tot = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        tot += integrate.quad(lambda y: width(y) / y ** 2, a, b, epsabs=1e-14, epsrel=1e-12)[0]
    return tot


@dataclass(frozen=True)
class StripRegion:
    """{z in F : y1 <= Im z <= y2}, closed."""

    y1: float
    y2: float
    name: str = ""

    def contains(self, z: complex) -> bool:
        return self.y1 - 1e-12 <= z.imag <= self.y2 + 1e-12

    @property
    def area(self) -> float:
        return hyperbolic_area_strip(self.y1, self.y2)


ZERO_REGIONS = (
    StripRegion(math.sqrt(3) / 2, 1.0, "arc"),
    StripRegion(1.0, 1.6, "middle"),
    StripRegion(1.6, 4.0, "high"),
)


def zero_discrepancy(zs: ZeroSet, region) -> float:
    """|weighted zeros in R / (k/12) - area(R) / (pi/3)|."""
    if region is None:
        return 0.0
    cnt = sum((z.weight for z in zs.zeros if region.contains(z.z)), Fraction(0))
    return abs(float(cnt) / (zs.k / 12) - region.area / (math.pi / 3))


def whole_domain_discrepancy(zs: ZeroSet) -> float:
    cnt = sum((z.weight for z in zs.zeros), Fraction(0))
    return abs(float(cnt) / (zs.k / 12) - 1.0)


# ------------------------------------------------- regularized unfolding
def ramanujan_sum(c: int, l: int) -> int:
    """c_c(l) = sum over d | gcd(c, l) of d mu(c/d)."""
    from sympy import divisors, mobius

    g = math.gcd(c, l)
    return int(sum(d * int(mobius(c // d)) for d in divisors(g)))


def incomplete_fourier_coeffs(h, y: float, ls: Sequence[int], nquad: int = 160) -> np.ndarray:
    r"""Fourier coefficients a_l(y) of E(h|z) = sum_{Gamma_inf \ Gamma} h(Im gamma z).

    a_l(y) = delta_{l0} h(y) + sum_{c>=1} c_c(l) y int h(1/(c^2 y (1+u^2))) e(-l y u) du.
    ``h`` needs compact support; the u-integral is taken in u = sinh t.
    """
    lo, hi = h.support
    ls = np.asarray(ls, dtype=int)
    out = np.where(ls == 0, float(h(np.array([y]))[0]), 0.0)
    cmax = int(math.floor(math.sqrt(1 / (y * lo))))
    for c in range(1, cmax + 1):
        top = 1 / (c * c * y)  # value of the argument at u = 0
        if top < lo:
            break
        tmax = math.acosh(math.sqrt(top / lo))
        t, w = gauss_legendre(0.0, tmax, nquad)
        ch = np.cosh(t)
        u = np.sinh(t)
        vals = h(top / ch ** 2) * ch * w
        ft = 2 * np.cos(2 * np.pi * np.outer(ls, u) * y) @ vals
        rs = np.array([ramanujan_sum(c, int(abs(l))) if l else _euler_phi(c) for l in ls])
        out = out + rs * y * ft
    return out


def _euler_phi(c: int) -> int:
    from sympy import totient

    return int(totient(c))


def _shift_sums_log(f: Eigenform, y: np.ndarray, L: int, N: int) -> np.ndarray:
    """S_l(y) y^k for l = 0..L at each y (S_l = sum a(n) a(n+l) e^{-2 pi (2n+l) y})."""
    k = f.k
    lam = f.lam(N + L + 1)
    n = np.arange(1, N + L + 2, dtype=float)
    la = (k - 1) / 2 * np.log(n)
    out = np.zeros((len(y), L + 1))
    for i, yy in enumerate(y):
        b = lam[1:] * np.exp(la - 2 * np.pi * n * yy + k / 2 * math.log(yy))
        for l in range(L + 1):
            out[i, l] = float(np.dot(b[:N], b[l:N + l]))
    return out


@dataclass(frozen=True)
class UnfoldRow:
    T: float
    I: float
    main: float
    r: float


def regularized_unfolding(f: Eigenform, psi, g, T: float, order: str = "swap",
                          nquad: int = 200) -> float:
    r"""I(T) = int_{Gamma_inf \ H} g(Ty) E(psi|z) |F(z)|^2 dmu with |F|^2 = y^k |f|^2 / <f,f>.

    ``order="swap"`` evaluates the same integral as
    int_{Gamma_inf \ H} psi(y) E(g(T.)|z) |F|^2 dmu, which only needs Fourier
    modes at heights in supp(psi).  ``order="direct"`` unfolds g(Ty) and is
    used as a cross-check at small T.
    """
    gT = _Dilated(g, T)
    outer, inner = (psi, gT) if order == "swap" else (gT, psi)
    ys, ws = profile_quadrature(outer, nquad)
    ymin = float(ys.min())
    N = _terms_needed(f.k, ymin, 1e-22)
    L = int(math.ceil(40 / (2 * math.pi * ymin))) + 1
    if N + L + 2 >= f.N:
        raise TailNotBounded(f"need {N + L + 2} coefficients, have {f.N}")
    S = _shift_sums_log(f, ys, L, N)
    tot = 0.0
    ls = np.arange(L + 1)
    for i, yy in enumerate(ys):
        a = incomplete_fourier_coeffs(inner, float(yy), ls)
        a[1:] *= 2
        tot += float(outer(np.array([yy]))[0]) * ws[i] * float(a @ S[i]) / yy ** 2
    return tot / petersson_norm_sq(f)


@dataclass(frozen=True)
class _Dilated:
    """y -> g(T y)."""

    g: object
    T: float

    @property
    def support(self):
        lo, hi = self.g.support
        return lo / self.T, hi / self.T

    def __call__(self, y):
        return self.g(np.asarray(y, dtype=float) * self.T)


def unfolding_identity_check(f: Eigenform, psi, g, Ts: Sequence[float]) -> list[UnfoldRow]:
    """r(T) = |I(T) - C_g T mu_f(E(psi|.))| / sqrt(T) with C_g = (3/pi) int g y^-2 dy."""
    Cg = 3 / math.pi * inverse_square_integral(g)
    mu = MassMeasure(f).unfold(psi)
    rows = []
    for T in Ts:
        I = regularized_unfolding(f, psi, g, T)
        main = Cg * T * mu
        rows.append(UnfoldRow(float(T), I, main, abs(I - main) / math.sqrt(T)))
    return rows
