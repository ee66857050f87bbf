r"""Arithmetic in the ring of integers of a field of narrow class number one.

Supported fields are :math:`\mathbb{Q}`, a short list of real quadratic fields
whose fundamental unit has norm -1, and the imaginary quadratic fields of
class number one with small discriminant.  Every element of :math:`\mathcal{O}`
is stored by exact coordinates ``(a, b)`` in the integral basis ``(1, w)``
where ``w = sqrt(d)`` or ``(1 + sqrt(d))/2``.  Floating embeddings are derived
from these coordinates and never used for equality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np
from sympy import factorint
from sympy.functions.combinatorial.numbers import jacobi_symbol
from sympy.ntheory import sqrt_mod

from .errors import DimensionMismatch, NotCoprime, RegionTooLarge, UnsupportedField

REAL_ALLOWLIST = (2, 5, 13, 17, 29, 37, 41)
IMAG_ALLOWLIST = (-1, -2, -3, -7, -11)

Number = int | Fraction


class NumberFieldDesc:
    """A supported field together with its unit and regulator data.

    Construct through :func:`make_field`.  Instances are treated as immutable
    and compare equal when they describe the same field.
    """

    def __init__(self, kind: str, d: int):
        self.kind = kind
        self.d = d
        if kind == "rational":
            self.n, self.r1, self.r2 = 1, 1, 0
            self.D = 1
            self.half = False
            self.tr_w, self.nm_w = 0, 0
        else:
            self.n = 2
            self.r1, self.r2 = (2, 0) if kind == "real" else (0, 1)
            self.half = d % 4 == 1
            if self.half:
                self.tr_w, self.nm_w = 1, (1 - d) // 4
                self.D = d
            else:
                self.tr_w, self.nm_w = 0, -d
                self.D = 4 * d
        self.r = self.r1 + self.r2
        self.delta = tuple([1] * self.r1 + [2] * self.r2)

        if kind == "real":
            sq = math.sqrt(d)
            self._w_emb = ((1 + sq) / 2, (1 - sq) / 2) if self.half else (sq, -sq)
        elif kind == "imaginary":
            sq = math.sqrt(-d)
            self._w_emb = (complex(0.5, sq / 2),) if self.half else (complex(0.0, sq),)
        else:
            self._w_emb = ()

        # roots of unity, and omega_plus = number of their squares (the
        # rotations x -> u^2 x by which torsion units act on the cusp)
        if kind == "imaginary":
            self.w = {-1: 4, -3: 6}.get(d, 2)
            self.omega_plus = self.w // 2
        else:
            self.w = 2
            self.omega_plus = 1

        self.eps: tuple[int, int] | None = None
        self.eps_plus: tuple[int, int] | None = None
        if kind == "real":
            self.eps = self._fundamental_unit()
            e = self.element(*self.eps)
            if e.norm() != -1:
                raise UnsupportedField(f"d={d}: fundamental unit has norm +1")
            ep = e * e
            self.eps_plus = (ep.a, ep.b)
            self.R = math.log(e.embeddings()[0])
        else:
            self.R = 1.0

        self.A = self._regulator_matrix()
        self.Ainv = np.linalg.inv(self.A)
        self.A.setflags(write=False)
        self.Ainv.setflags(write=False)

    # ------------------------------------------------------------------ basics
    def __repr__(self) -> str:
        if self.kind == "rational":
            return "NumberFieldDesc(Q)"
        return f"NumberFieldDesc({self.kind}, d={self.d})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, NumberFieldDesc) and (self.kind, self.d) == (other.kind, other.d)

    def __hash__(self) -> int:
        return hash((self.kind, self.d))

    @property
    def label(self) -> str:
        return "Q" if self.kind == "rational" else f"Q(sqrt({self.d}))"

    def element(self, a: Number, b: Number = 0) -> RingElement:
        if self.kind == "rational" and b != 0:
            raise ValueError("rational field elements have b = 0")
        return RingElement(a, b, self)

    def one(self) -> RingElement:
        return RingElement(1, 0, self)

    def omega_embeddings(self) -> tuple:
        return self._w_emb

    def _fundamental_unit(self) -> tuple[int, int]:
        t, D = self.tr_w, self.D
        for b in range(1, 100000):
            found = []
            for sign in (1, -1):
                disc = b * b * D + 4 * sign
                if disc < 0:
                    continue
                s = math.isqrt(disc)
                if s * s != disc:
                    continue
                for num in (-b * t + s, -b * t - s):
                    if num % 2 == 0:
                        found.append((num // 2, b))
            cands = [(self.element(a, bb).embeddings()[0], (a, bb)) for a, bb in found]
            cands = [c for c in cands if c[0] > 1]
            if cands:
                return min(cands)[1]
        raise UnsupportedField("no unit found")

    def _regulator_matrix(self) -> np.ndarray:
        if self.kind == "real":
            ep = self.element(*self.eps_plus).embeddings()
            return np.array([[0.5, math.log(ep[0])], [0.5, math.log(ep[1])]])
        return np.array([[1.0 / self.n]])

    def beta(self, m: Sequence[int]) -> np.ndarray:
        """Exponents beta(m, p) = 2 pi i sum_q m_q e_p^q, one per place."""
        m = tuple(int(v) for v in m)
        if len(m) != self.r - 1:
            raise DimensionMismatch(f"m must have length {self.r - 1}, got {len(m)}")
        out = np.zeros(self.r, dtype=complex)
        for q, mq in enumerate(m):
            out += 2j * math.pi * mq * self.Ainv[q + 1, :]
        return out

    def zero_m(self) -> tuple[int, ...]:
        return tuple([0] * (self.r - 1))

    @cached_property
    def kappa(self) -> RingElement:
        return codifferent_generator(self)

    def unit_list(self) -> list[RingElement]:
        """Torsion units (roots of unity) as exact elements."""
        if self.kind != "imaginary":
            return [self.one(), self.element(-1)]
        if self.d == -1:
            coords = [(1, 0), (0, 1), (-1, 0), (0, -1)]
        elif self.d == -3:
            # w = (1 + sqrt(-3))/2 is a primitive sixth root of unity
            coords = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]
        else:
            coords = [(1, 0), (-1, 0)]
        return [self.element(a, b) for a, b in coords]

    def lattice_basis(self) -> np.ndarray:
        """Real 2x2 (or 1x1) matrix whose columns embed 1 and w."""
        if self.kind == "rational":
            return np.array([[1.0]])
        if self.kind == "real":
            return np.array([[1.0, self._w_emb[0]], [1.0, self._w_emb[1]]])
        w = self._w_emb[0]
        return np.array([[1.0, w.real], [0.0, w.imag]])

    def covolume(self) -> float:
        """Covolume of O in R^r1 x C^r2 with Lebesgue measure dRe dIm."""
        return abs(float(np.linalg.det(self.lattice_basis())))


@dataclass(frozen=True, eq=False)
class RingElement:
    """Element a + b*w of the field, exact coordinates."""

    a: Number
    b: Number
    field: NumberFieldDesc

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            return self.a == other and self.b == 0
        return isinstance(other, RingElement) and self.a == other.a and self.b == other.b \
            and self.field == other.field

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.field.d))

    def __repr__(self) -> str:
        return f"RingElement({self.a}, {self.b})"

    def _coerce(self, other) -> RingElement:
        if isinstance(other, RingElement):
            return other
        return RingElement(other, 0, self.field)

    def __add__(self, other) -> RingElement:
        o = self._coerce(other)
        return RingElement(self.a + o.a, self.b + o.b, self.field)

    __radd__ = __add__

    def __neg__(self) -> RingElement:
        return RingElement(-self.a, -self.b, self.field)

    def __sub__(self, other) -> RingElement:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> RingElement:
        return self._coerce(other) - self

    def __mul__(self, other) -> RingElement:
        o = self._coerce(other)
        t, nw = self.field.tr_w, self.field.nm_w
        bb = self.b * o.b
        return RingElement(self.a * o.a - bb * nw, self.a * o.b + self.b * o.a + bb * t, self.field)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> RingElement:
        if e < 0:
            return self.inverse() ** (-e)
        out = self.field.one()
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def conj(self) -> RingElement:
        return RingElement(self.a + self.b * self.field.tr_w, -self.b, self.field)

    def norm(self) -> Number:
        f = self.field
        return self.a * self.a + self.a * self.b * f.tr_w + self.b * self.b * f.nm_w

    def trace(self) -> Number:
        return 2 * self.a + self.b * self.field.tr_w if self.field.n == 2 else self.a

    def inverse(self) -> RingElement:
        nrm = Fraction(self.norm())
        c = self.conj()
        return RingElement(Fraction(c.a) / nrm, Fraction(c.b) / nrm, self.field)

    def __truediv__(self, other) -> RingElement:
        return self * self._coerce(other).inverse()

    def is_integral(self) -> bool:
        return Fraction(self.a).denominator == 1 and Fraction(self.b).denominator == 1

    def exact_div(self, other: RingElement) -> RingElement | None:
        """Return self/other if it lies in O, else None."""
        o = self._coerce(other)
        nrm = o.norm()
        p = self * o.conj()
        if p.a % nrm or p.b % nrm:
            return None
        return RingElement(p.a // nrm, p.b // nrm, self.field)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def embeddings(self) -> np.ndarray:
        f = self.field
        if f.kind == "rational":
            return np.array([float(self.a)])
        a, b = float(self.a), float(self.b)
        if f.kind == "imaginary":
            return np.array([a + b * f._w_emb[0]])
        e1, e2 = a + b * f._w_emb[0], a + b * f._w_emb[1]
        nrm = float(self.norm())
        # recompute the smaller embedding from the exact norm to avoid cancellation
        if abs(e1) >= abs(e2) and e1 != 0:
            e2 = nrm / e1
        elif e2 != 0:
            e1 = nrm / e2
        return np.array([e1, e2])

    def abs_embeddings(self) -> np.ndarray:
        return np.abs(self.embeddings())

    def is_totally_positive(self) -> bool:
        f = self.field
        if f.kind == "imaginary":
            return not self.is_zero()
        if f.kind == "rational":
            return self.a > 0
        return self.norm() > 0 and self.trace() > 0


def make_field(kind: str = "rational", d: int = 1) -> NumberFieldDesc:
    """Build a supported field.

    ``kind`` is one of ``"rational"``, ``"real"``, ``"imaginary"``; ``d`` is
    the squarefree integer with the field equal to Q(sqrt(d)).
    """
    kind = {"Q": "rational", "real-quadratic": "real", "imaginary-quadratic": "imaginary"}.get(kind, kind)
    if kind == "rational":
        return _cached_field("rational", 1)
    if kind == "real" and d in REAL_ALLOWLIST:
        return _cached_field("real", d)
    if kind == "imaginary" and d in IMAG_ALLOWLIST:
        return _cached_field("imaginary", d)
    raise UnsupportedField(f"{kind} d={d} is not in the narrow-class-number-one allowlist")


@lru_cache(maxsize=None)
def _cached_field(kind: str, d: int) -> NumberFieldDesc:
    return NumberFieldDesc(kind, d)


def field_from_label(label: str) -> NumberFieldDesc:
    """Parse labels such as ``Q``, ``Q(sqrt5)``, ``Q(sqrt(-1))``, ``Q(i)``."""
    s = label.replace(" ", "").replace("(", "").replace(")", "").replace("sqrt", "")
    if s in ("Q", "rational"):
        return make_field("rational")
    if s == "Qi":
        return make_field("imaginary", -1)
    if not s.startswith("Q"):
        raise UnsupportedField(label)
    d = int(s[1:])
    return make_field("real" if d > 0 else "imaginary", d)


# ---------------------------------------------------------------- characters
def lambda_char(field: NumberFieldDesc, m: Sequence[int], y) -> complex:
    r"""Hecke character :math:`\lambda_m(y) = \exp(\sum_p \beta(m,p)\log y_p)`."""
    beta = field.beta(m)
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != field.r:
        raise DimensionMismatch(f"y must have {field.r} coordinates")
    return np.exp(np.log(y) @ beta)


def totally_positive_associate(x: RingElement) -> RingElement:
    """A totally positive element generating the same ideal as x."""
    f = x.field
    if f.kind == "rational":
        return RingElement(abs(x.a), 0, f)
    if f.kind == "imaginary":
        return x
    e = x.embeddings()
    if e[0] < 0:
        x, e = -x, -e
    if e[1] < 0:
        x = x * f.element(*f.eps)
    return x


def ideal_char(field: NumberFieldDesc, m: Sequence[int], g: RingElement) -> complex:
    """lambda_m on the principal ideal (g), via its totally positive generator."""
    if field.r == 1:
        return 1.0 + 0j
    gp = totally_positive_associate(g)
    return complex(lambda_char(field, m, gp.embeddings()))


# ------------------------------------------------------------- enumeration
def _real_box(field: NumberFieldDesc, lo, hi) -> tuple[np.ndarray, np.ndarray]:
    """All (a, b) with lo_i <= a + b w_i <= hi_i at both real places."""
    w1, w2 = field._w_emb
    gap = w1 - w2
    bmin = math.floor((lo[0] - hi[1]) / gap) - 1
    bmax = math.ceil((hi[0] - lo[1]) / gap) + 1
    bs = np.arange(bmin, bmax + 1, dtype=np.int64)
    alo = np.floor(np.maximum(lo[0] - bs * w1, lo[1] - bs * w2)).astype(np.int64) - 1
    ahi = np.ceil(np.minimum(hi[0] - bs * w1, hi[1] - bs * w2)).astype(np.int64) + 1
    cnt = np.maximum(ahi - alo + 1, 0)
    total = int(cnt.sum())
    if total == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    b = np.repeat(bs, cnt)
    start = np.repeat(alo, cnt)
    offs = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    a = start + offs
    e1 = a + b * w1
    e2 = a + b * w2
    keep = (e1 >= lo[0]) & (e1 <= hi[0]) & (e2 >= lo[1]) & (e2 <= hi[1])
    return a[keep], b[keep]


def _disc_points(field: NumberFieldDesc, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """All (a, b) with |a + b w| <= radius for an imaginary quadratic field."""
    w = field._w_emb[0]
    bmax = math.ceil(radius / w.imag) + 1
    bs = np.arange(-bmax, bmax + 1, dtype=np.int64)
    alo = np.floor(-radius - bs * w.real).astype(np.int64) - 1
    ahi = np.ceil(radius - bs * w.real).astype(np.int64) + 1
    cnt = ahi - alo + 1
    total = int(cnt.sum())
    b = np.repeat(bs, cnt)
    a = np.repeat(alo, cnt) + np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    z = a + b * w
    keep = np.abs(z) <= radius
    return a[keep], b[keep]


def norm_array(field: NumberFieldDesc, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a * a + a * b * field.tr_w + b * b * field.nm_w


def embed_array(field: NumberFieldDesc, a, b) -> np.ndarray:
    """Embeddings of many elements: shape (len, r)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if field.kind == "rational":
        return a[:, None]
    if field.kind == "imaginary":
        return (a + b * field._w_emb[0])[:, None]
    w1, w2 = field._w_emb
    return np.stack([a + b * w1, a + b * w2], axis=1)


def totally_positive_arrays(field: NumberFieldDesc, x) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates of every totally positive eta with eta_i <= x_i, unsorted."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != field.r:
        raise DimensionMismatch(f"x must have {field.r} coordinates")
    nx = float(np.prod(x ** np.asarray(field.delta)))
    if nx > 1e8:
        raise RegionTooLarge(f"Nx = {nx:.3g} exceeds 1e8")
    if field.kind == "rational":
        a = np.arange(1, math.floor(x[0]) + 1, dtype=np.int64)
        return a, np.zeros_like(a)
    if field.kind == "imaginary":
        a, b = _disc_points(field, x[0])
        keep = (a != 0) | (b != 0)
        return a[keep], b[keep]
    a, b = _real_box(field, (0.0, 0.0), (x[0], x[1]))
    nrm = norm_array(field, a, b)
    tr = 2 * a + b * field.tr_w
    keep = (nrm > 0) & (tr > 0)
    return a[keep], b[keep]


def enumerate_totally_positive(field: NumberFieldDesc, x) -> list[RingElement]:
    """Totally positive eta with 0 < eta_i <= x_i, sorted by norm then coordinates.

    At a complex place the bound is read as ``|eta| <= x``.
    """
    a, b = totally_positive_arrays(field, x)
    nrm = norm_array(field, a, b)
    order = np.lexsort((b, a, nrm))
    return [RingElement(int(a[i]), int(b[i]), field) for i in order]


# ------------------------------------------------------------ unit reduction
def eps_plus_power(field: NumberFieldDesc, j: int) -> RingElement:
    e = field.element(*field.eps_plus)
    return e ** j if j >= 0 else e.conj() ** (-j)


def _cone_index(field: NumberFieldDesc, x: RingElement) -> int:
    e = x.embeddings()
    val = math.log(e[0]) - 0.5 * math.log(float(x.norm()))
    L = math.log(field.element(*field.eps_plus).embeddings()[0])
    return math.floor(val / L + 1e-10)


def reduce_mod_units(field: NumberFieldDesc, eta: RingElement) -> RingElement:
    """Representative of eta modulo totally positive units in the half-open cone.

    For real quadratic fields this lands in
    ``0 <= log(eta_1 / N(eta)^(1/2)) < log eps_plus_1``.  Identity otherwise.
    """
    if field.kind != "real":
        return eta
    j = _cone_index(field, eta)
    return eta * eps_plus_power(field, -j) if j else eta


def normalize_generator(x: RingElement) -> RingElement:
    """Canonical generator of the principal ideal (x)."""
    f = x.field
    if f.kind == "rational":
        return RingElement(abs(x.a), 0, f)
    if f.kind == "real":
        return reduce_mod_units(f, totally_positive_associate(x))
    best = None
    for u in f.unit_list():
        y = u * x
        ang = math.atan2(y.embeddings()[0].imag, y.embeddings()[0].real) % (2 * math.pi)
        if ang > 2 * math.pi - 1e-12:
            ang = 0.0
        if best is None or ang < best[0] - 1e-12:
            best = (ang, y)
    return best[1]


# ------------------------------------------------------------ codifferent
def codifferent_generator(field: NumberFieldDesc) -> RingElement:
    """Totally positive generator of the inverse different in normal form."""
    if field.kind == "rational":
        return field.element(1)
    # different is generated by sqrt(D); as an element: 2w - tr(w)
    delta = RingElement(-field.tr_w, 2, field)
    dd = delta * delta
    assert dd.b == 0 and dd.a == field.D
    k0 = RingElement(Fraction(delta.a, field.D), Fraction(delta.b, field.D), field)
    if field.kind == "imaginary":
        return normalize_generator(k0)
    e = k0.embeddings()
    if e[0] < 0:
        k0 = -k0
        e = -e
    if e[1] < 0:
        k0 = k0 * field.element(*field.eps)
    return reduce_mod_units(field, k0)


# ------------------------------------------------------------ prime ideals
def kronecker_symbol(D: int, n: int) -> int:
    """Kronecker symbol (D/n) for n >= 1."""
    if n == 1:
        return 1
    e = (n & -n).bit_length() - 1
    odd = n >> e
    val = kronecker(D, 2) ** e if e else 1
    if odd > 1:
        val *= int(jacobi_symbol(D % odd, odd))
    return val


def kronecker_table(D: int) -> np.ndarray:
    """chi_D(a) for a = 0..|D|-1; chi_D is periodic mod |D| for fundamental D."""
    q = abs(D)
    return np.array([kronecker_symbol(D, a) if a and math.gcd(a, q) == 1 else 0 for a in range(q)],
                    dtype=np.int64)


def kronecker(D: int, p: int) -> int:
    """Kronecker symbol (D/p) for a prime p."""
    if p == 2:
        if D % 2 == 0:
            return 0
        return 1 if D % 8 in (1, 7) else -1
    r = D % p
    if r == 0:
        return 0
    return 1 if pow(r, (p - 1) // 2, p) == 1 else -1


def rational_primes(z: float) -> np.ndarray:
    z = int(math.floor(z))
    if z < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(z + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(z) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    return np.nonzero(sieve)[0].astype(np.int64)


@dataclass(frozen=True, eq=False)
class PrimeIdeal:
    """Prime ideal of O; degree-1 primes carry the residue r with w = r mod P."""

    p: int
    norm: int
    degree: int
    kind: str  # split, inert or ramified
    field: NumberFieldDesc
    residue: int | None = None

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PrimeIdeal) and (self.p, self.degree, self.residue) == \
            (other.p, other.degree, other.residue) and self.field == other.field

    def __hash__(self) -> int:
        return hash((self.p, self.degree, self.residue))

    def __repr__(self) -> str:
        return f"PrimeIdeal(p={self.p}, N={self.norm}, {self.kind}, r={self.residue})"

    @cached_property
    def generator(self) -> RingElement:
        return _prime_generator(self)

    def reduce(self, x: RingElement) -> int | tuple[int, int]:
        """Image of x in the residue field O/P (an int mod p or a pair for inert)."""
        if self.degree == 1:
            return int((x.a + x.b * self.residue) % self.p)
        return (int(x.a % self.p), int(x.b % self.p))

    def contains(self, x: RingElement) -> bool:
        if self.degree == 1:
            return (x.a + x.b * self.residue) % self.p == 0
        return x.a % self.p == 0 and x.b % self.p == 0


def _char_roots(field: NumberFieldDesc, p: int) -> list[int]:
    """Roots of x^2 - t x + N(w) modulo p."""
    t, nw = field.tr_w, field.nm_w
    if p == 2:
        return [r for r in range(2) if (r * r - t * r + nw) % 2 == 0]
    disc = (t * t - 4 * nw) % p
    inv2 = pow(2, -1, p)
    if disc == 0:
        return [t * inv2 % p]
    s = sqrt_mod(disc, p)
    return sorted({(t + s) * inv2 % p, (t - s) * inv2 % p})


@lru_cache(maxsize=None)
def prime_ideals_above(field: NumberFieldDesc, p: int) -> tuple[PrimeIdeal, ...]:
    if field.kind == "rational":
        return (PrimeIdeal(p, p, 1, "split", field, 0),)
    k = kronecker(field.D, p)
    if k == -1:
        return (PrimeIdeal(p, p * p, 2, "inert", field, None),)
    roots = _char_roots(field, p)
    if k == 0:
        return (PrimeIdeal(p, p, 1, "ramified", field, roots[0]),)
    return tuple(PrimeIdeal(p, p, 1, "split", field, r) for r in roots)


def primes_up_to(field: NumberFieldDesc, z: float) -> list[PrimeIdeal]:
    """All prime ideals of norm <= z, sorted by norm then residue."""
    out = []
    for p in rational_primes(z):
        p = int(p)
        for P in prime_ideals_above(field, p):
            if P.norm <= z:
                out.append(P)
    out.sort(key=lambda P: (P.norm, P.p, -1 if P.residue is None else P.residue))
    return out


def prime_norms_up_to(field: NumberFieldDesc, z: float) -> np.ndarray:
    """Norms of all prime ideals with norm <= z (fast path, no generators)."""
    ps = rational_primes(z)
    if field.kind == "rational":
        return ps
    out = []
    for p in ps:
        k = kronecker(field.D, int(p))
        if k == 1:
            out += [p, p]
        elif k == 0:
            out.append(p)
        elif p * p <= z:
            out.append(p * p)
    return np.sort(np.array(out, dtype=np.int64))


def _gauss_reduce(field: NumberFieldDesc, v1, v2):
    """Lagrange-Gauss reduction of a rank-2 sublattice of O in the Minkowski metric."""
    B = field.lattice_basis()

    def emb(v):
        return B @ np.array(v, dtype=float)

    def dot(u, v):
        return float(emb(u) @ emb(v))

    u, v = list(v1), list(v2)
    if dot(u, u) > dot(v, v):
        u, v = v, u
    while True:
        mu = round(dot(u, v) / dot(u, u))
        v = [v[0] - mu * u[0], v[1] - mu * u[1]]
        if dot(v, v) >= dot(u, u):
            return u, v
        u, v = v, u


def _prime_generator(P: PrimeIdeal) -> RingElement:
    f = P.field
    if f.kind == "rational":
        return f.element(P.p)
    if P.degree == 2:
        return f.element(P.p)
    u, v = _gauss_reduce(f, (P.p, 0), (-P.residue, 1))
    for span in (3, 8, 20):
        cands = []
        for i in range(-span, span + 1):
            for j in range(-span, span + 1):
                x = f.element(i * u[0] + j * v[0], i * u[1] + j * v[1])
                if abs(x.norm()) == P.p and P.contains(x):
                    cands.append(x)
        if cands:
            return normalize_generator(cands[0])
    raise ArithmeticError(f"no generator found for {P}")


# --------------------------------------------------------- factorization
def valuation(x: RingElement, P: PrimeIdeal) -> tuple[int, RingElement]:
    """(v_P(x), x / pi^v) with pi the generator of P."""
    if x.is_zero():
        raise ValueError("valuation of zero")
    pi = P.generator
    v = 0
    while True:
        q = x.exact_div(pi)
        if q is None:
            return v, x
        x, v = q, v + 1


def factor_element(x: RingElement) -> list[tuple[PrimeIdeal, int]]:
    """Prime ideal factorization of (x) for nonzero integral x."""
    f = x.field
    nrm = abs(int(x.norm()))
    out = []
    for p in sorted(factorint(nrm)):
        for P in prime_ideals_above(f, p):
            v, x = valuation(x, P)
            if v:
                out.append((P, v))
    return out


def divisor_generators(x: RingElement) -> list[RingElement]:
    """Normalized generators of every integral ideal dividing (x)."""
    divs = [x.field.one()]
    for P, e in factor_element(x):
        pi = P.generator
        new = []
        for dv in divs:
            pw = dv
            for _ in range(e):
                pw = pw * pi
                new.append(pw)
        divs += new
    return [normalize_generator(d) for d in divs]


def euclid_divmod(x: RingElement, y: RingElement) -> tuple[RingElement, RingElement]:
    """Division with remainder |N(r)| < |N(y)| (the fields used are norm-Euclidean)."""
    q0 = x / y
    qa, qb = round(q0.a), round(q0.b)
    best = None
    dbs = (0,) if x.field.kind == "rational" else (-1, 0, 1)
    for da in (-1, 0, 1):
        for db in dbs:
            q = x.field.element(qa + da, qb + db)
            r = x - q * y
            n = abs(r.norm())
            if best is None or n < best[0]:
                best = (n, q, r)
    if best[0] >= abs(y.norm()):
        raise ArithmeticError("Euclidean step failed")
    return best[1], best[2]


def bezout(x: RingElement, y: RingElement) -> tuple[RingElement, RingElement]:
    """s, t in O with s x + t y = 1; raises NotCoprime if (x, y) != O."""
    f = x.field
    r0, r1 = x, y
    s0, s1 = f.one(), f.element(0)
    t0, t1 = f.element(0), f.one()
    while not r1.is_zero():
        q, r = euclid_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if abs(r0.norm()) != 1:
        raise NotCoprime(f"gcd has norm {r0.norm()}")
    u = r0.inverse()
    u = f.element(int(u.a), int(u.b))
    return s0 * u, t0 * u


# ------------------------------------------------------ ideal coefficients
def ideal_coefficients(field: NumberFieldDesc, m: Sequence[int], N: int) -> np.ndarray:
    r"""Array c with c[n] = sum over integral ideals of norm n of lambda_m.

    Built multiplicatively from local factors at each rational prime.
    """
    m = tuple(m)
    trivial = all(v == 0 for v in m)
    if trivial:
        return _ideal_counts(field, N)
    dtype = complex
    c = np.ones(N + 1, dtype=dtype)
    c[0] = 0
    for p in rational_primes(N):
        p = int(p)
        Ps = prime_ideals_above(field, p)
        vals = [1.0 if trivial or P.degree == 2 else ideal_char(field, m, P.generator) for P in Ps]
        fdeg = Ps[0].degree
        # local coefficients l[e] for the rational prime power p^e
        emax = int(math.log(N) / math.log(p)) + 1
        loc = np.zeros(emax + 1, dtype=dtype)
        if len(Ps) == 2:
            v1, v2 = vals
            for e in range(emax + 1):
                loc[e] = sum(v1 ** i * v2 ** (e - i) for i in range(e + 1))
        elif fdeg == 2:
            loc[0::2] = 1
        else:
            for e in range(emax + 1):
                loc[e] = vals[0] ** e
        mult = np.full(N // p, loc[1], dtype=dtype)
        pe = p
        e = 2
        while pe * p <= N:
            mult[pe - 1::pe] = loc[e]
            pe *= p
            e += 1
        c[p::p] *= mult
    return c


def _ideal_counts(field: NumberFieldDesc, N: int) -> np.ndarray:
    """Number of ideals of each norm: 1 for Q, else sum_{d|n} chi_D(d)."""
    c = np.zeros(N + 1)
    if field.kind == "rational":
        c[1:] = 1.0
        return c
    tab = kronecker_table(field.D)
    chi = tab[np.arange(N + 1) % len(tab)]
    for d in range(1, N + 1):
        if chi[d]:
            c[d::d] += chi[d]
    return c


def mertens_sum(field: NumberFieldDesc, z: float) -> float:
    """sum over prime ideals with norm <= z of 1/N(P)."""
    return float(np.sum(1.0 / prime_norms_up_to(field, z)))


def coords_in_box(field: NumberFieldDesc, lo, hi) -> tuple[np.ndarray, np.ndarray]:
    """Elements whose embeddings lie in a box (real places) or disc (complex place).

    Rational field: ``lo <= a <= hi``.  Imaginary field: ``|x - lo| <= hi``
    is not supported; use :func:`_disc_points` through this name with lo unused.
    """
    if field.kind == "rational":
        a = np.arange(math.ceil(lo[0]), math.floor(hi[0]) + 1, dtype=np.int64)
        return a, np.zeros_like(a)
    if field.kind == "real":
        return _real_box(field, lo, hi)
    return _disc_points(field, hi[0])


def elements(field: NumberFieldDesc, coords: Iterable[tuple[int, int]]) -> list[RingElement]:
    return [field.element(int(a), int(b)) for a, b in coords]
