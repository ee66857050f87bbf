r"""Shifted sums of multiplicative functions and the lattice large sieve.

The shifted sum C_xi(x) = sum_{eta <= x} |lambda_1(eta) lambda_2(eta + xi)| is
split by the size of the z-smooth parts of (eta) and (eta + xi).  The piece
with small smooth parts is controlled by counting lattice points that avoid
prescribed residue classes, which is compared here against the lattice
large sieve bound (Nd + Q^(2n)) / H on exhaustively counted instances.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, HZero, NotCoprime, RegionTooLarge
from .numberfield import (NumberFieldDesc, PrimeIdeal, RingElement, _real_box, divisor_generators,
                          embed_array, kronecker, prime_ideals_above, primes_up_to, rational_primes,
                          totally_positive_arrays)

MAX_POINTS = 10 ** 7


# ------------------------------------------------------------- regions
@dataclass(frozen=True)
class RotatedBox:
    """Z^n points m with |(R^T (m - center))_i| <= d_i / 2.

    ``rot`` is None (axis aligned) or, for n = 2, a Pythagorean triple
    (a, b, c) giving the exact rational rotation [[a, -b], [b, a]] / c.
    """

    d: tuple
    center: tuple = ()
    rot: tuple | None = None

    def __post_init__(self):
        d = tuple(Fraction(v) for v in self.d)
        c = tuple(Fraction(v) for v in self.center) if self.center else tuple(Fraction(0) for _ in d)
        if len(c) != len(d) or any(v <= 0 for v in d):
            raise DomainError("box needs positive dimensions and a matching center")
        if self.rot is not None:
            a, b, cc = self.rot
            if len(d) != 2 or a * a + b * b != cc * cc or cc <= 0:
                raise DomainError("rotation must be a Pythagorean triple in dimension 2")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "center", c)

    @property
    def n(self) -> int:
        return len(self.d)

    @property
    def dims(self) -> np.ndarray:
        return np.array([float(v) for v in self.d])

    @property
    def volume(self) -> float:
        return float(np.prod(self.dims))

    def _matrix(self) -> tuple[np.ndarray, int]:
        """Integer matrix M and scale c with R^T = M / c."""
        if self.rot is None:
            return np.eye(self.n, dtype=np.int64), 1
        a, b, c = self.rot
        return np.array([[a, b], [-b, a]], dtype=np.int64), c

    def points(self) -> np.ndarray:
        M, c = self._matrix()
        half = np.abs(M).astype(float) @ (self.dims / 2) / c
        cen = np.array([float(v) for v in self.center])
        lo = np.floor(cen - half).astype(np.int64) - 1
        hi = np.ceil(cen + half).astype(np.int64) + 1
        total = int(np.prod(hi - lo + 1))
        if total > 4 * MAX_POINTS:
            raise RegionTooLarge(f"bounding box holds {total} points")
        grids = np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(lo, hi)], indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        # exact test: 2 L |M (m - center)|_i <= L c d_i with L clearing denominators
        L = math.lcm(*[v.denominator for v in self.center + self.d])
        cL = np.array([int(v * L) for v in self.center], dtype=np.int64)
        dL = np.array([int(v * L) for v in self.d], dtype=np.int64)
        u = (pts * L - cL[None, :]) @ M.T
        keep = np.all(2 * np.abs(u) <= c * dL[None, :], axis=1)
        return pts[keep]


@dataclass(frozen=True)
class EmbeddingBox:
    """Elements a + b w of O with lo_i <= a + b w_i <= hi_i at the real places.

    In the coordinates (a, b) this is a parallelepiped; ``d`` are its side
    lengths in embedding space and the lattice count is about Nd / sqrt(D).
    """

    field: NumberFieldDesc
    lo: tuple
    hi: tuple

    @property
    def n(self) -> int:
        return self.field.n

    @property
    def dims(self) -> np.ndarray:
        return np.asarray(self.hi, dtype=float) - np.asarray(self.lo, dtype=float)

    @property
    def volume(self) -> float:
        return float(np.prod(self.dims)) / self.field.covolume()

    def points(self) -> np.ndarray:
        if self.field.kind == "rational":
            a = np.arange(math.ceil(self.lo[0]), math.floor(self.hi[0]) + 1, dtype=np.int64)
            return a[:, None]
        if self.field.kind != "real":
            raise DomainError("embedding boxes need a totally real field")
        a, b = _real_box(self.field, self.lo, self.hi)
        return np.stack([a, b], axis=1)


# ------------------------------------------------------------- problems
@dataclass(frozen=True, eq=False)
class SieveProblem:
    """Lattice region, sieve level Q and sieved classes Omega_p as boolean masks over (Z/p)^n."""

    region: RotatedBox | EmbeddingBox
    omega: Mapping[int, np.ndarray]
    Q: float
    nu: float = 0.5
    check_level: bool = True
    # prime ideal classes behind each Omega_p, when built from a shifted sum
    ideal_classes: Mapping = dc_field(default_factory=dict)

    def __post_init__(self):
        n = self.region.n
        for p, mask in self.omega.items():
            if mask.shape != (p,) * n or mask.dtype != bool:
                raise DomainError(f"Omega_{p} must be a boolean array of shape {(p,) * n}")
        if self.Q < 1:
            raise HZero("Q < 1 leaves no admissible q, not even q = 1")
        if self.check_level:
            dn = float(np.max(self.region.dims))
            if self.Q > dn ** (self.nu / 2) * (1 + 1e-12):
                raise DomainError(f"Q = {self.Q} exceeds |d|^(nu/2) = {dn ** (self.nu / 2):.4g}")
            if np.any(self.region.dims <= dn ** self.nu):
                raise DomainError("every d_i must exceed |d|^nu")

    @property
    def n(self) -> int:
        return self.region.n

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(sorted(self.omega))

    def omega_size(self, p: int) -> int:
        return int(self.omega[p].sum())


def sift_count_bruteforce(problem: SieveProblem, threads: int = 1) -> int:
    """Exact number of region points m with m mod p outside Omega_p for every p."""
    pts = problem.region.points()
    if len(pts) > MAX_POINTS:
        raise RegionTooLarge(f"{len(pts)} lattice points exceed {MAX_POINTS}")
    if any(problem.omega_size(p) == p ** problem.n for p in problem.omega):
        return 0

    def count(chunk: np.ndarray) -> int:
        alive = np.ones(len(chunk), dtype=bool)
        for p in problem.primes:
            mask = problem.omega[p]
            if not mask.any():
                continue
            r = np.mod(chunk, p)
            alive &= ~mask[tuple(r.T)]
        return int(alive.sum())

    shards = np.array_split(pts, max(1, int(threads)))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return sum(ex.map(count, shards))
    return sum(count(s) for s in shards)


def h_values(problem: SieveProblem) -> dict[int, float]:
    """h(p) = omega(p) / (p^n - omega(p))."""
    n = problem.n
    out = {}
    for p in problem.primes:
        w = problem.omega_size(p)
        if w >= p ** n:
            raise DomainError(f"omega({p}) = p^n sieves everything")
        out[p] = w / (p ** n - w)
    return out


def sieve_H(problem: SieveProblem) -> float:
    """H = sum over squarefree q <= Q with prime factors in P of h(q), h(1) = 1."""
    h = h_values(problem)
    ps = [p for p in problem.primes if p <= problem.Q]
    Q = problem.Q

    def rec(i: int, q: int, val: float) -> float:
        tot = val
        for j in range(i, len(ps)):
            q2 = q * ps[j]
            if q2 > Q:
                break
            tot += rec(j + 1, q2, val * h[ps[j]])
        return tot

    return rec(0, 1, 1.0)


def large_sieve_bound(problem: SieveProblem) -> float:
    """(Nd + Q^(2n)) / H."""
    return (problem.region.volume + problem.Q ** (2 * problem.n)) / sieve_H(problem)


def sieve_ratio(problem: SieveProblem, threads: int = 1) -> float:
    """brute count * H / (Nd + Q^(2n)), the empirical sieve constant of one instance."""
    return sift_count_bruteforce(problem, threads) / large_sieve_bound(problem)


@dataclass(frozen=True)
class Calibration:
    constant: float
    ratios: tuple

    def holds(self, problems: Sequence[SieveProblem], slack: float = 1.0, threads: int = 1) -> bool:
        return all(sift_count_bruteforce(p, threads) <= slack * self.constant * large_sieve_bound(p)
                   for p in problems)


def verify_sieve_inequality(problems: Sequence[SieveProblem], threads: int = 1) -> Calibration:
    """max over the family of brute * H / (Nd + Q^(2n))."""
    ratios = tuple(sieve_ratio(p, threads) for p in problems)
    return Calibration(max(ratios), ratios)


def _pythagorean(rng: np.random.Generator) -> tuple[int, int, int]:
    u = int(rng.integers(2, 12))
    v = int(rng.integers(1, u))
    a, b, c = u * u - v * v, 2 * u * v, u * u + v * v
    if rng.random() < 0.5:
        a, b = b, a
    if rng.random() < 0.5:
        a = -a
    return a, b, c


def random_problem(n: int, rng: np.random.Generator, nu: float = 0.5, dmax: int | None = None,
                   zmax: int = 40, max_omega: int | None = None) -> SieveProblem:
    """A random instance: box (rotated when n = 2), primes up to zmax, random Omega_p.

    n = 1 draws d <= 10^4 and n = 2 draws d_i <= 400, respecting d_i > |d|^nu
    and Q <= |d|^(nu/2).
    """
    if n == 1:
        dmax = dmax or 10 ** 4
        d = (int(rng.integers(100, dmax + 1)),)
        center = (int(rng.integers(-dmax, dmax + 1)),)
        rot = None
    elif n == 2:
        dmax = dmax or 400
        while True:
            d = tuple(int(v) for v in rng.integers(40, dmax + 1, size=2))
            if min(d) > max(d) ** nu:
                break
        center = tuple(int(v) for v in rng.integers(-dmax, dmax + 1, size=2))
        rot = _pythagorean(rng)
    else:
        raise DomainError("random problems are drawn for n = 1 and n = 2")
    qmax = min(20.0, max(d) ** (nu / 2))
    Q = float(rng.uniform(1.0, qmax))
    omega = {}
    for p in rational_primes(zmax).tolist():
        cap = max_omega if max_omega is not None else (2 if n == 1 else 2 * p)
        w = int(rng.integers(0, min(cap, p ** n - 1) + 1))
        mask = np.zeros(p ** n, dtype=bool)
        mask[rng.choice(p ** n, size=w, replace=False)] = True
        omega[p] = mask.reshape((p,) * n)
    return SieveProblem(RotatedBox(d, center, rot), omega, Q, nu)


def random_family(n: int, count: int, seed: int, **kw) -> list[SieveProblem]:
    rng = np.random.default_rng([seed, n])
    return [random_problem(n, rng, **kw) for _ in range(count)]


# ------------------------------------------------------ residue classes
def _residue_ring_mul(field: NumberFieldDesc, x: tuple, y: tuple, p: int) -> tuple:
    e = field.element(*x) * field.element(*y)
    return (int(e.a) % p, int(e.b) % p)


def _inverse_mod(P: PrimeIdeal, x: RingElement):
    """x^-1 modulo P, as an int (degree 1) or an (a, b) pair (inert)."""
    p = P.p
    if P.degree == 1:
        r = P.reduce(x)
        if r == 0:
            raise NotCoprime(f"{x} is divisible by {P}")
        return pow(r, -1, p)
    nm = int(x.norm()) % p
    if nm == 0:
        raise NotCoprime(f"{x} is divisible by {P}")
    c = x.conj()
    inv = pow(nm, -1, p)
    return (int(c.a) * inv % p, int(c.b) * inv % p)


def _mod(P: PrimeIdeal, x: RingElement):
    return P.reduce(x)


def _mul(P: PrimeIdeal, x, y):
    if P.degree == 1:
        return x * y % P.p
    return _residue_ring_mul(P.field, x, y, P.p)


def _neg_mod(P: PrimeIdeal, x):
    if P.degree == 1:
        return -x % P.p
    return (-x[0] % P.p, -x[1] % P.p)


def _gcd_is_one(x: RingElement, y: RingElement) -> bool:
    px = {P for P, _ in _factor(x)}
    return not any(P.contains(y) for P in px)


def _factor(x: RingElement):
    if x.field.kind == "rational":
        from sympy import factorint
        return [(prime_ideals_above(x.field, p)[0], e) for p, e in sorted(factorint(abs(int(x.a))).items())]
    from .numberfield import factor_element
    return factor_element(x)


def crt_residue(a: RingElement, a_xi: RingElement, w: RingElement) -> RingElement:
    """r with r = 0 mod a and r = -w mod a_xi."""
    from .numberfield import bezout
    if a_xi.norm() in (1, -1):
        return a.field.element(0)
    u, v = bezout(a, a_xi)  # u a + v a_xi = 1
    return (-w) * u * a


def ideal_classes(P: PrimeIdeal, a: RingElement, a_xi: RingElement, r: RingElement,
                  w: RingElement) -> list:
    """Sieved classes at P: {r1} if P | a, {r2} if P | a_xi, {r1, r2} otherwise.

    r1 = -conj(a_xi) r / a and r2 = -conj(a) (r + w) / a_xi, overline meaning
    the inverse modulo P.
    """
    pa, pax = P.contains(a), P.contains(a_xi)
    out = []
    if not pax:
        # eta_v / a = a_xi m + r / a is divisible by P iff m = r1
        r_over_a = r.exact_div(a)
        r1 = _neg_mod(P, _mul(P, _inverse_mod(P, a_xi), _mod(P, r_over_a)))
        out.append(r1)
    if not pa:
        q = (r + w).exact_div(a_xi)
        if q is None:
            raise NotCoprime("r + w is not divisible by a_xi")
        r2 = _neg_mod(P, _mul(P, _inverse_mod(P, a), _mod(P, q)))
        if r2 not in out:
            out.append(r2)
    return out


def _mask_from_classes(field: NumberFieldDesc, p: int, classes: dict) -> np.ndarray:
    """CRT assembly: (a, b) mod p is sieved if its image mod some P | p is a sieved class."""
    n = field.n
    mask = np.zeros((p,) * n, dtype=bool)
    if n == 1:
        for P, cls in classes.items():
            for c in cls:
                mask[c % p] = True
        return mask
    A, B = np.meshgrid(np.arange(p), np.arange(p), indexing="ij")
    for P, cls in classes.items():
        for c in cls:
            if P.degree == 1:
                mask |= (A + B * P.residue) % p == c
            else:
                mask |= (A == c[0]) & (B == c[1])
    return mask


def build_shift_problem(field: NumberFieldDesc, x, xi: RingElement, v: RingElement, w: RingElement,
                        a: RingElement, a_xi: RingElement, z: float, Q: float | None = None,
                        nu: float = 0.5) -> SieveProblem:
    """The sieve problem bounding #{eta_v : eta_v = r mod a a_xi, rough parts z-rough}.

    The variable is m with eta_v = a a_xi m + r, over the region
    0 < m v a a_xi <= x; the prime set is {P : 2 < NP <= z}.
    """
    if v * w != xi:
        raise NotCoprime("v w must equal xi")
    if not _gcd_is_one(a, a_xi) or not _gcd_is_one(a * a_xi, w):
        raise NotCoprime("need (a, a_xi) = (a a_xi, w) = 1")
    r = crt_residue(a, a_xi, w)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    scale = np.abs(np.asarray((v * a * a_xi).embeddings(), dtype=float))
    region = EmbeddingBox(field, tuple([0.5 / s for s in scale]), tuple((x / scale).tolist()))
    omega, classes = {}, {}
    for P in primes_up_to(field, z):
        if P.norm <= 2:
            continue
        classes.setdefault(P.p, {})[P] = ideal_classes(P, a, a_xi, r, w)
    for p, cl in classes.items():
        omega[p] = _mask_from_classes(field, p, cl)
    if Q is None:
        Q = max(1.0, float(np.max(region.dims)) ** (nu / 2))
    return SieveProblem(region, omega, Q, nu, check_level=False, ideal_classes=classes)


# -------------------------------------------------- multiplicative models
def _hecke_powers(lp: float, amax: int) -> list[float]:
    """lambda(P^a) for a = 0..amax from lambda(P^(a+1)) = lambda(P) lambda(P^a) - lambda(P^(a-1))."""
    out = [1.0, lp]
    for _ in range(2, amax + 1):
        out.append(lp * out[-1] - out[-2])
    return out[:amax + 1]


def _sato_tate(rng: np.random.Generator) -> float:
    """2 cos(theta) with theta of density (2/pi) sin^2 theta."""
    while True:
        th = rng.uniform(0.0, math.pi)
        if rng.uniform() < math.sin(th) ** 2:
            return 2 * math.cos(th)


@dataclass(eq=False)
class MultiplicativeModel:
    """A Hecke-multiplicative function on ideals given by its values at primes."""

    field: NumberFieldDesc
    prime_value: object  # callable PrimeIdeal -> float
    m: int = 2
    label: str = ""
    _cache: dict = dc_field(default_factory=dict, repr=False)

    def at_prime(self, P: PrimeIdeal) -> float:
        key = (P.p, P.residue)
        if key not in self._cache:
            self._cache[key] = float(self.prime_value(P))
        return self._cache[key]

    def at_prime_power(self, P: PrimeIdeal, a: int) -> float:
        return _hecke_powers(self.at_prime(P), a)[a]

    def of_factorization(self, fac) -> float:
        val = 1.0
        for P, e in fac:
            val *= self.at_prime_power(P, e)
        return val

    def __call__(self, eta: RingElement) -> float:
        return self.of_factorization(_factor(eta))

    def table(self, N: int) -> np.ndarray:
        """lambda(1..N) as an array indexed by n (rational field only)."""
        if self.field.kind != "rational":
            raise DomainError("tables are indexed by integers")
        lam = np.ones(N + 1)
        lam[0] = 0.0
        for p in rational_primes(N).tolist():
            P = prime_ideals_above(self.field, p)[0]
            amax = int(math.log(N) / math.log(p) + 1e-9)
            pw = _hecke_powers(self.at_prime(P), amax)
            for a in range(1, amax + 1):
                q = p ** a
                idx = np.arange(q, N + 1, q)
                idx = idx[(idx // q) % p != 0]
                lam[idx] *= pw[a]
        return lam


def synthetic_hecke_model(field: NumberFieldDesc, seed: int) -> MultiplicativeModel:
    """lambda(P) i.i.d. Sato-Tate, drawn from a generator keyed by (seed, p, residue)."""

    def value(P: PrimeIdeal) -> float:
        key = [int(seed), int(P.p), 0 if P.residue is None else int(P.residue) + 1]
        return _sato_tate(np.random.default_rng(key))

    return MultiplicativeModel(field, value, m=2, label=f"sato-tate-{seed}")


def delta_model(P: int) -> MultiplicativeModel:
    """tau(p) / p^(11/2) at primes p <= P."""
    from .modforms import delta_prime_lambdas
    from .numberfield import make_field

    ps, lam = delta_prime_lambdas(P)
    vals = dict(zip(ps.tolist(), lam.tolist()))

    def value(Pi: PrimeIdeal) -> float:
        if Pi.p not in vals:
            raise DomainError(f"prime {Pi.p} beyond the stored range {P}")
        return vals[Pi.p]

    return MultiplicativeModel(make_field("rational"), value, m=2, label="Delta")


def constant_model(field: NumberFieldDesc, c: float = 1.0) -> MultiplicativeModel:
    """lambda(P) = c; with c = 1 the recursion gives the periodic pattern 1, 1, 0, -1, -1, 0."""
    return MultiplicativeModel(field, lambda P: c, m=1, label=f"const-{c}")


class UnitModel(MultiplicativeModel):
    """lambda = 1 on every ideal (completely multiplicative, tau_1-bounded)."""

    def __init__(self, field: NumberFieldDesc):
        super().__init__(field, lambda P: 1.0, m=1, label="one")

    def at_prime_power(self, P: PrimeIdeal, a: int) -> float:
        return 1.0

    def table(self, N: int) -> np.ndarray:
        lam = np.ones(N + 1)
        lam[0] = 0.0
        return lam


# -------------------------------------------------- smooth ideal counts
def _spf(N: int) -> np.ndarray:
    """Smallest prime factor of 0..N (0 and 1 map to themselves)."""
    spf = np.zeros(N + 1, dtype=np.int64)
    for p in range(2, math.isqrt(N) + 1):
        if spf[p] == 0:
            blk = spf[p * p::p]
            blk[blk == 0] = p
    rest = spf == 0
    spf[rest] = np.arange(N + 1)[rest]
    return spf


def smooth_ideal_count(field: NumberFieldDesc, z: float, t: int) -> int:
    """#{ideals A : N A <= t and N P <= z for every P | A}."""
    t = int(t)
    if t > 10 ** 7:
        raise RegionTooLarge("t must be at most 10^7")
    if t < 1:
        return 0
    c = np.zeros(t + 1, dtype=np.int64)
    c[1] = 1
    for q in _prime_ideal_norms(field, min(z, t)):
        new = c.copy()
        qa = q
        while qa <= t:
            m = t // qa
            new[qa * np.arange(1, m + 1)] += c[1:m + 1]
            qa *= q
        c = new
    return int(c.sum())


def _prime_ideal_norms(field: NumberFieldDesc, z: float) -> list[int]:
    out = []
    for p in rational_primes(z).tolist():
        if field.kind == "rational":
            out.append(p)
            continue
        k = kronecker(field.D, p)
        if k == 1:
            out += [p, p]
        elif k == 0:
            out.append(p)
        elif p * p <= z:
            out.append(p * p)
    return out


def rankin_trend(field: NumberFieldDesc, ts: Sequence[int], eps: float = 1.0) -> list[float]:
    """count(t) / (t / (log t)^3) at z = t^(1 / (eps log log t))."""
    out = []
    for t in ts:
        z = t ** (1 / (eps * math.log(math.log(t))))
        out.append(smooth_ideal_count(field, z, t) / (t / math.log(t) ** 3))
    return out


# ------------------------------------------------------ shifted sums
def exact_sum(values: np.ndarray) -> Fraction:
    """The exact rational value of a sum of doubles."""
    values = np.asarray(values, dtype=float)
    values = values[values != 0]
    if len(values) == 0:
        return Fraction(0)
    mant, ex = np.frexp(values)
    ints = np.ldexp(mant, 53).astype(np.int64)
    ex = ex - 53
    tot = Fraction(0)
    for e in np.unique(ex).tolist():
        s = sum(ints[ex == e].tolist())
        tot += Fraction(s) * (Fraction(2) ** e)
    return tot


@dataclass(frozen=True)
class SieveParams:
    """z = |x|^(1/s) with s = max(1, eps log log |x|) and y = |x|^eps."""

    x: tuple
    eps: float
    s: float
    z: float
    y: float

    @classmethod
    def make(cls, x, eps: float) -> SieveParams:
        xn = float(np.max(x))
        s = max(1.0, eps * math.log(math.log(xn)))
        return cls(tuple(float(v) for v in np.atleast_1d(x)), eps, s, xn ** (1 / s), xn ** eps)


@dataclass(frozen=True)
class ShiftPartitionReport:
    x: tuple
    xi: object
    y: float
    z: float
    eps: float
    c_upper: float      # C^y: terms with N A > y or N A_xi > y
    c_lower: float      # C_y: terms with N A <= y and N A_xi <= y
    c_xi: float
    identity_exact: bool
    rhs: float
    ratio: float
    n_terms: int
    rough_cap_exponent: float
    rough_max: float

    def as_row(self) -> dict:
        return {"x": float(np.max(self.x)), "y": self.y, "z": self.z, "C_upper": self.c_upper,
                "C_lower": self.c_lower, "C_xi": self.c_xi, "rhs": self.rhs, "ratio": self.ratio}


def _smooth_part_table(N: int, z: float) -> np.ndarray:
    """Largest z-smooth divisor of each n <= N."""
    A = np.ones(N + 1, dtype=np.int64)
    for p in rational_primes(min(z, N)).tolist():
        q = p
        while q <= N:
            A[q::q] *= p
            q *= p
    return A


def tau_ideals(xi: RingElement) -> int:
    return len(divisor_generators(xi))


def _rhs(models, xi: RingElement, params: SieveParams, field: NumberFieldDesc) -> float:
    m1, m2 = models
    logp = 0.0
    for P in primes_up_to(field, params.z):
        logp += math.log1p((abs(m1.at_prime(P)) + abs(m2.at_prime(P))) / P.norm)
    x = np.asarray(params.x)
    nx = float(np.prod(x ** np.asarray(field.delta)))
    return tau_ideals(xi) * nx / math.log(float(np.max(x))) ** (2 - params.eps) * math.exp(logp)


def shifted_sum_partition(model1: MultiplicativeModel, model2: MultiplicativeModel, xi, x,
                          eps: float = 0.5) -> ShiftPartitionReport:
    """C_xi(x) split by the z-smooth parts A of (eta) and A_xi of (eta + xi).

    The rough parts have at most s prime factors beyond z, so their
    contribution is capped by (log |x|)^(2 m eps); the observed maximum is
    reported next to the cap exponent.
    """
    field = model1.field
    if not isinstance(xi, RingElement):
        xi = field.element(int(xi))
    params = SieveParams.make(x, eps)
    xn = float(np.max(params.x))
    if float(np.max(np.abs(xi.embeddings()))) > xn ** 0.5 + 1e-9:
        raise DomainError("need |xi| <= |x|^nu with nu = 1/2")
    if field.kind == "rational":
        terms, upper, rough = _partition_rational(model1, model2, int(xi.a), int(params.x[0]), params)
    else:
        terms, upper, rough = _partition_field(model1, model2, xi, params)
    up, low, total = exact_sum(terms[upper]), exact_sum(terms[~upper]), exact_sum(terms)
    rhs = _rhs((model1, model2), xi, params, field)
    c_xi = float(total)
    return ShiftPartitionReport(params.x, xi, params.y, params.z, eps, float(up), float(low), c_xi,
                                up + low == total, rhs, c_xi / rhs, int(len(terms)),
                                2 * max(model1.m, model2.m) * eps, rough)


def _partition_rational(m1, m2, xi: int, X: int, params: SieveParams):
    N = X + xi
    l1 = m1.table(N)
    l2 = l1 if m2 is m1 else m2.table(N)
    n = np.arange(1, X + 1)
    terms = np.abs(l1[n] * l2[n + xi])
    A = _smooth_part_table(N, params.z)
    upper = (A[n] > params.y) | (A[n + xi] > params.y)
    with np.errstate(divide="ignore", invalid="ignore"):
        rough1 = np.where(l1[A[n]] != 0, l1[n] / l1[A[n]], 0.0)
        rough2 = np.where(l2[A[n + xi]] != 0, l2[n + xi] / l2[A[n + xi]], 0.0)
    rough = float(np.max(np.abs(rough1 * rough2))) if len(n) else 0.0
    return terms, upper, rough


def _fast_factor(field: NumberFieldDesc, a: int, b: int, spf: np.ndarray):
    """Prime ideal factorization of a + b w from the factorization of its norm."""
    nm = abs(a * a + a * b * field.tr_w + b * b * field.nm_w)
    out = []
    while nm > 1:
        p = int(spf[nm])
        e = 0
        while nm % p == 0:
            nm //= p
            e += 1
        Ps = prime_ideals_above(field, p)
        if len(Ps) == 1:
            P = Ps[0]
            out.append((P, e // 2 if P.degree == 2 else e))
            continue
        g = 0
        aa, bb = a, b
        while aa % p == 0 and bb % p == 0:
            aa //= p
            bb //= p
            g += 1
        rest = e - 2 * g
        P1, P2 = Ps
        el = RingElement(aa, bb, field)
        v1 = g + (rest if rest and P1.contains(el) else 0)
        v2 = e - v1
        if v1:
            out.append((P1, v1))
        if v2:
            out.append((P2, v2))
    return out


def _partition_field(m1, m2, xi: RingElement, params: SieveParams):
    field = m1.field
    a, b = totally_positive_arrays(field, np.asarray(params.x))
    order = np.lexsort((b, a))
    a, b = a[order], b[order]
    xa, xb = int(xi.a), int(xi.b)
    nmax = int(max(np.max(np.abs(field.nm_w * (b + xb) ** 2 + (a + xa) ** 2 + field.tr_w * (a + xa) * (b + xb))),
                   np.max(np.abs(field.nm_w * b ** 2 + a ** 2 + field.tr_w * a * b)))) + 1
    spf = _spf(nmax)
    terms = np.zeros(len(a))
    upper = np.zeros(len(a), dtype=bool)
    rough = 0.0
    for i, (p, q) in enumerate(zip(a.tolist(), b.tolist())):
        f1 = _fast_factor(field, p, q, spf)
        f2 = _fast_factor(field, p + xa, q + xb, spf)
        v1, v2 = m1.of_factorization(f1), m2.of_factorization(f2)
        terms[i] = abs(v1 * v2)
        s1 = [(P, e) for P, e in f1 if P.norm <= params.z]
        s2 = [(P, e) for P, e in f2 if P.norm <= params.z]
        na = math.prod(P.norm ** e for P, e in s1)
        nax = math.prod(P.norm ** e for P, e in s2)
        upper[i] = na > params.y or nax > params.y
        r1 = m1.of_factorization([t for t in f1 if t[0].norm > params.z])
        r2 = m2.of_factorization([t for t in f2 if t[0].norm > params.z])
        rough = max(rough, abs(r1 * r2))
    return terms, upper, rough


def shift_ratio_bounded(ratios: Sequence[float], factor: float = 2.0) -> bool:
    """No growth beyond ``factor`` times the first ratio along the x-grid."""
    r = np.asarray(ratios, dtype=float)
    return bool(np.all(np.isfinite(r)) and np.max(r) <= factor * r[0])


def euler_local_factor(l1: float, l2: float, Np: int, amax: int = 60) -> tuple[float, float, float]:
    """Local factor at P not dividing v of the assembled smooth-part sum.

    1 + sum_{a >= 1} (|lambda_1(P^a)| + |lambda_2(P^a)|) NP^-a (1 - 1/NP)^-1,
    returned with its main part 1 + (|lambda_1(P)| + |lambda_2(P)|)/NP and the remainder.
    """
    p1 = _hecke_powers(l1, amax)
    p2 = _hecke_powers(l2, amax)
    tail = math.fsum((abs(p1[a]) + abs(p2[a])) / Np ** a for a in range(1, amax + 1))
    factor = 1 + tail / (1 - 1 / Np)
    main = 1 + (abs(l1) + abs(l2)) / Np
    return factor, main, factor - main


def embedding_of(field: NumberFieldDesc, pts: np.ndarray) -> np.ndarray:
    if field.kind == "rational":
        return pts.astype(float)
    return embed_array(field, pts[:, 0], pts[:, 1])
