"""Exact arithmetic in Q and in the cyclotomic fields Q(zeta_n).

Elements of Q(zeta_n) are stored on the power basis 1, zeta, ..., zeta^(phi(n)-1),
reduced modulo the n-th cyclotomic polynomial.  All coefficients are
``fractions.Fraction``; there is no floating point anywhere in this module.
Values are immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

Rational = Fraction


class InvalidAutomorphism(ValueError):
    """Raised when zeta -> zeta^k is requested with gcd(k, n) != 1."""


# ---------------------------------------------------------------------------
# small number-theoretic helpers


@lru_cache(maxsize=None)
def euler_phi(n: int) -> int:
    result = n
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1 if p == 2 else 2
    if m > 1:
        result -= result // m
    return result


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
    return small + large[::-1]


@lru_cache(maxsize=None)
def orders_with_phi_at_most(bound: int) -> tuple[int, ...]:
    """All n with euler_phi(n) <= bound, in increasing order.

    Uses phi(n) >= sqrt(n/2), so the search space is n <= 2*bound^2.
    """
    if bound < 1:
        return ()
    limit = 2 * bound * bound + 1
    phi = list(range(limit))
    for p in range(2, limit):
        if phi[p] == p:  # p prime
            for k in range(p, limit, p):
                phi[k] -= phi[k] // p
    return tuple(n for n in range(1, limit) if phi[n] <= bound)


# ---------------------------------------------------------------------------
# univariate polynomials over Q (dense, ascending coefficients)


class QPoly:
    """Univariate polynomial over Q, dense ascending coefficient tuple."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, QPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __add__(self, other: "QPoly") -> "QPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return QPoly(out)

    def __neg__(self) -> "QPoly":
        return QPoly([-c for c in self.coeffs])

    def __sub__(self, other: "QPoly") -> "QPoly":
        return self + (-other)

    def __mul__(self, other) -> "QPoly":
        if isinstance(other, (int, Fraction)):
            return QPoly([c * other for c in self.coeffs])
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return QPoly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca:
                for j, cb in enumerate(b):
                    out[i + j] += ca * cb
        return QPoly(out)

    __rmul__ = __mul__

    def __divmod__(self, other: "QPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        db = other.degree
        lc = other.coeffs[-1]
        if len(rem) - 1 < db:
            return QPoly(), QPoly(rem)
        quot = [Fraction(0)] * (len(rem) - db)
        for i in range(len(rem) - 1, db - 1, -1):
            c = rem[i]
            if c:
                q = c / lc
                quot[i - db] = q
                for j, bc in enumerate(other.coeffs):
                    rem[i - db + j] -= q * bc
        return QPoly(quot), QPoly(rem)

    def __floordiv__(self, other: "QPoly") -> "QPoly":
        return divmod(self, other)[0]

    def __mod__(self, other: "QPoly") -> "QPoly":
        return divmod(self, other)[1]

    def divides(self, other: "QPoly") -> bool:
        return (other % self).is_zero()

    def derivative(self) -> "QPoly":
        return QPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def monic(self) -> "QPoly":
        if self.is_zero():
            return self
        lc = self.coeffs[-1]
        return QPoly([c / lc for c in self.coeffs])

    def compose_scale(self, sign: int) -> "QPoly":
        """p(sign * x) for sign = +-1."""
        return QPoly([c if (i % 2 == 0 or sign > 0) else -c
                      for i, c in enumerate(self.coeffs)])

    def compose_square(self) -> "QPoly":
        """p(x^2)."""
        out = [Fraction(0)] * (2 * len(self.coeffs) - 1) if self.coeffs else []
        for i, c in enumerate(self.coeffs):
            out[2 * i] = c
        return QPoly(out)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __repr__(self) -> str:
        if self.is_zero():
            return "QPoly(0)"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c:
                parts.append(f"{c}*x^{i}" if i else f"{c}")
        return "QPoly(" + " + ".join(parts) + ")"

    @staticmethod
    def x_power(k: int, coeff=1) -> "QPoly":
        return QPoly([0] * k + [coeff])


def qpoly_gcd(f: QPoly, g: QPoly) -> QPoly:
    """Monic gcd over Q by the Euclidean algorithm."""
    a, b = f, g
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> QPoly:
    """The n-th cyclotomic polynomial, monic of degree phi(n)."""
    if n < 1:
        raise ValueError("conductor must be >= 1")
    num = QPoly([-1] + [0] * (n - 1) + [1])  # x^n - 1
    for d in divisors(n):
        if d < n:
            num, rem = divmod(num, cyclotomic_poly(d))
            assert rem.is_zero()
    return num


# ---------------------------------------------------------------------------
# roots of unity as reduced fractions of a full turn


@dataclass(frozen=True, order=True)
class RationalTurn:
    """The root of unity e^{2*pi*i*p/q}, stored with 0 <= p < q, gcd(p,q)=1."""

    p: int
    q: int

    def __init__(self, p: int, q: int):
        if q <= 0:
            raise ValueError("denominator must be positive")
        p %= q
        g = math.gcd(p, q)
        object.__setattr__(self, "p", p // g)
        object.__setattr__(self, "q", q // g)

    @staticmethod
    def from_fraction(t) -> "RationalTurn":
        t = Fraction(t)
        return RationalTurn(t.numerator, t.denominator)

    @property
    def order(self) -> int:
        return self.q

    def as_fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __mul__(self, other: "RationalTurn") -> "RationalTurn":
        return RationalTurn.from_fraction(self.as_fraction() + other.as_fraction())

    def __pow__(self, k: int) -> "RationalTurn":
        return RationalTurn.from_fraction(k * self.as_fraction())

    def inverse(self) -> "RationalTurn":
        return RationalTurn(-self.p, self.q)

    def complex(self) -> complex:
        return cmath.exp(2j * cmath.pi * self.p / self.q)

    def __repr__(self) -> str:
        return f"turn({self.p}/{self.q})"


# ---------------------------------------------------------------------------
# reduction and embedding tables


@lru_cache(maxsize=None)
def _power_table(n: int) -> tuple[tuple[Fraction, ...], ...]:
    """Representation of zeta_n^t on the power basis, for t = 0..n-1."""
    d = euler_phi(n)
    phi_n = cyclotomic_poly(n)
    rows = []
    cur = [Fraction(0)] * d
    cur[0] = Fraction(1)
    for t in range(n):
        rows.append(tuple(cur))
        # multiply by x modulo phi_n
        nxt = [Fraction(0)] + cur[:]
        if len(nxt) > d:
            lead = nxt.pop()
            if lead:
                for j in range(d):
                    nxt[j] -= lead * phi_n.coeffs[j]
        cur = nxt + [Fraction(0)] * (d - len(nxt))
    return tuple(rows)


@lru_cache(maxsize=None)
def _embed_table(n: int, m: int) -> tuple[tuple[Fraction, ...], ...]:
    """Rows i: representation of zeta_n^i in Q(zeta_m), for n | m."""
    assert m % n == 0
    step = m // n
    pt = _power_table(m)
    return tuple(pt[(i * step) % m] for i in range(euler_phi(n)))


class CycloNum:
    """An element of Q(zeta_n) in canonical reduced power-basis form."""

    __slots__ = ("n", "c")

    def __init__(self, n: int, coeffs):
        d = euler_phi(n)
        cs = [Fraction(x) for x in coeffs]
        if len(cs) != d:
            raise ValueError(f"need {d} coefficients for conductor {n}")
        self.n = n
        self.c = tuple(cs)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def rational(x, n: int = 1) -> "CycloNum":
        d = euler_phi(n)
        return CycloNum(n, [Fraction(x)] + [Fraction(0)] * (d - 1))

    @staticmethod
    def zero(n: int = 1) -> "CycloNum":
        return CycloNum.rational(0, n)

    @staticmethod
    def one(n: int = 1) -> "CycloNum":
        return CycloNum.rational(1, n)

    @staticmethod
    def zeta(n: int, k: int = 1) -> "CycloNum":
        return CycloNum(n, _power_table(n)[k % n])

    @staticmethod
    def from_turn(t: RationalTurn, n: int | None = None) -> "CycloNum":
        """e^{2*pi*i*p/q} as an element of Q(zeta_n) (n a multiple of q)."""
        if n is None:
            n = t.q
        if n % t.q:
            raise ValueError("conductor must be a multiple of the order")
        return CycloNum.zeta(n, t.p * (n // t.q))

    # -- basic structure ----------------------------------------------------

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.c)

    def is_rational(self) -> bool:
        return all(x == 0 for x in self.c[1:])

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self!r} is not rational")
        return self.c[0]

    def embed(self, m: int) -> "CycloNum":
        """The same value viewed in Q(zeta_m), for n | m."""
        if m == self.n:
            return self
        if m % self.n:
            raise ValueError("can only embed into a multiple of the conductor")
        table = _embed_table(self.n, m)
        d = euler_phi(m)
        out = [Fraction(0)] * d
        for i, ci in enumerate(self.c):
            if ci:
                row = table[i]
                for j in range(d):
                    out[j] += ci * row[j]
        return CycloNum(m, out)

    @staticmethod
    def common(a: "CycloNum", b: "CycloNum") -> tuple["CycloNum", "CycloNum"]:
        if a.n == b.n:
            return a, b
        m = a.n * b.n // math.gcd(a.n, b.n)
        return a.embed(m), b.embed(m)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other) -> "CycloNum":
        other = _coerce(other, self.n)
        a, b = CycloNum.common(self, other)
        return CycloNum(a.n, [x + y for x, y in zip(a.c, b.c)])

    __radd__ = __add__

    def __neg__(self) -> "CycloNum":
        return CycloNum(self.n, [-x for x in self.c])

    def __sub__(self, other) -> "CycloNum":
        return self + (-_coerce(other, self.n))

    def __rsub__(self, other) -> "CycloNum":
        return _coerce(other, self.n) - self

    def __mul__(self, other) -> "CycloNum":
        other = _coerce(other, self.n)
        a, b = CycloNum.common(self, other)
        d = euler_phi(a.n)
        conv = [Fraction(0)] * (2 * d - 1)
        for i, x in enumerate(a.c):
            if x:
                for j, y in enumerate(b.c):
                    if y:
                        conv[i + j] += x * y
        # fold exponents >= d using the power table
        table = _power_table(a.n)
        out = conv[:d]
        for e in range(d, 2 * d - 1):
            ce = conv[e]
            if ce:
                row = table[e % a.n]
                for j in range(d):
                    out[j] += ce * row[j]
        return CycloNum(a.n, out)

    __rmul__ = __mul__

    def inverse(self) -> "CycloNum":
        if self.is_zero():
            raise ZeroDivisionError("inversion of zero in a cyclotomic field")
        if self.is_rational():
            return CycloNum.rational(1 / self.c[0], self.n)
        # extended Euclid of the representative against Phi_n over Q
        a = QPoly(self.c)
        b = cyclotomic_poly(self.n)
        # invariants: s0*a = r0 (mod b), s1*a = r1 (mod b)
        r0, r1 = a, b
        s0, s1 = QPoly([1]), QPoly()
        while not r1.is_zero():
            q, r = divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, s0 - q * s1
        # r0 is a nonzero constant (Phi_n is irreducible over Q)
        assert r0.degree == 0
        inv = s0 * (1 / r0.coeffs[0])
        cs = list(inv.coeffs) + [Fraction(0)] * (euler_phi(self.n) - len(inv.coeffs))
        return CycloNum(self.n, cs)

    def __truediv__(self, other) -> "CycloNum":
        other = _coerce(other, self.n)
        return self * other.inverse()

    def __rtruediv__(self, other) -> "CycloNum":
        return _coerce(other, self.n) / self

    def __pow__(self, k: int) -> "CycloNum":
        if k < 0:
            return self.inverse() ** (-k)
        result = CycloNum.one(self.n)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = CycloNum.rational(other, 1)
        if not isinstance(other, CycloNum):
            return NotImplemented
        a, b = CycloNum.common(self, other)
        return a.c == b.c

    def __hash__(self) -> int:
        if self.is_rational():
            return hash(self.c[0])
        return hash((self.n, self.c))

    def conjugate_map(self, k: int) -> "CycloNum":
        """Apply the Galois automorphism zeta_n -> zeta_n^k, gcd(k, n) = 1."""
        if math.gcd(k, self.n) != 1:
            raise InvalidAutomorphism(f"k={k} not coprime to conductor {self.n}")
        table = _power_table(self.n)
        d = euler_phi(self.n)
        out = [Fraction(0)] * d
        for i, ci in enumerate(self.c):
            if ci:
                row = table[(i * k) % self.n]
                for j in range(d):
                    out[j] += ci * row[j]
        return CycloNum(self.n, out)

    def complex(self) -> complex:
        z = cmath.exp(2j * cmath.pi / self.n)
        acc = 0j
        for c in reversed(self.c):
            acc = acc * z + complex(c)
        return acc

    def __repr__(self) -> str:
        if self.is_rational():
            return f"CycloNum({self.c[0]})"
        parts = []
        for i, c in enumerate(self.c):
            if c:
                parts.append(f"{c}" if i == 0 else f"{c}*z{self.n}^{i}")
        return "CycloNum(" + " + ".join(parts) + ")"


def _coerce(x, n: int) -> CycloNum:
    if isinstance(x, CycloNum):
        return x
    if isinstance(x, (int, Fraction)):
        return CycloNum.rational(x, 1)
    raise TypeError(f"cannot coerce {type(x)} into a cyclotomic field")


# ---------------------------------------------------------------------------
# univariate polynomials over a cyclotomic field


class CPoly:
    """Univariate polynomial with CycloNum coefficients (dense, ascending)."""

    __slots__ = ("coeffs", "n")

    def __init__(self, coeffs, n: int | None = None):
        cs = [c if isinstance(c, CycloNum) else CycloNum.rational(c)
              for c in coeffs]
        if n is None:
            n = 1
            for c in cs:
                n = n * c.n // math.gcd(n, c.n)
        cs = [c.embed(n) for c in cs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)
        self.n = n

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __mul__(self, other: "CPoly") -> "CPoly":
        if self.is_zero() or other.is_zero():
            return CPoly([], max(self.n, other.n))
        m = self.n * other.n // math.gcd(self.n, other.n)
        out = [CycloNum.zero(m) for _ in range(self.degree + other.degree + 1)]
        for i, a in enumerate(self.coeffs):
            if not a.is_zero():
                for j, b in enumerate(other.coeffs):
                    if not b.is_zero():
                        out[i + j] = out[i + j] + a * b
        return CPoly(out, m)

    def conjugate_map(self, k: int) -> "CPoly":
        return CPoly([c.conjugate_map(k) for c in self.coeffs], self.n)

    def __call__(self, x: CycloNum) -> CycloNum:
        m = self.n * x.n // math.gcd(self.n, x.n)
        acc = CycloNum.zero(m)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_turn(self, t: RationalTurn) -> CycloNum:
        m = self.n * t.q // math.gcd(self.n, t.q)
        return self(CycloNum.from_turn(t, m))

    def to_qpoly(self) -> QPoly:
        return QPoly([c.as_rational() for c in self.coeffs])

    def __repr__(self) -> str:
        return f"CPoly(deg={self.degree}, conductor={self.n})"


def norm_to_rationals(f: CPoly) -> QPoly:
    """Product of f over all Galois conjugates zeta_n -> zeta_n^k.

    The result has rational coefficients, degree phi(n)*deg(f), and every
    cyclotomic root of f is a root of the result.  Large inputs go through an
    integer resultant against the conductor's cyclotomic polynomial, which is
    the same product.
    """
    if f.is_zero():
        raise ValueError("norm of the zero polynomial")
    n = f.n
    d = euler_phi(n)
    if d > 1 and d * (f.degree + 1) > 40:
        return _norm_by_resultant(f)
    prod = CPoly([CycloNum.one(n)], n)
    for k in range(1, n + 1):
        if math.gcd(k, n) == 1:
            prod = prod * f.conjugate_map(k)
    return prod.to_qpoly()


def _norm_by_resultant(f: CPoly) -> QPoly:
    """N(f) = Res_z(Phi_n(z), f(z, x)) over the integers."""
    from ._modres import resultant_int_matrices
    n = f.n
    d = euler_phi(n)
    den = 1
    for c in f.coeffs:
        for q in c.c:
            den = den * q.denominator // math.gcd(den, q.denominator)
    MA = [[int(q)] for q in cyclotomic_poly(n).coeffs]
    MB = [[0] * (f.degree + 1) for _ in range(d)]
    top = 0
    for j, c in enumerate(f.coeffs):
        for i, q in enumerate(c.c):
            v = q * den
            MB[i][j] = int(v)
            if v and i > top:
                top = i
    MB = MB[:top + 1]
    res = resultant_int_matrices(MA, MB)
    scale = Fraction(1, den ** d)
    return QPoly([Fraction(c) * scale for c in res])
