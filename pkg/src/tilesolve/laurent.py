"""Multivariate Laurent polynomials over cyclotomic fields.

Supports the structural operations the torsion solvers need: sign and square
substitutions, monomial changes of basis, exponent lattices, exact resultants
and gcds, content extraction, and a text format that round-trips the
polynomials used by the regression manifest.

Arity is limited to 3.  Coefficients are :class:`tilesolve.cyclofield.CycloNum`
over a common conductor; the zero polynomial is the empty term map.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from . import _intmat
from .cyclofield import (CPoly, CycloNum, QPoly, RationalTurn, cyclotomic_poly,
                         euler_phi, qpoly_gcd)

MAX_ARITY = 3


class ArityError(ValueError):
    pass


class InvalidTransform(ValueError):
    pass


class EmptySupport(ValueError):
    pass


class RankDeficient(ValueError):
    """make_full called on a polynomial whose exponent lattice is not full rank."""


class NoElimination(ValueError):
    """Resultant requested in a variable both inputs are constant in."""


DEFAULT_VARS = ("x", "y", "z")


class LaurentPoly:
    """Laurent polynomial: map from integer exponent vectors to CycloNum."""

    __slots__ = ("arity", "terms", "conductor")

    def __init__(self, arity: int, terms=None, conductor: int | None = None):
        if not 1 <= arity <= MAX_ARITY:
            raise ArityError(f"arity must be 1..{MAX_ARITY}, got {arity}")
        self.arity = arity
        clean: dict[tuple[int, ...], CycloNum] = {}
        n = conductor or 1
        items = (terms or {}).items()
        for e, c in items:
            if not isinstance(c, CycloNum):
                c = CycloNum.rational(c)
            n = n * c.n // math.gcd(n, c.n)
        for e, c in items:
            if len(e) != arity:
                raise ArityError("exponent vector arity mismatch")
            if not isinstance(c, CycloNum):
                c = CycloNum.rational(c)
            c = c.embed(n)
            if not c.is_zero():
                key = tuple(int(x) for x in e)
                if key in clean:
                    s = clean[key] + c
                    if s.is_zero():
                        del clean[key]
                    else:
                        clean[key] = s
                else:
                    clean[key] = c
        self.terms = clean
        self.conductor = n

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def zero(arity: int) -> "LaurentPoly":
        return LaurentPoly(arity, {})

    @staticmethod
    def constant(arity: int, c) -> "LaurentPoly":
        return LaurentPoly(arity, {(0,) * arity: c})

    @staticmethod
    def variable(arity: int, idx: int) -> "LaurentPoly":
        e = [0] * arity
        e[idx] = 1
        return LaurentPoly(arity, {tuple(e): 1})

    # -- basic structure ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(all(x == 0 for x in e) for e in self.terms)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        if self.arity != other.arity:
            return False
        if set(self.terms) != set(other.terms):
            return False
        return all(self.terms[e] == other.terms[e] for e in self.terms)

    def __hash__(self) -> int:
        return hash((self.arity, frozenset(
            (e, c.n, c.c) for e, c in self.terms.items())))

    def degree_in(self, var: int) -> int:
        """Max exponent of ``var`` (0 for the zero polynomial)."""
        return max((e[var] for e in self.terms), default=0)

    def min_degree_in(self, var: int) -> int:
        return min((e[var] for e in self.terms), default=0)

    # -- ring operations -------------------------------------------------------

    def _check(self, other: "LaurentPoly"):
        if self.arity != other.arity:
            raise ArityError("arity mismatch")

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check(other)
        combined = dict(self.terms)
        for e, c in other.terms.items():
            if e in combined:
                combined[e] = combined[e] + c
            else:
                combined[e] = c
        return LaurentPoly(self.arity, combined)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self.arity, {e: -c for e, c in self.terms.items()},
                           self.conductor)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other) -> "LaurentPoly":
        if isinstance(other, (int, Fraction, CycloNum)):
            return self.scale(other)
        self._check(other)
        out: dict[tuple[int, ...], CycloNum] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                p = c1 * c2
                if e in out:
                    out[e] = out[e] + p
                else:
                    out[e] = p
        return LaurentPoly(self.arity, out)

    __rmul__ = __mul__

    def scale(self, c) -> "LaurentPoly":
        if not isinstance(c, CycloNum):
            c = CycloNum.rational(c)
        if c.is_zero():
            return LaurentPoly.zero(self.arity)
        return LaurentPoly(self.arity,
                           {e: v * c for e, v in self.terms.items()})

    def mul_monomial(self, exps, coeff=1) -> "LaurentPoly":
        exps = tuple(exps)
        return LaurentPoly(self.arity, {
            tuple(a + b for a, b in zip(e, exps)): c * coeff
            for e, c in self.terms.items()})

    # -- substitutions ----------------------------------------------------------

    def substitute_signs(self, signs) -> "LaurentPoly":
        """x_i -> signs[i] * x_i."""
        signs = tuple(signs)
        out = {}
        for e, c in self.terms.items():
            s = 1
            for si, ei in zip(signs, e):
                if si < 0 and ei % 2:
                    s = -s
            out[e] = c if s > 0 else -c
        return LaurentPoly(self.arity, out, self.conductor)

    def substitute_squares(self, signs) -> "LaurentPoly":
        """x_i -> signs[i] * x_i**2."""
        signs = tuple(signs)
        out = {}
        for e, c in self.terms.items():
            s = 1
            for si, ei in zip(signs, e):
                if si < 0 and ei % 2:
                    s = -s
            out[tuple(2 * ei for ei in e)] = c if s > 0 else -c
        return LaurentPoly(self.arity, out, self.conductor)

    def monomial_change_of_basis(self, M) -> "LaurentPoly":
        """Map exponent vectors by the unimodular matrix M (e -> M @ e)."""
        d = _intmat.det(M)
        if d not in (1, -1):
            raise InvalidTransform(f"matrix determinant {d}, need +-1")
        out = {}
        for e, c in self.terms.items():
            out[tuple(_intmat.mat_vec(M, list(e)))] = c
        return LaurentPoly(self.arity, out, self.conductor)

    # -- evaluation ----------------------------------------------------------------

    def eval_turn(self, assignment) -> CycloNum:
        """Exact evaluation at roots of unity, one RationalTurn per variable."""
        turns = list(assignment)
        if len(turns) != self.arity:
            raise ArityError("assignment arity mismatch")
        n = self.conductor
        for t in turns:
            n = n * t.q // math.gcd(n, t.q)
        acc = CycloNum.zero(n)
        for e, c in self.terms.items():
            f = Fraction(0)
            for t, ei in zip(turns, e):
                f += ei * t.as_fraction()
            acc = acc + c.embed(n) * CycloNum.from_turn(
                RationalTurn.from_fraction(f), n)
        return acc

    def eval_complex(self, values) -> complex:
        acc = 0j
        for e, c in self.terms.items():
            m = c.complex()
            for v, ei in zip(values, e):
                m *= v ** ei
            acc += m
        return acc

    def subs_variable_turn(self, var: int, t: RationalTurn) -> "LaurentPoly":
        """Substitute x_var = the given root of unity; arity drops by one."""
        if self.arity == 1:
            raise ArityError("cannot drop below arity 1")
        out: dict[tuple[int, ...], CycloNum] = {}
        n = self.conductor * t.q // math.gcd(self.conductor, t.q)
        for e, c in self.terms.items():
            w = CycloNum.from_turn(RationalTurn.from_fraction(
                e[var] * t.as_fraction()), n)
            key = tuple(x for i, x in enumerate(e) if i != var)
            v = c.embed(n) * w
            if key in out:
                out[key] = out[key] + v
            else:
                out[key] = v
        return LaurentPoly(self.arity - 1, out, n)

    def as_cpoly(self) -> CPoly:
        """Arity-1 polynomial with nonnegative exponents as a CPoly."""
        if self.arity != 1:
            raise ArityError("as_cpoly needs arity 1")
        if self.is_zero():
            return CPoly([], self.conductor)
        lo = self.min_degree_in(0)
        hi = self.degree_in(0)
        coeffs = [CycloNum.zero(self.conductor)] * (hi - lo + 1)
        for e, c in self.terms.items():
            coeffs[e[0] - lo] = c
        return CPoly(coeffs, self.conductor)

    @staticmethod
    def from_cpoly(p: CPoly) -> "LaurentPoly":
        return LaurentPoly(1, {(i,): c for i, c in enumerate(p.coeffs)}, p.n)

    @staticmethod
    def from_qpoly(p: QPoly, arity: int = 1, var: int = 0) -> "LaurentPoly":
        e0 = [0] * arity
        terms = {}
        for i, c in enumerate(p.coeffs):
            e = list(e0)
            e[var] = i
            terms[tuple(e)] = c
        return LaurentPoly(arity, terms)

    # -- exponent lattice -------------------------------------------------------------

    def strip_monomial(self) -> "LaurentPoly":
        """Divide by the monomial gcd so all exponents are >= 0 and touch 0."""
        if self.is_zero():
            return self
        mins = [min(e[i] for e in self.terms) for i in range(self.arity)]
        if all(m == 0 for m in mins):
            return self
        return self.mul_monomial([-m for m in mins])

    def demote_rational(self) -> "LaurentPoly":
        """Drop to conductor 1 when every coefficient is in fact rational."""
        if self.conductor == 1 or not all(c.is_rational()
                                          for c in self.terms.values()):
            return self
        return LaurentPoly(self.arity, {e: c.as_rational()
                                        for e, c in self.terms.items()})

    def exponent_lattice(self) -> "ExponentLattice":
        if self.is_zero():
            raise EmptySupport("zero polynomial has no exponent lattice")
        exps = list(self.terms)
        base = exps[0]
        diffs = [[a - b for a, b in zip(e, base)] for e in exps[1:]]
        basis = _intmat.hnf_rows(diffs, self.arity)
        return ExponentLattice(self.arity, basis)

    def __repr__(self) -> str:
        return f"LaurentPoly({format_poly(self)})"


@dataclass
class ExponentLattice:
    arity: int
    generators: list  # HNF rows

    @property
    def rank(self) -> int:
        return len(self.generators)


@dataclass(frozen=True)
class MonomialMap:
    """Monomial substitution x_i = prod_j u_j^{M[i][j]}.

    A polynomial in u with exponent vector c corresponds to exponents M @ c in
    x.  For unimodular M this is the GL_k(Z) change of basis; ``make_full``
    also uses index-reducing maps with \\|det\\| equal to the lattice index.
    """

    matrix: tuple

    def det(self) -> int:
        return _intmat.det([list(r) for r in self.matrix])

    def lift_turns(self, turns) -> list:
        """Solutions t_x of the monomial system given torsion values for u.

        Solves M^T t_x = t_u (mod 1); returns the list of turn tuples.
        """
        M = [list(r) for r in self.matrix]
        MT = [[M[i][j] for i in range(len(M))] for j in range(len(M[0]))]
        rhs = [t.as_fraction() for t in turns]
        sols, _kernel = _intmat.solve_integer_congruence(MT, rhs)
        return [tuple(RationalTurn.from_fraction(v) for v in s) for s in sols]

    def push_relation(self, coeffs, rhs: Fraction):
        """Rewrite a relation sum(a_j * t_u_j) = rhs through the map.

        Returns (coeffs over x-turns, rhs): a . t_u = a . M^T t_x = (M a) . t_x.
        """
        M = [list(r) for r in self.matrix]
        out = _intmat.mat_vec(M, list(coeffs))
        return out, rhs


def make_full(L: LaurentPoly) -> tuple[LaurentPoly, MonomialMap]:
    """Rewrite a full-rank polynomial on a basis of its exponent lattice.

    The result generates Z^k as exponent lattice.  Raises RankDeficient when
    the lattice rank is below the arity (the caller routes those to the
    one-parameter family handling).
    """
    lat = L.exponent_lattice()
    k = L.arity
    if lat.rank < k:
        raise RankDeficient(f"lattice rank {lat.rank} < arity {k}")
    # columns of B are the basis vectors
    B = [[lat.generators[j][i] for j in range(k)] for i in range(k)]
    if abs(_intmat.det(B)) == 1 and all(
            B[i][j] == (1 if i == j else 0) for i in range(k) for j in range(k)):
        return L, MonomialMap(tuple(tuple(r) for r in B))
    Binv = _intmat.mat_inverse_rational(B)
    base = next(iter(L.terms))
    out = {}
    for e, c in L.terms.items():
        d = [a - b for a, b in zip(e, base)]
        coords = _intmat.mat_vec(Binv, d)
        ic = []
        for v in coords:
            if v.denominator != 1:
                raise InvalidTransform("exponent not in lattice")
            ic.append(int(v))
        out[tuple(ic)] = c
    return (LaurentPoly(k, out, L.conductor).strip_monomial(),
            MonomialMap(tuple(tuple(r) for r in B)))


# ---------------------------------------------------------------------------
# conversion to/from sympy for the heavy exact kernels


def _sympy():
    import sympy
    return sympy


_SYMS = None


def _symbols():
    global _SYMS
    if _SYMS is None:
        sp = _sympy()
        _SYMS = sp.symbols("v0 v1 v2 zz")
    return _SYMS


def _to_sympy(L: LaurentPoly, vars_idx=None):
    """Convert (nonnegative exponents required) to a sympy Poly over QQ.

    Conductor > 1 coefficients are written in an extra variable zz that
    represents zeta_n; the caller is responsible for reducing mod Phi_n.
    """
    sp = _sympy()
    syms = _symbols()
    if vars_idx is None:
        vars_idx = list(range(L.arity))
    gens = [syms[i] for i in vars_idx]
    use_z = L.conductor > 1
    if use_z:
        gens = gens + [syms[3]]
    rep = {}
    for e, c in L.terms.items():
        if any(x < 0 for x in e):
            raise ValueError("negative exponent; strip_monomial first")
        for zi, coef in enumerate(c.c):
            if coef:
                key = tuple(e[i] for i in vars_idx) + ((zi,) if use_z else ())
                rep[key] = sp.Rational(coef.numerator, coef.denominator)
    if not rep:
        rep = {(0,) * len(gens): sp.Integer(0)}
    return sp.Poly.from_dict(rep, *gens, domain=sp.QQ)


def _reduce_mod_phi(poly, conductor: int):
    """Reduce the zz variable of a sympy Poly mod Phi_n(zz)."""
    sp = _sympy()
    syms = _symbols()
    phi = cyclotomic_poly(conductor)
    phip = sp.Poly([sp.Rational(c.numerator, c.denominator)
                    for c in reversed(phi.coeffs)], syms[3], domain=sp.QQ)
    return sp.rem(poly, phip.as_expr(), syms[3])


def _from_sympy(expr, gens_idx, conductor: int) -> LaurentPoly:
    """Convert a sympy expression in v<gens_idx> (and zz) to a LaurentPoly.

    The result has arity len(gens_idx); output variable position p corresponds
    to the sympy symbol v<gens_idx[p]>.
    """
    sp = _sympy()
    syms = _symbols()
    arity = len(gens_idx)
    gens = [syms[i] for i in gens_idx]
    use_z = conductor > 1
    allgens = gens + ([syms[3]] if use_z else [])
    poly = sp.Poly(expr, *allgens, domain=sp.QQ)
    d = euler_phi(conductor)
    acc: dict[tuple[int, ...], list] = {}
    for mono, coef in poly.terms():
        e = tuple(int(mono[pos]) for pos in range(arity))
        zi = int(mono[-1]) if use_z else 0
        vec = acc.setdefault(e, [Fraction(0)] * max(d, 1))
        q = Fraction(int(coef.p), int(coef.q))
        if use_z and zi >= d:
            raise ValueError("unreduced zeta power")
        vec[zi if use_z else 0] += q
    terms = {}
    for e, vec in acc.items():
        if use_z:
            terms[e] = CycloNum(conductor, vec)
        else:
            terms[e] = CycloNum.rational(vec[0])
    return LaurentPoly(arity, terms, conductor)


# ---------------------------------------------------------------------------
# resultants, gcds, contents


def resultant_eliminate(A: LaurentPoly, B: LaurentPoly, var: int) -> LaurentPoly:
    """Exact resultant of A and B with respect to variable ``var``.

    Negative exponents are cleared by monomial scaling first.  The result is a
    Laurent polynomial in the remaining variables (arity reduced by one, or a
    constant arity-1 polynomial when the inputs are univariate).  It vanishes
    identically iff A and B share a factor of positive degree in ``var``.
    """
    A._check(B)
    A = A.strip_monomial().demote_rational()
    B = B.strip_monomial().demote_rational()
    da, db = A.degree_in(var), B.degree_in(var)
    if da == 0 and db == 0:
        raise NoElimination("both inputs constant in the chosen variable")
    rest = [i for i in range(A.arity) if i != var]
    n = A.conductor * B.conductor // math.gcd(A.conductor, B.conductor)
    if len(rest) == 1:
        from . import _modres
        dta, dtb = A.degree_in(rest[0]), B.degree_in(rest[0])
        if n == 1 and (da + db) * (dta + dtb) >= _modres.MODULAR_THRESHOLD:
            return _modres.resultant_bivariate_int(A, B, var, rest[0])
        if n > 1 and (da + db) * (dta + dtb) >= 16:
            return _resultant_zeta_eval(A, B, var, rest[0], n)
    return _resultant_sympy(A, B, var, rest, n)


def _resultant_sympy(A, B, var, rest, conductor) -> LaurentPoly:
    sp = _sympy()
    syms = _symbols()
    pa = _to_sympy(LaurentPoly(A.arity, A.terms, conductor))
    pb = _to_sympy(LaurentPoly(B.arity, B.terms, conductor))
    r = sp.resultant(pa.as_expr(), pb.as_expr(), syms[var])
    if conductor > 1:
        r = _reduce_mod_phi(sp.expand(r), conductor)
    return _from_sympy(r, rest or [0], conductor)


def _resultant_zeta_eval(A: LaurentPoly, B: LaurentPoly, var: int, keep: int,
                         n: int) -> LaurentPoly:
    """Bivariate resultant with cyclotomic coefficients.

    Evaluates the kept variable at integer points, runs the integer resultant
    kernel on the (eliminated variable, zeta) pair per point, interpolates
    exactly over Q, and reduces the zeta powers modulo Phi_n at the end.
    """
    from ._modres import resultant_int_matrices
    from .cyclofield import _power_table

    d = euler_phi(n)
    A = LaurentPoly(A.arity, A.terms, n)
    B = LaurentPoly(B.arity, B.terms, n)

    def clear(L):
        den = 1
        for c in L.terms.values():
            for q in c.c:
                den = den * q.denominator // math.gcd(den, q.denominator)
        # cube[x-deg][y-deg][z-deg] integers
        dv, dk = L.degree_in(var), L.degree_in(keep)
        cube = [[[0] * d for _ in range(dk + 1)] for _ in range(dv + 1)]
        for e, c in L.terms.items():
            for zi, q in enumerate(c.c):
                if q:
                    cube[e[var]][e[keep]][zi] = int(q * den)
        return cube, den, dv, dk

    CA, denA, dvA, dkA = clear(A)
    CB, denB, dvB, dkB = clear(B)
    dy = dvA * dkB + dvB * dkA  # degree bound in the kept variable
    npts = dy + 1
    dz = (d - 1) * (dvA + dvB)  # z-degree bound of the unreduced resultant

    points = []
    values = []  # per point: list of ints per z-power (padded later)
    y0 = 0
    while len(points) < npts:
        MA = [[sum(row[j][zi] * y0 ** j for j in range(dkA + 1))
               for zi in range(d)] for row in CA]
        MB = [[sum(row[j][zi] * y0 ** j for j in range(dkB + 1))
               for zi in range(d)] for row in CB]
        if all(c == 0 for c in MA[-1]) or all(c == 0 for c in MB[-1]):
            y0 += 1
            continue
        r = resultant_int_matrices(MA, MB)
        points.append(y0)
        values.append(r)
        y0 += 1
    zlen = max((len(v) for v in values), default=1)
    zlen = max(zlen, 1)
    # interpolate each z-coefficient as a rational polynomial in y
    ypolys = []
    for zi in range(zlen):
        vals = [Fraction(v[zi]) if zi < len(v) else Fraction(0) for v in values]
        ypolys.append(_newton_rational(points, vals))
    # reduce z powers modulo Phi_n and rebuild
    table = _power_table(n)
    acc: dict[tuple[int, ...], list] = {}
    for zi, poly in enumerate(ypolys):
        row = table[zi % n]
        for j, q in enumerate(poly):
            if q == 0:
                continue
            key = [0, 0]
            key[keep] = j
            vec = acc.setdefault(tuple(key), [Fraction(0)] * d)
            for t in range(d):
                if row[t]:
                    vec[t] += q * row[t]
    scale = Fraction(1, denA ** dvB * denB ** dvA)
    terms = {}
    for e, vec in acc.items():
        c = CycloNum(n, [q * scale for q in vec])
        if not c.is_zero():
            key = tuple(x for i, x in enumerate(e) if i == keep)
            terms[key] = c
    return LaurentPoly(1, terms, n).demote_rational()


def _newton_rational(xs, ys):
    """Exact Newton interpolation; returns ascending rational coefficients."""
    m = len(xs)
    if xs == list(range(m)) and all(
            isinstance(v, int) or Fraction(v).denominator == 1 for v in ys):
        return _interp_forward_int([int(v) for v in ys])
    coef = list(ys)
    for k in range(1, m):
        for j in range(m - 1, k - 1, -1):
            coef[j] = (coef[j] - coef[j - 1]) / (xs[j] - xs[j - k])
    out = [Fraction(0)] * m
    for k in range(m - 1, -1, -1):
        shifted = [Fraction(0)] + out[:-1]
        out = [s - xs[k] * o for s, o in zip(shifted, out)]
        out[0] += coef[k]
    while out and out[-1] == 0:
        out.pop()
    return out


def _interp_forward_int(vals: list) -> list:
    """Integer forward-difference interpolation at points 0..m-1.

    R(y) = sum_k diff_k * C(y, k); all arithmetic stays in Z with a single
    common denominator (m-1)! cleared at the end.
    """
    m = len(vals)
    M = m - 1
    diffs = list(vals)
    dks = [diffs[0]]
    for _ in range(M):
        diffs = [b - a for a, b in zip(diffs, diffs[1:])]
        dks.append(diffs[0])
    factM = math.factorial(M)
    num = [0] * m
    ff = [1]  # falling factorial y(y-1)...(y-k+1), ascending coefficients
    kfact = 1
    for k, dk in enumerate(dks):
        if k:
            kfact *= k
            # ff *= (y - (k-1))
            shifted = [0] + ff
            ff = [s - (k - 1) * f for s, f in zip(shifted, ff + [0])]
        if dk:
            w = dk * (factM // kfact)
            for j, c in enumerate(ff):
                num[j] += w * c
    out = [Fraction(n, factM) for n in num]
    while out and out[-1] == 0:
        out.pop()
    return out


def univariate_gcd(f: QPoly, g: QPoly) -> QPoly:
    """Monic gcd of univariate rational polynomials."""
    if f.is_zero() and g.is_zero():
        raise ValueError("gcd(0, 0) undefined")
    if max(f.degree, g.degree) <= 24:
        return qpoly_gcd(f, g)
    sp = _sympy()
    x = _symbols()[0]
    pf = sp.Poly([sp.Rational(c.numerator, c.denominator)
                  for c in reversed(f.coeffs)] or [0], x, domain=sp.QQ)
    pg = sp.Poly([sp.Rational(c.numerator, c.denominator)
                  for c in reversed(g.coeffs)] or [0], x, domain=sp.QQ)
    h = pf.gcd(pg).monic()
    cs = [Fraction(int(c.p), int(c.q)) for c in h.all_coeffs()][::-1]
    return QPoly(cs)


def squarefree_part(f: QPoly) -> QPoly:
    """f / gcd(f, f'), monic."""
    if f.is_zero():
        raise ValueError("squarefree part of zero")
    g = univariate_gcd(f, f.derivative())
    if g.degree == 0:
        return f.monic()
    if f.degree <= 60:
        return (f // g).monic()
    sp = _sympy()
    x = _symbols()[0]
    pf = sp.Poly([sp.Rational(c.numerator, c.denominator)
                  for c in reversed(f.coeffs)], x, domain=sp.QQ)
    pg = sp.Poly([sp.Rational(c.numerator, c.denominator)
                  for c in reversed(g.coeffs)], x, domain=sp.QQ)
    q = pf.exquo(pg).monic()
    return QPoly([Fraction(int(c.p), int(c.q)) for c in q.all_coeffs()][::-1])


def laurent_divexact(A: LaurentPoly, B: LaurentPoly) -> LaurentPoly:
    """Exact division A / B (raises if not exact)."""
    A._check(B)
    if B.is_zero():
        raise ZeroDivisionError
    A = A.strip_monomial()
    B = B.strip_monomial()
    # long division by lexicographically largest term of B
    def key(e):
        return e
    quot: dict[tuple[int, ...], CycloNum] = {}
    rem = dict(LaurentPoly(A.arity, A.terms, A.conductor * B.conductor //
                           math.gcd(A.conductor, B.conductor)).terms)
    eb = max(B.terms, key=key)
    cb = B.terms[eb]
    while rem:
        ea = max(rem, key=key)
        q = tuple(a - b for a, b in zip(ea, eb))
        c = rem[ea] / cb
        quot[q] = c
        for e2, c2 in B.terms.items():
            tgt = tuple(a + b for a, b in zip(q, e2))
            v = rem.get(tgt, CycloNum.zero(1)) - c * c2
            if v.is_zero():
                rem.pop(tgt, None)
            else:
                rem[tgt] = v
    return LaurentPoly(A.arity, quot)


def multivariate_gcd(A: LaurentPoly, B: LaurentPoly) -> LaurentPoly:
    """gcd over the coefficient field, normalized to leading coefficient 1.

    Monomial factors are not part of the gcd (units in the Laurent ring).
    """
    A._check(B)
    if A.is_zero():
        return _normalize_lead(B.strip_monomial())
    if B.is_zero():
        return _normalize_lead(A.strip_monomial())
    A = A.strip_monomial().demote_rational()
    B = B.strip_monomial().demote_rational()
    if A.arity == 1:
        return _normalize_lead(_gcd_univariate_field(A, B))
    n = A.conductor * B.conductor // math.gcd(A.conductor, B.conductor)
    if n == 1:
        sp = _sympy()
        pa = _to_sympy(A)
        pb = _to_sympy(B)
        g = sp.gcd(pa, pb)
        return _normalize_lead(_from_sympy(g.as_expr(), list(range(A.arity)), 1))
    return _normalize_lead(_gcd_prs(A, B))


def _normalize_lead(L: LaurentPoly) -> LaurentPoly:
    if L.is_zero():
        return L
    lead = max(L.terms)
    return L.scale(L.terms[lead].inverse()).strip_monomial()


def _gcd_univariate_field(A: LaurentPoly, B: LaurentPoly) -> LaurentPoly:
    """Euclidean gcd of univariate polynomials over the cyclotomic field."""
    fa, fb = A.as_cpoly(), B.as_cpoly()
    while not fb.is_zero():
        fa, fb = fb, _cpoly_rem(fa, fb)
    return LaurentPoly.from_cpoly(fa)


def _cpoly_rem(f: CPoly, g: CPoly) -> CPoly:
    rem = list(f.coeffs)
    lc = g.coeffs[-1].inverse()
    db = g.degree
    while rem and len(rem) - 1 >= db:
        c = rem[-1] * lc
        for j, bc in enumerate(g.coeffs):
            idx = len(rem) - 1 - db + j
            rem[idx] = rem[idx] - c * bc
        rem.pop()
        while rem and rem[-1].is_zero():
            rem.pop()
    return CPoly(rem)


def _gcd_prs(A: LaurentPoly, B: LaurentPoly) -> LaurentPoly:
    """Primitive PRS gcd over the fraction field, recursing on arity."""
    if A.is_constant() or B.is_constant():
        return LaurentPoly.constant(A.arity, 1)
    # choose a variable both depend on; if none, gcd of contents only
    var = None
    for i in range(A.arity):
        if A.degree_in(i) - A.min_degree_in(i) > 0 and \
           B.degree_in(i) - B.min_degree_in(i) > 0:
            var = i
            break
    if var is None:
        return LaurentPoly.constant(A.arity, 1)
    ca = content_in_var(A, var)
    cb = content_in_var(B, var)
    pa = laurent_divexact(A, _embed_content(ca, A.arity, var))
    pb = laurent_divexact(B, _embed_content(cb, B.arity, var))
    cg = multivariate_gcd(ca, cb) if ca.arity == cb.arity else None
    # pseudo-remainder loop on primitive parts
    f, g = pa, pb
    if f.degree_in(var) < g.degree_in(var):
        f, g = g, f
    while True:
        r = _pseudo_rem(f, g, var)
        if r.is_zero():
            break
        cr = content_in_var(r, var)
        r = laurent_divexact(r, _embed_content(cr, r.arity, var))
        f, g = g, r
        if g.degree_in(var) - g.min_degree_in(var) == 0:
            g = LaurentPoly.constant(A.arity, 1)
            break
    out = g
    if cg is not None and not cg.is_constant():
        out = out * _embed_content(cg, A.arity, var)
    return out


def _embed_content(c: LaurentPoly, arity: int, var: int) -> LaurentPoly:
    """Reinsert an arity-1-smaller content polynomial at the right positions."""
    if c.arity == arity:
        return c
    out = {}
    for e, v in c.terms.items():
        e2 = list(e[:var]) + [0] + list(e[var:])
        out[tuple(e2)] = v
    return LaurentPoly(arity, out, c.conductor)


def _pseudo_rem(A: LaurentPoly, B: LaurentPoly, var: int) -> LaurentPoly:
    """Pseudo remainder of A by B with respect to var (both stripped)."""
    A = A.strip_monomial()
    B = B.strip_monomial()
    db = B.degree_in(var)
    lead_b = _coefficient_of(B, var, db)
    rem = A
    while not rem.is_zero():
        dr = rem.degree_in(var)
        if dr < db:
            break
        lead_r = _coefficient_of(rem, var, dr)
        shift = [0] * A.arity
        shift[var] = dr - db
        rem = rem * _embed_content(lead_b, A.arity, var) - \
            B.mul_monomial(shift) * _embed_content(lead_r, A.arity, var)
    return rem


def _coefficient_of(L: LaurentPoly, var: int, deg: int) -> LaurentPoly:
    out = {}
    for e, c in L.terms.items():
        if e[var] == deg:
            out[tuple(x for i, x in enumerate(e) if i != var)] = c
    return LaurentPoly(max(1, L.arity - 1), out, L.conductor)


def content_in_var(L: LaurentPoly, var: int) -> LaurentPoly:
    """gcd of the coefficients of L viewed as a polynomial in ``var``.

    The result is a polynomial in the other variables (arity one less, or a
    constant for univariate input), normalized with leading coefficient 1.
    """
    if L.is_zero():
        raise EmptySupport("content of zero polynomial")
    if L.arity == 1:
        return LaurentPoly.constant(1, 1)
    L = L.strip_monomial()
    coeffs: dict[int, dict] = {}
    for e, c in L.terms.items():
        rest = tuple(x for i, x in enumerate(e) if i != var)
        coeffs.setdefault(e[var], {})[rest] = c
    arity = max(1, L.arity - 1)
    polys = [LaurentPoly(arity, d, L.conductor) for d in coeffs.values()]
    g = polys[0]
    for p in polys[1:]:
        if g.is_constant():
            break
        g = multivariate_gcd(g, p)
    return _normalize_lead(g) if not g.is_constant() else LaurentPoly.constant(arity, 1)


def primitive_part(L: LaurentPoly, var: int) -> LaurentPoly:
    c = content_in_var(L, var)
    if c.is_constant():
        return L.strip_monomial()
    return laurent_divexact(L.strip_monomial(), _embed_content(c, L.arity, var))


def factor_rational(L: LaurentPoly) -> list[tuple[LaurentPoly, int]]:
    """Irreducible factors over Q (conductor-1 inputs), monomials dropped.

    For conductor > 1 the polynomial is returned unfactored; the torsion
    pipeline then relies on content extraction and shared-factor splitting.
    """
    L = L.strip_monomial().demote_rational()
    if L.conductor != 1:
        return [(L, 1)]
    sp = _sympy()
    p = _to_sympy(L)
    _c, factors = sp.factor_list(p)
    out = []
    for f, mult in factors:
        lp = _from_sympy(f.as_expr(), list(range(L.arity)), 1)
        if lp.is_constant() or lp.is_monomial():
            continue
        out.append((lp.strip_monomial(), int(mult)))
    if not out and not L.is_constant():
        out = [(L, 1)]
    return out


# ---------------------------------------------------------------------------
# text format


_TOKEN = re.compile(r"\s*(z\d+|[a-z]|\d+|\^|\*|\(|\)|\+|-|/)")


class ParseError(ValueError):
    pass


class _Parser:
    def __init__(self, text: str, var_names):
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                if text[pos:].strip() == "":
                    break
                raise ParseError(f"bad token at: {text[pos:pos+20]!r}")
            self.tokens.append(m.group(1))
            pos = m.end()
        self.i = 0
        self.vars = {v: i for i, v in enumerate(var_names)}
        self.arity = len(var_names)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> LaurentPoly:
        p = self.expr()
        if self.peek() is not None:
            raise ParseError(f"trailing input at token {self.peek()!r}")
        return p

    def expr(self) -> LaurentPoly:
        sign = 1
        while self.peek() in ("+", "-"):
            if self.next() == "-":
                sign = -sign
        acc = self.term().scale(sign)
        while self.peek() in ("+", "-"):
            sign = 1
            while self.peek() in ("+", "-"):
                if self.next() == "-":
                    sign = -sign
            acc = acc + self.term().scale(sign)
        return acc

    def term(self) -> LaurentPoly:
        acc = self.factor()
        while self.peek() == "*" or self.peek() in self.vars or \
                (self.peek() or "").startswith("z") or \
                (self.peek() or "").isdigit() or self.peek() == "(":
            if self.peek() == "*":
                self.next()
            acc = acc * self.factor()
        return acc

    def factor(self) -> LaurentPoly:
        base = self.base()
        while self.peek() == "^":
            self.next()
            sign = 1
            if self.peek() == "-":
                self.next()
                sign = -1
            tok = self.next()
            if not tok or not tok.isdigit():
                raise ParseError("exponent must be an integer")
            k = sign * int(tok)
            base = _laurent_pow(base, k)
        return base

    def base(self) -> LaurentPoly:
        tok = self.next()
        if tok is None:
            raise ParseError("unexpected end of input")
        if tok == "(":
            p = self.expr()
            if self.next() != ")":
                raise ParseError("missing )")
            return p
        if tok.isdigit():
            num = int(tok)
            if self.peek() == "/":
                self.next()
                den = self.next()
                if not den or not den.isdigit():
                    raise ParseError("bad rational")
                return LaurentPoly.constant(self.arity, Fraction(num, int(den)))
            return LaurentPoly.constant(self.arity, num)
        if tok.startswith("z") and len(tok) > 1 and tok[1:].isdigit():
            n = int(tok[1:])
            return LaurentPoly.constant(self.arity, CycloNum.zeta(n))
        if tok in self.vars:
            return LaurentPoly.variable(self.arity, self.vars[tok])
        raise ParseError(f"unexpected token {tok!r}")


def _laurent_pow(L: LaurentPoly, k: int) -> LaurentPoly:
    if k < 0:
        if not L.is_monomial():
            raise ParseError("negative power of a non-monomial")
        e, c = next(iter(L.terms.items()))
        return LaurentPoly(L.arity, {tuple(k * x for x in e): c ** k})
    out = LaurentPoly.constant(L.arity, 1)
    for _ in range(k):
        out = out * L
    return out


def parse_poly(text: str, var_names=("x", "y")) -> LaurentPoly:
    """Parse the manifest text format, e.g. ``(y+1)*(x^3*y^4 - 2*x*y + z5^2)``."""
    return _Parser(text, var_names).parse()


def _format_rational(r: Fraction) -> str:
    return str(r.numerator) if r.denominator == 1 else \
        f"{r.numerator}/{r.denominator}"


def format_coeff(c: CycloNum) -> str:
    if c.is_rational():
        return _format_rational(c.as_rational())
    parts = []
    for i, q in enumerate(c.c):
        if q == 0:
            continue
        if i == 0:
            s = _format_rational(abs(q))
        else:
            mono = f"z{c.n}" + (f"^{i}" if i > 1 else "")
            s = mono if abs(q) == 1 else f"{_format_rational(abs(q))}*{mono}"
        sign = "-" if q < 0 else ("+" if parts else "")
        parts.append(sign + s)
    body = "".join(parts)
    return f"({body})" if len(parts) > 1 or body.startswith("-") else body


def format_poly(L: LaurentPoly, var_names=DEFAULT_VARS) -> str:
    if L.is_zero():
        return "0"
    items = sorted(L.terms.items(), key=lambda kv: kv[0], reverse=True)
    parts = []
    for e, c in items:
        monos = []
        for i, ei in enumerate(e):
            if ei:
                monos.append(f"{var_names[i]}" + (f"^{ei}" if ei != 1 else ""))
        cs = format_coeff(c)
        if monos and cs in ("1", "-1"):
            parts.append(("-" if cs == "-1" else "") + "*".join(monos))
        elif monos:
            parts.append("*".join([cs] + monos))
        else:
            parts.append(cs)
    out = parts[0]
    for p in parts[1:]:
        if p.startswith("-") and not p.startswith("-("):
            out += " - " + p[1:]
        else:
            out += " + " + p
    return out


def poly_equal_up_to_unit(A: LaurentPoly, B: LaurentPoly) -> bool:
    """Equality up to a nonzero constant of the field and a monomial factor."""
    A = A.strip_monomial()
    B = B.strip_monomial()
    if A.is_zero() or B.is_zero():
        return A.is_zero() and B.is_zero()
    if A.arity != B.arity or set(A.terms) != set(B.terms):
        return False
    e0 = next(iter(A.terms))
    ratio = B.terms[e0] / A.terms[e0]
    return all(B.terms[e] == A.terms[e] * ratio for e in A.terms)
