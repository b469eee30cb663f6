"""Roots-of-unity solutions of Laurent polynomial systems in 1-3 variables.

The univariate layer detects cyclotomic factors of rational polynomials by
trial division (optionally preceded by gcd-based shrinking for large inputs).
The bivariate layer runs the seven-resultant sweep against the sign and
square transforms of a full polynomial; the trivariate layer runs the
fifteen-resultant sweep and reduces to the bivariate one.  One-parameter
solution families are carried as monomial relations on the variable turns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import _intmat
from .cyclofield import (CPoly, CycloNum, QPoly, RationalTurn, cyclotomic_poly,
                         euler_phi, norm_to_rationals, orders_with_phi_at_most)
from .laurent import (LaurentPoly, content_in_var, factor_rational,
                      laurent_divexact, make_full, multivariate_gcd,
                      resultant_eliminate, squarefree_part)


class EverythingVanishes(ValueError):
    """The zero polynomial vanishes on the whole torus."""


class DegenerateResultantChain(RuntimeError):
    """Every elimination choice produced an identically zero resultant."""


# ---------------------------------------------------------------------------
# univariate cyclotomic factor detection


TRIAL_DIVISION_LIMIT = 64  # above this degree the gcd prefilter kicks in


def _qp_to_sympy(f: QPoly):
    import sympy
    x = sympy.Symbol("x")
    return sympy.Poly([sympy.Rational(c.numerator, c.denominator)
                       for c in reversed(f.coeffs)] or [0], x, domain=sympy.QQ)


def _qp_from_sympy(p) -> QPoly:
    return QPoly([Fraction(int(c.p), int(c.q))
                  for c in reversed(p.all_coeffs())])


def _gcd_big(f: QPoly, g: QPoly) -> QPoly:
    pf, pg = _qp_to_sympy(f), _qp_to_sympy(g)
    return _qp_from_sympy(pf.gcd(pg).monic())


def _strip_x_power(f: QPoly) -> QPoly:
    cs = list(f.coeffs)
    i = 0
    while i < len(cs) and cs[i] == 0:
        i += 1
    return QPoly(cs[i:])


def _cyclotomic_prefilter(f: QPoly) -> QPoly:
    """A monic divisor of f that keeps every cyclotomic factor of f.

    Combines the palindromic gcd with the conjugacy gcds against f(-x),
    f(x^2) and f(-x^2); both filters provably retain all cyclotomic factors.
    """
    g = f.monic()
    while True:
        d = g.degree
        if d <= TRIAL_DIVISION_LIMIT:
            return g
        # palindromic part: cyclotomics are self-reciprocal up to sign
        rev = QPoly(list(reversed(g.coeffs)))
        g = _gcd_big(g, rev)
        if g.degree <= TRIAL_DIVISION_LIMIT:
            return g
        h1 = _gcd_big(g, g.compose_scale(-1))
        h2 = _gcd_big(g, g.compose_square())
        h3 = _gcd_big(g, g.compose_scale(-1).compose_square())
        g2 = _gcd_big(g, h1 * h2 * h3)
        if g2.degree == d:
            return g2
        g = g2


def _divides_big(phi: QPoly, f: QPoly) -> bool:
    if f.degree < phi.degree:
        return False
    if f.degree <= 80:
        return (f % phi).is_zero()
    import sympy
    pf, pp = _qp_to_sympy(f), _qp_to_sympy(phi)
    return sympy.rem(pf, pp).is_zero


def _candidate_orders_numeric(f: QPoly, orders) -> list[int]:
    """Cheap complex-evaluation prefilter before exact trial division."""
    import cmath
    norm1 = sum(abs(float(c)) for c in f.coeffs) or 1.0
    out = []
    for n in orders:
        z = cmath.exp(2j * cmath.pi / n)
        acc = 0j
        for c in reversed(f.coeffs):
            acc = acc * z + float(c)
        if abs(acc) <= norm1 * 1e-6:
            out.append(n)
    return out


def cyclotomic_roots_univariate(f: QPoly, use_gcd_filter: bool | None = None) -> set[int]:
    """The exact set {n : Phi_n divides f}, for a nonzero rational polynomial.

    Complete because rational coefficients force full Galois orbits: trial
    division over all n with phi(n) <= deg f decides membership.  For large
    degrees a gcd prefilter (palindromic part plus the conjugacy gcds) shrinks
    the polynomial first; it provably keeps every cyclotomic factor.
    """
    if f.is_zero():
        raise ValueError("zero polynomial")
    g = _strip_x_power(f)
    if g.degree == 0:
        return set()
    g = squarefree_part(g)
    if use_gcd_filter is None:
        use_gcd_filter = g.degree > TRIAL_DIVISION_LIMIT
    if use_gcd_filter:
        g = _cyclotomic_prefilter(g)
        # descend through even polynomials g(x) = h(x^2) to shrink further
        extra_doublings = 0
        while g.degree > TRIAL_DIVISION_LIMIT and \
                all(c == 0 for c in g.coeffs[1::2]):
            g = QPoly(g.coeffs[0::2])
            extra_doublings += 1
        if extra_doublings:
            sub = cyclotomic_roots_univariate(g)
            cands = set()
            for m in sub:
                cands.add(m)
                for _ in range(extra_doublings):
                    cands = cands | {2 * c for c in cands}
            out = {n for n in sorted(cands) if _divides_big(cyclotomic_poly(n), f)}
            return out
    if g.degree == 0:
        return set()
    orders = orders_with_phi_at_most(g.degree)
    cand = _candidate_orders_numeric(g, orders)
    return {n for n in cand if euler_phi(n) <= g.degree and
            _divides_big(cyclotomic_poly(n), g)}


def cyclotomic_roots_of_laurent1(L: LaurentPoly) -> list[RationalTurn]:
    """All roots of unity of a nonzero arity-1 Laurent polynomial."""
    if L.is_zero():
        raise EverythingVanishes("zero polynomial")
    L = L.strip_monomial()
    if L.is_constant():
        return []
    return cyclotomic_roots_over_cyclofield(L.as_cpoly())


def cyclotomic_roots_over_cyclofield(f: CPoly) -> list[RationalTurn]:
    """Cyclotomic roots of a univariate polynomial over Q(zeta_n).

    Norm descent to a rational polynomial, order detection there, then an
    exact evaluation filter of every primitive candidate against f itself.
    """
    if f.is_zero():
        raise ValueError("zero polynomial")
    if f.degree == 0:
        return []
    if f.n == 1:
        orders = cyclotomic_roots_univariate(f.to_qpoly())
        return sorted(RationalTurn(p, n) for n in orders
                      for p in range(n) if math.gcd(p, n) == 1)
    F = norm_to_rationals(f)
    out = []
    for n in sorted(cyclotomic_roots_univariate(F)):
        for p in range(n):
            if math.gcd(p, n) == 1:
                t = RationalTurn(p, n)
                if f.eval_turn(t).is_zero():
                    out.append(t)
    return sorted(out)


# ---------------------------------------------------------------------------
# solution sets


@dataclass(frozen=True)
class Family:
    """A positive-dimensional solution component given by monomial relations.

    Each relation (coeffs, rhs) constrains the variable turns t by
    sum_i coeffs[i] * t_i = rhs (mod 1).  The free dimension is
    arity - len(relations) (relations are independent by construction).
    """

    arity: int
    relations: tuple  # tuple of (tuple[int, ...], Fraction)

    @property
    def free_dims(self) -> int:
        return self.arity - len(self.relations)

    def canonical(self) -> "Family":
        rows = [list(c) + [r] for c, r in self.relations]
        # HNF on the coefficient part, carrying the rhs along
        rows = sorted(rows)
        basis = _hnf_with_rhs(rows, self.arity)
        rels = tuple(sorted((tuple(r[:-1]), Fraction(r[-1]) % 1) for r in basis))
        return Family(self.arity, rels)

    def components(self):
        """Particular turn solutions plus primitive kernel directions."""
        M = [list(c) for c, _ in self.relations]
        rhs = [r for _, r in self.relations]
        sols, kernel = _intmat.solve_integer_congruence(M, rhs)
        prim = []
        for k in kernel:
            den = 1
            for v in k:
                den = den * v.denominator // math.gcd(den, v.denominator)
            ints = [int(v * den) for v in k]
            g = 0
            for v in ints:
                g = math.gcd(g, v)
            prim.append([v // (g or 1) for v in ints])
        return sols, prim

    def sample_points(self, count: int, max_order: int = 120, seed: int = 0):
        """Some torsion points on the family, for verification."""
        import random
        rng = random.Random(seed)
        sols, kernel = self.components()
        out = []
        for _ in range(count):
            base = rng.choice(sols)
            pt = list(base)
            for k in kernel:
                q = rng.randint(1, max_order)
                s = Fraction(rng.randint(0, q - 1), q)
                pt = [(a + s * b) % 1 for a, b in zip(pt, k)]
            out.append(tuple(RationalTurn.from_fraction(v) for v in pt))
        return out

    def contains(self, point) -> bool:
        for coeffs, rhs in self.relations:
            acc = sum(c * t.as_fraction() for c, t in zip(coeffs, point))
            if (acc - rhs) % 1 != 0:
                return False
        return True


def _hnf_with_rhs(rows, ncols):
    """Integer row reduction of relation rows, rational rhs carried along."""
    work = [[int(x) for x in r[:-1]] + [Fraction(r[-1])]
            for r in rows if any(r[:-1])]
    basis = []
    col = 0
    while col < ncols and work:
        while True:
            nz = [r for r in work if r[col] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda r: abs(r[col]))
            pv = nz[0]
            for r in nz[1:]:
                q = r[col] // pv[col]
                for j in range(ncols + 1):
                    r[j] -= q * pv[j]
            work = [r for r in work if any(x != 0 for x in r[:-1])]
        nz = [r for r in work if r[col] != 0]
        if nz:
            pv = nz[0]
            if pv[col] < 0:
                for j in range(ncols + 1):
                    pv[j] = -pv[j]
            basis.append(pv)
            work = [r for r in work if r is not pv and any(x != 0 for x in r[:-1])]
        col += 1
    return [r[:-1] + [Fraction(r[-1]) % 1] for r in basis]


@dataclass
class TorsionSolutionSet:
    """Isolated cyclotomic points and one-parameter (or wider) families."""

    arity: int
    points: list = field(default_factory=list)
    families: list = field(default_factory=list)

    def add_point(self, pt):
        pt = tuple(pt)
        if pt not in self.points:
            self.points.append(pt)

    def add_family(self, fam: Family):
        fam = fam.canonical()
        if fam not in self.families:
            self.families.append(fam)

    def merge(self, other: "TorsionSolutionSet"):
        for p in other.points:
            self.add_point(p)
        for f in other.families:
            self.add_family(f)

    def prune_points_on_families(self):
        self.points = [p for p in self.points
                       if not any(f.contains(p) for f in self.families)]

    def sorted(self) -> "TorsionSolutionSet":
        pts = sorted(self.points,
                     key=lambda p: tuple((t.q, t.p) for t in p))
        fams = sorted(self.families,
                      key=lambda f: tuple((r, str(v)) for r, v in f.relations))
        return TorsionSolutionSet(self.arity, pts, fams)

    def is_empty(self) -> bool:
        return not self.points and not self.families


# ---------------------------------------------------------------------------
# coset restriction machinery


def restrict_to_coset(L: LaurentPoly, t0, kernel) -> LaurentPoly:
    """Restrict L to the coset t = t0 + span(kernel directions) of the torus.

    t0 is a list of Fractions (turns), kernel a list of primitive integer
    vectors; the result is a Laurent polynomial in len(kernel) parameters
    (at least 1; a zero-dimensional restriction is rejected).
    """
    m = len(kernel)
    if m == 0:
        raise ValueError("zero-dimensional coset; evaluate instead")
    out: dict[tuple, CycloNum] = {}
    n = L.conductor
    for e, c in L.terms.items():
        shift = sum(Fraction(t) * ei for t, ei in zip(t0, e)) % 1
        tn = RationalTurn.from_fraction(shift)
        n = n * tn.q // math.gcd(n, tn.q)
    for e, c in L.terms.items():
        shift = sum(Fraction(t) * ei for t, ei in zip(t0, e)) % 1
        w = CycloNum.from_turn(RationalTurn.from_fraction(shift), n)
        key = tuple(sum(k[i] * e[i] for i in range(L.arity)) for k in kernel)
        v = c.embed(n) * w
        if key in out:
            out[key] = out[key] + v
        else:
            out[key] = v
    return LaurentPoly(m, out, n)


def _lift_coset_point(t0, kernel, svals):
    vals = list(t0)
    for k, s in zip(kernel, svals):
        vals = [(v + s.as_fraction() * ki) % 1 for v, ki in zip(vals, k)]
    return tuple(RationalTurn.from_fraction(v) for v in vals)


def _pullback_relation(coeffs_s, rhs, t0, kernel, arity):
    """Rewrite a relation on coset parameters as a relation on the torus."""
    # choose u with u . kernel[j] = delta_j via the pseudo-inverse over Z
    # (kernel vectors are primitive and independent)
    rels = []
    m = len(kernel)
    # find integer matrix U (m x arity) with U @ kernel^T = I_m
    K = [[kernel[j][i] for j in range(m)] for i in range(arity)]  # arity x m
    U = _left_inverse_int(K)
    # s_j = U_j . (t - t0) (mod 1)
    combo = [0] * arity
    const = Fraction(rhs)
    for j in range(m):
        if coeffs_s[j]:
            for i in range(arity):
                combo[i] += coeffs_s[j] * U[j][i]
            const += coeffs_s[j] * sum(Fraction(U[j][i]) * Fraction(t0[i])
                                       for i in range(arity))
    return tuple(combo), const % 1


def _left_inverse_int(K):
    """U with U @ K = I for an integer matrix K (arity x m, full column rank).

    Exists when the columns of K span a direct summand of Z^arity (primitive
    kernel vectors from the congruence solver satisfy this).
    """
    arity = len(K)
    m = len(K[0])
    Uu, D, V = _intmat.snf(K)
    # K = Uu^-1 D V^-1 ; want U K = I: U = V * D^+ * Uu (D^+ left inverse)
    for i in range(m):
        if abs(D[i][i]) != 1:
            raise ValueError("kernel direction not unimodularly complementable")
    Dp = [[0] * arity for _ in range(m)]
    for i in range(m):
        Dp[i][i] = 1 if D[i][i] == 1 else -1
    return _intmat.mat_mul(_intmat.mat_mul(V, Dp), Uu)


# ---------------------------------------------------------------------------
# the bivariate and trivariate sweeps


SIGN_PAIRS_2 = ((-1, 1), (1, -1), (-1, -1))
SQUARE_PAIRS_2 = ((1, 1), (-1, 1), (1, -1), (-1, -1))


def torsion_points_2var(L: LaurentPoly, eliminate: int | None = None) -> TorsionSolutionSet:
    """All cyclotomic points and one-parameter families of a bivariate L."""
    if L.arity != 2:
        raise ValueError("arity-2 polynomial required")
    if L.is_zero():
        raise EverythingVanishes("zero polynomial vanishes identically")
    sols = TorsionSolutionSet(2)
    L = L.strip_monomial()
    if L.is_constant():
        return sols
    for g, _mult in factor_rational(L):
        sols.merge(_solve_factor(g, eliminate))
    sols.prune_points_on_families()
    return sols.sorted()


def torsion_points_3var(L: LaurentPoly, eliminate: int | None = None) -> TorsionSolutionSet:
    """All cyclotomic points and families of a trivariate L."""
    if L.arity != 3:
        raise ValueError("arity-3 polynomial required")
    if L.is_zero():
        raise EverythingVanishes("zero polynomial vanishes identically")
    sols = TorsionSolutionSet(3)
    L = L.strip_monomial()
    if L.is_constant():
        return sols
    for g, _mult in factor_rational(L):
        sols.merge(_solve_factor(g, eliminate))
    sols.prune_points_on_families()
    return sols.sorted()


def _solve_factor(g: LaurentPoly, eliminate: int | None = None,
                  depth: int = 0) -> TorsionSolutionSet:
    """Torsion solutions of one (not necessarily irreducible) factor."""
    if depth > 12:
        raise DegenerateResultantChain("factor recursion too deep")
    sols = TorsionSolutionSet(g.arity)
    g = g.strip_monomial()
    if g.is_constant():
        return sols

    # per-variable content: factors independent of one variable
    for var in range(g.arity):
        if g.is_constant():
            return sols
        c = content_in_var(g, var)
        if not c.is_constant():
            from .laurent import _embed_content
            sub = _solve_lower(c, var, g.arity, eliminate, depth)
            sols.merge(sub)
            g = laurent_divexact(g, _embed_content(c, g.arity, var))
            g = g.strip_monomial()
    if g.is_constant():
        return sols

    lat = g.exponent_lattice()
    if lat.rank == 0:
        return sols
    if lat.rank < g.arity:
        sols.merge(_solve_rank_deficient(g, lat, depth))
        return sols

    full, mmap = make_full(g)
    if mmap.matrix == tuple(tuple(1 if i == j else 0 for j in range(g.arity))
                            for i in range(g.arity)):
        sols.merge(_bs_core(full, eliminate, depth))
        return sols
    inner = _bs_core(full, eliminate, depth)
    for pt in inner.points:
        for lifted in mmap.lift_turns(pt):
            sols.add_point(lifted)
    for fam in inner.families:
        rels = []
        for coeffs, rhs in fam.relations:
            rels.append(mmap.push_relation(coeffs, rhs))
        sols.add_family(Family(g.arity, tuple(
            (tuple(c), Fraction(r) % 1) for c, r in rels)))
    return sols


def _solve_lower(c: LaurentPoly, var: int, arity: int,
                 eliminate, depth) -> TorsionSolutionSet:
    """Solutions contributed by a content factor independent of ``var``."""
    sols = TorsionSolutionSet(arity)
    if c.arity == 1 and arity == 2:
        for t in cyclotomic_roots_of_laurent1(c):
            e = [0, 0]
            e[1 - var] = 1
            sols.add_family(Family(2, (((tuple(e)), t.as_fraction()),)))
    elif c.arity == 2 and arity == 3:
        others = [i for i in range(3) if i != var]
        inner = _solve_factor(c, None, depth + 1)
        for pt in inner.points:
            rels = []
            for pos, t in zip(others, pt):
                e = [0, 0, 0]
                e[pos] = 1
                rels.append((tuple(e), t.as_fraction()))
            sols.add_family(Family(3, tuple(rels)))
        for fam in inner.families:
            rels = []
            for coeffs, rhs in fam.relations:
                e = [0, 0, 0]
                for pos, cf in zip(others, coeffs):
                    e[pos] = cf
                rels.append((tuple(e), rhs))
            sols.add_family(Family(3, tuple(rels)))
    else:
        raise ValueError("unexpected content arity")
    return sols


def _solve_rank_deficient(g: LaurentPoly, lat, depth) -> TorsionSolutionSet:
    """Project onto the exponent lattice and lift the lower-arity solutions."""
    k = g.arity
    r = lat.rank
    B = [[lat.generators[j][i] for j in range(r)] for i in range(k)]  # k x r
    Binv_rows = _pseudo_solve_matrix(B)
    base = next(iter(g.terms))
    out: dict[tuple, CycloNum] = {}
    for e, c in g.terms.items():
        d = [a - b for a, b in zip(e, base)]
        coords = _intmat.mat_vec(Binv_rows, d)
        key = tuple(int(x) for x in coords)
        out[key] = c
    h = LaurentPoly(r, out, g.conductor).strip_monomial()
    sols = TorsionSolutionSet(k)
    if r == 1:
        roots = cyclotomic_roots_of_laurent1(h)
        for t in roots:
            coeffs = tuple(B[i][0] for i in range(k))
            sols.add_family(Family(k, ((coeffs, t.as_fraction()),)))
        return sols
    inner = _solve_factor(h, None, depth + 1)
    # turns satisfy B^T t_x = t_u; each inner point gives r relations
    for pt in inner.points:
        rels = []
        for j in range(r):
            coeffs = tuple(B[i][j] for i in range(k))
            rels.append((coeffs, pt[j].as_fraction()))
        sols.add_family(Family(k, tuple(rels)))
    for fam in inner.families:
        rels = []
        for coeffs, rhs in fam.relations:
            pushed = tuple(sum(B[i][j] * coeffs[j] for j in range(r))
                           for i in range(k))
            rels.append((pushed, rhs))
        sols.add_family(Family(k, tuple(rels)))
    return sols


def _pseudo_solve_matrix(B):
    """Rows U with U @ d = coordinates for d in the column lattice of B."""
    k = len(B)
    r = len(B[0])
    # solve via rational least-squares-free approach: pick r independent rows
    import itertools
    for rows in itertools.combinations(range(k), r):
        sub = [[B[i][j] for j in range(r)] for i in rows]
        if _intmat.det(sub) != 0:
            inv = _intmat.mat_inverse_rational(sub)
            U = [[Fraction(0)] * k for _ in range(r)]
            for a in range(r):
                for pos, i in enumerate(rows):
                    U[a][i] = inv[a][pos]
            return U
    raise ValueError("lattice basis not full rank")


def _bs_core(g: LaurentPoly, eliminate, depth) -> TorsionSolutionSet:
    """Seven/fifteen-resultant sweep for a full polynomial."""
    if g.arity == 2:
        return _bs_core_2(g, eliminate, depth)
    return _bs_core_3(g, eliminate, depth)


def conj_poly(L: LaurentPoly, k: int) -> LaurentPoly:
    """Apply the Galois automorphism zeta -> zeta^k to the coefficients."""
    if L.conductor == 1:
        return L
    return LaurentPoly(L.arity, {e: c.conjugate_map(k)
                                 for e, c in L.terms.items()}, L.conductor)


def norm_laurent(L: LaurentPoly) -> LaurentPoly:
    """Product of L over all coefficient conjugates; rational coefficients."""
    N = LaurentPoly.constant(L.arity, 1)
    for k in range(1, L.conductor + 1):
        if math.gcd(k, L.conductor) == 1:
            N = N * conj_poly(L, k)
    return N.demote_rational()


def _conjugation_classes(n: int) -> list[int]:
    return [k for k in range(1, n + 1) if math.gcd(k, n) == 1]


def _filter_family(g: LaurentPoly, fam: Family, depth) -> TorsionSolutionSet:
    """Intersect a candidate family with the zero set of g."""
    sols = TorsionSolutionSet(g.arity)
    parts, kernel = fam.components()
    for t0 in parts:
        if not kernel:
            pt = tuple(RationalTurn.from_fraction(v) for v in t0)
            if g.eval_turn(pt).is_zero():
                sols.add_point(pt)
            continue
        restricted = restrict_to_coset(g, t0, kernel)
        if restricted.is_zero():
            sols.add_family(Family(g.arity, _coset_relations(t0, kernel, g.arity)))
            continue
        if len(kernel) == 1:
            restricted = restricted.strip_monomial()
            if restricted.is_constant():
                continue
            for s in cyclotomic_roots_of_laurent1(restricted):
                sols.add_point(_lift_coset_point(t0, kernel, [s]))
        else:
            inner = _solve_factor(restricted, None, depth + 1)
            for spt in inner.points:
                sols.add_point(_lift_coset_point(t0, kernel, list(spt)))
            for sfam in inner.families:
                rels = list(_coset_relations(t0, kernel, g.arity))
                for coeffs, rhs in sfam.relations:
                    rels.append(_pullback_relation(coeffs, rhs, t0, kernel,
                                                   g.arity))
                sols.add_family(Family(g.arity, tuple(rels)))
    return sols


def _coset_relations(t0, kernel, arity):
    """Relations cutting out the coset t0 + span(kernel)."""
    m = len(kernel)
    K = [[kernel[j][i] for j in range(m)] for i in range(arity)]  # arity x m
    # normal directions: integer vectors a with a . k = 0 for all k
    normals = []
    U, D, V = _intmat.snf(K)
    # rows of U beyond rank(D) annihilate the column space
    r = 0
    while r < min(len(D), len(D[0])) and D[r][r] != 0:
        r += 1
    for i in range(r, arity):
        a = [U[i][j] for j in range(arity)]
        rhs = sum(Fraction(a[j]) * Fraction(t0[j]) for j in range(arity)) % 1
        normals.append((tuple(a), rhs))
    return tuple(normals)


def _choose_elim(g: LaurentPoly, eliminate):
    if eliminate is not None:
        return eliminate
    degs = [(g.degree_in(i) - g.min_degree_in(i), i) for i in range(g.arity)]
    degs = [(d if d > 0 else 10 ** 9, i) for d, i in degs]
    return min(degs)[1]


def _transforms(arity: int):
    import itertools
    out = []
    for s in itertools.product((1, -1), repeat=arity):
        if s != (1,) * arity:
            out.append(("sign", s))
    for s in itertools.product((1, -1), repeat=arity):
        out.append(("square", s))
    return out


def _bs_core_2(g: LaurentPoly, eliminate, depth) -> TorsionSolutionSet:
    elim = _choose_elim(g, eliminate)
    keep = 1 - elim
    sols = TorsionSolutionSet(2)
    orders: set[int] = set()
    for kind, s in _transforms(2):
        base = g.substitute_signs(s) if kind == "sign" else g.substitute_squares(s)
        for m in _conjugation_classes(g.conductor):
            tg = conj_poly(base, m)
            R = resultant_eliminate(g, tg, elim)
            if R.is_zero():
                split = _shared_factor_split(g, tg, elim, depth)
                if split is not None:
                    return split
                if eliminate is None:
                    return _bs_core_2(g, keep, depth)
                raise DegenerateResultantChain(
                    "identically zero resultant without factor progress")
            R = R.strip_monomial()
            if R.is_constant():
                continue
            orders |= _orders_of_univariate(R)
    for n in sorted(orders):
        for p in range(n):
            if math.gcd(p, n) != 1:
                continue
            w = RationalTurn(p, n)
            gsub = g.subs_variable_turn(keep, w)
            if gsub.is_zero():
                e = [0, 0]
                e[keep] = 1
                sols.add_family(Family(2, ((tuple(e), w.as_fraction()),)))
                continue
            gsub = gsub.strip_monomial()
            if gsub.is_constant():
                continue
            for t in cyclotomic_roots_over_cyclofield(gsub.as_cpoly()):
                pt = [None, None]
                pt[elim], pt[keep] = t, w
                pt = tuple(pt)
                assert g.eval_turn(pt).is_zero(), pt
                sols.add_point(pt)
    return sols


def _orders_of_univariate(R: LaurentPoly) -> set[int]:
    """Cyclotomic orders of a nonzero arity-1 polynomial (any conductor)."""
    R = R.strip_monomial()
    if R.conductor == 1:
        qs = QPoly([c.as_rational() for c in R.as_cpoly().coeffs])
        return cyclotomic_roots_univariate(qs)
    return {t.q for t in cyclotomic_roots_over_cyclofield(R.as_cpoly())}


def _shared_factor_split(g, tg, elim, depth):
    """Identically-zero resultant: split by the gcd and recurse."""
    h = multivariate_gcd(g, tg)
    if h.is_constant():
        return None
    try:
        cof = laurent_divexact(g, h)
    except Exception:
        return None
    if cof.is_constant() and h == g.strip_monomial():
        return None  # no progress; caller tries other transforms/variables
    sols = _solve_factor(h, None, depth + 1)
    if not cof.is_constant():
        sols.merge(_solve_factor(cof, None, depth + 1))
    return sols


def _bs_core_3(g: LaurentPoly, eliminate, depth) -> TorsionSolutionSet:
    elim = _choose_elim(g, eliminate)
    keep = [i for i in range(3) if i != elim]
    sols = TorsionSolutionSet(3)
    pair_candidates = []
    seen_pairs = set()
    families_to_filter = []
    for kind, s in _transforms(3):
        base = g.substitute_signs(s) if kind == "sign" else g.substitute_squares(s)
        for m in _conjugation_classes(g.conductor):
            tg = conj_poly(base, m)
            R = resultant_eliminate(g, tg, elim)
            if R.is_zero():
                split = _shared_factor_split(g, tg, elim, depth)
                if split is not None:
                    return split
                if eliminate is None:
                    return _bs_core_3(g, keep[0] if elim != keep[0] else keep[1],
                                      depth)
                raise DegenerateResultantChain(
                    "identically zero resultant without factor progress")
            R = R.strip_monomial()
            if R.is_constant():
                continue
            inner = torsion_points_2var(R)
            for pt in inner.points:
                if pt not in seen_pairs:
                    seen_pairs.add(pt)
                    pair_candidates.append(pt)
            for fam in inner.families:
                families_to_filter.append(fam)
    for pt in pair_candidates:
        gsub = g.subs_variable_turn(keep[1], pt[1]).subs_variable_turn(keep[0], pt[0])
        if gsub.is_zero():
            rels = []
            for pos, t in zip(keep, pt):
                e = [0, 0, 0]
                e[pos] = 1
                rels.append((tuple(e), t.as_fraction()))
            sols.add_family(Family(3, tuple(rels)))
            continue
        gsub = gsub.strip_monomial()
        if gsub.is_constant():
            continue
        for t in cyclotomic_roots_over_cyclofield(gsub.as_cpoly()):
            full = [None, None, None]
            full[elim] = t
            full[keep[0]], full[keep[1]] = pt[0], pt[1]
            full = tuple(full)
            assert g.eval_turn(full).is_zero(), full
            sols.add_point(full)
    # candidate families in the kept variables: intersect g with family x free elim
    seen_fams = set()
    for fam in families_to_filter:
        fam3 = Family(3, tuple(
            (_insert_zero(coeffs, elim, keep), rhs)
            for coeffs, rhs in fam.relations))
        fam3 = fam3.canonical()
        if fam3 in seen_fams:
            continue
        seen_fams.add(fam3)
        sols.merge(_filter_family(g, fam3, depth))
    return sols


def _insert_zero(coeffs, elim, keep):
    e = [0, 0, 0]
    for pos, c in zip(keep, coeffs):
        e[pos] = c
    return tuple(e)
