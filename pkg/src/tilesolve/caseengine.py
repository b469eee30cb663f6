"""Drive one classification case end to end.

A case is a set of vertex types over the angle symbols a..e (for the five
pentagon angles).  The angle sums at the vertices, together with the global
angle-sum constraint (sum of the five angles = 3 + F in units of pi, with
F = 4/f), form a linear system solved exactly over Q.  The pivotal
trigonometric identity for the five angles is then expanded into a Laurent
polynomial in one variable per remaining free parameter; its roots-of-unity
solutions are pulled back to (angles, f) candidates and run through the
mechanical admissibility filters.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

from . import _intmat
from .cyclofield import CycloNum, RationalTurn
from .laurent import LaurentPoly, format_poly
from .torsion import (Family, TorsionSolutionSet, torsion_points_2var,
                      torsion_points_3var)

ANGLE_SYMBOLS = ("a", "b", "c", "d", "e")
PARAMS = ("d", "e", "F")  # free parameters: two angles and F = 4/f


class CaseError(ValueError):
    pass


class ParseError(CaseError):
    pass


class NoSolution(CaseError):
    pass


class TooManyFreeParameters(CaseError):
    pass


class SubstitutionError(CaseError):
    pass


# ---------------------------------------------------------------------------
# affine forms over the parameters (d, e, F), units of pi


@dataclass(frozen=True)
class AffineForm:
    """c0 + cd*d + ce*e + cF*F with exact rational coefficients."""

    c0: Fraction = Fraction(0)
    cd: Fraction = Fraction(0)
    ce: Fraction = Fraction(0)
    cF: Fraction = Fraction(0)

    @staticmethod
    def const(v) -> "AffineForm":
        return AffineForm(Fraction(v))

    @staticmethod
    def param(name: str) -> "AffineForm":
        return AffineForm(**{"c" + name if name != "F" else "cF": Fraction(1)})

    def __add__(self, other: "AffineForm") -> "AffineForm":
        return AffineForm(self.c0 + other.c0, self.cd + other.cd,
                          self.ce + other.ce, self.cF + other.cF)

    def __sub__(self, other: "AffineForm") -> "AffineForm":
        return AffineForm(self.c0 - other.c0, self.cd - other.cd,
                          self.ce - other.ce, self.cF - other.cF)

    def scale(self, q) -> "AffineForm":
        q = Fraction(q)
        return AffineForm(self.c0 * q, self.cd * q, self.ce * q, self.cF * q)

    def linear(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.cd, self.ce, self.cF)

    def is_const(self) -> bool:
        return self.cd == 0 and self.ce == 0 and self.cF == 0

    def subs(self, d=None, e=None, F=None) -> "AffineForm":
        out = AffineForm(self.c0)
        for coef, val, name in ((self.cd, d, "d"), (self.ce, e, "e"),
                                (self.cF, F, "F")):
            if coef == 0:
                continue
            if val is None:
                out = out + AffineForm.param(name).scale(coef)
            elif isinstance(val, AffineForm):
                out = out + val.scale(coef)
            else:
                out = out + AffineForm.const(Fraction(val) * coef)
        return out

    def eval(self, d, e, F) -> Fraction:
        return self.c0 + self.cd * Fraction(d) + self.ce * Fraction(e) + \
            self.cF * Fraction(F)

    def __str__(self) -> str:
        parts = []
        for coef, name in ((self.c0, ""), (self.cd, "d"), (self.ce, "e"),
                           (self.cF, "F")):
            if coef == 0:
                continue
            mag = abs(coef)
            if name and mag == 1:
                s = name
            elif name:
                s = f"{mag}*{name}"
            else:
                s = str(mag)
            parts.append(("-" if coef < 0 else "+" if parts else "") + s)
        return "".join(parts) or "0"


_FORM_TOKEN = re.compile(r"\s*(\d+|[deF]|\+|-|\*|/|\(|\))")


def parse_affine_form(text: str) -> AffineForm:
    """Parse forms like ``2*d``, ``d-F/2``, ``2*d/3``, ``e/2+F/4``."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _FORM_TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"bad substitution token near {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()

    i = 0

    def peek():
        return tokens[i] if i < len(tokens) else None

    def term() -> AffineForm:
        nonlocal i
        num = Fraction(1)
        form = None
        expect_factor = True
        while True:
            t = peek()
            if t is None or t in "+-":
                break
            if t == "*":
                i += 1
                continue
            if t == "/":
                i += 1
                den = peek()
                i += 1
                num = num / int(den)
                continue
            if t.isdigit():
                num = num * int(t)
                i += 1
                continue
            if t in "deF":
                if form is not None:
                    raise ParseError("nonlinear substitution form")
                form = AffineForm.param(t)
                i += 1
                continue
            raise ParseError(f"unexpected token {t!r}")
        base = form if form is not None else AffineForm.const(1)
        return base.scale(num)

    acc = AffineForm.const(0)
    while peek() is not None:
        sign = 1
        while peek() in ("+", "-"):
            if tokens[i] == "-":
                sign = -sign
            i += 1
        acc = acc + term().scale(sign)
    return acc


# ---------------------------------------------------------------------------
# vertex types and the linear system


@dataclass(frozen=True)
class VertexType:
    """Multiset of angle symbols at a vertex, e.g. a*d^2."""

    counts: tuple  # (na, nb, nc, nd, ne)

    @property
    def degree(self) -> int:
        return sum(self.counts)

    def parity_ok(self) -> bool:
        return (self.counts[3] + self.counts[4]) % 2 == 0

    def __str__(self) -> str:
        parts = []
        for s, k in zip(ANGLE_SYMBOLS, self.counts):
            if k == 1:
                parts.append(s)
            elif k > 1:
                parts.append(f"{s}^{k}")
        return "*".join(parts)


def parse_vertex(text: str) -> VertexType:
    counts = [0] * 5
    for m in re.finditer(r"([a-e])(?:\s*\^\s*(\d+))?|\S", text.replace("*", " ")):
        if m.group(1) is None:
            raise ParseError(f"unknown symbol in vertex {text!r}")
        k = int(m.group(2) or 1)
        counts[ANGLE_SYMBOLS.index(m.group(1))] += k
    vt = VertexType(tuple(counts))
    if vt.degree < 3:
        raise ParseError(f"vertex degree {vt.degree} < 3 in {text!r}")
    return vt


def parse_case(text: str) -> list[VertexType]:
    """Parse a case label, e.g. ``a*d^2, b*d*e, a*b*c``."""
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ParseError("empty case")
    return [parse_vertex(p) for p in parts]


@dataclass
class CaseSystem:
    vertices: list
    angles: dict  # symbol -> AffineForm over (d, e, F)
    free_params: list  # subset of ("d", "e")
    substitution: list | None = None  # list of AffineForm, one per variable
    pinned_F: Fraction | None = None  # set when the linear system forces f

    def angle_tuple(self):
        return tuple(self.angles[s] for s in ANGLE_SYMBOLS)

    def param_names(self) -> list:
        return list(self.free_params) + ([] if self.pinned_F is not None
                                         else ["F"])


def solve_angle_system(vertices: list[VertexType]) -> CaseSystem:
    """Solve the angle sums exactly, keeping (a subset of) d, e and F free.

    Unknowns are the five angles in units of pi; every vertex contributes
    sum(multiplicity * angle) = 2 and the global constraint contributes
    a+b+c+d+e = 3+F.  Pivots prefer a, b, c, then e, then d, so the paper's
    parameters delta (and epsilon) stay free whenever possible.
    """
    rows = []
    for v in vertices:
        rows.append(([Fraction(k) for k in v.counts], AffineForm.const(2)))
    rows.append(([Fraction(1)] * 5,
                 AffineForm.const(3) + AffineForm.param("F")))
    pivot_order = [0, 1, 2, 4, 3]  # a, b, c, e, d
    solved: dict[int, AffineForm] = {}
    work = [(list(cs), rhs) for cs, rhs in rows]
    for col in pivot_order:
        pr = None
        for i, (cs, rhs) in enumerate(work):
            if cs[col] != 0:
                pr = i
                break
        if pr is None:
            continue
        cs, rhs = work.pop(pr)
        inv = 1 / cs[col]
        cs = [x * inv for x in cs]
        rhs = rhs.scale(inv)
        solved[col] = (cs, rhs)
        nw = []
        for cs2, rhs2 in work:
            if cs2[col] != 0:
                f = cs2[col]
                cs2 = [x - f * y for x, y in zip(cs2, cs)]
                rhs2 = rhs2 - rhs.scale(f)
            if any(x != 0 for x in cs2):
                nw.append((cs2, rhs2))
            else:
                nw.append((cs2, rhs2))
        work = nw
    # leftover rows: either trivial, a pin on F, or a contradiction
    pinned_F = None
    for cs2, rhs2 in work:
        if any(x != 0 for x in cs2):
            continue
        if rhs2.cd or rhs2.ce:
            raise NoSolution("leftover constraint involves free angles")
        if rhs2.cF != 0:
            val = -rhs2.c0 / rhs2.cF
            if pinned_F is not None and pinned_F != val:
                raise NoSolution("inconsistent constraints on f")
            pinned_F = val
        elif rhs2.c0 != 0:
            raise NoSolution("inconsistent angle system")
    # back substitution in reverse pivot order
    angles: dict[int, AffineForm] = {}
    free = [i for i in (3, 4) if i not in solved]
    for i in (3, 4):
        if i in free:
            angles[i] = AffineForm.param(ANGLE_SYMBOLS[i])
    for col in reversed(pivot_order):
        if col not in solved:
            if col not in angles:
                raise TooManyFreeParameters(
                    f"angle {ANGLE_SYMBOLS[col]} remains free")
            continue
        cs, rhs = solved[col]
        form = rhs
        for j in range(5):
            if j != col and cs[j] != 0:
                form = form - angles[j].scale(cs[j])
        angles[col] = form
    named = {ANGLE_SYMBOLS[i]: angles[i] for i in range(5)}
    if pinned_F is not None:
        named = {k: v.subs(F=pinned_F) for k, v in named.items()}
    sys = CaseSystem(vertices, named, [ANGLE_SYMBOLS[i] for i in free],
                     pinned_F=pinned_F)
    _validate_case(sys)
    return sys


def _validate_case(sys: CaseSystem):
    for v in sys.vertices:
        acc = AffineForm.const(0)
        for k, s in zip(v.counts, ANGLE_SYMBOLS):
            acc = acc + sys.angles[s].scale(k)
        if acc != AffineForm.const(2):
            raise NoSolution(f"vertex {v} angle sum is {acc}, not 2")
    total = AffineForm.const(0)
    for s in ANGLE_SYMBOLS:
        total = total + sys.angles[s]
    want = AffineForm.const(3 + sys.pinned_F) if sys.pinned_F is not None \
        else AffineForm.const(3) + AffineForm.param("F")
    if total != want:
        raise NoSolution(f"global angle sum is {total}")


# ---------------------------------------------------------------------------
# the trigonometric identity as a Laurent polynomial


def _expi_terms(form: AffineForm):
    """exp(i*pi*form) as {(cd, ce, cF, r mod 2): Fraction}."""
    return {(form.cd, form.ce, form.cF, form.c0 % 2): Fraction(1)}


def _tadd(t1, t2):
    out = dict(t1)
    for k, v in t2.items():
        out[k] = out.get(k, Fraction(0)) + v
        if out[k] == 0:
            del out[k]
    return out


def _tscale(t, c):
    c = Fraction(c)
    return {k: v * c for k, v in t.items()} if c else {}


def _tmul(t1, t2):
    out = {}
    for (a1, b1, c1, r1), v1 in t1.items():
        for (a2, b2, c2, r2), v2 in t2.items():
            k = (a1 + a2, b1 + b2, c1 + c2, (r1 + r2) % 2)
            s = out.get(k, Fraction(0)) + v1 * v2
            if s:
                out[k] = s
            elif k in out:
                del out[k]
    return out


def _sin_pi(form: AffineForm):
    up = AffineForm(form.c0 - Fraction(1, 2), form.cd, form.ce, form.cF)
    dn = AffineForm(-form.c0 + Fraction(1, 2), -form.cd, -form.ce, -form.cF)
    return _tadd(_tscale(_expi_terms(up), Fraction(1, 2)),
                 _tscale(_expi_terms(dn), Fraction(1, 2)))


def _cos_pi(form: AffineForm):
    dn = AffineForm(-form.c0, -form.cd, -form.ce, -form.cF)
    return _tadd(_tscale(_expi_terms(form), Fraction(1, 2)),
                 _tscale(_expi_terms(dn), Fraction(1, 2)))


_ONE = {(Fraction(0), Fraction(0), Fraction(0), Fraction(0)): Fraction(1)}


def angle_identity_terms(angles):
    """The pivotal five-angle identity as exponential terms.

    angles is the (a, b, c, d, e) tuple of AffineForms.  The identity reads
    [(1-cos b) sin(d - a/2) - (1-cos c) sin(e - a/2)] sin((d-e)/2)
      - [1-cos(b-c)] sin(a/2) sin((d+e)/2).
    """
    A, B, C, D, E = angles
    t1 = _tmul(_tadd(_ONE, _tscale(_cos_pi(B), -1)),
               _sin_pi(D - A.scale(Fraction(1, 2))))
    t2 = _tmul(_tadd(_ONE, _tscale(_cos_pi(C), -1)),
               _sin_pi(E - A.scale(Fraction(1, 2))))
    lhs = _tmul(_tadd(t1, _tscale(t2, -1)),
                _sin_pi((D - E).scale(Fraction(1, 2))))
    t3 = _tmul(_tadd(_ONE, _tscale(_cos_pi(B - C), -1)),
               _tmul(_sin_pi(A.scale(Fraction(1, 2))),
                     _sin_pi((D + E).scale(Fraction(1, 2)))))
    return _tadd(lhs, _tscale(t3, -1))


def default_substitution(sys: CaseSystem) -> list[AffineForm]:
    """One variable per free parameter; denominators from the identity terms."""
    terms = angle_identity_terms(sys.angle_tuple())
    forms = []
    for name in sys.param_names():
        idx = {"d": 0, "e": 1, "F": 2}[name]
        den = 1
        for key in terms:
            c = key[idx]
            den = den * c.denominator // math.gcd(den, c.denominator)
        forms.append(AffineForm.param(name).scale(Fraction(1, den)))
    return forms


def build_case_polynomial(sys: CaseSystem,
                          substitution: list[AffineForm] | None = None
                          ) -> LaurentPoly:
    """Expand the angle identity into a Laurent polynomial.

    Each solver variable is exp(i*pi*form) for the given substitution forms;
    all exponential arguments must be integer combinations of the forms'
    linear parts (after a global monomial shift), or SubstitutionError.
    """
    subs = substitution if substitution is not None else \
        (sys.substitution or default_substitution(sys))
    terms = angle_identity_terms(sys.angle_tuple())
    if not terms:
        return LaurentPoly.zero(max(1, len(subs)))
    k = len(subs)
    M = [[f.cd for f in subs], [f.ce for f in subs], [f.cF for f in subs]]
    rows = [i for i in range(3) if any(M[i][j] != 0 for j in range(k))]
    import itertools
    inv = None
    sel = None
    for combo in itertools.combinations(rows, k):
        sub = [[M[i][j] for j in range(k)] for i in combo]
        d = _det_frac(sub)
        if d != 0:
            inv = _inv_frac(sub)
            sel = combo
            break
    if inv is None:
        raise SubstitutionError("substitution forms are linearly dependent")
    exps = {}
    for (cd, ce, cF, r), v in terms.items():
        vec = {0: cd, 1: ce, 2: cF}
        rhs = [vec[i] for i in sel]
        sol = [sum(inv[i][j] * rhs[j] for j in range(k)) for i in range(k)]
        # consistency on the rows not used for solving
        for i in range(3):
            if i in sel:
                continue
            if sum(M[i][j] * sol[j] for j in range(k)) != vec[i]:
                raise SubstitutionError(
                    "identity term outside the substitution span")
        rr = Fraction(r)
        for j in range(k):
            rr -= sol[j] * subs[j].c0
        key = tuple(sol)
        d = exps.setdefault(key, {})
        rr %= 2
        d[rr] = d.get(rr, Fraction(0)) + v
    # integer exponents after a global shift
    keys = list(exps)
    base = keys[0]
    for kk in keys:
        for j in range(k):
            if (kk[j] - base[j]).denominator != 1:
                raise SubstitutionError("non-integer exponent difference")
    mins = [min(kk[j] for kk in keys) for j in range(k)]
    lterms = {}
    for kk, d in exps.items():
        e = tuple(int(kk[j] - mins[j]) for j in range(k))
        coef = None
        for rr, v in d.items():
            t = RationalTurn.from_fraction(Fraction(rr) / 2)
            c = CycloNum.from_turn(t, t.q) * v
            coef = c if coef is None else coef + c
        if coef is not None and not coef.is_zero():
            lterms[e] = coef
    L = LaurentPoly(max(1, k), lterms)
    return _clear_units(L)


def _clear_units(L: LaurentPoly) -> LaurentPoly:
    """Clear denominators and a global root-of-unity factor."""
    if L.is_zero():
        return L
    den = 1
    for c in L.terms.values():
        for q in c.c:
            den = den * q.denominator // math.gcd(den, q.denominator)
    L = L.scale(den)
    lead = L.terms[max(L.terms)]
    # divide by a root of unity if the leading coefficient is one times rational
    unit = _root_of_unity_part(lead)
    if unit is not None:
        L = L.scale(unit.inverse())
        lead2 = L.terms[max(L.terms)]
        if lead2.is_rational() and lead2.as_rational() < 0:
            L = L.scale(-1)
    return L.demote_rational()


def _root_of_unity_part(c: CycloNum):
    """If c = q * zeta^k for rational q > 0, return zeta^k (else None)."""
    nz = [(i, v) for i, v in enumerate(c.c) if v != 0]
    if len(nz) == 1:
        i, v = nz[0]
        unit = CycloNum.zeta(c.n, i)
        return unit if v > 0 else -unit
    return None


def _det_frac(M):
    k = len(M)
    if k == 1:
        return M[0][0]
    if k == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    return (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
            - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
            + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]))


def _inv_frac(M):
    k = len(M)
    aug = [[Fraction(M[i][j]) for j in range(k)] +
           [Fraction(1 if i == j else 0) for j in range(k)] for i in range(k)]
    for col in range(k):
        piv = next(r for r in range(col, k) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(k):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[k:] for row in aug]


# ---------------------------------------------------------------------------
# parameter recovery and filtering


REJECT_ANGLE_RANGE = "AngleOutOfRange"
REJECT_F_SMALL = "FTooSmall"
REJECT_F_ODD = "FOdd"
REJECT_SYM_BC = "SymmetricBetaGamma"
REJECT_SYM_DE = "SymmetricDeltaEpsilon"
FLAG_ORIENTATION = "OrientationConflict"


@dataclass
class CandidateSolution:
    """Five angles (exact, units of pi) with either a numeric or symbolic f."""

    angles: tuple  # five Fractions, or five AffineForms in F for families
    f: object  # int, or the string "family"
    family_formula: str | None = None
    f_constraint: tuple | None = None  # (min_f inclusive,) for families
    accepted: bool = False
    reasons: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    source: str = ""

    def angle_strings(self):
        return [str(a) for a in self.angles]

    def key(self):
        return (tuple(str(a) for a in self.angles), str(self.f))


def _param_index(name: str) -> int:
    return {"d": 0, "e": 1, "F": 2}[name]


def recover_parameters(sys: CaseSystem, substitution: list[AffineForm],
                       sols: TorsionSolutionSet) -> list[CandidateSolution]:
    """Invert the substitution on every torsion solution.

    Solves the mod-2 linear system relating variable turns to the free
    parameters, enumerating all residue representatives with every parameter
    in (0, 2); families become f-parameterized candidates when their free
    direction moves F alone.
    """
    freenames = sys.param_names()
    k = len(substitution)
    if k != len(freenames):
        raise SubstitutionError("need one variable per free parameter")
    M = [[substitution[j].linear()[_param_index(nm)] for j in range(k)]
         for nm in freenames]
    Mrows = [[M[i][j] for j in range(k)] for i in range(k)]
    # invert variable rows: rows index variables, columns parameters
    Mv = [[substitution[i].linear()[_param_index(nm)] for nm in freenames]
          for i in range(k)]
    if _det_frac(Mv) == 0:
        raise SubstitutionError("substitution matrix singular")
    Minv = _inv_frac(Mv)
    c0 = [substitution[i].c0 for i in range(k)]

    out = []
    for pt in sols.points:
        rhs = [2 * pt[i].as_fraction() - c0[i] for i in range(k)]
        for pvec in _enumerate_residues(Minv, Mv, rhs):
            cand = _candidate_from_params(sys, freenames, pvec,
                                          source=_point_str(pt))
            if all(Fraction(0) < a < 2 for a in cand.angles):
                out.append(cand)
    for fam in sols.families:
        out.extend(_candidates_from_family(sys, freenames, Mv, Minv, c0, fam))
    # dedupe by exact angles and f
    seen = {}
    for c in out:
        seen.setdefault(c.key(), c)
    return list(seen.values())


def _point_str(pt):
    return "(" + ", ".join(f"{t.p}/{t.q}" for t in pt) + ")"


def _enumerate_residues(Minv, Mv, rhs):
    """All p = Minv (rhs + 2v) with every coordinate in (0, 2)."""
    k = len(rhs)
    p0 = [sum(Minv[i][j] * rhs[j] for j in range(k)) for i in range(k)]
    # v = (Mv p - rhs) / 2, p in (0,2)^k: interval arithmetic for v bounds
    ranges = []
    for i in range(k):
        lo = -Fraction(rhs[i], 2)
        hi = -Fraction(rhs[i], 2)
        for j in range(k):
            c = Mv[i][j]
            if c > 0:
                hi += c
            else:
                lo += c
        ranges.append((math.floor(lo), math.ceil(hi)))
    import itertools
    outs = []
    for v in itertools.product(*[range(lo, hi + 1) for lo, hi in ranges]):
        p = [p0[i] + 2 * sum(Minv[i][j] * v[j] for j in range(k))
             for i in range(k)]
        if all(Fraction(0) < x < 2 for x in p):
            if p not in outs:
                outs.append(p)
    return outs


def _candidate_from_params(sys: CaseSystem, freenames, pvec, source=""):
    vals = {"d": Fraction(0), "e": Fraction(0), "F": Fraction(0)}
    for nm, v in zip(freenames, pvec):
        vals[nm] = v
    F = vals["F"] if "F" in freenames else sys.pinned_F
    angles = tuple(sys.angles[s].eval(vals["d"], vals["e"], vals["F"])
                   for s in ANGLE_SYMBOLS)
    f = None
    if F:
        q = Fraction(4, 1) / F
        f = int(q) if q.denominator == 1 else q
    return CandidateSolution(angles=angles, f=f, source=source)


def _candidates_from_family(sys, freenames, Mv, Minv, c0, fam: Family):
    """Family of variable turns -> candidates with symbolic f when possible."""
    out = []
    parts, kernel = fam.components()
    k = len(freenames)
    for t0 in parts:
        rhs0 = [2 * Fraction(t0[i]) - c0[i] for i in range(k)]
        if not kernel:
            for pvec in _enumerate_residues(Minv, Mv, rhs0):
                cand = _candidate_from_params(sys, freenames, pvec,
                                              source="family-point")
                if all(Fraction(0) < a < 2 for a in cand.angles):
                    out.append(cand)
            continue
        if len(kernel) > 1:
            out.append(CandidateSolution(
                angles=tuple(sys.angles[s] for s in ANGLE_SYMBOLS),
                f="family", family_formula=None, accepted=False,
                reasons=["ManualReview"], source="family-multidim"))
            continue
        pdir = [2 * sum(Minv[i][j] * kernel[0][j] for j in range(k))
                for i in range(k)]
        out.extend(_family_candidates_along(sys, freenames, Mv, Minv,
                                            rhs0, pdir))
    return out


def _family_candidates_along(sys, freenames, Mv, Minv, rhs0, pdir):
    """Candidates for p(s) = Minv(rhs0 + 2v) + s * pdir, s a free turn."""
    k = len(freenames)
    idxF = freenames.index("F") if "F" in freenames else None
    out = []
    for v in _residue_lattice(Mv, rhs0):
        p0 = [sum(Minv[i][j] * (rhs0[j] + 2 * v[j]) for j in range(k))
              for i in range(k)]
        if idxF is not None and pdir[idxF] != 0:
            # reparametrize by F: s = (F - p0[idxF]) / dF
            dF = pdir[idxF]
            dmap = {}
            for nm, base, slope in zip(freenames, p0, pdir):
                sl = Fraction(slope) / dF
                dmap[nm] = AffineForm(base - sl * p0[idxF],
                                      Fraction(0), Fraction(0), sl)
            angle_forms = tuple(
                sys.angles[s].subs(d=dmap.get("d"), e=dmap.get("e"),
                                   F=dmap.get("F"))
                for s in ANGLE_SYMBOLS)
            lo, hi = _valid_F_interval(angle_forms)
            if lo is None:
                continue
            out.append(CandidateSolution(
                angles=angle_forms, f="family",
                family_formula=_family_formula(angle_forms),
                f_constraint=(lo, hi), source="family"))
        else:
            # F does not move along the family: a fixed-f symbolic candidate
            F = p0[idxF] if idxF is not None else sys.pinned_F
            if not (0 < F <= 1):
                continue
            q = Fraction(4, 1) / F
            f = int(q) if q.denominator == 1 else q
            dmap = {}
            for nm, base, slope in zip(freenames, p0, pdir):
                dmap[nm] = AffineForm(base, slope, Fraction(0), Fraction(0))
            angle_forms = tuple(
                sys.angles[s].subs(d=dmap.get("d"), e=dmap.get("e"),
                                   F=dmap.get("F"))
                for s in ANGLE_SYMBOLS)
            out.append(CandidateSolution(
                angles=angle_forms, f=f, source="family-fixed-f"))
    return out


def _residue_lattice(Mv, rhs0):
    k = len(rhs0)
    ranges = []
    for i in range(k):
        lo = -Fraction(rhs0[i], 2)
        hi = -Fraction(rhs0[i], 2)
        for j in range(k):
            c = Mv[i][j]
            if c > 0:
                hi += c
            else:
                lo += c
        ranges.append((math.floor(lo) - 1, math.ceil(hi) + 1))
    import itertools
    return list(itertools.product(*[range(lo, hi + 1) for lo, hi in ranges]))


def _valid_F_interval(angle_forms):
    """F-interval (strict bounds) where all five angles lie in (0, 2)."""
    lo, hi = Fraction(0), Fraction(1)
    for form in angle_forms:
        if form.cd or form.ce:
            return None, None
        s, b = form.cF, form.c0
        if s == 0:
            if not (0 < b < 2):
                return None, None
            continue
        b1, b2 = -b / s, (2 - b) / s
        lo = max(lo, min(b1, b2))
        hi = min(hi, max(b1, b2))
    if lo >= hi:
        return None, None
    return lo, hi


def _family_formula(angle_forms) -> str:
    """Paper-style family row, e.g. (4,4,f-2,f-2,f)/f."""
    den = 1
    for a in angle_forms:
        for q in (a.c0, 4 * a.cF):
            den = den * q.denominator // math.gcd(den, q.denominator)
    nums = []
    for a in angle_forms:
        cf = int(a.c0 * den)  # coefficient of f
        cc = int(4 * a.cF * den)  # constant part
        if cf == 0:
            nums.append(str(cc))
        else:
            head = "f" if cf == 1 else f"{cf}*f"
            if cc == 0:
                nums.append(head)
            else:
                nums.append(f"{head}{'+' if cc > 0 else '-'}{abs(cc)}")
    d = "f" if den == 1 else f"{den}*f"
    return "(" + ",".join(nums) + ")/" + d


def _as_forms(angles):
    return tuple(a if isinstance(a, AffineForm) else AffineForm.const(a)
                 for a in angles)


def filter_candidates(cands: list[CandidateSolution]) -> list[CandidateSolution]:
    """Tag every candidate accepted/rejected with machine reason codes."""
    for c in cands:
        c.reasons = [r for r in c.reasons if r == "ManualReview"]
        c.flags = []
        if c.reasons:
            c.accepted = False
            continue
        if c.f == "family":
            _filter_family_candidate(c)
            continue
        forms = _as_forms(c.angles)
        a, b, g, d, e = forms
        symbolic = any(not x.is_const() for x in forms)
        if symbolic:
            if not _has_admissible_slice(forms):
                c.reasons.append(REJECT_ANGLE_RANGE)
        elif not all(Fraction(0) < x.c0 < 2 for x in forms):
            c.reasons.append(REJECT_ANGLE_RANGE)
        if not isinstance(c.f, int) or c.f % 2 == 1:
            c.reasons.append(REJECT_F_ODD)
        elif c.f < 12:
            c.reasons.append(REJECT_F_SMALL)
        if b == g:
            c.reasons.append(REJECT_SYM_BC)
        if d == e:
            c.reasons.append(REJECT_SYM_DE)
        c.accepted = not c.reasons
        if c.accepted and not symbolic:
            if not ((b.c0 > g.c0) == (d.c0 < e.c0)):
                c.flags.append(FLAG_ORIENTATION)
    return cands


def _has_admissible_slice(forms) -> bool:
    """Whether some value of the free angle parameter puts all angles in (0,2)."""
    lo, hi = None, None
    for form in forms:
        s, b = form.cd + form.ce, form.c0
        if s == 0:
            if not (0 < b < 2):
                return False
            continue
        b1, b2 = -b / s, (2 - b) / s
        l2, h2 = min(b1, b2), max(b1, b2)
        lo = l2 if lo is None else max(lo, l2)
        hi = h2 if hi is None else min(hi, h2)
    return lo is None or lo < hi


def _admissible_f(angle_forms, f: int) -> bool:
    F = Fraction(4, f)
    return all(Fraction(0) < a.eval(0, 0, F) < 2 for a in angle_forms)


def _filter_family_candidate(c: CandidateSolution):
    lo, hi = c.f_constraint
    forms = c.angles
    _a, b, g, d, e = forms
    if b == g:
        c.reasons.append(REJECT_SYM_BC)
    if d == e:
        c.reasons.append(REJECT_SYM_DE)
    # smallest admissible even f >= 12 (bounded above when lo > 0)
    limit = 4 / lo + 4 if lo > 0 else Fraction(200)
    fmin = None
    f = 12
    while f <= limit:
        if _admissible_f(forms, f):
            fmin = f
            break
        f += 2
    if fmin is None:
        if any(_admissible_f(forms, f) for f in (4, 6, 8, 10)):
            c.reasons.append(REJECT_F_SMALL)
        else:
            c.reasons.append(REJECT_ANGLE_RANGE)
    c.accepted = not c.reasons
    if c.accepted:
        c.f_constraint = (fmin, None if lo == 0 else math.floor(4 / lo))
        bg, de = b - g, d - e
        F = Fraction(4, fmin)
        if not ((bg.eval(0, 0, F) > 0) == (de.eval(0, 0, F) < 0)):
            c.flags.append(FLAG_ORIENTATION)


# ---------------------------------------------------------------------------
# the full per-case driver


@dataclass
class CaseReport:
    vertices: str
    solved_angles: dict
    free_params: list
    substitution: list
    polynomial: str
    n_points: int
    n_families: int
    candidates: list
    accepted: list
    verdict: str

    def to_dict(self):
        return {
            "schema": 1,
            "vertices": self.vertices,
            "solved_angles": {k: str(v) for k, v in self.solved_angles.items()},
            "free_params": self.free_params,
            "substitution": [str(s) for s in self.substitution],
            "polynomial": self.polynomial,
            "torsion": {"points": self.n_points, "families": self.n_families},
            "candidates": [
                {
                    "angles": c.angle_strings(),
                    "f": c.f if isinstance(c.f, (int, str)) else str(c.f),
                    "accepted": c.accepted,
                    "reasons": c.reasons,
                    "flags": c.flags,
                }
                for c in self.candidates
            ],
            "verdict": self.verdict,
        }


def run_case(vertices_text: str,
             substitution_texts: list[str] | None = None,
             eliminate: int | None = None) -> CaseReport:
    """Parse, solve, expand, find torsion solutions, recover and filter."""
    vertices = parse_case(vertices_text)
    sys = solve_angle_system(vertices)
    if substitution_texts:
        subs = [parse_affine_form_with_angles(t, sys) for t in substitution_texts]
    else:
        subs = default_substitution(sys)
    sys.substitution = subs
    L = build_case_polynomial(sys, subs)
    if L.is_zero():
        raise CaseError("identity vanishes identically under this case")
    if L.arity == 1:
        from .torsion import cyclotomic_roots_of_laurent1
        sols = TorsionSolutionSet(1)
        for t in cyclotomic_roots_of_laurent1(L):
            sols.add_point((t,))
    elif L.arity == 2:
        sols = torsion_points_2var(L, eliminate=eliminate)
    else:
        sols = torsion_points_3var(L, eliminate=eliminate)
    cands = recover_parameters(sys, subs, sols)
    cands = filter_candidates(cands)
    cands.sort(key=lambda c: (str(c.f), c.angle_strings()))
    accepted = [c for c in cands if c.accepted]
    verdict = "None" if not accepted else \
        "; ".join(_verdict_row(c) for c in accepted)
    return CaseReport(
        vertices=vertices_text.strip(),
        solved_angles=sys.angles,
        free_params=sys.free_params,
        substitution=subs,
        polynomial=format_poly(L),
        n_points=len(sols.points),
        n_families=len(sols.families),
        candidates=cands,
        accepted=accepted,
        verdict=verdict,
    )


def _verdict_row(c: CandidateSolution) -> str:
    if c.f == "family":
        return f"family {c.family_formula}"
    den = 1
    for a in c.angles:
        den = den * a.denominator // math.gcd(den, a.denominator)
    nums = [a * den for a in c.angles]
    return (f"f={c.f},(" + ",".join(str(int(n)) for n in nums) + f")/{den}")


def parse_affine_form_with_angles(text: str, sys: CaseSystem) -> AffineForm:
    """Like parse_affine_form but a, b, c resolve to solved angle forms.

    The letters d and e always denote the free parameters; if d or e was
    eliminated by the linear system, its solved form is substituted.
    """
    raw = _parse_affine_general(text)
    out = AffineForm.const(raw.c0)
    for sym, coef in raw.sym_coeffs.items():
        if sym == "F":
            out = out + AffineForm.param("F").scale(coef)
        elif sym in ("d", "e") and sym in sys.free_params:
            out = out + AffineForm.param(sym).scale(coef)
        else:
            out = out + sys.angles[sym].scale(coef)
    return out


@dataclass
class _GeneralForm:
    c0: Fraction
    sym_coeffs: dict


def _parse_affine_general(text: str) -> _GeneralForm:
    tokens = []
    pos = 0
    pat = re.compile(r"\s*(\d+|[a-eF]|\+|-|\*|/|\(|\))")
    while pos < len(text):
        m = pat.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"bad token near {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    i = 0

    def peek():
        return tokens[i] if i < len(tokens) else None

    def term():
        nonlocal i
        num = Fraction(1)
        sym = None
        while True:
            t = peek()
            if t is None or t in "+-":
                break
            if t == "*":
                i += 1
                continue
            if t == "/":
                i += 1
                num /= int(tokens[i])
                i += 1
                continue
            if t.isdigit():
                num *= int(t)
                i += 1
                continue
            if t in "abcdeF":
                if sym is not None:
                    raise ParseError("nonlinear form")
                sym = t
                i += 1
                continue
            raise ParseError(f"unexpected {t!r}")
        return num, sym

    c0 = Fraction(0)
    syms: dict[str, Fraction] = {}
    while peek() is not None:
        sign = 1
        while peek() in ("+", "-"):
            if tokens[i] == "-":
                sign = -sign
            i += 1
        num, sym = term()
        num *= sign
        if sym is None:
            c0 += num
        else:
            syms[sym] = syms.get(sym, Fraction(0)) + num
    return _GeneralForm(c0, syms)
