"""Combinatorial sanity checks on pentagonal tilings.

Vertex counting from the Euler relation, the parity restriction on the two
angles adjacent to the odd edge, the global balance count (each angle of the
tile appears f times), and exact vertex angle sums.  Tile counts may be affine
expressions in one integer parameter m, which covers every tiling family the
classification produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .caseengine import ANGLE_SYMBOLS, VertexType, parse_vertex


@dataclass(frozen=True)
class AffineCount:
    """c0 + cm * m with rational coefficients."""

    c0: Fraction = Fraction(0)
    cm: Fraction = Fraction(0)

    @staticmethod
    def of(v) -> "AffineCount":
        if isinstance(v, AffineCount):
            return v
        return AffineCount(Fraction(v))

    @staticmethod
    def m(coeff=1) -> "AffineCount":
        return AffineCount(Fraction(0), Fraction(coeff))

    def __add__(self, other):
        other = AffineCount.of(other)
        return AffineCount(self.c0 + other.c0, self.cm + other.cm)

    def __mul__(self, k):
        k = Fraction(k)
        return AffineCount(self.c0 * k, self.cm * k)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = AffineCount.of(other)
        return self.c0 == other.c0 and self.cm == other.cm

    def __str__(self):
        if self.cm == 0:
            return str(self.c0)
        head = "m" if self.cm == 1 else f"{self.cm}*m"
        if self.c0 == 0:
            return head
        return f"{head}{'+' if self.c0 > 0 else '-'}{abs(self.c0)}"


@dataclass
class TilingCensus:
    """Tile/vertex/edge counts derived from the degree histogram."""

    v_k: dict  # degree -> count (k >= 3 implied for the degree-3 slot)
    f: int
    v3: int
    v: int
    e: Fraction


def euler_counts(v_k: dict) -> TilingCensus:
    """Counts from the degree histogram of vertices of degree >= 4.

    f = 12 + 2*sum (k-3) v_k and v3 = 20 + sum (3k-10) v_k; e = 5f/2.
    """
    if any(k < 4 or n < 0 for k, n in v_k.items()):
        raise ValueError("histogram needs degrees >= 4 and counts >= 0")
    f = 12 + 2 * sum((k - 3) * n for k, n in v_k.items())
    v3 = 20 + sum((3 * k - 10) * n for k, n in v_k.items())
    v = v3 + sum(v_k.values())
    return TilingCensus(v_k=dict(v_k), f=f, v3=v3, v=v, e=Fraction(5 * f, 2))


def parity_check(vertex: VertexType) -> bool:
    """The total number of delta and epsilon angles at a vertex is even."""
    return vertex.parity_ok()


@dataclass
class TilingSpec:
    """A vertex-type multiset with (possibly m-dependent) counts."""

    entries: list  # list of (VertexType, AffineCount)
    f: AffineCount

    @staticmethod
    def parse(spec: dict) -> "TilingSpec":
        """From JSON: {"f": "4*m" or int, "vertices": {"a*b*c": "2*m", ...}}."""
        entries = []
        for vt, count in spec["vertices"].items():
            entries.append((parse_vertex(vt), _parse_count(count)))
        return TilingSpec(entries, _parse_count(spec["f"]))


def _parse_count(v) -> AffineCount:
    if isinstance(v, int):
        return AffineCount.of(v)
    text = str(v).replace(" ", "")
    total = AffineCount()
    for piece in text.replace("-", "+-").split("+"):
        if not piece:
            continue
        neg = piece.startswith("-")
        if neg:
            piece = piece[1:]
        if piece.endswith("*m") or piece == "m":
            coeff = Fraction(piece[:-2] or 1) if piece != "m" else Fraction(1)
            term = AffineCount.m(coeff)
        else:
            term = AffineCount.of(Fraction(piece))
        total = total + (term * -1 if neg else term)
    return total


@dataclass
class BalanceReport:
    angle_counts: dict  # symbol -> AffineCount
    ok: bool
    diagnostics: list


def balance_check(spec: TilingSpec) -> BalanceReport:
    """Each of the five angles must appear exactly f times in the tiling.

    When no vertex type contains two deltas or two epsilons, every vertex
    type with any delta or epsilon must contain exactly one of each.
    """
    counts = {s: AffineCount() for s in ANGLE_SYMBOLS}
    for vt, n in spec.entries:
        for s, k in zip(ANGLE_SYMBOLS, vt.counts):
            if k:
                counts[s] = counts[s] + n * k
    diagnostics = []
    for s in ANGLE_SYMBOLS:
        if counts[s] != spec.f:
            diagnostics.append(
                f"angle {s} appears {counts[s]} times, tile count is {spec.f}")
    has_dd = any(vt.counts[3] >= 2 for vt, _ in spec.entries)
    has_ee = any(vt.counts[4] >= 2 for vt, _ in spec.entries)
    if not (has_dd and has_ee):
        for vt, _n in spec.entries:
            nd, ne = vt.counts[3], vt.counts[4]
            if (nd or ne) and (nd, ne) != (1, 1):
                diagnostics.append(
                    f"vertex {vt} pairs delta/epsilon as {nd}/{ne}")
    return BalanceReport(counts, not diagnostics, diagnostics)


def vertex_anglesum_check(vertex: VertexType, angles) -> bool:
    """Exact check that the angles at the vertex sum to 2 (units of pi)."""
    total = sum(Fraction(a) * k for a, k in zip(angles, vertex.counts))
    return total == 2
