"""Numeric verification of pentagon geometry on the unit sphere.

All five angles are exact rationals in units of pi; the geometry itself is
double precision with explicit tolerances.  The pentagon has four edges of
length a and one of length b, vertices in the cyclic order
epsilon - gamma - alpha - beta - delta, with the b-edge joining delta and
epsilon.  The closure walk starts at the delta vertex, traverses the four
a-edges through beta, alpha, gamma to the epsilon vertex, and measures the
remaining side and the angle residuals at delta and epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

IDENTITY_TOL = 1e-10
CLOSURE_TOL = 1e-8


class NotDetermined(ValueError):
    """The linear equation for cos a degenerates (symmetric pentagon)."""


class InconsistentAngles(ValueError):
    """The two independent equations for cos a disagree."""


class ClosureFailed(ValueError):
    """The walk does not close up to the configured tolerance."""


class NotApplicable(ValueError):
    """A check whose precondition does not hold for these angles."""


def _as_fracs(angles):
    out = tuple(Fraction(a) for a in angles)
    if len(out) != 5:
        raise ValueError("five angles required")
    return out


def _rad(q: Fraction) -> float:
    return math.pi * q.numerator / q.denominator


def angle_identity_residual(angles) -> float:
    """|LHS| of the five-angle identity that every tile satisfies."""
    al, be, ga, de, ep = (_rad(q) for q in _as_fracs(angles))
    lhs = (((1 - math.cos(be)) * math.sin(de - al / 2)
            - (1 - math.cos(ga)) * math.sin(ep - al / 2))
           * math.sin((de - ep) / 2)
           - (1 - math.cos(be - ga)) * math.sin(al / 2)
           * math.sin((de + ep) / 2))
    return abs(lhs)


def _is_integer(q: Fraction) -> bool:
    return q.denominator == 1


def cos_a_from_angles(angles) -> float:
    """The unique cos a solving the first linear edge equation.

    Cross-checked against the (gamma, epsilon) variant whenever that variant
    is nondegenerate; disagreement beyond 1e-10 raises InconsistentAngles.
    Degenerate prefactors (symmetric pentagons) raise NotDetermined.
    """
    qa = _as_fracs(angles)
    al, be, ga, de, ep = (_rad(q) for q in qa)
    # prefactor sin(a/2) sin((b-c)/2) sin(b/2) sin(d) = 0 iff one argument
    # is an integer multiple of pi; the angles are exact so test exactly
    A, B, C, D, E = qa
    deg1 = _is_integer(A / 2 % 2) or _is_integer((B - C) / 2 % 2) or \
        _is_integer(B / 2 % 2) or _is_integer(D % 2)
    deg2 = _is_integer(A / 2 % 2) or _is_integer((B - C) / 2 % 2) or \
        _is_integer(C / 2 % 2) or _is_integer(E % 2)

    def variant1():
        pref = math.sin(al / 2) * math.sin((be - ga) / 2) * \
            math.sin(be / 2) * math.sin(de)
        num = (math.sin(al / 2) * math.sin((be - ga) / 2)
               * math.cos(be / 2) * math.cos(de)
               - math.sin(ga / 2) * math.sin((de - ep) / 2)
               * math.cos((de + ep - al) / 2))
        return num / pref

    def variant2():
        pref = math.sin(al / 2) * math.sin((be - ga) / 2) * \
            math.sin(ga / 2) * math.sin(ep)
        num = (math.sin(al / 2) * math.sin((be - ga) / 2)
               * math.cos(ga / 2) * math.cos(ep)
               - math.sin(be / 2) * math.sin((de - ep) / 2)
               * math.cos((de + ep - al) / 2))
        return num / pref

    if deg1 and deg2:
        raise NotDetermined("both edge equations degenerate for these angles")
    if deg1:
        return variant2()
    if deg2:
        return variant1()
    v1, v2 = variant1(), variant2()
    if abs(v1 - v2) > IDENTITY_TOL:
        raise InconsistentAngles(f"cos a mismatch: {v1} vs {v2}")
    return v1


def _rotate(v, axis, angle):
    """Rodrigues rotation of v about the unit axis."""
    c, s = math.cos(angle), math.sin(angle)
    return (v * c + np.cross(axis, v) * s + axis * np.dot(axis, v) * (1 - c))


@dataclass
class PentagonGeometry:
    angles: tuple
    a: float
    b: float
    cos_a: float
    cos_b: float
    closure_residual: float
    angle_residual_delta: float
    angle_residual_epsilon: float
    orientation: int


def close_pentagon(angles, a: float, tolerance: float = CLOSURE_TOL
                   ) -> PentagonGeometry:
    """Walk the four a-edges and close with the b-edge.

    Starts at the delta vertex, turns by the interior angles at beta, alpha
    and gamma, and reports b as the arc from the epsilon vertex back to the
    start, together with the interior-angle residuals at delta and epsilon.
    Both orientations are tried; the better one is returned, and a combined
    residual above the tolerance raises ClosureFailed.
    """
    qa = _as_fracs(angles)
    if not 0 < a < math.pi:
        raise ValueError("need 0 < a < pi")
    al, be, ga, de, ep = (_rad(q) for q in qa)
    turn_angles = (be, al, ga)  # interior angles visited along the walk

    best = None
    for orient in (1, -1):
        p = np.array([0.0, 0.0, 1.0])
        u = np.array([1.0, 0.0, 0.0])
        start, u_start = p.copy(), u.copy()
        for theta in turn_angles + (None,):
            p_new = math.cos(a) * p + math.sin(a) * u
            u_new = -math.sin(a) * p + math.cos(a) * u
            p, u = p_new / np.linalg.norm(p_new), u_new
            if theta is not None:
                u = _rotate(u, p, orient * (math.pi - theta))
                u = u - np.dot(u, p) * p
                u /= np.linalg.norm(u)
        # p is the epsilon vertex, u the incoming travel direction
        cos_b = float(np.clip(np.dot(p, start), -1.0, 1.0))
        b = math.acos(cos_b)
        # interior angle at epsilon: from incoming direction to the edge
        # toward delta
        t_eps = start - np.dot(start, p) * p
        nt = np.linalg.norm(t_eps)
        if nt < 1e-13:
            continue  # b = 0 or pi: degenerate closure
        t_eps /= nt
        phi_e = math.atan2(float(np.dot(np.cross(u, t_eps), p)),
                           float(np.dot(u, t_eps)))
        theta_e = (math.pi - orient * phi_e) % (2 * math.pi)
        # interior angle at delta: from the arriving b-edge to the first edge
        t_del = p - np.dot(p, start) * start
        t_del /= np.linalg.norm(t_del)
        w_in = -t_del
        phi_d = math.atan2(float(np.dot(np.cross(w_in, u_start), start)),
                           float(np.dot(w_in, u_start)))
        theta_d = (math.pi - orient * phi_d) % (2 * math.pi)
        r_e = _wrap_residual(theta_e - ep)
        r_d = _wrap_residual(theta_d - de)
        total = abs(r_e) + abs(r_d)
        if best is None or total < best.closure_residual:
            best = PentagonGeometry(
                angles=qa, a=a, b=b, cos_a=math.cos(a), cos_b=cos_b,
                closure_residual=total, angle_residual_delta=abs(r_d),
                angle_residual_epsilon=abs(r_e), orientation=orient)
    if best is None or best.closure_residual > tolerance:
        raise ClosureFailed(
            f"closure residual {getattr(best, 'closure_residual', None)}"
            f" above {tolerance}")
    return best


def _wrap_residual(x: float) -> float:
    while x > math.pi:
        x -= 2 * math.pi
    while x < -math.pi:
        x += 2 * math.pi
    return x


def great_circle_residual(angles) -> float:
    """Residual of the degenerate-case identity when delta+eps = alpha +- pi.

    Raises NotApplicable unless the precondition holds exactly.
    """
    qa = _as_fracs(angles)
    A, _B, _C, D, E = qa
    if (D + E - A - 1) % 2 != 0 and (D + E - A + 1) % 2 != 0:
        raise NotApplicable("delta + epsilon != alpha +- pi")
    al, be, ga, de, ep = (_rad(q) for q in qa)
    val = (math.cos(be / 2) * math.cos(de) * math.sin(ga / 2) * math.sin(ep)
           - math.sin(be / 2) * math.sin(de) * math.cos(ga / 2) * math.cos(ep))
    return abs(val)


def orientation_consistent(angles) -> bool:
    """Exact test that beta > gamma iff delta < epsilon.

    Simple pentagons satisfy this; a False value signals a self-intersecting
    angle set.  Symmetric inputs raise NotApplicable.
    """
    _a, b, g, d, e = _as_fracs(angles)
    if b == g or d == e:
        raise NotApplicable("symmetric angles")
    return (b > g) == (d < e)
