"""Multi-prime modular resultant of bivariate integer polynomials.

For each 30-bit prime the resultant is computed by evaluation/interpolation:
the kept variable is evaluated at enough points, a vectorized Euclidean
remainder sequence over numpy int64 arrays produces the univariate resultants
at all points simultaneously, and Newton interpolation recovers the image of
the resultant mod p.  The images are CRT-combined; the number of primes comes
from a rigorous Hadamard-style bound, so the final answer is exact.

Points where a leading coefficient vanishes, or where the remainder sequence
degenerates, are recomputed individually; primes that spoil a leading
coefficient entirely are skipped.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

MODULAR_THRESHOLD = 260  # (dv_A+dv_B)*(dt_A+dt_B) above which this kernel runs
STABLE_WINDOW = 2  # extra agreeing CRT reconstructions before early stop

_PRIMES: list[int] = []


def _primes(count: int) -> list[int]:
    global _PRIMES
    p = _PRIMES[-1] if _PRIMES else (1 << 30)
    while len(_PRIMES) < count:
        p += 1
        while not _is_prime(p):
            p += 1
        _PRIMES.append(p)
    return _PRIMES[:count]


def _is_prime(n: int) -> bool:
    if n % 2 == 0:
        return n == 2
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if a % n == 0:
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _to_int_matrix(L, var: int, keep: int):
    """Dense coefficient matrix M[i][j] (v-degree i, t-degree j) of ints.

    Clears the common denominator; returns (matrix, denominator).
    """
    den = 1
    for c in L.terms.values():
        den = den * c.as_rational().denominator // math.gcd(
            den, c.as_rational().denominator)
    dv = L.degree_in(var)
    dt = L.degree_in(keep)
    M = [[0] * (dt + 1) for _ in range(dv + 1)]
    for e, c in L.terms.items():
        q = c.as_rational() * den
        M[e[var]][e[keep]] = int(q)
    return M, den


def resultant_bivariate_int(A, B, var: int, keep: int):
    """Exact resultant over Z of two bivariate rational Laurent polynomials.

    Inputs must already have nonnegative exponents.  Returns a LaurentPoly of
    arity 1 in the kept variable, scaled back by the cleared denominators.
    """
    from .laurent import LaurentPoly

    MA, da = _to_int_matrix(A, var, keep)
    MB, db = _to_int_matrix(B, var, keep)
    coeffs = resultant_int_matrices(MA, MB)
    nA, nB = len(MA) - 1, len(MB) - 1
    scale = Fraction(1, da ** nB * db ** nA)
    terms = {(j,): Fraction(c) * scale for j, c in enumerate(coeffs) if c}
    return LaurentPoly(1, terms)


def resultant_int_matrices(MA, MB) -> list[int]:
    """Resultant w.r.t. the first index of two dense int coefficient matrices."""
    nA, nB = len(MA) - 1, len(MB) - 1
    dtA = len(MA[0]) - 1
    dtB = len(MB[0]) - 1
    if nA == 0 and nB == 0:
        raise ValueError("both inputs constant in the eliminated variable")
    if nA == 0:
        # Res(a, B) = a^{deg B}
        from sympy import Poly, symbols  # small case; exact power of a poly
        t = symbols("t")
        pa = Poly(list(reversed(MA[0])), t)
        out = Poly(1, t)
        for _ in range(nB):
            out = out * pa
        return [int(c) for c in reversed(out.all_coeffs())]
    if nB == 0:
        return resultant_int_matrices(MB, MA)  # sign factor (-1)^(nA*0) = 1

    dbound = nA * dtB + nB * dtA
    npts = dbound + 1
    if (nA + nB) * max(dtA + dtB, 1) < 220:
        return _resultant_prs_small(MA, MB)

    # rigorous coefficient bound: ||det||_1 <= (n+m)! * prod_rows max ||entry||_1
    logbound = math.lgamma(nA + nB + 1) / math.log(2)
    rowA = max(sum(abs(c) for c in row) for row in MA)
    rowB = max(sum(abs(c) for c in row) for row in MB)
    logbound += nB * math.log2(max(rowA, 1)) + nA * math.log2(max(rowB, 1))
    nprimes = int(logbound / 29.0) + 2

    # CRT with early termination: stop once the reconstruction is stable over
    # STABLE_WINDOW consecutive primes (the rigorous bound caps the count).
    images = []
    used = []
    lcA = MA[-1]
    lcB = MB[-1]
    i = 0
    prev = None
    stable = 0
    while len(used) < nprimes:
        p = _primes(i + 1)[i]
        i += 1
        if all(c % p == 0 for c in lcA) or all(c % p == 0 for c in lcB):
            continue
        images.append(_resultant_mod_p(MA, MB, p, npts))
        used.append(p)
        if len(used) % 2 == 0 or len(used) == nprimes:
            cur = _crt_center(images, used, npts)
            if cur == prev:
                stable += 1
                if stable >= STABLE_WINDOW:
                    return cur
            else:
                stable = 0
                prev = cur
    return _crt_center(images, used, npts)


def _pmul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _padd(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, y in enumerate(b):
        out[i] += y
    while out and out[-1] == 0:
        out.pop()
    return out


def _pscale(a, c):
    return [x * c for x in a] if c else []


def _pdivexact(a, b):
    """Exact division of dense integer polys (raises on failure)."""
    if not b:
        raise ZeroDivisionError
    rem = list(a)
    q = [0] * (len(rem) - len(b) + 1) if len(rem) >= len(b) else []
    for k in range(len(rem) - len(b), -1, -1):
        if len(rem) < len(b) + k:
            continue
        c = rem[k + len(b) - 1]
        if c % b[-1]:
            raise ValueError("inexact division")
        c //= b[-1]
        q[k] = c
        if c:
            for j, y in enumerate(b):
                rem[k + j] -= c * y
        while rem and rem[-1] == 0:
            rem.pop()
    if rem:
        raise ValueError("inexact division")
    while q and q[-1] == 0:
        q.pop()
    return q


def _prem_entries(A, B):
    """Pseudo remainder lc(B)^(dA-dB+1) * A mod B, entries dense int polys."""
    dA, dB = len(A) - 1, len(B) - 1
    lcB = B[-1]
    R = [list(r) for r in A]
    for k in range(dA, dB - 1, -1):
        top = R[k]
        R = [_pmul(r, lcB) for r in R]
        if top:
            for j in range(dB + 1):
                prod = _pmul(top, B[j])
                R[k - dB + j] = _padd(R[k - dB + j], [-x for x in prod])
        R.pop()
    while R and not R[-1]:
        R.pop()
    return R


def _resultant_prs_small(MA, MB) -> list[int]:
    """Subresultant PRS resultant over Z[t] for small dense inputs.

    Rows index the eliminated variable; entries are coefficient lists in t.
    Matches the Sylvester determinant convention exactly.
    """
    def trim(M):
        out = []
        for row in M:
            r = list(row)
            while r and r[-1] == 0:
                r.pop()
            out.append(r)
        return out

    A = trim(MA)
    B = trim(MB)
    sign = 1
    if len(A) < len(B):
        A, B = B, A
        if ((len(A) - 1) * (len(B) - 1)) % 2:
            sign = -sign
    g, h = [1], [1]
    while True:
        dA, dB = len(A) - 1, len(B) - 1
        delta = dA - dB
        if (dA * dB) % 2:
            sign = -sign
        R = _prem_entries(A, B)
        if not R:
            return []
        divisor = _pmul(g, _pow_poly(h, delta))
        A = B
        B = [(_pdivexact(r, divisor) if r else []) for r in R]
        g = A[-1]
        if delta > 0:
            h = _pdivexact(_pow_poly(g, delta), _pow_poly(h, delta - 1))
        if len(B) - 1 == 0:
            break
    dA = len(A) - 1
    res = _pdivexact(_pow_poly(B[0], dA), _pow_poly(h, dA - 1))
    return _pscale(res, sign) if sign < 0 else (res or [0])


def _pow_poly(a, k: int):
    out = [1]
    for _ in range(k):
        out = _pmul(out, a)
    return out


def _resultant_mod_p(MA, MB, p: int, npts: int) -> list[int]:
    Anp = np.array(MA, dtype=np.int64) % p
    Bnp = np.array(MB, dtype=np.int64) % p

    # candidate evaluation points 0..npts+slack, filter leading-coeff zeros
    slack = npts // 4 + 8
    ts = np.arange(npts + slack, dtype=np.int64) % p
    lcA_vals = _eval_rows(Anp[-1:], ts, p)[0]
    lcB_vals = _eval_rows(Bnp[-1:], ts, p)[0]
    good = (lcA_vals != 0) & (lcB_vals != 0)
    idx = np.nonzero(good)[0]
    while idx.size < npts:
        extra = np.arange(ts.size, ts.size + npts, dtype=np.int64)
        ts = np.concatenate([ts, extra % p])
        lcA_vals = _eval_rows(Anp[-1:], ts, p)[0]
        lcB_vals = _eval_rows(Bnp[-1:], ts, p)[0]
        good = (lcA_vals != 0) & (lcB_vals != 0)
        idx = np.nonzero(good)[0]
    idx = idx[:npts]
    tv = ts[idx]

    FA = _eval_rows(Anp, tv, p)  # shape (nA+1, npts)
    FB = _eval_rows(Bnp, tv, p)

    vals, bad = _vector_prs_resultant(FA, FB, p)
    # recompute degenerate points individually
    for j in np.nonzero(bad)[0]:
        vals[j] = _scalar_resultant_mod_p(
            [int(x) for x in FA[:, j]], [int(x) for x in FB[:, j]], p)
    return _newton_interpolate(tv, vals, p)


def _eval_rows(M, ts, p: int):
    """Evaluate each row polynomial (in t, ascending) at all points mod p."""
    out = np.zeros((M.shape[0], ts.size), dtype=np.int64)
    for j in range(M.shape[1] - 1, -1, -1):
        out = (out * ts + M[:, j][:, None]) % p
    return out


def _vector_prs_resultant(FA, FB, p: int):
    """Euclidean PRS resultants for all columns at once.

    Returns (values array, bad mask); bad columns hit a degree drop and must
    be recomputed individually.
    """
    npts = FA.shape[1]
    res = np.ones(npts, dtype=np.int64)
    bad = np.zeros(npts, dtype=bool)
    F = FA.copy()
    G = FB.copy()
    # maintain invariant deg F >= deg G (uniform across columns)
    if F.shape[0] - 1 < G.shape[0] - 1:
        F, G = G, F
        if ((F.shape[0] - 1) * (G.shape[0] - 1)) % 2:
            res = (p - res) % p
    while G.shape[0] > 1:
        df = F.shape[0] - 1
        dg = G.shape[0] - 1
        # remainder of F by G, monic-free: use leading-coeff inverse
        lcg = G[-1]
        inv = _modpow(lcg, p - 2, p)
        R = F.copy()
        for k in range(df, dg - 1, -1):
            c = (R[k] * inv) % p
            if k - dg >= 0:
                R[k - dg:k + 1] = (R[k - dg:k + 1] - c[None, :] * G) % p
        R = R[:dg]
        # strip uniform zero leading rows; mark columns with nonuniform drop
        dr = dg - 1
        while dr >= 0:
            nz = R[dr] != 0
            if nz.any():
                bad |= ~nz
                break
            dr -= 1
        if dr < 0:
            # all resultants zero
            return np.zeros(npts, dtype=np.int64), bad
        R = R[:dr + 1]
        # resultant update: Res(F,G) = (-1)^{df*dg} lc(G)^{df-dr} Res(G,R)
        e = df - dr
        res = (res * _modpow(lcg, e, p)) % p
        if (df * dg) % 2:
            res = (p - res) % p
        F, G = G, R
    # deg G == 0: Res(F, c) = c^{deg F}
    res = (res * _modpow(G[0], F.shape[0] - 1, p)) % p
    return res, bad


def _modpow(a, e: int, p: int):
    out = np.ones_like(a)
    base = a % p
    while e:
        if e & 1:
            out = (out * base) % p
        base = (base * base) % p
        e >>= 1
    return out


def _scalar_resultant_mod_p(fa: list[int], fb: list[int], p: int) -> int:
    """Plain-int Euclidean resultant mod p for one evaluation point."""
    def deg(f):
        d = len(f) - 1
        while d >= 0 and f[d] % p == 0:
            d -= 1
        return d

    F = [c % p for c in fa]
    G = [c % p for c in fb]
    df, dg = deg(F), deg(G)
    res = 1
    if df < dg:
        F, G, df, dg = G, F, dg, df
        if (df * dg) % 2:
            res = p - res
    while dg > 0:
        lcg = G[dg]
        inv = pow(lcg, p - 2, p)
        R = F[:df + 1]
        for k in range(df, dg - 1, -1):
            c = (R[k] * inv) % p
            if c:
                for j in range(dg + 1):
                    R[k - dg + j] = (R[k - dg + j] - c * G[j]) % p
        dr = deg(R)
        if dr < 0:
            return 0
        e = df - dr
        res = (res * pow(lcg, e, p)) % p
        if (df * dg) % 2:
            res = p - res
        F, G, df, dg = G[:dg + 1], R[:dr + 1], dg, dr
    res = (res * pow(G[0], df, p)) % p
    return res % p


def _inverse_table(limit: int, p: int):
    """inv[i] = i^{-1} mod p for 1 <= i <= limit (classic recurrence)."""
    inv = np.zeros(limit + 1, dtype=np.int64)
    inv[1] = 1
    for i in range(2, limit + 1):
        inv[i] = (-(p // i) * inv[p % i]) % p
    return inv


def _newton_interpolate(ts, vals, p: int) -> list[int]:
    """Coefficients (ascending) of the poly through (ts, vals) mod p."""
    n = ts.size
    ts = ts.astype(np.int64)
    coef = vals.astype(np.int64).copy()
    # divided differences; the abscissas are small ascending ints, so the
    # denominators come from a batch inverse table
    maxdiff = int((ts.max() - ts.min()))
    table = _inverse_table(max(maxdiff, 1), p)
    for k in range(1, n):
        denom = ts[k:] - ts[:-k]
        inv = table[denom]
        coef[k:] = ((coef[k:] - coef[k - 1:-1]) * inv) % p
    # expand Newton form to monomial basis (ascending), vectorized Horner
    out = np.zeros(n, dtype=np.int64)
    for k in range(n - 1, -1, -1):
        shifted = np.concatenate(([np.int64(0)], out[:-1]))
        out = (shifted - ts[k] * out) % p
        out[0] = (out[0] + coef[k]) % p
    return [int(x) for x in out]


def _crt_center(images: list[list[int]], primes: list[int], npts: int) -> list[int]:
    """Combine per-prime coefficient lists, center-lifting to signed ints."""
    M = 1
    for p in primes:
        M *= p
    # precompute CRT weights
    weights = []
    for p in primes:
        Mi = M // p
        weights.append(Mi * pow(Mi % p, p - 2, p))
    out = []
    half = M // 2
    for j in range(npts):
        acc = 0
        for img, w in zip(images, weights):
            acc += img[j] * w
        acc %= M
        if acc > half:
            acc -= M
        out.append(acc)
    while out and out[-1] == 0:
        out.pop()
    return out
