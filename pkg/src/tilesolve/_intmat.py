"""Small exact integer matrix routines (HNF, SNF, inverses) for dimensions <= 3.

Matrices are lists of row lists of Python ints.  Everything here is sized for
exponent lattices of Laurent polynomials in at most three variables, so
simplicity beats asymptotics.
"""

from __future__ import annotations

from fractions import Fraction


def mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    return [[sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m)]
            for i in range(n)]


def mat_vec(A, v):
    return [sum(A[i][j] * v[j] for j in range(len(v))) for i in range(len(A))]


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def det(A):
    n = len(A)
    if n == 1:
        return A[0][0]
    if n == 2:
        return A[0][0] * A[1][1] - A[0][1] * A[1][0]
    if n == 3:
        return (A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1])
                - A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0])
                + A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]))
    raise ValueError("only dimensions <= 3 supported")


def hnf_rows(vectors, ncols):
    """Row-style Hermite normal form of the lattice spanned by the vectors.

    Returns the list of nonzero HNF rows (each a list of ints): upper
    triangular up to column permutation of pivots, pivots positive, entries
    above a pivot reduced modulo it.
    """
    rows = [list(v) for v in vectors if any(v)]
    basis = []
    col = 0
    while col < ncols and rows:
        # gcd-reduce all rows on this column
        while True:
            nz = [r for r in rows if r[col] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda r: abs(r[col]))
            pivot = nz[0]
            for r in nz[1:]:
                q = r[col] // pivot[col]
                for j in range(ncols):
                    r[j] -= q * pivot[j]
            rows = [r for r in rows if any(r)]
        nz = [r for r in rows if r[col] != 0]
        if nz:
            pivot = nz[0]
            if pivot[col] < 0:
                for j in range(ncols):
                    pivot[j] = -pivot[j]
            basis.append(pivot)
            rows = [r for r in rows if r is not pivot and any(r)]
        col += 1
    # reduce entries above pivots
    for i in range(len(basis)):
        for k in range(i):
            pcol = next(j for j in range(ncols) if basis[i][j] != 0)
            q = basis[k][pcol] // basis[i][pcol]
            if q:
                for j in range(ncols):
                    basis[k][j] -= q * basis[i][j]
    return basis


def snf(M):
    """Diagonalize over Z: returns (U, D, V) with U*M*V = D diagonal, U, V unimodular.

    D is not normalized to a divisibility chain; callers only need a diagonal
    form for congruence solving.
    """
    A = [list(r) for r in M]
    n, m = len(A), len(A[0])
    U, V = identity(n), identity(m)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(i, j, q):  # row_i -= q * row_j
        for t in range(m):
            A[i][t] -= q * A[j][t]
        for t in range(n):
            U[i][t] -= q * U[j][t]

    def add_col(i, j, q):  # col_i -= q * col_j
        for r in A:
            r[i] -= q * r[j]
        for r in V:
            r[i] -= q * r[j]

    t = 0
    while t < min(n, m):
        # find a nonzero pivot
        piv = None
        for i in range(t, n):
            for j in range(t, m):
                if A[i][j] != 0:
                    if piv is None or abs(A[i][j]) < abs(A[piv[0]][piv[1]]):
                        piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        done = False
        while not done:
            done = True
            for i in range(t + 1, n):
                if A[i][t] % A[t][t]:
                    add_row(i, t, A[i][t] // A[t][t])
                    swap_rows(t, i)
                    done = False
            for i in range(t + 1, n):
                if A[i][t]:
                    add_row(i, t, A[i][t] // A[t][t])
            for j in range(t + 1, m):
                if A[t][j] % A[t][t]:
                    add_col(j, t, A[t][j] // A[t][t])
                    swap_cols(t, j)
                    done = False
            for j in range(t + 1, m):
                if A[t][j]:
                    add_col(j, t, A[t][j] // A[t][t])
        if A[t][t] < 0:
            for j in range(m):
                A[t][j] = -A[t][j]
            for j in range(n):
                U[t][j] = -U[t][j]
        t += 1
    # diagonal form; the divisibility chain is not needed by the callers
    return U, A, V


def mat_inverse_rational(M):
    """Exact inverse of a nonsingular integer matrix, entries Fractions."""
    n = len(M)
    aug = [[Fraction(M[i][j]) for j in range(n)] + [Fraction(1 if i == j else 0)
           for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def solve_integer_congruence(M, rhs):
    """All solutions t (vectors of Fractions mod 1) of M*t = rhs (mod Z^n).

    M is an integer matrix (n x k, full column rank not required), rhs a
    vector of Fractions.  Returns (particular solutions list, kernel basis)
    where the full solution set is {p + sum c_i k_i mod 1 : c_i real} for each
    particular solution p; the particular list enumerates the finitely many
    torsion cosets.  Raises ValueError when the congruence is unsolvable.
    """
    n, k = len(M), len(M[0])
    U, D, V = snf(M)
    # M = U^-1 D V^-1, solve D s = U rhs (mod U Z^n = Z^n), t = V s
    ur = mat_vec(U, [Fraction(x) for x in rhs])
    r = 0
    while r < min(n, k) and D[r][r] != 0:
        r += 1
    parts = [[]]
    for i in range(k):
        if i < r:
            d = D[i][i]
            # d * s_i = ur_i (mod 1): s_i = ur_i/d + j/d for j = 0..d-1
            base = ur[i] / d
            parts = [p + [base + Fraction(j, d)] for p in parts for j in range(d)]
        else:
            parts = [p + [Fraction(0)] for p in parts]
    for i in range(k, n):
        # 0 = ur_i (mod 1) must hold
        if ur[i] % 1 != 0:
            raise ValueError("congruence unsolvable")
    for i in range(r, min(n, k)):
        if ur[i] % 1 != 0:
            raise ValueError("congruence unsolvable")
    kernel = []
    for i in range(r, k):
        kernel.append([Fraction(V[j][i]) for j in range(k)])
    sols = []
    for p in parts:
        t = [sum(Fraction(V[i][j]) * p[j] for j in range(k)) % 1 for i in range(k)]
        sols.append(t)
    # dedupe
    uniq = []
    for s in sols:
        if s not in uniq:
            uniq.append(s)
    return uniq, kernel
