"""Small exact linear algebra over the Scalar field.

Dimensions never exceed 8 (the Iwahori-invariant space), so the emphasis
is on exactness and controlled intermediate growth, not asymptotics:

  * det via fraction-free Bareiss elimination (exact divisions by previous
    pivots, valid over any integral domain);
  * characteristic polynomial via the division-free Samuelson-Berkowitz
    scheme;
  * kernels and linear solves by ordinary pivoted elimination over the
    field, with sympy keeping every fraction cancelled.
"""

from __future__ import annotations


def mat_mul(A, B):
    n, m, k = len(A), len(B[0]), len(B)
    return [[sum((A[i][l] * B[l][j] for l in range(1, k)), A[i][0] * B[0][j])
             for j in range(m)] for i in range(n)]


def mat_vec(A, v):
    return [sum((A[i][l] * v[l] for l in range(1, len(v))), A[i][0] * v[0])
            for i in range(len(A))]


def identity_matrix(ctx, n):
    return [[ctx.one() if i == j else ctx.zero() for j in range(n)] for i in range(n)]


def bareiss_det(M):
    """Fraction-free determinant; M is a square matrix of Scalars."""
    n = len(M)
    A = [row[:] for row in M]
    ctx = M[0][0].ctx
    prev = ctx.one()
    sign = 1
    for k in range(n - 1):
        if A[k][k].is_zero():
            piv = next((i for i in range(k + 1, n) if not A[i][k].is_zero()), None)
            if piv is None:
                return ctx.zero()
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[k][k] * A[i][j] - A[i][k] * A[k][j]) / prev
            A[i][k] = ctx.zero()
        prev = A[k][k]
    det = A[n - 1][n - 1]
    return det if sign == 1 else -det


def charpoly(M):
    """Samuelson-Berkowitz: coefficients [1, c_{n-1}, ..., c_0] of
    X^n + c_{n-1} X^{n-1} + ... + c_0 (monic, division-free)."""
    n = len(M)
    ctx = M[0][0].ctx
    poly = [ctx.one()]
    for k in range(1, n + 1):
        # Toeplitz column for the leading k x k principal submatrix
        a = M[k - 1][k - 1]
        R = [M[k - 1][j] for j in range(k - 1)]
        C = [M[i][k - 1] for i in range(k - 1)]
        Akk = [[M[i][j] for j in range(k - 1)] for i in range(k - 1)]
        col = [ctx.one(), -a]
        v = C[:]
        for _ in range(k - 1):
            col.append(-_dot(R, v, ctx))
            v = mat_vec(Akk, v) if Akk else v
        # multiply polynomials: poly (length k) by col (length k+1)
        new = [ctx.zero()] * (k + 1)
        for i, c in enumerate(poly):
            for j, d in enumerate(col):
                if i + j <= k:
                    new[i + j] = new[i + j] + c * d
        poly = new
    return poly


def _dot(x, y, ctx):
    out = ctx.zero()
    for a, b in zip(x, y):
        out = out + a * b
    return out


def charpoly_eval(coeffs, x):
    out = x.ctx.zero()
    for c in coeffs:
        out = out * x + c
    return out


def nullspace(M):
    """Basis of the right kernel over the Scalar field."""
    n, m = len(M), len(M[0])
    ctx = M[0][0].ctx
    A = [row[:] for row in M]
    pivots = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if not A[i][c].is_zero()), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = A[r][c].inverse()
        A[r] = [x * inv for x in A[r]]
        for i in range(n):
            if i != r and not A[i][c].is_zero():
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == n:
            break
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for fc in free:
        v = [ctx.zero()] * m
        v[fc] = ctx.one()
        for row_idx, pc in enumerate(pivots):
            v[pc] = -A[row_idx][fc]
        basis.append(v)
    return basis


def solve_right(M, b):
    """One solution x of M x = b, or None if inconsistent."""
    n, m = len(M), len(M[0])
    ctx = M[0][0].ctx
    A = [M[i][:] + [b[i]] for i in range(n)]
    pivots = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if not A[i][c].is_zero()), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = A[r][c].inverse()
        A[r] = [x * inv for x in A[r]]
        for i in range(n):
            if i != r and not A[i][c].is_zero():
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    for i in range(r, n):
        if not A[i][m].is_zero():
            return None
    x = [ctx.zero()] * m
    for row_idx, pc in enumerate(pivots):
        x[pc] = A[row_idx][m]
    return x


def mat_inverse(M):
    n = len(M)
    ctx = M[0][0].ctx
    cols = []
    for j in range(n):
        e = [ctx.one() if i == j else ctx.zero() for i in range(n)]
        x = solve_right(M, e)
        if x is None:
            raise ZeroDivisionError("matrix is singular")
        cols.append(x)
    return [[cols[j][i] for j in range(n)] for i in range(n)]
