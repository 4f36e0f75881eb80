"""The induced principal-series model at parahoric levels.

A vector of Ind_B^G(Lambda) fixed by a depth-1 parahoric J is a function
on the finite double-coset space B(Z_p)\\G(Z_p)/J, which is canonically
W / W_J (8 labels at Iwahori level, 4 at Siegel and Klingen, 1 spherical).
Values are Scalars; evaluation at an arbitrary g in G(Q) goes through the
exact Iwasawa decomposition g = b k and the normalized character
Lambda delta_B^{1/2} on b, whose diagonal is an exact p-power.

Hecke operators are formal sums c * [J t J]; their action, matrices,
characteristic polynomials, eigenspaces and the level-lowering trace maps
are all computed here.
"""

from __future__ import annotations

from .cosets import coset_cells, decompose_double_coset, quotient_cosets
from .group import (
    UnramifiedTorusCharacter,
    delta_B_half,
    iwasawa_BK,
    level_name,
    vp,
    weyl_group,
)
from .linalg import charpoly, mat_vec, nullspace

# ---------------------------------------------------------------------------
# labels


def labels(level):
    """Weyl indices of the minimal-length representatives of W / W_J."""
    return tuple(w.index for (w, _roots) in coset_cells("hyperspecial", level))


def label_lift(idx):
    return weyl_group()[idx].lift


def _perm_of_reduction(red, p):
    """Bruhat permutation of a matrix over F_p by rank profiles."""
    def rank(rows):
        rows = [list(r) for r in rows]
        rk, c = 0, 0
        nr = len(rows)
        nc = len(rows[0]) if rows else 0
        while rk < nr and c < nc:
            piv = next((i for i in range(rk, nr) if rows[i][c] % p), None)
            if piv is None:
                c += 1
                continue
            rows[rk], rows[piv] = rows[piv], rows[rk]
            inv = pow(rows[rk][c], -1, p)
            rows[rk] = [(x * inv) % p for x in rows[rk]]
            for i in range(nr):
                if i != rk and rows[i][c] % p:
                    f = rows[i][c]
                    rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[rk])]
            rk += 1
            c += 1
        return rk

    r = {}
    for i in range(5):
        for j in range(5):
            if i == 4 or j == 0:
                r[(i, j)] = 0
            else:
                r[(i, j)] = rank([red[k][:j] for k in range(i, 4)])
    perm = []
    for j in range(1, 5):
        hit = [i for i in range(4)
               if r[(i, j)] - r[(i + 1, j)] - r[(i, j - 1)] + r[(i + 1, j - 1)] == 1]
        assert len(hit) == 1
        perm.append(hit[0])
    return tuple(perm)


_label_cache = {}


def classify(k, prime, level):
    """The label (Weyl index of the min-length coset rep) of k in B\\K/J."""
    red = k.reduce_mod(prime)
    key = (red, prime, level_name(level))
    hit = _label_cache.get(key)
    if hit is not None:
        return hit
    perm = _perm_of_reduction(red, prime)
    W = weyl_group()
    w = next(x for x in W if x.perm == perm)
    from .cosets import _weyl_mul, _weyl_subgroup
    best = None
    for j in _weyl_subgroup(level):
        cand = _weyl_mul(w, W[j])
        if best is None or (cand.length, cand.index) < (best.length, best.index):
            best = cand
    _label_cache[key] = best.index
    return best.index


# ---------------------------------------------------------------------------
# induced vectors


class InducedVector:
    """Parahoric-invariant vector, stored by values on the flag labels."""

    __slots__ = ("level", "Lambda", "values")

    def __init__(self, level, Lambda, values):
        self.level = level_name(level)
        self.Lambda = Lambda
        self.values = dict(values)

    @property
    def ctx(self):
        return self.Lambda.ctx

    def value(self, idx):
        return self.values.get(idx, self.ctx.zero())

    def evaluate(self, g):
        """Value at an arbitrary g in G(Q): f(b k) = (Lambda delta^{1/2})(b) f(k)."""
        prime = self.ctx.prime
        b, k = iwasawa_BK(g, prime)
        exps = (vp(b.rows[0][0], prime), vp(b.rows[1][1], prime),
                vp(b.rows[0][0] * b.rows[3][3], prime))
        lbl = classify(k, prime, self.level)
        v = self.values.get(lbl)
        if v is None:
            return self.ctx.zero()
        return _char_delta_cached(self.Lambda, exps) * v

    def __add__(self, other):
        assert self.level == other.level
        vals = dict(self.values)
        for k, v in other.values.items():
            vals[k] = vals.get(k, self.ctx.zero()) + v
        return InducedVector(self.level, self.Lambda, vals)

    def __sub__(self, other):
        return self + other.scale(self.ctx.scalar(-1))

    def scale(self, c):
        return InducedVector(self.level, self.Lambda,
                             {k: v * c for k, v in self.values.items()})

    def __eq__(self, other):
        if self.level != other.level:
            return False
        keys = set(self.values) | set(other.values)
        return all((self.value(k) - other.value(k)).is_zero() for k in keys)

    def is_zero(self):
        return all(v.is_zero() for v in self.values.values())

    def as_list(self):
        return [self.value(i) for i in labels(self.level)]

    def proportionality(self, other):
        """c with self = c * other, or None."""
        keys = labels(self.level)
        c = None
        for k in keys:
            a, b = self.value(k), other.value(k)
            if b.is_zero():
                if not a.is_zero():
                    return None
                continue
            r = a / b
            if c is None:
                c = r
            elif not (c - r).is_zero():
                return None
        return c

    def validate(self):
        """Recheck well-definedness: the value at a label representative
        agrees with the stored value (construction invariant)."""
        for i in labels(self.level):
            got = self.evaluate(label_lift(i))
            if not (got - self.value(i)).is_zero():
                return False
        return True


_char_memo = {}


def _char_delta_cached(Lambda, exps):
    key = (id(Lambda), exps)
    hit = _char_memo.get(key)
    if hit is None:
        hit = Lambda.value(exps) * delta_B_half(exps, Lambda.ctx)
        _char_memo[key] = hit
    return hit


def standard_character(ctx) -> UnramifiedTorusCharacter:
    return UnramifiedTorusCharacter.standard(ctx)


def spherical_vector(Lambda, level="hyperspecial") -> InducedVector:
    """The G(Z_p)-fixed vector, value 1 on every flag label (viewed at the
    given level)."""
    return InducedVector(level, Lambda, {i: Lambda.ctx.one() for i in labels(level)})


def phi1_vector(Lambda) -> InducedVector:
    """Klingen-invariant vector supported on the identity cell, value p^3."""
    ctx = Lambda.ctx
    idx = labels("klingen")[0]
    assert weyl_group()[idx].length == 0
    return InducedVector("klingen", Lambda, {idx: ctx.p_power(6)})


# ---------------------------------------------------------------------------
# Hecke operators


class HeckeOperator:
    """prefactor * [J t J] acting on J-invariants by right translation."""

    __slots__ = ("name", "level", "t_exps", "prefactor")

    def __init__(self, name, level, t_exps, prefactor):
        self.name = name
        self.level = level_name(level)
        self.t_exps = tuple(t_exps)
        self.prefactor = prefactor  # Scalar

    def reps(self, prime, lift_slack=0):
        dec = decompose_double_coset(self.t_exps, self.level, prime,
                                     lift_slack=lift_slack)
        return dec.left_reps

    def __repr__(self):
        return f"HeckeOperator({self.name})"


def u1_sieg(ctx):
    return HeckeOperator("U1,Sieg", "siegel", (1, 1, 1), ctx.p_power(ctx.r1 + ctx.r2))


def u2_kl(ctx):
    return HeckeOperator("U2,Kl", "klingen", (2, 1, 2), ctx.p_power(2 * ctx.r1))


def u2_kl_prime(ctx, convention="early"):
    """The transpose operator at Klingen level: p^{r1} [Kl diag(1,p,p,p^2) Kl]
    ('early'); the alternative p^{-r2} normalization ('late') is kept for
    comparison -- only 'early' has alpha*beta/p^{r2+1} in its spectrum."""
    pref = ctx.p_power(-2 * ctx.r2) if convention == "late" else ctx.p_power(2 * ctx.r1)
    return HeckeOperator("U2,Kl'", "klingen", (0, 1, 2), pref)


def u1_iw(ctx):
    return HeckeOperator("U1,Iw", "borel", (1, 1, 1), ctx.p_power(ctx.r1 + ctx.r2))


def u2_iw(ctx):
    return HeckeOperator("U2,Iw", "borel", (2, 1, 2), ctx.p_power(2 * ctx.r1))


def spherical_t(ctx, kind):
    te = (1, 1, 1) if kind == 1 else (2, 1, 2)
    return HeckeOperator(f"T{kind}", "hyperspecial", te, ctx.one())


def hecke_apply(T: HeckeOperator, v: InducedVector, lift_slack=0) -> InducedVector:
    """(T v)(x) = prefactor * sum_i v(x g_i)."""
    if level_name(T.level) != v.level:
        raise ValueError(f"operator level {T.level} != vector level {v.level}")
    prime = v.ctx.prime
    reps = T.reps(prime, lift_slack=lift_slack)
    out = {}
    for lbl in labels(v.level):
        x = label_lift(lbl)
        acc = v.ctx.zero()
        for g in reps:
            acc = acc + v.evaluate(x * g)
        out[lbl] = acc * T.prefactor
    return InducedVector(v.level, v.Lambda, out)


def hecke_matrix(T: HeckeOperator, Lambda, lift_slack=0):
    """Matrix of T in the flag-label basis (column = image of basis vector)."""
    lbls = labels(T.level)
    cols = []
    for j in lbls:
        e = InducedVector(T.level, Lambda, {j: Lambda.ctx.one()})
        img = hecke_apply(T, e, lift_slack=lift_slack)
        cols.append([img.value(i) for i in lbls])
    return [[cols[j][i] for j in range(len(lbls))] for i in range(len(lbls))]


def apply_polynomial(T, poly, v):
    """poly = [c_d, ..., c_0] (Scalar coefficients): (c_d T^d + ... + c_0) v."""
    out = v.scale(poly[0])
    for c in poly[1:]:
        out = hecke_apply(T, out)
        out = out + v.scale(c)
    return out


def eigenvector(matrix, eigenvalue, Lambda, level) -> InducedVector:
    """Basis vector of a one-dimensional eigenspace; raises on degeneracy."""
    ctx = Lambda.ctx
    n = len(matrix)
    A = [[matrix[i][j] - (eigenvalue if i == j else ctx.zero()) for j in range(n)]
         for i in range(n)]
    basis = nullspace(A)
    if len(basis) == 0:
        raise ValueError("not an eigenvalue")
    if len(basis) > 1:
        raise ValueError("degenerate eigenvalue (numeric-mode coincidence?)")
    lbls = labels(level)
    return InducedVector(level, Lambda, dict(zip(lbls, basis[0])))


def hecke_charpoly(T, Lambda, lift_slack=0):
    return charpoly(hecke_matrix(T, Lambda, lift_slack=lift_slack))


def trace_to_level(v: InducedVector, to_level) -> InducedVector:
    """Sum of translates over (to-level)/(v.level) representatives."""
    prime = v.ctx.prime
    reps = quotient_cosets(prime, to_level, v.level)
    out = {}
    for lbl in labels(to_level):
        x = label_lift(lbl)
        acc = v.ctx.zero()
        for g in reps:
            acc = acc + v.evaluate(x * g)
        out[lbl] = acc
    return InducedVector(to_level, v.Lambda, out)


# ---------------------------------------------------------------------------
# the named eigenvectors (polynomial combinations of the spherical vector)


def w_sieg_alpha(ctx, Lambda=None):
    """alpha-eigenvector of U1,Sieg: alpha^{-3} (U-beta)(U-gamma)(U-delta) sph."""
    Lambda = Lambda or standard_character(ctx)
    sph = spherical_vector(Lambda, "siegel")
    T = u1_sieg(ctx)
    a = ctx.alpha()
    poly = _poly_from_roots(ctx, [ctx.beta(), ctx.gamma(), ctx.delta()])
    v = apply_polynomial(T, poly, sph)
    return v.scale((a ** 3).inverse())


def w_kl_alphabeta(ctx, Lambda=None, prime_op=False, convention="early",
                   variant_first_factor=False):
    """alpha*beta/p^{r2+1}-eigenvector at Klingen level (prime_op selects the
    transpose operator, giving the dual eigenvector).

    The three annihilated eigenvalues are {gamma*delta, alpha*gamma,
    beta*delta}/p^{r2+1}: the other eigenvalues of the operator.  (The
    1/(1 + gamma/alpha) prefactor is forced by the surviving factor
    1 - (gamma/alpha)^2 at the alpha*beta-component.)  Passing
    variant_first_factor=True replaces gamma*delta by beta*gamma; that
    combination is *not* an eigenvector and exists as a negative control.
    """
    Lambda = Lambda or standard_character(ctx)
    sph = spherical_vector(Lambda, "klingen")
    T = u2_kl_prime(ctx, convention) if prime_op else u2_kl(ctx)
    pr = ctx.p_power(-2 * (ctx.r2 + 1))
    first = ctx.beta() * ctx.gamma() if variant_first_factor else ctx.gamma() * ctx.delta()
    c1 = first * pr
    c2 = ctx.alpha() * ctx.gamma() * pr
    c3 = ctx.beta() * ctx.delta() * pr
    lam = ctx.alpha() * ctx.beta() * pr
    poly = _poly_from_roots(ctx, [c1, c2, c3])
    v = apply_polynomial(T, poly, sph)
    pref = (ctx.one() + ctx.gamma() / ctx.alpha()).inverse() * (lam ** 3).inverse()
    return v.scale(pref)


def _poly_from_roots(ctx, roots):
    """Monic expansion of prod (X - r), highest coefficient first."""
    asc = [ctx.one()]  # coefficients by ascending degree
    for r in roots:
        new = [ctx.zero()] * (len(asc) + 1)
        for i, c in enumerate(asc):
            new[i + 1] = new[i + 1] + c
            new[i] = new[i] - c * r
        asc = new
    return asc[::-1]
