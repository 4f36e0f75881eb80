"""Whittaker-model values on the torus.

Three ingredients:

  * the closed Casselman-Shalika form for the spherical GSp4 Whittaker
    function: W(t_lambda) = delta_B^{1/2}(t_lambda) * chi_lambda(Satake),
    with chi_lambda the dual-group character computed as a Weyl
    alternating sum over the coweight lattice (rho-check shifted so all
    exponents stay integral), and W = 0 off the dominant cone;

  * exact evaluation of Whittaker functions of Hecke translates of the
    spherical vector.  A translate sum is kept as states
    (psi-coefficient, torus exponents, exact K-part); extending by the
    left-coset representatives of an operator refactors through the
    N*T*K decomposition, twisting psi by the accumulated torus part.
    States merge when their K-parts lie in the same Iwahori coset (the
    full-flag invariant mod p), which keeps every in-scope computation
    tiny;

  * an independent oracle: the unique solution of the two spherical
    Hecke eigenvalue recursions (eigenvalues read off the induced model),
    with off-cone vanishing derived from the psi-twist invariance, not
    assumed.  This pins down the alternating-sum dictionary.
"""

from __future__ import annotations

from fractions import Fraction

from .cosets import decompose_double_coset, quotient_cosets
from .group import (
    GroupElement,
    TWO_RHO_CHECK,
    TorusElement,
    iwasawa_NTK,
    psi_N,
    weyl_group,
)
from .model import (
    InducedVector,
    hecke_apply,
    labels,
    spherical_vector,
    spherical_t,
    standard_character,
)

# ---------------------------------------------------------------------------
# closed forms


def is_dominant(exps):
    n1, n2, n0 = exps
    return n1 - n2 >= 0 and 2 * n2 - n0 >= 0


def _weyl_sum(Lambda, exps):
    """sum over W of sign(w) * Lambda(w(lambda + rho^) - rho^), doubled
    lattice arithmetic so the rho-check shift stays integral."""
    ctx = Lambda.ctx
    two = tuple(2 * e + r for e, r in zip(exps, TWO_RHO_CHECK))
    total = ctx.zero()
    for w in weyl_group():
        img = w.apply(two)
        shifted = tuple(i - r for i, r in zip(img, TWO_RHO_CHECK))
        assert all(x % 2 == 0 for x in shifted)
        mu = tuple(x // 2 for x in shifted)
        term = Lambda.value(mu)
        total = total + (term if w.sign == 1 else -term)
    return total


def cs_gsp4(exps, Lambda=None, ctx=None):
    """Normalized spherical Whittaker value at the torus point with the
    given exponents; zero off the dominant cone."""
    if Lambda is None:
        Lambda = standard_character(ctx)
    ctx = Lambda.ctx
    if not is_dominant(exps):
        return ctx.zero()
    from .group import delta_B_half
    num = _weyl_sum(Lambda, exps)
    den = _weyl_sum(Lambda, (0, 0, 0))
    return delta_B_half(exps, ctx) * num / den


def cs_gl2(n, ctx):
    """Torus values of the normalized spherical Whittaker function of the
    GL2 constituent: p^{-n(r1+r2+4)/2} (a^n + a^{n-1} b + ... + b^n)."""
    if n < 0:
        return ctx.zero()
    a, b = ctx.alpha(), ctx.beta()
    h = ctx.zero()
    for i in range(n + 1):
        h = h + a**i * b ** (n - i)
    return ctx.p_power(-n * (ctx.r1 + ctx.r2 + 4)) * h


def spherical_whittaker_constant(Lambda):
    """Image of the normalized spherical function in the Whittaker model:
    prod over positive coroots of (1 - p^{-1} Lambda(coroot))."""
    ctx = Lambda.ctx
    coroots = [(1, -1, 0), (0, 1, 0), (1, 1, 0), (1, 0, 0)]
    out = ctx.one()
    pinv = ctx.p_power(-2)
    for c in coroots:
        out = out * (ctx.one() - pinv * Lambda.value(c))
    return out


# ---------------------------------------------------------------------------
# translate sums


def _flag_key(k: GroupElement, p):
    """Canonical invariant of the Iwahori coset k Iw(p): the mod-p flag
    (normalized first column, reduced column span of the first two)."""
    red = k.reduce_mod(p)
    col1 = [red[i][0] % p for i in range(4)]
    piv = next(i for i in range(4) if col1[i])
    inv = pow(col1[piv], -1, p)
    col1 = tuple((x * inv) % p for x in col1)
    # reduced echelon form of the span of columns 1, 2 (4x2, column ops)
    c1 = [red[i][0] % p for i in range(4)]
    c2 = [red[i][1] % p for i in range(4)]
    cols = [c1, c2]
    pivots = []
    for i in range(4):
        src = next((j for j in range(len(cols)) if j not in [q[0] for q in pivots]
                    and cols[j][i] % p), None)
        if src is None:
            continue
        inv = pow(cols[src][i], -1, p)
        cols[src] = [(x * inv) % p for x in cols[src]]
        for j in range(len(cols)):
            if j != src and cols[j][i] % p:
                f = cols[j][i]
                cols[j] = [(x - f * y) % p for x, y in zip(cols[j], cols[src])]
        pivots.append((src, i))
        if len(pivots) == 2:
            break
    plane = tuple(tuple(cols[src][i] for i in range(4)) for (src, _row) in sorted(pivots, key=lambda q: q[1]))
    return (col1, plane)


class TranslateSum:
    """Formal sum of right-translates of the spherical Whittaker vector,
    factored as psi-coefficient * (torus part) * (K-part)."""

    def __init__(self, ctx, states=None):
        self.ctx = ctx
        # key -> [coeff Scalar, t_exps, k_exact]
        self.states = states if states is not None else {}

    @staticmethod
    def seed(ctx, x: GroupElement):
        n, t, k = iwasawa_NTK(x, ctx.prime)
        psi = psi_N(n, ctx.prime, ctx)
        key = (t.exps, _flag_key(k, ctx.prime))
        return TranslateSum(ctx, {key: [psi, t.exps, k]})

    @staticmethod
    def seed_torus(ctx, exps):
        return TranslateSum.seed(ctx, TorusElement(*exps).embed(ctx.prime))

    def _add_state(self, coeff, t_exps, k):
        key = (t_exps, _flag_key(k, self.ctx.prime))
        cur = self.states.get(key)
        if cur is None:
            self.states[key] = [coeff, t_exps, k]
        else:
            cur[0] = cur[0] + coeff

    def extend(self, reps, prefactor=None):
        """Right-multiply by a sum of exact representatives (one Hecke
        operator application, or a trace stage)."""
        ctx = self.ctx
        p = ctx.prime
        out = TranslateSum(ctx)
        for (coeff, t_exps, k) in self.states.values():
            if coeff.is_zero():
                continue
            for g in reps:
                n2, t2, k2 = iwasawa_NTK(k * g, p)
                # psi twisted by the accumulated torus part
                x = n2.rows[0][1] * Fraction(p) ** (t_exps[0] - t_exps[1])
                y = n2.rows[1][2] * Fraction(p) ** (2 * t_exps[1] - t_exps[2])
                tw = ctx.psi(x) * ctx.psi(y)
                new_exps = tuple(a + b for a, b in zip(t_exps, t2.exps))
                out._add_state(coeff * tw, new_exps, k2)
        if prefactor is not None:
            for st in out.states.values():
                st[0] = st[0] * prefactor
        return out

    def extend_op(self, op):
        return self.extend(op.reps(self.ctx.prime), op.prefactor)

    def value(self, Lambda):
        """Collapse: sum of coeff * cs_gsp4(torus part)."""
        total = self.ctx.zero()
        for (coeff, t_exps, _k) in self.states.values():
            if not coeff.is_zero():
                total = total + coeff * cs_gsp4(t_exps, Lambda)
        return total


def whittaker_of_translate(stages, point_exps, ctx, Lambda=None):
    """Whittaker value at a torus point of a composition of operator
    polynomials applied to the spherical vector.

    stages: list of (op, poly) pairs, outermost first, poly = [c_d, ..., c_0]
    Scalar coefficients of a polynomial in the operator; a stage may also be
    ("trace", from_level) summing over G(Z_p)/from_level.
    """
    Lambda = Lambda or standard_character(ctx)
    seed = TranslateSum.seed_torus(ctx, point_exps)
    return _eval_stages(seed, list(stages), Lambda)


def _eval_stages(state, stages, Lambda):
    ctx = state.ctx
    if not stages:
        return state.value(Lambda)
    head, *rest = stages
    if head[0] == "trace":
        reps = quotient_cosets(ctx.prime, "hyperspecial", head[1])
        return _eval_stages(state.extend(reps), rest, Lambda)
    op, poly = head
    total = ctx.zero()
    cur = state
    for i, c in enumerate(reversed(poly)):  # c_0 first, with U^i
        if not c.is_zero():
            total = total + c * _eval_stages(cur, rest, Lambda)
        if i < len(poly) - 1:
            cur = cur.extend_op(op)
    return total


# ---------------------------------------------------------------------------
# the recursion oracle


class _WTable:
    """Unknowns W~(m1, m2) on the (central-character-reduced) exponent
    lattice; W(n1,n2,n0) = omega(p)^{n2} W~(n1-n2, 2 n2 - n0)."""

    def __init__(self, ctx, omega):
        self.ctx = ctx
        self.omega = omega
        self.known = {}

    def reduce(self, exps):
        n1, n2, n0 = exps
        return (n1 - n2, 2 * n2 - n0), n2

    def lookup(self, exps):
        """(scalar multiplier, grid key or None-if-derived-zero)."""
        (m1, m2), shift = self.reduce(exps)
        if m1 < 0 or m2 < 0:
            # psi-twist vanishing: for a unit coordinate u in K cap N,
            # W(t) = W(t u) = psi(t u t^{-1}) W(t) with a nontrivial root
            # of unity, forcing W(t) = 0
            return None, None
        return self.omega**shift, (m1, m2)


def solve_spherical_recursion(ctx, max_height=2, Lambda=None, check_all=True):
    """Solve the two spherical Hecke recursions for the torus values of the
    normalized spherical Whittaker function; returns {(m1, m2): Scalar} on
    the dominant grid [0..max_height]^2.

    Everything is derived: off-cone vanishing from the psi-twist argument,
    eigenvalues from the induced model, and the system is checked to be
    consistent (every equation on the probe grid holds for the solution).
    """
    Lambda = Lambda or standard_character(ctx)
    sph = spherical_vector(Lambda, "hyperspecial")
    lbl = labels("hyperspecial")[0]
    gens = []
    for kind in (1, 2):
        T = spherical_t(ctx, kind)
        ev = hecke_apply(T, sph).value(lbl)
        gens.append((T, ev))
    omega = Lambda.central_value()
    table = _WTable(ctx, omega)
    table.known[(0, 0)] = ctx.one()

    # precompute equation data: for each generator, the factored translates
    # of t_lambda * g_i as (psi-argument builders, exponent shifts)
    eq_data = []
    for (T, ev) in gens:
        reps = T.reps(ctx.prime)
        parts = []
        for g in reps:
            n2, t2, _k = iwasawa_NTK(g, ctx.prime)
            parts.append((n2.rows[0][1], n2.rows[1][2], t2.exps))
        eq_data.append((ev, parts))

    lo, hi = -2, max_height + 4
    pending = [(lam, gi) for lam in _grid(lo, hi) for gi in range(2)]
    progressed = True
    while progressed:
        progressed = False
        remaining = []
        for (lam, gi) in pending:
            ev, parts = eq_data[gi]
            done = _try_equation(table, ctx, lam, ev, parts)
            if done:
                progressed = True
            else:
                remaining.append((lam, gi))
        pending = remaining
    target = {(m1, m2) for m1 in range(max_height + 1) for m2 in range(max_height + 1)}
    if not target <= set(table.known):
        raise ValueError("underdetermined system at the requested height; "
                         "increase the probe height")
    if check_all:
        for (lam, gi) in [(l, g) for l in _grid(lo, max_height) for g in range(2)]:
            ev, parts = eq_data[gi]
            res = _equation_residual(table, ctx, lam, ev, parts)
            if res is not None and not res.is_zero():
                raise AssertionError(f"recursion inconsistent at {lam}")
    return {k: v for k, v in table.known.items() if k in target}


def _grid(lo, hi):
    # probe lattice points (m1, m2, represented by canonical lifts)
    out = []
    for m1 in range(lo, hi + 1):
        for m2 in range(lo, hi + 1):
            out.append((m1, 0, -m2))
    return out


def _equation_terms(table, ctx, lam, parts):
    """[(multiplier, grid-key-or-None, exps)] for sum_i W(lam + shift_i)."""
    terms = []
    for (x_raw, y_raw, shift) in parts:
        x = x_raw * Fraction(ctx.prime) ** (lam[0] - lam[1])
        y = y_raw * Fraction(ctx.prime) ** (2 * lam[1] - lam[2])
        tw = ctx.psi(x) * ctx.psi(y)
        exps = tuple(a + b for a, b in zip(lam, shift))
        mult, key = table.lookup(exps)
        terms.append((tw, mult, key))
    return terms


def _try_equation(table, ctx, lam, ev, parts):
    """If the equation at lam has exactly one unknown, solve for it.
    Returns True when the equation is fully used up (solved or redundant)."""
    lhs_mult, lhs_key = table.lookup(lam)
    terms = _equation_terms(table, ctx, lam, parts)
    unknown = None
    acc = ctx.zero()
    for (tw, mult, key) in terms:
        if key is None:
            continue
        if key in table.known:
            acc = acc + tw * mult * table.known[key]
        else:
            if unknown is not None and unknown[0] != key:
                return False
            coeff = tw * mult
            if unknown is None:
                unknown = (key, coeff)
            else:
                unknown = (key, unknown[1] + coeff)
    rhs_known = lhs_key is not None and lhs_key in table.known
    rhs_val = ctx.zero() if lhs_key is None else (
        ev * lhs_mult * table.known[lhs_key] if rhs_known else None)
    if unknown is None:
        return True  # nothing to solve here; consistency checked later
    key, coeff = unknown
    if rhs_val is None:
        return False
    if coeff.is_zero():
        return False
    table.known[key] = (rhs_val - acc) / coeff
    return True


def _equation_residual(table, ctx, lam, ev, parts):
    lhs_mult, lhs_key = table.lookup(lam)
    terms = _equation_terms(table, ctx, lam, parts)
    acc = ctx.zero()
    for (tw, mult, key) in terms:
        if key is None:
            continue
        if key not in table.known:
            return None
        acc = acc + tw * mult * table.known[key]
    if lhs_key is None:
        rhs = ctx.zero()
    elif lhs_key in table.known:
        rhs = ev * lhs_mult * table.known[lhs_key]
    else:
        return None
    return acc - rhs


# ---------------------------------------------------------------------------
# GL2 analogue (rank-1 cross-check of the same method)


def solve_gl2_recursion(ctx, max_n=4):
    """The unique solution of the GL2 T_p recursion with off-support
    vanishing; returns [W(0), ..., W(max_n)] matching cs_gl2."""
    p = ctx.prime
    # Satake values of the GL2 constituent: mu_i(p) = p^{-w/2} * (a or b)
    mu1 = ctx.p_power(-ctx.w) * ctx.alpha()
    mu2 = ctx.p_power(-ctx.w) * ctx.beta()
    lam = ctx.p_power(1) * (mu1 + mu2)
    omega = mu1 * mu2
    W = {0: ctx.one()}

    def get(n):
        if n < 0:
            return ctx.zero()  # psi-twist vanishing, as in rank 2
        return W[n]

    for n in range(0, max_n + 2):
        # equation at n: lam W(n) = sum_{c mod p} psi(c p^n) W(n+1) + omega W(n-1)
        # for n >= 0 the psi sum is p
        rhs = lam * get(n) - omega * get(n - 1)
        W[n + 1] = rhs / ctx.scalar(p)
    # consistency at negative points: equation at n = -1 must hold
    s = ctx.zero()
    for c in range(p):
        s = s + ctx.psi(Fraction(c, p))
    res = s * get(0) - (lam * ctx.zero() - omega * ctx.zero())
    if not res.is_zero():
        raise AssertionError("gl2 recursion inconsistent at the boundary")
    return [W[n] for n in range(max_n + 1)]
