"""The group GSp4 over Q and its p-adic structure.

Exact 4x4 symplectic-similitude matrices over Q, the C2 root datum on the
diagonal torus, the eight Weyl elements, parahoric block patterns, and the
two decompositions that drive everything downstream:

  * iwasawa_BK:  g = b * k   (b upper triangular, k in G(Z_p))
  * iwasawa_NTK: g = n * t * k  (n unipotent, t a p-power torus element)

Both are computed by exact rational row reduction of the bottom-up flag,
with the torus valuations forced by contents of minors; in particular b
comes out with *exact* p-power diagonal, so no unit-part bookkeeping is
needed when evaluating unramified characters.

Torus exponents (n1, n2, n0) encode diag(p^n1, p^n2, p^(n0-n2), p^(n0-n1)),
with n0 the similitude valuation.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .scalars import CyclotomicNumber

# symplectic form: antidiagonal (1, 1, -1, -1)
J = ((0, 0, 0, 1), (0, 0, 1, 0), (0, -1, 0, 0), (-1, 0, 0, 0))

_ZERO4 = tuple(Fraction(0) for _ in range(4))


def _mat(rows):
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def _mat_mul(x, y):
    return tuple(
        tuple(sum(x[i][l] * y[l][j] for l in range(4)) for j in range(4))
        for i in range(4)
    )


def _pair(x, y):
    """Symplectic pairing of row vectors: x J y^T."""
    return x[0] * y[3] + x[1] * y[2] - x[2] * y[1] - x[3] * y[0]


def vp(x, p):
    """p-adic valuation of a rational (None for 0)."""
    x = Fraction(x)
    if x == 0:
        return None
    v = 0
    n = x.numerator
    while n % p == 0:
        n //= p
        v += 1
    if v:
        return v
    d = x.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def _content(vec, p):
    vals = [vp(x, p) for x in vec if x != 0]
    if not vals:
        return None
    return min(vals)


class GroupElement:
    """Exact rational element of GSp4(Q) with cached similitude factor."""

    __slots__ = ("rows", "similitude")

    def __init__(self, rows):
        rows = _mat(rows)
        gtjg = _mat_mul(_mat_mul(_transpose(rows), _mat(J)), rows)
        nu = gtjg[0][3]
        if nu == 0:
            raise ValueError("not invertible")
        for i in range(4):
            for j in range(4):
                if gtjg[i][j] != nu * J[i][j]:
                    raise ValueError("matrix is not symplectic-similitude")
        self.rows = rows
        self.similitude = nu

    def __mul__(self, other):
        return GroupElement(_mat_mul(self.rows, other.rows))

    def inverse(self):
        # g^{-1} = nu^{-1} J^{-1} g^T J
        jm = _mat(J)
        jinv = tuple(tuple(Fraction(x) for x in row) for row in (
            (0, 0, 0, -1), (0, 0, -1, 0), (0, 1, 0, 0), (1, 0, 0, 0)))
        m = _mat_mul(_mat_mul(jinv, _transpose(self.rows)), jm)
        inv = tuple(tuple(x / self.similitude for x in row) for row in m)
        return GroupElement(inv)

    def __eq__(self, other):
        return isinstance(other, GroupElement) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def is_p_integral(self, p):
        return all(x.denominator % p != 0 for row in self.rows for x in row)

    def in_maximal_compact(self, p):
        """p-integral with p-unit similitude, i.e. in G(Z_p)."""
        return self.is_p_integral(p) and vp(self.similitude, p) == 0

    def reduce_mod(self, pn):
        """Entries mod p^n (requires integrality at the relevant prime)."""
        out = []
        for row in self.rows:
            r = []
            for x in row:
                den_inv = pow(x.denominator, -1, pn)
                r.append((x.numerator * den_inv) % pn)
            out.append(tuple(r))
        return tuple(out)

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in row) for row in self.rows)
        return f"GroupElement([{body}])"


def _transpose(rows):
    return tuple(tuple(rows[j][i] for j in range(4)) for i in range(4))


def identity():
    return GroupElement([[1 if i == j else 0 for j in range(4)] for i in range(4)])


class TorusElement:
    """diag(p^n1, p^n2, p^(n0-n2), p^(n0-n1)) by its exponents."""

    __slots__ = ("n1", "n2", "n0")

    def __init__(self, n1, n2, n0):
        self.n1, self.n2, self.n0 = int(n1), int(n2), int(n0)

    @property
    def exps(self):
        return (self.n1, self.n2, self.n0)

    def diag_exps(self):
        return (self.n1, self.n2, self.n0 - self.n2, self.n0 - self.n1)

    def embed(self, p):
        d = self.diag_exps()
        return GroupElement([[Fraction(p) ** d[i] if i == j else 0 for j in range(4)]
                             for i in range(4)])

    def __mul__(self, other):
        return TorusElement(self.n1 + other.n1, self.n2 + other.n2, self.n0 + other.n0)

    def inverse(self):
        return TorusElement(-self.n1, -self.n2, -self.n0)

    def __eq__(self, other):
        return self.exps == other.exps

    def __hash__(self):
        return hash(self.exps)

    def __repr__(self):
        return f"TorusElement{self.exps}"


# ---------------------------------------------------------------------------
# root datum of C2 with similitude


class Root:
    __slots__ = ("name", "functional", "positive", "_build")

    def __init__(self, name, functional, positive, build):
        self.name = name
        self.functional = functional  # value on torus exponents (n1, n2, n0)
        self.positive = positive
        self._build = build

    def pairing(self, exps):
        f = self.functional
        return f[0] * exps[0] + f[1] * exps[1] + f[2] * exps[2]

    def element(self, c):
        return GroupElement(self._build(Fraction(c)))

    def __repr__(self):
        return f"Root({self.name})"


def _build_from_slots(slots):
    def build(c):
        rows = [[Fraction(1 if i == j else 0) for j in range(4)] for i in range(4)]
        for (i, j, sign) in slots:
            rows[i][j] = sign * c
        return rows
    return build


def _make_roots():
    # entry slots (0-indexed) with signs; signs are pinned by the symplectic
    # identity, asserted at import below
    data = [
        ("alpha", (1, -1, 0), [(0, 1, 1), (2, 3, -1)]),
        ("beta", (0, 2, -1), [(1, 2, 1)]),
        ("alpha+beta", (1, 1, -1), [(0, 2, 1), (1, 3, 1)]),
        ("2alpha+beta", (2, 0, -1), [(0, 3, 1)]),
    ]
    roots = []
    for name, func, slots in data:
        roots.append(Root(name, func, True, _build_from_slots(slots)))
        neg = [(j, i, s) for (i, j, s) in slots]
        roots.append(Root("-" + name, tuple(-x for x in func), False,
                          _build_from_slots(neg)))
    return tuple(roots)


ROOTS = _make_roots()
POSITIVE_ROOTS = tuple(r for r in ROOTS if r.positive)
ROOT_BY_NAME = {r.name: r for r in ROOTS}

# half-sum of positive coroots, doubled to stay integral: 2*rho^vee
TWO_RHO_CHECK = (3, 1, 0)
# sum of positive roots as a functional on exponents: delta_B(t) = |.|^this
SUM_POS_ROOTS = (4, 2, -3)

for _r in ROOTS:
    _g = _r.element(Fraction(7, 1))
    assert _g.similitude == 1
    # torus conjugation scales the coordinate by p^{<r, lambda>}
    _t = TorusElement(3, 2, 4).embed(5)
    _c = _t * _g * _t.inverse()
    _expect = _r.element(Fraction(7) * Fraction(5) ** _r.pairing((3, 2, 4)))
    assert _c == _expect, _r.name


class WeylElement:
    __slots__ = ("index", "action", "perm", "sign", "length", "lift")

    def __init__(self, index, action, perm, sign, length, lift):
        self.index = index
        self.action = action      # 3x3 integer matrix on torus exponents
        self.perm = perm          # permutation of diagonal slots (tuple image)
        self.sign = sign
        self.length = length
        self.lift = lift          # GroupElement representative

    def apply(self, exps):
        m = self.action
        return tuple(m[i][0] * exps[0] + m[i][1] * exps[1] + m[i][2] * exps[2]
                     for i in range(3))

    def __repr__(self):
        return f"WeylElement({self.index}, perm={self.perm}, len={self.length})"


def _perm_of(g):
    """Permutation induced on diagonal slots by conjugation of torus elements."""
    perm = []
    for j in range(4):
        col = [i for i in range(4) if g.rows[i][j] != 0]
        assert len(col) == 1
        perm.append(col[0])
    return tuple(perm)


@lru_cache(maxsize=1)
def weyl_group():
    """The eight Weyl elements, generated by the two simple reflections."""
    s_alpha_lift = GroupElement([[0, 1, 0, 0], [1, 0, 0, 0],
                                 [0, 0, 0, 1], [0, 0, 1, 0]])
    s_beta_lift = GroupElement([[1, 0, 0, 0], [0, 0, 1, 0],
                                [0, -1, 0, 0], [0, 0, 0, 1]])
    s_alpha = ((0, 1, 0), (1, 0, 0), (0, 0, 1))
    s_beta = ((1, 0, 0), (0, -1, 1), (0, 0, 1))
    gens = [(s_alpha, s_alpha_lift), (s_beta, s_beta_lift)]
    ident = (((1, 0, 0), (0, 1, 0), (0, 0, 1)), identity())
    seen = {ident[0]: ident}
    frontier = [ident]
    while frontier:
        new = []
        for act, lift in frontier:
            for gact, glift in gens:
                nact = tuple(tuple(sum(gact[i][k] * act[k][j] for k in range(3))
                                   for j in range(3)) for i in range(3))
                if nact not in seen:
                    entry = (nact, glift * lift)
                    seen[nact] = entry
                    new.append(entry)
        frontier = new
    assert len(seen) == 8
    elems = []
    for act, lift in seen.values():
        length = sum(1 for r in POSITIVE_ROOTS
                     if _image_functional(r, act)[0] < 0)
        det = _det3(act)
        elems.append((length, _perm_of(lift), act, lift, det))
    elems.sort(key=lambda e: (e[0], e[1]))
    out = []
    for idx, (length, perm, act, lift, det) in enumerate(elems):
        out.append(WeylElement(idx, act, perm, det, length, lift))
    return tuple(out)


def _det3(m):
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def _image_functional(root, act):
    """(sign, root) of w(root): the functional r o w^{-1}... computed as the
    functional whose pairing with w(lambda) matches r's pairing with lambda.

    Returns (+1/-1, matched_root) where the image functional equals
    sign * matched_root, with matched_root positive.
    """
    # f_img(mu) = f(w^{-1} mu); equivalently pair f with columns of w^{-1}.
    # Cheaper: test against all roots using several lattice points.
    probes = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    img = tuple(sum(root.functional[i] * _inv3(act)[i][j] for i in range(3))
                for j in range(3))
    for r in POSITIVE_ROOTS:
        if img == r.functional:
            return (1, r)
        if img == tuple(-x for x in r.functional):
            return (-1, r)
    raise AssertionError("Weyl image is not a root")


@lru_cache(maxsize=None)
def _inv3_cached(m):
    d = _det3(m)
    assert d in (1, -1)
    cof = tuple(tuple(
        ((m[(j + 1) % 3][(i + 1) % 3] * m[(j + 2) % 3][(i + 2) % 3]
          - m[(j + 1) % 3][(i + 2) % 3] * m[(j + 2) % 3][(i + 1) % 3]) * d)
        for j in range(3)) for i in range(3))
    return cof


def _inv3(m):
    return _inv3_cached(m)


def weyl_image_root(w, root):
    """w(root) as (sign, positive_root)."""
    return _image_functional(root, w.action)


def long_weyl():
    return max(weyl_group(), key=lambda w: w.length)


# ---------------------------------------------------------------------------
# parabolic block patterns and congruence subgroups

# zero slots (0-indexed) of each standard parabolic's block pattern
_PATTERNS = {
    "borel": [(1, 0), (2, 0), (3, 0), (2, 1), (3, 1), (3, 2)],
    "siegel": [(2, 0), (2, 1), (3, 0), (3, 1)],
    "klingen": [(1, 0), (2, 0), (3, 0), (3, 1), (3, 2)],
    "hyperspecial": [],
}
_ALIASES = {"iwahori": "borel", "iw": "borel", "b": "borel",
            "sieg": "siegel", "kl": "klingen", "k": "hyperspecial",
            "g": "hyperspecial"}


def level_name(which):
    name = which.lower()
    name = _ALIASES.get(name, name)
    if name not in _PATTERNS:
        raise ValueError(f"unknown level {which!r}")
    return name


def pattern_zero_slots(which):
    return tuple(_PATTERNS[level_name(which)])


def parabolic_membership(g: GroupElement, which, depth, prime):
    """Is g in the depth-r congruence subgroup of the given parabolic shape?

    The subgroup is the preimage in G(Z_p) of the parabolic's points mod
    p^depth; depth 0 is G(Z_p) itself.
    """
    if not g.is_p_integral(prime):
        raise ValueError("element is not p-integral")
    if not g.in_maximal_compact(prime):
        return False
    if depth == 0:
        return True
    pn = prime**depth
    red = g.reduce_mod(pn)
    return all(red[i][j] % pn == 0 for (i, j) in pattern_zero_slots(which))


# ---------------------------------------------------------------------------
# Iwasawa decompositions (exact, by bottom-up symplectic row reduction)


def _pivot_index(vec, p):
    """Index of a minimal-valuation entry (unit after scaling)."""
    best, arg = None, None
    for i, x in enumerate(vec):
        if x == 0:
            continue
        v = vp(x, p)
        if best is None or v < best:
            best, arg = v, i
    return arg, best


def _reduce_by(x, w, piv):
    """x - (x[piv]/w[piv]) * w; kills slot piv."""
    c = x[piv] / w[piv]
    return tuple(a - c * b for a, b in zip(x, w)), c


def iwasawa_BK(g: GroupElement, prime: int):
    """g = b * k with b upper triangular (exact p-power diagonal) and
    k in G(Z_p).  Works for every g in G(Q)."""
    p = prime
    r1, r2, r3, r4 = g.rows
    vnu = vp(g.similitude, p)

    a4 = _content(r4, p)
    w4 = tuple(x / Fraction(p) ** a4 for x in r4)
    piv4, _ = _pivot_index(w4, p)

    r3w, mu = _reduce_by(r3, w4, piv4)
    a3 = _content(r3w, p)
    if a3 is None:
        raise AssertionError("degenerate row during reduction")
    w3 = tuple(x / Fraction(p) ** a3 for x in r3w)
    # echelonize (w3, w4) for later reductions: w3 already vanishes at piv4
    piv3, pv3 = _pivot_index(w3, p)
    assert pv3 == 0 and w3[piv4] == 0

    # row 2: maximal-divisibility reduction modulo span(w3, w4); the content
    # is forced to v(nu) - a3 by the unit pairing <w2, w3>
    x = r2
    x, _ = _reduce_by(x, w4, piv4)
    x, _ = _reduce_by(x, w3, piv3)
    # w3-reduction may have re-dirtied piv4 only if w3[piv4] != 0 (it is 0)
    a2 = vnu - a3
    ac = _content(x, p)
    assert ac == a2, f"content {ac} != forced {a2}"
    w2 = tuple(xx / Fraction(p) ** a2 for xx in x)
    assert _pair(w2, w4) == 0 and vp(_pair(w2, w3), p) == 0

    # row 1: enforce symplectic pairing zeros, then reduce by w4 only
    pw23 = _pair(w2, w3)
    c3 = _pair(r1, w2) / _pair(w3, w2)
    c2 = _pair(r1, w3) / pw23
    x = tuple(r1[i] - c2 * w2[i] - c3 * w3[i] for i in range(4))
    assert _pair(x, w2) == 0 and _pair(x, w3) == 0
    x, _ = _reduce_by(x, w4, piv4)
    a1 = vnu - a4
    ac = _content(x, p)
    assert ac == a1, f"content {ac} != forced {a1}"
    w1 = tuple(xx / Fraction(p) ** a1 for xx in x)

    k = GroupElement((w1, w2, w3, w4))
    assert k.in_maximal_compact(p)
    b = g * k.inverse()
    for i in range(4):
        for j in range(i):
            assert b.rows[i][j] == 0, "b is not upper triangular"
    for i, ai in enumerate((a1, a2, a3, a4)):
        assert b.rows[i][i] == Fraction(p) ** ai, "diagonal is not an exact p-power"
    return b, k


def iwasawa_NTK(g: GroupElement, prime: int):
    """g = n * t * k: n unipotent upper triangular, t a p-power torus element,
    k in G(Z_p)."""
    b, k = iwasawa_BK(g, prime)
    a = [vp(b.rows[i][i], prime) for i in range(4)]
    t = TorusElement(a[0], a[1], a[0] + a[3])
    assert a[0] + a[3] == a[1] + a[2], "similitude bookkeeping failed"
    tinv = t.inverse().embed(prime)
    n = b * tinv
    for i in range(4):
        assert n.rows[i][i] == 1
    return n, t, k


def psi_N(n: GroupElement, prime: int, ctx=None):
    """psi(x + y) for the two marked coordinates of a unipotent element.

    Returns a CyclotomicNumber; pass ctx to get a Scalar instead.
    """
    for i in range(4):
        if n.rows[i][i] != 1:
            raise ValueError("psi_N needs a unipotent upper-triangular element")
        for j in range(i):
            if n.rows[i][j] != 0:
                raise ValueError("psi_N needs a unipotent upper-triangular element")
    arg = n.rows[0][1] + n.rows[1][2]
    cn = _psi_fraction(arg, prime)
    if ctx is not None:
        return cn.as_scalar(ctx)
    return cn


def _psi_fraction(x, p):
    x = Fraction(x)
    den = x.denominator
    e = 0
    while den % p == 0:
        den //= p
        e += 1
    if den != 1:
        raise ValueError("psi argument needs a p-power denominator")
    if e == 0:
        return CyclotomicNumber.from_rational(p, 1)
    num = x.numerator % p**e
    return CyclotomicNumber.root(p, e, num)


# ---------------------------------------------------------------------------
# unramified torus characters


class UnramifiedTorusCharacter:
    """chi1 x chi2 x| rho on the diagonal torus, by its values at p.

    Evaluated on diag(u1, u2, nu/u2, nu/u1) as chi1(u1) chi2(u2) rho(nu)
    (the transposed debugging convention swaps the roles of u1, u2).
    """

    __slots__ = ("ctx", "v1", "v2", "v0")

    def __init__(self, ctx, v1, v2, v0):
        self.ctx = ctx
        self.v1, self.v2, self.v0 = v1, v2, v0

    @staticmethod
    def standard(ctx):
        """The character whose normalized induction has Hecke parameters
        (a, b, gamma, delta): chi1(p) = gamma/alpha, chi2(p) = beta/alpha,
        rho(p) = p^(-w/2) * alpha."""
        a = ctx.sym("a")
        v1 = ctx.gamma() / a
        v2 = ctx.sym("b") / a
        v0 = ctx.p_power(-ctx.w) * a
        return UnramifiedTorusCharacter(ctx, v1, v2, v0)

    def value(self, exps):
        n1, n2, n0 = exps
        if self.ctx.transposed_convention:
            n1, n2 = n2, n1
        return self.v1**n1 * self.v2**n2 * self.v0**n0

    def central_value(self):
        """Value on diag(p,p,p,p)."""
        return self.value((1, 1, 2))


def delta_B(t: TorusElement, ctx):
    """Modulus character of the Borel: product of |root(t)|_p."""
    s = SUM_POS_ROOTS
    e = s[0] * t.n1 + s[1] * t.n2 + s[2] * t.n0
    return ctx.p_power(-2 * e)


def delta_B_half(exps, ctx):
    s = SUM_POS_ROOTS
    e = s[0] * exps[0] + s[1] * exps[1] + s[2] * exps[2]
    return ctx.p_power(-e)


def character_delta_half(Lambda, exps):
    """(Lambda * delta_B^(1/2)) at the torus element with given exponents."""
    return Lambda.value(exps) * delta_B_half(exps, Lambda.ctx)


def delta_B_adjoint_oracle(t: TorusElement, ctx):
    """Independent route: |det Ad(t)|_p on the Lie algebra of N via explicit
    4-dimensional conjugation of the root generators."""
    p = ctx.prime
    tm = t.embed(p)
    tot = 0
    for r in POSITIVE_ROOTS:
        g = tm * r.element(1) * tm.inverse()
        # read the scaling back off the defining slot
        base = r.element(1)
        slot = next((i, j) for i in range(4) for j in range(4)
                    if i != j and base.rows[i][j] != 0)
        tot += vp(g.rows[slot[0]][slot[1]], p)
    return ctx.p_power(-2 * tot)


# ---------------------------------------------------------------------------
# named elements and the element parser


def make_u_kl():
    """A fixed integral element with first column (1,1,0,0)^T.

    Unit determinant and similitude 1, hence in G(Z_p) for every prime.
    """
    return GroupElement([[1, 0, 0, 0],
                         [1, 1, 0, 0],
                         [0, 0, 1, 0],
                         [0, 0, -1, 1]])


def make_u_kl_alt():
    """A second documented completion of the same first column."""
    return make_u_kl() * ROOT_BY_NAME["2alpha+beta"].element(1)


def parse_element(text, prime):
    """Parse a group element: 'diag(p,p,1,1)', 'uKl', 'w1', 'w2', or 16
    whitespace-separated rationals row-major."""
    s = text.strip()
    if s == "uKl":
        return make_u_kl()
    if s in ("w1", "w2"):
        W = weyl_group()
        target = (0, 1, 0) if s == "w1" else (1, 0, 0)
        # w1 = s_alpha swaps n1, n2; w2 = s_beta
        for w in W:
            if w.length == 1 and w.apply((1, 0, 0)) == target:
                return w.lift
        raise AssertionError
    if s.startswith("diag(") and s.endswith(")"):
        entries = []
        for piece in s[5:-1].split(","):
            piece = piece.strip()
            val = Fraction(1)
            for factor in piece.split("*"):
                factor = factor.strip()
                if factor in ("p", "P"):
                    val *= prime
                elif factor.startswith(("p^", "P^")):
                    val *= Fraction(prime) ** int(factor[2:])
                else:
                    val *= Fraction(factor)
            entries.append(val)
        if len(entries) != 4:
            raise ValueError("diag() needs 4 entries")
        return GroupElement([[entries[i] if i == j else 0 for j in range(4)]
                             for i in range(4)])
    vals = [Fraction(x) for x in s.split()]
    if len(vals) != 16:
        raise ValueError("need 16 entries row-major")
    return GroupElement([vals[4 * i:4 * i + 4] for i in range(4)])
