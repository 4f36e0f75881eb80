"""Coset enumeration for GSp4 over Z_p.

Three jobs:

  * finite flag varieties G(F_p)/P-bar and the quotients J/J' between
    parahorics, enumerated by Bruhat cells with exact integral lifts
    (unipotent cell coordinates in [0, p) times a Weyl representative);

  * decomposition of parahoric double cosets  J t J = |_| g_i J  into left
    cosets, with g_i = (product of root elements) * t.  The coordinate
    ranges come from the contraction exponents <r, lambda>; every
    decomposition is verifiable against an independent orbit count in
    G(Z/p^m) (the stabilizer-index oracle) plus exact pairwise
    disjointness over Q;

  * a persistent JSON cache for the decompositions, since these dominate
    runtime (GSP4_CACHE, default .gsp4cache/, atomic write-then-rename).

Levels are depth-1 parahorics named "borel" (Iwahori), "siegel",
"klingen", "hyperspecial".
"""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction
from functools import lru_cache

from .group import (
    GroupElement,
    POSITIVE_ROOTS,
    ROOTS,
    TorusElement,
    _pair,
    identity,
    level_name,
    parabolic_membership,
    pattern_zero_slots,
    weyl_group,
)

ENGINE_VERSION = 1

# Weyl subgroup of each standard Levi, by simple-reflection content
_LEVI_SIMPLES = {"borel": (), "siegel": ("alpha",), "klingen": ("beta",),
                 "hyperspecial": ("alpha", "beta")}


def _root_depth(root, level):
    """Valuation forced on the root coordinate by the level's pattern."""
    zeros = set(pattern_zero_slots(level))
    base = root.element(1)
    slots = [(i, j) for i in range(4) for j in range(4)
             if i != j and base.rows[i][j] != 0]
    flags = {(s in zeros) for s in slots}
    assert len(flags) == 1, "root slots straddle the pattern"
    return 1 if flags.pop() else 0


@lru_cache(maxsize=None)
def _weyl_subgroup(level):
    """Indices of W_J inside the Weyl group table."""
    W = weyl_group()
    simples = _LEVI_SIMPLES[level_name(level)]
    gens = [w for w in W if w.length == 1]
    # identify the simple reflections by their action
    named = {}
    for w in gens:
        if w.apply((1, 0, 0)) == (0, 1, 0):
            named["alpha"] = w
        else:
            named["beta"] = w
    chosen = [named[s] for s in simples]
    members = {0}
    frontier = [W[0]]
    while frontier:
        new = []
        for w in frontier:
            for g in chosen:
                prod = _weyl_mul(g, w)
                if prod.index not in members:
                    members.add(prod.index)
                    new.append(prod)
        frontier = new
    return frozenset(members)


@lru_cache(maxsize=None)
def _weyl_mul_table():
    W = weyl_group()
    table = {}
    for x in W:
        for y in W:
            act = tuple(tuple(sum(x.action[i][k] * y.action[k][j] for k in range(3))
                              for j in range(3)) for i in range(3))
            z = next(w for w in W if w.action == act)
            table[(x.index, y.index)] = z
    return table


def _weyl_mul(x, y):
    return _weyl_mul_table()[(x.index, y.index)]


@lru_cache(maxsize=None)
def _weyl_inv(idx):
    W = weyl_group()
    for y in W:
        if _weyl_mul(W[idx], y).index == 0:
            return y
    raise AssertionError


def inversion_roots(w):
    """Positive roots mapped negative by w^{-1}."""
    winv = _weyl_inv(w.index)
    out = []
    for r in POSITIVE_ROOTS:
        img = tuple(sum(r.functional[i] * winv.action[i][j] for i in range(3))
                    for j in range(3))
        # sign of the image functional: evaluate on a strictly dominant probe
        val = img[0] * 7 + img[1] * 3 + img[2] * 0  # probe (7,3,0): all roots nonzero
        assert val != 0
        if val < 0:
            out.append(r)
    return tuple(out)


@lru_cache(maxsize=None)
def coset_cells(bigger, smaller):
    """Bruhat cells of the quotient (bigger-level)/(smaller-level):
    minimal-length representatives w of W_big / W_small together with the
    cell roots (restricted to the big Levi's positive system)."""
    bigger, smaller = level_name(bigger), level_name(smaller)
    Wbig = _weyl_subgroup(bigger)
    Wsmall = _weyl_subgroup(smaller)
    if not Wsmall <= Wbig:
        raise ValueError(f"{smaller} is not contained in {bigger}")
    W = weyl_group()
    big_simples = set(_LEVI_SIMPLES[bigger])
    pos_big = [r for r in POSITIVE_ROOTS
               if r.name in big_simples or _root_in_levi_span(r, big_simples)]
    cosets = {}
    for i in sorted(Wbig):
        w = W[i]
        key = frozenset(_weyl_mul(w, W[j]).index for j in Wsmall)
        cur = cosets.get(key)
        if cur is None or (w.length, w.index) < (cur.length, cur.index):
            cosets[key] = w
    cells = []
    for w in sorted(cosets.values(), key=lambda w: (w.length, w.index)):
        roots = tuple(r for r in inversion_roots(w) if r in pos_big)
        assert len(roots) == w.length, "min-length rep has stray inversions"
        cells.append((w, roots))
    return tuple(cells)


def _root_in_levi_span(root, simples):
    if "alpha" in simples and "beta" in simples:
        return True
    if simples == {"alpha"}:
        return root.name == "alpha"
    if simples == {"beta"}:
        return root.name == "beta"
    return False


class CosetTable:
    """Left-coset representatives with an index by mod-p reduction."""

    def __init__(self, prime, level, reps):
        self.prime = prime
        self.level = level_name(level)
        self.reps = tuple(reps)
        self.index = {g.reduce_mod(prime): i for i, g in enumerate(self.reps)}

    def __len__(self):
        return len(self.reps)


def enumerate_cosets(prime, level) -> CosetTable:
    """The finite flag variety G(F_p)/P-bar as exact integral representatives."""
    return CosetTable(prime, level, quotient_cosets(prime, "hyperspecial", level))


def quotient_cosets(prime, bigger, smaller):
    """Representatives of (bigger-level)/(smaller-level), lifted to G(Z)."""
    reps = []
    for w, roots in coset_cells(bigger, smaller):
        for coords in _tuples(prime, len(roots)):
            g = identity()
            for r, c in zip(roots, coords):
                g = g * r.element(c)
            reps.append(g * w.lift)
    return reps


def _tuples(p, n):
    if n == 0:
        yield ()
        return
    for rest in _tuples(p, n - 1):
        for c in range(p):
            yield rest + (c,)


def flag_count_closed_form(prime, level):
    """|G(F_p)/P-bar| by the standard product formulas."""
    p = prime
    return {
        "borel": (p + 1) ** 2 * (p**2 + 1),
        "siegel": (p + 1) * (p**2 + 1),
        "klingen": (p + 1) * (p**2 + 1),
        "hyperspecial": 1,
    }[level_name(level)]


# ---------------------------------------------------------------------------
# double cosets


class DoubleCosetDecomposition:
    __slots__ = ("prime", "level", "t", "left_reps")

    def __init__(self, prime, level, t, left_reps):
        self.prime = prime
        self.level = level_name(level)
        self.t = t  # TorusElement
        self.left_reps = tuple(left_reps)

    def __len__(self):
        return len(self.left_reps)


def _cell_data(level, t_exps, positive_only=False):
    """(root, depth, range-exponent) for coordinates of J/(J cap tJt^-1)."""
    out = []
    for r in (POSITIVE_ROOTS if positive_only else ROOTS):
        m = r.pairing(t_exps)
        if m > 0:
            out.append((r, _root_depth(r, level), m))
    return out


def _single_cell_reps(prime, level, t_exps, lift_slack=0, positive_only=False):
    t = TorusElement(*t_exps)
    tm = t.embed(prime)
    reps = []
    data = _cell_data(level, t_exps, positive_only)
    ranges = [prime ** m for (_r, _d, m) in data]
    for coords in _mixed_tuples(ranges):
        g = identity()
        for (r, d, _m), c in zip(data, coords):
            c_lift = c + (prime ** _m if lift_slack and c == 0 else 0)
            g = g * r.element(Fraction(prime) ** d * c_lift)
        reps.append(g * tm)
    return reps


def _mixed_tuples(ranges):
    if not ranges:
        yield ()
        return
    for rest in _mixed_tuples(ranges[:-1]):
        for c in range(ranges[-1]):
            yield rest + (c,)


def _orbit_exps(t_exps):
    """Distinct Weyl translates of the torus exponents."""
    seen = []
    for w in weyl_group():
        e = w.apply(t_exps)
        if e not in seen:
            seen.append(e)
    return seen


def lattice_key(g: GroupElement, prime):
    """Canonical form of the lattice g * Z_p^4 (upper-triangular p-local
    Hermite form); equal keys <=> equal left cosets g K."""
    p = prime
    cols = [[g.rows[i][j] for i in range(4)] for j in range(4)]
    order = []
    used = set()
    for i in range(3, -1, -1):
        best, arg = None, None
        for j in range(4):
            if j in used or cols[j][i] == 0:
                continue
            v = _val(cols[j][i], p)
            if best is None or v < best:
                best, arg = v, j
        pivot_col, a = arg, best
        used.add(pivot_col)
        order.append((i, pivot_col, a))
        unit = cols[pivot_col][i] / Fraction(p) ** a
        cols[pivot_col] = [x / unit for x in cols[pivot_col]]
        for j in range(4):
            if j not in used and cols[j][i] != 0:
                c = cols[j][i] / cols[pivot_col][i]
                cols[j] = [x - c * y for x, y in zip(cols[j], cols[pivot_col])]
    # arrange pivot columns by row, then reduce entries above pivots
    arranged = [None] * 4
    pivots = [None] * 4
    for (i, jcol, a) in order:
        arranged[i] = cols[jcol]
        pivots[i] = a
    for i in range(3, -1, -1):
        mod = Fraction(p) ** pivots[i]
        for j in range(i + 1, 4):
            x = arranged[j][i]
            res = _canonical_residue(x, prime, pivots[i])
            c = (x - res) / mod
            arranged[j] = [y - c * z for y, z in zip(arranged[j], arranged[i])]
    return tuple(tuple(col[i] for i in range(4)) for col in arranged)


def _val(x, p):
    v = 0
    n = Fraction(x)
    num, den = n.numerator, n.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _canonical_residue(x, p, a):
    """The integer in [0, p^a) congruent to x mod p^a Z_(p)."""
    pn = p**a
    if pn == 1:
        return Fraction(0)
    x = Fraction(x)
    den_inv = pow(x.denominator, -1, pn)
    return Fraction((x.numerator * den_inv) % pn)


def _divisor_type(g: GroupElement, prime):
    """Elementary-divisor exponents of an integral matrix (via minor gcds)."""
    from itertools import combinations
    rows = g.rows
    if not g.is_p_integral(prime):
        return None
    vals = []
    prev = 0
    for k in range(1, 5):
        best = None
        for rs in combinations(range(4), k):
            for cs in combinations(range(4), k):
                m = _det_sub(rows, rs, cs)
                if m != 0:
                    v = _val(m, prime)
                    if best is None or v < best:
                        best = v
        if best is None:
            return None
        vals.append(best - prev)
        prev = best
    return tuple(sorted(vals))


def _det_sub(rows, rs, cs):
    k = len(rs)
    if k == 1:
        return rows[rs[0]][cs[0]]
    total = Fraction(0)
    sign = 1
    for idx, c in enumerate(cs):
        sub = _det_sub(rows, rs[1:], cs[:idx] + cs[idx + 1:])
        total += sign * rows[rs[0]][c] * sub
        sign = -sign
    return total


def _hyperspecial_reps(prime, t_exps):
    """Left cosets of K t K: BFS over K/(K cap tKt^-1) carrying exact
    generator words, so representatives are exact elements of G(Z)."""
    exact = _coset_orbit_exact(prime, "hyperspecial", t_exps)
    tm = TorusElement(*t_exps).embed(prime)
    return [j * tm for j in exact]


def decompose_double_coset(t_exps, level, prime, lift_slack=0,
                           use_cache=True, cache_dir=None) -> DoubleCosetDecomposition:
    """Left-coset representatives of [J t J] with integral lifts.

    t is dominant diagonal with exponent spread <= 2 (the in-scope
    operators); at hyperspecial level the decomposition runs over the Weyl
    orbit of t, at parahoric level over a single coordinate cell.
    """
    level = level_name(level)
    t_exps = tuple(int(x) for x in t_exps)
    diag = TorusElement(*t_exps).diag_exps()
    if max(diag) - min(diag) > 2:
        raise ValueError("exponent spread > 2 is out of scope")
    if use_cache and not lift_slack:
        cached = cache_load(prime, level, t_exps, cache_dir)
        if cached is not None:
            return cached
    if level == "hyperspecial":
        reps = _hyperspecial_reps(prime, t_exps)
    else:
        reps = _single_cell_reps(prime, level, t_exps, lift_slack)
    dec = DoubleCosetDecomposition(prime, level, TorusElement(*t_exps), reps)
    if use_cache and not lift_slack:
        cache_store(dec, cache_dir)
    return dec


def same_left_coset(x: GroupElement, y: GroupElement, level, prime):
    """Exact test x J = y J for the depth-1 parahoric J (or G(Z_p))."""
    d = x.inverse() * y
    if not d.is_p_integral(prime):
        return False
    lvl = level_name(level)
    depth = 0 if lvl == "hyperspecial" else 1
    return parabolic_membership(d, lvl if depth else "hyperspecial", depth, prime)


def verify_disjoint(dec: DoubleCosetDecomposition):
    reps = dec.left_reps
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            if same_left_coset(reps[i], reps[j], dec.level, dec.prime):
                return False
    return True


# ---------------------------------------------------------------------------
# stabilizer-index oracle: orbit count in G(Z/p^m)


def _mat_mod(g: GroupElement, pn):
    return g.reduce_mod(pn)


def _mul_mod(x, y, pn):
    return tuple(tuple(sum(x[i][l] * y[l][j] for l in range(4)) % pn
                       for j in range(4)) for i in range(4))


def _inv_mod(x, pn):
    """Inverse of a unit-determinant matrix mod p^n via the adjugate."""
    def minor(m, i, j):
        rows = [r for k, r in enumerate(m) if k != i]
        sub = [[r[l] for l in range(4) if l != j] for r in rows]
        return (sub[0][0] * (sub[1][1] * sub[2][2] - sub[1][2] * sub[2][1])
                - sub[0][1] * (sub[1][0] * sub[2][2] - sub[1][2] * sub[2][0])
                + sub[0][2] * (sub[1][0] * sub[2][1] - sub[1][1] * sub[2][0]))
    det = 0
    for j in range(4):
        det += (-1) ** j * x[0][j] * minor(x, 0, j)
    det %= pn
    dinv = pow(det, -1, pn)
    adj = [[((-1) ** (i + j) * minor(x, j, i)) % pn for j in range(4)] for i in range(4)]
    return tuple(tuple((v * dinv) % pn for v in row) for row in adj)


def _level_generators(level, prime):
    """Exact generators of the depth-1 parahoric (Iwahori factorization:
    root subgroups at their pattern depth, torus units, signs).  The units
    taken are every residue mod p^3, which certainly generate the torus of
    G(Z/p^m) for m <= 3."""
    gens = []
    for r in ROOTS:
        d = _root_depth(r, level) if level_name(level) != "hyperspecial" else 0
        gens.append(r.element(Fraction(prime) ** d))
    units = [u for u in range(2, prime**3) if u % prime] or [1]
    units.append(-1)
    for u in units:
        for exps in ((u, 1, 1), (1, u, 1), (1, 1, u)):
            rows = [[0] * 4 for _ in range(4)]
            u1, u2, nu = exps
            d = (u1, u2, Fraction(nu, u2), Fraction(nu, u1))
            for i in range(4):
                rows[i][i] = d[i]
            gens.append(GroupElement(rows))
    return gens


def _in_stabilizer_mod(u, t_exps, level, prime, m):
    """u in J and t^-1 u t in J, tested mod p^m."""
    pn = prime**m
    diag = TorusElement(*t_exps).diag_exps()
    zeros = set(pattern_zero_slots(level))
    for i in range(4):
        for j in range(4):
            if i == j:
                continue
            req = (1 if (i, j) in zeros else 0) + max(0, diag[i] - diag[j])
            if req and u[i][j] % prime**req:
                return False
    return True


@lru_cache(maxsize=None)
def _coset_orbit_exact(prime, level, t_exps, m=None):
    """Exact representatives of J / (J cap t J t^-1): BFS over cosets in
    G(Z/p^m) (sound: the stabilizer is cut out by congruences mod p^{<=m}),
    carrying exact products of the integral generators."""
    level = level_name(level)
    diag = TorusElement(*t_exps).diag_exps()
    spread = max(diag) - min(diag)
    if m is None:
        m = spread + 1
    pn = prime**m
    gens_exact = _level_generators(level, prime)
    gens = [(g, g.reduce_mod(pn)) for g in gens_exact]
    start = identity()
    reps = [(start, start.reduce_mod(pn))]
    inv_reps = [_inv_mod(start.reduce_mod(pn), pn)]
    frontier = list(reps)
    while frontier:
        new = []
        for (xe, xm) in frontier:
            for (ge, gm) in gens:
                ym = _mul_mod(gm, xm, pn)
                if any(_in_stabilizer_mod(_mul_mod(inv, ym, pn), t_exps, level, prime, m)
                       for inv in inv_reps):
                    continue
                entry = (ge * xe, ym)
                reps.append(entry)
                inv_reps.append(_inv_mod(ym, pn))
                new.append(entry)
        frontier = new
    return tuple(e for (e, _m) in reps)


def stabilizer_index_oracle(prime, level, t_exps, m=None):
    """|J / (J cap t J t^-1)| by BFS over cosets in G(Z/p^m)."""
    return len(_coset_orbit_exact(prime, level_name(level), tuple(t_exps), m))


def lattice_count_oracle(prime, t_exps):
    """Independent count of |K t K / K|: enumerate sublattices
    p^e0 Z^4 <= L <= Z^4 (e0 = max diagonal exponent) by Hermite forms over
    Z/p^e0, filtering on elementary-divisor type and the scaled-unimodular
    symplectic Gram condition."""
    p = prime
    diag = TorusElement(*t_exps).diag_exps()
    shift = min(diag)
    typ = tuple(sorted(e - shift for e in diag))
    e0 = max(typ)
    nu_val = typ[0] + typ[3]
    assert typ[1] + typ[2] == nu_val
    count = 0
    for diags in _ordered_tuples(e0, 4, sum(typ)):
        ranges = []
        for i in range(4):
            for j in range(i + 1, 4):
                ranges.append(p ** diags[i])  # entry H[i][j] mod p^{a_i}
        for offs in _mixed_tuples(ranges):
            H = [[Fraction(0)] * 4 for _ in range(4)]
            k = 0
            for i in range(4):
                H[i][i] = Fraction(p) ** diags[i]
                for j in range(i + 1, 4):
                    H[i][j] = Fraction(offs[k])
                    k += 1
            if not _is_hermite_reduced(H, p, diags):
                continue
            cols = [tuple(H[i][j] for i in range(4)) for j in range(4)]
            gram = [[_pair(cols[i], cols[j]) for j in range(4)] for i in range(4)]
            if _gram_is_scaled_unimodular(gram, p, nu_val):
                if _lattice_type(H, p) == typ:
                    count += 1
    return count


def _ordered_tuples(e0, n, total):
    def rec(k, remaining):
        if k == n - 1:
            if 0 <= remaining <= e0:
                yield (remaining,)
            return
        for v in range(min(e0, remaining) + 1):
            for rest in rec(k + 1, remaining - v):
                yield (v,) + rest
    return rec(0, total)


def _is_hermite_reduced(H, p, diags):
    for i in range(4):
        for j in range(i + 1, 4):
            if H[i][j] >= p ** diags[i]:
                return False
    return True


def _gram_is_scaled_unimodular(gram, p, nu_val):
    scale = Fraction(p) ** nu_val
    red = []
    for row in gram:
        r = []
        for x in row:
            q = x / scale
            if q != 0 and _val(q, p) < 0:
                return False
            r.append(q)
        red.append(r)
    det = _det_sub(tuple(tuple(r) for r in red), (0, 1, 2, 3), (0, 1, 2, 3))
    return det != 0 and _val(det, p) == 0


def _lattice_type(H, p):
    g = tuple(tuple(H[i][j] for j in range(4)) for i in range(4))
    vals = []
    prev = 0
    from itertools import combinations
    for k in range(1, 5):
        best = None
        for rs in combinations(range(4), k):
            for cs in combinations(range(4), k):
                m = _det_sub(g, rs, cs)
                if m != 0:
                    v = _val(m, p)
                    if best is None or v < best:
                        best = v
        if best is None:
            return None
        vals.append(best - prev)
        prev = best
    return tuple(sorted(vals))


# ---------------------------------------------------------------------------
# persistent cache


def cache_directory(cache_dir=None):
    return cache_dir or os.environ.get("GSP4_CACHE", ".gsp4cache")


def _cache_path(prime, level, t_exps, cache_dir):
    key = f"v{ENGINE_VERSION}_p{prime}_{level}_t{'_'.join(str(x) for x in t_exps)}"
    return os.path.join(cache_directory(cache_dir), key + ".json")


def cache_store(dec: DoubleCosetDecomposition, cache_dir=None):
    path = _cache_path(dec.prime, dec.level, dec.t.exps, cache_dir)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    reps = [[str(x) for row in g.rows for x in row] for g in dec.left_reps]
    payload = {"version": ENGINE_VERSION, "prime": dec.prime, "level": dec.level,
               "t": list(dec.t.exps), "reps": reps}
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cache_load(prime, level, t_exps, cache_dir=None):
    path = _cache_path(prime, level_name(level), tuple(t_exps), cache_dir)
    if not os.path.exists(path):
        return None
    try:
        with open(path) as fh:
            payload = json.load(fh)
        if payload.get("version") != ENGINE_VERSION:
            return None
        reps = [GroupElement([[Fraction(flat[4 * i + j]) for j in range(4)]
                              for i in range(4)]) for flat in payload["reps"]]
        return DoubleCosetDecomposition(prime, level, TorusElement(*t_exps), reps)
    except (ValueError, KeyError, json.JSONDecodeError):
        # corrupt entry: recompute and overwrite
        try:
            os.unlink(path)
        except OSError:
            pass
        return None
