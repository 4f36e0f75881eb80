"""Finite models of Schwartz functions on Q_p^2 and finite-order characters.

A Schwartz function supported in p^{-A} Z_p^2 and invariant modulo p^B is a
finite table on (p^{-A} Z_p / p^B Z_p)^2; slots are indexed by integers
m in [0, p^{A+B}) representing m / p^A.  The partial Fourier transform acts
in the second variable with the unramified character psi and the self-dual
measure (vol(Z_p) = 1), so applying it twice returns Phi(x, -y) exactly.
"""

from __future__ import annotations

from fractions import Fraction

from .scalars import CyclotomicNumber


class SchwartzFunction:
    """Values on (p^{-A} Z_p / p^B Z_p)^2, outer depth A >= 0, inner B >= 1."""

    __slots__ = ("ctx", "A", "B", "values")

    def __init__(self, ctx, A, B, values):
        if A < 0 or B < 1:
            raise ValueError("need A >= 0 and B >= 1")
        self.ctx = ctx
        self.A, self.B = int(A), int(B)
        n = ctx.prime ** (self.A + self.B)
        self.values = {}
        for (mx, my), v in values.items():
            if not v.is_zero():
                self.values[(mx % n, my % n)] = v

    def _n(self):
        return self.ctx.prime ** (self.A + self.B)

    def residue(self, m):
        """The rational p^{-A} * m this slot stands for."""
        return Fraction(m, self.ctx.prime**self.A)

    def value_at(self, x, y):
        """Value at rational arguments (must lie in the supported range)."""
        p = self.ctx.prime
        pa = p**self.A
        n = self._n()
        for z in (x, y):
            zf = Fraction(z) * pa
            if zf.denominator % p == 0:
                return self.ctx.zero()  # deeper than the support: value 0
        mx = _slot(Fraction(x), self.A, self.B, p)
        my = _slot(Fraction(y), self.A, self.B, p)
        return self.values.get((mx, my), self.ctx.zero())

    def pad(self, A, B):
        """Re-express with larger depths (exact embedding)."""
        if A < self.A or B < self.B:
            raise ValueError("pad only grows depths")
        p = self.ctx.prime
        sh = p ** (A - self.A)
        reach = p ** (B - self.B)
        n_old = self._n()
        vals = {}
        for (mx, my), v in self.values.items():
            for ix in range(reach):
                for iy in range(reach):
                    vals[((mx + ix * n_old) * sh, (my + iy * n_old) * sh)] = v
        return SchwartzFunction(self.ctx, A, B, vals)

    def __eq__(self, other):
        A, B = max(self.A, other.A), max(self.B, other.B)
        x, y = self.pad(A, B), other.pad(A, B)
        keys = set(x.values) | set(y.values)
        z = self.ctx.zero()
        return all((x.values.get(k, z) - y.values.get(k, z)).is_zero() for k in keys)

    def __add__(self, other):
        A, B = max(self.A, other.A), max(self.B, other.B)
        x, y = self.pad(A, B), other.pad(A, B)
        vals = dict(x.values)
        for k, v in y.values.items():
            vals[k] = vals.get(k, self.ctx.zero()) + v
        return SchwartzFunction(self.ctx, A, B, vals)

    def scale(self, c):
        return SchwartzFunction(self.ctx, self.A, self.B,
                                {k: v * c for k, v in self.values.items()})

    def unit_translate(self, u):
        """Right translation by diag(u, u), u a p-unit: x -> Phi(ux, uy)."""
        n = self._n()
        if u % self.ctx.prime == 0:
            raise ValueError("u must be a p-unit")
        uinv = pow(u, -1, n)
        return SchwartzFunction(self.ctx, self.A, self.B,
                                {((mx * uinv) % n, (my * uinv) % n): v
                                 for (mx, my), v in self.values.items()})

    def norm_square(self):
        """Exact L^2 norm: sum |value|^2 * vol(slot), conjugating zeta."""
        vol = self.ctx.scalar(Fraction(1, self.ctx.prime ** (2 * self.B)))
        total = self.ctx.zero()
        for v in self.values.values():
            total = total + v * v.conjugate()
        return total * vol

    def support_size(self):
        return len(self.values)


def _slot(x, A, B, p):
    pa = p**A
    n = p ** (A + B)
    m = x * pa
    num, den = m.numerator, m.denominator
    return (num * pow(den, -1, n)) % n


def char_function(ctx, region1, region2, A=None, B=None):
    """Characteristic function of region1 x region2; regions are predicates
    on p-adic valuation, named: 'Z' (Z_p), 'Z*' (units), 'pZ' (p Z_p),
    or ('val>=', k) / ('val==', k)."""
    p = ctx.prime
    need_A = 0
    for reg in (region1, region2):
        k = _region_min_val(reg)
        need_A = max(need_A, -k if k < 0 else 0)
    A = need_A if A is None else A
    B = 1 if B is None else B
    n = p ** (A + B)
    pa = p**A
    vals = {}
    one = ctx.one()
    for mx in range(n):
        if not _region_contains(region1, mx, pa, p):
            continue
        for my in range(n):
            if _region_contains(region2, my, pa, p):
                vals[(mx, my)] = one
    return SchwartzFunction(ctx, A, B, vals)


def _region_min_val(reg):
    if isinstance(reg, tuple):
        return reg[1]
    return 0


def _region_contains(reg, m, pa, p):
    # the slot stands for m/pa; valuation of the residue class (slots are
    # taken mod p^{A+B}, classes with m = 0 have val >= B)
    x = Fraction(m, pa)
    if x == 0:
        v = None  # the zero class: valuation >= B
    else:
        v = 0
        num = x.numerator
        while num % p == 0:
            num //= p
            v += 1
        d = x.denominator
        while d % p == 0:
            d //= p
            v -= 1
    if reg == "Z":
        return v is None or v >= 0
    if reg == "Z*":
        return v == 0
    if reg == "pZ":
        return v is None or v >= 1
    kind, k = reg
    if kind == "val>=":
        return v is None or v >= k
    if kind == "val==":
        return v == k
    raise ValueError(f"unknown region {reg!r}")


def partial_fourier(Phi: SchwartzFunction, inverse=False) -> SchwartzFunction:
    """Fourier transform in the second variable with psi and the self-dual
    measure; applying it twice gives Phi(x, -y)."""
    ctx = Phi.ctx
    p = ctx.prime
    A, B = Phi.A, Phi.B
    n = p ** (A + B)
    # output: eta in p^{-B} Z / p^{A'} with A' = A; keep square depths
    A2, B2 = B, max(A, 1)
    n2 = p ** (A2 + B2)
    volume = ctx.scalar(Fraction(1, p**B))
    sign = -1 if inverse else 1
    # group input by x-slot
    by_x = {}
    for (mx, my), v in Phi.values.items():
        by_x.setdefault(mx, []).append((my, v))
    out = {}
    pa = p**A
    pa2 = p**A2
    for mx, row in by_x.items():
        for me in range(n2):
            eta = Fraction(me, pa2)
            acc = ctx.zero()
            for (my, v) in row:
                y = Fraction(my, pa)
                acc = acc + v * ctx.psi(sign * y * eta)
            if not acc.is_zero():
                # out is indexed by (x in p^{-A}/p^{B}, eta in p^{-B}/p^{A2...})
                out[(mx, me)] = acc * volume
    # x keeps depths (A, B); eta has depths (B, A'); unify to the max square
    Aout, Bout = max(A, A2), max(B, B2)
    nout = p ** (Aout + Bout)
    vals = {}
    shx = p ** (Aout - A)
    she = p ** (Aout - A2)
    reachx = p ** (Bout - B)
    reache = p ** (Bout - B2)
    for (mx, me), v in out.items():
        for ix in range(reachx):
            for ie in range(reache):
                vals[((mx + ix * n) * shx % nout, (me + ie * n2) * she % nout)] = v
    return SchwartzFunction(ctx, Aout, Bout, vals)


def central_scale(Phi: SchwartzFunction, k: int) -> SchwartzFunction:
    """The translate by diag(p^k, p^k): x -> Phi(p^k x, p^k y)."""
    ctx = Phi.ctx
    p = ctx.prime
    A2 = max(Phi.A + k, 0)
    B2 = max(Phi.B - k, 1)
    n2 = p ** (A2 + B2)
    vals = {}
    pa2 = p**A2
    for mx in range(n2):
        for my in range(n2):
            v = Phi.value_at(Fraction(mx, pa2) * Fraction(p) ** k,
                             Fraction(my, pa2) * Fraction(p) ** k)
            if not v.is_zero():
                vals[(mx, my)] = v
    return SchwartzFunction(ctx, A2, B2, vals)


# ---------------------------------------------------------------------------
# finite-order characters of Q_p^x


class FiniteOrderCharacter:
    """Character of Z_p^x of conductor p^m (tabulated), extended to Q_p^x by
    a chosen (unramified) value at p."""

    __slots__ = ("prime", "conductor_exp", "table", "value_at_p")

    def __init__(self, prime, conductor_exp, table, value_at_p):
        self.prime = prime
        self.table = dict(table)
        self.value_at_p = value_at_p  # Scalar
        m = conductor_exp
        # minimality: drop to a smaller modulus while the table factors
        while m > 1:
            pm1 = prime ** (m - 1)
            ok = all(self.table[u] == self.table[v]
                     for u in self.table for v in self.table
                     if (u - v) % pm1 == 0)
            if not ok:
                break
            new = {}
            for u in range(1, pm1 + 1):
                if u % prime:
                    rep = next(x for x in self.table if (x - u) % pm1 == 0)
                    new[u % pm1] = self.table[rep]
            self.table = new
            m -= 1
        if m == 1 and all(v == CyclotomicNumber.from_rational(prime, 1)
                          for v in self.table.values()):
            m = 0
            self.table = {}
        self.conductor_exp = m
        self._check_multiplicative()

    def _check_multiplicative(self):
        if not self.conductor_exp:
            return
        pm = self.prime**self.conductor_exp
        for u in self.table:
            for v in self.table:
                if not (self.table[u] * self.table[v]
                        == self.table[(u * v) % pm]):
                    raise ValueError("table is not multiplicative")

    @staticmethod
    def trivial(ctx):
        # symbolic-p mode has no prime; conductor 0 never consults it
        return FiniteOrderCharacter(ctx.prime or 2, 0, {}, ctx.one())

    @staticmethod
    def quadratic(ctx):
        """The quadratic character of conductor p (odd p) or 4 (p = 2)."""
        p = ctx.prime
        one = CyclotomicNumber.from_rational(p, 1)
        neg = CyclotomicNumber.from_rational(p, -1)
        if p == 2:
            return FiniteOrderCharacter(2, 2, {1: one, 3: neg}, ctx.one())
        table = {}
        squares = {(x * x) % p for x in range(1, p)}
        for u in range(1, p):
            table[u] = one if u in squares else neg
        return FiniteOrderCharacter(p, 1, table, ctx.one())

    def unit_value(self, u):
        """Value at a p-unit (int or Fraction)."""
        if not self.conductor_exp:
            return CyclotomicNumber.from_rational(self.prime, 1)
        pm = self.prime**self.conductor_exp
        u = Fraction(u)
        m = (u.numerator * pow(u.denominator, -1, pm)) % pm
        return self.table[m]

    def is_trivial(self):
        return self.conductor_exp == 0

    def __mul__(self, other):
        m = max(self.conductor_exp, other.conductor_exp, 1)
        pm = self.prime**m
        table = {u: self.unit_value(u) * other.unit_value(u)
                 for u in range(1, pm) if u % self.prime}
        return FiniteOrderCharacter(self.prime, m, table,
                                    self.value_at_p * other.value_at_p)

    def inverse(self):
        table = {u: v.conjugate() for u, v in self.table.items()}
        return FiniteOrderCharacter(self.prime, self.conductor_exp, table,
                                    self.value_at_p.inverse())

    def unit_integral(self, ctx):
        """Integral over Z_p^x (volume 1): 1 for the trivial character, 0
        otherwise (orthogonality, computed by the exact character sum)."""
        if self.is_trivial():
            return ctx.one()
        pm = self.prime**self.conductor_exp
        acc = CyclotomicNumber.from_rational(self.prime, 0)
        for u in range(1, pm):
            if u % self.prime:
                acc = acc + self.unit_value(u)
        if not acc.is_zero():
            raise AssertionError("nontrivial character with nonzero sum")
        return ctx.zero()
