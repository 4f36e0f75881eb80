"""Exact scalar tower: rationals -> cyclotomic Q(zeta_{p^K}) -> formal sqrt(p)
-> rational functions in the Hecke-parameter symbols.

Every quantity in the package is a ``Scalar``: a finite sum

    sum_{j, eps}  zeta^j * S^eps * f_{j,eps}(a, b, c1, c2 [, P])

where f is a reduced rational function over Q (sympy ``FracElement``),
S is a formal square root of the prime (S^2 = P in symbolic-p mode,
S^2 = p numerically), and zeta = exp(2*pi*i/p^K) lives in the p-power
cyclotomic tower (numeric mode only; psi-values need a concrete prime).

The four base symbols a, b, c1, c2 stand for the first two Hecke
parameters and the two twisting-character values at p.  The remaining
Hecke parameters are never stored: with w = r1 + r2 + 3,

    gamma = P^w * c1 * c2 / b,      delta = P^w * c1 * c2 / a,

so equality of scalars is decidable by canonical forms alone.

Design notes:
  * canonical form = (pruned part dict, minimal cyclotomic depth K,
    sympy-cancelled fractions); variable order a < b < c1 < c2 < P is
    fixed by the field construction.
  * division by a zeta-mixed scalar goes through the S-conjugate and the
    cyclotomic norm; if the S-norm vanishes for a nonzero element (which
    can only happen when sqrt(p) accidentally lies in the cyclotomic
    field) a ZeroDivisorError is raised rather than returning garbage.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from sympy import QQ
from sympy.polys.fields import field as _field


class ZeroDivisorError(ZeroDivisionError):
    """Division by a nonzero element of zero norm (sqrt(p) degeneracy)."""


SYMBOLIC_GENS = ("a", "b", "c1", "c2", "P")
NUMERIC_GENS = ("a", "b", "c1", "c2")


@lru_cache(maxsize=None)
def _make_field(gens):
    F, *syms = _field(",".join(gens), QQ)
    return F, tuple(syms)


def _qq_to_fraction(q):
    return Fraction(int(q.numerator), int(q.denominator))


def _fraction_to_qq(x):
    x = Fraction(x)
    return QQ(x.numerator, x.denominator)


# ---------------------------------------------------------------------------
# cyclotomic bookkeeping: basis zeta^j, 0 <= j < phi(p^K), reduced modulo
# Phi_{p^K}(x) = sum_{i<p} x^{i p^(K-1)}


def phi_pk(p, K):
    return p ** (K - 1) * (p - 1)


@lru_cache(maxsize=None)
def _reduction_rows(p, K):
    """zeta^d expressed in the power basis, for phi <= d < p^K."""
    phi = phi_pk(p, K)
    q = p ** (K - 1)
    rows = {}
    for d in range(phi, p**K):
        # zeta^d = zeta^(d-phi) * zeta^phi, zeta^phi = -sum_{i<p-1} zeta^(i q)
        vec = [0] * (p**K)
        for i in range(p - 1):
            vec[d - phi + i * q] -= 1
        # the shifted exponents may themselves still be >= phi; fold downward
        for e in range(p**K - 1, phi - 1, -1):
            c = vec[e]
            if c:
                vec[e] = 0
                if e in rows:
                    for j, cc in rows[e]:
                        vec[j] += c * cc
                else:  # e arises only above d in the loop, already folded
                    for i in range(p - 1):
                        vec[e - phi + i * q] -= c
        rows[d] = tuple((j, c) for j, c in enumerate(vec[:phi]) if c)
    return rows


class Context:
    """A computation session: prime handling, weights, symbol field.

    symbolic-p mode keeps the prime as the variable P (no cyclotomics);
    numeric mode fixes an actual prime and unlocks psi/zeta values.
    """

    def __init__(self, prime, r1, r2, symbolic_p=False, transposed_convention=False):
        if r1 < r2 or r2 < 0:
            raise ValueError("weights must satisfy r1 >= r2 >= 0")
        if symbolic_p:
            self.prime = None
        else:
            if prime is None or prime < 2:
                raise ValueError("numeric mode needs a prime")
            self.prime = int(prime)
        self.r1, self.r2 = int(r1), int(r2)
        self.w = self.r1 + self.r2 + 3
        self.symbolic_p = bool(symbolic_p)
        # debugging switch for the torus-character convention (see group.py)
        self.transposed_convention = bool(transposed_convention)
        gens = SYMBOLIC_GENS if symbolic_p else NUMERIC_GENS
        self.field, syms = _make_field(gens)
        self._gen = dict(zip(gens, syms))

    # -- constructors -------------------------------------------------------

    def scalar(self, x):
        """Embed an int/Fraction/FracElement as a Scalar."""
        if isinstance(x, Scalar):
            if x.ctx is not self:
                raise ValueError("scalar from a different context")
            return x
        if isinstance(x, (int, Fraction)):
            f = self.field.ground_new(_fraction_to_qq(x))
        else:
            f = x  # assumed FracElement of self.field
        if not f:
            return Scalar(self, 0, {})
        return Scalar(self, 0, {(0, 0): f})

    def sym(self, name):
        if name == "S":
            return Scalar(self, 0, {(0, 1): self.field.one})
        if name == "P" and not self.symbolic_p:
            return self.scalar(self.prime)
        if name in ("gamma", "delta"):
            return self.gamma() if name == "gamma" else self.delta()
        return self.scalar(self._gen[name])

    def zero(self):
        return Scalar(self, 0, {})

    def one(self):
        return self.scalar(1)

    def p_int(self):
        """The prime as a Scalar (P or the number)."""
        return self.sym("P") if self.symbolic_p else self.scalar(self.prime)

    def _p_frac(self):
        """The prime inside the coefficient field (FracElement or QQ)."""
        if self.symbolic_p:
            return self._gen["P"]
        return self.field.ground_new(QQ(self.prime))

    def p_power(self, n):
        """p^(n/2) as a Scalar, n an integer (odd n uses the S symbol)."""
        n = int(n)
        half = n % 2
        m = (n - half) // 2
        f = self.field.one * self._p_frac() ** m if m >= 0 else self.field.one / self._p_frac() ** (-m)
        return Scalar(self, 0, {(0, half): f})

    # -- derived Hecke parameters ------------------------------------------

    def alpha(self):
        return self.sym("a")

    def beta(self):
        return self.sym("b")

    def gamma(self):
        return self.p_power(2 * self.w) * self.sym("c1") * self.sym("c2") / self.sym("b")

    def delta(self):
        return self.p_power(2 * self.w) * self.sym("c1") * self.sym("c2") / self.sym("a")

    def chi_pi(self):
        """Central character value at p: chi(p) = c1*c2."""
        return self.sym("c1") * self.sym("c2")

    # -- cyclotomic values ---------------------------------------------------

    def zeta(self, depth, power=1):
        """zeta_{p^depth}^power as a Scalar (numeric mode only)."""
        if self.symbolic_p:
            raise ValueError("cyclotomic values need numeric-p mode")
        if depth < 0:
            raise ValueError("depth must be >= 0")
        power = int(power) % (self.prime**depth if depth else 1)
        if depth == 0 or power == 0:
            return self.one()
        s = Scalar(self, depth, {(power, 0): self.field.one})
        return s._reduced()

    def psi(self, x):
        """The unramified additive character of Q_p at a rational argument:
        psi(x) = zeta_{p^e}^c where c/p^e is the p-adic fractional part of x
        (prime-to-p denominators are p-adic units), psi(1/p^n) = zeta_{p^n}."""
        x = Fraction(x)
        den = x.denominator
        e = 0
        while den % self.prime == 0:
            den //= self.prime
            e += 1
        if e == 0:
            return self.one()
        pe = self.prime**e
        num = (x.numerator * pow(den, -1, pe)) % pe
        return self.zeta(e, num)

    def __repr__(self):
        mode = "symbolic-p" if self.symbolic_p else f"p={self.prime}"
        return f"Context({mode}, r1={self.r1}, r2={self.r2})"


class Scalar:
    """Element of the working field; immutable, canonical after _reduced."""

    __slots__ = ("ctx", "K", "parts")

    def __init__(self, ctx, K, parts):
        self.ctx = ctx
        self.K = K
        self.parts = parts

    # -- normalization -------------------------------------------------------

    def _reduced(self):
        """Prune zeros, reduce zeta exponents mod Phi, minimize depth K."""
        p = self.ctx.prime
        parts = {k: v for k, v in self.parts.items() if v}
        K = self.K
        if K:
            phi = phi_pk(p, K)
            if any(j >= phi for (j, _e) in parts):
                rows = _reduction_rows(p, K)
                out = {}
                for (j, e), f in parts.items():
                    if j < phi:
                        out[(j, e)] = out.get((j, e), self.ctx.field.zero) + f
                    else:
                        for j2, c in rows[j]:
                            out[(j2, e)] = out.get((j2, e), self.ctx.field.zero) + f * c
                parts = {k: v for k, v in out.items() if v}
            # depth minimization: subfield elements have support on p*Z
            while K > 0 and all(j % p == 0 for (j, _e) in parts):
                parts = {(j // p, e): f for (j, e), f in parts.items()}
                K -= 1
        return Scalar(self.ctx, K, parts)

    def normalize(self):
        """Canonical form (idempotent); sympy keeps fractions reduced."""
        return self._reduced()

    # -- depth promotion ------------------------------------------------------

    def _promote(self, K):
        if K == self.K:
            return self
        p = self.ctx.prime
        m = p ** (K - self.K)
        return Scalar(self.ctx, K, {(j * m, e): f for (j, e), f in self.parts.items()})

    @staticmethod
    def _common(x, y):
        K = max(x.K, y.K)
        return x._promote(K), y._promote(K), K

    # -- ring operations -----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Scalar):
            if other.ctx is not self.ctx:
                raise ValueError("mixing scalars from different contexts")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx.scalar(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        x, y, K = Scalar._common(self, other)
        parts = dict(x.parts)
        for k, v in y.parts.items():
            parts[k] = parts.get(k, self.ctx.field.zero) + v
        return Scalar(self.ctx, K, parts)._reduced()

    __radd__ = __add__

    def __neg__(self):
        return Scalar(self.ctx, self.K, {k: -v for k, v in self.parts.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        x, y, K = Scalar._common(self, other)
        ctx = self.ctx
        pf = ctx._p_frac()
        acc = {}
        for (j1, e1), f1 in x.parts.items():
            for (j2, e2), f2 in y.parts.items():
                f = f1 * f2
                e = e1 + e2
                if e == 2:
                    e = 0
                    f = f * pf
                j = j1 + j2
                if K:
                    j %= ctx.prime**K
                key = (j, e)
                acc[key] = acc.get(key, ctx.field.zero) + f
        return Scalar(ctx, K, acc)._reduced()

    __rmul__ = __mul__

    def __pow__(self, n):
        n = int(n)
        if n < 0:
            return self.inverse() ** (-n)
        out = self.ctx.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def s_conjugate(self):
        """S -> -S."""
        return Scalar(self.ctx, self.K, {(j, e): (-f if e else f) for (j, e), f in self.parts.items()})

    def conjugate(self):
        """Complex conjugation: zeta -> zeta^(-1) (S and symbols fixed)."""
        if not self.K:
            return self
        n = self.ctx.prime**self.K
        parts = {}
        for (j, e), f in self.parts.items():
            j2 = (-j) % n
            key = (j2, e)
            parts[key] = parts.get(key, self.ctx.field.zero) + f
        return Scalar(self.ctx, self.K, parts)._reduced()

    def _galois(self, t):
        """zeta -> zeta^t for t coprime to p."""
        n = self.ctx.prime**self.K
        parts = {}
        for (j, e), f in self.parts.items():
            key = ((j * t) % n, e)
            parts[key] = parts.get(key, self.ctx.field.zero) + f
        return Scalar(self.ctx, self.K, parts)._reduced()

    def inverse(self):
        s = self._reduced()
        if not s.parts:
            raise ZeroDivisionError("inverse of zero scalar")
        ctx = self.ctx
        # fast path: single term
        if len(s.parts) == 1:
            ((j, e), f), = s.parts.items()
            inv = {}
            je = (-j) % (ctx.prime**s.K) if s.K else 0
            g = 1 / f
            if e:  # 1/(f*S) = S/(f*p)
                g = g / ctx._p_frac()
            inv[(je, e)] = g
            return Scalar(ctx, s.K, inv)._reduced()
        # clear S: z * s_conj(z) has no S part
        zc = s.s_conjugate()
        n1 = (s * zc)._reduced()
        if any(e for (_j, e) in n1.parts):
            raise AssertionError("S-norm retained an S part")
        if not n1.parts:
            raise ZeroDivisorError("nonzero scalar with zero S-norm")
        # clear zeta: multiply by remaining Galois conjugates
        num = zc
        if n1.K:
            p, K = ctx.prime, n1.K
            rest = ctx.one()
            for t in range(2, p**K):
                if t % p:
                    rest = rest * n1._galois(t)
            full = (n1 * rest)._reduced()
            if full.K or any(e for (_j, e) in full.parts):
                raise AssertionError("cyclotomic norm failed to land in the base")
            num = num * rest
            n1 = full
        base = n1.parts.get((0, 0))
        if not base:
            raise ZeroDivisorError("nonzero scalar with zero norm")
        return num * Scalar(ctx, 0, {(0, 0): 1 / base})

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.ctx.scalar(other) / self

    # -- predicates ----------------------------------------------------------

    def is_zero(self):
        return not self._reduced().parts

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ctx.scalar(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("Scalar is not hashable; use .text()")

    def __bool__(self):
        return not self.is_zero()

    def as_fraction(self):
        """The value as a Fraction, if it is one."""
        s = self._reduced()
        if not s.parts:
            return Fraction(0)
        if s.K or set(s.parts) != {(0, 0)}:
            raise ValueError("scalar is not rational")
        f = s.parts[(0, 0)]
        num, den = f.numer, f.denom
        if num.is_ground and den.is_ground:
            return _qq_to_fraction(num.coeff(1)) / _qq_to_fraction(den.coeff(1))
        raise ValueError("scalar is not rational")

    # -- serialization --------------------------------------------------------

    def text(self):
        """Canonical text form: deterministic monomial order, explicit exponents."""
        s = self._reduced()
        if not s.parts:
            return "0"
        gens = SYMBOLIC_GENS if self.ctx.symbolic_p else NUMERIC_GENS
        pieces = []
        for (j, e) in sorted(s.parts):
            f = s.parts[(j, e)]
            body = f"({_frac_text(f, gens)})"
            if j:
                body += f"*z^{j}"
            if e:
                body += "*S"
            pieces.append(body)
        head = f"zeta[{self.ctx.prime}^{s.K}] " if s.K else ""
        return head + " + ".join(pieces)

    def __repr__(self):
        return f"Scalar({self.text()})"


def _poly_text(poly, gens):
    terms = sorted(poly.iterterms(), key=lambda t: t[0])
    if not terms:
        return "0"
    out = []
    for mon, coeff in terms:
        factors = [str(_qq_to_fraction(coeff))]
        for g, e in zip(gens, mon):
            if e:
                factors.append(f"{g}^{e}")
        out.append("*".join(factors))
    return " + ".join(out)


def _frac_text(f, gens):
    num = _poly_text(f.numer, gens)
    if f.denom == f.field.ring.one:
        return num
    return f"[{num}]/[{_poly_text(f.denom, gens)}]"


# ---------------------------------------------------------------------------
# module-level operations in the spec's vocabulary


def normalize(x: Scalar) -> Scalar:
    return x.normalize()


def geom_sum(c: Scalar, mu: Scalar) -> Scalar:
    """Formal sum of c * mu^n over n >= 0, i.e. c/(1-mu); mu=1 is a pole."""
    one = c.ctx.one()
    d = one - mu
    if d.is_zero():
        raise ZeroDivisionError("geometric series at mu = 1 has a pole")
    return c / d

def specialize(x: Scalar, bindings: dict) -> Scalar:
    """Substitute symbols (by name) and normalize.

    Values may be ints, Fractions, or Scalars of the *target* context.
    Binding "P" to a prime moves a symbolic-p scalar into the numeric
    context for that prime (S then squares to the prime automatically).
    """
    ctx = x.ctx
    names = SYMBOLIC_GENS if ctx.symbolic_p else NUMERIC_GENS
    unknown = set(bindings) - set(names)
    if unknown:
        raise KeyError(f"cannot bind {sorted(unknown)}")
    if ctx.symbolic_p and "P" in bindings:
        pval = bindings["P"]
        if isinstance(pval, Scalar):
            raise ValueError("P must be bound to an integer prime")
        target = Context(int(pval), ctx.r1, ctx.r2)
    else:
        target = ctx
    values = {}
    for name in names:
        if name in bindings:
            v = bindings[name]
            values[name] = v if isinstance(v, Scalar) else target.scalar(Fraction(v))
            if values[name].ctx is not target:
                raise ValueError(f"binding for {name} must live in the target context")
        else:
            values[name] = target.sym(name) if name != "P" else target.p_int()
    out = target.zero()
    for (j, e), f in x.parts.items():
        if j and target.symbolic_p:
            raise ValueError("cyclotomic parts cannot enter symbolic-p mode")
        num = _eval_poly(f.numer, names, values, target)
        den = _eval_poly(f.denom, names, values, target)
        if den.is_zero():
            raise ZeroDivisionError("specialization sends a denominator to zero")
        term = num / den
        if j:
            term = term * Scalar(target, x.K, {(j, 0): target.field.one})._reduced()
        if e:
            term = term * target.sym("S")
        out = out + term
    return out.normalize()


def _eval_poly(poly, names, values, target):
    out = target.zero()
    for mon, coeff in poly.iterterms():
        term = target.scalar(_qq_to_fraction(coeff))
        for name, e in zip(names, mon):
            if e:
                term = term * values[name] ** e
        out = out + term
    return out


# ---------------------------------------------------------------------------
# univariate rational functions in the series variable X over Scalar


class GeneratingSeries:
    """Rational function N(X)/D(X) with Scalar coefficients (dense lists)."""

    def __init__(self, ctx, num, den=None):
        self.ctx = ctx
        self.num = [ctx.scalar(c) if not isinstance(c, Scalar) else c for c in num]
        den = den if den is not None else [1]
        self.den = [ctx.scalar(c) if not isinstance(c, Scalar) else c for c in den]
        if all(c.is_zero() for c in self.den):
            raise ZeroDivisionError("zero denominator")

    @staticmethod
    def from_scalar(x):
        return GeneratingSeries(x.ctx, [x])

    @staticmethod
    def one_minus(x, ctx=None):
        """The linear factor 1 - x*X."""
        ctx = ctx or x.ctx
        return GeneratingSeries(ctx, [ctx.one(), -ctx.scalar(x) if not isinstance(x, Scalar) else -x])

    def __mul__(self, other):
        if isinstance(other, Scalar):
            return GeneratingSeries(self.ctx, [c * other for c in self.num], self.den)
        num = _poly_mul(self.num, other.num, self.ctx)
        den = _poly_mul(self.den, other.den, self.ctx)
        return GeneratingSeries(self.ctx, num, den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Scalar):
            return GeneratingSeries(self.ctx, self.num, [c * other for c in self.den])
        return GeneratingSeries(self.ctx, _poly_mul(self.num, other.den, self.ctx),
                                _poly_mul(self.den, other.num, self.ctx))

    def __add__(self, other):
        if isinstance(other, Scalar):
            other = GeneratingSeries.from_scalar(other)
        num1 = _poly_mul(self.num, other.den, self.ctx)
        num2 = _poly_mul(other.num, self.den, self.ctx)
        n = max(len(num1), len(num2))
        num1 += [self.ctx.zero()] * (n - len(num1))
        num2 += [self.ctx.zero()] * (n - len(num2))
        return GeneratingSeries(self.ctx, [x + y for x, y in zip(num1, num2)],
                                _poly_mul(self.den, other.den, self.ctx))

    def __sub__(self, other):
        if isinstance(other, Scalar):
            other = GeneratingSeries.from_scalar(other)
        return self + (other * self.ctx.scalar(-1))

    def constant_term(self):
        if self.den[0].is_zero():
            raise ZeroDivisionError("series not expandable at X = 0")
        return self.num[0] / self.den[0]

    def expand(self, order):
        """Exact Taylor coefficients at X=0 up to the given order (inclusive)."""
        d0 = self.den[0]
        if d0.is_zero():
            raise ZeroDivisionError("series not expandable at X = 0")
        inv = d0.inverse()
        coeffs = []
        for n in range(order + 1):
            c = self.num[n] if n < len(self.num) else self.ctx.zero()
            for k in range(1, min(n, len(self.den) - 1) + 1):
                c = c - self.den[k] * coeffs[n - k]
            coeffs.append(c * inv)
        return coeffs

    def shift_down(self):
        """(F(X) - F(0))/X; the torus-series recursion step."""
        c0 = self.constant_term()
        num = [a - c0 * b for a, b in zip(self.num, self.den + [self.ctx.zero()] * max(0, len(self.num) - len(self.den)))]
        num += [self.ctx.zero() - c0 * b for b in self.den[len(self.num):]]
        if num and not num[0].is_zero():
            raise AssertionError("constant term did not cancel")
        return GeneratingSeries(self.ctx, num[1:] or [self.ctx.zero()], self.den)

    def eval_at(self, x):
        """Evaluate at a Scalar point (must not be a pole)."""
        num = _poly_eval(self.num, x)
        den = _poly_eval(self.den, x)
        if den.is_zero():
            raise ZeroDivisionError("evaluation at a pole")
        return num / den

    def __eq__(self, other):
        num1 = _poly_mul(self.num, other.den, self.ctx)
        num2 = _poly_mul(other.num, self.den, self.ctx)
        n = max(len(num1), len(num2))
        num1 += [self.ctx.zero()] * (n - len(num1))
        num2 += [self.ctx.zero()] * (n - len(num2))
        return all((x - y).is_zero() for x, y in zip(num1, num2))


def _poly_mul(f, g, ctx):
    out = [ctx.zero() for _ in range(len(f) + len(g) - 1)]
    for i, a in enumerate(f):
        if a.is_zero():
            continue
        for j, b in enumerate(g):
            if not b.is_zero():
                out[i + j] = out[i + j] + a * b
    return out


def _poly_eval(coeffs, x):
    out = x.ctx.zero()
    for c in reversed(coeffs):
        out = out * x + c
    return out


def series_expand(g: GeneratingSeries, order: int):
    return g.expand(order)


# ---------------------------------------------------------------------------
# standalone cyclotomic numbers (psi values, character tables)


class CyclotomicNumber:
    """Element of Q(zeta_{p^K}) as a coefficient vector over the power basis."""

    __slots__ = ("p", "K", "coeffs")

    def __init__(self, p, K, coeffs):
        self.p = p
        self.K = K
        phi = phi_pk(p, K) if K else 1
        coeffs = [Fraction(c) for c in coeffs]
        if len(coeffs) != phi:
            raise ValueError("coefficient vector has wrong length")
        self.coeffs = tuple(coeffs)

    @staticmethod
    def from_rational(p, x):
        return CyclotomicNumber(p, 0, [Fraction(x)])

    @staticmethod
    def root(p, K, power=1):
        """zeta_{p^K}^power."""
        if K == 0:
            return CyclotomicNumber(p, 0, [1])
        power %= p**K
        phi = phi_pk(p, K)
        vec = {power: Fraction(1)}
        out = [Fraction(0)] * phi
        rows = _reduction_rows(p, K)
        for j, c in vec.items():
            if j < phi:
                out[j] += c
            else:
                for j2, cc in rows[j]:
                    out[j2] += c * cc
        cn = CyclotomicNumber(p, K, out)
        return cn.reduce_depth()

    def reduce_depth(self):
        p, K, coeffs = self.p, self.K, list(self.coeffs)
        while K > 0:
            support = [j for j, c in enumerate(coeffs) if c]
            if all(j % p == 0 for j in support):
                coeffs = [coeffs[j * p] for j in range(phi_pk(p, K - 1) if K > 1 else 1)]
                K -= 1
            else:
                break
        return CyclotomicNumber(p, K, coeffs)

    def _promote(self, K):
        if K == self.K:
            return self
        m = self.p ** (K - self.K)
        out = [Fraction(0)] * phi_pk(self.p, K)
        for j, c in enumerate(self.coeffs):
            out[j * m] = c
        return CyclotomicNumber(self.p, K, out)

    def _binop(self, other):
        if isinstance(other, (int, Fraction)):
            other = CyclotomicNumber.from_rational(self.p, other)
        K = max(self.K, other.K)
        return self._promote(K), other._promote(K), K

    def __add__(self, other):
        x, y, K = self._binop(other)
        return CyclotomicNumber(self.p, K, [a + b for a, b in zip(x.coeffs, y.coeffs)]).reduce_depth()

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.p, self.K, [-c for c in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CyclotomicNumber.from_rational(self.p, other)
        return self + (-other)

    def __mul__(self, other):
        x, y, K = self._binop(other)
        if K == 0:
            return CyclotomicNumber(self.p, 0, [x.coeffs[0] * y.coeffs[0]])
        n = self.p**K
        raw = [Fraction(0)] * (2 * phi_pk(self.p, K))
        for i, ci in enumerate(x.coeffs):
            if not ci:
                continue
            for j, cj in enumerate(y.coeffs):
                if cj:
                    raw[(i + j) % n if i + j >= n else i + j] += ci * cj
        phi = phi_pk(self.p, K)
        out = list(raw[:phi])
        rows = _reduction_rows(self.p, K)
        for d in range(phi, len(raw)):
            c = raw[d]
            if c:
                for j2, cc in rows[d]:
                    out[j2] += c * cc
        return CyclotomicNumber(self.p, K, out).reduce_depth()

    __rmul__ = __mul__

    def conjugate(self):
        """zeta -> zeta^(-1)."""
        if self.K == 0:
            return self
        n = self.p**self.K
        acc = CyclotomicNumber(self.p, self.K, [0] * phi_pk(self.p, self.K))
        for j, c in enumerate(self.coeffs):
            if c:
                acc = acc + CyclotomicNumber.root(self.p, self.K, (-j) % n)._promote_mul(c)
        return acc.reduce_depth()

    def _promote_mul(self, c):
        return CyclotomicNumber(self.p, self.K, [x * c for x in self.coeffs])

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CyclotomicNumber.from_rational(self.p, other)
        return (self - other).is_zero()

    def __hash__(self):
        r = self.reduce_depth()
        return hash((r.p, r.K, r.coeffs))

    def as_scalar(self, ctx):
        if self.K == 0:
            return ctx.scalar(self.coeffs[0])
        out = ctx.zero()
        for j, c in enumerate(self.coeffs):
            if c:
                out = out + ctx.zeta(self.K, j) * ctx.scalar(c)
        return out

    def __repr__(self):
        if self.K == 0:
            return f"CyclotomicNumber({self.coeffs[0]})"
        return f"CyclotomicNumber(p={self.p}, K={self.K}, {list(self.coeffs)})"
