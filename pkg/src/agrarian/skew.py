"""Twisted polynomials, their skew fraction field, and the Dieudonne determinant.

The skew fields handled here are Ore quotient fields of ``D[t; alpha]`` where
``D`` is a commutative rational function field (:class:`RatFun`) and ``alpha``
is a monomial substitution such as ``y -> 2y``.  Multiplication obeys
``t * r = alpha(r) * t``.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .core_arith import (
    NEG_INF,
    ONE,
    POS_INF,
    GaussianRational,
    LaurentPoly,
    RatFun,
    _univariate_index,
    det_commutative,
    kernel_vector,
    gaussian,
    univariate_gcd,
)


# ---------------------------------------------------------------------------
# Field automorphisms of K(y_1..y_k)
# ---------------------------------------------------------------------------


def _compose_images(outer, inner):
    """Images of ``outer o inner`` given both as variable -> (scalar, exps) tables."""
    rank = len(inner)
    result = []
    for scal, vec in inner:
        coeff = gaussian(scal)
        exps = [0] * rank
        for l, e in enumerate(vec):
            if e:
                oscal, ovec = outer[l]
                coeff = coeff * gaussian(oscal) ** e
                for r in range(rank):
                    exps[r] += e * ovec[r]
        result.append((coeff, tuple(exps)))
    return tuple(result)


class FieldAutomorphism:
    """A monomial-substitution automorphism of the rational function field.

    ``forward[j] = (c, m)`` means ``y_j -> c * y^m``.  The inverse table must be
    supplied and is checked to be a two-sided inverse on every variable and on
    a random sample of rational functions.
    """

    def __init__(self, forward: Sequence, inverse: Sequence, *, seed: int = 0):
        self.rank = len(forward)
        self.forward = tuple((gaussian(c), tuple(int(x) for x in m)) for c, m in forward)
        self.inverse_table = tuple((gaussian(c), tuple(int(x) for x in m)) for c, m in inverse)
        if len(self.inverse_table) != self.rank or any(len(m) != self.rank for _, m in self.forward + self.inverse_table):
            raise ValueError("automorphism tables must be square")
        ident = tuple((ONE, tuple(1 if i == j else 0 for i in range(self.rank))) for j in range(self.rank))
        if _compose_images(self.forward, self.inverse_table) != ident or _compose_images(
            self.inverse_table, self.forward
        ) != ident:
            raise ValueError("forward and inverse substitutions are not mutually inverse")
        self._powers = {0: ident, 1: self.forward, -1: self.inverse_table}
        self._lock = threading.Lock()
        self.is_identity = self.forward == ident
        self._validate_sample(seed)

    @classmethod
    def identity(cls, rank: int) -> "FieldAutomorphism":
        ident = [(1, tuple(1 if i == j else 0 for i in range(rank))) for j in range(rank)]
        return cls(ident, ident)

    @classmethod
    def scaling(cls, factors: Sequence) -> "FieldAutomorphism":
        """``y_j -> c_j y_j``; the case ``y -> 2y`` is ``scaling([2])``."""
        rank = len(factors)
        unit = [tuple(1 if i == j else 0 for i in range(rank)) for j in range(rank)]
        fwd = [(gaussian(c), unit[j]) for j, c in enumerate(factors)]
        inv = [(gaussian(c).inverse(), unit[j]) for j, c in enumerate(factors)]
        return cls(fwd, inv)

    def _images(self, k: int):
        with self._lock:
            imgs = self._powers.get(k)
            if imgs is not None:
                return imgs
            step = 1 if k > 0 else -1
            cur_k = max((p for p in self._powers if p * step >= 0 and abs(p) <= abs(k)), key=abs)
            cur = self._powers[cur_k]
            while cur_k != k:
                cur = _compose_images(self._powers[step], cur)
                cur_k += step
                self._powers[cur_k] = cur
            return cur

    def apply(self, f: RatFun, power: int = 1) -> RatFun:
        if power == 0 or self.is_identity:
            return f
        if f.rank != self.rank:
            raise ValueError("automorphism rank mismatch")
        imgs = self._images(power)
        num = f.num.substitute_monomials(imgs, self.rank)
        den = f.den.substitute_monomials(imgs, self.rank)
        return RatFun._raw(num, den)

    __call__ = apply

    def _validate_sample(self, seed: int):
        rng = random.Random(seed)
        rank = self.rank
        for _ in range(3):
            terms_a = {tuple(rng.randint(-2, 2) for _ in range(rank)): rng.randint(-3, 3) or 1 for _ in range(3)}
            terms_b = {tuple(rng.randint(-2, 2) for _ in range(rank)): rng.randint(-3, 3) or 1 for _ in range(3)}
            a = RatFun(LaurentPoly(terms_a, rank))
            den = LaurentPoly.one(rank) + LaurentPoly.variable(0, rank) if rank else None
            b = RatFun(LaurentPoly(terms_b, rank), den)
            if self.apply(self.apply(a), -1) != a:
                raise ValueError("automorphism does not invert on sample")
            if self.apply(a * b) != self.apply(a) * self.apply(b) or self.apply(a + b) != self.apply(a) + self.apply(b):
                raise ValueError("substitution is not a ring homomorphism on sample")

    def __eq__(self, other):
        if not isinstance(other, FieldAutomorphism):
            return NotImplemented
        return self.forward == other.forward

    def __hash__(self):
        return hash(self.forward)

    def __repr__(self):
        return f"FieldAutomorphism({self.forward})"


# ---------------------------------------------------------------------------
# Twisted Laurent polynomials
# ---------------------------------------------------------------------------


class OrePoly:
    """Finite sum ``sum_i c_i t^i`` with coefficients in K(y), twisted by ``alpha``."""

    __slots__ = ("coeffs", "alpha")

    def __init__(self, coeffs: dict, alpha: FieldAutomorphism):
        self.alpha = alpha
        clean = {}
        for e, c in coeffs.items():
            if not isinstance(c, RatFun):
                c = RatFun(c, rank=alpha.rank) if not isinstance(c, LaurentPoly) else RatFun(c)
            if c:
                clean[int(e)] = c
        self.coeffs = clean

    @classmethod
    def _raw(cls, coeffs: dict, alpha: FieldAutomorphism) -> "OrePoly":
        obj = object.__new__(cls)
        obj.coeffs = coeffs
        obj.alpha = alpha
        return obj

    @property
    def rank(self) -> int:
        return self.alpha.rank

    @classmethod
    def zero(cls, alpha) -> "OrePoly":
        return cls._raw({}, alpha)

    @classmethod
    def one(cls, alpha) -> "OrePoly":
        return cls._raw({0: RatFun.one(alpha.rank)}, alpha)

    @classmethod
    def t_power(cls, k: int, alpha) -> "OrePoly":
        return cls._raw({k: RatFun.one(alpha.rank)}, alpha)

    @classmethod
    def scalar(cls, c, alpha) -> "OrePoly":
        return cls({0: c}, alpha)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def degree(self):
        return max(self.coeffs) if self.coeffs else NEG_INF

    def low(self):
        return min(self.coeffs) if self.coeffs else POS_INF

    def lc(self) -> RatFun:
        return self.coeffs[max(self.coeffs)]

    def tc(self) -> RatFun:
        return self.coeffs[min(self.coeffs)]

    def width(self):
        """deg_t: top exponent minus bottom exponent (``-inf`` for 0)."""
        if not self.coeffs:
            return NEG_INF
        return max(self.coeffs) - min(self.coeffs)

    def coefficient(self, e: int) -> RatFun:
        return self.coeffs.get(e, RatFun.zero(self.rank))

    def _same(self, other: "OrePoly"):
        if self.alpha is not other.alpha and self.alpha != other.alpha:
            raise ValueError("mismatched base field or automorphism")

    def __add__(self, other):
        if not isinstance(other, OrePoly):
            return NotImplemented
        self._same(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            s = out[e] + c if e in out else c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return OrePoly._raw(out, self.alpha)

    def __neg__(self):
        return OrePoly._raw({e: -c for e, c in self.coeffs.items()}, self.alpha)

    def __sub__(self, other):
        if not isinstance(other, OrePoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, OrePoly):
            return ore_mul(self, other)
        if isinstance(other, (RatFun, LaurentPoly, GaussianRational, int)):
            return ore_mul(self, OrePoly.scalar(other, self.alpha))
        return NotImplemented

    def left_scale(self, c: RatFun) -> "OrePoly":
        if not c:
            return OrePoly.zero(self.alpha)
        return OrePoly._raw({e: c * v for e, v in self.coeffs.items()}, self.alpha)

    def left_t_shift(self, k: int) -> "OrePoly":
        """``t^k * self``."""
        return OrePoly._raw({e + k: self.alpha.apply(c, k) for e, c in self.coeffs.items()}, self.alpha)

    def right_t_shift(self, k: int) -> "OrePoly":
        """``self * t^k``."""
        return OrePoly._raw({e + k: c for e, c in self.coeffs.items()}, self.alpha)

    def __eq__(self, other):
        if not isinstance(other, OrePoly):
            return NotImplemented
        if set(self.coeffs) != set(other.coeffs):
            return False
        return all(self.coeffs[e] == other.coeffs[e] for e in self.coeffs)

    __hash__ = None

    def __repr__(self):
        if not self.coeffs:
            return "OrePoly(0)"
        parts = []
        for e in sorted(self.coeffs):
            c = str(self.coeffs[e])
            parts.append(c if e == 0 else f"({c})*t^{e}")
        return "OrePoly(" + " + ".join(parts) + ")"


def ore_mul(p: OrePoly, q: OrePoly) -> OrePoly:
    """Twisted convolution: ``(a t^i)(b t^j) = a alpha^i(b) t^(i+j)``."""
    p._same(q)
    if not p.coeffs or not q.coeffs:
        return OrePoly.zero(p.alpha)
    alpha = p.alpha
    out: dict = {}
    for i, a in p.coeffs.items():
        for j, b in q.coeffs.items():
            term = a * alpha.apply(b, i)
            k = i + j
            out[k] = out[k] + term if k in out else term
    return OrePoly._raw({k: v for k, v in out.items() if v}, alpha)


def _require_polynomial(*polys: OrePoly):
    for p in polys:
        if p.coeffs and min(p.coeffs) < 0:
            raise ValueError("division needs genuine polynomials in t (shift the supports first)")


def ore_left_divmod(a: OrePoly, b: OrePoly):
    """Return ``(q, r)`` with ``a = q*b + r`` and ``deg r < deg b``."""
    a._same(b)
    if not b.coeffs:
        raise ZeroDivisionError("division by the zero twisted polynomial")
    _require_polynomial(a, b)
    alpha = a.alpha
    m = b.degree()
    lead_b = b.lc()
    quot: dict = {}
    rem = a
    while rem.coeffs and rem.degree() >= m:
        d = rem.degree()
        c = rem.lc() / alpha.apply(lead_b, d - m)
        quot[d - m] = c
        rem = rem - ore_mul(OrePoly._raw({d - m: c}, alpha), b)
    return OrePoly._raw(quot, alpha), rem


def ore_right_divmod(a: OrePoly, b: OrePoly):
    """Return ``(q, r)`` with ``a = b*q + r`` and ``deg r < deg b``."""
    a._same(b)
    if not b.coeffs:
        raise ZeroDivisionError("division by the zero twisted polynomial")
    _require_polynomial(a, b)
    alpha = a.alpha
    m = b.degree()
    lead_b = b.lc()
    quot: dict = {}
    rem = a
    while rem.coeffs and rem.degree() >= m:
        d = rem.degree()
        c = alpha.apply(rem.lc() / lead_b, -m)
        quot[d - m] = c
        rem = rem - ore_mul(b, OrePoly._raw({d - m: c}, alpha))
    return OrePoly._raw(quot, alpha), rem


def _primitive_scalar(p: OrePoly, *others: OrePoly):
    """Scalar ``c`` making ``c * p`` (and ``c * q`` for the others) have
    polynomial, content-free coefficients with the lead of ``p`` monic.

    Only univariate coefficient fields are reduced; otherwise ``c`` just makes
    the leading coefficient 1.  Keeps Euclidean remainder sequences small.
    """
    if not p.coeffs:
        return None
    fracs = [f for q in (p,) + others for f in q.coeffs.values()]
    var = _univariate_index(*(x for f in fracs for x in (f.num, f.den)))
    if var is None or var < 0:
        return p.lc().inverse()
    rank = p.rank
    den = fracs[0].den
    for f in fracs[1:]:
        g = univariate_gcd(den, f.den, var)
        den = den * f.den.exquo(g)
    content = None
    for f in fracs:
        n = (f * RatFun(den)).as_polynomial()
        content = n if content is None else univariate_gcd(content, n, var)
    c = RatFun(den, content)
    lead = (p.lc() * c).num.leading_term()[1]
    return c * RatFun(LaurentPoly.one(rank).scale(lead.inverse()))


def _to_polynomial(p: OrePoly):
    """Left-multiply by ``t^k`` so the support starts at 0; returns (poly, k)."""
    if not p.coeffs:
        return p, 0
    k = -min(p.coeffs)
    return (p.left_t_shift(k) if k else p), k


def _monomial_inverse(m: OrePoly) -> OrePoly:
    """``(c t^k)^{-1} = alpha^{-k}(c^{-1}) t^{-k}``."""
    (k, c), = m.coeffs.items()
    return OrePoly._raw({-k: m.alpha.apply(c.inverse(), -k)}, m.alpha)


def _polynomial_coefficients(p: OrePoly):
    """``(c, table)`` with ``c * p`` having Laurent polynomial coefficients, or None."""
    c = _primitive_scalar(p)
    scaled = p.left_scale(c)
    table = {}
    for e, f in scaled.coeffs.items():
        if not f.is_polynomial():
            return None
        table[e] = f.as_polynomial()
    return c, table


def _multiple_by_kernel(a: OrePoly, b: OrePoly):
    """``(u, v)`` with ``u*a == v*b`` from the kernel of the coefficient system.

    With ``deg u <= deg b`` and ``deg v <= deg a`` the coefficient of ``t^k`` in
    ``u*a - v*b`` is linear in the coefficients of ``u`` and ``v`` over the
    commutative base field.  Returns None when the coefficients are not
    univariate-reducible to polynomials.
    """
    alpha = a.alpha
    ca = _polynomial_coefficients(a)
    cb = _polynomial_coefficients(b)
    if ca is None or cb is None:
        return None
    (la, ta), (lb, tb) = ca, cb
    m, n = max(ta), max(tb)
    rank = alpha.rank
    zero = LaurentPoly.zero(rank)

    def twisted(table, i, j):
        x = table.get(j)
        if x is None:
            return zero
        if i == 0:
            return x
        return alpha.apply(RatFun(x), i).as_polynomial()

    rows = []
    for k in range(m + n + 1):
        row = [twisted(ta, i, k - i) for i in range(n + 1)]
        row += [-twisted(tb, i, k - i) for i in range(m + 1)]
        rows.append(row)
    x = kernel_vector(rows)
    u = OrePoly({i: RatFun(x[i]) for i in range(n + 1) if x[i].terms}, alpha)
    v = OrePoly({i: RatFun(x[n + 1 + i]) for i in range(m + 1) if x[n + 1 + i].terms}, alpha)
    # u * (la a) == v * (lb b)
    return ore_mul(u, OrePoly.scalar(la, alpha)), ore_mul(v, OrePoly.scalar(lb, alpha))


def left_common_multiple(a: OrePoly, b: OrePoly):
    """Nonzero ``(u, v)`` with ``u*a == v*b`` (a left common multiple)."""
    if not a.coeffs or not b.coeffs:
        raise ZeroDivisionError("common multiple with zero")
    alpha = a.alpha
    one = OrePoly.one(alpha)
    if a == b:
        return one, one
    # a monomial c t^k is a unit of the Laurent ring: u = 1, v = a * (c t^k)^{-1}
    if b.width() == 0:
        return one, ore_mul(a, _monomial_inverse(b))
    if a.width() == 0:
        return ore_mul(b, _monomial_inverse(a)), one
    pa, ka = _to_polynomial(a)
    pb, kb = _to_polynomial(b)
    found = _multiple_by_kernel(pa, pb)
    if found is not None:
        u, v = found
        u = ore_mul(u, OrePoly.t_power(ka, alpha)) if ka else u
        v = ore_mul(v, OrePoly.t_power(kb, alpha)) if kb else v
        c = _primitive_scalar(u, v)
        return u.left_scale(c), v.left_scale(c)
    zero = OrePoly.zero(alpha)
    r0, s0, t0 = pa, one, zero
    r1, s1, t1 = pb, zero, one
    while r1.coeffs:
        q, r = ore_left_divmod(r0, r1)
        s2, t2 = s0 - ore_mul(q, s1), t0 - ore_mul(q, t1)
        c = _primitive_scalar(r if r.coeffs else s2)
        r0, s0, t0, r1, s1, t1 = r1, s1, t1, r.left_scale(c), s2.left_scale(c), t2.left_scale(c)
    # s1*pa + t1*pb == 0
    u = ore_mul(s1, OrePoly.t_power(ka, alpha)) if ka else s1
    v = ore_mul(-t1, OrePoly.t_power(kb, alpha)) if kb else -t1
    c = _primitive_scalar(u, v)
    return u.left_scale(c), v.left_scale(c)


def greatest_common_left_divisor(a: OrePoly, b: OrePoly) -> OrePoly:
    """Monic ``g`` with ``a = g*a'`` and ``b = g*b'`` (polynomial inputs)."""
    r0, r1 = a, b
    while r1.coeffs:
        _, r = ore_right_divmod(r0, r1)
        if r.coeffs:
            c = _primitive_scalar(r)
            r = ore_mul(r, OrePoly.scalar(r.alpha.apply(c, -r.degree()), r.alpha))
        r0, r1 = r1, r
    if not r0.coeffs:
        return r0
    # right-scale to monic: g * c with c chosen so the leading coefficient is 1
    d = r0.degree()
    c = r0.alpha.apply(r0.lc().inverse(), -d)
    return ore_mul(r0, OrePoly.scalar(c, r0.alpha))


# ---------------------------------------------------------------------------
# Left fractions q^{-1} p
# ---------------------------------------------------------------------------


class SkewRatFun:
    """The left fraction ``den^{-1} * num`` in the Ore quotient field of ``D[t; alpha]``."""

    __slots__ = ("den", "num", "alpha")

    def __init__(self, num: OrePoly, den: OrePoly | None = None):
        alpha = num.alpha
        if den is None:
            den = OrePoly.one(alpha)
        num._same(den)
        if not den.coeffs:
            raise ZeroDivisionError("zero denominator")
        self.alpha = alpha
        self.den, self.num = _normalize_left_fraction(den, num)

    @classmethod
    def from_poly(cls, p: OrePoly) -> "SkewRatFun":
        return cls(p)

    @classmethod
    def zero(cls, alpha) -> "SkewRatFun":
        return cls(OrePoly.zero(alpha))

    @classmethod
    def one(cls, alpha) -> "SkewRatFun":
        return cls(OrePoly.one(alpha))

    def is_zero(self) -> bool:
        return not self.num.coeffs

    def __bool__(self):
        return bool(self.num.coeffs)

    def _lift(self, other):
        if isinstance(other, SkewRatFun):
            return other
        if isinstance(other, OrePoly):
            return SkewRatFun(other)
        if isinstance(other, (RatFun, LaurentPoly, GaussianRational, int)):
            return SkewRatFun(OrePoly.scalar(other, self.alpha))
        return None

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        if not other.num.coeffs:
            return self
        if not self.num.coeffs:
            return other
        u, v = left_common_multiple(self.den, other.den)
        return SkewRatFun(ore_mul(u, self.num) + ore_mul(v, other.num), ore_mul(u, self.den))

    __radd__ = __add__

    def __neg__(self):
        obj = object.__new__(SkewRatFun)
        obj.alpha = self.alpha
        obj.den = self.den
        obj.num = -self.num
        return obj

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        if not self.num.coeffs or not other.num.coeffs:
            return SkewRatFun.zero(self.alpha)
        # q1^{-1} p1 q2^{-1} p2 with u p1 = v q2  =>  (u q1)^{-1} (v p2)
        u, v = left_common_multiple(self.num, other.den)
        return SkewRatFun(ore_mul(v, other.num), ore_mul(u, self.den))

    def __rmul__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other * self

    def inverse(self) -> "SkewRatFun":
        if not self.num.coeffs:
            raise ZeroDivisionError("inverse of zero in the skew field")
        return SkewRatFun(self.den, self.num)

    def __truediv__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __eq__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        if not self.num.coeffs or not other.num.coeffs:
            return not self.num.coeffs and not other.num.coeffs
        u, v = left_common_multiple(self.den, other.den)
        return ore_mul(u, self.num) == ore_mul(v, other.num)

    __hash__ = None

    def ord(self):
        """t-adic order: ``ord num - ord den`` (``inf`` for 0)."""
        if not self.num.coeffs:
            return POS_INF
        return self.num.low() - self.den.low()

    def deg(self):
        """deg_t: ``width(num) - width(den)`` (``-inf`` for 0)."""
        if not self.num.coeffs:
            return NEG_INF
        return self.num.width() - self.den.width()

    def reduced(self) -> "SkewRatFun":
        """The same element with common left factors of den and num cancelled."""
        obj = object.__new__(SkewRatFun)
        obj.alpha = self.alpha
        obj.den, obj.num = _normalize_left_fraction(self.den, self.num, reduce=True)
        return obj

    def is_polynomial(self) -> bool:
        return self.den.width() == 0 or self.reduced().den.width() == 0

    def __repr__(self):
        return f"SkewRatFun(({self.den!r})^-1 * {self.num!r})"


def _normalize_left_fraction(den: OrePoly, num: OrePoly, reduce: bool = False):
    """Shift supports to start at 0 and scale jointly to a monic, content-free pair.

    Common left divisors are only cancelled when ``reduce`` is set: the
    Euclidean sequence is costly and the gcd is almost always trivial, while
    equality, ord and deg never need a reduced pair.
    """
    alpha = den.alpha
    if not num.coeffs:
        return OrePoly.one(alpha), num
    shift = -min(min(den.coeffs), min(num.coeffs))
    if shift:
        den = den.left_t_shift(shift)
        num = num.left_t_shift(shift)
    # one division catches the common case of a fraction that is a polynomial
    if den.width() > 0 and num.width() >= den.width():
        q, r = ore_right_divmod(num, den)
        if not r.coeffs:
            den, num = OrePoly.one(alpha), q
    # after the shift a monomial denominator shares no left factor with num
    if reduce and den.width() > 0 and num.width() > 0:
        g = greatest_common_left_divisor(den, num)
        if g.degree() > 0:
            den, r1 = ore_right_divmod(den, g)
            num, r2 = ore_right_divmod(num, g)
            if r1.coeffs or r2.coeffs:
                raise ArithmeticError("common left divisor does not divide")
    c = _primitive_scalar(den, num)
    if c != RatFun.one(alpha.rank):
        den = den.left_scale(c)
        num = num.left_scale(c)
    return den, num


# ---------------------------------------------------------------------------
# Laurent series prefixes
# ---------------------------------------------------------------------------


class LaurentPrefix:
    """Lazily extended coefficients ``r_start, r_start+1, ...`` of a Laurent series."""

    def __init__(self, start: int, producer: Callable[[int, list], RatFun], alpha: FieldAutomorphism):
        self.start = start
        self._producer = producer
        self._coeffs: list = []
        self._lock = threading.Lock()
        self.alpha = alpha

    def extend_to(self, upto: int) -> tuple:
        """Ensure coefficients for exponents ``< upto`` exist; return a snapshot."""
        with self._lock:
            while self.start + len(self._coeffs) < upto:
                self._coeffs.append(self._producer(self.start + len(self._coeffs), self._coeffs))
            return tuple(self._coeffs[: max(0, upto - self.start)])

    @property
    def coefficients(self) -> tuple:
        with self._lock:
            return tuple(self._coeffs)

    def coefficient(self, e: int) -> RatFun:
        if e < self.start:
            return RatFun.zero(self.alpha.rank)
        return self.extend_to(e + 1)[e - self.start]

    def truncate(self, upto: int) -> OrePoly:
        coeffs = self.extend_to(upto)
        return OrePoly({self.start + i: c for i, c in enumerate(coeffs)}, self.alpha)

    def __repr__(self):
        return f"LaurentPrefix(start={self.start}, known={len(self._coeffs)})"


def _poly_inverse_prefix(f: OrePoly) -> LaurentPrefix:
    """Series g with g*f = 1, built term by term from the lowest coefficient of f."""
    alpha = f.alpha
    k = f.low()
    fk = f.coeffs[k]
    start = -k

    def producer(m: int, known: list) -> RatFun:
        # coefficient of t^(m+k) in g*f must vanish (or be 1 when m == -k)
        acc = RatFun.zero(alpha.rank)
        for idx, gm in enumerate(known):
            mm = start + idx
            fi = f.coeffs.get(m + k - mm)
            if fi is not None and gm:
                acc = acc + gm * alpha.apply(fi, mm)
        target = RatFun.one(alpha.rank) if m == start else RatFun.zero(alpha.rank)
        return (target - acc) / alpha.apply(fk, m)

    return LaurentPrefix(start, producer, alpha)


def _prefix_times_poly(g: LaurentPrefix, q: OrePoly) -> LaurentPrefix:
    alpha = g.alpha
    lo = q.low()
    start = g.start + lo

    def producer(e: int, _known: list) -> RatFun:
        acc = RatFun.zero(alpha.rank)
        for j, qj in q.coeffs.items():
            m = e - j
            if m >= g.start:
                gm = g.coefficient(m)
                if gm:
                    acc = acc + gm * alpha.apply(qj, m)
        return acc

    return LaurentPrefix(start, producer, alpha)


def series_invert(f, upto: int) -> LaurentPrefix:
    """Laurent expansion of ``f^{-1}``, materialized for exponents below ``upto``."""
    if isinstance(f, SkewRatFun):
        if not f.num.coeffs:
            raise ZeroDivisionError("cannot invert zero")
        prefix = _prefix_times_poly(_poly_inverse_prefix(f.num), f.den)
    elif isinstance(f, OrePoly):
        if not f.coeffs:
            raise ZeroDivisionError("cannot invert zero")
        prefix = _poly_inverse_prefix(f)
    else:
        raise TypeError("series_invert expects an OrePoly or SkewRatFun")
    prefix.extend_to(upto)
    return prefix


def series_expand(f: SkewRatFun, upto: int) -> LaurentPrefix:
    """Laurent expansion of ``f = q^{-1} p`` itself."""
    prefix = _prefix_times_poly(_poly_inverse_prefix(f.den), f.num) if f.num.coeffs else None
    if prefix is None:
        raise ValueError("zero has no leading term")
    prefix.extend_to(upto)
    return prefix


# ---------------------------------------------------------------------------
# Dieudonne determinant
# ---------------------------------------------------------------------------


@dataclass
class DetValue:
    """Result of :func:`dieudonne_det`.

    ``representative`` is the element produced by the case recursion (or
    ``None`` for a singular matrix).  Only order, degree and polytope images
    are canonical; the raw value and ``sign`` are recorded for inspection.
    """

    representative: object
    canonical: bool = True
    sign: int = 1
    trace: list = field(default_factory=list)

    def is_zero(self) -> bool:
        return self.representative is None

    def ord(self, var: int = 0):
        r = self.representative
        if r is None:
            return POS_INF
        if isinstance(r, SkewRatFun):
            return r.ord()
        from .core_arith import ord_in

        return ord_in(r, var)

    def deg(self, var: int = 0):
        r = self.representative
        if r is None:
            return NEG_INF
        if isinstance(r, SkewRatFun):
            return r.deg()
        from .core_arith import deg_in

        return deg_in(r, var)


def _zero_like(x):
    return x - x


def dieudonne_det(matrix) -> DetValue:
    """The canonical representative ``det^c`` by the four-case recursion.

    (1) ``n = 1``: the entry.  (2) zero last row: 0.  (3) nonzero ``a_nn``:
    Schur complement ``a_ij - a_in a_nn^{-1} a_nj`` times ``a_nn`` on the right.
    (4) otherwise exchange columns ``j`` and ``n`` for the largest ``j`` with
    ``a_nj != 0`` and negate.
    """
    rows = [list(r) for r in (matrix.entries if hasattr(matrix, "entries") else matrix)]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("Dieudonne determinant of a non-square matrix")
    if n == 0:
        raise ValueError("empty matrix")
    trace = []
    sign = 1
    right_factors = []
    while True:
        n = len(rows)
        if n == 1:
            a = rows[0][0]
            trace.append("case1")
            if a.is_zero():
                return DetValue(None, True, sign, trace)
            right_factors.insert(0, a)
            break
        last = rows[n - 1]
        if all(x.is_zero() for x in last):
            trace.append("case2")
            return DetValue(None, True, sign, trace)
        if last[n - 1].is_zero():
            j = max(c for c in range(n - 1) if not last[c].is_zero())
            for r in rows:
                r[j], r[n - 1] = r[n - 1], r[j]
            sign = -sign
            trace.append(f"case4:{j}")
        ann = rows[n - 1][n - 1]
        inv = ann.inverse()
        new_rows = []
        for i in range(n - 1):
            ain_inv = rows[i][n - 1] * inv if not rows[i][n - 1].is_zero() else None
            new_row = []
            for j in range(n - 1):
                if ain_inv is None or rows[n - 1][j].is_zero():
                    new_row.append(rows[i][j])
                else:
                    new_row.append(rows[i][j] - ain_inv * rows[n - 1][j])
            new_rows.append(new_row)
        trace.append("case3")
        right_factors.insert(0, ann)
        rows = new_rows
    # det^c = (((a_11') * a'_22) * ...) * a_nn with the accumulated sign
    value = right_factors[0]
    for fct in right_factors[1:]:
        value = value * fct
    if sign == -1:
        value = -value
    return DetValue(value, True, sign, trace)


# ---------------------------------------------------------------------------
# Process (*) on Id + N t
# ---------------------------------------------------------------------------


@dataclass
class ReductionReport:
    upper: list
    operations: list  # (target_row, source_row, factor): row_target -= factor * row_source
    diagonal_orders: list  # ord_t(m_kk - 1) for every diagonal entry, each >= 1 (or inf)
    det_order: int
    invertible: bool
    # fraction-free audit trail: (target, source, w, z) per step, final rows as (D, R)
    multipliers: list = field(default_factory=list)
    polynomial_rows: list = field(default_factory=list)


def _skew_of(x, alpha):
    if isinstance(x, SkewRatFun):
        return x
    if isinstance(x, OrePoly):
        return SkewRatFun(x)
    return SkewRatFun(OrePoly.scalar(x, alpha))


def _common_row(entries: list, alpha) -> tuple:
    """Write a row of left fractions as ``D^{-1} * (R_0, ..., R_k)``."""
    D = OrePoly.one(alpha)
    R: list = []
    for x in entries:
        u, v = left_common_multiple(D, x.den)
        D = ore_mul(u, D)
        R = [ore_mul(u, r) for r in R]
        R.append(ore_mul(v, x.num))
    return D, R


def _raw_fraction(den: OrePoly, num: OrePoly) -> SkewRatFun:
    obj = object.__new__(SkewRatFun)
    obj.alpha, obj.den, obj.num = den.alpha, den, num
    return obj


def _fraction(den: OrePoly, num: OrePoly) -> SkewRatFun:
    return SkewRatFun(num, den) if num.coeffs else SkewRatFun.zero(den.alpha)


def reduce_identity_plus_Nt(M, alpha: FieldAutomorphism | None = None) -> ReductionReport:
    """Row-reduce ``Id + N t`` to upper-triangular form, recording every step.

    Every elimination factor ``m_ji * m_ii^{-1}`` has positive t-order, so each
    diagonal entry stays of the form ``1 + (terms of order >= 1)``.

    Rows are carried fraction-free as ``D^{-1} R``.  Clearing entry ``(j, i)``
    takes one left common multiple ``z R_i[i] = w R_j[i]``; the new row is
    ``(w D_j)^{-1} (w R_j - z R_i)`` and the factor is ``(w D_j)^{-1} z D_i``.
    """
    rows = [list(r) for r in (M.entries if hasattr(M, "entries") else M)]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("process (*) needs a square matrix")
    if alpha is None:
        for r in rows:
            for x in r:
                if isinstance(x, (SkewRatFun, OrePoly)):
                    alpha = x.alpha
                    break
            if alpha is not None:
                break
    if alpha is None:
        raise ValueError("cannot infer the twisting automorphism")
    rows = [[_skew_of(x, alpha) for x in r] for r in rows]
    one = SkewRatFun.one(alpha)
    for i in range(n):
        for j in range(n):
            x = rows[i][j] - one if i == j else rows[i][j]
            if x.ord() < 1:
                raise ValueError(f"entry ({i},{j}) violates Id + N*t shape: order {x.ord()}")
    dens, nums = [], []
    for r in rows:
        D, R = _common_row(r, alpha)
        dens.append(D)
        nums.append(R)

    def entry(k, l):
        return _fraction(dens[k], nums[k][l])

    def check_shape(k):
        # ord(D^{-1} X) = ord X - ord D, so no fraction is formed
        for l in range(n):
            x = nums[k][l] - dens[k] if k == l else nums[k][l]
            if x.low() - dens[k].low() < 1:
                raise ArithmeticError("process (*) left the Id + O(t) shape")

    ops, trail = [], []
    for i in range(n):
        for j in range(i + 1, n):
            if not nums[j][i].coeffs:
                continue
            z, w = left_common_multiple(nums[i][i], nums[j][i])
            dens[j] = ore_mul(w, dens[j])
            # left as an unnormalized pair; normalizing every factor dominated the cost
            factor = _raw_fraction(dens[j], ore_mul(z, dens[i]))
            if factor.ord() < 1:
                raise ArithmeticError("elimination factor of nonpositive order")
            nums[j] = [ore_mul(w, a) - ore_mul(z, b) for a, b in zip(nums[j], nums[i])]
            if nums[j][i].coeffs:
                raise ArithmeticError("left common multiple did not clear the entry")
            ops.append((j, i, factor))
            trail.append((j, i, w, z))
            check_shape(j)
    upper = [[entry(k, l) for l in range(n)] for k in range(n)]
    diag_orders = [(nums[k][k] - dens[k]).low() - dens[k].low() for k in range(n)]
    det_order = sum(upper[k][k].ord() for k in range(n))
    invertible = all(not upper[k][k].is_zero() for k in range(n))
    return ReductionReport(upper, ops, diag_orders, det_order, invertible, trail, list(zip(dens, nums)))


def replay_operations(report: ReductionReport) -> list:
    """Undo the recorded row operations on the triangular output."""
    rows = [list(r) for r in report.upper]
    for target, source, factor in reversed(report.operations):
        rows[target] = [a + factor * b for a, b in zip(rows[target], rows[source])]
    return rows


def unwind_polynomial_rows(report: ReductionReport) -> list:
    """Undo the steps on the ``D^{-1} R`` form by exact division.

    A step set ``D_j <- w D_j`` and ``R_j <- w R_j - z R_i``, so the earlier row
    is ``w^{-1} (R_j + z R_i)``; the quotient must leave no remainder.
    Returns the starting rows as left fractions.
    """
    dens = [d for d, _ in report.polynomial_rows]
    nums = [list(r) for _, r in report.polynomial_rows]

    def left_quotient(x, w):
        if not x.coeffs:
            return x
        # w = t^a w0 and x = x0 t^b with w0, x0 genuine polynomials
        a, b = w.low(), x.low() - w.low()
        alpha = w.alpha
        w0 = ore_mul(OrePoly.t_power(-a, alpha), w)
        x0 = ore_mul(ore_mul(OrePoly.t_power(-a, alpha), x), OrePoly.t_power(-b, alpha))
        q, r = ore_right_divmod(x0, w0)
        if r.coeffs:
            raise ArithmeticError("audit trail does not divide exactly")
        return ore_mul(q, OrePoly.t_power(b, alpha))

    for j, i, w, z in reversed(report.multipliers):
        dens[j] = left_quotient(dens[j], w)
        nums[j] = [left_quotient(a + ore_mul(z, b), w) for a, b in zip(nums[j], nums[i])]
    return [[_fraction(d, x) for x in r] for d, r in zip(dens, nums)]


# ---------------------------------------------------------------------------
# Entrywise ring homomorphisms Q(i) -> M_n(Q)
# ---------------------------------------------------------------------------


class GaussianEmbedding:
    """A ring homomorphism ``Q(i) -> M_n(Q(i))`` determined by the image ``J`` of ``i``.

    Validation checks ``J^2 = -Id`` (so that ``1 -> Id`` and products are
    respected) and multiplicativity on a random sample.
    """

    def __init__(self, image_of_i: Sequence[Sequence], *, seed: int = 0):
        J = [[gaussian(x) for x in row] for row in image_of_i]
        n = len(J)
        if any(len(r) != n for r in J):
            raise ValueError("image of i must be square")
        self.n = n
        self.J = J
        sq = _mat_mul(J, J)
        if any(sq[a][b] != (-ONE if a == b else GaussianRational(0)) for a in range(n) for b in range(n)):
            raise ValueError("image of i does not square to -Id; not a ring homomorphism")
        rng = random.Random(seed)
        for _ in range(5):
            x = GaussianRational(rng.randint(-5, 5), rng.randint(-5, 5))
            y = GaussianRational(rng.randint(-5, 5), rng.randint(-5, 5))
            if _mat_mul(self.image(x), self.image(y)) != self.image(x * y):
                raise ValueError("embedding fails multiplicativity")
            if self.image(ONE) != [[ONE if a == b else GaussianRational(0) for b in range(n)] for a in range(n)]:
                raise ValueError("embedding does not send 1 to Id")

    @classmethod
    def rotation(cls) -> "GaussianEmbedding":
        """``i -> [[0, -1], [1, 0]]``."""
        return cls([[0, -1], [1, 0]])

    def image(self, c) -> list:
        c = gaussian(c)
        re, im = GaussianRational(c.re), GaussianRational(c.im)
        n = self.n
        return [[(re if a == b else GaussianRational(0)) + im * self.J[a][b] for b in range(n)] for a in range(n)]


def _mat_mul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), GaussianRational(0)) for j in range(len(B[0]))] for i in range(len(A))]


def apply_entrywise_hom(sigma: GaussianEmbedding, A) -> list:
    """Block matrix obtained by replacing each coefficient ``c`` by ``sigma(c)``.

    Entries of ``A`` are Laurent polynomials with central variables, so
    ``sigma(sum c_e t^e) = sum sigma(c_e) t^e``.
    """
    rows = [list(r) for r in (A.entries if hasattr(A, "entries") else A)]
    n = sigma.n
    out = [[None] * (len(rows[0]) * n) for _ in range(len(rows) * n)]
    for i, r in enumerate(rows):
        for j, p in enumerate(r):
            if not isinstance(p, LaurentPoly):
                raise TypeError("entries must be Laurent polynomials")
            blocks = [[dict() for _ in range(n)] for _ in range(n)]
            for mono, c in p.terms.items():
                img = sigma.image(c)
                for a in range(n):
                    for b in range(n):
                        if img[a][b]:
                            blocks[a][b][mono] = img[a][b]
            for a in range(n):
                for b in range(n):
                    out[i * n + a][j * n + b] = LaurentPoly(blocks[a][b], p.rank)
    return out


def det_degree(A, var: int = 0):
    """deg in ``var`` of the commutative determinant (helper for the doubling check)."""
    from .core_arith import deg_in

    return deg_in(det_commutative(A), var)
