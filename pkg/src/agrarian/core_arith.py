"""Exact arithmetic over the Gaussian rationals.

This module provides the commutative ground layer used everywhere else:

* :class:`GaussianRational` -- elements of Q(i), stored as ``(a + b i) / d``
  with integers ``a, b, d`` in lowest terms.
* :class:`LaurentPoly` -- sparse multivariate Laurent polynomials with
  Gaussian rational coefficients.
* :class:`RatFun` -- quotients of Laurent polynomials, i.e. the field K(X).
* :class:`FieldMatrix` together with :func:`rank_of` and
  :func:`det_commutative`.

Degrees and orders in a chosen variable are provided by :func:`deg_in` and
:func:`ord_in`; :func:`beta_involution` inverts a variable.
"""

from __future__ import annotations

import math
import random
import re
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

NEG_INF = float("-inf")
POS_INF = float("inf")

Monomial = tuple  # tuple[int, ...]: exponent vector, one slot per variable


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------


class GaussianRational:
    """An element ``(a + b*i) / d`` of Q(i) with ``d > 0`` and gcd(a, b, d) = 1."""

    __slots__ = ("_a", "_b", "_d")

    def __init__(self, re: Union[int, Fraction, str, "GaussianRational"] = 0, im: Union[int, Fraction] = 0):
        if isinstance(re, GaussianRational):
            if im:
                raise TypeError("cannot combine a GaussianRational with an imaginary part")
            self._a, self._b, self._d = re._a, re._b, re._d
            return
        if isinstance(re, str):
            if im:
                raise TypeError("string input carries its own imaginary part")
            parsed = parse_gaussian(re)
            self._a, self._b, self._d = parsed._a, parsed._b, parsed._d
            return
        fr = Fraction(re)
        fi = Fraction(im)
        d = fr.denominator * fi.denominator // math.gcd(fr.denominator, fi.denominator)
        a = fr.numerator * (d // fr.denominator)
        b = fi.numerator * (d // fi.denominator)
        self._a, self._b, self._d = a, b, d

    @classmethod
    def _raw(cls, a: int, b: int, d: int) -> "GaussianRational":
        if d < 0:
            a, b, d = -a, -b, -d
        g = math.gcd(math.gcd(a, b), d)
        if g != 1:
            a //= g
            b //= g
            d //= g
        obj = object.__new__(cls)
        obj._a = a
        obj._b = b
        obj._d = d
        return obj

    # -- accessors ---------------------------------------------------------
    @property
    def re(self) -> Fraction:
        return Fraction(self._a, self._d)

    @property
    def im(self) -> Fraction:
        return Fraction(self._b, self._d)

    def parts(self) -> tuple:
        """The normalized integer triple ``(a, b, d)``."""
        return (self._a, self._b, self._d)

    def is_zero(self) -> bool:
        return self._a == 0 and self._b == 0

    def __bool__(self) -> bool:
        return self._a != 0 or self._b != 0

    def is_real(self) -> bool:
        return self._b == 0

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._raw(self._a, -self._b, self._d)

    def norm(self) -> Fraction:
        return Fraction(self._a * self._a + self._b * self._b, self._d * self._d)

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        d1, d2 = self._d, other._d
        if d1 == d2:
            return GaussianRational._raw(self._a + other._a, self._b + other._b, d1)
        return GaussianRational._raw(self._a * d2 + other._a * d1, self._b * d2 + other._b * d1, d1 * d2)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational._raw(-self._a, -self._b, self._d)

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        a, b, c, e = self._a, self._b, other._a, other._b
        return GaussianRational._raw(a * c - b * e, a * e + b * c, self._d * other._d)

    __rmul__ = __mul__

    def inverse(self) -> "GaussianRational":
        n = self._a * self._a + self._b * self._b
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(i)")
        # d / (a + bi) = d (a - bi) / n
        return GaussianRational._raw(self._d * self._a, -self._d * self._b, n)

    def __truediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        base = self if e >= 0 else self.inverse()
        result = ONE
        e = abs(e)
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    # -- comparison / hashing ---------------------------------------------
    def __eq__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self._a == other._a and self._b == other._b and self._d == other._d

    def __hash__(self):
        if self._b == 0:
            return hash(Fraction(self._a, self._d))
        return hash((self._a, self._b, self._d))

    def __repr__(self):
        return f"GaussianRational({str(self)!r})"

    def __str__(self):
        re_part = Fraction(self._a, self._d)
        im_part = Fraction(self._b, self._d)
        if im_part == 0:
            return str(re_part)
        if re_part == 0:
            return f"{im_part}i"
        sign = "+" if im_part > 0 else "-"
        return f"{re_part}{sign}{abs(im_part)}i"


def _coerce(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return GaussianRational._raw(x.numerator, 0, x.denominator)
    return None


ZERO = GaussianRational._raw(0, 0, 1)
ONE = GaussianRational._raw(1, 0, 1)
I_UNIT = GaussianRational._raw(0, 1, 1)

_RATIONAL = r"\d+(?:/\d+)?"
_GAUSS_RE = re.compile(
    rf"^\s*(?:(?P<re>[+-]?{_RATIONAL})(?:\s*(?P<isign>[+-])\s*(?P<im>{_RATIONAL})?\s*i)?"
    rf"|(?P<ionly>[+-]?(?:{_RATIONAL})?)\s*i)\s*$"
)


def parse_gaussian(text: str) -> GaussianRational:
    """Parse ``'3/2'``, ``'-1/2i'``, ``'3/2+1/2i'`` (a bare ``'i'`` is also accepted)."""
    if not isinstance(text, str):
        raise TypeError("expected a string")
    m = _GAUSS_RE.match(text)
    if not m:
        raise ValueError(f"malformed Gaussian rational: {text!r}")
    if m.group("re") is not None:
        real = Fraction(m.group("re"))
        if m.group("isign") is None:
            return GaussianRational(real)
        imag = Fraction(m.group("im")) if m.group("im") else Fraction(1)
        if m.group("isign") == "-":
            imag = -imag
        return GaussianRational(real, imag)
    token = m.group("ionly")
    if token in ("", "+"):
        return GaussianRational(0, 1)
    if token == "-":
        return GaussianRational(0, -1)
    return GaussianRational(0, Fraction(token))


def gaussian(x) -> GaussianRational:
    """Coerce ints, Fractions, strings and Gaussian rationals."""
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, str):
        return parse_gaussian(x)
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x)
    raise TypeError(f"cannot interpret {x!r} as a Gaussian rational")


# ---------------------------------------------------------------------------
# Laurent polynomials
# ---------------------------------------------------------------------------


def _grlex_key(m: Monomial):
    return (sum(m), m)


class LaurentPoly:
    """Sparse Laurent polynomial in ``rank`` variables over Q(i).

    ``terms`` maps exponent tuples to nonzero :class:`GaussianRational`
    coefficients.  Instances are immutable by convention.
    """

    __slots__ = ("terms", "rank", "_hash")

    def __init__(self, terms=None, rank: int = 1):
        self.rank = rank
        clean = {}
        if terms:
            for mono, c in terms.items():
                mono = tuple(mono)
                if len(mono) != rank:
                    raise ValueError(f"monomial {mono} does not have length {rank}")
                c = gaussian(c)
                if c:
                    prev = clean.get(mono)
                    c = c if prev is None else prev + c
                    if c:
                        clean[mono] = c
                    else:
                        del clean[mono]
        self.terms = clean
        self._hash = None

    @classmethod
    def _from_clean(cls, terms: dict, rank: int) -> "LaurentPoly":
        obj = object.__new__(cls)
        obj.terms = terms
        obj.rank = rank
        obj._hash = None
        return obj

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, rank: int) -> "LaurentPoly":
        return cls._from_clean({}, rank)

    @classmethod
    def one(cls, rank: int) -> "LaurentPoly":
        return cls._from_clean({(0,) * rank: ONE}, rank)

    @classmethod
    def constant(cls, c, rank: int) -> "LaurentPoly":
        c = gaussian(c)
        if not c:
            return cls.zero(rank)
        return cls._from_clean({(0,) * rank: c}, rank)

    @classmethod
    def monomial(cls, exps: Sequence[int], coeff=1) -> "LaurentPoly":
        exps = tuple(int(e) for e in exps)
        c = gaussian(coeff)
        if not c:
            return cls.zero(len(exps))
        return cls._from_clean({exps: c}, len(exps))

    @classmethod
    def variable(cls, index: int, rank: int) -> "LaurentPoly":
        exps = [0] * rank
        exps[index] = 1
        return cls.monomial(exps)

    # -- basic queries -----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def support(self) -> list:
        return sorted(self.terms, key=_grlex_key)

    def coefficient(self, mono: Sequence[int]) -> GaussianRational:
        return self.terms.get(tuple(mono), ZERO)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and (0,) * self.rank in self.terms)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def constant_value(self) -> GaussianRational:
        if not self.is_constant():
            raise ValueError("not a constant polynomial")
        return self.terms.get((0,) * self.rank, ZERO)

    def leading_term(self):
        """Leading (monomial, coefficient) under graded-lexicographic order."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        mono = max(self.terms, key=_grlex_key)
        return mono, self.terms[mono]

    def variables_used(self) -> list:
        used = set()
        for mono in self.terms:
            for j, e in enumerate(mono):
                if e:
                    used.add(j)
        return sorted(used)

    # -- arithmetic --------------------------------------------------------
    def _check(self, other: "LaurentPoly"):
        if self.rank != other.rank:
            raise ValueError(f"rank mismatch: {self.rank} vs {other.rank}")

    def _lift(self, other):
        if isinstance(other, LaurentPoly):
            self._check(other)
            return other
        c = _coerce(other)
        if c is None:
            return None
        return LaurentPoly.constant(c, self.rank)

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for mono, c in other.terms.items():
            prev = out.get(mono)
            if prev is None:
                out[mono] = c
            else:
                s = prev + c
                if s:
                    out[mono] = s
                else:
                    del out[mono]
        return LaurentPoly._from_clean(out, self.rank)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._from_clean({m: -c for m, c in self.terms.items()}, self.rank)

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
        if isinstance(other, LaurentPoly):
            self._check(other)
            if not self.terms or not other.terms:
                return LaurentPoly.zero(self.rank)
            out: dict = {}
            get = out.get
            if self.rank == 1:
                for (e1,), c1 in self.terms.items():
                    for (e2,), c2 in other.terms.items():
                        key = (e1 + e2,)
                        prev = get(key)
                        prod = c1 * c2
                        out[key] = prod if prev is None else prev + prod
            else:
                for m1, c1 in self.terms.items():
                    for m2, c2 in other.terms.items():
                        key = tuple(x + y for x, y in zip(m1, m2))
                        prev = get(key)
                        prod = c1 * c2
                        out[key] = prod if prev is None else prev + prod
            return LaurentPoly._from_clean({m: c for m, c in out.items() if c}, self.rank)
        c = _coerce(other)
        if c is None:
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def scale(self, c) -> "LaurentPoly":
        c = gaussian(c)
        if not c:
            return LaurentPoly.zero(self.rank)
        return LaurentPoly._from_clean({m: v * c for m, v in self.terms.items()}, self.rank)

    def shift(self, exps: Sequence[int]) -> "LaurentPoly":
        """Multiply by the monomial with exponent vector ``exps``."""
        exps = tuple(exps)
        return LaurentPoly._from_clean(
            {tuple(a + b for a, b in zip(m, exps)): c for m, c in self.terms.items()}, self.rank
        )

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            if not self.is_monomial():
                raise ValueError("only monomials are units in the Laurent ring")
            (mono, c), = self.terms.items()
            return LaurentPoly.monomial([-x for x in mono], c.inverse()) ** (-e)
        result = LaurentPoly.one(self.rank)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def exquo(self, other: "LaurentPoly") -> "LaurentPoly":
        """Exact quotient ``self / other``; raises ``ArithmeticError`` when inexact."""
        self._check(other)
        if not other.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        if not self.terms:
            return LaurentPoly.zero(self.rank)
        if len(other.terms) == 1:
            (mono, c), = other.terms.items()
            inv = c.inverse()
            return LaurentPoly._from_clean(
                {tuple(a - b for a, b in zip(m, mono)): v * inv for m, v in self.terms.items()}, self.rank
            )
        k = self.rank
        lo_a = [min(m[j] for m in self.terms) for j in range(k)]
        hi_a = [max(m[j] for m in self.terms) for j in range(k)]
        lo_b = [min(m[j] for m in other.terms) for j in range(k)]
        hi_b = [max(m[j] for m in other.terms) for j in range(k)]
        lo_q = [lo_a[j] - lo_b[j] for j in range(k)]
        hi_q = [hi_a[j] - hi_b[j] for j in range(k)]
        if any(lo_q[j] > hi_q[j] for j in range(k)):
            raise ArithmeticError("inexact polynomial division")
        lead_m, lead_c = other.leading_term()
        lead_inv = lead_c.inverse()
        rem = dict(self.terms)
        quot = {}
        b_terms = list(other.terms.items())
        while rem:
            m = max(rem, key=_grlex_key)
            qm = tuple(a - b for a, b in zip(m, lead_m))
            if any(qm[j] < lo_q[j] or qm[j] > hi_q[j] for j in range(k)):
                raise ArithmeticError("inexact polynomial division")
            qc = rem[m] * lead_inv
            quot[qm] = qc
            for bm, bc in b_terms:
                key = tuple(a + b for a, b in zip(qm, bm))
                v = rem.get(key, ZERO) - qc * bc
                if v:
                    rem[key] = v
                else:
                    rem.pop(key, None)
        return LaurentPoly._from_clean(quot, self.rank)

    def divides(self, other: "LaurentPoly") -> bool:
        try:
            other.exquo(self)
        except ArithmeticError:
            return False
        return True

    # -- substitutions -----------------------------------------------------
    def evaluate(self, point: Sequence) -> GaussianRational:
        """Evaluate at a point of (Q(i)^x)^rank; all coordinates must be nonzero."""
        pts = [gaussian(p) for p in point]
        powers: list = [dict() for _ in pts]
        total = ZERO
        for mono, c in self.terms.items():
            v = c
            for j, e in enumerate(mono):
                if e:
                    cache = powers[j]
                    pw = cache.get(e)
                    if pw is None:
                        pw = pts[j] ** e
                        cache[e] = pw
                    v = v * pw
            total = total + v
        return total

    def substitute_monomials(self, images: Sequence[tuple], new_rank: int | None = None) -> "LaurentPoly":
        """Ring map sending variable ``j`` to ``images[j] = (scalar, exponent_vector)``."""
        new_rank = len(images[0][1]) if new_rank is None else new_rank
        out: dict = {}
        for mono, c in self.terms.items():
            coeff = c
            exps = [0] * new_rank
            for j, e in enumerate(mono):
                if e:
                    scal, vec = images[j]
                    scal = gaussian(scal)
                    if scal != ONE:
                        coeff = coeff * scal ** e
                    for r in range(new_rank):
                        exps[r] += e * vec[r]
            key = tuple(exps)
            out[key] = out.get(key, ZERO) + coeff
        return LaurentPoly._from_clean({m: c for m, c in out.items() if c}, new_rank)

    def linear_change(self, matrix: Sequence[Sequence[int]]) -> "LaurentPoly":
        """Apply the integer matrix to every exponent vector (``e -> A e``)."""
        rows = len(matrix)
        out = {}
        for mono, c in self.terms.items():
            key = tuple(sum(matrix[r][j] * mono[j] for j in range(self.rank)) for r in range(rows))
            out[key] = out.get(key, ZERO) + c
        return LaurentPoly._from_clean({m: c for m, c in out.items() if c}, rows)

    def invert_variable(self, var: int) -> "LaurentPoly":
        return LaurentPoly._from_clean(
            {tuple(-e if j == var else e for j, e in enumerate(m)): c for m, c in self.terms.items()}, self.rank
        )

    def conjugate_coefficients(self) -> "LaurentPoly":
        return LaurentPoly._from_clean({m: c.conjugate() for m, c in self.terms.items()}, self.rank)

    # -- equality / display ------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self.rank == other.rank and self.terms == other.terms
        c = _coerce(other)
        if c is None:
            return NotImplemented
        if not c:
            return not self.terms
        return self.terms == {(0,) * self.rank: c}

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.rank, frozenset(self.terms.items())))
        return self._hash

    def to_str(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        if names is None:
            names = ["t"] if self.rank == 1 else [f"x{j}" for j in range(self.rank)]
        pieces = []
        for mono in sorted(self.terms, key=_grlex_key, reverse=True):
            c = self.terms[mono]
            factors = []
            for name, e in zip(names, mono):
                if e == 1:
                    factors.append(name)
                elif e:
                    factors.append(f"{name}^{e}")
            body = "*".join(factors)
            cs = str(c)
            if not body:
                pieces.append(cs if c.is_real() else f"({cs})")
            elif c == ONE:
                pieces.append(body)
            elif c == -ONE:
                pieces.append("-" + body)
            elif c.is_real():
                pieces.append(f"{cs}*{body}")
            else:
                pieces.append(f"({cs})*{body}")
        text = " + ".join(pieces)
        return text.replace("+ -", "- ")

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"LaurentPoly({self.to_str()!r}, rank={self.rank})"


def _univariate_index(*polys: LaurentPoly):
    """Return the single variable index used by all polys, -1 if none, None if several."""
    used = set()
    for p in polys:
        used.update(p.variables_used())
        if len(used) > 1:
            return None
    return used.pop() if used else -1


def _poly_divmod_univariate(a: LaurentPoly, b: LaurentPoly, var: int):
    """Polynomial division in one variable (both inputs genuine polynomials)."""
    rank = a.rank
    db = max(m[var] for m in b.terms)
    lead = b.terms[tuple(db if j == var else 0 for j in range(rank))]
    inv = lead.inverse()
    rem = dict(a.terms)
    quot = {}
    while rem:
        da = max(m[var] for m in rem)
        if da < db:
            break
        key = tuple(da if j == var else 0 for j in range(rank))
        c = rem[key] * inv
        qkey = tuple(da - db if j == var else 0 for j in range(rank))
        quot[qkey] = c
        for m, bc in b.terms.items():
            k2 = tuple(m[j] + qkey[j] for j in range(rank))
            v = rem.get(k2, ZERO) - c * bc
            if v:
                rem[k2] = v
            else:
                rem.pop(k2, None)
    return LaurentPoly._from_clean(quot, rank), LaurentPoly._from_clean(rem, rank)


def _normalize_to_polynomial(p: LaurentPoly, var: int) -> LaurentPoly:
    lo = min(m[var] for m in p.terms)
    return p.shift(tuple(-lo if j == var else 0 for j in range(p.rank)))


def univariate_gcd(a: LaurentPoly, b: LaurentPoly, var: int) -> LaurentPoly:
    """Monic gcd of two Laurent polynomials depending only on ``var``."""
    if not a.terms:
        a, b = b, a
    if not a.terms:
        return LaurentPoly.zero(a.rank)
    a = _normalize_to_polynomial(a, var)
    if b.terms:
        b = _normalize_to_polynomial(b, var)
    a = _monic(a, var)
    if b.terms:
        b = _monic(b, var)
    while b.terms:
        _, r = _poly_divmod_univariate(a, b, var)
        # monic remainders keep the rational coefficients small
        a, b = b, (_monic(_normalize_to_polynomial(r, var), var) if r.terms else r)
    return a


def _monic(a: LaurentPoly, var: int) -> LaurentPoly:
    deg = max(m[var] for m in a.terms)
    lead = a.terms[tuple(deg if j == var else 0 for j in range(a.rank))]
    return a if lead == ONE else a.scale(lead.inverse())


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------


class RatFun:
    """A fraction ``num / den`` of Laurent polynomials (an element of K(X)).

    Normalization divides by the leading coefficient of the denominator and
    factors out the lowest monomial of the denominator.  Univariate fractions
    are additionally reduced by their gcd; multivariate ones are not, so
    equality is decided by cross-multiplication.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, rank: int | None = None):
        if not isinstance(num, LaurentPoly):
            if rank is None:
                rank = den.rank if isinstance(den, LaurentPoly) else 1
            num = LaurentPoly.constant(num, rank)
        if den is None:
            den = LaurentPoly.one(num.rank)
        elif not isinstance(den, LaurentPoly):
            den = LaurentPoly.constant(den, num.rank)
        num._check(den)
        if not den.terms:
            raise ZeroDivisionError("zero denominator")
        num, den = _normalize_fraction(num, den)
        self.num = num
        self.den = den

    @classmethod
    def _raw(cls, num: LaurentPoly, den: LaurentPoly) -> "RatFun":
        obj = object.__new__(cls)
        obj.num, obj.den = _normalize_fraction(num, den)
        return obj

    @property
    def rank(self) -> int:
        return self.num.rank

    @classmethod
    def zero(cls, rank: int) -> "RatFun":
        return cls(LaurentPoly.zero(rank))

    @classmethod
    def one(cls, rank: int) -> "RatFun":
        return cls(LaurentPoly.one(rank))

    def is_zero(self) -> bool:
        return not self.num.terms

    def __bool__(self) -> bool:
        return bool(self.num.terms)

    def _lift(self, other):
        if isinstance(other, RatFun):
            if other.rank != self.rank:
                raise ValueError("rank mismatch")
            return other
        if isinstance(other, LaurentPoly):
            if other.rank != self.rank:
                raise ValueError("rank mismatch")
            return RatFun._raw(other, LaurentPoly.one(self.rank))
        c = _coerce(other)
        if c is None:
            return None
        return RatFun._raw(LaurentPoly.constant(c, self.rank), LaurentPoly.one(self.rank))

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        if not other.num.terms:
            return self
        if not self.num.terms:
            return other
        if self.den == other.den:
            return RatFun._raw(self.num + other.num, self.den)
        return RatFun._raw(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        obj = object.__new__(RatFun)
        obj.num = -self.num
        obj.den = self.den
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
        return RatFun._raw(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFun":
        if not self.num.terms:
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFun._raw(self.den, self.num)

    def __truediv__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.inverse() ** (-e)
        return RatFun._raw(self.num ** e, self.den ** e)

    def __eq__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self.num * other.den == other.num * self.den

    __hash__ = None  # equality is cross-multiplication, so no canonical hash

    def is_polynomial(self) -> bool:
        return self.den.is_monomial()

    def as_polynomial(self) -> LaurentPoly:
        try:
            return self.num.exquo(self.den)
        except ArithmeticError:
            raise ValueError("rational function is not a Laurent polynomial") from None

    def evaluate(self, point: Sequence) -> GaussianRational:
        d = self.den.evaluate(point)
        if not d:
            raise ZeroDivisionError("denominator vanishes at the evaluation point")
        return self.num.evaluate(point) / d

    def __repr__(self):
        return f"RatFun({self.num.to_str()!r} / {self.den.to_str()!r})"

    def __str__(self):
        if self.den == LaurentPoly.one(self.rank):
            return self.num.to_str()
        return f"({self.num.to_str()})/({self.den.to_str()})"


def _normalize_fraction(num: LaurentPoly, den: LaurentPoly):
    rank = num.rank
    if not num.terms:
        return num, LaurentPoly.one(rank)
    if len(den.terms) == 1:
        (mono, c), = den.terms.items()
        inv = c.inverse()
        return (
            LaurentPoly._from_clean(
                {tuple(a - b for a, b in zip(m, mono)): v * inv for m, v in num.terms.items()}, rank
            ),
            LaurentPoly.one(rank),
        )
    var = _univariate_index(num, den)
    if var is not None and var >= 0:
        g = univariate_gcd(num, den, var)
        if len(g.terms) > 1:
            num = num.exquo(g)
            den = den.exquo(g)
    # shift the denominator's lowest monomial to the origin, then make it monic
    lo = tuple(min(m[j] for m in den.terms) for j in range(rank))
    if any(lo):
        neg = tuple(-x for x in lo)
        num = num.shift(neg)
        den = den.shift(neg)
    _, lead = den.leading_term()
    if lead != ONE:
        inv = lead.inverse()
        num = num.scale(inv)
        den = den.scale(inv)
    return num, den


# ---------------------------------------------------------------------------
# Degree / order calculus
# ---------------------------------------------------------------------------


def _poly_deg(p: LaurentPoly, var: int):
    if not p.terms:
        return NEG_INF
    exps = [m[var] for m in p.terms]
    return max(exps) - min(exps)


def _poly_ord(p: LaurentPoly, var: int):
    if not p.terms:
        return POS_INF
    return min(m[var] for m in p.terms)


def deg_in(p: Union[LaurentPoly, RatFun], var: int):
    """Width of the support in ``var``; for fractions ``deg num - deg den``; ``-inf`` for 0."""
    if isinstance(p, RatFun):
        if not p.num.terms:
            return NEG_INF
        return _poly_deg(p.num, var) - _poly_deg(p.den, var)
    if var >= p.rank:
        raise ValueError("variable index out of range")
    return _poly_deg(p, var)


def ord_in(p: Union[LaurentPoly, RatFun], var: int):
    """Lowest exponent of ``var`` (``inf`` for 0); additive on products."""
    if isinstance(p, RatFun):
        if not p.num.terms:
            return POS_INF
        return _poly_ord(p.num, var) - _poly_ord(p.den, var)
    if var >= p.rank:
        raise ValueError("variable index out of range")
    return _poly_ord(p, var)


def beta_involution(f: Union[LaurentPoly, RatFun], var: int):
    """The automorphism sending ``var`` to its inverse."""
    if isinstance(f, LaurentPoly):
        return f.invert_variable(var)
    return RatFun._raw(f.num.invert_variable(var), f.den.invert_variable(var))


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


class FieldMatrix:
    """A rectangular matrix whose entries all live in one field (or domain)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: Iterable[Iterable]):
        data = [list(r) for r in rows]
        self.rows = len(data)
        self.cols = len(data[0]) if data else 0
        if any(len(r) != self.cols for r in data):
            raise ValueError("ragged matrix")
        self.entries = data

    @classmethod
    def identity(cls, n: int, one, zero) -> "FieldMatrix":
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)])

    def __getitem__(self, idx):
        i, j = idx
        return self.entries[i][j]

    def row(self, i: int) -> list:
        return list(self.entries[i])

    def column(self, j: int) -> list:
        return [r[j] for r in self.entries]

    def transpose(self) -> "FieldMatrix":
        return FieldMatrix([[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "FieldMatrix":
        return FieldMatrix([[self.entries[i][j] for j in cols] for i in rows])

    def map(self, fn) -> "FieldMatrix":
        return FieldMatrix([[fn(x) for x in r] for r in self.entries])

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matrix product")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = None
                for k in range(self.cols):
                    term = self.entries[i][k] * other.entries[k][j]
                    acc = term if acc is None else acc + term
                row.append(acc)
            out.append(row)
        return FieldMatrix(out)

    def __eq__(self, other):
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and all(
            a == b for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb)
        )

    __hash__ = None

    def __iter__(self) -> Iterator[list]:
        return iter(self.entries)

    def __repr__(self):
        return f"FieldMatrix({self.rows}x{self.cols})"


def _as_rows(m) -> list:
    if isinstance(m, FieldMatrix):
        return [list(r) for r in m.entries]
    return [list(r) for r in m]


def _is_zero(x) -> bool:
    if hasattr(x, "is_zero"):
        return x.is_zero()
    return x == 0


def _entry_kind(rows) -> str:
    for r in rows:
        for x in r:
            if isinstance(x, LaurentPoly):
                return "poly"
            if isinstance(x, RatFun):
                return "ratfun"
    return "scalar"


def _to_poly_rows(rows) -> tuple:
    """Clear denominators row by row; returns (polynomial rows, row multipliers)."""
    rank = None
    for r in rows:
        for x in r:
            if isinstance(x, (LaurentPoly, RatFun)):
                rank = x.rank
                break
        if rank is not None:
            break
    out = []
    mults = []
    for r in rows:
        dens = []
        for x in r:
            if isinstance(x, RatFun) and x.num.terms and x.den != LaurentPoly.one(rank):
                if not any(x.den == d for d in dens):
                    dens.append(x.den)
        mult = LaurentPoly.one(rank)
        for d in dens:
            mult = mult * d
        new_row = []
        for x in r:
            if isinstance(x, RatFun):
                new_row.append((x.num * mult).exquo(x.den) if x.num.terms else LaurentPoly.zero(rank))
            elif isinstance(x, LaurentPoly):
                new_row.append(x * mult)
            else:
                new_row.append(LaurentPoly.constant(x, rank) * mult)
        out.append(new_row)
        mults.append(mult)
    return out, mults


def _scalar_rank(rows) -> int:
    rows = [[gaussian(x) if not isinstance(x, GaussianRational) else x for x in r] for r in rows]
    m = len(rows)
    n = len(rows[0]) if rows else 0
    rank = 0
    col = 0
    while rank < m and col < n:
        piv = next((i for i in range(rank, m) if rows[i][col]), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = rows[rank][col].inverse()
        for i in range(rank + 1, m):
            if rows[i][col]:
                f = rows[i][col] * inv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def _scalar_det(rows):
    rows = [[gaussian(x) if not isinstance(x, GaussianRational) else x for x in r] for r in rows]
    n = len(rows)
    det = ONE
    for c in range(n):
        piv = next((i for i in range(c, n) if rows[i][c]), None)
        if piv is None:
            return ZERO
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            det = -det
        p = rows[c][c]
        det = det * p
        inv = p.inverse()
        for i in range(c + 1, n):
            if rows[i][c]:
                f = rows[i][c] * inv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
    return det


def _generic_field_det(rows):
    """Gaussian elimination over an arbitrary commutative field."""
    n = len(rows)
    rows = [list(r) for r in rows]
    det = None
    sign = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if not _is_zero(rows[i][c])), None)
        if piv is None:
            return rows[0][0] * 0 if n else 1
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            sign = -sign
        p = rows[c][c]
        det = p if det is None else det * p
        for i in range(c + 1, n):
            if not _is_zero(rows[i][c]):
                f = rows[i][c] / p
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
    if det is None:
        return 1
    return det if sign == 1 else -det


def bareiss_det(rows: list, rank: int) -> LaurentPoly:
    """Fraction-free determinant of a square matrix of Laurent polynomials."""
    n = len(rows)
    if n == 0:
        return LaurentPoly.one(rank)
    a = [list(r) for r in rows]
    sign = 1
    prev = LaurentPoly.one(rank)
    for k in range(n - 1):
        if not a[k][k].terms:
            piv = next((i for i in range(k + 1, n) if a[i][k].terms), None)
            if piv is None:
                return LaurentPoly.zero(rank)
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                val = akk * row_i[j] - aik * row_k[j]
                row_i[j] = val.exquo(prev) if val.terms else val
            row_i[k] = LaurentPoly.zero(rank)
        prev = akk
    det = a[n - 1][n - 1]
    return det if sign == 1 else -det


def det_commutative(m):
    """Determinant over a commutative field or Laurent polynomial domain.

    Laurent-polynomial entries use fraction-free (Bareiss) elimination; rational
    function entries are first cleared of denominators row by row.
    """
    rows = _as_rows(m)
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("determinant of a non-square matrix")
    kind = _entry_kind(rows)
    if kind == "scalar":
        if n == 0:
            return ONE
        if all(isinstance(x, (GaussianRational, int, Fraction)) for r in rows for x in r):
            return _scalar_det(rows)
        return _generic_field_det(rows)
    poly_rows, mults = _to_poly_rows(rows)
    rank = poly_rows[0][0].rank if n else 1
    det = bareiss_det(poly_rows, rank)
    if kind == "poly" and all(mu == LaurentPoly.one(rank) for mu in mults):
        return det
    denom = LaurentPoly.one(rank)
    for mu in mults:
        denom = denom * mu
    return RatFun(det, denom)


# -- certified rank of polynomial matrices ------------------------------------


def _gauss_int_rows(poly_rows) -> list:
    """Scale each row to Gaussian-integer coefficients: entries become {mono: (a, b)}."""
    out = []
    for r in poly_rows:
        lcm = 1
        for p in r:
            for c in p.terms.values():
                d = c._d
                lcm = lcm * d // math.gcd(lcm, d)
        out.append(
            [{m: (c._a * (lcm // c._d), c._b * (lcm // c._d)) for m, c in p.terms.items()} for p in r]
        )
    return out


def _l1(entry: dict) -> int:
    return sum(abs(a) + abs(b) for a, b in entry.values())


def _substitute_first(rows: list, value: int) -> list:
    """Substitute variable 0 := value after shifting each row to nonnegative exponents."""
    out = []
    for r in rows:
        lo = min((m[0] for e in r for m in e), default=0)
        new_row = []
        for e in r:
            acc: dict = {}
            for m, (a, b) in e.items():
                p = value ** (m[0] - lo)
                key = m[1:]
                pa, pb = acc.get(key, (0, 0))
                acc[key] = (pa + a * p, pb + b * p)
            new_row.append({k: v for k, v in acc.items() if v != (0, 0)})
        out.append(new_row)
    return out


def _gauss_int_rank(rows: list) -> int:
    """Rank of a matrix of Gaussian integers (pairs) by fraction-free elimination."""
    a = [list(r) for r in rows]
    m = len(a)
    n = len(a[0]) if a else 0
    rank = 0
    col = 0
    while rank < m and col < n:
        piv = next((i for i in range(rank, m) if a[i][col] != (0, 0)), None)
        if piv is None:
            col += 1
            continue
        a[rank], a[piv] = a[piv], a[rank]
        pr, pi = a[rank][col]
        prow = a[rank]
        for i in range(rank + 1, m):
            qr, qi = a[i][col]
            if qr == 0 and qi == 0:
                continue
            row = a[i]
            new = []
            for j in range(n):
                xr, xi = row[j]
                yr, yi = prow[j]
                # p * x - q * y
                nr = pr * xr - pi * xi - (qr * yr - qi * yi)
                ni = pr * xi + pi * xr - (qr * yi + qi * yr)
                new.append((nr, ni))
            g = 0
            for nr, ni in new:
                g = math.gcd(g, math.gcd(nr, ni))
            if g > 1:
                new = [(nr // g, ni // g) for nr, ni in new]
            a[i] = new
        rank += 1
        col += 1
    return rank


def _poly_matrix_rank(poly_rows: list) -> int:
    m = len(poly_rows)
    n = len(poly_rows[0]) if m else 0
    if m == 0 or n == 0:
        return 0
    rank = poly_rows[0][0].rank
    full = min(m, n)
    # cheap lower bound at a small point
    point = [GaussianRational(p) for p in _SMALL_PRIMES[:rank]]
    low = _scalar_rank([[p.evaluate(point) for p in r] for r in poly_rows])
    if low == full:
        return low
    # certified value: substitute each variable by an integer exceeding the Cauchy
    # root bound of every nonzero minor, so no nonzero minor can vanish
    rows = _gauss_int_rows(poly_rows)
    for _ in range(rank):
        row_norms = [sum(_l1(e) for e in r) for r in rows]
        col_norms = [sum(_l1(rows[i][j]) for i in range(m)) for j in range(n)]
        bound_r = math.prod(x for x in row_norms if x)
        bound_c = math.prod(x for x in col_norms if x)
        rows = _substitute_first(rows, min(bound_r, bound_c) + 2)
    scalar = [[e.get((), (0, 0)) for e in r] for r in rows]
    return _gauss_int_rank(scalar)


_SMALL_PRIMES = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73]


def rank_of(m) -> int:
    """Rank over the fraction field of the entries.

    Scalar matrices use Gaussian elimination.  For Laurent polynomial or
    rational function entries the rank is computed exactly by specializing
    the variables at integers larger than a Cauchy root bound for every
    minor, which preserves the rank.
    """
    rows = _as_rows(m)
    if not rows or not rows[0]:
        return 0
    kind = _entry_kind(rows)
    if kind == "scalar":
        if all(isinstance(x, (GaussianRational, int, Fraction)) for r in rows for x in r):
            return _scalar_rank(rows)
        return _generic_field_rank(rows)
    poly_rows, _ = _to_poly_rows(rows)
    return _poly_matrix_rank(poly_rows)


def _generic_field_rank(rows) -> int:
    rows = [list(r) for r in rows]
    m, n = len(rows), len(rows[0])
    rank = 0
    col = 0
    while rank < m and col < n:
        piv = next((i for i in range(rank, m) if not _is_zero(rows[i][col])), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank][col]
        for i in range(rank + 1, m):
            if not _is_zero(rows[i][col]):
                f = rows[i][col] / p
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def poly_matrix_rank_bareiss(poly_rows: list) -> int:
    """Reference rank by fraction-free elimination over the polynomial domain.

    Slower than :func:`rank_of` on large inputs; kept as an independent check.
    """
    a = [list(r) for r in poly_rows]
    m = len(a)
    n = len(a[0]) if m else 0
    if m == 0 or n == 0:
        return 0
    rank_vars = a[0][0].rank
    prev = LaurentPoly.one(rank_vars)
    r = 0
    col = 0
    while r < m and col < n:
        piv = next((i for i in range(r, m) if a[i][col].terms), None)
        if piv is None:
            col += 1
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][col]
        for i in range(r + 1, m):
            q = a[i][col]
            new = []
            for j in range(n):
                val = p * a[i][j] - q * a[r][j]
                new.append(val.exquo(prev) if val.terms else val)
            a[i] = new
        prev = p
        r += 1
        col += 1
    return r


def scalar_echelon_pivots(rows: list, order: Sequence[int]) -> list:
    """Indices (taken in ``order``) of a maximal independent set of columns."""
    m = len(rows)
    work = [list(r) for r in rows]
    chosen = []
    used_rows = set()
    for c in order:
        piv = next((i for i in range(m) if i not in used_rows and work[i][c]), None)
        if piv is None:
            continue
        chosen.append(c)
        used_rows.add(piv)
        inv = work[piv][c].inverse()
        for i in range(m):
            if i != piv and work[i][c]:
                f = work[i][c] * inv
                work[i] = [x - f * y for x, y in zip(work[i], work[piv])]
    return chosen


def pivot_block(mat: list, r: int, strategy: str, rng: random.Random) -> tuple:
    """Rows R and columns S with ``mat[R, S]`` nonsingular and ``|R| = |S| = r``.

    Chosen by elimination at an integer point; a nonzero value there certifies
    the minor is nonzero as a polynomial.
    """
    if r == 0:
        return [], []
    m, ncols = len(mat), len(mat[0])
    rank = mat[0][0].rank
    for attempt in range(64):
        point = [GaussianRational(rng.randint(2, 40 + 10 * attempt)) for _ in range(rank)]
        vals = [[x.evaluate(point) if x.terms else ZERO for x in row] for row in mat]
        col_order = list(range(ncols)) if strategy == "first" else list(range(ncols - 1, -1, -1))
        S = scalar_echelon_pivots(vals, col_order)
        if len(S) != r:
            continue
        sub_t = [[vals[i][j] for i in range(m)] for j in S]
        row_order = list(range(m)) if strategy == "first" else list(range(m - 1, -1, -1))
        R = scalar_echelon_pivots(sub_t, row_order)
        if len(R) == r:
            return sorted(R), sorted(S)
    raise ArithmeticError("could not find a nonsingular pivot block")


def kernel_vector(rows: list, seed: int = 0) -> list:
    """A nonzero Laurent polynomial vector ``x`` with ``rows * x = 0``.

    A nonsingular block ``A[P, Q]`` of full rank is located by specialization
    (see :func:`pivot_block`); with one extra column ``c`` the solution of
    ``A[P, Q] x_Q = -A[P, c] x_c`` is built by fraction-free Gauss-Jordan
    elimination, so no polynomial gcds are needed.
    """
    m, n = len(rows), len(rows[0])
    r = rank_of(rows)
    if r >= n:
        raise ArithmeticError("matrix has trivial kernel")
    rank_vars = next(x.rank for row in rows for x in row)
    rng = random.Random(seed)
    if r == 0:
        x = [LaurentPoly.zero(rank_vars)] * n
        x[0] = LaurentPoly.one(rank_vars)
        return x
    P, Q = pivot_block(rows, r, "first", rng)
    extra = next(c for c in range(n) if c not in Q)
    a = [[rows[i][j] for j in Q] + [rows[i][extra]] for i in P]
    prev = LaurentPoly.one(rank_vars)
    for k in range(r):
        piv = next(i for i in range(k, r) if a[i][k].terms)
        a[k], a[piv] = a[piv], a[k]
        p = a[k][k]
        for i in range(r):
            if i == k:
                continue
            q = a[i][k]
            a[i] = [(p * a[i][j] - q * a[k][j]).exquo(prev) for j in range(r + 1)]
        prev = p
    x = [LaurentPoly.zero(rank_vars)] * n
    for k, j in enumerate(Q):
        x[j] = a[k][r]
    x[extra] = -prev
    for row in rows:
        acc = LaurentPoly.zero(rank_vars)
        for e, xe in zip(row, x):
            if e.terms and xe.terms:
                acc = acc + e * xe
        if acc.terms:
            raise ArithmeticError("kernel vector check failed")
    return x


def matrix_evaluate(rows, point) -> list:
    return [[x.evaluate(point) for x in r] for r in rows]
