"""Integral polytopes, Minkowski sums and the polytope group.

Polytopes are stored by their extreme points.  Extremality is certified with
an exact rational simplex solver (:func:`lp_feasible`), with exact monotone
chain hulls in dimension two as a fast path.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core_arith import LaurentPoly, RatFun

DEFAULT_SINGLE_CAP = 64


# ---------------------------------------------------------------------------
# Exact linear programming
# ---------------------------------------------------------------------------


def lp_feasible(A: Sequence[Sequence], b: Sequence):
    """Find ``x >= 0`` with ``A x = b`` (exact phase-one simplex, Bland's rule).

    Returns a list of Fractions or ``None`` when infeasible.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    rows = []
    for i in range(m):
        row = [Fraction(x) for x in A[i]]
        rhs = Fraction(b[i])
        if rhs < 0:
            row = [-x for x in row]
            rhs = -rhs
        rows.append(row + [Fraction(1) if k == i else Fraction(0) for k in range(m)] + [rhs])
    total = n + m
    basis = [n + i for i in range(m)]
    # objective: minimize the sum of artificials, expressed in reduced costs
    obj = [Fraction(0)] * (total + 1)
    for i in range(m):
        for j in range(total + 1):
            obj[j] -= rows[i][j]
    for i in range(m):
        obj[n + i] += 1
    while True:
        enter = next((j for j in range(total) if obj[j] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rows[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:
            # unbounded in phase one cannot happen (objective bounded below by 0)
            raise ArithmeticError("phase-one simplex became unbounded")
        piv = rows[leave][enter]
        prow = [x / piv for x in rows[leave]]
        rows[leave] = prow
        for i in range(m):
            if i != leave and rows[i][enter] != 0:
                f = rows[i][enter]
                rows[i] = [x - f * y for x, y in zip(rows[i], prow)]
        if obj[enter] != 0:
            f = obj[enter]
            obj = [x - f * y for x, y in zip(obj, prow)]
        basis[leave] = enter
    if -obj[-1] != 0:
        return None
    x = [Fraction(0)] * total
    for i, j in enumerate(basis):
        x[j] = rows[i][-1]
    if any(x[n + i] != 0 for i in range(m)):
        return None
    return x[:n]


def in_convex_hull(point: Sequence[int], points: Sequence[Sequence[int]]) -> bool:
    """Exact test whether ``point`` is a convex combination of ``points``."""
    if not points:
        return False
    d = len(point)
    A = [[p[k] for p in points] for k in range(d)] + [[1] * len(points)]
    b = list(point) + [1]
    return lp_feasible(A, b) is not None


def _hull_2d(points: list) -> list:
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return hull if hull else pts[:1]


def _extremes(points: Iterable[tuple]) -> list:
    pts = sorted(set(tuple(int(x) for x in p) for p in points))
    if not pts:
        raise ValueError("empty point set")
    d = len(pts[0])
    if len(pts) <= 2:
        return pts
    if d == 0:
        return pts[:1]
    if d == 1:
        return sorted({min(pts), max(pts)})
    if d == 2:
        return sorted(_hull_2d(pts))
    # points that uniquely maximize a coordinate-weighted functional are extreme
    sure = set()
    for weights in _probe_functionals(d):
        vals = [sum(w * x for w, x in zip(weights, p)) for p in pts]
        top = max(vals)
        winners = [p for p, v in zip(pts, vals) if v == top]
        if len(winners) == 1:
            sure.add(winners[0])
    result = []
    for p in pts:
        if p in sure:
            result.append(p)
            continue
        others = [q for q in pts if q != p]
        if not in_convex_hull(p, others):
            result.append(p)
    return sorted(result)


def _probe_functionals(d: int) -> list:
    out = []
    for k in range(d):
        for s in (1, -1):
            out.append(tuple(s if j == k else 0 for j in range(d)))
    for base in (3, 5):
        for s in (1, -1):
            out.append(tuple(s * base ** j for j in range(d)))
            out.append(tuple(s * (-base) ** j for j in range(d)))
    return out


# ---------------------------------------------------------------------------
# Polytopes
# ---------------------------------------------------------------------------


class IntegralPolytope:
    """Convex hull of finitely many integer points, stored by its vertices."""

    __slots__ = ("rank", "extreme_points")

    def __init__(self, extreme_points: Iterable[Sequence[int]], rank: int | None = None, *, _trusted: bool = False):
        pts = [tuple(int(x) for x in p) for p in extreme_points]
        if not pts:
            raise ValueError("a polytope needs at least one point")
        self.rank = len(pts[0]) if rank is None else rank
        if any(len(p) != self.rank for p in pts):
            raise ValueError("points of mixed dimension")
        self.extreme_points = tuple(sorted(set(pts))) if _trusted else tuple(_extremes(pts))

    @classmethod
    def point(cls, p: Sequence[int]) -> "IntegralPolytope":
        return cls([tuple(p)], _trusted=True)

    @classmethod
    def origin(cls, rank: int) -> "IntegralPolytope":
        return cls([(0,) * rank], rank, _trusted=True)

    def __eq__(self, other):
        if not isinstance(other, IntegralPolytope):
            return NotImplemented
        return self.rank == other.rank and self.extreme_points == other.extreme_points

    def __hash__(self):
        return hash((self.rank, self.extreme_points))

    def __add__(self, other: "IntegralPolytope") -> "IntegralPolytope":
        return minkowski_sum(self, other)

    def support(self, phi: Sequence[int]) -> int:
        return max(sum(a * b for a, b in zip(phi, p)) for p in self.extreme_points)

    def width(self, phi: Sequence[int]) -> int:
        vals = [sum(a * b for a, b in zip(phi, p)) for p in self.extreme_points]
        return max(vals) - min(vals)

    def translate(self, v: Sequence[int]) -> "IntegralPolytope":
        return IntegralPolytope([tuple(a + b for a, b in zip(p, v)) for p in self.extreme_points], self.rank, _trusted=True)

    def transform(self, matrix: Sequence[Sequence[int]]) -> "IntegralPolytope":
        """Image under an integer linear map (rows of ``matrix``)."""
        pts = [tuple(sum(r[j] * p[j] for j in range(self.rank)) for r in matrix) for p in self.extreme_points]
        return IntegralPolytope(pts, len(matrix))

    def is_point(self) -> bool:
        return len(self.extreme_points) == 1

    def to_json(self) -> list:
        return [list(p) for p in self.extreme_points]

    def __repr__(self):
        return f"IntegralPolytope({list(self.extreme_points)})"


def hull_extremes(points: Iterable[Sequence[int]]) -> IntegralPolytope:
    """Extreme-point subset of a finite set of lattice points."""
    pts = list(points)
    if not pts:
        raise ValueError("empty point set")
    return IntegralPolytope(pts)


def minkowski_sum(P: IntegralPolytope, Q: IntegralPolytope) -> IntegralPolytope:
    if P.rank != Q.rank:
        raise ValueError("rank mismatch in Minkowski sum")
    if P.is_point():
        return Q.translate(P.extreme_points[0])
    if Q.is_point():
        return P.translate(Q.extreme_points[0])
    sums = {tuple(a + b for a, b in zip(p, q)) for p in P.extreme_points for q in Q.extreme_points}
    return IntegralPolytope(sums, P.rank)


def newton_polytope(p: LaurentPoly) -> IntegralPolytope:
    if not p.terms:
        raise ValueError("the zero polynomial has no Newton polytope")
    return IntegralPolytope(p.terms.keys(), p.rank)


# ---------------------------------------------------------------------------
# The polytope group
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolytopeElement:
    """Formal difference ``pos - neg`` of integral polytopes."""

    pos: IntegralPolytope
    neg: IntegralPolytope

    def __post_init__(self):
        if self.pos.rank != self.neg.rank:
            raise ValueError("rank mismatch")

    @property
    def rank(self) -> int:
        return self.pos.rank

    @classmethod
    def zero(cls, rank: int) -> "PolytopeElement":
        o = IntegralPolytope.origin(rank)
        return cls(o, o)

    @classmethod
    def of(cls, P: IntegralPolytope) -> "PolytopeElement":
        return cls(P, IntegralPolytope.origin(P.rank))

    def __add__(self, other: "PolytopeElement") -> "PolytopeElement":
        return PolytopeElement(self.pos + other.pos, self.neg + other.neg)

    def __neg__(self) -> "PolytopeElement":
        return PolytopeElement(self.neg, self.pos)

    def __sub__(self, other: "PolytopeElement") -> "PolytopeElement":
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, PolytopeElement):
            return NotImplemented
        return pg_equal(self, other)

    __hash__ = None

    def scale(self, k: int) -> "PolytopeElement":
        if k < 0:
            return (-self).scale(-k)
        acc = PolytopeElement.zero(self.rank)
        for _ in range(k):
            acc = acc + self
        return acc

    def translate(self, v: Sequence[int]) -> "PolytopeElement":
        return PolytopeElement(self.pos.translate(v), self.neg)

    def transform(self, matrix) -> "PolytopeElement":
        return PolytopeElement(self.pos.transform(matrix), self.neg.transform(matrix))

    def to_json(self) -> dict:
        return {"pos": self.pos.to_json(), "neg": self.neg.to_json()}


def pg_equal(a: PolytopeElement, b: PolytopeElement) -> bool:
    """``a == b`` in the polytope group, i.e. ``a.pos + b.neg == b.pos + a.neg``."""
    if a.rank != b.rank:
        raise ValueError("rank mismatch")
    return minkowski_sum(a.pos, b.neg) == minkowski_sum(b.pos, a.neg)


def pg_equal_up_to_translation(a: PolytopeElement, b: PolytopeElement) -> bool:
    """Equality after translating so both sides have the same lexicographic minimum."""
    left = minkowski_sum(a.pos, b.neg)
    right = minkowski_sum(b.pos, a.neg)
    shift = tuple(x - y for x, y in zip(right.extreme_points[0], left.extreme_points[0]))
    return left.translate(shift) == right


def polytope_hom(f) -> PolytopeElement:
    """``P(num / den) = P(num) - P(den)`` for rational functions and determinants."""
    from .skew import DetValue, OrePoly, SkewRatFun

    if isinstance(f, DetValue):
        if f.representative is None:
            raise ValueError("the polytope map is undefined on 0")
        f = f.representative
    if isinstance(f, LaurentPoly):
        return PolytopeElement.of(newton_polytope(f))
    if isinstance(f, RatFun):
        if f.is_zero():
            raise ValueError("the polytope map is undefined on 0")
        return PolytopeElement(newton_polytope(f.num), newton_polytope(f.den))
    if isinstance(f, SkewRatFun):
        if f.is_zero():
            raise ValueError("the polytope map is undefined on 0")
        return PolytopeElement(
            IntegralPolytope([(e,) for e in f.num.coeffs]), IntegralPolytope([(e,) for e in f.den.coeffs])
        )
    if isinstance(f, OrePoly):
        return polytope_hom(SkewRatFun(f))
    raise TypeError(f"no polytope image for {type(f).__name__}")


def thickness(a: PolytopeElement, phi: Sequence[int]) -> int:
    """``width_phi(pos) - width_phi(neg)``; additive on the polytope group."""
    if len(phi) != a.rank:
        raise ValueError("character length does not match polytope rank")
    return a.pos.width(phi) - a.neg.width(phi)


# ---------------------------------------------------------------------------
# Singleness
# ---------------------------------------------------------------------------


def _interior_normal(v: tuple, others: Sequence[tuple]):
    """A rational functional strictly maximized at ``v`` among ``others``."""
    d = len(v)
    if not others:
        return (Fraction(0),) * d
    # variables: c_plus (d), c_minus (d), slack per constraint
    m = len(others)
    A = []
    b = []
    for i, u in enumerate(others):
        diff = [v[k] - u[k] for k in range(d)]
        row = diff + [-x for x in diff] + [Fraction(-1) if j == i else Fraction(0) for j in range(m)]
        A.append(row)
        b.append(1)
    sol = lp_feasible(A, b)
    if sol is None:
        return None
    return tuple(sol[k] - sol[d + k] for k in range(d))


def _cap() -> int:
    raw = os.environ.get("AGRARIAN_CAP_POLYTOPE")
    if raw is None:
        return DEFAULT_SINGLE_CAP
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"AGRARIAN_CAP_POLYTOPE must be an integer, got {raw!r}") from None


def is_single(a: PolytopeElement, cap: int | None = None):
    """Decide whether ``a = R - {0}`` for a polytope ``R``.

    Returns ``(True, R)``, ``(False, None)`` or ``("unknown", None)`` when the
    vertex count exceeds ``cap`` (default from ``AGRARIAN_CAP_POLYTOPE``).

    If ``pos = R + neg`` then for every vertex ``v`` of ``pos`` and any
    functional ``c`` strictly maximized at ``v``, ``neg`` has a unique
    maximizer ``w`` and ``v - w`` is a vertex of ``R``.  The candidate built this
    way is then checked exactly.
    """
    cap = _cap() if cap is None else cap
    pos, neg = a.pos, a.neg
    if len(pos.extreme_points) + len(neg.extreme_points) > cap:
        return "unknown", None
    if neg.is_point():
        return True, pos.translate(tuple(-x for x in neg.extreme_points[0]))
    candidates = []
    for v in pos.extreme_points:
        others = [u for u in pos.extreme_points if u != v]
        c = _interior_normal(v, others)
        if c is None:
            raise ArithmeticError("stored point is not extreme")
        vals = [sum(ci * wi for ci, wi in zip(c, w)) for w in neg.extreme_points]
        top = max(vals)
        winners = [w for w, val in zip(neg.extreme_points, vals) if val == top]
        if len(winners) != 1:
            return False, None
        w = winners[0]
        candidates.append(tuple(x - y for x, y in zip(v, w)))
    R = IntegralPolytope(candidates, a.rank)
    if minkowski_sum(R, neg) == pos:
        return True, R
    return False, None
