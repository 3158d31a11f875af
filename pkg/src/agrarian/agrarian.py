"""Invariants of based chain complexes twisted by ``sigma (x) q``.

Everything is computed over the commutative field ``K(X)`` of rational
functions in the free abelianization.  Betti numbers come from certified
ranks; torsion is the determinant of ``d + gamma`` for an explicit chain
contraction ``gamma``; norms are read off the Newton polytopes of the torsion.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Sequence

from .core_arith import (
    ONE,
    ZERO,
    GaussianRational,
    LaurentPoly,
    RatFun,
    deg_in,
    det_commutative,
    pivot_block as _pivot_sets,
    rank_of,
    scalar_echelon_pivots as _scalar_echelon_pivots,
)
from .groups import (
    AbelianizationMap,
    Character,
    GroupRingElement,
    Presentation,
    Representation,
    SigmaQ,
    Word,
    _unimodular_with_first_row,
    abelianize,
    character_covector,
    relator_jacobian,
)
from .polytopes import PolytopeElement, newton_polytope, pg_equal_up_to_translation, polytope_hom, thickness
from .skew import DetValue


class AgrarianError(Exception):
    """Base class for invariant computation failures."""


class NotAcyclicError(AgrarianError):
    pass


class UndefinedInvariantError(AgrarianError):
    pass


class CrossCheckError(AgrarianError):
    """Two independent computations disagreed.  Always a bug."""


class ShapeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Based chain complexes
# ---------------------------------------------------------------------------


class BasedChainComplex:
    """Free right ``ZG``-complex ``C_top -> ... -> C_0`` with preferred bases.

    ``boundaries[i]`` is the matrix of ``d_i: C_i -> C_{i-1}`` with
    ``ranks[i-1]`` rows and ``ranks[i]`` columns.  Missing boundaries are zero.
    """

    def __init__(self, ranks: Sequence[int], boundaries: dict, labels: dict | None = None, *,
                 presentation: Presentation | None = None, deficiency_one: bool | None = None):
        self.ranks = tuple(int(r) for r in ranks)
        if any(r < 0 for r in self.ranks):
            raise ShapeError("negative rank")
        self.boundaries: dict = {}
        for i, mat in boundaries.items():
            if not 1 <= i < len(self.ranks):
                raise ShapeError(f"boundary in degree {i} outside the complex")
            rows, cols = self.ranks[i - 1], self.ranks[i]
            if len(mat) != rows or any(len(r) != cols for r in mat):
                raise ShapeError(f"d_{i} must be {rows}x{cols}")
            self.boundaries[i] = tuple(tuple(r) for r in mat)
        self.labels = labels or {}
        self.presentation = presentation
        self.deficiency_one = deficiency_one

    @property
    def top(self) -> int:
        return len(self.ranks) - 1

    def euler_characteristic(self) -> int:
        return sum((-1) ** i * r for i, r in enumerate(self.ranks))

    def boundary(self, i: int) -> tuple:
        if i in self.boundaries:
            return self.boundaries[i]
        rows = self.ranks[i - 1] if 0 <= i - 1 < len(self.ranks) else 0
        cols = self.ranks[i] if 0 <= i < len(self.ranks) else 0
        return tuple(tuple(GroupRingElement.zero() for _ in range(cols)) for _ in range(rows))

    def evaluate(self, sq: SigmaQ) -> dict:
        """Block matrices of every boundary over ``Q(i)[Z^k]``."""
        return {i: sq.matrix(self.boundary(i)) for i in range(1, len(self.ranks))}

    def check_square_zero(self, sq: SigmaQ) -> bool:
        ev = self.evaluate(sq)
        for i in range(2, len(self.ranks)):
            A, B = ev[i - 1], ev[i]
            if not A or not B or not B[0]:
                continue
            for r in range(len(A)):
                for c in range(len(B[0])):
                    acc = LaurentPoly.zero(sq.rank)
                    for k in range(len(B)):
                        if A[r][k].terms and B[k][c].terms:
                            acc = acc + A[r][k] * B[k][c]
                    if acc.terms:
                        return False
        return True

    def basis_permuted(self, degree: int, perm: Sequence[int], negate: int | None = None) -> "BasedChainComplex":
        """Reorder (and optionally negate one element of) the preferred basis in one degree."""
        bnd = {i: [list(r) for r in self.boundary(i)] for i in range(1, len(self.ranks))}
        if degree >= 1:
            bnd[degree] = [[row[p] for p in perm] for row in bnd[degree]]
            if negate is not None:
                for row in bnd[degree]:
                    row[negate] = -row[negate]
        if degree + 1 < len(self.ranks):
            bnd[degree + 1] = [bnd[degree + 1][p] for p in perm]
            if negate is not None:
                bnd[degree + 1][negate] = [-x for x in bnd[degree + 1][negate]]
        return BasedChainComplex(self.ranks, bnd, self.labels, presentation=self.presentation)


@dataclass(frozen=True)
class BettiProfile:
    values: tuple

    def alternating_sum(self) -> int:
        return sum((-1) ** i * b for i, b in enumerate(self.values))

    def all_zero(self) -> bool:
        return not any(self.values)

    def to_json(self) -> list:
        return list(self.values)


def _sigma_q(sigma: Representation, q: AbelianizationMap | None) -> SigmaQ:
    return SigmaQ(sigma, abelianize(sigma.presentation) if q is None else q)


def _block_rank(mat: list) -> int:
    if not mat or not mat[0]:
        return 0
    return rank_of(mat)


def betti_numbers(C: BasedChainComplex, sigma: Representation, q: AbelianizationMap | None = None) -> BettiProfile:
    """``b_i = n rk C_i - rk d_i - rk d_{i+1}`` over ``K(X)``."""
    sq = _sigma_q(sigma, q)
    ev = C.evaluate(sq)
    n = sq.n
    ranks = {i: _block_rank(ev[i]) for i in ev}
    out = []
    for i, r in enumerate(C.ranks):
        out.append(n * r - ranks.get(i, 0) - ranks.get(i + 1, 0))
    if any(b < 0 for b in out):
        raise CrossCheckError(f"negative Betti number {out}; d o d is not zero")
    return BettiProfile(tuple(out))


def euler_characteristic(C: BasedChainComplex, sigma: Representation, q: AbelianizationMap | None = None) -> int:
    chi = betti_numbers(C, sigma, q).alternating_sum()
    if chi != sigma.dim * C.euler_characteristic():
        raise CrossCheckError("alternating Betti sum differs from n times the rank Euler characteristic")
    return chi


# ---------------------------------------------------------------------------
# Torsion
# ---------------------------------------------------------------------------


def _to_field(mat: list, rank: int) -> list:
    return [[RatFun._raw(x, LaurentPoly.one(rank)) if x.terms else RatFun.zero(rank) for x in row] for row in mat]


def _fmul(A: list, B: list, rank: int) -> list:
    if not A or not B:
        return [[RatFun.zero(rank) for _ in range(len(B[0]) if B else 0)] for _ in range(len(A))]
    out = []
    for row in A:
        nz = [(k, x) for k, x in enumerate(row) if x.num.terms]
        new = []
        for j in range(len(B[0])):
            acc = None
            for k, x in nz:
                y = B[k][j]
                if y.num.terms:
                    acc = x * y if acc is None else acc + x * y
            new.append(acc if acc is not None else RatFun.zero(rank))
        out.append(new)
    return out


def _finverse(A: list, rank: int) -> list:
    n = len(A)
    M = [list(A[i]) + [RatFun.one(rank) if i == j else RatFun.zero(rank) for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c].num.terms), None)
        if piv is None:
            raise ArithmeticError("pivot block is singular")
        M[c], M[piv] = M[piv], M[c]
        inv = M[c][c].inverse()
        M[c] = [x * inv if x.num.terms else x for x in M[c]]
        for i in range(n):
            f = M[i][c]
            if i != c and f.num.terms:
                M[i] = [x - f * y if y.num.terms else x for x, y in zip(M[i], M[c])]
    return [r[n:] for r in M]


@dataclass
class TorsionResult:
    value: RatFun
    strategy: str
    pivots: dict
    det: DetValue

    @property
    def polytope(self) -> PolytopeElement:
        return polytope_hom(self.value)


def _require_acyclic(C: BasedChainComplex, sigma, q):
    b = betti_numbers(C, sigma, q)
    if not b.all_zero():
        raise NotAcyclicError(f"complex is not acyclic over K(X): Betti numbers {list(b.values)}; torsion undefined")
    return b


def torsion(C: BasedChainComplex, sigma: Representation, q: AbelianizationMap | None = None,
            strategy: str = "first", seed: int = 0) -> TorsionResult:
    """Determinant of ``d + gamma: C_even -> C_odd`` for a pivot-built contraction ``gamma``.

    With ``s_i = E_S A^-1 P_R`` a generalized inverse of ``d_i`` built from a
    nonsingular block ``A = d_i[R, S]``, the maps
    ``gamma_i = s_{i+1} (1 - s_i d_i)`` satisfy ``d gamma + gamma d = 1``.
    """
    if strategy not in ("first", "last"):
        raise ValueError("strategy must be 'first' or 'last'")
    q = abelianize(sigma.presentation) if q is None else q
    _require_acyclic(C, sigma, q)
    sq = SigmaQ(sigma, q)
    k, n = sq.rank, sq.n
    rng = random.Random(seed)
    ev = C.evaluate(sq)
    top = C.top
    dims = [n * r for r in C.ranks]
    D = {i: _to_field(ev[i], k) for i in ev}
    s: dict = {}  # s_i: C_{i-1} -> C_i, stored as (S, A^-1, R)
    pivots = {}
    for i in range(1, top + 1):
        r = _block_rank(ev[i])
        R, S = _pivot_sets(ev[i], r, strategy, rng) if r else ([], [])
        pivots[i] = (R, S)
        Ainv = _finverse([[D[i][a][b] for b in S] for a in R], k) if r else []
        s[i] = (R, S, Ainv)

    def s_apply(i: int, X: list) -> list:
        """``s_i X`` for a matrix ``X`` with ``dims[i-1]`` rows."""
        cols = len(X[0]) if X else 0
        out = [[RatFun.zero(k) for _ in range(cols)] for _ in range(dims[i])]
        if i not in s or not s[i][1]:
            return out
        R, S, Ainv = s[i]
        part = _fmul(Ainv, [X[a] for a in R], k)
        for idx, col in enumerate(S):
            out[col] = part[idx]
        return out

    gamma = {}
    for i in range(0, top):
        ident = [[RatFun.one(k) if a == b else RatFun.zero(k) for b in range(dims[i])] for a in range(dims[i])]
        if i >= 1 and dims[i - 1]:
            proj = s_apply(i, D[i])  # s_i d_i
            inner = [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(ident, proj)]
        else:
            inner = ident
        gamma[i] = s_apply(i + 1, inner)

    odd = [i for i in range(top + 1) if i % 2 == 1]
    even = [i for i in range(top + 1) if i % 2 == 0]
    row_off, col_off = {}, {}
    acc = 0
    for i in odd:
        row_off[i] = acc
        acc += dims[i]
    nrows = acc
    acc = 0
    for i in even:
        col_off[i] = acc
        acc += dims[i]
    ncols = acc
    if nrows != ncols:
        raise CrossCheckError("acyclic complex with unequal odd and even dimensions")
    if nrows == 0:
        value = RatFun.one(k)
        return TorsionResult(value, strategy, pivots, DetValue(value, False, 1, [f"contraction:{strategy}"]))
    big = [[RatFun.zero(k) for _ in range(ncols)] for _ in range(nrows)]
    for j in even:
        if j >= 1 and dims[j - 1] and dims[j]:
            for a in range(dims[j - 1]):
                for b in range(dims[j]):
                    big[row_off[j - 1] + a][col_off[j] + b] = D[j][a][b]
        if j + 1 <= top and dims[j + 1] and dims[j]:
            for a in range(dims[j + 1]):
                for b in range(dims[j]):
                    big[row_off[j + 1] + a][col_off[j] + b] = gamma[j][a][b]
    det = det_commutative(big)
    value = det if isinstance(det, RatFun) else RatFun._raw(det, LaurentPoly.one(k))
    if value.is_zero():
        raise CrossCheckError("d + gamma is singular on an acyclic complex")
    return TorsionResult(value, strategy, pivots, DetValue(value, False, 1, [f"contraction:{strategy}"]))


def torsion_by_minors(C: BasedChainComplex, sigma: Representation, q: AbelianizationMap | None = None,
                      seed: int = 0) -> RatFun:
    """Alternating product of complementary minors ``prod det(d_i[R_i, S_i])^((-1)^i)``.

    Independent of any contraction; used to cross-check :func:`torsion`.
    """
    q = abelianize(sigma.presentation) if q is None else q
    _require_acyclic(C, sigma, q)
    sq = SigmaQ(sigma, q)
    k, n = sq.rank, sq.n
    rng = random.Random(seed)
    ev = C.evaluate(sq)
    dims = [n * r for r in C.ranks]
    num = LaurentPoly.one(k)
    den = LaurentPoly.one(k)
    forced_cols = list(range(dims[C.top]))
    for i in range(C.top, 0, -1):
        mat = ev[i]
        S = forced_cols
        r = len(S)
        if r == 0:
            forced_cols = list(range(dims[i - 1]))
            continue
        sub = [[mat[a][b] for b in S] for a in range(dims[i - 1])]
        R = None
        for attempt in range(64):
            point = [GaussianRational(rng.randint(2, 40 + 10 * attempt)) for _ in range(k)]
            vals = [[x.evaluate(point) if x.terms else ZERO for x in row] for row in sub]
            cand = _scalar_echelon_pivots([list(col) for col in zip(*vals)], range(dims[i - 1]))
            if len(cand) == r:
                R = sorted(cand)
                break
        if R is None:
            raise ArithmeticError("no complementary minor found")
        block = [[mat[a][b] for b in S] for a in R]
        d = det_commutative(block)
        if i % 2 == 0:
            num = num * d
        else:
            den = den * d
        forced_cols = [x for x in range(dims[i - 1]) if x not in R]
    return RatFun(num, den)


def agrarian_polytope(C: BasedChainComplex, sigma: Representation, q: AbelianizationMap | None = None) -> PolytopeElement:
    return torsion(C, sigma, q).polytope


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


@dataclass
class NormReport:
    character: tuple
    value: int
    methods: dict
    polytope: PolytopeElement | None = None
    torsion: object = None
    flags: list = field(default_factory=list)
    provenance: str = ""
    details: dict = field(default_factory=dict)

    @property
    def method_agreement(self) -> bool:
        return len(set(self.methods.values())) <= 1

    def to_json(self) -> dict:
        out = {
            "character": list(self.character),
            "norm": self.value,
            "methods": dict(self.methods),
            "method_agreement": self.method_agreement,
            "provenance": self.provenance,
        }
        if self.polytope is not None:
            out["polytope"] = self.polytope.to_json()
        if self.torsion is not None:
            out["torsion"] = str(self.torsion)
        if self.flags:
            out["flags"] = list(self.flags)
        if self.details:
            out["details"] = self.details
        return out


def _split_character(phi: Character, q: AbelianizationMap) -> tuple:
    """``(k, psi0)`` with ``psi = k psi0`` on ``Z^rank`` and ``psi0`` primitive (k = 0 for phi = 0)."""
    psi = character_covector(phi, q)
    k = 0
    for x in psi:
        k = math.gcd(k, x)
    if k == 0:
        return 0, psi
    return k, tuple(x // k for x in psi)


def adapted_degree(f, psi0: Sequence[int]) -> int:
    """Degree in the first variable after a unimodular change making ``psi0`` that variable."""
    T = _unimodular_with_first_row(psi0)
    if isinstance(f, RatFun):
        return deg_in(f.num.linear_change(T), 0) - deg_in(f.den.linear_change(T), 0)
    return deg_in(f.linear_change(T), 0)


def _degenerate_flags(value: int, q: AbelianizationMap) -> list:
    if value < 0 and q.rank == 1:
        return ["negative value: free abelianization of rank 1, semi-norm property may fail"]
    if value < 0:
        return ["negative value"]
    return []


def agrarian_norm(C: BasedChainComplex, sigma: Representation, phi: Character,
                  q: AbelianizationMap | None = None, *, strategies: Sequence[str] = ("first", "last")) -> NormReport:
    """Thickness of the torsion polytope along ``phi``, checked against ``k deg_x`` after adaptation."""
    q = abelianize(sigma.presentation) if q is None else q
    k, psi0 = _split_character(phi, q)
    results = [torsion(C, sigma, q, strategy=s) for s in strategies]
    base = results[0]
    poly = base.polytope
    for other in results[1:]:
        if not pg_equal_up_to_translation(poly, other.polytope):
            raise CrossCheckError("torsion polytopes differ between contraction strategies")
    if k == 0:
        methods = {"polytope_thickness": 0, "adapted_degree": 0}
    else:
        psi = tuple(k * x for x in psi0)
        methods = {
            "polytope_thickness": thickness(poly, psi),
            "adapted_degree": k * adapted_degree(base.value, psi0),
        }
        for other in results[1:]:
            if thickness(other.polytope, psi) != methods["polytope_thickness"]:
                raise CrossCheckError("torsion thickness differs between contraction strategies")
    if len(set(methods.values())) != 1:
        raise CrossCheckError(f"norm methods disagree: {methods}")
    value = methods["polytope_thickness"]
    return NormReport(
        tuple(phi.values), value, methods, poly, base.value,
        _degenerate_flags(value, q), "torsion of d+gamma; thickness and adapted degree",
        {"strategies": list(strategies)},
    )


def _det_block(mat: list, rank: int) -> LaurentPoly:
    if not mat:
        return LaurentPoly.one(rank)
    d = det_commutative(mat)
    return d if isinstance(d, LaurentPoly) else d.as_polynomial()


def _width(p: LaurentPoly, psi: Sequence[int]) -> int:
    return newton_polytope(p).width(psi)


def twisted_alexander_norm(p: Presentation, sigma: Representation, phi: Character,
                           q: AbelianizationMap | None = None, *, rows: Sequence[int] | None = None,
                           cross_check: bool = False) -> NormReport:
    """``deg Det(M2')`` minus ``deg Det(1 - sigma(x_i) q(x_i))`` for a deficiency-one presentation.

    ``M2'`` is the Fox Jacobian with row ``i`` deleted; every admissible row
    (``q(x_i) != 0``) is evaluated unless ``rows`` restricts the choice, and
    all of them must agree.
    """
    if p.deficiency != 1:
        raise ShapeError(f"presentation has deficiency {p.deficiency}, expected 1")
    q = abelianize(p) if q is None else q
    k, psi0 = _split_character(phi, q)
    sq = SigmaQ(sigma, q)
    rank, n = sq.rank, sq.n
    admissible = [i for i in range(p.ngens) if any(q.images[i])]
    if rows is not None:
        bad = [i for i in rows if i not in admissible]
        if bad:
            raise ShapeError(f"rows {bad} have q(x_i) = 0")
        admissible = list(rows)
    if not admissible:
        raise UndefinedInvariantError("no generator with nonzero image in the free abelianization")
    jac = relator_jacobian(p)
    per_row: dict = {}
    polys: dict = {}
    singular = []
    for i in admissible:
        minor = [row for idx, row in enumerate(jac) if idx != i]
        top = _det_block(sq.matrix(minor), rank) if minor and minor[0] else LaurentPoly.one(rank)
        x = GroupRingElement.one() - GroupRingElement.of_word(Word.generator(i))
        bottom = _det_block(sq.element(x), rank)
        if not top.terms:
            singular.append(i)
            continue
        if k == 0:
            per_row[i] = {"polytope_thickness": 0, "adapted_degree": 0}
        else:
            psi = tuple(k * v for v in psi0)
            per_row[i] = {
                "polytope_thickness": _width(top, psi) - _width(bottom, psi),
                "adapted_degree": k * (adapted_degree(top, psi0) - adapted_degree(bottom, psi0)),
            }
        polys[i] = (top, bottom)
    if not per_row:
        raise UndefinedInvariantError("Det of the deleted-row Jacobian vanishes for every admissible row")
    values = {v for d in per_row.values() for v in d.values()}
    if len(values) != 1:
        raise CrossCheckError(f"deleted-row choices or methods disagree: {per_row}")
    value = values.pop()
    first = min(polys)
    top, bottom = polys[first]
    poly = PolytopeElement(newton_polytope(top), newton_polytope(bottom))
    for i, (t2, b2) in polys.items():
        if not pg_equal_up_to_translation(poly, PolytopeElement(newton_polytope(t2), newton_polytope(b2))):
            raise CrossCheckError(f"torsion polytope depends on deleted row {i}")
    report = NormReport(
        tuple(phi.values), value, dict(per_row[first]), poly, RatFun(top, bottom),
        _degenerate_flags(value, q), "deleted-row Fox Jacobian determinant",
        {"rows": sorted(per_row), "singular_rows": singular},
    )
    if cross_check:
        from .groups import chain_complex

        other = agrarian_norm(chain_complex(p), sigma, phi, q)
        report.methods["torsion_thickness"] = other.value
        if other.value != value:
            raise CrossCheckError(f"presentation formula gives {value}, torsion gives {other.value}")
    if value < 0 and q.rank == 1 and p.ngens == 1 and not p.relators:
        report.flags.append("free group of rank 1: kernel of phi is trivial, -chi(kernel) = -1")
    return report


def thurston_norm_fibered(*, fiber_rank: int | None = None, fiber_euler: int | None = None, n: int = 1) -> int:
    """``n (-chi(F))`` for a fibered class with type-F fiber group of known Euler characteristic."""
    if fiber_rank is None and fiber_euler is None:
        raise ValueError("fiber data missing: give fiber_rank or fiber_euler")
    if fiber_rank is not None and fiber_euler is not None and fiber_euler != 1 - fiber_rank:
        raise ValueError("fiber_rank and fiber_euler are inconsistent")
    if n < 1:
        raise ValueError("representation dimension must be positive")
    chi = fiber_euler if fiber_euler is not None else 1 - fiber_rank
    return n * (-chi)


@dataclass
class InequalityReport:
    status: str  # "pass", "violation", "equality_violation", "incomparable"
    agrarian: int
    thurston_bound: int | None
    equality: bool | None
    fibered: bool

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "agrarian_norm": self.agrarian,
            "n_times_thurston": self.thurston_bound,
            "equality": self.equality,
            "fibered": self.fibered,
        }


def check_inequality(p: Presentation, sigma: Representation, phi: Character, fibered: dict | None = None,
                     q: AbelianizationMap | None = None) -> InequalityReport:
    """Compare the twisted norm with ``n`` times the Thurston norm of a fibered class.

    ``fibered`` describes the kernel of the primitive class ``phi / gcd``;
    without it the comparison is ``incomparable``.
    """
    q = abelianize(p) if q is None else q
    if p.deficiency == 1:
        value = twisted_alexander_norm(p, sigma, phi, q).value
    else:
        from .groups import chain_complex

        value = agrarian_norm(chain_complex(p), sigma, phi, q).value
    if not fibered:
        return InequalityReport("incomparable", value, None, None, False)
    div = phi.divisibility
    bound = div * thurston_norm_fibered(fiber_rank=fibered.get("fiber_rank"), fiber_euler=fibered.get("fiber_euler"),
                                        n=sigma.dim)
    equal = value == bound
    if value > bound:
        status = "violation"
    elif not equal:
        status = "equality_violation"
    else:
        status = "pass"
    return InequalityReport(status, value, bound, equal, True)


# ---------------------------------------------------------------------------
# Closed 3-manifold complexes
# ---------------------------------------------------------------------------


def _one_minus_word(e: GroupRingElement):
    """Return ``g`` if ``e = 1 - g`` for a nontrivial word ``g``, else None."""
    if len(e.terms) != 2 or e.terms.get(Word()) != 1:
        return None
    (w, c), = [(w, c) for w, c in e.terms.items() if len(w)]
    return w if c == -1 else None


def three_manifold_norm(p: Presentation, d1: Sequence, d2: Sequence, d3: Sequence, sigma: Representation,
                        phi: Character, q: AbelianizationMap | None = None, *, pairs: Sequence | None = None) -> NormReport:
    """Norm of a complex ``Z G -> Z G^k -> Z G^k -> Z G`` with ``d1(e_i) = p (1 - g_i)``.

    For an admissible pair ``(i, j)``, ``W`` is ``d2`` without row ``i`` and
    column ``j``; the norm is ``deg Det W - deg Det d1_i - deg Det d3_j``.
    With ``d3`` entries ``1 - g_j`` and ``i = j`` this reads
    ``deg Det W - 2 deg Det(1 - sigma(g_i) q(g_i))``.
    """
    q = abelianize(p) if q is None else q
    kk = len(d2)
    if len(d1) != 1 or len(d1[0]) != kk or any(len(r) != kk for r in d2) or len(d3) != kk or any(len(r) != 1 for r in d3):
        raise ShapeError("boundaries must have shapes 1xk, kxk, kx1")
    if q.rank < 2:
        raise ShapeError("free abelianization of rank < 2: the paired-cell formula does not apply")
    gens = [_one_minus_word(e) for e in d1[0]]
    if any(g is None for g in gens):
        raise ShapeError("d1 entries must have the form 1 - g_i")
    C = BasedChainComplex([1, kk, kk, 1], {1: d1, 2: d2, 3: d3}, presentation=p)
    sq = SigmaQ(sigma, q)
    if not C.check_square_zero(sq):
        raise ShapeError("d o d is not zero after evaluation")
    rank = sq.rank
    k, psi0 = _split_character(phi, q)
    d1_dets = [_det_block(sq.element(e), rank) for e in d1[0]]
    d3_dets = [_det_block(sq.element(r[0]), rank) for r in d3]
    if pairs is None:
        pairs = [(i, i) for i in range(kk) if d1_dets[i].terms and d3_dets[i].terms]
        if not pairs:
            i = next((i for i in range(kk) if d1_dets[i].terms), None)
            j = next((j for j in range(kk) if d3_dets[j].terms), None)
            pairs = [] if i is None or j is None else [(i, j)]
    per_pair: dict = {}
    polys = {}
    for i, j in pairs:
        if not d1_dets[i].terms or not d3_dets[j].terms:
            raise ShapeError(f"pair {(i, j)} is not admissible")
        minor = [[e for c, e in enumerate(row) if c != j] for r, row in enumerate(d2) if r != i]
        W = _det_block(sq.matrix(minor), rank) if kk > 1 else LaurentPoly.one(rank)
        if not W.terms:
            continue
        if k == 0:
            per_pair[(i, j)] = {"polytope_thickness": 0, "adapted_degree": 0}
        else:
            psi = tuple(k * v for v in psi0)
            per_pair[(i, j)] = {
                "polytope_thickness": _width(W, psi) - _width(d1_dets[i], psi) - _width(d3_dets[j], psi),
                "adapted_degree": k * (adapted_degree(W, psi0) - adapted_degree(d1_dets[i], psi0)
                                       - adapted_degree(d3_dets[j], psi0)),
            }
        polys[(i, j)] = PolytopeElement(newton_polytope(W), newton_polytope(d1_dets[i] * d3_dets[j]))
    if not per_pair:
        raise UndefinedInvariantError("W is singular for every admissible pair")
    values = {v for d in per_pair.values() for v in d.values()}
    if len(values) != 1:
        raise CrossCheckError(f"admissible pairs or methods disagree: {per_pair}")
    value = values.pop()
    first = min(per_pair)
    return NormReport(tuple(phi.values), value, dict(per_pair[first]), polys[first], None,
                      _degenerate_flags(value, q), "paired-cell 3-manifold formula",
                      {"pairs": [list(x) for x in sorted(per_pair)]})


# ---------------------------------------------------------------------------
# Diagonalization over F[t^+-1]
# ---------------------------------------------------------------------------


def _laurent_divmod(a: LaurentPoly, b: LaurentPoly):
    """``a = q b + r`` with ``width(r) < width(b)`` in one variable."""
    lo_a = min(m[0] for m in a.terms)
    lo_b = min(m[0] for m in b.terms)
    a0, b0 = a.shift((-lo_a,)), b.shift((-lo_b,))
    db = max(m[0] for m in b0.terms)
    inv = b0.terms[(db,)].inverse()
    rem = dict(a0.terms)
    quot = {}
    while rem:
        da = max(m[0] for m in rem)
        if da < db:
            break
        c = rem[(da,)] * inv
        quot[(da - db,)] = c
        for (e,), bc in b0.terms.items():
            key = (e + da - db,)
            v = rem.get(key, ZERO) - c * bc
            if v:
                rem[key] = v
            else:
                rem.pop(key, None)
    q0 = LaurentPoly._from_clean(quot, 1)
    r0 = LaurentPoly._from_clean(rem, 1)
    return q0.shift((lo_a - lo_b,)), r0.shift((lo_a,))


@dataclass
class Diagonalization:
    diagonal: list
    left: list  # U
    right: list  # V
    operations: list

    def degree_sum(self) -> int:
        total = 0
        for i in range(min(len(self.diagonal), len(self.diagonal[0]) if self.diagonal else 0)):
            e = self.diagonal[i][i]
            if e.terms:
                total += deg_in(e, 0)
        return total


def _poly_width(p: LaurentPoly) -> int:
    exps = [m[0] for m in p.terms]
    return max(exps) - min(exps)


def diagonalize_over_laurent(M: Sequence[Sequence]) -> Diagonalization:
    """Elementary row and column operations over ``F[t^+-1]`` bringing ``M`` to diagonal form.

    Returns ``D, U, V`` with ``U M V = D``; every recorded operation is a swap
    or an elementary addition, so ``det U`` and ``det V`` are ``+-1``.
    """
    A = [[x if isinstance(x, LaurentPoly) else LaurentPoly.constant(x, 1) for x in row] for row in M]
    m = len(A)
    n = len(A[0]) if m else 0
    if any(x.rank != 1 for row in A for x in row):
        raise ValueError("entries must be univariate Laurent polynomials")
    one, zero = LaurentPoly.one(1), LaurentPoly.zero(1)
    U = [[one if i == j else zero for j in range(m)] for i in range(m)]
    V = [[one if i == j else zero for j in range(n)] for i in range(n)]
    ops: list = []

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]
        ops.append(("swap_rows", i, j))

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        ops.append(("swap_cols", i, j))

    def add_row(dst, src, f):
        A[dst] = [x - f * y for x, y in zip(A[dst], A[src])]
        U[dst] = [x - f * y for x, y in zip(U[dst], U[src])]
        ops.append(("row_sub", dst, src, str(f)))

    def add_col(dst, src, f):
        for row in A:
            row[dst] = row[dst] - f * row[src]
        for row in V:
            row[dst] = row[dst] - f * row[src]
        ops.append(("col_sub", dst, src, str(f)))

    def is_diagonal():
        return all(not A[i][j].terms for i in range(m) for j in range(n) if i != j)

    t = 0
    while t < min(m, n) and not is_diagonal():
        cand = [(_poly_width(A[i][j]), (i, j) != (t, t), i, j) for i in range(t, m) for j in range(t, n) if A[i][j].terms]
        if not cand:
            break
        _, _, i, j = min(cand)
        if i != t:
            swap_rows(t, i)
        if j != t:
            swap_cols(t, j)
        while True:
            restart = False
            for i in range(t + 1, m):
                if A[i][t].terms:
                    qt, r = _laurent_divmod(A[i][t], A[t][t])
                    add_row(i, t, qt)
                    if r.terms:
                        swap_rows(t, i)
                        restart = True
                        break
            if restart:
                continue
            for j in range(t + 1, n):
                if A[t][j].terms:
                    qt, r = _laurent_divmod(A[t][j], A[t][t])
                    add_col(j, t, qt)
                    if r.terms:
                        swap_cols(t, j)
                        restart = True
                        break
            if not restart:
                break
        t += 1
    return Diagonalization(A, U, V, ops)
