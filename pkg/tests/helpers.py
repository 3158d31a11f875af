"""Shared fixtures and random generators for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

from agrarian.agrarian import BasedChainComplex
from agrarian.core_arith import GaussianRational, LaurentPoly, RatFun
from agrarian.skew import OrePoly, SkewRatFun
from agrarian.groups import (
    GroupRingElement,
    NielsenMove,
    Presentation,
    Representation,
    Word,
    apply_nielsen_move,
    parse_presentation,
    relator_jacobian,
)

TREFOIL = "<a,b | a b a b^-1 a^-1 b^-1>"
FREE_BY_CYCLIC = "<x,y,t | t x t^-1 x^-1 y^-1, t y t^-1 x^-1>"
RANK_TWO = "<x,y,t | t x t^-1 x^-1, t y t^-1 x^-1 y^-1>"


def trefoil():
    return parse_presentation(TREFOIL)


def trefoil_reps():
    """Trivial, sign, and the 2- and 3-dimensional integral representations aba = bab."""
    p = trefoil()
    a2 = [[1, 1], [0, 1]]
    b2 = [[1, 0], [-1, 1]]
    a3 = [[1, 0, 0], [0, 1, 1], [0, 0, 1]]
    b3 = [[1, 0, 0], [0, 1, 0], [0, -1, 1]]
    return {
        "trivial": Representation.trivial(p),
        "sign": Representation(p, [[[-1]], [[-1]]]),
        "sl2": Representation(p, [a2, b2]),
        "dim3": Representation(p, [a3, b3]),
        "i_unit": Representation(p, [[["i"]], [["i"]]]),
    }


def gauss(rng: random.Random, lo: int = -3, hi: int = 3, complex_part: bool = True) -> GaussianRational:
    im = rng.randint(lo, hi) if complex_part and rng.random() < 0.4 else 0
    return GaussianRational(Fraction(rng.randint(lo, hi), rng.choice([1, 1, 2])), im)


def random_invertible(rng: random.Random, n: int, complex_part: bool = True) -> list:
    """Unit upper times unit lower times a diagonal of small nonzero entries."""
    while True:
        d = [gauss(rng, 1, 3, complex_part) for _ in range(n)]
        if all(d):
            break
    U = [[GaussianRational(1) if i == j else (gauss(rng, -2, 2, complex_part) if j > i else GaussianRational(0)) for j in range(n)] for i in range(n)]
    L = [[GaussianRational(1) if i == j else (gauss(rng, -2, 2, complex_part) if j < i else GaussianRational(0)) for j in range(n)] for i in range(n)]
    UL = [[sum((U[i][k] * L[k][j] for k in range(n)), GaussianRational(0)) for j in range(n)] for i in range(n)]
    return [[UL[i][j] * d[j] for j in range(n)] for i in range(n)]


def _mat_mul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), GaussianRational(0)) for j in range(len(B[0]))] for i in range(len(A))]


def _mat_inv(A):
    from agrarian.groups import _mat_inverse

    return _mat_inverse(A)


# --- free-by-cyclic families -------------------------------------------------


def random_automorphism(rng: random.Random, r: int, moves: int = 3) -> list:
    """Images of x_0..x_{r-1} under a product of elementary Nielsen automorphisms."""
    images = [Word.generator(i) for i in range(r)]
    for _ in range(moves):
        kind = rng.random()
        if r >= 2 and kind < 0.6:
            i, j = rng.sample(range(r), 2)
            e = rng.choice([1, -1])
            images[i] = images[i] * (images[j] if e == 1 else images[j].inverse())
        elif r >= 2 and kind < 0.8:
            i, j = rng.sample(range(r), 2)
            images[i], images[j] = images[j], images[i]
        else:
            i = rng.randrange(r)
            images[i] = images[i].inverse()
    return images


def mapping_torus(images: list, r: int) -> Presentation:
    """``<x_1..x_r, t | t x_i t^-1 f(x_i)^-1>``."""
    names = tuple(f"x{i + 1}" for i in range(r)) + ("t",)
    t = r
    rels = []
    for i, img in enumerate(images):
        w = Word([(t, 1), (i, 1), (t, -1)]) * img.inverse()
        rels.append(w)
    return Presentation(names, tuple(rels))


def free_by_cyclic_family(rng: random.Random, r: int, n: int):
    """A random F_r x| Z presentation with a validated n-dimensional representation.

    Three flavours: random monodromy with sigma trivial on F_r; the identity
    monodromy with sigma(t) scalar and free sigma(x_i); a swap monodromy with
    an involutive sigma(t).
    """
    flavour = rng.choice(["random", "product", "swap"] if r >= 2 else ["random", "product"])
    if flavour == "random":
        images = random_automorphism(rng, r, rng.randint(1, 3))
        p = mapping_torus(images, r)
        mats = [[[1 if a == b else 0 for b in range(n)] for a in range(n)] for _ in range(r)]
        mats.append(random_invertible(rng, n))
    elif flavour == "product":
        images = [Word.generator(i) for i in range(r)]
        p = mapping_torus(images, r)
        mats = [random_invertible(rng, n) for _ in range(r)]
        c = gauss(rng, 1, 3)
        mats.append([[c if a == b else 0 for b in range(n)] for a in range(n)])
    else:
        images = [Word.generator(i) for i in range(r)]
        images[0], images[1] = Word.generator(1), Word.generator(0)
        p = mapping_torus(images, r)
        if n == 1:
            T = [[GaussianRational(-1)]]
        else:
            T = [[0, 1], [1, 0]] if n == 2 else None
            T = [[GaussianRational(x) for x in row] for row in T]
        X1 = random_invertible(rng, n)
        X2 = _mat_mul(_mat_mul(T, X1), _mat_inv(T))
        others = [[[1 if a == b else 0 for b in range(n)] for a in range(n)] for _ in range(r - 2)]
        mats = [X1, X2] + others + [T]
    return p, Representation(p, mats), flavour


def fibered_character(p: Presentation):
    """Projection onto the stable letter t (the last generator)."""
    from agrarian.groups import make_character

    return make_character(p, [0] * (p.ngens - 1) + [1])


# --- random Nielsen transformations ----------------------------------------


def random_nielsen(rng: random.Random, p: Presentation, count: int = 3) -> list:
    moves = []
    for _ in range(count):
        if p.ngens >= 2 and rng.random() < 0.8:
            i, j = rng.sample(range(p.ngens), 2)
            moves.append(NielsenMove("mul", i, j, rng.choice([1, -1])))
        else:
            moves.append(NielsenMove("inv", rng.randrange(p.ngens)))
    new = p
    for mv in moves:
        new = apply_nielsen_move(new, mv)
    return new, moves


# --- random based complexes ----------------------------------------------------


GROUP_POOL = {
    "Z": ("<t | >", lambda n, rng: [random_invertible(rng, n)]),
    "F2": ("<a,b | >", lambda n, rng: [random_invertible(rng, n), random_invertible(rng, n)]),
    "trefoil": (TREFOIL, None),
    "BS12": ("<a,t | t a t^-1 a^-1 a^-1>", None),
    "Z2": ("<a,b | a b a^-1 b^-1>", None),
}


def _pool_rep(name: str, n: int, rng: random.Random) -> Representation:
    text, maker = GROUP_POOL[name]
    p = parse_presentation(text)
    if maker is not None:
        return Representation(p, maker(n, rng))
    I = [[1 if a == b else 0 for b in range(n)] for a in range(n)]
    if name == "trefoil":
        if n == 1:
            s = rng.choice([1, -1])
            return Representation(p, [[[s]], [[s]]])
        a = [[1, 1], [0, 1]]
        b = [[1, 0], [-1, 1]]
        if n == 3:
            a = [[1, 0, 0], [0, 1, 1], [0, 0, 1]]
            b = [[1, 0, 0], [0, 1, 0], [0, -1, 1]]
        return Representation(p, [a, b])
    if name == "BS12":
        if n == 1:
            return Representation(p, [I, [[gauss(rng, 1, 3)]]])
        a = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        a[0][1] = 1
        t = [[0] * n for _ in range(n)]
        t[0][0] = 2
        for i in range(1, n):
            t[i][i] = 1
        return Representation(p, [a, t])
    if name == "Z2":
        A = random_invertible(rng, n)
        c = gauss(rng, 1, 3)
        return Representation(p, [A, [[c if i == j else 0 for j in range(n)] for i in range(n)]])
    raise KeyError(name)


def random_group_element(rng: random.Random, ngens: int, max_len: int = 2, terms: int = 2) -> GroupRingElement:
    out = GroupRingElement.zero()
    for _ in range(rng.randint(1, terms)):
        L = rng.randint(0, max_len)
        w = Word([(rng.randrange(ngens), rng.choice([1, -1])) for _ in range(L)])
        out = out + GroupRingElement.of_word(w, rng.choice([1, -1, 2]))
    return out


def _mat_mul_ring(A, B):
    if not A or not B or not B[0]:
        return [[GroupRingElement.zero() for _ in range(len(B[0]) if B else 0)] for _ in range(len(A))]
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), GroupRingElement.zero()) for j in range(len(B[0]))] for i in range(len(A))]


def _elementary(size: int, i: int, j: int, c: GroupRingElement, sign: int = 1):
    E = [[GroupRingElement.one() if a == b else GroupRingElement.zero() for b in range(size)] for a in range(size)]
    if size > 1 and i != j:
        E[i][j] = c * sign
    return E


def random_complex(rng: random.Random, max_rank: int = 5, top: int = 3):
    """Direct sum of elementary pieces conjugated by elementary basis changes.

    ``d o d = 0`` holds exactly in the free group ring, so it holds after any
    evaluation.  Returns the complex, the group name and a Representation maker.
    """
    name = rng.choice(sorted(GROUP_POOL))
    p = parse_presentation(GROUP_POOL[name][0])
    ng = p.ngens
    pieces = []  # (degree, kind, element)
    ranks = [0] * (top + 1)
    while True:
        d = rng.randint(0, top)
        if rng.random() < 0.35 or d == top:
            if ranks[d] + 1 > max_rank:
                break
            pieces.append((d, "single", None))
            ranks[d] += 1
        else:
            if ranks[d] + 1 > max_rank or ranks[d + 1] + 1 > max_rank:
                break
            pieces.append((d + 1, "pair", random_group_element(rng, ng)))
            ranks[d] += 1
            ranks[d + 1] += 1
        if rng.random() < 0.2:
            break
    # assign basis positions
    pos = [0] * (top + 1)
    bnd = {i: [[GroupRingElement.zero() for _ in range(ranks[i])] for _ in range(ranks[i - 1])] for i in range(1, top + 1)}
    for deg, kind, e in pieces:
        if kind == "single":
            pos[deg] += 1
        else:
            r, c = pos[deg - 1], pos[deg]
            bnd[deg][r][c] = e
            pos[deg - 1] += 1
            pos[deg] += 1
    # conjugate by one elementary change per degree
    changes = {}
    for d in range(top + 1):
        if ranks[d] >= 2 and rng.random() < 0.8:
            i, j = rng.sample(range(ranks[d]), 2)
            c = random_group_element(rng, ng, max_len=1, terms=1)
            changes[d] = (i, j, c)
    for d in range(1, top + 1):
        M = bnd[d]
        if d - 1 in changes:
            i, j, c = changes[d - 1]
            M = _mat_mul_ring(_elementary(ranks[d - 1], i, j, c), M)
        if d in changes:
            i, j, c = changes[d]
            M = _mat_mul_ring(M, _elementary(ranks[d], i, j, c, -1))
        bnd[d] = M
    return BasedChainComplex(ranks, bnd, presentation=p), name


def pool_representation(name: str, n: int, rng: random.Random) -> Representation:
    return _pool_rep(name, n, rng)


# --- 3-manifold complexes --------------------------------------------------


def torus3_complex():
    """Koszul complex of Z^3 = <x,y,z>; 2-cells ordered (yz, xz, xy)."""
    p = parse_presentation("<x,y,z | x y x^-1 y^-1, x z x^-1 z^-1, y z y^-1 z^-1>")
    one = GroupRingElement.one()
    g = [GroupRingElement.of_word(Word.generator(i)) for i in range(3)]
    u = [one - gi for gi in g]
    zero = GroupRingElement.zero()
    d1 = [[u[0], u[1], u[2]]]
    # d(e_yz) = e_y u_z - e_z u_y ; d(e_xz) = e_x u_z - e_z u_x ; d(e_xy) = e_x u_y - e_y u_x
    d2 = [
        [zero, u[2], u[1]],
        [u[2], zero, -u[0]],
        [-u[1], -u[0], zero],
    ]
    d3 = [[u[0]], [-u[1]], [u[2]]]
    return p, d1, d2, d3


def surface_times_circle_complex():
    """Product CW structure on (genus-2 surface) x S^1.

    1-cells a1, b1, a2, b2, t; 2-cells e_j x t (j = 1..4) and the surface cell F.
    """
    p = parse_presentation(
        "<a1,b1,a2,b2,t | a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1, "
        "a1 t a1^-1 t^-1, b1 t b1^-1 t^-1, a2 t a2^-1 t^-1, b2 t b2^-1 t^-1>"
    )
    one = GroupRingElement.one()
    zero = GroupRingElement.zero()
    g = [GroupRingElement.of_word(Word.generator(i)) for i in range(5)]
    u = [one - gi for gi in g]
    surf = Presentation(p.names, (p.relators[0],))
    fox = relator_jacobian(surf)  # 5 x 1, right derivatives of the surface relator
    d1 = [u]
    d2 = [[zero] * 5 for _ in range(5)]
    for j in range(4):
        # d(e_j x t) = t-cell (1 - g_j) - e_j (1 - t)
        d2[4][j] = u[j]
        d2[j][j] = -u[4]
    for i in range(5):
        d2[i][4] = fox[i][0]
    # d(F x t) = sum_j (e_j x t) R_j(r) + F (1 - t)
    d3 = [[fox[j][0]] for j in range(4)] + [[u[4]]]
    return p, d1, d2, d3


def s1_times_s2_complex():
    p = parse_presentation("<t | >")
    one = GroupRingElement.one()
    u = one - GroupRingElement.of_word(Word.generator(0))
    return p, [[u]], [[GroupRingElement.zero()]], [[u]]


# --- rational functions ---------------------------------------------------------


def random_laurent(rng: random.Random, rank: int = 1, terms: int = 3, spread: int = 3, complex_part: bool = True) -> LaurentPoly:
    out = {}
    for _ in range(rng.randint(1, terms)):
        mono = tuple(rng.randint(-spread, spread) for _ in range(rank))
        c = gauss(rng, -4, 4, complex_part)
        if c:
            out[mono] = c
    if not out:
        out[(0,) * rank] = GaussianRational(1)
    return LaurentPoly(out, rank)


def random_ratfun(rng: random.Random, rank: int = 1, complex_part: bool = False) -> RatFun:
    num = random_laurent(rng, rank, complex_part=complex_part)
    den = random_laurent(rng, rank, terms=2, complex_part=complex_part)
    return RatFun(num, den)


# --- twisted polynomials ---------------------------------------------------------


def monomial_coefficient(rng: random.Random) -> RatFun:
    """``c * y^k`` with small c and k in {-1, 0, 1}."""
    return RatFun(LaurentPoly({(rng.randint(-1, 1),): GaussianRational(rng.choice([-2, -1, 1, 2, 3]))}, 1))


def sparse_ore(rng: random.Random, alpha, low: int = 0, width: int = 1) -> OrePoly:
    coeffs = {low: monomial_coefficient(rng)}
    for e in range(low + 1, low + width + 1):
        if rng.random() < 0.5:
            coeffs[e] = monomial_coefficient(rng)
    return OrePoly(coeffs, alpha)


def identity_plus_Nt(rng: random.Random, n: int, alpha, density: float = 0.5, width: int = 0) -> list:
    """Random ``Id + N t`` with sparse N whose entries have monomial coefficients."""
    one = SkewRatFun.one(alpha)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            x = SkewRatFun(sparse_ore(rng, alpha, 1, width)) if rng.random() < density else SkewRatFun.zero(alpha)
            row.append(one + x if i == j else x)
        rows.append(row)
    return rows


# --- independent Fox-calculus oracle --------------------------------------------


def fox_alexander_degree(relator: str, gens: str, images: dict):
    """Width of the deleted-row Alexander determinant of a two-generator one-relator group,
    computed from the relator string with sympy; no package code involved."""
    import sympy

    t = sympy.symbols("t")
    letters = relator.split()

    def value(tok):
        g = tok.removesuffix("^-1")
        return t ** (-images[g] if tok.endswith("^-1") else images[g])

    derivs = {}
    for g in gens:
        acc, prefix = 0, 1
        for tok in letters:
            if tok.removesuffix("^-1") == g:
                # left derivative: d(u x) = du + u, d(u x^-1) = du - u x^-1
                acc += prefix if not tok.endswith("^-1") else -prefix * value(tok)
            prefix *= value(tok)
        derivs[g] = sympy.simplify(acc)
    # delete the row of the first generator: Delta = d_{second} / (1 - t^{image of first})
    first, second = gens
    quotient = sympy.cancel(derivs[second] / (1 - t ** images[first]))
    num, den = sympy.fraction(sympy.together(quotient))

    def width(expr):
        poly = sympy.Poly(sympy.expand(expr * t ** 20), t)
        exps = [m[0] for m in poly.monoms()]
        return max(exps) - min(exps)

    return width(num) - width(den), quotient
