import random

import pytest
from hypothesis import given, settings, strategies as st

from agrarian.core_arith import LaurentPoly, RatFun, det_commutative, gaussian
from agrarian.skew import (
    FieldAutomorphism,
    GaussianEmbedding,
    OrePoly,
    SkewRatFun,
    apply_entrywise_hom,
    det_degree,
    dieudonne_det,
    greatest_common_left_divisor,
    left_common_multiple,
    ore_left_divmod,
    ore_mul,
    ore_right_divmod,
    reduce_identity_plus_Nt,
    replay_operations,
    unwind_polynomial_rows,
    series_expand,
    series_invert,
)

from helpers import identity_plus_Nt, random_laurent, sparse_ore

DOUBLE = FieldAutomorphism.scaling([2])
IDENT = FieldAutomorphism.identity(1)
Y = RatFun(LaurentPoly.variable(0, 1))


def random_ore(rng, alpha, width=2, low=0):
    coeffs = {}
    for e in range(low, low + rng.randint(0, width) + 1):
        coeffs[e] = RatFun(random_laurent(rng, 1, 2, 2, complex_part=False))
    return OrePoly(coeffs, alpha)


def random_skew(rng, alpha):
    num = random_ore(rng, alpha, 1)
    den = random_ore(rng, alpha, 1)
    return SkewRatFun(num, den)


def t(alpha, k=1):
    return OrePoly.t_power(k, alpha)


def c(alpha, x):
    return OrePoly.scalar(x, alpha)


# -- automorphisms --------------------------------------------------------------


def test_automorphism_rejects_non_inverse_tables():
    with pytest.raises(ValueError):
        FieldAutomorphism([(2, (1,))], [(2, (1,))])


def test_automorphism_powers():
    assert DOUBLE.apply(Y, 3) == RatFun(LaurentPoly({(1,): gaussian(8)}, 1))
    assert DOUBLE.apply(DOUBLE.apply(Y, 2), -2) == Y


def test_swap_automorphism():
    swap = FieldAutomorphism([(1, (0, 1)), (1, (1, 0))], [(1, (0, 1)), (1, (1, 0))])
    x0 = RatFun(LaurentPoly.variable(0, 2))
    x1 = RatFun(LaurentPoly.variable(1, 2))
    assert swap.apply(x0) == x1 and swap.apply(x0, 2) == x0


# -- twisted polynomials ----------------------------------------------------------


def test_commutation_rule():
    # t * y = 2y * t
    lhs = ore_mul(t(DOUBLE), c(DOUBLE, Y))
    rhs = ore_mul(c(DOUBLE, RatFun(LaurentPoly({(1,): gaussian(2)}, 1))), t(DOUBLE))
    assert lhs == rhs
    assert ore_mul(c(DOUBLE, Y), t(DOUBLE)) != lhs


@given(st.integers(0, 10_000))
def test_ore_mul_associative_and_distributive(seed):
    rng = random.Random(seed)
    a, b, d = (random_ore(rng, DOUBLE, 2, rng.randint(-1, 1)) for _ in range(3))
    assert ore_mul(ore_mul(a, b), d) == ore_mul(a, ore_mul(b, d))
    assert ore_mul(a, b + d) == ore_mul(a, b) + ore_mul(a, d)
    if a and b:
        assert ore_mul(a, b).width() == a.width() + b.width()


@given(st.integers(0, 10_000))
def test_divmod_identities(seed):
    rng = random.Random(seed)
    a = random_ore(rng, DOUBLE, 3)
    b = random_ore(rng, DOUBLE, 2)
    q, r = ore_left_divmod(a, b)
    assert ore_mul(q, b) + r == a and (not r or r.degree() < b.degree())
    q, r = ore_right_divmod(a, b)
    assert ore_mul(b, q) + r == a and (not r or r.degree() < b.degree())


@given(st.integers(0, 10_000))
def test_left_common_multiple(seed):
    rng = random.Random(seed)
    a, b = random_ore(rng, DOUBLE, 2), random_ore(rng, DOUBLE, 2)
    u, v = left_common_multiple(a, b)
    assert u and v
    assert ore_mul(u, a) == ore_mul(v, b)


def test_gcld_of_multiples():
    rng = random.Random(3)
    g = random_ore(rng, DOUBLE, 1)
    while g.width() < 1:
        g = random_ore(rng, DOUBLE, 1)
    a = ore_mul(g, random_ore(rng, DOUBLE, 1))
    b = ore_mul(g, random_ore(rng, DOUBLE, 1))
    h = greatest_common_left_divisor(a, b)
    assert h.degree() >= g.degree()
    for x in (a, b):
        _, r = ore_right_divmod(x, h)
        assert not r


# -- skew fraction field ----------------------------------------------------------


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_skew_field_axioms(seed):
    rng = random.Random(seed)
    a, b, d = (random_skew(rng, DOUBLE) for _ in range(3))
    one = SkewRatFun.one(DOUBLE)
    assert (a * b) * d == a * (b * d)
    assert a * (b + d) == a * b + a * d
    assert (a + b) + d == a + (b + d)
    if a:
        assert a * a.inverse() == one == a.inverse() * a


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_ord_and_deg_are_valuations(seed):
    rng = random.Random(seed)
    a, b = random_skew(rng, DOUBLE), random_skew(rng, DOUBLE)
    assert (a * b).ord() == a.ord() + b.ord()
    assert (a * b).deg() == a.deg() + b.deg()
    assert (a + b).ord() >= min(a.ord(), b.ord())


def test_left_fraction_normalizes():
    a = random_ore(random.Random(1), DOUBLE, 1)
    f = SkewRatFun(ore_mul(a, t(DOUBLE, 2)), a)
    assert f.is_polynomial()
    assert f == SkewRatFun(t(DOUBLE, 2))
    r = f.reduced()
    assert r.den.width() == 0 and r == f


def test_twisting_is_visible_in_fractions():
    tt = SkewRatFun(t(DOUBLE))
    y = SkewRatFun(c(DOUBLE, Y))
    assert tt * y != y * tt
    assert tt * y * tt.inverse() == SkewRatFun(c(DOUBLE, DOUBLE.apply(Y)))


@settings(max_examples=20)
@given(st.integers(0, 10_000))
def test_series_inverse_truncation(seed):
    rng = random.Random(seed)
    f = random_ore(rng, DOUBLE, 2, rng.randint(-1, 1))
    upto = f.low() * -1 + 5
    g = series_invert(f, upto).truncate(upto)
    prod = ore_mul(g, f)
    # g*f = 1 modulo terms of exponent >= upto + low(f)
    for e, coeff in prod.coeffs.items():
        if e < upto + f.low():
            assert coeff == (RatFun.one(1) if e == 0 else RatFun.zero(1))


def test_series_expand_geometric():
    one = OrePoly.one(IDENT)
    f = SkewRatFun(one, one - t(IDENT))  # 1/(1-t) = 1 + t + t^2 + ...
    coeffs = series_expand(f, 5).extend_to(5)
    assert all(x == RatFun.one(1) for x in coeffs)


# -- Dieudonne determinant --------------------------------------------------------------


def test_dieudonne_cases():
    s = lambda p: SkewRatFun(p)  # noqa: E731
    one, zero = OrePoly.one(DOUBLE), OrePoly.zero(DOUBLE)
    d = dieudonne_det([[s(t(DOUBLE))]])
    assert d.deg() == 0 and d.ord() == 1 and d.trace == ["case1"]
    assert dieudonne_det([[s(one), s(one)], [s(zero), s(zero)]]).is_zero()
    anti = dieudonne_det([[s(zero), s(one)], [s(t(DOUBLE)), s(zero)]])
    assert anti.sign == -1 and "case4:0" in anti.trace and anti.ord() == 1
    diag = dieudonne_det([[s(t(DOUBLE)), s(zero)], [s(zero), s(one + t(DOUBLE))]])
    assert diag.ord() == 1 and diag.deg() == 1


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_dieudonne_matches_commutative_det(seed, n):
    rng = random.Random(seed)
    M = [[RatFun(random_laurent(rng, 1, 2, 2), random_laurent(rng, 1, 1, 1)) for _ in range(n)] for _ in range(n)]
    if n > 1 and rng.random() < 0.3:
        M[-1][-1] = RatFun.zero(1)
    d = dieudonne_det(M)
    ref = det_commutative(M)
    if ref.is_zero():
        assert d.is_zero()
    else:
        assert d.representative == ref


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_dieudonne_valuations_multiplicative(seed):
    rng = random.Random(seed)
    n = 2
    A = [[SkewRatFun(sparse_ore(rng, DOUBLE, rng.randint(0, 1))) for _ in range(n)] for _ in range(n)]
    B = [[SkewRatFun(sparse_ore(rng, DOUBLE, rng.randint(0, 1))) for _ in range(n)] for _ in range(n)]
    AB = [[A[i][0] * B[0][j] + A[i][1] * B[1][j] for j in range(n)] for i in range(n)]
    da, db, dab = dieudonne_det(A), dieudonne_det(B), dieudonne_det(AB)
    if da.is_zero() or db.is_zero():
        assert dab.is_zero()
    else:
        assert dab.ord() == da.ord() + db.ord()
        assert dab.deg() == da.deg() + db.deg()


# -- process on Id + N t -----------------------------------------------------------------


@settings(max_examples=30)
@given(st.integers(0, 10_000), st.integers(1, 4), st.sampled_from(["commutative", "twisted"]))
def test_reduction_process(seed, n, flavour):
    rng = random.Random(seed)
    alpha = IDENT if flavour == "commutative" else DOUBLE
    M = identity_plus_Nt(rng, n, alpha)
    rep = reduce_identity_plus_Nt(M)
    assert all(rep.upper[i][j].is_zero() for i in range(n) for j in range(i))
    assert all(o >= 1 for o in rep.diagonal_orders)
    assert rep.det_order == 0 and rep.invertible
    assert all(f.ord() >= 1 for _, _, f in rep.operations)
    back = unwind_polynomial_rows(rep)
    assert all(back[i][j] == M[i][j] for i in range(n) for j in range(n))
    # generic fraction arithmetic swells on twisted 4x4 input, so only smaller cases
    if flavour == "commutative" or n <= 3:
        back = replay_operations(rep)
        assert all(back[i][j] == M[i][j] for i in range(n) for j in range(n))


def test_reduction_rejects_wrong_shape():
    one = SkewRatFun.one(DOUBLE)
    with pytest.raises(ValueError):
        reduce_identity_plus_Nt([[one + one]])


# -- entrywise homomorphisms -------------------------------------------------------------


def test_rotation_embedding():
    rot = GaussianEmbedding.rotation()
    assert rot.image(gaussian("i")) == [[0, -1], [1, 0]]
    with pytest.raises(ValueError):
        GaussianEmbedding([[1, 0], [0, 1]])


@given(st.integers(0, 10_000), st.integers(1, 3))
def test_embedding_doubles_degree(seed, n):
    rng = random.Random(seed)
    A = [[random_laurent(rng, 1) for _ in range(n)] for _ in range(n)]
    big = apply_entrywise_hom(GaussianEmbedding.rotation(), A)
    d = det_degree(A)
    assert det_degree(big) == 2 * d
