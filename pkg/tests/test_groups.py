import random

import pytest
import sympy
from hypothesis import given, strategies as st

from agrarian.core_arith import LaurentPoly
from agrarian.groups import (
    GroupRingElement,
    NielsenMove,
    PresentationSyntaxError,
    Representation,
    SigmaQ,
    Word,
    abelianize,
    apply_nielsen_move,
    chain_complex,
    character_covector,
    fox_derivative,
    is_adapted,
    make_character,
    nielsen_adapt,
    parse_presentation,
    parse_word,
    smith_normal_form,
    transport_abelianization,
    transport_character,
    transport_representation,
)

from helpers import (
    FREE_BY_CYCLIC,
    RANK_TWO,
    TREFOIL,
    free_by_cyclic_family,
    random_nielsen,
    trefoil,
    trefoil_reps,
)

words = st.lists(st.tuples(st.integers(0, 2), st.sampled_from([1, -1])), max_size=8).map(Word)


def x(g):
    return GroupRingElement.of_word(Word.generator(g))


# -- words and parsing ----------------------------------------------------------------------------


def test_words_reduce_freely():
    w = Word([(0, 1), (1, 1), (1, -1), (0, -1), (2, 1)])
    assert w == Word.generator(2)
    assert Word.generator(0, 3).letters == ((0, 1),) * 3
    with pytest.raises(ValueError):
        Word([(0, 2)])


@given(words, words)
def test_word_group_laws(u, v):
    assert (u * v).inverse() == v.inverse() * u.inverse()
    assert u * u.inverse() == Word.identity()
    # substitution is a homomorphism
    images = [Word([(1, 1), (0, 1)]), Word.generator(2, -1), Word([(0, 1), (1, 1)])]
    assert (u * v).substitute(images) == u.substitute(images) * v.substitute(images)


def test_parse_trefoil_and_round_trip():
    p = trefoil()
    assert p.names == ("a", "b") and p.deficiency == 1
    assert parse_presentation(str(p)) == p
    q = parse_presentation("< x , y | x^3 y^-2 , 1 >")
    assert q.relators[0].letters == ((0, 1),) * 3 + ((1, -1),) * 2
    assert q.relators[1] == Word.identity()
    assert parse_presentation("<t | >").relators == ()
    assert parse_word("a b^-1", ("a", "b")) == Word([(0, 1), (1, -1)])


@pytest.mark.parametrize(
    "text, pos",
    [("<a,b | a c>", 9), ("a,b | a>", 0), ("<a,a | a>", 3), ("<a | a", 6), ("<a | a> junk", 8), ("<a | a + a>", 7)],
)
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(PresentationSyntaxError) as err:
        parse_presentation(text)
    assert err.value.position == pos


# -- Smith form and abelianization ------------------------------------------------------------------


def _det(M):
    return int(sympy.Matrix(M).det()) if M else 1


@given(st.integers(0, 10_000))
def test_smith_normal_form(seed):
    rng = random.Random(seed)
    m, n = rng.randint(1, 4), rng.randint(1, 4)
    A = [[rng.randint(-4, 4) for _ in range(n)] for _ in range(m)]
    D, U, V = smith_normal_form(A)
    assert sympy.Matrix(U) * sympy.Matrix(A) * sympy.Matrix(V) == sympy.Matrix(D)
    assert abs(_det(U)) == 1 and abs(_det(V)) == 1
    diag = [D[i][i] for i in range(min(m, n))]
    assert all(D[i][j] == 0 for i in range(m) for j in range(n) if i != j)
    assert all(d >= 0 for d in diag)
    for a, b in zip(diag, diag[1:]):
        assert (b == 0) if a == 0 else b % a == 0
    # invariant factors agree with sympy
    from sympy.matrices.normalforms import smith_normal_form as sympy_snf

    ref = sympy_snf(sympy.Matrix(A), domain=sympy.ZZ)
    assert sorted(abs(int(ref[i, i])) for i in range(min(m, n))) == sorted(diag)


def test_abelianizations():
    assert abelianize(trefoil()).rank == 1
    z2 = abelianize(parse_presentation("<x,y | x y x^-1 y^-1>"))
    assert z2.rank == 2 and z2.torsion == ()
    c3 = abelianize(parse_presentation("<a | a^3>"))
    assert c3.rank == 0 and c3.torsion == (3,)
    mixed = abelianize(parse_presentation("<a,b | a^2 b^2>"))
    assert mixed.rank == 1 and mixed.torsion == (2,)
    assert abelianize(parse_presentation(RANK_TWO)).rank == 2
    assert abelianize(parse_presentation(FREE_BY_CYCLIC)).rank == 1


def test_characters():
    p = trefoil()
    q = abelianize(p)
    phi = make_character(p, [1, 1])
    assert phi.primitive and character_covector(phi, q) in {(1,), (-1,)}
    assert make_character(p, [2, 2]).divisibility == 2
    with pytest.raises(ValueError):
        make_character(p, [1, 0])
    with pytest.raises(ValueError):
        make_character(p, [1])


# -- representations --------------------------------------------------------------------------------


def test_representations_are_validated():
    p = trefoil()
    for sigma in trefoil_reps().values():
        for rel in p.relators:
            assert sigma.of_word(rel) == Representation.trivial(p, sigma.dim).of_word(Word())
    with pytest.raises(ValueError):
        Representation(p, [[[1, 1], [0, 1]], [[2, 0], [0, 1]]])
    with pytest.raises(ValueError):
        Representation(p, [[[0, 0], [0, 0]], [[1, 0], [0, 1]]])
    with pytest.raises(ValueError):
        Representation(p, [[[1]]])


# -- Fox calculus -------------------------------------------------------------------------------------


@given(words)
def test_fundamental_formula(w):
    one = GroupRingElement.one()
    ww = GroupRingElement.of_word(w)
    left = sum((fox_derivative(w, g) * (x(g) - one) for g in range(3)), GroupRingElement.zero())
    right = sum(((x(g) - one) * fox_derivative(w, g, side="right") for g in range(3)), GroupRingElement.zero())
    assert left == ww - one
    assert right == ww - one


@given(words, words)
def test_fox_product_rules(u, v):
    U, V = GroupRingElement.of_word(u), GroupRingElement.of_word(v)
    for g in range(3):
        assert fox_derivative(u * v, g) == fox_derivative(u, g) + U * fox_derivative(v, g)
        assert fox_derivative(u * v, g, "right") == fox_derivative(u, g, "right") * V + fox_derivative(v, g, "right")


def test_fox_derivative_examples():
    a = Word.generator(0)
    assert fox_derivative(a.inverse(), 0) == -GroupRingElement.of_word(a.inverse())
    with pytest.raises(ValueError):
        fox_derivative(a, 0, side="middle")
    with pytest.raises(KeyError):
        fox_derivative(a, 3, ngens=2)


def _mat_mul(A, B):
    zero = LaurentPoly.zero(A[0][0].rank)
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), zero) for j in range(len(B[0]))] for i in range(len(A))]


@pytest.mark.parametrize("name", ["trivial", "sign", "sl2", "dim3", "i_unit"])
def test_boundaries_compose_to_zero_after_evaluation(name):
    p = trefoil()
    C = chain_complex(p)
    ev = SigmaQ(trefoil_reps()[name], abelianize(p))
    d1, d2 = ev.matrix(C.boundaries[1]), ev.matrix(C.boundaries[2])
    assert all(not e.terms for row in _mat_mul(d1, d2) for e in row)


def test_chain_complex_shape():
    C = chain_complex(parse_presentation(RANK_TWO), require_deficiency_one=True)
    assert list(C.ranks) == [1, 3, 2]
    with pytest.raises(ValueError):
        chain_complex(parse_presentation("<a,b | a, b>"), require_deficiency_one=True)


# -- Nielsen moves ---------------------------------------------------------------------------------------


def test_nielsen_move_rejects_self_product():
    with pytest.raises(ValueError):
        apply_nielsen_move(trefoil(), NielsenMove("mul", 0, 0))


@given(st.integers(0, 10_000))
def test_transport_is_consistent(seed):
    rng = random.Random(seed)
    p, sigma, _ = free_by_cyclic_family(rng, rng.randint(1, 3), rng.randint(1, 2))
    q = abelianize(p)
    phi = make_character(p, [0] * (p.ngens - 1) + [1])
    new, moves = random_nielsen(rng, p, 3)
    # transported data must satisfy the new relators (validated on construction)
    sigma2 = transport_representation(sigma, moves, new)
    phi2 = make_character(new, list(transport_character(phi, moves).values))
    q2 = transport_abelianization(q, moves)
    assert all(not any(q2.of_word(r)) for r in new.relators)
    assert sigma2.dim == sigma.dim and phi2.primitive


@given(st.integers(0, 10_000))
def test_nielsen_adapt_postcondition(seed):
    rng = random.Random(seed)
    p = parse_presentation(rng.choice([TREFOIL, FREE_BY_CYCLIC, RANK_TWO, "<a,b | >", "<a,b,c | a b a^-1 b^-1>"]))
    q = abelianize(p)
    while True:
        vals = [rng.randint(-2, 2) for _ in range(p.ngens)]
        try:
            phi = make_character(p, vals)
        except ValueError:
            continue
        if phi.primitive:
            break
    ad = nielsen_adapt(p, phi, q)
    ok, gen, basis = is_adapted(ad.abelianization, ad.character)
    assert ok and gen == ad.phi_generator and basis == ad.basis_generators
    assert ad.character.values[ad.phi_generator] == 1
    # the adapted presentation is the old one rewritten by the recorded moves
    replay = p
    for mv in ad.moves:
        replay = apply_nielsen_move(replay, mv)
    assert replay == ad.presentation
    assert abelianize(ad.presentation).rank == q.rank


def test_nielsen_adapt_rejects_non_primitive():
    p = parse_presentation("<a,b | >")
    with pytest.raises(ValueError):
        nielsen_adapt(p, make_character(p, [2, 4]))
