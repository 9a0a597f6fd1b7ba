"""Structure constants, involution, positivity decisions for matrix and function algebras."""
import dataclasses
import random

import pytest
from hypothesis import given, strategies as st

from starmorita.algebra import (AlgebraPresentation, Functional, UnsupportedAlgebra, block_matrix_psd,
                                check_star_algebra, evaluation_functional, format_element,
                                full_matrix_algebra, function_algebra, is_positive_functional,
                                matrix_algebra, matrix_element, matrix_entries, membership_app,
                                membership_aplus, parse_element, scalars, trace_functional)
from starmorita.modules import random_algebra_element
from starmorita.ring import Scalar

M2 = full_matrix_algebra(2)
F2 = function_algebra(2)
M2F2 = matrix_algebra(F2, 2)
DESK = [scalars(), F2, M2, full_matrix_algebra(3), M2F2]

seeds = st.integers(0, 10_000)


def naive_matmul(a, b):
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n)), Scalar(0)) for j in range(n)] for i in range(n)]


def naive_adjoint(a):
    return [[a[j][i].conj() for j in range(len(a))] for i in range(len(a))]


@pytest.mark.parametrize("alg", DESK, ids=lambda a: a.name or str(a.dim))
def test_desk_algebras_pass_axioms(alg):
    assert check_star_algebra(alg).ok


@pytest.mark.parametrize("alg", [M2, M2F2, F2], ids=["m2", "m2f2", "f2"])
@given(seed=seeds)
def test_embedding_is_star_homomorphism(alg, seed):
    rng = random.Random(seed)
    a, b = random_algebra_element(alg, rng), random_algebra_element(alg, rng)
    for blk_ab, blk_a, blk_b in zip(alg.embed(a * b), alg.embed(a), alg.embed(b)):
        assert blk_ab == naive_matmul(blk_a, blk_b)
    for blk_s, blk_a in zip(alg.embed(a.star()), alg.embed(a)):
        assert blk_s == naive_adjoint(blk_a)


@given(seed=seeds)
def test_star_is_antimultiplicative(seed):
    rng = random.Random(seed)
    for alg in (M2, M2F2):
        a, b = random_algebra_element(alg, rng), random_algebra_element(alg, rng)
        assert (a * b).star() == b.star() * a.star()
        assert a.star().star() == a
        assert a * alg.one() == a == alg.one() * a


def test_matrix_units():
    e12, e21, e11 = (parse_element(M2, s) for s in ("E12", "E21", "E11"))
    assert e12 * e21 == e11
    assert e12.star() == e21
    assert e12 * e12 == M2.zero()
    assert parse_element(M2, "2") == M2.one().scale(Scalar(2))


def test_literal_round_trip():
    rng = random.Random(3)
    for alg in (M2, F2, M2F2):
        for _ in range(20):
            x = random_algebra_element(alg, rng)
            assert parse_element(alg, format_element(x)) == x


def test_matrix_over_entries_round_trip():
    rng = random.Random(4)
    x = random_algebra_element(M2F2, rng)
    assert matrix_element(F2, M2F2, matrix_entries(F2, x, 2)) == x


def test_non_associative_table_is_rejected():
    z, o = 0, 1
    # aa = b, ab = ba = a, bb = 0
    structure = [[[z, o], [o, z]], [[o, z], [z, z]]]
    alg = AlgebraPresentation.from_dense(["a", "b"], structure, [[1, 0], [0, 1]], name="broken")
    rep = check_star_algebra(alg)
    assert not rep.ok
    assert rep.failures


def test_trace_is_faithful_positive():
    assert is_positive_functional(trace_functional(M2))
    assert is_positive_functional(evaluation_functional(F2, 0))


def test_non_positive_functional_has_witness():
    # omega(E11) = 1, omega(E22) = -1
    omega = Functional(M2, [Scalar(1), Scalar(0), Scalar(0), Scalar(-1)])
    v = is_positive_functional(omega)
    assert not v
    a = v.witness
    assert omega(a.star() * a).sign().value < 0


@given(seed=seeds)
def test_sums_of_squares_are_certified(seed):
    rng = random.Random(seed)
    for alg in (M2, F2, M2F2):
        a, b = random_algebra_element(alg, rng), random_algebra_element(alg, rng)
        h = a.star() * a + b.star() * b.scale(Scalar(3))
        cert = membership_app(h)
        assert cert.member is True
        assert cert.recombine() == h
        assert membership_aplus(h)


@given(seed=seeds)
def test_negative_elements_are_separated(seed):
    rng = random.Random(seed)
    for alg in (M2, M2F2):
        a = random_algebra_element(alg, rng)
        if a.is_zero():
            continue
        h = (a.star() * a).scale(Scalar(-1))
        cert = membership_app(h)
        assert cert.member is False
        (omega,) = cert.witnesses
        assert is_positive_functional(omega)
        assert omega(h).sign().value < 0


def test_function_algebra_positivity_is_pointwise():
    assert membership_aplus(parse_element(F2, "d1 + 2*d2"))
    v = membership_aplus(parse_element(F2, "d1 - d2"))
    assert not v and v.witness(parse_element(F2, "d1 - d2")).sign().value < 0


def test_non_hermitian_certificate():
    assert membership_app(parse_element(M2, "E12")).kind == "not_hermitian"


def test_sampled_wedge_on_generic_algebra():
    alg = dataclasses.replace(F2, kind="generic", blocks=None, embedding=None)
    with pytest.raises(UnsupportedAlgebra):
        membership_aplus(alg.one())
    omega = Functional(alg, [Scalar(1), Scalar(0)])
    assert is_positive_functional(omega)
    assert membership_aplus(alg.one(), mode=[omega])
    v = membership_aplus(parse_element(alg, "-d1 + d2"), mode=[omega])
    assert not v and v.mode == "sampled"


def test_block_matrix_positivity():
    e11, e12 = parse_element(M2, "E11"), parse_element(M2, "E12")
    ok, _ = block_matrix_psd(M2, [[e11, e12], [e12.star(), M2.one()]])
    assert ok
    ok, wit = block_matrix_psd(M2, [[e11, M2.one()], [M2.one(), e11]])
    assert not ok and wit is not None
