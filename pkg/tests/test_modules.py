"""Inner product modules: sesquilinearity, complete positivity, radicals, adjoints, isometry search."""
import math
import random

import pytest
from hypothesis import given, strategies as st

from starmorita.algebra import full_matrix_algebra, function_algebra, parse_element, scalars
from starmorita.modules import (NO, UNKNOWN, YES, InnerProductModule, ModuleOperator, NotAdjointable,
                                Representation, adjoint, are_unitarily_equivalent, canonical_module,
                                check_intertwiner, check_representation, direct_sum_representation,
                                find_isometry, inner_product, is_adjoint_pair, is_completely_positive,
                                is_nondegenerate, is_unitary, module_from_gram, random_algebra_element,
                                random_element, two_squares)
from starmorita.ring import Scalar

from factories import defining

C = scalars()
M2 = full_matrix_algebra(2)
F2 = function_algebra(2)
seeds = st.integers(0, 10_000)


def conjugated(rho, u, uinv):
    """``u pi(a) u^-1`` on the same module, for scalar matrices ``u``."""
    n = rho.module.rank
    images = []
    for img in rho.images:
        mat = [[sum((u[r][k] * img[k][l].coords[0] * uinv[l][s] for k in range(n) for l in range(n)),
                    Scalar(0)) for s in range(n)] for r in range(n)]
        images.append([[C.element([v]) for v in row] for row in mat])
    return Representation(rho.algebra, rho.module, images, "conjugated")


@given(seeds)
def test_inner_product_axioms(seed):
    rng = random.Random(seed)
    for alg in (M2, F2):
        m = canonical_module(alg, 2)
        x, y, z = (random_element(m, rng) for _ in range(3))
        d = random_algebra_element(alg, rng)
        assert inner_product(x, y.right(d)) == inner_product(x, y) * d
        assert inner_product(x, y).star() == inner_product(y, x)
        assert inner_product(x, y + z) == inner_product(x, y) + inner_product(x, z)
        assert bool(is_completely_positive(m))


def test_indefinite_gram_is_not_completely_positive():
    m = module_from_gram(C, [[[1], [0]], [[0], [-1]]])
    v = is_completely_positive(m)
    assert not v and v.witness is not None


def test_corner_gram_has_radical():
    m = InnerProductModule(M2, [[parse_element(M2, "E11")]])
    assert is_completely_positive(m)
    v = is_nondegenerate(m)
    assert not v
    for r in v.radical_basis:
        assert all(inner_product(g, r).is_zero() for g in m.generators())
    assert m.quotient.dim == 2


@given(seeds)
def test_adjoint_on_free_modules(seed):
    rng = random.Random(seed)
    m = canonical_module(M2, 2)
    A = ModuleOperator(m, m, [[random_algebra_element(M2, rng) for _ in range(2)] for _ in range(2)])
    B = adjoint(A)
    assert is_adjoint_pair(A, B)


def test_non_adjointable_operator():
    m = module_from_gram(C, [[[1], [0]], [[0], [0]]])
    z, o = C.zero(), C.one()
    A = ModuleOperator(m, m, [[z, o], [z, z]])
    with pytest.raises(NotAdjointable):
        adjoint(A)


@pytest.mark.parametrize("n", range(1, 60))
def test_two_squares_against_brute_force(n):
    exists = any(math.isqrt(n - a * a) ** 2 == n - a * a for a in range(math.isqrt(n) + 1))
    c = two_squares(Scalar(n))
    assert (c is not None) == exists
    if c is not None:
        assert c * c.conj() == Scalar(n)


def test_scaled_rank_one_modules():
    base = canonical_module(C)
    two = module_from_gram(C, [[[2]]])
    three = module_from_gram(C, [[[3]]])
    r = find_isometry(base, two)
    assert r.verdict == YES and is_unitary(r.witness)
    assert find_isometry(base, three).verdict == NO


def test_defining_representation_and_conjugate():
    rho = defining(M2)
    assert check_representation(rho).ok
    u = [[Scalar(1), Scalar(0)], [Scalar(0), Scalar(0, 1)]]
    uinv = [[Scalar(1), Scalar(0)], [Scalar(0), Scalar(0, -1)]]
    rho2 = conjugated(rho, u, uinv)
    assert check_representation(rho2).ok
    r = are_unitarily_equivalent(rho, rho2)
    assert r.verdict == YES
    assert check_intertwiner(r.witness, rho, rho2).ok
    assert is_unitary(r.witness)


def test_inequivalent_dimensions():
    rho = defining(M2)
    big = direct_sum_representation(rho, rho)
    assert check_representation(big).ok
    assert are_unitarily_equivalent(rho, big).verdict == NO


def test_budget_caps_dimension():
    rho = defining(M2)
    assert are_unitarily_equivalent(rho, rho, budget=1).verdict == UNKNOWN
