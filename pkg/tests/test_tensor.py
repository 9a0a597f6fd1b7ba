"""Module data as bimodule maps, and the internal tensor product."""
import random

import pytest
from hypothesis import given, settings, strategies as st

from starmorita.algebra import full_matrix_algebra, function_algebra, parse_element, scalars
from starmorita.gns import gns_construct
from starmorita.modules import (YES, InnerProductModule, canonical_module, check_representation,
                                inner_product, is_completely_positive, random_element, trivial_representation)
from starmorita.tensor import (EElement, InvalidPhi, PhiMap, balancing_relations, find_isometric_isomorphism,
                               inner_from_phi, internal_tensor, phi_from_inner, phi_positive_on, rieffel_inner)

from factories import defining, random_cp_module, random_positive_functional

C = scalars()
M2 = full_matrix_algebra(2)
F2 = function_algebra(2)
seeds = st.integers(0, 10_000)


def row_module():
    """The conjugate of the column module: ``E11 M_2`` with its ``M_2``-valued product."""
    return InnerProductModule(M2, [[parse_element(M2, "E11")]], "row")


@given(seeds, st.integers(1, 3))
def test_phi_round_trip(seed, rank):
    m = random_cp_module(M2, random.Random(seed), rank)
    assert inner_from_phi(phi_from_inner(m)).gram == m.gram


@given(seeds)
def test_phi_symmetry_and_values(seed):
    rng = random.Random(seed)
    m = random_cp_module(M2, rng, 2)
    phi = phi_from_inner(m)
    x, y = random_element(m, rng), random_element(m, rng)
    z = EElement.pure(x, y)
    assert phi(z) == inner_product(x, y)
    assert phi(z).star() == phi(z.involution())
    d, d2 = (M2.basis(rng.randrange(4)) for _ in range(2))
    assert phi(z.bimodule(d, d2)) == d * phi(z) * d2
    assert phi_positive_on(phi, m, [x, y])


def test_non_hermitian_data_rejected():
    e12 = parse_element(M2, "E12")
    with pytest.raises(InvalidPhi):
        PhiMap(M2, [[e12]])


def test_row_times_column_is_scalars():
    t = internal_tensor(trivial_representation(row_module()), defining(M2))
    assert t.result.quotient.dim == 1
    r = find_isometric_isomorphism(t.result, canonical_module(C))
    assert r.verdict == YES


def test_column_times_row_is_matrix_algebra():
    # C^2 (x)_C row: the (M2, M2) bimodule M2 with the M2-valued product x^* y
    col = defining(M2)
    row = trivial_representation(row_module())
    t = internal_tensor(col, row)
    assert check_representation(t.representation).ok
    r = find_isometric_isomorphism(t.result, canonical_module(M2))
    assert r.verdict == YES


def test_balancing_relations_vanish():
    F = trivial_representation(row_module())
    t = internal_tensor(F, defining(M2))
    rels = balancing_relations(t)
    assert rels
    assert all(t.full.in_radical(r) for r in rels)


@settings(max_examples=50)
@given(seeds)
def test_tensor_positivity_and_inner_product(seed):
    rng = random.Random(seed)
    F = trivial_representation(random_cp_module(M2, rng, rng.randint(1, 2)))
    E = gns_construct(random_positive_functional(M2, rng)).representation
    t = internal_tensor(F, E)
    assert is_completely_positive(t.result)
    x1, x2 = random_element(F.module, rng), random_element(F.module, rng)
    y1, y2 = random_element(E.module, rng), random_element(E.module, rng)
    lhs = inner_product(t.element(x1, y1), t.element(x2, y2))
    assert lhs == rieffel_inner(t, x1, y1, x2, y2)


def test_tensor_over_functions_is_pointwise():
    # (functions on 2 points) acting on themselves, tensored with evaluation at the first point
    from starmorita.algebra import evaluation_functional
    F = trivial_representation(canonical_module(F2))
    E = gns_construct(evaluation_functional(F2, 0)).representation
    t = internal_tensor(F, E)
    assert t.result.quotient.dim == 1
