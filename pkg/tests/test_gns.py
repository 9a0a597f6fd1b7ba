"""GNS construction: dimensions, cyclic state, Gelfand ideal, agreement with induction."""
import random

import pytest
from hypothesis import given, settings, strategies as st

from starmorita import linalg
from starmorita.algebra import (Functional, evaluation_functional, full_matrix_algebra, function_algebra,
                                matrix_algebra, trace_functional)
from starmorita.gns import NotPositive, cyclic_subrepresentation, gelfand_ideal, gns_construct, vector_state
from starmorita.modules import are_unitarily_equivalent, check_representation, is_nondegenerate
from starmorita.ring import Scalar
from starmorita.tensor import induced_from_functional

from factories import random_positive_functional

M2 = full_matrix_algebra(2)
F2 = function_algebra(2)


def is_faithful(rho):
    sp = linalg.Span(rho.module.quotient.dim ** 2)
    for a in range(rho.algebra.dim):
        sp.add([v for row in rho.quotient_action[a] for v in row])
    return sp.dim == rho.algebra.dim


def test_trace_on_m2():
    g = gns_construct(trace_functional(M2))
    assert g.dim == 4
    assert check_representation(g.representation).ok
    assert is_faithful(g.representation)
    assert is_nondegenerate(g.representation.module)
    assert vector_state(g.representation, g.cyclic_vector).values == trace_functional(M2).values


def test_point_evaluation_is_one_dimensional():
    omega = evaluation_functional(F2, 1)
    g = gns_construct(omega)
    assert g.dim == 1
    assert len(g.ideal_basis) == 1
    assert vector_state(g.representation, g.cyclic_vector).values == omega.values


def test_vector_state_on_m2_gives_column():
    omega = Functional(M2, [Scalar(1), Scalar(0), Scalar(0), Scalar(0)])
    g = gns_construct(omega)
    assert g.dim == 2
    assert len(gelfand_ideal(omega)) == 2


def test_non_positive_functional_refused():
    with pytest.raises(NotPositive):
        gns_construct(Functional(F2, [Scalar(1), Scalar(-1)]))


@settings(max_examples=12)
@given(st.integers(0, 10_000))
def test_random_states_reproduced(seed):
    rng = random.Random(seed)
    for alg in (M2, F2, matrix_algebra(F2, 2)):
        omega = random_positive_functional(alg, rng)
        g = gns_construct(omega)
        assert check_representation(g.representation).ok
        assert vector_state(g.representation, g.cyclic_vector).values == omega.values
        cyc = cyclic_subrepresentation(g.representation, g.cyclic_vector)
        assert cyc.module.quotient.dim == g.dim


@pytest.mark.parametrize("omega", [trace_functional(M2), evaluation_functional(F2, 0),
                                   Functional(M2, [Scalar(1), Scalar(0), Scalar(0), Scalar(0)])],
                         ids=["trace", "eval", "corner"])
def test_gns_agrees_with_induction(omega):
    g = gns_construct(omega).representation
    ind = induced_from_functional(omega)
    assert check_representation(ind).ok
    assert are_unitarily_equivalent(g, ind).verdict == "yes"
