"""Equivalence bimodules, composition, inverses, Picard groups, K0 and representation transfer."""
import pytest

from starmorita.algebra import full_matrix_algebra, function_algebra, parse_element, scalars
from starmorita.modules import (NO, YES, InnerProductModule, Representation, are_unitarily_equivalent,
                                canonical_module, check_intertwiner, check_representation,
                                identity_operator)
from starmorita.morita import (RING, STAR, STRONG, CertificationError, DegenerateRepresentation, K0Class,
                               LevelError, MiddleMismatch, NotProjective, arrows_isomorphic,
                               block_automorphism, certify, check_equivalence_bimodule, column_bimodule,
                               compose, forget, gram_grid_search, identity_arrow, identity_bimodule, inverse,
                               is_nondegenerate_representation, isotropy_action, k0_equal, k0h_action,
                               picard_group, rep_transfer, signature_bimodule, transport_intertwiner,
                               twisted_bimodule)

from factories import defining

C = scalars()
F2 = function_algebra(2)
M2 = full_matrix_algebra(2)


@pytest.mark.parametrize("alg", [C, F2, M2], ids=["c", "f2", "m2"])
def test_identity_is_strong(alg):
    assert check_equivalence_bimodule(identity_bimodule(alg), STRONG).ok


@pytest.mark.parametrize("alg", [C, F2], ids=["c", "f2"])
def test_column_is_strong_and_invertible(alg):
    E = certify(column_bimodule(alg, 2))
    assert E.source == alg
    loop = compose(inverse(E), E)
    assert arrows_isomorphic(loop, identity_arrow(alg)).verdict == YES


def test_swap_twist_is_nontrivial():
    swap = block_automorphism(F2, [1, 0], [[0], [0]])
    assert swap.is_star_automorphism()
    E = certify(twisted_bimodule(F2, swap))
    assert arrows_isomorphic(E, identity_arrow(F2)).verdict == NO
    assert arrows_isomorphic(compose(E, E), identity_arrow(F2)).verdict == YES


@pytest.mark.parametrize("alg,order", [(C, 1), (F2, 2), (M2, 1)], ids=["c", "f2", "m2"])
def test_picard_orders(alg, order):
    g = picard_group(alg)
    assert g.order == order
    assert g.complete


def test_signature_example_is_star_but_not_strong():
    E = signature_bimodule()
    assert check_equivalence_bimodule(E, RING).ok
    assert check_equivalence_bimodule(E, STAR).ok
    strong = check_equivalence_bimodule(E, STRONG)
    assert strong.verdict("right_completely_positive") == "fail"
    with pytest.raises(CertificationError):
        certify(E, STRONG)
    assert gram_grid_search(E) == []


def test_levels_only_weaken():
    E = identity_arrow(F2)
    assert forget(E, RING).level == RING
    with pytest.raises(LevelError):
        forget(forget(E, STAR), STRONG)
    assert compose(forget(E, STAR), E).level == STAR


def test_middle_algebras_must_agree():
    with pytest.raises(MiddleMismatch):
        compose(identity_arrow(F2), identity_arrow(C))


def test_k0_of_projection_module():
    E = certify(column_bimodule(C, 2))
    row = InnerProductModule(M2, [[parse_element(M2, "E11")]])
    image = k0h_action(K0Class(M2, [(row, 1)]), E)
    assert k0_equal(image, K0Class(C, [(canonical_module(C), 1)]))
    doubled = k0h_action(K0Class(M2, [(row, 1)]) + K0Class(M2, [(row, 1)]), E)
    assert k0_equal(doubled, K0Class(C, [(canonical_module(C), 2)]))


def test_non_projective_class_refused():
    E = certify(column_bimodule(C, 2))
    m = InnerProductModule(M2, [[parse_element(M2, "2*E11")]])
    with pytest.raises(NotProjective):
        k0h_action(K0Class(M2, [(m, 1)]), E)


def test_transfer_round_trip_on_defining():
    E = certify(column_bimodule(C, 2))
    einv = inverse(E)
    rho = defining(M2)
    there = rep_transfer(einv, rho).representation
    back = rep_transfer(E, there).representation
    assert check_representation(back).ok
    assert are_unitarily_equivalent(back, rho).verdict == YES


def test_intertwiners_transport():
    E = certify(column_bimodule(C, 2))
    rho = canonical_module(C)
    from starmorita.modules import trivial_representation
    r = trivial_representation(rho)
    t = rep_transfer(E, r)
    T = identity_operator(rho)
    S = transport_intertwiner(t, t, T)
    assert check_intertwiner(S, t.representation, t.representation).ok


def test_degenerate_representation_refused():
    m = canonical_module(C)
    zero_rep = Representation(C, m, [[[C.zero()]]])
    assert not is_nondegenerate_representation(zero_rep)
    with pytest.raises(DegenerateRepresentation):
        rep_transfer(identity_arrow(C), zero_rep)


def test_isotropy_transports_swap():
    from starmorita.algebra import matrix_algebra
    swap = certify(twisted_bimodule(F2, block_automorphism(F2, [1, 0], [[0], [0]])))
    g = certify(column_bimodule(F2, 2))
    moved = isotropy_action(g, swap)
    assert moved.source == matrix_algebra(F2, 2)
    assert arrows_isomorphic(moved, identity_arrow(matrix_algebra(F2, 2))).verdict == NO
