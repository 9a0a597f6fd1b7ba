"""The ten acceptance criteria, each exact and under its own wall-clock limit.

Run alone with ``pytest -m acceptance``; the terminal summary prints one line per criterion.
"""
import itertools
import random
import time
from contextlib import contextmanager

import pytest

from starmorita import linalg
from starmorita.algebra import (evaluation_functional, full_matrix_algebra, function_algebra, matrix_algebra,
                                scalars, trace_functional)
from starmorita.deformation import (classical_limit, deform_algebra, deform_functional, deformed_column_bimodule,
                                    deformed_identity_arrow, check_star_axioms, formal_positive, gaussian_moments,
                                    moyal_star, poisson_bracket)
from starmorita.gns import gns_construct, vector_state
from starmorita.modules import (NO, YES, are_unitarily_equivalent, canonical_module, check_representation,
                                direct_sum_representation, is_completely_positive, trivial_representation)
from starmorita.morita import (STRONG, K0Class, arrows_isomorphic, block_automorphism, certify,
                               check_equivalence_bimodule, column_bimodule, compose, identity_arrow, inverse,
                               isotropy_action, k0_equal, k0h_action, rep_transfer, twisted_bimodule)
from starmorita.ring import Real, Scalar, Sign, is_positive
from starmorita.tensor import (EElement, TensorTerm, find_isometric_isomorphism, inner_from_phi, internal_tensor,
                               phi_from_inner)

from factories import defining, random_cp_module, random_positive_functional
from test_ring import poly_sign_oracle

C = scalars()
F2 = function_algebra(2)
M2 = full_matrix_algebra(2)
SEED = 20240601


@contextmanager
def within(request, limit):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    request.node.user_properties.append(("elapsed", elapsed))
    assert elapsed < limit, f"took {elapsed:.2f} s, limit {limit} s"


def random_real_poly(rng):
    deg = rng.randint(0, 6)
    # sparse low orders exercise the lowest-coefficient rule past leading zeros
    return [0 if rng.random() < 0.4 else rng.randint(-9, 9) for _ in range(deg + 1)]


@pytest.mark.acceptance(1, "ordered ring: trichotomy, closure, lowest-coefficient sign", 1)
def test_ordered_ring(request):
    rng = random.Random(SEED)
    polys = [random_real_poly(rng) for _ in range(1000)]
    with within(request, 1):
        zero = Real([], lam=True)
        positives = []
        for p in polys:
            x = Real(p, lam=True)
            assert [x > zero, x == zero, x < zero].count(True) == 1
            low = next((c for c in p if c), 0)
            assert is_positive(x).value == (low > 0) - (low < 0) == poly_sign_oracle(p)
            if is_positive(x) is Sign.POSITIVE:
                positives.append(x)
        assert len(positives) > 100
        for a, b in zip(positives, positives[1:]):
            assert is_positive(a + b) is Sign.POSITIVE
            assert is_positive(a * b) is Sign.POSITIVE


def random_observable(rng, degree=3):
    from starmorita.deformation import PolyObservable, monomials
    terms = {e: Scalar(rng.randint(-3, 3), rng.randint(-2, 2), lam=True)
             for e in monomials(2, degree) if rng.random() < 0.5}
    return PolyObservable(1, terms)


@pytest.mark.acceptance(2, "Moyal: associativity and Hermitian identity to order 4, first cochain", 30)
def test_moyal_battery(request):
    rng = random.Random(SEED)
    pairs = [(random_observable(rng), random_observable(rng)) for _ in range(200)]
    with within(request, 30):
        for order in range(5):
            rep = check_star_axioms(moyal_star(1, order), 4)
            assert rep.verdict("associative") == "pass", rep
            assert rep.verdict("hermitian") == "pass", rep
        s = moyal_star(1, 1)
        i = Scalar(0, 1, True)
        for f, g in pairs:
            assert s.apply_cochain(1, f, g) - s.apply_cochain(1, g, f) == poisson_bracket(f, g).scale(i)


def is_faithful(rho):
    sp = linalg.Span(rho.module.quotient.dim ** 2)
    for a in range(rho.algebra.dim):
        sp.add([v for row in rho.quotient_action[a] for v in row])
    return sp.dim == rho.algebra.dim


@pytest.mark.acceptance(3, "GNS of the trace on M2 and of a point evaluation", 1)
def test_gns(request):
    with within(request, 1):
        g = gns_construct(trace_functional(M2))
        assert g.dim == 4
        assert check_representation(g.representation).ok
        assert is_faithful(g.representation)
        state = vector_state(g.representation, g.cyclic_vector)
        for a in range(M2.dim):
            blk = M2.embed(M2.basis(a))[0]
            assert state(M2.basis(a)) == blk[0][0] + blk[1][1]
        assert gns_construct(evaluation_functional(F2, 0)).dim == 1
        assert gns_construct(evaluation_functional(F2, 1)).dim == 1


@pytest.mark.acceptance(4, "inner products and bimodule maps: round trip and symmetry", 5)
def test_phi_round_trip(request):
    rng = random.Random(SEED)
    modules = [random_cp_module(M2, rng, rng.randint(1, 3)) for _ in range(100)]
    one = M2.one()
    with within(request, 5):
        for m in modules:
            phi = phi_from_inner(m)
            assert inner_from_phi(phi).gram == m.gram
            for i, j in itertools.product(range(m.rank), repeat=2):
                z = EElement(m.rank, [TensorTerm(one, i, j, one)])
                assert phi(z.involution()) == phi(z).star()


@pytest.mark.acceptance(5, "internal tensor: conjugate column with column, positivity", 10)
def test_rieffel_tensor(request):
    rng = random.Random(SEED)
    pairs = [(random_cp_module(M2, rng, rng.randint(1, 2)), random_positive_functional(M2, rng))
             for _ in range(50)]
    with within(request, 10):
        col = certify(column_bimodule(C, 2))
        t = internal_tensor(inverse(col).bimodule.rep, col.bimodule.rep)
        assert t.result.quotient.dim == 1
        assert find_isometric_isomorphism(t.result, canonical_module(C)).verdict == YES
        for m, omega in pairs:
            E = gns_construct(omega).representation
            assert is_completely_positive(internal_tensor(trivial_representation(m), E).result)


@pytest.mark.acceptance(6, "column modules are strong and invertible", 30)
def test_morita_core(request):
    with within(request, 30):
        for alg, n in itertools.product([C, F2, M2], [1, 2, 3]):
            E = column_bimodule(alg, n)
            assert check_equivalence_bimodule(E, STRONG).ok, (alg.name, n)
            arrow = certify(E)
            r = arrows_isomorphic(compose(inverse(arrow), arrow), identity_arrow(alg))
            assert r.verdict == YES and r.witness is not None, (alg.name, n, r.reason)


def generated_arrows():
    swap = certify(twisted_bimodule(F2, block_automorphism(F2, [1, 0], [[0], [0]])))
    base = {"idC": identity_arrow(C), "idF2": identity_arrow(F2), "idM2": identity_arrow(M2), "swap": swap,
            "colC": certify(column_bimodule(C, 2)), "colF2": certify(column_bimodule(F2, 2)),
            "colM2": certify(column_bimodule(M2, 2))}
    for k in ["colC", "colF2", "colM2", "swap"]:
        base[k + "^-1"] = inverse(base[k])
    return base


@pytest.mark.acceptance(7, "groupoid laws on the generated arrow set", 120)
def test_groupoid_laws(request):
    with within(request, 120):
        arrows = generated_arrows()
        names = list(arrows)
        iso = lambda f, e: arrows_isomorphic(f, e, budget=64).verdict == YES  # noqa: E731
        for k, a in arrows.items():
            assert iso(compose(identity_arrow(a.target), a), a), k
            assert iso(compose(a, identity_arrow(a.source)), a), k
            b = inverse(a)
            assert iso(compose(b, a), identity_arrow(a.source)), k
            assert iso(compose(a, b), identity_arrow(a.target)), k
        pairs = {(x, y): compose(arrows[x], arrows[y])
                 for x, y in itertools.product(names, repeat=2) if arrows[x].source == arrows[y].target}
        triples = [(x, y, z) for (x, y) in pairs for z in names if arrows[y].source == arrows[z].target]
        assert len(triples) > 50
        for x, y, z in triples:
            assert iso(compose(pairs[(x, y)], arrows[z]), compose(arrows[x], pairs[(y, z)])), (x, y, z)


@pytest.mark.acceptance(8, "K0 action, representation transfer, isotropy action", 60)
def test_groupoid_actions(request):
    rng = random.Random(SEED)
    with within(request, 60):
        # K0: the projection module E11 M_n(A) goes to [A], additively
        for alg in [C, F2]:
            E = certify(column_bimodule(alg, 2))
            mn = E.target
            row = trivial_representation(inverse(E).bimodule.rep.module).module
            assert row.over == mn
            image = k0h_action(K0Class(mn, [(row, 1)]), E)
            assert k0_equal(image, K0Class(alg, [(canonical_module(alg), 1)]))
            doubled = k0h_action(K0Class(mn, [(row, 1)]) + K0Class(mn, [(row, 1)]), E)
            assert k0_equal(doubled, image + image)
            assert k0_equal(doubled, K0Class(alg, [(canonical_module(alg), 2)]))
        # transfer: M2 -> C -> M2 returns an equivalent representation
        E = certify(column_bimodule(C, 2))
        einv = inverse(E)
        battery = [defining(M2), gns_construct(trace_functional(M2)).representation]
        battery += [gns_construct(random_positive_functional(M2, rng)).representation for _ in range(3)]
        battery.append(direct_sum_representation(defining(M2), defining(M2)))
        for rho in battery:
            back = rep_transfer(E, rep_transfer(einv, rho).representation).representation
            assert check_representation(back).ok
            assert are_unitarily_equivalent(back, rho).verdict == YES, rho.name
        # isotropy: the swap on F2 moves to a nontrivial strong self-equivalence of M2(F2)
        swap = certify(twisted_bimodule(F2, block_automorphism(F2, [1, 0], [[0], [0]])))
        moved = isotropy_action(certify(column_bimodule(F2, 2)), swap)
        assert moved.level == STRONG and moved.source == moved.target == matrix_algebra(F2, 2)
        assert arrows_isomorphic(moved, identity_arrow(moved.source)).verdict == NO


@pytest.mark.acceptance(9, "classical limit commutes with composition", 30)
def test_classical_limit(request):
    with within(request, 30):
        dF, dM = deform_algebra(F2), deform_algebra(M2)
        idF, idM = deformed_identity_arrow(dF), deformed_identity_arrow(dM)
        colL = certify(deformed_column_bimodule(2))
        colF = certify(column_bimodule(dF.algebra, 2))
        idML = identity_arrow(matrix_algebra(scalars(True), 2))
        cases = [(idF, idF), (idM, idM), (idML, colL), (colL, inverse(colL)), (inverse(colL), colL),
                 (colF, idF), (inverse(colF), colF), (colF, inverse(colF))]
        for F, E in cases:
            lhs = classical_limit(compose(F, E))
            rhs = compose(classical_limit(F), classical_limit(E))
            assert arrows_isomorphic(lhs, rhs).verdict == YES


@pytest.mark.acceptance(10, "positive order-1 lift of the Gaussian functional", 60)
def test_deformed_positivity(request):
    with within(request, 60):
        s = moyal_star(1, 1)
        lift = deform_functional(gaussian_moments(1), s, test_degree=2, budget=64)
        assert lift.found, f"budget exhausted after {lift.tried} candidates"
        assert formal_positive(lift.functional, s, 2)
        assert lift.functional.at_zero() == gaussian_moments(1).at_zero()


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-m", "acceptance", "-q"]))
