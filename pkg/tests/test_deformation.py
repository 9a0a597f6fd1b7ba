"""Star products, equivalences, formal positivity and lifts of functionals."""
import itertools
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from starmorita import deformation as dfm
from starmorita.deformation import (EquivalenceOperator, NotClassicallyPositive, PolyFunctional, PolyObservable,
                                    StarProduct, apply_equivalence, check_star_axioms, deform_functional,
                                    formal_positive, format_observable, gaussian_moments, moyal_star,
                                    parse_observable, point_evaluation, pointwise_product, poisson_bracket)
from starmorita.ring import Scalar

X, P, L = sympy.symbols("x p l")


def coeff_to_sympy(s):
    re = sum((sympy.Rational(int(c.numerator), int(c.denominator)) * L ** k for k, c in enumerate(s.re.coeffs)),
             sympy.Integer(0))
    im = sum((sympy.Rational(int(c.numerator), int(c.denominator)) * L ** k for k, c in enumerate(s.im.coeffs)),
             sympy.Integer(0))
    return re + sympy.I * im


def to_sympy(f):
    return sympy.expand(sum((coeff_to_sympy(c) * X ** e[0] * P ** e[1] for e, c in f.terms.items()),
                            sympy.Integer(0)))


def moyal_oracle(f, g, order):
    """Binomial form of the Moyal series, truncated at ``l^order``."""
    acc = sympy.Integer(0)
    for r in range(order + 1):
        term = sympy.Integer(0)
        for k in range(r + 1):
            df = sympy.diff(f, X, r - k, P, k) if r else f
            dg = sympy.diff(g, P, r - k, X, k) if r else g
            term += sympy.binomial(r, k) * (-1) ** k * df * dg
        acc += (sympy.I / 2) ** r / sympy.factorial(r) * L ** r * term
    return sympy.expand(acc)


@st.composite
def observables(draw, max_degree=3):
    terms = {}
    for e in dfm.monomials(2, max_degree):
        if draw(st.booleans()):
            terms[e] = Scalar(draw(st.integers(-3, 3)), draw(st.integers(-2, 2)), lam=True)
    return PolyObservable(1, terms)


@settings(max_examples=40)
@given(observables(), observables(), st.integers(0, 4))
def test_moyal_matches_oracle(f, g, order):
    ours = moyal_star(1, order)(f, g)
    assert sympy.expand(to_sympy(ours) - moyal_oracle(to_sympy(f), to_sympy(g), order)) == 0


@given(observables(), observables())
def test_first_cochain_is_half_bracket(f, g):
    s = moyal_star(1, 1)
    lhs = s.apply_cochain(1, f, g) - s.apply_cochain(1, g, f)
    assert lhs == poisson_bracket(f, g).scale(Scalar(0, 1, True))


@given(observables(), observables())
def test_hermitian_identity(f, g):
    s = moyal_star(1, 3)
    assert s(f, g).conj() == s(g.conj(), f.conj())


def test_moyal_canonical_commutator():
    s = moyal_star(1, 2)
    x, p = PolyObservable.variable(1, "x"), PolyObservable.variable(1, "p")
    comm = s(x, p) - s(p, x)
    assert comm == PolyObservable.constant(1, Scalar(0, 1, True) * dfm.LAMBDA)


@pytest.mark.parametrize("order", [0, 1, 2])
def test_axioms_two_degrees_of_freedom(order):
    assert check_star_axioms(moyal_star(2, order), 2).ok


def test_bad_product_fails():
    # full bracket at first order: C1 - C1 reversed = 2i{f,g}
    good = moyal_star(1, 1)
    bad = StarProduct(1, 1, [{k: v * 2 for k, v in good.cochain(1).items()}], "double")
    rep = check_star_axioms(bad, 3)
    assert rep.verdict("poisson") == "fail"
    assert rep.verdict("associative") == "pass"
    skew = StarProduct(1, 1, [{((1, 0), (0, 1)): Scalar(0, 1)}], "skew")
    rep = check_star_axioms(skew, 2)
    # i dx f dp g has the right bracket but breaks conj(f * g) = conj(g) * conj(f)
    assert rep.verdict("poisson") == "pass"
    assert rep.verdict("hermitian") == "fail"


@given(observables())
def test_literal_round_trip(f):
    assert parse_observable(format_observable(f), 1) == f


def test_equivalence_transports_products():
    S = EquivalenceOperator(1, 2, ({(1, 1): Fraction(1, 4)}, {(2, 0): 1}))
    s = moyal_star(1, 2)
    s2 = apply_equivalence(S, s)
    rng = random.Random(1)
    mons = [PolyObservable.monomial(1, e) for e in dfm.monomials(2, 3)]
    for _ in range(30):
        f, g = rng.choice(mons), rng.choice(mons)
        assert S(s(f, g)) == s2(S(f), S(g))
    assert S.compose(S.inverse()).symbol() == EquivalenceOperator.identity(1, 2).symbol()
    assert check_star_axioms(s2, 2).ok


def test_identity_equivalence_is_trivial():
    s = moyal_star(1, 2)
    assert apply_equivalence(EquivalenceOperator.identity(1, 2), s) == s


def test_constants_must_be_fixed():
    with pytest.raises(ValueError):
        EquivalenceOperator(1, 1, ({(0, 0): 1},))


def test_gaussian_is_formally_positive():
    s = moyal_star(1, 1)
    assert formal_positive(gaussian_moments(1), s, 2)


def test_delta_needs_a_correction():
    s = moyal_star(1, 1)
    v = formal_positive(point_evaluation(1), s, 1)
    assert not v
    assert v.value.coefficient(0) == 0 and v.value.coefficient(1).sign().value < 0
    lift = deform_functional(point_evaluation(1), s, test_degree=1)
    assert lift.found
    assert lift.corrections[0] != "zero"
    assert formal_positive(lift.functional, s, 1)
    assert lift.functional.at_zero() == point_evaluation(1).at_zero()


def test_negative_functional_refused():
    with pytest.raises(NotClassicallyPositive):
        deform_functional(PolyFunctional(1, {(0, 0): -1}), moyal_star(1, 1))


def test_budget_exhaustion_is_not_a_verdict():
    lift = deform_functional(point_evaluation(1), moyal_star(1, 1), test_degree=1, budget=1)
    assert not lift.found and lift.budget_exhausted


def test_pointwise_has_no_corrections():
    lift = deform_functional(gaussian_moments(1), pointwise_product(1), order=0)
    assert lift.found and lift.corrections == []
