"""Exact linear algebra: PSD decisions against a principal-minor oracle, solvers, spans."""
import itertools
from fractions import Fraction

from hypothesis import given, strategies as st

from starmorita import linalg
from starmorita.ring import LAMBDA, Scalar

small = st.integers(min_value=-3, max_value=3)


def cdet(m):
    """Determinant over Q(i) with entries as (re, im) Fraction pairs, by cofactors."""
    n = len(m)
    if n == 0:
        return (Fraction(1), Fraction(0))
    re, im = Fraction(0), Fraction(0)
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        dr, di = cdet(minor)
        ar, ai = m[0][j]
        pr, pi = ar * dr - ai * di, ar * di + ai * dr
        sgn = -1 if j % 2 else 1
        re += sgn * pr
        im += sgn * pi
    return re, im


def psd_oracle(m):
    """Every principal minor of a Hermitian matrix is nonnegative iff it is PSD."""
    n = len(m)
    for k in range(1, n + 1):
        for S in itertools.combinations(range(n), k):
            sub = [[m[i][j] for j in S] for i in S]
            if cdet(sub)[0] < 0:
                return False
    return True


@st.composite
def hermitian(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    m = [[None] * n for _ in range(n)]
    for i in range(n):
        m[i][i] = (Fraction(draw(small)), Fraction(0))
        for j in range(i + 1, n):
            a, b = Fraction(draw(small)), Fraction(draw(small))
            m[i][j] = (a, b)
            m[j][i] = (a, -b)
    return m


@st.composite
def gram_like(draw, max_n=4):
    """``B^* B`` for a random integer B, often singular, so PSD cases are common."""
    n = draw(st.integers(1, max_n))
    r = draw(st.integers(1, n))
    b = [[(draw(small), draw(small)) for _ in range(n)] for _ in range(r)]
    m = []
    for i in range(n):
        row = []
        for j in range(n):
            re = sum(b[k][i][0] * b[k][j][0] + b[k][i][1] * b[k][j][1] for k in range(r))
            im = sum(b[k][i][0] * b[k][j][1] - b[k][i][1] * b[k][j][0] for k in range(r))
            row.append((Fraction(re), Fraction(im)))
        m.append(row)
    return m


def to_scalars(m):
    return [[Scalar(a, b) for a, b in row] for row in m]


@given(st.one_of(hermitian(), gram_like()))
def test_psd_decision_matches_minors(m):
    ok, x = linalg.hermitian_psd(to_scalars(m))
    assert ok == psd_oracle(m)
    if not ok:
        v = linalg.quadratic_form(to_scalars(m), x)
        assert v.is_real() and v.sign().value < 0


@given(gram_like())
def test_ldl_recombines(m):
    h = to_scalars(m)
    cert = linalg.ldl_certificate(h)
    assert cert is not None
    n = len(h)
    acc = linalg.zeros(n, n)
    for d, w in cert:
        assert d.is_strictly_positive()
        for i in range(n):
            for j in range(n):
                acc[i][j] = acc[i][j] + d * w[i] * w[j].conj()
    assert acc == h


def test_non_hermitian_witness_is_not_real():
    h = [[Scalar(1), Scalar(1)], [Scalar(0), Scalar(1)]]
    ok, x = linalg.hermitian_psd(h)
    assert not ok
    assert not linalg.quadratic_form(h, x).is_real()


def test_lambda_matrices_are_ordered():
    l = LAMBDA
    one = Scalar.one(True)
    assert linalg.hermitian_psd([[l, 0 * l], [0 * l, l * l]])[0]
    ok, x = linalg.hermitian_psd([[l, one], [one, l]])
    assert not ok
    assert linalg.quadratic_form([[l, one], [one, l]], x).sign().value < 0
    # infinitesimal off-diagonal entry against unit diagonal
    assert linalg.hermitian_psd([[one, l], [l, one]])[0]


@st.composite
def integer_system(draw):
    n = draw(st.integers(1, 4))
    m = draw(st.integers(1, 4))
    a = [[Scalar(draw(small), draw(small)) for _ in range(n)] for _ in range(m)]
    return a, n


@given(integer_system())
def test_nullspace_is_kernel_of_right_size(sys):
    a, n = sys
    ker = linalg.nullspace(a, n)
    for v in ker:
        assert all(x == 0 for x in linalg.matvec(a, v))
    assert len(ker) + linalg.rank(a) == n


@given(integer_system(), st.lists(small, min_size=4, max_size=4))
def test_solve_consistent_systems(sys, xs):
    a, n = sys
    x0 = [Scalar(v) for v in xs[:n]]
    b = linalg.matvec(a, x0)
    x = linalg.solve(a, b)
    assert x is not None and linalg.matvec(a, x) == b
    many = linalg.solve_many(a, [b, b])
    assert all(linalg.matvec(a, y) == b for y in many)


def test_solve_detects_inconsistency():
    a = [[Scalar(1), Scalar(1)], [Scalar(2), Scalar(2)]]
    assert linalg.solve(a, [Scalar(1), Scalar(3)]) is None


@given(st.lists(st.lists(small, min_size=3, max_size=3), max_size=5))
def test_span_dimension_is_rank(rows):
    vs = [[Scalar(v) for v in r] for r in rows]
    sp = linalg.Span(3)
    for v in vs:
        sp.add(v)
    assert sp.dim == (linalg.rank(vs) if vs else 0)
    for v in vs:
        assert sp.contains(v)
