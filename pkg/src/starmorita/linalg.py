"""Exact linear algebra over C = Q(i) or Q(i)[l].

Matrices are lists of rows of :class:`~starmorita.ring.Scalar`.  Over Q(i)
every nonzero pivot is a unit and elimination is the usual Gauss-Jordan.
Over Q(i)[l] unit pivots are still preferred; when a column has none the
elimination falls back to cross-multiplication followed by removal of the
row content, so every entry stays a polynomial.
"""
from __future__ import annotations

from typing import Sequence

from .ring import Scalar, gcd

Matrix = list  # list[list[Scalar]]


def zeros(n: int, m: int, lam: bool = False) -> Matrix:
    z = Scalar.zero(lam)
    return [[z] * m for _ in range(n)]


def identity(n: int, lam: bool = False) -> Matrix:
    z, o = Scalar.zero(lam), Scalar.one(lam)
    return [[o if i == j else z for j in range(n)] for i in range(n)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a:
        return []
    m = len(b[0]) if b else 0
    z = a[0][0] * 0 if a[0] else None
    out = []
    for row in a:
        acc = [z] * m
        for k, x in enumerate(row):
            if x:
                bk = b[k]
                for j in range(m):
                    y = bk[j]
                    if y:
                        acc[j] = acc[j] + x * y
        out.append(acc)
    return out


def matvec(a: Matrix, v: Sequence[Scalar]) -> list:
    out = []
    for row in a:
        acc = v[0] * 0 if v else None
        for x, y in zip(row, v):
            if x and y:
                acc = acc + x * y
        out.append(acc)
    return out


def adjoint(a: Matrix) -> Matrix:
    """Conjugate transpose."""
    if not a:
        return []
    return [[a[i][j].conj() for i in range(len(a))] for j in range(len(a[0]))]


def is_hermitian(a: Matrix) -> bool:
    n = len(a)
    return all(a[i][j] == a[j][i].conj() for i in range(n) for j in range(i, n))


def vdot(x: Sequence[Scalar], y: Sequence[Scalar]) -> Scalar:
    """``x^* y``."""
    acc = x[0] * 0
    for a, b in zip(x, y):
        if a and b:
            acc = acc + a.conj() * b
    return acc


def quadratic_form(h: Matrix, x: Sequence[Scalar]) -> Scalar:
    return vdot(x, matvec(h, x))


def _content_reduce(row: list) -> list:
    """Divide a lambda-polynomial row by the gcd of its entries."""
    g = None
    for v in row:
        if v:
            g = v if g is None else gcd(g, v)
            if g.is_unit():
                return row
    if g is None or g.is_unit():
        return row
    return [v.exquo(g) if v else v for v in row]


def rref(rows: Matrix, ncols: int | None = None, pivot_limit: int | None = None):
    """Gauss-Jordan form.

    Returns ``(rows, pivots)`` where ``rows`` are the nonzero reduced rows and
    ``pivots[i]`` is the pivot column of row ``i``.  Unit pivots are scaled to
    one; other pivot values stay in place (lambda-polynomial case only).
    With ``pivot_limit`` only the first columns are eligible as pivots and all
    rows are returned, the pivot rows first.
    """
    m = [list(r) for r in rows]
    if not m:
        return [], []
    n = len(m[0]) if ncols is None else ncols
    if pivot_limit is not None:
        n = min(n, pivot_limit)
    pivots: list[int] = []
    prow = 0
    for c in range(n):
        if prow >= len(m):
            break
        best = None
        for r in range(prow, len(m)):
            v = m[r][c]
            if v:
                if v.is_unit():
                    best = r
                    break
                if best is None or v.degree() < m[best][c].degree():
                    best = r
        if best is None:
            continue
        m[prow], m[best] = m[best], m[prow]
        p = m[prow][c]
        if p.is_unit():
            inv = p.inverse()
            m[prow] = [v * inv if v else v for v in m[prow]]
            prow_vals = m[prow]
            for r in range(len(m)):
                if r != prow:
                    f = m[r][c]
                    if f:
                        m[r] = [a - f * b if b else a for a, b in zip(m[r], prow_vals)]
        else:
            m[prow] = _content_reduce(m[prow])
            prow_vals = m[prow]
            p = prow_vals[c]
            for r in range(len(m)):
                if r != prow:
                    f = m[r][c]
                    if f:
                        m[r] = _content_reduce(
                            [p * a - f * b for a, b in zip(m[r], prow_vals)]
                        )
        pivots.append(c)
        prow += 1
    if pivot_limit is not None:
        return m, pivots
    return m[: len(pivots)], pivots


def rank(rows: Matrix) -> int:
    return len(rref(rows)[1])


def nullspace(a: Matrix, ncols: int) -> list:
    """Basis of ``{x : a x = 0}`` with polynomial entries (content removed)."""
    if not a:
        lam = False
        return [[Scalar.one(lam) if i == j else Scalar.zero(lam) for j in range(ncols)] for i in range(ncols)]
    lam = next((v.lam for row in a for v in row), False)
    red, piv = rref(a, ncols)
    zero, one = Scalar.zero(lam), Scalar.one(lam)
    pivset = set(piv)
    lcm = one
    for i, c in enumerate(piv):
        p = red[i][c]
        if not p.is_unit():
            lcm = (lcm * p).exquo(gcd(lcm, p))
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [zero] * ncols
        v[f] = lcm
        for i, c in enumerate(piv):
            e = red[i][f]
            if e:
                v[c] = -(lcm * e).exquo(red[i][c])
        basis.append(_content_reduce(v) if lam else v)
    return basis


def solve(a: Matrix, b: Sequence[Scalar]):
    """One solution of ``a x = b`` over the scalar ring, or ``None``."""
    if not a:
        return []
    n = len(a[0])
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    red, piv = rref(aug, n + 1)
    if piv and piv[-1] == n:
        return None
    lam = b[0].lam if b else a[0][0].lam
    x = [Scalar.zero(lam)] * n
    for i, c in enumerate(piv):
        try:
            x[c] = red[i][n].exquo(red[i][c])
        except ArithmeticError:
            return None
    return x


def solve_many(a: Matrix, bs: Sequence[Sequence[Scalar]]):
    """Solutions of ``a x = b`` for every right-hand side (``None`` where inconsistent)."""
    if not bs:
        return []
    n = len(a[0]) if a else 0
    m = len(bs)
    aug = [list(row) + [b[r] for b in bs] for r, row in enumerate(a)]
    red, piv = rref(aug, n + m, pivot_limit=n)
    rk = len(piv)
    lam = bs[0][0].lam if bs[0] else False
    rest = red[rk:]
    out = []
    for j in range(m):
        if any(row[n + j] for row in rest):
            out.append(None)
            continue
        x = [Scalar.zero(lam)] * n
        try:
            for i, c in enumerate(piv):
                x[c] = red[i][n + j].exquo(red[i][c])
        except ArithmeticError:
            out.append(None)
            continue
        out.append(x)
    return out


class Span:
    """Incrementally maintained row space for membership and rank queries."""

    def __init__(self, ncols: int, lam: bool = False):
        self.ncols = ncols
        self.lam = lam
        self.rows: list = []
        self.pivots: list = []

    @property
    def dim(self) -> int:
        return len(self.rows)

    def reduce(self, v: Sequence[Scalar]) -> list:
        v = list(v)
        for row, c in zip(self.rows, self.pivots):
            f = v[c]
            if f:
                p = row[c]
                if p.is_unit():
                    f = f * p.inverse()
                    v = [a - f * r if r else a for a, r in zip(v, row)]
                else:
                    v = [p * a - f * r for a, r in zip(v, row)]
        return v

    def add(self, v: Sequence[Scalar]) -> bool:
        """Insert ``v``; return True if it enlarged the span."""
        w = self.reduce(v)
        c = next((k for k, x in enumerate(w) if x), None)
        if c is None:
            return False
        if w[c].is_unit():
            inv = w[c].inverse()
            w = [x * inv if x else x for x in w]
        elif self.lam:
            w = _content_reduce(w)
        for i, row in enumerate(self.rows):
            f = row[c]
            if f:
                if w[c].is_unit():
                    self.rows[i] = [a - f * b if b else a for a, b in zip(row, w)]
                else:
                    self.rows[i] = [w[c] * a - f * b for a, b in zip(row, w)]
        self.rows.append(w)
        self.pivots.append(c)
        return True

    def contains(self, v: Sequence[Scalar]) -> bool:
        return not any(self.reduce(v))


class FlatSpan:
    """Span tracked over the fraction field and, for lambda vectors, also at ``l = 0``.

    ``full`` means the vectors span over the formal power series ring: by
    Nakayama that is spanning at ``l = 0``, which generic rank alone misses.
    """

    def __init__(self, ncols: int, lam: bool = False):
        self.ncols = ncols
        self.generic = Span(ncols, lam)
        self.limit = Span(ncols, False) if lam else None

    def add(self, v: Sequence[Scalar]) -> bool:
        grew = self.generic.add(v)
        if self.limit is not None:
            grew = self.limit.add([x.at_zero() for x in v]) or grew
        return grew

    @property
    def full(self) -> bool:
        if self.generic.dim < self.ncols:
            return False
        return self.limit is None or self.limit.dim == self.ncols


# -- Hermitian forms ------------------------------------------------------------

def _schur_vector(h: Matrix, kept: list, j: int) -> list:
    """``D e_j - adj(H_KK) H_Kj`` up to a common factor: orthogonal to the kept block."""
    n = len(h)
    lam = h[0][0].lam
    zero = Scalar.zero(lam)
    x = [zero] * n
    if not kept:
        x[j] = Scalar.one(lam)
        return x
    sub = [[h[r][c] for c in kept] for r in kept]
    rhs = [h[r][j] for r in kept]
    aug = [row + [v] for row, v in zip(sub, rhs)]
    red, piv = rref(aug, len(kept) + 1)
    den = Scalar.one(lam)
    for i, c in enumerate(piv):
        p = red[i][c]
        if not p.is_unit():
            den = (den * p).exquo(gcd(den, p))
    x[j] = den
    for i, c in enumerate(piv):
        x[kept[c]] = -(den * red[i][len(kept)]).exquo(red[i][c])
    return x


def hermitian_psd(h: Matrix):
    """Decide whether the Hermitian matrix ``h`` is positive semidefinite.

    Returns ``(True, None)`` or ``(False, x)`` with ``x^* h x < 0`` (or, for a
    non-Hermitian input, ``x^* h x`` not real).  Uses symmetric Bareiss
    elimination, so each pivot is a ratio of principal minors and all
    divisions are exact.
    """
    n = len(h)
    if n == 0:
        return True, None
    lam = h[0][0].lam
    bad = _non_hermitian_witness(h)
    if bad is not None:
        return False, bad
    m = [list(r) for r in h]
    prev = Scalar.one(lam)
    kept: list[int] = []
    active = list(range(n))
    while active:
        k = active.pop(0)
        d = m[k][k]
        s = d.sign()
        if s.value < 0:
            x = _schur_vector(h, kept, k)
            return False, _checked(h, x)
        if s.value == 0:
            j = next((j for j in active if m[k][j]), None)
            if j is None:
                continue
            wk = _schur_vector(h, kept, k)
            wj = _schur_vector(h, kept, j)
            hkj = quadratic_cross(h, wk, wj)
            hjj = quadratic_form(h, wj)
            nh = Scalar._raw(hkj.norm().coeffs, (), lam)
            if hjj.is_nonnegative() and hjj:
                u, v = nh, hjj
            else:
                u, v = Scalar.one(lam), Scalar.one(lam)
            x = [-(v * hkj) * a + u * b for a, b in zip(wk, wj)]
            return False, _checked(h, x)
        for j in active:
            mjk = m[j][k]
            row = m[j]
            for l in active:
                row[l] = (d * row[l] - mjk * m[k][l]).exquo(prev)
        prev = d
        kept.append(k)
    return True, None


def quadratic_cross(h: Matrix, x, y) -> Scalar:
    return vdot(x, matvec(h, y))


def _checked(h: Matrix, x: list) -> list:
    val = quadratic_form(h, x)
    assert not val.is_nonnegative(), "internal error: PSD witness is not negative"
    return x


def _non_hermitian_witness(h: Matrix):
    n = len(h)
    lam = h[0][0].lam
    zero, one = Scalar.zero(lam), Scalar.one(lam)
    i_ = Scalar._raw((), (one._re[0],), lam)
    for a in range(n):
        if not h[a][a].is_real():
            x = [zero] * n
            x[a] = one
            return x
        for b in range(a + 1, n):
            if h[a][b] != h[b][a].conj():
                for t in (one, i_):
                    x = [zero] * n
                    x[a] = one
                    x[b] = t
                    if not quadratic_form(h, x).is_real():
                        return x
    return None


def ldl_certificate(h: Matrix):
    """Write a PSD Hermitian ``h`` as ``sum d_k w_k w_k^*`` with ``d_k > 0``.

    Returns the list of ``(d_k, w_k)`` or ``None`` when a pivot is not a unit
    (lambda-polynomial matrices whose decomposition needs denominators) or the
    matrix is not PSD.
    """
    n = len(h)
    m = [list(r) for r in h]
    out = []
    for k in range(n):
        d = m[k][k]
        if not d:
            if any(m[k][j] for j in range(n)):
                return None
            continue
        if not d.is_strictly_positive() or not d.is_unit():
            return None
        inv = d.inverse()
        w = [m[r][k] * inv for r in range(n)]
        out.append((d, w))
        for r in range(n):
            if w[r]:
                for c in range(n):
                    if w[c]:
                        m[r][c] = m[r][c] - d * w[r] * w[c].conj()
    return out
