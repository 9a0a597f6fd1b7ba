"""Finite-dimensional *-algebras over C given by structure constants.

A presentation may carry a *multi-matrix embedding*: a *-isomorphism onto a
direct sum of full matrix algebras, recorded basis element by basis element.
Algebras flagged ``matrix`` or ``functions`` have one, and positivity
questions about them are decided exactly through it.  Everything else is
``generic`` and only gets sufficient certificates or sampled answers.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

from . import linalg
from .report import Report
from .ring import ExprParser, Scalar, format_scalar, scalar

MATRIX, FUNCTIONS, GENERIC = "matrix", "functions", "generic"


class AlgebraMismatch(ValueError):
    pass


class UnsupportedAlgebra(ValueError):
    """An exact decision was requested for an algebra without a multi-matrix embedding."""


def _sparse(vec: Sequence[Scalar]) -> tuple:
    return tuple((c, v) for c, v in enumerate(vec) if v)


@dataclass(frozen=True, eq=False)
class AlgebraPresentation:
    """Basis ``e_0..e_{k-1}``, ``e_a e_b = sum_c structure[a][b][c] e_c``,
    ``e_a^* = sum_b involution[a][b] e_b``.

    ``structure`` and ``involution`` are stored sparsely as tuples of
    ``(index, Scalar)`` pairs.  ``embedding[a]`` lists ``(block, row, col,
    coefficient)`` for the image of ``e_a`` in the multi-matrix algebra with
    block sizes ``blocks``.
    """

    labels: tuple
    structure: tuple
    involution: tuple
    unit: Optional[tuple] = None
    kind: str = GENERIC
    blocks: Optional[tuple] = None
    embedding: Optional[tuple] = None
    lam: bool = False
    name: str = field(default="", compare=False)

    @classmethod
    def from_dense(cls, labels, structure, involution, unit=None, kind=GENERIC,
                   blocks=None, embedding=None, lam=False, name=""):
        sc = lambda v: scalar(v, lam)
        k = len(labels)
        st = tuple(
            tuple(_sparse([sc(structure[a][b][c]) for c in range(k)]) for b in range(k))
            for a in range(k)
        )
        inv = tuple(_sparse([sc(involution[a][b]) for b in range(k)]) for a in range(k))
        u = None if unit is None else tuple(sc(v) for v in unit)
        emb = None
        if embedding is not None:
            emb = tuple(tuple((bk, r, c, sc(v)) for bk, r, c, v in entries) for entries in embedding)
        return cls(tuple(labels), st, inv, u, kind, None if blocks is None else tuple(blocks), emb, lam, name)

    # -- identity -----------------------------------------------------------
    def _key(self):
        return (self.labels, self.structure, self.involution, self.unit, self.kind, self.blocks,
                self.embedding, self.lam)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, AlgebraPresentation):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash((self.labels, self.lam, len(self.structure)))

    def __repr__(self):
        return f"AlgebraPresentation({self.name or '?'}, dim={self.dim}, kind={self.kind})"

    # -- basic data -----------------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def basis_labels(self) -> tuple:
        return self.labels

    @property
    def is_unital(self) -> bool:
        return self.unit is not None

    @property
    def exact_class(self) -> bool:
        return self.embedding is not None

    @cached_property
    def zero_scalar(self) -> Scalar:
        return Scalar.zero(self.lam)

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, (self.zero_scalar,) * self.dim)

    def one(self) -> "AlgebraElement":
        if self.unit is None:
            raise ValueError(f"{self!r} is not unital")
        return AlgebraElement(self, self.unit)

    def basis(self, a: int) -> "AlgebraElement":
        return self._basis[a]

    @cached_property
    def _basis(self) -> tuple:
        z, o = Scalar.zero(self.lam), Scalar.one(self.lam)
        return tuple(AlgebraElement(self, tuple(o if b == a else z for b in range(self.dim)))
                     for a in range(self.dim))

    def element(self, coords) -> "AlgebraElement":
        c = tuple(scalar(v, self.lam) for v in coords)
        if len(c) != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {len(c)}")
        return AlgebraElement(self, c)

    def scalar(self, value) -> Scalar:
        return scalar(value, self.lam)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def __getitem__(self, label: str) -> "AlgebraElement":
        return self.basis(self.index(label))

    @cached_property
    def star_basis(self) -> tuple:
        z = self.zero_scalar
        out = []
        for a in range(self.dim):
            v = [z] * self.dim
            for b, s in self.involution[a]:
                v[b] = s
            out.append(AlgebraElement(self, tuple(v)))
        return tuple(out)

    # -- multi-matrix embedding ----------------------------------------------
    def embed(self, x: "AlgebraElement") -> list:
        """Images of ``x`` in each block (list of square matrices)."""
        if self.embedding is None:
            raise UnsupportedAlgebra(f"{self!r} has no multi-matrix embedding")
        z = self.zero_scalar
        mats = [[[z] * n for _ in range(n)] for n in self.blocks]
        for a, xa in enumerate(x.coords):
            if xa:
                for bk, r, c, v in self.embedding[a]:
                    mats[bk][r][c] = mats[bk][r][c] + xa * v
        return mats

    @cached_property
    def _unembed(self):
        """Map ``(block, row, col)`` to the coordinate vector of the matrix unit."""
        units = [(bk, r, c) for bk, n in enumerate(self.blocks) for r in range(n) for c in range(n)]
        simple = all(len(e) == 1 and e[0][3] == 1 for e in self.embedding)
        if simple and len(units) == self.dim:
            table = {}
            for a, e in enumerate(self.embedding):
                bk, r, c, _ = e[0]
                table[(bk, r, c)] = self.basis(a).coords
            if len(table) == self.dim:
                return table
        # general case: invert the embedding matrix
        col = {u: i for i, u in enumerate(units)}
        mat = linalg.zeros(len(units), self.dim, self.lam)
        for a, e in enumerate(self.embedding):
            for bk, r, c, v in e:
                mat[col[(bk, r, c)]][a] = mat[col[(bk, r, c)]][a] + v
        table = {}
        for u, i in col.items():
            rhs = [self.zero_scalar] * len(units)
            rhs[i] = Scalar.one(self.lam)
            sol = linalg.solve(mat, rhs)
            if sol is None:
                raise ValueError(f"embedding of {self!r} is not invertible over the scalar ring")
            table[u] = tuple(sol)
        return table

    def from_blocks(self, mats: list) -> "AlgebraElement":
        z = self.zero_scalar
        acc = [z] * self.dim
        for bk, m in enumerate(mats):
            for r, row in enumerate(m):
                for c, v in enumerate(row):
                    if v:
                        unit = self._unembed[(bk, r, c)]
                        for a, u in enumerate(unit):
                            if u:
                                acc[a] = acc[a] + v * u
        return AlgebraElement(self, tuple(acc))

    def central_idempotents(self) -> list:
        """Block identities of a multi-matrix algebra."""
        if self.embedding is None:
            raise UnsupportedAlgebra(f"{self!r} has no multi-matrix embedding")
        out = []
        o, z = Scalar.one(self.lam), self.zero_scalar
        for bk, n in enumerate(self.blocks):
            mats = [[[o if (b == bk and r == c) else z for c in range(m)] for r in range(m)]
                    for b, m in enumerate(self.blocks)]
            out.append(self.from_blocks(mats))
        return out

    # -- deformation support --------------------------------------------------
    def map_scalars(self, f, lam: bool, name: str | None = None) -> "AlgebraPresentation":
        """Apply ``f`` to every structure scalar (used by lifting and the classical limit)."""
        st = tuple(tuple(tuple((c, f(v)) for c, v in row if f(v)) for row in rows) for rows in self.structure)
        inv = tuple(tuple((b, f(v)) for b, v in row if f(v)) for row in self.involution)
        unit = None if self.unit is None else tuple(f(v) for v in self.unit)
        emb = None
        if self.embedding is not None:
            emb = tuple(tuple((bk, r, c, f(v)) for bk, r, c, v in e if f(v)) for e in self.embedding)
        return AlgebraPresentation(self.labels, st, inv, unit, self.kind, self.blocks, emb, lam,
                                   self.name if name is None else name)

    def lift(self) -> "AlgebraPresentation":
        if self.lam:
            return self
        return self.map_scalars(lambda v: v.lift(), True)


class AlgebraElement:
    __slots__ = ("algebra", "coords")

    def __init__(self, algebra: AlgebraPresentation, coords: tuple):
        self.algebra = algebra
        self.coords = coords

    def _same(self, other: "AlgebraElement") -> None:
        if other.algebra is not self.algebra and other.algebra != self.algebra:
            raise AlgebraMismatch(f"{self.algebra!r} vs {other.algebra!r}")

    def _lift_scalar(self, other):
        if isinstance(other, AlgebraElement):
            return other
        return self.algebra.one().scale(other)

    def __add__(self, other):
        other = self._lift_scalar(other)
        self._same(other)
        return AlgebraElement(self.algebra, tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __sub__(self, other):
        self._same(other)
        return AlgebraElement(self.algebra, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return AlgebraElement(self.algebra, tuple(-a for a in self.coords))

    def scale(self, s) -> "AlgebraElement":
        s = scalar(s, self.algebra.lam) if not isinstance(s, Scalar) else s
        return AlgebraElement(self.algebra, tuple(s * a if a else a for a in self.coords))

    def __mul__(self, other):
        if not isinstance(other, AlgebraElement):
            return self.scale(other)
        self._same(other)
        alg = self.algebra
        acc = list(alg.zero().coords)
        st = alg.structure
        ys = [(b, y) for b, y in enumerate(other.coords) if y]
        for a, x in enumerate(self.coords):
            if not x:
                continue
            row = st[a]
            for b, y in ys:
                xy = None
                for c, s in row[b]:
                    if xy is None:
                        xy = x * y
                    acc[c] = acc[c] + xy * s
        return AlgebraElement(alg, tuple(acc))

    def __rmul__(self, other):
        return self.scale(other)

    def star(self) -> "AlgebraElement":
        alg = self.algebra
        acc = list(alg.zero().coords)
        for a, x in enumerate(self.coords):
            if x:
                xc = x.conj()
                for b, s in alg.involution[a]:
                    acc[b] = acc[b] + xc * s
        return AlgebraElement(alg, tuple(acc))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __bool__(self):
        return not self.is_zero()

    def is_hermitian(self) -> bool:
        return self.star() == self

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return (other.algebra is self.algebra or other.algebra == self.algebra) and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def map_scalars(self, f, algebra: AlgebraPresentation) -> "AlgebraElement":
        return AlgebraElement(algebra, tuple(f(v) for v in self.coords))

    def __repr__(self):
        return f"<{format_element(self)}>"


def format_element(x: AlgebraElement) -> str:
    """Element literal in the basis labels, e.g. ``E11 - (1+i)*E12``."""
    parts = []
    for lab, v in zip(x.algebra.labels, x.coords):
        if not v:
            continue
        s = format_scalar(v)
        if s == "1":
            parts.append(lab)
        elif s == "-1":
            parts.append(f"-{lab}")
        elif any(ch in s[1:] for ch in "+-") or ("/" in s and "*" in s):
            parts.append(f"({s})*{lab}")
        else:
            parts.append(f"{s}*{lab}")
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out


def parse_element(alg: AlgebraPresentation, text: str) -> AlgebraElement:
    """Parse an element literal such as ``"E11 - (1+i)*E12"``; a bare scalar means a multiple of the unit."""
    def atom(tok):
        if tok in alg.labels:
            return alg[tok]
        raise SyntaxError(f"unknown basis label {tok!r} for {alg.name or 'algebra'}")

    v = ExprParser(str(text), alg.lam, atom).parse()
    if isinstance(v, Scalar):
        if not v:
            return alg.zero()
        if not alg.is_unital:
            raise SyntaxError(f"scalar literal {text!r} in a non-unital algebra")
        return alg.one().scale(v)
    return v


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a * b


def involute(a: AlgebraElement) -> AlgebraElement:
    return a.star()


# -- functionals ----------------------------------------------------------------

class Functional:
    """C-linear functional stored by its values on the basis."""

    __slots__ = ("algebra", "values")

    def __init__(self, algebra: AlgebraPresentation, values):
        self.algebra = algebra
        self.values = tuple(scalar(v, algebra.lam) for v in values)
        if len(self.values) != algebra.dim:
            raise ValueError("functional needs one value per basis element")

    def __call__(self, x: AlgebraElement) -> Scalar:
        acc = self.algebra.zero_scalar
        for a, v in zip(x.coords, self.values):
            if a and v:
                acc = acc + a * v
        return acc

    def __add__(self, other: "Functional") -> "Functional":
        return Functional(self.algebra, [a + b for a, b in zip(self.values, other.values)])

    def scale(self, s) -> "Functional":
        s = scalar(s, self.algebra.lam)
        return Functional(self.algebra, [s * v for v in self.values])

    __rmul__ = scale

    def twist(self, b: AlgebraElement) -> "Functional":
        return functional_twist(self, b)

    def __eq__(self, other):
        return isinstance(other, Functional) and self.algebra == other.algebra and self.values == other.values

    def __hash__(self):
        return hash(self.values)

    def __repr__(self):
        return "Functional[" + ", ".join(format_scalar(v) for v in self.values) + "]"


def functional_twist(omega: Functional, b: AlgebraElement) -> Functional:
    """``omega_b(a) = omega(b^* a b)``."""
    bs = b.star()
    alg = omega.algebra
    return Functional(alg, [omega(bs * alg.basis(c) * b) for c in range(alg.dim)])


def trace_functional(alg: AlgebraPresentation) -> Functional:
    """Sum of the block traces of a multi-matrix algebra."""
    vals = []
    for a in range(alg.dim):
        mats = alg.embed(alg.basis(a))
        t = alg.zero_scalar
        for m in mats:
            for r in range(len(m)):
                t = t + m[r][r]
        vals.append(t)
    return Functional(alg, vals)


def evaluation_functional(alg: AlgebraPresentation, point: int) -> Functional:
    """Point evaluation on a function algebra (entry of 1x1 block ``point``)."""
    vals = []
    for a in range(alg.dim):
        vals.append(alg.embed(alg.basis(a))[point][0][0])
    return Functional(alg, vals)


# -- builders -------------------------------------------------------------------

def _matrix_label(i: int, j: int, n: int) -> str:
    return f"E{i + 1}{j + 1}" if n < 10 else f"E{i + 1}_{j + 1}"


def scalars(lam: bool = False) -> AlgebraPresentation:
    """The 1-dimensional algebra C itself."""
    return AlgebraPresentation.from_dense(
        ["1"], [[[1]]], [[1]], [1], MATRIX, (1,), [[(0, 0, 0, 1)]], lam, "C[l]" if lam else "C")


def full_matrix_algebra(n: int, lam: bool = False) -> AlgebraPresentation:
    labels, emb, idx = [], [], {}
    for i in range(n):
        for j in range(n):
            idx[(i, j)] = len(labels)
            labels.append(_matrix_label(i, j, n))
            emb.append([(0, i, j, 1)])
    k = n * n
    st = [[[0] * k for _ in range(k)] for _ in range(k)]
    inv = [[0] * k for _ in range(k)]
    for (i, j), a in idx.items():
        inv[a][idx[(j, i)]] = 1
        for (p, q), b in idx.items():
            if j == p:
                st[a][b][idx[(i, q)]] = 1
    unit = [1 if i == j else 0 for i in range(n) for j in range(n)]
    return AlgebraPresentation.from_dense(labels, st, inv, unit, MATRIX, (n,), emb, lam, f"M{n}")


def function_algebra(k: int, lam: bool = False) -> AlgebraPresentation:
    """Functions on ``k`` points with pointwise product and conjugation."""
    labels = [f"d{i + 1}" for i in range(k)]
    st = [[[1 if (a == b == c) else 0 for c in range(k)] for b in range(k)] for a in range(k)]
    inv = [[1 if a == b else 0 for b in range(k)] for a in range(k)]
    emb = [[(a, 0, 0, 1)] for a in range(k)]
    return AlgebraPresentation.from_dense(labels, st, inv, [1] * k, FUNCTIONS, (1,) * k, emb, lam, f"F{k}")


def matrix_algebra(p: AlgebraPresentation, n: int) -> AlgebraPresentation:
    """``M_n(p)`` with basis ``E_IJ (x) e_a`` at index ``(I*n + J)*dim(p) + a``."""
    d = p.dim
    scalar_like = d == 1 and p.labels == ("1",)
    labels = []
    for I in range(n):
        for J in range(n):
            for lab in p.labels:
                labels.append(_matrix_label(I, J, n) if scalar_like else f"{_matrix_label(I, J, n)}.{lab}")
    idx = lambda I, J, a: (I * n + J) * d + a
    st = []
    for I in range(n):
        for J in range(n):
            for a in range(d):
                row = []
                for K in range(n):
                    for L in range(n):
                        for b in range(d):
                            if J == K:
                                row.append(tuple((idx(I, L, c), s) for c, s in p.structure[a][b]))
                            else:
                                row.append(())
                st.append(tuple(row))
    inv = []
    for I in range(n):
        for J in range(n):
            for a in range(d):
                inv.append(tuple((idx(J, I, b), s) for b, s in p.involution[a]))
    unit = None
    if p.unit is not None:
        z = p.zero_scalar
        u = [z] * (n * n * d)
        for I in range(n):
            for a in range(d):
                u[idx(I, I, a)] = p.unit[a]
        unit = tuple(u)
    blocks = emb = None
    kind = GENERIC
    if p.embedding is not None:
        kind = MATRIX
        blocks = tuple(n * m for m in p.blocks)
        emb = []
        for I in range(n):
            for J in range(n):
                for a in range(d):
                    emb.append(tuple((bk, I * p.blocks[bk] + r, J * p.blocks[bk] + c, v)
                                     for bk, r, c, v in p.embedding[a]))
        emb = tuple(emb)
    name = f"M{n}({p.name})" if p.name else ""
    return AlgebraPresentation(tuple(labels), tuple(st), tuple(inv), unit, kind, blocks, emb, p.lam, name)


def matrix_index(p: AlgebraPresentation, n: int, I: int, J: int, a: int) -> int:
    return (I * n + J) * p.dim + a


def matrix_element(p: AlgebraPresentation, mn: AlgebraPresentation, entries) -> AlgebraElement:
    """Element of ``mn = M_n(p)`` from an ``n x n`` nested list of ``p``-elements."""
    n = len(entries)
    z = mn.zero_scalar
    c = [z] * mn.dim
    for I in range(n):
        for J in range(n):
            for a, v in enumerate(entries[I][J].coords):
                c[(I * n + J) * p.dim + a] = v
    return AlgebraElement(mn, tuple(c))


def matrix_entries(p: AlgebraPresentation, x: AlgebraElement, n: int) -> list:
    d = p.dim
    return [[AlgebraElement(p, x.coords[(I * n + J) * d:(I * n + J + 1) * d]) for J in range(n)]
            for I in range(n)]


def basis_bijection_isomorphic(p: AlgebraPresentation, q: AlgebraPresentation, perm: Sequence[int]) -> bool:
    """Do structure constants, involution and unit agree under ``e_a -> f_perm[a]``?"""
    if p.dim != q.dim or sorted(perm) != list(range(p.dim)):
        return False
    for a in range(p.dim):
        for b in range(p.dim):
            mapped = sorted((perm[c], s) for c, s in p.structure[a][b])
            if tuple(mapped) != tuple(sorted(q.structure[perm[a]][perm[b]])):
                return False
        if tuple(sorted((perm[b], s) for b, s in p.involution[a])) != tuple(sorted(q.involution[perm[a]])):
            return False
    if (p.unit is None) != (q.unit is None):
        return False
    if p.unit is not None:
        for a in range(p.dim):
            if p.unit[a] != q.unit[perm[a]]:
                return False
    return True


def matrix_unit_bijection(p: AlgebraPresentation, q: AlgebraPresentation):
    """Basis bijection matching single matrix units of two one-block embeddings, if any."""
    if p.embedding is None or q.embedding is None or p.blocks != q.blocks:
        return None
    where = {}
    for b, e in enumerate(q.embedding):
        if len(e) != 1 or e[0][3] != 1:
            return None
        where[e[0][:3]] = b
    perm = []
    for e in p.embedding:
        if len(e) != 1 or e[0][3] != 1 or e[0][:3] not in where:
            return None
        perm.append(where[e[0][:3]])
    return perm


# -- axioms ---------------------------------------------------------------------

def check_star_algebra(p: AlgebraPresentation) -> Report:
    """Associativity, involution and unit laws on the basis, plus the embedding if any."""
    rep = Report(f"star algebra {p.name or ''}".strip())
    B = [p.basis(a) for a in range(p.dim)]
    S = p.star_basis
    assoc = None
    prods = [[B[a] * B[b] for b in range(p.dim)] for a in range(p.dim)]
    for a, b, c in itertools.product(range(p.dim), repeat=3):
        if prods[a][b] * B[c] != B[a] * prods[b][c]:
            assoc = (p.labels[a], p.labels[b], p.labels[c])
            break
    rep.add("associativity", assoc is None, assoc)
    invol = next((p.labels[a] for a in range(p.dim) if S[a].star() != B[a]), None)
    rep.add("involutive", invol is None, invol)
    anti = None
    for a, b in itertools.product(range(p.dim), repeat=2):
        if prods[a][b].star() != S[b] * S[a]:
            anti = (p.labels[a], p.labels[b])
            break
    rep.add("anti_homomorphism", anti is None, anti)
    if p.unit is not None:
        one = p.one()
        bad = next((p.labels[a] for a in range(p.dim) if one * B[a] != B[a] or B[a] * one != B[a]), None)
        rep.add("unit", bad is None, bad)
    if p.embedding is not None:
        bad = None
        for a, b in itertools.product(range(p.dim), repeat=2):
            lhs = p.embed(prods[a][b])
            ea, eb = p.embed(B[a]), p.embed(B[b])
            if lhs != [linalg.matmul(x, y) for x, y in zip(ea, eb)]:
                bad = ("product", p.labels[a], p.labels[b])
                break
        if bad is None:
            for a in range(p.dim):
                if p.embed(S[a]) != [linalg.adjoint(x) for x in p.embed(B[a])]:
                    bad = ("involution", p.labels[a])
                    break
        if bad is None and sum(n * n for n in p.blocks) != p.dim:
            bad = ("dimension",)
        rep.add("embedding", bad is None, bad)
    return rep


# -- positivity -----------------------------------------------------------------

def functional_gram(omega: Functional) -> list:
    alg = omega.algebra
    S, B = alg.star_basis, [alg.basis(a) for a in range(alg.dim)]
    return [[omega(S[a] * B[b]) for b in range(alg.dim)] for a in range(alg.dim)]


@dataclass
class FunctionalVerdict:
    positive: bool
    witness: Optional[AlgebraElement] = None

    def __bool__(self):
        return self.positive


def is_positive_functional(omega: Functional) -> FunctionalVerdict:
    """Decide ``omega(a^*a) >= 0`` for all ``a`` through the Gram matrix ``omega(e_a^* e_b)``.

    On failure the witness ``a`` has ``omega(a^*a)`` negative or non-real.
    """
    g = functional_gram(omega)
    ok, x = linalg.hermitian_psd(g)
    if ok:
        return FunctionalVerdict(True)
    return FunctionalVerdict(False, AlgebraElement(omega.algebra, tuple(x)))


SOS, SEPARATING, MINORS, UNKNOWN, NOT_HERMITIAN = (
    "sos_decomposition", "separating_functional", "minor_chain", "unknown", "not_hermitian")


@dataclass
class PositivityCertificate:
    """Outcome of an algebraic positivity query.

    ``sos_decomposition`` witnesses are ``(alpha, a)`` pairs with
    ``element == sum alpha * a^* a``; ``separating_functional`` carries one
    positive functional that is negative on the element.
    """

    kind: str
    element: AlgebraElement
    witnesses: list = field(default_factory=list)
    budget_exhausted: bool = False

    @property
    def member(self):
        if self.kind == SOS:
            return True
        if self.kind in (SEPARATING, NOT_HERMITIAN):
            return False
        return None

    def recombine(self) -> AlgebraElement:
        acc = self.element.algebra.zero()
        for alpha, a in self.witnesses:
            acc = acc + (a.star() * a).scale(alpha)
        return acc

    def transport(self, b: AlgebraElement) -> "PositivityCertificate":
        """Certificate for ``b^* x b`` obtained by conjugating every witness."""
        if self.kind != SOS:
            raise ValueError("only sos certificates can be transported")
        return PositivityCertificate(SOS, b.star() * self.element * b,
                                     [(alpha, a * b) for alpha, a in self.witnesses])


def _vector_state(alg: AlgebraPresentation, block: int, x: list) -> Functional:
    vals = []
    for a in range(alg.dim):
        m = alg.embed(alg.basis(a))[block]
        vals.append(linalg.quadratic_form(m, x))
    return Functional(alg, vals)


def _row_element(alg: AlgebraPresentation, block: int, w: list) -> AlgebraElement:
    """Block matrix whose first row is ``w^*`` and all else zero."""
    z = alg.zero_scalar
    mats = [[[z] * n for _ in range(n)] for n in alg.blocks]
    for c, v in enumerate(w):
        mats[block][0][c] = v.conj()
    return alg.from_blocks(mats)


def membership_app(a: AlgebraElement, budget: int = 64) -> PositivityCertificate:
    """Search ``a = sum alpha_i a_i^* a_i`` with ``alpha_i > 0``.

    Exact-class algebras are decided blockwise by congruence diagonalisation; a
    failed block yields a vector state that separates ``a`` from the positive
    elements.  Generic algebras get a Gram-matrix attempt, answering
    ``unknown`` when it is inconclusive.
    """
    alg = a.algebra
    if not a.is_hermitian():
        return PositivityCertificate(NOT_HERMITIAN, a)
    if alg.exact_class:
        wits = []
        for bk, m in enumerate(alg.embed(a)):
            ok, x = linalg.hermitian_psd(m)
            if not ok:
                return PositivityCertificate(SEPARATING, a, [_vector_state(alg, bk, x)])
            dec = linalg.ldl_certificate(m)
            if dec is None:
                return PositivityCertificate(UNKNOWN, a, budget_exhausted=True)
            wits.extend((d, _row_element(alg, bk, w)) for d, w in dec)
        cert = PositivityCertificate(SOS, a, wits)
        assert cert.recombine() == a
        return cert
    return _generic_sos(a, budget)


def _generic_sos(a: AlgebraElement, budget: int) -> PositivityCertificate:
    alg = a.algebra
    k = alg.dim
    if k * k > budget * budget:
        return PositivityCertificate(UNKNOWN, a, budget_exhausted=True)
    S, B = alg.star_basis, [alg.basis(i) for i in range(k)]
    cols = []
    for i in range(k):
        for j in range(k):
            cols.append((S[i] * B[j]).coords)
    mat = [[cols[c][r] for c in range(k * k)] for r in range(k)]
    sol = linalg.solve(mat, list(a.coords))
    if sol is None:
        return PositivityCertificate(UNKNOWN, a, budget_exhausted=False)
    m = [[sol[i * k + j] for j in range(k)] for i in range(k)]
    half = (Scalar.one(alg.lam) + 1).inverse()
    mh = [[(m[i][j] + m[j][i].conj()) * half for j in range(k)] for i in range(k)]
    dec = linalg.ldl_certificate(mh)
    if dec is None:
        return PositivityCertificate(UNKNOWN, a, budget_exhausted=True)
    wits = []
    for d, w in dec:
        y = alg.element([v.conj() for v in w])
        wits.append((d, y))
    cert = PositivityCertificate(SOS, a, wits)
    if cert.recombine() != a:
        return PositivityCertificate(UNKNOWN, a, budget_exhausted=True)
    return cert


@dataclass
class AplusVerdict:
    member: bool
    witness: Optional[Functional] = None
    mode: str = "exact_class"

    def __bool__(self):
        return self.member


def membership_aplus(a: AlgebraElement, mode="exact_class") -> AplusVerdict:
    """Membership in the dual wedge of positive functionals.

    ``mode`` is ``"exact_class"`` or a list ``S`` of positive functionals; the
    latter tests membership in the wedge cut out by ``S`` and its twists
    ``omega_b`` over basis elements ``b``.
    """
    alg = a.algebra
    if mode == "exact_class":
        if not alg.exact_class:
            raise UnsupportedAlgebra(f"{alg!r} is not a matrix or function algebra")
        for bk, m in enumerate(alg.embed(a)):
            ok, x = linalg.hermitian_psd(m)
            if not ok:
                return AplusVerdict(False, _vector_state(alg, bk, x))
        return AplusVerdict(True)
    sample = list(mode)
    for om in sample:
        if not is_positive_functional(om):
            raise ValueError(f"sample functional {om!r} is not positive")
    if not a.is_hermitian():
        # a non-Hermitian element is in no sampled wedge unless every functional kills a - a^*
        diff = a - a.star()
        for om in sample:
            if om(diff):
                return AplusVerdict(False, om, "sampled")
    for om in sample:
        for tw in [om] + [functional_twist(om, alg.basis(b)) for b in range(alg.dim)]:
            if not tw(a).is_nonnegative():
                return AplusVerdict(False, tw, "sampled")
    return AplusVerdict(True, None, "sampled")


def block_matrix_psd(alg: AlgebraPresentation, entries) -> tuple:
    """Decide whether the ``n x n`` matrix of ``alg``-elements lies in ``M_n(alg)^+``.

    Returns ``(ok, witness)`` where the witness is ``(block, vector)`` for the
    assembled ``n * blocksize`` square matrix.
    """
    if not alg.exact_class:
        raise UnsupportedAlgebra(f"{alg!r} is not a matrix or function algebra")
    n = len(entries)
    embedded = [[alg.embed(entries[i][j]) for j in range(n)] for i in range(n)]
    for bk, m in enumerate(alg.blocks):
        big = linalg.zeros(n * m, n * m, alg.lam)
        for i in range(n):
            for j in range(n):
                blk = embedded[i][j][bk]
                for r in range(m):
                    for c in range(m):
                        big[i * m + r][j * m + c] = blk[r][c]
        ok, x = linalg.hermitian_psd(big)
        if not ok:
            return False, (bk, x)
    return True, None
