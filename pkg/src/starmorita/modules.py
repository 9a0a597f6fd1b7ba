"""Inner-product modules over a *-algebra, adjointable maps and representations.

A module is presented as the free right module ``D^k`` on generators
``g_1..g_k`` with a Hermitian Gram matrix ``G_ij = <g_i, g_j>``.  Relations are
never stored: the module that matters is the quotient by the radical
``{x : <x, .> = 0}``, computed on demand from the Gram matrix over the scalar
coordinates ``x = sum x_(i,a) g_i e_a``.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

from . import linalg
from .algebra import (AlgebraElement, AlgebraMismatch, AlgebraPresentation, Functional,
                      UnsupportedAlgebra, block_matrix_psd, functional_twist)
from .report import Report
from .ring import Scalar, gcd, scalar


class UnsupportedQuotient(ValueError):
    """The radical has no complement spanned by coordinate vectors."""


def left_matrix(g: AlgebraElement) -> list:
    """Matrix of ``d -> g d`` on the basis coordinates."""
    alg = g.algebra
    k = alg.dim
    z = alg.zero_scalar
    m = [[z] * k for _ in range(k)]
    st = alg.structure
    for b, gb in enumerate(g.coords):
        if gb:
            row = st[b]
            for a in range(k):
                for c, s in row[a]:
                    m[c][a] = m[c][a] + gb * s
    return m


def right_matrix(g: AlgebraElement) -> list:
    """Matrix of ``d -> d g`` on the basis coordinates."""
    alg = g.algebra
    k = alg.dim
    z = alg.zero_scalar
    m = [[z] * k for _ in range(k)]
    st = alg.structure
    for b, gb in enumerate(g.coords):
        if gb:
            for a in range(k):
                for c, s in st[a][b]:
                    m[c][a] = m[c][a] + gb * s
    return m


def _same_algebra(p: AlgebraPresentation, q: AlgebraPresentation) -> None:
    if p is not q and p != q:
        raise AlgebraMismatch(f"{p!r} vs {q!r}")


# -- quotient by the radical ----------------------------------------------------

class Quotient:
    """Coordinates on ``D^k / radical``.

    ``radical`` rows are reduced so that each pivot column carries a 1 and
    zeros in every other row; the non-pivot columns index the quotient basis.
    """

    def __init__(self, n: int, radical: list, lam: bool):
        self.n = n
        self.lam = lam
        rows, pivots = _unit_echelon(radical, n)
        self.rows = rows
        self.pivots = pivots
        piv = set(pivots)
        self.free = [c for c in range(n) if c not in piv]

    @property
    def dim(self) -> int:
        return len(self.free)

    def project(self, v: Sequence[Scalar]) -> list:
        v = list(v)
        for row, c in zip(self.rows, self.pivots):
            f = v[c]
            if f:
                v = [a - f * r if r else a for a, r in zip(v, row)]
        return [v[c] for c in self.free]

    def lift(self, u: Sequence[Scalar]) -> list:
        v = [Scalar.zero(self.lam)] * self.n
        for c, x in zip(self.free, u):
            v[c] = x
        return v

    def unit(self, t: int) -> list:
        u = [Scalar.zero(self.lam)] * self.dim
        u[t] = Scalar.one(self.lam)
        return self.lift(u)


def _unit_echelon(vectors: list, n: int):
    rows: list = []
    pivots: list = []
    for v in vectors:
        v = list(v)
        for row, c in zip(rows, pivots):
            f = v[c]
            if f:
                v = [a - f * r if r else a for a, r in zip(v, row)]
        if not any(v):
            continue
        c = next((j for j, x in enumerate(v) if x and x.is_unit()), None)
        if c is None:
            v = linalg._content_reduce(v)
            c = next((j for j, x in enumerate(v) if x and x.is_unit()), None)
        if c is None:
            raise UnsupportedQuotient("radical vector without a unit coordinate: " + str(v))
        inv = v[c].inverse()
        v = [x * inv if x else x for x in v]
        for i, row in enumerate(rows):
            f = row[c]
            if f:
                rows[i] = [a - f * b if b else a for a, b in zip(row, v)]
        rows.append(v)
        pivots.append(c)
    return rows, pivots


# -- modules ----------------------------------------------------------------------

class InnerProductModule:
    """Free right ``D``-module with Gram matrix; see the module docstring."""

    def __init__(self, over: AlgebraPresentation, gram, name: str = ""):
        self.over = over
        self.gram = tuple(tuple(g) for g in gram)
        self.name = name
        for row in self.gram:
            if len(row) != len(self.gram):
                raise ValueError("Gram matrix must be square")
            for g in row:
                _same_algebra(g.algebra, over)

    @property
    def coefficient_algebra(self) -> AlgebraPresentation:
        return self.over

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def scalar_dim(self) -> int:
        return self.rank * self.over.dim

    @property
    def lam(self) -> bool:
        return self.over.lam

    def __eq__(self, other):
        return isinstance(other, InnerProductModule) and self.over == other.over and self.gram == other.gram

    def __hash__(self):
        return hash((self.rank, self.over.dim))

    def __repr__(self):
        return f"InnerProductModule({self.name or '?'}, rank={self.rank}, over={self.over.name})"

    def is_hermitian(self) -> bool:
        k = self.rank
        return all(self.gram[i][j] == self.gram[j][i].star() for i in range(k) for j in range(i, k))

    # elements
    def element(self, coords) -> "ModuleElement":
        coords = tuple(coords)
        if len(coords) != self.rank:
            raise ValueError(f"expected {self.rank} coordinates")
        return ModuleElement(self, coords)

    def zero(self) -> "ModuleElement":
        return ModuleElement(self, (self.over.zero(),) * self.rank)

    def generator(self, i: int) -> "ModuleElement":
        z, o = self.over.zero(), self.over.one()
        return ModuleElement(self, tuple(o if j == i else z for j in range(self.rank)))

    def generators(self) -> list:
        return [self.generator(i) for i in range(self.rank)]

    def scalar_basis(self, s: int) -> "ModuleElement":
        i, a = divmod(s, self.over.dim)
        z = self.over.zero()
        return ModuleElement(self, tuple(self.over.basis(a) if j == i else z for j in range(self.rank)))

    def from_scalar(self, v: Sequence[Scalar]) -> "ModuleElement":
        d = self.over.dim
        return ModuleElement(self, tuple(AlgebraElement(self.over, tuple(v[i * d:(i + 1) * d]))
                                         for i in range(self.rank)))

    # radical
    @cached_property
    def radical_matrix(self) -> list:
        """Rows ``(j, c)``: coordinate ``c`` of ``<g_j, x>`` as a function of the scalar coordinates of ``x``."""
        d = self.over.dim
        k = self.rank
        n = k * d
        z = self.over.zero_scalar
        out = [[z] * n for _ in range(n)]
        for j in range(k):
            for i in range(k):
                g = self.gram[j][i]
                if g:
                    lm = left_matrix(g)
                    for c in range(d):
                        row = out[j * d + c]
                        for a in range(d):
                            if lm[c][a]:
                                row[i * d + a] = lm[c][a]
        return out

    @cached_property
    def radical(self) -> list:
        if self.scalar_dim == 0:
            return []
        return linalg.nullspace(self.radical_matrix, self.scalar_dim)

    @cached_property
    def quotient(self) -> Quotient:
        return Quotient(self.scalar_dim, self.radical, self.lam)

    def in_radical(self, x: "ModuleElement") -> bool:
        return all(not inner_product(g, x) for g in self.generators())

    def project(self, x: "ModuleElement") -> list:
        return self.quotient.project(x.scalar_coords())

    def lift(self, u: Sequence[Scalar]) -> "ModuleElement":
        return self.from_scalar(self.quotient.lift(u))

    @cached_property
    def quotient_gram(self) -> list:
        """``<b_s, b_t>`` for the quotient basis vectors ``b_s``."""
        q = self.quotient
        vecs = [self.from_scalar(q.unit(t)) for t in range(q.dim)]
        return [[inner_product(x, y) for y in vecs] for x in vecs]

    @cached_property
    def right_action(self) -> list:
        """``R[a]``: matrix of ``x -> x e_a`` on quotient coordinates."""
        q = self.quotient
        out = []
        for a in range(self.over.dim):
            e = self.over.basis(a)
            cols = [q.project(self.from_scalar(q.unit(t)).right(e).scalar_coords()) for t in range(q.dim)]
            out.append(_columns(cols, q.dim))
        return out

    def right_action_of(self, d: AlgebraElement) -> list:
        q = self.quotient
        z = self.over.zero_scalar
        m = [[z] * q.dim for _ in range(q.dim)]
        for a, c in enumerate(d.coords):
            if c:
                ra = self.right_action[a]
                for r in range(q.dim):
                    for s in range(q.dim):
                        if ra[r][s]:
                            m[r][s] = m[r][s] + c * ra[r][s]
        return m


def _columns(cols: list, nrows: int) -> list:
    return [[col[r] for col in cols] for r in range(nrows)]


class ModuleElement:
    __slots__ = ("module", "coords")

    def __init__(self, module: InnerProductModule, coords: tuple):
        self.module = module
        self.coords = coords

    def _same(self, other):
        if other.module is not self.module and other.module != self.module:
            raise ValueError("elements of different modules")

    def __add__(self, other):
        self._same(other)
        return ModuleElement(self.module, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        self._same(other)
        return ModuleElement(self.module, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return ModuleElement(self.module, tuple(-a for a in self.coords))

    def right(self, d: AlgebraElement) -> "ModuleElement":
        return ModuleElement(self.module, tuple(a * d for a in self.coords))

    def __mul__(self, d):
        if isinstance(d, AlgebraElement):
            return self.right(d)
        return self.scale(d)

    def scale(self, s) -> "ModuleElement":
        return ModuleElement(self.module, tuple(a.scale(s) for a in self.coords))

    def scalar_coords(self) -> list:
        return [v for a in self.coords for v in a.coords]

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.coords)

    def __eq__(self, other):
        return isinstance(other, ModuleElement) and self.module == other.module and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return "ModuleElement(" + ", ".join(repr(a) for a in self.coords) + ")"


def inner_product(x: ModuleElement, y: ModuleElement) -> AlgebraElement:
    """``sum_ij x_i^* G_ij y_j``: antilinear in ``x``, linear in ``y``."""
    x._same(y)
    m = x.module
    acc = m.over.zero()
    ys = [(j, yj) for j, yj in enumerate(y.coords) if yj]
    for i, xi in enumerate(x.coords):
        if xi.is_zero():
            continue
        xs = xi.star()
        row = m.gram[i]
        for j, yj in ys:
            if row[j]:
                acc = acc + xs * row[j] * yj
    return acc


def canonical_module(alg: AlgebraPresentation, rank: int = 1) -> InnerProductModule:
    """``D^rank`` with ``<x, y> = sum x_i^* y_i``."""
    z, o = alg.zero(), alg.one()
    return InnerProductModule(alg, [[o if i == j else z for j in range(rank)] for i in range(rank)],
                              f"{alg.name}^{rank}" if rank > 1 else alg.name)


def module_from_gram(alg: AlgebraPresentation, gram, name: str = "") -> InnerProductModule:
    """Gram given as nested lists of elements or coordinate lists."""
    rows = [[g if isinstance(g, AlgebraElement) else alg.element(g) for g in row] for row in gram]
    return InnerProductModule(alg, rows, name)


def direct_sum(m1: InnerProductModule, m2: InnerProductModule) -> InnerProductModule:
    _same_algebra(m1.over, m2.over)
    z = m1.over.zero()
    k1, k2 = m1.rank, m2.rank
    gram = [[m1.gram[i][j] if i < k1 and j < k1 else
             m2.gram[i - k1][j - k1] if i >= k1 and j >= k1 else z
             for j in range(k1 + k2)] for i in range(k1 + k2)]
    return InnerProductModule(m1.over, gram, f"{m1.name}+{m2.name}")


# -- nondegeneracy and positivity ---------------------------------------------------

@dataclass
class NondegeneracyVerdict:
    nondegenerate: bool
    radical_basis: list = field(default_factory=list)

    def __bool__(self):
        return self.nondegenerate


def is_nondegenerate(m: InnerProductModule) -> NondegeneracyVerdict:
    rad = m.radical
    if not rad:
        return NondegeneracyVerdict(True)
    return NondegeneracyVerdict(False, [m.from_scalar(v) for v in rad])


@dataclass
class PositivityVerdict:
    positive: bool
    witness: object = None
    spot_checks: int = 0

    def __bool__(self):
        return self.positive


def _sampled_gram_psd(m: InnerProductModule, sample: list):
    """``sum_ij omega(d_i^* G_ij d_j) >= 0`` for every ``omega`` in the sample and its basis twists."""
    alg = m.over
    k, d = m.rank, alg.dim
    S = alg.star_basis
    B = [alg.basis(a) for a in range(d)]
    fam = []
    for om in sample:
        fam.append(om)
        fam.extend(functional_twist(om, b) for b in B)
    for om in fam:
        h = [[om(S[a] * m.gram[i][j] * B[b]) for j in range(k) for b in range(d)]
             for i in range(k) for a in range(d)]
        ok, x = linalg.hermitian_psd(h)
        if not ok:
            return False, (om, x)
    return True, None


def is_completely_positive(m: InnerProductModule, sample: Optional[list] = None,
                           spot_checks: int = 6, seed: int = 0) -> PositivityVerdict:
    """Decide ``G in M_k(D)^+`` and spot-check random tuples ``(x_1..x_n)``, ``n <= 3``.

    The Gram test covers every finite tuple because ``(<x_i, x_j>) = X^* G X``
    and conjugation preserves the positive matrices; the spot checks guard
    that reasoning against implementation slips.
    """
    alg = m.over
    if not m.is_hermitian():
        return PositivityVerdict(False, "gram not hermitian")
    if m.rank == 0:
        return PositivityVerdict(True)
    if alg.exact_class:
        test = lambda mat: block_matrix_psd(alg, mat)
    elif sample is not None:
        test = lambda mat: _sampled_gram_psd(InnerProductModule(alg, mat), sample)
    else:
        raise UnsupportedAlgebra(f"{alg!r}: complete positivity needs a matrix/function algebra or a sample")
    ok, wit = test(m.gram)
    if not ok:
        return PositivityVerdict(False, wit)
    rng = random.Random(seed)
    done = 0
    for _ in range(spot_checks):
        n = rng.randint(1, 3)
        xs = [random_element(m, rng) for _ in range(n)]
        mat = [[inner_product(x, y) for y in xs] for x in xs]
        ok2, wit2 = test(mat)
        if not ok2:
            raise AssertionError(f"spot check contradicts the Gram test: {wit2}")
        done += 1
    return PositivityVerdict(True, None, done)


def random_algebra_element(alg: AlgebraPresentation, rng: random.Random, size: int = 2,
                           density: float = 0.6) -> AlgebraElement:
    coords = []
    for _ in range(alg.dim):
        if rng.random() < density:
            coords.append(Scalar(rng.randint(-size, size), rng.randint(-size, size), alg.lam))
        else:
            coords.append(alg.zero_scalar)
    return AlgebraElement(alg, tuple(coords))


def random_element(m: InnerProductModule, rng: random.Random, size: int = 2) -> ModuleElement:
    return ModuleElement(m, tuple(random_algebra_element(m.over, rng, size) for _ in range(m.rank)))


# -- operators ------------------------------------------------------------------------

class NotAdjointable(ValueError):
    pass


class ModuleOperator:
    """Right-linear map given by ``matrix[i][j] in D`` with ``A g_j = sum_i g'_i A_ij``."""

    def __init__(self, source: InnerProductModule, target: InnerProductModule, matrix,
                 adjoint_matrix=None):
        _same_algebra(source.over, target.over)
        self.source = source
        self.target = target
        self.matrix = tuple(tuple(r) for r in matrix)
        if len(self.matrix) != target.rank or any(len(r) != source.rank for r in self.matrix):
            raise ValueError("operator matrix has the wrong shape")
        self.adjoint_matrix = adjoint_matrix

    def __call__(self, x: ModuleElement) -> ModuleElement:
        acc = []
        for row in self.matrix:
            v = self.source.over.zero()
            for aij, xj in zip(row, x.coords):
                if aij and xj:
                    v = v + aij * xj
            acc.append(v)
        return ModuleElement(self.target, tuple(acc))

    def compose(self, other: "ModuleOperator") -> "ModuleOperator":
        """``self o other``."""
        z = self.source.over.zero()
        m = []
        for row in self.matrix:
            out = []
            for j in range(other.source.rank):
                v = z
                for l, a in enumerate(row):
                    b = other.matrix[l][j]
                    if a and b:
                        v = v + a * b
                out.append(v)
            m.append(out)
        return ModuleOperator(other.source, self.target, m)

    def scale(self, s) -> "ModuleOperator":
        return ModuleOperator(self.source, self.target, [[a.scale(s) for a in r] for r in self.matrix])

    def __add__(self, other):
        return ModuleOperator(self.source, self.target,
                              [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.matrix, other.matrix)])

    def __sub__(self, other):
        return self + other.scale(-1)

    def images(self) -> list:
        return [self(g) for g in self.source.generators()]

    def equal_mod_radical(self, other: "ModuleOperator") -> bool:
        return all(self.target.in_radical(a - b) for a, b in zip(self.images(), other.images()))

    def scalar_matrix(self) -> list:
        """Matrix on scalar coordinates of the free modules."""
        d = self.source.over.dim
        n_s, n_t = self.source.scalar_dim, self.target.scalar_dim
        z = self.source.over.zero_scalar
        out = [[z] * n_s for _ in range(n_t)]
        for i, row in enumerate(self.matrix):
            for j, a in enumerate(row):
                if a:
                    lm = left_matrix(a)
                    for c in range(d):
                        for b in range(d):
                            if lm[c][b]:
                                out[i * d + c][j * d + b] = lm[c][b]
        return out

    def quotient_matrix(self) -> list:
        qs, qt = self.source.quotient, self.target.quotient
        sm = self.scalar_matrix()
        cols = [qt.project(linalg.matvec(sm, qs.unit(t))) for t in range(qs.dim)]
        return _columns(cols, qt.dim)

    def __repr__(self):
        return f"ModuleOperator({self.source!r} -> {self.target!r})"


def identity_operator(m: InnerProductModule) -> ModuleOperator:
    z, o = m.over.zero(), m.over.one()
    return ModuleOperator(m, m, [[o if i == j else z for j in range(m.rank)] for i in range(m.rank)])


def zero_operator(source: InnerProductModule, target: InnerProductModule) -> ModuleOperator:
    z = source.over.zero()
    return ModuleOperator(source, target, [[z] * source.rank for _ in range(target.rank)])


def adjoint(A: ModuleOperator) -> ModuleOperator:
    """Solve ``G_source B = A^dagger G_target`` for the matrix ``B`` of ``A^*``.

    The solution is unique up to the radical of the source; ``NotAdjointable``
    is raised when the system has no solution.
    """
    s, t = A.source, A.target
    d = s.over.dim
    ks, kt = s.rank, t.rank
    z = s.over.zero()
    adag = [[A.matrix[j][i].star() for j in range(kt)] for i in range(ks)]
    rhs = [[sum((adag[i][l] * t.gram[l][j] for l in range(kt)), z) for j in range(kt)] for i in range(ks)]
    cols = []
    for j in range(kt):
        b = [v for i in range(ks) for v in rhs[i][j].coords]
        sol = linalg.solve(s.radical_matrix, b) if ks else []
        if sol is None:
            raise NotAdjointable(f"no adjoint for column {j}")
        cols.append([AlgebraElement(s.over, tuple(sol[l * d:(l + 1) * d])) for l in range(ks)])
    mat = [[cols[j][l] for j in range(kt)] for l in range(ks)]
    return ModuleOperator(t, s, mat, adjoint_matrix=A.matrix)


def is_adjoint_pair(A: ModuleOperator, B: ModuleOperator) -> bool:
    """``<B y, x> = <y, A x>`` on all generator pairs."""
    for x in A.source.generators():
        ax = A(x)
        for y in A.target.generators():
            if inner_product(B(y), x) != inner_product(y, ax):
                return False
    return True


# -- representations ------------------------------------------------------------------

class Representation:
    """``images[a]`` is the operator matrix of ``pi(e_a)`` on the module generators."""

    def __init__(self, algebra: AlgebraPresentation, module: InnerProductModule, images, name: str = ""):
        self.algebra = algebra
        self.module = module
        self.images = tuple(tuple(tuple(r) for r in m) for m in images)
        if len(self.images) != algebra.dim:
            raise ValueError("need one image per basis element")
        self.name = name

    def operator(self, a: AlgebraElement) -> ModuleOperator:
        m = self.module
        z = m.over.zero()
        mat = [[z] * m.rank for _ in range(m.rank)]
        for b, c in enumerate(a.coords):
            if c:
                img = self.images[b]
                for i in range(m.rank):
                    for j in range(m.rank):
                        if img[i][j]:
                            mat[i][j] = mat[i][j] + img[i][j].scale(c)
        return ModuleOperator(m, m, mat)

    def basis_operator(self, b: int) -> ModuleOperator:
        return ModuleOperator(self.module, self.module, self.images[b])

    def act(self, a: AlgebraElement, x: ModuleElement) -> ModuleElement:
        return self.operator(a)(x)

    @cached_property
    def quotient_action(self) -> list:
        """``L[b]``: matrix of ``pi(e_b)`` on quotient coordinates."""
        return [self.basis_operator(b).quotient_matrix() for b in range(self.algebra.dim)]

    def quotient_action_of(self, a: AlgebraElement) -> list:
        q = self.module.quotient.dim
        z = self.module.over.zero_scalar
        m = [[z] * q for _ in range(q)]
        for b, c in enumerate(a.coords):
            if c:
                lb = self.quotient_action[b]
                for r in range(q):
                    for s in range(q):
                        if lb[r][s]:
                            m[r][s] = m[r][s] + c * lb[r][s]
        return m

    def __repr__(self):
        return f"Representation({self.algebra.name} on {self.module!r})"


def trivial_representation(m: InnerProductModule) -> Representation:
    """The scalars acting by multiplication (algebra must be the 1-dimensional one)."""
    from .algebra import scalars
    c = scalars(m.lam)
    return Representation(c, m, [identity_operator(m).matrix])


def check_representation(rho: Representation) -> Report:
    """``pi(ab) = pi(a) pi(b)``, ``pi(a^*) = pi(a)^*`` and ``pi(1) = 1``, all modulo the radical."""
    rep = Report("representation")
    alg, m = rho.algebra, rho.module
    B = [alg.basis(a) for a in range(alg.dim)]
    ops = [rho.basis_operator(a) for a in range(alg.dim)]
    bad = None
    for a, b in itertools.product(range(alg.dim), repeat=2):
        if not rho.operator(B[a] * B[b]).equal_mod_radical(ops[a].compose(ops[b])):
            bad = (alg.labels[a], alg.labels[b])
            break
    rep.add("multiplicative", bad is None, bad)
    bad = None
    gens = m.generators()
    for a in range(alg.dim):
        star_op = rho.operator(B[a].star())
        if not is_adjoint_pair(ops[a], star_op):
            bad = alg.labels[a]
            break
    rep.add("star", bad is None, bad)
    if alg.is_unital:
        one = rho.operator(alg.one())
        rep.add("unital", all(m.in_radical(one(g) - g) for g in gens))
    bad = None
    for a in range(alg.dim):
        for r in m.radical:
            if not m.in_radical(ops[a](m.from_scalar(r))):
                bad = alg.labels[a]
                break
        if bad:
            break
    rep.add("radical_invariant", bad is None, bad)
    return rep


def direct_sum_representation(r1: Representation, r2: Representation) -> Representation:
    _same_algebra(r1.algebra, r2.algebra)
    m = direct_sum(r1.module, r2.module)
    k1 = r1.module.rank
    z = m.over.zero()
    imgs = []
    for a in range(r1.algebra.dim):
        mat = [[z] * m.rank for _ in range(m.rank)]
        for i, row in enumerate(r1.images[a]):
            for j, v in enumerate(row):
                mat[i][j] = v
        for i, row in enumerate(r2.images[a]):
            for j, v in enumerate(row):
                mat[k1 + i][k1 + j] = v
        imgs.append(mat)
    return Representation(r1.algebra, m, imgs)


def check_intertwiner(T: ModuleOperator, rho: Representation, rho2: Representation) -> Report:
    rep = Report("intertwiner")
    rep.add("well_defined", all(T.target.in_radical(T(T.source.from_scalar(r))) for r in T.source.radical))
    bad = None
    for a in range(rho.algebra.dim):
        lhs = T.compose(rho.basis_operator(a))
        rhs = rho2.basis_operator(a).compose(T)
        if not lhs.equal_mod_radical(rhs):
            bad = rho.algebra.labels[a]
            break
    rep.add("intertwines", bad is None, bad)
    try:
        adjoint(T)
        rep.add("adjointable", True)
    except NotAdjointable as e:
        rep.add("adjointable", False, str(e))
    return rep


def is_isometric(T: ModuleOperator) -> bool:
    gens = T.source.generators()
    imgs = [T(g) for g in gens]
    return all(inner_product(imgs[i], imgs[j]) == T.source.gram[i][j]
               for i in range(len(gens)) for j in range(len(gens)))


def is_surjective(T: ModuleOperator) -> bool:
    return linalg.rank(_rows_of(T.quotient_matrix())) == T.target.quotient.dim if T.target.quotient.dim else True


def _rows_of(m: list) -> list:
    """Transpose so that the column space becomes a row space."""
    if not m:
        return []
    return [list(c) for c in zip(*m)]


def is_unitary(T: ModuleOperator) -> bool:
    return is_isometric(T) and is_surjective(T)


# -- the isometric isomorphism solver ----------------------------------------------------

YES, NO, UNKNOWN = "yes", "no", "unknown"


@dataclass
class SearchResult:
    verdict: str
    witness: Optional[ModuleOperator] = None
    reason: str = ""

    def __bool__(self):
        return self.verdict == YES


def two_squares(m: Scalar):
    """``c`` in Q(i) with ``|c|^2 = m`` for a positive rational ``m``, or ``None``."""
    from gmpy2 import is_square, isqrt, mpq
    q = mpq(m.re.coeffs[0]) if m.re.coeffs else mpq(0)
    if q <= 0 or m.degree() > 0 or not m.is_real():
        return None
    p, r = q.numerator, q.denominator
    n = p * r
    a = isqrt(n)
    while a >= 0:
        rest = n - a * a
        if is_square(rest):
            return Scalar(mpq(a, r), mpq(isqrt(rest), r), m.lam)
        a -= 1
    return None


def _rational_sqrt(q):
    from gmpy2 import is_square, isqrt, mpq
    q = mpq(q)
    if q < 0 or not is_square(q.numerator) or not is_square(q.denominator):
        return None
    return mpq(isqrt(q.numerator), isqrt(q.denominator))


def _poly_sqrt(m: Scalar):
    """Exact square root in Q[l] of a real lambda-polynomial, if any."""
    from gmpy2 import mpq
    coeffs = list(m.re.coeffs)
    if m.im.coeffs or not coeffs or len(coeffs) % 2 == 0:
        return None
    r0 = _rational_sqrt(coeffs[0])
    if not r0:
        return None
    root = [r0]
    for k in range(1, (len(coeffs) - 1) // 2 + 1):
        s = sum((root[j] * root[k - j] for j in range(1, k)), mpq(0))
        root.append((mpq(coeffs[k]) - s) / (2 * r0))
    cand = Scalar(tuple(root), 0, True)
    return cand if cand * cand == m else None


def norm_root(m: Scalar):
    """Some ``c`` with ``c conj(c) = m``, or ``None`` when the search finds none."""
    if m.degree() <= 0:
        c = two_squares(m.at_zero() if m.lam else m)
        return None if c is None else (c.lift() if m.lam else c)
    return _poly_sqrt(m)


def _algebra_generators(alg: AlgebraPresentation) -> list:
    """A small set of basis indices generating ``alg`` as a unital algebra."""
    cached = getattr(alg, "_generator_cache", None)
    if cached is not None:
        return cached
    B = [alg.basis(a) for a in range(alg.dim)]
    span = linalg.Span(alg.dim, alg.lam)
    words = []
    if alg.is_unital:
        span.add(alg.unit)
        words.append(alg.one())
    gens = []
    for a in range(alg.dim):
        if span.contains(B[a].coords):
            continue
        gens.append(a)
        queue = list(words) + [B[a]]
        if span.add(B[a].coords):
            words.append(B[a])
        while queue:
            w = queue.pop()
            for g in gens:
                for p in (w * B[g], B[g] * w):
                    if span.add(p.coords):
                        words.append(p)
                        queue.append(p)
        if span.dim == alg.dim:
            break
    object.__setattr__(alg, "_generator_cache", gens)
    return gens


def solve_intertwiners(source: InnerProductModule, target: InnerProductModule,
                       actions: Sequence = ()) -> list:
    """Basis of right-linear maps ``source/rad -> target/rad`` intertwining each pair of representations.

    A map is stored as its generator images in target quotient coordinates
    (a list of ``rank(source)`` vectors of length ``dim target/rad``).
    """
    _same_algebra(source.over, target.over)
    ks, d = source.rank, source.over.dim
    qt = target.quotient
    q = qt.dim
    nvar = ks * q
    if nvar == 0:
        return []
    R = target.right_action
    lam = source.lam
    z = Scalar.zero(lam)
    span = linalg.Span(nvar, lam)

    def image_rows(vec):
        """Linear form ``t -> image of sum vec_(i,a) g_i e_a`` as a q x nvar matrix."""
        rows = [[z] * nvar for _ in range(q)]
        for s, c in enumerate(vec):
            if c:
                i, a = divmod(s, d)
                ra = R[a]
                for r in range(q):
                    for u in range(q):
                        if ra[r][u]:
                            rows[r][i * q + u] = rows[r][i * q + u] + c * ra[r][u]
        return rows

    for r in source.radical:
        for row in image_rows(r):
            span.add(row)
    for rho_s, rho_t in actions:
        for b in _algebra_generators(rho_s.algebra):
            op = rho_s.basis_operator(b)
            lt = rho_t.quotient_action[b]
            for j in range(ks):
                img = op(source.generator(j)).scalar_coords()
                rows = image_rows(img)
                for r in range(q):
                    for u in range(q):
                        if lt[r][u]:
                            rows[r][j * q + u] = rows[r][j * q + u] - lt[r][u]
                for row in rows:
                    span.add(row)
            if span.dim == nvar:
                return []
    basis = linalg.nullspace(span.rows, nvar) if span.rows else linalg.identity(nvar, lam)
    return [[v[i * q:(i + 1) * q] for i in range(ks)] for v in basis]


def _operator_from_images(source, target, imgs) -> ModuleOperator:
    qt = target.quotient
    cols = [target.from_scalar(qt.lift(u)).coords for u in imgs]
    mat = [[cols[j][i] for j in range(source.rank)] for i in range(target.rank)]
    return ModuleOperator(source, target, mat)


def _apply_quot(m: list, u: list) -> list:
    return linalg.matvec(m, u) if m else []


def _qip(target: InnerProductModule, u: list, v: list) -> AlgebraElement:
    g = target.quotient_gram
    acc = target.over.zero()
    for s, a in enumerate(u):
        if a:
            ac = a.conj()
            for t, b in enumerate(v):
                if b and g[s][t]:
                    acc = acc + g[s][t].scale(ac * b)
    return acc


def _pieces(source, target, actions, basis: list) -> list:
    """Split the solution space by central idempotents on each side of the target."""
    projectors = []
    D = target.over
    if D.exact_class and len(D.blocks) > 1:
        projectors.append([target.right_action_of(z) for z in D.central_idempotents()])
    for rho_s, rho_t in actions:
        A = rho_t.algebra
        if A.exact_class and len(A.blocks) > 1:
            projectors.append([rho_t.quotient_action_of(z) for z in A.central_idempotents()])
    pieces = [basis]
    for family in projectors:
        new = []
        for piece in pieces:
            for p in family:
                sp = linalg.Span(len(piece[0]) * len(piece[0][0]) if piece else 0, source.lam)
                imgs = []
                for t in piece:
                    cand = [_apply_quot(p, u) for u in t]
                    if sp.add([x for u in cand for x in u]):
                        imgs.append(cand)
                if imgs:
                    new.append(imgs)
        pieces = new
    return pieces


def _gram_of(target, imgs_a: list, imgs_b: list) -> list:
    return [[_qip(target, u, v) for v in imgs_b] for u in imgs_a]


def _combine(pieces_coeffs) -> list:
    out = None
    for c, t in pieces_coeffs:
        scaled = [[c * x for x in u] for u in t]
        out = scaled if out is None else [[a + b for a, b in zip(u, v)] for u, v in zip(out, scaled)]
    return out


def find_isometry(source: InnerProductModule, target: InnerProductModule, actions: Sequence = (),
                  budget: int = 64, require_isometry: bool = True,
                  extra_check=None) -> SearchResult:
    """Look for a surjective (isometric) right-linear map ``source -> target``
    intertwining the given pairs of left representations.

    Exact linear algebra yields the intertwiner space; central idempotents
    split it into pieces.  One-dimensional orthogonal pieces are decided
    exactly (the scale must be a norm from Q(i)); larger pieces are searched
    on a small coefficient grid and report ``unknown`` when nothing is found.
    ``budget`` caps the quotient dimensions involved.
    """
    qs, qt = source.quotient.dim, target.quotient.dim
    if max(qs, qt) > budget:
        return SearchResult(UNKNOWN, None, f"dimension {max(qs, qt)} exceeds budget {budget}")
    if qs != qt:
        return SearchResult(NO, None, f"quotient dimensions differ ({qs} vs {qt})")
    if qs == 0 and qt == 0:
        return SearchResult(YES, zero_operator(source, target))
    basis = solve_intertwiners(source, target, actions)
    if not basis:
        return SearchResult(NO, None, "no nonzero intertwiner")

    def finish(imgs, how):
        T = _operator_from_images(source, target, imgs)
        if require_isometry and not is_isometric(T):
            return None
        if not is_surjective(T):
            return None
        if extra_check is not None and not extra_check(T):
            return None
        return SearchResult(YES, T, how)

    gram = source.gram
    k = source.rank
    if not require_isometry:
        for t in basis:
            r = finish(t, "basis element")
            if r:
                return r
        for cs in _grid(len(basis), budget):
            cs = _lift_grid(cs, source.lam)
            r = finish(_combine(zip(cs, basis)), "grid")
            if r:
                return r
        return SearchResult(UNKNOWN, None, "no bijective intertwiner on the grid")

    pieces = _pieces(source, target, actions, basis)
    flat = [t for piece in pieces for t in piece]
    separable = all(len(p) == 1 for p in pieces)
    if separable:
        for a, b in itertools.combinations(range(len(flat)), 2):
            if any(any(row) for row in _gram_of(target, flat[a], flat[b])):
                separable = False
                break
    if separable:
        hs = [_gram_of(target, t, t) for t in flat]
        # sum_p m_p H_p = G, read coordinate-wise
        lam = source.lam
        rows, rhs = [], []
        for i in range(k):
            for j in range(k):
                for c in range(source.over.dim):
                    rows.append([h[i][j].coords[c] for h in hs])
                    rhs.append(gram[i][j].coords[c])
        sol = linalg.solve(rows, rhs)
        if sol is None:
            return SearchResult(NO, None, "Gram is not a combination of the piece Grams")
        coeffs = []
        for mp in sol:
            if not mp:
                coeffs.append(mp)
                continue
            if not mp.is_real() or not mp.is_strictly_positive():
                return SearchResult(NO, None, f"piece scale {mp} is not positive")
            c = norm_root(mp)
            if c is None:
                reason = f"piece scale {mp} is not a norm from Q(i)"
                return SearchResult(NO if mp.degree() <= 0 else UNKNOWN, None, reason)
            coeffs.append(c)
        r = finish(_combine(zip(coeffs, flat)), "pieces")
        if r:
            return r
        return SearchResult(NO, None, "isometric solution is not surjective")
    # grid search over the whole space with a common rescaling
    tries = 0
    for cs in _grid(len(flat), budget):
        cs = _lift_grid(cs, source.lam)
        tries += 1
        imgs = _combine(zip(cs, flat))
        h = _gram_of(target, imgs, imgs)
        mu = _common_ratio(h, gram)
        if mu is None or not mu.is_real() or not mu.is_strictly_positive():
            continue
        c = norm_root(mu)
        if c is None:
            continue
        inv = c.inverse() if c.is_unit() else None
        if inv is None:
            continue
        r = finish([[inv * x for x in u] for u in imgs], "grid")
        if r:
            return r
    return SearchResult(UNKNOWN, None, f"grid search exhausted after {tries} candidates")


def _grid(n: int, budget: int):
    """Coefficient vectors over {0, 1, -1, i, -i} with first nonzero entry 1, at most ``budget**2`` of them."""
    vals = [Scalar(0), Scalar(1), Scalar(-1), Scalar(0, 1), Scalar(0, -1)]
    count = 0
    limit = budget * budget
    for cs in itertools.product(range(5), repeat=n):
        nz = next((c for c in cs if c), None)
        if nz != 1:
            continue
        yield [vals[c] for c in cs]
        count += 1
        if count >= limit:
            return


def _common_ratio(h, g):
    mu = None
    for hr, gr in zip(h, g):
        for a, b in zip(hr, gr):
            for x, y in zip(a.coords, b.coords):
                if not y:
                    if x:
                        return None
                    continue
                try:
                    r = x.exquo(y)
                except ArithmeticError:
                    return None
                if mu is None:
                    mu = r
                elif mu != r:
                    return None
    return mu


def _lift_grid(cs, lam):
    return [c.lift() if lam else c for c in cs]


def are_unitarily_equivalent(rho: Representation, rho2: Representation, budget: int = 64) -> SearchResult:
    if rho.module.over != rho2.module.over or rho.algebra != rho2.algebra:
        return SearchResult(NO, None, "incompatible algebras")
    return find_isometry(rho.module, rho2.module, [(rho, rho2)], budget)
