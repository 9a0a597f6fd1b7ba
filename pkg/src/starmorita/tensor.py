"""Conjugate modules, the correspondence between inner products and bimodule maps, and the internal tensor product."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import linalg
from .algebra import AlgebraElement, AlgebraPresentation, membership_aplus
from .modules import (InnerProductModule, ModuleElement, ModuleOperator, Representation, SearchResult,
                      _columns, _same_algebra, canonical_module, find_isometry, inner_product,
                      is_completely_positive, trivial_representation)
from .ring import Scalar


# -- conjugate modules ----------------------------------------------------------------

class ConjugateModule:
    """The left ``D``-module of conjugates ``x-bar`` with ``d x-bar = (x d^*)-bar``."""

    def __init__(self, underlying: InnerProductModule):
        self.underlying = underlying

    @property
    def over(self) -> AlgebraPresentation:
        return self.underlying.over

    def bar(self, x: ModuleElement) -> "ConjugateElement":
        return ConjugateElement(self, x)

    def __eq__(self, other):
        return isinstance(other, ConjugateModule) and self.underlying == other.underlying

    def __hash__(self):
        return hash(self.underlying)


class ConjugateElement:
    __slots__ = ("module", "value")

    def __init__(self, module: ConjugateModule, value: ModuleElement):
        self.module = module
        self.value = value

    def unbar(self) -> ModuleElement:
        return self.value

    def scale(self, s) -> "ConjugateElement":
        """``alpha x-bar = (x conj(alpha))-bar``."""
        s = s if isinstance(s, Scalar) else Scalar(s, 0, self.module.over.lam)
        return ConjugateElement(self.module, self.value.scale(s.conj()))

    def left(self, d: AlgebraElement) -> "ConjugateElement":
        return ConjugateElement(self.module, self.value.right(d.star()))

    def __add__(self, other):
        return ConjugateElement(self.module, self.value + other.value)

    def __eq__(self, other):
        return isinstance(other, ConjugateElement) and self.value == other.value

    def __hash__(self):
        return hash(self.value)


def conjugate_module(m: InnerProductModule) -> ConjugateModule:
    return ConjugateModule(m)


# -- the correspondence Phi --------------------------------------------------------

class InvalidPhi(ValueError):
    pass


@dataclass(frozen=True)
class TensorTerm:
    """``left . (g_i-bar (x) g_j) . right``."""

    left: AlgebraElement
    i: int
    j: int
    right: AlgebraElement


class EElement:
    """Finite sum of generator terms in ``H-bar (x) H``."""

    def __init__(self, rank: int, terms: Sequence[TensorTerm]):
        self.rank = rank
        self.terms = tuple(terms)

    @classmethod
    def pure(cls, x: ModuleElement, y: ModuleElement) -> "EElement":
        """``x-bar (x) y = sum x_i^* . (g_i-bar (x) g_j) . y_j``."""
        terms = [TensorTerm(xi.star(), i, j, yj)
                 for i, xi in enumerate(x.coords) if xi
                 for j, yj in enumerate(y.coords) if yj]
        return cls(x.module.rank, terms)

    def involution(self) -> "EElement":
        """``I(d . (x-bar (x) y) . d') = d'^* . (y-bar (x) x) . d^*``."""
        return EElement(self.rank, [TensorTerm(t.right.star(), t.j, t.i, t.left.star()) for t in self.terms])

    def bimodule(self, d: AlgebraElement, d2: AlgebraElement) -> "EElement":
        return EElement(self.rank, [TensorTerm(d * t.left, t.i, t.j, t.right * d2) for t in self.terms])

    def __add__(self, other):
        return EElement(self.rank, self.terms + other.terms)

    def canonical(self) -> tuple:
        """Terms collected so that equal elements of the free bimodule compare equal."""
        acc = {}
        for t in self.terms:
            key = (t.i, t.j)
            acc.setdefault(key, []).append((t.left, t.right))
        out = []
        for key in sorted(acc):
            alg = acc[key][0][0].algebra
            # the free bimodule on a pair is D (x)_C D; record the tensor coefficients
            coef = {}
            for l, r in acc[key]:
                for a, x in enumerate(l.coords):
                    if x:
                        for b, y in enumerate(r.coords):
                            if y:
                                coef[(a, b)] = coef.get((a, b), alg.zero_scalar) + x * y
            out.append((key, tuple(sorted((k, v) for k, v in coef.items() if v))))
        return tuple(out)

    def __eq__(self, other):
        return isinstance(other, EElement) and self.canonical() == other.canonical()


class PhiMap:
    """Bimodule map ``H-bar (x) H -> D`` fixed by its generator values ``values[i][j]``."""

    def __init__(self, over: AlgebraPresentation, values, check: bool = True):
        self.over = over
        self.values = tuple(tuple(r) for r in values)
        if check:
            k = len(self.values)
            for i in range(k):
                for j in range(k):
                    if self.values[i][j].star() != self.values[j][i]:
                        raise InvalidPhi(f"Phi(z)^* != Phi(I(z)) at generators ({i}, {j})")

    @property
    def rank(self) -> int:
        return len(self.values)

    def __call__(self, z: EElement) -> AlgebraElement:
        acc = self.over.zero()
        for t in z.terms:
            acc = acc + t.left * self.values[t.i][t.j] * t.right
        return acc


def phi_from_inner(m: InnerProductModule) -> PhiMap:
    return PhiMap(m.over, m.gram)


def inner_from_phi(phi: PhiMap) -> InnerProductModule:
    return InnerProductModule(phi.over, [[phi.values[i][j] for j in range(phi.rank)] for i in range(phi.rank)])


def phi_positive_on(phi: PhiMap, m: InnerProductModule, xs: Sequence[ModuleElement]) -> bool:
    """``Phi(sum_j x_j-bar (x) x_j)`` lies in ``D^+`` for the given vectors."""
    z = EElement(phi.rank, [])
    for x in xs:
        z = z + EElement.pure(x, x)
    return bool(membership_aplus(phi(z)))


# -- internal tensor product ----------------------------------------------------------

class ActionMismatch(ValueError):
    pass


@dataclass
class TensorModule:
    """``F (x)_B E`` for ``F`` over ``B`` carrying a left ``C``-action and ``E`` over ``A`` carrying a left ``B``-action.

    ``full`` is the free ``A``-module on all pairs ``f_i (x) e_j``; ``result``
    keeps the generators ``kept`` and ``quotient_map`` expresses every pair in
    them.  ``representation`` is the induced ``C``-action on ``result``.
    """

    left_factor: Representation
    right_factor: Representation
    full: InnerProductModule
    result: InnerProductModule
    kept: list
    quotient_map: ModuleOperator
    representation: Representation

    def pair_index(self, i: int, j: int) -> int:
        return i * self.right_factor.module.rank + j

    def full_element(self, x: ModuleElement, y: ModuleElement) -> ModuleElement:
        """``x (x) y = sum_i f_i (x) pi(x_i) y`` in the free module on pairs."""
        E = self.right_factor
        kE = E.module.rank
        coords = [self.full.over.zero()] * self.full.rank
        for i, xi in enumerate(x.coords):
            if xi:
                v = E.operator(xi)(y)
                for j, c in enumerate(v.coords):
                    coords[i * kE + j] = coords[i * kE + j] + c
        return ModuleElement(self.full, tuple(coords))

    def element(self, x: ModuleElement, y: ModuleElement) -> ModuleElement:
        return self.quotient_map(self.full_element(x, y))


def tensor_gram(F: InnerProductModule, E: Representation) -> list:
    """``<f_i (x) e_j, f_i' (x) e_j'> = <e_j, pi(G^F_ii') e_j'>``."""
    kF, kE = F.rank, E.module.rank
    GE = E.module.gram
    zero = E.module.over.zero()
    gram = [[zero] * (kF * kE) for _ in range(kF * kE)]
    for i in range(kF):
        for i2 in range(kF):
            p = E.operator(F.gram[i][i2]).matrix
            for j in range(kE):
                for j2 in range(kE):
                    acc = zero
                    for l in range(kE):
                        if GE[j][l] and p[l][j2]:
                            acc = acc + GE[j][l] * p[l][j2]
                    gram[i * kE + j][i2 * kE + j2] = acc
    return gram


def tensor_action(Fr: Representation, E: Representation) -> list:
    """Block ``(l, i)`` of the image of ``c`` is ``pi_E(M_li)`` where ``M = pi_F(c)``."""
    kF, kE = Fr.module.rank, E.module.rank
    zero = E.module.over.zero()
    out = []
    for c in range(Fr.algebra.dim):
        M = Fr.images[c]
        big = [[zero] * (kF * kE) for _ in range(kF * kE)]
        for l in range(kF):
            for i in range(kF):
                if M[l][i]:
                    blk = E.operator(M[l][i]).matrix
                    for m in range(kE):
                        for j in range(kE):
                            big[l * kE + m][i * kE + j] = blk[m][j]
        out.append(big)
    return out


def reduce_generators(full: InnerProductModule, order: Sequence[int] | None = None):
    """Greedy generator subset whose right span covers the quotient, plus the expansion of every generator in it."""
    q = full.quotient
    d = full.over.dim
    span = linalg.FlatSpan(q.dim, full.lam)
    kept = []
    cols = []
    order = range(full.rank) if order is None else order
    for i in order:
        if span.full:
            break
        imgs = [full.project(full.generator(i).right(full.over.basis(a))) for a in range(d)]
        grew = False
        for v in imgs:
            grew = span.add(v) or grew
        if grew:
            kept.append(i)
            cols.extend(imgs)
    kept.sort()
    cols = []
    for i in kept:
        cols.extend(full.project(full.generator(i).right(full.over.basis(a))) for a in range(d))
    mat = _columns(cols, q.dim) if cols else []
    expansions = []
    for i in range(full.rank):
        target = full.project(full.generator(i))
        if not kept:
            expansions.append([])
            continue
        sol = linalg.solve(mat, target)
        if sol is None:
            raise ArithmeticError("generator expansion needs denominators")
        expansions.append([AlgebraElement(full.over, tuple(sol[k * d:(k + 1) * d])) for k in range(len(kept))])
    return kept, expansions


def reduced_module(full: InnerProductModule, rep_images: list | None = None, algebra=None, name=""):
    """Present the quotient of ``full`` on a spanning subset of generators.

    Returns ``(module, quotient_map, representation_or_None, kept)``.
    """
    kept, exp = reduce_generators(full)
    over = full.over
    gram = [[full.gram[a][b] for b in kept] for a in kept]
    res = InnerProductModule(over, gram, name)
    z = over.zero()
    qmap = [[exp[j][k] if exp[j] else z for j in range(full.rank)] for k in range(len(kept))]
    quotient_map = ModuleOperator(full, res, qmap)
    rep = None
    if rep_images is not None:
        images = []
        for big in rep_images:
            mat = [[z] * len(kept) for _ in range(len(kept))]
            for col, j in enumerate(kept):
                for l in range(full.rank):
                    mlj = big[l][j]
                    if mlj:
                        for k in range(len(kept)):
                            if exp[l][k]:
                                mat[k][col] = mat[k][col] + exp[l][k] * mlj
            images.append(mat)
        rep = Representation(algebra, res, images, name)
    return res, quotient_map, rep, kept


def internal_tensor(F: Representation, E: Representation, verify: bool = True) -> TensorModule:
    """Rieffel tensor product, reduced to a spanning set of generator pairs.

    ``F`` is a representation of ``C`` on a module over ``B`` and ``E`` a
    representation of ``B`` on a module over ``A``.
    """
    if F.module.over != E.algebra:
        raise ActionMismatch(f"{F.module.over!r} does not act on {E.module!r}")
    gram = tensor_gram(F.module, E)
    full = InnerProductModule(E.module.over, gram, f"{F.module.name}(x){E.module.name}")
    big = tensor_action(F, E)
    full_rep = Representation(F.algebra, full, big)
    if verify:
        _check_radical_invariant(full_rep)
    res, qmap, rep, kept = reduced_module(full, big, F.algebra, f"{F.module.name}(x){E.module.name}")
    return TensorModule(F, E, full, res, kept, qmap, rep)


def _check_radical_invariant(rep: Representation) -> None:
    from .modules import _algebra_generators
    m = rep.module
    for b in _algebra_generators(rep.algebra):
        op = rep.basis_operator(b)
        for r in m.radical:
            if not m.in_radical(op(m.from_scalar(r))):
                raise AssertionError("radical of the tensor Gram is not invariant under the left action")


def balancing_relations(t: TensorModule) -> list:
    """Elements ``r (x) y`` and ``x (x) s`` built from the factor radicals, in the free module on pairs."""
    F, E = t.left_factor.module, t.right_factor.module
    out = []
    for r in F.radical:
        rel = F.from_scalar(r)
        for y in E.generators():
            out.append(t.full_element(rel, y))
    for s in E.radical:
        rel = E.from_scalar(s)
        for x in F.generators():
            out.append(t.full_element(x, rel))
    return out


def rieffel_inner(t: TensorModule, x1, y1, x2, y2) -> AlgebraElement:
    """``<y1, <x1, x2>_B . y2>_A`` straight from the factors."""
    E = t.right_factor
    return inner_product(y1, E.operator(inner_product(x1, x2))(y2))


def positivity_of_tensor(t: TensorModule, sample=None):
    v = is_completely_positive(t.result, sample)
    return v


# -- isomorphism search -----------------------------------------------------------------

def find_isometric_isomorphism(x, y, budget: int = 64) -> SearchResult:
    """Isometric isomorphism between modules, representations or tensor results."""
    if isinstance(x, TensorModule):
        x = x.representation
    if isinstance(y, TensorModule):
        y = y.representation
    if isinstance(x, Representation) and isinstance(y, Representation):
        _same_algebra(x.algebra, y.algebra)
        return find_isometry(x.module, y.module, [(x, y)], budget)
    if isinstance(x, InnerProductModule) and isinstance(y, InnerProductModule):
        return find_isometry(x, y, (), budget)
    raise TypeError("expected two modules or two representations")


def induced_from_functional(omega) -> Representation:
    """``A`` with ``<a, b> = omega(a^* b)`` and left multiplication, tensored with the scalars."""
    from .algebra import functional_gram, scalars
    from .modules import left_matrix
    alg = omega.algebra
    c = scalars(alg.lam)
    g = functional_gram(omega)
    F = InnerProductModule(c, [[c.element([v]) for v in row] for row in g], "A_omega")
    images = []
    for b in range(alg.dim):
        lm = left_matrix(alg.basis(b))
        images.append([[c.element([lm[r][s]]) for s in range(alg.dim)] for r in range(alg.dim)])
    Fr = Representation(alg, F, images)
    E = trivial_representation(canonical_module(c))
    return internal_tensor(Fr, E).representation
