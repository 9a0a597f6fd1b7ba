"""Equivalence bimodules, Picard groupoid arrows and their actions.

A ``(B, A)``-bimodule is a representation of ``B`` on a right ``A``-module
together with a ``B``-valued inner product, supplied as a function of two
module elements (linear in the first argument).  Composition is the internal
tensor product and the inverse is the conjugate bimodule with the two inner
products exchanged.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import linalg
from .algebra import (AlgebraElement, AlgebraPresentation, block_matrix_psd, full_matrix_algebra,
                      matrix_algebra, matrix_element, scalars)
from .modules import (NO, UNKNOWN, YES, InnerProductModule, ModuleElement, Representation, SearchResult,
                      _algebra_generators, _columns, _same_algebra, canonical_module, check_representation,
                      direct_sum, find_isometry, inner_product, is_completely_positive,
                      solve_intertwiners, trivial_representation)
from .report import Report
from .ring import Scalar
from .tensor import internal_tensor

STRONG, STAR, RING = "strong", "star", "ring"
_RANK = {RING: 0, STAR: 1, STRONG: 2}


class LevelError(ValueError):
    pass


class MiddleMismatch(ValueError):
    pass


class NotProjective(ValueError):
    pass


# -- automorphisms ------------------------------------------------------------

class Automorphism:
    """Linear map given by the images of the basis elements."""

    def __init__(self, algebra: AlgebraPresentation, images: Sequence[AlgebraElement], name: str = ""):
        self.algebra = algebra
        self.images = tuple(images)
        self.name = name

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        acc = self.algebra.zero()
        for a, c in enumerate(x.coords):
            if c:
                acc = acc + self.images[a].scale(c)
        return acc

    def inverse(self) -> "Automorphism":
        k = self.algebra.dim
        mat = [[self.images[a].coords[r] for a in range(k)] for r in range(k)]
        unit = [[Scalar.one(self.algebra.lam) if r == c else Scalar.zero(self.algebra.lam) for r in range(k)]
                for c in range(k)]
        sols = linalg.solve_many(mat, unit)
        if any(s is None for s in sols):
            raise ValueError("map is not invertible")
        return Automorphism(self.algebra, [AlgebraElement(self.algebra, tuple(s)) for s in sols],
                            f"{self.name}^-1")

    def is_star_automorphism(self) -> bool:
        alg = self.algebra
        B = [alg.basis(a) for a in range(alg.dim)]
        for a, b in itertools.product(range(alg.dim), repeat=2):
            if self(B[a] * B[b]) != self.images[a] * self.images[b]:
                return False
        if any(self(B[a].star()) != self.images[a].star() for a in range(alg.dim)):
            return False
        try:
            self.inverse()
        except ValueError:
            return False
        return True


def identity_automorphism(alg: AlgebraPresentation) -> Automorphism:
    return Automorphism(alg, [alg.basis(a) for a in range(alg.dim)], "id")


def block_automorphism(alg: AlgebraPresentation, block_perm: Sequence[int],
                       index_perms: Sequence[Sequence[int]]) -> Automorphism:
    """Move block ``b`` to ``block_perm[b]`` and permute its matrix indices by ``index_perms[b]``."""
    z = alg.zero_scalar
    images = []
    for a in range(alg.dim):
        mats = alg.embed(alg.basis(a))
        out = [[[z] * n for _ in range(n)] for n in alg.blocks]
        for b, m in enumerate(mats):
            tb, p = block_perm[b], index_perms[b]
            for r, row in enumerate(m):
                for c, v in enumerate(row):
                    if v:
                        out[tb][p[r]][p[c]] = v
        images.append(alg.from_blocks(out))
    return Automorphism(alg, images, f"perm{tuple(block_perm)}")


def candidate_automorphisms(alg: AlgebraPresentation) -> list:
    """Block permutations among equal sizes, with index permutations inside the blocks."""
    if not alg.exact_class:
        raise ValueError(f"{alg!r} is not a matrix or function algebra")
    nb = len(alg.blocks)
    out = []
    for bp in itertools.permutations(range(nb)):
        if any(alg.blocks[b] != alg.blocks[bp[b]] for b in range(nb)):
            continue
        for ips in itertools.product(*[list(itertools.permutations(range(n))) for n in alg.blocks]):
            out.append(block_automorphism(alg, bp, ips))
    return out


# -- bimodules --------------------------------------------------------------------

@dataclass(eq=False)
class Bimodule:
    """``rep`` is the left ``B``-action on a right ``A``-module; ``left_ip`` is the ``B``-valued product."""

    left_algebra: AlgebraPresentation
    right_algebra: AlgebraPresentation
    rep: Representation
    left_ip: Callable
    name: str = ""

    @property
    def module(self) -> InnerProductModule:
        return self.rep.module

    def right_ip(self, x: ModuleElement, y: ModuleElement) -> AlgebraElement:
        return inner_product(x, y)

    def act(self, b: AlgebraElement, x: ModuleElement) -> ModuleElement:
        return self.rep.operator(b)(x)

    def quotient_vectors(self) -> list:
        q = self.module.quotient
        return [self.module.from_scalar(q.unit(s)) for s in range(q.dim)]

    def left_table(self) -> list:
        vs = self.quotient_vectors()
        return [[self.left_ip(x, y) for y in vs] for x in vs]

    def __repr__(self):
        return f"Bimodule({self.name or '?'}: {self.left_algebra.name} -> {self.right_algebra.name})"


def left_multiplication_images(alg: AlgebraPresentation) -> list:
    return [[[alg.basis(a)]] for a in range(alg.dim)]


def identity_bimodule(alg: AlgebraPresentation) -> Bimodule:
    """``A`` over itself with ``<a, b>_A = a^* b`` and ``_A<a, b> = a b^*``."""
    m = canonical_module(alg)
    rep = Representation(alg, m, left_multiplication_images(alg), f"id({alg.name})")
    return Bimodule(alg, alg, rep, lambda x, y: x.coords[0] * y.coords[0].star(), f"id({alg.name})")


def twisted_bimodule(alg: AlgebraPresentation, alpha: Automorphism) -> Bimodule:
    """``A`` with left action ``b.x = alpha(b) x`` and ``_A<x, y> = alpha^-1(x y^*)``."""
    m = canonical_module(alg)
    inv = alpha.inverse()
    rep = Representation(alg, m, [[[alpha.images[a]]] for a in range(alg.dim)])
    return Bimodule(alg, alg, rep, lambda x, y: inv(x.coords[0] * y.coords[0].star()),
                    f"{alg.name}_{alpha.name}")


def column_bimodule(alg: AlgebraPresentation, n: int, left: Optional[AlgebraPresentation] = None) -> Bimodule:
    """``A^n`` as a ``(M_n(A), A)``-bimodule with ``_{M_n}<x, y> = (x_I y_J^*)``."""
    mn = matrix_algebra(alg, n) if left is None else left
    m = canonical_module(alg, n)
    z = alg.zero()
    images = []
    d = alg.dim
    for I in range(n):
        for J in range(n):
            for a in range(d):
                mat = [[z] * n for _ in range(n)]
                mat[I][J] = alg.basis(a)
                images.append(mat)
    rep = Representation(mn, m, images, f"{alg.name}^{n}")

    def lip(x, y):
        return matrix_element(alg, mn, [[x.coords[I] * y.coords[J].star() for J in range(n)] for I in range(n)])

    return Bimodule(mn, alg, rep, lip, f"{alg.name}^{n}")


def sharp_matrix_algebra(signs: Sequence[int]) -> AlgebraPresentation:
    """``M_n`` with the indefinite involution ``b -> J b^dagger J``, ``J = diag(signs)``."""
    n = len(signs)
    std = full_matrix_algebra(n)
    inv = []
    for a in range(std.dim):
        i, j = divmod(a, n)
        s = signs[i] * signs[j]
        inv.append(((j * n + i, Scalar(s)),))
    return AlgebraPresentation(std.labels, std.structure, tuple(inv), std.unit, "generic", None, None, False,
                               f"M{n}{''.join('+' if s > 0 else '-' for s in signs)}")


def signature_bimodule(signs: Sequence[int] = (1, -1)) -> Bimodule:
    """``C^n`` between ``(M_n, #)`` and ``C`` with Gram ``J`` and ``_B<x, y> = x y^dagger J``."""
    n = len(signs)
    c = scalars()
    b = sharp_matrix_algebra(signs)
    z = c.zero()
    gram = [[c.element([signs[i]]) if i == j else z for j in range(n)] for i in range(n)]
    m = InnerProductModule(c, gram, "signature")
    images = []
    for a in range(b.dim):
        i, j = divmod(a, n)
        images.append([[c.one() if (r, s) == (i, j) else z for s in range(n)] for r in range(n)])
    rep = Representation(b, m, images)

    def lip(x, y):
        coords = []
        for i in range(n):
            for j in range(n):
                coords.append(x.coords[i].coords[0] * y.coords[j].coords[0].conj() * signs[j])
        return b.element(coords)

    return Bimodule(b, c, rep, lip, "signature")


# -- verification ---------------------------------------------------------------------

def _span_dim(vectors, n, lam) -> int:
    sp = linalg.Span(n, lam)
    for v in vectors:
        sp.add(v)
        if sp.dim == n:
            break
    return sp.dim


def _commutant_dim(mats: list, q: int, lam: bool) -> int:
    """``dim {X : X M = M X for all M}``."""
    nvar = q * q
    span = linalg.Span(nvar, lam)
    z = Scalar.zero(lam)
    for M in mats:
        for r in range(q):
            for c in range(q):
                row = [z] * nvar
                for k in range(q):
                    if M[k][c]:
                        row[r * q + k] = row[r * q + k] + M[k][c]
                    if M[r][k]:
                        row[k * q + c] = row[k * q + c] - M[r][k]
                span.add(row)
    return nvar - span.dim


def check_equivalence_bimodule(E: Bimodule, level: str = STRONG, ring_budget: int = 16) -> Report:
    """Span, nondegeneracy, fullness and compatibility checks; complete positivity at level strong.

    At level ring only the spans, faithfulness and the double-commutant
    dimension counts are checked, which characterise invertible bimodules
    between semisimple algebras.
    """
    if level not in _RANK:
        raise LevelError(level)
    rep = Report(f"equivalence bimodule {E.name} at level {level}")
    m = E.module
    A, B = E.right_algebra, E.left_algebra
    q = m.quotient
    lam = m.lam
    vs = E.quotient_vectors()
    Lb = E.rep.quotient_action
    # B.E = E and E.A = E
    left_imgs = (linalg.matvec(Lb[b], [Scalar.one(lam) if t == s else Scalar.zero(lam) for t in range(q.dim)])
                 for b in range(B.dim) for s in range(q.dim))
    rep.add("left_span", _span_dim(left_imgs, q.dim, lam) == q.dim)
    right_imgs = (m.project(v.right(A.basis(a))) for v in vs for a in range(A.dim))
    rep.add("right_span", _span_dim(right_imgs, q.dim, lam) == q.dim)
    action = check_representation(E.rep)
    if level == RING:
        action.checks = [c for c in action.checks if c.name != "star"]
    rep.extend(action, "left_action_")
    if level == RING:
        faithful = _span_dim(([x for row in L for x in row] for L in Lb), q.dim * q.dim, lam) == B.dim
        rep.add("left_faithful", faithful)
        R = m.right_action
        rfaith = _span_dim(([x for row in M for x in row] for M in R), q.dim * q.dim, lam) == A.dim
        rep.add("right_faithful", rfaith)
        if q.dim > ring_budget:
            rep.add("double_commutant", None, f"quotient dimension {q.dim} above {ring_budget}")
        else:
            ca = _commutant_dim([R[a] for a in _algebra_generators(A)], q.dim, lam)
            cb = _commutant_dim([Lb[b] for b in _algebra_generators(B)], q.dim, lam)
            rep.add("double_commutant", ca == B.dim and cb == A.dim, (ca, cb))
        return rep
    G = m.quotient_gram
    L = E.left_table()
    k = q.dim
    rep.add("right_hermitian", all(G[s][t] == G[t][s].star() for s in range(k) for t in range(s, k)))
    rep.add("left_hermitian", all(L[s][t] == L[t][s].star() for s in range(k) for t in range(s, k)))
    # left product vanishes on the right radical and has no radical of its own on the quotient
    well = all(not E.left_ip(m.from_scalar(r), y) for r in m.radical for y in vs)
    rep.add("left_well_defined", well)
    rows = []
    for t in range(k):
        for c in range(B.dim):
            rows.append([L[s][t].coords[c] for s in range(k)])
    lrad = linalg.nullspace(rows, k) if k else []
    rep.add("right_nondegenerate", True, f"quotient by radical of dimension {len(m.radical)}")
    rep.add("left_nondegenerate", not lrad, [q.lift(v) for v in lrad] or None)
    rep.add("right_full", _span_dim((G[s][t].coords for s in range(k) for t in range(k)), A.dim, lam) == A.dim)
    rep.add("left_full", _span_dim((L[s][t].coords for s in range(k) for t in range(k)), B.dim, lam) == B.dim)
    # <x, b.y>_A = <b^*.x, y>_A on generators
    gens = m.generators()
    bad = None
    for b in range(B.dim):
        op, ops = E.rep.basis_operator(b), E.rep.operator(B.basis(b).star())
        for x in gens:
            for y in gens:
                if inner_product(x, op(y)) != inner_product(ops(x), y):
                    bad = (B.labels[b],)
                    break
            if bad:
                break
        if bad:
            break
    rep.add("compat_right_adjoint", bad is None, bad)
    bad = None
    for a in range(A.dim):
        ea, eas = A.basis(a), A.basis(a).star()
        for s, x in enumerate(vs):
            for t, y in enumerate(vs):
                if E.left_ip(x.right(ea), y) != E.left_ip(x, y.right(eas)):
                    bad = (A.labels[a], s, t)
                    break
            if bad:
                break
        if bad:
            break
    rep.add("compat_left_adjoint", bad is None, bad)
    bad = None
    for s, x in enumerate(vs):
        for t, y in enumerate(vs):
            op = E.rep.operator(L[s][t])
            for zi, zg in enumerate(gens):
                if not m.in_radical(op(zg) - x.right(inner_product(y, zg))):
                    bad = (s, t, zi)
                    break
            if bad:
                break
        if bad:
            break
    rep.add("compat_associative", bad is None, bad)
    bad = None
    for b in _algebra_generators(B):
        eb = B.basis(b)
        op = E.rep.basis_operator(b)
        for s, x in enumerate(vs):
            for t, y in enumerate(vs):
                if E.left_ip(op(x), y) != eb * L[s][t]:
                    bad = (B.labels[b], s, t)
                    break
            if bad:
                break
        if bad:
            break
    rep.add("left_linear", bad is None, bad)
    if level == STRONG:
        try:
            v = is_completely_positive(m)
            rep.add("right_completely_positive", v.positive, v.witness)
        except Exception as e:  # unsupported coefficient algebra
            rep.add("right_completely_positive", None, str(e))
        if B.exact_class:
            ok, wit = block_matrix_psd(B, L) if k else (True, None)
            rep.add("left_completely_positive", ok, wit)
        else:
            rep.add("left_completely_positive", None, f"{B.name} has no positivity decision")
    return rep


# -- arrows -------------------------------------------------------------------------------

@dataclass(eq=False)
class PicardArrow:
    bimodule: Bimodule
    level: str
    certified: Optional[Report] = None

    @property
    def source(self) -> AlgebraPresentation:
        """The right algebra ``A`` of a ``(B, A)`` arrow."""
        return self.bimodule.right_algebra

    @property
    def target(self) -> AlgebraPresentation:
        return self.bimodule.left_algebra

    def __repr__(self):
        return f"PicardArrow({self.bimodule.name}, {self.level})"


class CertificationError(AssertionError):
    def __init__(self, report: Report):
        super().__init__(str(report))
        self.report = report


def certify(E: Bimodule, level: str = STRONG, strict: bool = True) -> PicardArrow:
    rep = check_equivalence_bimodule(E, level)
    if strict and rep.exit_code != 0:
        raise CertificationError(rep)
    return PicardArrow(E, level, rep)


def identity_arrow(alg: AlgebraPresentation, level: str = STRONG) -> PicardArrow:
    return certify(identity_bimodule(alg), level)


def _weakest(a: str, b: str) -> str:
    return a if _RANK[a] <= _RANK[b] else b


def compose_bimodules(F: Bimodule, E: Bimodule) -> Bimodule:
    """``F (x)_B E`` for a ``(C, B)``-bimodule ``F`` and a ``(B, A)``-bimodule ``E``."""
    if F.right_algebra != E.left_algebra:
        raise MiddleMismatch(f"{F!r} and {E!r} do not share the middle algebra")
    t = internal_tensor(F.rep, E.rep)
    kE = E.module.rank
    pairs = [divmod(p, kE) for p in t.kept]
    Fm, Em = F.module, E.module
    zero = F.left_algebra.zero()

    def lip(x, y):
        acc = zero
        for k1, xk in enumerate(x.coords):
            if xk.is_zero():
                continue
            i1, j1 = pairs[k1]
            y1 = Em.generator(j1).right(xk)
            for k2, yk in enumerate(y.coords):
                if yk.is_zero():
                    continue
                i2, j2 = pairs[k2]
                b = E.left_ip(y1, Em.generator(j2).right(yk))
                if b:
                    acc = acc + F.left_ip(Fm.generator(i1).right(b), Fm.generator(i2))
        return acc

    return Bimodule(F.left_algebra, E.right_algebra, t.representation, lip, f"{F.name}*{E.name}")


def compose(F: PicardArrow, E: PicardArrow, verify: bool = True) -> PicardArrow:
    level = _weakest(F.level, E.level)
    bm = compose_bimodules(F.bimodule, E.bimodule)
    if not verify:
        return PicardArrow(bm, level, None)
    return certify(bm, level)


def inverse_bimodule(E: Bimodule) -> Bimodule:
    """The conjugate ``(A, B)``-bimodule, presented as a right ``B``-module on conjugated vectors of ``E``."""
    m = E.module
    B, A = E.left_algebra, E.right_algebra
    q = m.quotient
    lam = m.lam
    us = E.quotient_vectors()
    Lb = E.rep.quotient_action
    unit = lambda s: [Scalar.one(lam) if t == s else Scalar.zero(lam) for t in range(q.dim)]
    # module generators first: a cyclic one spans over the ring without denominators
    cands = [(m.project(g), g) for g in m.generators()] + [(unit(s), us[s]) for s in range(q.dim)]
    span = linalg.FlatSpan(q.dim, lam)
    kept = []
    for k, (v, _) in enumerate(cands):
        if span.full:
            break
        grew = False
        for b in range(B.dim):
            grew = span.add(linalg.matvec(Lb[b], v)) or grew
        if grew:
            kept.append(k)
    ku = [cands[k][1] for k in kept]
    gram = [[E.left_ip(x, y) for y in ku] for x in ku]
    conj_mod = InnerProductModule(B, gram, f"{E.name}-bar")

    def iota(x: ModuleElement) -> ModuleElement:
        acc = m.zero()
        for k, bk in enumerate(x.coords):
            if not bk.is_zero():
                acc = acc + E.rep.operator(bk.star())(ku[k])
        return acc

    # columns (k, c): pi(e_c) u_k in quotient coordinates
    cols = [linalg.matvec(Lb[c], cands[k][0]) for k in kept for c in range(B.dim)]
    mat = _columns(cols, q.dim)
    rhs = []
    for a in range(A.dim):
        eas = A.basis(a).star()
        for s in range(len(ku)):
            rhs.append(m.project(ku[s].right(eas)))
    sols = linalg.solve_many(mat, rhs)
    if any(s is None for s in sols):
        raise ArithmeticError("conjugate action needs denominators")
    images = []
    nk = len(ku)
    for a in range(A.dim):
        img = [[None] * nk for _ in range(nk)]
        for s in range(nk):
            sol = sols[a * nk + s]
            for k in range(nk):
                beta = AlgebraElement(B, tuple(sol[k * B.dim:(k + 1) * B.dim]))
                img[k][s] = beta.star()
        images.append(img)
    rep = Representation(A, conj_mod, images, f"{E.name}-bar")
    return Bimodule(A, B, rep, lambda x, y: inner_product(iota(x), iota(y)), f"{E.name}-bar")


def inverse(E: PicardArrow, verify: bool = True) -> PicardArrow:
    bm = inverse_bimodule(E.bimodule)
    if not verify:
        return PicardArrow(bm, E.level, None)
    return certify(bm, E.level)


def forget(E: PicardArrow, to_level: str) -> PicardArrow:
    if to_level not in _RANK:
        raise LevelError(to_level)
    if _RANK[to_level] > _RANK[E.level]:
        raise LevelError(f"cannot strengthen {E.level} to {to_level}")
    return PicardArrow(E.bimodule, to_level, E.certified)


def find_bimodule_isomorphism(E1: Bimodule, E2: Bimodule, budget: int = 64, level: str = STRONG) -> SearchResult:
    """Isometric bimodule isomorphism; at level ring any bimodule isomorphism."""
    if E1.left_algebra != E2.left_algebra or E1.right_algebra != E2.right_algebra:
        return SearchResult(NO, None, "different algebras")
    if level == RING:
        return find_isometry(E1.module, E2.module, [(E1.rep, E2.rep)], budget, require_isometry=False)
    gens = E1.module.generators()

    def preserves_left(T):
        imgs = [T(g) for g in gens]
        return all(E2.left_ip(imgs[i], imgs[j]) == E1.left_ip(gens[i], gens[j])
                   for i in range(len(gens)) for j in range(len(gens)))

    return find_isometry(E1.module, E2.module, [(E1.rep, E2.rep)], budget, extra_check=preserves_left)


def arrows_isomorphic(F: PicardArrow, E: PicardArrow, budget: int = 64) -> SearchResult:
    return find_bimodule_isomorphism(F.bimodule, E.bimodule, budget, _weakest(F.level, E.level))


# -- Picard groups ---------------------------------------------------------------------------

@dataclass
class PicardGroup:
    algebra: AlgebraPresentation
    arrows: list
    certificates: list = field(default_factory=list)  # (i, j, SearchResult) for distinct pairs
    automorphisms: list = field(default_factory=list)

    @property
    def order(self) -> int:
        return len(self.arrows)

    @property
    def complete(self) -> bool:
        return all(r.verdict == NO for _, _, r in self.certificates)


def picard_group(alg: AlgebraPresentation, class_hint=None, budget: int = 64) -> PicardGroup:
    """Twisted bimodules ``A_alpha`` over the candidate automorphisms, up to isometric isomorphism.

    Only unit Gram matrices are enumerated, so rescaled copies of the
    identity bimodule by non-norms of Q(i) are outside the search.
    """
    if not alg.exact_class or alg.dim > 16:
        raise ValueError(f"picard_group needs a matrix or function algebra of dimension <= 16, got {alg!r}")
    classes: list = []
    autos: list = []
    certs: list = []
    for alpha in candidate_automorphisms(alg):
        E = twisted_bimodule(alg, alpha)
        found = False
        for idx, arrow in enumerate(classes):
            r = find_bimodule_isomorphism(E, arrow.bimodule, budget)
            if r.verdict == YES:
                found = True
                break
        if found:
            continue
        arrow = certify(E, STRONG)
        classes.append(arrow)
        autos.append(alpha)
    for i, j in itertools.combinations(range(len(classes)), 2):
        certs.append((i, j, find_bimodule_isomorphism(classes[i].bimodule, classes[j].bimodule, budget)))
    return PicardGroup(alg, classes, certs, autos)


def isotropy_action(g: PicardArrow, h: PicardArrow, verify: bool = True) -> PicardArrow:
    """``g o h o g^-1`` for ``g`` in StrPic(B, A) and ``h`` in StrPic(A)."""
    return compose(compose(g, h, verify), inverse(g, verify), verify)


# -- K-theory action ---------------------------------------------------------------------------

@dataclass
class K0Class:
    """Formal sum of projective modules with strongly nondegenerate inner products."""

    algebra: AlgebraPresentation
    terms: list  # (InnerProductModule, multiplicity)

    def __add__(self, other: "K0Class") -> "K0Class":
        _same_algebra(self.algebra, other.algebra)
        return canonical_k0(K0Class(self.algebra, list(self.terms) + list(other.terms)))

    def is_zero(self) -> bool:
        return all(mult == 0 for _, mult in self.terms)


def _gram_kind(m: InnerProductModule) -> Optional[str]:
    """``invertible`` or ``projection`` when the Gram matrix is one in ``M_k(D)``."""
    D = m.over
    k = m.rank
    mk = matrix_algebra(D, k) if k > 1 else D
    g = matrix_element(D, mk, m.gram) if k > 1 else m.gram[0][0]
    if g * g == g and g.star() == g:
        return "projection"
    from .modules import left_matrix
    sol = linalg.solve(left_matrix(g), list(mk.unit))
    if sol is not None and AlgebraElement(mk, tuple(sol)) * g == mk.one():
        return "invertible"
    return None


def check_projective(m: InnerProductModule) -> str:
    kind = _gram_kind(m)
    if kind is None:
        raise NotProjective(f"{m!r}: Gram matrix is neither invertible nor a projection")
    return kind


def canonical_k0(c: K0Class, budget: int = 64) -> K0Class:
    """Merge isometrically isomorphic summands and drop zero multiplicities."""
    out: list = []
    for mod, mult in c.terms:
        for idx, (rep, m0) in enumerate(out):
            if find_isometry(mod, rep, (), budget).verdict == YES:
                out[idx] = (rep, m0 + mult)
                break
        else:
            out.append((mod, mult))
    return K0Class(c.algebra, [(m, k) for m, k in out if k != 0])


def k0_equal(c1: K0Class, c2: K0Class, budget: int = 64) -> bool:
    if c1.algebra != c2.algebra:
        return False
    neg = K0Class(c2.algebra, [(m, -k) for m, k in c2.terms])
    return canonical_k0(K0Class(c1.algebra, list(c1.terms) + neg.terms), budget).is_zero()


def k0h_action(c: K0Class, E: PicardArrow) -> K0Class:
    """``[H] -> [H (x)_B E]`` summand by summand."""
    if c.algebra != E.bimodule.left_algebra:
        raise MiddleMismatch("class and arrow live over different algebras")
    terms = []
    for mod, mult in c.terms:
        check_projective(mod)
        t = internal_tensor(trivial_representation(mod), E.bimodule.rep)
        terms.append((t.result, mult))
    return canonical_k0(K0Class(E.bimodule.right_algebra, terms))


# -- representation transfer -----------------------------------------------------------------

class DegenerateRepresentation(ValueError):
    pass


def is_nondegenerate_representation(rho: Representation) -> bool:
    m = rho.module
    q = m.quotient
    lam = m.lam
    vecs = (linalg.matvec(L, [Scalar.one(lam) if t == s else Scalar.zero(lam) for t in range(q.dim)])
            for L in rho.quotient_action for s in range(q.dim))
    return _span_dim(vecs, q.dim, lam) == q.dim


def rep_transfer(E: PicardArrow, rho: Representation):
    """The ``B``-representation on ``E (x)_A H``; returns the tensor module (its ``representation`` field is the result)."""
    if rho.algebra != E.bimodule.right_algebra:
        raise MiddleMismatch("representation is not of the arrow's right algebra")
    if not is_nondegenerate_representation(rho):
        raise DegenerateRepresentation("pi(A)H != H")
    return internal_tensor(E.bimodule.rep, rho)


def transport_intertwiner(t1, t2, T):
    """``id (x) T`` between two transfers along the same arrow, as an operator on the reduced results."""
    from .modules import ModuleOperator
    kH = t1.right_factor.module.rank
    Fm = t1.left_factor.module
    cols = []
    for p in t1.kept:
        i, j = divmod(p, kH)
        img = t2.element(Fm.generator(i), T(t1.right_factor.module.generator(j)))
        cols.append(img.coords)
    mat = [[cols[c][r] for c in range(len(cols))] for r in range(t2.result.rank)]
    return ModuleOperator(t1.result, t2.result, mat)


# -- the signature example --------------------------------------------------------------------

def gram_grid_search(E: Bimodule, values=range(-2, 3)) -> list:
    """Hermitian rank-2 Gram matrices over a small grid that keep ``E`` compatible and positive.

    Keeps the left action and left product; a hit would be a strong
    preimage of the star-level arrow over the same bimodule.
    """
    c = E.right_algebra
    if c.dim != 1 or E.module.rank != 2:
        raise ValueError("grid search is implemented for rank-2 modules over the scalars")
    hits = []
    gens = E.module.generators()
    for a, d in itertools.product(values, repeat=2):
        for re, im in itertools.product(values, repeat=2):
            off = Scalar(re, im)
            gram = [[c.element([a]), c.element([off])], [c.element([off.conj()]), c.element([d])]]
            m = InnerProductModule(c, gram)
            if not is_completely_positive(m, spot_checks=0).positive:
                continue
            cand = Bimodule(E.left_algebra, c, Representation(E.left_algebra, m, E.rep.images), E.left_ip)
            ok = True
            for x, y, z in itertools.product(gens, repeat=3):
                xm, ym, zm = (ModuleElement(m, v.coords) for v in (x, y, z))
                lhs = cand.rep.operator(E.left_ip(x, y))(zm)
                if not m.in_radical(lhs - xm.right(inner_product(ym, zm))):
                    ok = False
                    break
            if ok and check_equivalence_bimodule(cand, STAR).ok:
                hits.append(gram)
    return hits
