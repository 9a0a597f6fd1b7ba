"""GNS representations of positive functionals."""
from __future__ import annotations

from dataclasses import dataclass

from . import linalg
from .algebra import AlgebraElement, Functional, functional_gram, is_positive_functional, scalars
from .modules import (InnerProductModule, ModuleElement, Representation, inner_product, left_matrix)


class NotPositive(ValueError):
    pass


@dataclass
class GnsResult:
    representation: Representation
    cyclic_vector: ModuleElement
    ideal_basis: list

    @property
    def dim(self) -> int:
        return self.representation.module.rank


def _require_positive(omega: Functional) -> None:
    if not omega.algebra.is_unital:
        raise ValueError("GNS needs a unital algebra")
    v = is_positive_functional(omega)
    if not v:
        raise NotPositive(f"{omega!r} is not positive; witness {v.witness!r}")


def gelfand_ideal(omega: Functional) -> list:
    """Basis of ``{a : omega(a^* a) = 0}``, the kernel of the Gram form."""
    _require_positive(omega)
    alg = omega.algebra
    g = functional_gram(omega)
    basis = [AlgebraElement(alg, tuple(v)) for v in linalg.nullspace(g, alg.dim)]
    span = linalg.Span(alg.dim, alg.lam)
    for x in basis:
        span.add(x.coords)
    for x in basis:
        for b in range(alg.dim):
            if not span.contains((alg.basis(b) * x).coords):
                raise AssertionError("Gelfand ideal is not a left ideal")
    return basis


def _cyclic_data(omega: Functional) -> InnerProductModule:
    """``A`` as a rank-``dim A`` module over the scalars with Gram ``omega(e_a^* e_b)``."""
    alg = omega.algebra
    c = scalars(alg.lam)
    g = functional_gram(omega)
    return InnerProductModule(c, [[c.element([v]) for v in row] for row in g])


def gns_construct(omega: Functional) -> GnsResult:
    """``A / J`` with ``<[a], [b]> = omega(a^* b)``, ``pi(a)[b] = [ab]`` and cyclic vector ``[1]``."""
    ideal = gelfand_ideal(omega)
    alg = omega.algebra
    big = _cyclic_data(omega)
    q = big.quotient
    c = big.over
    gram = [[c.element([x.coords[0]]) for x in row] for row in big.quotient_gram]
    module = InnerProductModule(c, gram, f"gns({alg.name})")
    images = []
    for b in range(alg.dim):
        lm = left_matrix(alg.basis(b))
        cols = [q.project(linalg.matvec(lm, q.unit(t))) for t in range(q.dim)]
        images.append([[c.element([cols[t][r]]) for t in range(q.dim)] for r in range(q.dim)])
    rep = Representation(alg, module, images, f"gns({alg.name})")
    cyc = module.element([c.element([v]) for v in q.project(alg.unit)])
    return GnsResult(rep, cyc, ideal)


def vector_state(rho: Representation, phi: ModuleElement) -> Functional:
    """``omega_phi(a) = <phi, pi(a) phi>`` for a scalar-valued inner product."""
    if rho.module.over.dim != 1:
        raise ValueError("vector states need a scalar-valued inner product")
    alg = rho.algebra
    return Functional(alg, [inner_product(phi, rho.basis_operator(a)(phi)).coords[0]
                            for a in range(alg.dim)])


def subrepresentation(rho: Representation, vectors: list) -> Representation:
    """Restriction of ``rho`` to an invariant subspace spanned by module elements.

    The spanning vectors are thinned to a basis of their image in the
    quotient; the result is presented on that basis.
    """
    m = rho.module
    q = m.quotient
    span = linalg.Span(q.dim, m.lam)
    kept = []
    for v in vectors:
        if span.add(m.project(v)):
            kept.append(v)
    coords = [m.project(v) for v in kept]
    r = len(kept)
    D = m.over
    gram = [[inner_product(x, y) for y in kept] for x in kept]
    sub = InnerProductModule(D, gram, f"sub({m.name})")
    if D.dim != 1:
        raise ValueError("subrepresentation is implemented for scalar coefficient modules")
    cols_matrix = [[coords[s][t] for s in range(r)] for t in range(q.dim)]
    images = []
    for b in range(rho.algebra.dim):
        op = rho.basis_operator(b)
        img_cols = []
        for v in kept:
            sol = linalg.solve(cols_matrix, m.project(op(v)))
            if sol is None:
                raise ValueError("vectors do not span an invariant subspace")
            img_cols.append(sol)
        images.append([[D.element([img_cols[s][t]]) for s in range(r)] for t in range(r)])
    return Representation(rho.algebra, sub, images, f"sub({rho.name})")


def cyclic_subrepresentation(rho: Representation, phi: ModuleElement) -> Representation:
    """The subrepresentation on ``pi(A) phi``."""
    alg = rho.algebra
    vecs = [rho.basis_operator(a)(phi) for a in range(alg.dim)]
    return subrepresentation(rho, vecs)
