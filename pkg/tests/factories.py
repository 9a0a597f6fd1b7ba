"""Builders shared by the test modules."""
from starmorita.algebra import Functional, scalars
from starmorita.modules import (InnerProductModule, Representation, canonical_module, random_algebra_element)
from starmorita.ring import Scalar

C = scalars()


def defining(alg):
    """``M_n`` acting on ``C^n`` through its embedding."""
    n = alg.blocks[0]
    m = canonical_module(C, n)
    images = []
    for a in range(alg.dim):
        blk = alg.embed(alg.basis(a))[0]
        images.append([[C.element([blk[r][s]]) for s in range(n)] for r in range(n)])
    return Representation(alg, m, images, "defining")


def random_cp_module(alg, rng, rank):
    """Gram ``X^* X`` for a random square ``X`` over ``alg``."""
    X = [[random_algebra_element(alg, rng) for _ in range(rank)] for _ in range(rank)]
    gram = [[sum((X[k][i].star() * X[k][j] for k in range(rank)), alg.zero()) for j in range(rank)]
            for i in range(rank)]
    return InnerProductModule(alg, gram, "random")


def random_positive_functional(alg, rng):
    """``a -> sum_k omega_k(b_k^* a b_k)`` built from the block traces."""
    from starmorita.algebra import functional_twist, trace_functional
    tr = trace_functional(alg)
    acc = [Scalar(0)] * alg.dim
    for _ in range(2):
        b = random_algebra_element(alg, rng)
        tw = functional_twist(tr, b)
        acc = [x + tw(alg.basis(a)) for a, x in enumerate(acc)]
    return Functional(alg, acc)
