"""Look for Hermitian elements that pass sampled positivity but get no sum-of-squares certificate.

The algebras are presented without their matrix embedding, so only the
generic Gram-matrix search is available.  An element counted as a gap is a
candidate only: a larger budget or a different Gram solution may certify it.
"""
import argparse
import dataclasses
import random
from dataclasses import dataclass

from starmorita.algebra import (Functional, full_matrix_algebra, function_algebra, functional_twist,
                                membership_aplus, membership_app, trace_functional)
from starmorita.modules import random_algebra_element
from starmorita.ring import Scalar


@dataclass
class Config:
    samples: int = 200
    states: int = 6
    budget: int = 64
    seed: int = 0


def as_generic(alg):
    return dataclasses.replace(alg, kind="generic", blocks=None, embedding=None, name=alg.name + "-generic")


def random_state(alg, rng):
    tr = trace_functional(alg)
    acc = [Scalar(0)] * alg.dim
    for _ in range(2):
        tw = functional_twist(tr, random_algebra_element(alg, rng))
        acc = [x + tw(alg.basis(a)) for a, x in enumerate(acc)]
    return Functional(alg, acc)


def explore(alg, cfg: Config, rng) -> dict:
    # states come from the exact presentation, then move to the generic one
    states = [random_state(alg, rng) for _ in range(cfg.states)]
    generic = as_generic(alg)
    sample = [Functional(generic, list(om.values)) for om in states]
    counts = {"sos": 0, "separated": 0, "gap": 0}
    for _ in range(cfg.samples):
        b = random_algebra_element(alg, rng)
        h = b + b.star()
        x = generic.element(list(h.coords))
        if not membership_aplus(x, sample):
            counts["separated"] += 1
        elif membership_app(x, cfg.budget).member:
            counts["sos"] += 1
        else:
            counts["gap"] += 1
    return counts


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f in dataclasses.fields(Config):
        ap.add_argument("--" + f.name, type=int, default=f.default)
    cfg = Config(**vars(ap.parse_args()))
    rng = random.Random(cfg.seed)
    for alg in [function_algebra(2), function_algebra(3), full_matrix_algebra(2)]:
        print(f"{alg.name:>6}: {explore(alg, cfg, rng)}")


if __name__ == "__main__":
    main()
