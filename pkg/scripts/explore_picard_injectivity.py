"""Compare strong and ring-level classes of twisted bimodules over small algebras.

A pair that is isomorphic as bimodules but not isometrically so would be a
kernel element of the map from the strong Picard group to the ring one.
The search only covers twists by block and index permutations.
"""
import argparse
import itertools
from dataclasses import dataclass

from starmorita.algebra import full_matrix_algebra, function_algebra, scalars
from starmorita.modules import YES
from starmorita.morita import RING, STRONG, candidate_automorphisms, find_bimodule_isomorphism, twisted_bimodule


@dataclass
class Config:
    budget: int = 64
    max_points: int = 3


def algebras(cfg: Config):
    yield scalars()
    for k in range(2, cfg.max_points + 1):
        yield function_algebra(k)
    yield full_matrix_algebra(2)


def explore(cfg: Config) -> list:
    hits = []
    for alg in algebras(cfg):
        twists = [twisted_bimodule(alg, a) for a in candidate_automorphisms(alg)]
        for (i, E1), (j, E2) in itertools.combinations(enumerate(twists), 2):
            ring = find_bimodule_isomorphism(E1, E2, cfg.budget, RING).verdict
            strong = find_bimodule_isomorphism(E1, E2, cfg.budget, STRONG).verdict
            print(f"{alg.name:>8}  twist {i} vs {j}: ring {ring:7}  strong {strong}")
            if ring == YES and strong != YES:
                hits.append((alg.name, i, j, strong))
    return hits


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--budget", type=int, default=Config.budget)
    ap.add_argument("--max-points", type=int, default=Config.max_points)
    ns = ap.parse_args()
    hits = explore(Config(ns.budget, ns.max_points))
    print(f"{len(hits)} pair(s) identified at ring level but not at strong level")
    for h in hits:
        print("  ", h)


if __name__ == "__main__":
    main()
