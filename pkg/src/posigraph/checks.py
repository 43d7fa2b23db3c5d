"""Brute-force oracles, random instances and the property suites behind ``check``.

The oracles loop over every vertex map with ``itertools.product`` and share
no code with the search engines they are compared against.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations, product
from math import prod

from .decomposition import decompose, induced_sym, reconstruct
from .density import (BipStepFunction, SymStepFunction, density_bip, density_sym,
                      doubling, tensor_square, transpose)
from .homomorphism import count_homs, weighted_hom_sum
from .structures import (BipartiteGraph, Hypergraph, WeightedHypergraph,
                         fano, grid, levi, single_edge)


# ---------------------------------------------------------------------------
# oracles


def naive_map_count(h: Hypergraph, g: Hypergraph) -> int:
    present = {tuple(sorted(e)) for e in g.edges}
    total = 0
    for img in product(range(g.n_vertices), repeat=h.n_vertices):
        if all(tuple(sorted(img[v] for v in e)) in present for e in h.edges):
            total += 1
    return total


def naive_weighted_sum(h: Hypergraph, t: WeightedHypergraph) -> Fraction:
    table: dict = {}
    for e, w in zip(t.base.edges, t.weights):
        key = tuple(sorted(e))
        table[key] = table.get(key, 0) + w
    total = Fraction(0)
    for img in product(range(t.base.n_vertices), repeat=h.n_vertices):
        keys = [tuple(sorted(img[v] for v in e)) for e in h.edges]
        if all(k in table for k in keys):
            total += prod((table[k] for k in keys), start=Fraction(1))
    return total


def naive_density_sym(h: Hypergraph, f: SymStepFunction) -> Fraction:
    ms = f.part_measures()
    total = Fraction(0)
    for img in product(range(f.n), repeat=h.n_vertices):
        term = prod((f.entry([img[v] for v in e]) for e in h.edges), start=Fraction(1))
        if term:
            total += term * prod((ms[i] for i in img), start=Fraction(1))
    return total


def naive_density_bip(g: BipartiteGraph, f: BipStepFunction) -> Fraction:
    total = Fraction(0)
    for left in product(range(f.n), repeat=g.n_left):
        for right in product(range(f.N), repeat=g.n_right):
            total += prod((f.entries.get((left[u], right[v]), Fraction(0)) for u, v in g.edges),
                          start=Fraction(1))
    return total / (f.n ** g.n_left * f.N ** g.n_right)


# ---------------------------------------------------------------------------
# random instances


def random_rational(rng: random.Random, bound: int = 4, den: int = 3) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, den))


def random_sym(rng: random.Random, r: int, n: int, measures: bool = False) -> SymStepFunction:
    f = SymStepFunction.from_function(r, n, lambda *_: random_rational(rng))
    if not measures:
        return f
    raw = [rng.randint(1, 5) for _ in range(n)]
    return SymStepFunction(r, n, f.entries, [Fraction(x, sum(raw)) for x in raw])


def random_bip(rng: random.Random, n: int, N: int) -> BipStepFunction:
    return BipStepFunction.from_rows([[random_rational(rng) for _ in range(N)] for _ in range(n)])


def random_hypergraph(rng: random.Random, r: int, n: int, m: int) -> Hypergraph:
    pool = list(combinations(range(n), r))
    return Hypergraph(r, n, tuple(rng.choice(pool) for _ in range(m)))


def random_weighted(rng: random.Random, r: int, n: int, m: int) -> WeightedHypergraph:
    base = random_hypergraph(rng, r, n, m)
    return WeightedHypergraph(base, tuple(random_rational(rng) for _ in range(m)))


# ---------------------------------------------------------------------------
# property suites


def _suite_hom_counts(rng, budget):
    for _ in range(budget):
        r = rng.choice([2, 3])
        h = random_hypergraph(rng, r, rng.randint(r, r + 2), rng.randint(1, 3))
        g = random_hypergraph(rng, r, rng.randint(r, r + 2), rng.randint(1, 4))
        yield count_homs(h, g) == naive_map_count(h, g)


def _suite_weighted_sums(rng, budget):
    for _ in range(budget):
        r = rng.choice([2, 3])
        h = random_hypergraph(rng, r, rng.randint(r, r + 2), rng.randint(1, 3))
        t = random_weighted(rng, r, rng.randint(r, r + 2), rng.randint(1, 4))
        yield weighted_hom_sum(h, t).value == naive_weighted_sum(h, t)


def _suite_density(rng, budget):
    for _ in range(budget):
        r = rng.choice([2, 3])
        h = random_hypergraph(rng, r, rng.randint(r, r + 2), rng.randint(1, 3))
        f = random_sym(rng, r, rng.randint(1, 3), measures=rng.random() < 0.5)
        yield density_sym(h, f) == naive_density_sym(h, f)


def _suite_transfer(rng, budget):
    patterns = [single_edge(3), grid(3), fano()]
    for _ in range(budget):
        h = rng.choice(patterns)
        f = random_bip(rng, rng.randint(1, 3), rng.randint(1, 4))
        yield density_bip(levi(h), f) == density_sym(h, induced_sym(f, h.r))


def even_cycle(half: int) -> BipartiteGraph:
    """C_{2 half} with sides {0..half-1}; right j meets left j and j+1."""
    return BipartiteGraph(half, half, tuple(sorted(
        [(j, j) for j in range(half)] + [((j + 1) % half, j) for j in range(half)])))


def _suite_doubling(rng, budget):
    graphs = [BipartiteGraph(1, 1, ((0, 0),)), even_cycle(2), even_cycle(3)]
    for _ in range(budget):
        g = rng.choice(graphs)
        f = random_bip(rng, rng.randint(1, 3), rng.randint(1, 3))
        t, tt = density_bip(g, f), density_bip(g, transpose(f))
        h = g.as_hypergraph()
        yield (2 ** g.n_vertices * density_sym(h, doubling(f)) == t + tt
               and density_sym(h, tensor_square(f)) == t * tt)


def _suite_decomposition(rng, budget):
    for _ in range(budget):
        r = rng.choice([2, 3])
        a = random_sym(rng, r, rng.randint(1, 3))
        yield reconstruct(decompose(a, seed=rng.randrange(1 << 30))) == a


SUITES = {
    "hom-counts": _suite_hom_counts,
    "weighted-sums": _suite_weighted_sums,
    "density": _suite_density,
    "levi-transfer": _suite_transfer,
    "doubling": _suite_doubling,
    "decomposition": _suite_decomposition,
}


def run_checks(budget: int = 20, seed: int = 0) -> dict:
    """Run every suite on ``budget`` random instances; returns per-suite tallies."""
    out = {}
    for name, suite in SUITES.items():
        rng = random.Random(f"{seed}:{name}")
        results = list(suite(rng, budget))
        out[name] = {"cases": len(results), "failures": results.count(False)}
    return out
