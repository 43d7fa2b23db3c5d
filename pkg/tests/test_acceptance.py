"""Acceptance suite. Every test prints one PASS/FAIL line, then asserts.

Run with ``pytest tests/test_acceptance.py -v``; the lines are printed with
output capture disabled so they appear in the log.
"""

import random
import time
from fractions import Fraction
from itertools import permutations, product

import pytest

from posigraph.certificates import (NON_POSITIVE, find_stable_involution,
                                    greedy_linear_generator, grid_classifier, grid_pipeline,
                                    hom_constants, is_grid_free, necessary_conditions,
                                    odd_edge_certificate)
from posigraph.checks import naive_map_count, random_bip, random_sym
from posigraph.decomposition import (decompose, induced_sym, reconstruct, rescale_odd,
                                     transfer_witness)
from posigraph.density import density_bip, density_sym, doubling, tensor_square, transpose
from posigraph.homomorphism import count_homs, endomorphisms, weighted_hom_sum
from posigraph.structures import (BipartiteGraph, Hypergraph, box_product, contains_triangle,
                                  cycle, disjoint_union, fano, grid, is_linear, levi,
                                  set_inclusion_rgraph, single_edge, star,
                                  subdivided_complete_bipartite)


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'}  [{label}] {detail}")
        assert ok, detail
    return emit


# ---------------------------------------------------------------------------
# 1. forward transfer to the Levi graph


def test_criterion_1_levi_transfer(report):
    start = time.perf_counter()
    checked = bad = 0
    for name, h in [("single 3-edge", single_edge(3)), ("grid(3)", grid(3)), ("Fano", fano())]:
        rng = random.Random(f"acceptance-1:{name}")
        g = levi(h)
        for _ in range(50):
            f = random_bip(rng, rng.randint(1, 3), rng.randint(1, 4))
            checked += 1
            bad += density_bip(g, f) != density_sym(h, induced_sym(f, 3))
    secs = time.perf_counter() - start
    report("1", bad == 0 and secs < 60,
           f"Levi transfer identity exact on {checked - bad}/{checked} step functions "
           f"in {secs:.1f}s (target < 60s)")


# ---------------------------------------------------------------------------
# 2. doubling and tensor-square identities


def _even_cycle(half):
    return BipartiteGraph(half, half, tuple(sorted(
        [(j, j) for j in range(half)] + [((j + 1) % half, j) for j in range(half)])))


def test_criterion_2_doubling_and_square(report):
    graphs = [("single edge", BipartiteGraph(1, 1, ((0, 0),))), ("C4", _even_cycle(2)),
              ("C6", _even_cycle(3)), ("subdivided K33", subdivided_complete_bipartite(3))]
    checked = bad = 0
    for name, g in graphs:
        rng = random.Random(f"acceptance-2:{name}")
        h = g.as_hypergraph()
        for _ in range(50):
            f = random_bip(rng, rng.randint(1, 3), rng.randint(1, 3))
            t, tt = density_bip(g, f), density_bip(g, transpose(f))
            checked += 2
            bad += 2 ** g.n_vertices * density_sym(h, doubling(f)) != t + tt
            bad += density_sym(h, tensor_square(f)) != t * tt
    report("2", bad == 0, f"doubling and product identities exact on {checked - bad}/{checked} "
                          f"checks over 4 graphs x 50 step functions")


# ---------------------------------------------------------------------------
# 3. decomposition round trip


def test_criterion_3_decomposition_round_trip(report):
    exact_bad = 0
    worst = Fraction(0)
    cases = 0
    for n, r in [(2, 3), (3, 3), (2, 5)]:
        for seed in range(20):
            rng = random.Random(f"acceptance-3:{n}:{r}:{seed}")
            a = random_sym(rng, r, n)
            d = decompose(a, seed=seed)
            cases += 1
            exact_bad += reconstruct(d) != a
            approx = induced_sym(rescale_odd(d, precision=128).as_bip(), r)
            keys = approx.entries.keys() | a.entries.keys()
            worst = max([worst] + [abs(approx.entry(k) - a.entry(k)) for k in keys])
    ok = exact_bad == 0 and worst < Fraction(1, 10 ** 9)
    report("3", ok, f"exact reconstruction {cases - exact_bad}/{cases}; rescaled 128-bit "
                    f"max entry error {float(worst):.2e} (tolerance 1e-9)")


# ---------------------------------------------------------------------------
# 4. constants and the naive-map oracle


def _row_image_count(pattern, target):
    """Homomorphisms of grid(r) counted by choosing each row's image edge and bijection.

    Returns (all, collapsing onto one edge). Independent of the search engine.
    """
    r = pattern.r
    rows, cols = pattern.edges[:r], pattern.edges[r:]
    present = {tuple(sorted(e)) for e in target.edges}
    choices = [(e, p) for e in sorted(present) for p in permutations(e)]
    total = collapsing = 0
    for pick in product(choices, repeat=r):
        img = [0] * pattern.n_vertices
        for row, (_, perm) in zip(rows, pick):
            for v, x in zip(row, perm):
                img[v] = x
        if all(tuple(sorted(img[v] for v in c)) in present for c in cols):
            total += 1
            collapsing += len(set(img)) == r
    return total, collapsing


def test_criterion_4_collapse_constant(report):
    c = count_homs(grid(3), single_edge(3))
    report("4a", c == 12, f"count_homs(grid(3), single 3-edge) = {c} (expected 12)")


def test_criterion_4_type2_constant(report):
    e = single_edge(3)
    total, collapsing = _row_image_count(grid(3), box_product(e, e))
    type2 = total - collapsing
    engine = hom_constants(3)[1]
    report("4b", type2 == 36,
           f"brute-force type-2 count on the 2-edge box product = {type2} "
           f"({total} homs, {collapsing} collapsing; engine constant {engine}); "
           f"criterion states 36")


ORACLE_INSTANCES = [
    (grid(3), single_edge(3)), (single_edge(3), fano()), (fano(), fano()),
    (set_inclusion_rgraph(4, 3, 1), fano()), (single_edge(3), box_product(single_edge(3),
                                                                         single_edge(3))),
    (cycle(5), cycle(5)), (cycle(6), cycle(4)), (star(3), cycle(5)),
    (Hypergraph(3, 5, ((0, 1, 2), (2, 3, 4))), set_inclusion_rgraph(5, 3, 1)),
    (grid(2), cycle(6)),
]


def test_criterion_4_naive_oracle(report):
    bad = []
    for h, g in ORACLE_INSTANCES:
        assert g.n_vertices ** h.n_vertices <= 10 ** 6
        if naive_map_count(h, g) != count_homs(h, g):
            bad.append((h, g))
    report("4c", not bad, f"naive-map oracle agrees with the engine on "
                          f"{len(ORACLE_INSTANCES) - len(bad)}/{len(ORACLE_INSTANCES)} instances "
                          f"(each <= 1e6 candidate maps)")


# ---------------------------------------------------------------------------
# 5, 6. the grid pipeline and the Levi witness


@pytest.fixture(scope="module")
def main_pipeline():
    start = time.perf_counter()
    cert = grid_pipeline(3, 15, seed=0, min_edges=Fraction(2, 3))
    return cert, time.perf_counter() - start


@pytest.fixture(scope="module")
def small_pipeline():
    return grid_pipeline(3, 12, seed=5, min_edges=Fraction(2, 3))


def test_criterion_5_grid_pipeline(report, main_pipeline, small_pipeline):
    cert, secs = main_pipeline
    d = cert.details
    n, e = d["n"], d["e"]
    g = Hypergraph(3, n, tuple(tuple(x) for x in d["G"]))
    props = is_linear(g) and not contains_triangle(g) and is_grid_free(g)
    stated = 24 * n * e - 36 * e * e
    closed = 2 * d["c_r"] * n * e - d["C_r"] * e * e
    small = small_pipeline.details
    direct = weighted_hom_sum(grid(3), small_pipeline.target).value
    small_closed = 24 * small["n"] * small["e"] - 72 * small["e"] ** 2
    ok = (props and 3 * e > 2 * n and n <= 512 and stated < 0 and cert.total == closed < 0
          and 3 * small["e"] > 2 * small["n"] and small["n"] <= 15
          and direct == small_closed and secs < 600)
    report("5", ok,
           f"G on n={n} has e={e} > 2n/3, linear/triangle-free/grid-free={props}; "
           f"certificate sum 24ne-72e^2 = {cert.total}, 24ne-36e^2 = {stated}; "
           f"small instance n={small['n']}, e={small['e']}: direct {direct} == closed form "
           f"{small_closed}; {secs:.1f}s")


def test_criterion_6_levi_witness(report, main_pipeline, small_pipeline):
    cert, _ = main_pipeline
    k33 = subdivided_complete_bipartite(3)
    w = transfer_witness(grid(3), cert.step_function(), precision=128)
    small = transfer_witness(grid(3), small_pipeline.step_function(), precision=128, direct=True)
    ok = (levi(grid(3)) == k33 and w.upper < 0 and w.lower <= w.upper
          and small.direct_density < 0 and small.lower <= small.direct_density <= small.upper)
    report("6", ok,
           f"density of the subdivided K33 against a {w.f.n}x{w.f.N} step function lies in "
           f"[{float(w.lower):.4e}, {float(w.upper):.4e}] at {w.precision} bits; small "
           f"instance {small.f.n}x{small.f.N}: exact direct density {float(small.direct_density):.4e} "
           f"inside its enclosure")


# ---------------------------------------------------------------------------
# 7. odd-edge certificates


def test_criterion_7_odd_edges(report):
    fc = odd_edge_certificate(fano())
    kc = odd_edge_certificate(set_inclusion_rgraph(4, 3, 1))
    fe, ke = len(endomorphisms(fano())), len(endomorphisms(set_inclusion_rgraph(4, 3, 1)))
    ok = fc.total == -168 == -fe and kc.total == -24 == -ke
    report("7", ok, f"Fano sum {fc.total} (|End| = {fe}); set_inclusion_rgraph(4,3,1) sum "
                    f"{kc.total} (|End| = {ke})")


# ---------------------------------------------------------------------------
# 8. stable involutions


INVOLUTION_GRAPHS = [
    ("C4", cycle(4)), ("C6", cycle(6)),
    ("C8 = subdivided K22", subdivided_complete_bipartite(2).as_hypergraph()),
    ("path P3", star(2)), ("K2 + K2", disjoint_union(single_edge(2), single_edge(2))),
    ("3-edge + 3-edge", disjoint_union(single_edge(3), single_edge(3))),
    ("Fano + Fano", disjoint_union(fano(), fano())),
    ("grid(3) + grid(3)", disjoint_union(grid(3), grid(3))),
    ("3-uniform bowtie", Hypergraph(3, 5, ((0, 1, 2), (0, 3, 4)))),
    ("K_{2,3}", Hypergraph(2, 5, tuple((u, v) for u in range(2) for v in range(2, 5)))),
]


def test_criterion_8_involutions(report):
    missing, negative, checked = [], 0, 0
    for name, h in INVOLUTION_GRAPHS:
        if find_stable_involution(h) is None:
            missing.append(name)
            continue
        rng = random.Random(f"acceptance-8:{name}")
        for _ in range(200):
            f = random_sym(rng, h.r, rng.randint(1, 3), measures=rng.random() < 0.5)
            checked += 1
            negative += density_sym(h, f) < 0
    none_for = [name for name, h in [("K2", single_edge(2)), ("single 3-edge", single_edge(3)),
                                     ("subdivided K33", levi(grid(3)).as_hypergraph())]
                if find_stable_involution(h) is None]
    ok = not missing and negative == 0 and len(none_for) == 3
    report("8", ok, f"{len(INVOLUTION_GRAPHS) - len(missing)}/10 involutions found; "
                    f"{checked - negative}/{checked} densities >= 0; exhaustive search finds none "
                    f"for {', '.join(none_for)}")


# ---------------------------------------------------------------------------
# 9. grid classifier


def test_criterion_9_classifier(report):
    violations = homs = with_grid = 0
    for seed in range(25):
        n = 7 + seed % 6
        g = greedy_linear_generator(3, n, seed=seed, forbid_grid=False)
        assert is_linear(g) and not contains_triangle(g) and g.n_vertices <= 12
        stats = grid_classifier(g, 3)
        violations += stats.violations
        homs += stats.total
        with_grid += stats.counts["iso-to-grid"] > 0
    report("9", violations == 0, f"{violations} violations over {homs} homomorphisms into 25 "
                                 f"linear triangle-free 3-graphs ({with_grid} contain a grid)")


# ---------------------------------------------------------------------------
# 10. even-degree check


def test_criterion_10_even_degree(report):
    s = necessary_conditions(star(3))
    c4 = necessary_conditions(cycle(4))
    lv = necessary_conditions(levi(grid(3)).as_hypergraph())
    ok = (s.verdict == NON_POSITIVE and not s.has_even_degree_vertex
          and c4.has_even_degree_vertex and lv.has_even_degree_vertex)
    report("10", ok, f"K13 verdict {s.verdict}; C4 even-degree vertex {c4.has_even_degree_vertex}; "
                     f"Levi graph of grid(3) even-degree vertex {lv.has_even_degree_vertex}")
