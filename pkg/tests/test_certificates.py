import json
from fractions import Fraction
from itertools import combinations, permutations, product

import pytest

from posigraph.certificates import (NON_POSITIVE, POSITIVE, UNKNOWN, GeneratorShortfall,
                                    StableInvolution, certificate_from_obj, certificate_to_obj,
                                    find_stable_involution, greedy_linear_generator,
                                    grid_classifier, grid_pipeline, hom_constants,
                                    involution_to_obj, is_grid_free, necessary_conditions,
                                    odd_edge_certificate, pipeline_density, tensorize,
                                    verify_certificate, verify_stable_involution)
from posigraph.checks import random_sym
from posigraph.density import density_sym
from posigraph.homomorphism import count_homs, endomorphisms
from posigraph.structures import (Hypergraph, WeightedHypergraph, box_product,
                                  contains_triangle, cycle, disjoint_union, fano, grid, is_linear,
                                  levi, set_inclusion_rgraph, single_edge, star)


def all_involutions(n):
    for p in permutations(range(n)):
        if all(p[p[v]] == v for v in range(n)):
            yield p


def brute_least_involution(h):
    """Least image array among involutions admitting some stable orientation."""
    for p in all_involutions(h.n_vertices):
        pairs = [(a, p[a]) for a in range(h.n_vertices) if p[a] > a]
        fixed = tuple(v for v in range(h.n_vertices) if p[v] == v)
        for flips in product([False, True], repeat=len(pairs)):
            oriented = tuple((b, a) if f else (a, b) for (a, b), f in zip(pairs, flips))
            if verify_stable_involution(h, StableInvolution(fixed, oriented)):
                return p
    return None


SMALL = [cycle(4), cycle(5), cycle(6), star(2), star(3), single_edge(2), single_edge(3),
         Hypergraph(2, 4, ((0, 1), (2, 3))), Hypergraph(3, 6, ((0, 1, 2), (3, 4, 5))),
         Hypergraph(3, 5, ((0, 1, 2), (0, 3, 4))), Hypergraph(2, 3, ((0, 1), (0, 1))),
         Hypergraph(3, 6, ((0, 1, 2), (0, 1, 3), (4, 5, 2), (4, 5, 3)))]


@pytest.mark.parametrize("h", SMALL)
def test_involution_search_matches_brute_force(h):
    s = find_stable_involution(h)
    expected = brute_least_involution(h)
    if expected is None:
        assert s is None
    else:
        assert s is not None and verify_stable_involution(h, s)
        assert tuple(s.mapping(h.n_vertices)) == expected


def test_c4_involution():
    s = find_stable_involution(cycle(4))
    assert s.fixed == (0, 2) and s.pairs == ((1, 3),)


def test_no_involution_for_levi_grid():
    assert find_stable_involution(levi(grid(3)).as_hypergraph()) is None


def test_verify_rejects_bad_involutions():
    c4 = cycle(4)
    assert not verify_stable_involution(c4, StableInvolution((0, 1, 2, 3), ()))
    assert not verify_stable_involution(c4, StableInvolution((0,), ((1, 3),)))
    assert not verify_stable_involution(c4, StableInvolution((), ((0, 1), (2, 3))))


@pytest.mark.parametrize("h", [cycle(4), disjoint_union(fano(), fano()),
                               disjoint_union(grid(3), grid(3))])
def test_involution_soundness(h, rng):
    s = find_stable_involution(h)
    assert s is not None
    for _ in range(10):
        f = random_sym(rng, h.r, rng.randint(1, 2), measures=True)
        assert density_sym(h, f) >= 0


def test_odd_edge_certificates():
    cert = odd_edge_certificate(fano())
    assert cert.total == -168 == -len(endomorphisms(fano()))
    k4 = set_inclusion_rgraph(4, 3, 1)
    assert odd_edge_certificate(k4).total == -24
    assert odd_edge_certificate(grid(3)) is None
    n = cert.target.base.n_vertices
    assert density_sym(fano(), cert.step_function()) * n ** 7 == -168


def test_necessary_conditions():
    assert necessary_conditions(star(3)).verdict == NON_POSITIVE
    assert necessary_conditions(cycle(4)).verdict == POSITIVE
    rep = necessary_conditions(levi(grid(3)).as_hypergraph())
    assert rep.has_even_degree_vertex and rep.verdict == UNKNOWN
    assert necessary_conditions(fano()).odd_edge == 0


@pytest.mark.parametrize("seed", range(4))
def test_generator_properties(seed):
    g = greedy_linear_generator(3, 12, seed)
    assert is_linear(g) and not contains_triangle(g) and is_grid_free(g)
    for a, b in combinations(g.edges, 2):
        assert len(set(a) & set(b)) <= 1
    assert greedy_linear_generator(3, 12, seed) == g


def test_generator_without_grid_filter_can_contain_grids():
    found = any(not is_grid_free(greedy_linear_generator(3, 9, s, forbid_grid=False))
                for s in range(30))
    assert found


def test_classifier_on_grid_and_box():
    stats = grid_classifier(grid(3))
    assert stats.violations == 0 and stats.counts["iso-to-grid"] == 72
    with pytest.raises(ValueError):
        grid_classifier(Hypergraph(3, 4, ((0, 1, 2), (0, 1, 3))))


def test_hom_constants():
    assert hom_constants(3) == (12, 72)
    e = single_edge(3)
    total = count_homs(grid(3), box_product(e, e))
    assert total - 6 * 12 == 72


def test_pipeline_small_instance():
    cert = grid_pipeline(3, 12, seed=5)
    d = cert.details
    assert (d["n"], d["e"]) == (12, 9)
    assert cert.total == 24 * 12 * 9 - 72 * 81 == d["direct_sum"]
    n = cert.target.base.n_vertices
    assert pipeline_density(cert) * n ** 9 == cert.total


def test_pipeline_shortfall():
    with pytest.raises(GeneratorShortfall):
        grid_pipeline(3, 9, seed=0, retries=0, min_edges=Fraction(2))
    with pytest.raises(ValueError):
        grid_pipeline(4, 12)


def test_certificate_round_trip_and_tamper():
    cert = grid_pipeline(3, 12, seed=5)
    obj = json.loads(json.dumps(certificate_to_obj(cert)))
    assert verify_certificate(obj)[0]
    assert certificate_from_obj(obj).total == cert.total
    bad = dict(obj, sum=str(cert.total + 1))
    assert not verify_certificate(bad)[0]
    weights = list(obj["target"]["weights"])
    weights[0] = "-1"
    assert not verify_certificate(dict(obj, target=dict(obj["target"], weights=weights)))[0]


def test_involution_certificate_json():
    obj = involution_to_obj(cycle(4), find_stable_involution(cycle(4)))
    assert verify_certificate(obj)[0]
    assert not verify_certificate(dict(obj, pairs=[[1, 2]], fixed=[0, 3]))[0]


def test_tensorize_sums_overlaps():
    t = WeightedHypergraph(Hypergraph(2, 2, ((0, 1), (0, 1))), (Fraction(1), Fraction(-1)))
    assert tensorize(t).entries == {}
