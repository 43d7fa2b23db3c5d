"""Exact homomorphism enumeration, counting and weighted sums.

The search assigns pattern vertices in breadth-first order from a vertex of
maximum degree. A partial map is extended only with target vertices that
complete every pattern edge whose other vertices are already placed; an
index from (r-1)-subsets of target edges to their completing vertices makes
that lookup constant time.

Pattern edge multiplicities multiply factors (each pattern edge contributes
its own factor). Target multiplicities add: an image edge set with several
parallel target copies contributes the sum of their weights.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Iterator, Sequence

from .structures import Hypergraph, WeightedHypergraph, contains_triangle

__all__ = [
    "VertexMap",
    "HomSum",
    "iter_homs",
    "enumerate_homs",
    "count_homs",
    "weighted_hom_sum",
    "endomorphisms",
    "automorphisms",
    "is_homomorphism",
    "is_odd_edge",
    "image_subgraph",
    "isomorphic",
    "find_isomorphism",
    "worker_count",
]


@dataclass(frozen=True)
class VertexMap:
    source_size: int
    target_size: int
    image: tuple[int, ...]

    def __post_init__(self):
        if len(self.image) != self.source_size:
            raise ValueError("vertex map must be total")
        if any(not 0 <= x < self.target_size for x in self.image):
            raise ValueError("image vertex out of range")

    def __call__(self, v: int) -> int:
        return self.image[v]

    def compose(self, after: "VertexMap") -> "VertexMap":
        """The map ``after o self``."""
        if after.source_size != self.target_size:
            raise ValueError("maps do not compose")
        return VertexMap(self.source_size, after.target_size,
                         tuple(after.image[x] for x in self.image))

    @property
    def is_injective(self) -> bool:
        return len(set(self.image)) == self.source_size


@dataclass(frozen=True)
class HomSum:
    value: Fraction
    hom_count: int


def worker_count() -> int:
    """Worker cap from ``POSIGRAPH_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("POSIGRAPH_THREADS", "1")))
    except ValueError:
        return 1


def _check_uniformity(h: Hypergraph, g: Hypergraph) -> None:
    if h.r != g.r:
        raise ValueError(f"uniformity mismatch: pattern r={h.r}, target r={g.r}")


def search_order(h: Hypergraph) -> list[int]:
    """Breadth-first from the highest-degree vertex, restarting per component."""
    deg = h.degrees()
    inc = h.incidence()
    order: list[int] = []
    seen = [False] * h.n_vertices
    for start in sorted(range(h.n_vertices), key=lambda v: (-deg[v], v)):
        if seen[start]:
            continue
        seen[start] = True
        queue = [start]
        while queue:
            v = queue.pop(0)
            order.append(v)
            nbrs = sorted({u for pos in inc[v] for u in h.edges[pos] if not seen[u]},
                          key=lambda u: (-deg[u], u))
            for u in nbrs:
                seen[u] = True
                queue.append(u)
    return order


class _Target:
    """Lookup tables over the distinct edge sets of a target hypergraph."""

    def __init__(self, g: Hypergraph, weights: dict | None = None):
        self.g = g
        self.edge_weight: dict[frozenset, object] = {}
        self.edge_count: dict[frozenset, int] = {}
        for pos, e in enumerate(g.edges):
            key = frozenset(e)
            self.edge_count[key] = self.edge_count.get(key, 0) + 1
            if weights is not None:
                self.edge_weight[key] = self.edge_weight.get(key, 0) + weights[pos]
        self.completions: dict[frozenset, list[int]] = {}
        nbrs: list[set[int]] = [set() for _ in range(g.n_vertices)]
        for key in self.edge_count:
            for x in key:
                rest = key - {x}
                self.completions.setdefault(rest, []).append(x)
                nbrs[x] |= rest
        for key in self.completions:
            self.completions[key] = sorted(set(self.completions[key]))
        self.neighbours = [frozenset(s) for s in nbrs]
        self.active = sorted({v for e in g.edges for v in e})


class _Plan:
    """Per-depth bookkeeping for a fixed pattern vertex order."""

    def __init__(self, h: Hypergraph, order: Sequence[int]):
        self.order = list(order)
        depth = {v: i for i, v in enumerate(self.order)}
        inc = h.incidence()
        self.closing: list[list[tuple[int, ...]]] = [[] for _ in self.order]
        self.completing: list[list[tuple[int, ...]]] = [[] for _ in self.order]
        self.partial: list[list[int]] = [[] for _ in self.order]
        self.has_edges = [bool(inc[v]) for v in self.order]
        for e in h.edges:
            last = max(depth[v] for v in e)
            self.closing[last].append(e)
            v = self.order[last]
            self.completing[last].append(tuple(u for u in e if u != v))
        for d, v in enumerate(self.order):
            earlier = {u for pos in inc[v] for u in h.edges[pos] if depth[u] < d}
            self.partial[d] = sorted(earlier)


def _candidates(plan: _Plan, tgt: _Target, d: int, img: list[int]) -> Sequence[int]:
    if plan.completing[d]:
        cands = None
        for others in plan.completing[d]:
            key = frozenset(img[u] for u in others)
            if len(key) != len(others):
                return ()
            found = tgt.completions.get(key)
            if found is None:
                return ()
            cands = set(found) if cands is None else cands.intersection(found)
            if not cands:
                return ()
        return sorted(cands)
    if plan.partial[d]:
        cands = None
        for u in plan.partial[d]:
            nb = tgt.neighbours[img[u]]
            cands = set(nb) if cands is None else cands & nb
        return sorted(cands)
    if plan.has_edges[d]:
        return tgt.active
    return range(tgt.g.n_vertices)


def _search(h: Hypergraph, tgt: _Target, plan: _Plan, injective: bool,
            weighted: bool, root_values: Sequence[int] | None = None):
    """Yield ``(image, weight)`` for every homomorphism; weight is 1 when unweighted."""
    n = h.n_vertices
    img = [-1] * n
    used: set[int] = set()
    order = plan.order

    def rec(d: int, acc):
        if d == n:
            yield list(img), acc
            return
        v = order[d]
        cands = root_values if (d == 0 and root_values is not None) else _candidates(plan, tgt, d, img)
        for x in cands:
            if injective and x in used:
                continue
            img[v] = x
            w = acc
            ok = True
            for e in plan.closing[d]:
                key = frozenset(img[u] for u in e)
                if len(key) != len(e) or key not in tgt.edge_count:
                    ok = False
                    break
                if weighted:
                    w = w * tgt.edge_weight[key]
            if ok:
                if injective:
                    used.add(x)
                yield from rec(d + 1, w)
                if injective:
                    used.discard(x)
            img[v] = -1

    if n == 0:
        yield [], 1
        return
    yield from rec(0, 1)


def iter_homs(h: Hypergraph, g: Hypergraph, injective: bool = False) -> Iterator[VertexMap]:
    """Stream homomorphisms H -> G in search order (no sorting)."""
    _check_uniformity(h, g)
    tgt = _Target(g)
    plan = _Plan(h, search_order(h))
    for image, _ in _search(h, tgt, plan, injective, weighted=False):
        yield VertexMap(h.n_vertices, g.n_vertices, tuple(image))


def enumerate_homs(h: Hypergraph, g: Hypergraph, injective: bool = False) -> Iterator[VertexMap]:
    """Every homomorphism H -> G exactly once, in lexicographic order of images.

    The search runs in its own vertex order, so results are collected and
    sorted before being yielded; use :func:`iter_homs` to stream unsorted.
    """
    yield from sorted(iter_homs(h, g, injective), key=lambda m: m.image)


def _root_chunks(h: Hypergraph, g: Hypergraph, workers: int) -> list[list[int]]:
    tgt_size = g.n_vertices
    if h.n_vertices == 0:
        return []
    values = list(range(tgt_size))
    return [values[i::workers] for i in range(workers)]


def _weighted_worker(args):
    h, g, weights, roots = args
    tgt = _Target(g, weights)
    plan = _Plan(h, search_order(h))
    # restrict the first search vertex to this worker's share
    total, count = 0, 0
    rootset = set(roots)
    root_cands = [x for x in _candidates(plan, tgt, 0, [-1] * h.n_vertices) if x in rootset]
    for _, w in _search(h, tgt, plan, False, True, root_values=root_cands):
        total += w
        count += 1
    return total, count


def _scaled_weights(t: WeightedHypergraph) -> tuple[list[int], int]:
    den = lcm(*(w.denominator for w in t.weights)) if t.weights else 1
    return [int(w * den) for w in t.weights], den


def weighted_hom_sum(h: Hypergraph, t: WeightedHypergraph, workers: int | None = None) -> HomSum:
    """Sum over homomorphisms H -> T of the product of image-edge weights.

    Parallel target copies add their weights; pattern copies multiply.
    ``hom_count`` counts every homomorphism, including those whose weight
    product is zero.
    """
    g = t.base
    _check_uniformity(h, g)
    scaled, den = _scaled_weights(t)
    workers = worker_count() if workers is None else workers
    if h.n_vertices == 0:
        return HomSum(Fraction(1), 1)
    if workers > 1:
        chunks = _root_chunks(h, g, workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_weighted_worker, [(h, g, scaled, c) for c in chunks]))
        total = sum(p[0] for p in parts)
        count = sum(p[1] for p in parts)
    else:
        total, count = _weighted_worker((h, g, scaled, range(g.n_vertices)))
    return HomSum(Fraction(total, den ** h.n_edges), count)


def _count_worker(args):
    h, g, roots = args
    tgt = _Target(g)
    plan = _Plan(h, search_order(h))
    rootset = set(roots)
    root_cands = [x for x in _candidates(plan, tgt, 0, [-1] * h.n_vertices) if x in rootset]
    return sum(1 for _ in _search(h, tgt, plan, False, False, root_values=root_cands))


def count_homs(h: Hypergraph, g: Hypergraph, workers: int | None = None) -> int:
    _check_uniformity(h, g)
    workers = worker_count() if workers is None else workers
    if h.n_vertices == 0:
        return 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return sum(pool.map(_count_worker, [(h, g, c) for c in _root_chunks(h, g, workers)]))
    return _count_worker((h, g, range(g.n_vertices)))


def is_homomorphism(h: Hypergraph, g: Hypergraph, pi: VertexMap | Sequence[int]) -> bool:
    image = pi.image if isinstance(pi, VertexMap) else tuple(pi)
    if len(image) != h.n_vertices or h.r != g.r:
        return False
    if any(not 0 <= x < g.n_vertices for x in image):
        return False
    targets = {frozenset(e) for e in g.edges}
    return all(frozenset(image[v] for v in e) in targets for e in h.edges)


def endomorphisms(h: Hypergraph) -> list[VertexMap]:
    return list(enumerate_homs(h, h))


def automorphisms(h: Hypergraph) -> list[VertexMap]:
    """Bijective endomorphisms that also preserve edge multiplicities."""
    mult = h.edge_multiset()
    out = []
    for m in enumerate_homs(h, h, injective=True):
        moved = {}
        for e in h.edges:
            key = tuple(sorted(m.image[v] for v in e))
            moved[key] = moved.get(key, 0) + 1
        if moved == mult:
            out.append(m)
    return out


def _preimage_count(h: Hypergraph, image: Sequence[int], target: frozenset) -> int:
    return sum(1 for e in h.edges if frozenset(image[v] for v in e) == target)


def _partite_colouring(h: Hypergraph) -> tuple[int, ...] | None:
    """A homomorphism to a single edge, if one exists."""
    edge = Hypergraph(h.r, h.r, (tuple(range(h.r)),))
    for m in iter_homs(h, edge):
        return m.image
    return None


def is_odd_edge(h: Hypergraph, pos: int) -> bool:
    """True iff every endomorphism maps exactly one edge position onto edge ``pos``.

    Preimages are counted by position, so an edge with a parallel copy is
    never odd.
    """
    if not 0 <= pos < h.n_edges:
        raise IndexError(f"edge position {pos} out of range")
    target = frozenset(h.edges[pos])
    if h.n_edges >= 2:
        colouring = _partite_colouring(h)
        if colouring is not None:
            # folding onto edge pos along the colouring sends every edge there
            return False
    for m in iter_homs(h, h):
        if _preimage_count(h, m.image, target) != 1:
            return False
    return True


def image_subgraph(h: Hypergraph, g: Hypergraph,
                   pi: VertexMap | Sequence[int]) -> tuple[Hypergraph, tuple[int, ...]]:
    """The homomorphic image of H in G, relabelled.

    Returns the image hypergraph on ``0..k-1`` (distinct image edges only)
    and the tuple mapping those labels back to vertices of G.
    """
    image = pi.image if isinstance(pi, VertexMap) else tuple(pi)
    if not is_homomorphism(h, g, image):
        raise ValueError("map is not a homomorphism")
    back = tuple(sorted(set(image)))
    label = {x: i for i, x in enumerate(back)}
    edges = sorted({tuple(sorted(label[image[v]] for v in e)) for e in h.edges})
    return Hypergraph(h.r, len(back), tuple(edges)), back


def _invariants(h: Hypergraph) -> list[tuple]:
    deg = h.degrees()
    inc = h.incidence()
    out = []
    for v in range(h.n_vertices):
        nb = sorted(deg[u] for pos in inc[v] for u in h.edges[pos] if u != v)
        out.append((deg[v], tuple(nb)))
    return out


def find_isomorphism(h1: Hypergraph, h2: Hypergraph) -> tuple[int, ...] | None:
    """A vertex bijection carrying H1's edge multiset onto H2's, or None."""
    if (h1.r, h1.n_vertices, h1.n_edges) != (h2.r, h2.n_vertices, h2.n_edges):
        return None
    if sorted(h1.edge_multiset().values()) != sorted(h2.edge_multiset().values()):
        return None
    inv1, inv2 = _invariants(h1), _invariants(h2)
    if sorted(inv1) != sorted(inv2):
        return None
    by_inv: dict[tuple, list[int]] = {}
    for x, key in enumerate(inv2):
        by_inv.setdefault(key, []).append(x)
    tgt = _Target(h2)
    plan = _Plan(h1, search_order(h1))
    target_mult = h2.edge_multiset()
    n = h1.n_vertices
    img = [-1] * n
    used: set[int] = set()

    def rec(d):
        if d == n:
            moved: dict = {}
            for e in h1.edges:
                key = tuple(sorted(img[v] for v in e))
                moved[key] = moved.get(key, 0) + 1
            return tuple(img) if moved == target_mult else None
        v = plan.order[d]
        allowed = by_inv.get(inv1[v], ())
        cands = _candidates(plan, tgt, d, img)
        for x in (c for c in cands if c in set(allowed)):
            if x in used:
                continue
            img[v] = x
            ok = all(frozenset(img[u] for u in e) in tgt.edge_count for e in plan.closing[d])
            if ok:
                used.add(x)
                found = rec(d + 1)
                if found is not None:
                    return found
                used.discard(x)
            img[v] = -1
        return None

    return rec(0)


def isomorphic(h1: Hypergraph, h2: Hypergraph) -> bool:
    return find_isomorphism(h1, h2) is not None


def classify_image(image: Hypergraph, grid_pattern: Hypergraph) -> str:
    """Bucket a homomorphic image of a grid: iso-to-grid, single-edge, triangle or violation."""
    if image.n_edges == 1:
        return "single-edge"
    if image.n_vertices == grid_pattern.n_vertices and isomorphic(image, grid_pattern):
        return "iso-to-grid"
    if contains_triangle(image):
        return "contains-triangle"
    return "violation"


def pairs_covered(h: Hypergraph) -> bool:
    """True iff every pair of vertices lies in a common edge."""
    covered = {p for e in h.edges for p in combinations(e, 2)}
    return len(covered) == h.n_vertices * (h.n_vertices - 1) // 2
