"""Hypergraph data types, named constructors and JSON (de)serialization.

Graphs are the ``r == 2`` case of :class:`Hypergraph`. Every value here is
immutable; constructors are pure and deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

__all__ = [
    "Hypergraph",
    "BipartiteGraph",
    "WeightedHypergraph",
    "ParseError",
    "grid",
    "single_edge",
    "levi",
    "box_product",
    "set_inclusion_rgraph",
    "set_inclusion_graph",
    "fano",
    "cycle",
    "star",
    "complete_bipartite",
    "subdivided_complete_bipartite",
    "disjoint_union",
    "is_linear",
    "contains_triangle",
    "parse",
    "serialize",
    "format_rational",
    "parse_rational",
]

HORIZONTAL = "h"
VERTICAL = "v"


class ParseError(ValueError):
    """Malformed hypergraph JSON; ``where`` locates the offending item."""

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


@dataclass(frozen=True)
class Hypergraph:
    """An r-uniform hypergraph on vertices ``0 .. n_vertices-1``.

    Edges are sorted tuples of ``r`` distinct vertices. Repeated edges are
    allowed and are distinguished by their position in ``edges``. The edge
    list keeps the order the constructor produced it in, so named objects
    (rows before columns in :func:`grid`, horizontal before vertical in
    :func:`box_product`) have a fixed canonical layout.
    """

    r: int
    n_vertices: int
    edges: tuple[tuple[int, ...], ...] = ()
    edge_types: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"uniformity must be >= 1, got {self.r}")
        if self.n_vertices < 0:
            raise ValueError("vertex count must be non-negative")
        normalized = []
        for pos, e in enumerate(self.edges):
            e = tuple(sorted(int(v) for v in e))
            if len(e) != self.r:
                raise ValueError(f"edge {pos} has {len(e)} vertices, expected {self.r}")
            if len(set(e)) != self.r:
                raise ValueError(f"edge {pos} repeats a vertex: {e}")
            if e and (e[0] < 0 or e[-1] >= self.n_vertices):
                raise ValueError(f"edge {pos} has a vertex out of range: {e}")
            normalized.append(e)
        object.__setattr__(self, "edges", tuple(normalized))
        if self.edge_types is not None:
            types = tuple(self.edge_types)
            if len(types) != len(normalized):
                raise ValueError("edge_types length differs from edge count")
            if any(t not in (HORIZONTAL, VERTICAL) for t in types):
                raise ValueError("edge types must be 'h' or 'v'")
            object.__setattr__(self, "edge_types", types)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.n_vertices
        for e in self.edges:
            for v in e:
                deg[v] += 1
        return deg

    def incidence(self) -> list[list[int]]:
        """For each vertex, the positions of the edges containing it."""
        inc: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for pos, e in enumerate(self.edges):
            for v in e:
                inc[v].append(pos)
        return inc

    def edge_multiset(self) -> dict[tuple[int, ...], int]:
        counts: dict[tuple[int, ...], int] = {}
        for e in self.edges:
            counts[e] = counts.get(e, 0) + 1
        return counts

    def components(self) -> list[list[int]]:
        """Vertex sets of connected components, each sorted, ordered by least vertex."""
        parent = list(range(self.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            root = find(e[0])
            for v in e[1:]:
                other = find(v)
                if other != root:
                    parent[other] = root
        groups: dict[int, list[int]] = {}
        for v in range(self.n_vertices):
            groups.setdefault(find(v), []).append(v)
        return sorted(groups.values())

    def relabel(self, perm: Sequence[int]) -> "Hypergraph":
        """Image under the vertex bijection ``v -> perm[v]``."""
        if sorted(perm) != list(range(self.n_vertices)):
            raise ValueError("relabel needs a permutation of the vertices")
        return Hypergraph(self.r, self.n_vertices,
                          tuple(tuple(perm[v] for v in e) for e in self.edges),
                          self.edge_types)


@dataclass(frozen=True)
class BipartiteGraph:
    """Bipartite graph with explicit sides; edges are ``(left, right)`` pairs."""

    n_left: int
    n_right: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple((int(u), int(v)) for u, v in self.edges)
        if len(set(pairs)) != len(pairs):
            raise ValueError("duplicate edge in bipartite graph")
        for u, v in pairs:
            if not (0 <= u < self.n_left and 0 <= v < self.n_right):
                raise ValueError(f"edge {(u, v)} out of range")
        object.__setattr__(self, "edges", pairs)

    @property
    def n_vertices(self) -> int:
        return self.n_left + self.n_right

    def swap_sides(self) -> "BipartiteGraph":
        return BipartiteGraph(self.n_right, self.n_left, tuple((v, u) for u, v in self.edges))

    def right_neighbourhoods(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.n_right)]
        for u, v in self.edges:
            nbrs[v].append(u)
        return nbrs

    def as_hypergraph(self) -> Hypergraph:
        """The underlying graph; right vertex ``j`` becomes ``n_left + j``."""
        return Hypergraph(2, self.n_vertices,
                          tuple((u, self.n_left + v) for u, v in self.edges))


@dataclass(frozen=True)
class WeightedHypergraph:
    """A hypergraph with one exact rational weight per edge position."""

    base: Hypergraph
    weights: tuple[Fraction, ...] = field(default=())

    def __post_init__(self):
        weights = tuple(Fraction(w) for w in self.weights)
        if len(weights) != self.base.n_edges:
            raise ValueError(
                f"got {len(weights)} weights for {self.base.n_edges} edges")
        object.__setattr__(self, "weights", weights)

    @property
    def r(self) -> int:
        return self.base.r

    def edge_weight_table(self) -> dict[tuple[int, ...], Fraction]:
        """Total weight per distinct edge; parallel copies add."""
        table: dict[tuple[int, ...], Fraction] = {}
        for e, w in zip(self.base.edges, self.weights):
            table[e] = table.get(e, Fraction(0)) + w
        return table


# ---------------------------------------------------------------------------
# named constructors


def single_edge(r: int) -> Hypergraph:
    return Hypergraph(r, r, (tuple(range(r)),))


def grid(r: int) -> Hypergraph:
    """The r x r grid hypergraph: vertex (i, j) is ``i*r + j``; rows then columns."""
    if r < 2:
        raise ValueError("grid needs r >= 2")
    rows = [tuple(i * r + j for j in range(r)) for i in range(r)]
    cols = [tuple(i * r + j for i in range(r)) for j in range(r)]
    return Hypergraph(r, r * r, tuple(rows + cols))


def levi(h: Hypergraph) -> BipartiteGraph:
    """Incidence graph: left side V(H), right side one vertex per edge position."""
    pairs = [(v, pos) for pos, e in enumerate(h.edges) for v in e]
    return BipartiteGraph(h.n_vertices, h.n_edges, tuple(sorted(pairs)))


def box_product(g1: Hypergraph, g2: Hypergraph) -> Hypergraph:
    """Box product on ``V(g1) x V(g2)``; vertex ``(x, y)`` is ``x * n2 + y``.

    Horizontal edges (an edge of g1 times a vertex of g2) come first, then
    vertical ones; ``edge_types`` records which is which.
    """
    if g1.r != g2.r:
        raise ValueError(f"uniformity mismatch: {g1.r} vs {g2.r}")
    n2 = g2.n_vertices
    horizontal = [tuple(x * n2 + y for x in e) for e in g1.edges for y in range(n2)]
    vertical = [tuple(x * n2 + y for y in e) for x in range(g1.n_vertices) for e in g2.edges]
    types = (HORIZONTAL,) * len(horizontal) + (VERTICAL,) * len(vertical)
    return Hypergraph(g1.r, g1.n_vertices * n2, tuple(horizontal + vertical), types)


def _check_inclusion_args(n: int, m: int, k: int) -> None:
    if not (k >= 1 and m > k and n >= m):
        raise ValueError(f"need n >= m > k >= 1, got n={n}, m={m}, k={k}")


def set_inclusion_rgraph(n: int, m: int, k: int) -> Hypergraph:
    """The binom(m, k)-graph whose Levi graph is I(n, m, k).

    Vertices are the k-subsets of ``range(n)`` in lexicographic rank order;
    each m-subset X contributes the edge of all k-subsets of X.
    """
    _check_inclusion_args(n, m, k)
    if m < 2 * k:
        raise ValueError(f"need m >= 2k, got m={m}, k={k}")
    small = list(combinations(range(n), k))
    rank = {s: i for i, s in enumerate(small)}
    r = len(list(combinations(range(m), k)))
    edges = tuple(tuple(rank[s] for s in combinations(big, k))
                  for big in combinations(range(n), m))
    return Hypergraph(r, len(small), edges)


def set_inclusion_graph(n: int, m: int, k: int) -> BipartiteGraph:
    """I(n, m, k): left = k-subsets, right = m-subsets, joined by inclusion."""
    _check_inclusion_args(n, m, k)
    small = list(combinations(range(n), k))
    rank = {s: i for i, s in enumerate(small)}
    pairs = [(rank[s], j) for j, big in enumerate(combinations(range(n), m))
             for s in combinations(big, k)]
    return BipartiteGraph(len(small), len(list(combinations(range(n), m))),
                          tuple(sorted(pairs)))


def fano() -> Hypergraph:
    lines = [(0, 1, 2), (0, 3, 4), (0, 5, 6), (1, 3, 5), (1, 4, 6), (2, 3, 6), (2, 4, 5)]
    return Hypergraph(3, 7, tuple(lines))


def cycle(length: int) -> Hypergraph:
    if length < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Hypergraph(2, length, tuple((i, (i + 1) % length) for i in range(length)))


def star(leaves: int) -> Hypergraph:
    """K_{1,leaves} with centre 0."""
    return Hypergraph(2, leaves + 1, tuple((0, i) for i in range(1, leaves + 1)))


def complete_bipartite(a: int, b: int) -> BipartiteGraph:
    return BipartiteGraph(a, b, tuple((u, v) for u in range(a) for v in range(b)))


def subdivided_complete_bipartite(r: int) -> BipartiteGraph:
    """1-subdivision of K_{r,r}, laid out as ``levi(grid(r))``."""
    return levi(grid(r))


def disjoint_union(*parts: Hypergraph) -> Hypergraph:
    if not parts:
        raise ValueError("need at least one hypergraph")
    r = parts[0].r
    edges: list[tuple[int, ...]] = []
    offset = 0
    for h in parts:
        if h.r != r:
            raise ValueError("uniformity mismatch")
        edges.extend(tuple(v + offset for v in e) for e in h.edges)
        offset += h.n_vertices
    return Hypergraph(r, offset, tuple(edges))


# ---------------------------------------------------------------------------
# structural predicates


def is_linear(h: Hypergraph) -> bool:
    """True iff distinct edge positions share at most one vertex."""
    seen: set[tuple[int, int]] = set()
    for e in h.edges:
        for pair in combinations(e, 2):
            if pair in seen:
                return False
            seen.add(pair)
    return True


def contains_triangle(h: Hypergraph) -> bool:
    """Three edges meeting pairwise in exactly one vertex, with no common vertex."""
    edges = [frozenset(e) for e in h.edges]
    inc = h.incidence()
    for i, e1 in enumerate(edges):
        # partners of e1 through a single shared vertex
        partners = {}
        for v in e1:
            for j in inc[v]:
                if j != i and len(edges[j] & e1) == 1:
                    partners[j] = v
        plist = sorted(partners)
        for a, b in combinations(plist, 2):
            if partners[a] == partners[b]:
                continue
            common = edges[a] & edges[b]
            if len(common) == 1 and not common & e1:
                return True
    return False


# ---------------------------------------------------------------------------
# JSON format


def format_rational(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rational(text, where: str | None = None) -> Fraction:
    if isinstance(text, bool):
        raise ParseError(f"expected a rational, got {text!r}", where)
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ParseError(f"expected a rational string, got {text!r}", where)
    s = text.strip().replace("−", "-")
    if "." in s or "e" in s.lower():
        raise ParseError(f"decimal notation not accepted: {text!r}", where)
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {text!r}", where) from exc


def _int_field(obj: dict, key: str) -> int:
    if key not in obj:
        raise ParseError(f"missing field {key!r}")
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ParseError(f"field {key!r} must be an integer", key)
    return val


def hypergraph_from_obj(obj) -> Hypergraph | WeightedHypergraph:
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object")
    r = _int_field(obj, "r")
    n = _int_field(obj, "n")
    if r < 1 or n < 0:
        raise ParseError("need r >= 1 and n >= 0")
    raw_edges = obj.get("edges")
    if not isinstance(raw_edges, list):
        raise ParseError("field 'edges' must be a list")
    edges = []
    for pos, e in enumerate(raw_edges):
        where = f"edges[{pos}]"
        if not isinstance(e, list) or any(isinstance(v, bool) or not isinstance(v, int) for v in e):
            raise ParseError("edge must be a list of integers", where)
        if len(e) != r:
            raise ParseError(f"edge has arity {len(e)}, expected {r}", where)
        if len(set(e)) != r:
            raise ParseError("edge repeats a vertex", where)
        for v in e:
            if not 0 <= v < n:
                raise ParseError(f"vertex {v} out of range [0, {n})", where)
        edges.append(tuple(e))
    types = obj.get("edge_types")
    if types is not None:
        if not isinstance(types, list) or len(types) != len(edges):
            raise ParseError("edge_types must list one type per edge", "edge_types")
        for pos, t in enumerate(types):
            if t not in (HORIZONTAL, VERTICAL):
                raise ParseError(f"unknown edge type {t!r}", f"edge_types[{pos}]")
        types = tuple(types)
    h = Hypergraph(r, n, tuple(edges), types)
    if "weights" not in obj or obj["weights"] is None:
        return h
    weights = obj["weights"]
    if not isinstance(weights, list) or len(weights) != len(edges):
        raise ParseError("weights must list one rational per edge", "weights")
    return WeightedHypergraph(h, tuple(parse_rational(w, f"weights[{i}]")
                                       for i, w in enumerate(weights)))


def hypergraph_to_obj(h: Hypergraph | WeightedHypergraph) -> dict:
    weights = None
    if isinstance(h, WeightedHypergraph):
        weights = [format_rational(w) for w in h.weights]
        h = h.base
    obj = {"r": h.r, "n": h.n_vertices, "edges": [list(e) for e in h.edges]}
    if weights is not None:
        obj["weights"] = weights
    if h.edge_types is not None:
        obj["edge_types"] = list(h.edge_types)
    return obj


def parse(text: str) -> Hypergraph | WeightedHypergraph:
    """Read the JSON hypergraph format.

    Errors carry the JSON line/column for syntax problems and the field path
    (e.g. ``edges[3]``) for semantic ones.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    return hypergraph_from_obj(obj)


def serialize(h: Hypergraph | WeightedHypergraph) -> str:
    return json.dumps(hypergraph_to_obj(h))


def bipartite_to_obj(g: BipartiteGraph) -> dict:
    """Graph JSON for a bipartite graph; ``left`` records the side split."""
    obj = hypergraph_to_obj(g.as_hypergraph())
    obj["left"] = g.n_left
    return obj


def bipartite_from_obj(obj) -> BipartiteGraph:
    h = hypergraph_from_obj(obj)
    if isinstance(h, WeightedHypergraph) or h.r != 2:
        raise ParseError("a bipartite graph must be an unweighted 2-graph")
    left = obj.get("left")
    if isinstance(left, bool) or not isinstance(left, int) or not 0 <= left <= h.n_vertices:
        raise ParseError("bipartite graph needs an integer 'left' side size", "left")
    pairs = []
    for pos, (u, v) in enumerate(h.edges):
        if u < left <= v:
            pairs.append((u, v - left))
        else:
            raise ParseError("edge does not cross the bipartition", f"edges[{pos}]")
    return BipartiteGraph(left, h.n_vertices - left, tuple(pairs))
