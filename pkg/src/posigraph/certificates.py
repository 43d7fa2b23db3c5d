"""Certificates of positivity and non-positivity.

Positivity is certified by a stable involution. Non-positivity is certified
by a weighted target hypergraph into which the pattern's weighted
homomorphism sum is negative: from an odd edge, or from the grid pipeline
(a linear, triangle-free, grid-free G and the box product G x G weighted
+1 on horizontal and -1 on vertical edges).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb, factorial
from typing import Iterable

from .density import SymStepFunction, density_sym, sym_from_obj, sym_to_obj
from .homomorphism import (_invariants, classify_image, count_homs, endomorphisms,
                           image_subgraph, is_odd_edge, iter_homs, weighted_hom_sum)
from .structures import (HORIZONTAL, Hypergraph, WeightedHypergraph, bipartite_to_obj,
                         box_product, contains_triangle, format_rational, grid, hypergraph_from_obj,
                         hypergraph_to_obj, is_linear, levi, parse_rational, single_edge)

__all__ = [
    "StableInvolution",
    "NegativityCertificate",
    "Report",
    "ClassificationStats",
    "GeneratorShortfall",
    "find_stable_involution",
    "verify_stable_involution",
    "odd_edge_certificate",
    "necessary_conditions",
    "grid_classifier",
    "greedy_linear_generator",
    "is_grid_free",
    "hom_constants",
    "grid_pipeline",
    "tensorize",
    "certificate_to_obj",
    "certificate_from_obj",
    "levi_witness_to_obj",
    "verify_certificate",
]

POSITIVE = "positive-certified"
NON_POSITIVE = "non-positive-certified"
UNKNOWN = "unknown"


class GeneratorShortfall(RuntimeError):
    """The greedy generator never produced enough edges within the retry policy."""


# ---------------------------------------------------------------------------
# stable involutions


@dataclass(frozen=True)
class StableInvolution:
    """An involution given by its fixed set and ordered pairs ``(plus, minus)``."""

    fixed: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]

    def mapping(self, n: int) -> list[int]:
        pi = list(range(n))
        for a, b in self.pairs:
            pi[a], pi[b] = b, a
        return pi

    @property
    def plus(self) -> frozenset:
        return frozenset(a for a, _ in self.pairs)

    @property
    def minus(self) -> frozenset:
        return frozenset(b for _, b in self.pairs)


def verify_stable_involution(h: Hypergraph, s: StableInvolution) -> bool:
    seen = list(s.fixed) + [v for p in s.pairs for v in p]
    if sorted(seen) != list(range(h.n_vertices)):
        return False
    if any(a == b for a, b in s.pairs):
        return False
    pi = s.mapping(h.n_vertices)
    moved: dict[tuple[int, ...], int] = {}
    for e in h.edges:
        key = tuple(sorted(pi[v] for v in e))
        moved[key] = moved.get(key, 0) + 1
    if moved != h.edge_multiset():
        return False
    fixed, plus, minus = set(s.fixed), s.plus, s.minus
    for e in h.edges:
        if all(v in fixed for v in e):
            return False
        if any(v in plus for v in e) and any(v in minus for v in e):
            return False
    return True


def _orient(h: Hypergraph, pi: list[int]) -> tuple[tuple[int, int], ...] | None:
    """Choose sides for the swapped pairs so no edge meets both; None if impossible.

    Each pair gets a bit saying whether its smaller element is on the plus
    side. An edge touching two moved vertices forces their sides equal,
    which is a parity constraint between the two pair bits.
    """
    parent: dict[int, int] = {}
    parity: dict[int, int] = {}

    def find(x):
        if parent.setdefault(x, x) == x:
            parity.setdefault(x, 0)
            return x, 0
        root, p = find(parent[x])
        parent[x] = root
        parity[x] ^= p
        return root, parity[x]

    def pair_of(v):
        return min(v, pi[v])

    for e in h.edges:
        moved = [v for v in e if pi[v] != v]
        for x, y in zip(moved, moved[1:]):
            # side(v) = bit(pair) xor [v is the larger element]
            want = (x > pi[x]) ^ (y > pi[y])
            (rx, px), (ry, py) = find(pair_of(x)), find(pair_of(y))
            if rx == ry:
                if px ^ py != want:
                    return None
            else:
                parent[ry] = rx
                parity[ry] = px ^ py ^ want
    pairs = []
    for a in range(len(pi)):
        b = pi[a]
        if b > a:
            _, bit = find(a)
            pairs.append((a, b) if bit == 0 else (b, a))
    return tuple(pairs)


def find_stable_involution(h: Hypergraph) -> StableInvolution | None:
    """Lexicographically least stable involution (by image array), or None.

    The search is exhaustive, so None means no stable involution exists.
    """
    n = h.n_vertices
    edge_sets = h.edge_multiset()
    inc = h.incidence()
    inv = _invariants(h)
    pi = [-1] * n

    def edges_ok(vertices: Iterable[int]) -> bool:
        for pos in {p for v in vertices for p in inc[v]}:
            e = h.edges[pos]
            if any(pi[u] < 0 for u in e):
                continue
            if all(pi[u] == u for u in e):
                return False
            image = tuple(sorted(pi[u] for u in e))
            if image not in edge_sets:
                return False
            if any(pi[u] != u and pi[u] in e for u in e):
                return False
        return True

    def multiplicities_ok() -> bool:
        moved: dict[tuple[int, ...], int] = {}
        for e in h.edges:
            key = tuple(sorted(pi[v] for v in e))
            moved[key] = moved.get(key, 0) + 1
        return moved == edge_sets

    def rec(v: int):
        while v < n and pi[v] >= 0:
            v += 1
        if v == n:
            if not multiplicities_ok():
                return None
            pairs = _orient(h, pi)
            if pairs is None:
                return None
            fixed = tuple(u for u in range(n) if pi[u] == u)
            return StableInvolution(fixed, pairs)
        for u in range(v, n):
            if pi[u] >= 0 or inv[u] != inv[v]:
                continue
            pi[v], pi[u] = u, v
            if edges_ok((v, u)):
                found = rec(v + 1)
                if found is not None:
                    return found
            pi[v] = pi[u] = -1
        return None

    return rec(0)


# ---------------------------------------------------------------------------
# negativity certificates


@dataclass(frozen=True, eq=False)
class NegativityCertificate:
    """``weighted_hom_sum(pattern, target) == total < 0`` witnesses non-positivity."""

    pattern: Hypergraph
    target: WeightedHypergraph
    total: Fraction
    provenance: str
    details: dict = field(default_factory=dict)

    def step_function(self) -> SymStepFunction:
        return tensorize(self.target)

    @property
    def sum(self) -> Fraction:
        return self.total


def tensorize(t: WeightedHypergraph) -> SymStepFunction:
    """Symmetric tensor with w(e) on every ordering of each edge and 0 elsewhere.

    Parallel or overlapping edges on the same vertex set add their weights.
    """
    entries = {e: w for e, w in t.edge_weight_table().items() if w}
    return SymStepFunction(t.r, max(t.base.n_vertices, 1), entries)


def odd_edge_certificate(h: Hypergraph) -> NegativityCertificate | None:
    """Weight an odd edge -1 and the rest +1; every endomorphism then weighs -1."""
    for pos in range(h.n_edges):
        if not is_odd_edge(h, pos):
            continue
        weights = [Fraction(1)] * h.n_edges
        weights[pos] = Fraction(-1)
        target = WeightedHypergraph(h, tuple(weights))
        total = weighted_hom_sum(h, target).value
        n_endo = len(endomorphisms(h))
        if total != -n_endo:
            raise AssertionError(f"odd-edge sum {total} differs from -{n_endo}")
        return NegativityCertificate(h, target, total, "odd-edge",
                                     {"edge": pos, "endomorphisms": n_endo})
    return None


@dataclass(frozen=True)
class Report:
    has_even_degree_vertex: bool
    even_degree_applies: bool
    odd_edge: int | None
    involution: StableInvolution | None
    verdict: str

    def reasons(self) -> list[str]:
        out = []
        if self.involution is not None:
            out.append("stable involution found")
        if self.odd_edge is not None:
            out.append(f"edge {self.odd_edge} is odd")
        if self.even_degree_applies and not self.has_even_degree_vertex:
            out.append("every vertex has odd degree")
        return out


def necessary_conditions(h: Hypergraph) -> Report:
    """Quick battery: stable involution, odd edge, even-degree vertex.

    The even-degree test is a necessary condition for positivity for graphs
    and for odd r.
    """
    even = any(d % 2 == 0 for d in h.degrees())
    applies = h.r == 2 or h.r % 2 == 1
    involution = find_stable_involution(h)
    odd = None
    if involution is None:
        odd = next((pos for pos in range(h.n_edges) if is_odd_edge(h, pos)), None)
    if involution is not None:
        verdict = POSITIVE
    elif odd is not None or (applies and not even):
        verdict = NON_POSITIVE
    else:
        verdict = UNKNOWN
    return Report(even, applies, odd, involution, verdict)


# ---------------------------------------------------------------------------
# grid classification and the grid pipeline


@dataclass(frozen=True)
class ClassificationStats:
    counts: dict
    total: int

    @property
    def violations(self) -> int:
        return self.counts.get("violation", 0)


def grid_classifier(g: Hypergraph, r: int | None = None) -> ClassificationStats:
    """Classify the image of every homomorphism grid(r) -> G.

    Buckets are iso-to-grid, single-edge, contains-triangle and violation;
    for linear G the violation bucket must stay empty.
    """
    r = g.r if r is None else r
    if g.r != r:
        raise ValueError("uniformity mismatch")
    if not is_linear(g):
        raise ValueError("grid classifier needs a linear hypergraph")
    pattern = grid(r)
    counts = {"iso-to-grid": 0, "single-edge": 0, "contains-triangle": 0, "violation": 0}
    memo: dict[frozenset, str] = {}
    total = 0
    for m in iter_homs(pattern, g):
        total += 1
        key = frozenset(frozenset(m.image[v] for v in e) for e in pattern.edges)
        kind = memo.get(key)
        if kind is None:
            image, _ = image_subgraph(pattern, g, m)
            kind = memo[key] = classify_image(image, pattern)
        counts[kind] += 1
    return ClassificationStats(counts, total)


def is_grid_free(g: Hypergraph, r: int | None = None) -> bool:
    """No injective homomorphism of grid(r) into G, i.e. no grid subgraph."""
    r = g.r if r is None else r
    for _ in iter_homs(grid(r), g, injective=True):
        return False
    return True


def _local_neighbourhood(edges: list[tuple[int, ...]], inc: dict, e: tuple[int, ...]) -> list:
    first = {pos for v in e for pos in inc.get(v, ())}
    second = {p for pos in first for v in edges[pos] for p in inc.get(v, ())}
    return [edges[p] for p in sorted(first | second)]


def _creates_grid(r: int, edges: list, inc: dict, e: tuple[int, ...]) -> bool:
    local = _local_neighbourhood(edges, inc, e) + [e]
    verts = sorted({v for f in local for v in f})
    label = {v: i for i, v in enumerate(verts)}
    sub = Hypergraph(r, len(verts), tuple(tuple(label[v] for v in f) for f in local))
    return not is_grid_free(sub, r)


def _candidate_stream(r: int, n: int, rng: random.Random):
    if comb(n, r) <= 200_000:
        pool = list(combinations(range(n), r))
        rng.shuffle(pool)
        yield from pool
        return
    seen: set = set()
    while True:
        e = tuple(sorted(rng.sample(range(n), r)))
        if e not in seen:
            seen.add(e)
            yield e


def greedy_linear_generator(r: int, n: int, seed: int = 0, forbid_grid: bool = True,
                            max_failures: int | None = None) -> Hypergraph:
    """Random greedy linear, triangle-free r-graph on n vertices.

    Candidate r-sets arrive in seeded random order; one is kept unless it
    shares two vertices with an edge, closes a triangle, or (with
    ``forbid_grid``) completes a copy of grid(r). For large n candidates
    are sampled and the run stops after ``max_failures`` consecutive
    rejections.
    """
    if r < 3 or n < r:
        raise ValueError("need r >= 3 and n >= r")
    rng = random.Random(seed)
    if max_failures is None:
        max_failures = 50 * n
    covered: set[tuple[int, int]] = set()
    link: list[set[int]] = [set() for _ in range(n)]
    edges: list[tuple[int, ...]] = []
    inc: dict[int, list[int]] = {}
    failures = 0
    for e in _candidate_stream(r, n, rng):
        ok = not any(p in covered for p in combinations(e, 2))
        if ok:
            es = set(e)
            ok = not any((link[x] & link[y]) - es for x, y in combinations(e, 2))
        if ok and forbid_grid:
            ok = not _creates_grid(r, edges, inc, e)
        if not ok:
            failures += 1
            if failures > max_failures:
                break
            continue
        failures = 0
        covered.update(combinations(e, 2))
        for x in e:
            link[x].update(v for v in e if v != x)
            inc.setdefault(x, []).append(len(edges))
        edges.append(e)
    return Hypergraph(r, n, tuple(sorted(edges)))


@lru_cache(maxsize=None)
def hom_constants(r: int) -> tuple[int, int]:
    """Brute-forced counts (c_r, C_r) of collapsing and of grid-shaped homomorphisms.

    c_r counts homomorphisms of grid(r) onto one r-edge. C_r counts, for one
    ordered pair of edges of G, the homomorphisms of grid(r) onto their
    product grid in the box product: all homomorphisms into
    ``box_product(edge, edge)`` minus the 2r * c_r collapsing ones. Rows may
    go to horizontal or to vertical edges, giving ``2 * (r!)**2``; the
    brute-force value is checked against that.
    """
    if r < 2:
        raise ValueError("need r >= 2")
    pattern = grid(r)
    c = count_homs(pattern, single_edge(r))
    square = box_product(single_edge(r), single_edge(r))
    C = count_homs(pattern, square) - square.n_edges * c
    if C != 2 * factorial(r) ** 2:
        raise AssertionError(f"type-2 count {C} differs from 2*(r!)^2 at r={r}")
    return c, C


def grid_pipeline(r: int = 3, n: int = 15, seed: int = 0, retries: int = 4,
                  direct_limit: int = 40, min_edges: Fraction | None = None) -> NegativityCertificate:
    """Build a negativity certificate for grid(r), r odd.

    Generates G greedily, doubling n until ``c_r * 2n / C_r < e(G)`` (and
    ``e(G) > min_edges * n`` if given), checks G is linear, triangle-free
    and grid-free and that every homomorphism grid(r) -> G collapses to one
    edge, then weights the box product G x G. The sum
    ``2 c_r n e(G) - C_r e(G)^2`` is cross-checked by direct enumeration
    when ``n <= direct_limit``.
    """
    if r < 3 or r % 2 == 0:
        raise ValueError("the grid pipeline needs odd r >= 3")
    c, C = hom_constants(r)
    g = None
    for _ in range(retries + 1):
        cand = greedy_linear_generator(r, n, seed)
        e = cand.n_edges
        enough = C * e > 2 * c * n and (min_edges is None or e > min_edges * n)
        if enough:
            g = cand
            break
        n *= 2
    if g is None:
        raise GeneratorShortfall(f"no generated G met the edge threshold up to n={n // 2}")
    if not is_linear(g) or contains_triangle(g) or not is_grid_free(g):
        raise AssertionError("generated hypergraph fails its own properties")
    stats = grid_classifier(g, r)
    if stats.violations or stats.counts["single-edge"] != stats.total:
        raise AssertionError(f"grid homomorphisms into G do not all collapse: {stats.counts}")
    if stats.total != c * g.n_edges:
        raise AssertionError("collapse count differs from c_r * e(G)")
    box = box_product(g, g)
    weights = tuple(Fraction(1) if t == HORIZONTAL else Fraction(-1) for t in box.edge_types)
    target = WeightedHypergraph(box, weights)
    e = g.n_edges
    closed = 2 * c * n * e - C * e * e
    details = {"r": r, "n": n, "seed": seed, "e": e, "c_r": c, "C_r": C,
               "closed_form": closed, "G": [list(x) for x in g.edges]}
    if n <= direct_limit:
        direct = weighted_hom_sum(grid(r), target)
        if direct.value != closed:
            raise AssertionError(f"direct sum {direct.value} differs from closed form {closed}")
        details["direct_sum"] = int(direct.value)
        details["hom_count"] = direct.hom_count
    if closed >= 0:
        raise AssertionError("closed-form sum is not negative")
    return NegativityCertificate(grid(r), target, Fraction(closed), "grid-pipeline", details)


def pipeline_density(cert: NegativityCertificate) -> Fraction:
    """density of the pattern against the tensorized target; equals sum / n(T)^v(H)."""
    return density_sym(cert.pattern, cert.step_function())


# ---------------------------------------------------------------------------
# serialization and independent verification


def certificate_to_obj(cert) -> dict:
    if isinstance(cert, NegativityCertificate):
        return {"kind": "negativity", "provenance": cert.provenance,
                "pattern": hypergraph_to_obj(cert.pattern),
                "target": hypergraph_to_obj(cert.target),
                "sum": format_rational(cert.total),
                "details": cert.details}
    raise TypeError(f"cannot serialize {type(cert).__name__}")


def involution_to_obj(h: Hypergraph, s: StableInvolution) -> dict:
    return {"kind": "stable-involution", "hypergraph": hypergraph_to_obj(h),
            "fixed": list(s.fixed), "pairs": [list(p) for p in s.pairs]}


def levi_witness_to_obj(pattern: Hypergraph, source, w, seed: int) -> dict:
    """Serialize a transfer; ``source`` is the weighted target or step function it came from."""
    obj = {"kind": "levi-witness", "pattern": hypergraph_to_obj(pattern),
           "levi": bipartite_to_obj(levi(pattern))}
    if isinstance(source, WeightedHypergraph):
        obj["target"] = hypergraph_to_obj(source)
    else:
        obj["step"] = sym_to_obj(source)
    obj.update({"seed": seed, "precision": w.precision, "n": w.f.n, "N": w.f.N,
                "hypergraph_density": format_rational(w.hypergraph_density),
                "lower": format_rational(w.lower), "upper": format_rational(w.upper)})
    if w.direct_density is not None:
        obj["direct_density"] = format_rational(w.direct_density)
    return obj


def certificate_from_obj(obj) -> NegativityCertificate:
    pattern = hypergraph_from_obj(obj["pattern"])
    target = hypergraph_from_obj(obj["target"])
    if not isinstance(target, WeightedHypergraph):
        raise ValueError("certificate target must carry weights")
    return NegativityCertificate(pattern, target, parse_rational(obj["sum"], "sum"),
                                 obj.get("provenance", "custom"), dict(obj.get("details", {})))


def verify_certificate(obj) -> tuple[bool, str]:
    """Recheck a serialized certificate from its own data; returns (ok, message)."""
    kind = obj.get("kind")
    if kind == "stable-involution":
        h = hypergraph_from_obj(obj["hypergraph"])
        s = StableInvolution(tuple(obj["fixed"]), tuple(tuple(p) for p in obj["pairs"]))
        ok = verify_stable_involution(h, s)
        return ok, "stable involution verified" if ok else "not a stable involution"
    if kind == "levi-witness":
        from .decomposition import transfer_witness
        pattern = hypergraph_from_obj(obj["pattern"])
        if "target" in obj:
            target = hypergraph_from_obj(obj["target"])
            if not isinstance(target, WeightedHypergraph):
                return False, "witness target must carry weights"
            a = tensorize(target)
        else:
            a = sym_from_obj(obj["step"])
        w = transfer_witness(pattern, a, precision=int(obj["precision"]),
                             seed=int(obj.get("seed", 0)))
        claimed = parse_rational(obj["upper"], "upper")
        if w.upper != claimed:
            return False, f"upper bound mismatch: recomputed {float(w.upper):.3e}"
        if obj.get("levi") != bipartite_to_obj(levi(pattern)):
            return False, "embedded Levi graph does not match the pattern"
        return True, f"Levi density enclosure upper bound {float(w.upper):.3e}"
    if kind != "negativity":
        return False, f"unknown certificate kind {kind!r}"
    cert = certificate_from_obj(obj)
    recomputed = weighted_hom_sum(cert.pattern, cert.target).value
    if recomputed != cert.total:
        return False, f"sum mismatch: recomputed {recomputed}, claimed {cert.total}"
    if recomputed >= 0:
        return False, f"sum {recomputed} is not negative"
    if cert.provenance == "grid-pipeline":
        d = cert.details
        g = Hypergraph(d["r"], d["n"], tuple(tuple(x) for x in d["G"]))
        if not is_linear(g) or contains_triangle(g) or not is_grid_free(g):
            return False, "embedded G is not linear, triangle-free and grid-free"
        box = box_product(g, g)
        if box.edges != cert.target.base.edges:
            return False, "target is not the box product of the embedded G"
        c, C = d["c_r"], d["C_r"]
        if 2 * c * g.n_vertices * g.n_edges - C * g.n_edges ** 2 != recomputed:
            return False, "closed form disagrees with the recomputed sum"
    return True, f"negative weighted homomorphism sum {recomputed}"
