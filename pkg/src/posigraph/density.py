"""Homomorphism densities against step functions, exactly.

A symmetric step function of size n is stored as a sparse map from sorted
index tuples (multisets) to nonzero rationals, plus an optional vector of
part measures (uniform ``1/n`` by default). Densities are finite sums over
index assignments; they are evaluated with integer arithmetic after scaling
every entry and measure to a common denominator, and a backtracking search
that skips assignments hitting a zero entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import lcm, prod
from typing import Callable, Iterable, Mapping, Sequence

from .structures import (BipartiteGraph, Hypergraph, format_rational,
                         parse_rational, ParseError)

__all__ = [
    "SymStepFunction",
    "BipStepFunction",
    "density_sym",
    "density_bip",
    "doubling",
    "tensor_square",
    "transpose",
    "sym_to_obj",
    "sym_from_obj",
]

EXACT = "exact"
REAL = "real"


def _key(idx: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(idx))


@dataclass(frozen=True)
class SymStepFunction:
    """Symmetric r-dimensional rational tensor of size n read as a step function.

    ``entries`` maps sorted index tuples to nonzero values; missing keys are
    zero. Symmetry holds by construction. ``measures`` gives the measure of
    each part; ``None`` means the uniform partition.
    """

    r: int
    n: int
    entries: Mapping[tuple[int, ...], Fraction]
    measures: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if self.r < 1 or self.n < 1:
            raise ValueError("need r >= 1 and n >= 1")
        clean = {}
        for idx, val in self.entries.items():
            key = _key(idx)
            if len(key) != self.r or key[0] < 0 or key[-1] >= self.n:
                raise ValueError(f"bad index {idx} for r={self.r}, n={self.n}")
            val = Fraction(val)
            if key in clean and clean[key] != val:
                raise ValueError(f"conflicting values at {key}")
            if val:
                clean[key] = val
        object.__setattr__(self, "entries", clean)
        if self.measures is not None:
            ms = tuple(Fraction(m) for m in self.measures)
            if len(ms) != self.n or any(m < 0 for m in ms) or sum(ms) != 1:
                raise ValueError("measures must be n non-negative rationals summing to 1")
            if all(m == ms[0] for m in ms):
                ms = None
            object.__setattr__(self, "measures", ms)

    @classmethod
    def constant(cls, r: int, n: int, value) -> "SymStepFunction":
        value = Fraction(value)
        return cls(r, n, {k: value for k in combinations_with_replacement(range(n), r)})

    @classmethod
    def from_function(cls, r: int, n: int, fn: Callable[..., object]) -> "SymStepFunction":
        """Build from ``fn(*sorted_index)``; only sorted tuples are queried."""
        return cls(r, n, {k: Fraction(fn(*k)) for k in combinations_with_replacement(range(n), r)})

    @classmethod
    def from_array(cls, r: int, n: int, flat: Sequence, measures=None) -> "SymStepFunction":
        """Build from a full row-major array of ``n**r`` values, checking symmetry."""
        if len(flat) != n ** r:
            raise ValueError(f"expected {n ** r} entries, got {len(flat)}")
        vals = [Fraction(x) for x in flat]
        entries = {}
        for pos, idx in enumerate(product(range(n), repeat=r)):
            key = _key(idx)
            if key in entries:
                if entries[key] != vals[pos]:
                    raise ValueError(f"array is not symmetric at index {idx}")
            else:
                entries[key] = vals[pos]
        return cls(r, n, entries, measures)

    def entry(self, idx: Iterable[int]) -> Fraction:
        return self.entries.get(_key(idx), Fraction(0))

    def part_measures(self) -> tuple[Fraction, ...]:
        if self.measures is None:
            return (Fraction(1, self.n),) * self.n
        return self.measures

    def to_flat(self) -> list[Fraction]:
        return [self.entry(idx) for idx in product(range(self.n), repeat=self.r)]

    def max_abs(self) -> Fraction:
        return max((abs(v) for v in self.entries.values()), default=Fraction(0))

    def permute(self, perm: Sequence[int]) -> "SymStepFunction":
        """Relabel part ``i`` as ``perm[i]``."""
        ms = None
        if self.measures is not None:
            ms = [Fraction(0)] * self.n
            for i, m in enumerate(self.measures):
                ms[perm[i]] = m
        return SymStepFunction(self.r, self.n,
                               {_key(perm[i] for i in k): v for k, v in self.entries.items()},
                               ms)

    def __eq__(self, other):
        if not isinstance(other, SymStepFunction):
            return NotImplemented
        return (self.r, self.n, self.entries, self.part_measures()) == \
            (other.r, other.n, other.entries, other.part_measures())

    __hash__ = None


@dataclass(frozen=True)
class BipStepFunction:
    """An n x N block matrix read as an asymmetric step function on [0,1]^2.

    Rows and columns index equal-measure parts. Entries are kept sparse
    (``(i, j) -> value``, zeros omitted). ``mode`` is ``"real"`` when the
    entries are binary roundings of irrational values; they are still exact
    rationals, only their provenance differs.
    """

    n: int
    N: int
    entries: Mapping[tuple[int, int], Fraction]
    mode: str = EXACT

    def __post_init__(self):
        if self.n < 1 or self.N < 1:
            raise ValueError("dimensions must be positive")
        if self.mode not in (EXACT, REAL):
            raise ValueError(f"unknown mode {self.mode!r}")
        clean = {}
        for (i, j), v in self.entries.items():
            if not (0 <= i < self.n and 0 <= j < self.N):
                raise ValueError(f"entry {(i, j)} out of range")
            v = Fraction(v)
            if v:
                clean[(i, j)] = v
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], mode: str = EXACT) -> "BipStepFunction":
        n, N = len(rows), len(rows[0]) if rows else 0
        if any(len(row) != N for row in rows):
            raise ValueError("ragged matrix")
        return cls(n, N, {(i, j): Fraction(v) for i, row in enumerate(rows)
                          for j, v in enumerate(row)}, mode)

    def rows(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.N for _ in range(self.n)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def row_support(self) -> list[dict[int, Fraction]]:
        sup: list[dict[int, Fraction]] = [dict() for _ in range(self.n)]
        for (i, j), v in self.entries.items():
            sup[i][j] = v
        return sup

    def column_support(self) -> list[dict[int, Fraction]]:
        sup: list[dict[int, Fraction]] = [dict() for _ in range(self.N)]
        for (i, j), v in self.entries.items():
            sup[j][i] = v
        return sup


def transpose(f: BipStepFunction) -> BipStepFunction:
    return BipStepFunction(f.N, f.n, {(j, i): v for (i, j), v in f.entries.items()}, f.mode)


# ---------------------------------------------------------------------------
# contraction engine


class _Factor:
    """A function of an ordered tuple of variables, as integers over a fixed denominator.

    ``value(vals)`` returns the scaled integer. ``completions(others)``
    returns the sorted values x such that some support tuple is formed by
    ``others`` plus x. ``partners(a)`` returns the values that share a
    support tuple with ``a`` in another slot. Either may return None when
    no pruning information is available.
    """

    vars: tuple[int, ...]
    denominator: int

    def value(self, vals: tuple[int, ...]) -> int:
        raise NotImplementedError

    def completions(self, others: tuple[int, ...]):
        return None

    def partners(self, a: int):
        return None


class _TensorFactor(_Factor):
    def __init__(self, vars_, table: dict[tuple[int, ...], int], index, cooccur,
                 denominator: int):
        self.vars = vars_
        self.table = table
        self.index = index
        self.cooccur = cooccur
        self.denominator = denominator

    def partners(self, a):
        return self.cooccur.get(a, frozenset())

    def value(self, vals):
        return self.table.get(_key(vals), 0)

    def completions(self, others):
        return self.index.get(_key(others), ())


class _ScaledTensor:
    """Integer-scaled copy of a SymStepFunction with a completion index."""

    def __init__(self, h: SymStepFunction):
        self.denominator = lcm(*(v.denominator for v in h.entries.values())) if h.entries else 1
        self.table = {k: int(v * self.denominator) for k, v in h.entries.items()}
        index: dict[tuple[int, ...], set] = {}
        for k in self.table:
            for pos in range(len(k)):
                if pos and k[pos] == k[pos - 1]:
                    continue
                index.setdefault(k[:pos] + k[pos + 1:], set()).add(k[pos])
        self.index = {k: sorted(v) for k, v in index.items()}
        cooccur: dict[int, set] = {}
        for k in self.table:
            for i, a in enumerate(k):
                slot = cooccur.setdefault(a, set())
                slot.update(b for j, b in enumerate(k) if j != i)
        self.cooccur = {a: frozenset(v) for a, v in cooccur.items()}

    def factor(self, vars_):
        return _TensorFactor(tuple(vars_), self.table, self.index, self.cooccur,
                             self.denominator)


class _ColumnFactor(_Factor):
    """Right vertex of a bipartite pattern, integrated out: (1/N) sum_j prod_k c[x_k, j]."""

    def __init__(self, vars_, rows: list[dict[int, int]], cols: list[dict[int, int]],
                 scale: int, N: int, cache: dict):
        self.vars = tuple(vars_)
        self.rows = rows
        self.cols = cols
        self.denominator = N * scale ** len(self.vars)
        self.cache = cache

    def value(self, vals):
        key = _key(vals)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        supports = sorted((self.rows[x] for x in set(key)), key=len)
        total = 0
        for j in supports[0]:
            term = 1
            for x in key:
                c = self.rows[x].get(j)
                if c is None:
                    term = 0
                    break
                term *= c
            total += term
        self.cache[key] = total
        return total

    def completions(self, others):
        key = ("c",) + _key(others)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if others:
            common = set(self.rows[others[0]])
            for x in others[1:]:
                common &= self.rows[x].keys()
        else:
            common = range(len(self.cols))
        found = sorted({i for j in common for i in self.cols[j]})
        self.cache[key] = found
        return found

    def partners(self, a):
        key = ("p", a)
        hit = self.cache.get(key)
        if hit is None:
            hit = self.cache[key] = frozenset(i for j in self.rows[a] for i in self.cols[j])
        return hit


def _elimination_order(n_vars: int, factors: Sequence[_Factor]) -> list[int]:
    """Greedy order keeping few placed variables with unplaced neighbours.

    The contraction memoizes on exactly that frontier, so its size bounds
    the work on dense inputs. Ties go to variables adjacent to the placed
    set, then to those closing more factors, then to higher degree.
    """
    nbrs: list[set[int]] = [set() for _ in range(n_vars)]
    touching: list[list[int]] = [[] for _ in range(n_vars)]
    for fi, fac in enumerate(factors):
        for v in fac.vars:
            touching[v].append(fi)
            nbrs[v].update(u for u in fac.vars if u != v)
    active = [v for v in range(n_vars) if touching[v]]
    placed: set[int] = set()
    frontier: set[int] = set()
    order: list[int] = []

    def score(v):
        after = {u for u in frontier | {v} if nbrs[u] - placed - {v}}
        closes = sum(1 for fi in touching[v]
                     if all(u in placed or u == v for u in factors[fi].vars))
        return (len(after), not (nbrs[v] & placed), -closes, -len(touching[v]), v)

    remaining = set(active)
    while remaining:
        v = min(remaining, key=score)
        remaining.discard(v)
        placed.add(v)
        order.append(v)
        frontier = {u for u in frontier | {v} if nbrs[u] - placed}
    return order


def _contract_component(order: list[int], factors: Sequence[_Factor],
                        weights: Sequence[int]) -> int:
    """Sum over assignments of ``order`` of prod(weights) * prod(factor values)."""
    depth = {v: i for i, v in enumerate(order)}
    closing: list[list[_Factor]] = [[] for _ in order]
    completing: list[list[tuple[_Factor, tuple[int, ...]]]] = [[] for _ in order]
    partial: list[list[tuple[_Factor, int]]] = [[] for _ in order]
    for fac in factors:
        last = max(depth[v] for v in fac.vars)
        closing[last].append(fac)
        v = order[last]
        others = list(fac.vars)
        others.remove(v)
        completing[last].append((fac, tuple(others)))
        for v in fac.vars:
            d = depth[v]
            if d == last:
                continue
            # v's value must co-occur with an already placed variable of fac
            earlier = [u for u in fac.vars if depth[u] < d]
            if earlier:
                partial[d].append((fac, max(earlier, key=depth.get)))
    domain = [x for x in range(len(weights)) if weights[x]]
    img = {}
    n = len(order)
    # earlier variables sharing a factor with depth >= d; rec(d) depends on nothing else
    boundary: list[tuple[int, ...]] = [()] * (n + 1)
    live: set[int] = set()
    for d in range(n - 1, -1, -1):
        for fac in closing[d]:
            live.update(fac.vars)
        live.discard(order[d])
        boundary[d] = tuple(sorted((u for u in live if depth[u] < d), key=depth.get))
    memo: dict = {}

    def candidates(d):
        cands = None
        for fac, others in completing[d]:
            found = fac.completions(tuple(img[u] for u in others))
            if found is None:
                continue
            cands = set(found) if cands is None else cands.intersection(found)
            if not cands:
                return ()
        for fac, u in partial[d]:
            found = fac.partners(img[u])
            if found is None:
                continue
            cands = set(found) if cands is None else cands & found
            if not cands:
                return ()
        if cands is None:
            return domain
        return sorted(x for x in cands if weights[x])

    def rec(d):
        key = (d,) + tuple(img[u] for u in boundary[d])
        hit = memo.get(key)
        if hit is not None:
            return hit
        v = order[d]
        total = 0
        for x in candidates(d):
            img[v] = x
            term = weights[x]
            for fac in closing[d]:
                term *= fac.value(tuple(img[u] for u in fac.vars))
                if not term:
                    break
            if term:
                if d + 1 < n:
                    term *= rec(d + 1)
                total += term
        img.pop(v, None)
        memo[key] = total
        return total

    return rec(0)


def _contract(n_vars: int, factors: Sequence[_Factor], measures: Sequence[Fraction]) -> Fraction:
    """Exact sum over maps [n_vars] -> parts of prod(measures) * prod(factors)."""
    mden = lcm(*(m.denominator for m in measures))
    weights = [int(m * mden) for m in measures]
    total = Fraction(1)
    order = _elimination_order(n_vars, factors)
    # split into connected components of the factor graph
    parent = list(range(n_vars))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for fac in factors:
        root = find(fac.vars[0]) if fac.vars else None
        for v in fac.vars[1:]:
            other = find(v)
            if other != root:
                parent[other] = root
    comps: dict[int, list[int]] = {}
    for v in order:
        comps.setdefault(find(v), []).append(v)
    by_comp: dict[int, list[_Factor]] = {}
    for fac in factors:
        if not fac.vars:
            total *= Fraction(fac.value(()), fac.denominator)
            continue
        by_comp.setdefault(find(fac.vars[0]), []).append(fac)
    for root, comp in comps.items():
        facs = by_comp.get(root, [])
        raw = _contract_component(comp, facs, weights)
        if raw == 0:
            return Fraction(0)
        den = prod(f.denominator for f in facs) * mden ** len(comp)
        total *= Fraction(raw, den)
    # variables touching no factor integrate to the total measure, which is 1
    return total


# ---------------------------------------------------------------------------
# densities


def density_sym(h: Hypergraph, f: SymStepFunction) -> Fraction:
    """t_H(f): the average over part assignments of the product over edges.

    Each pattern edge (including each copy of a repeated edge) contributes
    its own factor. Parts are weighted by their measures.
    """
    if h.r != f.r:
        raise ValueError(f"arity mismatch: hypergraph r={h.r}, step function r={f.r}")
    scaled = _ScaledTensor(f)
    factors = [scaled.factor(e) for e in h.edges]
    return _contract(h.n_vertices, factors, f.part_measures())


def density_bip(g: BipartiteGraph, f: BipStepFunction) -> Fraction:
    """t_G(f) for bipartite G: left vertices range over rows, right over columns.

    Right vertices are summed out first, each giving the column average of
    the product of its neighbours' row entries.
    """
    scale = lcm(*(v.denominator for v in f.entries.values())) if f.entries else 1
    rows = [{j: int(v * scale) for j, v in sup.items()} for sup in f.row_support()]
    cols = [{i: int(v * scale) for i, v in sup.items()} for sup in f.column_support()]
    caches: dict[int, dict] = {}
    factors: list[_Factor] = []
    for nbrs in g.right_neighbourhoods():
        if not nbrs:
            continue
        cache = caches.setdefault(len(nbrs), {})
        factors.append(_ColumnFactor(nbrs, rows, cols, scale, f.N, cache))
    return _contract(g.n_left, factors, (Fraction(1, f.n),) * f.n)


# ---------------------------------------------------------------------------
# constructions from the positivity transfer for bipartite graphs


def doubling(f: BipStepFunction) -> SymStepFunction:
    """Symmetric g on n + N parts: zero diagonal blocks, f and its transpose off-diagonal.

    Parts ``0..n-1`` carry measure ``1/(2n)`` and parts ``n..n+N-1`` carry
    ``1/(2N)``. For connected bipartite G,
    ``2**v(G) * t_G(g) == t_G(f) + t_G(f^T)``.
    """
    entries = {(i, f.n + j): v for (i, j), v in f.entries.items()}
    measures = [Fraction(1, 2 * f.n)] * f.n + [Fraction(1, 2 * f.N)] * f.N
    return SymStepFunction(2, f.n + f.N, entries, measures)


def tensor_square(f: BipStepFunction) -> SymStepFunction:
    """Symmetric h on n*N parts with h[(i,j),(k,l)] = f[i,l] * f[k,j].

    Part ``(i, j)`` is index ``i*N + j``. For bipartite G this gives
    ``t_G(h) == t_G(f) * t_G(f^T)``.
    """
    n, N = f.n, f.N
    rows = f.row_support()
    entries = {}
    for i in range(n):
        for k in range(i, n):
            for l, c_il in rows[i].items():
                for j, c_kj in rows[k].items():
                    p, q = i * N + j, k * N + l
                    entries[_key((p, q))] = c_il * c_kj
    return SymStepFunction(2, n * N, entries)


# ---------------------------------------------------------------------------
# JSON


def sym_to_obj(f: SymStepFunction) -> dict:
    obj = {"r": f.r, "n": f.n, "entries": [format_rational(v) for v in f.to_flat()]}
    if f.measures is not None:
        obj["measures"] = [format_rational(m) for m in f.measures]
    return obj


def sym_from_obj(obj) -> SymStepFunction:
    if not isinstance(obj, dict):
        raise ParseError("step function must be an object")
    try:
        r, n = int(obj["r"]), int(obj["n"])
        flat = obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError("step function needs integer r, n and an entries list") from exc
    if not isinstance(flat, list):
        raise ParseError("entries must be a list", "entries")
    vals = [parse_rational(x, f"entries[{i}]") for i, x in enumerate(flat)]
    measures = obj.get("measures")
    if measures is not None:
        measures = [parse_rational(x, f"measures[{i}]") for i, x in enumerate(measures)]
    try:
        return SymStepFunction.from_array(r, n, vals, measures)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def bip_to_obj(f: BipStepFunction) -> dict:
    return {"n": f.n, "N": f.N, "mode": f.mode,
            "entries": [[format_rational(v) for v in row] for row in f.rows()]}


def bip_from_obj(obj) -> BipStepFunction:
    if not isinstance(obj, dict) or not isinstance(obj.get("entries"), list):
        raise ParseError("bipartite step function needs an entries matrix")
    rows = [[parse_rational(x, f"entries[{i}][{j}]") for j, x in enumerate(row)]
            for i, row in enumerate(obj["entries"])]
    try:
        return BipStepFunction.from_rows(rows, obj.get("mode", EXACT))
    except (ValueError, IndexError) as exc:
        raise ParseError(str(exc)) from exc
