"""Symmetric tensor decompositions and witness transfer to Levi graphs.

A symmetric tensor ``a`` of order r and size n is written as
``a = sum_j lambda_j * b_j^{(x) r}``. For odd r the coefficients are
absorbed by real r-th roots, ``c_j = (N lambda_j)^{1/r} b_j``, so that
``a = (1/N) sum_j c_j^{(x) r}``: the tensor becomes the column average of
r-fold products of an n x N matrix, i.e. a bipartite step function whose
density on the Levi graph equals the tensor's density on the hypergraph.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb, prod

import mpmath

from .density import REAL, BipStepFunction, SymStepFunction, density_bip, density_sym
from .linalg import IncrementalBasis, solve
from .structures import Hypergraph, ParseError, format_rational, levi, parse_rational

__all__ = [
    "Decomposition",
    "RescaledDecomposition",
    "TransferWitness",
    "Inconclusive",
    "SamplerExhausted",
    "decompose",
    "reconstruct",
    "rescale_odd",
    "induced_sym",
    "transfer_witness",
]

MAX_RESAMPLES = 100
DENSE_LIMIT = 84
DEFAULT_PRECISION = 128
MAX_PRECISION = 4096


class SamplerExhausted(RuntimeError):
    """The seeded sampler failed to reach full rank within the retry cap."""


class Inconclusive(RuntimeError):
    """Interval arithmetic could not separate the density from zero."""


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Coefficients and vectors with ``a = sum_j lambdas[j] * B[:, j]^{(x) r}``.

    Columns of B are stored sparsely as ``{row: value}``.
    """

    n: int
    r: int
    lambdas: tuple[Fraction, ...]
    columns: tuple[dict, ...]

    @property
    def N(self) -> int:
        return len(self.lambdas)

    def matrix(self) -> list[list[Fraction]]:
        rows = [[Fraction(0)] * self.N for _ in range(self.n)]
        for j, col in enumerate(self.columns):
            for i, v in col.items():
                rows[i][j] = v
        return rows


@dataclass(frozen=True, eq=False)
class RescaledDecomposition:
    """Odd-order form ``a ~ (1/N) sum_j C[:, j]^{(x) r}`` with rounded roots.

    ``roots[j]`` is the binary rounding of ``(N lambda_j)^{1/r}`` at
    ``precision`` bits, so ``C[:, j] = roots[j] * B[:, j]`` is an exact
    dyadic-rational column. ``entry_error`` bounds ``|C - C_exact|``
    entrywise; ``tensor_error`` bounds the entrywise gap between the induced
    tensor and the source tensor. Both bounds are exact rationals computed
    from the rounded roots, not estimates.
    """

    n: int
    r: int
    columns: tuple[dict, ...]
    roots: tuple[Fraction, ...]
    precision: int
    entry_error: Fraction
    tensor_error: Fraction

    @property
    def N(self) -> int:
        return len(self.columns)

    def as_bip(self) -> BipStepFunction:
        entries = {(i, j): v for j, col in enumerate(self.columns) for i, v in col.items()}
        return BipStepFunction(self.n, self.N, entries, REAL)


@dataclass(frozen=True, eq=False)
class TransferWitness:
    """A bipartite step function with a certified enclosure of its Levi-graph density."""

    f: BipStepFunction
    lower: Fraction
    upper: Fraction
    hypergraph_density: Fraction
    precision: int
    rescaled: RescaledDecomposition = field(repr=False)
    direct_density: Fraction | None = None

    @property
    def certified_negative(self) -> bool:
        return self.upper < 0


def _power_row(vec, monomials) -> list[int]:
    return [prod(vec[i] for i in alpha) for alpha in monomials]


def _sample_spanning(k: int, r: int, rng: random.Random) -> tuple[list[tuple[int, ...]], list]:
    """Sample integer vectors in k variables whose r-th powers span the symmetric space."""
    monomials = list(combinations_with_replacement(range(k), r))
    target = len(monomials)
    bound = r * k
    basis = IncrementalBasis(target)
    vectors: list[tuple[int, ...]] = []
    rejected = 0
    while basis.rank < target:
        vec = tuple(rng.randint(-bound, bound) for _ in range(k))
        if basis.try_add(_power_row(vec, monomials)):
            vectors.append(vec)
        else:
            rejected += 1
            if rejected > MAX_RESAMPLES:
                raise SamplerExhausted(
                    f"no spanning set after {MAX_RESAMPLES} resamples (k={k}, r={r})")
    return monomials, vectors


def _solve_coefficients(monomials, vectors, rhs) -> list[Fraction]:
    matrix = [[prod(v[i] for i in alpha) for v in vectors] for alpha in monomials]
    return solve(matrix, rhs)


def _decompose_dense(a: SymStepFunction, seed: int) -> Decomposition:
    rng = random.Random(seed)
    monomials, vectors = _sample_spanning(a.n, a.r, rng)
    lambdas = _solve_coefficients(monomials, vectors, [a.entry(alpha) for alpha in monomials])
    columns = tuple({i: Fraction(x) for i, x in enumerate(v) if x} for v in vectors)
    return Decomposition(a.n, a.r, tuple(lambdas), columns)


@lru_cache(maxsize=None)
def _unit_monomial(k: int, r: int, alpha: tuple[int, ...], seed: int):
    """Decomposition of the k-variable tensor that is 1 on permutations of alpha."""
    rng = random.Random(f"{seed}:{k}:{r}:{alpha}")
    monomials, vectors = _sample_spanning(k, r, rng)
    rhs = [1 if m == alpha else 0 for m in monomials]
    return tuple(_solve_coefficients(monomials, vectors, rhs)), tuple(vectors)


def _decompose_sparse(a: SymStepFunction, seed: int) -> Decomposition:
    lambdas: list[Fraction] = []
    columns: list[dict] = []
    for alpha in sorted(a.entries):
        coeff = a.entries[alpha]
        support = sorted(set(alpha))
        local = tuple(support.index(i) for i in alpha)
        lam, vecs = _unit_monomial(len(support), a.r, local, seed)
        for l, v in zip(lam, vecs):
            lambdas.append(coeff * l)
            columns.append({support[t]: Fraction(x) for t, x in enumerate(v) if x})
    if not lambdas:
        lambdas, columns = [Fraction(0)], [{}]
    return Decomposition(a.n, a.r, tuple(lambdas), tuple(columns))


def decompose(a: SymStepFunction, seed: int = 0, method: str = "auto") -> Decomposition:
    """Exact symmetric decomposition of ``a`` with seeded random vectors.

    ``method="dense"`` samples ``binomial(n+r-1, r)`` integer vectors whose
    r-th powers span the whole symmetric space and solves one linear system.
    ``method="sparse"`` does the same per nonzero entry, restricted to the
    few variables that entry involves, which keeps large sparse tensors
    tractable. ``"auto"`` picks dense when the full system is small.
    """
    if a.measures is not None:
        raise ValueError("decompose needs a uniform-measure step function")
    if method == "auto":
        method = "dense" if comb(a.n + a.r - 1, a.r) <= DENSE_LIMIT else "sparse"
    if method == "dense":
        return _decompose_dense(a, seed)
    if method == "sparse":
        return _decompose_sparse(a, seed)
    raise ValueError(f"unknown method {method!r}")


def _accumulate_powers(n: int, r: int, columns, scales) -> SymStepFunction:
    entries: dict[tuple[int, ...], Fraction] = {}
    for col, s in zip(columns, scales):
        if not s or not col:
            continue
        support = sorted(col)
        for alpha in combinations_with_replacement(support, r):
            term = s * prod(col[i] for i in alpha)
            entries[alpha] = entries.get(alpha, Fraction(0)) + term
    return SymStepFunction(r, n, entries)


def reconstruct(d: Decomposition) -> SymStepFunction:
    return _accumulate_powers(d.n, d.r, d.columns, d.lambdas)


def induced_sym(f: BipStepFunction, r: int) -> SymStepFunction:
    """The tensor ``a[i_1..i_r] = (1/N) sum_j f[i_1, j] ... f[i_r, j]``."""
    return _accumulate_powers(f.n, r, f.column_support(), [Fraction(1, f.N)] * f.N)


def _to_fraction(x: mpmath.mpf) -> Fraction:
    man, exp = x.man_exp
    man = int(man)
    return Fraction(man * 2 ** exp) if exp >= 0 else Fraction(man, 2 ** -exp)


def _real_root(x: Fraction, r: int, precision: int) -> Fraction:
    """Binary rounding of the real r-th root of x (r odd) at ``precision`` bits."""
    if x == 0:
        return Fraction(0)
    with mpmath.workprec(precision):
        mag = mpmath.mpf(abs(x.numerator)) / abs(x.denominator)
        root = _to_fraction(mpmath.root(mag, r))
    return root if x > 0 else -root


def rescale_odd(d: Decomposition, precision: int = DEFAULT_PRECISION) -> RescaledDecomposition:
    if d.r % 2 == 0:
        raise ValueError("coefficients can only be absorbed for odd r")
    N = d.N
    roots, columns = [], []
    entry_err = Fraction(0)
    tensor_err = Fraction(0)
    for lam, col in zip(d.lambdas, d.columns):
        x = N * lam
        rho = _real_root(x, d.r, precision)
        roots.append(rho)
        columns.append({i: rho * v for i, v in col.items() if rho})
        bmax = max((abs(v) for v in col.values()), default=Fraction(0))
        gap = abs(rho ** d.r - x)
        tensor_err += gap * bmax ** d.r
        if gap:
            # same-sign odd roots: |rho - rho*| <= |rho^r - x| / |rho|^(r-1)
            entry_err = max(entry_err, gap / abs(rho) ** (d.r - 1) * bmax)
    return RescaledDecomposition(d.n, d.r, tuple(columns), tuple(roots), precision,
                                 entry_err, tensor_err / N)


def density_error_bound(h: Hypergraph, a: SymStepFunction, delta: Fraction) -> Fraction:
    """Bound on ``|t_H(a') - t_H(a)|`` when ``|a' - a| <= delta`` entrywise.

    The density is an average of products of e(H) entries; telescoping
    each product gives ``e(H) * delta * (max|a| + delta)^(e(H)-1)``.
    """
    m = h.n_edges
    if m == 0 or delta == 0:
        return Fraction(0)
    return m * delta * (a.max_abs() + delta) ** (m - 1)


def transfer_witness(h: Hypergraph, a: SymStepFunction, precision: int = DEFAULT_PRECISION,
                     seed: int = 0, max_precision: int = MAX_PRECISION,
                     direct: bool = False) -> TransferWitness:
    """Turn a negative step function for an odd-r hypergraph into one for its Levi graph.

    The density of ``levi(h)`` against the returned bipartite step function
    equals the density of ``h`` against its induced tensor, which differs
    from ``a`` entrywise by at most the rescaling's ``tensor_error``. The
    enclosure ``[lower, upper]`` follows from that bound. When the enclosure
    reaches zero the precision doubles, up to ``max_precision``; past that
    :class:`Inconclusive` is raised. ``direct=True`` also evaluates the
    Levi-graph density straight from the matrix (small inputs only) and
    checks it lies in the enclosure.
    """
    if h.r % 2 == 0:
        raise ValueError("witness transfer needs odd r")
    if a.r != h.r:
        raise ValueError("arity mismatch between hypergraph and step function")
    t = density_sym(h, a)
    if t >= 0:
        raise ValueError(f"density is {t}, not negative")
    d = decompose(a, seed=seed)
    if reconstruct(d) != a:
        raise RuntimeError("decomposition does not reproduce the tensor")
    prec = precision
    while True:
        rd = rescale_odd(d, prec)
        bound = density_error_bound(h, a, rd.tensor_error)
        lower, upper = t - bound, t + bound
        if upper < 0:
            break
        if prec * 2 > max_precision:
            raise Inconclusive(
                f"enclosure [{float(lower)}, {float(upper)}] still meets 0 at {prec} bits")
        prec *= 2
    f = rd.as_bip()
    direct_value = None
    if direct:
        direct_value = density_bip(levi(h), f)
        if not lower <= direct_value <= upper:
            raise RuntimeError("direct Levi density escapes the certified enclosure")
    return TransferWitness(f, lower, upper, t, prec, rd, direct_value)


# ---------------------------------------------------------------------------
# JSON


def decomposition_to_obj(d: Decomposition) -> dict:
    return {"n": d.n, "r": d.r, "N": d.N,
            "lambda": [format_rational(x) for x in d.lambdas],
            "B": [[format_rational(x) for x in row] for row in d.matrix()]}


def decomposition_from_obj(obj) -> Decomposition:
    try:
        n, r = int(obj["n"]), int(obj["r"])
        lambdas = tuple(parse_rational(x, f"lambda[{i}]") for i, x in enumerate(obj["lambda"]))
        rows = obj["B"]
    except (KeyError, TypeError) as exc:
        raise ParseError("decomposition needs n, r, lambda and B") from exc
    if len(rows) != n or any(len(row) != len(lambdas) for row in rows):
        raise ParseError("B must be n x N")
    columns = tuple({i: parse_rational(rows[i][j], f"B[{i}][{j}]") for i in range(n)
                     if parse_rational(rows[i][j])} for j in range(len(lambdas)))
    return Decomposition(n, r, lambdas, columns)


def rescaled_to_obj(rd: RescaledDecomposition) -> dict:
    return {"n": rd.n, "r": rd.r, "N": rd.N, "precision": rd.precision,
            "entry_error": format_rational(rd.entry_error),
            "tensor_error": format_rational(rd.tensor_error),
            "C": [[format_rational(x) for x in row] for row in rd.as_bip().rows()]}
