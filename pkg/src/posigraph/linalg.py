"""Exact Gaussian elimination over the rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


class SingularSystem(ValueError):
    pass


class IncrementalBasis:
    """Row-echelon basis grown one vector at a time.

    ``try_add`` keeps a vector only when it is independent of those already
    kept, which is how deficient samples get rejected.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.pivots: list[int] = []
        self.rows: list[list[Fraction]] = []

    @property
    def rank(self) -> int:
        return len(self.rows)

    def _reduce(self, vec: Sequence) -> list[Fraction]:
        v = [Fraction(x) for x in vec]
        for piv, row in zip(self.pivots, self.rows):
            c = v[piv]
            if c:
                for k in range(piv, self.dim):
                    if row[k]:
                        v[k] -= c * row[k]
        return v

    def try_add(self, vec: Sequence) -> bool:
        v = self._reduce(vec)
        piv = next((k for k, x in enumerate(v) if x), None)
        if piv is None:
            return False
        inv = 1 / v[piv]
        v = [x * inv for x in v]
        self.pivots.append(piv)
        self.rows.append(v)
        return True


def solve(matrix: Sequence[Sequence], rhs: Sequence) -> list[Fraction]:
    """Solve the square system ``matrix @ x == rhs`` exactly.

    Raises SingularSystem if the matrix is not invertible.
    """
    n = len(matrix)
    aug = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    if any(len(row) != n + 1 for row in aug):
        raise ValueError("matrix must be square and match rhs")
    for col in range(n):
        piv = next((i for i in range(col, n) if aug[i][col]), None)
        if piv is None:
            raise SingularSystem(f"no pivot in column {col}")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        pivot_row = [x * inv for x in aug[col]]
        aug[col] = pivot_row
        for i in range(n):
            if i != col and aug[i][col]:
                c = aug[i][col]
                row = aug[i]
                for k in range(col, n + 1):
                    if pivot_row[k]:
                        row[k] -= c * pivot_row[k]
    return [aug[i][n] for i in range(n)]


def rank(matrix: Sequence[Sequence]) -> int:
    if not matrix:
        return 0
    basis = IncrementalBasis(len(matrix[0]))
    for row in matrix:
        basis.try_add(row)
    return basis.rank
