"""Exact linear algebra for labelled matrices over R(z).

Determinant and rank run fraction-free (Bareiss) on a cleared-denominator
polynomial matrix, which keeps intermediate expression swell polynomial
instead of exponential.  Solving clears denominators row-wise, eliminates
fraction-free, and back-substitutes in the fraction field.  All operations
are pure; matrices are immutable after construction.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .ratfield import P_ONE, P_ZERO, Poly, R_ONE, R_ZERO, RatFn, poly_gcd, ratfn_from_dict, ratfn_to_dict

Labels = Sequence[str]


class SingularMatrixError(ArithmeticError):
    """Raised when a linear system has no unique solution over R(z)."""


def _as_labels(labels: Iterable[str]) -> tuple[str, ...]:
    out = tuple(labels)
    if len(set(out)) != len(out):
        raise ValueError(f"duplicate labels in {out!r}")
    return out


class RatMatrix:
    """Rectangular matrix of RatFn entries with labelled rows and columns."""

    __slots__ = ("row_labels", "col_labels", "entries", "_rindex", "_cindex")

    def __init__(self, row_labels: Iterable[str], col_labels: Iterable[str],
                 entries: Sequence[Sequence[RatFn]]):
        self.row_labels = _as_labels(row_labels)
        self.col_labels = _as_labels(col_labels)
        rows = tuple(tuple(row) for row in entries)
        if len(rows) != len(self.row_labels) or any(
            len(row) != len(self.col_labels) for row in rows
        ):
            raise ValueError("entry grid does not match label counts")
        self.entries = rows
        self._rindex = {lab: i for i, lab in enumerate(self.row_labels)}
        self._cindex = {lab: j for j, lab in enumerate(self.col_labels)}

    # -- constructors -----------------------------------------------------

    @classmethod
    def build(cls, row_labels: Iterable[str], col_labels: Iterable[str],
              fn: Callable[[str, str], RatFn]) -> RatMatrix:
        rows = tuple(row_labels)
        cols = tuple(col_labels)
        return cls(rows, cols, [[fn(r, c) for c in cols] for r in rows])

    @classmethod
    def identity(cls, labels: Iterable[str]) -> RatMatrix:
        labs = tuple(labels)
        return cls(labs, labs,
                   [[R_ONE if i == j else R_ZERO for j in range(len(labs))]
                    for i in range(len(labs))])

    @classmethod
    def zeros(cls, row_labels: Iterable[str], col_labels: Iterable[str]) -> RatMatrix:
        rows, cols = tuple(row_labels), tuple(col_labels)
        return cls(rows, cols, [[R_ZERO] * len(cols) for _ in rows])

    @classmethod
    def diagonal(cls, labels: Iterable[str], values: Sequence[RatFn]) -> RatMatrix:
        labs = tuple(labels)
        return cls(labs, labs,
                   [[values[i] if i == j else R_ZERO for j in range(len(labs))]
                    for i in range(len(labs))])

    # -- access ------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.row_labels), len(self.col_labels)

    @property
    def is_square(self) -> bool:
        return len(self.row_labels) == len(self.col_labels)

    def entry(self, row: str, col: str) -> RatFn:
        try:
            return self.entries[self._rindex[row]][self._cindex[col]]
        except KeyError as exc:
            raise KeyError(f"unknown label {exc.args[0]!r}") from None

    def at(self, i: int, j: int) -> RatFn:
        return self.entries[i][j]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RatMatrix)
            and self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.row_labels, self.col_labels, self.entries))

    @property
    def is_zero(self) -> bool:
        return all(e.is_zero for row in self.entries for e in row)

    def __repr__(self) -> str:
        body = ",\n  ".join(
            f"{r}: [" + ", ".join(repr(e) for e in row) + "]"
            for r, row in zip(self.row_labels, self.entries)
        )
        return f"RatMatrix(cols={list(self.col_labels)},\n  {body})"

    # -- shape operations -----------------------------------------------------

    def submatrix(self, rows: Iterable[str], cols: Iterable[str]) -> RatMatrix:
        """Select labelled rows and columns.

        Sequence arguments keep their order (the order fixes determinant
        signs); unordered sets are sorted for determinism.
        """
        rows = sorted(rows) if isinstance(rows, (set, frozenset)) else list(rows)
        cols = sorted(cols) if isinstance(cols, (set, frozenset)) else list(cols)
        for lab in rows:
            if lab not in self._rindex:
                raise KeyError(f"unknown row label {lab!r}")
        for lab in cols:
            if lab not in self._cindex:
                raise KeyError(f"unknown column label {lab!r}")
        return RatMatrix(
            rows, cols,
            [[self.entries[self._rindex[r]][self._cindex[c]] for c in cols] for r in rows],
        )

    def transpose(self) -> RatMatrix:
        return RatMatrix(
            self.col_labels, self.row_labels,
            [[self.entries[i][j] for i in range(len(self.row_labels))]
             for j in range(len(self.col_labels))],
        )

    def conj(self) -> RatMatrix:
        """Entrywise conjugation."""
        return RatMatrix(self.row_labels, self.col_labels,
                         [[e.conj() for e in row] for row in self.entries])

    # -- algebra -----------------------------------------------------------------

    def __add__(self, other: RatMatrix) -> RatMatrix:
        self._check_same_shape(other)
        return RatMatrix(
            self.row_labels, self.col_labels,
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
        )

    def __sub__(self, other: RatMatrix) -> RatMatrix:
        self._check_same_shape(other)
        return RatMatrix(
            self.row_labels, self.col_labels,
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
        )

    def scale(self, c: RatFn) -> RatMatrix:
        return RatMatrix(self.row_labels, self.col_labels,
                         [[c * e for e in row] for row in self.entries])

    def __matmul__(self, other: RatMatrix) -> RatMatrix:
        if self.col_labels != other.row_labels:
            raise ValueError("inner labels do not match")
        n = len(other.row_labels)
        out = []
        for row in self.entries:
            new_row = []
            for j in range(len(other.col_labels)):
                acc = R_ZERO
                for k in range(n):
                    a = row[k]
                    if a.is_zero:
                        continue
                    b = other.entries[k][j]
                    if b.is_zero:
                        continue
                    acc = acc + a * b
                new_row.append(acc)
            out.append(new_row)
        return RatMatrix(self.row_labels, other.col_labels, out)

    def _check_same_shape(self, other: RatMatrix) -> None:
        if self.row_labels != other.row_labels or self.col_labels != other.col_labels:
            raise ValueError("label mismatch")


# -- fraction-free elimination ------------------------------------------------------


def _cleared_rows(rows: Sequence[Sequence[RatFn]]) -> tuple[list[list[Poly]], list[Poly]]:
    """Clear denominators per row; returns polynomial rows and the row factors."""
    out_rows: list[list[Poly]] = []
    factors: list[Poly] = []
    for row in rows:
        common = P_ONE
        for e in row:
            if e.den.degree > 0:  # canonical denominators are monic, so const = 1
                g = poly_gcd(common, e.den)
                common = common * e.den.divexact(g)
        out_rows.append([e.num * common.divexact(e.den) for e in row])
        factors.append(common)
    return out_rows, factors


def det(matrix: RatMatrix) -> RatFn:
    """Determinant over R(z) via fraction-free elimination; det of 0x0 is 1."""
    if not matrix.is_square:
        raise ValueError("determinant of a non-square matrix")
    n = len(matrix.row_labels)
    if n == 0:
        return R_ONE
    if n == 1:
        return matrix.entries[0][0]
    rows, factors = _cleared_rows(matrix.entries)
    sign = 1
    prev = P_ONE
    for k in range(n - 1):
        pivot_row = next((i for i in range(k, n) if not rows[i][k].is_zero), None)
        if pivot_row is None:
            return R_ZERO
        if pivot_row != k:
            rows[k], rows[pivot_row] = rows[pivot_row], rows[k]
            sign = -sign
        pivot = rows[k][k]
        for i in range(k + 1, n):
            rik = rows[i][k]
            for j in range(k + 1, n):
                rows[i][j] = (pivot * rows[i][j] - rik * rows[k][j]).divexact(prev)
            rows[i][k] = P_ZERO
        prev = pivot
    num = rows[n - 1][n - 1]
    if sign < 0:
        num = -num
    den = P_ONE
    for f in factors:
        den = den * f
    return RatFn(num, den)


def rank(matrix: RatMatrix) -> int:
    """Rank over the field R(z)."""
    n_rows, n_cols = matrix.shape
    if n_rows == 0 or n_cols == 0:
        return 0
    rows, _ = _cleared_rows(matrix.entries)
    r = 0
    prev = P_ONE
    for c in range(n_cols):
        pivot_row = next((i for i in range(r, n_rows) if not rows[i][c].is_zero), None)
        if pivot_row is None:
            continue
        if pivot_row != r:
            rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        pivot = rows[r][c]
        for i in range(r + 1, n_rows):
            ric = rows[i][c]
            for j in range(c + 1, n_cols):
                rows[i][j] = (pivot * rows[i][j] - ric * rows[r][j]).divexact(prev)
            rows[i][c] = P_ZERO
        prev = pivot
        r += 1
        if r == n_rows:
            break
    return r


def rank_eval(matrix: RatMatrix, seed: int = 0) -> int:
    """Probabilistic rank: substitute a random rational for z, then exact rank over Q.

    The result is a lower bound on rank(); it equals the true rank except when
    the substitution hits a measure-zero set.  Substitutions landing on a
    denominator root are resampled internally.
    """
    n_rows, n_cols = matrix.shape
    if n_rows == 0 or n_cols == 0:
        return 0
    rng = random.Random(seed)
    while True:
        point = Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 10**3))
        try:
            rows = [[e(point) for e in row] for row in matrix.entries]
        except ArithmeticError:
            continue
        return _rational_rank(rows)


def _rational_rank(rows: list[list[Fraction]]) -> int:
    n_rows, n_cols = len(rows), len(rows[0])
    r = 0
    for c in range(n_cols):
        pivot_row = next((i for i in range(r, n_rows) if rows[i][c]), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        pivot = rows[r][c]
        for i in range(r + 1, n_rows):
            if rows[i][c]:
                factor = rows[i][c] / pivot
                for j in range(c, n_cols):
                    rows[i][j] -= factor * rows[r][j]
        r += 1
        if r == n_rows:
            break
    return r


def solve(matrix: RatMatrix, rhs: Sequence[RatFn]) -> list[RatFn]:
    """Solve M x = b for square M; raises SingularMatrixError when det(M) = 0."""
    cols = solve_many(matrix, [[b] for b in rhs])
    return [row[0] for row in cols]


def solve_many(matrix: RatMatrix, rhs_rows: Sequence[Sequence[RatFn]]) -> list[list[RatFn]]:
    """Solve M X = B where B is given row-wise; returns the rows of X."""
    if not matrix.is_square:
        raise ValueError("solve requires a square matrix")
    n = len(matrix.row_labels)
    if len(rhs_rows) != n:
        raise ValueError("right-hand side has wrong length")
    width = len(rhs_rows[0]) if n else 0
    if n == 0:
        return []
    augmented = [list(row) + list(extra) for row, extra in zip(matrix.entries, rhs_rows)]
    rows, _ = _cleared_rows(augmented)
    total = n + width
    prev = P_ONE
    for k in range(n):
        pivot_row = next((i for i in range(k, n) if not rows[i][k].is_zero), None)
        if pivot_row is None:
            raise SingularMatrixError("matrix is singular over R(z)")
        if pivot_row != k:
            rows[k], rows[pivot_row] = rows[pivot_row], rows[k]
        pivot = rows[k][k]
        for i in range(k + 1, n):
            rik = rows[i][k]
            for j in range(k + 1, total):
                rows[i][j] = (pivot * rows[i][j] - rik * rows[k][j]).divexact(prev)
            rows[i][k] = P_ZERO
        prev = pivot
    # back-substitution in the fraction field
    solution: list[list[RatFn]] = [[R_ZERO] * width for _ in range(n)]
    for i in range(n - 1, -1, -1):
        inv_pivot = RatFn(P_ONE, rows[i][i])
        for b in range(width):
            acc = RatFn(rows[i][n + b])
            for j in range(i + 1, n):
                coeff = rows[i][j]
                if not coeff.is_zero:
                    acc = acc - RatFn(coeff) * solution[j][b]
            solution[i][b] = acc * inv_pivot
    return solution


def inverse(matrix: RatMatrix) -> RatMatrix:
    """Matrix inverse over R(z); raises SingularMatrixError when not invertible."""
    if not matrix.is_square:
        raise ValueError("inverse of a non-square matrix")
    n = len(matrix.row_labels)
    eye = [[R_ONE if i == j else R_ZERO for j in range(n)] for i in range(n)]
    rows = solve_many(matrix, eye)
    return RatMatrix(matrix.col_labels, matrix.row_labels, rows)


def conj_matrix(matrix: RatMatrix) -> RatMatrix:
    return matrix.conj()


# -- serialization -------------------------------------------------------------------


def matrix_to_dict(matrix: RatMatrix) -> dict:
    return {
        "rows": list(matrix.row_labels),
        "cols": list(matrix.col_labels),
        "entries": [[ratfn_to_dict(e) for e in row] for row in matrix.entries],
    }


def matrix_from_dict(d: dict) -> RatMatrix:
    return RatMatrix(
        d["rows"], d["cols"],
        [[ratfn_from_dict(e) for e in row] for row in d["entries"]],
    )
