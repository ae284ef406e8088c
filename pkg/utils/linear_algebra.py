# utils/linear_algebra.py
"""
Sparse exact linear algebra over the rationals.

Matrices are stored row-wise as dictionaries of nonzero Fraction entries. Elimination always
pivots on the lowest available column index so that echelon forms, kernels and cohomology
representatives are deterministic for a fixed input.
"""

import logging
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

logger = logging.getLogger('BVFactorize.linear_algebra')

Scalar = Union[int, Fraction]
Vector = Dict[int, Fraction]


def to_fraction(value: Union[int, str, Fraction]) -> Fraction:
    """Convert an int, a Fraction or a "p/q" string into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"Boolean is not a rational number: {value}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"Malformed rational string: '{value}'")
    raise ValueError(f"Unsupported scalar type {type(value).__name__}: {value!r}")


def format_fraction(value: Fraction) -> str:
    """Render a Fraction as "p/q", or "p" when the denominator is 1."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def vector_add(target: Vector, source: Vector, factor: Scalar = 1) -> Vector:
    """In-place target += factor * source, dropping entries that cancel."""
    if factor == 0:
        return target
    for key, value in source.items():
        new_value = target.get(key, 0) + factor * value
        if new_value:
            target[key] = new_value
        else:
            target.pop(key, None)
    return target


def vector_scale(source: Vector, factor: Scalar) -> Vector:
    if factor == 0:
        return {}
    return {key: value * factor for key, value in source.items()}


class RationalMatrix:
    """A rows x cols matrix with sparse Fraction entries."""

    __slots__ = ('rows', 'cols', '_data')

    def __init__(self, rows: int, cols: int, data: Optional[Dict[int, Vector]] = None):
        if rows < 0 or cols < 0:
            raise ValueError(f"Matrix shape must be nonnegative, got {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self._data: Dict[int, Vector] = {}
        if data:
            for i, row in data.items():
                if not 0 <= i < rows:
                    raise IndexError(f"Row index {i} outside a {rows}x{cols} matrix")
                clean = {}
                for j, value in row.items():
                    if not 0 <= j < cols:
                        raise IndexError(f"Column index {j} outside a {rows}x{cols} matrix")
                    if value:
                        clean[j] = Fraction(value)
                if clean:
                    self._data[i] = clean

    # --- constructors ---

    @classmethod
    def zeros(cls, rows: int, cols: int) -> 'RationalMatrix':
        return cls(rows, cols)

    @classmethod
    def identity(cls, size: int) -> 'RationalMatrix':
        return cls(size, size, {i: {i: Fraction(1)} for i in range(size)})

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[Union[int, str, Fraction]]],
                   cols: Optional[int] = None) -> 'RationalMatrix':
        """Build a matrix from a list of rows (entries may be ints, Fractions or "p/q" strings)."""
        n_rows = len(rows)
        n_cols = cols if cols is not None else (len(rows[0]) if rows else 0)
        data = {}
        for i, row in enumerate(rows):
            if len(row) != n_cols:
                raise ValueError(f"Row {i} has {len(row)} entries, expected {n_cols}")
            entries = {j: to_fraction(v) for j, v in enumerate(row) if to_fraction(v) != 0}
            if entries:
                data[i] = entries
        return cls(n_rows, n_cols, data)

    @classmethod
    def from_entries(cls, rows: int, cols: int,
                     entries: Iterable[Tuple[int, int, Scalar]]) -> 'RationalMatrix':
        """Build a matrix from (row, col, value) triples; repeated positions accumulate."""
        data: Dict[int, Vector] = {}
        for i, j, value in entries:
            if value:
                vector_add(data.setdefault(i, {}), {j: Fraction(value)})
        return cls(rows, cols, data)

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[Vector]) -> 'RationalMatrix':
        data: Dict[int, Vector] = {}
        for j, column in enumerate(columns):
            for i, value in column.items():
                if value:
                    data.setdefault(i, {})[j] = Fraction(value)
        return cls(rows, len(columns), data)

    @staticmethod
    def block_diagonal(blocks: Sequence['RationalMatrix']) -> 'RationalMatrix':
        rows = sum(b.rows for b in blocks)
        cols = sum(b.cols for b in blocks)
        data: Dict[int, Vector] = {}
        r0 = c0 = 0
        for block in blocks:
            for i, row in block._data.items():
                data[r0 + i] = {c0 + j: v for j, v in row.items()}
            r0 += block.rows
            c0 += block.cols
        return RationalMatrix(rows, cols, data)

    @staticmethod
    def hstack(blocks: Sequence['RationalMatrix']) -> 'RationalMatrix':
        if not blocks:
            raise ValueError("hstack needs at least one block")
        rows = blocks[0].rows
        data: Dict[int, Vector] = {}
        c0 = 0
        for block in blocks:
            if block.rows != rows:
                raise ValueError(f"hstack row mismatch: {block.rows} != {rows}")
            for i, row in block._data.items():
                target = data.setdefault(i, {})
                for j, v in row.items():
                    target[c0 + j] = v
            c0 += block.cols
        return RationalMatrix(rows, c0, data)

    @staticmethod
    def vstack(blocks: Sequence['RationalMatrix']) -> 'RationalMatrix':
        if not blocks:
            raise ValueError("vstack needs at least one block")
        cols = blocks[0].cols
        data: Dict[int, Vector] = {}
        r0 = 0
        for block in blocks:
            if block.cols != cols:
                raise ValueError(f"vstack column mismatch: {block.cols} != {cols}")
            for i, row in block._data.items():
                data[r0 + i] = dict(row)
            r0 += block.rows
        return RationalMatrix(r0, cols, data)

    # --- access ---

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, position: Tuple[int, int]) -> Fraction:
        i, j = position
        return self._data.get(i, {}).get(j, Fraction(0))

    def row(self, i: int) -> Vector:
        return dict(self._data.get(i, {}))

    def column(self, j: int) -> Vector:
        return {i: row[j] for i, row in self._data.items() if j in row}

    def columns(self) -> List[Vector]:
        result: List[Vector] = [{} for _ in range(self.cols)]
        for i, row in self._data.items():
            for j, v in row.items():
                result[j][i] = v
        return result

    def entries(self) -> Iterator[Tuple[int, int, Fraction]]:
        for i in sorted(self._data):
            row = self._data[i]
            for j in sorted(row):
                yield i, j, row[j]

    @property
    def nnz(self) -> int:
        return sum(len(row) for row in self._data.values())

    def to_dense(self) -> List[List[Fraction]]:
        dense = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for i, j, v in self.entries():
            dense[i][j] = v
        return dense

    def is_zero(self) -> bool:
        return not self._data

    # --- arithmetic ---

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(self.entries())))

    def __repr__(self) -> str:
        return f"RationalMatrix({self.rows}x{self.cols}, nnz={self.nnz})"

    def __add__(self, other: 'RationalMatrix') -> 'RationalMatrix':
        self._check_same_shape(other, '+')
        data = {i: dict(row) for i, row in self._data.items()}
        for i, row in other._data.items():
            target = vector_add(data.setdefault(i, {}), row)
            if not target:
                del data[i]
        return RationalMatrix(self.rows, self.cols, data)

    def __sub__(self, other: 'RationalMatrix') -> 'RationalMatrix':
        return self + other.scale(-1)

    def __neg__(self) -> 'RationalMatrix':
        return self.scale(-1)

    def scale(self, factor: Scalar) -> 'RationalMatrix':
        if factor == 0:
            return RationalMatrix(self.rows, self.cols)
        return RationalMatrix(self.rows, self.cols,
                              {i: vector_scale(row, factor) for i, row in self._data.items()})

    def __matmul__(self, other: 'RationalMatrix') -> 'RationalMatrix':
        if self.cols != other.rows:
            raise ValueError(f"Cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        data: Dict[int, Vector] = {}
        for i, row in self._data.items():
            acc: Vector = {}
            for k, a in row.items():
                other_row = other._data.get(k)
                if other_row:
                    vector_add(acc, other_row, a)
            if acc:
                data[i] = acc
        return RationalMatrix(self.rows, other.cols, data)

    def apply(self, vector: Vector) -> Vector:
        """Return the sparse product M v for a sparse column vector v."""
        result: Vector = {}
        for i, row in self._data.items():
            total = sum((row[j] * v for j, v in vector.items() if j in row), Fraction(0))
            if total:
                result[i] = total
        return result

    def transpose(self) -> 'RationalMatrix':
        data: Dict[int, Vector] = {}
        for i, row in self._data.items():
            for j, v in row.items():
                data.setdefault(j, {})[i] = v
        return RationalMatrix(self.cols, self.rows, data)

    @property
    def T(self) -> 'RationalMatrix':
        return self.transpose()

    def submatrix(self, row_indices: Sequence[int], col_indices: Sequence[int]) -> 'RationalMatrix':
        col_map = {c: k for k, c in enumerate(col_indices)}
        data: Dict[int, Vector] = {}
        for new_i, old_i in enumerate(row_indices):
            row = self._data.get(old_i)
            if not row:
                continue
            picked = {col_map[j]: v for j, v in row.items() if j in col_map}
            if picked:
                data[new_i] = picked
        return RationalMatrix(len(row_indices), len(col_indices), data)

    def kron(self, other: 'RationalMatrix') -> 'RationalMatrix':
        """Kronecker product with row index i*other.rows + k and column j*other.cols + l."""
        data: Dict[int, Vector] = {}
        for i, row in self._data.items():
            for j, a in row.items():
                for k, other_row in other._data.items():
                    target = data.setdefault(i * other.rows + k, {})
                    for l, b in other_row.items():
                        target[j * other.cols + l] = a * b
        return RationalMatrix(self.rows * other.rows, self.cols * other.cols, data)

    def _check_same_shape(self, other: 'RationalMatrix', op: str):
        if self.shape != other.shape:
            raise ValueError(f"Shape mismatch for '{op}': {self.shape} vs {other.shape}")


# --- elimination ---

class IncrementalReducer:
    """
    Maintains a row-echelon basis of a growing span.

    Pivots are the lowest column index of each reduced vector, so feeding the same vectors in the
    same order always yields the same basis.
    """

    def __init__(self):
        self.pivots: Dict[int, Vector] = {}

    def __len__(self) -> int:
        return len(self.pivots)

    def reduce(self, vector: Vector) -> Vector:
        """Return the residual of vector modulo the current span."""
        residual = {k: Fraction(v) for k, v in vector.items() if v}
        while residual:
            lead = min(residual)
            pivot_row = self.pivots.get(lead)
            if pivot_row is None:
                # a non-pivot lead can still hide pivot columns further right
                blocked = [c for c in residual if c in self.pivots]
                if not blocked:
                    return residual
                col = min(blocked)
                vector_add(residual, self.pivots[col], -residual[col])
                continue
            vector_add(residual, pivot_row, -residual[lead])
        return residual

    def add(self, vector: Vector) -> bool:
        """Insert vector; return True when it enlarged the span."""
        residual = self.reduce(vector)
        if not residual:
            return False
        lead = min(residual)
        scale = 1 / residual[lead]
        self.pivots[lead] = vector_scale(residual, scale)
        return True

    def contains(self, vector: Vector) -> bool:
        return not self.reduce(vector)


def row_echelon(matrix: RationalMatrix) -> Tuple[Dict[int, Vector], List[int]]:
    """
    Compute the reduced row-echelon form of a matrix.

    Returns:
        A mapping pivot column -> normalized pivot row, and the sorted list of pivot columns
    """
    forward: Dict[int, Vector] = {}
    for i in range(matrix.rows):
        residual = matrix.row(i)
        while residual:
            lead = min(residual)
            pivot_row = forward.get(lead)
            if pivot_row is None:
                forward[lead] = vector_scale(residual, 1 / residual[lead])
                break
            vector_add(residual, pivot_row, -residual[lead])
    pivots = sorted(forward)
    # back substitution, rightmost pivot first
    for col in reversed(pivots):
        pivot_row = forward[col]
        for other_col in pivots:
            if other_col == col:
                continue
            other = forward[other_col]
            factor = other.get(col)
            if factor:
                vector_add(other, pivot_row, -factor)
    logger.debug(f"Row echelon of {matrix.rows}x{matrix.cols}: rank {len(pivots)}")
    return forward, pivots


def rank(matrix: RationalMatrix) -> int:
    if matrix.rows == 0 or matrix.cols == 0 or matrix.is_zero():
        return 0
    # eliminate along the shorter side
    source = matrix if matrix.rows <= matrix.cols else matrix.transpose()
    reducer = IncrementalReducer()
    for i in range(source.rows):
        reducer.add(source.row(i))
    return len(reducer)


def kernel(matrix: RationalMatrix) -> List[Vector]:
    """Basis of the null space, one vector per free column in increasing order."""
    reduced, pivots = row_echelon(matrix)
    pivot_set = set(pivots)
    basis = []
    for free in range(matrix.cols):
        if free in pivot_set:
            continue
        vector: Vector = {free: Fraction(1)}
        for col in pivots:
            coefficient = reduced[col].get(free)
            if coefficient:
                vector[col] = -coefficient
        basis.append(vector)
    return basis


def solve(matrix: RationalMatrix, rhs: Vector) -> Optional[Vector]:
    """
    Find one solution x of M x = rhs with all free variables set to zero.

    Returns:
        The sparse solution, or None when the system is inconsistent
    """
    marker = matrix.cols
    augmented_rows: Dict[int, Vector] = {}
    for i in range(matrix.rows):
        row = matrix.row(i)
        if rhs.get(i):
            row[marker] = Fraction(rhs[i])
        if row:
            augmented_rows[i] = row
    for i, value in rhs.items():
        if value and not 0 <= i < matrix.rows:
            raise IndexError(f"Right-hand side index {i} outside {matrix.rows} rows")
    augmented = RationalMatrix(matrix.rows, matrix.cols + 1, augmented_rows)
    reduced, pivots = row_echelon(augmented)
    if marker in reduced:
        return None
    return {col: reduced[col][marker] for col in pivots if reduced[col].get(marker)}


def is_invertible(matrix: RationalMatrix) -> bool:
    return matrix.rows == matrix.cols and rank(matrix) == matrix.rows


def inverse(matrix: RationalMatrix) -> RationalMatrix:
    """Inverse of a square matrix by Gauss-Jordan elimination."""
    if matrix.rows != matrix.cols:
        raise ValueError(f"Only square matrices can be inverted, got {matrix.shape}")
    n = matrix.rows
    augmented = RationalMatrix.hstack([matrix, RationalMatrix.identity(n)])
    reduced, pivots = row_echelon(augmented)
    if pivots[:n] != list(range(n)) or len([p for p in pivots if p < n]) != n:
        raise ValueError("Matrix is singular")
    data = {}
    for i in range(n):
        row = {j - n: v for j, v in reduced[i].items() if j >= n}
        if row:
            data[i] = row
    return RationalMatrix(n, n, data)
