#! /usr/bin/env python

from __future__ import annotations
from dataclasses import dataclass
from typing import Iterable, Literal, Optional, Sequence

from sympy import isprime, multiplicity
try:
    from sympy.core.intfunc import igcdex
except ImportError:
    from sympy.core.numbers import igcdex
from typing_extensions import Self


Strategy = Literal["min_abs", "first_nonzero"]
STRATEGIES = ("min_abs", "first_nonzero")


@dataclass(frozen=True)
class IntMatrix:
    """ Dense matrix of exact integers, stored row-major.

    Instances are immutable; every operation returns a new matrix.
    """
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise ValueError("Matrix dimensions must be nonnegative")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(f"Expected {self.rows * self.cols} entries, "
                             f"got {len(self.entries)}")

    @classmethod
    def from_rows(cls, rows:Iterable[Sequence[int]],
                  cols:Optional[int] = None) -> Self:
        """ Build a matrix from a list of rows

        :param rows: rows of integers
        :type rows: Iterable[Sequence[int]]
        :param cols: number of columns; required when there are no rows
        :type cols: Optional[int]
        :rtype: IntMatrix
        """
        rows = [tuple(int(v) for v in row) for row in rows]
        if cols is None:
            if len(rows) <= 0:
                raise ValueError("Cannot infer the width of an empty matrix")
            cols = len(rows[0])

        for row in rows:
            if len(row) != cols:
                raise ValueError("Rows of unequal length")

        return cls(len(rows), cols, tuple(v for row in rows for v in row))

    @classmethod
    def zeros(cls, rows:int, cols:int) -> Self:
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, n:int) -> Self:
        return cls(n, n, tuple(int(i == j) for i in range(n)
                               for j in range(n)))

    @classmethod
    def diagonal(cls, values:Sequence[int], rows:Optional[int] = None,
                 cols:Optional[int] = None) -> Self:
        rows = len(values) if rows is None else rows
        cols = rows if cols is None else cols
        entries = [0] * (rows * cols)
        for i, v in enumerate(values):
            entries[i * cols + i] = int(v)

        return cls(rows, cols, tuple(entries))

    def row(self, i:int) -> tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j:int) -> tuple[int, ...]:
        return self.entries[j::self.cols] if self.cols > 0 else tuple()

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def __getitem__(self, key:tuple[int, int]) -> int:
        i, j = key
        return self.entries[i * self.cols + j]

    def transpose(self) -> IntMatrix:
        return IntMatrix(self.cols, self.rows,
                         tuple(self.entries[i * self.cols + j]
                               for j in range(self.cols)
                               for i in range(self.rows)))

    def __matmul__(self, other:IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise ValueError(f"Cannot multiply {self.rows}x{self.cols} "
                             f"by {other.rows}x{other.cols}")

        out = list()
        for i in range(self.rows):
            acc = [0] * other.cols
            for k, a in enumerate(self.row(i)):
                if a == 0:
                    continue
                for j, b in enumerate(other.row(k)):
                    if b:
                        acc[j] += a * b
            out.extend(acc)

        return IntMatrix(self.rows, other.cols, tuple(out))

    def scale(self, k:int) -> IntMatrix:
        return IntMatrix(self.rows, self.cols,
                         tuple(k * v for v in self.entries))

    def vstack(self, other:IntMatrix) -> IntMatrix:
        if self.cols != other.cols:
            raise ValueError("Column counts differ")

        return IntMatrix(self.rows + other.rows, self.cols,
                         self.entries + other.entries)

    def hstack(self, other:IntMatrix) -> IntMatrix:
        if self.rows != other.rows:
            raise ValueError("Row counts differ")

        return IntMatrix.from_rows([self.row(i) + other.row(i)
                                    for i in range(self.rows)],
                                   cols=self.cols + other.cols)

    def is_zero(self) -> bool:
        return not any(self.entries)

    def __str__(self) -> str:
        return "\n".join(" ".join(str(v) for v in self.row(i))
                         for i in range(self.rows))


@dataclass(frozen=True)
class SmithForm:
    """ Smith normal form D = U·A·V of an integer matrix A

    The transforms are absent when computed on the transform-free path.
    """
    D: IntMatrix
    U: Optional[IntMatrix]
    V: Optional[IntMatrix]
    invariant_factors: tuple[int, ...]
    rank: int

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.D[i, i] for i in range(min(self.D.rows,
                                                     self.D.cols)))

    def verify(self, A:IntMatrix) -> bool:
        """ Check U·A·V = D exactly

        :param A: the matrix this form was computed from
        :type A: IntMatrix
        :rtype: bool
        """
        if self.U is None or self.V is None:
            raise ValueError("Smith form was computed without transforms")

        return (self.U @ A) @ self.V == self.D


def _add_row(rows:list[list[int]], dst:int, src:int, k:int) -> None:
    if k:
        rows[dst] = [a + k * b for a, b in zip(rows[dst], rows[src])]

def _add_col(rows:list[list[int]], dst:int, src:int, k:int) -> None:
    if k:
        for row in rows:
            row[dst] += k * row[src]

def _combine_rows(rows:list[list[int]], t:int, i:int,
                  s:int, u:int, v:int, w:int) -> None:
    # (row_t, row_i) <- (s row_t + u row_i, v row_t + w row_i)
    rt, ri = rows[t], rows[i]
    rows[t] = [s * a + u * b for a, b in zip(rt, ri)]
    rows[i] = [v * a + w * b for a, b in zip(rt, ri)]

def _combine_cols(rows:list[list[int]], t:int, j:int,
                  s:int, u:int, v:int, w:int) -> None:
    for row in rows:
        a, b = row[t], row[j]
        row[t] = s * a + u * b
        row[j] = v * a + w * b

def _identity_rows(n:int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]

def xgcd(a:int, b:int) -> tuple[int, int, int]:
    """ Extended gcd with a nonnegative gcd

    :rtype: tuple[int, int, int]
    :returns: (g, s, t) such that s·a + t·b = g
    """
    s, t, g = igcdex(a, b)
    g, s, t = int(g), int(s), int(t)
    if g < 0:
        g, s, t = -g, -s, -t

    return g, s, t


def _hnf_inplace(H:list[list[int]], ncols:int,
                 U:Optional[list[list[int]]] = None) -> list[int]:
    """ Row Hermite normal form with min-abs pivoting; returns pivot
        columns. Rows of U receive the same operations. """
    m = len(H)
    pivots = list()
    r = 0
    for c in range(ncols):
        if r >= m:
            break

        while True:
            nonzero = [i for i in range(r, m) if H[i][c] != 0]
            if len(nonzero) <= 0:
                break

            piv = min(nonzero, key=lambda i: (abs(H[i][c]), i))
            if piv != r:
                H[r], H[piv] = H[piv], H[r]
                if U is not None:
                    U[r], U[piv] = U[piv], U[r]

            done = True
            for i in range(r + 1, m):
                if H[i][c] != 0:
                    q = H[i][c] // H[r][c]
                    _add_row(H, i, r, -q)
                    if U is not None:
                        _add_row(U, i, r, -q)
                    if H[i][c] != 0:
                        done = False

            if done:
                break

        if H[r][c] == 0:
            continue

        if H[r][c] < 0:
            H[r] = [-a for a in H[r]]
            if U is not None:
                U[r] = [-a for a in U[r]]

        # reduce above the pivot into [0, pivot)
        for i in range(r):
            q = H[i][c] // H[r][c]
            _add_row(H, i, r, -q)
            if U is not None:
                _add_row(U, i, r, -q)

        pivots.append(c)
        r += 1

    return pivots

def hnf(A:IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """ Row-style Hermite normal form.

    Pivots are positive, entries above a pivot lie in [0, pivot), and
    zero rows are collected at the bottom.

    :param A: input matrix
    :type A: IntMatrix
    :rtype: tuple[IntMatrix, IntMatrix]
    :returns: (H, U) with U unimodular and U·A = H
    """
    H = A.to_rows()
    U = _identity_rows(A.rows)
    _hnf_inplace(H, A.cols, U)

    return (IntMatrix.from_rows(H, cols=A.cols),
            IntMatrix.from_rows(U, cols=A.rows))

def lattice_basis(vectors:Iterable[Sequence[int]], ncols:int) -> IntMatrix:
    """ Canonical basis (nonzero HNF rows) of the lattice spanned by the
        vectors.

    :param vectors: spanning vectors
    :type vectors: Iterable[Sequence[int]]
    :param ncols: ambient dimension
    :type ncols: int
    :rtype: IntMatrix
    """
    H = [list(v) for v in vectors]
    pivots = _hnf_inplace(H, ncols)

    return IntMatrix.from_rows(H[:len(pivots)], cols=ncols)

def _choose_pivot(S:list[list[int]], t:int,
                  strategy:Strategy) -> Optional[tuple[int, int]]:
    m, n = len(S), len(S[0]) if len(S) > 0 else 0
    if strategy == "first_nonzero":
        for j in range(t, n):
            for i in range(t, m):
                if S[i][j] != 0:
                    return i, j
        return None

    best = None
    for i in range(t, m):
        for j in range(t, n):
            a = S[i][j]
            if a != 0 and (best is None or abs(a) < best[0]):
                best = (abs(a), i, j)
                if best[0] == 1:
                    return i, j

    return None if best is None else (best[1], best[2])

def snf(A:IntMatrix, strategy:Strategy = "min_abs",
        transforms:bool = True) -> SmithForm:
    """ Smith normal form with unimodular transforms.

    :param A: input matrix
    :type A: IntMatrix
    :param strategy: pivot choice; 'min_abs' takes the entry of least
        absolute value, 'first_nonzero' the first nonzero entry in
        column-major order
    :type strategy: Strategy
    :param transforms: also accumulate U and V
    :type transforms: bool
    :rtype: SmithForm
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"Unknown pivot strategy: {strategy}")

    m, n = A.rows, A.cols
    S = A.to_rows()
    U = _identity_rows(m) if transforms else None
    V = _identity_rows(n) if transforms else None

    t = 0
    while t < min(m, n):
        pos = _choose_pivot(S, t, strategy)
        if pos is None:
            break

        i, j = pos
        if i != t:
            S[t], S[i] = S[i], S[t]
            if U is not None:
                U[t], U[i] = U[i], U[t]
        if j != t:
            for row in S:
                row[t], row[j] = row[j], row[t]
            if V is not None:
                for row in V:
                    row[t], row[j] = row[j], row[t]

        while True:
            for i in range(t + 1, m):
                b = S[i][t]
                if b == 0:
                    continue
                a = S[t][t]
                if b % a == 0:
                    _add_row(S, i, t, -(b // a))
                    if U is not None:
                        _add_row(U, i, t, -(b // a))
                else:
                    g, s, u = xgcd(a, b)
                    _combine_rows(S, t, i, s, u, -b // g, a // g)
                    if U is not None:
                        _combine_rows(U, t, i, s, u, -b // g, a // g)

            for j in range(t + 1, n):
                b = S[t][j]
                if b == 0:
                    continue
                a = S[t][t]
                if b % a == 0:
                    _add_col(S, j, t, -(b // a))
                    if V is not None:
                        _add_col(V, j, t, -(b // a))
                else:
                    g, s, u = xgcd(a, b)
                    _combine_cols(S, t, j, s, u, -b // g, a // g)
                    if V is not None:
                        _combine_cols(V, t, j, s, u, -b // g, a // g)

            if any(S[i][t] != 0 for i in range(t + 1, m)):
                continue

            # divisibility: pull an offending row into the pivot row
            d = S[t][t]
            offending = next((i for i in range(t + 1, m)
                              for j in range(t + 1, n)
                              if S[i][j] % d != 0), None)
            if offending is None:
                break

            _add_row(S, t, offending, 1)
            if U is not None:
                _add_row(U, t, offending, 1)

        if S[t][t] < 0:
            S[t] = [-a for a in S[t]]
            if U is not None:
                U[t] = [-a for a in U[t]]

        t += 1

    D = IntMatrix.from_rows(S, cols=n) if m > 0 else IntMatrix.zeros(0, n)
    invariant_factors = tuple(S[k][k] for k in range(t) if S[k][k] > 1)

    return SmithForm(D = D,
                     U = None if U is None else IntMatrix.from_rows(U,
                                                                  cols=m),
                     V = None if V is None else IntMatrix.from_rows(V,
                                                                  cols=n),
                     invariant_factors = invariant_factors,
                     rank = t)

def rank(A:IntMatrix) -> int:
    return snf(A, transforms=False).rank

def rational_kernel_basis(A:IntMatrix) -> list[tuple[int, ...]]:
    """ Basis of the saturated integer kernel {v : A·v = 0}.

    The basis is returned in HNF, so each vector is primitive.

    :param A: input matrix
    :type A: IntMatrix
    :rtype: list[tuple[int, ...]]
    """
    n = A.cols
    if n <= 0:
        return list()

    sf = snf(A)
    assert sf.V is not None
    basis = [sf.V.column(j) for j in range(sf.rank, n)]
    if len(basis) <= 0:
        return list()

    B = lattice_basis(basis, n)

    return [B.row(i) for i in range(B.rows)]

def solve_in_basis(basis:IntMatrix,
                   v:Sequence[int]) -> Optional[tuple[int, ...]]:
    """ Integer coordinates of v with respect to an HNF basis

    :param basis: nonzero rows of a Hermite normal form
    :type basis: IntMatrix
    :param v: vector in the ambient space
    :type v: Sequence[int]
    :rtype: Optional[tuple[int, ...]]
    :returns: coordinates c with c·basis = v, or None if v is not in
        the lattice
    """
    res = list(v)
    if len(res) != basis.cols:
        raise ValueError("Vector length differs from ambient dimension")

    coeffs = list()
    for k in range(basis.rows):
        row = basis.row(k)
        piv = next(j for j, a in enumerate(row) if a != 0)
        q, r = divmod(res[piv], row[piv])
        if r != 0:
            return None

        coeffs.append(q)
        if q:
            res = [a - q * b for a, b in zip(res, row)]

    if any(res):
        return None

    return tuple(coeffs)

def contains(basis:IntMatrix, v:Sequence[int]) -> bool:
    return solve_in_basis(basis, v) is not None

def contains_lattice(basis:IntMatrix, sub:IntMatrix) -> bool:
    return all(contains(basis, sub.row(i)) for i in range(sub.rows))

def lattice_sum(a:IntMatrix, b:IntMatrix) -> IntMatrix:
    return lattice_basis(a.to_rows() + b.to_rows(), a.cols)

def saturate(vectors:Sequence[Sequence[int]], ncols:int) -> IntMatrix:
    """ All integer vectors in the rational span of the vectors

    Computed as the kernel of the kernel.

    :rtype: IntMatrix
    """
    rows = [list(v) for v in vectors if any(v)]
    if len(rows) <= 0:
        return IntMatrix.zeros(0, ncols)

    orth = rational_kernel_basis(IntMatrix.from_rows(rows, cols=ncols))
    if len(orth) <= 0:
        return IntMatrix.identity(ncols)

    sat = rational_kernel_basis(IntMatrix.from_rows(orth, cols=ncols))

    return IntMatrix.from_rows(sat, cols=ncols)

def p_valuation(n:int, p:int) -> int:
    """ Exponent of p in a nonzero integer """
    if n == 0:
        raise ValueError("The p-adic valuation of 0 is infinite")

    return int(multiplicity(p, abs(n)))

def p_part(n:int, p:int) -> int:
    """ Largest power of p that divides n

    :param n: positive integer
    :type n: int
    :param p: prime
    :type p: int
    :rtype: int
    """
    if n <= 0:
        raise ValueError(f"Expects a positive integer, got {n}")
    if not isprime(p):
        raise ValueError(f"{p} is not a prime")

    return p ** p_valuation(n, p)
