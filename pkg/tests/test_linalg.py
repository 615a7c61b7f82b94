#!/usr/bin/env python

from itertools import combinations
from math import gcd, prod

import numpy as np
import pytest
from sympy import Matrix

from torsiongrowth.core.linalg import (IntMatrix, STRATEGIES, contains,
                                       hnf, lattice_basis, lattice_sum,
                                       p_part, p_valuation, rank,
                                       rational_kernel_basis, saturate, snf,
                                       solve_in_basis, xgcd)


EXAMPLE = IntMatrix.from_rows([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])


def test_matrix_shape_checks():
    with pytest.raises(ValueError):
        IntMatrix(2, 2, (1, 2, 3))
    with pytest.raises(ValueError):
        IntMatrix.from_rows([[1, 2], [3]])
    with pytest.raises(ValueError):
        IntMatrix.from_rows([])

    assert IntMatrix.from_rows([], cols=3).rows == 0

def test_matrix_arithmetic():
    A = IntMatrix.from_rows([[1, 2], [3, 4]])
    B = IntMatrix.from_rows([[0, 1], [1, 0]])

    assert (A @ B).to_rows() == [[2, 1], [4, 3]]
    assert A.transpose().to_rows() == [[1, 3], [2, 4]]
    assert A.vstack(B).rows == 4
    assert A.hstack(B).row(0) == (1, 2, 0, 1)
    assert A @ IntMatrix.identity(2) == A
    assert IntMatrix.zeros(2, 3).is_zero()

def test_xgcd_sign():
    g, s, t = xgcd(-4, 6)
    assert g == 2
    assert s * -4 + t * 6 == 2

@pytest.mark.parametrize("strategy", STRATEGIES)
def test_snf_example(strategy):
    sf = snf(EXAMPLE, strategy=strategy)

    assert sf.invariant_factors == (2, 6, 12)
    assert sf.rank == 3
    assert sf.diagonal == (2, 6, 12)
    assert sf.verify(EXAMPLE)

def test_snf_coprime_diagonal():
    sf = snf(IntMatrix.diagonal([2, 3]))

    assert sf.diagonal == (1, 6)
    assert sf.invariant_factors == (6,)

def test_snf_rank_deficient():
    A = IntMatrix.from_rows([[1, 2, 3], [2, 4, 6]])
    sf = snf(A)

    assert sf.rank == 1
    assert sf.invariant_factors == tuple()
    assert sf.verify(A)

def test_snf_zero_and_empty():
    assert snf(IntMatrix.zeros(2, 2)).rank == 0
    assert snf(IntMatrix.zeros(0, 3)).rank == 0
    assert snf(IntMatrix.zeros(0, 3)).invariant_factors == tuple()

def test_snf_without_transforms():
    sf = snf(EXAMPLE, transforms=False)

    assert sf.U is None and sf.V is None
    with pytest.raises(ValueError):
        sf.verify(EXAMPLE)

def test_snf_unknown_strategy():
    with pytest.raises(ValueError):
        snf(EXAMPLE, strategy="largest")

def test_hnf_transform():
    H, U = hnf(EXAMPLE)

    assert U @ EXAMPLE == H
    for i in range(H.rows):
        piv = next(j for j, a in enumerate(H.row(i)) if a != 0)
        assert H[i, piv] > 0
        assert all(0 <= H[k, piv] < H[i, piv] for k in range(i))

def test_lattice_basis_is_canonical():
    a = lattice_basis([[2, 0], [0, 2], [1, 1]], 2)
    b = lattice_basis([[1, 1], [1, -1]], 2)

    assert a == b
    assert a.to_rows() == [[1, 1], [0, 2]]

def test_solve_and_contains():
    B = lattice_basis([[2, 0], [0, 3]], 2)

    assert solve_in_basis(B, [4, 9]) == (2, 3)
    assert solve_in_basis(B, [1, 0]) is None
    assert contains(B, [0, -3])
    assert not contains(B, [0, 1])

def test_lattice_sum():
    S = lattice_sum(IntMatrix.from_rows([[2, 0]]),
                    IntMatrix.from_rows([[0, 4]]))

    assert S.to_rows() == [[2, 0], [0, 4]]

def test_rational_kernel():
    kernel = rational_kernel_basis(IntMatrix.from_rows([[1, 1, 0]]))

    assert kernel == [(1, -1, 0), (0, 0, 1)]
    assert rational_kernel_basis(IntMatrix.identity(2)) == list()

def test_kernel_is_saturated():
    kernel = rational_kernel_basis(IntMatrix.from_rows([[2, 4]]))

    assert kernel == [(2, -1)]

def test_saturate():
    assert saturate([[2, 0]], 2).to_rows() == [[1, 0]]
    assert saturate([[2, 0], [0, 3]], 2) == IntMatrix.identity(2)
    assert saturate([[0, 0]], 2).rows == 0

def test_rank():
    assert rank(EXAMPLE) == 3
    assert rank(IntMatrix.from_rows([[1, 2], [2, 4]])) == 1

def test_p_adic_helpers():
    assert p_valuation(24, 2) == 3
    assert p_valuation(-9, 3) == 2
    assert p_part(24, 2) == 8
    assert p_part(7, 2) == 1

    with pytest.raises(ValueError):
        p_valuation(0, 2)
    with pytest.raises(ValueError):
        p_part(8, 4)

def assert_minor_gcds(rows):
    # d_1···d_k = gcd of the k x k minors
    A = IntMatrix.from_rows(rows)
    sf = snf(A)
    diagonal = sf.diagonal
    M = Matrix(rows)

    assert sf.rank == M.rank()
    for k in range(1, sf.rank + 1):
        minors = [int(M.extract(list(r), list(c)).det())
                  for r in combinations(range(A.rows), k)
                  for c in combinations(range(A.cols), k)]
        assert gcd(*minors) == prod(diagonal[:k])

@pytest.mark.parametrize("rows", [
    [[2, 4, 4], [-6, 6, 12], [10, -4, -16]],
    [[4, 6], [6, 9], [2, 3]],
    [[0, 3, 9, 0], [6, 0, 12, 4], [2, 3, 1, 8]],
    [[12]]])
def test_snf_matches_minor_gcds(rows):
    assert_minor_gcds(rows)

def test_snf_random():
    rng = np.random.default_rng(0)
    for _ in range(500):
        m, n = (int(k) for k in rng.integers(1, 9, size=2))
        rows = rng.integers(-99, 100, size=(m, n)).tolist()
        if rng.random() < 0.3:
            rows[-1] = [2 * a for a in rows[0]]
        A = IntMatrix.from_rows(rows)
        forms = [snf(A, strategy=strategy) for strategy in STRATEGIES]

        for sf in forms:
            assert sf.verify(A)
            assert all(b % a == 0 for a, b in zip(sf.diagonal[:sf.rank],
                                                  sf.diagonal[1:sf.rank]))
        # pivot choice does not change the invariants
        assert len({(sf.invariant_factors, sf.rank) for sf in forms}) == 1
        if m * n <= 16:
            assert_minor_gcds(rows)

def test_snf_minor_gcds_up_to_5x5():
    rng = np.random.default_rng(1)
    for _ in range(10):
        rows = rng.integers(-9, 10, size=(5, 5)).tolist()
        if rng.random() < 0.5:
            rows[-1] = [a + b for a, b in zip(rows[0], rows[1])]
        assert_minor_gcds(rows)
