#!/usr/bin/env python

from itertools import product

import numpy as np
import pytest
from sympy import Matrix

from torsiongrowth.core.abelian import FGAbelian, sublattices
from torsiongrowth.core.cosets import (CosetTable, cover, intersect, schreier,
                                       todd_coxeter)
from torsiongrowth.core.freewords import (GroupRingElement,
                                          PermutationHomomorphism, Word,
                                          magnus_vector)
from torsiongrowth.core.lielattice import D8, Q8
from torsiongrowth.core.linalg import contains
from torsiongrowth.core.zgmod import (NoWitness, ZGLattice, build_K_n,
                                      equivariant_complement,
                                      equivariant_projection,
                                      find_perturbation, kernel_lattice,
                                      quotient_invariants, relation_module,
                                      span_submodule, spans_generically)


TRIVIAL = PermutationHomomorphism([0], [0])
C2 = PermutationHomomorphism([1, 0], [0, 1])
KER_X = CosetTable(2, (1, 0), (0, 1))
KER_Y = CosetTable(2, (0, 1), (1, 0))
V4 = PermutationHomomorphism([1, 0, 3, 2], [2, 3, 0, 1])


@pytest.fixture
def rng():
    return np.random.default_rng(0)

@pytest.fixture
def regular_c2():
    """ ZC2 with m = 1 + g, the norm element """
    return ZGLattice.free(C2, 1), [(1, 1)]


def test_free_lattice():
    M = ZGLattice.free(C2, 2)

    assert M.ambient_rank == 4
    assert M.rank == 4
    assert M.is_stable()
    assert M.act(1, (1, 0, 0, 2)) == (0, 1, 2, 0)

def test_ring_action():
    M = ZGLattice.free(C2, 1)
    one_minus_g = GroupRingElement.from_dict({0: 1, 1: -1})

    assert M.ring_act(one_minus_g, (1, 1)) == (0, 0)
    assert M.ring_act(one_minus_g, (1, -1)) == (2, -2)

def test_action_matrix():
    M = ZGLattice.free(C2, 1)

    assert M.action_matrix(1).to_rows() == [[0, 1], [1, 0]]

def test_stability():
    M = ZGLattice.free(C2, 1)

    assert M.with_basis([(1, 1)]).is_stable()
    assert not M.with_basis([(1, 0)]).is_stable()

def test_lattice_json():
    M = ZGLattice.free(C2, 1).with_basis([(1, 1), (0, 2)])
    data = M.to_json()

    assert data["ambient_rank"] == 2
    assert ZGLattice.from_json(data) == M
    data["basis"] = [[1, 0]]
    with pytest.raises(ValueError):
        ZGLattice.from_json(data)

def test_relation_module():
    rm = relation_module(KER_X)
    M = rm.module

    assert M.order == 2
    assert M.rank == 3
    assert M.is_stable()
    assert M.basis.to_rows() == [[1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    assert rm.m == ((0, 0, 0, 0), (0, 0, 0, 0))

def test_relation_module_lift():
    rm = relation_module(KER_X)
    v = (3, 3, -1, 2)
    w = rm.lift(v)

    assert KER_X.contains(w)
    assert magnus_vector(w, rm.module.group) == v
    with pytest.raises(ValueError):
        rm.lift((1, 0, 0, 0))

def test_relation_module_rejects_outside_words():
    with pytest.raises(ValueError):
        relation_module(KER_X, Word.parse("x"))

def test_span_submodule():
    M = ZGLattice.free(C2, 1)

    assert span_submodule(M, [(1, 0)]) == M
    assert span_submodule(M, [(1, 1)]).rank == 1
    with pytest.raises(ValueError):
        span_submodule(M.with_basis([(1, 1)]), [(1, 0)])

def test_quotient_invariants():
    M = ZGLattice.free(C2, 1)
    K = span_submodule(M, [(3, -1)])

    # det [[3, -1], [-1, 3]] = 8
    assert quotient_invariants(M, K) == FGAbelian((8,))
    assert quotient_invariants(M, K, 2) == FGAbelian((8,), 0, 2)
    assert quotient_invariants(M, M.zero()) == FGAbelian(free_rank=2)

def test_equivariant_complement(regular_c2):
    M, ms = regular_c2
    U = span_submodule(M, ms)
    V = equivariant_complement(M, U)
    P = equivariant_projection(M, U)

    assert V.basis.to_rows() == [[1, -1]]
    assert V.is_stable()
    assert P * P == P

def test_kernel_lattice(regular_c2):
    M, ms = regular_c2
    L = kernel_lattice(M, ms)

    assert L.basis.to_rows() == [[1, -1]]
    assert kernel_lattice(M, [(0, 0)]) == ZGLattice.free(C2, 1)

def test_spans_generically(rng):
    M = ZGLattice.free(C2, 1)

    assert spans_generically(M, 1, rng)
    assert not spans_generically(ZGLattice.free(C2, 2), 1, rng)

@pytest.mark.parametrize("p, j", [(2, 2), (3, 1)])
def test_find_perturbation_c2(regular_c2, rng, p, j):
    M, ms = regular_c2
    witness = find_perturbation(M, ms, p, rng)

    assert witness.j == j
    assert witness.z == (2, -2)
    witness.verify(M, ms)

def test_K_n_on_c2(regular_c2, rng):
    M, ms = regular_c2
    witness = find_perturbation(M, ms, 3, rng)
    for n in range(1, 6):
        K = build_K_n(M, ms, witness, n)

        # M/K_n = Z/2 x Z/(2·3^n)
        assert K.t_p == 3 ** n
        assert K.contains_pnz
        assert K.below_U_pnV
        assert K.lattice.is_stable()

def test_torsion_grows_past_witness(regular_c2, rng):
    M, ms = regular_c2
    p = 2
    witness = find_perturbation(M, ms, p, rng)
    for c in range(1, 6):
        K = build_K_n(M, ms, witness, witness.j + c + 1)
        assert K.t_p >= p ** c

def test_perturbation_trivial_group(rng):
    M = ZGLattice.free(TRIVIAL, 2)
    ms = [(1, 0), (0, 0)]
    witness = find_perturbation(M, ms, 5, rng)

    assert witness.j == 1
    for n in range(1, 4):
        K = build_K_n(M, ms, witness, n)
        assert K.quotient == FGAbelian((5 ** n,), 0, 5)

def test_perturbation_on_relation_module(rng):
    rm = relation_module(KER_X)
    witness = find_perturbation(rm.module, rm.m, 2, rng)

    assert witness.j == 1
    K = build_K_n(rm.module, rm.m, witness, 5)
    assert K.t_p == 2 ** 5

def test_no_witness_when_U_has_full_rank(rng):
    M = ZGLattice.free(TRIVIAL, 1)

    with pytest.raises(NoWitness):
        find_perturbation(M, [(1,)], 2, rng)

def test_no_witness_when_not_generated(rng):
    M = ZGLattice.free(TRIVIAL, 3)

    with pytest.raises(NoWitness) as e:
        find_perturbation(M, [(1, 0, 0)], 2, rng)

    assert e.value.details["d"] == 1

def test_build_K_n_level(regular_c2, rng):
    M, ms = regular_c2
    witness = find_perturbation(M, ms, 2, rng)

    with pytest.raises(ValueError):
        build_K_n(M, ms, witness, 0)

def brute_p_torsion(K, p):
    """ Size of the p-part of Z^r / K for a full-rank HNF basis K """
    B = K.basis
    assert B.rows == B.cols
    count = 0
    for v in product(*(range(B[i, i]) for i in range(B.rows))):
        k = 1
        while not contains(B, [k * a for a in v]):
            k += 1
        while k % p == 0:
            k //= p
        count += k == 1

    return count

@pytest.mark.parametrize("slots, gens", [(1, [(1, -1, 0, 0)]),
                                         (1, [(1, 1, 1, 1)]),
                                         (2, [(1, 0, 0, 0, 0, 1, 0, 0)])])
def test_projection_is_equivariant(slots, gens):
    M = ZGLattice.free(V4, slots)
    U = span_submodule(M, gens)
    P = equivariant_projection(M, U)

    assert P * P == P
    assert P.rank() == U.rank
    for g in range(M.order):
        A = Matrix(M.action_matrix(g).to_rows())
        assert A * P == P * A
    for i in range(U.rank):
        u = Matrix([list(U.basis.row(i))])
        assert u * P == u

@pytest.mark.parametrize("p", [2, 3])
def test_K_n_torsion_by_enumeration(regular_c2, rng, p):
    M, ms = regular_c2
    witness = find_perturbation(M, ms, p, rng)
    previous = None
    for n in range(1, 5):
        K = build_K_n(M, ms, witness, n)

        assert K.quotient.free_rank == 0
        assert brute_p_torsion(K.lattice, p) == K.t_p
        if previous is not None:
            assert previous.lattice.contains_lattice(K.lattice)
        previous = K

def test_K_n_chain_on_relation_module(rng):
    rm = relation_module(intersect(KER_X, KER_Y))
    witness = find_perturbation(rm.module, rm.m, 3, rng)
    chain = [build_K_n(rm.module, rm.m, witness, n) for n in range(1, 5)]

    for K, K_next in zip(chain, chain[1:]):
        assert K.lattice.contains_lattice(K_next.lattice)
        assert K_next.t_p >= K.t_p

def normal_tables():
    trivial = schreier(CosetTable.trivial())
    tables = [KER_X, KER_Y, intersect(KER_X, KER_Y), todd_coxeter(Q8),
              todd_coxeter(D8)]
    for d in (3, 5, 6, 7, 8):
        tables.append(cover(trivial, sublattices(2, d)[-1]))

    return tables

def test_relation_module_rank():
    tables = normal_tables()

    assert len(tables) == 10
    for table in tables:
        assert 2 <= table.count <= 8
        rm = relation_module(table)
        images = Matrix([list(v) for v in rm.images])

        assert len(rm.images) == table.count + 1
        assert images.rank() == table.count + 1
        assert rm.module.rank == table.count + 1
        assert rm.module.is_stable()
