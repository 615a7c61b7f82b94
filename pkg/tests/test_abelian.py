#!/usr/bin/env python

import pytest

from torsiongrowth.core import abelian
from torsiongrowth.core.abelian import (FGAbelian, GrowthFunction,
                                        abelian_groups, canonical_factors,
                                        check_lemma_L1, check_prop_el,
                                        stacked_quotient, sublattices,
                                        subgroup_lattices, torsion_family)
from torsiongrowth.core.linalg import IntMatrix


def test_canonical_factors():
    assert canonical_factors([2, 4, 3]) == (2, 12)
    assert canonical_factors([6], prime=2) == (2,)
    assert canonical_factors([1, 1]) == tuple()
    with pytest.raises(ValueError):
        canonical_factors([0])

def test_from_relation_matrix():
    A = FGAbelian.from_relation_matrix(IntMatrix.diagonal([2, 3]))
    assert A.invariant_factors == (6,)
    assert A.free_rank == 0
    assert A.order() == 6

    B = FGAbelian.from_relation_matrix(IntMatrix.from_rows([[0, 4, 0]]))
    assert B.invariant_factors == (4,)
    assert B.free_rank == 2
    assert B.order() is None

def test_localized():
    A = FGAbelian.from_relation_matrix(IntMatrix.diagonal([12, 5]), 2)

    assert A.invariant_factors == (4,)
    assert A.locality == "at-2"
    assert str(A) == "Z/4"

def test_invariants_are_validated():
    with pytest.raises(ValueError):
        FGAbelian((4, 6))
    with pytest.raises(ValueError):
        FGAbelian((1,))
    with pytest.raises(ValueError):
        FGAbelian((6,), prime=2)
    with pytest.raises(ValueError):
        FGAbelian(free_rank=-1)

def test_torsion_numbers():
    A = FGAbelian((2, 12), 1)

    assert A.torsion() == 24
    assert A.p_torsion(2) == 8
    assert A.p_torsion(3) == 3
    assert A.p_torsion(5) == 1
    assert A.dim == 1
    assert not A.is_trivial()
    assert FGAbelian().is_trivial()

def test_exponent_quotient():
    A = FGAbelian((4,), 1)

    assert A.exponent_quotient(2) == FGAbelian((2, 2))
    assert A.exponent_quotient(8) == FGAbelian((4, 8))
    assert FGAbelian((3,), 1, 3).exponent_quotient(6) == FGAbelian((3, 3),
                                                                   0, 3)
    with pytest.raises(ValueError):
        A.exponent_quotient(0)

def test_exponent_quotient_matches_relations():
    A = FGAbelian((2, 12), 2)
    for n in (2, 3, 8, 24):
        assert stacked_quotient(A.relation_matrix(), n) \
            == A.exponent_quotient(n)

def test_direct_sum():
    A = FGAbelian((2,), 1).direct_sum(FGAbelian((3,)))

    assert A == FGAbelian((6,), 1)
    with pytest.raises(ValueError):
        FGAbelian(prime=2).direct_sum(FGAbelian())

def test_rendering():
    assert str(FGAbelian((2, 4), 1)) == "Z x Z/2 x Z/4"
    assert str(FGAbelian(free_rank=3)) == "Z^3"
    assert str(FGAbelian()) == "0"
    assert FGAbelian((2,), 1).to_dict() == {"invariant_factors": [2],
                                           "free_rank": 1,
                                           "locality": "global"}

def test_growth_function():
    f = GrowthFunction({1: 2, 5: 10})

    assert [f(n) for n in (1, 3, 5, 7)] == [2, 4, 10, 12]
    assert GrowthFunction()(4) == 5
    assert GrowthFunction({3: 1})(1) == 1
    assert GrowthFunction.from_json('{"1": 2, "5": 10}') == f
    assert GrowthFunction.from_json(f.to_json()) == f
    with pytest.raises(ValueError):
        f(0)
    with pytest.raises(ValueError):
        GrowthFunction({})
    with pytest.raises(ValueError):
        GrowthFunction({0: 1})

def test_torsion_family():
    family = torsion_family([2], 2, 1, 1, 2)

    assert FGAbelian((4,), 1, 2) in family
    assert len(family) == 6

@pytest.mark.parametrize("part", [1, 2])
def test_lemma_L1(part):
    report = check_lemma_L1(part, [2, 3], max_exp=2, max_rank=1)

    assert report.passed
    assert report.hypotheses_met > 0
    assert report.to_dict()["suite"] == f"lemma_L1_part{part}"

def test_lemma_L1_parts():
    with pytest.raises(ValueError):
        check_lemma_L1(3, [2])

def test_sublattices():
    # Z^2 has σ(n) sublattices of index n
    assert len(sublattices(2, 4)) == 7
    assert len(sublattices(2, 6)) == 12
    assert sublattices(1, 5)[0].to_rows() == [[5]]
    assert len(sublattices(3, 2)) == 7
    with pytest.raises(ValueError):
        sublattices(0, 1)

def test_prop_el():
    report = check_prop_el(max_order=8, max_index=4, max_cyclic=4)

    assert report.passed
    assert report.hypotheses_met > 0

def test_abelian_groups():
    assert sorted(abelian_groups(8)) == [(2, 2, 2), (2, 4), (8,)]
    assert abelian_groups(1) == [tuple()]
    assert len(abelian_groups(64)) == 11
    assert max(len(f) for f in abelian_groups(64)) == 6
    for factors in abelian_groups(72):
        assert canonical_factors(factors) == factors

@pytest.mark.parametrize("factors, count", [((8,), 4), ((2, 2), 5),
                                            ((2, 4), 8), ((2, 2, 2), 16),
                                            ((2, 2, 2, 2), 67), ((6,), 4)])
def test_subgroup_lattices(factors, count):
    relations = IntMatrix.diagonal(factors)
    order = 1
    for d in factors:
        order *= d

    lattices = subgroup_lattices(factors)
    assert len(lattices) == count
    assert len(set(lattices)) == count
    for lam in lattices:
        index = 1
        for i in range(lam.rows):
            index *= lam[i, i]
        assert order % index == 0
        assert abelian._torsion_of_quotient(lam, relations) is not None

def test_prop_el_covers_higher_rank(monkeypatch):
    seen = list()
    quotient = abelian._torsion_of_quotient

    def spy(lattice, relations):
        seen.append(relations.cols)
        return quotient(lattice, relations)

    monkeypatch.setattr(abelian, "_torsion_of_quotient", spy)
    report = check_prop_el(max_order=16, max_index=2, max_cyclic=2)

    assert report.passed
    assert 3 in seen
    assert max(seen) == 4
