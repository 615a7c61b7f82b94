#! /usr/bin/env python

from __future__ import annotations
from dataclasses import dataclass
import logging
from math import prod
from typing import Any, Optional, Sequence

import numpy as np
from sympy import isprime, multiplicity
from typing_extensions import Self

from torsiongrowth.core.abelian import FGAbelian, SuiteReport
from torsiongrowth.core.cosets import (CosetTable, normal_subgroups,
                                       subgroup_abelianization, todd_coxeter)
from torsiongrowth.core.freewords import AnyWord, Word
from torsiongrowth.core.linalg import (IntMatrix, contains_lattice,
                                       lattice_basis, rational_kernel_basis,
                                       snf, solve_in_basis)


# finite 2-generated p-groups used for the dimension-zero subgroup bound
Q8 = (Word.parse("x^4"), Word.parse("x^2Y^2"), Word.parse("Yxyx"))
D8 = (Word.parse("x^4"), Word.parse("y^2"), Word.parse("(xy)^2"))


@dataclass(frozen=True)
class LieLattice:
    """ Z_p Lie lattice on Z^rank, given by its structure constants:
        [e_i, e_j] = Σ_k constants[i][j][k]·e_k. """
    rank: int
    p: int
    constants: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self) -> None:
        if not isprime(self.p):
            raise ValueError(f"{self.p} is not a prime")

        d = self.rank
        c = self.constants
        if len(c) != d or any(len(row) != d for row in c) \
                or any(len(v) != d for row in c for v in row):
            raise ValueError(f"Expects {d}x{d}x{d} structure constants")

        for i in range(d):
            for j in range(d):
                if any(a != -b for a, b in zip(c[i][j], c[j][i])):
                    raise ValueError(f"Bracket of e_{i}, e_{j} is not "
                                     "antisymmetric")

        basis = [tuple(int(i == k) for k in range(d)) for i in range(d)]
        for i in range(d):
            for j in range(i + 1, d):
                for k in range(j + 1, d):
                    u, v, w = basis[i], basis[j], basis[k]
                    total = [a + b + e for a, b, e in zip(
                        self.bracket(self.bracket(u, v), w),
                        self.bracket(self.bracket(v, w), u),
                        self.bracket(self.bracket(w, u), v))]
                    if any(total):
                        raise ValueError(f"Jacobi identity fails on "
                                         f"e_{i}, e_{j}, e_{k}")

    @classmethod
    def from_brackets(cls, rank:int, p:int,
                      brackets:Sequence[Sequence[int]]) -> Self:
        """ Build from entries [i, j, c_0, ..., c_(rank-1)] giving
            [e_i, e_j]; unlisted brackets are zero. """
        c = [[[0] * rank for _ in range(rank)] for _ in range(rank)]
        for entry in brackets:
            i, j, coeffs = int(entry[0]), int(entry[1]), entry[2:]
            if len(coeffs) != rank or not (0 <= i < rank and 0 <= j < rank):
                raise ValueError(f"Malformed bracket entry: {list(entry)}")
            c[i][j] = [int(a) for a in coeffs]
            c[j][i] = [-int(a) for a in coeffs]

        return cls(rank, p, tuple(tuple(tuple(v) for v in row) for row in c))

    @classmethod
    def abelian(cls, rank:int, p:int) -> Self:
        return cls.from_brackets(rank, p, list())

    @classmethod
    def heisenberg(cls, p:int) -> Self:
        """ Z^3 with [e_0, e_1] = p·e_2 """
        return cls.from_brackets(3, p, [[0, 1, 0, 0, p]])

    def bracket(self, u:Sequence[int], v:Sequence[int]) -> tuple[int, ...]:
        out = [0] * self.rank
        for i, a in enumerate(u):
            if a == 0:
                continue
            for j, b in enumerate(v):
                if b == 0:
                    continue
                for k, c in enumerate(self.constants[i][j]):
                    out[k] += a * b * c

        return tuple(out)

    def is_powerful(self) -> bool:
        """ (G,G) ⊆ pG, or 4G when p = 2 """
        q = 4 if self.p == 2 else self.p
        D = derived_sublattice(self)

        return all(a % q == 0 for a in D.entries)

    def to_json(self) -> dict[str, Any]:
        d = self.rank
        return {"rank": d,
                "p": self.p,
                "brackets": [[i, j] + list(self.constants[i][j])
                             for i in range(d) for j in range(i + 1, d)
                             if any(self.constants[i][j])]}

    @classmethod
    def from_json(cls, data:dict[str, Any]) -> Self:
        return cls.from_brackets(int(data["rank"]), int(data["p"]),
                                 data.get("brackets", list()))


def scale(L:LieLattice, n:int, basis:Optional[IntMatrix] = None) -> IntMatrix:
    """ Basis of p^n·Λ for a sublattice Λ (default: the whole lattice) """
    basis = IntMatrix.identity(L.rank) if basis is None else basis

    return basis.scale(L.p ** n)

def derived_sublattice(L:LieLattice,
                       basis:Optional[IntMatrix] = None) -> IntMatrix:
    """ (Λ, Λ): the Z-span of the brackets of basis pairs of a sublattice
        Λ (default: the whole lattice), in canonical HNF.

    :rtype: IntMatrix
    """
    basis = IntMatrix.identity(L.rank) if basis is None else basis
    rows = [L.bracket(basis.row(i), basis.row(j))
            for i in range(basis.rows) for j in range(i + 1, basis.rows)]

    return lattice_basis(rows, L.rank)


@dataclass(frozen=True)
class UniformTorsion:
    n: int
    direct: int
    via_quotient: int
    via_index: int
    bound: int

    @property
    def ok(self) -> bool:
        return self.direct == self.via_quotient == self.via_index \
            and self.direct <= self.bound

    def to_dict(self) -> dict[str, Any]:
        return {"n": self.n,
                "direct": self.direct,
                "via_quotient": self.via_quotient,
                "via_index": self.via_index,
                "bound": self.bound,
                "ok": self.ok}


def _torsion(relations:IntMatrix, p:int) -> int:
    return FGAbelian.from_relation_matrix(relations, p).p_torsion(p)

def uniform_torsion_identity(L:LieLattice, n:int) -> UniformTorsion:
    """ t(G_n / (G_n, G_n)) for G_n = p^n·G, three ways.

    Directly from the brackets of the basis of p^n·G; as the torsion of
    G / p^n·(G,G); and as t(G/(G,G))·|(G,G) : p^n·(G,G)|. The bound is
    a·p^(n·rank) with a = t(G/(G,G)).

    :param L: powerful Lie lattice
    :type L: LieLattice
    :param n: nonnegative level
    :type n: int
    :rtype: UniformTorsion
    :raises ValueError: if L is not powerful
    """
    if n < 0:
        raise ValueError(f"Expects n >= 0, got {n}")
    if not L.is_powerful():
        raise ValueError("Lie lattice is not powerful")

    p, d = L.p, L.rank
    q = p ** n
    D = derived_sublattice(L)
    a = _torsion(D, p)

    # G_n in its own basis p^n·e_i
    Gn = scale(L, n)
    Dn = derived_sublattice(L, Gn)
    direct = _torsion(IntMatrix.from_rows([[x // q for x in Dn.row(i)]
                                           for i in range(Dn.rows)],
                                          cols=d), p)
    via_quotient = _torsion(D.scale(q), p)
    via_index = a * q ** D.rows

    return UniformTorsion(n, direct, via_quotient, via_index, a * q ** d)


def padic_bound(a0:int, index_G_G0:int, dim:int) -> int:
    """ b = a_0·|G:G_0|^(dim + 1) """
    if a0 < 1 or index_G_G0 < 1 or dim < 0:
        raise ValueError("Expects a0, |G:G_0| >= 1 and dim >= 0")

    return a0 * index_G_G0 ** (dim + 1)


@dataclass(frozen=True)
class PadicCheck:
    index: int
    torsion: int
    bound: int

    @property
    def ok(self) -> bool:
        return self.torsion <= self.bound

    def to_dict(self) -> dict[str, Any]:
        return {"index": self.index,
                "torsion": self.torsion,
                "bound": self.bound,
                "ok": self.ok}


def check_padic_bound(L:LieLattice, H:IntMatrix, a0:Optional[int] = None,
                      index_G_G0:int = 1) -> PadicCheck:
    """ t(H^ab) <= b·|G:H|^(2 dim) for an open subalgebra H of G.

    :param L: Lie lattice G
    :type L: LieLattice
    :param H: spanning rows of a full-rank sublattice of p-power index
        that is closed under the bracket
    :type H: IntMatrix
    :param a0: torsion of G_0^ab; defaults to t(G/(G,G))
    :type a0: Optional[int]
    :param index_G_G0: |G:G_0|
    :type index_G_G0: int
    :rtype: PadicCheck
    :raises ValueError: if H is not an open subalgebra
    """
    p, d = L.p, L.rank
    H = lattice_basis(H.to_rows(), d)
    if H.rows != d:
        raise ValueError(f"Sublattice has rank {H.rows}, expects {d}")

    index = prod(snf(H, transforms=False).diagonal)
    if index != p ** multiplicity(p, index):
        raise ValueError(f"Index {index} is not a power of {p}")

    D = derived_sublattice(L, H)
    if not contains_lattice(H, D):
        raise ValueError("Sublattice is not closed under the bracket")

    # (H, H) in the coordinates of H
    coords = [solve_in_basis(H, D.row(i)) for i in range(D.rows)]
    t = _torsion(IntMatrix.from_rows(coords, cols=d), p)

    a0 = _torsion(derived_sublattice(L), p) if a0 is None else a0
    b = padic_bound(a0, index_G_G0, d)

    return PadicCheck(index, t, b * index ** (2 * d))


@dataclass(frozen=True)
class GModuleInstance:
    """ A = Z^k / relations with G acting by a·R_g on row vectors.

    ``elements`` holds the matrices of every group element, identity
    first; ``generators`` those of a generating set.
    """
    relations: IntMatrix
    generators: tuple[IntMatrix, ...]
    elements: tuple[IntMatrix, ...]
    p: Optional[int] = None

    @property
    def rank(self) -> int:
        return self.relations.cols

    @property
    def order(self) -> int:
        return len(self.elements)

    def module(self) -> FGAbelian:
        return FGAbelian.from_relation_matrix(self.relations, self.p)

    def validate(self) -> None:
        """ Generators preserve the relation lattice and generate a
            finite group.

        :raises ValueError: on the first violation
        """
        R = lattice_basis(self.relations.to_rows(), self.rank)
        for M in self.generators:
            if not contains_lattice(R, R @ M):
                raise ValueError("Action does not preserve the relations")
        if closure(self.generators, len(self.elements)) != self.elements:
            raise ValueError("Element list is not the generated group")


def closure(generators:Sequence[IntMatrix],
            limit:int = 64) -> Optional[tuple[IntMatrix, ...]]:
    """ The matrix group generated by ``generators``, identity first in
        breadth-first order, or None if it exceeds ``limit`` elements. """
    n = generators[0].rows if len(generators) > 0 else 0
    identity = IntMatrix.identity(n)
    seen = {identity: 0}
    order = [identity]
    for M in order:
        for g in generators:
            h = M @ g
            if h not in seen:
                if len(order) >= limit:
                    return None
                seen[h] = len(order)
                order.append(h)

    return tuple(order)


@dataclass(frozen=True)
class G1Check:
    t_coinvariants: int
    t_A: int
    order: int
    dim: int
    intersection_trivial: Optional[bool]

    @property
    def bound(self) -> int:
        return self.t_A * self.order ** self.dim

    @property
    def ok(self) -> bool:
        return self.t_coinvariants <= self.bound \
            and self.intersection_trivial is not False


def check_prop_G1(inst:GModuleInstance) -> G1Check:
    """ t(A/(G-1)A) <= t(A)·|G|^dim A.

    (G-1)A is spanned by (g-1)a for generators g of G and generators a
    of A, since gh - 1 = (g - 1)h + (h - 1). On torsion-free A the fixed
    sublattice is also checked to meet (G-1)A trivially.

    :rtype: G1Check
    """
    k = inst.rank
    identity = IntMatrix.identity(k)
    rows = list()
    for M in inst.generators:
        rows.extend([a - b for a, b in zip(M.row(i), identity.row(i))]
                    for i in range(k))

    A = inst.module()
    coinvariants = FGAbelian.from_relation_matrix(
        inst.relations.vstack(IntMatrix.from_rows(rows, cols=k)), inst.p)

    intersection = None
    if inst.relations.is_zero():
        GA = lattice_basis(rows, k)
        stacked = list()
        for M in inst.generators:
            stacked.extend(([a - b for a, b in zip(M.column(j),
                                                   identity.column(j))]
                            for j in range(k)))
        W = rational_kernel_basis(IntMatrix.from_rows(stacked, cols=k)) \
            if len(stacked) > 0 else [identity.row(i) for i in range(k)]
        joint = lattice_basis(GA.to_rows() + [list(w) for w in W], k)
        intersection = GA.rows + len(W) == joint.rows

    return G1Check(coinvariants.torsion(), A.torsion(), inst.order,
                   A.dim, intersection)


def _signed_permutation(rng:np.random.Generator, k:int) -> IntMatrix:
    perm = rng.permutation(k)
    signs = rng.choice([-1, 1], size=k)

    return IntMatrix.from_rows([[int(signs[i]) if j == perm[i] else 0
                                 for j in range(k)] for i in range(k)])

def random_g1_instance(rng:np.random.Generator, p:Optional[int] = None,
                       max_rank:int = 4,
                       max_order:int = 8) -> GModuleInstance:
    """ Random instance: G generated by signed permutation matrices with
        |G| <= ``max_order``, acting on Z^k modulo a G-stable lattice. """
    while True:
        k = int(rng.integers(1, max_rank + 1))
        gens = [_signed_permutation(rng, k)
                for _ in range(int(rng.integers(1, 3)))]
        elements = closure(gens, max_order)
        if elements is not None:
            break

    seeds = list()
    for _ in range(int(rng.integers(0, k + 1))):
        seeds.append([int(a) for a in rng.integers(-3, 4, size=k)])
    if rng.random() < 0.5:
        e = int(rng.integers(1, 4))
        seeds.append([(p or 2) ** e] + [0] * (k - 1))
    orbit = [list((IntMatrix.from_rows([v]) @ M).row(0))
             for v in seeds for M in elements]
    R = lattice_basis(orbit, k)

    return GModuleInstance(R, tuple(gens), elements, p)

def check_prop_G1_suite(count:int, primes:Sequence[int],
                        rng:np.random.Generator, max_rank:int = 4,
                        max_order:int = 8) -> SuiteReport:
    report = SuiteReport("prop_G1")
    for t in range(count):
        p = primes[t % len(primes)]
        inst = random_g1_instance(rng, p, max_rank, max_order)
        inst.validate()
        result = check_prop_G1(inst)
        report.checked += 1
        report.hypotheses_met += 1
        if not result.ok:
            report.violations.append({"relations": inst.relations.to_rows(),
                                      "generators": [M.to_rows() for M
                                                     in inst.generators],
                                      "p": p,
                                      "t_coinvariants": result.t_coinvariants,
                                      "bound": result.bound})

    logging.info(f"{report.name}: {report.checked} instances, "
                 f"{len(report.violations)} violations")

    return report


def subgroup_table(hom_table:CosetTable, elements:frozenset[int]
                   ) -> CosetTable:
    """ Coset table of a normal subgroup given as a set of elements of a
        regular table """
    hom = hom_table.homomorphism()
    cls = dict()
    for a in range(hom.order):
        if a not in cls:
            k = len(set(cls.values()))
            for b in elements:
                cls[hom.mul(b, a)] = k

    x = [0] * (max(cls.values()) + 1)
    y = list(x)
    for a, k in cls.items():
        x[k] = cls[hom.act(a, 1)]
        y[k] = cls[hom.act(a, 2)]

    return CosetTable(len(x), x, y, hom_table.relators).standardize()

def check_prop_AB(relators:Sequence[AnyWord], name:str = "prop_AB",
                  max_cosets:int = 4096) -> SuiteReport:
    """ t(A^ab) <= t(B^ab)·|A:B|^(dim B^ab + 1) for every normal
        subgroup B of a finite group A, along with the dimension-free
        form t(A^ab) <= t(B^ab)·|A:B|.

    :rtype: SuiteReport
    """
    report = SuiteReport(name)
    regular = todd_coxeter(relators, tuple(), max_cosets)
    A = subgroup_abelianization(CosetTable.trivial(relators))
    for B in normal_subgroups(relators, max_cosets):
        table = subgroup_table(regular, B.elements)
        B_ab = subgroup_abelianization(table)
        index = table.count
        report.checked += 1
        report.hypotheses_met += 1
        if A.torsion() > B_ab.torsion() * index \
                or A.torsion() > B_ab.torsion() * index ** (B_ab.dim + 1):
            report.violations.append({"B_order": B.order,
                                      "A_ab": str(A),
                                      "B_ab": str(B_ab),
                                      "index": index})

    return report
