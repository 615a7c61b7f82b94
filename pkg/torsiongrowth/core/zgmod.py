#! /usr/bin/env python

from __future__ import annotations
from dataclasses import dataclass
from functools import cached_property
import logging
from typing import Any, Optional, Sequence

import numpy as np
from sympy import Matrix, ilcm
from typing_extensions import Self

from torsiongrowth.core.abelian import FGAbelian
from torsiongrowth.core.cosets import CosetTable, SchreierSystem, schreier
from torsiongrowth.core.freewords import (AnyWord, GroupRingElement,
                                          PermutationHomomorphism, Word,
                                          magnus_vector)
from torsiongrowth.core.linalg import (IntMatrix, contains, contains_lattice,
                                       hnf, lattice_basis, p_valuation,
                                       rational_kernel_basis, solve_in_basis)
from torsiongrowth.core.utils import TorsionGrowthError


class NoWitness(TorsionGrowthError):
    pass


Vector = tuple[int, ...]


@dataclass(frozen=True)
class ZGLattice:
    """ G-stable sublattice of the free module (ZG)^slots.

    Ambient coordinates are slot-major: coordinate k·|G| + h holds the
    coefficient of the group element h in slot k. Vectors are rows and
    the left action of g is the matrix R_g with v·R_g = g·v, so that
    R_g·R_h = R_hg.
    """
    group: PermutationHomomorphism
    slots: int
    basis: IntMatrix

    @classmethod
    def free(cls, group:PermutationHomomorphism, slots:int) -> Self:
        return cls(group, slots, IntMatrix.identity(group.order * slots))

    @property
    def order(self) -> int:
        return self.group.order

    @property
    def ambient_rank(self) -> int:
        return self.group.order * self.slots

    @property
    def rank(self) -> int:
        return self.basis.rows

    def with_basis(self, vectors:Sequence[Sequence[int]]) -> ZGLattice:
        """ Lattice spanned by ``vectors`` with the same action; the
            vectors are not closed under the action here. """
        return ZGLattice(self.group, self.slots,
                         lattice_basis(vectors, self.ambient_rank))

    def zero(self) -> ZGLattice:
        return self.with_basis(list())

    def act(self, g:int, v:Sequence[int]) -> Vector:
        n = self.order
        out = [0] * len(v)
        for k in range(self.slots):
            for h in range(n):
                a = v[k * n + h]
                if a:
                    out[k * n + self.group.mul(g, h)] += a

        return tuple(out)

    def ring_act(self, r:GroupRingElement, v:Sequence[int]) -> Vector:
        """ r·v for r in ZG """
        out = [0] * len(v)
        for g, a in r.terms:
            for k, b in enumerate(self.act(g, v)):
                out[k] += a * b

        return tuple(out)

    def action_matrix(self, g:int) -> IntMatrix:
        n = self.ambient_rank
        return IntMatrix.from_rows([self.act(g, tuple(int(i == j)
                                                      for j in range(n)))
                                    for i in range(n)], cols=n)

    @cached_property
    def generator_elements(self) -> tuple[int, int]:
        return (self.group.image(Word((1,))), self.group.image(Word((2,))))

    def is_stable(self) -> bool:
        return all(contains(self.basis, self.act(g, self.basis.row(i)))
                   for g in self.generator_elements
                   for i in range(self.rank))

    def contains(self, v:Sequence[int]) -> bool:
        return contains(self.basis, v)

    def contains_lattice(self, other:ZGLattice) -> bool:
        return contains_lattice(self.basis, other.basis)

    def coordinates(self, v:Sequence[int]) -> Vector:
        c = solve_in_basis(self.basis, v)
        if c is None:
            raise ValueError("Vector does not lie in the lattice")

        return c

    def __eq__(self, other:object) -> bool:
        if not isinstance(other, ZGLattice):
            return NotImplemented

        return self.ambient_rank == other.ambient_rank \
            and self.basis == other.basis

    def __hash__(self) -> int:
        return hash(self.basis)

    def to_json(self) -> dict[str, Any]:
        return {"ambient_rank": self.ambient_rank,
                "slots": self.slots,
                "group": {"x": list(self.group.perms[1]),
                          "y": list(self.group.perms[2])},
                "basis": self.basis.to_rows(),
                "actions": [self.action_matrix(g).to_rows()
                            for g in self.generator_elements]}

    @classmethod
    def from_json(cls, data:dict[str, Any]) -> Self:
        group = PermutationHomomorphism(data["group"]["x"],
                                        data["group"]["y"])
        slots = int(data["slots"])
        lattice = cls(group, slots,
                      lattice_basis(data["basis"], group.order * slots))
        if not lattice.is_stable():
            raise ValueError("Lattice is not stable under the group action")

        return lattice


@dataclass(frozen=True)
class RelationModule:
    """ F_i^ab embedded in (ZG)^2 together with the lifting data """
    module: ZGLattice
    m: tuple[Vector, ...]
    schreier: SchreierSystem
    images: tuple[Vector, ...]

    def lift(self, v:Sequence[int]) -> Word:
        """ A word of the subgroup whose Magnus image is ``v``, written as
            a product of Schreier generators in index order. """
        H, U = hnf(IntMatrix.from_rows(self.images,
                                       cols=self.module.ambient_rank))
        c = solve_in_basis(H, v)
        if c is None:
            raise ValueError("Vector does not lie in the relation module")
        coords = [sum(c[i] * U[i, k] for i in range(len(c)))
                  for k in range(U.cols)]

        return self.schreier.word_for(coords)


def relation_module(table:CosetTable, r:AnyWord = Word(),
                    w:AnyWord = Word()) -> RelationModule:
    """ Relation module of a normal subgroup F_i of finite index.

    The module is spanned by the Magnus images of the Schreier generators
    of F_i, a set of |G| + 1 independent vectors in (ZG)^2.

    :param table: coset table of F_i in F, read as the regular action of
        G = F/F_i
    :type table: CosetTable
    :param r: first designated word
    :type r: AnyWord
    :param w: second designated word
    :type w: AnyWord
    :rtype: RelationModule
    :raises ValueError: if r or w is not in F_i
    """
    hom = table.homomorphism()
    ss = schreier(table)
    images = tuple(magnus_vector(s, hom) for s in ss.generators)
    module = ZGLattice(hom, 2, lattice_basis(images, 2 * hom.order))
    if module.rank != hom.order + 1:
        raise ValueError(f"Magnus images have rank {module.rank}, "
                         f"expected {hom.order + 1}")

    m = (magnus_vector(r, hom), magnus_vector(w, hom))
    logging.debug(f"relation module of rank {module.rank} over a group "
                  f"of order {hom.order}")

    return RelationModule(module, m, ss, images)

def span_submodule(M:ZGLattice, gens:Sequence[Sequence[int]]) -> ZGLattice:
    """ ZG-span of ``gens`` inside M

    :rtype: ZGLattice
    :raises ValueError: if a generator lies outside M
    """
    for v in gens:
        if not M.contains(v):
            raise ValueError("Generator does not lie in the module")

    return M.with_basis([M.act(g, v) for v in gens
                         for g in range(M.order)])

def quotient_invariants(M:ZGLattice, K:ZGLattice,
                        p:Optional[int] = None) -> FGAbelian:
    """ M/K, localized at p when given

    :rtype: FGAbelian
    :raises ValueError: if K is not contained in M
    """
    rows = list()
    for i in range(K.rank):
        c = solve_in_basis(M.basis, K.basis.row(i))
        if c is None:
            raise ValueError("Submodule is not contained in the module")
        rows.append(c)

    return FGAbelian.from_relation_matrix(IntMatrix.from_rows(rows,
                                                              cols=M.rank),
                                          p)

def _coordinate_actions(M:ZGLattice) -> list[Matrix]:
    # A_g with B·R_g = A_g·B in basis coordinates, for every element g
    return [Matrix([list(M.coordinates(M.act(g, M.basis.row(i))))
                    for i in range(M.rank)])
            for g in range(M.order)]

def equivariant_projection(M:ZGLattice, U:ZGLattice) -> Matrix:
    """ Rational G-equivariant projection of Q⊗M onto Q⊗U in the basis
        coordinates of M, obtained by averaging any projection over G.

    :rtype: Matrix
    """
    r, u = M.rank, U.rank
    coords = lattice_basis([M.coordinates(U.basis.row(i))
                            for i in range(u)], r)
    pivots = [next(j for j in range(r) if coords[i, j] != 0)
              for i in range(u)]
    T = Matrix(coords.to_rows() + [[int(j == k) for j in range(r)]
                                   for k in range(r) if k not in pivots])
    E = Matrix.diag(*([1] * u + [0] * (r - u)))
    P0 = T.inv() * E * T

    actions = _coordinate_actions(M)
    P = Matrix.zeros(r, r)
    for g in range(M.order):
        P += actions[g] * P0 * actions[M.group.inverse(g)]

    return P / M.order

def equivariant_complement(M:ZGLattice, U:ZGLattice) -> ZGLattice:
    """ V = M ∩ 𝒱 where 𝒱 is the kernel of the averaged projection onto
        Q⊗U, a G-stable complement of Q⊗U in Q⊗M.

    :rtype: ZGLattice
    """
    if U.rank <= 0:
        return M
    if U.rank >= M.rank:
        return M.zero()

    P = equivariant_projection(M, U)
    scale = ilcm(1, *[e.q for e in P])
    Pt = IntMatrix.from_rows((P.T * scale).tolist())
    coords = rational_kernel_basis(Pt)
    B = M.basis

    return M.with_basis([[sum(c[i] * B[i, k] for i in range(B.rows))
                          for k in range(B.cols)] for c in coords])

def kernel_lattice(M:ZGLattice, ms:Sequence[Sequence[int]]) -> ZGLattice:
    """ L = {s in (ZG)^d : Σ s_i·m_i = 0}, saturated in (ZG)^d

    :rtype: ZGLattice
    """
    d, n = len(ms), M.order
    rows = [M.act(e, m) for m in ms for e in range(n)]
    free = ZGLattice.free(M.group, d)
    if all(not any(row) for row in rows):
        return free

    f = IntMatrix.from_rows(rows, cols=M.ambient_rank)

    return free.with_basis(rational_kernel_basis(f.transpose()))


@dataclass(frozen=True)
class PerturbationWitness:
    """ Elements h in V^d and s in L with Σ s_i·h_i = z ≠ 0, and the
        least j with z ∉ p^j·V. """
    h: tuple[Vector, ...]
    s: tuple[GroupRingElement, ...]
    z: Vector
    j: int
    p: int
    V: IntMatrix

    def verify(self, M:ZGLattice, ms:Sequence[Sequence[int]]) -> None:
        """ Re-check the witness equations exactly

        :raises NoWitness: on the first equation that fails
        """
        def fail(what:str) -> NoWitness:
            return NoWitness(f"Witness check failed: {what}",
                             anchor="perturbation lemma, choice of h")

        total = [0] * M.ambient_rank
        relation = [0] * M.ambient_rank
        for s_i, h_i, m_i in zip(self.s, self.h, ms):
            total = [a + b for a, b in zip(total, M.ring_act(s_i, h_i))]
            relation = [a + b for a, b in zip(relation,
                                              M.ring_act(s_i, m_i))]
            if not contains(self.V, h_i):
                raise fail("h lies outside V")

        if tuple(total) != self.z or not any(self.z):
            raise fail("Σ s_i·h_i differs from z or z = 0")
        if any(relation):
            raise fail("s does not annihilate m")
        c = solve_in_basis(self.V, self.z)
        if c is None:
            raise fail("z lies outside V")
        if all(a % self.p ** self.j == 0 for a in c) \
                or any(a % self.p ** (self.j - 1) != 0 for a in c):
            raise fail(f"j = {self.j} is not the least j with z ∉ p^j·V")

    def to_json(self) -> dict[str, Any]:
        return {"h": [list(v) for v in self.h],
                "s": [[list(t) for t in r.terms] for r in self.s],
                "z": list(self.z),
                "j": self.j,
                "p": self.p}


def spans_generically(M:ZGLattice, d:int, rng:np.random.Generator,
                      tries:int = 3) -> bool:
    """ Whether the ZG-span of d random elements of M has full rank,
        trying ``tries`` random choices. """
    for _ in range(tries):
        picks = list()
        for _ in range(d):
            coeffs = rng.integers(-9, 10, size=M.rank)
            picks.append([sum(int(c) * M.basis[i, k]
                              for i, c in enumerate(coeffs))
                          for k in range(M.ambient_rank)])
        if span_submodule(M, picks).rank == M.rank:
            return True

    return False

def find_perturbation(M:ZGLattice, ms:Sequence[Sequence[int]], p:int,
                      rng:Optional[np.random.Generator] = None
                      ) -> PerturbationWitness:
    """ Witness for the perturbation lemma.

    Searches the basis of L, then the slot k, then the basis of V, and
    returns the first pair with s_k·v ≠ 0. By bilinearity a nonzero
    value exists on basis elements whenever one exists at all.

    :param M: ZG-lattice
    :type M: ZGLattice
    :param ms: elements m_1, ..., m_d of M
    :type ms: Sequence[Sequence[int]]
    :param p: prime
    :type p: int
    :param rng: generator for the d-generation guard
    :type rng: Optional[np.random.Generator]
    :rtype: PerturbationWitness
    :raises NoWitness: if a hypothesis fails or the search is empty
    """
    rng = np.random.default_rng(0) if rng is None else rng
    d = len(ms)
    anchor = "perturbation lemma, hypotheses"

    U = span_submodule(M, ms)
    if U.rank >= M.rank:
        raise NoWitness("Submodule generated by m has finite index",
                        anchor=anchor, details={"rank_U": U.rank,
                                                "rank_M": M.rank})
    if not spans_generically(M, d, rng):
        raise NoWitness(f"Q⊗M is not {d}-generated", anchor=anchor,
                        details={"rank_M": M.rank, "d": d})

    V = equivariant_complement(M, U)
    L = kernel_lattice(M, ms)
    n = M.order
    for a in range(L.rank):
        s = L.basis.row(a)
        for k in range(d):
            s_k = GroupRingElement.from_vector(s[k * n:(k + 1) * n])
            if s_k.is_zero():
                continue
            for b in range(V.rank):
                v = V.basis.row(b)
                z = M.ring_act(s_k, v)
                if not any(z):
                    continue

                c = solve_in_basis(V.basis, z)
                assert c is not None
                j = min(p_valuation(x, p) for x in c if x != 0) + 1
                zero = tuple([0] * M.ambient_rank)
                witness = PerturbationWitness(
                    h = tuple(v if i == k else zero for i in range(d)),
                    s = tuple(GroupRingElement.from_vector(
                        s[i * n:(i + 1) * n]) for i in range(d)),
                    z = z, j = j, p = p, V = V.basis)
                witness.verify(M, ms)
                logging.debug(f"perturbation witness: slot {k}, j = {j}")

                return witness

    raise NoWitness("No basis pair gives a nonzero value", anchor=anchor,
                    details={"rank_L": L.rank, "rank_V": V.rank})


@dataclass(frozen=True)
class KnResult:
    n: int
    lattice: ZGLattice
    quotient: FGAbelian
    contains_pnz: bool
    below_U_pnV: bool

    @property
    def t_p(self) -> int:
        assert self.quotient.prime is not None
        return self.quotient.p_torsion(self.quotient.prime)

    def to_dict(self) -> dict[str, Any]:
        return {"n": self.n,
                "t_p": self.t_p,
                "quotient": str(self.quotient),
                "contains_pnz": self.contains_pnz,
                "below_U_pnV": self.below_U_pnV}


def build_K_n(M:ZGLattice, ms:Sequence[Sequence[int]],
              witness:PerturbationWitness, n:int) -> KnResult:
    """ K_n = ZG-span of m_i + p^n·h_i, with t_p(M/K_n) and the two
        containments p^n·z ∈ K_n and K_n ⊆ U + p^n·V.

    :rtype: KnResult
    """
    if n < 1:
        raise ValueError(f"Expects n >= 1, got {n}")

    q = witness.p ** n
    gens = [[a + q * b for a, b in zip(m, h)]
            for m, h in zip(ms, witness.h)]
    K = span_submodule(M, gens)
    U = span_submodule(M, ms)
    UV = lattice_basis(U.basis.to_rows() + witness.V.scale(q).to_rows(),
                       M.ambient_rank)

    return KnResult(n, K, quotient_invariants(M, K, witness.p),
                    K.contains([q * a for a in witness.z]),
                    contains_lattice(UV, K.basis))
