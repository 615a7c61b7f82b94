#! /usr/bin/env python

from __future__ import annotations
from dataclasses import dataclass, field, replace
from itertools import combinations, product
import logging
from typing import Any, Optional, Sequence

from sympy import multiplicity
from sympy.combinatorics.coset_table import coset_enumeration_r
from sympy.combinatorics.fp_groups import FpGroup
from sympy.combinatorics.free_groups import FreeGroupElement, free_group
from typing_extensions import Self

from torsiongrowth.core.abelian import FGAbelian
from torsiongrowth.core.freewords import (AnyWord, LETTER_ORDER,
                                          PermutationHomomorphism, PowerWord,
                                          Word, walk)
from torsiongrowth.core.linalg import (IntMatrix, lattice_basis,
                                       rational_kernel_basis, snf,
                                       solve_in_basis)
from torsiongrowth.core.parallel import map_candidates
from torsiongrowth.core.utils import TorsionGrowthError


# coset table columns; the inverse of column k is column k ^ 1
COLUMNS = {1: 0, -1: 1, 2: 2, -2: 3}


class BudgetExhausted(TorsionGrowthError):
    pass

class SearchExhausted(TorsionGrowthError):
    pass


def _as_word(w:AnyWord) -> Word:
    return w.expand() if isinstance(w, PowerWord) else w


@dataclass(frozen=True)
class CosetTable:
    """ Complete coset table of a finite-index subgroup.

    Cosets are numbered from 0, the base coset being 0. The table is the
    pair of permutations induced by x and y; inverse columns are derived.
    ``relators`` are the defining relators of the ambient group and
    ``subgroup_gens`` the words that generated the subgroup, if any.
    """
    count: int
    x: tuple[int, ...]
    y: tuple[int, ...]
    relators: tuple[AnyWord, ...] = tuple()
    subgroup_gens: tuple[AnyWord, ...] = tuple()

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(self.x))
        object.__setattr__(self, "y", tuple(self.y))
        object.__setattr__(self, "relators", tuple(self.relators))
        object.__setattr__(self, "subgroup_gens", tuple(self.subgroup_gens))
        for perm in (self.x, self.y):
            if sorted(perm) != list(range(self.count)):
                raise ValueError("Table columns are not permutations of "
                                 f"{self.count} cosets")

        x_inv, y_inv = [0] * self.count, [0] * self.count
        for c in range(self.count):
            x_inv[self.x[c]] = c
            y_inv[self.y[c]] = c
        object.__setattr__(self, "_columns", (self.x, tuple(x_inv),
                                              self.y, tuple(y_inv)))

    @classmethod
    def trivial(cls, relators:Sequence[AnyWord] = tuple()) -> Self:
        return cls(1, (0,), (0,), tuple(relators))

    @property
    def index(self) -> int:
        return self.count

    def act(self, c:int, letter:int) -> int:
        return self._columns[COLUMNS[letter]][c]

    def walk(self, c:int, word:AnyWord) -> int:
        return walk(self.act, c, word)

    def with_relators(self, relators:Sequence[AnyWord]) -> CosetTable:
        return replace(self, relators=tuple(r for r in relators
                                            if not r.is_identity()))

    def validate(self) -> None:
        """ Check that every relator fixes every coset and that every
            subgroup generator fixes the base coset.

        Totality and inverse consistency hold by construction.

        :raises ValueError: on the first violated condition
        """
        for r in self.relators:
            for c in range(self.count):
                if self.walk(c, r) != c:
                    raise ValueError(f"Relator {r} moves coset {c}")
        for w in self.subgroup_gens:
            if self.walk(0, w) != 0:
                raise ValueError(f"Subgroup generator {w} moves the base "
                                 "coset")

    def is_valid(self) -> bool:
        try:
            self.validate()
        except ValueError:
            return False

        return True

    def standardize(self) -> CosetTable:
        """ Renumber cosets in breadth-first order over x, y, X, Y """
        order = {0: 0}
        queue = [0]
        for c in queue:
            for letter in LETTER_ORDER:
                d = self.act(c, letter)
                if d not in order:
                    order[d] = len(order)
                    queue.append(d)

        if len(order) != self.count:
            raise ValueError("Action is not transitive")

        x, y = [0] * self.count, [0] * self.count
        for c, new in order.items():
            x[new] = order[self.x[c]]
            y[new] = order[self.y[c]]

        return replace(self, x=tuple(x), y=tuple(y))

    def homomorphism(self) -> PermutationHomomorphism:
        """ Regular action of F/K on the cosets of a normal subgroup K """
        return PermutationHomomorphism(self.x, self.y)

    def contains(self, word:AnyWord) -> bool:
        return self.walk(0, word) == 0

    def is_normal(self) -> bool:
        """ Conjugation test: conjugates of every Schreier generator by
            x and y still fix the base coset. """
        ss = schreier(self)
        for s in ss.generators:
            for letter in (1, 2):
                g = Word((letter,))
                if not self.contains(g * s * g.inverse()) \
                        or not self.contains(g.inverse() * s * g):
                    return False

        return True

    def to_json(self) -> dict[str, Any]:
        return {"count": self.count,
                "x": list(self.x),
                "y": list(self.y),
                "relators": [PowerWord.from_word(r).to_json()
                             if isinstance(r, Word) else r.to_json()
                             for r in self.relators],
                "subgroup_gens": [str(_as_word(w))
                                  for w in self.subgroup_gens]}

    @classmethod
    def from_json(cls, data:dict[str, Any]) -> Self:
        table = cls(int(data["count"]), data["x"], data["y"],
                    tuple(PowerWord.from_json(r)
                          for r in data.get("relators", list())),
                    tuple(Word.parse(w)
                          for w in data.get("subgroup_gens", list())))
        table.validate()

        return table


_FREE, _X, _Y = free_group("x, y")
_LETTERS = {1: _X, -1: _X**-1, 2: _Y, -2: _Y**-1}


def _element(w:AnyWord) -> FreeGroupElement:
    """ The word as an element of sympy's free group on x and y """
    out = _FREE.identity
    for base, e in (w.factors if isinstance(w, PowerWord) else ((w, 1),)):
        g = _FREE.identity
        for a in base.letters:
            g = g * _LETTERS[a]
        out = out * g**e

    return out


def todd_coxeter(relators:Sequence[AnyWord],
                 subgroup_gens:Sequence[AnyWord] = tuple(),
                 max_cosets:int = 4096) -> CosetTable:
    """ Enumerate the cosets of the subgroup generated by
        ``subgroup_gens`` in the group presented by ``relators``.

    HLT enumeration by sympy. When the budget is reached a lookahead pass
    scans all relators without new definitions before giving up. The
    live cosets are renumbered in breadth-first order.

    :param relators: defining relators
    :type relators: Sequence[AnyWord]
    :param subgroup_gens: subgroup generators
    :type subgroup_gens: Sequence[AnyWord]
    :param max_cosets: number of cosets the enumeration may define
    :type max_cosets: int
    :rtype: CosetTable
    :raises BudgetExhausted: if the index exceeds the budget or is infinite
    """
    if max_cosets < 1:
        raise ValueError(f"Coset budget must be positive, got {max_cosets}")

    def exhausted(live:Optional[int] = None) -> BudgetExhausted:
        return BudgetExhausted(f"Coset enumeration exceeded {max_cosets} "
                               "cosets",
                               anchor="coset enumeration",
                               details={"max_cosets": max_cosets,
                                        "live_cosets": live})

    rels = [_element(r) for r in relators if not r.is_identity()]
    gens = [_element(w) for w in subgroup_gens if not w.is_identity()]
    try:
        C = coset_enumeration_r(FpGroup(_FREE, rels), gens,
                                max_cosets=max_cosets, incomplete=True)
    except ValueError as e:
        # raised while scanning the subgroup generators
        logging.debug(f"coset enumeration: {e}")
        raise exhausted()

    if not C.is_complete():
        live = len(C.omega)
        C.look_ahead()
        logging.debug(f"lookahead: {live} -> {len(C.omega)} live cosets")
        if not C.is_complete():
            raise exhausted(len(C.omega))

    live = C.omega
    number = {c: k for k, c in enumerate(live)}
    # sympy columns: x, x^-1, y, y^-1
    x = [number[C.rep(C.table[c][0])] for c in live]
    y = [number[C.rep(C.table[c][2])] for c in live]
    logging.debug(f"coset enumeration: {len(live)} cosets, "
                  f"{len(C.table)} defined")

    try:
        table = CosetTable(len(live), x, y, tuple(relators),
                           tuple(subgroup_gens))
        table.validate()
    except ValueError:
        raise exhausted(len(live))

    return table.standardize()


@dataclass(frozen=True)
class SchreierSystem:
    """ Breadth-first Schreier transversal and generators of a coset
        table's subgroup (as a subgroup of the free group). """
    table: CosetTable
    transversal: tuple[Word, ...]
    generators: tuple[Word, ...]
    edges: tuple[tuple[int, int], ...]
    edge_index: dict[tuple[int, int], int] = field(compare=False)

    @property
    def rank(self) -> int:
        return len(self.generators)

    def vector(self, start:int, word:AnyWord) -> tuple[int, tuple[int, ...]]:
        """ Abelianized rewriting of a path

        :rtype: tuple[int, tuple[int, ...]]
        :returns: end coset and exponent-sum vector over the generators
        """
        vec = [0] * self.rank
        index = self.edge_index

        def visit(c:int, letter:int, d:int, weight:int) -> None:
            if letter > 0:
                k = index.get((c, letter))
                if k is not None:
                    vec[k] += weight
            else:
                k = index.get((d, -letter))
                if k is not None:
                    vec[k] -= weight

        end = walk(self.table.act, start, word, visit)

        return end, tuple(vec)

    def rewrite(self, w:AnyWord) -> tuple[list[tuple[int, int]],
                                          tuple[int, ...]]:
        """ Express a subgroup element in the Schreier generators

        :rtype: tuple[list[tuple[int, int]], tuple[int, ...]]
        :returns: (generator index, ±1) sequence and its exponent-sum
            vector
        """
        w = _as_word(w)
        sequence = list()
        c = 0
        for letter in w.letters:
            d = self.table.act(c, letter)
            if letter > 0:
                k = self.edge_index.get((c, letter))
                if k is not None:
                    sequence.append((k, 1))
            else:
                k = self.edge_index.get((d, -letter))
                if k is not None:
                    sequence.append((k, -1))
            c = d

        if c != 0:
            raise ValueError(f"Word {w} is not in the subgroup")

        vec = [0] * self.rank
        for k, e in sequence:
            vec[k] += e

        return sequence, tuple(vec)

    def expand(self, sequence:Sequence[tuple[int, int]]) -> Word:
        w = Word()
        for k, e in sequence:
            w = w * self.generators[k] ** e

        return w

    def word_for(self, coords:Sequence[int]) -> Word:
        """ Product of generator powers in index order """
        return self.expand([(k, e) for k, e in enumerate(coords) if e != 0])

    def relator_matrix(self, relators:Optional[Sequence[AnyWord]] = None
                       ) -> IntMatrix:
        """ Rewritten conjugates t·r·t^-1 of every relator by every
            transversal element, one row each. """
        relators = self.table.relators if relators is None else relators
        rows = list()
        for r in relators:
            if r.is_identity():
                continue
            for c in range(self.table.count):
                end, vec = self.vector(c, r)
                if end != c:
                    raise ValueError(f"Relator {r} moves coset {c}")
                rows.append(vec)

        return IntMatrix.from_rows(rows, cols=self.rank)

    def conjugation_matrix(self, letter:int) -> IntMatrix:
        """ Action of conjugation s -> g s g^-1 on the abelianized
            generators, in row-vector convention. """
        g = Word((letter,))
        rows = [self.rewrite(g * s * g.inverse())[1]
                for s in self.generators]

        return IntMatrix.from_rows(rows, cols=self.rank)


def schreier(table:CosetTable) -> SchreierSystem:
    """ Schreier system of a complete table

    The transversal is built breadth-first in letter order x, y, X, Y;
    the generators t·g·(t')^-1 come from the non-tree edges c -g-> c·g
    with g in {x, y}, ordered by coset and then letter.

    :rtype: SchreierSystem
    """
    transversal = {0: Word()}
    tree = set()
    queue = [0]
    for c in queue:
        for letter in LETTER_ORDER:
            d = table.act(c, letter)
            if d in transversal:
                continue
            transversal[d] = transversal[c] * Word((letter,))
            tree.add((c, letter) if letter > 0 else (d, -letter))
            queue.append(d)

    generators, edges = list(), list()
    for c in range(table.count):
        for letter in (1, 2):
            if (c, letter) in tree:
                continue
            d = table.act(c, letter)
            generators.append(transversal[c] * Word((letter,))
                              * transversal[d].inverse())
            edges.append((c, letter))

    return SchreierSystem(table,
                          tuple(transversal[c] for c in range(table.count)),
                          tuple(generators), tuple(edges),
                          {e: k for k, e in enumerate(edges)})

def subgroup_abelianization(table:CosetTable,
                            relators:Optional[Sequence[AnyWord]] = None,
                            prime:Optional[int] = None) -> FGAbelian:
    """ Abelianization of a finite-index subgroup of a finitely presented
        group, by Reidemeister–Schreier rewriting.

    :param table: coset table of the subgroup
    :type table: CosetTable
    :param relators: relators of the ambient group; defaults to the
        table's own
    :type relators: Optional[Sequence[AnyWord]]
    :param prime: localize at this prime
    :type prime: Optional[int]
    :rtype: FGAbelian
    """
    ss = schreier(table)

    return FGAbelian.from_relation_matrix(ss.relator_matrix(relators), prime)


def intersect(a:CosetTable, b:CosetTable) -> CosetTable:
    """ Coset table of the intersection of two subgroups: the orbit of the
        pair of base cosets under the product action. """
    number = {(0, 0): 0}
    queue = [(0, 0)]
    for c, d in queue:
        for letter in LETTER_ORDER:
            pair = (a.act(c, letter), b.act(d, letter))
            if pair not in number:
                number[pair] = len(number)
                queue.append(pair)

    x, y = [0] * len(number), [0] * len(number)
    for (c, d), k in number.items():
        x[k] = number[(a.act(c, 1), b.act(d, 1))]
        y[k] = number[(a.act(c, 2), b.act(d, 2))]

    return CosetTable(len(number), x, y, a.relators).standardize()

def cover(ss:SchreierSystem, lattice:IntMatrix,
          max_cosets:Optional[int] = None) -> CosetTable:
    """ Coset table of the preimage of a finite-index sublattice W of the
        abelianized subgroup.

    Cosets are pairs (c, a) with c a coset of the subgroup and a in the
    finite abelian group Z^n / W; a letter moves (c, a) to
    (c·g, a + [t_c g t_(c·g)^-1]).

    :param ss: Schreier system of the subgroup
    :type ss: SchreierSystem
    :param lattice: basis of W, of full rank
    :type lattice: IntMatrix
    :param max_cosets: budget on the resulting index
    :type max_cosets: Optional[int]
    :rtype: CosetTable
    """
    table = ss.table
    sf = snf(lattice)
    assert sf.V is not None
    moduli = [d for d in sf.diagonal]
    if len(moduli) != ss.rank or 0 in moduli:
        raise ValueError("Sublattice does not have finite index")

    positions = [i for i, d in enumerate(moduli) if d > 1]
    radix = [moduli[i] for i in positions]
    size = 1
    for d in radix:
        size *= d
    count = table.count * size
    if max_cosets is not None and count > max_cosets:
        raise BudgetExhausted(f"Covering table of index {count} exceeds "
                              f"the budget of {max_cosets} cosets",
                              anchor="subgroup search",
                              details={"index": count,
                                       "max_cosets": max_cosets})

    # generator images in the quotient coordinates
    images = [tuple(sf.V[k, i] for i in positions) for k in range(ss.rank)]

    def encode(a:Sequence[int]) -> int:
        code = 0
        for v, d in zip(a, radix):
            code = code * d + v % d
        return code

    def decode(code:int) -> list[int]:
        a = list()
        for d in reversed(radix):
            code, v = divmod(code, d)
            a.append(v)
        return a[::-1]

    perms = {1: [0] * count, 2: [0] * count}
    for c in range(table.count):
        for code in range(size):
            a = decode(code)
            for letter in (1, 2):
                k = ss.edge_index.get((c, letter))
                b = a if k is None else [u + v for u, v in zip(a, images[k])]
                perms[letter][c * size + code] = (table.act(c, letter) * size
                                                  + encode(b))

    return CosetTable(count, perms[1], perms[2],
                      table.relators).standardize()


def index_log(count:int, p:int) -> Optional[int]:
    """ k with count = p^k, or None if count is not a power of p """
    k = int(multiplicity(p, count))

    return k if p ** k == count else None

def invariant_sublattices(ss:SchreierSystem, lattice:IntMatrix,
                          floor:IntMatrix, p:int) -> list[IntMatrix]:
    """ G-invariant sublattices of index p in ``lattice`` that contain
        ``floor``, in a fixed enumeration order.

    Such a sublattice contains Y = floor + p·W + sum (g-1)W, so the
    candidates are the hyperplanes of the F_p-space W/Y. A hyperplane is
    the kernel of a functional whose first nonzero coordinate is 1;
    functionals are ordered by the position of that 1, then
    lexicographically.

    :param ss: Schreier system of a normal subgroup
    :type ss: SchreierSystem
    :param lattice: basis (HNF) of a G-invariant lattice W
    :type lattice: IntMatrix
    :param floor: basis of a G-invariant lattice contained in W
    :type floor: IntMatrix
    :param p: prime
    :type p: int
    :rtype: list[IntMatrix]
    """
    n = ss.rank
    k = lattice.rows
    conj = [ss.conjugation_matrix(letter) for letter in (1, 2)]

    rows = floor.to_rows() + lattice.scale(p).to_rows()
    for C in conj:
        image = lattice @ C
        rows.extend([a - b for a, b in zip(image.row(i), lattice.row(i))]
                    for i in range(k))

    coords = list()
    for v in rows:
        c = solve_in_basis(lattice, v)
        if c is None:
            raise ValueError("Lattice is not invariant or does not contain "
                             "the floor")
        coords.append(c)

    sf = snf(IntMatrix.from_rows(coords, cols=k))
    assert sf.V is not None
    free = [i for i, d in enumerate(sf.diagonal) if d == p]
    free += list(range(len(sf.diagonal), k))
    if any(d not in (1, p) for d in sf.diagonal):
        raise ValueError("Quotient is not elementary abelian")

    out = list()
    for lead in range(len(free)):
        for tail in product(range(p), repeat=len(free) - lead - 1):
            phi = (0,) * lead + (1,) + tail
            # functional on W-coordinates: c -> (c V)_free · phi mod p
            a = [sum(sf.V[i, j] * f for j, f in zip(free, phi)) % p
                 for i in range(k)]
            kernel = rational_kernel_basis(IntMatrix.from_rows([a + [p]]))
            sub = lattice_basis([v[:k] for v in kernel], k)
            ambient = lattice_basis((sub @ lattice).to_rows(), n)
            out.append(ambient)

    return out


@dataclass(frozen=True)
class SearchBudget:
    max_cosets: int = 256
    max_depth: int = 3
    max_candidates: int = 64

    def to_dict(self) -> dict[str, int]:
        return {"max_cosets": self.max_cosets,
                "max_depth": self.max_depth,
                "max_candidates": self.max_candidates}


@dataclass(frozen=True)
class FoundSubgroup:
    """ Certified output of the subgroup search """
    table: CosetTable
    L: CosetTable
    refined: CosetTable
    m: int
    abelianization: FGAbelian
    candidates_examined: int
    depth: int

    @property
    def index(self) -> int:
        return self.table.count


def refine(L:CosetTable, target:int, p:int,
           budget:SearchBudget) -> tuple[CosetTable, int]:
    """ Normal subgroup L' of L containing [L,L]L^(p^m), with m and then
        |L:L'| minimal subject to |G:L'| > ``target``.

    :rtype: tuple[CosetTable, int]
    :returns: the refined table and m (0 when no refinement was needed)
    """
    if L.count > target:
        return L, 0

    t = 0
    while L.count * p ** t <= target:
        t += 1

    ss = schreier(L)
    n = ss.rank
    relations = ss.relator_matrix()
    for m in range(1, t + 1):
        floor = lattice_basis(relations.to_rows()
                              + IntMatrix.identity(n).scale(p ** m).to_rows(),
                              n)
        depth = sum(int(multiplicity(p, d)) for d in snf(
            floor, transforms=False).diagonal)
        if depth < t:
            continue

        W = IntMatrix.identity(n)
        for _ in range(t):
            W = invariant_sublattices(ss, W, floor, p)[0]

        return cover(ss, W, budget.max_cosets), m

    raise SearchExhausted("Abelianization too small to refine",
                          anchor="chain step, choice of L")

def certify_subgroup(S:CosetTable, H:CosetTable, p:int) -> Optional[str]:
    """ Independent checks on a candidate S < H; returns the first failed
        property, or None when all hold. """
    if not S.is_valid():
        return "relators"
    if not S.is_normal():
        return "normality"
    if index_log(S.count, p) is None:
        return "p-power index"
    ss = schreier(S)
    if any(not H.contains(s) for s in ss.generators) or S.count <= H.count:
        return "strict containment"
    if subgroup_abelianization(S).free_rank <= 0:
        return "infinite abelianization"

    return None

def _evaluate(args:tuple[CosetTable, CosetTable, int, SearchBudget]
              ) -> Optional[tuple[CosetTable, CosetTable, int, FGAbelian]]:
    L, H, p, budget = args
    ab = subgroup_abelianization(L)
    if ab.free_rank <= 0:
        return None

    try:
        refined, m = refine(L, H.count, p, budget)
    except (BudgetExhausted, SearchExhausted) as e:
        logging.debug(f"refinement failed: {e.message}")
        return None

    S = intersect(refined, H)
    failed = certify_subgroup(S, H, p)
    if failed is not None:
        logging.warning(f"candidate rejected on {failed}")
        return None

    return S, refined, m, subgroup_abelianization(S)

def _children(table:CosetTable, p:int,
              budget:SearchBudget) -> list[CosetTable]:
    ss = schreier(table)
    n = ss.rank
    floor = lattice_basis(ss.relator_matrix().to_rows(), n)
    out = list()
    for W in invariant_sublattices(ss, IntMatrix.identity(n), floor, p):
        try:
            out.append(cover(ss, W, budget.max_cosets))
        except BudgetExhausted:
            logging.debug(f"skipping child of index {table.count * p}")

    return out

def find_S(relators:Sequence[AnyWord], H:CosetTable, p:int,
           budget:SearchBudget = SearchBudget(),
           parallel:bool = False) -> FoundSubgroup:
    """ Search for a normal subgroup S of p-power index, strictly inside H,
        with infinite abelianization.

    Candidates L are normal subgroups of p-power index, generated level
    by level: the children of K are the preimages of G-invariant index-p
    sublattices of the abelianization of K. The first L with infinite
    abelianization, in enumeration order, is refined until its index
    exceeds that of H, and S = L' ∩ H is certified before it is returned.

    :param relators: relators of G
    :type relators: Sequence[AnyWord]
    :param H: coset table of a normal subgroup H of p-power index
    :type H: CosetTable
    :param p: prime
    :type p: int
    :param budget: search budget
    :type budget: SearchBudget
    :param parallel: evaluate the candidates of a level concurrently
    :type parallel: bool
    :rtype: FoundSubgroup
    :raises SearchExhausted: if no certified subgroup is found in budget
    """
    relators = tuple(r for r in relators if not r.is_identity())
    H = H.with_relators(relators)
    root = CosetTable.trivial(relators)

    examined = 0
    level = [root]
    for depth in range(1, budget.max_depth + 1):
        candidates = list()
        for node in level:
            candidates.extend(_children(node, p, budget))
            if examined + len(candidates) >= budget.max_candidates:
                break
        candidates = candidates[:budget.max_candidates - examined]
        if len(candidates) <= 0:
            break

        logging.info(f"subgroup search depth {depth}: "
                     f"{len(candidates)} candidates")
        results = map_candidates(_evaluate,
                                 [(L, H, p, budget) for L in candidates],
                                 parallel)
        for k, (L, result) in enumerate(zip(candidates, results)):
            if result is None:
                continue

            S, refined, m, ab = result
            return FoundSubgroup(S, L, refined, m, ab, examined + k + 1,
                                 depth)

        examined += len(candidates)
        level = candidates
        if examined >= budget.max_candidates:
            break

    raise SearchExhausted(f"No certified subgroup among {examined} "
                          "candidates",
                          anchor="chain step, existence of S",
                          details={"budget": budget.to_dict(),
                                   "examined": examined,
                                   "index_H": H.count})


@dataclass(frozen=True)
class NormalSubgroup:
    elements: frozenset[int]
    generators: tuple[Word, ...]

    @property
    def order(self) -> int:
        return len(self.elements)


def normal_subgroups(relators:Sequence[AnyWord],
                     max_cosets:int = 4096) -> list[NormalSubgroup]:
    """ All normal subgroups of a finite group, as sets of elements of its
        regular coset table.

    Normal closures of single elements are joined pairwise until no new
    subgroup appears.

    :rtype: list[NormalSubgroup]
    """
    table = todd_coxeter(relators, tuple(), max_cosets)
    hom = table.homomorphism()
    n = hom.order

    def closure(seeds:set[int]) -> frozenset[int]:
        conjugates = {hom.mul(hom.mul(hom.inverse(h), a), h)
                      for a in seeds for h in range(n)}
        elements = {0}
        queue = [0]
        for a in queue:
            for c in conjugates:
                b = hom.mul(a, c)
                if b not in elements:
                    elements.add(b)
                    queue.append(b)
        return frozenset(elements)

    found = {closure({a}) for a in range(n)}
    while True:
        joins = {closure(set(A | B)) for A, B in combinations(found, 2)}
        if joins <= found:
            break
        found |= joins

    return [NormalSubgroup(N, tuple(hom.words[a] for a in sorted(N)))
            for N in sorted(found, key=lambda N: (len(N), sorted(N)))]
