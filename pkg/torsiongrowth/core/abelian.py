#! /usr/bin/env python

from __future__ import annotations
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product
import json
import logging
from math import gcd, prod
from typing import Any, Mapping, Optional, Sequence, Union

from sympy import divisors, factorint, isprime
from typing_extensions import Self

from torsiongrowth.core.linalg import (IntMatrix, p_part, p_valuation, snf,
                                       solve_in_basis)


def canonical_factors(orders:Sequence[int],
                      prime:Optional[int] = None) -> tuple[int, ...]:
    """ Invariant factors of a direct sum of cyclic groups

    :param orders: orders of the cyclic summands (1 is allowed)
    :type orders: Sequence[int]
    :param prime: keep only the p-parts when set
    :type prime: Optional[int]
    :rtype: tuple[int, ...]
    :returns: ascending divisibility chain without factors equal to 1
    """
    powers = dict()  # prime -> exponents of its elementary divisors
    for n in orders:
        if n <= 0:
            raise ValueError(f"Cyclic orders must be positive, got {n}")
        for q, e in factorint(n).items():
            if prime is not None and q != prime:
                continue
            powers.setdefault(q, list()).append(e)

    if len(powers) <= 0:
        return tuple()

    length = max(len(exps) for exps in powers.values())
    factors = [1] * length
    for q, exps in powers.items():
        # largest elementary divisors go to the largest invariant factors
        for k, e in enumerate(sorted(exps, reverse=True)):
            factors[length - 1 - k] *= q ** e

    return tuple(factors)


@dataclass(frozen=True)
class FGAbelian:
    """ Finitely generated abelian group, or module over the integers
        localized at a prime when ``prime`` is set.

    Modules over the p-adic integers are represented exactly by their
    localizations: all torsion numbers and ranks agree.
    """
    invariant_factors: tuple[int, ...] = tuple()
    free_rank: int = 0
    prime: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "invariant_factors",
                           tuple(int(d) for d in self.invariant_factors))
        if self.free_rank < 0:
            raise ValueError("Free rank must be nonnegative")
        if self.prime is not None and not isprime(self.prime):
            raise ValueError(f"{self.prime} is not a prime")

        factors = self.invariant_factors
        for d in factors:
            if d < 2:
                raise ValueError(f"Invariant factors must be at least 2, "
                                 f"got {d}")
            if self.prime is not None and p_part(d, self.prime) != d:
                raise ValueError(f"{d} is not a power of {self.prime}")
        for d, e in zip(factors, factors[1:]):
            if e % d != 0:
                raise ValueError(f"Divisibility chain broken: {d} ∤ {e}")

    @classmethod
    def from_relation_matrix(cls, A:IntMatrix,
                             prime:Optional[int] = None) -> Self:
        """ Cokernel of a relation matrix; rows are relations among the
            generators indexed by columns.

        :param A: relation matrix
        :type A: IntMatrix
        :param prime: localize at this prime
        :type prime: Optional[int]
        :rtype: FGAbelian
        """
        sf = snf(A, transforms=False)
        factors = sf.invariant_factors
        if prime is not None:
            factors = tuple(q for q in (p_part(d, prime) for d in factors)
                            if q > 1)

        return cls(factors, A.cols - sf.rank, prime)

    @classmethod
    def from_cyclic_orders(cls, orders:Sequence[int], free_rank:int = 0,
                           prime:Optional[int] = None) -> Self:
        return cls(canonical_factors(orders, prime), free_rank, prime)

    @property
    def locality(self) -> str:
        return "global" if self.prime is None else f"at-{self.prime}"

    @property
    def dim(self) -> int:
        """ Torsion free rank """
        return self.free_rank

    def torsion(self) -> int:
        return prod(self.invariant_factors)

    def p_torsion(self, p:int) -> int:
        return p_part(self.torsion(), p)

    def order(self) -> Optional[int]:
        """ Group order, or None when infinite """
        return self.torsion() if self.free_rank == 0 else None

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and len(self.invariant_factors) == 0

    def exponent_quotient(self, n:int) -> FGAbelian:
        """ A/nA

        :param n: positive integer
        :type n: int
        :rtype: FGAbelian
        """
        if n <= 0:
            raise ValueError(f"Exponent must be positive, got {n}")

        if self.prime is not None:
            # units act invertibly on a localized module
            n = p_part(n, self.prime)

        orders = [gcd(d, n) for d in self.invariant_factors]
        orders += [n] * self.free_rank

        return FGAbelian.from_cyclic_orders(orders, 0, self.prime)

    def direct_sum(self, other:FGAbelian) -> FGAbelian:
        if self.prime != other.prime:
            raise ValueError("Cannot add modules of different locality")

        return FGAbelian.from_cyclic_orders(self.invariant_factors
                                            + other.invariant_factors,
                                            self.free_rank + other.free_rank,
                                            self.prime)

    def relation_matrix(self) -> IntMatrix:
        """ A diagonal presentation of this group """
        k = len(self.invariant_factors)

        return IntMatrix.diagonal(self.invariant_factors, k,
                                  k + self.free_rank)

    def to_dict(self) -> dict[str, Any]:
        return {"invariant_factors": list(self.invariant_factors),
                "free_rank": self.free_rank,
                "locality": self.locality}

    def __str__(self) -> str:
        ring = "Z" if self.prime is None else f"Z_({self.prime})"
        parts = list()
        if self.free_rank > 0:
            parts.append(ring if self.free_rank == 1
                         else f"{ring}^{self.free_rank}")
        parts.extend(f"Z/{d}" for d in self.invariant_factors)

        return " x ".join(parts) if len(parts) > 0 else "0"


@dataclass(frozen=True)
class GrowthFunction:
    """ Total function on the positive integers given by a finite table.

    Tabulated arguments return their value. Other arguments continue
    linearly from the nearest tabulated argument below; arguments below
    the table take the value of its smallest argument.
    """
    table: tuple[tuple[int, int], ...] = ((1, 2),)

    def __post_init__(self) -> None:
        if isinstance(self.table, Mapping):
            object.__setattr__(self, "table", tuple(self.table.items()))
        table = tuple(sorted((int(k), int(v)) for k, v in self.table))
        if len(table) <= 0:
            raise ValueError("Growth table is empty")
        if table[0][0] < 1 or min(v for _, v in table) < 0:
            raise ValueError("Growth table needs positive arguments and "
                             "nonnegative values")
        if len({k for k, _ in table}) != len(table):
            raise ValueError("Duplicate growth table arguments")

        object.__setattr__(self, "table", table)

    @classmethod
    def from_json(cls, data:Union[str, Mapping[Any, Any]]) -> Self:
        if isinstance(data, str):
            data = json.loads(data)

        return cls(tuple((int(k), int(v)) for k, v in data.items()))

    def to_json(self) -> dict[str, int]:
        return {str(k): v for k, v in self.table}

    def __call__(self, n:int) -> int:
        if n < 1:
            raise ValueError(f"Growth function is defined on n >= 1, got {n}")

        below = [(k, v) for k, v in self.table if k <= n]
        if len(below) <= 0:
            return self.table[0][1]

        k, v = below[-1]

        return v + (n - k)


@dataclass
class SuiteReport:
    """ Outcome of an exhaustive verification suite """
    name: str
    checked: int = 0
    hypotheses_met: int = 0
    violations: list[dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return len(self.violations) <= 0

    def to_dict(self) -> dict[str, Any]:
        return {"suite": self.name,
                "checked": self.checked,
                "hypotheses_met": self.hypotheses_met,
                "violations": self.violations,
                "passed": self.passed}


def torsion_family(primes:Sequence[int], max_exp:int, max_factors:int,
                   max_rank:int,
                   prime:Optional[int] = None) -> list[FGAbelian]:
    """ All groups whose torsion is a sum of at most ``max_factors``
        cyclic groups of prime power order p^e, p in ``primes`` and
        e <= ``max_exp``, with free rank at most ``max_rank``.

    :rtype: list[FGAbelian]
    """
    cyclic = sorted(q ** e for q in primes for e in range(1, max_exp + 1))
    torsion_parts = set()
    for k in range(max_factors + 1):
        for orders in combinations_with_replacement(cyclic, k):
            torsion_parts.add(canonical_factors(orders, prime))

    return [FGAbelian(factors, rank, prime)
            for factors in sorted(torsion_parts, key=lambda f: (prod(f), f))
            for rank in range(max_rank + 1)]

def check_lemma_L1(part:int, primes:Sequence[int], max_exp:int = 4,
                   max_rank:int = 2,
                   max_factors:Optional[int] = None) -> SuiteReport:
    """ Exhaustive check of the exponent-quotient torsion lemma.

    Part 1 works at a single prime: for every pair (A, B) of modules
    with t(A) = p^k, n > k and A[p^n] ≅ B[p^n], t(B) >= t(A). Part 2
    works globally: for n = t(A)·m with m > 1 and A[n] ≅ B[n],
    t(B) >= t(A).

    :param part: 1 or 2
    :type part: int
    :param primes: primes spanning the family; part 1 runs once per prime
    :type primes: Sequence[int]
    :param max_exp: largest exponent of a cyclic prime-power factor
    :type max_exp: int
    :param max_rank: largest free rank
    :type max_rank: int
    :param max_factors: largest number of cyclic factors; defaults to
        ``max_rank``
    :type max_factors: Optional[int]
    :rtype: SuiteReport
    """
    if part not in (1, 2):
        raise ValueError(f"Lemma has parts 1 and 2, got {part}")
    max_factors = max_rank if max_factors is None else max_factors

    report = SuiteReport(f"lemma_L1_part{part}")
    if part == 1:
        for p in primes:
            family = torsion_family([p], max_exp, max_factors, max_rank, p)
            # n ranges past every torsion exponent in the family
            for n in range(1, max_exp * max_factors + 3):
                buckets = dict()
                for B in family:
                    buckets.setdefault(B.exponent_quotient(p ** n),
                                       list()).append(B)

                for A in family:
                    report.checked += len(family)
                    k = p_valuation(A.p_torsion(p), p)
                    if n <= k:
                        continue

                    _assert_torsion(report, A, buckets.get(
                        A.exponent_quotient(p ** n), list()), n)
    else:
        family = torsion_family(primes, max_exp, max_factors, max_rank)
        for A in family:
            for m in (2, 3):
                n = A.torsion() * m
                report.checked += len(family)
                matches = [B for B in family
                           if B.exponent_quotient(n) == A.exponent_quotient(n)]
                _assert_torsion(report, A, matches, n)

    logging.info(f"{report.name}: {report.checked} pairs, "
                 f"{report.hypotheses_met} with hypotheses met, "
                 f"{len(report.violations)} violations")

    return report

def _assert_torsion(report:SuiteReport, A:FGAbelian,
                    matches:list[FGAbelian], n:int) -> None:
    for B in matches:
        report.hypotheses_met += 1
        if B.torsion() < A.torsion():
            report.violations.append({"A": str(A), "B": str(B), "n": n})

def sublattices(ncols:int, index:int) -> list[IntMatrix]:
    """ All sublattices of Z^ncols of the given index, as HNF bases

    :rtype: list[IntMatrix]
    """
    if ncols < 1:
        raise ValueError(f"Ambient rank must be positive, got {ncols}")

    out = list()
    for diagonal in _ordered_factorizations(index, ncols):
        ranges = [range(diagonal[j]) for i in range(ncols)
                  for j in range(i + 1, ncols)]
        for above in product(*ranges):
            entries = iter(above)
            out.append(IntMatrix.from_rows(
                [[0] * i + [diagonal[i]] + [next(entries)
                                            for _ in range(i + 1, ncols)]
                 for i in range(ncols)]))

    return out

def _ordered_factorizations(n:int, length:int) -> list[tuple[int, ...]]:
    if length == 1:
        return [(n,)]

    return [(d,) + rest for d in divisors(n)
            for rest in _ordered_factorizations(n // d, length - 1)]

def abelian_groups(order:int) -> list[tuple[int, ...]]:
    """ Invariant factors d_1 | d_2 | ... of every abelian group of the
        given order, one chain per isomorphism class. """
    def chains(rest:int, prev:int) -> list[tuple[int, ...]]:
        if rest == 1:
            return [tuple()]

        return [(d,) + tail for d in divisors(rest)
                if d > 1 and d % prev == 0
                for tail in chains(rest // d, d)]

    return chains(order, 1)

def subgroup_lattices(factors:Sequence[int]) -> list[IntMatrix]:
    """ HNF bases of the lattices between diag(factors)·Z^k and Z^k, that
        is, the subgroups of Z/d_1 ⊕ ... ⊕ Z/d_k.

    Rows are chosen from the last coordinate up; row i is kept only if
    d_i·e_i lies in the lattice spanned by it and the rows below.

    :rtype: list[IntMatrix]
    """
    k = len(factors)
    tails = [list()]
    for i in reversed(range(k)):
        grown = list()
        for rows in tails:
            below = IntMatrix.from_rows(rows, cols=k)
            pivots = [row[j] for j, row in zip(range(i + 1, k), rows)]
            for h in divisors(factors[i]):
                c = factors[i] // h
                for above in product(*(range(a) for a in pivots)):
                    residual = [0] * (i + 1) + [-c * a for a in above]
                    if any(residual) \
                            and solve_in_basis(below, residual) is None:
                        continue
                    grown.append([[0] * i + [h] + list(above)] + rows)
        tails = grown

    return [IntMatrix.from_rows(rows, cols=k) for rows in tails]

def _torsion_of_quotient(lattice:IntMatrix,
                         relations:IntMatrix) -> Optional[int]:
    """ t(Λ/R) for R ⊆ Λ, or None when R is not contained in Λ """
    coords = list()
    for i in range(relations.rows):
        c = solve_in_basis(lattice, relations.row(i))
        if c is None:
            return None
        coords.append(c)

    rel = IntMatrix.from_rows(coords, cols=lattice.rows)

    return FGAbelian.from_relation_matrix(rel).torsion()

def check_prop_el(max_order:int = 64, max_index:int = 16,
                  max_cyclic:int = 16) -> SuiteReport:
    """ Exhaustive check of t(A) <= t(B)·|A:B| for subgroups B of finite
        index.

    Groups are presented as A = Z^k / R and subgroups as lattices
    R ⊆ Λ ⊆ Z^k, so that B = Λ/R and |A:B| = |Z^k:Λ|. Every abelian
    group of order at most ``max_order`` is paired with all of its
    subgroups; the infinite groups Z, Z^2, Z^3 and Z ⊕ Z/c
    (c <= ``max_cyclic``) are paired with all subgroups of index at most
    ``max_index``.

    :rtype: SuiteReport
    """
    report = SuiteReport("prop_el")

    def check(relations:IntMatrix, t_A:int, lam:IntMatrix) -> None:
        report.checked += 1
        t_B = _torsion_of_quotient(lam, relations)
        if t_B is None:
            return

        report.hypotheses_met += 1
        index = prod(lam[i, i] for i in range(lam.rows))
        if t_A > t_B * index:
            report.violations.append({"relations": relations.to_rows(),
                                      "subgroup": lam.to_rows(),
                                      "t_A": t_A, "t_B": t_B})

    for N in range(1, max_order + 1):
        for factors in abelian_groups(N):
            if len(factors) <= 0:
                # trivial group
                factors = (1,)
            R = IntMatrix.diagonal(factors)
            for lam in subgroup_lattices(factors):
                check(R, N, lam)

    infinite = [IntMatrix.zeros(0, 1), IntMatrix.zeros(0, 2),
                IntMatrix.zeros(0, 3)]
    infinite.extend(IntMatrix.from_rows([[0, c]])
                    for c in range(1, max_cyclic + 1))
    for R in infinite:
        t_A = FGAbelian.from_relation_matrix(R).torsion()
        for d in range(1, max_index + 1):
            for lam in sublattices(R.cols, d):
                check(R, t_A, lam)

    logging.info(f"{report.name}: {report.hypotheses_met} subgroup pairs, "
                 f"{len(report.violations)} violations")

    return report

def stacked_quotient(A:IntMatrix, n:int,
                     prime:Optional[int] = None) -> FGAbelian:
    """ coker of [A; n·I], the exponent quotient computed from relations """
    return FGAbelian.from_relation_matrix(
        A.vstack(IntMatrix.identity(A.cols).scale(n)), prime)
