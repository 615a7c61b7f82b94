#! /usr/bin/env python

from __future__ import annotations
from dataclasses import dataclass, field, replace
from fractions import Fraction
import logging
from typing import Any, Callable, Optional, Sequence

import numpy as np
from sympy import isprime
from typing_extensions import Self

from torsiongrowth.core.abelian import FGAbelian, GrowthFunction
from torsiongrowth.core.cosets import (CosetTable, SearchBudget, find_S,
                                       index_log, subgroup_abelianization)
from torsiongrowth.core.freewords import PowerWord, Word, magnus_vector
from torsiongrowth.core.linalg import p_valuation
from torsiongrowth.core.utils import TorsionGrowthError
from torsiongrowth.core.zgmod import (build_K_n, find_perturbation,
                                      relation_module, span_submodule)


class CertificationFailed(TorsionGrowthError):
    pass

class HypothesisUnmet(TorsionGrowthError):
    pass


@dataclass(frozen=True)
class DeficiencyResult:
    value: Fraction
    bound: Fraction
    ok: bool


def deficiency_check(a_list:Sequence[int], p:int,
                     b_list:Optional[Sequence[int]] = None
                     ) -> DeficiencyResult:
    """ Σ_j (p^-a_j + p^-b_j) in exact rationals, and whether it is < 1.

    The construction uses b_j = a_j. The bound 2/(p^2 (p-1)) is what the
    sum stays below whenever a_j >= j + 2.

    :param a_list: exponents of the first relator family
    :type a_list: Sequence[int]
    :param p: prime
    :type p: int
    :param b_list: exponents of the second relator family
    :type b_list: Optional[Sequence[int]]
    :rtype: DeficiencyResult
    """
    b_list = a_list if b_list is None else b_list
    if len(a_list) != len(b_list):
        raise ValueError("Exponent lists differ in length")

    value = sum((Fraction(1, p ** a) + Fraction(1, p ** b)
                 for a, b in zip(a_list, b_list)), Fraction(0))

    return DeficiencyResult(value, Fraction(2, p * p * (p - 1)), value < 1)


@dataclass
class ConstructionState:
    """ State of the inductive construction after step i.

    Level k (0 <= k <= i) holds the coset table of F_k in F, the
    relators r_k and w_k, and the certified log_p t_p(H_k^ab) with
    H_k = F_k / N_k. Lists indexed by steps (``u_list``, ``a_list``,
    ...) hold entry k - 1 for step k.
    """
    p: int
    growth: GrowthFunction
    i: int = 0
    tables: list[CosetTable] = field(default_factory=list)
    q_list: list[int] = field(default_factory=list)
    r_list: list[PowerWord] = field(default_factory=list)
    w_list: list[PowerWord] = field(default_factory=list)
    u_list: list[Word] = field(default_factory=list)
    v_list: list[Word] = field(default_factory=list)
    a_list: list[int] = field(default_factory=list)
    t_log: list[int] = field(default_factory=list)
    records: list[dict[str, Any]] = field(default_factory=list)

    @property
    def table(self) -> CosetTable:
        return self.tables[-1]

    @property
    def r(self) -> PowerWord:
        return self.r_list[-1]

    @property
    def w(self) -> PowerWord:
        return self.w_list[-1]

    @property
    def q(self) -> int:
        return self.q_list[-1]

    def relators(self, level:Optional[int] = None) -> tuple[PowerWord, ...]:
        k = self.i if level is None else level
        return tuple(r for r in (self.r_list[k], self.w_list[k])
                     if not r.is_identity())

    def to_json(self) -> dict[str, Any]:
        return {"p": self.p,
                "growth": self.growth.to_json(),
                "i": self.i,
                "tables": [t.to_json() for t in self.tables],
                "q_list": self.q_list,
                "r_list": [r.to_json() for r in self.r_list],
                "w_list": [w.to_json() for w in self.w_list],
                "u_list": [str(u) for u in self.u_list],
                "v_list": [str(v) for v in self.v_list],
                "a_list": self.a_list,
                "t_log": self.t_log,
                "records": self.records}

    @classmethod
    def from_json(cls, data:dict[str, Any]) -> Self:
        state = cls(p = int(data["p"]),
                    growth = GrowthFunction.from_json(data["growth"]),
                    i = int(data["i"]),
                    tables = [CosetTable.from_json(t)
                              for t in data["tables"]],
                    q_list = [int(q) for q in data["q_list"]],
                    r_list = [PowerWord.from_json(r)
                              for r in data["r_list"]],
                    w_list = [PowerWord.from_json(w)
                              for w in data["w_list"]],
                    u_list = [Word.parse(u) for u in data["u_list"]],
                    v_list = [Word.parse(v) for v in data["v_list"]],
                    a_list = [int(a) for a in data["a_list"]],
                    t_log = [int(t) for t in data["t_log"]],
                    records = list(data["records"]))
        state.validate()

        return state

    def validate(self) -> None:
        """ Check the structural invariants of the state

        :raises ValueError: on the first violated invariant
        """
        i = self.i
        if not all(len(x) == i + 1 for x in (self.tables, self.q_list,
                                             self.r_list, self.w_list,
                                             self.t_log)) \
                or not all(len(x) == i for x in (self.u_list, self.v_list,
                                                 self.a_list)):
            raise ValueError(f"State lists do not match step {i}")

        for k in range(1, i + 1):
            a = self.a_list[k - 1]
            if a < 3 or a < k + 2 \
                    or (k > 1 and a <= self.a_list[k - 2]):
                raise ValueError(f"Exponent a_{k} = {a} violates the "
                                 "exponent rule")
            factor = PowerWord.power(self.u_list[k - 1], self.p ** a)
            if self.r_list[k - 1] * factor != self.r_list[k]:
                raise ValueError(f"r_{k} is not r_{k - 1}·u_{k}^(p^a_{k})")
            factor = PowerWord.power(self.v_list[k - 1], self.p ** a)
            if self.w_list[k - 1] * factor != self.w_list[k]:
                raise ValueError(f"w_{k} is not w_{k - 1}·v_{k}^(p^a_{k})")
            table = self.tables[k]
            if table.walk(0, self.r_list[k]) != 0 \
                    or table.walk(0, self.w_list[k]) != 0:
                raise ValueError(f"Relators of level {k} are not in F_{k}")
            if self.t_log[k] <= self.growth(self.q_list[k]):
                raise ValueError(f"Level {k} torsion does not exceed the "
                                 "growth threshold")


def init(p:int, growth:GrowthFunction) -> ConstructionState:
    """ Level 0: F_0 = F and r_0 = w_0 = 1

    :rtype: ConstructionState
    """
    if not isprime(p):
        raise ValueError(f"{p} is not a prime")

    return ConstructionState(p, growth,
                             tables = [CosetTable.trivial()],
                             q_list = [0],
                             r_list = [PowerWord()],
                             w_list = [PowerWord()],
                             t_log = [0])


def _certify(condition:bool, message:str, anchor:str,
             details:Optional[dict[str, Any]] = None) -> None:
    if not condition:
        raise CertificationFailed(message, anchor=anchor, details=details)

def step(state:ConstructionState, budget:SearchBudget = SearchBudget(),
         rng:Optional[np.random.Generator] = None,
         parallel:bool = False) -> ConstructionState:
    """ One step of the inductive construction.

    Finds S < H_(i-1), takes F_i as its preimage, perturbs r_(i-1) and
    w_(i-1) inside the relation module of F_i, and certifies that the
    torsion of H_i^ab exceeds p^f(q_i).

    :param state: state after step i - 1
    :type state: ConstructionState
    :param budget: subgroup search budget
    :type budget: SearchBudget
    :param rng: generator for the d-generation guard
    :type rng: Optional[np.random.Generator]
    :param parallel: evaluate search candidates concurrently
    :type parallel: bool
    :rtype: ConstructionState
    :raises SearchExhausted: if no subgroup S is found in budget
    :raises NoWitness: if the perturbation lemma has no witness
    :raises CertificationFailed: if a certified quantity is off
    """
    rng = np.random.default_rng(0) if rng is None else rng
    p, f = state.p, state.growth
    i = state.i + 1
    r_prev, w_prev = state.r, state.w

    # the subgroup S and F_i
    found = find_S(state.relators(), state.table, p, budget, parallel)
    table = replace(found.table, relators=tuple(), subgroup_gens=tuple())
    q = index_log(table.count, p)
    _certify(q is not None, f"Index {table.count} is not a power of {p}",
             "chain step, |F:F_i| = p^q_i")
    print(f"step {i}: found S of index {p}^{q} "
          f"(abelianization {found.abelianization})")

    # relation module and perturbation
    rm = relation_module(table, r_prev, w_prev)
    M, ms = rm.module, rm.m
    witness = find_perturbation(M, ms, p, rng)
    u, v = rm.lift(witness.h[0]), rm.lift(witness.h[1])
    hom = M.group
    _certify(magnus_vector(u, hom) == witness.h[0]
             and magnus_vector(v, hom) == witness.h[1],
             "Lifted words do not map onto h", "chain step, u_i, v_i")

    # exponent rule
    N = witness.j + f(q) + 1
    a_prev = state.a_list[-1] if len(state.a_list) > 0 else 0
    a = max(N + 1, a_prev + 1, state.t_log[-1] + 1, 3, i + 2)
    r = r_prev * PowerWord.power(u, p ** a)
    w = w_prev * PowerWord.power(v, p ** a)
    logging.debug(f"step {i}: j = {witness.j}, N = {N}, a = {a}")

    # K_a by the perturbation route and by the Magnus images of r_i, w_i
    K_n = build_K_n(M, ms, witness, a)
    K = span_submodule(M, [magnus_vector(r, hom), magnus_vector(w, hom)])
    _certify(K == K_n.lattice, "The two routes to K_a_i disagree",
             "chain step, K_a_i = N_i[F_i,F_i]")
    _certify(K_n.contains_pnz and K_n.below_U_pnV,
             "K_n containments fail", "perturbation lemma, K_n")

    t_p = K_n.t_p
    H_ab = subgroup_abelianization(table, (r, w), p)
    _certify(H_ab.p_torsion(p) == t_p,
             "Reidemeister-Schreier torsion differs from M/K",
             "chain step, t_p(H_i^ab)",
             {"rewriting": str(H_ab), "module": str(K_n.quotient)})
    t_log = p_valuation(t_p, p)

    # P1, P2 and the deficiency inequality
    _certify(t_log > f(q), f"t_p(H_{i}^ab) = {p}^{t_log} does not exceed "
             f"{p}^{f(q)}", "chain step, P1",
             {"t_p_log": t_log, "f_q": f(q)})
    _certify(r_prev.inverse() * r == PowerWord.power(u, p ** a)
             and w_prev.inverse() * w == PowerWord.power(v, p ** a),
             "r_i is not r_(i-1)·u_i^(p^a_i)", "chain step, P2")
    _certify(a > a_prev and a > state.t_log[-1],
             f"a_{i} = {a} violates the exponent rule",
             "chain step, P2")
    a_list = state.a_list + [a]
    deficiency = deficiency_check(a_list, p)
    _certify(deficiency.ok, f"Deficiency sum {deficiency.value} is not < 1",
             "deficiency inequality")

    record = {"i": i,
              "q_i": q,
              "index": table.count,
              "a_i": a,
              "j": witness.j,
              "f_q": f(q),
              "t_p_log": t_log,
              "H_ab": str(H_ab),
              "u_i": str(u),
              "v_i": str(v),
              "search_depth": found.depth,
              "refinement_m": found.m,
              "deficiency_sum": str(deficiency.value),
              "congruence_ok": None,
              "gamma_bound_log": None}
    print(f"step {i}: a_{i} = {a}, t_p(H_{i}^ab) = {p}^{t_log} > "
          f"{p}^{f(q)}")

    return replace(state,
                   i = i,
                   tables = state.tables + [table],
                   q_list = state.q_list + [q],
                   r_list = state.r_list + [r],
                   w_list = state.w_list + [w],
                   u_list = state.u_list + [u],
                   v_list = state.v_list + [v],
                   a_list = a_list,
                   t_log = state.t_log + [t_log],
                   records = [dict(rec) for rec in state.records] + [record])


@dataclass(frozen=True)
class CongruenceResult:
    i: int
    ok: bool
    exponent: int
    failures: tuple[str, ...] = tuple()


def cauchy_congruence_check(state:ConstructionState,
                            i:int) -> CongruenceResult:
    """ Whether the tails r_(i+1)·r_i^-1 and w_(i+1)·w_i^-1 map into
        p^a_(i+1)·M_i, M_i the relation module of F_i.

    :rtype: CongruenceResult
    :raises ValueError: if step i + 1 has not been run
    """
    if i < 1 or i + 1 > state.i:
        raise ValueError(f"Congruence at level {i} needs steps {i} and "
                         f"{i + 1}; the run has {state.i} steps")

    table = state.tables[i]
    M = relation_module(table).module
    q = state.p ** state.a_list[i]
    failures = list()
    for name, seq in (("r", state.r_list), ("w", state.w_list)):
        tail = seq[i + 1] * seq[i].inverse()
        image = magnus_vector(tail, M.group)
        if any(x % q != 0 for x in image) \
                or not M.contains([x // q for x in image]):
            failures.append(name)

    return CongruenceResult(i, len(failures) <= 0, state.a_list[i],
                            tuple(failures))


@dataclass(frozen=True)
class GammaCertificate:
    """ Chain of checked inferences bounding t(Γ_i^ab) from below """
    i: int
    p: int
    t_p_log: int
    a_next: int
    f_q: int
    shadow: FGAbelian
    congruence: bool
    exponent_quotients_agree: bool
    transfer: bool

    @property
    def n_greater_k(self) -> bool:
        return self.a_next > self.t_p_log

    @property
    def bound_log(self) -> int:
        return self.t_p_log

    def to_dict(self) -> dict[str, Any]:
        return {"i": self.i,
                "t_p_log": self.t_p_log,
                "a_next": self.a_next,
                "f_q": self.f_q,
                "shadow": str(self.shadow),
                "hypotheses": {"congruence": self.congruence,
                               "n_greater_k": self.n_greater_k,
                               "exponent_quotients_agree":
                                   self.exponent_quotients_agree,
                               "transfer": self.transfer},
                "conclusion": (f"t(Gamma_{self.i}^ab) >= {self.p}^"
                               f"{self.t_p_log} > {self.p}^{self.f_q}")}


def gamma_certificate(state:ConstructionState, i:int,
                      congruence:Optional[CongruenceResult] = None
                      ) -> GammaCertificate:
    """ Lower bound on the torsion of Γ_i^ab.

    Γ_i^ab and H_i^ab agree modulo p^a_(i+1), and a_(i+1) exceeds
    log_p t_p(H_i^ab), so the torsion lemma transfers the bound. The
    same transfer is checked at finite level on the quotient of F_i by
    r_(i+1), w_(i+1) and [F_i,F_i].

    :rtype: GammaCertificate
    :raises HypothesisUnmet: if the congruence was not established or
        a_(i+1) is too small
    :raises CertificationFailed: if the finite-level transfer fails
    """
    if congruence is None or congruence.i != i or not congruence.ok:
        raise HypothesisUnmet(f"Congruence at level {i} not established",
                              anchor="completion congruence")

    p = state.p
    k, a = state.t_log[i], state.a_list[i]
    if a <= k:
        raise HypothesisUnmet(f"a_{i + 1} = {a} does not exceed "
                              f"log_p t_p(H_{i}^ab) = {k}",
                              anchor="torsion transfer, n > k")

    table = state.tables[i]
    A = subgroup_abelianization(table, state.relators(i), p)
    B = subgroup_abelianization(table, state.relators(i + 1), p)
    agree = A.exponent_quotient(p ** a) == B.exponent_quotient(p ** a)
    transfer = B.p_torsion(p) >= A.p_torsion(p)
    _certify(agree, "Exponent quotients of consecutive levels differ",
             "completion congruence", {"A": str(A), "B": str(B)})
    _certify(transfer, "Finite-level transfer of the torsion bound fails",
             "torsion transfer", {"A": str(A), "B": str(B)})

    return GammaCertificate(i, p, k, a, state.growth(state.q_list[i]), B,
                            congruence.ok, agree, transfer)


def run_construction(state:ConstructionState, steps:int,
                     budget:SearchBudget = SearchBudget(),
                     rng:Optional[np.random.Generator] = None,
                     parallel:bool = False,
                     on_step:Optional[Callable[[ConstructionState], None]]
                     = None) -> ConstructionState:
    """ Run steps until ``state.i`` reaches ``steps``, filling in the
        congruence and Γ-certificate of each level once the next level
        exists.

    :param on_step: called with every completed state
    :type on_step: Optional[Callable[[ConstructionState], None]]
    :rtype: ConstructionState
    """
    rng = np.random.default_rng(0) if rng is None else rng
    while state.i < steps:
        state = step(state, budget, rng, parallel)
        if state.i >= 2:
            k = state.i - 1
            congruence = cauchy_congruence_check(state, k)
            record = state.records[k - 1]
            record["congruence_ok"] = congruence.ok
            certificate = gamma_certificate(state, k, congruence)
            record["gamma_bound_log"] = certificate.bound_log
            record["gamma_certificate"] = certificate.to_dict()
            print(f"level {k}: {certificate.to_dict()['conclusion']}")
        if on_step is not None:
            on_step(state)

    return state
