#!/usr/bin/env python

import argparse
from dataclasses import asdict, dataclass, field
import importlib.metadata
import json
import logging
from multiprocessing import cpu_count
from os import access, getcwd, R_OK
from os.path import isdir, isfile, relpath
from pathlib import Path
import sys
from typing import Any, Optional, Sequence

from sympy import isprime

from torsiongrowth.core.abelian import (GrowthFunction, check_lemma_L1,
                                        check_prop_el)
from torsiongrowth.core.construct import (ConstructionState, init,
                                          run_construction)
from torsiongrowth.core.cosets import (SearchBudget, subgroup_abelianization,
                                       todd_coxeter)
from torsiongrowth.core.freewords import Word
from torsiongrowth.core.lielattice import (D8, Q8, LieLattice,
                                           check_padic_bound,
                                           check_prop_AB,
                                           check_prop_G1_suite, scale,
                                           uniform_torsion_identity)
from torsiongrowth.core.linalg import STRATEGIES, IntMatrix, snf
from torsiongrowth.core.utils import (TorsionGrowthError, growthArg,
                                      load_config, positiveIntArg, primeArg,
                                      read_version, rng_set_seed)
from torsiongrowth.core.zgmod import ZGLattice, build_K_n, find_perturbation
from torsiongrowth.data.report import build_report, render_tsv
from torsiongrowth.data.utils import (MalformedInput, mkfile, read_json,
                                      read_matrix, write_json)

__package__ = "torsiongrowth"
try:
    __version__ = importlib.metadata.version(__package__)
except importlib.metadata.PackageNotFoundError:
    __version__ = read_version(str(Path(__file__).parent.parent
                                   / "pyproject.toml"))

OUTPUT_EXT = ".json"


@dataclass
class RunConfig:
    """ Resolved parameters of one run; recorded in every report """
    command: str
    seed: int = 0
    parallel: bool = False
    p: Optional[int] = None
    growth: Optional[dict[str, int]] = None
    steps: Optional[int] = None
    budget: Optional[dict[str, int]] = None
    input: Optional[str] = None
    output: Optional[str] = None
    options: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.p is not None and not isprime(self.p):
            raise ValueError(f"{self.p} is not a prime")
        if self.budget is not None and min(self.budget.values()) <= 0:
            raise ValueError("Budgets must be positive")

    def to_dict(self) -> dict[str, Any]:
        """ Paths are recorded relative to the working directory """
        out = asdict(self)
        for key in ("input", "output"):
            if out[key] is not None:
                out[key] = relpath(out[key])

        return out


def setup_logger(verbose:bool) -> None:
    """ Setup logger

    :param verbose: print debug messages
    :type verbose: bool
    :rtype: None
    """
    level = logging.DEBUG if verbose else logging.ERROR
    logging.basicConfig(format='%(levelname)s:%(message)s', level=level)

def output_path(args:argparse.Namespace, basename:str) -> Optional[Path]:
    """ Where to write the report, or None on a dry run """
    if args.dry_run:
        return None
    if isdir(args.output):
        return mkfile(args.output, basename, OUTPUT_EXT)

    return Path(args.output)

def check_input(filename:str) -> None:
    if not isfile(filename):
        raise MalformedInput(f"Input path not found: {filename}",
                             anchor="input path")
    if not access(filename, R_OK):
        raise MalformedInput(f"Input path not readable: {filename}",
                             anchor="input path")

def emit(args:argparse.Namespace, basename:str,
         report:dict[str, Any]) -> None:
    path = output_path(args, basename)
    if path is not None:
        write_json(path, report)
        print(f"writing output to {path}")

def words(text:str) -> tuple[Word, ...]:
    return tuple(Word.parse(w) for w in text.split(',') if len(w.strip()) > 0)


def cmd_snf(args:argparse.Namespace, config:RunConfig) -> int:
    check_input(args.input)
    A = read_matrix(args.input)
    sf = snf(A, strategy=args.strategy)
    factors = ",".join(str(d) for d in sf.invariant_factors)
    print("invariant_factors\trank\tfree_rank")
    print(f"{factors if len(factors) > 0 else '-'}\t{sf.rank}\t"
          f"{A.cols - sf.rank}")

    return 0

def cmd_abelian_verify(args:argparse.Namespace, config:RunConfig) -> int:
    suites = list()
    if args.suite in ("L1", "all"):
        for part in (1, 2):
            print(f"running torsion lemma part {part}")
            suites.append(check_lemma_L1(part, args.p, args.max_exp,
                                         args.max_rank))
    if args.suite in ("el", "all"):
        print("running subgroup index bound")
        suites.append(check_prop_el(args.max_order))

    for suite in suites:
        print(f"{suite.name}\t{suite.hypotheses_met}\t"
              f"{len(suite.violations)}")
    emit(args, "abelian", {"config": config.to_dict(),
                           "suites": [s.to_dict() for s in suites]})

    return 0 if all(s.passed for s in suites) else 1

def cmd_subgroup_ab(args:argparse.Namespace, config:RunConfig) -> int:
    relators = words(args.relators)
    table = todd_coxeter(relators, words(args.subgroup), args.max_cosets)
    A = subgroup_abelianization(table, relators, args.prime)
    print(f"index\t{table.count}")
    print(f"abelianization\t{A}")

    return 0

def cmd_perturb(args:argparse.Namespace, config:RunConfig) -> int:
    check_input(args.input)
    data = read_json(args.input)
    try:
        M = ZGLattice.from_json(data["module"])
        ms = [tuple(int(a) for a in m) for m in data["m"]]
        p = int(data.get("p", args.p or 2))
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedInput(f"Malformed perturbation instance: {e}",
                             anchor="perturb input")

    witness = find_perturbation(M, ms, p, args.rng)
    print(f"witness: j = {witness.j}, z = {list(witness.z)}")
    print("n\tt_p\tcontains_pnz\tbelow_U_pnV")
    rows = list()
    ok = True
    for n in range(1, args.n_max + 1):
        K = build_K_n(M, ms, witness, n)
        rows.append(K.to_dict())
        c = n - witness.j - 1
        ok &= K.contains_pnz and K.below_U_pnV \
            and (c < 1 or K.t_p >= p ** c)
        print(f"{n}\t{K.t_p}\t{K.contains_pnz}\t{K.below_U_pnV}")

    emit(args, "perturb", {"config": config.to_dict(),
                           "witness": witness.to_json(),
                           "K_n": rows,
                           "passed": ok})

    return 0 if ok else 1

def cmd_construct_run(args:argparse.Namespace, config:RunConfig) -> int:
    budget = SearchBudget(args.budget_cosets, args.budget_depth,
                          args.budget_candidates)
    if args.resume is not None:
        check_input(args.resume)
        report = read_json(args.resume)
        try:
            state = ConstructionState.from_json(report["state"])
        except (KeyError, TypeError, ValueError) as e:
            raise MalformedInput(f"Cannot resume from {args.resume}: {e}",
                                 anchor="construct resume")
        print(f"resuming at step {state.i}")
    else:
        state = init(args.p, GrowthFunction(args.growth))

    # keep the last completed level for the report, even on failure
    done = [state]
    error = None
    try:
        run_construction(state, args.steps, budget, args.rng,
                         args.parallel, on_step=done.append)
    except TorsionGrowthError as e:
        error = e.to_record()
        raise
    finally:
        report = build_report(done[-1], config.to_dict(), error)
        emit(args, "construct", report)
        print(render_tsv(report), end="")

    return 0

def cmd_lie_verify(args:argparse.Namespace, config:RunConfig) -> int:
    results = dict()
    ok = True
    if args.input is not None:
        check_input(args.input)
        try:
            data = read_json(args.input)
            L = LieLattice.from_json(data)
            subalgebras = [IntMatrix.from_rows(rows, cols=L.rank)
                           for rows in data.get("sublattices", list())]
        except (KeyError, TypeError, ValueError) as e:
            raise MalformedInput(f"Malformed Lie lattice: {e}",
                                 anchor="lie input")

        print("n\tdirect\tvia_quotient\tvia_index\tbound")
        rows = list()
        for n in range(args.n_max + 1):
            t = uniform_torsion_identity(L, n)
            padic = check_padic_bound(L, scale(L, n))
            ok &= t.ok and padic.ok
            rows.append(t.to_dict() | {"padic": padic.to_dict()})
            print(f"{n}\t{t.direct}\t{t.via_quotient}\t{t.via_index}\t"
                  f"{t.bound}")
        results["uniform"] = rows

        if len(subalgebras) > 0:
            print("sublattice\tindex\ttorsion\tbound")
        checks = list()
        for k, H in enumerate(subalgebras):
            try:
                padic = check_padic_bound(L, H)
            except ValueError as e:
                raise MalformedInput(f"Sublattice {k}: {e}",
                                     anchor="lie input")
            ok &= padic.ok
            checks.append(padic.to_dict())
            print(f"{k}\t{padic.index}\t{padic.torsion}\t{padic.bound}")
        results["sublattices"] = checks

    suites = [check_prop_G1_suite(args.g1_count, args.primes, args.rng),
              check_prop_AB(Q8, "prop_AB_Q8"),
              check_prop_AB(D8, "prop_AB_D8")]
    for suite in suites:
        ok &= suite.passed
        print(f"{suite.name}\t{suite.checked}\t{len(suite.violations)}")
    results["suites"] = [s.to_dict() for s in suites]

    emit(args, "lie", {"config": config.to_dict()} | results)

    return 0 if ok else 1

def cmd_render(args:argparse.Namespace, config:RunConfig) -> int:
    check_input(args.input)
    print(render_tsv(read_json(args.input)), end="")

    return 0


def build_parser() -> tuple[argparse.ArgumentParser,
                            list[argparse.ArgumentParser]]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with default values "
                        + "for any of the flags.", type=str, default=None)
    common.add_argument("-o", "--output", "--out", help="Path to write the "
                        + "JSON report to.", type=str, default=getcwd())
    common.add_argument("--seed", help="Set the seed for the random number "
                        + "generator.", type=int, default=0)
    common.add_argument("--parallel", help="Speed up the subgroup search by "
                        + "distributing candidates across multiple CPU cores",
                        action="store_true")
    common.add_argument("--dry_run", "--dry-run", help="Dry run without "
                        + "saving results.", action="store_true")
    common.add_argument("--verbose", "-v", help="Print debug messages and "
                        " warnings", action="store_true")

    parser = argparse.ArgumentParser(prog=__package__)
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s v{__version__}")
    commands = parser.add_subparsers(dest="command", required=True)
    leaves = list()

    sp = commands.add_parser("snf", parents=[common], help="Smith normal "
                             + "form of a matrix file.")
    sp.add_argument("input", help="Matrix file: 'rows cols' followed by "
                    + "the entries in row-major order.")
    sp.add_argument("--strategy", help="Pivot strategy.",
                    choices=STRATEGIES, default="min_abs")
    sp.set_defaults(func=cmd_snf)
    leaves.append(sp)

    sp = commands.add_parser("abelian", help="Torsion lemmas on abelian "
                             + "groups.")
    sub = sp.add_subparsers(dest="action", required=True)
    sp = sub.add_parser("verify", parents=[common], help="Run the "
                        + "exhaustive abelian suites.")
    sp.add_argument("--p", help="Prime spanning the family; may be given "
                    + "more than once.", type=primeArg, action="append",
                    default=None)
    sp.add_argument("--max-exp", "--max_exp", help="Largest exponent of a "
                    + "cyclic prime-power factor.", type=positiveIntArg,
                    default=4)
    sp.add_argument("--max-rank", "--max_rank", help="Largest free rank.",
                    type=int, default=2)
    sp.add_argument("--max-order", "--max_order", help="Largest order of a "
                    + "finite group in the subgroup index suite.",
                    type=positiveIntArg, default=64)
    sp.add_argument("--suite", help="Which suites to run.",
                    choices=["L1", "el", "all"], default="all")
    sp.set_defaults(func=cmd_abelian_verify)
    leaves.append(sp)

    sp = commands.add_parser("subgroup-ab", parents=[common],
                             help="Abelianization of a finite-index "
                             + "subgroup of a finitely presented group.")
    sp.add_argument("--relators", help="Comma-separated relators, eg "
                    + "'x^2,y^2'.", type=str, default="")
    sp.add_argument("--subgroup", help="Comma-separated subgroup "
                    + "generators.", type=str, default="")
    sp.add_argument("--prime", help="Localize at this prime.",
                    type=primeArg, default=None)
    sp.add_argument("--max-cosets", "--max_cosets", help="Coset "
                    + "enumeration budget.", type=positiveIntArg,
                    default=4096)
    sp.set_defaults(func=cmd_subgroup_ab)
    leaves.append(sp)

    sp = commands.add_parser("perturb", parents=[common], help="Run the "
                             + "perturbation lemma on a module instance.")
    sp.add_argument("input", help="JSON file with 'module', 'm' and 'p'.")
    sp.add_argument("--p", help="Prime, when the instance has none.",
                    type=primeArg, default=None)
    sp.add_argument("--n-max", "--n_max", help="Largest n for K_n.",
                    type=positiveIntArg, default=12)
    sp.set_defaults(func=cmd_perturb)
    leaves.append(sp)

    sp = commands.add_parser("construct", help="Inductive construction.")
    sub = sp.add_subparsers(dest="action", required=True)
    sp = sub.add_parser("run", parents=[common], help="Run or resume the "
                        + "construction.")
    sp.add_argument("--p", help="Prime.", type=primeArg, default=2)
    sp.add_argument("--growth", help="Growth function table as a JSON "
                    + "object, eg '{\"1\": 2}'.", type=growthArg,
                    default={1: 2})
    sp.add_argument("--steps", help="Number of steps.",
                    type=positiveIntArg, default=2)
    sp.add_argument("--budget-cosets", "--budget_cosets", help="Largest "
                    + "index of a candidate subgroup.", type=positiveIntArg,
                    default=256)
    sp.add_argument("--budget-depth", "--budget_depth", help="Deepest "
                    + "descent level of the subgroup search.",
                    type=positiveIntArg, default=3)
    sp.add_argument("--budget-candidates", "--budget_candidates",
                    help="Most candidates examined per search.",
                    type=positiveIntArg, default=64)
    sp.add_argument("--resume", help="Report to resume from.", type=str,
                    default=None)
    sp.set_defaults(func=cmd_construct_run)
    leaves.append(sp)

    sp = commands.add_parser("lie", help="Polynomial torsion bounds.")
    sub = sp.add_subparsers(dest="action", required=True)
    sp = sub.add_parser("verify", parents=[common], help="Run the uniform "
                        + "and finite-group suites.")
    sp.add_argument("input", help="Structure constants as JSON {rank, p, "
                    + "brackets}.", nargs='?', default=None)
    sp.add_argument("--n-max", "--n_max", help="Largest level n.",
                    type=int, default=10)
    sp.add_argument("--g1-count", "--g1_count", help="Number of random "
                    + "module instances.", type=int, default=1000)
    sp.add_argument("--primes", help="Primes of the random instances.",
                    type=primeArg, nargs='+', default=[2, 3, 5])
    sp.set_defaults(func=cmd_lie_verify)
    leaves.append(sp)

    sp = commands.add_parser("render", parents=[common], help="Render a "
                             + "construction report as TSV.")
    sp.add_argument("input", help="Report JSON.")
    sp.set_defaults(func=cmd_render)
    leaves.append(sp)

    return parser, leaves

def run_config(args:argparse.Namespace) -> RunConfig:
    command = " ".join(x for x in (args.command, getattr(args, "action",
                                                         None)) if x)
    budget = None
    if hasattr(args, "budget_cosets"):
        budget = {"max_cosets": args.budget_cosets,
                  "max_depth": args.budget_depth,
                  "max_candidates": args.budget_candidates}
    growth = getattr(args, "growth", None)
    if growth is not None:
        growth = GrowthFunction(growth).to_json()
    p = getattr(args, "p", None)
    known = {"command", "action", "func", "rng", "config", "seed", "parallel",
             "dry_run", "verbose", "output", "input", "p", "growth",
             "steps", "budget_cosets", "budget_depth", "budget_candidates"}

    return RunConfig(command = command,
                     seed = args.seed,
                     parallel = args.parallel,
                     p = p if isinstance(p, int) else None,
                     growth = growth,
                     steps = getattr(args, "steps", None),
                     budget = budget,
                     input = getattr(args, "input", None),
                     output = None if args.dry_run else args.output,
                     options = {k: v for k, v in sorted(vars(args).items())
                                if k not in known}
                     | ({"primes": p} if isinstance(p, list) else {}))

def main(argv:Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, leaves = build_parser()

    # config file values become defaults that explicit flags override
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=str, default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is not None:
        if not isfile(known.config):
            parser.error(f"Config file not found: {known.config}")
        defaults = load_config(known.config)
        for sp in leaves:
            sp.set_defaults(**defaults)

    args = parser.parse_args(argv)
    setup_logger(args.verbose)

    # print user-provided arguments
    logging.debug("Arguments: " + "; ".join(["{}: {}".format(k, v)
                  for k, v in vars(args).items()]))

    if args.command == "abelian":
        if args.p is None:
            args.p = [2, 3]
        elif isinstance(args.p, int):
            args.p = [args.p]
    args.rng = rng_set_seed(args.seed)
    if args.parallel:
        print(f"utilizing {cpu_count()} CPU cores")

    try:
        config = run_config(args)
        return args.func(args, config)
    except TorsionGrowthError as e:
        print(json.dumps(e.to_record(), sort_keys=True))
        return 1

def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()
