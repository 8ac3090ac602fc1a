"""Command-line front end.

Exit codes: 0 for ACCEPT (or a positive check), 1 for REJECT (or a negative
check), 2 for usage and input errors.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass

from . import minionlab as ml
from . import polymorph as pm
from .acceptance import DEFAULT_SEED, run_all
from .exactmath import dump_lp, dump_system
from .propagation import ACCEPT, REJECT, Decision, clap_accepts, cblp_accepts, sblp_domains
from .relaxations import BlpSkeleton, Counters, aip_accepts, blp_accepts
from .structures import StructureError, find_homomorphism, load_structure, load_template

ALGORITHMS = ("brute", "blp", "aip", "blp-aip", "sblp", "cblp", "clap")


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    algorithm: str
    verdict: str
    blp_calls: int
    aip_calls: int
    seconds: float
    trace_path: str | None = None

    def line(self) -> str:
        out = f"{self.verdict} algorithm={self.algorithm} blp_calls={self.blp_calls} aip_calls={self.aip_calls} time={self.seconds:.3f}s"
        if self.trace_path:
            out += f" trace={self.trace_path}"
        return out


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def run_check(template_path: str, instance_path: str, algorithm: str, trace: str | None = None,
              jobs: int = 1, dump: str | None = None) -> RunReport:
    T = load_template(template_path)
    X = load_structure(instance_path).conform(T.A.signature)
    A = T.A
    c = Counters()
    t0 = time.perf_counter()
    decision: Decision | None = None
    if algorithm == "brute":
        ok = find_homomorphism(X, A) is not None
    elif algorithm == "blp":
        ok = blp_accepts(X, A, c)
    elif algorithm == "aip":
        ok = aip_accepts(X, A, c)
    elif algorithm == "blp-aip":
        ok = BlpSkeleton(X, A).blp_aip(counters=c)
    elif algorithm == "sblp":
        events: list = []
        ok = all(sblp_domains(X, A, c, events).values())
        decision = Decision(ACCEPT if ok else REJECT, events)
    elif algorithm == "cblp":
        decision = cblp_accepts(X, A, c, mode="jacobi" if jobs > 1 else "sequential", jobs=jobs)
        ok = decision.accepted
    elif algorithm == "clap":
        decision = clap_accepts(X, A, c, mode="jacobi" if jobs > 1 else "sequential", jobs=jobs)
        ok = decision.accepted
    else:
        raise UsageError(f"unknown algorithm {algorithm!r}")
    dt = time.perf_counter() - t0
    if trace:
        with open(trace, "w", encoding="utf-8") as fh:
            fh.write(decision.trace_text() if decision else "")
            if decision and not decision.accepted and decision.stage:
                fh.write(f"REJECT stage={decision.stage}\n")
    if dump:
        sk = BlpSkeleton(X, A)
        with open(dump, "w", encoding="utf-8") as fh:
            fh.write(dump_lp(sk.lp(), label=_label))
            fh.write(dump_system(sk.aip(), label=_label))
    return RunReport(algorithm, ACCEPT if ok else REJECT, c.blp, c.aip, dt, trace)


def _label(lab) -> str:
    sym, xi, ai = lab
    return f"{sym}:{xi}:{ai}"


def _cmd_check(args) -> int:
    rep = run_check(args.template, args.instance, args.algorithm, args.trace, args.jobs, args.dump_lp)
    print(rep.line())
    return 0 if rep.verdict == ACCEPT else 1


def _cmd_poly_check(args) -> int:
    f = pm.parse_function(_read(args.function))
    T = load_template(args.template)
    bad = pm.polymorphism_counterexample(f, T.A, T.B, args.budget)
    if bad is None:
        print("YES polymorphism")
        return 0
    sym, rows = bad
    print(f"NO relation {sym} rows {' | '.join(' '.join(map(str, r)) for r in rows)}")
    return 1


def _cmd_poly_hsym(args) -> int:
    f = pm.parse_function(_read(args.function))
    H = pm.parse_tie_matrix(_read(args.tie_matrix))
    if f.n ** f.L > args.budget:
        raise UsageError(f"table of {f.n}^{f.L} entries exceeds budget {args.budget}")
    bad = pm.h_symmetry_counterexample(f, H)
    if bad is None:
        print("YES H-symmetric")
        return 0
    print("NO input " + " ".join(map(str, bad)))
    return 1


def _cmd_poly_gen(args) -> int:
    f = pm.example_polymorphism(args.arity, args.budget)
    text = pm.serialize_function(f, f"example{args.arity}")
    _emit(text, args.output)
    return 0


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_tiebreak(args) -> int:
    H = pm.parse_tie_matrix(_read(args.tie_matrix))
    Ms = [ml.parse_element(_read(p)).M for p in args.elements]
    res = ml.tiebreak(Ms, H)
    print("v " + " ".join(str(x) for x in res.v))
    print(f"steps {res.steps} initial_ties {res.initial_ties}")
    return 0


def _parse_map(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--pi expects comma-separated integers, got {text!r}") from None


def _cmd_minor(args) -> int:
    el = ml.parse_element(_read(args.element))
    pi = _parse_map(args.pi)
    target = args.target if args.target is not None else max(pi) + 1
    out = ml.minor(el, ml.MinorMap(pi, target))
    _emit(ml.serialize_element(out), args.output)
    return 0


def _cmd_reproduce(args) -> int:
    only = [int(x) for x in args.only.split(",")] if args.only else None
    print(f"seed {args.seed}")
    results = run_all(args.seed, only, echo=print)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clapkit", description="Exact PCSP relaxations and polymorphism tools.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="decide an instance against a template")
    c.add_argument("template")
    c.add_argument("instance")
    c.add_argument("--algorithm", choices=ALGORITHMS, default="clap")
    c.add_argument("--trace", metavar="PATH", help="write REMOVE/CERT events here")
    c.add_argument("--jobs", type=int, default=1, help="parallel pinned-LP tests per sweep")
    c.add_argument("--dump-lp", metavar="PATH", help="write the BLP and AIP systems in text form")
    c.set_defaults(func=_cmd_check)

    poly = sub.add_parser("poly", help="polymorphism tools").add_subparsers(dest="poly_cmd", required=True)
    pc = poly.add_parser("check", help="is the function a polymorphism of the template")
    pc.add_argument("function")
    pc.add_argument("template")
    pc.add_argument("--budget", type=int, default=pm.DEFAULT_BUDGET)
    pc.set_defaults(func=_cmd_poly_check)
    ph = poly.add_parser("hsym", help="is the function H-symmetric")
    ph.add_argument("function")
    ph.add_argument("tie_matrix")
    ph.add_argument("--budget", type=int, default=pm.DEFAULT_BUDGET)
    ph.set_defaults(func=_cmd_poly_hsym)
    pg = poly.add_parser("gen-example", help="write the example H-symmetric polymorphism")
    pg.add_argument("--arity", type=int, required=True)
    pg.add_argument("--budget", type=int, default=pm.DEFAULT_BUDGET)
    pg.add_argument("-o", "--output")
    pg.set_defaults(func=_cmd_poly_gen)

    mn = sub.add_parser("minion", help="minion element tools").add_subparsers(dest="minion_cmd", required=True)
    mt = mn.add_parser("tiebreak", help="tie-breaking vector for skeletal matrices")
    mt.add_argument("tie_matrix")
    mt.add_argument("elements", nargs="+", help="minion element files whose matrices are used")
    mt.set_defaults(func=_cmd_tiebreak)
    mm = mn.add_parser("minor", help="apply a minor map to an element")
    mm.add_argument("element")
    mm.add_argument("--pi", required=True, help="0-based images, e.g. 0,0,1")
    mm.add_argument("--target", type=int, help="arity of the result (default: max image + 1)")
    mm.add_argument("-o", "--output")
    mm.set_defaults(func=_cmd_minor)

    r = sub.add_parser("reproduce", help="run the acceptance experiments")
    r.add_argument("--seed", type=int, default=DEFAULT_SEED)
    r.add_argument("--only", help="comma-separated criterion numbers")
    r.set_defaults(func=_cmd_reproduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (StructureError, UsageError, ml.MinionError, pm.BudgetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
