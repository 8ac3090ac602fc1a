"""The reproducible acceptance experiments, one function per criterion.

Each criterion returns a :class:`CriterionResult`; ``run_all`` drives them
for the ``reproduce`` command and the test suite.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

from gmpy2 import mpq

from . import minionlab as ml
from . import polymorph as pm
from .exactmath import integer_solve
from .generators import planted_instance, random_instance, small_instances
from .propagation import cblp_fixpoint, clap_accepts, cblp_accepts, sblp_accepts, shuffled_orders
from .relaxations import BlpSkeleton, Counters, aip_accepts, blp_accepts, blp_aip_accepts, prepare
from .structures import UNARY, RelationalStructure, find_homomorphism, load_structure, load_template

DEFAULT_SEED = 20240601


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    violations: list = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:>2}. {self.title}: {self.detail} ({self.seconds:.2f}s)"


def data_path(name: str):
    return resources.files("clapkit") / "data" / name


def _timed(number: int, title: str, body: Callable[[], tuple[bool, str, list]], limit: float | None = None):
    t0 = time.perf_counter()
    ok, detail, viol = body()
    dt = time.perf_counter() - t0
    if limit is not None and dt >= limit:
        ok = False
        detail += f"; runtime {dt:.1f}s over the {limit:.0f}s limit"
    return CriterionResult(number, title, ok, detail, dt, viol)


def templates():
    """(name, A, B) for the two templates used in the random sweeps."""
    ex = pm.example_template()
    ab = pm.one_in_three_nae()
    return [("example", ex.A, ex.B), ("1in3-nae", ab.A, ab.B)]


def _sizes(rng: random.Random, name: str) -> tuple[int, int]:
    if name == "example":
        return rng.randint(3, 6), rng.randint(1, 6)
    return rng.randint(3, 5), rng.randint(1, 4)


ALGORITHMS = ("blp", "aip", "blp-aip", "sblp", "cblp", "clap")


def decide(alg: str, X: RelationalStructure, A: RelationalStructure, B: RelationalStructure | None = None,
           counters: Counters | None = None) -> bool:
    if alg == "brute":
        return find_homomorphism(X, A) is not None
    if alg == "blp":
        return blp_accepts(X, A, counters)
    if alg == "aip":
        return aip_accepts(X, A, counters)
    if alg == "blp-aip":
        return blp_aip_accepts(X, A, counters=counters)
    if alg == "sblp":
        return sblp_accepts(X, A, counters)
    if alg == "cblp":
        return cblp_accepts(X, A, counters).accepted
    if alg == "clap":
        return clap_accepts(X, A, counters).accepted
    raise ValueError(f"unknown algorithm {alg!r}")


# --- independent re-substitution checks ------------------------------------

def blp_point_violations(X: RelationalStructure, A: RelationalStructure, sk: BlpSkeleton, point) -> list[str]:
    """Check a BLP point against the defining equalities, written out directly."""
    X, A = prepare(X, A)
    lam = {sk.labels[j]: point[j] for j in range(sk.num_vars)}
    bad = []
    if any(not 0 <= x <= 1 for x in point):
        bad.append("value outside [0,1]")
    unary = {t[0]: xi for xi, t in enumerate(X[UNARY])}
    ua = {t[0]: ai for ai, t in enumerate(A[UNARY])}
    for sym, k in X.signature.symbols:
        for xi, xt in enumerate(X[sym]):
            if sum((lam[(sym, xi, ai)] for ai in range(len(A[sym]))), mpq(0)) != 1:
                bad.append(f"{sym}:{xi} does not sum to 1")
            for i in range(k):
                for a in range(A.size):
                    lhs = sum((lam[(sym, xi, ai)] for ai, at in enumerate(A[sym]) if at[i] == a), mpq(0))
                    if lhs != lam[(UNARY, unary[xt[i]], ua[a])]:
                        bad.append(f"{sym}:{xi} marginal {i} at {a}")
    return bad


def aip_solution_violations(X: RelationalStructure, A: RelationalStructure, sk: BlpSkeleton, tau) -> list[str]:
    X, A = prepare(X, A)
    val = {sk.labels[j]: tau[j] for j in range(sk.num_vars)}
    bad = []
    if any(int(x) != x for x in tau):
        bad.append("non-integer entry")
    unary = {t[0]: xi for xi, t in enumerate(X[UNARY])}
    ua = {t[0]: ai for ai, t in enumerate(A[UNARY])}
    for sym, k in X.signature.symbols:
        for xi, xt in enumerate(X[sym]):
            if sum(val[(sym, xi, ai)] for ai in range(len(A[sym]))) != 1:
                bad.append(f"{sym}:{xi} does not sum to 1")
            for i in range(k):
                for a in range(A.size):
                    lhs = sum(val[(sym, xi, ai)] for ai, at in enumerate(A[sym]) if at[i] == a)
                    if lhs != val[(UNARY, unary[xt[i]], ua[a])]:
                        bad.append(f"{sym}:{xi} marginal {i} at {a}")
    return bad


# --- criteria ----------------------------------------------------------------

def criterion_1(seed: int = DEFAULT_SEED) -> CriterionResult:
    def body():
        T = load_template(data_path("example24.tmpl"))
        X = load_structure(data_path("c5.inst")).conform(T.A.signature)
        no_b = find_homomorphism(X, T.B) is None
        weak = blp_aip_accepts(X, T.A)
        d = clap_accepts(X, T.A)
        ok = no_b and weak and not d.accepted
        detail = (f"X->B {'absent' if no_b else 'PRESENT'}, blp-aip {'ACCEPT' if weak else 'REJECT'}, "
                  f"clap {d.verdict} ({d.stage})")
        return ok, detail, []
    return _timed(1, "separation on the 7-element template", body, limit=10)


def criterion_2(seed: int = DEFAULT_SEED) -> CriterionResult:
    def body():
        T = pm.one_in_three_nae()
        viol, count = [], 0
        for X in small_instances("R1", 3, 3, 3, cap=2000):
            count += 1
            acc = aip_accepts(X, T.A)
            if find_homomorphism(X, T.A) is not None and not acc:
                viol.append(("incomplete", X))
            if acc and find_homomorphism(X, T.B) is None:
                viol.append(("unsound", X))
        return not viol, f"{count} instances, {len(viol)} violations", viol
    return _timed(2, "AIP solves 1-in-3 vs NAE (exhaustive, <=3 vars, <=3 constraints)", body, limit=300)


def criterion_3(seed: int = DEFAULT_SEED, per_template: int = 500) -> CriterionResult:
    def body():
        rng = random.Random(seed + 3)
        viol, count = [], 0
        for name, A, B in templates():
            for _ in range(per_template):
                X, h = planted_instance(rng, A, *_sizes(rng, name))
                count += 1
                for alg in ALGORITHMS:
                    if not decide(alg, X, A):
                        viol.append((name, alg, X, h))
        return not viol, f"{count} planted instances x {len(ALGORITHMS)} algorithms, {len(viol)} violations", viol
    return _timed(3, "completeness on planted instances", body)


def criterion_4(seed: int = DEFAULT_SEED, total: int = 500) -> CriterionResult:
    def body():
        rng = random.Random(seed + 4)
        viol = []
        tps = templates()
        disagreements = 0
        for k in range(total):
            name, A, B = tps[k % 2]
            if rng.random() < 0.5:
                X, _ = planted_instance(rng, A, *_sizes(rng, name))
            else:
                X = random_instance(rng, A, *_sizes(rng, name))
            clap = clap_accepts(X, A).accepted
            ba = blp_aip_accepts(X, A)
            blp = blp_accepts(X, A)
            cblp = cblp_accepts(X, A).accepted
            sblp = sblp_accepts(X, A)
            if clap and not ba:
                viol.append(("clap>blp-aip", name, X))
            if ba and not blp:
                viol.append(("blp-aip>blp", name, X))
            if cblp and not sblp:
                viol.append(("cblp>sblp", name, X))
            disagreements += cblp != sblp
        return (not viol, f"{total} instances, {len(viol)} violations, {disagreements} CBLP/SBLP disagreements",
                viol)
    return _timed(4, "ladder monotonicity", body)


def criterion_5(seed: int = DEFAULT_SEED, total: int = 100) -> CriterionResult:
    def body():
        rng = random.Random(seed + 5)
        viol = []
        tps = templates()
        for k in range(total):
            name, A, B = tps[k % 2]
            X = random_instance(rng, A, *_sizes(rng, name))
            ref = cblp_fixpoint(X, A).serialize()
            runs = [cblp_fixpoint(X, A, order=o).serialize() for o in shuffled_orders(X, A, 5, seed + k)]
            runs.append(cblp_fixpoint(X, A, mode="jacobi").serialize())
            if any(r != ref for r in runs):
                viol.append((name, X))
        return not viol, f"{total} instances x 7 runs, {len(viol)} violations", viol
    return _timed(5, "fixpoint independent of sweep order and mode", body)


def criterion_6(seed: int = DEFAULT_SEED) -> CriterionResult:
    def body():
        T = pm.example_template()
        H = [list(r) for r in pm.EXAMPLE_H]
        viol = []
        for L in range(1, 6):
            f = pm.example_polymorphism(L)
            if not pm.is_polymorphism(f, T.A, T.B):
                viol.append(("polymorphism", L))
            if not pm.is_h_symmetric(f, H):
                viol.append(("h-symmetric", L))
        return not viol, f"L = 1..5, {len(viol)} violations", viol
    return _timed(6, "example polymorphisms are H-symmetric polymorphisms", body, limit=120)


def criterion_7(seed: int = DEFAULT_SEED) -> CriterionResult:
    def body():
        T = pm.one_in_three_nae()
        viol = []
        for L in (1, 3, 5):
            f = pm.aip_polymorphism(L)
            if not pm.is_polymorphism(f, T.A, T.B):
                viol.append(("polymorphism", L))
            if not pm.check_symmetry_class(f, "alternating"):
                viol.append(("alternating", L))
        return not viol, f"L in {{1,3,5}}, {len(viol)} violations", viol
    return _timed(7, "alternating threshold family", body)


def random_tie_matrix(rng: random.Random, p: int, max_rows: int = 4, max_entry: int = 6) -> list[list[int]]:
    m = rng.randint(1, max_rows)
    H = [[0] * p for _ in range(m)]
    for j in range(p):
        k = rng.randint(1, min(m, max_entry))
        rows = rng.sample(range(m), k)
        vals = rng.sample(range(1, max_entry + 1), k)
        for r, v in zip(rows, vals):
            H[r][j] = v
    return H


def random_skeletal(rng: random.Random, L: int, max_cols: int = 7) -> ml.EvcMatrix:
    """Random skeletal matrix, mostly unit columns so that ties are common."""
    t = rng.randint(1, max_cols)
    k = rng.randint(max(1, min(t, L) - 2), min(t, L))
    units = rng.sample(range(L), k)
    cols = [tuple(mpq(int(r == u)) for r in range(L)) for u in units]
    while len(cols) < t:
        den = rng.randint(2, 4)
        w = [0] * L
        for _ in range(den):
            w[rng.choice(units)] += 1
        cols.append(tuple(mpq(x, den) for x in w))
    rng.shuffle(cols)
    return ml.EvcMatrix(tuple(cols))


def criterion_8(seed: int = DEFAULT_SEED, total: int = 200) -> CriterionResult:
    def body():
        rng = random.Random(seed + 8)
        viol = []
        max_steps = 0
        for _ in range(total):
            Ms = [random_skeletal(rng, 7) for _ in range(rng.randint(1, 3))]
            H = random_tie_matrix(rng, 7, max_rows=7, max_entry=rng.choice((2, 3, 6)))
            res = ml.tiebreak(Ms, H)
            bad = ml.check_tiebreak(Ms, H, res.v)
            if res.steps > res.initial_ties:
                bad.append("too many steps")
            if bad:
                viol.append((Ms, H, bad))
            max_steps = max(max_steps, res.steps)
        return not viol, f"{total} cases, {len(viol)} violations, longest run {max_steps} steps", viol
    return _timed(8, "tiebreak postconditions", body)


def criterion_9(seed: int = DEFAULT_SEED, total: int = 200) -> CriterionResult:
    def body():
        rng = random.Random(seed + 9)
        viol = []
        for _ in range(total):
            D, L = rng.randint(1, 6), rng.randint(1, 5)
            el = ml.random_c_d(rng, L, D)
            L2, L3 = rng.randint(1, 5), rng.randint(1, 5)
            pi = ml.MinorMap(tuple(rng.randrange(L2) for _ in range(L)), L2)
            rho = ml.MinorMap(tuple(rng.randrange(L3) for _ in range(L2)), L3)
            once = ml.minor(el, pi)
            if not ml.is_minion_element(once.M, once.mu) or not ml.in_c_d(once.M, once.mu, D):
                viol.append(("closure", el, pi))
            if ml.minor(once, rho) != ml.minor(el, pi.then(rho)):
                viol.append(("composition", el, pi, rho))
        return not viol, f"{total} elements, {len(viol)} violations", viol
    return _timed(9, "minion closure and minor composition", body)


def criterion_10(seed: int = DEFAULT_SEED, total: int = 200) -> CriterionResult:
    def body():
        rng = random.Random(seed + 10)
        viol = []
        points = sols = 0
        tps = templates()
        for k in range(total):
            name, A, B = tps[k % 2]
            if rng.random() < 0.5:
                X, _ = planted_instance(rng, A, *_sizes(rng, name))
            else:
                X = random_instance(rng, A, *_sizes(rng, name))
            sk = BlpSkeleton(X, A)
            pt = sk.blp_point()
            if pt is not None:
                points += 1
                bad = blp_point_violations(X, A, sk, pt)
                if bad:
                    viol.append(("blp", X, bad))
            tau = integer_solve(sk.aip())
            if tau is not None:
                sols += 1
                bad = aip_solution_violations(X, A, sk, tau)
                if bad:
                    viol.append(("aip", X, bad))
            c = Counters()
            clap_accepts(X, A, c)
            g = sk.g()
            if c.blp > 2 * g * g:
                viol.append(("blp-calls", X, c.blp, g))
        return (not viol, f"{total} instances, {points} BLP points and {sols} AIP solutions re-checked, "
                f"{len(viol)} violations", viol)
    return _timed(10, "exact re-substitution and BLP call bound", body)


def criterion_11(seed: int = DEFAULT_SEED, samples: int = 1000) -> CriterionResult:
    def body():
        rng = random.Random(seed + 11)
        H = [list(r) for r in pm.EXAMPLE_H]
        viol = []
        notes = []
        done = 0
        configs = [ml.xi_setup(7, D, H) for D in (1, 2)]
        per = samples // len(configs)
        for cfg in configs:
            arities = [cfg.min_arity, cfg.min_arity + max(1, cfg.N // 3)]
            notes.append(f"D={cfg.D} N={cfg.N} c in {arities}")
            elements = {L: list(ml.enumerate_c_d(L, cfg.D)) for L in range(1, 5)}
            got = 0
            while got < per:
                c = rng.choice(arities)
                f = pm.lazy_example_polymorphism(c)
                L = rng.randint(1, 4)
                el = rng.choice(elements[L])
                L2 = rng.randint(1, 4)
                pi = ml.MinorMap(tuple(rng.randrange(L2) for _ in range(L)), L2)
                for a in ml.xi_commutation_failures(el, pi, f, cfg, 10, rng):
                    viol.append((cfg.D, c, el, pi, a))
                got += 10
            done += got
        return not viol, f"{done} sampled inputs ({'; '.join(notes)}), {len(viol)} violations", viol
    return _timed(11, "xi commutes with minors (sampled)", body)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


def run_all(seed: int = DEFAULT_SEED, only: list[int] | None = None, echo: Callable[[str], None] | None = None):
    results = []
    for k, crit in enumerate(CRITERIA, start=1):
        if only and k not in only:
            continue
        r = crit(seed)
        results.append(r)
        if echo:
            echo(r.line())
    return results
