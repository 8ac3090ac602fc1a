"""Propagation algorithms: SBLP, the CBLP fixpoint and CLAP.

All three prune pinned BLPs until nothing changes.  SBLP pins a value of
one variable; CBLP pins an assignment of one constraint; CLAP runs CBLP and
then asks BLP+AIP for a surviving pinned assignment.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .relaxations import BlpSkeleton, Counters
from .structures import UNARY, RelationalStructure

ACCEPT = "ACCEPT"
REJECT = "REJECT"


@dataclass(frozen=True)
class RemoveEvent:
    symbol: str
    constraint: int
    assignment: int
    sweep: int

    def line(self) -> str:
        return f"REMOVE {self.symbol} {self.constraint} {self.assignment} sweep={self.sweep}"


@dataclass(frozen=True)
class CertEvent:
    symbol: str
    constraint: int
    assignment: int

    def line(self) -> str:
        return f"CERT {self.symbol} {self.constraint} {self.assignment}"


@dataclass
class SMap:
    """S_{x,R} as a set of assignment indices into R^A, keyed by (R, constraint index)."""

    sets: dict[tuple[str, int], set[int]]

    def __getitem__(self, key: tuple[str, int]) -> set[int]:
        return self.sets[key]

    def empty_keys(self) -> list[tuple[str, int]]:
        return [k for k, s in self.sets.items() if not s]

    def all_nonempty(self) -> bool:
        return not self.empty_keys()

    def serialize(self) -> str:
        out = []
        for (sym, xi), s in sorted(self.sets.items()):
            out.append(" ".join([f"S {sym} {xi}:"] + [str(a) for a in sorted(s)]))
        return "\n".join(out) + "\n"

    def __eq__(self, other) -> bool:
        return isinstance(other, SMap) and self.sets == other.sets


@dataclass
class Decision:
    verdict: str
    trace: list = field(default_factory=list)
    cert: CertEvent | None = None
    stage: str = ""
    counters: Counters = field(default_factory=Counters)
    smap: SMap | None = None

    @property
    def accepted(self) -> bool:
        return self.verdict == ACCEPT

    def trace_text(self) -> str:
        lines = [e.line() for e in self.trace]
        if self.cert is not None:
            lines.append(self.cert.line())
        return "".join(l + "\n" for l in lines)


class _Pruner:
    """Greatest-fixpoint pruning over a subset of BLP variables.

    ``candidates`` are the pinnable variables.  A variable is removed when
    the BLP with it pinned to 1 and every removed variable pinned to 0 is
    infeasible.  Feasible points found along the way are kept: a point whose
    support misses the removed set certifies every variable equal to 1 in
    it, so those tests are skipped.
    """

    def __init__(self, sk: BlpSkeleton, candidates: Sequence[int], counters: Counters):
        self.sk = sk
        self.candidates = list(candidates)
        self.counters = counters
        self.removed: set[int] = set()
        self.certs: list[tuple[frozenset, frozenset]] = []  # (support, ones)
        self.sweeps = 0

    def _certified(self, j: int) -> bool:
        for supp, ones in self.certs:
            if j in ones and not (supp & self.removed):
                return True
        return False

    def _remember(self, point) -> None:
        supp = frozenset(i for i, v in enumerate(point) if v)
        ones = frozenset(i for i, v in enumerate(point) if v == 1)
        self.certs.append((supp, ones))

    def feasible(self, j: int) -> bool:
        if self._certified(j):
            return True
        point = self.sk.blp_point({j}, self.removed, self.counters)
        if point is None:
            return False
        self._remember(point)
        return True

    def run(self, order: Sequence[int] | None, mode: str, jobs: int, on_remove) -> None:
        seq = list(order) if order is not None else self.candidates
        if sorted(seq) != sorted(self.candidates):
            raise ValueError("order must be a permutation of the candidate pairs")
        if mode not in ("sequential", "jacobi"):
            raise ValueError(f"unknown mode {mode!r}")
        changed = True
        while changed:
            self.sweeps += 1
            changed = False
            if mode == "sequential":
                for j in seq:
                    if j not in self.removed and not self.feasible(j):
                        self.removed.add(j)
                        on_remove(j, self.sweeps)
                        changed = True
            else:
                live = [j for j in seq if j not in self.removed]
                bad = self._batch(live, jobs)
                for j in bad:
                    self.removed.add(j)
                    on_remove(j, self.sweeps)
                changed = bool(bad)

    def _batch(self, live: list[int], jobs: int) -> list[int]:
        # every test in the batch sees the same frozen removed set
        if jobs <= 1 or len(live) < 2:
            return [j for j in live if not self.feasible(j)]
        todo = [j for j in live if not self._certified(j)]
        frozen = frozenset(self.removed)
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_pinned_feasible, [(self.sk, j, frozen) for j in todo]))
        self.counters.blp += len(todo)
        self.counters.lp_solves += len(todo)
        return [j for j, ok in zip(todo, results) if not ok]


def _pinned_feasible(args) -> bool:
    sk, j, removed = args
    return sk.blp_point({j}, removed) is not None


def _constraint_vars(sk: BlpSkeleton) -> list[int]:
    return list(range(sk.num_vars))


def cblp_fixpoint(X: RelationalStructure, A: RelationalStructure, order: Sequence[tuple[str, int, int]] | None = None,
                  mode: str = "sequential", counters: Counters | None = None, trace: list | None = None,
                  jobs: int = 1, skeleton: BlpSkeleton | None = None) -> SMap:
    """Shrink every S_{x,R} from R^A until each pinned BLP is feasible.

    ``order`` is an optional permutation of the (symbol, constraint, assignment)
    labels used for the sweeps; the fixpoint does not depend on it.
    """
    sk = skeleton or BlpSkeleton(X, A)
    counters = counters if counters is not None else Counters()
    pr = _Pruner(sk, _constraint_vars(sk), counters)
    idx = None if order is None else [sk.index[tuple(o)] for o in order]

    def on_remove(j, sweep):
        if trace is not None:
            sym, xi, ai = sk.labels[j]
            trace.append(RemoveEvent(sym, xi, ai, sweep))

    pr.run(idx, mode, jobs, on_remove)
    return _smap(sk, pr.removed)


def _smap(sk: BlpSkeleton, removed: set[int]) -> SMap:
    sets = {}
    for key, block in sk.blocks.items():
        sets[key] = {j - block.start for j in block if j not in removed}
    return SMap(sets)


def _removed_of(sk: BlpSkeleton, smap: SMap) -> set[int]:
    out = set()
    for key, block in sk.blocks.items():
        keep = smap[key]
        out.update(j for j in block if j - block.start not in keep)
    return out


def clap_accepts(X: RelationalStructure, A: RelationalStructure, counters: Counters | None = None,
                 mode: str = "sequential", jobs: int = 1, exhaustive: bool = False) -> Decision:
    sk = BlpSkeleton(X, A)
    counters = counters if counters is not None else Counters()
    trace: list = []
    if sk.X.size == 0 and sk.num_vars == 0:
        return Decision(ACCEPT, trace, None, "vacuous", counters, SMap({}))
    smap = cblp_fixpoint(X, A, mode=mode, counters=counters, trace=trace, jobs=jobs, skeleton=sk)
    if not smap.all_nonempty():
        return Decision(REJECT, trace, None, "cblp-empty", counters, smap)
    removed = _removed_of(sk, smap)
    for j in range(sk.num_vars):
        if j in removed:
            continue
        if sk.blp_aip({j}, removed, counters, exhaustive=exhaustive):
            sym, xi, ai = sk.labels[j]
            return Decision(ACCEPT, trace, CertEvent(sym, xi, ai), "blp-aip", counters, smap)
    return Decision(REJECT, trace, None, "blp-aip-exhausted", counters, smap)


def cblp_accepts(X: RelationalStructure, A: RelationalStructure, counters: Counters | None = None,
                 mode: str = "sequential", jobs: int = 1) -> Decision:
    """CBLP as a decider: accept iff the fixpoint leaves every S nonempty."""
    sk = BlpSkeleton(X, A)
    counters = counters if counters is not None else Counters()
    trace: list = []
    smap = cblp_fixpoint(X, A, mode=mode, counters=counters, trace=trace, jobs=jobs, skeleton=sk)
    ok = smap.all_nonempty()
    return Decision(ACCEPT if ok else REJECT, trace, None, "" if ok else "cblp-empty", counters, smap)


def sblp_domains(X: RelationalStructure, A: RelationalStructure, counters: Counters | None = None,
                 trace: list | None = None, skeleton: BlpSkeleton | None = None) -> dict[int, set[int]]:
    """Per-variable domains left by singleton BLP pruning."""
    sk = skeleton or BlpSkeleton(X, A)
    counters = counters if counters is not None else Counters()
    cand = [j for j in range(sk.num_vars) if sk.labels[j][0] == UNARY]
    pr = _Pruner(sk, cand, counters)

    def on_remove(j, sweep):
        if trace is not None:
            sym, xi, ai = sk.labels[j]
            trace.append(RemoveEvent(sym, xi, ai, sweep))

    pr.run(None, "sequential", 1, on_remove)
    doms = {}
    for (sym, xi), block in sk.blocks.items():
        if sym != UNARY:
            continue
        x = sk.X[UNARY][xi][0]
        doms[x] = {sk.A[UNARY][j - block.start][0] for j in block if j not in pr.removed}
    return doms


def sblp_accepts(X: RelationalStructure, A: RelationalStructure, counters: Counters | None = None) -> bool:
    return all(sblp_domains(X, A, counters).values())


def shuffled_orders(X: RelationalStructure, A: RelationalStructure, k: int, seed: int = 0) -> list[list[tuple]]:
    """k random sweep orders over the (symbol, constraint, assignment) labels."""
    labels = BlpSkeleton(X, A).labels
    rng = random.Random(seed)
    out = []
    for _ in range(k):
        o = list(labels)
        rng.shuffle(o)
        out.append(o)
    return out
