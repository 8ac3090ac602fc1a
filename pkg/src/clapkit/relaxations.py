"""BLP, AIP and BLP+AIP relaxations of an instance against a template structure.

Variables are indexed by ``(symbol, constraint index, assignment index)``
in signature order, then tuple order of X, then tuple order of A.  The
unary symbol ``__u`` carries the per-variable distributions that the
marginal equalities refer to.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from gmpy2 import mpq

from .exactmath import (
    IntegerSystem,
    LpProblem,
    ONE,
    ZERO,
    integer_solve,
    lp_feasible,
    relative_interior_point,
)
from .structures import UNARY, RelationalStructure, StructureError, augment_with_unary

VarLabel = tuple[str, int, int]


class RelaxationError(ValueError):
    pass


@dataclass
class Counters:
    """Instrumentation for solver calls."""

    blp: int = 0
    aip: int = 0
    blp_aip: int = 0
    lp_solves: int = 0

    def merge(self, other: "Counters") -> None:
        self.blp += other.blp
        self.aip += other.aip
        self.blp_aip += other.blp_aip
        self.lp_solves += other.lp_solves


@dataclass(frozen=True)
class Fixing:
    symbol: str
    x: tuple[int, ...]
    a: tuple[int, ...]
    value: int = 1

    def __post_init__(self):
        if self.value not in (0, 1):
            raise RelaxationError("fixing value must be 0 or 1")


def marginal_matrix(U: Sequence[Sequence[int]], i: int, domain_size: int) -> list[list[int]]:
    """The 0/1 matrix sending a distribution on U to its i-th marginal (i is 1-based)."""
    U = [tuple(t) for t in U]
    if U:
        k = len(U[0])
        if not 1 <= i <= k:
            raise RelaxationError(f"coordinate {i} out of range 1..{k}")
    elif i < 1:
        raise RelaxationError(f"coordinate {i} out of range")
    return [[int(t[i - 1] == c) for t in U] for c in range(domain_size)]


def marginal(xi: Sequence, U: Sequence[Sequence[int]], i: int, domain_size: int) -> list:
    E = marginal_matrix(U, i, domain_size)
    return [sum((e * w for e, w in zip(row, xi)), ZERO) for row in E]


def prepare(X: RelationalStructure, A: RelationalStructure):
    """Augment with the unary symbol and check signatures."""
    X, A = augment_with_unary(X, A)
    if not X.signature.same_as(A.signature):
        raise StructureError("instance and template have different signatures")
    return X, A


class BlpSkeleton:
    """Shared equality structure of BLP(X, A) and AIP(X, A).

    Building this once lets the propagation loops pose many fixed LPs
    without rebuilding rows; only the bounds change between calls.
    """

    def __init__(self, X: RelationalStructure, A: RelationalStructure):
        X, A = prepare(X, A)
        self.X, self.A = X, A
        self.labels: list[VarLabel] = []
        self.blocks: dict[tuple[str, int], range] = {}
        for sym in X.signature.names:
            rA = len(A[sym])
            for xi in range(len(X[sym])):
                start = len(self.labels)
                self.labels.extend((sym, xi, ai) for ai in range(rA))
                self.blocks[(sym, xi)] = range(start, start + rA)
        self.index = {lab: j for j, lab in enumerate(self.labels)}
        n = A.size
        unary_x = {t[0]: xi for xi, t in enumerate(X[UNARY])}
        unary_a = {t[0]: ai for ai, t in enumerate(A[UNARY])}

        def uvar(x: int, a: int) -> int:
            return self.blocks[(UNARY, unary_x[x])].start + unary_a[a]

        rows: list[tuple[dict[int, int], int]] = []
        for sym, arity in X.signature.symbols:
            tuplesA = A[sym]
            for xi, xt in enumerate(X[sym]):
                block = self.blocks[(sym, xi)]
                rows.append(({j: 1 for j in block}, 1))
                if sym == UNARY:
                    continue
                for i in range(arity):
                    for a in range(n):
                        row = {block.start + ai: 1 for ai, at in enumerate(tuplesA) if at[i] == a}
                        u = uvar(xt[i], a)
                        row[u] = row.get(u, 0) - 1
                        row = {j: c for j, c in row.items() if c}
                        if row:
                            rows.append((row, 0))
        self.int_rows = rows
        self.q_rows = [({j: mpq(c) for j, c in r.items()}, mpq(d)) for r, d in rows]

    @property
    def num_vars(self) -> int:
        return len(self.labels)

    def g(self) -> int:
        return sum(len(self.X[s]) * len(self.A[s]) for s in self.X.signature.names)

    def var_of(self, fix: Fixing) -> int:
        try:
            xi = self.X.tuple_index(fix.symbol, fix.x)
            ai = self.A.tuple_index(fix.symbol, fix.a)
        except KeyError:
            raise RelaxationError(f"fixing references unknown tuple: {fix}") from None
        return self.index[(fix.symbol, xi, ai)]

    def split_fixings(self, fixings: Iterable[Fixing]) -> tuple[set[int], set[int]]:
        ones, zeros = set(), set()
        for f in fixings:
            (ones if f.value == 1 else zeros).add(self.var_of(f))
        return ones, zeros

    def lp(self, ones: Iterable[int] = (), zeros: Iterable[int] = ()) -> LpProblem:
        p = LpProblem(self.num_vars, self.labels, list(self.q_rows))
        for j in zeros:
            p.fix(j, ZERO)
        for j in ones:
            if p.upper[j] == ZERO:
                p.lower[j] = ONE  # contradictory fixings: leave an empty box
            else:
                p.fix(j, ONE)
        return p

    def aip(self, zero_set: Iterable[int] = ()) -> IntegerSystem:
        return IntegerSystem(self.num_vars, self.labels, list(self.int_rows), set(zero_set))

    # index-level deciders used by the propagation loops

    def blp_point(self, ones=(), zeros=(), counters: Counters | None = None):
        if counters is not None:
            counters.blp += 1
            counters.lp_solves += 1
        return lp_feasible(self.lp(ones, zeros))

    def blp_aip(self, ones=(), zeros=(), counters: Counters | None = None, exhaustive: bool = False) -> bool:
        if counters is not None:
            counters.blp_aip += 1
        p = self.lp(ones, zeros)
        point = relative_interior_point(p, exhaustive=exhaustive)
        if point is None:
            return False
        zero_set = {j for j, v in enumerate(point) if v == 0}
        zero_set.update(zeros)
        for j in ones:
            for sib in self._siblings(j):
                if sib != j:
                    zero_set.add(sib)
        if counters is not None:
            counters.aip += 1
        tau = integer_solve(self.aip(zero_set))
        return tau is not None

    def _siblings(self, j: int) -> range:
        sym, xi, _ = self.labels[j]
        return self.blocks[(sym, xi)]

    def label_text(self, j: int) -> str:
        sym, xi, ai = self.labels[j]
        return f"{sym}:{xi}:{ai}"


def build_blp(X: RelationalStructure, A: RelationalStructure, fixings: Sequence[Fixing] = ()) -> LpProblem:
    sk = BlpSkeleton(X, A)
    ones, zeros = sk.split_fixings(fixings)
    return sk.lp(ones, zeros)


def blp_point(X: RelationalStructure, A: RelationalStructure, fixings: Sequence[Fixing] = ()):
    return lp_feasible(build_blp(X, A, fixings))


def blp_accepts(X: RelationalStructure, A: RelationalStructure, counters: Counters | None = None) -> bool:
    return BlpSkeleton(X, A).blp_point(counters=counters) is not None


def _zero_labels(sk: BlpSkeleton, zero_set) -> set[int]:
    out = set()
    for sym, x, a in zero_set:
        out.add(sk.var_of(Fixing(sym, tuple(x), tuple(a), 0)))
    return out


def build_aip(X: RelationalStructure, A: RelationalStructure, zero_set: Iterable[tuple] = ()) -> IntegerSystem:
    """AIP(X, A); ``zero_set`` holds (symbol, x-tuple, a-tuple) triples forced to 0."""
    sk = BlpSkeleton(X, A)
    return sk.aip(_zero_labels(sk, zero_set))


def aip_solution(X: RelationalStructure, A: RelationalStructure, zero_set: Iterable[tuple] = ()):
    return integer_solve(build_aip(X, A, zero_set))


def aip_accepts(X: RelationalStructure, A: RelationalStructure, counters: Counters | None = None) -> bool:
    if counters is not None:
        counters.aip += 1
    return integer_solve(BlpSkeleton(X, A).aip()) is not None


def blp_aip_accepts(X: RelationalStructure, A: RelationalStructure, fixings: Sequence[Fixing] = (),
                    counters: Counters | None = None, exhaustive: bool = False) -> bool:
    sk = BlpSkeleton(X, A)
    ones, zeros = sk.split_fixings(fixings)
    return sk.blp_aip(ones, zeros, counters=counters, exhaustive=exhaustive)
