"""Finite truncations of the minion of skeletal matrices with affine vectors.

A matrix with infinitely many columns that are eventually constant is kept
as its first ``t`` columns; every column past ``t`` repeats the last one.
Indices are 0-based throughout, so the first unit column ``e_1`` is column 0.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

from gmpy2 import mpq

from .polymorph import LazyFunction, is_tie_matrix, is_tieless, mat_vec
from .structures import StructureError, _int, _lines

Q0 = mpq(0)
Q1 = mpq(1)


class MinionError(ValueError):
    pass


class RegimeError(ValueError):
    """Parameters outside the range where the xi construction is defined."""


def _q(x) -> mpq:
    return x if isinstance(x, type(Q0)) else mpq(x)


@dataclass(frozen=True)
class EvcMatrix:
    """An L x infinity matrix stored as its head columns."""

    cols: tuple[tuple[mpq, ...], ...]

    def __post_init__(self):
        cols = [tuple(_q(x) for x in c) for c in self.cols]
        if not cols:
            raise MinionError("need at least one column")
        if len({len(c) for c in cols}) != 1 or not cols[0]:
            raise MinionError("columns must share a positive length")
        while len(cols) > 1 and cols[-1] == cols[-2]:
            cols.pop()
        object.__setattr__(self, "cols", tuple(cols))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "EvcMatrix":
        return cls(tuple(zip(*rows)))

    @property
    def rows(self) -> int:
        return len(self.cols[0])

    @property
    def t(self) -> int:
        return len(self.cols)

    def column(self, i: int) -> tuple[mpq, ...]:
        return self.cols[min(i, self.t - 1)]

    def row_list(self) -> list[list[mpq]]:
        return [[c[r] for c in self.cols] for r in range(self.rows)]

    def times(self, v: Sequence) -> list[mpq]:
        """M v for a finitely supported v given by its leading entries."""
        out = [Q0] * self.rows
        for i, x in enumerate(v):
            if x:
                col = self.column(i)
                for r in range(self.rows):
                    out[r] += col[r] * x
        return out

    @cached_property
    def unit_witness(self) -> dict[int, int]:
        """Row j -> least head column equal to e_j."""
        out: dict[int, int] = {}
        for i, c in enumerate(self.cols):
            nz = [r for r, x in enumerate(c) if x]
            if len(nz) == 1 and c[nz[0]] == 1:
                out.setdefault(nz[0], i)
        return out

    def row_is_zero(self, j: int) -> bool:
        return all(c[j] == 0 for c in self.cols)


def is_skeletal(M: EvcMatrix) -> bool:
    return all(M.row_is_zero(j) or j in M.unit_witness for j in range(M.rows))


def unit_matrix(L: int, j: int) -> EvcMatrix:
    """e_j repeated in every column."""
    return EvcMatrix((tuple(Q1 if r == j else Q0 for r in range(L)),))


@dataclass(frozen=True)
class MinionElement:
    M: EvcMatrix
    mu: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(int(x) for x in self.mu))
        if len(self.mu) != self.M.rows:
            raise MinionError(f"mu has {len(self.mu)} entries but M has {self.M.rows} rows")

    @property
    def arity(self) -> int:
        return self.M.rows


def membership_failures(M: EvcMatrix, mu: Sequence[int]) -> list[str]:
    """Names of the violated membership conditions (empty when a member)."""
    bad = []
    if any(x < 0 for c in M.cols for x in c):
        bad.append("c1: negative entry")
    if any(sum(c, Q0) != 1 for c in M.cols):
        bad.append("c2: column does not sum to 1")
    if len(mu) != M.rows or any(int(x) != x for x in mu) or sum(mu) != 1:
        bad.append("c3: mu is not an affine integer vector")
    elif any(x != 0 and M.cols[0][i] == 0 for i, x in enumerate(mu)):
        bad.append("c4: supp(mu) not inside supp(M e1)")
    if not is_skeletal(M):
        bad.append("c6: not skeletal")
    return bad


def is_minion_element(M: EvcMatrix, mu: Sequence[int]) -> bool:
    return not membership_failures(M, mu)


def in_c_d(M: EvcMatrix, mu: Sequence[int], D: int) -> bool:
    if not is_minion_element(M, mu):
        return False
    if M.t > D or sum(abs(int(x)) for x in mu) > D:
        return False
    return all((D * x).denominator == 1 for c in M.cols for x in c)


@dataclass(frozen=True)
class MinorMap:
    """pi: range(L) -> range(L2)."""

    pi: tuple[int, ...]
    target: int

    def __post_init__(self):
        object.__setattr__(self, "pi", tuple(int(j) for j in self.pi))
        if any(not 0 <= j < self.target for j in self.pi):
            raise MinionError(f"map {self.pi} leaves range({self.target})")

    def matrix(self) -> list[list[int]]:
        return [[int(self.pi[j] == i) for j in range(len(self.pi))] for i in range(self.target)]

    def then(self, other: "MinorMap") -> "MinorMap":
        """other after self."""
        if len(other.pi) != self.target:
            raise MinionError("maps do not compose")
        return MinorMap(tuple(other.pi[j] for j in self.pi), other.target)


def _push(vec: Sequence, pi: MinorMap, zero):
    out = [zero] * pi.target
    for j, x in enumerate(vec):
        out[pi.pi[j]] += x
    return out


def minor(el: MinionElement, pi: MinorMap) -> MinionElement:
    """(P_pi M, P_pi mu)."""
    if len(pi.pi) != el.arity:
        raise MinionError(f"map has domain {len(pi.pi)} but element has arity {el.arity}")
    cols = tuple(tuple(_push(c, pi, Q0)) for c in el.M.cols)
    return MinionElement(EvcMatrix(cols), tuple(_push(el.mu, pi, 0)))


# --- enumeration ------------------------------------------------------------

def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def skeletal_matrices(L: int, D: int) -> list[EvcMatrix]:
    """Every matrix part of an L-ary element of the D-th truncation."""
    columns = [tuple(mpq(k, D) for k in comp) for comp in _compositions(D, L)]
    out = []
    for t in range(1, D + 1):
        for seq in itertools.product(columns, repeat=t):
            if t > 1 and seq[-1] == seq[-2]:
                continue
            M = EvcMatrix(seq)
            if M.t == t and is_skeletal(M):
                out.append(M)
    return out


def affine_vectors(support: Sequence[int], L: int, D: int) -> Iterator[tuple[int, ...]]:
    """Integer vectors on ``support`` summing to 1 with l1 norm at most D."""
    for vals in itertools.product(range(-D, D + 1), repeat=len(support)):
        if sum(vals) == 1 and sum(abs(x) for x in vals) <= D:
            mu = [0] * L
            for i, x in zip(support, vals):
                mu[i] = x
            yield tuple(mu)


def enumerate_c_d(L: int, D: int) -> Iterator[MinionElement]:
    for M in skeletal_matrices(L, D):
        supp = [i for i, x in enumerate(M.cols[0]) if x]
        for mu in affine_vectors(supp, L, D):
            yield MinionElement(M, mu)


def random_c_d(rng: random.Random, L: int, D: int) -> MinionElement:
    """A random member of the D-th truncation (not uniform)."""
    t = rng.randint(1, D)
    k = rng.randint(1, min(t, L))
    units = rng.sample(range(L), k)
    cols = [tuple(mpq(int(r == u)) for r in range(L)) for u in units]
    while len(cols) < t:
        # mix units only: keeps every nonzero row witnessed
        weights = [0] * L
        for _ in range(D):
            weights[rng.choice(units)] += 1
        cols.append(tuple(mpq(w, D) for w in weights))
    rng.shuffle(cols)
    M = EvcMatrix(tuple(cols))
    supp = [i for i, x in enumerate(M.cols[0]) if x]
    mus = list(affine_vectors(supp, L, D)) if len(supp) <= 4 else [_unit_mu(L, supp[0])]
    return MinionElement(M, rng.choice(mus))


def _unit_mu(L: int, j: int) -> tuple[int, ...]:
    return tuple(int(i == j) for i in range(L))


# --- tiebreak ---------------------------------------------------------------

@dataclass
class TiebreakResult:
    v: list[mpq]
    steps: int
    initial_ties: int
    history: list[int] = field(default_factory=list)


def count_ties(vec: Sequence) -> int:
    """Ordered pairs i != i' with equal nonzero entries."""
    seen: dict = {}
    for x in vec:
        if x != 0:
            seen[x] = seen.get(x, 0) + 1
    return sum(c * (c - 1) for c in seen.values())


def _first_tie(vec: Sequence) -> tuple[int, int] | None:
    where: dict = {}
    for i, x in enumerate(vec):
        if x != 0:
            if x in where:
                return where[x], i
            where[x] = i
    return None


def tiebreak(Ms: Sequence[EvcMatrix], H: Sequence[Sequence[int]], max_steps: int | None = None) -> TiebreakResult:
    """A stochastic v with v[0] > 0 making every H M_j v tieless.

    Starts from the uniform vector on the head columns so that a zero entry
    of H M_j v stays zero for good; each blend toward a unit column then
    removes at least one tie and creates none.
    """
    if not Ms:
        raise MinionError("need at least one matrix")
    if not is_tie_matrix(H):
        raise MinionError("H is not a tie matrix")
    p = len(H[0])
    for M in Ms:
        if M.rows != p:
            raise MinionError(f"matrix has {M.rows} rows but H has {p} columns")
        if not is_skeletal(M):
            raise MinionError("not skeletal")
    T = max(M.t for M in Ms)
    v = [mpq(1, T)] * T

    def images(v):
        return [mat_vec(H, M.times(v)) for M in Ms]

    def potential(imgs):
        return sum(count_ties(u) for u in imgs)

    imgs = images(v)
    f0 = potential(imgs)
    res = TiebreakResult(v, 0, f0, [f0])
    while res.history[-1]:
        j, (i, i2) = next((j, t) for j, u in enumerate(imgs) if (t := _first_tie(u)) is not None)
        Mv = Ms[j].times(v)
        beta = next(b for b in range(p) if H[i][b] != 0 and Mv[b] != 0)
        alpha = Ms[j].unit_witness[beta]
        e_alpha = [Q0] * T
        e_alpha[alpha] = Q1
        bad = []
        for u, M in zip(imgs, Ms):
            w = mat_vec(H, M.column(alpha))
            for a in range(len(u)):
                for b in range(a + 1, len(u)):
                    d, e = u[a] - u[b], w[a] - w[b]
                    if d != 0 and d != e:
                        eps = d / (d - e)
                        if 0 < eps < 1:
                            bad.append(eps)
        if bad:
            q = math.floor(1 / min(bad)) + 1
            eps = mpq(1, 2 * q)
        else:
            eps = mpq(1, 2)
        v = [(1 - eps) * x + eps * y for x, y in zip(v, e_alpha)]
        imgs = images(v)
        f = potential(imgs)
        if f >= res.history[-1]:
            raise RuntimeError("tie count did not decrease")  # cannot happen for valid input
        res.v, res.steps = v, res.steps + 1
        res.history.append(f)
        if max_steps is not None and res.steps > max_steps:
            raise RuntimeError("step limit exceeded")
    return res


def check_tiebreak(Ms: Sequence[EvcMatrix], H, v: Sequence) -> list[str]:
    """Violated postconditions of a tiebreak vector (empty when all hold)."""
    bad = []
    if any(x < 0 for x in v) or sum(v, Q0) != 1:
        bad.append("not stochastic")
    if not v or v[0] <= 0:
        bad.append("first entry not positive")
    if not all(is_tieless(mat_vec(H, M.times(v))) for M in Ms):
        bad.append("some H M v has a tie")
    return bad


# --- the xi construction ----------------------------------------------------

def sigma_bound(H: Sequence[Sequence[int]]) -> int:
    """Integer upper bound on the largest singular value: ceil(sqrt(|H|_1 |H|_inf))."""
    one = max(sum(abs(row[j]) for row in H) for j in range(len(H[0])))
    inf = max(sum(abs(x) for x in row) for row in H)
    prod = one * inf
    r = math.isqrt(prod)
    return r if r * r == prod else r + 1


def denominator_lcm(v: Sequence[mpq]) -> int:
    out = 1
    for x in v:
        out = math.lcm(out, int(x.denominator))
    return out


@dataclass
class XiConfig:
    D: int
    H: list[list[int]]
    v: list[mpq]
    n_prime: int
    sigma_hat: int
    N: int

    @property
    def min_arity(self) -> int:
        return self.N * self.N


def xi_setup(n: int, D: int, H: Sequence[Sequence[int]]) -> XiConfig:
    """Tiebreak over every matrix of the n-ary D-th truncation, then N."""
    S = skeletal_matrices(n, D)
    v = tiebreak(S, H).v
    n_prime = denominator_lcm(v)
    s = sigma_bound(H)
    return XiConfig(D, [list(r) for r in H], v, n_prime, s, 2 * (s + 1) * D * D * n_prime)


class XiFunction(LazyFunction):
    """f composed with the block map; ``blocks[i]`` copies of argument i."""

    def __init__(self, f, blocks: list[int]):
        self.f, self.blocks = f, blocks
        super().__init__(f.n, f.m, len(blocks), fn=self._eval)

    def _eval(self, a):
        return self.f.eval_blocks([(x, b) for x, b in zip(a, self.blocks) if b])


def xi_blocks(el: MinionElement, c: int, H, v: Sequence, N: int, D: int) -> list[int]:
    """Block sizes alpha N (M v)_i + beta mu_i after checking the regime."""
    if not in_c_d(el.M, el.mu, D):
        raise RegimeError(f"element is not in the truncation with D = {D}")
    if any(x < 0 for x in v) or sum(v, Q0) != 1 or not v or v[0] <= 0:
        raise RegimeError("v must be stochastic with a positive first entry")
    s = sigma_bound(H)
    base = 2 * (s + 1) * D * D
    if N <= 0 or N % base:
        raise RegimeError(f"N = {N} is not a positive multiple of 2(sigma+1)D^2 = {base}")
    n_prime = N // base
    if any((n_prime * _q(x)).denominator != 1 for x in v):
        raise RegimeError(f"N' = {n_prime} does not clear the denominators of v")
    if c < N * N:
        raise RegimeError(f"arity c = {c} is below N^2 = {N * N}")
    alpha, beta = divmod(c, N)
    Mv = el.M.times(v)
    blocks = []
    for i in range(el.arity):
        b = alpha * N * Mv[i] + beta * el.mu[i]
        if b.denominator != 1:
            raise RegimeError(f"block {i} has non-integer size {b}")
        if b < 0:
            raise RegimeError(f"block {i} has negative size {b}; mu support leaves M e1")
        blocks.append(int(b))
    if sum(blocks) != c:
        raise RegimeError(f"block sizes sum to {sum(blocks)}, not {c}")
    return blocks


def xi_map(el: MinionElement, f, H, v: Sequence, N: int, D: int) -> XiFunction:
    """The minor of the c-ary f that repeats argument i as many times as block i."""
    if len(H[0]) != f.n:
        raise RegimeError(f"H has {len(H[0])} columns but f has domain {f.n}")
    return XiFunction(f, xi_blocks(el, f.arity, H, v, N, D))


def xi_commutation_failures(el: MinionElement, pi: MinorMap, f, cfg: XiConfig, samples: int,
                            rng: random.Random) -> list[tuple[int, ...]]:
    """Sampled inputs where xi(el minor pi) and (xi el) minor pi disagree."""
    lhs = xi_map(minor(el, pi), f, cfg.H, cfg.v, cfg.N, cfg.D)
    rhs = xi_map(el, f, cfg.H, cfg.v, cfg.N, cfg.D).minor(pi.pi, pi.target)
    bad = []
    for _ in range(samples):
        a = tuple(rng.randrange(f.n) for _ in range(pi.target))
        if lhs(a) != rhs(a):
            bad.append(a)
    return bad


# --- files ------------------------------------------------------------------

def serialize_element(el: MinionElement) -> str:
    lines = [f"mel rows {el.arity} cols {el.M.t}"]
    lines.extend(" ".join(str(x) for x in row) for row in el.M.row_list())
    lines.append("mu " + " ".join(str(x) for x in el.mu))
    return "\n".join(lines) + "\n"


def parse_element(text: str) -> MinionElement:
    lines = list(_lines(text))
    if not lines:
        raise StructureError("empty document", 1, 1)
    ln, tk = lines[0]
    words = [t[0] for t in tk]
    if len(tk) != 5 or words[0] != "mel" or words[1] != "rows" or words[3] != "cols":
        raise StructureError("expected 'mel rows <L> cols <t>'", ln, tk[0][1])
    L, t = _int(tk[2], ln, "row count"), _int(tk[4], ln, "column count")
    if L < 1 or t < 1:
        raise StructureError("rows and cols must be positive", ln, tk[0][1])
    if len(lines) != L + 2:
        raise StructureError(f"expected {L} matrix rows and a 'mu' line", lines[-1][0], 1)
    rows = []
    for ln, tk in lines[1:L + 1]:
        if len(tk) != t:
            raise StructureError(f"expected {t} entries, found {len(tk)}", ln, tk[0][1])
        row = []
        for tok, col in tk:
            try:
                row.append(mpq(tok))
            except ValueError:
                raise StructureError(f"bad rational {tok!r}", ln, col) from None
        rows.append(row)
    ln, tk = lines[L + 1]
    if tk[0][0] != "mu" or len(tk) != L + 1:
        raise StructureError(f"expected 'mu' and {L} integers", ln, tk[0][1])
    mu = tuple(_int(t, ln, "mu entry") for t in tk[1:])
    try:
        return MinionElement(EvcMatrix.from_rows(rows), mu)
    except MinionError as exc:
        raise StructureError(str(exc), lines[1][0], 1) from None
