"""Finite operations, polymorphism checks, tie matrices and H-symmetry.

A function of arity L from n elements to m elements is stored as a dense
table indexed in mixed radix with the first argument most significant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .structures import (
    NAE,
    ONE_IN_THREE,
    UNARY,
    Homomorphism,
    PcspTemplate,
    RelationalStructure,
    StructureError,
    Signature,
    _int,
    _lines,
    validate_template,
)

DEFAULT_BUDGET = 10**7

# blocks of size at most this many rows are checked in one numpy pass
_CHUNK = 1 << 20


class BudgetError(ValueError):
    """The requested enumeration is larger than the configured budget."""


def all_tuples(n: int, L: int) -> np.ndarray:
    """Every tuple of ``range(n)^L`` as rows, in table order."""
    if L == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((n,) * L, dtype=np.int64)
    return grids.reshape(L, -1).T


def encode(rows: np.ndarray, base: int) -> np.ndarray:
    """Mixed-radix code of each row (first column most significant)."""
    code = np.zeros(rows.shape[0], dtype=np.int64)
    for c in range(rows.shape[1]):
        code = code * base + rows[:, c]
    return code


class FiniteFunction:
    """An operation ``range(n)^L -> range(m)`` with a dense table."""

    def __init__(self, n: int, m: int, L: int, table):
        table = np.asarray(table, dtype=np.int64).reshape(-1)
        if n < 1 or m < 1 or L < 0:
            raise ValueError("need n, m >= 1 and L >= 0")
        if table.shape[0] != n ** L:
            raise ValueError(f"table has {table.shape[0]} entries, expected {n}^{L} = {n ** L}")
        if table.size and (table.min() < 0 or table.max() >= m):
            raise ValueError("table value outside the codomain")
        table.setflags(write=False)
        self.n, self.m, self.L, self.table = n, m, L, table

    @classmethod
    def from_callable(cls, n: int, m: int, L: int, fn: Callable[[tuple], int], budget: int = DEFAULT_BUDGET):
        if n ** L > budget:
            raise BudgetError(f"table of {n}^{L} entries exceeds budget {budget}")
        return cls(n, m, L, [fn(t) for t in itertools.product(range(n), repeat=L)])

    @property
    def arity(self) -> int:
        return self.L

    def index(self, a: Sequence[int]) -> int:
        if len(a) != self.L:
            raise ValueError(f"expected {self.L} arguments, got {len(a)}")
        i = 0
        for x in a:
            if not 0 <= x < self.n:
                raise ValueError(f"argument {x} outside the domain")
            i = i * self.n + x
        return i

    def __call__(self, *a) -> int:
        if len(a) == 1 and isinstance(a[0], (tuple, list)):
            a = tuple(a[0])
        return int(self.table[self.index(a)])

    def eval_blocks(self, blocks: Sequence[tuple[int, int]]) -> int:
        """Evaluate on the tuple made of ``count`` copies of each ``value`` in order."""
        return self(tuple(v for v, c in blocks for _ in range(c)))

    def minor(self, pi: Sequence[int], L2: int) -> "FiniteFunction":
        """The minor g(b_1..b_L2) = f(b_pi(1), ..., b_pi(L)) for pi: [L] -> [L2]."""
        pi = _check_map(pi, self.L, L2)
        T = all_tuples(self.n, L2)
        return FiniteFunction(self.n, self.m, L2, self.table[encode(T[:, list(pi)], self.n)])

    def __eq__(self, other) -> bool:
        return (isinstance(other, FiniteFunction) and (self.n, self.m, self.L) == (other.n, other.m, other.L)
                and np.array_equal(self.table, other.table))

    def __repr__(self) -> str:
        return f"FiniteFunction(n={self.n}, m={self.m}, L={self.L})"


class LazyFunction:
    """An operation evaluated on demand, for arities whose table is out of reach.

    ``blocks_fn``, when given, evaluates directly on a run-length encoded
    input and avoids building long tuples.
    """

    def __init__(self, n: int, m: int, L: int, fn: Callable[[tuple], int] | None = None,
                 blocks_fn: Callable[[Sequence[tuple[int, int]]], int] | None = None):
        if fn is None and blocks_fn is None:
            raise ValueError("need fn or blocks_fn")
        self.n, self.m, self.L = n, m, L
        self._fn, self._blocks_fn = fn, blocks_fn

    @property
    def arity(self) -> int:
        return self.L

    def __call__(self, *a) -> int:
        if len(a) == 1 and isinstance(a[0], (tuple, list)):
            a = tuple(a[0])
        if len(a) != self.L:
            raise ValueError(f"expected {self.L} arguments, got {len(a)}")
        if self._fn is not None:
            return self._fn(a)
        return self._blocks_fn([(x, 1) for x in a])

    def eval_blocks(self, blocks: Sequence[tuple[int, int]]) -> int:
        if self._blocks_fn is not None:
            if sum(c for _, c in blocks) != self.L:
                raise ValueError("block sizes do not add up to the arity")
            return self._blocks_fn(blocks)
        return self(tuple(v for v, c in blocks for _ in range(c)))

    def minor(self, pi: Sequence[int], L2: int) -> "LazyFunction":
        pi = _check_map(pi, self.L, L2)

        def g(b):
            # group consecutive equal arguments so long arities stay cheap
            blocks: list[list[int]] = []
            for j in pi:
                x = b[j]
                if blocks and blocks[-1][0] == x:
                    blocks[-1][1] += 1
                else:
                    blocks.append([x, 1])
            return self.eval_blocks([tuple(bl) for bl in blocks])

        return LazyFunction(self.n, self.m, L2, g)

    def materialize(self, budget: int = DEFAULT_BUDGET) -> FiniteFunction:
        return FiniteFunction.from_callable(self.n, self.m, self.L, self, budget)


def _check_map(pi: Sequence[int], L: int, L2: int) -> tuple[int, ...]:
    pi = tuple(int(j) for j in pi)
    if len(pi) != L or any(not 0 <= j < L2 for j in pi):
        raise ValueError(f"pi must map {L} coordinates into range({L2})")
    return pi


# --- polymorphisms -----------------------------------------------------------

def _relations(A: RelationalStructure, B: RelationalStructure):
    if not A.signature.same_as(B.signature):
        raise StructureError("A and B have different signatures")
    for sym, k in A.signature.symbols:
        if sym != UNARY:
            yield sym, k


def polymorphism_counterexample(f: FiniteFunction, A: RelationalStructure, B: RelationalStructure,
                                budget: int = DEFAULT_BUDGET):
    """First (symbol, rows) whose column-wise image leaves R^B, or None."""
    if f.n != A.size or f.m != B.size:
        raise ValueError(f"function is {f.n}->{f.m} but template is {A.size}->{B.size}")
    L = f.L
    for sym, k in _relations(A, B):
        RA = np.array(A[sym], dtype=np.int64).reshape(-1, k)
        r = RA.shape[0]
        if r == 0:
            continue
        if r ** L > budget:
            raise BudgetError(f"too large: {r}^{L} row choices for {sym!r} exceed budget {budget}")
        allowed = encode(np.array(B[sym], dtype=np.int64).reshape(-1, k), f.m)
        inner = 0
        while inner < L and r ** (inner + 1) <= _CHUNK:
            inner += 1
        # column codes for the last `inner` rows, shape (r^inner, k)
        tail = np.zeros((1, k), dtype=np.int64)
        for _ in range(inner):
            tail = (tail[:, None, :] * f.n + RA[None, :, :]).reshape(-1, k)
        shift = f.n ** inner
        for head in itertools.product(range(r), repeat=L - inner):
            base = np.zeros(k, dtype=np.int64)
            for ri in head:
                base = base * f.n + RA[ri]
            out = f.table[base[None, :] * shift + tail]
            ok = np.isin(encode(out, f.m), allowed)
            if not ok.all():
                bad = int(np.argmin(ok))
                rest = np.unravel_index(bad, (r,) * inner) if inner else ()
                rows = [A[sym][i] for i in head] + [A[sym][int(i)] for i in rest]
                return sym, rows
    return None


def is_polymorphism(f: FiniteFunction, A: RelationalStructure, B: RelationalStructure,
                    budget: int = DEFAULT_BUDGET) -> bool:
    return polymorphism_counterexample(f, A, B, budget) is None


def enumerate_polymorphisms(A: RelationalStructure, B: RelationalStructure, L: int,
                            budget: int = DEFAULT_BUDGET) -> Iterator[FiniteFunction]:
    """All L-ary polymorphisms in lexicographic table order.

    Backtracks over table entries; each row choice is checked as soon as the
    last table entry it reads is filled.
    """
    n, m = A.size, B.size
    size = n ** L
    if size > budget:
        raise BudgetError(f"table of {n}^{L} entries exceeds budget {budget}")
    checks: list[list[tuple[tuple[int, ...], frozenset]]] = [[] for _ in range(size)]
    total = 0
    for sym, k in _relations(A, B):
        rows = A[sym]
        total += len(rows) ** L
        if total > budget:
            raise BudgetError(f"too large: row choices exceed budget {budget}")
        allowed = frozenset(B[sym])
        seen = set()
        for choice in itertools.product(rows, repeat=L):
            idx = tuple(sum(choice[l][c] * n ** (L - 1 - l) for l in range(L)) for c in range(k))
            if (idx, sym) in seen:
                continue
            seen.add((idx, sym))
            checks[max(idx)].append((idx, allowed))
    table = [0] * size

    def ok(p: int) -> bool:
        return all(tuple(table[i] for i in idx) in allowed for idx, allowed in checks[p])

    def search(p: int):
        if p == size:
            yield FiniteFunction(n, m, L, table)
            return
        for v in range(m):
            table[p] = v
            if ok(p):
                yield from search(p + 1)

    yield from search(0)


# --- multiplicities and ties -------------------------------------------------

def multiplicity_vector(a: Sequence[int], n: int) -> tuple[int, ...]:
    counts = [0] * n
    for x in a:
        counts[x] += 1
    return tuple(counts)


def is_tieless(v: Sequence) -> bool:
    """No nonzero entry equals another entry."""
    nz = [x for x in v if x != 0]
    return len(set(nz)) == len(nz)


def is_tie_matrix(H: Sequence[Sequence[int]]) -> bool:
    if not H or not H[0]:
        return False
    p = len(H[0])
    if any(len(row) != p for row in H):
        return False
    if any(not isinstance(x, (int, np.integer)) or x < 0 for row in H for x in row):
        return False
    return all(is_tieless([row[j] for row in H]) for j in range(p))


def mat_vec(H: Sequence[Sequence], v: Sequence) -> list:
    return [sum((h * x for h, x in zip(row, v)), 0) for row in H]


def is_h_tieless(H: Sequence[Sequence[int]], v: Sequence) -> bool:
    if len(H[0]) != len(v):
        raise ValueError(f"H has {len(H[0])} columns but v has {len(v)} entries")
    return is_tieless(mat_vec(H, v))


def _tieless_rows(X: np.ndarray) -> np.ndarray:
    S = np.sort(X, axis=1)
    clash = (S[:, 1:] == S[:, :-1]) & (S[:, 1:] != 0)
    return ~clash.any(axis=1)


def _check_h(H, n: int) -> np.ndarray:
    Hm = np.asarray(H, dtype=np.int64)
    if Hm.ndim != 2 or Hm.shape[1] != n:
        raise ValueError(f"H must have {n} columns")
    return Hm


def h_symmetry_counterexample(f: FiniteFunction, H) -> tuple[int, ...] | None:
    """An input with H-tieless multiplicities on which f differs from f(sorted input)."""
    Hm = _check_h(H, f.n)
    T = all_tuples(f.n, f.L)
    counts = np.stack([(T == a).sum(axis=1) for a in range(f.n)], axis=1)
    mask = _tieless_rows(counts @ Hm.T)
    sorted_idx = encode(np.sort(T, axis=1), f.n)
    bad = mask & (f.table != f.table[sorted_idx])
    if bad.any():
        return tuple(int(x) for x in T[int(np.argmax(bad))])
    return None


def is_h_symmetric(f: FiniteFunction, H) -> bool:
    return h_symmetry_counterexample(f, H) is None


# --- symmetry classes -------------------------------------------------------

def _invariant_under(f: FiniteFunction, canon: np.ndarray) -> bool:
    return bool(np.array_equal(f.table, f.table[encode(canon, f.n)]))


def _two_block_canon(T: np.ndarray) -> np.ndarray:
    C = T.copy()
    C[:, 0::2] = np.sort(T[:, 0::2], axis=1)
    C[:, 1::2] = np.sort(T[:, 1::2], axis=1)
    return C


def check_symmetry_class(f: FiniteFunction, cls: str) -> bool:
    """Exhaustive check of ``symmetric``, ``two_block_symmetric`` or ``alternating``.

    Alternating needs odd arity; an even-arity function is never alternating.
    """
    T = all_tuples(f.n, f.L)
    if cls == "symmetric":
        return _invariant_under(f, np.sort(T, axis=1))
    if cls == "two_block_symmetric":
        return _invariant_under(f, _two_block_canon(T))
    if cls == "alternating":
        if f.L % 2 == 0:
            return False
        if not _invariant_under(f, _two_block_canon(T)):
            return False
        if f.L == 1:
            return True
        tab = f.table.reshape(-1, f.n, f.n)
        diag = tab[:, np.arange(f.n), np.arange(f.n)]
        return bool((diag == diag[:, :1]).all())
    raise ValueError(f"unknown symmetry class {cls!r}")


# --- fixtures ----------------------------------------------------------------

EXAMPLE_DIGRAPH = ((2, 3), (3, 2), (4, 5), (5, 6), (6, 4))
EXAMPLE_H = tuple(tuple(int(i == j) * (2 if i == 1 else 1) for j in range(7)) for i in range(7))


def example_template() -> PcspTemplate:
    """Seven elements; 1-in-3 versus NAE on {0,1} plus a shared 2-cycle and 3-cycle."""
    sig = Signature((("R1", 3), ("R2", 2)))
    A = RelationalStructure(sig, 7, {"R1": ONE_IN_THREE, "R2": EXAMPLE_DIGRAPH}, "example-A")
    B = RelationalStructure(sig, 7, {"R1": NAE, "R2": EXAMPLE_DIGRAPH}, "example-B")
    T = validate_template(A, B)
    assert T.witness == Homomorphism(tuple(range(7)))
    return T


def one_in_three_nae() -> PcspTemplate:
    sig = Signature((("R1", 3),))
    return validate_template(RelationalStructure(sig, 2, {"R1": ONE_IN_THREE}, "1in3"),
                             RelationalStructure(sig, 2, {"R1": NAE}, "nae"))


def example_value(blocks: Sequence[tuple[int, int]]) -> int:
    """The example polymorphism on a run-length encoded input."""
    blocks = [(v, c) for v, c in blocks if c > 0]
    L = sum(c for _, c in blocks)
    first = blocks[0][0]
    counts = [0] * 7
    for v, c in blocks:
        counts[v] += c
    if counts[0] + counts[1] == L:
        if 3 * counts[1] < L:
            return 0
        if 3 * counts[1] > L:
            return 1
        return first
    if counts[0] + counts[1] == 0:
        top = max(counts)
        winners = [a for a in range(2, 7) if counts[a] == top]
        return winners[0] if len(winners) == 1 else first
    return 0  # mixed inputs: any value works, we pick 0


def example_polymorphism(L: int, budget: int = DEFAULT_BUDGET) -> FiniteFunction:
    if L < 1:
        raise ValueError("arity must be positive")
    if 7 ** L > budget:
        raise BudgetError(f"table of 7^{L} entries exceeds budget {budget}")
    T = all_tuples(7, L)
    first = T[:, 0]
    c1 = (T == 1).sum(axis=1)
    boolean = (T <= 1).all(axis=1)
    upper = (T >= 2).all(axis=1)
    out = np.zeros(T.shape[0], dtype=np.int64)
    out = np.where(boolean & (3 * c1 > L), 1, out)
    out = np.where(boolean & (3 * c1 == L), first, out)
    counts = np.stack([(T == a).sum(axis=1) for a in range(2, 7)], axis=1)
    top = counts.max(axis=1)
    unique = (counts == top[:, None]).sum(axis=1) == 1
    plural = np.where(unique, counts.argmax(axis=1) + 2, first)
    out = np.where(upper, plural, out)
    return FiniteFunction(7, 7, L, out)


def lazy_example_polymorphism(L: int) -> LazyFunction:
    """Same function for any arity, evaluated on demand."""
    return LazyFunction(7, 7, L, blocks_fn=example_value)


def aip_polymorphism(L: int) -> FiniteFunction:
    """[a1 - a2 + a3 - ... + aL > 0] on {0,1}, for odd L."""
    if L < 1 or L % 2 == 0:
        raise ValueError("arity must be odd and positive")
    T = all_tuples(2, L)
    signs = np.array([1 if i % 2 == 0 else -1 for i in range(L)])
    return FiniteFunction(2, 2, L, (T @ signs > 0).astype(np.int64))


def projection(n: int, L: int, i: int = 0) -> FiniteFunction:
    return FiniteFunction(n, n, L, all_tuples(n, L)[:, i])


# --- files -------------------------------------------------------------------

def serialize_function(f: FiniteFunction, name: str = "f") -> str:
    lines = [f"fn {name} arity {f.L} dom {f.n} cod {f.m}"]
    lines.extend(f"v {int(x)}" for x in f.table)
    return "\n".join(lines) + "\n"


def parse_function(text: str) -> FiniteFunction:
    lines = list(_lines(text))
    if not lines:
        raise StructureError("empty document", 1, 1)
    ln, tk = lines[0]
    words = [t[0] for t in tk]
    if len(tk) != 8 or words[0] != "fn" or words[2] != "arity" or words[4] != "dom" or words[6] != "cod":
        raise StructureError("expected 'fn <name> arity <L> dom <n> cod <m>'", ln, tk[0][1])
    L, n, m = (_int(tk[i], ln, w) for i, w in ((3, "arity"), (5, "domain size"), (7, "codomain size")))
    if n < 1 or m < 1 or L < 0:
        raise StructureError("arity, domain and codomain must be positive", ln, tk[0][1])
    values = []
    for ln, tk in lines[1:]:
        if tk[0][0] != "v" or len(tk) != 2:
            raise StructureError("expected 'v <output>'", ln, tk[0][1])
        x = _int(tk[1], ln, "output")
        if not 0 <= x < m:
            raise StructureError(f"output {x} outside codomain of size {m}", ln, tk[1][1])
        values.append(x)
    if len(values) != n ** L:
        raise StructureError(f"expected {n ** L} 'v' lines, found {len(values)}", lines[-1][0], 1)
    return FiniteFunction(n, m, L, values)


def serialize_tie_matrix(H: Sequence[Sequence[int]]) -> str:
    lines = [f"tiem {len(H)} {len(H[0]) if H else 0}"]
    lines.extend(" ".join(str(int(x)) for x in row) for row in H)
    return "\n".join(lines) + "\n"


def parse_tie_matrix(text: str) -> list[list[int]]:
    lines = list(_lines(text))
    if not lines or lines[0][1][0][0] != "tiem" or len(lines[0][1]) != 3:
        ln = lines[0][0] if lines else 1
        raise StructureError("expected 'tiem <m> <p>'", ln, 1)
    ln, tk = lines[0]
    m, p = _int(tk[1], ln, "row count"), _int(tk[2], ln, "column count")
    rows = []
    for ln, tk in lines[1:]:
        if len(tk) != p:
            raise StructureError(f"expected {p} entries, found {len(tk)}", ln, tk[0][1])
        rows.append([_int(t, ln, "entry") for t in tk])
    if len(rows) != m:
        raise StructureError(f"expected {m} rows, found {len(rows)}", lines[-1][0], 1)
    if not is_tie_matrix(rows):
        raise StructureError("not a tie matrix (entries must be nonnegative and columns tieless)", ln, 1)
    return rows
