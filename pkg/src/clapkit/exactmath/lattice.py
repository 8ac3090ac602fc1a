"""Integer linear systems via column-style Hermite normal form."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

IntMatrix = list[list[int]]


@dataclass
class IntegerSystem:
    """``E tau = d`` over the integers, with ``zero_set`` variables forced to 0."""

    num_vars: int
    var_names: list[Hashable] = field(default_factory=list)
    equalities: list[tuple[dict[int, int], int]] = field(default_factory=list)
    zero_set: set[int] = field(default_factory=set)

    def __post_init__(self):
        if not self.var_names:
            self.var_names = list(range(self.num_vars))

    def add_equality(self, row: dict[int, int], rhs: int = 0) -> None:
        for j in row:
            if not 0 <= j < self.num_vars:
                raise IndexError(f"row index {j} out of range")
        self.equalities.append(({j: int(c) for j, c in row.items() if c}, int(rhs)))

    def is_solution(self, tau: Sequence[int]) -> bool:
        if len(tau) != self.num_vars or any(tau[j] != 0 for j in self.zero_set):
            return False
        return all(sum(c * tau[j] for j, c in row.items()) == rhs for row, rhs in self.equalities)


def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(X: IntMatrix, Y: IntMatrix) -> IntMatrix:
    inner = len(Y)
    cols = len(Y[0]) if Y else 0
    return [[sum(row[k] * Y[k][j] for k in range(inner)) for j in range(cols)] for row in X]


def det(M: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(M)
    if n == 0:
        return 1
    A = [list(r) for r in M]
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def _hnf_columns(M: IntMatrix, ncols: int):
    """Column operations on M (m x ncols) stored column-major.

    Returns (H columns, U columns, pivot rows) with pivots strictly positive,
    zeros to the right of each pivot and reduced entries in [0, pivot) to the
    left of it.
    """
    m = len(M)
    H = [[M[i][j] for i in range(m)] for j in range(ncols)]
    U = [[int(i == j) for i in range(ncols)] for j in range(ncols)]

    def axpy(dst: int, q: int, src: int) -> None:
        # column dst -= q * column src
        hd, hs = H[dst], H[src]
        for i in range(m):
            if hs[i]:
                hd[i] -= q * hs[i]
        ud, us = U[dst], U[src]
        for i in range(ncols):
            if us[i]:
                ud[i] -= q * us[i]

    pivots: list[int] = []
    col = 0
    for r in range(m):
        if col == ncols:
            break
        while True:
            nz = [j for j in range(col, ncols) if H[j][r] != 0]
            if not nz:
                break
            j = min(nz, key=lambda j: (abs(H[j][r]), j))
            if j != col:
                H[col], H[j] = H[j], H[col]
                U[col], U[j] = U[j], U[col]
            done = True
            for k in range(col + 1, ncols):
                if H[k][r]:
                    axpy(k, H[k][r] // H[col][r], col)
                    if H[k][r]:
                        done = False
            if done:
                break
        if H[col][r] == 0:
            continue
        if H[col][r] < 0:
            H[col] = [-x for x in H[col]]
            U[col] = [-x for x in U[col]]
        p = H[col][r]
        for k in range(col):
            q = H[k][r] // p
            if q:
                axpy(k, q, col)
        pivots.append(r)
        col += 1
    return H, U, pivots


def hnf(M: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Column-style Hermite normal form: returns (H, U) with H = M U, U unimodular."""
    m = len(M)
    n = len(M[0]) if m else 0
    Hc, Uc, _ = _hnf_columns(M, n)
    H = [[Hc[j][i] for j in range(n)] for i in range(m)]
    U = [[Uc[j][i] for j in range(n)] for i in range(n)]
    return H, U


def integer_solve(s: IntegerSystem) -> list[int] | None:
    """One integer solution of ``s`` or None when d is outside the column lattice."""
    live = [j for j in range(s.num_vars) if j not in s.zero_set]
    pos = {j: k for k, j in enumerate(live)}
    rows: IntMatrix = []
    rhs: list[int] = []
    for row, d in s.equalities:
        r = [0] * len(live)
        for j, c in row.items():
            if j in pos:
                r[pos[j]] = c
        if not any(r):
            if d != 0:
                return None
            continue
        rows.append(r)
        rhs.append(d)
    n = len(live)
    if not rows:
        return [0] * s.num_vars
    H, U, pivots = _hnf_columns(rows, n)
    # forward substitution on H y = d
    y = [0] * n
    k = 0
    for r in range(len(rows)):
        acc = rhs[r] - sum(H[j][r] * y[j] for j in range(k))
        if k < len(pivots) and pivots[k] == r:
            p = H[k][r]
            if acc % p:
                return None
            y[k] = acc // p
            k += 1
        elif acc != 0:
            return None
    tau = [0] * s.num_vars
    for jj, j in enumerate(live):
        tau[j] = sum(U[c][jj] * y[c] for c in range(k) if y[c])
    return tau


def dump_system(s: IntegerSystem, label=str) -> str:
    out = [f"ip vars {s.num_vars} rows {len(s.equalities)} zeros {len(s.zero_set)}"]
    for j in sorted(s.zero_set):
        out.append(f"zero {label(s.var_names[j])}")
    for row, d in s.equalities:
        terms = " ".join(f"{'+' if c > 0 else '-'}{abs(c)}*{label(s.var_names[j])}" for j, c in sorted(row.items()))
        out.append(f"eq {terms} = {d}")
    return "\n".join(out) + "\n"
