"""Exact rational linear programming over ``{x : Ax = b, lo <= x <= hi}``.

Two-phase primal simplex with Bland's rule on a sparse tableau.  All numbers
are ``gmpy2.mpq``, which normalizes after every operation.  A presolve pass
substitutes fixed variables and propagates forced zeros before any pivoting;
on the box-plus-stochastic systems built by the relaxations this usually
removes most of the problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

from gmpy2 import mpq

Rational = type(mpq(0))
ZERO = mpq(0)
ONE = mpq(1)


class InfeasibleError(ValueError):
    pass


@dataclass
class LpProblem:
    """Equality-constrained LP with per-variable bounds.

    ``equalities`` holds ``(row, rhs)`` pairs where ``row`` maps variable
    index to coefficient.  ``upper`` may contain ``None`` for unbounded.
    """

    num_vars: int
    var_names: list[Hashable] = field(default_factory=list)
    equalities: list[tuple[dict[int, Rational], Rational]] = field(default_factory=list)
    lower: list[Rational] = field(default_factory=list)
    upper: list[Rational | None] = field(default_factory=list)

    def __post_init__(self):
        if not self.lower:
            self.lower = [ZERO] * self.num_vars
        if not self.upper:
            self.upper = [ONE] * self.num_vars
        if not self.var_names:
            self.var_names = list(range(self.num_vars))

    def add_equality(self, row: dict[int, object], rhs: object = 0) -> None:
        for j in row:
            if not 0 <= j < self.num_vars:
                raise IndexError(f"row index {j} out of range")
        self.equalities.append(({j: mpq(c) for j, c in row.items() if c != 0}, mpq(rhs)))

    def fix(self, j: int, value: object) -> None:
        self.lower[j] = self.upper[j] = mpq(value)

    def copy(self) -> "LpProblem":
        return LpProblem(self.num_vars, self.var_names, self.equalities, list(self.lower), list(self.upper))

    def residuals(self, x: Sequence[Rational]) -> list[Rational]:
        return [sum((c * x[j] for j, c in row.items()), ZERO) - rhs for row, rhs in self.equalities]

    def is_feasible_point(self, x: Sequence[Rational]) -> bool:
        if len(x) != self.num_vars:
            return False
        for j, v in enumerate(x):
            if v < self.lower[j] or (self.upper[j] is not None and v > self.upper[j]):
                return False
        return all(r == 0 for r in self.residuals(x))


# --- presolve --------------------------------------------------------------

class _Reduced:
    """Problem in ``y >= 0`` form after shifting by lower bounds and fixing."""

    def __init__(self, p: LpProblem):
        self.p = p
        self.n = p.num_vars
        self.fixed: dict[int, Rational] = {}
        self.infeasible = False
        # y_j = x_j - lo_j ; cap_j = hi_j - lo_j
        self.cap: list[Rational | None] = []
        for j in range(self.n):
            lo, hi = p.lower[j], p.upper[j]
            if hi is not None and hi < lo:
                self.infeasible = True
                return
            self.cap.append(None if hi is None else hi - lo)
            if hi is not None and hi == lo:
                self.fixed[j] = ZERO
        self.rows: list[tuple[dict[int, Rational], Rational]] = []
        for row, rhs in p.equalities:
            shift = sum((c * p.lower[j] for j, c in row.items()), ZERO)
            self.rows.append((dict(row), rhs - shift))
        self._propagate()

    def _fix(self, j: int, value: Rational) -> bool:
        if value < 0 or (self.cap[j] is not None and value > self.cap[j]):
            self.infeasible = True
            return False
        old = self.fixed.get(j)
        if old is not None and old != value:
            self.infeasible = True
            return False
        self.fixed[j] = value
        return True

    def _propagate(self) -> None:
        changed = True
        while changed and not self.infeasible:
            changed = False
            kept = []
            for row, rhs in self.rows:
                if any(j in self.fixed for j in row):
                    rhs = rhs - sum((c * self.fixed[j] for j, c in row.items() if j in self.fixed), ZERO)
                    row = {j: c for j, c in row.items() if j not in self.fixed}
                if not row:
                    if rhs != 0:
                        self.infeasible = True
                        return
                    continue
                if len(row) == 1:
                    (j, c), = row.items()
                    if not self._fix(j, rhs / c):
                        return
                    changed = True
                    continue
                signs = {c > 0 for c in row.values()}
                if len(signs) == 1:
                    pos = signs.pop()
                    if (rhs < 0 and pos) or (rhs > 0 and not pos):
                        self.infeasible = True
                        return
                    if rhs == 0:
                        for j in row:
                            if not self._fix(j, ZERO):
                                return
                        changed = True
                        continue
                kept.append((row, rhs))
            self.rows = kept

    def implied_caps(self) -> dict[int, Rational]:
        """Upper bounds implied by rows with all-positive coefficients."""
        best: dict[int, Rational] = {}
        for row, rhs in self.rows:
            if all(c > 0 for c in row.values()):
                for j, c in row.items():
                    b = rhs / c
                    if j not in best or b < best[j]:
                        best[j] = b
        return best

    def lift(self, y: dict[int, Rational]) -> list[Rational]:
        x = []
        for j in range(self.n):
            v = self.fixed.get(j, y.get(j, ZERO))
            x.append(self.p.lower[j] + v)
        return x


# --- simplex ---------------------------------------------------------------

class _Tableau:
    """Sparse tableau for ``min c.z  s.t.  Az = b, z >= 0`` (b >= 0)."""

    def __init__(self, rows: list[dict[int, Rational]], rhs: list[Rational], basis: list[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.pivots = 0

    def set_objective(self, cost: dict[int, Rational]) -> None:
        obj = dict(cost)
        val = ZERO
        for i, b in enumerate(self.basis):
            cb = cost.get(b)
            if cb:
                for j, a in self.rows[i].items():
                    obj[j] = obj.get(j, ZERO) - cb * a
                val -= cb * self.rhs[i]
        self.obj = {j: c for j, c in obj.items() if c != 0}
        self.obj_val = val  # equals -(objective value)

    def pivot(self, r: int, c: int) -> None:
        self.pivots += 1
        prow = self.rows[r]
        piv = prow[c]
        if piv != 1:
            inv = ONE / piv
            prow = {j: a * inv for j, a in prow.items()}
            self.rows[r] = prow
            self.rhs[r] = self.rhs[r] * inv
        pb = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row.get(c)
            if f is None:
                continue
            for j, a in prow.items():
                v = row.get(j, ZERO) - f * a
                if v:
                    row[j] = v
                else:
                    row.pop(j, None)
            self.rhs[i] -= f * pb
        f = self.obj.get(c)
        if f is not None:
            for j, a in prow.items():
                v = self.obj.get(j, ZERO) - f * a
                if v:
                    self.obj[j] = v
                else:
                    self.obj.pop(j, None)
            self.obj_val -= f * pb
        self.basis[r] = c

    def run(self, allowed=None) -> str:
        """Bland's rule: least-index entering column, least-index leaving basic."""
        while True:
            entering = None
            for j, c in self.obj.items():
                if c < 0 and (allowed is None or j in allowed) and (entering is None or j < entering):
                    entering = j
            if entering is None:
                return "optimal"
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if a is not None and a > 0:
                    ratio = self.rhs[i] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            self.pivot(best[1], entering)


class _Solver:
    """Phase 1 on the presolved problem; optional phase 2."""

    def __init__(self, p: LpProblem):
        self.red = _Reduced(p)
        self.pivots = 0
        self.tab = None
        if self.red.infeasible:
            return
        cols = [j for j in range(p.num_vars) if j not in self.red.fixed]
        implied = self.red.implied_caps()
        rows: list[dict[int, Rational]] = []
        rhs: list[Rational] = []
        for row, b in self.red.rows:
            rows.append(dict(row))
            rhs.append(b)
        next_col = p.num_vars
        for j in cols:
            cap = self.red.cap[j]
            if cap is not None and not (j in implied and implied[j] <= cap):
                rows.append({j: ONE, next_col: ONE})
                rhs.append(cap)
                next_col += 1
        self.num_struct = next_col
        basis = []
        for i in range(len(rows)):
            if rhs[i] < 0:
                rows[i] = {j: -a for j, a in rows[i].items()}
                rhs[i] = -rhs[i]
            rows[i][next_col] = ONE
            basis.append(next_col)
            next_col += 1
        self.tab = _Tableau(rows, rhs, basis)
        self.tab.set_objective({b: ONE for b in basis})
        self.tab.run()
        self.pivots = self.tab.pivots
        if self.tab.obj_val != 0:
            self.red.infeasible = True
            self.tab = None
            return
        self._drive_out_artificials()

    def _drive_out_artificials(self) -> None:
        tab = self.tab
        keep = []
        for i in range(len(tab.rows)):
            if tab.basis[i] < self.num_struct:
                keep.append(i)
                continue
            col = next((j for j in sorted(tab.rows[i]) if j < self.num_struct), None)
            if col is None:
                continue  # redundant row, rhs is 0 here
            tab.pivot(i, col)
            keep.append(i)
        tab.rows = [{j: a for j, a in tab.rows[i].items() if j < self.num_struct} for i in keep]
        tab.rhs = [tab.rhs[i] for i in keep]
        tab.basis = [tab.basis[i] for i in keep]

    @property
    def feasible(self) -> bool:
        return not self.red.infeasible

    def point(self) -> list[Rational]:
        y = {}
        for i, b in enumerate(self.tab.basis):
            if b < self.red.n:
                y[b] = self.tab.rhs[i]
        return self.red.lift(y)

    def maximize(self, var: int) -> Rational:
        if var in self.red.fixed:
            return self.red.p.lower[var] + self.red.fixed[var]
        self.tab.set_objective({var: -ONE})
        status = self.tab.run()
        self.pivots = self.tab.pivots
        if status == "unbounded":
            raise ValueError(f"variable {var} is unbounded")
        return self.red.p.lower[var] + self.tab.obj_val


def lp_feasible(p: LpProblem) -> list[Rational] | None:
    """Exact feasible point of ``p`` or None if the polytope is empty."""
    s = _Solver(p)
    if not s.feasible:
        return None
    return s.point()


def lp_maximize(p: LpProblem, var: int) -> tuple[Rational, list[Rational]]:
    s = _Solver(p)
    if not s.feasible:
        raise InfeasibleError("infeasible")
    opt = s.maximize(var)
    return opt, s.point()


def relative_interior_point(p: LpProblem, exhaustive: bool = False) -> list[Rational] | None:
    """A feasible point whose zero coordinates are exactly the forced zeros.

    Averages a feasible point with one maximizer per coordinate that is not
    identically zero.  By default coordinates already positive in a collected
    point are not maximized again; ``exhaustive=True`` maximizes every one.
    """
    s = _Solver(p)
    if not s.feasible:
        return None
    points = [s.point()]
    positive = {j for j, v in enumerate(points[0]) if v > 0}
    for j in range(p.num_vars):
        if j in positive and not exhaustive:
            continue
        if j in s.red.fixed and s.red.fixed[j] == 0 and p.lower[j] == 0:
            continue
        if s.maximize(j) > 0:
            pt = s.point()
            points.append(pt)
            positive.update(i for i, v in enumerate(pt) if v > 0)
    k = len(points)
    return [sum((pt[j] for pt in points), ZERO) / k for j in range(p.num_vars)]


def support(x: Sequence[Rational]) -> frozenset[int]:
    return frozenset(j for j, v in enumerate(x) if v != 0)


def dump_lp(p: LpProblem, label=str) -> str:
    """Plain-text tableau dump for debugging."""
    out = [f"lp vars {p.num_vars} rows {len(p.equalities)}"]
    for j in range(p.num_vars):
        hi = "inf" if p.upper[j] is None else str(p.upper[j])
        out.append(f"var {label(p.var_names[j])} [{p.lower[j]}, {hi}]")
    for row, rhs in p.equalities:
        terms = " ".join(f"{'+' if c > 0 else '-'}{abs(c)}*{label(p.var_names[j])}" for j, c in sorted(row.items()))
        out.append(f"eq {terms} = {rhs}")
    return "\n".join(out) + "\n"
