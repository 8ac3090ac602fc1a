"""Exact rational LP and integer lattice solving."""

from .lattice import IntegerSystem, det, dump_system, hnf, identity, integer_solve, matmul
from .lp import (
    ONE,
    ZERO,
    InfeasibleError,
    LpProblem,
    Rational,
    dump_lp,
    lp_feasible,
    lp_maximize,
    relative_interior_point,
    support,
)

__all__ = [
    "IntegerSystem", "det", "dump_system", "hnf", "identity", "integer_solve", "matmul",
    "ONE", "ZERO", "InfeasibleError", "LpProblem", "Rational", "dump_lp", "lp_feasible",
    "lp_maximize", "relative_interior_point", "support",
]
