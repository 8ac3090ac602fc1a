import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clapkit import polymorph as pm
from clapkit.structures import StructureError


def brute_is_polymorphism(f, A, B):
    """Row-by-row oracle using plain tuples."""
    for sym, k in A.signature.symbols:
        for rows in itertools.product(A[sym], repeat=f.L):
            out = tuple(f(tuple(r[c] for r in rows)) for c in range(k))
            if out not in B[sym]:
                return False
    return True


def negation(L):
    return pm.FiniteFunction.from_callable(2, 2, L, lambda t: 1 - t[0])


def test_negation_and_identity_on_boolean_template(one_nae):
    A, B = one_nae.A, one_nae.B
    assert pm.is_polymorphism(negation(1), A, B)
    assert pm.is_polymorphism(pm.projection(2, 1), A, B)
    found = list(pm.enumerate_polymorphisms(A, B, 1))
    assert [list(f.table) for f in found] == [[0, 1], [1, 0]]
    # constants never survive: a 1-in-3 row maps to a constant triple
    assert not pm.is_polymorphism(pm.FiniteFunction(2, 2, 1, [1, 1]), A, B)


def test_unary_polymorphisms_of_example(example):
    found = list(pm.enumerate_polymorphisms(example.A, example.B, 1))
    assert len(found) >= 1 and found[0] == pm.projection(7, 1)
    assert all(brute_is_polymorphism(f, example.A, example.B) for f in found)


@pytest.mark.parametrize("L", [1, 3, 5, 7])
def test_alternating_threshold_is_polymorphism(one_nae, L):
    f = pm.aip_polymorphism(L)
    assert pm.is_polymorphism(f, one_nae.A, one_nae.B)
    assert pm.check_symmetry_class(f, "alternating")


def test_aip_family_needs_odd_arity():
    with pytest.raises(ValueError):
        pm.aip_polymorphism(2)


def test_enumeration_agrees_with_oracle(one_nae):
    A, B = one_nae.A, one_nae.B
    fast = {tuple(f.table) for f in pm.enumerate_polymorphisms(A, B, 2)}
    slow = {t for t in itertools.product(range(2), repeat=4)
            if brute_is_polymorphism(pm.FiniteFunction(2, 2, 2, t), A, B)}
    assert fast == slow


def test_counterexample_is_a_real_violation(example):
    f = pm.projection(7, 3, 1).minor((0, 1, 2), 3)
    bad = pm.FiniteFunction(7, 7, 2, [0] * 49)
    sym, rows = pm.polymorphism_counterexample(bad, example.A, example.B)
    out = tuple(bad(tuple(r[c] for r in rows)) for c in range(len(rows[0])))
    assert out not in example.B[sym]
    assert pm.is_polymorphism(f, example.A, example.B)


@pytest.mark.parametrize("L", [1, 2, 3, 4, 5])
def test_example_polymorphism(example, L):
    f = pm.example_polymorphism(L)
    assert pm.is_polymorphism(f, example.A, example.B)
    assert pm.is_h_symmetric(f, pm.EXAMPLE_H)
    lazy = pm.lazy_example_polymorphism(L)
    rng = random.Random(L)
    for _ in range(50):
        a = tuple(rng.randrange(7) for _ in range(L))
        assert lazy(a) == f(a)


def test_example_values():
    f3 = pm.example_polymorphism(3)
    assert f3(0, 0, 1) == 0
    assert f3(0, 1, 1) == 1
    assert f3(4, 4, 5) == 4
    assert f3(2, 3, 4) == 2  # three-way tie falls back to the first argument
    f2 = pm.example_polymorphism(2)
    assert f2(0, 3) == 0
    assert pm.example_value([(1, 1), (0, 2)]) == 1  # exact third goes to the first
    assert pm.example_value([(0, 1), (1, 1), (0, 1)]) == 0


def test_example_is_not_symmetric():
    # exact-third inputs depend on the first argument
    f = pm.example_polymorphism(3)
    assert not pm.check_symmetry_class(f, "symmetric")
    assert pm.h_symmetry_counterexample(f, [[1] * 7]) is not None


def test_multiplicity_and_ties():
    assert pm.multiplicity_vector((0, 2, 2, 1), 4) == (1, 1, 2, 0)
    assert pm.is_tieless([0, 0, 3, 1])
    assert not pm.is_tieless([2, 0, 2])
    assert pm.is_tie_matrix(pm.EXAMPLE_H)
    assert pm.is_tie_matrix([[1, 1]])  # one entry per column
    assert not pm.is_tie_matrix([[1], [1]])
    assert pm.is_tie_matrix([[1], [2]])
    assert not pm.is_tie_matrix([[-1]])
    H = [[1, 0], [0, 2]]
    assert pm.is_h_tieless(H, [2, 1]) is False
    assert pm.is_h_tieless(H, [1, 1])
    with pytest.raises(ValueError):
        pm.is_h_tieless(H, [1])


def test_projection_is_not_h_symmetric_for_identity():
    p = pm.projection(2, 2, 0)
    H = [[1, 0], [0, 1]]
    # (0,1) has multiplicities (1,1): a tie, so it is exempt
    assert pm.h_symmetry_counterexample(p, H) is None
    H2 = [[1, 0], [0, 2]]
    assert pm.h_symmetry_counterexample(p, H2) == (1, 0)


def test_symmetry_classes():
    mn = pm.FiniteFunction.from_callable(3, 3, 3, min)
    assert pm.check_symmetry_class(mn, "symmetric")
    assert pm.check_symmetry_class(mn, "two_block_symmetric")
    assert not pm.check_symmetry_class(mn, "alternating")
    p = pm.projection(2, 3)
    assert pm.check_symmetry_class(p, "two_block_symmetric") is False
    assert not pm.check_symmetry_class(pm.projection(2, 2), "alternating")
    with pytest.raises(ValueError):
        pm.check_symmetry_class(p, "cyclic")


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.integers(0, 2**31))
def test_all_ones_h_is_plain_symmetry(n, L, seed):
    rng = random.Random(seed)
    table = [rng.randrange(n) for _ in range(n ** L)]
    f = pm.FiniteFunction(n, n, L, table)
    # make it symmetric half the time so both branches are exercised
    if seed % 2:
        f = pm.FiniteFunction.from_callable(n, n, L, lambda t: table[f.index(tuple(sorted(t)))])
    assert pm.is_h_symmetric(f, [[1] * n]) == pm.check_symmetry_class(f, "symmetric")


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**31))
def test_minors_of_polymorphisms_are_polymorphisms(L, L2, seed):
    T = pm.one_in_three_nae()
    rng = random.Random(seed)
    f = pm.aip_polymorphism(2 * L - 1)
    pi = [rng.randrange(L2) for _ in range(f.L)]
    g = f.minor(pi, L2)
    assert pm.is_polymorphism(g, T.A, T.B)
    for b in itertools.product(range(2), repeat=L2):
        assert g(b) == f(tuple(b[j] for j in pi))


def test_lazy_minor_matches_table_minor():
    f = pm.example_polymorphism(4)
    lazy = pm.lazy_example_polymorphism(4)
    pi = (1, 0, 1, 2)
    assert lazy.minor(pi, 3).materialize() == f.minor(pi, 3)


def test_function_file_round_trip():
    f = pm.example_polymorphism(2)
    assert pm.parse_function(pm.serialize_function(f, "g")) == f


@pytest.mark.parametrize("text", [
    "",
    "fn f arity 1 dom 2\nv 0\nv 1\n",
    "fn f arity 1 dom 2 cod 2\nv 0\n",
    "fn f arity 1 dom 2 cod 2\nv 0\nv 2\n",
    "fn f arity 1 dom 2 cod 2\nv 0\nw 1\n",
])
def test_bad_function_files(text):
    with pytest.raises(StructureError):
        pm.parse_function(text)


def test_tie_matrix_round_trip_and_errors():
    H = [list(r) for r in pm.EXAMPLE_H]
    assert pm.parse_tie_matrix(pm.serialize_tie_matrix(H)) == H
    with pytest.raises(StructureError):
        pm.parse_tie_matrix("tiem 1 2\n1\n")
    with pytest.raises(StructureError):
        pm.parse_tie_matrix("matrix 1 1\n1\n")


def test_budget_errors(example):
    with pytest.raises(pm.BudgetError):
        pm.example_polymorphism(9, budget=10**6)
    with pytest.raises(pm.BudgetError):
        pm.polymorphism_counterexample(pm.example_polymorphism(4), example.A, example.B, budget=100)
    with pytest.raises(pm.BudgetError):
        next(pm.enumerate_polymorphisms(example.A, example.B, 3, budget=100))


def test_shape_errors(example):
    with pytest.raises(ValueError):
        pm.FiniteFunction(2, 2, 2, [0, 1, 0])
    with pytest.raises(ValueError):
        pm.FiniteFunction(2, 2, 1, [0, 2])
    with pytest.raises(ValueError):
        pm.is_polymorphism(pm.projection(2, 1), example.A, example.B)
    with pytest.raises(ValueError):
        pm.projection(2, 2).minor((0, 2), 2)
