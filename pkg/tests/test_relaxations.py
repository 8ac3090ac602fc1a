import itertools
import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from clapkit.acceptance import aip_solution_violations, blp_point_violations
from clapkit.exactmath import integer_solve, relative_interior_point
from clapkit.generators import planted_instance, random_instance
from clapkit.relaxations import (
    BlpSkeleton,
    Fixing,
    RelaxationError,
    aip_accepts,
    aip_solution,
    blp_accepts,
    blp_aip_accepts,
    blp_point,
    build_aip,
    build_blp,
    marginal,
    marginal_matrix,
)
from clapkit.structures import (
    ONE_IN_THREE,
    RelationalStructure,
    Signature,
    clique,
    find_homomorphism,
    one_in_three,
    undirected_cycle,
)

from conftest import single

R1 = Signature((("R1", 3),))


def one_constraint(t=(0, 1, 2), n=3):
    return RelationalStructure(R1, n, {"R1": (t,)})


def test_marginal_matrix_examples():
    assert marginal_matrix([(0, 1)], 1, 2) == [[1], [0]]
    assert marginal_matrix(ONE_IN_THREE, 3, 2) == [[0, 1, 1], [1, 0, 0]]
    third = mpq(1, 3)
    assert marginal([third] * 3, ONE_IN_THREE, 1, 2) == [mpq(2, 3), third]
    with pytest.raises(RelaxationError):
        marginal_matrix(ONE_IN_THREE, 4, 2)
    with pytest.raises(RelaxationError):
        marginal_matrix(ONE_IN_THREE, 0, 2)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=1, max_size=8))
def test_marginal_of_stochastic_is_stochastic(weights):
    total = sum(weights)
    if total == 0:
        return
    U = list(itertools.product(range(2), repeat=3))[: len(weights)]
    xi = [mpq(w, total) for w in weights]
    for i in (1, 2, 3):
        m = marginal(xi, U, i, 2)
        assert sum(m) == 1 and all(x >= 0 for x in m)


def test_single_constraint_blp():
    X = one_constraint()
    p = build_blp(X, one_in_three())
    assert p.num_vars == 3 + 2 * 3
    assert blp_point(X, one_in_three()) is not None
    pt = blp_point(X, one_in_three(), [Fixing("R1", (0, 1, 2), (0, 0, 1))])
    sk = BlpSkeleton(X, one_in_three())
    assert [pt[j] for j in sk.blocks[("R1", 0)]] == [1, 0, 0]


def test_c5_uniform_point_is_feasible(example, c5):
    sk = BlpSkeleton(c5, example.A)
    x = [mpq(0)] * sk.num_vars
    for j, (sym, xi, ai) in enumerate(sk.labels):
        if sym == "R2":
            x[j] = mpq(1, 5)
        elif sym == "__u":
            x[j] = mpq(1, 5) if ai >= 2 else mpq(0)
    assert sk.lp().is_feasible_point(x)
    assert not blp_point_violations(c5, example.A, sk, x)


def test_blp_examples(example, c5):
    assert blp_accepts(c5, example.A)
    assert blp_accepts(undirected_cycle(5), clique(2))
    assert find_homomorphism(undirected_cycle(5), clique(2)) is None
    empty_A = RelationalStructure(R1, 2, {"R1": ()})
    assert not blp_accepts(one_constraint(), empty_A)


def test_unknown_fixing_is_rejected():
    with pytest.raises(RelaxationError, match="unknown tuple"):
        build_blp(one_constraint(), one_in_three(), [Fixing("R1", (0, 0, 0), (0, 0, 1))])
    with pytest.raises(RelaxationError):
        Fixing("R1", (0, 1, 2), (0, 0, 1), 2)


def test_aip_examples():
    X = one_constraint()
    assert aip_solution(X, one_in_three()) is not None
    xxx = one_constraint((0, 0, 0), 1)
    assert aip_solution(xxx, one_in_three()) is None
    assert not aip_accepts(xxx, one_in_three())
    # cross-check the same system on a small box
    s = build_aip(xxx, one_in_three())
    assert not any(s.is_solution(t) for t in itertools.product(range(-2, 3), repeat=s.num_vars))
    zeros = [("R1", (0, 1, 2), t) for t in ONE_IN_THREE]
    assert aip_solution(X, one_in_three(), zeros) is None


def test_empty_instance_is_accepted_everywhere():
    X = RelationalStructure(R1, 0, {})
    assert blp_accepts(X, one_in_three()) and aip_accepts(X, one_in_three())
    assert blp_aip_accepts(X, one_in_three())


def test_blp_aip_examples(example, c5):
    assert blp_aip_accepts(c5, example.A)
    assert find_homomorphism(c5, example.B) is None
    X = one_constraint()
    assert blp_aip_accepts(X, one_in_three(), [Fixing("R1", (0, 1, 2), (0, 0, 1))])
    assert blp_aip_accepts(example.A, example.A)


def test_odd_cycle_aip_rejects():
    assert not aip_accepts(clique(3), clique(2))
    assert not blp_aip_accepts(clique(3), clique(2))


def _instances(seed, count):
    rng = random.Random(seed)
    from clapkit import polymorph as pm
    T = [pm.example_template(), pm.one_in_three_nae()]
    for k in range(count):
        A = T[k % 2].A
        n, m = rng.randint(2, 5), rng.randint(0, 4)
        if rng.random() < 0.5:
            yield planted_instance(rng, A, n, m)[0], A
        else:
            yield random_instance(rng, A, n, m), A


def test_soundness_of_relaxations_on_yes_instances():
    for X, A in _instances(1, 120):
        if find_homomorphism(X, A) is not None:
            assert blp_accepts(X, A) and aip_accepts(X, A) and blp_aip_accepts(X, A)


def test_ladder_and_fixings():
    rng = random.Random(2)
    for X, A in _instances(3, 80):
        sk = BlpSkeleton(X, A)
        plain = sk.blp_aip()
        if plain:
            assert blp_accepts(X, A)
        for _ in range(2):
            j = rng.randrange(sk.num_vars)
            zeros = set(rng.sample(range(sk.num_vars), min(2, sk.num_vars))) - {j}
            if sk.blp_aip({j}, zeros):
                assert plain


def test_points_resubstitute_exactly():
    for X, A in _instances(4, 80):
        sk = BlpSkeleton(X, A)
        pt = sk.blp_point()
        if pt is not None:
            assert not blp_point_violations(X, A, sk, pt)
            ri = relative_interior_point(sk.lp())
            assert not blp_point_violations(X, A, sk, ri)
        tau = integer_solve(sk.aip())
        if tau is not None:
            assert not aip_solution_violations(X, A, sk, tau)


def test_interior_choice_does_not_change_outcome():
    for X, A in _instances(5, 80):
        sk = BlpSkeleton(X, A)
        assert sk.blp_aip() == sk.blp_aip(exhaustive=True)
        for j in range(0, sk.num_vars, 3):
            assert sk.blp_aip({j}) == sk.blp_aip({j}, exhaustive=True)


def test_aip_solves_one_in_three_vs_nae_small(one_nae):
    from clapkit.generators import small_instances
    for X in small_instances("R1", 3, 4, 4, cap=400):
        if aip_accepts(X, one_nae.A):
            assert find_homomorphism(X, one_nae.B) is not None


def test_signature_mismatch():
    with pytest.raises(Exception):
        blp_accepts(single("E", 2, 2, [(0, 1)]), one_in_three())
