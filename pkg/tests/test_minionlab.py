import random
from fractions import Fraction

import pytest
from gmpy2 import mpq

from clapkit import minionlab as ml
from clapkit import polymorph as pm
from clapkit.structures import StructureError

F = Fraction


def el(rows, mu):
    return ml.MinionElement(ml.EvcMatrix.from_rows(rows), mu)


def test_skeletal_examples():
    assert not ml.is_skeletal(ml.EvcMatrix.from_rows([[F(1, 2), 1], [F(1, 2), 0]]))
    assert ml.is_skeletal(ml.EvcMatrix.from_rows([[1, 0, F(1, 2)], [0, 1, F(1, 2)]]))
    assert ml.is_skeletal(ml.EvcMatrix.from_rows([[1], [0]]))


def test_canonical_form_drops_repeated_tail():
    a = ml.EvcMatrix.from_rows([[1, 0, 0, 0], [0, 1, 1, 1]])
    b = ml.EvcMatrix.from_rows([[1, 0], [0, 1]])
    assert a == b and a.t == 2
    assert ml.EvcMatrix(a.cols) == a
    assert a.column(10) == (0, 1)


def test_membership_conditions():
    assert ml.is_minion_element(ml.unit_matrix(3, 1), (0, 1, 0))
    M = ml.EvcMatrix.from_rows([[1, 0], [0, 1]])
    assert any(s.startswith("c4") for s in ml.membership_failures(M, (0, 1)))
    assert any(s.startswith("c3") for s in ml.membership_failures(M, (1, 1)))
    assert any(s.startswith("c2") for s in ml.membership_failures(ml.EvcMatrix.from_rows([[1], [1]]), (1, 0)))
    assert ml.is_minion_element(M, (1, 0))
    assert ml.in_c_d(M, (1, 0), 2)
    assert not ml.in_c_d(M, (1, 0), 1)  # two columns need D >= 2
    H = ml.EvcMatrix.from_rows([[F(1, 3)], [F(2, 3)]])
    assert not ml.is_minion_element(H, (1, 0))  # nonzero rows lack unit columns
    with pytest.raises(ml.MinionError):
        ml.MinionElement(M, (1,))


def test_minor_identity_and_collapse():
    x = el([[F(1, 2), 1, 0], [F(1, 2), 0, 1], [0, 0, 0]], (2, -1, 0))
    assert ml.is_minion_element(x.M, x.mu)
    assert ml.minor(x, ml.MinorMap((0, 1, 2), 3)) == x
    one = ml.minor(x, ml.MinorMap((0, 0, 0), 1))
    assert one == el([[1]], (1,))
    y = ml.minor(x, ml.MinorMap((1, 0, 1), 2))
    assert y.mu == (-1, 2)
    assert ml.is_minion_element(y.M, y.mu)


def test_minor_composition():
    rng = random.Random(1)
    for _ in range(100):
        x = ml.random_c_d(rng, 4, 3)
        p = ml.MinorMap(tuple(rng.randrange(3) for _ in range(4)), 3)
        q = ml.MinorMap(tuple(rng.randrange(2) for _ in range(3)), 2)
        assert ml.minor(ml.minor(x, p), q) == ml.minor(x, p.then(q))
        z = ml.minor(x, p)
        assert ml.in_c_d(z.M, z.mu, 3)


def test_minor_map_matrix():
    P = ml.MinorMap((1, 0, 1), 2).matrix()
    assert P == [[0, 1, 0], [1, 0, 1]]
    with pytest.raises(ml.MinionError):
        ml.MinorMap((0, 2), 2)
    with pytest.raises(ml.MinionError):
        ml.MinorMap((0,), 1).then(ml.MinorMap((0, 0), 1))


def test_enumeration_members_are_members():
    elements = list(ml.enumerate_c_d(2, 2))
    assert len(set(elements)) == len(elements)
    assert all(ml.in_c_d(e.M, e.mu, 2) for e in elements)
    assert el([[1], [0]], (1, 0)) in elements
    assert el([[1, 0], [0, 1]], (1, 0)) in elements
    assert el([[F(1, 2), 1], [F(1, 2), 0]], (1, 0)) not in elements
    assert el([[F(1, 2)], [F(1, 2)]], (2, -1)) not in elements  # not skeletal


def test_tiebreak_small():
    H = [[1, 0], [0, 1]]
    Ms = [ml.EvcMatrix.from_rows([[1, 0], [0, 1]])]
    res = ml.tiebreak(Ms, H)
    assert ml.check_tiebreak(Ms, H, res.v) == []
    assert res.initial_ties == 2 and res.history[-1] == 0


def test_tiebreak_over_whole_truncation():
    for L, D in ((2, 2), (3, 2), (3, 3)):
        Ms = ml.skeletal_matrices(L, D)
        H = [[1] * L]
        res = ml.tiebreak(Ms, H)
        assert ml.check_tiebreak(Ms, H, res.v) == []
        assert all(a > b for a, b in zip(res.history, res.history[1:]))


def test_tiebreak_random_properties():
    rng = random.Random(7)
    for _ in range(40):
        L = rng.randint(2, 4)
        Ms = [ml.random_c_d(rng, L, 3).M for _ in range(rng.randint(1, 4))]
        H = [[rng.randint(0, 2) for _ in range(L)] for _ in range(rng.randint(1, 3))]
        if not pm.is_tie_matrix(H):
            continue
        res = ml.tiebreak(Ms, H)
        assert ml.check_tiebreak(Ms, H, res.v) == []
        assert res.steps <= res.initial_ties


def test_tiebreak_input_errors():
    with pytest.raises(ml.MinionError):
        ml.tiebreak([], [[1]])
    with pytest.raises(ml.MinionError):
        ml.tiebreak([ml.unit_matrix(2, 0)], [[1], [1]])
    with pytest.raises(ml.MinionError):
        ml.tiebreak([ml.EvcMatrix.from_rows([[F(1, 2)], [F(1, 2)]])], [[1, 1]])


def test_count_ties():
    assert ml.count_ties([1, 1, 0, 0, 1]) == 6
    assert ml.count_ties([0, 0]) == 0


def test_sigma_bound():
    assert ml.sigma_bound([[1, 0], [0, 2]]) == 2
    assert ml.sigma_bound([[1, 1, 1]]) == 2  # sqrt(1*3) rounds up


def test_xi_setup_small_cases():
    cfg = ml.xi_setup(2, 1, [[1, 1]])
    assert cfg.v == [1] and cfg.N == 6 and cfg.min_arity == 36
    # a single row of H can never tie, so the uniform start is kept
    cfg2 = ml.xi_setup(2, 2, [[1, 1]])
    assert cfg2.v == [mpq(1, 2), mpq(1, 2)] and cfg2.N == 2 * 3 * 4 * 2
    # with two rows the identity matrix ties at the uniform start
    cfg3 = ml.xi_setup(2, 2, [[1, 0], [0, 1]])
    assert ml.check_tiebreak(ml.skeletal_matrices(2, 2), cfg3.H, cfg3.v) == []
    assert cfg3.v != [mpq(1, 2), mpq(1, 2)]
    assert cfg3.N == 2 * (cfg3.sigma_hat + 1) * 4 * ml.denominator_lcm(cfg3.v)


def test_xi_on_unary_element_is_diagonal():
    cfg = ml.xi_setup(2, 1, [[1, 1]])
    f = pm.LazyFunction(2, 2, 36, blocks_fn=lambda b: b[0][0])
    g = ml.xi_map(el([[1]], (1,)), f, cfg.H, cfg.v, cfg.N, cfg.D)
    assert g.blocks == [36] and g(0) == 0 and g(1) == 1


def test_xi_regime_errors():
    cfg = ml.xi_setup(2, 1, [[1, 1]])
    x = el([[1], [0]], (1, 0))
    with pytest.raises(ml.RegimeError):
        ml.xi_blocks(x, 35, cfg.H, cfg.v, cfg.N, cfg.D)  # below N^2
    with pytest.raises(ml.RegimeError):
        ml.xi_blocks(x, 36, cfg.H, cfg.v, 5, cfg.D)  # N not a multiple
    with pytest.raises(ml.RegimeError):
        ml.xi_blocks(el([[1, 0], [0, 1]], (1, 0)), 36, cfg.H, cfg.v, cfg.N, 1)  # outside C_1
    with pytest.raises(ml.RegimeError):
        ml.xi_blocks(x, 36, cfg.H, [mpq(0), mpq(1)], cfg.N, cfg.D)


def test_xi_blocks_without_remainder_ignore_mu():
    cfg = ml.xi_setup(2, 3, [[1, 1]])
    M = [[F(2, 3), 1, 0], [F(1, 3), 0, 1]]
    c = cfg.N * cfg.N
    a = ml.xi_blocks(el(M, (1, 0)), c, cfg.H, cfg.v, cfg.N, cfg.D)
    b = ml.xi_blocks(el(M, (2, -1)), c, cfg.H, cfg.v, cfg.N, cfg.D)
    assert a == b and sum(a) == c


def test_xi_commutes_with_minors():
    cfg = ml.xi_setup(2, 2, [[1, 1]])
    c = cfg.N * cfg.N + cfg.N // 3
    f = pm.LazyFunction(2, 2, c, blocks_fn=lambda b: int(2 * sum(n for x, n in b if x) > sum(n for _, n in b)))
    rng = random.Random(3)
    for _ in range(20):
        x = ml.random_c_d(rng, 3, 2)
        pi = ml.MinorMap(tuple(rng.randrange(2) for _ in range(3)), 2)
        assert ml.xi_commutation_failures(x, pi, f, cfg, 8, rng) == []


def test_element_file_round_trip_and_errors():
    x = el([[1, 0, F(1, 2)], [0, 1, F(1, 2)]], (2, -1))
    assert ml.parse_element(ml.serialize_element(x)) == x
    for bad in ("", "mel rows 2 cols 1\n1\n0\n", "mel rows 1 cols 2\n1\nmu 1\n", "mel rows 0 cols 1\nmu\n"):
        with pytest.raises((StructureError, ml.MinionError)):
            ml.parse_element(bad)
