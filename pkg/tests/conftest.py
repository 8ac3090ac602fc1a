import itertools

import pytest

from clapkit import polymorph as pm
from clapkit.structures import RelationalStructure, Signature, is_homomorphism


@pytest.fixture(scope="session")
def example():
    return pm.example_template()


@pytest.fixture(scope="session")
def one_nae():
    return pm.one_in_three_nae()


@pytest.fixture(scope="session")
def c5(example):
    sig = example.A.signature
    return RelationalStructure(sig, 5, {"R2": tuple((i, (i + 1) % 5) for i in range(5))}, "c5")


def all_maps_hom(X, Y):
    """Exhaustive oracle: does any of the |Y|^|X| maps preserve every relation?"""
    return any(is_homomorphism(h, X, Y) for h in itertools.product(range(Y.size), repeat=X.size))


def single(symbol, arity, size, tuples):
    return RelationalStructure(Signature(((symbol, arity),)), size, {symbol: tuple(tuples)})
