"""Random and exhaustive instance generators for the experiments."""

from __future__ import annotations

import itertools
import random
from typing import Iterator

from .structures import UNARY, RelationalStructure, Signature


def _symbols(A: RelationalStructure) -> list[tuple[str, int]]:
    return [(s, k) for s, k in A.signature.symbols if s != UNARY]


def random_instance(rng: random.Random, A: RelationalStructure, variables: int, constraints: int) -> RelationalStructure:
    """Uniformly random constraint tuples over the signature of A."""
    syms = _symbols(A)
    rels: dict[str, list] = {s: [] for s, _ in syms}
    for _ in range(constraints):
        s, k = rng.choice(syms)
        rels[s].append(tuple(rng.randrange(variables) for _ in range(k)))
    return RelationalStructure(Signature(tuple(syms)), variables, rels, "random")


def planted_instance(rng: random.Random, A: RelationalStructure, variables: int, constraints: int,
                     tries: int = 1000) -> tuple[RelationalStructure, tuple[int, ...]]:
    """A random instance together with a homomorphism into A it was built around."""
    syms = [(s, k) for s, k in _symbols(A) if A[s]]
    if not syms:
        raise ValueError("template has no nonempty relation to plant")
    for _ in range(tries):
        h = tuple(rng.randrange(A.size) for _ in range(variables))
        pre: dict[int, list[int]] = {}
        for x, a in enumerate(h):
            pre.setdefault(a, []).append(x)
        usable = [(s, k, [t for t in A[s] if all(a in pre for a in t)]) for s, k in syms]
        usable = [u for u in usable if u[2]]
        if usable or constraints == 0:
            break
    else:
        raise RuntimeError(f"could not plant {constraints} constraints on {variables} variables")
    rels: dict[str, list] = {s: [] for s, _ in _symbols(A)}
    for _ in range(constraints):
        s, k, ts = rng.choice(usable)
        t = rng.choice(ts)
        rels[s].append(tuple(rng.choice(pre[a]) for a in t))
    X = RelationalStructure(Signature(tuple(_symbols(A))), variables, rels, "planted")
    return X, h


def _canonical(n: int, tuples: tuple) -> tuple:
    best = None
    for perm in itertools.permutations(range(n)):
        key = tuple(sorted(tuple(perm[e] for e in t) for t in tuples))
        if best is None or key < best:
            best = key
    return best


def small_instances(symbol: str, arity: int, max_vars: int, max_constraints: int,
                    cap: int | None = None) -> Iterator[RelationalStructure]:
    """All one-relation instances up to variable renaming, smallest first."""
    sig = Signature(((symbol, arity),))
    emitted = 0
    for n in range(1, max_vars + 1):
        seen = set()
        all_t = list(itertools.product(range(n), repeat=arity))
        for c in range(0, max_constraints + 1):
            for combo in itertools.combinations(all_t, c):
                key = _canonical(n, combo)
                if key in seen:
                    continue
                seen.add(key)
                yield RelationalStructure(sig, n, {symbol: key}, f"small-{n}-{c}")
                emitted += 1
                if cap is not None and emitted >= cap:
                    return
