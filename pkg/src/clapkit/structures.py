"""Relational signatures, finite structures, and a brute-force homomorphism oracle.

Elements of a structure are the integers ``0..n-1``.  Relations keep their
tuples in file order (duplicates dropped), and that order is what every
solver uses to index constraints and assignments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

UNARY = "__u"

Tuple_ = tuple[int, ...]


class StructureError(ValueError):
    """Malformed structure, bad file, or mismatched signatures."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column or 1}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Signature:
    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        seen = set()
        for name, arity in self.symbols:
            if name in seen:
                raise StructureError(f"duplicate relation name {name!r}")
            if arity < 1:
                raise StructureError(f"relation {name!r} has arity {arity} < 1")
            seen.add(name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    def arity(self, name: str) -> int:
        for n, k in self.symbols:
            if n == name:
                return k
        raise KeyError(name)

    def same_as(self, other: "Signature") -> bool:
        return dict(self.symbols) == dict(other.symbols)

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.symbols)


@dataclass(frozen=True)
class RelationalStructure:
    signature: Signature
    size: int
    relations: Mapping[str, tuple[Tuple_, ...]]
    name: str = field(default="", compare=False)
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.size < 0:
            raise StructureError("domain size must be nonnegative")
        rels = {}
        for sym, arity in self.signature.symbols:
            seen: dict[Tuple_, None] = {}
            for t in self.relations.get(sym, ()):
                t = tuple(int(e) for e in t)
                if len(t) != arity:
                    raise StructureError(f"relation {sym!r}: tuple {t} does not have arity {arity}")
                for e in t:
                    if not 0 <= e < self.size:
                        raise StructureError(f"relation {sym!r}: element id out of range: {e}")
                seen.setdefault(t, None)
            rels[sym] = tuple(seen)
        extra = set(self.relations) - set(self.signature.names)
        if extra:
            raise StructureError(f"relations not in signature: {sorted(extra)}")
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "_index", {s: {t: i for i, t in enumerate(ts)} for s, ts in rels.items()})

    def __getitem__(self, name: str) -> tuple[Tuple_, ...]:
        return self.relations[name]

    def tuple_index(self, name: str, t: Sequence[int]) -> int:
        """Position of ``t`` in relation ``name``; KeyError if absent."""
        return self._index[name][tuple(t)]

    def contains(self, name: str, t: Sequence[int]) -> bool:
        return tuple(t) in self._index[name]

    @property
    def num_tuples(self) -> int:
        return sum(len(ts) for ts in self.relations.values())

    def with_relations(self, signature: Signature, relations: Mapping[str, Iterable[Tuple_]]) -> "RelationalStructure":
        return RelationalStructure(signature, self.size, {k: tuple(v) for k, v in relations.items()}, self.name)

    def conform(self, signature: Signature) -> "RelationalStructure":
        """Extend to ``signature`` by adding empty relations for missing symbols."""
        mine = dict(self.signature.symbols)
        for sym, arity in mine.items():
            if sym not in signature:
                raise StructureError(f"relation {sym!r} is not in the template signature")
            if signature.arity(sym) != arity:
                raise StructureError(f"relation {sym!r}: arity {arity} differs from template arity {signature.arity(sym)}")
        rels = {sym: self.relations.get(sym, ()) for sym in signature.names}
        return RelationalStructure(signature, self.size, rels, self.name)


@dataclass(frozen=True)
class Homomorphism:
    map: tuple[int, ...]

    def is_valid(self, X: RelationalStructure, Y: RelationalStructure) -> bool:
        return is_homomorphism(self.map, X, Y)


@dataclass(frozen=True)
class PcspTemplate:
    A: RelationalStructure
    B: RelationalStructure
    witness: Homomorphism

    @property
    def signature(self) -> Signature:
        return self.A.signature


def is_homomorphism(h: Sequence[int], X: RelationalStructure, Y: RelationalStructure) -> bool:
    if len(h) != X.size or any(not 0 <= v < Y.size for v in h):
        return False
    for sym in X.signature.names:
        for t in X[sym]:
            if not Y.contains(sym, [h[e] for e in t]):
                return False
    return True


def _check_signatures(X: RelationalStructure, Y: RelationalStructure) -> None:
    if not X.signature.same_as(Y.signature):
        raise StructureError(f"signature mismatch: {X.signature.symbols} vs {Y.signature.symbols}")


def find_homomorphism(X: RelationalStructure, Y: RelationalStructure) -> Homomorphism | None:
    """Backtracking search for a homomorphism X -> Y.

    Variables are tried by descending constraint degree (ties by id), values
    ascending, so the witness is the lexicographically least one in that
    variable order.
    """
    _check_signatures(X, Y)
    n = X.size
    touching: list[list[tuple[str, Tuple_]]] = [[] for _ in range(n)]
    for sym in X.signature.names:
        for t in X[sym]:
            for e in set(t):
                touching[e].append((sym, t))
    order = sorted(range(n), key=lambda v: (-len(touching[v]), v))
    assignment: list[int | None] = [None] * n

    def consistent(var: int) -> bool:
        for sym, t in touching[var]:
            known = [(i, assignment[e]) for i, e in enumerate(t) if assignment[e] is not None]
            if not any(all(y[i] == v for i, v in known) for y in Y[sym]):
                return False
        return True

    def search(pos: int) -> bool:
        if pos == n:
            return True
        var = order[pos]
        for value in range(Y.size):
            assignment[var] = value
            if consistent(var) and search(pos + 1):
                return True
        assignment[var] = None
        return False

    if search(0):
        return Homomorphism(tuple(assignment))  # type: ignore[arg-type]
    return None


def augment_with_unary(X: RelationalStructure, A: RelationalStructure, B: RelationalStructure | None = None):
    """Add the all-elements unary relation ``__u`` to every structure given.

    Idempotent: a structure already carrying ``__u`` is returned unchanged.
    Returns ``(X', A')`` or ``(X', A', B')`` depending on whether B is given.
    """
    out = tuple(_with_unary(S) for S in (X, A, B) if S is not None)
    return out


def _with_unary(S: RelationalStructure) -> RelationalStructure:
    if UNARY in S.signature:
        return S
    sig = Signature(S.signature.symbols + ((UNARY, 1),))
    rels = dict(S.relations)
    rels[UNARY] = tuple((e,) for e in range(S.size))
    return RelationalStructure(sig, S.size, rels, S.name)


def strip_unary(S: RelationalStructure) -> RelationalStructure:
    if UNARY not in S.signature:
        return S
    sig = Signature(tuple(s for s in S.signature.symbols if s[0] != UNARY))
    return RelationalStructure(sig, S.size, {k: v for k, v in S.relations.items() if k != UNARY}, S.name)


def validate_template(A: RelationalStructure, B: RelationalStructure) -> PcspTemplate:
    h = find_homomorphism(A, B)
    if h is None:
        raise StructureError("not a PCSP template: no homomorphism from A to B")
    return PcspTemplate(A, B, h)


# --- text format -----------------------------------------------------------

_TOKEN = re.compile(r"\S+")


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(body)]
        if toks:
            yield lineno, toks


def _int(tok: tuple[str, int], lineno: int, what: str) -> int:
    try:
        return int(tok[0])
    except ValueError:
        raise StructureError(f"expected integer {what}, got {tok[0]!r}", lineno, tok[1]) from None


def _parse_block(lines: list, header: str) -> RelationalStructure:
    lineno, toks = lines[0]
    if toks[0][0] != header:
        raise StructureError(f"expected '{header} <name>'", lineno, toks[0][1])
    name = toks[1][0] if len(toks) > 1 else ""
    if len(lines) < 2 or lines[1][1][0][0] != "domain" or len(lines[1][1]) != 2:
        ln, tk = lines[1] if len(lines) > 1 else (lineno, toks)
        raise StructureError("expected 'domain <n>'", ln, tk[0][1])
    ln, tk = lines[1]
    size = _int(tk[1], ln, "domain size")
    # only instances may be empty
    if size < 1 and not (size == 0 and header == "instance"):
        raise StructureError("domain size must be positive", ln, tk[1][1])
    symbols: list[tuple[str, int]] = []
    rels: dict[str, list[Tuple_]] = {}
    current = None
    for ln, tk in lines[2:]:
        kw = tk[0][0]
        if kw == "rel":
            if len(tk) != 3:
                raise StructureError("expected 'rel <name> <arity>'", ln, tk[0][1])
            rname = tk[1][0]
            if rname in rels:
                raise StructureError(f"duplicate relation name {rname!r}", ln, tk[1][1])
            arity = _int(tk[2], ln, "arity")
            if arity < 1:
                raise StructureError("arity must be positive", ln, tk[2][1])
            symbols.append((rname, arity))
            rels[rname] = []
            current = (rname, arity)
        elif kw == "t":
            if current is None:
                raise StructureError("tuple before any 'rel' line", ln, tk[0][1])
            rname, arity = current
            if len(tk) - 1 != arity:
                raise StructureError(f"arity mismatch: relation {rname!r} has arity {arity}, tuple has {len(tk) - 1} entries", ln, tk[0][1])
            t = []
            for tok in tk[1:]:
                e = _int(tok, ln, "element id")
                if not 0 <= e < size:
                    raise StructureError(f"element id out of range: {e} (domain {size})", ln, tok[1])
                t.append(e)
            rels[rname].append(tuple(t))
        else:
            raise StructureError(f"unexpected token {kw!r}", ln, tk[0][1])
    return RelationalStructure(Signature(tuple(symbols)), size, rels, name)


def _split_blocks(lines: list, header: str) -> list[list]:
    blocks: list[list] = []
    for item in lines:
        if item[1][0][0] == header:
            blocks.append([item])
        elif not blocks:
            ln, tk = item
            raise StructureError(f"expected '{header}'", ln, tk[0][1])
        else:
            blocks[-1].append(item)
    return blocks


def parse_structure(text: str) -> RelationalStructure:
    """Parse a ``structure`` or ``instance`` document."""
    lines = list(_lines(text))
    if not lines:
        raise StructureError("empty document", 1, 1)
    header = lines[0][1][0][0]
    if header not in ("structure", "instance"):
        raise StructureError("expected 'structure <name>' or 'instance <name>'", lines[0][0], 1)
    return _parse_block(lines, header)


def parse_template(text: str) -> PcspTemplate:
    lines = list(_lines(text))
    if not lines or lines[0][1][0][0] != "template":
        ln = lines[0][0] if lines else 1
        raise StructureError("expected 'template' header", ln, 1)
    blocks = _split_blocks(lines[1:], "structure")
    if len(blocks) != 2:
        raise StructureError(f"template needs exactly two structure blocks, found {len(blocks)}", lines[0][0], 1)
    A, B = (_parse_block(b, "structure") for b in blocks)
    if not A.signature.same_as(B.signature):
        raise StructureError("template structures have different signatures", blocks[1][0][0], 1)
    B = B.conform(A.signature)
    return validate_template(A, B)


def serialize_structure(S: RelationalStructure, header: str = "structure") -> str:
    out = [f"{header} {S.name or 'unnamed'}", f"domain {S.size}"]
    for sym, arity in S.signature.symbols:
        out.append(f"rel {sym} {arity}")
        out.extend("t " + " ".join(map(str, t)) for t in S[sym])
    return "\n".join(out) + "\n"


def serialize_template(T: PcspTemplate, name: str = "") -> str:
    return f"template {name}".rstrip() + "\n" + serialize_structure(T.A) + serialize_structure(T.B)


def load_structure(path) -> RelationalStructure:
    with open(path, encoding="utf-8") as fh:
        return parse_structure(fh.read())


def load_template(path) -> PcspTemplate:
    with open(path, encoding="utf-8") as fh:
        return parse_template(fh.read())


# --- common structures -----------------------------------------------------

def make_structure(size: int, relations: Mapping[str, Iterable[Sequence[int]]], name: str = "") -> RelationalStructure:
    rels = {k: tuple(tuple(t) for t in v) for k, v in relations.items()}
    symbols = []
    for k, v in rels.items():
        if not v:
            raise StructureError(f"cannot infer arity of empty relation {k!r}; build the Signature explicitly")
        symbols.append((k, len(v[0])))
    return RelationalStructure(Signature(tuple(symbols)), size, rels, name)


ONE_IN_THREE = ((0, 0, 1), (0, 1, 0), (1, 0, 0))
NAE = tuple(t for t in ((a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)) if len(set(t)) > 1)


def one_in_three(symbol: str = "R1") -> RelationalStructure:
    return make_structure(2, {symbol: ONE_IN_THREE}, "1in3")


def nae(symbol: str = "R1") -> RelationalStructure:
    return make_structure(2, {symbol: NAE}, "nae")


def clique(k: int, symbol: str = "E") -> RelationalStructure:
    return make_structure(k, {symbol: [(i, j) for i in range(k) for j in range(k) if i != j]}, f"K{k}")


def directed_cycle(length: int, symbol: str = "E") -> RelationalStructure:
    return make_structure(length, {symbol: [(i, (i + 1) % length) for i in range(length)]}, f"C{length}")


def undirected_cycle(length: int, symbol: str = "E") -> RelationalStructure:
    edges = [(i, (i + 1) % length) for i in range(length)]
    return make_structure(length, {symbol: edges + [(b, a) for a, b in edges]}, f"UC{length}")
