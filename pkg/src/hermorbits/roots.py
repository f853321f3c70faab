"""Exact integer root systems of the classical types A, B, C and D.

Roots are plain tuples of ints in the standard ambient lattice:

    A_n   e_i - e_j                      in Z^(n+1)
    B_n   +-e_i, +-e_i +- e_j            in Z^n
    C_n   +-2e_i, +-e_i +- e_j           in Z^n
    D_n   +-e_i +- e_j                   in Z^n

Everything in this module is exact; no floating point is used.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import lcm
from itertools import combinations, combinations_with_replacement
from typing import Iterable, Sequence

from .errors import DecomposableSystem, NotInSpan, RankTooSmall

Root = tuple[int, ...]

FAMILIES = ("A", "B", "C", "D")
MIN_RANK = {"A": 1, "B": 2, "C": 3, "D": 4}
# Lowest ranks for which the enumeration itself still makes sense; used by the
# matrix realizations, which also cover C_2 = sp(4) and friends.
MIN_ENUM_RANK = {"A": 1, "B": 1, "C": 1, "D": 2}

ROOTSYSTEM_SCHEMA = "hermorbits.rootsystem"
ROOTSYSTEM_VERSION = 1


@dataclass(frozen=True)
class CartanType:
    family: str
    rank: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown Cartan family {self.family!r}")
        if not isinstance(self.rank, int) or self.rank < MIN_RANK[self.family]:
            raise RankTooSmall(self.family, self.rank)

    @property
    def ambient_dim(self) -> int:
        return ambient_dim(self.family, self.rank)

    def __str__(self):
        return f"{self.family}{self.rank}"


def ambient_dim(family: str, rank: int) -> int:
    return rank + 1 if family == "A" else rank


# -- vector helpers ---------------------------------------------------------

def add(a: Root, b: Root) -> Root:
    return tuple(x + y for x, y in zip(a, b))


def neg(a: Root) -> Root:
    return tuple(-x for x in a)


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def unit(dim: int, i: int, scale: int = 1) -> Root:
    v = [0] * dim
    v[i] = scale
    return tuple(v)


def _lex_sign(v: Sequence) -> int:
    for x in v:
        if x:
            return 1 if x > 0 else -1
    return 0


# -- orderings ----------------------------------------------------------------

@dataclass(frozen=True)
class Ordering:
    """A total order on the ambient vector space, given by its positive cone.

    ``lexicographic``: first nonzero coordinate positive.
    ``reversed``: the opposite order (first nonzero coordinate negative).
    ``weight``: sign of the pairing with ``weights``, ties broken
    lexicographically so the order stays total.
    """

    kind: str = "lexicographic"
    weights: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("lexicographic", "reversed", "weight"):
            raise ValueError(f"unknown ordering kind {self.kind!r}")
        if self.kind == "weight":
            if not self.weights:
                raise ValueError("weight ordering needs a weight vector")
            if any(isinstance(w, float) for w in self.weights):
                raise TypeError("weights must be exact (int or Fraction)")
            object.__setattr__(self, "weights", tuple(self.weights))

    @classmethod
    def by_weight(cls, weights: Iterable) -> "Ordering":
        return cls("weight", tuple(weights))

    def sign(self, v: Sequence) -> int:
        if self.kind == "lexicographic":
            return _lex_sign(v)
        if self.kind == "reversed":
            return -_lex_sign(v)
        if len(v) != len(self.weights):
            raise ValueError("weight vector and root have different lengths")
        s = dot(self.weights, v)
        if s:
            return 1 if s > 0 else -1
        return _lex_sign(v)

    def is_positive(self, v: Sequence) -> bool:
        return self.sign(v) > 0

    def greater(self, a: Sequence, b: Sequence) -> bool:
        return self.is_positive([x - y for x, y in zip(a, b)])


LEX = Ordering()


# -- enumeration --------------------------------------------------------------

def classical_roots(family: str, rank: int) -> frozenset:
    """All roots of the given classical type, without the minimum-rank rule."""
    if family not in FAMILIES:
        raise ValueError(f"unknown Cartan family {family!r}")
    if rank < MIN_ENUM_RANK[family]:
        raise RankTooSmall(family, rank)
    m = ambient_dim(family, rank)
    out = set()
    if family == "A":
        for i in range(m):
            for j in range(m):
                if i != j:
                    out.add(add(unit(m, i), unit(m, j, -1)))
        return frozenset(out)
    for i, j in combinations(range(m), 2):
        for si in (1, -1):
            for sj in (1, -1):
                out.add(add(unit(m, i, si), unit(m, j, sj)))
    if family == "B":
        out.update(unit(m, i, s) for i in range(m) for s in (1, -1))
    elif family == "C":
        out.update(unit(m, i, 2 * s) for i in range(m) for s in (1, -1))
    return frozenset(out)


def standard_simple_roots(family: str, rank: int) -> list:
    """The conventional simple roots alpha_1..alpha_n, in Dynkin order."""
    m = ambient_dim(family, rank)
    simple = [add(unit(m, i), unit(m, i + 1, -1)) for i in range(rank - 1)]
    if family == "A":
        simple.append(add(unit(m, rank - 1), unit(m, rank, -1)))
    elif family == "B":
        simple.append(unit(m, rank - 1))
    elif family == "C":
        simple.append(unit(m, rank - 1, 2))
    else:
        simple.append(add(unit(m, rank - 2), unit(m, rank - 1)))
    return simple


def _simple_sort_key(r: Root):
    first = next(i for i, x in enumerate(r) if x)
    return (first, r)


# -- root systems -------------------------------------------------------------

@dataclass(frozen=True)
class RootSystem:
    """A finite set of roots together with an ordering.

    ``ctype`` is set for the full classical systems; subsystems (hulls,
    tower levels built by hand) leave it as None.
    """

    roots: frozenset
    ctype: CartanType | None = None
    ordering: Ordering = LEX

    def __post_init__(self):
        object.__setattr__(self, "roots", frozenset(tuple(r) for r in self.roots))
        dims = {len(r) for r in self.roots}
        if len(dims) > 1:
            raise ValueError("roots of mixed dimension")

    @property
    def dim(self) -> int:
        return len(next(iter(self.roots)))

    @property
    def rank(self) -> int:
        return len(self.simple)

    def with_ordering(self, ordering: Ordering) -> "RootSystem":
        return RootSystem(self.roots, self.ctype, ordering)

    @cached_property
    def positive(self) -> list:
        pos = [r for r in self.roots if self.ordering.is_positive(r)]
        return sorted(pos, key=_simple_sort_key)

    @cached_property
    def simple(self) -> list:
        pos = self.positive
        sums = {add(a, b) for a, b in combinations_with_replacement(pos, 2)}
        return sorted((r for r in pos if r not in sums), key=_simple_sort_key)

    @cached_property
    def coefficients(self) -> dict:
        """Simple-root coefficients of every root."""
        return {r: decompose(r, self.simple) for r in self.roots}

    def index_of(self, simple_root: Root) -> int:
        """1-based Dynkin index of a simple root."""
        return self.simple.index(tuple(simple_root)) + 1


def build_root_system(ctype: CartanType, ordering: Ordering = LEX) -> RootSystem:
    return RootSystem(classical_roots(ctype.family, ctype.rank), ctype, ordering)


def positive_roots(rs: RootSystem) -> list:
    return list(rs.positive)


def simple_roots(rs: RootSystem) -> list:
    return list(rs.simple)


@lru_cache(maxsize=256)
def _gram_inverse(simple: tuple) -> tuple:
    k = len(simple)
    gram = [[Fraction(dot(a, b)) for b in simple] for a in simple]
    inv = [[Fraction(int(i == j)) for j in range(k)] for i in range(k)]
    # Gauss-Jordan on [gram | inv]
    for col in range(k):
        pivot = next((r for r in range(col, k) if gram[r][col] != 0), None)
        if pivot is None:
            raise NotInSpan("simple roots are linearly dependent")
        gram[col], gram[pivot] = gram[pivot], gram[col]
        inv[col], inv[pivot] = inv[pivot], inv[col]
        p = gram[col][col]
        gram[col] = [x / p for x in gram[col]]
        inv[col] = [x / p for x in inv[col]]
        for r in range(k):
            if r != col and gram[r][col] != 0:
                f = gram[r][col]
                gram[r] = [x - f * y for x, y in zip(gram[r], gram[col])]
                inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    return tuple(tuple(row) for row in inv)


def decompose(root: Sequence, simple: Sequence) -> tuple:
    """Integer coefficients of ``root`` in the basis ``simple``.

    Raises NotInSpan if the root is not an integral combination.
    """
    simple = tuple(tuple(s) for s in simple)
    root = tuple(root)
    inv = _gram_inverse(simple)
    rhs = [dot(s, root) for s in simple]
    coeffs = [sum(a * b for a, b in zip(row, rhs)) for row in inv]
    recon = [sum(c * s[i] for c, s in zip(coeffs, simple)) for i in range(len(root))]
    if recon != list(root):
        raise NotInSpan(f"{root} is not in the span of the simple roots")
    if any(c.denominator != 1 for c in coeffs):
        raise NotInSpan(f"{root} has non-integral coefficients {coeffs}")
    return tuple(int(c) for c in coeffs)


def fundamental_coweight(simple: Sequence, i: int) -> tuple:
    """Smallest integer vector w with w . simple[j] = 0 for j != i and > 0 for j = i."""
    simple = tuple(tuple(s) for s in simple)
    inv = _gram_inverse(simple)
    w = [sum(inv[i][j] * simple[j][t] for j in range(len(simple)))
         for t in range(len(simple[0]))]
    scale = lcm(*(x.denominator for x in w))
    return tuple(int(x * scale) for x in w)


def highest_root(rs: RootSystem) -> Root:
    if not is_indecomposable(rs.roots):
        raise DecomposableSystem("highest root needs an indecomposable system")
    coeffs = rs.coefficients
    best = max(rs.positive, key=lambda r: (sum(coeffs[r]), coeffs[r]))
    top = coeffs[best]
    for r in rs.positive:
        if any(c > t for c, t in zip(coeffs[r], top)):
            raise DecomposableSystem(f"no root dominates {r}")
    return best


def is_root_system(candidate: Iterable, ambient: RootSystem) -> bool:
    cand = {tuple(r) for r in candidate}
    if not cand <= ambient.roots:
        return False
    if any(neg(r) not in cand for r in cand):
        return False
    for a, b in combinations_with_replacement(cand, 2):
        s = add(a, b)
        if s in ambient.roots and s not in cand:
            return False
    return True


def _components(roots: Iterable) -> list:
    remaining = sorted({tuple(r) for r in roots}, reverse=True)
    comps = []
    unseen = set(remaining)
    for start in remaining:
        if start not in unseen:
            continue
        unseen.discard(start)
        comp, queue = [start], deque([start])
        while queue:
            r = queue.popleft()
            for s in [s for s in unseen if dot(r, s) != 0]:
                unseen.discard(s)
                comp.append(s)
                queue.append(s)
        comps.append(frozenset(comp))
    return comps


def is_indecomposable(candidate: Iterable) -> bool:
    cand = list(candidate)
    if not cand:
        raise ValueError("indecomposability of the empty set is undefined")
    return len(_components(cand)) == 1


def _close(roots: set, ambient: frozenset) -> set:
    out = set(roots) | {neg(r) for r in roots}
    frontier = list(out)
    while frontier:
        new = set()
        for a in frontier:
            for b in out:
                s = add(a, b)
                if s in ambient and s not in out:
                    new.add(s)
        new |= {neg(r) for r in new if neg(r) not in out}
        out |= new
        frontier = list(new)
    return out


def _shortest_chain(sources: frozenset, targets: set, ambient_sorted: list) -> list:
    """BFS through non-orthogonal ambient roots; lowest sorted index wins ties."""
    prev = {s: None for s in sorted(sources, reverse=True)}
    queue = deque(prev)
    while queue:
        r = queue.popleft()
        for s in ambient_sorted:
            if s in prev or dot(r, s) == 0:
                continue
            prev[s] = r
            if s in targets:
                chain = []
                node = prev[s]
                while node is not None and node not in sources:
                    chain.append(node)
                    node = prev[node]
                return chain
            queue.append(s)
    raise DecomposableSystem("ambient system does not connect the input roots")


def indecomposable_hull(F: Iterable, ambient: RootSystem) -> frozenset:
    """Smallest indecomposable root system containing F built by chaining.

    Components are joined through shortest chains of non-orthogonal ambient
    roots (BFS, ties broken by descending lexicographic order of the ambient
    roots), then the result is closed under negation and ambient addition.
    """
    F = {tuple(r) for r in F}
    if not F:
        raise ValueError("empty input")
    if not F <= ambient.roots:
        raise ValueError("input is not a subset of the ambient roots")
    ambient_sorted = sorted(ambient.roots, reverse=True)
    current = _close(F, ambient.roots)
    while True:
        comps = _components(current)
        if len(comps) == 1:
            return frozenset(current)
        others = set().union(*comps[1:])
        chain = _shortest_chain(comps[0], others, ambient_sorted)
        current = _close(current | set(chain), ambient.roots)


# -- serialization ------------------------------------------------------------

def to_json(rs: RootSystem) -> dict:
    return {
        "schema": ROOTSYSTEM_SCHEMA,
        "version": ROOTSYSTEM_VERSION,
        "family": rs.ctype.family if rs.ctype else None,
        "rank": rs.ctype.rank if rs.ctype else rs.rank,
        "roots": [list(r) for r in sorted(rs.roots, reverse=True)],
        "simple": [list(r) for r in rs.simple],
    }


def from_json(doc: dict) -> RootSystem:
    if doc.get("schema") != ROOTSYSTEM_SCHEMA:
        raise ValueError("not a root system document")
    if doc.get("version") != ROOTSYSTEM_VERSION:
        raise ValueError(f"unsupported root system version {doc.get('version')}")
    ctype = CartanType(doc["family"], doc["rank"]) if doc.get("family") else None
    rs = RootSystem(frozenset(tuple(r) for r in doc["roots"]), ctype)
    if [list(r) for r in rs.simple] != doc["simple"]:
        raise ValueError("stored simple roots disagree with the lexicographic ordering")
    return rs
