"""Sum-manifolds patterned on finite graphs or lazily generated infinite trees.

An infinite tree is presented by generators on the vertex set {0, 1, 2, ...}:
``parent(n) < n`` for every ``n >= 1`` and ``child_bound(v)`` bounds the
indices of the children of ``v``. Any prefix {0, ..., n-1} is therefore a
connected subtree, and truncating to that prefix is the canonical way of
looking at a compact piece of the manifold.

Invariants of an infinite sum-manifold are computed symbolically from the
catalog's declared usage counts. A catalog may carry one infinite
:class:`BlockFamily` indexed by primes (the blocks B_n with prescribed
pi_2 = Z_{p_n} and friends); its contribution is a lazily enumerated tail whose
structural guarantees are declared by the user and checked on samples.
"""

from __future__ import annotations

import itertools
import re
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Hashable, Iterator, Mapping, Sequence

from sympy import isprime, perfect_power, prime, primepi

from .abelian import FgAbelianGroup, PrimePower
from .blocks import Block, BlockError, lens_block, smale_block, suspension_block
from .groups import (
    OMEGA,
    ExtendedCount,
    FactorLabel,
    FreeProductClass,
    count,
    free_product,
)

GUARANTEES = ("all_odd", "distinct", "finite_nonzero")


class PatternError(ValueError):
    pass


class NotSymbolicallyComputable(PatternError):
    pass


# ---------------------------------------------------------------- patterns


@dataclass(frozen=True)
class FiniteGraph:
    vertices: tuple[Hashable, ...]
    edges: tuple[tuple[Hashable, Hashable], ...]
    assignment: tuple[tuple[Hashable, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        if isinstance(self.assignment, Mapping):
            object.__setattr__(self, "assignment", tuple(self.assignment.items()))
        if not self.vertices:
            raise PatternError("a pattern needs at least one vertex")
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise PatternError("duplicate vertices")
        for a, b in self.edges:
            if a not in vs or b not in vs:
                raise PatternError(f"edge ({a}, {b}) uses an unknown vertex")
        assigned = dict(self.assignment)
        object.__setattr__(self, "_names", assigned)
        missing = [v for v in self.vertices if v not in assigned]
        if missing:
            raise PatternError(f"vertices without a block: {missing}")
        if len(self.bfs_order()) != len(self.vertices):
            raise PatternError("pattern graph is not connected")

    @classmethod
    def path(cls, names: Sequence[str]) -> "FiniteGraph":
        n = len(names)
        return cls(tuple(range(n)), tuple((i - 1, i) for i in range(1, n)), tuple(enumerate(names)))

    @classmethod
    def tree(cls, parents: Sequence[int], names: Sequence[str]) -> "FiniteGraph":
        """Tree on 0..n-1 where ``parents[i]`` is the parent of vertex ``i + 1``."""
        n = len(names)
        return cls(tuple(range(n)), tuple((p, i + 1) for i, p in enumerate(parents)), tuple(enumerate(names)))

    def block_name(self, v) -> str:
        return self._names[v]

    def adjacency(self) -> dict:
        adj = {v: [] for v in self.vertices}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def bfs_order(self) -> list:
        adj = self.adjacency()
        seen = {self.vertices[0]}
        order = []
        queue = deque([self.vertices[0]])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return order

    @property
    def cycle_rank(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    @property
    def is_tree(self) -> bool:
        return self.cycle_rank == 0


@dataclass(frozen=True)
class InfiniteTree:
    """Rooted, locally finite infinite tree with vertex 0 as root."""

    shape: str
    parent: Callable[[int], int] = field(compare=False)
    child_bound: Callable[[int], int] = field(compare=False)
    assign: Callable[[int], str] = field(compare=False)
    params: tuple = ()

    def children(self, v: int) -> list[int]:
        return [c for c in range(v + 1, self.child_bound(v) + 1) if self.parent(c) == v]

    def check_prefix(self, n: int) -> list[str]:
        """Generator sanity on vertices < n: parent(v) < v and the child bound holds."""
        problems = []
        for v in range(1, n):
            p = self.parent(v)
            if not 0 <= p < v:
                problems.append(f"parent({v}) = {p} is not in [0, {v})")
            elif v > self.child_bound(p):
                problems.append(f"vertex {v} is a child of {p} beyond child_bound({p}) = {self.child_bound(p)}")
        return problems


def ray_shape():
    return (lambda n: n - 1), (lambda v: v + 1)


def binary_shape():
    return (lambda n: (n - 1) // 2), (lambda v: 2 * v + 2)


def comb_shape():
    # spine 0, 2, 4, ...; leaf 2i + 1 hangs off spine vertex 2i
    return (lambda n: n - 2 if n % 2 == 0 else n - 1), (lambda v: v + 2 if v % 2 == 0 else v)


def parent_table_shape(parents: Sequence[int], stride: int = 1):
    """Explicit parents for vertices 1..len(parents), then parent(n) = n - stride."""
    table = tuple(int(p) for p in parents)
    m = len(table)
    if stride < 1:
        raise PatternError("stride must be >= 1")
    for i, p in enumerate(table, start=1):
        if not 0 <= p < i:
            raise PatternError(f"parent table entry for vertex {i} must lie in [0, {i})")
    if m + 1 <= stride:
        raise PatternError("stride exceeds the number of tabled vertices")

    def parent(n):
        return table[n - 1] if n <= m else n - stride

    def bound(v):
        return max(m, v + stride)

    return parent, bound


SHAPES = {"ray": ray_shape, "binary_tree": binary_shape, "comb": comb_shape}


# ---------------------------------------------------------------- families


class PrimeSequence:
    """Which prime sits at each family position, and how often each prime occurs."""

    infinite: bool = True
    description: str = ""

    def prime_at(self, m: int) -> int:
        raise NotImplementedError

    def usage(self, p: int) -> int:
        raise NotImplementedError

    def span(self, p: int) -> tuple[int, int]:
        """First and last position of ``p`` (inclusive)."""
        raise NotImplementedError

    def primes(self) -> Iterator[int]:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.description == other.description

    def __hash__(self):
        return hash((type(self).__name__, self.description))


class OddPrimesTriangular(PrimeSequence):
    """3, 5, 5, 7, 7, 7, 11, ...: the i-th odd prime repeated i times."""

    description = "odd primes in order, i-th repeated i times"

    @staticmethod
    def _index(m: int) -> int:
        # largest i with i(i-1)/2 <= m
        i = int(((8 * m + 1) ** 0.5 + 1) / 2)
        while i * (i - 1) // 2 > m:
            i -= 1
        while (i + 1) * i // 2 <= m:
            i += 1
        return i

    def prime_at(self, m: int) -> int:
        return int(prime(self._index(m) + 1))

    def usage(self, p: int) -> int:
        if p == 2 or not isprime(p):
            return 0
        return int(primepi(p)) - 1

    def span(self, p: int) -> tuple[int, int]:
        i = self.usage(p)
        return i * (i - 1) // 2, i * (i + 1) // 2 - 1

    def primes(self) -> Iterator[int]:
        for i in itertools.count(2):
            yield int(prime(i))


class UserPrimeList(PrimeSequence):
    infinite = False

    def __init__(self, entries: Sequence[tuple[int, int]]):
        self.entries = tuple((int(p), int(c)) for p, c in entries)
        for p, c in self.entries:
            if not isprime(p) or c < 1:
                raise PatternError(f"bad prime list entry ({p}, {c})")
        if len({p for p, _ in self.entries}) != len(self.entries):
            raise PatternError("each prime may appear only once in a prime list")
        self._flat = [p for p, c in self.entries for _ in range(c)]
        self.description = "user list " + ", ".join(f"{p}x{c}" for p, c in self.entries)

    def __len__(self):
        return len(self._flat)

    def prime_at(self, m: int) -> int:
        return self._flat[m]

    def usage(self, p: int) -> int:
        return dict(self.entries).get(p, 0)

    def span(self, p: int) -> tuple[int, int]:
        return self._flat.index(p), len(self._flat) - 1 - self._flat[::-1].index(p)

    def primes(self) -> Iterator[int]:
        return iter([p for p, _ in self.entries])


TEMPLATES = ("suspension", "smale", "lens")


@dataclass(frozen=True)
class BlockFamily:
    """Blocks B_p indexed by primes, one template applied to each prime."""

    template: str
    params: tuple[tuple[str, int], ...]
    sequence: PrimeSequence
    guarantees: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.template not in TEMPLATES:
            raise PatternError(f"unknown family template {self.template!r}")
        unknown = set(self.guarantees) - set(GUARANTEES)
        if unknown:
            raise PatternError(f"unknown guarantees {sorted(unknown)}")
        object.__setattr__(self, "guarantees", frozenset(self.guarantees))
        self.member(self.first_prime())  # validates the template parameters

    def first_prime(self) -> int:
        return next(iter(self.sequence.primes()))

    def member(self, p: int) -> Block:
        return _family_member(self.template, self.params, int(p))

    def members(self) -> Iterator[tuple[int, Block]]:
        for p in self.sequence.primes():
            yield p, self.member(p)

    def usage(self, p: int) -> int:
        return self.sequence.usage(p)

    @property
    def dim(self) -> int:
        return self.member(self.first_prime()).dim

    @property
    def infinite(self) -> bool:
        return self.sequence.infinite

    def describe(self) -> str:
        ps = ", ".join(f"{k}={v}" for k, v in self.params)
        head = f"{self.template}({ps})" if ps else self.template
        return f"{head} over {self.sequence.description}"


@lru_cache(maxsize=4096)
def _family_member(template: str, params: tuple, p: int) -> Block:
    kw = dict(params)
    exponent = kw.get("exponent", 1)
    if template == "suspension":
        return suspension_block(kw["d"], PrimePower.of(p, exponent), kw.get("k", 2))
    if template == "smale":
        return smale_block(FgAbelianGroup.from_counts(0, {PrimePower.of(p, exponent): 1}))
    q = kw.get("q", 1)
    return lens_block(p**exponent, q)


# ---------------------------------------------------------------- catalog


@dataclass(frozen=True)
class Catalog:
    blocks: tuple[tuple[str, Block], ...] = ()
    usage: tuple[tuple[str, ExtendedCount], ...] = ()
    family: BlockFamily | None = None

    def __post_init__(self):
        if isinstance(self.blocks, Mapping):
            object.__setattr__(self, "blocks", tuple(self.blocks.items()))
        if isinstance(self.usage, Mapping):
            object.__setattr__(self, "usage", tuple(self.usage.items()))
        object.__setattr__(self, "blocks", tuple(sorted(self.blocks)))
        object.__setattr__(self, "usage", tuple(sorted((n, count(u)) for n, u in self.usage)))
        names = dict(self.blocks)
        for n, _ in self.usage:
            if n not in names:
                raise PatternError(f"usage declared for unknown block {n!r}")

    @classmethod
    def of(cls, blocks: Sequence[Block] | Mapping[str, Block], usage=None, family=None) -> "Catalog":
        if not isinstance(blocks, Mapping):
            blocks = {b.name: b for b in blocks}
        return cls(tuple(blocks.items()), tuple((usage or {}).items()), family)

    @property
    def named(self) -> dict[str, Block]:
        return dict(self.blocks)

    def get(self, name: str) -> Block:
        named = self.named
        if name in named:
            return named[name]
        if self.family is not None:
            p = self.family_prime(name)
            if p is not None:
                return self.family.member(p)
        raise PatternError(f"unknown block {name!r}")

    def family_prime(self, name: str) -> int | None:
        if self.family is None:
            return None
        return _family_lookup(self.family, name)

    def __contains__(self, name: str) -> bool:
        try:
            self.get(name)
            return True
        except PatternError:
            return False

    def declared_usage(self, name: str) -> ExtendedCount | None:
        u = dict(self.usage).get(name)
        if u is not None:
            return u
        p = self.family_prime(name)
        if p is not None:
            return ExtendedCount(self.family.usage(p))
        self.get(name)
        return None

    def sample(self, n: int) -> list[Block]:
        """All named blocks followed by the first ``n`` family members."""
        out = [b for _, b in self.blocks]
        if self.family is not None:
            out.extend(b for _, b in itertools.islice(self.family.members(), n))
        return out

    @property
    def dim(self) -> int | None:
        dims = {b.dim for _, b in self.blocks}
        if self.family is not None:
            dims.add(self.family.dim)
        if len(dims) > 1:
            raise PatternError(f"catalog mixes dimensions {sorted(dims)}")
        return dims.pop() if dims else None


def _family_lookup(family: BlockFamily, name: str) -> int | None:
    # member names embed p^exponent; try the base prime of every integer in the name
    for token in re.findall(r"\d+", name):
        p = _base_prime(int(token))
        if p is not None and family.usage(p) and family.member(p).name == name:
            return p
    return None


# ---------------------------------------------------------------- assignment rules


def constant_rule(name: str) -> Callable[[int], str]:
    return lambda n: name


def cycle_rule(names: Sequence[str]) -> Callable[[int], str]:
    names = tuple(names)
    return lambda n: names[n % len(names)]


class FamilyAssignment:
    """Vertex n -> block name: an explicit prefix, then the family's prime sequence, then the filler."""

    def __init__(self, family: BlockFamily, prefix: Sequence[str] = (), filler: str | None = None):
        self.family = family
        self.prefix = tuple(prefix)
        self.filler = filler
        if not family.sequence.infinite and filler is None:
            raise PatternError("a finite prime list needs a filler block for the rest of the tree")

    def __call__(self, n: int) -> str:
        if n < len(self.prefix):
            return self.prefix[n]
        m = n - len(self.prefix)
        seq = self.family.sequence
        if not seq.infinite and m >= len(seq):
            return self.filler
        return self.family.member(seq.prime_at(m)).name

    def last_vertex(self, p: int) -> int | None:
        """Index of the last vertex carrying the member for ``p`` (None if it never occurs)."""
        if not self.family.usage(p):
            return None
        return len(self.prefix) + self.family.sequence.span(p)[1]


family_rule = FamilyAssignment


# ---------------------------------------------------------------- sum-manifolds


@dataclass(frozen=True)
class SumManifold:
    pattern: FiniteGraph | InfiniteTree
    catalog: Catalog
    name: str = ""

    def __post_init__(self):
        dim = self.catalog.dim
        if isinstance(self.pattern, FiniteGraph):
            for v in self.pattern.vertices:
                if self.pattern.block_name(v) not in self.catalog:
                    raise PatternError(f"vertex {v} uses unknown block {self.pattern.block_name(v)!r}")
            exact = Counter(n for _, n in self.pattern.assignment)
            for n, declared in self.catalog.usage:
                if declared != exact.get(n, 0):
                    raise PatternError(f"declared usage of {n!r} is {declared}, pattern uses it {exact.get(n, 0)} times")
            fixed = dict(self.catalog.usage)
            fixed.update({n: ExtendedCount(exact.get(n, 0)) for n, _ in self.catalog.blocks})
            object.__setattr__(self, "catalog", Catalog(self.catalog.blocks, tuple(fixed.items()), self.catalog.family))
        if dim is None:
            raise PatternError("empty catalog")

    @property
    def dim(self) -> int:
        return self.catalog.dim

    @property
    def is_finite(self) -> bool:
        return isinstance(self.pattern, FiniteGraph)

    @property
    def is_tree(self) -> bool:
        return not self.is_finite or self.pattern.is_tree

    def vertex_block(self, v) -> Block:
        name = self.pattern.block_name(v) if self.is_finite else self.pattern.assign(v)
        return self.catalog.get(name)

    def vertex_blocks(self) -> Iterator[Block]:
        if self.is_finite:
            for v in self.pattern.vertices:
                yield self.vertex_block(v)
        else:
            for v in itertools.count():
                yield self.vertex_block(v)

    def used_blocks(self, depth: int) -> list[tuple[Block, ExtendedCount]]:
        """Blocks with positive usage: named ones exactly, family members up to ``depth``."""
        out = []
        for name, B in self.catalog.blocks:
            u = self.catalog.declared_usage(name)
            if u is None:
                raise NotSymbolicallyComputable(f"usage of block {name!r} is not declared")
            if u:
                out.append((B, u))
        fam = self.catalog.family
        if fam is not None:
            for p, B in itertools.islice(fam.members(), depth):
                out.append((B, ExtendedCount(fam.usage(p))))
        return out


def truncate(W: SumManifold, n: int) -> SumManifold:
    """The compact sub-sum-manifold on the first ``n`` vertices."""
    if n < 1:
        raise PatternError("truncation depth must be positive")
    if W.is_finite:
        G = W.pattern
        if n >= len(G.vertices):
            return W
        keep = G.bfs_order()[:n]
        ks = set(keep)
        edges = tuple(e for e in G.edges if e[0] in ks and e[1] in ks)
        assignment = tuple((v, G.block_name(v)) for v in keep)
        pattern = FiniteGraph(tuple(keep), edges, assignment)
    else:
        T = W.pattern
        names = [T.assign(v) for v in range(n)]
        pattern = FiniteGraph(tuple(range(n)), tuple((T.parent(v), v) for v in range(1, n)), tuple(enumerate(names)))
    used = {W.catalog.get(nm) for nm in {nm for _, nm in pattern.assignment}}
    catalog = Catalog.of(sorted(used, key=lambda b: b.name))
    return SumManifold(pattern, catalog, f"{W.name}[:{n}]" if W.name else "")


# ---------------------------------------------------------------- symbolic invariants


@dataclass(frozen=True)
class TailSchema:
    """Lazily enumerated (key, finite count) entries contributed by a block family."""

    description: str
    entries: Callable[[], Iterator[tuple[object, int]]] = field(compare=False)
    lookup: Callable[[object], int] = field(compare=False)
    guarantees: frozenset[str] = frozenset()
    infinite: bool = True

    def sample(self, n: int) -> list[tuple[object, int]]:
        return list(itertools.islice(self.entries(), n))

    def violations(self, n: int, head_keys=()) -> dict[str, dict]:
        """First sampled counterexample to each structural guarantee (declared or not)."""
        found: dict[str, dict] = {}
        seen: dict = {}
        head_keys = set(head_keys)
        for i, (key, c) in enumerate(self.sample(n)):
            if "all_odd" not in found and not _is_odd_key(key):
                found["all_odd"] = {"index": i, "entry": _key_str(key)}
            if "distinct" not in found:
                if key in seen:
                    found["distinct"] = {"index": i, "entry": _key_str(key), "repeats_index": seen[key]}
                elif key in head_keys:
                    found["distinct"] = {"index": i, "entry": _key_str(key), "also_in_head": True}
            seen.setdefault(key, i)
            if "finite_nonzero" not in found and not (isinstance(c, int) and c >= 1):
                found["finite_nonzero"] = {"index": i, "entry": _key_str(key), "count": str(c)}
        return found


def _is_odd_key(key) -> bool:
    if isinstance(key, PrimePower):
        return key.p % 2 == 1
    return isinstance(key, FactorLabel) and key.odd_torsion


def _key_str(key) -> str:
    return str(key)


@dataclass(frozen=True)
class SymbolicAbelianGroup:
    rank: ExtendedCount = ExtendedCount(0)
    head: tuple[tuple[PrimePower, ExtendedCount], ...] = ()
    tail: TailSchema | None = None

    def __post_init__(self):
        if isinstance(self.head, Mapping):
            object.__setattr__(self, "head", tuple(self.head.items()))
        object.__setattr__(self, "rank", count(self.rank))
        object.__setattr__(self, "head", tuple(sorted((PrimePower(*q), count(c)) for q, c in self.head if count(c))))

    def multiplicity(self, q: PrimePower) -> ExtendedCount:
        m = dict(self.head).get(PrimePower(*q), ExtendedCount(0))
        if self.tail is not None:
            m = m + self.tail.lookup(PrimePower(*q))
        return m

    def summand_multiplicity(self, key) -> ExtendedCount:
        """Like :meth:`multiplicity`, with ``"Z"`` standing for the infinite cyclic summand."""
        return self.rank if key == "Z" else self.multiplicity(key)

    @property
    def is_concrete(self) -> bool:
        return self.tail is None and self.rank.is_finite and all(c.is_finite for _, c in self.head)

    def to_group(self) -> FgAbelianGroup:
        if not self.is_concrete:
            raise NotSymbolicallyComputable("group is not finitely generated")
        return FgAbelianGroup.from_counts(int(self.rank), {q: int(c) for q, c in self.head})


@dataclass(frozen=True)
class SymbolicFreeProduct:
    head: FreeProductClass = FreeProductClass()
    tail: TailSchema | None = None

    def multiplicity(self, label: FactorLabel) -> ExtendedCount:
        m = dict(self.head.factors).get(label, ExtendedCount(0))
        if self.tail is not None:
            m = m + self.tail.lookup(label)
        return m

    @property
    def is_trivial(self) -> bool:
        return self.head.is_trivial and self.tail is None

    def as_class(self) -> FreeProductClass:
        if self.tail is not None:
            raise NotSymbolicallyComputable("free product has infinitely many factor types")
        return self.head


def _family_tail(fam: BlockFamily, extract: Callable[[Block], list[tuple[object, int]]], what: str) -> TailSchema | None:
    if not extract(fam.member(fam.first_prime())):
        return None

    def entries():
        for p, B in fam.members():
            u = fam.usage(p)
            for key, c in extract(B):
                yield key, c * u

    def lookup(key) -> int:
        p = key.p if isinstance(key, PrimePower) else (key.n if isinstance(key, FactorLabel) else None)
        if p is None:
            return 0
        base = _base_prime(p)
        if base is None or fam.usage(base) == 0:
            return 0
        return dict(extract(fam.member(base))).get(key, 0) * fam.usage(base)

    return TailSchema(f"{what} of {fam.describe()}", entries, lookup, fam.guarantees, True)


def _base_prime(n: int) -> int | None:
    if n < 2:
        return None
    if isprime(n):
        return n
    pp = perfect_power(n)
    if pp and isprime(pp[0]):
        return int(pp[0])
    return None


def homology(W: SumManifold, r: int, depth: int = 64) -> SymbolicAbelianGroup:
    if not 2 <= r <= W.dim - 1:
        raise PatternError(f"degree {r} outside 2..{W.dim - 1}")
    return _abelian_invariant(W, lambda B: B.H(r), depth)


def pi_k(W: SumManifold, k: int = 2, depth: int = 64) -> SymbolicAbelianGroup:
    """pi_k(W) as H_k(W) when W is a tree of (k-1)-connected blocks."""
    if not W.is_tree:
        raise PatternError("pi_k is only modelled for tree patterns")
    for B in _assigned_blocks(W, depth):
        if B.connectivity() < k - 1:
            raise PatternError(f"block {B.name!r} is not {k - 1}-connected")
    return homology(W, k, depth)


def pi2(W: SumManifold, depth: int = 64) -> SymbolicAbelianGroup:
    return pi_k(W, 2, depth)


def _assigned_blocks(W: SumManifold, depth: int) -> list[Block]:
    if W.is_finite:
        return list({W.vertex_block(v).name: W.vertex_block(v) for v in W.pattern.vertices}.values())
    return [B for B, _ in W.used_blocks(depth)]


def _abelian_invariant(W: SumManifold, part: Callable[[Block], FgAbelianGroup], depth: int) -> SymbolicAbelianGroup:
    rank = ExtendedCount(0)
    head: dict[PrimePower, ExtendedCount] = {}

    def add(G: FgAbelianGroup, u):
        nonlocal rank
        rank = rank + count(u) * G.rank
        for q, c in G.torsion:
            head[q] = head.get(q, ExtendedCount(0)) + count(u) * c

    if W.is_finite:
        for B in W.vertex_blocks():
            add(part(B), 1)
        return SymbolicAbelianGroup(rank, head)

    for name, B in W.catalog.blocks:
        u = W.catalog.declared_usage(name)
        if u is None:
            raise NotSymbolicallyComputable(f"usage of block {name!r} is not declared")
        add(part(B), u)
    tail = None
    fam = W.catalog.family
    if fam is not None:
        if fam.infinite:
            template = part(fam.member(fam.first_prime()))
            if template.rank:
                rank = OMEGA
            tail = _family_tail(fam, lambda B: list(part(B).torsion), "torsion")
        else:
            for p, B in fam.members():
                add(part(B), fam.usage(p))
    return SymbolicAbelianGroup(rank, head, tail)


def fundamental_group(W: SumManifold, depth: int = 64) -> SymbolicFreeProduct:
    if W.is_finite:
        pieces = [B.pi1 for B in W.vertex_blocks()]
        cycles = FreeProductClass.of({FactorLabel.Z(): W.pattern.cycle_rank}) if W.pattern.cycle_rank else FreeProductClass()
        return SymbolicFreeProduct(free_product(*pieces, cycles))
    pieces = []
    for name, B in W.catalog.blocks:
        u = W.catalog.declared_usage(name)
        if u is None:
            raise NotSymbolicallyComputable(f"usage of block {name!r} is not declared")
        pieces.append(B.pi1.scaled(u))
    tail = None
    fam = W.catalog.family
    if fam is not None:
        if fam.infinite:
            tail = _family_tail(fam, lambda B: [(l, int(m)) for l, m in B.pi1.factors], "free factors")
        else:
            pieces.extend(B.pi1.scaled(fam.usage(p)) for p, B in fam.members())
    return SymbolicFreeProduct(free_product(*pieces), tail)


def usage_count(W: SumManifold, name: str) -> ExtendedCount:
    u = W.catalog.declared_usage(name)
    if u is None:
        raise NotSymbolicallyComputable(f"usage of block {name!r} is not declared")
    return u


def sampled_usage(W: SumManifold, depth: int) -> Counter:
    """How often each block name is assigned among the first ``depth`` vertices."""
    if W.is_finite:
        return Counter(n for _, n in W.pattern.assignment)
    return Counter(W.pattern.assign(v) for v in range(depth))


def usage_spot_check(W: SumManifold, depth: int) -> list[dict]:
    """Declared usage against the generator on the first ``depth`` vertices.

    A finite declaration must never be exceeded; a block that turns up without
    any declaration is reported too.
    """
    if W.is_finite:
        return []
    problems = []
    seen: Counter = Counter()
    for v in range(depth):
        name = W.pattern.assign(v)
        seen[name] += 1
        declared = W.catalog.declared_usage(name) if name in W.catalog else None
        if name not in W.catalog:
            problems.append({"vertex": v, "block": name, "problem": "unknown block"})
        elif declared is None:
            problems.append({"vertex": v, "block": name, "problem": "usage not declared"})
        elif seen[name] > declared:
            problems.append({"vertex": v, "block": name, "problem": f"assigned {seen[name]} times, declared {declared}"})
        else:
            continue
        break
    return problems
