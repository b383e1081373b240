"""Finitely generated abelian groups in primary normal form.

Every group is stored as ``Z^rank (+) sum of Z_{p^j}`` with the torsion part
kept as a sorted multiset of prime powers. Two groups are isomorphic exactly
when their canonical forms compare equal.

>>> G = from_presentation([[2, 4], [-2, 6]])
>>> G
FgAbelianGroup(rank=0, torsion=((PrimePower(p=2, j=1), 2), (PrimePower(p=5, j=1), 1)))
>>> print(G)
Z_2^2 + Z_5
>>> cyclic_summand_total(G)
3
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

from sympy import factorint, isprime

Matrix = Sequence[Sequence[int]]


class PrimePower(NamedTuple):
    """The cyclic group ``Z_{p^j}``; tuples order by ``p`` then ``j``."""

    p: int
    j: int

    @classmethod
    def of(cls, p: int, j: int = 1) -> "PrimePower":
        p, j = int(p), int(j)
        if p < 2 or not isprime(p):
            raise ValueError(f"{p} is not prime")
        if j < 1:
            raise ValueError(f"exponent must be >= 1, got {j}")
        return cls(p, j)

    @property
    def order(self) -> int:
        return self.p**self.j

    def __str__(self) -> str:
        return f"Z_{self.order}"


@dataclass(frozen=True)
class FgAbelianGroup:
    rank: int = 0
    torsion: tuple[tuple[PrimePower, int], ...] = ()

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be non-negative")
        merged: Counter = Counter()
        for q, mult in self.torsion:
            q = PrimePower.of(*q)
            if mult < 0:
                raise ValueError("torsion multiplicities must be non-negative")
            merged[q] += int(mult)
        canonical = tuple(sorted((q, m) for q, m in merged.items() if m > 0))
        object.__setattr__(self, "rank", int(self.rank))
        object.__setattr__(self, "torsion", canonical)

    @classmethod
    def from_counts(cls, rank: int = 0, counts: Mapping[PrimePower, int] | None = None) -> "FgAbelianGroup":
        return cls(rank, tuple((counts or {}).items()))

    @classmethod
    def cyclic(cls, n: int) -> "FgAbelianGroup":
        """``Z`` for n == 0, ``Z_n`` otherwise (n == 1 is trivial)."""
        return primary_decomposition([n])

    @property
    def is_trivial(self) -> bool:
        return self.rank == 0 and not self.torsion

    @property
    def is_finite(self) -> bool:
        return self.rank == 0

    @property
    def order(self) -> int | None:
        if self.rank:
            return None
        total = 1
        for q, m in self.torsion:
            total *= q.order**m
        return total

    def counts(self) -> dict[PrimePower, int]:
        return dict(self.torsion)

    def invariant_factors(self) -> tuple[int, ...]:
        """Divisibility chain d_1 | d_2 | ... (all > 1), followed by ``rank`` zeros."""
        by_prime: dict[int, list[int]] = {}
        for q, m in self.torsion:
            by_prime.setdefault(q.p, []).extend([q.order] * m)
        length = max((len(v) for v in by_prime.values()), default=0)
        factors = [1] * length
        for orders in by_prime.values():
            orders.sort(reverse=True)
            for i, o in enumerate(orders):
                factors[length - 1 - i] *= o
        return tuple(factors) + (0,) * self.rank

    def presentation(self) -> list[list[int]]:
        """Canonical relation matrix: one diagonal row per prime power, zero columns for rank."""
        cols = sum(m for _, m in self.torsion) + self.rank
        rows = []
        c = 0
        for q, m in self.torsion:
            for _ in range(m):
                row = [0] * cols
                row[c] = q.order
                rows.append(row)
                c += 1
        return rows

    def __add__(self, other: "FgAbelianGroup") -> "FgAbelianGroup":
        return direct_sum(self, other)

    def __str__(self) -> str:
        parts = []
        if self.rank:
            parts.append("Z" if self.rank == 1 else f"Z^{self.rank}")
        for q, m in self.torsion:
            parts.append(str(q) if m == 1 else f"{q}^{m}")
        return " + ".join(parts) if parts else "0"


TRIVIAL = FgAbelianGroup()


def smith_form(matrix: Matrix, ncols: int | None = None):
    """Diagonalize ``matrix`` by unimodular row and column operations.

    Returns ``(U, S, V)`` with ``S == U @ matrix @ V`` in Smith normal form.
    Only exact integer arithmetic is used: pivots are reduced by Euclidean
    remainders, so every intermediate is an integer combination of the input.
    """
    rows = [list(map(int, r)) for r in matrix]
    m = len(rows)
    n = ncols if ncols is not None else (len(rows[0]) if rows else 0)
    if any(len(r) != n for r in rows):
        raise ValueError("ragged matrix")
    A = rows
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, k):
        A[i], A[k] = A[k], A[i]
        U[i], U[k] = U[k], U[i]

    def swap_cols(j, k):
        for M in (A, V):
            for r in M:
                r[j], r[k] = r[k], r[j]

    def add_row(dst, src, c):
        # row_dst += c * row_src
        for M in (A, U):
            rs, rd = M[src], M[dst]
            for j in range(len(rd)):
                rd[j] += c * rs[j]

    def add_col(dst, src, c):
        for M in (A, V):
            for r in M:
                r[dst] += c * r[src]

    t = 0
    while t < min(m, n):
        pivot = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (pivot is None or abs(A[i][j]) < abs(A[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        while True:
            p = A[t][t]
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
            # smallest nonzero remainder in the pivot row/column becomes the new pivot
            best = None
            for i in range(t + 1, m):
                if A[i][t] and (best is None or abs(A[i][t]) < best[0]):
                    best = (abs(A[i][t]), "r", i)
            for j in range(t + 1, n):
                if A[t][j] and (best is None or abs(A[t][j]) < best[0]):
                    best = (abs(A[t][j]), "c", j)
            if best is not None:
                if best[1] == "r":
                    swap_rows(t, best[2])
                else:
                    swap_cols(t, best[2])
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            for M in (A, U):
                M[t] = [-x for x in M[t]]
        t += 1
    return U, A, V


def smith_normal_form(matrix: Matrix, ncols: int | None = None) -> tuple[int, ...]:
    """Invariant factors of ``matrix``: the diagonal of its Smith normal form.

    The result has ``min(rows, cols)`` entries, each dividing the next, with
    zeros last.

    >>> smith_normal_form([[2, 4], [-2, 6]])
    (2, 10)
    """
    _, S, _ = smith_form(matrix, ncols)
    return tuple(S[i][i] for i in range(min(len(S), len(S[0]) if S else 0)))


def primary_decomposition(invariant_factors: Iterable[int]) -> FgAbelianGroup:
    rank = 0
    counts: Counter = Counter()
    for d in invariant_factors:
        d = int(d)
        if d < 0:
            raise ValueError("invariant factors must be non-negative")
        if d == 0:
            rank += 1
        elif d > 1:
            for p, j in factorint(d).items():
                counts[PrimePower(int(p), int(j))] += 1
    return FgAbelianGroup.from_counts(rank, counts)


def from_presentation(matrix: Matrix, ncols: int | None = None) -> FgAbelianGroup:
    """The cokernel ``Z^ncols / rowspan(matrix)`` in primary form."""
    n = ncols if ncols is not None else (len(matrix[0]) if len(matrix) else 0)
    diag = smith_normal_form(matrix, n)
    nonzero = sum(1 for d in diag if d)
    G = primary_decomposition(d for d in diag if d)
    return FgAbelianGroup(n - nonzero, G.torsion)


def direct_sum(*groups: FgAbelianGroup) -> FgAbelianGroup:
    rank = 0
    counts: Counter = Counter()
    for G in groups:
        rank += G.rank
        counts.update(dict(G.torsion))
    return FgAbelianGroup.from_counts(rank, counts)


def count_summands(G: FgAbelianGroup, q: PrimePower) -> int:
    """Multiplicity of ``Z_{p^j}`` among the primary summands of ``G``."""
    return dict(G.torsion).get(PrimePower(*q), 0)


def cyclic_summand_total(G: FgAbelianGroup) -> int:
    return G.rank + sum(m for _, m in G.torsion)
