"""Free products of freely indecomposable groups, tracked by label.

A finitely generated group is recorded by its Grushko factors as a multiset of
:class:`FactorLabel`. Isomorphism between factors is nominal: finite cyclic
factors compare by order, opaque factors by name. Multiplicities may be the
countable infinity ``OMEGA`` so that groups of infinite sum-manifolds fit in
the same type.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union


@functools.total_ordering
class ExtendedCount:
    """A value in N u {omega}.

    omega absorbs addition and positive multiples; ``0 * omega == 0``.
    Plain ints mix freely with extended counts.
    """

    __slots__ = ("value",)

    def __init__(self, value: int | None):
        if value is not None:
            value = int(value)
            if value < 0:
                raise ValueError("counts are non-negative")
        object.__setattr__(self, "value", value)

    def __setattr__(self, *_):
        raise AttributeError("ExtendedCount is immutable")

    @property
    def is_finite(self) -> bool:
        return self.value is not None

    def __add__(self, other):
        other = count(other)
        if self.value is None or other.value is None:
            return OMEGA
        return ExtendedCount(self.value + other.value)

    __radd__ = __add__

    def __mul__(self, other):
        other = count(other)
        if self.value == 0 or other.value == 0:
            return ExtendedCount(0)
        if self.value is None or other.value is None:
            return OMEGA
        return ExtendedCount(self.value * other.value)

    __rmul__ = __mul__

    def __floordiv__(self, divisor: int):
        divisor = int(divisor)
        if divisor < 1:
            raise ZeroDivisionError("divisor must be a positive integer")
        return OMEGA if self.value is None else ExtendedCount(self.value // divisor)

    def _key(self):
        return (1, 0) if self.value is None else (0, self.value)

    def __eq__(self, other):
        try:
            return self._key() == count(other)._key()
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        return self._key() < count(other)._key()

    def __hash__(self):
        return hash(self.value) if self.value is not None else hash("omega")

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        if self.value is None:
            raise OverflowError("omega has no integer value")
        return self.value

    def to_json(self) -> Union[int, str]:
        return "omega" if self.value is None else self.value

    def __repr__(self):
        return "OMEGA" if self.value is None else f"ExtendedCount({self.value})"

    def __str__(self):
        return "ω" if self.value is None else str(self.value)


OMEGA = ExtendedCount(None)


def count(x) -> ExtendedCount:
    if isinstance(x, ExtendedCount):
        return x
    if x == "omega" or x is None:
        return OMEGA
    if isinstance(x, bool) or not isinstance(x, int):
        raise TypeError(f"not a count: {x!r}")
    return ExtendedCount(x)


_KIND_ORDER = {"infinite_cyclic": 0, "finite_cyclic": 1, "opaque": 2}


@dataclass(frozen=True)
class FactorLabel:
    kind: str
    n: int | None = None
    name: str | None = None
    # trusted user declaration, only meaningful for opaque labels
    odd_torsion_generated: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.kind == "infinite_cyclic":
            object.__setattr__(self, "n", None)
            object.__setattr__(self, "name", None)
        elif self.kind == "finite_cyclic":
            if self.n is None or int(self.n) < 2:
                raise ValueError("finite cyclic factors need order n >= 2")
            object.__setattr__(self, "n", int(self.n))
            object.__setattr__(self, "name", None)
        elif self.kind == "opaque":
            if not self.name:
                raise ValueError("opaque factors need a name")
            object.__setattr__(self, "n", None)
        else:
            raise ValueError(f"unknown factor kind {self.kind!r}")

    @classmethod
    def Z(cls) -> "FactorLabel":
        return cls("infinite_cyclic")

    @classmethod
    def Zn(cls, n: int) -> "FactorLabel":
        return cls("finite_cyclic", n=n)

    @classmethod
    def opaque(cls, name: str, odd_torsion_generated: bool = False) -> "FactorLabel":
        return cls("opaque", name=name, odd_torsion_generated=odd_torsion_generated)

    @property
    def odd_torsion(self) -> bool:
        if self.kind == "finite_cyclic":
            return self.n % 2 == 1
        if self.kind == "opaque":
            return self.odd_torsion_generated
        return False

    def sort_key(self):
        return (_KIND_ORDER[self.kind], self.n or 0, self.name or "")

    def __lt__(self, other: "FactorLabel"):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        if self.kind == "infinite_cyclic":
            return "Z"
        if self.kind == "finite_cyclic":
            return f"Z_{self.n}"
        return self.name


@dataclass(frozen=True)
class FreeProductClass:
    """Multiset of Grushko factors; the empty multiset is the trivial group."""

    factors: tuple[tuple[FactorLabel, ExtendedCount], ...] = ()

    def __post_init__(self):
        merged: dict[FactorLabel, ExtendedCount] = {}
        for label, mult in self.factors:
            merged[label] = merged.get(label, ExtendedCount(0)) + count(mult)
        canonical = tuple(sorted(((l, m) for l, m in merged.items() if m), key=lambda lm: lm[0].sort_key()))
        object.__setattr__(self, "factors", canonical)

    @classmethod
    def of(cls, factors: Mapping[FactorLabel, object] | Iterable[FactorLabel] = ()) -> "FreeProductClass":
        if isinstance(factors, Mapping):
            return cls(tuple(factors.items()))
        return cls(tuple((l, 1) for l in factors))

    @property
    def is_trivial(self) -> bool:
        return not self.factors

    @property
    def is_finite(self) -> bool:
        return all(m.is_finite for _, m in self.factors)

    def labels(self) -> list[FactorLabel]:
        return [l for l, _ in self.factors]

    def __mul__(self, other: "FreeProductClass") -> "FreeProductClass":
        return free_product(self, other)

    def scaled(self, k) -> "FreeProductClass":
        return FreeProductClass(tuple((l, m * count(k)) for l, m in self.factors))

    def __str__(self):
        if not self.factors:
            return "1"
        return " * ".join(str(l) if m == 1 else f"{l}^*{m}" for l, m in self.factors)


TRIVIAL_GROUP = FreeProductClass()


def free_product(*classes: FreeProductClass) -> FreeProductClass:
    return FreeProductClass(tuple(f for c in classes for f in c.factors))


def grushko_factor_count(G: FreeProductClass) -> ExtendedCount:
    return sum((m for _, m in G.factors), ExtendedCount(0))


def count_factor(G: FreeProductClass, q: FactorLabel) -> ExtendedCount:
    return dict(G.factors).get(q, ExtendedCount(0))


def shares_factor(A: FreeProductClass, B: FreeProductClass) -> bool:
    return bool(set(A.labels()) & set(B.labels()))


def shared_factors(A: FreeProductClass, B: FreeProductClass) -> list[FactorLabel]:
    return sorted(set(A.labels()) & set(B.labels()))


def generated_by_odd_torsion(G: FreeProductClass) -> bool:
    return all(label.odd_torsion for label in G.labels())

