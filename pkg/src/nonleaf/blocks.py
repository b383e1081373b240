"""Closed manifolds ("blocks") modelled by their algebraic invariants.

A :class:`Block` records dimension, fundamental group (as a free-product class)
and the homology groups H_2 .. H_{d-1}. Connected sum acts on these records by
free product and direct sum, which is all the engine ever needs to know about a
block. Two blocks with equal records are indistinguishable to the engine even
when the underlying manifolds differ (CP2 # CP2bar # CP2bar versus
S2xS2 # CP2bar being the standard example).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from math import gcd
from typing import Mapping, Sequence

from .abelian import (
    TRIVIAL,
    FgAbelianGroup,
    PrimePower,
    cyclic_summand_total,
    direct_sum,
)
from .groups import (
    TRIVIAL_GROUP,
    FactorLabel,
    FreeProductClass,
    free_product,
    grushko_factor_count,
)

DUALITY_FILL = "duality-fill"


class BlockError(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    name: str
    dim: int
    pi1: FreeProductClass = TRIVIAL_GROUP
    homology: tuple[FgAbelianGroup, ...] = ()  # H_2, ..., H_{dim-1}
    orientable: bool | None = None
    prime_asserted: bool | None = None
    # modelling conventions this record depends on, surfaced in certificates
    conventions: frozenset[str] = field(default=frozenset(), compare=False)

    def __post_init__(self):
        if self.dim < 3:
            raise BlockError(f"block {self.name!r}: dimension must be >= 3")
        if not self.pi1.is_finite:
            raise BlockError(f"block {self.name!r}: fundamental group must be finitely generated")
        H = tuple(self.homology) + (TRIVIAL,) * (self.dim - 2 - len(self.homology))
        if len(H) != self.dim - 2:
            raise BlockError(f"block {self.name!r}: homology given beyond degree {self.dim - 1}")
        object.__setattr__(self, "homology", H)
        object.__setattr__(self, "conventions", frozenset(self.conventions))

    @classmethod
    def declare(
        cls,
        name: str,
        dim: int,
        pi1: FreeProductClass | Sequence[FactorLabel] = (),
        homology: Mapping[int, FgAbelianGroup] | None = None,
        **flags,
    ) -> "Block":
        if not isinstance(pi1, FreeProductClass):
            pi1 = FreeProductClass.of(pi1)
        H = [TRIVIAL] * (dim - 2)
        for r, G in (homology or {}).items():
            if not 2 <= r <= dim - 1:
                raise BlockError(f"block {name!r}: H_{r} outside the range 2..{dim - 1}")
            H[r - 2] = G
        return cls(name, dim, pi1, tuple(H), **flags)

    def H(self, r: int) -> FgAbelianGroup:
        if not 2 <= r <= self.dim - 1:
            raise BlockError(f"H_{r} is outside the modelled range 2..{self.dim - 1}")
        return self.homology[r - 2]

    @property
    def simply_connected(self) -> bool:
        return self.pi1.is_trivial

    @property
    def is_trivial(self) -> bool:
        return self.simply_connected and all(G.is_trivial for G in self.homology)

    def connectivity(self) -> int:
        """Largest c for which the record is c-connected; 0 when pi1 is nontrivial."""
        if not self.simply_connected:
            return 0
        c = 1
        for G in self.homology:
            if not G.is_trivial:
                break
            c += 1
        return c

    @property
    def pi2(self) -> FgAbelianGroup:
        """pi_2 via the Hurewicz isomorphism; defined for simply connected blocks only."""
        return self.pi_k(2)

    def pi_k(self, k: int) -> FgAbelianGroup:
        if self.connectivity() < k - 1:
            raise BlockError(f"block {self.name!r} is not {k - 1}-connected; pi_{k} is not modelled")
        return self.H(k)

    def duality_violations(self) -> list[int]:
        """Degrees r where torsion(H_r) differs from torsion(H_{d-r-1}).

        Degrees 0 and 1 are filled in from the model (H_0 = Z, H_1 = the
        abelianized pi1) when that is computable; opaque factors skip degree 1.
        """
        d = self.dim
        bad = []
        for r in range(2, d):
            s = d - r - 1
            mine = self.H(r).torsion
            if s >= 2:
                other = self.H(s).torsion
            elif s == 0:
                other = ()
            else:
                h1 = abelianization(self.pi1)
                if h1 is None:
                    continue
                other = h1.torsion
            if mine != other:
                bad.append(r)
        return bad

    def __str__(self):
        hs = ", ".join(f"H{r}={G}" for r, G in enumerate(self.homology, start=2))
        return f"{self.name} (d={self.dim}, pi1={self.pi1}, {hs})"


def abelianization(G: FreeProductClass) -> FgAbelianGroup | None:
    parts = []
    for label, mult in G.factors:
        if label.kind == "opaque":
            return None
        one = FgAbelianGroup(1) if label.kind == "infinite_cyclic" else FgAbelianGroup.cyclic(label.n)
        parts.extend([one] * int(mult))
    return direct_sum(*parts)


def sphere(dim: int) -> Block:
    return Block(f"S{dim}", dim, orientable=True, prime_asserted=True)


def lens_block(p: int, q: int) -> Block:
    if p < 2:
        raise BlockError("lens space needs p >= 2")
    if gcd(p, q) != 1:
        raise BlockError(f"lens space L({p},{q}) needs gcd(p, q) = 1")
    return Block(
        f"L({p},{q})",
        3,
        FreeProductClass.of([FactorLabel.Zn(p)]),
        (TRIVIAL,),
        orientable=True,
        prime_asserted=True,
    )


def smale_block(G: FgAbelianGroup) -> Block:
    """Simply connected closed 5-manifold with H_2 = G + G (no free part)."""
    if G.rank:
        raise BlockError("smale_block takes a finite group")
    name = "S5" if G.is_trivial else f"Smale({G})"
    return Block(name, 5, TRIVIAL_GROUP, (direct_sum(G, G), TRIVIAL, TRIVIAL), orientable=True)


def suspension_block(d: int, q: PrimePower, k: int = 2) -> Block:
    """(k-1)-connected d-manifold with H_k = Z_q.

    Only H_k is dictated by the construction; H_{d-k-1} receives the dual copy
    of Z_q so the record passes the torsion duality check for closed orientable
    manifolds. Everything else vanishes.
    """
    q = PrimePower.of(*q)
    if k < 2 or d < k + 4:
        raise BlockError(f"suspension block needs k >= 2 and d >= k + 4, got d={d}, k={k}")
    Zq = FgAbelianGroup.from_counts(0, {q: 1})
    H = [TRIVIAL] * (d - 2)
    H[k - 2] = Zq
    H[d - k - 1 - 2] = Zq
    return Block(
        f"Susp{d}^{k}({q})",
        d,
        TRIVIAL_GROUP,
        tuple(H),
        orientable=True,
        conventions={DUALITY_FILL},
    )


def connected_sum(B1: Block, B2: Block, name: str | None = None) -> Block:
    if B1.dim != B2.dim:
        raise BlockError(f"cannot form {B1.name} # {B2.name}: dimensions {B1.dim} and {B2.dim}")
    if B2.is_trivial:
        prime = B1.prime_asserted
    elif B1.is_trivial:
        prime = B2.prime_asserted
    else:
        prime = False
    orientable = B1.orientable and B2.orientable if None not in (B1.orientable, B2.orientable) else None
    return Block(
        name or f"{B1.name}#{B2.name}",
        B1.dim,
        free_product(B1.pi1, B2.pi1),
        tuple(direct_sum(a, b) for a, b in zip(B1.homology, B2.homology)),
        orientable=orientable,
        prime_asserted=prime,
        conventions=B1.conventions | B2.conventions,
    )


def prime_count_bound(B: Block) -> int:
    """Upper bound m + n on the number of non-trivial summands of any connected-sum splitting."""
    return int(grushko_factor_count(B.pi1)) + sum(cyclic_summand_total(G) for G in B.homology)


def signature_data(B: Block) -> dict:
    return {
        "dim": B.dim,
        "pi1": [[l.kind, l.n or l.name, m.value] for l, m in B.pi1.factors],
        "homology": {
            str(r): {"rank": G.rank, "torsion": [[q.p, q.j, m] for q, m in G.torsion]}
            for r, G in enumerate(B.homology, start=2)
        },
    }


def signature(B: Block) -> str:
    """Canonical string of (dim, pi1, homology). Equal strings mean model-indistinguishable."""
    return json.dumps(signature_data(B), sort_keys=True, separators=(",", ":"))


def renamed(B: Block, name: str) -> Block:
    return replace(B, name=name)
