"""Hypothesis checkers for the non-leaf theorems.

Each checker returns a :class:`Verdict` (or a :class:`Certificate` bundling
several). Statements that quantify over infinitely many blocks can only be
checked on a finite sample; they certify when the catalog's block family
declares the guarantees that cover the unsampled part, and every such
guarantee is then listed among the verdict's assumptions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .abelian import PrimePower
from .blocks import DUALITY_FILL, Block, signature
from .groups import ExtendedCount, FactorLabel, shared_factors
from .pattern import (
    GUARANTEES,
    Catalog,
    NotSymbolicallyComputable,
    PatternError,
    SumManifold,
    fundamental_group,
    homology,
    pi_k,
    usage_spot_check,
)

CERTIFIED = "certified"
REFUTED = "refuted"
UNDECIDABLE = "undecidable-at-depth"

DEFAULT_DEPTH = 64

CONCLUSION = "not homeomorphic to any leaf of a codimension one foliation of a compact manifold"

MODEL_LIMITATIONS = {
    "nominal": "free factors are compared by label: isomorphic groups under different opaque names are treated as distinct",
    "signature": "non-homeomorphic blocks are modelled as blocks with distinct invariant signatures",
    DUALITY_FILL: "suspension blocks carry a duality-filled copy of Z_q in degree d-k-1; only H_k is prescribed by their construction",
}


class CriteriaError(ValueError):
    pass


@dataclass
class Verdict:
    hypothesis: str
    status: str
    witnesses: dict = field(default_factory=dict)
    assumptions: list[dict] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED

    def to_json(self) -> dict:
        return {
            "hypothesis": self.hypothesis,
            "status": self.status,
            "witnesses": self.witnesses,
            "assumptions": self.assumptions,
        }


@dataclass
class Certificate:
    theorem: str
    manifold: dict
    verdicts: list[Verdict]
    depth: int
    model_limitations: list[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        return combine(self.verdicts)

    @property
    def assumptions(self) -> list[dict]:
        return _dedupe(a for v in self.verdicts for a in v.assumptions)

    def first_failure(self) -> Verdict | None:
        return next((v for v in self.verdicts if v.status == REFUTED), None) or next(
            (v for v in self.verdicts if v.status == UNDECIDABLE), None
        )

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "status": self.status,
            "manifold": self.manifold,
            "sampling_depth": self.depth,
            "hypotheses": [v.to_json() for v in self.verdicts],
            "conclusion": {"statement": CONCLUSION, "established": self.status == CERTIFIED},
            "assumptions": self.assumptions,
            "model_limitations": self.model_limitations,
        }


def combine(verdicts) -> str:
    statuses = [v.status for v in verdicts]
    if REFUTED in statuses:
        return REFUTED
    if UNDECIDABLE in statuses:
        return UNDECIDABLE
    return CERTIFIED


def _dedupe(items) -> list[dict]:
    out, seen = [], set()
    for a in items:
        key = tuple(sorted((k, str(v)) for k, v in a.items()))
        if key not in seen:
            seen.add(key)
            out.append(a)
    return out


def _summand_str(key) -> str:
    return "Z" if key == "Z" else str(key)


def _summand_sort(key):
    return (0, 0) if key == "Z" else (key.p, key.j)


def _summands(B: Block, r: int) -> list[tuple[object, int]]:
    G = B.H(r)
    return ([("Z", G.rank)] if G.rank else []) + list(G.torsion)


def schema_assumptions(catalog: Catalog, depth: int) -> list[dict]:
    fam = catalog.family
    if fam is None or not fam.infinite:
        return []
    return [
        {"kind": "schema_guarantee", "guarantee": g, "schema": fam.describe(), "verified_depth": depth}
        for g in sorted(fam.guarantees)
    ]


def family_violations(catalog: Catalog, depth: int) -> dict[str, dict]:
    """First counterexample, among the first ``depth`` family members, to each guarantee."""
    fam = catalog.family
    if fam is None:
        return {}
    named = [B for _, B in catalog.blocks]
    named_keys = set()
    for B in named:
        named_keys.update(B.pi1.labels())
        for r in range(2, B.dim):
            named_keys.update(q for q, _ in B.H(r).torsion)
    named_sigs = {signature(B): B.name for B in named}
    found: dict[str, dict] = {}
    seen_primes: dict[int, int] = {}
    for i, (p, B) in enumerate(itertools.islice(fam.members(), depth)):
        if "all_odd" not in found and p % 2 == 0:
            found["all_odd"] = {"member": B.name, "index": i, "prime": p}
        if "distinct" not in found:
            keys = set(B.pi1.labels())
            for r in range(2, B.dim):
                keys.update(q for q, _ in B.H(r).torsion)
            clash = sorted(str(k) for k in keys & named_keys)
            if p in seen_primes:
                found["distinct"] = {"member": B.name, "index": i, "repeats_index": seen_primes[p]}
            elif signature(B) in named_sigs:
                found["distinct"] = {"member": B.name, "index": i, "same_invariants_as": named_sigs[signature(B)]}
            elif clash:
                found["distinct"] = {"member": B.name, "index": i, "shares_with_named_blocks": clash}
        seen_primes.setdefault(p, i)
        u = fam.usage(p)
        if "finite_nonzero" not in found and u < 1:
            found["finite_nonzero"] = {"member": B.name, "index": i, "usage": u}
    return found


def _guarantee_gate(catalog: Catalog, depth: int, needed: tuple[str, ...], hypothesis: str) -> Verdict | None:
    """Refute on a sampled counterexample to a declared guarantee, or flag missing ones."""
    fam = catalog.family
    bad = {g: w for g, w in family_violations(catalog, depth).items() if g in fam.guarantees}
    if bad:
        return Verdict(hypothesis, REFUTED, {"guarantee_violated": bad, "sampled_depth": depth})
    missing = [g for g in needed if g not in fam.guarantees]
    if missing:
        return Verdict(
            hypothesis,
            UNDECIDABLE,
            {"missing_guarantees": missing, "sampled_depth": depth, "family": fam.describe()},
        )
    return None


# ---------------------------------------------------------------- non-repeating sets


def check_non_repeating(S: Catalog, depth: int = DEFAULT_DEPTH) -> Verdict:
    """Pairwise free-factor disjointness plus a private homology summand for every simply connected block."""
    hyp = "non-repeating block set"
    blocks = sorted(S.sample(depth), key=lambda b: b.name)
    dims = sorted({b.dim for b in blocks})
    if len(dims) > 1:
        by_dim = {d: [b.name for b in blocks if b.dim == d] for d in dims}
        return Verdict(hyp, REFUTED, {"dimension_mismatch": {str(d): n for d, n in by_dim.items()}})

    shared = []
    for a, b in itertools.combinations(blocks, 2):
        common = shared_factors(a.pi1, b.pi1)
        if common:
            shared.append({"blocks": [a.name, b.name], "shared_factors": [str(l) for l in common]})

    private: dict[str, dict] = {}
    lacking = []
    for B in blocks:
        if not B.simply_connected:
            continue
        witness = _private_summand(B, blocks)
        if witness is None:
            lacking.append(B.name)
        else:
            private[B.name] = witness

    if shared or lacking:
        w = {}
        if shared:
            w["shared_factors"] = shared
        if lacking:
            w["no_distinguishing_summand"] = lacking
        return Verdict(hyp, REFUTED, w)

    witnesses = {"distinguishing_summands": private, "blocks_checked": len(blocks)}
    fam = S.family
    if fam is None or not fam.infinite:
        return Verdict(hyp, CERTIFIED, witnesses)
    gate = _guarantee_gate(S, depth, ("distinct",), hyp)
    if gate is not None:
        gate.witnesses.update(witnesses)
        return gate
    return Verdict(hyp, CERTIFIED, witnesses, schema_assumptions(S, depth))


def _private_summand(B: Block, blocks: list[Block]) -> dict | None:
    others = [b for b in blocks if b is not B]
    for r in range(2, B.dim):
        for q, _ in B.H(r).torsion:
            if all(dict(o.H(r).torsion).get(q, 0) == 0 for o in others):
                return {"r": r, "summand": str(q), "p": q.p, "j": q.j}
    return None


# ---------------------------------------------------------------- finite repetition


def _bound_with_witness(W: SumManifold, B: Block, depth: int) -> tuple[ExtendedCount, dict]:
    if B.is_trivial:
        raise CriteriaError("every manifold contains arbitrarily many deleted spheres; B must be non-trivial")
    if B.dim != W.dim:
        raise CriteriaError(f"block {B.name!r} has dimension {B.dim}, manifold has {W.dim}")
    best = None
    if not B.simply_connected:
        pi = fundamental_group(W, depth)
        for label, c in B.pi1.factors:
            value = pi.multiplicity(label) // int(c)
            if best is None or value < best[0]:
                best = (value, {"via": "pi1", "factor": str(label), "per_block": int(c), "in_manifold": pi.multiplicity(label).to_json()})
        return best[0], best[1]
    for r in range(2, B.dim):
        H = None
        for key, c in sorted(_summands(B, r), key=lambda kc: _summand_sort(kc[0])):
            if H is None:
                H = homology(W, r, depth)
            m = H.summand_multiplicity(key)
            value = m // c
            if best is None or value < best[0]:
                best = (value, {"via": "homology", "r": r, "summand": _summand_str(key), "per_block": c, "in_manifold": m.to_json()})
    return best[0], best[1]


def max_disjoint_deleted_blocks_bound(W: SumManifold, B: Block, depth: int = DEFAULT_DEPTH) -> ExtendedCount:
    """Upper bound on the number of pairwise disjoint deleted B-blocks inside W.

    Disjoint deleted copies of B split off free factors of pi1(W) (or direct
    summands of H_r(W) when B is simply connected), so each factor of B caps
    the count at floor(multiplicity in W / multiplicity in B). Ties between
    witnesses resolve to the least (r, p, j).
    """
    return _bound_with_witness(W, B, depth)[0]


def _usage_of(W: SumManifold, B: Block) -> ExtendedCount:
    if B.name not in W.catalog:
        return ExtendedCount(0)
    u = W.catalog.declared_usage(B.name)
    if u is None:
        raise NotSymbolicallyComputable(f"usage of block {B.name!r} is not declared")
    return u


def repeats_finitely(W: SumManifold, B: Block, depth: int = DEFAULT_DEPTH) -> Verdict:
    hyp = f"{B.name} repeats finitely"
    usage = _usage_of(W, B)
    bound, how = _bound_with_witness(W, B, depth)
    w = {"block": B.name, "usage": usage.to_json(), "bound": bound.to_json(), "bound_witness": how}
    if not usage:
        return Verdict(hyp, REFUTED, {**w, "reason": "no vertex uses the block, so no deleted copy is witnessed"})
    if not bound.is_finite:
        return Verdict(hyp, REFUTED, {**w, "reason": "bound is infinite"})
    return Verdict(hyp, CERTIFIED, w)


# ---------------------------------------------------------------- non-periodicity


def check_non_periodic(W: SumManifold, k: int = 2, mode: str = "homotopy", depth: int = DEFAULT_DEPTH) -> Verdict:
    if mode not in ("homotopy", "homology"):
        raise CriteriaError(f"mode must be homotopy or homology, not {mode!r}")
    hyp = f"non-periodic in {mode} in dimension {k}"
    group = f"pi_{k}" if mode == "homotopy" else f"H_{k}"
    if not 2 <= k <= W.dim - 1:
        raise CriteriaError(f"k must lie in 2..{W.dim - 1}")
    try:
        G = pi_k(W, k, depth) if mode == "homotopy" else homology(W, k, depth)
    except NotSymbolicallyComputable:
        raise
    except PatternError as exc:  # a block that is not (k-1)-connected, or a cycle
        return Verdict(hyp, REFUTED, {"precondition": str(exc)})

    head = {str(q): c.to_json() for q, c in G.head}
    if G.rank:
        return Verdict(hyp, REFUTED, {"group": group, "infinite_order_summands": G.rank.to_json()})
    even = [(q, c) for q, c in G.head if q.p == 2]
    if even:
        q, c = even[0]
        return Verdict(hyp, REFUTED, {"group": group, "even_prime_power": str(q), "multiplicity": c.to_json()})
    finite_nonzero = sorted(str(q) for q, c in G.head if c.is_finite)
    if G.tail is None:
        w = {
            "group": group,
            "head": head,
            "reason": "only finitely many prime powers occur",
            "finite_nonzero_prime_powers": finite_nonzero,
        }
        repeated = [str(q) for q, c in G.head if not c.is_finite]
        if repeated:
            w["multiplicity_omega"] = repeated
        return Verdict(hyp, REFUTED, w)
    sample = G.tail.sample(depth)
    violations = G.tail.violations(depth, head_keys=[q for q, _ in G.head])
    if "all_odd" in violations:
        return Verdict(hyp, REFUTED, {"group": group, "even_prime_power_in_tail": violations["all_odd"], "sampled_depth": depth})
    declared_bad = {g: v for g, v in violations.items() if g in G.tail.guarantees}
    if declared_bad:
        return Verdict(hyp, REFUTED, {"group": group, "guarantee_violated": declared_bad, "sampled_depth": depth})
    w = {
        "group": group,
        "head": head,
        "tail": G.tail.description,
        "tail_sample": [[str(q), c] for q, c in sample[:8]],
        "sampled_depth": depth,
    }
    missing = [g for g in GUARANTEES if g not in G.tail.guarantees]
    if missing:
        return Verdict(hyp, UNDECIDABLE, {**w, "missing_guarantees": missing})
    return Verdict(hyp, CERTIFIED, w, schema_assumptions(W.catalog, depth))


# ---------------------------------------------------------------- theorem checkers


def describe(W: SumManifold) -> dict:
    p = W.pattern
    d = {"name": W.name, "dimension": W.dim}
    if W.is_finite:
        d["pattern"] = {"kind": "finite", "vertices": len(p.vertices), "edges": len(p.edges), "cycle_rank": p.cycle_rank}
    else:
        d["pattern"] = {"kind": p.shape}
    named = {}
    for name, B in W.catalog.blocks:
        u = W.catalog.declared_usage(name)
        named[name] = {"signature": signature(B), "usage": None if u is None else u.to_json()}
    d["named_blocks"] = named
    fam = W.catalog.family
    d["family"] = None if fam is None else {"description": fam.describe(), "guarantees": sorted(fam.guarantees)}
    return d


def _limitations(blocks: list[Block]) -> list[str]:
    out = [MODEL_LIMITATIONS["nominal"], MODEL_LIMITATIONS["signature"]]
    if any(DUALITY_FILL in b.conventions for b in blocks):
        out.append(MODEL_LIMITATIONS[DUALITY_FILL])
    return out


def _tree_verdict(W: SumManifold) -> Verdict:
    hyp = "patterned on an infinite tree"
    if W.is_finite:
        return Verdict(hyp, REFUTED, {"pattern": "finite graph", "vertices": len(W.pattern.vertices)})
    problems = W.pattern.check_prefix(256)
    if problems:
        return Verdict(hyp, REFUTED, {"generator_problems": problems[:5]})
    return Verdict(hyp, CERTIFIED, {"shape": W.pattern.shape})


def _usage_verdict(W: SumManifold, depth: int) -> Verdict:
    hyp = "declared usage counts agree with the assignment"
    if W.is_finite:
        return Verdict(hyp, CERTIFIED, {"exact": True})
    problems = usage_spot_check(W, depth)
    if problems:
        return Verdict(hyp, REFUTED, {"violation": problems[0], "sampled_vertices": depth})
    return Verdict(hyp, CERTIFIED, {"sampled_vertices": depth})


def _odd_torsion_verdict(W: SumManifold, blocks: list[Block], depth: int, scope: str) -> Verdict:
    hyp = "fundamental group of each block is generated by torsion elements of odd order (or trivial)"
    assumptions = []
    for B in sorted(blocks, key=lambda b: b.name):
        bad = [str(l) for l in B.pi1.labels() if not l.odd_torsion]
        if bad:
            return Verdict(hyp, REFUTED, {"block": B.name, "pi1": str(B.pi1), "offending_factors": bad, "scope": scope})
        for l in B.pi1.labels():
            if l.kind == "opaque":
                assumptions.append({"kind": "declared_label", "label": l.name, "property": "odd_torsion_generated"})
    w = {"blocks_checked": len(blocks), "scope": scope}
    fam = W.catalog.family
    if fam is not None and fam.infinite and not fam.member(fam.first_prime()).simply_connected:
        gate = _guarantee_gate(W.catalog, depth, ("all_odd",), hyp)
        if gate is not None:
            gate.witnesses.update(w)
            return gate
        assumptions.extend(schema_assumptions(W.catalog, depth))
    return Verdict(hyp, CERTIFIED, w, assumptions)


def _used_blocks(W: SumManifold, depth: int) -> list[Block]:
    if W.is_finite:
        return list({b.name: b for b in W.vertex_blocks()}.values())
    return [B for B, _ in W.used_blocks(depth)]


def _finite_repetition_verdict(W: SumManifold, depth: int) -> Verdict:
    hyp = "infinitely many non-homeomorphic blocks repeat finitely"
    fam = W.catalog.family
    if W.is_finite or fam is None or not fam.infinite:
        finite = []
        for name, B in W.catalog.blocks:
            if not B.is_trivial and repeats_finitely(W, B, depth).certified:
                finite.append(name)
        return Verdict(hyp, REFUTED, {"reason": "the manifold is built from finitely many blocks", "finitely_repeating": finite})
    gate = _guarantee_gate(W.catalog, depth, ("distinct", "finite_nonzero"), hyp)
    if gate is not None:
        return gate
    sigs: dict[str, str] = {}
    bounds = []
    for p, B in itertools.islice(fam.members(), depth):
        s = signature(B)
        if s in sigs:
            return Verdict(hyp, REFUTED, {"same_invariants": [sigs[s], B.name]})
        sigs[s] = B.name
        v = repeats_finitely(W, B, depth)
        if not v.certified:
            return Verdict(hyp, REFUTED, {"member": B.name, "verdict": v.witnesses})
        bounds.append([B.name, v.witnesses["usage"], v.witnesses["bound"]])
    return Verdict(
        hyp,
        CERTIFIED,
        {"family": fam.describe(), "sampled_members": len(bounds), "usage_and_bound": bounds[:8]},
        schema_assumptions(W.catalog, depth),
    )


def _theorem_a_verdicts(W: SumManifold, depth: int) -> list[Verdict]:
    verdicts = [_tree_verdict(W), _usage_verdict(W, depth)]
    try:
        blocks = _used_blocks(W, depth)
    except NotSymbolicallyComputable as exc:
        verdicts.append(Verdict("invariants are symbolically computable", UNDECIDABLE, {"reason": str(exc)}))
        return verdicts
    verdicts.append(_odd_torsion_verdict(W, blocks, depth, "blocks used"))
    verdicts.append(_finite_repetition_verdict(W, depth))
    return verdicts


def check_theorem_A(W: SumManifold, depth: int = DEFAULT_DEPTH) -> Certificate:
    verdicts = _theorem_a_verdicts(W, depth)
    return Certificate("A", describe(W), verdicts, depth, _limitations(W.catalog.sample(depth)))


def check_theorem_B(W: SumManifold, k: int = 2, mode: str = "homotopy", depth: int = DEFAULT_DEPTH) -> Certificate:
    """Non-periodicity, then the hypotheses it is shown to imply, replayed one by one."""
    verdicts = [check_non_periodic(W, k, mode, depth)]
    if verdicts[0].certified:
        verdicts.extend(_theorem_a_verdicts(W, depth))
    return Certificate("B", describe(W), verdicts, depth, _limitations(W.catalog.sample(depth)))


def check_theorem_C(W: SumManifold, S: Catalog | None = None, depth: int = DEFAULT_DEPTH) -> Certificate:
    S = S or W.catalog
    verdicts = [_tree_verdict(W), _usage_verdict(W, depth)]
    if not W.is_finite:
        for name in sorted({W.pattern.assign(v) for v in range(depth)}):
            if name not in S:
                verdicts.append(Verdict("all assigned blocks belong to the set", REFUTED, {"block": name}))
                break
    verdicts.append(check_non_repeating(S, depth))
    verdicts.append(_odd_torsion_verdict(W, S.sample(depth), depth, "all blocks of the set"))
    verdicts.append(_finitely_used_verdict(W, S, depth))
    if combine(verdicts) == CERTIFIED:
        verdicts.append(_finite_repetition_verdict(W, depth))
    return Certificate("C", describe(W), verdicts, depth, _limitations(S.sample(depth)))


def _finitely_used_verdict(W: SumManifold, S: Catalog, depth: int) -> Verdict:
    hyp = "infinitely many blocks are used a finite non-zero number of times"
    try:
        named = [n for n, _ in S.blocks if 0 < (S.declared_usage(n) or ExtendedCount(0)) < ExtendedCount(None)]
    except NotSymbolicallyComputable as exc:
        return Verdict(hyp, UNDECIDABLE, {"reason": str(exc)})
    fam = S.family
    if W.is_finite or fam is None or not fam.infinite:
        return Verdict(hyp, REFUTED, {"finitely_used": named, "reason": "only finitely many blocks are available"})
    gate = _guarantee_gate(S, depth, ("finite_nonzero",), hyp)
    if gate is not None:
        return gate
    sample = [[B.name, fam.usage(p)] for p, B in itertools.islice(fam.members(), min(depth, 8))]
    return Verdict(
        hyp,
        CERTIFIED,
        {"finitely_used_named": named, "family": fam.describe(), "family_usage_sample": sample},
        schema_assumptions(S, depth),
    )
