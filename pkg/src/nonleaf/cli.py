"""Command-line front end.

Exit status: 0 certified or pass, 1 refuted or fail, 2 undecidable at the
sampling depth, 3 input error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .blocks import signature
from .criteria import (
    CERTIFIED,
    REFUTED,
    UNDECIDABLE,
    CriteriaError,
    Verdict,
    check_non_periodic,
    check_non_repeating,
    check_theorem_A,
    check_theorem_B,
    check_theorem_C,
    family_violations,
)
from .manifest import DEPTH_ENV, Manifest, ManifestError, bundled_manifests, document, dumps, load, timestamp_from
from .oracle import OracleError, suite
from .pattern import NotSymbolicallyComputable, PatternError, fundamental_group, homology, usage_spot_check

EXIT = {CERTIFIED: 0, "pass": 0, REFUTED: 1, "fail": 1, UNDECIDABLE: 2}
INPUT_ERROR = 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("manifest", help="manifest file, or the name of a bundled manifest")
    common.add_argument("--depth", type=int, help=f"sampling depth (default: manifest option, then ${DEPTH_ENV}, then 64)")
    common.add_argument("--out", type=Path, help="write the result document to this file")
    common.add_argument("--json", action="store_true", help="print the result document instead of the text report")
    common.add_argument("--timestamp", help="timestamp recorded in the document (default: from SOURCE_DATE_EPOCH, else none)")

    parser = argparse.ArgumentParser(prog="nonleaf", description="Invariants and non-leaf certificates for sum-manifolds.")
    parser.add_argument("--version", action="version", version=f"nonleaf {__version__}")
    parser.add_argument("--list-manifests", action="store_true", help="list the bundled manifests and exit")
    sub = parser.add_subparsers(dest="command")

    catalog = sub.add_parser("catalog", help="catalog operations").add_subparsers(dest="action", required=True)
    catalog.add_parser("validate", parents=[common], help="validate a manifest and spot-check its declarations")

    inv = sub.add_parser("invariants", parents=[common], help="homology H_r (or pi_1 with --r 1) of the sum-manifold")
    inv.add_argument("--r", type=int, required=True)

    check = sub.add_parser("check", help="single hypothesis checks").add_subparsers(dest="action", required=True)
    check.add_parser("non-repeating", parents=[common], help="is the block set non-repeating")
    per = check.add_parser("non-periodic", parents=[common], help="is the manifold non-periodic in dimension k")
    per.add_argument("--k", type=int, default=2)
    per.add_argument("--mode", choices=["homotopy", "homology"], default="homotopy")

    cert = sub.add_parser("certify", help="check every hypothesis of a non-leaf theorem")
    cert_sub = cert.add_subparsers(dest="action", required=True)
    for t in ("theorem-a", "theorem-c"):
        cert_sub.add_parser(t, parents=[common])
    tb = cert_sub.add_parser("theorem-b", parents=[common])
    tb.add_argument("--k", type=int, default=2)
    tb.add_argument("--mode", choices=["homotopy", "homology"], default="homotopy")

    orc = sub.add_parser("oracle", help="brute-force cross-checks").add_subparsers(dest="action", required=True)
    run = orc.add_parser("run", parents=[common])
    run.add_argument("--seed", type=int, help="seed for random instances (default: the manifest's)")
    run.add_argument("--instances", type=int, help="random instances per check (default: the manifest's, else 50)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_manifests:
        print("\n".join(bundled_manifests()))
        return 0
    if args.command is None:
        parser.print_help()
        return INPUT_ERROR
    try:
        m = load(args.manifest)
        if args.depth is not None:
            if args.depth < 1:
                raise ManifestError("--depth must be positive")
            m.depth = args.depth
        status, text, doc = _dispatch(args, m)
    except ManifestError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except (CriteriaError, OracleError, PatternError) as exc:
        if isinstance(exc, NotSymbolicallyComputable):
            print(f"undecidable: {exc}", file=sys.stderr)
            return EXIT[UNDECIDABLE]
        print(f"input error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    if args.out is not None:
        args.out.write_text(dumps(doc))
    print(dumps(doc) if args.json else text, end="" if args.json else "\n")
    return EXIT[status]


def _command(args) -> str:
    return " ".join(x for x in (args.command, getattr(args, "action", None)) if x)


def _dispatch(args, m: Manifest):
    ts = timestamp_from(args.timestamp)
    cmd = _command(args)
    if args.command == "catalog":
        return _validate(m, cmd, ts)
    if args.command == "invariants":
        return _invariants(m, args.r, cmd, ts)
    if args.command == "check":
        W = m.manifold
        if args.action == "non-repeating":
            v = check_non_repeating(W.catalog, m.depth)
        else:
            v = check_non_periodic(W, args.k, args.mode, m.depth)
            cmd += f" --k {args.k} --mode {args.mode}"
        doc = document(m, cmd, v.status, v.assumptions, timestamp=ts, verdict=v.to_json())
        return v.status, _verdict_text(m, v), doc
    if args.command == "certify":
        W = m.manifold
        if args.action == "theorem-a":
            c = check_theorem_A(W, m.depth)
        elif args.action == "theorem-b":
            c = check_theorem_B(W, args.k, args.mode, m.depth)
            cmd += f" --k {args.k} --mode {args.mode}"
        else:
            c = check_theorem_C(W, depth=m.depth)
        doc = document(m, cmd, c.status, c.assumptions, timestamp=ts, certificate=c.to_json())
        return c.status, _certificate_text(m, c), doc
    return _oracle(m, args, cmd, ts)


# ---------------------------------------------------------------- commands


def _validate(m: Manifest, cmd: str, ts):
    W = m.manifold
    problems = []
    if not W.is_finite:
        problems += [{"problem": p} for p in W.pattern.check_prefix(min(m.depth * 4, 1024))]
        problems += usage_spot_check(W, m.depth)
    fam = W.catalog.family
    violations = family_violations(W.catalog, m.depth)
    for g, w in sorted(violations.items()):
        if fam is not None and g in fam.guarantees:
            problems.append({"guarantee": g, "counterexample": w})
    blocks = W.catalog.sample(m.depth)
    by_sig: dict[str, list[str]] = {}
    for B in blocks:
        by_sig.setdefault(signature(B), []).append(B.name)
    indistinguishable = sorted(sorted(names) for names in by_sig.values() if len(names) > 1)
    duality = {B.name: B.duality_violations() for B in blocks if B.orientable and B.duality_violations()}
    status = "fail" if problems else "pass"
    report = {
        "blocks_checked": len(blocks),
        "dimension": W.dim,
        "problems": problems,
        "model_indistinguishable": indistinguishable,
        "duality_warnings": duality,
        "undeclared_guarantees_violated": sorted(g for g in violations if fam is None or g not in fam.guarantees),
    }
    doc = document(m, cmd, status, timestamp=ts, validation=report)
    lines = [f"manifest {m.name}: {status}", f"  dimension {W.dim}, {len(blocks)} blocks checked (depth {m.depth})"]
    for p in problems:
        lines.append(f"  problem: {p}")
    for names in indistinguishable:
        lines.append(f"  model-indistinguishable (identical invariant records): {', '.join(names)}")
    for name, rs in sorted(duality.items()):
        lines.append(f"  warning: {name} fails torsion duality in degrees {rs}")
    return status, "\n".join(lines), doc


def _invariants(m: Manifest, r: int, cmd: str, ts):
    W = m.manifold
    cmd += f" --r {r}"
    if r == 1:
        G = fundamental_group(W, m.depth)
        head = [[str(l), c.to_json()] for l, c in G.head.factors]
        what = "pi_1 (free factors)"
        rank = None
    else:
        if not 2 <= r <= W.dim - 1:
            raise ManifestError(f"--r must lie in 1..{W.dim - 1}")
        G = homology(W, r, m.depth)
        head = [[str(q), c.to_json()] for q, c in G.head]
        if G.rank:
            head.insert(0, ["Z", G.rank.to_json()])
        what = f"H_{r}"
        rank = G.rank.to_json()
    tail = None
    if G.tail is not None:
        tail = {
            "description": G.tail.description,
            "guarantees": sorted(G.tail.guarantees),
            "sample": [[str(k), c] for k, c in G.tail.sample(min(m.depth, 16))],
        }
    inv = {"group": what, "depth": m.depth, "head": head, "tail": tail}
    if rank is not None:
        inv["rank"] = rank
    doc = document(m, cmd, "pass", timestamp=ts, invariants=inv)
    lines = [f"{what} of {m.name}", f"  {'summand':<16} multiplicity"]
    for k, c in head:
        lines.append(f"  {k:<16} {'ω' if c == 'omega' else c}")
    if not head:
        lines.append("  (trivial head)")
    if tail:
        lines.append(f"  + tail: {tail['description']}")
        lines.append("    " + ", ".join(f"{k}:{c}" for k, c in tail["sample"]) + ", ...")
    return "pass", "\n".join(lines), doc


def _oracle(m: Manifest, args, cmd: str, ts):
    opts = m.oracle
    seed = args.seed if args.seed is not None else m.seed
    instances = args.instances if args.instances is not None else opts.get("instances", 50)
    reports = suite(
        m.manifold,
        seed=seed,
        instances=instances,
        cap=opts.get("enumeration_cap", 10_000),
        max_vertices=opts.get("max_vertices", 12),
        max_matrix=opts.get("max_matrix", 6),
        max_entry=opts.get("max_entry", 10),
        depths=opts.get("truncation_depths", (10, 100, 1000)),
    )
    failed = [r for r in reports if not r.passed]
    status = "fail" if failed else "pass"
    doc = document(m, f"{cmd} --seed {seed}", status, seed=seed, timestamp=ts, report=[r.to_json() for r in reports])
    by_check: dict[str, list[int]] = {}
    for r in reports:
        tally = by_check.setdefault(r.check, [0, 0])
        tally[0 if r.passed else 1] += 1
    lines = [f"oracle run on {m.name} (seed {seed}): {status}"]
    for check, (ok, bad) in sorted(by_check.items()):
        lines.append(f"  {check:<24} {ok} passed, {bad} failed")
    for r in failed[:10]:
        lines.append(f"  FAILED {r.check} {r.instance}: expected {r.to_json()['expected']}, got {r.to_json()['computed']}")
    return status, "\n".join(lines), doc


# ---------------------------------------------------------------- text reports


def _verdict_text(m: Manifest, v: Verdict) -> str:
    lines = [f"{m.name}: {v.hypothesis}: {v.status}"]
    for k, w in sorted(v.witnesses.items()):
        lines.append(f"  {k}: {w}")
    for a in v.assumptions:
        lines.append(f"  assumes {_assumption_text(a)}")
    return "\n".join(lines)


def _certificate_text(m: Manifest, c) -> str:
    lines = [f"theorem {c.theorem} on {m.name}: {c.status}"]
    for v in c.verdicts:
        lines.append(f"  [{v.status}] {v.hypothesis}")
        if v.status != CERTIFIED:
            for k, w in sorted(v.witnesses.items()):
                lines.append(f"      {k}: {w}")
    if c.status == CERTIFIED:
        lines.append(f"  conclusion: {m.name} is {c.to_json()['conclusion']['statement']}")
    for a in c.assumptions:
        lines.append(f"  assumes {_assumption_text(a)}")
    for note in c.model_limitations:
        lines.append(f"  model: {note}")
    return "\n".join(lines)


def _assumption_text(a: dict) -> str:
    if a["kind"] == "schema_guarantee":
        return f"{a['guarantee']} for {a['schema']} (checked to depth {a['verified_depth']})"
    return f"{a['label']} is {a['property'].replace('_', ' ')} (declared)"


if __name__ == "__main__":
    sys.exit(main())
