"""Manifest ingestion and result documents.

A manifest is a JSON file with three sections: ``catalog`` (blocks and an
optional prime-indexed family), ``pattern`` (a finite graph or an infinite tree
with an assignment rule and usage declarations) and ``options``. It is checked
against ``schemas/manifest.schema.json`` before anything is built. Errors are
reported as :class:`ManifestError` carrying a dotted field path and, where it
can be found, the line in the source text.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from . import __version__
from .abelian import FgAbelianGroup, PrimePower
from .blocks import Block, BlockError, connected_sum, lens_block, renamed, smale_block, suspension_block
from .groups import FactorLabel, FreeProductClass, count
from .pattern import (
    SHAPES,
    BlockFamily,
    Catalog,
    FiniteGraph,
    InfiniteTree,
    OddPrimesTriangular,
    PatternError,
    SumManifold,
    UserPrimeList,
    constant_rule,
    cycle_rule,
    family_rule,
    parent_table_shape,
)

DEPTH_ENV = "NONLEAF_DEPTH"
DEFAULT_DEPTH = 64
FORMAT = "nonleaf-result/1"
JSON_SAFE = 2**53


class ManifestError(ValueError):
    def __init__(self, message: str, path: str = "", line: int | None = None):
        self.message, self.path, self.line = message, path, line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if path:
            where.append(f"field {path}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    return json.loads(resources.files("nonleaf").joinpath("schemas", f"{name}.schema.json").read_text())


def bundled_manifests() -> list[str]:
    folder = resources.files("nonleaf").joinpath("manifests")
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))


def resolve(ref: str) -> tuple[str, str]:
    """Manifest text and a display name, from a file path or a bundled manifest name."""
    path = Path(ref)
    if path.is_file():
        return path.read_text(), str(path)
    if ref in bundled_manifests():
        return resources.files("nonleaf").joinpath("manifests", f"{ref}.json").read_text(), ref
    raise ManifestError(f"no manifest file or bundled manifest named {ref!r} (bundled: {', '.join(bundled_manifests())})")


@dataclass
class Manifest:
    name: str
    data: dict
    digest: str
    manifold: SumManifold
    depth: int
    seed: int
    duality_validation: bool
    oracle: dict = field(default_factory=dict)


def default_depth() -> int:
    raw = os.environ.get(DEPTH_ENV)
    if raw is None:
        return DEFAULT_DEPTH
    try:
        value = int(raw)
    except ValueError:
        raise ManifestError(f"{DEPTH_ENV} must be a positive integer, got {raw!r}")
    if value < 1:
        raise ManifestError(f"{DEPTH_ENV} must be a positive integer, got {raw!r}")
    return value


def load(ref: str) -> Manifest:
    text, _ = resolve(ref)
    return parse(text)


def parse(text: str) -> Manifest:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"invalid JSON: {exc.msg} (column {exc.colno})", line=exc.lineno)
    validator = jsonschema.Draft202012Validator(load_schema("manifest"))
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = _most_specific(errors[0])
        path = list(err.absolute_path)
        if err.validator == "additionalProperties" and isinstance(err.instance, dict):
            extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
            path += extra[:1]
        raise ManifestError(err.message, _dotted(path), _locate(text, path))
    try:
        return _build(data, hashlib.sha256(text.encode()).hexdigest())
    except ManifestError as exc:
        if exc.line is None and exc.path:
            exc.line = _locate(text, _split(exc.path))
            exc.args = (str(ManifestError(exc.message, exc.path, exc.line)),)
        raise


DISCRIMINATORS = ("preset", "kind", "rule")


def _most_specific(err):
    """Descend into oneOf failures, following the branch whose discriminator matched."""
    while err.context:
        branches: dict = {}
        for e in err.context:
            branches.setdefault(e.schema_path[0], []).append(e)
        live = [
            errs
            for errs in branches.values()
            if not any(e.validator in ("const", "enum") and e.path and e.path[-1] in DISCRIMINATORS for e in errs)
        ]
        if not live:
            keys = {e.path[-1] for e in err.context if e.path}
            options = sorted({str(e.validator_value) for e in err.context if e.validator == "const"})
            key = next((k for k in DISCRIMINATORS if k in keys), None)
            if key is not None and options:
                err.message = f"{key} must be one of {options}"
                err.path.append(key)
            return err
        err = min(live[0], key=lambda e: -len(e.absolute_path))
    return err


def _dotted(path) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _split(dotted: str) -> list:
    return [int(t) if t.isdigit() else t for t in re.findall(r"[^.\[\]]+", dotted)]


def _positions(text: str) -> dict:
    """Offset of every value in a JSON text, keyed by its path tuple."""
    decoder = json.JSONDecoder()
    ws = re.compile(r"\s*")
    out = {}

    def value(i, path):
        i = ws.match(text, i).end()
        out[path] = i
        if text[i] == "{":
            i = ws.match(text, i + 1).end()
            if text[i] == "}":
                return i + 1
            while True:
                key, i = decoder.raw_decode(text, ws.match(text, i).end())
                i = ws.match(text, i).end() + 1  # colon
                out[path + (key,)] = i
                i = ws.match(text, value(i, path + (key,))).end()
                if text[i] == "}":
                    return i + 1
                i += 1
        if text[i] == "[":
            i = ws.match(text, i + 1).end()
            if text[i] == "]":
                return i + 1
            n = 0
            while True:
                i = ws.match(text, value(i, path + (n,))).end()
                n += 1
                if text[i] == "]":
                    return i + 1
                i += 1
        return decoder.raw_decode(text, i)[1]

    value(0, ())
    return out


def _locate(text: str, path) -> int | None:
    try:
        positions = _positions(text)
    except (ValueError, IndexError):
        return None
    path = tuple(path)
    while path not in positions and path:
        path = path[:-1]
    return text.count("\n", 0, positions.get(path, 0)) + 1


# ---------------------------------------------------------------- building


def _group(entry: dict, where: str) -> FgAbelianGroup:
    counts = {}
    for i, (p, j, mult) in enumerate(entry.get("torsion", [])):
        try:
            q = PrimePower.of(p, j)
        except ValueError as exc:
            raise ManifestError(str(exc), f"{where}.torsion[{i}]")
        counts[q] = counts.get(q, 0) + mult
    return FgAbelianGroup.from_counts(entry.get("rank", 0), counts)


def _factor(entry: dict, where: str) -> FactorLabel:
    kind = entry["kind"]
    try:
        if kind == "infinite_cyclic":
            return FactorLabel.Z()
        if kind == "finite_cyclic":
            if "n" not in entry:
                raise ManifestError("finite_cyclic factors need n", where)
            return FactorLabel.Zn(entry["n"])
        if "name" not in entry:
            raise ManifestError("opaque factors need a name", where)
        return FactorLabel.opaque(entry["name"], entry.get("odd_torsion_generated", False))
    except ValueError as exc:
        if isinstance(exc, ManifestError):
            raise
        raise ManifestError(str(exc), where)


def _block(entry: dict, known: dict[str, Block], where: str) -> Block:
    preset = entry["preset"]
    if preset == "declared":
        pi1 = FreeProductClass(tuple((_factor(f, f"{where}.pi1[{i}]"), f.get("mult", 1)) for i, f in enumerate(entry.get("pi1", []))))
        H = {int(r): _group(g, f"{where}.homology.{r}") for r, g in entry.get("homology", {}).items()}
        B = Block.declare(entry["name"], entry["dim"], pi1, H, orientable=entry.get("orientable"), prime_asserted=entry.get("prime"))
    elif preset == "lens":
        B = lens_block(entry["p"], entry.get("q", 1))
    elif preset == "smale":
        B = smale_block(_group({"torsion": entry["torsion"]}, where))
    elif preset == "suspension":
        B = suspension_block(entry["d"], PrimePower.of(entry["p"], entry.get("j", 1)), entry.get("k", 2))
    else:
        parts = []
        for i, n in enumerate(entry["of"]):
            if n not in known:
                raise ManifestError(f"connected sum refers to {n!r}, which is not declared earlier", f"{where}.of[{i}]")
            parts.append(known[n])
        B = parts[0]
        for other in parts[1:]:
            B = connected_sum(B, other)
        B = renamed(B, entry["name"])
    if "name" in entry and B.name != entry["name"]:
        B = renamed(B, entry["name"])
    return B


def _family(entry: dict) -> BlockFamily:
    primes = entry["primes"]
    if primes["kind"] == "odd_primes_triangular":
        seq = OddPrimesTriangular()
    else:
        try:
            seq = UserPrimeList([tuple(e) for e in primes["entries"]])
        except PatternError as exc:
            raise ManifestError(str(exc), "catalog.family.primes.entries")
    params = dict(entry.get("params", {}))
    if entry["template"] == "suspension" and "d" not in params:
        raise ManifestError("suspension families need params.d", "catalog.family.params")
    try:
        return BlockFamily(entry["template"], tuple(sorted(params.items())), seq, frozenset(entry.get("guarantees", [])))
    except (BlockError, ValueError) as exc:
        raise ManifestError(str(exc), "catalog.family")


def _build(data: dict, digest: str) -> Manifest:
    opts = data.get("options", {})
    duality = opts.get("duality_validation", True)
    blocks: dict[str, Block] = {}
    for i, entry in enumerate(data["catalog"].get("blocks", [])):
        where = f"catalog.blocks[{i}]"
        try:
            B = _block(entry, blocks, where)
        except (BlockError, ValueError) as exc:
            if isinstance(exc, ManifestError):
                raise
            raise ManifestError(str(exc), where)
        if B.name in blocks:
            raise ManifestError(f"block name {B.name!r} declared twice", where)
        if duality and B.orientable:
            bad = B.duality_violations()
            if bad:
                raise ManifestError(
                    f"block {B.name!r} fails torsion duality in degrees {bad} (set options.duality_validation to false to accept it)",
                    where,
                )
        blocks[B.name] = B
    family = _family(data["catalog"]["family"]) if "family" in data["catalog"] else None

    pat = data["pattern"]
    try:
        if pat["kind"] == "finite":
            names = pat["assignment"]
            for i, n in enumerate(names):
                if n not in blocks and (family is None or Catalog.of([], family=family).family_prime(n) is None):
                    raise ManifestError(f"unknown block {n!r}", f"pattern.assignment[{i}]")
            n = len(names)
            edges = pat.get("edges", [[i, i + 1] for i in range(n - 1)])
            for i, (a, b) in enumerate(edges):
                if a >= n or b >= n:
                    raise ManifestError(f"edge ({a}, {b}) refers to a vertex >= {n}", f"pattern.edges[{i}]")
            graph = FiniteGraph(tuple(range(n)), tuple(tuple(e) for e in edges), tuple(enumerate(names)))
            catalog = Catalog.of(blocks, family=family)
            W = SumManifold(graph, catalog, data["name"])
        else:
            W = _tree_manifold(data, pat, blocks, family)
    except ManifestError:
        raise
    except (PatternError, BlockError) as exc:
        raise ManifestError(str(exc), "pattern")
    depth = opts.get("depth") or default_depth()
    return Manifest(data["name"], data, digest, W, depth, opts.get("seed", 0), duality, dict(opts.get("oracle", {})))


def _tree_manifold(data: dict, pat: dict, blocks: dict, family: BlockFamily | None) -> SumManifold:
    kind = pat["kind"]
    if kind == "parent_table":
        if "parents" not in pat:
            raise ManifestError("parent_table patterns need parents", "pattern")
        try:
            parent, bound = parent_table_shape(pat["parents"], pat.get("stride", 1))
        except PatternError as exc:
            raise ManifestError(str(exc), "pattern.parents")
        params = (("parents", tuple(pat["parents"])), ("stride", pat.get("stride", 1)))
    else:
        for extra in ("parents", "stride"):
            if extra in pat:
                raise ManifestError(f"{extra} only applies to parent_table patterns", f"pattern.{extra}")
        parent, bound = SHAPES[kind]()
        params = ()
    rule = pat["assignment"]
    if rule["rule"] == "constant":
        used = [rule["block"]]
        assign = constant_rule(rule["block"])
    elif rule["rule"] == "cycle":
        used = list(rule["blocks"])
        assign = cycle_rule(rule["blocks"])
    else:
        if family is None:
            raise ManifestError("the family rule needs catalog.family", "pattern.assignment.rule")
        used = list(rule.get("prefix", [])) + ([rule["filler"]] if "filler" in rule else [])
        try:
            assign = family_rule(family, rule.get("prefix", ()), rule.get("filler"))
        except PatternError as exc:
            raise ManifestError(str(exc), "pattern.assignment")
    for n in used:
        if n not in blocks:
            raise ManifestError(f"unknown block {n!r}", "pattern.assignment")
    usage = {}
    for n, u in pat.get("usage", {}).items():
        if n not in blocks:
            raise ManifestError(f"usage declared for unknown block {n!r}", f"pattern.usage.{n}")
        usage[n] = count(u)
    tree = InfiniteTree(kind, parent, bound, assign, params)
    return SumManifold(tree, Catalog.of(blocks, usage, family), data["name"])


# ---------------------------------------------------------------- result documents


def timestamp_from(explicit: str | None) -> str | None:
    """An explicit timestamp, else one derived from SOURCE_DATE_EPOCH, else None (keeps output reproducible)."""
    if explicit:
        return explicit
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch and epoch.isdigit():
        import datetime

        return datetime.datetime.fromtimestamp(int(epoch), datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return None


def document(manifest: Manifest, command: str, status: str, assumptions=(), seed=None, timestamp=None, **sections) -> dict:
    doc = {
        "format": FORMAT,
        "tool": {"name": "nonleaf", "version": __version__},
        "manifest": {"name": manifest.name, "sha256": manifest.digest},
        "timestamp": timestamp,
        "command": command,
        "seed": seed,
        "status": status,
        "assumptions": list(assumptions),
    }
    doc.update(sections)
    doc = json.loads(json.dumps(_exact(doc)))
    jsonschema.Draft202012Validator(load_schema("certificate")).validate(doc)
    return doc


def _exact(x):
    # integers outside the IEEE-754 safe range travel as decimal strings
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, int):
        return str(x) if abs(x) > JSON_SAFE else x
    if isinstance(x, dict):
        return {str(k): _exact(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_exact(v) for v in x]
    return x


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
