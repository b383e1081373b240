"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the summary is printed at the
end of the module) or directly with ``python tests/test_acceptance.py``.
"""

import functools
import itertools
import json
import os
import random
import subprocess
import sys
import time

import pytest

from nonleaf.abelian import FgAbelianGroup, PrimePower
from nonleaf.blocks import Block, connected_sum, lens_block, prime_count_bound, renamed, signature, smale_block, suspension_block
from nonleaf.cli import main
from nonleaf.criteria import (
    CERTIFIED,
    REFUTED,
    check_non_periodic,
    check_non_repeating,
    check_theorem_A,
    check_theorem_C,
    repeats_finitely,
)
from nonleaf.groups import FactorLabel
from nonleaf.manifest import bundled_manifests, load, parse
from nonleaf.oracle import (
    OracleError,
    counting_consistency,
    random_finite_pattern,
    random_matrix,
    smith_check,
    stacked_presentation_check,
    truncation_convergence,
)
from nonleaf.pattern import Catalog, SumManifold

RESULTS: dict[int, tuple[bool, str]] = {}
ODD_TORSION = "generated by torsion elements of odd order"


def record(n, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*a, **kw):
            t0 = time.perf_counter()
            try:
                detail = fn(*a, **kw) or ""
            except BaseException as exc:
                RESULTS[n] = (False, f"{title}: {type(exc).__name__}: {exc}")
                raise
            RESULTS[n] = (True, f"{title} ({time.perf_counter() - t0:.1f}s) {detail}".rstrip())

        return run

    return wrap


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    reporter = request.config.pluginmanager.getplugin("terminalreporter")
    write = reporter.write_line if reporter else print
    write("")
    for line in summary_lines():
        write(line)


def summary_lines():
    out = []
    for n in range(1, 11):
        ok, text = RESULTS.get(n, (False, "not run"))
        out.append(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {text}")
    return out


def S(p, j=1, d=6):
    return suspension_block(d, PrimePower(p, j))


# 1 ----------------------------------------------------------------------------


@record(1, "Smith normal form vs determinant and cokernel enumeration, 1000 matrices")
def test_smith_normal_form_correctness():
    t0 = time.perf_counter()
    square = 0
    for seed in range(1000):
        M = random_matrix(random.Random(seed))
        try:
            report = smith_check(M, seed=seed)
        except OracleError as exc:
            pytest.fail(f"seed {seed}: oracle could not run: {exc}")
        assert report.passed, f"seed {seed}: {report.details}"
        square += report.expected is not None
    elapsed = time.perf_counter() - t0
    assert elapsed < 30, f"took {elapsed:.1f}s"
    assert square > 100
    return f"[{square} square nonsingular instances enumerated]"


# 2 ----------------------------------------------------------------------------


def six_block_catalog():
    E = Block.declare("E", 6, homology={2: FgAbelianGroup.from_counts(0, {PrimePower(2, 1): 1}), 3: FgAbelianGroup(2)})
    F = Block.declare("F", 6, homology={2: FgAbelianGroup.from_counts(1, {PrimePower(2, 2): 1}), 4: FgAbelianGroup.from_counts(1, {PrimePower(2, 2): 1})})
    return Catalog.of([S(3), S(5), S(3, 2), S(7), E, F])


@record(2, "Homology of finite trees vs stacked presentations, 200 trees")
def test_homology_additivity():
    t0 = time.perf_counter()
    cat = six_block_catalog()
    names = [n for n, _ in cat.blocks]
    for seed in range(200):
        g = random_finite_pattern(random.Random(seed), names, 12)
        W = SumManifold(g, cat)
        for r in range(2, 6):
            rep = stacked_presentation_check(W, r, seed)
            assert rep.passed, f"seed {seed}, r={r}: expected {rep.expected}, computed {rep.computed}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 30, f"took {elapsed:.1f}s"


# 3 ----------------------------------------------------------------------------


@record(3, "CP2 # CP2bar # CP2bar vs (S2 x S2) # CP2bar indistinguishable, flagged")
def test_cp2_indistinguishability(capsys):
    m = load("cp2_sums")
    left = m.manifold.catalog.get("P#Pbar#Pbar")
    right = m.manifold.catalog.get("Q#Pbar")
    assert m.manifold.catalog.get("P").H(2).rank == 1 and m.manifold.catalog.get("Q").H(2).rank == 2
    assert signature(left) == signature(right)
    assert main(["catalog", "validate", "cp2_sums", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert ["P#Pbar#Pbar", "Q#Pbar"] in doc["validation"]["model_indistinguishable"]


# 4 ----------------------------------------------------------------------------


def prime_pool(rng):
    kind = rng.choice(["lens", "suspension", "smale"])
    ps = [3, 5, 7, 11, 13, 17]
    if kind == "lens":
        return [lens_block(p, rng.randrange(1, p)) for p in ps]
    if kind == "suspension":
        return [S(p, rng.randint(1, 2)) for p in ps]
    return [smale_block(FgAbelianGroup.cyclic(p)) for p in ps]


@record(4, "Prime-count bound >= number of primes, additive, 100 assemblies")
def test_prime_count_bound():
    for seed in range(100):
        rng = random.Random(seed)
        pool = prime_pool(rng)
        parts = [(rng.choice(pool), 1) for _ in range(rng.randint(1, 8))]
        while len(parts) > 1:
            i, j = sorted(rng.sample(range(len(parts)), 2))
            (a, ca), (b, cb) = parts[i], parts[j]
            joined = connected_sum(a, b)
            assert prime_count_bound(joined) == prime_count_bound(a) + prime_count_bound(b), f"seed {seed}"
            parts = [p for k, p in enumerate(parts) if k not in (i, j)] + [(joined, ca + cb)]
        B, c = parts[0]
        assert prime_count_bound(B) >= c, f"seed {seed}: bound {prime_count_bound(B)} < {c}"


# 5 ----------------------------------------------------------------------------


@record(5, "Vertex count <= deleted-block bound, 500 patterns")
def test_counting_consistency():
    checks = 0
    for seed in range(500):
        rng = random.Random(seed)
        pool = prime_pool(rng)
        if rng.random() < 0.3:
            pool.append(renamed(connected_sum(pool[0], pool[1]), "pair"))
        cat = Catalog.of(pool)
        g = random_finite_pattern(rng, [b.name for b in pool], 12, rng.randint(0, 2))
        W = SumManifold(g, cat)
        for B in pool:
            rep = counting_consistency(W, B, seed)
            assert rep.passed, f"seed {seed}, block {B.name}: lower {rep.details['lower']} > bound {rep.computed}"
            checks += 1
    return f"[{checks} block checks]"


# 6, 7 -------------------------------------------------------------------------


def pipeline(name):
    t0 = time.perf_counter()
    m = load(name)
    W = m.manifold
    for mode in ("homotopy", "homology"):
        v = check_non_periodic(W, 2, mode, m.depth)
        assert v.status == CERTIFIED, (mode, v.witnesses)
    cert = check_theorem_C(W, depth=m.depth)
    assert cert.status == CERTIFIED, cert.first_failure()
    declared = set(m.data["catalog"]["family"]["guarantees"])
    assumptions = cert.assumptions
    assert all(a["kind"] == "schema_guarantee" for a in assumptions)
    assert sorted(a["guarantee"] for a in assumptions) == sorted(declared)
    rep = truncation_convergence(W, [10, 100, 1000])
    assert rep.passed, rep.details
    elapsed = time.perf_counter() - t0
    assert elapsed < 60, f"took {elapsed:.1f}s"
    return W, m


@record(6, "Odd-prime ray, d = 6: non-periodic, theorem C, truncations")
def test_pipeline_d6():
    pipeline("odd_prime_ray_d6")


@record(7, "Odd-prime ray, d = 5 (Smale blocks): same pipeline, two summands per block")
def test_pipeline_d5():
    W, m = pipeline("odd_prime_ray_d5")
    fam = W.catalog.family
    for p, B in itertools.islice(fam.members(), 10):
        v = repeats_finitely(W, B, m.depth)
        assert v.status == CERTIFIED
        assert v.witnesses["bound_witness"]["per_block"] == 2
        assert v.witnesses["bound"] == fam.usage(p)


# 8 ----------------------------------------------------------------------------


@record(8, "Planted non-repeating violations refuted with correct witnesses, 100 + 100")
def test_planted_violations():
    odd = [5, 7, 11, 13, 17, 19, 23, 29]
    for seed in range(100):
        rng = random.Random(seed)
        lenses = [lens_block(p, 1) for p in rng.sample(odd, rng.randint(1, 5))]
        partner = Block.declare("planted", 3, [FactorLabel.Zn(3), FactorLabel.Zn(rng.choice([31, 37, 41]))])
        three = lens_block(3, rng.choice([1, 2]))
        blocks = lenses + [three, partner]
        rng.shuffle(blocks)
        v = check_non_repeating(Catalog.of(blocks))
        assert v.status == REFUTED, f"seed {seed}"
        expected = [{"blocks": sorted([three.name, "planted"]), "shared_factors": ["Z_3"]}]
        assert v.witnesses["shared_factors"] == expected, f"seed {seed}: {v.witnesses}"

        powers = rng.sample([(p, j) for p in (3, 5, 7, 11) for j in (1, 2)], rng.randint(2, 5))
        base = [S(p, j) for p, j in powers]
        victim = rng.choice(base)
        dup = renamed(victim, "duplicate")
        cat = base + [dup]
        rng.shuffle(cat)
        v = check_non_repeating(Catalog.of(cat))
        assert v.status == REFUTED, f"seed {seed}"
        assert v.witnesses["no_distinguishing_summand"] == sorted([victim.name, "duplicate"]), f"seed {seed}: {v.witnesses}"
        assert "shared_factors" not in v.witnesses


# 9 ----------------------------------------------------------------------------


@record(9, "Blocks with pi_1 = Z_2 or Z flip theorems A and C to refuted on odd torsion")
def test_hypothesis_gating():
    for base in ("odd_prime_ray_d6", "lens_tree"):
        m = load(base)
        assert check_theorem_A(m.manifold, depth=m.depth).status == CERTIFIED
        assert check_theorem_C(m.manifold, depth=m.depth).status == CERTIFIED
        dim = m.manifold.dim
        for kind in ("finite_cyclic", "infinite_cyclic"):
            data = json.loads(json.dumps(m.data))
            factor = {"kind": kind, "n": 2} if kind == "finite_cyclic" else {"kind": kind}
            data["catalog"]["blocks"] = [{"preset": "declared", "name": "intruder", "dim": dim, "pi1": [factor]}]
            data["pattern"]["assignment"]["prefix"] = ["intruder"]
            data["pattern"]["usage"] = {"intruder": 1}
            W = parse(json.dumps(data)).manifold
            for check in (check_theorem_A, check_theorem_C):
                cert = check(W, depth=m.depth)
                assert cert.status == REFUTED, (base, kind, check.__name__)
                failure = cert.first_failure()
                assert ODD_TORSION in failure.hypothesis, (base, kind, check.__name__, failure.hypothesis)
                assert failure.witnesses["block"] == "intruder"


# 10 ---------------------------------------------------------------------------

DETERMINISM_SCRIPT = """
import hashlib, io, sys, contextlib, tempfile, os
from nonleaf.cli import main
from nonleaf.manifest import bundled_manifests
out = []
with tempfile.TemporaryDirectory() as d:
    for name in bundled_manifests():
        for cmd in (["certify", "theorem-a"], ["certify", "theorem-b"], ["certify", "theorem-c"], ["oracle", "run", "--instances", "10"]):
            path = os.path.join(d, "doc.json")
            with contextlib.redirect_stdout(io.StringIO()):
                main(cmd + [name, "--out", path] + (["--seed", "7"] if cmd[0] == "oracle" else []))
            out.append(name + " " + " ".join(cmd[:2]) + " " + hashlib.sha256(open(path, "rb").read()).hexdigest())
print("\\n".join(out))
"""


@record(10, "Bundled manifests give byte-identical documents across runs")
def test_determinism():
    runs = []
    for hashseed in ("1", "2024"):
        env = dict(os.environ, PYTHONHASHSEED=hashseed)
        env.pop("SOURCE_DATE_EPOCH", None)
        proc = subprocess.run([sys.executable, "-c", DETERMINISM_SCRIPT], capture_output=True, text=True, env=env, check=True)
        runs.append(proc.stdout.splitlines())
    assert len(runs[0]) == 4 * len(bundled_manifests())
    diff = [a for a, b in zip(*runs) if a != b]
    assert not diff, diff
    return f"[{len(runs[0])} documents]"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
