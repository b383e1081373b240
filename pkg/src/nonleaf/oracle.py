"""Brute-force cross-checks that share no code path with the fast routines.

* :func:`cokernel_enumeration` rebuilds a finite abelian group from the orders
  of its elements, found by walking the residue classes of ``Z^n / rowspan M``.
  No Smith normal form is involved: membership in the row lattice is decided
  through the adjugate computed with exact rational elimination.
* :func:`stacked_presentation_check` compares the symbolic homology of a finite
  sum-manifold with the cokernel of the block-diagonal stack of its blocks'
  canonical presentations.
* :func:`counting_consistency` and :func:`truncation_convergence` test the
  counting bounds and the declared usage counts against finite truncations.

Every randomized helper takes an explicit seed.
"""

from __future__ import annotations

import random
from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from sympy import factorint

from .abelian import FgAbelianGroup, PrimePower, from_presentation, smith_normal_form
from .blocks import Block
from .criteria import max_disjoint_deleted_blocks_bound
from .groups import ExtendedCount, count
from .pattern import (
    Catalog,
    FiniteGraph,
    SumManifold,
    fundamental_group,
    homology,
    truncate,
)

ENUMERATION_CAP = 10_000
MAX_VERTICES = 12
MAX_MATRIX = 6
MAX_ENTRY = 10


class OracleError(ValueError):
    pass


class GeneratorNondeterminism(OracleError):
    pass


@dataclass
class OracleReport:
    check: str
    instance: str
    expected: object
    computed: object
    passed: bool
    seed: int | None = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "instance": self.instance,
            "expected": _jsonable(self.expected),
            "computed": _jsonable(self.computed),
            "passed": self.passed,
            "seed": self.seed,
            "details": _jsonable(self.details),
        }


def _jsonable(x):
    if isinstance(x, ExtendedCount):
        return x.to_json()
    if isinstance(x, FgAbelianGroup):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


# ---------------------------------------------------------------- exact linear algebra


def bareiss_determinant(M) -> int:
    """Fraction-free Gaussian elimination; every division is exact."""
    A = [list(map(int, r)) for r in M]
    n = len(A)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k]), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def rational_inverse(M) -> tuple[Fraction, list[list[Fraction]]]:
    """Determinant and inverse by Gauss-Jordan over the rationals."""
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            return Fraction(0), []
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return det, [row[n:] for row in A]


# ---------------------------------------------------------------- cokernel enumeration


def cokernel_enumeration(M, cap: int = ENUMERATION_CAP) -> FgAbelianGroup:
    """The finite group ``Z^n / rowspan(M)`` reconstructed from element orders.

    ``v`` lies in the row lattice iff ``v . adj(M) == 0 (mod D)`` with
    ``D = |det M|``, so ``v -> v . adj(M) mod D`` embeds the cokernel in
    ``(Z/D)^n``. Each p-primary part is walked separately inside ``(Z/p^e)^n``
    and its structure read off from how many elements are killed by p, p^2, ...
    At most ``cap`` elements are visited per primary part.
    """
    n = len(M)
    if n == 0:
        return FgAbelianGroup()
    if any(len(r) != n for r in M):
        raise OracleError("cokernel enumeration needs a square matrix")
    det, inverse = rational_inverse(M)
    if det == 0:
        raise OracleError("cokernel is infinite (singular matrix)")
    D = abs(int(det))
    adj = [[int(x * det) for x in row] for row in inverse]
    counts: Counter = Counter()
    for p, e in factorint(D).items():
        pe = p**e
        if e == 1:
            counts[PrimePower(p, 1)] += 1  # a group of prime order is cyclic
            continue
        if pe > cap:
            raise OracleError(f"primary part of order {p}^{e} exceeds the enumeration cap {cap}")
        gens = [tuple(x % pe for x in row) for row in adj]
        elements = _span(gens, pe, cap)
        if len(elements) != pe:
            raise OracleError(f"enumerated {len(elements)} elements in the {p}-part, expected {pe}")
        # killed[k] = #{x : p^k x = 0}; summands of order >= p^k number log_p(killed[k]/killed[k-1])
        killed = [1]
        for k in range(1, e + 1):
            killed.append(sum(1 for x in elements if all((p**k * c) % pe == 0 for c in x)))
        at_least = [_log(killed[k] // killed[k - 1], p) for k in range(1, e + 1)] + [0]
        for k in range(1, e + 1):
            m = at_least[k - 1] - at_least[k]
            if m:
                counts[PrimePower(p, k)] += m
    return FgAbelianGroup.from_counts(0, counts)


def _log(x: int, p: int) -> int:
    k = 0
    while x > 1:
        if x % p:
            raise OracleError("element count is not a power of p")
        x //= p
        k += 1
    return k


def _span(gens, modulus: int, cap: int) -> set:
    zero = tuple(0 for _ in gens[0])
    seen = {zero}
    queue = deque([zero])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = tuple((a + b) % modulus for a, b in zip(x, g))
            if y not in seen:
                seen.add(y)
                if len(seen) > cap:
                    raise OracleError(f"enumeration exceeded the cap {cap}")
                queue.append(y)
    return seen


def element_orders(G: FgAbelianGroup) -> Counter:
    """Histogram of element orders of a finite group given in primary form (by counting, not listing)."""
    if G.rank:
        raise OracleError("infinite group")
    total = G.order
    # number of elements of order dividing m is prod over summands of gcd(m, |Z_q|)
    divisors = sorted(d for d in range(1, total + 1) if total % d == 0)
    dividing = {}
    for m in divisors:
        c = 1
        for q, mult in G.torsion:
            c *= gcd(m, q.order) ** mult
        dividing[m] = c
    exact = Counter()
    for m in divisors:
        exact[m] = dividing[m] - sum(exact[d] for d in divisors if d < m and m % d == 0)
    return Counter({m: c for m, c in exact.items() if c})


def brute_element_orders(M, cap: int = ENUMERATION_CAP) -> Counter:
    """Orders of all elements of ``Z^n / rowspan(M)`` by explicit enumeration."""
    det, inverse = rational_inverse(M)
    if det == 0:
        raise OracleError("singular matrix")
    D = abs(int(det))
    if D > cap:
        raise OracleError("group too large to enumerate")
    adj = [[int(x * det) for x in row] for row in inverse]
    elements = _span([tuple(x % D for x in row) for row in adj], D, cap)
    out = Counter()
    for x in elements:
        g = D
        for c in x:
            g = gcd(g, c)
        out[D // g] += 1
    return out


def smith_check(M, cap: int = ENUMERATION_CAP, seed: int | None = None) -> OracleReport:
    """Divisibility chain always; for square nonsingular M also |det| and the enumerated cokernel."""
    rows = len(M)
    cols = len(M[0]) if M else 0
    d = list(smith_normal_form(M, cols))
    details = {"matrix": M, "invariant_factors": d}
    problems = []
    for a, b in zip(d, d[1:]):
        if (a == 0 and b != 0) or (a and b % a):
            problems.append(f"{a} does not divide {b}")
    if any(x < 0 for x in d):
        problems.append("negative invariant factor")
    expected = computed = None
    if rows == cols and rows:
        det = bareiss_determinant(M)
        details["det"] = det
        if det:
            prod = 1
            for x in d:
                prod *= x
            if prod != abs(det):
                problems.append(f"product of invariant factors {prod} != |det| {abs(det)}")
            expected = cokernel_enumeration(M, cap)
            computed = from_presentation(M, cols)
            if expected != computed:
                problems.append("cokernel enumeration disagrees")
    details["problems"] = problems
    return OracleReport("smith_normal_form", f"{rows}x{cols} matrix", expected, computed, not problems, seed, details)


# ---------------------------------------------------------------- stacked presentations


def stacked_presentation(groups: list[FgAbelianGroup]) -> tuple[list[list[int]], int]:
    """Block-diagonal relation matrix of the canonical presentations of ``groups``."""
    ncols = sum(sum(m for _, m in G.torsion) + G.rank for G in groups)
    rows = []
    offset = 0
    for G in groups:
        width = sum(m for _, m in G.torsion) + G.rank
        for r in G.presentation():
            rows.append([0] * offset + r + [0] * (ncols - offset - width))
        offset += width
    return rows, ncols


def stacked_presentation_check(W: SumManifold, r: int, seed: int | None = None) -> OracleReport:
    if not W.is_finite:
        raise OracleError("stacked presentations need a finite pattern")
    rows, ncols = stacked_presentation([W.vertex_block(v).H(r) for v in W.pattern.vertices])
    expected = from_presentation(rows, ncols)
    computed = homology(W, r).to_group()
    return OracleReport("stacked_presentation", f"{W.name or 'W'} r={r}", expected, computed, expected == computed, seed)


def counting_consistency(W: SumManifold, B: Block, seed: int | None = None) -> OracleReport:
    if not W.is_finite:
        raise OracleError("counting consistency needs a finite pattern")
    lower = sum(1 for v in W.pattern.vertices if W.pattern.block_name(v) == B.name)
    upper = max_disjoint_deleted_blocks_bound(W, B)
    return OracleReport(
        "counting_consistency",
        f"{W.name or 'W'} block={B.name}",
        f"{lower} <= bound",
        upper,
        count(lower) <= upper,
        seed,
        {"lower": lower},
    )


def truncation_convergence(W: SumManifold, depths, runs: int = 2) -> OracleReport:
    """Multiplicities along truncations must grow monotonically toward the declared values.

    Tracks every free factor of pi1 and every prime-power summand of each H_r,
    and every block's vertex count. Any disagreement between repeated passes of
    the assignment generator raises :class:`GeneratorNondeterminism`.
    """
    depths = list(depths)
    if depths != sorted(set(depths)) or not depths:
        raise OracleError("depths must be strictly increasing")
    if W.is_finite:
        raise OracleError("truncation convergence is for infinite patterns")
    top = depths[-1]
    passes = [[W.pattern.assign(v) for v in range(top)] for _ in range(runs)]
    for i in range(1, runs):
        if passes[i] != passes[0]:
            v = next(j for j, (a, b) in enumerate(zip(passes[0], passes[i])) if a != b)
            raise GeneratorNondeterminism(f"assignment at vertex {v} changed between runs: {passes[0][v]!r} vs {passes[i][v]!r}")
    names = passes[0]

    failures = []

    # usage counts
    running: Counter = Counter()
    for v, name in enumerate(names):
        running[name] += 1
        declared = W.catalog.declared_usage(name) if name in W.catalog else None
        if declared is None:
            failures.append({"vertex": v, "block": name, "problem": "usage not declared"})
            break
        if running[name] > declared:
            failures.append({"vertex": v, "block": name, "problem": f"assigned {running[name]} times, declared {declared}"})
            break

    d = W.dim
    symbolic = {r: homology(W, r) for r in range(2, d)}
    pi = fundamental_group(W)
    history: dict = {}
    for n in depths:
        T = truncate(W, n)
        obs = {}
        for r in range(2, d):
            for q, c in homology(T, r).head:
                obs[("H", r, q)] = c
        for label, c in fundamental_group(T).head.factors:
            obs[("pi1", label)] = c
        for key in set(history) | set(obs):
            history.setdefault(key, []).append(int(obs.get(key, ExtendedCount(0))))
    for key, values in sorted(history.items(), key=lambda kv: str(kv[0])):
        values = [0] * (len(depths) - len(values)) + values
        if any(b < a for a, b in zip(values, values[1:])):
            failures.append({"key": _key_name(key), "problem": "multiplicity decreased", "values": values})
            continue
        declared = symbolic[key[1]].multiplicity(key[2]) if key[0] == "H" else pi.multiplicity(key[1])
        if declared.is_finite and values[-1] > int(declared):
            failures.append({"key": _key_name(key), "problem": f"exceeds declared {declared}", "values": values})
        last = _completion_vertex(W, key)
        if last is not None and declared.is_finite:
            for n, val in zip(depths, values):
                if n > last and val != int(declared):
                    failures.append({"key": _key_name(key), "problem": f"should equal {declared} from depth {last + 1}", "values": values})
                    break
    return OracleReport(
        "truncation_convergence",
        f"{W.name or 'W'} depths={depths}",
        "monotone and consistent",
        "fail" if failures else "pass",
        not failures,
        None,
        {"tracked": len(history), "failures": failures[:10]},
    )


def _completion_vertex(W: SumManifold, key) -> int | None:
    """Vertex after which a family-only summand must have reached its declared multiplicity."""
    last_vertex = getattr(W.pattern.assign, "last_vertex", None)
    if last_vertex is None or key[0] != "H":
        return None
    r, q = key[1], key[2]
    for name, B in W.catalog.blocks:
        if B.H(r).counts().get(q) and W.catalog.declared_usage(name):
            return None
    return last_vertex(q.p)


def _key_name(key) -> str:
    if key[0] == "H":
        return f"H_{key[1]}:{key[2]}"
    return f"pi1:{key[1]}"


# ---------------------------------------------------------------- random instances


def random_matrix(rng: random.Random, max_size: int = MAX_MATRIX, max_entry: int = MAX_ENTRY, square: bool | None = None):
    m = rng.randint(1, max_size)
    n = m if square or (square is None and rng.random() < 0.5) else rng.randint(1, max_size)
    density = rng.choice([0.3, 0.6, 1.0])
    return [[rng.randint(-max_entry, max_entry) if rng.random() < density else 0 for _ in range(n)] for _ in range(m)]


def random_finite_pattern(rng: random.Random, names: list[str], max_vertices: int = MAX_VERTICES, extra_edges: int = 0) -> FiniteGraph:
    n = rng.randint(1, max_vertices)
    parents = [rng.randrange(i) for i in range(1, n)]
    g = FiniteGraph.tree(parents, [rng.choice(names) for _ in range(n)])
    if extra_edges:
        more = tuple((rng.randrange(n), rng.randrange(n)) for _ in range(extra_edges))
        g = FiniteGraph(g.vertices, g.edges + more, g.assignment)
    return g


def random_sum_manifold(rng: random.Random, catalog: Catalog, max_vertices: int = MAX_VERTICES, cycles: bool = False) -> SumManifold:
    names = [n for n, _ in catalog.blocks]
    g = random_finite_pattern(rng, names, max_vertices, rng.randint(0, 2) if cycles else 0)
    used = {g.block_name(v) for v in g.vertices}
    return SumManifold(g, Catalog.of({n: catalog.get(n) for n in sorted(used)}))


# ---------------------------------------------------------------- suites


def suite(
    W: SumManifold,
    seed: int = 0,
    instances: int = 50,
    cap: int = ENUMERATION_CAP,
    max_vertices: int = MAX_VERTICES,
    max_matrix: int = MAX_MATRIX,
    max_entry: int = MAX_ENTRY,
    depths=(10, 100, 1000),
) -> list[OracleReport]:
    """Every applicable cross-check for ``W``, plus seeded random instances around its catalog."""
    rng = random.Random(seed)
    reports = []
    for _ in range(instances):
        reports.append(smith_check(random_matrix(rng, max_matrix, max_entry), cap, seed))
    if W.is_finite:
        for r in range(2, W.dim):
            reports.append(stacked_presentation_check(W, r, seed))
        for name, B in W.catalog.blocks:
            if not B.is_trivial:
                reports.append(counting_consistency(W, B, seed))
    else:
        reports.append(truncation_convergence(W, list(depths)))
    pool = [B for B in W.catalog.sample(6) if not B.is_trivial][:6]
    if pool:
        catalog = Catalog.of(pool)
        for _ in range(instances):
            V = random_sum_manifold(rng, catalog, max_vertices)
            for r in range(2, V.dim):
                reports.append(stacked_presentation_check(V, r, seed))
            for name, B in V.catalog.blocks:
                reports.append(counting_consistency(V, B, seed))
    return reports
