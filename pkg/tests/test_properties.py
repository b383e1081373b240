"""Algebraic laws checked on generated inputs."""

from hypothesis import given, settings
from hypothesis import strategies as st

from nonleaf.abelian import (
    TRIVIAL,
    FgAbelianGroup,
    PrimePower,
    count_summands,
    direct_sum,
    from_presentation,
    primary_decomposition,
    smith_normal_form,
)
from nonleaf.blocks import Block, connected_sum, prime_count_bound, signature, sphere
from nonleaf.criteria import check_non_repeating
from nonleaf.groups import (
    OMEGA,
    TRIVIAL_GROUP,
    ExtendedCount,
    FactorLabel,
    FreeProductClass,
    count_factor,
    free_product,
    generated_by_odd_torsion,
    grushko_factor_count,
    shares_factor,
)
from nonleaf.oracle import bareiss_determinant, brute_element_orders, element_orders
from nonleaf.pattern import Catalog, FiniteGraph, SumManifold, fundamental_group, homology, truncate

PRIMES = [2, 3, 5, 7, 11]

prime_powers = st.builds(PrimePower, st.sampled_from(PRIMES), st.integers(1, 3))
groups = st.builds(
    lambda rank, tors: FgAbelianGroup.from_counts(rank, dict(tors)),
    st.integers(0, 3),
    st.lists(st.tuples(prime_powers, st.integers(1, 3)), max_size=4),
)
labels = st.one_of(
    st.just(FactorLabel.Z()),
    st.integers(2, 12).map(FactorLabel.Zn),
    st.sampled_from(["G", "H"]).map(lambda n: FactorLabel.opaque(n, n == "G")),
)
counts = st.one_of(st.integers(0, 4).map(ExtendedCount), st.just(OMEGA))
classes = st.lists(st.tuples(labels, counts), max_size=4).map(lambda fs: FreeProductClass(tuple(fs)))
finite_classes = st.lists(st.tuples(labels, st.integers(1, 3)), max_size=3).map(lambda fs: FreeProductClass(tuple(fs)))
matrices = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=m, max_size=m))
)
square = st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=n, max_size=n))


def blocks(dim=4):
    return st.builds(
        lambda name, pi1, hs: Block(name, dim, pi1, tuple(hs)),
        st.text("abcdef", min_size=1, max_size=3),
        finite_classes,
        st.lists(groups, min_size=dim - 2, max_size=dim - 2),
    )


# ---------------------------------------------------------------- abelian


@given(matrices)
def test_smith_divisibility_chain(M):
    d = smith_normal_form(M)
    assert all(x >= 0 for x in d)
    nonzero = [x for x in d if x]
    assert d[: len(nonzero)] == tuple(nonzero)
    assert all(b % a == 0 for a, b in zip(nonzero, nonzero[1:]))


@given(square)
def test_product_of_invariant_factors_is_abs_det(M):
    det = bareiss_determinant(M)
    prod = 1
    for x in smith_normal_form(M):
        prod *= x
    assert prod == abs(det)


@settings(max_examples=60)
@given(st.integers(1, 3).flatmap(lambda n: st.lists(st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_element_orders_match_smith(M):
    det = bareiss_determinant(M)
    if det == 0 or abs(det) > 3000:
        return
    assert brute_element_orders(M) == element_orders(from_presentation(M))


@given(groups, groups, groups)
def test_direct_sum_laws(a, b, c):
    assert direct_sum(a, b) == direct_sum(b, a)
    assert direct_sum(direct_sum(a, b), c) == direct_sum(a, direct_sum(b, c))
    assert direct_sum(a, TRIVIAL) == a


@given(groups, groups, prime_powers)
def test_count_summands_is_additive(a, b, q):
    assert count_summands(direct_sum(a, b), q) == count_summands(a, q) + count_summands(b, q)


@given(groups)
def test_primary_decomposition_inverts_invariant_factors(g):
    assert primary_decomposition(g.invariant_factors()) == g


@given(groups)
def test_canonical_presentation_round_trips(g):
    rows = g.presentation()
    ncols = g.rank + sum(m for _, m in g.torsion)
    assert from_presentation(rows, ncols) == g


# ---------------------------------------------------------------- groups


@given(classes, classes, classes)
def test_free_product_laws(a, b, c):
    assert free_product(a, b) == free_product(b, a)
    assert free_product(free_product(a, b), c) == free_product(a, free_product(b, c))
    assert free_product(a, TRIVIAL_GROUP) == a


@given(classes, classes, labels)
def test_count_factor_is_additive(a, b, q):
    assert count_factor(free_product(a, b), q) == count_factor(a, q) + count_factor(b, q)


@given(classes, classes)
def test_odd_torsion_is_a_conjunction(a, b):
    assert generated_by_odd_torsion(free_product(a, b)) == (generated_by_odd_torsion(a) and generated_by_odd_torsion(b))


@given(classes, classes)
def test_shares_factor_symmetry(a, b):
    assert shares_factor(a, b) == shares_factor(b, a)
    assert shares_factor(a, a) == (not a.is_trivial)


@given(counts, counts, counts)
def test_extended_count_semiring(a, b, c):
    assert a + b == b + a
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a + 0 == a and a * 1 == a


# ---------------------------------------------------------------- blocks


def record(B):
    return signature(B)


@given(blocks(), blocks(), blocks())
def test_connected_sum_laws(a, b, c):
    assert record(connected_sum(a, b)) == record(connected_sum(b, a))
    assert record(connected_sum(connected_sum(a, b), c)) == record(connected_sum(a, connected_sum(b, c)))
    assert record(connected_sum(a, sphere(4))) == record(a)


@given(blocks(), blocks())
def test_prime_count_bound_is_additive(a, b):
    assert prime_count_bound(connected_sum(a, b)) == prime_count_bound(a) + prime_count_bound(b)


@given(blocks())
def test_hurewicz_identification(B):
    if B.simply_connected:
        assert B.pi2 == B.H(2)


# ---------------------------------------------------------------- pattern


@settings(max_examples=40)
@given(st.randoms(use_true_random=False), st.integers(1, 9), st.integers(0, 3))
def test_graph_invariants_fold_over_edges(rng, n, extra):
    pool = [Block(f"B{i}", 4, FreeProductClass.of([FactorLabel.Zn(3 + 2 * i)]), (FgAbelianGroup.cyclic(5 + i), TRIVIAL)) for i in range(3)]
    parents = [rng.randrange(i) for i in range(1, n)]
    names = [rng.choice(pool).name for _ in range(n)]
    g = FiniteGraph.tree(parents, names)
    if extra:
        g = FiniteGraph(g.vertices, g.edges + tuple((rng.randrange(n), rng.randrange(n)) for _ in range(extra)), g.assignment)
    W = SumManifold(g, Catalog.of({b.name: b for b in pool if b.name in names}))
    flat_pi = free_product(*(W.vertex_block(v).pi1 for v in g.vertices))
    pi = fundamental_group(W).as_class()
    assert grushko_factor_count(pi) == grushko_factor_count(flat_pi) + g.cycle_rank
    assert count_factor(pi, FactorLabel.Z()) == g.cycle_rank
    # left fold over a BFS edge order
    acc = W.vertex_block(g.bfs_order()[0])
    for v in g.bfs_order()[1:]:
        acc = connected_sum(acc, W.vertex_block(v))
    assert homology(W, 2).to_group() == acc.H(2)


@settings(max_examples=30)
@given(st.randoms(use_true_random=False), st.integers(2, 15))
def test_truncation_is_monotone(rng, n):
    pool = [Block(f"B{i}", 4, TRIVIAL_GROUP, (FgAbelianGroup.cyclic([3, 9, 5, 7][i]), TRIVIAL)) for i in range(4)]
    g = FiniteGraph.tree([rng.randrange(i) for i in range(1, n)], [rng.choice(pool).name for _ in range(n)])
    W = SumManifold(g, Catalog.of({b.name: b for b in pool if b.name in {nm for _, nm in g.assignment}}))
    prev = TRIVIAL
    for k in range(1, n + 1):
        H = homology(truncate(W, k), 2).to_group()
        for q, m in prev.torsion:
            assert count_summands(H, q) >= m
        prev = H
    assert prev == homology(W, 2).to_group()


# ---------------------------------------------------------------- criteria


@settings(max_examples=30)
@given(st.lists(st.sampled_from([3, 5, 7, 9, 25, 11]), min_size=1, max_size=5), st.randoms(use_true_random=False))
def test_non_repeating_order_independence(orders, rng):
    bs = [Block(f"X{i}", 4, TRIVIAL_GROUP, (FgAbelianGroup.cyclic(n), TRIVIAL)) for i, n in enumerate(orders)]
    shuffled = bs[:]
    rng.shuffle(shuffled)
    assert check_non_repeating(Catalog.of(bs)).to_json() == check_non_repeating(Catalog.of(shuffled)).to_json()
