import pytest

from nonleaf.abelian import TRIVIAL, FgAbelianGroup, PrimePower
from nonleaf.blocks import (
    DUALITY_FILL,
    Block,
    BlockError,
    connected_sum,
    lens_block,
    prime_count_bound,
    signature,
    smale_block,
    sphere,
    suspension_block,
)
from nonleaf.groups import FactorLabel, FreeProductClass


def Zq(p, j=1, m=1):
    return FgAbelianGroup.from_counts(0, {PrimePower(p, j): m})


def test_lens_block():
    L = lens_block(3, 1)
    assert L.dim == 3
    assert L.pi1 == FreeProductClass.of([FactorLabel.Zn(3)])
    assert L.H(2) == TRIVIAL
    assert L.prime_asserted and L.orientable
    assert lens_block(5, 2).pi1 == FreeProductClass.of([FactorLabel.Zn(5)])
    with pytest.raises(BlockError):
        lens_block(4, 2)


def test_smale_block():
    assert smale_block(Zq(3)).H(2) == Zq(3, m=2)
    assert smale_block(TRIVIAL).is_trivial
    assert smale_block(Zq(3, 2)).H(2) == Zq(3, 2, 2)
    with pytest.raises(BlockError):
        smale_block(FgAbelianGroup(1))


def test_suspension_block():
    B = suspension_block(6, PrimePower(3, 1))
    assert (B.H(2), B.H(3), B.H(4)) == (Zq(3), Zq(3), TRIVIAL)
    assert DUALITY_FILL in B.conventions
    assert B.duality_violations() == []
    assert suspension_block(6, PrimePower(7, 2)).H(2) == Zq(7, 2)
    with pytest.raises(BlockError):
        suspension_block(5, PrimePower(3, 1))


def test_general_connectivity_suspension():
    B = suspension_block(8, PrimePower(5, 1), k=3)
    assert B.connectivity() == 2
    assert B.pi_k(3) == Zq(5)
    assert B.H(4) == Zq(5)


def test_presets_pass_duality():
    for B in (lens_block(7, 3), smale_block(Zq(5)), suspension_block(7, PrimePower(3, 1)), sphere(4)):
        assert B.duality_violations() == []


def test_duality_validator_catches_a_bad_record():
    B = Block.declare("T", 6, homology={2: Zq(3)}, orientable=True)
    assert B.duality_violations() == [2, 3]


def test_hurewicz_accessor():
    B = smale_block(Zq(3))
    assert B.pi2 == B.H(2)
    with pytest.raises(BlockError):
        lens_block(3, 1).pi2


def test_connected_sum():
    L3, L5 = lens_block(3, 1), lens_block(5, 1)
    assert connected_sum(L3, sphere(3)).pi1 == L3.pi1
    assert connected_sum(L3, sphere(3)).prime_asserted
    both = connected_sum(L3, L5)
    assert both.pi1 == FreeProductClass.of([FactorLabel.Zn(3), FactorLabel.Zn(5)])
    assert both.prime_asserted is False
    with pytest.raises(BlockError):
        connected_sum(L3, smale_block(Zq(3)))


def test_cp2_sums_are_indistinguishable():
    P = Block.declare("P", 4, homology={2: FgAbelianGroup(1)})
    Pbar = Block.declare("Pbar", 4, homology={2: FgAbelianGroup(1)})
    Q = Block.declare("Q", 4, homology={2: FgAbelianGroup(2)})
    left = connected_sum(connected_sum(P, Pbar), Pbar)
    right = connected_sum(Q, Pbar)
    assert left.H(2) == right.H(2) == FgAbelianGroup(3)
    assert signature(left) == signature(right)
    assert signature(P) != signature(Q)


def test_prime_count_bound_examples():
    assert prime_count_bound(sphere(5)) == 0
    assert prime_count_bound(connected_sum(lens_block(3, 1), lens_block(5, 1))) == 2
    assert prime_count_bound(suspension_block(6, PrimePower(3, 1))) == 2


def test_signature_examples():
    assert signature(lens_block(3, 1)) == signature(lens_block(3, 2))
    assert signature(lens_block(3, 1)) != signature(lens_block(5, 1))


def test_opaque_names_do_not_collide_with_orders():
    a = Block.declare("a", 3, [FactorLabel.opaque("3")])
    b = Block.declare("b", 3, [FactorLabel.Zn(3)])
    assert signature(a) != signature(b)


def test_homology_range_is_enforced():
    with pytest.raises(BlockError):
        Block.declare("x", 4, homology={4: FgAbelianGroup(1)})
    with pytest.raises(BlockError):
        sphere(4).H(1)
