"""
Blocks and connected sums
=========================

"""

from nonleaf.abelian import PrimePower
from nonleaf.blocks import connected_sum, lens_block, prime_count_bound, signature, suspension_block
from nonleaf.manifest import load

# a lens space block carries a cyclic fundamental group
L = lens_block(7, 2)
print(L.name, "pi_1 =", L.pi1, "orientable:", L.orientable)

# suspension blocks are simply connected with torsion in H_2 and H_3
S3 = suspension_block(6, PrimePower(3, 1))
S5 = suspension_block(6, PrimePower(5, 1))
X = connected_sum(S3, S5)
print(X.name, {r: str(X.H(r)) for r in range(2, X.dim)})

# the prime-count bound adds under connected sum
print("bounds:", prime_count_bound(S3), prime_count_bound(S5), prime_count_bound(X))

# invariant records cannot tell every pair of distinct sums apart
m = load("cp2_sums")
a, b = m.manifold.catalog.get("P#Pbar#Pbar"), m.manifold.catalog.get("Q#Pbar")
print("same invariant record:", signature(a) == signature(b))
