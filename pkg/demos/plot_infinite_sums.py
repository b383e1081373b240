"""
Infinite sums along a ray
=========================

"""

from nonleaf.manifest import load
from nonleaf.pattern import fundamental_group, homology, truncate

# odd primes in order, the i-th one repeated i times, glued along a ray
W = load("odd_prime_ray_d6").manifold
print(W.catalog.family.describe())

# homology splits into a finite head and a lazily described tail
H2 = homology(W, 2)
print("H_2 head:", [(str(q), str(c)) for q, c in H2.head])
print("H_2 tail:", H2.tail.description)
print("first tail entries:", [(str(q), c) for q, c in H2.tail.sample(6)])

# finite truncations give honest finite sums to compare against
for n in (5, 10, 20):
    print(n, "vertices:", homology(truncate(W, n), 2).to_group())

# the lens tree has a free-product fundamental group
T = load("lens_tree").manifold
G = fundamental_group(T)
print("pi_1:", G.tail.description)
print("first factors:", [(str(l), c) for l, c in G.tail.sample(4)])
