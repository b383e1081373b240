"""
Brute-force cross-checks
========================

"""

import random

from nonleaf.abelian import from_presentation
from nonleaf.manifest import load
from nonleaf.oracle import bareiss_determinant, cokernel_enumeration, random_matrix, suite

# enumerate the cokernel of a small square matrix directly
M = random_matrix(random.Random(4), square=True)
print(M)
print("det:", bareiss_determinant(M))
print("enumerated:", cokernel_enumeration(M), "normal form:", from_presentation(M))

# the full suite runs every applicable check on a manifest
reports = suite(load("finite_tree").manifold, seed=1, instances=20)
failed = [r for r in reports if not r.passed]
print(len(reports), "checks,", len(failed), "failed")
