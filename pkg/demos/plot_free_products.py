"""
Free products as multisets of factors
=====================================

"""

from nonleaf.groups import OMEGA, FactorLabel, FreeProductClass, count_factor, free_product, generated_by_odd_torsion, grushko_factor_count, shared_factors

# a free product is recorded by how often each indecomposable factor occurs
A = FreeProductClass.of([FactorLabel.Zn(3), FactorLabel.Zn(5)])
B = FreeProductClass.of([FactorLabel.Zn(3), FactorLabel.Z()])
print("A * B =", free_product(A, B))
print("factors:", grushko_factor_count(free_product(A, B)))
print("shared by A and B:", [str(q) for q in shared_factors(A, B)])

# infinitely many copies are tracked with omega
C = A.scaled(OMEGA)
print("A repeated forever:", C, "Z_3 count", count_factor(C, FactorLabel.Zn(3)))

# odd torsion generation fails as soon as Z or an even cyclic factor appears
print(generated_by_odd_torsion(A), generated_by_odd_torsion(B))
