"""
Abelian groups from integer presentations
=========================================

"""

from nonleaf.abelian import FgAbelianGroup, PrimePower, direct_sum, from_presentation, smith_form, smith_normal_form

# the cokernel of an integer matrix is read off its diagonal form
M = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
print("invariant factors:", smith_normal_form(M))

# the transform matrices are unimodular and satisfy U M V = D
U, D, V = smith_form(M)
print("D =", D)

# primary parts make direct sums and summand counts easy
G = from_presentation(M)
print("cokernel:", G, "order", G.order)
H = direct_sum(G, FgAbelianGroup.cyclic(9), FgAbelianGroup(1))
print("with Z_9 + Z added:", H, "counts", H.counts())
print("Z_3 summands:", H.counts().get(PrimePower(3, 1), 0))
