"""
Majorization, transfer matrices and Birkhoff terms
==================================================

"""

import numpy as np

from cohkit import birkhoff_decompose, d_majorizes, majorizes, transfer_matrix

# a flatter distribution is majorized by a more peaked one
x = np.array([0.5, 0.3, 0.2])
y = np.array([0.7, 0.2, 0.1])
print("x majorized by y:", majorizes(x, y))
print("y majorized by x:", majorizes(y, x))

# the witness is a doubly stochastic matrix with D y = x
D = transfer_matrix(x, y)
print("D =\n", np.round(D, 4))
print("D y - x =", D @ y - x)

# every doubly stochastic matrix is a mixture of permutations
dec = birkhoff_decompose(D)
for weight, perm in dec:
    print(f"  weight {weight:.4f}  permutation {perm.tolist()}")
print("recomposition error:", np.abs(dec.matrix() - D).max())

# d-majorization asks for one column-stochastic matrix serving two pairs
p, q = np.array([1.0, 0.0]), np.array([0.5, 0.5])
print("(e1, q) -> (e1, q):", d_majorizes(p, q, p, q))
print("(e1, q) -> (e1, e2):", d_majorizes(p, q, p, np.array([0.0, 1.0])))
