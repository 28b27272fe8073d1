"""
Generators and how to repair them
=================================

The principal log of an annual matrix is usually close to a valid generator
but has a few small negative off-diagonal rates.
"""

# %%
import numpy as np

from tpmkit import fixtures
from tpmkit.matrix_core import GeneratorMatrix, matrix_exp, principal_log
from tpmkit.rating_schema import RatingSchema
from tpmkit.regularization import regularize_generator

np.set_printoptions(precision=6, suppress=True, linewidth=120)

# %%
annual = fixtures.load_tpm("TPM_3")
g = principal_log(annual)
print(g.entries)
print("valid generator:", g.valid)
print("negative off-diagonals:", g.negative_off_diagonals())

# %%
# exp(log(A)) recovers A to machine precision.
print("round trip error:", np.abs(matrix_exp(g).entries - annual.entries).max())

# %%
# Regularization floors negatives at zero and spreads the resulting row
# excess over the row in proportion to magnitude.
g_hat, report = regularize_generator(g)
print(g_hat.entries)
for i, j, v in report.zeroed_entries:
    print(f"zeroed ({g.labels[i]}, {g.labels[j]}) = {v:.3e}")
print("row sums:", g_hat.entries.sum(axis=1))

# %%
# A generator that is already valid passes through untouched.
q = np.array([[-0.3, 0.2, 0.1], [0.05, -0.05, 0.0], [0, 0, 0.0]])
same, rep = regularize_generator(GeneratorMatrix(RatingSchema(("X", "Y", "D")), q))
print(np.array_equal(same.entries, q), rep.changed)
