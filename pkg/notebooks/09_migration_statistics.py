"""
Migration statistics
====================

Direction and rate statistics for each row of a matrix, and correlations
between yearly series of them.
"""

# %%
import numpy as np

from tpmkit import fixtures
from tpmkit.matrix_core import TransitionMatrix
from tpmkit.migration_stats import KINDS, build_series, correlation_matrix, matrix_statistics

hist = fixtures.load_tpm("tbl_Hu_TPM_1")

# %%
for kind in KINDS:
    s = matrix_statistics(hist, kind)
    print(f"{kind:<5}" + "".join(f"{v * 100:>8.2f}%" for v in s.values()))

# %%
# Yearly series from perturbed copies of the matrix, then their correlations.
rng = np.random.default_rng(0)
history = []
for year in range(2000, 2010):
    a = np.array(hist.entries)
    a[:-1] = 0.9 * a[:-1] + 0.1 * rng.dirichlet(np.ones(7), size=6)
    history.append((year, TransitionMatrix(hist.schema, a)))
series = [build_series(history, i, "tmd") for i in range(6)]
print(np.round(correlation_matrix(series), 3))
