"""
Root projection
===============

Take the raw twelfth root of the annual matrix and project each row onto
the probability simplex.
"""

# %%
import numpy as np

from tpmkit.matrix_core import fractional_root
from tpmkit.pipeline import run_fixture_pipeline
from tpmkit.regularization import project_row_to_simplex, qom_subperiod_tpm, subperiod_tpm

np.set_printoptions(precision=6, suppress=True, linewidth=120)
annual = run_fixture_pipeline("financial_floor").annual

# %%
root = fractional_root(annual, 12)
print("negative entries in the raw root:", int((root < 0).sum()))

# %%
qom = qom_subperiod_tpm(annual, 12)
print(qom.entries)

# %%
# Row error sums of M^12 - A for both routes.
gen, _ = subperiod_tpm(annual, 12)
for name, m in (("qom", qom.entries), ("generator", gen.entries)):
    err = np.abs(np.linalg.matrix_power(m, 12) - annual.entries).sum(axis=1)
    print(f"{name:<10}", err[:-1] * 100)

# %%
# The projection is the closest point of the simplex. No random feasible
# row gets nearer.
rng = np.random.default_rng(0)
y = root[0]
x = project_row_to_simplex(y)
samples = rng.dirichlet(np.ones(len(y)), size=1000)
print(np.sum((x - y) ** 2) <= np.sum((samples - y) ** 2, axis=1).min())
