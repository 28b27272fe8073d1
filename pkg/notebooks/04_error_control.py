"""
Comparing matrices
==================

Difference tables and four matrix norms for the reconstruction error
M^12 - A of each sector.
"""

# %%
import numpy as np

from tpmkit import fixtures
from tpmkit.error_control import compare
from tpmkit.pipeline import run_fixture_pipeline

np.set_printoptions(precision=6, suppress=True, linewidth=120)

# %%
for sector, name in fixtures.load_json("tpm_norm")["pipelines"].items():
    norms = run_fixture_pipeline(name).comparison.norms
    print(f"{sector:<11}" + "".join(f"{k}={v * 100:.4f}%  " for k, v in norms.items()))

# %%
# Relative differences are undefined where B is zero and A is not. Those
# cells come back as NaN and are flagged by relative_defined.
rep = compare(np.array([[0.9, 0.1], [0.0, 1.0]]), np.array([[1.0, 0.0], [0.0, 1.0]]))
print(rep.relative_diff)
print(rep.relative_defined)

# %%
# The Frobenius norm can be reported per element.
res = run_fixture_pipeline("financial_floor")
print(compare(res.reconstructed, res.annual, per_element=True).norms["frobenius"])
