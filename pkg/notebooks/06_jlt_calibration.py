"""
Calibrating to target default probabilities
===========================================

Scale each row of a generator by mu_i so that the annual matrix it
implies has prescribed PDs.
"""

# %%
import numpy as np

from tpmkit import fixtures
from tpmkit.jlt_calibration import calibrate_jlt
from tpmkit.pd_policy import PdVector
from tpmkit.pipeline import matches_displayed, run_fixture_pipeline

np.set_printoptions(precision=6, suppress=True, linewidth=120)
annual = run_fixture_pipeline("financial_floor").annual
target = PdVector.from_mapping(fixtures.load_json("jlt_para")["input_pd"])

# %%
res = calibrate_jlt(annual, target)
print("mu:", res.mu)
print("iterations:", res.iterations)
print("max |PD - target|:", np.abs(res.discrepancy).max())

# %%
print(bool(matches_displayed(res.calibrated_annual.entries, "TPM_JLT_2").all()))
print(bool(matches_displayed(res.calibrated_monthly.entries, "TPM_JLT_5").all()))

# %%
# Scaling the raw log instead gives a different mu and a matrix with
# negative entries.
raw = calibrate_jlt(annual, target, variant="raw")
print("raw mu:", raw.mu)
print("min entry:", raw.calibrated_annual.entries.min())
