"""
Correlation implied by a bad year
=================================

Find the factor loading that puts an observed default frequency at a
chosen percentile of the large-pool distribution.
"""

# %%
import numpy as np

from tpmkit.portfolio_sim import direct_jump_loss_quantile, implied_correlation

# %%
beta, rho = implied_correlation(0.016, 0.0566, 0.98)
print(f"beta = {beta:.4f}  rho = {rho:.4f}")
print(direct_jump_loss_quantile(0.016, beta, 0.98))

# %%
# The quantile rises with beta and then falls again near one, so there
# can be a second root. The smallest one is returned.
for b in np.linspace(0, 0.999, 12):
    print(f"{b:.3f}  {direct_jump_loss_quantile(0.016, b, 0.98):.4f}")
