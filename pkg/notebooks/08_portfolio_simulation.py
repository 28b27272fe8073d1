"""
Simulating a rated pool
=======================

One-factor simulation of a pool's default fraction and migration
statistics at a one-year horizon.
"""

# %%
import numpy as np

from tpmkit import fixtures
from tpmkit.portfolio_sim import FactorModel, SimulationConfig, direct_jump_loss_quantile, simulate_pool
from tpmkit.regularization import subperiod_tpm

hist = fixtures.load_tpm("tbl_Hu_TPM_1")
monthly, _ = subperiod_tpm(hist, 12)
beta = FactorModel.from_rho(0.6).beta

# %%
# Monthly steps with a finite pool.
cfg = SimulationConfig(monthly, "BB", pool_size=216, steps=12, scenarios=20_000, seed=1, beta=beta)
res = simulate_pool(cfg, workers=4)
print(res.summary()["mean"])
print(res.percentiles["df"])

# %%
# A large pool jumping straight to the horizon follows the closed form.
cfg = SimulationConfig(hist, "B", pool_size=None, steps=1, mode="direct_jump", scenarios=200_000, seed=2, beta=beta)
res = simulate_pool(cfg)
for q in (0.99, 0.999):
    print(q, res.percentiles["df"][q], direct_jump_loss_quantile(hist.entries[5, -1], beta, q))

# %%
# Results depend on the seed only, not on the number of worker threads.
cfg = SimulationConfig(monthly, "A", pool_size=50, steps=12, scenarios=20_000, seed=3, beta=beta)
print(np.array_equal(simulate_pool(cfg, 1).df, simulate_pool(cfg, 8).df))

# %%
# Over a single step the mean TMR is 1 - p_ii up to Monte Carlo error.
cfg = SimulationConfig(hist, "BBB", pool_size=100, steps=1, scenarios=50_000, seed=4, beta=beta)
res = simulate_pool(cfg)
print(res.mean["tmr"], 1 - hist.entries[3, 3], res.std_error["tmr"])
