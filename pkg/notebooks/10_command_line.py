"""
Command-line tour
=================

Every capability is also available from the tpmkit command.
"""

# %%
import json
import tempfile
from pathlib import Path

from tpmkit.cli import cli

out = Path(tempfile.mkdtemp())

# %%
cli(["build", "fixture:financial_floor", "--out", str(out / "build")])
print(sorted(p.name for p in (out / "build").iterdir()))

# %%
cli(["generator", "fixture:TPM_3"])

# %%
cli(["implied-corr", "--pd", "0.016", "--df", "0.0566", "--q", "0.98"])

# %%
cfg = out / "sim.json"
cfg.write_text(json.dumps({
    "annual_tpm": "fixture:tbl_Hu_TPM_1", "ratings": ["BB", "B"], "pool_size": {"BB": 216, "B": 282},
    "modes": ["multi_step", "direct_jump"], "scenarios": 5000, "seed": 1, "correlation": 0.6,
}))
cli(["simulate", str(cfg), "--workers", "4", "--out", str(out / "sim")])
print((out / "sim" / "tmd_percentiles.csv").read_text())

# %%
# Bad input exits with 2, a failed numerical method with 3.
print(cli(["compare", str(out / "missing.csv"), str(out / "missing.csv")]))
print(cli(["implied-corr", "--pd", "0.02", "--df", "0.01", "--q", "0.99"]))
