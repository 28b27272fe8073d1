"""Acceptance criteria 1-10, one test each.

Every test records a PASS/FAIL line (shown in the terminal summary and
printed with ``-s``) and then asserts, so a failing criterion also fails
the run.
"""

import json
import math
import time

import numpy as np
import pytest
from scipy import stats

from conftest import ACCEPTANCE_LINES
from tpmkit import fixtures
from tpmkit.cli import cli
from tpmkit.jlt_calibration import calibrate_jlt
from tpmkit.matrix_core import GeneratorMatrix, fractional_root, principal_log
from tpmkit.migration_stats import matrix_statistics, migration_direction
from tpmkit.pd_policy import PdVector
from tpmkit.pipeline import expected_tables, matches_displayed, run_fixture_pipeline
from tpmkit.portfolio_sim import (
    FactorModel,
    SimulationConfig,
    direct_jump_loss_quantile,
    implied_correlation,
    simulate_pool,
)
from tpmkit.rating_schema import RatingSchema
from tpmkit.regularization import project_row_to_simplex, qom_subperiod_tpm, regularize_generator, subperiod_tpm

SWEEP = [f"{s}_{v}" for s in ("govt", "fncl", "corp") for v in ("nobasel", "basel", "atbasel", "atmaxbasel")]


def record(n, title, failures):
    line = f"criterion {n:>2} {'PASS' if not failures else 'FAIL'}: {title}"
    if failures:
        line += " | " + "; ".join(failures)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert not failures, line


def cells(mask, labels):
    return [f"({labels[i]},{labels[j]})" for i, j in np.argwhere(~mask)]


def max_abs(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def test_criterion_01_golden_pipeline():
    t0 = time.perf_counter()
    res = run_fixture_pipeline("financial_floor")
    g = principal_log(res.annual)
    g_hat, _ = regularize_generator(g)
    elapsed = time.perf_counter() - t0
    lab = res.annual.labels
    bad = []
    for label, m in (("TPM_1", res.overridden), ("TPM_2", res.absorbed), ("TPM_3", res.annual)):
        ok = matches_displayed(m.entries, label)
        if not ok.all():
            bad.append(f"{label} cells {cells(ok, m.labels)}")
    for label, m in (("TPM_4a", g.entries), ("TPM_4b", g_hat.entries)):
        d = max_abs(m, fixtures.load_table(label).values)
        if d > 5e-7 + 1e-12:
            bad.append(f"{label} max diff {d:.3g}")
    d = max_abs(res.subperiod.entries, fixtures.load_table("TPM_5").values)
    if d > 1e-6:
        bad.append(f"TPM_5 max diff {d:.3g}")
    if elapsed >= 1.0:
        bad.append(f"runtime {elapsed:.2f}s")
    assert lab[-1] == "D"
    record(1, f"golden financial pipeline ({elapsed * 1000:.0f} ms)", bad)


def test_criterion_02_sector_sweep():
    t0 = time.perf_counter()
    runs = {name: run_fixture_pipeline(name) for name in SWEEP}
    elapsed = time.perf_counter() - t0
    bad = []
    for name, res in runs.items():
        exp = expected_tables(name)
        for kind, m in (("monthly", res.subperiod), ("annual", res.reconstructed)):
            ok = matches_displayed(m.entries, exp[kind])
            if not ok.all():
                bad.append(f"{exp[kind]} {cells(ok, m.labels)}")
        d = max_abs(res.reconstructed.entries, np.linalg.matrix_power(res.subperiod.entries, 12))
        if d > 1e-9:
            bad.append(f"{name} annual vs monthly^12 {d:.3g}")
    if elapsed >= 10.0:
        bad.append(f"runtime {elapsed:.2f}s")
    record(2, f"sector sweep of 12 monthly/annual pairs ({elapsed:.2f} s)", bad)


def test_criterion_03_norms():
    doc = fixtures.load_json("tpm_norm")
    bad = []
    for sector, expected in doc["columns"].items():
        norms = run_fixture_pipeline(doc["pipelines"][sector]).comparison.norms
        for k, v in expected.items():
            if abs(norms[k] - v) > 5e-6:
                bad.append(f"{sector} {k} {norms[k]:.7f} vs {v}")
    record(3, "error-control norms for three sectors", bad)


def dirichlet_beats(y, rng, draws=1000):
    x = project_row_to_simplex(y)
    d = np.sum((x - y) ** 2)
    samples = rng.dirichlet(np.ones(len(y)), size=draws)
    return bool(np.all(d <= np.sum((samples - y) ** 2, axis=1)))


def test_criterion_04_qom():
    bad = []
    annual = run_fixture_pipeline("financial_floor").annual
    qom = qom_subperiod_tpm(annual, 12)
    ok = matches_displayed(qom.entries, "TPM_QOM_1")
    if not ok.all():
        bad.append(f"TPM_QOM_1 {cells(ok, qom.labels)}")
    doc = fixtures.load_json("tpm_qom_3")
    gen, _ = subperiod_tpm(annual, 12)
    for col, m in (("qom", qom.entries), ("generator", gen.entries)):
        sums = np.abs(np.linalg.matrix_power(m, 12) - annual.entries).sum(axis=1)
        for i, lab in enumerate(annual.labels[:-1]):
            if abs(sums[i] - doc[col][lab]) > 5e-6:
                bad.append(f"{col} {lab} {sums[i]:.7f} vs {doc[col][lab]}")
    rng = np.random.default_rng(2024)
    roots = [fractional_root(annual, 12)]
    roots += [fractional_root(run_fixture_pipeline(n).annual, 12) for n in SWEEP]
    losers = sum(not dirichlet_beats(row, rng) for r in roots for row in r)
    if losers:
        bad.append(f"{losers} rows beaten by a random feasible row")
    record(4, f"QOM table, error sums and projection optimality on {sum(len(r) for r in roots)} rows", bad)


def test_criterion_05_jlt():
    bad = []
    para = fixtures.load_json("jlt_para")
    target = PdVector.from_mapping(para["input_pd"])
    annual = run_fixture_pipeline("financial_floor").annual
    variants = {}
    for v in ("raw", "regularized"):
        try:
            variants[v] = calibrate_jlt(annual, target, variant=v)
        except Exception as e:  # recorded, the other variant may still match
            variants[v] = e
    expected_mu = np.array([para["mu"][k] for k in annual.labels[:-1]])

    def matches(r):
        return (
            not isinstance(r, Exception)
            and np.abs(r.mu[:-1] - expected_mu).max() <= 1e-5
            and matches_displayed(r.calibrated_annual.entries, "TPM_JLT_2").all()
            and matches_displayed(r.calibrated_monthly.entries, "TPM_JLT_5").all()
        )

    found = [v for v, r in variants.items() if matches(r)]
    print(f"JLT variants matching the reference tables: {found}")
    if not found:
        r = variants["regularized"]
        bad.append("no variant reproduces mu / TPM_JLT_2 / TPM_JLT_5")
        if not isinstance(r, Exception):
            bad.append(f"regularized mu diff {np.abs(r.mu[:-1] - expected_mu).max():.3g}")
    else:
        r = variants[found[0]]
        if np.abs(r.discrepancy).max() >= 1e-8:
            bad.append(f"residual {np.abs(r.discrepancy).max():.3g}")
    record(5, f"JLT calibration (matching variant: {', '.join(found) or 'none'})", bad)


def test_criterion_06_implied_correlation():
    bad = []
    cases = fixtures.load_json("implied_corr")["cases"]
    bb = next(c for c in cases if c["rating"] == "BB")
    beta, rho = implied_correlation(bb["pd"], bb["observed_df"], bb["q"])
    if abs(beta - 0.3112) > 1e-4:
        bad.append(f"beta {beta:.6f}")
    if abs(rho - 0.0968) > 1e-4:
        bad.append(f"rho {rho:.6f}")
    b = next(c for c in cases if c["rating"] == "B")
    _, rho_b = implied_correlation(b["pd"], b["observed_df"], b["q"])
    if abs(rho_b - 0.0859) > 2e-4:
        bad.append(f"rating B rho {rho_b:.6f}")
    record(6, f"implied correlation (beta {beta:.4f}, rho {rho:.4f}, B rho {rho_b:.4f})", bad)


@pytest.mark.slow
def test_criterion_07_simulation():
    t0 = time.perf_counter()
    bad = []
    hist = fixtures.load_tpm("tbl_Hu_TPM_1")
    hu = fixtures.load_json("hu_tables")
    beta = FactorModel.from_rho(hu["asset_correlation"]).beta

    # (a) independent defaults: pool DF is binomial
    n, s = hu["pool_sizes"]["B"], 100_000
    r = simulate_pool(SimulationConfig(hist, "B", pool_size=n, steps=1, scenarios=s, seed=1, beta=0.0))
    k = np.arange(n + 1)
    emp = np.searchsorted(np.sort(np.rint(r.df * n)), k + 0.5) / s
    eps = math.sqrt(math.log(2 / 0.001) / (2 * s))
    gap = np.abs(emp - stats.binom.cdf(k, n, hist.entries[5, -1])).max()
    if gap > eps:
        bad.append(f"(a) DKW gap {gap:.4g} > {eps:.4g}")

    # (b) large-pool direct jump against the closed-form quantile
    s = 1_000_000
    pd = hist.entries[5, -1]
    r = simulate_pool(SimulationConfig(hist, "B", pool_size=None, steps=1, mode="direct_jump", scenarios=s, seed=2, beta=beta))
    zs = []
    for q in (0.99, 0.999):
        x = direct_jump_loss_quantile(pd, beta, q)
        f = np.mean(r.df <= x)
        z = (f - q) / math.sqrt(q * (1 - q) / s)
        zs.append(z)
        if abs(z) > 3:
            bad.append(f"(b) q={q} z={z:.2f}")

    # (c) multi-step mean TMD against the reference averages
    monthly, _ = subperiod_tpm(hist, 12)
    ms = hu["tmd"]["MS Average"]
    worst = 0.0
    for rating, size in hu["pool_sizes"].items():
        cfg = SimulationConfig(monthly, rating, pool_size=size, steps=12, scenarios=100_000, seed=7, beta=beta)
        m = simulate_pool(cfg, workers=4).mean["tmd"]
        worst = max(worst, abs(m - ms[rating]))
        if abs(m - ms[rating]) > 0.003:
            bad.append(f"(c) {rating} TMD {m:.5f} vs {ms[rating]}")

    # (d) single-step mean TMR is 1 - p_ii
    for i, rating in enumerate(hist.labels[:-1]):
        r = simulate_pool(SimulationConfig(hist, rating, pool_size=100, steps=1, scenarios=100_000, seed=3 + i, beta=beta))
        if abs(r.mean["tmr"] - (1 - hist.entries[i, i])) > 3 * r.std_error["tmr"]:
            bad.append(f"(d) {rating} TMR {r.mean['tmr']:.5f} vs {1 - hist.entries[i, i]:.5f}")

    elapsed = time.perf_counter() - t0
    if elapsed >= 120:
        bad.append(f"runtime {elapsed:.1f}s")
    record(7, f"simulation properties (z {zs[0]:.2f}/{zs[1]:.2f}, worst TMD gap {worst:.4f}, {elapsed:.0f} s)", bad)


def test_criterion_08_migration_statistics():
    bad = []
    hist = fixtures.load_tpm("tbl_Hu_TPM_1")
    hu = fixtures.load_json("hu_tables")
    for kind in ("tmd", "tmr"):
        ours = matrix_statistics(hist, kind)
        for rating, v in hu[kind]["Historical Average"].items():
            if abs(ours[rating] - v) > 1e-4 + 1e-12:
                bad.append(f"{kind} {rating} {ours[rating]:.6f} vs {v}")
    rng = np.random.default_rng(8)
    violations = 0
    for _ in range(10_000):
        k = int(rng.integers(2, 10))
        p = rng.dirichlet(np.full(k, rng.uniform(0.1, 2)))
        i = int(rng.integers(0, k - 1))
        if migration_direction(p, i, "tmr") < abs(migration_direction(p, i, "tmd")) - 1e-15:
            violations += 1
    if violations:
        bad.append(f"TMR < |TMD| on {violations} rows")
    record(8, "migration statistics of the historical matrix and TMR >= |TMD|", bad)


def test_criterion_09_regularization_properties():
    rng = np.random.default_rng(9)
    bad = []
    schema = RatingSchema(tuple(f"S{i}" for i in range(6)) + ("D",))
    worst_sum, worst_off, changed = 0.0, 0.0, 0
    for _ in range(10_000):
        n = 7
        q = rng.exponential(0.05, size=(n, n)) * (rng.random((n, n)) < 0.7)
        q[-1] = 0
        np.fill_diagonal(q, 0)
        np.fill_diagonal(q, -q.sum(axis=1))
        valid = q.copy()
        out, _ = regularize_generator(GeneratorMatrix(schema, valid))
        if not np.array_equal(out.entries, valid):
            changed += 1
        noisy = q + rng.normal(0, 0.02, size=(n, n)) * (rng.random((n, n)) < 0.5)
        noisy[-1] = 0
        for i in range(n - 1):
            off = [j for j in range(n) if j != i]
            if max(noisy[i, off]) <= 0:
                noisy[i, off[int(rng.integers(len(off)))]] = rng.uniform(0.001, 0.05)
        out, _ = regularize_generator(GeneratorMatrix(schema, noisy))
        g = out.entries
        off_mask = ~np.eye(n, dtype=bool)
        worst_off = min(worst_off, g[off_mask].min())
        worst_sum = max(worst_sum, np.abs(g.sum(axis=1)).max())
    if worst_off < 0:
        bad.append(f"negative off-diagonal {worst_off:.3g}")
    if worst_sum > 1e-12:
        bad.append(f"row sum {worst_sum:.3g}")
    if changed:
        bad.append(f"{changed} valid generators modified")
    record(9, f"regularization on 10^4 random generators (max |row sum| {worst_sum:.1e})", bad)


def test_criterion_10_determinism(tmp_path):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({
        "annual_tpm": "fixture:tbl_Hu_TPM_1",
        "ratings": ["A", "BB", "B"],
        "pool_size": {"A": 228, "BB": 216, "B": 282},
        "modes": ["multi_step", "direct_jump"],
        "scenarios": 20_000,
        "seed": 42,
        "correlation": 0.6,
    }))
    outs = []
    for w in (1, 8):
        d = tmp_path / f"w{w}"
        assert cli(["simulate", str(cfg), "--workers", str(w), "--out", str(d)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    bad = []
    if outs[0].keys() != outs[1].keys():
        bad.append("different file sets")
    bad += [f"{k} differs" for k in outs[0] if outs[0][k] != outs[1].get(k)]
    record(10, f"simulate output byte-identical under 1 and 8 workers ({len(outs[0])} files)", bad)
