"""Command-line interface.

Exit codes: 0 on success, 2 on invalid input or configuration, 3 when a
numerical method fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import fixtures
from .error_control import compare
from .errors import ConfigurationError, NumericalError, TpmError, ValidationError
from .files import dumps_json, format_matrix_csv, read_matrix_csv, write_bundle, write_matrix_csv
from .jlt_calibration import calibrate_jlt
from .matrix_core import TransitionMatrix, principal_log
from .migration_stats import KINDS, correlation_matrix, matrix_statistics, read_series_csv
from .pd_policy import PdVector
from .pipeline import PipelineConfig, resolve_pd, resolve_tpm, run_pipeline
from .portfolio_sim import (
    DEFAULT_PERCENTILES,
    FactorModel,
    SimulationConfig,
    implied_correlation,
    percentile_table,
    simulate_pool,
)
from .regularization import qom_subperiod_tpm, regularize_generator, subperiod_tpm


def _pct_table(values, labels, digits: int = 4) -> str:
    values = np.asarray(values, dtype=float)
    def cell(v):
        if np.isnan(v):
            return "--"
        text = f"{v * 100:.{digits}f}"
        return (text[1:] if text.startswith("-") and float(text) == 0 else text) + "%"

    cells = [[cell(v) for v in row] for row in values]
    width = max(8, *(len(c) for row in cells for c in row), *(len(s) for s in labels))
    lines = [" " * 6 + "".join(s.rjust(width + 1) for s in labels)]
    for lab, row in zip(labels, cells):
        lines.append(lab.ljust(6) + "".join(c.rjust(width + 1) for c in row))
    return "\n".join(lines)


def _load_matrix(ref: str, validate: bool = True) -> TransitionMatrix:
    if ref.startswith(fixtures.PREFIX):
        return fixtures.load_tpm(ref[len(fixtures.PREFIX):], validate=validate)
    return read_matrix_csv(ref).to_transition_matrix().validate() if validate else read_matrix_csv(ref).to_transition_matrix()


def parse_inline_pd(text: str) -> PdVector:
    """Parse ``AAA=0.0001,AA=0.00015`` (decimals) into a PD vector."""
    out = {}
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise ConfigurationError(f"inline PD entry {part!r} is not LABEL=VALUE")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError:
            raise ConfigurationError(f"inline PD entry {part!r} has a non-numeric value") from None
    if not out:
        raise ConfigurationError("empty inline PD vector")
    return PdVector.from_mapping(out)


def _pd_arg(text: str) -> PdVector:
    if "=" in text:
        return parse_inline_pd(text)
    return resolve_pd(text)


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigurationError(f"{path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None


# ------------------------------------------------------------------ commands


def cmd_build(a) -> int:
    if a.config.startswith(fixtures.PREFIX):
        path = fixtures.pipeline_config_path(a.config[len(fixtures.PREFIX):])
    else:
        path = Path(a.config)
    doc = _read_json(str(path))
    if a.pd_mode:
        doc.setdefault("pd_policy", {})["mode"] = a.pd_mode
    if a.pd:
        doc.setdefault("pd_policy", {})["pd"] = _pd_arg(a.pd).as_dict()
    if a.route:
        doc["route"] = a.route
    if a.out:
        doc["output_dir"] = str(Path(a.out).resolve())
    base = path.parent if not a.config.startswith(fixtures.PREFIX) else Path(".")
    cfg = PipelineConfig.from_dict(doc, base)
    res = run_pipeline(cfg)
    lab = res.annual.labels
    print(f"sub-period TPM ({cfg.route} route, {cfg.periods_per_year} periods per year)")
    print(_pct_table(res.subperiod.entries, lab))
    print("\nnorms of (subperiod^n - rescaled annual)")
    for k, v in res.comparison.norms.items():
        print(f"  {k:<10} {v * 100:.4f}%")
    if cfg.output_dir:
        print(f"\nwrote {cfg.output_dir}")
    return 0


def cmd_generator(a) -> int:
    tpm = _load_matrix(a.matrix)
    g = principal_log(tpm)
    g_hat, report = regularize_generator(g)
    print("generator G = log(TPM)")
    print(_pct_table(g.entries, g.labels))
    print("\nregularized generator")
    print(_pct_table(g_hat.entries, g.labels))
    print(f"\nzeroed entries: {len(report.zeroed_entries)}")
    for i, j, v in report.zeroed_entries:
        print(f"  ({g.labels[i]}, {g.labels[j]}) {v * 100:.4f}%")
    if a.out:
        write_bundle(a.out, {
            "generator.csv": format_matrix_csv(g.entries, g.labels),
            "generator_regularized.csv": format_matrix_csv(g_hat.entries, g.labels),
            "regularization.json": dumps_json(report.to_dict()),
        })
    return 0


def cmd_subperiod(a) -> int:
    tpm = _load_matrix(a.matrix)
    sub, report = subperiod_tpm(tpm, a.periods)
    print(_pct_table(sub.entries, sub.labels))
    if a.out:
        write_matrix_csv(a.out, sub)
    return 0


def cmd_qom(a) -> int:
    tpm = _load_matrix(a.matrix)
    sub = qom_subperiod_tpm(tpm, a.periods)
    print(_pct_table(sub.entries, sub.labels))
    if a.out:
        write_matrix_csv(a.out, sub)
    return 0


def cmd_jlt(a) -> int:
    tpm = _load_matrix(a.matrix)
    res = calibrate_jlt(tpm, _pd_arg(a.target), a.tol, periods_per_year=a.periods, variant=a.variant)
    print(f"{'':6}{'mu':>12}{'target PD':>12}{'calibrated':>12}{'discrepancy':>14}")
    for i, lab in enumerate(tpm.labels[:-1]):
        print(f"{lab:<6}{res.mu[i]:>12.6f}{res.target[i] * 100:>11.3f}%{res.implied_pd[i] * 100:>11.3f}%{res.discrepancy[i]:>14.2e}")
    print("\ncalibrated annual TPM")
    print(_pct_table(res.calibrated_annual.entries, tpm.labels))
    if a.out:
        write_bundle(a.out, {
            "jlt.json": dumps_json(res.to_dict()),
            "calibrated_annual.csv": format_matrix_csv(res.calibrated_annual.entries, tpm.labels, tpm.period_months),
            "calibrated_subperiod.csv": format_matrix_csv(
                res.calibrated_monthly.entries, tpm.labels, res.calibrated_monthly.period_months
            ),
        })
    return 0


def cmd_compare(a) -> int:
    x = _load_matrix(a.a, validate=False)
    y = _load_matrix(a.b, validate=False)
    rep = compare(x, y, per_element=a.per_element, describe=(a.a, a.b))
    print("absolute difference (A - B)")
    print(_pct_table(rep.absolute_diff, rep.labels))
    print("\nrelative difference (A - B) / B")
    print(_pct_table(rep.relative_diff, rep.labels, digits=2))
    print("\nnorms")
    for k, v in rep.norms.items():
        print(f"  {k:<10} {v * 100:.4f}%")
    if a.out:
        write_bundle(a.out, {
            "absolute_diff.csv": format_matrix_csv(rep.absolute_diff, rep.labels),
            "relative_diff.csv": format_matrix_csv(rep.relative_diff, rep.labels),
            "norms.json": dumps_json(rep.norms),
        })
    return 0


def simulation_configs(doc: dict, base: Path = Path(".")) -> list[SimulationConfig]:
    """Expand a simulation JSON document into one config per (rating, mode).

    Keys: ``annual_tpm`` or ``monthly_tpm``; ``ratings``; ``pool_size``
    (int, ``null`` or a per-rating map); ``modes``; ``steps``;
    ``scenarios``; ``seed``; ``correlation`` with ``correlation_convention``
    (``rho`` or ``beta``); ``percentiles``; ``block_size``.
    """
    steps = int(doc.get("steps", 12))
    if "monthly_tpm" in doc:
        monthly = resolve_tpm(doc["monthly_tpm"], base, validate=True)
        annual = None
    elif "annual_tpm" in doc:
        annual = resolve_tpm(doc["annual_tpm"], base, validate=True)
        monthly = None
    else:
        raise ConfigurationError("simulation config needs 'annual_tpm' or 'monthly_tpm'")
    modes = doc.get("modes", ["multi_step"])
    beta = FactorModel.from_correlation(float(doc.get("correlation", 0.0)), doc.get("correlation_convention", "rho")).beta
    ref = annual or monthly
    ratings = doc.get("ratings", list(ref.labels[:-1]))
    pools = doc.get("pool_size", 100)
    out = []
    for r in ratings:
        n = pools.get(r) if isinstance(pools, dict) else pools
        for m in modes:
            if m == "multi_step":
                tpm = monthly if monthly is not None else subperiod_tpm(annual, steps)[0]
                st = steps
            elif m == "direct_jump":
                tpm = annual if annual is not None else monthly
                st = 1 if annual is not None else steps
            else:
                raise ConfigurationError(f"unknown simulation mode {m!r}")
            out.append(SimulationConfig(
                tpm=tpm, initial_rating=r, pool_size=None if n is None else int(n), steps=st, mode=m,
                scenarios=int(doc.get("scenarios", 10_000)), seed=int(doc.get("seed", 0)), beta=beta,
                percentiles=tuple(float(q) for q in doc.get("percentiles", DEFAULT_PERCENTILES)),
                block_size=int(doc.get("block_size", 8192)),
            ))
    return out


def run_simulation_document(doc: dict, base: Path = Path("."), workers: int = 1) -> dict[str, str]:
    """Run every configured simulation and return the output files' text."""
    cfgs = simulation_configs(doc, base)
    results: dict[str, dict] = {}
    summaries = []
    for c in cfgs:
        res = simulate_pool(c, workers=workers)
        results.setdefault(c.initial_rating, {})[c.mode] = res
        summaries.append(res.summary())
    ratings = list(results)
    files = {"results.json": dumps_json({"runs": summaries})}
    hist = doc.get("historical", {})
    for stat in ("df", "tmd", "tmr"):
        rows = percentile_table(results, stat, ratings, hist.get(stat))
        files[f"{stat}_percentiles.csv"] = "".join(",".join(r) + "\n" for r in rows)
    return files


def cmd_simulate(a) -> int:
    doc = _read_json(a.config)
    for k in ("scenarios", "seed"):
        if getattr(a, k) is not None:
            doc[k] = getattr(a, k)
    files = run_simulation_document(doc, Path(a.config).parent, workers=a.workers)
    summary = json.loads(files["results.json"])
    print(f"{'rating':<8}{'mode':<12}{'mean DF':>10}{'mean TMD':>10}{'mean TMR':>10}")
    for s in summary["runs"]:
        m = s["mean"]
        print(f"{s['initial_rating']:<8}{s['mode']:<12}{m['df'] * 100:>9.3f}%{m['tmd'] * 100:>9.3f}%{m['tmr'] * 100:>9.3f}%")
    if a.out:
        write_bundle(a.out, files)
    return 0


def cmd_stats(a) -> int:
    if a.series:
        series = read_series_csv(a.series, a.kind if a.kind != "all" else None)
        corr = correlation_matrix(series)
        labels = [s.rating for s in series]
        text = format_matrix_csv(corr, labels)
        print(text, end="")
        if a.out:
            Path(a.out).write_text(text)
        return 0
    if not a.matrix:
        raise ConfigurationError("stats needs a matrix file or --series")
    tpm = _load_matrix(a.matrix)
    kinds = KINDS if a.kind == "all" else (a.kind,)
    stats = {k: matrix_statistics(tpm, k) for k in kinds}
    print(f"{'':6}" + "".join(f"{k.upper():>10}" for k in kinds))
    for lab in tpm.labels[:-1]:
        print(f"{lab:<6}" + "".join(f"{stats[k][lab] * 100:>9.2f}%" for k in kinds))
    if a.out:
        Path(a.out).write_text(dumps_json(stats))
    return 0


def cmd_implied_corr(a) -> int:
    beta, rho = implied_correlation(a.pd, a.df, a.q)
    print(f"beta = {beta:.4f}\nrho = {rho:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tpmkit", description="Credit rating transition matrix toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("build", help="run a construction pipeline from a JSON config")
    s.add_argument("config", help="pipeline JSON file or fixture:<name>")
    s.add_argument("--out", help="output directory (overrides the config)")
    s.add_argument("--pd-mode", choices=["none", "floor", "replace", "replace_max"])
    s.add_argument("--pd", help="PD vector: LABEL=VALUE,... (decimals), JSON file or fixture:<name>")
    s.add_argument("--route", choices=["generator", "qom", "jlt"])
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("generator", help="principal log and its regularization")
    s.add_argument("matrix", help="annual TPM CSV or fixture:<label>")
    s.add_argument("--out", help="directory for G, G-hat and the audit JSON")
    s.set_defaults(func=cmd_generator)

    for name, fn, text in (("subperiod", cmd_subperiod, "sub-period TPM by the generator route"),
                           ("qom", cmd_qom, "sub-period TPM by root projection")):
        s = sub.add_parser(name, help=text)
        s.add_argument("matrix", help="annual TPM CSV or fixture:<label>")
        s.add_argument("--periods", type=int, default=12, help="periods per year (default 12)")
        s.add_argument("--out", help="output CSV")
        s.set_defaults(func=fn)

    s = sub.add_parser("jlt", help="calibrate diagonal generator scaling to target PDs")
    s.add_argument("matrix", help="annual TPM CSV or fixture:<label>")
    s.add_argument("--target", required=True, help="target PDs: LABEL=VALUE,..., JSON file or fixture:<name>")
    s.add_argument("--periods", type=int, default=12)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--variant", choices=["regularized", "raw"], default="regularized")
    s.add_argument("--out", help="output directory")
    s.set_defaults(func=cmd_jlt)

    s = sub.add_parser("compare", help="difference tables and norms of A - B")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--per-element", action="store_true", help="divide the Frobenius norm by N*N")
    s.add_argument("--out", help="output directory")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("simulate", help="one-factor Monte Carlo from a JSON config")
    s.add_argument("config")
    s.add_argument("--out", help="output directory")
    s.add_argument("--workers", type=int, default=1, help="worker threads (results do not depend on it)")
    s.add_argument("--scenarios", type=int)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("stats", help="migration statistics of a TPM or correlations of yearly series")
    s.add_argument("matrix", nargs="?", help="TPM CSV or fixture:<label>")
    s.add_argument("--kind", choices=list(KINDS) + ["all"], default="all")
    s.add_argument("--series", help="CSV with columns year,rating,<statistic>")
    s.add_argument("--out", help="output file")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("implied-corr", help="factor loading implied by an extreme default frequency")
    s.add_argument("--pd", type=float, required=True, help="average annual PD (decimal)")
    s.add_argument("--df", type=float, required=True, help="observed default frequency (decimal)")
    s.add_argument("--q", type=float, required=True, help="percentile the observation is assumed to sit at")
    s.set_defaults(func=cmd_implied_corr)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.func(args) or 0)
    except NumericalError as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return 3
    except (ValidationError, TpmError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def cli(argv: Sequence[str] | None = None) -> int:
    """Entry point returning the exit code instead of raising ``SystemExit`` for usage errors."""
    try:
        return main(argv)
    except SystemExit as e:
        return int(e.code or 0)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
