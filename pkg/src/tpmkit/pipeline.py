"""End-to-end construction of a sub-period TPM from an annual one.

Stages run in a fixed order: PD override on the full agency matrix, state
absorption into default, row rescaling, then one of the generator, QOM or
JLT routes, followed by error control against the rescaled annual matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import fixtures
from .error_control import ComparisonReport, compare
from .errors import ConfigurationError, TpmError
from .files import displayed_agreement, dumps_json, format_matrix_csv, load_transition_matrix, write_bundle
from .jlt_calibration import JltResult, calibrate_jlt
from .matrix_core import TransitionMatrix, matrix_power
from .pd_policy import (
    PdOverridePolicy,
    PdVector,
    aggregate_basel_pd,
    apply_pd_override,
    rescale_rows,
)
from .rating_schema import absorb_state
from .regularization import RegularizationReport, qom_subperiod_tpm, subperiod_tpm

ROUTES = ("generator", "qom", "jlt")
PD_MODES = ("none", "floor", "replace", "replace_max")


@dataclass
class PipelineConfig:
    """Inputs of one construction run.

    ``pd_mode='replace_max'`` replaces PDs with the bucket maxima of an
    internal PD table unless an explicit vector is given.
    """

    annual: TransitionMatrix
    sector: str = ""
    pd_mode: str = "none"
    pd: PdVector | None = None
    absorb: tuple[str, ...] = ("CCC",)
    rescale: str = "diagonal"
    route: str = "generator"
    periods_per_year: int = 12
    jlt_target: PdVector | None = None
    output_dir: Path | None = None
    allow_reorder: bool = False
    stage_order: tuple[str, ...] = ("override", "absorb", "rescale")

    def __post_init__(self):
        if self.pd_mode not in PD_MODES:
            raise ConfigurationError(f"pd mode must be one of {PD_MODES}, got {self.pd_mode!r}")
        if self.pd_mode in ("floor", "replace", "replace_max") and self.pd is None:
            raise ConfigurationError(f"pd mode {self.pd_mode!r} needs a PD vector")
        if self.pd_mode == "none" and self.pd is not None:
            raise ConfigurationError("pd mode 'none' takes no PD vector")
        if self.route not in ROUTES:
            raise ConfigurationError(f"route must be one of {ROUTES}, got {self.route!r}")
        if self.periods_per_year not in (4, 12):
            raise ConfigurationError("periods_per_year must be 4 or 12")
        if self.route == "jlt" and self.jlt_target is None:
            raise ConfigurationError("the jlt route needs an explicit target PD vector")
        if self.rescale not in ("diagonal", "proportional"):
            raise ConfigurationError(f"unknown rescale method {self.rescale!r}")
        default = ("override", "absorb", "rescale")
        if tuple(self.stage_order) != default:
            if not self.allow_reorder:
                raise ConfigurationError("stage order is fixed; set allow_reorder to change it")
            if sorted(self.stage_order) != sorted(default):
                raise ConfigurationError(f"stage order must permute {default}")

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "PipelineConfig":
        """Build from a JSON-style dict.

        Matrix and PD references may be ``fixture:<name>``, a path relative
        to ``base_dir``, or (for PD vectors) an inline ``{label: pd}`` map.
        """
        base = Path(base_dir or ".")
        if "annual_tpm" not in d:
            raise ConfigurationError("config needs 'annual_tpm'")
        policy = d.get("pd_policy") or {"mode": "none"}
        mode = policy.get("mode", "none")
        pd = resolve_pd(policy["pd"], base) if policy.get("pd") is not None else None
        if pd is None and policy.get("pd_table") or (pd is None and d.get("pd_table")):
            ref = policy.get("pd_table") or d.get("pd_table")
            table, buckets = _resolve_pd_table(ref, base)
            agg = "max" if mode == "replace_max" else policy.get("aggregate", "average")
            pd = aggregate_basel_pd(table, buckets, agg)
        target = resolve_pd(d["jlt_target"], base) if d.get("jlt_target") is not None else None
        out = d.get("output_dir")
        return cls(
            annual=resolve_tpm(d["annual_tpm"], base),
            sector=d.get("sector", ""),
            pd_mode=mode,
            pd=pd,
            absorb=tuple(d.get("absorb", ("CCC",))),
            rescale=d.get("rescale", "diagonal"),
            route=d.get("route", "generator"),
            periods_per_year=int(d.get("periods_per_year", 12)),
            jlt_target=target,
            output_dir=(base / out) if out else None,
            allow_reorder=bool(d.get("allow_reorder", False)),
            stage_order=tuple(d.get("stage_order", ("override", "absorb", "rescale"))),
        )


def resolve_tpm(ref: str, base: Path = Path("."), validate: bool = False) -> TransitionMatrix:
    """Load a matrix reference.

    Pipeline inputs are not validated here: reference matrices carry
    rounding residue in their row sums that the rescale stage removes.
    """
    if ref.startswith(fixtures.PREFIX):
        return fixtures.load_tpm(ref[len(fixtures.PREFIX):], validate=validate)
    return load_transition_matrix(base / ref, validate=validate)


def resolve_pd(ref: Any, base: Path = Path(".")) -> PdVector:
    import json

    if isinstance(ref, dict):
        return PdVector.from_mapping({k: float(v) for k, v in ref.items()})
    if isinstance(ref, str) and ref.startswith(fixtures.PREFIX):
        return fixtures.pd_vector(ref[len(fixtures.PREFIX):])
    if isinstance(ref, str):
        doc = json.loads((base / ref).read_text())
        return PdVector.from_mapping(doc.get("pd", doc))
    raise ConfigurationError(f"cannot interpret PD reference {ref!r}")


def _resolve_pd_table(ref: Any, base: Path):
    import json

    from .pd_policy import InternalPdTable

    if isinstance(ref, str) and ref.startswith(fixtures.PREFIX):
        return fixtures.pd_table(ref[len(fixtures.PREFIX):])
    doc = json.loads((base / ref).read_text()) if isinstance(ref, str) else ref
    table = InternalPdTable({int(k): float(v) for k, v in doc["entries"].items()}, doc.get("sector", ""))
    return table, {k: list(v) for k, v in doc["buckets"].items()}


@dataclass
class PipelineResult:
    config: PipelineConfig
    overridden: TransitionMatrix
    absorbed: TransitionMatrix
    annual: TransitionMatrix
    subperiod: TransitionMatrix
    reconstructed: TransitionMatrix
    comparison: ComparisonReport
    regularization: RegularizationReport | None = None
    jlt: JltResult | None = None
    extras: dict = field(default_factory=dict)

    def artifacts(self) -> dict[str, str]:
        """Text of every output file, keyed by file name."""
        labels = self.annual.labels
        files = {
            "annual_rescaled.csv": format_matrix_csv(self.annual.entries, labels, self.annual.period_months),
            "subperiod.csv": format_matrix_csv(self.subperiod.entries, labels, self.subperiod.period_months),
            "reconstructed_annual.csv": format_matrix_csv(
                self.reconstructed.entries, labels, self.reconstructed.period_months
            ),
            "absolute_diff.csv": format_matrix_csv(self.comparison.absolute_diff, labels),
            "relative_diff.csv": format_matrix_csv(self.comparison.relative_diff, labels),
        }
        report = {
            "sector": self.config.sector,
            "route": self.config.route,
            "pd_mode": self.config.pd_mode,
            "periods_per_year": self.config.periods_per_year,
            "norms": self.comparison.norms,
            "regularization": self.regularization.to_dict() if self.regularization else None,
            "jlt": None,
        }
        if self.jlt is not None:
            j = self.jlt.to_dict()
            report["jlt"] = {k: j[k] for k in ("variant", "iterations", "mu", "target_pd", "calibrated_pd", "discrepancy")}
        files["report.json"] = dumps_json(report)
        return files


def _stage(name: str, fn: Callable, *args, **kw):
    try:
        return fn(*args, **kw)
    except TpmError as e:
        raise e.with_stage(name) from e


def run_pipeline(config: PipelineConfig, write: bool = True) -> PipelineResult:
    """Run every stage and, if ``config.output_dir`` is set, write the artifacts.

    Nothing is written unless all stages succeed.
    """
    cfg = config
    state = cfg.annual
    results = {}

    def do_override(t):
        if cfg.pd_mode == "none":
            return t
        mode = "replace" if cfg.pd_mode == "replace_max" else cfg.pd_mode
        return apply_pd_override(t, PdOverridePolicy(mode, cfg.pd))

    def do_absorb(t):
        for s in cfg.absorb:
            if s in t.labels:
                t = absorb_state(t, s)
        return t

    def do_rescale(t):
        return rescale_rows(t, cfg.rescale) if t.needs_rescaling else t

    steps = {"override": do_override, "absorb": do_absorb, "rescale": do_rescale}
    for name in cfg.stage_order:
        state = _stage(name, steps[name], state)
        results[name] = state
    annual = _stage("rescale", state.validate)

    n = cfg.periods_per_year
    report = None
    jres = None
    if cfg.route == "generator":
        sub, report = _stage("generator", subperiod_tpm, annual, n)
    elif cfg.route == "qom":
        sub = _stage("qom", qom_subperiod_tpm, annual, n)
    else:
        jres = _stage("jlt", calibrate_jlt, annual, cfg.jlt_target, periods_per_year=n)
        sub = jres.calibrated_monthly
    recon = matrix_power(sub, n)
    cmp_report = compare(recon, annual, describe=("subperiod^n", "rescaled annual"))
    for t in (sub, recon):
        _stage("output", t.validate)
    res = PipelineResult(
        cfg, results["override"], results["absorb"], annual, sub, recon, cmp_report, report, jres
    )
    if write and cfg.output_dir is not None:
        write_bundle(cfg.output_dir, res.artifacts())
    return res


def run_fixture_pipeline(name: str, **overrides) -> PipelineResult:
    """Run one of the bundled pipeline configs (no files written)."""
    import json

    d = json.loads(fixtures.pipeline_config_path(name).read_text())
    d.update(overrides)
    d.pop("output_dir", None)
    return run_pipeline(PipelineConfig.from_dict(d), write=False)


def expected_tables(name: str) -> dict[str, str]:
    import json

    d = json.loads(fixtures.pipeline_config_path(name).read_text())
    return {k: v[len(fixtures.PREFIX):] for k, v in d.get("expected", {}).items()}


def matches_displayed(values: np.ndarray, label: str) -> np.ndarray:
    """Boolean mask of cells that agree with fixture ``label`` at its displayed precision."""
    return displayed_agreement(values, fixtures.load_table(label))
