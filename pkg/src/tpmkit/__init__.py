"""Construction and validation of sub-annual credit rating transition matrices."""

from .error_control import ComparisonReport, compare
from .errors import NumericalError, TpmError, ValidationError
from .jlt_calibration import JltResult, calibrate_jlt
from .matrix_core import (
    GeneratorMatrix,
    TransitionMatrix,
    fractional_root,
    matrix_exp,
    matrix_power,
    norm,
    principal_log,
)
from .migration_stats import MigrationSeries, build_series, migration_direction, series_correlation
from .pd_policy import (
    InternalPdTable,
    PdOverridePolicy,
    PdVector,
    aggregate_basel_pd,
    apply_pd_override,
    rescale_rows,
)
from .pipeline import PipelineConfig, run_pipeline
from .portfolio_sim import (
    FactorModel,
    SimulationConfig,
    SimulationResult,
    conditional_pd,
    direct_jump_loss_quantile,
    implied_correlation,
    simulate_pool,
)
from .rating_schema import AGENCY8, IRC7, RatingMap, RatingSchema, absorb_state, map_external_rating
from .regularization import (
    RegularizationReport,
    project_row_to_simplex,
    qom_subperiod_tpm,
    regularize_generator,
    subperiod_tpm,
)

__all__ = [
    "absorb_state",
    "AGENCY8",
    "aggregate_basel_pd",
    "apply_pd_override",
    "build_series",
    "calibrate_jlt",
    "compare",
    "ComparisonReport",
    "conditional_pd",
    "direct_jump_loss_quantile",
    "FactorModel",
    "fractional_root",
    "GeneratorMatrix",
    "implied_correlation",
    "InternalPdTable",
    "IRC7",
    "JltResult",
    "map_external_rating",
    "matrix_exp",
    "matrix_power",
    "migration_direction",
    "MigrationSeries",
    "norm",
    "NumericalError",
    "PdOverridePolicy",
    "PdVector",
    "PipelineConfig",
    "principal_log",
    "project_row_to_simplex",
    "qom_subperiod_tpm",
    "RatingMap",
    "RatingSchema",
    "RegularizationReport",
    "regularize_generator",
    "rescale_rows",
    "run_pipeline",
    "series_correlation",
    "simulate_pool",
    "SimulationConfig",
    "SimulationResult",
    "subperiod_tpm",
    "TpmError",
    "TransitionMatrix",
    "ValidationError",
]

__version__ = "0.1.0"
