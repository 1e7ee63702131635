"""Factor-adjusted sparse VAR estimation for high-dimensional panels.

The package separates an observed panel into a dynamic-factor-driven
common component and an idiosyncratic remainder, fits a sparse VAR to
the remainder, and reads three dependence networks off the estimates:
directed Granger links from the VAR transition matrices, undirected
contemporaneous links from the innovation partial correlations, and
long-run links combining both. fnets_estimate / fnets_forecast run the
whole pipeline; the submodules expose each stage separately.
"""

from .panel import (
    RunConfig,
    TimeSeriesPanel,
    load_panel,
    read_edgelist,
    write_manifest,
    write_network_edgelist,
    write_panel,
)
from .networks import Network, NetworkSet
from .spectral import (
    AcvSet,
    DynamicPcaResult,
    SpectralEstimate,
    common_acv,
    default_bandwidth,
    dynamic_pca,
    factor_adjust,
    idio_acv,
    sample_acv,
    spectral_density,
    windowed_acv,
)
from .factors import FactorCounts, default_factor_cap, estimate_q, estimate_r
from .solvers import (
    QuadL1Problem,
    SolverReport,
    SupConL1Problem,
    solve_quad_l1,
    solve_quad_l1_columns,
    solve_supcon_l1,
)
from .var import (
    VarEstimate,
    YwSystem,
    build_yw,
    estimate_beta,
    granger_network,
    threshold_matrix,
)
from .precision import (
    LongRunEstimate,
    PrecisionEstimate,
    contemporaneous_network,
    estimate_delta,
    innovation_cov,
    longrun_matrix,
    longrun_network,
    structural_longrun_support,
)
from .forecasting import (
    BlockVarModel,
    ForecastResult,
    RestrictedFactorModel,
    fit_block_var,
    idio_forecast,
    restricted_common_forecast,
    unrestricted_common_forecast,
)
from .tuning import (
    CvGrid,
    cv_folds,
    cv_select_eta,
    cv_select_lambda_d,
    default_eta_grid,
    default_lambda_grid,
    select_threshold,
)
from .simulation import (
    DgpSpec,
    GroundTruth,
    RocCurve,
    SimulationDraw,
    forecast_errors,
    roc_curve,
    run_replication,
    score_matrix,
    simulate_panel,
    spawn_specs,
    summarize,
)
from .pipeline import FnetsFit, fnets_estimate, fnets_forecast

__version__ = "0.1.0"

__all__ = [
    "AcvSet",
    "BlockVarModel",
    "CvGrid",
    "DgpSpec",
    "DynamicPcaResult",
    "FactorCounts",
    "FnetsFit",
    "ForecastResult",
    "GroundTruth",
    "LongRunEstimate",
    "Network",
    "NetworkSet",
    "PrecisionEstimate",
    "QuadL1Problem",
    "RestrictedFactorModel",
    "RocCurve",
    "RunConfig",
    "SimulationDraw",
    "SolverReport",
    "SpectralEstimate",
    "SupConL1Problem",
    "TimeSeriesPanel",
    "VarEstimate",
    "YwSystem",
    "build_yw",
    "common_acv",
    "contemporaneous_network",
    "cv_folds",
    "cv_select_eta",
    "cv_select_lambda_d",
    "default_bandwidth",
    "default_eta_grid",
    "default_factor_cap",
    "default_lambda_grid",
    "dynamic_pca",
    "estimate_beta",
    "estimate_delta",
    "estimate_q",
    "estimate_r",
    "factor_adjust",
    "fit_block_var",
    "fnets_estimate",
    "fnets_forecast",
    "forecast_errors",
    "granger_network",
    "idio_acv",
    "idio_forecast",
    "innovation_cov",
    "load_panel",
    "longrun_matrix",
    "longrun_network",
    "read_edgelist",
    "restricted_common_forecast",
    "roc_curve",
    "run_replication",
    "sample_acv",
    "score_matrix",
    "select_threshold",
    "simulate_panel",
    "solve_quad_l1",
    "solve_quad_l1_columns",
    "solve_supcon_l1",
    "spawn_specs",
    "spectral_density",
    "structural_longrun_support",
    "summarize",
    "threshold_matrix",
    "unrestricted_common_forecast",
    "windowed_acv",
    "write_manifest",
    "write_network_edgelist",
    "write_panel",
]
