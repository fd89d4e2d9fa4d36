"""cointkit: small-sample cointegration and forecasting toolkit for annual macro series."""

__version__ = "0.1.0"

from .series import (  # noqa: F401
    AnnualSeries,
    Dataset,
    TransformSpec,
    align_dataset,
    difference,
    impute_backward_trend,
    log_transform,
    replay_transforms,
    series_from_values,
    shift,
    zscore,
)
from .indices import (  # noqa: F401
    IndexSeries,
    PCAResult,
    external_demand_index,
    monetary_conditions_index,
    pca,
    trade_weighted_index,
)
from .unitroot import (  # noqa: F401
    UnitRootResult,
    adf_test,
    classify_integration,
    default_max_lag,
    kpss_test,
    pp_test,
    za_test,
)
from .structural import (  # noqa: F401
    BreakResult,
    chow_test,
    make_dummy,
    sequential_chow,
)
from .regress import (  # noqa: F401
    CONST,
    RegressionResult,
    newey_west_lag,
    ols_fit,
    residual_bootstrap_ci,
    robust_covariance,
    vif,
    wald_joint,
)
from .cointegration import (  # noqa: F401
    BoundsResult,
    DolsResult,
    TestResult,
    ardl_bounds_test,
    dols_fit,
    engle_granger_test,
    pesaran_critical_values,
)
from .ecm import (  # noqa: F401
    EcmResult,
    PathRule,
    ScenarioSpec,
    build_ect,
    drift_rule,
    ecm_fit,
    ecm_forecast,
    fixed_rule,
    half_life,
    scenario_paths,
    scenario_presets,
    shock_rule,
)
from .diagnostics import (  # noqa: F401
    DiagnosticReport,
    StabilityPath,
    arch_lm,
    breusch_godfrey,
    breusch_pagan,
    cusum,
    cusumsq,
    diagnostic_report,
    granger_causality,
    jarque_bera,
    ramsey_reset,
    recursive_residuals,
)
from .forecast import (  # noqa: F401
    FeatureMatrix,
    ForecastResult,
    HoldoutReport,
    arima_fit_forecast,
    build_lagged_features,
    ets_damped_forecast,
    gbm_fit,
    holdout_eval,
    penalized_linear_fit,
    theta_forecast,
)
from .ingest import (  # noqa: F401
    DataManifest,
    IndicatorRequest,
    WDI_COUNTRIES,
    WDI_INDICATORS,
    fetch_many,
    fetch_wdi,
    freeze_replication,
    load_csv,
)
from .config import PipelineConfig, load_config, parse_config  # noqa: F401
from .pipeline import (  # noqa: F401
    RunReport,
    StageRecord,
    Table,
    emit_report,
    run_pipeline,
    substream_seed,
)
