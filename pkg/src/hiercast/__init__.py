"""Hierarchy construction, reconciliation and evaluation for time-series panels."""

from .baseforecast import (
    EtsModel,
    FitCache,
    ForecastBundle,
    fit_ets,
    forecast_ets,
    forecast_panel,
    seasonal_naive,
)
from .cluster import (
    MergeTree,
    Partition,
    grouped_hierarchy,
    grouping_from_partition,
    grouping_from_tree,
    pam,
    select_k_by_asw,
    silhouette_width,
    ward_tree,
)
from .combine import combine
from .distance import dtw_distance, dtw_matrix, euclidean_matrix
from .evaluate import (
    Approach,
    EvalReport,
    McbResult,
    WindowContext,
    WindowPlan,
    mcb,
    rmsse,
    run_backtest,
)
from .experiments import load_config, run_experiment, twin_experiment
from .panel import (
    Grouping,
    HierarchySpec,
    SeriesPanel,
    read_natural_hierarchy,
    read_panel,
    summing_matrix,
    two_level,
    write_hierarchy,
    write_panel,
)
from .permute import twin, twin_batch
from .reconcile import CovEstimate, estimate_w, reconcile
from .represent import (
    FEATURE_NAMES,
    FeatureVector,
    Representation,
    build_representation,
    compute_features,
    feature_matrix,
    pca_reduce,
    standardize,
)
from .simulate import DgpConfig, cluster_labels, simulate_panel, true_grouping

__version__ = "0.1.0"
