"""Model-agnostic explanation toolkit.

Explains individual predictions of any black-box predictor through
contextual importance (how much can this feature move the output here?),
contextual utility (is the current value favorable?), and a signed
influence score comparable with Shapley-style attributions. Ships with
sampled Shapley values, a local linear surrogate, permutation importance,
a stability benchmark harness, CSV ingestion with a bagged tree ensemble,
and deterministic SVG/text rendering.
"""

from .core import (
    CATEGORICAL,
    NUMERIC,
    ConfigError,
    DataFormatError,
    DegenerateRangeError,
    ExplainerError,
    FeatureSpace,
    FeatureSpec,
    FunctionPredictor,
    Instance,
    OutputSpec,
    OutputUtility,
    Predictor,
    RangeEstimate,
    SingularSystemError,
    builtin_model,
    config_from_json,
    config_to_json,
    estimate_output_range,
    linear_reference_predictor,
    load_config,
    nonlinear_reference_predictor,
    output_range_of,
    reference_feature_space,
    resolve_utility,
    save_config,
)
from .sampling import SampleSet, SeededRng, as_rng, build_sample_set, ceteris_paribus_grid
from .engine import (
    CiuValue,
    CpCurve,
    Explanation,
    ceteris_paribus_curve,
    contextual_importance,
    contextual_influence,
    contextual_utility,
    estimate_minmax,
    explain_instance,
)
from .baselines import (
    CLASSIFICATION_ERROR,
    MAE,
    METHOD_INFLUENCE,
    METHOD_LIME,
    METHOD_SHAPLEY,
    AttributionVector,
    LossSpec,
    lime_surrogate,
    permutation_importance,
    shapley_enumerate,
    shapley_mc,
)
from .global_importance import (
    GlobalImportance,
    global_ci,
    global_mean_abs_shapley,
    normalize_importances,
    run_global,
    uniform_instances,
)
from .stability import (
    ALL_METHODS,
    Budgets,
    StabilityReport,
    run_stability,
    stability_csv,
    summarize,
)
from .tabular import (
    Dataset,
    TreeEnsemble,
    TreeParams,
    accuracy,
    holdout_split,
    load_csv,
    load_model,
    save_csv,
    save_model,
    train_ensemble,
)
from .render import (
    PlotDoc,
    render_ciu_barplot,
    render_cp_plot,
    render_influence_barplot,
    render_spread_plot,
    text_ciu_bars,
    text_influence_bars,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_METHODS",
    "AttributionVector",
    "Budgets",
    "CATEGORICAL",
    "CLASSIFICATION_ERROR",
    "CiuValue",
    "ConfigError",
    "CpCurve",
    "DataFormatError",
    "Dataset",
    "DegenerateRangeError",
    "ExplainerError",
    "Explanation",
    "FeatureSpace",
    "FeatureSpec",
    "FunctionPredictor",
    "GlobalImportance",
    "Instance",
    "LossSpec",
    "MAE",
    "METHOD_INFLUENCE",
    "METHOD_LIME",
    "METHOD_SHAPLEY",
    "NUMERIC",
    "OutputSpec",
    "OutputUtility",
    "PlotDoc",
    "Predictor",
    "RangeEstimate",
    "SampleSet",
    "SeededRng",
    "SingularSystemError",
    "StabilityReport",
    "TreeEnsemble",
    "TreeParams",
    "accuracy",
    "as_rng",
    "build_sample_set",
    "builtin_model",
    "ceteris_paribus_curve",
    "ceteris_paribus_grid",
    "config_from_json",
    "config_to_json",
    "contextual_importance",
    "contextual_influence",
    "contextual_utility",
    "estimate_minmax",
    "estimate_output_range",
    "explain_instance",
    "global_ci",
    "global_mean_abs_shapley",
    "holdout_split",
    "lime_surrogate",
    "linear_reference_predictor",
    "load_config",
    "load_csv",
    "load_model",
    "nonlinear_reference_predictor",
    "normalize_importances",
    "output_range_of",
    "permutation_importance",
    "reference_feature_space",
    "render_ciu_barplot",
    "render_cp_plot",
    "render_influence_barplot",
    "render_spread_plot",
    "resolve_utility",
    "run_global",
    "run_stability",
    "save_config",
    "save_csv",
    "save_model",
    "shapley_enumerate",
    "shapley_mc",
    "stability_csv",
    "summarize",
    "text_ciu_bars",
    "text_influence_bars",
    "train_ensemble",
    "uniform_instances",
]
