"""biaslab: a desk-scale simulation lab for regression bias mechanisms.

Generate data from directed-equation structural specifications, fit the
family-appropriate regression model, and quantify how assumption
violations, causal misadjustment, and measurement decisions move the
estimates.
"""

from .causal import (
    IvEstimate,
    MediationResult,
    RowFilter,
    ScenarioReport,
    compare_adjustments,
    conditional_slope,
    iv_wald,
    mediation,
    moderated_fit,
    subgroup_effect,
)
from .data import (
    BalanceReport,
    Column,
    Dataset,
    SummaryStats,
    balance_diff,
    listwise_complete,
    pearson,
    quantile_type7,
    ranks_average_ties,
    read_csv,
    spearman,
    summarize,
    write_csv,
)
from .errors import (
    BiaslabError,
    DataError,
    ParameterError,
    SeparationWarning,
    SingularDesignError,
    ValidationError,
    WeakInstrumentError,
)
from .mc import (
    BalanceStep,
    FitStep,
    IvStep,
    McResult,
    McSummary,
    McTemplate,
    RangeSpec,
    SamplingPlan,
    filter_replicates,
    histogram,
    repeated_samples,
    run_mc,
    series_correlation,
    summarize_series,
)
from .measure import (
    AttenuationReport,
    AttenuationVariant,
    RecodeRule,
    TransformRule,
    attenuation_report,
    dichotomize,
    ordinalize,
    transform,
)
from .regress import (
    CollinearityReport,
    FitResult,
    Formula,
    collinearity_diagnostics,
    fit,
    fit_logistic,
    fit_ols,
    fit_ordered_logit,
    interaction,
    main,
    predict,
    residuals,
    square,
    wald_chisq,
)
from .rng import RngState, derive_substream, normal_draws, sample_indices, uniform_draw
from .scm import (
    CorrTarget,
    EquationSpec,
    ErrorTerm,
    GroupError,
    ScmSpec,
    SourceSpec,
    block_randomize,
    clamped_integer_normal,
    evaluate_scm,
    inject_outlier,
    mvn_exact,
    repeat_pattern,
)

__version__ = "0.1.0"
