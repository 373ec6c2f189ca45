"""judgekit: reliability metrics and paired statistical comparison for judged evaluation data."""

__version__ = "0.1.0"

from .errors import (
    DataIntegrityError,
    DegenerateDistributionError,
    InfeasibleConstructionError,
    InsufficientDataError,
    InvalidScaleError,
    JudgekitError,
    NoSignalError,
    ParseError,
    StatisticError,
    UndefinedCorrelationError,
    UnknownRaterError,
    UnsupportedDesignError,
)
from .ratings import (
    MatrixDiagnostics,
    OrdinalScale,
    RatingsMatrix,
    marginal_proportions,
    matrix_from_rows,
    paired_columns,
    validate_matrix,
    weight_matrix,
)
from .reliability import (
    PROFILE_COLUMNS,
    AgreementResult,
    ProfileCell,
    cohen_kappa,
    gwet_ac,
    judge_profile,
    kendall_tau_b,
    krippendorff_alpha,
    percent_agreement,
    spearman_rho,
)
from .inference import (
    CorrectionResult,
    PairedSamples,
    TestResult,
    adjust_pvalues,
    friedman_test,
    mann_whitney_u,
    sample_skewness,
    sign_test,
    wilcoxon_signed_rank,
)
from .pipeline import (
    ComparisonReport,
    ComparisonRow,
    ConsolidatedRatings,
    JudgeReport,
    RunRecord,
    SweepRow,
    VoteResult,
    compare_systems,
    consolidate_runs,
    evaluate_judges,
    judge_report_from_matrix,
    majority_vote,
    metric_polarity,
    paradox_matrix,
    prevalence_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
