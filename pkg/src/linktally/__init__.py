"""Batch analytics for outbound links in social-media post dumps.

The pipeline runs in file-based stages: ingest newline-delimited JSON
posts into per-month domain link counts, then measure concentration and
diversity, heavy-tail shape, cohort survival, rank-snapshot mass, and
the econometric link between attention and a value series. Every stage
reads and writes plain CSV with deterministic ordering.
"""

from .diversity import (
    DiversitySummary,
    FunctionAttentionSeries,
    FunctionMap,
    function_attention,
    hhi,
    link_originality,
    load_function_map,
    moment_stats,
    summarize_month,
    top_n_share,
)
from .domains import bucket_month, extract_urls, normalize_domain
from .econ import (
    AdfResult,
    EconPipelineReport,
    GrangerResult,
    MonthlySeries,
    VarFit,
    adf_test,
    difference,
    engle_granger,
    fit_var,
    granger_test,
    run_two_step_pipeline,
    select_lag,
)
from .errors import LinkTallyError
from .ingest import (
    IngestOptions,
    IngestStats,
    MonthlyDomainCounts,
    ingest_files,
    ingest_stream,
    merge_counts,
    read_domain_counts,
    write_domain_counts,
)
from .rankshare import RankSnapshot, load_rank_snapshot, top_n_rank_mass
from .survival import CohortTable, assign_cohorts, survival_curve
from .tailfit import (
    LlrComparison,
    PowerLawFit,
    TailFitReport,
    empirical_ccdf,
    fit_alternatives,
    fit_all_periods,
    fit_power_law,
    loglik_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "AdfResult",
    "CohortTable",
    "DiversitySummary",
    "EconPipelineReport",
    "FunctionAttentionSeries",
    "FunctionMap",
    "GrangerResult",
    "IngestOptions",
    "IngestStats",
    "LinkTallyError",
    "LlrComparison",
    "MonthlyDomainCounts",
    "MonthlySeries",
    "PowerLawFit",
    "RankSnapshot",
    "TailFitReport",
    "VarFit",
    "adf_test",
    "assign_cohorts",
    "bucket_month",
    "difference",
    "empirical_ccdf",
    "engle_granger",
    "extract_urls",
    "fit_alternatives",
    "fit_all_periods",
    "fit_power_law",
    "fit_var",
    "function_attention",
    "granger_test",
    "hhi",
    "ingest_files",
    "ingest_stream",
    "link_originality",
    "load_function_map",
    "load_rank_snapshot",
    "loglik_ratio",
    "merge_counts",
    "moment_stats",
    "normalize_domain",
    "read_domain_counts",
    "run_two_step_pipeline",
    "select_lag",
    "summarize_month",
    "survival_curve",
    "top_n_rank_mass",
    "top_n_share",
    "write_domain_counts",
]
