//! Experiment orchestration: configuration, pipelines and reports.

mod config;
mod pipelines;
mod report;
mod suite;

pub use config::{
    ComparisonConfig, CountBand, ExperimentConfig, GraphSource, Mode, OutputConfig,
    ResolvedTolerances, StructureParams, Tolerances,
};
pub use pipelines::{
    build_graph, run_extremes_on_samples, run_graph_pipeline, run_graph_pipeline_detailed,
    run_iid_pipeline, run_iid_pipeline_detailed, run_pipeline, run_tree_pipeline,
    run_tree_pipeline_detailed,
};
pub use report::{
    BoundCell, CensusSummary, Check, ComparisonSection, ExtremesSection, GraphSection,
    IdentityEntry, LadderRow, LadderSummary, LaplaceEntry, NormalizationKind, RunReport, Seeds,
    Skip, StageTiming,
};
pub use suite::{
    identity_functionals, random_correlation, run_comparison_suite, tree_correlation,
    write_ladder_csv,
};
