//! Commit contribution scoring from git history.
//!
//! Each commit is measured per changed function: a weighted edit size from
//! tree differencing, a complexity factor, the function's importance in the
//! project call graph and the reach of the change inside the function. The
//! factors are normalized over the run and multiplied into a per-function
//! score; a commit's value is the sum over its functions.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common instantiations.

pub mod complexity;
pub mod config;
pub mod diff;
pub mod graph;
pub mod pdg;
pub mod pipeline;
pub mod repo;
pub mod report;
pub mod scalar;
pub mod scoring;
pub mod syntax;

pub use config::Config;
pub use pipeline::{analyze_repository, analyze_repository_with, AnalysisRun, AnalyzeOptions, PipelineError};
pub use report::{aggregate_by_developer, detect_inflated, emit_report, spearman, DeveloperReport, ReportFormat};
pub use scalar::Scalar;

pub type DeltaWeights32 = diff::DeltaWeights<f32>;
pub type DeltaWeights64 = diff::DeltaWeights<f64>;
pub type ImpactRange32 = pdg::ImpactRange<f32>;
pub type ImpactRange64 = pdg::ImpactRange<f64>;
pub type ImpactScores32 = graph::ImpactScores<f32>;
pub type ImpactScores64 = graph::ImpactScores<f64>;
pub type RankParams32 = graph::RankParams<f32>;
pub type RankParams64 = graph::RankParams<f64>;
pub type BoxCoxParams32 = scoring::BoxCoxParams<f32>;
pub type BoxCoxParams64 = scoring::BoxCoxParams<f64>;
pub type FunctionScore32 = scoring::FunctionScore<f32>;
pub type FunctionScore64 = scoring::FunctionScore<f64>;
pub type CommitScore32 = scoring::CommitScore<f32>;
pub type CommitScore64 = scoring::CommitScore<f64>;
