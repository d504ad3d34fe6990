use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ResolvedTolerances};
use crate::comparison::{
    EqToZero, GraphComparison, IdentityCheck, ProbEstimate, TreeComparison, Window,
};
use crate::error::{Result, Stage};
use crate::extremes::{IntervalTest, KsResult, LaplaceResult, TestFunction, VertexSetKind};
use crate::graphgen::GraphRegularityReport;
use crate::green::{GreenSummary, GreenVsTree};

/// One pass/fail line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `"<="` or `">="` or `"in"` (then `threshold` is the lower end and `upper` is set).
    pub relation: String,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            relation: "<=".into(),
            upper: None,
            passed: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            relation: ">=".into(),
            upper: None,
            passed: value >= threshold,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: lo,
            relation: "in".into(),
            upper: Some(hi),
            passed: lo <= value && value <= hi,
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool) -> Self {
        let v = if passed { 1.0 } else { 0.0 };
        Self {
            name: name.into(),
            value: v,
            threshold: 1.0,
            relation: ">=".into(),
            upper: None,
            passed,
        }
    }
}

/// A configured stage that did not run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skip {
    pub stage: Stage,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationKind {
    Unit,
    SigmaR,
    ExactVariance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEntry {
    pub function: TestFunction,
    pub result: LaplaceResult,
    pub gap: f64,
}

/// Statistics of one extremal-process variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremesSection {
    pub label: String,
    pub vertex_set: VertexSetKind,
    pub normalization: NormalizationKind,
    pub set_size: usize,
    pub replicas: usize,
    pub max_mean: f64,
    pub max_std: f64,
    pub ks: Option<KsResult>,
    pub intervals: Vec<IntervalTest>,
    pub laplace: Vec<LaplaceEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusSummary {
    pub ell: u32,
    pub good_count: usize,
    pub bad_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSection {
    pub n: usize,
    pub degree: usize,
    pub seed: u64,
    pub attempts: u32,
    pub regularity: GraphRegularityReport,
    pub green: GreenSummary,
    pub census: CensusSummary,
    pub green_vs_tree: Option<GreenVsTree>,
    pub comparison: GraphComparison,
    /// The comparison sum restricted to good vertices, when there are any.
    pub comparison_good: Option<GraphComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCell {
    pub rho: f64,
    pub u: f64,
    pub window: Window,
    pub bound: f64,
    pub quadrature: ProbEstimate,
    pub monte_carlo: ProbEstimate,
    /// `(bound - p) / σ` for the quadrature and Monte Carlo estimates.
    pub quadrature_margin_sigmas: f64,
    pub mc_margin_sigmas: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityEntry {
    pub dim: usize,
    pub instance: usize,
    pub functional: String,
    pub check: IdentityCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub degree: usize,
    pub n: usize,
    pub comparison: TreeComparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSummary {
    pub degree: usize,
    pub strictly_decreasing: bool,
    /// Least-squares slope of `ln(sum)` against `ln N`.
    pub log_log_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSection {
    pub bound_grid: Vec<BoundCell>,
    pub identity: Vec<IdentityEntry>,
    pub eq_tozero: EqToZero,
    /// Tree bound chain at `N = eq_n` for the same window.
    pub eq_tree_bound: f64,
    pub ladder: Vec<LadderRow>,
    pub ladder_summary: Vec<LadderSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub master_seed: u64,
    pub graph_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub seconds: f64,
}

/// Self-contained result of a run; everything except `timings` is a
/// deterministic function of `config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub tolerances: ResolvedTolerances,
    pub seeds: Seeds,
    pub graph: Option<GraphSection>,
    pub extremes: Vec<ExtremesSection>,
    pub comparison: Option<ComparisonSection>,
    pub checks: Vec<Check>,
    pub skips: Vec<Skip>,
    pub passed: bool,
    pub timings: Vec<StageTiming>,
}

impl RunReport {
    pub(crate) fn new(config: &ExperimentConfig) -> Self {
        Self {
            config: config.clone(),
            tolerances: config.resolved_tolerances(),
            seeds: Seeds {
                master_seed: config.master_seed,
                graph_seed: None,
            },
            graph: None,
            extremes: Vec::new(),
            comparison: None,
            checks: Vec::new(),
            skips: Vec::new(),
            passed: true,
            timings: Vec::new(),
        }
    }

    pub(crate) fn finish(mut self) -> Self {
        self.passed = self.checks.iter().all(|c| c.passed);
        self
    }

    /// JSON of every field except `timings`.
    pub fn statistics_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.timings.clear();
        Ok(serde_json::to_string_pretty(&copy)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}
