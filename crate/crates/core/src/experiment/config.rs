use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::comparison::Window;
use crate::error::{Error, Result};
use crate::extremes::{Interval, TestFunction, DEFAULT_FLOOR};
use crate::graphgen::{RegularityParams, DEFAULT_MAX_ATTEMPTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Tree,
    Graph,
    Iid,
}

/// Where the graph of a graph-mode run comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphSource {
    /// Configuration model conditioned on simplicity, seeded from the master seed.
    #[default]
    Random,
    /// Complete graph on `n` vertices.
    Complete,
    Petersen,
    /// Two disjoint copies of the complete graph on `n/2` vertices.
    TwoComplete,
    /// Edge list in the `N r seed` header format.
    EdgeList {
        path: PathBuf,
    },
}

/// Structural check knobs other than the Green bound parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StructureParams {
    pub k1: f64,
    pub k2: f64,
    pub expansion_h0: f64,
    pub probe_sets: usize,
}

impl Default for StructureParams {
    fn default() -> Self {
        let d = RegularityParams::default();
        Self {
            k1: d.k1,
            k2: d.k2,
            expansion_h0: d.expansion_h0,
            probe_sets: d.probe_sets,
        }
    }
}

/// Accepted range for the mean count in one interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountBand {
    pub interval: Interval,
    pub min: f64,
    pub max: f64,
}

/// Pass/fail thresholds; unset entries fall back to per-mode defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest accepted KS distance: 0.05 for tree and iid, 0.08 for graph.
    pub ks_max: Option<f64>,
    /// Smallest accepted KS p-value: 0.001.
    pub p_min: Option<f64>,
    /// Largest accepted Laplace gap: 0.03 for tree, report-only otherwise.
    pub laplace_gap: Option<f64>,
    /// Mean-count bands: `(0,∞) ∈ [0.8, 1.2]`, `(-1,0] ∈ [1.4, 2.1]` for tree and iid, report-only for graph.
    pub count_bands: Option<Vec<CountBand>>,
}

/// Tolerances with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedTolerances {
    pub ks_max: f64,
    pub p_min: f64,
    pub laplace_gap: Option<f64>,
    pub count_bands: Vec<CountBand>,
}

impl Tolerances {
    pub fn resolve(&self, mode: Mode) -> ResolvedTolerances {
        let default_bands = vec![
            CountBand {
                interval: Interval::upper(0.0),
                min: 0.8,
                max: 1.2,
            },
            CountBand {
                interval: Interval::bounded(-1.0, 0.0),
                min: 1.4,
                max: 2.1,
            },
        ];
        ResolvedTolerances {
            ks_max: self
                .ks_max
                .unwrap_or(if mode == Mode::Graph { 0.08 } else { 0.05 }),
            p_min: self.p_min.unwrap_or(1e-3),
            laplace_gap: self.laplace_gap.or((mode == Mode::Tree).then_some(0.03)),
            count_bands: self.count_bands.clone().unwrap_or(if mode == Mode::Graph {
                Vec::new()
            } else {
                default_bands
            }),
        }
    }
}

/// Grids and budgets for the comparison suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonConfig {
    pub rho_grid: Vec<f64>,
    pub u_grid: Vec<f64>,
    pub windows: Vec<Window>,
    pub rect_nodes: usize,
    pub mc_draws: usize,
    pub identity_dims: Vec<usize>,
    pub identity_instances: usize,
    pub h_nodes: usize,
    pub identity_tol: f64,
    pub bilinear_tol: f64,
    pub eq_n: usize,
    pub eq_window: Window,
    pub ladder_exponents: Vec<u32>,
    pub ladder_degrees: Vec<usize>,
    pub slope_target_degree: usize,
    pub slope_tol: f64,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            rho_grid: vec![0.0, 0.3, 0.7, 0.9],
            u_grid: vec![1.0, 2.0, 3.0],
            windows: vec![Window { lo: 0.0, hi: 1.0 }, Window { lo: -0.5, hi: 0.5 }],
            rect_nodes: 40,
            mc_draws: 1_000_000,
            identity_dims: vec![2, 3],
            identity_instances: 10,
            h_nodes: 21,
            identity_tol: 1e-3,
            bilinear_tol: 1e-10,
            eq_n: 32,
            eq_window: Window { lo: 0.0, hi: 1.0 },
            ladder_exponents: vec![10, 12, 14, 16, 18],
            ladder_degrees: vec![3, 4, 5],
            slope_target_degree: 3,
            slope_tol: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub n: usize,
    pub r: usize,
    pub replicas: usize,
    pub master_seed: u64,
    /// Census radius; `⌊0.3 log₂ N⌋` when unset.
    pub ell: Option<u32>,
    /// Radius of the Green-vs-tree comparison.
    pub ell0: u32,
    pub k3: f64,
    pub delta: f64,
    pub big_k1: f64,
    pub structure: StructureParams,
    pub graph: GraphSource,
    pub max_attempts: u32,
    pub intervals: Vec<Interval>,
    pub test_functions: Vec<TestFunction>,
    /// Points below this rescaled level are not stored.
    pub floor: f64,
    pub tolerances: Tolerances,
    pub comparison: ComparisonConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub write_samples: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Tree,
            n: 1024,
            r: 3,
            replicas: 200,
            master_seed: 1,
            ell: None,
            ell0: 0,
            k3: 0.2,
            delta: 0.1,
            big_k1: 3.0,
            structure: StructureParams::default(),
            graph: GraphSource::Random,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            intervals: Interval::defaults(),
            test_functions: TestFunction::canonical(),
            floor: DEFAULT_FLOOR,
            tolerances: Tolerances::default(),
            comparison: ComparisonConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| invalid(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    /// `⌊0.3 log₂ N⌋`, at least 1, unless set explicitly.
    pub fn census_radius(&self) -> u32 {
        self.ell
            .unwrap_or_else(|| ((0.3 * (self.n as f64).log2()).floor() as u32).max(1))
    }

    pub fn regularity_params(&self) -> RegularityParams {
        RegularityParams {
            k1: self.structure.k1,
            k2: self.structure.k2,
            big_k1: self.big_k1,
            k3: self.k3,
            expansion_h0: self.structure.expansion_h0,
            probe_sets: self.structure.probe_sets,
        }
    }

    pub fn resolved_tolerances(&self) -> ResolvedTolerances {
        self.tolerances.resolve(self.mode)
    }

    /// Checks the fields used by the field pipelines.
    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(invalid("replicas must be at least 1"));
        }
        if self.r < 3 {
            return Err(invalid(format!(
                "degree r must be at least 3, got {}",
                self.r
            )));
        }
        if self.n < 3 {
            return Err(invalid(format!("N must be at least 3, got {}", self.n)));
        }
        if self.mode == Mode::Graph
            && matches!(self.graph, GraphSource::Random)
            && (self.n * self.r) % 2 == 1
        {
            return Err(invalid("N·r must be even for a random regular graph"));
        }
        if self.max_attempts == 0 {
            return Err(invalid("max_attempts must be positive"));
        }
        if !(self.k3 > 0.0 && self.delta > 0.0 && self.big_k1 > 0.0) {
            return Err(invalid("k3, delta and big_k1 must be positive"));
        }
        if !self.floor.is_finite() {
            return Err(invalid("floor must be finite"));
        }
        for iv in &self.intervals {
            iv.validate().map_err(|e| invalid(e.to_string()))?;
            if iv.lo < self.floor {
                return Err(invalid(format!(
                    "interval {iv} reaches below the floor {}",
                    self.floor
                )));
            }
        }
        for f in &self.test_functions {
            f.validate().map_err(|e| invalid(e.to_string()))?;
            if f.support().is_some_and(|(lo, _)| lo < self.floor) {
                return Err(invalid("test function support reaches below the floor"));
            }
        }
        for band in self.tolerances.count_bands.iter().flatten() {
            band.interval
                .validate()
                .map_err(|e| invalid(e.to_string()))?;
            if band.interval.lo < self.floor {
                return Err(invalid(format!(
                    "count band {} reaches below the floor",
                    band.interval
                )));
            }
        }
        Ok(())
    }

    /// Checks the comparison-suite grids.
    pub fn validate_comparison(&self) -> Result<()> {
        let c = &self.comparison;
        if c.rho_grid.is_empty() || c.u_grid.is_empty() || c.windows.is_empty() {
            return Err(invalid("comparison grid is empty"));
        }
        if c.rho_grid.iter().any(|r| !(0.0..1.0).contains(r)) {
            return Err(invalid("grid correlations must lie in [0, 1)"));
        }
        if c.u_grid.iter().any(|u| u.is_nan() || *u <= 0.0) {
            return Err(invalid("grid levels u must be positive"));
        }
        for w in c.windows.iter().chain(std::iter::once(&c.eq_window)) {
            Window::new(w.lo, w.hi).map_err(|e| invalid(e.to_string()))?;
        }
        if c.rect_nodes == 0 || c.mc_draws == 0 || c.h_nodes == 0 {
            return Err(invalid(
                "quadrature and Monte Carlo budgets must be positive",
            ));
        }
        if c.identity_dims.iter().any(|&d| d < 2) {
            return Err(invalid("identity dimensions must be at least 2"));
        }
        if c.eq_n < 3 || c.eq_n > crate::comparison::PAIR_SUM_CAP {
            return Err(invalid(format!(
                "eq_n must lie in 3..={}",
                crate::comparison::PAIR_SUM_CAP
            )));
        }
        if c.ladder_degrees.iter().any(|&r| r < 3)
            || c.ladder_exponents.iter().any(|&e| !(2..=26).contains(&e))
        {
            return Err(invalid(
                "ladder degrees must be ≥ 3 and exponents in 2..=26",
            ));
        }
        Ok(())
    }
}
