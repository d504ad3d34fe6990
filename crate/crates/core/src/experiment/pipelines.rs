use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, GraphSource, Mode};
use super::report::{
    CensusSummary, Check, ExtremesSection, GraphSection, LaplaceEntry, NormalizationKind,
    RunReport, Skip, StageTiming,
};
use crate::comparison::comparison_sum_graph;
use crate::error::{Error, Result, Stage};
use crate::extremes::{
    extract_process, ks_gumbel, laplace_functional, ppp_interval_test, rescaling_constants,
    ExtremalProcess, Normalization, RescalingConstants, VertexSetKind, KS_MIN_SAMPLES,
};
use crate::gff::{
    build_subtree, factor_green, sample_graph_gff, sample_iid_field, sample_tree_gff,
};
use crate::graphgen::{
    all_pairs_distances, complete_graph, disjoint_union, generate_simple, petersen, read_edge_list,
    structural_report, vertex_census, RegularGraph,
};
use crate::green::{green_vs_tree, zero_average_green, GreenVsTree, DENSE_GREEN_CAP};
use crate::rng::{stream_seed, DOMAIN_GRAPH_SEED, DOMAIN_PROBE};

fn timed<T>(report: &mut RunReport, stage: Stage, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f().map_err(|e| e.at(stage));
    report.timings.push(StageTiming {
        stage,
        seconds: start.elapsed().as_secs_f64(),
    });
    out
}

fn require_mode(cfg: &ExperimentConfig, mode: Mode) -> Result<()> {
    if cfg.mode != mode {
        return Err(Error::InvalidConfig(format!(
            "expected mode {mode:?}, config has {:?}",
            cfg.mode
        ))
        .at(Stage::Config));
    }
    cfg.validate().map_err(|e| e.at(Stage::Config))
}

/// Statistics of one process variant; adds checks when `primary`.
fn analyze(
    label: &str,
    vertex_set: VertexSetKind,
    normalization: NormalizationKind,
    processes: &[ExtremalProcess],
    cfg: &ExperimentConfig,
    primary: bool,
    report: &mut RunReport,
) -> Result<ExtremesSection> {
    let tol = report.tolerances.clone();
    let maxima: Vec<f64> = processes.iter().map(|p| p.max_point).collect();
    let r = maxima.len() as f64;
    let max_mean = maxima.iter().sum::<f64>() / r;
    let max_std =
        (maxima.iter().map(|m| (m - max_mean).powi(2)).sum::<f64>() / (r - 1.0).max(1.0)).sqrt();
    let ks = if maxima.len() >= KS_MIN_SAMPLES {
        Some(ks_gumbel(&maxima)?)
    } else {
        report.skips.push(Skip {
            stage: Stage::Extremes,
            reason: format!(
                "{label}: KS test needs at least {KS_MIN_SAMPLES} replicas, have {}",
                maxima.len()
            ),
        });
        None
    };
    let intervals = ppp_interval_test(processes, &cfg.intervals)?;
    let mut laplace = Vec::new();
    for f in &cfg.test_functions {
        let result = laplace_functional(processes, f)?;
        laplace.push(LaplaceEntry {
            function: f.clone(),
            gap: (result.empirical - result.target).abs(),
            result,
        });
    }
    if primary {
        if let Some(k) = &ks {
            report.checks.push(Check::at_most(
                format!("{label}: KS distance"),
                k.statistic,
                tol.ks_max,
            ));
            report.checks.push(Check::at_least(
                format!("{label}: KS p-value"),
                k.p_value,
                tol.p_min,
            ));
        }
        let bands = ppp_interval_test(
            processes,
            &tol.count_bands
                .iter()
                .map(|b| b.interval)
                .collect::<Vec<_>>(),
        )?;
        for (band, t) in tol.count_bands.iter().zip(&bands) {
            report.checks.push(Check::within(
                format!("{label}: mean count in {}", band.interval),
                t.mean_count,
                band.min,
                band.max,
            ));
        }
        if let Some(g) = tol.laplace_gap {
            for (i, e) in laplace.iter().enumerate() {
                report.checks.push(Check::at_most(
                    format!("{label}: Laplace gap, test function {i}"),
                    e.gap,
                    g,
                ));
            }
        }
    }
    Ok(ExtremesSection {
        label: label.to_owned(),
        vertex_set,
        normalization,
        set_size: processes.first().map_or(0, |p| p.set_size),
        replicas: processes.len(),
        max_mean,
        max_std,
        ks,
        intervals,
        laplace,
    })
}

/// Field pipeline on the BFS-prefix subtree of the regular tree.
pub fn run_tree_pipeline(cfg: &ExperimentConfig) -> Result<RunReport> {
    Ok(run_tree_pipeline_detailed(cfg)?.0)
}

/// As [`run_tree_pipeline`], also returning the per-replica processes.
pub fn run_tree_pipeline_detailed(
    cfg: &ExperimentConfig,
) -> Result<(RunReport, Vec<ExtremalProcess>)> {
    require_mode(cfg, Mode::Tree)?;
    let mut report = RunReport::new(cfg);
    let tree = timed(&mut report, Stage::Config, || build_subtree(cfg.r, cfg.n))?;
    let c = timed(&mut report, Stage::Config, || {
        rescaling_constants(cfg.n, cfg.r)
    })?;
    let processes = timed(&mut report, Stage::Sample, || {
        (0..cfg.replicas as u64)
            .into_par_iter()
            .map(|i| {
                let s = sample_tree_gff(&tree, cfg.master_seed, i);
                extract_process(&s, &c, Normalization::SigmaR, None, Some(cfg.floor))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let section = timed(&mut report, Stage::Extremes, || {
        let mut tmp = RunReport::new(cfg);
        let s = analyze(
            "tree",
            VertexSetKind::All,
            NormalizationKind::SigmaR,
            &processes,
            cfg,
            true,
            &mut tmp,
        )?;
        Ok((s, tmp))
    })?;
    merge(&mut report, section);
    Ok((report.finish(), processes))
}

fn merge(report: &mut RunReport, (section, tmp): (ExtremesSection, RunReport)) {
    report.extremes.push(section);
    report.checks.extend(tmp.checks);
    report.skips.extend(tmp.skips);
}

/// Independent standard normals: the classical extreme-value baseline.
pub fn run_iid_pipeline(cfg: &ExperimentConfig) -> Result<RunReport> {
    Ok(run_iid_pipeline_detailed(cfg)?.0)
}

pub fn run_iid_pipeline_detailed(
    cfg: &ExperimentConfig,
) -> Result<(RunReport, Vec<ExtremalProcess>)> {
    require_mode(cfg, Mode::Iid)?;
    let mut report = RunReport::new(cfg);
    let c = timed(&mut report, Stage::Config, || {
        rescaling_constants(cfg.n, cfg.r)
    })?;
    let processes = timed(&mut report, Stage::Sample, || {
        (0..cfg.replicas as u64)
            .into_par_iter()
            .map(|i| {
                let s = sample_iid_field(cfg.n, cfg.master_seed, i);
                extract_process(&s, &c, Normalization::Unit, None, Some(cfg.floor))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let section = timed(&mut report, Stage::Extremes, || {
        let mut tmp = RunReport::new(cfg);
        let s = analyze(
            "iid",
            VertexSetKind::All,
            NormalizationKind::Unit,
            &processes,
            cfg,
            true,
            &mut tmp,
        )?;
        Ok((s, tmp))
    })?;
    merge(&mut report, section);
    Ok((report.finish(), processes))
}

/// Builds the graph named by the configuration.
pub fn build_graph(cfg: &ExperimentConfig) -> Result<RegularGraph> {
    match &cfg.graph {
        GraphSource::Random => {
            let seed = stream_seed(cfg.master_seed, DOMAIN_GRAPH_SEED, 0);
            generate_simple(cfg.n, cfg.r, seed, cfg.max_attempts)
        }
        GraphSource::Complete => complete_graph(cfg.n),
        GraphSource::Petersen => Ok(petersen()),
        GraphSource::TwoComplete => {
            let k = complete_graph(cfg.n / 2)?;
            disjoint_union(&k, &k)
        }
        GraphSource::EdgeList { path } => {
            let f = std::fs::File::open(path)?;
            read_edge_list(std::io::BufReader::new(f))
        }
    }
}

/// Zero-average field on a regular graph, with structural and comparison diagnostics.
pub fn run_graph_pipeline(cfg: &ExperimentConfig) -> Result<RunReport> {
    Ok(run_graph_pipeline_detailed(cfg)?.0)
}

/// As [`run_graph_pipeline`], also returning the processes of the primary
/// variant: good vertices with exact-variance normalization when any vertex
/// is good, all vertices otherwise.
pub fn run_graph_pipeline_detailed(
    cfg: &ExperimentConfig,
) -> Result<(RunReport, Vec<ExtremalProcess>)> {
    require_mode(cfg, Mode::Graph)?;
    let mut report = RunReport::new(cfg);
    let g = timed(&mut report, Stage::GenerateGraph, || build_graph(cfg))?;
    if matches!(cfg.graph, GraphSource::Random) {
        report.seeds.graph_seed = Some(g.seed());
    }
    let n = g.n();
    let green = timed(&mut report, Stage::Green, || {
        if n > DENSE_GREEN_CAP {
            return Err(Error::SizeLimit {
                n,
                cap: DENSE_GREEN_CAP,
            });
        }
        zero_average_green(&g)
    })?;
    let params = cfg.regularity_params();
    let probe_seed = stream_seed(cfg.master_seed, DOMAIN_PROBE, 0);
    let (regularity, dist) = timed(&mut report, Stage::StructuralReport, || {
        Ok((
            structural_report(&g, &params, Some(&green), probe_seed)?,
            all_pairs_distances(&g),
        ))
    })?;
    let ell = cfg.census_radius();
    let census = timed(&mut report, Stage::Census, || Ok(vertex_census(&g, ell)))?;
    let green_summary = timed(&mut report, Stage::Green, || green.summary(false))?;

    let gvt = if census.good_count() == 0 {
        report.skips.push(Skip {
            stage: Stage::GreenVsTree,
            reason: "no good vertices".into(),
        });
        Some(GreenVsTree::NoGoodVertices)
    } else if ell < cfg.ell0 + 1 {
        report.skips.push(Skip {
            stage: Stage::GreenVsTree,
            reason: format!("census radius {ell} is below ell0 + 1 = {}", cfg.ell0 + 1),
        });
        None
    } else {
        Some(timed(&mut report, Stage::GreenVsTree, || {
            green_vs_tree(&g, &green, &census, cfg.ell0)
        })?)
    };

    let c: RescalingConstants = timed(&mut report, Stage::Extremes, || {
        rescaling_constants(n, g.degree())
    })?;
    let factor = timed(&mut report, Stage::Factor, || factor_green(&green))?;
    let variances = green.diagonal();
    let mask = &census.good_flags;
    let has_good = census.good_count() > 0;
    let floor = Some(cfg.floor);
    type Variants = (Option<ExtremalProcess>, ExtremalProcess, ExtremalProcess);
    let variants: Vec<Variants> = timed(&mut report, Stage::Sample, || {
        (0..cfg.replicas as u64)
            .into_par_iter()
            .map(|i| {
                let s = sample_graph_gff(&factor, cfg.master_seed, i);
                let good = if has_good {
                    Some(extract_process(
                        &s,
                        &c,
                        Normalization::ExactVariance(&variances),
                        Some(mask),
                        floor,
                    )?)
                } else {
                    None
                };
                let all = extract_process(
                    &s,
                    &c,
                    Normalization::ExactVariance(&variances),
                    None,
                    floor,
                )?;
                let sigma = extract_process(&s, &c, Normalization::SigmaR, None, floor)?;
                Ok((good, all, sigma))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut good = Vec::with_capacity(variants.len());
    let mut all = Vec::with_capacity(variants.len());
    let mut sigma = Vec::with_capacity(variants.len());
    for (gp, ap, sp) in variants {
        if let Some(p) = gp {
            good.push(p);
        }
        all.push(ap);
        sigma.push(sp);
    }
    if !has_good {
        report.skips.push(Skip {
            stage: Stage::Extremes,
            reason: "no good vertices: good-only process replaced by the all-vertex process".into(),
        });
    }
    let sections = timed(&mut report, Stage::Extremes, || {
        let mut tmp = RunReport::new(cfg);
        let mut out = Vec::new();
        if has_good {
            out.push(analyze(
                "graph good/exact-variance",
                VertexSetKind::GoodOnly,
                NormalizationKind::ExactVariance,
                &good,
                cfg,
                true,
                &mut tmp,
            )?);
        }
        out.push(analyze(
            "graph all/exact-variance",
            VertexSetKind::All,
            NormalizationKind::ExactVariance,
            &all,
            cfg,
            !has_good,
            &mut tmp,
        )?);
        out.push(analyze(
            "graph all/sigma-r",
            VertexSetKind::All,
            NormalizationKind::SigmaR,
            &sigma,
            cfg,
            false,
            &mut tmp,
        )?);
        Ok((out, tmp))
    })?;
    report.extremes.extend(sections.0);
    report.checks.extend(sections.1.checks);
    report.skips.extend(sections.1.skips);

    let (comparison, comparison_good) = timed(&mut report, Stage::Comparison, || {
        let full = comparison_sum_graph(&g, &green, &dist, &c, cfg.k3, cfg.delta, None)?;
        let good_only = if has_good {
            Some(comparison_sum_graph(
                &g,
                &green,
                &dist,
                &c,
                cfg.k3,
                cfg.delta,
                Some(mask),
            )?)
        } else {
            None
        };
        Ok((full, good_only))
    })?;

    report.graph = Some(GraphSection {
        n,
        degree: g.degree(),
        seed: g.seed(),
        attempts: g.attempts(),
        regularity,
        green: green_summary,
        census: CensusSummary {
            ell,
            good_count: census.good_count(),
            bad_count: census.bad_count,
        },
        green_vs_tree: gvt,
        comparison,
        comparison_good,
    });
    let primary = if has_good { good } else { all };
    Ok((report.finish(), primary))
}

/// Dispatches on `cfg.mode`.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<(RunReport, Vec<ExtremalProcess>)> {
    match cfg.mode {
        Mode::Tree => run_tree_pipeline_detailed(cfg),
        Mode::Graph => run_graph_pipeline_detailed(cfg),
        Mode::Iid => run_iid_pipeline_detailed(cfg),
    }
}

/// Extremal statistics of externally supplied samples `(stream_id, values)`.
///
/// Tree and graph samples are divided by `σ_r`, iid samples are used as is.
pub fn run_extremes_on_samples(
    cfg: &ExperimentConfig,
    samples: &[(u64, Vec<f64>)],
) -> Result<(RunReport, Vec<ExtremalProcess>)> {
    cfg.validate().map_err(|e| e.at(Stage::Config))?;
    let n = samples
        .first()
        .map(|s| s.1.len())
        .ok_or_else(|| Error::InvalidConfig("no samples".into()).at(Stage::Config))?;
    if samples.iter().any(|s| s.1.len() != n) {
        return Err(Error::Parse("samples have different lengths".into()).at(Stage::Config));
    }
    let mut report = RunReport::new(cfg);
    let c = timed(&mut report, Stage::Config, || rescaling_constants(n, cfg.r))?;
    let (norm, kind) = match cfg.mode {
        Mode::Iid => (Normalization::Unit, NormalizationKind::Unit),
        _ => (Normalization::SigmaR, NormalizationKind::SigmaR),
    };
    let processes = timed(&mut report, Stage::Extremes, || {
        samples
            .par_iter()
            .map(|(id, v)| crate::extremes::extract_values(v, *id, &c, norm, None, Some(cfg.floor)))
            .collect::<Result<Vec<_>>>()
    })?;
    let section = timed(&mut report, Stage::Extremes, || {
        let mut tmp = RunReport::new(cfg);
        let s = analyze(
            "samples",
            VertexSetKind::All,
            kind,
            &processes,
            cfg,
            true,
            &mut tmp,
        )?;
        Ok((s, tmp))
    })?;
    merge(&mut report, section);
    Ok((report.finish(), processes))
}
