use std::io::Write;
use std::time::Instant;

use faer::Mat;
use rand::Rng;
use rand_distr::StandardNormal;

use super::config::ExperimentConfig;
use super::report::{
    BoundCell, Check, ComparisonSection, IdentityEntry, LadderRow, LadderSummary, RunReport, Skip,
    StageTiming,
};
use crate::comparison::{
    bivariate_bound, bivariate_prob, comparison_sum_tree, eq_tozero_sum,
    interpolation_identity_check, pair_profile_tree, Bilinear, ExpNegSum, ExpectationMethod,
    Functional, InterpolationFamily, LogisticProduct, ProbMethod,
};
use crate::error::{Error, Result, Stage};
use crate::extremes::rescaling_constants;
use crate::gff::build_subtree;
use crate::rng::{stream, stream_seed, DOMAIN_MONTE_CARLO};

/// Random correlation matrix `D^{-1/2} A Aᵀ D^{-1/2}` with `A` an `n × (n+1)` Gaussian matrix.
pub fn random_correlation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat<f64> {
    let a = Mat::from_fn(n, n + 1, |_, _| rng.sample::<f64, _>(StandardNormal));
    let s = &a * a.transpose();
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            s[(i, j)] / (s[(i, i)] * s[(j, j)]).sqrt()
        }
    })
}

/// Tree correlation matrix `(r-1)^{-d(x,y)}` on the BFS-prefix subtree of size `n`.
pub fn tree_correlation(degree: usize, n: usize) -> Result<Mat<f64>> {
    let t = build_subtree(degree, n)?;
    let ratio = 1.0 / (degree as f64 - 1.0);
    Ok(Mat::from_fn(n, n, |i, j| {
        ratio.powi(t.distance(i, j) as i32)
    }))
}

/// Test functionals for the interpolation identity in dimension `n`.
///
/// `x₁x₂`, a product of logistic ramps with centers `0.3, -0.2, 0.1, …` and
/// widths `0.7, 1.0, 0.8, …`, and `exp(-½ Σ w_k x_k²)` with weights `0.5, 0.8, 0.3, …`.
pub fn identity_functionals(n: usize) -> Vec<(String, Box<dyn Functional>)> {
    let cycle = |vals: &[f64]| (0..n).map(|k| vals[k % vals.len()]).collect::<Vec<_>>();
    vec![
        (
            "x1*x2".to_owned(),
            Box::new(Bilinear { n, i: 0, j: 1 }) as Box<dyn Functional>,
        ),
        (
            "logistic-product".to_owned(),
            Box::new(LogisticProduct {
                centers: cycle(&[0.3, -0.2, 0.1]),
                widths: cycle(&[0.7, 1.0, 0.8]),
            }),
        ),
        (
            "exp-neg-sum".to_owned(),
            Box::new(ExpNegSum {
                weights: cycle(&[0.5, 0.8, 0.3]),
            }),
        ),
    ]
}

fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        let dx = x.ln() - mx;
        (a + dx * (y.ln() - my), b + dx * dx)
    });
    num / den
}

/// Comparison checks: rectangle bound grid, interpolation identity, the
/// hypothesis sum on a small tree, and the decay ladders.
pub fn run_comparison_suite(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate_comparison().map_err(|e| e.at(Stage::Config))?;
    let cc = &cfg.comparison;
    let mut report = RunReport::new(cfg);
    let start = Instant::now();
    let section = build_section(cfg, &mut report).map_err(|e| e.at(Stage::Comparison))?;
    report.timings.push(StageTiming {
        stage: Stage::Comparison,
        seconds: start.elapsed().as_secs_f64(),
    });

    for cell in &section.bound_grid {
        let name = format!(
            "bound grid rho={} u={} S=({}, {})",
            cell.rho, cell.u, cell.window.lo, cell.window.hi
        );
        report.checks.push(Check::at_least(
            format!("{name}: quadrature margin in sigmas"),
            cell.quadrature_margin_sigmas,
            3.0,
        ));
        report.checks.push(Check::at_least(
            format!("{name}: Monte Carlo margin in sigmas"),
            cell.mc_margin_sigmas,
            3.0,
        ));
    }
    for e in &section.identity {
        let tol = if e.functional == "x1*x2" {
            cc.bilinear_tol
        } else {
            cc.identity_tol
        };
        report.checks.push(Check::at_most(
            format!(
                "identity n={} instance {} F={}: gap",
                e.dim, e.instance, e.functional
            ),
            e.check.gap,
            tol,
        ));
    }
    report.checks.push(Check::flag(
        "hypothesis sum dominated by its rectangle bounds",
        section.eq_tozero.dominated,
    ));
    if cc.eq_window.lo >= 0.0 {
        report.checks.push(Check::at_most(
            "hypothesis sum at most the tree bound chain",
            section.eq_tozero.value,
            section.eq_tree_bound,
        ));
    } else {
        report.skips.push(Skip {
            stage: Stage::Comparison,
            reason: "tree bound chain needs a window with inf S >= 0".into(),
        });
    }
    for s in &section.ladder_summary {
        report.checks.push(Check::flag(
            format!("ladder r={}: strictly decreasing", s.degree),
            s.strictly_decreasing,
        ));
        report.checks.push(Check::at_most(
            format!("ladder r={}: log-log slope", s.degree),
            s.log_log_slope,
            0.0,
        ));
        if s.degree == cc.slope_target_degree {
            let target = (2.0 - s.degree as f64) / s.degree as f64;
            report.checks.push(Check::within(
                format!("ladder r={}: slope near {target:.4}", s.degree),
                s.log_log_slope,
                target - cc.slope_tol,
                target + cc.slope_tol,
            ));
        }
    }
    report.comparison = Some(section);
    Ok(report.finish())
}

fn build_section(cfg: &ExperimentConfig, report: &mut RunReport) -> Result<ComparisonSection> {
    let cc = &cfg.comparison;
    let mut bound_grid = Vec::new();
    let mut cell_index = 0u64;
    for &rho in &cc.rho_grid {
        for &u in &cc.u_grid {
            for &window in &cc.windows {
                let bound = bivariate_bound(rho, u, window)?;
                let quadrature = bivariate_prob(
                    rho,
                    u,
                    window,
                    ProbMethod::Quadrature {
                        nodes: cc.rect_nodes,
                    },
                )?;
                let seed = stream_seed(cfg.master_seed, DOMAIN_MONTE_CARLO, cell_index);
                let monte_carlo = bivariate_prob(
                    rho,
                    u,
                    window,
                    ProbMethod::MonteCarlo {
                        draws: cc.mc_draws,
                        seed,
                    },
                )?;
                cell_index += 1;
                let margin = |p: &crate::comparison::ProbEstimate| {
                    (bound - p.value) / p.error.max(f64::MIN_POSITIVE)
                };
                bound_grid.push(BoundCell {
                    rho,
                    u,
                    window,
                    bound,
                    quadrature_margin_sigmas: margin(&quadrature),
                    mc_margin_sigmas: margin(&monte_carlo),
                    quadrature,
                    monte_carlo,
                });
            }
        }
    }

    let mut identity = Vec::new();
    for &dim in &cc.identity_dims {
        let method = ExpectationMethod::default_for(dim);
        let functionals = identity_functionals(dim);
        for instance in 0..cc.identity_instances {
            let mut rng = stream(
                cfg.master_seed,
                DOMAIN_MONTE_CARLO,
                (1 << 32) + ((dim as u64) << 16) + instance as u64,
            );
            let fam = InterpolationFamily::new(
                random_correlation(dim, &mut rng),
                random_correlation(dim, &mut rng),
            )?;
            for (name, f) in &functionals {
                let check = interpolation_identity_check(&fam, f.as_ref(), cc.h_nodes, method)?;
                identity.push(IdentityEntry {
                    dim,
                    instance,
                    functional: name.clone(),
                    check,
                });
            }
        }
    }

    let c = rescaling_constants(cc.eq_n, cfg.r)?;
    let fam = InterpolationFamily::new(
        Mat::identity(cc.eq_n, cc.eq_n),
        tree_correlation(cfg.r, cc.eq_n)?,
    )?;
    let eq_tozero = eq_tozero_sum(
        &fam,
        &c,
        cc.eq_window,
        cc.h_nodes,
        ProbMethod::Quadrature {
            nodes: cc.rect_nodes,
        },
    )?;
    let profile = pair_profile_tree(&build_subtree(cfg.r, cc.eq_n)?);
    let eq_tree_bound = comparison_sum_tree(&profile, &c).t_n_bound(cc.eq_window.len());

    let mut ladder = Vec::new();
    let mut ladder_summary = Vec::new();
    for &degree in &cc.ladder_degrees {
        let mut pts = Vec::new();
        for &e in &cc.ladder_exponents {
            let n = 1usize << e;
            let c = rescaling_constants(n, degree)?;
            let comparison =
                comparison_sum_tree(&pair_profile_tree(&build_subtree(degree, n)?), &c);
            pts.push((n as f64, comparison.exact_sum));
            ladder.push(LadderRow {
                degree,
                n,
                comparison,
            });
        }
        if pts.len() < 2 {
            report.skips.push(Skip {
                stage: Stage::Comparison,
                reason: format!("ladder r={degree} has fewer than 2 rungs"),
            });
            continue;
        }
        ladder_summary.push(LadderSummary {
            degree,
            strictly_decreasing: pts.windows(2).all(|w| w[1].1 < w[0].1),
            log_log_slope: log_log_slope(&pts),
        });
    }
    if cc.ladder_exponents.is_empty() || cc.ladder_degrees.is_empty() {
        return Err(Error::InvalidConfig("decay ladder is empty".into()));
    }
    Ok(ComparisonSection {
        bound_grid,
        identity,
        eq_tozero,
        eq_tree_bound,
        ladder,
        ladder_summary,
    })
}

/// Ladder CSV: `degree,N,sum,bound,slope` with the slope repeated per degree.
pub fn write_ladder_csv<W: Write>(mut w: W, section: &ComparisonSection) -> Result<()> {
    writeln!(w, "degree,N,sum,t_n_bound_unit,slope")?;
    for row in &section.ladder {
        let slope = section
            .ladder_summary
            .iter()
            .find(|s| s.degree == row.degree)
            .map_or(f64::NAN, |s| s.log_log_slope);
        writeln!(
            w,
            "{},{},{:e},{:e},{}",
            row.degree, row.n, row.comparison.exact_sum, row.comparison.t_n_bound_unit, slope
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0]
            .iter()
            .map(|&x| (x, 3.0 * x.powf(-0.5)))
            .collect();
        assert!((log_log_slope(&pts) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn random_correlation_is_valid() {
        let mut rng = crate::rng::from_seed(3);
        let m = random_correlation(3, &mut rng);
        for i in 0..3 {
            assert_eq!(m[(i, i)], 1.0);
            for j in 0..3 {
                assert!(m[(i, j)].abs() <= 1.0);
                assert_eq!(m[(i, j)], m[(j, i)]);
            }
        }
    }
}
