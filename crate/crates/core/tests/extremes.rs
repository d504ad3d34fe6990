use gff_extremes::extremes::{
    extract_values, gumbel_cdf, gumbel_quantile, kolmogorov_sf, ks_gumbel, ks_statistic,
    laplace_functional, laplace_target, poisson_chi_square, poisson_pmf, ppp_interval_test,
    process_from_points, rescaling_constants, sample_ppp, smooth_step, ExtremalProcess, Interval,
    Normalization, TestFunction, VertexSetKind,
};
use gff_extremes::gff::sample_iid_batch;
use gff_extremes::rng::{from_seed, stream, DOMAIN_MONTE_CARLO};
use gff_extremes::Error;
use proptest::prelude::*;
use rand::Rng;

fn ppp_replicas(count: usize, seed: u64) -> Vec<ExtremalProcess> {
    (0..count)
        .map(|i| {
            let mut rng = stream(seed, DOMAIN_MONTE_CARLO, i as u64);
            process_from_points(sample_ppp(&mut rng, -5.0), -5.0, i as u64)
        })
        .collect()
}

/// Midpoint-rule oracle for `exp(-∫(1 - e^{-φ}) e^{-x} dx)` on `[-40, 40]`.
fn laplace_oracle(phi: &TestFunction) -> f64 {
    let (lo, hi, m) = (-40.0, 40.0, 800_000);
    let h = (hi - lo) / m as f64;
    let integral: f64 = (0..m)
        .map(|i| {
            let x = lo + (i as f64 + 0.5) * h;
            (1.0 - (-phi.eval(x)).exp()) * (-x).exp()
        })
        .sum::<f64>()
        * h;
    (-integral).exp()
}

#[test]
fn rescaling_constants_for_1024() {
    let c = rescaling_constants(1024, 3).unwrap();
    assert!((c.a_n - 3.1234129637256856).abs() < 1e-12);
    assert!((c.b_n - 0.320162595088667).abs() < 1e-12);
    assert!((c.sigma_r - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(c.a_n * c.b_n, 1.0);
    assert!(rescaling_constants(2, 3).is_err());
    assert!(rescaling_constants(100, 2).is_err());
}

#[test]
fn iid_tail_mass_approaches_exponential() {
    // Relative errors N·Φ̄(a + t b)/e^{-t} - 1 at N = 2^10, 2^14, 2^18,
    // evaluated independently with double-precision erfc.
    let oracle = [
        (-1.0f64, [-0.0471, -0.0455, -0.0431]),
        (0.0, [-0.0847, -0.0722, -0.0637]),
        (1.0, [-0.2010, -0.1539, -0.1265]),
        (2.0, [-0.3667, -0.2763, -0.2232]),
    ];
    for (t, want) in oracle {
        let errs: Vec<f64> = [10, 14, 18]
            .iter()
            .map(|&e| rescaling_constants(1 << e, 3).unwrap().iid_tail_mass(t) / (-t).exp() - 1.0)
            .collect();
        for (g, w) in errs.iter().zip(want) {
            assert!((g - w).abs() < 1e-4, "t = {t}: {errs:?}");
        }
        assert!(errs[0].abs() > errs[1].abs() && errs[1].abs() > errs[2].abs());
        // The approach is logarithmic: 10% is reached at 2^18 only for t ≤ 0.
        if t <= 0.0 {
            assert!(errs[2].abs() <= 0.10);
        }
    }
}

#[test]
fn gumbel_and_kolmogorov_values() {
    assert!((gumbel_cdf(0.0) - (-1f64).exp()).abs() < 1e-15);
    assert!((gumbel_quantile(0.5) + 2f64.ln().ln()).abs() < 1e-14);
    assert_eq!(gumbel_cdf(f64::INFINITY), 1.0);
    assert_eq!(gumbel_cdf(f64::NEG_INFINITY), 0.0);
    assert!((kolmogorov_sf(1.0) - 0.26999967167735456).abs() < 1e-14);
    assert!((kolmogorov_sf(0.5) - 0.9639452436648751).abs() < 1e-14);
    assert!((kolmogorov_sf(1.36) - 0.049485876755377876).abs() < 1e-14);
    assert!((kolmogorov_sf(2.0) - 0.0006709252557796953).abs() < 1e-15);
}

#[test]
fn ks_detects_uniform_samples() {
    let mut rng = from_seed(1);
    let u: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
    let ks = ks_gumbel(&u).unwrap();
    assert!(ks.statistic >= 0.2, "{ks:?}");
    assert!(matches!(
        ks_gumbel(&u[..99]),
        Err(Error::TooFewSamples { .. })
    ));
}

#[test]
fn ks_accepts_exact_gumbel_draws() {
    let runs = 60;
    let mut small = 0;
    for run in 0..runs {
        let mut rng = stream(42, DOMAIN_MONTE_CARLO, run);
        let m: Vec<f64> = (0..300)
            .map(|_| gumbel_quantile(rng.random::<f64>()))
            .collect();
        if ks_gumbel(&m).unwrap().p_value < 0.05 {
            small += 1;
        }
    }
    // Under the null about 3 of 60 p-values fall below 0.05.
    assert!(small <= 9, "{small} of {runs}");
}

#[test]
fn iid_maxima_are_close_to_gumbel() {
    let c = rescaling_constants(1 << 12, 3).unwrap();
    let maxima: Vec<f64> = sample_iid_batch(1 << 12, 3, 0, 500)
        .iter()
        .map(|s| {
            extract_values(
                &s.values,
                s.stream_id,
                &c,
                Normalization::Unit,
                None,
                Some(-5.0),
            )
            .unwrap()
            .max_point
        })
        .collect();
    let ks = ks_gumbel(&maxima).unwrap();
    assert!(ks.p_value > 0.001, "{ks:?}");
}

#[test]
fn interval_targets() {
    assert_eq!(Interval::upper(0.0).ppp_mean(), 1.0);
    assert!((Interval::bounded(-1.0, 0.0).ppp_mean() - (std::f64::consts::E - 1.0)).abs() < 1e-15);
    assert!(Interval::new(1.0, Some(0.0)).is_err());
}

#[test]
fn synthetic_ppp_passes_count_tests() {
    let runs = 40;
    let mut all_pass = 0;
    for run in 0..runs {
        let reps = ppp_replicas(500, 1000 + run);
        let tests = ppp_interval_test(&reps, &Interval::defaults()).unwrap();
        if tests.iter().all(|t| t.p_value > 0.01) {
            all_pass += 1;
        }
    }
    assert!(all_pass >= 34, "{all_pass} of {runs}");
    assert!(ppp_interval_test(&[], &Interval::defaults()).is_err());
}

#[test]
fn synthetic_ppp_laplace_and_maxima() {
    let reps = ppp_replicas(4000, 5);
    for phi in TestFunction::canonical() {
        let l = laplace_functional(&reps, &phi).unwrap();
        assert!((l.empirical - l.target).abs() < 4.0 * l.std_error, "{l:?}");
    }
    let maxima: Vec<f64> = reps.iter().map(|p| p.max_point).collect();
    assert!(ks_gumbel(&maxima).unwrap().p_value > 0.001);
}

#[test]
fn poisson_chi_square_behaviour() {
    let total: f64 = (0..60).map(|k| poisson_pmf(k, 3.0)).sum();
    assert!((total - 1.0).abs() < 1e-14);
    let (_, _, p) = poisson_chi_square(&vec![7; 300], 1.0);
    assert!(p < 1e-10);
}

#[test]
fn laplace_targets_match_oracle() {
    assert_eq!(laplace_target(&TestFunction::zero()).unwrap(), 1.0);
    for phi in TestFunction::canonical() {
        let t = laplace_target(&phi).unwrap();
        assert!((t - laplace_oracle(&phi)).abs() < 1e-8, "{phi:?}");
    }
    let phi = TestFunction {
        ramps: vec![
            TestFunction::canonical()[0].ramps[0],
            TestFunction::canonical()[2].ramps[0],
        ],
    };
    assert!((laplace_target(&phi).unwrap() - laplace_oracle(&phi)).abs() < 1e-8);
}

#[test]
fn steep_ramp_recovers_void_probability() {
    // As the height grows, e^{-⟨P,φ⟩} tends to the indicator of no point in
    // (0, ∞), whose mean is exp(-1).
    let void = (-1f64).exp();
    let targets: Vec<f64> = [1.0, 10.0, 1e3, 1e6, 1e12]
        .iter()
        .map(|&c| laplace_target(&TestFunction::ramp(0.0, 1.0, c).unwrap()).unwrap())
        .collect();
    assert!(targets.windows(2).all(|w| w[0] > w[1]));
    assert!(targets.iter().all(|&t| t > void));
    assert!(targets[4] - void < 0.02, "{targets:?}");
    assert!(TestFunction::ramp(1.0, 0.0, 1.0).is_err());
    assert!(TestFunction::ramp(0.0, 1.0, -1.0).is_err());
}

#[test]
fn constant_field_at_threshold() {
    let c = rescaling_constants(500, 3).unwrap();
    let values = vec![c.sigma_r * c.a_n; 500];
    let p = extract_values(&values, 0, &c, Normalization::SigmaR, None, None).unwrap();
    assert!(p.points.iter().all(|x| x.abs() < 1e-12));
    assert!(p.max_point.abs() < 1e-12);
    assert_eq!(p.points.len(), 500);
}

#[test]
fn mask_restricts_vertex_set() {
    let c = rescaling_constants(6, 3).unwrap();
    let values = [0.1, 5.0, -1.0, 2.0, 0.3, 1.0];
    let mask = [true, false, true, true, false, true];
    let p = extract_values(&values, 0, &c, Normalization::Unit, Some(&mask), None).unwrap();
    assert_eq!(p.vertex_set_kind, VertexSetKind::GoodOnly);
    assert_eq!(p.set_size, 4);
    assert_eq!(p.argmax, 3);
    assert!(extract_values(&values, 0, &c, Normalization::Unit, Some(&mask[..3]), None).is_err());
}

#[test]
fn smooth_step_values() {
    assert_eq!(smooth_step(0.0), 0.0);
    assert_eq!(smooth_step(1.0), 1.0);
    assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    assert_eq!(smooth_step(-3.0), 0.0);
    assert_eq!(smooth_step(7.0), 1.0);
}

proptest! {
    #[test]
    fn gumbel_quantile_inverts_cdf(u in 1e-9f64..(1.0 - 1e-9)) {
        prop_assert!((gumbel_cdf(gumbel_quantile(u)) - u).abs() < 1e-12);
    }

    #[test]
    fn smooth_step_is_symmetric_and_monotone(u in 0.0f64..1.0, v in 0.0f64..1.0) {
        prop_assert!((smooth_step(u) + smooth_step(1.0 - u) - 1.0).abs() < 1e-14);
        if u <= v {
            prop_assert!(smooth_step(u) <= smooth_step(v));
        }
    }

    #[test]
    fn ks_statistic_matches_brute_force(xs in prop::collection::vec(-4.0f64..6.0, 1..60)) {
        let d = ks_statistic(&xs, gumbel_cdf);
        let mut s = xs.clone();
        s.sort_by(f64::total_cmp);
        let n = s.len() as f64;
        let brute = s
            .iter()
            .map(|&x| {
                let f = gumbel_cdf(x);
                let below = s.iter().filter(|&&y| y < x).count() as f64 / n;
                let upto = s.iter().filter(|&&y| y <= x).count() as f64 / n;
                (f - below).abs().max((upto - f).abs())
            })
            .fold(0.0, f64::max);
        prop_assert!((d - brute).abs() < 1e-12);
    }

    #[test]
    fn shift_equivariance(seed in any::<u64>(), shift in -3.0f64..3.0) {
        let c = rescaling_constants(200, 3).unwrap();
        let values = sample_iid_batch(200, seed, 0, 1).remove(0).values;
        let shifted: Vec<f64> = values.iter().map(|v| v + shift * c.b_n).collect();
        let p = extract_values(&values, 0, &c, Normalization::Unit, None, None).unwrap();
        let q = extract_values(&shifted, 0, &c, Normalization::Unit, None, None).unwrap();
        prop_assert!((q.max_point - p.max_point - shift).abs() < 1e-11);
        for (a, b) in p.points.iter().zip(&q.points) {
            prop_assert!((b - a - shift).abs() < 1e-11);
        }
    }

    #[test]
    fn permutation_invariance(seed in any::<u64>(), rot in 1usize..100) {
        let c = rescaling_constants(100, 3).unwrap();
        let values = sample_iid_batch(100, seed, 0, 1).remove(0).values;
        let mut rotated = values.clone();
        rotated.rotate_left(rot);
        let p = extract_values(&values, 0, &c, Normalization::Unit, None, Some(-5.0)).unwrap();
        let q = extract_values(&rotated, 0, &c, Normalization::Unit, None, Some(-5.0)).unwrap();
        prop_assert_eq!(p.points, q.points);
        prop_assert_eq!((p.argmax + 100 - rot) % 100, q.argmax);
    }

    #[test]
    fn normalized_vs_unnormalized(seed in any::<u64>(), eps in prop::collection::vec(-0.05f64..0.05, 80)) {
        let c = rescaling_constants(80, 3).unwrap();
        let s2 = c.sigma_r * c.sigma_r;
        let vars: Vec<f64> = eps.iter().map(|e| s2 * (1.0 + e)).collect();
        let values: Vec<f64> = sample_iid_batch(80, seed, 0, 1).remove(0).values.iter().map(|v| v * c.sigma_r).collect();
        let p = extract_values(&values, 0, &c, Normalization::SigmaR, None, None).unwrap();
        let q = extract_values(&values, 0, &c, Normalization::ExactVariance(&vars), None, None).unwrap();
        // Vertex by vertex: p̂ - p = (σ_r/√v - 1)(p b + a)/b.
        let raw = |x: usize, norm| extract_values(&values[x..=x], 0, &c, norm, None, None).unwrap().max_point;
        let mut worst = 0.0f64;
        for x in 0..80 {
            let e = c.sigma_r / vars[x].sqrt() - 1.0;
            worst = worst.max(e.abs());
            let px = raw(x, Normalization::SigmaR);
            let qx = raw(x, Normalization::ExactVariance(&vars[x..=x]));
            prop_assert!((qx - px - e * (px * c.b_n + c.a_n) / c.b_n).abs() < 1e-9);
        }
        let m = p.max_point.abs().max(q.max_point.abs()).max(values.iter().map(|v| (v / c.sigma_r - c.a_n).abs() / c.b_n).fold(0.0, f64::max));
        prop_assert!((q.max_point - p.max_point).abs() <= worst * (m * c.b_n + c.a_n) / c.b_n + 1e-9);
        // Equal variances give identical processes.
        let same = vec![s2; 80];
        let r = extract_values(&values, 0, &c, Normalization::ExactVariance(&same), None, None).unwrap();
        prop_assert_eq!(r.argmax, p.argmax);
        for (a, b) in r.points.iter().zip(&p.points) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
