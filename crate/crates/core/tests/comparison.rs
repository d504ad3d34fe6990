use faer::Mat;
use gff_extremes::comparison::{
    bivariate_bound, bivariate_prob, bivariate_prob_conditional, comparison_sum_graph,
    comparison_sum_tree, eq_tozero_sum, h_function, interpolation_identity_check, k_star,
    pair_profile_graph, pair_profile_tree, Bilinear, ExpNegSum, ExpectationMethod, Functional,
    InterpolationFamily, LogisticProduct, ProbMethod, Window, DEFAULT_H_NODES, PAIR_SUM_CAP,
};
use gff_extremes::experiment::{random_correlation, tree_correlation};
use gff_extremes::extremes::rescaling_constants;
use gff_extremes::gff::build_subtree;
use gff_extremes::graphgen::{all_pairs_distances, complete_graph, generate_simple};
use gff_extremes::green::zero_average_green;
use gff_extremes::rng::from_seed;
use gff_extremes::special::normal_interval;
use gff_extremes::Error;
use proptest::prelude::*;

const QUAD: ProbMethod = ProbMethod::Quadrature { nodes: 40 };

fn windows() -> [Window; 2] {
    [
        Window::new(0.0, 1.0).unwrap(),
        Window::new(-0.5, 0.5).unwrap(),
    ]
}

fn fd_hessian(f: &dyn Functional, x: &[f64]) -> Vec<f64> {
    let n = f.dim();
    let h = 1e-4;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let at = |di: f64, dj: f64| {
                let mut y = x.to_vec();
                y[i] += di;
                y[j] += dj;
                f.value(&y)
            };
            out[i * n + j] = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
        }
    }
    out
}

#[test]
fn h_function_examples() {
    let a = 3.0;
    assert!((h_function(0.0, a).unwrap() - (-9f64).exp()).abs() < 1e-18);
    let hs: Vec<f64> = (1..10)
        .map(|k| h_function(k as f64 / 10.0, a).unwrap())
        .collect();
    assert!(hs.windows(2).all(|w| w[0] < w[1]));
    assert!((h_function(0.6, 0.0).unwrap() - 1.25).abs() < 1e-15);
    assert!(h_function(1.0, a).is_err());
    assert!(h_function(-0.1, a).is_err());
}

#[test]
fn bivariate_bound_example() {
    let s = Window::new(0.0, 1.0).unwrap();
    let b = bivariate_bound(0.0, 2.0, s).unwrap();
    assert!((b - (-4f64).exp() / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
    let p = bivariate_prob(0.0, 2.0, s, QUAD).unwrap().value;
    let exact = normal_interval(2.0, 3.0).powi(2);
    assert!((p - exact).abs() < 1e-12);
    assert!((exact - 4.58e-4).abs() < 1e-6);
    assert!(p <= b);
    let tiny = Window::new(0.0, 1e-6).unwrap();
    assert!(bivariate_bound(0.5, 1.0, tiny).unwrap() < 1e-12);
}

#[test]
fn bivariate_mc_below_bound_at_high_correlation() {
    let s = Window::new(0.0, 1.0).unwrap();
    let mc = bivariate_prob(
        0.9,
        3.0,
        s,
        ProbMethod::MonteCarlo {
            draws: 10_000_000,
            seed: 3,
        },
    )
    .unwrap();
    assert!(mc.value + 3.0 * mc.error <= bivariate_bound(0.9, 3.0, s).unwrap());
}

#[test]
fn quadrature_agrees_with_conditional_oracle_and_mc() {
    for rho in [0.0, 0.3, 0.7, 0.9] {
        for u in [1.0, 2.0, 3.0] {
            for s in windows() {
                let q = bivariate_prob(rho, u, s, QUAD).unwrap();
                let c = bivariate_prob_conditional(rho, u, s).unwrap();
                assert!(
                    (q.value - c).abs() < 1e-9 * c.max(1e-6),
                    "ρ={rho} u={u} {s:?}: {} vs {c}",
                    q.value
                );
            }
        }
    }
    for rho in [0.0, 0.3, 0.7] {
        for u in [1.0, 2.0, 3.0] {
            for s in windows() {
                let q = bivariate_prob(rho, u, s, QUAD).unwrap();
                let m = bivariate_prob(
                    rho,
                    u,
                    s,
                    ProbMethod::MonteCarlo {
                        draws: 1_000_000,
                        seed: 9,
                    },
                )
                .unwrap();
                let sigma = (q.error.powi(2) + m.error.powi(2)).sqrt();
                assert!(
                    (q.value - m.value).abs() <= 3.0 * sigma,
                    "ρ={rho} u={u} {s:?}"
                );
            }
        }
    }
}

#[test]
fn coarse_quadrature_is_flagged() {
    let s = Window::new(0.0, 1.0).unwrap();
    assert!(
        bivariate_prob(0.3, 1.0, s, ProbMethod::Quadrature { nodes: 4 })
            .unwrap()
            .flagged
    );
    assert!(!bivariate_prob(0.3, 1.0, s, QUAD).unwrap().flagged);
}

#[test]
fn identity_constant_family_has_no_gap() {
    let mut rng = from_seed(4);
    let s = random_correlation(3, &mut rng);
    let fam = InterpolationFamily::new(s.clone(), s).unwrap();
    let f = LogisticProduct {
        centers: vec![0.3, -0.2, 0.1],
        widths: vec![0.7, 1.0, 0.8],
    };
    let chk = interpolation_identity_check(
        &fam,
        &f,
        DEFAULT_H_NODES,
        ExpectationMethod::GaussHermite { order: 32 },
    )
    .unwrap();
    assert!(chk.gap < 1e-14 && chk.rhs == 0.0);
}

#[test]
fn identity_bilinear_is_exact() {
    let mut rng = from_seed(8);
    let fam = InterpolationFamily::new(
        random_correlation(2, &mut rng),
        random_correlation(2, &mut rng),
    )
    .unwrap();
    let chk = interpolation_identity_check(
        &fam,
        &Bilinear { n: 2, i: 0, j: 1 },
        DEFAULT_H_NODES,
        ExpectationMethod::GaussHermite { order: 64 },
    )
    .unwrap();
    let want = fam.sigma1()[(0, 1)] - fam.sigma0()[(0, 1)];
    assert!((chk.lhs - want).abs() < 1e-12);
    assert!(chk.gap <= 1e-10);
}

#[test]
fn identity_holds_for_smooth_functionals_in_three_dimensions() {
    let mut rng = from_seed(15);
    for _ in 0..5 {
        let fam = InterpolationFamily::new(
            random_correlation(3, &mut rng),
            random_correlation(3, &mut rng),
        )
        .unwrap();
        let fs: Vec<Box<dyn Functional>> = vec![
            Box::new(LogisticProduct {
                centers: vec![0.3, -0.2, 0.1],
                widths: vec![0.7, 1.0, 0.8],
            }),
            Box::new(ExpNegSum {
                weights: vec![0.5, 0.8, 0.3],
            }),
        ];
        for f in &fs {
            let chk = interpolation_identity_check(
                &fam,
                f.as_ref(),
                DEFAULT_H_NODES,
                ExpectationMethod::GaussHermite { order: 64 },
            )
            .unwrap();
            assert!(chk.gap <= 1e-3, "{chk:?}");
        }
    }
}

#[test]
fn family_rejects_bad_ends() {
    let a = Mat::<f64>::identity(2, 2);
    let b = Mat::<f64>::identity(3, 3);
    assert!(InterpolationFamily::new(a.clone(), b).is_err());
    let indefinite = Mat::from_fn(2, 2, |i, j| if i == j { 1.0 } else { 2.0 });
    assert!(InterpolationFamily::new(a.clone(), indefinite).is_err());
    let f = Bilinear { n: 3, i: 0, j: 1 };
    let fam = InterpolationFamily::new(a.clone(), a).unwrap();
    assert!(interpolation_identity_check(
        &fam,
        &f,
        21,
        ExpectationMethod::GaussHermite { order: 8 }
    )
    .is_err());
}

#[test]
fn star_profile() {
    let prof = pair_profile_tree(&build_subtree(3, 4).unwrap());
    assert_eq!(prof.counts, vec![0, 3, 3]);
    assert_eq!(prof.total_pairs(), 6);
}

#[test]
fn sphere_constant_is_one_on_prefix_subtrees() {
    for n in [10, 100, 1000, 4000, 10_000] {
        let prof = pair_profile_tree(&build_subtree(3, n).unwrap());
        assert!(
            prof.sphere_constant <= 1.0,
            "N={n}: C={}",
            prof.sphere_constant
        );
        assert_eq!(prof.total_pairs(), (n * (n - 1) / 2) as u64);
    }
}

#[test]
fn tree_exponent_and_decay() {
    let sums: Vec<f64> = [10, 12, 14, 16]
        .iter()
        .map(|&e| {
            let n = 1usize << e;
            let cmp = comparison_sum_tree(
                &pair_profile_tree(&build_subtree(3, n).unwrap()),
                &rescaling_constants(n, 3).unwrap(),
            );
            assert!((cmp.exponent + 1.0 / 3.0).abs() < 1e-15);
            assert!(cmp.exact_sum <= cmp.h_rho1_bound);
            cmp.exact_sum
        })
        .collect();
    assert!(sums.windows(2).all(|w| w[1] < w[0]), "{sums:?}");
}

#[test]
fn k_star_examples() {
    assert_eq!(k_star(1000, 3, 0.2, 0.1), 3);
    assert_eq!(k_star(2000, 3, 0.2, 0.1), 4);
}

#[test]
fn graph_sum_matches_brute_force() {
    let g = generate_simple(120, 3, 6, 1000).unwrap();
    let green = zero_average_green(&g).unwrap();
    let dist = all_pairs_distances(&g);
    let c = rescaling_constants(120, 3).unwrap();
    let out = comparison_sum_graph(&g, &green, &dist, &c, 0.2, 0.1, None).unwrap();
    let (mut near, mut far, mut abs_total, mut clamped) = (0.0, 0.0, 0.0, 0u64);
    for x in 0..120 {
        for y in x + 1..120 {
            let rho = green.get(x, y) / (green.get(x, x) * green.get(y, y)).sqrt();
            let term = if rho <= 0.0 {
                0.0
            } else {
                rho * h_function(rho, c.a_n).unwrap()
            };
            clamped += u64::from(rho < 0.0);
            abs_total += rho.abs() * h_function(rho.abs(), c.a_n).unwrap();
            if dist.get(x, y) <= out.k_star {
                near += term;
            } else {
                far += term;
            }
        }
    }
    assert!((out.eps_near - near).abs() < 1e-12 * near.max(1e-300));
    assert!((out.eps_far - far).abs() < 1e-12 * far.max(1e-300));
    assert!((out.total - out.eps_near - out.eps_far).abs() <= 1e-14 * out.total);
    assert!((out.abs_total - abs_total).abs() < 1e-12 * abs_total);
    assert_eq!(out.clamped_pairs, clamped);
    assert_eq!(out.n_pairs, 120 * 119 / 2);

    let mask: Vec<bool> = (0..120).map(|x| x % 3 != 0).collect();
    let masked = comparison_sum_graph(&g, &green, &dist, &c, 0.2, 0.1, Some(&mask)).unwrap();
    assert_eq!(masked.n_pairs, 80 * 79 / 2);
    assert!(masked.total <= out.total);
}

#[test]
fn k4_correlations_are_clamped() {
    let k4 = complete_graph(4).unwrap();
    let green = zero_average_green(&k4).unwrap();
    let out = comparison_sum_graph(
        &k4,
        &green,
        &all_pairs_distances(&k4),
        &rescaling_constants(4, 3).unwrap(),
        0.2,
        0.1,
        None,
    )
    .unwrap();
    assert_eq!(out.total, 0.0);
    assert_eq!(out.clamped_pairs, 6);
    assert!(out.abs_total > 0.0);
}

#[test]
fn graph_profile_matches_distances() {
    let g = generate_simple(80, 3, 2, 1000).unwrap();
    let green = zero_average_green(&g).unwrap();
    let dist = all_pairs_distances(&g);
    let prof = pair_profile_graph(&g, &green, &dist).unwrap();
    for k in 1..prof.counts.len() {
        let mut count = 0u64;
        let mut best = f64::NEG_INFINITY;
        for x in 0..80 {
            for y in x + 1..80 {
                if dist.get(x, y) as usize == k {
                    count += 1;
                    best = best.max(green.get(x, y) / (green.get(x, x) * green.get(y, y)).sqrt());
                }
            }
        }
        assert_eq!(prof.counts[k], count);
        assert!((prof.rhos[k] - best).abs() < 1e-15);
    }
    assert_eq!(prof.total_pairs(), 80 * 79 / 2);
}

#[test]
fn hypothesis_sum() {
    let c = rescaling_constants(32, 3).unwrap();
    let s = Window::new(0.0, 1.0).unwrap();
    let id = Mat::<f64>::identity(32, 32);
    let same = InterpolationFamily::new(id.clone(), id.clone()).unwrap();
    assert_eq!(
        eq_tozero_sum(&same, &c, s, DEFAULT_H_NODES, QUAD)
            .unwrap()
            .value,
        0.0
    );

    let fam = InterpolationFamily::new(id, tree_correlation(3, 32).unwrap()).unwrap();
    let eq = eq_tozero_sum(&fam, &c, s, DEFAULT_H_NODES, QUAD).unwrap();
    assert!(eq.dominated);
    assert!(eq.value <= eq.lemma_bound);
    let tree = comparison_sum_tree(&pair_profile_tree(&build_subtree(3, 32).unwrap()), &c);
    assert!(
        eq.value <= tree.t_n_bound(s.len()),
        "{} vs {}",
        eq.value,
        tree.t_n_bound(s.len())
    );

    let big = Mat::<f64>::identity(PAIR_SUM_CAP + 1, PAIR_SUM_CAP + 1);
    let fam = InterpolationFamily::new(big.clone(), big).unwrap();
    assert!(matches!(
        eq_tozero_sum(&fam, &c, s, 5, QUAD),
        Err(Error::SizeLimit { .. })
    ));
}

proptest! {
    #[test]
    fn h_is_strictly_increasing(a in 0.1f64..5.0, r1 in 0.0f64..0.99, r2 in 0.0f64..0.99) {
        prop_assume!((r1 - r2).abs() > 1e-9);
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(h_function(lo, a).unwrap() < h_function(hi, a).unwrap());
    }

    #[test]
    fn bound_dominates_probability(rho in 0.0f64..0.95, u in 0.5f64..4.0, lo in -1.0f64..1.0, len in 0.05f64..1.5) {
        let s = Window::new(lo, lo + len).unwrap();
        let p = bivariate_prob(rho, u, s, QUAD).unwrap();
        prop_assert!(p.value <= bivariate_bound(rho, u, s).unwrap());
    }

    #[test]
    fn probability_is_symmetric_in_sign_of_window(rho in 0.0f64..0.9, u in 0.0f64..3.0) {
        // (X, Y) and (Y, X) have the same law, so the rectangle is symmetric;
        // reflecting both coordinates maps u + S to -(u + S).
        let s = Window::new(0.2, 0.9).unwrap();
        let p = bivariate_prob_conditional(rho, u, s).unwrap();
        let q = bivariate_prob_conditional(rho, -u, Window::new(-0.9, -0.2).unwrap()).unwrap();
        prop_assert!((p - q).abs() < 1e-14);
    }

    #[test]
    fn scaling_equivalence(e in -3i32..4, lo in -4i32..4, width in 1i32..4, u in -4i32..6) {
        // Dyadic scales keep every operation exact.
        let b = 2f64.powi(e);
        let s = Window::new(lo as f64 / 2.0, (lo + width) as f64 / 2.0).unwrap();
        let u = u as f64 / 2.0;
        prop_assert_eq!(s.scaled(b).len(), b * s.len());
        prop_assert_eq!(s.scaled(b).dist_from_neg(u), b * s.dist_from_neg(u / b));
        let x = 1.25;
        let a = 0.5;
        prop_assert_eq!((x - a) / b > s.lo && (x - a) / b < s.hi, x > s.scaled(b).shifted(a).lo && x < s.scaled(b).shifted(a).hi);
    }

    #[test]
    fn hessians_match_finite_differences(x in prop::collection::vec(-2.0f64..2.0, 3)) {
        let fs: Vec<Box<dyn Functional>> = vec![
            Box::new(LogisticProduct { centers: vec![0.3, -0.2, 0.1], widths: vec![0.7, 1.0, 0.8] }),
            Box::new(ExpNegSum { weights: vec![0.5, 0.8, 0.3] }),
            Box::new(Bilinear { n: 3, i: 0, j: 2 }),
        ];
        for f in &fs {
            let mut h = vec![0.0; 9];
            f.hessian(&x, &mut h);
            let fd = fd_hessian(f.as_ref(), &x);
            for k in 0..9 {
                prop_assert!((h[k] - fd[k]).abs() < 1e-5, "{} vs {}", h[k], fd[k]);
            }
        }
    }

    #[test]
    fn tree_profile_matches_brute_force(r in 3usize..6, n in 2usize..150) {
        let t = build_subtree(r, n).unwrap();
        let prof = pair_profile_tree(&t);
        let mut counts = vec![0u64; prof.counts.len()];
        for x in 0..n {
            for y in x + 1..n {
                counts[t.distance(x, y) as usize] += 1;
            }
        }
        prop_assert_eq!(&prof.counts, &counts);
        for k in 0..prof.rhos.len() {
            prop_assert!((prof.rhos[k] - (r as f64 - 1.0).powi(-(k as i32))).abs() < 1e-15);
        }
        prop_assert!(prof.rhos.windows(2).all(|w| w[1] <= w[0]));
    }
}
