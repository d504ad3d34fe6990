//! Bivariate tail bound, interpolation identity and the tree comparison sum.
//!
//! `cargo run --release --example comparison_bounds`

use faer::Mat;
use gff_extremes::comparison::{
    bivariate_bound, bivariate_prob, comparison_sum_tree, interpolation_identity_check,
    pair_profile_tree, Bilinear, ExpectationMethod, InterpolationFamily, ProbMethod, Window,
    DEFAULT_H_NODES, DEFAULT_RECT_NODES,
};
use gff_extremes::extremes::rescaling_constants;
use gff_extremes::gff::build_subtree;

fn main() -> gff_extremes::Result<()> {
    let s = Window::new(0.0, 1.0)?;
    println!(" rho    u   P(both in u+S)   bound");
    for rho in [0.0, 0.3, 0.7, 0.9] {
        for u in [1.0, 2.0, 3.0] {
            let p = bivariate_prob(
                rho,
                u,
                s,
                ProbMethod::Quadrature {
                    nodes: DEFAULT_RECT_NODES,
                },
            )?;
            println!(
                "{rho:4.1} {u:4.1}   {:.4e}       {:.4e}",
                p.value,
                bivariate_bound(rho, u, s)?
            );
        }
    }

    let id = Mat::<f64>::identity(2, 2);
    let corr = Mat::from_fn(2, 2, |i, j| if i == j { 1.0 } else { 0.6 });
    let fam = InterpolationFamily::new(id, corr)?;
    let chk = interpolation_identity_check(
        &fam,
        &Bilinear { n: 2, i: 0, j: 1 },
        DEFAULT_H_NODES,
        ExpectationMethod::GaussHermite { order: 32 },
    )?;
    println!(
        "\nidentity for x1 x2: lhs {:.6}, rhs {:.6}, gap {:.1e}",
        chk.lhs, chk.rhs, chk.gap
    );

    println!("\n     N    exact sum   fitted C");
    for e in [10, 12, 14, 16] {
        let n = 1usize << e;
        let prof = pair_profile_tree(&build_subtree(3, n)?);
        let cmp = comparison_sum_tree(&prof, &rescaling_constants(n, 3)?);
        println!("{n:6}   {:.4e}   {:.4e}", cmp.exact_sum, cmp.fitted_c_tilde);
    }
    Ok(())
}
