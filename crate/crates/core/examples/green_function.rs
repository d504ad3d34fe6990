//! Green function of a random regular graph against the tree Green function.
//!
//! `cargo run --release --example green_function`

use gff_extremes::graphgen::{all_pairs_distances, generate_simple, vertex_census};
use gff_extremes::green::{
    fit_k3, green_upper_bound, green_vs_tree, tree_green, zero_average_green,
    zero_average_green_eigen, GreenVsTree, HeatKernel,
};

fn main() -> gff_extremes::Result<()> {
    let (n, r) = (400, 3);
    let g = generate_simple(n, r, 11, 1000)?;
    let green = zero_average_green(&g)?;
    let eigen = zero_average_green_eigen(&g)?;
    println!(
        "shift-invert vs eigendecomposition: {:.2e}",
        green.max_abs_diff(&eigen)
    );

    let inv = green.check_invariants()?;
    println!(
        "row sums {:.1e}, asymmetry {:.1e}, spectrum [{:.3e}, {:.3}]",
        inv.max_row_sum, inv.max_asymmetry, inv.min_eigenvalue, inv.max_eigenvalue
    );

    println!("\n d   tree g(d)");
    for d in 0..6 {
        println!("{d:2}   {:.5}", tree_green(r, d)?);
    }

    let census = vertex_census(&g, 3);
    match green_vs_tree(&g, &green, &census, 1)? {
        GreenVsTree::Measured {
            max_error,
            n_good,
            fitted_exponent,
            ..
        } => {
            println!("\n{n_good} good vertices, max |G - g| = {max_error:.4}, fitted decay exponent {fitted_exponent:.3}")
        }
        GreenVsTree::NoGoodVertices => println!("\nno good vertices"),
    }

    let dist = all_pairs_distances(&g);
    let k3 = fit_k3(&g, &green, &dist, 3.0);
    let bound = green_upper_bound(&g, &green, &dist, 3.0, k3)?;
    println!("fitted k3 = {k3:.3}, bound holds: {}", bound.holds);

    let hk = HeatKernel::new(&g, 2.0)?;
    let dev = hk.deviation(0);
    println!(
        "heat kernel at t = 2: deviation {:.4} <= bound {:.4}: {}",
        dev.deviation, dev.bound, dev.holds
    );
    Ok(())
}
