//! Count of vertices whose neighbourhood is not a tree, over many graphs.
//!
//! `cargo run --release --example bad_vertices -- [N] [graphs]`

use gff_extremes::graphgen::{
    bad_tail_check, generate_simple, vertex_census, vertex_census_with, BallRule,
};

fn main() -> gff_extremes::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let graphs = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(200);

    let g = generate_simple(n, 3, 5, 1000)?;
    for ell in 1..=4 {
        let induced = vertex_census(&g, ell).bad_count;
        let open = vertex_census_with(&g, ell, BallRule::Open).bad_count;
        println!("ell = {ell}: {induced} bad (induced ball), {open} bad (open ball)");
    }

    let rep = bad_tail_check(n, 3, 2, &[1.0, 2.0, 4.0, 8.0], graphs, 99, None)?;
    println!(
        "\n{} graphs, mean bad count {:.2}, fitted K = {:.3}",
        rep.n_graphs, rep.mean_bad, rep.fitted_k
    );
    for p in &rep.points {
        println!(
            "z = {:3}: P(bad >= {:5.0}) = {:.4} [{:.4}, {:.4}], bound {:.4}",
            p.z, p.threshold, p.tail, p.ci.0, p.ci.1, p.bound
        );
    }
    Ok(())
}
