//! Draws a random 3-regular graph and prints its structural report.
//!
//! `cargo run --release --example regular_graph -- [N] [r] [seed]`

use gff_extremes::graphgen::{
    generate_simple, structural_report, RegularityParams, DEFAULT_MAX_ATTEMPTS,
};

fn main() -> gff_extremes::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|s| s.parse().ok()).unwrap_or(500);
    let r = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(7);

    let g = generate_simple(n, r, seed, DEFAULT_MAX_ATTEMPTS)?;
    println!(
        "N = {}, r = {}, accepted after {} attempt(s)",
        g.n(),
        g.degree(),
        g.attempts()
    );

    let rep = structural_report(&g, &RegularityParams::default(), None, seed)?;
    println!("spectral gap        {:.4}", rep.spectral_gap);
    println!("diameter            {:?}", rep.diameter);
    println!(
        "cycles per ball     <= {} (radius {})",
        rep.max_cycles_in_ball, rep.ball_radius
    );
    println!("min expansion ratio {:.4}", rep.min_expansion_ratio);
    println!("checks              {:?}", rep.checks_passed);
    Ok(())
}
