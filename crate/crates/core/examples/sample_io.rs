//! Field samples written to CSV and the binary format, then read back.
//!
//! `cargo run --release --example sample_io`

use std::io::Cursor;

use gff_extremes::gff::{
    build_subtree, read_samples_binary, read_samples_csv, sample_tree_gff_batch,
    write_samples_binary, write_samples_csv,
};

fn main() -> gff_extremes::Result<()> {
    let t = build_subtree(3, 46)?;
    println!(
        "subtree of N = {}, height {}, depth profile {:?}",
        t.n(),
        t.height(),
        t.depth_profile()
    );
    let samples = sample_tree_gff_batch(&t, 2024, 0, 3);

    let mut csv = Vec::new();
    write_samples_csv(&mut csv, &samples)?;
    let back = read_samples_csv(Cursor::new(&csv))?;
    println!(
        "CSV: {} bytes, {} rows, exact: {}",
        csv.len(),
        back.len(),
        back.iter().zip(&samples).all(|(a, b)| a.1 == b.values)
    );

    let mut bin = Vec::new();
    write_samples_binary(&mut bin, &samples)?;
    let back = read_samples_binary(Cursor::new(&bin))?;
    println!(
        "binary: {} bytes, exact: {}",
        bin.len(),
        back.iter().zip(&samples).all(|(a, b)| *a == b.values)
    );
    Ok(())
}
