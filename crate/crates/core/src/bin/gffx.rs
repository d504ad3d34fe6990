//! Command-line front end. Exit codes: 0 pass, 1 statistical failure, 2 error.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gff_extremes::experiment::{
    build_graph, run_comparison_suite, run_extremes_on_samples, run_pipeline, write_ladder_csv,
    ExperimentConfig, GraphSource, Mode, RunReport,
};
use gff_extremes::extremes::write_replica_csv;
use gff_extremes::gff::{
    build_subtree, factor_green, read_samples_csv, sample_graph_gff_batch, sample_iid_batch,
    sample_tree_gff_batch, write_samples_binary, write_samples_csv,
};
use gff_extremes::graphgen::{structural_report, vertex_census, write_edge_list, RegularGraph};
use gff_extremes::green::zero_average_green;
use gff_extremes::rng;
use gff_extremes::{Error, Result};

#[derive(Parser)]
#[command(
    name = "gffx",
    version,
    about = "Extremes of Gaussian free fields on regular trees and graphs"
)]
struct Cli {
    /// TOML configuration (JSON when the extension is .json).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "gffx-out")]
    out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write manifest.json with versions, seeds and tolerances.
    #[arg(long, global = true)]
    manifest: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct Overrides {
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Edge-list file used as the graph.
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Tree,
    Graph,
    Iid,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a simple random regular graph and write its edge list.
    GenGraph(Overrides),
    /// Build the zero-average Green operator of a graph.
    Green(Overrides),
    /// Classify vertices as good or bad.
    Census {
        #[command(flatten)]
        o: Overrides,
        #[arg(long)]
        ell: Option<u32>,
    },
    /// Draw field samples.
    Sample {
        #[command(flatten)]
        o: Overrides,
        /// Also write the binary GAGF sample file.
        #[arg(long)]
        binary: bool,
    },
    /// Extremal statistics of a sample CSV written by `sample`.
    Extremes {
        #[command(flatten)]
        o: Overrides,
        #[arg(long)]
        samples: PathBuf,
    },
    /// Comparison suite: bound grid, interpolation identity, decay ladders.
    Compare,
    /// Full pipeline for the configured mode.
    Pipeline(Overrides),
}

fn load_config(cli: &Cli, o: Option<&Overrides>) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(o) = o {
        if let Some(m) = o.mode {
            cfg.mode = match m {
                ModeArg::Tree => Mode::Tree,
                ModeArg::Graph => Mode::Graph,
                ModeArg::Iid => Mode::Iid,
            };
        }
        cfg.n = o.n.unwrap_or(cfg.n);
        cfg.r = o.r.unwrap_or(cfg.r);
        cfg.replicas = o.replicas.unwrap_or(cfg.replicas);
        if let Some(g) = &o.graph {
            cfg.graph = GraphSource::EdgeList { path: g.clone() };
        }
    }
    Ok(cfg)
}

fn out_file(cli: &Cli, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(&cli.out_dir)?;
    Ok(BufWriter::new(File::create(cli.out_dir.join(name))?))
}

fn write_json(cli: &Cli, name: &str, value: &impl serde::Serialize) -> Result<()> {
    let mut w = out_file(cli, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn manifest(cli: &Cli, cfg: &ExperimentConfig) -> Result<()> {
    let m = json!({
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "tolerances": cfg.resolved_tolerances(),
        "seeds": {
            "master_seed": cfg.master_seed,
            "graph_seed": rng::stream_seed(cfg.master_seed, rng::DOMAIN_GRAPH_SEED, 0),
            "derivation": "stream(m, d, i) = mix(mix(m ^ mix(d)) ^ mix(i)), mix = splitmix64",
        },
        "domains": {
            "graph_attempt": rng::DOMAIN_GRAPH_ATTEMPT,
            "replica": rng::DOMAIN_REPLICA,
            "probe": rng::DOMAIN_PROBE,
            "monte_carlo": rng::DOMAIN_MONTE_CARLO,
            "graph_seed": rng::DOMAIN_GRAPH_SEED,
        },
    });
    write_json(cli, "manifest.json", &m)
}

fn graph_for(cfg: &ExperimentConfig) -> Result<RegularGraph> {
    let mut c = cfg.clone();
    c.mode = Mode::Graph;
    build_graph(&c)
}

fn finish_report(cli: &Cli, report: &RunReport, name: &str) -> Result<bool> {
    write_json(cli, name, report)?;
    for c in report.failed_checks() {
        eprintln!("FAIL {}: {} (threshold {})", c.name, c.value, c.threshold);
    }
    for s in &report.skips {
        eprintln!("skip [{}] {}", s.stage, s.reason);
    }
    println!(
        "{}: {} checks, {} failed",
        name,
        report.checks.len(),
        report.failed_checks().count()
    );
    Ok(report.passed)
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::GenGraph(o) => {
            let cfg = load_config(cli, Some(o))?;
            if cli.manifest {
                manifest(cli, &cfg)?;
            }
            let g = graph_for(&cfg)?;
            write_edge_list(&g, out_file(cli, "graph.edges")?)?;
            let rep = structural_report(
                &g,
                &cfg.regularity_params(),
                None,
                rng::stream_seed(cfg.master_seed, rng::DOMAIN_PROBE, 0),
            )?;
            write_json(
                cli,
                "graph.json",
                &json!({ "n": g.n(), "degree": g.degree(), "seed": g.seed(), "attempts": g.attempts(), "structure": rep }),
            )?;
            println!(
                "graph: N={} r={} seed={} attempts={}",
                g.n(),
                g.degree(),
                g.seed(),
                g.attempts()
            );
            Ok(true)
        }
        Command::Green(o) => {
            let cfg = load_config(cli, Some(o))?;
            if cli.manifest {
                manifest(cli, &cfg)?;
            }
            let g = graph_for(&cfg)?;
            let green = zero_average_green(&g)?;
            green.write_binary(out_file(cli, "green.gagf")?)?;
            let summary = green.summary(g.n() <= 4096)?;
            write_json(cli, "green.json", &summary)?;
            println!("green: N={} method={:?}", g.n(), summary.build_method);
            Ok(true)
        }
        Command::Census { o, ell } => {
            let cfg = load_config(cli, Some(o))?;
            if cli.manifest {
                manifest(cli, &cfg)?;
            }
            let g = graph_for(&cfg)?;
            let ell = ell.unwrap_or_else(|| cfg.census_radius());
            let census = vertex_census(&g, ell);
            match cli.format {
                Format::Json => write_json(cli, "census.json", &census)?,
                Format::Csv => {
                    let mut w = out_file(cli, "census.csv")?;
                    writeln!(w, "vertex,good")?;
                    for (x, ok) in census.good_flags.iter().enumerate() {
                        writeln!(w, "{x},{}", u8::from(*ok))?;
                    }
                }
            }
            println!(
                "census: ell={ell} good={} bad={}",
                census.good_count(),
                census.bad_count
            );
            Ok(true)
        }
        Command::Sample { o, binary } => {
            let cfg = load_config(cli, Some(o))?;
            cfg.validate()?;
            if cli.manifest {
                manifest(cli, &cfg)?;
            }
            let samples = match cfg.mode {
                Mode::Tree => sample_tree_gff_batch(
                    &build_subtree(cfg.r, cfg.n)?,
                    cfg.master_seed,
                    0,
                    cfg.replicas,
                ),
                Mode::Iid => sample_iid_batch(cfg.n, cfg.master_seed, 0, cfg.replicas),
                Mode::Graph => {
                    let g = graph_for(&cfg)?;
                    let f = factor_green(&zero_average_green(&g)?)?;
                    sample_graph_gff_batch(&f, cfg.master_seed, 0, cfg.replicas)
                }
            };
            match cli.format {
                Format::Csv => write_samples_csv(out_file(cli, "samples.csv")?, &samples)?,
                Format::Json => write_json(cli, "samples.json", &samples)?,
            }
            if *binary {
                write_samples_binary(out_file(cli, "samples.gagf")?, &samples)?;
            }
            println!("sample: {} replicas of N={}", samples.len(), samples[0].n());
            Ok(true)
        }
        Command::Extremes { o, samples } => {
            let cfg = load_config(cli, Some(o))?;
            if cli.manifest {
                manifest(cli, &cfg)?;
            }
            let rows = read_samples_csv(BufReader::new(File::open(samples)?))?;
            let (report, processes) = run_extremes_on_samples(&cfg, &rows)?;
            write_replica_csv(out_file(cli, "replicas.csv")?, &processes, &cfg.intervals)?;
            finish_report(cli, &report, "extremes.json")
        }
        Command::Compare => {
            let cfg = load_config(cli, None)?;
            if cli.manifest {
                manifest(cli, &cfg)?;
            }
            let report = run_comparison_suite(&cfg)?;
            if let Some(section) = &report.comparison {
                write_ladder_csv(out_file(cli, "ladder.csv")?, section)?;
            }
            finish_report(cli, &report, "comparison.json")
        }
        Command::Pipeline(o) => {
            let cfg = load_config(cli, Some(o))?;
            if cli.manifest {
                manifest(cli, &cfg)?;
            }
            let (report, processes) = run_pipeline(&cfg)?;
            write_replica_csv(out_file(cli, "replicas.csv")?, &processes, &cfg.intervals)?;
            finish_report(cli, &report, "report.json")
        }
    }
}

fn describe(e: &Error) -> String {
    match e.stage() {
        Some(s) => format!("error at stage {s}: {}", e.root()),
        None => format!("error: {e}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", describe(&e));
            ExitCode::from(2)
        }
    }
}
