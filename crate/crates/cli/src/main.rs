use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ign_core::dynamics::{Activation, StoppingCriteria};
use ign_core::format::{non_normalizable_nodes, read_graph};
use ign_core::harness::{self, ExperimentConfig, ExperimentKind, Pipeline};
use ign_core::Error;

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_FAILED: u8 = 3;

/// Iterative graph normalization experiments.
#[derive(Parser)]
#[command(name = "ign", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the iteration on one weighted graph file (wgraph text or JSON).
    Single {
        graph: PathBuf,
        #[command(flatten)]
        opts: Options,
    },
    /// Gap between the iteration and the greedy baseline on G(n, p).
    GapVsWg(Options),
    /// Gap and iteration counts of ICN pipelines against the Hungarian optimum.
    Assignment(Options),
    /// Random sweeps of the quadratic L1 inequality, L1 growth and convergence.
    Conjectures(Options),
    /// Fixed-cluster census over small connected graphs; `--n lo,hi`.
    Census(Options),
}

#[derive(Args)]
struct Options {
    /// Graph or matrix sizes, comma separated (a `lo,hi` range for conjectures and census).
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Edge probability.
    #[arg(long)]
    p: Option<f64>,
    /// Samples per cell.
    #[arg(long)]
    samples: Option<usize>,
    /// `power:a,t`, `sigmoid:a` or `identity`.
    #[arg(long)]
    activation: Option<String>,
    /// Softassign temperature for the sa-icn pipeline.
    #[arg(long)]
    tau: Option<f64>,
    /// `ign`, `sa-icn` or `icn`.
    #[arg(long)]
    pipeline: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for stats.csv, histogram.csv and failures/.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Json(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn build_config(kind: ExperimentKind, o: &Options) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::defaults(kind);
    if !o.n.is_empty() {
        cfg.n_values = o.n.clone();
    }
    if o.p.is_some() {
        cfg.p = o.p;
    }
    if o.samples.is_some() {
        cfg.samples = o.samples;
    }
    if let Some(a) = &o.activation {
        cfg.activation = a.parse::<Activation>()?;
    }
    if let Some(p) = &o.pipeline {
        cfg.pipeline = p.parse::<Pipeline>()?;
        if cfg.pipeline != Pipeline::SaThenIcn {
            cfg.tau = None;
        }
    }
    if o.tau.is_some() {
        cfg.tau = o.tau;
    }
    let d = cfg.stop;
    cfg.stop = StoppingCriteria::new(
        o.epsilon.unwrap_or(d.epsilon),
        o.alpha.unwrap_or(d.alpha),
        o.max_iters.unwrap_or(d.max_iters),
    )?;
    if let Some(seed) = o.seed {
        cfg.base_seed = seed;
    }
    cfg.out = o.out.clone();
    cfg.validate()?;
    Ok(cfg)
}

fn run(command: Command) -> Result<usize, Failure> {
    match command {
        Command::Single { graph, opts } => single(&graph, &opts),
        Command::GapVsWg(o) => {
            let cfg = build_config(ExperimentKind::GapVsWg, &o)?;
            let cells = harness::run_gap_experiment(&cfg)?;
            println!("n\tsamples\tfailed\taverage\tmedian\tnonneg\tnonmaximal");
            for c in &cells {
                let s = &c.stats;
                println!(
                    "{}\t{}\t{}\t{:.5}\t{:.5}\t{:.4}\t{}",
                    c.n, s.n_samples, s.n_failed, s.average, s.median, s.proportion_nonneg, c.n_nonmaximal
                );
            }
            if let Some(out) = &cfg.out {
                harness::write_gap_outputs(out, &cfg, &cells)?;
            }
            Ok(cells.iter().map(|c| c.stats.n_failed).sum())
        }
        Command::Assignment(o) => {
            let cfg = build_config(ExperimentKind::Assignment, &o)?;
            let cells = harness::run_assignment_experiment(&cfg)?;
            println!("n\tpipeline\tsamples\tfailed\taverage\tmedian\tsa_iters\ticn_iters");
            for c in &cells {
                let s = &c.stats;
                println!(
                    "{}\t{}\t{}\t{}\t{:.5}\t{:.5}\t{:.1}\t{:.1}",
                    c.n,
                    c.pipeline,
                    s.n_samples,
                    s.n_failed,
                    s.average,
                    s.median,
                    c.sa_iterations.mean,
                    c.icn_iterations.mean
                );
            }
            if let Some(out) = &cfg.out {
                harness::write_assignment_outputs(out, &cfg, &cells)?;
            }
            Ok(cells.iter().map(|c| c.stats.n_failed).sum())
        }
        Command::Conjectures(o) => {
            let cfg = build_config(ExperimentKind::Conjectures, &o)?;
            let r = harness::run_conjecture_suite(&cfg)?;
            println!("samples            {}", r.samples);
            println!("ql1 violations     {}", r.ql1_violations);
            println!("l1 violations      {}", r.l1_violations);
            println!("maximal            {}", r.converged_maximal);
            println!("non-maximal        {}", r.converged_nonmaximal);
            println!("not independent    {}", r.converged_not_independent);
            println!("speed only         {}", r.speed_only);
            println!("iteration cap      {}", r.max_iters);
            if let Some(out) = &cfg.out {
                harness::write_conjecture_outputs(out, &cfg, &r)?;
            }
            Ok(r.n_failed() + r.ql1_violations + r.l1_violations)
        }
        Command::Census(o) => {
            let cfg = build_config(ExperimentKind::Census, &o)?;
            let r = harness::run_census(&cfg)?;
            println!("size\tisolated\tinterior");
            for &(size, count) in &r.counts {
                println!("{size}\t{count}\t{}", r.interior_count(size).unwrap_or(0));
            }
            if let Some(out) = &cfg.out {
                harness::write_census_outputs(out, &cfg, &r)?;
            }
            Ok(0)
        }
    }
}

fn single(path: &Path, o: &Options) -> Result<usize, Failure> {
    let cfg = build_config(ExperimentKind::Single, o)?;
    let g = read_graph(path)?;
    let bad = non_normalizable_nodes(&g);
    if !bad.is_empty() {
        eprintln!("warning: nodes {bad:?} have zero weight on their whole closed neighbourhood");
    }
    let (g, report) = harness::run_single(path, &cfg)?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(Error::from)?);
    if let Some(out) = &cfg.out {
        harness::write_single_outputs(out, &g, &report)?;
    }
    Ok(usize::from(!report.converged()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failed) => {
            eprintln!("{failed} instance(s) failed");
            ExitCode::from(EXIT_FAILED)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
