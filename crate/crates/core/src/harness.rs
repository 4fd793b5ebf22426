//! Seeded Monte-Carlo experiment drivers and their CSV output.
//!
//! Every instance draws from its own generator seeded with `base_seed + index`,
//! so results are identical whatever the number of worker threads.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::{run_icn, softassign, WeightMatrix};
use crate::baselines::{gap, hungarian, wg_greedy};
use crate::dynamics::{
    check_ql1, l1_monotonicity_check, run_ign, Activation, ConvergenceReport, StopReason, StoppingCriteria,
};
use crate::error::{invalid, Result};
use crate::fixed_points::{census, CensusReport};
use crate::format::{read_graph, write_graph_json, write_matrix_csv, write_wgraph};
use crate::graph::{
    classify_set, gnp_with_rng, instance_rng, random_connected, uniform_open_closed, SetClassification, WeightedGraph,
};

/// Sinkhorn tolerance on row and column sums inside Softassign.
pub const SINKHORN_TOLERANCE: f64 = 1e-2;
pub const SINKHORN_MAX_ITERS: usize = 100_000;
/// Plain normalization steps per instance in the L1 check of the conjecture suite.
pub const L1_CHECK_STEPS: usize = 30;

pub const HISTOGRAM_BINS: usize = 81;
pub const HISTOGRAM_WIDTH: f64 = 0.005;
/// Lower edge of the first bin; bins are centred on multiples of the width in `[-0.2, 0.2]`.
pub const HISTOGRAM_LOW: f64 = -0.2 - HISTOGRAM_WIDTH / 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GapVsWg,
    Assignment,
    Conjectures,
    Census,
    Single,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    IgnOnly,
    SaThenIcn,
    IcnOnly,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::IgnOnly => "ign",
            Pipeline::SaThenIcn => "sa-icn",
            Pipeline::IcnOnly => "icn",
        })
    }
}

impl FromStr for Pipeline {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ign" | "ign-only" => Ok(Pipeline::IgnOnly),
            "sa-icn" | "sa-then-icn" => Ok(Pipeline::SaThenIcn),
            "icn" | "icn-only" => Ok(Pipeline::IcnOnly),
            other => Err(invalid(format!(
                "unknown pipeline {other:?}, expected ign, sa-icn or icn"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n_values: Vec<usize>,
    /// Edge probability; the conjecture suite draws one per instance when absent.
    pub p: Option<f64>,
    /// Samples per cell; when absent, 10 000 for `n <= 64` and 1 000 above.
    pub samples: Option<usize>,
    pub activation: Activation,
    pub tau: Option<f64>,
    pub pipeline: Pipeline,
    pub stop: StoppingCriteria,
    pub base_seed: u64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut cfg = Self {
            kind,
            n_values: vec![8, 16, 32, 64],
            p: Some(0.5),
            samples: None,
            activation: Activation::default(),
            tau: None,
            pipeline: Pipeline::IgnOnly,
            stop: StoppingCriteria::default(),
            base_seed: 0,
            out: None,
        };
        match kind {
            ExperimentKind::Assignment => {
                cfg.n_values = vec![4, 8, 16, 32, 64, 128];
                cfg.p = None;
                cfg.activation = Activation::Sigmoid { a: 5.0 };
                cfg.tau = Some(0.01);
                cfg.pipeline = Pipeline::SaThenIcn;
            }
            ExperimentKind::Conjectures => {
                cfg.n_values = vec![3, 32];
                cfg.p = None;
                cfg.samples = Some(10_000);
            }
            ExperimentKind::Census => {
                cfg.n_values = vec![4, 6];
                cfg.p = None;
            }
            ExperimentKind::GapVsWg | ExperimentKind::Single => {}
        }
        cfg
    }

    pub fn samples_for(&self, n: usize) -> usize {
        self.samples.unwrap_or(if n <= 64 { 10_000 } else { 1_000 })
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == Some(0) {
            return Err(invalid("samples must be at least 1"));
        }
        if self.kind != ExperimentKind::Single {
            if self.n_values.is_empty() {
                return Err(invalid("at least one n is required"));
            }
            if self.n_values.contains(&0) {
                return Err(invalid("n values must be at least 1"));
            }
        }
        if let Some(p) = self.p {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("edge probability {p} outside [0, 1]")));
            }
        }
        match (self.pipeline, self.tau) {
            (Pipeline::SaThenIcn, None) => return Err(invalid("the sa-icn pipeline needs --tau")),
            (Pipeline::SaThenIcn, Some(t)) if !(t > 0.0 && t.is_finite()) => {
                return Err(invalid(format!("tau must be positive, got {t}")))
            }
            (Pipeline::IgnOnly | Pipeline::IcnOnly, Some(_)) => {
                return Err(invalid("--tau only applies to the sa-icn pipeline"))
            }
            _ => {}
        }
        let pipeline_ok = match self.kind {
            ExperimentKind::Assignment => self.pipeline != Pipeline::IgnOnly,
            _ => self.pipeline == Pipeline::IgnOnly,
        };
        if !pipeline_ok {
            return Err(invalid(format!(
                "pipeline {} does not apply to this experiment",
                self.pipeline
            )));
        }
        match self.kind {
            ExperimentKind::GapVsWg if self.p.is_none() => Err(invalid("gap-vs-wg needs --p")),
            ExperimentKind::Conjectures if self.n_values.len() > 2 || self.n_values.iter().any(|&n| n < 2) => {
                Err(invalid("conjectures take an n range `lo` or `lo,hi` with lo >= 2"))
            }
            ExperimentKind::Census if self.n_values.len() > 2 || self.n_values.iter().any(|&n| n > 7) => {
                Err(invalid("census takes a size range `lo` or `lo,hi` within 1..=7"))
            }
            _ => Ok(()),
        }
    }

    fn n_range(&self) -> (usize, usize) {
        let lo = self.n_values.iter().copied().min().unwrap_or(1);
        let hi = self.n_values.iter().copied().max().unwrap_or(lo);
        (lo, hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub counts: Vec<usize>,
    pub below: usize,
    pub above: usize,
}

impl Histogram {
    pub fn new(values: &[f64]) -> Self {
        let mut h = Self {
            counts: vec![0; HISTOGRAM_BINS],
            below: 0,
            above: 0,
        };
        for &v in values {
            let k = ((v - HISTOGRAM_LOW) / HISTOGRAM_WIDTH).floor();
            if k < 0.0 {
                h.below += 1;
            } else if k >= HISTOGRAM_BINS as f64 {
                h.above += 1;
            } else {
                h.counts[k as usize] += 1;
            }
        }
        h
    }

    pub fn bin_edges(k: usize) -> (f64, f64) {
        let lo = HISTOGRAM_LOW + k as f64 * HISTOGRAM_WIDTH;
        (lo, lo + HISTOGRAM_WIDTH)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.below + self.above
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapStats {
    pub average: f64,
    /// Lower-middle element for an even count.
    pub median: f64,
    /// Fraction of gaps `>= 0`.
    pub proportion_nonneg: f64,
    pub histogram: Histogram,
    pub n_samples: usize,
    pub n_failed: usize,
}

impl GapStats {
    pub fn from_gaps(mut gaps: Vec<f64>, n_failed: usize) -> Self {
        let histogram = Histogram::new(&gaps);
        gaps.sort_by(f64::total_cmp);
        let k = gaps.len();
        let (average, median, proportion_nonneg) = if k == 0 {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            (
                gaps.iter().sum::<f64>() / k as f64,
                gaps[(k - 1) / 2],
                gaps.iter().filter(|&&g| g >= 0.0).count() as f64 / k as f64,
            )
        };
        Self {
            average,
            median,
            proportion_nonneg,
            histogram,
            n_samples: k + n_failed,
            n_failed,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let k = values.len();
        if k == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / k as f64;
        let var = if k > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64
        } else {
            0.0
        };
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapFailure {
    pub index: u64,
    pub seed: u64,
    pub graph: WeightedGraph,
    pub report: ConvergenceReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapCell {
    pub n: usize,
    pub stats: GapStats,
    pub n_maximal: usize,
    pub n_nonmaximal: usize,
    pub failures: Vec<GapFailure>,
}

enum GapOutcome {
    Ok { gap: f64, maximal: bool },
    Failed(Box<GapFailure>),
}

fn gap_instance(cfg: &ExperimentConfig, n: usize, p: f64, index: u64) -> Result<GapOutcome> {
    let mut rng = instance_rng(cfg.base_seed, index);
    let g = gnp_with_rng(n, p, &mut rng);
    let report = run_ign(&g.adjacency, g.weights.as_slice(), &cfg.activation, &cfg.stop, false)?;
    let wg = wg_greedy(&g)?;
    debug_assert_eq!(
        classify_set(&g.adjacency, &wg.set),
        SetClassification::MaximalIndependent
    );
    match (&report.rounded_set, report.rounded_class) {
        (Some(set), Some(class)) if report.converged() && class.is_independent() => {
            let w = set.total_weight(g.weights.as_slice());
            Ok(GapOutcome::Ok {
                gap: gap(w, wg.total_weight)?,
                maximal: class == SetClassification::MaximalIndependent,
            })
        }
        _ => Ok(GapOutcome::Failed(Box::new(GapFailure {
            index,
            seed: cfg.base_seed.wrapping_add(index),
            graph: g,
            report,
        }))),
    }
}

/// IGN against the greedy baseline on `G(n, p)` with uniform weights, one cell per `n`.
pub fn run_gap_experiment(cfg: &ExperimentConfig) -> Result<Vec<GapCell>> {
    cfg.validate()?;
    let p = cfg.p.ok_or_else(|| invalid("gap-vs-wg needs --p"))?;
    let mut cells = Vec::new();
    for &n in &cfg.n_values {
        let outcomes = (0..cfg.samples_for(n) as u64)
            .into_par_iter()
            .map(|i| gap_instance(cfg, n, p, i))
            .collect::<Result<Vec<_>>>()?;
        let (mut gaps, mut failures, mut n_maximal) = (Vec::new(), Vec::new(), 0);
        for o in outcomes {
            match o {
                GapOutcome::Ok { gap, maximal } => {
                    gaps.push(gap);
                    n_maximal += usize::from(maximal);
                }
                GapOutcome::Failed(f) => failures.push(*f),
            }
        }
        let n_nonmaximal = gaps.len() - n_maximal;
        cells.push(GapCell {
            n,
            stats: GapStats::from_gaps(gaps, failures.len()),
            n_maximal,
            n_nonmaximal,
            failures,
        });
    }
    Ok(cells)
}

#[derive(Clone, Debug, Serialize)]
pub struct AssignmentFailure {
    pub index: u64,
    pub seed: u64,
    pub matrix: WeightMatrix,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssignmentCell {
    pub n: usize,
    pub pipeline: Pipeline,
    pub stats: GapStats,
    pub sa_iterations: Summary,
    pub icn_iterations: Summary,
    pub total_iterations: Summary,
    pub failures: Vec<AssignmentFailure>,
}

struct AssignmentRun {
    gap: Option<f64>,
    sa: usize,
    icn: usize,
    failure: Option<AssignmentFailure>,
}

pub fn uniform_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> WeightMatrix {
    let data = (0..n * n).map(|_| uniform_open_closed(rng)).collect();
    WeightMatrix::from_row_major(n, data).expect("uniform entries are valid")
}

fn assignment_instance(cfg: &ExperimentConfig, n: usize, index: u64) -> Result<AssignmentRun> {
    let mut rng = instance_rng(cfg.base_seed, index);
    let x = uniform_matrix(n, &mut rng);
    let fail = |reason: String, sa, icn| AssignmentRun {
        gap: None,
        sa,
        icn,
        failure: Some(AssignmentFailure {
            index,
            seed: cfg.base_seed.wrapping_add(index),
            matrix: x.clone(),
            reason,
        }),
    };
    let (start, sa) = match cfg.pipeline {
        Pipeline::SaThenIcn => {
            let tau = cfg.tau.ok_or_else(|| invalid("the sa-icn pipeline needs --tau"))?;
            match softassign(&x, tau, SINKHORN_TOLERANCE, SINKHORN_MAX_ITERS) {
                Ok(out) if out.converged => (out.matrix, out.iterations),
                Ok(out) => return Ok(fail("Sinkhorn did not converge".into(), out.iterations, 0)),
                Err(e) => return Ok(fail(e.to_string(), 0, 0)),
            }
        }
        _ => (x.clone(), 0),
    };
    let report = run_icn(&start, &cfg.activation, &cfg.stop);
    let Some(perm) = report.permutation else {
        let reason = if report.non_normalizable {
            "not normalizable".to_string()
        } else {
            format!("{:?}", report.stop_reason)
        };
        return Ok(fail(reason, sa, report.iterations));
    };
    let (_, best) = hungarian(&x)?;
    Ok(AssignmentRun {
        gap: Some(gap(x.total_for(&perm), best)?),
        sa,
        icn: report.iterations,
        failure: None,
    })
}

/// ICN, optionally after Softassign, against the Hungarian optimum on uniform matrices.
pub fn run_assignment_experiment(cfg: &ExperimentConfig) -> Result<Vec<AssignmentCell>> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &n in &cfg.n_values {
        let runs = (0..cfg.samples_for(n) as u64)
            .into_par_iter()
            .map(|i| assignment_instance(cfg, n, i))
            .collect::<Result<Vec<_>>>()?;
        let mut gaps = Vec::new();
        let mut failures = Vec::new();
        let (mut sa, mut icn, mut total) = (Vec::new(), Vec::new(), Vec::new());
        for r in runs {
            sa.push(r.sa as f64);
            icn.push(r.icn as f64);
            total.push((r.sa + r.icn) as f64);
            gaps.extend(r.gap);
            failures.extend(r.failure);
        }
        cells.push(AssignmentCell {
            n,
            pipeline: cfg.pipeline,
            stats: GapStats::from_gaps(gaps, failures.len()),
            sa_iterations: Summary::of(&sa),
            icn_iterations: Summary::of(&icn),
            total_iterations: Summary::of(&total),
            failures,
        });
    }
    Ok(cells)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjectureViolation {
    pub index: u64,
    pub seed: u64,
    pub p: f64,
    pub check: &'static str,
    pub graph: WeightedGraph,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConjectureReport {
    pub samples: usize,
    pub ql1_violations: usize,
    pub l1_violations: usize,
    pub converged_maximal: usize,
    pub converged_nonmaximal: usize,
    pub converged_not_independent: usize,
    pub speed_only: usize,
    pub max_iters: usize,
    pub violations: Vec<ConjectureViolation>,
}

impl ConjectureReport {
    /// Runs that did not end as a binary maximal independent set.
    pub fn n_failed(&self) -> usize {
        self.samples - self.converged_maximal
    }
}

struct ConjectureRun {
    ql1: bool,
    l1: bool,
    reason: StopReason,
    class: Option<SetClassification>,
    p: f64,
    graph: WeightedGraph,
}

fn conjecture_instance(cfg: &ExperimentConfig, lo: usize, hi: usize, index: u64) -> Result<ConjectureRun> {
    let mut rng = instance_rng(cfg.base_seed, index);
    let n = rng.random_range(lo..=hi);
    let p = cfg.p.unwrap_or_else(|| uniform_open_closed(&mut rng));
    let g = random_connected(n, p, &mut rng);
    let x = g.weights.as_slice();
    let ql1 = check_ql1(&g.adjacency, x)?.holds;
    let l1 = l1_monotonicity_check(&g.adjacency, x, L1_CHECK_STEPS)?;
    let report = run_ign(&g.adjacency, x, &cfg.activation, &cfg.stop, false)?;
    Ok(ConjectureRun {
        ql1,
        l1,
        reason: report.stop_reason,
        class: report.rounded_class,
        p,
        graph: g,
    })
}

/// Sweeps random connected weighted graphs with `n` uniform in the configured
/// range, checking the quadratic L1 inequality, L1 growth under normalization
/// and the convergence class of the activated iteration.
pub fn run_conjecture_suite(cfg: &ExperimentConfig) -> Result<ConjectureReport> {
    cfg.validate()?;
    let (lo, hi) = cfg.n_range();
    let samples = cfg.samples_for(hi);
    let runs = (0..samples as u64)
        .into_par_iter()
        .map(|i| conjecture_instance(cfg, lo, hi, i))
        .collect::<Result<Vec<_>>>()?;
    let mut report = ConjectureReport {
        samples,
        ..Default::default()
    };
    for (i, r) in runs.into_iter().enumerate() {
        let index = i as u64;
        let violation = |check| ConjectureViolation {
            index,
            seed: cfg.base_seed.wrapping_add(index),
            p: r.p,
            check,
            graph: r.graph.clone(),
        };
        if !r.ql1 {
            report.ql1_violations += 1;
            report.violations.push(violation("ql1"));
        }
        if !r.l1 {
            report.l1_violations += 1;
            report.violations.push(violation("l1-increase"));
        }
        match (r.reason, r.class) {
            (StopReason::ConvergedBinary, Some(SetClassification::MaximalIndependent)) => report.converged_maximal += 1,
            (StopReason::ConvergedBinary, Some(SetClassification::IndependentNonMaximal)) => {
                report.converged_nonmaximal += 1
            }
            (StopReason::ConvergedBinary, _) => report.converged_not_independent += 1,
            (StopReason::SpeedOnly, _) => report.speed_only += 1,
            (StopReason::MaxIters, _) => report.max_iters += 1,
        }
        if !(r.reason == StopReason::ConvergedBinary && r.class == Some(SetClassification::MaximalIndependent)) {
            report.violations.push(violation("convergence"));
        }
    }
    Ok(report)
}

pub fn run_census(cfg: &ExperimentConfig) -> Result<CensusReport> {
    cfg.validate()?;
    let (lo, hi) = cfg.n_range();
    census(lo, hi)
}

pub fn run_single(path: &Path, cfg: &ExperimentConfig) -> Result<(WeightedGraph, ConvergenceReport)> {
    let g = read_graph(path)?;
    let report = run_ign(&g.adjacency, g.weights.as_slice(), &cfg.activation, &cfg.stop, true)?;
    Ok((g, report))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn write_csv<S: Serialize>(path: &Path, rows: &[S]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| invalid(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| invalid(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct HistogramRow {
    n: usize,
    bin_low: String,
    bin_high: String,
    count: usize,
}

fn histogram_rows(n: usize, h: &Histogram) -> Vec<HistogramRow> {
    let (first, _) = Histogram::bin_edges(0);
    let (_, last) = Histogram::bin_edges(HISTOGRAM_BINS - 1);
    let mut rows = vec![HistogramRow {
        n,
        bin_low: "-inf".into(),
        bin_high: format!("{first:.4}"),
        count: h.below,
    }];
    rows.extend(h.counts.iter().enumerate().map(|(k, &count)| {
        let (lo, hi) = Histogram::bin_edges(k);
        HistogramRow {
            n,
            bin_low: format!("{lo:.4}"),
            bin_high: format!("{hi:.4}"),
            count,
        }
    }));
    rows.push(HistogramRow {
        n,
        bin_low: format!("{last:.4}"),
        bin_high: "inf".into(),
        count: h.above,
    });
    rows
}

fn prepare_dirs(out: &Path, cfg: &ExperimentConfig) -> Result<PathBuf> {
    let failures = out.join("failures");
    fs::create_dir_all(&failures)?;
    fs::write(out.join("config.json"), serde_json::to_string_pretty(cfg)?)?;
    Ok(failures)
}

#[derive(Serialize)]
struct GapRow {
    n: usize,
    p: String,
    activation: String,
    samples: usize,
    n_failed: usize,
    average: f64,
    median: f64,
    proportion_nonneg: f64,
    n_maximal: usize,
    n_nonmaximal: usize,
}

pub fn write_gap_outputs(out: &Path, cfg: &ExperimentConfig, cells: &[GapCell]) -> Result<()> {
    let failures = prepare_dirs(out, cfg)?;
    let rows: Vec<_> = cells
        .iter()
        .map(|c| GapRow {
            n: c.n,
            p: fmt_opt(cfg.p),
            activation: cfg.activation.to_string(),
            samples: c.stats.n_samples,
            n_failed: c.stats.n_failed,
            average: c.stats.average,
            median: c.stats.median,
            proportion_nonneg: c.stats.proportion_nonneg,
            n_maximal: c.n_maximal,
            n_nonmaximal: c.n_nonmaximal,
        })
        .collect();
    write_csv(&out.join("stats.csv"), &rows)?;
    let hist: Vec<_> = cells
        .iter()
        .flat_map(|c| histogram_rows(c.n, &c.stats.histogram))
        .collect();
    write_csv(&out.join("histogram.csv"), &hist)?;
    for c in cells {
        for f in &c.failures {
            let stem = format!("gap_n{}_i{}", c.n, f.index);
            fs::write(failures.join(format!("{stem}.wgraph")), write_wgraph(&f.graph))?;
            fs::write(failures.join(format!("{stem}.json")), serde_json::to_string_pretty(f)?)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct AssignmentRow {
    n: usize,
    pipeline: String,
    activation: String,
    tau: String,
    samples: usize,
    n_failed: usize,
    average: f64,
    median: f64,
    proportion_nonneg: f64,
    sa_iters_mean: f64,
    sa_iters_std: f64,
    icn_iters_mean: f64,
    icn_iters_std: f64,
    total_iters_mean: f64,
    total_iters_std: f64,
}

pub fn write_assignment_outputs(out: &Path, cfg: &ExperimentConfig, cells: &[AssignmentCell]) -> Result<()> {
    let failures = prepare_dirs(out, cfg)?;
    let rows: Vec<_> = cells
        .iter()
        .map(|c| AssignmentRow {
            n: c.n,
            pipeline: c.pipeline.to_string(),
            activation: cfg.activation.to_string(),
            tau: fmt_opt(cfg.tau),
            samples: c.stats.n_samples,
            n_failed: c.stats.n_failed,
            average: c.stats.average,
            median: c.stats.median,
            proportion_nonneg: c.stats.proportion_nonneg,
            sa_iters_mean: c.sa_iterations.mean,
            sa_iters_std: c.sa_iterations.std,
            icn_iters_mean: c.icn_iterations.mean,
            icn_iters_std: c.icn_iterations.std,
            total_iters_mean: c.total_iterations.mean,
            total_iters_std: c.total_iterations.std,
        })
        .collect();
    write_csv(&out.join("stats.csv"), &rows)?;
    let hist: Vec<_> = cells
        .iter()
        .flat_map(|c| histogram_rows(c.n, &c.stats.histogram))
        .collect();
    write_csv(&out.join("histogram.csv"), &hist)?;
    for c in cells {
        for f in &c.failures {
            let stem = format!("assignment_n{}_i{}", c.n, f.index);
            fs::write(failures.join(format!("{stem}.csv")), write_matrix_csv(&f.matrix))?;
            fs::write(failures.join(format!("{stem}.json")), serde_json::to_string_pretty(f)?)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ConjectureRow {
    n_min: usize,
    n_max: usize,
    p: String,
    activation: String,
    samples: usize,
    n_failed: usize,
    ql1_violations: usize,
    l1_violations: usize,
    converged_maximal: usize,
    converged_nonmaximal: usize,
    converged_not_independent: usize,
    speed_only: usize,
    max_iters: usize,
}

pub fn write_conjecture_outputs(out: &Path, cfg: &ExperimentConfig, r: &ConjectureReport) -> Result<()> {
    let failures = prepare_dirs(out, cfg)?;
    let (n_min, n_max) = cfg.n_range();
    let row = ConjectureRow {
        n_min,
        n_max,
        p: fmt_opt(cfg.p),
        activation: cfg.activation.to_string(),
        samples: r.samples,
        n_failed: r.n_failed(),
        ql1_violations: r.ql1_violations,
        l1_violations: r.l1_violations,
        converged_maximal: r.converged_maximal,
        converged_nonmaximal: r.converged_nonmaximal,
        converged_not_independent: r.converged_not_independent,
        speed_only: r.speed_only,
        max_iters: r.max_iters,
    };
    write_csv(&out.join("stats.csv"), &[row])?;
    for v in &r.violations {
        let stem = format!("{}_i{}", v.check, v.index);
        fs::write(failures.join(format!("{stem}.wgraph")), write_wgraph(&v.graph))?;
        fs::write(failures.join(format!("{stem}.json")), serde_json::to_string_pretty(v)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CensusStatsRow {
    size: usize,
    candidates: usize,
    certified: usize,
    interior: usize,
}

pub fn write_census_outputs(out: &Path, cfg: &ExperimentConfig, r: &CensusReport) -> Result<()> {
    prepare_dirs(out, cfg)?;
    let rows: Vec<_> = r
        .counts
        .iter()
        .map(|&(size, certified)| CensusStatsRow {
            size,
            candidates: r.rows.iter().filter(|row| row.size == size).count(),
            certified,
            interior: r.interior_count(size).unwrap_or(0),
        })
        .collect();
    write_csv(&out.join("stats.csv"), &rows)?;
    fs::write(out.join("census.csv"), r.to_csv())?;
    Ok(())
}

pub fn write_single_outputs(out: &Path, g: &WeightedGraph, report: &ConvergenceReport) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join("report.json"), serde_json::to_string_pretty(report)?)?;
    fs::write(out.join("graph.json"), write_graph_json(g)?)?;
    if let Some(csv) = report.trace_csv() {
        fs::write(out.join("trace.csv"), csv)?;
    }
    Ok(())
}
