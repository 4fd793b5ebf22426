//! Fixed clusters: connected graphs with a strictly positive fixed point of the
//! normalization, i.e. a solution of `(A + I) x = 1` with `x > 0`.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{step, Activation};
use crate::error::{invalid, Error, Result};
use crate::graph::{enumerate_connected_graphs, AdjacencyMatrix, WeightVector, MAX_ENUMERATION_NODES};
use crate::simplex::{simplex_solve, LinearProgram, LpStatus, Sense};

/// Cutoff for "strictly positive" and for the feasibility residual.
pub const STRICTNESS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedClusterCertificate {
    pub graph: AdjacencyMatrix,
    pub weights: WeightVector,
    /// `max_i |((A + I) x)_i - 1|`.
    pub residual: f64,
    pub min_weight: f64,
    /// The first-stage vertex solution is already strictly positive. A vertex
    /// has at most `rank(A + I)` nonzero weights, so this holds exactly when
    /// `A + I` is invertible and the weighting is the unique solution.
    pub isolated: bool,
}

impl FixedClusterCertificate {
    fn new(graph: &AdjacencyMatrix, x: Vec<f64>, isolated: bool) -> Result<Self> {
        let residual = closed_residual(graph, &x);
        let min_weight = x.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self {
            graph: graph.clone(),
            weights: WeightVector::new(x)?,
            residual,
            min_weight,
            isolated,
        })
    }
}

pub fn closed_residual(a: &AdjacencyMatrix, x: &[f64]) -> f64 {
    (0..a.n()).map(|i| (a.closed_sum(x, i) - 1.0).abs()).fold(0.0, f64::max)
}

fn closed_row(a: &AdjacencyMatrix, i: usize, width: usize) -> Vec<f64> {
    let mut row = vec![0.0; width];
    row[i] = 1.0;
    for &j in a.neighbors(i) {
        row[j] = 1.0;
    }
    row
}

/// Searches for a fixed cluster weighting of `a` in two LP stages: first
/// feasibility of `(A + I) x + y = 1` with minimal slack `1ᵗy`, then the
/// solution of `(A + I) x = 1` maximizing `min_i x_i`.
pub fn find_fixed_cluster(a: &AdjacencyMatrix) -> Result<Option<FixedClusterCertificate>> {
    let n = a.n();
    if n == 0 {
        return Err(invalid("empty graph"));
    }
    if !a.is_connected() {
        return Err(Error::Disconnected);
    }

    let mut objective = vec![0.0; 2 * n];
    objective[n..].iter_mut().for_each(|c| *c = 1.0);
    let mut stage1 = LinearProgram::new(objective, Sense::Minimize);
    for i in 0..n {
        let mut row = closed_row(a, i, 2 * n);
        row[n + i] = 1.0;
        stage1 = stage1.equality(row, 1.0);
    }
    let s1 = simplex_solve(&stage1)?;
    if s1.status != LpStatus::Optimal || s1.objective.is_none_or(|v| v > STRICTNESS) {
        return Ok(None);
    }
    let isolated = s1.x.as_ref().is_some_and(|x| x[..n].iter().all(|&v| v > STRICTNESS));

    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut stage2 = LinearProgram::new(objective, Sense::Maximize);
    for i in 0..n {
        stage2 = stage2.equality(closed_row(a, i, n + 1), 1.0);
    }
    for i in 0..n {
        let mut row = vec![0.0; n + 1];
        row[i] = -1.0;
        row[n] = 1.0;
        stage2 = stage2.at_most(row, 0.0);
    }
    let s2 = simplex_solve(&stage2)?;
    match (s2.status, s2.x) {
        (LpStatus::Optimal, Some(mut x)) if x[n] > STRICTNESS => {
            x.truncate(n);
            Ok(Some(FixedClusterCertificate::new(a, x, isolated)?))
        }
        _ => Ok(None),
    }
}

/// A `d`-regular connected graph is fixed by the uniform weighting `1/(d+1)`.
pub fn regular_certificate(a: &AdjacencyMatrix) -> Result<Option<FixedClusterCertificate>> {
    match a.regular_degree() {
        Some(d) if a.is_connected() => {
            let isolated = find_fixed_cluster(a)?.is_some_and(|c| c.isolated);
            FixedClusterCertificate::new(a, vec![1.0 / (d as f64 + 1.0); a.n()], isolated).map(Some)
        }
        _ => Ok(None),
    }
}

/// True iff `x > 1e-9`, `(A + I) x = 1` to 1e-9, and one normalization step
/// leaves `x` unchanged to 1e-9.
pub fn verify_fixed_cluster(a: &AdjacencyMatrix, x: &[f64]) -> bool {
    if x.len() != a.n() || x.iter().any(|&v| !(v > STRICTNESS && v.is_finite())) {
        return false;
    }
    if closed_residual(a, x) > STRICTNESS {
        return false;
    }
    match step(a, x, &Activation::Identity) {
        Ok(y) => y.iter().zip(x).all(|(p, q)| (p - q).abs() <= STRICTNESS),
        Err(_) => false,
    }
}

/// Connected, not regular, minimum degree at least 2.
pub fn is_census_candidate(a: &AdjacencyMatrix) -> bool {
    a.n() > 0 && a.is_connected() && a.regular_degree().is_none() && a.min_degree() >= 2
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusRow {
    pub size: usize,
    pub graph: String,
    /// Isolated fixed cluster: the feasibility LP's vertex solution is strictly positive.
    pub certified: bool,
    /// Some strictly positive solution exists, possibly in a continuum.
    pub interior: bool,
    pub weights: Option<Vec<f64>>,
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusReport {
    /// One row per candidate graph, ordered by size then canonical code.
    pub rows: Vec<CensusRow>,
    /// `(size, isolated fixed clusters)` for every size in range.
    pub counts: Vec<(usize, usize)>,
    /// `(size, graphs with any strictly positive solution)`.
    pub interior_counts: Vec<(usize, usize)>,
}

impl CensusReport {
    pub fn count(&self, size: usize) -> Option<usize> {
        self.counts.iter().find(|(s, _)| *s == size).map(|(_, c)| *c)
    }

    pub fn interior_count(&self, size: usize) -> Option<usize> {
        self.interior_counts.iter().find(|(s, _)| *s == size).map(|(_, c)| *c)
    }

    pub fn certified(&self) -> impl Iterator<Item = &CensusRow> {
        self.rows.iter().filter(|r| r.certified)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("size,graph,certified,interior,weights,residual\n");
        for r in &self.rows {
            let weights = r
                .weights
                .as_ref()
                .map(|w| w.iter().map(|v| format!("{v:.12}")).collect::<Vec<_>>().join(";"))
                .unwrap_or_default();
            let residual = r.residual.map(|v| format!("{v:e}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.size, r.graph, r.certified, r.interior, weights, residual
            ));
        }
        out
    }
}

/// Counts non-trivial fixed clusters among the connected graphs of each size
/// in `n_min..=n_max`. The headline count is of isolated clusters; graphs whose
/// positive solutions form a continuum are reported separately.
pub fn census(n_min: usize, n_max: usize) -> Result<CensusReport> {
    if n_min == 0 || n_min > n_max {
        return Err(invalid(format!("invalid census range {n_min}..={n_max}")));
    }
    if n_max > MAX_ENUMERATION_NODES {
        return Err(Error::SizeGuard {
            what: "fixed-cluster census",
            limit: MAX_ENUMERATION_NODES,
            got: n_max,
        });
    }
    let mut rows = Vec::new();
    let mut counts = Vec::new();
    let mut interior_counts = Vec::new();
    for size in n_min..=n_max {
        let candidates: Vec<_> = enumerate_connected_graphs(size)?
            .into_iter()
            .filter(is_census_candidate)
            .collect();
        let found = candidates
            .par_iter()
            .map(find_fixed_cluster)
            .collect::<Result<Vec<_>>>()?;
        let (mut certified, mut interior) = (0, 0);
        for (g, cert) in candidates.iter().zip(found) {
            let isolated = cert.as_ref().is_some_and(|c| c.isolated);
            certified += usize::from(isolated);
            interior += usize::from(cert.is_some());
            rows.push(CensusRow {
                size,
                graph: g.bit_string(),
                certified: isolated,
                interior: cert.is_some(),
                residual: cert.as_ref().map(|c| c.residual),
                weights: cert.map(|c| c.weights.into_inner()),
            });
        }
        counts.push((size, certified));
        interior_counts.push((size, interior));
    }
    Ok(CensusReport {
        rows,
        counts,
        interior_counts,
    })
}
