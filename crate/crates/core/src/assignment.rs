//! Matrix operators for the assignment problem: row/column (Sinkhorn-Knopp)
//! balancing, Softassign, cross normalization and its iteration (ICN).
//!
//! Cross normalization divides each entry by its row sum plus its column sum
//! minus itself. It is graph normalization on the line graph of `K_{n,n}`,
//! see [`dual_adjacency`].

use serde::{Deserialize, Serialize};

use crate::dynamics::{binarity, Activation, StopReason, StoppingCriteria, MIN_DENOMINATOR};
use crate::error::{invalid, Error, Result};
use crate::graph::AdjacencyMatrix;

/// Exponent limit for `exp(X / tau)` in 64-bit floats.
pub const MAX_EXPONENT: f64 = 700.0;

/// Square matrix of finite nonnegative weights, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct WeightMatrix {
    n: usize,
    data: Vec<f64>,
}

impl WeightMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(invalid(format!(
                    "matrix is not square: {n} rows but a row of length {}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(n, data)
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid(format!(
                "entry ({}, {}) = {} is not a finite nonnegative number",
                k / n,
                k % n,
                data[k]
            )));
        }
        Ok(Self { n, data })
    }

    /// Balances an `r × c` problem by padding the short side with zero-weight
    /// dummy rows or columns.
    pub fn padded(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(invalid("ragged matrix rows"));
        }
        let n = r.max(c);
        let mut data = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            data[i * n..i * n + c].copy_from_slice(row);
        }
        Self::from_row_major(n, data)
    }

    pub fn identity(n: usize) -> Self {
        Self::permutation(&(0..n).collect::<Vec<_>>())
    }

    /// Matrix with a one at `(i, perm[i])`.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut data = vec![0.0; n * n];
        for (i, &j) in perm.iter().enumerate() {
            data[i * n + j] = 1.0;
        }
        Self { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for row in self.data.chunks(self.n.max(1)) {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    /// Column-stacking vectorization: entry `(i, j)` lands at `j * n + i`.
    pub fn vec_columns(&self) -> Vec<f64> {
        let n = self.n;
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                v[j * n + i] = self.get(i, j);
            }
        }
        v
    }

    pub fn total_for(&self, perm: &[usize]) -> f64 {
        perm.iter().enumerate().map(|(i, &j)| self.get(i, j)).sum()
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for WeightMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<WeightMatrix> for Vec<Vec<f64>> {
    fn from(m: WeightMatrix) -> Self {
        m.rows()
    }
}

fn cross_normalize_into(x: &WeightMatrix, rows: &[f64], cols: &[f64], out: &mut [f64]) -> Result<()> {
    let n = x.n;
    for i in 0..n {
        for j in 0..n {
            let v = x.data[i * n + j];
            let denom = rows[i] + cols[j] - v;
            if !(denom >= MIN_DENOMINATOR) {
                return Err(Error::NonNormalizable { node: j * n + i });
            }
            out[i * n + j] = v / denom;
        }
    }
    Ok(())
}

/// Entry `(i, j)` becomes `X_ij / (Σ_k X_ik + Σ_k X_kj - X_ij)`.
pub fn cross_normalize(x: &WeightMatrix) -> Result<WeightMatrix> {
    let mut out = vec![0.0; x.data.len()];
    cross_normalize_into(x, &x.row_sums(), &x.col_sums(), &mut out)?;
    Ok(WeightMatrix { n: x.n, data: out })
}

/// Adjacency of the `n² × n²` graph whose nodes are matrix entries, with
/// entries adjacent when they share a row or a column. Node `(i, j)` has
/// index `j * n + i`, matching [`WeightMatrix::vec_columns`].
pub fn dual_adjacency(n: usize) -> AdjacencyMatrix {
    let mut edges = Vec::with_capacity(n * n * (n.saturating_sub(1)));
    for i in 0..n {
        for j in 0..n {
            let p = j * n + i;
            for k in j + 1..n {
                edges.push((p, k * n + i));
            }
            for k in i + 1..n {
                edges.push((p, j * n + k));
            }
        }
    }
    AdjacencyMatrix::from_edges(n * n, &edges).expect("dual edges are valid")
}

pub fn is_doubly_stochastic(x: &WeightMatrix, tol: f64) -> bool {
    x.row_sums()
        .into_iter()
        .chain(x.col_sums())
        .all(|s| (s - 1.0).abs() <= tol)
}

/// Permutation read off by thresholding at 1/2, present only when every row
/// and every column holds exactly one entry `>= 1/2`.
pub fn is_permutation_after_threshold(x: &WeightMatrix) -> Option<Vec<usize>> {
    let n = x.n;
    let mut perm = vec![usize::MAX; n];
    let mut col_hits = vec![0usize; n];
    for (i, p) in perm.iter_mut().enumerate() {
        for (j, hits) in col_hits.iter_mut().enumerate() {
            if x.get(i, j) >= 0.5 {
                if *p != usize::MAX {
                    return None;
                }
                *p = j;
                *hits += 1;
            }
        }
        if *p == usize::MAX {
            return None;
        }
    }
    col_hits.iter().all(|&c| c == 1).then_some(perm)
}

/// `X_ij > 1/2` on the permutation and `X_ij < 1/(4n - 4)` elsewhere.
pub fn in_permutation_basin(x: &WeightMatrix, perm: &[usize]) -> bool {
    let n = x.n;
    if perm.len() != n {
        return false;
    }
    let bound = if n > 1 {
        1.0 / (4.0 * n as f64 - 4.0)
    } else {
        f64::INFINITY
    };
    (0..n).all(|i| {
        (0..n).all(|j| {
            if perm[i] == j {
                x.get(i, j) > 0.5
            } else {
                x.get(i, j) < bound
            }
        })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SinkhornOutcome {
    pub matrix: WeightMatrix,
    /// Completed row-then-column rounds.
    pub iterations: usize,
    pub converged: bool,
}

/// Alternating row and column normalization until every row and column sum
/// is within `tol` of one, checked on entry and after each column pass.
pub fn sinkhorn_knopp(x: &WeightMatrix, tol: f64, max_iters: usize) -> Result<SinkhornOutcome> {
    let n = x.n;
    let mut m = x.clone();
    let mut iterations = 0;
    let mut converged = is_doubly_stochastic(&m, tol);
    while !converged && iterations < max_iters {
        for (i, s) in m.row_sums().into_iter().enumerate() {
            if !(s > 0.0) {
                return Err(Error::ZeroLine { kind: "row", index: i });
            }
            m.data[i * n..(i + 1) * n].iter_mut().for_each(|v| *v /= s);
        }
        let cols = m.col_sums();
        if let Some(j) = cols.iter().position(|s| !(*s > 0.0)) {
            return Err(Error::ZeroLine {
                kind: "column",
                index: j,
            });
        }
        for row in m.data.chunks_mut(n) {
            for (v, s) in row.iter_mut().zip(&cols) {
                *v /= s;
            }
        }
        iterations += 1;
        converged = is_doubly_stochastic(&m, tol);
    }
    Ok(SinkhornOutcome {
        matrix: m,
        iterations,
        converged,
    })
}

/// Sinkhorn-Knopp applied to `exp(X / tau)`.
pub fn softassign(x: &WeightMatrix, tau: f64, tol: f64, max_iters: usize) -> Result<SinkhornOutcome> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid(format!("temperature must be positive, got {tau}")));
    }
    let top = x.max_entry() / tau;
    if top > MAX_EXPONENT {
        return Err(Error::ExpOverflow(top));
    }
    sinkhorn_knopp(&x.map(|v| (v / tau).exp()), tol, max_iters)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssignmentReport {
    pub final_matrix: WeightMatrix,
    pub permutation: Option<Vec<usize>>,
    pub iterations: usize,
    pub stop_reason: StopReason,
    /// Set when a zero cross sum stopped the run; `final_matrix` is the offending iterate.
    pub non_normalizable: bool,
}

/// Iterates `X ↦ h(cross_normalize(X))` until thresholding at 1/2 yields a
/// permutation matrix (checked on entry too) or `max_iters` is reached.
/// Hitting the cap reports `SpeedOnly` when the last step moved less than
/// `epsilon` and the iterate is `alpha`-binary, `MaxIters` otherwise.
pub fn run_icn(x: &WeightMatrix, h: &Activation, stop: &StoppingCriteria) -> AssignmentReport {
    let n = x.n;
    let h = h.compile();
    let mut m = x.clone();
    let mut next = vec![0.0; m.data.len()];
    let mut iterations = 0;
    let mut speed = f64::INFINITY;
    let mut permutation = is_permutation_after_threshold(&m);
    while permutation.is_none() && iterations < stop.max_iters {
        let (rows, cols) = (m.row_sums(), m.col_sums());
        if cross_normalize_into(&m, &rows, &cols, &mut next).is_err() {
            return AssignmentReport {
                final_matrix: m,
                permutation: None,
                iterations,
                stop_reason: StopReason::MaxIters,
                non_normalizable: true,
            };
        }
        speed = 0.0;
        for (old, new) in m.data.iter().zip(next.iter_mut()) {
            *new = h.value(*new);
            speed = speed.max((*new - old).abs());
        }
        std::mem::swap(&mut m.data, &mut next);
        iterations += 1;
        permutation = is_permutation_after_threshold(&m);
    }
    debug_assert_eq!(m.n, n);
    let stop_reason = if permutation.is_some() {
        StopReason::ConvergedBinary
    } else if speed <= stop.epsilon && binarity(&m.data) <= stop.alpha {
        StopReason::SpeedOnly
    } else {
        StopReason::MaxIters
    };
    AssignmentReport {
        final_matrix: m,
        permutation,
        iterations,
        stop_reason,
        non_normalizable: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::normalize;
    use crate::graph::{density, Density, NodeSet};

    fn m(rows: &[&[f64]]) -> WeightMatrix {
        WeightMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn cross_normalize_examples() {
        let ones = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let c = cross_normalize(&ones).unwrap();
        assert!(c.as_row_major().iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
        let p = WeightMatrix::permutation(&[2, 0, 1]);
        assert_eq!(cross_normalize(&p).unwrap(), p);
        let x = m(&[&[0.2, 0.7, 0.1], &[0.5, 0.3, 0.9], &[0.4, 0.6, 0.8]]);
        let via_graph = normalize(&dual_adjacency(3), &x.vec_columns()).unwrap();
        let direct = cross_normalize(&x).unwrap().vec_columns();
        assert!(via_graph.iter().zip(&direct).all(|(a, b)| (a - b).abs() < 1e-15));
        let zero = m(&[&[0.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(
            cross_normalize(&zero),
            Err(Error::NonNormalizable { node: 0 })
        ));
    }

    #[test]
    fn dual_graph_structure() {
        assert_eq!(dual_adjacency(1).n(), 1);
        assert_eq!(dual_adjacency(1).edge_count(), 0);
        for n in 2..=4 {
            let c = dual_adjacency(n);
            assert_eq!(c.n(), n * n);
            assert_eq!(c.regular_degree(), Some(2 * n - 2));
        }
        // a permutation is a maximal independent set of density 2
        let c = dual_adjacency(4);
        let perm = [1, 3, 0, 2];
        let set = NodeSet::new(16, perm.iter().enumerate().map(|(i, &j)| j * 4 + i)).unwrap();
        assert_eq!(density(&c, &set), Density::Finite(2));
    }

    #[test]
    fn stochasticity_and_threshold() {
        let id = WeightMatrix::identity(3);
        assert!(is_doubly_stochastic(&id, 1e-12));
        assert_eq!(is_permutation_after_threshold(&id), Some(vec![0, 1, 2]));
        let uniform = m(&[&[0.25; 4], &[0.25; 4], &[0.25; 4], &[0.25; 4]]);
        assert!(is_doubly_stochastic(&uniform, 1e-12));
        assert_eq!(is_permutation_after_threshold(&uniform), None);
        let soft = m(&[&[0.9, 0.1], &[0.2, 0.8]]);
        assert!(!is_doubly_stochastic(&soft, 1e-2));
        assert_eq!(is_permutation_after_threshold(&soft), Some(vec![0, 1]));
        let clash = m(&[&[0.9, 0.1], &[0.8, 0.2]]);
        assert_eq!(is_permutation_after_threshold(&clash), None);
        let double = m(&[&[0.5, 0.5], &[0.0, 0.9]]);
        assert_eq!(is_permutation_after_threshold(&double), None);
    }

    #[test]
    fn sinkhorn_examples() {
        let d = m(&[&[2.0, 0.0], &[0.0, 3.0]]);
        let out = sinkhorn_knopp(&d, 1e-2, 100).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.matrix, WeightMatrix::identity(2));
        let ds = m(&[&[0.3, 0.7], &[0.7, 0.3]]);
        let out = sinkhorn_knopp(&ds, 1e-2, 100).unwrap();
        assert_eq!((out.iterations, out.converged), (0, true));
        assert_eq!(out.matrix, ds);
        let bad = m(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(
            sinkhorn_knopp(&bad, 1e-2, 10),
            Err(Error::ZeroLine { kind: "row", index: 1 })
        ));
    }

    #[test]
    fn softassign_examples() {
        let x = m(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let out = softassign(&x, 0.1, 1e-9, 1000).unwrap();
        // limit is [[p, 1-p], [1-p, p]] with odds p² / (1-p)² = e^20
        let p = 1.0 / (1.0 + (-10.0f64).exp());
        assert!((out.matrix.get(0, 0) - p).abs() < 1e-9);
        assert!(out.matrix.get(0, 0) > 0.99 && out.matrix.get(1, 1) > 0.99);
        let hot = softassign(&m(&[&[0.2, 0.9], &[0.4, 0.1]]), 1e6, 1e-9, 1000).unwrap();
        assert!(hot.matrix.as_row_major().iter().all(|v| (v - 0.5).abs() < 1e-5));
        assert!(matches!(softassign(&x, 0.001, 1e-2, 10), Err(Error::ExpOverflow(_))));
        assert!(softassign(&x, 0.0, 1e-2, 10).is_err());
    }

    #[test]
    fn icn_examples() {
        let h = Activation::sigmoid(5.0).unwrap();
        let stop = StoppingCriteria::default();
        let p = WeightMatrix::permutation(&[1, 0, 2]);
        let r = run_icn(&p, &h, &stop);
        assert_eq!((r.iterations, r.permutation.clone()), (0, Some(vec![1, 0, 2])));
        assert_eq!(r.stop_reason, StopReason::ConvergedBinary);

        let x = m(&[&[0.4, 0.3, 0.35], &[0.3, 0.5, 0.2], &[0.33, 0.3, 0.45]]);
        let r = run_icn(&x, &h, &stop);
        assert_eq!(r.permutation, Some(vec![0, 1, 2]));
        assert!(!r.non_normalizable);
    }

    #[test]
    fn padding() {
        let x = WeightMatrix::padded(&[vec![0.5, 0.2, 0.9], vec![0.1, 0.7, 0.3]]).unwrap();
        assert_eq!(x.n(), 3);
        assert_eq!(x.rows()[2], vec![0.0, 0.0, 0.0]);
        assert!(WeightMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
        assert!(WeightMatrix::from_rows(&[vec![-1.0]]).is_err());
    }
}
