//! Reference algorithms: the minimum relative weighted degree greedy, an exact branch-and-bound MWIS oracle, the Hungarian method and the gap metric.

use serde::Serialize;

use crate::assignment::WeightMatrix;
use crate::error::{invalid, Error, Result};
use crate::graph::{NodeSet, WeightedGraph};

/// Node limit of [`brute_force_mwis`].
pub const BRUTE_FORCE_MAX_NODES: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MwisSolution {
    pub set: NodeSet,
    pub total_weight: f64,
}

/// Greedy: repeatedly take the surviving node of minimum relative weighted
/// degree `Σ_j A_ij x_j / x_i` (lowest index on ties), then delete it and its
/// neighbours. Degrees are recomputed on the surviving subgraph every round.
pub fn wg_greedy(g: &WeightedGraph) -> Result<MwisSolution> {
    let x = g.weights.as_slice();
    if let Some(i) = x.iter().position(|&w| !(w > 0.0)) {
        return Err(Error::ZeroWeight(i));
    }
    let a = &g.adjacency;
    let n = g.n();
    let mut alive = vec![true; n];
    let mut chosen = Vec::new();
    loop {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| alive[i]) {
            let degree: f64 = a.neighbors(i).iter().filter(|&&j| alive[j]).map(|&j| x[j]).sum::<f64>() / x[i];
            if best.is_none_or(|(_, d)| degree < d) {
                best = Some((i, degree));
            }
        }
        let Some((pick, _)) = best else { break };
        chosen.push(pick);
        alive[pick] = false;
        for &j in a.neighbors(pick) {
            alive[j] = false;
        }
    }
    chosen.sort_unstable();
    let set = NodeSet::new(n, chosen)?;
    let total_weight = set.total_weight(x);
    Ok(MwisSolution { set, total_weight })
}

fn tie_tolerance(w: f64) -> f64 {
    1e-12 * w.abs().max(1.0)
}

struct Search<'a> {
    weights: &'a [f64],
    closed: Vec<u32>,
    best: Vec<usize>,
    best_weight: f64,
    current: Vec<usize>,
}

impl Search<'_> {
    fn offer(&mut self, weight: f64) {
        let tol = tie_tolerance(self.best_weight);
        let better =
            weight > self.best_weight + tol || ((weight - self.best_weight).abs() <= tol && self.current < self.best);
        if better {
            self.best_weight = weight;
            self.best.clone_from(&self.current);
        }
    }

    fn explore(&mut self, candidates: u32, weight: f64) {
        if candidates == 0 {
            self.offer(weight);
            return;
        }
        let bound: f64 = weight
            + (0..32)
                .filter(|b| candidates >> b & 1 == 1)
                .map(|b| self.weights[b])
                .sum::<f64>();
        if bound < self.best_weight - tie_tolerance(self.best_weight) {
            return;
        }
        let v = candidates.trailing_zeros() as usize;
        self.current.push(v);
        self.explore(candidates & !self.closed[v], weight + self.weights[v]);
        self.current.pop();
        self.explore(candidates & !(1 << v), weight);
    }
}

/// Exact maximum weight independent set by branch and bound, for `n <= 24`.
/// Among optimal sets (within a relative 1e-12) the lexicographically smallest
/// sorted index list wins.
pub fn brute_force_mwis(g: &WeightedGraph) -> Result<MwisSolution> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::SizeGuard {
            what: "exact MWIS search",
            limit: BRUTE_FORCE_MAX_NODES,
            got: n,
        });
    }
    let closed = (0..n)
        .map(|i| {
            g.adjacency
                .neighbors(i)
                .iter()
                .fold(1u32 << i, |acc, &j| acc | (1 << j))
        })
        .collect();
    let mut search = Search {
        weights: g.weights.as_slice(),
        closed,
        best: Vec::new(),
        best_weight: 0.0,
        current: Vec::new(),
    };
    search.explore((1u32 << n) - 1, 0.0);
    let set = NodeSet::new(n, search.best)?;
    let total_weight = set.total_weight(g.weights.as_slice());
    Ok(MwisSolution { set, total_weight })
}

/// Maximum-weight perfect assignment by the Hungarian method with potentials,
/// `O(n^3)`. Returns `perm` with row `i` assigned to column `perm[i]`, and the
/// total weight.
pub fn hungarian(x: &WeightMatrix) -> Result<(Vec<usize>, f64)> {
    let n = x.n();
    if n == 0 {
        return Err(invalid("assignment of an empty matrix"));
    }
    // min-cost formulation on -X, 1-based with a sentinel column 0
    let cost = |i: usize, j: usize| -x.get(i - 1, j - 1);
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[row_of[j] - 1] = j - 1;
    }
    let total = perm.iter().enumerate().map(|(i, &j)| x.get(i, j)).sum();
    Ok((perm, total))
}

/// Signed relative gap `(w_test - w_ref) / w_ref`.
pub fn gap(w_test: f64, w_ref: f64) -> Result<f64> {
    if !(w_ref > 0.0) {
        return Err(invalid(format!("reference weight must be positive, got {w_ref}")));
    }
    Ok((w_test - w_ref) / w_ref)
}
