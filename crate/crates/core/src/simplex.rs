//! Dense two-phase simplex with Bland's rule, sized for the small linear
//! programs of the fixed-cluster search (a few dozen variables at most).

use serde::Serialize;

use crate::error::{invalid, Error, Result};

const PIVOT_TOLERANCE: f64 = 1e-9;
const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// `opt cᵗx` subject to `E x = e`, `L x <= l` and `x >= lower`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub eq_matrix: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub le_matrix: Vec<Vec<f64>>,
    pub le_rhs: Vec<f64>,
    pub lower: Vec<f64>,
}

impl LinearProgram {
    /// Program over `objective.len()` nonnegative variables with no constraints yet.
    pub fn new(objective: Vec<f64>, sense: Sense) -> Self {
        let n = objective.len();
        Self {
            objective,
            sense,
            eq_matrix: Vec::new(),
            eq_rhs: Vec::new(),
            le_matrix: Vec::new(),
            le_rhs: Vec::new(),
            lower: vec![0.0; n],
        }
    }

    pub fn equality(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.eq_matrix.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn at_most(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.le_matrix.push(row);
        self.le_rhs.push(rhs);
        self
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        let check = |got: usize, expected: usize| {
            if got == expected {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected, got })
            }
        };
        check(self.lower.len(), n)?;
        check(self.eq_rhs.len(), self.eq_matrix.len())?;
        check(self.le_rhs.len(), self.le_matrix.len())?;
        for row in self.eq_matrix.iter().chain(&self.le_matrix) {
            check(row.len(), n)?;
        }
        let finite = self
            .objective
            .iter()
            .chain(&self.eq_rhs)
            .chain(&self.le_rhs)
            .chain(&self.lower)
            .chain(self.eq_matrix.iter().flatten())
            .chain(self.le_matrix.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("linear program has non-finite coefficients"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Option<Vec<f64>>,
    pub objective: Option<f64>,
}

impl LpSolution {
    fn without(status: LpStatus) -> Self {
        Self {
            status,
            x: None,
            objective: None,
        }
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        self.rhs[r] /= p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for k in 0..self.rows.len() {
            let f = self.rows[k][c];
            if k != r && f != 0.0 {
                for (v, pv) in self.rows[k].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.rhs[k] -= f * pivot_rhs;
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost` over columns `0..allowed`. Returns false when unbounded.
    fn minimize(&mut self, cost: &[f64], allowed: usize) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let reduced = |j: usize| {
                cost[j]
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &b)| cost[b] * row[j])
                        .sum::<f64>()
            };
            let Some(enter) = (0..allowed).find(|&j| !self.basis.contains(&j) && reduced(j) < -PIVOT_TOLERANCE) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][enter];
                if a > PIVOT_TOLERANCE {
                    let ratio = self.rhs[r] / a;
                    let better = match leave {
                        None => true,
                        Some((l, best)) => {
                            ratio < best - PIVOT_TOLERANCE
                                || (ratio <= best + PIVOT_TOLERANCE && self.basis[r] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { return Ok(false) };
            self.pivot(r, enter);
        }
        Err(invalid("simplex exceeded its pivot budget"))
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        self.basis.iter().zip(&self.rhs).map(|(&b, v)| cost[b] * v).sum()
    }
}

/// Solves `lp` to a vertex optimum. Phase one minimizes the sum of one
/// artificial variable per row; phase two optimizes the objective.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.n_vars();
    let n_le = lp.le_matrix.len();
    let m = lp.eq_matrix.len() + n_le;
    let cols = n + n_le + m;

    // shift x = x' + lower so every variable is nonnegative
    let shifted = |row: &[f64], rhs: f64| rhs - row.iter().zip(&lp.lower).map(|(a, l)| a * l).sum::<f64>();
    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
    };
    let constraints = lp
        .eq_matrix
        .iter()
        .zip(&lp.eq_rhs)
        .map(|(row, &b)| (row, b, None))
        .chain(
            lp.le_matrix
                .iter()
                .zip(&lp.le_rhs)
                .enumerate()
                .map(|(k, (row, &b))| (row, b, Some(n + k))),
        );
    for (r, (row, b, slack)) in constraints.enumerate() {
        let mut full = vec![0.0; cols];
        full[..n].copy_from_slice(row);
        if let Some(s) = slack {
            full[s] = 1.0;
        }
        let mut rhs = shifted(row, b);
        if rhs < 0.0 {
            full.iter_mut().for_each(|v| *v = -*v);
            rhs = -rhs;
        }
        full[n + n_le + r] = 1.0;
        tab.rows.push(full);
        tab.rhs.push(rhs);
        tab.basis.push(n + n_le + r);
    }

    let mut phase_one = vec![0.0; cols];
    phase_one[n + n_le..].iter_mut().for_each(|v| *v = 1.0);
    tab.minimize(&phase_one, cols)?;
    let scale = 1.0 + tab.rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if tab.objective(&phase_one) > PIVOT_TOLERANCE * scale {
        return Ok(LpSolution::without(LpStatus::Infeasible));
    }

    // drive remaining artificials out of the basis, dropping redundant rows
    let structural = n + n_le;
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= structural {
            match (0..structural).find(|&j| tab.rows[r][j].abs() > PIVOT_TOLERANCE) {
                Some(j) => tab.pivot(r, j),
                None => {
                    tab.rows.remove(r);
                    tab.rhs.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut cost = vec![0.0; cols];
    for (c, o) in cost.iter_mut().zip(&lp.objective) {
        *c = sign * o;
    }
    if !tab.minimize(&cost, structural)? {
        return Ok(LpSolution::without(LpStatus::Unbounded));
    }
    let mut x = lp.lower.clone();
    for (&b, v) in tab.basis.iter().zip(&tab.rhs) {
        if b < n {
            x[b] += v;
        }
    }
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x: Some(x),
        objective: Some(objective),
    })
}
