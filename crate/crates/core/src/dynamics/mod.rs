//! Graph normalization `x ↦ x ⊘ (A + I) x`, its activated variant and the
//! iteration loop, plus analysis tools for fixed points and conjectured
//! properties of the iteration.

mod activation;
mod analysis;

use serde::{Deserialize, Serialize};

pub use activation::{Activation, CompiledActivation, EvalMode};
pub use analysis::{
    check_ql1, in_fast_basin, jacobian, l1_monotonicity_check, mis_spectral_radius, numeric_spectrum_moduli,
    repulsion_escape, taco_residual, tree_injectivity_probe, JacobianMatrix, MisSpectrum, Ql1Check,
};

use crate::error::{invalid, Error, Result};
use crate::graph::{classify_set, AdjacencyMatrix, NodeSet, SetClassification, WeightVector};

/// Denominators below this are treated as zero.
pub const MIN_DENOMINATOR: f64 = 1e-300;

/// Threshold used to read a set off a converged weight vector.
pub const ROUNDING_THRESHOLD: f64 = 0.5;

fn check_len(a: &AdjacencyMatrix, x: &[f64]) -> Result<()> {
    if a.n() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: x.len(),
        });
    }
    Ok(())
}

/// Writes `N(x)` into `out`. Fails on the first vanishing denominator.
pub fn normalize_into(a: &AdjacencyMatrix, x: &[f64], out: &mut [f64]) -> Result<()> {
    check_len(a, x)?;
    for (i, o) in out.iter_mut().enumerate() {
        let denom = a.closed_sum(x, i);
        if !(denom >= MIN_DENOMINATOR) {
            return Err(Error::NonNormalizable { node: i });
        }
        *o = x[i] / denom;
    }
    Ok(())
}

/// Component `i` is `x_i / (x_i + Σ_j A_ij x_j)`.
pub fn normalize(a: &AdjacencyMatrix, x: &[f64]) -> Result<WeightVector> {
    let mut out = vec![0.0; x.len()];
    normalize_into(a, x, &mut out)?;
    Ok(WeightVector::new(out).expect("normalized weights lie in [0, 1]"))
}

/// One activated normalization step, `h(N(x))`.
pub fn step(a: &AdjacencyMatrix, x: &[f64], h: &Activation) -> Result<WeightVector> {
    let mut out = vec![0.0; x.len()];
    step_into(a, x, &h.compile(), &mut out)?;
    Ok(WeightVector::new(out).expect("activated weights lie in [0, 1]"))
}

pub fn step_into(a: &AdjacencyMatrix, x: &[f64], h: &CompiledActivation, out: &mut [f64]) -> Result<()> {
    normalize_into(a, x, out)?;
    for v in out.iter_mut() {
        *v = h.value(*v);
    }
    Ok(())
}

/// Step used inside the iteration: zero weights stay zero even when their
/// whole neighbourhood has underflowed to zero.
fn iterate_into(a: &AdjacencyMatrix, x: &[f64], h: &CompiledActivation, out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = if x[i] == 0.0 {
            0.0
        } else {
            h.value(x[i] / a.closed_sum(x, i))
        };
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingCriteria {
    /// Threshold on `max_i |x_i^{k+1} - x_i^k|`.
    pub epsilon: f64,
    /// Threshold on `max_i min(x_i, 1 - x_i)`; also at least one component must reach `1 - alpha`.
    pub alpha: f64,
    pub max_iters: usize,
}

impl StoppingCriteria {
    pub fn new(epsilon: f64, alpha: f64, max_iters: usize) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(invalid(format!("alpha must lie in (0, 1/2), got {alpha}")));
        }
        if max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        Ok(Self {
            epsilon,
            alpha,
            max_iters,
        })
    }
}

impl Default for StoppingCriteria {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            alpha: 1e-2,
            max_iters: 10_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    ConvergedBinary,
    SpeedOnly,
    MaxIters,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub final_weights: Vec<f64>,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub rounded_set: Option<NodeSet>,
    pub rounded_class: Option<SetClassification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1_trace: Option<Vec<f64>>,
    /// Every iterate, `x^0` first. Only kept when a trace was requested.
    #[serde(skip)]
    pub states: Option<Vec<Vec<f64>>>,
}

impl ConvergenceReport {
    pub fn converged(&self) -> bool {
        self.stop_reason == StopReason::ConvergedBinary
    }

    /// Trace as CSV rows `x_0, …, x_{n-1}, l1`, header included.
    pub fn trace_csv(&self) -> Option<String> {
        let states = self.states.as_ref()?;
        let n = self.final_weights.len();
        let mut out = (0..n).map(|i| format!("x_{i}")).collect::<Vec<_>>().join(",");
        out.push_str(if n == 0 { "l1\n" } else { ",l1\n" });
        for s in states {
            for v in s {
                out.push_str(&format!("{v:e},"));
            }
            out.push_str(&format!("{:e}\n", s.iter().sum::<f64>()));
        }
        Some(out)
    }
}

/// Binarity `max_i min(x_i, 1 - x_i)`.
pub fn binarity(x: &[f64]) -> f64 {
    x.iter().map(|&v| v.min(1.0 - v)).fold(0.0, f64::max)
}

/// Iterates `x ↦ h(N(x))` from `x0`.
///
/// Stops with `ConvergedBinary` once the step size is at most `epsilon`, the
/// iterate is within `alpha` of binary and some component is at least
/// `1 - alpha`; the rounded set is `{i : x_i >= 1/2}`. Otherwise the loop runs
/// to `max_iters` and reports `SpeedOnly` or `MaxIters`.
pub fn run_ign(
    a: &AdjacencyMatrix,
    x0: &[f64],
    h: &Activation,
    stop: &StoppingCriteria,
    record_trace: bool,
) -> Result<ConvergenceReport> {
    check_len(a, x0)?;
    WeightVector::new(x0.to_vec())?;
    if let Some(node) = (0..a.n()).find(|&i| !(a.closed_sum(x0, i) >= MIN_DENOMINATOR)) {
        return Err(Error::NonNormalizable { node });
    }
    let compiled = h.compile();
    let mut x = x0.to_vec();
    let mut next = vec![0.0; x.len()];
    let mut l1_trace = record_trace.then(|| vec![x.iter().sum::<f64>()]);
    let mut states = record_trace.then(|| vec![x.clone()]);

    let mut iterations = 0;
    let mut speed = f64::INFINITY;
    let mut converged = false;
    while iterations < stop.max_iters {
        iterate_into(a, &x, &compiled, &mut next);
        speed = x.iter().zip(&next).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        iterations += 1;
        if let Some(t) = l1_trace.as_mut() {
            t.push(x.iter().sum());
        }
        if let Some(s) = states.as_mut() {
            s.push(x.clone());
        }
        let top = x.iter().copied().fold(0.0, f64::max);
        if speed <= stop.epsilon && binarity(&x) <= stop.alpha && top >= 1.0 - stop.alpha {
            converged = true;
            break;
        }
    }

    let (stop_reason, rounded_set, rounded_class) = if converged {
        let set = NodeSet::from_threshold(&x, ROUNDING_THRESHOLD);
        let class = classify_set(a, &set);
        (StopReason::ConvergedBinary, Some(set), Some(class))
    } else if speed <= stop.epsilon {
        (StopReason::SpeedOnly, None, None)
    } else {
        (StopReason::MaxIters, None, None)
    };
    Ok(ConvergenceReport {
        final_weights: x,
        iterations,
        stop_reason,
        rounded_set,
        rounded_class,
        l1_trace,
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn normalize_p3() {
        let p3 = AdjacencyMatrix::path(3);
        let y = normalize(&p3, &[1.0, 1.0, 1.0]).unwrap();
        assert!(close(&y, &[0.5, 1.0 / 3.0, 0.5], 1e-15));
        let fixed = normalize(&p3, &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(fixed.as_slice(), &[1.0, 0.0, 1.0]);
        assert!(matches!(
            normalize(&p3, &[1.0, 0.0, 0.0]),
            Err(Error::NonNormalizable { node: 2 })
        ));
    }

    #[test]
    fn normalize_complete_graph_is_stochastic_projection() {
        let k5 = AdjacencyMatrix::complete(5);
        let x = [0.3, 1.2, 0.7, 2.0, 0.1];
        let total: f64 = x.iter().sum();
        let y = normalize(&k5, &x).unwrap();
        let expected: Vec<f64> = x.iter().map(|v| v / total).collect();
        assert!(close(&y, &expected, 1e-15));
    }

    #[test]
    fn step_examples() {
        let p3 = AdjacencyMatrix::path(3);
        let x = [0.2, 0.9, 0.4];
        assert_eq!(
            step(&p3, &x, &Activation::Identity).unwrap(),
            normalize(&p3, &x).unwrap()
        );
        for h in [
            Activation::Identity,
            Activation::power(2.0, 0.01).unwrap(),
            Activation::sigmoid(5.0).unwrap(),
        ] {
            assert_eq!(step(&p3, &[1.0, 0.0, 1.0], &h).unwrap().as_slice(), &[1.0, 0.0, 1.0]);
        }
        let k2 = AdjacencyMatrix::complete(2);
        let sq = step(&k2, &[1.0, 1.0], &Activation::power(2.0, 0.0).unwrap()).unwrap();
        assert!(close(&sq, &[0.25, 0.25], 1e-15));
    }

    #[test]
    fn ign_on_k10_finds_argmax() {
        let k10 = AdjacencyMatrix::complete(10);
        let x0: Vec<f64> = (1..=10).rev().map(f64::from).collect();
        let r = run_ign(
            &k10,
            &x0,
            &Activation::power(1.2, 0.0).unwrap(),
            &StoppingCriteria::default(),
            false,
        )
        .unwrap();
        assert_eq!(r.stop_reason, StopReason::ConvergedBinary);
        assert_eq!(r.rounded_set.unwrap().members(), &[0]);
    }

    #[test]
    fn ign_on_p3_identity() {
        let p3 = AdjacencyMatrix::path(3);
        let r = run_ign(
            &p3,
            &[1.0, 1.0, 1.0],
            &Activation::Identity,
            &StoppingCriteria::default(),
            true,
        )
        .unwrap();
        assert!(r.converged());
        assert_eq!(r.rounded_set.as_ref().unwrap().members(), &[0, 2]);
        assert_eq!(r.rounded_class, Some(SetClassification::MaximalIndependent));
        assert_eq!(r.l1_trace.as_ref().unwrap().len(), r.iterations + 1);
        let csv = r.trace_csv().unwrap();
        assert!(csv.starts_with("x_0,x_1,x_2,l1\n"));
        assert_eq!(csv.lines().count(), r.iterations + 2);
    }

    #[test]
    fn ign_in_basin_is_monotone() {
        let p3 = AdjacencyMatrix::path(3);
        let r = run_ign(
            &p3,
            &[0.6, 0.2, 0.7],
            &Activation::Identity,
            &StoppingCriteria::default(),
            true,
        )
        .unwrap();
        assert_eq!(r.rounded_set.as_ref().unwrap().members(), &[0, 2]);
        for w in r.states.unwrap().windows(2) {
            assert!(w[1][0] >= w[0][0] && w[1][2] >= w[0][2]);
            assert!(w[1][1] <= w[0][1]);
        }
        // activated variants: the off-set weight still shrinks every step
        for h in [Activation::power(2.0, 0.01).unwrap(), Activation::sigmoid(5.0).unwrap()] {
            let r = run_ign(&p3, &[0.6, 0.2, 0.7], &h, &StoppingCriteria::default(), true).unwrap();
            assert_eq!(r.rounded_set.as_ref().unwrap().members(), &[0, 2], "{h}");
            for w in r.states.unwrap().windows(2) {
                assert!(w[1][1] <= w[0][1], "{h}");
            }
        }
    }

    #[test]
    fn ign_reports_non_convergence() {
        let p3 = AdjacencyMatrix::path(3);
        let stop = StoppingCriteria::new(1e-6, 1e-2, 3).unwrap();
        let r = run_ign(&p3, &[1.0, 1.0, 1.0], &Activation::Identity, &stop, false).unwrap();
        assert_eq!(r.stop_reason, StopReason::MaxIters);
        assert!(r.rounded_set.is_none() && r.rounded_class.is_none());
        assert!(r.l1_trace.is_none());

        // K3 with tied maxima freezes at a non-binary point
        let k3 = AdjacencyMatrix::complete(3);
        let stop = StoppingCriteria::new(1e-6, 1e-2, 500).unwrap();
        let r = run_ign(
            &k3,
            &[1.0, 1.0, 0.5],
            &Activation::power(2.0, 0.0).unwrap(),
            &stop,
            false,
        )
        .unwrap();
        assert_eq!(r.stop_reason, StopReason::SpeedOnly);
    }

    #[test]
    fn ign_rejects_non_normalizable_start() {
        let p3 = AdjacencyMatrix::path(3);
        let err = run_ign(
            &p3,
            &[1.0, 0.0, 0.0],
            &Activation::Identity,
            &StoppingCriteria::default(),
            false,
        );
        assert!(matches!(err, Err(Error::NonNormalizable { .. })));
    }

    #[test]
    fn report_json_shape() {
        let p3 = AdjacencyMatrix::path(3);
        let r = run_ign(
            &p3,
            &[1.0, 1.0, 1.0],
            &Activation::Identity,
            &StoppingCriteria::default(),
            false,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["rounded_set"], serde_json::json!([0, 2]));
        assert_eq!(v["stop_reason"], "ConvergedBinary");
        assert_eq!(v["rounded_class"], "MaximalIndependent");
        assert!(v.get("l1_trace").is_none());
        assert!(v.get("states").is_none());
    }

    #[test]
    fn stopping_criteria_validation() {
        assert!(StoppingCriteria::new(0.0, 0.01, 10).is_err());
        assert!(StoppingCriteria::new(1e-6, 0.5, 10).is_err());
        assert!(StoppingCriteria::new(1e-6, 0.01, 0).is_err());
    }
}
