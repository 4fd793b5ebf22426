//! Browser demo: P3 orbits on the Taco surface, complete-graph traces and the
//! matrix sequence of iterative cross normalization.
//!
//! The `*_json` exports wrap plain functions that return serializable structs,
//! so everything except the JS boundary runs in native tests.

use rand::Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use ign_core::assignment::{cross_normalize, is_permutation_after_threshold, softassign, WeightMatrix};
use ign_core::baselines::hungarian;
use ign_core::dynamics::{normalize, run_ign, taco_residual, Activation, StopReason, StoppingCriteria};
use ign_core::graph::{instance_rng, uniform_open_closed, AdjacencyMatrix};
use ign_core::harness::{uniform_matrix, SINKHORN_MAX_ITERS, SINKHORN_TOLERANCE};

/// Size cap for the complete-graph trace.
pub const MAX_COMPLETE_N: usize = 200;
/// Size cap for the matrix demo; every iterate is kept.
pub const MAX_MATRIX_N: usize = 32;
pub const MAX_STEPS: usize = 10_000;

#[derive(Debug, Serialize)]
pub struct Orbit {
    /// Iterates `x^0, x^1, ...`.
    pub states: Vec<[f64; 3]>,
    /// Taco residual of `N(x^k)` for each state.
    pub residuals: Vec<f64>,
    pub rounded_set: Option<Vec<usize>>,
    pub stop_reason: StopReason,
}

#[derive(Debug, Serialize)]
pub struct CompleteTrace {
    pub n: usize,
    pub initial: Vec<f64>,
    /// One row per iterate.
    pub states: Vec<Vec<f64>>,
    pub argmax: usize,
    pub winner: Option<usize>,
    pub stop_reason: StopReason,
}

#[derive(Debug, Serialize)]
pub struct MatrixEvolution {
    pub n: usize,
    /// Row-major matrices: the uniform draw, the softassign output when a
    /// temperature is given, then every ICN iterate.
    pub matrices: Vec<Vec<f64>>,
    pub sa_iterations: usize,
    pub icn_iterations: usize,
    pub permutation: Option<Vec<usize>>,
    pub optimum: Vec<usize>,
    /// `(found - optimum) / optimum` for the original matrix.
    pub gap: Option<f64>,
}

fn stop(max_steps: usize) -> Result<StoppingCriteria, String> {
    let d = StoppingCriteria::default();
    StoppingCriteria::new(d.epsilon, d.alpha, max_steps.min(MAX_STEPS)).map_err(|e| e.to_string())
}

fn activation(spec: &str) -> Result<Activation, String> {
    spec.parse().map_err(|e: ign_core::Error| e.to_string())
}

pub fn p3_orbit(x0: [f64; 3], h: &str, max_steps: usize) -> Result<Orbit, String> {
    let h = activation(h)?;
    let p3 = AdjacencyMatrix::path(3);
    let report = run_ign(&p3, &x0, &h, &stop(max_steps)?, true).map_err(|e| e.to_string())?;
    let states: Vec<[f64; 3]> = report
        .states
        .unwrap_or_default()
        .iter()
        .map(|s| [s[0], s[1], s[2]])
        .collect();
    let residuals = states
        .iter()
        .map(|s| {
            normalize(&p3, s)
                .map(|y| taco_residual(y[0], y[1], y[2]))
                .unwrap_or(f64::NAN)
        })
        .collect();
    Ok(Orbit {
        states,
        residuals,
        rounded_set: report.rounded_set.map(|s| s.members().to_vec()),
        stop_reason: report.stop_reason,
    })
}

/// Images `N(x)` of uniform points of the unit cube, flattened `u, v, w` triples.
pub fn taco_cloud(count: usize, seed: u64) -> Vec<f64> {
    let p3 = AdjacencyMatrix::path(3);
    let mut rng = instance_rng(seed, 0);
    let mut out = Vec::with_capacity(3 * count);
    for _ in 0..count {
        let x: Vec<f64> = (0..3).map(|_| uniform_open_closed(&mut rng)).collect();
        out.extend(normalize(&p3, &x).expect("positive weights normalize").iter());
    }
    out
}

pub fn complete_trace(n: usize, h: &str, seed: u64, max_steps: usize) -> Result<CompleteTrace, String> {
    if !(2..=MAX_COMPLETE_N).contains(&n) {
        return Err(format!("n must be in 2..={MAX_COMPLETE_N}"));
    }
    let h = activation(h)?;
    let mut rng = instance_rng(seed, n as u64);
    let initial: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 0.98 + 0.01).collect();
    let argmax = (0..n).max_by(|&i, &j| initial[i].total_cmp(&initial[j])).unwrap();
    let report =
        run_ign(&AdjacencyMatrix::complete(n), &initial, &h, &stop(max_steps)?, true).map_err(|e| e.to_string())?;
    let winner = match report.rounded_set.as_ref().map(|s| s.members()) {
        Some(&[w]) => Some(w),
        _ => None,
    };
    Ok(CompleteTrace {
        n,
        initial,
        states: report.states.unwrap_or_default(),
        argmax,
        winner,
        stop_reason: report.stop_reason,
    })
}

pub fn matrix_evolution(
    n: usize,
    h: &str,
    tau: Option<f64>,
    seed: u64,
    max_steps: usize,
) -> Result<MatrixEvolution, String> {
    if !(1..=MAX_MATRIX_N).contains(&n) {
        return Err(format!("n must be in 1..={MAX_MATRIX_N}"));
    }
    let h = activation(h)?.compile();
    let original = uniform_matrix(n, &mut instance_rng(seed, n as u64));
    let (optimum, best) = hungarian(&original).map_err(|e| e.to_string())?;
    let mut matrices = vec![original.as_row_major().to_vec()];
    let mut x = original.clone();
    let mut sa_iterations = 0;
    if let Some(tau) = tau {
        let sa = softassign(&x, tau, SINKHORN_TOLERANCE, SINKHORN_MAX_ITERS).map_err(|e| e.to_string())?;
        sa_iterations = sa.iterations;
        x = sa.matrix;
        matrices.push(x.as_row_major().to_vec());
    }
    let mut permutation = is_permutation_after_threshold(&x);
    let mut icn_iterations = 0;
    while permutation.is_none() && icn_iterations < max_steps.min(MAX_STEPS) {
        let y = cross_normalize(&x).map_err(|e| e.to_string())?;
        let data = y.as_row_major().iter().map(|&v| h.value(v)).collect();
        x = WeightMatrix::from_row_major(n, data).map_err(|e| e.to_string())?;
        matrices.push(x.as_row_major().to_vec());
        icn_iterations += 1;
        permutation = is_permutation_after_threshold(&x);
    }
    let gap = permutation.as_ref().map(|p| (original.total_for(p) - best) / best);
    Ok(MatrixEvolution {
        n,
        matrices,
        sa_iterations,
        icn_iterations,
        permutation,
        optimum,
        gap,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = p3Orbit)]
pub fn p3_orbit_json(x0: f64, x1: f64, x2: f64, activation: &str, max_steps: usize) -> Result<String, JsError> {
    to_js(p3_orbit([x0, x1, x2], activation, max_steps))
}

#[wasm_bindgen(js_name = tacoCloud)]
pub fn taco_cloud_js(count: usize, seed: u64) -> Vec<f64> {
    taco_cloud(count.min(100_000), seed)
}

#[wasm_bindgen(js_name = completeTrace)]
pub fn complete_trace_json(n: usize, activation: &str, seed: u64, max_steps: usize) -> Result<String, JsError> {
    to_js(complete_trace(n, activation, seed, max_steps))
}

/// A non-positive `tau` skips softassign.
#[wasm_bindgen(js_name = matrixEvolution)]
pub fn matrix_evolution_json(
    n: usize,
    activation: &str,
    tau: f64,
    seed: u64,
    max_steps: usize,
) -> Result<String, JsError> {
    to_js(matrix_evolution(
        n,
        activation,
        (tau > 0.0).then_some(tau),
        seed,
        max_steps,
    ))
}
