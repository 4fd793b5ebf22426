use nalgebra::{DMatrix, Schur};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{check_len, normalize, normalize_into, Activation, MIN_DENOMINATOR};
use crate::error::{invalid, Error, Result};
use crate::graph::{
    classify_set, density, uniform_open_closed, AdjacencyMatrix, Density, NodeSet, SetClassification, WeightVector,
};

/// Jacobian of `x ↦ h(N(x))`, `J(x) = H(x) (W(x) - diag(x) A)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobianMatrix(pub DMatrix<f64>);

impl JacobianMatrix {
    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

pub fn jacobian(a: &AdjacencyMatrix, x: &[f64], h: &Activation) -> Result<JacobianMatrix> {
    check_len(a, x)?;
    let n = a.n();
    let h = h.compile();
    let mut j = DMatrix::zeros(n, n);
    for i in 0..n {
        let closed = a.closed_sum(x, i);
        if !(closed >= MIN_DENOMINATOR) {
            return Err(Error::NonNormalizable { node: i });
        }
        let scale = h.derivative(x[i] / closed) / (closed * closed);
        j[(i, i)] = scale * a.neighbor_sum(x, i);
        for &k in a.neighbors(i) {
            j[(i, k)] = -scale * x[i];
        }
    }
    Ok(JacobianMatrix(j))
}

/// Sweep cap for one real Schur attempt.
const SCHUR_MAX_SWEEPS: usize = 10_000;

/// Moduli of the eigenvalues of `j`, ascending, from a dense real Schur decomposition.
///
/// The shifted QR iteration can stall on matrices with many repeated
/// eigenvalues; when it does, the transpose and a few diagonal shifts
/// `J + cI` are tried instead. All moduli are NaN if every attempt stalls.
pub fn numeric_spectrum_moduli(j: &JacobianMatrix) -> Vec<f64> {
    let n = j.n();
    if n == 0 {
        return Vec::new();
    }
    let attempts = [
        (false, 0.0),
        (true, 0.0),
        (false, 0.5),
        (true, -0.5),
        (false, 1.75),
        (true, 3.25),
    ];
    for (transpose, shift) in attempts {
        let mut m = if transpose { j.0.transpose() } else { j.0.clone() };
        for i in 0..n {
            m[(i, i)] += shift;
        }
        if let Some(schur) = Schur::try_new(m, f64::EPSILON, SCHUR_MAX_SWEEPS) {
            let mut moduli: Vec<f64> = schur.complex_eigenvalues().iter().map(|z| (z - shift).norm()).collect();
            moduli.sort_by(f64::total_cmp);
            return moduli;
        }
    }
    vec![f64::NAN; n]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MisSpectrum {
    /// Eigenvalues with multiplicity, ascending: `|S|` zeros and
    /// `h'(0) / |N(i) ∩ S|` for every `i ∉ S`.
    pub spectrum: Vec<f64>,
    /// `h'(0) / dens(S)`.
    pub radius: f64,
}

/// Closed-form spectrum of the Jacobian at the indicator of a maximal independent set.
pub fn mis_spectral_radius(a: &AdjacencyMatrix, set: &NodeSet, h: &Activation) -> Result<MisSpectrum> {
    if classify_set(a, set) != SetClassification::MaximalIndependent {
        return Err(Error::NotMaximalIndependent);
    }
    let slope = h.derivative(0.0);
    let mut spectrum = vec![0.0; set.len()];
    for i in (0..a.n()).filter(|&i| !set.contains(i)) {
        let covered = a.neighbors(i).iter().filter(|&&j| set.contains(j)).count();
        spectrum.push(slope / covered as f64);
    }
    spectrum.sort_by(f64::total_cmp);
    let radius = match density(a, set) {
        Density::Finite(d) => slope / d as f64,
        Density::AllNodes => 0.0,
    };
    Ok(MisSpectrum { spectrum, radius })
}

/// Whether `x` lies in the region around `ind(S)` from which plain normalization
/// converges monotonically: `x_i > 1/2` on `S` and `x_i < 1/(2 d_S)` off `S`,
/// where `d_S` is the largest degree inside `S`.
pub fn in_fast_basin(a: &AdjacencyMatrix, set: &NodeSet, x: &[f64]) -> Result<bool> {
    check_len(a, x)?;
    if classify_set(a, set) != SetClassification::MaximalIndependent {
        return Err(Error::NotMaximalIndependent);
    }
    if let Density::Finite(d) = density(a, set) {
        if d < 2 {
            return Err(Error::DensityTooLow(d));
        }
    }
    let d_s = set.members().iter().map(|&i| a.degree(i)).max().unwrap_or(0);
    let bound = 1.0 / (2.0 * d_s as f64);
    Ok((0..a.n()).all(|i| if set.contains(i) { x[i] > 0.5 } else { x[i] < bound }))
}

fn require_connected_positive(a: &AdjacencyMatrix, x: &[f64]) -> Result<()> {
    check_len(a, x)?;
    if !a.is_connected() {
        return Err(Error::Disconnected);
    }
    if let Some(i) = x.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::ZeroWeight(i));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ql1Check {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluates `yᵀ (A + I) y <= ‖y‖₁` at `y = N(x)`.
pub fn check_ql1(a: &AdjacencyMatrix, x: &[f64]) -> Result<Ql1Check> {
    require_connected_positive(a, x)?;
    let y = normalize(a, x)?;
    let lhs: f64 = (0..a.n()).map(|i| y[i] * a.closed_sum(&y, i)).sum();
    let rhs = y.l1();
    Ok(Ql1Check {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

/// Implicit equation of the image of the unit cube under normalization of the
/// 3-node path: `uvw + uw - u - v - w + 1`.
pub fn taco_residual(u: f64, v: f64, w: f64) -> f64 {
    u * v * w + u * w - u - v - w + 1.0
}

/// Step size below which an iterate is treated as a fixed point.
const FIXED_POINT_STEP: f64 = 1e-13;

/// Runs `iters` plain normalization steps from `x0` and checks that the L1
/// norm never decreases (slack 1e-12) from the first iterate on, and strictly
/// increases on every step that moves the iterate by more than 1e-13.
pub fn l1_monotonicity_check(a: &AdjacencyMatrix, x0: &[f64], iters: usize) -> Result<bool> {
    require_connected_positive(a, x0)?;
    let mut x = normalize(a, x0)?.into_inner();
    let mut next = vec![0.0; x.len()];
    for _ in 1..iters {
        normalize_into(a, &x, &mut next)?;
        let mut increase = 0.0;
        let mut dist: f64 = 0.0;
        for (p, q) in x.iter().zip(&next) {
            increase += q - p;
            dist = dist.max((q - p).abs());
        }
        if increase < -1e-12 {
            return Ok(false);
        }
        if dist > FIXED_POINT_STEP && increase <= 0.0 {
            return Ok(false);
        }
        std::mem::swap(&mut x, &mut next);
    }
    Ok(true)
}

/// Monte-Carlo check that normalization on a tree separates non-proportional
/// positive weight vectors. Both inputs are scaled to unit L1 norm first.
pub fn tree_injectivity_probe(t: &AdjacencyMatrix, trials: usize, seed: u64) -> Result<bool> {
    if !t.is_tree() {
        return Err(Error::NotTree);
    }
    let n = t.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        let v: Vec<f64> = (0..n).map(|_| uniform_open_closed(rng)).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|e| e / s).collect::<Vec<_>>()
    };
    for _ in 0..trials {
        let x = draw(&mut rng);
        let z = draw(&mut rng);
        let gap = x.iter().zip(&z).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        if gap < 1e-12 {
            continue;
        }
        let (nx, nz) = (normalize(t, &x)?, normalize(t, &z)?);
        let image_gap = nx.iter().zip(nz.iter()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        if image_gap <= 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Starts the activated iteration at `base + eps·1` and returns the first
/// iteration whose iterate is farther than `radius` (max norm) from `base`.
pub fn repulsion_escape(
    a: &AdjacencyMatrix,
    base: &[f64],
    eps: f64,
    h: &Activation,
    radius: f64,
    max_iters: usize,
) -> Result<Option<usize>> {
    check_len(a, base)?;
    if !(eps > 0.0) {
        return Err(invalid("perturbation must be positive"));
    }
    let mut x: Vec<f64> = base.iter().map(|v| v + eps).collect();
    WeightVector::new(x.clone())?;
    let compiled = h.compile();
    let mut next = vec![0.0; x.len()];
    for k in 1..=max_iters {
        super::step_into(a, &x, &compiled, &mut next)?;
        std::mem::swap(&mut x, &mut next);
        let dist = x.iter().zip(base).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        if dist > radius {
            return Ok(Some(k));
        }
    }
    Ok(None)
}
