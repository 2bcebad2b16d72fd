//! Multi-start local search for the extremes of the diagonal entropy over a
//! product of unitary groups `U(d₁) × … × U(d_k)`.
//!
//! Each factor is parameterized as `exp(i H(θ))`, where `H(θ)` is the Hermitian
//! matrix whose `d²` real coordinates are the diagonal entries followed by the
//! real and imaginary parts of the strict upper triangle. Search is gradient
//! descent (central finite differences, Barzilai–Borwein step with Armijo
//! backtracking) followed by a coordinate-search polish.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{shannon_entropy, Bits};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::partition::{check_covering, PartitionLabel};
use crate::state::{permute_subsystems, DensityOperator};

/// Central finite-difference step on the generator coordinates.
pub const FD_STEP: f64 = 1e-5;
const ARMIJO: f64 = 1e-4;
const POLISH_START: f64 = 1e-3;
const MAX_POLISH_SWEEPS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Random starts; one identity start is always added on top.
    pub restarts: usize,
    pub max_iters: usize,
    pub step_tol: f64,
    pub obj_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 2000,
            step_tol: 1e-9,
            obj_tol: 1e-8,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::DomainError("optimizer needs at least one restart".into()));
        }
        if self.step_tol.is_nan() || self.step_tol <= 0.0 || self.obj_tol.is_nan() || self.obj_tol <= 0.0 {
            return Err(Error::DomainError("optimizer tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Max,
    Min,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Min => 1.0,
            Direction::Max => -1.0,
        }
    }
}

/// A point of `U(d₁) × … × U(d_k)` given by per-factor generator coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryPoint {
    pub dims: Vec<usize>,
    pub params: Vec<Vec<f64>>,
}

impl UnitaryPoint {
    pub fn identity(dims: &[usize]) -> Self {
        Self {
            dims: dims.to_vec(),
            params: dims.iter().map(|&d| vec![0.0; d * d]).collect(),
        }
    }

    /// Coordinates drawn uniformly from `[−π, π]`.
    pub fn random<R: Rng>(dims: &[usize], rng: &mut R) -> Self {
        use std::f64::consts::PI;
        Self {
            dims: dims.to_vec(),
            params: dims
                .iter()
                .map(|&d| (0..d * d).map(|_| rng.random_range(-PI..PI)).collect())
                .collect(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(Vec::len).sum()
    }

    fn flat(&self) -> Vec<f64> {
        self.params.concat()
    }

    fn from_flat(dims: &[usize], flat: &[f64]) -> Self {
        let mut params = Vec::with_capacity(dims.len());
        let mut at = 0;
        for &d in dims {
            params.push(flat[at..at + d * d].to_vec());
            at += d * d;
        }
        Self {
            dims: dims.to_vec(),
            params,
        }
    }

    pub fn factor_unitaries(&self) -> Result<Vec<ComplexMatrix>> {
        self.dims
            .iter()
            .zip(&self.params)
            .map(|(&d, theta)| linalg::expm_i_hermitian(&hermitian_from_params(d, theta)))
            .collect()
    }

    /// Kronecker product of the factor unitaries.
    pub fn unitary(&self) -> Result<ComplexMatrix> {
        let factors = self.factor_unitaries()?;
        let mut u = ComplexMatrix::identity(1, 1);
        for f in &factors {
            u = linalg::kron(&u, f);
        }
        Ok(u)
    }
}

/// Hermitian matrix with diagonal `θ[0..d]` and upper-triangle entries
/// `θ[d + 2m] + i θ[d + 2m + 1]` in row-major order of `(j, k)`, `j < k`.
pub fn hermitian_from_params(d: usize, theta: &[f64]) -> ComplexMatrix {
    assert_eq!(theta.len(), d * d, "generator needs d² coordinates");
    let mut h = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        h[(j, j)] = Complex64::new(theta[j], 0.0);
    }
    let mut at = d;
    for j in 0..d {
        for k in j + 1..d {
            let z = Complex64::new(theta[at], theta[at + 1]);
            h[(j, k)] = z;
            h[(k, j)] = z.conj();
            at += 2;
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartKind {
    Identity,
    Random,
}

/// Outcome of a single restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    pub index: usize,
    pub start: StartKind,
    /// Best diagonal entropy reached (bits, not sign-flipped).
    pub best: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationOutcome {
    pub direction: Direction,
    pub value: Bits,
    /// Achieving point, with factors ordered as the `parts` passed in.
    pub point: UnitaryPoint,
    pub restarts: Vec<RestartTrace>,
    /// False when every restart hit `max_iters` without meeting its stopping
    /// criterion; `value` is then the best found.
    pub converged: bool,
}

impl OptimizationOutcome {
    pub fn convergence_warning(&self) -> bool {
        !self.converged
    }
}

/// Diagonal entropy of `ρ` in the product basis given by the columns of `U`.
struct Objective<'a> {
    rho: &'a DensityOperator,
    dims: Vec<usize>,
}

impl Objective<'_> {
    fn eval(&self, flat: &[f64]) -> f64 {
        let point = UnitaryPoint::from_flat(&self.dims, flat);
        match point.unitary() {
            Ok(u) => shannon_entropy(&linalg::rotated_diagonal(self.rho.matrix(), &u)),
            Err(_) => f64::NAN,
        }
    }
}

/// Extremizes the diagonal entropy of `rho` over local unitaries `⊗_k U_k`, one
/// factor per entry of `parts`. The parts must partition all subsystems.
pub fn optimize_diag_entropy(
    rho: &DensityOperator,
    parts: &[PartitionLabel],
    direction: Direction,
    cfg: &OptimizerConfig,
) -> Result<OptimizationOutcome> {
    cfg.validate()?;
    if parts.is_empty() {
        return Err(Error::InvalidPartition("no parts given".into()));
    }
    check_covering(parts, rho.dims().len())?;

    // Diagonal entropy is invariant under relabeling of the computational basis, so
    // the subsystems can be reordered to make each part a contiguous factor.
    let dims: Vec<usize> = parts.iter().map(|p| rho.space().dim_of(p)).collect();
    let order: Vec<usize> = parts.iter().flat_map(|p| p.indices().iter().copied()).collect();
    let rho = permute_subsystems(rho, &order)?;
    let objective = Objective { rho: &rho, dims: dims.clone() };
    let sign = direction.sign();

    let runs: Vec<(RestartTrace, Vec<f64>)> = (0..=cfg.restarts)
        .into_par_iter()
        .map(|index| {
            let (start, x0) = if index == 0 {
                (StartKind::Identity, UnitaryPoint::identity(&dims).flat())
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(index as u64));
                (StartKind::Random, UnitaryPoint::random(&dims, &mut rng).flat())
            };
            let run = local_search(|x| sign * objective.eval(x), x0, cfg);
            let trace = RestartTrace {
                index,
                start,
                best: sign * run.fx,
                iterations: run.iterations,
                evaluations: run.evaluations,
                converged: run.converged,
            };
            (trace, run.x)
        })
        .collect();

    let (best_idx, _) = runs
        .iter()
        .enumerate()
        .filter(|(_, (t, _))| t.best.is_finite())
        .min_by(|(_, (a, _)), (_, (b, _))| (sign * a.best).total_cmp(&(sign * b.best)))
        .ok_or_else(|| Error::NumericalFailure("every restart produced a non-finite objective".into()))?;
    let value = runs[best_idx].0.best;
    let point = UnitaryPoint::from_flat(&dims, &runs[best_idx].1);
    let converged = runs.iter().any(|(t, _)| t.converged);
    Ok(OptimizationOutcome {
        direction,
        value: Bits::new(value),
        point,
        restarts: runs.into_iter().map(|(t, _)| t).collect(),
        converged,
    })
}

struct SearchRun {
    x: Vec<f64>,
    fx: f64,
    iterations: usize,
    evaluations: usize,
    converged: bool,
}

/// Minimizes `f` from `x0`.
fn local_search<F: Fn(&[f64]) -> f64>(f: F, x0: Vec<f64>, cfg: &OptimizerConfig) -> SearchRun {
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        f(x)
    };

    let mut x = x0;
    let mut fx = eval(&x);
    let mut converged = false;
    let mut iterations = 0;
    let mut step = 1.0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut small_moves = 0;

    let mut probe = x.clone();
    while iterations < cfg.max_iters {
        iterations += 1;
        let mut grad = vec![0.0; n];
        for i in 0..n {
            probe[i] = x[i] + FD_STEP;
            let up = eval(&probe);
            probe[i] = x[i] - FD_STEP;
            let down = eval(&probe);
            probe[i] = x[i];
            grad[i] = (up - down) / (2.0 * FD_STEP);
        }
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if !gnorm2.is_finite() {
            break;
        }
        if gnorm2.sqrt() < 1e-10 {
            converged = true;
            break;
        }

        if let Some((px, pg)) = prev.take() {
            let s: Vec<f64> = x.iter().zip(&px).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = grad.iter().zip(&pg).map(|(a, b)| a - b).collect();
            let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
            let ss: f64 = s.iter().map(|a| a * a).sum();
            step = if sy > 0.0 { (ss / sy).clamp(1e-8, 1e4) } else { (step * 4.0).min(1e4) };
        }

        // Armijo backtracking.
        let gnorm = gnorm2.sqrt();
        let mut accepted = None;
        while step * gnorm >= cfg.step_tol {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - step * gi).collect();
            let ft = eval(&trial);
            if ft <= fx - ARMIJO * step * gnorm2 {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, ft)) = accepted else {
            // No descent left above the step tolerance.
            converged = true;
            break;
        };
        let decrease = fx - ft;
        prev = Some((std::mem::replace(&mut x, trial), grad));
        probe.copy_from_slice(&x);
        fx = ft;
        if decrease < cfg.obj_tol {
            small_moves += 1;
            if small_moves >= 3 {
                converged = true;
                break;
            }
        } else {
            small_moves = 0;
        }
    }

    // Coordinate-search polish.
    let mut h = POLISH_START;
    let mut sweeps = 0;
    while h >= cfg.step_tol && sweeps < MAX_POLISH_SWEEPS {
        sweeps += 1;
        let mut improved = false;
        for i in 0..n {
            for delta in [h, -h] {
                let keep = x[i];
                x[i] = keep + delta;
                let ft = eval(&x);
                if ft < fx {
                    fx = ft;
                    improved = true;
                    break;
                }
                x[i] = keep;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }

    SearchRun {
        x,
        fx,
        iterations,
        evaluations,
        converged,
    }
}
