//! Two-qubit concurrence and entanglement of formation (Wootters).

use num_complex::Complex64;
use serde::Serialize;

use crate::entropy::{binary_entropy, Bits};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::state::DensityOperator;

/// Concurrence values at or below this are reported as exactly zero.
const ZERO_CONCURRENCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcurrenceResult {
    pub concurrence: f64,
    pub e_f: Bits,
}

/// `E_f = H₂((1 + √(1 − C²))/2)`.
pub fn entanglement_of_formation(c: f64) -> Result<Bits> {
    if !(0.0..=1.0 + 1e-12).contains(&c) {
        return Err(Error::DomainError(format!("concurrence {c} outside [0,1]")));
    }
    let c = c.min(1.0);
    if c == 0.0 {
        return Ok(Bits::ZERO);
    }
    binary_entropy((1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0)
}

/// `C = max(0, λ₁ − λ₂ − λ₃ − λ₄)` where `λᵢ²` are the descending eigenvalues of
/// `ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
///
/// The `λᵢ` are taken as the singular values of `√ρ √ρ̃` with
/// `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`, which avoids square roots of tiny,
/// noise-dominated eigenvalues near the separable boundary.
pub fn concurrence(rho: &DensityOperator) -> Result<ConcurrenceResult> {
    if rho.dims() != [2, 2] {
        return Err(Error::DimensionError(format!(
            "concurrence needs two qubits, got dims {:?}",
            rho.dims()
        )));
    }
    let yy = linalg::kron(&linalg::pauli()[1], &linalg::pauli()[1]);
    let root = linalg::sqrt_psd(rho.matrix())?;
    let root_conj: ComplexMatrix = root.map(|z: Complex64| z.conj());
    let root_flipped = &yy * root_conj * &yy;
    let product = &root * root_flipped;
    let svd = product
        .try_svd(false, false, 1e-15, 10_000)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let mut lambdas: Vec<f64> = svd.singular_values.iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let raw = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    let c = if raw <= ZERO_CONCURRENCE { 0.0 } else { raw.min(1.0) };
    Ok(ConcurrenceResult {
        concurrence: c,
        e_f: entanglement_of_formation(c)?,
    })
}
