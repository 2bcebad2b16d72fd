//! Entropy functionals in bits: von Neumann, diagonal (measurement-outcome),
//! relative, binary, and the coherent entropy `log₂ d − S(ρ)`.

use std::fmt;
use std::ops::{Add, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::optimize::{self, Direction, OptimizerConfig, RestartTrace};
use crate::partition::PartitionLabel;
use crate::state::{DensityOperator, Spectrum};

/// Probabilities at or below this are treated as exact zeros in `p log p`.
pub const ZERO_PROB: f64 = 1e-14;
/// Tolerance on basis unitarity.
pub const TOL_UNITARY: f64 = 1e-9;
/// Eigenvalue threshold defining the support of a density operator.
pub const SUPPORT_EPS: f64 = 1e-12;

/// An amount of information in bits. Values within `1e-9` below zero are clamped to zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bits(f64);

impl Bits {
    pub const ZERO: Bits = Bits(0.0);

    pub fn new(value: f64) -> Self {
        // Also folds -0.0 into 0.0.
        if (-1e-9..=0.0).contains(&value) {
            Bits(0.0)
        } else {
            Bits(value)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Bits> for f64 {
    fn from(b: Bits) -> f64 {
        b.0
    }
}

impl Add for Bits {
    type Output = Bits;
    fn add(self, rhs: Bits) -> Bits {
        Bits(self.0 + rhs.0)
    }
}

impl Sub for Bits {
    type Output = f64;
    fn sub(self, rhs: Bits) -> f64 {
        self.0 - rhs.0
    }
}

impl std::iter::Sum for Bits {
    fn sum<I: Iterator<Item = Bits>>(iter: I) -> Bits {
        Bits(iter.map(|b| b.0).sum())
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// `−Σ p log₂ p` over a probability vector, skipping entries `≤ ZERO_PROB`.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > ZERO_PROB)
        .map(|&p| p * p.log2())
        .sum::<f64>()
        + 0.0
}

/// `S(ρ) = −Tr ρ log₂ ρ`.
pub fn von_neumann(rho: &DensityOperator) -> Result<Bits> {
    Ok(Bits::new(shannon_entropy(&rho.eigenvalues()?)))
}

/// Shannon entropy of the diagonal of `U† ρ U`; the columns of `basis` are the
/// measurement outcomes. `None` means the computational basis.
pub fn diagonal_entropy(rho: &DensityOperator, basis: Option<&ComplexMatrix>) -> Result<Bits> {
    let probs = match basis {
        None => rho.diagonal_probs(),
        Some(u) => {
            if u.nrows() != rho.dim() || u.ncols() != rho.dim() {
                return Err(Error::InvalidBasis(format!(
                    "basis is {}x{}, state has dimension {}",
                    u.nrows(),
                    u.ncols(),
                    rho.dim()
                )));
            }
            let defect = linalg::unitarity_defect(u);
            if defect > TOL_UNITARY {
                return Err(Error::InvalidBasis(format!("not unitary (defect {defect:.3e})")));
            }
            linalg::rotated_diagonal(rho.matrix(), u)
        }
    };
    Ok(Bits::new(shannon_entropy(&probs)))
}

/// Quantum relative entropy `S(a‖b) = Tr[a (log₂ a − log₂ b)]`.
///
/// Fails with [`Error::InfiniteRelativeEntropy`] when `a` has weight outside the
/// support of `b` (eigenvalues of `b` at or below `1e-12`).
pub fn relative_entropy(a: &DensityOperator, b: &DensityOperator) -> Result<Bits> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionError(format!(
            "relative entropy between dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let sb = b.spectrum()?;
    // ⟨b_j| a |b_j⟩ for each eigenvector of b.
    let weights = linalg::rotated_diagonal(a.matrix(), &sb.eigenvectors);
    let mut cross = 0.0;
    let mut leaked = 0.0;
    for (w, &lam) in weights.iter().zip(&sb.eigenvalues) {
        if lam > SUPPORT_EPS {
            cross += w * lam.log2();
        } else {
            leaked += w.max(0.0);
        }
    }
    if leaked > SUPPORT_EPS {
        return Err(Error::InfiniteRelativeEntropy);
    }
    let neg_entropy_a = -shannon_entropy(&a.eigenvalues()?);
    Ok(Bits::new(neg_entropy_a - cross))
}

/// `S_c(ρ) = log₂ d − S(ρ)`.
pub fn coherent_entropy(rho: &DensityOperator) -> Result<Bits> {
    let s = von_neumann(rho)?;
    Ok(Bits::new((rho.dim() as f64).log2() - s.value()))
}

/// `H₂(x) = −x log₂ x − (1−x) log₂(1−x)`.
pub fn binary_entropy(x: f64) -> Result<Bits> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::DomainError(format!("binary entropy argument {x} outside [0,1]")));
    }
    Ok(Bits::new(shannon_entropy(&[x, 1.0 - x])))
}

/// The basis `|φ_k⟩ = d^{-1/2} Σ_j e^{2πi jk/d} |r_j⟩` built from the eigenvectors
/// `|r_j⟩`, returned as the unitary whose columns are the `|φ_k⟩`. Every diagonal
/// element of the state in this basis equals `1/d`.
pub fn equalizing_basis(spec: &Spectrum) -> ComplexMatrix {
    let d = spec.dim();
    let norm = 1.0 / (d as f64).sqrt();
    let fourier = ComplexMatrix::from_fn(d, d, |j, k| {
        // Reduce jk mod d before scaling so large d keeps full phase accuracy.
        let phase = 2.0 * std::f64::consts::PI * ((j * k) % d) as f64 / d as f64;
        Complex64::from_polar(norm, phase)
    });
    &spec.eigenvectors * fourier
}

/// Result of extremizing the diagonal entropy over the full unitary group.
#[derive(Debug, Clone, Serialize)]
pub struct ExtremalEntropy {
    pub max_diag: Bits,
    pub min_diag: Bits,
    /// `max_diag − min_diag`.
    pub sc: Bits,
    /// False when no restart of either search met its convergence criterion.
    pub converged: bool,
    pub max_trace: Vec<RestartTrace>,
    pub min_trace: Vec<RestartTrace>,
}

/// Coherent entropy by brute-force extremization of the diagonal entropy over U(d).
///
/// Redundant with [`coherent_entropy`]; it exists as an independent check of the
/// closed form.
pub fn coherent_entropy_extremal(
    rho: &DensityOperator,
    cfg: &OptimizerConfig,
) -> Result<ExtremalEntropy> {
    let whole = [PartitionLabel::all(rho.dims().len())];
    let max = optimize::optimize_diag_entropy(rho, &whole, Direction::Max, cfg)?;
    let min = optimize::optimize_diag_entropy(rho, &whole, Direction::Min, cfg)?;
    Ok(ExtremalEntropy {
        max_diag: max.value,
        min_diag: min.value,
        sc: Bits::new(max.value - min.value),
        converged: max.converged && min.converged,
        max_trace: max.restarts,
        min_trace: min.restarts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::PartitionLabel;
    use crate::state::{bloch_state, make_named_state, random_density, StateName};

    #[test]
    fn von_neumann_basics() {
        let pure = random_density(4, 1, 1).unwrap();
        assert!(von_neumann(&pure).unwrap().value().abs() < 1e-9);
        for d in 2..6 {
            let m = make_named_state(&StateName::MaximallyMixed(d)).unwrap();
            assert!((von_neumann(&m).unwrap().value() - (d as f64).log2()).abs() < 1e-12);
        }
        let w = make_named_state(&StateName::W3).unwrap();
        let a = w.partial_trace(&PartitionLabel::single(0, 3).unwrap()).unwrap();
        // Printed as 0.918 in the W table.
        assert!((von_neumann(&a).unwrap().value() - 0.918).abs() < 5e-4);
    }

    #[test]
    fn diagonal_entropy_cases() {
        let rho = DensityOperator::diagonal(&[0.5, 0.3, 0.2]).unwrap();
        assert!((diagonal_entropy(&rho, None).unwrap() - von_neumann(&rho).unwrap()).abs() < 1e-12);

        // |↑⟩ measured along σˣ.
        let up = bloch_state([0.0, 0.0, 1.0]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let hadamard = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(h, 0.0),
                Complex64::new(h, 0.0),
                Complex64::new(h, 0.0),
                Complex64::new(-h, 0.0),
            ],
        );
        assert!((diagonal_entropy(&up, Some(&hadamard)).unwrap().value() - 1.0).abs() < 1e-12);

        let not_unitary = ComplexMatrix::identity(2, 2).scale(2.0);
        assert!(matches!(
            diagonal_entropy(&up, Some(&not_unitary)),
            Err(Error::InvalidBasis(_))
        ));
    }

    #[test]
    fn relative_entropy_cases() {
        let rho = random_density(3, 3, 4).unwrap();
        assert!(relative_entropy(&rho, &rho).unwrap().value().abs() < 1e-10);

        // S(ρ ‖ ρ̃) = S(ρ̃) − S(ρ) for ρ̃ the dephased state.
        let dephased = DensityOperator::diagonal(&rho.diagonal_probs()).unwrap();
        let lhs = relative_entropy(&rho, &dephased).unwrap().value();
        let rhs = diagonal_entropy(&rho, None).unwrap() - von_neumann(&rho).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);

        let a = DensityOperator::diagonal(&[0.5, 0.5]).unwrap();
        let b = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        let oracle = -1.0 - (0.5 * 0.8f64.log2() + 0.5 * 0.2f64.log2());
        assert!((relative_entropy(&a, &b).unwrap().value() - oracle).abs() < 1e-12);

        let pure = bloch_state([0.0, 0.0, 1.0]).unwrap();
        assert_eq!(relative_entropy(&a, &pure), Err(Error::InfiniteRelativeEntropy));
    }

    #[test]
    fn coherent_entropy_cases() {
        let bell = make_named_state(&StateName::Bell).unwrap();
        assert!((coherent_entropy(&bell).unwrap().value() - 2.0).abs() < 1e-12);
        let m = make_named_state(&StateName::MaximallyMixed(5)).unwrap();
        assert!(coherent_entropy(&m).unwrap().value().abs() < 1e-12);
        let w = make_named_state(&StateName::W3).unwrap();
        let a = w.partial_trace(&PartitionLabel::single(1, 3).unwrap()).unwrap();
        assert!((coherent_entropy(&a).unwrap().value() - 0.082).abs() < 5e-4);
    }

    #[test]
    fn binary_entropy_cases() {
        assert!((binary_entropy(0.5).unwrap().value() - 1.0).abs() < 1e-15);
        assert_eq!(binary_entropy(0.0).unwrap().value(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap().value(), 0.0);
        let x = (1.0 + 5f64.sqrt() / 3.0) / 2.0;
        assert!((binary_entropy(x).unwrap().value() - 0.550).abs() < 5e-4);
        assert!(matches!(binary_entropy(1.5), Err(Error::DomainError(_))));
        assert!(matches!(binary_entropy(-0.1), Err(Error::DomainError(_))));
        assert_eq!(binary_entropy(0.3).unwrap(), binary_entropy(0.7).unwrap());
    }

    #[test]
    fn equalizing_basis_flattens_diagonal() {
        let rho = random_density(5, 5, 21).unwrap();
        let u = equalizing_basis(&rho.spectrum().unwrap());
        assert!(linalg::unitarity_defect(&u) < 1e-12);
        for p in linalg::rotated_diagonal(rho.matrix(), &u) {
            assert!((p - 0.2).abs() < 1e-12);
        }
        assert!((diagonal_entropy(&rho, Some(&u)).unwrap().value() - 5f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn equalizing_basis_qubit_closed_form() {
        let rho = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        let u = equalizing_basis(&rho.spectrum().unwrap());
        // Eigenvectors are ±e_0, ±e_1; columns must be (e_0 ± e_1)/√2 up to phases.
        for k in 0..2 {
            for j in 0..2 {
                assert!((u[(j, k)].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
            }
        }
        let diag = linalg::rotated_diagonal(rho.matrix(), &u);
        assert!((diag[0] - 0.5).abs() < 1e-12 && (diag[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn equalizing_basis_on_maximally_mixed() {
        let m = make_named_state(&StateName::MaximallyMixed(4)).unwrap();
        let u = equalizing_basis(&m.spectrum().unwrap());
        for p in linalg::rotated_diagonal(m.matrix(), &u) {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn bits_clamp() {
        assert_eq!(Bits::new(-5e-10).value(), 0.0);
        assert_eq!(Bits::new(-1e-3).value(), -1e-3);
        assert_eq!((Bits::new(1.0) + Bits::new(0.5)).value(), 1.5);
    }
}
