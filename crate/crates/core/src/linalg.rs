//! Dense complex matrix helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row/column-major agnostic dense complex matrix. Shapes are checked by nalgebra.
pub type ComplexMatrix = DMatrix<Complex64>;

pub const C0: Complex64 = Complex64::new(0.0, 0.0);
pub const C1: Complex64 = Complex64::new(1.0, 0.0);
pub const CI: Complex64 = Complex64::new(0.0, 1.0);

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Largest absolute entry of `m - m†`.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest absolute entry of `u† u - I`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let g = u.adjoint() * u;
    let n = g.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C1 } else { C0 };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff on non-conforming shapes");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
///
/// Returns the eigenvalues and the unitary whose columns are the matching eigenvectors.
pub fn eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionError(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    // Symmetrize so round-off in the input cannot leak into the solver.
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::try_new(herm, 1e-15, 10_000).ok_or_else(|| {
        Error::NumericalFailure(format!("Hermitian eigensolver did not converge (n = {n})"))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// `exp(i H)` for Hermitian `H`, evaluated through its eigendecomposition so the
/// result is unitary to machine precision.
pub fn expm_i_hermitian(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (vals, vecs) = eigh(h)?;
    let phases = DVector::from_iterator(vals.len(), vals.iter().map(|&x| Complex64::cis(x)));
    let scaled = ComplexMatrix::from_fn(vecs.nrows(), vecs.ncols(), |i, j| vecs[(i, j)] * phases[j]);
    Ok(scaled * vecs.adjoint())
}

/// Real diagonal of `u† m u` without forming the full product.
pub fn rotated_diagonal(m: &ComplexMatrix, u: &ComplexMatrix) -> Vec<f64> {
    let mu = m * u;
    (0..u.ncols())
        .map(|k| {
            u.column(k)
                .iter()
                .zip(mu.column(k).iter())
                .map(|(a, b)| (a.conj() * b).re)
                .sum()
        })
        .collect()
}

/// Matrix square root of a positive semidefinite Hermitian matrix.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (vals, vecs) = eigh(m)?;
    let n = vals.len();
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| vecs[(i, j)] * vals[j].max(0.0).sqrt());
    Ok(scaled * vecs.adjoint())
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Pauli matrices X, Y, Z.
pub fn pauli() -> [ComplexMatrix; 3] {
    let x = ComplexMatrix::from_row_slice(2, 2, &[C0, C1, C1, C0]);
    let y = ComplexMatrix::from_row_slice(2, 2, &[C0, -CI, CI, C0]);
    let z = ComplexMatrix::from_row_slice(2, 2, &[C1, C0, C0, -C1]);
    [x, y, z]
}
