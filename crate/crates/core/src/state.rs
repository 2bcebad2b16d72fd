//! Density operators on tensor-product Hilbert spaces.
//!
//! Subsystem order is positional: factor 0 is the most significant digit of the
//! computational-basis index, matching the Kronecker product convention.
//! Marginals keep the original relative order of the factors they retain.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C0, C1};
use crate::partition::PartitionLabel;

/// Tolerance on Hermiticity and unit trace when validating a density operator.
pub const TOL_HERM: f64 = 1e-10;
/// Eigenvalues down to `-TOL_PSD` are accepted and clamped to zero.
pub const TOL_PSD: f64 = 1e-10;

/// Ordered subsystem dimensions `d_1 … d_n`, each at least 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpec {
    dims: Vec<usize>,
}

impl HilbertSpec {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidState("at least one subsystem is required".into()));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidState(format!("subsystem dimension {d} < 2")));
        }
        Ok(Self { dims })
    }

    pub fn qubits(n: usize) -> Self {
        Self::new(vec![2; n]).expect("n >= 1 qubits")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_parts(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Product of the dimensions of the selected subsystems.
    pub fn dim_of(&self, label: &PartitionLabel) -> usize {
        label.indices().iter().map(|&i| self.dims[i]).product()
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims }
    }

    pub fn restrict(&self, label: &PartitionLabel) -> Self {
        Self {
            dims: label.indices().iter().map(|&i| self.dims[i]).collect(),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace operator on a [`HilbertSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    space: HilbertSpec,
    mat: ComplexMatrix,
}

/// Descending eigenvalues (nonnegative, summing to one) and matching eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl DensityOperator {
    /// Validates `mat` against the density-operator invariants.
    pub fn new(space: HilbertSpec, mat: ComplexMatrix) -> Result<Self> {
        let d = space.total_dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{} but dims {:?} need {d}x{d}",
                mat.nrows(),
                mat.ncols(),
                space.dims()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("matrix has non-finite entries".into()));
        }
        let herm = linalg::hermiticity_defect(&mat);
        if herm > TOL_HERM {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:.3e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TOL_HERM || tr.im.abs() > TOL_HERM {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let mat = (&mat + mat.adjoint()).scale(0.5);
        let (vals, vecs) = linalg::eigh(&mat)?;
        let min = vals.last().copied().unwrap_or(0.0);
        if min < -TOL_PSD {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        let mat = if min < 0.0 {
            let total: f64 = vals.iter().map(|v| v.max(0.0)).sum();
            let lam = DVector::from_iterator(
                d,
                vals.iter().map(|v| Complex64::new(v.max(0.0) / total, 0.0)),
            );
            &vecs * ComplexMatrix::from_diagonal(&lam) * vecs.adjoint()
        } else {
            mat
        };
        Ok(Self { space, mat })
    }

    /// Single-factor state of dimension `mat.nrows()`.
    pub fn from_matrix(mat: ComplexMatrix) -> Result<Self> {
        let space = HilbertSpec::new(vec![mat.nrows()])?;
        Self::new(space, mat)
    }

    /// `|ψ⟩⟨ψ|` for a normalized (or normalizable) amplitude vector.
    pub fn from_pure(space: HilbertSpec, amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::InvalidState(format!(
                "{} amplitudes for a space of dimension {}",
                amplitudes.len(),
                space.total_dim()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let psi = DVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|a| a / norm));
        let mat = &psi * psi.adjoint();
        Self::new(space, mat)
    }

    pub fn maximally_mixed(space: HilbertSpec) -> Self {
        let d = space.total_dim();
        let mat = ComplexMatrix::identity(d, d).scale(1.0 / d as f64);
        Self { space, mat }
    }

    /// Diagonal state with the given probabilities on a single factor.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        check_distribution(probs)?;
        let space = HilbertSpec::new(vec![probs.len()])?;
        let mat = ComplexMatrix::from_diagonal(&DVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| Complex64::new(p, 0.0)),
        ));
        Self::new(space, mat)
    }

    pub fn space(&self) -> &HilbertSpec {
        &self.space
    }

    pub fn dims(&self) -> &[usize] {
        self.space.dims()
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// Re-labels the tensor structure without touching the matrix.
    pub fn with_space(&self, space: HilbertSpec) -> Result<Self> {
        if space.total_dim() != self.dim() {
            return Err(Error::DimensionError(format!(
                "dims {:?} do not multiply to {}",
                space.dims(),
                self.dim()
            )));
        }
        Ok(Self {
            space,
            mat: self.mat.clone(),
        })
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionError(format!(
                "unitary is {}x{}, state has dimension {}",
                u.nrows(),
                u.ncols(),
                self.dim()
            )));
        }
        let mat = u * &self.mat * u.adjoint();
        Self::new(self.space.clone(), (&mat + mat.adjoint()).scale(0.5))
    }

    /// Convex combination `t·a + (1−t)·b`.
    pub fn mix(t: f64, a: &Self, b: &Self) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::DomainError(format!("mixing weight {t} outside [0,1]")));
        }
        if a.space != b.space {
            return Err(Error::DimensionError("mixing states on different spaces".into()));
        }
        Self::new(a.space.clone(), a.mat.scale(t) + b.mat.scale(1.0 - t))
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        eig_hermitian(self)
    }

    /// Eigenvalues only, descending and clamped at zero.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eig_hermitian(self)?.eigenvalues)
    }

    /// Marginal on the subsystems in `keep`.
    pub fn partial_trace(&self, keep: &PartitionLabel) -> Result<Self> {
        partial_trace(self, keep)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        tensor(self, other)
    }

    /// Diagonal entries in the computational basis.
    pub fn diagonal_probs(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    pub fn to_json(&self) -> DensityJson {
        DensityJson {
            dims: self.space.dims().to_vec(),
            matrix: (0..self.dim())
                .map(|i| (0..self.dim()).map(|j| [self.mat[(i, j)].re, self.mat[(i, j)].im]).collect())
                .collect(),
        }
    }

    pub fn from_json(json: &DensityJson) -> Result<Self> {
        let space = HilbertSpec::new(json.dims.clone())?;
        let mat = matrix_from_json(&json.matrix)?;
        Self::new(space, mat)
    }
}

/// Wire format: `{ "dims": [...], "matrix": [[[re, im], ...], ...] }`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityJson {
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse("matrix has no rows".into()));
    }
    let m = rows[0].len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
        return Err(Error::Parse(format!("row {i} has {} entries, expected {m}", r.len())));
    }
    Ok(ComplexMatrix::from_fn(n, m, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

impl Serialize for DensityOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = DensityJson::deserialize(d)?;
        Self::from_json(&json).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_distribution(probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidState(format!("{probs:?} has negative or non-finite entries")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!("{probs:?} sums to {total}, expected 1")));
    }
    Ok(())
}

/// Kronecker product of two states; subsystem lists are concatenated.
pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> DensityOperator {
    DensityOperator {
        space: a.space.concat(&b.space),
        mat: linalg::kron(&a.mat, &b.mat),
    }
}

/// Traces out every subsystem not in `keep`.
pub fn partial_trace(rho: &DensityOperator, keep: &PartitionLabel) -> Result<DensityOperator> {
    let dims = rho.dims();
    let n = dims.len();
    if keep.is_empty() {
        return Err(Error::InvalidPartition("keep set is empty".into()));
    }
    if let Some(&bad) = keep.indices().iter().find(|&&i| i >= n) {
        return Err(Error::InvalidPartition(format!(
            "subsystem {bad} out of range for {n} parts"
        )));
    }
    if keep.len() == n {
        return Ok(rho.clone());
    }
    let traced: Vec<usize> = (0..n).filter(|&i| !keep.contains(i)).collect();

    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    // Offsets in the full index contributed by every multi-index of a factor group.
    let offsets = |group: &[usize]| -> Vec<usize> {
        let mut offs = vec![0usize];
        for &k in group {
            let mut next = Vec::with_capacity(offs.len() * dims[k]);
            for &o in &offs {
                for digit in 0..dims[k] {
                    next.push(o + digit * strides[k]);
                }
            }
            offs = next;
        }
        offs
    };
    let kept_offsets = offsets(keep.indices());
    let traced_offsets = offsets(&traced);

    let dk = kept_offsets.len();
    let full = rho.matrix();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for (r, &ro) in kept_offsets.iter().enumerate() {
        for (c, &co) in kept_offsets.iter().enumerate() {
            let mut acc = C0;
            for &t in &traced_offsets {
                acc += full[(ro + t, co + t)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(DensityOperator {
        space: rho.space.restrict(keep),
        mat: out,
    })
}

/// Reorders subsystems so that new factor `k` is old factor `order[k]`.
pub fn permute_subsystems(rho: &DensityOperator, order: &[usize]) -> Result<DensityOperator> {
    let dims = rho.dims();
    let n = dims.len();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
        return Err(Error::InvalidPartition(format!("{order:?} is not a permutation of 0..{n}")));
    }
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let mut old_strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        old_strides[k] = old_strides[k + 1] * dims[k + 1];
    }
    let d = rho.dim();
    // map[new_index] = old_index
    let mut map = vec![0usize; d];
    for (new_idx, slot) in map.iter_mut().enumerate() {
        let mut rem = new_idx;
        let mut old = 0;
        for k in (0..n).rev() {
            let digit = rem % new_dims[k];
            rem /= new_dims[k];
            old += digit * old_strides[order[k]];
        }
        *slot = old;
    }
    let m = rho.matrix();
    let mat = ComplexMatrix::from_fn(d, d, |i, j| m[(map[i], map[j])]);
    Ok(DensityOperator {
        space: HilbertSpec::new(new_dims)?,
        mat,
    })
}

/// Eigendecomposition with descending, clamped, renormalized eigenvalues.
pub fn eig_hermitian(rho: &DensityOperator) -> Result<Spectrum> {
    let (vals, vecs) = linalg::eigh(&rho.mat)?;
    let clamped: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::NumericalFailure("spectrum sums to zero".into()));
    }
    Ok(Spectrum {
        eigenvalues: clamped.iter().map(|v| v / total).collect(),
        eigenvectors: vecs,
    })
}

impl Spectrum {
    /// Builds a spectrum in the computational basis.
    pub fn from_probabilities(probs: &[f64]) -> Result<Self> {
        check_distribution(probs)?;
        let d = probs.len();
        if d < 2 {
            return Err(Error::InvalidState("spectrum needs at least two entries".into()));
        }
        Ok(Self {
            eigenvalues: probs.to_vec(),
            eigenvectors: ComplexMatrix::identity(d, d),
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.dim();
        let v = &self.eigenvectors;
        let scaled = ComplexMatrix::from_fn(d, d, |i, j| v[(i, j)] * self.eigenvalues[j]);
        scaled * v.adjoint()
    }
}

/// Named textbook states.
#[derive(Debug, Clone, PartialEq)]
pub enum StateName {
    /// `(|00⟩ + |11⟩)/√2`
    Bell,
    /// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
    Ghz(usize),
    /// `(|001⟩ + |010⟩ + |100⟩)/√3`
    W3,
    /// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`
    PureQubit { theta: f64, phi: f64 },
    /// `(I + r·σ)/2`
    Bloch([f64; 3]),
    MaximallyMixed(usize),
    /// Diagonal state with the given spectrum.
    Diag(Vec<f64>),
}

impl FromStr for StateName {
    type Err = Error;

    /// Accepts `bell`, `ghz3`, `ghz:<n>`, `w3`, `mixed:<d>`, `bloch:<x,y,z>`,
    /// `pure:<θ,φ>` and `diag:<p1,p2,...>`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let reals = |a: Option<&str>| -> Result<Vec<f64>> {
            let a = a.ok_or_else(|| Error::Parse(format!("`{s}` needs parameters")))?;
            a.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad number `{x}` in `{s}`")))
                })
                .collect()
        };
        let count = |a: Option<&str>| -> Result<usize> {
            a.ok_or_else(|| Error::Parse(format!("`{s}` needs a dimension")))?
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad count in `{s}`")))
        };
        match head {
            "bell" => Ok(Self::Bell),
            "ghz3" | "ghz" if arg.is_none() => Ok(Self::Ghz(3)),
            "ghz" => Ok(Self::Ghz(count(arg)?)),
            "w3" | "w" => Ok(Self::W3),
            "mixed" => Ok(Self::MaximallyMixed(count(arg)?)),
            "bloch" => {
                let r = reals(arg)?;
                if r.len() != 3 {
                    return Err(Error::Parse(format!("bloch needs 3 components, got {}", r.len())));
                }
                Ok(Self::Bloch([r[0], r[1], r[2]]))
            }
            "pure" => {
                let r = reals(arg)?;
                if r.len() != 2 {
                    return Err(Error::Parse("pure needs θ,φ".into()));
                }
                Ok(Self::PureQubit { theta: r[0], phi: r[1] })
            }
            "diag" => Ok(Self::Diag(reals(arg)?)),
            _ => Err(Error::InvalidState(format!("unknown state name `{s}`"))),
        }
    }
}

impl fmt::Display for StateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bell => write!(f, "bell"),
            Self::Ghz(3) => write!(f, "ghz3"),
            Self::Ghz(n) => write!(f, "ghz:{n}"),
            Self::W3 => write!(f, "w3"),
            Self::PureQubit { theta, phi } => write!(f, "pure:{theta},{phi}"),
            Self::Bloch([x, y, z]) => write!(f, "bloch:{x},{y},{z}"),
            Self::MaximallyMixed(d) => write!(f, "mixed:{d}"),
            Self::Diag(p) => {
                let s: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                write!(f, "diag:{}", s.join(","))
            }
        }
    }
}

/// Builds a named state from exact amplitudes.
pub fn make_named_state(name: &StateName) -> Result<DensityOperator> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match name {
        StateName::Bell => {
            let amp = [Complex64::new(h, 0.0), C0, C0, Complex64::new(h, 0.0)];
            DensityOperator::from_pure(HilbertSpec::qubits(2), &amp)
        }
        StateName::Ghz(n) => {
            if *n < 2 {
                return Err(Error::InvalidState(format!("GHZ needs at least 2 qubits, got {n}")));
            }
            if *n > 8 {
                return Err(Error::InvalidState(format!("GHZ on {n} qubits exceeds d = 256")));
            }
            let d = 1usize << n;
            let mut amp = vec![C0; d];
            amp[0] = Complex64::new(h, 0.0);
            amp[d - 1] = Complex64::new(h, 0.0);
            DensityOperator::from_pure(HilbertSpec::qubits(*n), &amp)
        }
        StateName::W3 => {
            let a = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
            let mut amp = vec![C0; 8];
            amp[0b001] = a;
            amp[0b010] = a;
            amp[0b100] = a;
            DensityOperator::from_pure(HilbertSpec::qubits(3), &amp)
        }
        StateName::PureQubit { theta, phi } => {
            if !theta.is_finite() || !phi.is_finite() {
                return Err(Error::InvalidState("non-finite angles".into()));
            }
            let amp = [
                Complex64::new((theta / 2.0).cos(), 0.0),
                Complex64::from_polar((theta / 2.0).sin(), *phi),
            ];
            DensityOperator::from_pure(HilbertSpec::qubits(1), &amp)
        }
        StateName::Bloch(r) => bloch_state(*r),
        StateName::MaximallyMixed(d) => {
            if *d < 2 || *d > 256 {
                return Err(Error::InvalidState(format!("dimension {d} outside 2..=256")));
            }
            Ok(DensityOperator::maximally_mixed(HilbertSpec::new(vec![*d])?))
        }
        StateName::Diag(p) => DensityOperator::diagonal(p),
    }
}

/// Qubit state `(I + r·σ)/2`; requires `|r| ≤ 1`.
pub fn bloch_state(r: [f64; 3]) -> Result<DensityOperator> {
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if !norm.is_finite() || norm > 1.0 + 1e-12 {
        return Err(Error::InvalidState(format!("Bloch vector length {norm} > 1")));
    }
    let [x, y, z] = linalg::pauli();
    let mat = (linalg::identity(2) + x.scale(r[0]) + y.scale(r[1]) + z.scale(r[2])).scale(0.5);
    DensityOperator::new(HilbertSpec::qubits(1), mat)
}

/// Ginibre-ensemble random state `G G† / Tr` with `G` a `d × rank` matrix of
/// standard complex normals drawn from a ChaCha stream seeded by `seed`.
pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    random_density_on(HilbertSpec::new(vec![d])?, rank, seed)
}

/// [`random_density`] on an arbitrary tensor-product space.
pub fn random_density_on(space: HilbertSpec, rank: usize, seed: u64) -> Result<DensityOperator> {
    let d = space.total_dim();
    if rank < 1 || rank > d {
        return Err(Error::InvalidState(format!("rank {rank} outside 1..={d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ComplexMatrix::from_fn(d, rank, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let mat = w.map(|z| z / tr);
    DensityOperator::new(space, (&mat + mat.adjoint()).scale(0.5))
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix,
/// with the phases of `R`'s diagonal absorbed into `Q`.
pub fn random_unitary(d: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ComplexMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases: Vec<Complex64> = (0..d)
        .map(|k| {
            let x = r[(k, k)];
            if x.norm() > 0.0 {
                x / x.norm()
            } else {
                C1
            }
        })
        .collect();
    ComplexMatrix::from_fn(d, d, |i, j| q[(i, j)] * phases[j])
}
