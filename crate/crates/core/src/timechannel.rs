//! Prepare → measure → decohere → measure.
//!
//! A first projective measurement on `ρ_in` yields `s₁` and leaves the projector
//! `P_A^{s₁}`; a Kraus channel turns it into `ρ_{s₁}`; a second projective
//! measurement yields `s₂`. The mutual information `I₁:₂` of the outcome pair
//! measures how much information the intermediate state carries forward in time.
//!
//! Outcome labels are 0-based throughout: label `s` here is label `s + 1` in
//! 1-based notation.

use std::fmt::Write as _;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{binary_entropy, shannon_entropy, Bits, TOL_UNITARY};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::state::{check_distribution, matrix_from_json, matrix_to_json, DensityOperator, HilbertSpec, Spectrum};

/// Tolerance on `Σ M† M = I`.
pub const TOL_COMPLETENESS: f64 = 1e-9;

/// Orthonormal measurement basis; column `s` is the outcome state `|s⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    basis: ComplexMatrix,
}

impl ProjectiveMeasurement {
    pub fn new(basis: ComplexMatrix) -> Result<Self> {
        let defect = linalg::unitarity_defect(&basis);
        if defect > TOL_UNITARY {
            return Err(Error::InvalidBasis(format!("measurement basis not unitary (defect {defect:.3e})")));
        }
        Ok(Self { basis })
    }

    pub fn computational(d: usize) -> Self {
        Self {
            basis: ComplexMatrix::identity(d, d),
        }
    }

    /// Qubit measurement along the unit vector `n`: outcome 0 is `+1`, outcome 1 is `−1`.
    pub fn qubit_axis(n: [f64; 3]) -> Result<Self> {
        check_unit(n, "measurement axis")?;
        let [x, y, z] = linalg::pauli();
        let obs = x.scale(n[0]) + y.scale(n[1]) + z.scale(n[2]);
        let (_, vecs) = linalg::eigh(&obs)?;
        Self::new(vecs)
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// `|s⟩⟨s|`.
    pub fn projector(&self, s: usize) -> ComplexMatrix {
        let col = self.basis.column(s);
        col * col.adjoint()
    }

    /// `Tr(ρ P^s)` for every outcome.
    pub fn probabilities(&self, rho: &ComplexMatrix) -> Vec<f64> {
        linalg::rotated_diagonal(rho, &self.basis)
            .into_iter()
            .map(|p| p.max(0.0))
            .collect()
    }
}

/// Completely positive trace-preserving map `ρ ↦ Σ_m M_m ρ M_m†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Err(Error::InvalidState("channel has no Kraus operators".into()));
        };
        let d = first.nrows();
        if ops.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(Error::DimensionError("Kraus operators must all be square of one size".into()));
        }
        let channel = Self { ops };
        let defect = channel.completeness_defect();
        if defect > TOL_COMPLETENESS {
            return Err(Error::InvalidState(format!(
                "Kraus operators violate completeness (defect {defect:.3e})"
            )));
        }
        Ok(channel)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            ops: vec![ComplexMatrix::identity(d, d)],
        }
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    /// Largest entry of `|Σ M† M − I|`.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.ops[0].nrows();
        let sum = self
            .ops
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, m| acc + m.adjoint() * m);
        linalg::max_abs_diff(&sum, &ComplexMatrix::identity(d, d))
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        self.ops
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, m| acc + m * rho * m.adjoint())
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson {
            kraus: self.ops.iter().map(matrix_to_json).collect(),
        }
    }

    pub fn from_json(json: &ChannelJson) -> Result<Self> {
        let ops = json
            .kraus
            .iter()
            .map(|m| matrix_from_json(m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ops)
    }
}

/// Wire format: `{ "kraus": [matrix, ...] }` with the density-operator matrix encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

/// `ρ ↦ shrink·ρ + (1 − shrink)·I/d`, realized with the `d²` Weyl operators
/// `X^a Z^b`, whose uniform twirl is the completely depolarizing map.
pub fn depolarizing_channel(d: usize, shrink: f64) -> Result<KrausChannel> {
    if d < 2 {
        return Err(Error::DomainError(format!("dimension {d} < 2")));
    }
    if !(0.0..=1.0).contains(&shrink) {
        return Err(Error::DomainError(format!("shrink {shrink} outside [0,1]")));
    }
    let omega = |k: usize| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k % d) as f64 / d as f64);
    let mut ops = Vec::with_capacity(d * d);
    let w_rest = ((1.0 - shrink) / (d * d) as f64).sqrt();
    let w_id = (shrink + (1.0 - shrink) / (d * d) as f64).sqrt();
    for a in 0..d {
        for b in 0..d {
            let weight = if a == 0 && b == 0 { w_id } else { w_rest };
            if weight == 0.0 {
                continue;
            }
            // (X^a Z^b)|k⟩ = ω^{bk} |k + a⟩
            let mut m = ComplexMatrix::zeros(d, d);
            for k in 0..d {
                m[((k + a) % d, k)] = omega(b * k) * weight;
            }
            ops.push(m);
        }
    }
    KrausChannel::new(ops)
}

/// Joint outcome distribution `p(s₁, s₂)` with its marginals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDistribution {
    joint: Vec<Vec<f64>>,
    p1: Vec<f64>,
    p2: Vec<f64>,
}

impl JointDistribution {
    pub fn new(joint: Vec<Vec<f64>>) -> Result<Self> {
        let rows = joint.len();
        if rows == 0 || joint[0].is_empty() {
            return Err(Error::DimensionError("empty joint distribution".into()));
        }
        let cols = joint[0].len();
        if joint.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionError("ragged joint distribution".into()));
        }
        let flat: Vec<f64> = joint.iter().flatten().copied().collect();
        check_distribution(&flat)?;
        let p1 = joint.iter().map(|r| r.iter().sum()).collect();
        let p2 = (0..cols).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
        Ok(Self { joint, p1, p2 })
    }

    pub fn joint(&self) -> &[Vec<f64>] {
        &self.joint
    }

    pub fn p(&self, s1: usize, s2: usize) -> f64 {
        self.joint[s1][s2]
    }

    pub fn marginal_first(&self) -> &[f64] {
        &self.p1
    }

    pub fn marginal_second(&self) -> &[f64] {
        &self.p2
    }
}

/// `p(s₁,s₂) = Tr(ρ_in P_A^{s₁}) · Tr(ρ_{s₁} P_B^{s₂})`, `ρ_{s₁} = channel(P_A^{s₁})`.
pub fn protocol_distribution(
    rho_in: &DensityOperator,
    meas1: &ProjectiveMeasurement,
    channel: &KrausChannel,
    meas2: &ProjectiveMeasurement,
) -> Result<JointDistribution> {
    let (p1, cond) = protocol_parts(rho_in, meas1, channel, meas2)?;
    let joint = p1
        .iter()
        .zip(&cond)
        .map(|(&a, row)| row.iter().map(|&b| a * b).collect())
        .collect();
    JointDistribution::new(joint)
}

/// First-outcome probabilities and the conditional rows `p(s₂ | s₁)`.
fn protocol_parts(
    rho_in: &DensityOperator,
    meas1: &ProjectiveMeasurement,
    channel: &KrausChannel,
    meas2: &ProjectiveMeasurement,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let d = rho_in.dim();
    if meas1.dim() != d || meas2.dim() != d || channel.dim() != d {
        return Err(Error::DimensionError(format!(
            "state {d}, first measurement {}, channel {}, second measurement {}",
            meas1.dim(),
            channel.dim(),
            meas2.dim()
        )));
    }
    let p1 = normalize(meas1.probabilities(rho_in.matrix()));
    let cond = intermediate_states(meas1, channel)
        .iter()
        .map(|rho_s| normalize(meas2.probabilities(rho_s)))
        .collect();
    Ok((p1, cond))
}

fn normalize(mut p: Vec<f64>) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter_mut().for_each(|x| *x /= total);
    }
    p
}

/// `ρ_{s₁} = Σ_m M_m P_A^{s₁} M_m†` for every first outcome.
pub fn intermediate_states(meas1: &ProjectiveMeasurement, channel: &KrausChannel) -> Vec<ComplexMatrix> {
    (0..meas1.dim()).map(|s| channel.apply(&meas1.projector(s))).collect()
}

/// Whether all intermediate states share one spectrum (within `tol`). When they
/// do not, `I₁:₂` is still well defined but is not a property of a single state.
pub fn intermediates_unitarily_equivalent(
    meas1: &ProjectiveMeasurement,
    channel: &KrausChannel,
    tol: f64,
) -> Result<bool> {
    let spectra = intermediate_states(meas1, channel)
        .iter()
        .map(|m| linalg::eigh(m).map(|(v, _)| v))
        .collect::<Result<Vec<_>>>()?;
    Ok(spectra
        .windows(2)
        .all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| (a - b).abs() <= tol)))
}

/// `I₁:₂ = Σ p(s₁,s₂) log₂ [p(s₁,s₂) / (p(s₁) p(s₂))]`.
pub fn mutual_information_12(dist: &JointDistribution) -> Bits {
    let mut total = 0.0;
    for (s1, row) in dist.joint.iter().enumerate() {
        for (s2, &p) in row.iter().enumerate() {
            if p > 0.0 {
                total += p * (p / (dist.p1[s1] * dist.p2[s2])).log2();
            }
        }
    }
    Bits::new(total)
}

/// `(C₁, C₂)` with `C₁ = H({s₂})` and `C₂ = H({s₂}|{s₁})`, so `I₁:₂ = C₁ − C₂`.
pub fn entropy_decomposition(dist: &JointDistribution) -> (f64, f64) {
    let c1 = shannon_entropy(&dist.p2);
    let c2 = dist
        .joint
        .iter()
        .zip(&dist.p1)
        .filter(|(_, &p)| p > 0.0)
        .map(|(row, &p)| {
            let cond: Vec<f64> = row.iter().map(|x| x / p).collect();
            p * shannon_entropy(&cond)
        })
        .sum();
    (c1, c2)
}

fn check_unit(n: [f64; 3], what: &str) -> Result<()> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::DomainError(format!("{what} has length {norm}, expected 1")));
    }
    Ok(())
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Closed form for one qubit: measurement along `n̂₁`, depolarizing shrink
/// `n₁ = shrink·n̂₁`, measurement along `n̂₂`:
/// `I₁:₂ = H₂((1 + (r₁·n̂₁)(n₁·n̂₂))/2) − H₂((1 + n₁·n̂₂)/2)`.
pub fn qubit_tcorr_closed_form(r1: [f64; 3], n1hat: [f64; 3], shrink: f64, n2hat: [f64; 3]) -> Result<Bits> {
    if dot(r1, r1).sqrt() > 1.0 + 1e-12 {
        return Err(Error::DomainError("Bloch vector longer than 1".into()));
    }
    check_unit(n1hat, "n̂₁")?;
    check_unit(n2hat, "n̂₂")?;
    if !(0.0..=1.0).contains(&shrink) {
        return Err(Error::DomainError(format!("shrink {shrink} outside [0,1]")));
    }
    let c = shrink * dot(n1hat, n2hat);
    let a = dot(r1, n1hat);
    // Clamp so rounding cannot push the arguments outside [0, 1].
    let x = ((1.0 + a * c) / 2.0).clamp(0.0, 1.0);
    let y = ((1.0 + c) / 2.0).clamp(0.0, 1.0);
    Ok(Bits::new(binary_entropy(x)?.value() - binary_entropy(y)?.value()))
}

/// The same qubit configuration assembled as matrices, for cross-checking.
pub fn qubit_protocol(
    r1: [f64; 3],
    n1hat: [f64; 3],
    shrink: f64,
    n2hat: [f64; 3],
) -> Result<(DensityOperator, ProjectiveMeasurement, KrausChannel, ProjectiveMeasurement)> {
    let rho = crate::state::bloch_state(r1)?;
    let m1 = ProjectiveMeasurement::qubit_axis(n1hat)?;
    let ch = depolarizing_channel(2, shrink)?;
    let m2 = ProjectiveMeasurement::qubit_axis(n2hat)?;
    Ok((rho, m1, ch, m2))
}

/// Protocol attaining `I₁:₂ = log₂ d − S(ρ)` for an intermediate state with the given spectrum.
#[derive(Debug, Clone)]
pub struct OptimalProtocol {
    /// Input state giving uniform first outcomes.
    pub rho_in: DensityOperator,
    pub meas1: ProjectiveMeasurement,
    pub channel: KrausChannel,
    pub meas2: ProjectiveMeasurement,
}

/// Builds the optimal protocol for the spectrum `{λ_m}` with eigenbasis `{|b_m⟩}`.
///
/// - Second measurement: basis B = the eigenbasis.
/// - First measurement: basis A with `|⟨b_m|a_0⟩|² = λ_m`; `|a_0⟩ = Σ_m √λ_m |b_m⟩`
///   and the rest of A is completed by a real Householder reflection.
/// - Channel: Kraus operators `K_{s,m} = √λ_{(s+m) mod d} |b_m⟩⟨a_s|`, which send
///   `P_A^s` to `Σ_m λ_{(s+m) mod d} |b_m⟩⟨b_m|`, a cyclic shift of the spectrum.
///   Their coherent sums over `s` reproduce the same intermediate states but are
///   not trace preserving unless the spectrum is special, so all `d²` are kept.
/// - Input: `d^{-1/2} Σ_s |a_s⟩`, giving `p(s₁) = 1/d`.
pub fn optimal_protocol(spec: &Spectrum) -> Result<OptimalProtocol> {
    let lambda = &spec.eigenvalues;
    check_distribution(lambda)?;
    let d = lambda.len();
    if d < 2 {
        return Err(Error::InvalidState("spectrum needs at least two entries".into()));
    }
    let b = &spec.eigenvectors;
    if b.nrows() != d || b.ncols() != d || linalg::unitarity_defect(b) > TOL_UNITARY {
        return Err(Error::InvalidState("eigenvector matrix is not a d×d unitary".into()));
    }

    let v: Vec<f64> = lambda.iter().map(|l| l.max(0.0).sqrt()).collect();
    let w = householder_to(&v);
    let a = b * w;

    let mut ops = Vec::with_capacity(d * d);
    for s in 0..d {
        for m in 0..d {
            let amp = lambda[(s + m) % d];
            if amp <= 0.0 {
                continue;
            }
            let op = (b.column(m) * a.column(s).adjoint()).scale(amp.sqrt());
            ops.push(op);
        }
    }
    let channel = KrausChannel::new(ops)?;

    let norm = 1.0 / (d as f64).sqrt();
    let psi: DVector<Complex64> = a.column_sum().map(|z| z * norm);
    let amps: Vec<Complex64> = psi.iter().copied().collect();
    let rho_in = DensityOperator::from_pure(HilbertSpec::new(vec![d])?, &amps)?;

    Ok(OptimalProtocol {
        rho_in,
        meas1: ProjectiveMeasurement::new(a)?,
        channel,
        meas2: ProjectiveMeasurement::new(b.clone())?,
    })
}

/// Real orthogonal matrix whose first column is the unit vector `v`.
fn householder_to(v: &[f64]) -> ComplexMatrix {
    let d = v.len();
    let mut u: Vec<f64> = v.iter().map(|x| -x).collect();
    u[0] += 1.0;
    let uu: f64 = u.iter().map(|x| x * x).sum();
    if uu < 1e-30 {
        return ComplexMatrix::identity(d, d);
    }
    ComplexMatrix::from_fn(d, d, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        Complex64::new(delta - 2.0 * u[i] * u[j] / uu, 0.0)
    })
}

/// Outcome counts `n(s₁, s₂)` from sampling the protocol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmpiricalDistribution {
    pub counts: Vec<Vec<u64>>,
    pub n_samples: u64,
}

impl EmpiricalDistribution {
    pub fn to_distribution(&self) -> Result<JointDistribution> {
        let n = self.n_samples as f64;
        JointDistribution::new(
            self.counts
                .iter()
                .map(|r| r.iter().map(|&c| c as f64 / n).collect())
                .collect(),
        )
    }

    /// Plug-in estimate of `I₁:₂` and its delta-method standard error
    /// `√((Σ p·ℓ² − I²)/n)` with `ℓ = log₂[p(s₁,s₂)/(p(s₁)p(s₂))]`.
    ///
    /// The plug-in estimator is biased upward by about `(d₁−1)(d₂−1)/(2n ln 2)` bits;
    /// no correction is applied.
    pub fn mutual_information_estimate(&self) -> Result<(Bits, f64)> {
        let dist = self.to_distribution()?;
        let mi = mutual_information_12(&dist);
        let mut second = 0.0;
        for (s1, row) in dist.joint.iter().enumerate() {
            for (s2, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    let l = (p / (dist.p1[s1] * dist.p2[s2])).log2();
                    second += p * l * l;
                }
            }
        }
        let var = (second - mi.value() * mi.value()).max(0.0);
        Ok((mi, (var / self.n_samples as f64).sqrt()))
    }

    /// `s1,s2,count` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s1,s2,count\n");
        for (s1, row) in self.counts.iter().enumerate() {
            for (s2, c) in row.iter().enumerate() {
                let _ = writeln!(out, "{s1},{s2},{c}");
            }
        }
        out
    }
}

/// Samples `n_samples` runs of the protocol from one seeded stream.
pub fn sample_protocol(
    rho_in: &DensityOperator,
    meas1: &ProjectiveMeasurement,
    channel: &KrausChannel,
    meas2: &ProjectiveMeasurement,
    n_samples: u64,
    seed: u64,
) -> Result<EmpiricalDistribution> {
    sample_protocol_sharded(rho_in, meas1, channel, meas2, n_samples, seed, 1)
}

/// Splits the samples over `shards` independent streams seeded `seed + k`; counts
/// are merged by addition, so the result depends only on `(seed, shards)`.
pub fn sample_protocol_sharded(
    rho_in: &DensityOperator,
    meas1: &ProjectiveMeasurement,
    channel: &KrausChannel,
    meas2: &ProjectiveMeasurement,
    n_samples: u64,
    seed: u64,
    shards: usize,
) -> Result<EmpiricalDistribution> {
    if n_samples < 1 {
        return Err(Error::DomainError("need at least one sample".into()));
    }
    let shards = shards.max(1);
    let (p1, cond) = protocol_parts(rho_in, meas1, channel, meas2)?;
    let first = WeightedIndex::new(&p1).map_err(|e| Error::NumericalFailure(e.to_string()))?;
    let second: Vec<Option<WeightedIndex<f64>>> = cond
        .iter()
        .zip(&p1)
        .map(|(row, &p)| if p > 0.0 { WeightedIndex::new(row).ok() } else { None })
        .collect();
    if second.iter().zip(&p1).any(|(w, &p)| p > 0.0 && w.is_none()) {
        return Err(Error::NumericalFailure("degenerate conditional distribution".into()));
    }
    let d1 = p1.len();
    let d2 = meas2.dim();
    let per = n_samples / shards as u64;
    let extra = n_samples % shards as u64;

    let partial: Vec<Vec<Vec<u64>>> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let n_k = per + u64::from((k as u64) < extra);
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let mut counts = vec![vec![0u64; d2]; d1];
            for _ in 0..n_k {
                let s1 = first.sample(&mut rng);
                let s2 = second[s1].as_ref().expect("sampled outcome has positive weight").sample(&mut rng);
                counts[s1][s2] += 1;
            }
            counts
        })
        .collect();

    let mut counts = vec![vec![0u64; d2]; d1];
    for shard in partial {
        for (row, srow) in counts.iter_mut().zip(shard) {
            for (c, s) in row.iter_mut().zip(srow) {
                *c += s;
            }
        }
    }
    Ok(EmpiricalDistribution { counts, n_samples })
}
