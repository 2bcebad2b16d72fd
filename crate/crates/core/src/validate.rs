//! End-to-end invariant checks, runnable as a suite.
//!
//! Every check reads von Neumann entropies through [`Validator::entropy`], so a
//! broken entropy routine can be injected to confirm that the checks notice.

use serde::Serialize;

use crate::concurrence::concurrence;
use crate::entropy::{diagonal_entropy, equalizing_basis, shannon_entropy};
use crate::error::Result;
use crate::linalg;
use crate::multipartite::ORDERINGS_3;
use crate::optimize::{optimize_diag_entropy, Direction, OptimizerConfig};
use crate::partition::PartitionLabel;
use crate::state::{
    make_named_state, random_density, random_density_on, random_unitary, DensityOperator, HilbertSpec, Spectrum,
    StateName,
};
use crate::timechannel::{
    mutual_information_12, optimal_protocol, protocol_distribution, qubit_protocol, qubit_tcorr_closed_form,
    KrausChannel, ProjectiveMeasurement,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Fast,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fast" => Ok(Self::Fast),
            "all" => Ok(Self::All),
            other => Err(format!("unknown suite `{other}` (expected fast or all)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Largest observed violation or deviation.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

pub type EntropyFn = fn(&DensityOperator) -> Result<f64>;

fn default_entropy(rho: &DensityOperator) -> Result<f64> {
    Ok(shannon_entropy(&rho.eigenvalues()?))
}

pub struct Validator {
    pub entropy: EntropyFn,
    pub seed: u64,
}

impl Default for Validator {
    fn default() -> Self {
        Self {
            entropy: default_entropy,
            seed: 0x5eed,
        }
    }
}

struct Tally {
    cases: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Self { cases: 0, worst: 0.0 }
    }

    fn record(&mut self, deviation: f64) {
        self.cases += 1;
        // NaN must count as a failure.
        if deviation.is_nan() || deviation > self.worst {
            self.worst = if deviation.is_nan() { f64::INFINITY } else { deviation };
        }
    }

    fn finish(self, name: &'static str, tolerance: f64, detail: impl Into<String>) -> CheckResult {
        CheckResult {
            name,
            passed: self.worst <= tolerance,
            cases: self.cases,
            worst: self.worst,
            tolerance,
            detail: detail.into(),
        }
    }
}

impl Validator {
    fn s(&self, rho: &DensityOperator) -> Result<f64> {
        (self.entropy)(rho)
    }

    fn sc(&self, rho: &DensityOperator) -> Result<f64> {
        Ok((rho.dim() as f64).log2() - self.s(rho)?)
    }

    fn mi(&self, rho: &DensityOperator, a: &PartitionLabel, b: &PartitionLabel) -> Result<f64> {
        Ok(self.s(&rho.partial_trace(a)?)? + self.s(&rho.partial_trace(b)?)? - self.s(&rho.partial_trace(&a.union(b))?)?)
    }

    pub fn run(&self, suite: Suite) -> Result<ValidationReport> {
        let all = suite == Suite::All;
        let checks = vec![
            self.ghz_table()?,
            self.w_table()?,
            self.equal_diagonal(if all { 100 } else { 20 })?,
            self.full_group_extremes(if all { &[2, 3, 4] } else { &[2, 3] })?,
            self.bipartite_conservation(if all { 500 } else { 50 })?,
            self.tripartite_conservation(if all { 200 } else { 20 })?,
            self.chain_conservation(if all { &[4, 5] } else { &[4] })?,
            self.time_conservation(if all { &[2, 3, 4] } else { &[2, 3] }, if all { 20 } else { 5 })?,
            self.time_optimality(if all { &[2, 3, 4] } else { &[2] }, if all { 100 } else { 20 })?,
            self.qubit_closed_form(if all { 1000 } else { 100 })?,
            self.entropy_inequalities(if all { 1000 } else { 100 })?,
            self.convexity(if all { 200 } else { 40 })?,
        ];
        Ok(ValidationReport {
            suite,
            passed: checks.iter().all(|c| c.passed),
            checks,
        })
    }

    fn ghz_table(&self) -> Result<CheckResult> {
        let ghz = make_named_state(&StateName::Ghz(3))?;
        let mut t = Tally::new();
        for (label, s, sc) in [
            (vec![0], 1.0, 0.0),
            (vec![1], 1.0, 0.0),
            (vec![2], 1.0, 0.0),
            (vec![0, 1], 1.0, 1.0),
            (vec![0, 2], 1.0, 1.0),
            (vec![1, 2], 1.0, 1.0),
            (vec![0, 1, 2], 0.0, 3.0),
        ] {
            let m = ghz.partial_trace(&PartitionLabel::new(label.clone(), 3)?)?;
            t.record((self.s(&m)? - s).abs());
            t.record((self.sc(&m)? - sc).abs());
            if label.len() == 2 {
                let (a, b) = (PartitionLabel::single(0, 2)?, PartitionLabel::single(1, 2)?);
                t.record((self.mi(&m, &a, &b)? - 1.0).abs());
                t.record(concurrence(&m)?.e_f.value().abs());
            }
        }
        Ok(t.finish("ghz_table", 1e-6, "S, S_c, I and E_f of every GHZ marginal"))
    }

    fn w_table(&self) -> Result<CheckResult> {
        let w = make_named_state(&StateName::W3)?;
        let h = shannon_entropy(&[1.0 / 3.0, 2.0 / 3.0]);
        let mut t = Tally::new();
        for label in [vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]] {
            let m = w.partial_trace(&PartitionLabel::new(label.clone(), 3)?)?;
            t.record((self.s(&m)? - 0.918296).abs());
            let expect_sc = label.len() as f64 - h;
            t.record((self.sc(&m)? - expect_sc).abs());
            if label.len() == 2 {
                let (a, b) = (PartitionLabel::single(0, 2)?, PartitionLabel::single(1, 2)?);
                t.record((self.mi(&m, &a, &b)? - 0.918296).abs());
                t.record(((concurrence(&m)?.e_f.value() - 0.5501).abs() - 1e-3 + 1e-6).max(0.0));
            }
        }
        Ok(t.finish("w_table", 1e-6, "S, S_c, I and E_f (to 1e-3) of every W marginal"))
    }

    fn equal_diagonal(&self, count: usize) -> Result<CheckResult> {
        let mut t = Tally::new();
        for k in 0..count {
            let d = 2 + k % 11;
            let rho = random_density(d, 1 + k % d, self.seed.wrapping_add(k as u64))?;
            let u = equalizing_basis(&rho.spectrum()?);
            for p in linalg::rotated_diagonal(rho.matrix(), &u) {
                t.record((p - 1.0 / d as f64).abs());
            }
        }
        Ok(t.finish("equal_diagonal_basis", 1e-12, "Fourier basis over the eigenvectors flattens the diagonal"))
    }

    fn full_group_extremes(&self, dims: &[usize]) -> Result<CheckResult> {
        let cfg = OptimizerConfig {
            restarts: 3,
            obj_tol: 1e-12,
            seed: self.seed,
            ..OptimizerConfig::default()
        };
        let mut t = Tally::new();
        for (k, &d) in dims.iter().enumerate() {
            let rho = random_density(d, d, self.seed.wrapping_add(1000 + k as u64))?;
            let whole = [PartitionLabel::all(1)];
            let max = optimize_diag_entropy(&rho, &whole, Direction::Max, &cfg)?;
            let min = optimize_diag_entropy(&rho, &whole, Direction::Min, &cfg)?;
            t.record((max.value.value() - (d as f64).log2()).abs());
            t.record((min.value.value() - self.s(&rho)?).abs());
        }
        Ok(t.finish("full_group_extremes", 2e-6, "max/min diagonal entropy over U(d) equal log₂ d and S(ρ)"))
    }

    fn bipartite_conservation(&self, count: usize) -> Result<CheckResult> {
        let mut t = Tally::new();
        for k in 0..count {
            let (da, db) = (2 + k % 3, 2 + (k / 3) % 3);
            let space = HilbertSpec::new(vec![da, db])?;
            let d = da * db;
            let rho = random_density_on(space, 1 + k % d, self.seed.wrapping_add(2000 + k as u64))?;
            let (a, b) = (PartitionLabel::single(0, 2)?, PartitionLabel::single(1, 2)?);
            let lhs = self.sc(&rho)?;
            let rhs = self.sc(&rho.partial_trace(&a)?)? + self.sc(&rho.partial_trace(&b)?)? + self.mi(&rho, &a, &b)?;
            t.record((lhs - rhs).abs());
        }
        Ok(t.finish("bipartite_conservation", 1e-9, "S_c(AB) = S_c(A) + S_c(B) + I(A:B)"))
    }

    fn tripartite_conservation(&self, count: usize) -> Result<CheckResult> {
        let mut t = Tally::new();
        for k in 0..count {
            let dims = vec![2, 2 + k % 2, 2];
            let d: usize = dims.iter().product();
            let rho = random_density_on(HilbertSpec::new(dims)?, 1 + k % d, self.seed.wrapping_add(3000 + k as u64))?;
            for order in ORDERINGS_3 {
                let parts: Vec<PartitionLabel> =
                    order.iter().map(|&i| PartitionLabel::single(i, 3)).collect::<Result<_>>()?;
                t.record(self.chain_residual(&rho, &parts)?);
            }
        }
        Ok(t.finish("tripartite_conservation", 1e-9, "S_c(ABC) = Σ S_c + I(A:B) + I(AB:C), all six orderings"))
    }

    fn chain_conservation(&self, sizes: &[usize]) -> Result<CheckResult> {
        let mut t = Tally::new();
        for (k, &n) in sizes.iter().enumerate() {
            for rep in 0..3u64 {
                let seed = self.seed.wrapping_add(4000 + 10 * k as u64 + rep);
                let rho = random_density_on(HilbertSpec::qubits(n), 1 + (rep as usize * 7) % (1 << n), seed)?;
                let mut order: Vec<usize> = (0..n).collect();
                order.rotate_left(rep as usize % n);
                let parts: Vec<PartitionLabel> =
                    order.iter().map(|&i| PartitionLabel::single(i, n)).collect::<Result<_>>()?;
                t.record(self.chain_residual(&rho, &parts)?);
            }
        }
        Ok(t.finish("chain_conservation", 1e-8, "n-party chain identity"))
    }

    fn chain_residual(&self, rho: &DensityOperator, parts: &[PartitionLabel]) -> Result<f64> {
        let mut rhs = 0.0;
        for p in parts {
            rhs += self.sc(&rho.partial_trace(p)?)?;
        }
        let mut left = parts[0].clone();
        for right in &parts[1..] {
            rhs += self.mi(rho, &left, right)?;
            left = left.union(right);
        }
        Ok((self.sc(rho)? - rhs).abs())
    }

    /// Information carried forward in time by the optimal protocol equals `S_c` of
    /// the intermediate state.
    fn time_conservation(&self, dims: &[usize], per_dim: usize) -> Result<CheckResult> {
        let mut t = Tally::new();
        for &d in dims {
            for k in 0..per_dim {
                let rho = random_density(d, d, self.seed.wrapping_add(5000 + 100 * d as u64 + k as u64))?;
                let p = optimal_protocol(&rho.spectrum()?)?;
                let dist = protocol_distribution(&p.rho_in, &p.meas1, &p.channel, &p.meas2)?;
                t.record((mutual_information_12(&dist).value() - self.sc(&rho)?).abs());
            }
        }
        Ok(t.finish("time_conservation", 1e-9, "optimal I₁:₂ = log₂ d − S(ρ)"))
    }

    fn time_optimality(&self, dims: &[usize], draws: usize) -> Result<CheckResult> {
        let mut t = Tally::new();
        for &d in dims {
            let rho = random_density(d, d, self.seed.wrapping_add(6000 + d as u64))?;
            let spec = rho.spectrum()?;
            let p = optimal_protocol(&spec)?;
            let best = mutual_information_12(&protocol_distribution(&p.rho_in, &p.meas1, &p.channel, &p.meas2)?).value();
            for k in 0..draws {
                let s = self.seed.wrapping_add(7000 + 1000 * d as u64 + 3 * k as u64);
                let (rho_in, m1, ch, m2) = random_protocol_for(&spec, s)?;
                let mi = mutual_information_12(&protocol_distribution(&rho_in, &m1, &ch, &m2)?).value();
                t.record((mi - best).max(0.0));
            }
        }
        Ok(t.finish("time_optimality", 1e-9, "no random protocol with the same intermediate spectrum beats the optimum"))
    }

    fn qubit_closed_form(&self, count: usize) -> Result<CheckResult> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(8000));
        let mut t = Tally::new();
        for _ in 0..count {
            let (r1, n1, shrink, n2) = random_qubit_config(&mut rng);
            let closed = qubit_tcorr_closed_form(r1, n1, shrink, n2)?.value();
            let (rho, m1, ch, m2) = qubit_protocol(r1, n1, shrink, n2)?;
            let pipe = mutual_information_12(&protocol_distribution(&rho, &m1, &ch, &m2)?).value();
            t.record((closed - pipe).abs());
        }
        Ok(t.finish("qubit_closed_form", 1e-12, "qubit I₁:₂ formula vs matrix pipeline"))
    }

    fn entropy_inequalities(&self, count: usize) -> Result<CheckResult> {
        let mut t = Tally::new();
        for k in 0..count {
            let seed = self.seed.wrapping_add(9000 + k as u64);
            let dims = vec![2 + k % 2, 2];
            let d: usize = dims.iter().product();
            let rho = random_density_on(HilbertSpec::new(dims)?, 1 + k % d, seed)?;
            let (a, b) = (PartitionLabel::single(0, 2)?, PartitionLabel::single(1, 2)?);
            // Subadditivity.
            t.record((-self.mi(&rho, &a, &b)?).max(0.0));
            // Monotonicity of S_c under aggregation.
            let excess = self.sc(&rho)? - self.sc(&rho.partial_trace(&a)?)? - self.sc(&rho.partial_trace(&b)?)?;
            t.record((-excess).max(0.0));
            // Diagonal entropy never undercuts the von Neumann entropy.
            let u = random_unitary(d, seed);
            t.record((self.s(&rho)? - diagonal_entropy(&rho, Some(&u))?.value()).max(0.0));
        }
        Ok(t.finish("entropy_inequalities", 1e-9, "subadditivity, S_c monotonicity, diagonal ≥ von Neumann"))
    }

    fn convexity(&self, count: usize) -> Result<CheckResult> {
        let mut t = Tally::new();
        for k in 0..count {
            let d = 2 + k % 4;
            let a = random_density(d, 1 + k % d, self.seed.wrapping_add(10_000 + 2 * k as u64))?;
            let b = random_density(d, 1 + (k / 2) % d, self.seed.wrapping_add(10_001 + 2 * k as u64))?;
            let w = (k as f64 + 0.5) / count as f64;
            let mix = DensityOperator::mix(w, &a, &b)?;
            let gap = self.sc(&mix)? - (w * self.sc(&a)? + (1.0 - w) * self.sc(&b)?);
            t.record(gap.max(0.0));
        }
        Ok(t.finish("sc_convexity", 1e-9, "S_c(tρ₁ + (1−t)ρ₂) ≤ t S_c(ρ₁) + (1−t) S_c(ρ₂)"))
    }
}

/// Random qubit setup: `|r₁| ≤ 1`, unit `n̂₁`, `n̂₂`, shrink in `[0, 1]`.
pub fn random_qubit_config<R: rand::Rng>(rng: &mut R) -> ([f64; 3], [f64; 3], f64, [f64; 3]) {
    let unit = |rng: &mut R| {
        let z: f64 = rng.random_range(-1.0..1.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let s = (1.0 - z * z).sqrt();
        [s * phi.cos(), s * phi.sin(), z]
    };
    let dir = unit(rng);
    let len: f64 = rng.random_range(0.0..1.0);
    let r1 = [dir[0] * len, dir[1] * len, dir[2] * len];
    let n1 = unit(rng);
    let n2 = unit(rng);
    let shrink = rng.random_range(0.0..=1.0);
    (r1, n1, shrink, n2)
}

/// A protocol whose intermediate states all have the spectrum `spec`, with random
/// measurement bases, random input, and a random measure-and-prepare channel.
pub fn random_protocol_for(
    spec: &Spectrum,
    seed: u64,
) -> Result<(DensityOperator, ProjectiveMeasurement, KrausChannel, ProjectiveMeasurement)> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let d = spec.dim();
    let a = random_unitary(d, seed);
    let b = random_unitary(d, seed.wrapping_add(1));
    let rho_in = random_density(d, 1 + (seed as usize) % d, seed.wrapping_add(2))?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    // Each first outcome s is sent to V_s diag(π_s(λ)) V_s† with a random permutation π_s
    // and a random eigenbasis V_s.
    let mut ops = Vec::new();
    for s in 0..d {
        let v = random_unitary(d, seed.wrapping_add(10 + s as u64));
        let mut perm: Vec<usize> = (0..d).collect();
        perm.shuffle(&mut rng);
        for (m, &pm) in perm.iter().enumerate() {
            let lam = spec.eigenvalues[pm];
            if lam > 0.0 {
                ops.push((v.column(m) * a.column(s).adjoint()).scale(lam.sqrt()));
            }
        }
    }
    Ok((
        rho_in,
        ProjectiveMeasurement::new(a)?,
        KrausChannel::new(ops)?,
        ProjectiveMeasurement::new(b)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nats(rho: &DensityOperator) -> Result<f64> {
        Ok(-rho.eigenvalues()?.iter().filter(|&&p| p > 1e-14).map(|p| p * p.ln()).sum::<f64>())
    }

    #[test]
    fn fast_suite_passes() {
        let report = Validator::default().run(Suite::Fast).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{} failed: worst {:e} > {:e}", c.name, c.worst, c.tolerance);
            assert!(c.cases > 0);
        }
        assert!(report.passed);
    }

    #[test]
    fn natural_log_entropy_breaks_time_conservation() {
        let tampered = Validator {
            entropy: nats,
            ..Validator::default()
        };
        let report = tampered.run(Suite::Fast).unwrap();
        let failed: Vec<&str> = report.failures().iter().map(|c| c.name).collect();
        assert!(failed.contains(&"time_conservation"), "{failed:?}");
        assert!(!report.passed);
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!("fast".parse::<Suite>().unwrap(), Suite::Fast);
        assert!("slow".parse::<Suite>().is_err());
    }
}
