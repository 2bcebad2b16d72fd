//! Mutual information and the conservation ledgers
//! `S_c(ρ_{1…n}) = Σ_k S_c(ρ_k) + I_{1:2} + I_{12:3} + … + I_{1…(n−1):n}`.

use serde::Serialize;

use crate::entropy::{coherent_entropy, von_neumann, Bits};
use crate::error::{Error, Result};
use crate::partition::{check_covering, PartitionLabel};
use crate::state::DensityOperator;

/// Identity residual accepted for up to three parts.
pub const RESIDUAL_TOL_SMALL: f64 = 1e-9;
/// Identity residual accepted for four and five parts.
pub const RESIDUAL_TOL_LARGE: f64 = 1e-8;

/// `I_{a:b} = S(ρ_a) + S(ρ_b) − S(ρ_{ab})`.
pub fn mutual_information(rho: &DensityOperator, a: &PartitionLabel, b: &PartitionLabel) -> Result<Bits> {
    if !a.is_disjoint(b) {
        return Err(Error::InvalidPartition(format!("labels {a} and {b} overlap")));
    }
    let sa = von_neumann(&rho.partial_trace(a)?)?;
    let sb = von_neumann(&rho.partial_trace(b)?)?;
    let sab = von_neumann(&rho.partial_trace(&a.union(b))?)?;
    Ok(Bits::new(sa.value() + sb.value() - sab.value()))
}

#[derive(Debug, Clone, Serialize)]
pub struct PartTerm {
    pub label: PartitionLabel,
    pub entropy: Bits,
    pub coherent_entropy: Bits,
}

/// `I_{left:right}` where `left` is the union of all earlier parts in the chain.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationTerm {
    pub left: PartitionLabel,
    pub right: PartitionLabel,
    pub mutual_information: Bits,
}

/// Every term of a conservation identity, in chain order.
#[derive(Debug, Clone, Serialize)]
pub struct InfoLedger {
    pub whole: PartitionLabel,
    pub total_entropy: Bits,
    pub total_coherent_entropy: Bits,
    pub parts: Vec<PartTerm>,
    pub correlations: Vec<CorrelationTerm>,
    /// `|S_c(whole) − Σ S_c(part) − Σ I|`.
    pub residual: f64,
}

impl InfoLedger {
    /// Right-hand side of the identity.
    pub fn rhs(&self) -> f64 {
        self.parts.iter().map(|p| p.coherent_entropy.value()).sum::<f64>()
            + self.correlations.iter().map(|c| c.mutual_information.value()).sum::<f64>()
    }

    /// Tolerance that applies to this ledger's part count.
    pub fn residual_tolerance(&self) -> f64 {
        if self.parts.len() <= 3 {
            RESIDUAL_TOL_SMALL
        } else {
            RESIDUAL_TOL_LARGE
        }
    }

    pub fn holds(&self) -> bool {
        self.residual < self.residual_tolerance()
    }

    /// Smallest entry among all entropies and mutual informations.
    pub fn min_entry(&self) -> f64 {
        let mut m = self.total_entropy.value().min(self.total_coherent_entropy.value());
        for p in &self.parts {
            m = m.min(p.entropy.value()).min(p.coherent_entropy.value());
        }
        for c in &self.correlations {
            m = m.min(c.mutual_information.value());
        }
        m
    }
}

/// Ledger over an ordered list of disjoint parts covering every subsystem.
pub fn ledger_for_parts(rho: &DensityOperator, parts: &[PartitionLabel]) -> Result<InfoLedger> {
    if parts.len() < 2 {
        return Err(Error::InvalidPartition(format!(
            "a ledger needs at least 2 parts, got {}",
            parts.len()
        )));
    }
    check_covering(parts, rho.dims().len())?;
    let whole = PartitionLabel::all(rho.dims().len());
    let total_entropy = von_neumann(rho)?;
    let total_coherent_entropy = coherent_entropy(rho)?;

    let mut terms = Vec::with_capacity(parts.len());
    for p in parts {
        let marginal = rho.partial_trace(p)?;
        terms.push(PartTerm {
            label: p.clone(),
            entropy: von_neumann(&marginal)?,
            coherent_entropy: coherent_entropy(&marginal)?,
        });
    }
    let mut correlations = Vec::with_capacity(parts.len() - 1);
    let mut left = parts[0].clone();
    for right in &parts[1..] {
        correlations.push(CorrelationTerm {
            left: left.clone(),
            right: right.clone(),
            mutual_information: mutual_information(rho, &left, right)?,
        });
        left = left.union(right);
    }
    let mut ledger = InfoLedger {
        whole,
        total_entropy,
        total_coherent_entropy,
        parts: terms,
        correlations,
        residual: 0.0,
    };
    ledger.residual = (total_coherent_entropy.value() - ledger.rhs()).abs();
    Ok(ledger)
}

/// `S_c(ρ_AB) = S_c(ρ_A) + S_c(ρ_B) + I_{A:B}` for `a ∪ b` covering the system.
pub fn bipartite_ledger(rho: &DensityOperator, a: &PartitionLabel, b: &PartitionLabel) -> Result<InfoLedger> {
    ledger_for_parts(rho, &[a.clone(), b.clone()])
}

/// `S_c(ρ_ABC) = S_c(ρ_A) + S_c(ρ_B) + S_c(ρ_C) + I_{A:B} + I_{AB:C}` with the three
/// parts of a tripartite state taken in `order`.
pub fn tripartite_ledger(rho: &DensityOperator, order: [usize; 3]) -> Result<InfoLedger> {
    let n = rho.dims().len();
    if n != 3 {
        return Err(Error::InvalidPartition(format!(
            "tripartite ledger needs exactly 3 parts, state has {n}"
        )));
    }
    let parts = order
        .iter()
        .map(|&i| PartitionLabel::single(i, 3))
        .collect::<Result<Vec<_>>>()?;
    ledger_for_parts(rho, &parts)
}

/// Chain ledger over all subsystems in their natural order.
pub fn chain_ledger(rho: &DensityOperator) -> Result<InfoLedger> {
    let n = rho.dims().len();
    chain_ledger_ordered(rho, &(0..n).collect::<Vec<_>>())
}

/// Chain ledger over single subsystems visited in `order`.
pub fn chain_ledger_ordered(rho: &DensityOperator, order: &[usize]) -> Result<InfoLedger> {
    let n = rho.dims().len();
    let parts = order
        .iter()
        .map(|&i| PartitionLabel::single(i, n))
        .collect::<Result<Vec<_>>>()?;
    ledger_for_parts(rho, &parts)
}

/// All six orderings of three labels.
pub const ORDERINGS_3: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];
