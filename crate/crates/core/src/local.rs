//! Locally achievable coherence `S_c^loc`, the coherence gap `G = S_c − S_c^loc`
//! and local correlations `L = I_{A:B} − G`.

use serde::Serialize;

use crate::entropy::{coherent_entropy, Bits};
use crate::error::Result;
use crate::multipartite::mutual_information;
use crate::optimize::{optimize_diag_entropy, Direction, OptimizationOutcome, OptimizerConfig};
use crate::partition::PartitionLabel;
use crate::state::DensityOperator;

#[derive(Debug, Clone, Serialize)]
pub struct LocalCoherenceResult {
    pub parts: Vec<PartitionLabel>,
    /// `max_diag − min_diag` over product unitaries.
    pub sc_loc: Bits,
    pub max_diag: Bits,
    pub min_diag: Bits,
    /// Full-group coherent entropy `log₂ d − S(ρ)`.
    pub sc: Bits,
    pub gap: Bits,
    /// Present for bipartitions only.
    pub mutual_information: Option<Bits>,
    /// Present for bipartitions only.
    pub local: Option<Bits>,
    pub max_search: OptimizationOutcome,
    pub min_search: OptimizationOutcome,
}

impl LocalCoherenceResult {
    pub fn converged(&self) -> bool {
        self.max_search.converged && self.min_search.converged
    }

    /// Per-restart best objectives, max search first.
    pub fn restart_summary(&self) -> String {
        let fmt = |o: &OptimizationOutcome| {
            o.restarts
                .iter()
                .map(|t| format!("{:.6}{}", t.best, if t.converged { "" } else { "?" }))
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!(
            "max restarts: [{}]\nmin restarts: [{}]",
            fmt(&self.max_search),
            fmt(&self.min_search)
        )
    }
}

/// Runs both extremizations over `⊗_k U(part_k)` and fills in `G` (and `L` when
/// `parts` is a bipartition).
pub fn sc_local(rho: &DensityOperator, parts: &[PartitionLabel], cfg: &OptimizerConfig) -> Result<LocalCoherenceResult> {
    let max_search = optimize_diag_entropy(rho, parts, Direction::Max, cfg)?;
    let min_search = optimize_diag_entropy(rho, parts, Direction::Min, cfg)?;
    let sc = coherent_entropy(rho)?;
    let sc_loc = Bits::new(max_search.value - min_search.value);
    let gap = Bits::new(sc - sc_loc);
    let (mutual_information, local) = if parts.len() == 2 {
        let i = mutual_information(rho, &parts[0], &parts[1])?;
        (Some(i), Some(Bits::new(i - gap)))
    } else {
        (None, None)
    };
    Ok(LocalCoherenceResult {
        parts: parts.to_vec(),
        sc_loc,
        max_diag: max_search.value,
        min_diag: min_search.value,
        sc,
        gap,
        mutual_information,
        local,
        max_search,
        min_search,
    })
}
