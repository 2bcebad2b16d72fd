//! Coherent entropy and the bookkeeping of quantum information.
//!
//! The coherent entropy of a `d`-dimensional state is `S_c(ρ) = log₂ d − S(ρ)`,
//! the spread between the largest and smallest measurement-outcome entropy
//! reachable by unitary rotation. This crate computes it together with:
//!
//! - conservation ledgers that split `S_c` of a multipartite state into the
//!   coherent entropies of its parts plus nested mutual informations,
//! - the locally achievable coherence `S_c^loc` under product unitaries, the
//!   coherence gap `G = S_c − S_c^loc` and the local correlations `L = I − G`,
//! - the prepare/measure/decohere/measure protocol whose optimal time-like
//!   mutual information equals `S_c` of the intermediate state,
//! - two-qubit concurrence and entanglement of formation.
//!
//! All entropies are in bits.

pub mod concurrence;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod local;
pub mod multipartite;
pub mod optimize;
pub mod partition;
pub mod state;
pub mod tables;
pub mod timechannel;
pub mod validate;

pub use entropy::{
    binary_entropy, coherent_entropy, coherent_entropy_extremal, diagonal_entropy,
    equalizing_basis, relative_entropy, shannon_entropy, von_neumann, Bits,
};
pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use local::{sc_local, LocalCoherenceResult};
pub use multipartite::{
    bipartite_ledger, chain_ledger, mutual_information, tripartite_ledger, InfoLedger,
};
pub use optimize::{optimize_diag_entropy, Direction, OptimizerConfig, UnitaryPoint};
pub use partition::PartitionLabel;
pub use state::{
    eig_hermitian, make_named_state, partial_trace, random_density, random_density_on, tensor,
    DensityOperator, HilbertSpec, Spectrum, StateName,
};
