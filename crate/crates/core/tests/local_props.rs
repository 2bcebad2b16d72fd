//! Optimizer-backed properties; few cases because each runs two multi-start searches.

use proptest::prelude::*;
use qinfo::linalg::kron;
use qinfo::state::random_unitary;
use qinfo::{coherent_entropy, random_density_on, sc_local, HilbertSpec, OptimizerConfig, PartitionLabel};

fn cfg() -> OptimizerConfig {
    OptimizerConfig {
        restarts: 6,
        ..OptimizerConfig::default()
    }
}

fn halves() -> [PartitionLabel; 2] {
    [PartitionLabel::single(0, 2).unwrap(), PartitionLabel::single(1, 2).unwrap()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn gap_is_bounded_by_coherent_entropy(rank in 1usize..=4, seed: u64) {
        let rho = random_density_on(HilbertSpec::qubits(2), rank, seed).unwrap();
        let r = sc_local(&rho, &halves(), &cfg()).unwrap();
        let sc = coherent_entropy(&rho).unwrap().value();
        prop_assert!(r.sc_loc.value() <= sc + 1e-6);
        prop_assert!(r.gap.value() >= 0.0);
        prop_assert!(r.gap.value() <= sc + 1e-9);
        prop_assert!(r.max_diag.value() <= 2.0 + 1e-12);
    }

    #[test]
    fn gap_is_invariant_under_local_rotation(rank in 1usize..=4, seed: u64, ua: u64, ub: u64) {
        let rho = random_density_on(HilbertSpec::qubits(2), rank, seed).unwrap();
        let u = kron(&random_unitary(2, ua), &random_unitary(2, ub));
        let rotated = rho.conjugate_by(&u).unwrap();
        let g0 = sc_local(&rho, &halves(), &cfg()).unwrap().gap.value();
        let g1 = sc_local(&rotated, &halves(), &cfg()).unwrap().gap.value();
        prop_assert!((g0 - g1).abs() < 2e-2, "{g0} vs {g1}");
    }
}

#[test]
fn classical_correlations_have_no_gap() {
    let rho = qinfo::DensityOperator::diagonal(&[0.5, 0.0, 0.0, 0.5])
        .unwrap()
        .with_space(HilbertSpec::qubits(2))
        .unwrap();
    let r = sc_local(&rho, &halves(), &cfg()).unwrap();
    assert!((r.mutual_information.unwrap().value() - 1.0).abs() < 1e-12);
    assert!(r.gap.value().abs() < 2e-2, "G = {}", r.gap.value());
    assert!((r.local.unwrap().value() - 1.0).abs() < 2e-2);
}
