use proptest::prelude::*;
use qinfo::multipartite::{chain_ledger_ordered, ledger_for_parts, ORDERINGS_3};
use qinfo::{bipartite_ledger, random_density_on, tripartite_ledger, HilbertSpec, PartitionLabel};

fn rank(d: usize, frac: f64) -> usize {
    ((d as f64 * frac).ceil() as usize).clamp(1, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bipartite_identity(da in 2usize..=4, db in 2usize..=4, frac in 0.0f64..1.0, seed: u64) {
        let d = da * db;
        let rho = random_density_on(HilbertSpec::new(vec![da, db]).unwrap(), rank(d, frac), seed).unwrap();
        let l = bipartite_ledger(&rho, &PartitionLabel::single(0, 2).unwrap(), &PartitionLabel::single(1, 2).unwrap()).unwrap();
        prop_assert!(l.holds(), "residual {}", l.residual);
        prop_assert!(l.min_entry() >= 0.0);
        prop_assert!((l.total_coherent_entropy.value() - l.rhs()).abs() < 1e-9);
    }

    #[test]
    fn tripartite_identity_in_every_order(dims in prop::collection::vec(2usize..=3, 3), frac in 0.0f64..1.0, seed: u64) {
        let d: usize = dims.iter().product();
        let rho = random_density_on(HilbertSpec::new(dims).unwrap(), rank(d, frac), seed).unwrap();
        let totals: Vec<f64> = ORDERINGS_3
            .iter()
            .map(|&order| {
                let l = tripartite_ledger(&rho, order).unwrap();
                assert!(l.holds(), "order {order:?}: residual {}", l.residual);
                l.rhs()
            })
            .collect();
        for t in &totals {
            prop_assert!((t - totals[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn grouped_parts_identity(frac in 0.0f64..1.0, seed: u64) {
        let rho = random_density_on(HilbertSpec::new(vec![2, 2, 3]).unwrap(), rank(12, frac), seed).unwrap();
        let parts = [PartitionLabel::new([0, 2], 3).unwrap(), PartitionLabel::single(1, 3).unwrap()];
        prop_assert!(ledger_for_parts(&rho, &parts).unwrap().holds());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn chain_identity_for_four_and_five_qubits(n in 4usize..=5, frac in 0.0f64..1.0, seed: u64,
                                               perm: u64) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let d = 1usize << n;
        let rho = random_density_on(HilbertSpec::qubits(n), rank(d, frac), seed).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm));
        let l = chain_ledger_ordered(&rho, &order).unwrap();
        prop_assert!(l.residual < 1e-8, "residual {}", l.residual);
    }
}
