use proptest::prelude::*;
use qinfo::linalg::{max_abs_diff, ComplexMatrix};
use qinfo::{eig_hermitian, random_density, random_density_on, tensor, DensityOperator, HilbertSpec, PartitionLabel};

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 2..=3)
}

fn state_on(dims: Vec<usize>, rank_frac: f64, seed: u64) -> DensityOperator {
    let d: usize = dims.iter().product();
    let rank = ((d as f64 * rank_frac).ceil() as usize).clamp(1, d);
    random_density_on(HilbertSpec::new(dims).unwrap(), rank, seed).unwrap()
}

fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    let (vals, _) = qinfo::linalg::eigh(m).unwrap();
    vals.last().copied().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn partial_trace_preserves_trace_and_positivity(
        dims in dims_strategy(), frac in 0.0f64..1.0, seed: u64, mask in 1u32..7,
    ) {
        let n = dims.len();
        let rho = state_on(dims, frac, seed);
        let keep: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        prop_assume!(!keep.is_empty());
        let label = PartitionLabel::new(keep, n).unwrap();
        let m = rho.partial_trace(&label).unwrap();
        prop_assert!((m.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(m.matrix().trace().im.abs() < 1e-12);
        prop_assert!(min_eigenvalue(m.matrix()) > -1e-12);
        prop_assert_eq!(m.dim(), rho.space().dim_of(&label));
    }

    #[test]
    fn tensor_then_trace_recovers_factors(da in 2usize..=4, db in 2usize..=4, sa: u64, sb: u64) {
        let a = random_density(da, da, sa).unwrap();
        let b = random_density(db, 1 + (sb as usize) % db, sb).unwrap();
        let ab = tensor(&a, &b);
        prop_assert_eq!(ab.dims(), &[da, db][..]);
        let ra = ab.partial_trace(&PartitionLabel::single(0, 2).unwrap()).unwrap();
        let rb = ab.partial_trace(&PartitionLabel::single(1, 2).unwrap()).unwrap();
        prop_assert!(max_abs_diff(ra.matrix(), a.matrix()) < 1e-12);
        prop_assert!(max_abs_diff(rb.matrix(), b.matrix()) < 1e-12);
    }

    #[test]
    fn partial_traces_compose(frac in 0.0f64..1.0, seed: u64) {
        let rho = state_on(vec![2, 3, 2], frac, seed);
        let direct = rho.partial_trace(&PartitionLabel::single(0, 3).unwrap()).unwrap();
        let ab = rho.partial_trace(&PartitionLabel::new([0, 1], 3).unwrap()).unwrap();
        let nested = ab.partial_trace(&PartitionLabel::single(0, 2).unwrap()).unwrap();
        prop_assert!(max_abs_diff(direct.matrix(), nested.matrix()) < 1e-12);
    }

    #[test]
    fn json_round_trip(frac in 0.0f64..1.0, seed: u64) {
        let rho = state_on(vec![2, 3], frac, seed);
        let text = serde_json::to_string(&rho.to_json()).unwrap();
        let back = DensityOperator::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back.dims(), rho.dims());
        prop_assert!(max_abs_diff(back.matrix(), rho.matrix()) < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eigendecomposition_reconstructs(d in 2usize..=16, rank_frac in 0.0f64..1.0, seed: u64) {
        let rank = ((d as f64 * rank_frac).ceil() as usize).clamp(1, d);
        let rho = random_density(d, rank, seed).unwrap();
        let spec = eig_hermitian(&rho).unwrap();
        prop_assert!(max_abs_diff(&spec.reconstruct(), rho.matrix()) < 1e-12);
        prop_assert!(spec.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(spec.eigenvalues.iter().all(|&l| l >= 0.0));
        prop_assert!((spec.eigenvalues.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(qinfo::linalg::unitarity_defect(&spec.eigenvectors) < 1e-12);
    }
}
