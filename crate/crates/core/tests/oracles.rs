mod common;

use common::*;
use proptest::prelude::*;
use triplet_kernels::kendall::tau_gram;
use triplet_kernels::methods::{complete_linkage, kernel_kmeans, KMeansConfig};
use triplet_kernels::kernels::{KernelSource, Provenance};
use triplet_kernels::synth::euclidean_oracle;
use triplet_kernels::{build_phi_k1, gram, KernelMatrix};

fn linear_kernel(points: &[Vec<f64>]) -> KernelMatrix {
    KernelMatrix::from_fn(points.len(), Provenance::new(KernelSource::External), |i, j| {
        points[i].iter().zip(&points[j]).map(|(a, b)| a * b).sum()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn k1_on_complete_triplets_matches_closed_form(n in 4usize..11, seed in any::<u64>()) {
        let data = random_dataset(n, 2, seed);
        let oracle = euclidean_oracle(&data);
        let k1 = gram(&build_phi_k1(&complete_store(&data), false).unwrap());
        for a in 0..n {
            for b in 0..n {
                prop_assert!((k1.get(a, b) - anchor_excluded_tau(&oracle, a, b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tau_gram_matches_pair_counting(n in 3usize..10, seed in any::<u64>()) {
        let data = random_dataset(n, 3, seed);
        let oracle = euclidean_oracle(&data);
        let tau = tau_gram(&oracle).unwrap();
        for a in 0..n {
            for b in 0..n {
                prop_assert!((tau.get(a, b) - brute_tau(&oracle, a, b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linkage_matches_naive_agglomeration(n in 2usize..9, seed in any::<u64>()) {
        let pts = random_points(n, 2, seed);
        let got = complete_linkage(&linear_kernel(&pts)).unwrap();
        let want = naive_complete_linkage(&pts);
        for (m, w) in got.merges.iter().zip(&want) {
            prop_assert_eq!((m.left, m.right, m.id), (w.0, w.1, w.3));
            prop_assert!((m.height - w.2).abs() < 1e-9);
        }
    }

    #[test]
    fn kmeans_matches_coordinate_lloyd(n in 6usize..30, k in 2usize..5, seed in any::<u64>()) {
        let pts = random_points(n, 2, seed);
        let cfg = KMeansConfig { k, restarts: 4, max_iter: 50, seed };
        let got = kernel_kmeans(&linear_kernel(&pts), &cfg).unwrap();
        let (want, objective) = coordinate_kmeans(&pts, k, 4, 50, seed);
        prop_assert_eq!(canonical(&got.assignment), canonical(&want));
        prop_assert!((got.objective - objective).abs() <= 1e-8 * objective.max(1.0));
    }
}
