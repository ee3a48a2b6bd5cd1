use approx::assert_relative_eq;
use proptest::prelude::*;

use distid_core::math::log_sum_exp;
use distid_core::{
    bhattacharyya, exhaustive_decode, kl_divergence, lower_bound, ml_decode, pairwise_sum,
    tilted_midpoint, upper_bound, verify_lemma, DistributionFamily, FinitePmf, LogLikelihoodMatrix,
    McEngine, Seed, WeightedCompleteGraph,
};

fn pmf(alphabet: usize) -> impl Strategy<Value = FinitePmf> {
    prop::collection::vec(0.01f64..1.0, alphabet).prop_map(|w| FinitePmf::from_weights(&w).unwrap())
}

fn pmf_pair() -> impl Strategy<Value = (FinitePmf, FinitePmf)> {
    (2usize..6).prop_flat_map(|a| (pmf(a), pmf(a)))
}

fn matrix(max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=max)
        .prop_flat_map(|a| prop::collection::vec(prop::collection::vec(-30.0f64..0.0, a), a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distance_is_symmetric_and_nonnegative((p, q) in pmf_pair()) {
        let pq = bhattacharyya(&p, &q).unwrap();
        prop_assert_eq!(pq, bhattacharyya(&q, &p).unwrap());
        prop_assert!(pq >= 0.0);
        prop_assert_eq!(bhattacharyya(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn tilted_midpoint_splits_twice_the_distance((p, q) in pmf_pair()) {
        let mid = tilted_midpoint(&p, &q).unwrap();
        let total: f64 = mid.probs().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        let lhs = kl_divergence(&mid, &p).unwrap() + kl_divergence(&mid, &q).unwrap();
        let rhs = 2.0 * bhattacharyya(&p, &q).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn ml_decode_matches_exhaustive(rows in matrix(6)) {
        let m = LogLikelihoodMatrix::new(rows).unwrap();
        let fast = ml_decode(&m).unwrap();
        let slow = exhaustive_decode(&m).unwrap();
        prop_assert_eq!(fast.score(&m), slow.score(&m));
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn decoding_ignores_row_and_column_offsets(
        rows in matrix(7),
        offsets in prop::collection::vec(-5.0f64..5.0, 14),
    ) {
        let a = rows.len();
        let base = ml_decode(&LogLikelihoodMatrix::new(rows.clone()).unwrap()).unwrap();
        let shifted: Vec<Vec<f64>> = rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter().enumerate().map(|(j, x)| x + offsets[i] + offsets[a + j]).collect()
            })
            .collect();
        let moved = ml_decode(&LogLikelihoodMatrix::new(shifted).unwrap()).unwrap();
        prop_assert_eq!(base, moved);
    }

    #[test]
    fn decoder_output_is_a_permutation(rows in matrix(7)) {
        let est = ml_decode(&LogLikelihoodMatrix::new(rows).unwrap()).unwrap();
        let mut seen = est.mapping().to_vec();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..est.len()).collect::<Vec<_>>());
    }

    #[test]
    fn log_sum_exp_matches_direct_sum(terms in prop::collection::vec(-20.0f64..20.0, 1..40)) {
        let direct: f64 = terms.iter().map(|t| t.exp()).sum::<f64>().ln();
        assert_relative_eq!(log_sum_exp(&terms), direct, max_relative = 1e-12, epsilon = 1e-12);
    }

    #[test]
    fn criterion_sum_decreases_with_blocklength(
        size in 2usize..6,
        lo in 0.05f64..0.3,
        width in 0.3f64..0.6,
        n in 1usize..400,
    ) {
        let family = DistributionFamily::binary_grid(size, lo, lo + width).unwrap();
        let now = pairwise_sum(&family, n).unwrap();
        let later = pairwise_sum(&family, n + 1).unwrap();
        prop_assert!(later.log_s < now.log_s);
    }

    #[test]
    fn bounds_are_monotone_in_s(s in 1e-12f64..0.06, factor in 1.0f64..1.04) {
        let t = s * factor;
        prop_assert!(lower_bound(s).unwrap() <= lower_bound(t).unwrap());
        if let (Some(u), Some(v)) = (upper_bound(s).unwrap().value(), upper_bound(t).unwrap().value()) {
            prop_assert!(u <= v);
        }
    }

    #[test]
    fn lemma_is_scale_covariant(seed in any::<u64>(), k in 3usize..7, lambda in 0.1f64..10.0) {
        let graph = WeightedCompleteGraph::random(k, Seed(seed)).unwrap();
        let scaled = graph.scaled(lambda).unwrap();
        for r in 2..=k {
            let base = verify_lemma(&graph, r).unwrap();
            let moved = verify_lemma(&scaled, r).unwrap();
            let factor = lambda.powi(r as i32);
            assert_relative_eq!(moved.lhs, base.lhs * factor, max_relative = 1e-10);
            assert_relative_eq!(moved.rhs, base.rhs * factor, max_relative = 1e-10);
            prop_assert!(moved.holds && base.holds);
        }
    }
}

#[test]
fn monte_carlo_is_reproducible_across_worker_counts() {
    let family = DistributionFamily::binary_grid(5, 0.2, 0.8).unwrap();
    let runs: Vec<_> = [1, 2, 3, 8]
        .iter()
        .map(|&w| {
            McEngine::new(w)
                .unwrap()
                .estimate_error_prob(&family, 30, 3_000, Seed(99))
                .unwrap()
        })
        .collect();
    assert!(runs[0].errors > 0);
    for run in &runs[1..] {
        assert_eq!(run, &runs[0]);
    }
}

#[test]
fn single_cycle_fraction_counts_error_shapes() {
    // with A = 3 every error is a transposition or a 3-cycle, both single cycles
    let family = DistributionFamily::binary_grid(3, 0.3, 0.7).unwrap();
    let est = McEngine::new(2)
        .unwrap()
        .estimate_error_prob(&family, 5, 2_000, Seed(3))
        .unwrap();
    assert!(est.errors > 0);
    assert_eq!(est.single_cycle_fraction, 1.0);
    assert_eq!(est.r_histogram.values().sum::<u64>(), est.errors);
}
