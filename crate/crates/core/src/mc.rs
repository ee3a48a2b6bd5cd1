//! Monte Carlo estimation of the identification error probability.
//!
//! By symmetry over the uniformly drawn true permutation, every trial fixes
//! the truth to the identity: row `i` is drawn from `P_i`, the batch is ML
//! decoded, and any non-identity estimate is an error. Error events are
//! classified by the number `r` of misassigned indices and by whether the
//! error permutation is a single cycle.
//!
//! Trial `t` draws from `seed.derive(t)` and the per-trial tallies are summed
//! as integers, so results do not depend on the worker count.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::{ml_decode, LogLikelihoodMatrix, PermutationEstimate};
use crate::dist::{bhattacharyya, DistributionFamily, FinitePmf, Seed, SymbolSampler};
use crate::error::{Error, Result};
use crate::math::least_squares;

/// Grid points with fewer observed errors are left out of the exponent fit.
pub const MIN_ERRORS_FOR_FIT: u64 = 50;

/// Accepted relative gap between the fitted slope and `2B`.
pub const EXPONENT_RELATIVE_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: usize,
    pub trials: u64,
    pub errors: u64,
    pub p_hat: f64,
    /// `√(p̂(1-p̂)/trials)`, or `1/trials` when no error was seen.
    pub stderr: f64,
    pub stderr_is_placeholder: bool,
    /// Error trials by number of misassigned indices, keys `2..=A`.
    pub r_histogram: BTreeMap<usize, u64>,
    /// Share of error trials whose permutation is one cycle (0 without errors).
    pub single_cycle_fraction: f64,
}

impl McEstimate {
    pub fn single_cycle_errors(&self) -> u64 {
        (self.single_cycle_fraction * self.errors as f64).round() as u64
    }
}

/// One blocklength of a pairwise exponent experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub n: usize,
    pub trials: u64,
    pub errors: u64,
    pub p_hat: f64,
    pub used_in_fit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub points: Vec<ExponentPoint>,
    /// Least-squares slope of `-ln p̂` against `n` over the used points.
    pub slope: f64,
    pub intercept: f64,
    /// `2 B(p, q)`.
    pub target: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

/// Nontrivial cycles of a permutation, each rotated to start at its smallest
/// element, sorted by that element. Fixed points are omitted.
pub fn permutation_cycle_decomposition(perm: &PermutationEstimate) -> Vec<Vec<usize>> {
    let mapping = perm.mapping();
    let mut seen = vec![false; mapping.len()];
    let mut cycles = Vec::new();
    for start in 0..mapping.len() {
        if seen[start] || mapping[start] == start {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push(i);
            i = mapping[i];
        }
        cycles.push(cycle);
    }
    cycles
}

#[derive(Debug, Clone)]
struct Tally {
    errors: u64,
    by_r: Vec<u64>,
    single_cycle: u64,
}

impl Tally {
    fn new(size: usize) -> Self {
        Self {
            errors: 0,
            by_r: vec![0; size + 1],
            single_cycle: 0,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.errors += other.errors;
        self.single_cycle += other.single_cycle;
        for (a, b) in self.by_r.iter_mut().zip(other.by_r) {
            *a += b;
        }
        self
    }
}

/// Runs trials on a dedicated thread pool of a fixed size.
pub struct McEngine {
    pool: rayon::ThreadPool,
}

impl McEngine {
    /// `workers = 0` lets the pool pick one thread per core.
    pub fn new(workers: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn estimate_error_prob(
        &self,
        family: &DistributionFamily,
        n: usize,
        trials: u64,
        seed: Seed,
    ) -> Result<McEstimate> {
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("blocklength n must be >= 1".into()));
        }
        let size = family.len();
        let alphabet = family.alphabet_size();
        let samplers: Vec<SymbolSampler> =
            family.members().iter().map(SymbolSampler::new).collect();

        let tally = self.pool.install(|| {
            (0..trials)
                .into_par_iter()
                .fold(
                    || (Tally::new(size), vec![vec![0u32; alphabet]; size]),
                    |(mut tally, mut counts), t| {
                        let trial_seed = seed.derive(t);
                        for (i, sampler) in samplers.iter().enumerate() {
                            let mut rng = trial_seed.derive(i as u64).rng();
                            sampler.draw_counts(&mut rng, n, &mut counts[i]);
                        }
                        let matrix = LogLikelihoodMatrix::from_counts(&counts, family)
                            .expect("counts match the family");
                        let estimate =
                            ml_decode(&matrix).expect("the true assignment has finite score");
                        if !estimate.is_identity() {
                            tally.errors += 1;
                            tally.by_r[estimate.misassigned()] += 1;
                            if permutation_cycle_decomposition(&estimate).len() == 1 {
                                tally.single_cycle += 1;
                            }
                        }
                        (tally, counts)
                    },
                )
                .map(|(tally, _)| tally)
                .reduce(|| Tally::new(size), Tally::merge)
        });

        let p_hat = tally.errors as f64 / trials as f64;
        let (stderr, stderr_is_placeholder) = if tally.errors == 0 {
            (1.0 / trials as f64, true)
        } else {
            ((p_hat * (1.0 - p_hat) / trials as f64).sqrt(), false)
        };
        let single_cycle_fraction = if tally.errors == 0 {
            0.0
        } else {
            tally.single_cycle as f64 / tally.errors as f64
        };
        Ok(McEstimate {
            n,
            a: size,
            trials,
            errors: tally.errors,
            p_hat,
            stderr,
            stderr_is_placeholder,
            r_histogram: (2..=size).map(|r| (r, tally.by_r[r])).collect(),
            single_cycle_fraction,
        })
    }

    /// Estimates the probability of the pairwise swap event
    /// `ln(p/q)(X₂) + ln(q/p)(X₁) >= 0` with `X₁ ~ p`, `X₂ ~ q` at each
    /// blocklength, and fits its decay rate against `2 B(p, q)`.
    pub fn pairwise_error_exponent(
        &self,
        p: &FinitePmf,
        q: &FinitePmf,
        n_grid: &[usize],
        trials: u64,
        seed: Seed,
    ) -> Result<ExponentFit> {
        let distance = bhattacharyya(p, q)?;
        if !(distance.is_finite() && distance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < B(p, q) < inf, got {distance}"
            )));
        }
        if n_grid.len() < 3 || n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "n_grid needs >= 3 strictly increasing blocklengths >= 1".into(),
            ));
        }
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }

        // ln q(x) - ln p(x); the event is Σ c₁·d >= Σ c₂·d.
        let log_ratio: Vec<f64> = p
            .probs()
            .iter()
            .zip(q.probs())
            .map(|(a, b)| b.ln() - a.ln())
            .collect();
        let weigh = |counts: &[u32]| -> f64 {
            counts
                .iter()
                .zip(&log_ratio)
                .filter(|(c, _)| **c > 0)
                .map(|(c, d)| f64::from(*c) * d)
                .sum()
        };
        let (sampler_p, sampler_q) = (SymbolSampler::new(p), SymbolSampler::new(q));
        let alphabet = p.alphabet_size();

        let points: Vec<ExponentPoint> = n_grid
            .iter()
            .map(|&n| {
                let point_seed = seed.derive(n as u64);
                let errors = self.pool.install(|| {
                    (0..trials)
                        .into_par_iter()
                        .fold(
                            || (0u64, vec![0u32; alphabet], vec![0u32; alphabet]),
                            |(mut errors, mut first, mut second), t| {
                                let trial_seed = point_seed.derive(t);
                                sampler_p.draw_counts(
                                    &mut trial_seed.derive(0).rng(),
                                    n,
                                    &mut first,
                                );
                                sampler_q.draw_counts(
                                    &mut trial_seed.derive(1).rng(),
                                    n,
                                    &mut second,
                                );
                                if weigh(&first) >= weigh(&second) {
                                    errors += 1;
                                }
                                (errors, first, second)
                            },
                        )
                        .map(|(errors, _, _)| errors)
                        .sum::<u64>()
                });
                ExponentPoint {
                    n,
                    trials,
                    errors,
                    p_hat: errors as f64 / trials as f64,
                    used_in_fit: errors >= MIN_ERRORS_FOR_FIT,
                }
            })
            .collect();

        let (xs, ys): (Vec<f64>, Vec<f64>) = points
            .iter()
            .filter(|pt| pt.used_in_fit)
            .map(|pt| (pt.n as f64, -pt.p_hat.ln()))
            .unzip();
        let (slope, intercept) = least_squares(&xs, &ys).ok_or_else(|| {
            Error::Unestimable(format!(
                "{} grid point(s) reached {MIN_ERRORS_FOR_FIT} errors at {trials} trials; need 2",
                xs.len()
            ))
        })?;
        let target = 2.0 * distance;
        let relative_error = (slope - target).abs() / target;
        Ok(ExponentFit {
            points,
            slope,
            intercept,
            target,
            relative_error,
            tolerance: EXPONENT_RELATIVE_TOLERANCE,
            within_tolerance: relative_error <= EXPONENT_RELATIVE_TOLERANCE,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ObservationBatch;

    fn perm(m: &[usize]) -> PermutationEstimate {
        PermutationEstimate::new(m.to_vec()).unwrap()
    }

    #[test]
    fn cycle_decomposition_examples() {
        assert!(permutation_cycle_decomposition(&perm(&[0, 1, 2, 3])).is_empty());
        assert_eq!(
            permutation_cycle_decomposition(&perm(&[1, 0, 3, 2])),
            vec![vec![0, 1], vec![2, 3]]
        );
        assert_eq!(
            permutation_cycle_decomposition(&perm(&[1, 2, 0])),
            vec![vec![0, 1, 2]]
        );
        assert_eq!(
            permutation_cycle_decomposition(&perm(&[0, 3, 1, 2])),
            vec![vec![1, 3, 2]]
        );
    }

    #[test]
    fn disjoint_supports_never_err() {
        let family = DistributionFamily::new(vec![
            FinitePmf::new(vec![1.0, 0.0]).unwrap(),
            FinitePmf::new(vec![0.0, 1.0]).unwrap(),
        ])
        .unwrap();
        let engine = McEngine::new(2).unwrap();
        let est = engine
            .estimate_error_prob(&family, 3, 500, Seed(1))
            .unwrap();
        assert_eq!(est.errors, 0);
        assert_eq!(est.p_hat, 0.0);
        assert!(est.stderr_is_placeholder);
        assert_eq!(est.stderr, 1.0 / 500.0);
        assert_eq!(est.r_histogram, BTreeMap::from([(2, 0)]));
    }

    #[test]
    fn trial_counts_match_sampled_batches() {
        // the engine's count-only sampling reproduces ObservationBatch::sample
        let family = DistributionFamily::binary_grid(3, 0.2, 0.8).unwrap();
        let seed = Seed(42).derive(7);
        let batch = ObservationBatch::sample(&family, 25, seed).unwrap();
        for (i, p) in family.members().iter().enumerate() {
            let mut counts = vec![0u32; 2];
            SymbolSampler::new(p).draw_counts(&mut seed.derive(i as u64).rng(), 25, &mut counts);
            assert_eq!(counts, batch.counts()[i]);
        }
    }

    #[test]
    fn exponent_preconditions() {
        let engine = McEngine::new(1).unwrap();
        let p = FinitePmf::new(vec![0.5, 0.5]).unwrap();
        let q = FinitePmf::new(vec![0.9, 0.1]).unwrap();
        assert!(engine
            .pairwise_error_exponent(&p, &p, &[1, 2, 3], 10, Seed(1))
            .is_err());
        assert!(engine
            .pairwise_error_exponent(&p, &q, &[1, 2], 10, Seed(1))
            .is_err());
        assert!(engine
            .pairwise_error_exponent(&p, &q, &[3, 2, 4], 10, Seed(1))
            .is_err());
        let far = FinitePmf::new(vec![0.0, 1.0]).unwrap();
        let near = FinitePmf::new(vec![1.0, 0.0]).unwrap();
        assert!(engine
            .pairwise_error_exponent(&near, &far, &[1, 2, 3], 10, Seed(1))
            .is_err());
        assert!(matches!(
            engine.pairwise_error_exponent(&p, &q, &[200, 300, 400], 100, Seed(1)),
            Err(Error::Unestimable(_))
        ));
    }
}
