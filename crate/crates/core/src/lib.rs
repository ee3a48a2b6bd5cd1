//! Identification of `A` distinct distributions from `A` i.i.d. sequences
//! whose assignment to the distributions is an unknown permutation.
//!
//! - [`dist`]: finite pmfs, Bhattacharyya distance, families, sampling.
//! - [`decoder`]: maximum-likelihood permutation decoding.
//! - [`bounds`]: union-type upper and lower bounds on the ML error
//!   probability and the identifiability trend of growing families.
//! - [`graphlemma`]: cycle enumeration and the mean cycle-gain inequality.
//! - [`mc`]: Monte Carlo error and pairwise exponent estimates.
//! - [`report`]: CSV/JSON emission.

pub mod bounds;
pub mod decoder;
pub mod dist;
pub mod error;
pub mod graphlemma;
pub mod math;
pub mod mc;
pub mod report;
pub mod serde_ext;

pub use bounds::{
    count_ratio, cycle_sum_bound, identifiability_verdict, lower_bound, pairwise_sum, upper_bound,
    BoundReport, FamilySequenceSpec, FamilyTemplate, GrowthRule, TrendReport, UpperBound, Verdict,
};
pub use decoder::{
    exhaustive_decode, log_likelihood_matrix, ml_decode, LogLikelihoodMatrix, PermutationEstimate,
};
pub use dist::{
    bhattacharyya, bhattacharyya_coefficient, kl_divergence, make_family, tilted_midpoint,
    DistributionFamily, FamilySpec, FinitePmf, ObservationBatch, Seed,
};
pub use error::{Error, Result};
pub use graphlemma::{
    cycle_count, cycle_gain, enumerate_cycles, verify_facts, verify_lemma, Cycle, FactsReport,
    LemmaCheck, WeightedCompleteGraph,
};
pub use mc::{permutation_cycle_decomposition, ExponentFit, McEngine, McEstimate};
