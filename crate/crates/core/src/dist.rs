//! Finite-alphabet distributions, Bhattacharyya distance, tilted midpoints,
//! seeded i.i.d. sampling, and the family constructors used by experiments.
//!
//! Symbols are dense indices `0..m`. A [`DistributionFamily`] is an ordered
//! list of pairwise distinct pmfs on a common alphabet.

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `Σ p(x) = 1`.
pub const PMF_TOLERANCE: f64 = 1e-12;

/// Two pmfs closer than this in sup-norm are treated as the same distribution.
pub const DISTINCT_TOLERANCE: f64 = 1e-9;

/// Seed used whenever a caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// A probability mass function on `{0, …, m-1}` with `m >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FinitePmf {
    probs: Vec<f64>,
}

impl FinitePmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidPmf(format!(
                "alphabet size must be at least 2, got {}",
                probs.len()
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidPmf(format!(
                "entry {bad} is not a nonnegative real"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::InvalidPmf(format!("entries sum to {sum}, not 1")));
        }
        Ok(Self { probs })
    }

    /// Normalizes nonnegative weights with a positive total.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidPmf(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidPmf("weights sum to zero".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    /// Symbols with positive probability.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(x, _)| x)
    }

    fn sup_distance(&self, other: &Self) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for FinitePmf {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<FinitePmf> for Vec<f64> {
    fn from(pmf: FinitePmf) -> Self {
        pmf.probs
    }
}

fn check_alphabets(p: &FinitePmf, q: &FinitePmf) -> Result<()> {
    if p.alphabet_size() != q.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            left: p.alphabet_size(),
            right: q.alphabet_size(),
        });
    }
    Ok(())
}

/// `Σ_x √(p(x) q(x))`, the Bhattacharyya coefficient.
pub fn bhattacharyya_coefficient(p: &FinitePmf, q: &FinitePmf) -> Result<f64> {
    check_alphabets(p, q)?;
    Ok(p.probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a * b).sqrt())
        .sum())
}

/// Bhattacharyya distance `B(p, q) = -ln Σ_x √(p(x) q(x))`.
///
/// Returns `f64::INFINITY` for disjoint supports and exactly `0.0` for
/// identical inputs. Symmetric bit-for-bit since each summand is commutative.
pub fn bhattacharyya(p: &FinitePmf, q: &FinitePmf) -> Result<f64> {
    let coefficient = bhattacharyya_coefficient(p, q)?;
    if p == q {
        return Ok(0.0);
    }
    if coefficient == 0.0 {
        return Ok(f64::INFINITY);
    }
    // Rounding can push the coefficient a hair above 1 for near-equal inputs.
    Ok((-coefficient.ln()).max(0.0))
}

/// `D(p‖q) = Σ_{x: p(x)>0} p(x) ln(p(x)/q(x))`, `+inf` if `q` misses part of
/// the support of `p`.
pub fn kl_divergence(p: &FinitePmf, q: &FinitePmf) -> Result<f64> {
    check_alphabets(p, q)?;
    let mut total = 0.0;
    for (a, b) in p.probs.iter().zip(&q.probs) {
        if *a == 0.0 {
            continue;
        }
        if *b == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += a * (a / b).ln();
    }
    Ok(total)
}

/// Normalized geometric mean `√(p q) / Σ √(p q)`.
///
/// This is the dominant empirical type of the pairwise swap event; it
/// satisfies `D(P̃‖p) + D(P̃‖q) = 2 B(p, q)`.
pub fn tilted_midpoint(p: &FinitePmf, q: &FinitePmf) -> Result<FinitePmf> {
    check_alphabets(p, q)?;
    let unnormalized: Vec<f64> = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a * b).sqrt())
        .collect();
    let total: f64 = unnormalized.iter().sum();
    if total == 0.0 {
        return Err(Error::DisjointSupports);
    }
    FinitePmf::new(unnormalized.into_iter().map(|w| w / total).collect())
}

/// A 64-bit seed. Child seeds for independent streams come from
/// [`Seed::derive`], so per-trial randomness never depends on execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Default for Seed {
    fn default() -> Self {
        Seed(DEFAULT_SEED)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    /// Seed for the independent sub-stream `stream`.
    pub fn derive(self, stream: u64) -> Seed {
        Seed(splitmix64(
            self.0 ^ splitmix64(stream.wrapping_add(0x632B_E59B_D9B4_E019)),
        ))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Inverse-CDF sampler over a cached cumulative vector.
#[derive(Debug, Clone)]
pub struct SymbolSampler {
    cumulative: Vec<f64>,
    last_support: usize,
}

impl SymbolSampler {
    pub fn new(pmf: &FinitePmf) -> Self {
        let mut acc = 0.0;
        let cumulative = pmf
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last_support = pmf.support().last().expect("a pmf has nonempty support");
        Self {
            cumulative,
            last_support,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.last_support)
    }

    /// Draws `n` symbols and returns only their counts.
    pub fn draw_counts<R: Rng + ?Sized>(&self, rng: &mut R, n: usize, counts: &mut [u32]) {
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..n {
            counts[self.draw(rng)] += 1;
        }
    }
}

/// `n` i.i.d. draws from `p`; a pure function of `(p, n, seed)`.
pub fn sample_sequence(p: &FinitePmf, n: usize, seed: Seed) -> Vec<u32> {
    let sampler = SymbolSampler::new(p);
    let mut rng = seed.rng();
    (0..n).map(|_| sampler.draw(&mut rng) as u32).collect()
}

/// Ordered list of `A >= 2` pairwise distinct pmfs on a shared alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<FinitePmf>", into = "Vec<FinitePmf>")]
pub struct DistributionFamily {
    members: Vec<FinitePmf>,
}

impl DistributionFamily {
    pub fn new(members: Vec<FinitePmf>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::TooFewMembers(members.len()));
        }
        let m = members[0].alphabet_size();
        if let Some(bad) = members.iter().find(|p| p.alphabet_size() != m) {
            return Err(Error::AlphabetMismatch {
                left: m,
                right: bad.alphabet_size(),
            });
        }
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                if members[i].sup_distance(&members[j]) <= DISTINCT_TOLERANCE {
                    return Err(Error::NotDistinct(i, j));
                }
            }
        }
        Ok(Self { members })
    }

    /// `size` binary pmfs `(θ_i, 1-θ_i)` with `θ_i` equally spaced on
    /// `[theta_min, theta_max]`, endpoints included.
    pub fn binary_grid(size: usize, theta_min: f64, theta_max: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta_min)
            || !(0.0..=1.0).contains(&theta_max)
            || theta_min >= theta_max
        {
            return Err(Error::InvalidFamilySpec(format!(
                "binary-grid needs 0 <= theta_min < theta_max <= 1, got [{theta_min}, {theta_max}]"
            )));
        }
        if size < 2 {
            return Err(Error::TooFewMembers(size));
        }
        let steps = (size - 1) as f64;
        let members = (0..size)
            .map(|i| {
                let theta = (theta_min * (steps - i as f64) + theta_max * i as f64) / steps;
                FinitePmf::new(vec![theta, 1.0 - theta])
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    /// `size` pmfs on `alphabet` symbols, each the normalization of
    /// i.i.d. Exp(1) weights (uniform on the simplex).
    pub fn random_simplex(size: usize, alphabet: usize, seed: Seed) -> Result<Self> {
        if alphabet < 2 {
            return Err(Error::InvalidFamilySpec(format!(
                "random-simplex needs alphabet >= 2, got {alphabet}"
            )));
        }
        let mut rng = seed.rng();
        let members = (0..size)
            .map(|_| {
                let weights: Vec<f64> = (0..alphabet)
                    .map(|_| {
                        let u: f64 = Open01.sample(&mut rng);
                        -u.ln()
                    })
                    .collect();
                FinitePmf::from_weights(&weights)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    /// `size` pmfs on `size` symbols with every pairwise Bhattacharyya
    /// distance equal to `distance`: member `i` puts mass `α` on symbol `i`
    /// and spreads `1-α` evenly over the rest.
    pub fn equidistant(size: usize, distance: f64) -> Result<Self> {
        if size < 2 {
            return Err(Error::TooFewMembers(size));
        }
        if !(distance.is_finite() && distance > 0.0) {
            return Err(Error::InvalidFamilySpec(format!(
                "equidistant needs a finite positive distance, got {distance}"
            )));
        }
        let alpha = equidistant_peak(size, distance);
        let rest = (1.0 - alpha) / (size - 1) as f64;
        let members = (0..size)
            .map(|i| {
                let mut probs = vec![rest; size];
                probs[i] = alpha;
                FinitePmf::from_weights(&probs)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    pub fn members(&self) -> &[FinitePmf] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.members[0].alphabet_size()
    }

    /// Pairwise distances `B(P_i, P_j)` for `i < j`, in lexicographic pair order.
    pub fn pairwise_distances(&self) -> Vec<((usize, usize), f64)> {
        let a = self.len();
        let mut out = Vec::with_capacity(a * (a - 1) / 2);
        for i in 0..a {
            for j in (i + 1)..a {
                let b = bhattacharyya(&self.members[i], &self.members[j])
                    .expect("family members share an alphabet");
                out.push(((i, j), b));
            }
        }
        out
    }
}

impl TryFrom<Vec<FinitePmf>> for DistributionFamily {
    type Error = Error;

    fn try_from(members: Vec<FinitePmf>) -> Result<Self> {
        Self::new(members)
    }
}

impl From<DistributionFamily> for Vec<FinitePmf> {
    fn from(family: DistributionFamily) -> Self {
        family.members
    }
}

// Peak mass α such that the coefficient 2√(αβ) + (A-2)β equals e^{-distance},
// with β = (1-α)/(A-1). The coefficient decreases monotonically on [1/A, 1].
fn equidistant_peak(size: usize, distance: f64) -> f64 {
    let others = (size - 1) as f64;
    let coefficient = |alpha: f64| {
        let rest = (1.0 - alpha) / others;
        2.0 * (alpha * rest).sqrt() + (size as f64 - 2.0) * rest
    };
    let target = (-distance).exp();
    let (mut lo, mut hi) = (1.0 / size as f64, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if coefficient(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Declarative description of a family, as read from run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    Explicit {
        members: Vec<Vec<f64>>,
    },
    BinaryGrid {
        size: usize,
        theta_min: f64,
        theta_max: f64,
    },
    RandomSimplex {
        size: usize,
        alphabet: usize,
        #[serde(default)]
        seed: Seed,
    },
    Equidistant {
        size: usize,
        distance: f64,
    },
}

/// Builds the family a spec describes; deterministic in the spec (including
/// its seed, for `random-simplex`).
pub fn make_family(spec: &FamilySpec) -> Result<DistributionFamily> {
    match spec {
        FamilySpec::Explicit { members } => {
            let pmfs = members
                .iter()
                .cloned()
                .map(FinitePmf::new)
                .collect::<Result<Vec<_>>>()?;
            DistributionFamily::new(pmfs)
        }
        FamilySpec::BinaryGrid {
            size,
            theta_min,
            theta_max,
        } => DistributionFamily::binary_grid(*size, *theta_min, *theta_max),
        FamilySpec::RandomSimplex {
            size,
            alphabet,
            seed,
        } => DistributionFamily::random_simplex(*size, *alphabet, *seed),
        FamilySpec::Equidistant { size, distance } => {
            DistributionFamily::equidistant(*size, *distance)
        }
    }
}

/// `A` rows of `n` symbols; row `i` is the sequence observed at slot `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationBatch {
    alphabet: usize,
    rows: Vec<Vec<u32>>,
}

impl ObservationBatch {
    pub fn new(alphabet: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || n == 0 {
            return Err(Error::DimensionMismatch(
                "batch needs at least one row and n >= 1".into(),
            ));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(
                "batch rows have unequal lengths".into(),
            ));
        }
        if let Some(&symbol) = rows.iter().flatten().find(|&&s| s as usize >= alphabet) {
            return Err(Error::SymbolOutOfRange {
                symbol: symbol as usize,
                alphabet,
            });
        }
        Ok(Self { alphabet, rows })
    }

    /// Row `i` drawn i.i.d. from `P_i` (the true assignment is the identity),
    /// each row on its own derived stream.
    pub fn sample(family: &DistributionFamily, n: usize, seed: Seed) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("blocklength n must be >= 1".into()));
        }
        let rows = family
            .members()
            .iter()
            .enumerate()
            .map(|(i, p)| sample_sequence(p, n, seed.derive(i as u64)))
            .collect();
        Ok(Self {
            alphabet: family.alphabet_size(),
            rows,
        })
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn blocklength(&self) -> usize {
        self.rows[0].len()
    }

    /// Per-row symbol counts (the empirical types, unnormalized).
    pub fn counts(&self) -> Vec<Vec<u32>> {
        self.rows
            .iter()
            .map(|row| {
                let mut counts = vec![0u32; self.alphabet];
                for &s in row {
                    counts[s as usize] += 1;
                }
                counts
            })
            .collect()
    }
}
