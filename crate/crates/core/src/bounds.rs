//! Closed-form error bounds driven by the pairwise criterion sum
//!
//! ```text
//! S = Σ_{i<j} exp(-2 n B(P_i, P_j))
//! ```
//!
//! together with the cycle-sum union bound, the cycle-count ratio, and an
//! empirical identifiability trend along a growing family sequence.
//!
//! Sums of exponentials run in the log domain: with thousands of members and
//! blocklengths in the hundreds, individual terms underflow `f64`.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::dist::{make_family, DistributionFamily, FamilySpec, Seed};
use crate::error::{Error, Result};
use crate::graphlemma::enumerate_cycles;
use crate::math::{least_squares, ln_choose, log_sum_exp};

/// Largest family size accepted by [`cycle_sum_bound`].
pub const CYCLE_SUM_MAX_A: usize = 9;

/// Default number of explicit pair evaluations allowed per grid point in
/// [`identifiability_verdict`].
pub const DEFAULT_PAIR_BUDGET: u64 = 10_000;

/// Slope magnitude separating a decaying criterion sum from a flat one.
pub const TREND_SLOPE_THRESHOLD: f64 = 1e-6;

/// The criterion sum and its natural log (`-inf` when every pair is disjoint).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseSum {
    pub s: f64,
    #[serde(with = "crate::serde_ext")]
    pub log_s: f64,
}

/// `S = Σ_{i<j} e^{-2nB(P_i,P_j)}` via log-sum-exp over pairs in
/// lexicographic order. Pairs at infinite distance contribute exactly zero.
pub fn pairwise_sum(family: &DistributionFamily, n: usize) -> Result<PairwiseSum> {
    if n == 0 {
        return Err(Error::InvalidArgument("blocklength n must be >= 1".into()));
    }
    let blocklength = n as f64;
    let log_terms: Vec<f64> = family
        .pairwise_distances()
        .into_iter()
        .map(|(_, b)| -2.0 * (blocklength * b))
        .collect();
    let log_s = log_sum_exp(&log_terms);
    Ok(PairwiseSum {
        s: log_s.exp(),
        log_s,
    })
}

/// Result of the geometric-series upper bound `16 S / (1 - 4√S)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum UpperBound {
    /// `value` is at most 1; `clamped` records that the raw formula exceeded 1.
    Applicable { value: f64, clamped: bool },
    /// `4√S >= 1`: the series behind the bound diverges.
    NotApplicable,
}

impl UpperBound {
    pub fn value(&self) -> Option<f64> {
        match self {
            UpperBound::Applicable { value, .. } => Some(*value),
            UpperBound::NotApplicable => None,
        }
    }

    pub fn is_applicable(&self) -> bool {
        matches!(self, UpperBound::Applicable { .. })
    }
}

fn check_criterion(s: f64) -> Result<()> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "criterion sum must be >= 0, got {s}"
        )));
    }
    Ok(())
}

/// Raw (unclamped) `16 S / (1 - 4√S)`; `None` when `4√S >= 1`.
pub fn upper_bound_raw(s: f64) -> Result<Option<f64>> {
    check_criterion(s)?;
    let root = s.sqrt();
    if 4.0 * root < 1.0 {
        Ok(Some(16.0 * s / (1.0 - 4.0 * root)))
    } else {
        Ok(None)
    }
}

pub fn upper_bound(s: f64) -> Result<UpperBound> {
    Ok(match upper_bound_raw(s)? {
        Some(raw) if raw > 1.0 => UpperBound::Applicable {
            value: 1.0,
            clamped: true,
        },
        Some(raw) => UpperBound::Applicable {
            value: raw,
            clamped: false,
        },
        None => UpperBound::NotApplicable,
    })
}

/// `√S / (8 + √S)`, in `[0, 1)` for finite `S`.
pub fn lower_bound(s: f64) -> Result<f64> {
    check_criterion(s)?;
    // 1/(1 + 8/√S) keeps S = 0 and S = inf well defined.
    Ok(1.0 / (1.0 + 8.0 / s.sqrt()))
}

/// Criterion sum and both bounds for one family at one blocklength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: u64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "log_S", with = "crate::serde_ext")]
    pub log_s: f64,
    pub upper: UpperBound,
    pub lower: f64,
}

impl BoundReport {
    pub fn from_log_s(n: usize, a: u64, log_s: f64) -> Result<Self> {
        let s = log_s.exp();
        Ok(Self {
            n,
            a,
            s,
            log_s,
            upper: upper_bound(s)?,
            lower: lower_bound(s)?,
        })
    }

    pub fn compute(family: &DistributionFamily, n: usize) -> Result<Self> {
        let sum = pairwise_sum(family, n)?;
        Self::from_log_s(n, family.len() as u64, sum.log_s)
    }
}

/// `Σ_{r=2}^{r_max} Σ_{c ∈ C_A^{(r)}} G(c)` on `K_A` with edge weights
/// `e^{-nB(P_i,P_j)}`. With `r_max = A` this is the full cycle union bound;
/// with `r_max = 2` it reproduces [`pairwise_sum`] exactly.
pub fn cycle_sum_bound(family: &DistributionFamily, n: usize, r_max: usize) -> Result<f64> {
    let a = family.len();
    if a > CYCLE_SUM_MAX_A {
        return Err(Error::TooLarge(format!(
            "cycle enumeration supports A <= {CYCLE_SUM_MAX_A}, got {a}"
        )));
    }
    if !(2..=a).contains(&r_max) {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= r_max <= {a}, got {r_max}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("blocklength n must be >= 1".into()));
    }
    let blocklength = n as f64;
    let mut log_edge = vec![vec![0.0; a]; a];
    for ((i, j), b) in family.pairwise_distances() {
        log_edge[i][j] = -(blocklength * b);
        log_edge[j][i] = log_edge[i][j];
    }
    let mut log_gains = Vec::new();
    for r in 2..=r_max {
        for cycle in enumerate_cycles(a, r)? {
            log_gains.push(cycle.edges().map(|(u, v)| log_edge[u][v]).sum::<f64>());
        }
    }
    Ok(log_sum_exp(&log_gains).exp())
}

fn check_ratio_args(k: usize, r: usize) -> Result<()> {
    if !(2 <= r && r <= k) {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= r <= k, got k={k}, r={r}"
        )));
    }
    Ok(())
}

/// `N_{r,k} / n_k^{r/2}` with `N_{r,k} = C(k,r)(r-1)!/2` and `n_k = C(k,2)`,
/// evaluated in the log domain.
pub fn count_ratio(k: usize, r: usize) -> Result<f64> {
    check_ratio_args(k, r)?;
    let ln_arrangements: f64 = (1..r).map(|x| (x as f64).ln()).sum();
    let ln_cycles = ln_choose(k as f64, r as u64) + ln_arrangements - 2f64.ln();
    let ln_edges = ln_choose(k as f64, 2);
    Ok((ln_cycles - r as f64 / 2.0 * ln_edges).exp())
}

/// Exact check of `N_{r,k} / n_k^{r/2} <= 4^r` in integers:
/// `(2N)² <= 4 · 16^r · n_k^r`.
pub fn count_ratio_within_4_pow_r(k: usize, r: usize) -> Result<bool> {
    check_ratio_args(k, r)?;
    let big = |x: usize| BigUint::from(x);
    let mut subsets = BigUint::one();
    for i in 0..r {
        subsets = subsets * big(k - i) / big(i + 1);
    }
    let arrangements: BigUint = (1..r).map(big).product();
    let twice_cycles = subsets * arrangements;
    let edges = big(k * (k - 1) / 2);
    let lhs = &twice_cycles * &twice_cycles;
    let rhs = big(4) * big(16).pow(r as u32) * edges.pow(r as u32);
    Ok(lhs <= rhs)
}

/// How the family size grows with the blocklength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GrowthRule {
    Constant {
        size: u64,
    },
    /// `⌈n^degree⌉`
    Polynomial {
        degree: f64,
    },
    /// `⌈e^{rate·n}⌉`
    Exponential {
        rate: f64,
    },
}

impl GrowthRule {
    pub fn size(&self, n: usize) -> Result<u64> {
        let raw = match self {
            GrowthRule::Constant { size } => return check_size(*size, n),
            GrowthRule::Polynomial { degree } => (n as f64).powf(*degree).ceil(),
            GrowthRule::Exponential { rate } => (rate * n as f64).exp().ceil(),
        };
        if !raw.is_finite() || raw > 2f64.powi(53) {
            return Err(Error::TooLarge(format!("family size {raw} at n={n}")));
        }
        check_size(raw as u64, n)
    }
}

fn check_size(size: u64, n: usize) -> Result<u64> {
    if size < 2 {
        return Err(Error::InvalidArgument(format!(
            "growth rule gives A={size} < 2 at n={n}"
        )));
    }
    Ok(size)
}

/// A family generator with the size left open.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyTemplate {
    /// The first `A_n` members of a fixed list.
    Explicit {
        members: Vec<Vec<f64>>,
    },
    BinaryGrid {
        theta_min: f64,
        theta_max: f64,
    },
    RandomSimplex {
        alphabet: usize,
        #[serde(default)]
        seed: Seed,
    },
    Equidistant {
        distance: f64,
    },
}

impl FamilyTemplate {
    pub fn instantiate(&self, size: usize) -> Result<FamilySpec> {
        Ok(match self {
            FamilyTemplate::Explicit { members } => {
                if size > members.len() {
                    return Err(Error::InvalidFamilySpec(format!(
                        "explicit template has {} members, A_n = {size}",
                        members.len()
                    )));
                }
                FamilySpec::Explicit {
                    members: members[..size].to_vec(),
                }
            }
            FamilyTemplate::BinaryGrid {
                theta_min,
                theta_max,
            } => FamilySpec::BinaryGrid {
                size,
                theta_min: *theta_min,
                theta_max: *theta_max,
            },
            FamilyTemplate::RandomSimplex { alphabet, seed } => FamilySpec::RandomSimplex {
                size,
                alphabet: *alphabet,
                seed: *seed,
            },
            FamilyTemplate::Equidistant { distance } => FamilySpec::Equidistant {
                size,
                distance: *distance,
            },
        })
    }

    /// `ln S` without building the family, for templates whose pairwise
    /// distance multiset is known in closed form.
    pub fn closed_form_log_s(&self, size: u64, n: usize) -> Option<f64> {
        match self {
            FamilyTemplate::Equidistant { distance } => {
                Some(ln_choose(size as f64, 2) - 2.0 * n as f64 * distance)
            }
            _ => None,
        }
    }
}

/// A family sequence `n ↦ {P_1, …, P_{A_n}}` sampled on a blocklength grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySequenceSpec {
    pub growth: GrowthRule,
    pub family: FamilyTemplate,
    pub n_grid: Vec<usize>,
    #[serde(default = "default_pair_budget")]
    pub pair_budget: u64,
}

fn default_pair_budget() -> u64 {
    DEFAULT_PAIR_BUDGET
}

impl FamilySequenceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.len() < 3 {
            return Err(Error::InvalidArgument(
                "n_grid needs at least 3 points".into(),
            ));
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "n_grid must be strictly increasing and start at n >= 1".into(),
            ));
        }
        for &n in &self.n_grid {
            self.growth.size(n)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluation {
    /// Every pair evaluated on the instantiated family.
    Explicit,
    /// Pair count exceeded the budget; the template's closed form was used.
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: u64,
    #[serde(rename = "log_S", with = "crate::serde_ext")]
    pub log_s: f64,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    IdentifiableTrend,
    NotIdentifiableTrend,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::IdentifiableTrend => "identifiable-trend",
            Verdict::NotIdentifiableTrend => "not-identifiable-trend",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// `ln S_n` along the grid and a trend label. The label is an empirical
/// reading of a finite grid, not a proof about the limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub points: Vec<TrendPoint>,
    /// Least-squares slope of `ln S` against `n` over the fitted window
    /// (`-inf` when `S` vanishes there).
    #[serde(with = "crate::serde_ext")]
    pub slope: f64,
    /// Number of trailing grid points used for the fit.
    pub window: usize,
    pub verdict: Verdict,
}

pub fn identifiability_verdict(spec: &FamilySequenceSpec) -> Result<TrendReport> {
    spec.validate()?;
    let mut points = Vec::with_capacity(spec.n_grid.len());
    for &n in &spec.n_grid {
        let a = spec.growth.size(n)?;
        let pairs = a as f64 * (a as f64 - 1.0) / 2.0;
        let (log_s, evaluation) = if pairs <= spec.pair_budget as f64 {
            let family = make_family(&spec.family.instantiate(a as usize)?)?;
            (pairwise_sum(&family, n)?.log_s, Evaluation::Explicit)
        } else if let Some(log_s) = spec.family.closed_form_log_s(a, n) {
            (log_s, Evaluation::ClosedForm)
        } else {
            return Err(Error::TooLarge(format!(
                "A_n = {a} at n = {n} needs {pairs} pair evaluations (budget {})",
                spec.pair_budget
            )));
        };
        points.push(TrendPoint {
            n,
            a,
            log_s,
            evaluation,
        });
    }

    let window = points.len().div_ceil(2);
    let tail = &points[points.len() - window..];
    let (slope, verdict) = classify_trend(tail);
    Ok(TrendReport {
        points,
        slope,
        window,
        verdict,
    })
}

fn classify_trend(tail: &[TrendPoint]) -> (f64, Verdict) {
    let last = tail.last().expect("window is nonempty");
    if last.log_s == f64::NEG_INFINITY {
        // S is exactly zero at the end of the grid.
        let verdict = if tail.iter().all(|p| p.log_s == f64::NEG_INFINITY) {
            Verdict::IdentifiableTrend
        } else {
            Verdict::Inconclusive
        };
        return (f64::NEG_INFINITY, verdict);
    }
    if tail.iter().any(|p| !p.log_s.is_finite()) {
        return (f64::NAN, Verdict::Inconclusive);
    }
    let xs: Vec<f64> = tail.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.log_s).collect();
    let (slope, _) = least_squares(&xs, &ys).expect("window has >= 2 distinct n");
    let decreasing = ys.windows(2).all(|w| w[1] < w[0]);
    let verdict = if slope < -TREND_SLOPE_THRESHOLD {
        if decreasing {
            Verdict::IdentifiableTrend
        } else {
            Verdict::Inconclusive
        }
    } else {
        // flat (bounded below) or increasing
        Verdict::NotIdentifiableTrend
    };
    (slope, verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::FinitePmf;
    use approx::assert_relative_eq;

    fn family(members: &[&[f64]]) -> DistributionFamily {
        DistributionFamily::new(
            members
                .iter()
                .map(|p| FinitePmf::new(p.to_vec()).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn pairwise_sum_examples() {
        let disjoint = family(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let sum = pairwise_sum(&disjoint, 7).unwrap();
        assert_eq!(sum.s, 0.0);
        assert_eq!(sum.log_s, f64::NEG_INFINITY);

        // e^{-2nB} = (2/√5)^{2n} = (4/5)^n
        let f = family(&[&[0.5, 0.5], &[0.9, 0.1]]);
        let sum = pairwise_sum(&f, 10).unwrap();
        assert_relative_eq!(sum.s, 0.8f64.powi(10), max_relative = 1e-12);
        assert_relative_eq!(sum.s, 0.107_374_182_4, max_relative = 1e-9);
        assert!(pairwise_sum(&f, 0).is_err());
    }

    #[test]
    fn three_equidistant_binary_pmfs() {
        let f = DistributionFamily::equidistant(3, 0.05).unwrap();
        let direct: f64 = f
            .pairwise_distances()
            .iter()
            .map(|(_, b)| (-2.0 * 12.0 * b).exp())
            .sum();
        let sum = pairwise_sum(&f, 12).unwrap();
        assert_relative_eq!(
            sum.s,
            3.0 * (-2.0 * 12.0 * 0.05f64).exp(),
            max_relative = 1e-9
        );
        assert_relative_eq!(sum.s, direct, max_relative = 1e-12);
    }

    #[test]
    fn upper_bound_examples() {
        assert_eq!(
            upper_bound(0.0).unwrap(),
            UpperBound::Applicable {
                value: 0.0,
                clamped: false
            }
        );
        let u = upper_bound(1e-4).unwrap().value().unwrap();
        assert_relative_eq!(u, 16e-4 / 0.96, max_relative = 1e-12);
        assert_eq!(upper_bound(0.1).unwrap(), UpperBound::NotApplicable);
        assert_eq!(upper_bound(1.0 / 16.0).unwrap(), UpperBound::NotApplicable);
        // 16·0.05/(1-4√0.05) ≈ 7.5 > 1
        assert_eq!(
            upper_bound(0.05).unwrap(),
            UpperBound::Applicable {
                value: 1.0,
                clamped: true
            }
        );
        assert!(upper_bound(-1e-3).is_err());
        assert!(upper_bound(f64::NAN).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(lower_bound(0.0).unwrap(), 0.0);
        assert_relative_eq!(lower_bound(0.01).unwrap(), 0.1 / 8.1, max_relative = 1e-12);
        assert_relative_eq!(lower_bound(64.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_eq!(lower_bound(f64::INFINITY).unwrap(), 1.0);
        assert!(lower_bound(-1.0).is_err());
    }

    #[test]
    fn cycle_sum_small_families() {
        let f = family(&[&[0.5, 0.5], &[0.9, 0.1]]);
        assert_eq!(
            cycle_sum_bound(&f, 10, 2).unwrap(),
            pairwise_sum(&f, 10).unwrap().s
        );

        let g = DistributionFamily::binary_grid(3, 0.2, 0.8).unwrap();
        assert_eq!(
            cycle_sum_bound(&g, 5, 2).unwrap(),
            pairwise_sum(&g, 5).unwrap().s
        );

        let big = DistributionFamily::binary_grid(10, 0.05, 0.95).unwrap();
        assert!(matches!(
            cycle_sum_bound(&big, 5, 2),
            Err(Error::TooLarge(_))
        ));
        assert!(cycle_sum_bound(&g, 5, 4).is_err());
        assert!(cycle_sum_bound(&g, 5, 1).is_err());
    }

    #[test]
    fn cycle_sum_under_geometric_chain() {
        let f = DistributionFamily::binary_grid(4, 0.1, 0.9).unwrap();
        for n in [5, 20, 80] {
            let s = pairwise_sum(&f, n).unwrap().s;
            let chain: f64 = (2..=4).map(|r| 4f64.powi(r) * s.powf(r as f64 / 2.0)).sum();
            assert!(cycle_sum_bound(&f, n, 4).unwrap() <= chain);
        }
    }

    #[test]
    fn count_ratio_examples() {
        assert_relative_eq!(count_ratio(4, 4).unwrap(), 3.0 / 36.0, max_relative = 1e-12);
        assert_relative_eq!(
            count_ratio(5, 3).unwrap(),
            10.0 / 10f64.powf(1.5),
            max_relative = 1e-12
        );
        assert_relative_eq!(count_ratio(4, 2).unwrap(), 0.5, max_relative = 1e-12);
        assert!(count_ratio(3, 4).is_err());
        assert!(count_ratio(3, 1).is_err());
        assert!(count_ratio_within_4_pow_r(64, 64).unwrap());
    }

    #[test]
    fn growth_rules() {
        assert_eq!(GrowthRule::Constant { size: 3 }.size(10).unwrap(), 3);
        assert_eq!(GrowthRule::Polynomial { degree: 1.5 }.size(4).unwrap(), 8);
        assert_eq!(GrowthRule::Exponential { rate: 0.1 }.size(10).unwrap(), 3);
        assert!(GrowthRule::Polynomial { degree: 1.0 }.size(1).is_err());
        assert!(GrowthRule::Exponential { rate: 1.0 }.size(100).is_err());
    }

    fn sequence(
        growth: GrowthRule,
        family: FamilyTemplate,
        n_grid: Vec<usize>,
    ) -> FamilySequenceSpec {
        FamilySequenceSpec {
            growth,
            family,
            n_grid,
            pair_budget: DEFAULT_PAIR_BUDGET,
        }
    }

    #[test]
    fn verdict_constant_binary_pair() {
        let spec = sequence(
            GrowthRule::Constant { size: 2 },
            FamilyTemplate::Explicit {
                members: vec![vec![0.5, 0.5], vec![0.9, 0.1]],
            },
            (1..=10).map(|i| 10 * i).collect(),
        );
        let report = identifiability_verdict(&spec).unwrap();
        assert_eq!(report.verdict, Verdict::IdentifiableTrend);
        assert_relative_eq!(report.slope, -(1.25f64).ln(), max_relative = 1e-9);
        assert_eq!(report.window, 5);
    }

    #[test]
    fn verdict_disjoint_family() {
        let spec = sequence(
            GrowthRule::Constant { size: 2 },
            FamilyTemplate::Explicit {
                members: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            },
            vec![1, 2, 3],
        );
        let report = identifiability_verdict(&spec).unwrap();
        assert_eq!(report.verdict, Verdict::IdentifiableTrend);
    }

    #[test]
    fn verdict_validation() {
        let template = FamilyTemplate::BinaryGrid {
            theta_min: 0.1,
            theta_max: 0.9,
        };
        let bad_grid = sequence(
            GrowthRule::Constant { size: 2 },
            template.clone(),
            vec![10, 10, 20],
        );
        assert!(identifiability_verdict(&bad_grid).is_err());
        let short = sequence(
            GrowthRule::Constant { size: 2 },
            template.clone(),
            vec![10, 20],
        );
        assert!(identifiability_verdict(&short).is_err());
        // binary-grid has no closed form, so an over-budget size is an error
        let over = sequence(
            GrowthRule::Exponential { rate: 0.1 },
            template,
            vec![10, 50, 100],
        );
        assert!(matches!(
            identifiability_verdict(&over),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn closed_form_matches_explicit_within_budget() {
        let template = FamilyTemplate::Equidistant { distance: 0.02 };
        for (a, n) in [(2u64, 10usize), (9, 50), (60, 120)] {
            let family = make_family(&template.instantiate(a as usize).unwrap()).unwrap();
            let explicit = pairwise_sum(&family, n).unwrap().log_s;
            let closed = template.closed_form_log_s(a, n).unwrap();
            assert_relative_eq!(explicit, closed, max_relative = 1e-9, epsilon = 1e-9);
        }
    }

    #[test]
    fn flat_and_noisy_trends() {
        let point = |n, log_s| TrendPoint {
            n,
            a: 2,
            log_s,
            evaluation: Evaluation::Explicit,
        };
        let flat = [point(1, -1.0), point(2, -1.0), point(3, -1.0)];
        assert_eq!(classify_trend(&flat).1, Verdict::NotIdentifiableTrend);
        let rising = [point(1, -3.0), point(2, -2.0), point(3, -1.0)];
        assert_eq!(classify_trend(&rising).1, Verdict::NotIdentifiableTrend);
        let bumpy = [
            point(1, -1.0),
            point(2, -3.0),
            point(3, -2.9),
            point(4, -5.0),
        ];
        assert_eq!(classify_trend(&bumpy).1, Verdict::Inconclusive);
    }
}
