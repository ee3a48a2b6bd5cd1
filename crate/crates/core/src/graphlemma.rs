//! Cycles in weighted complete graphs and the mean-cycle-gain inequality.
//!
//! For `K_k` with edge weights `a_1 … a_{n_k}` (`n_k = C(k,2)`) and the
//! `N_{r,k}` simple cycles of length `r`, the inequality checked here is
//!
//! ```text
//! (1/N_{r,k}) Σ_c G(c)  <=  ((a_1² + … + a_{n_k}²) / n_k)^{r/2}
//! ```
//!
//! where `G(c)` is the product of the weights along `c`.
//!
//! A 2-cycle is an unordered pair whose edge is traversed twice, so its gain
//! is `a²` and `N_{2,k} = C(k,2)`. For `r >= 3`, `N_{r,k} = C(k,r)(r-1)!/2`.

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::Seed;
use crate::error::{Error, Result};
use crate::math::choose;

/// Largest `k` accepted by [`enumerate_cycles`].
pub const ENUMERATE_MAX_K: usize = 10;
/// Largest `k` accepted by [`verify_lemma`].
pub const LEMMA_MAX_K: usize = 9;
/// Largest `k` accepted by [`verify_facts`].
pub const FACTS_MAX_K: usize = 6;

/// Relative slack allowed on the right-hand side of the inequality.
pub const LEMMA_RELATIVE_SLACK: f64 = 1e-12;

/// `K_k` with one nonnegative weight per unordered pair `(i, j)`, `i < j`,
/// stored in lexicographic pair order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedCompleteGraph {
    k: usize,
    weights: Vec<f64>,
}

impl WeightedCompleteGraph {
    pub fn new(k: usize, weights: Vec<f64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!(
                "graph needs k >= 2, got {k}"
            )));
        }
        let edges = k * (k - 1) / 2;
        if weights.len() != edges {
            return Err(Error::DimensionMismatch(format!(
                "K_{k} has {edges} edges, got {} weights",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument(
                "edge weights must be finite and >= 0".into(),
            ));
        }
        Ok(Self { k, weights })
    }

    pub fn uniform(k: usize, weight: f64) -> Result<Self> {
        Self::new(k, vec![weight; k.saturating_sub(1) * k / 2])
    }

    /// Weights drawn i.i.d. uniform on `[0, 1)`.
    pub fn random(k: usize, seed: Seed) -> Result<Self> {
        let mut rng = seed.rng();
        Self::new(
            k,
            (0..k * k.saturating_sub(1) / 2)
                .map(|_| rng.random())
                .collect(),
        )
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_edges(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.weights[edge_index(self.k, u, v)]
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.k, self.weights.iter().map(|w| w * factor).collect())
    }
}

/// Position of the unordered pair `{u, v}` in lexicographic order over `K_k`.
pub fn edge_index(k: usize, u: usize, v: usize) -> usize {
    let (i, j) = if u < v { (u, v) } else { (v, u) };
    debug_assert!(j < k && i != j);
    i * (2 * k - i - 1) / 2 + (j - i - 1)
}

/// A simple cycle as a vertex sequence in canonical form: the smallest vertex
/// first and, for `r >= 3`, the second vertex smaller than the last.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cycle {
    vertices: Vec<usize>,
}

impl Cycle {
    pub fn new(vertices: Vec<usize>) -> Result<Self> {
        let r = vertices.len();
        if r < 2 {
            return Err(Error::InvalidArgument(
                "a cycle needs at least 2 vertices".into(),
            ));
        }
        if !vertices.iter().all_unique() {
            return Err(Error::InvalidArgument(format!(
                "repeated vertex in {vertices:?}"
            )));
        }
        let min = *vertices.iter().min().unwrap();
        if vertices[0] != min
            || (r >= 3 && vertices[1] > vertices[r - 1])
            || (r == 2 && vertices[1] < vertices[0])
        {
            return Err(Error::InvalidArgument(format!(
                "{vertices:?} is not canonical"
            )));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// The `r` traversed edges `(v_t, v_{t+1 mod r})`. For a 2-cycle this
    /// lists the same pair twice.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let r = self.vertices.len();
        (0..r).map(move |t| (self.vertices[t], self.vertices[(t + 1) % r]))
    }
}

fn check_range(k: usize, r: usize, max_k: usize) -> Result<()> {
    if !(2 <= r && r <= k && k <= max_k) {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= r <= k <= {max_k}, got k={k}, r={r}"
        )));
    }
    Ok(())
}

/// Number of length-`r` cycles in `K_k` under the 2-cycle convention above.
pub fn cycle_count(k: usize, r: usize) -> Option<u64> {
    if r < 2 || r > k {
        return None;
    }
    let subsets = choose(k as u64, r as u64)?;
    if r == 2 {
        return Some(subsets);
    }
    let arrangements = (1..r as u64).try_fold(1u64, |acc, x| acc.checked_mul(x))? / 2;
    subsets.checked_mul(arrangements)
}

/// Every simple cycle of length `r` in `K_k`, each exactly once, in canonical
/// form. Vertex subsets come in lexicographic order; within a subset, the
/// smallest vertex is fixed and the remaining orderings with
/// `second < last` are kept, which rules out reversed duplicates.
pub fn enumerate_cycles(k: usize, r: usize) -> Result<Vec<Cycle>> {
    check_range(k, r, ENUMERATE_MAX_K)?;
    let mut cycles = Vec::with_capacity(cycle_count(k, r).unwrap_or(0) as usize);
    for subset in (0..k).combinations(r) {
        let first = subset[0];
        for rest in subset[1..].iter().copied().permutations(r - 1) {
            if r >= 3 && rest[0] > rest[r - 2] {
                continue;
            }
            let mut vertices = Vec::with_capacity(r);
            vertices.push(first);
            vertices.extend(rest);
            cycles.push(Cycle { vertices });
        }
    }
    Ok(cycles)
}

/// `G(c) = Π` of the weights along `c`; a 2-cycle yields `a²`.
pub fn cycle_gain(graph: &WeightedCompleteGraph, cycle: &Cycle) -> Result<f64> {
    if let Some(&v) = cycle.vertices.iter().find(|&&v| v >= graph.k) {
        return Err(Error::InvalidArgument(format!(
            "vertex {v} out of range for K_{}",
            graph.k
        )));
    }
    Ok(cycle.edges().map(|(u, v)| graph.weight(u, v)).product())
}

/// How many times each edge is traversed across all length-`r` cycles,
/// indexed like the graph's weights.
pub fn edge_incidence(k: usize, r: usize) -> Result<Vec<u64>> {
    let cycles = enumerate_cycles(k, r)?;
    let mut counts = vec![0u64; k * (k - 1) / 2];
    for cycle in &cycles {
        for (u, v) in cycle.edges() {
            counts[edge_index(k, u, v)] += 1;
        }
    }
    Ok(counts)
}

/// Both sides of the mean-gain inequality for one graph and cycle length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub k: usize,
    pub r: usize,
    /// Mean cycle gain.
    pub lhs: f64,
    /// Quadratic mean of the weights raised to `r`.
    pub rhs: f64,
    pub holds: bool,
}

pub fn verify_lemma(graph: &WeightedCompleteGraph, r: usize) -> Result<LemmaCheck> {
    let k = graph.k;
    check_range(k, r, LEMMA_MAX_K)?;
    let cycles = enumerate_cycles(k, r)?;
    let total: f64 = cycles
        .iter()
        .map(|c| c.edges().map(|(u, v)| graph.weight(u, v)).product::<f64>())
        .sum();
    let lhs = total / cycles.len() as f64;
    let mean_square = graph.weights.iter().map(|a| a * a).sum::<f64>() / graph.num_edges() as f64;
    let rhs = mean_square.powf(r as f64 / 2.0);
    Ok(LemmaCheck {
        k,
        r,
        lhs,
        rhs,
        holds: lhs <= rhs + LEMMA_RELATIVE_SLACK * rhs,
    })
}

/// Counting identities behind the even-`r` grouping argument, for the
/// expansion of `(N r / n)(a_1² + … + a_n²)^{r/2}` into unit-coefficient
/// monomials (`N = N_{r,k}`, `n = n_k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactsReport {
    pub k: usize,
    pub r: usize,
    pub cycles: u64,
    pub edges: u64,
    /// `N r / n`, the number of cycles through each edge.
    pub per_edge_cycles: u64,
    /// Monomial count from the multinomial coefficient sum.
    pub monomials_enumerated: u64,
    /// `(N r / n) n^{r/2}`.
    pub monomials_expected: u64,
    /// Total degree of each `a_i` across all monomials, by exponent accounting.
    pub degree_per_weight: Vec<u64>,
    /// `(N r / n) r n^{r/2 - 1}`.
    pub degree_expected: u64,
    /// `ln Π monomials` at seeded positive weights, summed term by term.
    pub log_product_enumerated: f64,
    /// `degree_expected · Σ ln a_i` at the same weights.
    pub log_product_expected: f64,
    /// `monomials_enumerated / N`.
    pub group_size: u64,
    /// `r n^{r/2 - 1}`.
    pub group_size_expected: u64,
    pub fact1_holds: bool,
    pub fact2_holds: bool,
    pub fact3_holds: bool,
    pub fact4_holds: bool,
}

impl FactsReport {
    pub fn all_hold(&self) -> bool {
        self.fact1_holds && self.fact2_holds && self.fact3_holds && self.fact4_holds
    }
}

/// Numerically checks the four counting facts for even `r`, `2 <= r <= k <= 6`.
///
/// The expansion is never materialized: monomials of `(Σ a_i²)^{r/2}` are
/// indexed by exponent vectors `e` with `|e| = r/2` and carry multinomial
/// multiplicity `(r/2)! / Π e_i!`. Summing multiplicities counts monomials;
/// summing `multiplicity · 2 e_i` gives each weight's total degree.
pub fn verify_facts(k: usize, r: usize, seed: Seed) -> Result<FactsReport> {
    check_range(k, r, FACTS_MAX_K)?;
    if !r.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "facts need even r, got {r}"
        )));
    }
    let half = r / 2;
    let edges = (k * (k - 1) / 2) as u64;
    let enumerated_cycles = enumerate_cycles(k, r)?.len() as u64;
    let cycles = cycle_count(k, r).expect("small k");
    let incidence = edge_incidence(k, r)?;
    let per_edge_cycles = incidence[0];
    let fact1_holds = enumerated_cycles == cycles
        && incidence.iter().all(|&c| c == per_edge_cycles)
        && per_edge_cycles * edges == cycles * r as u64;

    let mut rng = seed.rng();
    let log_weights: Vec<f64> = (0..edges)
        .map(|_| rng.random_range(0.05..2.0f64).ln())
        .collect();

    let mut monomials = 0u64;
    let mut degree = vec![0u64; edges as usize];
    let mut log_product = 0.0;
    for exponents in compositions(half, edges as usize) {
        let multiplicity = multinomial(half, &exponents);
        monomials += multiplicity;
        for (i, &e) in exponents.iter().enumerate() {
            degree[i] += multiplicity * 2 * e as u64;
            log_product += (multiplicity * 2 * e as u64) as f64 * log_weights[i];
        }
    }
    monomials *= per_edge_cycles;
    degree.iter_mut().for_each(|d| *d *= per_edge_cycles);
    log_product *= per_edge_cycles as f64;

    let n_pow = |p: usize| edges.pow(p as u32);
    let monomials_expected = per_edge_cycles * n_pow(half);
    let degree_expected = per_edge_cycles * r as u64 * n_pow(half - 1);
    let log_product_expected = degree_expected as f64 * log_weights.iter().sum::<f64>();
    let group_size_expected = r as u64 * n_pow(half - 1);
    let group_size = monomials / cycles;

    let fact3_numeric =
        (log_product - log_product_expected).abs() <= 1e-9 * log_product_expected.abs().max(1.0);
    Ok(FactsReport {
        k,
        r,
        cycles,
        edges,
        per_edge_cycles,
        monomials_enumerated: monomials,
        monomials_expected,
        fact2_holds: monomials == monomials_expected,
        fact3_holds: degree.iter().all(|&d| d == degree_expected) && fact3_numeric,
        fact4_holds: monomials.is_multiple_of(cycles) && group_size == group_size_expected,
        degree_per_weight: degree,
        degree_expected,
        log_product_enumerated: log_product,
        log_product_expected,
        group_size,
        group_size_expected,
        fact1_holds,
    })
}

// All vectors of `parts` nonnegative integers summing to `total`.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn fill(remaining: usize, slot: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slot + 1 == current.len() {
            current[slot] = remaining;
            out.push(current.clone());
            return;
        }
        for take in 0..=remaining {
            current[slot] = take;
            fill(remaining - take, slot + 1, current, out);
        }
    }
    let mut out = Vec::new();
    fill(total, 0, &mut vec![0; parts], &mut out);
    out
}

fn multinomial(total: usize, exponents: &[usize]) -> u64 {
    let factorial = |x: usize| (1..=x as u64).product::<u64>();
    factorial(total) / exponents.iter().map(|&e| factorial(e)).product::<u64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_indexing_is_lexicographic() {
        let k = 4;
        let mut expected = 0;
        for i in 0..k {
            for j in (i + 1)..k {
                assert_eq!(edge_index(k, i, j), expected);
                assert_eq!(edge_index(k, j, i), expected);
                expected += 1;
            }
        }
    }

    #[test]
    fn cycle_counts() {
        assert_eq!(enumerate_cycles(4, 4).unwrap().len(), 3);
        assert_eq!(enumerate_cycles(5, 3).unwrap().len(), 10);
        let pairs = enumerate_cycles(3, 2).unwrap();
        assert_eq!(pairs.len(), 3);
        assert_eq!(pairs[0].vertices(), &[0, 1]);
        assert_eq!(cycle_count(10, 10), Some(181_440));
        assert!(enumerate_cycles(11, 3).is_err());
        assert!(enumerate_cycles(4, 5).is_err());
        assert!(enumerate_cycles(4, 1).is_err());
    }

    #[test]
    fn k4_hamiltonian_cycles() {
        let cycles: Vec<Vec<usize>> = enumerate_cycles(4, 4)
            .unwrap()
            .into_iter()
            .map(|c| c.vertices().to_vec())
            .collect();
        assert_eq!(
            cycles,
            vec![vec![0, 1, 2, 3], vec![0, 1, 3, 2], vec![0, 2, 1, 3]]
        );
    }

    #[test]
    fn cycle_canonical_form() {
        assert!(Cycle::new(vec![0, 1, 2]).is_ok());
        assert!(Cycle::new(vec![0, 2, 1]).is_err());
        assert!(Cycle::new(vec![1, 0, 2]).is_err());
        assert!(Cycle::new(vec![0, 0, 2]).is_err());
        assert!(Cycle::new(vec![1, 0]).is_err());
    }

    #[test]
    fn gains() {
        let g = WeightedCompleteGraph::uniform(5, 1.0).unwrap();
        for c in enumerate_cycles(5, 4).unwrap() {
            assert_eq!(cycle_gain(&g, &c).unwrap(), 1.0);
        }
        let g = WeightedCompleteGraph::new(3, vec![0.5, 2.0, 3.0]).unwrap();
        let pair = Cycle::new(vec![0, 2]).unwrap();
        assert_eq!(cycle_gain(&g, &pair).unwrap(), 4.0);

        // K_4 with a_1..a_6 on edges (01,02,03,12,13,23); the path
        // 0-1-2-3-0 uses edges 01, 12, 23, 03.
        let weights = vec![2.0, 3.0, 5.0, 7.0, 11.0, 13.0];
        let g = WeightedCompleteGraph::new(4, weights).unwrap();
        let c = Cycle::new(vec![0, 1, 2, 3]).unwrap();
        assert_eq!(cycle_gain(&g, &c).unwrap(), 2.0 * 7.0 * 13.0 * 5.0);
        assert!(cycle_gain(&WeightedCompleteGraph::uniform(3, 1.0).unwrap(), &c).is_err());
    }

    #[test]
    fn lemma_with_a_single_heavy_cycle() {
        // 0-1-2-3-0 uses edges 01 (0), 12 (3), 23 (5), 03 (2)
        let mut weights = vec![0.0; 6];
        for e in [0, 3, 5, 2] {
            weights[e] = 1.0;
        }
        let g = WeightedCompleteGraph::new(4, weights).unwrap();
        let check = verify_lemma(&g, 4).unwrap();
        assert!((check.lhs - 1.0 / 3.0).abs() < 1e-15);
        assert!((check.rhs - 4.0 / 9.0).abs() < 1e-15);
        assert!(check.holds);
    }

    #[test]
    fn lemma_equality_at_uniform_weights() {
        for k in 2..=6 {
            for r in 2..=k {
                let check =
                    verify_lemma(&WeightedCompleteGraph::uniform(k, 0.7).unwrap(), r).unwrap();
                let expected = 0.7f64.powi(r as i32);
                assert!((check.lhs - expected).abs() <= 1e-12 * expected);
                assert!((check.rhs - expected).abs() <= 1e-12 * expected);
                assert!(check.holds);
            }
        }
    }

    #[test]
    fn facts_k4() {
        let f = verify_facts(4, 4, Seed(1)).unwrap();
        assert_eq!(f.cycles, 3);
        assert_eq!(f.group_size, 24);
        assert_eq!(f.monomials_enumerated, 72);
        assert_eq!(f.degree_expected, 48);
        assert!(f.all_hold(), "{f:?}");

        let f = verify_facts(4, 2, Seed(1)).unwrap();
        assert_eq!(f.cycles, 6);
        assert_eq!(f.monomials_enumerated, 12);
        assert_eq!(f.group_size, 2);
        assert!(f.all_hold());

        assert!(verify_facts(4, 3, Seed(1)).is_err());
        assert!(verify_facts(7, 4, Seed(1)).is_err());
    }

    #[test]
    fn compositions_enumerate_all() {
        let c = compositions(2, 3);
        assert_eq!(c.len(), 6);
        assert!(c.iter().all(|v| v.iter().sum::<usize>() == 2));
        assert_eq!(multinomial(3, &[1, 1, 1]), 6);
    }
}
