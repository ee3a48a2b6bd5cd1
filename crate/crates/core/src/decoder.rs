//! Maximum-likelihood permutation decoding.
//!
//! The decoder maximizes `Σ_i L[i][σ_i]` over permutations `σ`, where
//! `L[i][j]` is the log-likelihood of sequence `i` under distribution `j`.
//! [`ml_decode`] solves this as a dense assignment problem in `O(A³)`;
//! [`exhaustive_decode`] enumerates `S_A` and serves as the oracle.
//!
//! Both share one tie rule: a permutation is optimal when its score is within
//! [`LogLikelihoodMatrix::tie_tolerance`] of the maximum, and the
//! lexicographically smallest optimal mapping is returned.

use serde::{Deserialize, Serialize};

use crate::dist::{DistributionFamily, ObservationBatch};
use crate::error::{Error, Result};

/// Largest `A` accepted by [`exhaustive_decode`].
pub const EXHAUSTIVE_MAX: usize = 10;

/// Square matrix of log-likelihoods; `-inf` marks impossible assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLikelihoodMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl LogLikelihoodMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if size < 2 {
            return Err(Error::InvalidMatrix(format!("need A >= 2, got {size}")));
        }
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::InvalidMatrix("matrix is not square".into()));
        }
        let entries: Vec<f64> = rows.into_iter().flatten().collect();
        if entries.iter().any(|e| e.is_nan() || *e == f64::INFINITY) {
            return Err(Error::InvalidMatrix(
                "entries must be finite or -inf".into(),
            ));
        }
        Ok(Self { size, entries })
    }

    /// Entries from per-row symbol counts:
    /// `L[i][j] = Σ_x counts[i][x] · ln P_j(x)`, skipping zero counts.
    ///
    /// Summing over the empirical type rather than over time makes rows with
    /// equal types produce bit-identical entries, so exact score ties stay
    /// exact.
    pub fn from_counts(counts: &[Vec<u32>], family: &DistributionFamily) -> Result<Self> {
        let size = family.len();
        if counts.len() != size {
            return Err(Error::DimensionMismatch(format!(
                "{} sequences for {} distributions",
                counts.len(),
                size
            )));
        }
        let m = family.alphabet_size();
        let log_probs: Vec<Vec<f64>> = family
            .members()
            .iter()
            .map(|p| p.probs().iter().map(|x| x.ln()).collect())
            .collect();
        let mut entries = Vec::with_capacity(size * size);
        for row in counts {
            if row.len() > m {
                return Err(Error::DimensionMismatch(format!(
                    "count vector of length {} for alphabet {m}",
                    row.len()
                )));
            }
            for log_p in &log_probs {
                let mut total = 0.0;
                for (x, &c) in row.iter().enumerate() {
                    if c > 0 {
                        total += f64::from(c) * log_p[x];
                    }
                }
                entries.push(total);
            }
        }
        Ok(Self { size, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.size + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.size)
    }

    fn max_finite_abs(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.is_finite())
            .fold(0.0, |acc, e| acc.max(e.abs()))
    }

    /// Score gap below which two permutations count as tied.
    pub fn tie_tolerance(&self) -> f64 {
        1e-9 * (1.0 + self.max_finite_abs())
    }
}

/// `entry[i][j] = Σ_t ln P_j(x_{i,t})`, evaluated through row counts.
pub fn log_likelihood_matrix(
    batch: &ObservationBatch,
    family: &DistributionFamily,
) -> Result<LogLikelihoodMatrix> {
    if batch.num_rows() != family.len() {
        return Err(Error::DimensionMismatch(format!(
            "batch has {} rows, family has {} members",
            batch.num_rows(),
            family.len()
        )));
    }
    if batch.alphabet_size() > family.alphabet_size() {
        return Err(Error::DimensionMismatch(format!(
            "batch alphabet {} exceeds family alphabet {}",
            batch.alphabet_size(),
            family.alphabet_size()
        )));
    }
    LogLikelihoodMatrix::from_counts(&batch.counts(), family)
}

/// `mapping[i]` is the distribution index assigned to sequence `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PermutationEstimate {
    mapping: Vec<usize>,
}

impl PermutationEstimate {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; mapping.len()];
        for &m in &mapping {
            if m >= mapping.len() || seen[m] {
                return Err(Error::InvalidArgument(format!(
                    "{mapping:?} is not a permutation"
                )));
            }
            seen[m] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(size: usize) -> Self {
        Self {
            mapping: (0..size).collect(),
        }
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &m)| i == m)
    }

    /// Number of indices with `σ_i != i`.
    pub fn misassigned(&self) -> usize {
        self.mapping
            .iter()
            .enumerate()
            .filter(|(i, m)| i != *m)
            .count()
    }

    /// Total score `Σ_i L[i][σ_i]`, summed in row order.
    pub fn score(&self, matrix: &LogLikelihoodMatrix) -> f64 {
        self.mapping
            .iter()
            .enumerate()
            .fold(0.0, |acc, (i, &j)| acc + matrix.get(i, j))
    }
}

impl TryFrom<Vec<usize>> for PermutationEstimate {
    type Error = Error;

    fn try_from(mapping: Vec<usize>) -> Result<Self> {
        Self::new(mapping)
    }
}

impl From<PermutationEstimate> for Vec<usize> {
    fn from(p: PermutationEstimate) -> Self {
        p.mapping
    }
}

/// ML permutation via a shortest-augmenting-path assignment solver on
/// negated scores, followed by the lexicographic tie-break.
pub fn ml_decode(matrix: &LogLikelihoodMatrix) -> Result<PermutationEstimate> {
    let size = matrix.size();
    let finite = || matrix.entries.iter().copied().filter(|e| e.is_finite());
    let top = finite().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(Error::Infeasible);
    }
    let bottom = finite().fold(f64::INFINITY, f64::min);
    let range = top - bottom;
    // Any assignment touching a forbidden edge costs more than every finite one.
    let forbidden = size as f64 * range + 2.0;
    let costs: Vec<f64> = matrix
        .entries
        .iter()
        .map(|&e| if e.is_finite() { top - e } else { forbidden })
        .collect();

    let solution = solve_assignment(size, &costs);
    let feasible = solution
        .assignment
        .iter()
        .enumerate()
        .all(|(i, &j)| matrix.get(i, j).is_finite());
    if !feasible {
        return Err(Error::Infeasible);
    }

    let edge_slack = matrix.tie_tolerance() / size as f64;
    let tight: Vec<Vec<usize>> = (0..size)
        .map(|i| {
            (0..size)
                .filter(|&j| {
                    matrix.get(i, j).is_finite()
                        && costs[i * size + j] - solution.row_dual[i] - solution.col_dual[j]
                            <= edge_slack
                })
                .collect()
        })
        .collect();

    match lexicographic_matching(&tight, solution.assignment.clone()) {
        Some(mapping) => PermutationEstimate::new(mapping),
        // The solver's own matching is always optimal; reaching this means
        // its duals were too inexact to certify the tight edges.
        None => PermutationEstimate::new(solution.assignment),
    }
}

struct AssignmentSolution {
    assignment: Vec<usize>,
    row_dual: Vec<f64>,
    col_dual: Vec<f64>,
}

// Dense Hungarian method (potentials + shortest augmenting paths). On exit
// `costs[i][j] - row_dual[i] - col_dual[j] >= 0` up to rounding, with
// equality on the returned assignment.
fn solve_assignment(size: usize, costs: &[f64]) -> AssignmentSolution {
    let cost = |i: usize, j: usize| costs[(i - 1) * size + (j - 1)];
    let mut u = vec![0.0; size + 1];
    let mut v = vec![0.0; size + 1];
    let mut owner = vec![0usize; size + 1];
    let mut way = vec![0usize; size + 1];

    for i in 1..=size {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; size + 1];
        let mut used = vec![false; size + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=size {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=size {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0; size];
    for j in 1..=size {
        assignment[owner[j] - 1] = j - 1;
    }
    AssignmentSolution {
        assignment,
        row_dual: u[1..].to_vec(),
        col_dual: v[1..].to_vec(),
    }
}

// Lexicographically smallest perfect matching of the bipartite graph
// `adjacency` (rows → sorted columns), starting from a known perfect matching.
// Row `i` takes the smallest column `j` for which an alternating path frees
// `matched[i]` among the unfixed rows.
fn lexicographic_matching(adjacency: &[Vec<usize>], mut matched: Vec<usize>) -> Option<Vec<usize>> {
    let size = matched.len();
    if matched
        .iter()
        .enumerate()
        .any(|(i, j)| !adjacency[i].contains(j))
    {
        return None;
    }
    let mut owner = vec![0; size];
    for (i, &j) in matched.iter().enumerate() {
        owner[j] = i;
    }
    let mut row_fixed = vec![false; size];
    let mut col_fixed = vec![false; size];

    for i in 0..size {
        row_fixed[i] = true;
        for &j in &adjacency[i] {
            if col_fixed[j] {
                continue;
            }
            if matched[i] == j {
                break;
            }
            let target = matched[i];
            let mut visited = vec![false; size];
            visited[j] = true;
            let mut path = Vec::new();
            if augment(
                adjacency,
                &owner,
                &row_fixed,
                &col_fixed,
                owner[j],
                target,
                &mut visited,
                &mut path,
            ) {
                for &(row, col) in &path {
                    matched[row] = col;
                    owner[col] = row;
                }
                matched[i] = j;
                owner[j] = i;
                break;
            }
        }
        col_fixed[matched[i]] = true;
    }
    Some(matched)
}

#[allow(clippy::too_many_arguments)]
fn augment(
    adjacency: &[Vec<usize>],
    owner: &[usize],
    row_fixed: &[bool],
    col_fixed: &[bool],
    row: usize,
    target: usize,
    visited: &mut [bool],
    path: &mut Vec<(usize, usize)>,
) -> bool {
    if row_fixed[row] {
        return false;
    }
    for &col in &adjacency[row] {
        if col_fixed[col] || visited[col] {
            continue;
        }
        visited[col] = true;
        path.push((row, col));
        if col == target
            || augment(
                adjacency, owner, row_fixed, col_fixed, owner[col], target, visited, path,
            )
        {
            return true;
        }
        path.pop();
    }
    false
}

/// Literal argmax over all `A!` permutations, with the same tie rule as
/// [`ml_decode`]. Limited to `A <= 10`.
pub fn exhaustive_decode(matrix: &LogLikelihoodMatrix) -> Result<PermutationEstimate> {
    let size = matrix.size();
    if size > EXHAUSTIVE_MAX {
        return Err(Error::TooLarge(format!(
            "exhaustive decoding supports A <= {EXHAUSTIVE_MAX}, got {size}"
        )));
    }

    let mut best = f64::NEG_INFINITY;
    for_each_permutation(size, matrix, &mut |_, score| {
        if score > best {
            best = score;
        }
        true
    });
    if best == f64::NEG_INFINITY {
        return Err(Error::Infeasible);
    }

    let threshold = best - matrix.tie_tolerance();
    let mut chosen = None;
    for_each_permutation(size, matrix, &mut |mapping, score| {
        if score >= threshold {
            chosen = Some(mapping.to_vec());
            false
        } else {
            true
        }
    });
    PermutationEstimate::new(chosen.expect("the maximizer passes its own threshold"))
}

// Visits permutations in lexicographic order with their row-order scores;
// the visitor returns `false` to stop.
fn for_each_permutation(
    size: usize,
    matrix: &LogLikelihoodMatrix,
    visit: &mut dyn FnMut(&[usize], f64) -> bool,
) {
    fn recurse(
        row: usize,
        acc: f64,
        mapping: &mut Vec<usize>,
        used: &mut [bool],
        matrix: &LogLikelihoodMatrix,
        visit: &mut dyn FnMut(&[usize], f64) -> bool,
    ) -> bool {
        let size = used.len();
        if row == size {
            return visit(mapping, acc);
        }
        for j in 0..size {
            if used[j] {
                continue;
            }
            used[j] = true;
            mapping.push(j);
            let keep_going = recurse(
                row + 1,
                acc + matrix.get(row, j),
                mapping,
                used,
                matrix,
                visit,
            );
            mapping.pop();
            used[j] = false;
            if !keep_going {
                return false;
            }
        }
        true
    }
    let mut mapping = Vec::with_capacity(size);
    let mut used = vec![false; size];
    recurse(0, 0.0, &mut mapping, &mut used, matrix, visit);
}
