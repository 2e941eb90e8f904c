//! Candidates, voters, preference profiles and the welfare arithmetic shared by
//! every rule.
//!
//! Voters and candidates are nonnegative vectors normalized to unit ℓ¹ norm,
//! i.e. points of the probability simplex Δ_d. A voter's utility for a
//! candidate is their inner product.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpStatus, Relation, Sense};

/// Allowed deviation of a row sum from 1 on input.
pub const NORMALIZATION_TOL: f64 = 1e-6;
/// Allowed deviation of a lottery's total mass from 1.
pub const LOTTERY_TOL: f64 = 1e-9;
/// Residual below which a point counts as inside the candidate convex hull.
pub const HULL_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Empty,
    RaggedRow { row: usize, len: usize, expected: usize },
    NegativeEntry { row: usize, col: usize, value: f64 },
    NonFinite { row: usize, col: usize },
    RowSum { row: usize, sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "no rows or zero-length rows"),
            Violation::RaggedRow { row, len, expected } => {
                write!(f, "row {row} has {len} entries, expected {expected}")
            }
            Violation::NegativeEntry { row, col, value } => {
                write!(f, "negative entry {value} at ({row}, {col})")
            }
            Violation::NonFinite { row, col } => write!(f, "non-finite entry at ({row}, {col})"),
            Violation::RowSum { row, sum } => write!(f, "row {row} sums to {sum}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            let msgs: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
            Err(Error::Validation(msgs.join("; ")))
        }
    }
}

/// Checks that `rows` form a nonempty rectangular matrix of nonnegative
/// entries whose rows each sum to 1 within [`NORMALIZATION_TOL`].
pub fn validate_rows(rows: &[Vec<f64>]) -> ValidationReport {
    let mut violations = Vec::new();
    let width = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || width == 0 {
        violations.push(Violation::Empty);
        return ValidationReport { violations };
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            violations.push(Violation::RaggedRow {
                row: i,
                len: row.len(),
                expected: width,
            });
            continue;
        }
        for (j, &x) in row.iter().enumerate() {
            if !x.is_finite() {
                violations.push(Violation::NonFinite { row: i, col: j });
            } else if x < 0.0 {
                violations.push(Violation::NegativeEntry {
                    row: i,
                    col: j,
                    value: x,
                });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            violations.push(Violation::RowSum { row: i, sum });
        }
    }
    ValidationReport { violations }
}

/// Same checks as [`validate_rows`]; named for the candidate matrix.
pub fn validate_candidates(rows: &[Vec<f64>]) -> ValidationReport {
    validate_rows(rows)
}

/// Rescales each row to unit sum. Fails on negative, non-finite or all-zero rows.
pub fn renormalize_rows(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::Validation(format!(
                    "row {i} has negative or non-finite entries"
                )));
            }
            let s: f64 = row.iter().sum();
            if s <= 0.0 {
                return Err(Error::Validation(format!("row {i} is all zeros")));
            }
            Ok(row.iter().map(|x| x / s).collect())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    vectors: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl CandidateSet {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        validate_rows(&vectors).into_result()?;
        Ok(Self {
            vectors,
            labels: None,
        })
    }

    /// Rescales rows to the simplex instead of rejecting inexact input.
    pub fn renormalized(vectors: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(renormalize_rows(&vectors)?)
    }

    /// Standard basis e_1..e_d, the unit-sum special case.
    pub fn basis(d: usize) -> Self {
        let vectors = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e
            })
            .collect();
        Self {
            vectors,
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn vector(&self, c: usize) -> &[f64] {
        &self.vectors[c]
    }

    pub fn label(&self, c: usize) -> Option<&str> {
        self.labels.as_ref().map(|l| l[c].as_str())
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// `Σ_c weights[c] · c`.
    pub fn combine(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (w, c) in weights.iter().zip(&self.vectors) {
            if *w != 0.0 {
                for (o, x) in out.iter_mut().zip(c) {
                    *o += w * x;
                }
            }
        }
        out
    }

    pub(crate) fn push(&mut self, vector: Vec<f64>, label: Option<String>) {
        if let Some(labels) = &mut self.labels {
            labels.push(label.unwrap_or_else(|| format!("c{}", labels.len())));
        }
        self.vectors.push(vector);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoterSet {
    vectors: Vec<Vec<f64>>,
    /// Row v is a point of Δ_m with `Σ_c w[v][c] c = v`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<Vec<f64>>>,
}

impl VoterSet {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        validate_rows(&vectors).into_result()?;
        Ok(Self {
            vectors,
            weights: None,
        })
    }

    /// Voters given by convex-combination weights over `candidates`; the voter
    /// vectors are computed from the weights, which are kept as witnesses.
    pub fn from_weights(weights: Vec<Vec<f64>>, candidates: &CandidateSet) -> Result<Self> {
        for (v, w) in weights.iter().enumerate() {
            if w.len() != candidates.len() {
                return Err(Error::DimensionMismatch {
                    expected: candidates.len(),
                    got: w.len(),
                });
            }
            let s: f64 = w.iter().sum();
            if w.iter().any(|x| *x < 0.0) || (s - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::Validation(format!(
                    "weights of voter {v} are not in the simplex"
                )));
            }
        }
        let vectors = weights.iter().map(|w| candidates.combine(w)).collect();
        let mut set = Self::new(vectors)?;
        set.weights = Some(weights);
        Ok(set)
    }

    /// Attaches expressiveness witnesses, checking that each reproduces its voter.
    pub fn with_weights(mut self, weights: Vec<Vec<f64>>, candidates: &CandidateSet) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: weights.len(),
            });
        }
        let witnessed = Self::from_weights(weights, candidates)?;
        for (v, (a, b)) in self.vectors.iter().zip(&witnessed.vectors).enumerate() {
            let err = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            if err > NORMALIZATION_TOL {
                return Err(Error::Validation(format!(
                    "weights of voter {v} do not reproduce its vector (error {err:e})"
                )));
            }
        }
        self.weights = witnessed.weights;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn vector(&self, v: usize) -> &[f64] {
        &self.vectors[v]
    }

    pub fn weights(&self) -> Option<&[Vec<f64>]> {
        self.weights.as_deref()
    }
}

/// One voter's ordinal report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    /// Total order, most preferred first.
    Ranking(Vec<usize>),
    /// `(a, b)` means a ≻ b.
    Pairs(Vec<(usize, usize)>),
}

impl Preference {
    pub fn as_ranking(&self) -> Option<&[usize]> {
        match self {
            Preference::Ranking(r) => Some(r),
            Preference::Pairs(_) => None,
        }
    }

    /// Pairs whose transitive closure is the reported order: adjacent pairs of
    /// a ranking, or the listed pairs.
    pub fn implied_pairs(&self) -> Vec<(usize, usize)> {
        match self {
            Preference::Ranking(r) => r.windows(2).map(|w| (w[0], w[1])).collect(),
            Preference::Pairs(p) => p.clone(),
        }
    }

    /// Most preferred candidate: the first ranked one, or the unique candidate
    /// out of `m` that no listed pair places below another.
    pub fn top(&self, m: usize) -> Option<usize> {
        match self {
            Preference::Ranking(r) => r.first().copied(),
            Preference::Pairs(p) => {
                let mut dominated = vec![false; m];
                for &(_, b) in p {
                    dominated[b] = true;
                }
                let mut maximal = (0..m).filter(|&c| !dominated[c]);
                match (maximal.next(), maximal.next()) {
                    (Some(c), None) => Some(c),
                    _ => None,
                }
            }
        }
    }

    fn check(&self, m: usize) -> std::result::Result<(), String> {
        match self {
            Preference::Ranking(r) => {
                if r.len() != m {
                    return Err(format!("ranking has {} entries, expected {m}", r.len()));
                }
                let mut seen = vec![false; m];
                for &c in r {
                    if c >= m || seen[c] {
                        return Err(format!("ranking is not a permutation of 0..{m}"));
                    }
                    seen[c] = true;
                }
                Ok(())
            }
            Preference::Pairs(p) => {
                for &(a, b) in p {
                    if a >= m || b >= m {
                        return Err(format!("pair ({a}, {b}) out of range"));
                    }
                    if a == b {
                        return Err(format!("self-comparison ({a}, {a})"));
                    }
                }
                if has_cycle(m, p) {
                    return Err("pair list contains a directed cycle".to_string());
                }
                Ok(())
            }
        }
    }
}

/// Kahn's algorithm on the "a beats b" graph.
pub(crate) fn has_cycle(m: usize, pairs: &[(usize, usize)]) -> bool {
    let mut indeg = vec![0usize; m];
    let mut adj = vec![Vec::new(); m];
    for &(a, b) in pairs {
        if a < m && b < m {
            adj[a].push(b);
            indeg[b] += 1;
        }
    }
    let mut stack: Vec<usize> = (0..m).filter(|&c| indeg[c] == 0).collect();
    let mut visited = 0;
    while let Some(c) = stack.pop() {
        visited += 1;
        for &b in &adj[c] {
            indeg[b] -= 1;
            if indeg[b] == 0 {
                stack.push(b);
            }
        }
    }
    visited < m
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    num_candidates: usize,
    voters: Vec<Preference>,
}

impl Profile {
    pub fn new(num_candidates: usize, voters: Vec<Preference>) -> Result<Self> {
        if num_candidates == 0 {
            return Err(Error::Validation("profile over zero candidates".into()));
        }
        for (v, p) in voters.iter().enumerate() {
            p.check(num_candidates)
                .map_err(|e| Error::Validation(format!("voter {v}: {e}")))?;
        }
        Ok(Self {
            num_candidates,
            voters,
        })
    }

    pub fn from_rankings(num_candidates: usize, rankings: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(
            num_candidates,
            rankings.into_iter().map(Preference::Ranking).collect(),
        )
    }

    pub fn num_voters(&self) -> usize {
        self.voters.len()
    }

    pub fn num_candidates(&self) -> usize {
        self.num_candidates
    }

    pub fn voters(&self) -> &[Preference] {
        &self.voters
    }

    /// All voters as total orders, or an error naming the first voter that
    /// only reported pairs.
    pub fn rankings(&self) -> Result<Vec<&[usize]>> {
        self.voters
            .iter()
            .enumerate()
            .map(|(v, p)| {
                p.as_ranking().ok_or_else(|| {
                    Error::InvalidArgument(format!("voter {v} did not report a total order"))
                })
            })
            .collect()
    }

    pub fn top_choice(&self, voter: usize) -> Result<usize> {
        self.voters[voter]
            .top(self.num_candidates)
            .ok_or(Error::NoTopChoice { voter })
    }

    /// Each ranking restricted to `subset`, relative order preserved.
    pub fn restricted_rankings(&self, subset: &[usize]) -> Result<Vec<Vec<usize>>> {
        let mut keep = vec![false; self.num_candidates];
        for &c in subset {
            keep[c] = true;
        }
        Ok(self
            .rankings()?
            .into_iter()
            .map(|r| r.iter().copied().filter(|&c| keep[c]).collect())
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilityProfile {
    rows: Vec<Vec<f64>>,
}

impl UtilityProfile {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        for (v, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: row.len(),
                });
            }
            if row.iter().any(|u| !u.is_finite() || *u < 0.0) {
                return Err(Error::Validation(format!(
                    "voter {v} has a negative or non-finite utility"
                )));
            }
        }
        Ok(Self { rows })
    }

    /// `u_v(c) = v · c` for every pair.
    pub fn from_embeddings(voters: &VoterSet, candidates: &CandidateSet) -> Result<Self> {
        if voters.dim() != candidates.dim() {
            return Err(Error::DimensionMismatch {
                expected: candidates.dim(),
                got: voters.dim(),
            });
        }
        let rows = voters
            .vectors()
            .iter()
            .map(|v| candidates.vectors().iter().map(|c| dot(v, c)).collect())
            .collect();
        Ok(Self { rows })
    }

    pub fn num_voters(&self) -> usize {
        self.rows.len()
    }

    pub fn num_candidates(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Per-candidate welfare, i.e. column sums.
    pub fn welfares(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.num_candidates()];
        for row in &self.rows {
            for (acc, u) in w.iter_mut().zip(row) {
                *acc += u;
            }
        }
        w
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Lottery {
    probabilities: Vec<f64>,
}

impl Lottery {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::Validation("empty lottery".into()));
        }
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Validation(
                "lottery has a negative or non-finite probability".into(),
            ));
        }
        let s: f64 = probabilities.iter().sum();
        if (s - 1.0).abs() > LOTTERY_TOL {
            return Err(Error::Validation(format!("lottery sums to {s}")));
        }
        Ok(Self { probabilities })
    }

    /// Normalizes nonnegative weights into a lottery.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let s: f64 = weights.iter().sum();
        if !(s > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::Validation(
                "weights must be nonnegative with positive sum".into(),
            ));
        }
        Self::new(weights.into_iter().map(|w| w / s).collect())
    }

    pub fn point_mass(m: usize, c: usize) -> Self {
        let mut probabilities = vec![0.0; m];
        probabilities[c] = 1.0;
        Self { probabilities }
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            probabilities: vec![1.0 / m as f64; m],
        }
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn get(&self, c: usize) -> f64 {
        self.probabilities[c]
    }

    /// Same lottery over `extra` additional candidates that get probability 0.
    pub fn extended(&self, extra: usize) -> Self {
        let mut probabilities = self.probabilities.clone();
        probabilities.extend(std::iter::repeat_n(0.0, extra));
        Self { probabilities }
    }
}

/// One experimental unit: a profile plus whatever ground truth generated it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub candidates: CandidateSet,
    pub voters: Option<VoterSet>,
    pub profile: Profile,
    pub utilities: Option<UtilityProfile>,
    pub seed: Option<u64>,
}

impl Instance {
    /// Checks the cross-field invariants: sizes agree, stored utilities match
    /// the embeddings, and every ranking is consistent with its voter's utilities.
    pub fn check_consistency(&self) -> Result<()> {
        let m = self.candidates.len();
        if self.profile.num_candidates() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: self.profile.num_candidates(),
            });
        }
        if let Some(voters) = &self.voters {
            if voters.len() != self.profile.num_voters() {
                return Err(Error::DimensionMismatch {
                    expected: self.profile.num_voters(),
                    got: voters.len(),
                });
            }
            let derived = UtilityProfile::from_embeddings(voters, &self.candidates)?;
            if let Some(u) = &self.utilities {
                for (a, b) in u.rows().iter().zip(derived.rows()) {
                    if a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-9) {
                        return Err(Error::Validation(
                            "stored utilities disagree with embeddings".into(),
                        ));
                    }
                }
            }
        }
        if let Some(u) = self.utilities_or_derived().as_ref() {
            if u.num_voters() != self.profile.num_voters() || u.num_candidates() != m {
                return Err(Error::Validation("utility matrix has the wrong shape".into()));
            }
            for (v, (pref, row)) in self.profile.voters().iter().zip(u.rows()).enumerate() {
                for (a, b) in pref.implied_pairs() {
                    if row[a] < row[b] - 1e-9 {
                        return Err(Error::Validation(format!(
                            "voter {v} ranks {a} above {b} against their utilities"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn utilities_or_derived(&self) -> Option<UtilityProfile> {
        match (&self.utilities, &self.voters) {
            (Some(u), _) => Some(u.clone()),
            (None, Some(v)) => UtilityProfile::from_embeddings(v, &self.candidates).ok(),
            _ => None,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn utility(voter: &[f64], candidate: &[f64]) -> Result<f64> {
    if voter.len() != candidate.len() {
        return Err(Error::DimensionMismatch {
            expected: candidate.len(),
            got: voter.len(),
        });
    }
    if voter.iter().chain(candidate).any(|x| *x < 0.0) {
        return Err(Error::Validation("utility of a vector with negative entries".into()));
    }
    Ok(dot(voter, candidate))
}

pub fn welfare(utilities: &UtilityProfile, candidate: usize) -> Result<f64> {
    let m = utilities.num_candidates();
    if candidate >= m {
        return Err(Error::IndexOutOfRange {
            index: candidate,
            len: m,
        });
    }
    Ok(utilities.rows().iter().map(|r| r[candidate]).sum())
}

pub fn expected_welfare(utilities: &UtilityProfile, lottery: &Lottery) -> Result<f64> {
    let m = utilities.num_candidates();
    if lottery.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: lottery.len(),
        });
    }
    Ok(utilities
        .welfares()
        .iter()
        .zip(lottery.probabilities())
        .map(|(w, p)| w * p)
        .sum())
}

/// Sorts `0..row.len()` by utility, descending; equal utilities keep ascending
/// index order.
pub fn rank_by_utility(row: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    order
}

pub fn utilities_to_profile(utilities: &UtilityProfile) -> Profile {
    Profile {
        num_candidates: utilities.num_candidates(),
        voters: utilities
            .rows()
            .iter()
            .map(|r| Preference::Ranking(rank_by_utility(r)))
            .collect(),
    }
}

/// ℓ¹ distance from `point` to the convex hull of `candidates`, computed by LP.
pub fn hull_residual(point: &[f64], candidates: &CandidateSet) -> Result<f64> {
    let (m, d) = (candidates.len(), candidates.dim());
    if point.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: point.len(),
        });
    }
    // Variables: λ (m), r⁺ (d), r⁻ (d).
    let nv = m + 2 * d;
    let mut lp = LinearProgram::new(nv, Sense::Minimize);
    let mut obj = vec![0.0; nv];
    obj[m..].iter_mut().for_each(|x| *x = 1.0);
    lp.set_objective(obj);
    for i in 0..d {
        let mut row = vec![0.0; nv];
        for (c, cv) in candidates.vectors().iter().enumerate() {
            row[c] = cv[i];
        }
        row[m + i] = 1.0;
        row[m + d + i] = -1.0;
        lp.add_constraint(row, Relation::Eq, point[i]);
    }
    let mut simplex_row = vec![0.0; nv];
    simplex_row[..m].iter_mut().for_each(|x| *x = 1.0);
    lp.add_constraint(simplex_row, Relation::Eq, 1.0);
    let sol = lp.solve();
    match sol.status {
        LpStatus::Optimal => Ok(sol.value.max(0.0)),
        s => Err(Error::Lp(s)),
    }
}

pub fn in_convex_hull(point: &[f64], candidates: &CandidateSet) -> Result<bool> {
    Ok(hull_residual(point, candidates)? <= HULL_TOL)
}

/// `min_v max_c v·c`. Voters without a stored witness are checked for hull
/// membership by LP; a voter outside the hull is an error. For hull voters the
/// result is at least `1/d`.
pub fn min_favorite_utility(voters: &VoterSet, candidates: &CandidateSet) -> Result<f64> {
    if voters.dim() != candidates.dim() {
        return Err(Error::DimensionMismatch {
            expected: candidates.dim(),
            got: voters.dim(),
        });
    }
    if voters.weights().is_none() {
        for (i, v) in voters.vectors().iter().enumerate() {
            if !in_convex_hull(v, candidates)? {
                return Err(Error::Validation(format!(
                    "voter {i} lies outside the candidate convex hull"
                )));
            }
        }
    }
    Ok(voters
        .vectors()
        .iter()
        .map(|v| {
            candidates
                .vectors()
                .iter()
                .map(|c| dot(v, c))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::INFINITY, f64::min))
}
