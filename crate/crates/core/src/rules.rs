//! Ordinal voting rules: plurality, maximum coordinate plurality, and
//! randomized positional scoring rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CandidateSet, Lottery, Profile};

/// Positional scores `s¹ ≥ s² ≥ … ≥ sᵐ ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    scores: Vec<f64>,
    norm: f64,
}

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidArgument("scores must be finite and nonnegative".into()));
        }
        if scores.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("scores must be nonincreasing".into()));
        }
        let norm = scores.iter().sum();
        Ok(Self { scores, norm })
    }

    pub fn plurality(m: usize) -> Self {
        let mut scores = vec![0.0; m];
        scores[0] = 1.0;
        Self { scores, norm: 1.0 }
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            scores: vec![1.0; m],
            norm: m as f64,
        }
    }

    /// `s_i = 1/i + H_m/m`, whose ℓ¹ norm is exactly `2 H_m`.
    pub fn harmonic(m: usize) -> Self {
        let h = harmonic_number(m);
        let scores = (1..=m).map(|i| 1.0 / i as f64 + h / m as f64).collect();
        Self {
            scores,
            norm: 2.0 * h,
        }
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

pub fn harmonic_number(m: usize) -> f64 {
    (1..=m).map(|i| 1.0 / i as f64).sum()
}

/// Index of the largest count; ties go to the smallest index.
fn argmax_first(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &k) in counts.iter().enumerate() {
        if k > counts[best] {
            best = c;
        }
    }
    best
}

pub fn plurality(profile: &Profile) -> Result<usize> {
    if profile.num_voters() == 0 {
        return Err(Error::InvalidArgument("plurality of an empty profile".into()));
    }
    let mut counts = vec![0usize; profile.num_candidates()];
    for v in 0..profile.num_voters() {
        counts[profile.top_choice(v)?] += 1;
    }
    Ok(argmax_first(&counts))
}

/// Ĉ: for each coordinate, the first candidate attaining the maximum there.
/// Returned sorted and deduplicated, so `|Ĉ| ≤ d`.
pub fn coordinate_maximizers(candidates: &CandidateSet) -> Vec<usize> {
    let mut chosen: Vec<usize> = (0..candidates.dim())
        .map(|i| {
            let mut best = 0;
            for (c, v) in candidates.vectors().iter().enumerate() {
                if v[i] > candidates.vector(best)[i] {
                    best = c;
                }
            }
            best
        })
        .collect();
    chosen.sort_unstable();
    chosen.dedup();
    chosen
}

/// Plurality over the per-coordinate maximal candidates, each ranking
/// restricted to them.
pub fn max_coordinate_plurality(profile: &Profile, candidates: &CandidateSet) -> Result<usize> {
    if candidates.len() != profile.num_candidates() {
        return Err(Error::DimensionMismatch {
            expected: profile.num_candidates(),
            got: candidates.len(),
        });
    }
    if profile.num_voters() == 0 {
        return Err(Error::InvalidArgument("plurality of an empty profile".into()));
    }
    let hat = coordinate_maximizers(candidates);
    let restricted = profile.restricted_rankings(&hat)?;
    let mut counts = vec![0usize; profile.num_candidates()];
    for r in &restricted {
        counts[r[0]] += 1;
    }
    // Candidates outside Ĉ have zero votes, so the argmax already lies in Ĉ.
    Ok(argmax_first(&counts))
}

/// `Pr[c] = score_V(c) / (n ‖s‖₁)`.
pub fn rsr_lottery(profile: &Profile, scores: &ScoreVector) -> Result<Lottery> {
    let m = profile.num_candidates();
    if scores.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: scores.len(),
        });
    }
    if !(scores.norm() > 0.0) {
        return Err(Error::InvalidArgument("all-zero score vector".into()));
    }
    let n = profile.num_voters();
    if n == 0 {
        return Err(Error::InvalidArgument("lottery of an empty profile".into()));
    }
    let mut total = vec![0.0; m];
    for r in profile.rankings()? {
        for (pos, &c) in r.iter().enumerate() {
            total[c] += scores.scores()[pos];
        }
    }
    let denom = n as f64 * scores.norm();
    Lottery::from_weights(total.into_iter().map(|t| t / denom).collect())
}

/// Each voter's top choice with probability 1/n. Accepts pair lists with a
/// unique maximal element.
pub fn random_dictatorship(profile: &Profile) -> Result<Lottery> {
    let n = profile.num_voters();
    if n == 0 {
        return Err(Error::InvalidArgument("lottery of an empty profile".into()));
    }
    let mut p = vec![0.0; profile.num_candidates()];
    for v in 0..n {
        p[profile.top_choice(v)?] += 1.0;
    }
    Lottery::from_weights(p)
}

pub fn harmonic_lottery(profile: &Profile) -> Result<Lottery> {
    rsr_lottery(profile, &ScoreVector::harmonic(profile.num_candidates()))
}

pub fn uniform_lottery(m: usize) -> Lottery {
    Lottery::uniform(m)
}
