use serde::{Deserialize, Serialize};

use super::region::FeasibleRegion;
use super::{value_from_beta, DistortionReport, VIOLATION_TOL};
use crate::error::{Error, Result};
use crate::model::{dot, Lottery};

/// How the largest feasible β is located.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaSearch {
    /// Dinkelbach iteration: each step jumps to the ratio at the current
    /// minimizer. Exact up to LP precision, usually in two or three solves.
    #[default]
    Newton,
    /// Bisection on `[0, 1]` down to the requested precision.
    Bisection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairBeta {
    pub beta: f64,
    pub witness: Vec<f64>,
    pub solves: usize,
}

/// `g(β) = min_{v̄ ∈ ℱ} ⟨ĉ − β c′, v̄⟩`
fn gap(region: &FeasibleRegion, chosen: &[f64], challenger: &[f64], beta: f64) -> Result<(f64, Vec<f64>)> {
    let w: Vec<f64> = chosen.iter().zip(challenger).map(|(a, b)| a - beta * b).collect();
    let min = region.minimize(&w)?;
    Ok((min.value, min.point))
}

/// Largest `β ∈ [0, 1]` with `⟨ĉ, v̄⟩ ≥ β ⟨c′, v̄⟩` on all of ℱ, for arbitrary
/// points `ĉ` (chosen) and `c′` (challenger).
pub fn pair_beta_point(
    chosen: &[f64],
    challenger: &[f64],
    region: &FeasibleRegion,
    epsilon: f64,
    search: BetaSearch,
) -> Result<PairBeta> {
    let d = region.dim();
    for v in [chosen, challenger] {
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if chosen == challenger {
        return Ok(PairBeta {
            beta: 1.0,
            witness: region.feasible_point().to_vec(),
            solves: 0,
        });
    }
    let (g, point) = gap(region, chosen, challenger, 1.0)?;
    if g >= -VIOLATION_TOL {
        return Ok(PairBeta {
            beta: 1.0,
            witness: point,
            solves: 1,
        });
    }
    match search {
        BetaSearch::Newton => newton(chosen, challenger, region, epsilon, point),
        BetaSearch::Bisection => bisection(chosen, challenger, region, epsilon, point),
    }
}

fn newton(
    chosen: &[f64],
    challenger: &[f64],
    region: &FeasibleRegion,
    epsilon: f64,
    mut witness: Vec<f64>,
) -> Result<PairBeta> {
    let mut beta = 1.0;
    let mut solves = 1;
    let mut point = witness.clone();
    for _ in 0..100 {
        // g(β) < 0 here, so ⟨c′, v̄⟩ > ⟨ĉ, v̄⟩/β ≥ 0.
        let ratio = dot(chosen, &point) / dot(challenger, &point);
        if !(ratio < beta) {
            break;
        }
        beta = ratio.max(0.0);
        witness = point;
        if beta < epsilon {
            return Ok(PairBeta { beta: 0.0, witness, solves });
        }
        let (g, next) = gap(region, chosen, challenger, beta)?;
        solves += 1;
        if g >= -VIOLATION_TOL {
            break;
        }
        point = next;
    }
    Ok(PairBeta { beta, witness, solves })
}

fn bisection(
    chosen: &[f64],
    challenger: &[f64],
    region: &FeasibleRegion,
    epsilon: f64,
    mut witness: Vec<f64>,
) -> Result<PairBeta> {
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut solves = 1;
    while hi - lo > epsilon {
        let mid = 0.5 * (lo + hi);
        let (g, point) = gap(region, chosen, challenger, mid)?;
        solves += 1;
        if g >= -VIOLATION_TOL {
            lo = mid;
        } else {
            hi = mid;
            witness = point;
        }
    }
    Ok(PairBeta { beta: lo, witness, solves })
}

/// β of candidate `chosen` against candidate `challenger`.
pub fn pair_beta(chosen: usize, challenger: usize, region: &FeasibleRegion, epsilon: f64) -> Result<f64> {
    let c = region.candidates();
    for idx in [chosen, challenger] {
        if idx >= c.len() {
            return Err(Error::IndexOutOfRange { index: idx, len: c.len() });
        }
    }
    Ok(pair_beta_point(c.vector(chosen), c.vector(challenger), region, epsilon, BetaSearch::Newton)?.beta)
}

/// Instance distortion of an arbitrary point `ĉ` against every candidate.
pub fn instance_distortion_point(
    point: &[f64],
    region: &FeasibleRegion,
    epsilon: f64,
    search: BetaSearch,
) -> Result<DistortionReport> {
    let candidates = region.candidates();
    let mut betas = Vec::with_capacity(candidates.len());
    let mut worst: Option<(f64, Vec<f64>)> = None;
    let mut iterations = 0;
    for c in candidates.vectors() {
        let pb = pair_beta_point(point, c, region, epsilon, search)?;
        iterations += pb.solves;
        if worst.as_ref().is_none_or(|(b, _)| pb.beta < *b) {
            worst = Some((pb.beta, pb.witness));
        }
        betas.push(pb.beta);
    }
    let (beta, witness) = worst.unwrap_or_else(|| (1.0, region.feasible_point().to_vec()));
    Ok(DistortionReport {
        value: value_from_beta(beta),
        beta,
        witness,
        per_challenger_betas: betas,
        iterations,
        epsilon,
    })
}

pub fn instance_distortion_candidate(c: usize, region: &FeasibleRegion, epsilon: f64) -> Result<DistortionReport> {
    let m = region.num_candidates();
    if c >= m {
        return Err(Error::IndexOutOfRange { index: c, len: m });
    }
    instance_distortion_point(region.candidates().vector(c), region, epsilon, BetaSearch::Newton)
}

pub fn instance_distortion_lottery(
    lottery: &Lottery,
    region: &FeasibleRegion,
    epsilon: f64,
) -> Result<DistortionReport> {
    let m = region.num_candidates();
    if lottery.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: lottery.len() });
    }
    let point = region.candidates().combine(lottery.probabilities());
    instance_distortion_point(&point, region, epsilon, BetaSearch::Newton)
}

/// Every challenger's minimizer of `⟨ĉ − β c, v̄⟩` that goes below zero,
/// in candidate order with repeats removed.
pub fn separation_cuts(point: &[f64], beta: f64, region: &FeasibleRegion) -> Result<Vec<Vec<f64>>> {
    let mut cuts: Vec<Vec<f64>> = Vec::new();
    for c in region.candidates().vectors() {
        let (g, v) = gap(region, point, c, beta)?;
        if g < -VIOLATION_TOL && !cuts.contains(&v) {
            cuts.push(v);
        }
    }
    Ok(cuts)
}

/// The first average voter, by challenger index, at which `ĉ` fails to
/// β-cover some candidate.
pub fn separation_oracle(point: &[f64], beta: f64, region: &FeasibleRegion) -> Result<Option<Vec<f64>>> {
    for c in region.candidates().vectors() {
        let (g, v) = gap(region, point, c, beta)?;
        if g < -VIOLATION_TOL {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::super::build_feasible_region;
    use super::*;
    use crate::model::{CandidateSet, Profile};
    use approx::assert_abs_diff_eq;

    const EPS: f64 = 1e-6;

    fn region(m: usize, rankings: Vec<Vec<usize>>) -> FeasibleRegion {
        let p = Profile::from_rankings(m, rankings).unwrap();
        build_feasible_region(&p, &CandidateSet::basis(m), false).unwrap()
    }

    fn symmetric() -> FeasibleRegion {
        region(2, vec![vec![0, 1], vec![1, 0]])
    }

    #[test]
    fn pair_beta_examples() {
        let r = region(2, vec![vec![0, 1]]);
        assert_eq!(pair_beta(0, 0, &r, EPS).unwrap(), 1.0);
        assert_eq!(pair_beta(0, 1, &r, EPS).unwrap(), 1.0);
        assert_eq!(pair_beta(1, 0, &r, EPS).unwrap(), 0.0);
        assert!(pair_beta(0, 2, &r, EPS).is_err());
    }

    #[test]
    fn candidate_examples() {
        let r = region(2, vec![vec![0, 1]]);
        let good = instance_distortion_candidate(0, &r, EPS).unwrap();
        assert_eq!(good.value, 1.0);
        let bad = instance_distortion_candidate(1, &r, EPS).unwrap();
        assert!(bad.is_unbounded());
        assert_eq!(bad.per_challenger_betas, vec![0.0, 1.0]);

        let single = region(1, vec![vec![0], vec![0]]);
        assert_eq!(instance_distortion_candidate(0, &single, EPS).unwrap().value, 1.0);
    }

    #[test]
    fn symmetric_candidate_is_three() {
        let r = symmetric();
        for c in 0..2 {
            let rep = instance_distortion_candidate(c, &r, EPS).unwrap();
            assert_abs_diff_eq!(rep.value, 3.0, epsilon = 1e-9);
            assert_abs_diff_eq!(rep.witness[1 - c], 0.75, epsilon = 1e-9);
            assert!(r.residual(&rep.witness).unwrap() < 1e-6);
        }
    }

    #[test]
    fn symmetric_uniform_lottery_is_one_and_a_half() {
        let r = symmetric();
        let rep = instance_distortion_lottery(&Lottery::uniform(2), &r, EPS).unwrap();
        assert_abs_diff_eq!(rep.value, 1.5, epsilon = 1e-9);
    }

    #[test]
    fn point_mass_matches_candidate() {
        let r = region(3, vec![vec![0, 1, 2], vec![2, 0, 1], vec![1, 0, 2]]);
        for c in 0..3 {
            let a = instance_distortion_candidate(c, &r, EPS).unwrap();
            let b = instance_distortion_lottery(&Lottery::point_mass(3, c), &r, EPS).unwrap();
            assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn unanimous_uniform_lottery_is_d() {
        for d in 2..6 {
            let r = region(d, vec![(0..d).collect(); 3]);
            let rep = instance_distortion_lottery(&Lottery::uniform(d), &r, EPS).unwrap();
            assert_abs_diff_eq!(rep.value, d as f64, epsilon = 1e-9);
            assert_abs_diff_eq!(rep.witness[0], 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn newton_and_bisection_agree() {
        let c = CandidateSet::new(vec![
            vec![0.5, 0.3, 0.2],
            vec![0.1, 0.6, 0.3],
            vec![0.2, 0.2, 0.6],
            vec![0.4, 0.4, 0.2],
        ])
        .unwrap();
        let p = Profile::from_rankings(4, vec![vec![0, 3, 1, 2], vec![2, 1, 3, 0], vec![1, 3, 2, 0]]).unwrap();
        let r = build_feasible_region(&p, &c, false).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let n = pair_beta_point(c.vector(a), c.vector(b), &r, EPS, BetaSearch::Newton).unwrap();
                let s = pair_beta_point(c.vector(a), c.vector(b), &r, EPS, BetaSearch::Bisection).unwrap();
                assert!((n.beta - s.beta).abs() <= 2.0 * EPS, "{a} vs {b}: {} {}", n.beta, s.beta);
                // Bisection only ever reports certified values.
                assert!(s.beta <= n.beta + 1e-9);
            }
        }
    }

    #[test]
    fn separation_examples() {
        let r = symmetric();
        let mu = [0.5, 0.5];
        assert_eq!(separation_oracle(&mu, 0.0, &r).unwrap(), None);
        let cut = separation_oracle(&mu, 0.9, &r).unwrap().unwrap();
        assert_abs_diff_eq!(cut[0].max(cut[1]), 0.75, epsilon = 1e-9);
        assert_eq!(separation_cuts(&mu, 0.9, &r).unwrap().len(), 2);
        assert!(separation_cuts(&mu, 2.0 / 3.0, &r).unwrap().is_empty());

        let one = region(1, vec![vec![0]]);
        assert_eq!(separation_oracle(&[1.0], 1.0, &one).unwrap(), None);
    }
}
