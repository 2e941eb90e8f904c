//! Instance-optimal rules by column generation.
//!
//! Both rules keep a growing set 𝒱 of average voters drawn from ℱ. The master
//! problem only has to cover the voters in 𝒱; the separation oracle then looks
//! for a point of ℱ where the master's answer fails and adds it to 𝒱.

use super::oracle::{instance_distortion_candidate, instance_distortion_lottery, separation_cuts};
use super::region::{build_feasible_region, FeasibleRegion};
use super::{DistortionReport, MAX_ITERATIONS};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation, Sense};
use crate::model::{dot, CandidateSet, Lottery, Profile};

/// Candidates whose β differ by less than this are tied.
const TIE_TOL: f64 = 1e-9;

/// An average voter with every candidate's utility and the best of them.
struct Witness {
    point: Vec<f64>,
    utilities: Vec<f64>,
    best: f64,
}

struct WitnessSet {
    items: Vec<Witness>,
}

impl WitnessSet {
    fn new(region: &FeasibleRegion) -> Self {
        let mut s = Self { items: Vec::new() };
        s.insert(region.candidates(), region.feasible_point().to_vec());
        s
    }

    /// Adds `point` unless already present; reports whether it was new.
    fn insert(&mut self, candidates: &CandidateSet, point: Vec<f64>) -> bool {
        if self.items.iter().any(|w| w.point == point) {
            return false;
        }
        let utilities: Vec<f64> = candidates.vectors().iter().map(|c| dot(c, &point)).collect();
        let best = utilities.iter().copied().fold(0.0, f64::max);
        self.items.push(Witness { point, utilities, best });
        true
    }

    /// `min_{v̄ ∈ 𝒱} ⟨c_k, v̄⟩ / max_c ⟨c, v̄⟩`, capped at 1.
    fn candidate_beta(&self, k: usize) -> f64 {
        self.items
            .iter()
            .filter(|w| w.best > 0.0)
            .map(|w| w.utilities[k] / w.best)
            .fold(1.0, f64::min)
    }
}

pub fn optimal_deterministic(
    profile: &Profile,
    candidates: &CandidateSet,
    epsilon: f64,
) -> Result<(usize, DistortionReport)> {
    let region = build_feasible_region(profile, candidates, false)?;
    optimal_deterministic_in(&region, epsilon)
}

/// The candidate with the largest worst-case β, ties to the lowest index.
///
/// Candidates are scanned in index order against a shared witness set. The
/// master value is an upper bound on a candidate's true β, so a candidate is
/// dropped as soon as that bound can no longer beat the incumbent.
pub fn optimal_deterministic_in(region: &FeasibleRegion, epsilon: f64) -> Result<(usize, DistortionReport)> {
    let candidates = region.candidates();
    let mut witnesses = WitnessSet::new(region);
    let mut best: Option<(usize, f64)> = None;
    let mut iterations = 0;
    for k in 0..candidates.len() {
        let mut rounds = 0;
        let beta = loop {
            let beta = witnesses.candidate_beta(k);
            if best.is_some_and(|(_, b)| beta <= b + TIE_TOL) {
                break None;
            }
            if rounds == MAX_ITERATIONS {
                return Err(Error::NoConvergence {
                    iterations: rounds,
                    gap: f64::NAN,
                });
            }
            rounds += 1;
            let cuts = separation_cuts(candidates.vector(k), beta, region)?;
            let mut added = false;
            for cut in cuts {
                added |= witnesses.insert(candidates, cut);
            }
            if !added {
                break Some(beta);
            }
        };
        iterations += rounds;
        if let Some(beta) = beta {
            best = Some((k, beta));
        }
    }
    let (winner, _) = best.unwrap_or((0, 1.0));
    let mut report = instance_distortion_candidate(winner, region, epsilon)?;
    report.iterations = iterations;
    Ok((winner, report))
}

pub fn optimal_randomized(
    profile: &Profile,
    candidates: &CandidateSet,
    epsilon: f64,
) -> Result<(Lottery, DistortionReport)> {
    let region = build_feasible_region(profile, candidates, false)?;
    optimal_randomized_in(&region, epsilon)
}

/// The lottery maximizing the worst-case β over ℱ.
///
/// Master: `max β` over `(p, β)` with `Σ_i p_i ⟨c_i, v̄⟩ ≥ β max_c ⟨c, v̄⟩` for
/// every `v̄ ∈ 𝒱`. Each round adds the minimizers of `⟨ĉ − β c, v̄⟩` for every
/// challenger that goes negative.
pub fn optimal_randomized_in(region: &FeasibleRegion, epsilon: f64) -> Result<(Lottery, DistortionReport)> {
    let candidates = region.candidates();
    let m = candidates.len();
    let mut witnesses = WitnessSet::new(region);
    let mut iterations = 0;
    let probabilities = loop {
        if iterations == MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                iterations,
                gap: f64::NAN,
            });
        }
        iterations += 1;
        let (p, beta) = solve_master(&witnesses, m)?;
        let point = candidates.combine(&p);
        let mut added = false;
        for cut in separation_cuts(&point, beta, region)? {
            added |= witnesses.insert(candidates, cut);
        }
        if !added {
            break p;
        }
    };
    let lottery = Lottery::from_weights(probabilities.into_iter().map(|x| if x < 1e-12 { 0.0 } else { x }).collect())?;
    let mut report = instance_distortion_lottery(&lottery, region, epsilon)?;
    report.iterations = iterations;
    Ok((lottery, report))
}

fn solve_master(witnesses: &WitnessSet, m: usize) -> Result<(Vec<f64>, f64)> {
    let mut lp = LinearProgram::new(m + 1, Sense::Maximize);
    let mut objective = vec![0.0; m + 1];
    objective[m] = 1.0;
    lp.set_objective(objective);
    lp.set_bounds(m, 0.0, 1.0);
    for w in witnesses.items.iter().filter(|w| w.best > 0.0) {
        // Rows are scaled by the best utility so every coefficient is in [0, 1].
        let mut row: Vec<f64> = w.utilities.iter().map(|u| u / w.best).collect();
        row.push(-1.0);
        lp.add_constraint(row, Relation::Ge, 0.0);
    }
    let mut simplex_row = vec![1.0; m + 1];
    simplex_row[m] = 0.0;
    lp.add_constraint(simplex_row, Relation::Eq, 1.0);
    let sol = lp.solve();
    if !sol.is_optimal() {
        return Err(Error::Lp(sol.status));
    }
    let beta = sol.point[m];
    let mut p = sol.point;
    p.truncate(m);
    Ok((p, beta))
}
