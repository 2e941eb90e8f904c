//! The feasible region ℱ of average voters.
//!
//! ℱ_j is the set of voter vectors in Δ_d consistent with voter j's report and
//! ℱ = (1/n) Σ_j ℱ_j is their Minkowski average. Minimizing a linear function
//! over ℱ therefore splits into one small LP per voter, and voters with the
//! same report share one LP. Each block keeps its simplex tableau between
//! calls so consecutive objectives start from the previous optimal basis.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpSolution, LpStatus, Relation, Sense, Simplex};
use crate::model::{dot, has_cycle, CandidateSet, Profile};

struct Block {
    /// Share of the electorate reporting this preference.
    weight: f64,
    /// Voters (by index) that reported it.
    voters: Vec<usize>,
    /// `(a, b)` with `⟨c_a − c_b, v⟩ ≥ 0`.
    pairs: Vec<(usize, usize)>,
    lp: LinearProgram,
    simplex: Mutex<Simplex>,
    /// A feasible voter vector found by phase 1.
    interior: Vec<f64>,
}

/// ℱ for one profile over one candidate set.
pub struct FeasibleRegion {
    candidates: CandidateSet,
    include_hull: bool,
    num_voters: usize,
    blocks: Vec<Block>,
    feasible_point: Vec<f64>,
}

impl fmt::Debug for FeasibleRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FeasibleRegion")
            .field("num_voters", &self.num_voters)
            .field("blocks", &self.blocks.len())
            .field("include_hull", &self.include_hull)
            .finish()
    }
}

/// Result of minimizing `⟨w, v̄⟩` over ℱ.
#[derive(Clone, Debug, PartialEq)]
pub struct Minimizer {
    pub value: f64,
    pub point: Vec<f64>,
}

pub fn build_feasible_region(
    profile: &Profile,
    candidates: &CandidateSet,
    include_hull: bool,
) -> Result<FeasibleRegion> {
    let m = candidates.len();
    if profile.num_candidates() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: profile.num_candidates(),
        });
    }
    let n = profile.num_voters();
    if n == 0 {
        return Err(Error::InvalidArgument("feasible region of an empty profile".into()));
    }

    let mut groups: Vec<(Vec<(usize, usize)>, Vec<usize>)> = Vec::new();
    let mut index: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
    for (v, pref) in profile.voters().iter().enumerate() {
        let pairs = pref.implied_pairs();
        // Profiles deserialized without validation can still carry cycles.
        if has_cycle(m, &pairs) {
            return Err(Error::Realizability(format!("voter {v} reports a preference cycle")));
        }
        match index.get(&pairs) {
            Some(&g) => groups[g].1.push(v),
            None => {
                index.insert(pairs.clone(), groups.len());
                groups.push((pairs, vec![v]));
            }
        }
    }

    let mut blocks = Vec::with_capacity(groups.len());
    for (pairs, voters) in groups {
        let lp = block_program(candidates, &pairs, include_hull);
        let mut simplex = Simplex::new(&lp).map_err(|status| match status {
            LpStatus::Infeasible => Error::Realizability(format!(
                "no voter vector in the simplex{} is consistent with voter {}'s report",
                if include_hull { " and the candidate hull" } else { "" },
                voters[0]
            )),
            s => Error::Lp(s),
        })?;
        let zero = vec![0.0; lp.num_vars()];
        let sol = simplex.optimize(&zero, Sense::Minimize);
        if !sol.is_optimal() {
            return Err(Error::Lp(sol.status));
        }
        let interior = to_voter(candidates, include_hull, &sol.point);
        blocks.push(Block {
            weight: voters.len() as f64 / n as f64,
            voters,
            pairs,
            lp,
            simplex: Mutex::new(simplex),
            interior,
        });
    }

    let d = candidates.dim();
    let mut feasible_point = vec![0.0; d];
    for b in &blocks {
        for (f, x) in feasible_point.iter_mut().zip(&b.interior) {
            *f += b.weight * x;
        }
    }
    Ok(FeasibleRegion {
        candidates: candidates.clone(),
        include_hull,
        num_voters: n,
        blocks,
        feasible_point,
    })
}

/// Variables are `v ∈ Δ_d`, or hull weights `λ ∈ Δ_m` with `v = Σ λ_c c`.
fn block_program(candidates: &CandidateSet, pairs: &[(usize, usize)], include_hull: bool) -> LinearProgram {
    let (m, d) = (candidates.len(), candidates.dim());
    let nv = if include_hull { m } else { d };
    let mut lp = LinearProgram::new(nv, Sense::Minimize);
    lp.add_constraint(vec![1.0; nv], Relation::Eq, 1.0);
    for &(a, b) in pairs {
        let diff: Vec<f64> = candidates
            .vector(a)
            .iter()
            .zip(candidates.vector(b))
            .map(|(x, y)| x - y)
            .collect();
        let row = if include_hull {
            candidates.vectors().iter().map(|c| dot(&diff, c)).collect()
        } else {
            diff
        };
        lp.add_constraint(row, Relation::Ge, 0.0);
    }
    lp
}

fn to_voter(candidates: &CandidateSet, include_hull: bool, x: &[f64]) -> Vec<f64> {
    if include_hull {
        candidates.combine(x)
    } else {
        x.to_vec()
    }
}

impl FeasibleRegion {
    pub fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }

    pub fn dim(&self) -> usize {
        self.candidates.dim()
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn num_voters(&self) -> usize {
        self.num_voters
    }

    pub fn include_hull(&self) -> bool {
        self.include_hull
    }

    /// Number of distinct reports, i.e. LPs per minimization.
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Ordinal constraints `(a, b)` of each distinct report with the voters
    /// sharing it.
    pub fn block_constraints(&self) -> impl Iterator<Item = (&[usize], &[(usize, usize)])> {
        self.blocks.iter().map(|b| (b.voters.as_slice(), b.pairs.as_slice()))
    }

    /// An average voter certified feasible by phase 1.
    pub fn feasible_point(&self) -> &[f64] {
        &self.feasible_point
    }

    /// `min_{v̄ ∈ ℱ} ⟨w, v̄⟩` with a minimizing average voter.
    pub fn minimize(&self, w: &[f64]) -> Result<Minimizer> {
        let d = self.dim();
        if w.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: w.len() });
        }
        let objective = self.block_objective(w);
        let mut value = 0.0;
        let mut point = vec![0.0; d];
        for b in &self.blocks {
            let sol = self.solve_block(b, &objective)?;
            let v = to_voter(&self.candidates, self.include_hull, &sol.point);
            value += b.weight * dot(w, &v);
            for (p, x) in point.iter_mut().zip(&v) {
                *p += b.weight * x;
            }
        }
        Ok(Minimizer { value, point })
    }

    fn block_objective(&self, w: &[f64]) -> Vec<f64> {
        if self.include_hull {
            self.candidates.vectors().iter().map(|c| dot(w, c)).collect()
        } else {
            w.to_vec()
        }
    }

    fn solve_block(&self, block: &Block, objective: &[f64]) -> Result<LpSolution> {
        let mut simplex = block.simplex.lock().unwrap_or_else(|e| e.into_inner());
        let sol = simplex.optimize(objective, Sense::Minimize);
        if sol.is_optimal() {
            return Ok(sol);
        }
        // The warm basis drifted; restart from phase 1.
        let mut fresh = Simplex::new(&block.lp).map_err(Error::Lp)?;
        let sol = fresh.optimize(objective, Sense::Minimize);
        *simplex = fresh;
        if sol.is_optimal() {
            Ok(sol)
        } else {
            Err(Error::Lp(sol.status))
        }
    }

    /// All voter blocks as one LP over `(x_1, …, x_B, extra)`; returns the
    /// program with `extra` trailing variables and the row block mapping the
    /// blocks to the average voter.
    fn joint_program(&self, extra: usize) -> (LinearProgram, Vec<Vec<f64>>) {
        let d = self.dim();
        let widths: Vec<usize> = self.blocks.iter().map(|b| b.lp.num_vars()).collect();
        let total: usize = widths.iter().sum::<usize>() + extra;
        let mut lp = LinearProgram::new(total, Sense::Minimize);
        let mut average = vec![vec![0.0; total]; d];
        let mut offset = 0;
        for (b, &w) in self.blocks.iter().zip(&widths) {
            for c in &b.lp.constraints {
                let mut row = vec![0.0; total];
                row[offset..offset + w].copy_from_slice(&c.coeffs);
                lp.add_constraint(row, c.relation, c.rhs);
            }
            for j in 0..w {
                let column: Vec<f64> = if self.include_hull {
                    self.candidates.vector(j).to_vec()
                } else {
                    (0..d).map(|i| if i == j { 1.0 } else { 0.0 }).collect()
                };
                for (i, a) in column.iter().enumerate() {
                    average[i][offset + j] = b.weight * a;
                }
            }
            offset += w;
        }
        (lp, average)
    }

    /// The same minimization as [`FeasibleRegion::minimize`], solved as one
    /// monolithic LP over every voter block. Slow; kept as a cross-check.
    pub fn minimize_joint(&self, w: &[f64]) -> Result<f64> {
        let d = self.dim();
        if w.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: w.len() });
        }
        let (mut lp, average) = self.joint_program(0);
        let objective = (0..lp.num_vars())
            .map(|j| (0..d).map(|i| w[i] * average[i][j]).sum())
            .collect();
        lp.set_objective(objective);
        let sol = lp.solve();
        if sol.is_optimal() {
            Ok(sol.value)
        } else {
            Err(Error::Lp(sol.status))
        }
    }

    /// ℓ¹ distance from `point` to ℱ.
    pub fn residual(&self, point: &[f64]) -> Result<f64> {
        let d = self.dim();
        if point.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: point.len() });
        }
        let (mut lp, average) = self.joint_program(2 * d);
        let nv = lp.num_vars();
        let mut objective = vec![0.0; nv];
        objective[nv - 2 * d..].iter_mut().for_each(|x| *x = 1.0);
        lp.set_objective(objective);
        for (i, mut row) in average.into_iter().enumerate() {
            row[nv - 2 * d + i] = 1.0;
            row[nv - d + i] = -1.0;
            lp.add_constraint(row, Relation::Eq, point[i]);
        }
        let sol = lp.solve();
        if sol.is_optimal() {
            Ok(sol.value.max(0.0))
        } else {
            Err(Error::Lp(sol.status))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Preference;
    use approx::assert_abs_diff_eq;

    fn opposite_basis() -> FeasibleRegion {
        let p = Profile::from_rankings(2, vec![vec![0, 1], vec![1, 0]]).unwrap();
        build_feasible_region(&p, &CandidateSet::basis(2), false).unwrap()
    }

    #[test]
    fn single_voter_half_simplex() {
        let p = Profile::from_rankings(2, vec![vec![0, 1]]).unwrap();
        let r = build_feasible_region(&p, &CandidateSet::basis(2), false).unwrap();
        // v¹ ranges over [0.5, 1].
        assert_abs_diff_eq!(r.minimize(&[1.0, 0.0]).unwrap().value, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.minimize(&[-1.0, 0.0]).unwrap().value, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn opposite_rankings_average_interval() {
        let r = opposite_basis();
        assert_eq!(r.num_blocks(), 2);
        let lo = r.minimize(&[1.0, 0.0]).unwrap();
        let hi = r.minimize(&[-1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(lo.value, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(-hi.value, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(hi.point[0], 0.75, epsilon = 1e-12);
    }

    #[test]
    fn duplicate_reports_share_a_block() {
        let p = Profile::from_rankings(3, vec![vec![0, 1, 2], vec![2, 1, 0], vec![0, 1, 2]]).unwrap();
        let r = build_feasible_region(&p, &CandidateSet::basis(3), false).unwrap();
        assert_eq!(r.num_blocks(), 2);
        let blocks: Vec<_> = r.block_constraints().collect();
        assert_eq!(blocks[0].0, &[0, 2]);
        assert_eq!(blocks[0].1, &[(0, 1), (1, 2)]);
    }

    #[test]
    fn stored_constraints_are_implied_pairs() {
        let p = Profile::new(
            3,
            vec![
                Preference::Ranking(vec![2, 0, 1]),
                Preference::Pairs(vec![(1, 0)]),
            ],
        )
        .unwrap();
        let r = build_feasible_region(&p, &CandidateSet::basis(3), false).unwrap();
        for (voters, pairs) in r.block_constraints() {
            for v in voters {
                assert_eq!(pairs, p.voters()[*v].implied_pairs().as_slice());
            }
        }
    }

    #[test]
    fn cyclic_report_is_unrealizable() {
        let p: Profile =
            serde_json::from_str(r#"{"num_candidates":2,"voters":[{"pairs":[[0,1],[1,0]]}]}"#).unwrap();
        let c = CandidateSet::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(build_feasible_region(&p, &c, false), Err(Error::Realizability(_))));
    }

    #[test]
    fn hull_mode_can_be_empty() {
        // Every hull point has v¹ ≥ 0.7 > v², so nobody prefers 1 to 0.
        let p = Profile::from_rankings(2, vec![vec![1, 0]]).unwrap();
        let c2 = CandidateSet::new(vec![vec![0.8, 0.2], vec![0.7, 0.3]]).unwrap();
        assert!(matches!(build_feasible_region(&p, &c2, true), Err(Error::Realizability(_))));
        assert!(build_feasible_region(&p, &c2, false).is_ok());
    }

    #[test]
    fn joint_lp_matches_separable() {
        let c = CandidateSet::new(vec![
            vec![0.5, 0.3, 0.2],
            vec![0.1, 0.6, 0.3],
            vec![0.2, 0.2, 0.6],
        ])
        .unwrap();
        let p = Profile::from_rankings(3, vec![vec![0, 1, 2], vec![2, 0, 1], vec![1, 2, 0]]).unwrap();
        for hull in [false, true] {
            let r = build_feasible_region(&p, &c, hull).unwrap();
            for w in [[1.0, -0.5, 0.2], [-0.3, 0.4, 0.1], [0.0, 0.0, -1.0]] {
                let sep = r.minimize(&w).unwrap();
                assert_abs_diff_eq!(sep.value, r.minimize_joint(&w).unwrap(), epsilon = 1e-9);
                assert!(r.residual(&sep.point).unwrap() < 1e-9);
            }
        }
    }

    #[test]
    fn residual_detects_outside_points() {
        let r = opposite_basis();
        assert!(r.residual(&[0.5, 0.5]).unwrap() < 1e-12);
        assert_abs_diff_eq!(r.residual(&[0.9, 0.1]).unwrap(), 0.3, epsilon = 1e-9);
        assert!(r.residual(r.feasible_point()).unwrap() < 1e-12);
    }
}
