//! Stable lotteries over size-k committees.
//!
//! For a committee `W` and challenger `c`, `S_c(W)` is the set of voters who
//! strictly prefer `c` to every member of `W`. A distribution over committees
//! is stable when `E|S_c(W)| ≤ n/k` for every `c`. Such lotteries always exist;
//! this module finds one by LP and certifies it by recounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpStatus, Relation, Sense};
use crate::model::{CandidateSet, Lottery, Profile};
use crate::projection;

/// Committee spaces up to this size are enumerated exactly.
pub const EXACT_LIMIT: u128 = 200_000;
/// Slack allowed on the stability certificate.
pub const CERTIFICATE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommitteeLottery {
    pub k: usize,
    pub support: Vec<(Vec<usize>, f64)>,
    /// `Pr[c ∈ W]`.
    pub marginals: Vec<f64>,
    /// `max_c E|S_c(W)|`, recounted over the support.
    pub max_expected_blocking: f64,
}

impl CommitteeLottery {
    pub fn bound(&self, num_voters: usize) -> f64 {
        num_voters as f64 / self.k as f64
    }
}

#[derive(Clone, Debug)]
pub struct StableConfig {
    pub exact_limit: u128,
    pub heuristic_rounds: usize,
}

impl Default for StableConfig {
    fn default() -> Self {
        Self {
            exact_limit: EXACT_LIMIT,
            heuristic_rounds: 400,
        }
    }
}

/// Rank positions, `pos[v][c]`, for a profile of total orders.
struct Positions {
    rankings: Vec<Vec<usize>>,
    pos: Vec<Vec<usize>>,
    m: usize,
}

impl Positions {
    fn new(profile: &Profile) -> Result<Self> {
        let m = profile.num_candidates();
        let rankings: Vec<Vec<usize>> = profile.rankings()?.into_iter().map(<[usize]>::to_vec).collect();
        let pos = rankings
            .iter()
            .map(|r| {
                let mut p = vec![0; m];
                for (i, &c) in r.iter().enumerate() {
                    p[c] = i;
                }
                p
            })
            .collect();
        Ok(Self { rankings, pos, m })
    }

    fn best_positions(&self, committee: &[usize]) -> Vec<usize> {
        self.pos
            .iter()
            .map(|p| committee.iter().map(|&w| p[w]).min().unwrap_or(self.m))
            .collect()
    }

    /// `|S_c(W)|` for every challenger `c`.
    fn blocking_vector(&self, committee: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; self.m];
        for (r, best) in self.rankings.iter().zip(self.best_positions(committee)) {
            for &c in &r[..best] {
                counts[c] += 1;
            }
        }
        counts
    }
}

/// Number of voters ranking `challenger` strictly above every member of
/// `committee`; zero when the challenger sits on the committee.
pub fn blocking_count(committee: &[usize], challenger: usize, profile: &Profile) -> Result<usize> {
    let m = profile.num_candidates();
    if let Some(&bad) = committee.iter().chain(std::iter::once(&challenger)).find(|&&c| c >= m) {
        return Err(Error::IndexOutOfRange { index: bad, len: m });
    }
    let mut count = 0;
    for r in profile.rankings()? {
        let beats_all = r
            .iter()
            .take_while(|c| !committee.contains(c))
            .any(|&c| c == challenger);
        if beats_all {
            count += 1;
        }
    }
    Ok(count)
}

/// `max_c Σ_W q_W |S_c(W)|` by direct recount.
pub fn max_expected_blocking(support: &[(Vec<usize>, f64)], profile: &Profile) -> Result<f64> {
    let positions = Positions::new(profile)?;
    let mut expected = vec![0.0; positions.m];
    for (w, q) in support {
        for (e, s) in expected.iter_mut().zip(positions.blocking_vector(w)) {
            *e += q * s as f64;
        }
    }
    Ok(expected.into_iter().fold(0.0, f64::max))
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All k-subsets of `0..m` in lexicographic order.
pub fn committees(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < m - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn stable_lottery(profile: &Profile, k: usize) -> Result<CommitteeLottery> {
    stable_lottery_with(profile, k, &StableConfig::default())
}

pub fn stable_lottery_with(profile: &Profile, k: usize, config: &StableConfig) -> Result<CommitteeLottery> {
    let m = profile.num_candidates();
    if k == 0 {
        return Err(Error::InvalidArgument("committee size must be at least 1".into()));
    }
    let k = k.min(m);
    let positions = Positions::new(profile)?;
    let n = profile.num_voters();
    let bound = n as f64 / k as f64;

    let support = if k == m {
        vec![((0..m).collect::<Vec<_>>(), 1.0)]
    } else if binomial(m, k) <= config.exact_limit {
        let pool = committees(m, k);
        solve_restricted(&positions, pool, bound)?
    } else {
        let pool = mwu_pool(&positions, k, config.heuristic_rounds);
        solve_restricted(&positions, pool, bound)?
    };

    let mut marginals = vec![0.0; m];
    for (w, q) in &support {
        for &c in w {
            marginals[c] += q;
        }
    }
    let achieved = max_expected_blocking(&support, profile)?;
    if achieved > bound + CERTIFICATE_TOL {
        return Err(Error::StabilityNotCertified { achieved, bound });
    }
    Ok(CommitteeLottery {
        k,
        support,
        marginals,
        max_expected_blocking: achieved,
    })
}

/// `min t  s.t.  Σ_W q_W |S_c(W)| − t ≤ n/k  ∀c,  q ∈ Δ(pool)`.
fn solve_restricted(positions: &Positions, pool: Vec<Vec<usize>>, bound: f64) -> Result<Vec<(Vec<usize>, f64)>> {
    let blocking: Vec<Vec<usize>> = blocking_vectors(positions, &pool);
    let m = positions.m;
    // Challengers nobody ever blocks with give vacuous rows.
    let active: Vec<usize> = (0..m).filter(|&c| blocking.iter().any(|b| b[c] > 0)).collect();
    if active.is_empty() {
        // Every committee in the pool is unblocked.
        let first = pool.into_iter().next().expect("pool is nonempty");
        return Ok(vec![(first, 1.0)]);
    }
    let nw = pool.len();
    let mut lp = LinearProgram::new(nw + 1, Sense::Minimize);
    let mut obj = vec![0.0; nw + 1];
    obj[nw] = 1.0;
    lp.set_objective(obj);
    lp.set_bounds(nw, f64::NEG_INFINITY, f64::INFINITY);
    for &c in &active {
        let mut row: Vec<f64> = blocking.iter().map(|b| b[c] as f64).collect();
        row.push(-1.0);
        lp.add_constraint(row, Relation::Le, bound);
    }
    let mut simplex_row = vec![1.0; nw + 1];
    simplex_row[nw] = 0.0;
    lp.add_constraint(simplex_row, Relation::Eq, 1.0);
    let sol = lp.solve();
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(sol.status));
    }
    let mut support: Vec<(Vec<usize>, f64)> = pool
        .into_iter()
        .zip(sol.point)
        .filter(|(_, q)| *q > 1e-12)
        .collect();
    let total: f64 = support.iter().map(|(_, q)| q).sum();
    support.iter_mut().for_each(|(_, q)| *q /= total);
    Ok(support)
}

#[cfg(feature = "parallel")]
fn blocking_vectors(positions: &Positions, pool: &[Vec<usize>]) -> Vec<Vec<usize>> {
    use rayon::prelude::*;
    pool.par_iter().map(|w| positions.blocking_vector(w)).collect()
}

#[cfg(not(feature = "parallel"))]
fn blocking_vectors(positions: &Positions, pool: &[Vec<usize>]) -> Vec<Vec<usize>> {
    pool.iter().map(|w| positions.blocking_vector(w)).collect()
}

/// Committees visited by a multiplicative-weights adversary over challengers,
/// each round answered by a greedy committee that minimizes the weighted
/// blocking count.
fn mwu_pool(positions: &Positions, k: usize, rounds: usize) -> Vec<Vec<usize>> {
    let m = positions.m;
    let n = positions.rankings.len().max(1) as f64;
    let eta = ((m as f64).ln().max(1.0) / rounds.max(1) as f64).sqrt();
    let mut weights = vec![1.0 / m as f64; m];
    let mut pool: Vec<Vec<usize>> = Vec::new();
    for _ in 0..rounds {
        let w = greedy_committee(positions, k, &weights);
        let blocking = positions.blocking_vector(&w);
        for (y, s) in weights.iter_mut().zip(&blocking) {
            *y *= (eta * *s as f64 / n).exp();
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|y| *y /= total);
        if !pool.contains(&w) {
            pool.push(w);
        }
    }
    pool
}

fn greedy_committee(positions: &Positions, k: usize, weights: &[f64]) -> Vec<usize> {
    let m = positions.m;
    // prefix[v][j] = Σ_{i<j} y(ranking_v[i]): weighted blocking of voter v when
    // their best committee member sits at position j.
    let prefix: Vec<Vec<f64>> = positions
        .rankings
        .iter()
        .map(|r| {
            let mut acc = Vec::with_capacity(m + 1);
            let mut s = 0.0;
            acc.push(0.0);
            for &c in r {
                s += weights[c];
                acc.push(s);
            }
            acc
        })
        .collect();
    let mut best = vec![m; positions.rankings.len()];
    let mut committee = Vec::with_capacity(k);
    for _ in 0..k {
        let mut choice = None;
        let mut choice_cost = f64::INFINITY;
        for c in (0..m).filter(|c| !committee.contains(c)) {
            let cost: f64 = positions
                .pos
                .iter()
                .zip(&best)
                .zip(&prefix)
                .map(|((p, &b), pre)| pre[b.min(p[c])])
                .sum();
            if cost < choice_cost - 1e-15 {
                choice_cost = cost;
                choice = Some(c);
            }
        }
        let c = choice.expect("fewer than k candidates left");
        for (b, p) in best.iter_mut().zip(&positions.pos) {
            *b = (*b).min(p[c]);
        }
        committee.push(c);
    }
    committee.sort_unstable();
    committee
}

/// `⌈√d⌉` computed in integers.
pub fn ceil_sqrt(d: usize) -> usize {
    let mut r = (d as f64).sqrt() as usize;
    while r * r < d {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= d {
        r -= 1;
    }
    r
}

/// Half the mass from a stable lottery over committees of size `⌈√d⌉` (capped
/// at m), spread by marginals; half from the uniform projection lottery.
pub fn linear_stable_lottery_rule(profile: &Profile, candidates: &CandidateSet) -> Result<Lottery> {
    linear_stable_lottery_rule_with(profile, candidates, None, &StableConfig::default())
}

pub fn linear_stable_lottery_rule_with(
    profile: &Profile,
    candidates: &CandidateSet,
    k_override: Option<usize>,
    config: &StableConfig,
) -> Result<Lottery> {
    let m = profile.num_candidates();
    if candidates.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: candidates.len(),
        });
    }
    let k = k_override.unwrap_or_else(|| ceil_sqrt(candidates.dim())).clamp(1, m);
    let committee = stable_lottery_with(profile, k, config)?;
    let center = projection::uproj_default(candidates)?;
    mix_linear_stable(&committee.marginals, committee.k, &center.lottery)
}

/// `Pr[c] = marginal_c / (2k) + center_c / 2`.
pub fn mix_linear_stable(marginals: &[f64], k: usize, center: &Lottery) -> Result<Lottery> {
    if marginals.len() != center.len() {
        return Err(Error::DimensionMismatch {
            expected: center.len(),
            got: marginals.len(),
        });
    }
    let weights = marginals
        .iter()
        .zip(center.probabilities())
        .map(|(marg, u)| marg / (2.0 * k as f64) + u / 2.0)
        .collect();
    Lottery::from_weights(weights)
}

/// Stable lottery over committees of size `min(2d, m)`, spread by marginals.
/// Needs only the ordinal profile and the dimension.
pub fn pure_stable_lottery_rule(profile: &Profile, d: usize) -> Result<Lottery> {
    pure_stable_lottery_rule_with(profile, d, None, &StableConfig::default())
}

pub fn pure_stable_lottery_rule_with(
    profile: &Profile,
    d: usize,
    k_override: Option<usize>,
    config: &StableConfig,
) -> Result<Lottery> {
    let m = profile.num_candidates();
    let k = k_override.unwrap_or(2 * d).clamp(1, m);
    let committee = stable_lottery_with(profile, k, config)?;
    Lottery::from_weights(
        committee
            .marginals
            .iter()
            .map(|marg| marg / committee.k as f64)
            .collect(),
    )
}
