//! Instance generators: random synthetic families, the adversarial
//! constructions behind the lower bounds, and ingestion of ratings matrices.
//!
//! Every generator is a pure function of its parameters and seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    in_convex_hull, utilities_to_profile, CandidateSet, Instance, Preference, Profile, UtilityProfile, VoterSet,
};
use crate::stable::ceil_sqrt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Random,
    PluralityWorst,
    RdWorst,
    RandomizedLb,
    CloneTest,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Family::Random),
            "plurality-worst" => Ok(Family::PluralityWorst),
            "rd-worst" => Ok(Family::RdWorst),
            "randomized-lb" => Ok(Family::RandomizedLb),
            "clone-test" => Ok(Family::CloneTest),
            other => Err(Error::InvalidArgument(format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub seed: u64,
    pub dirichlet_alpha: f64,
    pub epsilon_tiebreak: f64,
    /// Group whose favorite is the welfare optimum in the randomized lower bound.
    #[serde(default)]
    pub k_star: usize,
    /// Candidate duplicated by the clone family.
    #[serde(default)]
    pub clone_candidate: usize,
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, m: usize, d: usize, seed: u64) -> Self {
        Self {
            family,
            n,
            m,
            d,
            seed,
            dirichlet_alpha: 1.0,
            epsilon_tiebreak: 1e-4,
            k_star: 0,
            clone_candidate: 0,
        }
    }
}

/// Dispatches on the family. `rd-worst` reads the group size from `n / (d − 1)`
/// and `clone-test` clones `clone_candidate` in a random instance.
pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    match spec.family {
        Family::Random => gen_random(spec),
        Family::PluralityWorst => gen_plurality_worstcase(spec.n, spec.m, spec.d),
        Family::RdWorst => {
            if spec.d < 2 {
                return Err(Error::InvalidArgument("rd-worst needs d ≥ 2".into()));
            }
            let groups = spec.d - 1;
            if spec.n == 0 || spec.n % groups != 0 {
                return Err(Error::InvalidArgument(format!(
                    "rd-worst needs n to be a positive multiple of d − 1 = {groups}"
                )));
            }
            gen_rd_worstcase(spec.d, spec.n / groups, spec.epsilon_tiebreak)
        }
        Family::RandomizedLb => gen_randomized_lb_with(spec.n, spec.d, spec.m, spec.k_star),
        Family::CloneTest => gen_clone_test(&gen_random(spec)?, spec.clone_candidate),
    }
}

fn dirichlet<R: Rng>(rng: &mut R, alpha: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![1.0];
    }
    let gamma = Gamma::new(alpha, 1.0).expect("alpha checked positive");
    loop {
        let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 && total.is_finite() {
            return draws.into_iter().map(|x| x / total).collect();
        }
    }
}

/// Dirichlet(α) candidates; voters are uniform random convex combinations of
/// the candidates, with the weights kept as expressiveness witnesses.
pub fn gen_random(spec: &GeneratorSpec) -> Result<Instance> {
    let GeneratorSpec { n, m, d, seed, .. } = *spec;
    if n == 0 || m == 0 || d == 0 {
        return Err(Error::InvalidArgument("n, m and d must be at least 1".into()));
    }
    if !(spec.dirichlet_alpha > 0.0 && spec.dirichlet_alpha.is_finite()) {
        return Err(Error::InvalidArgument("dirichlet_alpha must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates = CandidateSet::new((0..m).map(|_| dirichlet(&mut rng, spec.dirichlet_alpha, d)).collect())?;
    let weights = (0..n).map(|_| dirichlet(&mut rng, 1.0, m)).collect();
    let voters = VoterSet::from_weights(weights, &candidates)?;
    Ok(from_embeddings(candidates, voters, Some(seed)))
}

fn from_embeddings(candidates: CandidateSet, voters: VoterSet, seed: Option<u64>) -> Instance {
    let utilities = UtilityProfile::from_embeddings(&voters, &candidates).expect("dimensions agree");
    let profile = utilities_to_profile(&utilities);
    Instance {
        candidates,
        voters: Some(voters),
        profile,
        utilities: Some(utilities),
        seed,
    }
}

fn with_rankings(candidates: CandidateSet, voters: VoterSet, rankings: Vec<Vec<usize>>) -> Result<Instance> {
    let utilities = UtilityProfile::from_embeddings(&voters, &candidates)?;
    let profile = Profile::from_rankings(candidates.len(), rankings)?;
    let inst = Instance {
        candidates,
        voters: Some(voters),
        profile,
        utilities: Some(utilities),
        seed: None,
    };
    inst.check_consistency()?;
    Ok(inst)
}

fn unit(d: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[i] = 1.0;
    e
}

/// `top` first, then everything else in index order.
fn ranking_with_top(m: usize, top: usize) -> Vec<usize> {
    std::iter::once(top).chain((0..m).filter(|&c| c != top)).collect()
}

/// Candidate 0 spread evenly over coordinates `1..d`, every other candidate
/// at `e_0`.
///
/// With `n ≥ m`, two voters sit at μ and vote for candidate 0 while the rest
/// sit at `e_0` and split their first places round-robin over the others.
/// With `n < m` (and `n | m`) one voter sits at μ and the others each top a
/// distinct copy of `e_0`. Voters at μ value every candidate at `1/d` and the
/// rest value candidate 0 at zero, so plurality (ties to the lowest index)
/// picks the candidate with welfare `k/d` over ones with `n − k + k/d`.
///
/// Putting candidate 0 at μ itself would not work: every voter in the simplex
/// values μ at exactly `1/d`.
pub fn gen_plurality_worstcase(n: usize, m: usize, d: usize) -> Result<Instance> {
    if n < 4 || m < 3 || d < 2 {
        return Err(Error::InvalidArgument("plurality-worst needs n ≥ 4, m ≥ 3, d ≥ 2".into()));
    }
    let at_center = if n >= m {
        2
    } else {
        if m % n != 0 {
            return Err(Error::InvalidArgument(format!("plurality-worst with n < m needs n | m, got n={n}, m={m}")));
        }
        n / m + 1
    };
    let mu = vec![1.0 / d as f64; d];
    let mut spread = vec![1.0 / (d - 1) as f64; d];
    spread[0] = 0.0;
    let mut vectors = vec![spread];
    vectors.extend((1..m).map(|_| unit(d, 0)));
    let candidates = CandidateSet::new(vectors)?;

    let mut voters = Vec::with_capacity(n);
    let mut rankings = Vec::with_capacity(n);
    for _ in 0..at_center {
        voters.push(mu.clone());
        rankings.push((0..m).collect());
    }
    for j in 0..n - at_center {
        let top = 1 + j % (m - 1);
        voters.push(unit(d, 0));
        // Every copy of e_0 is worth 1 to these voters, candidate 0 nothing.
        let mut r = ranking_with_top(m, top);
        r.retain(|&c| c != 0);
        r.push(0);
        rankings.push(r);
    }
    // μ = (1/d) e_0 + (1 − 1/d) c_0.
    let weights = (0..n)
        .map(|v| {
            let mut w = vec![0.0; m];
            if v < at_center {
                w[0] = 1.0 - 1.0 / d as f64;
                w[1] = 1.0 / d as f64;
            } else {
                w[1] = 1.0;
            }
            w
        })
        .collect();
    let voters = VoterSet::new(voters)?.with_weights(weights, &candidates)?;
    with_rankings(candidates, voters, rankings)
}

/// Basis candidates and `d − 1` groups of `group_size` voters; group `i` sits
/// at `e_i (1/2 + ε) + e_{d−1} (1/2 − ε)` and ranks `c_i ≻ c_{d−1} ≻ …`.
pub fn gen_rd_worstcase(d: usize, group_size: usize, epsilon_tiebreak: f64) -> Result<Instance> {
    if d < 2 {
        return Err(Error::InvalidArgument("rd-worst needs d ≥ 2".into()));
    }
    if group_size == 0 {
        return Err(Error::InvalidArgument("group size must be at least 1".into()));
    }
    if !(epsilon_tiebreak > 0.0 && epsilon_tiebreak < 0.1) {
        return Err(Error::InvalidArgument("epsilon_tiebreak must lie in (0, 0.1)".into()));
    }
    let candidates = CandidateSet::basis(d);
    let mut weights = Vec::new();
    let mut rankings = Vec::new();
    for i in 0..d - 1 {
        let mut w = vec![0.0; d];
        w[i] = 0.5 + epsilon_tiebreak;
        w[d - 1] += 0.5 - epsilon_tiebreak;
        let mut r = vec![i, d - 1];
        r.extend((0..d - 1).filter(|&c| c != i));
        for _ in 0..group_size {
            weights.push(w.clone());
            rankings.push(r.clone());
        }
    }
    let voters = VoterSet::from_weights(weights, &candidates)?;
    with_rankings(candidates, voters, rankings)
}

/// The pigeonhole construction with `k* = 0`.
pub fn gen_randomized_lb(n: usize, d: usize, m: usize) -> Result<Instance> {
    gen_randomized_lb_with(n, d, m, 0)
}

/// `K = ⌈√d⌉` groups of `n / K` voters; group `k` ranks candidate `k` first.
/// Candidate `k*` sits at `e_0` (swapping places with candidate 0), the other
/// group favorites at `e_k`, and every remaining candidate at `e_1`. Group
/// `k*` sits at `e_0`, everybody else at μ.
pub fn gen_randomized_lb_with(n: usize, d: usize, m: usize, k_star: usize) -> Result<Instance> {
    if d < 2 {
        return Err(Error::InvalidArgument("randomized-lb needs d ≥ 2".into()));
    }
    let k = ceil_sqrt(d);
    if m < d {
        return Err(Error::InvalidArgument(format!("randomized-lb needs m ≥ d, got m={m}, d={d}")));
    }
    if n == 0 || n % k != 0 {
        return Err(Error::InvalidArgument(format!("randomized-lb needs ⌈√d⌉ = {k} to divide n = {n}")));
    }
    if k_star >= k {
        return Err(Error::InvalidArgument(format!("k* must be below the group count {k}")));
    }
    let position = |c: usize| if c == k_star { 0 } else if c == 0 { k_star } else { c };
    let vectors = (0..m).map(|c| if c < k { unit(d, position(c)) } else { unit(d, 1) }).collect();
    let candidates = CandidateSet::new(vectors)?;
    let mu = vec![1.0 / d as f64; d];
    let per_group = n / k;
    let mut voters = Vec::with_capacity(n);
    let mut rankings = Vec::with_capacity(n);
    for g in 0..k {
        for _ in 0..per_group {
            voters.push(if g == k_star { unit(d, 0) } else { mu.clone() });
            rankings.push(ranking_with_top(m, g));
        }
    }
    // μ needs every coordinate, which the candidates only cover when K ≥ d;
    // the voters are stored without hull witnesses.
    let voters = VoterSet::new(voters)?;
    let mut inst = with_rankings(candidates, voters, rankings)?;
    inst.seed = None;
    Ok(inst)
}

/// Appends an exact copy of `candidate` and places it directly below the
/// original in every report.
pub fn gen_clone_test(base: &Instance, candidate: usize) -> Result<Instance> {
    let m = base.candidates.len();
    if candidate >= m {
        return Err(Error::IndexOutOfRange { index: candidate, len: m });
    }
    let mut candidates = base.candidates.clone();
    let label = candidates.label(candidate).map(|l| format!("{l}'"));
    candidates.push(base.candidates.vector(candidate).to_vec(), label);

    let voters = base
        .profile
        .voters()
        .iter()
        .map(|pref| match pref {
            Preference::Ranking(r) => {
                let mut out = Vec::with_capacity(m + 1);
                for &c in r {
                    out.push(c);
                    if c == candidate {
                        out.push(m);
                    }
                }
                Preference::Ranking(out)
            }
            Preference::Pairs(p) => {
                let mut out = p.clone();
                out.push((candidate, m));
                out.extend(p.iter().filter(|(a, _)| *a == candidate).map(|&(_, b)| (m, b)));
                Preference::Pairs(out)
            }
        })
        .collect();
    let profile = Profile::new(m + 1, voters)?;

    let voter_set = match &base.voters {
        Some(v) => Some(match v.weights() {
            Some(w) => {
                let extended = w.iter().map(|row| row.iter().copied().chain([0.0]).collect()).collect();
                VoterSet::from_weights(extended, &candidates)?
            }
            None => v.clone(),
        }),
        None => None,
    };
    let utilities = match &base.utilities {
        Some(u) => Some(UtilityProfile::new(
            u.rows().iter().map(|r| r.iter().copied().chain([r[candidate]]).collect()).collect(),
        )?),
        None => None,
    };
    Ok(Instance {
        candidates,
        voters: voter_set,
        profile,
        utilities,
        seed: base.seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    /// Masked Frobenius reconstruction error after each update.
    pub errors: Vec<f64>,
    /// Voters found inside the candidate hull.
    pub expressive_voters: usize,
}

/// Nonnegative factorization `R ≈ W H` with multiplicative updates restricted
/// to observed entries. Rows of `W` become voters and columns of `H` become
/// candidates, each rescaled onto the simplex.
pub fn ingest_ratings(
    ratings: &[Vec<Option<f64>>],
    d: usize,
    iterations: usize,
    seed: u64,
) -> Result<(Instance, IngestReport)> {
    let n = ratings.len();
    let m = ratings.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("empty ratings matrix".into()));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("d must be at least 1".into()));
    }
    if ratings.iter().any(|r| r.len() != m) {
        return Err(Error::Validation("ratings rows have different lengths".into()));
    }
    if ratings.iter().flatten().flatten().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::Validation("observed ratings must be finite and nonnegative".into()));
    }
    if ratings.iter().flatten().all(Option::is_none) {
        return Err(Error::InvalidArgument("ratings matrix has no observed entries".into()));
    }

    const TINY: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(0.1..1.0)).collect()).collect();
    let mut h: Vec<Vec<f64>> = (0..d).map(|_| (0..m).map(|_| rng.random_range(0.1..1.0)).collect()).collect();

    let product = |w: &[Vec<f64>], h: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..m).map(|j| (0..d).map(|k| w[i][k] * h[k][j]).sum()).collect())
            .collect()
    };
    let error = |approx: &[Vec<f64>]| -> f64 {
        let mut e = 0.0;
        for (row, arow) in ratings.iter().zip(approx) {
            for (r, a) in row.iter().zip(arow) {
                if let Some(r) = r {
                    e += (r - a) * (r - a);
                }
            }
        }
        e.sqrt()
    };

    let mut errors = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let approx = product(&w, &h);
        for k in 0..d {
            for j in 0..m {
                let (mut num, mut den) = (0.0, 0.0);
                for i in 0..n {
                    if let Some(r) = ratings[i][j] {
                        num += w[i][k] * r;
                        den += w[i][k] * approx[i][j];
                    }
                }
                h[k][j] *= num / (den + TINY);
            }
        }
        let approx = product(&w, &h);
        for i in 0..n {
            for k in 0..d {
                let (mut num, mut den) = (0.0, 0.0);
                for j in 0..m {
                    if let Some(r) = ratings[i][j] {
                        num += r * h[k][j];
                        den += approx[i][j] * h[k][j];
                    }
                }
                w[i][k] *= num / (den + TINY);
            }
        }
        errors.push(error(&product(&w, &h)));
    }

    let normalize = |row: Vec<f64>, what: &str, idx: usize| -> Result<Vec<f64>> {
        let s: f64 = row.iter().sum();
        if !(s > 0.0) {
            return Err(Error::Validation(format!("{what} {idx} has an all-zero factor")));
        }
        Ok(row.into_iter().map(|x| x / s).collect())
    };
    let candidates = CandidateSet::new(
        (0..m)
            .map(|j| normalize((0..d).map(|k| h[k][j]).collect(), "candidate", j))
            .collect::<Result<_>>()?,
    )?;
    let voters = VoterSet::new(
        w.into_iter()
            .enumerate()
            .map(|(i, row)| normalize(row, "voter", i))
            .collect::<Result<_>>()?,
    )?;
    let mut expressive_voters = 0;
    for v in voters.vectors() {
        if in_convex_hull(v, &candidates)? {
            expressive_voters += 1;
        }
    }
    let mut inst = from_embeddings(candidates, voters, Some(seed));
    inst.seed = Some(seed);
    Ok((inst, IngestReport { errors, expressive_voters }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::empirical_distortion;
    use crate::model::{min_favorite_utility, validate_candidates, welfare};
    use crate::rules::{plurality, random_dictatorship};
    use approx::assert_abs_diff_eq;

    fn random(n: usize, m: usize, d: usize, seed: u64) -> Instance {
        gen_random(&GeneratorSpec::new(Family::Random, n, m, d, seed)).unwrap()
    }

    #[test]
    fn random_is_reproducible_and_valid() {
        let a = random(7, 5, 4, 11);
        assert_eq!(a, random(7, 5, 4, 11));
        assert_ne!(a, random(7, 5, 4, 12));
        a.check_consistency().unwrap();
        assert!(validate_candidates(a.candidates.vectors()).is_ok());
        let voters = a.voters.as_ref().unwrap();
        assert!(voters.weights().is_some());
        assert!(min_favorite_utility(voters, &a.candidates).unwrap() >= 0.25 - 1e-12);
    }

    #[test]
    fn random_one_dimension() {
        let a = random(3, 2, 1, 0);
        assert_eq!(a.candidates.vectors(), &[vec![1.0], vec![1.0]]);
    }

    #[test]
    fn plurality_worst_case() {
        let inst = gen_plurality_worstcase(10, 5, 5).unwrap();
        assert_eq!(plurality(&inst.profile).unwrap(), 0);
        let u = inst.utilities.as_ref().unwrap();
        let dist = empirical_distortion(&crate::Lottery::point_mass(5, 0), u).unwrap();
        assert_abs_diff_eq!(dist, 21.0, epsilon = 1e-9);

        let inst = gen_plurality_worstcase(6, 3, 2).unwrap();
        assert_eq!(plurality(&inst.profile).unwrap(), 0);
        let dist = empirical_distortion(&crate::Lottery::point_mass(3, 0), inst.utilities.as_ref().unwrap()).unwrap();
        assert_abs_diff_eq!(dist, 5.0, epsilon = 1e-9);
    }

    #[test]
    fn plurality_worst_case_few_voters() {
        let inst = gen_plurality_worstcase(4, 8, 3).unwrap();
        assert_eq!(plurality(&inst.profile).unwrap(), 0);
        // (n − 1 + 1/d) / (1/d)
        let dist = empirical_distortion(&crate::Lottery::point_mass(8, 0), inst.utilities.as_ref().unwrap()).unwrap();
        assert_abs_diff_eq!(dist, (3.0 + 1.0 / 3.0) * 3.0, epsilon = 1e-9);
        assert!(gen_plurality_worstcase(4, 6, 3).is_err());
    }

    #[test]
    fn rd_worst_case() {
        let inst = gen_rd_worstcase(10, 3, 1e-4).unwrap();
        assert_eq!(inst.profile.num_voters(), 27);
        let u = inst.utilities.as_ref().unwrap();
        let rd = random_dictatorship(&inst.profile).unwrap();
        let dist = empirical_distortion(&rd, u).unwrap();
        assert!((dist - 9.0).abs() < 0.09, "{dist}");
        assert_abs_diff_eq!(welfare(u, 9).unwrap(), 27.0 * (0.5 - 1e-4), epsilon = 1e-9);

        let inst = gen_rd_worstcase(2, 4, 1e-4).unwrap();
        let rd = random_dictatorship(&inst.profile).unwrap();
        assert_eq!(rd.probabilities(), &[1.0, 0.0]);
        assert_abs_diff_eq!(empirical_distortion(&rd, inst.utilities.as_ref().unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn randomized_lb_shape() {
        let inst = gen_randomized_lb(16, 16, 16).unwrap();
        let u = inst.utilities.as_ref().unwrap();
        assert_abs_diff_eq!(welfare(u, 0).unwrap() / 16.0, 0.25 + 0.75 / 16.0, epsilon = 1e-12);
        assert_abs_diff_eq!(welfare(u, 1).unwrap() / 16.0, 1.0 / 16.0 * 0.75, epsilon = 1e-12);
        for g in 0..4 {
            assert_eq!(inst.profile.top_choice(4 * g).unwrap(), g);
        }
        let shifted = gen_randomized_lb_with(16, 16, 16, 2).unwrap();
        assert_eq!(shifted.candidates.vector(2), unit(16, 0).as_slice());
        assert!(gen_randomized_lb(15, 16, 16).is_err());
        assert!(gen_randomized_lb(16, 16, 8).is_err());
    }

    #[test]
    fn clone_examples() {
        let base = Instance {
            candidates: CandidateSet::basis(1),
            voters: None,
            profile: Profile::from_rankings(1, vec![vec![0], vec![0]]).unwrap(),
            utilities: None,
            seed: None,
        };
        let c = gen_clone_test(&base, 0).unwrap();
        assert_eq!(c.candidates.len(), 2);
        assert_eq!(c.profile.rankings().unwrap(), vec![&[0, 1][..], &[0, 1][..]]);

        let base = random(6, 4, 3, 5);
        let c = gen_clone_test(&base, 2).unwrap();
        c.check_consistency().unwrap();
        for r in c.profile.rankings().unwrap() {
            let pos = r.iter().position(|&x| x == 2).unwrap();
            assert_eq!(r[pos + 1], 4);
        }
    }

    #[test]
    fn clone_pairs_sit_below_original() {
        let base = Instance {
            candidates: CandidateSet::basis(3),
            voters: None,
            profile: Profile::new(3, vec![Preference::Pairs(vec![(0, 1), (1, 2)])]).unwrap(),
            utilities: None,
            seed: None,
        };
        let c = gen_clone_test(&base, 1).unwrap();
        assert_eq!(
            c.profile.voters()[0],
            Preference::Pairs(vec![(0, 1), (1, 2), (1, 3), (3, 2)])
        );
    }

    #[test]
    fn ingest_rank_one() {
        let ratings = vec![vec![Some(1.0); 4]; 4];
        let (inst, report) = ingest_ratings(&ratings, 1, 50, 3).unwrap();
        assert!(inst.candidates.vectors().iter().all(|c| c == &[1.0]));
        assert!(inst.utilities.unwrap().rows().iter().flatten().all(|u| *u == 1.0));
        assert_eq!(report.expressive_voters, 4);
    }

    #[test]
    fn ingest_error_is_monotone_and_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ratings: Vec<Vec<Option<f64>>> = (0..12)
            .map(|_| {
                (0..8)
                    .map(|_| if rng.random_bool(0.7) { Some(rng.random_range(0.0..5.0)) } else { None })
                    .collect()
            })
            .collect();
        let (a, report) = ingest_ratings(&ratings, 3, 200, 1).unwrap();
        for pair in report.errors.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-9), "{pair:?}");
        }
        let (b, _) = ingest_ratings(&ratings, 3, 200, 1).unwrap();
        assert_eq!(a, b);
        assert!(ingest_ratings(&[], 3, 10, 1).is_err());
        assert!(ingest_ratings(&[vec![None, None]], 1, 10, 1).is_err());
    }
}
