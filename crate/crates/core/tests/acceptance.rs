//! End-to-end acceptance checks. Runs without the libtest harness so each
//! check prints exactly one PASS/FAIL line; exits nonzero if any fails.
//!
//! Expected values are recomputed here from first principles (direct dot
//! products, counting, exhaustive enumeration, a grid search over each voter's
//! feasible region) rather than read back from the library.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use linchoice::bench::{run_grid, BenchConfig, Rule};
use linchoice::distortion::{
    build_feasible_region, instance_distortion_candidate, instance_distortion_lottery, optimal_deterministic_in,
    optimal_randomized_in, DEFAULT_EPSILON,
};
use linchoice::instances::{
    gen_clone_test, gen_plurality_worstcase, gen_randomized_lb, gen_rd_worstcase, generate, Family, GeneratorSpec,
};
use linchoice::model::min_favorite_utility;
use linchoice::projection::uproj_default;
use linchoice::rules::{harmonic_lottery, max_coordinate_plurality, plurality, random_dictatorship};
use linchoice::stable::{linear_stable_lottery_rule, pure_stable_lottery_rule, stable_lottery, CERTIFICATE_TOL};
use linchoice::{CandidateSet, Instance, Lottery, Profile, VoterSet};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random(n: usize, m: usize, d: usize, seed: u64) -> Instance {
    generate(&GeneratorSpec::new(Family::Random, n, m, d, seed)).expect("random instance")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Voter-by-candidate utilities straight from the embeddings.
fn utility_matrix(inst: &Instance) -> Vec<Vec<f64>> {
    let voters = inst.voters.as_ref().expect("embedded voters");
    voters
        .vectors()
        .iter()
        .map(|v| inst.candidates.vectors().iter().map(|c| dot(v, c)).collect())
        .collect()
}

fn welfares(u: &[Vec<f64>]) -> Vec<f64> {
    let m = u[0].len();
    (0..m).map(|c| u.iter().map(|row| row[c]).sum()).collect()
}

fn empirical(u: &[Vec<f64>], lottery: &[f64]) -> f64 {
    let w = welfares(u);
    let best = w.iter().copied().fold(0.0, f64::max);
    best / dot(&w, lottery)
}

fn rankings(p: &Profile) -> Vec<Vec<usize>> {
    p.rankings().expect("total orders").into_iter().map(<[usize]>::to_vec).collect()
}

/// Number of voters preferring `c` to every member of `w`.
fn blocking(w: &[usize], c: usize, ranks: &[Vec<usize>]) -> usize {
    ranks
        .iter()
        .filter(|r| {
            let pos = |x: usize| r.iter().position(|&y| y == x).unwrap();
            w.iter().all(|&x| pos(c) < pos(x))
        })
        .count()
}

/// Points of Δ_d on the lattice with the given number of steps per unit.
fn simplex_grid(d: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(d: usize, left: usize, steps: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == d - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&k| k as f64 / steps as f64).collect());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(d, left - k, steps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, steps, steps, &mut Vec::new(), &mut out);
    out
}

/// Lower approximation of instance distortion from a grid search.
///
/// Each voter ranges over the grid points of Δ_d consistent with their ranking
/// (plus their true embedding, which always is). The worst ratio
/// `Σ_j ⟨c', v_j⟩ / Σ_j ⟨ĉ, v_j⟩` over challengers `c'` separates per voter
/// once the ratio is fixed, so it is found by Dinkelbach iteration.
fn grid_distortion(point: &[f64], inst: &Instance, steps: usize) -> f64 {
    let d = inst.candidates.dim();
    let grid = simplex_grid(d, steps);
    let cands = inst.candidates.vectors();
    let truth = inst.voters.as_ref().unwrap().vectors();
    let regions: Vec<Vec<Vec<f64>>> = rankings(&inst.profile)
        .iter()
        .zip(truth)
        .map(|(r, v)| {
            let ok = |x: &Vec<f64>| {
                r.windows(2)
                    .all(|w| dot(&cands[w[0]], x) >= dot(&cands[w[1]], x) - 1e-12)
            };
            let mut pts: Vec<Vec<f64>> = grid.iter().filter(|x| ok(x)).cloned().collect();
            pts.push(v.clone());
            pts
        })
        .collect();
    let mut worst: f64 = 1.0;
    for challenger in cands {
        let mut lambda = 1.0;
        for _ in 0..100 {
            let (mut num, mut den) = (0.0, 0.0);
            for pts in &regions {
                let best = pts
                    .iter()
                    .max_by(|a, b| {
                        let f = |x: &Vec<f64>| dot(challenger, x) - lambda * dot(point, x);
                        f(a).total_cmp(&f(b))
                    })
                    .unwrap();
                num += dot(challenger, best);
                den += dot(point, best);
            }
            if den <= 0.0 {
                return f64::INFINITY;
            }
            let next = num / den;
            if next <= lambda * (1.0 + 1e-12) {
                break;
            }
            lambda = next;
        }
        worst = worst.max(lambda);
    }
    worst
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn c1_favorite_floor() -> Outcome {
    let mut count = 0;
    for seed in 0..1000u64 {
        let d = 2 + (seed % 9) as usize;
        let m = 1 + (seed / 9 % 12) as usize;
        let inst = random(10, m, d, seed);
        let floor = 1.0 / d as f64 - 1e-12;
        for u in utility_matrix(&inst) {
            let best = u.iter().copied().fold(0.0, f64::max);
            ensure(best >= floor, || format!("seed {seed}: best utility {best} < 1/{d}"))?;
        }
        let lib = min_favorite_utility(inst.voters.as_ref().unwrap(), &inst.candidates).unwrap();
        ensure(lib >= floor, || format!("seed {seed}: library floor {lib}"))?;
        count += 1;
    }
    Ok(format!("{count} instances"))
}

fn c2_uproj_welfare() -> Outcome {
    let mut worst_margin = f64::INFINITY;
    for seed in 0..200u64 {
        let d = 2 + (seed % 9) as usize;
        let m = 1 + (seed / 9 % 15) as usize;
        let n = 12;
        let inst = random(n, m, d, 1000 + seed);
        let r = uproj_default(&inst.candidates).map_err(|e| format!("seed {seed}: {e}"))?;
        let u = utility_matrix(&inst);
        let expected = dot(&welfares(&u), r.lottery.probabilities());
        let floor = n as f64 / d as f64;
        ensure(expected >= floor - 1e-6, || format!("seed {seed}: welfare {expected} < {floor}"))?;
        worst_margin = worst_margin.min(expected - floor);

        let hat = inst.candidates.combine(r.lottery.probabilities());
        let mu = 1.0 / d as f64;
        for c in inst.candidates.vectors() {
            let foc: f64 = (0..d).filter(|&i| c[i] > 0.0).map(|i| mu * c[i] / hat[i]).sum();
            ensure(foc <= 1.0 + 1e-6, || format!("seed {seed}: first-order value {foc}"))?;
        }
    }
    Ok(format!("200 instances, min welfare margin {worst_margin:.3e}"))
}

fn c3_uproj_basis() -> Outcome {
    for d in 1..=12 {
        let r = uproj_default(&CandidateSet::basis(d)).map_err(|e| e.to_string())?;
        let mu = 1.0 / d as f64;
        ensure(r.kl_value.abs() <= 1e-9, || format!("d={d}: KL {}", r.kl_value))?;
        for i in 0..d {
            ensure((r.point[i] - mu).abs() <= 1e-9, || format!("d={d}: point {:?}", r.point))?;
            ensure((r.lottery.get(i) - mu).abs() <= 1e-9, || format!("d={d}: lottery {:?}", r.lottery))?;
        }
    }
    Ok("d = 1..12".into())
}

fn c4_plurality_worst() -> Outcome {
    let inst = gen_plurality_worstcase(10, 5, 5).map_err(|e| e.to_string())?;
    let mut votes = [0usize; 5];
    for r in rankings(&inst.profile) {
        votes[r[0]] += 1;
    }
    let top = votes.iter().copied().max().unwrap();
    let winner = votes.iter().position(|&v| v == top).unwrap();
    ensure(plurality(&inst.profile).unwrap() == winner, || "library winner differs".into())?;
    let value = empirical(&utility_matrix(&inst), Lottery::point_mass(5, winner).probabilities());
    ensure((value - 21.0).abs() <= 1e-6, || format!("distortion {value}"))?;
    Ok(format!("distortion {value:.9}"))
}

fn c5_rd_worst() -> Outcome {
    let inst = gen_rd_worstcase(10, 5, 1e-4).map_err(|e| e.to_string())?;
    let m = inst.candidates.len();
    let n = inst.profile.num_voters() as f64;
    let mut rd = vec![0.0; m];
    for r in rankings(&inst.profile) {
        rd[r[0]] += 1.0 / n;
    }
    let lib = random_dictatorship(&inst.profile).unwrap();
    ensure(rd.iter().zip(lib.probabilities()).all(|(a, b)| (a - b).abs() < 1e-12), || {
        "library RD differs".into()
    })?;
    let value = empirical(&utility_matrix(&inst), &rd);
    ensure(rel_err(value, 9.0) <= 0.01, || format!("distortion {value}"))?;
    Ok(format!("distortion {value:.6}"))
}

/// The 50 embedded profiles shared by the two committee checks.
fn committee_suite() -> Vec<(Instance, usize)> {
    (0..50u64)
        .map(|i| {
            let k = 2 + (i % 3) as usize;
            let d = k * k;
            let m = 5 + (i / 3 % 8) as usize;
            (random(20, m, d, 5000 + i), k)
        })
        .collect()
}

fn c6_stable_certificate() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for (i, (inst, k)) in committee_suite().iter().enumerate() {
        let l = stable_lottery(&inst.profile, *k).map_err(|e| format!("profile {i}: {e}"))?;
        let ranks = rankings(&inst.profile);
        let m = inst.candidates.len();
        let bound = 20.0 / *k as f64;
        for c in 0..m {
            let expected: f64 = l.support.iter().map(|(w, q)| q * blocking(w, c, &ranks) as f64).sum();
            ensure(expected <= bound + CERTIFICATE_TOL, || {
                format!("profile {i}: challenger {c} blocks {expected} > {bound}")
            })?;
            worst = worst.max(expected - bound);
        }
    }
    Ok(format!("50 profiles, max E|S_c| - n/k = {worst:.3e}"))
}

fn c7_lslr_bound() -> Outcome {
    let mut worst_ratio: f64 = 0.0;
    for (i, (inst, _)) in committee_suite().iter().enumerate() {
        let d = inst.candidates.dim();
        let l = linear_stable_lottery_rule(&inst.profile, &inst.candidates).map_err(|e| format!("profile {i}: {e}"))?;
        let region = build_feasible_region(&inst.profile, &inst.candidates, true).map_err(|e| e.to_string())?;
        let value = instance_distortion_lottery(&l, &region, DEFAULT_EPSILON)
            .map_err(|e| format!("profile {i}: {e}"))?
            .value;
        let bound = 2.0 * (d as f64).sqrt();
        ensure(value <= bound + 1e-3, || format!("profile {i} (d={d}): {value} > {bound}"))?;
        worst_ratio = worst_ratio.max(value / bound);
    }
    Ok(format!("50 profiles, max distortion / 2√d = {worst_ratio:.3}"))
}

fn c8_pslr_bound() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let inst = random(20, 20, 5, 9000 + seed);
        let l = pure_stable_lottery_rule(&inst.profile, 5).map_err(|e| format!("seed {seed}: {e}"))?;
        let value = empirical(&utility_matrix(&inst), l.probabilities());
        ensure(value <= 20.0, || format!("seed {seed}: {value}"))?;
        worst = worst.max(value);
    }
    Ok(format!("50 instances, max distortion {worst:.4}"))
}

fn c9_optimal_vs_grid() -> Outcome {
    let mut checked = 0;
    let mut max_err: f64 = 0.0;
    for i in 0..100u64 {
        let n = 1 + (i % 4) as usize;
        let m = 2 + (i / 4 % 4) as usize;
        let d = 2 + (i / 16 % 3) as usize;
        let inst = random(n, m, d, 20_000 + i);
        if !(n <= 3 && m <= 4 && d <= 3) {
            continue;
        }
        checked += 1;
        let region = build_feasible_region(&inst.profile, &inst.candidates, false).map_err(|e| e.to_string())?;
        let mut betas = Vec::new();
        for k in 0..m {
            let rep = instance_distortion_candidate(k, &region, DEFAULT_EPSILON).map_err(|e| e.to_string())?;
            let grid = grid_distortion(inst.candidates.vector(k), &inst, 50);
            let err = rel_err(grid, rep.value);
            // The grid only visits feasible points, so it can never beat the LP.
            ensure(err <= 0.05 && grid <= rep.value * (1.0 + 1e-6), || {
                format!("instance {i} candidate {k}: LP {} grid {grid}", rep.value)
            })?;
            max_err = max_err.max(err);
            betas.push(rep.beta);
        }
        let (_, det) = optimal_deterministic_in(&region, DEFAULT_EPSILON).map_err(|e| e.to_string())?;
        let (lottery, rand) = optimal_randomized_in(&region, DEFAULT_EPSILON).map_err(|e| e.to_string())?;
        let grid = grid_distortion(&inst.candidates.combine(lottery.probabilities()), &inst, 50);
        let err = rel_err(grid, rand.value);
        ensure(err <= 0.05 && grid <= rand.value * (1.0 + 1e-6), || {
            format!("instance {i} lottery: LP {} grid {grid}", rand.value)
        })?;
        max_err = max_err.max(err);
        let eps = DEFAULT_EPSILON;
        ensure(rand.beta >= det.beta - eps, || format!("instance {i}: rand β {} < det β {}", rand.beta, det.beta))?;
        for (k, b) in betas.iter().enumerate() {
            ensure(det.beta >= b - eps, || format!("instance {i}: det β {} < candidate {k} β {b}", det.beta))?;
        }
    }
    ensure(checked > 0, || "no instances in range".into())?;
    Ok(format!("{checked} instances, max relative gap to grid {max_err:.4}"))
}

fn c10_symmetric_fixture() -> Outcome {
    let candidates = CandidateSet::basis(2);
    let profile = Profile::from_rankings(2, vec![vec![0, 1], vec![1, 0]]).unwrap();
    let region = build_feasible_region(&profile, &candidates, false).unwrap();
    for k in 0..2 {
        let v = instance_distortion_candidate(k, &region, DEFAULT_EPSILON).unwrap().value;
        ensure((v - 3.0).abs() <= 1e-3, || format!("candidate {k}: {v}"))?;
    }
    let (_, det) = optimal_deterministic_in(&region, DEFAULT_EPSILON).unwrap();
    ensure((det.value - 3.0).abs() <= 1e-3, || format!("optimal-det {}", det.value))?;
    let (lottery, rand) = optimal_randomized_in(&region, DEFAULT_EPSILON).unwrap();
    ensure((rand.value - 1.5).abs() <= 1e-3, || format!("optimal-rand {}", rand.value))?;
    ensure((lottery.get(0) - 0.5).abs() <= 1e-3, || format!("lottery {:?}", lottery))?;

    // The same values by grid search over both voters' half-simplices.
    let inst = Instance {
        candidates: candidates.clone(),
        voters: Some(VoterSet::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()),
        profile,
        utilities: None,
        seed: None,
    };
    let g_det = grid_distortion(candidates.vector(0), &inst, 50);
    let g_rand = grid_distortion(&[0.5, 0.5], &inst, 50);
    ensure((g_det - 3.0).abs() <= 1e-9 && (g_rand - 1.5).abs() <= 1e-9, || {
        format!("grid {g_det} / {g_rand}")
    })?;
    Ok(format!("det {:.6}, rand {:.6}", det.value, rand.value))
}

fn c11_randomized_lower_bound() -> Outcome {
    let inst = gen_randomized_lb(16, 16, 16).map_err(|e| e.to_string())?;
    let region = build_feasible_region(&inst.profile, &inst.candidates, false).map_err(|e| e.to_string())?;
    let (_, rep) = optimal_randomized_in(&region, DEFAULT_EPSILON).map_err(|e| e.to_string())?;
    ensure(rep.value >= 2.4, || format!("optimal-rand {}", rep.value))?;
    Ok(format!("optimal-rand {:.4}", rep.value))
}

fn c12_clone_invariance() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let inst = random(8, 5, 3, 30_000 + seed);
        let clone = gen_clone_test(&inst, (seed % 5) as usize).map_err(|e| e.to_string())?;
        let lottery = harmonic_lottery(&inst.profile).unwrap();
        let before = build_feasible_region(&inst.profile, &inst.candidates, false).map_err(|e| e.to_string())?;
        let after = build_feasible_region(&clone.profile, &clone.candidates, false).map_err(|e| e.to_string())?;
        let a = instance_distortion_lottery(&lottery, &before, DEFAULT_EPSILON).map_err(|e| e.to_string())?;
        let b = instance_distortion_lottery(&lottery.extended(1), &after, DEFAULT_EPSILON)
            .map_err(|e| e.to_string())?;
        let change = (a.value - b.value).abs();
        ensure(change <= 1e-3, || format!("seed {seed}: {} vs {}", a.value, b.value))?;
        worst = worst.max(change);

        let w0 = max_coordinate_plurality(&inst.profile, &inst.candidates).unwrap();
        let w1 = max_coordinate_plurality(&clone.profile, &clone.candidates).unwrap();
        ensure(inst.candidates.vector(w0) == clone.candidates.vector(w1), || {
            format!("seed {seed}: MCP winner moved")
        })?;
    }
    Ok(format!("20 instances, max change {worst:.3e}"))
}

fn c13_dominance() -> Outcome {
    let rows = run_grid(&BenchConfig::default()).map_err(|e| e.to_string())?;
    let eps = 1e-3;
    let instances = rows.iter().map(|r| r.instance_id).max().map_or(0, |x| x + 1);
    ensure(instances == 100, || format!("{instances} instances"))?;
    for id in 0..instances {
        let of = |rule: Rule| rows.iter().find(|r| r.instance_id == id && r.rule == rule).unwrap();
        for r in rows.iter().filter(|r| r.instance_id == id) {
            ensure(r.status == "ok", || format!("instance {id} {}: {}", r.rule, r.status))?;
            ensure(r.instance_distortion >= r.empirical_distortion - eps, || {
                format!("instance {id} {}: instance below empirical", r.rule)
            })?;
        }
        let rand = of(Rule::OptimalRand).instance_distortion;
        let det = of(Rule::OptimalDet).instance_distortion;
        for rule in Rule::ALL {
            let v = of(rule).instance_distortion;
            ensure(rand <= v + eps, || format!("instance {id}: optimal-rand {rand} > {rule} {v}"))?;
            if rule.is_deterministic() {
                ensure(det <= v + eps, || format!("instance {id}: optimal-det {det} > {rule} {v}"))?;
            }
        }
    }
    Ok(format!("{} rows", rows.len()))
}

fn c14_harmonic_vs_rd() -> Outcome {
    // Everyone ranks the good candidate first, followed by clones of a bad one.
    let base = Instance {
        candidates: CandidateSet::new(vec![vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap(),
        voters: Some(VoterSet::new(vec![vec![1.0, 0.0]; 6]).unwrap()),
        profile: Profile::from_rankings(2, vec![vec![0, 1]; 6]).unwrap(),
        utilities: None,
        seed: None,
    };
    let mut inst = base;
    let mut previous = f64::INFINITY;
    let mut line = Vec::new();
    for m in 2..=64usize {
        if m > 2 {
            inst = gen_clone_test(&inst, 1).map_err(|e| e.to_string())?;
        }
        let h = harmonic_lottery(&inst.profile).unwrap().get(0);
        let rd = random_dictatorship(&inst.profile).unwrap().get(0);
        let hm: f64 = (1..=m).map(|j| 1.0 / j as f64).sum();
        // Scores 1/i + H_m/m; the good candidate is always in position 1.
        let expected = (1.0 + hm / m as f64) / (2.0 * hm);
        ensure((h - expected).abs() <= 1e-12, || format!("m={m}: harmonic {h}, expected {expected}"))?;
        ensure(h < previous, || format!("m={m}: not decreasing"))?;
        let scaled = h * (m as f64).ln();
        ensure(m < 8 || (0.4..=0.6).contains(&scaled), || format!("m={m}: p·ln m = {scaled}"))?;
        ensure(rd == 1.0, || format!("m={m}: RD {rd}"))?;
        previous = h;
        if m.is_power_of_two() {
            line.push(format!("{m}:{h:.3}"));
        }
    }

    for seed in 0..100u64 {
        let m = 2 + (seed % 11) as usize;
        let inst = random(9, m, 3, 40_000 + seed);
        let ranks = rankings(&inst.profile);
        let n = ranks.len() as f64;
        let hm: f64 = (1..=m).map(|j| 1.0 / j as f64).sum();
        let h = harmonic_lottery(&inst.profile).unwrap();
        for c in 0..m {
            let rd = ranks.iter().filter(|r| r[0] == c).count() as f64 / n;
            ensure(h.get(c) >= rd / (2.0 * hm) - 1e-12, || format!("seed {seed}: candidate {c}"))?;
        }
    }
    Ok(format!("good-candidate mass {}", line.join(" ")))
}

fn main() -> ExitCode {
    type Check = (u32, &'static str, fn() -> Outcome, Duration);
    let minutes = |m: u64| Duration::from_secs(60 * m);
    let checks: [Check; 14] = [
        (1, "favorite utility floor", c1_favorite_floor, Duration::from_secs(5)),
        (2, "UProj welfare guarantee", c2_uproj_welfare, Duration::from_secs(30)),
        (3, "UProj on basis candidates", c3_uproj_basis, Duration::from_secs(1)),
        (4, "plurality worst case", c4_plurality_worst, Duration::from_secs(1)),
        (5, "random dictatorship worst case", c5_rd_worst, Duration::from_secs(1)),
        (6, "stable lottery certificate", c6_stable_certificate, minutes(1)),
        (7, "LSLR distortion bound", c7_lslr_bound, minutes(10)),
        (8, "PSLR distortion bound", c8_pslr_bound, minutes(1)),
        (9, "instance-optimal rules vs grid oracle", c9_optimal_vs_grid, minutes(5)),
        (10, "two-voter symmetric fixture", c10_symmetric_fixture, Duration::from_secs(1)),
        (11, "randomized lower bound instance", c11_randomized_lower_bound, minutes(1)),
        (12, "clone invariance", c12_clone_invariance, minutes(2)),
        (13, "optimal rules dominate on the bench grid", c13_dominance, minutes(30)),
        (14, "harmonic vs random dictatorship", c14_harmonic_vs_rd, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    for (id, name, run, budget) in checks {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if took <= budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {took:.1?}, budget {budget:?}"))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} ({took:.2?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {why} ({took:.2?})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance check(s) failed");
        ExitCode::FAILURE
    }
}
