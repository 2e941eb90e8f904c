//! Experiment grid: every rule on every generated instance, with instance and
//! empirical distortion per row.

use std::str::FromStr;
use std::sync::mpsc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distortion::{
    build_feasible_region, empirical_distortion, instance_distortion_lottery, optimal_deterministic_in,
    optimal_randomized_in, FeasibleRegion, DEFAULT_EPSILON,
};
use crate::error::{Error, Result};
use crate::instances::{generate, Family, GeneratorSpec};
use crate::model::{Instance, Lottery};
use crate::{projection, rules, stable};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "LINCHOICE_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Plurality,
    Mcp,
    Rd,
    Harmonic,
    Uniform,
    Uproj,
    Lslr,
    Pslr,
    OptimalDet,
    OptimalRand,
}

impl Rule {
    pub const ALL: [Rule; 10] = [
        Rule::Plurality,
        Rule::Mcp,
        Rule::Rd,
        Rule::Harmonic,
        Rule::Uniform,
        Rule::Uproj,
        Rule::Lslr,
        Rule::Pslr,
        Rule::OptimalDet,
        Rule::OptimalRand,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Plurality => "plurality",
            Rule::Mcp => "mcp",
            Rule::Rd => "rd",
            Rule::Harmonic => "harmonic",
            Rule::Uniform => "uniform",
            Rule::Uproj => "uproj",
            Rule::Lslr => "lslr",
            Rule::Pslr => "pslr",
            Rule::OptimalDet => "optimal-det",
            Rule::OptimalRand => "optimal-rand",
        }
    }

    /// Rules that always return a single candidate.
    pub fn is_deterministic(self) -> bool {
        matches!(self, Rule::Plurality | Rule::Mcp | Rule::OptimalDet)
    }

    /// Comma-separated names, or `all`.
    pub fn parse_list(s: &str) -> Result<Vec<Rule>> {
        if s.trim() == "all" {
            return Ok(Rule::ALL.to_vec());
        }
        s.split(',').map(|r| r.trim().parse()).collect()
    }

    /// The rule's output on `instance`, plus the instance-distortion report
    /// when the rule computes one itself.
    pub fn apply(
        self,
        instance: &Instance,
        region: &FeasibleRegion,
    ) -> Result<(Lottery, Option<crate::distortion::DistortionReport>)> {
        let m = instance.candidates.len();
        let d = instance.candidates.dim();
        let profile = &instance.profile;
        let lottery = match self {
            Rule::Plurality => Lottery::point_mass(m, rules::plurality(profile)?),
            Rule::Mcp => Lottery::point_mass(m, rules::max_coordinate_plurality(profile, &instance.candidates)?),
            Rule::Rd => rules::random_dictatorship(profile)?,
            Rule::Harmonic => rules::harmonic_lottery(profile)?,
            Rule::Uniform => rules::uniform_lottery(m),
            Rule::Uproj => projection::uproj_default(&instance.candidates)?.lottery,
            Rule::Lslr => stable::linear_stable_lottery_rule(profile, &instance.candidates)?,
            Rule::Pslr => stable::pure_stable_lottery_rule(profile, d)?,
            Rule::OptimalDet => {
                let (c, report) = optimal_deterministic_in(region, DEFAULT_EPSILON)?;
                return Ok((Lottery::point_mass(m, c), Some(report)));
            }
            Rule::OptimalRand => {
                let (p, report) = optimal_randomized_in(region, DEFAULT_EPSILON)?;
                return Ok((p, Some(report)));
            }
        };
        Ok((lottery, None))
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown rule {s:?}")))
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    N,
    M,
    D,
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(Param::N),
            "m" => Ok(Param::M),
            "d" => Ok(Param::D),
            other => Err(Error::InvalidArgument(format!("cannot vary {other:?}; use n, m or d"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub family: Family,
    pub vary: Param,
    pub values: Vec<usize>,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub trials: usize,
    pub rules: Vec<Rule>,
    pub seed: u64,
    pub timeout: Duration,
    /// Record wall time; turn off for byte-reproducible output.
    pub timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            family: Family::Random,
            vary: Param::D,
            values: vec![2, 4, 6, 8, 10],
            n: 100,
            m: 25,
            d: 4,
            trials: 20,
            rules: Rule::ALL.to_vec(),
            seed: 0,
            timeout: Duration::from_secs(120),
            timing: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance_id: usize,
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub seed: u64,
    pub rule: Rule,
    pub instance_distortion: f64,
    pub empirical_distortion: f64,
    pub runtime_ms: f64,
    /// `ok`, `timeout`, or `error: …`.
    pub status: String,
}

/// The instances of a grid, in `instance_id` order.
pub fn grid_specs(config: &BenchConfig) -> Vec<GeneratorSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut specs = Vec::new();
    for &value in &config.values {
        for _ in 0..config.trials {
            let (mut n, mut m, mut d) = (config.n, config.m, config.d);
            match config.vary {
                Param::N => n = value,
                Param::M => m = value,
                Param::D => d = value,
            }
            specs.push(GeneratorSpec::new(config.family, n, m, d, rng.random()));
        }
    }
    specs
}

/// Runs one rule on one instance, giving up after `timeout`. A timed-out
/// computation is left to finish on its own thread.
fn run_with_timeout(
    rule: Rule,
    instance: Arc<Instance>,
    region: Arc<FeasibleRegion>,
    timeout: Duration,
) -> std::result::Result<Result<(f64, f64)>, ()> {
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let _ = tx.send(evaluate(rule, &instance, &region));
    });
    rx.recv_timeout(timeout).map_err(|_| ())
}

/// `(instance distortion, empirical distortion)` of `rule`'s output.
pub fn evaluate(rule: Rule, instance: &Instance, region: &FeasibleRegion) -> Result<(f64, f64)> {
    let (lottery, report) = rule.apply(instance, region)?;
    let report = match report {
        Some(r) => r,
        None => instance_distortion_lottery(&lottery, region, DEFAULT_EPSILON)?,
    };
    let empirical = match instance.utilities_or_derived() {
        Some(u) => empirical_distortion(&lottery, &u)?,
        None => f64::NAN,
    };
    Ok((report.value, empirical))
}

fn run_instance(id: usize, spec: &GeneratorSpec, config: &BenchConfig) -> Vec<BenchRow> {
    let row = |rule: Rule, inst: f64, emp: f64, ms: f64, status: String| BenchRow {
        instance_id: id,
        family: spec.family,
        n: spec.n,
        m: spec.m,
        d: spec.d,
        seed: spec.seed,
        rule,
        instance_distortion: inst,
        empirical_distortion: emp,
        runtime_ms: if config.timing { ms } else { 0.0 },
        status,
    };
    let prepared = generate(spec).and_then(|inst| {
        let region = build_feasible_region(&inst.profile, &inst.candidates, false)?;
        Ok((Arc::new(inst), Arc::new(region)))
    });
    let (instance, region) = match prepared {
        Ok(p) => p,
        Err(e) => {
            return config
                .rules
                .iter()
                .map(|&r| row(r, f64::NAN, f64::NAN, 0.0, format!("error: {e}")))
                .collect()
        }
    };
    config
        .rules
        .iter()
        .map(|&rule| {
            let start = Instant::now();
            let outcome = run_with_timeout(rule, instance.clone(), region.clone(), config.timeout);
            let ms = start.elapsed().as_secs_f64() * 1e3;
            match outcome {
                Ok(Ok((inst, emp))) => row(rule, inst, emp, ms, "ok".into()),
                Ok(Err(e)) => row(rule, f64::NAN, f64::NAN, ms, format!("error: {e}")),
                Err(()) => row(rule, f64::NAN, f64::NAN, ms, "timeout".into()),
            }
        })
        .collect()
}

/// Worker count from `LINCHOICE_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&t| t > 0)
}

/// Every (instance, rule) row of the grid, ordered by instance then by the
/// order of `config.rules`.
pub fn run_grid(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    let specs = grid_specs(config);
    #[cfg(feature = "parallel")]
    let per_instance: Vec<Vec<BenchRow>> = {
        use rayon::prelude::*;
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads_from_env() {
            builder = builder.num_threads(t);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| {
            specs
                .par_iter()
                .enumerate()
                .map(|(id, s)| run_instance(id, s, config))
                .collect()
        })
    };
    #[cfg(not(feature = "parallel"))]
    let per_instance: Vec<Vec<BenchRow>> =
        specs.iter().enumerate().map(|(id, s)| run_instance(id, s, config)).collect();
    Ok(per_instance.into_iter().flatten().collect())
}

pub fn write_csv<W: std::io::Write>(writer: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
