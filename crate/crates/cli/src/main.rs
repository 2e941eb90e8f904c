//! `linchoice` command-line tool.
//!
//! Every command reads flat files (see the library's `io` module), writes JSON
//! or CSV to stdout, and exits with 0 on success, 1 on a domain error and 2 on
//! usage or I/O problems.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use linchoice::bench::{self, BenchConfig, Param, Rule};
use linchoice::distortion::{
    self, build_feasible_region, instance_distortion_candidate, instance_distortion_lottery, optimal_deterministic_in,
    optimal_randomized_in, DEFAULT_EPSILON,
};
use linchoice::instances::{generate, ingest_ratings, Family, GeneratorSpec};
use linchoice::model::{self, validate_candidates, validate_rows, ValidationReport};
use linchoice::stable::{self, StableConfig};
use linchoice::{io as lio, projection, rules};
use linchoice::{CandidateSet, Error, Instance, Lottery, Profile, UtilityProfile};

#[derive(Parser)]
#[command(name = "linchoice", version, about = "Voting rules and distortion for linear social choice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check input files and report every problem found.
    Validate(Inputs),
    /// Run a deterministic rule.
    Elect(ElectArgs),
    /// Compute a randomized rule's lottery.
    Lottery(LotteryArgs),
    /// Instance distortion of a candidate, lottery or rule.
    Distortion(DistortionArgs),
    /// Instance-optimal candidate or lottery.
    Optimal(OptimalArgs),
    /// Distortion under known utilities.
    Empirical(EmpiricalArgs),
    /// Generate a synthetic or adversarial instance.
    Gen(GenArgs),
    /// Build an instance from a partially observed ratings matrix.
    Ingest(IngestArgs),
    /// Run an experiment grid and write one CSV row per instance and rule.
    Bench(BenchArgs),
}

/// Input files. `--instance DIR` fills in whichever of the standard file names
/// exist in DIR; explicit flags take precedence.
#[derive(Args, Clone, Default)]
struct Inputs {
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long)]
    candidates: Option<PathBuf>,
    #[arg(long)]
    voters: Option<PathBuf>,
    #[arg(long)]
    utilities: Option<PathBuf>,
    /// Rescale candidate rows to sum to 1 instead of rejecting them.
    #[arg(long)]
    renormalize: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ElectRule {
    Plurality,
    Mcp,
}

#[derive(Args)]
struct ElectArgs {
    #[arg(long, value_enum)]
    rule: ElectRule,
    #[command(flatten)]
    inputs: Inputs,
}

#[derive(Clone, Copy, ValueEnum)]
enum LotteryRule {
    Rd,
    Harmonic,
    Uniform,
    Uproj,
    Lslr,
    Pslr,
}

#[derive(Args)]
struct LotteryArgs {
    #[arg(long, value_enum)]
    rule: LotteryRule,
    /// Committee size for lslr / pslr instead of ⌈√d⌉ / 2d.
    #[arg(long)]
    k_override: Option<usize>,
    /// Frank-Wolfe gap tolerance for uproj.
    #[arg(long, default_value_t = projection::DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Seed for sampling. Every rule offered here is computed exactly, so the
    /// value only matters for reproducibility records.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Embedding dimension for pslr when no candidates file is given.
    #[arg(long)]
    d: Option<usize>,
    #[command(flatten)]
    inputs: Inputs,
}

/// What to evaluate: exactly one of these.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct Target {
    /// A single candidate index.
    #[arg(long)]
    candidate: Option<usize>,
    /// A JSON lottery: an array of probabilities, `{"probabilities": […]}`, or
    /// any object with a `lottery` field holding one of those.
    #[arg(long)]
    lottery: Option<PathBuf>,
    /// Any bench rule name.
    #[arg(long)]
    rule: Option<String>,
}

#[derive(Args)]
struct DistortionArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Also require each voter's average to lie in the candidates' convex hull.
    #[arg(long)]
    include_hull: bool,
    #[command(flatten)]
    inputs: Inputs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Det,
    Rand,
}

#[derive(Args)]
struct OptimalArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long)]
    include_hull: bool,
    #[command(flatten)]
    inputs: Inputs,
}

#[derive(Args)]
struct EmpiricalArgs {
    #[command(flatten)]
    target: Target,
    #[command(flatten)]
    inputs: Inputs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    m: usize,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dirichlet concentration for random embeddings.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Perturbation size in the rd-worst family.
    #[arg(long, default_value_t = 1e-4)]
    epsilon_tiebreak: f64,
    /// Group holding the welfare optimum in randomized-lb.
    #[arg(long, default_value_t = 0)]
    k_star: usize,
    /// Candidate duplicated by clone-test.
    #[arg(long, default_value_t = 0)]
    clone_candidate: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    /// CSV with a header row; empty cells are unobserved.
    #[arg(long)]
    ratings: PathBuf,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the instance here; otherwise only the report is printed.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "random")]
    family: String,
    #[arg(long, default_value = "d")]
    vary: String,
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 4, 6, 8, 10])]
    values: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 25)]
    m: usize,
    #[arg(long, default_value_t = 4)]
    d: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value = "all")]
    rules: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per rule and instance, in seconds.
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
    /// Write 0 for runtimes so reruns produce identical files.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Lib(Error::Io(e))
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate(a) => cmd_validate(&a),
        Command::Elect(a) => cmd_elect(&a),
        Command::Lottery(a) => cmd_lottery(&a),
        Command::Distortion(a) => cmd_distortion(&a),
        Command::Optimal(a) => cmd_optimal(&a),
        Command::Empirical(a) => cmd_empirical(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Ingest(a) => cmd_ingest(&a),
        Command::Bench(a) => cmd_bench(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        // A closed stdout (e.g. piped into `head`) is not an error.
        Err(CliError::Lib(Error::Io(e))) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(CliError::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_domain() { 1 } else { 2 })
        }
    }
}

fn print_json(value: &impl serde::Serialize) -> CliResult<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(Error::from)?;
    writeln!(out)?;
    Ok(())
}

impl Inputs {
    fn path(&self, explicit: &Option<PathBuf>, name: &str) -> Option<PathBuf> {
        explicit
            .clone()
            .or_else(|| self.instance.as_ref().map(|d| d.join(name)).filter(|p| p.exists()))
    }

    fn candidates_path(&self) -> Option<PathBuf> {
        self.path(&self.candidates, "candidates.csv")
    }

    fn candidates(&self) -> CliResult<Option<CandidateSet>> {
        match self.candidates_path() {
            Some(p) => Ok(Some(lio::read_candidates(&p, self.renormalize)?)),
            None => Ok(None),
        }
    }

    fn require_candidates(&self, why: &str) -> CliResult<CandidateSet> {
        self.candidates()?
            .ok_or_else(|| usage(format!("{why} needs --candidates (or --instance)")))
    }

    fn profile(&self, num_candidates: Option<usize>) -> CliResult<Option<Profile>> {
        match self.path(&self.profile, "profile.jsonl") {
            Some(p) => Ok(Some(lio::read_profile(&p, num_candidates)?)),
            None => Ok(None),
        }
    }

    fn require_profile(&self, num_candidates: Option<usize>) -> CliResult<Profile> {
        self.profile(num_candidates)?
            .ok_or_else(|| usage("--profile (or --instance) is required"))
    }

    /// Utilities from `utilities.csv`, else derived from voter and candidate
    /// embeddings.
    fn utilities(&self, candidates: Option<&CandidateSet>) -> CliResult<Option<UtilityProfile>> {
        if let Some(p) = self.path(&self.utilities, "utilities.csv") {
            return Ok(Some(lio::read_utilities(&p)?));
        }
        match (self.path(&self.voters, "voters.csv"), candidates) {
            (Some(v), Some(c)) => Ok(Some(UtilityProfile::from_embeddings(&lio::read_voters(&v)?, c)?)),
            _ => Ok(None),
        }
    }
}

fn report_json(report: &ValidationReport) -> Value {
    json!({
        "ok": report.is_ok(),
        "violations": report.violations.iter().map(ToString::to_string).collect::<Vec<_>>(),
    })
}

fn cmd_validate(inputs: &Inputs) -> CliResult<ExitCode> {
    let mut out = serde_json::Map::new();
    let mut ok = true;
    let mut m = None;
    if let Some(p) = inputs.candidates_path() {
        let rows = lio::read_vectors(&p)?;
        m = Some(rows.len());
        let r = validate_candidates(&rows);
        ok &= r.is_ok();
        out.insert("candidates".into(), report_json(&r));
    }
    if let Some(p) = inputs.path(&inputs.voters, "voters.csv") {
        let r = validate_rows(&lio::read_vectors(&p)?);
        ok &= r.is_ok();
        out.insert("voters".into(), report_json(&r));
    }
    if let Some(p) = inputs.path(&inputs.profile, "profile.jsonl") {
        let entry = match lio::read_profile(&p, m) {
            Ok(profile) => json!({
                "ok": true,
                "voters": profile.num_voters(),
                "candidates": profile.num_candidates(),
            }),
            Err(e) if e.is_domain() => {
                ok = false;
                json!({ "ok": false, "violations": [e.to_string()] })
            }
            Err(e) => return Err(e.into()),
        };
        out.insert("profile".into(), entry);
    }
    if let Some(p) = inputs.path(&inputs.utilities, "utilities.csv") {
        let entry = match lio::read_utilities(&p) {
            Ok(u) => json!({ "ok": true, "voters": u.num_voters(), "candidates": u.num_candidates() }),
            Err(e) if e.is_domain() => {
                ok = false;
                json!({ "ok": false, "violations": [e.to_string()] })
            }
            Err(e) => return Err(e.into()),
        };
        out.insert("utilities".into(), entry);
    }
    if out.is_empty() {
        return Err(usage("nothing to validate; pass --instance or individual files"));
    }
    // Cross-file consistency only makes sense once every file parsed.
    if ok && out.contains_key("candidates") && out.contains_key("profile") {
        let instance = load_instance(inputs)?;
        let entry = match instance.check_consistency() {
            Ok(()) => json!({ "ok": true }),
            Err(e) => {
                ok = false;
                json!({ "ok": false, "violations": [e.to_string()] })
            }
        };
        out.insert("consistency".into(), entry);
    }
    out.insert("ok".into(), ok.into());
    print_json(&Value::Object(out))?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn load_instance(inputs: &Inputs) -> CliResult<Instance> {
    let candidates = inputs.require_candidates("this command")?;
    let profile = inputs.require_profile(Some(candidates.len()))?;
    let voters = match inputs.path(&inputs.voters, "voters.csv") {
        Some(p) => Some(lio::read_voters(&p)?),
        None => None,
    };
    let utilities = match inputs.path(&inputs.utilities, "utilities.csv") {
        Some(p) => Some(lio::read_utilities(&p)?),
        None => None,
    };
    Ok(Instance {
        candidates,
        voters,
        profile,
        utilities,
        seed: None,
    })
}

fn cmd_elect(a: &ElectArgs) -> CliResult<ExitCode> {
    let candidates = match a.rule {
        ElectRule::Mcp => Some(a.inputs.require_candidates("--rule mcp")?),
        ElectRule::Plurality => a.inputs.candidates()?,
    };
    let profile = a.inputs.require_profile(candidates.as_ref().map(CandidateSet::len))?;
    let winner = match (a.rule, &candidates) {
        (ElectRule::Mcp, Some(c)) => rules::max_coordinate_plurality(&profile, c)?,
        _ => rules::plurality(&profile)?,
    };
    let label = candidates.as_ref().and_then(|c| c.label(winner));
    print_json(&json!({ "winner": winner, "label": label }))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_lottery(a: &LotteryArgs) -> CliResult<ExitCode> {
    let candidates = a.inputs.candidates()?;
    let m = candidates.as_ref().map(CandidateSet::len);
    let config = StableConfig::default();
    let lottery = match a.rule {
        LotteryRule::Uproj => {
            let c = a.inputs.require_candidates("--rule uproj")?;
            let r = projection::uproj(&c, a.tolerance, projection::DEFAULT_MAX_ITERATIONS)?;
            print_json(&r)?;
            return Ok(ExitCode::SUCCESS);
        }
        LotteryRule::Uniform => match (m, a.inputs.profile(m)?) {
            (Some(m), _) => rules::uniform_lottery(m),
            (None, Some(p)) => rules::uniform_lottery(p.num_candidates()),
            (None, None) => return Err(usage("--rule uniform needs --profile or --candidates")),
        },
        LotteryRule::Rd => rules::random_dictatorship(&a.inputs.require_profile(m)?)?,
        LotteryRule::Harmonic => rules::harmonic_lottery(&a.inputs.require_profile(m)?)?,
        LotteryRule::Lslr => {
            let c = a.inputs.require_candidates("--rule lslr")?;
            let p = a.inputs.require_profile(Some(c.len()))?;
            stable::linear_stable_lottery_rule_with(&p, &c, a.k_override, &config)?
        }
        LotteryRule::Pslr => {
            let d = match (a.d, &candidates) {
                (Some(d), _) => d,
                (None, Some(c)) => c.dim(),
                (None, None) => return Err(usage("--rule pslr needs --d or --candidates")),
            };
            let p = a.inputs.require_profile(m)?;
            stable::pure_stable_lottery_rule_with(&p, d, a.k_override, &config)?
        }
    };
    print_json(&lottery)?;
    Ok(ExitCode::SUCCESS)
}

fn read_lottery(path: &Path) -> CliResult<Lottery> {
    let text = fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text).map_err(Error::from)?;
    fn weights(v: &Value) -> Option<Vec<f64>> {
        match v {
            Value::Array(xs) => xs.iter().map(Value::as_f64).collect(),
            Value::Object(o) => o
                .get("probabilities")
                .or_else(|| o.get("lottery"))
                .and_then(weights),
            _ => None,
        }
    }
    let w = weights(&value).ok_or_else(|| {
        CliError::Lib(Error::Parse {
            line: 1,
            message: format!("{} does not hold a lottery", path.display()),
        })
    })?;
    Ok(Lottery::new(w)?)
}

/// The lottery a [`Target`] names, for an instance whose candidates are known.
fn target_lottery(target: &Target, instance: &Instance) -> CliResult<Lottery> {
    let m = instance.candidates.len();
    if let Some(c) = target.candidate {
        if c >= m {
            return Err(Error::IndexOutOfRange { index: c, len: m }.into());
        }
        return Ok(Lottery::point_mass(m, c));
    }
    if let Some(p) = &target.lottery {
        let l = read_lottery(p)?;
        if l.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: l.len() }.into());
        }
        return Ok(l);
    }
    let name = target.rule.as_deref().expect("clap enforces one target");
    let rule: Rule = name.parse()?;
    let region = build_feasible_region(&instance.profile, &instance.candidates, false)?;
    Ok(rule.apply(instance, &region)?.0)
}

fn check_epsilon(epsilon: f64) -> CliResult<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--epsilon must lie in (0, 1), got {epsilon}")))
    }
}

fn cmd_distortion(a: &DistortionArgs) -> CliResult<ExitCode> {
    check_epsilon(a.epsilon)?;
    let instance = load_instance(&a.inputs)?;
    let region = build_feasible_region(&instance.profile, &instance.candidates, a.include_hull)?;
    let report = match a.target.candidate {
        Some(c) => instance_distortion_candidate(c, &region, a.epsilon)?,
        None => instance_distortion_lottery(&target_lottery(&a.target, &instance)?, &region, a.epsilon)?,
    };
    print_json(&report)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_optimal(a: &OptimalArgs) -> CliResult<ExitCode> {
    check_epsilon(a.epsilon)?;
    let candidates = a.inputs.require_candidates("optimal")?;
    let profile = a.inputs.require_profile(Some(candidates.len()))?;
    let region = build_feasible_region(&profile, &candidates, a.include_hull)?;
    match a.mode {
        Mode::Det => {
            let (c, report) = optimal_deterministic_in(&region, a.epsilon)?;
            print_json(&json!({ "candidate": c, "label": candidates.label(c), "report": report }))?;
        }
        Mode::Rand => {
            let (lottery, report) = optimal_randomized_in(&region, a.epsilon)?;
            print_json(&json!({ "lottery": lottery, "report": report }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_empirical(a: &EmpiricalArgs) -> CliResult<ExitCode> {
    let candidates = a.inputs.candidates()?;
    let utilities = a
        .inputs
        .utilities(candidates.as_ref())?
        .ok_or_else(|| usage("empirical needs --utilities, or --voters with --candidates"))?;
    let m = utilities.num_candidates();
    let lottery = match (&a.target, &candidates) {
        (Target { candidate: Some(c), .. }, _) => {
            if *c >= m {
                return Err(Error::IndexOutOfRange { index: *c, len: m }.into());
            }
            Lottery::point_mass(m, *c)
        }
        (Target { lottery: Some(p), .. }, _) => read_lottery(p)?,
        (_, Some(c)) => {
            // Rules only see the ordinal profile; derive it when none is given.
            let profile = match a.inputs.profile(Some(c.len()))? {
                Some(p) => p,
                None => model::utilities_to_profile(&utilities),
            };
            let instance = Instance {
                candidates: c.clone(),
                voters: None,
                profile,
                utilities: Some(utilities.clone()),
                seed: None,
            };
            target_lottery(&a.target, &instance)?
        }
        (_, None) => return Err(usage("--rule needs --candidates (or --instance)")),
    };
    let value = distortion::empirical_distortion(&lottery, &utilities)?;
    let welfares = utilities.welfares();
    let expected = model::expected_welfare(&utilities, &lottery)?;
    let mut out = json!({
        "value": if value.is_infinite() { json!("inf") } else { json!(value) },
        "optimal_welfare": welfares.iter().copied().fold(0.0, f64::max),
        "expected_welfare": expected,
        "lottery": lottery,
    });
    if value.is_infinite() {
        out["note"] = json!("the lottery's expected welfare is zero, so the ratio is unbounded");
    }
    print_json(&out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(a: &GenArgs) -> CliResult<ExitCode> {
    let family: Family = a.family.parse()?;
    let mut spec = GeneratorSpec::new(family, a.n, a.m, a.d, a.seed);
    spec.dirichlet_alpha = a.alpha;
    spec.epsilon_tiebreak = a.epsilon_tiebreak;
    spec.k_star = a.k_star;
    spec.clone_candidate = a.clone_candidate;
    let instance = generate(&spec)?;
    let meta = json!({
        "generator": spec,
        "n": instance.profile.num_voters(),
        "m": instance.candidates.len(),
        "d": instance.candidates.dim(),
    });
    lio::write_instance(&a.out, &instance, &meta)?;
    print_json(&meta)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_ingest(a: &IngestArgs) -> CliResult<ExitCode> {
    let ratings = lio::read_ratings(&a.ratings)?;
    let (instance, report) = ingest_ratings(&ratings, a.d, a.iterations, a.seed)?;
    let out = json!({
        "n": instance.profile.num_voters(),
        "m": instance.candidates.len(),
        "d": instance.candidates.dim(),
        "iterations": a.iterations,
        "seed": a.seed,
        "final_error": report.errors.last(),
        "expressive_voters": report.expressive_voters,
    });
    if let Some(dir) = &a.out {
        let mut meta = out.clone();
        meta["errors"] = json!(report.errors);
        lio::write_instance(dir, &instance, &meta)?;
    }
    print_json(&out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(a: &BenchArgs) -> CliResult<ExitCode> {
    if !(a.timeout > 0.0 && a.timeout.is_finite()) {
        return Err(usage("--timeout must be a positive number of seconds"));
    }
    let vary: Param = a.vary.parse().map_err(|e: Error| usage(e.to_string()))?;
    let config = BenchConfig {
        family: a.family.parse().map_err(|e: Error| usage(e.to_string()))?,
        vary,
        values: a.values.clone(),
        n: a.n,
        m: a.m,
        d: a.d,
        trials: a.trials,
        rules: Rule::parse_list(&a.rules).map_err(|e| usage(e.to_string()))?,
        seed: a.seed,
        timeout: Duration::from_secs_f64(a.timeout),
        timing: !a.no_timing,
    };
    let rows = bench::run_grid(&config)?;
    match &a.out {
        Some(path) => bench::write_csv(fs::File::create(path)?, &rows)?,
        None => bench::write_csv(io::stdout().lock(), &rows)?,
    }
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    if failed > 0 {
        eprintln!("{failed} of {} rows did not finish cleanly; see the status column", rows.len());
    }
    Ok(ExitCode::SUCCESS)
}
