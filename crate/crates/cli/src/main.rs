//! `archicop`: sampling, fitting, intervals, dependence measures, generator derivatives
//! and simulation studies for Archimedean copulas.
//!
//! Machine-readable results (CSV or JSON) go to stdout or files; diagnostics go to stderr.
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use archicop::estimation::{
    gumbel_diag_mle, initial_box_gig, initial_box_opc, initial_interval_1p, log_likelihood, mle_1p, mle_2p,
    pseudo_observations, tau_hat, FitResult, IntervalPolicy, PseudoSample,
};
use archicop::experiments::{run, write_outputs, ExperimentConfig};
use archicop::families::{mc_gen_deriv, tau_inverse, FamilyId};
use archicop::inference::{
    ci_information, ci_likelihood_ratio, info_expected_mc, info_observed, info_score_outer, profile_ci,
    region_membership, CiMethod, CiResult,
};
use archicop::io::{read_matrix, write_matrix};
use archicop::sampling::{sample_copula, RandomStream};
use archicop::{Copula, Error, ModelKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Version of every JSON document printed by this tool.
const SCHEMA_VERSION: u32 = 1;

/// Environment variable overriding the default seed.
const SEED_ENV: &str = "ARCHICOP_SEED";

#[derive(Parser)]
#[command(name = "archicop", version, about = "Archimedean copula toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw an n x d sample of copula uniforms as CSV.
    Sample(SampleArgs),
    /// Maximum-likelihood fit of a data matrix.
    Fit(FitArgs),
    /// Fit, then confidence intervals and optional region tests.
    Ci(CiArgs),
    /// Kendall's tau and tail dependence, or the parameter for a given tau.
    Tau(TauArgs),
    /// Generator derivative (-1)^d psi^(d)(t).
    Deriv(DerivArgs),
    /// Run a simulation study from a TOML configuration.
    Exp(ExpArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// amh, clayton, frank, gumbel, joe, opclayton or gig.
    #[arg(long)]
    family: ModelKind,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Outer power (opclayton).
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Bessel order (gig).
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
}

#[derive(Args, Clone)]
struct FamilyArg {
    /// amh, clayton, frank, gumbel, joe, opclayton or gig.
    #[arg(long)]
    family: ModelKind,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Defaults to $ARCHICOP_SEED, else 1.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MarginsArg {
    /// Rank-transform the input to pseudo-observations first.
    Raw,
    /// The input already holds values in (0,1).
    Pseudo,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Estimator {
    Mle,
    /// Closed-form diagonal estimator (gumbel only).
    Diag,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// CSV file, or '-' for stdin.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = MarginsArg::Raw)]
    margins: MarginsArg,
    /// Half-width in tau of the one-parameter initial interval.
    #[arg(long, default_value_t = 0.25)]
    h: f64,
    /// Two-parameter box: lower tau offset (default 0.4 opclayton, 0.15 gig).
    #[arg(long)]
    h_minus: Option<f64>,
    /// Two-parameter box: upper tau offset (default 0 opclayton, 0.15 gig).
    #[arg(long)]
    h_plus: Option<f64>,
    #[arg(long, default_value_t = 0.005)]
    epsilon: f64,
    /// Fail instead of clamping an initial interval that leaves the attainable tau range.
    #[arg(long)]
    strict_interval: bool,
}

#[derive(Args, Clone)]
struct CiOptions {
    /// Interval method; repeatable: expected, score, observed, lr, profile.
    #[arg(long = "ci")]
    ci: Vec<CiMethod>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Monte Carlo size of the expected-information estimate.
    #[arg(long, default_value_t = 10_000)]
    mc_size: usize,
    /// Seed of the Monte Carlo information estimate; defaults to $ARCHICOP_SEED, else 1.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    family: FamilyArg,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value_t = Estimator::Mle)]
    estimator: Estimator,
    #[command(flatten)]
    ci: CiOptions,
}

#[derive(Args)]
struct CiArgs {
    #[command(flatten)]
    family: FamilyArg,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    ci: CiOptions,
    /// Parameter vector to test for membership in the likelihood-ratio region, as
    /// comma-separated values; repeatable.
    #[arg(long = "test", value_delimiter = ';', allow_hyphen_values = true)]
    test: Vec<String>,
}

#[derive(Args)]
struct TauArgs {
    #[arg(long)]
    family: ModelKind,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    /// Return the parameter with this Kendall's tau (one-parameter families).
    #[arg(long, allow_hyphen_values = true)]
    invert: Option<f64>,
}

#[derive(Args)]
struct DerivArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    d: usize,
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    /// Also print a Monte Carlo estimate from m frailty draws (one-parameter families).
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ExpArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory for records.csv, summary.json and timing.json.
    #[arg(long)]
    out: PathBuf,
    /// Override the configured worker count.
    #[arg(long)]
    workers: Option<usize>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::NonFinite(_)
            | Error::RootFind(_)
            | Error::Quadrature(_)
            | Error::Optimizer(_)
            | Error::CrossCheck(_)
            | Error::Sampler(_) => 2,
            _ => 1,
        };
        Failure { code, error }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 1, error: Error::Config(msg.into()) }
}

type CmdResult = Result<(), Failure>;

fn default_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("{SEED_ENV} = '{v}' is not an unsigned integer"))),
        Err(_) => Ok(1),
    }
}

fn model_params(kind: ModelKind, theta: Option<f64>, beta: Option<f64>, nu: Option<f64>) -> Result<Vec<f64>, Failure> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| usage(format!("{kind} needs --{name}")));
    let reject = |v: Option<f64>, name: &str| match v {
        Some(_) => Err(usage(format!("--{name} does not apply to {kind}"))),
        None => Ok(()),
    };
    match kind {
        ModelKind::Family(_) => {
            reject(beta, "beta")?;
            reject(nu, "nu")?;
            Ok(vec![need(theta, "theta")?])
        }
        ModelKind::OpClayton => {
            reject(nu, "nu")?;
            Ok(vec![need(theta, "theta")?, need(beta, "beta")?])
        }
        ModelKind::Gig => {
            reject(beta, "beta")?;
            Ok(vec![need(nu, "nu")?, need(theta, "theta")?])
        }
    }
}

fn build_copula(m: &ModelArgs) -> Result<Copula, Failure> {
    let p = model_params(m.family, m.theta, m.beta, m.nu)?;
    Ok(m.family.with_params(&p)?)
}

fn params_json(kind: ModelKind, p: &[f64]) -> Value {
    let map: serde_json::Map<String, Value> =
        kind.param_names().iter().zip(p).map(|(n, v)| (n.to_string(), json!(v))).collect();
    Value::Object(map)
}

fn print_json(v: &Value) -> CmdResult {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(|e| Failure::from(Error::Io(e.to_string())))?;
    writeln!(out)?;
    Ok(())
}

fn cmd_sample(a: &SampleArgs) -> CmdResult {
    if a.n == 0 || a.d == 0 {
        return Err(usage("--n and --d must be positive"));
    }
    let c = build_copula(&a.model)?;
    let mut rng = RandomStream::new(default_seed(a.seed)?, a.stream);
    let u = sample_copula(&c, a.n, a.d, &mut rng)?;
    match &a.out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            write_matrix(&mut w, &u, "u")?;
            w.flush()?;
        }
        None => write_matrix(io::stdout().lock(), &u, "u")?,
    }
    Ok(())
}

fn load_data(a: &DataArgs) -> Result<PseudoSample, Failure> {
    let parsed = if a.input == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        read_matrix(s.as_bytes())?
    } else {
        read_matrix(File::open(&a.input).map_err(|e| usage(format!("{}: {e}", a.input.display())))?)?
    };
    Ok(match a.margins {
        MarginsArg::Raw => pseudo_observations(&parsed.matrix)?,
        MarginsArg::Pseudo => PseudoSample::from_uniforms(parsed.matrix)?,
    })
}

fn check_options(kind: ModelKind, a: &DataArgs, ci: &CiOptions) -> CmdResult {
    if !(0.0..=1.0).contains(&a.h) {
        return Err(usage(format!("--h = {} must be in [0,1]", a.h)));
    }
    if !(ci.level > 0.0 && ci.level < 1.0) {
        return Err(usage(format!("--level = {} must be in (0,1)", ci.level)));
    }
    if ci.mc_size == 0 {
        return Err(usage("--mc-size must be positive"));
    }
    for m in &ci.ci {
        let ok = match (m, kind.n_params()) {
            (CiMethod::Profile, p) => p == 2,
            (CiMethod::ObservedInfo, _) => kind == ModelKind::Family(FamilyId::Clayton),
            (_, p) => p == 1,
        };
        if !ok {
            return Err(usage(format!("interval method {} does not apply to {kind}", m.name())));
        }
    }
    Ok(())
}

/// Fits `kind`, returning the fit and the tau estimate that located the search region.
fn fit_model(kind: ModelKind, u: &PseudoSample, a: &DataArgs) -> Result<(FitResult, f64), Failure> {
    let t = tau_hat(u);
    let fit = match kind {
        ModelKind::Family(f) => {
            let policy = if a.strict_interval { IntervalPolicy::Error } else { IntervalPolicy::Clamp };
            mle_1p(f, u, initial_interval_1p(f, t, a.h, policy)?)?
        }
        ModelKind::OpClayton => {
            mle_2p(kind, u, &initial_box_opc(t, a.h_minus.unwrap_or(0.4), a.h_plus.unwrap_or(0.0), a.epsilon)?)?
        }
        ModelKind::Gig => {
            mle_2p(kind, u, &initial_box_gig(t, a.h_minus.unwrap_or(0.15), a.h_plus.unwrap_or(0.15), a.epsilon)?)?
        }
    };
    Ok((fit, t))
}

fn intervals(u: &PseudoSample, fit: &FitResult, o: &CiOptions) -> Result<Vec<CiResult>, Failure> {
    let c = fit.copula()?;
    let mut rng = RandomStream::new(default_seed(o.seed)?, 0);
    let mut out = Vec::new();
    for m in &o.ci {
        let info = match m {
            CiMethod::ExpectedInfo => Some(info_expected_mc(&c, u.d(), o.mc_size, &mut rng)?),
            CiMethod::ScoreOuter => Some(info_score_outer(&c, u)?),
            CiMethod::ObservedInfo => Some(info_observed(&c, u)?),
            _ => None,
        };
        match (m, info) {
            (_, Some(i)) => out.push(ci_information(fit.params[0], &i, u.n(), o.level)?),
            (CiMethod::LikelihoodRatio, None) => out.push(ci_likelihood_ratio(u, fit, o.level)?),
            (_, None) => {
                for k in 0..fit.params.len() {
                    out.push(profile_ci(u, fit, k, o.level)?);
                }
            }
        }
    }
    Ok(out)
}

fn fit_json(fit: &FitResult, t: f64, u: &PseudoSample, estimator: &str) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "status": "ok",
        "model": fit.model.name(),
        "estimator": estimator,
        "params": params_json(fit.model, &fit.params),
        "loglik": fit.loglik,
        "n": u.n(),
        "d": u.d(),
        "tau_hat": t,
        "interval": {
            "lower": params_json(fit.model, &fit.initial_lower),
            "upper": params_json(fit.model, &fit.initial_upper),
        },
        "converged": fit.converged,
        "on_boundary": fit.on_boundary,
        "evaluations": fit.iterations,
    })
}

fn cmd_fit(a: &FitArgs) -> CmdResult {
    let kind = a.family.family;
    check_options(kind, &a.data, &a.ci)?;
    if a.estimator == Estimator::Diag && kind != ModelKind::Family(FamilyId::Gumbel) {
        return Err(usage("--estimator diag applies to gumbel only"));
    }
    let u = load_data(&a.data)?;
    let start = Instant::now();
    let (fit, t) = match a.estimator {
        Estimator::Mle => fit_model(kind, &u, &a.data)?,
        Estimator::Diag => {
            let th = gumbel_diag_mle(&u);
            let ll = log_likelihood(&kind.with_params(&[th])?, &u)?.value;
            let fit = FitResult {
                model: kind,
                params: vec![th],
                loglik: ll,
                iterations: 0,
                initial_lower: vec![th],
                initial_upper: vec![th],
                converged: true,
                on_boundary: th == 1.0,
            };
            (fit, tau_hat(&u))
        }
    };
    let cis = intervals(&u, &fit, &a.ci)?;
    let mut v = fit_json(&fit, t, &u, if a.estimator == Estimator::Diag { "diag" } else { "mle" });
    if a.estimator == Estimator::Diag {
        v["interval"] = Value::Null;
    }
    if !cis.is_empty() {
        v["ci"] = serde_json::to_value(&cis).expect("intervals serialize");
    }
    v["seconds"] = json!(start.elapsed().as_secs_f64());
    print_json(&v)
}

fn parse_test_point(s: &str, p: usize) -> Result<Vec<f64>, Failure> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| usage(format!("--test '{s}': '{x}' is not a number"))))
        .collect::<Result<_, _>>()?;
    if v.len() != p {
        return Err(usage(format!("--test '{s}' needs {p} values")));
    }
    Ok(v)
}

fn cmd_ci(a: &CiArgs) -> CmdResult {
    let kind = a.family.family;
    let mut opts = a.ci.clone();
    if opts.ci.is_empty() {
        opts.ci = match kind {
            ModelKind::Family(FamilyId::Clayton) => {
                vec![CiMethod::ExpectedInfo, CiMethod::ScoreOuter, CiMethod::ObservedInfo, CiMethod::LikelihoodRatio]
            }
            ModelKind::Family(_) => vec![CiMethod::ExpectedInfo, CiMethod::ScoreOuter, CiMethod::LikelihoodRatio],
            _ => vec![CiMethod::Profile],
        };
    }
    check_options(kind, &a.data, &opts)?;
    let tests: Vec<Vec<f64>> = a.test.iter().map(|s| parse_test_point(s, kind.n_params())).collect::<Result<_, _>>()?;
    let u = load_data(&a.data)?;
    let start = Instant::now();
    let (fit, t) = fit_model(kind, &u, &a.data)?;
    let cis = intervals(&u, &fit, &opts)?;
    let mut v = fit_json(&fit, t, &u, "mle");
    v["ci"] = serde_json::to_value(&cis).expect("intervals serialize");
    if !tests.is_empty() {
        let mut rows = Vec::new();
        for p in &tests {
            let inside = region_membership(&u, &fit, p, opts.level)?;
            rows.push(json!({ "params": params_json(kind, p), "level": opts.level, "in_region": inside }));
        }
        v["region_tests"] = Value::Array(rows);
    }
    v["seconds"] = json!(start.elapsed().as_secs_f64());
    print_json(&v)
}

fn cmd_tau(a: &TauArgs) -> CmdResult {
    if let Some(target) = a.invert {
        let ModelKind::Family(f) = a.family else {
            return Err(usage(format!("--invert needs a one-parameter family, got {}", a.family)));
        };
        if a.theta.is_some() || a.beta.is_some() || a.nu.is_some() {
            return Err(usage("--invert takes no parameter values"));
        }
        let theta = tau_inverse(f, target)?;
        return print_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "model": a.family.name(),
            "tau": target,
            "params": params_json(a.family, &[theta]),
        }));
    }
    let p = model_params(a.family, a.theta, a.beta, a.nu)?;
    let c = a.family.with_params(&p)?;
    let (lower, upper) = c.tail_dependence()?;
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "model": a.family.name(),
        "params": params_json(a.family, &p),
        "tau": c.tau()?,
        "lambda_lower": lower,
        "lambda_upper": upper,
    }))
}

fn cmd_deriv(a: &DerivArgs) -> CmdResult {
    if !(a.t >= 0.0 && a.t.is_finite()) {
        return Err(usage(format!("--t = {} must be finite and >= 0", a.t)));
    }
    let c = build_copula(&a.model)?;
    let lv = c.log_gen_deriv(a.d, a.t)?;
    let mut v = json!({
        "schema_version": SCHEMA_VERSION,
        "model": c.kind().name(),
        "params": params_json(c.kind(), &c.params()),
        "d": a.d,
        "t": a.t,
        "value": lv.exp(),
        "log_value": lv,
    });
    if let Some(m) = a.mc {
        let Copula::Archimedean { family, theta } = c else {
            return Err(usage("--mc applies to one-parameter families"));
        };
        if m == 0 {
            return Err(usage("--mc must be positive"));
        }
        let mut rng = RandomStream::new(default_seed(a.seed)?, 0);
        let e = mc_gen_deriv(family, theta, a.d, a.t, m, &mut rng)?;
        v["mc"] = json!({ "m": e.m, "value": e.log_value.exp(), "log_value": e.log_value, "se": e.se, "log_se": e.log_se });
    }
    print_json(&v)
}

fn cmd_exp(a: &ExpArgs) -> CmdResult {
    let text = std::fs::read_to_string(&a.config).map_err(|e| usage(format!("{}: {e}", a.config.display())))?;
    let mut cfg = ExperimentConfig::from_toml_str(&text)?;
    if let Some(w) = a.workers {
        cfg.workers = w;
        cfg.validate()?;
    }
    let out = run(&cfg)?;
    for n in &out.summary.notices {
        eprintln!("note: {n}");
    }
    write_outputs(&a.out, &out)?;
    print_json(&serde_json::to_value(&out.summary).expect("summary serializes"))
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::Range(_) => "range",
        Error::DimensionCap { .. } => "dimension_cap",
        Error::NonFinite(_) => "non_finite",
        Error::RootFind(_) => "root_find",
        Error::Quadrature(_) => "quadrature",
        Error::Optimizer(_) => "optimizer",
        Error::CrossCheck(_) => "cross_check",
        Error::Sampler(_) => "sampler",
        Error::Parse(_) => "parse",
        Error::Config(_) => "config",
        Error::Unsupported(_) => "unsupported",
        Error::Io(_) => "io",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Ci(a) => cmd_ci(a),
        Command::Tau(a) => cmd_tau(a),
        Command::Deriv(a) => cmd_deriv(a),
        Command::Exp(a) => cmd_exp(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error);
            if f.code == 2 {
                let diag = json!({
                    "schema_version": SCHEMA_VERSION,
                    "status": "error",
                    "error_kind": error_kind(&f.error),
                    "message": f.error.to_string(),
                });
                let _ = print_json(&diag);
            }
            ExitCode::from(f.code)
        }
    }
}
