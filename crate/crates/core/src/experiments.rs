//! Simulation studies: estimator RMSE against n d, confidence-interval coverage, and
//! two-parameter bias/RMSE. Replications run in parallel, each on its own random stream
//! derived from (seed, cell index, replication index), so results do not depend on the
//! worker count.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{
    initial_box_gig, initial_box_opc, initial_interval_1p, mle_1p, mle_2p, pseudo_observations, tau_hat, FitResult,
    IntervalPolicy, PseudoSample,
};
use crate::families::{tau_inverse, FamilyId};
use crate::inference::{ci_information, ci_likelihood_ratio, info_expected_mc, info_observed, info_score_outer, CiMethod};
use crate::io::format_f64;
use crate::model::{ModelKind, ParamVector};
use crate::sampling::{sample_copula, RandomStream};

/// Version of the summary JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

/// A cell fails when more than this fraction of its replications fail.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    RmseScaling,
    Coverage,
    TwoParam,
}

/// Whether fits see the simulated copula sample itself (known margins) or its
/// pseudo-observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Margins {
    Known,
    Pseudo,
}

fn default_seed() -> u64 {
    1
}

fn default_workers() -> usize {
    1
}

/// Declarative description of a simulation study (read from TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub families: Vec<ModelKind>,
    pub taus: Vec<f64>,
    pub ns: Vec<usize>,
    pub ds: Vec<usize>,
    pub replications: usize,
    /// Confidence levels (coverage only).
    #[serde(default)]
    pub levels: Vec<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Half-width in tau of the one-parameter initial interval.
    pub h: Option<f64>,
    pub h_minus: Option<f64>,
    pub h_plus: Option<f64>,
    pub epsilon: Option<f64>,
    /// Monte Carlo size of the expected-information estimate (coverage only).
    pub mc_size: Option<usize>,
    pub margins: Option<Margins>,
    /// Interval methods evaluated in coverage runs.
    pub methods: Option<Vec<CiMethod>>,
    /// True parameters per tau value (two-parameter runs), same order as `taus`.
    pub true_params: Option<Vec<Vec<f64>>>,
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.families.is_empty() || self.taus.is_empty() || self.ns.is_empty() || self.ds.is_empty() {
            return bad("families, taus, ns and ds must all be non-empty".into());
        }
        if self.replications == 0 {
            return bad("replications must be >= 1".into());
        }
        if self.workers == 0 || self.workers > 1024 {
            return bad(format!("workers = {} must be in 1..=1024", self.workers));
        }
        if let Some(t) = self.taus.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return bad(format!("tau = {t} must be in (0,1)"));
        }
        if let Some(n) = self.ns.iter().find(|n| **n < 2 || **n > 10_000_000) {
            return bad(format!("n = {n} must be in 2..=10^7"));
        }
        if let Some(d) = self.ds.iter().find(|d| **d < 2 || **d > 1000) {
            return bad(format!("d = {d} must be in 2..=1000"));
        }
        if self.replications > 1_000_000 {
            return bad("replications must be <= 10^6".into());
        }
        for (name, v) in [("h", self.h), ("h_minus", self.h_minus), ("h_plus", self.h_plus)] {
            if let Some(x) = v {
                if !(0.0..=1.0).contains(&x) {
                    return bad(format!("{name} = {x} must be in [0,1]"));
                }
            }
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e < 0.5) {
                return bad(format!("epsilon = {e} must be in (0, 1/2)"));
            }
        }
        if self.mc_size == Some(0) {
            return bad("mc_size must be >= 1".into());
        }
        let two = self.kind == ExperimentKind::TwoParam;
        if let Some(f) = self.families.iter().find(|f| (f.n_params() == 2) != two) {
            return bad(format!("family {f} does not fit a {:?} experiment", self.kind));
        }
        match self.kind {
            ExperimentKind::Coverage => {
                if self.levels.is_empty() {
                    return bad("coverage runs need at least one level".into());
                }
                if let Some(l) = self.levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
                    return bad(format!("level = {l} must be in (0,1)"));
                }
                if let Some(m) = self.methods.iter().flatten().find(|m| **m == CiMethod::Profile) {
                    return bad(format!("method {} applies to two-parameter families only", m.name()));
                }
            }
            _ => {
                if !self.levels.is_empty() || self.methods.is_some() {
                    return bad("levels and methods apply to coverage runs only".into());
                }
            }
        }
        if let Some(tp) = &self.true_params {
            if !two || tp.len() != self.taus.len() || tp.iter().any(|p| p.len() != 2) {
                return bad("true_params needs one (p1, p2) pair per tau in a two_param run".into());
            }
        }
        Ok(())
    }

    fn interval_h(&self) -> f64 {
        self.h.unwrap_or(match self.kind {
            ExperimentKind::Coverage => 0.1,
            _ => 0.25,
        })
    }

    fn margins(&self) -> Margins {
        self.margins.unwrap_or(Margins::Known)
    }

    fn methods(&self) -> Vec<CiMethod> {
        self.methods.clone().unwrap_or_else(|| {
            vec![CiMethod::ExpectedInfo, CiMethod::ScoreOuter, CiMethod::ObservedInfo, CiMethod::LikelihoodRatio]
        })
    }

    /// (h_minus, h_plus, epsilon) for a two-parameter family.
    fn box_settings(&self, kind: ModelKind) -> (f64, f64, f64) {
        let (hm, hp) = match kind {
            ModelKind::OpClayton => (0.4, 0.0),
            _ => (0.15, 0.15),
        };
        (self.h_minus.unwrap_or(hm), self.h_plus.unwrap_or(hp), self.epsilon.unwrap_or(0.005))
    }
}

/// Reference parameter points of the two-parameter studies, keyed by tau.
fn reference_params(kind: ModelKind, tau: f64) -> Option<ParamVector> {
    let table: &[(f64, [f64; 2])] = match kind {
        ModelKind::OpClayton => &[(0.25, [1.0 / 3.0, 8.0 / 7.0]), (0.5, [1.0, 4.0 / 3.0]), (0.75, [2.0, 2.0])],
        ModelKind::Gig => &[(0.25, [0.1, 0.8333]), (0.5, [0.05, 0.0968]), (0.75, [0.01, 0.0012])],
        ModelKind::Family(_) => &[],
    };
    table.iter().find(|(t, _)| (t - tau).abs() < 1e-12).map(|(_, p)| p.to_vec())
}

/// One (family, tau, n, d) combination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub index: usize,
    pub family: ModelKind,
    pub tau: f64,
    pub n: usize,
    pub d: usize,
    pub theta_true: ParamVector,
}

/// Expands the grid; AMH cells with tau >= 1/3 are dropped with a notice.
pub fn plan_cells(cfg: &ExperimentConfig) -> Result<(Vec<Cell>, Vec<String>)> {
    cfg.validate()?;
    let mut cells = Vec::new();
    let mut notices = Vec::new();
    for &family in &cfg.families {
        for (ti, &tau) in cfg.taus.iter().enumerate() {
            let theta_true = match family {
                ModelKind::Family(f) => {
                    if f == FamilyId::Amh && tau >= 1.0 / 3.0 {
                        notices.push(format!("dropped amh at tau = {tau}: amh attains tau only in [0, 1/3)"));
                        continue;
                    }
                    vec![tau_inverse(f, tau).map_err(|e| Error::Config(e.to_string()))?]
                }
                _ => match cfg.true_params.as_ref().map(|tp| tp[ti].clone()).or_else(|| reference_params(family, tau)) {
                    Some(p) => p,
                    None => {
                        return Err(Error::Config(format!(
                            "no reference parameters for {family} at tau = {tau}; give true_params"
                        )))
                    }
                },
            };
            family.with_params(&theta_true).map_err(|e| Error::Config(e.to_string()))?;
            for &n in &cfg.ns {
                for &d in &cfg.ds {
                    cells.push(Cell { index: cells.len(), family, tau, n, d, theta_true: theta_true.clone() });
                }
            }
        }
    }
    Ok((cells, notices))
}

/// One replication of one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub cell: usize,
    pub family: ModelKind,
    pub tau: f64,
    pub n: usize,
    pub d: usize,
    pub rep: usize,
    pub theta_true: ParamVector,
    /// Empty when the replication failed.
    pub theta_hat: ParamVector,
    pub seconds: f64,
    /// Interval hits keyed by "method_level".
    pub hits: BTreeMap<String, bool>,
    pub error: Option<String>,
}

/// Stream id of replication `rep` in cell `cell`.
pub fn stream_id(cell: usize, rep: usize) -> u64 {
    ((cell as u64) << 32) | rep as u64
}

fn hit_label(method: CiMethod, level: f64) -> String {
    format!("{}_{}", method.name(), format_f64(level))
}

fn prepare(cell: &Cell, margins: Margins, rng: &mut RandomStream) -> Result<PseudoSample> {
    let c = cell.family.with_params(&cell.theta_true)?;
    let u = sample_copula(&c, cell.n, cell.d, rng)?;
    match margins {
        Margins::Known => PseudoSample::from_uniforms(u),
        Margins::Pseudo => pseudo_observations(&u),
    }
}

fn fit_one_param(cfg: &ExperimentConfig, family: FamilyId, u: &PseudoSample) -> Result<FitResult> {
    let iv = initial_interval_1p(family, tau_hat(u), cfg.interval_h(), IntervalPolicy::Clamp)?;
    mle_1p(family, u, iv)
}

fn fit_two_param(cfg: &ExperimentConfig, kind: ModelKind, u: &PseudoSample) -> Result<FitResult> {
    let (hm, hp, eps) = cfg.box_settings(kind);
    let t = tau_hat(u);
    let bx = match kind {
        ModelKind::OpClayton => initial_box_opc(t, hm, hp, eps)?,
        _ => initial_box_gig(t, hm, hp, eps)?,
    };
    mle_2p(kind, u, &bx)
}

fn coverage_hits(
    cfg: &ExperimentConfig,
    cell: &Cell,
    u: &PseudoSample,
    fit: &FitResult,
    rng: &mut RandomStream,
) -> Result<BTreeMap<String, bool>> {
    let c = fit.copula()?;
    let th = fit.params[0];
    let truth = cell.theta_true[0];
    let mut hits = BTreeMap::new();
    for m in cfg.methods() {
        let info = match m {
            CiMethod::ExpectedInfo => Some(info_expected_mc(&c, cell.d, cfg.mc_size.unwrap_or(10_000), rng)?),
            CiMethod::ScoreOuter => Some(info_score_outer(&c, u)?),
            CiMethod::ObservedInfo => {
                if cell.family != ModelKind::Family(FamilyId::Clayton) {
                    continue;
                }
                Some(info_observed(&c, u)?)
            }
            _ => None,
        };
        for &level in &cfg.levels {
            let ci = match &info {
                Some(i) => ci_information(th, i, u.n(), level)?,
                None => ci_likelihood_ratio(u, fit, level)?,
            };
            hits.insert(hit_label(m, level), ci.contains(&[truth]));
        }
    }
    Ok(hits)
}

fn run_replication(cfg: &ExperimentConfig, cell: &Cell, rep: usize) -> ExperimentRecord {
    let mut rng = RandomStream::new(cfg.seed, stream_id(cell.index, rep));
    let start = Instant::now();
    let outcome = (|| -> Result<(ParamVector, BTreeMap<String, bool>)> {
        let u = prepare(cell, cfg.margins(), &mut rng)?;
        match (cfg.kind, cell.family) {
            (ExperimentKind::TwoParam, kind) => Ok((fit_two_param(cfg, kind, &u)?.params, BTreeMap::new())),
            (ExperimentKind::RmseScaling, ModelKind::Family(f)) => Ok((fit_one_param(cfg, f, &u)?.params, BTreeMap::new())),
            (ExperimentKind::Coverage, ModelKind::Family(f)) => {
                let fit = fit_one_param(cfg, f, &u)?;
                let hits = coverage_hits(cfg, cell, &u, &fit, &mut rng)?;
                Ok((fit.params, hits))
            }
            (_, kind) => Err(Error::Config(format!("{kind} does not fit a {:?} run", cfg.kind))),
        }
    })();
    let seconds = start.elapsed().as_secs_f64();
    let (theta_hat, hits, error) = match outcome {
        Ok((p, h)) => (p, h, None),
        Err(e) => (Vec::new(), BTreeMap::new(), Some(e.to_string())),
    };
    ExperimentRecord {
        cell: cell.index,
        family: cell.family,
        tau: cell.tau,
        n: cell.n,
        d: cell.d,
        rep,
        theta_true: cell.theta_true.clone(),
        theta_hat,
        seconds,
        hits,
        error,
    }
}

/// Per-cell summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub family: ModelKind,
    pub tau: f64,
    pub n: usize,
    pub d: usize,
    pub theta_true: ParamVector,
    pub replications: usize,
    pub failures: usize,
    /// More than 5% of replications failed.
    pub failed: bool,
    pub bias: ParamVector,
    pub rmse: ParamVector,
    /// Empirical coverage per "method_level".
    pub coverage: BTreeMap<String, f64>,
}

/// Least-squares line log RMSE = intercept + slope log(n d) over the cells of one
/// (family, tau) group, first coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub family: ModelKind,
    pub tau: f64,
    pub slope: f64,
    pub intercept: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    pub seed: u64,
    pub replications: usize,
    pub cells: Vec<CellSummary>,
    pub scaling: Vec<ScalingFit>,
    pub notices: Vec<String>,
}

/// Mean wall-clock seconds per fit, per cell. Kept apart from the summary because it is
/// not reproducible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingSummary {
    pub schema_version: u32,
    pub cells: Vec<CellTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellTiming {
    pub family: ModelKind,
    pub tau: f64,
    pub n: usize,
    pub d: usize,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<ExperimentRecord>,
    pub summary: ExperimentSummary,
    pub timing: TimingSummary,
}

fn summarize_cell(cell: &Cell, recs: &[ExperimentRecord]) -> CellSummary {
    let ok: Vec<&ExperimentRecord> = recs.iter().filter(|r| r.error.is_none()).collect();
    let p = cell.theta_true.len();
    let m = ok.len() as f64;
    let mut bias = vec![f64::NAN; p];
    let mut rmse = vec![f64::NAN; p];
    if !ok.is_empty() {
        for k in 0..p {
            let errs: Vec<f64> = ok.iter().map(|r| r.theta_hat[k] - cell.theta_true[k]).collect();
            bias[k] = errs.iter().sum::<f64>() / m;
            rmse[k] = (errs.iter().map(|e| e * e).sum::<f64>() / m).sqrt();
        }
    }
    let mut coverage = BTreeMap::new();
    for r in &ok {
        for (k, &h) in &r.hits {
            *coverage.entry(k.clone()).or_insert(0.0) += if h { 1.0 } else { 0.0 };
        }
    }
    coverage.values_mut().for_each(|v| *v /= m);
    let failures = recs.len() - ok.len();
    CellSummary {
        family: cell.family,
        tau: cell.tau,
        n: cell.n,
        d: cell.d,
        theta_true: cell.theta_true.clone(),
        replications: recs.len(),
        failures,
        failed: failures as f64 > MAX_FAILURE_FRACTION * recs.len() as f64,
        bias,
        rmse,
        coverage,
    }
}

/// (log(n d), log RMSE) points of one (family, tau) group.
type ScalingGroup = (ModelKind, f64, Vec<(f64, f64)>);

fn scaling_fits(cells: &[CellSummary]) -> Vec<ScalingFit> {
    let mut groups: Vec<ScalingGroup> = Vec::new();
    for c in cells.iter().filter(|c| !c.failed && c.rmse[0] > 0.0) {
        let pt = (((c.n * c.d) as f64).ln(), c.rmse[0].ln());
        match groups.iter_mut().find(|(f, t, _)| *f == c.family && *t == c.tau) {
            Some(g) => g.2.push(pt),
            None => groups.push((c.family, c.tau, vec![pt])),
        }
    }
    groups
        .into_iter()
        .filter(|g| g.2.len() >= 2)
        .map(|(family, tau, pts)| {
            let k = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let slope = sxy / sxx;
            ScalingFit { family, tau, slope, intercept: my - slope * mx, cells: pts.len() }
        })
        .collect()
}

/// Runs every replication of every cell on a pool of `cfg.workers` threads.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let (cells, notices) = plan_cells(cfg)?;
    let jobs: Vec<(usize, usize)> =
        cells.iter().flat_map(|c| (0..cfg.replications).map(move |r| (c.index, r))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let records: Vec<ExperimentRecord> =
        pool.install(|| jobs.par_iter().map(|&(c, r)| run_replication(cfg, &cells[c], r)).collect());
    let mut summaries = Vec::with_capacity(cells.len());
    let mut timing = Vec::with_capacity(cells.len());
    for (cell, recs) in cells.iter().zip(records.chunks(cfg.replications)) {
        summaries.push(summarize_cell(cell, recs));
        timing.push(CellTiming {
            family: cell.family,
            tau: cell.tau,
            n: cell.n,
            d: cell.d,
            mean_seconds: recs.iter().map(|r| r.seconds).sum::<f64>() / recs.len() as f64,
        });
    }
    let scaling = if cfg.kind == ExperimentKind::RmseScaling { scaling_fits(&summaries) } else { Vec::new() };
    Ok(ExperimentOutput {
        records,
        summary: ExperimentSummary {
            schema_version: SCHEMA_VERSION,
            kind: cfg.kind,
            seed: cfg.seed,
            replications: cfg.replications,
            cells: summaries,
            scaling,
            notices,
        },
        timing: TimingSummary { schema_version: SCHEMA_VERSION, cells: timing },
    })
}

fn expect_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.kind == kind {
        Ok(())
    } else {
        Err(Error::Config(format!("expected a {kind:?} configuration, got {:?}", cfg.kind)))
    }
}

/// RMSE of the one-parameter MLE per cell plus the log RMSE vs log(n d) slope.
pub fn run_rmse_scaling(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    expect_kind(cfg, ExperimentKind::RmseScaling)?;
    run(cfg)
}

/// Empirical coverage of each interval method per cell and level.
pub fn run_coverage(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    expect_kind(cfg, ExperimentKind::Coverage)?;
    run(cfg)
}

/// Bias and RMSE per coordinate for the two-parameter families.
pub fn run_two_param(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    expect_kind(cfg, ExperimentKind::TwoParam)?;
    run(cfg)
}

fn fmt_or_empty(v: Option<&f64>) -> String {
    v.map(|x| format_f64(*x)).unwrap_or_default()
}

/// Records as CSV: family,tau,n,d,rep,theta_true_1..,theta_hat_1..,seconds,hit_*,error.
pub fn write_records<W: Write>(w: W, records: &[ExperimentRecord]) -> Result<()> {
    let p = records.iter().map(|r| r.theta_true.len()).max().unwrap_or(1);
    let mut labels: Vec<&String> = records.iter().flat_map(|r| r.hits.keys()).collect();
    labels.sort();
    labels.dedup();
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["family".to_string(), "tau".into(), "n".into(), "d".into(), "rep".into()];
    header.extend((1..=p).map(|k| format!("theta_true_{k}")));
    header.extend((1..=p).map(|k| format!("theta_hat_{k}")));
    header.push("seconds".into());
    header.extend(labels.iter().map(|l| format!("hit_{l}")));
    header.push("error".into());
    let io = |e: csv::Error| Error::Io(e.to_string());
    wtr.write_record(&header).map_err(io)?;
    for r in records {
        let mut row = vec![r.family.to_string(), format_f64(r.tau), r.n.to_string(), r.d.to_string(), r.rep.to_string()];
        row.extend((0..p).map(|k| fmt_or_empty(r.theta_true.get(k))));
        row.extend((0..p).map(|k| fmt_or_empty(r.theta_hat.get(k))));
        row.push(format_f64(r.seconds));
        row.extend(labels.iter().map(|l| r.hits.get(*l).map(|h| (*h as u8).to_string()).unwrap_or_default()));
        row.push(r.error.clone().unwrap_or_default());
        wtr.write_record(&row).map_err(io)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Summary JSON text; identical configurations give identical bytes.
pub fn summary_json(s: &ExperimentSummary) -> Result<String> {
    serde_json::to_string_pretty(s).map_err(|e| Error::Io(e.to_string()))
}

/// Writes records.csv, summary.json and timing.json into `dir`.
pub fn write_outputs(dir: &Path, out: &ExperimentOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_records(std::fs::File::create(dir.join("records.csv"))?, &out.records)?;
    std::fs::write(dir.join("summary.json"), summary_json(&out.summary)? + "\n")?;
    let timing = serde_json::to_string_pretty(&out.timing).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join("timing.json"), timing + "\n")?;
    Ok(())
}
