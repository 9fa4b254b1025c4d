//! Information estimates, Wald-type and likelihood-ratio confidence intervals, confidence
//! region membership and profile-likelihood intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimation::{conditional_mle, loglik_at, FitResult, Interval, PseudoSample};
use crate::families::{clayton_loglik_hessian, FamilyId};
use crate::matrix::Matrix;
use crate::model::{Copula, ModelKind, ParamVector};
use crate::optim::brent_root;
use crate::sampling::{sample_copula, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    ExpectedInfo,
    ScoreOuter,
    ObservedInfo,
    LikelihoodRatio,
    Profile,
}

impl CiMethod {
    pub fn name(self) -> &'static str {
        match self {
            CiMethod::ExpectedInfo => "expected_info",
            CiMethod::ScoreOuter => "score_outer",
            CiMethod::ObservedInfo => "observed_info",
            CiMethod::LikelihoodRatio => "likelihood_ratio",
            CiMethod::Profile => "profile",
        }
    }
}

impl std::str::FromStr for CiMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "expected_info" | "expected" => Ok(CiMethod::ExpectedInfo),
            "score_outer" | "score" => Ok(CiMethod::ScoreOuter),
            "observed_info" | "observed" => Ok(CiMethod::ObservedInfo),
            "likelihood_ratio" | "lr" => Ok(CiMethod::LikelihoodRatio),
            "profile" => Ok(CiMethod::Profile),
            other => Err(Error::Parse(format!("unknown interval method '{other}'"))),
        }
    }
}

/// A confidence interval (one coordinate, or every coordinate for p = 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiResult {
    pub method: CiMethod,
    pub level: f64,
    pub estimate: ParamVector,
    pub lower: ParamVector,
    pub upper: ParamVector,
    pub contains_estimate: bool,
    /// The lower end is the edge of the parameter domain, not a crossing of the cut.
    pub censored_lower: bool,
    pub censored_upper: bool,
}

impl CiResult {
    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter().zip(&self.lower).zip(&self.upper).all(|((x, l), u)| l <= x && x <= u)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper[0] - self.lower[0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoKind {
    ExpectedMc,
    ScoreOuter,
    Observed,
}

/// Per-observation Fisher information estimate (p x p).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoEstimate {
    pub kind: InfoKind,
    pub value: Vec<Vec<f64>>,
    /// Standard error of each entry (Monte Carlo and sample-average estimates).
    pub se: Option<Vec<Vec<f64>>>,
    pub mc_size: Option<usize>,
    pub positive_definite: bool,
}

fn positive_definite(m: &[Vec<f64>]) -> bool {
    match m.len() {
        1 => m[0][0] > 0.0,
        2 => m[0][0] > 0.0 && m[0][0] * m[1][1] - m[0][1] * m[1][0] > 0.0,
        _ => false,
    }
}

/// Mean and standard error of the outer products s s^T.
fn outer_mean(scores: &[ParamVector], kind: InfoKind, mc_size: Option<usize>) -> Result<InfoEstimate> {
    let n = scores.len();
    if n == 0 {
        return Err(Error::Domain("no scores to average".into()));
    }
    let p = scores[0].len();
    let mut value = vec![vec![0.0; p]; p];
    let mut sq = vec![vec![0.0; p]; p];
    for s in scores {
        for i in 0..p {
            for j in 0..p {
                let v = s[i] * s[j];
                value[i][j] += v;
                sq[i][j] += v * v;
            }
        }
    }
    let nf = n as f64;
    let mut se = vec![vec![f64::INFINITY; p]; p];
    for i in 0..p {
        for j in 0..p {
            value[i][j] /= nf;
            if n > 1 {
                let var = (sq[i][j] / nf - value[i][j] * value[i][j]).max(0.0) * nf / (nf - 1.0);
                se[i][j] = (var / nf).sqrt();
            }
        }
    }
    if value.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("information estimate".into()));
    }
    let positive_definite = positive_definite(&value);
    Ok(InfoEstimate { kind, value, se: Some(se), mc_size, positive_definite })
}

/// (1/m) sum s(U_k) s(U_k)^T over m fresh d-dimensional draws from the fitted copula.
pub fn info_expected_mc(copula: &Copula, d: usize, m: usize, rng: &mut RandomStream) -> Result<InfoEstimate> {
    if m == 0 {
        return Err(Error::Domain("Monte Carlo size m must be >= 1".into()));
    }
    let u = sample_copula(copula, m, d, rng)?;
    outer_mean(&copula.scores(&u)?, InfoKind::ExpectedMc, Some(m))
}

/// (1/n) sum_i s(u_i) s(u_i)^T on the observed pseudo-sample.
pub fn info_score_outer(copula: &Copula, u: &PseudoSample) -> Result<InfoEstimate> {
    outer_mean(&copula.scores(u.matrix())?, InfoKind::ScoreOuter, None)
}

/// -(1/n) sum_i d^2/dtheta^2 log c(u_i); analytic for Clayton only.
pub fn info_observed(copula: &Copula, u: &PseudoSample) -> Result<InfoEstimate> {
    let Copula::Archimedean { family: FamilyId::Clayton, theta } = *copula else {
        return Err(Error::Unsupported(format!("observed information is only available for clayton, not {}", copula.kind())));
    };
    let neg: Vec<f64> = u.rows().map(|r| clayton_loglik_hessian(theta, r).map(|v| -v)).collect::<Result<_>>()?;
    let n = neg.len() as f64;
    let mean = neg.iter().sum::<f64>() / n;
    if !mean.is_finite() {
        return Err(Error::NonFinite("observed information".into()));
    }
    let var = if neg.len() > 1 { neg.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { f64::INFINITY };
    Ok(InfoEstimate {
        kind: InfoKind::Observed,
        value: vec![vec![mean]],
        se: Some(vec![vec![(var / n).sqrt()]]),
        mc_size: None,
        positive_definite: mean > 0.0,
    })
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("confidence level {level} must be in (0,1)")))
    }
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Chi-square quantile with `df` degrees of freedom; exact forms for df = 1 and 2.
pub fn chi_square_quantile(level: f64, df: usize) -> f64 {
    match df {
        1 => normal_quantile(0.5 + 0.5 * level).powi(2),
        2 => -2.0 * (-level).ln_1p(),
        _ => ChiSquared::new(df as f64).expect("df >= 1").inverse_cdf(level),
    }
}

/// theta_hat -+ z_{(1+level)/2} / sqrt(n I).
pub fn ci_information(theta_hat: f64, info: &InfoEstimate, n: usize, level: f64) -> Result<CiResult> {
    check_level(level)?;
    if info.value.len() != 1 {
        return Err(Error::Unsupported("information intervals are built for one-parameter families".into()));
    }
    let i = info.value[0][0];
    if !(i > 0.0 && i.is_finite()) || n == 0 {
        return Err(Error::Domain(format!("information {i} must be positive and finite")));
    }
    let half = normal_quantile(0.5 + 0.5 * level) / (n as f64 * i).sqrt();
    let method = match info.kind {
        InfoKind::ExpectedMc => CiMethod::ExpectedInfo,
        InfoKind::ScoreOuter => CiMethod::ScoreOuter,
        InfoKind::Observed => CiMethod::ObservedInfo,
    };
    Ok(CiResult {
        method,
        level,
        estimate: vec![theta_hat],
        lower: vec![theta_hat - half],
        upper: vec![theta_hat + half],
        contains_estimate: true,
        censored_lower: false,
        censored_upper: false,
    })
}

/// Finds where `f` (decreasing away from `x0` in the direction of `dir`) crosses `cut`:
/// geometric steps of factor 1.6 from `step`, then Brent to `xtol`. Returns (endpoint, censored).
fn crossing<F: FnMut(f64) -> f64>(mut f: F, x0: f64, dir: f64, step: f64, cut: f64, edge: f64, xtol: f64) -> Result<(f64, bool)> {
    let mut inner = x0;
    let mut delta = step;
    for _ in 0..200 {
        let mut x = x0 + dir * delta;
        let mut at_edge = false;
        if (x - edge) * dir >= 0.0 {
            x = edge;
            at_edge = true;
        }
        let v = f(x);
        if !(v >= cut) {
            // crossed (or -inf, which counts as outside the region)
            let root = brent_root(|y| f(y).max(cut - 1e6) - cut, inner, x, xtol, 200)?;
            return Ok((root, false));
        }
        if at_edge {
            return Ok((edge, true));
        }
        inner = x;
        delta *= 1.6;
    }
    Ok((x0 + dir * delta / 1.6, true))
}

/// Open-domain edges are approached to within this relative distance.
const EDGE_GAP: f64 = 1e-9;

fn family_edges(family: FamilyId) -> (f64, f64) {
    let dom = family.domain();
    let lo = if dom.lower_open { dom.lower + EDGE_GAP } else { dom.lower };
    let hi = if dom.upper.is_finite() { dom.upper - EDGE_GAP } else { 1e6 };
    (lo, hi)
}

/// {theta : l(theta) >= l(theta_hat) - q_{chi2_1}(level)/2} for a one-parameter fit.
pub fn ci_likelihood_ratio(u: &PseudoSample, fit: &FitResult, level: f64) -> Result<CiResult> {
    check_level(level)?;
    let ModelKind::Family(family) = fit.model else {
        return Err(Error::Unsupported("use profile_ci for two-parameter families".into()));
    };
    let th = fit.params[0];
    let cut = fit.loglik - 0.5 * chi_square_quantile(level, 1);
    let (lo_edge, hi_edge) = family_edges(family);
    let f = |x: f64| loglik_at(fit.model, u, &[x]);
    let step = 0.01 * th.abs().max(0.1);
    let (lower, cl) = if th <= lo_edge { (th, true) } else { crossing(f, th, -1.0, step.min(0.5 * (th - lo_edge)), cut, lo_edge, 1e-8)? };
    let (upper, cu) = if th >= hi_edge { (th, true) } else { crossing(f, th, 1.0, step.min(0.5 * (hi_edge - th)), cut, hi_edge, 1e-8)? };
    Ok(CiResult {
        method: CiMethod::LikelihoodRatio,
        level,
        estimate: vec![th],
        lower: vec![lower],
        upper: vec![upper],
        contains_estimate: lower <= th && th <= upper,
        censored_lower: cl,
        censored_upper: cu,
    })
}

/// True iff l(theta_test) >= l(theta_hat) - q_{chi2_p}(level)/2.
pub fn region_membership(u: &PseudoSample, fit: &FitResult, theta_test: &[f64], level: f64) -> Result<bool> {
    check_level(level)?;
    let p = fit.model.n_params();
    let l = loglik_at(fit.model, u, theta_test);
    Ok(l >= fit.loglik - 0.5 * chi_square_quantile(level, p))
}

/// True iff n (theta - theta_hat)^T I (theta - theta_hat) <= q_{chi2_p}(level).
pub fn region_membership_information(theta_hat: &[f64], info: &InfoEstimate, n: usize, theta_test: &[f64], level: f64) -> Result<bool> {
    check_level(level)?;
    let p = theta_hat.len();
    let dx: Vec<f64> = (0..p).map(|i| theta_test[i] - theta_hat[i]).collect();
    let mut q = 0.0;
    for i in 0..p {
        for j in 0..p {
            q += dx[i] * info.value[i][j] * dx[j];
        }
    }
    Ok(n as f64 * q <= chi_square_quantile(level, p))
}

/// Parameter-domain search range for coordinate `k` of a two-parameter family, widened
/// from the fit's initial box.
fn coordinate_range(kind: ModelKind, fit: &FitResult, k: usize) -> (f64, f64) {
    let (lo, hi) = (fit.initial_lower[k], fit.initial_upper[k]);
    let w = (hi - lo).max(1e-3);
    let dom_lo = match (kind, k) {
        (ModelKind::OpClayton, 1) => 1.0,
        (ModelKind::Gig, 0) => 0.0,
        _ => EDGE_GAP,
    };
    ((lo - w).max(dom_lo).min(fit.params[k]), (hi + 2.0 * w).max(fit.params[k]))
}

/// Profile log-likelihood l_p(x) = sup over the other coordinate with coordinate `which` = x.
pub fn profile_loglik(u: &PseudoSample, fit: &FitResult, which: usize, x: f64) -> f64 {
    let other = 1 - which;
    let (lo, hi) = coordinate_range(fit.model, fit, other);
    match Interval::new(lo, hi) {
        Ok(r) => conditional_mle(fit.model, u, which, x, r).1,
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Profile-likelihood interval for coordinate `which` of a two-parameter fit: the set where
/// the profile stays within q_{chi2_1}(level)/2 of the maximum.
pub fn profile_ci(u: &PseudoSample, fit: &FitResult, which: usize, level: f64) -> Result<CiResult> {
    check_level(level)?;
    if fit.model.n_params() != 2 || which > 1 {
        return Err(Error::Unsupported(format!("profile intervals need a two-parameter fit and coordinate 0 or 1, got {} / {which}", fit.model)));
    }
    let est = fit.params[which];
    // the cut is taken from the better of the full fit and the profile at the estimate
    let top = fit.loglik.max(profile_loglik(u, fit, which, est));
    let cut = top - 0.5 * chi_square_quantile(level, 1);
    let (lo_edge, _) = coordinate_range(fit.model, fit, which);
    let lo_edge = lo_edge.min(match (fit.model, which) {
        (ModelKind::OpClayton, 1) => 1.0,
        (ModelKind::Gig, 0) => 0.0,
        _ => EDGE_GAP,
    });
    let hi_edge = 1e6;
    let f = |x: f64| profile_loglik(u, fit, which, x);
    let step = 0.05 * est.abs().max(0.05);
    let (lower, cl) = if est <= lo_edge { (est, true) } else { crossing(f, est, -1.0, step.min(0.5 * (est - lo_edge)), cut, lo_edge, 1e-6)? };
    let (upper, cu) = crossing(f, est, 1.0, step, cut, hi_edge, 1e-6)?;
    let mut lo_v = fit.params.clone();
    let mut hi_v = fit.params.clone();
    lo_v[which] = lower;
    hi_v[which] = upper;
    Ok(CiResult {
        method: CiMethod::Profile,
        level,
        estimate: fit.params.clone(),
        lower: lo_v,
        upper: hi_v,
        contains_estimate: lower <= est && est <= upper,
        censored_lower: cl,
        censored_upper: cu,
    })
}

/// Scores at the fitted parameters, one row per observation.
pub fn fitted_scores(fit: &FitResult, u: &Matrix) -> Result<Vec<ParamVector>> {
    fit.copula()?.scores(u)
}
