use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::FamilyId;
use crate::model::{Copula, ModelKind, ParamVector};
use crate::optim::{brent_minimize, nelder_mead_box, SimplexOptions};

use super::{log_likelihood, InitialBox, Interval, PseudoSample};

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub params: ParamVector,
    pub loglik: f64,
    /// Objective evaluations spent.
    pub iterations: usize,
    pub initial_lower: ParamVector,
    pub initial_upper: ParamVector,
    pub converged: bool,
    /// Some coordinate of the optimum sits on the edge of the search region.
    pub on_boundary: bool,
}

impl FitResult {
    pub fn copula(&self) -> Result<Copula> {
        self.model.with_params(&self.params)
    }
}

/// Log-likelihood at parameter values, -inf when the values are inadmissible or any row fails.
pub fn loglik_at(kind: ModelKind, u: &PseudoSample, p: &[f64]) -> f64 {
    match kind.with_params(p) {
        Ok(c) => log_likelihood(&c, u).map_or(f64::NEG_INFINITY, |l| l.value),
        Err(_) => f64::NEG_INFINITY,
    }
}

fn near(x: f64, edge: f64, width: f64) -> bool {
    (x - edge).abs() <= 1e-6 * width.max(1e-12)
}

/// Bounded scalar maximization of the log-likelihood over `interval`
/// (Brent, tolerance 1e-8 in theta, at most 200 evaluations).
pub fn mle_1p(family: FamilyId, u: &PseudoSample, interval: Interval) -> Result<FitResult> {
    let kind = ModelKind::Family(family);
    let dom = family.domain();
    if !dom.contains(interval.lower) || !dom.contains(interval.upper) {
        return Err(Error::Domain(format!(
            "interval [{}, {}] leaves the {family} parameter domain",
            interval.lower, interval.upper
        )));
    }
    let m = brent_minimize(|th| -loglik_at(kind, u, &[th]), interval.lower, interval.upper, 1e-8, 200);
    let (mut theta, mut ll) = (m.x, -m.fx);
    let mid = interval.midpoint();
    let ll_mid = loglik_at(kind, u, &[mid]);
    if ll_mid > ll {
        theta = mid;
        ll = ll_mid;
    }
    if !ll.is_finite() {
        return Err(Error::Optimizer(format!("{family} log-likelihood is -inf across [{}, {}]", interval.lower, interval.upper)));
    }
    let w = interval.upper - interval.lower;
    Ok(FitResult {
        model: kind,
        params: vec![theta],
        loglik: ll,
        iterations: m.evaluations + 1,
        initial_lower: vec![interval.lower],
        initial_upper: vec![interval.upper],
        converged: m.converged,
        on_boundary: near(theta, interval.lower, w) || near(theta, interval.upper, w),
    })
}

/// Box-constrained simplex maximization for a two-parameter family. Starts from three
/// corners and the center, then restarts once from the best point; keeps the best result.
pub fn mle_2p(kind: ModelKind, u: &PseudoSample, bx: &InitialBox) -> Result<FitResult> {
    if kind.n_params() != 2 {
        return Err(Error::Unsupported(format!("mle_2p needs a two-parameter family, got {kind}")));
    }
    let (lo, hi) = (&bx.lower, &bx.upper);
    if lo.len() != 2 || hi.len() != 2 || lo[0] >= hi[0] || lo[1] >= hi[1] {
        return Err(Error::Domain(format!("invalid box {lo:?} .. {hi:?}")));
    }
    let opts = SimplexOptions { xtol: 1e-6, ftol: 1e-8, max_eval: 1000 };
    let f = |p: &[f64]| -loglik_at(kind, u, p);
    let starts = [vec![lo[0], hi[1]], vec![hi[0], lo[1]], vec![lo[0], lo[1]], bx.center()];
    let mut evals = 0;
    let mut best: Option<crate::optim::SimplexResult> = None;
    for s in &starts {
        let r = nelder_mead_box(f, s, lo, hi, opts);
        evals += r.evaluations;
        if best.as_ref().is_none_or(|b| r.fx < b.fx) {
            best = Some(r);
        }
    }
    let first = best.expect("at least one start");
    let again = nelder_mead_box(f, &first.x, lo, hi, opts);
    evals += again.evaluations;
    let r = if again.fx <= first.fx { again } else { first };
    if !r.fx.is_finite() {
        return Err(Error::Optimizer(format!("{kind} log-likelihood is -inf across the box")));
    }
    let on_boundary = (0..2).any(|i| near(r.x[i], lo[i], hi[i] - lo[i]) || near(r.x[i], hi[i], hi[i] - lo[i]));
    Ok(FitResult {
        model: kind,
        params: r.x,
        loglik: -r.fx,
        iterations: evals,
        initial_lower: lo.clone(),
        initial_upper: hi.clone(),
        converged: r.converged,
        on_boundary,
    })
}

/// Maximizes over coordinate `1 - fixed` with coordinate `fixed` held at `value`, searching
/// `range` for the free coordinate. Returns (free coordinate, log-likelihood).
pub fn conditional_mle(kind: ModelKind, u: &PseudoSample, fixed: usize, value: f64, range: Interval) -> (f64, f64) {
    let point = |x: f64| if fixed == 0 { [value, x] } else { [x, value] };
    let m = brent_minimize(|x| -loglik_at(kind, u, &point(x)), range.lower, range.upper, 1e-8, 200);
    (m.x, -m.fx)
}
