use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{gumbel_coeffs, log_density, log_gen_deriv, FamilyId, GumbelPolyCoeffs};
use crate::sampling::{sample_log_gamma, sample_log_stable, RandomStream};
use crate::specfun::{log_gamma_ratio, LogSumExp};

/// Outer-power Clayton parameters: psi(t) = (1 + t^{1/beta})^{-1/theta}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterPowerClaytonParams {
    pub theta: f64,
    pub beta: f64,
}

impl OuterPowerClaytonParams {
    pub fn new(theta: f64, beta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::Domain(format!("outer-power Clayton theta = {theta} must be > 0")));
        }
        if !(beta >= 1.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("outer-power Clayton beta = {beta} must be >= 1")));
        }
        Ok(Self { theta, beta })
    }

    fn is_clayton(&self) -> bool {
        self.beta == 1.0
    }
}

/// log psi(t).
pub fn op_log_psi(p: &OuterPowerClaytonParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("generator argument t = {t} must be >= 0")));
    }
    Ok(-(t.powf(1.0 / p.beta)).ln_1p() / p.theta)
}

/// psi^{-1}(u) = (u^{-theta} - 1)^beta.
pub fn op_psi_inv(p: &OuterPowerClaytonParams, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::Domain(format!("psi_inv argument u = {u} must be in (0,1]")));
    }
    Ok((-p.theta * u.ln()).exp_m1().powf(p.beta))
}

/// log(-(psi^{-1})'(u)).
fn op_log_neg_dpsi_inv(p: &OuterPowerClaytonParams, u: f64) -> f64 {
    let lu = u.ln();
    p.beta.ln() + (p.beta - 1.0) * (-p.theta * lu).exp_m1().ln() + p.theta.ln() - (p.theta + 1.0) * lu
}

/// Clayton log-derivative of order k at x, inlined to skip argument checks in the inner sum.
fn clayton_lgd(theta: f64, k: usize, x: f64) -> Result<f64> {
    let a = 1.0 / theta;
    Ok(log_gamma_ratio(k as f64 + a, a)? - (k as f64 + a) * x.ln_1p())
}

fn composed_lgd(p: &OuterPowerClaytonParams, c: &GumbelPolyCoeffs, t: f64) -> Result<f64> {
    // (-1)^d psi^{(d)}(t) = t^{-d} sum_k a_{dk}(beta) (-1)^k psi_C^{(k)}(x) x^k, x = t^{1/beta}
    let lt = t.ln();
    let lx = lt / p.beta;
    let x = lx.exp();
    let mut acc = LogSumExp::new();
    for (i, a) in c.coeffs.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let k = i + 1;
        acc.push(a.ln() + clayton_lgd(p.theta, k, x)? + k as f64 * lx);
    }
    Ok(acc.value() - c.d as f64 * lt)
}

/// log((-1)^d psi^{(d)}(t)) for the outer-power Clayton generator.
pub fn op_log_gen_deriv(p: &OuterPowerClaytonParams, d: usize, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("derivative argument t = {t} must be positive and finite")));
    }
    if p.is_clayton() || d == 0 {
        return if d == 0 { op_log_psi(p, t) } else { log_gen_deriv(FamilyId::Clayton, p.theta, d, t) };
    }
    let c = gumbel_coeffs(d, p.beta)?;
    finite(composed_lgd(p, &c, t)?)
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("outer-power Clayton evaluation".into()))
    }
}

/// Log-density evaluator for one outer-power Clayton parameter point and dimension.
#[derive(Debug, Clone)]
pub struct OpDensity {
    p: OuterPowerClaytonParams,
    coeffs: Option<GumbelPolyCoeffs>,
    d: usize,
}

impl OpDensity {
    pub fn new(p: OuterPowerClaytonParams, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("density dimension d = {d} must be >= 2")));
        }
        let coeffs = if p.is_clayton() { None } else { Some(gumbel_coeffs(d, p.beta)?) };
        Ok(Self { p, coeffs, d })
    }

    pub fn log_density(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.d {
            return Err(Error::Domain(format!("point has dimension {} but evaluator expects {}", u.len(), self.d)));
        }
        let Some(c) = &self.coeffs else {
            return log_density(FamilyId::Clayton, self.p.theta, u);
        };
        let mut t = 0.0;
        let mut jac = 0.0;
        for &x in u {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::Domain(format!("copula argument {x} is not in the open interval (0,1)")));
            }
            t += op_psi_inv(&self.p, x)?;
            jac += op_log_neg_dpsi_inv(&self.p, x);
        }
        finite(composed_lgd(&self.p, c, t)? + jac)
    }
}

/// Outer-power Clayton log-density; beta = 1 is the Clayton density itself.
pub fn op_log_density(p: &OuterPowerClaytonParams, u: &[f64]) -> Result<f64> {
    OpDensity::new(*p, u.len())?.log_density(u)
}

/// Kendall's tau 1 - 2/(beta (theta + 2)).
pub fn op_tau(p: &OuterPowerClaytonParams) -> f64 {
    1.0 - 2.0 / (p.beta * (p.theta + 2.0))
}

/// (lambda_L, lambda_U) = (2^{-1/(beta theta)}, 2 - 2^{1/beta}).
pub fn op_tail_dependence(p: &OuterPowerClaytonParams) -> (f64, f64) {
    (2f64.powf(-1.0 / (p.beta * p.theta)), 2.0 - 2f64.powf(1.0 / p.beta))
}

/// theta with op_tau(theta, beta) = tau.
pub fn op_theta_for_tau(tau: f64, beta: f64) -> f64 {
    2.0 / (beta * (1.0 - tau)) - 2.0
}

/// beta with op_tau(theta, beta) = tau.
pub fn op_beta_for_tau(tau: f64, theta: f64) -> f64 {
    2.0 / ((theta + 2.0) * (1.0 - tau))
}

/// log of the frailty S V^beta, S positive stable of index 1/beta, V ~ Gamma(1/theta, 1).
pub fn sample_op_log_frailty(p: &OuterPowerClaytonParams, rng: &mut RandomStream) -> Result<f64> {
    let lv = sample_log_gamma(1.0 / p.theta, rng)?;
    if p.is_clayton() {
        return Ok(lv);
    }
    Ok(sample_log_stable(1.0 / p.beta, rng) + p.beta * lv)
}

/// One outer-power Clayton frailty draw.
pub fn sample_op_frailty(p: &OuterPowerClaytonParams, rng: &mut RandomStream) -> Result<f64> {
    Ok(sample_op_log_frailty(p, rng)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::log_density;

    fn p(theta: f64, beta: f64) -> OuterPowerClaytonParams {
        OuterPowerClaytonParams::new(theta, beta).unwrap()
    }

    #[test]
    fn beta_one_is_clayton() {
        let q = p(1.7, 1.0);
        for d in 1..6 {
            let a = op_log_gen_deriv(&q, d, 0.8).unwrap();
            assert_eq!(a, log_gen_deriv(FamilyId::Clayton, 1.7, d, 0.8).unwrap());
        }
        let u = [0.2, 0.6, 0.9];
        assert_eq!(op_log_density(&q, &u).unwrap(), log_density(FamilyId::Clayton, 1.7, &u).unwrap());
    }

    #[test]
    fn symbolic_third_derivative() {
        // psi(t) = (1 + s)^{-1}, s = sqrt t: the third derivative with sign removed is
        // 3 (5s^2 + 4s + 1) / (8 s^5 (1+s)^4)
        let t = 0.5f64;
        let s = t.sqrt();
        let want = 3.0 * (5.0 * s * s + 4.0 * s + 1.0) / (8.0 * s.powi(5) * (1.0 + s).powi(4));
        let got = op_log_gen_deriv(&p(1.0, 2.0), 3, t).unwrap();
        assert!((got - want.ln()).abs() < 1e-9, "{got} vs {}", want.ln());
    }

    #[test]
    fn first_derivative_by_finite_difference() {
        for (theta, beta) in [(0.5, 1.3), (2.0, 2.0), (1.0, 4.0 / 3.0)] {
            let q = p(theta, beta);
            for t in [0.1, 1.0, 7.0] {
                let h = 1e-5 * t;
                let fd = -(op_log_psi(&q, t + h).unwrap().exp() - op_log_psi(&q, t - h).unwrap().exp()) / (2.0 * h);
                let want = op_log_gen_deriv(&q, 1, t).unwrap().exp();
                assert!(((fd - want) / want).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn bivariate_density_by_hand() {
        // c = psi''(t) / (psi'(t1) psi'(t2)) ... assembled from the explicit generator derivatives
        let q = p(1.0, 4.0 / 3.0);
        let (u1, u2) = (0.4f64, 0.6f64);
        let (th, b) = (q.theta, q.beta);
        let ti = |u: f64| (u.powf(-th) - 1.0).powf(b);
        let dti = |u: f64| b * (u.powf(-th) - 1.0).powf(b - 1.0) * th * u.powf(-th - 1.0);
        let t = ti(u1) + ti(u2);
        // psi(t) = (1 + t^{1/b})^{-1/th}; second derivative by the chain rule
        let a = 1.0 / b;
        let g = 1.0 + t.powf(a);
        let g1 = a * t.powf(a - 1.0);
        let g2 = a * (a - 1.0) * t.powf(a - 2.0);
        let m = -1.0 / th;
        let psi2 = m * (m - 1.0) * g.powf(m - 2.0) * g1 * g1 + m * g.powf(m - 1.0) * g2;
        let want = (psi2 * dti(u1) * dti(u2)).ln();
        assert!((op_log_density(&q, &[u1, u2]).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn tau_and_tails() {
        assert!((op_tau(&p(1.0 / 3.0, 8.0 / 7.0)) - 0.25).abs() < 1e-15);
        let q = p(2.0, 2.0);
        assert!((op_tau(&q) - 0.75).abs() < 1e-15);
        assert!((op_tail_dependence(&q).1 - (2.0 - 2f64.sqrt())).abs() < 1e-15);
        assert_eq!(op_tail_dependence(&p(2.0, 1.0)).1, 0.0);
        for (tau, beta, theta) in [(0.5, 4.0 / 3.0, 1.0), (0.25, 8.0 / 7.0, 1.0 / 3.0)] {
            assert!((op_theta_for_tau(tau, beta) - theta).abs() < 1e-12);
            assert!((op_beta_for_tau(tau, theta) - beta).abs() < 1e-12);
        }
    }

    #[test]
    fn frailty_laplace_transform() {
        for (i, (theta, beta)) in [(1.0, 4.0 / 3.0), (2.0, 2.0)].into_iter().enumerate() {
            let q = p(theta, beta);
            let mut rng = RandomStream::new(17, i as u64);
            let vs: Vec<f64> = (0..100_000).map(|_| sample_op_frailty(&q, &mut rng).unwrap()).collect();
            for t in [0.5, 1.0, 2.0] {
                let xs: Vec<f64> = vs.iter().map(|v| (-v * t).exp()).collect();
                let n = xs.len() as f64;
                let m = xs.iter().sum::<f64>() / n;
                let se = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
                let want = op_log_psi(&q, t).unwrap().exp();
                assert!((m - want).abs() < 3.5 * se, "({theta},{beta}) t={t}: {m} vs {want}");
            }
        }
    }
}
