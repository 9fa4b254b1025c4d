use crate::error::{Error, Result};

use super::RandomStream;

/// Rejection attempts allowed per draw before the sampler reports failure.
const MAX_TRIES: usize = 1_000_000;

/// Draw from the generalized inverse Gaussian law with density proportional to
/// x^{lambda-1} exp(-(chi/x + psi x)/2), x > 0.
///
/// Follows Hörmann and Leydold (2014): ratio-of-uniforms with mode shift for large
/// lambda or omega, without shift in the middle regime, and a concave-monotone
/// envelope for small omega with lambda < 1. Negative lambda uses X = 1/Y.
pub fn sample_gig(lambda: f64, chi: f64, psi: f64, rng: &mut RandomStream) -> Result<f64> {
    if !(chi > 0.0 && psi > 0.0 && chi.is_finite() && psi.is_finite() && lambda.is_finite()) {
        return Err(Error::Domain(format!("GIG parameters chi = {chi}, psi = {psi} must be positive")));
    }
    let alpha = (chi / psi).sqrt();
    let omega = (chi * psi).sqrt();
    let l = lambda.abs();
    let y = if l > 2.0 || omega > 3.0 {
        rou_shift(l, omega, rng)?
    } else if l >= 1.0 - 2.25 * omega * omega || omega > 0.2 {
        rou_noshift(l, omega, rng)?
    } else {
        concave_envelope(l, omega, rng)?
    };
    Ok(if lambda < 0.0 { alpha / y } else { alpha * y })
}

fn mode(lambda: f64, omega: f64) -> f64 {
    if lambda >= 1.0 {
        (((lambda - 1.0) * (lambda - 1.0) + omega * omega).sqrt() + (lambda - 1.0)) / omega
    } else {
        omega / (((1.0 - lambda) * (1.0 - lambda) + omega * omega).sqrt() + (1.0 - lambda))
    }
}

fn exhausted() -> Error {
    Error::Sampler(format!("GIG rejection sampler exceeded {MAX_TRIES} attempts"))
}

fn rou_noshift(lambda: f64, omega: f64, rng: &mut RandomStream) -> Result<f64> {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);
    let ym = ((lambda + 1.0) + ((lambda + 1.0) * (lambda + 1.0) + omega * omega).sqrt()) / omega;
    let um = (0.5 * (lambda + 1.0) * ym.ln() - s * (ym + 1.0 / ym) - nc).exp();
    for _ in 0..MAX_TRIES {
        let u = um * rng.open01();
        let v = rng.open01();
        let x = u / v;
        if v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return Ok(x);
        }
    }
    Err(exhausted())
}

fn rou_shift(lambda: f64, omega: f64, rng: &mut RandomStream) -> Result<f64> {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);
    // roots of the cubic bounding the shifted region
    let a = -(2.0 * (lambda + 1.0) / omega + xm);
    let b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    let c = xm;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let fi = (-q / (2.0 * (-p * p * p / 27.0).sqrt())).acos();
    let fak = 2.0 * (-p / 3.0).sqrt();
    let y1 = fak * (fi / 3.0).cos() - a / 3.0;
    let y2 = fak * (fi / 3.0 + 4.0 / 3.0 * std::f64::consts::PI).cos() - a / 3.0;
    let uplus = (y1 - xm) * (t * y1.ln() - s * (y1 + 1.0 / y1) - nc).exp();
    let uminus = (y2 - xm) * (t * y2.ln() - s * (y2 + 1.0 / y2) - nc).exp();
    for _ in 0..MAX_TRIES {
        let u = uminus + rng.open01() * (uplus - uminus);
        let v = rng.open01();
        let x = u / v + xm;
        if x > 0.0 && v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return Ok(x);
        }
    }
    Err(exhausted())
}

fn concave_envelope(lambda: f64, omega: f64, rng: &mut RandomStream) -> Result<f64> {
    let xm = mode(lambda, omega);
    let x0 = omega / (1.0 - lambda);
    let k0 = ((lambda - 1.0) * xm.ln() - 0.5 * omega * (xm + 1.0 / xm)).exp();
    let a0 = k0 * x0;
    let (k1, a1, k2, a2);
    if x0 >= 2.0 / omega {
        k1 = 0.0;
        a1 = 0.0;
        k2 = x0.powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-omega * x0 / 2.0).exp() / omega;
    } else {
        k1 = (-omega).exp();
        a1 = if lambda == 0.0 {
            k1 * (2.0 / (omega * omega)).ln()
        } else {
            k1 / lambda * ((2.0 / omega).powf(lambda) - x0.powf(lambda))
        };
        k2 = (2.0 / omega).powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-1.0f64).exp() / omega;
    }
    let total = a0 + a1 + a2;
    for _ in 0..MAX_TRIES {
        let mut v = total * rng.open01();
        let (x, hx);
        if v <= a0 {
            x = x0 * v / a0;
            hx = k0;
        } else {
            v -= a0;
            if v <= a1 {
                if lambda == 0.0 {
                    x = omega * (omega.exp() * v).exp();
                    hx = k1 / x;
                } else {
                    x = (x0.powf(lambda) + lambda / k1 * v).powf(1.0 / lambda);
                    hx = k1 * x.powf(lambda - 1.0);
                }
            } else {
                v -= a1;
                let a = x0.max(2.0 / omega);
                x = -2.0 / omega * ((-omega / 2.0 * a).exp() - omega / (2.0 * k2) * v).ln();
                hx = k2 * (-omega / 2.0 * x).exp();
            }
        }
        let u = rng.open01() * hx;
        if x > 0.0 && u.ln() <= (lambda - 1.0) * x.ln() - omega / 2.0 * (x + 1.0 / x) {
            return Ok(x);
        }
    }
    Err(exhausted())
}
