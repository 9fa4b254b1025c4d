use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::families::{check_theta, FamilyId};
use crate::specfun::ln_gamma;

use super::RandomStream;

/// log of a Gamma(shape, 1) draw; exact for shapes small enough that the draw itself
/// underflows (G(a) = G(a+1) U^{1/a}).
pub fn sample_log_gamma(shape: f64, rng: &mut RandomStream) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::Domain(format!("gamma shape {shape} must be positive")));
    }
    if shape >= 1.0 {
        let g = Gamma::new(shape, 1.0).map_err(|e| Error::Sampler(e.to_string()))?;
        Ok(g.sample(rng).ln())
    } else {
        let g = Gamma::new(shape + 1.0, 1.0).map_err(|e| Error::Sampler(e.to_string()))?;
        let lg = g.sample(rng).ln();
        Ok(lg + rng.open01().ln() / shape)
    }
}

/// Geometric on {1, 2, ...} with P(V = k) = (1 - q) q^{k-1}.
pub fn sample_geometric(q: f64, rng: &mut RandomStream) -> f64 {
    if q == 0.0 {
        return 1.0;
    }
    1.0 + (rng.open01().ln() / q.ln()).floor()
}

/// Logarithmic series on {1, 2, ...} with p = 1 - e^{-theta}, P(V = k) = p^k / (k theta),
/// by Kemp's second accelerated generator.
pub fn sample_logarithmic(theta: f64, rng: &mut RandomStream) -> f64 {
    let p = -(-theta).exp_m1();
    let u = rng.open01();
    if u > p {
        return 1.0;
    }
    // q = 1 - (1 - p)^{u3}
    let t = theta * rng.open01();
    let q = -(-t).exp_m1();
    if u < q * q {
        let log_q = if t < std::f64::consts::LN_2 { q.ln() } else { (-(-t).exp()).ln_1p() };
        return 1.0 + (u.ln() / log_q).floor();
    }
    if u > q {
        1.0
    } else {
        2.0
    }
}

/// log S for the positive stable law with Laplace transform exp(-t^alpha), alpha in (0,1],
/// by Kanter's representation (one uniform angle, one exponential).
pub fn sample_log_stable(alpha: f64, rng: &mut RandomStream) -> f64 {
    if alpha >= 1.0 {
        return 0.0;
    }
    let u = std::f64::consts::PI * rng.open01();
    let e = rng.exp1();
    // ((1-a)/a) log A(u) with the 1/(1-a) exponent of A cancelled analytically
    let num = alpha * (alpha * u).sin().ln() + (1.0 - alpha) * ((1.0 - alpha) * u).sin().ln() - u.sin().ln();
    num / alpha - (1.0 - alpha) / alpha * e.ln()
}

/// log P(V > k) for the Sibuya law, P(V > k) = Gamma(k+1-alpha) / (Gamma(k+1) Gamma(1-alpha)).
fn log_sibuya_survival(k: f64, alpha: f64) -> f64 {
    let lr = if k < 1e6 {
        ln_gamma(k + 1.0 - alpha) - ln_gamma(k + 1.0)
    } else {
        // log Gamma(x + a)/Gamma(x + b) ~ (a-b) log x + (a-b)(a+b-1)/(2x), x = k
        -alpha * k.ln() - alpha * (1.0 - alpha) / (2.0 * k)
    };
    lr - ln_gamma(1.0 - alpha)
}

/// Sibuya(alpha) draw on {1, 2, ...}, P(V = 1) = alpha, by inversion of the survival function.
pub fn sample_sibuya(alpha: f64, rng: &mut RandomStream) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let u = rng.open01();
    // short recursion S(k) = S(k-1)(k - alpha)/k covers most of the mass
    let mut s = 1.0;
    for k in 1..=64 {
        s *= (k as f64 - alpha) / k as f64;
        if s <= u {
            return k as f64;
        }
    }
    let lu = u.ln();
    let mut lo = 64.0f64;
    let mut hi = 128.0f64;
    while log_sibuya_survival(hi, alpha) > lu {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return 1e300;
        }
    }
    // invariant: S(lo) > u >= S(hi)
    while hi - lo > 1.0 && hi - lo > 1e-12 * hi {
        let mid = (0.5 * (lo + hi)).floor();
        let mid = if mid <= lo { lo + 1.0 } else { mid };
        if log_sibuya_survival(mid, alpha) > lu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// One draw from the frailty distribution whose Laplace transform is the family generator.
pub fn sample_frailty(family: FamilyId, theta: f64, rng: &mut RandomStream) -> Result<f64> {
    Ok(sample_log_frailty(family, theta, rng)?.exp())
}

/// log V for the family frailty; kept in log form so Gamma draws with tiny shape survive.
pub fn sample_log_frailty(family: FamilyId, theta: f64, rng: &mut RandomStream) -> Result<f64> {
    check_theta(family, theta)?;
    Ok(match family {
        FamilyId::Amh => sample_geometric(theta, rng).ln(),
        FamilyId::Clayton => sample_log_gamma(1.0 / theta, rng)?,
        FamilyId::Frank => sample_logarithmic(theta, rng).ln(),
        FamilyId::Gumbel => sample_log_stable(1.0 / theta, rng),
        FamilyId::Joe => sample_sibuya(1.0 / theta, rng).ln(),
    })
}
