use crate::error::{ensure, Result};
use crate::quad::{integrate, QuadOptions};

const PI2_OVER_6: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

/// Debye function of order one, D_1(theta) = (1/theta) * int_0^theta t/(e^t - 1) dt.
pub fn debye1(theta: f64) -> Result<f64> {
    ensure(theta > 0.0 && theta.is_finite(), || format!("debye1 needs theta > 0, got {theta}"))?;
    if theta < 1e-4 {
        // 1 - x/4 + x^2/36 - x^4/3600; the next term is O(x^6).
        let x2 = theta * theta;
        return Ok(1.0 - theta / 4.0 + x2 / 36.0 - x2 * x2 / 3600.0);
    }
    if theta > 50.0 {
        // int_theta^inf t/(e^t-1) dt = sum_k e^{-k theta} (theta/k + 1/k^2)
        let mut tail = 0.0;
        for k in 1..=20 {
            let k = k as f64;
            let term = (-k * theta).exp() * (theta / k + 1.0 / (k * k));
            tail += term;
            if term < 1e-18 * tail {
                break;
            }
        }
        return Ok((PI2_OVER_6 - tail) / theta);
    }
    let r = integrate(debye_integrand, 0.0, theta, QuadOptions { abs_tol: 0.0, rel_tol: 1e-13, max_intervals: 2000 })?;
    Ok(r.value / theta)
}

fn debye_integrand(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        t / t.exp_m1()
    }
}
