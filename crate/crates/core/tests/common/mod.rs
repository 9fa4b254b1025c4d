//! Oracles shared by the integration tests.
#![allow(dead_code)]

use archicop::families::FamilyId;
use archicop::sampling::RandomStream;

/// Truncated Taylor series f(t0 + h) = sum_k c[k] h^k, for exact low-order derivatives
/// of closed-form generators by automatic differentiation.
#[derive(Debug, Clone)]
pub struct Jet(pub Vec<f64>);

impl Jet {
    pub fn var(t0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = t0;
        if order > 0 {
            c[1] = 1.0;
        }
        Jet(c)
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut v = vec![0.0; order + 1];
        v[0] = c;
        Jet(v)
    }

    fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn scale(&self, s: f64) -> Self {
        Jet(self.0.iter().map(|x| x * s).collect())
    }

    pub fn add_const(&self, s: f64) -> Self {
        let mut c = self.0.clone();
        c[0] += s;
        Jet(c)
    }

    pub fn mul(&self, b: &Jet) -> Self {
        let n = self.order();
        Jet((0..=n).map(|k| (0..=k).map(|i| self.0[i] * b.0[k - i]).sum()).collect())
    }

    pub fn div(&self, b: &Jet) -> Self {
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        for k in 0..=n {
            let s: f64 = (1..=k).map(|i| b.0[i] * c[k - i]).sum();
            c[k] = (self.0[k] - s) / b.0[0];
        }
        Jet(c)
    }

    pub fn exp(&self) -> Self {
        let n = self.order();
        let mut e = vec![0.0; n + 1];
        e[0] = self.0[0].exp();
        for k in 1..=n {
            e[k] = (1..=k).map(|j| j as f64 * self.0[j] * e[k - j]).sum::<f64>() / k as f64;
        }
        Jet(e)
    }

    pub fn ln(&self) -> Self {
        let n = self.order();
        let a = &self.0;
        let mut l = vec![0.0; n + 1];
        l[0] = a[0].ln();
        for k in 1..=n {
            let s: f64 = (1..k).map(|j| j as f64 * l[j] * a[k - j]).sum();
            l[k] = (a[k] - s / k as f64) / a[0];
        }
        Jet(l)
    }

    pub fn powf(&self, r: f64) -> Self {
        let n = self.order();
        let a = &self.0;
        let mut p = vec![0.0; n + 1];
        p[0] = a[0].powf(r);
        for k in 1..=n {
            let s: f64 = (1..=k).map(|j| ((r + 1.0) * j as f64 - k as f64) * a[j] * p[k - j]).sum();
            p[k] = s / (k as f64 * a[0]);
        }
        Jet(p)
    }

    /// d-th derivative at t0.
    pub fn derivative(&self, d: usize) -> f64 {
        let fact: f64 = (1..=d).map(|i| i as f64).product();
        self.0[d] * fact
    }
}

/// Generator of a one-parameter family as a Taylor series around t.
pub fn generator_jet(family: FamilyId, theta: f64, t: f64, order: usize) -> Jet {
    let x = Jet::var(t, order);
    match family {
        FamilyId::Amh => Jet::constant(1.0 - theta, order).div(&x.exp().add_const(-theta)),
        FamilyId::Clayton => x.add_const(1.0).powf(-1.0 / theta),
        FamilyId::Frank => {
            let inner = x.scale(-1.0).exp().scale(-(-(-theta).exp_m1())).add_const(1.0);
            inner.ln().scale(-1.0 / theta)
        }
        FamilyId::Gumbel => x.powf(1.0 / theta).scale(-1.0).exp(),
        FamilyId::Joe => {
            let one_minus = x.scale(-1.0).exp().scale(-1.0).add_const(1.0);
            one_minus.powf(1.0 / theta).scale(-1.0).add_const(1.0)
        }
    }
}

/// (-1)^d psi^{(d)}(t) from the Taylor oracle.
pub fn oracle_gen_deriv(family: FamilyId, theta: f64, d: usize, t: f64) -> f64 {
    let v = generator_jet(family, theta, t, d).derivative(d);
    if d.is_multiple_of(2) {
        v
    } else {
        -v
    }
}

/// Randomly shifted rank-1 Kronecker lattice x_i = frac(shift + i alpha) with the
/// generalized golden-ratio directions alpha_j = phi_d^{-j}.
pub struct Kronecker {
    alpha: Vec<f64>,
}

impl Kronecker {
    pub fn new(d: usize) -> Self {
        // phi_d is the positive root of x^{d+1} = x + 1
        let mut phi = 2.0f64;
        for _ in 0..100 {
            phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
        }
        Kronecker { alpha: (1..=d).map(|j| phi.powi(-(j as i32)).fract()).collect() }
    }

    /// Integral of f over (0,1)^d from n points under each of `shifts` random shifts:
    /// (estimate, standard error across shifts).
    ///
    /// Coordinates pass through the smoothstep u = x^4 (35 - 84x + 70x^2 - 20x^3), with
    /// Jacobian 140 x^3 (1-x)^3, which keeps the variance finite for densities growing like
    /// r^{1-d} at a corner when d < 8.
    pub fn integrate<F: Fn(&[f64]) -> f64 + Sync>(&self, f: F, n: usize, shifts: usize, seed: u64) -> (f64, f64) {
        use rayon::prelude::*;
        let d = self.alpha.len();
        let means: Vec<f64> = (0..shifts)
            .into_par_iter()
            .map(|s| {
                let mut rng = RandomStream::new(seed, s as u64);
                let shift: Vec<f64> = (0..d).map(|_| rng.open01()).collect();
                let mut x = vec![0.0; d];
                let mut sum = 0.0;
                for i in 0..n {
                    let mut jac = 1.0;
                    for j in 0..d {
                        let v = (shift[j] + i as f64 * self.alpha[j]).fract();
                        let w = v.powi(4) * (35.0 - 84.0 * v + 70.0 * v * v - 20.0 * v.powi(3));
                        jac *= 140.0 * (v * (1.0 - v)).powi(3);
                        x[j] = w.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
                    }
                    if jac > 0.0 {
                        sum += f(&x) * jac;
                    }
                }
                sum / n as f64
            })
            .collect();
        let k = shifts as f64;
        let mean = means.iter().sum::<f64>() / k;
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (mean, (var / k).sqrt())
    }
}

/// Five-point parameter grid per family used by the derivative checks.
pub fn theta_grid(family: FamilyId) -> [f64; 5] {
    match family {
        FamilyId::Amh => [0.1, 0.3, 0.5, 0.7, 0.9],
        FamilyId::Clayton => [0.5, 1.0, 2.0, 5.0, 10.0],
        FamilyId::Frank => [0.5, 1.0, 3.0, 7.0, 15.0],
        FamilyId::Gumbel | FamilyId::Joe => [1.1, 1.5, 2.0, 3.0, 5.0],
    }
}
