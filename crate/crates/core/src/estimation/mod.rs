//! Pseudo-observations, log-likelihood assembly, Kendall's tau estimates, initial search
//! regions and maximum-likelihood optimizers.

mod initial;
mod kendall;
mod mle;
mod pseudo;

use serde::Serialize;

pub use initial::{
    initial_box_gig, initial_box_opc, initial_interval_1p, InitialBox, Interval, IntervalPolicy, TAU_EPSILON,
};
pub use kendall::{kendall_tau, pairwise_tau_hat};
pub use mle::{conditional_mle, loglik_at, mle_1p, mle_2p, FitResult};
pub use pseudo::{pseudo_observations, PseudoSample};

use crate::error::Result;
use crate::model::Copula;

/// Summed log-density with a count of rows whose density could not be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLikelihood {
    /// -inf when `failed_rows > 0`.
    pub value: f64,
    pub failed_rows: usize,
}

/// l = sum_i log c(u_i).
pub fn log_likelihood(copula: &Copula, u: &PseudoSample) -> Result<LogLikelihood> {
    let dens = copula.density(u.d())?;
    let mut value = 0.0;
    let mut failed_rows = 0;
    for row in u.rows() {
        match dens.log_density(row) {
            Ok(v) if v.is_finite() => value += v,
            _ => failed_rows += 1,
        }
    }
    if failed_rows > 0 {
        value = f64::NEG_INFINITY;
    }
    Ok(LogLikelihood { value, failed_rows })
}

/// Diagonal Gumbel estimator log d / (log n - log sum_i -log max_j u_ij), floored at 1.
pub fn gumbel_diag_mle(u: &PseudoSample) -> f64 {
    let n = u.n() as f64;
    let s: f64 = u.rows().map(|r| -r.iter().cloned().fold(0.0, f64::max).ln()).sum();
    let theta = (u.d() as f64).ln() / (n.ln() - s.ln());
    if theta.is_nan() || theta < 1.0 {
        1.0
    } else {
        theta
    }
}

/// Largest dimension for which the pairwise tau estimate is the default.
pub const PAIRWISE_TAU_MAX_DIM: usize = 20;

/// Kendall's tau estimate: pairwise mean for d <= 20, the Gumbel diagonal estimate above.
pub fn tau_hat(u: &PseudoSample) -> f64 {
    if u.d() <= PAIRWISE_TAU_MAX_DIM {
        pairwise_tau_hat(u)
    } else {
        1.0 - 1.0 / gumbel_diag_mle(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{log_density, FamilyId};
    use crate::matrix::Matrix;
    use crate::sampling::{sample_copula, RandomStream};

    #[test]
    fn independence_and_single_row() {
        let m = Matrix::from_rows(&[vec![0.2, 0.7, 0.4], vec![0.9, 0.1, 0.5]]).unwrap();
        let u = PseudoSample::from_uniforms(m).unwrap();
        let g = Copula::Archimedean { family: FamilyId::Gumbel, theta: 1.0 };
        assert_eq!(log_likelihood(&g, &u).unwrap().value, 0.0);
        let one = u.select_rows(&[1]);
        let c = Copula::Archimedean { family: FamilyId::Frank, theta: 3.0 };
        assert_eq!(log_likelihood(&c, &one).unwrap().value, log_density(FamilyId::Frank, 3.0, &[0.9, 0.1, 0.5]).unwrap());
    }

    #[test]
    fn gumbel_diagonal_estimator() {
        let c = Copula::Archimedean { family: FamilyId::Gumbel, theta: 2.0 };
        let u = PseudoSample::from_uniforms(sample_copula(&c, 1000, 10, &mut RandomStream::new(9, 0)).unwrap()).unwrap();
        assert!((gumbel_diag_mle(&u) - 2.0).abs() < 0.15);
        // comonotone columns
        let rows: Vec<Vec<f64>> = (1..=200).map(|k| vec![k as f64 / 201.0; 3]).collect();
        let u = PseudoSample::from_uniforms(Matrix::from_rows(&rows).unwrap()).unwrap();
        assert!(gumbel_diag_mle(&u) > 10.0);
    }

    #[test]
    fn pairwise_tau_of_simulated_clayton() {
        let c = Copula::Archimedean { family: FamilyId::Clayton, theta: 2.0 };
        let u = PseudoSample::from_uniforms(sample_copula(&c, 1000, 5, &mut RandomStream::new(2, 0)).unwrap()).unwrap();
        // per-pair sd is below the independence value sqrt(2(2n+5)/(9n(n-1))) = 0.0211
        assert!((pairwise_tau_hat(&u) - 0.5).abs() < 3.0 * 0.0211);
    }
}
