use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::Copula;

use super::RandomStream;

/// Smallest and largest values a sampled coordinate may take.
const U_MIN: f64 = f64::MIN_POSITIVE;
const U_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

/// One row U_j = psi(E_j / V) with V a frailty draw and E_j unit exponentials.
///
/// Computed as log t_j = log E_j - log V so that frailties far below the smallest
/// normal double (Clayton with large theta) keep their information. Coordinates that
/// round to 0 or 1 are moved to the nearest representable interior value.
pub fn sample_copula_row(copula: &Copula, d: usize, rng: &mut RandomStream, out: &mut Vec<f64>) -> Result<()> {
    let log_v = copula.sample_log_frailty(rng)?;
    if log_v.is_nan() {
        return Err(Error::Sampler(format!("{copula} frailty draw is NaN")));
    }
    out.clear();
    for _ in 0..d {
        let log_t = rng.exp1().ln() - log_v;
        let u = copula.log_psi(log_t.exp())?.exp();
        out.push(u.clamp(U_MIN, U_MAX));
    }
    Ok(())
}

/// n independent rows of a d-dimensional sample from the copula.
pub fn sample_copula(copula: &Copula, n: usize, d: usize, rng: &mut RandomStream) -> Result<Matrix> {
    if n == 0 || d == 0 {
        return Err(Error::Domain(format!("sample size n = {n} and dimension d = {d} must be >= 1")));
    }
    let mut data = Vec::with_capacity(n * d);
    let mut row = Vec::with_capacity(d);
    for _ in 0..n {
        sample_copula_row(copula, d, rng, &mut row)?;
        data.extend_from_slice(&row);
    }
    Matrix::from_row_major(n, d, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilyId;
    use crate::model::ModelKind;

    fn ks_uniform(mut xs: Vec<f64>) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
            .fold(0.0, f64::max)
    }

    fn kendall_naive(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += ((a[i] - a[j]) * (b[i] - b[j])).signum();
            }
        }
        s / (n * (n - 1) / 2) as f64
    }

    fn all_copulas() -> Vec<Copula> {
        let mut v: Vec<Copula> = FamilyId::ALL
            .iter()
            .map(|&f| Copula::Archimedean { family: f, theta: if f == FamilyId::Amh { 0.7 } else { 2.0 } })
            .collect();
        v.push(ModelKind::OpClayton.with_params(&[1.0, 4.0 / 3.0]).unwrap());
        v.push(ModelKind::Gig.with_params(&[0.05, 0.0968]).unwrap());
        v
    }

    #[test]
    fn margins_are_uniform() {
        // KS critical value at alpha = 0.01 for n = 10^4 is 1.628 / sqrt(n); with 3 columns x 7
        // copulas, allow at most one exceedance
        let n = 10_000;
        let crit = 1.628 / (n as f64).sqrt();
        let mut fails = 0;
        for (i, c) in all_copulas().iter().enumerate() {
            let mut rng = RandomStream::new(2024, i as u64);
            let m = sample_copula(c, n, 3, &mut rng).unwrap();
            assert!(m.as_slice().iter().all(|&x| x > 0.0 && x < 1.0));
            for j in 0..3 {
                if ks_uniform(m.column(j)) > crit {
                    fails += 1;
                }
            }
        }
        assert!(fails <= 1, "{fails} KS rejections");
    }

    #[test]
    fn one_dimensional_sample_is_uniform() {
        let c = Copula::Archimedean { family: FamilyId::Joe, theta: 3.0 };
        let m = sample_copula(&c, 10_000, 1, &mut RandomStream::new(5, 0)).unwrap();
        assert!(ks_uniform(m.column(0)) < 1.628 / 100.0);
    }

    #[test]
    fn sample_tau_matches_family_tau() {
        // sd of the sample tau is about sqrt(2(2n+5)/(9n(n-1))) under independence and smaller
        // under dependence; 3 of those is a conservative bound
        let n = 3000;
        let se = (2.0 * (2.0 * n as f64 + 5.0) / (9.0 * n as f64 * (n as f64 - 1.0))).sqrt();
        for (i, c) in all_copulas().iter().enumerate() {
            let m = sample_copula(c, n, 2, &mut RandomStream::new(99, i as u64)).unwrap();
            let t = kendall_naive(&m.column(0), &m.column(1));
            let want = c.tau().unwrap();
            assert!((t - want).abs() < 3.0 * se, "{c}: {t} vs {want}");
        }
    }

    #[test]
    fn reproducible() {
        let c = Copula::Archimedean { family: FamilyId::Gumbel, theta: 2.0 };
        let a = sample_copula(&c, 100, 4, &mut RandomStream::new(1, 2)).unwrap();
        let b = sample_copula(&c, 100, 4, &mut RandomStream::new(1, 2)).unwrap();
        let e = sample_copula(&c, 100, 4, &mut RandomStream::new(1, 3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, e);
    }

    #[test]
    fn extreme_clayton_stays_interior() {
        let c = Copula::Archimedean { family: FamilyId::Clayton, theta: 50.0 };
        let m = sample_copula(&c, 2000, 5, &mut RandomStream::new(3, 0)).unwrap();
        assert!(m.as_slice().iter().all(|&x| x > 0.0 && x < 1.0));
    }
}
