use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Copula-scale data: an n x d matrix with every entry in (0,1).
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSample {
    u: Matrix,
}

impl PseudoSample {
    /// Accepts data already on the copula scale (for example a simulated sample).
    pub fn from_uniforms(u: Matrix) -> Result<Self> {
        if u.nrows() == 0 || u.ncols() == 0 {
            return Err(Error::Domain("empty sample".into()));
        }
        if let Some(x) = u.as_slice().iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
            return Err(Error::Domain(format!("copula-scale value {x} is not in the open interval (0,1)")));
        }
        Ok(Self { u })
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn d(&self) -> usize {
        self.u.ncols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.u
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.u.row(i)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.u.rows()
    }

    /// Rows with the given indices, in that order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let data: Vec<f64> = idx.iter().flat_map(|&i| self.u.row(i).iter().copied()).collect();
        Self { u: Matrix::from_row_major(idx.len(), self.d(), data).expect("consistent shape") }
    }
}

/// Column ranks scaled by 1/(n+1); tied values share their average rank.
pub fn pseudo_observations(x: &Matrix) -> Result<PseudoSample> {
    let (n, d) = (x.nrows(), x.ncols());
    if n < 2 || d == 0 {
        return Err(Error::Domain(format!("pseudo-observations need n >= 2 rows and d >= 1 columns, got {n} x {d}")));
    }
    if let Some(v) = x.as_slice().iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("data contains the non-finite value {v}")));
    }
    let denom = n as f64 + 1.0;
    let mut out = vec![0.0; n * d];
    let mut idx: Vec<usize> = Vec::with_capacity(n);
    for j in 0..d {
        let col = x.column(j);
        idx.clear();
        idx.extend(0..n);
        idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        if col[idx[0]] == col[idx[n - 1]] {
            return Err(Error::Domain(format!("column {j} is constant")));
        }
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && col[idx[end]] == col[idx[start]] {
                end += 1;
            }
            // ranks start+1 ..= end share their mean
            let r = 0.5 * ((start + 1 + end) as f64);
            for &i in &idx[start..end] {
                // a division keeps k/(n+1) correctly rounded
                out[i * d + j] = r / denom;
            }
            start = end;
        }
    }
    PseudoSample::from_uniforms(Matrix::from_row_major(n, d, out)?)
}
