//! Cholesky factorisation for the symmetric positive-definite systems built
//! by kernel ridge and the ridge-penalised logit fit.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Lower-triangular factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: Matrix,
}

impl Cholesky {
    /// Factors the lower triangle of `a`; the upper triangle is ignored.
    pub fn factor(a: &Matrix) -> Result<Self> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: a.n_cols(),
            });
        }
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::SingularSystem { pivot: j, value: d });
            }
            let d = d.sqrt();
            l.set(j, j, d);
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / d);
            }
        }
        Ok(Cholesky { lower: l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lower.n_rows();
        let l = &self.lower;
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s -= l.get(i, k) * z[k];
            }
            z[i] = s / l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n {
                s -= l.get(k, i) * z[k];
            }
            z[i] = s / l.get(i, i);
        }
        z
    }
}

/// Solves `a x = b` and refines once against the residual.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let chol = Cholesky::factor(a)?;
    let mut x = chol.solve(b);
    let residual: Vec<f64> = (0..a.n_rows())
        .map(|i| b[i] - crate::matrix::dot(a.row(i), &x))
        .collect();
    let correction = chol.solve(&residual);
    for (xi, c) in x.iter_mut().zip(correction) {
        *xi += c;
    }
    Ok(x)
}
