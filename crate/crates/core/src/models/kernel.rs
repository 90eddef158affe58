//! Kernels and kernel ridge regression.

use serde::{Deserialize, Serialize};

use super::linalg::solve_spd;
use crate::error::{Error, Result};
use crate::matrix::{dot, squared_distance, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    /// `exp(−γ‖a − b‖²)`
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn new(kind: KernelKind, gamma: f64) -> Result<Self> {
        match kind {
            KernelKind::Linear => Ok(Kernel::Linear),
            KernelKind::Rbf if gamma > 0.0 && gamma.is_finite() => Ok(Kernel::Rbf { gamma }),
            KernelKind::Rbf => Err(Error::InvalidConfig(format!(
                "gamma must be > 0, got {gamma}"
            ))),
        }
    }

    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => (-gamma * squared_distance(a, b)).exp(),
        }
    }

    pub fn gram(&self, x: &Matrix) -> Matrix {
        let n = x.n_rows();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = self.eval(x.row(i), x.row(j));
                k.set(i, j, v);
                k.set(j, i, v);
            }
        }
        k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelRidgeConfig {
    pub alpha: f64,
    pub kernel: KernelKind,
    pub gamma: f64,
}

impl Default for KernelRidgeConfig {
    fn default() -> Self {
        KernelRidgeConfig {
            alpha: 1.0,
            kernel: KernelKind::Rbf,
            gamma: 1.0 / 16.0,
        }
    }
}

impl KernelRidgeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        Kernel::new(self.kernel, self.gamma).map(|_| ())
    }
}

/// Dual-form ridge: `(K + λI)α = y`, `f(q) = Σᵢ αᵢ k(xᵢ, q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRidge {
    kernel: Kernel,
    support: Matrix,
    dual: Vec<f64>,
    pub training_target_mean: f64,
}

impl KernelRidge {
    pub fn fit(config: &KernelRidgeConfig, x: &Matrix, y: &[f64]) -> Result<Self> {
        config.validate()?;
        if y.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let kernel = Kernel::new(config.kernel, config.gamma)?;
        let mut system = kernel.gram(x);
        for i in 0..y.len() {
            system.set(i, i, system.get(i, i) + config.alpha);
        }
        let dual = solve_spd(&system, y)?;
        Ok(KernelRidge {
            kernel,
            support: x.clone(),
            dual,
            training_target_mean: super::mean(y),
        })
    }

    pub fn dual_coefficients(&self) -> &[f64] {
        &self.dual
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn n_features(&self) -> usize {
        self.support.n_cols()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.support
            .rows()
            .zip(&self.dual)
            .map(|(s, a)| a * self.kernel.eval(s, row))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // (k(0,0) + λ)α = y  →  (1 + 1)α = 1
    #[test]
    fn single_point_dual() {
        let x = Matrix::from_rows(&[[0.0]]).unwrap();
        let cfg = KernelRidgeConfig {
            alpha: 1.0,
            kernel: KernelKind::Rbf,
            gamma: 1.0,
        };
        let m = KernelRidge::fit(&cfg, &x, &[1.0]).unwrap();
        assert_eq!(m.dual_coefficients(), &[0.5]);
        assert_eq!(m.predict_row(&[0.0]), 0.5);
    }

    #[test]
    fn huge_penalty_predicts_near_zero() {
        let x = Matrix::from_rows(&[[0.1, -0.4], [0.9, 0.3], [-0.7, 0.8], [0.2, 0.2]]).unwrap();
        let y = [1.0, -1.0, 0.5, 0.7];
        for kernel in [KernelKind::Rbf, KernelKind::Linear] {
            let cfg = KernelRidgeConfig {
                alpha: 1e9,
                kernel,
                gamma: 0.5,
            };
            let m = KernelRidge::fit(&cfg, &x, &y).unwrap();
            for row in x.rows() {
                assert!(m.predict_row(row).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn invalid_hyperparameters() {
        let x = Matrix::from_rows(&[[0.0]]).unwrap();
        for cfg in [
            KernelRidgeConfig {
                alpha: 0.0,
                ..Default::default()
            },
            KernelRidgeConfig {
                gamma: -1.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                KernelRidge::fit(&cfg, &x, &[1.0]),
                Err(Error::InvalidConfig(_))
            ));
        }
    }
}
