//! Logistic regression bent into a regressor.
//!
//! Targets are min-max scaled into `[δ, 1 − δ]` and mapped through the
//! logit; a ridge-penalised linear model (unpenalised intercept) is fit to
//! those log-odds. Predictions go back through the sigmoid, the inverse
//! min-max map, and are clamped to the training target range.

use serde::{Deserialize, Serialize};

use super::linalg::solve_spd;
use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogitAdaptedConfig {
    pub alpha: f64,
    /// δ, the margin kept away from 0 and 1 before taking the logit.
    pub clamp: f64,
}

impl Default for LogitAdaptedConfig {
    fn default() -> Self {
        LogitAdaptedConfig {
            alpha: 1.0,
            clamp: 0.01,
        }
    }
}

impl LogitAdaptedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if !(self.clamp > 0.0 && self.clamp < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "clamp must lie in (0, 0.5), got {}",
                self.clamp
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitAdapted {
    weights: Vec<f64>,
    intercept: f64,
    y_min: f64,
    y_max: f64,
    clamp: f64,
    pub training_target_mean: f64,
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

impl LogitAdapted {
    pub fn fit(config: &LogitAdaptedConfig, x: &Matrix, y: &[f64]) -> Result<Self> {
        config.validate()?;
        let n = y.len();
        if n == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        let p = x.n_cols();
        let y_min = y.iter().copied().fold(f64::INFINITY, f64::min);
        let y_max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut model = LogitAdapted {
            weights: vec![0.0; p],
            intercept: 0.0,
            y_min,
            y_max,
            clamp: config.clamp,
            training_target_mean: super::mean(y),
        };
        if y_min == y_max {
            return Ok(model);
        }

        let delta = config.clamp;
        let span = y_max - y_min;
        let z: Vec<f64> = y
            .iter()
            .map(|v| logit(delta + (1.0 - 2.0 * delta) * (v - y_min) / span))
            .collect();
        let z_mean = super::mean(&z);
        let x_mean: Vec<f64> = (0..p)
            .map(|j| x.rows().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();

        let mut gram = Matrix::zeros(p, p);
        let mut rhs = vec![0.0; p];
        for (row, zi) in x.rows().zip(&z) {
            let centred: Vec<f64> = row.iter().zip(&x_mean).map(|(v, m)| v - m).collect();
            for a in 0..p {
                rhs[a] += centred[a] * (zi - z_mean);
                for b in 0..=a {
                    let v = gram.get(a, b) + centred[a] * centred[b];
                    gram.set(a, b, v);
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                gram.set(b, a, gram.get(a, b));
            }
            gram.set(a, a, gram.get(a, a) + config.alpha);
        }
        let weights = solve_spd(&gram, &rhs)?;
        model.intercept = z_mean - dot(&x_mean, &weights);
        model.weights = weights;
        Ok(model)
    }

    pub fn is_constant(&self) -> bool {
        self.y_min == self.y_max
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        if self.is_constant() {
            return self.y_min;
        }
        let s = sigmoid(dot(&self.weights, row) + self.intercept);
        let scaled = (s - self.clamp) / (1.0 - 2.0 * self.clamp);
        (self.y_min + scaled * (self.y_max - self.y_min)).clamp(self.y_min, self.y_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_target() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let m = LogitAdapted::fit(&LogitAdaptedConfig::default(), &x, &[7.0; 3]).unwrap();
        assert!(m.is_constant());
        assert_eq!(m.predict_row(&[100.0]), 7.0);
    }

    #[test]
    fn monotone_and_in_range() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 / 10.0 - 1.0).collect();
        let x = Matrix::from_vec(20, 1, xs.clone()).unwrap();
        let y: Vec<f64> = xs.iter().map(|v| 3.0 * v + 0.2 * (7.0 * v).sin()).collect();
        let m = LogitAdapted::fit(&LogitAdaptedConfig::default(), &x, &y).unwrap();
        let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut last = f64::NEG_INFINITY;
        for q in -40..=40 {
            let p = m.predict_row(&[q as f64 / 10.0]);
            assert!(p >= last && p >= lo && p <= hi);
            last = p;
        }
    }

    #[test]
    fn clamp_bounds() {
        for clamp in [0.0, 0.5, 0.7] {
            let cfg = LogitAdaptedConfig { alpha: 1.0, clamp };
            assert!(cfg.validate().is_err());
        }
    }
}
