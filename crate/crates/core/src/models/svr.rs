//! ε-insensitive support vector regression trained by SMO.
//!
//! Works on the single-variable form of the ε-SVR dual:
//!
//! ```text
//! maximise  D(β) = yᵀβ − ½ βᵀKβ − ε‖β‖₁   s.t.  Σβᵢ = 0,  −C ≤ βᵢ ≤ C
//! ```
//!
//! Each step moves one maximal-violating pair `(i, j)` along `eᵢ − eⱼ`,
//! which keeps `Σβ = 0`, and takes the exact maximiser of the (concave,
//! piecewise quadratic) objective on that line. Steps never decrease `D`.

use serde::{Deserialize, Serialize};

use super::kernel::{Kernel, KernelKind};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrConfig {
    pub c: f64,
    pub epsilon: f64,
    pub kernel: KernelKind,
    pub gamma: f64,
    /// Maximum number of sweeps; one sweep is `n_train` pair updates.
    pub max_iter: usize,
    /// Stop once the maximal KKT violation drops below this.
    pub tol: f64,
}

impl Default for SvrConfig {
    fn default() -> Self {
        SvrConfig {
            c: 1.0,
            epsilon: 0.1,
            kernel: KernelKind::Rbf,
            gamma: 1.0 / 16.0,
            max_iter: 1000,
            tol: 1e-3,
        }
    }
}

impl SvrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!("C must be > 0, got {}", self.c)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        Kernel::new(self.kernel, self.gamma).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svr {
    kernel: Kernel,
    /// Training rows with a non-zero coefficient.
    support: Matrix,
    coefficients: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub sweeps: usize,
    /// Dual objective after each completed sweep.
    pub objective_trace: Vec<f64>,
    pub c: f64,
    n_features: usize,
    pub training_target_mean: f64,
}

struct Solver<'a> {
    gram: Matrix,
    y: &'a [f64],
    beta: Vec<f64>,
    /// `gᵢ = yᵢ − (Kβ)ᵢ`, the residual before the bias.
    grad: Vec<f64>,
    c: f64,
    eps: f64,
}

impl Solver<'_> {
    fn objective(&self) -> f64 {
        let quad: f64 = self
            .beta
            .iter()
            .zip(self.y.iter().zip(&self.grad))
            .map(|(b, (y, g))| b * (y + g))
            .sum();
        0.5 * quad - self.eps * self.beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    /// Slope of `D` when `βᵢ` grows.
    fn up(&self, i: usize) -> f64 {
        if self.beta[i] >= 0.0 {
            self.grad[i] - self.eps
        } else {
            self.grad[i] + self.eps
        }
    }

    /// Minus the slope of `D` when `βⱼ` shrinks.
    fn down(&self, j: usize) -> f64 {
        if self.beta[j] > 0.0 {
            self.grad[j] - self.eps
        } else {
            self.grad[j] + self.eps
        }
    }

    /// `(i, max up, j, min down)` over the indices free to move that way.
    fn most_violating(&self) -> Option<(usize, f64, usize, f64)> {
        let mut best_up: Option<(usize, f64)> = None;
        let mut best_down: Option<(usize, f64)> = None;
        for k in 0..self.beta.len() {
            if self.beta[k] < self.c {
                let u = self.up(k);
                if best_up.is_none_or(|(_, v)| u > v) {
                    best_up = Some((k, u));
                }
            }
            if self.beta[k] > -self.c {
                let d = self.down(k);
                if best_down.is_none_or(|(_, v)| d < v) {
                    best_down = Some((k, d));
                }
            }
        }
        let (i, u) = best_up?;
        let (j, d) = best_down?;
        Some((i, u, j, d))
    }

    /// Gain in `D` from moving `t` along `eᵢ − eⱼ`.
    fn gain(&self, i: usize, j: usize, eta: f64, t: f64) -> f64 {
        let (bi, bj) = (self.beta[i], self.beta[j]);
        t * (self.grad[i] - self.grad[j]) - 0.5 * eta * t * t
            - self.eps * ((bi + t).abs() - bi.abs() + (bj - t).abs() - bj.abs())
    }

    /// Exact line maximiser on `[0, hi]`; returns `(t, gain)`.
    fn line_search(&self, i: usize, j: usize) -> (f64, f64) {
        let (bi, bj) = (self.beta[i], self.beta[j]);
        let hi = (self.c - bi).min(bj + self.c).max(0.0);
        let gram = &self.gram;
        let eta = gram.get(i, i) + gram.get(j, j) - 2.0 * gram.get(i, j);

        let mut candidates = vec![hi];
        for kink in [-bi, bj] {
            if kink > 0.0 && kink < hi {
                candidates.push(kink);
            }
        }
        if eta > 1e-15 {
            let slope = self.grad[i] - self.grad[j];
            for si in [-1.0, 1.0] {
                for sj in [-1.0, 1.0] {
                    let t = (slope - self.eps * (si - sj)) / eta;
                    if t > 0.0 {
                        candidates.push(t.min(hi));
                    }
                }
            }
        }
        candidates
            .into_iter()
            .map(|t| (t, self.gain(i, j, eta, t)))
            .fold((0.0, 0.0), |best, c| if c.1 > best.1 { c } else { best })
    }

    fn step(&mut self, i: usize, j: usize, t: f64) {
        let hi_i = self.c - self.beta[i];
        let hi_j = self.beta[j] + self.c;
        self.beta[i] = if t >= hi_i { self.c } else { self.beta[i] + t };
        self.beta[j] = if t >= hi_j { -self.c } else { self.beta[j] - t };
        for k in 0..self.grad.len() {
            self.grad[k] -= t * (self.gram.get(k, i) - self.gram.get(k, j));
        }
    }
}

impl Svr {
    pub fn fit(config: &SvrConfig, x: &Matrix, y: &[f64]) -> Result<Self> {
        config.validate()?;
        let n = y.len();
        if n == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        let kernel = Kernel::new(config.kernel, config.gamma)?;
        let mut solver = Solver {
            gram: kernel.gram(x),
            y,
            beta: vec![0.0; n],
            grad: y.to_vec(),
            c: config.c,
            eps: config.epsilon,
        };

        let mut converged = false;
        let mut sweeps = 0;
        let mut trace = Vec::new();
        'outer: while sweeps < config.max_iter {
            for _ in 0..n {
                let Some((i, up, j, down)) = solver.most_violating() else {
                    converged = true;
                    break 'outer;
                };
                if up - down < config.tol || i == j {
                    converged = true;
                    break 'outer;
                }
                let (t, gain) = solver.line_search(i, j);
                if !(gain > 0.0) {
                    // no representable ascent left along the best pair
                    converged = up - down < config.tol;
                    break 'outer;
                }
                solver.step(i, j, t);
            }
            sweeps += 1;
            trace.push(solver.objective());
        }
        let final_objective = solver.objective();
        if trace.last() != Some(&final_objective) {
            trace.push(final_objective);
        }

        let bias = match solver.most_violating() {
            Some((_, up, _, down)) => 0.5 * (up + down),
            None => super::mean(&solver.grad),
        };

        let support_rows: Vec<usize> = (0..n).filter(|&k| solver.beta[k] != 0.0).collect();
        Ok(Svr {
            kernel,
            support: x.select_rows(&support_rows),
            coefficients: support_rows.iter().map(|&k| solver.beta[k]).collect(),
            bias,
            converged,
            sweeps,
            objective_trace: trace,
            c: config.c,
            n_features: x.n_cols(),
            training_target_mean: super::mean(y),
        })
    }

    /// Non-zero dual coefficients, one per support row.
    pub fn dual_coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.support
            .rows()
            .zip(&self.coefficients)
            .map(|(s, b)| b * self.kernel.eval(s, row))
            .sum::<f64>()
            + self.bias
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_target_sits_in_the_tube() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [5.0]]).unwrap();
        for kernel in [KernelKind::Linear, KernelKind::Rbf] {
            let cfg = SvrConfig {
                kernel,
                ..Default::default()
            };
            let m = Svr::fit(&cfg, &x, &[3.0; 4]).unwrap();
            assert!(m.converged);
            for q in [-4.0, 0.0, 1.5, 10.0] {
                assert!((m.predict_row(&[q]) - 3.0).abs() <= cfg.epsilon + 1e-6);
            }
        }
    }

    #[test]
    fn exact_line_is_fit_within_the_tube() {
        let xs: Vec<f64> = (0..12).map(|i| i as f64 / 4.0 - 1.5).collect();
        let x = Matrix::from_vec(xs.len(), 1, xs.clone()).unwrap();
        let y: Vec<f64> = xs.iter().map(|v| 2.0 * v).collect();
        let cfg = SvrConfig {
            c: 100.0,
            epsilon: 0.1,
            kernel: KernelKind::Linear,
            tol: 1e-9,
            max_iter: 100_000,
            ..Default::default()
        };
        let m = Svr::fit(&cfg, &x, &y).unwrap();
        assert!(m.converged);
        for (row, t) in x.rows().zip(&y) {
            assert!((m.predict_row(row) - t).abs() <= 0.1 + 1e-6);
        }
    }

    #[test]
    fn rejects_bad_hyperparameters() {
        let x = Matrix::from_rows(&[[0.0]]).unwrap();
        for cfg in [
            SvrConfig {
                c: 0.0,
                ..Default::default()
            },
            SvrConfig {
                epsilon: -0.1,
                ..Default::default()
            },
        ] {
            assert!(Svr::fit(&cfg, &x, &[1.0]).is_err());
        }
    }
}
