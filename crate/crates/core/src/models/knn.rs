//! Brute-force k-nearest-neighbours regression (Euclidean, uniform weights).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 5 }
    }
}

impl KnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    k: usize,
    x: Matrix,
    y: Vec<f64>,
    pub training_target_mean: f64,
}

impl Knn {
    pub fn fit(config: &KnnConfig, x: &Matrix, y: &[f64]) -> Result<Self> {
        config.validate()?;
        if y.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if config.k > y.len() {
            return Err(Error::KTooLarge {
                k: config.k,
                n_train: y.len(),
            });
        }
        Ok(Knn {
            k: config.k,
            x: x.clone(),
            y: y.to_vec(),
            training_target_mean: super::mean(y),
        })
    }

    pub fn n_features(&self) -> usize {
        self.x.n_cols()
    }

    /// Training rows nearest to `query`, closest first; equal distances go to the lower index.
    pub fn neighbors(&self, query: &[f64]) -> Vec<usize> {
        let mut scored: Vec<(f64, usize)> = self
            .x
            .rows()
            .enumerate()
            .map(|(i, row)| (squared_distance(row, query), i))
            .collect();
        let by_distance_then_index =
            |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < scored.len() {
            scored.select_nth_unstable_by(self.k - 1, by_distance_then_index);
            scored.truncate(self.k);
        }
        scored.sort_unstable_by(by_distance_then_index);
        scored.into_iter().map(|(_, i)| i).collect()
    }

    /// Mean target over the neighbours, summed nearest first.
    pub fn predict_row(&self, query: &[f64]) -> f64 {
        let sum: f64 = self.neighbors(query).iter().map(|&i| self.y[i]).sum();
        sum / self.k as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> (Matrix, Vec<f64>) {
        (Matrix::from_rows(&[[0.0], [10.0]]).unwrap(), vec![0.0, 10.0])
    }

    #[test]
    fn nearest_point_and_pair_average() {
        let (x, y) = line();
        let one = Knn::fit(&KnnConfig { k: 1 }, &x, &y).unwrap();
        assert_eq!(one.predict_row(&[1.0]), 0.0);
        let two = Knn::fit(&KnnConfig { k: 2 }, &x, &y).unwrap();
        assert_eq!(two.predict_row(&[1.0]), 5.0);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let x = Matrix::from_rows(&[[-1.0], [1.0]]).unwrap();
        let knn = Knn::fit(&KnnConfig { k: 1 }, &x, &[3.0, 8.0]).unwrap();
        assert_eq!(knn.neighbors(&[0.0]), vec![0]);
        assert_eq!(knn.predict_row(&[0.0]), 3.0);
    }

    #[test]
    fn k_too_large() {
        let (x, y) = line();
        assert_eq!(
            Knn::fit(&KnnConfig { k: 3 }, &x, &y).unwrap_err(),
            Error::KTooLarge { k: 3, n_train: 2 }
        );
        assert!(Knn::fit(&KnnConfig { k: 0 }, &x, &y).is_err());
    }
}
