//! Reference implementations shared by the integration test targets.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tabreg::matrix::Matrix;

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.random_range(-3.0..3.0)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

pub fn random_target(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-10.0..10.0)).collect()
}

/// Full O(n²) scan: sort every training row by (distance, index).
pub fn brute_knn(x: &Matrix, y: &[f64], q: &[f64], k: usize) -> f64 {
    let mut d: Vec<(f64, usize)> = (0..x.n_rows())
        .map(|i| {
            let s: f64 = x.row(i).iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            (s, i)
        })
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d[..k].iter().map(|&(_, i)| y[i]).sum::<f64>() / k as f64
}

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
    (-gamma * d).exp()
}
