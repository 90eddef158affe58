use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_K_FOLDS: usize = 5;

/// `k` disjoint folds covering `0..n`, sizes within one of each other.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Each fold's indices in ascending order.
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn n_rows(&self) -> usize {
        self.folds.iter().map(Vec::len).sum()
    }

    /// Every index outside fold `f`, ascending.
    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != f)
            .flat_map(|(_, fold)| fold.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Seeded shuffle of `0..n` dealt round-robin into `k` folds.
pub fn kfold_plan(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || k > n {
        return Err(Error::BadK { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::stream(seed, "kfold", 0));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, idx) in order.into_iter().enumerate() {
        folds[pos % k].push(idx);
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(FoldPlan { k, folds, seed })
}
