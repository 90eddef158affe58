//! Synthetic Table-1 data with a planted signal.
//!
//! `score` is a noisy increasing function of `CHits` and `CRuns` only, so
//! importance rankings have a known answer. Career columns are the
//! current-season value plus independent per-column increments, which keeps
//! them from being near copies of each other.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::schema_columns;
use crate::seed;

pub fn generate_rows(n: usize, seed: u64) -> Vec<[f64; 17]> {
    let mut rng = seed::stream(seed, "gen-data", 0);
    let noise = Normal::new(0.0, 25.0).expect("finite parameters");
    (0..n)
        .map(|_| {
            let years = rng.random_range(1..=20) as f64;
            let prior = years - 1.0;
            let at_bat = rng.random_range(150.0..650.0f64).round();
            let hits = (at_bat * rng.random_range(0.2..0.32)).round();
            let hm_run = (hits * rng.random_range(0.0..0.2)).round();
            let runs = (hits * rng.random_range(0.35..0.65)).round();
            let rbi = (hits * rng.random_range(0.3..0.7)).round();
            let walks = (at_bat * rng.random_range(0.04..0.15)).round();

            let mut career = |current: f64, lo: f64, hi: f64| {
                (current + prior * rng.random_range(lo..hi)).round()
            };
            let c_at_bat = career(at_bat, 100.0, 600.0);
            let c_hits = career(hits, 5.0, 220.0);
            let c_hm_run = career(hm_run, 0.0, 25.0);
            let c_runs = career(runs, 3.0, 120.0);
            let c_rbi = career(rbi, 10.0, 100.0);
            let c_walks = career(walks, 5.0, 80.0);

            let put_outs = rng.random_range(0.0..1400.0f64).round();
            let assists = rng.random_range(0.0..450.0f64).round();
            let errors = rng.random_range(0.0..30.0f64).round();

            let signal = 100.0 + 0.3 * c_hits + 0.6 * c_runs;
            let score = ((signal + noise.sample(&mut rng)).max(0.0) * 10.0).round() / 10.0;

            [
                at_bat, hits, hm_run, runs, rbi, walks, years, c_at_bat, c_hits, c_hm_run,
                c_runs, c_rbi, c_walks, put_outs, assists, errors, score,
            ]
        })
        .collect()
}

pub fn generate_csv(n: usize, seed: u64) -> String {
    let mut out = schema_columns().collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in generate_rows(n, seed) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}
