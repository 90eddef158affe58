//! Plain-text console tables.

use std::io::IsTerminal;

use crate::dataset::{ColumnSummary, PERCENTILE_LEVELS};
use crate::evaluation::{EvaluationReport, Outcome};
use crate::importance::ImportanceReport;

/// Color is used only on a terminal, and never when `NO_COLOR` is set.
pub fn color_enabled(no_color_flag: bool) -> bool {
    let env_off = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
    !no_color_flag && !env_off && std::io::stdout().is_terminal()
}

/// `0.2271` -> `"22.7%"`.
pub fn percent(v: f64) -> String {
    format!("{:.1}%", v * 100.0)
}

fn bold(s: &str, color: bool) -> String {
    if color {
        format!("\x1b[1m{s}\x1b[0m")
    } else {
        s.to_string()
    }
}

/// Left-aligns the first column, right-aligns the rest.
fn render(header: &[String], rows: &[Vec<String>], color: bool) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = bold(&line(header), color);
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn benchmark_table(report: &EvaluationReport, color: bool) -> String {
    let header = strings(&["Model", "Val R²", "CV R² (mean ± std)", "Val MAE", "Val RMSE", "Time (s)"]);
    let mut rows: Vec<Vec<String>> = report
        .ranked()
        .into_iter()
        .map(|m| match &m.outcome {
            Outcome::Ok {
                val_r2,
                val_mae,
                val_rmse,
                cv,
                total_time_s,
                ..
            } => vec![
                m.name.clone(),
                percent(*val_r2),
                format!("{} ± {}", percent(cv.mean_r2), percent(cv.std_r2)),
                format!("{val_mae:.2}"),
                format!("{val_rmse:.2}"),
                format!("{total_time_s:.3}"),
            ],
            Outcome::Error { .. } => unreachable!("ranked() skips failed models"),
        })
        .collect();
    for m in &report.models {
        if let Outcome::Error { message } = &m.outcome {
            let mut row = vec![m.name.clone(), "failed".to_string()];
            row.extend(std::iter::repeat_n(String::new(), 3));
            row.push(message.clone());
            rows.push(row);
        }
    }
    render(&header, &rows, color)
}

pub fn describe_table(columns: &[(String, ColumnSummary)], color: bool) -> String {
    let mut header = strings(&["Column", "Count", "Mean", "Std", "Min", "Max"]);
    header.extend(PERCENTILE_LEVELS.iter().map(|p| format!("p{p}")));
    let rows: Vec<Vec<String>> = columns
        .iter()
        .map(|(name, s)| {
            let mut row = vec![
                name.clone(),
                s.count.to_string(),
                format!("{:.2}", s.mean),
                format!("{:.2}", s.std),
                format!("{:.2}", s.min),
                format!("{:.2}", s.max),
            ];
            row.extend(
                PERCENTILE_LEVELS
                    .iter()
                    .map(|&p| format!("{:.2}", s.percentile(p).unwrap_or(f64::NAN))),
            );
            row
        })
        .collect();
    render(&header, &rows, color)
}

/// The `top` highest-ranked features.
pub fn importance_table(report: &ImportanceReport, top: usize, color: bool) -> String {
    let header = strings(&["Feature", "Weight", "Rank"]);
    let mut weights: Vec<_> = report.weights.iter().collect();
    weights.sort_by_key(|w| w.rank);
    weights.truncate(top);
    let rows: Vec<Vec<String>> = weights
        .into_iter()
        .map(|w| vec![w.feature.clone(), percent(w.weight), w.rank.to_string()])
        .collect();
    render(&header, &rows, color)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_format() {
        assert_eq!(percent(0.2271), "22.7%");
        assert_eq!(percent(-0.5), "-50.0%");
    }

    #[test]
    fn render_aligns_columns() {
        let out = render(
            &strings(&["a", "bb"]),
            &[strings(&["xyz", "1"]), strings(&["q", "22"])],
            false,
        );
        assert_eq!(out, "a    bb\n-------\nxyz   1\nq    22\n");
    }
}
