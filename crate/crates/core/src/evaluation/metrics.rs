use crate::error::{Error, Result};

fn check_lengths(y: &[f64], pred: &[f64]) -> Result<()> {
    if y.len() != pred.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: pred.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyVectors);
    }
    Ok(())
}

/// Coefficient of determination, `1 − SS_res / SS_tot`. Unbounded below.
pub fn r_squared(y: &[f64], pred: &[f64]) -> Result<f64> {
    check_lengths(y, pred)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if y.iter().all(|&v| v == y[0]) || ss_tot == 0.0 {
        return Err(Error::ConstantTarget);
    }
    let ss_res: f64 = y.iter().zip(pred).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn mae(y: &[f64], pred: &[f64]) -> Result<f64> {
    check_lengths(y, pred)?;
    Ok(y.iter().zip(pred).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64)
}

pub fn rmse(y: &[f64], pred: &[f64]) -> Result<f64> {
    check_lengths(y, pred)?;
    let mse = y.iter().zip(pred).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64;
    Ok(mse.sqrt())
}

/// Arithmetic mean and sample standard deviation (0 for a single value).
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_squared_examples() {
        assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap(), 0.0);
        // SS_res = 1, SS_tot = 5
        let r2 = r_squared(&[1.0, 2.0, 3.0, 4.0], &[1.5, 2.5, 2.5, 3.5]).unwrap();
        assert!((r2 - 0.8).abs() < 1e-12);
        assert!(r_squared(&[1.0, 2.0], &[10.0, -10.0]).unwrap() < -100.0);
    }

    #[test]
    fn r_squared_errors() {
        assert_eq!(r_squared(&[2.0, 2.0], &[1.0, 3.0]).unwrap_err(), Error::ConstantTarget);
        assert_eq!(r_squared(&[5.0], &[5.0]).unwrap_err(), Error::ConstantTarget);
        assert_eq!(
            r_squared(&[1.0, 2.0], &[1.0]).unwrap_err(),
            Error::LengthMismatch { left: 2, right: 1 }
        );
    }

    #[test]
    fn mae_and_rmse_examples() {
        assert_eq!(mae(&[0.0, 0.0], &[1.0, 3.0]).unwrap(), 2.0);
        assert_eq!(mae(&[4.0, 1.0], &[4.0, 1.0]).unwrap(), 0.0);
        assert!((rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(rmse(&[4.0, 1.0], &[4.0, 1.0]).unwrap(), 0.0);
        assert_eq!(mae(&[], &[]).unwrap_err(), Error::EmptyVectors);
        assert_eq!(rmse(&[], &[]).unwrap_err(), Error::EmptyVectors);
    }

    #[test]
    fn sample_std() {
        let (m, s) = mean_and_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_std(&[4.0]), (4.0, 0.0));
    }
}
