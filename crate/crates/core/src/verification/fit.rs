use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Ordinary least-squares fit of `log y = intercept + slope * log x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// 95% confidence interval on the slope (Student t, `n - 2` dof).
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Fits a power law through `(T, regret)` points.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::DegenerateFit(format!("nonpositive or non-finite point ({x}, {y})")));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all abscissae are equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let dof = n - 2.0;
    let slope_stderr = (ssr / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(LogLogFit {
        slope,
        intercept,
        slope_stderr,
        ci_low: slope - t * slope_stderr,
        ci_high: slope + t * slope_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> =
            [1e4, 3e4, 1e5, 3e5, 1e6].iter().map(|&t: &f64| (t, 2.5 * t.powf(-2.0 / 3.0))).collect();
        let fit = fit_loglog_slope(&pts).unwrap();
        assert!((fit.slope + 2.0 / 3.0).abs() < 1e-12);
        assert!((fit.intercept - 2.5f64.ln()).abs() < 1e-10);
        assert!(fit.slope_stderr < 1e-10);
    }

    #[test]
    fn constant_regret_has_zero_slope() {
        let fit = fit_loglog_slope(&[(10.0, 0.3), (100.0, 0.3), (1000.0, 0.3)]).unwrap();
        assert!(fit.slope.abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 2.0)]), Err(Error::DegenerateFit(_))));
        assert!(matches!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]), Err(Error::DegenerateFit(_))));
        assert!(matches!(fit_loglog_slope(&[(5.0, 1.0), (5.0, 2.0), (5.0, 1.0)]), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn noisy_fit_ci_covers_truth() {
        let pts = [(1e3, 1.1e-2), (1e4, 2.0e-3), (1e5, 5.2e-4), (1e6, 9.5e-5)];
        let fit = fit_loglog_slope(&pts).unwrap();
        assert!(fit.ci_low < fit.slope && fit.slope < fit.ci_high);
        assert!(fit.ci_low < -2.0 / 3.0 && -2.0 / 3.0 < fit.ci_high);
    }
}
