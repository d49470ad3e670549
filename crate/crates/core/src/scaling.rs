//! Ordinary least squares for log-log scaling fits.

use core::fmt;
use libm::{log, sqrt};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitError {
    /// Fewer than two points.
    TooFewPoints(usize),
    /// All abscissae are equal.
    Degenerate,
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitError::TooFewPoints(k) => write!(f, "need at least two points, got {k}"),
            FitError::Degenerate => write!(f, "degenerate design: all x values are equal"),
        }
    }
}

impl core::error::Error for FitError {}

/// Least-squares line through `(x, y)` pairs.
///
/// `r_squared` is 1 when the responses are constant and fitted exactly.
pub fn ols<I>(points: I) -> Result<LinearFit, FitError>
where
    I: IntoIterator<Item = (f64, f64)> + Clone,
{
    let (mut k, mut sx, mut sy) = (0usize, 0.0, 0.0);
    for (x, y) in points.clone() {
        k += 1;
        sx += x;
        sy += y;
    }
    if k < 2 {
        return Err(FitError::TooFewPoints(k));
    }
    let (mx, my) = (sx / k as f64, sy / k as f64);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in points.clone() {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let scale = sqrt(points.clone().into_iter().map(|(x, _)| x * x).sum::<f64>() / k as f64);
    if sxx <= 1e-24 * scale.max(1.0) {
        return Err(FitError::Degenerate);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .into_iter()
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r_squared = if syy > 0.0 {
        1.0 - ss_res / syy
    } else if ss_res <= 1e-24 {
        1.0
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        points: k,
    })
}

/// Fits `ln(queries)` against `ln(n * sqrt(ell + 1))`.
pub fn fit_query_scaling<I>(rows: I) -> Result<LinearFit, FitError>
where
    I: IntoIterator<Item = (usize, usize, u64)> + Clone,
{
    ols(rows.into_iter().map(|(n, ell, q)| {
        (
            log(n as f64 * sqrt(ell as f64 + 1.0)),
            log((q as f64).max(1.0)),
        )
    }).collect::<alloc::vec::Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn exact_power_law() {
        let rows: Vec<(usize, usize, u64)> = [(8, 63), (16, 255), (32, 15), (64, 3)]
            .into_iter()
            .map(|(n, ell)| (n, ell, (n as f64 * sqrt(ell as f64 + 1.0)).round() as u64))
            .collect();
        let fit = fit_query_scaling(rows).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_response_has_zero_slope() {
        let fit = ols([(1.0, 5.0), (2.0, 5.0), (3.0, 5.0)]).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn degenerate_and_tiny_inputs() {
        assert_eq!(ols([(2.0, 1.0), (2.0, 3.0)]), Err(FitError::Degenerate));
        assert_eq!(ols([(2.0, 1.0)]), Err(FitError::TooFewPoints(1)));
    }

    #[test]
    fn noisy_line() {
        let pts: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let x = i as f64;
                (x, 3.0 + 0.5 * x + if i % 2 == 0 { 0.1 } else { -0.1 })
            })
            .collect();
        let fit = ols(pts).unwrap();
        assert!((fit.slope - 0.5).abs() < 0.01);
        assert!(fit.r_squared > 0.99);
    }
}
