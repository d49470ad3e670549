//! Log-log scaling fit over bench rows and envelope calibration.

use std::fmt;

use qbmm_core::scaling::{fit_query_scaling, ols, FitError, LinearFit};

use crate::bench::{BenchRow, Envelope};

/// Slope window for a PASS verdict.
pub const SLOPE_RANGE: (f64, f64) = (0.8, 1.2);
/// Minimum rows a fit accepts.
pub const MIN_ROWS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub fit: LinearFit,
    pub rows: usize,
    pub rows_within_bound: usize,
}

impl FitReport {
    pub fn slope_ok(&self) -> bool {
        (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&self.fit.slope)
    }

    pub fn all_within_bound(&self) -> bool {
        self.rows_within_bound == self.rows
    }

    pub fn pass(&self) -> bool {
        self.slope_ok() && self.all_within_bound()
    }
}

impl fmt::Display for FitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows: {}", self.rows)?;
        writeln!(f, "slope: {:.4}", self.fit.slope)?;
        writeln!(f, "intercept: {:.4}", self.fit.intercept)?;
        writeln!(f, "r_squared: {:.4}", self.fit.r_squared)?;
        writeln!(f, "within_bound: {}/{}", self.rows_within_bound, self.rows)?;
        write!(f, "{}", if self.pass() { "PASS" } else { "FAIL" })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitInputError {
    #[error("need at least {MIN_ROWS} rows, got {0}")]
    TooFewRows(usize),
    #[error("need at least two distinct values of n*sqrt(ell)")]
    Degenerate,
}

/// OLS of `ln(queries_total)` on `ln(n * sqrt(ell_actual + 1))`.
pub fn fit_rows(rows: &[BenchRow]) -> Result<FitReport, FitInputError> {
    if rows.len() < MIN_ROWS {
        return Err(FitInputError::TooFewRows(rows.len()));
    }
    let points: Vec<(usize, usize, u64)> = rows
        .iter()
        .map(|r| (r.n, r.ell_actual, r.queries_total))
        .collect();
    let fit = fit_query_scaling(points).map_err(|e| match e {
        FitError::Degenerate | FitError::TooFewPoints(_) => FitInputError::Degenerate,
    })?;
    Ok(FitReport {
        fit,
        rows: rows.len(),
        rows_within_bound: rows.iter().filter(|r| r.within_bound).count(),
    })
}

/// Quantile of the per-`n` ratios that sets the polylog growth in [`calibrate`].
pub const CALIBRATION_QUANTILE: f64 = 0.9;

/// Envelope calibration of `C_fit` and `k_log`.
///
/// For each `n`, takes the [`CALIBRATION_QUANTILE`] of the ratios
/// `queries / (n * sqrt(ell + 1))`; `k_log` is the OLS slope of their logs on
/// `ln(log2(n + 2))`, floored at 0. `C_fit` is then the smallest constant that
/// covers every row.
pub fn calibrate(rows: &[BenchRow]) -> Option<Envelope> {
    if rows.is_empty() {
        return None;
    }
    let base = |r: &BenchRow| {
        r.queries_total as f64 / (r.n as f64 * (r.ell_actual as f64 + 1.0).sqrt())
    };
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let levels = ns.iter().map(|&n| {
        let mut ratios: Vec<f64> = rows.iter().filter(|r| r.n == n).map(base).collect();
        ratios.sort_by(f64::total_cmp);
        let idx = ((ratios.len() - 1) as f64 * CALIBRATION_QUANTILE).round() as usize;
        let x = ((n as f64 + 2.0).log2()).ln();
        (x, ratios[idx].max(f64::MIN_POSITIVE).ln())
    });
    let k_log = ols(levels).map(|fit| fit.slope.max(0.0)).unwrap_or(0.0);
    let c_fit = rows
        .iter()
        .map(|r| base(r) / (r.n as f64 + 2.0).log2().powf(k_log))
        .fold(0.0, f64::max);
    Some(Envelope { c_fit, k_log })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, ell: usize, q: u64) -> BenchRow {
        BenchRow {
            n,
            family: "random".into(),
            seed: 0,
            mode: "forced".into(),
            ell_actual: ell,
            witnesses: 0,
            queries_a: q,
            queries_b: 0,
            queries_total: q,
            bound: f64::INFINITY,
            within_bound: true,
            correct: true,
            failure_budget: 0.0,
            wall_ms: 0.0,
        }
    }

    #[test]
    fn exact_power_law_passes() {
        let rows: Vec<BenchRow> = [8, 16, 32, 64]
            .iter()
            .flat_map(|&n| [0usize, 15, 99].map(move |l| (n, l)))
            .map(|(n, l)| row(n, l, (n as f64 * ((l + 1) as f64).sqrt()).round() as u64))
            .collect();
        let report = fit_rows(&rows).unwrap();
        assert!((report.fit.slope - 1.0).abs() < 1e-3);
        assert!((report.fit.r_squared - 1.0).abs() < 1e-3);
        assert!(report.pass());
        assert!(report.to_string().ends_with("PASS"));
    }

    #[test]
    fn constant_queries_fail() {
        let rows: Vec<BenchRow> = (1..=12).map(|n| row(n * 4, n, 1000)).collect();
        let report = fit_rows(&rows).unwrap();
        assert_eq!(report.fit.slope, 0.0);
        assert!(!report.pass());
    }

    #[test]
    fn degenerate_and_short_inputs() {
        let same: Vec<BenchRow> = (0..12).map(|s| row(16, 3, 100 + s)).collect();
        assert_eq!(fit_rows(&same), Err(FitInputError::Degenerate));
        assert_eq!(fit_rows(&same[..3]), Err(FitInputError::TooFewRows(3)));
    }

    #[test]
    fn out_of_bound_row_fails() {
        let mut rows: Vec<BenchRow> = (1..=12)
            .map(|n| row(n, 0, n as u64))
            .collect();
        rows[3].within_bound = false;
        let report = fit_rows(&rows).unwrap();
        assert!(report.slope_ok() && !report.pass());
    }

    #[test]
    fn calibration_covers_its_rows() {
        let q = |n: usize, l: usize| {
            let lg = (n as f64 + 2.0).log2();
            (3.0 * n as f64 * ((l + 1) as f64).sqrt() * lg.powf(1.5)) as u64
        };
        let rows: Vec<BenchRow> = [8, 16]
            .iter()
            .flat_map(|&n| [0usize, 7, 40].map(move |l| row(n, l, q(n, l))))
            .collect();
        let env = calibrate(&rows).unwrap();
        assert!((env.k_log - 1.5).abs() < 0.01, "{env:?}");
        for r in &rows {
            let bound = qbmm_core::cost_bound(r.n, r.ell_actual, env.c_fit, env.k_log);
            assert!(r.queries_total as f64 <= bound * (1.0 + 1e-12));
        }
        assert!(calibrate(&[]).is_none());
    }
}
