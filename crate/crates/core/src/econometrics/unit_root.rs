use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

use super::critical_values::{adf_critical_values, KPSS_LEVEL};
use super::ols::ols;

pub const MIN_KPSS_LENGTH: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UnitRootTest {
    Adf,
    Kpss,
}

impl fmt::Display for UnitRootTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnitRootTest::Adf => "ADF",
            UnitRootTest::Kpss => "KPSS",
        })
    }
}

/// Coarse p-value bracket read off the critical-value table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum PBand {
    Below1,
    Below5,
    Below10,
    AtLeast10,
}

impl fmt::Display for PBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PBand::Below1 => "<0.01",
            PBand::Below5 => "<0.05",
            PBand::Below10 => "<0.10",
            PBand::AtLeast10 => ">=0.10",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnitRootResult {
    pub test: UnitRootTest,
    pub statistic: f64,
    pub lags_used: usize,
    pub nobs: usize,
    /// Critical values at 1%, 5% and 10%.
    pub critical_values: [f64; 3],
    pub p_band: PBand,
    pub reject_at_5pct: bool,
}

/// Rows of the ADF regression for lag `p` over `dy` indices `start..`.
fn adf_design(y: &[f64], dy: &[f64], p: usize, start: usize) -> (DMatrix<f64>, Vec<f64>) {
    let rows: Vec<usize> = (start..dy.len()).collect();
    let x = DMatrix::from_fn(rows.len(), 2 + p, |r, c| {
        let t = rows[r];
        match c {
            0 => 1.0,
            1 => y[t],
            _ => dy[t - (c - 1)],
        }
    });
    (x, rows.iter().map(|&t| dy[t]).collect())
}

/// Augmented Dickey-Fuller test with a constant. The lag order is chosen by
/// BIC over `0..=max_lag` on a common sample, then the chosen model is refit
/// on all usable observations.
pub fn adf_test(series: &[f64], max_lag: usize) -> Result<UnitRootResult> {
    let n = series.len();
    if n < 25 + max_lag {
        return Err(Error::InsufficientData(format!(
            "ADF needs at least {} observations, got {n}",
            25 + max_lag
        )));
    }
    // dy[t] = y[t+1] - y[t]; the regression for dy[t] uses level y[t]
    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();

    let mut best = (f64::INFINITY, 0usize);
    for p in 0..=max_lag {
        let (x, z) = adf_design(series, &dy, p, max_lag);
        let fit = ols(&x, &z)?;
        let m = z.len() as f64;
        let bic = m * (fit.rss(0) / m).ln() + (p + 2) as f64 * m.ln();
        if bic < best.0 {
            best = (bic, p);
        }
    }
    let lags = best.1;
    let (x, z) = adf_design(series, &dy, lags, lags);
    let fit = ols(&x, &z)?;
    let se = fit.std_errors(0)[1];
    let statistic = if se > 0.0 { fit.coef[(1, 0)] / se } else { f64::NEG_INFINITY };
    let nobs = z.len();
    let cv = adf_critical_values(nobs);
    let p_band = if statistic < cv[0] {
        PBand::Below1
    } else if statistic < cv[1] {
        PBand::Below5
    } else if statistic < cv[2] {
        PBand::Below10
    } else {
        PBand::AtLeast10
    };
    Ok(UnitRootResult {
        test: UnitRootTest::Adf,
        statistic,
        lags_used: lags,
        nobs,
        critical_values: cv,
        p_band,
        reject_at_5pct: statistic < cv[1],
    })
}

/// Newey-West bandwidth `floor(4 (n/100)^(1/4))`.
pub fn kpss_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// KPSS test of level stationarity with a Bartlett-kernel long-run variance.
pub fn kpss_test(series: &[f64]) -> Result<UnitRootResult> {
    let n = series.len();
    if n < MIN_KPSS_LENGTH {
        return Err(Error::InsufficientData(format!(
            "KPSS needs at least {MIN_KPSS_LENGTH} observations, got {n}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let e: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let l = kpss_bandwidth(n);

    let mut lrv = e.iter().map(|v| v * v).sum::<f64>();
    for s in 1..=l {
        let w = 1.0 - s as f64 / (l as f64 + 1.0);
        let gamma: f64 = (s..n).map(|t| e[t] * e[t - s]).sum();
        lrv += 2.0 * w * gamma;
    }
    lrv /= n as f64;

    let mut partial = 0.0;
    let mut ss = 0.0;
    for v in &e {
        partial += v;
        ss += partial * partial;
    }
    let scale = mean.abs().max(1.0);
    let statistic = if lrv <= f64::EPSILON * scale * scale {
        0.0
    } else {
        ss / ((n * n) as f64 * lrv)
    };

    let [(_, c10), (_, c5), _, (_, c1)] = KPSS_LEVEL;
    let p_band = if statistic > c1 {
        PBand::Below1
    } else if statistic > c5 {
        PBand::Below5
    } else if statistic > c10 {
        PBand::Below10
    } else {
        PBand::AtLeast10
    };
    Ok(UnitRootResult {
        test: UnitRootTest::Kpss,
        statistic,
        lags_used: l,
        nobs: n,
        critical_values: [c1, c5, c10],
        p_band,
        reject_at_5pct: statistic > c5,
    })
}
