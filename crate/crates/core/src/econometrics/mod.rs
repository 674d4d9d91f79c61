//! Unit-root tests, VAR estimation, Granger causality and break detection.

mod breaks;
mod critical_values;
mod granger;
mod ols;
mod unit_root;
mod var;

use crate::error::{Error, Result};
use crate::timeseries::AlignedPanel;

pub use breaks::{
    compare_break_magnitudes, detect_break, detect_break_in_series, trimmed_interior, BreakResult, WelchResult,
    DEFAULT_TRIM, MIN_BREAK_LENGTH,
};
pub use critical_values::{adf_critical_values, sup_wald_critical_value, ADF_CONSTANT, KPSS_LEVEL, SUP_WALD};
pub use granger::{granger_test, granger_test_block, write_granger_report, GrangerResult};
pub use ols::{least_squares, ols, LeastSquares};
pub use unit_root::{adf_test, kpss_bandwidth, kpss_test, PBand, UnitRootResult, UnitRootTest};
pub use var::{fit_var, format_p_value, select_lag_bic, Estimate, VarModel};

/// Complete, equally long columns ready for estimation. Rows are taken to be
/// consecutive periods.
#[derive(Clone, Debug, PartialEq)]
pub struct VarData {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl VarData {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::LengthMismatch {
                left: names.len(),
                right: columns.len(),
            });
        }
        if names.is_empty() {
            return Err(Error::InvalidArgument("no variables".into()));
        }
        let n = columns[0].len();
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::LengthMismatch { left: n, right: c.len() });
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite value in panel".into()));
        }
        Ok(Self { names, columns })
    }

    /// Complete cases of `panel`. Rows with a gap are dropped, so lags taken
    /// across a gap skip the missing period; a warning is logged when this
    /// happens away from the edges.
    pub fn from_panel(panel: &AlignedPanel) -> Result<Self> {
        let complete: Vec<bool> = (0..panel.n_rows())
            .map(|r| panel.columns.iter().all(|c| c[r].is_some()))
            .collect();
        let first = complete.iter().position(|&c| c);
        let last = complete.iter().rposition(|&c| c);
        if let (Some(a), Some(b)) = (first, last) {
            if complete[a..=b].iter().any(|&c| !c) {
                log::warn!("panel has interior gaps; incomplete rows dropped before lagging");
            }
        }
        let rows = panel.complete_rows();
        let columns = (0..panel.n_vars()).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Self::new(panel.names.clone(), columns)
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.columns[self.index_of(name)?])
    }

    pub fn select(&self, names: &[&str]) -> Result<Self> {
        let idx = names.iter().map(|n| self.index_of(n)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            names: idx.iter().map(|&i| self.names[i].clone()).collect(),
            columns: idx.iter().map(|&i| self.columns[i].clone()).collect(),
        })
    }
}
