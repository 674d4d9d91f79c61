use std::io::Write;

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

use super::ols::least_squares;
use super::VarData;

/// Lagged design for a VAR(`k`) over rows `start..T`: a constant, then
/// lag 1 of every variable, lag 2 of every variable, and so on.
pub(crate) fn var_design(data: &VarData, k: usize, start: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = data.n_vars();
    let n = data.n_rows() - start;
    let x = DMatrix::from_fn(n, 1 + m * k, |r, c| {
        if c == 0 {
            return 1.0;
        }
        let lag = (c - 1) / m + 1;
        let var = (c - 1) % m;
        data.columns[var][start + r - lag]
    });
    let y = DMatrix::from_fn(n, m, |r, c| data.columns[c][start + r]);
    (x, y)
}

/// Lag order minimizing `ln det(Sigma_ML) + (ln T / T) p m^2` over
/// `1..=p_max`, every candidate fit on the same sample (the first `p_max`
/// rows serve only as lags). Ties go to the shorter lag.
pub fn select_lag_bic(data: &VarData, p_max: usize) -> Result<usize> {
    let m = data.n_vars();
    if p_max == 0 {
        return Err(Error::InvalidArgument("p_max must be >= 1".into()));
    }
    if data.n_rows() < 10 * m * p_max {
        return Err(Error::InsufficientData(format!(
            "lag selection needs {} rows, have {}",
            10 * m * p_max,
            data.n_rows()
        )));
    }
    if p_max == 1 {
        return Ok(1);
    }
    let t = (data.n_rows() - p_max) as f64;
    let mut best = (f64::INFINITY, 1);
    for p in 1..=p_max {
        let (x, y) = var_design(data, p, p_max);
        let fit = least_squares(&x, &y)?;
        let sigma = fit.residuals.transpose() * &fit.residuals / t;
        let det = sigma.determinant();
        if det <= 0.0 {
            return Err(Error::Collinear);
        }
        let bic = det.ln() + t.ln() / t * (p * m * m) as f64;
        log::debug!("VAR({p}) BIC {bic:.6}");
        if bic < best.0 {
            best = (bic, p);
        }
    }
    Ok(best.1)
}

/// One estimated coefficient with its inference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub t: f64,
    pub p: f64,
}

#[derive(Clone, Debug)]
pub struct VarModel {
    pub names: Vec<String>,
    pub k: usize,
    pub n_obs: usize,
    /// Coefficients by equation: `estimates[eq][0]` is the intercept and
    /// `estimates[eq][1 + (lag-1)*m + var]` the loading on `var` at `lag`.
    pub estimates: Vec<Vec<Estimate>>,
    pub residual_cov: DMatrix<f64>,
    pub residuals: DMatrix<f64>,
    /// Regressor matrix the model was fit on.
    pub design: DMatrix<f64>,
}

impl VarModel {
    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn intercept(&self, eq: usize) -> &Estimate {
        &self.estimates[eq][0]
    }

    /// Entry `(eq, var)` of `A_lag`.
    pub fn coefficient(&self, lag: usize, eq: usize, var: usize) -> &Estimate {
        &self.estimates[eq][1 + (lag - 1) * self.n_vars() + var]
    }

    /// `A_lag` as an m × m matrix.
    pub fn lag_matrix(&self, lag: usize) -> DMatrix<f64> {
        let m = self.n_vars();
        DMatrix::from_fn(m, m, |i, j| self.coefficient(lag, i, j).value)
    }

    fn regressor_name(&self, idx: usize) -> String {
        if idx == 0 {
            return "Constant".to_string();
        }
        let m = self.n_vars();
        format!("{} (t-{})", self.names[(idx - 1) % m], (idx - 1) / m + 1)
    }

    /// Rows of the coefficient table, grouped by dependent variable.
    pub fn report_rows(&self) -> Vec<[String; 6]> {
        let mut rows = Vec::new();
        for (eq, ests) in self.estimates.iter().enumerate() {
            for (idx, e) in ests.iter().enumerate() {
                rows.push([
                    self.names[eq].clone(),
                    self.regressor_name(idx),
                    format!("{:.3}", e.value),
                    format!("{:.3}", e.std_error),
                    format!("{:.1}", e.t),
                    format_p_value(e.p),
                ]);
            }
        }
        rows
    }

    /// Delimited coefficient table:
    /// `dependent,independent,coefficient,std_error,t,p`.
    pub fn write_report<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let wrap = |e| Error::InvalidArgument(format!("writing VAR report: {e}"));
        w.write_record(["dependent", "independent", "coefficient", "std_error", "t", "p"])
            .map_err(wrap)?;
        for row in self.report_rows() {
            w.write_record(&row).map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("writing VAR report: {e}")))
    }
}

/// Three significant digits, switching to `1.19E-06` style below 1e-4.
pub fn format_p_value(p: f64) -> String {
    if !p.is_finite() {
        return "NA".to_string();
    }
    if p == 0.0 {
        return "0".to_string();
    }
    if p < 1e-4 {
        let s = format!("{p:.2E}");
        let (mantissa, exp) = s.split_once('E').unwrap_or((&s, "0"));
        let exp: i32 = exp.parse().unwrap_or(0);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}E{sign}{:02}", exp.abs());
    }
    let decimals = (2 - p.log10().floor() as i32).max(0) as usize;
    format!("{p:.decimals$}")
}

/// Equation-by-equation OLS of a VAR(`k`) with intercept.
pub fn fit_var(data: &VarData, k: usize) -> Result<VarModel> {
    let m = data.n_vars();
    if k == 0 {
        return Err(Error::InvalidArgument("lag order must be >= 1".into()));
    }
    if data.n_rows() < m * k + m + 10 {
        return Err(Error::InsufficientData(format!(
            "VAR({k}) on {m} variables needs {} rows, have {}",
            m * k + m + 10,
            data.n_rows()
        )));
    }
    let (x, y) = var_design(data, k, k);
    let fit = least_squares(&x, &y)?;
    let df = fit.df_resid() as f64;
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let estimates = (0..m)
        .map(|eq| {
            let se = fit.std_errors(eq);
            (0..fit.n_regressors())
                .map(|i| {
                    let value = fit.coef[(i, eq)];
                    let t = value / se[i];
                    Estimate {
                        value,
                        std_error: se[i],
                        t,
                        p: 2.0 * dist.sf(t.abs()),
                    }
                })
                .collect()
        })
        .collect();
    let residual_cov = fit.residuals.transpose() * &fit.residuals / df;
    Ok(VarModel {
        names: data.names.clone(),
        k,
        n_obs: fit.nobs(),
        estimates,
        residual_cov,
        residuals: fit.residuals,
        design: x,
    })
}
