use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A diagonal entry of R smaller than this fraction of its column norm marks
/// the column as (numerically) a combination of earlier ones.
const COLLINEARITY_TOL: f64 = 1e-9;

/// Least-squares fit of every column of `y` on the same regressors.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    /// p × q coefficients.
    pub coef: DMatrix<f64>,
    /// n × q residuals.
    pub residuals: DMatrix<f64>,
    /// (X'X)^-1, p × p.
    pub xtx_inv: DMatrix<f64>,
}

impl LeastSquares {
    pub fn nobs(&self) -> usize {
        self.residuals.nrows()
    }

    pub fn n_regressors(&self) -> usize {
        self.coef.nrows()
    }

    pub fn df_resid(&self) -> usize {
        self.nobs() - self.n_regressors()
    }

    /// Residual sum of squares of equation `j`.
    pub fn rss(&self, j: usize) -> f64 {
        self.residuals.column(j).norm_squared()
    }

    /// Coefficient standard errors of equation `j`, using `rss / df_resid`.
    pub fn std_errors(&self, j: usize) -> DVector<f64> {
        let s2 = self.rss(j) / self.df_resid() as f64;
        DVector::from_iterator(self.n_regressors(), (0..self.n_regressors()).map(|i| (s2 * self.xtx_inv[(i, i)]).sqrt()))
    }
}

/// QR-based OLS. Errors with [`Error::Collinear`] on a rank-deficient design.
pub fn least_squares(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<LeastSquares> {
    let (n, p) = x.shape();
    if y.nrows() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: y.nrows(),
        });
    }
    if n <= p {
        return Err(Error::InsufficientData(format!("{n} observations for {p} regressors")));
    }
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..p {
        let scale = x.column(j).norm();
        if scale == 0.0 || r[(j, j)].abs() <= COLLINEARITY_TOL * scale {
            return Err(Error::Collinear);
        }
    }
    let qty = qr.q().transpose() * y;
    let coef = r.solve_upper_triangular(&qty).ok_or(Error::Collinear)?;
    let r_inv = r.solve_upper_triangular(&DMatrix::identity(p, p)).ok_or(Error::Collinear)?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let residuals = y - x * &coef;
    Ok(LeastSquares {
        coef,
        residuals,
        xtx_inv,
    })
}

/// Single-equation convenience wrapper.
pub fn ols(x: &DMatrix<f64>, y: &[f64]) -> Result<LeastSquares> {
    least_squares(x, &DMatrix::from_column_slice(y.len(), 1, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = DMatrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y: Vec<f64> = (0..5).map(|i| 2.0 + 3.0 * i as f64).collect();
        let fit = ols(&x, &y).unwrap();
        assert!((fit.coef[(0, 0)] - 2.0).abs() < 1e-12);
        assert!((fit.coef[(1, 0)] - 3.0).abs() < 1e-12);
        assert!(fit.rss(0) < 1e-20);
    }

    #[test]
    fn textbook_standard_errors() {
        // y = [1, 3, 2, 5, 4] on x = [1..5]: slope 0.8, se sqrt(1.2 / 10)
        let x = DMatrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { (i + 1) as f64 });
        let fit = ols(&x, &[1.0, 3.0, 2.0, 5.0, 4.0]).unwrap();
        assert!((fit.coef[(1, 0)] - 0.8).abs() < 1e-12);
        assert!((fit.std_errors(0)[1] - 0.12f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn collinear_design_is_rejected() {
        let x = DMatrix::from_fn(6, 3, |i, j| match j {
            0 => 1.0,
            1 => i as f64,
            _ => 2.0 * i as f64 + 1.0,
        });
        assert!(matches!(ols(&x, &[1.0; 6]), Err(Error::Collinear)));
        let zero = DMatrix::from_fn(6, 2, |i, j| if j == 0 { 1.0 } else { 0.0 * i as f64 });
        assert!(matches!(ols(&zero, &[1.0; 6]), Err(Error::Collinear)));
    }
}
