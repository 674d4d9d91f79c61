use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};

use super::ols::least_squares;
use super::var::{format_p_value, var_design};
use super::VarData;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrangerResult {
    pub cause: String,
    pub effect: String,
    pub lag: usize,
    pub f: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub p_value: f64,
}

impl GrangerResult {
    pub fn rejects_at(&self, level: f64) -> bool {
        self.p_value < level
    }
}

fn check_pair(data: &VarData, cause: &str, effect: &str, k: usize) -> Result<(usize, usize)> {
    if cause == effect {
        return Err(Error::IdenticalVariable);
    }
    let c = data.index_of(cause)?;
    let e = data.index_of(effect)?;
    if k == 0 {
        return Err(Error::InvalidArgument("lag order must be >= 1".into()));
    }
    if 3 * k >= data.n_rows() {
        return Err(Error::InsufficientData(format!(
            "lag {k} too long for {} rows",
            data.n_rows()
        )));
    }
    Ok((c, e))
}

fn f_test(
    cause: &str,
    effect: &str,
    k: usize,
    rss_r: f64,
    rss_u: f64,
    df_den: usize,
) -> Result<GrangerResult> {
    let f = (((rss_r - rss_u) / k as f64) / (rss_u / df_den as f64)).max(0.0);
    let dist = FisherSnedecor::new(k as f64, df_den as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(GrangerResult {
        cause: cause.to_string(),
        effect: effect.to_string(),
        lag: k,
        f,
        df_num: k,
        df_den,
        p_value: dist.sf(f).clamp(0.0, 1.0),
    })
}

/// Bivariate test: does adding `k` lags of `cause` to an AR(`k`) for
/// `effect` (with intercept) reduce the residual sum of squares?
pub fn granger_test(data: &VarData, cause: &str, effect: &str, k: usize) -> Result<GrangerResult> {
    let (c, e) = check_pair(data, cause, effect, k)?;
    // effect first so that the restricted design is a column prefix
    let pair = VarData {
        names: vec![effect.to_string(), cause.to_string()],
        columns: vec![data.columns[e].clone(), data.columns[c].clone()],
    };
    let (x, y) = var_design(&pair, k, k);
    let y = y.columns(0, 1).into_owned();
    let own_lags: Vec<usize> = (0..=k).map(|i| if i == 0 { 0 } else { 1 + (i - 1) * 2 }).collect();
    let x_r = x.select_columns(&own_lags);
    let unrestricted = least_squares(&x, &y)?;
    let restricted = least_squares(&x_r, &y)?;
    f_test(cause, effect, k, restricted.rss(0), unrestricted.rss(0), unrestricted.df_resid())
}

/// Block exclusion inside the full VAR(`k`): drops the `k` lags of `cause`
/// from the `effect` equation. The denominator df accounts for every
/// regressor of the VAR equation.
pub fn granger_test_block(data: &VarData, cause: &str, effect: &str, k: usize) -> Result<GrangerResult> {
    let (c, e) = check_pair(data, cause, effect, k)?;
    let m = data.n_vars();
    let (x, y) = var_design(data, k, k);
    let y: DMatrix<f64> = y.columns(e, 1).into_owned();
    let keep: Vec<usize> = (0..x.ncols()).filter(|&i| i == 0 || (i - 1) % m != c).collect();
    let unrestricted = least_squares(&x, &y)?;
    let restricted = least_squares(&x.select_columns(&keep), &y)?;
    f_test(cause, effect, k, restricted.rss(0), unrestricted.rss(0), unrestricted.df_resid())
}

/// Writes `cause,effect,lag,F,df_num,df_den,p`.
pub fn write_granger_report<W: Write>(results: &[GrangerResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::InvalidArgument(format!("writing Granger report: {e}"));
    w.write_record(["cause", "effect", "lag", "F", "df_num", "df_den", "p"]).map_err(wrap)?;
    for r in results {
        w.write_record([
            r.cause.clone(),
            r.effect.clone(),
            r.lag.to_string(),
            format!("{:.3}", r.f),
            r.df_num.to_string(),
            r.df_den.to_string(),
            format_p_value(r.p_value),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("writing Granger report: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn pair(seed: u64, n: usize, link: f64) -> VarData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let y: Vec<f64> = (0..n)
            .map(|t| {
                let e: f64 = StandardNormal.sample(&mut rng);
                e + if t > 0 { link * x[t - 1] } else { 0.0 }
            })
            .collect();
        VarData::new(vec!["x".into(), "y".into()], vec![x, y]).unwrap()
    }

    #[test]
    fn degrees_of_freedom() {
        let d = pair(1, 100, 0.8);
        let r = granger_test(&d, "x", "y", 2).unwrap();
        assert_eq!((r.df_num, r.df_den), (2, 98 - 5));
        assert!(r.p_value < 1e-6);
        let b = granger_test_block(&d, "x", "y", 2).unwrap();
        // two variables: the block test is the bivariate test
        assert!((b.f - r.f).abs() < 1e-9 && b.df_den == r.df_den);
    }

    #[test]
    fn bad_arguments() {
        let d = pair(1, 30, 0.0);
        assert!(matches!(granger_test(&d, "x", "x", 1), Err(Error::IdenticalVariable)));
        assert!(matches!(granger_test(&d, "x", "z", 1), Err(Error::UnknownVariable(_))));
        assert!(granger_test(&d, "x", "y", 10).is_err());
        assert!(granger_test(&d, "x", "y", 9).is_ok());
    }

    #[test]
    fn affine_rescaling_leaves_f_unchanged() {
        let d = pair(5, 200, 0.3);
        let base = granger_test(&d, "x", "y", 3).unwrap();
        let scaled = VarData::new(
            d.names.clone(),
            vec![
                d.columns[0].iter().map(|v| 40.0 * v - 7.0).collect(),
                d.columns[1].iter().map(|v| 0.01 * v + 3.0).collect(),
            ],
        )
        .unwrap();
        let other = granger_test(&scaled, "x", "y", 3).unwrap();
        assert!((base.f - other.f).abs() < 1e-8 * base.f.max(1.0));
    }

    #[test]
    fn block_test_adjusts_df_for_extra_variables() {
        let mut d = pair(2, 120, 0.5);
        let extra: Vec<f64> = (0..120).map(|i| ((i * 37) % 17) as f64).collect();
        d.names.push("z".into());
        d.columns.push(extra);
        let r = granger_test_block(&d, "x", "y", 2).unwrap();
        assert_eq!(r.df_den, 118 - 7);
    }

    #[test]
    fn report_layout() {
        let d = pair(1, 100, 0.8);
        let r = granger_test(&d, "x", "y", 2).unwrap();
        let mut buf = Vec::new();
        write_granger_report(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("cause,effect,lag,F,df_num,df_den,p\nx,y,2,"));
    }
}
