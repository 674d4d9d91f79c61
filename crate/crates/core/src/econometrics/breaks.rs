use chrono::NaiveDate;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

use super::critical_values::sup_wald_critical_value;

pub const DEFAULT_TRIM: f64 = 0.15;
pub const MIN_BREAK_LENGTH: usize = 40;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BreakResult {
    /// First observation of the post-break regime.
    pub break_index: usize,
    pub break_date: Option<NaiveDate>,
    pub sup_statistic: f64,
    pub pre_mean: f64,
    pub post_mean: f64,
    pub magnitude: f64,
    pub critical_value_5pct: f64,
    pub significant_at_5pct: bool,
}

/// Candidate break indices `lo..=hi` for a series of length `n`.
pub fn trimmed_interior(n: usize, trim: f64) -> (usize, usize) {
    let lo = ((trim * n as f64).ceil() as usize).max(2);
    (lo, n - lo)
}

/// Single mean-shift search. For each candidate split the Wald statistic
/// `(mu2 - mu1)^2 / (s^2 (1/n1 + 1/n2))` uses the pooled residual variance;
/// the largest one is compared with the sup-Wald critical value for `trim`.
pub fn detect_break(series: &[f64], trim: f64) -> Result<BreakResult> {
    let n = series.len();
    if n < MIN_BREAK_LENGTH {
        return Err(Error::InsufficientData(format!(
            "break search needs at least {MIN_BREAK_LENGTH} observations, got {n}"
        )));
    }
    if !(0.05..=0.25).contains(&trim) {
        return Err(Error::InvalidArgument(format!("trim must lie in [0.05, 0.25], got {trim}")));
    }
    let first = series[0];
    if series.iter().all(|&v| v == first) {
        return Err(Error::ZeroVariance);
    }

    let mut prefix = vec![0.0; n + 1];
    let mut prefix_sq = vec![0.0; n + 1];
    // centre first so the running sums of squares stay well conditioned
    let mean = series.iter().sum::<f64>() / n as f64;
    for (i, v) in series.iter().enumerate() {
        let c = v - mean;
        prefix[i + 1] = prefix[i] + c;
        prefix_sq[i + 1] = prefix_sq[i] + c * c;
    }
    let total_sq = prefix_sq[n];
    let ssr_tol = total_sq * 1e-12;

    let (lo, hi) = trimmed_interior(n, trim);
    let mut best: Option<(f64, usize)> = None;
    for b in lo..=hi {
        let (n1, n2) = (b as f64, (n - b) as f64);
        let s1 = prefix[b];
        let s2 = prefix[n] - s1;
        let diff = s2 / n2 - s1 / n1;
        let ssr = (total_sq - s1 * s1 / n1 - s2 * s2 / n2).max(0.0);
        let w = if ssr <= ssr_tol {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff * diff / ((ssr / (n as f64 - 2.0)) * (1.0 / n1 + 1.0 / n2))
        };
        if best.is_none_or(|(bw, _)| w > bw) {
            best = Some((w, b));
        }
    }
    let (sup, b) = best.expect("non-empty candidate range");
    let pre_mean = series[..b].iter().sum::<f64>() / b as f64;
    let post_mean = series[b..].iter().sum::<f64>() / (n - b) as f64;
    let cv = sup_wald_critical_value(trim, 1);
    Ok(BreakResult {
        break_index: b,
        break_date: None,
        sup_statistic: sup,
        pre_mean,
        post_mean,
        magnitude: (post_mean - pre_mean).abs(),
        critical_value_5pct: cv,
        significant_at_5pct: sup > cv,
    })
}

/// [`detect_break`] on a dated series.
pub fn detect_break_in_series(series: &TimeSeries, trim: f64) -> Result<BreakResult> {
    let mut r = detect_break(&series.values(), trim).map_err(|e| e.context(format!("series `{}`", series.name)))?;
    r.break_date = Some(series.points()[r.break_index].0);
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
    pub mean_a: f64,
    pub mean_b: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

/// Welch two-sample t-test with Welch-Satterthwaite degrees of freedom;
/// two-sided p-value.
pub fn compare_break_magnitudes(group_a: &[f64], group_b: &[f64]) -> Result<WelchResult> {
    if group_a.len() < 2 || group_b.len() < 2 {
        return Err(Error::InsufficientData("each group needs at least two values".into()));
    }
    let (ma, va) = mean_var(group_a);
    let (mb, vb) = mean_var(group_b);
    let (qa, qb) = (va / group_a.len() as f64, vb / group_b.len() as f64);
    if qa + qb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let t = (ma - mb) / (qa + qb).sqrt();
    let df = (qa + qb).powi(2)
        / (qa * qa / (group_a.len() as f64 - 1.0) + qb * qb / (group_b.len() as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(WelchResult {
        t,
        df,
        p_value: (2.0 * dist.sf(t.abs())).min(1.0),
        mean_a: ma,
        mean_b: mb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn noiseless_step() {
        let y: Vec<f64> = (0..100).map(|i| if i < 37 { 1.0 } else { 3.5 }).collect();
        let r = detect_break(&y, 0.15).unwrap();
        assert_eq!(r.break_index, 37);
        assert_eq!(r.magnitude, 2.5);
        assert!(r.sup_statistic.is_infinite() && r.significant_at_5pct);
    }

    #[test]
    fn preconditions() {
        assert!(detect_break(&[1.0; 39], 0.15).is_err());
        assert!(matches!(detect_break(&[1.0; 60], 0.15), Err(Error::ZeroVariance)));
        let y: Vec<f64> = (0..60).map(f64::from).collect();
        assert!(detect_break(&y, 0.3).is_err());
        assert!(detect_break(&y, 0.04).is_err());
    }

    #[test]
    fn break_date_is_inside_trimmed_interior() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [40usize, 57, 200] {
            let y: Vec<f64> = (0..n).map(|i| if i < 3 { 10.0 } else { StandardNormal.sample(&mut rng) }).collect();
            let r = detect_break(&y, 0.15).unwrap();
            let (lo, hi) = trimmed_interior(n, 0.15);
            assert!(lo <= r.break_index && r.break_index <= hi);
            assert!(r.break_index > 0 && r.break_index < n);
        }
    }

    #[test]
    fn argmax_ignores_affine_changes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y: Vec<f64> = (0..150)
            .map(|i| Distribution::<f64>::sample(&StandardNormal, &mut rng) + if i > 90 { 0.7 } else { 0.0 })
            .collect();
        let base = detect_break(&y, 0.15).unwrap();
        let moved: Vec<f64> = y.iter().map(|v| 3.0 * v + 12.0).collect();
        let r = detect_break(&moved, 0.15).unwrap();
        assert_eq!(base.break_index, r.break_index);
        assert!((r.sup_statistic - base.sup_statistic).abs() < 1e-8 * base.sup_statistic);
    }

    #[test]
    fn welch_cases() {
        let a = [0.1, 0.4, 0.2, 0.3];
        let r = compare_break_magnitudes(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert!(matches!(compare_break_magnitudes(&[0.0, 0.0], &[1.0, 1.0]), Err(Error::ZeroVariance)));
        assert!(compare_break_magnitudes(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn welch_textbook_values() {
        // scipy.stats.ttest_ind(a, b, equal_var=False)
        let a = [27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1, 21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4];
        let b = [27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0, 24.8, 20.2, 21.9, 22.1, 22.9, 20.5, 24.4];
        let r = compare_break_magnitudes(&a, &b).unwrap();
        assert!((r.t + 2.46).abs() < 0.01, "{r:?}");
        assert!((r.df - 24.99).abs() < 0.01, "{r:?}");
        assert!((r.p_value - 0.021).abs() < 0.001, "{r:?}");
    }
}
