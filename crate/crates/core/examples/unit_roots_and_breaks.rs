//! Unit-root tests on a random walk and a stationary AR(1), then a mean
//! shift search and a Welch comparison of break sizes.
//!
//! ```text
//! cargo run --example unit_roots_and_breaks
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use cbtext::econometrics::{adf_test, compare_break_magnitudes, detect_break, format_p_value, kpss_test, DEFAULT_TRIM};

fn main() -> cbtext::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut e = || -> f64 { StandardNormal.sample(&mut rng) };
    let n = 400;
    let (mut walk, mut ar) = (vec![0.0], vec![0.0]);
    for t in 1..n {
        walk.push(walk[t - 1] + e());
        ar.push(0.5 * ar[t - 1] + e());
    }
    for (name, x) in [("random walk", &walk), ("AR(0.5)", &ar)] {
        for r in [adf_test(x, 4)?, kpss_test(x)?] {
            println!(
                "{name:<12} {:<4} stat {:>8.3}  lags {}  5% cv {:>6.3}  p {:<6} reject {}",
                r.test, r.statistic, r.lags_used, r.critical_values[1], r.p_band, r.reject_at_5pct
            );
        }
    }

    println!();
    let mut sizes = Vec::new();
    for shift in [0.6, 0.8, 1.0, 1.2, 1.4, 1.6] {
        let x: Vec<f64> = (0..n).map(|t| e() + if t >= 240 { shift } else { 0.0 }).collect();
        let b = detect_break(&x, DEFAULT_TRIM)?;
        println!(
            "shift {shift:.1}: break at {} sup-Wald {:.1} (5% cv {:.2}) magnitude {:.3}",
            b.break_index, b.sup_statistic, b.critical_value_5pct, b.magnitude
        );
        sizes.push(b.magnitude);
    }
    let w = compare_break_magnitudes(&sizes[3..], &sizes[..3])?;
    println!("T-statistic: {:.2}; p value : {}", w.t, format_p_value(w.p_value));
    Ok(())
}
