//! Loads daily market data and daily case counts, buckets both to weeks
//! with their own policies and correlates them.
//!
//! ```text
//! cargo run --example align_series
//! ```

use std::path::Path;

use cbtext::calendar::Frequency;
use cbtext::timeseries::{align, correlation_of_pairs, load_external_csv, Aggregation, Join};

fn main() -> cbtext::error::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo/external");
    let vix = load_external_csv(&dir.join("vix.csv"), "date", "close")?.renamed("vix");
    let cases = load_external_csv(&dir.join("covid_cases.csv"), "date", "new_cases")?.renamed("cases");

    // market levels keep the last print of the week, flows are summed
    let panel = align(&[(&vix, Aggregation::Last), (&cases, Aggregation::Sum)], Frequency::Weekly, Join::Inner)?;
    println!("{} common weeks from {} to {}", panel.n_rows(), panel.dates[0], panel.dates[panel.n_rows() - 1]);
    let mut out = Vec::new();
    panel.write_csv(&mut out)?;
    for line in String::from_utf8_lossy(&out).lines().take(6) {
        println!("  {line}");
    }
    let pairs: Vec<(f64, f64)> = panel.complete_rows().iter().map(|r| (r[0], r[1])).collect();
    println!("corr(vix, weekly cases) = {:.3}", correlation_of_pairs(&pairs)?);
    Ok(())
}
