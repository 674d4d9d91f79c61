//! Simulates a two-variable system where `vix` leads `fss`, selects the lag
//! by BIC, fits the VAR and runs Granger tests both ways.
//!
//! ```text
//! cargo run --example var_granger
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use cbtext::econometrics::{fit_var, granger_test, select_lag_bic, write_granger_report, VarData};

fn main() -> cbtext::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let n = 300;
    let (mut vix, mut fss) = (vec![0.0; n], vec![0.0; n]);
    for t in 1..n {
        vix[t] = 0.6 * vix[t - 1] + noise.sample(&mut rng);
        fss[t] = 0.3 * fss[t - 1] - 0.5 * vix[t - 1] + noise.sample(&mut rng);
    }
    let data = VarData::new(vec!["fss".into(), "vix".into()], vec![fss, vix])?;

    let lag = select_lag_bic(&data, 4)?;
    println!("BIC lag: {lag}");
    let model = fit_var(&data, lag)?;
    model.write_report(std::io::stdout())?;

    println!();
    let tests = [granger_test(&data, "vix", "fss", lag)?, granger_test(&data, "fss", "vix", lag)?];
    write_granger_report(&tests, std::io::stdout())?;
    Ok(())
}
