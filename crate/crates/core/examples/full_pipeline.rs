//! Runs every stage on the demo config, as `cbtext report` would.
//!
//! ```text
//! cargo run --release --example full_pipeline -- /tmp/cbtext-demo
//! ```

use std::path::{Path, PathBuf};

use cbtext::pipeline::{run, Command, Overrides, RunConfig};

fn main() -> cbtext::error::Result<()> {
    let out: PathBuf = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("cbtext-demo"), PathBuf::from);
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo/config.toml");
    let overrides = Overrides {
        seed: None,
        output_dir: Some(out.clone()),
    };
    let cfg = RunConfig::load_with(&config, &overrides)?;
    let files = run(Command::Report, &cfg, true)?;
    println!("wrote {} files to {}", files.len(), out.display());
    for f in files.iter().filter(|f| f.starts_with("fig")) {
        println!("  {f}");
    }
    Ok(())
}
