//! Validates and runs a configuration file into a scratch directory.
//!
//! ```bash
//! cargo run --release --example run_config -- configs/smoke.cfg
//! ```

use spikelab::cli::{load_config, run, validate};

fn main() -> spikelab::error::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/smoke.cfg").into());
    let mut config = load_config(path.as_ref())?;
    let report = validate(&config);
    print!("{}", report.render());
    if !report.ok() {
        std::process::exit(2);
    }
    config.output = std::env::temp_dir().join("spikelab-example").display().to_string();
    let outcome = run(&config)?;
    print!("{}", std::fs::read_to_string(outcome.dir.join("summary.txt"))?);
    println!("artifacts in {}", outcome.dir.display());
    Ok(())
}
