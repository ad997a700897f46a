//! Driving the batch runner from a JSON config without the binary.

use bethe_sos::cli::{render, run, Cli, Format, RunConfig};
use clap::Parser;

fn main() -> bethe_sos::Result<()> {
    let cfg = r#"{"N": 2, "eta": [0.4, 0.3], "homogeneous": true, "sector_s": 0, "seed": 5}"#;
    RunConfig::from_json(cfg)?;
    let path = std::env::temp_dir().join("bethe_sos_run_config.json");
    std::fs::write(&path, cfg).map_err(|e| bethe_sos::Error::Config(e.to_string()))?;
    let cli = Cli::parse_from(["bethe-sos", "bethe", "--branch", "b1", "--constrained", "--config", path.to_str().unwrap_or_default()]);
    let report = run(&cli)?;
    print!("{}", render(&report, Format::Text)?);
    Ok(())
}
