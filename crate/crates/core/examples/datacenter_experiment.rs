//! Sliding-window provisioning experiment on synthetic traces. Pass a TOML
//! config path to override the defaults.

use std::fs;

use fairobd::bench::{run_experiment, ExperimentConfig};

fn main() -> fairobd::Result<()> {
    let config = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::from_toml(&fs::read_to_string(path)?)?,
        None => ExperimentConfig {
            stride: 12,
            ..ExperimentConfig::default()
        },
    };
    config.validate()?;
    let traces = config.load_traces()?;
    println!("{} hours, {} data centers", traces.horizon(), traces.datacenters.len());
    let report = run_experiment(&config, &traces)?;
    print!("{}", report.render_table());
    Ok(())
}
