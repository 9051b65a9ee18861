//! Drives the experiment runner from code: parse a config, run it, and
//! print the CSV and the hash recorded in the sidecar.

use sld::experiment::{run_experiment, Experiment, ExperimentConfig, Overrides};

fn main() -> sld::Result<()> {
    let text = "\
# secrecy throughput against power and epsilon
n = 4
b1 = 8
sweep = power:1:100:5:log
sweep = epsilon:0.01:0.05:3
";
    let cfg = ExperimentConfig::resolve(Experiment::Throughput, &Overrides::parse_config(text)?)?;
    let out = run_experiment(&cfg)?;
    print!("{}", out.table.to_csv());
    println!("config hash {}", out.metadata["config_hash"]);

    let table1 = run_experiment(&ExperimentConfig::defaults(Experiment::Table1))?;
    print!("{}", table1.table.to_csv());
    Ok(())
}
