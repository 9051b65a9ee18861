use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use sld::design::design_closed_form;
use sld::experiment::{design_json, format_design, run_experiment, Experiment, ExperimentConfig, Overrides, Table};
use sld::outage::feasibility;
use sld::Error;

const EXIT_INVALID: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_IO: u8 = 4;

/// Secure beamforming with limited feedback: analytic designs and seeded simulations.
#[derive(Debug, Parser)]
#[command(name = "sld", version)]
struct Cli {
    /// design, outage, throughput, table1, fig1..fig6, sweep-tau, bits-for-fraction, montecarlo
    experiment: String,
    /// Flat key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Linear transmit power.
    #[arg(long)]
    power: Option<f64>,
    /// Transmit power in dB.
    #[arg(long, allow_negative_numbers = true)]
    power_db: Option<f64>,
    #[arg(long)]
    sigma_d2: Option<f64>,
    /// Connection outage constraint.
    #[arg(long)]
    sigma: Option<f64>,
    /// Secrecy outage constraint.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    b1: Option<u32>,
    #[arg(long)]
    b2: Option<u32>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    sigma_g2: Option<f64>,
    /// Channel gain ||h||^2 for single-channel experiments.
    #[arg(long)]
    gain2: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    /// Total feedback bits for bit allocation.
    #[arg(long)]
    budget: Option<u32>,
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    draws: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// rvq, grassmannian or qca_synthetic.
    #[arg(long)]
    codebook: Option<String>,
    /// Sweep axis name:start:stop:points[:log|lin]; repeat for a second axis.
    #[arg(long)]
    sweep: Vec<String>,
    /// CSV destination; a .meta.json sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print a single design as JSON.
    #[arg(long)]
    json: bool,
    /// Print a single design as one CSV row.
    #[arg(long)]
    csv: bool,
}

impl Cli {
    fn overrides(&self) -> Result<Overrides, Error> {
        let mut o = Overrides {
            n: self.n,
            power: self.power,
            power_db: self.power_db,
            sigma_d2: self.sigma_d2,
            sigma: self.sigma,
            epsilon: self.epsilon,
            b1: self.b1,
            b2: self.b2,
            delta: self.delta,
            sigma_g2: self.sigma_g2,
            gain2: self.gain2,
            phi: self.phi,
            budget: self.budget,
            fraction: self.fraction,
            seed: self.seed,
            draws: self.draws,
            workers: self.workers,
            codebook: None,
            sweeps: Vec::new(),
            out: self.out.clone(),
        };
        if let Some(c) = &self.codebook {
            o.codebook = Some(sld::experiment::parse_codebook_source(c)?);
        }
        for s in &self.sweep {
            o.sweeps.push(s.parse()?);
        }
        Ok(o)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_table(table: &Table, meta: &serde_json::Value, out: Option<&Path>) -> Result<(), Error> {
    let csv = table.to_csv();
    match out {
        Some(path) => {
            fs::write(path, csv)?;
            let meta = serde_json::to_string_pretty(meta).map_err(|e| Error::Io(io::Error::other(e)))?;
            fs::write(sidecar_path(path), meta + "\n")?;
        }
        None => io::stdout().write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn design_query(cfg: &ExperimentConfig, json: bool, csv: bool) -> Result<(), Error> {
    let report = feasibility(&cfg.params)?;
    let d = design_closed_form(&cfg.params, cfg.gain2)?;
    let mut stdout = io::stdout();
    if json {
        let v = design_json(&cfg.params, cfg.gain2, &d, &report)?;
        writeln!(stdout, "{}", serde_json::to_string_pretty(&v).map_err(|e| Error::Io(io::Error::other(e)))?)?;
    } else if csv {
        let out = run_experiment(cfg)?;
        stdout.write_all(out.table.to_csv().as_bytes())?;
    } else {
        stdout.write_all(format_design(&cfg.params, cfg.gain2, &d, &report)?.as_bytes())?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Error> {
    let experiment: Experiment = cli.experiment.parse()?;
    let file = match &cli.config {
        Some(path) => Overrides::parse_config(&fs::read_to_string(path)?)?,
        None => Overrides::default(),
    };
    let cfg = ExperimentConfig::resolve(experiment, &file.merged(cli.overrides()?))?;
    if experiment == Experiment::Design && cfg.sweeps.is_empty() && cfg.out.is_none() {
        return design_query(&cfg, cli.json, cli.csv);
    }
    let out = run_experiment(&cfg)?;
    write_table(&out.table, &out.metadata, cfg.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sld: {e}");
            if let Error::Infeasible(report) = &e {
                eprintln!("required b1_min = {}; mu_min = {}", report.b1_min, report.mu_min);
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
