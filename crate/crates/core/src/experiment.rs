//! Experiment runner behind the `sld` binary: configuration parsing, sweeps,
//! CSV tables and the metadata sidecar.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::codebook::Codebook;
use crate::design::{design_closed_form, design_perfect_csi, RateDesign};
use crate::error::{param, Error, Result};
use crate::montecarlo::{phi_grid, CodebookSource, SimConfig, Simulator};
use crate::outage::{b1_min, feasibility, pco_qca, pso, FeasibilityReport};
use crate::params::SystemParams;
use crate::throughput::{
    bits_for_fraction, build_quantizer, sweep_bit_allocation, throughput_asymptote, throughput_exact_cgi,
    throughput_perfect_feedback, throughput_quantized_cgi, MAX_BITS_PER_ANTENNA,
};

pub const SCHEMA_VERSION: u32 = 1;
/// Replicas used to attach a standard error to simulated rate estimates.
const REPLICAS: u64 = 8;
/// `phi` grid and rate resolution for simulated rate inversion.
const PHI_POINTS: usize = 399;
const RB_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Design,
    Outage,
    Throughput,
    Table1,
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    SweepTau,
    BitsForFraction,
    Montecarlo,
}

impl Experiment {
    pub const ALL: [Experiment; 13] = [
        Experiment::Design,
        Experiment::Outage,
        Experiment::Throughput,
        Experiment::Table1,
        Experiment::Fig1,
        Experiment::Fig2,
        Experiment::Fig3,
        Experiment::Fig4,
        Experiment::Fig5,
        Experiment::Fig6,
        Experiment::SweepTau,
        Experiment::BitsForFraction,
        Experiment::Montecarlo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Design => "design",
            Experiment::Outage => "outage",
            Experiment::Throughput => "throughput",
            Experiment::Table1 => "table1",
            Experiment::Fig1 => "fig1",
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::Fig6 => "fig6",
            Experiment::SweepTau => "sweep-tau",
            Experiment::BitsForFraction => "bits-for-fraction",
            Experiment::Montecarlo => "montecarlo",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    Power,
    N,
    SigmaD2,
    Sigma,
    Epsilon,
    B1,
    B2,
    Delta,
    SigmaG2,
    Gain2,
    Rate,
    Phi,
}

impl SweepVar {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "power" => SweepVar::Power,
            "n" => SweepVar::N,
            "sigma_d2" => SweepVar::SigmaD2,
            "sigma" => SweepVar::Sigma,
            "epsilon" => SweepVar::Epsilon,
            "b1" => SweepVar::B1,
            "b2" => SweepVar::B2,
            "delta" => SweepVar::Delta,
            "sigma_g2" => SweepVar::SigmaG2,
            "gain2" => SweepVar::Gain2,
            "rate" => SweepVar::Rate,
            "phi" => SweepVar::Phi,
            _ => return param(format!("unknown sweep variable '{s}'")),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Power => "power",
            SweepVar::N => "n",
            SweepVar::SigmaD2 => "sigma_d2",
            SweepVar::Sigma => "sigma",
            SweepVar::Epsilon => "epsilon",
            SweepVar::B1 => "b1",
            SweepVar::B2 => "b2",
            SweepVar::Delta => "delta",
            SweepVar::SigmaG2 => "sigma_g2",
            SweepVar::Gain2 => "gain2",
            SweepVar::Rate => "rate",
            SweepVar::Phi => "phi",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepVar::N | SweepVar::B1 | SweepVar::B2)
    }
}

/// One sweep axis, written `name:start:stop:points[:log|lin]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepAxis {
    pub variable: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub log: bool,
}

impl SweepAxis {
    pub fn linear(variable: SweepVar, start: f64, stop: f64, points: usize) -> Self {
        SweepAxis { variable, start, stop, points, log: false }
    }

    pub fn log(variable: SweepVar, start: f64, stop: f64, points: usize) -> Self {
        SweepAxis { variable, start, stop, points, log: true }
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let mut v: Vec<f64> = (0..n)
            .map(|i| {
                let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                if self.log {
                    // Trim exp/ln round-off so 10 prints as 10, not 10.000000000000002.
                    let x = (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp();
                    format!("{x:.12e}").parse().unwrap_or(x)
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect();
        if self.variable.is_integer() {
            v.iter_mut().for_each(|x| *x = x.round());
            v.dedup();
        }
        v
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if !(4..=5).contains(&parts.len()) {
            return param(format!("sweep '{s}' must look like name:start:stop:points[:log|lin]"));
        }
        let num = |t: &str| t.parse::<f64>().map_err(|_| Error::Parameter(format!("bad number '{t}' in sweep '{s}'")));
        let points: usize = parts[3]
            .parse()
            .map_err(|_| Error::Parameter(format!("bad point count '{}' in sweep '{s}'", parts[3])))?;
        let log = match parts.get(4).copied() {
            None | Some("lin") => false,
            Some("log") => true,
            Some(other) => return param(format!("sweep scale must be 'log' or 'lin', got '{other}'")),
        };
        let axis = SweepAxis { variable: SweepVar::parse(parts[0])?, start: num(parts[1])?, stop: num(parts[2])?, points, log };
        if points == 0 {
            return param(format!("sweep '{s}' needs at least one point"));
        }
        if log && !(axis.start > 0.0 && axis.stop > 0.0) {
            return param(format!("log sweep '{s}' needs positive end points"));
        }
        Ok(axis)
    }
}

/// Settings that may come from a config file or from flags; unset fields
/// fall through to the experiment defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<usize>,
    pub power: Option<f64>,
    pub power_db: Option<f64>,
    pub sigma_d2: Option<f64>,
    pub sigma: Option<f64>,
    pub epsilon: Option<f64>,
    pub b1: Option<u32>,
    pub b2: Option<u32>,
    pub delta: Option<f64>,
    pub sigma_g2: Option<f64>,
    pub gain2: Option<f64>,
    pub phi: Option<f64>,
    pub budget: Option<u32>,
    pub fraction: Option<f64>,
    pub seed: Option<u64>,
    pub draws: Option<u64>,
    pub workers: Option<usize>,
    pub codebook: Option<CodebookSource>,
    pub sweeps: Vec<SweepAxis>,
    pub out: Option<PathBuf>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parameter(format!("cannot parse '{value}' for key '{key}'")))
}

pub fn parse_codebook_source(s: &str) -> Result<CodebookSource> {
    match s {
        "rvq" => Ok(CodebookSource::Rvq),
        "grassmannian" => Ok(CodebookSource::Grassmannian),
        "qca_synthetic" | "qca-synthetic" => Ok(CodebookSource::QcaSynthetic),
        _ => param(format!("unknown codebook source '{s}' (rvq, grassmannian, qca_synthetic)")),
    }
}

impl Overrides {
    /// Parses flat `key = value` text; `#` starts a comment.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut o = Overrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parameter(format!("line {}: expected key = value, got '{line}'", lineno + 1)))?;
            o.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::Parameter(m) => Error::Parameter(format!("line {}: {m}", lineno + 1)),
                other => other,
            })?;
        }
        Ok(o)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n = Some(parse_value(key, value)?),
            "power" => self.power = Some(parse_value(key, value)?),
            "power_db" => self.power_db = Some(parse_value(key, value)?),
            "sigma_d2" => self.sigma_d2 = Some(parse_value(key, value)?),
            "sigma" => self.sigma = Some(parse_value(key, value)?),
            "epsilon" => self.epsilon = Some(parse_value(key, value)?),
            "b1" => self.b1 = Some(parse_value(key, value)?),
            "b2" => self.b2 = Some(parse_value(key, value)?),
            "delta" => self.delta = Some(parse_value(key, value)?),
            "sigma_g2" => self.sigma_g2 = Some(parse_value(key, value)?),
            "gain2" => self.gain2 = Some(parse_value(key, value)?),
            "phi" => self.phi = Some(parse_value(key, value)?),
            "budget" => self.budget = Some(parse_value(key, value)?),
            "fraction" => self.fraction = Some(parse_value(key, value)?),
            "seed" => self.seed = Some(parse_value(key, value)?),
            "draws" => self.draws = Some(parse_value(key, value)?),
            "workers" => self.workers = Some(parse_value(key, value)?),
            "codebook" => self.codebook = Some(parse_codebook_source(value)?),
            "sweep" => self.sweeps.push(value.parse()?),
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return param(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// `other` wins wherever it is set; its sweeps replace ours when present.
    pub fn merged(mut self, other: Overrides) -> Overrides {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(n, power, sigma_d2, sigma, epsilon, b1, b2, delta, sigma_g2, gain2, phi, budget, fraction, seed, draws, workers, codebook, out);
        if other.power_db.is_some() {
            self.power_db = other.power_db;
            if other.power.is_none() {
                self.power = None;
            }
        } else if other.power.is_some() {
            self.power_db = None;
        }
        if !other.sweeps.is_empty() {
            self.sweeps = other.sweeps;
        }
        self
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: SystemParams,
    pub gain2: f64,
    pub phi: f64,
    pub budget: u32,
    pub fraction: f64,
    pub seed: u64,
    pub draws: u64,
    pub codebook: CodebookSource,
    pub sweeps: Vec<SweepAxis>,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Default settings for an experiment before any overrides.
    pub fn defaults(experiment: Experiment) -> Self {
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let mut c = ExperimentConfig {
            experiment,
            params: SystemParams::default(),
            gain2: 4.0,
            phi: 0.5,
            budget: 40,
            fraction: 0.9,
            seed: 42,
            draws: 100_000,
            codebook: CodebookSource::QcaSynthetic,
            sweeps: Vec::new(),
            workers,
            out: None,
        };
        let p = &mut c.params;
        match experiment {
            Experiment::Fig1 => {
                (p.n, p.b1, p.eps_so) = (2, 6, 0.05);
                c.codebook = CodebookSource::Grassmannian;
                c.sweeps = vec![SweepAxis::log(SweepVar::Power, 0.1, 100.0, 13)];
            }
            Experiment::Fig2 => {
                (p.n, p.p, p.eps_so) = (4, 100.0, 0.01);
                c.sweeps = vec![SweepAxis::linear(SweepVar::B1, 1.0, 30.0, 30)];
            }
            Experiment::Fig3 => {
                (p.n, p.sigma_co, p.eps_so) = (4, 0.1, 0.01);
                c.sweeps = vec![SweepAxis::log(SweepVar::Power, 1.0, 1e4, 17)];
            }
            Experiment::Fig4 => {
                c.sweeps = vec![SweepAxis::log(SweepVar::Power, 1.0, 100.0, 9)];
            }
            Experiment::Fig5 => {
                p.p = 10.0;
                c.sweeps = vec![SweepAxis::log(SweepVar::Epsilon, 1e-3, 0.1, 9)];
            }
            Experiment::Fig6 => {
                (p.p, p.sigma_co) = (20.0, 0.03);
                c.sweeps = vec![SweepAxis::log(SweepVar::Epsilon, 1e-3, 1.0, 10)];
            }
            Experiment::Outage => {
                c.sweeps = vec![SweepAxis::linear(SweepVar::Rate, 0.0, 6.0, 25)];
            }
            Experiment::Montecarlo => c.draws = 1_000_000,
            _ => {}
        }
        c
    }

    pub fn resolve(experiment: Experiment, o: &Overrides) -> Result<Self> {
        let mut c = ExperimentConfig::defaults(experiment);
        let p = &mut c.params;
        if let Some(v) = o.n {
            p.n = v;
        }
        if let Some(v) = o.power {
            p.p = v;
        }
        if let Some(db) = o.power_db {
            if o.power.is_some() {
                return param("set either power or power_db, not both");
            }
            p.p = 10f64.powf(db / 10.0);
        }
        if let Some(v) = o.sigma_d2 {
            p.sigma_d2 = v;
        }
        if let Some(v) = o.sigma {
            p.sigma_co = v;
        }
        if let Some(v) = o.epsilon {
            p.eps_so = v;
        }
        if let Some(v) = o.b1 {
            p.b1 = v;
        }
        if let Some(v) = o.b2 {
            p.b2 = v;
        }
        if let Some(v) = o.delta {
            p.delta = v;
        }
        if let Some(v) = o.sigma_g2 {
            p.sigma_g2 = v;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { c.$f = v; } )* };
        }
        take!(gain2, phi, budget, fraction, seed, draws, workers);
        if let Some(v) = o.codebook {
            c.codebook = v;
        }
        if !o.sweeps.is_empty() {
            c.sweeps = o.sweeps.clone();
        }
        c.out = o.out.clone();
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.sweeps.len() > 2 {
            return param("at most two sweep axes are supported");
        }
        if !(self.gain2 > 0.0) {
            return param(format!("gain2 must be positive, got {}", self.gain2));
        }
        if !(self.phi > 0.0 && self.phi <= 1.0) {
            return param(format!("phi must lie in (0, 1], got {}", self.phi));
        }
        if !(self.fraction > 0.0 && self.fraction < 1.0) {
            return param(format!("fraction must lie in (0, 1), got {}", self.fraction));
        }
        if self.workers == 0 {
            return param("workers must be positive");
        }
        for s in &self.sweeps {
            let allowed = match self.experiment {
                Experiment::Outage => true,
                Experiment::Table1 | Experiment::SweepTau | Experiment::BitsForFraction | Experiment::Montecarlo => false,
                Experiment::Fig1 | Experiment::Fig3 | Experiment::Fig4 => s.variable == SweepVar::Power,
                Experiment::Fig2 => s.variable == SweepVar::B1,
                Experiment::Fig5 | Experiment::Fig6 => s.variable == SweepVar::Epsilon,
                Experiment::Design | Experiment::Throughput => !matches!(s.variable, SweepVar::Rate | SweepVar::Phi),
            };
            if !allowed {
                return param(format!("experiment {} cannot sweep '{}'", self.experiment, s.variable.name()));
            }
        }
        Ok(())
    }

    /// SHA-256 of the settings that determine the output.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    fn sim(&self, params: SystemParams, seed: u64, draws: u64) -> SimConfig {
        SimConfig { params, draws, seed, codebook_source: self.codebook, workers: self.workers }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Missing,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) => write!(f, "{x}"),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Text(t) => f.write_str(t),
            Cell::Missing => Ok(()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x.into())
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

/// One experiment's output rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(experiment: Experiment, columns: &[&str]) -> Self {
        Table {
            schema: format!("sld/{}/v{SCHEMA_VERSION}", experiment.name()),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn with_axes(experiment: Experiment, axes: &[SweepAxis], columns: &[&str]) -> Self {
        let mut all: Vec<&str> = axes.iter().map(|a| a.variable.name()).collect();
        all.extend_from_slice(columns);
        Table::new(experiment, &all)
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# schema: {}\n{}\n", self.schema, self.columns.join(","));
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_string).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }
}

/// Result of [`run_experiment`]: the table plus its metadata sidecar.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub table: Table,
    pub metadata: serde_json::Value,
}

/// Conventions recorded in every sidecar.
fn conventions() -> serde_json::Value {
    serde_json::json!({
        "powers": "linear inside the library; power_db = 10 log10(power)",
        "rates": "bits per channel use",
        "perfect_feedback_baseline": "exact direction and gain, no connection outage, no (1 - sigma) factor",
        "quantized_cgi_representative": "lower edge of the cell",
        "equalized_trim": "delta probability mass removed at each end of the CGI range",
        "bit_allocation_grid": "integer b2 from 1 to budget - b1_min",
    })
}

pub fn metadata(cfg: &ExperimentConfig, rows: usize) -> serde_json::Value {
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    serde_json::json!({
        "experiment": cfg.experiment.name(),
        "schema_version": SCHEMA_VERSION,
        "config_hash": cfg.hash(),
        "config": cfg,
        "seed": cfg.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "conventions": conventions(),
        "rows": rows,
        "timestamp_unix": now,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let table = match cfg.experiment {
        Experiment::Design => run_design(cfg)?,
        Experiment::Outage => run_outage(cfg)?,
        Experiment::Throughput => run_throughput(cfg)?,
        Experiment::Table1 => run_table1()?,
        Experiment::Fig1 => run_fig1(cfg)?,
        Experiment::Fig2 => run_fig2(cfg)?,
        Experiment::Fig3 => run_fig3(cfg)?,
        Experiment::Fig4 => run_fig4(cfg)?,
        Experiment::Fig5 => run_fig5(cfg)?,
        Experiment::Fig6 => run_fig6(cfg)?,
        Experiment::SweepTau => run_sweep_tau(cfg)?,
        Experiment::BitsForFraction => run_bits_for_fraction(cfg)?,
        Experiment::Montecarlo => run_montecarlo(cfg)?,
    };
    let metadata = metadata(cfg, table.rows.len());
    Ok(ExperimentOutput { table, metadata })
}

/// Point on the sweep grid: parameter set plus the non-parameter scalars.
#[derive(Debug, Clone, Copy)]
struct Point {
    params: SystemParams,
    gain2: f64,
    rate: f64,
    phi: f64,
}

fn apply(pt: &mut Point, var: SweepVar, x: f64) -> Result<()> {
    let p = &mut pt.params;
    let as_u32 = |x: f64| -> Result<u32> {
        if x >= 0.0 && x <= u32::MAX as f64 {
            Ok(x as u32)
        } else {
            param(format!("sweep value {x} is not a valid bit count"))
        }
    };
    match var {
        SweepVar::Power => p.p = x,
        SweepVar::N => p.n = x as usize,
        SweepVar::SigmaD2 => p.sigma_d2 = x,
        SweepVar::Sigma => p.sigma_co = x,
        SweepVar::Epsilon => p.eps_so = x,
        SweepVar::B1 => p.b1 = as_u32(x)?,
        SweepVar::B2 => p.b2 = as_u32(x)?,
        SweepVar::Delta => p.delta = x,
        SweepVar::SigmaG2 => p.sigma_g2 = x,
        SweepVar::Gain2 => pt.gain2 = x,
        SweepVar::Rate => pt.rate = x,
        SweepVar::Phi => pt.phi = x,
    }
    Ok(())
}

/// Cartesian grid over the configured axes, first axis outermost.
fn grid(cfg: &ExperimentConfig, rate: f64) -> Result<Vec<(Vec<f64>, Point)>> {
    let base = Point { params: cfg.params, gain2: cfg.gain2, rate, phi: cfg.phi };
    let mut out = vec![(Vec::new(), base)];
    for axis in &cfg.sweeps {
        let mut next = Vec::new();
        for (xs, pt) in &out {
            for x in axis.values() {
                let mut pt = *pt;
                apply(&mut pt, axis.variable, x)?;
                pt.params.validate()?;
                let mut xs = xs.clone();
                xs.push(x);
                next.push((xs, pt));
            }
        }
        out = next;
    }
    Ok(out)
}

fn design_or_none(params: &SystemParams, gain2: f64) -> Result<Option<RateDesign>> {
    match design_closed_form(params, gain2) {
        Ok(d) => Ok(Some(d)),
        Err(Error::Infeasible(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn require_feasible_bits(params: &SystemParams) -> Result<FeasibilityReport> {
    let report = feasibility(params)?;
    if report.feasible_bits {
        Ok(report)
    } else {
        Err(Error::Infeasible(Box::new(report)))
    }
}

const DESIGN_COLUMNS: [&str; 12] = [
    "gain2_used", "feasible", "b1_min", "mu_min", "phi_star", "rb_star", "re_star", "rs_star", "phi_max", "pco_residual",
    "pso_residual", "note",
];

fn design_row(params: &SystemParams, gain2: f64) -> Result<Vec<Cell>> {
    let report = feasibility(params)?;
    let d = if report.feasible_bits { design_or_none(params, gain2)? } else { None };
    let mut row: Vec<Cell> = vec![gain2.into(), d.is_some().into(), report.b1_min.into(), report.mu_min.into()];
    match d {
        Some(d) => {
            let (pco_res, pso_res) = residuals(params, &d, gain2)?;
            row.extend([
                d.phi_star.into(),
                d.rb_star.into(),
                d.re_star.into(),
                d.rs_star.into(),
                d.phi_max.into(),
                pco_res.into(),
                pso_res.into(),
                Cell::Missing,
            ]);
        }
        None => {
            row.extend([0.0.into(), 0.0.into(), 0.0.into(), 0.0.into(), Cell::Missing, Cell::Missing, Cell::Missing]);
            let note = if report.feasible_bits {
                format!("gain2 does not exceed mu_min = {}", report.mu_min)
            } else {
                report.note.clone()
            };
            row.push(Cell::Text(note.replace(',', ";")));
        }
    }
    Ok(row)
}

/// Constraint slack at the design: `pco - sigma` and `pso - epsilon`.
pub fn residuals(params: &SystemParams, d: &RateDesign, gain2: f64) -> Result<(f64, f64)> {
    let pco = pco_qca(params, d.rb_star, d.phi_star, gain2)?;
    Ok((pco - params.sigma_co, pso(params, d.re_star, d.phi_star) - params.eps_so))
}

fn run_design(cfg: &ExperimentConfig) -> Result<Table> {
    if cfg.sweeps.is_empty() {
        // A single query must be feasible.
        design_closed_form(&cfg.params, cfg.gain2)?;
    }
    let mut t = Table::with_axes(cfg.experiment, &cfg.sweeps, &DESIGN_COLUMNS);
    for (xs, pt) in grid(cfg, 0.0)? {
        let mut row: Vec<Cell> = xs.into_iter().map(Cell::Num).collect();
        row.extend(design_row(&pt.params, pt.gain2)?);
        t.push(row);
    }
    Ok(t)
}

fn run_outage(cfg: &ExperimentConfig) -> Result<Table> {
    let cols = ["gain2_used", "phi_used", "rate_used", "pco_qca", "pco_empirical", "pco_std_err", "pso", "pso_empirical", "pso_std_err"];
    let mut t = Table::with_axes(cfg.experiment, &cfg.sweeps, &cols);
    for (xs, pt) in grid(cfg, 1.0)? {
        let sim = Simulator::new(cfg.sim(pt.params, cfg.seed, cfg.draws))?;
        let pco = sim.empirical_pco(pt.rate, pt.phi, pt.gain2)?;
        let pso_emp = sim.empirical_pso(pt.rate, pt.phi)?;
        let mut row: Vec<Cell> = xs.into_iter().map(Cell::Num).collect();
        row.extend([
            pt.gain2.into(),
            pt.phi.into(),
            pt.rate.into(),
            pco_qca(&pt.params, pt.rate, pt.phi, pt.gain2)?.into(),
            pco.value.into(),
            pco.std_err.into(),
            pso(&pt.params, pt.rate, pt.phi).into(),
            pso_emp.value.into(),
            pso_emp.std_err.into(),
        ]);
        t.push(row);
    }
    Ok(t)
}

/// Quantized-CGI throughput that treats an empty equalized range as silence.
fn quantized_eta(params: &SystemParams) -> Result<Option<f64>> {
    if params.b2 == 0 || !feasibility(params)?.feasible_bits {
        return Ok(None);
    }
    match build_quantizer(params) {
        Ok(q) => Ok(Some(throughput_quantized_cgi(params, &q)?.eta)),
        Err(Error::Parameter(m)) if m.contains("no room") => Ok(Some(0.0)),
        Err(e) => Err(e),
    }
}

fn run_throughput(cfg: &ExperimentConfig) -> Result<Table> {
    if cfg.sweeps.is_empty() {
        require_feasible_bits(&cfg.params)?;
    }
    let cols = ["b1_min", "mu_min", "eta_exact", "eta_quantized", "eta_asymptote"];
    let mut t = Table::with_axes(cfg.experiment, &cfg.sweeps, &cols);
    for (xs, pt) in grid(cfg, 0.0)? {
        let p = pt.params;
        let report = feasibility(&p)?;
        let mut row: Vec<Cell> = xs.into_iter().map(Cell::Num).collect();
        row.extend([
            report.b1_min.into(),
            report.mu_min.into(),
            throughput_exact_cgi(&p)?.eta.into(),
            quantized_eta(&p)?.into(),
            if report.feasible_bits { throughput_asymptote(&p)?.into() } else { 0.0.into() },
        ]);
        t.push(row);
    }
    Ok(t)
}

fn run_table1() -> Result<Table> {
    let mut t = Table::new(Experiment::Table1, &["sigma", "epsilon", "b1_min"]);
    for sigma in [1.0, 0.1, 0.01] {
        for eps in [1.0, 0.1, 0.01, 0.001] {
            t.push(vec![sigma.into(), eps.into(), b1_min(sigma, eps)?.into()]);
        }
    }
    Ok(t)
}

/// Simulated optimal secrecy rate with a replica-based standard error.
fn simulated_rs(cfg: &ExperimentConfig, params: SystemParams, gain2: f64, codebook: Option<&Codebook>) -> Result<(f64, f64)> {
    let grid = phi_grid(PHI_POINTS);
    let run = |seed: u64, draws: u64| -> Result<f64> {
        let sc = cfg.sim(params, seed, draws);
        let sim = match codebook {
            Some(cb) => Simulator::with_codebook(sc, cb.clone())?,
            None => Simulator::new(sc)?,
        };
        sim.empirical_rs_star(gain2, &grid, RB_TOLERANCE)
    };
    let value = run(cfg.seed, cfg.draws)?;
    let per = (cfg.draws / REPLICAS).max(crate::montecarlo::MIN_DRAWS);
    let reps = (1..=REPLICAS).map(|k| run(cfg.seed.wrapping_add(k), per)).collect::<Result<Vec<_>>>()?;
    let mean = reps.iter().sum::<f64>() / REPLICAS as f64;
    let var = reps.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (REPLICAS - 1) as f64;
    Ok((value, (var / REPLICAS as f64).sqrt()))
}

fn run_fig1(cfg: &ExperimentConfig) -> Result<Table> {
    let mut t = Table::new(Experiment::Fig1, &["P", "sigma", "rs_closed_form", "rs_empirical", "std_err"]);
    let codebook = Simulator::new(cfg.sim(cfg.params, cfg.seed, cfg.draws))?.codebook().cloned();
    for p in cfg.sweeps[0].values() {
        for sigma in [0.01, 0.1] {
            let params = SystemParams { p, sigma_co: sigma, ..cfg.params };
            let rs = design_or_none(&params, cfg.gain2)?.map_or(0.0, |d| d.rs_star);
            let (emp, se) = simulated_rs(cfg, params, cfg.gain2, codebook.as_ref())?;
            t.push(vec![p.into(), sigma.into(), rs.into(), emp.into(), se.into()]);
        }
    }
    Ok(t)
}

fn run_fig2(cfg: &ExperimentConfig) -> Result<Table> {
    let mut t = Table::new(Experiment::Fig2, &["b1", "sigma", "b1_min", "feasible", "phi_star", "rs_star"]);
    for b1 in cfg.sweeps[0].values() {
        for sigma in [0.05, 0.1, 0.2] {
            let params = SystemParams { b1: b1 as u32, sigma_co: sigma, ..cfg.params };
            let need = b1_min(sigma, params.eps_so)?;
            let d = if params.b1 >= need { design_or_none(&params, cfg.gain2)? } else { None };
            t.push(vec![
                b1.into(),
                sigma.into(),
                need.into(),
                d.is_some().into(),
                d.map(|d| d.phi_star).into(),
                d.map(|d| d.rs_star).into(),
            ]);
        }
    }
    Ok(t)
}

fn run_fig3(cfg: &ExperimentConfig) -> Result<Table> {
    let mut t = Table::new(Experiment::Fig3, &["P", "feasible", "phi_star", "rs_star", "phi_perfect", "rs_perfect"]);
    for p in cfg.sweeps[0].values() {
        let params = cfg.params.with_power(p);
        let d = design_or_none(&params, cfg.gain2)?;
        let perfect = design_perfect_csi(&params, cfg.gain2)?;
        let (pp, rp) = if perfect.rs_star > 0.0 { (Some(perfect.phi_star), perfect.rs_star) } else { (None, 0.0) };
        t.push(vec![
            p.into(),
            d.is_some().into(),
            d.map(|d| d.phi_star).into(),
            d.map_or(0.0, |d| d.rs_star).into(),
            pp.into(),
            rp.into(),
        ]);
    }
    Ok(t)
}

const FIG4_B2: [u32; 5] = [1, 2, 3, 4, 5];

fn run_fig4(cfg: &ExperimentConfig) -> Result<Table> {
    let mut cols = vec!["P", "eta_exact"];
    let names: Vec<String> = FIG4_B2.iter().map(|b| format!("eta_b2_{b}")).collect();
    cols.extend(names.iter().map(String::as_str));
    cols.extend(["eta_asymptote", "mc_b2", "eta_mc", "eta_mc_std_err"]);
    let mut t = Table::new(Experiment::Fig4, &cols);
    for p in cfg.sweeps[0].values() {
        let params = cfg.params.with_power(p);
        let mut row: Vec<Cell> = vec![p.into(), throughput_exact_cgi(&params)?.eta.into()];
        for b2 in FIG4_B2 {
            row.push(quantized_eta(&params.with_b2(b2))?.into());
        }
        row.push(throughput_asymptote(&params).ok().into());
        row.push(params.b2.into());
        match build_quantizer(&params) {
            Ok(q) => {
                let est = Simulator::new(cfg.sim(params, cfg.seed, cfg.draws))?.empirical_throughput(Some(&q))?;
                row.extend([est.accounted.value.into(), est.accounted.std_err.into()]);
            }
            Err(Error::Parameter(_)) | Err(Error::Infeasible(_)) => row.extend([Cell::Missing, Cell::Missing]),
            Err(e) => return Err(e),
        }
        t.push(row);
    }
    Ok(t)
}

fn run_fig5(cfg: &ExperimentConfig) -> Result<Table> {
    let mut t = Table::new(Experiment::Fig5, &["epsilon", "n", "budget", "tau_star", "b2_star", "eta_star"]);
    for eps in cfg.sweeps[0].values() {
        for n in [2usize, 3, 4] {
            let params = SystemParams { n, eps_so: eps, ..cfg.params };
            let s = sweep_bit_allocation(&params, cfg.budget, None)?;
            let best = s.best_point();
            t.push(vec![eps.into(), n.into(), cfg.budget.into(), best.tau.into(), best.b2.into(), best.eta.into()]);
        }
    }
    Ok(t)
}

fn run_fig6(cfg: &ExperimentConfig) -> Result<Table> {
    let cols = ["epsilon", "n", "fraction", "bits_per_antenna", "total_bits", "tau_star", "eta", "eta_perfect", "note"];
    let mut t = Table::new(Experiment::Fig6, &cols);
    for eps in cfg.sweeps[0].values() {
        for n in [2usize, 4] {
            let params = SystemParams { n, eps_so: eps, ..cfg.params };
            let mut row: Vec<Cell> = vec![eps.into(), n.into(), cfg.fraction.into()];
            match bits_for_fraction(&params, cfg.fraction)? {
                Some(r) => row.extend([
                    r.bits_per_antenna.into(),
                    r.total_bits.into(),
                    r.tau_star.into(),
                    r.eta.into(),
                    r.eta_perfect.into(),
                    Cell::Missing,
                ]),
                None => {
                    row.extend([Cell::Missing, Cell::Missing, Cell::Missing, Cell::Missing]);
                    row.push(throughput_perfect_feedback(&params)?.into());
                    row.push(Cell::Text(unreachable_note(n)));
                }
            }
            t.push(row);
        }
    }
    Ok(t)
}

fn run_sweep_tau(cfg: &ExperimentConfig) -> Result<Table> {
    let s = sweep_bit_allocation(&cfg.params, cfg.budget, None)?;
    let mut t = Table::new(Experiment::SweepTau, &["tau", "b1", "b2", "eta", "is_argmax"]);
    for (i, pt) in s.points.iter().enumerate() {
        t.push(vec![pt.tau.into(), pt.b1.into(), pt.b2.into(), pt.eta.into(), (i == s.best).into()]);
    }
    Ok(t)
}

fn unreachable_note(n: usize) -> String {
    format!("not reached within {} bits", MAX_BITS_PER_ANTENNA as usize * n)
}

fn run_bits_for_fraction(cfg: &ExperimentConfig) -> Result<Table> {
    let Some(r) = bits_for_fraction(&cfg.params, cfg.fraction)? else {
        let mut report = feasibility(&cfg.params)?;
        report.note = format!("fraction {} {}", cfg.fraction, unreachable_note(cfg.params.n));
        return Err(Error::Infeasible(Box::new(report)));
    };
    let cols = ["n", "epsilon", "fraction", "total_bits", "bits_per_antenna", "tau_star", "eta", "eta_perfect"];
    let mut t = Table::new(Experiment::BitsForFraction, &cols);
    t.push(vec![
        cfg.params.n.into(),
        cfg.params.eps_so.into(),
        cfg.fraction.into(),
        r.total_bits.into(),
        r.bits_per_antenna.into(),
        r.tau_star.into(),
        r.eta.into(),
        r.eta_perfect.into(),
    ]);
    Ok(t)
}

fn run_montecarlo(cfg: &ExperimentConfig) -> Result<Table> {
    let p = cfg.params;
    let d = design_closed_form(&p, cfg.gain2)?;
    let sim = Simulator::new(cfg.sim(p, cfg.seed, cfg.draws))?;
    let mut t = Table::new(Experiment::Montecarlo, &["quantity", "analytic", "empirical", "std_err", "z_score"]);
    let mut push = |name: &str, analytic: f64, est: crate::montecarlo::EstimateWithError| {
        t.push(vec![name.into(), analytic.into(), est.value.into(), est.std_err.into(), est.z_score(analytic).into()]);
    };
    push("pco_at_design", pco_qca(&p, d.rb_star, d.phi_star, cfg.gain2)?, sim.empirical_pco(d.rb_star, d.phi_star, cfg.gain2)?);
    push("pso_at_design", pso(&p, d.re_star, d.phi_star), sim.empirical_pso(d.re_star, d.phi_star)?);
    let exact = sim.empirical_throughput(None)?;
    let eta = throughput_exact_cgi(&p)?.eta;
    push("eta_exact_cgi_accounted", eta, exact.accounted);
    push("eta_exact_cgi_delivered", eta, exact.delivered);
    push("outage_when_transmitting", p.sigma_co, exact.outage_when_transmitting);
    if let Some(eta_q) = quantized_eta(&p)? {
        if let Ok(q) = build_quantizer(&p) {
            let est = sim.empirical_throughput(Some(&q))?;
            push("eta_quantized_cgi_accounted", eta_q, est.accounted);
            push("eta_quantized_cgi_delivered", eta_q, est.delivered);
        }
    }
    push("secrecy_capacity_shortfall", p.sigma_co + p.eps_so, sim.empirical_secrecy_capacity_bound(cfg.gain2)?);
    let (rs, se) = simulated_rs(cfg, p, cfg.gain2, sim.codebook())?;
    t.push(vec!["rs_star".into(), d.rs_star.into(), rs.into(), se.into(), Cell::Missing]);
    Ok(t)
}

/// Human-readable summary of one design query.
pub fn format_design(params: &SystemParams, gain2: f64, d: &RateDesign, report: &FeasibilityReport) -> Result<String> {
    let (pco_res, pso_res) = residuals(params, d, gain2)?;
    let mut s = String::new();
    let _ = writeln!(s, "gain2            {gain2}");
    let _ = writeln!(s, "phi*             {}", d.phi_star);
    let _ = writeln!(s, "Rb*              {}", d.rb_star);
    let _ = writeln!(s, "Re*              {}", d.re_star);
    let _ = writeln!(s, "Rs*              {}", d.rs_star);
    let _ = writeln!(s, "phi_max          {}", d.phi_max);
    let _ = writeln!(s, "b1_min           {}", report.b1_min);
    let _ = writeln!(s, "mu_min           {}", report.mu_min);
    let _ = writeln!(s, "pco - sigma      {pco_res:e}");
    let _ = writeln!(s, "pso - epsilon    {pso_res:e}");
    Ok(s)
}

pub fn design_json(params: &SystemParams, gain2: f64, d: &RateDesign, report: &FeasibilityReport) -> Result<serde_json::Value> {
    let (pco_res, pso_res) = residuals(params, d, gain2)?;
    Ok(serde_json::json!({
        "params": params,
        "gain2": gain2,
        "design": d,
        "feasibility": report,
        "residuals": { "pco_minus_sigma": pco_res, "pso_minus_epsilon": pso_res },
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_parses_with_comments() {
        let o = Overrides::parse_config("# header\nn = 3\npower_db = 10 # ten dB\nsweep = power:1:100:3:log\n\ncodebook = rvq\n").unwrap();
        assert_eq!(o.n, Some(3));
        assert_eq!(o.power_db, Some(10.0));
        assert_eq!(o.codebook, Some(CodebookSource::Rvq));
        let c = ExperimentConfig::resolve(Experiment::Throughput, &o).unwrap();
        assert!((c.params.p - 10.0).abs() < 1e-12);
        assert_eq!(c.sweeps[0].values(), vec![1.0, 10.0, 100.0]);
    }

    #[test]
    fn config_errors_name_the_line() {
        let e = Overrides::parse_config("n = 4\nbogus = 1\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(Overrides::parse_config("n 4").is_err());
        assert!(Overrides::parse_config("n = four").is_err());
        assert!(Overrides::parse_config("sweep = power:1:10").is_err());
        assert!(Overrides::parse_config("sweep = power:0:10:3:log").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = Overrides::parse_config("power = 5\nb1 = 8").unwrap();
        let flags = Overrides { power_db: Some(20.0), ..Overrides::default() };
        let c = ExperimentConfig::resolve(Experiment::Design, &file.merged(flags)).unwrap();
        assert!((c.params.p - 100.0).abs() < 1e-9);
        assert_eq!(c.params.b1, 8);
    }

    #[test]
    fn integer_sweeps_round() {
        let a: SweepAxis = "b1:1:4:7".parse().unwrap();
        assert_eq!(a.values(), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn sweep_variables_checked_per_experiment() {
        let o = Overrides { sweeps: vec!["rate:0:1:3".parse().unwrap()], ..Overrides::default() };
        assert!(ExperimentConfig::resolve(Experiment::Throughput, &o).is_err());
        assert!(ExperimentConfig::resolve(Experiment::Outage, &o).is_ok());
    }

    #[test]
    fn table1_grid() {
        let t = run_table1().unwrap();
        let b: Vec<String> = t.rows.iter().map(|r| r[2].to_string()).collect();
        assert_eq!(b, ["1", "1", "1", "1", "1", "4", "7", "10", "1", "4", "7", "10"]);
        assert!(t.to_csv().starts_with("# schema: sld/table1/v1\nsigma,epsilon,b1_min\n1,1,1\n"));
    }

    #[test]
    fn infeasible_single_design_is_an_error() {
        let o = Overrides { b1: Some(3), ..Overrides::default() };
        let c = ExperimentConfig::resolve(Experiment::Design, &o).unwrap();
        assert!(matches!(run_experiment(&c), Err(Error::Infeasible(_))));
    }

    #[test]
    fn design_sweep_marks_infeasible_rows() {
        let o = Overrides { sweeps: vec!["b1:5:8:4".parse().unwrap()], ..Overrides::default() };
        let c = ExperimentConfig::resolve(Experiment::Design, &o).unwrap();
        let t = run_experiment(&c).unwrap().table;
        let feas = t.column("feasible").unwrap();
        let flags: Vec<String> = t.rows.iter().map(|r| r[feas].to_string()).collect();
        assert_eq!(flags, ["false", "false", "true", "true"]);
    }

    #[test]
    fn csv_is_deterministic() {
        let o = Overrides { draws: Some(2000), sweeps: vec!["rate:0:4:3".parse().unwrap()], ..Overrides::default() };
        let c = ExperimentConfig::resolve(Experiment::Outage, &o).unwrap();
        let a = run_experiment(&c).unwrap().table.to_csv();
        let b = run_experiment(&ExperimentConfig { workers: 1, ..c.clone() }).unwrap().table.to_csv();
        assert_eq!(a, b);
        let c2 = ExperimentConfig { seed: 43, ..c.clone() };
        assert_ne!(c.hash(), c2.hash());
        assert_eq!(c.hash(), ExperimentConfig { workers: 1, ..c.clone() }.hash());
    }

    #[test]
    fn sweep_tau_marks_one_argmax() {
        let o = Overrides { budget: Some(20), ..Overrides::default() };
        let c = ExperimentConfig::resolve(Experiment::SweepTau, &o).unwrap();
        let t = run_experiment(&c).unwrap().table;
        assert_eq!(t.rows.iter().filter(|r| r[4] == Cell::Bool(true)).count(), 1);
    }
}
