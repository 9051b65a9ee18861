//! Secrecy throughput `(1 - sigma) E[Rs*(||h||^2)]` with exact or quantized
//! channel gain feedback, the large-power asymptote, and the split of a
//! feedback budget between direction and gain bits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{design_perfect_csi, RateCurve};
use crate::error::{param, Error, Result};
use crate::outage::{b1_min, feasibility};
use crate::params::SystemParams;
pub use crate::special::{gamma_reg_upper, gamma_reg_upper_inv};
use crate::special::{adaptive_simpson, erlang_pdf, grid_golden_max};

/// Tail mass beyond the quadrature cap.
const TAIL_MASS: f64 = 1e-12;
/// Quadrature tolerance relative to the size of the integral.
const QUAD_TOL: f64 = 1e-10;
/// Equalized quantizers with more interior cells than this are summed through
/// an Euler-Maclaurin correction of the integral instead of cell by cell.
pub const MAX_EXPLICIT_CELLS: u64 = 1 << 16;
/// Grid used to bracket the one-bit threshold before golden-section search.
const THRESHOLD_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CgiScheme {
    OneBit,
    Equalized,
}

/// Partition of `||h||^2` fed back with `b2` bits.
///
/// Index 0 suspends transmission. Index `m >= 1` transmits with the design
/// for the smallest gain in cell `m`, so both outage constraints hold for
/// every gain in the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgiQuantizer {
    pub scheme: CgiScheme,
    pub b2: u32,
    /// One-bit threshold.
    pub mu_t: Option<f64>,
    /// Equalized range `(mu1, mu2]`.
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    /// Lower edges of the transmitting cells, ascending. Empty when the
    /// partition is too fine to list; see [`MAX_EXPLICIT_CELLS`].
    pub boundaries: Vec<f64>,
    /// Gain assumed in each transmitting cell (its lower edge).
    pub representatives: Vec<f64>,
    /// Probability mass of each interior equalized cell.
    pub cell_mass: f64,
    params: SystemParams,
}

impl CgiQuantizer {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Number of interior equal-mass cells, `2^{b2} - 2`, for the equalized scheme.
    pub fn interior_cells(&self) -> u64 {
        match self.scheme {
            CgiScheme::OneBit => 0,
            CgiScheme::Equalized => (1u64 << self.b2) - 2,
        }
    }

    fn upper_tail_at_mu1(&self) -> f64 {
        gamma_reg_upper(self.params.n, self.mu1.expect("equalized"))
    }

    /// Lower edge of transmitting cell `m` (1-based).
    fn edge(&self, m: u64) -> f64 {
        match self.scheme {
            CgiScheme::OneBit => self.mu_t.expect("one-bit threshold"),
            CgiScheme::Equalized => {
                let cells = self.interior_cells();
                if m > cells {
                    return self.mu2.expect("equalized");
                }
                if let Some(e) = self.boundaries.get((m - 1) as usize) {
                    return *e;
                }
                let u = self.upper_tail_at_mu1() - (m - 1) as f64 * self.cell_mass;
                gamma_reg_upper_inv(self.params.n, u.clamp(f64::MIN_POSITIVE, 1.0)).expect("valid tail")
            }
        }
    }

    /// Feedback index for a channel gain.
    pub fn index(&self, gain2: f64) -> u64 {
        match self.scheme {
            CgiScheme::OneBit => u64::from(gain2 >= self.mu_t.expect("one-bit threshold")),
            CgiScheme::Equalized => {
                let mu1 = self.mu1.expect("equalized");
                let mu2 = self.mu2.expect("equalized");
                if gain2 < mu1 {
                    return 0;
                }
                let cells = self.interior_cells();
                if gain2 >= mu2 {
                    return cells + 1;
                }
                let tail = gamma_reg_upper(self.params.n, gain2);
                let mut m = (((self.upper_tail_at_mu1() - tail) / self.cell_mass).floor() as u64 + 1)
                    .clamp(1, cells);
                // Keep the representative at or below the true gain.
                while m > 1 && self.edge(m) > gain2 {
                    m -= 1;
                }
                while m < cells && self.edge(m + 1) <= gain2 {
                    m += 1;
                }
                m
            }
        }
    }

    /// Gain the transmitter assumes for index `m`; `None` means stay silent.
    pub fn representative(&self, m: u64) -> Option<f64> {
        if m == 0 {
            None
        } else {
            Some(self.edge(m))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputResult {
    pub eta: f64,
    pub scheme: String,
    pub params_echo: SystemParams,
    pub note: Option<String>,
}

fn check_params(params: &SystemParams) -> Result<()> {
    params.validate()?;
    if params.sigma_d2 <= 0.0 {
        return param("throughput evaluation needs sigma_d2 > 0");
    }
    Ok(())
}

/// Throughput with the channel gain known exactly at the transmitter.
pub fn throughput_exact_cgi(params: &SystemParams) -> Result<ThroughputResult> {
    check_params(params)?;
    let report = feasibility(params)?;
    if !report.feasible_bits {
        return Ok(ThroughputResult {
            eta: 0.0,
            scheme: "exact_cgi".into(),
            params_echo: *params,
            note: Some(report.note),
        });
    }
    let curve = RateCurve::new(params)?;
    let integral = rate_integral(&curve, curve.mu_min(), None)?;
    Ok(ThroughputResult {
        eta: (1.0 - params.sigma_co) * integral,
        scheme: "exact_cgi".into(),
        params_echo: *params,
        note: None,
    })
}

/// `E[Rs*; lo < ||h||^2 <= hi]`, with the tail beyond the cap bounded analytically
/// when `hi` is open.
fn rate_integral(curve: &RateCurve, lo: f64, hi: Option<f64>) -> Result<f64> {
    expected_rate(curve.params().n, |z| curve.rs(z), lo, hi)
}

/// `E[r(X); lo < X <= hi]` for `X ~ Erlang(n, 1)` and non-decreasing `r >= 0`.
///
/// An open upper end is cut where the conditional tail mass beyond `lo` drops
/// below [`TAIL_MASS`]; the Erlang law ages positively, so the cut is relative
/// to the mass above `lo` wherever `lo` sits.
fn expected_rate<F: Fn(f64) -> f64>(n: usize, r: F, lo: f64, hi: Option<f64>) -> Result<f64> {
    let (cap, open) = match hi {
        Some(hi) => (hi, false),
        None => (lo + gamma_reg_upper_inv(n, TAIL_MASS)?, true),
    };
    if cap <= lo {
        return Ok(0.0);
    }
    let scale = r(cap) * (gamma_reg_upper(n, lo) - gamma_reg_upper(n, cap)).max(0.0);
    let tol = (QUAD_TOL * scale).max(f64::MIN_POSITIVE);
    let body = adaptive_simpson(|z| r(z) * erlang_pdf(n, z), lo, cap, tol);
    let tail = if open { r(cap) * gamma_reg_upper(n, cap) } else { 0.0 };
    Ok(body + tail)
}

/// Large-power limit of the throughput.
pub fn throughput_asymptote(params: &SystemParams) -> Result<f64> {
    params.validate()?;
    let report = feasibility(params)?;
    if !report.feasible_bits {
        return Err(Error::Infeasible(Box::new(report)));
    }
    let k = params.dof();
    let num = ((params.b1 as f64).exp2() / (1.0 - params.sigma_co)).powf(1.0 / k) - 1.0;
    let den = params.eps_so.powf(-1.0 / k) - 1.0;
    if den <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((1.0 - params.sigma_co) * (num / den).log2())
}

/// One-bit on/off feedback with the threshold chosen to maximize
/// `(1 - sigma) Rs*(mu_T) Q(N, mu_T)`.
pub fn build_one_bit_quantizer(params: &SystemParams) -> Result<CgiQuantizer> {
    check_params(params)?;
    if params.b2 != 1 {
        return param(format!("the one-bit scheme needs b2 = 1, got {}", params.b2));
    }
    let curve = RateCurve::new(params)?;
    let n = params.n;
    let objective = |mu: f64| curve.rs(mu) * gamma_reg_upper(n, mu);
    let lo = curve.mu_min();
    let hi = lo + gamma_reg_upper_inv(n, 1e-15)?;
    let tol = 1e-12 * hi.max(1.0);
    let (mu_t, _) = grid_golden_max(objective, lo, hi, THRESHOLD_GRID, tol);
    Ok(CgiQuantizer {
        scheme: CgiScheme::OneBit,
        b2: 1,
        mu_t: Some(mu_t),
        mu1: None,
        mu2: None,
        boundaries: vec![mu_t],
        representatives: vec![mu_t],
        cell_mass: gamma_reg_upper(n, mu_t),
        params: *params,
    })
}

/// Equal-probability partition of `(mu1, mu2]` into `2^{b2} - 2` cells, plus a
/// suspend cell below `mu1` and an open top cell above `mu2`.
pub fn build_equalized_quantizer(params: &SystemParams) -> Result<CgiQuantizer> {
    check_params(params)?;
    if params.b2 < 2 {
        return param(format!("the equalized scheme needs b2 >= 2, got {}", params.b2));
    }
    if params.b2 > 62 {
        return param(format!("b2 = {} is too large to index", params.b2));
    }
    let curve = RateCurve::new(params)?;
    let n = params.n;
    let delta = params.delta;
    let upper_mu1 = gamma_reg_upper(n, curve.mu_min()) - delta;
    if !(upper_mu1 > delta) {
        return param(format!(
            "delta = {delta} leaves no room between mu1 and mu2 (Q(N, mu_min) = {})",
            upper_mu1 + delta
        ));
    }
    let mu1 = gamma_reg_upper_inv(n, upper_mu1)?;
    let mu2 = gamma_reg_upper_inv(n, delta)?;
    let cells = (1u64 << params.b2) - 2;
    let cell_mass = (upper_mu1 - delta) / cells as f64;

    let boundaries: Vec<f64> = if cells <= MAX_EXPLICIT_CELLS {
        (0..cells)
            .into_par_iter()
            .map(|k| {
                let u = upper_mu1 - k as f64 * cell_mass;
                if k == 0 {
                    Ok(mu1)
                } else {
                    gamma_reg_upper_inv(n, u)
                }
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let mut representatives = boundaries.clone();
    if !representatives.is_empty() {
        representatives.push(mu2);
    }
    Ok(CgiQuantizer {
        scheme: CgiScheme::Equalized,
        b2: params.b2,
        mu_t: None,
        mu1: Some(mu1),
        mu2: Some(mu2),
        boundaries,
        representatives,
        cell_mass,
        params: *params,
    })
}

/// Builds the scheme matching `params.b2`: one-bit for 1, equalized for 2 or more.
pub fn build_quantizer(params: &SystemParams) -> Result<CgiQuantizer> {
    match params.b2 {
        0 => param("quantized CGI needs b2 >= 1"),
        1 => build_one_bit_quantizer(params),
        _ => build_equalized_quantizer(params),
    }
}

/// Throughput when the transmitter only learns the CGI cell.
pub fn throughput_quantized_cgi(params: &SystemParams, q: &CgiQuantizer) -> Result<ThroughputResult> {
    check_params(params)?;
    if q.params != *params {
        return param("quantizer was built for different parameters");
    }
    let curve = RateCurve::new(params)?;
    let n = params.n;
    let scale = 1.0 - params.sigma_co;
    let (eta, scheme) = match q.scheme {
        CgiScheme::OneBit => {
            let mu_t = q.mu_t.expect("one-bit threshold");
            (scale * curve.rs(mu_t) * gamma_reg_upper(n, mu_t), "one_bit")
        }
        CgiScheme::Equalized => {
            let mu1 = q.mu1.expect("equalized");
            let mu2 = q.mu2.expect("equalized");
            let interior = if q.boundaries.is_empty() {
                // Right-endpoint Riemann sum of h(u) = Rs*(Q^{-1}(N, u)) over
                // u in [delta, Q(N, mu1)], so h'(u) = -Rs*'(z) / f(z).
                let d = q.cell_mass;
                let slope = |z: f64| {
                    let dz = 1e-6 * z.max(1e-3);
                    -(curve.rs(z + dz) - curve.rs(z - dz)) / (2.0 * dz) / erlang_pdf(n, z)
                };
                rate_integral(&curve, mu1, Some(mu2))? - 0.5 * d * (curve.rs(mu2) - curve.rs(mu1))
                    + d * d / 12.0 * (slope(mu1) - slope(mu2))
            } else {
                let sum: f64 = q.boundaries.par_iter().map(|&z| curve.rs(z)).sum();
                q.cell_mass * sum
            };
            let top = curve.rs(mu2) * gamma_reg_upper(n, mu2);
            (scale * (interior + top), "equalized")
        }
    };
    Ok(ThroughputResult {
        eta,
        scheme: format!("{scheme}_b2_{}", q.b2),
        params_echo: *params,
        note: None,
    })
}

/// Throughput with unlimited feedback: exact direction and gain, no
/// connection outage. Used as the reference for quantization efficiency.
pub fn throughput_perfect_feedback(params: &SystemParams) -> Result<f64> {
    check_params(params)?;
    let n = params.n;
    let lo = params.secrecy_gamma() * params.sigma_d2 / params.p;
    let rs = |z: f64| design_perfect_csi(params, z).map(|d| d.rs_star).unwrap_or(0.0);
    expected_rate(n, rs, lo, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocationPoint {
    pub b1: u32,
    pub b2: u32,
    pub tau: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationSweep {
    pub budget: u32,
    pub points: Vec<AllocationPoint>,
    pub best: usize,
}

impl AllocationSweep {
    pub fn best_point(&self) -> &AllocationPoint {
        &self.points[self.best]
    }

    pub fn tau_star(&self) -> f64 {
        self.best_point().tau
    }
}

fn allocation_eta(params: &SystemParams) -> Result<f64> {
    match build_quantizer(params) {
        Ok(q) => Ok(throughput_quantized_cgi(params, &q)?.eta),
        // The equalized range is empty: transmission essentially never happens.
        Err(Error::Parameter(msg)) if msg.contains("no room") => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Throughput for each split of a `budget`-bit feedback word into `b1` CDI
/// and `b2` CGI bits.
///
/// `taus` selects `b2 = round(tau * budget)`; `None` sweeps every integer
/// `b2` from 1 to `budget - b1_min`.
pub fn sweep_bit_allocation(params: &SystemParams, budget: u32, taus: Option<&[f64]>) -> Result<AllocationSweep> {
    check_params(params)?;
    if budget < 3 {
        return param(format!("bit budget must be at least 3, got {budget}"));
    }
    let need = b1_min(params.sigma_co, params.eps_so)?;
    if budget <= need {
        return param(format!("budget {budget} leaves no CGI bit beyond b1_min = {need}"));
    }
    let b2_values: Vec<u32> = match taus {
        None => (1..=budget - need).collect(),
        Some(taus) => {
            let mut v = Vec::with_capacity(taus.len());
            for &tau in taus {
                let b2 = (tau * budget as f64).round();
                if !(b2 >= 1.0 && b2 <= (budget - need) as f64) {
                    return param(format!(
                        "tau = {tau} gives b2 = {b2}, outside 1..={} for budget {budget}",
                        budget - need
                    ));
                }
                let b2 = b2 as u32;
                if !v.contains(&b2) {
                    v.push(b2);
                }
            }
            v.sort_unstable();
            v
        }
    };
    let points = b2_values
        .par_iter()
        .map(|&b2| {
            let p = SystemParams { b1: budget - b2, b2, ..*params };
            Ok(AllocationPoint { b1: p.b1, b2, tau: b2 as f64 / budget as f64, eta: allocation_eta(&p)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = points
        .iter()
        .enumerate()
        .fold(0, |best, (i, pt)| if pt.eta > points[best].eta { i } else { best });
    Ok(AllocationSweep { budget, points, best })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitsForFraction {
    pub total_bits: u32,
    pub bits_per_antenna: f64,
    pub tau_star: f64,
    pub eta: f64,
    pub eta_perfect: f64,
}

/// Largest total budget searched by [`bits_for_fraction`], per antenna.
pub const MAX_BITS_PER_ANTENNA: u32 = 24;

/// Smallest total feedback budget whose best split reaches `fraction` of the
/// unlimited-feedback throughput, or `None` if no budget up to
/// [`MAX_BITS_PER_ANTENNA`] bits per antenna does.
pub fn bits_for_fraction(params: &SystemParams, fraction: f64) -> Result<Option<BitsForFraction>> {
    check_params(params)?;
    if !(fraction > 0.0 && fraction < 1.0) {
        return param(format!("fraction must lie in (0, 1), got {fraction}"));
    }
    let eta_perfect = throughput_perfect_feedback(params)?;
    let target = fraction * eta_perfect;
    let start = b1_min(params.sigma_co, params.eps_so)? + 1;
    let limit = MAX_BITS_PER_ANTENNA * params.n as u32;
    for budget in start.max(3)..=limit {
        let sweep = sweep_bit_allocation(params, budget, None)?;
        let best = sweep.best_point();
        if best.eta >= target && best.eta > 0.0 {
            return Ok(Some(BitsForFraction {
                total_bits: budget,
                bits_per_antenna: budget as f64 / params.n as f64,
                tau_star: best.tau,
                eta: best.eta,
                eta_perfect,
            }));
        }
    }
    Ok(None)
}
