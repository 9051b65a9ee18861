//! Connection and secrecy outage probabilities and the two feasibility
//! conditions on the feedback budget and the channel gain.
//!
//! The connection outage uses the quantization cell approximation: the CDI
//! error `1 - cos^2(theta)` is modeled with CDF `2^{B1} x^{N-1}` on
//! `[0, 2^{-B1/(N-1)}]`. The secrecy outage is exact for a noiseless
//! eavesdropper with i.i.d. Rayleigh channel.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::codebook::qca_max_error;
use crate::error::{param, Error, Result};
use crate::params::SystemParams;

/// `log2(1 + x)` without losing digits for small `x`.
pub(crate) fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// `2^r - 1`.
pub(crate) fn exp2_m1(r: f64) -> f64 {
    (r * std::f64::consts::LN_2).exp_m1()
}

fn check_phi(phi: f64) -> Result<()> {
    if !(phi > 0.0 && phi < 1.0) {
        return param(format!("power allocation ratio must lie strictly inside (0, 1), got {phi}"));
    }
    Ok(())
}

fn check_gain(gain2: f64) -> Result<()> {
    if !(gain2 > 0.0 && gain2.is_finite()) {
        return param(format!("channel gain must be positive, got {gain2}"));
    }
    Ok(())
}

/// Capacity with the worst quantization error under the cap model; no outage below it.
pub fn rate_floor(params: &SystemParams, phi: f64, gain2: f64) -> f64 {
    let qmax = qca_max_error(params.n, params.b1);
    let signal = gain2 * params.p * phi * (1.0 - qmax);
    let leak = gain2 * params.p * (1.0 - phi) / params.dof() * qmax;
    ratio_rate(signal, leak + params.sigma_d2)
}

/// Capacity with a perfectly aligned beam; outage is certain above it.
pub fn rate_ceiling(params: &SystemParams, phi: f64, gain2: f64) -> f64 {
    ratio_rate(gain2 * params.p * phi, params.sigma_d2)
}

fn ratio_rate(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        log2_1p(num / den)
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Approximate connection outage probability for codeword rate `rb`.
pub fn pco_qca(params: &SystemParams, rb: f64, phi: f64, gain2: f64) -> Result<f64> {
    check_phi(phi)?;
    check_gain(gain2)?;
    if rb <= 0.0 {
        return Ok(0.0);
    }
    let t = exp2_m1(rb);
    let p_sig = params.p * phi;
    let p_an = params.p * (1.0 - phi) / params.dof();
    // Outage iff the CDI error exceeds this level.
    let threshold = (gain2 * p_sig - t * params.sigma_d2) / (gain2 * (p_sig + p_an * t));
    if threshold <= 0.0 {
        return Ok(1.0);
    }
    let qmax = qca_max_error(params.n, params.b1);
    if threshold >= qmax {
        return Ok(0.0);
    }
    let cdf = (params.b1 as f64).exp2() * threshold.powi(params.n as i32 - 1);
    Ok((1.0 - cdf).clamp(0.0, 1.0))
}

/// Exact secrecy outage probability for rate redundancy `re`.
///
/// Depends on neither the channel gain nor the eavesdropper's channel variance.
pub fn pso(params: &SystemParams, re: f64, phi: f64) -> f64 {
    if re <= 0.0 {
        return 1.0;
    }
    let k = params.dof();
    let base = 1.0 + exp2_m1(re) * (1.0 / phi - 1.0) / k;
    base.powf(-k)
}

/// Largest codeword rate whose approximate connection outage equals `sigma`.
pub fn rb_max(params: &SystemParams, phi: f64, gain2: f64) -> Result<f64> {
    check_phi(phi)?;
    check_gain(gain2)?;
    if params.sigma_co <= 0.0 {
        return Ok(rate_floor(params, phi, gain2));
    }
    if params.sigma_co >= 1.0 {
        return Ok(rate_ceiling(params, phi, gain2));
    }
    let q = params.residual_error();
    let alpha = gain2 * params.p * (1.0 - q);
    let beta = gain2 * params.p * q / params.dof();
    Ok(ratio_rate(alpha * phi, beta * (1.0 - phi) + params.sigma_d2))
}

/// Smallest rate redundancy meeting the secrecy outage constraint.
pub fn re_min(params: &SystemParams, phi: f64) -> Result<f64> {
    check_phi(phi)?;
    Ok(log2_1p(phi / (1.0 - phi) * params.secrecy_gamma()))
}

/// Minimum CDI bits: the smallest positive integer strictly above
/// `log2((1 - sigma)/eps)`.
pub fn b1_min(sigma_co: f64, eps_so: f64) -> Result<u32> {
    if eps_so == 0.0 {
        return Err(Error::UnboundedRequirement);
    }
    if !(eps_so > 0.0 && eps_so <= 1.0) {
        return param(format!("epsilon must lie in (0, 1], got {eps_so}"));
    }
    if !(0.0..=1.0).contains(&sigma_co) {
        return param(format!("sigma must lie in [0, 1], got {sigma_co}"));
    }
    // Compare 2^b eps > 1 - sigma directly so integer logarithms round up strictly.
    let need = 1.0 - sigma_co;
    let mut b = 1u32;
    while (b as f64).exp2() * eps_so <= need {
        b += 1;
    }
    Ok(b)
}

/// Transmit threshold on `||h||^2` below which no positive secret rate exists.
pub fn mu_min(params: &SystemParams) -> Result<f64> {
    let report = feasibility(params)?;
    if !report.feasible_bits {
        return Err(Error::Infeasible(Box::new(report)));
    }
    Ok(report.mu_min)
}

fn mu_min_unchecked(params: &SystemParams) -> f64 {
    if params.sigma_d2 == 0.0 {
        return 0.0;
    }
    let k = params.dof();
    let ratio = (1.0 - params.sigma_co) / ((params.b1 as f64).exp2() * params.eps_so);
    let denom = params.p * (1.0 - ratio.powf(1.0 / k));
    if denom <= 0.0 {
        return f64::INFINITY;
    }
    params.secrecy_gamma() * params.sigma_d2 / denom
}

/// Outcome of both feasibility conditions for a parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub b1_min: u32,
    pub mu_min: f64,
    pub feasible_bits: bool,
    pub note: String,
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b1_min = {}, mu_min = {}: {}", self.b1_min, self.mu_min, self.note)
    }
}

pub fn feasibility(params: &SystemParams) -> Result<FeasibilityReport> {
    params.validate()?;
    let b1_min = b1_min(params.sigma_co, params.eps_so)?;
    let feasible_bits = params.b1 >= b1_min;
    let (mu_min, note) = if feasible_bits {
        let mu = mu_min_unchecked(params);
        (mu, format!("transmit when ||h||^2 > {mu}"))
    } else {
        (
            f64::INFINITY,
            format!("b1 = {} is below the required {} CDI bits", params.b1, b1_min),
        )
    };
    Ok(FeasibilityReport { b1_min, mu_min, feasible_bits, note })
}
