//! Optimal wiretap rates and power split for a known channel gain.
//!
//! For a fixed power ratio the best codeword rate sits exactly on the
//! connection outage constraint and the best redundancy exactly on the
//! secrecy outage constraint, which leaves a one-dimensional problem in
//! `phi`. [`design_closed_form`] solves it analytically;
//! [`design_numeric`] maximizes the same objective by direct search and is
//! kept as an independent check. [`design_perfect_csi`] is the limit of
//! unlimited CDI feedback.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::outage::{feasibility, log2_1p, re_min, rb_max, FeasibilityReport};
use crate::params::SystemParams;
use crate::special::grid_golden_max;

/// Grid points used to bracket the maximizer before golden-section refinement.
const BRACKET_GRID: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateDesign {
    pub phi_star: f64,
    pub rb_star: f64,
    pub re_star: f64,
    pub rs_star: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub phi_max: f64,
}

/// Precomputed, gain-independent pieces of the optimal design for one parameter set.
#[derive(Debug, Clone)]
pub struct RateCurve {
    params: SystemParams,
    residual: f64,
    gamma: f64,
    report: FeasibilityReport,
}

impl RateCurve {
    /// Fails when the CDI budget is below `b1_min` or the receiver is noiseless.
    pub fn new(params: &SystemParams) -> Result<Self> {
        let report = feasibility(params)?;
        if !report.feasible_bits {
            return Err(Error::Infeasible(Box::new(report)));
        }
        if params.sigma_d2 <= 0.0 {
            return param("the rate design needs sigma_d2 > 0; a noiseless receiver pushes phi* to 1 with unbounded rates");
        }
        let residual = if params.sigma_co >= 1.0 { 0.0 } else { params.residual_error() };
        Ok(RateCurve { params: *params, residual, gamma: params.secrecy_gamma(), report })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn mu_min(&self) -> f64 {
        self.report.mu_min
    }

    pub fn report(&self) -> &FeasibilityReport {
        &self.report
    }

    fn alpha_beta(&self, gain2: f64) -> (f64, f64) {
        let gp = gain2 * self.params.p;
        (gp * (1.0 - self.residual), gp * self.residual / self.params.dof())
    }

    /// Optimal design at `gain2`, or `None` at or below the transmit threshold.
    pub fn design(&self, gain2: f64) -> Option<RateDesign> {
        if !(gain2 > self.report.mu_min) || !gain2.is_finite() {
            return None;
        }
        let (alpha, beta) = self.alpha_beta(gain2);
        let gamma = self.gamma;
        let s = self.params.sigma_d2;
        let phi_max = 1.0 - self.report.mu_min / gain2;

        if gamma == 0.0 {
            // No secrecy constraint: everything goes to the signal.
            let rb = log2_1p(alpha / s);
            return Some(RateDesign {
                phi_star: 1.0,
                rb_star: rb,
                re_star: 0.0,
                rs_star: rb,
                alpha,
                beta,
                gamma,
                phi_max,
            });
        }

        let a = alpha - beta * gamma;
        let num = (beta + s) * a - (a + s * (1.0 - gamma)).sqrt() * (alpha * gamma * s * (beta + s)).sqrt();
        let den = beta * a + alpha * s * (1.0 - gamma);
        let phi = num / den;
        let phi_star = if den.abs() > 1e-300 && phi > 0.0 && phi < 1.0 && phi.is_finite() {
            phi
        } else {
            // Only reached when beta = 0 and gamma = 1 make the quotient 0/0.
            let f = |x: f64| self.objective(alpha, beta, x);
            grid_golden_max(f, 0.0, phi_max, BRACKET_GRID, 1e-13).0
        };

        let rb_star = log2_1p(alpha * phi_star / (beta * (1.0 - phi_star) + s));
        let re_star = log2_1p(gamma * phi_star / (1.0 - phi_star));
        Some(RateDesign {
            phi_star,
            rb_star,
            re_star,
            rs_star: clamp_rate(rb_star - re_star),
            alpha,
            beta,
            gamma,
            phi_max,
        })
    }

    fn objective(&self, alpha: f64, beta: f64, phi: f64) -> f64 {
        let s = self.params.sigma_d2;
        log2_1p(alpha * phi / (beta * (1.0 - phi) + s)) - log2_1p(self.gamma * phi / (1.0 - phi))
    }

    /// Optimal secret rate at `gain2`; zero at or below the threshold.
    pub fn rs(&self, gain2: f64) -> f64 {
        self.design(gain2).map_or(0.0, |d| d.rs_star)
    }

    /// Limit of the optimal secret rate as `gain2 * P -> infinity`.
    pub fn rs_limit(&self) -> f64 {
        let k = self.params.dof();
        let bits = self.params.b1 as f64;
        let num = ((bits.exp2() / (1.0 - self.params.sigma_co)).powf(1.0 / k)) - 1.0;
        let den = self.params.eps_so.powf(-1.0 / k) - 1.0;
        if den <= 0.0 {
            f64::INFINITY
        } else {
            (num / den).log2()
        }
    }
}

/// Rounding can push `rb - re` a hair below zero at the threshold.
fn clamp_rate(rs: f64) -> f64 {
    if rs < 0.0 && rs > -1e-12 {
        0.0
    } else {
        rs.max(0.0)
    }
}

fn infeasible_gain(curve: &RateCurve, gain2: f64) -> Error {
    let mut report = curve.report.clone();
    report.note = format!("||h||^2 = {gain2} does not exceed the transmit threshold {}", report.mu_min);
    Error::Infeasible(Box::new(report))
}

/// Closed-form optimal `(phi, Rb, Re)` for channel gain `gain2`.
pub fn design_closed_form(params: &SystemParams, gain2: f64) -> Result<RateDesign> {
    let curve = RateCurve::new(params)?;
    curve.design(gain2).ok_or_else(|| infeasible_gain(&curve, gain2))
}

/// Direct maximization of `rb_max(phi) - re_min(phi)` over `(0, phi_max)`:
/// a 256-point bracketing grid, then golden-section search to `tolerance` in `phi`.
pub fn design_numeric(params: &SystemParams, gain2: f64, tolerance: f64) -> Result<RateDesign> {
    if !(tolerance > 0.0) {
        return param(format!("tolerance must be positive, got {tolerance}"));
    }
    let curve = RateCurve::new(params)?;
    if !(gain2 > curve.mu_min()) || !gain2.is_finite() {
        return Err(infeasible_gain(&curve, gain2));
    }
    let phi_max = 1.0 - curve.mu_min() / gain2;
    let objective = |phi: f64| -> f64 {
        if phi <= 0.0 || phi >= 1.0 {
            return f64::NEG_INFINITY;
        }
        rb_max(params, phi, gain2).unwrap() - re_min(params, phi).unwrap()
    };
    let upper = phi_max.min(1.0 - 1e-15);
    let (phi, _) = grid_golden_max(objective, 0.0, upper, BRACKET_GRID, tolerance);
    let rb = rb_max(params, phi, gain2)?;
    let re = re_min(params, phi)?;
    let (alpha, beta) = curve.alpha_beta(gain2);
    Ok(RateDesign {
        phi_star: phi,
        rb_star: rb,
        re_star: re,
        rs_star: clamp_rate(rb - re),
        alpha,
        beta,
        gamma: curve.gamma,
        phi_max,
    })
}

/// Optimal design with the exact channel direction at the transmitter.
///
/// This is the unlimited-CDI limit of [`design_closed_form`]: no artificial
/// noise leaks to the receiver and no connection outage occurs, so the
/// objective is `log2(1 + g P phi / s) - log2(1 + gamma phi / (1 - phi))`.
/// Gains too weak for a positive secret rate give an all-zero design.
pub fn design_perfect_csi(params: &SystemParams, gain2: f64) -> Result<RateDesign> {
    params.validate()?;
    if params.sigma_d2 <= 0.0 {
        return param("the rate design needs sigma_d2 > 0");
    }
    if !(gain2 >= 0.0 && gain2.is_finite()) {
        return param(format!("channel gain must be non-negative, got {gain2}"));
    }
    let s = params.sigma_d2;
    let gamma = params.secrecy_gamma();
    let alpha = gain2 * params.p;
    let snr = alpha / s;
    let zero = RateDesign {
        phi_star: 0.0,
        rb_star: 0.0,
        re_star: 0.0,
        rs_star: 0.0,
        alpha,
        beta: 0.0,
        gamma,
        phi_max: 0.0,
    };
    if snr <= gamma {
        return Ok(zero);
    }
    let phi_max = 1.0 - gamma / snr;
    if gamma == 0.0 {
        let rb = log2_1p(snr);
        return Ok(RateDesign { phi_star: 1.0, rb_star: rb, rs_star: rb, phi_max, ..zero });
    }
    let phi = if (1.0 - gamma).abs() > 1e-9 {
        (snr - (snr * gamma * (snr + 1.0 - gamma)).sqrt()) / (snr * (1.0 - gamma))
    } else {
        // gamma = 1: the stationarity condition becomes linear.
        let f = |x: f64| log2_1p(snr * x) - log2_1p(gamma * x / (1.0 - x));
        grid_golden_max(f, 0.0, phi_max, BRACKET_GRID, 1e-14).0
    };
    let rb = log2_1p(snr * phi);
    let re = log2_1p(gamma * phi / (1.0 - phi));
    Ok(RateDesign {
        phi_star: phi,
        rb_star: rb,
        re_star: re,
        rs_star: clamp_rate(rb - re),
        phi_max,
        ..zero
    })
}
