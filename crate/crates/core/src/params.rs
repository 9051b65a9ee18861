use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Scalar configuration shared by every analytic and simulated quantity.
///
/// Powers are linear and rates are in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Transmit antennas.
    pub n: usize,
    /// Total transmit power.
    pub p: f64,
    /// Noise power at the intended receiver.
    pub sigma_d2: f64,
    /// Connection outage constraint.
    pub sigma_co: f64,
    /// Secrecy outage constraint.
    pub eps_so: f64,
    /// Bits spent on channel direction.
    pub b1: u32,
    /// Bits spent on channel gain.
    pub b2: u32,
    /// Probability mass trimmed from each end of the equalized CGI range.
    pub delta: f64,
    /// Eavesdropper channel variance. Only the simulator reads it.
    pub sigma_g2: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            n: 4,
            p: 10.0,
            sigma_d2: 1.0,
            sigma_co: 0.05,
            eps_so: 0.02,
            b1: 10,
            b2: 5,
            delta: 1e-4,
            sigma_g2: 1.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return param(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.p.is_finite() && self.p > 0.0) {
            return param(format!("power must be positive and finite, got {}", self.p));
        }
        if !(self.sigma_d2.is_finite() && self.sigma_d2 >= 0.0) {
            return param(format!("sigma_d2 must be non-negative, got {}", self.sigma_d2));
        }
        if !(0.0..=1.0).contains(&self.sigma_co) {
            return param(format!("sigma must lie in [0, 1], got {}", self.sigma_co));
        }
        if !(self.eps_so > 0.0 && self.eps_so <= 1.0) {
            return param(format!("epsilon must lie in (0, 1], got {}", self.eps_so));
        }
        if self.b1 < 1 {
            return param("b1 must be at least 1");
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return param(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.sigma_g2.is_finite() && self.sigma_g2 > 0.0) {
            return param(format!("sigma_g2 must be positive, got {}", self.sigma_g2));
        }
        Ok(())
    }

    /// Total feedback budget `b1 + b2`.
    pub fn budget(&self) -> u32 {
        self.b1 + self.b2
    }

    pub(crate) fn dof(&self) -> f64 {
        (self.n - 1) as f64
    }

    /// `(N-1)(eps^{-1/(N-1)} - 1)`: SIR threshold scale set by the secrecy constraint.
    pub fn secrecy_gamma(&self) -> f64 {
        let k = self.dof();
        k * (self.eps_so.powf(-1.0 / k) - 1.0)
    }

    /// `((1-sigma)/2^{B1})^{1/(N-1)}`: the quantization error that is exceeded
    /// with probability exactly `sigma` under the cap approximation.
    pub fn residual_error(&self) -> f64 {
        ((1.0 - self.sigma_co) * (-(self.b1 as f64)).exp2()).powf(1.0 / self.dof())
    }

    pub fn with_b1(mut self, b1: u32) -> Self {
        self.b1 = b1;
        self
    }

    pub fn with_b2(mut self, b2: u32) -> Self {
        self.b2 = b2;
        self
    }

    pub fn with_power(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_constraints(mut self, sigma_co: f64, eps_so: f64) -> Self {
        self.sigma_co = sigma_co;
        self.eps_so = eps_so;
        self
    }
}
