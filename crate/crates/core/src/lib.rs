//! Artificial-noise-aided secure beamforming over Rayleigh channels with
//! quantized channel direction and channel gain feedback.
//!
//! The crate covers the whole chain from channel sampling and codebooks to
//! outage analytics, on-off rate design, throughput under quantized gain
//! feedback, and seeded Monte Carlo checks of every closed form.
//!
//! # Examples
//!
//! ```text
//! cargo run --release --example beamforming
//! cargo run --release --example codebook
//! cargo run --release --example outage_analytics
//! cargo run --release --example rate_design
//! cargo run --release --example cgi_quantization
//! cargo run --release --example bit_allocation
//! cargo run --release --example monte_carlo_validation
//! cargo run --release --example experiment_runner
//! ```
//!
//! ```
//! use sld::design::design_closed_form;
//! use sld::SystemParams;
//!
//! let params = SystemParams { n: 4, p: 10.0, b1: 10, sigma_co: 0.05, eps_so: 0.02, ..SystemParams::default() };
//! let d = design_closed_form(&params, 4.0).unwrap();
//! assert!(d.rs_star > 0.0 && d.phi_star < d.phi_max);
//! ```

// `!(x > 0.0)` is the NaN-rejecting form used for input checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod codebook;
pub mod design;
pub mod error;
pub mod experiment;
pub mod montecarlo;
pub mod outage;
pub mod params;
pub mod special;
pub mod throughput;

pub use error::{Error, Result};
pub use params::SystemParams;
