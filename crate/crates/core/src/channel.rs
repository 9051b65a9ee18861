//! Complex-vector primitives, Rayleigh sampling and the artificial-noise beamformer.
//!
//! The transmitter sends `x = c u + W v`, where `c` is the fed-back direction,
//! `W` completes `c` to an orthonormal basis, `u ~ CN(0, P phi)` is the
//! information symbol and `v ~ CN(0, P(1-phi)/(N-1) I)` is artificial noise.
//! The intended receiver sees noise `n_d`; the eavesdropper is assumed
//! noiseless, which makes its SIR independent of its distance.

use std::ops::Index;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return param("complex vector must have at least one entry");
        }
        Ok(ComplexVector(entries))
    }

    /// Standard basis vector `e_index` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[index] = Complex64::new(1.0, 0.0);
        ComplexVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    /// Inner product `self^H other`.
    pub fn inner(&self, other: &ComplexVector) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|self^H other|^2`.
    pub fn alignment(&self, other: &ComplexVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn scaled(&self, s: Complex64) -> ComplexVector {
        ComplexVector(self.0.iter().map(|z| z * s).collect())
    }

    pub fn normalized(&self) -> Result<ComplexVector> {
        let norm = self.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return param("cannot normalize a zero or non-finite vector");
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::Dimension { expected, got: self.dim() });
        }
        Ok(())
    }

    pub(crate) fn from_raw(entries: Vec<Complex64>) -> Self {
        debug_assert!(!entries.is_empty());
        ComplexVector(entries)
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// One complex Gaussian `CN(0, variance)`: two real Gaussians of variance `variance/2`.
pub(crate) fn sample_cn<R: Rng + ?Sized>(rng: &mut R, std_per_dim: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std_per_dim, im * std_per_dim)
}

/// Draws a vector with i.i.d. `CN(0, variance)` entries.
pub fn sample_rayleigh<R: Rng + ?Sized>(
    dim: usize,
    variance: f64,
    rng: &mut R,
) -> Result<ComplexVector> {
    if dim == 0 {
        return param("dimension must be positive");
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return param(format!("variance must be positive, got {variance}"));
    }
    let s = (variance / 2.0).sqrt();
    Ok(ComplexVector((0..dim).map(|_| sample_cn(rng, s)).collect()))
}

/// Uniformly distributed point on the unit complex hypersphere.
pub fn sample_unit_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexVector> {
    loop {
        let v = sample_rayleigh(dim, 1.0, rng)?;
        if v.norm2() > 0.0 {
            return v.normalized();
        }
    }
}

/// A channel split into its gain `||h||^2` and direction `h/||h||`.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: ComplexVector,
    pub gain2: f64,
    pub direction: ComplexVector,
}

impl ChannelRealization {
    pub fn new(h: ComplexVector) -> Result<Self> {
        let gain2 = h.norm2();
        let direction = h.normalized()?;
        Ok(ChannelRealization { h, gain2, direction })
    }

    pub fn sample<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        loop {
            let h = sample_rayleigh(dim, 1.0, rng)?;
            if h.norm2() > 0.0 {
                return ChannelRealization::new(h);
            }
        }
    }

    /// Channel with a prescribed gain along a given unit direction.
    pub fn from_parts(gain2: f64, direction: ComplexVector) -> Result<Self> {
        if !(gain2 > 0.0 && gain2.is_finite()) {
            return param(format!("channel gain must be positive, got {gain2}"));
        }
        let h = direction.scaled(Complex64::new(gain2.sqrt(), 0.0));
        Ok(ChannelRealization { h, gain2, direction })
    }
}

/// Orthonormal completion of `signal_dir` from a Householder reflection.
///
/// With `w = c + a e_1`, `a = c_0/|c_0|`, the reflector `I - 2ww^H/||w||^2`
/// maps `e_1` onto a multiple of `c`; its remaining columns are returned.
pub fn complete_null_basis(signal_dir: &ComplexVector) -> Result<Vec<ComplexVector>> {
    let n = signal_dir.dim();
    if (signal_dir.norm2() - 1.0).abs() > 1e-8 {
        return param(format!(
            "signal direction must be unit norm, got squared norm {}",
            signal_dir.norm2()
        ));
    }
    let c0 = signal_dir[0];
    let phase = if c0.norm() > 0.0 { c0 / c0.norm() } else { Complex64::new(1.0, 0.0) };
    let mut w = signal_dir.0.clone();
    w[0] += phase;
    let w_norm2: f64 = w.iter().map(|z| z.norm_sqr()).sum();

    let columns = (1..n)
        .map(|k| {
            let coeff = w[k].conj() * (2.0 / w_norm2);
            let col = (0..n)
                .map(|i| {
                    let e = if i == k { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                    e - w[i] * coeff
                })
                .collect();
            ComplexVector(col)
        })
        .collect();
    Ok(columns)
}

/// Artificial-noise beamformer built around a quantized direction.
#[derive(Debug, Clone)]
pub struct Beamformer {
    pub signal_dir: ComplexVector,
    pub null_basis: Vec<ComplexVector>,
    pub phi: f64,
    pub sigma_u2: f64,
    pub sigma_v2: f64,
}

impl Beamformer {
    /// `phi` is the information-signal share of `power`; `phi = 1` disables the noise.
    pub fn new(signal_dir: ComplexVector, phi: f64, power: f64) -> Result<Self> {
        if signal_dir.dim() < 2 {
            return param("beamforming needs at least two antennas");
        }
        if !(phi > 0.0 && phi <= 1.0) {
            return param(format!("power allocation ratio must lie in (0, 1], got {phi}"));
        }
        if !(power > 0.0 && power.is_finite()) {
            return param(format!("power must be positive, got {power}"));
        }
        let null_basis = complete_null_basis(&signal_dir)?;
        let dof = (signal_dir.dim() - 1) as f64;
        Ok(Beamformer {
            signal_dir,
            null_basis,
            phi,
            sigma_u2: power * phi,
            sigma_v2: power * (1.0 - phi) / dof,
        })
    }

    pub fn dim(&self) -> usize {
        self.signal_dir.dim()
    }

    pub fn power(&self) -> f64 {
        self.sigma_u2 + self.null_basis.len() as f64 * self.sigma_v2
    }

    /// `||v^H W||^2`, the share of `v` lying in the noise subspace.
    pub fn leakage(&self, v: &ComplexVector) -> f64 {
        self.null_basis.iter().map(|col| v.alignment(col)).sum()
    }

    /// Draws one transmitted vector `x = c u + W v`.
    pub fn transmit<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexVector {
        let u = sample_cn(rng, (self.sigma_u2 / 2.0).sqrt());
        let mut x: Vec<Complex64> = self.signal_dir.0.iter().map(|c| c * u).collect();
        let sv = (self.sigma_v2 / 2.0).sqrt();
        for col in &self.null_basis {
            let v = sample_cn(rng, sv);
            for (xi, wi) in x.iter_mut().zip(&col.0) {
                *xi += wi * v;
            }
        }
        ComplexVector(x)
    }

    /// Draws one channel use and reports what both receivers see.
    pub fn observe<R: Rng + ?Sized>(
        &self,
        chan: &ChannelRealization,
        eve: &ComplexVector,
        sigma_d2: f64,
        rng: &mut R,
    ) -> Result<ReceivedSample> {
        let x = self.transmit(rng);
        let noise = if sigma_d2 > 0.0 {
            sample_cn(rng, (sigma_d2 / 2.0).sqrt())
        } else {
            Complex64::new(0.0, 0.0)
        };
        Ok(ReceivedSample {
            y_d: chan.h.inner(&x) + noise,
            y_e: eve.inner(&x),
            sinr_d: sinr_desired(chan, self, sigma_d2)?,
            sir_e: sir_eavesdropper(eve, self)?,
        })
    }
}

/// SINR at the intended receiver from the alignment `cos^2(theta)` alone.
pub fn sinr_from_alignment(gain2: f64, cos2: f64, sigma_u2: f64, sigma_v2: f64, sigma_d2: f64) -> f64 {
    let signal = gain2 * cos2 * sigma_u2;
    let leak = gain2 * (1.0 - cos2).max(0.0) * sigma_v2;
    let denom = leak + sigma_d2;
    if denom > 0.0 {
        signal / denom
    } else if signal > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

pub fn sinr_desired(chan: &ChannelRealization, bf: &Beamformer, sigma_d2: f64) -> Result<f64> {
    chan.direction.check_dim(bf.dim())?;
    if !(sigma_d2 >= 0.0) {
        return param(format!("noise power must be non-negative, got {sigma_d2}"));
    }
    let cos2 = chan.direction.alignment(&bf.signal_dir).min(1.0);
    Ok(sinr_from_alignment(chan.gain2, cos2, bf.sigma_u2, bf.sigma_v2, sigma_d2))
}

/// Eavesdropper signal-to-interference ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sir {
    Finite(f64),
    /// No artificial noise reaches the eavesdropper.
    Unbounded,
}

impl Sir {
    /// Supported rate `log2(1 + SIR)`.
    pub fn capacity(self) -> f64 {
        match self {
            Sir::Finite(s) => s.ln_1p() / std::f64::consts::LN_2,
            Sir::Unbounded => f64::INFINITY,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Sir::Unbounded)
    }

    pub fn value(self) -> f64 {
        match self {
            Sir::Finite(s) => s,
            Sir::Unbounded => f64::INFINITY,
        }
    }
}

/// Relative size of `||g^H W||^2` below which the noise projection counts as zero.
const NULL_LEAK_TOL: f64 = 1e-26;

pub fn sir_eavesdropper(g: &ComplexVector, bf: &Beamformer) -> Result<Sir> {
    g.check_dim(bf.dim())?;
    let signal = g.alignment(&bf.signal_dir) * bf.sigma_u2;
    let leak = bf.leakage(g);
    let interference = leak * bf.sigma_v2;
    if bf.sigma_v2 <= 0.0 || leak <= NULL_LEAK_TOL * g.norm2() {
        if signal > 0.0 {
            return Ok(Sir::Unbounded);
        }
        return Ok(Sir::Finite(0.0));
    }
    Ok(Sir::Finite(signal / interference))
}

/// One channel use as observed at both receivers.
#[derive(Debug, Clone, Copy)]
pub struct ReceivedSample {
    pub y_d: Complex64,
    pub y_e: Complex64,
    pub sinr_d: f64,
    pub sir_e: Sir,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gram_error(cols: &[ComplexVector]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in cols.iter().enumerate() {
            for (j, b) in cols.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b) - c(target, 0.0)).norm());
            }
        }
        worst
    }

    #[test]
    fn rayleigh_mean_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 1_000_000;
        let mean: f64 =
            (0..draws).map(|_| sample_rayleigh(2, 1.0, &mut rng).unwrap().norm2()).sum::<f64>() / draws as f64;
        assert!((mean - 2.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn rayleigh_rejects_degenerate_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_rayleigh(2, 0.0, &mut rng).is_err());
        assert!(sample_rayleigh(0, 1.0, &mut rng).is_err());
        assert!(sample_rayleigh(2, -1.0, &mut rng).is_err());
    }

    #[test]
    fn realization_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let ch = ChannelRealization::sample(5, &mut rng).unwrap();
            assert!((ch.direction.norm2() - 1.0).abs() < 1e-12);
            for i in 0..5 {
                let rebuilt = ch.gain2 * ch.direction[i].norm_sqr();
                assert!((rebuilt - ch.h[i].norm_sqr()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn null_basis_of_first_axis() {
        let e1 = ComplexVector::basis(3, 0);
        let w = complete_null_basis(&e1).unwrap();
        assert_eq!(w.len(), 2);
        for col in &w {
            assert!(e1.inner(col).norm() < 1e-12);
            assert!(col[0].norm() < 1e-12);
        }
    }

    #[test]
    fn null_basis_completes_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=8 {
            let d = sample_unit_direction(n, &mut rng).unwrap();
            let mut cols = vec![d.clone()];
            cols.extend(complete_null_basis(&d).unwrap());
            assert_eq!(cols.len(), n);
            assert!(gram_error(&cols) < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn null_basis_two_antennas() {
        let d = ComplexVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let w = complete_null_basis(&d).unwrap();
        assert_eq!(w.len(), 1);
        assert!((w[0].norm2() - 1.0).abs() < 1e-12);
        assert!(d.inner(&w[0]).norm() < 1e-12);
    }

    #[test]
    fn null_basis_is_deterministic_and_rejects_non_unit() {
        let d = ComplexVector::new(vec![c(0.5, 0.5), c(0.5, -0.5)]).unwrap();
        assert_eq!(complete_null_basis(&d).unwrap(), complete_null_basis(&d).unwrap());
        let long = d.scaled(c(2.0, 0.0));
        assert!(matches!(complete_null_basis(&long), Err(Error::Parameter(_))));
    }

    #[test]
    fn beamformer_power_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = sample_unit_direction(4, &mut rng).unwrap();
        let bf = Beamformer::new(d, 0.3, 7.0).unwrap();
        assert!((bf.power() - 7.0).abs() < 1e-10);
        assert!((bf.sigma_u2 - 2.1).abs() < 1e-12);
    }

    #[test]
    fn sinr_perfect_alignment() {
        let d = ComplexVector::basis(2, 0);
        let chan = ChannelRealization::from_parts(1.0, d.clone()).unwrap();
        let bf = Beamformer::new(d, 0.5, 2.0).unwrap();
        assert!((sinr_desired(&chan, &bf, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sinr_orthogonal_is_zero() {
        let chan = ChannelRealization::from_parts(3.0, ComplexVector::basis(3, 1)).unwrap();
        let bf = Beamformer::new(ComplexVector::basis(3, 0), 0.5, 2.0).unwrap();
        assert_eq!(sinr_desired(&chan, &bf, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn sinr_partial_alignment() {
        // cos^2 = 0.75: signal 0.75 * 0.5, leakage 0.25 * 0.5 + noise 1.
        let d = ComplexVector::new(vec![c(0.75f64.sqrt(), 0.0), c(0.0, 0.5)]).unwrap();
        let chan = ChannelRealization::from_parts(1.0, d).unwrap();
        let bf = Beamformer::new(ComplexVector::basis(2, 0), 0.5, 1.0).unwrap();
        let sinr = sinr_desired(&chan, &bf, 1.0).unwrap();
        assert!((sinr - 1.0 / 3.0).abs() < 1e-12, "{sinr}");
    }

    #[test]
    fn sinr_matches_simulated_power_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let d = ComplexVector::new(vec![c(0.75f64.sqrt(), 0.0), c(0.0, 0.5)]).unwrap();
        let chan = ChannelRealization::from_parts(1.0, d).unwrap();
        let bf = Beamformer::new(ComplexVector::basis(2, 0), 0.5, 1.0).unwrap();
        // Split y_d into the symbol part and everything else by simulating both terms.
        let draws = 400_000;
        let (mut sig, mut rest) = (0.0, 0.0);
        let h_c = chan.h.inner(&bf.signal_dir);
        let h_w = chan.h.inner(&bf.null_basis[0]);
        for _ in 0..draws {
            let u = sample_cn(&mut rng, (bf.sigma_u2 / 2.0).sqrt());
            let v = sample_cn(&mut rng, (bf.sigma_v2 / 2.0).sqrt());
            let nd = sample_cn(&mut rng, 0.5f64.sqrt());
            sig += (h_c * u).norm_sqr();
            rest += (h_w * v + nd).norm_sqr();
        }
        let ratio = sig / rest;
        assert!((ratio - 1.0 / 3.0).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn alignment_plus_leakage_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 2..=6 {
            for _ in 0..20 {
                let d = sample_unit_direction(n, &mut rng).unwrap();
                let c = sample_unit_direction(n, &mut rng).unwrap();
                let bf = Beamformer::new(c, 0.4, 1.0).unwrap();
                let total = d.alignment(&bf.signal_dir) + bf.leakage(&d);
                assert!((total - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn transmit_power_is_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let d = sample_unit_direction(4, &mut rng).unwrap();
        let bf = Beamformer::new(d, 0.35, 5.0).unwrap();
        let draws = 100_000;
        let samples: Vec<f64> = (0..draws).map(|_| bf.transmit(&mut rng).norm2()).collect();
        let mean = samples.iter().sum::<f64>() / draws as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();
        assert!((mean - 5.0).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn sir_sentinels_and_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let c = sample_unit_direction(3, &mut rng).unwrap();
        let bf = Beamformer::new(c.clone(), 0.6, 1.0).unwrap();
        assert_eq!(sir_eavesdropper(&c, &bf).unwrap(), Sir::Unbounded);
        let orth = bf.null_basis[0].clone();
        assert!(sir_eavesdropper(&orth, &bf).unwrap().value() < 1e-30);

        let no_noise = Beamformer::new(c, 1.0, 1.0).unwrap();
        let g = sample_rayleigh(3, 1.0, &mut rng).unwrap();
        assert!(sir_eavesdropper(&g, &no_noise).unwrap().is_unbounded());
    }

    #[test]
    fn sir_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let bf = Beamformer::new(sample_unit_direction(4, &mut rng).unwrap(), 0.5, 3.0).unwrap();
        for _ in 0..50 {
            let g = sample_rayleigh(4, 1.0, &mut rng).unwrap();
            let base = sir_eavesdropper(&g, &bf).unwrap().value();
            for s in [c(10.0, 0.0), c(0.0, -0.1), c(3.0, 4.0)] {
                let scaled = sir_eavesdropper(&g.scaled(s), &bf).unwrap().value();
                assert!((scaled - base).abs() <= 1e-12 * base.max(1.0));
            }
        }
    }

    #[test]
    fn sinr_monotone_in_phi_when_aligned() {
        let d = ComplexVector::basis(4, 2);
        let chan = ChannelRealization::from_parts(2.0, d.clone()).unwrap();
        let mut prev = 0.0;
        for k in 1..20 {
            let bf = Beamformer::new(d.clone(), k as f64 / 20.0, 4.0).unwrap();
            let s = sinr_desired(&chan, &bf, 1.0).unwrap();
            assert!(s > prev);
            assert!(bf.leakage(&chan.direction) < 1e-20);
            prev = s;
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let chan = ChannelRealization::from_parts(1.0, ComplexVector::basis(3, 0)).unwrap();
        let bf = Beamformer::new(ComplexVector::basis(2, 0), 0.5, 1.0).unwrap();
        assert!(matches!(sinr_desired(&chan, &bf, 1.0), Err(Error::Dimension { .. })));
    }
}
