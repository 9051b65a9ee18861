//! Distributional checks of the samplers against the closed-form laws.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sld::channel::{sample_rayleigh, sample_unit_direction, Beamformer, ChannelRealization, ComplexVector};
use sld::codebook::{qca_error_cdf, sample_qca_error};
use sld::special::gamma_reg_upper;

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    })
}

#[test]
fn channel_gain_follows_erlang_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let gains: Vec<f64> = (0..1_000_000).map(|_| sample_rayleigh(4, 1.0, &mut rng).unwrap().norm2()).collect();
    let d = ks_distance(gains, |x| 1.0 - gamma_reg_upper(4, x));
    assert!(d < 0.005, "KS distance {d}");
}

#[test]
fn mean_gain_matches_dimension() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let m = 1_000_000;
    let mean = (0..m).map(|_| sample_rayleigh(2, 1.0, &mut rng).unwrap().norm2()).sum::<f64>() / m as f64;
    assert!((mean - 2.0).abs() < 0.01, "{mean}");
}

#[test]
fn cap_error_sampler_follows_its_cdf() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for (n, b1) in [(2, 6), (4, 10), (6, 9)] {
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_qca_error(n, b1, &mut rng)).collect();
        let d = ks_distance(xs, |x| qca_error_cdf(n, b1, x));
        assert!(d < 0.005, "n={n} b1={b1}: KS distance {d}");
    }
}

#[test]
fn transmit_power_is_conserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for (n, phi, p) in [(2, 0.3, 1.0), (4, 0.5, 10.0), (8, 0.9, 100.0)] {
        let bf = Beamformer::new(sample_unit_direction(n, &mut rng).unwrap(), phi, p).unwrap();
        let m = 100_000;
        let xs: Vec<f64> = (0..m).map(|_| bf.transmit(&mut rng).norm2()).collect();
        let mean = xs.iter().sum::<f64>() / m as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        let se = (var / m as f64).sqrt();
        assert!((mean - p).abs() < 3.0 * se, "n={n}: {mean} vs {p} (se {se})");
    }
}

#[test]
fn received_power_splits_as_the_sinr_says() {
    // N = 2, cos^2 = 0.75, phi = 0.5, P = 1, ||h||^2 = 1, noise 1: SINR = 1/3.
    let c = ComplexVector::basis(2, 0);
    let d = ComplexVector::new(vec![Complex64::new(0.75f64.sqrt(), 0.0), Complex64::new(0.0, 0.5)]).unwrap();
    let chan = ChannelRealization::from_parts(1.0, d).unwrap();
    let bf = Beamformer::new(c, 0.5, 1.0).unwrap();
    let eve = ComplexVector::basis(2, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let m = 400_000;
    let mut total = 0.0;
    let mut sinr = 0.0;
    for _ in 0..m {
        let s = bf.observe(&chan, &eve, 1.0, &mut rng).unwrap();
        total += s.y_d.norm_sqr();
        sinr = s.sinr_d;
    }
    assert!((sinr - 1.0 / 3.0).abs() < 1e-12);
    // E|y_d|^2 = signal + interference + noise = (1 + SINR) * (interference + noise).
    let expected = (1.0 + sinr) * (0.25 * 0.5 + 1.0);
    let mean = total / m as f64;
    assert!((mean - expected).abs() / expected < 0.01, "{mean} vs {expected}");
}
