//! CDI codebooks: random vector quantization, a min-max-correlation
//! (Grassmannian line packing) construction, nearest-line quantization and
//! the spherical-cap approximation of a quantization cell.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{sample_unit_direction, ComplexVector};
use crate::error::{param, Error, Result};

/// Largest codebook that is enumerated explicitly.
pub const MAX_CODEBOOK_BITS: u32 = 16;

/// Restarts above this many entries skip the pairwise refinement pass.
const REFINE_LIMIT: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    vectors: Vec<ComplexVector>,
    n: usize,
    b1: u32,
    max_pair_correlation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationResult {
    pub index: usize,
    pub cos2_theta: f64,
}

fn check_shape(n: usize, b1: u32) -> Result<()> {
    if n < 2 {
        return param(format!("codebooks need n >= 2, got {n}"));
    }
    if b1 == 0 {
        return param("codebooks need at least one bit");
    }
    if b1 > MAX_CODEBOOK_BITS {
        return Err(Error::Capacity { bits: b1, max: MAX_CODEBOOK_BITS });
    }
    Ok(())
}

/// Largest `|c_i^H c_j|` over distinct entries.
pub fn max_pair_correlation(vectors: &[ComplexVector]) -> f64 {
    (0..vectors.len())
        .into_par_iter()
        .map(|i| {
            vectors[i + 1..]
                .iter()
                .map(|w| vectors[i].inner(w).norm())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

impl Codebook {
    /// Wraps explicit entries, checking the count and unit norms.
    pub fn from_vectors(n: usize, b1: u32, vectors: Vec<ComplexVector>) -> Result<Self> {
        check_shape(n, b1)?;
        let size = 1usize << b1;
        if vectors.len() != size {
            return param(format!("expected {size} codewords for {b1} bits, got {}", vectors.len()));
        }
        for (i, v) in vectors.iter().enumerate() {
            v.check_dim(n)?;
            if (v.norm2() - 1.0).abs() > 1e-10 {
                return param(format!("codeword {i} is not unit norm ({})", v.norm2()));
            }
        }
        let max_pair_correlation = max_pair_correlation(&vectors);
        Ok(Codebook { vectors, n, b1, max_pair_correlation })
    }

    pub fn vectors(&self) -> &[ComplexVector] {
        &self.vectors
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b1(&self) -> u32 {
        self.b1
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn max_pair_correlation(&self) -> f64 {
        self.max_pair_correlation
    }

    /// Writes the text format: a `N B1` header, then one row of `2N`
    /// interleaved real/imaginary parts per codeword.
    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.n, self.b1)?;
        let mut line = String::new();
        for v in &self.vectors {
            line.clear();
            for (k, z) in v.as_slice().iter().enumerate() {
                if k > 0 {
                    line.push(' ');
                }
                write!(line, "{:.16e} {:.16e}", z.re, z.im).expect("write to String");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn load<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty file".into()))??;
        let mut fields = header.split_whitespace();
        let parse_usize = |s: Option<&str>, what: &str| -> Result<usize> {
            s.ok_or_else(|| Error::Format(format!("missing {what} in header")))?
                .parse::<usize>()
                .map_err(|e| Error::Format(format!("bad {what}: {e}")))
        };
        let n = parse_usize(fields.next(), "N")?;
        let b1 = parse_usize(fields.next(), "B1")? as u32;
        if fields.next().is_some() {
            return Err(Error::Format("header must hold exactly `N B1`".into()));
        }
        check_shape(n, b1)?;

        let mut vectors = Vec::with_capacity(1 << b1);
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Format(format!("row {}: {e}", row + 1)))?;
            if nums.len() != 2 * n {
                return Err(Error::Format(format!(
                    "row {} has {} numbers, expected {}",
                    row + 1,
                    nums.len(),
                    2 * n
                )));
            }
            let entries = nums.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
            vectors.push(ComplexVector::new(entries)?);
        }
        Codebook::from_vectors(n, b1, vectors)
    }
}

/// Random vector quantization: i.i.d. uniform codewords on the unit hypersphere.
pub fn generate_rvq<R: Rng + ?Sized>(n: usize, b1: u32, rng: &mut R) -> Result<Codebook> {
    check_shape(n, b1)?;
    let vectors = (0..1usize << b1)
        .map(|_| sample_unit_direction(n, rng))
        .collect::<Result<Vec<_>>>()?;
    Codebook::from_vectors(n, b1, vectors)
}

/// Min-max-correlation codebook: `iterations` random restarts, each refined by
/// pairwise repulsion, keeping the best packing seen.
///
/// Restart `k` always draws from stream `k` of `seed`, so raising
/// `iterations` can only lower the returned maximum correlation.
pub fn generate_grassmannian(n: usize, b1: u32, seed: u64, iterations: usize) -> Result<Codebook> {
    check_shape(n, b1)?;
    if iterations == 0 {
        return param("iterations must be positive");
    }
    let candidates: Vec<(Vec<ComplexVector>, f64)> = (0..iterations as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let start = (0..1usize << b1)
                .map(|_| sample_unit_direction(n, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let refined = if start.len() <= REFINE_LIMIT { repel(start) } else { start };
            let corr = max_pair_correlation(&refined);
            Ok((refined, corr))
        })
        .collect::<Result<_>>()?;
    // First strict improvement wins, so ties resolve to the lowest restart.
    let (vectors, _) = candidates
        .into_iter()
        .reduce(|best, cand| if cand.1 < best.1 { cand } else { best })
        .expect("at least one restart");
    Codebook::from_vectors(n, b1, vectors)
}

/// Descent on `sum (|c_i^H c_j| / m)^{2p}` with a growing exponent `p`, which
/// concentrates on the closest pairs as it proceeds. Returns the best packing
/// encountered, never worse than the input.
fn repel(mut vectors: Vec<ComplexVector>) -> Vec<ComplexVector> {
    let m = vectors.len();
    if m < 2 {
        return vectors;
    }
    let n = vectors[0].dim();
    let steps = (2.0e7 / ((m * m * n) as f64)).clamp(30.0, 600.0) as usize;
    let mut best = vectors.clone();
    let mut best_corr = max_pair_correlation(&vectors);

    for s in 0..steps {
        let frac = s as f64 / steps as f64;
        let exponent = 2.0 * (4.0 + 60.0 * frac);
        let lr = 0.08 * (1.0 - frac) + 0.002;
        let corr = max_pair_correlation(&vectors).max(1e-12);

        let grads: Vec<Vec<Complex64>> = (0..m)
            .into_par_iter()
            .map(|i| {
                let ci = &vectors[i];
                let mut g = vec![Complex64::new(0.0, 0.0); n];
                for (j, cj) in vectors.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let rho = cj.inner(ci);
                    let w = (rho.norm() / corr).powf(exponent - 2.0);
                    if w < 1e-300 {
                        continue;
                    }
                    let coeff = rho * w;
                    for (gk, cjk) in g.iter_mut().zip(cj.as_slice()) {
                        *gk += cjk * coeff;
                    }
                }
                // Project onto the tangent space at c_i.
                let radial: Complex64 = ci.as_slice().iter().zip(&g).map(|(a, b)| a.conj() * b).sum();
                for (gk, cik) in g.iter_mut().zip(ci.as_slice()) {
                    *gk -= cik * radial;
                }
                g
            })
            .collect();

        let scale = grads
            .iter()
            .map(|g| g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if scale <= 0.0 {
            break;
        }
        for (v, g) in vectors.iter_mut().zip(&grads) {
            let moved: Vec<Complex64> =
                v.as_slice().iter().zip(g).map(|(c, gk)| c - gk * (lr / scale)).collect();
            let norm = moved.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            *v = ComplexVector::from_raw(moved.into_iter().map(|z| z / norm).collect());
        }
        let now = max_pair_correlation(&vectors);
        if now < best_corr {
            best_corr = now;
            best.clone_from(&vectors);
        }
    }
    best
}

/// Index of the codeword best aligned with `d`; ties go to the lowest index.
pub fn quantize_direction(d: &ComplexVector, cb: &Codebook) -> Result<QuantizationResult> {
    d.check_dim(cb.n)?;
    let mut best = QuantizationResult { index: 0, cos2_theta: cb.vectors[0].alignment(d) };
    for (i, c) in cb.vectors.iter().enumerate().skip(1) {
        let a = c.alignment(d);
        if a > best.cos2_theta {
            best = QuantizationResult { index: i, cos2_theta: a };
        }
    }
    best.cos2_theta = best.cos2_theta.min(1.0);
    Ok(best)
}

/// Largest CDI error `1 - cos^2(theta)` under the cap approximation: `2^{-B1/(N-1)}`.
pub fn qca_max_error(n: usize, b1: u32) -> f64 {
    (-(b1 as f64) / (n - 1) as f64).exp2()
}

/// CDF of the cap-model CDI error, `min(1, 2^{B1} x^{N-1})`.
pub fn qca_error_cdf(n: usize, b1: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    ((b1 as f64).exp2() * x.powi(n as i32 - 1)).min(1.0)
}

/// Draws a CDI error from the cap model by inverting its CDF.
pub fn sample_qca_error<R: Rng + ?Sized>(n: usize, b1: u32, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    (u * (-(b1 as f64)).exp2()).powf(1.0 / (n - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rvq_size_and_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cb = generate_rvq(2, 1, &mut rng).unwrap();
        assert_eq!(cb.len(), 2);
        let cb = generate_rvq(4, 6, &mut rng).unwrap();
        assert_eq!(cb.len(), 64);
        assert!(cb.vectors().iter().all(|v| (v.norm2() - 1.0).abs() < 1e-10));
        assert!((max_pair_correlation(cb.vectors()) - cb.max_pair_correlation()).abs() < 1e-15);
    }

    #[test]
    fn capacity_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(generate_rvq(4, 17, &mut rng), Err(Error::Capacity { bits: 17, .. })));
        assert!(matches!(generate_grassmannian(4, 17, 0, 1), Err(Error::Capacity { .. })));
        assert!(generate_rvq(1, 3, &mut rng).is_err());
    }

    #[test]
    fn rvq_cells_exceed_cap_bound() {
        // RVQ cells are not caps: some errors fall beyond 2^{-B1/(N-1)}.
        let (n, b1) = (4, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let cb = generate_rvq(n, b1, &mut rng).unwrap();
        let bound = qca_max_error(n, b1);
        let draws = 20_000;
        let beyond = (0..draws)
            .filter(|_| {
                let d = sample_unit_direction(n, &mut rng).unwrap();
                1.0 - quantize_direction(&d, &cb).unwrap().cos2_theta > bound
            })
            .count();
        assert!(beyond > 0);
    }

    #[test]
    fn two_lines_in_c2_are_orthogonal() {
        let cb = generate_grassmannian(2, 1, 3, 4).unwrap();
        assert!(cb.max_pair_correlation() < 1e-3, "{}", cb.max_pair_correlation());
    }

    #[test]
    fn four_lines_in_c2_near_simplex_bound() {
        let (m, n) = (4.0f64, 2.0f64);
        let welch = ((m - n) / (n * (m - 1.0))).sqrt();
        assert!((welch - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let cb = generate_grassmannian(2, 2, 5, 8).unwrap();
        assert!(cb.max_pair_correlation() >= welch - 1e-9);
        assert!(cb.max_pair_correlation() <= welch + 0.02, "{}", cb.max_pair_correlation());
    }

    #[test]
    fn more_restarts_never_hurt() {
        let one = generate_grassmannian(3, 4, 9, 1).unwrap();
        let many = generate_grassmannian(3, 4, 9, 100).unwrap();
        assert!(many.max_pair_correlation() <= one.max_pair_correlation());
    }

    #[test]
    fn grassmannian_beats_rvq_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        rng.set_stream(0);
        let rvq = generate_rvq(2, 4, &mut rng).unwrap();
        let packed = generate_grassmannian(2, 4, 4, 1).unwrap();
        assert!(packed.max_pair_correlation() <= rvq.max_pair_correlation());
    }

    #[test]
    fn generation_is_reproducible() {
        let a = generate_grassmannian(3, 3, 42, 3).unwrap();
        let b = generate_grassmannian(3, 3, 42, 3).unwrap();
        assert_eq!(a, b);
        let mut r1 = ChaCha8Rng::seed_from_u64(8);
        let mut r2 = ChaCha8Rng::seed_from_u64(8);
        assert_eq!(generate_rvq(3, 5, &mut r1).unwrap(), generate_rvq(3, 5, &mut r2).unwrap());
    }

    #[test]
    fn quantize_exact_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cb = generate_rvq(3, 4, &mut rng).unwrap();
        let q = quantize_direction(&cb.vectors()[7], &cb).unwrap();
        assert_eq!(q.index, 7);
        assert!((q.cos2_theta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantize_orthogonal_tie_goes_to_first() {
        let vecs = vec![ComplexVector::basis(3, 0), ComplexVector::basis(3, 1)];
        let cb = Codebook::from_vectors(3, 1, vecs).unwrap();
        let q = quantize_direction(&ComplexVector::basis(3, 2), &cb).unwrap();
        assert_eq!(q, QuantizationResult { index: 0, cos2_theta: 0.0 });
    }

    #[test]
    fn grassmannian_quantization_quality() {
        let cb = generate_grassmannian(2, 6, 1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let draws = 20_000;
        let floor = 1.0 - (-6f64).exp2() - 0.05;
        let good = (0..draws)
            .filter(|_| {
                let d = sample_unit_direction(2, &mut rng).unwrap();
                quantize_direction(&d, &cb).unwrap().cos2_theta >= floor
            })
            .count();
        assert!(good as f64 >= 0.95 * draws as f64);
    }

    #[test]
    fn cap_bound_values() {
        assert_eq!(qca_max_error(2, 2), 0.25);
        assert_eq!(qca_max_error(4, 9), 0.125);
        let mut prev = 1.0;
        for b1 in 1..60 {
            let v = qca_max_error(2, b1);
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-17);
    }

    #[test]
    fn cap_error_cdf_and_mean() {
        // P(error <= 2^-4) = 2^3 2^-4 for n = 2, b1 = 3.
        assert!((qca_error_cdf(2, 3, 1.0 / 16.0) - 0.5).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws = 1_000_000;
        let below = (0..draws).filter(|_| sample_qca_error(2, 3, &mut rng) <= 1.0 / 16.0).count();
        let frac = below as f64 / draws as f64;
        assert!((frac - 0.5).abs() < 3.0 * (0.25 / draws as f64).sqrt() + 1e-12, "{frac}");

        // Mean error for n = 2, b1 = 6 is 2^-7.
        let xs: Vec<f64> = (0..draws).map(|_| sample_qca_error(2, 6, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / draws as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();
        assert!((mean - (-7f64).exp2()).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn cap_error_empirical_cdf_ks() {
        let (n, b1) = (4, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let draws = 1_000_000;
        let mut xs: Vec<f64> = (0..draws).map(|_| sample_qca_error(n, b1, &mut rng)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = qca_error_cdf(n, b1, x);
                (f - i as f64 / draws as f64).abs().max(((i + 1) as f64 / draws as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.005, "{ks}");
    }

    #[test]
    fn save_load_rejects_garbage() {
        assert!(Codebook::load("2 1\n1 0 0 0\n".as_bytes()).is_err());
        assert!(Codebook::load("".as_bytes()).is_err());
        assert!(Codebook::load("2 1\n1 0 0 0\n0 0 1 x\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn cap_samples_respect_support(n in 2usize..10, b1 in 1u32..30, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bound = qca_max_error(n, b1);
            for _ in 0..200 {
                let x = sample_qca_error(n, b1, &mut rng);
                prop_assert!((0.0..=bound).contains(&x));
            }
        }

        #[test]
        fn save_load_round_trip(n in 2usize..6, b1 in 1u32..5, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cb = generate_rvq(n, b1, &mut rng).unwrap();
            let mut buf = Vec::new();
            cb.save(&mut buf).unwrap();
            let back = Codebook::load(buf.as_slice()).unwrap();
            prop_assert_eq!(back, cb);
        }
    }
}
