//! Seeded Monte Carlo counterparts of the closed forms.
//!
//! Draws are split into fixed blocks of [`BLOCK`] samples. Block `k` always
//! uses ChaCha8 stream `k` under the configured seed, and block results are
//! combined in block order, so estimates are bit-identical for any worker
//! count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    sample_rayleigh, sample_unit_direction, sinr_desired, sinr_from_alignment, sir_eavesdropper, Beamformer,
    ChannelRealization, ComplexVector,
};
use crate::codebook::{generate_grassmannian, generate_rvq, quantize_direction, sample_qca_error, Codebook};
use crate::design::{design_closed_form, RateCurve, RateDesign};
use crate::error::{param, Error, Result};
use crate::outage::{log2_1p, rate_ceiling, re_min};
use crate::params::SystemParams;
use crate::throughput::CgiQuantizer;

/// Samples per block.
pub const BLOCK: u64 = 4096;
/// Smallest draw count accepted for a reported estimate.
pub const MIN_DRAWS: u64 = 1000;
/// Random restarts used when a Grassmannian codebook is requested.
pub const GRASSMANNIAN_RESTARTS: usize = 16;
/// Stream reserved for drawing random codebooks.
const CODEBOOK_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookSource {
    Rvq,
    Grassmannian,
    /// No codebook: the CDI error is drawn from the cap model.
    QcaSynthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: SystemParams,
    pub draws: u64,
    pub seed: u64,
    pub codebook_source: CodebookSource,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(params: SystemParams, draws: u64, seed: u64, codebook_source: CodebookSource) -> Self {
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        SimConfig { params, draws, seed, codebook_source, workers }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.draws < MIN_DRAWS {
            return param(format!("at least {MIN_DRAWS} draws are needed, got {}", self.draws));
        }
        if self.workers == 0 {
            return param("workers must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_err: f64,
    pub draws: u64,
}

impl EstimateWithError {
    pub fn proportion(hits: u64, draws: u64) -> Self {
        let value = hits as f64 / draws as f64;
        EstimateWithError { value, std_err: (value * (1.0 - value) / draws as f64).sqrt(), draws }
    }

    fn from_moments(m: Moments) -> Self {
        let n = m.count as f64;
        let mean = m.sum / n;
        let var = if m.count > 1 { ((m.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        EstimateWithError { value: mean, std_err: (var / n).sqrt(), draws: m.count }
    }

    /// `|value - reference|` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = (self.value - reference).abs();
        if self.std_err > 0.0 {
            d / self.std_err
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
    count: u64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
        self.count += 1;
    }

    fn merge(self, o: Moments) -> Moments {
        Moments { sum: self.sum + o.sum, sum_sq: self.sum_sq + o.sum_sq, count: self.count + o.count }
    }
}

/// End-to-end throughput estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputEstimate {
    /// `(1 - sigma) Rs*` at the assumed gain, averaged over all draws; the
    /// quantity the analytic throughput predicts.
    pub accounted: EstimateWithError,
    /// `Rs*` counted only when the realized SINR supports the codeword rate.
    pub delivered: EstimateWithError,
    /// Connection outage frequency among transmitting draws.
    pub outage_when_transmitting: EstimateWithError,
    /// Fraction of draws with a transmission.
    pub transmit_fraction: f64,
}

/// Monte Carlo engine holding the codebook and worker pool for one configuration.
pub struct Simulator {
    cfg: SimConfig,
    codebook: Option<Codebook>,
    pool: rayon::ThreadPool,
}

fn block_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let p = &cfg.params;
        let codebook = match cfg.codebook_source {
            CodebookSource::QcaSynthetic => None,
            CodebookSource::Rvq => Some(generate_rvq(p.n, p.b1, &mut block_rng(cfg.seed, CODEBOOK_STREAM))?),
            CodebookSource::Grassmannian => Some(generate_grassmannian(p.n, p.b1, cfg.seed, GRASSMANNIAN_RESTARTS)?),
        };
        Self::build(cfg, codebook)
    }

    /// Uses a caller-supplied codebook in place of the configured source.
    pub fn with_codebook(cfg: SimConfig, codebook: Codebook) -> Result<Self> {
        cfg.validate()?;
        if codebook.n() != cfg.params.n || codebook.b1() != cfg.params.b1 {
            return Err(Error::Dimension { expected: cfg.params.n, got: codebook.n() });
        }
        Self::build(cfg, Some(codebook))
    }

    fn build(cfg: SimConfig, codebook: Option<Codebook>) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
        Ok(Simulator { cfg, codebook, pool })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn codebook(&self) -> Option<&Codebook> {
        self.codebook.as_ref()
    }

    /// Runs `f(rng, block_len)` for every block and returns results in block order.
    fn blocks<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&mut ChaCha8Rng, u64) -> Result<T> + Sync,
    {
        let draws = self.cfg.draws;
        let nblocks = draws.div_ceil(BLOCK);
        let seed = self.cfg.seed;
        self.pool.install(|| {
            (0..nblocks)
                .into_par_iter()
                .map(|b| {
                    let len = BLOCK.min(draws - b * BLOCK);
                    f(&mut block_rng(seed, b), len)
                })
                .collect()
        })
    }

    fn count<F>(&self, f: F) -> Result<EstimateWithError>
    where
        F: Fn(&mut ChaCha8Rng, u64) -> Result<u64> + Sync,
    {
        let hits: u64 = self.blocks(f)?.into_iter().sum();
        Ok(EstimateWithError::proportion(hits, self.cfg.draws))
    }

    /// Draws a desired-channel direction and returns the transmit direction and
    /// the alignment `cos^2` between them.
    fn cdi<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(ComplexVector, ComplexVector, f64)> {
        let n = self.cfg.params.n;
        let d = sample_unit_direction(n, rng)?;
        match &self.codebook {
            Some(cb) => {
                let q = quantize_direction(&d, cb)?;
                Ok((d, cb.vectors()[q.index].clone(), q.cos2_theta))
            }
            None => {
                // Place the channel at the cap-model error from the transmit direction.
                let err = sample_qca_error(n, self.cfg.params.b1, rng);
                let c = sample_unit_direction(n, rng)?;
                let bf = Beamformer::new(c.clone(), 1.0, 1.0)?;
                let w = &bf.null_basis[rng.random_range(0..bf.null_basis.len())];
                let entries = c
                    .as_slice()
                    .iter()
                    .zip(w.as_slice())
                    .map(|(ci, wi)| ci * (1.0 - err).sqrt() + wi * err.sqrt())
                    .collect();
                Ok((ComplexVector::new(entries)?.normalized()?, c, 1.0 - err))
            }
        }
    }

    fn cos2_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match &self.codebook {
            Some(cb) => {
                let d = sample_unit_direction(self.cfg.params.n, rng)?;
                Ok(quantize_direction(&d, cb)?.cos2_theta)
            }
            None => Ok(1.0 - sample_qca_error(self.cfg.params.n, self.cfg.params.b1, rng)),
        }
    }

    /// Connection outage frequency at a fixed channel gain.
    pub fn empirical_pco(&self, rb: f64, phi: f64, gain2: f64) -> Result<EstimateWithError> {
        let p = self.cfg.params;
        if !(rb >= 0.0) || !(gain2 > 0.0) {
            return param(format!("need rb >= 0 and gain2 > 0, got rb = {rb}, gain2 = {gain2}"));
        }
        self.count(|rng, len| {
            let mut hits = 0;
            for _ in 0..len {
                let (d, c, _) = self.cdi(rng)?;
                let chan = ChannelRealization::from_parts(gain2, d)?;
                let bf = Beamformer::new(c, phi, p.p)?;
                let sinr = sinr_desired(&chan, &bf, p.sigma_d2)?;
                hits += u64::from(log2_1p(sinr) < rb);
            }
            Ok(hits)
        })
    }

    /// Secrecy outage frequency against a Rayleigh eavesdropper.
    pub fn empirical_pso(&self, re: f64, phi: f64) -> Result<EstimateWithError> {
        let p = self.cfg.params;
        if !(re >= 0.0) {
            return param(format!("rate redundancy must be non-negative, got {re}"));
        }
        self.count(|rng, len| {
            // The eavesdropper is isotropic, so one beam direction per block suffices.
            let bf = Beamformer::new(sample_unit_direction(p.n, rng)?, phi, p.p)?;
            let mut hits = 0;
            for _ in 0..len {
                let g = sample_rayleigh(p.n, p.sigma_g2, rng)?;
                hits += u64::from(sir_eavesdropper(&g, &bf)?.capacity() >= re);
            }
            Ok(hits)
        })
    }

    /// Largest secrecy rate found by inverting the simulated connection outage
    /// on each `phi` in `phi_grid`.
    pub fn empirical_rs_star(&self, gain2: f64, phi_grid: &[f64], rb_tolerance: f64) -> Result<f64> {
        let p = self.cfg.params;
        if phi_grid.is_empty() || !(rb_tolerance > 0.0) || !(gain2 > 0.0) {
            return param("need a non-empty phi grid, positive tolerance and positive gain");
        }
        // SINR is increasing in cos^2 at fixed gain and phi, so sorted
        // alignments turn each outage count into a binary search.
        let mut cos2: Vec<f64> = self
            .blocks(|rng, len| (0..len).map(|_| self.cos2_sample(rng)).collect::<Result<Vec<_>>>())?
            .concat();
        cos2.sort_by(f64::total_cmp);
        let draws = cos2.len() as f64;
        let mut best = 0.0f64;
        for &phi in phi_grid {
            if !(phi > 0.0 && phi < 1.0) {
                return param(format!("phi grid values must lie in (0, 1), got {phi}"));
            }
            let su2 = p.p * phi;
            let sv2 = p.p * (1.0 - phi) / (p.n - 1) as f64;
            let pco = |rb: f64| {
                let out = cos2.partition_point(|&c| log2_1p(sinr_from_alignment(gain2, c, su2, sv2, p.sigma_d2)) < rb);
                out as f64 / draws
            };
            let (mut lo, mut hi) = (0.0, rate_ceiling(&p, phi, gain2));
            if pco(hi) <= p.sigma_co {
                lo = hi;
            }
            while hi - lo > rb_tolerance {
                let mid = 0.5 * (lo + hi);
                if pco(mid) <= p.sigma_co {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            best = best.max(lo - re_min(&p, phi)?);
        }
        Ok(best)
    }

    /// Full pipeline per draw: channel, CGI feedback (`None` means exact),
    /// CDI feedback, design at the assumed gain, and the realized outcome.
    pub fn empirical_throughput(&self, cgi: Option<&CgiQuantizer>) -> Result<ThroughputEstimate> {
        let p = self.cfg.params;
        if let Some(q) = cgi {
            if q.params() != &p {
                return param("quantizer was built for different parameters");
            }
        }
        let curve = RateCurve::new(&p)?;
        let scale = 1.0 - p.sigma_co;
        let parts = self.blocks(|rng, len| {
            let (mut acc, mut del, mut out) = (Moments::default(), Moments::default(), Moments::default());
            for _ in 0..len {
                let chan = ChannelRealization::sample(p.n, rng)?;
                let assumed = match cgi {
                    Some(q) => q.representative(q.index(chan.gain2)),
                    None => Some(chan.gain2),
                };
                let design = assumed.and_then(|z| curve.design(z));
                let Some(d) = design.filter(|d| d.rs_star > 0.0) else {
                    acc.push(0.0);
                    del.push(0.0);
                    continue;
                };
                let sinr = self.realized_sinr(&chan, &d, rng)?;
                let ok = log2_1p(sinr) >= d.rb_star;
                acc.push(scale * d.rs_star);
                del.push(if ok { d.rs_star } else { 0.0 });
                out.push(if ok { 0.0 } else { 1.0 });
            }
            Ok((acc, del, out))
        })?;
        let (acc, del, out) = parts
            .into_iter()
            .fold(Default::default(), |(a, d, o): (Moments, Moments, Moments), (x, y, z)| {
                (a.merge(x), d.merge(y), o.merge(z))
            });
        let outage = if out.count > 0 {
            EstimateWithError::proportion(out.sum as u64, out.count)
        } else {
            EstimateWithError { value: 0.0, std_err: 0.0, draws: 0 }
        };
        Ok(ThroughputEstimate {
            accounted: EstimateWithError::from_moments(acc),
            delivered: EstimateWithError::from_moments(del),
            outage_when_transmitting: outage,
            transmit_fraction: out.count as f64 / self.cfg.draws as f64,
        })
    }

    /// SINR of one transmission designed by `d` over `chan`.
    fn realized_sinr<R: Rng + ?Sized>(&self, chan: &ChannelRealization, d: &RateDesign, rng: &mut R) -> Result<f64> {
        let p = &self.cfg.params;
        match &self.codebook {
            Some(cb) => {
                let q = quantize_direction(&chan.direction, cb)?;
                let bf = Beamformer::new(cb.vectors()[q.index].clone(), d.phi_star, p.p)?;
                sinr_desired(chan, &bf, p.sigma_d2)
            }
            None => {
                let cos2 = 1.0 - sample_qca_error(p.n, p.b1, rng);
                let su2 = p.p * d.phi_star;
                let sv2 = p.p * (1.0 - d.phi_star) / (p.n - 1) as f64;
                Ok(sinr_from_alignment(chan.gain2, cos2, su2, sv2, p.sigma_d2))
            }
        }
    }

    /// Frequency of `[log2(1 + SINR_d) - log2(1 + SIR_e)]^+ < Rs*` at a fixed
    /// gain under the optimal design.
    pub fn empirical_secrecy_capacity_bound(&self, gain2: f64) -> Result<EstimateWithError> {
        let p = self.cfg.params;
        let d = design_closed_form(&p, gain2)?;
        self.count(|rng, len| {
            let mut hits = 0;
            for _ in 0..len {
                let (dir, c, _) = self.cdi(rng)?;
                let chan = ChannelRealization::from_parts(gain2, dir)?;
                let bf = Beamformer::new(c, d.phi_star, p.p)?;
                let cd = log2_1p(sinr_desired(&chan, &bf, p.sigma_d2)?);
                let g = sample_rayleigh(p.n, p.sigma_g2, rng)?;
                let ce = sir_eavesdropper(&g, &bf)?.capacity();
                let cs = (cd - ce).max(0.0);
                hits += u64::from(cs < d.rs_star);
            }
            Ok(hits)
        })
    }
}

pub fn empirical_pco(cfg: &SimConfig, rb: f64, phi: f64, gain2: f64) -> Result<EstimateWithError> {
    Simulator::new(*cfg)?.empirical_pco(rb, phi, gain2)
}

pub fn empirical_pso(cfg: &SimConfig, re: f64, phi: f64) -> Result<EstimateWithError> {
    Simulator::new(*cfg)?.empirical_pso(re, phi)
}

pub fn empirical_rs_star(cfg: &SimConfig, gain2: f64, phi_grid: &[f64], rb_tolerance: f64) -> Result<f64> {
    Simulator::new(*cfg)?.empirical_rs_star(gain2, phi_grid, rb_tolerance)
}

pub fn empirical_throughput(cfg: &SimConfig, cgi: Option<&CgiQuantizer>) -> Result<ThroughputEstimate> {
    Simulator::new(*cfg)?.empirical_throughput(cgi)
}

pub fn empirical_secrecy_capacity_bound(cfg: &SimConfig, gain2: f64) -> Result<EstimateWithError> {
    Simulator::new(*cfg)?.empirical_secrecy_capacity_bound(gain2)
}

/// Evenly spaced interior grid on `(0, 1)`.
pub fn phi_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|i| i as f64 / (points + 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outage::{pco_qca, pso, rb_max};
    use crate::throughput::{build_quantizer, throughput_exact_cgi, throughput_quantized_cgi};

    fn cfg(params: SystemParams, draws: u64, source: CodebookSource) -> SimConfig {
        SimConfig { params, draws, seed: 7, codebook_source: source, workers: 4 }
    }

    fn base() -> SystemParams {
        SystemParams { n: 4, p: 10.0, sigma_d2: 1.0, b1: 10, b2: 5, sigma_co: 0.05, eps_so: 0.02, ..SystemParams::default() }
    }

    #[test]
    fn config_validation() {
        assert!(Simulator::new(cfg(base(), 999, CodebookSource::QcaSynthetic)).is_err());
        let mut c = cfg(base(), 1000, CodebookSource::QcaSynthetic);
        c.workers = 0;
        assert!(Simulator::new(c).is_err());
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let mut c = cfg(base(), 20_000, CodebookSource::Rvq);
        let a = empirical_pco(&c, 3.0, 0.5, 4.0).unwrap();
        c.workers = 1;
        let b = empirical_pco(&c, 3.0, 0.5, 4.0).unwrap();
        assert_eq!(a, b);
        let t1 = empirical_throughput(&cfg(base(), 20_000, CodebookSource::QcaSynthetic), None).unwrap();
        let t2 = empirical_throughput(&SimConfig { workers: 3, ..cfg(base(), 20_000, CodebookSource::QcaSynthetic) }, None).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn zero_rates_are_trivial() {
        let c = cfg(base(), 5000, CodebookSource::QcaSynthetic);
        assert_eq!(empirical_pco(&c, 0.0, 0.5, 4.0).unwrap().value, 0.0);
        assert_eq!(empirical_pso(&c, 0.0, 0.5).unwrap().value, 1.0);
    }

    #[test]
    fn synthetic_pco_matches_closed_form() {
        let params = SystemParams { n: 3, b1: 6, ..base() };
        let sim = Simulator::new(cfg(params, 200_000, CodebookSource::QcaSynthetic)).unwrap();
        for (rb, phi, g) in [(2.0, 0.5, 3.0), (3.5, 0.7, 6.0), (1.0, 0.3, 1.0)] {
            let est = sim.empirical_pco(rb, phi, g).unwrap();
            let exact = pco_qca(&params, rb, phi, g).unwrap();
            assert!(est.z_score(exact) < 3.0 || est.std_err == 0.0 && (est.value - exact).abs() < 1e-3, "{est:?} vs {exact}");
        }
    }

    #[test]
    fn pso_matches_closed_form() {
        let params = SystemParams { n: 3, ..base() };
        let sim = Simulator::new(cfg(params, 200_000, CodebookSource::QcaSynthetic)).unwrap();
        for (re, phi) in [(0.5, 0.5), (2.0, 0.8), (1.0, 0.2)] {
            let est = sim.empirical_pso(re, phi).unwrap();
            assert!(est.z_score(pso(&params, re, phi)) < 3.0, "{est:?}");
        }
    }

    #[test]
    fn rs_star_without_outage_constraint_uses_full_capacity() {
        let params = SystemParams { n: 2, b1: 6, sigma_co: 1.0, eps_so: 0.05, p: 10.0, ..base() };
        let sim = Simulator::new(cfg(params, 5000, CodebookSource::QcaSynthetic)).unwrap();
        let grid = phi_grid(199);
        let est = sim.empirical_rs_star(4.0, &grid, 1e-4).unwrap();
        let oracle = grid
            .iter()
            .map(|&phi| rate_ceiling(&params, phi, 4.0) - re_min(&params, phi).unwrap())
            .fold(0.0, f64::max);
        assert!((est - oracle).abs() < 2e-4, "{est} vs {oracle}");
    }

    #[test]
    fn synthetic_rs_star_tracks_design() {
        let params = SystemParams { n: 2, b1: 6, sigma_co: 0.1, eps_so: 0.05, p: 10.0, ..base() };
        let sim = Simulator::new(cfg(params, 100_000, CodebookSource::QcaSynthetic)).unwrap();
        let est = sim.empirical_rs_star(4.0, &phi_grid(399), 1e-3).unwrap();
        let d = design_closed_form(&params, 4.0).unwrap();
        assert!((est - d.rs_star).abs() < 0.02, "{est} vs {}", d.rs_star);
        let rb = rb_max(&params, d.phi_star, 4.0).unwrap();
        assert!((rb - d.rb_star).abs() < 1e-9);
    }

    #[test]
    fn synthetic_throughput_matches_analytics() {
        let params = base();
        let sim = Simulator::new(cfg(params, 200_000, CodebookSource::QcaSynthetic)).unwrap();
        let exact = throughput_exact_cgi(&params).unwrap().eta;
        let t = sim.empirical_throughput(None).unwrap();
        assert!(t.accounted.z_score(exact) < 3.0, "{:?} vs {exact}", t.accounted);
        assert!(t.delivered.z_score(exact) < 3.5, "{:?} vs {exact}", t.delivered);
        assert!(t.outage_when_transmitting.value <= 0.05 + 3.0 * t.outage_when_transmitting.std_err);

        let q = build_quantizer(&params).unwrap();
        let eta_q = throughput_quantized_cgi(&params, &q).unwrap().eta;
        let tq = sim.empirical_throughput(Some(&q)).unwrap();
        assert!(tq.accounted.z_score(eta_q) < 3.0, "{:?} vs {eta_q}", tq.accounted);
        assert!(tq.outage_when_transmitting.value <= 0.05 + 3.0 * tq.outage_when_transmitting.std_err);
    }

    #[test]
    fn secrecy_capacity_bound_holds() {
        let params = SystemParams { n: 3, b1: 8, ..base() };
        let sim = Simulator::new(cfg(params, 100_000, CodebookSource::QcaSynthetic)).unwrap();
        let est = sim.empirical_secrecy_capacity_bound(5.0).unwrap();
        assert!(est.value <= 0.07 + 3.0 * est.std_err, "{est:?}");
        let loose = Simulator::new(cfg(params.with_constraints(0.2, 0.1), 100_000, CodebookSource::QcaSynthetic)).unwrap();
        assert!(loose.empirical_secrecy_capacity_bound(5.0).unwrap().value > est.value);
    }

    #[test]
    fn estimate_helpers() {
        let e = EstimateWithError::proportion(25, 100);
        assert!((e.std_err - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert_eq!(EstimateWithError { value: 1.0, std_err: 0.0, draws: 1 }.z_score(1.0), 0.0);
        let m = [1.0, 2.0, 3.0].iter().fold(Moments::default(), |mut m, &x| {
            m.push(x);
            m
        });
        let e = EstimateWithError::from_moments(m);
        assert_eq!(e.value, 2.0);
        assert!((e.std_err - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn phi_grid_is_interior() {
        let g = phi_grid(3);
        assert_eq!(g, vec![0.25, 0.5, 0.75]);
    }
}
