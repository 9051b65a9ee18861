//! Random and line-packed codebooks, their packing quality, and the cap-model
//! error law they are compared against.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sld::channel::sample_unit_direction;
use sld::codebook::{generate_grassmannian, generate_rvq, qca_error_cdf, qca_max_error, quantize_direction, Codebook};

fn error_quantile(cb: &Codebook, q: f64, rng: &mut ChaCha8Rng) -> sld::Result<f64> {
    let mut errs = (0..50_000)
        .map(|_| Ok(1.0 - quantize_direction(&sample_unit_direction(cb.n(), rng)?, cb)?.cos2_theta))
        .collect::<sld::Result<Vec<f64>>>()?;
    errs.sort_by(f64::total_cmp);
    Ok(errs[((errs.len() - 1) as f64 * q) as usize])
}

fn main() -> sld::Result<()> {
    let (n, b1) = (2, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rvq = generate_rvq(n, b1, &mut rng)?;
    let packed = generate_grassmannian(n, b1, 3, 16)?;
    println!("max |c_i^H c_j|: rvq {:.4}, packed {:.4}", rvq.max_pair_correlation(), packed.max_pair_correlation());

    let cap = qca_max_error(n, b1);
    println!("cap model: error <= {cap:.5}, median {:.5}", cap * 0.5f64.powf(1.0 / (n - 1) as f64));
    for q in [0.5, 0.9, 0.99] {
        println!(
            "error quantile {q}: rvq {:.5}, packed {:.5}, cap cdf at packed value {:.3}",
            error_quantile(&rvq, q, &mut rng)?,
            error_quantile(&packed, q, &mut rng)?,
            qca_error_cdf(n, b1, error_quantile(&packed, q, &mut rng)?)
        );
    }

    let mut buf = Vec::new();
    packed.save(&mut buf)?;
    let back = Codebook::load(buf.as_slice())?;
    println!("saved {} bytes, round trip equal: {}", buf.len(), back == packed);
    Ok(())
}
