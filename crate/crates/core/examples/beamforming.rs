//! Builds an artificial-noise beamformer around a quantized direction and
//! compares the SINR and SIR it produces with the power split.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sld::channel::{sample_rayleigh, sinr_desired, sir_eavesdropper, Beamformer, ChannelRealization};
use sld::codebook::{generate_rvq, quantize_direction};

fn main() -> sld::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (n, b1, power, sigma_d2) = (4, 8, 10.0, 1.0);

    let chan = ChannelRealization::sample(n, &mut rng)?;
    let codebook = generate_rvq(n, b1, &mut rng)?;
    let q = quantize_direction(&chan.direction, &codebook)?;
    println!("||h||^2 = {:.4}, cos^2 to codeword {} = {:.6}", chan.gain2, q.index, q.cos2_theta);

    let eve = sample_rayleigh(n, 1.0, &mut rng)?;
    println!("{:>6} {:>12} {:>12}", "phi", "SINR_d", "SIR_e");
    for phi in [0.2, 0.4, 0.6, 0.8, 1.0] {
        let bf = Beamformer::new(codebook.vectors()[q.index].clone(), phi, power)?;
        let sinr = sinr_desired(&chan, &bf, sigma_d2)?;
        let sir = sir_eavesdropper(&eve, &bf)?;
        println!("{phi:>6.1} {sinr:>12.4} {:>12.4}", sir.value());
    }

    // One channel use: the desired receiver sees mostly signal, Eve sees noise too.
    let bf = Beamformer::new(codebook.vectors()[q.index].clone(), 0.5, power)?;
    let sample = bf.observe(&chan, &eve, sigma_d2, &mut rng)?;
    println!("y_d = {:.3}, y_e = {:.3}", sample.y_d, sample.y_e);
    Ok(())
}
