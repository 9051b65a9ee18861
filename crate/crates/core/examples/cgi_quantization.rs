//! Throughput with exact, one-bit and equalized channel gain feedback, and
//! the large-power limit.

use sld::throughput::{build_quantizer, throughput_asymptote, throughput_exact_cgi, throughput_quantized_cgi};
use sld::SystemParams;

fn main() -> sld::Result<()> {
    let base = SystemParams { n: 4, b1: 10, sigma_co: 0.05, eps_so: 0.02, delta: 1e-4, ..SystemParams::default() };

    print!("{:>6} {:>9}", "P", "exact");
    for b2 in 1..=5 {
        print!(" {:>8}", format!("b2={b2}"));
    }
    println!();
    for p in [2.0, 5.0, 10.0, 20.0, 50.0, 100.0] {
        let params = base.with_power(p);
        print!("{p:>6} {:>9.5}", throughput_exact_cgi(&params)?.eta);
        for b2 in 1..=5 {
            let params = params.with_b2(b2);
            let q = build_quantizer(&params)?;
            print!(" {:>8.5}", throughput_quantized_cgi(&params, &q)?.eta);
        }
        println!();
    }
    println!("limit as P grows: {:.5}", throughput_asymptote(&base)?);

    let q = build_quantizer(&base.with_power(10.0).with_b2(3))?;
    println!("\nb2 = 3 cells: suspend below {:.4}", q.mu1.unwrap_or(f64::NAN));
    for (m, edge) in q.representatives.iter().enumerate() {
        println!("  index {:>2}: assume ||h||^2 = {edge:.4}", m + 1);
    }
    Ok(())
}
