//! Outage probabilities, the rate bounds that meet them, and the bits and
//! gain needed before any secrecy rate is possible.

use sld::outage::{b1_min, feasibility, pco_qca, pso, rb_max, re_min};
use sld::SystemParams;

fn main() -> sld::Result<()> {
    let params = SystemParams { n: 4, p: 10.0, sigma_co: 0.05, eps_so: 0.02, b1: 10, ..SystemParams::default() };
    let (phi, gain2) = (0.5, 4.0);

    let rb = rb_max(&params, phi, gain2)?;
    let re = re_min(&params, phi)?;
    println!("phi = {phi}, ||h||^2 = {gain2}: Rb <= {rb:.4}, Re >= {re:.4}");
    println!("pco(Rb) = {:.6}, pso(Re) = {:.6}", pco_qca(&params, rb, phi, gain2)?, pso(&params, re, phi));

    println!("\nCDI bits needed (rows sigma, columns epsilon)");
    let eps = [1.0, 0.1, 0.01, 0.001];
    println!("{:>8} {}", "", eps.map(|e| format!("{e:>7}")).join(""));
    for sigma in [1.0, 0.1, 0.01] {
        let row = eps.map(|e| b1_min(sigma, e).map(|b| format!("{b:>7}")).unwrap_or_default());
        println!("{sigma:>8} {}", row.join(""));
    }

    for b1 in [5, 6, 8, 12, 20] {
        let report = feasibility(&params.with_b1(b1))?;
        println!("b1 = {b1:>2}: {report}");
    }
    Ok(())
}
