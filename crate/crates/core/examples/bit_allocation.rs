//! Splitting a fixed feedback budget between direction and gain bits, and
//! the budget needed to reach a share of the unlimited-feedback throughput.

use sld::throughput::{bits_for_fraction, sweep_bit_allocation};
use sld::SystemParams;

fn main() -> sld::Result<()> {
    let params = SystemParams { n: 4, p: 10.0, sigma_co: 0.05, eps_so: 0.01, delta: 1e-4, ..SystemParams::default() };
    let sweep = sweep_bit_allocation(&params, 40, None)?;
    for pt in &sweep.points {
        let mark = if pt.b2 == sweep.best_point().b2 { " <" } else { "" };
        println!("b1 = {:>2} b2 = {:>2} tau = {:.3} eta = {:.5}{mark}", pt.b1, pt.b2, pt.tau, pt.eta);
    }
    println!("best split tau* = {:.3}", sweep.tau_star());

    let params = SystemParams { p: 20.0, sigma_co: 0.03, ..params };
    for eps in [0.001, 0.01, 0.1, 0.5] {
        let Some(r) = bits_for_fraction(&SystemParams { eps_so: eps, ..params }, 0.9)? else {
            println!("epsilon = {eps:<6} never reaches 90%");
            continue;
        };
        println!(
            "epsilon = {eps:<6} {:>2} bits ({:.2} per antenna), tau* = {:.3}, eta = {:.4} of {:.4}",
            r.total_bits, r.bits_per_antenna, r.tau_star, r.eta, r.eta_perfect
        );
    }
    Ok(())
}
