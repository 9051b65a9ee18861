//! Optimal power split and wiretap code rates for one channel gain, checked
//! against a numerical search and the unlimited-feedback design.

use sld::design::{design_closed_form, design_numeric, design_perfect_csi, RateCurve};
use sld::SystemParams;

fn main() -> sld::Result<()> {
    let base = SystemParams { n: 4, sigma_co: 0.1, eps_so: 0.01, b1: 10, ..SystemParams::default() };
    let gain2 = 8.0;

    println!("{:>8} {:>8} {:>8} {:>8} {:>8} {:>10} {:>9}", "P", "phi*", "Rb*", "Re*", "Rs*", "|dRs| num", "phi perf");
    for p in [10.0, 30.0, 100.0, 1e3, 1e4] {
        let params = base.with_power(p);
        let d = design_closed_form(&params, gain2)?;
        let num = design_numeric(&params, gain2, 1e-12)?;
        let perfect = design_perfect_csi(&params, gain2)?;
        println!(
            "{p:>8} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>10.1e} {:>9.4}",
            d.phi_star,
            d.rb_star,
            d.re_star,
            d.rs_star,
            (d.rs_star - num.rs_star).abs(),
            perfect.phi_star
        );
    }

    // The curve object reuses the gain-independent pieces across many gains.
    let curve = RateCurve::new(&base.with_power(100.0))?;
    println!("\ntransmit threshold {:.4}, large-gain limit {:.4}", curve.mu_min(), curve.rs_limit());
    for g in [1.0, 2.0, 4.0, 16.0, 64.0] {
        println!("Rs*({g}) = {:.4}", curve.rs(g));
    }
    Ok(())
}
