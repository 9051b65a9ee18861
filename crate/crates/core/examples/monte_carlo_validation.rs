//! Seeded simulations of every closed form at one operating point.

use sld::design::design_closed_form;
use sld::montecarlo::{phi_grid, CodebookSource, SimConfig, Simulator};
use sld::outage::{pco_qca, pso};
use sld::throughput::{build_quantizer, throughput_exact_cgi, throughput_quantized_cgi};
use sld::SystemParams;

fn main() -> sld::Result<()> {
    let params = SystemParams { n: 4, p: 10.0, b1: 10, b2: 5, sigma_co: 0.05, eps_so: 0.02, ..SystemParams::default() };
    let gain2 = 4.0;
    let d = design_closed_form(&params, gain2)?;

    for source in [CodebookSource::QcaSynthetic, CodebookSource::Rvq] {
        let sim = Simulator::new(SimConfig::new(params, 200_000, 11, source))?;
        println!("{source:?}");
        let e = sim.empirical_pco(d.rb_star, d.phi_star, gain2)?;
        println!("  pco at design    {:.5} +- {:.5} (model {:.5})", e.value, e.std_err, pco_qca(&params, d.rb_star, d.phi_star, gain2)?);
        let e = sim.empirical_pso(d.re_star, d.phi_star)?;
        println!("  pso at design    {:.5} +- {:.5} (model {:.5})", e.value, e.std_err, pso(&params, d.re_star, d.phi_star));
        let rs = sim.empirical_rs_star(gain2, &phi_grid(199), 1e-3)?;
        println!("  Rs* by inversion {rs:.4} (model {:.4})", d.rs_star);
        let e = sim.empirical_secrecy_capacity_bound(gain2)?;
        println!("  P(Cs < Rs*)      {:.5} +- {:.5} (bound {:.2})", e.value, e.std_err, params.sigma_co + params.eps_so);
    }

    let sim = Simulator::new(SimConfig::new(params, 200_000, 12, CodebookSource::QcaSynthetic))?;
    let t = sim.empirical_throughput(None)?;
    println!("exact CGI: {:.5} +- {:.5} (model {:.5})", t.accounted.value, t.accounted.std_err, throughput_exact_cgi(&params)?.eta);
    let q = build_quantizer(&params)?;
    let t = sim.empirical_throughput(Some(&q))?;
    println!(
        "b2 = 5:    {:.5} +- {:.5} (model {:.5}), delivered {:.5}, outage when sending {:.4}",
        t.accounted.value,
        t.accounted.std_err,
        throughput_quantized_cgi(&params, &q)?.eta,
        t.delivered.value,
        t.outage_when_transmitting.value
    );
    Ok(())
}
