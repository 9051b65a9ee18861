//! Simulated counterparts of the closed forms, within a few standard errors.

use sld::design::design_closed_form;
use sld::montecarlo::{phi_grid, CodebookSource, SimConfig, Simulator};
use sld::outage::{pco_qca, pso};
use sld::throughput::{build_one_bit_quantizer, build_quantizer, throughput_exact_cgi, throughput_quantized_cgi};
use sld::SystemParams;

fn fig4() -> SystemParams {
    SystemParams { n: 4, p: 10.0, sigma_d2: 1.0, b1: 10, b2: 5, sigma_co: 0.05, eps_so: 0.02, delta: 1e-4, sigma_g2: 1.0 }
}

fn sim(params: SystemParams, draws: u64, seed: u64) -> Simulator {
    Simulator::new(SimConfig::new(params, draws, seed, CodebookSource::QcaSynthetic)).unwrap()
}

#[test]
fn connection_outage_matches_cap_model() {
    for (n, b1, rb, phi, g) in [(2, 6, 1.5, 0.6, 4.0), (4, 10, 2.8, 0.5, 4.0), (6, 12, 3.5, 0.7, 8.0)] {
        let params = SystemParams { n, b1, ..fig4() };
        let est = sim(params, 400_000, 31).empirical_pco(rb, phi, g).unwrap();
        let exact = pco_qca(&params, rb, phi, g).unwrap();
        assert!(est.z_score(exact).abs() < 4.0, "n={n}: {} vs {exact}", est.value);
    }
}

#[test]
fn design_is_tight_in_simulation() {
    let params = fig4();
    let d = design_closed_form(&params, 4.0).unwrap();
    let s = sim(params, 1_000_000, 32);
    let pco = s.empirical_pco(d.rb_star, d.phi_star, 4.0).unwrap();
    let pso_hat = s.empirical_pso(d.re_star, d.phi_star).unwrap();
    assert!(pco.z_score(params.sigma_co).abs() < 4.0, "{pco:?}");
    assert!(pso_hat.z_score(pso(&params, d.re_star, d.phi_star)).abs() < 4.0, "{pso_hat:?}");
    let rs = s.empirical_rs_star(4.0, &phi_grid(399), 1e-4).unwrap();
    assert!((rs - d.rs_star).abs() < 5e-3, "{rs} vs {}", d.rs_star);
}

#[test]
fn throughput_matches_quadrature() {
    let params = fig4();
    let s = sim(params, 400_000, 33);
    let exact = s.empirical_throughput(None).unwrap();
    let eta = throughput_exact_cgi(&params).unwrap().eta;
    assert!(exact.accounted.z_score(eta).abs() < 4.0, "{exact:?} vs {eta}");
    assert!(exact.outage_when_transmitting.z_score(params.sigma_co).abs() < 4.0);

    for q in [build_quantizer(&params).unwrap(), build_one_bit_quantizer(&params.with_b2(1)).unwrap()] {
        let p = *q.params();
        let est = sim(p, 400_000, 34).empirical_throughput(Some(&q)).unwrap();
        let eta = throughput_quantized_cgi(&p, &q).unwrap().eta;
        assert!(est.accounted.z_score(eta).abs() < 4.0, "b2={}: {:?} vs {eta}", q.b2, est.accounted);
        // Designing for the lower cell edge only helps the realized outage.
        assert!(est.delivered.value >= est.accounted.value);
    }
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let params = fig4();
    let run = |workers: usize| {
        let cfg = SimConfig { workers, ..SimConfig::new(params, 50_000, 35, CodebookSource::Rvq) };
        let s = Simulator::new(cfg).unwrap();
        (s.empirical_pco(3.0, 0.5, 4.0).unwrap(), s.empirical_throughput(None).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}
