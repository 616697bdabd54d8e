//! End-to-end use of the public API: build models, scatter, analyze,
//! integrate.

use qtransduce::analysis::{efficiency_map, high_efficiency_intervals, ScanOptions, SetupFamily};
use qtransduce::converter::{
    converter_ports, detuned_network, efficiency_closed_form, resonant_network, DetunedParams, ResonantParams,
};
use qtransduce::ensemble::{effective_network, microscopic_network, AtomEnsemble};
use qtransduce::format::linspace;
use qtransduce::scattering::{scattering_matrix, transmission};
use qtransduce::timedomain::steady_state_transmission;
use qtransduce::{Complex64, ComplexMatrix, CoupledModeNetwork};

#[test]
fn network_survives_json_round_trip() {
    let p = DetunedParams::new(ResonantParams::new(0.8, 1.2, 1.5, 2.5).unwrap(), 0.7).unwrap();
    let net = detuned_network(&p);
    let back = CoupledModeNetwork::from_json(&net.to_json()).unwrap();
    assert_eq!(back, net);
    let s1 = scattering_matrix(&net, 0.3).unwrap().s;
    let s2 = scattering_matrix(&back, 0.3).unwrap().s;
    assert_eq!(s1, s2);
}

#[test]
fn asymmetric_resonant_conversion_is_lossless() {
    // no intrinsic loss: whatever is not converted is reflected
    let net = resonant_network(&ResonantParams::new(0.6, 1.4, 0.9, 3.0).unwrap());
    for w in linspace(-3.0, 3.0, 61) {
        let s = scattering_matrix(&net, w).unwrap().s;
        let col: f64 = (0..2).map(|r| s[(r, 0)].norm_sqr()).sum();
        assert!((col - 1.0).abs() < 1e-12);
    }
}

#[test]
fn map_rows_match_closed_form() {
    let kappas = linspace(0.5, 3.0, 6);
    let omegas = linspace(-2.0, 2.0, 41);
    let m = efficiency_map(&SetupFamily::Resonant { g: 1.0 }, &kappas, &omegas).unwrap();
    for (k, row) in kappas.iter().zip(&m.etas) {
        for (w, eta) in omegas.iter().zip(row) {
            assert!((eta.unwrap() - efficiency_closed_form(*w, 1.0, *k)).abs() < 1e-12);
        }
    }
}

#[test]
fn interval_edges_sit_on_threshold() {
    let net = resonant_network(&ResonantParams::symmetric(1.0, 2.0).unwrap());
    let (a, b) = converter_ports(&net).unwrap();
    let report = high_efficiency_intervals(&net, a, b, 0.99, (-3.0, 3.0), ScanOptions::default()).unwrap();
    assert_eq!(report.intervals.len(), 3);
    for i in &report.intervals {
        for edge in [i.lo, i.hi] {
            assert!((efficiency_closed_form(edge, 1.0, 2.0) - 0.99).abs() < 1e-8);
        }
    }
}

#[test]
fn effective_model_tracks_microscopic_on_resonance() {
    let ens = AtomEnsemble::validation_default();
    let micro = microscopic_network(&ens, 2.6, 2.6, true).unwrap().port_reachable();
    let eff = effective_network(&ens, 2.6, 2.6).unwrap().network;
    let eta = |net: &CoupledModeNetwork| {
        let (a, b) = converter_ports(net).unwrap();
        transmission(net, 0.0, a, b).unwrap().norm_sqr()
    };
    assert!((eta(&micro) - eta(&eff)).abs() < 1e-3);
    assert!(eta(&micro) > 0.99);
}

#[test]
fn time_domain_reproduces_detuned_transmission() {
    let p = DetunedParams::new(ResonantParams::symmetric(1.0, 1.0).unwrap(), 0.5).unwrap();
    let net = detuned_network(&p);
    let (a, b) = converter_ports(&net).unwrap();
    let td = steady_state_transmission(&net, 0.4, a, b).unwrap();
    let fd = transmission(&net, 0.4, a, b).unwrap();
    assert!((td - fd).norm() < 1e-3, "{td} vs {fd}");
}

#[test]
fn complex_coupling_keeps_unitarity() {
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let a = ComplexMatrix::from_rows(&[
        vec![zero, one + i, zero],
        vec![one - i, Complex64::new(0.3, 0.0), 0.5 * i],
        vec![zero, -0.5 * i, zero],
    ])
    .unwrap();
    let net = CoupledModeNetwork::new(["a", "c", "b"], a, vec![1.0, 0.0, 2.0]).unwrap();
    let s = scattering_matrix(&net, 0.2).unwrap().s;
    let defect = (&s.adjoint() * &s).sub(&ComplexMatrix::identity(2)).max_abs();
    assert!(defect < 1e-12);
}
