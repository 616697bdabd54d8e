//! Frequency-domain input-output relations.
//!
//! With Fourier components at `e^{-iωt}` the Langevin equation
//! `dā/dt = −iAā − (K/2)ā − √K ā_in` becomes `M ā = −2√K ā_in` with
//! `M = K − 2iω + 2iA`. Outputs follow `ā_out = −√K ā − ā_in`, so the port
//! scattering matrix is `S = 2√K M⁻¹ √K − 1`.

use num_complex::Complex64;

use crate::complexlin::{solve_linear, ComplexMatrix};
use crate::error::{Error, Result};
use crate::network::{CoupledModeNetwork, PortId};

/// Scattering matrix over the ports of a network at one frequency.
/// Rows are output ports, columns input ports, both in port order.
#[derive(Debug, Clone)]
pub struct ScatteringResult {
    pub omega: f64,
    pub ports: Vec<PortId>,
    pub s: ComplexMatrix,
    /// `‖M‖∞ ‖M⁻¹‖∞`
    pub condition_estimate: f64,
}

impl ScatteringResult {
    fn slot(&self, port: PortId) -> Result<usize> {
        self.ports
            .iter()
            .position(|&p| p == port)
            .ok_or(Error::InvalidPort(port.0))
    }

    /// `S[out, in]`.
    pub fn element(&self, out_port: PortId, in_port: PortId) -> Result<Complex64> {
        Ok(self.s[(self.slot(out_port)?, self.slot(in_port)?)])
    }
}

/// `M = K − 2iω·1 + 2iA`.
pub fn dynamical_matrix(net: &CoupledModeNetwork, omega: f64) -> ComplexMatrix {
    let n = net.len();
    let two_i = Complex64::new(0.0, 2.0);
    let mut m = net.coupling().scale(two_i);
    for i in 0..n {
        m[(i, i)] += Complex64::new(net.damping()[i], -2.0 * omega);
    }
    m
}

fn singular_at(omega: f64) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::SingularMatrix { .. } => Error::SingularAtFrequency { omega },
        other => other,
    }
}

/// Mode amplitudes `ā = −2 M⁻¹ √K ā_in` for port drives `a_in` (one entry per
/// port, in port order).
pub fn internal_amplitudes(
    net: &CoupledModeNetwork,
    omega: f64,
    a_in: &[Complex64],
) -> Result<Vec<Complex64>> {
    let ports = net.ports();
    if a_in.len() != ports.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} drive amplitudes for {} ports",
            a_in.len(),
            ports.len()
        )));
    }
    let n = net.len();
    let mut rhs = ComplexMatrix::zeros(n, 1);
    for (p, &amp) in ports.iter().zip(a_in) {
        rhs[(p.0, 0)] = -2.0 * net.damping()[p.0].sqrt() * amp;
    }
    let x = solve_linear(&dynamical_matrix(net, omega), &rhs).map_err(singular_at(omega))?;
    Ok(x.column(0))
}

pub fn scattering_matrix(net: &CoupledModeNetwork, omega: f64) -> Result<ScatteringResult> {
    let ports = net.ports();
    if ports.is_empty() {
        return Err(Error::NoPorts);
    }
    let m = dynamical_matrix(net, omega);
    let inv = solve_linear(&m, &ComplexMatrix::identity(net.len())).map_err(singular_at(omega))?;
    let condition_estimate = m.norm_inf() * inv.norm_inf();

    let np = ports.len();
    let mut s = ComplexMatrix::zeros(np, np);
    for (r, pr) in ports.iter().enumerate() {
        let kr = net.damping()[pr.0].sqrt();
        for (c, pc) in ports.iter().enumerate() {
            let kc = net.damping()[pc.0].sqrt();
            let mut v = 2.0 * kr * kc * inv[(pr.0, pc.0)];
            if r == c {
                v -= 1.0;
            }
            s[(r, c)] = v;
        }
    }
    Ok(ScatteringResult { omega, ports, s, condition_estimate })
}

/// Single element `S[out_port, in_port]`.
pub fn transmission(
    net: &CoupledModeNetwork,
    omega: f64,
    in_port: PortId,
    out_port: PortId,
) -> Result<Complex64> {
    net.check_port(in_port)?;
    net.check_port(out_port)?;
    // one column of M⁻¹ is enough
    let n = net.len();
    let mut rhs = ComplexMatrix::zeros(n, 1);
    rhs[(in_port.0, 0)] = Complex64::new(1.0, 0.0);
    let x = solve_linear(&dynamical_matrix(net, omega), &rhs).map_err(singular_at(omega))?;
    let k = net.damping();
    let mut t = 2.0 * k[out_port.0].sqrt() * k[in_port.0].sqrt() * x[(out_port.0, 0)];
    if in_port == out_port {
        t -= 1.0;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn single(kappa: f64) -> CoupledModeNetwork {
        CoupledModeNetwork::new(["a"], ComplexMatrix::zeros(1, 1), vec![kappa]).unwrap()
    }

    fn chain(g: f64, kappa: f64, dmu: f64) -> CoupledModeNetwork {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, g, 0.0], &[g, dmu, g], &[0.0, g, 0.0]]).unwrap();
        CoupledModeNetwork::new(["a", "c", "b"], a, vec![kappa, 0.0, kappa]).unwrap()
    }

    #[test]
    fn single_mode_dynamical_matrix() {
        let m = dynamical_matrix(&single(1.5), 0.3);
        assert_eq!(m[(0, 0)], c(1.5, -0.6));
    }

    #[test]
    fn resonant_dynamical_matrix_at_zero() {
        let m = dynamical_matrix(&chain(1.0, 2.0, 0.0), 0.0);
        let expect = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.0, 2.0), c(0.0, 0.0)],
            vec![c(0.0, 2.0), c(0.0, 0.0), c(0.0, 2.0)],
            vec![c(0.0, 0.0), c(0.0, 2.0), c(2.0, 0.0)],
        ])
        .unwrap();
        assert_eq!(m, expect);
    }

    #[test]
    fn uncoupled_dynamical_matrix_is_damping() {
        let net = CoupledModeNetwork::new(["x", "y"], ComplexMatrix::zeros(2, 2), vec![0.5, 3.0]).unwrap();
        assert_eq!(dynamical_matrix(&net, 0.0), ComplexMatrix::from_diag(&[c(0.5, 0.0), c(3.0, 0.0)]));
    }

    #[test]
    fn zero_drive_gives_zero_amplitudes() {
        let a = internal_amplitudes(&chain(1.0, 2.0, 0.0), 0.4, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(a.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn single_mode_amplitude() {
        let (kappa, omega) = (1.3, 0.7);
        let a = internal_amplitudes(&single(kappa), omega, &[c(1.0, 0.0)]).unwrap();
        let expect = -2.0 * kappa.sqrt() / c(kappa, -2.0 * omega);
        assert!((a[0] - expect).norm() < 1e-15);
    }

    #[test]
    fn resonant_amplitudes_give_full_conversion() {
        // κ = 2, g = 1, ω = 0: M = [[2,2i,0],[2i,0,2i],[0,2i,2]]; solving
        // M ā = (−2√2, 0, 0)ᵀ by hand gives a = −1/√2, c = i/√2, b = 1/√2,
        // so the output at b is −√2·b = −1.
        let net = chain(1.0, 2.0, 0.0);
        let amps = internal_amplitudes(&net, 0.0, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let s2 = 2.0_f64.sqrt();
        assert!((amps[0] - c(-1.0 / s2, 0.0)).norm() < 1e-14);
        assert!((amps[1] - c(0.0, 1.0 / s2)).norm() < 1e-14);
        assert!((amps[2] - c(1.0 / s2, 0.0)).norm() < 1e-14);
        let out_b = -s2 * amps[2];
        assert!((out_b - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn single_mode_reflection() {
        for &(kappa, omega) in &[(1.0, 0.0), (2.0, 0.7), (0.3, -4.0)] {
            let s = scattering_matrix(&single(kappa), omega).unwrap();
            let expect = c(kappa, 2.0 * omega) / c(kappa, -2.0 * omega);
            assert!((s.s[(0, 0)] - expect).norm() < 1e-14);
            assert!((s.s[(0, 0)].norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn resonant_unit_transmission_at_g() {
        let net = chain(1.0, 2.0, 0.0);
        for &w in &[-1.0, 0.0, 1.0] {
            let t = transmission(&net, w, PortId(0), PortId(2)).unwrap();
            assert!((t.norm() - 1.0).abs() < 1e-12, "omega {w}: {t}");
        }
    }

    #[test]
    fn detuned_transmission_at_center() {
        // t(0) = 1/(1 + iΔμκ/(4g²)) → |t|² = 1/(1 + 0.25)
        let net = chain(1.0, 0.2, 10.0);
        let t = transmission(&net, 0.0, PortId(0), PortId(2)).unwrap();
        assert!((t.norm_sqr() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn symmetric_coupling_is_reciprocal() {
        let net = chain(0.8, 1.7, 0.4);
        for &w in &[-2.0, 0.1, 0.9] {
            let ab = transmission(&net, w, PortId(0), PortId(2)).unwrap();
            let ba = transmission(&net, w, PortId(2), PortId(0)).unwrap();
            assert!((ab - ba).norm() < 1e-14);
        }
    }

    #[test]
    fn no_ports_is_an_error() {
        let net = CoupledModeNetwork::new(["x"], ComplexMatrix::zeros(1, 1), vec![0.0]).unwrap();
        assert!(matches!(scattering_matrix(&net, 0.0), Err(Error::NoPorts)));
    }

    #[test]
    fn dark_resonance_is_singular() {
        // interior mode at frequency 1 decoupled from everything
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]).unwrap();
        let net = CoupledModeNetwork::new(["a", "d"], a, vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            scattering_matrix(&net, 1.0),
            Err(Error::SingularAtFrequency { omega }) if omega == 1.0
        ));
        assert!(scattering_matrix(&net, 0.5).is_ok());
    }

    #[test]
    fn invalid_ports_rejected() {
        let net = chain(1.0, 2.0, 0.0);
        assert!(matches!(
            transmission(&net, 0.0, PortId(1), PortId(2)),
            Err(Error::InvalidPort(1))
        ));
        assert!(matches!(
            internal_amplitudes(&net, 0.0, &[c(1.0, 0.0)]),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
