//! Converter models and their closed-form reflection/efficiency expressions.
//!
//! The resonant and detuned networks use mode order `(a, c, b)`: optical
//! resonator, collective atomic excitation, microwave resonator. Both
//! off-diagonal couplings enter `A` with a positive sign. The Hamiltonian's
//! `−S_o` on the a–c link differs from this by the gauge change `c → −c`,
//! which leaves every efficiency unchanged.

use num_complex::Complex64;

use crate::complexlin::ComplexMatrix;
use crate::ensemble::AtomEnsemble;
use crate::error::{Error, Result};
use crate::network::{CoupledModeNetwork, PortId};

pub const OPTICAL: &str = "a";
pub const MICROWAVE: &str = "b";
pub const ATOMIC: &str = "c";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantParams {
    pub s_o: f64,
    pub s_mu: f64,
    pub kappa_o: f64,
    pub kappa_mu: f64,
}

impl ResonantParams {
    pub fn new(s_o: f64, s_mu: f64, kappa_o: f64, kappa_mu: f64) -> Result<Self> {
        for (name, v) in [("s_o", s_o), ("s_mu", s_mu), ("kappa_o", kappa_o), ("kappa_mu", kappa_mu)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        Ok(Self { s_o, s_mu, kappa_o, kappa_mu })
    }

    /// Symmetric case `S_o = S_μ = g`, `κ_o = κ_μ = κ`.
    pub fn symmetric(g: f64, kappa: f64) -> Result<Self> {
        Self::new(g, g, kappa, kappa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetunedParams {
    pub base: ResonantParams,
    /// Detuning of the interior mode `c`.
    pub delta_mu: f64,
}

impl DetunedParams {
    pub fn new(base: ResonantParams, delta_mu: f64) -> Result<Self> {
        if !delta_mu.is_finite() {
            return Err(Error::InvalidParameter("delta_mu must be finite".into()));
        }
        Ok(Self { base, delta_mu })
    }
}

pub fn resonant_network(p: &ResonantParams) -> CoupledModeNetwork {
    detuned_network(&DetunedParams { base: *p, delta_mu: 0.0 })
}

pub fn detuned_network(p: &DetunedParams) -> CoupledModeNetwork {
    let ResonantParams { s_o, s_mu, kappa_o, kappa_mu } = p.base;
    let a = ComplexMatrix::from_real_rows(&[
        &[0.0, s_o, 0.0],
        &[s_o, p.delta_mu, s_mu],
        &[0.0, s_mu, 0.0],
    ])
    .expect("3x3 literal");
    CoupledModeNetwork::new([OPTICAL, ATOMIC, MICROWAVE], a, vec![kappa_o, 0.0, kappa_mu])
        .expect("converter network is valid by construction")
}

/// Directly coupled resonators, `H = S a†b + h.c.`.
pub fn two_mode_network(s: f64, kappa_o: f64, kappa_mu: f64) -> Result<CoupledModeNetwork> {
    ResonantParams::new(s.abs(), 0.0, kappa_o, kappa_mu)?;
    if !s.is_finite() {
        return Err(Error::InvalidParameter("s must be finite".into()));
    }
    let a = ComplexMatrix::from_real_rows(&[&[0.0, s], &[s, 0.0]])?;
    CoupledModeNetwork::new([OPTICAL, MICROWAVE], a, vec![kappa_o, kappa_mu])
}

/// Optical and microwave ports of a converter network, looked up by label.
pub fn converter_ports(net: &CoupledModeNetwork) -> Result<(PortId, PortId)> {
    Ok((net.port(OPTICAL)?, net.port(MICROWAVE)?))
}

/// Third-order coupling `S = Σ_k Ω_k g_μ,k g_o,k* / (Δ_μ,k Δ_o,k)` left when
/// both excited levels are far detuned.
pub fn direct_coupling_strength(ens: &AtomEnsemble) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for (k, atom) in ens.atoms().iter().enumerate() {
        if atom.delta_mu == 0.0 || atom.delta_o == 0.0 {
            return Err(Error::ZeroDetuning { atom: k });
        }
        total += atom.omega_rabi * atom.g_mu * atom.g_o.conj() / (atom.delta_mu * atom.delta_o);
    }
    Ok(total)
}

/// Reflection coefficients `(r−, r+)` of the dark `(a−b)/√2` and bright
/// `(a+b)/√2` combinations in the symmetric resonant converter.
///
/// `r+` is evaluated as `((κ+2iω)ω − 4ig²)/((κ−2iω)ω + 4ig²)`, which stays
/// finite at `ω = 0`.
pub fn reflection_coefficients(omega: f64, g: f64, kappa: f64) -> Result<(Complex64, Complex64)> {
    if kappa.is_nan() || kappa <= 0.0 {
        return Err(Error::InvalidParameter(format!("kappa = {kappa} must be > 0")));
    }
    if g == 0.0 && omega == 0.0 {
        return Err(Error::Degenerate);
    }
    let up = Complex64::new(kappa, 2.0 * omega);
    let down = Complex64::new(kappa, -2.0 * omega);
    let four_g2 = Complex64::new(0.0, 4.0 * g * g);
    let r_minus = up / down;
    let r_plus = (up * omega - four_g2) / (down * omega + four_g2);
    Ok((r_minus, r_plus))
}

/// `η = ¼|r− − r+|²` for the symmetric resonant converter.
///
/// Requires `κ > 0`. At `g = ω = 0` there is no conversion path and the
/// result is 0.
pub fn efficiency_closed_form(omega: f64, g: f64, kappa: f64) -> f64 {
    match reflection_coefficients(omega, g, kappa) {
        Ok((rm, rp)) => 0.25 * (rm - rp).norm_sqr(),
        Err(Error::Degenerate) => 0.0,
        Err(_) => f64::NAN,
    }
}
