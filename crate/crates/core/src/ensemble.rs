//! Linearized atom-ensemble model and its reduction to the three-mode
//! converter.
//!
//! With nearly all atoms in `|1⟩`, the coherences `σ13,k` and `σ12,k` behave
//! as bosonic amplitudes. The microscopic network therefore has `2N + 2`
//! modes: `a`, `b`, then `σ13` for every atom, then `σ12` for every atom.
//!
//! Eliminating a far-detuned `σ13,k` shifts `a` by `−Σ|g_o,k|²/Δ_o,k` and
//! `σ12,k` by `−Ω_k²/Δ_o,k`. Stark compensation retunes those diagonals by
//! the opposite amounts so that the eliminated model is resonant again.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complexlin::ComplexMatrix;
use crate::converter::{converter_ports, resonant_network, ResonantParams};
use crate::error::{Error, Result};
use crate::network::CoupledModeNetwork;
use crate::scattering::transmission;

/// Mode mismatch above which the three-mode reduction is flagged.
pub const MISMATCH_WARN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "AtomDoc", into = "AtomDoc")]
pub struct AtomParams {
    /// Optical coupling `g_o,k`.
    pub g_o: Complex64,
    /// Microwave coupling `g_μ,k`.
    pub g_mu: Complex64,
    /// Rabi frequency of the classical `|2⟩↔|3⟩` drive.
    pub omega_rabi: f64,
    pub delta_o: f64,
    pub delta_mu: f64,
}

impl AtomParams {
    pub fn new(g_o: Complex64, g_mu: Complex64, omega_rabi: f64, delta_o: f64, delta_mu: f64) -> Self {
        Self { g_o, g_mu, omega_rabi, delta_o, delta_mu }
    }

    fn is_finite(&self) -> bool {
        [
            self.g_o.re,
            self.g_o.im,
            self.g_mu.re,
            self.g_mu.im,
            self.omega_rabi,
            self.delta_o,
            self.delta_mu,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomDoc {
    g_o: [f64; 2],
    g_mu: [f64; 2],
    omega_rabi: f64,
    delta_o: f64,
    delta_mu: f64,
}

impl From<AtomDoc> for AtomParams {
    fn from(d: AtomDoc) -> Self {
        Self {
            g_o: Complex64::new(d.g_o[0], d.g_o[1]),
            g_mu: Complex64::new(d.g_mu[0], d.g_mu[1]),
            omega_rabi: d.omega_rabi,
            delta_o: d.delta_o,
            delta_mu: d.delta_mu,
        }
    }
}

impl From<AtomParams> for AtomDoc {
    fn from(a: AtomParams) -> Self {
        Self {
            g_o: [a.g_o.re, a.g_o.im],
            g_mu: [a.g_mu.re, a.g_mu.im],
            omega_rabi: a.omega_rabi,
            delta_o: a.delta_o,
            delta_mu: a.delta_mu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomEnsemble {
    atoms: Vec<AtomParams>,
}

impl AtomEnsemble {
    pub fn new(atoms: Vec<AtomParams>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if let Some(k) = atoms.iter().position(|a| !a.is_finite()) {
            return Err(Error::NonFinite(format!("atom {k}")));
        }
        Ok(Self { atoms })
    }

    /// `n` identical atoms with real couplings.
    pub fn uniform(n: usize, g_o: f64, g_mu: f64, omega_rabi: f64, delta_o: f64, delta_mu: f64) -> Result<Self> {
        let atom = AtomParams::new(g_o.into(), g_mu.into(), omega_rabi, delta_o, delta_mu);
        Self::new(vec![atom; n])
    }

    /// Sixteen resonant atoms with `S_o = S_μ = 1`, `√N g_o/Δ_o = 0.2` and
    /// `Ω/Δ_o = 0.1`.
    pub fn validation_default() -> Self {
        Self::uniform(16, 2.5, 0.25, 5.0, 50.0, 0.0).expect("valid literal")
    }

    pub fn atoms(&self) -> &[AtomParams] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: AtomEnsemble = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("ensemble JSON: {e}")))?;
        Self::new(raw.atoms)
    }

    fn check_detunings(&self) -> Result<()> {
        match self.atoms.iter().position(|a| a.delta_o == 0.0) {
            Some(atom) => Err(Error::ZeroDetuning { atom }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveCouplings {
    pub s_o: f64,
    pub s_mu: f64,
    /// `1 − |⟨v_o, v_μ⟩|² / (‖v_o‖² ‖v_μ‖²)`; 0 when either pattern vanishes.
    pub mode_mismatch: f64,
    /// Shift of the optical mode, `−Σ|g_o,k|²/Δ_o,k`.
    pub stark_a: f64,
    /// Shift of the collective mode `c`: the `|g_μ,k|²`-weighted mean of
    /// `−Ω_k²/Δ_o,k`.
    pub stark_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    HighMismatch(f64),
}

#[derive(Debug, Clone)]
pub struct EffectiveModel {
    pub network: CoupledModeNetwork,
    pub couplings: CollectiveCouplings,
    pub warnings: Vec<Warning>,
}

pub fn microscopic_network(
    ens: &AtomEnsemble,
    kappa_o: f64,
    kappa_mu: f64,
    compensate_stark: bool,
) -> Result<CoupledModeNetwork> {
    if ens.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if compensate_stark {
        ens.check_detunings()?;
    }
    let n_atoms = ens.len();
    let n = 2 * n_atoms + 2;
    let (ia, ib) = (0, 1);
    let s13 = |k: usize| 2 + k;
    let s12 = |k: usize| 2 + n_atoms + k;

    let mut a = ComplexMatrix::zeros(n, n);
    let mut shift_a = 0.0;
    for (k, atom) in ens.atoms().iter().enumerate() {
        a[(s13(k), s13(k))] = atom.delta_o.into();
        a[(s12(k), s12(k))] = atom.delta_mu.into();
        a[(ia, s13(k))] = atom.g_o;
        a[(s13(k), ia)] = atom.g_o.conj();
        a[(ib, s12(k))] = atom.g_mu;
        a[(s12(k), ib)] = atom.g_mu.conj();
        a[(s13(k), s12(k))] = atom.omega_rabi.into();
        a[(s12(k), s13(k))] = atom.omega_rabi.into();
        if compensate_stark {
            shift_a += atom.g_o.norm_sqr() / atom.delta_o;
            a[(s12(k), s12(k))] += atom.omega_rabi * atom.omega_rabi / atom.delta_o;
        }
    }
    a[(ia, ia)] = shift_a.into();

    let labels = ["a".to_owned(), "b".to_owned()]
        .into_iter()
        .chain((0..n_atoms).map(|k| format!("s13_{k}")))
        .chain((0..n_atoms).map(|k| format!("s12_{k}")));
    let mut damping = vec![0.0; n];
    damping[ia] = kappa_o;
    damping[ib] = kappa_mu;
    CoupledModeNetwork::new(labels, a, damping)
}

pub fn collective_couplings(ens: &AtomEnsemble) -> Result<CollectiveCouplings> {
    ens.check_detunings()?;
    let v_o: Vec<Complex64> = ens
        .atoms()
        .iter()
        .map(|a| a.g_o * a.omega_rabi / a.delta_o)
        .collect();
    let v_mu: Vec<Complex64> = ens.atoms().iter().map(|a| a.g_mu).collect();

    let norm2_o: f64 = v_o.iter().map(|z| z.norm_sqr()).sum();
    let norm2_mu: f64 = v_mu.iter().map(|z| z.norm_sqr()).sum();
    let overlap: Complex64 = v_mu.iter().zip(&v_o).map(|(m, o)| m.conj() * o).sum();

    let s_mu = norm2_mu.sqrt();
    let s_o = if s_mu > 0.0 { overlap.norm() / s_mu } else { 0.0 };
    let mode_mismatch = if norm2_o > 0.0 && norm2_mu > 0.0 {
        (1.0 - overlap.norm_sqr() / (norm2_o * norm2_mu)).clamp(0.0, 1.0)
    } else {
        0.0
    };

    let stark_a = -ens
        .atoms()
        .iter()
        .map(|a| a.g_o.norm_sqr() / a.delta_o)
        .sum::<f64>();
    let stark_c = if norm2_mu > 0.0 {
        -ens.atoms()
            .iter()
            .map(|a| a.g_mu.norm_sqr() * a.omega_rabi * a.omega_rabi / a.delta_o)
            .sum::<f64>()
            / norm2_mu
    } else {
        0.0
    };

    Ok(CollectiveCouplings { s_o, s_mu, mode_mismatch, stark_a, stark_c })
}

/// Three-mode resonant converter built from the ensemble's collective
/// couplings.
pub fn effective_network(ens: &AtomEnsemble, kappa_o: f64, kappa_mu: f64) -> Result<EffectiveModel> {
    let couplings = collective_couplings(ens)?;
    let params = ResonantParams::new(couplings.s_o, couplings.s_mu, kappa_o, kappa_mu)?;
    let mut warnings = Vec::new();
    if couplings.mode_mismatch > MISMATCH_WARN {
        log::warn!(
            "optical and microwave excitation patterns differ (mismatch {:.3}); three-mode model unreliable",
            couplings.mode_mismatch
        );
        warnings.push(Warning::HighMismatch(couplings.mode_mismatch));
    }
    Ok(EffectiveModel { network: resonant_network(&params), couplings, warnings })
}

fn conversion_efficiency(net: &CoupledModeNetwork, omega: f64) -> Result<f64> {
    let (a, b) = converter_ports(net)?;
    Ok(transmission(net, omega, a, b)?.norm_sqr())
}

/// Largest `|η_micro(ω) − η_eff(ω)|` over the grid, with Stark compensation
/// applied to the microscopic model.
pub fn elimination_error(
    ens: &AtomEnsemble,
    kappa_o: f64,
    kappa_mu: f64,
    omega_grid: &[f64],
) -> Result<f64> {
    // atom combinations the ports cannot see sit exactly on resonance once
    // the light shifts are compensated, so only the reachable part is kept
    let micro = microscopic_network(ens, kappa_o, kappa_mu, true)?.port_reachable();
    let effective = effective_network(ens, kappa_o, kappa_mu)?.network;
    let mut worst = 0.0_f64;
    for &w in omega_grid {
        let diff = conversion_efficiency(&micro, w)? - conversion_efficiency(&effective, w)?;
        worst = worst.max(diff.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexlin::eigenvalues_hermitian;
    use crate::format::linspace;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn orthogonal_pair() -> AtomEnsemble {
        // v_o = (1, 1)·0.1, v_μ = (1, −1)
        AtomEnsemble::new(vec![
            AtomParams::new(c(1.0, 0.0), c(1.0, 0.0), 1.0, 10.0, 0.0),
            AtomParams::new(c(1.0, 0.0), c(-1.0, 0.0), 1.0, 10.0, 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn single_atom_network_layout() {
        let ens = AtomEnsemble::new(vec![AtomParams::new(c(0.3, 0.1), c(0.2, 0.0), 0.5, 7.0, 0.4)]).unwrap();
        let net = microscopic_network(&ens, 1.0, 2.0, false).unwrap();
        assert_eq!(net.labels(), &["a", "b", "s13_0", "s12_0"]);
        let a = net.coupling();
        assert_eq!(a[(0, 2)], c(0.3, 0.1));
        assert_eq!(a[(2, 0)], c(0.3, -0.1));
        assert_eq!(a[(1, 3)], c(0.2, 0.0));
        assert_eq!(a[(2, 3)], c(0.5, 0.0));
        assert_eq!(a[(2, 2)], c(7.0, 0.0));
        assert_eq!(a[(3, 3)], c(0.4, 0.0));
        assert_eq!(a[(0, 0)], c(0.0, 0.0));
        assert_eq!(a[(0, 1)], c(0.0, 0.0));
        assert_eq!(a[(0, 3)], c(0.0, 0.0));
        assert_eq!(a[(1, 2)], c(0.0, 0.0));
        assert_eq!(net.damping(), &[1.0, 2.0, 0.0, 0.0]);

        let comp = microscopic_network(&ens, 1.0, 2.0, true).unwrap();
        assert!((comp.coupling()[(0, 0)].re - 0.1 / 7.0).abs() < 1e-15);
        assert!((comp.coupling()[(3, 3)].re - (0.4 + 0.25 / 7.0)).abs() < 1e-15);
    }

    #[test]
    fn empty_ensemble_rejected() {
        assert_eq!(AtomEnsemble::new(vec![]), Err(Error::EmptyEnsemble));
        assert_eq!(AtomEnsemble::uniform(0, 1.0, 1.0, 1.0, 1.0, 0.0), Err(Error::EmptyEnsemble));
    }

    #[test]
    fn compensated_spectrum_has_dark_state() {
        let net = microscopic_network(&AtomEnsemble::validation_default(), 2.6, 2.6, true).unwrap();
        let eig = eigenvalues_hermitian(net.coupling()).unwrap();
        let nearest = eig.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-9, "smallest |eigenvalue| {nearest}");
    }

    #[test]
    fn no_drive_means_no_conversion() {
        let ens = AtomEnsemble::uniform(4, 2.5, 0.5, 0.0, 50.0, 0.0).unwrap();
        let net = microscopic_network(&ens, 2.0, 2.0, true).unwrap().port_reachable();
        for w in linspace(-3.0, 3.0, 13) {
            assert!(conversion_efficiency(&net, w).unwrap().sqrt() <= 1e-12);
        }
        assert_eq!(
            elimination_error(&ens, 2.0, 2.0, &linspace(-1.5, 1.5, 31)).unwrap(),
            0.0
        );
    }

    #[test]
    fn uniform_collective_couplings() {
        let cc = collective_couplings(&AtomEnsemble::validation_default()).unwrap();
        assert!((cc.s_mu - 1.0).abs() < 1e-15);
        assert!((cc.s_o - 1.0).abs() < 1e-14);
        assert!(cc.mode_mismatch.abs() < 1e-14);
        assert!((cc.stark_a + 2.0).abs() < 1e-14);
        assert!((cc.stark_c + 0.5).abs() < 1e-14);

        let one = collective_couplings(&AtomEnsemble::uniform(1, 2.5, 0.25, 5.0, 50.0, 0.0).unwrap()).unwrap();
        assert!((one.s_mu - 0.25).abs() < 1e-15);
        assert!((one.s_o - 2.5 * 5.0 / 50.0).abs() < 1e-15);
    }

    #[test]
    fn sqrt_n_scaling() {
        let one = collective_couplings(&AtomEnsemble::uniform(1, 1.3, 0.7, 2.0, 20.0, 0.0).unwrap()).unwrap();
        for n in [2usize, 9, 25, 100] {
            let many =
                collective_couplings(&AtomEnsemble::uniform(n, 1.3, 0.7, 2.0, 20.0, 0.0).unwrap()).unwrap();
            let root = (n as f64).sqrt();
            assert!((many.s_mu - root * one.s_mu).abs() < 1e-13 * root);
            assert!((many.s_o - root * one.s_o).abs() < 1e-13 * root);
        }
    }

    #[test]
    fn orthogonal_patterns() {
        let cc = collective_couplings(&orthogonal_pair()).unwrap();
        assert!(cc.s_o.abs() < 1e-15);
        assert!((cc.mode_mismatch - 1.0).abs() < 1e-15);
        let model = effective_network(&orthogonal_pair(), 1.0, 1.0).unwrap();
        assert_eq!(model.network.coupling()[(0, 1)], c(0.0, 0.0));
        assert!(matches!(model.warnings.as_slice(), [Warning::HighMismatch(m)] if (m - 1.0).abs() < 1e-15));
    }

    #[test]
    fn zero_detuning_reported() {
        let ens = AtomEnsemble::new(vec![
            AtomParams::new(c(1.0, 0.0), c(1.0, 0.0), 1.0, 10.0, 0.0),
            AtomParams::new(c(1.0, 0.0), c(1.0, 0.0), 1.0, 0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(collective_couplings(&ens), Err(Error::ZeroDetuning { atom: 1 }));
        assert!(microscopic_network(&ens, 1.0, 1.0, false).is_ok());
        assert!(microscopic_network(&ens, 1.0, 1.0, true).is_err());
    }

    #[test]
    fn effective_default_network() {
        let model = effective_network(&AtomEnsemble::validation_default(), 2.6, 2.6).unwrap();
        assert!(model.warnings.is_empty());
        let a = model.network.coupling();
        assert!((a[(0, 1)].re - 1.0).abs() < 1e-14 && (a[(1, 2)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn stark_compensation_restores_center() {
        let ens = AtomEnsemble::validation_default();
        let with = conversion_efficiency(&microscopic_network(&ens, 2.6, 2.6, true).unwrap().port_reachable(), 0.0).unwrap();
        let without = conversion_efficiency(&microscopic_network(&ens, 2.6, 2.6, false).unwrap().port_reachable(), 0.0).unwrap();
        assert!(with >= without);
        assert!((with - 1.0).abs() < 1e-9);
    }

    #[test]
    fn json_schema() {
        let text = r#"{"atoms": [{"g_o": [2.5, 0.0], "g_mu": [0.25, 0.0], "omega_rabi": 5.0, "delta_o": 50.0, "delta_mu": 0.0}]}"#;
        let ens = AtomEnsemble::from_json(text).unwrap();
        assert_eq!(ens.atoms()[0].g_o, c(2.5, 0.0));
        let back = serde_json::to_string(&ens).unwrap();
        assert_eq!(AtomEnsemble::from_json(&back).unwrap(), ens);
        assert!(AtomEnsemble::from_json(r#"{"atoms": []}"#).is_err());
        assert!(AtomEnsemble::from_json(r#"{"atoms": [{"g_o": [1.0]}]}"#).is_err());
    }
}
