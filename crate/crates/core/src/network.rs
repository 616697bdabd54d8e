//! Coupled-mode networks: a Hermitian coupling matrix `A` plus per-mode
//! damping rates (the diagonal of `K`).
//!
//! A mode with zero damping is interior: it has no input/output channel.
//! Damped modes are ports.

use std::collections::HashSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complexlin::ComplexMatrix;
use crate::error::{Error, Result};

/// Relative Hermiticity tolerance; asymmetry below it is symmetrized away.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Index of a damped mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortId(pub usize);

impl PortId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledModeNetwork {
    labels: Vec<String>,
    coupling: ComplexMatrix,
    damping: Vec<f64>,
}

impl CoupledModeNetwork {
    pub fn new<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        coupling: ComplexMatrix,
        damping: Vec<f64>,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        if coupling.rows() != n || coupling.cols() != n || damping.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} labels, {}x{} coupling, {} damping rates",
                coupling.rows(),
                coupling.cols(),
                damping.len()
            )));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        for (mode, &k) in damping.iter().enumerate() {
            if !k.is_finite() {
                return Err(Error::NonFinite(format!("damping of mode {mode}")));
            }
            if k < 0.0 {
                return Err(Error::NegativeDamping { mode, value: k });
            }
        }
        let norm = coupling.max_abs();
        let defect = coupling.hermitian_defect();
        if defect > HERMITIAN_TOL * norm {
            return Err(Error::NotHermitian { defect, norm });
        }
        let coupling = if defect > 0.0 {
            let adj = coupling.adjoint();
            let sum: Vec<Complex64> = coupling
                .as_slice()
                .iter()
                .zip(adj.as_slice())
                .map(|(a, b)| (a + b) * 0.5)
                .collect();
            ComplexMatrix::from_vec(n, n, sum)?
        } else {
            coupling
        };
        Ok(Self { labels, coupling, damping })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Coupling matrix `A`.
    pub fn coupling(&self) -> &ComplexMatrix {
        &self.coupling
    }

    /// Damping rates, the diagonal of `K`.
    pub fn damping(&self) -> &[f64] {
        &self.damping
    }

    pub fn mode_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Damped modes, in mode order.
    pub fn ports(&self) -> Vec<PortId> {
        self.damping
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0.0)
            .map(|(i, _)| PortId(i))
            .collect()
    }

    /// Looks up a port by mode label.
    pub fn port(&self, label: &str) -> Result<PortId> {
        let i = self
            .mode_index(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_owned()))?;
        self.check_port(PortId(i))
    }

    pub fn check_port(&self, port: PortId) -> Result<PortId> {
        match self.damping.get(port.0) {
            Some(&k) if k > 0.0 => Ok(port),
            _ => Err(Error::InvalidPort(port.0)),
        }
    }

    /// Largest rate in the network: max over `|A_ij|` and `κ_i`.
    pub fn max_rate(&self) -> f64 {
        self.damping
            .iter()
            .copied()
            .fold(self.coupling.max_abs(), f64::max)
    }

    /// The part of the network the ports can reach: the Krylov space of `A`
    /// started from the port modes. Port modes keep their labels and come
    /// first, interior directions are labelled `k0`, `k1`, ... Modes outside
    /// this space never affect the port scattering matrix, but their
    /// resonances make `M` singular, so scattering on the reduced network
    /// stays defined where the full one may not.
    pub fn port_reachable(&self) -> Self {
        let n = self.len();
        let ports = self.ports();
        let tol = 1e-10 * self.coupling.norm_inf().max(f64::MIN_POSITIVE);
        let mut basis: Vec<Vec<Complex64>> = ports
            .iter()
            .map(|p| {
                let mut v = vec![Complex64::new(0.0, 0.0); n];
                v[p.0] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        let mut next = 0;
        while next < basis.len() && basis.len() < n {
            let mut w = self.coupling.mul_vec(&basis[next]);
            next += 1;
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for q in &basis {
                    let proj: Complex64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= proj * qi;
                    }
                }
            }
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > tol {
                basis.push(w.into_iter().map(|z| z / norm).collect());
            }
        }
        if basis.len() == n {
            return self.clone();
        }

        let m = basis.len();
        let images: Vec<Vec<Complex64>> = basis.iter().map(|q| self.coupling.mul_vec(q)).collect();
        let mut reduced = ComplexMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                reduced[(i, j)] = basis[i].iter().zip(&images[j]).map(|(a, b)| a.conj() * b).sum();
            }
        }
        for i in 0..m {
            reduced[(i, i)] = Complex64::new(reduced[(i, i)].re, 0.0);
            for j in 0..i {
                let v = (reduced[(i, j)] + reduced[(j, i)].conj()) * 0.5;
                reduced[(i, j)] = v;
                reduced[(j, i)] = v.conj();
            }
        }
        let mut labels: Vec<String> = ports.iter().map(|p| self.labels[p.0].clone()).collect();
        let mut damping: Vec<f64> = ports.iter().map(|p| self.damping[p.0]).collect();
        for j in 0..m - ports.len() {
            let mut label = format!("k{j}");
            while labels.contains(&label) {
                label.insert(0, '_');
            }
            labels.push(label);
            damping.push(0.0);
        }
        Self { labels, coupling: reduced, damping }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&NetworkDoc::from(self)).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkDoc = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("network JSON: {e}")))?;
        doc.try_into()
    }
}

/// JSON form of a network: real and imaginary coupling parts as separate
/// nested arrays.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub labels: Vec<String>,
    pub coupling_re: Vec<Vec<f64>>,
    pub coupling_im: Vec<Vec<f64>>,
    pub damping: Vec<f64>,
}

impl From<&CoupledModeNetwork> for NetworkDoc {
    fn from(net: &CoupledModeNetwork) -> Self {
        let n = net.len();
        let part = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| net.coupling.row(i).iter().map(f).collect())
                .collect()
        };
        Self {
            labels: net.labels.clone(),
            coupling_re: part(|z| z.re),
            coupling_im: part(|z| z.im),
            damping: net.damping.clone(),
        }
    }
}

impl TryFrom<NetworkDoc> for CoupledModeNetwork {
    type Error = Error;

    fn try_from(doc: NetworkDoc) -> Result<Self> {
        let n = doc.labels.len();
        let shape_ok = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if !shape_ok(&doc.coupling_re) || !shape_ok(&doc.coupling_im) {
            return Err(Error::DimensionMismatch(format!(
                "coupling_re/coupling_im must be {n}x{n}"
            )));
        }
        let entries = doc
            .coupling_re
            .iter()
            .flatten()
            .zip(doc.coupling_im.iter().flatten())
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        let coupling = ComplexMatrix::from_vec(n, n, entries)?;
        CoupledModeNetwork::new(doc.labels, coupling, doc.damping)
    }
}
