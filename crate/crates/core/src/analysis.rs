//! Efficiency curves and maps, high-efficiency interval extraction, and
//! bandwidth optimization over the resonator damping rate.

use rayon::prelude::*;

use crate::converter::{
    converter_ports, detuned_network, resonant_network, two_mode_network, DetunedParams, ResonantParams,
};
use crate::ensemble::{microscopic_network, AtomEnsemble};
use crate::error::{Error, Result};
use crate::format::linspace;
use crate::network::{CoupledModeNetwork, PortId};
use crate::scattering::transmission;

/// Dense scan followed by bisection of each threshold crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub points: usize,
    /// Target `|η(endpoint) − threshold|`.
    pub eta_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { points: 4001, eta_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyCurve {
    pub omegas: Vec<f64>,
    /// `None` marks a frequency where the dynamical matrix is singular.
    pub etas: Vec<Option<f64>>,
    pub in_port: PortId,
    pub out_port: PortId,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthReport {
    pub threshold: f64,
    pub intervals: Vec<Interval>,
    pub max_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyMap {
    pub kappas: Vec<f64>,
    pub omegas: Vec<f64>,
    /// One row per κ, one column per ω.
    pub etas: Vec<Vec<Option<f64>>>,
}

/// A converter model parameterized by a common damping `κ_o = κ_μ = κ`.
#[derive(Debug, Clone, PartialEq)]
pub enum SetupFamily {
    Resonant { g: f64 },
    Detuned { g: f64, delta_mu: f64 },
    TwoMode { s: f64 },
    Microscopic { ensemble: AtomEnsemble },
}

impl SetupFamily {
    pub fn network(&self, kappa: f64) -> Result<CoupledModeNetwork> {
        match self {
            Self::Resonant { g } => Ok(resonant_network(&ResonantParams::symmetric(*g, kappa)?)),
            Self::Detuned { g, delta_mu } => Ok(detuned_network(&DetunedParams::new(
                ResonantParams::symmetric(*g, kappa)?,
                *delta_mu,
            )?)),
            Self::TwoMode { s } => two_mode_network(*s, kappa, kappa),
            Self::Microscopic { ensemble } => {
                Ok(microscopic_network(ensemble, kappa, kappa, true)?.port_reachable())
            }
        }
    }

    /// Optical input, microwave output.
    pub fn ports(&self, net: &CoupledModeNetwork) -> Result<(PortId, PortId)> {
        converter_ports(net)
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("grid".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("grid must be strictly ascending".into()));
    }
    Ok(())
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("threshold {threshold} must lie in (0, 1)")))
    }
}

fn check_range((lo, hi): (f64, f64)) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo <= hi {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("range [{lo}, {hi}] must be finite and ordered")))
    }
}

/// `|S_out,in(ω)|²`, or `None` at a singular frequency.
fn efficiency_at(net: &CoupledModeNetwork, in_port: PortId, out_port: PortId, omega: f64) -> Result<Option<f64>> {
    match transmission(net, omega, in_port, out_port) {
        Ok(t) => Ok(Some(t.norm_sqr())),
        Err(Error::SingularAtFrequency { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn efficiency_curve(
    net: &CoupledModeNetwork,
    in_port: PortId,
    out_port: PortId,
    omega_grid: &[f64],
) -> Result<EfficiencyCurve> {
    net.check_port(in_port)?;
    net.check_port(out_port)?;
    check_grid(omega_grid)?;
    let etas = omega_grid
        .iter()
        .map(|&w| {
            let eta = efficiency_at(net, in_port, out_port, w)?;
            if eta.is_none() {
                log::warn!("singular dynamical matrix at omega = {w}; point left as a gap");
            }
            Ok(eta)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EfficiencyCurve { omegas: omega_grid.to_vec(), etas, in_port, out_port })
}

#[derive(Clone, Copy, PartialEq)]
enum Level {
    Above,
    Below,
    Gap,
}

/// Maximal intervals of `range` on which `eta ≥ threshold`.
///
/// Works on any efficiency function; a `None` value is a singular point.
/// Single gap points flanked by qualifying points are bridged.
pub fn threshold_intervals<F>(eta: F, threshold: f64, range: (f64, f64), opts: ScanOptions) -> BandwidthReport
where
    F: Fn(f64) -> Option<f64>,
{
    let grid = linspace(range.0, range.1, opts.points.max(2));
    let level = |v: Option<f64>| match v {
        Some(e) if e >= threshold => Level::Above,
        Some(_) => Level::Below,
        None => Level::Gap,
    };
    let mut levels: Vec<Level> = grid.iter().map(|&w| level(eta(w))).collect();
    let n = levels.len();
    let mut gaps = 0;
    for i in 0..n {
        if levels[i] == Level::Gap {
            gaps += 1;
            let bridged = i > 0 && i + 1 < n && levels[i - 1] == Level::Above && levels[i + 1] == Level::Above;
            levels[i] = if bridged { Level::Above } else { Level::Below };
        }
    }
    if gaps > 0 {
        log::warn!("{gaps} singular frequencies excluded from the interval scan");
    }

    let refine = |mut below: f64, mut above: f64| -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (below + above);
            if mid == below || mid == above {
                break;
            }
            match eta(mid) {
                Some(e) if (e - threshold).abs() <= opts.eta_tol => return mid,
                Some(e) if e >= threshold => above = mid,
                _ => below = mid,
            }
        }
        above
    };

    let mut intervals = Vec::new();
    let mut i = 0;
    while i < n {
        if levels[i] != Level::Above {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && levels[i + 1] == Level::Above {
            i += 1;
        }
        let end = i;
        let lo = if start == 0 { grid[0] } else { refine(grid[start - 1], grid[start]) };
        let hi = if end == n - 1 { grid[n - 1] } else { refine(grid[end + 1], grid[end]) };
        intervals.push(Interval { lo, hi });
        i += 1;
    }

    let max_width = intervals.iter().map(Interval::width).fold(0.0, f64::max);
    BandwidthReport { threshold, intervals, max_width }
}

pub fn high_efficiency_intervals(
    net: &CoupledModeNetwork,
    in_port: PortId,
    out_port: PortId,
    threshold: f64,
    omega_range: (f64, f64),
    opts: ScanOptions,
) -> Result<BandwidthReport> {
    check_threshold(threshold)?;
    check_range(omega_range)?;
    net.check_port(in_port)?;
    net.check_port(out_port)?;
    Ok(threshold_intervals(
        |w| efficiency_at(net, in_port, out_port, w).ok().flatten(),
        threshold,
        omega_range,
        opts,
    ))
}

pub fn max_bandwidth(
    net: &CoupledModeNetwork,
    in_port: PortId,
    out_port: PortId,
    threshold: f64,
    omega_range: (f64, f64),
    opts: ScanOptions,
) -> Result<f64> {
    Ok(high_efficiency_intervals(net, in_port, out_port, threshold, omega_range, opts)?.max_width)
}

pub fn branch_count(
    net: &CoupledModeNetwork,
    in_port: PortId,
    out_port: PortId,
    threshold: f64,
    omega_range: (f64, f64),
    opts: ScanOptions,
) -> Result<usize> {
    Ok(high_efficiency_intervals(net, in_port, out_port, threshold, omega_range, opts)?
        .intervals
        .len())
}

/// Optical-to-microwave efficiency over a (κ, ω) grid. Rows are computed in
/// parallel; ordering follows the grids.
pub fn efficiency_map(family: &SetupFamily, kappa_grid: &[f64], omega_grid: &[f64]) -> Result<EfficiencyMap> {
    check_grid(kappa_grid)?;
    check_grid(omega_grid)?;
    let etas = kappa_grid
        .par_iter()
        .map(|&kappa| {
            let net = family.network(kappa)?;
            let (a, b) = family.ports(&net)?;
            Ok(efficiency_curve(&net, a, b, omega_grid)?.etas)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EfficiencyMap { kappas: kappa_grid.to_vec(), omegas: omega_grid.to_vec(), etas })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    pub kappa_points: usize,
    /// Frequency window for the bandwidth scans; chosen from the network
    /// scale when `None`.
    pub omega_range: Option<(f64, f64)>,
    pub scan: ScanOptions,
    /// Stop golden-section refinement once the κ bracket is this narrow.
    pub kappa_tol: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { kappa_points: 201, omega_range: None, scan: ScanOptions::default(), kappa_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaOptimum {
    pub kappa_star: f64,
    pub width_star: f64,
}

/// Symmetric window `[−W, W]` wide enough to hold every branch for κ up to
/// `kappa_max`: `W = ‖A‖∞ + 2κ_max + 1`.
pub fn auto_omega_range(family: &SetupFamily, kappa_max: f64) -> Result<(f64, f64)> {
    let net = family.network(kappa_max)?;
    let w = net.coupling().norm_inf() + 2.0 * kappa_max + 1.0;
    Ok((-w, w))
}

fn family_bandwidth(
    family: &SetupFamily,
    kappa: f64,
    threshold: f64,
    omega_range: (f64, f64),
    scan: ScanOptions,
) -> Result<f64> {
    let net = family.network(kappa)?;
    let (a, b) = family.ports(&net)?;
    max_bandwidth(&net, a, b, threshold, omega_range, scan)
}

/// Maximum high-efficiency width for each κ of the grid.
pub fn bandwidth_vs_kappa(
    family: &SetupFamily,
    threshold: f64,
    kappa_grid: &[f64],
    omega_range: (f64, f64),
    scan: ScanOptions,
) -> Result<Vec<f64>> {
    check_threshold(threshold)?;
    check_range(omega_range)?;
    kappa_grid
        .par_iter()
        .map(|&k| family_bandwidth(family, k, threshold, omega_range, scan))
        .collect()
}

/// Coarse κ grid, then golden-section refinement around the best grid
/// point. No unimodality is assumed beyond the refinement bracket.
pub fn optimize_kappa(
    family: &SetupFamily,
    threshold: f64,
    kappa_range: (f64, f64),
    opts: OptimizeOptions,
) -> Result<KappaOptimum> {
    check_threshold(threshold)?;
    check_range(kappa_range)?;
    let (k_lo, k_hi) = kappa_range;
    if k_lo <= 0.0 {
        return Err(Error::InvalidParameter("kappa range must be positive".into()));
    }
    let omega_range = match opts.omega_range {
        Some(r) => r,
        None => auto_omega_range(family, k_hi)?,
    };
    let width = |k: f64| family_bandwidth(family, k, threshold, omega_range, opts.scan);

    if k_lo == k_hi {
        return Ok(KappaOptimum { kappa_star: k_lo, width_star: width(k_lo)? });
    }

    let grid = linspace(k_lo, k_hi, opts.kappa_points.max(2));
    let widths = bandwidth_vs_kappa(family, threshold, &grid, omega_range, opts.scan)?;
    // first maximum wins, so ties resolve deterministically
    let best = widths
        .iter()
        .enumerate()
        .fold(0, |b, (i, &w)| if w > widths[b] { i } else { b });
    let mut best_k = grid[best];
    let mut best_w = widths[best];

    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = width(x1)?;
    let mut f2 = width(x2)?;
    while b - a > opts.kappa_tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = width(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = width(x2)?;
        }
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f > best_w {
                best_w = f;
                best_k = x;
            }
        }
    }
    Ok(KappaOptimum { kappa_star: best_k, width_star: best_w })
}
