//! The six commands. Each returns the text it would write, so tests and
//! presets share the exact emitted bytes.

use qtransduce::analysis::{
    efficiency_curve, efficiency_map, high_efficiency_intervals, optimize_kappa, OptimizeOptions, ScanOptions,
};
use qtransduce::ensemble::{collective_couplings, effective_network, elimination_error};
use qtransduce::format::{linspace, sci};
use qtransduce::scattering::transmission;
use qtransduce::timedomain::{steady_state_run, write_trace_csv, SteadyStateOptions};
use qtransduce::Complex64;
use serde::Serialize;

use crate::config::{config, missing, Omega, OutputFormat, RunConfig, Setup, Window};
use crate::json::{num, render, Num};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sweep,
    Bandwidth,
    Map,
    Optimize,
    Eliminate,
    Timedomain,
}

/// Main document plus, for `timedomain`, the trace CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub trace: Option<String>,
}

impl Output {
    fn text(text: String) -> Self {
        Self { text, trace: None }
    }
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    match cmd {
        Command::Sweep => sweep(cfg).map(Output::text),
        Command::Bandwidth => bandwidth(cfg).map(Output::text),
        Command::Map => map(cfg).map(Output::text),
        Command::Optimize => optimize(cfg).map(Output::text),
        Command::Eliminate => eliminate(cfg).map(Output::text),
        Command::Timedomain => timedomain(cfg),
    }
}

fn require_window(cfg: &RunConfig) -> Result<Window, CliError> {
    cfg.omega_window()?.ok_or_else(|| missing("omega"))
}

fn singular(omega: f64) -> CliError {
    CliError::Numerical(format!("dynamical matrix singular at omega = {}", sci(omega)))
}

pub fn sweep(cfg: &RunConfig) -> Result<String, CliError> {
    cfg.check_format(OutputFormat::Csv)?;
    let setup = cfg.setup()?;
    let net = setup.network(cfg.single_kappa(&setup)?)?;
    let (a, b) = setup.ports(cfg, &net)?;
    let grid = require_window(cfg)?.grid();
    let curve = efficiency_curve(&net, a, b, &grid)?;
    let mut out = String::from("omega,eta\n");
    for (w, eta) in curve.omegas.iter().zip(&curve.etas) {
        let eta = eta.ok_or_else(|| singular(*w))?;
        out.push_str(&format!("{},{}\n", sci(*w), sci(eta)));
    }
    Ok(out)
}

#[derive(Serialize)]
struct IntervalDoc {
    lo: Num,
    hi: Num,
    width: Num,
}

#[derive(Serialize)]
struct BandwidthDoc {
    threshold: Num,
    intervals: Vec<IntervalDoc>,
    max_width: Num,
}

pub fn bandwidth(cfg: &RunConfig) -> Result<String, CliError> {
    cfg.check_format(OutputFormat::Json)?;
    let setup = cfg.setup()?;
    let threshold = cfg.threshold()?;
    let net = setup.network(cfg.single_kappa(&setup)?)?;
    let (a, b) = setup.ports(cfg, &net)?;
    let w = require_window(cfg)?;
    // the window's point count only ever refines the default scan
    let scan = ScanOptions { points: w.points.max(ScanOptions::default().points), ..Default::default() };
    let report = high_efficiency_intervals(&net, a, b, threshold, (w.min, w.max), scan)?;
    Ok(render(&BandwidthDoc {
        threshold: num(report.threshold),
        intervals: report
            .intervals
            .iter()
            .map(|i| IntervalDoc { lo: num(i.lo), hi: num(i.hi), width: num(i.width()) })
            .collect(),
        max_width: num(report.max_width),
    }))
}

fn require_kappa_range(cfg: &RunConfig) -> Result<Window, CliError> {
    if cfg.kappa.is_some() {
        return Err(config("this command takes `kappa_range`, not a single `kappa`"));
    }
    cfg.kappa_range.ok_or_else(|| missing("kappa_range"))
}

pub fn map(cfg: &RunConfig) -> Result<String, CliError> {
    cfg.check_format(OutputFormat::Csv)?;
    let setup = cfg.setup()?;
    let family = setup.family()?;
    let kappas = require_kappa_range(cfg)?.grid();
    let omegas = require_window(cfg)?.grid();
    let m = efficiency_map(family, &kappas, &omegas)?;
    let mut out = String::with_capacity(60 * kappas.len() * omegas.len() + 20);
    out.push_str("kappa,omega,eta\n");
    for (k, row) in m.kappas.iter().zip(&m.etas) {
        let ks = sci(*k);
        for (w, eta) in m.omegas.iter().zip(row) {
            let eta = eta.ok_or_else(|| {
                CliError::Numerical(format!("dynamical matrix singular at kappa = {ks}, omega = {}", sci(*w)))
            })?;
            out.push_str(&format!("{ks},{},{}\n", sci(*w), sci(eta)));
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct OptimizeDoc {
    threshold: Num,
    kappa_star: Num,
    max_width: Num,
}

pub(crate) fn optimize_options(cfg: &RunConfig, kappa_points: usize) -> Result<OptimizeOptions, CliError> {
    Ok(OptimizeOptions {
        kappa_points,
        omega_range: cfg.omega_window()?.map(|w| (w.min, w.max)),
        ..Default::default()
    })
}

pub fn optimize(cfg: &RunConfig) -> Result<String, CliError> {
    cfg.check_format(OutputFormat::Json)?;
    let setup = cfg.setup()?;
    let family = setup.family()?;
    let threshold = cfg.threshold()?;
    let range = require_kappa_range(cfg)?;
    let best = optimize_kappa(family, threshold, (range.min, range.max), optimize_options(cfg, range.points)?)?;
    Ok(render(&OptimizeDoc {
        threshold: num(threshold),
        kappa_star: num(best.kappa_star),
        max_width: num(best.width_star),
    }))
}

#[derive(Serialize)]
struct EliminateDoc {
    s_o: Num,
    s_mu: Num,
    mode_mismatch: Num,
    stark_a: Num,
    stark_c: Num,
    max_eta_error: Num,
    omega_window: [Num; 2],
}

/// Comparison window when the config gives none: `|ω| ≤ 1.5`.
pub const DEFAULT_ELIMINATION_WINDOW: Window = Window { min: -1.5, max: 1.5, points: 301 };

pub fn eliminate(cfg: &RunConfig) -> Result<String, CliError> {
    cfg.check_format(OutputFormat::Json)?;
    let setup = cfg.setup()?;
    let ens = match &setup {
        Setup::Family(qtransduce::analysis::SetupFamily::Microscopic { ensemble }) => ensemble,
        _ => return Err(config("eliminate needs setup \"microscopic\" with an `ensemble`")),
    };
    let kappa = cfg.single_kappa(&setup)?.ok_or_else(|| missing("kappa"))?;
    let w = cfg.omega_window()?.unwrap_or(DEFAULT_ELIMINATION_WINDOW);
    let c = collective_couplings(ens)?;
    for warning in effective_network(ens, kappa, kappa)?.warnings {
        log::warn!("{warning:?}");
    }
    let err = elimination_error(ens, kappa, kappa, &linspace(w.min, w.max, w.points))?;
    Ok(render(&EliminateDoc {
        s_o: num(c.s_o),
        s_mu: num(c.s_mu),
        mode_mismatch: num(c.mode_mismatch),
        stark_a: num(c.stark_a),
        stark_c: num(c.stark_c),
        max_eta_error: num(err),
        omega_window: [num(w.min), num(w.max)],
    }))
}

#[derive(Serialize)]
struct TimeDomainDoc {
    omega: Num,
    ratio_re: Num,
    ratio_im: Num,
    freq_domain_re: Num,
    freq_domain_im: Num,
    abs_error: Num,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
}

/// Trace rows are kept every this many steps unless the config says otherwise.
pub const DEFAULT_TRACE_STRIDE: usize = 10;

pub fn timedomain(cfg: &RunConfig) -> Result<Output, CliError> {
    cfg.check_format(OutputFormat::Json)?;
    let setup = cfg.setup()?;
    let net = setup.network(cfg.single_kappa(&setup)?)?;
    let (a, b) = setup.ports(cfg, &net)?;
    let omega = match cfg.omega {
        Some(Omega::Value(w)) => w,
        Some(Omega::Window(_)) => return Err(config("omega: timedomain takes a single value")),
        None => return Err(missing("omega")),
    };
    let stride = cfg.trace_stride.unwrap_or(DEFAULT_TRACE_STRIDE);
    if stride == 0 {
        return Err(config("trace_stride must be positive"));
    }
    let amplitude = cfg.amplitude.unwrap_or(1.0);
    let opts = SteadyStateOptions {
        dt: cfg.dt,
        amplitude: Complex64::new(amplitude, 0.0),
        trace_stride: cfg.trace.is_some().then_some(stride),
    };
    let run = steady_state_run(&net, omega, a, b, opts)?;
    let s = transmission(&net, omega, a, b)?;
    let trace = match &run.trace {
        Some(sim) => {
            let mut buf = Vec::new();
            write_trace_csv(&net, sim, &mut buf)?;
            Some(String::from_utf8(buf).expect("trace is ASCII"))
        }
        None => None,
    };
    let text = render(&TimeDomainDoc {
        omega: num(omega),
        ratio_re: num(run.ratio.re),
        ratio_im: num(run.ratio.im),
        freq_domain_re: num(s.re),
        freq_domain_im: num(s.im),
        abs_error: num((run.ratio - s).norm()),
        note: (amplitude == 0.0).then_some("ZeroDrive"),
    });
    Ok(Output { text, trace })
}
