//! Fixed-step RK4 integration of `dā/dt = −iAā − (K/2)ā − √K ā_in` for
//! classical coherent drives, used to cross-check the frequency-domain
//! engine.

use std::io::{self, Write};

use num_complex::Complex64;

use crate::complexlin::ComplexMatrix;
use crate::error::{Error, Result};
use crate::format::sci;
use crate::network::{CoupledModeNetwork, PortId};

/// `dt` must not exceed this many inverse max-rates.
pub const MAX_STEP_FACTOR: f64 = 0.01;
/// Default step, in inverse max-rates.
pub const DEFAULT_STEP_FACTOR: f64 = 0.005;
/// Ramp length in units of `1/κ_min`.
pub const RAMP_FACTOR: f64 = 20.0;
/// Settling time after the ramp, in units of `1/κ_min`.
pub const SETTLE_FACTOR: f64 = 40.0;
/// Allowed drift of the instantaneous ratio over the final 10% of a run.
pub const DRIFT_TOL: f64 = 1e-4;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    /// `amplitude · env(t) · e^{−iωt}`, where `env` is a half-Gaussian rising
    /// to 1 at `t = ramp` (σ = ramp/4) and constant afterwards.
    Tone { amplitude: Complex64, omega: f64, ramp: f64 },
    /// Samples at `t = k·dt`, linearly interpolated in between.
    Sampled { dt: f64, samples: Vec<Complex64> },
}

impl Waveform {
    pub fn value(&self, t: f64) -> Complex64 {
        match self {
            Self::Tone { amplitude, omega, ramp } => {
                let env = if t < *ramp {
                    let sigma = ramp / 4.0;
                    (-(t - ramp).powi(2) / (2.0 * sigma * sigma)).exp()
                } else {
                    1.0
                };
                amplitude * env * Complex64::from_polar(1.0, -omega * t)
            }
            Self::Sampled { dt, samples } => {
                let x = t / dt;
                let k = x.floor();
                let i = k as usize;
                match (samples.get(i), samples.get(i + 1)) {
                    (Some(&a), Some(&b)) => a + (b - a) * (x - k),
                    (Some(&a), None) => a,
                    _ => ZERO,
                }
            }
        }
    }

    fn covers(&self, t_max: f64) -> bool {
        match self {
            Self::Tone { .. } => true,
            Self::Sampled { dt, samples } => {
                *dt > 0.0 && !samples.is_empty() && (samples.len() - 1) as f64 * dt >= t_max * (1.0 - 1e-12)
            }
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Self::Tone { amplitude, omega, ramp } => {
                amplitude.re.is_finite() && amplitude.im.is_finite() && omega.is_finite() && ramp.is_finite()
            }
            Self::Sampled { dt, samples } => dt.is_finite() && samples.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        }
    }
}

/// Input field `ā_in` applied at one port.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSignal {
    pub port: PortId,
    pub waveform: Waveform,
}

/// Trajectory of an integration. `mode_amplitudes[step][mode]`,
/// `outputs[step][slot]` with slots following `ports`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub times: Vec<f64>,
    pub ports: Vec<PortId>,
    pub mode_amplitudes: Vec<Vec<Complex64>>,
    pub outputs: Vec<Vec<Complex64>>,
}

/// One integration step as seen by an observer.
pub struct Sample<'a> {
    pub step: usize,
    pub time: f64,
    pub amplitudes: &'a [Complex64],
    /// Drive per port slot.
    pub inputs: &'a [Complex64],
    /// `−√κ a − a_in` per port slot.
    pub outputs: &'a [Complex64],
}

pub fn step_limit(net: &CoupledModeNetwork) -> f64 {
    let rate = net.max_rate();
    if rate > 0.0 {
        MAX_STEP_FACTOR / rate
    } else {
        f64::INFINITY
    }
}

pub fn default_step(net: &CoupledModeNetwork) -> f64 {
    let rate = net.max_rate();
    if rate > 0.0 {
        DEFAULT_STEP_FACTOR / rate
    } else {
        1e-3
    }
}

fn step_count(t_max: f64, dt: f64) -> usize {
    let s = t_max / dt;
    if (s - s.round()).abs() < 1e-9 {
        s.round() as usize
    } else {
        s.ceil() as usize
    }
}

/// Integrates and streams every step (including `t = 0`) to `observe`.
pub fn integrate_with<F>(
    net: &CoupledModeNetwork,
    drives: &[DriveSignal],
    t_max: f64,
    dt: f64,
    initial: &[Complex64],
    mut observe: F,
) -> Result<()>
where
    F: FnMut(&Sample<'_>),
{
    let n = net.len();
    if dt.is_nan() || dt <= 0.0 || !dt.is_finite() || !t_max.is_finite() || t_max < 0.0 {
        return Err(Error::InvalidParameter(format!("need dt > 0 and t_max >= 0, got {dt}, {t_max}")));
    }
    let limit = step_limit(net);
    if dt > limit {
        return Err(Error::StepTooLarge { dt, limit });
    }
    if initial.len() != n {
        return Err(Error::DimensionMismatch(format!("{} initial amplitudes for {n} modes", initial.len())));
    }
    let ports = net.ports();
    let mut drive_slots = Vec::with_capacity(drives.len());
    for d in drives {
        net.check_port(d.port)?;
        if !d.waveform.is_finite() {
            return Err(Error::NonFinite("drive".into()));
        }
        if !d.waveform.covers(t_max) {
            return Err(Error::InvalidParameter("drive samples do not cover [0, t_max]".into()));
        }
        let slot = ports.iter().position(|&p| p == d.port).expect("checked port");
        drive_slots.push(slot);
    }

    // G = −iA − K/2
    let mut g = net.coupling().scale(Complex64::new(0.0, -1.0));
    for i in 0..n {
        g[(i, i)] -= 0.5 * net.damping()[i];
    }
    let sqrt_k: Vec<f64> = ports.iter().map(|p| net.damping()[p.0].sqrt()).collect();

    let inputs_at = |t: f64, buf: &mut Vec<Complex64>| {
        buf.clear();
        buf.resize(ports.len(), ZERO);
        for (d, &slot) in drives.iter().zip(&drive_slots) {
            buf[slot] += d.waveform.value(t);
        }
    };
    let deriv = |x: &[Complex64], u: &[Complex64], out: &mut [Complex64]| {
        mat_vec(&g, x, out);
        for ((p, &sk), &ui) in ports.iter().zip(&sqrt_k).zip(u) {
            out[p.0] -= sk * ui;
        }
    };

    let steps = step_count(t_max, dt);
    let mut x = initial.to_vec();
    let mut u = Vec::new();
    let mut outs = vec![ZERO; ports.len()];
    let (mut k1, mut k2, mut k3, mut k4) = (vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]);
    let mut tmp = vec![ZERO; n];

    let emit = |step: usize, t: f64, x: &[Complex64], u: &[Complex64], outs: &mut Vec<Complex64>, observe: &mut F| {
        for (slot, p) in ports.iter().enumerate() {
            outs[slot] = -sqrt_k[slot] * x[p.0] - u[slot];
        }
        observe(&Sample { step, time: t, amplitudes: x, inputs: u, outputs: outs });
    };

    inputs_at(0.0, &mut u);
    emit(0, 0.0, &x, &u, &mut outs, &mut observe);
    let mut u_mid = Vec::new();
    let mut u_end = Vec::new();
    for step in 1..=steps {
        let t0 = (step - 1) as f64 * dt;
        inputs_at(t0, &mut u);
        inputs_at(t0 + 0.5 * dt, &mut u_mid);
        inputs_at(t0 + dt, &mut u_end);

        deriv(&x, &u, &mut k1);
        axpy(&x, 0.5 * dt, &k1, &mut tmp);
        deriv(&tmp, &u_mid, &mut k2);
        axpy(&x, 0.5 * dt, &k2, &mut tmp);
        deriv(&tmp, &u_mid, &mut k3);
        axpy(&x, dt, &k3, &mut tmp);
        deriv(&tmp, &u_end, &mut k4);
        for i in 0..n {
            x[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
        }
        emit(step, step as f64 * dt, &x, &u_end, &mut outs, &mut observe);
    }
    Ok(())
}

fn mat_vec(m: &ComplexMatrix, x: &[Complex64], out: &mut [Complex64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = m.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

fn axpy(x: &[Complex64], h: f64, k: &[Complex64], out: &mut [Complex64]) {
    for ((o, xi), ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + ki * h;
    }
}

/// Integrates and records every step.
pub fn integrate(
    net: &CoupledModeNetwork,
    drives: &[DriveSignal],
    t_max: f64,
    dt: f64,
    initial: &[Complex64],
) -> Result<SimResult> {
    let mut sim = SimResult {
        times: Vec::new(),
        ports: net.ports(),
        mode_amplitudes: Vec::new(),
        outputs: Vec::new(),
    };
    integrate_with(net, drives, t_max, dt, initial, |s| {
        sim.times.push(s.time);
        sim.mode_amplitudes.push(s.amplitudes.to_vec());
        sim.outputs.push(s.outputs.to_vec());
    })?;
    Ok(sim)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateOptions {
    /// Defaults to `0.005 / max-rate`.
    pub dt: Option<f64>,
    pub amplitude: Complex64,
    /// Record every n-th step into the returned trace; no trace when `None`.
    pub trace_stride: Option<usize>,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self { dt: None, amplitude: Complex64::new(1.0, 0.0), trace_stride: None }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyStateRun {
    /// Demodulated `out/drive`; zero when the drive amplitude is zero.
    pub ratio: Complex64,
    /// Largest deviation of the instantaneous ratio from its final value over
    /// the last 10% of the run.
    pub drift: f64,
    pub t_end: f64,
    pub dt: f64,
    pub trace: Option<SimResult>,
}

/// Drives `in_port` with a ramped tone at `omega` and demodulates the
/// late-time output at `out_port`.
pub fn steady_state_run(
    net: &CoupledModeNetwork,
    omega: f64,
    in_port: PortId,
    out_port: PortId,
    opts: SteadyStateOptions,
) -> Result<SteadyStateRun> {
    net.check_port(in_port)?;
    net.check_port(out_port)?;
    if !omega.is_finite() {
        return Err(Error::NonFinite("omega".into()));
    }
    let ports = net.ports();
    let kappa_min = ports
        .iter()
        .map(|p| net.damping()[p.0])
        .fold(f64::INFINITY, f64::min);
    let ramp = RAMP_FACTOR / kappa_min;
    let t_end = ramp + SETTLE_FACTOR / kappa_min;
    let dt = opts.dt.unwrap_or_else(|| default_step(net));
    let out_slot = ports.iter().position(|&p| p == out_port).expect("checked port");

    let drive = DriveSignal {
        port: in_port,
        waveform: Waveform::Tone { amplitude: opts.amplitude, omega, ramp },
    };
    let zero_drive = opts.amplitude == ZERO;
    // window edges sit on the step grid so the trapezoid rule sees the same
    // interval for every dt
    let steps = step_count(t_end, dt);
    let demod_first = ((0.75 * steps as f64).round() as usize).min(steps);
    let drift_first = ((0.9 * steps as f64).round() as usize).min(steps);

    let mut acc = ZERO;
    let mut weight = 0.0;
    let mut recent: Vec<Complex64> = Vec::new();
    let mut trace = opts.trace_stride.map(|_| SimResult {
        times: Vec::new(),
        ports: ports.clone(),
        mode_amplitudes: Vec::new(),
        outputs: Vec::new(),
    });
    let stride = opts.trace_stride.unwrap_or(1).max(1);

    integrate_with(net, &[drive], t_end, dt, &vec![ZERO; net.len()], |s| {
        if let Some(tr) = trace.as_mut() {
            if s.step % stride == 0 {
                tr.times.push(s.time);
                tr.mode_amplitudes.push(s.amplitudes.to_vec());
                tr.outputs.push(s.outputs.to_vec());
            }
        }
        if zero_drive {
            return;
        }
        let r = s.outputs[out_slot] * Complex64::from_polar(1.0, omega * s.time) / opts.amplitude;
        if s.step >= demod_first {
            let w = if s.step == demod_first || s.step == steps { 0.5 } else { 1.0 };
            acc += r * w;
            weight += w;
        }
        if s.step >= drift_first {
            recent.push(r);
        }
    })?;

    if zero_drive {
        return Ok(SteadyStateRun { ratio: ZERO, drift: 0.0, t_end, dt, trace });
    }
    let ratio = if weight > 0.0 { acc / weight } else { recent.last().copied().unwrap_or(ZERO) };
    let last = recent.last().copied().unwrap_or(ratio);
    let drift = recent.iter().map(|r| (r - last).norm()).fold(0.0, f64::max);
    if drift > DRIFT_TOL {
        return Err(Error::NonConvergent { drift });
    }
    Ok(SteadyStateRun { ratio, drift, t_end, dt, trace })
}

/// Time-domain estimate of `S[out_port, in_port](ω)`.
pub fn steady_state_transmission(
    net: &CoupledModeNetwork,
    omega: f64,
    in_port: PortId,
    out_port: PortId,
) -> Result<Complex64> {
    Ok(steady_state_run(net, omega, in_port, out_port, SteadyStateOptions::default())?.ratio)
}

/// Writes a trace as CSV: `time`, then `<mode>_re,<mode>_im` per mode, then
/// `out_<port>_re,out_<port>_im` per port.
pub fn write_trace_csv<W: Write>(net: &CoupledModeNetwork, sim: &SimResult, mut w: W) -> io::Result<()> {
    let mut header = vec!["time".to_owned()];
    for l in net.labels() {
        header.push(format!("{l}_re"));
        header.push(format!("{l}_im"));
    }
    for p in &sim.ports {
        let l = &net.labels()[p.0];
        header.push(format!("out_{l}_re"));
        header.push(format!("out_{l}_im"));
    }
    writeln!(w, "{}", header.join(","))?;
    for ((t, amps), outs) in sim.times.iter().zip(&sim.mode_amplitudes).zip(&sim.outputs) {
        let mut row = vec![sci(*t)];
        for z in amps.iter().chain(outs) {
            row.push(sci(z.re));
            row.push(sci(z.im));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::converter::{converter_ports, resonant_network, ResonantParams};
    use crate::scattering::transmission;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single(kappa: f64) -> CoupledModeNetwork {
        CoupledModeNetwork::new(["a"], ComplexMatrix::zeros(1, 1), vec![kappa]).unwrap()
    }

    #[test]
    fn zero_state_stays_zero() {
        let net = resonant_network(&ResonantParams::symmetric(1.0, 2.0).unwrap());
        let sim = integrate(&net, &[], 1.0, 0.001, &[ZERO; 3]).unwrap();
        assert_eq!(sim.times.len(), 1001);
        assert!(sim.outputs.iter().flatten().all(|z| *z == ZERO));
    }

    #[test]
    fn free_decay() {
        let kappa = 1.7;
        let net = single(kappa);
        let t_max = 5.0 / kappa;
        let sim = integrate(&net, &[], t_max, default_step(&net), &[c(1.0, 0.0)]).unwrap();
        let end = sim.mode_amplitudes.last().unwrap()[0].norm();
        assert!((sim.times.last().unwrap() - t_max).abs() < 1e-12);
        assert!((end - (-kappa * t_max / 2.0).exp()).abs() < 1e-8);
        // output follows −√κ a
        let out = sim.outputs.last().unwrap()[0];
        assert!((out + kappa.sqrt() * sim.mode_amplitudes.last().unwrap()[0]).norm() < 1e-15);
    }

    #[test]
    fn step_limit_enforced() {
        let net = single(2.0);
        assert!(matches!(
            integrate(&net, &[], 1.0, 0.01, &[ZERO]),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(integrate(&net, &[], 1.0, 0.005, &[ZERO]).is_ok());
    }

    #[test]
    fn sampled_drive_must_cover_run() {
        let net = single(1.0);
        let drive = DriveSignal {
            port: PortId(0),
            waveform: Waveform::Sampled { dt: 0.001, samples: vec![c(1.0, 0.0); 11] },
        };
        assert!(integrate(&net, std::slice::from_ref(&drive), 0.01, 0.001, &[ZERO]).is_ok());
        assert!(integrate(&net, &[drive], 0.02, 0.001, &[ZERO]).is_err());
    }

    #[test]
    fn constant_sampled_drive_reaches_dc_response() {
        // ω = 0 steady state of a single mode: out/in = 1
        let kappa = 1.0;
        let net = single(kappa);
        let dt = 0.005;
        let t_max = 40.0;
        let drive = DriveSignal {
            port: PortId(0),
            waveform: Waveform::Sampled { dt, samples: vec![c(1.0, 0.0); 8001] },
        };
        let sim = integrate(&net, &[drive], t_max, dt, &[ZERO]).unwrap();
        assert!((sim.outputs.last().unwrap()[0] - c(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn single_mode_reflection_in_time() {
        let kappa = 1.0;
        let net = single(kappa);
        for &w in &[0.0, 0.7, -1.3] {
            let r = steady_state_transmission(&net, w, PortId(0), PortId(0)).unwrap();
            let expect = c(kappa, 2.0 * w) / c(kappa, -2.0 * w);
            assert!((r - expect).norm() < 1e-3, "omega {w}: {r} vs {expect}");
        }
    }

    #[test]
    fn resonant_transmission_in_time() {
        for &(kappa, w) in &[(2.0, 0.0), (2.0, 1.0), (2.6, 0.5)] {
            let net = resonant_network(&ResonantParams::symmetric(1.0, kappa).unwrap());
            let (a, b) = converter_ports(&net).unwrap();
            let run = steady_state_run(&net, w, a, b, SteadyStateOptions::default()).unwrap();
            let freq = transmission(&net, w, a, b).unwrap();
            assert!((run.ratio - freq).norm() < 1e-3);
            assert!(run.drift <= DRIFT_TOL);
        }
    }

    #[test]
    fn energy_balance_at_steady_state() {
        let net = resonant_network(&ResonantParams::new(1.0, 0.7, 2.0, 1.4).unwrap());
        let (a, b) = converter_ports(&net).unwrap();
        let raa = steady_state_transmission(&net, 0.4, a, a).unwrap();
        let rba = steady_state_transmission(&net, 0.4, a, b).unwrap();
        assert!((raa.norm_sqr() + rba.norm_sqr() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn richardson_shrinkage() {
        let kappa = 1.0;
        let net = single(kappa);
        let run = |dt: f64| {
            steady_state_run(&net, 0.9, PortId(0), PortId(0), SteadyStateOptions { dt: Some(dt), ..Default::default() })
                .unwrap()
                .ratio
        };
        let (r1, r2, r3) = (run(0.01), run(0.005), run(0.0025));
        assert!((r2 - r3).norm() <= 0.1 * (r1 - r2).norm());
    }

    #[test]
    fn zero_drive_gives_zero_ratio() {
        let net = single(1.0);
        let opts = SteadyStateOptions { amplitude: ZERO, ..Default::default() };
        let run = steady_state_run(&net, 0.3, PortId(0), PortId(0), opts).unwrap();
        assert_eq!(run.ratio, ZERO);
    }

    #[test]
    fn undamped_dark_mode_does_not_converge() {
        // interior mode resonant with the drive and weakly coupled: rings up slowly
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 0.01], &[0.01, 0.0]]).unwrap();
        let net = CoupledModeNetwork::new(["a", "d"], a, vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            steady_state_transmission(&net, 0.0, PortId(0), PortId(0)),
            Err(Error::NonConvergent { .. })
        ));
    }

    #[test]
    fn trace_csv_layout() {
        let net = single(1.0);
        let opts = SteadyStateOptions { trace_stride: Some(1000), ..Default::default() };
        let run = steady_state_run(&net, 0.0, PortId(0), PortId(0), opts).unwrap();
        let trace = run.trace.unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&net, &trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "time,a_re,a_im,out_a_re,out_a_im");
        assert_eq!(lines.next().unwrap().split(',').count(), 5);
        assert_eq!(text.lines().count(), trace.times.len() + 1);
    }
}
