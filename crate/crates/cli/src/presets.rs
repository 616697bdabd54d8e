//! Figure-reproduction presets. Each expands to a fixed list of runs whose
//! outputs are written into one directory.

use std::fs;
use std::path::{Path, PathBuf};

use qtransduce::analysis::bandwidth_vs_kappa;
use qtransduce::format::sci;

use crate::commands::{bandwidth, map, optimize, optimize_options, sweep};
use crate::config::{Omega, RunConfig, SetupKind, Window};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
}

/// Detunings of the map and optimum families.
pub const DELTA_MUS: [f64; 4] = [0.0, 1.0, 3.0, 10.0];

const FIG2_WINDOW: Window = Window { min: -3.0, max: 3.0, points: 601 };
const FIG3_KAPPAS: Window = Window { min: 0.05, max: 4.0, points: 80 };
const FIG3_WINDOW: Window = Window { min: -4.0, max: 12.0, points: 641 };
const FIG4_KAPPAS: Window = Window { min: 0.1, max: 8.0, points: 80 };

fn family(delta_mu: f64) -> RunConfig {
    if delta_mu == 0.0 {
        RunConfig { setup: Some(SetupKind::Resonant), ..Default::default() }
    } else {
        RunConfig { setup: Some(SetupKind::Detuned), delta_mu: Some(delta_mu), ..Default::default() }
    }
}

fn tag(delta_mu: f64) -> String {
    format!("dmu{delta_mu}")
}

/// `(file name, contents)` for every output of a preset, in a fixed order.
pub fn preset_outputs(preset: Preset) -> Result<Vec<(String, String)>, CliError> {
    let mut files = Vec::new();
    match preset {
        Preset::Fig2 => {
            let window = Some(Omega::Window(FIG2_WINDOW));
            let resonant = RunConfig { kappa: Some(2.6), omega: window, ..family(0.0) };
            let detuned = RunConfig { kappa: Some(0.2), omega: window, ..family(10.0) };
            let two_mode = RunConfig {
                setup: Some(SetupKind::TwoMode),
                s: Some(0.1),
                kappa: Some(0.2),
                omega: window,
                ..Default::default()
            };
            files.push(("fig2_resonant.csv".into(), sweep(&resonant)?));
            files.push(("fig2_detuned_3mode.csv".into(), sweep(&detuned)?));
            files.push(("fig2_detuned_2mode.csv".into(), sweep(&two_mode)?));
            for (name, threshold) in [("fig2_bandwidth_999.json", 0.999), ("fig2_bandwidth_99.json", 0.99)] {
                let cfg = RunConfig { threshold: Some(threshold), ..resonant.clone() };
                files.push((name.into(), bandwidth(&cfg)?));
            }
        }
        Preset::Fig3 => {
            for d in DELTA_MUS {
                let cfg = RunConfig {
                    kappa_range: Some(FIG3_KAPPAS),
                    omega: Some(Omega::Window(FIG3_WINDOW)),
                    ..family(d)
                };
                files.push((format!("fig3_map_{}.csv", tag(d)), map(&cfg)?));
            }
        }
        Preset::Fig4 => {
            for d in DELTA_MUS {
                let cfg = RunConfig { threshold: Some(0.99), kappa_range: Some(FIG4_KAPPAS), ..family(d) };
                files.push((format!("fig4_optimum_{}.json", tag(d)), optimize(&cfg)?));

                let setup = cfg.setup()?;
                let fam = setup.family()?;
                let opts = optimize_options(&cfg, FIG4_KAPPAS.points)?;
                let range = match opts.omega_range {
                    Some(r) => r,
                    None => qtransduce::analysis::auto_omega_range(fam, FIG4_KAPPAS.max)?,
                };
                let kappas = FIG4_KAPPAS.grid();
                let widths = bandwidth_vs_kappa(fam, 0.99, &kappas, range, opts.scan)?;
                let mut csv = String::from("kappa,max_width\n");
                for (k, w) in kappas.iter().zip(&widths) {
                    csv.push_str(&format!("{},{}\n", sci(*k), sci(*w)));
                }
                files.push((format!("fig4_width_{}.csv", tag(d)), csv));
            }
        }
    }
    Ok(files)
}

/// Writes a preset's outputs into `out_dir` and returns the written paths.
pub fn run_preset(preset: Preset, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let files = preset_outputs(preset)?;
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for (name, text) in files {
        let path = out_dir.join(name);
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}
