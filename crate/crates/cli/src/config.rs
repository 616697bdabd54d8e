//! The run configuration document and its validation.

use std::path::PathBuf;

use qtransduce::analysis::SetupFamily;
use qtransduce::converter::{MICROWAVE, OPTICAL};
use qtransduce::ensemble::AtomEnsemble;
use qtransduce::format::linspace;
use qtransduce::{CoupledModeNetwork, PortId};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetupKind {
    Resonant,
    Detuned,
    TwoMode,
    Microscopic,
    Custom,
}

/// Inclusive grid `{min, max, points}`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Window {
    pub fn new(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points }
    }

    fn check(&self, field: &str, allow_point: bool) -> Result<(), CliError> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(config(format!("{field}: bounds must be finite")));
        }
        if self.points < 2 {
            return Err(config(format!("{field}.points must be at least 2")));
        }
        if self.min > self.max || (self.min == self.max && !allow_point) {
            return Err(config(format!("{field}: min must be below max")));
        }
        Ok(())
    }

    /// Grid points; a degenerate window is the single point `min`.
    pub fn grid(&self) -> Vec<f64> {
        if self.min == self.max {
            vec![self.min]
        } else {
            linspace(self.min, self.max, self.points)
        }
    }
}

/// Frequency input: one value or a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Omega {
    Value(f64),
    Window(Window),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub setup: Option<SetupKind>,
    pub g: Option<f64>,
    pub kappa: Option<f64>,
    pub kappa_range: Option<Window>,
    pub delta_mu: Option<f64>,
    /// Direct coupling of the two-mode model.
    pub s: Option<f64>,
    pub threshold: Option<f64>,
    #[serde(default, deserialize_with = "de_omega")]
    pub omega: Option<Omega>,
    #[serde(default, deserialize_with = "de_ensemble")]
    pub ensemble: Option<AtomEnsemble>,
    #[serde(default, deserialize_with = "de_network")]
    pub network: Option<CoupledModeNetwork>,
    pub in_port: Option<String>,
    pub out_port: Option<String>,
    /// Real drive amplitude for `timedomain`.
    pub amplitude: Option<f64>,
    pub dt: Option<f64>,
    pub trace: Option<PathBuf>,
    pub trace_stride: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

fn de_omega<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Omega>, D::Error> {
    match Value::deserialize(d)? {
        Value::Number(n) => Ok(Some(Omega::Value(n.as_f64().ok_or_else(|| D::Error::custom("not a number"))?))),
        v @ Value::Object(_) => serde_json::from_value(v).map(|w| Some(Omega::Window(w))).map_err(D::Error::custom),
        other => Err(D::Error::custom(format!("expected a number or {{min, max, points}}, got {other}"))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UniformEnsemble {
    n: usize,
    g_o: f64,
    g_mu: f64,
    omega_rabi: f64,
    delta_o: f64,
    #[serde(default)]
    delta_mu: f64,
}

fn de_ensemble<'de, D: Deserializer<'de>>(d: D) -> Result<Option<AtomEnsemble>, D::Error> {
    let v = Value::deserialize(d)?;
    let ens = match &v {
        Value::String(name) if name == "validation_default" => Ok(AtomEnsemble::validation_default()),
        Value::Object(map) if map.contains_key("uniform") => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Wrapper {
                uniform: UniformEnsemble,
            }
            let u = serde_json::from_value::<Wrapper>(v.clone()).map_err(D::Error::custom)?.uniform;
            AtomEnsemble::uniform(u.n, u.g_o, u.g_mu, u.omega_rabi, u.delta_o, u.delta_mu)
        }
        Value::Object(_) => AtomEnsemble::from_json(&v.to_string()),
        other => {
            return Err(D::Error::custom(format!(
                "expected \"validation_default\", {{\"uniform\": ...}} or {{\"atoms\": [...]}}, got {other}"
            )))
        }
    };
    ens.map(Some).map_err(D::Error::custom)
}

fn de_network<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CoupledModeNetwork>, D::Error> {
    let v = Value::deserialize(d)?;
    CoupledModeNetwork::from_json(&v.to_string()).map(Some).map_err(D::Error::custom)
}

/// Flag values that replace top-level config fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub kappa: Option<f64>,
    pub threshold: Option<f64>,
    pub omega: Option<f64>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub omega_points: Option<usize>,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

pub(crate) fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub(crate) fn missing(field: &str) -> CliError {
    config(format!("missing field `{field}`"))
}

fn check_finite(field: &str, x: Option<f64>) -> Result<(), CliError> {
    match x {
        Some(v) if !v.is_finite() => Err(config(format!("{field} must be finite"))),
        _ => Ok(()),
    }
}

/// A resolved model: a κ-parameterized converter family or a fixed network.
#[derive(Debug, Clone)]
pub enum Setup {
    Family(SetupFamily),
    Custom(CoupledModeNetwork),
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                config(e.into_inner().to_string())
            } else {
                config(format!("{path}: {}", e.into_inner()))
            }
        })
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(k) = o.kappa {
            self.kappa = Some(k);
            self.kappa_range = None;
        }
        if o.threshold.is_some() {
            self.threshold = o.threshold;
        }
        if let Some(w) = o.omega {
            self.omega = Some(Omega::Value(w));
        }
        if o.omega_min.is_some() || o.omega_max.is_some() || o.omega_points.is_some() {
            let current = match self.omega {
                Some(Omega::Window(w)) => Some(w),
                _ => None,
            };
            let pick = |flag: Option<f64>, old: Option<f64>, name: &str| {
                flag.or(old).ok_or_else(|| config(format!("omega window needs `{name}`")))
            };
            let min = pick(o.omega_min, current.map(|w| w.min), "omega.min")?;
            let max = pick(o.omega_max, current.map(|w| w.max), "omega.max")?;
            let points = o
                .omega_points
                .or(current.map(|w| w.points))
                .ok_or_else(|| config("omega window needs `omega.points`"))?;
            self.omega = Some(Omega::Window(Window::new(min, max, points)));
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
        if o.trace.is_some() {
            self.trace = o.trace.clone();
        }
        Ok(())
    }

    /// Checks the setup-specific field set and builds the model.
    pub fn setup(&self) -> Result<Setup, CliError> {
        let kind = self.setup.ok_or_else(|| missing("setup"))?;
        for (name, v) in [
            ("g", self.g),
            ("kappa", self.kappa),
            ("delta_mu", self.delta_mu),
            ("s", self.s),
            ("threshold", self.threshold),
            ("amplitude", self.amplitude),
            ("dt", self.dt),
        ] {
            check_finite(name, v)?;
        }
        if let Some(k) = self.kappa {
            if k <= 0.0 {
                return Err(config("kappa must be positive"));
            }
        }
        if self.kappa.is_some() && self.kappa_range.is_some() {
            return Err(config("`kappa` and `kappa_range` are mutually exclusive"));
        }
        if let Some(r) = &self.kappa_range {
            r.check("kappa_range", true)?;
            if r.min <= 0.0 {
                return Err(config("kappa_range.min must be positive"));
            }
        }
        if let Some(Omega::Value(w)) = self.omega {
            check_finite("omega", Some(w))?;
        }
        if let Some(Omega::Window(w)) = &self.omega {
            w.check("omega", false)?;
        }

        let present = [
            ("g", self.g.is_some()),
            ("delta_mu", self.delta_mu.is_some()),
            ("s", self.s.is_some()),
            ("ensemble", self.ensemble.is_some()),
            ("network", self.network.is_some()),
            ("kappa", self.kappa.is_some()),
            ("kappa_range", self.kappa_range.is_some()),
            ("in_port", self.in_port.is_some()),
            ("out_port", self.out_port.is_some()),
        ];
        let allowed: &[&str] = match kind {
            SetupKind::Resonant => &["g", "kappa", "kappa_range"],
            SetupKind::Detuned => &["g", "delta_mu", "kappa", "kappa_range"],
            SetupKind::TwoMode => &["g", "delta_mu", "s", "kappa", "kappa_range"],
            SetupKind::Microscopic => &["ensemble", "kappa", "kappa_range"],
            SetupKind::Custom => &["network", "in_port", "out_port"],
        };
        if let Some((name, _)) = present.iter().find(|(n, p)| *p && !allowed.contains(n)) {
            return Err(config(format!("field `{name}` does not apply to setup {kind:?}")));
        }

        let g = self.g.unwrap_or(1.0);
        let family = match kind {
            SetupKind::Resonant => SetupFamily::Resonant { g },
            SetupKind::Detuned => SetupFamily::Detuned { g, delta_mu: self.delta_mu.ok_or_else(|| missing("delta_mu"))? },
            SetupKind::TwoMode => {
                let s = match (self.s, self.delta_mu) {
                    (Some(s), None) if self.g.is_none() => s,
                    (None, Some(d)) if d != 0.0 => g * g / d,
                    (None, Some(_)) => return Err(config("delta_mu must be nonzero to derive `s`")),
                    (None, None) => return Err(missing("s")),
                    _ => return Err(config("give either `s` or `g` with `delta_mu`, not both")),
                };
                SetupFamily::TwoMode { s }
            }
            SetupKind::Microscopic => SetupFamily::Microscopic {
                ensemble: self.ensemble.clone().ok_or_else(|| missing("ensemble"))?,
            },
            SetupKind::Custom => return Ok(Setup::Custom(self.network.clone().ok_or_else(|| missing("network"))?)),
        };
        Ok(Setup::Family(family))
    }

    /// The single κ of a fixed-κ command; `None` for custom networks.
    pub fn single_kappa(&self, setup: &Setup) -> Result<Option<f64>, CliError> {
        match setup {
            Setup::Custom(_) => Ok(None),
            Setup::Family(_) => {
                if self.kappa_range.is_some() {
                    return Err(config("this command takes a single `kappa`, not `kappa_range`"));
                }
                self.kappa.map(Some).ok_or_else(|| missing("kappa"))
            }
        }
    }

    pub fn omega_window(&self) -> Result<Option<Window>, CliError> {
        match self.omega {
            None => Ok(None),
            Some(Omega::Window(w)) => Ok(Some(w)),
            Some(Omega::Value(_)) => Err(config("omega: expected a window {min, max, points}")),
        }
    }

    pub fn threshold(&self) -> Result<f64, CliError> {
        let t = self.threshold.ok_or_else(|| missing("threshold"))?;
        if t > 0.0 && t < 1.0 {
            Ok(t)
        } else {
            Err(config("threshold must lie strictly between 0 and 1"))
        }
    }

    pub(crate) fn check_format(&self, native: OutputFormat) -> Result<(), CliError> {
        match self.format {
            Some(f) if f != native => Err(config(format!("format: this command only writes {native:?}"))),
            _ => Ok(()),
        }
    }
}

impl Setup {
    pub fn network(&self, kappa: Option<f64>) -> Result<CoupledModeNetwork, CliError> {
        match (self, kappa) {
            (Self::Custom(net), _) => Ok(net.clone()),
            (Self::Family(f), Some(k)) => Ok(f.network(k)?),
            (Self::Family(_), None) => Err(missing("kappa")),
        }
    }

    pub fn family(&self) -> Result<&SetupFamily, CliError> {
        match self {
            Self::Family(f) => Ok(f),
            Self::Custom(_) => Err(config("this command needs a κ-parameterized setup, not custom")),
        }
    }

    /// Input and output ports; `in_port`/`out_port` labels for custom networks.
    pub fn ports(&self, cfg: &RunConfig, net: &CoupledModeNetwork) -> Result<(PortId, PortId), CliError> {
        match self {
            Self::Family(f) => Ok(f.ports(net)?),
            Self::Custom(_) => {
                let a = net.port(cfg.in_port.as_deref().unwrap_or(OPTICAL))?;
                let b = net.port(cfg.out_port.as_deref().unwrap_or(MICROWAVE))?;
                Ok((a, b))
            }
        }
    }
}
