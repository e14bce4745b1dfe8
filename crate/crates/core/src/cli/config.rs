//! Strict scenario configuration: one JSON document with a `version` field.
//!
//! ```json
//! {
//!   "version": 1,
//!   "preset": "mirror_bridge",
//!   "params": { "gamma": 2.0 },
//!   "sweep": { "lo": 0.9, "hi": 1.2, "step": 0.005 },
//!   "bracket": [0.95, 1.05],
//!   "output_dir": "out"
//! }
//! ```
//!
//! A custom graph replaces `preset`/`params` with `lattice`; bond amplitudes
//! are numbers or the string `"t_prime"`.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::lattice::{LatticeFamily, LatticeGraph, Preset, PresetParams, Region, Variant};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_GRID: GridSpec = GridSpec {
    lo: 0.0,
    hi: 1.3,
    step: 0.005,
};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    #[serde(default)]
    pub preset: Option<Variant>,
    #[serde(default)]
    pub params: Option<ParamOverrides>,
    #[serde(default)]
    pub lattice: Option<CustomLattice>,
    #[serde(default)]
    pub t_prime: Option<f64>,
    #[serde(default)]
    pub sweep: Option<GridSpec>,
    #[serde(default)]
    pub bracket: Option<[f64; 2]>,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// Preset parameters in units of `t`; unset fields keep the preset defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    /// The energy unit; accepted only as `1`.
    pub t: Option<f64>,
    pub t_a: Option<f64>,
    pub t_b: Option<f64>,
    pub kappa0: Option<f64>,
    pub gamma: Option<f64>,
    pub system_sites: Option<usize>,
    pub reservoir_sites: Option<usize>,
    pub tail_sites: Option<usize>,
    pub shift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomLattice {
    /// Reservoir gain `γ` used by the diagnostics.
    pub gamma: f64,
    pub sites: Vec<CustomSite>,
    pub bonds: Vec<CustomBond>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSite {
    pub label: usize,
    pub region: Region,
    /// `Im V`: positive for gain, negative for loss.
    pub potential: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomBond {
    pub i: usize,
    pub j: usize,
    pub amplitude: Amplitude,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Fixed(f64),
    Symbol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        crate::spectral::uniform_grid(self.lo, self.hi, self.step)
    }

    /// Parses `lo:hi:step`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || Error::semantic("grid", format!("expected lo:hi:step, got `{text}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let g = Self {
            lo: v[0],
            hi: v[1],
            step: v[2],
        };
        g.validate("grid")?;
        Ok(g)
    }

    fn validate(&self, key: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.step.is_finite()) {
            return Err(Error::semantic(key, "values must be finite"));
        }
        if self.hi <= self.lo {
            return Err(Error::semantic(
                key,
                format!("must increase (lo {} >= hi {})", self.lo, self.hi),
            ));
        }
        if self.step <= 0.0 {
            return Err(Error::semantic(
                key,
                format!("step must be positive, got {}", self.step),
            ));
        }
        if (self.hi - self.lo) / self.step > 1e6 {
            return Err(Error::semantic(key, "more than 10^6 grid points"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Spectrum,
    Sweep,
    FindZero,
    Analyze,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// `tol_E` for zero-mode roots.
    pub energy: f64,
    /// Pairing tolerance for the `(E, −E*)` check.
    pub nhph: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            energy: 1e-8,
            nhph: 1e-8,
        }
    }
}

/// Parses and validates a scenario document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: ScenarioConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        from_json_error(e.into_inner(), &path)
    })?;
    de.end().map_err(|e| from_json_error(e, "."))?;
    config.validate()?;
    Ok(config)
}

fn from_json_error(e: serde_json::Error, path: &str) -> Error {
    let full = e.to_string();
    let message = match full.rfind(" at line ") {
        Some(k) => full[..k].to_string(),
        None => full,
    };
    match e.classify() {
        serde_json::error::Category::Data => {
            let key = if path == "." {
                // missing or unknown top-level field: name it from the message
                message
                    .split('`')
                    .nth(1)
                    .map(str::to_string)
                    .unwrap_or_else(|| path.to_string())
            } else {
                path.to_string()
            };
            Error::Semantic { key, message }
        }
        _ => Error::Syntax {
            line: e.line(),
            column: e.column(),
            message,
        },
    }
}

impl ScenarioConfig {
    fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::semantic(
                "version",
                format!(
                    "unsupported version {}, expected {CONFIG_VERSION}",
                    self.version
                ),
            ));
        }
        match (&self.preset, &self.lattice) {
            (Some(_), Some(_)) => {
                return Err(Error::semantic(
                    "lattice",
                    "give either `preset` or `lattice`, not both",
                ))
            }
            (None, None) => {
                return Err(Error::semantic(
                    "preset",
                    "one of `preset` or `lattice` is required",
                ))
            }
            (None, Some(_)) if self.params.is_some() => {
                return Err(Error::semantic("params", "only applies to presets"))
            }
            _ => {}
        }
        if let Some(p) = self.t_prime {
            if !p.is_finite() {
                return Err(Error::semantic("t_prime", "must be finite"));
            }
        }
        if let Some(g) = &self.sweep {
            g.validate("sweep")?;
        }
        if let Some([lo, hi]) = self.bracket {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::semantic(
                    "bracket",
                    format!("must be increasing, got [{lo}, {hi}]"),
                ));
            }
        }
        for (key, v) in [
            ("tolerances.energy", self.tolerances.energy),
            ("tolerances.nhph", self.tolerances.nhph),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::semantic(key, format!("must be positive, got {v}")));
            }
        }
        let family = self.family()?;
        family.build(self.t_prime.unwrap_or(1.0))?;
        Ok(())
    }

    /// The lattice family the scenario describes.
    pub fn family(&self) -> Result<Family> {
        if let Some(variant) = self.preset {
            let mut p = PresetParams::defaults(variant);
            if let Some(o) = &self.params {
                if let Some(t) = o.t {
                    if t != 1.0 {
                        return Err(Error::semantic(
                            "params.t",
                            "energies are in units of t; t must be 1",
                        ));
                    }
                }
                p.t_a = o.t_a.unwrap_or(p.t_a);
                p.t_b = o.t_b.unwrap_or(p.t_b);
                p.kappa0 = o.kappa0.unwrap_or(p.kappa0);
                p.gamma = o.gamma.unwrap_or(p.gamma);
                p.system_sites = o.system_sites.unwrap_or(p.system_sites);
                p.reservoir_sites = o.reservoir_sites.unwrap_or(p.reservoir_sites);
                p.tail_sites = o.tail_sites.unwrap_or(p.tail_sites);
                p.shift = o.shift.unwrap_or(p.shift);
            }
            let preset = Preset::with_params(variant, p).map_err(|e| match e {
                Error::Semantic { key, message } => Error::Semantic {
                    key: format!("params.{key}"),
                    message,
                },
                other => other,
            })?;
            return Ok(Family::Preset(preset));
        }
        let custom = self.lattice.as_ref().expect("validated");
        custom.check()?;
        Ok(Family::Custom(custom.clone()))
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        self.sweep.unwrap_or(DEFAULT_GRID).points()
    }
}

impl CustomLattice {
    fn check(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::semantic(
                "lattice.gamma",
                format!("must be nonnegative, got {}", self.gamma),
            ));
        }
        if self.sites.is_empty() {
            return Err(Error::semantic(
                "lattice.sites",
                "at least one site required",
            ));
        }
        let first = self.sites[0].label;
        for (k, s) in self.sites.iter().enumerate() {
            if s.label != first + k {
                return Err(Error::semantic(
                    format!("lattice.sites[{k}].label"),
                    format!("labels must be consecutive from {first}, got {}", s.label),
                ));
            }
            if !s.potential.is_finite() {
                return Err(Error::semantic(
                    format!("lattice.sites[{k}].potential"),
                    "must be finite",
                ));
            }
        }
        for (k, b) in self.bonds.iter().enumerate() {
            match &b.amplitude {
                Amplitude::Fixed(v) if !v.is_finite() => {
                    return Err(Error::semantic(
                        format!("lattice.bonds[{k}].amplitude"),
                        "must be finite",
                    ))
                }
                Amplitude::Symbol(s) if s != "t_prime" => {
                    return Err(Error::semantic(
                        format!("lattice.bonds[{k}].amplitude"),
                        format!("expected a number or \"t_prime\", got \"{s}\""),
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn build(&self, t_prime: f64) -> Result<LatticeGraph> {
        let first = self.sites[0].label;
        let onsite = self
            .sites
            .iter()
            .map(|s| Complex64::new(0.0, s.potential))
            .collect();
        let regions = self.sites.iter().map(|s| s.region).collect();
        let mut g = LatticeGraph::new(first, onsite, regions, Vec::new())
            .map_err(|e| semantic_from(e, "lattice.sites"))?;
        for (k, b) in self.bonds.iter().enumerate() {
            let amplitude = match b.amplitude {
                Amplitude::Fixed(v) => v,
                Amplitude::Symbol(_) => t_prime,
            };
            g = g
                .with_bond(b.i, b.j, amplitude)
                .map_err(|e| semantic_from(e, &format!("lattice.bonds[{k}]")))?;
        }
        Ok(g)
    }
}

fn semantic_from(e: Error, key: &str) -> Error {
    match e {
        Error::Config(message) => Error::semantic(key, message),
        other => other,
    }
}

/// Either a preset or a custom graph, as a family in `t′`.
#[derive(Debug, Clone)]
pub enum Family {
    Preset(Preset),
    Custom(CustomLattice),
}

impl Family {
    /// Reservoir gain `γ` for the diagnostics.
    pub fn gamma(&self) -> f64 {
        match self {
            Family::Preset(p) => p.params.gamma,
            Family::Custom(c) => c.gamma,
        }
    }
}

impl LatticeFamily for Family {
    fn build(&self, t_prime: f64) -> Result<LatticeGraph> {
        match self {
            Family::Preset(p) => p.build(t_prime),
            Family::Custom(c) => c.build(t_prime),
        }
    }
}
