//! TOML experiment configuration.
//!
//! A file is parsed into [`RawConfig`] (every key optional, unknown keys
//! rejected), optionally laid over a figure preset, and then resolved into an
//! [`ExperimentConfig`] with all defaults filled in and all rates converted to
//! the dimensionless convention used by the core.
//!
//! ```toml
//! omega_m_rad_s = 1.56e10
//! T_kelvin = 10.0
//! seed = 7
//!
//! [si]                      # or [dimensionless]: rates / omega_m, tau * omega_m
//! g_m = 6.283185307179586e6 # rad/s
//! g_f_over_g_m = 30.0       # or g_f in rad/s
//! tau = 4.487179487179487e-8
//!
//! [[segments]]
//! variant = "driven"
//! steps = 300
//! ```

use std::fs;
use std::path::Path;

use meascool::{
    PhysicalParams64, ProtocolSchedule64, Segment64, SweepAxis, ThermalSpec64, Variant,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presets;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TRAJECTORIES: usize = 100_000;
pub const DEFAULT_CHUNK_SIZE: usize = 4096;
pub const DEFAULT_ORACLE_DRAWS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {reason}")]
    Read { path: String, reason: String },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("missing required keys: {}", .0.join(", "))]
    Missing(Vec<String>),
    #[error("conflicting keys `{0}` and `{1}`: give exactly one")]
    Conflict(String, String),
    #[error("unknown preset `{name}` (known: {})", presets::NAMES.join(", "))]
    UnknownPreset { name: String },
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: impl Into<String>, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        reason: reason.to_string(),
    }
}

/// Rates and interval of one unit convention. Under `[si]` rates are rad/s
/// and `tau` is seconds; under `[dimensionless]` rates are divided by
/// `omega_m` and `tau` is the phase `omega_m * tau`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_f_over_g_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_e_over_g_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

impl UnitBlock {
    fn overlay(self, top: UnitBlock) -> UnitBlock {
        let g_f_given = top.g_f.is_some() || top.g_f_over_g_m.is_some();
        let delta_given = top.delta_e.is_some() || top.delta_e_over_g_m.is_some();
        UnitBlock {
            g_m: top.g_m.or(self.g_m),
            g_f: if g_f_given { top.g_f } else { self.g_f },
            g_f_over_g_m: if g_f_given {
                top.g_f_over_g_m
            } else {
                self.g_f_over_g_m
            },
            delta_e: if delta_given {
                top.delta_e
            } else {
                self.delta_e
            },
            delta_e_over_g_m: if delta_given {
                top.delta_e_over_g_m
            } else {
                self.delta_e_over_g_m
            },
            tau: top.tau.or(self.tau),
        }
    }
}

/// One `[[segments]]` entry. Overrides of `g_f` and `delta_e` use the unit
/// convention of the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSegment {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_f_over_g_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_e_over_g_m: Option<f64>,
    /// Hand over to the next segment once the conditional `n̄` is at most this.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub until_n_bar_below: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCoefficients {
    /// Defaults to the first segment's variant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Extra `|c_n|^(2k)` columns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub powers: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    /// `g_f_over_g_m`, `T_kelvin`, `omega_tau` or `steps`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    /// `[start, stop, step]`, inclusive of `stop` up to rounding.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTrajectories {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chunk_size: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOracle {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
}

/// The file as written: every key optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_m_rad_s: Option<f64>,
    #[serde(rename = "T_kelvin", skip_serializing_if = "Option::is_none")]
    pub t_kelvin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_bar_th: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_tail: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Also write the initial and final conditional populations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub si: Option<UnitBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimensionless: Option<UnitBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<RawCoefficients>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<RawSweep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<RawTrajectories>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<RawOracle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<RawSegment>>,
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is representable in TOML")
    }

    /// `top` wins key by key. A unit block in `top` replaces a base block of
    /// the other convention; one thermal key in `top` replaces both.
    pub fn overlay(self, top: RawConfig) -> RawConfig {
        let (si, dimensionless) = match (top.si, top.dimensionless) {
            (None, None) => (self.si, self.dimensionless),
            (Some(t), None) if self.dimensionless.is_none() => {
                (Some(self.si.unwrap_or_default().overlay(t)), None)
            }
            (None, Some(t)) if self.si.is_none() => (
                None,
                Some(self.dimensionless.unwrap_or_default().overlay(t)),
            ),
            (si, dimensionless) => (si, dimensionless),
        };
        let thermal_given = top.t_kelvin.is_some() || top.n_bar_th.is_some();
        RawConfig {
            preset: top.preset.or(self.preset),
            omega_m_rad_s: top.omega_m_rad_s.or(self.omega_m_rad_s),
            t_kelvin: if thermal_given {
                top.t_kelvin
            } else {
                self.t_kelvin
            },
            n_bar_th: if thermal_given {
                top.n_bar_th
            } else {
                self.n_bar_th
            },
            epsilon_tail: top.epsilon_tail.or(self.epsilon_tail),
            n_max_cap: top.n_max_cap.or(self.n_max_cap),
            seed: top.seed.or(self.seed),
            histogram: top.histogram.or(self.histogram),
            si,
            dimensionless,
            coefficients: top.coefficients.or(self.coefficients),
            sweep: top.sweep.or(self.sweep),
            trajectories: top.trajectories.or(self.trajectories),
            oracle: top.oracle.or(self.oracle),
            segments: top.segments.or(self.segments),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitConvention {
    Si,
    Dimensionless,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThermalInput {
    Temperature(f64),
    MeanOccupation(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentConfig {
    pub variant: Variant,
    pub steps: usize,
    pub params: PhysicalParams64,
    pub until_n_bar_below: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientExport {
    pub variant: Variant,
    pub n_max: usize,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryConfig {
    pub count: usize,
    pub chunk_size: usize,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    pub units: UnitConvention,
    /// Segment defaults; `omega_m` is in rad/s, everything else dimensionless.
    pub params: PhysicalParams64,
    pub thermal: ThermalInput,
    pub epsilon_tail: f64,
    pub n_max_cap: usize,
    pub seed: u64,
    pub histogram: bool,
    pub segments: Vec<SegmentConfig>,
    pub coefficients: Option<CoefficientExport>,
    pub sweep: Option<SweepConfig>,
    pub trajectories: TrajectoryConfig,
    pub oracle_draws: usize,
}

/// Read, overlay the preset (from `preset_override` or the file's `preset`
/// key) and resolve.
pub fn parse_config(
    path: &Path,
    preset_override: Option<&str>,
) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let raw = RawConfig::from_toml(&text)?;
    load(raw, preset_override)
}

/// Overlay the named preset (if any) under `raw` and resolve.
pub fn load(
    raw: RawConfig,
    preset_override: Option<&str>,
) -> Result<ExperimentConfig, ConfigError> {
    let name = preset_override
        .map(str::to_owned)
        .or_else(|| raw.preset.clone());
    let merged = match &name {
        Some(name) => {
            let base = presets::preset(name)?;
            let mut top = raw;
            top.preset = Some(name.clone());
            base.overlay(top)
        }
        None => raw,
    };
    let config = resolve(&merged)?;
    if let Some(name) = &name {
        log::info!("preset `{name}` expands to:\n{}", config.to_raw().to_toml());
    }
    Ok(config)
}

pub fn resolve(raw: &RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let mut missing = Vec::new();
    if raw.omega_m_rad_s.is_none() {
        missing.push("omega_m_rad_s".to_string());
    }
    if raw.si.is_none() && raw.dimensionless.is_none() {
        missing.push("[si] or [dimensionless]".to_string());
    }
    if raw.t_kelvin.is_none() && raw.n_bar_th.is_none() {
        missing.push("T_kelvin or n_bar_th".to_string());
    }
    if raw.segments.as_ref().is_none_or(|s| s.is_empty()) {
        missing.push("segments".to_string());
    }
    if let Some(block) = raw.si.as_ref().or(raw.dimensionless.as_ref()) {
        let prefix = if raw.si.is_some() {
            "si"
        } else {
            "dimensionless"
        };
        if block.g_m.is_none() {
            missing.push(format!("{prefix}.g_m"));
        }
        if block.tau.is_none() {
            missing.push(format!("{prefix}.tau"));
        }
    }
    if !missing.is_empty() {
        return Err(ConfigError::Missing(missing));
    }
    if raw.si.is_some() && raw.dimensionless.is_some() {
        return Err(ConfigError::Conflict("si".into(), "dimensionless".into()));
    }
    if raw.t_kelvin.is_some() && raw.n_bar_th.is_some() {
        return Err(ConfigError::Conflict("T_kelvin".into(), "n_bar_th".into()));
    }

    let omega = raw.omega_m_rad_s.unwrap();
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(invalid(
            "omega_m_rad_s",
            "must be a positive finite angular frequency",
        ));
    }
    let (units, block, prefix) = match (&raw.si, &raw.dimensionless) {
        (Some(b), None) => (UnitConvention::Si, b, "si"),
        (None, Some(b)) => (UnitConvention::Dimensionless, b, "dimensionless"),
        _ => unreachable!(),
    };
    // Factor taking a rate in the file's convention to `rate / omega_m`.
    let rate = match units {
        UnitConvention::Si => omega.recip(),
        UnitConvention::Dimensionless => 1.0,
    };
    let g_m = block.g_m.unwrap() * rate;
    let g_f = pick(
        block.g_f.map(|v| v * rate),
        block.g_f_over_g_m.map(|r| r * g_m),
        &format!("{prefix}.g_f"),
        &format!("{prefix}.g_f_over_g_m"),
    )?
    .unwrap_or(0.0);
    let delta_e = pick(
        block.delta_e.map(|v| v * rate),
        block.delta_e_over_g_m.map(|r| r * g_m),
        &format!("{prefix}.delta_e"),
        &format!("{prefix}.delta_e_over_g_m"),
    )?
    .unwrap_or(0.0);
    let omega_tau = match units {
        UnitConvention::Si => block.tau.unwrap() * omega,
        UnitConvention::Dimensionless => block.tau.unwrap(),
    };
    let params = PhysicalParams64::dimensionless(omega, g_m, g_f, delta_e, omega_tau)
        .map_err(|e| invalid(prefix, e))?;

    let thermal = match (raw.t_kelvin, raw.n_bar_th) {
        (Some(t), None) if t > 0.0 && t.is_finite() => ThermalInput::Temperature(t),
        (Some(t), None) => {
            return Err(invalid(
                "T_kelvin",
                format!("{t} is not a positive temperature"),
            ))
        }
        (None, Some(n)) if n >= 0.0 && n.is_finite() => ThermalInput::MeanOccupation(n),
        (None, Some(n)) => return Err(invalid("n_bar_th", format!("{n} is not a mean occupancy"))),
        _ => unreachable!(),
    };
    let epsilon_tail = raw
        .epsilon_tail
        .unwrap_or(meascool::fock::DEFAULT_EPSILON_TAIL);
    if !(epsilon_tail > 0.0 && epsilon_tail < 1.0) {
        return Err(invalid("epsilon_tail", "must lie in (0, 1)"));
    }
    let n_max_cap = raw.n_max_cap.unwrap_or(meascool::fock::DEFAULT_N_MAX_CAP);

    let segments = raw
        .segments
        .as_ref()
        .unwrap()
        .iter()
        .enumerate()
        .map(|(i, s)| resolve_segment(i, s, &params, rate))
        .collect::<Result<Vec<_>, _>>()?;

    let coefficients = raw
        .coefficients
        .as_ref()
        .map(|c| -> Result<CoefficientExport, ConfigError> {
            let variant = match &c.variant {
                Some(v) => v.parse().map_err(|e| invalid("coefficients.variant", e))?,
                None => segments[0].variant,
            };
            Ok(CoefficientExport {
                variant,
                n_max: c.n_max.unwrap_or(2500),
                powers: c.powers.clone().unwrap_or_default(),
            })
        })
        .transpose()?;

    let sweep = raw.sweep.as_ref().map(resolve_sweep).transpose()?;

    let trajectories = TrajectoryConfig {
        count: raw
            .trajectories
            .as_ref()
            .and_then(|t| t.count)
            .unwrap_or(DEFAULT_TRAJECTORIES),
        chunk_size: raw
            .trajectories
            .as_ref()
            .and_then(|t| t.chunk_size)
            .unwrap_or(DEFAULT_CHUNK_SIZE),
    };
    if trajectories.count == 0 {
        return Err(invalid("trajectories.count", "must be >= 1"));
    }
    if trajectories.chunk_size == 0 {
        return Err(invalid("trajectories.chunk_size", "must be >= 1"));
    }

    Ok(ExperimentConfig {
        preset: raw.preset.clone(),
        units,
        params,
        thermal,
        epsilon_tail,
        n_max_cap,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        histogram: raw.histogram.unwrap_or(false),
        segments,
        coefficients,
        sweep,
        trajectories,
        oracle_draws: raw
            .oracle
            .as_ref()
            .and_then(|o| o.draws)
            .unwrap_or(DEFAULT_ORACLE_DRAWS),
    })
}

fn pick(
    a: Option<f64>,
    b: Option<f64>,
    key_a: &str,
    key_b: &str,
) -> Result<Option<f64>, ConfigError> {
    match (a, b) {
        (Some(_), Some(_)) => Err(ConfigError::Conflict(key_a.into(), key_b.into())),
        (a, b) => Ok(a.or(b)),
    }
}

fn resolve_segment(
    i: usize,
    s: &RawSegment,
    base: &PhysicalParams64,
    rate: f64,
) -> Result<SegmentConfig, ConfigError> {
    let key = |k: &str| format!("segments[{i}].{k}");
    let variant: Variant = s
        .variant
        .as_deref()
        .ok_or_else(|| ConfigError::Missing(vec![key("variant")]))?
        .parse()
        .map_err(|e| invalid(key("variant"), e))?;
    let steps = s
        .steps
        .ok_or_else(|| ConfigError::Missing(vec![key("steps")]))?;
    let mut params = *base;
    let g_f = pick(
        s.g_f.map(|v| v * rate),
        s.g_f_over_g_m.map(|r| r * base.g_m()),
        &key("g_f"),
        &key("g_f_over_g_m"),
    )?;
    if let Some(g_f) = g_f {
        params = params.with_g_f(g_f).map_err(|e| invalid(key("g_f"), e))?;
    }
    let delta = pick(
        s.delta_e.map(|v| v * rate),
        s.delta_e_over_g_m.map(|r| r * base.g_m()),
        &key("delta_e"),
        &key("delta_e_over_g_m"),
    )?;
    if let Some(d) = delta {
        params = params
            .with_delta_e(d)
            .map_err(|e| invalid(key("delta_e"), e))?;
    }
    if let Some(th) = s.until_n_bar_below {
        if !(th > 0.0) {
            return Err(invalid(key("until_n_bar_below"), "must be > 0"));
        }
    }
    Ok(SegmentConfig {
        variant,
        steps,
        params,
        until_n_bar_below: s.until_n_bar_below,
    })
}

pub fn parse_axis(name: &str) -> Result<SweepAxis, ConfigError> {
    match name {
        "g_f_over_g_m" => Ok(SweepAxis::DrivingStrength),
        "T_kelvin" => Ok(SweepAxis::Temperature),
        "omega_tau" => Ok(SweepAxis::Interval),
        "steps" => Ok(SweepAxis::Steps),
        other => Err(invalid(
            "sweep.axis",
            format!("`{other}` is not one of g_f_over_g_m, T_kelvin, omega_tau, steps"),
        )),
    }
}

pub fn axis_name(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::DrivingStrength => "g_f_over_g_m",
        SweepAxis::Temperature => "T_kelvin",
        SweepAxis::Interval => "omega_tau",
        SweepAxis::Steps => "steps",
    }
}

fn resolve_sweep(s: &RawSweep) -> Result<SweepConfig, ConfigError> {
    let axis = parse_axis(
        s.axis
            .as_deref()
            .ok_or_else(|| ConfigError::Missing(vec!["sweep.axis".into()]))?,
    )?;
    let grid = match (&s.grid, s.range) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Conflict(
                "sweep.grid".into(),
                "sweep.range".into(),
            ))
        }
        (None, None) => {
            return Err(ConfigError::Missing(vec![
                "sweep.grid or sweep.range".into()
            ]))
        }
        (Some(g), None) => g.clone(),
        (None, Some([start, stop, step])) => {
            if !(step > 0.0) || !(stop >= start) {
                return Err(invalid("sweep.range", "need start <= stop and step > 0"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + i as f64 * step).collect()
        }
    };
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return Err(invalid("sweep.grid", "needs at least one finite value"));
    }
    Ok(SweepConfig { axis, grid })
}

impl ExperimentConfig {
    pub fn thermal_spec(&self) -> ThermalSpec64 {
        let spec = match self.thermal {
            ThermalInput::Temperature(t) => {
                ThermalSpec64::from_temperature(t, self.params.omega_m())
            }
            ThermalInput::MeanOccupation(n) => ThermalSpec64::from_mean(n),
        };
        spec.with_epsilon_tail(self.epsilon_tail)
            .with_cap(self.n_max_cap)
    }

    pub fn schedule(&self) -> meascool::Result<ProtocolSchedule64> {
        ProtocolSchedule64::new(
            self.segments
                .iter()
                .map(|s| {
                    let seg = Segment64::new(s.variant, s.params, s.steps);
                    match s.until_n_bar_below {
                        Some(th) => seg.until_mean_at_most(th),
                        None => seg,
                    }
                })
                .collect(),
        )
    }

    /// Equivalent dimensionless file. Parsing it back gives an identical
    /// config.
    pub fn to_raw(&self) -> RawConfig {
        let p = &self.params;
        let segments = self
            .segments
            .iter()
            .map(|s| RawSegment {
                variant: Some(s.variant.name().to_string()),
                steps: Some(s.steps),
                g_f: (s.params.g_f() != p.g_f()).then_some(s.params.g_f()),
                delta_e: (s.params.delta_e() != p.delta_e()).then_some(s.params.delta_e()),
                until_n_bar_below: s.until_n_bar_below,
                ..RawSegment::default()
            })
            .collect();
        let (t_kelvin, n_bar_th) = match self.thermal {
            ThermalInput::Temperature(t) => (Some(t), None),
            ThermalInput::MeanOccupation(n) => (None, Some(n)),
        };
        RawConfig {
            preset: self.preset.clone(),
            omega_m_rad_s: Some(p.omega_m()),
            t_kelvin,
            n_bar_th,
            epsilon_tail: Some(self.epsilon_tail),
            n_max_cap: Some(self.n_max_cap),
            seed: Some(self.seed),
            histogram: Some(self.histogram),
            si: None,
            dimensionless: Some(UnitBlock {
                g_m: Some(p.g_m()),
                g_f: Some(p.g_f()),
                delta_e: Some(p.delta_e()),
                tau: Some(p.tau()),
                ..UnitBlock::default()
            }),
            coefficients: self.coefficients.as_ref().map(|c| RawCoefficients {
                variant: Some(c.variant.name().to_string()),
                n_max: Some(c.n_max),
                powers: Some(c.powers.clone()),
            }),
            sweep: self.sweep.as_ref().map(|s| RawSweep {
                axis: Some(axis_name(s.axis).to_string()),
                grid: Some(s.grid.clone()),
                range: None,
            }),
            trajectories: Some(RawTrajectories {
                count: Some(self.trajectories.count),
                chunk_size: Some(self.trajectories.chunk_size),
            }),
            oracle: Some(RawOracle {
                draws: Some(self.oracle_draws),
            }),
            segments: Some(segments),
        }
    }
}
