//! TOML run configuration.
//!
//! The file uses laboratory units (nm, W/cm², bar, mm, eV); everything is
//! converted to SI when the [`RunConfig`] is resolved. Unknown keys are
//! rejected.
//!
//! ```toml
//! [physical]
//! pump_wavelength_nm = 1240.0
//! pump_intensity_w_cm2 = 5e14
//! pressure_bar = 0.5
//! temperature_k = 300.0
//! cell_length_mm = 2.0
//! dephasing_gamma = 1.2e9
//! ground_energy_ev = -12.13
//! excited_energy_ev = -1.2
//!
//! [channels]
//! probe_order = 3
//! orders = [14, 16, 18, 20]
//!
//! [dipole]
//! kind = "constant"
//! mu0 = 5.7e-51
//! mu_b = 1.0
//! ```

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constants::EV;
use crate::dipole::{DipoleModel, DipoleShape, DipoleTable, DEFAULT_REFERENCE_INTENSITY};
use crate::error::{Error, Result};
use crate::params::{ConfigViolation, PhysicalConfig};
use crate::propagation::{TransferMethod, DEFAULT_CONDITION_LIMIT, DEFAULT_ODE_STEPS};

const NM: f64 = 1e-9;
const W_PER_CM2: f64 = 1e4;
const BAR: f64 = 1e5;
const MM: f64 = 1e-3;

/// Built-in configuration used when no `--config` is given.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../../../configs/default.toml");

pub const DEFAULT_PROBE_PHOTON_NUMBER: f64 = 1e4;

/// A complex number written either as a plain real or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(self) -> C64 {
        match self {
            ComplexValue::Real(re) => C64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => C64::new(re, im),
        }
    }

    fn from_complex(c: C64) -> Self {
        if c.im == 0.0 {
            ComplexValue::Real(c.re)
        } else {
            ComplexValue::Pair([c.re, c.im])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    pub pump_wavelength_nm: f64,
    pub pump_intensity_w_cm2: f64,
    pub pressure_bar: f64,
    pub temperature_k: f64,
    pub cell_length_mm: f64,
    /// 1/s.
    pub dephasing_gamma: f64,
    pub ground_energy_ev: f64,
    pub excited_energy_ev: f64,
    /// Defaults to `-ground_energy_ev`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ionization_potential_ev: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Any,
}

impl Parity {
    fn admits(self, n: u32) -> bool {
        match self {
            Parity::Even => n.is_multiple_of(2),
            Parity::Odd => n % 2 == 1,
            Parity::Any => true,
        }
    }
}

/// Either an explicit `orders` list (validated strictly) or a generated
/// range `1..=max_order` filtered by `parity`, from which orders that are
/// below threshold or not above the probe order are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelsSection {
    pub probe_order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orders: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<Parity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DipoleKind {
    Constant,
    PlateauCutoff,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DipoleSection {
    pub kind: DipoleKind,
    pub mu0: ComplexValue,
    pub mu_b: ComplexValue,
    #[serde(default)]
    pub intensity_scaling_exponent: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_intensity_w_cm2: Option<f64>,
    /// Decay per pump photon above the cutoff, `plateau-cutoff` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_decay: Option<f64>,
    /// Table file, `table` only. Relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    /// Rescale dipoles so that the largest `|χ_c|` equals this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrate_peak_chi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    #[serde(default = "default_photon_number")]
    pub probe_photon_number: f64,
}

fn default_photon_number() -> f64 {
    DEFAULT_PROBE_PHOTON_NUMBER
}

impl Default for StateSection {
    fn default() -> Self {
        Self { probe_photon_number: DEFAULT_PROBE_PHOTON_NUMBER }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    #[serde(default = "default_method")]
    pub method: TransferMethod,
    #[serde(default = "default_condition_limit")]
    pub condition_limit: f64,
    #[serde(default = "default_ode_steps")]
    pub ode_steps: usize,
}

fn default_method() -> TransferMethod {
    TransferMethod::Analytic
}

fn default_condition_limit() -> f64 {
    DEFAULT_CONDITION_LIMIT
}

fn default_ode_steps() -> usize {
    DEFAULT_ODE_STEPS
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { method: default_method(), condition_limit: DEFAULT_CONDITION_LIMIT, ode_steps: DEFAULT_ODE_STEPS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub probe_orders: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    PumpIntensity,
    CellLength,
    ProbeOrder,
    GasPressure,
}

impl SweepVariable {
    /// Column label including the file unit.
    pub fn label(self) -> &'static str {
        match self {
            SweepVariable::PumpIntensity => "pump_intensity_w_cm2",
            SweepVariable::CellLength => "cell_length_mm",
            SweepVariable::ProbeOrder => "probe_order",
            SweepVariable::GasPressure => "pressure_bar",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Sweep of one variable for a fixed `(probe order, channel n)` pair. Values
/// are in the file units of the variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
    /// Channel `n` of the reported pair.
    pub channel_order: u32,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::InvalidSweep(format!("count must be >= 2, got {}", self.count)));
        }
        if !(self.start < self.stop) || !self.stop.is_finite() {
            return Err(Error::InvalidSweep(format!("need start < stop, got {} .. {}", self.start, self.stop)));
        }
        if self.spacing == Spacing::Log && !(self.start > 0.0) {
            return Err(Error::InvalidSweep("log spacing needs start > 0".into()));
        }
        if self.variable == SweepVariable::ProbeOrder && (self.start.fract() != 0.0 || self.stop.fract() != 0.0) {
            return Err(Error::InvalidSweep("probe_order sweep needs integer bounds".into()));
        }
        Ok(())
    }

    /// Sweep points in order. Probe-order points are rounded to integers.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let f = i as f64 / last;
                let v = match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * f,
                    Spacing::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * f).exp(),
                };
                let v = if i == 0 { self.start } else if i == self.count - 1 { self.stop } else { v };
                if self.variable == SweepVariable::ProbeOrder {
                    v.round()
                } else {
                    v
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerSection {
    /// Channel `n` whose conjugate forms the slice with the probe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_order: Option<u32>,
    /// Half-width of the square `(x_pr, x_ck)` window around the peak.
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_half_width() -> f64 {
    4.0
}

fn default_samples() -> usize {
    81
}

impl Default for WignerSection {
    fn default() -> Self {
        Self { channel_order: None, half_width: default_half_width(), samples: default_samples() }
    }
}

/// Parsed file, before unit conversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub physical: PhysicalSection,
    pub channels: ChannelsSection,
    pub dipole: DipoleSection,
    #[serde(default)]
    pub state: StateSection,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub wigner: WignerSection,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads a file and makes a relative dipole table path absolute.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut file = Self::parse(&text)?;
        if let Some(table) = file.dipole.table.as_mut() {
            if table.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                *table = base.join(&*table);
            }
        }
        Ok(file)
    }

    pub fn builtin() -> Self {
        Self::parse(DEFAULT_CONFIG_TOML).expect("built-in configuration parses")
    }

    /// Canonical TOML form, the config snapshot written to manifests.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of [`Self::to_toml`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let physical = self.physical_config(self.channels.probe_order)?;
        let dipole = self.dipole_model()?;
        let p = self.state.probe_photon_number;
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::InvalidConfig(vec![ConfigViolation::NonPositiveParameter {
                name: "probe_photon_number",
                value: p,
            }]));
        }
        if !(self.solver.condition_limit > 1.0) || self.solver.ode_steps == 0 {
            return Err(Error::Parse("solver: condition_limit must exceed 1 and ode_steps must be >= 1".into()));
        }
        if let Some(sweep) = &self.sweep {
            sweep.validate()?;
        }
        Ok(RunConfig {
            physical,
            dipole,
            calibrate_peak_chi: self.dipole.calibrate_peak_chi,
            probe_photon_number: p,
            solver: self.solver,
        })
    }

    /// SI configuration for probe order `q`. Generated channel ranges drop
    /// orders that cannot couple to `q`; explicit lists are kept as given.
    pub fn physical_config(&self, q: u32) -> Result<PhysicalConfig> {
        let p = &self.physical;
        let ip = p.ionization_potential_ev.unwrap_or(-p.ground_energy_ev);
        let photon = crate::constants::HBAR * 2.0 * std::f64::consts::PI * crate::constants::SPEED_OF_LIGHT
            / (p.pump_wavelength_nm * NM);
        let channel_orders = match (&self.channels.orders, self.channels.max_order) {
            (Some(orders), None) => orders.clone(),
            (None, Some(max)) => {
                let parity = self.channels.parity.unwrap_or(Parity::Any);
                (1..=max).filter(|&n| parity.admits(n) && n > q && n as f64 * photon > ip * EV).collect()
            }
            _ => return Err(Error::Parse("[channels] needs exactly one of `orders` or `max_order`".into())),
        };
        if self.channels.orders.is_some() && self.channels.parity.is_some() {
            return Err(Error::Parse("[channels] `parity` applies only with `max_order`".into()));
        }
        let cfg = PhysicalConfig {
            pump_wavelength: p.pump_wavelength_nm * NM,
            pump_intensity: p.pump_intensity_w_cm2 * W_PER_CM2,
            pressure: p.pressure_bar * BAR,
            temperature: p.temperature_k,
            cell_length: p.cell_length_mm * MM,
            dephasing_gamma: p.dephasing_gamma,
            ground_energy: p.ground_energy_ev * EV,
            excited_energy: p.excited_energy_ev * EV,
            ionization_potential: ip * EV,
            probe_order: q,
            channel_orders,
        };
        cfg.validate().map_err(Error::InvalidConfig)
    }

    pub fn dipole_model(&self) -> Result<DipoleModel> {
        let d = &self.dipole;
        let shape = match d.kind {
            DipoleKind::Constant => DipoleShape::Constant,
            DipoleKind::PlateauCutoff => DipoleShape::PlateauCutoff {
                cutoff_decay: d
                    .cutoff_decay
                    .ok_or_else(|| Error::Parse("[dipole] plateau-cutoff needs `cutoff_decay`".into()))?,
            },
            DipoleKind::Table => {
                let path =
                    d.table.clone().ok_or_else(|| Error::Parse("[dipole] table kind needs `table`".into()))?;
                let table = DipoleTable::load(&path)?;
                DipoleShape::Table { path, table }
            }
        };
        let model = DipoleModel {
            shape,
            mu0: d.mu0.value(),
            mu_b: d.mu_b.value(),
            intensity_scaling_exponent: d.intensity_scaling_exponent,
            reference_intensity: d.reference_intensity_w_cm2.map_or(DEFAULT_REFERENCE_INTENSITY, |i| i * W_PER_CM2),
        };
        model.validate()?;
        if let Some(x) = d.calibrate_peak_chi {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::Calibration(format!("calibrate_peak_chi must be positive, got {x}")));
            }
        }
        Ok(model)
    }

    /// Sets the value a sweep variable takes at one point (file units).
    pub fn with_sweep_value(&self, variable: SweepVariable, value: f64) -> Self {
        let mut out = self.clone();
        match variable {
            SweepVariable::PumpIntensity => out.physical.pump_intensity_w_cm2 = value,
            SweepVariable::CellLength => out.physical.cell_length_mm = value,
            SweepVariable::ProbeOrder => out.channels.probe_order = value as u32,
            SweepVariable::GasPressure => out.physical.pressure_bar = value,
        }
        out
    }

    pub fn set_mu0(&mut self, mu0: C64) {
        self.dipole.mu0 = ComplexValue::from_complex(mu0);
    }
}

/// Resolved SI configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub physical: PhysicalConfig,
    pub dipole: DipoleModel,
    pub calibrate_peak_chi: Option<f64>,
    pub probe_photon_number: f64,
    pub solver: SolverSettings,
}
