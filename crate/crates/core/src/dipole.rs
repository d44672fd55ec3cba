//! Phenomenological effective dipoles for the recombination step and the
//! bound-bound transition.
//!
//! The microscopic strong-field dipoles are not computed here. A model
//! supplies `μ_eg(nω_pu)` per channel and a shared `μ_b`, in units chosen so
//! that the susceptibility formula yields a dimensionless χ (the product
//! `μ_eg μ_b` therefore carries J·m³).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::ModeGrid;
use crate::params::{DerivedQuantities, PhysicalConfig};
use crate::susceptibility::susceptibilities;

/// Default reference intensity for the intensity-scaling hook, W/m².
pub const DEFAULT_REFERENCE_INTENSITY: f64 = 5e18;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DipoleShape {
    /// Same amplitude for every channel.
    Constant,
    /// Flat up to the cutoff `Ip + 3.17 Up`, exponential decay (per pump
    /// photon) above it.
    PlateauCutoff { cutoff_decay: f64 },
    /// Per-channel values read from a table file.
    Table { path: PathBuf, table: DipoleTable },
}

/// Effective dipole model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipoleModel {
    pub shape: DipoleShape,
    /// Overall recombination amplitude. Multiplies table entries too.
    pub mu0: C64,
    /// Bound-bound element `μ_b`. Overridden by a table's `mu_b` record.
    pub mu_b: C64,
    /// `μ_eg ∝ (I / I_ref)^(exponent / 2)`.
    pub intensity_scaling_exponent: f64,
    pub reference_intensity: f64,
}

impl DipoleModel {
    pub fn constant(mu0: C64, mu_b: C64) -> Self {
        Self {
            shape: DipoleShape::Constant,
            mu0,
            mu_b,
            intensity_scaling_exponent: 0.0,
            reference_intensity: DEFAULT_REFERENCE_INTENSITY,
        }
    }

    pub fn with_intensity_scaling(mut self, exponent: f64) -> Self {
        self.intensity_scaling_exponent = exponent;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu0 == C64::new(0.0, 0.0) || !self.mu0.is_finite() {
            return Err(Error::InvalidDipoleModel(format!("mu0 must be finite and nonzero, got {}", self.mu0)));
        }
        if !self.mu_b.is_finite() {
            return Err(Error::InvalidDipoleModel("mu_b must be finite".into()));
        }
        if !(self.intensity_scaling_exponent >= 0.0) {
            return Err(Error::InvalidDipoleModel("intensity_scaling_exponent must be >= 0".into()));
        }
        if !(self.reference_intensity > 0.0) {
            return Err(Error::InvalidDipoleModel("reference_intensity must be > 0".into()));
        }
        if let DipoleShape::PlateauCutoff { cutoff_decay } = self.shape {
            if !(cutoff_decay > 0.0) {
                return Err(Error::InvalidDipoleModel("cutoff_decay must be > 0".into()));
            }
        }
        Ok(())
    }

    /// Intensity scale factor `s(I) = (I / I_ref)^(exponent / 2)`.
    pub fn intensity_scale(&self, intensity: f64) -> f64 {
        (intensity / self.reference_intensity).powf(self.intensity_scaling_exponent / 2.0)
    }
}

/// `μ_eg(nω_pu)` for channel `n`.
pub fn effective_recombination_dipole(model: &DipoleModel, n: u32, derived: &DerivedQuantities) -> Result<C64> {
    let base = model.mu0 * model.intensity_scale(derived.pump_intensity);
    match &model.shape {
        DipoleShape::Constant => Ok(base),
        DipoleShape::PlateauCutoff { cutoff_decay } => {
            let photon = derived.pump_photon_energy;
            let energy = n as f64 * photon;
            if energy <= derived.cutoff_energy {
                Ok(base)
            } else {
                let excess = (energy - derived.cutoff_energy) / photon;
                Ok(base * (-cutoff_decay * excess).exp())
            }
        }
        DipoleShape::Table { table, .. } => {
            table.mu_eg.get(&n).map(|&v| base * v).ok_or(Error::TableMissingChannel { n })
        }
    }
}

/// Bound-bound element `μ_b`.
pub fn bound_dipole(model: &DipoleModel) -> C64 {
    match &model.shape {
        DipoleShape::Table { table, .. } => table.mu_b.unwrap_or(model.mu_b),
        _ => model.mu_b,
    }
}

/// Resolved dipoles for every channel of a grid, in grid order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelDipoles {
    pub mu_eg: Vec<C64>,
    pub mu_b: C64,
}

impl ChannelDipoles {
    pub fn resolve(model: &DipoleModel, grid: &ModeGrid, derived: &DerivedQuantities) -> Result<Self> {
        let mu_eg = grid
            .channels
            .iter()
            .map(|c| effective_recombination_dipole(model, c.n, derived))
            .collect::<Result<Vec<_>>>()?;
        let mu_b = bound_dipole(model);
        if mu_eg.iter().chain(std::iter::once(&mu_b)).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDipoleModel("non-finite channel dipole".into()));
        }
        Ok(Self { mu_eg, mu_b })
    }
}

/// Rescales the model so that `max_k |χ_c(k)|` equals `target_peak_chi`.
///
/// The factor is split evenly between `mu0` and `mu_b` (each scaled by its
/// square root), so the product `μ_eg μ_b` and hence every χ scales by the
/// full factor.
pub fn calibrate_dipole(
    model: &DipoleModel,
    cfg: &PhysicalConfig,
    grid: &ModeGrid,
    target_peak_chi: f64,
) -> Result<DipoleModel> {
    if !(target_peak_chi > 0.0) || !target_peak_chi.is_finite() {
        return Err(Error::Calibration(format!("target peak chi must be positive, got {target_peak_chi}")));
    }
    let derived = DerivedQuantities::from_config(cfg);
    let dipoles = ChannelDipoles::resolve(model, grid, &derived)?;
    let chi = susceptibilities(cfg, grid, &dipoles, derived.gas_density);
    let peak = chi.peak_chi_c();
    if !(peak > 0.0) {
        return Err(Error::Calibration("all conjugate susceptibilities vanish".into()));
    }
    let root = (target_peak_chi / peak).sqrt();
    let mut out = model.clone();
    out.mu0 *= root;
    out.mu_b *= root;
    if let DipoleShape::Table { table, .. } = &mut out.shape {
        if let Some(mb) = table.mu_b.as_mut() {
            *mb *= root;
        }
    }
    Ok(out)
}

/// Contents of a dipole table file.
///
/// ```text
/// # comment
/// mu_b  1.0  0.0
/// 14    2.5e-3  0.0
/// 16    2.4e-3  1.0e-4
/// ```
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DipoleTable {
    pub mu_b: Option<C64>,
    pub mu_eg: BTreeMap<u32, C64>,
}

impl DipoleTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = DipoleTable::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("dipole table line {}: `{raw}`", lineno + 1));
            if fields.len() != 3 {
                return Err(bad());
            }
            let re: f64 = fields[1].parse().map_err(|_| bad())?;
            let im: f64 = fields[2].parse().map_err(|_| bad())?;
            let value = C64::new(re, im);
            if fields[0] == "mu_b" {
                if table.mu_b.replace(value).is_some() {
                    return Err(Error::Parse(format!("dipole table line {}: duplicate mu_b", lineno + 1)));
                }
            } else {
                let n: u32 = fields[0].parse().map_err(|_| bad())?;
                if table.mu_eg.insert(n, value).is_some() {
                    return Err(Error::Parse(format!("dipole table line {}: duplicate n = {n}", lineno + 1)));
                }
            }
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Serializes with 17 significant digits, so `parse(render())` is exact.
    pub fn render(&self) -> String {
        let mut out = String::from("# n  re(mu_eg)  im(mu_eg)\n");
        if let Some(mb) = self.mu_b {
            let _ = writeln!(out, "mu_b {:.16e} {:.16e}", mb.re, mb.im);
        }
        for (n, v) in &self.mu_eg {
            let _ = writeln!(out, "{n} {:.16e} {:.16e}", v.re, v.im);
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::EV;
    use crate::modes::build_mode_grid;
    use crate::params::fixtures::operating_point;
    use proptest::prelude::*;

    fn derived_at(ip_ev: f64) -> DerivedQuantities {
        let mut cfg = operating_point();
        cfg.ground_energy = -ip_ev * EV;
        cfg.ionization_potential = ip_ev * EV;
        DerivedQuantities::from_config(&cfg)
    }

    #[test]
    fn constant_model_is_flat() {
        let model = DipoleModel::constant(C64::new(2.0, 1.0), C64::new(1.0, 0.0));
        let d = derived_at(12.13);
        for n in [14, 40, 400] {
            assert_eq!(effective_recombination_dipole(&model, n, &d).unwrap(), C64::new(2.0, 1.0));
        }
    }

    #[test]
    fn intensity_scale_is_one_at_reference() {
        let model = DipoleModel::constant(C64::new(1.0, 0.0), C64::new(1.0, 0.0)).with_intensity_scaling(3.0);
        assert_eq!(model.intensity_scale(DEFAULT_REFERENCE_INTENSITY), 1.0);
        let s = model.intensity_scale(4.0 * DEFAULT_REFERENCE_INTENSITY);
        assert!((s - 8.0).abs() < 1e-12);
    }

    #[test]
    fn plateau_cutoff_attenuation() {
        // Ip = 15.76 eV at 1240 nm, 5e14 W/cm²: cutoff ≈ 243 eV.
        let d = derived_at(15.76);
        let cutoff_ev = d.cutoff_energy / EV;
        assert!((cutoff_ev - 243.0).abs() < 0.5, "{cutoff_ev}");
        let decay = 0.3;
        let model = DipoleModel {
            shape: DipoleShape::PlateauCutoff { cutoff_decay: decay },
            ..DipoleModel::constant(C64::new(1.0, 0.0), C64::new(1.0, 0.0))
        };
        let at_243 = effective_recombination_dipole(&model, 243, &d).unwrap();
        assert_eq!(at_243, C64::new(1.0, 0.0));
        let at_250 = effective_recombination_dipole(&model, 250, &d).unwrap();
        let excess = (250.0 * d.pump_photon_energy - d.cutoff_energy) / d.pump_photon_energy;
        assert!((excess - 7.0).abs() < 0.5, "{excess}");
        assert!((at_250.re - (-decay * excess).exp()).abs() < 1e-15);
    }

    #[test]
    fn plateau_cutoff_is_continuous_at_the_boundary() {
        let d = derived_at(15.76);
        let model = DipoleModel {
            shape: DipoleShape::PlateauCutoff { cutoff_decay: 2.0 },
            ..DipoleModel::constant(C64::new(1.0, 0.0), C64::new(1.0, 0.0))
        };
        // Move the cutoff exactly onto a channel energy.
        let mut at_boundary = d;
        at_boundary.cutoff_energy = 240.0 * d.pump_photon_energy;
        let v = effective_recombination_dipole(&model, 240, &at_boundary).unwrap();
        assert_eq!(v, C64::new(1.0, 0.0));
        let just_above = effective_recombination_dipole(&model, 241, &at_boundary).unwrap();
        assert!((just_above.re - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn table_lookup_and_missing_channel() {
        let table = DipoleTable::parse("# test\nmu_b 0.5 -0.25\n14 1.0 2.0\n16 3.0 0.0\n").unwrap();
        let model = DipoleModel {
            shape: DipoleShape::Table { path: "t.dat".into(), table },
            ..DipoleModel::constant(C64::new(1.0, 0.0), C64::new(9.0, 9.0))
        };
        let d = derived_at(12.13);
        assert_eq!(effective_recombination_dipole(&model, 14, &d).unwrap(), C64::new(1.0, 2.0));
        assert!(matches!(effective_recombination_dipole(&model, 18, &d), Err(Error::TableMissingChannel { n: 18 })));
        assert_eq!(bound_dipole(&model), C64::new(0.5, -0.25));
    }

    #[test]
    fn table_parse_errors() {
        assert!(DipoleTable::parse("14 1.0").is_err());
        assert!(DipoleTable::parse("x 1.0 2.0").is_err());
        assert!(DipoleTable::parse("14 1 0\n14 2 0").is_err());
    }

    #[test]
    fn table_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dipoles.dat");
        let mut table = DipoleTable { mu_b: Some(C64::new(0.1, 1.0 / 3.0)), ..Default::default() };
        table.mu_eg.insert(14, C64::new(std::f64::consts::PI, -1e-300));
        table.save(&path).unwrap();
        assert_eq!(DipoleTable::load(&path).unwrap(), table);
    }

    proptest! {
        #[test]
        fn table_render_parse_is_exact(
            entries in proptest::collection::btree_map(1u32..500, (-1e3f64..1e3, -1e3f64..1e3), 0..20),
            mb in (-1e3f64..1e3, -1e3f64..1e3),
        ) {
            let table = DipoleTable {
                mu_b: Some(C64::new(mb.0, mb.1)),
                mu_eg: entries.into_iter().map(|(n, (re, im))| (n, C64::new(re, im))).collect(),
            };
            prop_assert_eq!(DipoleTable::parse(&table.render()).unwrap(), table);
        }
    }

    #[test]
    fn calibration_hits_target() {
        let cfg = operating_point();
        let grid = build_mode_grid(&cfg).unwrap();
        let model = DipoleModel::constant(C64::new(1e-50, 0.0), C64::new(1.0, 0.0));
        let derived = DerivedQuantities::from_config(&cfg);
        for target in [1e-6, 3.7e-4] {
            let cal = calibrate_dipole(&model, &cfg, &grid, target).unwrap();
            let dip = ChannelDipoles::resolve(&cal, &grid, &derived).unwrap();
            let peak = susceptibilities(&cfg, &grid, &dip, derived.gas_density).peak_chi_c();
            assert!((peak / target - 1.0).abs() < 1e-10, "{peak} vs {target}");
        }
    }

    #[test]
    fn doubling_target_scales_mu0_by_sqrt_two() {
        let cfg = operating_point();
        let grid = build_mode_grid(&cfg).unwrap();
        let model = DipoleModel::constant(C64::new(1e-50, 0.0), C64::new(1.0, 0.0));
        let a = calibrate_dipole(&model, &cfg, &grid, 1e-6).unwrap();
        let b = calibrate_dipole(&model, &cfg, &grid, 2e-6).unwrap();
        assert!((b.mu0.norm() / a.mu0.norm() - 2f64.sqrt()).abs() < 1e-12);
        let product = |m: &DipoleModel| (m.mu0 * m.mu_b).norm();
        assert!((product(&b) / product(&a) - 2.0).abs() < 1e-12);
    }
}
