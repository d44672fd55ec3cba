//! Physical configuration of the wave-mixing cell and quantities derived from it.
//!
//! Everything here is SI. Conversion from eV / nm / bar happens once, in
//! [`crate::config`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::{
    BOLTZMANN, CUTOFF_COEFFICIENT, ELECTRON_MASS, ELEMENTARY_CHARGE, EPSILON_0, HBAR, SPEED_OF_LIGHT,
};

/// Relative tolerance for the `Ip = -Eg` convention check.
const IP_TOLERANCE: f64 = 1e-12;

/// Experiment parameters. Immutable once validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    /// Pump wavelength, m.
    pub pump_wavelength: f64,
    /// Pump intensity, W/m².
    pub pump_intensity: f64,
    /// Gas pressure, Pa.
    pub pressure: f64,
    /// Gas temperature, K.
    pub temperature: f64,
    /// Propagation length through the medium, m.
    pub cell_length: f64,
    /// Dephasing rate of the e–g coherence, 1/s.
    pub dephasing_gamma: f64,
    /// Ground-state energy, J (negative for a bound state).
    pub ground_energy: f64,
    /// Excited-state energy, J (negative for a bound state).
    pub excited_energy: f64,
    /// Ionization potential, J. Must equal `-ground_energy`.
    pub ionization_potential: f64,
    /// Harmonic order of the seeded probe, `ω_pr = q ω_pu`.
    pub probe_order: u32,
    /// Pump-photon numbers `n` of the wave-mixing channels, `ω_c = n ω_pu - ω_pr`.
    pub channel_orders: Vec<u32>,
}

/// One broken invariant of a [`PhysicalConfig`].
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigViolation {
    NonPositiveParameter { name: &'static str, value: f64 },
    ExcitedNotAboveGround { ground: f64, excited: f64 },
    IonizationPotentialMismatch { ionization_potential: f64, ground: f64 },
    ZeroProbeOrder,
    EmptyChannelList,
    BelowThresholdChannel { n: u32, photon_energy: f64, ionization_potential: f64 },
    NegativeConjugateFrequency { n: u32, probe_order: u32 },
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ConfigViolation::*;
        match self {
            NonPositiveParameter { name, value } => {
                write!(f, "NonPositiveParameter: {name} = {value} must be > 0")
            }
            ExcitedNotAboveGround { ground, excited } => write!(
                f,
                "excited energy {excited:e} J must lie above ground energy {ground:e} J"
            ),
            IonizationPotentialMismatch { ionization_potential, ground } => write!(
                f,
                "ionization potential {ionization_potential:e} J differs from -Eg = {:e} J",
                -ground
            ),
            ZeroProbeOrder => write!(f, "NonPositiveParameter: probe order must be >= 1"),
            EmptyChannelList => write!(f, "channel list is empty"),
            BelowThresholdChannel { n, photon_energy, ionization_potential } => write!(
                f,
                "BelowThresholdChannel: n = {n} gives {:.4} eV <= Ip = {:.4} eV",
                photon_energy / crate::constants::EV,
                ionization_potential / crate::constants::EV
            ),
            NegativeConjugateFrequency { n, probe_order } => write!(
                f,
                "NegativeConjugateFrequency: n = {n} does not exceed probe order {probe_order}"
            ),
        }
    }
}

impl PhysicalConfig {
    /// Pump angular frequency `2πc/λ`.
    pub fn omega_pump(&self) -> f64 {
        2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / self.pump_wavelength
    }

    /// Pump photon energy `ħω_pu`, J.
    pub fn pump_photon_energy(&self) -> f64 {
        HBAR * self.omega_pump()
    }

    /// e–g transition frequency `(Ee - Eg)/ħ`.
    pub fn omega_eg(&self) -> f64 {
        (self.excited_energy - self.ground_energy) / HBAR
    }

    /// Checks every invariant and returns the config unchanged, or the full
    /// list of violations.
    pub fn validate(self) -> Result<Self, Vec<ConfigViolation>> {
        let mut errors = Vec::new();
        let positive = [
            ("pump_wavelength", self.pump_wavelength),
            ("pump_intensity", self.pump_intensity),
            ("pressure", self.pressure),
            ("temperature", self.temperature),
            ("cell_length", self.cell_length),
            ("dephasing_gamma", self.dephasing_gamma),
            ("ionization_potential", self.ionization_potential),
        ];
        for (name, value) in positive {
            // NaN fails this comparison too.
            if !(value > 0.0) || !value.is_finite() {
                errors.push(ConfigViolation::NonPositiveParameter { name, value });
            }
        }
        if !(self.excited_energy > self.ground_energy) {
            errors.push(ConfigViolation::ExcitedNotAboveGround {
                ground: self.ground_energy,
                excited: self.excited_energy,
            });
        }
        let ip_err = (self.ionization_potential + self.ground_energy).abs();
        if !(ip_err <= IP_TOLERANCE * self.ionization_potential.abs()) {
            errors.push(ConfigViolation::IonizationPotentialMismatch {
                ionization_potential: self.ionization_potential,
                ground: self.ground_energy,
            });
        }
        if self.probe_order == 0 {
            errors.push(ConfigViolation::ZeroProbeOrder);
        }
        if self.channel_orders.is_empty() {
            errors.push(ConfigViolation::EmptyChannelList);
        }
        if self.pump_wavelength > 0.0 && self.pump_wavelength.is_finite() {
            let photon = self.pump_photon_energy();
            for &n in &self.channel_orders {
                let energy = n as f64 * photon;
                if !(energy > self.ionization_potential) {
                    errors.push(ConfigViolation::BelowThresholdChannel {
                        n,
                        photon_energy: energy,
                        ionization_potential: self.ionization_potential,
                    });
                }
                if n <= self.probe_order {
                    errors.push(ConfigViolation::NegativeConjugateFrequency {
                        n,
                        probe_order: self.probe_order,
                    });
                }
            }
        }
        if errors.is_empty() {
            Ok(self)
        } else {
            Err(errors)
        }
    }
}

/// Free-function form of [`PhysicalConfig::validate`].
pub fn validate_config(cfg: PhysicalConfig) -> Result<PhysicalConfig, Vec<ConfigViolation>> {
    cfg.validate()
}

/// Ideal-gas number density `P / (k_B T)`, 1/m³.
pub fn gas_density(pressure: f64, temperature: f64) -> f64 {
    pressure / (BOLTZMANN * temperature)
}

/// Peak field amplitude `E0 = sqrt(2I / (ε0 c))` of a linearly polarized wave, V/m.
pub fn field_amplitude(intensity: f64) -> f64 {
    (2.0 * intensity / (EPSILON_0 * SPEED_OF_LIGHT)).sqrt()
}

/// Cycle-averaged quiver energy `e² E0² / (4 m_e ω²)`, J.
pub fn ponderomotive_energy(intensity: f64, wavelength: f64) -> f64 {
    let e0 = field_amplitude(intensity);
    let omega = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / wavelength;
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE * e0 * e0 / (4.0 * ELECTRON_MASS * omega * omega)
}

/// Secondary quantities computed once from a [`PhysicalConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedQuantities {
    /// Atom number density, 1/m³.
    pub gas_density: f64,
    /// Ponderomotive energy, J.
    pub ponderomotive_energy: f64,
    /// Harmonic cutoff `Ip + 3.17 Up`, J.
    pub cutoff_energy: f64,
    /// Pump field amplitude, V/m.
    pub field_amplitude: f64,
    /// Pump intensity the quantities were derived at, W/m².
    pub pump_intensity: f64,
    /// Pump photon energy, J.
    pub pump_photon_energy: f64,
}

impl DerivedQuantities {
    pub fn from_config(cfg: &PhysicalConfig) -> Self {
        let up = ponderomotive_energy(cfg.pump_intensity, cfg.pump_wavelength);
        Self {
            gas_density: gas_density(cfg.pressure, cfg.temperature),
            ponderomotive_energy: up,
            cutoff_energy: cfg.ionization_potential + CUTOFF_COEFFICIENT * up,
            field_amplitude: field_amplitude(cfg.pump_intensity),
            pump_intensity: cfg.pump_intensity,
            pump_photon_energy: cfg.pump_photon_energy(),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::operating_point;
    use super::*;
    use crate::constants::EV;

    #[test]
    fn operating_point_is_valid() {
        assert!(operating_point().validate().is_ok());
    }

    #[test]
    fn zero_pressure_is_rejected() {
        let mut cfg = operating_point();
        cfg.pressure = 0.0;
        let errs = cfg.validate().unwrap_err();
        assert_eq!(errs, vec![ConfigViolation::NonPositiveParameter { name: "pressure", value: 0.0 }]);
    }

    #[test]
    fn below_threshold_channel_is_rejected() {
        // ħω_pu = 1 eV exactly.
        let mut cfg = operating_point();
        cfg.pump_wavelength = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT * HBAR / EV;
        cfg.ground_energy = -15.76 * EV;
        cfg.ionization_potential = 15.76 * EV;
        cfg.excited_energy = -4.0 * EV;
        cfg.channel_orders = vec![4];
        let errs = cfg.validate().unwrap_err();
        assert!(errs.iter().any(|e| matches!(e, ConfigViolation::BelowThresholdChannel { n: 4, .. })));
    }

    #[test]
    fn all_violations_are_collected() {
        let mut cfg = operating_point();
        cfg.pressure = -1.0;
        cfg.temperature = 0.0;
        cfg.excited_energy = cfg.ground_energy - EV;
        cfg.channel_orders = vec![2];
        let errs = cfg.validate().unwrap_err();
        assert!(errs.len() >= 5, "{errs:?}");
    }

    #[test]
    fn ionization_potential_must_match_ground_energy() {
        let mut cfg = operating_point();
        cfg.ionization_potential *= 1.0 + 1e-9;
        let errs = cfg.validate().unwrap_err();
        assert!(matches!(errs[0], ConfigViolation::IonizationPotentialMismatch { .. }));
    }

    #[test]
    fn pump_photon_energy_at_1240nm() {
        let e = operating_point().pump_photon_energy() / EV;
        assert!((e / 0.99987 - 1.0).abs() < 1e-4, "{e}");
    }

    #[test]
    fn gas_density_values() {
        let rho = gas_density(0.5e5, 300.0);
        assert!((rho / 1.2072e25 - 1.0).abs() < 1e-4, "{rho}");
        let loschmidt = gas_density(1e5, 273.15);
        assert!((loschmidt / 2.6517e25 - 1.0).abs() < 1e-4, "{loschmidt}");
        assert_eq!(gas_density(1e5, 300.0) / gas_density(0.5e5, 300.0), 2.0);
    }

    #[test]
    fn ponderomotive_energy_values() {
        let up = ponderomotive_energy(5e18, 1240e-9);
        assert!((up / 1.148e-17 - 1.0).abs() < 5e-3, "{up}");
        assert!((up / EV / 71.7 - 1.0).abs() < 5e-3);
        assert_eq!(ponderomotive_energy(0.0, 1240e-9), 0.0);
        let ratio = ponderomotive_energy(2e19, 1240e-9) / up;
        assert!((ratio - 4.0).abs() < 1e-14);
    }

    #[test]
    fn derived_quantities_are_positive() {
        let d = DerivedQuantities::from_config(&operating_point());
        assert!(d.gas_density > 0.0 && d.ponderomotive_energy > 0.0 && d.field_amplitude > 0.0);
        assert!(d.cutoff_energy > operating_point().ionization_potential);
    }
}
