//! Simulation of relative-intensity-squeezed high-harmonic twin beams
//! produced by strong-field four-wave mixing in a dilute gas.
//!
//! The pipeline runs
//! [`params`] → [`modes`] → [`dipole`] → [`susceptibility`] →
//! [`propagation`] → [`moments`] / [`wigner`], with [`pipeline`] wiring the
//! stages together and [`sweep`], [`output`], [`validation`] backing the
//! command-line front end.

pub mod config;
pub mod constants;
pub mod dipole;
pub mod error;
pub mod modes;
pub mod moments;
pub mod output;
pub mod params;
pub mod pipeline;
pub mod propagation;
pub mod sampling;
pub mod susceptibility;
pub mod sweep;
pub mod validation;
pub mod wigner;

pub use config::{ConfigFile, RunConfig, SweepSpec, SweepVariable};
pub use dipole::{ChannelDipoles, DipoleModel, DipoleShape, DipoleTable};
pub use error::{Error, Result};
pub use modes::{build_mode_grid, Channel, ModeGrid};
pub use moments::{InputState, Normalization, OperatorCombo, SqueezeReport};
pub use output::{OutputFormat, RunManifest};
pub use params::{validate_config, ConfigViolation, DerivedQuantities, PhysicalConfig};
pub use pipeline::{peak_chi_for_snf_db, Simulation};
pub use propagation::{CouplingMatrix, TransferMatrix, TransferMethod};
pub use susceptibility::{CouplingCoefficients, SusceptibilityPair};
pub use wigner::{QuadraturePoint, WignerGrid};
