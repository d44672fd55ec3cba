//! Photon statistics of the output fields.
//!
//! Output operators are linear combinations of input annihilation and
//! creation operators ([`OperatorCombo`]). Their moments on a coherent probe
//! with vacuum conjugates are evaluated exactly by Wick contraction
//! ([`wick_moment`]); [`fock_expectation`] is an independent brute-force
//! check in a truncated Fock space.

mod combo;
mod fock;
mod noise;
mod wick;

pub use combo::{field_factor, output_operator_combos, InputState, Normalization, OperatorCombo, OutputFields};
pub use fock::{fock_expectation, fock_intensity_moments, DEFAULT_TAIL_LIMIT};
pub use noise::{
    noise_figure, two_mode_analytic, variance_relative_intensity, variance_snl, IntensityMoments, SqueezeReport,
    TwoModeResult,
};
pub use wick::{wick_difference_variance, wick_intensity_moments, wick_moment};
