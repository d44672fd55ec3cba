//! Shared inputs for the benchmarks.

use twinbeam_core::sampling::{random_kappas, rng};
use twinbeam_core::susceptibility::CouplingCoefficients;
use twinbeam_core::{ConfigFile, Simulation};

/// Reproducible couplings for `n` channels with `|κ| z ≤ 3` at `z = 1`.
pub fn kappas(n: usize, seed: u64) -> CouplingCoefficients {
    random_kappas(&mut rng(seed), n, 1.0, 3.0)
}

/// Simulation of the built-in operating point.
pub fn default_simulation() -> (ConfigFile, Simulation) {
    let file = ConfigFile::builtin();
    let sim = Simulation::from_run(&file.resolve().expect("built-in config resolves"));
    (file, sim)
}
