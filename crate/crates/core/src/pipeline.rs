//! Configuration to squeezing report: mode grid, dipoles, susceptibilities,
//! couplings, propagator and photon statistics.

use num_complex::Complex64 as C64;

use crate::config::{RunConfig, SolverSettings};
use crate::dipole::{calibrate_dipole, ChannelDipoles, DipoleModel};
use crate::error::{Error, Result};
use crate::modes::{build_mode_grid, ModeGrid};
use crate::moments::{
    noise_figure, output_operator_combos, two_mode_analytic, wick_intensity_moments, wick_moment, InputState,
    Normalization, SqueezeReport,
};
use crate::params::{DerivedQuantities, PhysicalConfig};
use crate::propagation::{
    assemble_hmxw, relative_difference, symplectic_residual, transfer, transfer_analytic, transfer_eigen,
    transfer_ode_oracle, CouplingMatrix, TransferMatrix, TransferMethod,
};
use crate::susceptibility::{kappa, susceptibilities, CouplingCoefficients, SusceptibilityPair};

/// Everything needed to run the pipeline for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub physical: PhysicalConfig,
    pub dipole: DipoleModel,
    pub probe_photon_number: f64,
    pub solver: SolverSettings,
}

/// Intermediate products of one propagation.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub grid: ModeGrid,
    pub derived: DerivedQuantities,
    pub dipoles: ChannelDipoles,
    pub chi: SusceptibilityPair,
    pub kappa: CouplingCoefficients,
    pub coupling: CouplingMatrix,
    pub transfer: TransferMatrix,
    /// Relative entrywise distance to a second solver; NaN if that solver failed.
    pub solver_delta: f64,
}

impl Simulation {
    pub fn new(physical: PhysicalConfig, dipole: DipoleModel, probe_photon_number: f64, solver: SolverSettings) -> Self {
        Self { physical, dipole, probe_photon_number, solver }
    }

    /// Uncalibrated simulation of a resolved run configuration.
    pub fn from_run(run: &RunConfig) -> Self {
        Self::new(run.physical.clone(), run.dipole.clone(), run.probe_photon_number, run.solver)
    }

    /// Simulation of a run configuration, with the dipoles rescaled if the
    /// run asks for a calibration.
    pub fn calibrated_from_run(run: &RunConfig) -> Result<Self> {
        let sim = Self::from_run(run);
        match run.calibrate_peak_chi {
            Some(x) => sim.calibrated(x),
            None => Ok(sim),
        }
    }

    /// Copy whose dipoles put the largest `|χ_c|` of the current grid at `peak_chi`.
    pub fn calibrated(&self, peak_chi: f64) -> Result<Self> {
        let grid = build_mode_grid(&self.physical)?;
        let dipole = calibrate_dipole(&self.dipole, &self.physical, &grid, peak_chi)?;
        Ok(Self { dipole, ..self.clone() })
    }

    pub fn with_physical(&self, physical: PhysicalConfig) -> Self {
        Self { physical, ..self.clone() }
    }

    pub fn propagate(&self) -> Result<Propagation> {
        let grid = build_mode_grid(&self.physical)?;
        let derived = DerivedQuantities::from_config(&self.physical);
        let dipoles = ChannelDipoles::resolve(&self.dipole, &grid, &derived)?;
        let chi = susceptibilities(&self.physical, &grid, &dipoles, derived.gas_density);
        let kappa = kappa(&grid, &chi);
        let coupling = assemble_hmxw(&kappa)?;
        let z = self.physical.cell_length;
        let transfer = match self.solver.method {
            TransferMethod::Ode => transfer_ode_oracle(&coupling, z, self.solver.ode_steps),
            method => transfer(&coupling, z, method, self.solver.condition_limit)?,
        };
        let reference = match self.solver.method {
            TransferMethod::Analytic => transfer_eigen(&coupling, z, self.solver.condition_limit).ok(),
            _ => Some(transfer_analytic(&coupling, z)),
        };
        let solver_delta = reference.map_or(f64::NAN, |r| {
            if r.matrix == transfer.matrix {
                0.0
            } else {
                relative_difference(&transfer.matrix, &r.matrix)
            }
        });
        Ok(Propagation { grid, derived, dipoles, chi, kappa, coupling, transfer, solver_delta })
    }

    /// Report for conjugate `k` (0-based) of a finished propagation.
    pub fn report(&self, prop: &Propagation, k: usize) -> Result<SqueezeReport> {
        let grid = &prop.grid;
        if k >= grid.num_channels() {
            return Err(Error::DimensionMismatch { expected: grid.num_channels(), found: k + 1 });
        }
        let state = InputState::from_photon_number(self.probe_photon_number, grid.dimension());
        let unit = output_operator_combos(&prop.transfer, grid, Normalization::Unit)?;
        let moments = wick_intensity_moments(&unit.probe, &unit.conjugate(k), &state)?;
        let var = moments.real_variance()?;
        let var_snl = moments.shot_noise_variance()?;
        let snf = noise_figure(var, var_snl)?;

        let field = output_operator_combos(&prop.transfer, grid, Normalization::Field)?;
        let mean = |a: &crate::moments::OperatorCombo| -> Result<f64> { Ok(wick_moment(&[&a.dagger(), a], &state)?.re) };
        let two_mode =
            two_mode_analytic(prop.kappa.kappa_pr[k], prop.kappa.kappa_c[k], self.physical.cell_length, self.probe_photon_number);
        let channel = &grid.channels[k];
        Ok(SqueezeReport {
            k,
            n: channel.n,
            omega_c_over_pu: channel.omega_c / grid.omega_pu,
            mean_i_pr: mean(&field.probe)?,
            mean_i_ck: mean(&field.conjugate(k))?,
            photons_pr: moments.mean_a.re,
            photons_ck: moments.mean_b.re,
            var,
            var_snl,
            snf_log10: snf,
            snf_db: 10.0 * snf,
            two_mode_snf_log10: two_mode.snf,
            symplectic_residual: symplectic_residual(&prop.transfer, grid)?,
            solver_delta: prop.solver_delta,
        })
    }

    /// Report for the pair with channel `n`.
    pub fn pair(&self, n: u32) -> Result<SqueezeReport> {
        let prop = self.propagate()?;
        let k = prop.grid.channel_index(n)?;
        self.report(&prop, k)
    }

    /// Reports for every channel of the grid, in channel order.
    pub fn reports(&self) -> Result<Vec<SqueezeReport>> {
        let prop = self.propagate()?;
        (0..prop.grid.num_channels()).map(|k| self.report(&prop, k)).collect()
    }

    /// Noise figure of pair `n` with every susceptibility scaled by `factor`.
    fn snf_db_at_scale(&self, n: u32, factor: f64) -> Result<f64> {
        let mut dipole = self.dipole.clone();
        dipole.mu0 *= C64::new(factor, 0.0);
        Self { dipole, ..self.clone() }.pair(n).map(|r| r.snf_db)
    }
}

/// Peak `|χ_c|` at which the pair with channel `n` first reaches
/// `target_db`, scanning upward from weak coupling.
///
/// The noise figure is not monotone in the coupling strength (it turns
/// around and oscillates at strong coupling), so the root is bracketed on
/// the first downward crossing and refined by bisection in `log χ`.
pub fn peak_chi_for_snf_db(sim: &Simulation, n: u32, target_db: f64) -> Result<f64> {
    if !(target_db < 0.0) {
        return Err(Error::Calibration(format!("target noise figure must be negative, got {target_db} dB")));
    }
    let prop = sim.propagate()?;
    let peak = prop.chi.peak_chi_c();
    if !(peak > 0.0) {
        return Err(Error::Calibration("all conjugate susceptibilities vanish".into()));
    }
    let f = |log_scale: f64| -> Result<f64> { Ok(sim.snf_db_at_scale(n, log_scale.exp())? - target_db) };

    let step = 1.25f64.ln();
    let mut lo = (1e-6f64).ln();
    while f(lo)? <= 0.0 {
        lo -= 10.0 * step;
        if lo < -200.0 {
            return Err(Error::Calibration("no weak-coupling starting point above the target".into()));
        }
    }
    let mut hi = lo;
    loop {
        hi += step;
        if f(hi)? <= 0.0 {
            break;
        }
        lo = hi;
        if hi > 60.0 {
            return Err(Error::Calibration(format!("noise figure never reaches {target_db} dB")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(peak * (0.5 * (lo + hi)).exp())
}
