//! Probe and conjugate mode grid.

use serde::Serialize;

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};
use crate::params::PhysicalConfig;

/// One conjugate channel: `n` pump photons feed the pair `(ω_pr, ω_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Channel {
    pub n: u32,
    pub omega_c: f64,
    pub k_c: f64,
}

impl Channel {
    /// Conjugate harmonic order `ω_c / ω_pu` (an integer for integer `n`, `q`).
    pub fn conjugate_order(&self, probe_order: u32) -> u32 {
        self.n - probe_order
    }
}

/// The probe mode plus every conjugate mode allowed by energy conservation
/// and the above-threshold condition. Mode index 0 is the probe; mode `j`
/// (1-based) is `channels[j - 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeGrid {
    pub omega_pu: f64,
    pub probe_order: u32,
    pub omega_pr: f64,
    pub k_pr: f64,
    pub channels: Vec<Channel>,
}

impl ModeGrid {
    /// Number of coupled modes, `N + 1`.
    pub fn dimension(&self) -> usize {
        self.channels.len() + 1
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Angular frequency of mode `m` (0 = probe).
    pub fn omega(&self, mode: usize) -> f64 {
        if mode == 0 {
            self.omega_pr
        } else {
            self.channels[mode - 1].omega_c
        }
    }

    /// Vacuum wavevector of mode `m` (0 = probe).
    pub fn wavevector(&self, mode: usize) -> f64 {
        if mode == 0 {
            self.k_pr
        } else {
            self.channels[mode - 1].k_c
        }
    }

    /// 0-based channel index of pump-photon number `n`.
    pub fn channel_index(&self, n: u32) -> Result<usize> {
        self.channels.iter().position(|c| c.n == n).ok_or(Error::UnknownChannel { n })
    }

    /// Re-checks `ω_c + ω_pr = n ω_pu` for every channel to one ulp.
    pub fn energy_conservation_holds(&self) -> bool {
        self.channels.iter().all(|c| {
            let target = c.n as f64 * self.omega_pu;
            (c.omega_c + self.omega_pr - target).abs() <= ulp(target)
        })
    }
}

fn ulp(x: f64) -> f64 {
    let x = x.abs();
    f64::from_bits(x.to_bits() + 1) - x
}

/// Builds the mode grid of `cfg`. Channel orders are filtered on
/// `n ħω_pu > Ip` and `n > q`, de-duplicated and sorted ascending.
pub fn build_mode_grid(cfg: &PhysicalConfig) -> Result<ModeGrid> {
    let omega_pu = cfg.omega_pump();
    let photon = cfg.pump_photon_energy();
    let q = cfg.probe_order;
    let omega_pr = q as f64 * omega_pu;

    let mut orders: Vec<u32> = cfg
        .channel_orders
        .iter()
        .copied()
        .filter(|&n| n > q && n as f64 * photon > cfg.ionization_potential)
        .collect();
    orders.sort_unstable();
    orders.dedup();
    if q == 0 || orders.is_empty() {
        return Err(Error::EmptyGrid { probe_order: q });
    }

    let channels = orders
        .into_iter()
        .map(|n| {
            let omega_c = n as f64 * omega_pu - omega_pr;
            Channel { n, omega_c, k_c: omega_c / SPEED_OF_LIGHT }
        })
        .collect();
    let grid = ModeGrid { omega_pu, probe_order: q, omega_pr, k_pr: omega_pr / SPEED_OF_LIGHT, channels };
    debug_assert!(grid.energy_conservation_holds());
    Ok(grid)
}
