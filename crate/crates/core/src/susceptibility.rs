//! Effective third-order susceptibilities and the coupling constants of the
//! coupled-mode equations.
//!
//! For channel `n` (conjugate `ω_c = nω_pu - ω_pr`):
//!
//! ```text
//! χ_pr = (-i/ħ) (-ρ μ_eg(nω_pu) μ_b) / (ω_eg - ω_pr - iγ)
//! χ_c  = (-i/ħ) (-ρ μ_eg(nω_pu) μ_b) / (ω_eg - ω_c  - iγ)
//! κ_pr = (i k_pr / 2) χ_pr,   κ_c = (i k_c / 2) χ_c
//! ```
//!
//! The energy-conservation delta is built into the grid, so each conjugate
//! couples to the probe through exactly one `n`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::constants::HBAR;
use crate::dipole::ChannelDipoles;
use crate::modes::ModeGrid;
use crate::params::PhysicalConfig;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Medium parameters entering the resonance denominators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    pub omega_eg: f64,
    pub gamma: f64,
    pub density: f64,
}

impl Medium {
    pub fn new(cfg: &PhysicalConfig, density: f64) -> Self {
        Self { omega_eg: cfg.omega_eg(), gamma: cfg.dephasing_gamma, density }
    }

    /// `(-i/ħ) (-ρ μ_eg μ_b) / (ω_eg - ω - iγ)`.
    fn response(&self, mu_eg: C64, mu_b: C64, omega: f64) -> C64 {
        let numerator = -I / HBAR * (-self.density * mu_eg * mu_b);
        numerator / C64::new(self.omega_eg - omega, -self.gamma)
    }
}

/// χ_pr for channel index `k` (0-based).
pub fn chi_pr_eff(grid: &ModeGrid, dipoles: &ChannelDipoles, medium: &Medium, k: usize) -> C64 {
    medium.response(dipoles.mu_eg[k], dipoles.mu_b, grid.omega_pr)
}

/// χ_c for channel index `k` (0-based).
pub fn chi_c_eff(grid: &ModeGrid, dipoles: &ChannelDipoles, medium: &Medium, k: usize) -> C64 {
    medium.response(dipoles.mu_eg[k], dipoles.mu_b, grid.channels[k].omega_c)
}

/// Per-channel susceptibilities, in grid order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SusceptibilityPair {
    pub n: Vec<u32>,
    pub chi_pr: Vec<C64>,
    pub chi_c: Vec<C64>,
}

impl SusceptibilityPair {
    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    /// `max_k |χ_c(k)|`.
    pub fn peak_chi_c(&self) -> f64 {
        self.chi_c.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

pub fn susceptibilities(
    cfg: &PhysicalConfig,
    grid: &ModeGrid,
    dipoles: &ChannelDipoles,
    density: f64,
) -> SusceptibilityPair {
    let medium = Medium::new(cfg, density);
    let k_range = 0..grid.num_channels();
    SusceptibilityPair {
        n: grid.channels.iter().map(|c| c.n).collect(),
        chi_pr: k_range.clone().map(|k| chi_pr_eff(grid, dipoles, &medium, k)).collect(),
        chi_c: k_range.map(|k| chi_c_eff(grid, dipoles, &medium, k)).collect(),
    }
}

/// Coupling constants (1/m), in grid order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingCoefficients {
    pub kappa_pr: Vec<C64>,
    pub kappa_c: Vec<C64>,
}

impl CouplingCoefficients {
    pub fn len(&self) -> usize {
        self.kappa_pr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa_pr.is_empty()
    }

    pub fn zeros(n: usize) -> Self {
        Self { kappa_pr: vec![C64::new(0.0, 0.0); n], kappa_c: vec![C64::new(0.0, 0.0); n] }
    }
}

/// `κ = (i k / 2) χ` with vacuum wavevectors from the grid.
pub fn kappa(grid: &ModeGrid, chi: &SusceptibilityPair) -> CouplingCoefficients {
    let half_i = 0.5 * I;
    CouplingCoefficients {
        kappa_pr: chi.chi_pr.iter().map(|&c| half_i * grid.k_pr * c).collect(),
        kappa_c: chi.chi_c.iter().zip(&grid.channels).map(|(&c, ch)| half_i * ch.k_c * c).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::SPEED_OF_LIGHT;
    use crate::modes::{build_mode_grid, Channel};
    use crate::params::fixtures::operating_point;

    fn flat(grid: &ModeGrid, mu: C64, mu_b: C64) -> ChannelDipoles {
        ChannelDipoles { mu_eg: vec![mu; grid.num_channels()], mu_b }
    }

    fn medium() -> Medium {
        Medium::new(&operating_point(), 1.2e25)
    }

    #[test]
    fn zero_bound_dipole_gives_zero() {
        let grid = build_mode_grid(&operating_point()).unwrap();
        let d = flat(&grid, C64::new(1e-50, 0.0), C64::new(0.0, 0.0));
        assert_eq!(chi_pr_eff(&grid, &d, &medium(), 0), C64::new(0.0, 0.0));
        let d = flat(&grid, C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        assert_eq!(chi_c_eff(&grid, &d, &medium(), 0), C64::new(0.0, 0.0));
    }

    #[test]
    fn probe_resonance_is_maximal() {
        let mut grid = build_mode_grid(&operating_point()).unwrap();
        let d = flat(&grid, C64::new(1e-50, 0.0), C64::new(1.0, 0.0));
        let m = medium();
        grid.omega_pr = m.omega_eg;
        let on = chi_pr_eff(&grid, &d, &m, 0);
        // On resonance: (-i/ħ)(-ρμμ_b)/(-iγ) = -ρμμ_b/(ħγ), real.
        let expected = -m.density * 1e-50 / (HBAR * m.gamma);
        assert!((on.re / expected - 1.0).abs() < 1e-14 && on.im.abs() < 1e-14 * on.re.abs());
        for detune in [1e5, 1e8, 1e11] {
            grid.omega_pr = m.omega_eg + detune;
            assert!(chi_pr_eff(&grid, &d, &m, 0).norm() < on.norm());
        }
    }

    #[test]
    fn conjugate_peak_is_nearest_resonance() {
        let mut cfg = operating_point();
        cfg.channel_orders = (14..60).step_by(2).collect();
        let grid = build_mode_grid(&cfg).unwrap();
        let d = flat(&grid, C64::new(1e-50, 0.0), C64::new(1.0, 0.0));
        let chi = susceptibilities(&cfg, &grid, &d, 1.2e25);
        let argmax = (0..chi.len()).max_by(|&a, &b| chi.chi_c[a].norm().total_cmp(&chi.chi_c[b].norm())).unwrap();
        let nearest = (0..grid.num_channels())
            .min_by(|&a, &b| {
                let da = (grid.channels[a].omega_c - cfg.omega_eg()).abs();
                let db = (grid.channels[b].omega_c - cfg.omega_eg()).abs();
                da.total_cmp(&db)
            })
            .unwrap();
        assert_eq!(argmax, nearest);
        assert_eq!(grid.channels[argmax].n, 14);
    }

    #[test]
    fn exchange_symmetry() {
        let grid = build_mode_grid(&operating_point()).unwrap();
        let d = flat(&grid, C64::new(1e-50, 0.3e-50), C64::new(1.0, 0.0));
        let m = medium();
        let mut swapped = grid.clone();
        swapped.omega_pr = grid.channels[0].omega_c;
        swapped.channels[0].omega_c = grid.omega_pr;
        assert_eq!(chi_pr_eff(&grid, &d, &m, 0), chi_c_eff(&swapped, &d, &m, 0));
        assert_eq!(chi_c_eff(&grid, &d, &m, 0), chi_pr_eff(&swapped, &d, &m, 0));
    }

    #[test]
    fn degenerate_point_has_equal_magnitudes() {
        let mut grid = build_mode_grid(&operating_point()).unwrap();
        let half = 7.0 * grid.omega_pu;
        grid.omega_pr = half;
        grid.channels[0].omega_c = half;
        let d = flat(&grid, C64::new(1e-50, 0.0), C64::new(1.0, 0.0));
        let m = medium();
        assert_eq!(chi_pr_eff(&grid, &d, &m, 0).norm(), chi_c_eff(&grid, &d, &m, 0).norm());
    }

    #[test]
    fn linear_in_density_and_dipole_product() {
        let cfg = operating_point();
        let grid = build_mode_grid(&cfg).unwrap();
        let d1 = flat(&grid, C64::new(1e-50, 2e-51), C64::new(0.7, 0.1));
        let d2 = flat(&grid, C64::new(2e-50, 4e-51), C64::new(0.7, 0.1));
        let a = susceptibilities(&cfg, &grid, &d1, 1e25);
        let b = susceptibilities(&cfg, &grid, &d2, 1e25);
        let c = susceptibilities(&cfg, &grid, &d1, 2e25);
        for k in 0..a.len() {
            for (x, y) in [(a.chi_c[k], b.chi_c[k]), (a.chi_pr[k], b.chi_pr[k]), (a.chi_c[k], c.chi_c[k])] {
                assert!((y / x - 2.0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn resonance_full_width_is_two_gamma() {
        let cfg = operating_point();
        let grid0 = build_mode_grid(&cfg).unwrap();
        let d = flat(&grid0, C64::new(1e-50, 0.0), C64::new(1.0, 0.0));
        let m = medium();
        let mut grid = grid0.clone();
        let intensity = |omega_c: f64, g: &mut ModeGrid| {
            g.channels[0].omega_c = omega_c;
            chi_c_eff(g, &d, &m, 0).norm_sqr()
        };
        let peak = intensity(m.omega_eg, &mut grid);
        let step = m.gamma * 1e-3;
        let samples: Vec<f64> = (-5000..=5000).map(|i| m.omega_eg + i as f64 * step).collect();
        let above: Vec<&f64> = samples.iter().filter(|&&w| intensity(w, &mut grid) >= 0.5 * peak).collect();
        let fwhm = **above.last().unwrap() - **above.first().unwrap();
        assert!((fwhm / (2.0 * m.gamma) - 1.0).abs() < 0.01, "fwhm {fwhm}");
    }

    #[test]
    fn kappa_definitions() {
        let grid = build_mode_grid(&operating_point()).unwrap();
        let chi = SusceptibilityPair {
            n: grid.channels.iter().map(|c| c.n).collect(),
            chi_pr: vec![C64::new(1e-6, 2e-7); grid.num_channels()],
            chi_c: vec![C64::new(-3e-6, 1e-7); grid.num_channels()],
        };
        let kap = kappa(&grid, &chi);
        for k in 0..grid.num_channels() {
            let want_c = C64::new(0.0, grid.channels[k].omega_c / SPEED_OF_LIGHT / 2.0) * chi.chi_c[k];
            assert!((kap.kappa_c[k] - want_c).norm() <= 1e-15 * want_c.norm());
            let want_pr = C64::new(0.0, grid.omega_pr / SPEED_OF_LIGHT / 2.0) * chi.chi_pr[k];
            assert!((kap.kappa_pr[k] - want_pr).norm() <= 1e-15 * want_pr.norm());
        }
        let zero = SusceptibilityPair { chi_pr: vec![C64::new(0.0, 0.0); 4], chi_c: vec![C64::new(0.0, 0.0); 4], ..chi };
        assert!(kappa(&grid, &zero).kappa_c.iter().all(|k| k.norm() == 0.0));
    }

    #[test]
    fn doubling_conjugate_frequency_doubles_kappa() {
        let mut grid = build_mode_grid(&operating_point()).unwrap();
        grid.channels.truncate(1);
        let chi = SusceptibilityPair { n: vec![14], chi_pr: vec![C64::new(1.0, 0.0)], chi_c: vec![C64::new(1e-6, 1e-6)] };
        let a = kappa(&grid, &chi).kappa_c[0];
        let c = grid.channels[0];
        grid.channels[0] = Channel { omega_c: 2.0 * c.omega_c, k_c: 2.0 * c.omega_c / SPEED_OF_LIGHT, ..c };
        let b = kappa(&grid, &chi).kappa_c[0];
        assert!((b.norm() / a.norm() - 2.0).abs() < 1e-15);
    }
}
