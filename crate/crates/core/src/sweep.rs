//! Noise-figure maps over harmonic pairs and one-variable sweeps.
//!
//! Rows and points are independent tasks run on a rayon pool; results are
//! collected by index, so the output does not depend on the worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigFile, SweepSpec, SweepVariable};
use crate::error::{Error, Result};
use crate::pipeline::Simulation;

/// Runs `f` on a pool with `threads` workers, or the global pool for `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Parse(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// The file with its channel list restricted to orders that can couple to
/// probe order `q`, resolved to SI.
pub fn config_for_probe_order(file: &ConfigFile, q: u32) -> Result<crate::params::PhysicalConfig> {
    let mut file = file.clone();
    file.channels.probe_order = q;
    if let Some(orders) = file.channels.orders.as_mut() {
        orders.retain(|&n| n > q);
        if orders.is_empty() {
            return Err(Error::EmptyGrid { probe_order: q });
        }
    }
    file.physical_config(q)
}

/// `S_NF` (log10) over probe order × conjugate order. `values[i][j]` is NaN
/// where no channel links `probe_orders[i]` and `conjugate_orders[j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseFigureMap {
    pub probe_orders: Vec<u32>,
    pub conjugate_orders: Vec<u32>,
    pub values: Vec<Vec<f64>>,
    /// Rows that produced no result, with the reason.
    pub failed_rows: Vec<(u32, String)>,
}

impl NoiseFigureMap {
    pub fn get(&self, q: u32, c: u32) -> Option<f64> {
        let i = self.probe_orders.iter().position(|&x| x == q)?;
        let j = self.conjugate_orders.iter().position(|&x| x == c)?;
        Some(self.values[i][j])
    }
}

/// Noise-figure map. `sim` supplies the dipoles and solver; its physical
/// config is replaced row by row.
pub fn cmd_map(file: &ConfigFile, sim: &Simulation, probe_orders: &[u32], threads: Option<usize>) -> Result<NoiseFigureMap> {
    let rows: Vec<Result<Vec<(u32, f64)>>> = with_threads(threads, || {
        probe_orders
            .par_iter()
            .map(|&q| {
                let physical = config_for_probe_order(file, q)?;
                let reports = sim.with_physical(physical).reports()?;
                Ok(reports.iter().map(|r| (r.n - q, r.snf_log10)).collect())
            })
            .collect()
    })?;
    let mut conjugate_orders: Vec<u32> =
        rows.iter().filter_map(|r| r.as_ref().ok()).flatten().map(|&(c, _)| c).collect();
    conjugate_orders.sort_unstable();
    conjugate_orders.dedup();
    let mut values = vec![vec![f64::NAN; conjugate_orders.len()]; probe_orders.len()];
    let mut failed_rows = Vec::new();
    for (i, row) in rows.into_iter().enumerate() {
        match row {
            Ok(entries) => {
                for (c, snf) in entries {
                    let j = conjugate_orders.binary_search(&c).expect("collected above");
                    values[i][j] = snf;
                }
            }
            Err(e) => failed_rows.push((probe_orders[i], e.to_string())),
        }
    }
    Ok(NoiseFigureMap { probe_orders: probe_orders.to_vec(), conjugate_orders, values, failed_rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub snf_multimode: f64,
    pub snf_two_mode: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub channel_order: u32,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Points that failed, with the reason.
    pub fn warnings(&self) -> impl Iterator<Item = (f64, &str)> {
        self.rows.iter().filter_map(|r| r.error.as_deref().map(|e| (r.value, e)))
    }
}

/// One row per sweep point, in sweep order. `sim` carries the (already
/// calibrated) dipoles; failed points become NaN rows.
pub fn cmd_sweep(file: &ConfigFile, sim: &Simulation, spec: &SweepSpec, threads: Option<usize>) -> Result<SweepTable> {
    spec.validate()?;
    let values = spec.values();
    let rows = with_threads(threads, || {
        values
            .par_iter()
            .map(|&value| match sweep_point(file, sim, spec, value) {
                Ok((m, t)) => SweepRow { value, snf_multimode: m, snf_two_mode: t, error: None },
                Err(e) => SweepRow { value, snf_multimode: f64::NAN, snf_two_mode: f64::NAN, error: Some(e.to_string()) },
            })
            .collect()
    })?;
    Ok(SweepTable { variable: spec.variable, channel_order: spec.channel_order, rows })
}

fn sweep_point(file: &ConfigFile, sim: &Simulation, spec: &SweepSpec, value: f64) -> Result<(f64, f64)> {
    // A zero-length cell is allowed here: T(0) = I.
    let zero_length = spec.variable == SweepVariable::CellLength && value == 0.0;
    let point = if zero_length { file.with_sweep_value(spec.variable, 1.0) } else { file.with_sweep_value(spec.variable, value) };
    let mut physical = config_for_probe_order(&point, point.channels.probe_order)?;
    if zero_length {
        physical.cell_length = 0.0;
    }
    let report = sim.with_physical(physical).pair(spec.channel_order)?;
    Ok((report.snf_log10, report.two_mode_snf_log10))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Spacing;
    use num_complex::Complex64 as C64;

    fn setup() -> (ConfigFile, Simulation) {
        let file = ConfigFile::builtin();
        let sim = Simulation::from_run(&file.resolve().unwrap());
        (file, sim)
    }

    #[test]
    fn map_entries_lie_on_channel_anti_diagonals() {
        let (file, sim) = setup();
        let map = cmd_map(&file, &sim, &[3, 5, 7, 9], Some(2)).unwrap();
        let orders = file.channels.orders.clone().unwrap();
        for (i, &q) in map.probe_orders.iter().enumerate() {
            for (j, &c) in map.conjugate_orders.iter().enumerate() {
                let v = map.values[i][j];
                assert_eq!(!v.is_nan(), orders.contains(&(q + c)), "q={q} c={c}");
            }
        }
        assert!(map.failed_rows.is_empty());
    }

    #[test]
    fn map_rows_are_permutation_invariant() {
        let (file, sim) = setup();
        let a = cmd_map(&file, &sim, &[3, 5, 7], None).unwrap();
        let b = cmd_map(&file, &sim, &[7, 3, 5], None).unwrap();
        for &q in &[3, 5, 7] {
            for &c in &a.conjugate_orders {
                let (x, y) = (a.get(q, c).unwrap(), b.get(q, c).unwrap());
                assert!(x.to_bits() == y.to_bits(), "q={q} c={c}");
            }
        }
    }

    #[test]
    fn zero_bound_dipole_gives_zero_map() {
        let (file, mut sim) = setup();
        sim.dipole.mu_b = C64::new(0.0, 0.0);
        let map = cmd_map(&file, &sim, &[3, 5], None).unwrap();
        assert!(map.values.iter().flatten().all(|v| v.is_nan() || *v == 0.0));
    }

    #[test]
    fn empty_row_is_reported_not_fatal() {
        let (file, sim) = setup();
        let map = cmd_map(&file, &sim, &[3, 25], None).unwrap();
        assert_eq!(map.failed_rows.len(), 1);
        assert_eq!(map.failed_rows[0].0, 25);
        assert!(map.values[1].iter().all(|v| v.is_nan()));
    }

    #[test]
    fn length_sweep_from_zero_starts_at_shot_noise() {
        let (file, sim) = setup();
        let spec = SweepSpec {
            variable: SweepVariable::CellLength,
            start: 0.0,
            stop: 2.0,
            count: 3,
            spacing: Spacing::Linear,
            channel_order: 14,
        };
        let table = cmd_sweep(&file, &sim, &spec, None).unwrap();
        assert_eq!(table.rows[0].snf_multimode, 0.0);
        assert_eq!(table.rows[0].snf_two_mode, 0.0);
        assert!(table.rows[2].snf_multimode < 0.0);
    }

    #[test]
    fn failed_points_become_nan_rows() {
        let (file, sim) = setup();
        let spec = SweepSpec {
            variable: SweepVariable::ProbeOrder,
            start: 3.0,
            stop: 15.0,
            count: 2,
            spacing: Spacing::Linear,
            channel_order: 14,
        };
        let table = cmd_sweep(&file, &sim, &spec, None).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows[0].error.is_none());
        assert!(table.rows[1].snf_multimode.is_nan());
        assert_eq!(table.warnings().count(), 1);
    }

    #[test]
    fn sweep_is_thread_count_independent() {
        let (file, sim) = setup();
        let spec = file.sweep.clone().unwrap();
        let a = cmd_sweep(&file, &sim, &spec, Some(1)).unwrap();
        let b = cmd_sweep(&file, &sim, &spec, Some(4)).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.snf_multimode.to_bits(), y.snf_multimode.to_bits());
            assert_eq!(x.snf_two_mode.to_bits(), y.snf_two_mode.to_bits());
        }
    }
}
