use std::fmt;

use anyhow::{anyhow, bail, Context as _, Result};
use num_complex::Complex64 as C64;
use twinbeam_core::config::{ConfigFile, MapSection, Spacing, SweepSpec, SweepVariable};
use twinbeam_core::output::{CalibrationRecord, Cell, OutputFormat, OutputWriter, Table};
use twinbeam_core::propagation::transfer;
use twinbeam_core::sweep::{cmd_map, cmd_sweep, config_for_probe_order};
use twinbeam_core::validation::{render_table, run_validation, Fault, ValidationOptions};
use twinbeam_core::wigner::{min_symplectic_eigenvalue, quadrature_variance, wigner_slice_2d, OutputWigner, SliceAxes};
use twinbeam_core::{build_mode_grid, QuadraturePoint, peak_chi_for_snf_db, Error, Simulation, TransferMethod};

use crate::{Format, GlobalArgs, Method, SweepArgs, Variable};

/// A check of the oracle suite failed.
#[derive(Debug)]
struct ValidationFailed(Vec<&'static str>);

impl fmt::Display for ValidationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "validation failed: {}", self.0.join(", "))
    }
}

impl std::error::Error for ValidationFailed {}

/// Loading or resolving the configuration failed.
#[derive(Debug)]
struct ConfigError(Error);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// 1 for failed validation or numerical failure, 2 for bad input.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ValidationFailed>().is_some() {
        return 1;
    }
    if e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<Error>() {
        Some(
            Error::InvalidConfig(_)
            | Error::EmptyGrid { .. }
            | Error::UnknownChannel { .. }
            | Error::TableMissingChannel { .. }
            | Error::InvalidDipoleModel(_)
            | Error::InvalidSweep(_)
            | Error::Calibration(_)
            | Error::Parse(_),
        ) => 2,
        _ => 1,
    }
}

struct Context {
    file: ConfigFile,
    sim: Simulation,
    calibration: Option<CalibrationRecord>,
    output: std::path::PathBuf,
    format: OutputFormat,
    /// Opened on first write, after the command has settled the config.
    writer: Option<OutputWriter>,
}

impl Context {
    fn writer(&mut self) -> Result<&mut OutputWriter> {
        if self.writer.is_none() {
            self.writer = Some(OutputWriter::new(&self.output, self.format, &self.file.hash())?);
        }
        Ok(self.writer.as_mut().expect("opened above"))
    }

    fn finish(mut self, command: &str) -> Result<()> {
        let solver = self.sim.solver.method.to_string();
        let toml = self.file.to_toml();
        let calibration = self.calibration.take();
        let writer = self.writer.take().map_or_else(|| OutputWriter::new(&self.output, self.format, &self.file.hash()), Ok)?;
        let dir_files = writer.files().to_vec();
        writer.finish(command, &solver, &toml, calibration)?;
        for f in dir_files {
            eprintln!("wrote {f}");
        }
        Ok(())
    }

    fn write(&mut self, table: &Table) -> Result<()> {
        self.writer()?.write(table)?;
        Ok(())
    }
}

fn load_file(g: &GlobalArgs) -> Result<ConfigFile> {
    let file = match &g.config {
        Some(path) => ConfigFile::load(path).map_err(ConfigError)?,
        None => ConfigFile::builtin(),
    };
    Ok(file)
}

/// Loads the configuration, applies calibration flags and opens the output.
/// `target_channel` is the default pair for `--target-snf-db`.
fn setup(g: &GlobalArgs, target_channel: Option<u32>) -> Result<Context> {
    let mut file = load_file(g)?;
    if let Some(x) = g.calibrate_peak_chi {
        file.dipole.calibrate_peak_chi = Some(x);
    }
    let run = file.resolve().map_err(ConfigError)?;
    if let Some(db) = g.target_snf_db {
        let base = Simulation::from_run(&run);
        let grid = build_mode_grid(&base.physical).map_err(ConfigError)?;
        let n = g.target_channel.or(target_channel).unwrap_or(grid.channels[0].n);
        let x = peak_chi_for_snf_db(&base, n, db)?;
        eprintln!("calibration: peak |chi_c| = {x:e} gives {db} dB on channel n = {n}");
        file.dipole.calibrate_peak_chi = Some(x);
    }
    let run = file.resolve().map_err(ConfigError)?;
    let sim = Simulation::calibrated_from_run(&run)?;
    let calibration = run.calibrate_peak_chi.map(|peak_chi| CalibrationRecord {
        peak_chi,
        mu0: [sim.dipole.mu0.re, sim.dipole.mu0.im],
        mu_b: [sim.dipole.mu_b.re, sim.dipole.mu_b.im],
    });
    Ok(Context { file, sim, calibration, output: g.output.clone(), format: output_format(g), writer: None })
}

fn snf_columns<'a>(base: &[&'a str], db: bool, db_cols: &[&'a str]) -> Vec<&'a str> {
    let mut cols = base.to_vec();
    if db {
        cols.extend_from_slice(db_cols);
    }
    cols
}

pub fn pair(g: &GlobalArgs, q: Option<u32>, n: Option<u32>) -> Result<()> {
    let mut ctx = setup(g, n)?;
    if let Some(q) = q {
        let physical = config_for_probe_order(&ctx.file, q).map_err(ConfigError)?;
        ctx.sim = ctx.sim.with_physical(physical);
        ctx.file.channels.probe_order = q;
    }
    let reports = match n {
        Some(n) => vec![ctx.sim.pair(n)?],
        None => ctx.sim.reports()?,
    };
    let cols = snf_columns(
        &[
            "k",
            "n",
            "omega_c_over_pu",
            "mean_I_pr",
            "mean_I_ck",
            "photons_pr",
            "photons_ck",
            "var",
            "var_snl",
            "S_NF",
            "two_mode_S_NF",
            "symplectic_residual",
            "solver_delta",
        ],
        g.db,
        &["S_NF_dB", "two_mode_S_NF_dB"],
    );
    let mut table = Table::new("pair", &cols);
    for r in &reports {
        let mut row: Vec<Cell> = vec![
            r.k.into(),
            r.n.into(),
            r.omega_c_over_pu.into(),
            r.mean_i_pr.into(),
            r.mean_i_ck.into(),
            r.photons_pr.into(),
            r.photons_ck.into(),
            r.var.into(),
            r.var_snl.into(),
            r.snf_log10.into(),
            r.two_mode_snf_log10.into(),
            r.symplectic_residual.into(),
            r.solver_delta.into(),
        ];
        if g.db {
            row.push(r.snf_db.into());
            row.push((10.0 * r.two_mode_snf_log10).into());
        }
        table.push(row);
    }
    ctx.write(&table)?;
    ctx.finish("pair")
}

pub fn map(g: &GlobalArgs, probe_orders: Option<Vec<u32>>) -> Result<()> {
    let mut ctx = setup(g, None)?;
    let orders = probe_orders
        .or_else(|| ctx.file.map.as_ref().map(|m| m.probe_orders.clone()))
        .ok_or_else(|| ConfigError(Error::Parse("map needs --probe-orders or a [map] section".into())))?;
    ctx.file.map = Some(MapSection { probe_orders: orders.clone() });
    let map = cmd_map(&ctx.file, &ctx.sim, &orders, g.threads)?;
    for (q, reason) in &map.failed_rows {
        eprintln!("warning: probe order {q}: {reason}");
    }
    let labels: Vec<String> = map.conjugate_orders.iter().map(|c| format!("c{c}")).collect();
    let mut cols = vec!["probe_order"];
    cols.extend(labels.iter().map(String::as_str));
    let mut tables = vec![Table::new("map", &cols)];
    if g.db {
        tables.push(Table::new("map_db", &cols));
    }
    for (i, &q) in map.probe_orders.iter().enumerate() {
        for (t, table) in tables.iter_mut().enumerate() {
            let factor = if t == 0 { 1.0 } else { 10.0 };
            let mut row: Vec<Cell> = vec![q.into()];
            row.extend(map.values[i].iter().map(|&v| Cell::Float(factor * v)));
            table.push(row);
        }
    }
    for t in &tables {
        ctx.write(t)?;
    }
    ctx.finish("map")
}

fn sweep_spec(file: &ConfigFile, args: &SweepArgs) -> Result<SweepSpec> {
    let base = file.sweep.clone();
    let variable = match args.variable {
        Some(Variable::PumpIntensity) => Some(SweepVariable::PumpIntensity),
        Some(Variable::CellLength) => Some(SweepVariable::CellLength),
        Some(Variable::ProbeOrder) => Some(SweepVariable::ProbeOrder),
        Some(Variable::GasPressure) => Some(SweepVariable::GasPressure),
        None => base.as_ref().map(|s| s.variable),
    };
    let missing = |what: &str| ConfigError(Error::InvalidSweep(format!("missing {what} (flag or [sweep] section)")));
    let spec = SweepSpec {
        variable: variable.ok_or_else(|| missing("variable"))?,
        start: args.start.or(base.as_ref().map(|s| s.start)).ok_or_else(|| missing("start"))?,
        stop: args.stop.or(base.as_ref().map(|s| s.stop)).ok_or_else(|| missing("stop"))?,
        count: args.count.or(base.as_ref().map(|s| s.count)).ok_or_else(|| missing("count"))?,
        spacing: if args.log { Spacing::Log } else { base.as_ref().map_or(Spacing::Linear, |s| s.spacing) },
        channel_order: args.channel.or(base.as_ref().map(|s| s.channel_order)).ok_or_else(|| missing("channel"))?,
    };
    spec.validate().map_err(ConfigError)?;
    Ok(spec)
}

pub fn sweep(g: &GlobalArgs, args: &SweepArgs) -> Result<()> {
    let file = load_file(g)?;
    let spec = sweep_spec(&file, args)?;
    let mut ctx = setup(g, Some(spec.channel_order))?;
    // The snapshot carries the effective sweep so a re-run reproduces it.
    ctx.file.sweep = Some(spec.clone());
    let table_data = cmd_sweep(&ctx.file, &ctx.sim, &spec, g.threads)?;
    for (value, reason) in table_data.warnings() {
        eprintln!("warning: {} = {value}: {reason}", spec.variable.label());
    }
    let cols = snf_columns(&[spec.variable.label(), "S_NF", "two_mode_S_NF"], g.db, &["S_NF_dB", "two_mode_S_NF_dB"]);
    let mut table = Table::new("sweep", &cols);
    for r in &table_data.rows {
        let mut row: Vec<Cell> = vec![r.value.into(), r.snf_multimode.into(), r.snf_two_mode.into()];
        if g.db {
            row.push((10.0 * r.snf_multimode).into());
            row.push((10.0 * r.snf_two_mode).into());
        }
        table.push(row);
    }
    ctx.write(&table)?;
    ctx.finish("sweep")
}

fn output_format(g: &GlobalArgs) -> OutputFormat {
    match g.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    }
}

pub fn wigner(g: &GlobalArgs, channel: Option<u32>, half_width: Option<f64>, samples: Option<usize>) -> Result<()> {
    let mut ctx = setup(g, channel)?;
    if let Some(c) = channel {
        ctx.file.wigner.channel_order = Some(c);
    }
    if let Some(w) = half_width {
        ctx.file.wigner.half_width = w;
    }
    if let Some(s) = samples {
        ctx.file.wigner.samples = s;
    }
    let settings = ctx.file.wigner.clone();
    if !(settings.half_width > 0.0) || settings.samples < 2 {
        return Err(ConfigError(Error::Parse("[wigner] needs half_width > 0 and samples >= 2".into())).into());
    }
    let prop = ctx.sim.propagate()?;
    let n = settings.channel_order.unwrap_or(prop.grid.channels[0].n);
    let k = prop.grid.channel_index(n)? + 1;
    let eta = C64::new(ctx.sim.probe_photon_number.sqrt(), 0.0);
    let gaussian = OutputWigner::new(&prop.transfer, eta)?;
    let peak = gaussian.peak()?;
    let w = settings.half_width;
    let axes = SliceAxes {
        x_pr: (peak.x[0] - w, peak.x[0] + w),
        x_ck: (peak.x[k] - w, peak.x[k] + w),
        samples: (settings.samples, settings.samples),
    };
    // Slice convention: every p and the other conjugates' x at zero; the
    // window is centred on the peak's (x_pr, x_ck).
    let fixed = QuadraturePoint::origin(prop.grid.dimension());
    let grid = wigner_slice_2d(k, &fixed, &axes, &prop.transfer, eta)?;

    let mut table = Table::new("wigner", &["x_pr", "x_ck", "W"]);
    for (i, &a) in grid.x_pr.iter().enumerate() {
        for (j, &b) in grid.x_ck.iter().enumerate() {
            table.push(vec![a.into(), b.into(), grid.values[i][j].into()]);
        }
    }
    ctx.write(&table)?;

    let cov = gaussian.covariance()?;
    let modes = prop.grid.dimension();
    let mut diff = vec![0.0; modes];
    diff[0] = 1.0;
    diff[k] = -1.0;
    let mut sum = diff.clone();
    sum[k] = 1.0;
    let zeros = vec![0.0; modes];
    let [narrow, wide] = gaussian.slice(k, &fixed)?.principal_axes();
    let mut summary = Table::new("wigner_summary", &["quantity", "value"]);
    let entries: Vec<(&str, f64)> = vec![
        ("channel_n", n as f64),
        ("normalization", grid.normalization),
        ("slice_integral_analytic", grid.analytic_slice_integral),
        ("slice_integral_trapezoid", grid.trapezoid_integral()),
        ("peak_x_pr", peak.x[0]),
        ("peak_p_pr", peak.p[0]),
        ("peak_x_ck", peak.x[k]),
        ("peak_p_ck", peak.p[k]),
        ("var_x_pr_minus_x_ck", quadrature_variance(&cov, &diff, &zeros)),
        ("var_x_pr_plus_x_ck", quadrature_variance(&cov, &sum, &zeros)),
        ("narrow_axis_width", narrow.1),
        ("narrow_axis_x_pr", narrow.0[0]),
        ("narrow_axis_x_ck", narrow.0[1]),
        ("wide_axis_width", wide.1),
        ("min_symplectic_eigenvalue", min_symplectic_eigenvalue(&cov)?),
    ];
    for (name, v) in entries {
        summary.push(vec![name.into(), v.into()]);
    }
    ctx.write(&summary)?;
    ctx.finish("wigner")
}

pub fn dump_chi(g: &GlobalArgs) -> Result<()> {
    let mut ctx = setup(g, None)?;
    let prop = ctx.sim.propagate()?;
    let mut table = Table::new(
        "chi",
        &[
            "n",
            "omega_c_over_pu",
            "mu_eg_re",
            "mu_eg_im",
            "chi_pr_re",
            "chi_pr_im",
            "chi_c_re",
            "chi_c_im",
            "kappa_pr_re",
            "kappa_pr_im",
            "kappa_c_re",
            "kappa_c_im",
        ],
    );
    for (k, ch) in prop.grid.channels.iter().enumerate() {
        let (mu, cp, cc) = (prop.dipoles.mu_eg[k], prop.chi.chi_pr[k], prop.chi.chi_c[k]);
        let (kp, kc) = (prop.kappa.kappa_pr[k], prop.kappa.kappa_c[k]);
        table.push(vec![
            ch.n.into(),
            (ch.omega_c / prop.grid.omega_pu).into(),
            mu.re.into(),
            mu.im.into(),
            cp.re.into(),
            cp.im.into(),
            cc.re.into(),
            cc.im.into(),
            kp.re.into(),
            kp.im.into(),
            kc.re.into(),
            kc.im.into(),
        ]);
    }
    ctx.write(&table)?;
    ctx.finish("dump-chi")
}

pub fn dump_transfer(g: &GlobalArgs, method: Option<Method>) -> Result<()> {
    let mut ctx = setup(g, None)?;
    if let Some(m) = method {
        ctx.file.solver.method = match m {
            Method::Eigen => TransferMethod::Eigen,
            Method::Analytic => TransferMethod::Analytic,
            Method::Ode => TransferMethod::Ode,
        };
        ctx.sim.solver.method = ctx.file.solver.method;
    }
    let prop = ctx.sim.propagate()?;
    let t = match ctx.sim.solver.method {
        TransferMethod::Ode => prop.transfer.clone(),
        m => transfer(&prop.coupling, ctx.sim.physical.cell_length, m, ctx.sim.solver.condition_limit)?,
    };
    let mut table = Table::new("transfer", &["row", "col", "re", "im"]);
    for r in 0..t.dimension() {
        for c in 0..t.dimension() {
            let v = t.entry(r, c);
            table.push(vec![r.into(), c.into(), v.re.into(), v.im.into()]);
        }
    }
    ctx.write(&table)?;
    eprintln!("method {}, eigenvector condition {:.3e}, solver delta {:.3e}", t.method, t.condition, prop.solver_delta);
    ctx.finish("dump-transfer")
}

pub fn validate(g: &GlobalArgs, tolerance_scale: f64, inject_fault: bool) -> Result<()> {
    if !(tolerance_scale > 0.0) {
        bail!(ConfigError(Error::Parse(format!("tolerance scale must be positive, got {tolerance_scale}"))));
    }
    let mut ctx = setup(g, None)?;
    let options = ValidationOptions {
        tolerance_scale,
        fault: inject_fault.then_some(Fault::PerturbTransfer { row: 0, col: 1, delta: 1e-3 }),
    };
    let results = run_validation(&ctx.file, &options);
    print!("{}", render_table(&results));
    let mut table = Table::new("validation", &["check", "measured", "tolerance", "passed"]);
    for r in &results {
        table.push(vec![r.name.into(), r.measured.into(), r.tolerance.into(), Cell::Int(r.passed as i64)]);
    }
    ctx.write(&table)?;
    ctx.finish("validate").context("writing validation output")?;
    let failed: Vec<&'static str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(anyhow!(ValidationFailed(failed)))
    }
}
