//! Experiment runner: configuration in, checks and long-format CSV tables
//! out, plus a JSON manifest written atomically at the end of the run.
//!
//! Every CSV starts with `#` header lines carrying the configuration hash
//! and column units. Results depend only on the configuration (thread count
//! and output directory excluded), so reruns reproduce the tables byte for
//! byte.

pub mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind, KernelSpec};

use crate::fakestat::{self, FakeStatConfig};
use crate::grid::{Grid, GridFn};
use crate::hawkes::{self, Baseline, HawkesConfig, HawkesPath};
use crate::kernels::{self, Kernel, KernelKind, ProductRule, ResolventSource};
use crate::rescale::{self, ConvergenceOptions};
use crate::specfn::{self, FracOrder};
use crate::stats;
use crate::volterra::{self, LimitParams};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit statuses of [`run`].
pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Numeric(_) | RunError::Io(_) => EXIT_RUNTIME,
        }
    }
}

fn numeric<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Numeric(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, passed: value <= threshold }
    }

    fn flag(name: &str, passed: bool) -> Self {
        Self { name: name.into(), value: if passed { 1.0 } else { 0.0 }, threshold: 1.0, passed }
    }
}

/// One long-format table, written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub units: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, cols: &[(&str, &str)]) -> Self {
        Self {
            name: name.into(),
            columns: cols.iter().map(|c| c.0.to_string()).collect(),
            units: cols.iter().map(|c| c.1.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<f64>) {
        self.push_cells(row.into_iter().map(fmt_num).collect());
    }

    fn push_cells(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, mut w: W, config_hash: &str) -> std::io::Result<()> {
        writeln!(w, "# config_hash: {config_hash}")?;
        let units: Vec<String> = self.columns.iter().zip(&self.units).map(|(c, u)| format!("{c}[{u}]")).collect();
        writeln!(w, "# units: {}", units.join(","))?;
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join(","))?;
        }
        Ok(())
    }
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e7)`.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e7).contains(&a) || !a.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub experiment: ExperimentKind,
    pub config_hash: String,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub version: String,
    pub experiment: String,
    pub wall_time_s: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
}

/// Write every table of `report` into `dir` and return the paths.
pub fn emit_plotdata(report: &RunReport, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for t in &report.tables {
        let path = dir.join(format!("{}.csv", t.name));
        let mut buf = Vec::new();
        t.write(&mut buf, &report.config_hash)?;
        write_atomic(&path, &buf)?;
        out.push(path);
    }
    Ok(out)
}

/// Write to a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Outcome of a full run with artifacts on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: RunReport,
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed() {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

/// Validate, compute, write tables and the manifest.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    cfg.validate()?;
    let start = Instant::now();
    let threads = cfg.threads.unwrap_or(0);
    let report = crate::mc::with_threads(threads, || execute(cfg))?;
    let dir = cfg.out_dir();
    let files = emit_plotdata(&report, &dir)?;
    let manifest = RunManifest {
        config_hash: report.config_hash.clone(),
        version: VERSION.into(),
        experiment: cfg.experiment.name().into(),
        wall_time_s: start.elapsed().as_secs_f64(),
        passed: report.passed(),
        checks: report.checks.clone(),
        files: files.iter().map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned()).collect(),
    };
    let manifest_path = dir.join("manifest.json");
    let json = serde_json::to_vec_pretty(&manifest).map_err(numeric)?;
    write_atomic(&manifest_path, &json)?;
    Ok(RunOutcome { report, manifest, manifest_path })
}

/// Compute checks and tables without touching the file system.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    cfg.validate()?;
    let (checks, tables) = match cfg.experiment {
        ExperimentKind::ResolventCheck => resolvent_check(cfg)?,
        ExperimentKind::HawkesSim => hawkes_sim(cfg)?,
        ExperimentKind::ScalingConvergence => scaling_convergence(cfg)?,
        ExperimentKind::LimitSim => limit_sim(cfg)?,
        ExperimentKind::FakeStationary => fake_stationary(cfg)?,
        ExperimentKind::Holder => holder(cfg)?,
    };
    Ok(RunReport { experiment: cfg.experiment, config_hash: cfg.hash(), checks, tables })
}

type Output = (Vec<Check>, Vec<Table>);

fn resolvent_check(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let c = &cfg.resolvent_check;
    let kernel = c.kernel.build().map_err(numeric)?;
    let grid = Grid::new(c.t0, c.n).map_err(numeric)?;
    let table = kernels::solve_resolvent(&kernel, c.lambda, &grid).map_err(numeric)?;
    let rule = ProductRule::for_kernel(&kernel, &grid).map_err(numeric)?;
    let conv = rule.convolve(&table.r).map_err(numeric)?;
    let mut res = Table::new("resolvent", &[("t", "time"), ("resolvent", "1"), ("residual", "1")]);
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let r = (table.r[i] + c.lambda * conv[i] - 1.0).abs();
        worst = worst.max(r);
        res.push(vec![grid.node(i), table.r[i], r]);
    }
    let mut checks = vec![Check::at_most("resolvent_residual", worst, c.resolvent_tol)];
    if let Some(d) = kernels::density_residual(&kernel, &table).map_err(numeric)? {
        checks.push(Check::at_most("density_residual", d, c.density_tol));
    }
    let mut tables = vec![res];
    if table.source == ResolventSource::ClosedForm {
        let num = kernels::solve_resolvent_numeric(&kernel, c.lambda, &grid).map_err(numeric)?;
        let diff = table.r.iter().zip(&num.r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        checks.push(Check::at_most("closed_vs_numeric", diff, c.compare_tol));
    }
    if let KernelKind::Fractional { alpha } = kernel.kind {
        let lam = c.lambda * kernel.scale;
        let (rows, dens_err, ident_err) = fractional_laplace(alpha, lam, &c.z_list, c.laplace_tol)?;
        let mut lt = Table::new("laplace", &[("z", "1/time"), ("density_transform", "1"), ("limit", "1"), ("identity", "1")]);
        for r in rows {
            lt.push(r);
        }
        tables.push(lt);
        checks.push(Check::at_most("laplace_density", dens_err, c.laplace_tol));
        checks.push(Check::at_most("laplace_resolvent_identity", ident_err, c.laplace_tol));
    }
    Ok((checks, tables))
}

/// Rows `(z, L_f(z), l/(z^a + l), z L_R(z) (1 + l L_phi(z)))`, every
/// transform by quadrature, and the worst errors of the two laws.
pub fn fractional_laplace(alpha: FracOrder, lambda: f64, z_list: &[f64], tol: f64) -> Result<(Vec<Vec<f64>>, f64, f64), RunError> {
    let a = alpha.value();
    let mut rows = Vec::new();
    let (mut e1, mut e2): (f64, f64) = (0.0, 0.0);
    for &z in z_list {
        let lf = kernels::laplace_kernel(&Kernel::mittag_leffler(alpha, lambda).map_err(numeric)?, z, 1e-3 * tol)
            .map_err(numeric)?
            .value;
        let lr = kernels::laplace_transform(|t| specfn::ml_resolvent(alpha, lambda, t).unwrap_or(f64::NAN), z, 1e-3 * tol)
            .map_err(numeric)?
            .value;
        if !lr.is_finite() {
            return Err(RunError::Numeric("resolvent evaluation failed inside the Laplace quadrature".into()));
        }
        let lphi = kernels::laplace_kernel(&Kernel::fractional(alpha), z, 1e-3 * tol).map_err(numeric)?.value;
        let limit = lambda / (z.powf(a) + lambda);
        let ident = z * lr * (1.0 + lambda * lphi);
        e1 = e1.max((lf - limit).abs());
        e2 = e2.max((ident - 1.0).abs());
        rows.push(vec![z, lf, limit, ident]);
    }
    Ok((rows, e1, e2))
}

/// Steps of the grid used for the deterministic Hawkes moments.
const HAWKES_MOMENT_STEPS: usize = 2048;

struct HawkesSample {
    counts: Vec<f64>,
    intensity: Vec<f64>,
    uniforms: Vec<f64>,
}

fn hawkes_sim(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let c = &cfg.hawkes_sim;
    let kernel = c.kernel.build().map_err(numeric)?;
    let baseline = c.baseline.build();
    let hc = HawkesConfig::new(kernel.clone(), c.a_t, baseline.clone(), c.init, c.horizon, cfg.seed)
        .map_err(numeric)?
        .with_method(c.method);
    let n_paths = cfg.paths();
    let probes = &c.probes;
    let samples = crate::mc::try_run_paths(n_paths, |i| -> Result<HawkesSample, hawkes::HawkesError> {
        let path: HawkesPath = hawkes::simulate(&hc, i)?;
        let counts = probes.iter().map(|&t| path.events.partition_point(|&e| e <= t) as f64).collect();
        let intensity = probes
            .iter()
            .map(|&t| hawkes::intensity_at(&hc, path.init_mass, &path.events, t))
            .collect::<Result<Vec<f64>, _>>()?;
        let uniforms = hawkes::time_rescaled_uniforms(&hc, &path)?;
        Ok(HawkesSample { counts, intensity, uniforms })
    })
    .map_err(numeric)?;
    let grid = Grid::new(c.horizon, HAWKES_MOMENT_STEPS).map_err(numeric)?;
    let en = hawkes::expected_counts(&hc, &grid).map_err(numeric)?;
    let el = hawkes::expected_intensity(&hc, &grid).map_err(numeric)?;
    let exp_closed = match (&kernel.kind, &baseline) {
        (KernelKind::Exponential { rate }, Baseline::Constant(mu)) if c.init.mean() == 0.0 => Some((*rate, *mu)),
        _ => None,
    };
    let mut counts = Table::new("counts", &[("t", "time"), ("mean", "events"), ("std_error", "events"), ("expected", "events")]);
    let mut inten = Table::new("intensity", &[("t", "time"), ("mean", "1/time"), ("std_error", "1/time"), ("expected", "1/time")]);
    let mut checks = Vec::new();
    let mut lambda_ok = true;
    for (k, &t) in probes.iter().enumerate() {
        let sn = stats::summarize(&samples.iter().map(|s| s.counts[k]).collect::<Vec<f64>>());
        let sl = stats::summarize(&samples.iter().map(|s| s.intensity[k]).collect::<Vec<f64>>());
        let expected_n = match exp_closed {
            Some((rate, mu)) => hawkes::exp_kernel_expected_count(mu, c.a_t, rate, t),
            None => en.interpolate(t),
        };
        let expected_l = el.interpolate(t);
        counts.push(vec![t, sn.mean, sn.mean_se, expected_n]);
        inten.push(vec![t, sl.mean, sl.mean_se, expected_l]);
        if k + 1 == probes.len() {
            checks.push(Check::at_most("counts_z_score", (sn.mean - expected_n).abs() / sn.mean_se, c.z));
        }
        lambda_ok &= stats::within_se(sl.mean, expected_l, sl.mean_se, c.z);
    }
    checks.push(Check::flag("intensity_within_se", lambda_ok));
    if let Baseline::StationaryMean(mu0) = baseline {
        let flat = (0..probes.len()).all(|k| {
            let s = stats::summarize(&samples.iter().map(|x| x.intensity[k]).collect::<Vec<f64>>());
            stats::within_se(s.mean, mu0, s.mean_se, c.z)
        });
        checks.push(Check::flag("stationary_mean_flat", flat));
    }
    let uniforms: Vec<f64> = samples.iter().flat_map(|s| s.uniforms.iter().copied()).collect();
    let ks = stats::ks_test(&uniforms, |u| u.clamp(0.0, 1.0));
    checks.push(Check { name: "ks_p_value".into(), value: ks.p_value, threshold: c.ks_p_min, passed: ks.p_value > c.ks_p_min });
    Ok((checks, vec![counts, inten]))
}

fn scaling_convergence(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let c = &cfg.scaling_convergence;
    let kernel = c.kernel.build().map_err(numeric)?;
    let build = |list: &[f64]| {
        rescale::make_schedule(c.alpha, c.lambda, c.nu, c.theta0, volterra::constant(1.0), list, &kernel)
            .and_then(|s| s.with_kind(c.schedule))
            .map_err(numeric)
    };
    let det = build(&c.identity_t_list)?;
    let lap = rescale::verify_resolvent_limit(&det, &c.z_list).map_err(numeric)?;
    let tail = rescale::verify_tail_identity(&det, c.identity_step).map_err(numeric)?;
    let mut checks = vec![
        Check::flag("laplace_limit_decreasing", lap.decreasing),
        Check::flag("resolvent_sup_decreasing", tail.resolvent_decreasing),
        Check::at_most("tail_identity_residual", tail.max_identity_residual, c.identity_tol),
    ];
    let mut lt = Table::new("laplace_limit", &[("T", "time"), ("z", "1"), ("estimate", "1"), ("limit", "1"), ("error", "1")]);
    for r in &lap.rows {
        lt.push(vec![r.t_scale, r.z, r.value, r.limit, r.error]);
    }
    let mut tt = Table::new(
        "tail_identity",
        &[("T", "time"), ("a_T", "1"), ("identity_residual", "1"), ("resolvent_sup", "1"), ("tail_sup", "1")],
    );
    for r in &tail.rows {
        tt.push(vec![r.t_scale, r.a_t, r.identity_residual, r.resolvent_sup, r.tail_sup]);
    }
    let mut tables = vec![lt, tt];
    let n_paths = cfg.paths();
    if n_paths > 0 {
        let sched = build(&c.t_list)?;
        let opts = ConvergenceOptions {
            n_paths,
            seed: cfg.seed,
            method: c.method,
            sup_paths: c.sup_paths,
            z: c.z,
            ..ConvergenceOptions::default()
        };
        let rep = rescale::convergence_experiment(&sched, &opts).map_err(numeric)?;
        let largest = rep.largest().map(|s| s.mean_within).unwrap_or(false);
        checks.push(Check::flag("largest_scale_mean_within_se", largest));
        checks.push(Check::flag("deviation_weakly_decreasing", rep.deviation_decreasing));
        let mut ct = Table::new(
            "convergence",
            &[("T", "time"), ("t", "rescaled time"), ("stat_name", "label"), ("estimate", "1"), ("std_error", "1"), ("limit_value", "1")],
        );
        for r in &rep.rows {
            ct.push_cells(vec![
                fmt_num(r.t_scale),
                fmt_num(r.t),
                r.stat_name.clone(),
                fmt_num(r.estimate),
                fmt_num(r.std_error),
                fmt_num(r.limit_value),
            ]);
        }
        let mut st = Table::new(
            "scales",
            &[("T", "time"), ("a_T", "1"), ("mean_events", "events"), ("mean_deviation", "1"), ("var_deviation", "1"), ("sup_gap_q95", "1"), ("sup_gap_q95_sqrt_T", "1")],
        );
        for s in &rep.scales {
            st.push(vec![s.t_scale, s.a_t, s.mean_events, s.mean_deviation, s.var_deviation, s.sup_gap_q95, s.sup_gap_q95_sqrt_t]);
        }
        tables.push(ct);
        tables.push(st);
    }
    Ok((checks, tables))
}

fn limit_sim(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let c = &cfg.limit_sim;
    let p = LimitParams::basic(c.alpha, c.lambda, c.nu, c.theta0, c.init).map_err(numeric)?;
    let grid = Grid::new(c.t0, c.n).map_err(numeric)?;
    let mean = volterra::limit_mean(&p, &grid).map_err(numeric)?;
    let n_paths = cfg.paths();
    let mut checks = Vec::new();
    let mut mt = Table::new(
        "mean_curve",
        &[("t", "time"), ("mc_mean", "1"), ("std_error", "1"), ("limit_mean", "1"), ("analytic", "1")],
    );
    let analytic: Vec<f64> = (0..grid.len())
        .map(|i| specfn::ml_resolvent(p.alpha, c.lambda, grid.node(i)).map(|r| c.theta0 * (1.0 - r)))
        .collect::<Result<_, _>>()
        .map_err(numeric)?;
    if c.init.mean() == 0.0 {
        let d = mean.values.iter().zip(&analytic).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        checks.push(Check::at_most("analytic_mean_curve", d, c.analytic_tol));
    }
    if n_paths >= 2 {
        let paths = volterra::simulate_many(&p, &grid, cfg.seed, n_paths, c.scheme).map_err(numeric)?;
        let mut ok = true;
        let probe_idx: Vec<usize> = c.probes.iter().map(|&t| grid.nearest(t)).collect();
        for i in 0..grid.len() {
            let s = stats::summarize(&paths.iter().map(|x| x.values[i]).collect::<Vec<f64>>());
            mt.push(vec![grid.node(i), s.mean, s.mean_se, mean.values[i], analytic[i]]);
            if probe_idx.contains(&i) && i > 0 {
                ok &= stats::within_se(s.mean, mean.values[i], s.mean_se, c.z);
            }
        }
        checks.push(Check::flag("mc_mean_within_se", ok));
    }
    let mut tables = vec![mt];
    if !c.compare_steps.is_empty() {
        let rep = volterra::form_distance(&p, c.t0, &c.compare_steps, c.compare_paths, cfg.seed).map_err(numeric)?;
        let mut ft = Table::new("form_distance", &[("n", "steps"), ("mean_relative", "1"), ("max_relative", "1")]);
        for r in &rep.rows {
            ft.push(vec![r.n as f64, r.mean_relative, r.max_relative]);
        }
        checks.push(Check::flag("form_distance_decreasing", rep.decreasing));
        let last = rep.rows.last().map(|r| r.max_relative).unwrap_or(f64::NAN);
        checks.push(Check::at_most("form_distance_finest", last, c.compare_tol));
        tables.push(ft);
    }
    Ok((checks, tables))
}

fn fake_stationary(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let c = &cfg.fake_stationary;
    let (mu, amp, rate) = (c.mu_inf, c.theta_amp, c.theta_rate);
    let theta: volterra::Func = Arc::new(move |t| mu * (1.0 + amp * (-rate * t).exp()));
    let grid = Grid::new(c.t0, c.n).map_err(numeric)?;
    let fc = FakeStatConfig::new(c.alpha, c.lambda, c.nu, c.c, theta, c.mu_inf, grid).map_err(numeric)?;
    let sol = fakestat::solve_sigma(&fc).map_err(numeric)?;
    let mut checks = vec![Check::at_most("solver_residual", sol.max_residual, c.residual_tol)];
    let mut sp = Table::new("sigma_profile", &[("t", "time"), ("sigma_sq", "1"), ("residual", "1")]);
    for i in 0..grid.n() {
        sp.push(vec![grid.node(i), sol.sigma_sq[i], sol.residual[i + 1]]);
    }
    let mut tables = vec![sp];
    let n_paths = cfg.paths();
    if n_paths > 0 {
        let rep = fakestat::validate_fake_stationarity(&fc, &sol, n_paths, cfg.seed, &c.probes).map_err(numeric)?;
        checks.push(Check::flag("mean_within_se", rep.probes.iter().all(|p| p.mean_ok)));
        checks.push(Check::flag("var_within_se", rep.probes.iter().all(|p| p.var_ok)));
        checks.push(Check::flag("flat_across_probes", rep.mean_flat && rep.var_flat));
        let mut ft = Table::new(
            "fake_stationarity",
            &[("t", "time"), ("mean", "1"), ("var", "1"), ("target_mean", "1"), ("target_var", "1"), ("mean_band", "1"), ("var_band", "1")],
        );
        for p in &rep.probes {
            ft.push(vec![p.t, p.mean, p.var, rep.target_mean, rep.target_var, 3.0 * p.mean_se, 3.0 * p.var_se]);
        }
        tables.push(ft);
    }
    Ok((checks, tables))
}

fn holder(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let c = &cfg.holder;
    let p = LimitParams::basic(c.alpha, c.lambda, c.nu, c.theta0, c.init).map_err(numeric)?;
    let grid = Grid::new(1.0, c.n).map_err(numeric)?;
    let paths = volterra::simulate_many(&p, &grid, cfg.seed, cfg.paths(), c.scheme).map_err(numeric)?;
    let est = volterra::holder_estimate(&paths, &c.p_list, c.lags).map_err(numeric)?;
    let target = c.alpha - 0.5;
    let mut t = Table::new("holder", &[("p", "1"), ("log_h", "log time"), ("log_moment", "1"), ("fit", "1")]);
    for r in &est.rows {
        t.push(vec![r.order, r.log_h, r.log_moment, r.fit]);
    }
    let checks = vec![Check::at_most("holder_exponent_error", (est.exponent - target).abs(), c.tol)];
    Ok((checks, vec![t]))
}

/// Plot data for a sampled function: `(t, value)`.
pub fn gridfn_table(name: &str, f: &GridFn, unit: &str) -> Table {
    let mut t = Table::new(name, &[("t", "time"), ("value", unit)]);
    for i in 0..f.grid.len() {
        t.push(vec![f.grid.node(i), f.values[i]]);
    }
    t
}
