//! Inputs of the fake stationary rough Heston variance
//! `V = V_0 phi + K*((theta - lambda V) ds + nu sigma sqrt(V) dW)`:
//! the initial-decay curve `phi` and the modulation `sigma^2` that keep the
//! mean at `mu_inf / lambda` and the variance at `c nu^2 mu_inf / lambda`.
//!
//! `sigma^2` solves the first-kind equation
//! `(f^2 * sigma^2)(t) = c lambda^2 (1 - (phi - f*phi)(t)^2)` with
//! `f = f_{a,lambda}`. It is discretized with `sigma^2` constant on each
//! cell and the cell integrals of `f^2` taken exactly, which is the same
//! quadrature the form-A simulation uses for its noise. The collocation at
//! node `i` involves cells `0..i`, so the triangular system is solved by
//! forward substitution; the first cell is the small-time seed
//! `sigma^2_0 = g(t_1) / int_0^{t_1} f^2`.

use serde::Serialize;
use thiserror::Error;

use crate::grid::{Grid, GridFn};
use crate::hawkes::InitLaw;
use crate::kernels::{Kernel, KernelError, ProductRule};
use crate::specfn::{self, FracOrder, SpecFnError};
use crate::stats::{self, Summary};
use crate::volterra::{self, Func, LimitParams, Scheme, SchemeWeights, VolterraError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FakeStatError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    SpecFn(#[from] SpecFnError),
    #[error(transparent)]
    Volterra(#[from] VolterraError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("phi is not positive at t = {t} (value {value})")]
    PhiNotPositive { t: f64, value: f64 },
    #[error("clipped sigma^2 mass {fraction:.3} exceeds 5%")]
    Clipped { fraction: f64 },
    #[error("need at least {need} paths, got {got}")]
    TooFewPaths { need: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, FakeStatError>;

#[derive(Clone)]
pub struct FakeStatConfig {
    pub alpha: FracOrder,
    pub lambda: f64,
    pub nu: f64,
    pub c: f64,
    pub theta: Func,
    /// `lim theta(t)`.
    pub mu_inf: f64,
    pub grid: Grid,
}

impl std::fmt::Debug for FakeStatConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FakeStatConfig")
            .field("alpha", &self.alpha.value())
            .field("lambda", &self.lambda)
            .field("nu", &self.nu)
            .field("c", &self.c)
            .field("mu_inf", &self.mu_inf)
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl FakeStatConfig {
    pub fn new(alpha: f64, lambda: f64, nu: f64, c: f64, theta: Func, mu_inf: f64, grid: Grid) -> Result<Self> {
        let cfg = Self { alpha: FracOrder::new(alpha)?, lambda, nu, c, theta, mu_inf, grid };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_inf > 0.0) {
            return Err(FakeStatError::Config(format!("mu_inf = {} must be positive", self.mu_inf)));
        }
        if !(self.lambda > 0.0 && self.c > 0.0 && self.nu >= 0.0) {
            return Err(FakeStatError::Config("need lambda > 0, c > 0 and nu >= 0".into()));
        }
        if self.alpha.value() <= 0.5 {
            return Err(FakeStatError::Config(format!(
                "f^2 is not integrable at 0 for alpha = {}",
                self.alpha.value()
            )));
        }
        Ok(())
    }

    pub fn target_mean(&self) -> f64 {
        self.mu_inf / self.lambda
    }

    pub fn target_var(&self) -> f64 {
        self.c * self.nu * self.nu * self.mu_inf / self.lambda
    }
}

/// `phi(t) = 1 - lambda (K * (theta/mu_inf - 1))(t)`.
pub fn build_phi(cfg: &FakeStatConfig) -> Result<GridFn> {
    let g = GridFn::from_fn(cfg.grid, |s| (cfg.theta)(s) / cfg.mu_inf - 1.0);
    let rule = ProductRule::for_kernel(&Kernel::fractional(cfg.alpha), &cfg.grid)?;
    let c = rule.convolve(&g.values)?;
    let phi: Vec<f64> = c.iter().map(|c| 1.0 - cfg.lambda * c).collect();
    if let Some((i, &v)) = phi.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(FakeStatError::PhiNotPositive { t: cfg.grid.node(i), value: v });
    }
    Ok(GridFn { grid: cfg.grid, values: phi })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSolution {
    pub grid: Grid,
    /// `sigma^2` per cell (`n` values), clipped at 0.
    pub sigma_sq: Vec<f64>,
    /// Collocation residual at every node.
    pub residual: Vec<f64>,
    pub max_residual: f64,
    /// Residual of the continuous convolution of the piecewise-constant
    /// solution at the cell midpoints, a grid-dependent accuracy measure.
    pub midpoint_residual: f64,
    pub clipped_fraction: f64,
    pub phi_vals: Vec<f64>,
    /// `phi - f*phi` at the nodes.
    pub phi0_vals: Vec<f64>,
    /// Right-hand side `c lambda^2 (1 - phi0^2)`.
    pub rhs: Vec<f64>,
}

/// `int_0^t f^2` differences for every lag cell.
fn sq_cells(alpha: FracOrder, lambda: f64, grid: &Grid) -> Result<Vec<f64>> {
    let n = grid.n();
    let s = (0..=n)
        .map(|i| specfn::ml_density_sq_integral(alpha, lambda, grid.node(i)))
        .collect::<std::result::Result<Vec<f64>, SpecFnError>>()?;
    Ok((1..=n).map(|m| s[m] - s[m - 1]).collect())
}

/// Number of midpoints checked by the continuous residual.
const MIDPOINT_PROBES: usize = 16;

pub fn solve_sigma(cfg: &FakeStatConfig) -> Result<SigmaSolution> {
    cfg.validate()?;
    let grid = cfg.grid;
    let n = grid.n();
    let phi = build_phi(cfg)?;
    let rule = ProductRule::for_kernel(&Kernel::mittag_leffler(cfg.alpha, cfg.lambda)?, &grid)?;
    let fphi = rule.convolve(&phi.values)?;
    let phi0: Vec<f64> = phi.values.iter().zip(&fphi).map(|(a, b)| a - b).collect();
    let scale = cfg.c * cfg.lambda * cfg.lambda;
    let rhs: Vec<f64> = phi0.iter().map(|p| scale * (1.0 - p * p)).collect();
    let w = sq_cells(cfg.alpha, cfg.lambda, &grid)?;
    let mut raw = vec![0.0; n];
    for i in 1..=n {
        // sum_{j<i} w_{i-j} s_j = rhs_i, unknown s_{i-1}
        let known: f64 = (0..i - 1).map(|j| w[i - j - 1] * raw[j]).sum();
        raw[i - 1] = (rhs[i] - known) / w[0];
    }
    let total: f64 = raw.iter().map(|v| v.abs()).sum();
    let clipped: f64 = raw.iter().filter(|v| **v < 0.0).map(|v| -v).sum();
    let clipped_fraction = if total > 0.0 { clipped / total } else { 0.0 };
    if clipped_fraction > 0.05 {
        return Err(FakeStatError::Clipped { fraction: clipped_fraction });
    }
    let sigma_sq: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
    let mut residual = vec![(rhs[0]).abs(); n + 1];
    for i in 1..=n {
        let conv: f64 = (0..i).map(|j| w[i - j - 1] * sigma_sq[j]).sum();
        residual[i] = (conv - rhs[i]).abs();
    }
    let max_residual = residual.iter().copied().fold(0.0, f64::max);
    let midpoint_residual = midpoint_check(cfg, &sigma_sq, &phi0)?;
    Ok(SigmaSolution {
        grid,
        sigma_sq,
        residual,
        max_residual,
        midpoint_residual,
        clipped_fraction,
        phi_vals: phi.values,
        phi0_vals: phi0,
        rhs,
    })
}

/// `max |(f^2 * s)(t) - c lambda^2 (1 - phi0(t)^2)|` over a spread of cell
/// midpoints, with `phi0` linearly interpolated.
fn midpoint_check(cfg: &FakeStatConfig, sigma_sq: &[f64], phi0: &[f64]) -> Result<f64> {
    let grid = cfg.grid;
    let n = grid.n();
    let h = grid.dt();
    let phi0 = GridFn { grid, values: phi0.to_vec() };
    let scale = cfg.c * cfg.lambda * cfg.lambda;
    let step = (n / MIDPOINT_PROBES).max(1);
    let mut worst: f64 = 0.0;
    for k in (0..n).step_by(step) {
        let t = (k as f64 + 0.5) * h;
        let sq = |u: f64| specfn::ml_density_sq_integral(cfg.alpha, cfg.lambda, u.max(0.0));
        let mut conv = 0.0;
        for (j, s) in sigma_sq.iter().enumerate().take(k + 1) {
            let lo = grid.node(j);
            let hi = grid.node(j + 1).min(t);
            conv += s * (sq(t - lo)? - sq(t - hi)?);
        }
        let p = phi0.interpolate(t);
        worst = worst.max((conv - scale * (1.0 - p * p)).abs());
    }
    Ok(worst)
}

impl SigmaSolution {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,sigma_sq,residual")?;
        for i in 0..self.grid.n() {
            writeln!(w, "{},{},{}", self.grid.node(i), self.sigma_sq[i], self.residual[i + 1])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeStat {
    pub t: f64,
    pub mean: f64,
    pub mean_se: f64,
    pub var: f64,
    pub var_se: f64,
    pub mean_ok: bool,
    pub var_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FakeStatReport {
    pub target_mean: f64,
    pub target_var: f64,
    pub n_paths: usize,
    pub probes: Vec<ProbeStat>,
    pub mean_flat: bool,
    pub var_flat: bool,
    /// Discrete mean curve of the scheme (no Monte Carlo).
    pub scheme_mean: Vec<f64>,
    pub negative_paths: usize,
}

impl FakeStatReport {
    pub fn passed(&self) -> bool {
        self.mean_flat && self.var_flat && self.probes.iter().all(|p| p.mean_ok && p.var_ok)
    }
}

pub const MIN_VALIDATION_PATHS: usize = 100;

/// Limit parameters of the fake stationary model: drift `theta/lambda` in
/// the `lambda (theta' - V)` convention, Gamma initial law on target.
pub fn limit_params(cfg: &FakeStatConfig, sol: &SigmaSolution) -> Result<LimitParams> {
    let phi = GridFn { grid: sol.grid, values: sol.phi_vals.clone() };
    let theta = cfg.theta.clone();
    let lambda = cfg.lambda;
    Ok(LimitParams {
        alpha: cfg.alpha,
        lambda,
        nu: cfg.nu,
        theta: std::sync::Arc::new(move |t| theta(t) / lambda),
        sigma: volterra::constant(1.0),
        phi: std::sync::Arc::new(move |t| phi.interpolate(t)),
        init: InitLaw::Gamma { mean: cfg.target_mean(), var: cfg.target_var() },
    })
}

/// Monte Carlo mean and variance of `V` at `probes` (times in `[0, t0]`),
/// each compared with its target within 3 standard errors, plus pairwise
/// flatness across probes.
pub fn validate_fake_stationarity(
    cfg: &FakeStatConfig,
    sol: &SigmaSolution,
    n_paths: usize,
    seed: u64,
    probes: &[f64],
) -> Result<FakeStatReport> {
    if n_paths < MIN_VALIDATION_PATHS {
        return Err(FakeStatError::TooFewPaths { need: MIN_VALIDATION_PATHS, got: n_paths });
    }
    let p = limit_params(cfg, sol)?;
    let sigma: Vec<f64> = sol.sigma_sq.iter().map(|s| s.sqrt()).collect();
    let weights = SchemeWeights::new(&p, &sol.grid, Scheme::FormA)?.with_cell_sigma(&sigma);
    let idx: Vec<usize> = probes.iter().map(|&t| sol.grid.nearest(t)).collect();
    let grid = sol.grid;
    let samples = crate::mc::run_paths(n_paths, |i| {
        let dw = volterra::brownian_increments(seed, "volterra-w", i, grid.t0(), grid.n());
        let v0 = volterra::draw_init(&p, seed, i);
        let path = weights.run(v0, &dw);
        let vals: Vec<f64> = idx.iter().map(|&k| path.values[k]).collect();
        (vals, path.values.iter().any(|v| *v < 0.0))
    });
    let negative_paths = samples.iter().filter(|s| s.1).count();
    let tm = cfg.target_mean();
    let tv = cfg.target_var();
    let summaries: Vec<Summary> = (0..idx.len())
        .map(|k| stats::summarize(&samples.iter().map(|s| s.0[k]).collect::<Vec<f64>>()))
        .collect();
    let probes_out: Vec<ProbeStat> = summaries
        .iter()
        .zip(&idx)
        .map(|(s, &k)| ProbeStat {
            t: grid.node(k),
            mean: s.mean,
            mean_se: s.mean_se,
            var: s.var,
            var_se: s.var_se,
            mean_ok: stats::within_se(s.mean, tm, s.mean_se, 3.0),
            var_ok: stats::within_se(s.var, tv, s.var_se, 3.0),
        })
        .collect();
    let pairwise = |f: fn(&Summary) -> (f64, f64)| {
        summaries.iter().all(|a| {
            summaries.iter().all(|b| {
                let ((ma, sa), (mb, sb)) = (f(a), f(b));
                (ma - mb).abs() <= 3.0 * (sa * sa + sb * sb).sqrt()
            })
        })
    };
    let scheme_mean = volterra::limit_mean(&p, &grid)?.values;
    Ok(FakeStatReport {
        target_mean: tm,
        target_var: tv,
        n_paths,
        mean_flat: pairwise(|s| (s.mean, s.mean_se)),
        var_flat: pairwise(|s| (s.var, s.var_se)),
        probes: probes_out,
        scheme_mean,
        negative_paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn cfg(alpha: f64, c: f64, theta: Func, n: usize) -> FakeStatConfig {
        FakeStatConfig::new(alpha, 1.0, 0.3, c, theta, 1.0, Grid::new(1.0, n).unwrap()).unwrap()
    }

    #[test]
    fn constant_theta_gives_unit_phi() {
        let phi = build_phi(&cfg(0.7, 0.5, volterra::constant(1.0), 64)).unwrap();
        assert!(phi.values.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn linear_theta_gives_power_phi() {
        let c = cfg(0.7, 0.5, Arc::new(|s| 1.0 + s), 64);
        let phi = build_phi(&c).unwrap();
        for i in [0, 10, 64] {
            let t = c.grid.node(i);
            let want = 1.0 - t.powf(1.7) * specfn::rgamma(2.7);
            assert!((phi.values[i] - want).abs() < 1e-12, "{} vs {want}", phi.values[i]);
        }
    }

    #[test]
    fn alpha_one_sigma_is_constant() {
        // c = 1/(2 lambda) gives sigma^2 = 1
        let c = cfg(1.0, 0.5, volterra::constant(1.0), 128);
        let sol = solve_sigma(&c).unwrap();
        assert!(sol.sigma_sq.iter().all(|s| (s - 1.0).abs() < 1e-8), "{:?}", &sol.sigma_sq[..4]);
        assert!(sol.max_residual < 1e-8);
    }

    #[test]
    fn rhs_matches_resolvent_identity() {
        let c = cfg(0.7, 0.5, volterra::constant(1.0), 128);
        let sol = solve_sigma(&c).unwrap();
        for i in [1, 64, 128] {
            let r = specfn::ml_resolvent(c.alpha, 1.0, c.grid.node(i)).unwrap();
            assert!((sol.rhs[i] - 0.5 * (1.0 - r * r)).abs() < 1e-12);
        }
        assert!(sol.sigma_sq.iter().all(|s| *s > 0.0));
        assert!(sol.rhs.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn midpoint_residual_shrinks_under_refinement() {
        let coarse = solve_sigma(&cfg(0.7, 0.5, volterra::constant(1.0), 64)).unwrap();
        let fine = solve_sigma(&cfg(0.7, 0.5, volterra::constant(1.0), 256)).unwrap();
        // order at least 2a - 1 over two halvings
        let ratio = coarse.midpoint_residual / fine.midpoint_residual;
        assert!(ratio >= 4f64.powf(0.4), "ratio {ratio}");
        assert!(fine.max_residual < 1e-12);
    }

    #[test]
    fn modulated_theta_mean_stays_flat() {
        let c = cfg(0.7, 0.5, Arc::new(|s| 1.0 + 0.5 * (-s).exp()), 128);
        let sol = solve_sigma(&c).unwrap();
        let r = validate_fake_stationarity(&c, &sol, 200, 3, &[0.5, 1.0]).unwrap();
        assert!(r.scheme_mean.iter().all(|m| (m - 1.0).abs() < 1e-3), "{:?}", &r.scheme_mean[..4]);
    }
}
