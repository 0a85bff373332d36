//! The limiting rough square-root Volterra equation, simulated in two
//! equivalent forms on a uniform grid.
//!
//! Form A is the resolvent form
//! `L_t = L_0 (phi - f*phi)(t) + (f*theta)(t) + (nu/lambda) int f(t-s) sigma(s) sqrt(L_s) dW_s`
//! and form B the fractional form
//! `L_t = L_0 phi(t) + int K(t-s) lambda (theta(s) - L_s) ds + nu int K(t-s) sigma(s) sqrt(L_s) dW_s`,
//! with `f = f_{a,lambda}` and `K = K_a`. Both are explicit Volterra-Euler
//! schemes: the drift kernel is integrated exactly per cell and the noise
//! weight of cell `j` for node `i` is the root of the cell integral of the
//! squared kernel, so the conditional variance of every stochastic
//! increment is exact for a frozen integrand. The square root is applied to
//! the positive part.
//!
//! The deterministic part of form A is the product-integrated `f*theta` and
//! `phi - f*phi`, the same quantities [`limit_mean`] returns, so the Monte
//! Carlo mean of form A is unbiased for the discrete mean curve.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Grid, GridFn};
use crate::hawkes::InitLaw;
use crate::kernels::{Kernel, KernelError, ProductRule};
use crate::quad;
use crate::rng;
use crate::specfn::{self, FracOrder, SpecFnError};
use crate::stats;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VolterraError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    SpecFn(#[from] SpecFnError),
    #[error("invalid limit parameters: {0}")]
    Params(String),
    #[error("drift step {step} >= 1 on this grid; refine to at least {suggested_n} steps")]
    Guard { step: f64, suggested_n: usize },
    #[error("need at least {need} paths, got {got}")]
    TooFewPaths { need: usize, got: usize },
    #[error("need at least {need} grid steps, got {got}")]
    TooShort { need: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, VolterraError>;

/// Deterministic input curve.
pub type Func = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub fn constant(c: f64) -> Func {
    Arc::new(move |_| c)
}

#[derive(Clone)]
pub struct LimitParams {
    pub alpha: FracOrder,
    pub lambda: f64,
    pub nu: f64,
    pub theta: Func,
    pub sigma: Func,
    /// Raw initial-decay curve `phi`; form A uses `phi - f*phi`.
    pub phi: Func,
    pub init: InitLaw,
}

impl std::fmt::Debug for LimitParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LimitParams")
            .field("alpha", &self.alpha.value())
            .field("lambda", &self.lambda)
            .field("nu", &self.nu)
            .field("init", &self.init)
            .finish_non_exhaustive()
    }
}

impl LimitParams {
    /// Constant `theta`, unit `sigma` and `phi`.
    pub fn basic(alpha: f64, lambda: f64, nu: f64, theta0: f64, init: InitLaw) -> Result<Self> {
        let p = Self {
            alpha: FracOrder::new(alpha)?,
            lambda,
            nu,
            theta: constant(theta0),
            sigma: constant(1.0),
            phi: constant(1.0),
            init,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.value() <= 0.5 {
            return Err(VolterraError::Params(format!("alpha = {} must exceed 1/2", self.alpha.value())));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(VolterraError::Params(format!("lambda = {} must be positive", self.lambda)));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(VolterraError::Params(format!("nu = {} must be nonnegative", self.nu)));
        }
        Ok(())
    }

    pub fn density(&self) -> Kernel {
        Kernel::mittag_leffler(self.alpha, self.lambda).expect("lambda validated")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    FormA,
    FormB,
}

/// `(phi - f*phi, f*theta)` on the nodes of `grid`.
fn form_a_curves(p: &LimitParams, grid: &Grid) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = ProductRule::for_kernel(&p.density(), grid)?;
    let phi = GridFn::from_fn(*grid, |t| (p.phi)(t));
    let theta = GridFn::from_fn(*grid, |t| (p.theta)(t));
    let fphi = rule.convolve(&phi.values)?;
    let ftheta = rule.convolve(&theta.values)?;
    let phi0 = phi.values.iter().zip(&fphi).map(|(a, b)| a - b).collect();
    Ok((phi0, ftheta))
}

/// `E[L_t] = E[L_0] (phi - f*phi)(t) + (f*theta)(t)`.
pub fn limit_mean(p: &LimitParams, grid: &Grid) -> Result<GridFn> {
    let (phi0, ftheta) = form_a_curves(p, grid)?;
    let m = p.init.mean();
    Ok(GridFn { grid: *grid, values: phi0.iter().zip(&ftheta).map(|(a, b)| m * a + b).collect() })
}

/// `int_{lo}^{lo+h} k^2` for the Mittag-Leffler density.
fn density_sq_cell(alpha: FracOrder, lambda: f64, lo: f64, h: f64) -> Result<f64> {
    if lo < 4.0 * h {
        Ok(specfn::ml_density_sq_integral(alpha, lambda, lo + h)? - specfn::ml_density_sq_integral(alpha, lambda, lo)?)
    } else {
        let failure = std::cell::Cell::new(false);
        let v = quad::gauss_legendre8(
            |u| match specfn::ml_density(alpha, lambda, u) {
                Ok(v) => v * v,
                Err(_) => {
                    failure.set(true);
                    0.0
                }
            },
            lo,
            lo + h,
        );
        if failure.get() {
            return Err(SpecFnError::Domain(format!("density failed on [{lo}, {}]", lo + h)).into());
        }
        Ok(v)
    }
}

/// Per-grid weights shared by every path of a scheme.
#[derive(Debug, Clone)]
pub struct SchemeWeights {
    pub grid: Grid,
    pub scheme: Scheme,
    lambda: f64,
    nu: f64,
    /// Drift weights per lag, reversed (`rev[n - m]` is lag `m`).
    drift_rev: Vec<f64>,
    /// Noise weights per lag, reversed.
    noise_rev: Vec<f64>,
    /// Initial-decay curve multiplying `L_0`.
    pub init_curve: Vec<f64>,
    /// Deterministic forcing (`f*theta` for A, `theta` for B).
    forcing: Vec<f64>,
    sigma: Vec<f64>,
}

impl SchemeWeights {
    pub fn new(p: &LimitParams, grid: &Grid, scheme: Scheme) -> Result<Self> {
        p.validate()?;
        let n = grid.n();
        let h = grid.dt();
        let a = p.alpha;
        let (drift, noise, init_curve, forcing) = match scheme {
            Scheme::FormA => {
                let (phi0, ftheta) = form_a_curves(p, grid)?;
                let noise = (1..=n)
                    .map(|m| Ok(density_sq_cell(a, p.lambda, (m - 1) as f64 * h, h)?.max(0.0).sqrt()))
                    .collect::<Result<Vec<f64>>>()?;
                (vec![0.0; n], noise, phi0, ftheta)
            }
            Scheme::FormB => {
                let fk = specfn::FractionalKernel::new(a);
                let drift: Vec<f64> = (1..=n).map(|m| fk.integral(m as f64 * h) - fk.integral((m - 1) as f64 * h)).collect();
                let noise: Vec<f64> = (1..=n)
                    .map(|m| (fk.square_integral(m as f64 * h) - fk.square_integral((m - 1) as f64 * h)).max(0.0).sqrt())
                    .collect();
                let step = p.lambda * drift[0];
                if step >= 1.0 {
                    let suggested = (n as f64 * (2.0 * step).powf(1.0 / a.value())).ceil() as usize;
                    return Err(VolterraError::Guard { step, suggested_n: suggested });
                }
                let phi = (0..=n).map(|i| (p.phi)(grid.node(i))).collect();
                let theta = (0..=n).map(|i| (p.theta)(grid.node(i))).collect();
                (drift, noise, phi, theta)
            }
        };
        let rev = |w: Vec<f64>| -> Vec<f64> {
            let mut r = w;
            r.reverse();
            r
        };
        let sigma = (0..=n).map(|i| (p.sigma)(grid.node(i))).collect();
        Ok(Self {
            grid: *grid,
            scheme,
            lambda: p.lambda,
            nu: p.nu,
            drift_rev: rev(drift),
            noise_rev: rev(noise),
            init_curve,
            forcing,
            sigma,
        })
    }

    /// Replace the noise modulation by per-cell values (`sigma[j]` on cell `j`).
    pub fn with_cell_sigma(mut self, sigma: &[f64]) -> Self {
        for (dst, src) in self.sigma.iter_mut().zip(sigma) {
            *dst = *src;
        }
        self
    }

    /// Run the scheme for one Brownian path (`dw` has `n` increments).
    pub fn run(&self, init: f64, dw: &[f64]) -> VolterraPath {
        let n = self.grid.n();
        let h = self.grid.dt();
        let sqrt_h = h.sqrt();
        let mut v = vec![0.0; n + 1];
        // x_j: drift integrand, y_j: noise integrand times the unit normal
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        let noise_scale = match self.scheme {
            Scheme::FormA => self.nu / self.lambda,
            Scheme::FormB => self.nu,
        };
        let mut negative = 0.0;
        let mut total = 0.0;
        for i in 0..=n {
            let mut val = init * self.init_curve[i];
            if i > 0 {
                let dr = &self.drift_rev[n - i..];
                let nr = &self.noise_rev[n - i..];
                let sn: f64 = nr.iter().zip(&y[..i]).map(|(a, b)| a * b).sum();
                let sd: f64 = match self.scheme {
                    Scheme::FormA => 0.0,
                    Scheme::FormB => dr.iter().zip(&x[..i]).map(|(a, b)| a * b).sum(),
                };
                val += sd + noise_scale * sn;
                if self.scheme == Scheme::FormA {
                    val += self.forcing[i];
                }
            }
            v[i] = val;
            if val < 0.0 {
                negative -= val;
            }
            total += val.abs();
            if i < n {
                let pos = val.max(0.0);
                if self.scheme == Scheme::FormB {
                    x[i] = self.lambda * (self.forcing[i] - val);
                }
                y[i] = self.sigma[i] * pos.sqrt() * dw[i] / sqrt_h;
            }
        }
        let avg = total / (n + 1) as f64;
        VolterraPath {
            grid: self.grid,
            values: v,
            increments: dw.to_vec(),
            scheme: self.scheme,
            init,
            negative_fraction: if avg > 0.0 { negative / (n + 1) as f64 / avg } else { 0.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolterraPath {
    pub grid: Grid,
    /// Pre-truncation values at the nodes.
    pub values: Vec<f64>,
    /// Driving Brownian increments, one per cell.
    pub increments: Vec<f64>,
    pub scheme: Scheme,
    pub init: f64,
    /// Mean negative part relative to the mean absolute value.
    pub negative_fraction: f64,
}

impl VolterraPath {
    /// Truncated values `max(L, 0)`.
    pub fn positive(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.max(0.0)).collect()
    }

    /// Flag paths whose negative mass exceeds 20 % of the path average.
    pub fn negative_flag(&self) -> bool {
        self.negative_fraction > 0.2
    }
}

/// Brownian increments on `n` cells of `[0, t0]` for path `index`.
pub fn brownian_increments(seed: u64, tag: &str, index: u64, t0: f64, n: usize) -> Vec<f64> {
    let mut r = rng::stream(seed, tag, index);
    let s = (t0 / n as f64).sqrt();
    (0..n).map(|_| s * r.sample::<f64, _>(StandardNormal)).collect()
}

/// Sum consecutive blocks of `factor` increments.
pub fn coarsen_increments(dw: &[f64], factor: usize) -> Vec<f64> {
    dw.chunks(factor).map(|c| c.iter().sum()).collect()
}

/// Draw `L_0` from its own substream.
pub fn draw_init(p: &LimitParams, seed: u64, index: u64) -> f64 {
    let mut r = rng::stream(seed, "volterra-init", index);
    p.init.sample(&mut r)
}

/// One path; the same `(seed, index, grid)` drives both schemes with
/// identical increments.
pub fn simulate_limit(p: &LimitParams, grid: &Grid, seed: u64, index: u64, scheme: Scheme) -> Result<VolterraPath> {
    let w = SchemeWeights::new(p, grid, scheme)?;
    let dw = brownian_increments(seed, "volterra-w", index, grid.t0(), grid.n());
    Ok(w.run(draw_init(p, seed, index), &dw))
}

/// Paths `0..n_paths` with shared weights.
pub fn simulate_many(p: &LimitParams, grid: &Grid, seed: u64, n_paths: usize, scheme: Scheme) -> Result<Vec<VolterraPath>> {
    let w = SchemeWeights::new(p, grid, scheme)?;
    Ok(crate::mc::run_paths(n_paths, |i| {
        let dw = brownian_increments(seed, "volterra-w", i, grid.t0(), grid.n());
        w.run(draw_init(p, seed, i), &dw)
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricePath {
    pub variance: VolterraPath,
    pub price: Vec<f64>,
}

/// Log-Euler price driven by `rho dW1 + sqrt(1 - rho^2) dW2`, with `W1`
/// the variance noise (form A).
pub fn simulate_price(p: &LimitParams, rho: f64, s0: f64, grid: &Grid, seed: u64, index: u64) -> Result<PricePath> {
    if !(rho > -1.0 && rho < 1.0) || !(s0 > 0.0) {
        return Err(VolterraError::Params(format!("need rho in (-1, 1) and S0 > 0, got {rho}, {s0}")));
    }
    let v = simulate_limit(p, grid, seed, index, Scheme::FormA)?;
    Ok(price_from_variance(v, rho, s0, seed, index))
}

pub fn price_from_variance(v: VolterraPath, rho: f64, s0: f64, seed: u64, index: u64) -> PricePath {
    let grid = v.grid;
    let h = grid.dt();
    let dw2 = brownian_increments(seed, "volterra-w2", index, grid.t0(), grid.n());
    let rho_bar = (1.0 - rho * rho).sqrt();
    let mut price = Vec::with_capacity(grid.len());
    let mut ls = s0.ln();
    price.push(s0);
    for i in 0..grid.n() {
        let vi = v.values[i].max(0.0);
        ls += -0.5 * vi * h + vi.sqrt() * (rho * v.increments[i] + rho_bar * dw2[i]);
        price.push(ls.exp());
    }
    PricePath { variance: v, price }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormDistanceRow {
    pub n: usize,
    /// Mean over paths of `sup_t |A - B| / sup_t |A|`.
    pub mean_relative: f64,
    /// Worst path of the same ratio.
    pub max_relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormDistanceReport {
    pub rows: Vec<FormDistanceRow>,
    /// Mean relative distance strictly decreasing along `steps`.
    pub decreasing: bool,
}

/// Coupled runs of both forms on each grid in `steps` (`[0, t0]`), driven
/// by increments drawn on the finest grid and summed onto coarser ones.
pub fn form_distance(p: &LimitParams, t0: f64, steps: &[usize], n_paths: usize, seed: u64) -> Result<FormDistanceReport> {
    let finest = steps.iter().copied().max().unwrap_or(0);
    if steps.is_empty() || steps.iter().any(|&n| n == 0 || finest % n != 0) {
        return Err(VolterraError::Params(format!("steps {steps:?} must divide the finest grid")));
    }
    let mut rows = Vec::new();
    for &n in steps {
        let grid = Grid::new(t0, n).map_err(KernelError::from)?;
        let a = SchemeWeights::new(p, &grid, Scheme::FormA)?;
        let b = SchemeWeights::new(p, &grid, Scheme::FormB)?;
        let ratios = crate::mc::run_paths(n_paths, |i| {
            let dw = coarsen_increments(&brownian_increments(seed, "volterra-w", i, t0, finest), finest / n);
            let v0 = draw_init(p, seed, i);
            let pa = a.run(v0, &dw);
            let pb = b.run(v0, &dw);
            let sup = pa.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let dist = pa.values.iter().zip(&pb.values).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            if sup > 0.0 { dist / sup } else { dist }
        });
        rows.push(FormDistanceRow {
            n,
            mean_relative: ratios.iter().sum::<f64>() / n_paths.max(1) as f64,
            max_relative: ratios.iter().copied().fold(0.0, f64::max),
        });
    }
    let decreasing = rows.windows(2).all(|w| w[1].mean_relative < w[0].mean_relative);
    Ok(FormDistanceReport { rows, decreasing })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderRow {
    pub order: f64,
    pub log_h: f64,
    pub log_moment: f64,
    pub fit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderOrder {
    pub order: f64,
    pub exponent: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderEstimate {
    pub orders: Vec<HolderOrder>,
    /// Average over the orders.
    pub exponent: f64,
    pub rows: Vec<HolderRow>,
}

pub const HOLDER_MIN_PATHS: usize = 100;
pub const HOLDER_MIN_STEPS: usize = 1 << 10;

/// Slope of `log E|L_{t+h} - L_t|^p` against `log h` over dyadic lags
/// `h = 2^k dt`, `k = 0..lags`, divided by `p`.
pub fn holder_estimate(paths: &[VolterraPath], p_list: &[f64], lags: usize) -> Result<HolderEstimate> {
    if paths.len() < HOLDER_MIN_PATHS {
        return Err(VolterraError::TooFewPaths { need: HOLDER_MIN_PATHS, got: paths.len() });
    }
    let grid = paths[0].grid;
    if grid.n() < HOLDER_MIN_STEPS {
        return Err(VolterraError::TooShort { need: HOLDER_MIN_STEPS, got: grid.n() });
    }
    let max_lag = 1usize << lags;
    if max_lag * 8 > grid.n() {
        return Err(VolterraError::TooShort { need: max_lag * 8, got: grid.n() });
    }
    let mut orders = Vec::new();
    let mut rows = Vec::new();
    for &p in p_list {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 0..=lags {
            let lag = 1usize << k;
            let mut acc = 0.0;
            let mut count = 0usize;
            for path in paths {
                let v = path.positive();
                for i in 0..(v.len() - lag) {
                    acc += (v[i + lag] - v[i]).abs().powf(p);
                    count += 1;
                }
            }
            xs.push((lag as f64 * grid.dt()).ln());
            ys.push((acc / count as f64).ln());
        }
        let fit = stats::linear_fit(&xs, &ys);
        for (x, y) in xs.iter().zip(&ys) {
            rows.push(HolderRow { order: p, log_h: *x, log_moment: *y, fit: fit.intercept + fit.slope * x });
        }
        orders.push(HolderOrder { order: p, exponent: fit.slope / p, se: fit.slope_se / p });
    }
    let exponent = orders.iter().map(|o| o.exponent).sum::<f64>() / orders.len() as f64;
    Ok(HolderEstimate { orders, exponent, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub init: f64,
    pub order: f64,
    /// `E|L_0|^p`.
    pub init_moment: f64,
    /// `sup_t E|L_t|^p`.
    pub sup_moment: f64,
    /// `E sup_t |L_t|^p`.
    pub moment_of_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    /// Per order: R^2 of the affine fit of `sup_moment` on `init_moment`.
    pub sup_moment_r2: Vec<(f64, f64)>,
    pub moment_of_sup_r2: Vec<(f64, f64)>,
    /// Orders at which empirical moments are dominated by rare paths.
    pub heavy_tail_warning: bool,
}

/// Empirical moments across a ladder of deterministic initial values.
pub fn moment_bound_check(
    p: &LimitParams,
    p_orders: &[f64],
    ladder: &[f64],
    n_paths: usize,
    grid: &Grid,
    seed: u64,
    scheme: Scheme,
) -> Result<MomentReport> {
    let mut rows = Vec::new();
    for &c in ladder {
        let mut q = p.clone();
        q.init = InitLaw::Fixed { value: c };
        let paths = simulate_many(&q, grid, seed, n_paths, scheme)?;
        for &ord in p_orders {
            let mut sup_moment: f64 = 0.0;
            for i in 0..grid.len() {
                let m = paths.iter().map(|x| x.values[i].max(0.0).powf(ord)).sum::<f64>() / n_paths as f64;
                sup_moment = sup_moment.max(m);
            }
            let moment_of_sup = paths
                .iter()
                .map(|x| x.values.iter().fold(0.0f64, |a, v| a.max(v.max(0.0))).powf(ord))
                .sum::<f64>()
                / n_paths as f64;
            rows.push(MomentRow { init: c, order: ord, init_moment: c.powf(ord), sup_moment, moment_of_sup });
        }
    }
    let fit = |f: fn(&MomentRow) -> f64| -> Vec<(f64, f64)> {
        p_orders
            .iter()
            .map(|&ord| {
                let sel: Vec<&MomentRow> = rows.iter().filter(|r| r.order == ord).collect();
                let x: Vec<f64> = sel.iter().map(|r| r.init_moment).collect();
                let y: Vec<f64> = sel.iter().map(|r| f(r)).collect();
                (ord, stats::linear_fit(&x, &y).r_squared)
            })
            .collect()
    };
    Ok(MomentReport {
        sup_moment_r2: fit(|r| r.sup_moment),
        moment_of_sup_r2: fit(|r| r.moment_of_sup),
        heavy_tail_warning: p_orders.iter().any(|&o| o >= 8.0),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed(v: f64) -> InitLaw {
        InitLaw::Fixed { value: v }
    }

    #[test]
    fn deterministic_fixed_point() {
        let p = LimitParams::basic(0.7, 1.0, 0.0, 1.5, fixed(1.5)).unwrap();
        let g = Grid::new(1.0, 256).unwrap();
        for scheme in [Scheme::FormA, Scheme::FormB] {
            let path = simulate_limit(&p, &g, 1, 0, scheme).unwrap();
            let err = path.values.iter().map(|v| (v - 1.5).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "{scheme:?}: {err}");
        }
    }

    #[test]
    fn form_a_from_zero_is_one_minus_resolvent() {
        let p = LimitParams::basic(0.6, 1.0, 0.0, 2.0, fixed(0.0)).unwrap();
        let g = Grid::new(1.0, 200).unwrap();
        let path = simulate_limit(&p, &g, 0, 0, Scheme::FormA).unwrap();
        for i in [1, 50, 200] {
            let want = 2.0 * (1.0 - specfn::ml_resolvent(p.alpha, 1.0, g.node(i)).unwrap());
            assert!((path.values[i] - want).abs() < 1e-10);
        }
    }

    #[test]
    fn alpha_one_form_b_is_euler_cir() {
        let p = LimitParams::basic(1.0, 2.0, 0.5, 1.0, fixed(0.8)).unwrap();
        let g = Grid::new(1.0, 500).unwrap();
        let path = simulate_limit(&p, &g, 5, 2, Scheme::FormB).unwrap();
        let h = g.dt();
        let mut v = 0.8f64;
        for i in 0..g.n() {
            let dw = path.increments[i];
            v = v + 2.0 * (1.0 - v) * h + 0.5 * v.max(0.0).sqrt() * dw;
            assert!((path.values[i + 1] - v).abs() < 1e-10);
        }
    }

    #[test]
    fn forms_share_increments() {
        let p = LimitParams::basic(0.75, 1.0, 0.3, 1.0, fixed(1.0)).unwrap();
        let g = Grid::new(1.0, 64).unwrap();
        let a = simulate_limit(&p, &g, 9, 4, Scheme::FormA).unwrap();
        let b = simulate_limit(&p, &g, 9, 4, Scheme::FormB).unwrap();
        assert_eq!(a.increments, b.increments);
        assert_eq!(coarsen_increments(&[1.0, 2.0, 3.0, 4.0], 2), vec![3.0, 7.0]);
    }

    #[test]
    fn zero_variance_keeps_price_flat() {
        let p = LimitParams::basic(0.75, 1.0, 0.0, 0.0, fixed(0.0)).unwrap();
        let g = Grid::new(1.0, 32).unwrap();
        let s = simulate_price(&p, -0.7, 100.0, &g, 0, 0).unwrap();
        assert!(s.price.iter().all(|&x| (x - 100.0).abs() < 1e-12));
    }

    #[test]
    fn limit_mean_at_zero() {
        let mut p = LimitParams::basic(0.7, 1.0, 0.3, 1.0, fixed(2.0)).unwrap();
        p.phi = Arc::new(|t| 1.0 + t);
        let m = limit_mean(&p, &Grid::new(1.0, 64).unwrap()).unwrap();
        assert!((m.values[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn holder_needs_enough_data() {
        let p = LimitParams::basic(0.75, 1.0, 0.3, 1.0, fixed(1.0)).unwrap();
        let g = Grid::new(1.0, 64).unwrap();
        let paths = simulate_many(&p, &g, 0, 10, Scheme::FormB).unwrap();
        assert!(matches!(holder_estimate(&paths, &[2.0], 3), Err(VolterraError::TooFewPaths { .. })));
    }
}
