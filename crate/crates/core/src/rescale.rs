//! Nearly unstable Hawkes sequences and their rescaled processes.
//!
//! A schedule fixes, for every observation scale `T`, the branching factor
//! `a_T` and the normalization `mu~^T`. With `phi(t) ~ C t^{-1-a}` and
//! `delta = C Gamma(1-a)/a`, the matched schedule `a_T = 1 - lambda delta/T^a`
//! gives `T (1-a_T) Psi^T(T .) -> f_{a,lambda}`; the reference schedule
//! `a_T = 1 - lambda/T^a` reaches the same limit with rate `lambda/delta`.
//! The normalization is `mu~^T(x) = lambda T^{a-1} / (nu^2 delta sigma^2(xT))`,
//! evaluated at `s/T^2` for Hawkes time `s`, and the baseline is the constant
//! `theta0 mu~^T(0)`.
//!
//! For a path on `[0, T t0]` and rescaled time `t in [0, t0]`,
//! `Lambda*_t = (1-a_T)/mu~^T(t/T) Lambda_{tT}`,
//! `I~_t = (1-a_T)/T int_0^{tT} Lambda_s/mu~^T(s/T^2) ds`,
//! `N~_t = (1-a_T)/T sum_{tau_i <= tT} 1/mu~^T(tau_i/T^2)` and
//! `M~_t = sqrt((1-a_T)/T) int_0^{tT} dM_s / sqrt(mu~^T(s/T^2))`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Grid, GridError, GridFn};
use crate::hawkes::{self, Baseline, HawkesConfig, HawkesError, HawkesPath, InitLaw, SimMethod};
use crate::kernels::{self, Kernel, KernelError};
use crate::specfn::{self, FracOrder, SpecFnError};
use crate::stats::{self, Summary};
use crate::volterra::{self, Func, LimitParams, Scheme, VolterraError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RescaleError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Hawkes(#[from] HawkesError),
    #[error(transparent)]
    SpecFn(#[from] SpecFnError),
    #[error(transparent)]
    Volterra(#[from] VolterraError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("scale T = {t} too small: need T > {min}")]
    ScaleTooSmall { t: f64, min: f64 },
    #[error("path horizon {path} does not match T t0 = {expected}")]
    HorizonMismatch { path: f64, expected: f64 },
    #[error("need at least {need} paths, got {got}")]
    TooFewPaths { need: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, RescaleError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// `a_T = 1 - lambda delta / T^a`.
    Matched,
    /// `a_T = 1 - lambda / T^a`.
    Reference,
}

/// How the initial mass of the Hawkes path follows a target `Lambda*_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitCoupling {
    /// `init = Lambda*_0 mu~^T(0) / (1 - a_T)`, which makes the rescaled
    /// initial contribution converge to `Lambda*_0 R_{a,lambda}(t)`.
    Consistent,
    /// `init = T^a Lambda*_0`.
    PowerT,
}

/// Samples of `sigma` used to bound and differentiate it.
const SIGMA_SAMPLES: usize = 1024;

#[derive(Clone)]
pub struct ScalingSchedule {
    pub alpha: FracOrder,
    /// Limit rate `lambda` passed in.
    pub lambda_lim: f64,
    pub nu: f64,
    /// `C` in `phi(t) ~ C t^{-1-a}`.
    pub c_tail: f64,
    /// `delta = C Gamma(1-a)/a`.
    pub delta_const: f64,
    pub theta0: f64,
    pub sigma_fn: Func,
    pub phi0_fn: Func,
    pub t_list: Vec<f64>,
    /// Unit-mass kernel shape `phi`.
    pub kernel: Kernel,
    pub kind: ScheduleKind,
    /// Rescaled horizon.
    pub t0: f64,
    /// Law of `Lambda*_0`.
    pub init_star: InitLaw,
    pub coupling: InitCoupling,
    sigma_sq_min: f64,
    sigma_sq_max: f64,
    sigma_sq_lip: f64,
    sigma_constant: bool,
}

impl std::fmt::Debug for ScalingSchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalingSchedule")
            .field("alpha", &self.alpha.value())
            .field("lambda_lim", &self.lambda_lim)
            .field("nu", &self.nu)
            .field("c_tail", &self.c_tail)
            .field("delta_const", &self.delta_const)
            .field("theta0", &self.theta0)
            .field("t_list", &self.t_list)
            .field("kernel", &self.kernel)
            .field("kind", &self.kind)
            .field("t0", &self.t0)
            .field("init_star", &self.init_star)
            .field("coupling", &self.coupling)
            .finish_non_exhaustive()
    }
}

/// Matched schedule with `phi0 = 1`, `t0 = 1`, `Lambda*_0 = 0` and the
/// consistent coupling; adjust with the `with_*` methods.
pub fn make_schedule(
    alpha: f64,
    lambda_lim: f64,
    nu: f64,
    theta0: f64,
    sigma_fn: Func,
    t_list: &[f64],
    kernel: &Kernel,
) -> Result<ScalingSchedule> {
    let a = FracOrder::new(alpha)?;
    if alpha >= 1.0 {
        return Err(RescaleError::Schedule("nearly unstable heavy-tail regime needs alpha < 1".into()));
    }
    if !(lambda_lim > 0.0 && nu > 0.0 && theta0 >= 0.0) {
        return Err(RescaleError::Schedule("need lambda > 0, nu > 0 and theta0 >= 0".into()));
    }
    match kernel.tail_exponent() {
        Some(e) if (e - alpha).abs() < 1e-12 => {}
        other => {
            return Err(RescaleError::Schedule(format!("kernel tail exponent {other:?} does not match alpha = {alpha}")));
        }
    }
    if kernel.scale != 1.0 {
        return Err(RescaleError::Schedule("pass the unit-mass kernel shape".into()));
    }
    if t_list.is_empty() || t_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(RescaleError::Schedule("T list must be nonempty and strictly increasing".into()));
    }
    let c_tail = kernel.tail_constant()?;
    let delta_const = c_tail * libm::tgamma(1.0 - alpha) / alpha;
    let mut s = ScalingSchedule {
        alpha: a,
        lambda_lim,
        nu,
        c_tail,
        delta_const,
        theta0,
        sigma_fn,
        phi0_fn: volterra::constant(1.0),
        t_list: t_list.to_vec(),
        kernel: kernel.clone(),
        kind: ScheduleKind::Matched,
        t0: 1.0,
        init_star: InitLaw::Fixed { value: 0.0 },
        coupling: InitCoupling::Consistent,
        sigma_sq_min: 1.0,
        sigma_sq_max: 1.0,
        sigma_sq_lip: 0.0,
        sigma_constant: true,
    };
    s.refresh_sigma()?;
    for &t in t_list {
        s.a_t(t)?;
    }
    Ok(s)
}

impl ScalingSchedule {
    fn refresh_sigma(&mut self) -> Result<()> {
        let h = self.t0 / SIGMA_SAMPLES as f64;
        let vals: Vec<f64> = (0..=SIGMA_SAMPLES).map(|i| (self.sigma_fn)(i as f64 * h).powi(2)).collect();
        if let Some(v) = vals.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(RescaleError::Schedule(format!("sigma^2 must be positive and finite, got {v}")));
        }
        self.sigma_sq_min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        self.sigma_sq_max = vals.iter().copied().fold(0.0, f64::max);
        self.sigma_sq_lip = vals.windows(2).map(|w| (w[1] - w[0]).abs() / h).fold(0.0, f64::max);
        self.sigma_constant = self.sigma_sq_max - self.sigma_sq_min <= 1e-14 * self.sigma_sq_max;
        Ok(())
    }

    pub fn with_kind(mut self, kind: ScheduleKind) -> Result<Self> {
        self.kind = kind;
        for &t in &self.t_list {
            self.a_t(t)?;
        }
        Ok(self)
    }

    pub fn with_horizon(mut self, t0: f64) -> Result<Self> {
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(RescaleError::Schedule(format!("horizon {t0} must be positive")));
        }
        self.t0 = t0;
        self.refresh_sigma()?;
        Ok(self)
    }

    pub fn with_init(mut self, init_star: InitLaw, coupling: InitCoupling) -> Result<Self> {
        init_star.validate()?;
        self.init_star = init_star;
        self.coupling = coupling;
        Ok(self)
    }

    pub fn with_phi0(mut self, phi0: Func) -> Self {
        self.phi0_fn = phi0;
        self
    }

    pub fn sigma_is_constant(&self) -> bool {
        self.sigma_constant
    }

    /// Rate of the limit: `lambda` for the matched schedule and
    /// `lambda/delta` for the reference one.
    pub fn effective_lambda(&self) -> f64 {
        match self.kind {
            ScheduleKind::Matched => self.lambda_lim,
            ScheduleKind::Reference => self.lambda_lim / self.delta_const,
        }
    }

    /// `T^a (1 - a_T)`.
    pub fn gap_constant(&self) -> f64 {
        match self.kind {
            ScheduleKind::Matched => self.lambda_lim * self.delta_const,
            ScheduleKind::Reference => self.lambda_lim,
        }
    }

    pub fn a_t(&self, t: f64) -> Result<f64> {
        let g = self.gap_constant();
        let min = g.powf(1.0 / self.alpha.value());
        if !(t > min) {
            return Err(RescaleError::ScaleTooSmall { t, min });
        }
        Ok(1.0 - g / t.powf(self.alpha.value()))
    }

    /// `1 - a_T > 0.1`: far from the asymptotic regime.
    pub fn non_asymptotic(&self, t: f64) -> Result<bool> {
        Ok(1.0 - self.a_t(t)? > 0.1)
    }

    fn mu_tilde_level(&self, t: f64) -> f64 {
        self.effective_lambda() * t.powf(self.alpha.value() - 1.0) / (self.nu * self.nu * self.delta_const)
    }

    /// `mu~^T(x)`, floored at `1e-6` of its supremum.
    pub fn mu_tilde(&self, t: f64, x: f64) -> f64 {
        let level = self.mu_tilde_level(t);
        let v = level / (self.sigma_fn)(x * t).powi(2);
        v.max(1e-6 * level / self.sigma_sq_min)
    }

    /// `(1 - a_T) / mu~^T(t/T)` at rescaled time `t`.
    pub fn omega(&self, t_scale: f64, t: f64) -> Result<f64> {
        Ok((1.0 - self.a_t(t_scale)?) / self.mu_tilde(t_scale, t / t_scale))
    }

    /// `inf mu~^T` over the horizon.
    pub fn mu_tilde_min(&self, t: f64) -> f64 {
        self.mu_tilde_level(t) / self.sigma_sq_max
    }

    /// Constant baseline level `theta0 mu~^T(0)`.
    pub fn baseline_level(&self, t: f64) -> f64 {
        self.theta0 * self.mu_tilde(t, 0.0)
    }

    /// Initial-mass law of the Hawkes path at scale `T`.
    pub fn hawkes_init(&self, t: f64) -> Result<InitLaw> {
        let k = match self.coupling {
            InitCoupling::Consistent => self.mu_tilde(t, 0.0) / (1.0 - self.a_t(t)?),
            InitCoupling::PowerT => t.powf(self.alpha.value()),
        };
        Ok(match self.init_star {
            InitLaw::Fixed { value } => InitLaw::Fixed { value: value * k },
            InitLaw::Gamma { mean, var } => InitLaw::Gamma { mean: mean * k, var: var * k * k },
        })
    }

    /// Hawkes configuration on `[0, T t0]`.
    pub fn hawkes_config(&self, t: f64, seed: u64, method: SimMethod) -> Result<HawkesConfig> {
        let cfg = HawkesConfig::new(
            self.kernel.clone(),
            self.a_t(t)?,
            Baseline::Constant(self.baseline_level(t)),
            self.hawkes_init(t)?,
            t * self.t0,
            seed,
        )?;
        Ok(cfg.with_method(method))
    }

    /// Parameters of the limit equation in resolvent form.
    pub fn limit_params(&self) -> LimitParams {
        LimitParams {
            alpha: self.alpha,
            lambda: self.effective_lambda(),
            nu: self.nu,
            theta: volterra::constant(self.theta0),
            sigma: self.sigma_fn.clone(),
            phi: self.phi0_fn.clone(),
            init: self.init_star,
        }
    }

    /// `1/mu~^T(s/T^2)` at Hawkes time `s`.
    fn weight(&self, t: f64, s: f64) -> f64 {
        1.0 / self.mu_tilde(t, s / (t * t))
    }
}

/// Grid-sampled rescaled processes of one path.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledPath {
    pub grid: Grid,
    pub t_scale: f64,
    pub lam_star: Vec<f64>,
    pub i_lam: Vec<f64>,
    pub n_tilde: Vec<f64>,
    pub m_tilde: Vec<f64>,
    /// `(1 - a_T)/T sum w(tau_i)`, the quadratic variation `[M~]`.
    pub quad_var: Vec<f64>,
    /// Bound on the quadrature error of `i_lam` (zero when exact).
    pub i_lam_error: f64,
    /// Largest jump of `N~`.
    pub max_jump: f64,
}

/// `sum_{tau < s} w(tau)` and `int_0^s w Lambda` at sorted times, with the
/// integral exact for constant `w` and cellwise midpoint-weighted otherwise.
struct Accumulated {
    jumps: Vec<f64>,
    jumps_sqrt: Vec<f64>,
    integral: Vec<f64>,
    integral_sqrt: Vec<f64>,
    compensator: Vec<f64>,
}

fn accumulate(sched: &ScalingSchedule, cfg: &HawkesConfig, path: &HawkesPath, t_scale: f64, times: &[f64]) -> Result<Accumulated> {
    let n = times.len();
    let mut jumps = vec![0.0; n];
    let mut jumps_sqrt = vec![0.0; n];
    let mut k = 0;
    let (mut sj, mut sq) = (0.0, 0.0);
    for (i, &s) in times.iter().enumerate() {
        while k < path.events.len() && path.events[k] <= s {
            let w = sched.weight(t_scale, path.events[k]);
            sj += w;
            sq += w.sqrt();
            k += 1;
        }
        jumps[i] = sj;
        jumps_sqrt[i] = sq;
    }
    let compensator = times
        .iter()
        .map(|&s| hawkes::compensator(cfg, path.init_mass, &path.events, s))
        .collect::<std::result::Result<Vec<f64>, HawkesError>>()?;
    let (integral, integral_sqrt) = if sched.sigma_is_constant() {
        let w = sched.weight(t_scale, 0.0);
        (compensator.iter().map(|c| w * c).collect(), compensator.iter().map(|c| w.sqrt() * c).collect())
    } else {
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let (mut prev_t, mut prev_c) = (0.0, 0.0);
        for i in 0..n {
            let w = sched.weight(t_scale, 0.5 * (prev_t + times[i]));
            let dc = compensator[i] - prev_c;
            let (pa, pb) = if i > 0 { (a[i - 1], b[i - 1]) } else { (0.0, 0.0) };
            a[i] = pa + w * dc;
            b[i] = pb + w.sqrt() * dc;
            prev_t = times[i];
            prev_c = compensator[i];
        }
        (a, b)
    };
    Ok(Accumulated { jumps, jumps_sqrt, integral, integral_sqrt, compensator })
}

pub fn rescale_path(path: &HawkesPath, sched: &ScalingSchedule, t_scale: f64, grid: &Grid) -> Result<RescaledPath> {
    let expected = t_scale * grid.t0();
    if (path.horizon - expected).abs() > 1e-9 * expected {
        return Err(RescaleError::HorizonMismatch { path: path.horizon, expected });
    }
    let mut cfg = sched.hawkes_config(t_scale, 0, SimMethod::Branching)?;
    cfg.horizon = path.horizon;
    let a = cfg.a_t;
    let times: Vec<f64> = grid.nodes().iter().map(|t| t * t_scale).collect();
    let acc = accumulate(sched, &cfg, path, t_scale, &times)?;
    let c = (1.0 - a) / t_scale;
    let lam_star = grid
        .nodes()
        .iter()
        .zip(&times)
        .map(|(&t, &s)| Ok(sched.omega(t_scale, t)? * hawkes::intensity_at(&cfg, path.init_mass, &path.events, s)?))
        .collect::<Result<Vec<f64>>>()?;
    let i_lam: Vec<f64> = acc.integral.iter().map(|v| c * v).collect();
    let n_tilde: Vec<f64> = acc.jumps.iter().map(|v| c * v).collect();
    let m_tilde: Vec<f64> = acc.jumps_sqrt.iter().zip(&acc.integral_sqrt).map(|(j, i)| c.sqrt() * (j - i)).collect();
    let i_lam_error = if sched.sigma_is_constant() {
        0.0
    } else {
        // |w(s) - w(mid)| <= Lip(w) h/2 per cell, in rescaled time u = s/T
        let lip = sched.nu * sched.nu * sched.delta_const * t_scale.powf(1.0 - sched.alpha.value())
            / sched.effective_lambda()
            * sched.sigma_sq_lip;
        c * lip * 0.5 * grid.dt() * acc.compensator.last().copied().unwrap_or(0.0)
    };
    Ok(RescaledPath {
        grid: *grid,
        t_scale,
        lam_star,
        i_lam,
        quad_var: n_tilde.clone(),
        n_tilde,
        m_tilde,
        i_lam_error,
        max_jump: c / sched.mu_tilde_min(t_scale),
    })
}

/// Laplace-domain convergence of the scaled second-kind resolvent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventLimitRow {
    pub t_scale: f64,
    pub z: f64,
    /// `(1-a_T) L_Psi(z/T)`, the transform of `T(1-a_T) Psi(T .)`.
    pub value: f64,
    pub limit: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventLimitReport {
    pub rows: Vec<ResolventLimitRow>,
    /// Per `z`, errors strictly decrease along the `T` list.
    pub decreasing: bool,
}

/// `1 - L_phi(s) = s L_Phi(s)` from the tail, which avoids cancellation
/// at small `s`.
fn one_minus_laplace(kernel: &Kernel, s: f64) -> Result<f64> {
    let failure = std::cell::RefCell::new(None);
    let r = kernels::laplace_transform(
        |t| match kernel.tail(t) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        s,
        1e-12 / s,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    Ok(s * r.value)
}

pub fn verify_resolvent_limit(sched: &ScalingSchedule, z_list: &[f64]) -> Result<ResolventLimitReport> {
    let lam = sched.effective_lambda();
    let a = sched.alpha.value();
    let mut rows = Vec::new();
    for &t in &sched.t_list {
        let at = sched.a_t(t)?;
        for &z in z_list {
            let q = one_minus_laplace(&sched.kernel, z / t)?;
            let lphi = 1.0 - q;
            // (1-a) a L / (1 - a L) with 1 - a L = (1 - a) + a q
            let value = (1.0 - at) * at * lphi / ((1.0 - at) + at * q);
            let limit = lam / (z.powf(a) + lam);
            rows.push(ResolventLimitRow { t_scale: t, z, value, limit, error: (value - limit).abs() });
        }
    }
    let nz = z_list.len();
    let decreasing = (0..nz).all(|j| {
        let errs: Vec<f64> = rows.iter().skip(j).step_by(nz.max(1)).map(|r| r.error).collect();
        errs.windows(2).all(|w| w[1] < w[0])
    });
    Ok(ResolventLimitReport { rows, decreasing })
}

/// Real-time step of the resolvent tables.
pub const RESOLVENT_STEP: f64 = 1.0 / 128.0;

/// Time-domain checks at one scale `T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailIdentityRow {
    pub t_scale: f64,
    pub a_t: f64,
    /// `max |Phi^T + Psi*Phi^T - a_T + (1-a_T) int_0^t Psi|` over the nodes.
    pub identity_residual: f64,
    /// `sup_t |(1-a_T) int_0^{tT} Psi - (1 - R_{a,lambda}(t))|`.
    pub resolvent_sup: f64,
    /// `sup_t |(Phi^T + Psi*Phi^T)(tT) - R_{a,lambda}(t)|`.
    pub tail_sup: f64,
    pub non_asymptotic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailIdentityReport {
    pub rows: Vec<TailIdentityRow>,
    pub resolvent_decreasing: bool,
    pub tail_decreasing: bool,
    pub max_identity_residual: f64,
}

/// Rescaled nodes at which the sup-distances are taken.
const SUP_NODES: usize = 256;

pub fn verify_tail_identity_at(sched: &ScalingSchedule, t_scale: f64, step: f64) -> Result<TailIdentityRow> {
    let at = sched.a_t(t_scale)?;
    let horizon = t_scale * sched.t0;
    let grid = Grid::with_step(horizon, step)?;
    let n = grid.n();
    let phi_t = sched.kernel.scaled(at);
    let psi = kernels::resolvent_second_kind(&phi_t, &grid)?;
    let tail = (0..=n).map(|i| Ok(at * sched.kernel.tail(grid.node(i))?)).collect::<Result<Vec<f64>>>()?;
    let tail = GridFn { grid, values: tail };
    let conv = kernels::convolve(&psi, &tail)?;
    let ipsi = psi.cumulative_integral();
    let lhs: Vec<f64> = tail.values.iter().zip(&conv.values).map(|(a, b)| a + b).collect();
    let identity_residual = (0..=n)
        .map(|i| (lhs[i] - (at - (1.0 - at) * ipsi.values[i])).abs())
        .fold(0.0, f64::max);
    let lam = sched.effective_lambda();
    let stride = (n / SUP_NODES).max(1);
    let (mut rsup, mut tsup): (f64, f64) = (0.0, 0.0);
    for i in (0..=n).step_by(stride) {
        let t = grid.node(i) / t_scale;
        let r = specfn::ml_resolvent(sched.alpha, lam, t)?;
        rsup = rsup.max(((1.0 - at) * ipsi.values[i] - (1.0 - r)).abs());
        tsup = tsup.max((lhs[i] - r).abs());
    }
    Ok(TailIdentityRow {
        t_scale,
        a_t: at,
        identity_residual,
        resolvent_sup: rsup,
        tail_sup: tsup,
        non_asymptotic: sched.non_asymptotic(t_scale)?,
    })
}

/// Tail identity, integrated-resolvent and tail sup-distances along the
/// `T` list, on tables with real-time step `step`.
pub fn verify_tail_identity(sched: &ScalingSchedule, step: f64) -> Result<TailIdentityReport> {
    let rows = sched
        .t_list
        .iter()
        .map(|&t| verify_tail_identity_at(sched, t, step))
        .collect::<Result<Vec<TailIdentityRow>>>()?;
    let dec = |f: fn(&TailIdentityRow) -> f64| rows.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    Ok(TailIdentityReport {
        resolvent_decreasing: dec(|r| r.resolvent_sup),
        tail_decreasing: dec(|r| r.tail_sup),
        max_identity_residual: rows.iter().map(|r| r.identity_residual).fold(0.0, f64::max),
        rows,
    })
}

/// Rescaled probe times.
pub const PROBE_FRACTIONS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceOptions {
    pub n_paths: usize,
    pub seed: u64,
    pub method: SimMethod,
    /// Paths used for the `sup |I~ - N~|` quantiles.
    pub sup_paths: usize,
    /// Nodes of the grid on which that supremum is taken.
    pub sup_nodes: usize,
    /// Steps of the limit grid on `[0, t0]`.
    pub limit_steps: usize,
    /// Paths of the limit simulation used for the variance.
    pub limit_paths: usize,
    /// Z-score used for the mean comparison.
    pub z: f64,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self {
            n_paths: 2000,
            seed: 1,
            method: SimMethod::Branching,
            sup_paths: 200,
            sup_nodes: 64,
            limit_steps: 512,
            limit_paths: 2000,
            z: 3.0,
        }
    }
}

pub const MIN_CONVERGENCE_PATHS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub t_scale: f64,
    pub t: f64,
    pub stat_name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub limit_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleSummary {
    pub t_scale: f64,
    pub a_t: f64,
    pub non_asymptotic: bool,
    pub mean_events: f64,
    /// `max_t |E[I~_t] - limit|`.
    pub mean_deviation: f64,
    /// Every probe mean within `z` standard errors of the limit.
    pub mean_within: bool,
    pub var_deviation: f64,
    /// 95% quantile of `sup_t |I~_t - N~_t|`.
    pub sup_gap_q95: f64,
    pub sup_gap_q95_sqrt_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<MomentRow>,
    pub scales: Vec<ScaleSummary>,
    /// Mean deviations weakly decreasing along `T` (one violation allowed).
    pub deviation_decreasing: bool,
    pub sup_gap_decreasing: bool,
}

impl ConvergenceReport {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "T,t,stat_name,estimate,std_error,limit_value")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{},{}", r.t_scale, r.t, r.stat_name, r.estimate, r.std_error, r.limit_value)?;
        }
        Ok(())
    }

    /// Summary at the largest scale.
    pub fn largest(&self) -> Option<&ScaleSummary> {
        self.scales.last()
    }
}

/// Limit moments of `int_0^t L` at the probe times: the mean from the
/// discrete mean curve, the variance by Monte Carlo of form A.
fn limit_moments(sched: &ScalingSchedule, opts: &ConvergenceOptions, probes: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = sched.limit_params();
    let grid = Grid::new(sched.t0, opts.limit_steps)?;
    let mean = volterra::limit_mean(&p, &grid)?.cumulative_integral();
    let idx: Vec<usize> = probes.iter().map(|&t| grid.nearest(t)).collect();
    let paths = volterra::simulate_many(&p, &grid, opts.seed ^ 0x5eed, opts.limit_paths, Scheme::FormA)?;
    let ints: Vec<GridFn> = paths
        .iter()
        .map(|path| GridFn { grid, values: path.positive() }.cumulative_integral())
        .collect();
    let var = idx
        .iter()
        .map(|&k| stats::summarize(&ints.iter().map(|g| g.values[k]).collect::<Vec<f64>>()).var)
        .collect();
    let means = probes.iter().map(|&t| mean.interpolate(t)).collect();
    Ok((means, var))
}

struct PathStats {
    i_lam: Vec<f64>,
    n_tilde: Vec<f64>,
    events: usize,
}

/// Monte Carlo moments of `I~` at the probe times for each `T`, against the
/// limit, plus quantiles of `sup |I~ - N~|` on a coarse grid.
pub fn convergence_experiment(sched: &ScalingSchedule, opts: &ConvergenceOptions) -> Result<ConvergenceReport> {
    if opts.n_paths < MIN_CONVERGENCE_PATHS {
        return Err(RescaleError::TooFewPaths { need: MIN_CONVERGENCE_PATHS, got: opts.n_paths });
    }
    if !sched.sigma_is_constant() {
        return Err(RescaleError::Schedule("limit moments are implemented for constant sigma".into()));
    }
    let probes: Vec<f64> = PROBE_FRACTIONS.iter().map(|f| f * sched.t0).collect();
    let (lim_mean, lim_var) = limit_moments(sched, opts, &probes)?;
    let sup_grid = Grid::new(sched.t0, opts.sup_nodes.max(1))?;
    let mut rows = Vec::new();
    let mut scales = Vec::new();
    for &t_scale in &sched.t_list {
        let cfg = sched.hawkes_config(t_scale, opts.seed, opts.method)?;
        let times: Vec<f64> = probes.iter().map(|t| t * t_scale).collect();
        let stats_per_path = crate::mc::try_run_paths(opts.n_paths, |i| -> Result<PathStats> {
            let path = hawkes::simulate(&cfg, i)?;
            let acc = accumulate(sched, &cfg, &path, t_scale, &times)?;
            let c = (1.0 - cfg.a_t) / t_scale;
            Ok(PathStats {
                i_lam: acc.integral.iter().map(|v| c * v).collect(),
                n_tilde: acc.jumps.iter().map(|v| c * v).collect(),
                events: path.events.len(),
            })
        })?;
        let n_sup = opts.sup_paths.min(opts.n_paths);
        let mut gaps = crate::mc::try_run_paths(n_sup, |i| -> Result<f64> {
            let path = hawkes::simulate(&cfg, i)?;
            let r = rescale_path(&path, sched, t_scale, &sup_grid)?;
            Ok(r.i_lam.iter().zip(&r.n_tilde).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        })?;
        gaps.sort_by(f64::total_cmp);
        let q95 = if gaps.is_empty() { f64::NAN } else { gaps[((0.95 * gaps.len() as f64).ceil() as usize).clamp(1, gaps.len()) - 1] };
        let mut mean_dev: f64 = 0.0;
        let mut var_dev: f64 = 0.0;
        let mut within = true;
        for (k, &t) in probes.iter().enumerate() {
            let xs: Vec<f64> = stats_per_path.iter().map(|s| s.i_lam[k]).collect();
            let ns: Vec<f64> = stats_per_path.iter().map(|s| s.n_tilde[k]).collect();
            let s: Summary = stats::summarize(&xs);
            let sn = stats::summarize(&ns);
            mean_dev = mean_dev.max((s.mean - lim_mean[k]).abs());
            var_dev = var_dev.max((s.var - lim_var[k]).abs());
            within &= stats::within_se(s.mean, lim_mean[k], s.mean_se, opts.z);
            rows.push(MomentRow { t_scale, t, stat_name: "mean_I".into(), estimate: s.mean, std_error: s.mean_se, limit_value: lim_mean[k] });
            rows.push(MomentRow { t_scale, t, stat_name: "var_I".into(), estimate: s.var, std_error: s.var_se, limit_value: lim_var[k] });
            rows.push(MomentRow { t_scale, t, stat_name: "mean_N".into(), estimate: sn.mean, std_error: sn.mean_se, limit_value: lim_mean[k] });
        }
        let mean_events = stats_per_path.iter().map(|s| s.events as f64).sum::<f64>() / opts.n_paths as f64;
        scales.push(ScaleSummary {
            t_scale,
            a_t: cfg.a_t,
            non_asymptotic: sched.non_asymptotic(t_scale)?,
            mean_events,
            mean_deviation: mean_dev,
            mean_within: within,
            var_deviation: var_dev,
            sup_gap_q95: q95,
            sup_gap_q95_sqrt_t: q95 * t_scale.sqrt(),
        });
    }
    let devs: Vec<f64> = scales.iter().map(|s| s.mean_deviation).collect();
    let gaps: Vec<f64> = scales.iter().map(|s| s.sup_gap_q95).collect();
    Ok(ConvergenceReport {
        rows,
        deviation_decreasing: stats::weakly_decreasing(&devs, 1),
        sup_gap_decreasing: stats::weakly_decreasing(&gaps, 1),
        scales,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn power() -> Kernel {
        Kernel::power_law(0.6, 1.0, 1.0).unwrap()
    }

    fn sched(t_list: &[f64]) -> ScalingSchedule {
        make_schedule(0.6, 1.0, 1.0, 1.0, volterra::constant(1.0), t_list, &power()).unwrap()
    }

    #[test]
    fn reference_schedule_values() {
        let s = sched(&[100.0]).with_kind(ScheduleKind::Reference).unwrap();
        let a = s.a_t(100.0).unwrap();
        assert!((a - (1.0 - 100f64.powf(-0.6))).abs() < 1e-15);
        assert!((100f64.powf(0.6) * (1.0 - a) - 1.0).abs() < 1e-12);
        assert!(matches!(s.a_t(0.5), Err(RescaleError::ScaleTooSmall { .. })));
    }

    #[test]
    fn matched_schedule_gap() {
        let s = sched(&[50.0, 200.0]);
        assert!((s.delta_const - libm::tgamma(0.4)).abs() < 1e-12);
        let a = s.a_t(200.0).unwrap();
        assert!((200f64.powf(0.6) * (1.0 - a) - s.delta_const).abs() < 1e-12);
        assert!(s.a_t(2.0).is_err());
    }

    #[test]
    fn mu_tilde_constant_for_unit_sigma() {
        let s = sched(&[100.0]);
        let v0 = s.mu_tilde(100.0, 0.0);
        assert!((0..10).all(|i| s.mu_tilde(100.0, i as f64 * 0.001) == v0));
        assert!((100f64.powf(0.4) * v0 - 1.0 / s.delta_const).abs() < 1e-12);
    }

    #[test]
    fn mittag_leffler_tail_constant() {
        let a = FracOrder::new(0.7).unwrap();
        let k = Kernel::mittag_leffler(a, 2.0).unwrap();
        let s = make_schedule(0.7, 1.0, 1.0, 1.0, volterra::constant(1.0), &[10.0], &k).unwrap();
        assert!((s.c_tail - 0.7 / (2.0 * libm::tgamma(0.3))).abs() < 1e-12);
        assert!((s.delta_const - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_alpha_and_zero_sigma() {
        assert!(make_schedule(0.7, 1.0, 1.0, 1.0, volterra::constant(1.0), &[10.0], &power()).is_err());
        assert!(make_schedule(0.6, 1.0, 1.0, 1.0, volterra::constant(0.0), &[10.0], &power()).is_err());
    }

    #[test]
    fn zero_event_path_is_deterministic() {
        let s = sched(&[20.0]).with_init(InitLaw::Fixed { value: 0.5 }, InitCoupling::Consistent).unwrap();
        let t = 20.0;
        let grid = Grid::new(1.0, 8).unwrap();
        let path = HawkesPath { events: vec![], init_mass: s.hawkes_init(t).unwrap().mean(), horizon: t, path_index: 0 };
        let r = rescale_path(&path, &s, t, &grid).unwrap();
        let a = s.a_t(t).unwrap();
        let omega = (1.0 - a) / s.mu_tilde(t, 0.0);
        for i in 0..grid.len() {
            let u = grid.node(i) * t;
            let want = omega * (path.init_mass * a * s.kernel.tail(u).unwrap() + s.baseline_level(t));
            assert!((r.lam_star[i] - want).abs() < 1e-12 * want);
            assert_eq!(r.n_tilde[i], 0.0);
        }
        assert!(r.i_lam.windows(2).all(|w| w[1] >= w[0]) && r.i_lam[0] == 0.0);
    }

    #[test]
    fn counts_and_martingale_from_events() {
        let s = sched(&[30.0]);
        let t = 30.0;
        let cfg = s.hawkes_config(t, 4, SimMethod::Branching).unwrap();
        let path = hawkes::simulate(&cfg, 0).unwrap();
        let grid = Grid::new(1.0, 16).unwrap();
        let r = rescale_path(&path, &s, t, &grid).unwrap();
        let a = cfg.a_t;
        let w = 1.0 / s.mu_tilde(t, 0.0);
        let want = (1.0 - a) / t * path.events.len() as f64 * w;
        assert!((r.n_tilde[grid.n()] - want).abs() < 1e-12 * want.max(1.0));
        // constant weight: M~ = (N~ - I~) / sqrt((1-a) w / T)
        let k = ((1.0 - a) * w / t).sqrt();
        for i in 0..grid.len() {
            assert!((r.m_tilde[i] - (r.n_tilde[i] - r.i_lam[i]) / k).abs() < 1e-9);
        }
        assert!((r.max_jump - (1.0 - a) * w / t).abs() < 1e-15);
        assert_eq!(r.quad_var, r.n_tilde);
    }

    #[test]
    fn horizon_mismatch_detected() {
        let s = sched(&[30.0]);
        let path = HawkesPath { events: vec![], init_mass: 0.0, horizon: 10.0, path_index: 0 };
        let err = rescale_path(&path, &s, 30.0, &Grid::new(1.0, 4).unwrap());
        assert!(matches!(err, Err(RescaleError::HorizonMismatch { .. })));
    }

    #[test]
    fn varying_sigma_reports_quadrature_bound() {
        let sig: Func = Arc::new(|t| 1.0 + 0.5 * t);
        let s = make_schedule(0.6, 1.0, 1.0, 1.0, sig, &[30.0], &power()).unwrap();
        assert!(!s.sigma_is_constant());
        let cfg = s.hawkes_config(30.0, 2, SimMethod::Branching).unwrap();
        let path = hawkes::simulate(&cfg, 1).unwrap();
        let r = rescale_path(&path, &s, 30.0, &Grid::new(1.0, 64).unwrap()).unwrap();
        assert!(r.i_lam_error > 0.0);
        assert!(r.i_lam.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn laplace_limit_improves_with_scale() {
        let s = sched(&[50.0, 200.0, 800.0]);
        let r = verify_resolvent_limit(&s, &[0.5, 1.0, 2.0, 4.0]).unwrap();
        assert!(r.decreasing, "{:?}", r.rows);
        assert!(r.rows.iter().all(|row| row.error < 0.2));
    }

    #[test]
    fn tail_identity_small_scale() {
        let s = sched(&[20.0, 40.0]);
        let r = verify_tail_identity(&s, 1.0 / 64.0).unwrap();
        assert!(r.max_identity_residual < 5e-5, "{}", r.max_identity_residual);
        assert!(r.rows[0].non_asymptotic);
    }
}
