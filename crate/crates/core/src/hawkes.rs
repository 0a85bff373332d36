//! Linear Hawkes processes with a unit-mass kernel scaled by the branching
//! factor `a_T`, a time-varying baseline and an initial-state term
//! `init * Phi^T(t)` standing in for the events before time zero.
//!
//! Two exact samplers are provided. Thinning follows the intensity forward
//! and needs a kernel bounded at the origin; the cluster (branching)
//! construction draws immigrants from the baseline and the initial-state
//! term and lets every event spawn `Poisson(a_T)` children at kernel-
//! distributed delays, which also covers singular kernels and long horizons.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp, Gamma, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Grid, GridFn};
use crate::kernels::{self, Kernel, KernelError, ProductRule};
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HawkesError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("invalid Hawkes configuration: {0}")]
    Config(String),
    #[error("event cap {cap} reached at t = {t}; the process is too close to instability for this horizon")]
    EventCap { cap: usize, t: f64 },
    #[error("baseline modulation is not positive at node {node} (t = {t}, value {value})")]
    Positivity { node: usize, t: f64, value: f64 },
}

pub type Result<T> = std::result::Result<T, HawkesError>;

/// Law of the initial-state mass `init` multiplying `Phi^T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum InitLaw {
    Fixed { value: f64 },
    Gamma { mean: f64, var: f64 },
}

impl InitLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            InitLaw::Fixed { value } => value,
            InitLaw::Gamma { mean, .. } => mean,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            InitLaw::Fixed { value } => value,
            InitLaw::Gamma { mean, var } => {
                if mean <= 0.0 {
                    return 0.0;
                }
                if var <= 0.0 {
                    return mean;
                }
                Gamma::new(mean * mean / var, var / mean).map(|g| g.sample(rng)).unwrap_or(mean)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            InitLaw::Fixed { value } => value >= 0.0 && value.is_finite(),
            InitLaw::Gamma { mean, var } => mean >= 0.0 && var >= 0.0 && mean.is_finite() && var.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(HawkesError::Config(format!("initial law {self:?} must be nonnegative and finite")))
        }
    }
}

/// `mu^T zeta^T(t)` with `zeta^T` tabulated on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaBaseline {
    pub mu_t: f64,
    pub zeta: GridFn,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Baseline {
    Constant(f64),
    /// `mu0 (1 - int_0^t phi^T)`, which keeps `E[Lambda]` at `mu0`.
    StationaryMean(f64),
    ThetaModulated(ThetaBaseline),
}

/// Tabulate `zeta^T(t) = 1 - int_0^t phi^T(t-u) (1 - theta(u/T)/theta0) du`.
pub fn build_theta_baseline<F: Fn(f64) -> f64>(
    theta: F,
    theta0: f64,
    mu_t: f64,
    kernel_t: &Kernel,
    t_scale: f64,
    grid: &Grid,
) -> Result<ThetaBaseline> {
    if !(theta0 > 0.0 && mu_t > 0.0 && t_scale > 0.0) {
        return Err(HawkesError::Config(format!(
            "theta0 = {theta0}, mu_T = {mu_t} and T = {t_scale} must be positive"
        )));
    }
    let g = GridFn::from_fn(*grid, |u| 1.0 - theta(u / t_scale) / theta0);
    let c = kernels::convolve_kernel(kernel_t, &g)?;
    let zeta: Vec<f64> = c.values.iter().map(|c| 1.0 - c).collect();
    if let Some((node, &value)) = zeta.iter().enumerate().find(|(_, z)| !(**z > 0.0)) {
        return Err(HawkesError::Positivity { node, t: grid.node(node), value });
    }
    Ok(ThetaBaseline { mu_t, zeta: GridFn { grid: *grid, values: zeta } })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMethod {
    Thinning,
    Branching,
}

pub const DEFAULT_EVENT_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct HawkesConfig {
    /// Unit-mass kernel shape `phi`; the process uses `a_t * phi`.
    pub kernel: Kernel,
    pub a_t: f64,
    pub baseline: Baseline,
    pub init: InitLaw,
    pub horizon: f64,
    pub seed: u64,
    pub event_cap: usize,
    pub method: SimMethod,
}

impl HawkesConfig {
    pub fn new(kernel: Kernel, a_t: f64, baseline: Baseline, init: InitLaw, horizon: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            kernel,
            a_t,
            baseline,
            init,
            horizon,
            seed,
            event_cap: DEFAULT_EVENT_CAP,
            method: SimMethod::Thinning,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_method(mut self, method: SimMethod) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a_t >= 0.0 && self.a_t < 1.0) {
            return Err(HawkesError::Config(format!("branching factor a_T = {} outside [0, 1)", self.a_t)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(HawkesError::Config(format!("horizon {} must be positive", self.horizon)));
        }
        match self.kernel.l1_mass() {
            Some(m) if (m - 1.0).abs() < 1e-9 => {}
            other => {
                return Err(HawkesError::Config(format!("kernel must have unit mass, got {other:?}")));
            }
        }
        match &self.baseline {
            Baseline::Constant(mu) | Baseline::StationaryMean(mu) if !(*mu >= 0.0 && mu.is_finite()) => {
                return Err(HawkesError::Config(format!("baseline level {mu} must be nonnegative")));
            }
            Baseline::ThetaModulated(b) if b.zeta.grid.t0() < self.horizon * (1.0 - 1e-12) => {
                return Err(HawkesError::Config(format!(
                    "baseline table ends at {} before the horizon {}",
                    b.zeta.grid.t0(),
                    self.horizon
                )));
            }
            _ => {}
        }
        self.init.validate()
    }

    /// `phi^T = a_T phi`.
    pub fn effective_kernel(&self) -> Kernel {
        self.kernel.scaled(self.a_t)
    }

    pub fn baseline_at(&self, t: f64) -> Result<f64> {
        Ok(match &self.baseline {
            Baseline::Constant(mu) => *mu,
            Baseline::StationaryMean(mu0) => (mu0 * (1.0 - self.a_t * self.kernel.integral(t)?)).max(0.0),
            Baseline::ThetaModulated(b) => b.mu_t * b.zeta.interpolate(t),
        })
    }

    /// Supremum of the baseline over `[a, b]`.
    pub fn baseline_sup(&self, a: f64, b: f64) -> Result<f64> {
        Ok(match &self.baseline {
            Baseline::Constant(mu) => *mu,
            Baseline::StationaryMean(_) => self.baseline_at(a)?,
            Baseline::ThetaModulated(th) => {
                let z = &th.zeta;
                let g = z.grid;
                let mut m = z.interpolate(a).max(z.interpolate(b));
                let lo = ((a / g.dt()).ceil().max(0.0) as usize).min(g.n());
                let hi = ((b / g.dt()).floor().max(0.0) as usize).min(g.n());
                for v in &z.values[lo..=hi.max(lo)] {
                    m = m.max(*v);
                }
                th.mu_t * m
            }
        })
    }

    /// `int_0^t mu`.
    pub fn baseline_integral(&self, t: f64) -> Result<f64> {
        Ok(match &self.baseline {
            Baseline::Constant(mu) => mu * t,
            Baseline::StationaryMean(mu0) => mu0 * (t - self.a_t * (t - self.kernel.tail_integral(t)?)),
            Baseline::ThetaModulated(b) => b.mu_t * piecewise_linear_integral(&b.zeta, t),
        })
    }

    /// `init * Phi^T(t)`.
    pub fn init_term(&self, init_mass: f64, t: f64) -> Result<f64> {
        if init_mass == 0.0 || self.a_t == 0.0 {
            return Ok(0.0);
        }
        Ok(init_mass * self.a_t * self.kernel.tail(t)?)
    }

    pub fn init_term_integral(&self, init_mass: f64, t: f64) -> Result<f64> {
        if init_mass == 0.0 || self.a_t == 0.0 {
            return Ok(0.0);
        }
        Ok(init_mass * self.a_t * self.kernel.tail_integral(t)?)
    }
}

fn piecewise_linear_integral(f: &GridFn, t: f64) -> f64 {
    let g = f.grid;
    let t = t.clamp(0.0, g.t0());
    let h = g.dt();
    let k = ((t / h).floor() as usize).min(g.n());
    let mut s = 0.0;
    for i in 0..k {
        s += 0.5 * h * (f.values[i] + f.values[i + 1]);
    }
    let rest = t - g.node(k);
    if rest > 0.0 && k < g.n() {
        s += 0.5 * rest * (f.values[k] + f.interpolate(t));
    }
    s
}

/// One realized trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct HawkesPath {
    pub events: Vec<f64>,
    pub init_mass: f64,
    pub horizon: f64,
    /// Index of the random stream that produced the path.
    pub path_index: u64,
}

/// `init Phi^T(t) + mu(t) + sum_{tau_i < t} phi^T(t - tau_i)`.
pub fn intensity_at(cfg: &HawkesConfig, init_mass: f64, events: &[f64], t: f64) -> Result<f64> {
    let phi = cfg.effective_kernel();
    let mut exc = 0.0;
    for &tau in events.iter().take_while(|&&tau| tau < t) {
        exc += phi.eval(t - tau)?;
    }
    Ok(cfg.init_term(init_mass, t)? + cfg.baseline_at(t)? + exc)
}

/// `int_0^t Lambda`, exact given the event list.
pub fn compensator(cfg: &HawkesConfig, init_mass: f64, events: &[f64], t: f64) -> Result<f64> {
    let mut exc = 0.0;
    for &tau in events.iter().take_while(|&&tau| tau < t) {
        exc += cfg.kernel.integral(t - tau)?;
    }
    Ok(cfg.init_term_integral(init_mass, t)? + cfg.baseline_integral(t)? + cfg.a_t * exc)
}

/// Compensator increments between successive events; unit exponentials
/// under the model.
pub fn time_rescaled_gaps(cfg: &HawkesConfig, path: &HawkesPath) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(path.events.len());
    let mut prev = 0.0;
    for (i, &tau) in path.events.iter().enumerate() {
        let c = compensator(cfg, path.init_mass, &path.events[..i], tau)?;
        out.push(c - prev);
        prev = c;
    }
    Ok(out)
}

/// Time-changed event times `C(tau)/L` for `C(tau) <= L`, with `L` the
/// baseline compensator at the horizon. `L` never exceeds `C(T)`, so these
/// are the points of a unit Poisson process on the fixed interval `[0, L]`
/// and are iid uniform given their number. Pooled raw gaps are not unit
/// exponentials: the horizon censors long gaps.
pub fn time_rescaled_uniforms(cfg: &HawkesConfig, path: &HawkesPath) -> Result<Vec<f64>> {
    let floor = cfg.baseline_integral(cfg.horizon)?;
    if floor <= 0.0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(path.events.len());
    for (i, &tau) in path.events.iter().enumerate() {
        let c = compensator(cfg, path.init_mass, &path.events[..i], tau)?;
        if c > floor {
            break;
        }
        out.push(c / floor);
    }
    Ok(out)
}

pub fn sample_intensity(cfg: &HawkesConfig, path: &HawkesPath, grid: &Grid) -> Result<GridFn> {
    let values = (0..grid.len())
        .map(|i| intensity_at(cfg, path.init_mass, &path.events, grid.node(i)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(GridFn { grid: *grid, values })
}

/// Simulate path `path_index` of the experiment seeded by `cfg.seed`.
pub fn simulate(cfg: &HawkesConfig, path_index: u64) -> Result<HawkesPath> {
    let mut init_rng = rng::stream(cfg.seed, "hawkes-init", path_index);
    let init_mass = cfg.init.sample(&mut init_rng);
    let mut rng = rng::stream(cfg.seed, "hawkes", path_index);
    let events = match cfg.method {
        SimMethod::Thinning => thinning(cfg, init_mass, &mut rng)?,
        SimMethod::Branching => branching(cfg, init_mass, &mut rng)?,
    };
    Ok(HawkesPath { events, init_mass, horizon: cfg.horizon, path_index })
}

fn thinning(cfg: &HawkesConfig, init_mass: f64, rng: &mut ChaCha20Rng) -> Result<Vec<f64>> {
    let phi = cfg.effective_kernel();
    if phi.is_singular() {
        return Err(HawkesError::Config("thinning needs a kernel bounded at 0; use branching".into()));
    }
    let mut events: Vec<f64> = Vec::new();
    let mut t = 0.0;
    // excitation is recomputed from scratch: O(#events) per candidate
    let excitation = |events: &[f64], t: f64| -> Result<f64> {
        let mut s = 0.0;
        for &tau in events {
            s += phi.eval(t - tau)?;
        }
        Ok(s)
    };
    while t < cfg.horizon {
        let current = excitation(&events, t)? + cfg.init_term(init_mass, t)? + cfg.baseline_at(t)?;
        let window = 1.0 / current.max(1e-12);
        let end = (t + window).min(cfg.horizon);
        // kernel and tail are nonincreasing, so only the baseline needs a sup
        let bound = excitation(&events, t)? + cfg.init_term(init_mass, t)? + cfg.baseline_sup(t, end)?;
        if bound <= 0.0 {
            t = end;
            continue;
        }
        let w = Exp::new(bound).expect("positive rate").sample(rng);
        if t + w > end {
            t = end;
            continue;
        }
        t += w;
        let lam = excitation(&events, t)? + cfg.init_term(init_mass, t)? + cfg.baseline_at(t)?;
        if rng.random::<f64>() * bound <= lam {
            events.push(t);
            if events.len() >= cfg.event_cap {
                return Err(HawkesError::EventCap { cap: cfg.event_cap, t });
            }
        }
    }
    Ok(events)
}

/// Inverse of `s -> int_0^s Phi` on `[0, horizon]` by bisection.
fn invert_tail_integral(k: &Kernel, target: f64, horizon: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, horizon);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if k.tail_integral(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * horizon {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|p| p.sample(rng) as u64).unwrap_or(0)
}

fn branching(cfg: &HawkesConfig, init_mass: f64, rng: &mut ChaCha20Rng) -> Result<Vec<f64>> {
    let h = cfg.horizon;
    let mut events: Vec<f64> = Vec::new();
    let push = |events: &mut Vec<f64>, t: f64| -> Result<()> {
        events.push(t);
        if events.len() >= cfg.event_cap {
            return Err(HawkesError::EventCap { cap: cfg.event_cap, t });
        }
        Ok(())
    };
    // immigrants from the baseline, by thinning against a global bound
    let mu_max = cfg.baseline_sup(0.0, h)?;
    if mu_max > 0.0 {
        let exp = Exp::new(mu_max).expect("positive rate");
        let mut t = 0.0;
        loop {
            t += exp.sample(rng);
            if t > h {
                break;
            }
            if rng.random::<f64>() * mu_max <= cfg.baseline_at(t)? {
                push(&mut events, t)?;
            }
        }
    }
    // immigrants from the initial-state term init a_T Phi(t)
    let mass = cfg.init_term_integral(init_mass, h)?;
    if mass > 0.0 {
        let total = cfg.kernel.tail_integral(h)?;
        for _ in 0..poisson(mass, rng) {
            let u: f64 = rng.random();
            push(&mut events, invert_tail_integral(&cfg.kernel, u * total, h)?)?;
        }
    }
    // offspring, generation by generation
    let mut head = 0;
    while head < events.len() {
        let parent = events[head];
        head += 1;
        for _ in 0..poisson(cfg.a_t, rng) {
            let t = parent + cfg.kernel.sample_offset(rng)?;
            if t <= h {
                push(&mut events, t)?;
            }
        }
    }
    events.sort_by(f64::total_cmp);
    Ok(events)
}

/// `E[Lambda_t] = s + (Psi * s)`, `s = E[init] Phi^T + mu`, computed as the
/// solution of `m = s + phi^T * m`.
pub fn expected_intensity(cfg: &HawkesConfig, grid: &Grid) -> Result<GridFn> {
    let init = cfg.init.mean();
    let s = (0..grid.len())
        .map(|i| {
            let t = grid.node(i);
            Ok(cfg.init_term(init, t)? + cfg.baseline_at(t)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let rule = ProductRule::for_kernel(&cfg.effective_kernel(), grid)?;
    Ok(GridFn { grid: *grid, values: rule.solve(-1.0, &s)? })
}

/// `E[N_t]`, the solution of `N = S + phi^T * N` with `S = int_0^t s`.
pub fn expected_counts(cfg: &HawkesConfig, grid: &Grid) -> Result<GridFn> {
    let init = cfg.init.mean();
    let s = (0..grid.len())
        .map(|i| {
            let t = grid.node(i);
            Ok(cfg.init_term_integral(init, t)? + cfg.baseline_integral(t)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let rule = ProductRule::for_kernel(&cfg.effective_kernel(), grid)?;
    Ok(GridFn { grid: *grid, values: rule.solve(-1.0, &s)? })
}

/// `Var[Lambda_t] = (Psi^2 * E[Lambda])(t)` for a deterministic initial term.
pub fn intensity_variance(cfg: &HawkesConfig, grid: &Grid) -> Result<GridFn> {
    let m = expected_intensity(cfg, grid)?;
    let psi = kernels::resolvent_second_kind(&cfg.effective_kernel(), grid)?;
    let psi2 = GridFn { grid: *grid, values: psi.values.iter().map(|p| p * p).collect() };
    Ok(kernels::convolve(&psi2, &m)?)
}

/// `E[N_t]` for the exponential kernel `r e^{-r t}` with constant baseline
/// and no initial term.
pub fn exp_kernel_expected_count(mu: f64, a: f64, rate: f64, t: f64) -> f64 {
    let k = rate * (1.0 - a);
    mu * t / (1.0 - a) - mu * a / (rate * (1.0 - a).powi(2)) * -(-k * t).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    fn exp_cfg(a: f64, mu: f64, horizon: f64) -> HawkesConfig {
        HawkesConfig::new(
            Kernel::exponential(1.0).unwrap(),
            a,
            Baseline::Constant(mu),
            InitLaw::Fixed { value: 0.0 },
            horizon,
            11,
        )
        .unwrap()
    }

    #[test]
    fn intensity_without_events() {
        let cfg = HawkesConfig::new(
            Kernel::power_law(0.6, 1.0, 1.0).unwrap(),
            0.4,
            Baseline::Constant(2.0),
            InitLaw::Fixed { value: 3.0 },
            10.0,
            0,
        )
        .unwrap();
        assert!((intensity_at(&cfg, 3.0, &[], 0.0).unwrap() - (3.0 * 0.4 + 2.0)).abs() < 1e-15);
        assert_eq!(intensity_at(&cfg, 0.0, &[], 5.0).unwrap(), 2.0);
    }

    #[test]
    fn rejects_bad_configs() {
        let k = Kernel::exponential(1.0).unwrap();
        let none = InitLaw::Fixed { value: 0.0 };
        assert!(HawkesConfig::new(k.clone(), 1.0, Baseline::Constant(1.0), none, 1.0, 0).is_err());
        assert!(HawkesConfig::new(k.clone(), 0.5, Baseline::Constant(-1.0), none, 1.0, 0).is_err());
        assert!(HawkesConfig::new(k.scaled(2.0), 0.5, Baseline::Constant(1.0), none, 1.0, 0).is_err());
    }

    #[test]
    fn expected_counts_match_exponential_oracle() {
        let cfg = exp_cfg(0.5, 1.0, 10.0);
        let grid = Grid::new(10.0, 2000).unwrap();
        let n = expected_counts(&cfg, &grid).unwrap();
        for i in [200, 1000, 2000] {
            let want = exp_kernel_expected_count(1.0, 0.5, 1.0, grid.node(i));
            assert!((n.values[i] - want).abs() < 1e-6, "{} vs {want}", n.values[i]);
        }
    }

    #[test]
    fn stationary_init_gives_flat_mean() {
        let mut cfg = exp_cfg(0.5, 1.0, 10.0);
        cfg.init = InitLaw::Fixed { value: 2.0 };
        let m = expected_intensity(&cfg, &Grid::new(10.0, 1000).unwrap()).unwrap();
        assert!(m.values.iter().all(|v| (v - 2.0).abs() < 1e-6));
    }

    #[test]
    fn samplers_agree_in_mean() {
        let cfg = exp_cfg(0.5, 1.0, 10.0);
        let want = exp_kernel_expected_count(1.0, 0.5, 1.0, 10.0);
        for method in [SimMethod::Thinning, SimMethod::Branching] {
            let c = cfg.clone().with_method(method);
            let counts: Vec<f64> = (0..2000).map(|i| simulate(&c, i).unwrap().events.len() as f64).collect();
            let s = stats::summarize(&counts);
            assert!((s.mean - want).abs() < 4.0 * s.mean_se, "{method:?}: {} vs {want}", s.mean);
        }
    }

    #[test]
    fn simulation_is_reproducible() {
        let cfg = exp_cfg(0.5, 1.0, 5.0);
        assert_eq!(simulate(&cfg, 3).unwrap(), simulate(&cfg, 3).unwrap());
        assert_ne!(simulate(&cfg, 3).unwrap().events, simulate(&cfg, 4).unwrap().events);
    }

    #[test]
    fn event_cap_is_enforced() {
        let mut cfg = exp_cfg(0.9, 50.0, 100.0);
        cfg.event_cap = 100;
        assert!(matches!(simulate(&cfg, 0), Err(HawkesError::EventCap { .. })));
    }

    #[test]
    fn constant_theta_gives_constant_baseline() {
        let k = Kernel::power_law(0.6, 1.0, 1.0).unwrap().scaled(0.9);
        let g = Grid::new(5.0, 100).unwrap();
        let b = build_theta_baseline(|_| 2.0, 2.0, 1.5, &k, 10.0, &g).unwrap();
        assert!(b.zeta.values.iter().all(|z| (z - 1.0).abs() < 1e-15));
    }

    #[test]
    fn theta_baseline_positivity_is_checked() {
        let k = Kernel::exponential(5.0).unwrap().scaled(0.9);
        let g = Grid::new(5.0, 100).unwrap();
        let r = build_theta_baseline(|_| -50.0, 1.0, 1.0, &k, 1.0, &g);
        assert!(matches!(r, Err(HawkesError::Positivity { .. })));
    }

    #[test]
    fn compensator_integrates_intensity() {
        let cfg = HawkesConfig::new(
            Kernel::power_law(0.6, 1.0, 1.0).unwrap(),
            0.5,
            Baseline::StationaryMean(1.0),
            InitLaw::Fixed { value: 2.0 },
            4.0,
            0,
        )
        .unwrap();
        let ev = [0.5, 1.2, 3.0];
        let mut q = 0.0;
        let pts = [0.0, 0.5, 1.2, 3.0, 4.0];
        for w in pts.windows(2) {
            q += crate::quad::integrate(
                |t| intensity_at(&cfg, 2.0, &ev, t).unwrap(),
                w[0],
                w[1],
                1e-13,
                1e-13,
                200,
            )
            .value;
        }
        assert!((compensator(&cfg, 2.0, &ev, 4.0).unwrap() - q).abs() < 1e-10);
    }
}
