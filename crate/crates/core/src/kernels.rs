//! Excitation kernels, product-integration convolutions and Volterra
//! resolvents on uniform grids.
//!
//! Every convolution against a kernel uses the product trapezoid rule: the
//! regular factor is interpolated linearly on each cell and the kernel is
//! integrated exactly (or by an 8-point Gauss rule where it is smooth) against
//! the two hat functions. With lag-cell moments
//! `m0 = int_{(m-1)h}^{mh} k` and `m1 = int_{(m-1)h}^{mh} (u - (m-1)h) k(u) du`
//! the weight of `g_{i-m+1}` is `m0 - m1/h` and the weight of `g_{i-m}` is
//! `m1/h`.
//!
//! For the fractional kernel the rule is further corrected by three starting
//! weights on the first nodes so that it integrates `1`, `t^a` and `t`
//! exactly. This removes the `t^a` component of the local error, which is the
//! leading one for solutions of fractional equations.

use std::cell::RefCell;

use rand::Rng;
use thiserror::Error;

use crate::grid::{Grid, GridError, GridFn};
use crate::quad;
use crate::specfn::{self, rgamma, FracOrder, SpecFnError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("invalid kernel parameter: {0}")]
    Parameter(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("the fractional kernel is not integrable at infinity")]
    NonIntegrableTail,
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    SpecFn(#[from] SpecFnError),
    #[error("marching diverged at node {node} (t = {t}); retry with dt <= {suggested_dt:e}")]
    Divergence { node: usize, t: f64, suggested_dt: f64 },
    #[error("kernel mass {mass} >= 1: the Neumann series of the second-kind resolvent diverges")]
    Supercritical { mass: f64 },
    #[error("Laplace tail bound {bound:e} exceeds tolerance {tol:e} at horizon {horizon}")]
    LaplaceTail { bound: f64, tol: f64, horizon: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, KernelError>;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    /// `a b tau^a (tau + b t)^{-(1+a)}`, unit mass.
    PowerLaw { alpha: f64, tau: f64, b: f64 },
    /// `r e^{-r t}`, unit mass.
    Exponential { rate: f64 },
    /// `t^{a-1} / Gamma(a)`.
    Fractional { alpha: FracOrder },
    /// The Mittag-Leffler density `f_{a,l}`, unit mass.
    MittagLeffler { alpha: FracOrder, lambda: f64 },
    /// Piecewise-linear table, zero beyond its horizon.
    Table { table: GridFn },
}

/// `scale * base(t)` for one of the base shapes above.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub kind: KernelKind,
    pub scale: f64,
}

fn param(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(KernelError::Parameter(msg()))
    }
}

impl Kernel {
    pub fn power_law(alpha: f64, tau: f64, b: f64) -> Result<Self> {
        param(alpha > 0.0 && alpha < 1.0, || format!("power-law exponent {alpha} outside (0, 1)"))?;
        param(tau > 0.0 && tau.is_finite(), || format!("tau = {tau} must be positive"))?;
        param(b > 0.0 && b.is_finite(), || format!("b = {b} must be positive"))?;
        Ok(Self { kind: KernelKind::PowerLaw { alpha, tau, b }, scale: 1.0 })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        param(rate > 0.0 && rate.is_finite(), || format!("rate = {rate} must be positive"))?;
        Ok(Self { kind: KernelKind::Exponential { rate }, scale: 1.0 })
    }

    pub fn fractional(alpha: FracOrder) -> Self {
        Self { kind: KernelKind::Fractional { alpha }, scale: 1.0 }
    }

    pub fn mittag_leffler(alpha: FracOrder, lambda: f64) -> Result<Self> {
        param(lambda > 0.0 && lambda.is_finite(), || format!("lambda = {lambda} must be positive"))?;
        Ok(Self { kind: KernelKind::MittagLeffler { alpha, lambda }, scale: 1.0 })
    }

    pub fn table(table: GridFn) -> Result<Self> {
        param(table.values.iter().all(|v| v.is_finite() && *v >= 0.0), || {
            "table values must be finite and nonnegative".into()
        })?;
        Ok(Self { kind: KernelKind::Table { table }, scale: 1.0 })
    }

    /// The same shape with mass multiplied by `a`.
    pub fn scaled(&self, a: f64) -> Self {
        Self { kind: self.kind.clone(), scale: self.scale * a }
    }

    /// `||k||_1`, `None` for the fractional kernel.
    pub fn l1_mass(&self) -> Option<f64> {
        match &self.kind {
            KernelKind::Fractional { .. } => None,
            KernelKind::Table { table } => {
                Some(self.scale * table.cumulative_integral().values[table.grid.n()])
            }
            _ => Some(self.scale),
        }
    }

    /// Unbounded at the origin.
    pub fn is_singular(&self) -> bool {
        match &self.kind {
            KernelKind::Fractional { alpha } | KernelKind::MittagLeffler { alpha, .. } => alpha.value() < 1.0,
            _ => false,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(KernelError::Domain(format!("kernel evaluated at t = {t}")));
        }
        let v = match &self.kind {
            KernelKind::PowerLaw { alpha, tau, b } => alpha * b * tau.powf(*alpha) * (tau + b * t).powf(-1.0 - alpha),
            KernelKind::Exponential { rate } => rate * (-rate * t).exp(),
            KernelKind::Fractional { alpha } => {
                if t == 0.0 && alpha.value() < 1.0 {
                    return Err(KernelError::Domain("fractional kernel is singular at 0".into()));
                }
                specfn::FractionalKernel::new(*alpha).eval(t)
            }
            KernelKind::MittagLeffler { alpha, lambda } => specfn::ml_density(*alpha, *lambda, t)?,
            KernelKind::Table { table } => {
                if t > table.grid.t0() {
                    0.0
                } else {
                    table.interpolate(t)
                }
            }
        };
        Ok(self.scale * v)
    }

    /// `Phi(t) = int_t^inf k`.
    pub fn tail(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(KernelError::Domain(format!("tail evaluated at t = {t}")));
        }
        let v = match &self.kind {
            KernelKind::PowerLaw { alpha, tau, b } => (tau / (tau + b * t)).powf(*alpha),
            KernelKind::Exponential { rate } => (-rate * t).exp(),
            KernelKind::Fractional { .. } => return Err(KernelError::NonIntegrableTail),
            KernelKind::MittagLeffler { alpha, lambda } => specfn::ml_resolvent(*alpha, *lambda, t)?,
            KernelKind::Table { table } => {
                let total = table.cumulative_integral().values[table.grid.n()];
                return Ok(self.scale * (total - table_integral(table, 0.0, t.min(table.grid.t0()))));
            }
        };
        Ok(self.scale * v)
    }

    /// `int_0^t k`.
    pub fn integral(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let v = match &self.kind {
            KernelKind::PowerLaw { alpha, tau, b } => {
                // 1 - (tau/(tau+bt))^a without cancellation for small t
                -(-alpha * (b * t / tau).ln_1p()).exp_m1()
            }
            KernelKind::Exponential { rate } => -(-rate * t).exp_m1(),
            KernelKind::Fractional { alpha } => specfn::FractionalKernel::new(*alpha).integral(t),
            KernelKind::MittagLeffler { alpha, lambda } => 1.0 - specfn::ml_resolvent(*alpha, *lambda, t)?,
            KernelKind::Table { table } => table_integral(table, 0.0, t.min(table.grid.t0())),
        };
        Ok(self.scale * v)
    }

    /// `int_0^t Phi`.
    pub fn tail_integral(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let v = match &self.kind {
            KernelKind::PowerLaw { alpha, tau, b } => {
                let x = b * t / tau;
                // tau/b * ((1+x)^{1-a} - 1)/(1-a)
                tau / b * ((1.0 - alpha) * x.ln_1p()).exp_m1() / (1.0 - alpha)
            }
            KernelKind::Exponential { rate } => -(-rate * t).exp_m1() / rate,
            KernelKind::Fractional { .. } => return Err(KernelError::NonIntegrableTail),
            KernelKind::MittagLeffler { alpha, lambda } => specfn::ml_resolvent_integral(*alpha, *lambda, t)?,
            KernelKind::Table { table } => {
                let s = t.min(table.grid.t0());
                let total = table.cumulative_integral().values[table.grid.n()];
                // int_0^s (total - F(u)) du with F the running integral
                let fi = piecewise_gl(table, 0.0, s, |u| (s - u) * table.interpolate(u));
                return Ok(self.scale * (total * s - fi));
            }
        };
        Ok(self.scale * v)
    }

    /// `C = lim a x^a Phi(x)` for regularly varying tails, of the base shape.
    pub fn tail_constant(&self) -> Result<f64> {
        match &self.kind {
            KernelKind::PowerLaw { alpha, tau, b } => Ok(alpha * (tau / b).powf(*alpha)),
            KernelKind::MittagLeffler { alpha, lambda } => {
                let a = alpha.value();
                if a >= 1.0 {
                    return Err(KernelError::Unsupported("exponential tail has no power-law constant".into()));
                }
                Ok(a * rgamma(1.0 - a) / lambda)
            }
            _ => Err(KernelError::Unsupported("tail is not regularly varying".into())),
        }
    }

    /// Tail exponent of the base shape when it is regularly varying.
    pub fn tail_exponent(&self) -> Option<f64> {
        match &self.kind {
            KernelKind::PowerLaw { alpha, .. } => Some(*alpha),
            KernelKind::MittagLeffler { alpha, .. } if alpha.value() < 1.0 => Some(alpha.value()),
            _ => None,
        }
    }

    /// Moments `(int k, int (u - lo) k(u) du)` over `[lo, lo + h]`.
    pub fn cell_moments(&self, lo: f64, h: f64) -> Result<(f64, f64)> {
        let hi = lo + h;
        let near_origin = lo < 4.0 * h;
        let (m0, m1) = match &self.kind {
            KernelKind::PowerLaw { alpha, tau, b } => {
                let f = |u: f64| alpha * b * tau.powf(*alpha) * (tau + b * u).powf(-1.0 - alpha);
                let m0 = if lo <= 16.0 * h {
                    (tau / (tau + b * lo)).powf(*alpha) - (tau / (tau + b * hi)).powf(*alpha)
                } else {
                    quad::gauss_legendre8(f, lo, hi)
                };
                (m0, quad::gauss_legendre8(|u| (u - lo) * f(u), lo, hi))
            }
            KernelKind::Exponential { rate } => {
                let x = rate * h;
                let e = (-rate * lo).exp();
                let m0 = e * -(-x).exp_m1();
                // 1 - e^{-x}(1 + x), by series when x is small
                let c = if x < 0.1 {
                    let mut term = x * x / 2.0;
                    let mut s: f64 = 0.0;
                    let mut k = 2.0;
                    while term.abs() > 1e-18 * s.abs().max(1e-300) {
                        s += term * (k - 1.0);
                        term *= -x / (k + 1.0);
                        k += 1.0;
                    }
                    s
                } else {
                    -(-x).exp_m1() - x * (-x).exp()
                };
                (m0, e * c / rate)
            }
            KernelKind::Fractional { alpha } => {
                let fk = specfn::FractionalKernel::new(*alpha);
                if near_origin {
                    let m0 = fk.integral(hi) - fk.integral(lo);
                    (m0, fk.first_moment(hi) - fk.first_moment(lo) - lo * m0)
                } else {
                    let f = |u: f64| fk.eval(u);
                    (quad::gauss_legendre8(f, lo, hi), quad::gauss_legendre8(|u| (u - lo) * f(u), lo, hi))
                }
            }
            KernelKind::MittagLeffler { alpha, lambda } => {
                if near_origin {
                    let r_lo = specfn::ml_resolvent(*alpha, *lambda, lo)?;
                    let r_hi = specfn::ml_resolvent(*alpha, *lambda, hi)?;
                    let i_lo = specfn::ml_resolvent_integral(*alpha, *lambda, lo)?;
                    let i_hi = specfn::ml_resolvent_integral(*alpha, *lambda, hi)?;
                    // int (u - lo) f = [-(u - lo) R]_lo^hi + int R
                    (r_lo - r_hi, -h * r_hi + (i_hi - i_lo))
                } else {
                    let failure = RefCell::new(None);
                    let f = |u: f64| match specfn::ml_density(*alpha, *lambda, u) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                            0.0
                        }
                    };
                    let m0 = quad::gauss_legendre8(f, lo, hi);
                    let m1 = quad::gauss_legendre8(|u| (u - lo) * f(u), lo, hi);
                    if let Some(e) = failure.into_inner() {
                        return Err(e.into());
                    }
                    (m0, m1)
                }
            }
            KernelKind::Table { table } => {
                let t0 = table.grid.t0();
                let (a, b) = (lo.min(t0), hi.min(t0));
                (
                    piecewise_gl(table, a, b, |u| table.interpolate(u)),
                    piecewise_gl(table, a, b, |u| (u - lo) * table.interpolate(u)),
                )
            }
        };
        Ok((self.scale * m0, self.scale * m1))
    }

    /// Moments over the lag cells `[(m-1) h, m h]`, `m = 1..=n`.
    pub fn lag_moments(&self, grid: &Grid) -> Result<Vec<(f64, f64)>> {
        let h = grid.dt();
        (1..=grid.n()).map(|m| self.cell_moments((m - 1) as f64 * h, h)).collect()
    }

    /// Draw from the normalized base density (offspring delay).
    pub fn sample_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
        match &self.kind {
            KernelKind::PowerLaw { alpha, tau, b } => Ok(tau * (u.powf(-1.0 / alpha) - 1.0) / b),
            KernelKind::Exponential { rate } => Ok(-u.ln() / rate),
            KernelKind::MittagLeffler { alpha, lambda } => {
                let a = alpha.value();
                if a == 1.0 {
                    return Ok(-u.ln() / lambda);
                }
                // Kozubowski's representation of the Mittag-Leffler law
                let v: f64 = rng.random::<f64>();
                let pa = std::f64::consts::PI * a;
                let w = pa.sin() / (pa * v).tan() - pa.cos();
                Ok((-u.ln()).powf(1.0 / a) * w.powf(1.0 / a) / lambda.powf(1.0 / a))
            }
            _ => Err(KernelError::Unsupported("offset sampling needs a probability density".into())),
        }
    }
}

fn table_integral(table: &GridFn, a: f64, b: f64) -> f64 {
    piecewise_gl(table, a, b, |u| table.interpolate(u))
}

/// Gauss-Legendre on `[a, b]` split at the table nodes, exact for
/// polynomial integrands of degree <= 15 on each linear piece.
fn piecewise_gl<F: Fn(f64) -> f64>(table: &GridFn, a: f64, b: f64, f: F) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = table.grid.dt();
    let mut s = 0.0;
    let mut lo = a;
    while lo < b {
        let next = ((lo / h).floor() + 1.0) * h;
        let hi = next.min(b);
        if hi > lo {
            s += quad::gauss_legendre8(&f, lo, hi);
        }
        lo = if hi <= lo { b } else { hi };
    }
    s
}

/// Product-trapezoid weights for convolutions against one kernel on one grid.
#[derive(Debug, Clone)]
pub struct ProductRule {
    grid: Grid,
    /// `m1/h` per lag cell: weight of the older node.
    a: Vec<f64>,
    /// `omega[n-l]` layout for contiguous dot products.
    wrev: Vec<f64>,
    omega0: f64,
    /// Per-node starting corrections on nodes 0..3 (fractional kernel).
    start: Option<Vec<[f64; 3]>>,
    /// Full weights on nodes 0..3 replacing the rule at nodes 1 and 2.
    head: Option<[[f64; 3]; 2]>,
}

impl ProductRule {
    pub fn from_moments(grid: Grid, moments: &[(f64, f64)]) -> Result<Self> {
        let n = grid.n();
        if moments.len() != n {
            return Err(GridError::Mismatch(format!("{} lag moments for {} cells", moments.len(), n)).into());
        }
        let h = grid.dt();
        let a: Vec<f64> = moments.iter().map(|&(_, m1)| m1 / h).collect();
        let b: Vec<f64> = moments.iter().map(|&(m0, m1)| m0 - m1 / h).collect();
        let mut omega = vec![0.0; n + 1];
        omega[0] = b[0];
        for l in 1..n {
            omega[l] = a[l - 1] + b[l];
        }
        omega[n] = a[n - 1];
        let wrev: Vec<f64> = (0..=n).map(|k| omega[n - k]).collect();
        Ok(Self { grid, a, wrev, omega0: b[0], start: None, head: None })
    }

    /// Weights for `k` on `grid`; the fractional kernel gets starting
    /// corrections.
    pub fn for_kernel(k: &Kernel, grid: &Grid) -> Result<Self> {
        let mut rule = Self::from_moments(*grid, &k.lag_moments(grid)?)?;
        if let KernelKind::Fractional { alpha } = &k.kind {
            if alpha.value() < 1.0 {
                let (start, head) = rule.starting_weights(alpha.value(), k.scale);
                rule.start = Some(start);
                rule.head = Some(head);
            }
        }
        Ok(rule)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Plain rule applied at node `i` to the samples `g`.
    fn plain_at(&self, i: usize, g: &[f64]) -> f64 {
        let n = self.grid.n();
        let w = &self.wrev[n - i + 1..=n];
        let s: f64 = w.iter().zip(&g[1..=i]).map(|(w, g)| w * g).sum();
        s + self.a[i - 1] * g[0]
    }

    fn starting_weights(&self, alpha: f64, scale: f64) -> (Vec<[f64; 3]>, [[f64; 3]; 2]) {
        let n = self.grid.n();
        let h = self.grid.dt();
        let gammas = [0.0, alpha, 1.0];
        let fk = specfn::FractionalKernel::new(FracOrder::new(alpha).expect("order validated by the kernel"));
        let powers: Vec<Vec<f64>> = gammas
            .iter()
            .map(|&g| (0..=n).map(|j| if g == 0.0 { 1.0 } else { self.grid.node(j).powf(g) }).collect())
            .collect();
        let m = [
            [1.0, 1.0, 1.0],
            [0.0, h.powf(alpha), (2.0 * h).powf(alpha)],
            [0.0, h, 2.0 * h],
        ];
        let mut out = vec![[0.0; 3]; n + 1];
        for (i, slot) in out.iter_mut().enumerate().skip(3) {
            let t = self.grid.node(i);
            let mut rhs = [0.0; 3];
            for (r, &g) in gammas.iter().enumerate() {
                let exact = scale * fk.convolve_power(g, t);
                rhs[r] = exact - self.plain_at(i, &powers[r]);
            }
            *slot = solve3(&m, &rhs);
        }
        let mut head = [[0.0; 3]; 2];
        for (r, w) in head.iter_mut().enumerate() {
            let t = self.grid.node(r + 1);
            let exact = gammas.map(|g| scale * fk.convolve_power(g, t));
            *w = solve3(&m, &exact);
        }
        (out, head)
    }

    fn correction_at(&self, i: usize, g: &[f64]) -> f64 {
        match &self.start {
            Some(s) if i >= 3 => s[i][0] * g[0] + s[i][1] * g[1] + s[i][2] * g[2],
            _ => 0.0,
        }
    }

    /// `(k * g)(t_i)` at every node.
    pub fn convolve(&self, g: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.n();
        if g.len() != n + 1 {
            return Err(GridError::Mismatch(format!("{} samples for {} nodes", g.len(), n + 1)).into());
        }
        let mut out = vec![0.0; n + 1];
        for (i, o) in out.iter_mut().enumerate().skip(1) {
            *o = match &self.head {
                Some(w) if i <= 2 => w[i - 1][0] * g[0] + w[i - 1][1] * g[1] + w[i - 1][2] * g[2],
                _ => self.plain_at(i, g) + self.correction_at(i, g),
            };
        }
        Ok(out)
    }

    /// Solve `x + lambda (k * x) = g` by marching.
    pub fn solve(&self, lambda: f64, g: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.n();
        if g.len() != n + 1 {
            return Err(GridError::Mismatch(format!("{} samples for {} nodes", g.len(), n + 1)).into());
        }
        let diag = 1.0 + lambda * self.omega0;
        let h = self.grid.dt();
        let suggest = || {
            // shrink until |lambda| omega0 <= 1/2; omega0 scales like the first-cell mass
            let ratio = (lambda * self.omega0).abs().max(1e-300);
            h * (0.5 / ratio).min(0.5)
        };
        if diag.abs() < 1e-3 || (lambda < 0.0 && diag <= 0.0) {
            return Err(KernelError::Divergence { node: 1, t: self.grid.node(1), suggested_dt: suggest() });
        }
        let mut x = vec![0.0; n + 1];
        x[0] = g[0];
        let wn = &self.wrev;
        let mut first = 1;
        if let Some(w) = &self.head {
            // nodes 1 and 2 are coupled through the head weights
            let (a11, a12) = (1.0 + lambda * w[0][1], lambda * w[0][2]);
            let (a21, a22) = (lambda * w[1][1], 1.0 + lambda * w[1][2]);
            let r1 = g[1] - lambda * w[0][0] * x[0];
            let r2 = g[2] - lambda * w[1][0] * x[0];
            let det = a11 * a22 - a12 * a21;
            x[1] = (r1 * a22 - a12 * r2) / det;
            x[2] = (a11 * r2 - a21 * r1) / det;
            if !(x[1].is_finite() && x[2].is_finite()) || det.abs() < 1e-6 {
                return Err(KernelError::Divergence { node: 1, t: self.grid.node(1), suggested_dt: suggest() });
            }
            first = 3;
        }
        for i in first..=n {
            let w = &wn[n - i + 1..n];
            let mut s: f64 = w.iter().zip(&x[1..i]).map(|(w, x)| w * x).sum();
            s += self.a[i - 1] * x[0];
            s += self.correction_at(i, &x);
            let xi = (g[i] - lambda * s) / diag;
            if !xi.is_finite() {
                return Err(KernelError::Divergence { node: i, t: self.grid.node(i), suggested_dt: suggest() });
            }
            x[i] = xi;
        }
        Ok(x)
    }
}

fn solve3(m: &[[f64; 3]; 3], r: &[f64; 3]) -> [f64; 3] {
    let det = |a: &[[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(m);
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut mc = *m;
        for row in 0..3 {
            mc[row][c] = r[row];
        }
        *o = det(&mc) / d;
    }
    out
}

/// `(k * g)` on the grid of `g` by product integration.
pub fn convolve_kernel(k: &Kernel, g: &GridFn) -> Result<GridFn> {
    let rule = ProductRule::for_kernel(k, &g.grid)?;
    Ok(GridFn { grid: g.grid, values: rule.convolve(&g.values)? })
}

/// `(f * g)` for two sampled functions by the trapezoid rule; exactly
/// symmetric in its arguments.
pub fn convolve(f: &GridFn, g: &GridFn) -> Result<GridFn> {
    f.grid.check_same(&g.grid)?;
    let n = f.grid.n();
    let h = f.grid.dt();
    let fr: Vec<f64> = f.values.iter().rev().copied().collect();
    let mut out = vec![0.0; n + 1];
    for (i, o) in out.iter_mut().enumerate().skip(1) {
        // sum_j w_j f(t_i - t_j) g(t_j), end weights 1/2
        let fi = &fr[n - i..=n];
        let inner: f64 = fi[1..i].iter().zip(&g.values[1..i]).map(|(a, b)| a * b).sum();
        *o = h * (inner + 0.5 * (f.values[i] * g.values[0] + f.values[0] * g.values[i]));
    }
    Ok(GridFn { grid: f.grid, values: out })
}

/// `(k1 * k2)` for two kernels, singular ones included. Cells touching a
/// singular end are integrated adaptively after the substitution
/// `s = lo + (hi - lo) u^2` that flattens an endpoint singularity; the other
/// cells use the 8-point Gauss rule.
pub fn convolve_kernels(k1: &Kernel, k2: &Kernel, grid: &Grid) -> Result<GridFn> {
    let n = grid.n();
    let failure = RefCell::new(None);
    let eval = |k: &Kernel, t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        match k.eval(t) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let mut out = vec![0.0; n + 1];
    for (i, o) in out.iter_mut().enumerate().skip(1) {
        let t = grid.node(i);
        let f = |s: f64| eval(k1, t - s) * eval(k2, s);
        let mut acc = 0.0;
        for j in 0..i {
            let (lo, hi) = (grid.node(j), grid.node(j + 1));
            let left = j == 0 && k2.is_singular();
            let right = j + 1 == i && k1.is_singular();
            acc += match (left, right) {
                (false, false) => quad::gauss_legendre8(f, lo, hi),
                (true, false) => singular_cell(&f, lo, hi, true),
                (false, true) => singular_cell(&f, lo, hi, false),
                (true, true) => {
                    let mid = 0.5 * (lo + hi);
                    singular_cell(&f, lo, mid, true) + singular_cell(&f, mid, hi, false)
                }
            };
        }
        *o = acc;
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(GridFn { grid: *grid, values: out })
}

fn singular_cell<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, at_lo: bool) -> f64 {
    let w = hi - lo;
    let g = |u: f64| {
        let s = if at_lo { lo + w * u * u } else { hi - w * u * u };
        2.0 * w * u * f(s)
    };
    let first = quad::gauss_legendre8(g, 0.0, 1.0);
    quad::integrate(g, 0.0, 1.0, 1e-14 * first.abs().max(1e-300), 1e-11, 200).value
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventSource {
    ClosedForm,
    VolterraSolve,
}

/// `R_l` at the nodes and `f_l = -R_l'` at the cell midpoints.
#[derive(Debug, Clone)]
pub struct ResolventTable {
    pub grid: Grid,
    pub r: Vec<f64>,
    /// Midpoint values of `f_l` (cell averages for the numerical route).
    pub f: Vec<f64>,
    /// Nodal `f_l` when the kernel is bounded at 0 and `f_l` was solved for.
    pub f_nodes: Option<Vec<f64>>,
    pub lambda: f64,
    pub source: ResolventSource,
    /// Lag-cell moments of `f_l` for product integration.
    f_moments: Vec<(f64, f64)>,
}

impl ResolventTable {
    pub fn r_fn(&self) -> GridFn {
        GridFn { grid: self.grid, values: self.r.clone() }
    }

    /// Product rule for convolutions against `f_l`.
    pub fn density_rule(&self) -> Result<ProductRule> {
        ProductRule::from_moments(self.grid, &self.f_moments)
    }

    /// `f_l` interpolated at the nodes (`f(0)` extrapolated from the first
    /// two midpoints when it was not solved for; infinite for singular cases).
    pub fn f_at_nodes(&self) -> Vec<f64> {
        if let Some(f) = &self.f_nodes {
            return f.clone();
        }
        let n = self.grid.n();
        let mut out = vec![0.0; n + 1];
        out[0] = 1.5 * self.f[0] - 0.5 * self.f[1];
        for i in 1..n {
            out[i] = 0.5 * (self.f[i - 1] + self.f[i]);
        }
        out[n] = 1.5 * self.f[n - 1] - 0.5 * self.f[n - 2];
        out
    }
}

/// Closed-form density kernel when one exists: `K_a` scaled by `c` has
/// `f = f_{a, l c}`; the Mittag-Leffler kernel `f_{a,m}` scaled by `c` has
/// `R = 1 - q (1 - R_{a, m(1 + l c)})` with `q = l c / (1 + l c)`.
fn closed_form_density(k: &Kernel, lambda: f64) -> Option<(FracOrder, f64, f64)> {
    let lc = lambda * k.scale;
    match &k.kind {
        KernelKind::Fractional { alpha } if lc > 0.0 => Some((*alpha, lc, 1.0)),
        KernelKind::MittagLeffler { alpha, lambda: m } if lc > 0.0 => Some((*alpha, m * (1.0 + lc), lc / (1.0 + lc))),
        _ => None,
    }
}

/// `R_l + l k * R_l = 1` on `grid`; closed form for fractional and
/// Mittag-Leffler kernels, numerical marching otherwise.
pub fn solve_resolvent(k: &Kernel, lambda: f64, grid: &Grid) -> Result<ResolventTable> {
    let n = grid.n();
    if lambda == 0.0 {
        return Ok(ResolventTable {
            grid: *grid,
            r: vec![1.0; n + 1],
            f: vec![0.0; n],
            f_nodes: Some(vec![0.0; n + 1]),
            lambda,
            source: ResolventSource::ClosedForm,
            f_moments: vec![(0.0, 0.0); n],
        });
    }
    let Some((alpha, rate, weight)) = closed_form_density(k, lambda) else {
        return solve_resolvent_numeric(k, lambda, grid);
    };
    let r = (0..=n)
        .map(|i| Ok(1.0 - weight * (1.0 - specfn::ml_resolvent(alpha, rate, grid.node(i))?)))
        .collect::<Result<Vec<f64>>>()?;
    let f = grid
        .midpoints()
        .into_iter()
        .map(|t| Ok(weight * specfn::ml_density(alpha, rate, t)?))
        .collect::<Result<Vec<f64>>>()?;
    let dens = Kernel::mittag_leffler(alpha, rate)?.scaled(weight);
    let f_nodes = if alpha.value() == 1.0 {
        Some((0..=n).map(|i| dens.eval(grid.node(i))).collect::<Result<Vec<f64>>>()?)
    } else {
        None
    };
    Ok(ResolventTable {
        grid: *grid,
        r,
        f,
        f_nodes,
        lambda,
        source: ResolventSource::ClosedForm,
        f_moments: dens.lag_moments(grid)?,
    })
}

/// Always march numerically, whatever the kernel.
pub fn solve_resolvent_numeric(k: &Kernel, lambda: f64, grid: &Grid) -> Result<ResolventTable> {
    let n = grid.n();
    let h = grid.dt();
    let rule = ProductRule::for_kernel(k, grid)?;
    let r = rule.solve(lambda, &vec![1.0; n + 1])?;
    let (f, f_nodes) = if k.is_singular() {
        ((0..n).map(|i| (r[i] - r[i + 1]) / h).collect::<Vec<f64>>(), None)
    } else {
        let g = (0..=n).map(|i| Ok(lambda * k.eval(grid.node(i))?)).collect::<Result<Vec<f64>>>()?;
        let fnod = rule.solve(lambda, &g)?;
        ((0..n).map(|i| 0.5 * (fnod[i] + fnod[i + 1])).collect(), Some(fnod))
    };
    let f_moments = (0..n)
        .map(|i| {
            let m0 = r[i] - r[i + 1];
            let m1 = match &f_nodes {
                Some(fnod) => {
                    let (lo, hi) = (fnod[i], fnod[i + 1]);
                    let avg = 0.5 * (lo + hi);
                    if avg.abs() > 0.0 {
                        h * m0 * (lo / 6.0 + hi / 3.0) / avg
                    } else {
                        0.5 * h * m0
                    }
                }
                None => 0.5 * h * m0,
            };
            (m0, m1)
        })
        .collect();
    Ok(ResolventTable { grid: *grid, r, f, f_nodes, lambda, source: ResolventSource::VolterraSolve, f_moments })
}

/// `max_i |R_i + l (k * R)_i - 1|` with the product rule of `k`.
pub fn resolvent_residual(k: &Kernel, table: &ResolventTable) -> Result<f64> {
    let rule = ProductRule::for_kernel(k, &table.grid)?;
    let c = rule.convolve(&table.r)?;
    Ok(table.r.iter().zip(&c).map(|(r, c)| (r + table.lambda * c - 1.0).abs()).fold(0.0, f64::max))
}

/// `max_i |f_i + l (k * f)_i - l k_i|` where nodal `f` is available.
pub fn density_residual(k: &Kernel, table: &ResolventTable) -> Result<Option<f64>> {
    let Some(f) = &table.f_nodes else { return Ok(None) };
    let rule = ProductRule::for_kernel(k, &table.grid)?;
    let c = rule.convolve(f)?;
    let mut worst: f64 = 0.0;
    for i in 0..table.grid.len() {
        let ki = k.eval(table.grid.node(i))?;
        worst = worst.max((f[i] + table.lambda * c[i] - table.lambda * ki).abs());
    }
    Ok(Some(worst))
}

/// `Psi = k + k * Psi`, i.e. `Psi = -f_{-1} = sum_{j>=1} k^{*j}`.
pub fn resolvent_second_kind(k: &Kernel, grid: &Grid) -> Result<GridFn> {
    let mass = k.l1_mass().ok_or_else(|| KernelError::Unsupported("second-kind resolvent of a non-integrable kernel".into()))?;
    if mass >= 1.0 {
        return Err(KernelError::Supercritical { mass });
    }
    if k.is_singular() {
        return Err(KernelError::Unsupported("second-kind resolvent needs a kernel bounded at 0".into()));
    }
    let g = (0..grid.len()).map(|i| k.eval(grid.node(i))).collect::<Result<Vec<f64>>>()?;
    let rule = ProductRule::for_kernel(k, grid)?;
    let psi = rule.solve(-1.0, &g)?;
    Ok(GridFn { grid: *grid, values: psi })
}

/// Partial Neumann sum `sum_{j=1}^{terms} k^{*j}` by repeated convolution.
pub fn neumann_sum(k: &Kernel, grid: &Grid, terms: usize) -> Result<GridFn> {
    let rule = ProductRule::for_kernel(k, grid)?;
    let mut power = (0..grid.len()).map(|i| k.eval(grid.node(i))).collect::<Result<Vec<f64>>>()?;
    let mut sum = power.clone();
    for _ in 1..terms {
        power = rule.convolve(&power)?;
        for (s, p) in sum.iter_mut().zip(&power) {
            *s += p;
        }
    }
    Ok(GridFn { grid: *grid, values: sum })
}

/// `x = g - f_l * g`, the solution of `x + l k * x = g`.
pub fn wiener_hopf_solve_a(g: &GridFn, k: &Kernel, lambda: f64) -> Result<GridFn> {
    let table = solve_resolvent(k, lambda, &g.grid)?;
    wiener_hopf_solve_a_with(g, &table)
}

pub fn wiener_hopf_solve_a_with(g: &GridFn, table: &ResolventTable) -> Result<GridFn> {
    g.grid.check_same(&table.grid)?;
    let c = table.density_rule()?.convolve(&g.values)?;
    Ok(GridFn { grid: g.grid, values: g.values.iter().zip(&c).map(|(g, c)| g - c).collect() })
}

/// `x = h + l k * h`, the solution of `x = h + f_l * x`.
pub fn wiener_hopf_solve_b(h: &GridFn, k: &Kernel, lambda: f64) -> Result<GridFn> {
    let c = convolve_kernel(k, h)?;
    Ok(GridFn { grid: h.grid, values: h.values.iter().zip(&c.values).map(|(h, c)| h + lambda * c).collect() })
}

/// `max |x + l k * x - g|`.
pub fn wiener_hopf_residual_a(x: &GridFn, g: &GridFn, k: &Kernel, lambda: f64) -> Result<f64> {
    x.grid.check_same(&g.grid)?;
    let c = convolve_kernel(k, x)?;
    Ok((0..x.grid.len()).map(|i| (x.values[i] + lambda * c.values[i] - g.values[i]).abs()).fold(0.0, f64::max))
}

/// `max |x - f_l * x - h|`.
pub fn wiener_hopf_residual_b(x: &GridFn, h: &GridFn, table: &ResolventTable) -> Result<f64> {
    x.grid.check_same(&h.grid)?;
    let c = table.density_rule()?.convolve(&x.values)?;
    Ok((0..x.grid.len()).map(|i| (x.values[i] - c[i] - h.values[i]).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceResult {
    pub value: f64,
    /// Summed quadrature error estimate.
    pub quad_error: f64,
    /// `e^{-z t_max} sup |f|` at the truncation horizon.
    pub truncation_bound: f64,
    pub horizon: f64,
}

const LAPLACE_MAX_HORIZON: f64 = 1e6;

/// `int_0^inf e^{-z t} f(t) dt`, extending the horizon by doubling until
/// `e^{-z t_max} sup |f| <= 0.01 tol`, the sup running over the sampled
/// piece endpoints beyond the origin.
pub fn laplace_transform<F: Fn(f64) -> f64>(f: F, z: f64, tol: f64) -> Result<LaplaceResult> {
    if !(z > 0.0) {
        return Err(KernelError::Domain(format!("Laplace argument z = {z} must be positive")));
    }
    let integrand = |t: f64| (-z * t).exp() * f(t);
    let mut value = 0.0;
    let mut err = 0.0;
    let mut sup: f64 = 0.0;
    let (mut a, mut b) = (0.0, 1.0);
    loop {
        let r = quad::integrate(integrand, a, b, 1e-3 * tol, 1e-13, 500);
        value += r.value;
        err += r.abs_error;
        sup = sup.max(f(b).abs()).max(f(0.5 * (a + b)).abs());
        let bound = (-z * b).exp() * sup;
        if bound <= 0.01 * tol {
            return Ok(LaplaceResult { value, quad_error: err, truncation_bound: bound, horizon: b });
        }
        if b >= LAPLACE_MAX_HORIZON {
            return Err(KernelError::LaplaceTail { bound, tol, horizon: b });
        }
        a = b;
        b *= 2.0;
    }
}

pub fn laplace_kernel(k: &Kernel, z: f64, tol: f64) -> Result<LaplaceResult> {
    let failure = RefCell::new(None);
    let r = laplace_transform(
        |t| {
            if t <= 0.0 && k.is_singular() {
                return 0.0;
            }
            match k.eval(t) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        },
        z,
        tol,
    )?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

/// Trapezoid Laplace transform of a sampled function over its grid; fails if
/// the truncation bound `e^{-z t0} sup |f|` exceeds `0.01 tol`.
pub fn laplace_grid(f: &GridFn, z: f64, tol: f64) -> Result<LaplaceResult> {
    if !(z > 0.0) {
        return Err(KernelError::Domain(format!("Laplace argument z = {z} must be positive")));
    }
    let weighted = GridFn::from_fn(f.grid, |t| (-z * t).exp()).values;
    let prod = GridFn { grid: f.grid, values: weighted.iter().zip(&f.values).map(|(w, v)| w * v).collect() };
    let value = prod.cumulative_integral().values[f.grid.n()];
    let sup = f.values.iter().skip(1).map(|v| v.abs()).fold(0.0, f64::max);
    let bound = (-z * f.grid.t0()).exp() * sup;
    if bound > 0.01 * tol {
        return Err(KernelError::LaplaceTail { bound, tol, horizon: f.grid.t0() });
    }
    Ok(LaplaceResult { value, quad_error: 0.0, truncation_bound: bound, horizon: f.grid.t0() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    #[test]
    fn power_law_values() {
        let k = Kernel::power_law(0.6, 1.0, 1.0).unwrap();
        assert!((k.eval(0.0).unwrap() - 0.6).abs() < 1e-15);
        assert!((k.tail(0.0).unwrap() - 1.0).abs() < 1e-15);
        let k = Kernel::power_law(0.5, 1.0, 1.0).unwrap();
        assert!((k.tail(3.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn power_law_has_unit_mass() {
        let k = Kernel::power_law(0.6, 2.0, 3.0).unwrap();
        // u = (tau + b t)^{-a} maps (0, inf) to a finite interval
        let head = quad::integrate(|t| k.eval(t).unwrap(), 0.0, 50.0, 1e-13, 1e-13, 500).value;
        let tail = k.tail(50.0).unwrap();
        assert!((head + tail - 1.0).abs() < 1e-11);
        assert!((k.integral(50.0).unwrap() - head).abs() < 1e-11);
    }

    #[test]
    fn fractional_one_is_constant() {
        let k = Kernel::fractional(ord(1.0));
        assert!((k.eval(5.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(k.tail(1.0), Err(KernelError::NonIntegrableTail)));
    }

    #[test]
    fn tail_integrals_match_quadrature() {
        let kernels = [
            Kernel::power_law(0.6, 1.5, 0.7).unwrap(),
            Kernel::exponential(2.0).unwrap(),
            Kernel::mittag_leffler(ord(0.7), 1.3).unwrap(),
        ];
        for k in &kernels {
            let q = quad::integrate(|t| k.tail(t).unwrap(), 0.0, 3.0, 1e-12, 1e-12, 500).value;
            assert!((k.tail_integral(3.0).unwrap() - q).abs() < 1e-9, "{k:?}");
        }
    }

    #[test]
    fn cell_moments_match_quadrature() {
        let kernels = [
            Kernel::power_law(0.6, 1.0, 1.0).unwrap(),
            Kernel::exponential(3.0).unwrap(),
            Kernel::fractional(ord(0.6)),
            Kernel::mittag_leffler(ord(0.6), 1.0).unwrap(),
        ];
        for k in &kernels {
            for (lo, h) in [(0.0, 0.1), (0.1, 0.1), (2.0, 0.25), (0.0, 1e-3)] {
                let (m0, m1) = k.cell_moments(lo, h).unwrap();
                let f = |u: f64| if u <= 0.0 { 0.0 } else { k.eval(u).unwrap() };
                let q0 = quad::integrate(f, lo, lo + h, 1e-15, 1e-12, 2000).value;
                let q1 = quad::integrate(|u| (u - lo) * f(u), lo, lo + h, 1e-15, 1e-12, 2000).value;
                assert!((m0 - q0).abs() < 1e-9 * q0.abs().max(1e-3), "{k:?} lo={lo}: {m0} vs {q0}");
                assert!((m1 - q1).abs() < 1e-9 * q1.abs().max(1e-4), "{k:?} lo={lo}: {m1} vs {q1}");
            }
        }
    }

    #[test]
    fn convolution_with_one_is_integral() {
        let g = Grid::new(2.0, 200).unwrap();
        let k = Kernel::power_law(0.6, 1.0, 1.0).unwrap();
        let c = convolve_kernel(&k, &GridFn::constant(g, 1.0)).unwrap();
        for i in [1, 50, 200] {
            assert!((c.values[i] - k.integral(g.node(i)).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn grid_convolution_is_commutative() {
        let g = Grid::new(1.0, 64).unwrap();
        let a = GridFn::from_fn(g, |t| (3.0 * t).sin() + 1.0);
        let b = GridFn::from_fn(g, |t| (-t).exp());
        let ab = convolve(&a, &b).unwrap();
        let ba = convolve(&b, &a).unwrap();
        assert!(ab.max_abs_diff(&ba).unwrap() < 1e-14);
        let zero = convolve(&GridFn::constant(g, 0.0), &b).unwrap();
        assert_eq!(zero.sup_abs(), 0.0);
    }

    #[test]
    fn half_order_kernels_compose_to_one() {
        let g = Grid::new(1.0, 256).unwrap();
        let k = Kernel::fractional(ord(0.5));
        let c = convolve_kernels(&k, &k, &g).unwrap();
        let err = c.values[1..].iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(err <= g.dt(), "{err}");
    }

    #[test]
    fn fractional_resolvent_numeric_matches_closed_form() {
        let g = Grid::new(1.0, 1024).unwrap();
        let k = Kernel::fractional(ord(0.6));
        let num = solve_resolvent_numeric(&k, 1.0, &g).unwrap();
        let cf = solve_resolvent(&k, 1.0, &g).unwrap();
        assert_eq!(cf.source, ResolventSource::ClosedForm);
        let err = num.r.iter().zip(&cf.r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 2e-7, "{err}");
    }

    #[test]
    fn zero_lambda_gives_unit_resolvent() {
        let g = Grid::new(1.0, 16).unwrap();
        let t = solve_resolvent(&Kernel::power_law(0.6, 1.0, 1.0).unwrap(), 0.0, &g).unwrap();
        assert!(t.r.iter().all(|&r| r == 1.0));
    }

    #[test]
    fn exponential_second_kind_resolvent_is_geometric() {
        let (a, r) = (0.5, 2.0);
        let k = Kernel::exponential(r).unwrap().scaled(a);
        let g = Grid::new(3.0, 3000).unwrap();
        let psi = resolvent_second_kind(&k, &g).unwrap();
        for i in [0, 100, 1000, 3000] {
            let t = g.node(i);
            let want = a * r * (-(1.0 - a) * r * t).exp();
            assert!((psi.values[i] - want).abs() < 1e-6, "t={t}");
        }
        let neu = neumann_sum(&k, &Grid::new(3.0, 300).unwrap(), 40).unwrap();
        let coarse = resolvent_second_kind(&k, &Grid::new(3.0, 300).unwrap()).unwrap();
        assert!(neu.max_abs_diff(&coarse).unwrap() < 1e-10);
    }

    #[test]
    fn supercritical_mass_is_flagged() {
        let k = Kernel::exponential(1.0).unwrap();
        let g = Grid::new(1.0, 10).unwrap();
        assert!(matches!(resolvent_second_kind(&k, &g), Err(KernelError::Supercritical { .. })));
    }

    #[test]
    fn mittag_leffler_closed_form_agrees_with_marching() {
        let g = Grid::new(2.0, 2000).unwrap();
        let k = Kernel::mittag_leffler(ord(1.0), 1.5).unwrap().scaled(0.8);
        let cf = solve_resolvent(&k, 1.2, &g).unwrap();
        let num = solve_resolvent_numeric(&k, 1.2, &g).unwrap();
        let err = num.r.iter().zip(&cf.r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn laplace_of_exponential_density() {
        let k = Kernel::exponential(2.0).unwrap();
        let r = laplace_kernel(&k, 3.0, 1e-10).unwrap();
        assert!((r.value - 0.4).abs() < 1e-10);
        assert!(laplace_transform(|t| t, 0.0, 1e-6).is_err());
    }

    #[test]
    fn laplace_grid_flags_short_horizon() {
        let g = Grid::new(1.0, 100).unwrap();
        let f = GridFn::constant(g, 1.0);
        assert!(matches!(laplace_grid(&f, 1.0, 1e-6), Err(KernelError::LaplaceTail { .. })));
        let g = Grid::new(40.0, 40000).unwrap();
        let f = GridFn::from_fn(g, |t| (-t).exp());
        let r = laplace_grid(&f, 1.0, 1e-6).unwrap();
        assert!((r.value - 0.5).abs() < 1e-6);
    }

    #[test]
    fn table_kernel_basics() {
        let g = Grid::new(2.0, 4).unwrap();
        let k = Kernel::table(GridFn::from_fn(g, |t| 1.0 - 0.5 * t)).unwrap();
        assert!((k.l1_mass().unwrap() - 1.0).abs() < 1e-15);
        assert!((k.tail(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((k.integral(1.0).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(k.eval(3.0).unwrap(), 0.0);
        let (m0, m1) = k.cell_moments(0.25, 1.0).unwrap();
        let q0 = quad::gauss_legendre8(|u| 1.0 - 0.5 * u, 0.25, 1.25);
        let q1 = quad::gauss_legendre8(|u| (u - 0.25) * (1.0 - 0.5 * u), 0.25, 1.25);
        assert!((m0 - q0).abs() < 1e-14 && (m1 - q1).abs() < 1e-14);
    }

    #[test]
    fn offsets_follow_the_tail() {
        use rand::SeedableRng;
        let k = Kernel::power_law(0.6, 1.0, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        let n = 20000;
        let above = (0..n).filter(|_| k.sample_offset(&mut rng).unwrap() > 2.0).count();
        let p = k.tail(2.0).unwrap();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((above as f64 / n as f64 - p).abs() < 4.0 * se);
        let ml = Kernel::mittag_leffler(ord(0.7), 1.0).unwrap();
        let above = (0..n).filter(|_| ml.sample_offset(&mut rng).unwrap() > 1.0).count();
        let p = ml.tail(1.0).unwrap();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((above as f64 / n as f64 - p).abs() < 4.0 * se);
    }
}
