//! Uniform time grids and functions sampled on them.

use std::io::{self, Write};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid horizon must be positive and finite, got {0}")]
    Horizon(f64),
    #[error("grid needs at least 2 steps, got {0}")]
    Steps(usize),
    #[error("grid mismatch: {0}")]
    Mismatch(String),
}

/// `n` equal steps on `[0, t0]`, nodes `t_i = i dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    t0: f64,
    n: usize,
    dt: f64,
}

impl Grid {
    pub fn new(t0: f64, n: usize) -> Result<Self, GridError> {
        if !(t0.is_finite() && t0 > 0.0) {
            return Err(GridError::Horizon(t0));
        }
        if n < 2 {
            return Err(GridError::Steps(n));
        }
        Ok(Self { t0, n, dt: t0 / n as f64 })
    }

    /// Grid with step `dt` (rounded to a whole number of steps) on `[0, t0]`.
    pub fn with_step(t0: f64, dt: f64) -> Result<Self, GridError> {
        let n = (t0 / dt).round().max(0.0) as usize;
        Self::new(t0, n)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    /// Number of nodes, `n + 1`.
    pub fn len(&self) -> usize {
        self.n + 1
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            self.t0
        } else {
            i as f64 * self.dt
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    /// Cell midpoints `(i + 1/2) dt`, `i = 0..n`.
    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.n).map(|i| (i as f64 + 0.5) * self.dt).collect()
    }

    /// Index of the node nearest to `t` (clamped to the grid).
    pub fn nearest(&self, t: f64) -> usize {
        ((t / self.dt).round().max(0.0) as usize).min(self.n)
    }

    /// Same nodes, tolerant to rounding in `dt`.
    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n && (self.t0 - other.t0).abs() <= 1e-12 * self.t0.max(other.t0)
    }

    pub fn check_same(&self, other: &Grid) -> Result<(), GridError> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(GridError::Mismatch(format!(
                "[0, {}] with {} steps vs [0, {}] with {} steps",
                self.t0, self.n, other.t0, other.n
            )))
        }
    }

    /// Coarsen by an integer factor; `n` must be divisible by it.
    pub fn coarsen(&self, factor: usize) -> Result<Grid, GridError> {
        if factor == 0 || !self.n.is_multiple_of(factor) {
            return Err(GridError::Mismatch(format!("{} steps not divisible by {factor}", self.n)));
        }
        Grid::new(self.t0, self.n / factor)
    }
}

/// Values at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFn {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::Mismatch(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: FnMut(f64) -> f64>(grid: Grid, mut f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Self { grid, values }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    /// Piecewise-linear interpolation, clamped outside `[0, t0]`.
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = self.grid.n();
        if t <= 0.0 {
            return self.values[0];
        }
        if t >= self.grid.t0() {
            return self.values[n];
        }
        let x = t / self.grid.dt();
        let i = (x.floor() as usize).min(n - 1);
        let w = x - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Cumulative trapezoid integral `int_0^{t_i}`.
    pub fn cumulative_integral(&self) -> GridFn {
        let h = self.grid.dt();
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = 0.0;
        out.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            out.push(acc);
        }
        GridFn { grid: self.grid, values: out }
    }

    pub fn max_abs_diff(&self, other: &GridFn) -> Result<f64, GridError> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Debug dump with columns `t,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.grid.node(i), v)?;
        }
        Ok(())
    }
}
