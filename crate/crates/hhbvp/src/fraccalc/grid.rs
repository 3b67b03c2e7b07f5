//! Log-uniform discretisation of [1, e] and sampled functions on it.
//!
//! Everything works in the logarithmic coordinate u = log t, where the grid
//! is uniform: u_j = j/N, t_j = exp(u_j). A [`GridFunction`] whose value at
//! t = 1 is unbounded (the (log t)^(gamma-2) mode of the linear solution)
//! carries `singular_at_left`; node 0 is then a placeholder, never data.

use super::FracError;

/// Uniform grid in u = log t over [0, 1], i.e. t in [1, e].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub const MIN_N: usize = 16;

    pub fn new(n: usize) -> Result<Self, FracError> {
        if n < Self::MIN_N {
            return Err(FracError::GridTooSmall { n, need: Self::MIN_N });
        }
        Ok(Grid { n })
    }

    /// Number of cells N; nodes are 0..=N.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Spacing in u, exactly 1/N.
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// u_j = j/N.
    pub fn u(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    /// t_j = exp(j/N).
    pub fn t(&self, j: usize) -> f64 {
        self.u(j).exp()
    }

    pub fn node_count(&self) -> usize {
        self.n + 1
    }
}

/// Real-valued samples on a [`Grid`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    singular_at_left: bool,
}

impl GridFunction {
    /// Wrap a full vector of node values. All values must be finite.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self, FracError> {
        if values.len() != grid.node_count() {
            return Err(FracError::LengthMismatch {
                got: values.len(),
                want: grid.node_count(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(FracError::NonFinite(*v));
        }
        Ok(GridFunction { grid, values, singular_at_left: false })
    }

    /// Sample a function of t at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self, FracError> {
        let values = (0..grid.node_count()).map(|j| f(grid.t(j))).collect();
        Self::from_values(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction { grid, values: vec![0.0; grid.node_count()], singular_at_left: false }
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self, FracError> {
        Self::from_values(grid, vec![c; grid.node_count()])
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, j: usize) -> f64 {
        self.values[j]
    }

    /// Whether the value at t = 1 is meaningless (unbounded limit).
    pub fn singular_at_left(&self) -> bool {
        self.singular_at_left
    }

    /// Mark the left endpoint as singular; node 0 is zeroed as a placeholder.
    pub fn set_singular_at_left(&mut self, singular: bool) {
        self.singular_at_left = singular;
        if singular {
            self.values[0] = 0.0;
        }
    }

    /// Discrete sup norm over nodes j >= 1, matching the sup over (1, e].
    pub fn sup_norm(&self) -> f64 {
        self.values[1..].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max-norm distance over nodes j >= 1.
    pub fn distance(&self, other: &GridFunction) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values[1..]
            .iter()
            .zip(&other.values[1..])
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub(crate) fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>, singular_at_left: bool) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        GridFunction { grid, values, singular_at_left }
    }

    /// Cubic Lagrange interpolation at u in [0, 1]. The stencil never uses
    /// node 0 of a left-singular function.
    pub fn interp_at_u(&self, u: f64) -> f64 {
        let n = self.grid.n();
        let h = self.grid.h();
        let lo = if self.singular_at_left { 1 } else { 0 };
        let j = (u / h) as usize;
        let j0 = j.saturating_sub(1).clamp(lo, n - 3);
        let x = u / h - j0 as f64;
        let v = &self.values[j0..j0 + 4];
        // Lagrange basis on local nodes 0, 1, 2, 3.
        let l0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
        let l1 = x * (x - 2.0) * (x - 3.0) / 2.0;
        let l2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
        let l3 = x * (x - 1.0) * (x - 2.0) / 6.0;
        v[0] * l0 + v[1] * l1 + v[2] * l2 + v[3] * l3
    }

    /// Interpolate at a physical point t in (1, e].
    pub fn interp_at_t(&self, t: f64) -> f64 {
        self.interp_at_u(t.ln())
    }
}
