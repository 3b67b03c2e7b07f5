//! Hadamard-type fractional calculus on [1, e].
//!
//! All operators work in the logarithmic coordinate u = log t, where the
//! Hadamard kernel (log t/tau)^(a-1) d tau / tau becomes the Abel kernel
//! (v - u)^(a-1) du on [0, v]. Integrals use the product-trapezoidal rule
//! (exact cell moments against a piecewise-linear interpolant); the
//! delta = t d/dt operator is the plain d/du derivative, discretised with
//! fourth-order stencils.
//!
//! Derivative compositions refine the plain rule in two ways. The integral
//! feeding a difference stencil subtracts a fitted left-edge power of the
//! integrand and integrates it analytically, so fractional power modes pass
//! through the composition without polluting the left cells. An integral
//! *consuming* stencil output first replaces the four left-edge nodes by
//! cubic extrapolation, because one-sided stencils applied to quadrature
//! output are the one untrustworthy spot of the pipeline.

mod abel;
pub mod gamma;
mod grid;

pub use gamma::{gamma, is_gamma_pole, recip_gamma};
pub use grid::{Grid, GridFunction};

use crate::expr::EvalError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FracError {
    #[error("fractional order must be positive, got {0}")]
    NonPositiveOrder(f64),
    #[error("order {got} outside supported range ({lo}, {hi}]")]
    OrderOutOfRange { got: f64, lo: f64, hi: f64 },
    #[error("evaluation point t = {0} lies outside (1, e]")]
    PointOutOfDomain(f64),
    #[error("grid has {n} cells; at least {need} required")]
    GridTooSmall { n: usize, need: usize },
    #[error("value vector has length {got}, grid wants {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("non-finite sample {0}")]
    NonFinite(f64),
    #[error("type parameter beta = {0} outside [0, 1]")]
    BetaOutOfRange(f64),
    #[error("integrand evaluation failed: {0}")]
    Integrand(#[from] EvalError),
}

impl From<std::convert::Infallible> for FracError {
    fn from(e: std::convert::Infallible) -> Self {
        match e {}
    }
}

/// Order/type pair (alpha, beta) of the two-parameter derivative, with the
/// induced integer n and interpolation exponent gamma = alpha + n beta
/// - alpha beta. n satisfies n - 1 < alpha <= n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub gamma: f64,
}

impl FracOrder {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, FracError> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(FracError::NonPositiveOrder(alpha));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(FracError::BetaOutOfRange(beta));
        }
        let n = if alpha == alpha.floor() { alpha as usize } else { alpha.floor() as usize + 1 };
        let gamma = alpha + n as f64 * beta - alpha * beta;
        Ok(FracOrder { alpha, beta, n, gamma })
    }
}

/// Copy node values, patching node 0 of a left-singular function by linear
/// extrapolation so the first quadrature cell stays usable.
fn working_values(f: &GridFunction) -> Vec<f64> {
    let mut v = f.values().to_vec();
    if f.singular_at_left() {
        v[0] = 2.0 * v[1] - v[2];
    }
    v
}

/// Hadamard fractional integral of an evaluable integrand at a single point:
/// (1/Gamma(order)) * int_1^t (log(t/tau))^(order-1) f(tau) d tau / tau,
/// computed on `resolution` uniform cells of [0, log t].
pub fn hadamard_integral<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    order: f64,
    t: f64,
    resolution: usize,
) -> Result<f64, FracError>
where
    FracError: From<E>,
{
    if !(order > 0.0) {
        return Err(FracError::NonPositiveOrder(order));
    }
    if !(t > 1.0) || t > std::f64::consts::E * (1.0 + 1e-12) {
        return Err(FracError::PointOutOfDomain(t));
    }
    let v = t.ln();
    let cells = resolution.max(1);
    Ok(abel::integral_of_fn(|u| f(u.exp()), order, v, cells)?)
}

/// Hadamard fractional integral of grid samples at every node (plain product
/// rule; node 0 is 0 by continuity for positive orders).
pub fn hadamard_integral_grid(f: &GridFunction, order: f64) -> Result<GridFunction, FracError> {
    if !(order > 0.0) {
        return Err(FracError::NonPositiveOrder(order));
    }
    let values = working_values(f);
    let out = abel::integral_at_nodes(&values, f.grid().h(), order);
    Ok(GridFunction::from_raw(f.grid(), out, false))
}

/// Hadamard fractional integral of grid samples at an arbitrary point
/// t in (1, e]: whole cells up to the last node below log t plus one partial
/// cell with the linear interpolant of the full cell.
pub(crate) fn hadamard_integral_of_grid_at(f: &GridFunction, order: f64, t: f64) -> f64 {
    debug_assert!(order > 0.0 && t > 1.0);
    let values = working_values(f);
    abel::integral_at_point(&values, f.grid().h(), order, t.ln())
}

fn delta_once(values: &[f64], h: f64, lo: usize) -> Vec<f64> {
    let n = values.len() - 1;
    debug_assert!(n + 1 - lo >= 5);
    let mut out = vec![0.0; n + 1];
    let d = 12.0 * h;
    for j in (lo + 2)..(n - 1) {
        out[j] = (-values[j + 2] + 8.0 * values[j + 1] - 8.0 * values[j - 1] + values[j - 2]) / d;
    }
    let v = &values[lo..lo + 5];
    out[lo] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / d;
    out[lo + 1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / d;
    let w = &values[n - 4..=n];
    out[n - 1] = (-w[0] + 6.0 * w[1] - 18.0 * w[2] + 10.0 * w[3] + 3.0 * w[4]) / d;
    out[n] = (3.0 * w[0] - 16.0 * w[1] + 36.0 * w[2] - 48.0 * w[3] + 25.0 * w[4]) / d;
    out
}

/// The delta = t d/dt operator applied `repetitions` times, via fourth-order
/// finite differences in u (one-sided at the edges). For a left-singular
/// input the stencils never touch node 0 and the output stays flagged.
/// The five-point stencils need at least five usable nodes, which
/// [`Grid::MIN_N`] guarantees at construction.
pub fn delta_operator(f: &GridFunction, repetitions: usize) -> GridFunction {
    assert!(repetitions >= 1, "repetitions must be at least 1");
    let h = f.grid().h();
    let lo = if f.singular_at_left() { 1 } else { 0 };
    let mut values = f.values().to_vec();
    for _ in 0..repetitions {
        values = delta_once(&values, h, lo);
    }
    let mut out = GridFunction::from_raw(f.grid(), values, false);
    out.set_singular_at_left(f.singular_at_left());
    out
}

fn check_derivative_order(order: f64) -> Result<(), FracError> {
    if !(order > 0.0) {
        return Err(FracError::NonPositiveOrder(order));
    }
    if order > 2.0 {
        return Err(FracError::OrderOutOfRange { got: order, lo: 0.0, hi: 2.0 });
    }
    Ok(())
}

/// Integral stage that feeds a difference stencil: fitted left-edge power is
/// integrated analytically, the remainder goes through the plain rule. The
/// output's node 0 carries the analytic limit (zero, finite, or flagged
/// singular depending on the sign of the fitted output exponent).
fn pre_delta_integral(f: &GridFunction, order: f64) -> GridFunction {
    let h = f.grid().h();
    let values = working_values(f);
    let fit = abel::fit_left_power(&values, h);
    let out_vals = abel::integral_at_nodes_power_aware(&values, h, order);
    let mut out = GridFunction::from_raw(f.grid(), out_vals, false);
    if let Some((c, s)) = fit {
        let s_out = s + order;
        if s_out < -1e-9 {
            out.set_singular_at_left(true);
        } else if s_out.abs() <= 1e-9 {
            // compensating case: the integral tends to a nonzero constant
            let mut v = out.into_values();
            v[0] = c * gamma(s + 1.0) / gamma(s + 1.0 + order);
            out = GridFunction::from_raw(f.grid(), v, false);
        }
    }
    out
}

/// Integral stage that consumes stencil output: guard the four left-edge
/// nodes by cubic extrapolation, then apply the plain rule.
fn post_delta_integral(g: GridFunction, order: f64) -> GridFunction {
    let grid = g.grid();
    let h = grid.h();
    let mut values = g.into_values();
    abel::guard_left_edge(&mut values, 4);
    let out = abel::integral_at_nodes(&values, h, order);
    GridFunction::from_raw(grid, out, false)
}

/// Hadamard fractional derivative delta^n (I^(n-order) f) for order in
/// (0, 2]. Integer orders short-circuit to the classical delta operator.
pub fn hadamard_derivative(f: &GridFunction, order: f64) -> Result<GridFunction, FracError> {
    check_derivative_order(order)?;
    if order == 1.0 || order == 2.0 {
        return Ok(delta_operator(f, order as usize));
    }
    let n = order.floor() as usize + 1;
    let inner = pre_delta_integral(f, n as f64 - order);
    Ok(delta_operator(&inner, n))
}

/// Caputo-Hadamard fractional derivative I^(n-order) (delta^n f) for order
/// in (0, 2]. Integer orders short-circuit to the classical delta operator.
pub fn caputo_hadamard_derivative(f: &GridFunction, order: f64) -> Result<GridFunction, FracError> {
    check_derivative_order(order)?;
    if order == 1.0 || order == 2.0 {
        return Ok(delta_operator(f, order as usize));
    }
    let n = order.floor() as usize + 1;
    let g = delta_operator(f, n);
    Ok(post_delta_integral(g, n as f64 - order))
}

/// Hilfer-Hadamard fractional derivative: the three-stage composition
/// I^(beta (n-alpha)) delta^n I^((n-alpha)(1-beta)). Order-zero integrals
/// short-circuit to the identity, so beta = 0 reduces exactly to
/// [`hadamard_derivative`] and beta = 1 to [`caputo_hadamard_derivative`].
///
/// Accuracy relies on the input being well resolved (N >= 64 recommended);
/// for left-singular inputs the composition is best-effort only — see
/// [`crate::solver::verify_solution`] for the residual path that handles
/// the unbounded solution mode exactly.
pub fn hilfer_hadamard_derivative(
    f: &GridFunction,
    order: &FracOrder,
) -> Result<GridFunction, FracError> {
    check_derivative_order(order.alpha)?;
    let n = order.n;
    let theta_in = (n as f64 - order.alpha) * (1.0 - order.beta);
    let theta_out = order.beta * (n as f64 - order.alpha);
    let g = if theta_in > 0.0 { pre_delta_integral(f, theta_in) } else { f.clone() };
    let g = delta_operator(&g, n);
    Ok(if theta_out > 0.0 { post_delta_integral(g, theta_out) } else { g })
}
