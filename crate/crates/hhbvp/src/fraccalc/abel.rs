//! Product-trapezoidal quadrature for weakly singular convolutions
//!
//! ```text
//! (1/Gamma(a)) * integral_0^v (v - u)^(a-1) F(u) du,   a > 0,
//! ```
//!
//! the form every Hadamard-type integral takes once the substitution
//! u = log tau is made. On each cell the kernel moments are integrated
//! exactly against the piecewise-linear interpolant of F, which makes the
//! rule exact for piecewise-linear F and O(h^2) for F with two derivatives.

use super::gamma::gamma;

/// Exact kernel moments over a cell [a, b] for target v >= b:
/// m0 = int_a^b (v-u)^(alpha-1) du, m1 = int_a^b (v-u)^(alpha-1) (u-a) du.
#[inline]
fn cell_moments(alpha: f64, v: f64, a: f64, b: f64) -> (f64, f64) {
    let sa = v - a;
    let sb = v - b;
    let pa = sa.powf(alpha);
    let pb = sb.powf(alpha);
    let m0 = (pa - pb) / alpha;
    let m1 = sa * m0 - (sa * pa - sb * pb) / (alpha + 1.0);
    (m0, m1)
}

/// Quadrature at every node j of a uniform grid; values[k] = F(k*h).
/// Returns the integral (Gamma factor included) with out[0] = 0.
///
/// The kernel moments only depend on the distance j - k, so the whole table
/// costs two power evaluations per node plus an O(N^2) convolution.
pub(crate) fn integral_at_nodes(values: &[f64], h: f64, alpha: f64) -> Vec<f64> {
    let n = values.len() - 1;
    let mut p = vec![0.0; n + 1];
    let mut q = vec![0.0; n + 1];
    for i in 0..=n {
        let s = i as f64 * h;
        p[i] = s.powf(alpha);
        q[i] = s.powf(alpha + 1.0);
    }
    // a[d]: m0 for a cell at distance d; b[d]: m1/h for the same cell.
    let mut a = vec![0.0; n + 1];
    let mut b = vec![0.0; n + 1];
    for d in 1..=n {
        a[d] = (p[d] - p[d - 1]) / alpha;
        b[d] = (d as f64 * h * a[d] - (q[d] - q[d - 1]) / (alpha + 1.0)) / h;
    }
    let inv_gamma = 1.0 / gamma(alpha);
    let mut out = vec![0.0; n + 1];
    for j in 1..=n {
        let mut acc = 0.0;
        for k in 0..j {
            let d = j - k;
            acc += values[k] * (a[d] - b[d]) + values[k + 1] * b[d];
        }
        out[j] = acc * inv_gamma;
    }
    out
}

/// Quadrature of grid samples at an off-node target v in (0, 1]: whole cells
/// up to the last node below v, then one partial cell that keeps the linear
/// interpolant of the underlying full cell.
pub(crate) fn integral_at_point(values: &[f64], h: f64, alpha: f64, v: f64) -> f64 {
    let n = values.len() - 1;
    debug_assert!(v > 0.0 && v <= n as f64 * h + 1e-12);
    let last = ((v / h) as usize).min(n - 1);
    let mut acc = 0.0;
    for k in 0..=last {
        let a = k as f64 * h;
        let b = if k < last { (k + 1) as f64 * h } else { v };
        if b <= a {
            continue;
        }
        let (m0, m1) = cell_moments(alpha, v, a, b);
        let slope = (values[k + 1] - values[k]) / h;
        acc += values[k] * m0 + slope * m1;
    }
    acc / gamma(alpha)
}

/// Quadrature of an evaluable integrand with its own resolution: `cells`
/// uniform subintervals of [0, v], F evaluated at every subdivision node.
pub(crate) fn integral_of_fn<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    alpha: f64,
    v: f64,
    cells: usize,
) -> Result<f64, E> {
    debug_assert!(v > 0.0 && cells >= 1);
    let d = v / cells as f64;
    let mut acc = 0.0;
    let mut f_lo = f(0.0)?;
    for k in 0..cells {
        let a = k as f64 * d;
        let b = if k + 1 == cells { v } else { (k + 1) as f64 * d };
        let f_hi = f(b)?;
        let (m0, m1) = cell_moments(alpha, v, a, b);
        acc += f_lo * m0 + (f_hi - f_lo) / d * m1;
        f_lo = f_hi;
    }
    Ok(acc / gamma(alpha))
}

/// Left-edge power model fitted through the first two interior nodes:
/// F(u) ~ c * u^s. Returns None when the samples do not look like a power
/// (zero, sign change, or exponent outside a sane window).
pub(crate) fn fit_left_power(values: &[f64], h: f64) -> Option<(f64, f64)> {
    let (f1, f2) = (values[1], values[2]);
    if f1 == 0.0 || f2 == 0.0 || (f1 > 0.0) != (f2 > 0.0) {
        return None;
    }
    let s = (f1 / f2).ln() / 0.5f64.ln();
    if !s.is_finite() || !(-0.95..=4.0).contains(&s) {
        return None;
    }
    Some((f1 / h.powf(s), s))
}

/// Node-table quadrature with the fitted left power integrated analytically:
/// I[F] = c * Gamma(s+1)/Gamma(s+1+alpha) * u^(s+alpha) + I[F - c u^s].
///
/// This keeps the first cells accurate when F has a fractional power at the
/// left edge (including negative exponents from left-singular inputs), which
/// is what the derivative compositions differentiate. Falls back to the
/// plain rule when no power fit is available.
pub(crate) fn integral_at_nodes_power_aware(values: &[f64], h: f64, alpha: f64) -> Vec<f64> {
    let Some((c, s)) = fit_left_power(values, h) else {
        return integral_at_nodes(values, h, alpha);
    };
    let n = values.len() - 1;
    let mut rest = vec![0.0; n + 1];
    rest[0] = if s > 0.0 { values[0] } else { 0.0 };
    for (j, r) in rest.iter_mut().enumerate().skip(1) {
        *r = values[j] - c * (j as f64 * h).powf(s);
    }
    let coef = c * gamma(s + 1.0) / gamma(s + 1.0 + alpha);
    let mut out = integral_at_nodes(&rest, h, alpha);
    for (j, o) in out.iter_mut().enumerate().skip(1) {
        *o += coef * (j as f64 * h).powf(s + alpha);
    }
    out
}

/// Replace the first `k0` node values by cubic extrapolation from nodes
/// k0..k0+3. The one-sided difference stencils feeding an outer integral are
/// unreliable on quadrature output near the left edge; capping those nodes
/// costs O(h) integral mass at worst and is exact for cubic data.
pub(crate) fn guard_left_edge(values: &mut [f64], k0: usize) {
    debug_assert!(values.len() >= k0 + 4);
    for j in 0..k0 {
        let x = j as f64 - k0 as f64;
        let l0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
        let l1 = x * (x - 2.0) * (x - 3.0) / 2.0;
        let l2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
        let l3 = x * (x - 1.0) * (x - 2.0) / 6.0;
        values[j] = values[k0] * l0 + values[k0 + 1] * l1 + values[k0 + 2] * l2
            + values[k0 + 3] * l3;
    }
}
