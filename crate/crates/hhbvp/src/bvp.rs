//! The nonlocal boundary value problem and its fixed-point structure.
//!
//! The problem on J = (1, e] couples a two-parameter fractional derivative
//! row D^{alpha,beta} x(t) + f(t, x(t)) = 0 with two nonlocal rows:
//! x(1+eps) = sum nu_i x(zeta_i) and (t d/dt)x at e tied to the same
//! derivative at the zeta_i. The linearised problem has a closed-form
//! solution built from six constants (gamma, mu1, mu2, delta1, delta2,
//! lambda); replacing the forcing by f(., x(.)) turns that formula into the
//! fixed-point operator rho whose fixed points solve the nonlinear problem.

use crate::expr::{self, Bindings, EvalError, ExprAst, Var};
use crate::fraccalc::{
    self, delta_operator, hadamard_integral_grid, FracError, FracOrder, GridFunction,
};
use serde::Serialize;
use thiserror::Error;

/// |lambda| below this is treated as a degenerate problem.
pub const LAMBDA_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum BvpError {
    #[error("{field}: {message}")]
    InvalidField { field: &'static str, message: String },
    #[error("degenerate problem: lambda = {lambda:e} (|lambda| <= {tol:e} is rejected)")]
    DegenerateLambda { lambda: f64, tol: f64 },
    #[error("nonlinearity evaluation failed at t = {t}, x = {x}: {source}")]
    NonlinearityEval { t: f64, x: f64, source: EvalError },
    #[error(transparent)]
    Frac(#[from] FracError),
}

/// Full description of one boundary value problem, plus the optional data
/// the certification theorems need.
#[derive(Debug, Clone)]
pub struct Problem {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub zeta: Vec<f64>,
    pub nu: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Nonlinearity f(t, x).
    pub f: ExprAst,
    /// Lipschitz constant C of f in x (user-supplied, trusted).
    pub lipschitz: Option<f64>,
    /// Dominating bound g(t) with |f(t, x)| <= g(t).
    pub bound: Option<ExprAst>,
    /// Growth factor q(t) of |f(t, x)| <= q(t) vartheta(|x|).
    pub growth: Option<ExprAst>,
    /// Growth majorant vartheta(u), nondecreasing.
    pub vartheta: Option<ExprAst>,
    /// Weight w(t) of the nonlinear-contraction hypothesis.
    pub weight: Option<ExprAst>,
}

impl Problem {
    /// Validate all invariants. The zeta_i must lie in (1, e) but are not
    /// required to be ordered (the worked examples themselves are not).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha: f64,
        beta: f64,
        epsilon: f64,
        zeta: Vec<f64>,
        nu: Vec<f64>,
        sigma: Vec<f64>,
        f: ExprAst,
    ) -> Result<Self, BvpError> {
        let invalid = |field: &'static str, message: String| -> BvpError {
            BvpError::InvalidField { field, message }
        };
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(invalid("alpha", format!("must lie in (1, 2], got {alpha}")));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(invalid("beta", format!("must lie in [0, 1], got {beta}")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(invalid("epsilon", format!("must lie in (0, 1), got {epsilon}")));
        }
        if zeta.len() != nu.len() || zeta.len() != sigma.len() {
            return Err(invalid(
                "zeta",
                format!(
                    "zeta, nu, sigma must have equal length (got {}, {}, {})",
                    zeta.len(),
                    nu.len(),
                    sigma.len()
                ),
            ));
        }
        for (i, z) in zeta.iter().enumerate() {
            if !(*z > 1.0 && *z < std::f64::consts::E) {
                return Err(invalid("zeta", format!("zeta[{i}] = {z} outside (1, e)")));
            }
        }
        for (name, list) in [("nu", &nu), ("sigma", &sigma)] {
            if let Some(v) = list.iter().find(|v| !v.is_finite()) {
                return Err(invalid("nu", format!("{name} contains non-finite value {v}")));
            }
        }
        let fvars = f.variables();
        if fvars.contains(&Var::U) {
            return Err(invalid("f", "may only use variables t and x".into()));
        }
        Ok(Problem {
            alpha,
            beta,
            epsilon,
            zeta,
            nu,
            sigma,
            f,
            lipschitz: None,
            bound: None,
            growth: None,
            vartheta: None,
            weight: None,
        })
    }

    pub fn with_lipschitz(mut self, c: f64) -> Result<Self, BvpError> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(BvpError::InvalidField {
                field: "C",
                message: format!("must be a finite nonnegative number, got {c}"),
            });
        }
        self.lipschitz = Some(c);
        Ok(self)
    }

    fn check_single_var(
        expr: &ExprAst,
        field: &'static str,
        allowed: Var,
    ) -> Result<(), BvpError> {
        if expr.variables().iter().any(|v| *v != allowed) {
            return Err(BvpError::InvalidField {
                field,
                message: format!("may only use the variable {}", allowed.name()),
            });
        }
        Ok(())
    }

    pub fn with_bound(mut self, g: ExprAst) -> Result<Self, BvpError> {
        Self::check_single_var(&g, "g", Var::T)?;
        self.bound = Some(g);
        Ok(self)
    }

    pub fn with_growth(mut self, q: ExprAst) -> Result<Self, BvpError> {
        Self::check_single_var(&q, "q", Var::T)?;
        self.growth = Some(q);
        Ok(self)
    }

    pub fn with_vartheta(mut self, v: ExprAst) -> Result<Self, BvpError> {
        Self::check_single_var(&v, "vartheta", Var::U)?;
        self.vartheta = Some(v);
        Ok(self)
    }

    pub fn with_weight(mut self, w: ExprAst) -> Result<Self, BvpError> {
        Self::check_single_var(&w, "weight", Var::T)?;
        self.weight = Some(w);
        Ok(self)
    }

    /// The (alpha, beta) order pair; n = 2 throughout since alpha is in (1, 2].
    pub fn frac_order(&self) -> FracOrder {
        FracOrder::new(self.alpha, self.beta).expect("validated at construction")
    }

    /// gamma = alpha + 2 beta - alpha beta, the exponent of the homogeneous
    /// modes (log t)^(gamma-1) and (log t)^(gamma-2).
    pub fn gamma(&self) -> f64 {
        self.frac_order().gamma
    }

    /// Evaluate the nonlinearity at one point.
    pub fn eval_f(&self, t: f64, x: f64) -> Result<f64, BvpError> {
        expr::eval(&self.f, &Bindings::new().with_t(t).with_x(x))
            .map_err(|source| BvpError::NonlinearityEval { t, x, source })
    }
}

/// The six closed-form constants of the linearised problem.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BvpConstants {
    pub gamma: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub lambda: f64,
}

/// Compute the boundary constants; fails when lambda vanishes.
pub fn compute_constants(problem: &Problem) -> Result<BvpConstants, BvpError> {
    let g = problem.gamma();
    let le = (1.0 + problem.epsilon).ln();
    let lz: Vec<f64> = problem.zeta.iter().map(|z| z.ln()).collect();
    let weighted = |weights: &[f64], exponent: f64| -> f64 {
        weights.iter().zip(&lz).map(|(w, l)| w * l.powf(exponent)).sum()
    };
    let mu1 = le.powf(g - 1.0) - weighted(&problem.nu, g - 1.0);
    let mu2 = le.powf(g - 2.0) - weighted(&problem.nu, g - 2.0);
    let delta1 = 1.0 - weighted(&problem.sigma, g - 2.0);
    let delta2 = 1.0 - weighted(&problem.sigma, g - 3.0);
    let lambda = (g - 1.0) * delta1 * mu2 - (g - 2.0) * delta2 * mu1;
    if lambda.abs() <= LAMBDA_TOLERANCE {
        return Err(BvpError::DegenerateLambda { lambda, tol: LAMBDA_TOLERANCE });
    }
    Ok(BvpConstants { gamma: g, mu1, mu2, delta1, delta2, lambda })
}

/// Coefficients of the closed-form solution and the four bracket integrals
/// they were built from.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinearSolveDetail {
    pub c0: f64,
    pub c1: f64,
    /// I^alpha phi at 1+eps.
    pub i_alpha_at_eps: f64,
    /// sum_i nu_i I^alpha phi(zeta_i).
    pub i_alpha_weighted: f64,
    /// I^(alpha-1) phi at e.
    pub i_alpha1_at_e: f64,
    /// sum_i sigma_i I^(alpha-1) phi(zeta_i).
    pub i_alpha1_weighted: f64,
}

/// Shared core of the linear solve and the fixed-point operator: given the
/// forcing samples, build the solution formula.
fn solve_with_forcing(
    problem: &Problem,
    constants: &BvpConstants,
    forcing: &GridFunction,
) -> Result<(GridFunction, LinearSolveDetail, GridFunction), BvpError> {
    let grid = forcing.grid();
    let g = constants.gamma;
    let integral = hadamard_integral_grid(forcing, problem.alpha)?;

    let at = |order: f64, t: f64| fraccalc::hadamard_integral_of_grid_at(forcing, order, t);
    let i_alpha_at_eps = at(problem.alpha, 1.0 + problem.epsilon);
    let i_alpha_weighted: f64 = problem
        .nu
        .iter()
        .zip(&problem.zeta)
        .map(|(nu, z)| nu * at(problem.alpha, *z))
        .sum();
    let i_alpha1_at_e = at(problem.alpha - 1.0, std::f64::consts::E);
    let i_alpha1_weighted: f64 = problem
        .sigma
        .iter()
        .zip(&problem.zeta)
        .map(|(s, z)| s * at(problem.alpha - 1.0, *z))
        .sum();

    let a = i_alpha_at_eps - i_alpha_weighted;
    let b = i_alpha1_at_e - i_alpha1_weighted;
    let c0 = (-(g - 2.0) * constants.delta2 * a + constants.mu2 * b) / constants.lambda;
    let c1 = ((g - 1.0) * constants.delta1 * a - constants.mu1 * b) / constants.lambda;

    let mut values = vec![0.0; grid.node_count()];
    for (j, v) in values.iter_mut().enumerate().skip(1) {
        let u = grid.u(j);
        *v = -integral.value(j) + c0 * u.powf(g - 1.0) + c1 * u.powf(g - 2.0);
    }
    let singular = g < 2.0 && c1 != 0.0;
    values[0] = if singular {
        0.0
    } else if g == 2.0 {
        c1 // the (log t)^(gamma-2) mode is the constant 1 when gamma = 2
    } else {
        0.0
    };
    let mut x = GridFunction::from_raw(grid, values, false);
    x.set_singular_at_left(singular);

    let detail = LinearSolveDetail {
        c0,
        c1,
        i_alpha_at_eps,
        i_alpha_weighted,
        i_alpha1_at_e,
        i_alpha1_weighted,
    };
    Ok((x, detail, integral))
}

/// Closed-form solution of the linear problem D^{alpha,beta} x + phi = 0
/// under the two nonlocal boundary rows. The solution is reported at nodes
/// j >= 1; when gamma < 2 and c1 != 0 the (log t)^(gamma-2) mode is
/// unbounded at t -> 1+ and the result is flagged singular at the left.
pub fn linear_solution(
    problem: &Problem,
    phi: &GridFunction,
) -> Result<(GridFunction, LinearSolveDetail), BvpError> {
    let constants = compute_constants(problem)?;
    let (x, detail, _) = solve_with_forcing(problem, &constants, phi)?;
    Ok((x, detail))
}

/// Sample f(t_j, x_j) into a grid function. Node 0 is linearly extrapolated
/// when x is singular there or f itself is not evaluable at t = 1 (the
/// domain is the open-left interval).
pub(crate) fn sample_nonlinearity(
    problem: &Problem,
    x: &GridFunction,
) -> Result<GridFunction, BvpError> {
    let grid = x.grid();
    let mut values = vec![0.0; grid.node_count()];
    for j in 1..grid.node_count() {
        values[j] = problem.eval_f(grid.t(j), x.value(j))?;
    }
    values[0] = if x.singular_at_left() {
        2.0 * values[1] - values[2]
    } else {
        match problem.eval_f(grid.t(0), x.value(0)) {
            Ok(v) => v,
            Err(_) => 2.0 * values[1] - values[2],
        }
    };
    Ok(GridFunction::from_raw(grid, values, false))
}

/// Everything one application of rho produces; used by the solver's
/// residual verification.
pub(crate) struct RhoParts {
    pub out: GridFunction,
    pub detail: LinearSolveDetail,
    /// f(t_j, x_j) samples.
    pub forcing: GridFunction,
    /// I^alpha of the forcing at every node.
    pub integral: GridFunction,
}

pub(crate) fn rho_parts(problem: &Problem, x: &GridFunction) -> Result<RhoParts, BvpError> {
    let constants = compute_constants(problem)?;
    let forcing = sample_nonlinearity(problem, x)?;
    let (out, detail, integral) = solve_with_forcing(problem, &constants, &forcing)?;
    Ok(RhoParts { out, detail, forcing, integral })
}

/// One application of the fixed-point operator rho: the linear solution
/// formula with forcing f(., x(.)).
pub fn apply_rho(problem: &Problem, x: &GridFunction) -> Result<GridFunction, BvpError> {
    Ok(rho_parts(problem, x)?.out)
}

/// Residuals of the two boundary rows:
/// r1 = x(1+eps) - sum nu_i x(zeta_i),
/// r2 = (delta x)(e) - sum sigma_i (delta x)(zeta_i),
/// with off-node values by cubic interpolation in u.
pub fn boundary_residual(problem: &Problem, x: &GridFunction) -> (f64, f64) {
    let r1 = x.interp_at_u((1.0 + problem.epsilon).ln())
        - problem
            .nu
            .iter()
            .zip(&problem.zeta)
            .map(|(nu, z)| nu * x.interp_at_u(z.ln()))
            .sum::<f64>();
    let dx = delta_operator(x, 1);
    let n = x.grid().n();
    let r2 = dx.value(n)
        - problem
            .sigma
            .iter()
            .zip(&problem.zeta)
            .map(|(s, z)| s * dx.interp_at_u(z.ln()))
            .sum::<f64>();
    (r1, r2)
}
