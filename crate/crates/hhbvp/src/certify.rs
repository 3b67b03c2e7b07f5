//! Existence/uniqueness certification.
//!
//! Each checker computes the constants its fixed-point theorem needs and
//! decides whether the theorem's inequalities hold. Hypotheses that quantify
//! over a continuum (pointwise bounds on f) cannot be proven numerically;
//! those checkers sample a documented lattice and return a `heuristic`
//! verdict instead of `holds`. Constants the user supplies (the Lipschitz
//! constant C) are trusted and noted as such.

use crate::bvp::{compute_constants, BvpError, Problem};
use crate::expr::{self, Bindings, EvalError, ExprAst};
use crate::fraccalc::{self, gamma, FracError};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremTag {
    Banach,
    BoydWong,
    Krasnoselskii,
    LeraySchauder,
}

impl TheoremTag {
    pub const ALL: [TheoremTag; 4] = [
        TheoremTag::Banach,
        TheoremTag::BoydWong,
        TheoremTag::Krasnoselskii,
        TheoremTag::LeraySchauder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremTag::Banach => "banach",
            TheoremTag::BoydWong => "boyd_wong",
            TheoremTag::Krasnoselskii => "krasnoselskii",
            TheoremTag::LeraySchauder => "leray_schauder",
        }
    }
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TheoremTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "banach" => Ok(TheoremTag::Banach),
            "boyd_wong" | "boyd-wong" => Ok(TheoremTag::BoydWong),
            "krasnoselskii" => Ok(TheoremTag::Krasnoselskii),
            "leray_schauder" | "leray-schauder" => Ok(TheoremTag::LeraySchauder),
            other => Err(format!(
                "unknown theorem '{other}' (expected banach, boyd_wong, krasnoselskii, leray_schauder)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Every inequality of the theorem holds for the computed constants.
    Holds,
    /// The inequalities hold but at least one hypothesis was only sampled.
    Heuristic,
    Fails,
}

/// Outcome of one theorem check.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub theorem: TheoremTag,
    pub constants: BTreeMap<String, f64>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl Certificate {
    fn new(theorem: TheoremTag) -> Self {
        Certificate { theorem, constants: BTreeMap::new(), verdict: Verdict::Fails, notes: Vec::new() }
    }

    fn set(&mut self, key: &str, value: f64) -> &mut Self {
        self.constants.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("missing input: {0}")]
    MissingInput(&'static str),
    #[error(transparent)]
    Bvp(#[from] BvpError),
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error("evaluating {what}: {source}")]
    Eval { what: &'static str, source: EvalError },
}

/// Knobs shared by the checkers. The x/y sampling lattice is fixed at
/// {-10, -9.5, ..., 10}.
#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    /// Grid cells for sup norms and t-sampling.
    pub grid_n: usize,
    /// Cells of the point quadrature behind P*.
    pub resolution: usize,
    /// Upper end of the admissible-bound search range (0, l_max].
    pub l_max: f64,
    /// Absolute bisection tolerance of the admissible-bound search.
    pub l_tol: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { grid_n: 1024, resolution: 2048, l_max: 1e6, l_tol: 1e-9 }
    }
}

fn x_lattice() -> Vec<f64> {
    (0..=40).map(|i| -10.0 + 0.5 * i as f64).collect()
}

fn t_nodes(n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |j| (j as f64 / n as f64).exp())
}

fn eval_t(expr: &ExprAst, what: &'static str, t: f64) -> Result<f64, CertifyError> {
    expr::eval(expr, &Bindings::new().with_t(t))
        .map_err(|source| CertifyError::Eval { what, source })
}

/// Sup of |expr(t)| over the grid nodes (the sup norm of a continuous
/// function, up to grid resolution; every worked example attains it at
/// t = e, which is always a node).
fn grid_sup(expr: &ExprAst, what: &'static str, n: usize) -> Result<f64, CertifyError> {
    let mut sup: f64 = 0.0;
    for t in t_nodes(n) {
        sup = sup.max(eval_t(expr, what, t)?.abs());
    }
    Ok(sup)
}

/// The Phi formula given the boundary constants and the two weight
/// brackets. Monotone nondecreasing in both brackets: every weight enters
/// through its absolute value at fixed constants.
pub(crate) fn phi_formula(
    alpha: f64,
    c: &crate::bvp::BvpConstants,
    bracket1: f64,
    bracket2: f64,
) -> f64 {
    let mode_coef = ((c.gamma - 1.0).abs() * c.delta1.abs()
        + (c.gamma - 2.0).abs() * c.delta2.abs())
        / (c.lambda.abs() * gamma(alpha + 1.0));
    let tail_coef = (c.mu2.abs() + c.mu1.abs()) / (c.lambda.abs() * gamma(alpha));
    1.0 / gamma(alpha + 1.0) + mode_coef * bracket1 + tail_coef * bracket2
}

/// The closed-form operator bound
/// Phi = 1/Gamma(a+1)
///     + (|g-1||d1| + |g-2||d2|) / (|lambda| Gamma(a+1)) [(log(1+eps))^a + sum |nu_i| (log zeta_i)^a]
///     + (|mu2| + |mu1|) / (|lambda| Gamma(a)) [1 + sum |sigma_i| (log zeta_i)^(a-1)].
pub fn compute_phi(problem: &Problem) -> Result<f64, BvpError> {
    let c = compute_constants(problem)?;
    let a = problem.alpha;
    let le = (1.0 + problem.epsilon).ln();
    let bracket1: f64 = le.powf(a)
        + problem
            .nu
            .iter()
            .zip(&problem.zeta)
            .map(|(nu, z)| nu.abs() * z.ln().powf(a))
            .sum::<f64>();
    let bracket2: f64 = 1.0
        + problem
            .sigma
            .iter()
            .zip(&problem.zeta)
            .map(|(s, z)| s.abs() * z.ln().powf(a - 1.0))
            .sum::<f64>();
    Ok(phi_formula(a, &c, bracket1, bracket2))
}

/// The weighted analogue of Phi with every kernel power replaced by the
/// fractional integral of the weight w:
/// P* = I^a w(e)
///    + (|g-1||d1| + |g-2||d2|)/|lambda| [I^a w(1+eps) + sum |nu_i| I^a w(zeta_i)]
///    + (|mu2| + |mu1|)/|lambda| [I^(a-1) w(e) + sum |sigma_i| I^(a-1) w(zeta_i)],
///
/// each integral by point quadrature at the configured resolution.
pub fn compute_pstar(
    problem: &Problem,
    w: &ExprAst,
    opts: &CertifyOptions,
) -> Result<f64, CertifyError> {
    let c = compute_constants(problem)?;
    let a = problem.alpha;
    let integral = |order: f64, t: f64| -> Result<f64, CertifyError> {
        fraccalc::hadamard_integral(
            |tau| expr::eval(w, &Bindings::new().with_t(tau)),
            order,
            t,
            opts.resolution,
        )
        .map_err(CertifyError::from)
    };
    let e = std::f64::consts::E;
    let head = integral(a, e)?;
    let mut bracket1 = integral(a, 1.0 + problem.epsilon)?;
    for (nu, z) in problem.nu.iter().zip(&problem.zeta) {
        bracket1 += nu.abs() * integral(a, *z)?;
    }
    let mut bracket2 = integral(a - 1.0, e)?;
    for (s, z) in problem.sigma.iter().zip(&problem.zeta) {
        bracket2 += s.abs() * integral(a - 1.0, *z)?;
    }
    let mode_coef =
        ((c.gamma - 1.0).abs() * c.delta1.abs() + (c.gamma - 2.0).abs() * c.delta2.abs())
            / c.lambda.abs();
    let tail_coef = (c.mu2.abs() + c.mu1.abs()) / c.lambda.abs();
    Ok(head + mode_coef * bracket1 + tail_coef * bracket2)
}

/// Banach contraction check: holds iff C Phi < 1. Also reports
/// P = sup |f(t, 0)| and the minimal invariant-ball radius
/// r = Phi P / (1 - C Phi).
pub fn certify_banach(
    problem: &Problem,
    opts: &CertifyOptions,
) -> Result<Certificate, CertifyError> {
    let c = problem.lipschitz.ok_or(CertifyError::MissingInput("C"))?;
    let phi = compute_phi(problem)?;
    let mut sup_f0: f64 = 0.0;
    for t in t_nodes(opts.grid_n) {
        sup_f0 = sup_f0.max(problem.eval_f(t, 0.0)?.abs());
    }
    let c_phi = c * phi;
    let mut cert = Certificate::new(TheoremTag::Banach);
    cert.set("phi", phi).set("c", c).set("c_phi", c_phi).set("p", sup_f0);
    cert.notes.push("Lipschitz constant C is user-supplied, not verified".into());
    if c_phi < 1.0 {
        cert.set("r", phi * sup_f0 / (1.0 - c_phi));
        cert.verdict = Verdict::Holds;
    } else {
        cert.verdict = Verdict::Fails;
        cert.notes.push(format!("contraction condition fails: C*Phi = {c_phi} >= 1"));
    }
    Ok(cert)
}

/// Boyd-Wong nonlinear-contraction check: samples the hypothesis
/// |f(t,x) - f(t,y)| <= w(t) |x-y| / (P* + |x-y|) on the t-grid times the
/// x/y lattice. The hypothesis is stated for x, y >= 0; the verdict uses
/// that domain and the all-reals sweep is reported separately.
pub fn certify_boyd_wong(
    problem: &Problem,
    opts: &CertifyOptions,
) -> Result<Certificate, CertifyError> {
    let w = problem.weight.as_ref().ok_or(CertifyError::MissingInput("weight"))?;
    let pstar = compute_pstar(problem, w, opts)?;
    let mut cert = Certificate::new(TheoremTag::BoydWong);
    cert.set("p_star", pstar).set("phi", compute_phi(problem)?);

    let lattice = x_lattice();
    let mut violation_nonneg: Option<(f64, f64, f64)> = None;
    let mut violation_any: Option<(f64, f64, f64)> = None;
    for t in t_nodes(opts.grid_n) {
        let wt = eval_t(w, "weight", t)?;
        let fx: Vec<f64> = lattice
            .iter()
            .map(|x| problem.eval_f(t, *x))
            .collect::<Result<_, _>>()?;
        for i in 0..lattice.len() {
            for j in (i + 1)..lattice.len() {
                let d = (lattice[i] - lattice[j]).abs();
                let lhs = (fx[i] - fx[j]).abs();
                let rhs = wt * d / (pstar + d);
                if lhs > rhs + 1e-12 * rhs.abs().max(1.0) {
                    let witness = (t, lattice[i], lattice[j]);
                    if violation_any.is_none() {
                        violation_any = Some(witness);
                    }
                    if lattice[i] >= 0.0 && lattice[j] >= 0.0 && violation_nonneg.is_none() {
                        violation_nonneg = Some(witness);
                    }
                }
            }
        }
    }
    match violation_nonneg {
        None => {
            cert.verdict = Verdict::Heuristic;
            cert.notes.push(
                "hypothesis sampled on the t-grid and x,y in {-10..10 step 0.5}; not a proof"
                    .into(),
            );
        }
        Some((t, x, y)) => {
            cert.verdict = Verdict::Fails;
            cert.notes.push(format!("violation witness at t = {t}, x = {x}, y = {y}"));
        }
    }
    match violation_any {
        None => cert.notes.push("no violation over all-reals x, y either".into()),
        Some((t, x, y)) if violation_nonneg.is_none() => cert
            .notes
            .push(format!("all-reals sweep found a violation at t = {t}, x = {x}, y = {y} (outside the stated x, y >= 0 domain)")),
        _ => {}
    }
    Ok(cert)
}

/// Krasnoselskii splitting check: condition C/Gamma(alpha+1) < 1 plus the
/// sampled bound |f(t,x)| <= g(t); reports ||g|| and the ball radius
/// r_hat = ||g|| Phi.
pub fn certify_krasnoselskii(
    problem: &Problem,
    opts: &CertifyOptions,
) -> Result<Certificate, CertifyError> {
    let c = problem.lipschitz.ok_or(CertifyError::MissingInput("C"))?;
    let g = problem.bound.as_ref().ok_or(CertifyError::MissingInput("g"))?;
    let phi = compute_phi(problem)?;
    let g_norm = grid_sup(g, "g", opts.grid_n)?;
    let condition = c / gamma(problem.alpha + 1.0);
    let mut cert = Certificate::new(TheoremTag::Krasnoselskii);
    cert.set("phi", phi)
        .set("c", c)
        .set("c_over_gamma", condition)
        .set("g_norm", g_norm)
        .set("r_hat", g_norm * phi);
    cert.notes.push("Lipschitz constant C is user-supplied, not verified".into());
    cert.notes.push("||g|| is the grid maximum".into());

    let mut witness = None;
    'outer: for t in t_nodes(opts.grid_n) {
        let bound = eval_t(g, "g", t)?;
        for x in x_lattice() {
            let fv = problem.eval_f(t, x)?.abs();
            if fv > bound + 1e-12 * bound.abs().max(1.0) {
                witness = Some((t, x));
                break 'outer;
            }
        }
    }
    if condition >= 1.0 {
        cert.verdict = Verdict::Fails;
        cert.notes.push(format!("condition fails: C/Gamma(alpha+1) = {condition} >= 1"));
    } else if let Some((t, x)) = witness {
        cert.verdict = Verdict::Fails;
        cert.notes.push(format!("|f| <= g violated at t = {t}, x = {x}"));
    } else {
        cert.verdict = Verdict::Heuristic;
        cert.notes.push("bound |f(t,x)| <= g(t) sampled, not proven".into());
    }
    Ok(cert)
}

/// Leray-Schauder growth check: finds the minimal L* such that
/// L > ||q|| vartheta(L) Phi for every L > L*, by lattice bracketing plus
/// bisection of h(L) = L - ||q|| vartheta(L) Phi over (0, l_max].
pub fn certify_leray_schauder(
    problem: &Problem,
    opts: &CertifyOptions,
) -> Result<Certificate, CertifyError> {
    let q = problem.growth.as_ref().ok_or(CertifyError::MissingInput("q"))?;
    let vt = problem.vartheta.as_ref().ok_or(CertifyError::MissingInput("vartheta"))?;
    let phi = compute_phi(problem)?;
    let q_norm = grid_sup(q, "q", opts.grid_n)?;
    let theta = |l: f64| -> Result<f64, CertifyError> {
        expr::eval(vt, &Bindings::new().with_u(l))
            .map_err(|source| CertifyError::Eval { what: "vartheta", source })
    };
    let mut cert = Certificate::new(TheoremTag::LeraySchauder);
    cert.set("phi", phi).set("q_norm", q_norm);
    cert.notes
        .push("||q|| is the grid maximum; vartheta monotonicity checked by sampling".into());

    // log-spaced lattice over (0, l_max], plus 0 for the monotonicity scan
    let points = 600usize;
    let lo = opts.l_tol.max(1e-12);
    let ratio = (opts.l_max / lo).powf(1.0 / (points - 1) as f64);
    let lattice: Vec<f64> =
        (0..points).map(|k| lo * ratio.powi(k as i32)).collect();

    let mut prev = theta(0.0)?;
    for &l in &lattice {
        let cur = theta(l)?;
        if cur < prev - 1e-9 * prev.abs().max(1.0) {
            cert.verdict = Verdict::Fails;
            cert.notes.push(format!("vartheta is not nondecreasing near u = {l}"));
            return Ok(cert);
        }
        prev = cur;
    }

    let h = |l: f64| -> Result<f64, CertifyError> { Ok(l - q_norm * theta(l)? * phi) };
    let mut last_nonpositive: Option<usize> = None;
    let mut h_vals = Vec::with_capacity(points);
    for (k, &l) in lattice.iter().enumerate() {
        let v = h(l)?;
        if v <= 0.0 {
            last_nonpositive = Some(k);
        }
        h_vals.push(v);
    }
    match last_nonpositive {
        None => {
            // h positive across the whole range: every L > 0 is admissible
            cert.set("l_star", 0.0);
            cert.verdict = Verdict::Holds;
        }
        Some(k) if k + 1 == points => {
            cert.verdict = Verdict::Fails;
            cert.notes.push(format!(
                "no admissible bound: L - ||q|| vartheta(L) Phi <= 0 up to l_max = {}",
                opts.l_max
            ));
        }
        Some(k) => {
            let (mut lo, mut hi) = (lattice[k], lattice[k + 1]);
            while hi - lo > opts.l_tol {
                let mid = 0.5 * (lo + hi);
                if h(mid)? <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cert.set("l_star", 0.5 * (lo + hi));
            cert.verdict = Verdict::Holds;
        }
    }
    Ok(cert)
}

/// Numerical stand-in for a missing Lipschitz constant: the max difference
/// quotient |f(t,x) - f(t,y)| / |x - y| over the t-grid and x/y lattice.
/// A heuristic lower bound of the true constant, never an upper bound.
pub fn estimate_lipschitz(problem: &Problem, opts: &CertifyOptions) -> Result<f64, CertifyError> {
    let lattice = x_lattice();
    let mut worst: f64 = 0.0;
    for t in t_nodes(opts.grid_n) {
        let fx: Vec<f64> = lattice
            .iter()
            .map(|x| problem.eval_f(t, *x))
            .collect::<Result<_, _>>()?;
        for i in 0..lattice.len() {
            for j in (i + 1)..lattice.len() {
                let d = (lattice[i] - lattice[j]).abs();
                worst = worst.max((fx[i] - fx[j]).abs() / d);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvp::Problem;
    use crate::expr::parse;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};

    fn ex41() -> Problem {
        Problem::new(
            1.5,
            0.5,
            0.3,
            vec![1.5, 1.75],
            vec![0.5, -0.75],
            vec![2.0 / 3.0, 4.0 / 3.0],
            parse("(sqrt(t) + 2*log(t)) / (2*exp(t)*(3+t)^2) * (abs(x) / (2 + abs(x)))").unwrap(),
        )
        .unwrap()
        .with_lipschitz(3.0 / (64.0 * std::f64::consts::E))
        .unwrap()
    }

    fn ex42() -> Problem {
        Problem::new(
            1.5,
            2.0 / 3.0,
            0.5,
            vec![4.0 / 3.0, 2.0, 9.0 / 7.0],
            vec![2.0, -0.5, 5.0 / 3.0],
            vec![-1.0, 3.0, -11.0 / 3.0],
            parse("(1 + log(t)) / (t+1)^2 * ((abs(x) + 1) / (3 + abs(x)))").unwrap(),
        )
        .unwrap()
        .with_growth(parse("1 + log(t)").unwrap())
        .unwrap()
        .with_vartheta(parse("(u + 1)/12").unwrap())
        .unwrap()
    }

    #[test]
    fn phi_for_both_worked_problems() {
        // exact-input reference values (40-digit arithmetic); the published
        // prints carry their own rounding (see the acceptance suite)
        let phi1 = compute_phi(&ex41()).unwrap();
        assert_relative_eq!(phi1, 3.835_194_111_527_762_3, max_relative = 1e-12);
        assert_abs_diff_eq!(phi1, 3.835201, epsilon = 1e-4);

        let phi2 = compute_phi(&ex42()).unwrap();
        assert_relative_eq!(phi2, 3.414_444_025_608_596_9, max_relative = 1e-12);
        assert_abs_diff_eq!(phi2, 3.414437455, epsilon = 1e-5);
    }

    #[test]
    fn phi_trivial_problem_closed_form() {
        // alpha = 2, zero weights: Phi = 1/2 + (log 1.3)^2/2 + 1 + log 1.3
        let p = Problem::new(2.0, 0.7, 0.3, vec![1.5], vec![0.0], vec![0.0], parse("0").unwrap())
            .unwrap();
        let phi = compute_phi(&p).unwrap();
        assert_relative_eq!(phi, 1.796_781_768_102_274_8, max_relative = 1e-12);
    }

    #[test]
    fn banach_certificate_first_worked_problem() {
        let cert = certify_banach(&ex41(), &CertifyOptions::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Holds);
        let c_phi = cert.constants["c_phi"];
        assert_relative_eq!(c_phi, 0.066_135_424_993_726_848, max_relative = 1e-12);
        // published value, printed from rounded intermediates
        assert_abs_diff_eq!(c_phi, 0.06613554378, epsilon = 1e-6);
        // f(t, 0) = 0 for this nonlinearity, so the ball radius collapses
        assert_eq!(cert.constants["p"], 0.0);
        assert_eq!(cert.constants["r"], 0.0);
    }

    #[test]
    fn banach_zero_lipschitz_holds() {
        let mut p = ex41();
        p.f = parse("1 + log(t)").unwrap();
        let p = p.with_lipschitz(0.0).unwrap();
        let cert = certify_banach(&p, &CertifyOptions::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Holds);
        assert_eq!(cert.constants["c_phi"], 0.0);
        let phi = cert.constants["phi"];
        assert_relative_eq!(cert.constants["r"], phi * cert.constants["p"], max_relative = 1e-14);
    }

    #[test]
    fn banach_verdict_flips_at_the_boundary() {
        let phi = compute_phi(&ex41()).unwrap();
        for (c, want) in [
            ((1.0 - 1e-6) / phi, Verdict::Holds),
            ((1.0 + 1e-6) / phi, Verdict::Fails),
            (1.0 / phi + 0.01, Verdict::Fails),
        ] {
            let p = ex41().with_lipschitz(c).unwrap();
            let cert = certify_banach(&p, &CertifyOptions::default()).unwrap();
            assert_eq!(cert.verdict, want, "C = {c}");
        }
    }

    #[test]
    fn banach_requires_lipschitz_input() {
        let mut p = ex41();
        p.lipschitz = None;
        assert!(matches!(
            certify_banach(&p, &CertifyOptions::default()),
            Err(CertifyError::MissingInput("C"))
        ));
    }

    #[test]
    fn pstar_of_zero_weight_vanishes() {
        let p = ex41();
        let w = parse("0").unwrap();
        let v = compute_pstar(&p, &w, &CertifyOptions::default()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn pstar_of_unit_weight_reproduces_phi() {
        // cross-module oracle: every kernel integral of 1 is exactly the
        // corresponding Phi term
        let opts = CertifyOptions::default();
        for p in [ex41(), ex42()] {
            let w = parse("1").unwrap();
            let pstar = compute_pstar(&p, &w, &opts).unwrap();
            let phi = compute_phi(&p).unwrap();
            assert_relative_eq!(pstar, phi, max_relative = 1e-12);
        }
    }

    #[test]
    fn pstar_log_weight_matches_reference() {
        // w = log t has the closed form I^a w = Gamma(2)/Gamma(2+a) u^(1+a);
        // frozen reference computed from it with 40-digit arithmetic
        let p = ex41();
        let w = parse("log(t)").unwrap();
        let v = compute_pstar(&p, &w, &CertifyOptions::default()).unwrap();
        assert_relative_eq!(v, 1.657_123_268_171_422_3, max_relative = 1e-9);
        // and against a much finer quadrature of the same integrals
        let fine =
            compute_pstar(&p, &w, &CertifyOptions { resolution: 1 << 20, ..Default::default() })
                .unwrap();
        assert_relative_eq!(v, fine, max_relative = 1e-9);
    }

    #[test]
    fn boyd_wong_zero_nonlinearity_holds() {
        let mut p = ex41();
        p.f = parse("0").unwrap();
        let p = p.with_weight(parse("1").unwrap()).unwrap();
        let opts = CertifyOptions { grid_n: 128, ..Default::default() };
        let cert = certify_boyd_wong(&p, &opts).unwrap();
        assert_eq!(cert.verdict, Verdict::Heuristic);
        assert_relative_eq!(
            cert.constants["p_star"],
            compute_phi(&p).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn boyd_wong_linear_growth_fails_with_witness() {
        let mut p = ex41();
        p.f = parse("x").unwrap();
        let p = p.with_weight(parse("0.001").unwrap()).unwrap();
        let opts = CertifyOptions { grid_n: 64, ..Default::default() };
        let cert = certify_boyd_wong(&p, &opts).unwrap();
        assert_eq!(cert.verdict, Verdict::Fails);
        assert!(cert.notes.iter().any(|n| n.contains("witness")));
    }

    #[test]
    fn krasnoselskii_first_worked_problem() {
        let p = ex41()
            .with_bound(parse("(sqrt(t) + 2*log(t)) / (2*exp(t)*(3+t)^2)").unwrap())
            .unwrap();
        let opts = CertifyOptions { grid_n: 256, ..Default::default() };
        let cert = certify_krasnoselskii(&p, &opts).unwrap();
        assert_eq!(cert.verdict, Verdict::Heuristic);
        // C / Gamma(2.5) with C = 3/(64 e)
        assert_relative_eq!(
            cert.constants["c_over_gamma"],
            0.012_972_109_294_393_584,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cert.constants["r_hat"],
            cert.constants["g_norm"] * cert.constants["phi"],
            max_relative = 1e-14
        );
    }

    #[test]
    fn krasnoselskii_failure_modes() {
        // condition violated
        let p = ex41().with_bound(parse("1").unwrap()).unwrap();
        let p = p.with_lipschitz(2.0 * gamma(2.5)).unwrap();
        let opts = CertifyOptions { grid_n: 64, ..Default::default() };
        let cert = certify_krasnoselskii(&p, &opts).unwrap();
        assert_eq!(cert.verdict, Verdict::Fails);

        // bound violated
        let mut p = ex41();
        p.f = parse("1 + abs(x)").unwrap();
        let p = p.with_bound(parse("0.5").unwrap()).unwrap();
        let cert = certify_krasnoselskii(&p, &opts).unwrap();
        assert_eq!(cert.verdict, Verdict::Fails);
        assert!(cert.notes.iter().any(|n| n.contains("violated")));

        // zero everything holds with r_hat = 0
        let mut p = ex41();
        p.f = parse("0").unwrap();
        let p = p.with_lipschitz(0.0).unwrap().with_bound(parse("0").unwrap()).unwrap();
        let cert = certify_krasnoselskii(&p, &opts).unwrap();
        assert_eq!(cert.verdict, Verdict::Heuristic);
        assert_eq!(cert.constants["r_hat"], 0.0);
    }

    #[test]
    fn leray_schauder_second_worked_problem() {
        let cert = certify_leray_schauder(&ex42(), &CertifyOptions::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Holds);
        assert_relative_eq!(cert.constants["q_norm"], 2.0, max_relative = 1e-12);
        // L* = Phi / (6 - Phi) with the exact-input Phi
        let l = cert.constants["l_star"];
        assert_abs_diff_eq!(l, 1.320_584_067_576_529_7, epsilon = 1e-6);

        // bisection correctness: h changes sign across L*
        let phi = cert.constants["phi"];
        let h = |l: f64| l - 2.0 * ((l + 1.0) / 12.0) * phi;
        assert!(h(l - 1e-6) <= 0.0);
        assert!(h(l + 1e-6) >= 0.0);
    }

    #[test]
    fn leray_schauder_degenerate_cases() {
        // vartheta = 0: every L > 0 is admissible
        let mut p = ex42();
        p.vartheta = Some(parse("0").unwrap());
        let cert = certify_leray_schauder(&p, &CertifyOptions::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Holds);
        assert_eq!(cert.constants["l_star"], 0.0);

        // linear vartheta with ||q|| Phi >= 1: h(L) < 0 everywhere
        let mut p = ex42();
        p.growth = Some(parse("1").unwrap());
        p.vartheta = Some(parse("u").unwrap());
        let cert = certify_leray_schauder(&p, &CertifyOptions::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Fails);
        assert!(cert.notes.iter().any(|n| n.contains("no admissible bound")));

        // decreasing vartheta is rejected by the monotonicity scan
        let mut p = ex42();
        p.vartheta = Some(parse("1/(1+u)").unwrap());
        let cert = certify_leray_schauder(&p, &CertifyOptions::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Fails);
        assert!(cert.notes.iter().any(|n| n.contains("nondecreasing")));
    }

    #[test]
    fn lipschitz_estimation() {
        let opts = CertifyOptions { grid_n: 64, ..Default::default() };
        let mut p = ex41();
        p.f = parse("x/2").unwrap();
        assert_relative_eq!(estimate_lipschitz(&p, &opts).unwrap(), 0.5, max_relative = 1e-12);

        p.f = parse("3").unwrap();
        assert_eq!(estimate_lipschitz(&p, &opts).unwrap(), 0.0);

        // the sampled quotient never exceeds the published constant
        let p = ex41();
        let est = estimate_lipschitz(&p, &CertifyOptions::default()).unwrap();
        assert!(est <= 3.0 / (64.0 * std::f64::consts::E) + 1e-6, "estimate {est}");
    }

    #[test]
    fn phi_formula_is_monotone_in_weight_magnitudes() {
        // Every nu_i and sigma_i enters the Phi formula through its absolute
        // value, so at fixed boundary constants enlarging any |nu_i| or
        // |sigma_i| never decreases Phi. (The constants themselves depend on
        // the signed weights, so the full map weight -> Phi is not monotone;
        // the formula is.)
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut tested = 0;
        while tested < 20 {
            let m = rng.gen_range(1..=3usize);
            let zeta: Vec<f64> = (0..m).map(|_| rng.gen_range(1.05..2.6)).collect();
            let nu: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let sigma: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let p = Problem::new(
                rng.gen_range(1.1..2.0),
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.1..0.9),
                zeta,
                nu,
                sigma,
                parse("0").unwrap(),
            )
            .unwrap();
            let Ok(c) = crate::bvp::compute_constants(&p) else { continue };
            let a = p.alpha;
            let brackets = |nu: &[f64], sigma: &[f64]| {
                let b1: f64 = (1.0 + p.epsilon).ln().powf(a)
                    + nu.iter().zip(&p.zeta).map(|(v, z)| v.abs() * z.ln().powf(a)).sum::<f64>();
                let b2: f64 = 1.0
                    + sigma
                        .iter()
                        .zip(&p.zeta)
                        .map(|(v, z)| v.abs() * z.ln().powf(a - 1.0))
                        .sum::<f64>();
                (b1, b2)
            };
            let (b1, b2) = brackets(&p.nu, &p.sigma);
            let base = phi_formula(a, &c, b1, b2);
            assert_relative_eq!(base, compute_phi(&p).unwrap(), max_relative = 1e-14);

            let k = rng.gen_range(0..m);
            let scale = rng.gen_range(1.0..3.0f64);
            let mut nu_big = p.nu.clone();
            nu_big[k] *= scale;
            let mut sigma_big = p.sigma.clone();
            sigma_big[k] *= scale;
            let (b1n, b2n) = brackets(&nu_big, &p.sigma);
            let (b1s, b2s) = brackets(&p.nu, &sigma_big);
            assert!(phi_formula(a, &c, b1n, b2n) >= base - 1e-14 * base.abs());
            assert!(phi_formula(a, &c, b1s, b2s) >= base - 1e-14 * base.abs());
            tested += 1;
        }
    }
}
