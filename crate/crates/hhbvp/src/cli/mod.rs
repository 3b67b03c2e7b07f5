//! Command-line entry points: `constants`, `certify`, `solve`, `selftest`.
//!
//! Exit codes: 0 success, 1 validation error (bad file, bad problem data,
//! missing certification inputs, degenerate lambda), 2 at least one
//! requested certificate fails, 3 solver non-convergence or divergence.

pub mod problem_file;
pub mod report;

pub use problem_file::{parse_problem_file, FileError, ProblemFile};
pub use report::{CheckResult, ConstantsSection, InputEcho, Report, SolutionSection};

use crate::bvp::{self, BvpError, Problem};
use crate::certify::{self, CertifyError, CertifyOptions, TheoremTag, Verdict};
use crate::expr;
use crate::fraccalc::{
    self, caputo_hadamard_derivative, delta_operator, gamma, hadamard_derivative,
    hadamard_integral, hadamard_integral_grid, hilfer_hadamard_derivative, FracOrder, Grid,
    GridFunction,
};
use crate::solver::{self, SolverError};
use report::num;
use std::io::Write as _;
use std::path::Path;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CERTIFICATION_FAILED: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

pub const DEFAULT_GRID_N: usize = 1024;
pub const DEFAULT_RESOLUTION: usize = 2048;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: FileError,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Bvp(#[from] BvpError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Frac(#[from] fraccalc::FracError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(SolverError::Diverged { .. }) => EXIT_NO_CONVERGENCE,
            _ => EXIT_VALIDATION,
        }
    }
}

/// Settings resolved from flags, file keys, the HHBVP_DEFAULT_N variable
/// and built-in defaults, in that order of precedence (the env variable
/// only backs the grid size).
#[derive(Debug, Clone, Copy, Default)]
pub struct RunSettings {
    pub grid_n: Option<usize>,
    pub resolution: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Effective {
    grid_n: usize,
    resolution: usize,
    tol: f64,
    max_iter: usize,
}

fn env_default_grid_n() -> Option<usize> {
    let raw = std::env::var("HHBVP_DEFAULT_N").ok()?;
    match raw.parse::<usize>() {
        Ok(v) if v >= 1 => Some(v),
        _ => {
            eprintln!("warning: ignoring invalid HHBVP_DEFAULT_N='{raw}'");
            None
        }
    }
}

fn effective(pf: &ProblemFile, settings: &RunSettings) -> Effective {
    Effective {
        grid_n: settings
            .grid_n
            .or(pf.grid_n)
            .or_else(env_default_grid_n)
            .unwrap_or(DEFAULT_GRID_N),
        resolution: settings.resolution.or(pf.resolution).unwrap_or(DEFAULT_RESOLUTION),
        tol: settings.tol.or(pf.tol).unwrap_or(DEFAULT_TOL),
        max_iter: settings.max_iter.or(pf.max_iter).unwrap_or(DEFAULT_MAX_ITER),
    }
}

fn load(path: &Path) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_problem_file(&text).map_err(|source| CliError::File {
        path: path.display().to_string(),
        source,
    })
}

fn echo(problem: &Problem, eff: &Effective) -> InputEcho {
    InputEcho {
        alpha: problem.alpha,
        beta: problem.beta,
        epsilon: problem.epsilon,
        zeta: problem.zeta.clone(),
        nu: problem.nu.clone(),
        sigma: problem.sigma.clone(),
        f: problem.f.to_string(),
        c: problem.lipschitz,
        g: problem.bound.as_ref().map(|e| e.to_string()),
        q: problem.growth.as_ref().map(|e| e.to_string()),
        vartheta: problem.vartheta.as_ref().map(|e| e.to_string()),
        weight: problem.weight.as_ref().map(|e| e.to_string()),
        grid_n: eff.grid_n,
        resolution: eff.resolution,
        tol: eff.tol,
        max_iter: eff.max_iter,
    }
}

fn constants_section(problem: &Problem) -> Result<ConstantsSection, BvpError> {
    let constants = bvp::compute_constants(problem)?;
    let phi = certify::compute_phi(problem)?;
    Ok(ConstantsSection { constants, phi })
}

/// Exit code implied by a finished report.
pub fn exit_code_for(report: &Report) -> i32 {
    if report.certificates.iter().any(|c| c.verdict == Verdict::Fails) {
        return EXIT_CERTIFICATION_FAILED;
    }
    if let Some(sol) = &report.solution {
        if !sol.converged {
            return EXIT_NO_CONVERGENCE;
        }
    }
    if report.selftest.iter().any(|c| !c.passed) {
        return EXIT_VALIDATION;
    }
    EXIT_OK
}

/// `constants`: boundary constants plus the operator bound Phi.
pub fn cmd_constants(path: &Path, settings: &RunSettings) -> Result<Report, CliError> {
    let pf = load(path)?;
    let eff = effective(&pf, settings);
    let mut report = Report::new("constants");
    report.inputs = Some(echo(&pf.problem, &eff));
    report.constants = Some(constants_section(&pf.problem)?);
    Ok(report)
}

fn inputs_present(problem: &Problem, tag: TheoremTag) -> bool {
    match tag {
        TheoremTag::Banach => problem.lipschitz.is_some(),
        TheoremTag::BoydWong => problem.weight.is_some(),
        TheoremTag::Krasnoselskii => problem.lipschitz.is_some() && problem.bound.is_some(),
        TheoremTag::LeraySchauder => problem.growth.is_some() && problem.vartheta.is_some(),
    }
}

/// `certify`: run the selected checkers (default: every checker whose
/// inputs are present). `l_max`/`l_tol` override the admissible-bound
/// search range and bisection tolerance.
pub fn cmd_certify(
    path: &Path,
    settings: &RunSettings,
    theorems: Option<&[TheoremTag]>,
    l_max: Option<f64>,
    l_tol: Option<f64>,
) -> Result<Report, CliError> {
    let pf = load(path)?;
    let eff = effective(&pf, settings);
    let defaults = CertifyOptions::default();
    let opts = CertifyOptions {
        grid_n: eff.grid_n,
        resolution: eff.resolution,
        l_max: l_max.unwrap_or(defaults.l_max),
        l_tol: l_tol.unwrap_or(defaults.l_tol),
    };
    let mut report = Report::new("certify");
    report.inputs = Some(echo(&pf.problem, &eff));
    report.constants = Some(constants_section(&pf.problem)?);

    let selected: Vec<TheoremTag> = match theorems {
        Some(tags) => tags.to_vec(),
        None => TheoremTag::ALL
            .into_iter()
            .filter(|t| inputs_present(&pf.problem, *t))
            .collect(),
    };
    if selected.is_empty() {
        report
            .warnings
            .push("no certification inputs present (C, g, q, vartheta, weight)".into());
    }
    for tag in selected {
        let cert = match tag {
            TheoremTag::Banach => certify::certify_banach(&pf.problem, &opts)?,
            TheoremTag::BoydWong => certify::certify_boyd_wong(&pf.problem, &opts)?,
            TheoremTag::Krasnoselskii => certify::certify_krasnoselskii(&pf.problem, &opts)?,
            TheoremTag::LeraySchauder => certify::certify_leray_schauder(&pf.problem, &opts)?,
        };
        report.certificates.push(cert);
    }
    match certify::estimate_lipschitz(&pf.problem, &opts) {
        Ok(est) => report.lipschitz_estimate = Some(est),
        Err(e) => report.warnings.push(format!("lipschitz estimate unavailable: {e}")),
    }
    Ok(report)
}

/// `solve`: Picard iteration from x0 = 0, then residual verification.
/// Returns the report and the final iterate (for CSV output).
pub fn cmd_solve(
    path: &Path,
    settings: &RunSettings,
) -> Result<(Report, GridFunction), CliError> {
    let pf = load(path)?;
    let eff = effective(&pf, settings);
    let mut report = Report::new("solve");
    report.inputs = Some(echo(&pf.problem, &eff));
    report.constants = Some(constants_section(&pf.problem)?);

    let grid = Grid::new(eff.grid_n)?;
    let x0 = GridFunction::zeros(grid);
    let sol = solver::picard_solve(&pf.problem, x0, eff.tol, eff.max_iter)?;

    let parts = bvp::rho_parts(&pf.problem, &sol.x)?;
    let max_ratio = sol
        .ratios
        .iter()
        .copied()
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |v| v.max(r))));
    report.solution = Some(SolutionSection {
        converged: sol.converged,
        iterations: sol.iterations,
        final_step_norm: sol.step_norms.last().copied().unwrap_or(0.0),
        sup_norm: sol.x.sup_norm(),
        c0: parts.detail.c0,
        c1: parts.detail.c1,
        contraction_bound: sol.contraction_bound,
        max_ratio,
        ratios_within_bound: sol.ratios_within_bound,
    });

    // iteration is allowed without a contraction certificate, but say so
    match sol.contraction_bound {
        Some(b) if b < 1.0 => {}
        Some(b) => report
            .warnings
            .push(format!("uncertified run: C*Phi = {b} >= 1, convergence not guaranteed")),
        None => report
            .warnings
            .push("uncertified run: no Lipschitz constant C, convergence not guaranteed".into()),
    }

    match solver::verify_solution(&pf.problem, &sol.x) {
        Ok(res) => report.residuals = Some(res),
        Err(SolverError::GridTooCoarse { n, need }) => report.warnings.push(format!(
            "residual verification skipped: grid has {n} cells, needs {need}"
        )),
        Err(e) => return Err(e.into()),
    }
    Ok((report, sol.x))
}

/// Write the solution table: header `t,u,x`, one row per node j >= 1,
/// full-precision scientific notation.
pub fn write_csv(x: &GridFunction, path: &Path) -> Result<(), CliError> {
    let wrap = |source: std::io::Error| CliError::Write {
        path: path.display().to_string(),
        source,
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(wrap)?);
    let grid = x.grid();
    (|| -> std::io::Result<()> {
        writeln!(out, "t,u,x")?;
        for j in 1..=grid.n() {
            writeln!(out, "{},{},{}", num(grid.t(j)), num(grid.u(j)), num(x.value(j)))?;
        }
        out.flush()
    })()
    .map_err(wrap)
}

// ---------------------------------------------------------------------
// selftest

struct SelfTest {
    checks: Vec<CheckResult>,
    /// Fault-injection hook: every computed value is scaled by (1 + p)
    /// before comparison, verifying that the suite discriminates.
    perturb: f64,
}

impl SelfTest {
    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckResult { name: name.to_string(), passed, detail });
    }

    fn rel(&mut self, name: &str, computed: f64, want: f64, tol: f64) {
        let v = computed * (1.0 + self.perturb);
        let err = ((v - want) / want).abs();
        self.push(
            name,
            err <= tol,
            format!("value {}, want {}, rel err {err:.3e}, tol {tol:.1e}", num(v), num(want)),
        );
    }

    fn abs(&mut self, name: &str, computed: f64, want: f64, tol: f64) {
        let v = computed * (1.0 + self.perturb);
        let err = (v - want).abs();
        self.push(
            name,
            err <= tol,
            format!("value {}, want {}, abs err {err:.3e}, tol {tol:.1e}", num(v), num(want)),
        );
    }

    fn below(&mut self, name: &str, computed: f64, bound: f64) {
        let v = computed * (1.0 + self.perturb);
        self.push(name, v <= bound, format!("value {v:.3e}, bound {bound:.1e}"));
    }

    fn at_least(&mut self, name: &str, computed: f64, bound: f64) {
        let v = computed * (1.0 + self.perturb);
        self.push(name, v >= bound, format!("value {v:.3}, bound {bound:.3}"));
    }
}

fn embedded_problem(text: &str) -> Problem {
    parse_problem_file(text).expect("embedded problem file").problem
}

/// `selftest`: run the operator identity suite and the golden-value checks
/// for the two embedded worked problems.
pub fn cmd_selftest(quick: bool, perturb_gamma: f64) -> Report {
    let mut st = SelfTest { checks: Vec::new(), perturb: perturb_gamma };
    let (res_identity, res_tol) = if quick { (512, 1e-4) } else { (4096, 1e-6) };
    let order_res: [usize; 3] = if quick { [128, 256, 512] } else { [512, 1024, 2048] };
    let grid_n = if quick { 128 } else { 1024 };
    let e = std::f64::consts::E;
    let ok = |v: f64| -> Result<f64, expr::EvalError> { Ok(v) };

    st.rel("gamma reflection Gamma(1/2)^2 = pi", gamma(0.5).powi(2), std::f64::consts::PI, 1e-12);
    st.rel("gamma factorial Gamma(6) = 120", gamma(6.0), 120.0, 1e-12);

    for a in [0.5, 1.5, 2.5] {
        let v = hadamard_integral(|_| ok(1.0), a, e, res_identity).unwrap();
        st.rel(
            &format!("integral identity I^{a} 1 at e = 1/Gamma({})", a + 1.0),
            v * gamma(a + 1.0),
            1.0,
            res_tol,
        );
    }

    for a in [0.5, 1.5, 2.5] {
        let want = gamma(3.5) / gamma(3.5 + a);
        let errs: Vec<f64> = order_res
            .iter()
            .map(|m| {
                let v = hadamard_integral(|t: f64| ok(t.ln().powf(2.5)), a, e, *m).unwrap();
                (v * (1.0 + perturb_gamma) - want).abs()
            })
            .collect();
        let order = (errs[0] / errs[1]).log2().min((errs[1] / errs[2]).log2());
        st.perturb = 0.0; // already applied inside the error computation
        st.at_least(&format!("quadrature order >= 1.9 for I^{a} (log t)^2.5"), order, 1.9);
        st.perturb = perturb_gamma;
    }

    for a in [0.5, 1.5] {
        let grid = Grid::new(grid_n).unwrap();
        let f = GridFunction::from_fn(grid, |t| t.ln().powf(2.5)).unwrap();
        let d = hadamard_derivative(&f, a).unwrap();
        let back = hadamard_integral_grid(&d, a).unwrap();
        st.below(&format!("inversion I^{a} D^{a} restores (log t)^2.5"), back.distance(&f), 5e-3);
    }
    {
        let grid = Grid::new(grid_n).unwrap();
        let f = GridFunction::from_fn(grid, |t| 1.0 + t.ln().powi(2)).unwrap();
        let d = caputo_hadamard_derivative(&f, 1.5).unwrap();
        let back = hadamard_integral_grid(&d, 1.5).unwrap();
        let res = (0..=grid.n())
            .map(|j| (back.value(j) - (f.value(j) - 1.0)).abs())
            .fold(0.0f64, f64::max);
        st.below("inversion I^1.5 C-D^1.5 restores 1+(log t)^2 minus f(1)", res, 5e-3);
    }
    {
        let grid = Grid::new(grid_n).unwrap();
        let f = GridFunction::from_fn(grid, |t| t.ln().powf(2.5) + 0.3 * t.ln()).unwrap();
        for (beta, name) in [
            (0.0, "beta=0 reduction matches plain derivative"),
            (1.0, "beta=1 reduction matches Caputo derivative"),
        ] {
            let order = FracOrder::new(1.5, beta).unwrap();
            let h = hilfer_hadamard_derivative(&f, &order).unwrap();
            let want = if beta == 0.0 {
                hadamard_derivative(&f, 1.5).unwrap()
            } else {
                caputo_hadamard_derivative(&f, 1.5).unwrap()
            };
            let diff = (0..=grid.n())
                .map(|j| (h.value(j) - want.value(j)).abs())
                .fold(0.0f64, f64::max);
            st.below(name, diff, 1e-12);
        }
        let d = delta_operator(&GridFunction::constant(grid, 2.0).unwrap(), 1);
        st.below("delta annihilates constants", d.sup_norm(), 1e-13);
    }
    {
        let grid = Grid::new(grid_n.max(128)).unwrap();
        let f = GridFunction::from_fn(grid, |t| t.ln().powi(2)).unwrap();
        let two = hadamard_integral_grid(&hadamard_integral_grid(&f, 0.5).unwrap(), 0.5).unwrap();
        let one = hadamard_integral_grid(&f, 1.0).unwrap();
        st.below("semigroup I^0.5 I^0.5 = I^1 on (log t)^2", two.distance(&one), 5e-5);
    }

    // golden constants of the embedded worked problems (exact-input
    // references computed with 40-digit arithmetic)
    let p41 = embedded_problem(include_str!("../../examples/ex41.problem"));
    let c41 = bvp::compute_constants(&p41).unwrap();
    let phi41 = certify::compute_phi(&p41).unwrap();
    st.rel("golden lambda (first problem)", c41.lambda, -2.261_649_594_026_814_9, 1e-9);
    st.rel("golden phi (first problem)", phi41, 3.835_194_111_527_762_3, 1e-9);
    st.abs(
        "golden contraction factor C*Phi vs published 0.06613554378",
        p41.lipschitz.unwrap() * phi41,
        0.066_135_543_78,
        1e-6,
    );

    let p42 = embedded_problem(include_str!("../../examples/ex42.problem"));
    let c42 = bvp::compute_constants(&p42).unwrap();
    let phi42 = certify::compute_phi(&p42).unwrap();
    st.rel("golden lambda (second problem)", c42.lambda, -9.990_487_162_011_193_4, 1e-9);
    st.rel("golden phi (second problem)", phi42, 3.414_444_025_608_596_9, 1e-9);
    let opts = CertifyOptions { grid_n, ..CertifyOptions::default() };
    let leray = certify::certify_leray_schauder(&p42, &opts).unwrap();
    st.abs(
        "golden admissible bound L* = phi/(6-phi)",
        leray.constants["l_star"],
        1.320_584_067_576_529_7,
        1e-6,
    );

    for (name, p) in [("first", &p41), ("second", &p42)] {
        let w = expr::parse("1").unwrap();
        let pstar = certify::compute_pstar(p, &w, &opts).unwrap();
        let phi = certify::compute_phi(p).unwrap();
        st.rel(&format!("P*(w=1) = Phi ({name} problem)"), pstar, phi, 1e-8);
    }

    let mut report = Report::new(if quick { "selftest --quick" } else { "selftest" });
    report.selftest = st.checks;
    report
}
