//! The run report: one machine-readable JSON document plus a human
//! rendering of the same numbers.
//!
//! Machine and human sections must carry identical values, so both are
//! produced from the same struct and the human renderer prints every float
//! with 17 significant digits (`{:.16e}`), enough to round-trip f64
//! exactly. The machine section contains nothing run-dependent
//! (no timestamps, no paths): identical inputs give identical bytes.

use crate::bvp::BvpConstants;
use crate::certify::{Certificate, Verdict};
use crate::solver::Residuals;
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Debug, Clone, Serialize)]
pub struct InputEcho {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub zeta: Vec<f64>,
    pub nu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub f: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vartheta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    pub grid_n: usize,
    pub resolution: usize,
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsSection {
    #[serde(flatten)]
    pub constants: BvpConstants,
    pub phi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionSection {
    pub converged: bool,
    pub iterations: usize,
    pub final_step_norm: f64,
    pub sup_norm: f64,
    pub c0: f64,
    pub c1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contraction_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratios_within_bound: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<InputEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsSection>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Residuals>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub selftest: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            inputs: None,
            constants: None,
            certificates: Vec::new(),
            lipschitz_estimate: None,
            solution: None,
            residuals: None,
            selftest: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Machine rendering: pretty JSON, deterministic for identical inputs.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    /// Human rendering with full-precision numbers.
    pub fn render_human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "hhbvp {} report", self.command);
        if let Some(inp) = &self.inputs {
            let _ = writeln!(out, "\ninputs");
            let _ = writeln!(out, "  alpha      = {}", num(inp.alpha));
            let _ = writeln!(out, "  beta       = {}", num(inp.beta));
            let _ = writeln!(out, "  epsilon    = {}", num(inp.epsilon));
            let _ = writeln!(out, "  zeta       = {}", list(&inp.zeta));
            let _ = writeln!(out, "  nu         = {}", list(&inp.nu));
            let _ = writeln!(out, "  sigma      = {}", list(&inp.sigma));
            let _ = writeln!(out, "  f          = {}", inp.f);
            if let Some(c) = inp.c {
                let _ = writeln!(out, "  C          = {}", num(c));
            }
            for (k, v) in [("g", &inp.g), ("q", &inp.q), ("vartheta", &inp.vartheta), ("weight", &inp.weight)]
            {
                if let Some(v) = v {
                    let _ = writeln!(out, "  {k:<10} = {v}");
                }
            }
            let _ = writeln!(out, "  grid_n     = {}", inp.grid_n);
            let _ = writeln!(out, "  resolution = {}", inp.resolution);
            let _ = writeln!(out, "  tol        = {}", num(inp.tol));
            let _ = writeln!(out, "  max_iter   = {}", inp.max_iter);
        }
        if let Some(c) = &self.constants {
            let _ = writeln!(out, "\nconstants");
            let _ = writeln!(out, "  gamma  = {}", num(c.constants.gamma));
            let _ = writeln!(out, "  mu1    = {}", num(c.constants.mu1));
            let _ = writeln!(out, "  mu2    = {}", num(c.constants.mu2));
            let _ = writeln!(out, "  delta1 = {}", num(c.constants.delta1));
            let _ = writeln!(out, "  delta2 = {}", num(c.constants.delta2));
            let _ = writeln!(out, "  lambda = {}", num(c.constants.lambda));
            let _ = writeln!(out, "  phi    = {}", num(c.phi));
        }
        for cert in &self.certificates {
            let verdict = match cert.verdict {
                Verdict::Holds => "holds",
                Verdict::Heuristic => "holds (heuristic)",
                Verdict::Fails => "fails",
            };
            let _ = writeln!(out, "\ncertificate {}: {}", cert.theorem, verdict);
            for (k, v) in &cert.constants {
                let _ = writeln!(out, "  {k:<14} = {}", num(*v));
            }
            for note in &cert.notes {
                let _ = writeln!(out, "  note: {note}");
            }
        }
        if let Some(est) = self.lipschitz_estimate {
            let _ = writeln!(
                out,
                "\nlipschitz_estimate = {} (sampled difference quotient; heuristic lower bound of the true constant)",
                num(est)
            );
        }
        if let Some(sol) = &self.solution {
            let _ = writeln!(out, "\nsolution");
            let _ = writeln!(out, "  converged        = {}", sol.converged);
            let _ = writeln!(out, "  iterations       = {}", sol.iterations);
            let _ = writeln!(out, "  final_step_norm  = {}", num(sol.final_step_norm));
            let _ = writeln!(out, "  sup_norm         = {}", num(sol.sup_norm));
            let _ = writeln!(out, "  c0               = {}", num(sol.c0));
            let _ = writeln!(out, "  c1               = {}", num(sol.c1));
            if let Some(b) = sol.contraction_bound {
                let _ = writeln!(out, "  contraction_bound = {}", num(b));
            }
            if let Some(r) = sol.max_ratio {
                let _ = writeln!(out, "  max_ratio        = {}", num(r));
            }
            if let Some(ok) = sol.ratios_within_bound {
                let _ = writeln!(out, "  ratios_within_bound = {ok}");
            }
        }
        if let Some(res) = &self.residuals {
            let _ = writeln!(out, "\nresiduals");
            let _ = writeln!(out, "  ode_residual   = {}", num(res.ode_residual));
            let _ = writeln!(out, "  boundary_r1    = {}", num(res.r1));
            let _ = writeln!(out, "  boundary_r2    = {}", num(res.r2));
            let _ = writeln!(out, "  excluded_nodes = {}", res.excluded_nodes);
        }
        if !self.selftest.is_empty() {
            let _ = writeln!(out, "\nselftest");
            for check in &self.selftest {
                let tag = if check.passed { "ok  " } else { "FAIL" };
                let _ = writeln!(out, "  {tag} {} ({})", check.name, check.detail);
            }
            let failed = self.selftest.iter().filter(|c| !c.passed).count();
            let _ = writeln!(
                out,
                "  {} checks, {} failed",
                self.selftest.len(),
                failed
            );
        }
        for w in &self.warnings {
            let _ = writeln!(out, "\nwarning: {w}");
        }
        out
    }
}

/// 17 significant digits: round-trips every f64 exactly.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn list(vs: &[f64]) -> String {
    vs.iter().map(|v| num(*v)).collect::<Vec<_>>().join(", ")
}
