//! The flat key/value problem-file format.
//!
//! One assignment per line (`key = value`), `#` starts a comment anywhere,
//! blank lines are ignored. Numeric values (and numeric array elements,
//! comma-separated) are constant expressions, so fractions like `3/2` or
//! `3/(64*exp(1))` transcribe exactly. Function-valued keys keep their
//! expression source: `f` in (t, x), `g`/`q`/`weight` in t, `vartheta` in u.

use crate::bvp::{BvpError, Problem};
use crate::expr::{self, Bindings, ExprAst};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FileError {
    pub line: usize,
    pub message: String,
}

/// A parsed problem file: the validated problem plus the optional run
/// settings and the raw sources for echoing.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub problem: Problem,
    pub grid_n: Option<usize>,
    pub resolution: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    /// Raw value text per key, for the report's input echo.
    pub sources: BTreeMap<String, String>,
}

const KEYS: &[&str] = &[
    "alpha", "beta", "epsilon", "zeta", "nu", "sigma", "f", "C", "g", "q", "vartheta", "weight",
    "grid_n", "resolution", "tol", "max_iter",
];

fn constant_expr(text: &str, line: usize, key: &str) -> Result<f64, FileError> {
    let ast = expr::parse(text).map_err(|e| FileError {
        line,
        message: format!("{key}: {e}"),
    })?;
    if !ast.variables().is_empty() {
        return Err(FileError {
            line,
            message: format!("{key}: must be a constant expression, found variables"),
        });
    }
    expr::eval(&ast, &Bindings::new()).map_err(|e| FileError {
        line,
        message: format!("{key}: {e}"),
    })
}

fn number_list(text: &str, line: usize, key: &str) -> Result<Vec<f64>, FileError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|piece| constant_expr(piece.trim(), line, key)).collect()
}

fn expression(text: &str, line: usize, key: &str) -> Result<ExprAst, FileError> {
    expr::parse(text).map_err(|e| FileError { line, message: format!("{key}: {e}") })
}

fn positive_integer(text: &str, line: usize, key: &str) -> Result<usize, FileError> {
    match text.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(FileError { line, message: format!("{key}: expected a positive integer, got '{text}'") }),
    }
}

/// Parse and validate a problem file. Errors carry the 1-based line number
/// of the offending assignment.
pub fn parse_problem_file(text: &str) -> Result<ProblemFile, FileError> {
    let mut entries: BTreeMap<&str, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(FileError {
                line: line_no,
                message: format!("expected 'key = value', got '{line}'"),
            });
        };
        let key = line[..eq].trim();
        let value = line[eq + 1..].trim();
        let Some(key) = KEYS.iter().find(|k| **k == key) else {
            return Err(FileError { line: line_no, message: format!("unknown key '{key}'") });
        };
        if value.is_empty() {
            return Err(FileError { line: line_no, message: format!("{key}: empty value") });
        }
        if entries.insert(key, (line_no, value.to_string())).is_some() {
            return Err(FileError { line: line_no, message: format!("duplicate key '{key}'") });
        }
    }

    let require = |key: &str| -> Result<(usize, String), FileError> {
        entries
            .get(key)
            .cloned()
            .ok_or_else(|| FileError { line: 0, message: format!("missing required key '{key}'") })
    };

    let (l_alpha, v_alpha) = require("alpha")?;
    let (l_beta, v_beta) = require("beta")?;
    let (l_eps, v_eps) = require("epsilon")?;
    let (l_zeta, v_zeta) = require("zeta")?;
    let (l_nu, v_nu) = require("nu")?;
    let (l_sigma, v_sigma) = require("sigma")?;
    let (l_f, v_f) = require("f")?;

    let alpha = constant_expr(&v_alpha, l_alpha, "alpha")?;
    let beta = constant_expr(&v_beta, l_beta, "beta")?;
    let epsilon = constant_expr(&v_eps, l_eps, "epsilon")?;
    let zeta = number_list(&v_zeta, l_zeta, "zeta")?;
    let nu = number_list(&v_nu, l_nu, "nu")?;
    let sigma = number_list(&v_sigma, l_sigma, "sigma")?;
    let f = expression(&v_f, l_f, "f")?;

    let field_line = |field: &str| -> usize {
        match field {
            "alpha" => l_alpha,
            "beta" => l_beta,
            "epsilon" => l_eps,
            "zeta" => l_zeta,
            "nu" => l_nu,
            "sigma" => l_sigma,
            "f" => l_f,
            _ => 0,
        }
    };
    let lift = |field: &'static str, e: BvpError| -> FileError {
        FileError { line: field_line(field), message: e.to_string() }
    };

    let mut problem = Problem::new(alpha, beta, epsilon, zeta, nu, sigma, f).map_err(|e| {
        let field = match &e {
            BvpError::InvalidField { field, .. } => field,
            _ => "alpha",
        };
        lift(field, e)
    })?;

    if let Some((line, v)) = entries.get("C").cloned() {
        let c = constant_expr(&v, line, "C")?;
        problem = problem.with_lipschitz(c).map_err(|e| lift("C", e)).map_err(|mut e| {
            e.line = line;
            e
        })?;
    }
    for (key, setter) in [
        ("g", Problem::with_bound as fn(Problem, ExprAst) -> Result<Problem, BvpError>),
        ("q", Problem::with_growth),
        ("vartheta", Problem::with_vartheta),
        ("weight", Problem::with_weight),
    ] {
        if let Some((line, v)) = entries.get(key).cloned() {
            let ast = expression(&v, line, key)?;
            problem = setter(problem, ast)
                .map_err(|e| FileError { line, message: e.to_string() })?;
        }
    }

    let grid_n = match entries.get("grid_n").cloned() {
        Some((line, v)) => Some(positive_integer(&v, line, "grid_n")?),
        None => None,
    };
    let resolution = match entries.get("resolution").cloned() {
        Some((line, v)) => Some(positive_integer(&v, line, "resolution")?),
        None => None,
    };
    let max_iter = match entries.get("max_iter").cloned() {
        Some((line, v)) => Some(positive_integer(&v, line, "max_iter")?),
        None => None,
    };
    let tol = match entries.get("tol").cloned() {
        Some((line, v)) => {
            let t = constant_expr(&v, line, "tol")?;
            if !(t > 0.0) {
                return Err(FileError { line, message: format!("tol: must be positive, got {t}") });
            }
            Some(t)
        }
        None => None,
    };

    let sources = entries
        .into_iter()
        .map(|(k, (_, v))| (k.to_string(), v))
        .collect();

    Ok(ProblemFile { problem, grid_n, resolution, tol, max_iter, sources })
}
