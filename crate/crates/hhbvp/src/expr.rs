//! Arithmetic expressions for the user-supplied scalar functions.
//!
//! The grammar is deliberately tiny: infix `+ - * / ^` (with `^` binding
//! tightest and right-associative, unary minus between `^` and `*`),
//! the variables `t`, `x`, `u`, and the whitelisted unary functions
//! `log` (natural), `exp`, `sqrt`, `abs`. Anything else is rejected at
//! parse time, so evaluation is total up to domain errors.

use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Var {
    T,
    X,
    U,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
            Var::U => "u",
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Log,
    Exp,
    Sqrt,
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Parsed expression tree. Immutable after parse; evaluation is pure, so
/// identical trees and bindings give bit-identical results.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Literal(f64),
    Variable(Var),
    Unary(UnaryOp, Box<ExprAst>),
    Binary(BinOp, Box<ExprAst>, Box<ExprAst>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected '{0}'")]
    UnexpectedToken(String),
    #[error("unknown identifier '{0}' (variables: t, x, u; functions: log, exp, sqrt, abs)")]
    UnknownIdentifier(String),
    #[error("'{0}' takes exactly one argument")]
    ArityMismatch(String),
    #[error("invalid number literal '{0}'")]
    InvalidNumber(String),
    #[error("empty expression")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("variable '{0}' is not bound")]
    UnboundVariable(Var),
    #[error("log of non-positive argument {0}")]
    LogDomain(f64),
    #[error("sqrt of negative argument {0}")]
    SqrtDomain(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{base}^{exponent} is not a real number")]
    PowDomain { base: f64, exponent: f64 },
    #[error("evaluation overflowed to a non-finite value")]
    Overflow,
}

/// Variable bindings for evaluation. Unset variables are evaluation errors.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bindings {
    t: Option<f64>,
    x: Option<f64>,
    u: Option<f64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_x(mut self, x: f64) -> Self {
        self.x = Some(x);
        self
    }

    pub fn with_u(mut self, u: f64) -> Self {
        self.u = Some(u);
        self
    }

    fn get(&self, v: Var) -> Option<f64> {
        match v {
            Var::T => self.t,
            Var::X => self.x,
            Var::U => self.u,
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError { offset: self.pos, kind })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = ExprAst::Binary(BinOp::Add, Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = ExprAst::Binary(BinOp::Sub, Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = ExprAst::Binary(BinOp::Mul, Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = ExprAst::Binary(BinOp::Div, Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // unary minus binds looser than '^': -2^2 = -(2^2)
    fn unary(&mut self) -> Result<ExprAst, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(ExprAst::Unary(UnaryOp::Neg, Box::new(self.unary()?)));
        }
        self.power()
    }

    // right-associative: 2^3^2 = 2^(3^2); the exponent may carry a sign
    fn power(&mut self) -> Result<ExprAst, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(ExprAst::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprAst, ParseError> {
        match self.peek() {
            None => self.err(ParseErrorKind::UnexpectedEnd),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(b')') => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    Some(c) => self.err(ParseErrorKind::UnexpectedToken((c as char).to_string())),
                    None => self.err(ParseErrorKind::UnexpectedEnd),
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => self.err(ParseErrorKind::UnexpectedChar(c as char)),
        }
    }

    fn number(&mut self) -> Result<ExprAst, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // optional exponent part: e / E with optional sign
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let mut k = self.pos + 1;
            if k < self.src.len() && matches!(self.src[k], b'+' | b'-') {
                k += 1;
            }
            if k < self.src.len() && self.src[k].is_ascii_digit() {
                self.pos = k;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(ExprAst::Literal(v)),
            _ => Err(ParseError {
                offset: start,
                kind: ParseErrorKind::InvalidNumber(text.to_string()),
            }),
        }
    }

    fn identifier(&mut self) -> Result<ExprAst, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        match name.as_str() {
            "t" => return Ok(ExprAst::Variable(Var::T)),
            "x" => return Ok(ExprAst::Variable(Var::X)),
            "u" => return Ok(ExprAst::Variable(Var::U)),
            _ => {}
        }
        let op = match name.as_str() {
            "log" => UnaryOp::Log,
            "exp" => UnaryOp::Exp,
            "sqrt" => UnaryOp::Sqrt,
            "abs" => UnaryOp::Abs,
            _ => {
                return Err(ParseError {
                    offset: start,
                    kind: ParseErrorKind::UnknownIdentifier(name),
                })
            }
        };
        if self.peek() != Some(b'(') {
            return Err(ParseError { offset: start, kind: ParseErrorKind::ArityMismatch(name) });
        }
        self.pos += 1;
        let arg = self.expr()?;
        match self.peek() {
            Some(b')') => {
                self.pos += 1;
                Ok(ExprAst::Unary(op, Box::new(arg)))
            }
            Some(b',') => Err(ParseError { offset: self.pos, kind: ParseErrorKind::ArityMismatch(name) }),
            Some(c) => self.err(ParseErrorKind::UnexpectedToken((c as char).to_string())),
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }
}

/// Parse an expression string.
pub fn parse(source: &str) -> Result<ExprAst, ParseError> {
    let mut p = Parser { src: source.as_bytes(), pos: 0 };
    if p.peek().is_none() {
        return p.err(ParseErrorKind::Empty);
    }
    let ast = p.expr()?;
    if let Some(c) = p.peek() {
        return p.err(ParseErrorKind::UnexpectedToken((c as char).to_string()));
    }
    Ok(ast)
}

/// Evaluate with the given bindings. IEEE double precision throughout;
/// domain violations are errors rather than NaN propagation.
pub fn eval(ast: &ExprAst, bindings: &Bindings) -> Result<f64, EvalError> {
    let v = eval_inner(ast, bindings)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Overflow)
    }
}

fn eval_inner(ast: &ExprAst, b: &Bindings) -> Result<f64, EvalError> {
    Ok(match ast {
        ExprAst::Literal(v) => *v,
        ExprAst::Variable(var) => b.get(*var).ok_or(EvalError::UnboundVariable(*var))?,
        ExprAst::Unary(op, inner) => {
            let v = eval_inner(inner, b)?;
            match op {
                UnaryOp::Neg => -v,
                UnaryOp::Log => {
                    if v <= 0.0 {
                        return Err(EvalError::LogDomain(v));
                    }
                    v.ln()
                }
                UnaryOp::Exp => v.exp(),
                UnaryOp::Sqrt => {
                    if v < 0.0 {
                        return Err(EvalError::SqrtDomain(v));
                    }
                    v.sqrt()
                }
                UnaryOp::Abs => v.abs(),
            }
        }
        ExprAst::Binary(op, lhs, rhs) => {
            let a = eval_inner(lhs, b)?;
            let c = eval_inner(rhs, b)?;
            match op {
                BinOp::Add => a + c,
                BinOp::Sub => a - c,
                BinOp::Mul => a * c,
                BinOp::Div => {
                    if c == 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    a / c
                }
                BinOp::Pow => {
                    if a < 0.0 && c != c.trunc() {
                        return Err(EvalError::PowDomain { base: a, exponent: c });
                    }
                    a.powf(c)
                }
            }
        }
    })
}

impl ExprAst {
    /// The set of variables the expression actually reads.
    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            ExprAst::Literal(_) => {}
            ExprAst::Variable(v) => {
                out.insert(*v);
            }
            ExprAst::Unary(_, inner) => inner.collect_vars(out),
            ExprAst::Binary(_, lhs, rhs) => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            ExprAst::Literal(_) | ExprAst::Variable(_) => 5,
            ExprAst::Unary(UnaryOp::Neg, _) => 3,
            ExprAst::Unary(_, _) => 5, // function calls are self-delimiting
            ExprAst::Binary(BinOp::Pow, _, _) => 4,
            ExprAst::Binary(BinOp::Mul | BinOp::Div, _, _) => 2,
            ExprAst::Binary(BinOp::Add | BinOp::Sub, _, _) => 1,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            ExprAst::Literal(v) => write!(f, "{v}")?,
            ExprAst::Variable(v) => write!(f, "{v}")?,
            ExprAst::Unary(UnaryOp::Neg, inner) => {
                f.write_str("-")?;
                inner.fmt_prec(f, 3)?;
            }
            ExprAst::Unary(op, inner) => {
                let name = match op {
                    UnaryOp::Log => "log",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Abs => "abs",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}(")?;
                inner.fmt_prec(f, 0)?;
                f.write_str(")")?;
            }
            ExprAst::Binary(op, lhs, rhs) => {
                let (sym, lp, rp) = match op {
                    // left-associative: a right-nested operand of the same
                    // precedence keeps its parentheses
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    // '^' is right-associative; its left operand must be an
                    // atom, its right operand may be a sign or another power
                    BinOp::Pow => ("^", 5, 3),
                };
                lhs.fmt_prec(f, lp)?;
                f.write_str(sym)?;
                rhs.fmt_prec(f, rp)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn parses_single_variable() {
        assert_eq!(parse("t").unwrap(), ExprAst::Variable(Var::T));
    }

    #[test]
    fn parses_saturating_nonlinearity() {
        // the shape used in the second worked problem
        let ast = parse("(1+log(t))/(t+1)^2 * (abs(x)+1)/(3+abs(x))").unwrap();
        let vars = ast.variables();
        assert!(vars.contains(&Var::T) && vars.contains(&Var::X));
        let v = eval(&ast, &Bindings::new().with_t(1.0).with_x(0.0)).unwrap();
        assert_relative_eq!(v, 1.0 / 12.0, max_relative = 1e-15);
    }

    #[test]
    fn reports_error_position() {
        let err = parse("log(").unwrap_err();
        assert_eq!(err.offset, 4);
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);

        let err = parse("2 + y").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("y".into()));
        assert_eq!(err.offset, 4);

        let err = parse("log(1, 2)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ArityMismatch("log".into()));

        let err = parse("log + 1").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ArityMismatch("log".into()));

        assert!(parse("").is_err());
        assert!(parse("   ").is_err());
        assert!(parse("(1+2").is_err());
        assert!(parse("1 + ").is_err());
        assert!(parse("t(1)").is_err());
    }

    #[test]
    fn eval_examples() {
        let b0 = Bindings::new().with_x(0.0);
        assert_eq!(eval(&parse("x").unwrap(), &b0).unwrap(), 0.0);

        // ||q|| endpoint value used by the growth certificate
        let v = eval(&parse("1+log(t)").unwrap(), &Bindings::new().with_t(std::f64::consts::E))
            .unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn precedence_and_associativity() {
        let ev = |s: &str| eval(&parse(s).unwrap(), &Bindings::new()).unwrap();
        assert_eq!(ev("2+3*4"), 14.0);
        assert_eq!(ev("2^3^2"), 512.0); // right-associative
        assert_eq!(ev("-2^2"), -4.0); // unary minus binds looser than ^
        assert_eq!(ev("2^-1"), 0.5);
        assert_eq!(ev("2*-3"), -6.0);
        assert_eq!(ev("(2+3)*4"), 20.0);
        assert_eq!(ev("8/4/2"), 1.0); // left-associative
        assert_eq!(ev("8-4-2"), 2.0);
    }

    #[test]
    fn domain_errors() {
        let b = Bindings::new().with_t(1.0);
        assert!(matches!(
            eval(&parse("log(t-1)").unwrap(), &b),
            Err(EvalError::LogDomain(_))
        ));
        assert!(matches!(
            eval(&parse("sqrt(0-1)").unwrap(), &Bindings::new()),
            Err(EvalError::SqrtDomain(_))
        ));
        assert!(matches!(
            eval(&parse("1/(t-1)").unwrap(), &b),
            Err(EvalError::DivisionByZero)
        ));
        assert!(matches!(
            eval(&parse("(0-2)^0.5").unwrap(), &Bindings::new()),
            Err(EvalError::PowDomain { .. })
        ));
        assert!(matches!(
            eval(&parse("x").unwrap(), &Bindings::new().with_t(1.0)),
            Err(EvalError::UnboundVariable(Var::X))
        ));
        assert!(matches!(
            eval(&parse("exp(exp(exp(t)))").unwrap(), &Bindings::new().with_t(700.0)),
            Err(EvalError::Overflow)
        ));
    }

    // random ASTs for the round-trip property
    fn arb_ast() -> impl Strategy<Value = ExprAst> {
        let leaf = prop_oneof![
            (0.0..100.0f64).prop_map(ExprAst::Literal),
            prop_oneof![Just(Var::T), Just(Var::X), Just(Var::U)].prop_map(ExprAst::Variable),
        ];
        leaf.prop_recursive(6, 48, 2, |inner| {
            prop_oneof![
                (
                    prop_oneof![
                        Just(UnaryOp::Neg),
                        Just(UnaryOp::Log),
                        Just(UnaryOp::Exp),
                        Just(UnaryOp::Sqrt),
                        Just(UnaryOp::Abs)
                    ],
                    inner.clone()
                )
                    .prop_map(|(op, a)| ExprAst::Unary(op, Box::new(a))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner
                )
                    .prop_map(|(op, a, b)| ExprAst::Binary(op, Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn pretty_print_round_trips(ast in arb_ast()) {
            let printed = ast.to_string();
            let reparsed = parse(&printed).unwrap_or_else(|e| {
                panic!("failed to reparse '{printed}': {e}")
            });
            prop_assert_eq!(reparsed, ast);
        }

        #[test]
        fn eval_is_bit_deterministic(ast in arb_ast(), t in 1.0..2.7f64, x in -10.0..10.0f64) {
            let b = Bindings::new().with_t(t).with_x(x).with_u(x.abs());
            let first = eval(&ast, &b);
            let second = eval(&ast, &b);
            match (first, second) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "non-deterministic outcome: {:?}", other),
            }
        }
    }
}
