//! Arithmetic expressions for curvature, width and parametric curve input.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          right associative
//! primary := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Implicit multiplication is not accepted: `2s` is an error, write `2*s`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at byte {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Number(f64),
    /// Free variable (`s` or `t`) or the bound length `L`.
    Var(String),
    Const(Constant),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Names an expression may refer to besides `pi` and `e`.
pub const KNOWN_VARIABLES: [&str; 3] = ["s", "t", "L"];

/// Values bound to the variables during evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Env {
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub length: Option<f64>,
}

impl Env {
    pub fn with_s(s: f64, length: f64) -> Self {
        Env {
            s: Some(s),
            t: None,
            length: Some(length),
        }
    }

    pub fn with_t(t: f64) -> Self {
        Env {
            s: None,
            t: Some(t),
            length: None,
        }
    }

    fn lookup(&self, name: &str) -> f64 {
        let v = match name {
            "s" => self.s,
            "t" => self.t,
            "L" => self.length,
            _ => None,
        };
        v.unwrap_or(f64::NAN)
    }
}

pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let expr = parser.expr()?;
    match parser.peek() {
        None => Ok(expr),
        Some(tok) => Err(ParseError {
            offset: tok.offset,
            expected: "operator or end of input".into(),
            found: tok.kind.describe(),
        }),
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expression(s)
    }
}

impl Expr {
    pub fn eval(&self, env: &Env) -> f64 {
        match self {
            Expr::Number(v) => *v,
            Expr::Var(name) => env.lookup(name),
            Expr::Const(c) => c.value(),
            Expr::Neg(a) => -a.eval(env),
            Expr::Binary(op, a, b) => {
                let (x, y) = (a.eval(env), b.eval(env));
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(env)),
        }
    }

    /// Evaluate with `s` (and `L`) bound.
    pub fn eval_s(&self, s: f64, length: f64) -> f64 {
        self.eval(&Env::with_s(s, length))
    }

    pub fn eval_t(&self, t: f64) -> f64 {
        self.eval(&Env::with_t(t))
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Number(_) | Expr::Const(_) => {}
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Expr::Number(v) if *v == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Number(v) if *v == 1.0)
    }

    fn depends_on(&self, var: &str) -> bool {
        self.variables().contains(var)
    }

    /// Symbolic derivative with respect to `var`, lightly simplified.
    pub fn derivative(&self, var: &str) -> Expr {
        use BinOp::*;
        match self {
            Expr::Number(_) | Expr::Const(_) => num(0.0),
            Expr::Var(v) => num(if v == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.derivative(var)),
            Expr::Binary(op, a, b) => {
                let (da, db) = (a.derivative(var), b.derivative(var));
                match op {
                    Add => add(da, db),
                    Sub => sub(da, db),
                    Mul => add(mul(da, (**b).clone()), mul((**a).clone(), db)),
                    Div => div(
                        sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                        pow((**b).clone(), num(2.0)),
                    ),
                    Pow => {
                        if !b.depends_on(var) {
                            // d(f^c) = c f^(c-1) f'
                            let reduced = match **b {
                                Expr::Number(c) => num(c - 1.0),
                                _ => sub((**b).clone(), num(1.0)),
                            };
                            mul(mul((**b).clone(), pow((**a).clone(), reduced)), da)
                        } else {
                            // d(f^g) = f^g (g' ln f + g f'/f)
                            let inner = add(
                                mul(db, call(Func::Log, (**a).clone())),
                                div(mul((**b).clone(), da), (**a).clone()),
                            );
                            mul(self.clone(), inner)
                        }
                    }
                }
            }
            Expr::Call(f, a) => {
                let da = a.derivative(var);
                let x = (**a).clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, x),
                    Func::Cos => neg(call(Func::Sin, x)),
                    Func::Tan => div(num(1.0), pow(call(Func::Cos, x), num(2.0))),
                    Func::Exp => call(Func::Exp, x),
                    Func::Log => div(num(1.0), x),
                    Func::Sqrt => div(num(0.5), call(Func::Sqrt, x)),
                    Func::Abs => div(x.clone(), call(Func::Abs, x)),
                };
                mul(outer, da)
            }
        }
    }
}

fn num(v: f64) -> Expr {
    Expr::Number(v)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Number(v) => num(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    if a.is_zero() {
        b
    } else if b.is_zero() {
        a
    } else {
        Expr::Binary(BinOp::Add, Box::new(a), Box::new(b))
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if b.is_zero() {
        a
    } else if a.is_zero() {
        neg(b)
    } else {
        Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b))
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if a.is_zero() || b.is_zero() {
        num(0.0)
    } else if a.is_one() {
        b
    } else if b.is_one() {
        a
    } else {
        Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b))
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if a.is_zero() {
        num(0.0)
    } else if b.is_one() {
        a
    } else {
        Expr::Binary(BinOp::Div, Box::new(a), Box::new(b))
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    if b.is_one() {
        a
    } else if b.is_zero() {
        num(1.0)
    } else {
        Expr::Binary(BinOp::Pow, Box::new(a), Box::new(b))
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

// Printing. Binding strengths: + - = 1, * / = 2, unary minus = 3, ^ = 4, atoms = 5.
impl Expr {
    fn strength(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Number(v) if *v < 0.0 => 3,
            _ => 5,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.strength() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(v) => {
                if *v < 0.0 {
                    write!(f, "-{}", -v)
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Var(name) => write!(f, "{name}"),
            Expr::Const(Constant::Pi) => write!(f, "pi"),
            Expr::Const(Constant::E) => write!(f, "e"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                // operand of unary minus binds at least as tight as ^ or another minus
                a.write_child(f, 3)
            }
            Expr::Binary(op, a, b) => {
                let prec = op.precedence();
                match op {
                    BinOp::Pow => {
                        a.write_child(f, prec + 1)?;
                        write!(f, "^")?;
                        // right operand may itself be a power or a negation
                        b.write_child(f, 3)
                    }
                    _ => {
                        a.write_child(f, prec)?;
                        write!(f, " {} ", op.symbol())?;
                        b.write_child(f, prec + 1)
                    }
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

// Tokenizer and parser.

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl TokKind {
    fn describe(&self) -> String {
        match self {
            TokKind::Num(v) => format!("number {v}"),
            TokKind::Ident(s) => format!("identifier `{s}`"),
            TokKind::Op(c) => format!("`{c}`"),
            TokKind::LParen => "`(`".into(),
            TokKind::RParen => "`)`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    offset: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part, only if followed by digits
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit = &text[start..i];
            let v: f64 = lit.parse().map_err(|_| ParseError {
                offset: start,
                expected: "number".into(),
                found: format!("`{lit}`"),
            })?;
            out.push(Token {
                kind: TokKind::Num(v),
                offset: start,
            });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                kind: TokKind::Ident(text[start..i].to_string()),
                offset: start,
            });
        } else {
            let kind = match c {
                b'+' | b'-' | b'*' | b'/' | b'^' => TokKind::Op(c as char),
                b'(' => TokKind::LParen,
                b')' => TokKind::RParen,
                _ => {
                    let ch = text[start..].chars().next().unwrap_or('?');
                    return Err(ParseError {
                        offset: start,
                        expected: "expression".into(),
                        found: format!("character `{ch}`"),
                    });
                }
            };
            i += 1;
            out.push(Token {
                kind,
                offset: start,
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokKind::Op(c),
                ..
            }) => Some(*c),
            _ => None,
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(tok) => ParseError {
                offset: tok.offset,
                expected: expected.into(),
                found: tok.kind.describe(),
            },
            None => ParseError {
                offset: self.end,
                expected: expected.into(),
                found: "end of input".into(),
            },
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error("expression"));
        };
        match tok.kind {
            TokKind::Num(v) => {
                self.pos += 1;
                Ok(Expr::Number(v))
            }
            TokKind::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokKind::Ident(name) => {
                self.pos += 1;
                if let Some(func) = Func::from_name(&name) {
                    match self.peek() {
                        Some(Token {
                            kind: TokKind::LParen,
                            ..
                        }) => self.pos += 1,
                        _ => return Err(self.error("`(` after function name")),
                    }
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match name.as_str() {
                    "pi" => Ok(Expr::Const(Constant::Pi)),
                    "e" => Ok(Expr::Const(Constant::E)),
                    n if KNOWN_VARIABLES.contains(&n) => Ok(Expr::Var(name)),
                    _ => Err(ParseError {
                        offset: tok.offset,
                        expected: "variable (s, t, L), constant (pi, e) or function".into(),
                        found: format!("unknown identifier `{name}`"),
                    }),
                }
            }
            _ => Err(self.error("expression")),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Token {
                kind: TokKind::RParen,
                ..
            }) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error("`)`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(text: &str, s: f64) -> f64 {
        parse_expression(text).unwrap().eval_s(s, 3.1)
    }

    #[test]
    fn cosine_curvature_at_zero() {
        assert!((ev("0.3*cos(2*pi*s/3.1)", 0.0) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(ev("2^3^2", 0.0), 512.0);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(ev("-2^2", 0.0), -4.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
        assert_eq!(ev("(-2)^2", 0.0), 4.0);
    }

    #[test]
    fn precedence_and_length_binding() {
        assert_eq!(ev("1 + 2*3 - 4/2", 0.0), 5.0);
        assert!((ev("L/2 - s", 1.0) - 0.55).abs() < 1e-15);
        assert!((ev("1.5e-1*s", 2.0) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn unclosed_call_reports_end_offset() {
        let err = parse_expression("sin(").unwrap_err();
        assert_eq!(err.offset, 4);
        assert_eq!(err.found, "end of input");
    }

    #[test]
    fn rejects_unknown_identifier_and_implicit_product() {
        let err = parse_expression("x + 1").unwrap_err();
        assert_eq!(err.offset, 0);
        assert!(err.found.contains("unknown identifier"));
        let err = parse_expression("2 s").unwrap_err();
        assert_eq!(err.offset, 2);
        assert!(parse_expression("sin s").is_err());
        assert!(parse_expression("1 + $").is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let cases = [
            "t^2",
            "sin(t)*exp(-t)",
            "sqrt(1 + t^2)",
            "log(2 + t)/(1 + t^2)",
            "tan(t/3)",
            "t^t",
            "abs(t - 3)",
            "cos(t)^3",
        ];
        for text in cases {
            let e = parse_expression(text).unwrap();
            let d = e.derivative("t");
            for &t in &[0.3, 0.9, 1.7] {
                let h = 1e-6;
                let fd = (e.eval_t(t + h) - e.eval_t(t - h)) / (2.0 * h);
                let exact = d.eval_t(t);
                assert!(
                    (fd - exact).abs() < 1e-6 * (1.0 + exact.abs()),
                    "{text} at {t}: {fd} vs {exact}"
                );
            }
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Number),
            Just(Expr::Var("s".into())),
            Just(Expr::Var("L".into())),
            Just(Expr::Const(Constant::Pi)),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
                inner.prop_map(|a| Expr::Call(Func::Cos, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_print_is_fixed_point(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse_expression(&printed).unwrap();
            prop_assert_eq!(reparsed.to_string(), printed.clone());
            // and the tree itself survives
            let a = e.eval_s(0.7, 2.0);
            let b = reparsed.eval_s(0.7, 2.0);
            prop_assert!(a == b || (a.is_nan() && b.is_nan()), "{} vs {} for {}", a, b, printed);
        }
    }
}
