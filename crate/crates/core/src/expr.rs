//! Arithmetic mini-language used for `f(t,u)`, functional integrands,
//! coefficients and sector-bound overrides.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          right-associative
//! primary := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'
//! ```
//!
//! Variables are drawn from `{t, u, s, rho}`; each context restricts the set
//! further (see [`VarSet`]).

use std::fmt;

use thiserror::Error;

/// A free variable of the mini-language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    T,
    U,
    S,
    Rho,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::U => "u",
            Var::S => "s",
            Var::Rho => "rho",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "t" => Some(Var::T),
            "u" => Some(Var::U),
            "s" => Some(Var::S),
            "rho" => Some(Var::Rho),
            _ => None,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// Set of variables permitted in a parsing context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarSet(u8);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);
    /// `f(t, u, rho)`
    pub const NONLINEARITY: VarSet = VarSet(0b1011);
    /// functional integrands `g(s, u, rho)`
    pub const INTEGRAND: VarSet = VarSet(0b1110);
    /// functional coefficients and scalar bound overrides
    pub const RHO: VarSet = VarSet(0b1000);
    /// pointwise bound overrides `delta(t, rho)`
    pub const T_RHO: VarSet = VarSet(0b1001);
    pub const ALL: VarSet = VarSet(0b1111);

    pub fn of(vars: &[Var]) -> VarSet {
        VarSet(vars.iter().fold(0, |acc, v| acc | (1 << v.slot())))
    }

    pub fn contains(self, v: Var) -> bool {
        self.0 & (1 << v.slot()) != 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Sqrt,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Log => "log",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "log" => Func::Log,
            _ => return None,
        })
    }
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at column {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at column {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("unknown function `{name}` at column {pos}")]
    UnknownFunction { name: String, pos: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{0}")]
    Domain(String),
    #[error("no value bound for variable `{}`", .0.name())]
    MissingBinding(Var),
}

/// Values for the free variables of an expression.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    slots: [Option<f64>; 4],
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, v: Var, value: f64) -> Self {
        self.slots[v.slot()] = Some(value);
        self
    }

    pub fn set(&mut self, v: Var, value: f64) {
        self.slots[v.slot()] = Some(value);
    }

    pub fn get(&self, v: Var) -> Option<f64> {
        self.slots[v.slot()]
    }

    /// Build bindings from `(name, value)` pairs; unknown names are rejected.
    pub fn from_pairs(pairs: &[(&str, f64)]) -> Result<Self, EvalError> {
        let mut b = Bindings::new();
        for &(name, value) in pairs {
            let v = Var::from_name(name).ok_or_else(|| EvalError::Domain(format!("unknown variable `{name}`")))?;
            b.set(v, value);
        }
        Ok(b)
    }

    pub fn t_u_rho(t: f64, u: f64, rho: f64) -> Self {
        Bindings { slots: [Some(t), Some(u), None, Some(rho)] }
    }

    pub fn s_u_rho(s: f64, u: f64, rho: f64) -> Self {
        Bindings { slots: [None, Some(u), Some(s), Some(rho)] }
    }
}

impl Expr {
    pub fn num(x: f64) -> Expr {
        Expr::Num(x)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(x) if *x == 0.0)
    }

    /// All variables occurring in the tree.
    pub fn vars(&self) -> VarSet {
        match self {
            Expr::Num(_) => VarSet::EMPTY,
            Expr::Var(v) => VarSet::of(&[*v]),
            Expr::Neg(a) | Expr::Call(_, a) => a.vars(),
            Expr::Bin(_, a, b) => VarSet(a.vars().0 | b.vars().0),
        }
    }

    /// Evaluate; NaN and infinite results are reported as domain errors.
    pub fn eval(&self, b: &Bindings) -> Result<f64, EvalError> {
        let x = match self {
            Expr::Num(x) => *x,
            Expr::Var(v) => b.get(*v).ok_or(EvalError::MissingBinding(*v))?,
            Expr::Neg(a) => -a.eval(b)?,
            Expr::Bin(op, l, r) => {
                let x = l.eval(b)?;
                match op {
                    BinOp::Add => x + r.eval(b)?,
                    BinOp::Sub => x - r.eval(b)?,
                    BinOp::Mul => x * r.eval(b)?,
                    BinOp::Div => {
                        let y = r.eval(b)?;
                        if y == 0.0 {
                            return Err(EvalError::Domain("division by zero".into()));
                        }
                        x / y
                    }
                    BinOp::Pow => match **r {
                        Expr::Num(p) if p.fract() == 0.0 && p.abs() <= 64.0 => {
                            if x == 0.0 && p < 0.0 {
                                return Err(EvalError::Domain("zero raised to a negative power".into()));
                            }
                            x.powi(p as i32)
                        }
                        _ => {
                            let p = r.eval(b)?;
                            if x < 0.0 && p.fract() != 0.0 {
                                return Err(EvalError::Domain(format!(
                                    "negative base {x} raised to non-integer power {p}"
                                )));
                            }
                            if x == 0.0 && p < 0.0 {
                                return Err(EvalError::Domain("zero raised to a negative power".into()));
                            }
                            x.powf(p)
                        }
                    },
                }
            }
            Expr::Call(func, a) => {
                let x = a.eval(b)?;
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Abs => x.abs(),
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::Domain(format!("sqrt of negative value {x}")));
                        }
                        x.sqrt()
                    }
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(EvalError::Domain(format!("log of non-positive value {x}")));
                        }
                        x.ln()
                    }
                }
            }
        };
        if x.is_finite() {
            Ok(x)
        } else {
            Err(EvalError::Domain(format!("non-finite result in `{self}`")))
        }
    }
}

/// Fully parenthesised form; re-parsing it yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Parse `source` as an expression over `allowed`.
pub fn parse_expr(source: &str, allowed: VarSet) -> Result<Expr, ExprError> {
    let mut p = Parser::new(source, allowed, false);
    let raw = p.parse_all()?;
    Ok(raw.into_expr().expect("functional atoms are disabled in plain expressions"))
}

pub fn eval_expr(e: &Expr, bindings: &Bindings) -> Result<f64, EvalError> {
    e.eval(bindings)
}

// ---------------------------------------------------------------------------
// Lexer and parser shared with the functional syntax.

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = i + 1;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
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
            let text = &src[start..i];
            let x: f64 =
                text.parse().map_err(|_| ExprError::Syntax { pos: col, msg: format!("malformed number `{text}`") })?;
            out.push((Tok::Num(x), col));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), col));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => return Err(ExprError::Syntax { pos: col, msg: format!("unexpected character `{c}`") }),
            };
            out.push((tok, col));
            i += c.len_utf8();
        }
    }
    out.push((Tok::End, src.len() + 1));
    Ok(out)
}

/// Parse tree that may contain the functional atoms `u(T0)` and `int(EXPR)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Raw {
    Num(f64),
    Var(Var),
    Neg(Box<Raw>),
    Bin(BinOp, Box<Raw>, Box<Raw>),
    Call(Func, Box<Raw>),
    PointEval(f64),
    Integral(Expr),
}

impl Raw {
    pub(crate) fn has_atoms(&self) -> bool {
        match self {
            Raw::PointEval(_) | Raw::Integral(_) => true,
            Raw::Num(_) | Raw::Var(_) => false,
            Raw::Neg(a) | Raw::Call(_, a) => a.has_atoms(),
            Raw::Bin(_, a, b) => a.has_atoms() || b.has_atoms(),
        }
    }

    pub(crate) fn into_expr(self) -> Option<Expr> {
        Some(match self {
            Raw::Num(x) => Expr::Num(x),
            Raw::Var(v) => Expr::Var(v),
            Raw::Neg(a) => Expr::Neg(Box::new(a.into_expr()?)),
            Raw::Bin(op, a, b) => Expr::Bin(op, Box::new(a.into_expr()?), Box::new(b.into_expr()?)),
            Raw::Call(f, a) => Expr::Call(f, Box::new(a.into_expr()?)),
            Raw::PointEval(_) | Raw::Integral(_) => return None,
        })
    }
}

pub(crate) struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    allowed: VarSet,
    functional: bool,
    lex_error: Option<ExprError>,
}

impl Parser {
    pub(crate) fn new(src: &str, allowed: VarSet, functional: bool) -> Self {
        let (toks, lex_error) = match lex(src) {
            Ok(t) => (t, None),
            Err(e) => (vec![(Tok::End, 1)], Some(e)),
        };
        Parser { toks, pos: 0, allowed, functional, lex_error }
    }

    pub(crate) fn parse_all(&mut self) -> Result<Raw, ExprError> {
        if let Some(e) = self.lex_error.take() {
            return Err(e);
        }
        if self.peek() == &Tok::End {
            return Err(ExprError::Syntax { pos: 1, msg: "empty expression".into() });
        }
        let e = self.expr()?;
        match self.peek() {
            Tok::End => Ok(e),
            t => Err(self.syntax(format!("unexpected {}", describe(t)))),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, msg: String) -> ExprError {
        ExprError::Syntax { pos: self.col(), msg }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ExprError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(format!("expected {}, found {}", describe(&tok), describe(self.peek()))))
        }
    }

    fn expr(&mut self) -> Result<Raw, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Raw::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Raw, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Raw::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Raw, ExprError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            Ok(Raw::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Raw, ExprError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            Ok(Raw::Bin(BinOp::Pow, Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Raw, ExprError> {
        let col = self.col();
        match self.bump() {
            Tok::Num(x) => Ok(Raw::Num(x)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.call(name, col)
                } else {
                    match Var::from_name(&name) {
                        Some(v) if self.allowed.contains(v) => Ok(Raw::Var(v)),
                        _ => Err(ExprError::UnknownVariable { name, pos: col }),
                    }
                }
            }
            Tok::End => Err(ExprError::Syntax { pos: col, msg: "unexpected end of input".into() }),
            t => Err(ExprError::Syntax { pos: col, msg: format!("unexpected {}", describe(&t)) }),
        }
    }

    fn call(&mut self, name: String, col: usize) -> Result<Raw, ExprError> {
        self.expect(Tok::LParen)?;
        if self.functional && name == "u" {
            let saved = std::mem::replace(&mut self.allowed, VarSet::EMPTY);
            let inner = self.expr();
            self.allowed = saved;
            let inner = inner?;
            self.expect(Tok::RParen)?;
            if inner.has_atoms() {
                return Err(ExprError::Syntax { pos: col, msg: "nested functional inside u(...)".into() });
            }
            let t0 = inner
                .into_expr()
                .and_then(|e| e.eval(&Bindings::new()).ok())
                .ok_or_else(|| ExprError::Syntax { pos: col, msg: "u(...) needs a constant argument".into() })?;
            if !(0.0..=1.0).contains(&t0) {
                return Err(ExprError::Syntax { pos: col, msg: format!("evaluation point {t0} lies outside [0, 1]") });
            }
            return Ok(Raw::PointEval(t0));
        }
        if self.functional && name == "int" {
            let saved = std::mem::replace(&mut self.allowed, VarSet::INTEGRAND);
            let saved_mode = std::mem::replace(&mut self.functional, false);
            let inner = self.expr();
            self.allowed = saved;
            self.functional = saved_mode;
            let inner = inner?;
            self.expect(Tok::RParen)?;
            return Ok(Raw::Integral(inner.into_expr().expect("atoms disabled inside int(...)")));
        }
        let func = Func::from_name(&name).ok_or(ExprError::UnknownFunction { name, pos: col })?;
        let arg = self.expr()?;
        self.expect(Tok::RParen)?;
        Ok(Raw::Call(func, Box::new(arg)))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(x) => format!("number {x}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Expr {
        parse_expr(s, VarSet::ALL).unwrap()
    }

    fn n(x: f64) -> Expr {
        Expr::Num(x)
    }

    fn v(x: Var) -> Expr {
        Expr::Var(x)
    }

    #[test]
    fn nonlinearity_of_first_example_parses_to_expected_tree() {
        let e = parse_expr("t^2 + u^2/(1+rho^2)", VarSet::NONLINEARITY).unwrap();
        let want = Expr::bin(
            BinOp::Add,
            Expr::bin(BinOp::Pow, v(Var::T), n(2.0)),
            Expr::bin(
                BinOp::Div,
                Expr::bin(BinOp::Pow, v(Var::U), n(2.0)),
                Expr::bin(BinOp::Add, n(1.0), Expr::bin(BinOp::Pow, v(Var::Rho), n(2.0))),
            ),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn zero_literal() {
        assert_eq!(parse_expr("0", VarSet::EMPTY).unwrap(), n(0.0));
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(p("2^3^2").eval(&Bindings::new()).unwrap(), 512.0);
    }

    #[test]
    fn unary_minus_precedence() {
        let b = Bindings::new();
        assert_eq!(p("-2^2").eval(&b).unwrap(), -4.0);
        assert_eq!(p("-2*3").eval(&b).unwrap(), -6.0);
        assert_eq!(p("2^-1").eval(&b).unwrap(), 0.5);
        assert_eq!(p("8/2/2").eval(&b).unwrap(), 2.0);
        assert_eq!(p("8-2-2").eval(&b).unwrap(), 4.0);
        assert_eq!(p("1.5e1 + 2E-1").eval(&b).unwrap(), 15.2);
    }

    #[test]
    fn eval_examples() {
        let e = p("t/(1+u^2)");
        assert_eq!(e.eval(&Bindings::from_pairs(&[("t", 0.0), ("u", 5.0)]).unwrap()).unwrap(), 0.0);
        let e = p("t^2 + u^2/(1+rho^2)");
        assert_eq!(e.eval(&Bindings::t_u_rho(1.0, 0.0, 7.0)).unwrap(), 1.0);
        let e = p("s/(1+u^2)");
        assert_eq!(e.eval(&Bindings::s_u_rho(0.5, 1.0, 0.0)).unwrap(), 0.25);
    }

    #[test]
    fn functions_evaluate() {
        let b = Bindings::new().with(Var::T, 0.0);
        assert_eq!(p("exp(t) + cos(t) + sin(t) + abs(-3) + sqrt(4) + log(1)").eval(&b).unwrap(), 7.0);
    }

    #[test]
    fn rejects_variables_outside_context() {
        match parse_expr("s + 1", VarSet::NONLINEARITY) {
            Err(ExprError::UnknownVariable { name, pos }) => {
                assert_eq!(name, "s");
                assert_eq!(pos, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_expr("t * x", VarSet::ALL),
            Err(ExprError::UnknownVariable { ref name, pos: 5 }) if name == "x"
        ));
    }

    #[test]
    fn rejects_unknown_functions() {
        assert!(matches!(
            parse_expr("tan(t)", VarSet::ALL),
            Err(ExprError::UnknownFunction { ref name, .. }) if name == "tan"
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        for (src, pos) in [("1 +", 4), ("(1 + 2", 7), ("1 2", 3), ("2 $ 3", 3), ("", 1), ("*3", 1)] {
            match parse_expr(src, VarSet::ALL) {
                Err(ExprError::Syntax { pos: got, .. }) => assert_eq!(got, pos, "{src}"),
                other => panic!("{src}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn domain_errors_are_reported() {
        let b = Bindings::new().with(Var::T, 0.0);
        for src in ["1/t", "sqrt(t-1)", "log(t)", "(t-1)^0.5", "t^-1", "exp(1000)"] {
            assert!(matches!(p(src).eval(&b), Err(EvalError::Domain(_))), "{src}");
        }
        assert_eq!(p("u + 1").eval(&b), Err(EvalError::MissingBinding(Var::U)));
    }

    #[test]
    fn integer_powers_of_negative_bases_are_fine() {
        let b = Bindings::new().with(Var::U, -2.0);
        assert_eq!(p("u^2").eval(&b).unwrap(), 4.0);
        assert_eq!(p("u^3").eval(&b).unwrap(), -8.0);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..1e6).prop_map(Expr::Num),
            prop_oneof![Just(Var::T), Just(Var::U), Just(Var::S), Just(Var::Rho)].prop_map(Expr::Var),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
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
                    .prop_map(|(op, a, b)| Expr::bin(op, a, b)),
                (
                    prop_oneof![
                        Just(Func::Sin),
                        Just(Func::Cos),
                        Just(Func::Exp),
                        Just(Func::Abs),
                        Just(Func::Sqrt),
                        Just(Func::Log)
                    ],
                    inner
                )
                    .prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_then_parse_round_trips(e in arb_expr()) {
            let printed = e.to_string();
            let back = parse_expr(&printed, VarSet::ALL).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
