//! Problem-definition files.
//!
//! Line-oriented `key = value` text; `#` starts a comment. Mandatory keys are
//! `alpha`, `eta`, `beta`, `f`, `H1` and `H2`. Functionals are sums of
//! `COEF * u(T0)` and `COEF * int(EXPR)` terms, or the literal `0`.

use std::fmt;

use thiserror::Error;

use crate::expr::{BinOp, Expr, ExprError, Parser, Raw, VarSet};

/// One additive term of a boundary functional.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    /// `coef(rho) * u(t0)`
    PointEval { t0: f64, coef: Expr },
    /// `coef(rho) * ∫₀¹ integrand(s, u(s), rho) ds`
    Integral { integrand: Expr, coef: Expr },
}

/// A boundary functional `H[u]`; an empty term list is the zero functional.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FunctionalSpec {
    pub terms: Vec<Term>,
}

impl FunctionalSpec {
    pub fn zero() -> Self {
        FunctionalSpec { terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn parse(source: &str) -> Result<Self, ExprError> {
        let mut p = Parser::new(source, VarSet::RHO, true);
        let raw = p.parse_all()?;
        if let Raw::Num(x) = raw {
            if x == 0.0 {
                return Ok(FunctionalSpec::zero());
            }
        }
        let mut terms = Vec::new();
        linearize(raw, Expr::Num(1.0), &mut terms)?;
        Ok(FunctionalSpec { terms })
    }
}

impl fmt::Display for FunctionalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, term) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match term {
                Term::PointEval { t0, coef } => write!(f, "{coef} * u({t0:?})")?,
                Term::Integral { integrand, coef } => write!(f, "{coef} * int({integrand})")?,
            }
        }
        Ok(())
    }
}

fn scaled(scale: &Expr, coef: Expr) -> Expr {
    match (scale, &coef) {
        (Expr::Num(a), _) if *a == 1.0 => coef,
        (_, Expr::Num(b)) if *b == 1.0 => scale.clone(),
        _ => Expr::bin(BinOp::Mul, scale.clone(), coef),
    }
}

/// Split a functional expression into terms, requiring linearity in the
/// atoms `u(T0)` / `int(...)`. Atom-free summands become `c * int(1)`.
fn linearize(raw: Raw, scale: Expr, out: &mut Vec<Term>) -> Result<(), ExprError> {
    let nonlinear = |what: &str| ExprError::Syntax {
        pos: 1,
        msg: format!("functional must be linear in u(..) and int(..) terms ({what})"),
    };
    if !raw.has_atoms() {
        let c = raw.into_expr().expect("atom-free");
        out.push(Term::Integral { integrand: Expr::Num(1.0), coef: scaled(&scale, c) });
        return Ok(());
    }
    match raw {
        Raw::PointEval(t0) => out.push(Term::PointEval { t0, coef: scale }),
        Raw::Integral(integrand) => out.push(Term::Integral { integrand, coef: scale }),
        Raw::Neg(a) => linearize(*a, scaled(&scale, Expr::Num(-1.0)), out)?,
        Raw::Bin(BinOp::Add, a, b) => {
            linearize(*a, scale.clone(), out)?;
            linearize(*b, scale, out)?;
        }
        Raw::Bin(BinOp::Sub, a, b) => {
            linearize(*a, scale.clone(), out)?;
            linearize(*b, scaled(&scale, Expr::Num(-1.0)), out)?;
        }
        Raw::Bin(BinOp::Mul, a, b) => match (a.has_atoms(), b.has_atoms()) {
            (true, true) => return Err(nonlinear("product of two functional terms")),
            (false, _) => linearize(*b, scaled(&scale, a.into_expr().expect("atom-free")), out)?,
            (true, false) => linearize(*a, scaled(&scale, b.into_expr().expect("atom-free")), out)?,
        },
        Raw::Bin(BinOp::Div, a, b) => {
            if b.has_atoms() {
                return Err(nonlinear("division by a functional term"));
            }
            let d = b.into_expr().expect("atom-free");
            let coef = match scale {
                Expr::Num(1.0) => Expr::bin(BinOp::Div, Expr::Num(1.0), d),
                s => Expr::bin(BinOp::Div, s, d),
            };
            linearize(*a, coef, out)?;
        }
        Raw::Bin(BinOp::Pow, ..) => return Err(nonlinear("power of a functional term")),
        Raw::Call(..) => return Err(nonlinear("function of a functional term")),
        Raw::Num(_) | Raw::Var(_) => unreachable!("atom-free handled above"),
    }
    Ok(())
}

/// The `beta` entry: a literal or one of the two threshold tokens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSpec {
    Value(f64),
    /// resolves to the kernel threshold `(1-eta)^(alpha-1) / Γ(alpha)`
    BetaK,
    /// resolves to the affine threshold `(1-eta) Γ(3-alpha)`
    BetaGamma,
}

impl fmt::Display for BetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaSpec::Value(x) => write!(f, "{x:?}"),
            BetaSpec::BetaK => f.write_str("betaK"),
            BetaSpec::BetaGamma => f.write_str("betaGamma"),
        }
    }
}

/// A validated problem definition.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub eta: f64,
    pub beta: BetaSpec,
    pub f: Expr,
    pub h1: FunctionalSpec,
    pub h2: FunctionalSpec,
    pub b: Option<f64>,
    pub delta_lo: Option<Expr>,
    pub delta_hi: Option<Expr>,
    pub eta1_lo: Option<Expr>,
    pub eta1_hi: Option<Expr>,
    pub eta2_lo: Option<Expr>,
    pub eta2_hi: Option<Expr>,
}

impl ProblemSpec {
    /// Minimal spec with zero functionals and no overrides.
    pub fn new(alpha: f64, eta: f64, beta: BetaSpec, f: Expr) -> Self {
        ProblemSpec {
            alpha,
            eta,
            beta,
            f,
            h1: FunctionalSpec::zero(),
            h2: FunctionalSpec::zero(),
            b: None,
            delta_lo: None,
            delta_hi: None,
            eta1_lo: None,
            eta1_hi: None,
            eta2_lo: None,
            eta2_hi: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("line {line}: `{key}`: {source}")]
    Expr {
        line: usize,
        key: String,
        #[source]
        source: ExprError,
    },
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("line {line}: `{key}` out of range: {reason}")]
    Range { line: usize, key: String, reason: String },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

impl SpecError {
    /// Line number of the offending entry (`None` for a missing key).
    pub fn line(&self) -> Option<usize> {
        match self {
            SpecError::Expr { line, .. } | SpecError::Range { line, .. } | SpecError::Malformed { line, .. } => {
                Some(*line)
            }
            SpecError::MissingKey(_) => None,
        }
    }
}

const KEYS: [&str; 13] =
    ["alpha", "eta", "beta", "f", "H1", "H2", "b", "delta_lo", "delta_hi", "eta1_lo", "eta1_hi", "eta2_lo", "eta2_hi"];

/// Parse and validate a problem file.
pub fn parse_problem(source: &str) -> Result<ProblemSpec, SpecError> {
    let mut entries: Vec<Option<(usize, String)>> = vec![None; KEYS.len()];
    for (idx, raw_line) in source.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| SpecError::Malformed { line, msg: format!("expected `key = value`, found `{content}`") })?;
        let key = key.trim();
        let value = value.trim();
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| SpecError::Malformed { line, msg: format!("unknown key `{key}`") })?;
        if value.is_empty() {
            return Err(SpecError::Malformed { line, msg: format!("empty value for `{key}`") });
        }
        if let Some((first, _)) = &entries[slot] {
            return Err(SpecError::Malformed {
                line,
                msg: format!("duplicate key `{key}` (first given on line {first})"),
            });
        }
        entries[slot] = Some((line, value.to_string()));
    }

    let get = |key: &str| -> Option<&(usize, String)> {
        let i = KEYS.iter().position(|k| *k == key).expect("known key");
        entries[i].as_ref()
    };
    let require = |key: &str| get(key).ok_or_else(|| SpecError::MissingKey(key.to_string()));

    let number = |key: &str, (line, text): &(usize, String)| -> Result<f64, SpecError> {
        let x: f64 = text.parse().map_err(|_| SpecError::Malformed {
            line: *line,
            msg: format!("`{key}` expects a number, found `{text}`"),
        })?;
        if !x.is_finite() {
            return Err(SpecError::Range { line: *line, key: key.into(), reason: "not finite".into() });
        }
        Ok(x)
    };
    let expr = |key: &str, allowed: VarSet, (line, text): &(usize, String)| -> Result<Expr, SpecError> {
        crate::expr::parse_expr(text, allowed).map_err(|source| SpecError::Expr {
            line: *line,
            key: key.into(),
            source,
        })
    };
    let functional = |key: &str, (line, text): &(usize, String)| -> Result<FunctionalSpec, SpecError> {
        FunctionalSpec::parse(text).map_err(|source| SpecError::Expr { line: *line, key: key.into(), source })
    };

    let alpha_e = require("alpha")?;
    let eta_e = require("eta")?;
    let beta_e = require("beta")?;
    let f_e = require("f")?;
    let h1_e = require("H1")?;
    let h2_e = require("H2")?;

    let alpha = number("alpha", alpha_e)?;
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(SpecError::Range {
            line: alpha_e.0,
            key: "alpha".into(),
            reason: format!("{alpha} not in (1, 2]"),
        });
    }
    let eta = number("eta", eta_e)?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(SpecError::Range { line: eta_e.0, key: "eta".into(), reason: format!("{eta} not in (0, 1)") });
    }
    let beta = match beta_e.1.as_str() {
        "betaK" => BetaSpec::BetaK,
        "betaGamma" => BetaSpec::BetaGamma,
        _ => {
            let x = number("beta", beta_e)?;
            if x <= 0.0 {
                return Err(SpecError::Range {
                    line: beta_e.0,
                    key: "beta".into(),
                    reason: format!("{x} is not positive"),
                });
            }
            BetaSpec::Value(x)
        }
    };
    let b = match get("b") {
        Some(e) => {
            let x = number("b", e)?;
            if !(x > 0.0 && x < 1.0) {
                return Err(SpecError::Range { line: e.0, key: "b".into(), reason: format!("{x} not in (0, 1)") });
            }
            Some(x)
        }
        None => None,
    };
    let optional = |key: &str, allowed: VarSet| get(key).map(|e| expr(key, allowed, e)).transpose();

    Ok(ProblemSpec {
        alpha,
        eta,
        beta,
        f: expr("f", VarSet::NONLINEARITY, f_e)?,
        h1: functional("H1", h1_e)?,
        h2: functional("H2", h2_e)?,
        b,
        delta_lo: optional("delta_lo", VarSet::T_RHO)?,
        delta_hi: optional("delta_hi", VarSet::T_RHO)?,
        eta1_lo: optional("eta1_lo", VarSet::RHO)?,
        eta1_hi: optional("eta1_hi", VarSet::RHO)?,
        eta2_lo: optional("eta2_lo", VarSet::RHO)?,
        eta2_hi: optional("eta2_hi", VarSet::RHO)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Bindings, Var};

    const CASE2: &str = include_str!("../../../problems/case2.prob");
    const CASE3: &str = include_str!("../../../problems/case3.prob");

    fn eval_h(h: &FunctionalSpec, rho: f64, u_at: f64, integral: f64) -> f64 {
        h.terms
            .iter()
            .map(|t| match t {
                Term::PointEval { coef, .. } => coef.eval(&Bindings::new().with(Var::Rho, rho)).unwrap() * u_at,
                Term::Integral { coef, .. } => coef.eval(&Bindings::new().with(Var::Rho, rho)).unwrap() * integral,
            })
            .sum()
    }

    #[test]
    fn shipped_case2_file_parses() {
        let spec = parse_problem(CASE2).unwrap();
        assert_eq!(spec.alpha, 1.8);
        assert_eq!(spec.eta, 0.6);
        assert_eq!(spec.beta, BetaSpec::BetaK);
        assert_eq!(spec.h1.terms.len(), 1);
        assert!(matches!(spec.h1.terms[0], Term::PointEval { t0, .. } if t0 == 0.2));
        assert!(matches!(spec.h2.terms[0], Term::Integral { .. }));
        assert!(spec.delta_lo.is_some() && spec.eta2_hi.is_some());
    }

    #[test]
    fn shipped_case3_file_parses() {
        let spec = parse_problem(CASE3).unwrap();
        assert_eq!(spec.beta, BetaSpec::Value(0.1));
        assert!(matches!(spec.h1.terms[0], Term::PointEval { t0, .. } if t0 == 0.25));
    }

    #[test]
    fn shipped_nonlinearities_match_hand_coded_formulas() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let f2 = parse_problem(CASE2).unwrap().f;
        let f3 = parse_problem(CASE3).unwrap().f;
        for _ in 0..20 {
            let t: f64 = rng.gen();
            let u: f64 = rng.gen_range(-3.0..3.0);
            let rho: f64 = rng.gen_range(0.1..5.0);
            let b = Bindings::t_u_rho(t, u, rho);
            assert_eq!(f2.eval(&b).unwrap(), t.powi(2) + u.powi(2) / (1.0 + rho.powi(2)));
            assert_eq!(f3.eval(&b).unwrap(), t / (1.0 + u.powi(2)));
        }
    }

    #[test]
    fn missing_eta_is_reported() {
        let src = "alpha = 1.5\nbeta = 1\nf = 1\nH1 = 0\nH2 = 0\n";
        assert_eq!(parse_problem(src), Err(SpecError::MissingKey("eta".into())));
    }

    #[test]
    fn alpha_out_of_range() {
        let src = "alpha = 2.5\neta = 0.5\nbeta = 1\nf = 1\nH1 = 0\nH2 = 0\n";
        assert!(matches!(parse_problem(src), Err(SpecError::Range { line: 1, ref key, .. }) if key == "alpha"));
        let src = "alpha = 1\neta = 0.5\nbeta = 1\nf = 1\nH1 = 0\nH2 = 0\n";
        assert!(matches!(parse_problem(src), Err(SpecError::Range { .. })));
    }

    #[test]
    fn other_range_and_format_errors_carry_lines() {
        let base = "alpha = 1.5\neta = 0.5\nbeta = 1\nf = 1\nH1 = 0\nH2 = 0\n";
        let cases = [
            (base.replace("eta = 0.5", "eta = 1"), 2),
            (base.replace("beta = 1", "beta = -1"), 3),
            (format!("{base}b = 1.2\n"), 7),
            (format!("{base}bogus = 1\n"), 7),
            (format!("{base}no equals sign\n"), 7),
            (format!("{base}alpha = 1.5\n"), 7),
            (base.replace("f = 1", "f = s + 1"), 4),
            (base.replace("H1 = 0", "H1 = u(1.5)"), 5),
            (base.replace("H2 = 0", "H2 = u(0.1) * u(0.2)"), 6),
            (base.replace("beta = 1", "beta = lots"), 3),
        ];
        for (src, line) in cases {
            let err = parse_problem(&src).unwrap_err();
            assert_eq!(err.line(), Some(line), "{src}: {err}");
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let src = "# header\n\nalpha = 1.5 # trailing\neta = 0.5\nbeta = betaGamma\nf = 1\nH1 = 0\nH2 = 0\n";
        let spec = parse_problem(src).unwrap();
        assert_eq!(spec.beta, BetaSpec::BetaGamma);
        assert!(spec.h1.is_zero() && spec.h2.is_zero());
    }

    #[test]
    fn functional_forms() {
        let h = FunctionalSpec::parse("(1/(1+rho)) * u(0.2)").unwrap();
        assert_eq!(eval_h(&h, 1.0, 1.0, 0.0), 0.5);
        let h = FunctionalSpec::parse("u(0.25)/(1+rho)").unwrap();
        assert_eq!(eval_h(&h, 3.0, 2.0, 0.0), 0.5);
        let h = FunctionalSpec::parse("(1/10) * int(u^2) - 2*u(1/4) + 3").unwrap();
        assert_eq!(h.terms.len(), 3);
        assert!(matches!(&h.terms[1], Term::PointEval { t0, .. } if *t0 == 0.25));
        assert_eq!(eval_h(&h, 1.0, 1.0, 10.0), 1.0 - 2.0 + 3.0 * 10.0);
        let h = FunctionalSpec::parse("-(int(s*u) + u(0))").unwrap();
        assert_eq!(eval_h(&h, 1.0, 1.0, 1.0), -2.0);
        assert!(FunctionalSpec::parse("int(u)^2").is_err());
        assert!(FunctionalSpec::parse("1/u(0.5)").is_err());
        assert!(FunctionalSpec::parse("u(t)").is_err());
        assert!(FunctionalSpec::parse("int(t)").is_err());
        assert!(FunctionalSpec::parse("0").unwrap().is_zero());
    }

    #[test]
    fn functional_display_reparses() {
        let h = FunctionalSpec::parse("(1/10) * int(u^2) + u(0.2)/(1+rho)").unwrap();
        let back = FunctionalSpec::parse(&h.to_string()).unwrap();
        assert_eq!(back, h);
    }
}
