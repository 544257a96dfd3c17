//! Eigenpairs `u = λT(u)` with `‖u‖_∞ = ρ` by normalized fixed-point
//! iteration, plus cone and residual checks.

use crate::error::{Error, Result};
use crate::expr::{Bindings, Var};
use crate::grid::GridFunction;
use crate::hammerstein::{eval_functional, HammersteinOperator, NonNegativityWarning};
use crate::kernel::{classify, CaseData, KernelParams};
use crate::problem::ProblemSpec;
use crate::quad::{caputo_high, caputo_low, derivative_at_zero, QuadratureRule};

/// Starting iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedProfile {
    /// `u₀ ≡ ρ`
    #[default]
    Constant,
    /// `ρ·γ⁺/‖γ⁺‖_∞`
    GammaLine,
    /// `u₀ ≡ σρ`
    Sigma,
}

impl std::str::FromStr for SeedProfile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "constant" => Ok(SeedProfile::Constant),
            "gamma" => Ok(SeedProfile::GammaLine),
            "sigma" => Ok(SeedProfile::Sigma),
            _ => Err(format!("unknown seed profile `{s}` (expected constant, gamma or sigma)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub fp: f64,
    pub bc1: f64,
    pub bc2: f64,
    pub ode: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { fp: 1e-8, bc1: 1e-3, bc2: 1e-2, ode: 1e-1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub grid_n: usize,
    pub rule: QuadratureRule,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: SeedProfile,
    /// relaxation `θ ∈ (0,1]`
    pub theta: f64,
    pub b_override: Option<f64>,
    pub tolerances: Tolerances,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            grid_n: 1025,
            rule: QuadratureRule::default(),
            tol: 1e-10,
            max_iter: 500,
            seed: SeedProfile::Constant,
            theta: 1.0,
            b_override: None,
            tolerances: Tolerances::default(),
        }
    }
}

/// Residuals of a candidate eigenpair, flagged against tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// `‖u − λT(u)‖_∞ / ρ`
    pub fp: f64,
    /// `|u'(0) + λH1[u]|`
    pub bc1: f64,
    /// `|β D^{α−1}u(1) + u(η) − λH2[u]|`
    pub bc2: f64,
    /// `max |D^α u + λf(t,u)|` over nodes in `[0.05, 0.95]`
    pub ode: f64,
    /// same over every node `t > 0`; informational
    pub ode_full: f64,
    pub tolerances: Tolerances,
}

impl ResidualReport {
    pub fn fp_ok(&self) -> bool {
        self.fp <= self.tolerances.fp
    }

    pub fn bc1_ok(&self) -> bool {
        self.bc1 <= self.tolerances.bc1
    }

    pub fn bc2_ok(&self) -> bool {
        self.bc2 <= self.tolerances.bc2
    }

    pub fn ode_ok(&self) -> bool {
        self.ode <= self.tolerances.ode
    }

    pub fn all_ok(&self) -> bool {
        self.fp_ok() && self.bc1_ok() && self.bc2_ok() && self.ode_ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub lambda: f64,
    pub u: GridFunction,
    pub rho: f64,
    pub iterations: usize,
    pub residuals: ResidualReport,
    pub warnings: Vec<NonNegativityWarning>,
}

impl Eigenpair {
    pub fn fp_residual(&self) -> f64 {
        self.residuals.fp
    }
}

/// The iteration stopped at `max_iter`; carries the last iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct NonConvergence {
    pub iterations: usize,
    pub last_step: f64,
    pub eigenpair: Eigenpair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeReport {
    pub sigma: f64,
    pub b: f64,
    pub min_on_0b: f64,
    pub sup_norm: f64,
    pub nonneg_required: bool,
    pub nonneg_on_01: bool,
    pub satisfied: bool,
}

impl ConeReport {
    fn evaluate(sigma: f64, b: f64, min_on_0b: f64, sup_norm: f64, nonneg_required: bool, nonneg_on_01: bool) -> Self {
        // relative slack absorbs the last-bit rounding of the normalization
        let floor_ok = min_on_0b >= sigma * sup_norm - 1e-12 * sup_norm;
        let satisfied = floor_ok && (!nonneg_required || nonneg_on_01);
        ConeReport { sigma, b, min_on_0b, sup_norm, nonneg_required, nonneg_on_01, satisfied }
    }
}

/// Discrete membership in the cone of the regime: `min_{t_k ≤ b} u ≥ σ‖u‖`,
/// and `u ≥ 0` everywhere in Case2.
pub fn check_cone(u: &GridFunction, case: &CaseData) -> ConeReport {
    let b = case.b;
    let min_on_0b =
        u.nodes().zip(u.values()).filter(|(t, _)| *t <= b + 1e-12).fold(f64::INFINITY, |m, (_, &v)| m.min(v));
    let nonneg = u.values().iter().all(|&v| v >= 0.0);
    ConeReport::evaluate(case.sigma, b, min_on_0b, u.sup_norm(), case.requires_nonneg(), nonneg)
}

fn seed(profile: SeedProfile, n: usize, rho: f64, case: &CaseData) -> Result<GridFunction> {
    match profile {
        SeedProfile::Constant => GridFunction::constant(n, rho),
        SeedProfile::Sigma => GridFunction::constant(n, case.sigma * rho),
        SeedProfile::GammaLine => {
            let g = GridFunction::from_fn(n, |t| case.params.gamma_line(t).max(0.0))?;
            let top = g.sup_norm();
            Ok(g.scaled(rho / top))
        }
    }
}

fn validate(rho: f64, opts: &SolveOptions) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidArgument(format!("rho must be positive and finite, got {rho}")));
    }
    if !(opts.theta > 0.0 && opts.theta <= 1.0) {
        return Err(Error::InvalidArgument(format!("theta must lie in (0, 1], got {}", opts.theta)));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {}", opts.tol)));
    }
    if opts.grid_n < 5 || opts.grid_n.is_multiple_of(2) {
        return Err(Error::GridTooSmall { n: opts.grid_n, min: 5 });
    }
    Ok(())
}

/// Run `u_{k+1} = ρT(u_k)/‖T(u_k)‖_∞` until successive iterates agree to `tol·ρ`.
pub fn solve_eigenpair(spec: &ProblemSpec, rho: f64, opts: &SolveOptions) -> Result<Eigenpair> {
    validate(rho, opts)?;
    let case = classify(spec, opts.b_override)?;
    let op = HammersteinOperator::new(spec, opts.grid_n, &opts.rule)?;
    let mut u = seed(opts.seed, opts.grid_n, rho, &case)?;
    let mut last_step = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let tu = op.apply(&u, rho)?.values;
        let norm = tu.sup_norm();
        if norm < 1e-300 {
            return Err(Error::BreakdownZeroNorm { iteration: iterations });
        }
        let mut next = tu.scaled(rho / norm);
        if opts.theta < 1.0 {
            next = u.combine(1.0 - opts.theta, &next, opts.theta);
            next = next.scaled(rho / next.sup_norm());
        }
        last_step = next.distance(&u) / rho;
        u = next;
        if last_step <= opts.tol {
            converged = true;
            break;
        }
    }
    let ep = finish(&op, u, rho, iterations, opts)?;
    if converged {
        log::debug!("rho = {rho}: converged in {iterations} iterations");
        Ok(ep)
    } else {
        Err(Error::NonConvergence(Box::new(NonConvergence { iterations, last_step, eigenpair: ep })))
    }
}

fn finish(
    op: &HammersteinOperator<'_>,
    u: GridFunction,
    rho: f64,
    iterations: usize,
    opts: &SolveOptions,
) -> Result<Eigenpair> {
    let applied = op.apply(&u, rho)?;
    let norm = applied.values.sup_norm();
    if norm < 1e-300 {
        return Err(Error::BreakdownZeroNorm { iteration: iterations });
    }
    let lambda = rho / norm;
    let residuals = residuals_with(op, &u, &applied.values, lambda, rho, opts.tolerances)?;
    Ok(Eigenpair { lambda, u, rho, iterations, residuals, warnings: applied.warnings })
}

fn residuals_with(
    op: &HammersteinOperator<'_>,
    u: &GridFunction,
    tu: &GridFunction,
    lambda: f64,
    rho: f64,
    tolerances: Tolerances,
) -> Result<ResidualReport> {
    let spec = op.spec();
    let p: &KernelParams = op.params();
    let fp = u.combine(1.0, tu, -lambda).sup_norm() / rho;

    let h1 = eval_functional(&spec.h1, u, rho)?;
    let h2 = eval_functional(&spec.h2, u, rho)?;
    let bc1 = (derivative_at_zero(u) + lambda * h1).abs();

    let flux = caputo_low(u, p.alpha - 1.0)?;
    let bc2 = (p.beta * flux[u.len() - 1] + u.interp(p.eta) - lambda * h2).abs();

    let d = caputo_high(u, p.alpha)?;
    let mut ode: f64 = 0.0;
    let mut ode_full: f64 = 0.0;
    let mut b = Bindings::new().with(Var::Rho, rho);
    for (k, t) in u.nodes().enumerate().skip(1) {
        b.set(Var::T, t);
        b.set(Var::U, u[k]);
        let r = (d[k] + lambda * spec.f.eval(&b)?).abs();
        ode_full = ode_full.max(r);
        if (0.05..=0.95).contains(&t) {
            ode = ode.max(r);
        }
    }
    Ok(ResidualReport { fp, bc1, bc2, ode, ode_full, tolerances })
}

/// Recompute all residuals of `(λ, u)` from scratch on `u`'s own grid.
pub fn verify_residuals(
    u: &GridFunction,
    lambda: f64,
    spec: &ProblemSpec,
    rho: f64,
    rule: &QuadratureRule,
    tolerances: Tolerances,
) -> Result<ResidualReport> {
    if u.len() < 5 {
        return Err(Error::GridTooSmall { n: u.len(), min: 5 });
    }
    let op = HammersteinOperator::new(spec, u.len(), rule)?;
    let tu = op.apply(u, rho)?.values;
    residuals_with(&op, u, &tu, lambda, rho, tolerances)
}

/// Residuals of a stored eigenfunction: `ρ = ‖u‖_∞` and `λ = ρ/‖T(u)‖_∞`.
pub fn verify_eigenfunction(
    u: &GridFunction,
    spec: &ProblemSpec,
    rule: &QuadratureRule,
    tolerances: Tolerances,
) -> Result<(f64, f64, ResidualReport)> {
    let rho = u.sup_norm();
    if rho == 0.0 {
        return Err(Error::InvalidArgument("eigenfunction is identically zero".into()));
    }
    if u.len() < 5 {
        return Err(Error::GridTooSmall { n: u.len(), min: 5 });
    }
    let op = HammersteinOperator::new(spec, u.len(), rule)?;
    let tu = op.apply(u, rho)?.values;
    let norm = tu.sup_norm();
    if norm < 1e-300 {
        return Err(Error::BreakdownZeroNorm { iteration: 0 });
    }
    let lambda = rho / norm;
    let report = residuals_with(&op, u, &tu, lambda, rho, tolerances)?;
    Ok((rho, lambda, report))
}
