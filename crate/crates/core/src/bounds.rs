//! Sector bounds on `f`, `H1`, `H2` and the localization interval
//! `L(ρ) ≤ λ_ρ ≤ U(ρ)`.

use rayon::prelude::*;

use crate::eigen::{check_cone, solve_eigenpair, SolveOptions};
use crate::error::{Error, Result};
use crate::expr::{Bindings, Expr, Var};
use crate::kernel::{classify, CaseData, CaseId};
use crate::problem::{FunctionalSpec, ProblemSpec, Term};
use crate::quad::{integrate_on, simpson, KernelRow, QuadratureRule};

/// Sample count of the `u`-grid used to bound `f` and integrands over a sector.
pub const U_SAMPLES: usize = 257;
/// Relative slack of the `L ≤ λ ≤ U` check.
pub const SANDWICH_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    User,
    Sampled,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::User => "user",
            Provenance::Sampled => "sampled",
        })
    }
}

/// A pointwise envelope `t ↦ δ(t)` of `f(t, ·, ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Envelope {
    /// user expression in `{t, rho}`
    User { expr: Expr, rho: f64 },
    /// min (or max) of `f(t, u, ρ)` over `u_lo ≤ u ≤ u_hi`, clamped at 0
    Sampled { f: Expr, rho: f64, u_lo: f64, u_hi: f64, upper: bool },
}

impl Envelope {
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Envelope::User { expr, rho } => Ok(expr.eval(&Bindings::new().with(Var::T, t).with(Var::Rho, *rho))?),
            Envelope::Sampled { f, rho, u_lo, u_hi, upper } => {
                let mut b = Bindings::t_u_rho(t, 0.0, *rho);
                let mut acc = if *upper { f64::NEG_INFINITY } else { f64::INFINITY };
                for u in u_grid(*u_lo, *u_hi) {
                    b.set(Var::U, u);
                    let v = f.eval(&b)?;
                    acc = if *upper { acc.max(v) } else { acc.min(v) };
                }
                Ok(acc.max(0.0))
            }
        }
    }

    pub fn provenance(&self) -> Provenance {
        match self {
            Envelope::User { .. } => Provenance::User,
            Envelope::Sampled { .. } => Provenance::Sampled,
        }
    }
}

fn u_grid(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (U_SAMPLES - 1) as f64;
    (0..U_SAMPLES).map(move |i| if i == U_SAMPLES - 1 { hi } else { lo + i as f64 * step })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorBounds {
    pub rho: f64,
    /// `δ̲` on `[0, b]`
    pub delta_lo: Envelope,
    /// `δ̄` on `[0, 1]`
    pub delta_hi: Envelope,
    pub eta1_lo: f64,
    pub eta1_hi: f64,
    pub eta2_lo: f64,
    pub eta2_hi: f64,
    /// provenance of `eta1_lo, eta1_hi, eta2_lo, eta2_hi`
    pub eta_provenance: [Provenance; 4],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundsOptions {
    pub rule: QuadratureRule,
    /// use the cone floor `σρ` for point terms of `η̲` (off: `η̲ = 0`)
    pub sharpen_eta_lo: bool,
}

fn eval_rho(e: &Expr, rho: f64) -> Result<f64> {
    Ok(e.eval(&Bindings::new().with(Var::Rho, rho))?)
}

/// Extreme of `H[u]` over functions with values in `[lo_u, hi_u]`, term by term.
fn functional_extreme(h: &FunctionalSpec, rho: f64, lo_u: f64, hi_u: f64, upper: bool) -> Result<f64> {
    let pick = |a: f64, b: f64| if upper { a.max(b) } else { a.min(b) };
    let mut total = 0.0;
    for term in &h.terms {
        match term {
            Term::PointEval { coef, .. } => {
                let c = eval_rho(coef, rho)?;
                total += pick(c * lo_u, c * hi_u);
            }
            Term::Integral { integrand, coef } => {
                let c = eval_rho(coef, rho)?;
                // the sign of c decides whether the pointwise max or min is the worst case
                let want_max = (c >= 0.0) == upper;
                let mut b = Bindings::s_u_rho(0.0, 0.0, rho);
                let mut vals = Vec::with_capacity(U_SAMPLES);
                for k in 0..U_SAMPLES {
                    b.set(Var::S, k as f64 / (U_SAMPLES - 1) as f64);
                    let mut acc = if want_max { f64::NEG_INFINITY } else { f64::INFINITY };
                    for u in u_grid(lo_u, hi_u) {
                        b.set(Var::U, u);
                        let v = integrand.eval(&b)?;
                        acc = if want_max { acc.max(v) } else { acc.min(v) };
                    }
                    vals.push(acc);
                }
                total += c * simpson(&vals)?;
            }
        }
    }
    Ok(total.max(0.0))
}

/// Sector bounds at `ρ`: user overrides where given, sampled otherwise.
pub fn sector_bounds(spec: &ProblemSpec, rho: f64, case: &CaseData, opts: &BoundsOptions) -> Result<SectorBounds> {
    let (sig, tau) = (case.sigma, case.tau);
    let delta_lo = match &spec.delta_lo {
        Some(e) => Envelope::User { expr: e.clone(), rho },
        None => Envelope::Sampled { f: spec.f.clone(), rho, u_lo: sig * rho, u_hi: rho, upper: false },
    };
    let delta_hi = match &spec.delta_hi {
        Some(e) => Envelope::User { expr: e.clone(), rho },
        None => Envelope::Sampled { f: spec.f.clone(), rho, u_lo: tau * rho, u_hi: rho, upper: true },
    };

    let sharpen = |h: &FunctionalSpec| -> Result<f64> {
        let eligible = opts.sharpen_eta_lo
            && !matches!(case.case_id, CaseId::Case3 | CaseId::Mixed)
            && h.terms.iter().all(|t| match t {
                Term::PointEval { t0, .. } => *t0 <= case.b,
                Term::Integral { .. } => true,
            });
        if !eligible {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for term in &h.terms {
            let single = FunctionalSpec { terms: vec![term.clone()] };
            total += match term {
                Term::PointEval { .. } => functional_extreme(&single, rho, sig * rho, rho, false)?,
                Term::Integral { .. } => functional_extreme(&single, rho, tau * rho, rho, false)?,
            };
        }
        Ok(total.max(0.0))
    };

    let mut prov = [Provenance::Sampled; 4];
    let mut scalar = |slot: usize, user: &Option<Expr>, auto: &dyn Fn() -> Result<f64>| -> Result<f64> {
        match user {
            Some(e) => {
                prov[slot] = Provenance::User;
                eval_rho(e, rho)
            }
            None => auto(),
        }
    };
    let eta1_lo = scalar(0, &spec.eta1_lo, &|| sharpen(&spec.h1))?;
    let eta1_hi = scalar(1, &spec.eta1_hi, &|| functional_extreme(&spec.h1, rho, tau * rho, rho, true))?;
    let eta2_lo = scalar(2, &spec.eta2_lo, &|| sharpen(&spec.h2))?;
    let eta2_hi = scalar(3, &spec.eta2_hi, &|| functional_extreme(&spec.h2, rho, tau * rho, rho, true))?;

    let sb = SectorBounds { rho, delta_lo, delta_hi, eta1_lo, eta1_hi, eta2_lo, eta2_hi, eta_provenance: prov };
    check_overrides(spec, &sb, case)?;
    Ok(sb)
}

/// Cross-check user envelopes against `f` on the sample grid.
fn check_overrides(spec: &ProblemSpec, sb: &SectorBounds, case: &CaseData) -> Result<()> {
    const T_SAMPLES: usize = 65;
    let rho = sb.rho;
    let slack = |x: f64| 1e-12 * (1.0 + x.abs());
    for (name, lo, hi) in [("eta1", sb.eta1_lo, sb.eta1_hi), ("eta2", sb.eta2_lo, sb.eta2_hi)] {
        if lo < 0.0 || hi < 0.0 || lo > hi + slack(hi) {
            return Err(Error::InconsistentOverride {
                field: name,
                detail: format!("need 0 <= lo <= hi, got lo = {lo}, hi = {hi} at rho = {rho}"),
            });
        }
    }
    let mut b = Bindings::t_u_rho(0.0, 0.0, rho);
    if spec.delta_lo.is_some() {
        for i in 0..T_SAMPLES {
            let t = case.b * i as f64 / (T_SAMPLES - 1) as f64;
            let lo = sb.delta_lo.eval(t)?;
            b.set(Var::T, t);
            for u in u_grid(case.sigma * rho, rho) {
                b.set(Var::U, u);
                let f = spec.f.eval(&b)?;
                if lo > f + slack(f) || lo < 0.0 {
                    return Err(Error::InconsistentOverride {
                        field: "delta_lo",
                        detail: format!("delta_lo({t}) = {lo} but f({t}, {u}, {rho}) = {f}"),
                    });
                }
            }
        }
    }
    if spec.delta_hi.is_some() {
        for i in 0..T_SAMPLES {
            let t = i as f64 / (T_SAMPLES - 1) as f64;
            let hi = sb.delta_hi.eval(t)?;
            b.set(Var::T, t);
            for u in u_grid(case.tau * rho, rho) {
                b.set(Var::U, u);
                let f = spec.f.eval(&b)?;
                if hi < f - slack(f) {
                    return Err(Error::InconsistentOverride {
                        field: "delta_hi",
                        detail: format!("delta_hi({t}) = {hi} but f({t}, {u}, {rho}) = {f}"),
                    });
                }
            }
        }
    }
    Ok(())
}

/// `L(ρ)`, `U(ρ)` and the denominator of `U` (`U = +∞` when it is not positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Localization {
    pub l: f64,
    pub u: f64,
    pub l_denominator: f64,
    pub u_denominator: f64,
}

impl Localization {
    pub fn hypothesis_holds(&self) -> bool {
        self.u_denominator > 0.0
    }

    /// `L ≤ λ ≤ U` up to [`SANDWICH_SLACK`].
    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.l * (1.0 - SANDWICH_SLACK) && lambda <= self.u * (1.0 + SANDWICH_SLACK)
    }
}

pub fn localize(sb: &SectorBounds, case: &CaseData, rule: &QuadratureRule) -> Result<Localization> {
    let p = &case.params;
    let rho = sb.rho;
    let hi_int = integrate_on(0.0, 1.0, &[p.eta], |s| sb.delta_hi.eval(s), rule)?;
    let l_denominator = sb.eta1_hi * p.gamma_sup() + sb.eta2_hi + case.phi * hi_int;
    let row = KernelRow::new(0.0, case.b, p, rule);
    let lo_int = row.integrate(|s| sb.delta_lo.eval(s))?;
    let u_denominator = sb.eta1_lo * p.gamma_line(0.0) + sb.eta2_lo + lo_int;
    let l = if l_denominator > 0.0 { rho / l_denominator } else { f64::INFINITY };
    let u = if u_denominator > 0.0 { rho / u_denominator } else { f64::INFINITY };
    Ok(Localization { l, u, l_denominator, u_denominator })
}

/// `[L(ρ), U(ρ)]`; fails with `HypothesisFail` when `U` has no positive denominator.
pub fn compute_l_u(
    spec: &ProblemSpec,
    rho: f64,
    b_override: Option<f64>,
    opts: &BoundsOptions,
) -> Result<Localization> {
    check_rho(rho)?;
    let case = classify(spec, b_override)?;
    let sb = sector_bounds(spec, rho, &case, opts)?;
    let loc = localize(&sb, &case, &opts.rule)?;
    if !loc.hypothesis_holds() {
        return Err(Error::HypothesisFail { rho, denominator: loc.u_denominator });
    }
    Ok(loc)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("rho must be positive and finite, got {rho}")))
    }
}

/// One line of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRow {
    pub rho: f64,
    pub l: f64,
    pub u: f64,
    pub lambda: Option<f64>,
    pub converged: Option<bool>,
    pub cone_ok: Option<bool>,
    pub in_interval: Option<bool>,
    /// what went wrong for this row, if anything
    pub error: Option<String>,
}

impl BoundsRow {
    fn failed(rho: f64, msg: String) -> Self {
        BoundsRow {
            rho,
            l: f64::NAN,
            u: f64::NAN,
            lambda: None,
            converged: None,
            cone_ok: None,
            in_interval: None,
            error: Some(msg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepOptions {
    pub solve: SolveOptions,
    pub bounds: BoundsOptions,
}

/// Bounds (and optionally an eigenpair) for one `ρ`; never fails, errors land in the row.
pub fn bounds_row(spec: &ProblemSpec, rho: f64, solve: bool, opts: &SweepOptions) -> BoundsRow {
    if let Err(e) = check_rho(rho) {
        return BoundsRow::failed(rho, e.to_string());
    }
    let case = match classify(spec, opts.solve.b_override) {
        Ok(c) => c,
        Err(e) => return BoundsRow::failed(rho, e.to_string()),
    };
    let loc = match sector_bounds(spec, rho, &case, &opts.bounds).and_then(|sb| localize(&sb, &case, &opts.bounds.rule))
    {
        Ok(l) => l,
        Err(e) => return BoundsRow::failed(rho, e.to_string()),
    };
    let mut row = BoundsRow {
        rho,
        l: loc.l,
        u: loc.u,
        lambda: None,
        converged: None,
        cone_ok: None,
        in_interval: None,
        error: None,
    };
    if !loc.hypothesis_holds() {
        row.error = Some(Error::HypothesisFail { rho, denominator: loc.u_denominator }.to_string());
    }
    if solve {
        let outcome = match solve_eigenpair(spec, rho, &opts.solve) {
            Ok(ep) => Some((ep, true)),
            Err(Error::NonConvergence(nc)) => {
                row.error.get_or_insert_with(|| format!("no convergence after {} iterations", nc.iterations));
                Some((nc.eigenpair, false))
            }
            Err(e) => {
                row.error.get_or_insert(e.to_string());
                None
            }
        };
        if let Some((ep, converged)) = outcome {
            row.lambda = Some(ep.lambda);
            row.converged = Some(converged);
            row.cone_ok = Some(check_cone(&ep.u, &case).satisfied);
            row.in_interval = Some(loc.contains(ep.lambda));
        }
    }
    row
}

/// One row per `ρ`, in input order, computed on `jobs` worker threads.
pub fn sweep(
    spec: &ProblemSpec,
    rhos: &[f64],
    solve: bool,
    opts: &SweepOptions,
    jobs: usize,
) -> Result<Vec<BoundsRow>> {
    if rhos.is_empty() {
        return Err(Error::InvalidArgument("no rho values to sweep".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(|| rhos.par_iter().map(|&rho| bounds_row(spec, rho, solve, opts)).collect()))
}

/// `count` equispaced values from `start` to `stop` inclusive.
pub fn rho_range(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidArgument("rho range needs at least one point".into()));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| if i == count - 1 { stop } else { start + i as f64 * step }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, VarSet};
    use crate::problem::{parse_problem, BetaSpec};

    fn f_expr(src: &str) -> Expr {
        parse_expr(src, VarSet::NONLINEARITY).unwrap()
    }

    #[test]
    fn case2_example_uses_overrides() {
        let spec = parse_problem(include_str!("../../../problems/case2.prob")).unwrap();
        let case = classify(&spec, None).unwrap();
        for rho in [0.5, 1.0, 2.0] {
            let sb = sector_bounds(&spec, rho, &case, &BoundsOptions::default()).unwrap();
            assert_eq!(sb.delta_lo.provenance(), Provenance::User);
            for t in [0.0, 0.3, 0.8] {
                assert!((sb.delta_lo.eval(t).unwrap() - t * t).abs() < 1e-15);
                let hi = t * t + rho * rho / (1.0 + rho * rho);
                assert!((sb.delta_hi.eval(t).unwrap() - hi).abs() < 1e-15);
            }
            assert!((sb.eta1_hi - rho / (1.0 + rho)).abs() < 1e-15);
            assert!((sb.eta2_hi - rho * rho / 10.0).abs() < 1e-15);
            assert_eq!((sb.eta1_lo, sb.eta2_lo), (0.0, 0.0));
        }
    }

    #[test]
    fn case2_lower_bound_closed_form() {
        let spec = parse_problem(include_str!("../../../problems/case2.prob")).unwrap();
        let loc = compute_l_u(&spec, 1.0, None, &BoundsOptions::default()).unwrap();
        let want = 0.586_385_841_347_709_3;
        assert!((loc.l - want).abs() <= 1e-12 * want, "{}", loc.l);
        assert!(loc.u.is_finite() && loc.u > loc.l);
    }

    #[test]
    fn case3_example_uses_overrides() {
        let spec = parse_problem(include_str!("../../../problems/case3.prob")).unwrap();
        let case = classify(&spec, None).unwrap();
        let rho = 2.0;
        let sb = sector_bounds(&spec, rho, &case, &BoundsOptions::default()).unwrap();
        assert!((sb.delta_lo.eval(0.4).unwrap() - 0.4 / 5.0).abs() < 1e-15);
        assert_eq!(sb.delta_hi.eval(0.4).unwrap(), 0.4);
        assert!((sb.eta1_hi - 2.0 / 3.0).abs() < 1e-15);
        assert!((sb.eta2_hi - 0.2).abs() < 1e-15);
    }

    #[test]
    fn constant_f_has_flat_envelopes() {
        let spec = ProblemSpec::new(1.5, 0.5, BetaSpec::Value(0.1), f_expr("1"));
        let case = classify(&spec, None).unwrap();
        let sb = sector_bounds(&spec, 3.0, &case, &BoundsOptions::default()).unwrap();
        for t in [0.0, 0.25, 0.5] {
            assert_eq!(sb.delta_lo.eval(t).unwrap(), 1.0);
            assert_eq!(sb.delta_hi.eval(t).unwrap(), 1.0);
        }
    }

    #[test]
    fn sampled_envelopes_bracket_f() {
        let spec = ProblemSpec::new(1.7, 0.4, BetaSpec::Value(0.9), f_expr("t + sin(3*u)^2 + u/(1+rho)"));
        let case = classify(&spec, None).unwrap();
        let rho = 1.3;
        let sb = sector_bounds(&spec, rho, &case, &BoundsOptions::default()).unwrap();
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            for u in u_grid(case.sigma * rho, rho) {
                let f = spec.f.eval(&Bindings::t_u_rho(t, u, rho)).unwrap();
                assert!(sb.delta_hi.eval(t).unwrap() >= f);
                if t <= case.b {
                    assert!(sb.delta_lo.eval(t).unwrap() <= f);
                }
            }
        }
    }

    #[test]
    fn zero_operator_fails_the_hypothesis() {
        let spec = ProblemSpec::new(1.5, 0.5, BetaSpec::Value(1.0), f_expr("0"));
        assert!(matches!(
            compute_l_u(&spec, 1.0, None, &BoundsOptions::default()),
            Err(Error::HypothesisFail { denominator, .. }) if denominator == 0.0
        ));
        let row = bounds_row(&spec, 1.0, false, &SweepOptions::default());
        assert_eq!(row.u, f64::INFINITY);
        assert!(row.error.is_some());
    }

    #[test]
    fn inconsistent_override_is_rejected() {
        let mut spec = ProblemSpec::new(1.5, 0.5, BetaSpec::Value(1.0), f_expr("t"));
        spec.delta_lo = Some(parse_expr("t + 0.1", VarSet::T_RHO).unwrap());
        let err = compute_l_u(&spec, 1.0, None, &BoundsOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InconsistentOverride { field: "delta_lo", .. }));

        let mut spec = ProblemSpec::new(1.5, 0.5, BetaSpec::Value(1.0), f_expr("t"));
        spec.eta1_lo = Some(parse_expr("2", VarSet::RHO).unwrap());
        spec.eta1_hi = Some(parse_expr("1", VarSet::RHO).unwrap());
        assert!(matches!(
            compute_l_u(&spec, 1.0, None, &BoundsOptions::default()),
            Err(Error::InconsistentOverride { field: "eta1", .. })
        ));
    }

    #[test]
    fn functional_bounds_from_terms() {
        let h = FunctionalSpec::parse("(1/(1+rho)) * u(0.2) + (1/10) * int(u^2)").unwrap();
        let rho = 2.0;
        let hi = functional_extreme(&h, rho, 0.0, rho, true).unwrap();
        let want = rho / (1.0 + rho) + rho * rho / 10.0;
        assert!((hi - want).abs() < 1e-14);
        let lo = functional_extreme(&h, rho, 0.5, rho, false).unwrap();
        assert!((lo - (0.5 / 3.0 + 0.025)).abs() < 1e-14);
    }

    #[test]
    fn sharpening_is_opt_in() {
        let mut spec = ProblemSpec::new(2.0, 0.5, BetaSpec::Value(1.0), f_expr("1"));
        spec.h1 = FunctionalSpec::parse("u(0.5)").unwrap();
        let case = classify(&spec, None).unwrap();
        let plain = sector_bounds(&spec, 1.0, &case, &BoundsOptions::default()).unwrap();
        assert_eq!(plain.eta1_lo, 0.0);
        let opts = BoundsOptions { sharpen_eta_lo: true, ..Default::default() };
        let sharp = sector_bounds(&spec, 1.0, &case, &opts).unwrap();
        assert!((sharp.eta1_lo - case.sigma).abs() < 1e-15);
    }

    #[test]
    fn ranges() {
        assert_eq!(rho_range(0.25, 4.0, 16).unwrap().len(), 16);
        assert_eq!(rho_range(1.0, 2.0, 3).unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(rho_range(1.0, 2.0, 1).unwrap(), vec![1.0]);
        assert!(rho_range(1.0, 2.0, 0).is_err());
        assert!(sweep(
            &ProblemSpec::new(1.5, 0.5, BetaSpec::Value(1.0), f_expr("1")),
            &[],
            false,
            &SweepOptions::default(),
            1
        )
        .is_err());
    }
}
