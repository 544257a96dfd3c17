//! Boundary functionals and the perturbed Hammerstein operator
//! `T(u)(t) = H1[u]·γ(t) + H2[u] + ∫₀¹ K(t,s) f(s, u(s), ρ) ds`.

use rayon::prelude::*;

use crate::error::Result;
use crate::expr::{Bindings, Expr, Var};
use crate::grid::GridFunction;
use crate::kernel::KernelParams;
use crate::problem::{FunctionalSpec, ProblemSpec, Term};
use crate::quad::{simpson, KernelRow, QuadratureRule};

/// A boundary functional came out negative although the theory assumes
/// `H ≥ 0`. Reported, never fatal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonNegativityWarning {
    pub functional: &'static str,
    pub value: f64,
}

impl std::fmt::Display for NonNegativityWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} evaluated to {:e} < 0", self.functional, self.value)
    }
}

/// `H[u]`: point terms use linear interpolation, integral terms Simpson on the grid.
pub fn eval_functional(h: &FunctionalSpec, u: &GridFunction, rho: f64) -> Result<f64> {
    let rho_only = Bindings::new().with(Var::Rho, rho);
    let mut total = 0.0;
    for term in &h.terms {
        match term {
            Term::PointEval { t0, coef } => total += coef.eval(&rho_only)? * u.interp(*t0),
            Term::Integral { integrand, coef } => {
                let c = coef.eval(&rho_only)?;
                let mut b = rho_only;
                let mut vals = Vec::with_capacity(u.len());
                for (s, &us) in u.nodes().zip(u.values()) {
                    b.set(Var::S, s);
                    b.set(Var::U, us);
                    vals.push(integrand.eval(&b)?);
                }
                total += c * simpson(&vals)?;
            }
        }
    }
    Ok(total)
}

/// Output of one application of `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    pub values: GridFunction,
    pub h1: f64,
    pub h2: f64,
    pub warnings: Vec<NonNegativityWarning>,
}

/// `T` on a fixed grid with the kernel rows precomputed.
#[derive(Debug, Clone)]
pub struct HammersteinOperator<'a> {
    spec: &'a ProblemSpec,
    params: KernelParams,
    n: usize,
    rows: Vec<KernelRow>,
}

impl<'a> HammersteinOperator<'a> {
    pub fn new(spec: &'a ProblemSpec, n: usize, rule: &QuadratureRule) -> Result<Self> {
        // validates n
        let probe = GridFunction::constant(n, 0.0)?;
        let params = KernelParams::from_spec(spec);
        let ts: Vec<f64> = probe.nodes().collect();
        let rows = ts.par_iter().map(|&t| KernelRow::new(t, 1.0, &params, rule)).collect();
        Ok(HammersteinOperator { spec, params, n, rows })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn spec(&self) -> &ProblemSpec {
        self.spec
    }

    pub fn grid_len(&self) -> usize {
        self.n
    }

    pub fn apply(&self, u: &GridFunction, rho: f64) -> Result<Applied> {
        assert_eq!(u.len(), self.n, "grid size mismatch");
        let h1 = eval_functional(&self.spec.h1, u, rho)?;
        let h2 = eval_functional(&self.spec.h2, u, rho)?;
        let mut warnings = Vec::new();
        for (name, v) in [("H1", h1), ("H2", h2)] {
            if v < 0.0 {
                let w = NonNegativityWarning { functional: name, value: v };
                log::warn!("{w}");
                warnings.push(w);
            }
        }
        let f: &Expr = &self.spec.f;
        let h = u.step();
        // each row is summed sequentially, so the result does not depend on scheduling
        let results: Vec<Result<f64>> = self
            .rows
            .par_iter()
            .enumerate()
            .map(|(k, row)| {
                let mut b = Bindings::new().with(Var::Rho, rho);
                let integral = row.integrate(|s| {
                    b.set(Var::T, s);
                    b.set(Var::U, u.interp(s));
                    f.eval(&b)
                })?;
                Ok(h1 * self.params.gamma_line(k as f64 * h) + h2 + integral)
            })
            .collect();
        let values = results.into_iter().collect::<Result<Vec<f64>>>()?;
        Ok(Applied { values: GridFunction::new(values)?, h1, h2, warnings })
    }
}

/// One-shot `T(u)`; builds the kernel rows for `u`'s grid.
pub fn apply_t(u: &GridFunction, spec: &ProblemSpec, rho: f64, rule: &QuadratureRule) -> Result<GridFunction> {
    Ok(HammersteinOperator::new(spec, u.len(), rule)?.apply(u, rho)?.values)
}
