//! Eigenpairs of a nonlocal Caputo fractional thermostat problem:
//! Green's kernel, regime classification, the perturbed Hammerstein
//! operator, a normalized fixed-point eigensolver and the localization
//! interval `[L(ρ), U(ρ)]`.

pub mod bounds;
pub mod eigen;
pub mod emit;
pub mod error;
pub mod expr;
pub mod gamma;
pub mod grid;
pub mod hammerstein;
pub mod kernel;
pub mod problem;
pub mod quad;

pub use bounds::{
    bounds_row, compute_l_u, localize, rho_range, sector_bounds, sweep, BoundsOptions, BoundsRow, Envelope,
    Localization, Provenance, SectorBounds, SweepOptions,
};
pub use eigen::{
    check_cone, solve_eigenpair, verify_eigenfunction, verify_residuals, ConeReport, Eigenpair, NonConvergence,
    ResidualReport, SeedProfile, SolveOptions, Tolerances,
};
pub use emit::{
    emit_csv, emit_svg, fmt_g17, parse_csv, read_csv, read_eigenfunction, render_csv, render_eigenfunction, render_svg,
    write_eigenfunction,
};
pub use error::{Error, Result};
pub use expr::{eval_expr, parse_expr, Bindings, EvalError, Expr, ExprError, Var, VarSet};
pub use gamma::{gamma_fn, GammaDomainError};
pub use grid::{sup_norm, GridFunction};
pub use hammerstein::{apply_t, eval_functional, Applied, HammersteinOperator, NonNegativityWarning};
pub use kernel::{
    classify, classify_params, gamma_line, kernel_k, thresholds, thresholds_for, CaseData, CaseId, KernelParams,
    Thresholds, CASE2_TOL,
};
pub use problem::{parse_problem, BetaSpec, FunctionalSpec, ProblemSpec, SpecError, Term};
pub use quad::{
    caputo_high, caputo_low, derivative_at_zero, integrate_against_kernel, integrate_grid, integrate_on, simpson,
    KernelRow, QuadratureRule,
};
