//! Green's kernel `K(t,s)`, the affine function `γ(t)`, positivity thresholds,
//! regime classification and cone constants.

use std::fmt;

use crate::error::{Error, Result};
use crate::gamma::gamma;
use crate::problem::{BetaSpec, ProblemSpec};

/// Tolerance used to detect `β = max{β_K, β_γ}` for decimal input.
pub const CASE2_TOL: f64 = 1e-12;

/// `x^p` with the convention `0^p = 0`.
#[inline]
pub(crate) fn pow0(x: f64, p: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x.powf(p)
    }
}

/// Resolved `(α, η, β)` together with the Gamma values the kernel needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub alpha: f64,
    pub eta: f64,
    pub beta: f64,
    gamma_alpha: f64,
    gamma_3ma: f64,
}

impl KernelParams {
    pub fn new(alpha: f64, eta: f64, beta: f64) -> Self {
        KernelParams { alpha, eta, beta, gamma_alpha: gamma(alpha), gamma_3ma: gamma(3.0 - alpha) }
    }

    /// Resolves symbolic `betaK` / `betaGamma`.
    pub fn from_spec(spec: &ProblemSpec) -> Self {
        let beta = match spec.beta {
            BetaSpec::Value(b) => b,
            BetaSpec::BetaK => beta_k(spec.alpha, spec.eta),
            BetaSpec::BetaGamma => beta_gamma(spec.alpha, spec.eta),
        };
        KernelParams::new(spec.alpha, spec.eta, beta)
    }

    pub fn gamma_alpha(&self) -> f64 {
        self.gamma_alpha
    }

    pub fn gamma_3ma(&self) -> f64 {
        self.gamma_3ma
    }

    /// `K(t,s) = β + (η−s)^{α−1}/Γ(α)·[s ≤ η] − (t−s)^{α−1}/Γ(α)·[s ≤ t]`
    #[inline]
    pub fn kernel(&self, t: f64, s: f64) -> f64 {
        let p = self.alpha - 1.0;
        self.beta + (pow0(self.eta - s, p) - pow0(t - s, p)) / self.gamma_alpha
    }

    /// `γ(t) = β/Γ(3−α) + η − t`
    #[inline]
    pub fn gamma_line(&self, t: f64) -> f64 {
        self.beta / self.gamma_3ma + self.eta - t
    }

    /// `‖γ‖_∞` on `[0,1]`, read off the endpoints.
    pub fn gamma_sup(&self) -> f64 {
        self.gamma_line(0.0).abs().max(self.gamma_line(1.0).abs())
    }
}

pub fn kernel_k(t: f64, s: f64, params: &KernelParams) -> f64 {
    params.kernel(t, s)
}

pub fn gamma_line(t: f64, params: &KernelParams) -> f64 {
    params.gamma_line(t)
}

fn beta_k(alpha: f64, eta: f64) -> f64 {
    (1.0 - eta).powf(alpha - 1.0) / gamma(alpha)
}

fn beta_gamma(alpha: f64, eta: f64) -> f64 {
    (1.0 - eta) * gamma(3.0 - alpha)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub beta_k: f64,
    pub beta_gamma: f64,
    pub t_k: f64,
    pub t_gamma: f64,
    pub t_star: f64,
}

/// Thresholds for the resolved `β` of `spec`.
pub fn thresholds(spec: &ProblemSpec) -> Thresholds {
    thresholds_for(&KernelParams::from_spec(spec))
}

pub fn thresholds_for(p: &KernelParams) -> Thresholds {
    let t_k = p.eta + (p.beta * p.gamma_alpha).powf(1.0 / (p.alpha - 1.0));
    let t_gamma = p.eta + p.beta / p.gamma_3ma;
    Thresholds {
        beta_k: beta_k(p.alpha, p.eta),
        beta_gamma: beta_gamma(p.alpha, p.eta),
        t_k,
        t_gamma,
        t_star: t_k.min(t_gamma),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    /// `β > max{β_K, β_γ}`: `K > 0` and `γ > 0` everywhere
    Case1,
    /// `β = max{β_K, β_γ}`: non-negative with a zero at `t = 1`
    Case2,
    /// `β < min{β_K, β_γ}`: both change sign
    Case3,
    /// `min ≤ β < max`: handled with the sign-changing construction
    Mixed,
}

impl CaseId {
    /// Whether the cone construction restricts to `[0, b] ⊂ [0, t*)`.
    pub fn uses_subinterval(self) -> bool {
        matches!(self, CaseId::Case3 | CaseId::Mixed)
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseId::Case1 => "Case1",
            CaseId::Case2 => "Case2",
            CaseId::Case3 => "Case3",
            CaseId::Mixed => "Mixed",
        })
    }
}

/// Regime together with its interval `[0,b]` and cone constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseData {
    pub case_id: CaseId,
    pub params: KernelParams,
    pub thresholds: Thresholds,
    pub b: f64,
    /// envelope `Φ` with `|K(t,s)| ≤ Φ`
    pub phi: f64,
    /// `K(t,s) ≥ c_K Φ` for `t ∈ [0,b]`
    pub c_k: f64,
    /// `γ(t) ≥ σ_γ ‖γ‖_∞` for `t ∈ [0,b]`
    pub sigma_gamma: f64,
    pub sigma: f64,
    /// lower end of the sector `[τρ, ρ]` used by the upper bounds on `f`
    pub tau: f64,
}

impl CaseData {
    /// Cone membership additionally demands `u ≥ 0` on all of `[0,1]`.
    pub fn requires_nonneg(&self) -> bool {
        self.case_id == CaseId::Case2
    }
}

/// Classify `spec`, choose `b` (override, else the default for the regime)
/// and compute the cone constants.
pub fn classify(spec: &ProblemSpec, b_override: Option<f64>) -> Result<CaseData> {
    let params = KernelParams::from_spec(spec);
    classify_params(&params, b_override.or(spec.b))
}

pub fn classify_params(params: &KernelParams, b_override: Option<f64>) -> Result<CaseData> {
    let th = thresholds_for(params);
    let KernelParams { alpha, eta, beta, .. } = *params;
    let hi = th.beta_k.max(th.beta_gamma);
    let lo = th.beta_k.min(th.beta_gamma);
    let case_id = if (beta - hi).abs() <= CASE2_TOL {
        CaseId::Case2
    } else if beta > hi {
        CaseId::Case1
    } else if beta < lo {
        CaseId::Case3
    } else {
        CaseId::Mixed
    };

    let p = alpha - 1.0;
    let bg = beta * params.gamma_alpha;
    let g3 = params.gamma_3ma;
    let invalid = |b: f64, reason: String| Err(Error::InvalidB { b, reason });

    let b = match case_id {
        CaseId::Case1 => match b_override {
            Some(b) if b != 1.0 => return invalid(b, "Case1 uses the whole interval, b = 1".into()),
            _ => 1.0,
        },
        CaseId::Case2 => match b_override {
            Some(b) if !(b >= eta && b < 1.0) => return invalid(b, format!("Case2 needs {eta} <= b < 1")),
            Some(b) => b,
            None => (eta + 1.0) / 2.0,
        },
        CaseId::Case3 | CaseId::Mixed => match b_override {
            Some(b) => {
                if !(b >= eta && b < th.t_star) {
                    return invalid(b, format!("{case_id} needs {eta} <= b < t* = {}", th.t_star));
                }
                if bg <= (b - eta).powf(p) {
                    return invalid(b, "need beta*Gamma(alpha) > (b - eta)^(alpha - 1)".into());
                }
                b
            }
            None => {
                let mut b = (eta + th.t_star) / 2.0;
                while bg <= (b - eta).powf(p) {
                    b = eta + (b - eta) / 2.0;
                }
                b
            }
        },
    };

    let (phi, c_k, sigma_gamma) = match case_id {
        CaseId::Case1 => (
            beta + eta.powf(p) / params.gamma_alpha,
            (bg - (1.0 - eta).powf(p)) / (bg + eta.powf(p)),
            (beta + (eta - 1.0) * g3) / (beta + eta * g3),
        ),
        CaseId::Case2 => (
            beta + eta.powf(p) / params.gamma_alpha,
            (bg - (b - eta).powf(p)) / (bg + eta.powf(p)),
            (beta + (eta - b) * g3) / (beta + eta * g3),
        ),
        CaseId::Case3 | CaseId::Mixed => {
            let phi = ((bg + eta.powf(p)) / params.gamma_alpha).max(((1.0 - eta).powf(p) - bg) / params.gamma_alpha);
            // min of the two tabulated ratios = common numerator over Γ(α)Φ;
            // this form stays valid when K ≥ 0 makes the second denominator ≤ 0
            let c_k = (bg - (b - eta).powf(p)) / (params.gamma_alpha * phi);
            let sigma_gamma = (beta + (eta - b) * g3) / (beta + eta * g3).max((1.0 - eta) * g3 - beta);
            (phi, c_k, sigma_gamma)
        }
    };
    let sigma = sigma_gamma.min(1.0).min(c_k);
    let tau = match case_id {
        CaseId::Case1 => sigma,
        CaseId::Case2 => 0.0,
        CaseId::Case3 | CaseId::Mixed => -1.0,
    };
    Ok(CaseData { case_id, params: *params, thresholds: th, b, phi, c_k, sigma_gamma, sigma, tau })
}
