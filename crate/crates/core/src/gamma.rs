//! Lanczos approximation of the Gamma function on the positive reals.

#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("Gamma function is only defined here for positive arguments, got {0}")]
pub struct GammaDomainError(pub f64);

// g = 7, n = 9 (the GSL coefficient set)
const G: f64 = 7.0;
const COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Γ(x)` for `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64, GammaDomainError> {
    if x.is_nan() || x <= 0.0 || x.is_infinite() {
        return Err(GammaDomainError(x));
    }
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the series in its accurate range
        return Ok(lanczos(x + 1.0) / x);
    }
    Ok(lanczos(x))
}

fn lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let w = x + G + 0.5;
    (2.0 * PI).sqrt() * w.powf(x + 0.5) * (-w).exp() * acc
}

/// `Γ(x)` for arguments known to be positive.
pub(crate) fn gamma(x: f64) -> f64 {
    gamma_fn(x).expect("positive Gamma argument")
}
