//! Summation formula for Hilbert-Schmidt separability probabilities
//! `P(alpha) = sum_{i >= 0} f(alpha + i)`, with `alpha` the Dyson-like index
//! (1/2 real, 1 complex, 2 quaternionic).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_gamma;

pub const DEFAULT_TOL: f64 = 1e-16;

/// Hard cap on summed terms; the tail decays like `2^{-4i}` times a power so
/// this is never reached for sane tolerances.
const MAX_TERMS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct AlphaValue(f64);

impl AlphaValue {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha.is_finite() {
            Ok(Self(alpha))
        } else {
            Err(Error::DomainError(format!("alpha must be positive and finite, got {alpha}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Quintic numerator polynomial, Horner form.
pub fn q_poly(alpha: f64) -> f64 {
    ((((185_000.0 * alpha + 779_750.0) * alpha + 1_289_125.0) * alpha + 1_042_015.0) * alpha
        + 410_694.0)
        * alpha
        + 63_000.0
}

/// `f(alpha) = P(alpha) - P(alpha + 1)`, evaluated in log space.
pub fn f_term(alpha: f64) -> Result<f64> {
    let a = AlphaValue::new(alpha)?.get();
    let ln = q_poly(a).ln() - (4.0 * a + 6.0) * std::f64::consts::LN_2
        + ln_gamma(3.0 * a + 2.5)
        + ln_gamma(5.0 * a + 2.0)
        - 3f64.ln()
        - ln_gamma(a + 1.0)
        - ln_gamma(2.0 * a + 3.0)
        - ln_gamma(5.0 * a + 6.5);
    Ok(ln.exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summation {
    pub value: f64,
    /// Number of terms added, including the one that met the cutoff.
    pub terms: usize,
}

/// Sums `f(alpha + i)` until a term falls below `tol` times the running sum.
pub fn p_alpha(alpha: f64, tol: f64) -> Result<Summation> {
    AlphaValue::new(alpha)?;
    if !(tol > 0.0) {
        return Err(Error::DomainError(format!("tolerance must be positive, got {tol}")));
    }
    let mut terms = Vec::new();
    let mut sum = 0.0;
    for i in 0..MAX_TERMS {
        let term = f_term(alpha + i as f64)?;
        terms.push(term);
        sum += term;
        if term < tol * sum {
            break;
        }
    }
    // Re-add smallest first to keep the rounding error near one ulp.
    Ok(Summation {
        value: terms.iter().rev().sum(),
        terms: terms.len(),
    })
}
