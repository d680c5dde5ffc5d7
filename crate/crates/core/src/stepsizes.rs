//! Step-size policies and rate formulas.
//!
//! `ell` arguments are the value `ℓ(τ+1)` of the kernel's amplification
//! function (`τ + 1` for the euclidean kernel).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `(1 + z)^{1/m} − 1` without cancellation.
fn root_increment(z: f64, m: f64) -> f64 {
    (z.ln_1p() / m).exp_m1()
}

/// Largest step of the sublinear result: `2 / (L·ℓ(τ+1)·(τ+1)·(τ+2))`.
pub fn sublinear_step(l: f64, tau: usize, ell: f64) -> f64 {
    let t = tau as f64;
    2.0 / (l * ell * (t + 1.0) * (t + 2.0))
}

/// `α₀ = [(1 + (μ/L)/ℓ(τ+1))^{1/(τ+1)} − 1] / μ`.
pub fn linear_step(l: f64, mu: f64, tau: usize, ell: f64) -> f64 {
    root_increment(mu / l / ell, tau as f64 + 1.0) / mu
}

/// `α₀ = [(1 + μ/((τ+1)L))^{1/(τ+1)} − 1] / μ`.
pub fn piag_holder_step(l: f64, mu: f64, tau: usize) -> f64 {
    let m = tau as f64 + 1.0;
    root_increment(mu / (m * l), m) / mu
}

/// `1/(1 + αμ)`.
pub fn rate_linear(alpha: f64, mu: f64) -> f64 {
    1.0 / (1.0 + alpha * mu)
}

/// `1 − 1/([ℓ(τ+1)·Q + 1](τ+1))`.
pub fn rate_bound_result04(q: f64, tau: usize, ell: f64) -> f64 {
    1.0 - 1.0 / ((ell * q + 1.0) * (tau as f64 + 1.0))
}

/// `1 − 1/(49·Q·(τ+1))`.
pub fn rate_bound_best(q: f64, tau: usize) -> f64 {
    1.0 - 1.0 / (49.0 * q * (tau as f64 + 1.0))
}

/// `η = (αμ/(1+αμ))·θ + 1/(1+αμ)`.
pub fn holder_eta(alpha: f64, mu: f64, theta: f64) -> f64 {
    let am = alpha * mu;
    (am * theta + 1.0) / (1.0 + am)
}

/// Left side of the recursion condition, `c·Σ_{i=0}^{k₀} a^{−i}`
/// (equal to `(c/(1−a))·(1−a^{k₀+1})/a^{k₀}` for `a < 1`).
pub fn recursion_condition_value(a: f64, c: f64, k0: usize) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for _ in 0..=k0 {
        sum += term;
        term /= a;
    }
    c * sum
}

/// Whether `c·Σ_{i=0}^{k₀} a^{−i} ≤ b`.
pub fn recursion_condition(a: f64, b: f64, c: f64, k0: usize) -> bool {
    recursion_condition_value(a, c, k0) <= b
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StepPolicy {
    Sublinear,
    Linear,
    PiagHolder,
    Manual { alpha: f64 },
}

impl StepPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            StepPolicy::Sublinear => "sublinear",
            StepPolicy::Linear => "linear",
            StepPolicy::PiagHolder => "piag_holder",
            StepPolicy::Manual { .. } => "manual",
        }
    }

    /// The step for smoothness `L`, growth `μ` (needed by the linear modes),
    /// delay bound `τ` and `ℓ(τ+1)`.
    pub fn resolve(&self, l: f64, mu: Option<f64>, tau: usize, ell: f64) -> Result<f64> {
        if !(l > 0.0 && l.is_finite()) && !matches!(self, StepPolicy::Manual { .. }) {
            return Err(Error::InvalidArgument(format!("L = {l} must be positive")));
        }
        let need_mu = || {
            mu.filter(|m| *m > 0.0)
                .ok_or(Error::MissingGrowth)
        };
        let alpha = match *self {
            StepPolicy::Sublinear => sublinear_step(l, tau, ell),
            StepPolicy::Linear => linear_step(l, need_mu()?, tau, ell),
            StepPolicy::PiagHolder => piag_holder_step(l, need_mu()?, tau),
            StepPolicy::Manual { alpha } => alpha,
        };
        if alpha > 0.0 && alpha.is_finite() {
            Ok(alpha)
        } else {
            Err(Error::InvalidArgument(format!("step {alpha} must be positive and finite")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sublinear_examples() {
        assert_eq!(sublinear_step(1.0, 0, 1.0), 1.0);
        assert_abs_diff_eq!(sublinear_step(2.0, 1, 2.0), 1.0 / 12.0, epsilon = 1e-16);
        assert_eq!(sublinear_step(4.0, 0, 1.0), 0.25);
    }

    #[test]
    fn linear_examples() {
        assert_abs_diff_eq!(linear_step(1.0, 1.0, 0, 1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(linear_step(7.0, 0.5, 0, 1.0), 1.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(linear_step(2.0, 1.0, 1, 2.0), 1.25f64.sqrt() - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn holder_examples() {
        assert_abs_diff_eq!(piag_holder_step(1.0, 1.0, 0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(piag_holder_step(1.0, 1.0, 1), 1.5f64.sqrt() - 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            piag_holder_step(3.0, 0.2, 0),
            linear_step(3.0, 0.2, 0, 1.0),
            epsilon = 1e-15
        );
        assert_eq!(holder_eta(0.3, 2.0, 1.0), 1.0);
        assert_eq!(holder_eta(1.0, 1.0, 0.5), 0.75);
        assert_abs_diff_eq!(holder_eta(1e-12, 1.0, 0.3), 1.0, epsilon = 1e-11);
    }

    #[test]
    fn rate_examples() {
        assert_eq!(rate_linear(1.0, 1.0), 0.5);
        assert_abs_diff_eq!(rate_linear(0.1, 2.0), 1.0 / 1.2, epsilon = 1e-15);
        assert_eq!(rate_bound_result04(1.0, 0, 1.0), 0.5);
        assert_abs_diff_eq!(rate_bound_best(10.0, 3), 1.0 - 1.0 / 1960.0, epsilon = 1e-16);
    }

    #[test]
    fn condition_examples() {
        assert_abs_diff_eq!(recursion_condition_value(0.5, 0.1, 1), 0.3, epsilon = 1e-15);
        assert!(recursion_condition(0.5, 1.0, 0.1, 1));
        assert!(!recursion_condition(0.5, 1.0, 1.0, 1));
        let (a, c, k0) = (0.7_f64, 0.2, 4);
        let closed = c / (1.0 - a) * (1.0 - a.powi(k0 as i32 + 1)) / a.powi(k0 as i32);
        assert_abs_diff_eq!(recursion_condition_value(a, c, k0), closed, epsilon = 1e-14);
    }

    #[test]
    fn policy_resolution() {
        assert_eq!(StepPolicy::Sublinear.resolve(4.0, None, 0, 1.0).unwrap(), 0.25);
        assert!(matches!(StepPolicy::Linear.resolve(4.0, None, 0, 1.0), Err(Error::MissingGrowth)));
        assert_eq!(StepPolicy::Manual { alpha: 0.3 }.resolve(4.0, None, 2, 3.0).unwrap(), 0.3);
        assert!(StepPolicy::Manual { alpha: -1.0 }.resolve(4.0, None, 0, 1.0).is_err());
    }
}
