//! Jacobi theta function Θ₃ and the lattice Gaussian sums it closes.
//!
//! Convention: `Θ₃(v | τ) = Σ_{n∈ℤ} exp(iπτn² + 2πinv)`. With `τ = i/π` this is
//! the Gaussian `Σ exp(-n² + 2πinv)`, which is the form every coherent-state
//! overlap on the lattice reduces to.
//!
//! Both series are summed symmetrically: the `n = 0` term first, then the
//! pairs `±1, ±2, …`. Summation stops at the first pair past the peak of the
//! Gaussian envelope whose combined magnitude falls below the tolerance.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default series tolerance.
pub const DEFAULT_TOL: f64 = 1e-14;

const MAX_TERMS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta3Params {
    pub v: Complex64,
    pub tau: Complex64,
    pub tol: f64,
}

impl Theta3Params {
    pub fn new(v: Complex64, tau: Complex64) -> Self {
        Self {
            v,
            tau,
            tol: DEFAULT_TOL,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau.im > 0.0) || !self.tau.re.is_finite() || !self.tau.im.is_finite() {
            return Err(Error::domain(format!(
                "theta3 requires Im(tau) > 0, got tau = {}",
                self.tau
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::domain(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if !self.v.re.is_finite() || !self.v.im.is_finite() {
            return Err(Error::domain("theta3 argument must be finite"));
        }
        Ok(())
    }
}

/// Θ₃(v | τ) by symmetric series summation.
pub fn theta3(params: Theta3Params) -> Result<Complex64> {
    params.validate()?;
    let Theta3Params { v, tau, tol } = params;
    let i = Complex64::i();
    let term = |n: f64| (i * PI * tau * n * n + 2.0 * PI * i * n * v).exp();
    // |term(n)| = exp(-π Im τ n² - 2π n Im v) peaks at n = -Im v / Im τ.
    let peak = (v.im / tau.im).abs();
    symmetric_sum(term, peak, tol)
}

/// `Σ_{j∈ℤ} exp(b·j − j²)`, summed symmetrically.
///
/// Equal to `theta3(-i·b/(2π), i/π)`; computed independently of [`theta3`] so
/// the two can check each other.
pub fn gaussian_lattice_sum(b: Complex64) -> Complex64 {
    gaussian_lattice_sum_tol(b, DEFAULT_TOL)
}

pub fn gaussian_lattice_sum_tol(b: Complex64, tol: f64) -> Complex64 {
    let term = |j: f64| (b * j - j * j).exp();
    let peak = (b.re / 2.0).abs();
    // exp(b·j − j²) always decays, so the only failure mode is a non-finite
    // `b`, which surfaces as NaN rather than an error.
    symmetric_sum(term, peak, tol).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

/// The closed-form approximation `Θ₃((i/π) ln|ξ| | i/π) ≈ e^{(ln|ξ|)²} √π`.
pub fn theta3_gaussian_approx(xi_modulus: f64) -> Result<f64> {
    if !(xi_modulus > 0.0) || !xi_modulus.is_finite() {
        return Err(Error::domain(format!(
            "modulus must be positive and finite, got {xi_modulus}"
        )));
    }
    let ln = xi_modulus.ln();
    Ok((ln * ln).exp() * PI.sqrt())
}

/// The exact series that [`theta3_gaussian_approx`] approximates.
pub fn theta3_at_log_modulus(xi_modulus: f64) -> Result<f64> {
    if !(xi_modulus > 0.0) || !xi_modulus.is_finite() {
        return Err(Error::domain(format!(
            "modulus must be positive and finite, got {xi_modulus}"
        )));
    }
    let v = Complex64::new(0.0, xi_modulus.ln() / PI);
    let tau = Complex64::new(0.0, 1.0 / PI);
    Ok(theta3(Theta3Params::new(v, tau))?.re)
}

fn symmetric_sum(term: impl Fn(f64) -> Complex64, peak: f64, tol: f64) -> Result<Complex64> {
    let mut sum = term(0.0);
    for n in 1..MAX_TERMS {
        let x = n as f64;
        let (plus, minus) = (term(x), term(-x));
        sum += plus + minus;
        if x > peak && plus.norm() + minus.norm() < tol {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence { terms: MAX_TERMS })
}
