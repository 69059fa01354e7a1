//! Two-level non-compact oscillator: `a|±⟩ = α|∓⟩`, its exponential, the
//! bipartite words in `a` and `b`, and the correspondence with the powers of
//! the torus mixing operator.

use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{
    apply_m_power, basis_state, inner, Axis, LatticeState, ModeIndex, PowerSemantics,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Amplitudes on `|+⟩` and `|−⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PmState {
    pub plus: Complex64,
    pub minus: Complex64,
}

impl PmState {
    pub const PLUS: PmState = PmState {
        plus: ONE,
        minus: ZERO,
    };
    pub const MINUS: PmState = PmState {
        plus: ZERO,
        minus: ONE,
    };

    pub fn new(plus: Complex64, minus: Complex64) -> Self {
        Self { plus, minus }
    }

    pub fn distance(&self, other: &PmState) -> f64 {
        ((self.plus - other.plus).norm_sqr() + (self.minus - other.minus).norm_sqr()).sqrt()
    }
}

pub fn apply_a(alpha: Complex64, s: PmState) -> PmState {
    PmState {
        plus: alpha * s.minus,
        minus: alpha * s.plus,
    }
}

/// `e^{a}` by power series, stopped once a term drops below `tol`.
pub fn exp_a(alpha: Complex64, s: PmState, tol: f64) -> Result<PmState> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut sum = s;
    let mut term = s;
    for k in 1..500 {
        term = apply_a(alpha, term);
        let inv = Complex64::new(1.0 / k as f64, 0.0);
        term.plus *= inv;
        term.minus *= inv;
        sum.plus += term.plus;
        sum.minus += term.minus;
        if k as f64 > alpha.norm() && term.plus.norm() + term.minus.norm() < tol {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence { terms: 500 })
}

/// Closed form `e^{a} = cosh(α)·1 + sinh(α)·σ`, with `σ` swapping `|±⟩`.
pub fn exp_a_closed(alpha: Complex64, s: PmState) -> PmState {
    let (ch, sh) = (alpha.cosh(), alpha.sinh());
    PmState {
        plus: ch * s.plus + sh * s.minus,
        minus: ch * s.minus + sh * s.plus,
    }
}

/// Amplitudes over `|s₁ s₂⟩`, index 0 = `+`, 1 = `−`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PmPairState {
    pub amps: [[Complex64; 2]; 2],
}

impl PmPairState {
    pub fn zero() -> Self {
        Self {
            amps: [[ZERO; 2]; 2],
        }
    }

    /// `|+−⟩ + |−+⟩`
    pub fn symmetric_flip() -> Self {
        let mut s = Self::zero();
        s.amps[0][1] = ONE;
        s.amps[1][0] = ONE;
        s
    }

    /// `|++⟩ + |−−⟩`
    pub fn symmetric_equal() -> Self {
        let mut s = Self::zero();
        s.amps[0][0] = ONE;
        s.amps[1][1] = ONE;
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairOp {
    A,
    B,
}

/// Parses a word such as `"abb"`.
pub fn parse_word(s: &str) -> Result<Vec<PairOp>> {
    s.chars()
        .map(|ch| match ch {
            'a' => Ok(PairOp::A),
            'b' => Ok(PairOp::B),
            _ => Err(Error::contract(format!(
                "operator word may contain only a and b, got `{s}`"
            ))),
        })
        .collect()
}

impl FromStr for PairOp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(PairOp::A),
            "b" => Ok(PairOp::B),
            _ => Err(Error::contract(format!("unknown pair operator `{s}`"))),
        }
    }
}

/// Applies each letter of `word` in turn: `a` on the first factor with
/// eigenvalue `alphas.0`, `b` on the second with `alphas.1`.
pub fn apply_pair(word: &[PairOp], alphas: (Complex64, Complex64), s: PmPairState) -> PmPairState {
    word.iter().fold(s, |st, op| {
        let mut out = PmPairState::zero();
        for x in 0..2 {
            for y in 0..2 {
                match op {
                    PairOp::A => out.amps[1 - x][y] += alphas.0 * st.amps[x][y],
                    PairOp::B => out.amps[x][1 - y] += alphas.1 * st.amps[x][y],
                }
            }
        }
        out
    })
}

/// One row of [`isomorphism_check`]: the `k`-th power on both sides,
/// expressed in the `{|+⟩, |−⟩}` frame.
#[derive(Debug, Clone, Serialize)]
pub struct PowerComparison {
    pub power: u32,
    /// Coefficients of `𝓜ᵏ|j⟩` on the images of `|+⟩` and `|−⟩`.
    pub mixing: [Complex64; 2],
    /// Coefficients of `aᵏ|+⟩`.
    pub oscillator: [Complex64; 2],
    /// Norm of the part of `𝓜ᵏ|j⟩` outside the two-dimensional frame.
    pub leakage: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsomorphismReport {
    pub j: ModeIndex,
    pub axis: u8,
    pub alpha: Complex64,
    /// `true` when the companion is `(|−j+e⟩+|−j−e⟩)/√2`.
    pub normalized_companion: bool,
    pub rows: Vec<PowerComparison>,
    pub max_residual: f64,
    pub passed: bool,
}

/// Compares `𝓜ᵏ|j⟩` (closed-form powers) with `aᵏ|+⟩` under the identification
/// `|j⟩ → |+⟩`, companion `→ |−⟩`, for `k = 0..=max_power`.
pub fn isomorphism_check(
    j: ModeIndex,
    axis: Axis,
    alpha: Complex64,
    normalized_companion: bool,
    max_power: u32,
) -> Result<IsomorphismReport> {
    let cutoff = (j.radius() as u32 + 2).max(4);
    let plus = basis_state(j, cutoff)?;
    let e = ModeIndex::unit(axis);
    let raw = LatticeState::from_amplitudes(cutoff, [(-j + e, ONE), (-j - e, ONE)])?;
    let minus = if normalized_companion {
        raw.normalized()?
    } else {
        raw
    };
    // Project on the dual frame: |+⟩ is unit, and the companion has norm²
    // ‖minus‖², orthogonal to |j⟩.
    let minus_norm_sqr = minus.norm_sqr();

    let mut rows = Vec::new();
    let mut osc = PmState::PLUS;
    for k in 0..=max_power {
        if k > 0 {
            osc = apply_a(alpha, osc);
        }
        let image = apply_m_power(axis, k, &plus, PowerSemantics::ClosedForm);
        let cp = inner(&plus, &image)?;
        let cm = inner(&minus, &image)? / minus_norm_sqr;
        let in_frame = plus.scaled(cp).add(&minus.scaled(cm))?;
        let leakage = image.sub(&in_frame)?.norm();
        let residual = ((cp - osc.plus).norm_sqr() + (cm - osc.minus).norm_sqr()).sqrt() + leakage;
        rows.push(PowerComparison {
            power: k,
            mixing: [cp, cm],
            oscillator: [osc.plus, osc.minus],
            leakage,
            residual,
        });
    }
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(IsomorphismReport {
        j,
        axis: axis.number(),
        alpha,
        normalized_companion,
        rows,
        max_residual,
        passed: max_residual < 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn a_actions() {
        assert_eq!(apply_a(c(2.0), PmState::PLUS), PmState::new(c(0.0), c(2.0)));
        assert_eq!(
            apply_a(c(2.0), apply_a(c(2.0), PmState::PLUS)),
            PmState::new(c(4.0), c(0.0))
        );
        assert_eq!(
            apply_a(c(0.0), PmState::new(c(1.0), c(3.0))),
            PmState::new(c(0.0), c(0.0))
        );
    }

    #[test]
    fn exp_a_matches_cosh_sinh() {
        let out = exp_a(c(2.0), PmState::PLUS, 1e-16).unwrap();
        assert!((out.plus.re - 3.762_195_691_083_631).abs() < 1e-13);
        assert!((out.minus.re - 3.626_860_407_847_019).abs() < 1e-13);
        assert_eq!(
            exp_a(c(0.0), PmState::MINUS, 1e-12).unwrap(),
            PmState::MINUS
        );
        assert!(exp_a(c(1.0), PmState::PLUS, -1.0).is_err());
    }

    #[test]
    fn exp_a_series_vs_closed_form_grid() {
        for re in [-4.0, -2.5, -1.0, 0.0, 0.5, 2.0, 4.0] {
            for im in [-2.0, 0.0, 1.5] {
                let alpha = Complex64::new(re, im);
                if alpha.norm() > 4.0 {
                    continue;
                }
                let s = PmState::new(Complex64::new(0.3, -0.2), Complex64::new(-1.1, 0.4));
                let series = exp_a(alpha, s, 1e-17).unwrap();
                let closed = exp_a_closed(alpha, s);
                assert!(series.distance(&closed) < 1e-12, "alpha={alpha}");
            }
        }
    }

    #[test]
    fn pair_words() {
        let s = PmPairState::symmetric_flip();
        let ones = (c(1.0), c(1.0));
        assert_eq!(apply_pair(&parse_word("ab").unwrap(), ones, s), s);
        assert_eq!(
            apply_pair(&parse_word("abb").unwrap(), ones, s),
            PmPairState::symmetric_equal()
        );
        assert_eq!(
            apply_pair(&parse_word("aab").unwrap(), ones, s),
            PmPairState::symmetric_equal()
        );
        assert!(parse_word("abc").is_err());
    }

    #[test]
    fn pair_words_equal_eigenvalues() {
        for a in [c(0.7), Complex64::new(1.2, -0.4)] {
            let s = PmPairState::symmetric_flip();
            let ab = apply_pair(&[PairOp::A, PairOp::B], (a, a), s);
            let mut scaled = s;
            scaled.amps.iter_mut().flatten().for_each(|x| *x *= a * a);
            assert_eq!(ab, scaled);
            let abb = apply_pair(&parse_word("abb").unwrap(), (a, a), s);
            let aab = apply_pair(&parse_word("aab").unwrap(), (a, a), s);
            assert_eq!(abb, aab);
        }
    }

    #[test]
    fn isomorphism_with_root_two() {
        let report =
            isomorphism_check(ModeIndex::ORIGIN, Axis::One, c(2f64.sqrt()), true, 6).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.max_residual < 1e-12);
    }

    #[test]
    fn isomorphism_is_index_independent() {
        let base =
            isomorphism_check(ModeIndex::ORIGIN, Axis::Two, c(2f64.sqrt()), true, 6).unwrap();
        for j in [ModeIndex::new(3, -1), ModeIndex::new(-5, 7)] {
            let r = isomorphism_check(j, Axis::Two, c(2f64.sqrt()), true, 6).unwrap();
            for (x, y) in r.rows.iter().zip(&base.rows) {
                assert!((x.mixing[0] - y.mixing[0]).norm() < 1e-14);
                assert!((x.mixing[1] - y.mixing[1]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn literal_identification_is_reported_not_matched() {
        let r = isomorphism_check(ModeIndex::ORIGIN, Axis::One, c(2.0), false, 6).unwrap();
        assert!(!r.passed);
        // power 0 and 1 agree only in direction; the table carries the gap
        assert!(r.rows[0].residual < 1e-15);
        assert!(r.rows.iter().all(|row| row.leakage < 1e-15));
        // 𝓜²|j⟩ = 2|j⟩ while a²|+⟩ = 4|+⟩
        assert!((r.rows[2].mixing[0].re - 2.0).abs() < 1e-15);
        assert!((r.rows[2].oscillator[0].re - 4.0).abs() < 1e-15);
    }
}
