//! Coherent states on the torus lattice and on the Möbius row `(j, 0)`.
//!
//! All states here are unnormalized: the coefficient of `|j⟩` is
//! `z^{−j} e^{−j²/2}` exactly, and overlaps are the raw inner products.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, Axis, LatticeOp, LatticeState, ModeIndex, Sign};
use crate::theta::{gaussian_lattice_sum, theta3, Theta3Params};
use crate::two_mode::{self, TwoModeState};

pub const MIN_CUTOFF: u32 = 4;
pub const DEFAULT_CUTOFF: u32 = 8;

const PROJECTION_GUARD: f64 = 1e-14;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_cutoff(cutoff: u32) -> Result<()> {
    if cutoff < MIN_CUTOFF {
        return Err(Error::domain(format!(
            "coherent states need cutoff >= {MIN_CUTOFF}, got {cutoff}"
        )));
    }
    Ok(())
}

/// Splits an angle into `[0, 2π)` plus whole turns.
fn split_angle(angle: f64) -> Result<(f64, i64)> {
    if !angle.is_finite() {
        return Err(Error::domain(format!("angle must be finite, got {angle}")));
    }
    let mut base = angle.rem_euclid(TAU);
    if base >= TAU {
        base = 0.0;
    }
    let winding = ((angle - base) / TAU).round() as i64;
    Ok((base, winding))
}

/// Per-axis label `z = e^{−l+iα}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentLabel {
    pub l: f64,
    /// Angle reduced to `[0, 2π)`.
    pub alpha: f64,
    pub winding: i64,
}

impl CoherentLabel {
    pub fn new(l: f64, alpha: f64) -> Result<Self> {
        if !l.is_finite() {
            return Err(Error::domain(format!("l must be finite, got {l}")));
        }
        let (alpha, winding) = split_angle(alpha)?;
        Ok(Self { l, alpha, winding })
    }

    /// Unwound angle.
    pub fn angle(&self) -> f64 {
        self.alpha + TAU * self.winding as f64
    }

    /// `ln z = −l + iα`
    pub fn log(&self) -> Complex64 {
        c(-self.l, self.alpha)
    }

    pub fn z(&self) -> Complex64 {
        self.log().exp()
    }
}

/// A label per lattice axis.
pub type TorusLabel = [CoherentLabel; 2];

/// Sign of the `r sin(φ/2)` term in the exponent of the Möbius label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MobiusConvention {
    /// `e^{−(l + r sin(φ/2)) + iφ}(1 + r cos(φ/2))`
    #[default]
    PlusSin,
    /// `e^{−(l − r sin(φ/2)) + iφ}(1 + r cos(φ/2))`, the form that comes out of
    /// splitting the torus label.
    MinusSin,
}

/// Möbius label `(l, r, φ)` with the winding of `φ` kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusLabel {
    pub l: f64,
    pub r: f64,
    /// `φ` reduced to `[0, 2π)`.
    pub phi_base: f64,
    pub winding: i64,
    #[serde(default)]
    pub convention: MobiusConvention,
}

impl MobiusLabel {
    pub fn new(l: f64, r: f64, phi: f64) -> Result<Self> {
        if !l.is_finite() {
            return Err(Error::domain(format!("l must be finite, got {l}")));
        }
        if !(0.0..1.0).contains(&r) {
            return Err(Error::domain(format!(
                "strip half-width must satisfy 0 <= r < 1, got {r}"
            )));
        }
        let (phi_base, winding) = split_angle(phi)?;
        Ok(Self {
            l,
            r,
            phi_base,
            winding,
            convention: MobiusConvention::default(),
        })
    }

    pub fn with_convention(mut self, convention: MobiusConvention) -> Self {
        self.convention = convention;
        self
    }

    /// The same label after `turns` full turns of `φ`.
    pub fn advanced(mut self, turns: i64) -> Self {
        self.winding += turns;
        self
    }

    pub fn phi(&self) -> f64 {
        self.phi_base + TAU * self.winding as f64
    }

    /// `(sin(φ/2), cos(φ/2))` from the reduced angle and the winding parity.
    pub fn half_angle(&self) -> (f64, f64) {
        let (s, co) = (self.phi_base / 2.0).sin_cos();
        if self.winding.rem_euclid(2) == 0 {
            (s, co)
        } else {
            (-s, -co)
        }
    }

    /// `ln ξ`, with the imaginary part taken from the reduced angle.
    pub fn log(&self) -> Complex64 {
        let (s, co) = self.half_angle();
        let sign = match self.convention {
            MobiusConvention::PlusSin => 1.0,
            MobiusConvention::MinusSin => -1.0,
        };
        c(
            -(self.l + sign * self.r * s) + (1.0 + self.r * co).ln(),
            self.phi_base,
        )
    }
}

/// Evaluates the Möbius label `ξ`.
pub fn mobius_label_value(lbl: &MobiusLabel) -> Complex64 {
    let (s, co) = lbl.half_angle();
    let sign = match lbl.convention {
        MobiusConvention::PlusSin => 1.0,
        MobiusConvention::MinusSin => -1.0,
    };
    let modulus = (-(lbl.l + sign * lbl.r * s)).exp() * (1.0 + lbl.r * co);
    Complex64::from_polar(modulus, lbl.phi_base)
}

/// A value with an `i`-plane and a `k`-plane component; the two units are
/// never multiplied together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BicomplexLabel {
    pub i_part: Complex64,
    pub k_part: Complex64,
}

impl BicomplexLabel {
    pub fn mul(&self, other: &BicomplexLabel) -> BicomplexLabel {
        BicomplexLabel {
            i_part: self.i_part * other.i_part,
            k_part: self.k_part * other.k_part,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.i_part.is_finite() && self.k_part.is_finite()
    }
}

// Coefficient exp(−j·λ − j²/2) per axis; `row_only` keeps only j2 = 0.
fn coherent_from_logs(logs: [Complex64; 2], row_only: bool, cutoff: u32) -> LatticeState {
    LatticeState::from_fn(cutoff, |j| {
        if row_only && j.j2 != 0 {
            return Complex64::new(0.0, 0.0);
        }
        let (a, b) = (j.j1 as f64, j.j2 as f64);
        (-(logs[0] * a) - logs[1] * b - (a * a + b * b) / 2.0).exp()
    })
}

/// `|z⃗⟩ = Σ z₁^{−j₁} z₂^{−j₂} e^{−j⃗²/2} |j⃗⟩`
pub fn torus_coherent(label: &TorusLabel, cutoff: u32) -> Result<LatticeState> {
    check_cutoff(cutoff)?;
    Ok(coherent_from_logs(
        [label[0].log(), label[1].log()],
        false,
        cutoff,
    ))
}

/// Coherent state from raw per-axis label values.
pub fn torus_coherent_from_values(z: [Complex64; 2], cutoff: u32) -> Result<LatticeState> {
    check_cutoff(cutoff)?;
    let logs = [complex_log(z[0])?, complex_log(z[1])?];
    Ok(coherent_from_logs(logs, false, cutoff))
}

fn complex_log(z: Complex64) -> Result<Complex64> {
    if z.norm() == 0.0 || !z.is_finite() {
        return Err(Error::domain(format!(
            "label must be nonzero and finite, got {z}"
        )));
    }
    Ok(z.ln())
}

/// `|z⃗, w⃗⟩ = |z⃗⟩ ⊗ |w⃗⟩`
pub fn two_mode_coherent(z: &TorusLabel, w: &TorusLabel, cutoff: u32) -> Result<TwoModeState> {
    Ok(TwoModeState::product(
        &torus_coherent(z, cutoff)?,
        &torus_coherent(w, cutoff)?,
    ))
}

/// States whose raw inner product can be taken.
pub trait Overlap {
    fn overlap(&self, other: &Self) -> Result<Complex64>;
}

impl Overlap for LatticeState {
    fn overlap(&self, other: &Self) -> Result<Complex64> {
        lattice::inner(self, other)
    }
}

impl Overlap for TwoModeState {
    fn overlap(&self, other: &Self) -> Result<Complex64> {
        two_mode::inner(self, other)
    }
}

/// `⟨a|b⟩` by direct summation.
pub fn overlap_bruteforce<S: Overlap>(a: &S, b: &S) -> Result<Complex64> {
    a.overlap(b)
}

/// `Σⱼ (z̄ z′)^{−j} e^{−j²}` as `Θ₃((i/2π) ln(z̄ z′) | i/π)`, from the log of the product.
fn axis_theta(log_product: Complex64) -> Result<Complex64> {
    let v = Complex64::i() * log_product / (2.0 * PI);
    theta3(Theta3Params::new(v, c(0.0, 1.0 / PI)))
}

/// Single-axis overlap factor from raw label values.
pub fn axis_overlap_theta(z: Complex64, z2: Complex64) -> Result<Complex64> {
    axis_theta(complex_log(z.conj() * z2)?)
}

/// `⟨z⃗|z⃗′⟩` as a product of one theta factor per axis.
pub fn overlap_theta(z: &TorusLabel, z2: &TorusLabel) -> Result<Complex64> {
    let mut out = c(1.0, 0.0);
    for (a, b) in z.iter().zip(z2) {
        out *= axis_theta(a.log().conj() + b.log())?;
    }
    Ok(out)
}

/// `⟨z⃗, w⃗|z⃗′, w⃗′⟩` as four theta factors.
pub fn overlap_theta_two_mode(
    z: &TorusLabel,
    w: &TorusLabel,
    z2: &TorusLabel,
    w2: &TorusLabel,
) -> Result<Complex64> {
    Ok(overlap_theta(z, z2)? * overlap_theta(w, w2)?)
}

/// `Zᵢ = e^{−Jᵢ+1/2} e^{iφ̂ᵢ}`
pub fn apply_z_operator(axis: Axis, s: &LatticeState) -> LatticeState {
    s.apply(LatticeOp::Ladder(axis, Sign::Plus))
        .map_diagonal(|j| c((0.5 - j.component(axis) as f64).exp(), 0.0))
}

/// `Wᵢ` acting on the second factor of a two-mode state.
pub fn apply_w_operator(axis: Axis, s: &TwoModeState) -> TwoModeState {
    s.apply_local(LatticeOp::Identity, LatticeOp::Ladder(axis, Sign::Plus))
        .map_diagonal(|_, k| c((0.5 - k.component(axis) as f64).exp(), 0.0))
}

/// `‖Zᵢ|z⟩ − zᵢ|z⟩‖ / ‖|z⟩‖`
pub fn eigen_residual(label: &TorusLabel, axis: Axis, cutoff: u32) -> Result<f64> {
    let s = torus_coherent(label, cutoff)?;
    let z = label[axis as usize].z();
    let diff = apply_z_operator(axis, &s).sub(&s.scaled(z))?;
    Ok(diff.norm() / s.norm())
}

/// `‖Wᵢ|z,w⟩ − wᵢ|z,w⟩‖ / ‖|z,w⟩‖`
pub fn two_mode_eigen_residual(
    z: &TorusLabel,
    w: &TorusLabel,
    axis: Axis,
    cutoff: u32,
) -> Result<f64> {
    let s = two_mode_coherent(z, w, cutoff)?;
    let wi = w[axis as usize].z();
    let cut = s.cutoffs().1;
    let weight = |k: ModeIndex| c((0.5 - k.component(axis) as f64).exp(), 0.0);
    // Same sum as ‖apply_w_operator(s) − wᵢ s‖², without building either state.
    // Dense copy of the box so the shifted lookups are plain indexing.
    let (c0, c1) = (s.cutoffs().0 as i64, cut as i64);
    let (w0, w1) = (2 * c0 + 1, 2 * c1 + 1);
    let at = |j: ModeIndex, k: ModeIndex| {
        ((((j.j1 + c0) * w0 + j.j2 + c0) * w1 + k.j1 + c1) * w1 + k.j2 + c1) as usize
    };
    let mut dense: Vec<Option<Complex64>> = vec![None; (w0 * w0 * w1 * w1) as usize];
    for ((j, k), a) in s.iter() {
        dense[at(j, k)] = Some(a);
    }
    let mut sq = 0.0;
    for ((j, k), a) in s.iter() {
        let down = k.shifted(axis, -1);
        let below = if down.within(cut) {
            dense[at(j, down)].unwrap_or_default()
        } else {
            ZERO
        };
        sq += (weight(k) * below - wi * a).norm_sqr();
        let up = k.shifted(axis, 1);
        if up.within(cut) && dense[at(j, up)].is_none() {
            sq += (weight(up) * a).norm_sqr();
        }
    }
    Ok(sq.sqrt() / s.norm())
}

/// `|ξ⟩ = Σ ξ^{−j} e^{−j²/2} |j, 0⟩`
pub fn mobius_coherent(lbl: &MobiusLabel, cutoff: u32) -> Result<LatticeState> {
    check_cutoff(cutoff)?;
    Ok(coherent_from_logs([lbl.log(), c(0.0, 0.0)], true, cutoff))
}

/// Möbius overlap by direct summation and in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobiusOverlap {
    pub brute: Complex64,
    pub theta: Complex64,
}

impl MobiusOverlap {
    pub fn discrepancy(&self) -> f64 {
        (self.brute - self.theta).norm()
    }
}

pub fn mobius_overlap(a: &MobiusLabel, b: &MobiusLabel, cutoff: u32) -> Result<MobiusOverlap> {
    let brute = lattice::inner(&mobius_coherent(a, cutoff)?, &mobius_coherent(b, cutoff)?)?;
    let theta = axis_theta(a.log().conj() + b.log())?;
    Ok(MobiusOverlap { brute, theta })
}

/// The exponent `b` in `Σ e^{bj − j²}` for `⟨ξ|ξ′⟩`.
pub fn mobius_overlap_exponent(a: &MobiusLabel, b: &MobiusLabel) -> Complex64 {
    -(a.log().conj() + b.log())
}

/// `⟨ξ^{φ}|ξ^{φ+4π}⟩` compared against the closed form `Σ e^{(2l + ln(1+r))j − j²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourPiReport {
    pub exponent: Complex64,
    pub overlap: Complex64,
    pub shortcut_exponent: f64,
    pub shortcut_value: Complex64,
    pub discrepancy: f64,
}

pub fn four_pi_report(lbl: &MobiusLabel, cutoff: u32) -> Result<FourPiReport> {
    let later = lbl.advanced(2);
    let overlap = lattice::inner(
        &mobius_coherent(lbl, cutoff)?,
        &mobius_coherent(&later, cutoff)?,
    )?;
    let shortcut_exponent = 2.0 * lbl.l + (1.0 + lbl.r).ln();
    let shortcut_value = gaussian_lattice_sum(c(shortcut_exponent, 0.0));
    Ok(FourPiReport {
        exponent: mobius_overlap_exponent(lbl, &later),
        overlap,
        shortcut_exponent,
        shortcut_value,
        discrepancy: (overlap - shortcut_value).norm(),
    })
}

/// `ξ_Torus = e^{−(l + r cos θ) + iφ}(1 + r sin θ) · e^{−2π sin²φ + kθ}`
pub fn xi_torus_label(l: f64, r: f64, theta: f64, phi: f64) -> BicomplexLabel {
    let i_part = Complex64::from_polar(
        (-(l + r * theta.cos())).exp() * (1.0 + r * theta.sin()),
        phi,
    );
    let k_part = Complex64::from_polar((-2.0 * PI * phi.sin().powi(2)).exp(), theta);
    BicomplexLabel { i_part, k_part }
}

/// The Möbius factor and the remainder of `ξ_Torus`.
///
/// The remainder's `i`-plane component is real; the product of the two
/// reproduces [`xi_torus_label`].
pub fn xi_factorize(l: f64, r: f64, theta: f64, phi: f64) -> (Complex64, BicomplexLabel) {
    let (s, co) = (phi / 2.0).sin_cos();
    let xi_mobius = Complex64::from_polar((-(l - r * s)).exp() * (1.0 + r * co), phi);
    let scalar = (-r * (theta.cos() + s)).exp() * (1.0 + r * theta.sin()) / (1.0 + r * co);
    let second = BicomplexLabel {
        i_part: c(scalar, 0.0),
        k_part: Complex64::from_polar((-2.0 * PI * phi.sin().powi(2)).exp(), theta),
    };
    (xi_mobius, second)
}

/// Multiplies a Möbius factor back into the remainder.
pub fn xi_recombine(xi_mobius: Complex64, second: &BicomplexLabel) -> BicomplexLabel {
    BicomplexLabel {
        i_part: xi_mobius * second.i_part,
        k_part: second.k_part,
    }
}

/// `|ξ_Torus⟩ = Σ ξ_M^{−j} e^{−j²/2} ξ^{−m} e^{−m²/2} |j, m⟩`, using the
/// `i`-plane parts of the two factors.
pub fn xi_torus_state(l: f64, r: f64, theta: f64, phi: f64, cutoff: u32) -> Result<LatticeState> {
    let (xm, second) = xi_factorize(l, r, theta, phi);
    torus_coherent_from_values([xm, second.i_part], cutoff)
}

/// `|ξ⁰_Torus⟩ = Σ e^{−(j² + m²)/2} |j, m⟩`
pub fn torus_vacuum(cutoff: u32) -> Result<LatticeState> {
    check_cutoff(cutoff)?;
    Ok(coherent_from_logs([c(0.0, 0.0); 2], false, cutoff))
}

/// `⟨ξ_T| |ξ_M⟩⟨ξ_M| |ξ′_T⟩ / ⟨ξ⁰_T|ξ_M⟩⟨ξ_M|ξ⁰_T⟩`
pub fn projection_mobius(
    xi_t: &LatticeState,
    xi_t2: &LatticeState,
    xi_m: &MobiusLabel,
    cutoff: u32,
) -> Result<Complex64> {
    let m = mobius_coherent(xi_m, cutoff)?;
    let vac = torus_vacuum(cutoff)?;
    let den = lattice::inner(&vac, &m)? * lattice::inner(&m, &vac)?;
    if den.norm() < PROJECTION_GUARD {
        return Err(Error::singular(format!(
            "degenerate projection: |denominator| = {:e}",
            den.norm()
        )));
    }
    let num = lattice::inner(xi_t, &m)? * lattice::inner(&m, xi_t2)?;
    Ok(num / den)
}

/// `Σ e^{(l′ + h′)j} e^{−i(φ − ψ)} e^{−j²}` with `h′ = −ln|ξ′|` and `ψ = arg ξ′`.
///
/// `h′` and `ψ` are a guess at the intended reading; the result is only ever
/// reported next to [`projection_mobius`].
pub fn projection_sum_reading(l_prime: f64, phi: f64, xi_prime: Complex64) -> Complex64 {
    let h = -xi_prime.norm().ln();
    let psi = xi_prime.arg();
    Complex64::from_polar(1.0, -(phi - psi)) * gaussian_lattice_sum(c(l_prime + h, 0.0))
}

/// Uniform transverse rescaling by `e^{−𝒵}` with the axial coordinate fixed.
pub trait Deform: Sized {
    fn deformed(&self, zparam: f64) -> Self;
}

impl Deform for [f64; 3] {
    fn deformed(&self, zparam: f64) -> Self {
        let k = (-zparam).exp();
        [k * self[0], k * self[1], self[2]]
    }
}

impl Deform for CoherentLabel {
    fn deformed(&self, zparam: f64) -> Self {
        Self {
            l: self.l + zparam,
            ..*self
        }
    }
}

impl Deform for MobiusLabel {
    fn deformed(&self, zparam: f64) -> Self {
        Self {
            l: self.l + zparam,
            ..*self
        }
    }
}

pub fn deform_label<D: Deform>(zparam: f64, x: &D) -> D {
    x.deformed(zparam)
}
