//! Machine-readable comparison reports between closed forms as written and
//! the brute-force or oracle evaluations.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::coherent::{
    four_pi_report, mobius_coherent, mobius_label_value, mobius_overlap, mobius_overlap_exponent,
    projection_mobius, projection_sum_reading, torus_coherent_from_values, xi_factorize,
    xi_recombine, xi_torus_label, xi_torus_state, FourPiReport, MobiusConvention, MobiusLabel,
};
use crate::error::Result;
use crate::geometry::{constrained_torus_embed, distance, mobius_embed, TorusShape};
use crate::lattice::{
    apply_exp_m, apply_m_power, basis_state, Axis, LatticeOp, ModeIndex, PowerSemantics,
};
use crate::mechanics::{
    hamiltonian, hamiltonian_closed_form, lagrangian_closed_form, lagrangian_embedding, legendre,
    Rates,
};
use crate::oscillator::{isomorphism_check, IsomorphismReport};
use crate::theta::{theta3_at_log_modulus, theta3_gaussian_approx};

#[derive(Debug, Clone, Serialize)]
pub struct PowerRow {
    pub power: u32,
    pub closed_form_norm: f64,
    pub compositional_norm: f64,
    pub difference_norm: f64,
    pub compositional_support: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpCoefficients {
    pub semantics: PowerSemantics,
    pub on_j: f64,
    pub on_companion: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MSemanticsReport {
    pub j: ModeIndex,
    pub axis: u8,
    pub powers: Vec<PowerRow>,
    pub exp_coefficients: Vec<ExpCoefficients>,
    pub cosh_sqrt2: f64,
    pub sinh_sqrt2_over_sqrt2: f64,
    pub cosh_2: f64,
    pub sinh_2: f64,
    pub isomorphism_normalized: IsomorphismReport,
    pub isomorphism_literal: IsomorphismReport,
}

/// Powers of `𝓜ᵢ` under both semantics, the coefficients of `e^{𝓜ᵢ}|j⟩`,
/// and the oscillator identification with `α = √2` and `α = 2`.
pub fn m_semantics(
    j: ModeIndex,
    axis: Axis,
    max_power: u32,
    cutoff: u32,
) -> Result<MSemanticsReport> {
    let s = basis_state(j, cutoff)?;
    let mut powers = Vec::new();
    for k in 0..=max_power {
        let a = apply_m_power(axis, k, &s, PowerSemantics::ClosedForm);
        let b = apply_m_power(axis, k, &s, PowerSemantics::Compositional);
        powers.push(PowerRow {
            power: k,
            closed_form_norm: a.norm(),
            compositional_norm: b.norm(),
            difference_norm: a.sub(&b)?.norm(),
            compositional_support: b.len(),
        });
    }
    let e = ModeIndex::unit(axis);
    let mut exp_coefficients = Vec::new();
    for sem in [PowerSemantics::ClosedForm, PowerSemantics::Compositional] {
        let x = apply_exp_m(axis, &s, sem, 1e-16)?;
        exp_coefficients.push(ExpCoefficients {
            semantics: sem,
            on_j: x.get(j).re,
            on_companion: x.get(-j + e).re,
        });
    }
    Ok(MSemanticsReport {
        j,
        axis: axis.number(),
        powers,
        exp_coefficients,
        cosh_sqrt2: SQRT_2.cosh(),
        sinh_sqrt2_over_sqrt2: SQRT_2.sinh() / SQRT_2,
        cosh_2: 2f64.cosh(),
        sinh_2: 2f64.sinh(),
        isomorphism_normalized: isomorphism_check(j, axis, Complex64::new(SQRT_2, 0.0), true, 6)?,
        isomorphism_literal: isomorphism_check(j, axis, Complex64::new(2.0, 0.0), false, 6)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SignRow {
    pub phi: f64,
    pub plus_sin: Complex64,
    pub minus_sin: Complex64,
    pub constrained_torus: Complex64,
    pub split_factor: Complex64,
    pub plus_vs_torus: f64,
    pub minus_vs_torus: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionRow {
    pub mobius: MobiusLabel,
    pub sandwich: Complex64,
    pub sum_reading: Complex64,
    pub difference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct XiFactorReport {
    pub l: f64,
    pub r: f64,
    pub sign_convention: Vec<SignRow>,
    pub max_plus_vs_torus: f64,
    pub max_minus_vs_torus: f64,
    pub factorization_max_rel_error: f64,
    pub four_pi: FourPiReport,
    pub two_pi_exponent: Complex64,
    pub two_pi_brute: Complex64,
    pub two_pi_theta: Complex64,
    pub projection: Vec<ProjectionRow>,
    pub projection_note: &'static str,
}

pub fn xi_factor(l: f64, r: f64, n_phi: usize, cutoff: u32) -> Result<XiFactorReport> {
    let mut rows = Vec::new();
    for k in 0..n_phi {
        let phi = 2.0 * TAU * k as f64 / n_phi as f64;
        let m = MobiusLabel::new(l, r, phi)?;
        let plus = mobius_label_value(&m);
        let minus = mobius_label_value(&m.with_convention(MobiusConvention::MinusSin));
        let torus = xi_torus_label(l, r, (phi + PI) / 2.0, phi).i_part;
        let (split, _) = xi_factorize(l, r, (phi + PI) / 2.0, phi);
        rows.push(SignRow {
            phi,
            plus_sin: plus,
            minus_sin: minus,
            constrained_torus: torus,
            split_factor: split,
            plus_vs_torus: (plus - torus).norm(),
            minus_vs_torus: (minus - torus).norm(),
        });
    }
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let t = k as f64;
        let (ll, rr, th, ph) = (
            l + (t * 0.37).sin(),
            r * (t * 0.11).cos().abs(),
            t * 0.71,
            t * 1.3 - 40.0,
        );
        let full = xi_torus_label(ll, rr, th, ph);
        let (xm, second) = xi_factorize(ll, rr, th, ph);
        let back = xi_recombine(xm, &second);
        worst = worst
            .max((back.i_part - full.i_part).norm() / full.i_part.norm())
            .max((back.k_part - full.k_part).norm() / full.k_part.norm());
    }
    let m0 = MobiusLabel::new(l, r, 0.0)?;
    let twist = mobius_overlap(&m0, &m0.advanced(1), cutoff)?;

    let a = xi_torus_state(l, r, 0.4, 0.3, cutoff)?;
    let mut projection = Vec::new();
    for phi in [0.0, FRAC_PI_2, PI, 3.0 * PI] {
        let mm = MobiusLabel::new(l, r, phi)?;
        let b = xi_torus_state(l, r, (phi + PI) / 2.0, phi, cutoff)?;
        let sandwich = projection_mobius(&a, &b, &mm, cutoff)?;
        let sum_reading = projection_sum_reading(l, 0.3, mobius_label_value(&mm));
        projection.push(ProjectionRow {
            mobius: mm,
            sandwich,
            sum_reading,
            difference: (sandwich - sum_reading).norm(),
        });
    }
    Ok(XiFactorReport {
        l,
        r,
        max_plus_vs_torus: rows.iter().map(|x| x.plus_vs_torus).fold(0.0, f64::max),
        max_minus_vs_torus: rows.iter().map(|x| x.minus_vs_torus).fold(0.0, f64::max),
        sign_convention: rows,
        factorization_max_rel_error: worst,
        four_pi: four_pi_report(&m0, cutoff)?,
        two_pi_exponent: mobius_overlap_exponent(&m0, &m0.advanced(1)),
        two_pi_brute: twist.brute,
        two_pi_theta: twist.theta,
        projection,
        projection_note:
            "sum_reading reads h' = -ln|xi'| and psi = arg xi'; this reading is a guess",
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HamiltonianRow {
    pub theta: f64,
    pub p: [f64; 3],
    pub oracle: f64,
    pub closed_form: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LagrangianRow {
    pub theta: f64,
    pub qdot: [f64; 3],
    pub embedding: f64,
    pub closed_form: f64,
    pub difference: f64,
    /// `closed_form − m/2 · r²/4 · φ̇²`
    pub closed_form_without_quarter: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LagrangianReport {
    pub shape: TorusShape,
    pub hamiltonian: Vec<HamiltonianRow>,
    pub max_hamiltonian_difference: f64,
    pub lagrangian: Vec<LagrangianRow>,
    pub max_lagrangian_difference: f64,
    pub max_constrained_difference: f64,
}

/// Closed form against oracle Hamiltonian on a `(θ, p)` grid with `|cos θ| > 0.1`,
/// and closed form against embedding Lagrangian, free and along `θ̇ = φ̇/2`.
pub fn lagrangian_table(shape: &TorusShape) -> Result<LagrangianReport> {
    let thetas: Vec<f64> = (0..12)
        .map(|k| -PI + TAU * (k as f64 + 0.5) / 12.0)
        .filter(|t| t.cos().abs() > 0.1)
        .collect();
    let momenta = [
        [0.0, 1.0, 0.0],
        [0.5, 0.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.3, -0.7, 0.4],
        [-1.0, 0.5, -0.2],
    ];
    let mut hrows = Vec::new();
    for &theta in &thetas {
        for p in momenta {
            let q = [theta, 0.0, shape.l];
            let oracle = hamiltonian(shape, q, p)?;
            let closed_form = hamiltonian_closed_form(shape, q, p)?;
            hrows.push(HamiltonianRow {
                theta,
                p,
                oracle,
                closed_form,
                difference: closed_form - oracle,
            });
        }
    }
    let mut lrows = Vec::new();
    let mut constrained: f64 = 0.0;
    for &theta in &thetas {
        for v in [[0.0, 1.0, 0.0], [0.5, 1.0, 0.0], [0.2, -0.4, 0.9]] {
            let q = [theta, 0.0, shape.l];
            let embedding = lagrangian_embedding(shape, q, v);
            let closed_form = lagrangian_closed_form(shape, q, v);
            let quarter = 0.5 * shape.m * shape.r * shape.r / 4.0 * v[1] * v[1];
            lrows.push(LagrangianRow {
                theta,
                qdot: v,
                embedding,
                closed_form,
                difference: closed_form - embedding,
                closed_form_without_quarter: closed_form - quarter,
            });
            // along the band the θ̇ term supplies the r²/4 by itself
            let vc = [v[1] / 2.0, v[1], v[2]];
            let both =
                lagrangian_closed_form(shape, q, vc) - 0.5 * shape.m * (shape.r * vc[0]).powi(2);
            constrained = constrained.max((both - lagrangian_embedding(shape, q, vc)).abs());
        }
    }
    Ok(LagrangianReport {
        shape: *shape,
        max_hamiltonian_difference: hrows.iter().map(|r| r.difference.abs()).fold(0.0, f64::max),
        hamiltonian: hrows,
        max_lagrangian_difference: lrows.iter().map(|r| r.difference.abs()).fold(0.0, f64::max),
        lagrangian: lrows,
        max_constrained_difference: constrained,
    })
}

/// Legendre identity `|H(q, p(q̇)) − (p·q̇ − L)|`.
pub fn legendre_residual(shape: &TorusShape, q: [f64; 3], qdot: [f64; 3]) -> Result<f64> {
    let Rates::Momentum(p) = legendre(shape, q, qdot).rates else {
        unreachable!("legendre returns momenta")
    };
    let h = hamiltonian(shape, q, p)?;
    let pq: f64 = p.iter().zip(&qdot).map(|(a, b)| a * b).sum();
    Ok((h - (pq - lagrangian_embedding(shape, q, qdot))).abs())
}

#[derive(Debug, Clone, Serialize)]
pub struct TInvarianceRow {
    pub label: MobiusLabel,
    pub xi: Complex64,
    pub distance_to_self: f64,
    pub distance_to_inverse: f64,
}

/// `‖T|ξ⟩ − |ξ⟩‖` and `‖T|ξ⟩ − |ξ⁻¹⟩‖`, relative to `‖ξ‖`.
pub fn t_invariance(labels: &[MobiusLabel], cutoff: u32) -> Result<Vec<TInvarianceRow>> {
    labels
        .iter()
        .map(|m| {
            let s = mobius_coherent(m, cutoff)?;
            let ts = s.apply(LatticeOp::T);
            let xi = mobius_label_value(m);
            let inv = torus_coherent_from_values([xi.inv(), Complex64::new(1.0, 0.0)], cutoff)?
                .restricted(|j| j.j2 == 0);
            Ok(TInvarianceRow {
                label: *m,
                xi,
                distance_to_self: ts.sub(&s)?.norm() / s.norm(),
                distance_to_inverse: ts.sub(&inv)?.norm() / s.norm(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproxPoint {
    pub log_modulus: f64,
    pub exact: f64,
    pub approx: f64,
    pub relative_error: f64,
}

/// Relative error of `e^{(ln|ξ|)²}√π` against the series for
/// `ln|ξ| ∈ [−max, max]`.
pub fn theta_approx_curve(max_log: f64, n: usize) -> Result<Vec<ApproxPoint>> {
    (0..=n)
        .map(|k| {
            let x = -max_log + 2.0 * max_log * k as f64 / n as f64;
            let exact = theta3_at_log_modulus(x.exp())?;
            let approx = theta3_gaussian_approx(x.exp())?;
            Ok(ApproxPoint {
                log_modulus: x,
                exact,
                approx,
                relative_error: (exact - approx) / exact,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingReport {
    pub r: f64,
    pub l: f64,
    pub samples: usize,
    pub max_distance: f64,
    pub max_radial_difference: f64,
    pub max_axial_sum_offset: f64,
}

/// `mobius_embed` against the constraint-composed torus embedding over
/// `samples` values of `φ ∈ [0, 4π)`.
pub fn embedding_consistency(r: f64, l: f64, samples: usize) -> EmbeddingReport {
    let mut max_distance: f64 = 0.0;
    let mut radial: f64 = 0.0;
    let mut axial: f64 = 0.0;
    for k in 0..samples {
        let phi = 2.0 * TAU * k as f64 / samples as f64;
        let a = mobius_embed(r, l, phi);
        let b = constrained_torus_embed(r, l, phi);
        max_distance = max_distance.max(distance(&a, &b));
        radial = radial.max((a[0] - b[0]).abs().max((a[1] - b[1]).abs()));
        axial = axial.max(((a[2] - l) + (b[2] - l)).abs());
    }
    EmbeddingReport {
        r,
        l,
        samples,
        max_distance,
        max_radial_difference: radial,
        max_axial_sum_offset: axial,
    }
}
