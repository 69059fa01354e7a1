//! Entangling operators on two-mode states, Schmidt analysis, and
//! coherent-state measurements.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{LN_2, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherent::{mobius_coherent, torus_coherent, CoherentLabel, MobiusLabel, TorusLabel};
use crate::error::{Error, Result};
use crate::lattice::{Axis, LatticeOp, LatticeState, ModeIndex, Sign};
use crate::two_mode::{PairIndex, TwoModeState};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative cut below which singular values are treated as zero.
pub const SCHMIDT_FLUSH: f64 = 1e-12;
/// `Tr(γρ₀)` below this is a degenerate reference.
pub const REFERENCE_GUARD: f64 = 1e-14;
/// Torus factor window used by the torus–Möbius pipeline unless overridden.
pub const DEFAULT_TORUS_WINDOW: u32 = 4;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `D̂ⁿᵢₖ|j, j′⟩ = 4ⁿ[|j⟩ 𝓜ₖ|j′⟩ + 𝓜ᵢ|j⟩ |j′⟩]`, extended linearly.
pub fn apply_d(n: u32, i: Axis, k: Axis, s: &TwoModeState) -> Result<TwoModeState> {
    let a = s.apply_local(LatticeOp::Identity, LatticeOp::M(k));
    let b = s.apply_local(LatticeOp::M(i), LatticeOp::Identity);
    Ok(a.add(&b)?.scaled(c(4f64.powi(n as i32))))
}

/// `(|j⟩|−j′⟩ + |−j⟩|j′⟩)`, normalized.
pub fn ideal_entangled_pair(j: ModeIndex, jp: ModeIndex, cutoff: u32) -> Result<TwoModeState> {
    TwoModeState::from_amplitudes((cutoff, cutoff), [((j, -jp), c(1.0)), ((-j, jp), c(1.0))])?
        .normalized()
}

/// `Σ_l √λ_l |(l,0)⟩|(−l,0)⟩` for `l = −L..=L`; `weights` has length `2L+1`.
pub fn oam_state(weights: &[f64]) -> Result<TwoModeState> {
    if weights.len() % 2 == 0 {
        return Err(Error::contract(format!(
            "weights must cover l = -L..=L (odd length), got {}",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::contract("weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::contract(format!(
            "weights must sum to 1, got {total}"
        )));
    }
    let big_l = (weights.len() / 2) as i64;
    let cutoff = big_l.max(1) as u32;
    TwoModeState::from_amplitudes(
        (cutoff, cutoff),
        weights.iter().enumerate().map(|(i, w)| {
            let l = i as i64 - big_l;
            ((ModeIndex::new(l, 0), ModeIndex::new(-l, 0)), c(w.sqrt()))
        }),
    )
}

/// Singular values of the coefficient matrix, descending; values below
/// `SCHMIDT_FLUSH · σ_max` are set to zero.
pub fn schmidt(s: &TwoModeState) -> Vec<f64> {
    if s.is_empty() {
        return Vec::new();
    }
    let (_, _, m) = s.coefficient_matrix();
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let cut = sv[0] * SCHMIDT_FLUSH;
    for v in sv.iter_mut() {
        if *v < cut {
            *v = 0.0;
        }
    }
    sv
}

pub fn schmidt_rank(s: &TwoModeState) -> usize {
    schmidt(s).iter().filter(|v| **v > 0.0).count()
}

/// `−Σ p ln p` with `p = σ²/Σσ²`.
pub fn entropy(singular_values: &[f64]) -> Result<f64> {
    let total: f64 = singular_values.iter().map(|v| v * v).sum();
    if !(total > 0.0) {
        return Err(Error::domain("entropy of an all-zero spectrum"));
    }
    let h: f64 = singular_values
        .iter()
        .map(|v| v * v / total)
        .filter(|p| *p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    Ok(h.max(0.0))
}

/// [`entropy`] in bits.
pub fn entropy_bits(singular_values: &[f64]) -> Result<f64> {
    Ok(entropy(singular_values)? / LN_2)
}

/// `M̂^{(ss′)} = e^{isφ̂₁} ⊗ T + T⁻¹ ⊗ e^{is′φ̂₁}`
pub fn apply_m_ss(s: Sign, sp: Sign, st: &TwoModeState) -> Result<TwoModeState> {
    let a = st.apply_local(LatticeOp::Ladder(Axis::One, s), LatticeOp::T);
    let b = st.apply_local(LatticeOp::T, LatticeOp::Ladder(Axis::One, sp));
    a.add(&b)
}

/// `Ŵ_∩ = Ŵ^{(Torus)} ⊗ 1 + 1 ⊗ Ŵ^{(Mobius)}` on a torus ⊗ Möbius state.
pub fn apply_w_intersection(
    w_torus: LatticeOp,
    w_mobius: LatticeOp,
    st: &TwoModeState,
) -> Result<TwoModeState> {
    let a = st.apply_local(w_torus, LatticeOp::Identity);
    let b = st.apply_local(LatticeOp::Identity, w_mobius);
    a.add(&b)
}

/// Parses an operator tag, reporting unknown tags as a contract error.
pub fn parse_op_tag(tag: &str) -> Result<LatticeOp> {
    tag.parse::<LatticeOp>()
        .map_err(|_| Error::contract(format!("unknown operator tag '{tag}'")))
}

/// Ordered product basis `first × second`; entry `(a, b)` sits at
/// `a · second.len() + b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairBasis {
    pub first: Vec<ModeIndex>,
    pub second: Vec<ModeIndex>,
}

impl PairBasis {
    /// The smallest product basis containing the support of every state.
    pub fn covering(states: &[&TwoModeState]) -> Self {
        let mut first = BTreeSet::new();
        let mut second = BTreeSet::new();
        for s in states {
            for ((j, k), _) in s.iter() {
                first.insert(j);
                second.insert(k);
            }
        }
        Self {
            first: first.into_iter().collect(),
            second: second.into_iter().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.first.len() * self.second.len()
    }

    pub fn index_of(&self, p: PairIndex) -> Option<usize> {
        let a = self.first.binary_search(&p.0).ok()?;
        let b = self.second.binary_search(&p.1).ok()?;
        Some(a * self.second.len() + b)
    }

    /// Coefficient vector of `s` in this basis.
    pub fn vector(&self, s: &TwoModeState) -> Result<Vec<Complex64>> {
        let mut v = vec![ZERO; self.dim()];
        for (p, a) in s.iter() {
            let i = self.index_of(p).ok_or_else(|| {
                Error::contract(format!(
                    "state has support at ({}, {}) outside the basis",
                    p.0, p.1
                ))
            })?;
            v[i] = a;
        }
        Ok(v)
    }
}

/// Unit-trace density matrix over a [`PairBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub basis: PairBasis,
    pub matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `max |ρ − ρ†|`
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..=i {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|x| x.norm_sqr()).sum()
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }
}

/// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩` over the support of `st`.
pub fn density_from_state(st: &TwoModeState) -> Result<DensityMatrix> {
    density_on_basis(st, &PairBasis::covering(&[st]))
}

pub fn density_on_basis(st: &TwoModeState, basis: &PairBasis) -> Result<DensityMatrix> {
    let n2 = st.norm_sqr();
    if !(n2 > 0.0) {
        return Err(Error::domain("density matrix of the zero state"));
    }
    let v = basis.vector(st)?;
    let dim = v.len();
    let matrix = DMatrix::from_fn(dim, dim, |i, j| v[i] * v[j].conj() / n2);
    Ok(DensityMatrix {
        basis: basis.clone(),
        matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A probe `|ξ⟩` on one factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProbeLabel {
    Torus(TorusLabel),
    Mobius(MobiusLabel),
    Basis(ModeIndex),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub label: ProbeLabel,
    pub normalize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub probes: Vec<Probe>,
}

pub const DEFAULT_PROBE_PHASES: usize = 8;
pub const DEFAULT_PROBE_LS: [f64; 3] = [-0.5, 0.0, 0.5];

impl ProbeSet {
    pub fn new(probes: Vec<Probe>) -> Result<Self> {
        if probes.is_empty() {
            return Err(Error::contract("probe set is empty"));
        }
        Ok(Self { probes })
    }

    /// Normalized Möbius probes on the default grid of phases and moduli.
    pub fn default_mobius(r: f64) -> Result<Self> {
        let mut probes = Vec::new();
        for l in DEFAULT_PROBE_LS {
            for k in 0..DEFAULT_PROBE_PHASES {
                let phi = TAU * k as f64 / DEFAULT_PROBE_PHASES as f64;
                probes.push(Probe {
                    label: ProbeLabel::Mobius(MobiusLabel::new(l, r, phi)?),
                    normalize: true,
                });
            }
        }
        Self::new(probes)
    }

    /// Normalized torus probes, the same `(l, α)` on both axes.
    pub fn default_torus() -> Result<Self> {
        let mut probes = Vec::new();
        for l in DEFAULT_PROBE_LS {
            for k in 0..DEFAULT_PROBE_PHASES {
                let a = CoherentLabel::new(l, TAU * k as f64 / DEFAULT_PROBE_PHASES as f64)?;
                probes.push(Probe {
                    label: ProbeLabel::Torus([a, a]),
                    normalize: true,
                });
            }
        }
        Self::new(probes)
    }

    /// Every basis vector of `basis` as a probe.
    pub fn basis(basis: &[ModeIndex]) -> Result<Self> {
        Self::new(
            basis
                .iter()
                .map(|j| Probe {
                    label: ProbeLabel::Basis(*j),
                    normalize: false,
                })
                .collect(),
        )
    }

    /// Probe vectors restricted to `basis`.
    fn vectors(&self, basis: &[ModeIndex], cutoff: u32) -> Result<Vec<Vec<Complex64>>> {
        let build_cutoff = cutoff.max(crate::coherent::MIN_CUTOFF);
        self.probes
            .iter()
            .map(|p| {
                let state: LatticeState = match p.label {
                    ProbeLabel::Torus(z) => torus_coherent(&z, build_cutoff)?,
                    ProbeLabel::Mobius(m) => mobius_coherent(&m, build_cutoff)?,
                    ProbeLabel::Basis(j) => LatticeState::from_amplitudes(
                        build_cutoff.max(j.radius() as u32),
                        [(j, c(1.0))],
                    )?,
                };
                let mut v: Vec<Complex64> = basis.iter().map(|j| state.get(*j)).collect();
                if p.normalize {
                    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                    if n == 0.0 {
                        return Err(Error::domain("probe vanishes on the factor basis"));
                    }
                    v.iter_mut().for_each(|x| *x /= n);
                }
                Ok(v)
            })
            .collect()
    }
}

/// `γ = P ⊗ 1` (left) or `1 ⊗ P` (right) with `P = Σ_ξ |ξ⟩⟨ξ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMeasurement {
    pub side: Side,
    pub factor_basis: Vec<ModeIndex>,
    pub projector: DMatrix<Complex64>,
    pub other_basis: Vec<ModeIndex>,
    /// `g_{ξξ̃} = ⟨ξ|ξ̃⟩` over the probes as used.
    pub gram: DMatrix<Complex64>,
}

/// Builds `γ` over `basis`, probing the factor named by `side`.
pub fn gamma_measurement(
    side: Side,
    probes: &ProbeSet,
    basis: &PairBasis,
    cutoff: u32,
) -> Result<GammaMeasurement> {
    let (factor, other) = match side {
        Side::Left => (&basis.first, &basis.second),
        Side::Right => (&basis.second, &basis.first),
    };
    let vecs = probes.vectors(factor, cutoff)?;
    let n = factor.len();
    let mut projector = DMatrix::from_element(n, n, ZERO);
    for v in &vecs {
        for i in 0..n {
            for j in 0..n {
                projector[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    let gram = DMatrix::from_fn(vecs.len(), vecs.len(), |a, b| {
        vecs[a]
            .iter()
            .zip(&vecs[b])
            .map(|(x, y)| x.conj() * y)
            .sum()
    });
    Ok(GammaMeasurement {
        side,
        factor_basis: factor.clone(),
        projector,
        other_basis: other.clone(),
        gram,
    })
}

impl GammaMeasurement {
    pub fn dim(&self) -> usize {
        self.factor_basis.len() * self.other_basis.len()
    }

    /// The full operator over the pair basis.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let (nf, no) = (self.factor_basis.len(), self.other_basis.len());
        let n = nf * no;
        let mut g = DMatrix::from_element(n, n, ZERO);
        for a in 0..nf {
            for a2 in 0..nf {
                let p = self.projector[(a, a2)];
                if p == ZERO {
                    continue;
                }
                for b in 0..no {
                    let (i, j) = match self.side {
                        Side::Left => (a * no + b, a2 * no + b),
                        Side::Right => (b * nf + a, b * nf + a2),
                    };
                    g[(i, j)] = p;
                }
            }
        }
        g
    }

    /// `Tr(γρ)`, contracted without forming `γ`.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<Complex64> {
        let (factor, other) = match self.side {
            Side::Left => (&rho.basis.first, &rho.basis.second),
            Side::Right => (&rho.basis.second, &rho.basis.first),
        };
        if factor != &self.factor_basis || other != &self.other_basis {
            return Err(Error::contract(
                "measurement and density matrix use different bases",
            ));
        }
        let (nf, no) = (factor.len(), other.len());
        let at = |a: usize, b: usize| match self.side {
            Side::Left => a * no + b,
            Side::Right => b * nf + a,
        };
        let mut acc = ZERO;
        for a in 0..nf {
            for a2 in 0..nf {
                let p = self.projector[(a, a2)];
                if p == ZERO {
                    continue;
                }
                for b in 0..no {
                    acc += p * rho.matrix[(at(a2, b), at(a, b))];
                }
            }
        }
        Ok(acc)
    }
}

/// `Tr(γ²) = Tr(P²) · dim(other)`
pub fn hs_dimension(gamma: &GammaMeasurement) -> f64 {
    let p = &gamma.projector;
    let tr: f64 = p.iter().map(|x| x.norm_sqr()).sum();
    tr * gamma.other_basis.len() as f64
}

/// `Tr(γ²)` from the dense operator; a cross-check of [`hs_dimension`].
pub fn hs_dimension_dense(gamma: &GammaMeasurement) -> f64 {
    let g = gamma.to_dense();
    (&g * &g).trace().re
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureReport {
    pub r: f64,
    pub r0: f64,
    pub lambda: f64,
    pub hs_dimension: f64,
}

/// `r = Tr(γρ)`, `r0 = Tr(γρ₀)`, `λ = r / r0`.
pub fn measure_ratio(
    gamma: &GammaMeasurement,
    rho: &DensityMatrix,
    rho0: &DensityMatrix,
) -> Result<MeasureReport> {
    if rho.basis != rho0.basis {
        return Err(Error::contract("density matrices use different bases"));
    }
    let r = gamma.expectation(rho)?.re;
    let r0 = gamma.expectation(rho0)?.re;
    if !(r0.abs() >= REFERENCE_GUARD) {
        return Err(Error::singular(format!(
            "degenerate reference: Tr(gamma rho0) = {r0:e}"
        )));
    }
    Ok(MeasureReport {
        r,
        r0,
        lambda: r / r0,
        hs_dimension: hs_dimension(gamma),
    })
}

/// Both one-sided measurements of one state against its reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub dim: usize,
    pub left: MeasureReport,
    pub right: MeasureReport,
    pub entropy: f64,
    pub entropy_reference: f64,
    pub schmidt_rank: usize,
}

fn measure_pair(
    st: &TwoModeState,
    st0: &TwoModeState,
    left: &ProbeSet,
    right: &ProbeSet,
    cutoffs: (u32, u32),
) -> Result<PipelineReport> {
    let basis = PairBasis::covering(&[st, st0]);
    let rho = density_on_basis(st, &basis)?;
    let rho0 = density_on_basis(st0, &basis)?;
    let gl = gamma_measurement(Side::Left, left, &basis, cutoffs.0)?;
    let gr = gamma_measurement(Side::Right, right, &basis, cutoffs.1)?;
    let sv = schmidt(st);
    Ok(PipelineReport {
        dim: basis.dim(),
        left: measure_ratio(&gl, &rho, &rho0)?,
        right: measure_ratio(&gr, &rho, &rho0)?,
        entropy: entropy(&sv)?,
        entropy_reference: entropy(&schmidt(st0))?,
        schmidt_rank: sv.iter().filter(|v| **v > 0.0).count(),
    })
}

/// `λ^{ss′}`: `M̂^{(ss′)}|ξ⟩|ξ̃⟩` against the unacted pair, default Möbius probes on both sides.
pub fn mobius_pair_ratio(
    s: Sign,
    sp: Sign,
    xi: &MobiusLabel,
    xi2: &MobiusLabel,
    cutoff: u32,
) -> Result<PipelineReport> {
    let st0 = TwoModeState::product(
        &mobius_coherent(xi, cutoff)?,
        &mobius_coherent(xi2, cutoff)?,
    );
    let st = apply_m_ss(s, sp, &st0)?;
    let left = ProbeSet::default_mobius(xi.r)?;
    let right = ProbeSet::default_mobius(xi2.r)?;
    measure_pair(&st, &st0, &left, &right, (cutoff, cutoff))
}

/// `|ξ_T⟩ ⊗ |ξ_M⟩` with the torus factor cut to `window`.
pub fn torus_mobius_state(
    torus: &TorusLabel,
    mobius: &MobiusLabel,
    cutoff: u32,
    window: u32,
) -> Result<TwoModeState> {
    let t = torus_coherent(torus, cutoff.max(window))?.with_cutoff(window);
    Ok(TwoModeState::product(&t, &mobius_coherent(mobius, cutoff)?))
}

/// `λ^{(Torus)}` (left) and `λ^{(Mobius)}` (right) for `Ŵ_∩` on `|ξ_T⟩|ξ_M⟩`.
pub fn torus_mobius_ratio(
    w_torus: LatticeOp,
    w_mobius: LatticeOp,
    torus: &TorusLabel,
    mobius: &MobiusLabel,
    cutoff: u32,
    window: u32,
) -> Result<PipelineReport> {
    let st0 = torus_mobius_state(torus, mobius, cutoff, window)?;
    let st = apply_w_intersection(w_torus, w_mobius, &st0)?;
    let left = ProbeSet::default_torus()?;
    let right = ProbeSet::default_mobius(mobius.r)?;
    measure_pair(&st, &st0, &left, &right, (window, cutoff))
}

/// Gram-contraction and mixed-index readings of the left measurement on a
/// product pair `|ξ⟩|ξ̃⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionReport {
    pub structural: f64,
    pub gram: f64,
    pub mixed_index: Complex64,
    pub gram_residual: f64,
    pub mixed_residual: f64,
}

pub fn contraction_report(
    xi: &MobiusLabel,
    xi2: &MobiusLabel,
    probes: &ProbeSet,
    cutoff: u32,
) -> Result<ContractionReport> {
    let st = TwoModeState::product(
        &mobius_coherent(xi, cutoff)?,
        &mobius_coherent(xi2, cutoff)?,
    );
    let basis = PairBasis::covering(&[&st]);
    let rho = density_on_basis(&st, &basis)?;
    let structural = gamma_measurement(Side::Left, probes, &basis, cutoff)?
        .expectation(&rho)?
        .re;

    let probe_vecs = probes.vectors(&basis.first, cutoff)?;
    let unit = |lbl: &MobiusLabel| -> Result<Vec<Complex64>> {
        let s = mobius_coherent(lbl, cutoff)?;
        let v: Vec<Complex64> = basis.first.iter().map(|j| s.get(*j)).collect();
        let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        Ok(v.into_iter().map(|x| x / n).collect())
    };
    let (a, b) = (unit(xi)?, unit(xi2)?);
    let dot = |p: &[Complex64], q: &[Complex64]| -> Complex64 {
        p.iter().zip(q).map(|(x, y)| x.conj() * y).sum()
    };
    let mut gram = 0.0;
    let mut mixed = ZERO;
    for p in &probe_vecs {
        let g = dot(p, &a);
        gram += g.norm_sqr();
        mixed += g * dot(&b, p);
    }
    Ok(ContractionReport {
        structural,
        gram,
        mixed_index: mixed,
        gram_residual: (structural - gram).abs(),
        mixed_residual: (c(structural) - mixed).norm(),
    })
}

/// Schmidt spectrum keyed by the support of each factor, for reporting.
pub fn support_sizes(s: &TwoModeState) -> (usize, usize) {
    let mut a = BTreeMap::new();
    let mut b = BTreeMap::new();
    for ((j, k), _) in s.iter() {
        a.insert(j, ());
        b.insert(k, ());
    }
    (a.len(), b.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn basis_pair(j: ModeIndex, k: ModeIndex, cutoff: u32) -> TwoModeState {
        TwoModeState::from_amplitudes((cutoff, cutoff), [((j, k), c(1.0))]).unwrap()
    }

    #[test]
    fn d_operator_basis_action() {
        let o = ModeIndex::ORIGIN;
        let (e, me) = (ModeIndex::new(1, 0), ModeIndex::new(-1, 0));
        let out = apply_d(0, Axis::One, Axis::One, &basis_pair(o, o, 4)).unwrap();
        let expect = TwoModeState::from_amplitudes(
            (4, 4),
            [
                ((o, e), c(1.0)),
                ((o, me), c(1.0)),
                ((e, o), c(1.0)),
                ((me, o), c(1.0)),
            ],
        )
        .unwrap();
        assert_eq!(out, expect);
        let out1 = apply_d(1, Axis::One, Axis::One, &basis_pair(o, o, 4)).unwrap();
        assert_eq!(out1, expect.scaled(c(4.0)));
        let h = entropy(&schmidt(&out.normalized().unwrap())).unwrap();
        assert!((h - LN_2).abs() < 1e-12);
        let sv = schmidt(&out.normalized().unwrap());
        assert!((sv[0] - 0.5f64.sqrt()).abs() < 1e-12 && (sv[1] - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn d_operator_power_scaling_on_coherent_input() {
        let z = [
            CoherentLabel::new(0.2, 1.0).unwrap(),
            CoherentLabel::new(-0.3, 0.0).unwrap(),
        ];
        let st = TwoModeState::product(
            &torus_coherent(&z, 5).unwrap(),
            &torus_coherent(&z, 5).unwrap(),
        );
        let a = apply_d(2, Axis::One, Axis::Two, &st).unwrap();
        let b = apply_d(3, Axis::One, Axis::Two, &st).unwrap();
        assert_eq!(a.scaled(c(4.0)), b);
    }

    #[test]
    fn ideal_pairs() {
        let p = ideal_entangled_pair(ModeIndex::new(1, 0), ModeIndex::new(2, 0), 4).unwrap();
        assert!((entropy(&schmidt(&p)).unwrap() - LN_2).abs() < 1e-12);
        assert_eq!(schmidt_rank(&p), 2);
        let q = ideal_entangled_pair(ModeIndex::ORIGIN, ModeIndex::ORIGIN, 4).unwrap();
        assert_eq!(entropy(&schmidt(&q)).unwrap(), 0.0);
        assert_eq!(q.len(), 1);
        // one index self-inverse: product state
        let r = ideal_entangled_pair(ModeIndex::ORIGIN, ModeIndex::new(0, 2), 4).unwrap();
        assert_eq!(schmidt_rank(&r), 1);
        assert!(ideal_entangled_pair(ModeIndex::new(5, 0), ModeIndex::ORIGIN, 4).is_err());
    }

    #[test]
    fn oam_states() {
        let uni = oam_state(&[0.2; 5]).unwrap();
        assert!((entropy(&schmidt(&uni)).unwrap() - 5f64.ln()).abs() < 1e-12);
        let one = oam_state(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(entropy(&schmidt(&one)).unwrap(), 0.0);
        let half = oam_state(&[0.5, 0.0, 0.5]).unwrap();
        let ideal = ideal_entangled_pair(ModeIndex::new(1, 0), ModeIndex::new(2, 0), 4).unwrap();
        let (a, b) = (schmidt(&half), schmidt(&ideal));
        assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        assert!((entropy_bits(&a).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(oam_state(&[0.5, 0.6, 0.0]).unwrap_err().tag(), "contract");
        assert_eq!(oam_state(&[0.5, 0.5]).unwrap_err().tag(), "contract");
    }

    #[test]
    fn entropy_edges() {
        assert_eq!(entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((entropy(&[1.0, 1.0]).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(entropy(&[0.0, 0.0]).unwrap_err().tag(), "domain");
        assert!(entropy(&[]).is_err());
    }

    #[test]
    fn product_coherent_state_has_rank_one() {
        let z = [
            CoherentLabel::new(0.2, 1.0).unwrap(),
            CoherentLabel::new(-0.3, 0.0).unwrap(),
        ];
        let w = [
            CoherentLabel::new(0.0, 2.0).unwrap(),
            CoherentLabel::new(0.5, 3.0).unwrap(),
        ];
        let st = crate::coherent::two_mode_coherent(&z, &w, 4).unwrap();
        assert_eq!(schmidt_rank(&st), 1);
        assert_eq!(entropy(&schmidt(&st)).unwrap(), 0.0);
        let sv = schmidt(&st);
        assert!(
            (sv.iter().map(|v| v * v).sum::<f64>() - st.norm_sqr()).abs() < 1e-12 * st.norm_sqr()
        );
    }

    #[test]
    fn m_ss_basis_action() {
        let st = basis_pair(ModeIndex::new(1, 0), ModeIndex::new(2, 0), 4);
        let out = apply_m_ss(Sign::Plus, Sign::Minus, &st).unwrap();
        let expect = TwoModeState::from_amplitudes(
            (4, 4),
            [
                ((ModeIndex::new(2, 0), ModeIndex::new(-2, 0)), c(1.0)),
                ((ModeIndex::new(-1, 0), ModeIndex::new(1, 0)), c(1.0)),
            ],
        )
        .unwrap();
        assert_eq!(out, expect);
    }

    #[test]
    fn m_ss_on_coherent_pairs() {
        let cutoff = 8;
        let xi = MobiusLabel::new(0.1, 0.5, 0.8).unwrap();
        let xi2 = MobiusLabel::new(-0.2, 0.3, 2.0).unwrap();
        let (a, b) = (
            mobius_coherent(&xi, cutoff).unwrap(),
            mobius_coherent(&xi2, cutoff).unwrap(),
        );
        for (s, sp) in [
            (Sign::Plus, Sign::Minus),
            (Sign::Minus, Sign::Plus),
            (Sign::Plus, Sign::Plus),
        ] {
            let lhs = apply_m_ss(s, sp, &TwoModeState::product(&a, &b)).unwrap();
            let ladder = |x: Sign| LatticeOp::Ladder(Axis::One, x);
            let rhs = TwoModeState::product(&a.apply(ladder(s)), &b.apply(LatticeOp::T))
                .add(&TwoModeState::product(
                    &a.apply(LatticeOp::T),
                    &b.apply(ladder(sp)),
                ))
                .unwrap();
            assert!(lhs.sub(&rhs).unwrap().norm() < 1e-12 * lhs.norm());
            assert!(schmidt_rank(&lhs) <= 2);
        }
        // T-fixed labels: T|ξ⟩ = |ξ⟩
        let fixed = MobiusLabel::new(1.5f64.ln(), 0.5, 0.0).unwrap();
        let f = mobius_coherent(&fixed, cutoff).unwrap();
        let lhs = apply_m_ss(Sign::Plus, Sign::Minus, &TwoModeState::product(&f, &f)).unwrap();
        let ladder = |x: Sign| LatticeOp::Ladder(Axis::One, x);
        let rhs = TwoModeState::product(&f.apply(ladder(Sign::Plus)), &f)
            .add(&TwoModeState::product(&f, &f.apply(ladder(Sign::Minus))))
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().norm() < 1e-12 * lhs.norm());
    }

    #[test]
    fn density_invariants() {
        let st = ideal_entangled_pair(ModeIndex::new(1, 0), ModeIndex::new(2, 1), 3).unwrap();
        let rho = density_from_state(&st.scaled(c(3.0))).unwrap();
        assert_eq!(rho.hermiticity_defect(), 0.0);
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        let ev = rho.eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!(ev[1..].iter().all(|e| e.abs() < 1e-12));
        assert_eq!(
            density_from_state(&TwoModeState::zero((2, 2)))
                .unwrap_err()
                .tag(),
            "domain"
        );
    }

    fn small_basis() -> PairBasis {
        let row: Vec<ModeIndex> = (-2..=2).map(|j| ModeIndex::new(j, 0)).collect();
        PairBasis {
            first: row.clone(),
            second: row[1..4].to_vec(),
        }
    }

    #[test]
    fn single_probe_projector() {
        let basis = small_basis();
        let probe = ProbeSet::new(vec![Probe {
            label: ProbeLabel::Mobius(MobiusLabel::new(0.0, 0.5, 1.0).unwrap()),
            normalize: true,
        }])
        .unwrap();
        let g = gamma_measurement(Side::Left, &probe, &basis, 8).unwrap();
        let p2 = &g.projector * &g.projector;
        assert!((&p2 - &g.projector).norm() < 1e-14);
        assert!((hs_dimension(&g) - 3.0).abs() < 1e-12);
        assert!((hs_dimension_dense(&g) - 3.0).abs() < 1e-12);
        assert!((g.gram[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complete_probes_give_identity() {
        let basis = small_basis();
        for side in [Side::Left, Side::Right] {
            let factor = match side {
                Side::Left => &basis.first,
                Side::Right => &basis.second,
            };
            let g = gamma_measurement(side, &ProbeSet::basis(factor).unwrap(), &basis, 4).unwrap();
            let dense = g.to_dense();
            assert_eq!(dense, DMatrix::identity(basis.dim(), basis.dim()));
            assert_eq!(hs_dimension(&g), basis.dim() as f64);
        }
    }

    #[test]
    fn left_right_hs_symmetry_and_gram() {
        let row: Vec<ModeIndex> = (-4..=4).map(|j| ModeIndex::new(j, 0)).collect();
        let basis = PairBasis {
            first: row.clone(),
            second: row,
        };
        let probes = ProbeSet::default_mobius(0.5).unwrap();
        let l = gamma_measurement(Side::Left, &probes, &basis, 8).unwrap();
        let r = gamma_measurement(Side::Right, &probes, &basis, 8).unwrap();
        assert!((hs_dimension(&l) - hs_dimension(&r)).abs() < 1e-12 * hs_dimension(&l));
        assert!((hs_dimension(&l) - hs_dimension_dense(&l)).abs() < 1e-9 * hs_dimension(&l));
        let g = &l.gram;
        assert!((g - g.adjoint()).norm() < 1e-14);
        assert!(g
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .all(|e| *e > -1e-10));
    }

    #[test]
    fn expectation_matches_dense() {
        let xi = MobiusLabel::new(0.1, 0.5, 0.8).unwrap();
        let st0 = TwoModeState::product(
            &mobius_coherent(&xi, 4).unwrap(),
            &mobius_coherent(&xi, 4).unwrap(),
        );
        let st = apply_m_ss(Sign::Plus, Sign::Minus, &st0).unwrap();
        let basis = PairBasis::covering(&[&st, &st0]);
        let rho = density_on_basis(&st, &basis).unwrap();
        for side in [Side::Left, Side::Right] {
            let g = gamma_measurement(side, &ProbeSet::default_mobius(0.5).unwrap(), &basis, 4)
                .unwrap();
            let dense = (g.to_dense() * &rho.matrix).trace();
            assert!((g.expectation(&rho).unwrap() - dense).norm() < 1e-12);
        }
    }

    #[test]
    fn measure_ratio_edges() {
        let xi = MobiusLabel::new(0.1, 0.5, 0.8).unwrap();
        let st = TwoModeState::product(
            &mobius_coherent(&xi, 4).unwrap(),
            &mobius_coherent(&xi, 4).unwrap(),
        );
        let basis = PairBasis::covering(&[&st]);
        let rho = density_on_basis(&st, &basis).unwrap();
        let g = gamma_measurement(
            Side::Left,
            &ProbeSet::default_mobius(0.5).unwrap(),
            &basis,
            4,
        )
        .unwrap();
        assert_eq!(measure_ratio(&g, &rho, &rho).unwrap().lambda, 1.0);
        let id = gamma_measurement(
            Side::Right,
            &ProbeSet::basis(&basis.second).unwrap(),
            &basis,
            4,
        )
        .unwrap();
        let rep = measure_ratio(&id, &rho, &rho).unwrap();
        assert!((rep.r - 1.0).abs() < 1e-12);

        // probe orthogonal to the whole support
        let off = ProbeSet::basis(&[ModeIndex::new(0, 1)]).unwrap();
        let wide = PairBasis {
            first: vec![ModeIndex::new(0, 0), ModeIndex::new(0, 1)],
            second: vec![ModeIndex::ORIGIN],
        };
        let s = TwoModeState::from_amplitudes(
            (2, 2),
            [((ModeIndex::ORIGIN, ModeIndex::ORIGIN), c(1.0))],
        )
        .unwrap();
        let rho = density_on_basis(&s, &wide).unwrap();
        let g = gamma_measurement(Side::Left, &off, &wide, 2).unwrap();
        assert_eq!(
            measure_ratio(&g, &rho, &rho).unwrap_err().tag(),
            "singularity"
        );
    }

    #[test]
    fn mobius_pipeline_is_deterministic() {
        let xi = MobiusLabel::new(0.0, 0.5, 0.0).unwrap();
        let xi2 = MobiusLabel::new(0.2, 0.5, 1.0).unwrap();
        let a = mobius_pair_ratio(Sign::Plus, Sign::Minus, &xi, &xi2, 8).unwrap();
        let b = mobius_pair_ratio(Sign::Plus, Sign::Minus, &xi, &xi2, 8).unwrap();
        assert_eq!(a, b);
        assert!(a.left.lambda.is_finite() && a.left.lambda > 0.0);
        assert_eq!(a.entropy_reference, 0.0);
    }

    #[test]
    fn w_intersection_actions() {
        let st = TwoModeState::from_amplitudes(
            (4, 4),
            [((ModeIndex::new(1, 2), ModeIndex::new(-1, 0)), c(1.0))],
        )
        .unwrap();
        let u = LatticeOp::Ladder(Axis::One, Sign::Plus);
        let out = apply_w_intersection(u, u, &st).unwrap();
        assert_eq!(out.get(ModeIndex::new(2, 2), ModeIndex::new(-1, 0)), c(1.0));
        assert_eq!(out.get(ModeIndex::new(1, 2), ModeIndex::new(0, 0)), c(1.0));
        assert_eq!(out.len(), 2);
        let twice = apply_w_intersection(LatticeOp::Identity, LatticeOp::Identity, &st).unwrap();
        assert_eq!(twice, st.scaled(c(2.0)));
        assert_eq!(parse_op_tag("warp").unwrap_err().tag(), "contract");
    }

    #[test]
    fn w_intersection_entangles_coherent_product() {
        let z = [
            CoherentLabel::new(0.1, 0.5).unwrap(),
            CoherentLabel::new(0.0, 0.0).unwrap(),
        ];
        let m = MobiusLabel::new(0.0, 0.5, 1.0).unwrap();
        let st0 = torus_mobius_state(&z, &m, 6, 6)
            .unwrap()
            .restricted(|j, _| j.j2 == 0);
        assert_eq!(schmidt_rank(&st0), 1);
        let u = LatticeOp::Ladder(Axis::One, Sign::Plus);
        assert_eq!(schmidt_rank(&apply_w_intersection(u, u, &st0).unwrap()), 2);
    }

    #[test]
    fn contraction_readings() {
        let xi = MobiusLabel::new(0.0, 0.5, 0.0).unwrap();
        let xi2 = MobiusLabel::new(0.2, 0.5, 1.0).unwrap();
        let rep =
            contraction_report(&xi, &xi2, &ProbeSet::default_mobius(0.5).unwrap(), 8).unwrap();
        assert!(rep.gram_residual < 1e-12);
    }
}
