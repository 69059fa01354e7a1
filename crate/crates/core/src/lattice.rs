//! Sparse states over the two-dimensional integer lattice and the operators
//! that act on them: ladder shifts `e^{±iφ̂}`, the angular momenta `J`, the
//! time inversion `T`, and the mixing operators `𝓜ᵢ = e^{iφ̂ᵢ}T + (e^{iφ̂ᵢ}T)⁻¹`.
//!
//! States carry a truncation radius. Operators that push amplitude outside
//! the radius drop it and add its squared norm to an accumulated loss that
//! travels with the state, so callers can check how much weight truncation
//! cost them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitudes below this magnitude are not stored.
pub const DROP_THRESHOLD: f64 = 1e-300;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub j1: i64,
    pub j2: i64,
}

impl ModeIndex {
    pub const ORIGIN: ModeIndex = ModeIndex { j1: 0, j2: 0 };

    pub const fn new(j1: i64, j2: i64) -> Self {
        Self { j1, j2 }
    }

    /// Unit step `e⃗ᵢ`.
    pub const fn unit(axis: Axis) -> Self {
        match axis {
            Axis::One => Self::new(1, 0),
            Axis::Two => Self::new(0, 1),
        }
    }

    pub fn component(self, axis: Axis) -> i64 {
        match axis {
            Axis::One => self.j1,
            Axis::Two => self.j2,
        }
    }

    pub fn shifted(self, axis: Axis, delta: i64) -> Self {
        match axis {
            Axis::One => Self::new(self.j1 + delta, self.j2),
            Axis::Two => Self::new(self.j1, self.j2 + delta),
        }
    }

    pub fn radius(self) -> u64 {
        self.j1.unsigned_abs().max(self.j2.unsigned_abs())
    }

    pub fn within(self, cutoff: u32) -> bool {
        self.radius() <= cutoff as u64
    }

    pub fn dot(self, phi: (f64, f64)) -> f64 {
        self.j1 as f64 * phi.0 + self.j2 as f64 * phi.1
    }

    pub fn norm_sqr(self) -> i64 {
        self.j1 * self.j1 + self.j2 * self.j2
    }
}

impl std::ops::Neg for ModeIndex {
    type Output = ModeIndex;
    fn neg(self) -> ModeIndex {
        ModeIndex::new(-self.j1, -self.j2)
    }
}

impl std::ops::Add for ModeIndex {
    type Output = ModeIndex;
    fn add(self, o: ModeIndex) -> ModeIndex {
        ModeIndex::new(self.j1 + o.j1, self.j2 + o.j2)
    }
}

impl std::ops::Sub for ModeIndex {
    type Output = ModeIndex;
    fn sub(self, o: ModeIndex) -> ModeIndex {
        ModeIndex::new(self.j1 - o.j1, self.j2 - o.j2)
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.j1, self.j2)
    }
}

impl FromStr for ModeIndex {
    type Err = Error;

    /// Parses `"j1,j2"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::contract(format!("expected `j1,j2`, got `{s}`")));
        }
        let parse = |p: &str| {
            p.parse::<i64>()
                .map_err(|_| Error::contract(format!("bad lattice component `{p}`")))
        };
        Ok(ModeIndex::new(parse(parts[0])?, parse(parts[1])?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    One,
    Two,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::One, Axis::Two];

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Axis::One),
            2 => Ok(Axis::Two),
            _ => Err(Error::contract(format!("axis must be 1 or 2, got {n}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Axis::One => 1,
            Axis::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn delta(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// How powers of `𝓜ᵢ` are evaluated.
///
/// `ClosedForm` takes `𝓜^{2n}|j⟩ = 2ⁿ|j⟩` and
/// `𝓜^{2n+1}|j⟩ = 2ⁿ(|−j+eᵢ⟩ + |−j−eᵢ⟩)` as the definition of the power.
/// `Compositional` applies the single-step action `k` times; the two differ
/// from `k = 2` on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PowerSemantics {
    #[default]
    ClosedForm,
    Compositional,
}

/// Sparse complex amplitudes over `ℤ²`, truncated to `max(|j1|,|j2|) ≤ cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    amps: BTreeMap<ModeIndex, Complex64>,
    cutoff: u32,
    dropped_norm_sqr: f64,
}

impl LatticeState {
    pub fn zero(cutoff: u32) -> Self {
        Self {
            amps: BTreeMap::new(),
            cutoff,
            dropped_norm_sqr: 0.0,
        }
    }

    /// Fills every index within the cutoff from `f`.
    pub fn from_fn(cutoff: u32, mut f: impl FnMut(ModeIndex) -> Complex64) -> Self {
        let c = cutoff as i64;
        let mut amps = BTreeMap::new();
        for j1 in -c..=c {
            for j2 in -c..=c {
                let j = ModeIndex::new(j1, j2);
                let a = f(j);
                if a.norm() >= DROP_THRESHOLD {
                    amps.insert(j, a);
                }
            }
        }
        Self {
            amps,
            cutoff,
            dropped_norm_sqr: 0.0,
        }
    }

    /// Builds a state from `(index, amplitude)` pairs, summing repeats.
    pub fn from_amplitudes(
        cutoff: u32,
        amps: impl IntoIterator<Item = (ModeIndex, Complex64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (j, a) in amps {
            if !j.within(cutoff) {
                return Err(Error::Range {
                    j1: j.j1,
                    j2: j.j2,
                    cutoff,
                });
            }
            *map.entry(j).or_insert(ZERO) += a;
        }
        map.retain(|_, a: &mut Complex64| a.norm() >= DROP_THRESHOLD);
        Ok(Self {
            amps: map,
            cutoff,
            dropped_norm_sqr: 0.0,
        })
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn get(&self, j: ModeIndex) -> Complex64 {
        self.amps.get(&j).copied().unwrap_or(ZERO)
    }

    /// Stored amplitudes in ascending `(j1, j2)` order.
    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, Complex64)> + '_ {
        self.amps.iter().map(|(j, a)| (*j, *a))
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// 2-norm of all amplitude pushed past the cutoff over this state's history.
    pub fn dropped_norm(&self) -> f64 {
        self.dropped_norm_sqr.sqrt()
    }

    pub fn scaled(&self, k: Complex64) -> Self {
        let mut out = self.clone();
        out.amps.values_mut().for_each(|a| *a *= k);
        out.amps.retain(|_, a| a.norm() >= DROP_THRESHOLD);
        out
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::domain("cannot normalize the zero state"));
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    /// Sum of two states with equal cutoffs.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_cutoff(other)?;
        let mut out = self.clone();
        for (j, a) in other.iter() {
            *out.amps.entry(j).or_insert(ZERO) += a;
        }
        out.amps.retain(|_, a| a.norm() >= DROP_THRESHOLD);
        out.dropped_norm_sqr += other.dropped_norm_sqr;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-ONE))
    }

    /// Keeps the amplitudes for which `keep` holds.
    pub fn restricted(&self, mut keep: impl FnMut(ModeIndex) -> bool) -> Self {
        let mut out = self.clone();
        out.amps.retain(|j, _| keep(*j));
        out
    }

    /// Re-truncates to a different radius; shrinking drops (and records) weight.
    pub fn with_cutoff(&self, cutoff: u32) -> Self {
        let mut out = Self::zero(cutoff);
        out.dropped_norm_sqr = self.dropped_norm_sqr;
        for (j, a) in self.iter() {
            if j.within(cutoff) {
                out.amps.insert(j, a);
            } else {
                out.dropped_norm_sqr += a.norm_sqr();
            }
        }
        out
    }

    /// Multiplies each amplitude by `f(j)`.
    pub fn map_diagonal(&self, mut f: impl FnMut(ModeIndex) -> Complex64) -> Self {
        let mut out = self.clone();
        for (j, a) in out.amps.iter_mut() {
            *a *= f(*j);
        }
        out.amps.retain(|_, a| a.norm() >= DROP_THRESHOLD);
        out
    }

    /// Linear extension of a basis map, dropping images outside the cutoff.
    pub fn map_basis(&self, mut image: impl FnMut(ModeIndex) -> BasisImage) -> Self {
        let mut amps = BTreeMap::new();
        let mut outside: BTreeMap<ModeIndex, Complex64> = BTreeMap::new();
        for (j, a) in self.iter() {
            for (k, c) in image(j).iter() {
                let target = if k.within(self.cutoff) {
                    &mut amps
                } else {
                    &mut outside
                };
                *target.entry(k).or_insert(ZERO) += a * c;
            }
        }
        amps.retain(|_, a: &mut Complex64| a.norm() >= DROP_THRESHOLD);
        let lost: f64 = outside.values().map(|a| a.norm_sqr()).sum();
        Self {
            amps,
            cutoff: self.cutoff,
            dropped_norm_sqr: self.dropped_norm_sqr + lost,
        }
    }

    pub fn apply(&self, op: LatticeOp) -> Self {
        self.map_basis(|j| op.image(j))
    }

    fn check_cutoff(&self, other: &Self) -> Result<()> {
        if self.cutoff != other.cutoff {
            return Err(Error::contract(format!(
                "cutoff mismatch: {} vs {}",
                self.cutoff, other.cutoff
            )));
        }
        Ok(())
    }
}

/// Image of one basis vector under a lattice operator: at most two terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisImage {
    terms: [(ModeIndex, Complex64); 2],
    len: usize,
}

impl BasisImage {
    pub const ZERO: BasisImage = BasisImage {
        terms: [(ModeIndex::ORIGIN, ZERO); 2],
        len: 0,
    };

    pub fn one(j: ModeIndex, c: Complex64) -> Self {
        Self {
            terms: [(j, c), (ModeIndex::ORIGIN, ZERO)],
            len: 1,
        }
    }

    pub fn two(j: ModeIndex, c: Complex64, k: ModeIndex, d: Complex64) -> Self {
        Self {
            terms: [(j, c), (k, d)],
            len: 2,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, Complex64)> + '_ {
        self.terms[..self.len].iter().copied()
    }
}

/// The basis-local operators. Each maps `|j⟩` to at most two basis vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatticeOp {
    Identity,
    /// `e^{±iφ̂ᵢ}`
    Ladder(Axis, Sign),
    J(Axis),
    /// Linear time inversion `|j⟩ → |−j⟩`.
    T,
    M(Axis),
    /// `𝓜ᵢᵏ` under [`PowerSemantics::ClosedForm`].
    MPower(Axis, u32),
}

impl LatticeOp {
    pub fn image(self, j: ModeIndex) -> BasisImage {
        match self {
            LatticeOp::Identity => BasisImage::one(j, ONE),
            LatticeOp::Ladder(axis, sign) => BasisImage::one(j.shifted(axis, sign.delta()), ONE),
            LatticeOp::J(axis) => {
                let m = j.component(axis);
                if m == 0 {
                    BasisImage::ZERO
                } else {
                    BasisImage::one(j, Complex64::new(m as f64, 0.0))
                }
            }
            LatticeOp::T => BasisImage::one(-j, ONE),
            LatticeOp::M(axis) => mixing_image(j, axis, ONE),
            LatticeOp::MPower(axis, k) => {
                let scale = Complex64::new(2f64.powi((k / 2) as i32), 0.0);
                if k % 2 == 0 {
                    BasisImage::one(j, scale)
                } else {
                    mixing_image(j, axis, scale)
                }
            }
        }
    }
}

fn mixing_image(j: ModeIndex, axis: Axis, scale: Complex64) -> BasisImage {
    let e = ModeIndex::unit(axis);
    BasisImage::two(-j + e, scale, -j - e, scale)
}

impl fmt::Display for LatticeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeOp::Identity => write!(f, "identity"),
            LatticeOp::Ladder(a, Sign::Plus) => write!(f, "ladder+{}", a.number()),
            LatticeOp::Ladder(a, Sign::Minus) => write!(f, "ladder-{}", a.number()),
            LatticeOp::J(a) => write!(f, "j{}", a.number()),
            LatticeOp::T => write!(f, "t"),
            LatticeOp::M(a) => write!(f, "m{}", a.number()),
            LatticeOp::MPower(a, k) => write!(f, "m{}^{}", a.number(), k),
        }
    }
}

impl FromStr for LatticeOp {
    type Err = Error;

    /// Parses the tags produced by `Display`: `identity`, `ladder+1`,
    /// `ladder-2`, `j1`, `t`, `m2`, `m1^4`.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::contract(format!("unknown operator tag `{s}`"));
        let axis = |d: &str| -> Result<Axis> {
            let n: u8 = d.parse().map_err(|_| unknown())?;
            Axis::from_number(n).map_err(|_| unknown())
        };
        let s = s.trim();
        match s {
            "identity" | "1" => return Ok(LatticeOp::Identity),
            "t" | "T" => return Ok(LatticeOp::T),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("ladder+") {
            return Ok(LatticeOp::Ladder(axis(rest)?, Sign::Plus));
        }
        if let Some(rest) = s.strip_prefix("ladder-") {
            return Ok(LatticeOp::Ladder(axis(rest)?, Sign::Minus));
        }
        if let Some(rest) = s.strip_prefix('j') {
            return Ok(LatticeOp::J(axis(rest)?));
        }
        if let Some(rest) = s.strip_prefix('m') {
            return match rest.split_once('^') {
                Some((a, k)) => Ok(LatticeOp::MPower(
                    axis(a)?,
                    k.parse().map_err(|_| unknown())?,
                )),
                None => Ok(LatticeOp::M(axis(rest)?)),
            };
        }
        Err(unknown())
    }
}

pub fn basis_state(j: ModeIndex, cutoff: u32) -> Result<LatticeState> {
    LatticeState::from_amplitudes(cutoff, [(j, ONE)])
}

pub fn apply_ladder(axis: Axis, sign: Sign, s: &LatticeState) -> LatticeState {
    s.apply(LatticeOp::Ladder(axis, sign))
}

pub fn apply_j(axis: Axis, s: &LatticeState) -> LatticeState {
    s.apply(LatticeOp::J(axis))
}

pub fn apply_t(s: &LatticeState) -> LatticeState {
    s.apply(LatticeOp::T)
}

pub fn apply_m(axis: Axis, s: &LatticeState) -> LatticeState {
    s.apply(LatticeOp::M(axis))
}

pub fn apply_m_power(axis: Axis, k: u32, s: &LatticeState, sem: PowerSemantics) -> LatticeState {
    match sem {
        PowerSemantics::ClosedForm => s.apply(LatticeOp::MPower(axis, k)),
        PowerSemantics::Compositional => (0..k).fold(s.clone(), |acc, _| apply_m(axis, &acc)),
    }
}

/// `e^{𝓜ᵢ}` as the power series `Σ 𝓜ᵢᵏ/k!`, stopped once a term's norm drops
/// below `tol` (and at least four terms have been taken, past the point where
/// `‖𝓜‖ ≤ 2` guarantees geometric decay).
pub fn apply_exp_m(
    axis: Axis,
    s: &LatticeState,
    sem: PowerSemantics,
    tol: f64,
) -> Result<LatticeState> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut sum = s.clone();
    let mut term = s.clone();
    let mut factorial = 1.0;
    for k in 1..200u32 {
        factorial *= k as f64;
        term = match sem {
            PowerSemantics::ClosedForm => {
                apply_m_power(axis, k, s, sem).scaled(Complex64::new(1.0 / factorial, 0.0))
            }
            PowerSemantics::Compositional => {
                apply_m(axis, &term).scaled(Complex64::new(1.0 / k as f64, 0.0))
            }
        };
        sum = sum.add(&term)?;
        if k >= 4 && term.norm() < tol {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence { terms: 200 })
}

/// `⟨a|b⟩ = Σ conj(a_j) b_j`, in ascending index order.
pub fn inner(a: &LatticeState, b: &LatticeState) -> Result<Complex64> {
    a.check_cutoff(b)?;
    Ok(a.iter()
        .filter_map(|(j, x)| b.amps.get(&j).map(|y| x.conj() * y))
        .sum())
}

/// `⟨φ⃗|s⟩ = Σ s_j e^{i j⃗·φ⃗}`.
pub fn position_wavefunction(s: &LatticeState, phi: (f64, f64)) -> Complex64 {
    s.iter()
        .map(|(j, a)| a * Complex64::from_polar(1.0, j.dot(phi)))
        .sum()
}
