//! Bipartite states over `ℤ² × ℤ²`.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{LatticeOp, LatticeState, ModeIndex, DROP_THRESHOLD};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub type PairIndex = (ModeIndex, ModeIndex);

/// Sparse amplitudes over pairs `(j, j′)`; each factor has its own cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    amps: BTreeMap<PairIndex, Complex64>,
    cutoffs: (u32, u32),
    dropped_norm_sqr: f64,
}

impl TwoModeState {
    pub fn zero(cutoffs: (u32, u32)) -> Self {
        Self {
            amps: BTreeMap::new(),
            cutoffs,
            dropped_norm_sqr: 0.0,
        }
    }

    pub fn from_amplitudes(
        cutoffs: (u32, u32),
        amps: impl IntoIterator<Item = (PairIndex, Complex64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for ((j, k), a) in amps {
            for (idx, cut) in [(j, cutoffs.0), (k, cutoffs.1)] {
                if !idx.within(cut) {
                    return Err(Error::Range {
                        j1: idx.j1,
                        j2: idx.j2,
                        cutoff: cut,
                    });
                }
            }
            *map.entry((j, k)).or_insert(ZERO) += a;
        }
        map.retain(|_, a: &mut Complex64| a.norm() >= DROP_THRESHOLD);
        Ok(Self {
            amps: map,
            cutoffs,
            dropped_norm_sqr: 0.0,
        })
    }

    /// `|a⟩ ⊗ |b⟩`
    pub fn product(a: &LatticeState, b: &LatticeState) -> Self {
        // Both factors iterate in ascending order, so this is a sorted bulk build.
        let amps = a
            .iter()
            .flat_map(|(j, x)| b.iter().map(move |(k, y)| ((j, k), x * y)))
            .filter(|(_, v)| v.norm() >= DROP_THRESHOLD)
            .collect();
        Self {
            amps,
            cutoffs: (a.cutoff(), b.cutoff()),
            dropped_norm_sqr: 0.0,
        }
    }

    pub fn cutoffs(&self) -> (u32, u32) {
        self.cutoffs
    }

    pub fn get(&self, j: ModeIndex, k: ModeIndex) -> Complex64 {
        self.amps.get(&(j, k)).copied().unwrap_or(ZERO)
    }

    /// Amplitudes in ascending `(j, j′)` order.
    pub fn iter(&self) -> impl Iterator<Item = (PairIndex, Complex64)> + '_ {
        self.amps.iter().map(|(p, a)| (*p, *a))
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

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_cutoffs(other)?;
        let mut out = self.clone();
        for (p, a) in other.iter() {
            *out.amps.entry(p).or_insert(ZERO) += a;
        }
        out.amps.retain(|_, a| a.norm() >= DROP_THRESHOLD);
        out.dropped_norm_sqr += other.dropped_norm_sqr;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn restricted(&self, mut keep: impl FnMut(ModeIndex, ModeIndex) -> bool) -> Self {
        let mut out = self.clone();
        out.amps.retain(|(j, k), _| keep(*j, *k));
        out
    }

    /// `(A ⊗ B)|ψ⟩`, dropping images outside either cutoff.
    pub fn apply_local(&self, first: LatticeOp, second: LatticeOp) -> Self {
        let mut amps = BTreeMap::new();
        let mut outside: BTreeMap<PairIndex, Complex64> = BTreeMap::new();
        for ((j, k), a) in self.iter() {
            let (ij, ik) = (first.image(j), second.image(k));
            for (j2, x) in ij.iter() {
                for (k2, y) in ik.iter() {
                    let inside = j2.within(self.cutoffs.0) && k2.within(self.cutoffs.1);
                    let target = if inside { &mut amps } else { &mut outside };
                    *target.entry((j2, k2)).or_insert(ZERO) += a * x * y;
                }
            }
        }
        amps.retain(|_, a: &mut Complex64| a.norm() >= DROP_THRESHOLD);
        let lost: f64 = outside.values().map(|a| a.norm_sqr()).sum();
        Self {
            amps,
            cutoffs: self.cutoffs,
            dropped_norm_sqr: self.dropped_norm_sqr + lost,
        }
    }

    /// Multiplies each amplitude by `f(j, j′)`.
    pub fn map_diagonal(&self, mut f: impl FnMut(ModeIndex, ModeIndex) -> Complex64) -> Self {
        let mut out = self.clone();
        for ((j, k), a) in out.amps.iter_mut() {
            *a *= f(*j, *k);
        }
        out.amps.retain(|_, a| a.norm() >= DROP_THRESHOLD);
        out
    }

    /// Coefficient matrix over the support: rows are first-factor indices,
    /// columns second-factor indices, both ascending.
    pub fn coefficient_matrix(&self) -> (Vec<ModeIndex>, Vec<ModeIndex>, DMatrix<Complex64>) {
        let rows: Vec<ModeIndex> = self
            .amps
            .keys()
            .map(|p| p.0)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let cols: Vec<ModeIndex> = self
            .amps
            .keys()
            .map(|p| p.1)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let row_of: BTreeMap<ModeIndex, usize> =
            rows.iter().enumerate().map(|(i, j)| (*j, i)).collect();
        let col_of: BTreeMap<ModeIndex, usize> =
            cols.iter().enumerate().map(|(i, j)| (*j, i)).collect();
        let mut m = DMatrix::from_element(rows.len(), cols.len(), ZERO);
        for ((j, k), a) in self.iter() {
            m[(row_of[&j], col_of[&k])] = a;
        }
        (rows, cols, m)
    }

    fn check_cutoffs(&self, other: &Self) -> Result<()> {
        if self.cutoffs != other.cutoffs {
            return Err(Error::contract(format!(
                "cutoff mismatch: {:?} vs {:?}",
                self.cutoffs, other.cutoffs
            )));
        }
        Ok(())
    }
}

pub fn inner(a: &TwoModeState, b: &TwoModeState) -> Result<Complex64> {
    a.check_cutoffs(b)?;
    Ok(a.iter()
        .filter_map(|(p, x)| b.amps.get(&p).map(|y| x.conj() * y))
        .sum())
}
