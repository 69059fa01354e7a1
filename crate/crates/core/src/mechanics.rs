//! Free motion on the torus and on the Möbius band.
//!
//! The dynamics come from the kinetic energy of the embedded point,
//! `L = ½ q̇ᵀ M(q) q̇`, in one of three coordinate systems:
//! `(θ, φ, Z₀)` with a free axial offset, `(θ, φ)` on a fixed torus, and
//! `(φ, Z₀)` on the band `θ = (φ + π)/2`. The free-axis chart degenerates
//! where `cos θ = 0`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{mobius_constraint, torus_embed, TorusShape};

/// `|cos θ|` below this is treated as the chart singularity.
pub const SINGULAR_COS: f64 = 1e-9;

/// Generalized velocities or momenta conjugate to `(θ, φ, Z₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rates {
    Velocity([f64; 3]),
    Momentum([f64; 3]),
}

/// Coordinates `(θ, φ, Z₀)` with either velocities or momenta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: [f64; 3],
    pub rates: Rates,
}

impl PhasePoint {
    pub fn velocity(q: [f64; 3], qdot: [f64; 3]) -> Self {
        Self {
            q,
            rates: Rates::Velocity(qdot),
        }
    }

    pub fn momentum(q: [f64; 3], p: [f64; 3]) -> Self {
        Self {
            q,
            rates: Rates::Momentum(p),
        }
    }
}

fn mass_free(shape: &TorusShape, theta: f64) -> DMatrix<f64> {
    let (s, _) = theta.sin_cos();
    let (r, m) = (shape.r, shape.m);
    let rho = shape.R + r * s;
    DMatrix::from_row_slice(
        3,
        3,
        &[r * r, 0.0, -r * s, 0.0, rho * rho, 0.0, -r * s, 0.0, 1.0],
    ) * m
}

/// `L = m/2 [r²θ̇² + (R + r sin θ)²φ̇² − 2r sin θ θ̇Ż₀ + Ż₀²]`
pub fn lagrangian_embedding(shape: &TorusShape, q: [f64; 3], qdot: [f64; 3]) -> f64 {
    let v = DVector::from_column_slice(&qdot);
    0.5 * v.dot(&(mass_free(shape, q[0]) * &v))
}

/// The Lagrangian with the extra `r²/4` in the `φ̇²` bracket.
pub fn lagrangian_closed_form(shape: &TorusShape, q: [f64; 3], qdot: [f64; 3]) -> f64 {
    let (r, m) = (shape.r, shape.m);
    let s = q[0].sin();
    let [td, pd, zd] = qdot;
    0.5 * m * pd * pd * ((shape.R + r * s).powi(2) + r * r / 4.0) + 0.5 * m * (r * td).powi(2)
        - m * r * s * zd * td
        + 0.5 * m * zd * zd
}

/// Momenta `M(q) q̇`.
pub fn legendre(shape: &TorusShape, q: [f64; 3], qdot: [f64; 3]) -> PhasePoint {
    let p = mass_free(shape, q[0]) * DVector::from_column_slice(&qdot);
    PhasePoint::momentum(q, [p[0], p[1], p[2]])
}

/// `(p_θ, p_φ, p_z)` from the closed-form expressions, `p_φ` differentiated from
/// [`lagrangian_closed_form`].
pub fn legendre_closed_form(shape: &TorusShape, q: [f64; 3], qdot: [f64; 3]) -> [f64; 3] {
    let (r, m) = (shape.r, shape.m);
    let s = q[0].sin();
    let [td, pd, zd] = qdot;
    [
        r * r * td - r * s * zd,
        m * pd * ((shape.R + r * s).powi(2) + r * r / 4.0),
        -r * s * td + zd,
    ]
}

/// Inverse Legendre map `q̇ = M(q)⁻¹ p`.
pub fn velocities(shape: &TorusShape, q: [f64; 3], p: [f64; 3]) -> Result<[f64; 3]> {
    if q[0].cos().abs() < SINGULAR_COS {
        return Err(Error::singular(format!(
            "cos(theta) = {:e}: mass matrix is singular",
            q[0].cos()
        )));
    }
    let v = solve(mass_free(shape, q[0]), &p)?;
    Ok([v[0], v[1], v[2]])
}

/// `H = ½ pᵀ M(q)⁻¹ p`
pub fn hamiltonian(shape: &TorusShape, q: [f64; 3], p: [f64; 3]) -> Result<f64> {
    let v = velocities(shape, q, p)?;
    Ok(0.5 * p.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>())
}

/// `H = ½[J₀²/(1 + r sin θ)² + (p_θ + r sin θ L₀)²/(r cos θ)² + L₀²]`, which
/// assumes `m = R = 1`.
pub fn hamiltonian_closed_form(shape: &TorusShape, q: [f64; 3], p: [f64; 3]) -> Result<f64> {
    let (s, c) = q[0].sin_cos();
    if c.abs() < SINGULAR_COS {
        return Err(Error::singular(format!(
            "cos(theta) = {c:e}: closed-form Hamiltonian has a pole"
        )));
    }
    let r = shape.r;
    let [pt, j0, l0] = p;
    Ok(0.5
        * (j0 * j0 / (1.0 + r * s).powi(2) + (pt + r * s * l0).powi(2) / (r * c).powi(2) + l0 * l0))
}

fn solve(m: DMatrix<f64>, rhs: &[f64]) -> Result<DVector<f64>> {
    m.lu()
        .solve(&DVector::from_column_slice(rhs))
        .ok_or_else(|| Error::singular("mass matrix is singular"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    None,
    Mobius,
}

/// Coordinate system the integrator works in.
#[derive(Debug, Clone, Copy, PartialEq)]
enum System {
    /// `(θ, φ, Z₀)`
    FreeAxis,
    /// `(θ, φ)` with `Z₀` fixed
    Surface { z0: f64 },
    /// `(φ, Z₀)` with `θ = (φ + π)/2`
    Band,
}

impl System {
    fn dim(self) -> usize {
        match self {
            System::FreeAxis => 3,
            _ => 2,
        }
    }

    fn mass(self, shape: &TorusShape, q: &[f64]) -> DMatrix<f64> {
        let (r, m, big_r) = (shape.r, shape.m, shape.R);
        match self {
            System::FreeAxis => mass_free(shape, q[0]),
            System::Surface { .. } => {
                let rho = big_r + r * q[0].sin();
                DMatrix::from_row_slice(2, 2, &[r * r, 0.0, 0.0, rho * rho]) * m
            }
            System::Band => {
                let (_, ch) = (q[0] / 2.0).sin_cos();
                let rho = big_r + r * ch;
                let off = -r * ch / 2.0;
                DMatrix::from_row_slice(2, 2, &[r * r / 4.0 + rho * rho, off, off, 1.0]) * m
            }
        }
    }

    // ∂M/∂q_k; only the first coordinate enters M.
    fn dmass(self, shape: &TorusShape, q: &[f64], k: usize) -> Option<DMatrix<f64>> {
        if k != 0 {
            return None;
        }
        let (r, m, big_r) = (shape.r, shape.m, shape.R);
        Some(match self {
            System::FreeAxis => {
                let (s, c) = q[0].sin_cos();
                let rho = big_r + r * s;
                DMatrix::from_row_slice(
                    3,
                    3,
                    &[
                        0.0,
                        0.0,
                        -r * c,
                        0.0,
                        2.0 * rho * r * c,
                        0.0,
                        -r * c,
                        0.0,
                        0.0,
                    ],
                ) * m
            }
            System::Surface { .. } => {
                let (s, c) = q[0].sin_cos();
                let rho = big_r + r * s;
                DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.0 * rho * r * c]) * m
            }
            System::Band => {
                let (sh, ch) = (q[0] / 2.0).sin_cos();
                let rho = big_r + r * ch;
                let d00 = -rho * r * sh;
                let d01 = r * sh / 4.0;
                DMatrix::from_row_slice(2, 2, &[d00, d01, d01, 0.0]) * m
            }
        })
    }

    fn check(self, q: &[f64]) -> Result<()> {
        if self == System::FreeAxis && q[0].cos().abs() < SINGULAR_COS {
            return Err(Error::singular(format!(
                "cos(theta) = {:e} on the free-axis chart",
                q[0].cos()
            )));
        }
        Ok(())
    }

    /// `(θ, φ, Z₀)` and their rates from reduced coordinates and velocities.
    fn full(self, q: &[f64], v: &[f64]) -> ([f64; 3], [f64; 3]) {
        match self {
            System::FreeAxis => ([q[0], q[1], q[2]], [v[0], v[1], v[2]]),
            System::Surface { z0 } => ([q[0], q[1], z0], [v[0], v[1], 0.0]),
            System::Band => (
                [mobius_constraint(q[0]), q[0], q[1]],
                [v[0] / 2.0, v[0], v[1]],
            ),
        }
    }

    fn phi_index(self) -> usize {
        match self {
            System::Band => 0,
            _ => 1,
        }
    }

    // (q̇, ṗ) at (q, p)
    fn field(self, shape: &TorusShape, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let (q, p) = y.split_at(n);
        self.check(q)?;
        let v = solve(self.mass(shape, q), p)?;
        let mut out = v.iter().copied().collect::<Vec<_>>();
        for k in 0..n {
            let dp = match self.dmass(shape, q, k) {
                Some(dm) => 0.5 * v.dot(&(dm * &v)),
                None => 0.0,
            };
            out.push(dp);
        }
        Ok(out)
    }

    fn rk4(self, shape: &TorusShape, y: &[f64], h: f64) -> Result<Vec<f64>> {
        let add = |a: &[f64], b: &[f64], s: f64| {
            a.iter().zip(b).map(|(x, d)| x + s * d).collect::<Vec<_>>()
        };
        let k1 = self.field(shape, y)?;
        let k2 = self.field(shape, &add(y, &k1, h / 2.0))?;
        let k3 = self.field(shape, &add(y, &k2, h / 2.0))?;
        let k4 = self.field(shape, &add(y, &k3, h))?;
        let next: Vec<f64> = y
            .iter()
            .enumerate()
            .map(|(i, x)| x + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        if self == System::FreeAxis && y[0].cos().signum() != next[0].cos().signum() {
            return Err(Error::singular(
                "trajectory crossed cos(theta) = 0 on the free-axis chart",
            ));
        }
        self.check(&next)?;
        Ok(next)
    }

    fn sample(self, shape: &TorusShape, t: f64, y: &[f64]) -> Result<Sample> {
        let n = self.dim();
        let (q, p) = y.split_at(n);
        let m = self.mass(shape, q);
        let v = solve(m.clone(), p)?;
        let energy = 0.5 * v.dot(&(m * &v));
        let (qf, vf) = self.full(q, v.as_slice());
        let at = TorusShape { l: qf[2], ..*shape };
        Ok(Sample {
            t,
            point: PhasePoint::velocity(qf, vf),
            position: torus_embed(&at, qf[0], qf[1]),
            energy,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub point: PhasePoint,
    pub position: [f64; 3],
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Set when integration stopped early at a singularity.
    pub error: Option<String>,
}

impl Trajectory {
    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        &self.samples[self.samples.len() - 1]
    }

    /// `max |E(t) − E(0)| / |E(0)|`
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.first().energy;
        self.samples
            .iter()
            .map(|s| (s.energy - e0).abs() / e0.abs())
            .fold(0.0, f64::max)
    }

    /// Distance between the first and last embedded points.
    pub fn closure_gap(&self) -> f64 {
        crate::geometry::distance(&self.first().position, &self.last().position)
    }
}

fn setup(
    shape: &TorusShape,
    constraint: Constraint,
    initial: &PhasePoint,
) -> Result<(System, Vec<f64>)> {
    let qdot = match initial.rates {
        Rates::Velocity(v) => v,
        Rates::Momentum(_) => {
            return Err(Error::contract(
                "integration starts from velocities, got momenta",
            ));
        }
    };
    if initial.q.iter().chain(&qdot).any(|x| !x.is_finite()) {
        return Err(Error::domain("initial state must be finite"));
    }
    let [theta, phi, z0] = initial.q;
    let (system, q, v): (System, Vec<f64>, Vec<f64>) = match constraint {
        // θ and θ̇ follow from φ on the band.
        Constraint::Mobius => (System::Band, vec![phi, z0], vec![qdot[1], qdot[2]]),
        Constraint::None if qdot[2] == 0.0 => (
            System::Surface { z0 },
            vec![theta, phi],
            vec![qdot[0], qdot[1]],
        ),
        Constraint::None => (System::FreeAxis, initial.q.to_vec(), qdot.to_vec()),
    };
    system.check(&q)?;
    let p = system.mass(shape, &q) * DVector::from_column_slice(&v);
    let mut y = q;
    y.extend(p.iter());
    Ok((system, y))
}

fn check_step(dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    Ok(())
}

/// Fixed-step RK4 from `initial` (velocity form) for `steps` steps.
///
/// Without a constraint the motion stays on the torus with `Z₀` fixed unless
/// `Ż₀ ≠ 0`, in which case the free-axis chart is used and a singularity
/// stops the run early with `error` set. Under the Möbius constraint `θ` and
/// `θ̇` are taken from `φ`.
pub fn integrate(
    shape: &TorusShape,
    constraint: Constraint,
    initial: &PhasePoint,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    check_step(dt)?;
    if steps == 0 {
        return Err(Error::domain("steps must be >= 1"));
    }
    let (system, mut y) = setup(shape, constraint, initial)?;
    let mut samples = vec![system.sample(shape, 0.0, &y)?];
    for k in 1..=steps {
        match system.rk4(shape, &y, dt).and_then(|next| {
            let s = system.sample(shape, k as f64 * dt, &next)?;
            Ok((next, s))
        }) {
            Ok((next, s)) => {
                y = next;
                samples.push(s);
            }
            Err(e) => {
                return Ok(Trajectory {
                    samples,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    Ok(Trajectory {
        samples,
        error: None,
    })
}

/// Integrates until `φ` has advanced by exactly `span`; the last step is
/// shortened to land on it.
pub fn integrate_phi_span(
    shape: &TorusShape,
    constraint: Constraint,
    initial: &PhasePoint,
    dt: f64,
    span: f64,
) -> Result<Trajectory> {
    check_step(dt)?;
    if !(span > 0.0) {
        return Err(Error::domain(format!("span must be positive, got {span}")));
    }
    let (system, mut y) = setup(shape, constraint, initial)?;
    let ip = system.phi_index();
    let target = y[ip] + span;
    let first = system.sample(shape, 0.0, &y)?;
    if !(first.point.rates_phi() > 0.0) {
        return Err(Error::domain("phi must be increasing at the start"));
    }
    let mut samples = vec![first];
    let mut t = 0.0;
    let max_steps = 100_000_000usize;
    for _ in 0..max_steps {
        let next = match system.rk4(shape, &y, dt) {
            Ok(n) => n,
            Err(e) => {
                return Ok(Trajectory {
                    samples,
                    error: Some(e.to_string()),
                })
            }
        };
        if next[ip] < target {
            t += dt;
            y = next;
            samples.push(system.sample(shape, t, &y)?);
            continue;
        }
        // Bisect the step length so φ lands on the target.
        let (mut lo, mut hi) = (0.0, dt);
        let mut land = next;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let trial = system.rk4(shape, &y, mid)?;
            if trial[ip] < target {
                lo = mid;
            } else {
                hi = mid;
                land = trial;
            }
        }
        t += hi;
        samples.push(system.sample(shape, t, &land)?);
        return Ok(Trajectory {
            samples,
            error: None,
        });
    }
    Err(Error::NoConvergence { terms: max_steps })
}

impl PhasePoint {
    fn rates_phi(&self) -> f64 {
        match self.rates {
            Rates::Velocity(v) | Rates::Momentum(v) => v[1],
        }
    }
}

/// Uniform circulation along the outer equator, `θ = π/2`.
pub fn equator_circulation(shape: &TorusShape, phi_dot: f64) -> PhasePoint {
    PhasePoint::velocity(
        [std::f64::consts::FRAC_PI_2, 0.0, shape.l],
        [0.0, phi_dot, 0.0],
    )
}

/// Start of the band boundary with no axial momentum.
pub fn band_start(shape: &TorusShape, phi_dot: f64) -> PhasePoint {
    // p_z = −(r/2) cos(φ/2) φ̇ + Ż₀ = 0 at φ = 0
    PhasePoint::velocity(
        [mobius_constraint(0.0), 0.0, shape.l],
        [phi_dot / 2.0, phi_dot, shape.r * phi_dot / 2.0],
    )
}

/// `φ` span of `periods` turns: one turn closes the torus, two the band.
pub fn periods_span(periods: f64) -> f64 {
    TAU * periods
}
