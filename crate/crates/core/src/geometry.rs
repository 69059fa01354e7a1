//! Torus and Möbius embeddings and figure meshes.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::coherent::Deform;
use crate::error::{Error, Result};

/// Torus of major radius `R`, minor radius `r`, axial offset `l`, carrying a
/// particle of mass `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct TorusShape {
    pub R: f64,
    pub r: f64,
    pub l: f64,
    pub m: f64,
}

impl Default for TorusShape {
    fn default() -> Self {
        Self {
            R: 1.0,
            r: 0.5,
            l: 0.0,
            m: 1.0,
        }
    }
}

impl TorusShape {
    #[allow(non_snake_case)]
    pub fn new(R: f64, r: f64, l: f64, m: f64) -> Result<Self> {
        if !(R > 0.0 && r > 0.0 && r < R && m > 0.0 && l.is_finite() && R.is_finite()) {
            return Err(Error::domain(format!(
                "torus needs 0 < r < R and m > 0, got R = {R}, r = {r}, m = {m}, l = {l}"
            )));
        }
        Ok(Self { R, r, l, m })
    }
}

/// `(X, Y, Z) = ((R + r sin θ) cos φ, (R + r sin θ) sin φ, l + r cos θ)`
pub fn torus_embed(shape: &TorusShape, theta: f64, phi: f64) -> [f64; 3] {
    let rho = shape.R + shape.r * theta.sin();
    [
        rho * phi.cos(),
        rho * phi.sin(),
        shape.l + shape.r * theta.cos(),
    ]
}

/// `θ = (φ + π)/2`; `φ` is not reduced, so four turns of `φ` give two of `θ`.
pub fn mobius_constraint(phi: f64) -> f64 {
    (phi + PI) / 2.0
}

/// Möbius boundary curve on the unit-radius torus:
/// `((1 + r cos(φ/2)) cos φ, (1 + r cos(φ/2)) sin φ, l + r sin(φ/2))`.
pub fn mobius_embed(r: f64, l: f64, phi: f64) -> [f64; 3] {
    let (s, c) = (phi / 2.0).sin_cos();
    let rho = 1.0 + r * c;
    [rho * phi.cos(), rho * phi.sin(), l + r * s]
}

/// `torus_embed` with `R = 1` after the Möbius constraint.
pub fn constrained_torus_embed(r: f64, l: f64, phi: f64) -> [f64; 3] {
    let shape = TorusShape {
        R: 1.0,
        r,
        l,
        m: 1.0,
    };
    torus_embed(&shape, mobius_constraint(phi), phi)
}

/// Point on the strip at transverse offset `s ∈ [−r, r]` from the centre circle.
pub fn mobius_strip_point(shape: &TorusShape, phi: f64, s: f64) -> [f64; 3] {
    let (sh, ch) = (phi / 2.0).sin_cos();
    let rho = shape.R + s * ch;
    [rho * phi.cos(), rho * phi.sin(), shape.l + s * sh]
}

pub fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    Torus,
    Mobius,
}

impl Surface {
    pub fn name(self) -> &'static str {
        match self {
            Surface::Torus => "torus",
            Surface::Mobius => "mobius",
        }
    }
}

/// Row-major vertex grid: `phi` varies slowest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mesh {
    pub surface: Surface,
    pub n_phi: usize,
    pub n_second: usize,
    /// `(phi, second parameter, x, y, z)`; the second parameter is `theta`
    /// on the torus and the transverse offset on the strip.
    pub vertices: Vec<[f64; 5]>,
}

impl Mesh {
    pub fn header(&self) -> [&'static str; 5] {
        match self.surface {
            Surface::Torus => ["phi", "theta", "x", "y", "z"],
            Surface::Mobius => ["phi", "offset", "x", "y", "z"],
        }
    }

    pub fn vertex(&self, i_phi: usize, i_second: usize) -> [f64; 3] {
        let v = self.vertices[i_phi * self.n_second + i_second];
        [v[2], v[3], v[4]]
    }
}

impl Deform for Mesh {
    fn deformed(&self, zparam: f64) -> Self {
        let mut out = self.clone();
        for v in out.vertices.iter_mut() {
            let p = [v[2], v[3], v[4]].deformed(zparam);
            v[2..].copy_from_slice(&p);
        }
        out
    }
}

/// Torus: `φ, θ` on `[0, 2π)`. Strip: `φ` on `[0, 2π)` and the offset on
/// `[−r, r]` inclusive, which covers the strip once.
pub fn mesh(surface: Surface, shape: &TorusShape, n_phi: usize, n_second: usize) -> Result<Mesh> {
    if n_phi < 4 || n_second < 4 {
        return Err(Error::domain(format!(
            "mesh resolutions must be >= 4, got {n_phi} x {n_second}"
        )));
    }
    let mut vertices = Vec::with_capacity(n_phi * n_second);
    for i in 0..n_phi {
        let phi = TAU * i as f64 / n_phi as f64;
        for k in 0..n_second {
            let (second, p) = match surface {
                Surface::Torus => {
                    let theta = TAU * k as f64 / n_second as f64;
                    (theta, torus_embed(shape, theta, phi))
                }
                Surface::Mobius => {
                    let s = -shape.r + 2.0 * shape.r * k as f64 / (n_second - 1) as f64;
                    (s, mobius_strip_point(shape, phi, s))
                }
            };
            vertices.push([phi, second, p[0], p[1], p[2]]);
        }
    }
    Ok(Mesh {
        surface,
        n_phi,
        n_second,
        vertices,
    })
}
