//! Periodic orbits of the dual billiard map as critical points of the
//! alternating symplectic-area functional on inscribed polygons.
//!
//! An orbit of odd period `n` is encoded by the outward normals `u_i` at its
//! tangency points `q_i = q(u_i)` and by multipliers `a_i`: the vertices are
//! `z_i = q_i - a_i J u_i` and `z_{i+1} = q_i + a_i J u_i`, so every `q_i` is
//! the midpoint of a chord along the characteristic direction. Positive
//! multipliers mean `T(z_i) = z_{i+1}`; negative ones the reverse.

mod closure;
mod dihedral;
mod functional;
mod newton;
mod search;

use crate::error::{Error, Result};
use crate::surface::SupportSurface;
use crate::symplectic::{phase_rotate, AmbientVector, SQRT_3};

pub use closure::{closure_residual, closure_system, ClosureForm};
pub use dihedral::{canonicalize_mod_dihedral, dihedral_distance, dihedral_images, DihedralElement};
pub use functional::{functional_f, functional_f_gradient};
pub use newton::{newton_polish, PolishOptions, PolishOutcome, Rejection};
pub use search::{
    criticality_check, multistart_search, multistart_search_with, round_trip_defect,
    sphere_ansatz_seed, OrbitFamily, OrbitSet, SearchOptions, SearchStats, DEFAULT_DEDUP_TOLERANCE,
    DEFAULT_SEED, DEFAULT_STARTS,
};

/// Normals and multipliers of a candidate `n`-periodic orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct TangencyTuple {
    normals: Vec<AmbientVector>,
    multipliers: Vec<f64>,
}

impl TangencyTuple {
    /// Requires odd `n >= 3`, equal lengths, and unit normals (to 1e-12).
    pub fn new(normals: Vec<AmbientVector>, multipliers: Vec<f64>) -> Result<Self> {
        let n = normals.len();
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::InvalidPeriod(n));
        }
        if multipliers.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: multipliers.len(),
            });
        }
        if multipliers.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite);
        }
        let len = normals[0].len();
        for u in &normals {
            if u.len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    found: u.len(),
                });
            }
            if u.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite);
            }
            let norm = u.norm();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::NotUnit { norm });
            }
        }
        Ok(Self {
            normals,
            multipliers,
        })
    }

    /// Normalizes the given directions first.
    pub fn from_directions(directions: Vec<AmbientVector>, multipliers: Vec<f64>) -> Result<Self> {
        let normals = directions
            .into_iter()
            .map(|d| {
                let n = d.norm();
                if n > 0.0 {
                    Ok(d / n)
                } else {
                    Err(Error::NotUnit { norm: 0.0 })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(normals, multipliers)
    }

    /// The regular `n`-gon orbit of the round sphere of radius `radius`
    /// through the normal `u`, turning by `2 pi winding / n` per bounce.
    pub fn regular(u: &AmbientVector, n: usize, winding: usize, radius: f64) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::InvalidPeriod(n));
        }
        if winding == 0 || 2 * winding >= n {
            return Err(Error::InvalidParameter(format!(
                "winding must be in 1..{}, got {winding}",
                n.div_ceil(2)
            )));
        }
        let theta = 2.0 * std::f64::consts::PI * winding as f64 / n as f64;
        let normals = (0..n).map(|k| phase_rotate(u, theta * k as f64)).collect();
        let a = radius * (theta / 2.0).tan();
        Self::from_directions(normals, vec![a; n])
    }

    /// The round unit sphere's triangle `(u, lambda u, lambda^2 u)` with all
    /// multipliers `sqrt(3)`.
    pub fn sphere_triangle(u: &AmbientVector) -> Result<Self> {
        let normals = (0..3)
            .map(|k| crate::symplectic::cube_root_rotate(u, k))
            .collect();
        Self::from_directions(normals, vec![SQRT_3; 3])
    }

    pub fn period(&self) -> usize {
        self.normals.len()
    }

    pub fn normals(&self) -> &[AmbientVector] {
        &self.normals
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }

    pub fn into_parts(self) -> (Vec<AmbientVector>, Vec<f64>) {
        (self.normals, self.multipliers)
    }

    pub fn tangency_points(&self, s: &SupportSurface) -> Vec<AmbientVector> {
        self.normals.iter().map(|u| s.point(u)).collect()
    }
}

/// `z_i = sum_{j=0}^{n-1} (-1)^j q_{i+j}` (indices cyclic); for odd `n`
/// this is the unique polygon with `q_i = (z_i + z_{i+1}) / 2`.
pub fn vertices_from_midpoints(q: &[AmbientVector]) -> Vec<AmbientVector> {
    let n = q.len();
    (0..n)
        .map(|i| {
            let mut z = q[i].clone() * 0.0;
            for j in 0..n {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                z += &q[(i + j) % n] * sign;
            }
            z
        })
        .collect()
}

/// A polished periodic orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSolution {
    pub tuple: TangencyTuple,
    pub tangency_points: Vec<AmbientVector>,
    pub vertices: Vec<AmbientVector>,
    /// Value of the alternating area functional at the tangency points.
    pub area_value: f64,
    pub residual: f64,
    pub is_isolated: bool,
    /// Smallest singular value of the final Newton Jacobian.
    pub min_singular_value: f64,
    pub iterations: usize,
}

impl OrbitSolution {
    pub fn period(&self) -> usize {
        self.tuple.period()
    }

    /// Rebuilds derived fields from a tuple (no polishing).
    pub fn from_tuple(s: &SupportSurface, tuple: TangencyTuple, residual: f64) -> Self {
        let tangency_points = tuple.tangency_points(s);
        let vertices = vertices_from_midpoints(&tangency_points);
        let area_value = functional_f(&tangency_points).expect("odd period");
        Self {
            tuple,
            tangency_points,
            vertices,
            area_value,
            residual,
            is_isolated: false,
            min_singular_value: 0.0,
            iterations: 0,
        }
    }
}
