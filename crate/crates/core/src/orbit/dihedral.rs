use std::cmp::Ordering;

use crate::symplectic::AmbientVector;

use super::{OrbitSolution, TangencyTuple};

const LEX_TOL: f64 = 1e-9;

/// `z'_i = z_{shift + i}`, or `z'_i = z_{shift - i}` when `reflect` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DihedralElement {
    pub shift: usize,
    pub reflect: bool,
}

impl DihedralElement {
    pub const IDENTITY: Self = Self {
        shift: 0,
        reflect: false,
    };

    /// All `2n` elements, rotations first.
    pub fn all(n: usize) -> impl Iterator<Item = Self> {
        [false, true]
            .into_iter()
            .flat_map(move |reflect| (0..n).map(move |shift| Self { shift, reflect }))
    }

    /// Source index of new vertex `i`.
    pub fn vertex_source(self, i: usize, n: usize) -> usize {
        if self.reflect {
            (self.shift + n - i % n) % n
        } else {
            (self.shift + i) % n
        }
    }

    /// Source index of new edge `i` (the edge from vertex `i` to `i + 1`).
    /// Reflection reverses the traversal, so multipliers change sign.
    pub fn edge_source(self, i: usize, n: usize) -> usize {
        if self.reflect {
            (self.shift + 2 * n - i % n - 1) % n
        } else {
            (self.shift + i) % n
        }
    }

    pub fn apply_tuple(self, tuple: &TangencyTuple) -> TangencyTuple {
        let n = tuple.period();
        let sign = if self.reflect { -1.0 } else { 1.0 };
        let normals = (0..n)
            .map(|i| tuple.normals()[self.edge_source(i, n)].clone())
            .collect();
        let multipliers = (0..n)
            .map(|i| sign * tuple.multipliers()[self.edge_source(i, n)])
            .collect();
        TangencyTuple::new(normals, multipliers).expect("permutation of a valid tuple")
    }

    pub fn apply(self, orbit: &OrbitSolution) -> OrbitSolution {
        let n = orbit.period();
        let edges = |v: &[AmbientVector]| -> Vec<AmbientVector> {
            (0..n).map(|i| v[self.edge_source(i, n)].clone()).collect()
        };
        OrbitSolution {
            tuple: self.apply_tuple(&orbit.tuple),
            tangency_points: edges(&orbit.tangency_points),
            vertices: (0..n)
                .map(|i| orbit.vertices[self.vertex_source(i, n)].clone())
                .collect(),
            area_value: if self.reflect {
                -orbit.area_value
            } else {
                orbit.area_value
            },
            ..orbit.clone()
        }
    }
}

/// All `2n` images of the orbit under cyclic shifts and reversal.
pub fn dihedral_images(orbit: &OrbitSolution) -> Vec<(DihedralElement, OrbitSolution)> {
    DihedralElement::all(orbit.period())
        .map(|g| (g, g.apply(orbit)))
        .collect()
}

fn lex_compare(a: &[AmbientVector], b: &[AmbientVector]) -> Ordering {
    for (za, zb) in a.iter().zip(b) {
        for (x, y) in za.iter().zip(zb.iter()) {
            if (x - y).abs() > LEX_TOL {
                return x.partial_cmp(y).unwrap_or(Ordering::Equal);
            }
        }
    }
    Ordering::Equal
}

/// The image with the lexicographically smallest vertex sequence
/// (componentwise, entries within 1e-9 compare equal).
pub fn canonicalize_mod_dihedral(orbit: &OrbitSolution) -> OrbitSolution {
    let n = orbit.period();
    let mut best = DihedralElement::IDENTITY;
    let mut best_vertices = orbit.vertices.clone();
    for g in DihedralElement::all(n).skip(1) {
        let vertices: Vec<_> = (0..n)
            .map(|i| orbit.vertices[g.vertex_source(i, n)].clone())
            .collect();
        if lex_compare(&vertices, &best_vertices) == Ordering::Less {
            best = g;
            best_vertices = vertices;
        }
    }
    best.apply(orbit)
}

fn max_vertex_distance(a: &[AmbientVector], b: &[AmbientVector], g: DihedralElement) -> f64 {
    let n = a.len();
    (0..n)
        .map(|i| (&a[i] - &b[g.vertex_source(i, n)]).norm())
        .fold(0.0, f64::max)
}

/// `min_g max_i |z_i - (g z')_i|` over the dihedral group; infinite when
/// the periods differ.
pub fn dihedral_distance(a: &OrbitSolution, b: &OrbitSolution) -> f64 {
    let n = a.period();
    if b.period() != n {
        return f64::INFINITY;
    }
    DihedralElement::all(n)
        .map(|g| max_vertex_distance(&a.vertices, &b.vertices, g))
        .fold(f64::INFINITY, f64::min)
}
