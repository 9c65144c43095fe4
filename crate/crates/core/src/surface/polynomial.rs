//! Polynomial additions to a support function.
//!
//! A polynomial `P` added to `h` on the unit sphere is extended to R^{2m}
//! degree by degree as `P_d(x) / |x|^(d-1)`, which keeps the total support
//! function 1-homogeneous. Derivatives of the extension are evaluated in
//! closed form on the unit sphere.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::symplectic::{AmbientVector, Dimension};

#[derive(Debug, Clone, PartialEq)]
struct Monomial {
    coeff: f64,
    /// (variable index, power), variables distinct, powers positive.
    powers: Vec<(usize, u32)>,
}

impl Monomial {
    fn degree(&self) -> u32 {
        self.powers.iter().map(|&(_, p)| p).sum()
    }

    fn value(&self, x: &AmbientVector) -> f64 {
        self.powers
            .iter()
            .fold(self.coeff, |acc, &(k, p)| acc * x[k].powi(p as i32))
    }

    fn partial(&self, x: &AmbientVector, k: usize) -> f64 {
        let mut out = self.coeff;
        let mut found = false;
        for &(var, p) in &self.powers {
            if var == k {
                found = true;
                out *= p as f64 * x[var].powi(p as i32 - 1);
            } else {
                out *= x[var].powi(p as i32);
            }
        }
        if found {
            out
        } else {
            0.0
        }
    }

    fn second_partial(&self, x: &AmbientVector, a: usize, b: usize) -> f64 {
        let mut out = self.coeff;
        let mut hits = 0;
        for &(var, p) in &self.powers {
            let pi = p as i32;
            let factor = match (var == a, var == b) {
                (true, true) => {
                    hits += 2;
                    if p < 2 {
                        return 0.0;
                    }
                    (p as f64) * (p as f64 - 1.0) * x[var].powi(pi - 2)
                }
                (true, false) | (false, true) => {
                    hits += 1;
                    p as f64 * x[var].powi(pi - 1)
                }
                (false, false) => x[var].powi(pi),
            };
            out *= factor;
        }
        if hits == 2 {
            out
        } else {
            0.0
        }
    }
}

/// A polynomial on R^{2m}, stored as a sum of monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: Dimension,
    monomials: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(dim: Dimension) -> Self {
        Self {
            dim,
            monomials: Vec::new(),
        }
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Adds `coeff * prod x_k^p` for `(k, p)` in `powers` (ambient indices).
    pub fn add_term(&mut self, coeff: f64, powers: &[(usize, u32)]) -> Result<()> {
        if !coeff.is_finite() {
            return Err(Error::NonFinite);
        }
        let mut merged: Vec<(usize, u32)> = Vec::new();
        for &(k, p) in powers {
            if k >= self.dim.ambient() {
                return Err(Error::InvalidParameter(format!(
                    "monomial variable {k} out of range for ambient dimension {}",
                    self.dim.ambient()
                )));
            }
            if p == 0 {
                continue;
            }
            match merged.iter_mut().find(|(var, _)| *var == k) {
                Some(entry) => entry.1 += p,
                None => merged.push((k, p)),
            }
        }
        self.monomials.push(Monomial {
            coeff,
            powers: merged,
        });
        Ok(())
    }

    pub fn with_term(mut self, coeff: f64, powers: &[(usize, u32)]) -> Result<Self> {
        self.add_term(coeff, powers)?;
        Ok(self)
    }

    /// Sum of two polynomials on the same space.
    pub fn plus(mut self, other: &Polynomial) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim.ambient(),
                found: other.dim.ambient(),
            });
        }
        self.monomials.extend(other.monomials.iter().cloned());
        Ok(self)
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for m in &mut self.monomials {
            m.coeff *= factor;
        }
        self
    }

    pub fn value(&self, x: &AmbientVector) -> f64 {
        self.monomials.iter().map(|m| m.value(x)).sum()
    }

    pub fn gradient(&self, x: &AmbientVector) -> AmbientVector {
        DVector::from_fn(x.len(), |k, _| {
            self.monomials.iter().map(|m| m.partial(x, k)).sum()
        })
    }

    pub fn hessian(&self, x: &AmbientVector) -> DMatrix<f64> {
        let n = x.len();
        let mut h = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let v: f64 = self
                    .monomials
                    .iter()
                    .map(|m| m.second_partial(x, a, b))
                    .sum();
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        h
    }

    /// Gradient and Hessian, at unit `u`, of the 1-homogeneous extension
    /// `sum_d P_d(x) / |x|^(d-1)`.
    pub(crate) fn homogeneous_derivatives(&self, u: &AmbientVector) -> (AmbientVector, DMatrix<f64>) {
        let n = u.len();
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        let mut degrees: Vec<u32> = self.monomials.iter().map(Monomial::degree).collect();
        degrees.sort_unstable();
        degrees.dedup();
        let uut = u * u.transpose();
        for d in degrees {
            let part = Polynomial {
                dim: self.dim,
                monomials: self
                    .monomials
                    .iter()
                    .filter(|m| m.degree() == d)
                    .cloned()
                    .collect(),
            };
            let p = d as f64 - 1.0;
            let val = part.value(u);
            let g = part.gradient(u);
            let h = part.hessian(u);
            grad += &g - u * (p * val);
            let cross = &g * u.transpose() + u * g.transpose();
            hess += h - cross * p - DMatrix::identity(n, n) * (p * val) + &uut * (p * (p + 2.0) * val);
        }
        (grad, hess)
    }
}
