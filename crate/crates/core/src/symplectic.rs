//! Linear symplectic algebra on R^{2m}.
//!
//! Vectors are stored in block layout `(x_1, .., x_m, y_1, .., y_m)` and the
//! symplectic form is `omega = sum dx_i ^ dy_i`. Under this layout the complex
//! structure is `J(x, y) = (-y, x)`, i.e. multiplication by `i` after
//! identifying `x_k + i y_k` with the k-th coordinate of C^m.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A point or vector of R^{2m} in block layout.
pub type AmbientVector = DVector<f64>;

/// `sqrt(3)`, the half-chord multiplier of the round unit sphere's triangles.
pub const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Half-dimension `m` of the ambient space R^{2m}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self(m))
    }

    /// Dimension whose ambient length is `len`.
    pub fn from_ambient_len(len: usize) -> Result<Self> {
        if len == 0 || !len.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "ambient length must be a positive even number, got {len}"
            )));
        }
        Ok(Self(len / 2))
    }

    pub fn m(self) -> usize {
        self.0
    }

    pub fn ambient(self) -> usize {
        2 * self.0
    }

    pub fn zeros(self) -> AmbientVector {
        DVector::zeros(self.ambient())
    }

    /// Basis vector `e_{x_i}` (0-based `i`).
    pub fn e_x(self, i: usize) -> AmbientVector {
        let mut v = self.zeros();
        v[i] = 1.0;
        v
    }

    /// Basis vector `e_{y_i}` (0-based `i`).
    pub fn e_y(self, i: usize) -> AmbientVector {
        let mut v = self.zeros();
        v[self.0 + i] = 1.0;
        v
    }

    /// Checks length and finiteness.
    pub fn validate(self, v: &AmbientVector) -> Result<()> {
        if v.len() != self.ambient() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient(),
                found: v.len(),
            });
        }
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    pub fn validate_unit(self, u: &AmbientVector, tol: f64) -> Result<()> {
        self.validate(u)?;
        let norm = u.norm();
        if (norm - 1.0).abs() > tol {
            return Err(Error::NotUnit { norm });
        }
        Ok(())
    }

    /// Matrix of `omega`: `omega(u, v) = u^T Omega v`.
    pub fn omega_matrix(self) -> DMatrix<f64> {
        let m = self.0;
        let mut w = DMatrix::zeros(2 * m, 2 * m);
        for i in 0..m {
            w[(i, m + i)] = 1.0;
            w[(m + i, i)] = -1.0;
        }
        w
    }

    /// Matrix of `J`.
    pub fn j_matrix(self) -> DMatrix<f64> {
        -self.omega_matrix()
    }

    pub fn random_unit<R: Rng + ?Sized>(self, rng: &mut R) -> AmbientVector {
        loop {
            let v = DVector::from_fn(self.ambient(), |_, _| rng.sample::<f64, _>(StandardNormal));
            let n = v.norm();
            if n > 1e-8 {
                return v / n;
            }
        }
    }
}

fn check_pair(u: &AmbientVector, v: &AmbientVector) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    if u.is_empty() || !u.len().is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "ambient length must be a positive even number, got {}",
            u.len()
        )));
    }
    Ok(())
}

/// The symplectic form `omega(u, v) = sum_i (u_{x_i} v_{y_i} - u_{y_i} v_{x_i})`.
pub fn omega(u: &AmbientVector, v: &AmbientVector) -> Result<f64> {
    check_pair(u, v)?;
    Ok(omega_unchecked(u, v))
}

pub(crate) fn omega_unchecked(u: &AmbientVector, v: &AmbientVector) -> f64 {
    let m = u.len() / 2;
    (0..m).map(|i| u[i] * v[m + i] - u[m + i] * v[i]).sum()
}

/// The complex structure: `J(x, y) = (-y, x)`, so that `omega(u, v) = Ju . v`.
pub fn j_apply(u: &AmbientVector) -> AmbientVector {
    let m = u.len() / 2;
    DVector::from_fn(u.len(), |k, _| if k < m { -u[m + k] } else { u[k - m] })
}

/// Multiplies `u`, viewed in C^m, by `lambda^k` where `lambda = exp(2 pi i / 3)`.
pub fn cube_root_rotate(u: &AmbientVector, k: i64) -> AmbientVector {
    match k.rem_euclid(3) {
        0 => u.clone(),
        1 => u * -0.5 + j_apply(u) * (0.5 * SQRT_3),
        _ => u * -0.5 - j_apply(u) * (0.5 * SQRT_3),
    }
}

/// Multiplies `u` by the unit complex number `exp(i theta)`.
pub fn phase_rotate(u: &AmbientVector, theta: f64) -> AmbientVector {
    u * theta.cos() + j_apply(u) * theta.sin()
}

/// Orthogonal projection onto the tangent space of the unit sphere at `u`.
pub fn tangent_part(u: &AmbientVector, v: &AmbientVector) -> AmbientVector {
    v - u * u.dot(v)
}

pub fn tangent_projector(u: &AmbientVector) -> DMatrix<f64> {
    DMatrix::identity(u.len(), u.len()) - u * u.transpose()
}

pub(crate) fn normalized(v: &AmbientVector) -> AmbientVector {
    v / v.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn vec_strategy(m: usize) -> impl Strategy<Value = AmbientVector> {
        proptest::collection::vec(-10.0f64..10.0, 2 * m).prop_map(DVector::from_vec)
    }

    fn pair_strategy() -> impl Strategy<Value = (AmbientVector, AmbientVector)> {
        (1usize..5).prop_flat_map(|m| (vec_strategy(m), vec_strategy(m)))
    }

    #[test]
    fn omega_on_basis() {
        let d = Dimension::new(1).unwrap();
        assert_eq!(omega(&d.e_x(0), &d.e_y(0)).unwrap(), 1.0);
        let d2 = Dimension::new(2).unwrap();
        // x_1 and x_2 in block layout
        let u = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let v = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(omega(&u, &v).unwrap(), 0.0);
        assert_eq!(omega(&d2.e_x(0), &d2.e_y(1)).unwrap(), 0.0);
    }

    #[test]
    fn omega_rejects_mismatch() {
        let u = DVector::from_vec(vec![1.0, 0.0]);
        let v = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(omega(&u, &v), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn j_sign_solves_basis_identity() {
        // Ju . v = omega(u, v) for every basis pair fixes J(x, y) = (-y, x).
        let d = Dimension::new(3).unwrap();
        for a in 0..6 {
            let mut u = d.zeros();
            u[a] = 1.0;
            let ju = j_apply(&u);
            for b in 0..6 {
                let mut v = d.zeros();
                v[b] = 1.0;
                assert_eq!(ju.dot(&v), omega(&u, &v).unwrap());
            }
        }
        let d1 = Dimension::new(1).unwrap();
        assert_eq!(j_apply(&d1.e_x(0)), d1.e_y(0));
        assert_eq!(d.j_matrix() * d.e_x(1), j_apply(&d.e_x(1)));
    }

    #[test]
    fn cube_root_on_basis() {
        let d = Dimension::new(1).unwrap();
        let r = cube_root_rotate(&d.e_x(0), 1);
        assert_abs_diff_eq!(r[0], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1], 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_eq!(cube_root_rotate(&r, 0), r);
    }

    proptest! {
        #[test]
        fn omega_antisymmetric((u, v) in pair_strategy()) {
            let a = omega(&u, &v).unwrap();
            let b = omega(&v, &u).unwrap();
            prop_assert!((a + b).abs() < 1e-12);
            prop_assert!(omega(&u, &u).unwrap().abs() < 1e-12);
        }

        #[test]
        fn j_is_compatible_complex_structure((u, v) in pair_strategy()) {
            let ju = j_apply(&u);
            let jv = j_apply(&v);
            prop_assert!((j_apply(&ju) + &u).norm() < 1e-12);
            let w = omega(&u, &v).unwrap();
            prop_assert!((ju.dot(&v) - w).abs() < 1e-10);
            prop_assert!((-u.dot(&jv) - w).abs() < 1e-10);
            prop_assert!((omega(&ju, &jv).unwrap() - w).abs() < 1e-10);
        }

        #[test]
        fn cube_root_rotation_is_unitary((u, v) in pair_strategy(), k in 0i64..3) {
            let ru = cube_root_rotate(&u, k);
            let rv = cube_root_rotate(&v, k);
            prop_assert!((ru.norm() - u.norm()).abs() < 1e-12);
            prop_assert!((omega(&ru, &rv).unwrap() - omega(&u, &v).unwrap()).abs() < 1e-9);
            let three = cube_root_rotate(&cube_root_rotate(&cube_root_rotate(&u, 1), 1), 1);
            prop_assert!((three - &u).amax() < 1e-14 * (1.0 + u.amax()));
        }
    }
}
