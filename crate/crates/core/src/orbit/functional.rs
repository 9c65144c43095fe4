use crate::error::{Error, Result};
use crate::surface::SupportSurface;
use crate::symplectic::{j_apply, omega_unchecked, tangent_part, AmbientVector};

use super::TangencyTuple;

/// `F(q_1, .., q_n) = sum_{i<j} (-1)^{i+j} omega(q_i, q_j)` for odd `n`.
///
/// For `n = 3` this is `omega(q_2, q_1) + omega(q_1, q_3) + omega(q_3, q_2)`,
/// minus twice the symplectic area of the triangle.
pub fn functional_f(q: &[AmbientVector]) -> Result<f64> {
    let n = q.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidPeriod(n));
    }
    let len = q[0].len();
    if let Some(bad) = q.iter().find(|p| p.len() != len) {
        return Err(Error::DimensionMismatch {
            expected: len,
            found: bad.len(),
        });
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * omega_unchecked(&q[i], &q[j]);
        }
    }
    Ok(total)
}

/// Euclidean gradient of `F` with respect to each `q_k`.
pub(crate) fn gradient_in_points(q: &[AmbientVector]) -> Vec<AmbientVector> {
    let n = q.len();
    (0..n)
        .map(|k| {
            // omega(a, b) = Ja . b, so d/dq_k omega(q_i, q_k) = J q_i and
            // d/dq_k omega(q_k, q_j) = -J q_j
            let mut acc = q[k].clone() * 0.0;
            for (i, qi) in q.iter().enumerate() {
                if i == k {
                    continue;
                }
                let sign = if (i + k) % 2 == 0 { 1.0 } else { -1.0 };
                if i < k {
                    acc += qi * sign;
                } else {
                    acc -= qi * sign;
                }
            }
            j_apply(&acc)
        })
        .collect()
}

/// Gradient of `F(q(u_1), .., q(u_n))` with respect to the normals, each
/// component tangent to the unit sphere at its `u_k`.
pub fn functional_f_gradient(s: &SupportSurface, tuple: &TangencyTuple) -> Vec<AmbientVector> {
    let q = tuple.tangency_points(s);
    let grads = gradient_in_points(&q);
    tuple
        .normals()
        .iter()
        .zip(grads)
        .map(|(u, g)| tangent_part(u, &(s.point_jacobian(u) * g)))
        .collect()
}
