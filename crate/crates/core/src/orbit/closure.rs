use nalgebra::{DMatrix, DVector};

use crate::surface::SupportSurface;
use crate::symplectic::j_apply;

use super::TangencyTuple;

/// Which form of the periodicity equations to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosureForm {
    /// Triangles only: the vertex after `q_i` equals the vertex before
    /// `q_{i+1}`, `q_i + a_i J u_i = q_{i+1} - a_{i+1} J u_{i+1}`.
    Pairwise,
    /// Any odd period: the half-chord at `q_k` equals
    /// `sum_{j=0}^{n-2} (-1)^j q_{k+1+j}` and points along `J u_k`,
    /// `sum_j (-1)^j q_{k+1+j} - a_k J u_k = 0`.
    Alternating,
}

impl ClosureForm {
    pub fn for_period(n: usize) -> Self {
        if n == 3 {
            ClosureForm::Pairwise
        } else {
            ClosureForm::Alternating
        }
    }
}

/// Stacked closure residual (length `2m n`), pairwise form for triangles and
/// alternating form otherwise.
pub fn closure_residual(s: &SupportSurface, tuple: &TangencyTuple) -> DVector<f64> {
    let form = ClosureForm::for_period(tuple.period());
    let q = tuple.tangency_points(s);
    residual_from_points(tuple, &q, form)
}

fn residual_from_points(
    tuple: &TangencyTuple,
    q: &[DVector<f64>],
    form: ClosureForm,
) -> DVector<f64> {
    let n = tuple.period();
    let d = q[0].len();
    let u = tuple.normals();
    let a = tuple.multipliers();
    let ju: Vec<_> = u.iter().map(j_apply).collect();
    let mut r = DVector::zeros(n * d);
    for i in 0..n {
        let block = match form {
            ClosureForm::Pairwise => {
                let k = (i + 1) % n;
                &q[i] + &ju[i] * a[i] - &q[k] + &ju[k] * a[k]
            }
            ClosureForm::Alternating => {
                let mut acc = &ju[i] * -a[i];
                for j in 0..n - 1 {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    acc += &q[(i + 1 + j) % n] * sign;
                }
                acc
            }
        };
        r.rows_mut(i * d, d).copy_from(&block);
    }
    r
}

/// Residual and Jacobian of the bordered closure system.
///
/// Unknowns are `(u_1, .., u_n, a_1, .., a_n)`; equations are the closure
/// blocks followed by the `n` constraints `(|u_i|^2 - 1) / 2 = 0`, so the
/// system is square of size `(2m + 1) n`.
pub fn closure_system(
    s: &SupportSurface,
    tuple: &TangencyTuple,
    form: ClosureForm,
) -> (DVector<f64>, DMatrix<f64>) {
    let n = tuple.period();
    let u = tuple.normals();
    let a = tuple.multipliers();
    let d = u[0].len();
    let size = (d + 1) * n;
    let jm = s.dim().j_matrix();
    let evals: Vec<_> = u.iter().map(|ui| s.evaluate(ui)).collect();
    let q: Vec<_> = evals.iter().map(|e| e.point.clone()).collect();
    let ju: Vec<_> = u.iter().map(j_apply).collect();

    let mut res = DVector::zeros(size);
    res.rows_mut(0, n * d)
        .copy_from(&residual_from_points(tuple, &q, form));
    for i in 0..n {
        res[n * d + i] = 0.5 * (u[i].norm_squared() - 1.0);
    }

    let mut jac = DMatrix::zeros(size, size);
    let a_col = |k: usize| n * d + k;
    for i in 0..n {
        let row = i * d;
        match form {
            ClosureForm::Pairwise => {
                let k = (i + 1) % n;
                let mut own = jac.view_mut((row, i * d), (d, d));
                own += &evals[i].jacobian + &jm * a[i];
                let mut next = jac.view_mut((row, k * d), (d, d));
                next += -&evals[k].jacobian + &jm * a[k];
                jac.view_mut((row, a_col(i)), (d, 1)).copy_from(&ju[i]);
                jac.view_mut((row, a_col(k)), (d, 1)).copy_from(&ju[k]);
            }
            ClosureForm::Alternating => {
                let mut own = jac.view_mut((row, i * d), (d, d));
                own += &jm * -a[i];
                for j in 0..n - 1 {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    let k = (i + 1 + j) % n;
                    let mut blk = jac.view_mut((row, k * d), (d, d));
                    blk += &evals[k].jacobian * sign;
                }
                jac.view_mut((row, a_col(i)), (d, 1)).copy_from(&(-&ju[i]));
            }
        }
        jac.view_mut((n * d + i, i * d), (1, d))
            .copy_from(&u[i].transpose());
    }
    (res, jac)
}
