//! Strictly convex closed hypersurfaces described by their support function.
//!
//! A surface is parametrized by its Gauss map: a unit direction `u` is sent to
//! the unique boundary point `q(u) = h(u) u + grad h(u)` with outward normal
//! `u`. Internally `h` is extended 1-homogeneously to `H(x) = |x| h(x / |x|)`,
//! so that `q(u) = grad H(u)` and the differential of the Gauss-map inverse is
//! `Hess H(u)`, a symmetric matrix with `u` in its kernel.

mod polynomial;
mod spec_file;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::symplectic::{j_apply, tangent_projector, AmbientVector, Dimension};

pub use polynomial::Polynomial;
pub use spec_file::SurfaceSpec;

/// Smallest admissible principal radius of curvature in the convexity
/// certificate.
pub const CONVEXITY_THRESHOLD: f64 = 1e-8;
/// Number of pseudo-random directions sampled by the certificate, on top of
/// the `4m` signed basis directions.
pub const CERTIFICATE_SAMPLES: usize = 1000;
/// Central-difference step for user-supplied support functions.
pub const FD_STEP: f64 = 1e-5;

const CERTIFICATE_SEED: u64 = 0x5eed_c0de;

/// A support function supplied by the caller; derivatives are taken by
/// central differences.
pub trait SupportFunction: Send + Sync {
    fn dim(&self) -> Dimension;
    /// `h(u)` for unit `u`.
    fn value(&self, u: &AmbientVector) -> f64;
}

impl<F> SupportFunction for (Dimension, F)
where
    F: Fn(&AmbientVector) -> f64 + Send + Sync,
{
    fn dim(&self) -> Dimension {
        self.0
    }

    fn value(&self, u: &AmbientVector) -> f64 {
        (self.1)(u)
    }
}

/// What kind of body a surface was built as.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceKind {
    Sphere { radius: f64 },
    Ellipsoid { semi_axes: Vec<f64> },
    PerturbedSphere(PerturbationParams),
    Custom { label: String },
}

#[derive(Clone)]
enum Base {
    Sphere(f64),
    Ellipsoid(Vec<f64>),
    Function(Arc<dyn SupportFunction>),
}

impl fmt::Debug for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Base::Sphere(r) => f.debug_tuple("Sphere").field(r).finish(),
            Base::Ellipsoid(b) => f.debug_tuple("Ellipsoid").field(b).finish(),
            Base::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Parameters of the perturbed sphere `h = 1 + eps f` with
/// `f = sum a_i (x_i^2 + y_i^2) / 2 + eps sum (x_i^3 - 3 x_i y_i^2) / 3`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PerturbationParams {
    a: Vec<f64>,
    eps: f64,
}

impl PerturbationParams {
    pub fn new(a: Vec<f64>, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        let delta = delta_bound(&a)?;
        if eps * eps >= delta {
            return Err(Error::PerturbationTooLarge {
                eps_sq: eps * eps,
                delta,
            });
        }
        Ok(Self { a, eps })
    }

    /// Uses `eps = min(0.05, sqrt(delta) / 2)`.
    pub fn with_default_eps(a: Vec<f64>) -> Result<Self> {
        let eps = default_eps(&a)?;
        Self::new(a, eps)
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> Dimension {
        Dimension::new(self.a.len()).expect("validated non-empty")
    }

    pub fn delta(&self) -> f64 {
        delta_bound(&self.a).expect("validated distinct")
    }

    /// `f` as a polynomial on R^{2m}.
    pub fn f_polynomial(&self) -> Polynomial {
        let dim = self.dim();
        let m = dim.m();
        let mut p = Polynomial::new(dim);
        for (i, &ai) in self.a.iter().enumerate() {
            let (x, y) = (i, m + i);
            p.add_term(ai / 2.0, &[(x, 2)]).expect("in range");
            p.add_term(ai / 2.0, &[(y, 2)]).expect("in range");
            p.add_term(self.eps / 3.0, &[(x, 3)]).expect("in range");
            p.add_term(-self.eps, &[(x, 1), (y, 2)]).expect("in range");
        }
        p
    }
}

pub fn default_eps(a: &[f64]) -> Result<f64> {
    Ok(0.05f64.min(0.5 * delta_bound(a)?.sqrt()))
}

/// `delta = min over eta and over index sets I with |I| >= 2 of
/// sum_{i in I} (eta - a_i)^2`, which reduces to `min_{i<j} (a_i - a_j)^2 / 2`.
pub fn delta_bound(a: &[f64]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::ZeroDimension);
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let d = a[i] - a[j];
            if d == 0.0 {
                return Err(Error::RepeatedCoefficient { first: i, second: j });
            }
            best = best.min(0.5 * d * d);
        }
    }
    // m = 1 has no index set of size two; the constraint is vacuous
    Ok(best)
}

/// `f(p) = sum a_i (x_i^2 + y_i^2) / 2 + eps sum (x_i^3 - 3 x_i y_i^2) / 3`.
pub fn lemma6_f(p: &AmbientVector, params: &PerturbationParams) -> f64 {
    let m = params.a.len();
    let eps = params.eps;
    (0..m)
        .map(|i| {
            let (x, y) = (p[i], p[m + i]);
            params.a[i] * (x * x + y * y) / 2.0 + eps * (x * x * x - 3.0 * x * y * y) / 3.0
        })
        .sum()
}

/// Ambient gradient of [`lemma6_f`].
pub fn lemma6_grad_f(p: &AmbientVector, params: &PerturbationParams) -> AmbientVector {
    let m = params.a.len();
    let eps = params.eps;
    let mut g = DVector::zeros(2 * m);
    for i in 0..m {
        let (x, y) = (p[i], p[m + i]);
        g[i] = params.a[i] * x + eps * (x * x - y * y);
        g[m + i] = params.a[i] * y - 2.0 * eps * x * y;
    }
    g
}

/// Ambient Hessian of [`lemma6_f`].
pub fn lemma6_hess_f(p: &AmbientVector, params: &PerturbationParams) -> DMatrix<f64> {
    let m = params.a.len();
    let eps = params.eps;
    let mut h = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        let (x, y) = (p[i], p[m + i]);
        h[(i, i)] = params.a[i] + 2.0 * eps * x;
        h[(m + i, m + i)] = params.a[i] - 2.0 * eps * x;
        h[(i, m + i)] = -2.0 * eps * y;
        h[(m + i, i)] = -2.0 * eps * y;
    }
    h
}

/// A strictly convex closed hypersurface given by its support function.
#[derive(Debug, Clone)]
pub struct SupportSurface {
    dim: Dimension,
    kind: SurfaceKind,
    base: Base,
    perturbation: Option<Polynomial>,
    center: AmbientVector,
    diameter: f64,
    max_support: f64,
}

/// Boundary point and the differential of the inverse Gauss map at a normal.
#[derive(Debug, Clone)]
pub struct SurfacePoint {
    pub point: AmbientVector,
    pub jacobian: DMatrix<f64>,
}

impl SupportSurface {
    pub fn sphere(dim: Dimension, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Self::build(dim, SurfaceKind::Sphere { radius }, Base::Sphere(radius), None)
    }

    pub fn unit_sphere(dim: Dimension) -> Self {
        Self::sphere(dim, 1.0).expect("unit sphere is convex")
    }

    /// Ellipsoid `sum (x_k / b_k)^2 = 1`, support function `sqrt(sum b_k^2 u_k^2)`.
    pub fn ellipsoid(semi_axes: Vec<f64>) -> Result<Self> {
        let dim = Dimension::from_ambient_len(semi_axes.len())?;
        if let Some(b) = semi_axes.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "ellipsoid semi-axes must be positive, got {b}"
            )));
        }
        Self::build(
            dim,
            SurfaceKind::Ellipsoid {
                semi_axes: semi_axes.clone(),
            },
            Base::Ellipsoid(semi_axes),
            None,
        )
    }

    /// The unit sphere perturbed to `h = 1 + eps f`.
    pub fn perturbed_sphere(params: PerturbationParams) -> Result<Self> {
        let dim = params.dim();
        // h - 1 = eps * f
        let scaled = params.f_polynomial().scaled(params.eps);
        Self::build(
            dim,
            SurfaceKind::PerturbedSphere(params),
            Base::Sphere(1.0),
            Some(scaled),
        )
    }

    pub fn custom(function: Arc<dyn SupportFunction>, label: impl Into<String>) -> Result<Self> {
        let dim = function.dim();
        Self::build(
            dim,
            SurfaceKind::Custom {
                label: label.into(),
            },
            Base::Function(function),
            None,
        )
    }

    pub fn from_spec(spec: &SurfaceSpec) -> Result<Self> {
        spec_file::build(spec)
    }

    /// Adds `poly` (restricted to the unit sphere) to the support function.
    pub fn perturbed_by(&self, poly: &Polynomial) -> Result<Self> {
        if poly.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim.ambient(),
                found: poly.dim().ambient(),
            });
        }
        let perturbation = match &self.perturbation {
            Some(p) => p.clone().plus(poly)?,
            None => poly.clone(),
        };
        let label = format!("{} + polynomial", self.kind_name());
        let mut out = Self::build(
            self.dim,
            SurfaceKind::Custom { label },
            self.base.clone(),
            Some(perturbation),
        )?;
        if self.center.amax() > 0.0 {
            out = out.translated(&self.center)?;
        }
        Ok(out)
    }

    /// The same body moved by `offset`: `h(u) + offset . u`.
    pub fn translated(&self, offset: &AmbientVector) -> Result<Self> {
        self.dim.validate(offset)?;
        let mut out = self.clone();
        out.center = &self.center + offset;
        out.certify()?;
        Ok(out)
    }

    fn build(
        dim: Dimension,
        kind: SurfaceKind,
        base: Base,
        perturbation: Option<Polynomial>,
    ) -> Result<Self> {
        let mut s = Self {
            dim,
            kind,
            base,
            perturbation,
            center: dim.zeros(),
            diameter: 0.0,
            max_support: 0.0,
        };
        s.certify()?;
        Ok(s)
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn kind(&self) -> &SurfaceKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &str {
        match &self.kind {
            SurfaceKind::Sphere { .. } => "sphere",
            SurfaceKind::Ellipsoid { .. } => "ellipsoid",
            SurfaceKind::PerturbedSphere(_) => "perturbed_sphere",
            SurfaceKind::Custom { label } => label,
        }
    }

    pub fn center(&self) -> &AmbientVector {
        &self.center
    }

    /// Width-based diameter estimate `max_u h(u) + h(-u)` over the certificate sample.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Largest sampled support value; any `z` with `|z|` above it is exterior.
    pub fn max_support(&self) -> f64 {
        self.max_support
    }

    /// `h(u)` for unit `u`.
    pub fn support(&self, u: &AmbientVector) -> f64 {
        let base = match &self.base {
            Base::Sphere(r) => *r,
            Base::Ellipsoid(b) => ellipsoid_value(b, u),
            Base::Function(f) => f.value(u),
        };
        let extra = self.perturbation.as_ref().map_or(0.0, |p| p.value(u));
        base + extra + self.center.dot(u)
    }

    /// Spherical (tangential) gradient of `h` at unit `u`.
    pub fn gradient(&self, u: &AmbientVector) -> AmbientVector {
        let q = self.point(u);
        &q - u * q.dot(u)
    }

    /// `q(u) = h(u) u + grad h(u)`.
    pub fn point(&self, u: &AmbientVector) -> AmbientVector {
        match &self.base {
            Base::Function(f) => {
                let g = fd_gradient(f.as_ref(), u);
                let h = f.value(u);
                let mut q = u * h + (&g - u * g.dot(u));
                if let Some(p) = &self.perturbation {
                    q += p.homogeneous_derivatives(u).0;
                }
                q + &self.center
            }
            _ => self.evaluate(u).point,
        }
    }

    /// Checked form of [`SupportSurface::point`].
    pub fn point_on_surface(&self, u: &AmbientVector) -> Result<AmbientVector> {
        self.dim.validate_unit(u, 1e-12)?;
        Ok(self.point(u))
    }

    /// Differential of `u -> q(u)`: symmetric, `u` in its kernel, positive
    /// definite on the tangent space (its eigenvalues there are the principal
    /// radii of curvature).
    pub fn point_jacobian(&self, u: &AmbientVector) -> DMatrix<f64> {
        self.evaluate(u).jacobian
    }

    /// Tangential Hessian of `h`, as a matrix acting on the tangent space at `u`.
    pub fn hessian(&self, u: &AmbientVector) -> DMatrix<f64> {
        let dq = self.point_jacobian(u);
        let p = tangent_projector(u);
        &p * dq * &p - p * self.support(u)
    }

    pub fn evaluate(&self, u: &AmbientVector) -> SurfacePoint {
        let n = u.len();
        let (mut point, mut jacobian) = match &self.base {
            Base::Sphere(r) => (u * *r, (DMatrix::identity(n, n) - u * u.transpose()) * *r),
            Base::Ellipsoid(b) => {
                let b2u = DVector::from_fn(n, |k, _| b[k] * b[k] * u[k]);
                let h = ellipsoid_value(b, u);
                let mut jac = DMatrix::from_diagonal(&DVector::from_fn(n, |k, _| b[k] * b[k] / h));
                jac -= &b2u * b2u.transpose() / (h * h * h);
                (b2u / h, jac)
            }
            Base::Function(f) => {
                let q0 = |x: &AmbientVector| -> AmbientVector {
                    let u = x / x.norm();
                    let g = fd_gradient(f.as_ref(), &u);
                    &u * f.value(&u) + (&g - &u * g.dot(&u))
                };
                let mut jac = DMatrix::zeros(n, n);
                for k in 0..n {
                    let mut e = DVector::zeros(n);
                    e[k] = FD_STEP;
                    let col = (q0(&(u + &e)) - q0(&(u - &e))) / (2.0 * FD_STEP);
                    jac.set_column(k, &col);
                }
                let sym = (&jac + jac.transpose()) * 0.5;
                let p = tangent_projector(u);
                (q0(u), &p * sym * &p)
            }
        };
        if let Some(p) = &self.perturbation {
            let (g, h) = p.homogeneous_derivatives(u);
            point += g;
            jacobian += h;
        }
        point += &self.center;
        SurfacePoint { point, jacobian }
    }

    /// Outward normal at `q(u)` recovered from the kernel of the differential
    /// of `q`, oriented by `(q(u) - q(-u)) . n > 0`.
    pub fn normal_from_differential(&self, u: &AmbientVector) -> AmbientVector {
        let dq = self.point_jacobian(u);
        let eig = SymmetricEigen::new(dq);
        let (idx, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("non-empty");
        let mut n: AmbientVector = eig.eigenvectors.column(idx).into_owned();
        let chord = self.point(u) - self.point(&(-u));
        if chord.dot(&n) < 0.0 {
            n = -n;
        }
        n
    }

    /// Smallest principal radius of curvature at `u`.
    pub fn min_principal_radius(&self, u: &AmbientVector) -> f64 {
        let dq = self.point_jacobian(u);
        let basis = tangent_basis(u);
        let reduced = basis.transpose() * dq * &basis;
        let reduced = (&reduced + reduced.transpose()) * 0.5;
        SymmetricEigen::new(reduced)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Directions used by the convexity certificate: all signed basis vectors
    /// then a fixed pseudo-random sample.
    pub fn certificate_directions(dim: Dimension) -> Vec<AmbientVector> {
        let mut dirs = Vec::with_capacity(2 * dim.ambient() + CERTIFICATE_SAMPLES);
        for k in 0..dim.ambient() {
            let mut e = dim.zeros();
            e[k] = 1.0;
            dirs.push(e.clone());
            dirs.push(-e);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(CERTIFICATE_SEED);
        dirs.extend((0..CERTIFICATE_SAMPLES).map(|_| dim.random_unit(&mut rng)));
        dirs
    }

    fn certify(&mut self) -> Result<()> {
        let dirs = Self::certificate_directions(self.dim);
        let mut diameter: f64 = 0.0;
        let mut max_support: f64 = 0.0;
        for u in &dirs {
            let h = self.support(u);
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::OriginNotInterior {
                    direction: u.iter().copied().collect(),
                    value: h,
                });
            }
            let radius = self.min_principal_radius(u);
            if radius.is_nan() || radius <= CONVEXITY_THRESHOLD {
                return Err(Error::NotConvex {
                    direction: u.iter().copied().collect(),
                    min_radius: radius,
                });
            }
            diameter = diameter.max(h + self.support(&(-u)));
            max_support = max_support.max(h);
        }
        self.diameter = diameter;
        self.max_support = max_support;
        Ok(())
    }
}

/// Characteristic direction `J u` of the surface at the point with normal `u`.
pub fn characteristic_direction(u: &AmbientVector) -> AmbientVector {
    j_apply(u)
}

/// Orthonormal basis (as columns) of the tangent space of the sphere at unit `u`.
pub fn tangent_basis(u: &AmbientVector) -> DMatrix<f64> {
    let n = u.len();
    // Householder reflection swapping u with the basis vector it is farthest from
    let (k, _) = u
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("non-empty");
    let mut v = u.clone();
    v[k] += if u[k] >= 0.0 { 1.0 } else { -1.0 };
    let vv = v.dot(&v);
    let reflect = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vv);
    let mut basis = DMatrix::zeros(n, n - 1);
    let mut col = 0;
    for j in 0..n {
        if j != k {
            basis.set_column(col, &reflect.column(j));
            col += 1;
        }
    }
    basis
}

fn ellipsoid_value(b: &[f64], u: &AmbientVector) -> f64 {
    b.iter()
        .zip(u.iter())
        .map(|(bk, uk)| bk * bk * uk * uk)
        .sum::<f64>()
        .sqrt()
}

fn fd_gradient(f: &dyn SupportFunction, u: &AmbientVector) -> AmbientVector {
    let homogeneous = |x: &AmbientVector| {
        let r = x.norm();
        r * f.value(&(x / r))
    };
    let n = u.len();
    DVector::from_fn(n, |k, _| {
        let mut e = DVector::zeros(n);
        e[k] = FD_STEP;
        (homogeneous(&(u + &e)) - homogeneous(&(u - &e))) / (2.0 * FD_STEP)
    })
}

#[cfg(test)]
mod tests;
