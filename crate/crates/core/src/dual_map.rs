//! The dual billiard map `T` and its inverse.
//!
//! For an exterior point `z`, the image is `2 q(u) - z` where the tangency
//! normal `u` solves `q(u) - z = s J u`. Forward means `s > 0`, i.e. the chord
//! from `z` to its image runs along the characteristic direction `J u`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::SupportSurface;
use crate::symplectic::{j_apply, normalized, AmbientVector};

/// Exterior margin below which a point counts as on or inside the surface.
pub const EXTERIOR_MARGIN: f64 = 1e-10;
/// Central-difference step of the symplecticity check.
pub const JACOBIAN_STEP: f64 = 1e-5;

const SWEEP_SEED: u64 = 0xd1a1_b111;
const EXTERIOR_RESTARTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Direction::Forward),
            "backward" => Ok(Direction::Backward),
            other => Err(Error::InvalidParameter(format!(
                "direction must be forward or backward, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MapResult {
    pub image: AmbientVector,
    pub tangency_normal: AmbientVector,
    pub tangency_point: AmbientVector,
    /// `s` in `q(u) - z = s J u`.
    pub multiplier: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct MapOptions {
    /// Residual tolerance, relative to `1 + |z|`.
    pub tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iterations: 50,
            max_halvings: 20,
        }
    }
}

/// `max_u (z . u - h(u))`, by projected-gradient ascent from `z / |z|` plus
/// random restarts. Returns early once the value exceeds [`EXTERIOR_MARGIN`].
pub fn exterior_margin(s: &SupportSurface, z: &AmbientVector) -> f64 {
    let dim = s.dim();
    let start = if z.norm() > 0.0 {
        normalized(z)
    } else {
        dim.e_x(0)
    };
    let mut best = ascend(s, z, start);
    if best > EXTERIOR_MARGIN {
        return best;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SWEEP_SEED);
    for _ in 0..EXTERIOR_RESTARTS {
        let v = ascend(s, z, dim.random_unit(&mut rng));
        best = best.max(v);
        if best > EXTERIOR_MARGIN {
            break;
        }
    }
    best
}

fn ascend(s: &SupportSurface, z: &AmbientVector, mut u: AmbientVector) -> f64 {
    let value = |u: &AmbientVector| z.dot(u) - s.support(u);
    let mut current = value(&u);
    let mut step = 1.0;
    for _ in 0..500 {
        if current > EXTERIOR_MARGIN {
            break;
        }
        // tangential gradient of z.u - h(u)
        let diff = z - s.point(&u);
        let g = &diff - &u * u.dot(&diff);
        if g.norm() < 1e-13 {
            break;
        }
        let mut improved = false;
        for _ in 0..40 {
            let cand = normalized(&(&u + &g * step));
            let v = value(&cand);
            if v > current {
                u = cand;
                current = v;
                step *= 2.0;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    current
}

pub fn is_exterior(s: &SupportSurface, z: &AmbientVector) -> bool {
    exterior_margin(s, z) > EXTERIOR_MARGIN
}

/// Evaluates `T(z)` (forward) or `T^{-1}(z)` (backward).
pub fn dual_map(s: &SupportSurface, z: &AmbientVector, direction: Direction) -> Result<MapResult> {
    dual_map_with(s, z, direction, &MapOptions::default())
}

pub fn dual_map_with(
    s: &SupportSurface,
    z: &AmbientVector,
    direction: Direction,
    opts: &MapOptions,
) -> Result<MapResult> {
    s.dim().validate(z)?;
    if !is_exterior(s, z) {
        return Err(Error::NotExterior);
    }
    let mut best_residual = f64::INFINITY;
    for seed in seeds(s, z, direction) {
        match newton(s, z, direction, seed, opts) {
            Ok(res) => return Ok(res),
            Err(r) => best_residual = best_residual.min(r),
        }
    }
    Err(Error::NoConvergence { best_residual })
}

/// Like [`dual_map_with`] but tries `guess` as the first seed.
pub(crate) fn dual_map_near(
    s: &SupportSurface,
    z: &AmbientVector,
    direction: Direction,
    guess: &AmbientVector,
    opts: &MapOptions,
) -> Result<MapResult> {
    match newton(s, z, direction, guess.clone(), opts) {
        Ok(res) => Ok(res),
        Err(_) => dual_map_with(s, z, direction, opts),
    }
}

fn chord_residual(s: &SupportSurface, z: &AmbientVector, u: &AmbientVector) -> (f64, f64) {
    let d = s.point(u) - z;
    let ju = j_apply(u);
    let mult = d.dot(&ju);
    ((d - ju * mult).norm(), mult)
}

fn seeds(s: &SupportSurface, z: &AmbientVector, direction: Direction) -> Vec<AmbientVector> {
    let dim = s.dim();
    let mut out = Vec::new();
    // exact for round spheres: tangency in the complex line through z
    let zhat = normalized(z);
    let cos = (s.support(&zhat) / z.norm()).clamp(-1.0, 1.0);
    let sin = (1.0 - cos * cos).sqrt();
    out.push(normalized(&(&zhat * cos + j_apply(&zhat) * (direction.sign() * sin))));

    let mut sweep = Vec::with_capacity(2 * dim.ambient() + 16);
    for k in 0..dim.ambient() {
        let mut e = dim.zeros();
        e[k] = 1.0;
        sweep.push(e.clone());
        sweep.push(-e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SWEEP_SEED ^ 0x55);
    sweep.extend((0..16).map(|_| dim.random_unit(&mut rng)));
    let mut scored: Vec<(f64, AmbientVector)> = sweep
        .into_iter()
        .map(|u| {
            let (r, mult) = chord_residual(s, z, &u);
            let penalty = if mult * direction.sign() > 0.0 { 0.0 } else { 1e6 };
            (r / (1.0 + z.norm()) + penalty, u)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    out.extend(scored.into_iter().map(|(_, u)| u));
    out
}

/// Damped Newton on `q(u) - z - s J u = 0`, `|u|^2 = 1`; returns the best
/// residual on failure.
fn newton(
    s: &SupportSurface,
    z: &AmbientVector,
    direction: Direction,
    mut u: AmbientVector,
    opts: &MapOptions,
) -> std::result::Result<MapResult, f64> {
    let n = u.len();
    let tol = opts.tol * (1.0 + z.norm());
    let (mut residual, mut mult) = chord_residual(s, z, &u);
    let mut iterations = 0;
    let mut polished = false;
    loop {
        let converged = residual < tol;
        if converged && (polished || residual == 0.0) {
            break;
        }
        if iterations >= opts.max_iterations {
            if converged {
                break;
            }
            return Err(residual);
        }
        iterations += 1;

        let sp = s.evaluate(&u);
        let ju = j_apply(&u);
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        let jm = s.dim().j_matrix();
        jac.view_mut((0, 0), (n, n)).copy_from(&(&sp.jacobian - jm * mult));
        jac.view_mut((0, n), (n, 1)).copy_from(&(-&ju));
        jac.view_mut((n, 0), (1, n)).copy_from(&u.transpose());
        let mut rhs = DVector::zeros(n + 1);
        rhs.rows_mut(0, n).copy_from(&(-(&sp.point - z - &ju * mult)));
        let Some(step) = jac.lu().solve(&rhs) else {
            return Err(residual);
        };
        let du = step.rows(0, n).into_owned();

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let cand = normalized(&(&u + &du * t));
            let (r, m) = chord_residual(s, z, &cand);
            if r < residual {
                u = cand;
                residual = r;
                mult = m;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if converged {
            polished = true;
        }
        if !accepted {
            if converged {
                break;
            }
            return Err(residual);
        }
    }
    if (mult * direction.sign()).is_nan() || mult * direction.sign() <= 0.0 {
        return Err(residual);
    }
    let q = s.point(&u);
    Ok(MapResult {
        image: &q * 2.0 - z,
        tangency_normal: u,
        tangency_point: q,
        multiplier: mult,
        residual,
        iterations,
    })
}

/// `|T^{-1}(T(z)) - z|`.
pub fn inverse_consistency(s: &SupportSurface, z: &AmbientVector) -> Result<f64> {
    let fwd = dual_map(s, z, Direction::Forward)?;
    // T^{-1}(T z) touches the same tangency point
    let back = dual_map_near(
        s,
        &fwd.image,
        Direction::Backward,
        &fwd.tangency_normal,
        &MapOptions::default(),
    )?;
    Ok((back.image - z).norm())
}

/// Max-norm of `D^T Omega D - Omega` for the central-difference Jacobian `D`
/// of the forward map at `z`.
pub fn symplecticity_defect(s: &SupportSurface, z: &AmbientVector) -> Result<f64> {
    let jac = map_jacobian(s, z, Direction::Forward)?;
    let omega = s.dim().omega_matrix();
    Ok((jac.transpose() * &omega * &jac - omega).amax())
}

/// Central-difference Jacobian of `T` (or `T^{-1}`) at `z`.
pub fn map_jacobian(s: &SupportSurface, z: &AmbientVector, direction: Direction) -> Result<DMatrix<f64>> {
    if exterior_margin(s, z) <= 10.0 * JACOBIAN_STEP {
        return Err(Error::NotExterior);
    }
    let base = dual_map(s, z, direction)?;
    let n = z.len();
    let opts = MapOptions::default();
    let mut jac = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut e = DVector::zeros(n);
        e[k] = JACOBIAN_STEP;
        let plus = dual_map_near(s, &(z + &e), direction, &base.tangency_normal, &opts)?;
        let minus = dual_map_near(s, &(z - &e), direction, &base.tangency_normal, &opts)?;
        jac.set_column(k, &((plus.image - minus.image) / (2.0 * JACOBIAN_STEP)));
    }
    Ok(jac)
}

/// A point `r d` with `d` a random direction and `r` drawn from
/// `[lo, hi] * max_support`; exterior whenever `lo > 1`.
pub fn random_exterior_point<R: Rng + ?Sized>(
    s: &SupportSurface,
    rng: &mut R,
    lo: f64,
    hi: f64,
) -> AmbientVector {
    let d = s.dim().random_unit(rng);
    let r = rng.random_range(lo..hi) * s.max_support();
    s.center() + d * r
}
