//! Exact-count construction on the perturbed sphere `h = 1 + eps f`.
//!
//! The function `f` is invariant under multiplication by a cube root of
//! unity and has exactly `2m` critical orbits of that action on the unit
//! sphere. Each one yields a first-order triangle orbit of the perturbed
//! sphere; the experiment checks that the multistart search finds exactly
//! those and nothing else.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::orbit::{
    canonicalize_mod_dihedral, multistart_search_with, newton_polish, OrbitSet, PolishOptions,
    SearchOptions, TangencyTuple,
};
use crate::surface::{lemma6_f, lemma6_grad_f, lemma6_hess_f, PerturbationParams, SupportSurface};
use crate::symplectic::{cube_root_rotate, normalized, tangent_part, AmbientVector, SQRT_3};

const VERIFY_TOL: f64 = 1e-10;
const SWEEP_STARTS: usize = 500;
const SWEEP_SEED: u64 = 0x0c41_7ca1;
const MATCH_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// A critical orbit `{p, lambda p, lambda^2 p}` of `f` on the unit sphere.
#[derive(Debug, Clone)]
pub struct CriticalOrbitOfF {
    pub representative: AmbientVector,
    /// Complex coordinate carrying the orbit.
    pub index_i: usize,
    /// Lagrange multiplier: `grad f(p) = eta p`.
    pub eta: f64,
    pub branch: Branch,
    pub critical_value: f64,
}

impl CriticalOrbitOfF {
    pub fn points(&self) -> [AmbientVector; 3] {
        [0, 1, 2].map(|k| cube_root_rotate(&self.representative, k))
    }

    /// `max |grad f(p) - eta p|` over the three points of the orbit.
    pub fn lagrange_residual(&self, params: &PerturbationParams) -> f64 {
        self.points()
            .iter()
            .map(|p| (lemma6_grad_f(p, params) - p * self.eta).norm())
            .fold(0.0, f64::max)
    }
}

/// Closed-form critical orbits: `p = +-e_{x_i}` with `eta = a_i +- eps`,
/// each verified against the Lagrange system, then cross-checked by a
/// numeric sweep that must find nothing else.
pub fn critical_orbits_of_f(params: &PerturbationParams) -> Result<Vec<CriticalOrbitOfF>> {
    let orbits = closed_form_orbits(params)?;
    critical_point_sweep(params, &orbits, SWEEP_STARTS, SWEEP_SEED)?;
    Ok(orbits)
}

fn closed_form_orbits(params: &PerturbationParams) -> Result<Vec<CriticalOrbitOfF>> {
    let eps = params.eps();
    let delta = params.delta();
    if eps * eps >= delta {
        return Err(Error::PerturbationTooLarge {
            eps_sq: eps * eps,
            delta,
        });
    }
    let dim = params.dim();
    let mut out = Vec::with_capacity(2 * dim.m());
    for (i, &ai) in params.a().iter().enumerate() {
        for branch in [Branch::Plus, Branch::Minus] {
            let eta = ai + branch.sign() * eps;
            // x_i = (eta - a_i) / eps is forced to +-1 by the sphere
            let representative = dim.e_x(i) * branch.sign();
            let orbit = CriticalOrbitOfF {
                critical_value: lemma6_f(&representative, params),
                representative,
                index_i: i,
                eta,
                branch,
            };
            if orbit.lagrange_residual(params) >= VERIFY_TOL
                || (orbit.representative.norm() - 1.0).abs() > 1e-12
            {
                return Err(Error::UnexpectedCriticalPoint {
                    point: orbit.representative.iter().copied().collect(),
                });
            }
            out.push(orbit);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub starts: usize,
    pub converged: usize,
    /// Converged starts per closed-form orbit, in the order given.
    pub hits: Vec<usize>,
}

/// Newton on `grad f(p) = eta p, |p| = 1` from random starts. Every
/// converged point must be carried by a single complex coordinate and lie on
/// one of the given orbits.
pub fn critical_point_sweep(
    params: &PerturbationParams,
    orbits: &[CriticalOrbitOfF],
    starts: usize,
    seed: u64,
) -> Result<SweepReport> {
    let dim = params.dim();
    let m = dim.m();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SweepReport {
        starts,
        converged: 0,
        hits: vec![0; orbits.len()],
    };
    for _ in 0..starts {
        let Some(p) = lagrange_newton(params, dim.random_unit(&mut rng)) else {
            continue;
        };
        report.converged += 1;
        let unexpected = || Error::UnexpectedCriticalPoint {
            point: p.iter().copied().collect(),
        };
        let carriers = (0..m)
            .filter(|&i| p[i] * p[i] + p[m + i] * p[m + i] > 1e-8)
            .count();
        if carriers != 1 {
            return Err(unexpected());
        }
        let found = orbits
            .iter()
            .position(|o| o.points().iter().any(|q| (q - &p).norm() < MATCH_TOL))
            .ok_or_else(unexpected)?;
        report.hits[found] += 1;
    }
    Ok(report)
}

fn lagrange_newton(params: &PerturbationParams, start: AmbientVector) -> Option<AmbientVector> {
    let n = start.len();
    let residual = |p: &AmbientVector, eta: f64| (lemma6_grad_f(p, params) - p * eta).norm();
    let mut p = start;
    let mut eta = lemma6_grad_f(&p, params).dot(&p);
    let mut merit = residual(&p, eta);
    for _ in 0..50 {
        if merit < 1e-13 {
            return Some(p);
        }
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        let hess = lemma6_hess_f(&p, params) - DMatrix::identity(n, n) * eta;
        jac.view_mut((0, 0), (n, n)).copy_from(&hess);
        jac.view_mut((0, n), (n, 1)).copy_from(&(-&p));
        jac.view_mut((n, 0), (1, n)).copy_from(&p.transpose());
        let mut rhs = DVector::zeros(n + 1);
        rhs.rows_mut(0, n)
            .copy_from(&(p.clone() * eta - lemma6_grad_f(&p, params)));
        rhs[n] = -0.5 * (p.norm_squared() - 1.0);
        let step = jac.svd(true, true).solve(&rhs, 1e-14).ok()?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let cand = normalized(&(&p + step.rows(0, n) * t));
            let cand_eta = eta + t * step[n];
            let r = residual(&cand, cand_eta);
            if r < merit {
                p = cand;
                eta = cand_eta;
                merit = r;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (merit < 1e-12).then_some(p)
}

/// First-order triangle orbit of the perturbed sphere through a critical
/// orbit: normals `lambda^k (z + eps v_k)` and multipliers
/// `sqrt(3) + eps alpha_k` with `alpha_k = sqrt(3) c`.
///
/// The corrections `v_k` (tangent at `z`, with `v_0 = 0`) solve the
/// order-`eps` part of the closure equations,
/// `lambda^{-1} ((c + i alpha_k) z + w + (1 + i sqrt 3) v_k)
///   = (c - i alpha_{k+1}) z + w + (1 - i sqrt 3) v_{k+1}`,
/// written over R with `i` acting as `J`; `w` is the tangential gradient of
/// `f` at `z`.
pub fn linearized_seed(params: &PerturbationParams, crit: &CriticalOrbitOfF) -> Result<TangencyTuple> {
    let z = &crit.representative;
    let d = z.len();
    let dim = params.dim();
    let eps = params.eps();
    let c = lemma6_f(z, params);
    let w = tangent_part(z, &lemma6_grad_f(z, params));
    let alpha = [SQRT_3 * c; 3];

    let jm = dim.j_matrix();
    let id = DMatrix::<f64>::identity(d, d);
    // lambda^{-1} = -1/2 - (sqrt 3 / 2) i
    let inv_lambda = &id * -0.5 - &jm * (SQRT_3 / 2.0);
    let own = &inv_lambda * (&id + &jm * SQRT_3);
    let next = -(&id - &jm * SQRT_3);

    // unknowns v_1, v_2; rows: three closure blocks then two tangency rows
    let mut mat = DMatrix::zeros(3 * d + 2, 2 * d);
    let mut rhs = DVector::zeros(3 * d + 2);
    for k in 0..3 {
        let k1 = (k + 1) % 3;
        let lhs_const = &inv_lambda * (z * c + &jm * z * alpha[k] + &w);
        let rhs_const = z * c - &jm * z * alpha[k1] + &w;
        rhs.rows_mut(k * d, d).copy_from(&(rhs_const - lhs_const));
        if k > 0 {
            mat.view_mut((k * d, (k - 1) * d), (d, d)).copy_from(&own);
        }
        if k1 > 0 {
            mat.view_mut((k * d, (k1 - 1) * d), (d, d)).copy_from(&next);
        }
    }
    for j in 0..2 {
        mat.view_mut((3 * d + j, j * d), (1, d))
            .copy_from(&z.transpose());
    }
    let svd = mat.clone().svd(true, true);
    if svd.singular_values.min() < 1e-12 {
        return Err(Error::Singular("linearized closure system"));
    }
    let sol = svd
        .solve(&rhs, 1e-14)
        .map_err(|_| Error::Singular("linearized closure system"))?;
    if (&mat * &sol - &rhs).norm() > 1e-9 * (1.0 + rhs.norm()) {
        return Err(Error::Singular("linearized closure system is inconsistent"));
    }
    let v = [
        DVector::zeros(d),
        sol.rows(0, d).into_owned(),
        sol.rows(d, d).into_owned(),
    ];
    let normals = (0..3)
        .map(|k| cube_root_rotate(&(z + &v[k] * eps), k as i64))
        .collect();
    let multipliers = alpha.iter().map(|al| SQRT_3 + eps * al).collect();
    TangencyTuple::from_directions(normals, multipliers)
}

#[derive(Debug, Clone)]
pub struct SharpnessReport {
    pub expected: usize,
    pub count: usize,
    pub count_doubled: usize,
    /// For each critical orbit, the index in `set.orbits` its polished
    /// linearized seed landed on.
    pub seed_matches: Vec<Option<usize>>,
    /// Newton iterations from each linearized seed.
    pub seed_iterations: Vec<Option<usize>>,
    pub set: OrbitSet,
}

impl SharpnessReport {
    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.count];
        self.seed_matches.len() == self.count
            && self.seed_matches.iter().all(|m| match m {
                Some(i) if !seen[*i] => {
                    seen[*i] = true;
                    true
                }
                _ => false,
            })
    }

    pub fn is_stable(&self) -> bool {
        self.count == self.count_doubled
    }

    pub fn success(&self) -> bool {
        self.count == self.expected && self.is_stable() && self.is_bijection()
    }
}

/// Multistart search on the perturbed sphere with the random seeds plus
/// every linearized seed, repeated with twice the starts.
pub fn sharpness_experiment(
    params: &PerturbationParams,
    n_starts: usize,
    rng_seed: u64,
) -> Result<SharpnessReport> {
    let surface = SupportSurface::perturbed_sphere(params.clone())?;
    let crits = critical_orbits_of_f(params)?;
    let seeds = crits
        .iter()
        .map(|c| linearized_seed(params, c))
        .collect::<Result<Vec<_>>>()?;
    let run = |n: usize| {
        multistart_search_with(
            &surface,
            &SearchOptions {
                n_starts: n,
                rng_seed,
                extra_seeds: seeds.clone(),
                ..SearchOptions::default()
            },
        )
    };
    let set = run(n_starts)?;
    let doubled = run(2 * n_starts)?;

    let polish = PolishOptions::default();
    let mut seed_matches = Vec::with_capacity(seeds.len());
    let mut seed_iterations = Vec::with_capacity(seeds.len());
    for seed in &seeds {
        match newton_polish(&surface, seed, &polish).into_solution() {
            Some(sol) => {
                seed_iterations.push(Some(sol.iterations));
                seed_matches.push(set.find(&canonicalize_mod_dihedral(&sol)));
            }
            None => {
                seed_iterations.push(None);
                seed_matches.push(None);
            }
        }
    }
    Ok(SharpnessReport {
        expected: 2 * params.dim().m(),
        count: set.count(),
        count_doubled: doubled.count(),
        seed_matches,
        seed_iterations,
        set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::closure_residual;
    use approx::assert_abs_diff_eq;

    fn params(a: &[f64], eps: f64) -> PerturbationParams {
        PerturbationParams::new(a.to_vec(), eps).unwrap()
    }

    #[test]
    fn closed_form_census() {
        let p = params(&[1.0, 2.0], 0.1);
        let orbits = critical_orbits_of_f(&p).unwrap();
        assert_eq!(orbits.len(), 4);
        let mut etas: Vec<f64> = orbits.iter().map(|o| o.eta).collect();
        etas.sort_by(f64::total_cmp);
        for (got, want) in etas.iter().zip([0.9, 1.1, 1.9, 2.1]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        for o in &orbits {
            let s = o.branch.sign();
            let ai = p.a()[o.index_i];
            assert_abs_diff_eq!(o.critical_value, ai / 2.0 + s * 0.1 / 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!((o.eta - ai).powi(2), 0.01, epsilon = 1e-12);
            assert!(o.lagrange_residual(&p) < 1e-10);
            assert_eq!(o.representative[o.index_i], s);
            assert_abs_diff_eq!(o.representative.norm(), 1.0, epsilon = 1e-15);
        }
        assert_eq!(critical_orbits_of_f(&params(&[1.0, 2.0, 3.0], 0.1)).unwrap().len(), 6);
    }

    #[test]
    fn critical_values_distinct() {
        let p = params(&[1.0, 2.0, 3.0], 0.1);
        let mut values: Vec<f64> = critical_orbits_of_f(&p)
            .unwrap()
            .iter()
            .map(|o| o.critical_value)
            .collect();
        values.sort_by(f64::total_cmp);
        assert!(values.windows(2).all(|w| w[1] - w[0] > 1e-3));
    }

    #[test]
    fn sweep_hits_every_orbit() {
        let p = params(&[1.0, 2.0], 0.1);
        let orbits = closed_form_orbits(&p).unwrap();
        let report = critical_point_sweep(&p, &orbits, 200, 1).unwrap();
        assert!(report.converged > 100);
        assert!(report.hits.iter().all(|&h| h > 0), "{:?}", report.hits);
    }

    #[test]
    fn sweep_flags_foreign_points() {
        let p = params(&[1.0, 2.0], 0.1);
        let mut orbits = closed_form_orbits(&p).unwrap();
        orbits.pop();
        assert!(matches!(
            critical_point_sweep(&p, &orbits, 200, 1),
            Err(Error::UnexpectedCriticalPoint { .. })
        ));
    }

    #[test]
    fn linearized_seed_closes_and_polishes() {
        let p = params(&[1.0, 2.0], 0.05);
        let s = SupportSurface::perturbed_sphere(p.clone()).unwrap();
        for crit in critical_orbits_of_f(&p).unwrap() {
            let seed = linearized_seed(&p, &crit).unwrap();
            assert!(closure_residual(&s, &seed).norm() < 1e-12);
            let sol = newton_polish(&s, &seed, &PolishOptions::default())
                .into_solution()
                .unwrap();
            assert!(sol.iterations <= 10);
            assert!(sol.residual < 1e-10);
            assert!(sol.is_isolated);
        }
    }

    #[test]
    fn linearized_seed_tends_to_sphere_triangle() {
        let p = params(&[1.0, 2.0], 1e-9);
        let crit = &closed_form_orbits(&p).unwrap()[0];
        let seed = linearized_seed(&p, crit).unwrap();
        let exact = TangencyTuple::sphere_triangle(&crit.representative).unwrap();
        for (a, b) in seed.normals().iter().zip(exact.normals()) {
            assert!((a - b).norm() < 1e-8);
        }
        for a in seed.multipliers() {
            assert_abs_diff_eq!(*a, SQRT_3, epsilon = 1e-8);
        }
    }

    #[test]
    fn single_plane_experiment() {
        let p = params(&[1.0], 0.1);
        let report = sharpness_experiment(&p, 50, 5).unwrap();
        assert_eq!(report.count, 2);
        assert!(report.success());
    }
}
