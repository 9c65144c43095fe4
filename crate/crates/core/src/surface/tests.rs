use std::sync::Arc;

use approx::assert_abs_diff_eq;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::symplectic::cube_root_rotate;

fn dim(m: usize) -> Dimension {
    Dimension::new(m).unwrap()
}

fn lemma_params() -> PerturbationParams {
    PerturbationParams::new(vec![1.0, 2.0], 0.1).unwrap()
}

/// Brute force: every index set with at least two elements, eta on a grid
/// refined around the best cell.
fn delta_oracle(a: &[f64]) -> f64 {
    let m = a.len();
    let lo = a.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let hi = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << m) {
        if mask.count_ones() < 2 {
            continue;
        }
        let g = |eta: f64| -> f64 {
            (0..m)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| (eta - a[i]).powi(2))
                .sum()
        };
        let (mut left, mut right) = (lo, hi);
        for _ in 0..6 {
            let steps = 2000;
            let h = (right - left) / steps as f64;
            let (k_best, _) = (0..=steps)
                .map(|k| (k, g(left + k as f64 * h)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            let c = left + k_best as f64 * h;
            left = c - h;
            right = c + h;
        }
        best = best.min(g(0.5 * (left + right)));
    }
    best
}

#[test]
fn delta_bound_matches_brute_force() {
    let cases: [(&[f64], f64); 3] = [(&[1.0, 2.0], 0.5), (&[1.0, 2.0, 3.0], 0.5), (&[0.0, 10.0], 50.0)];
    for (a, expected) in cases {
        let oracle = delta_oracle(a);
        assert_abs_diff_eq!(oracle, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(delta_bound(a).unwrap(), oracle, epsilon = 1e-9);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in 2..=4 {
        for _ in 0..20 {
            let a: Vec<f64> = (0..m).map(|_| rand::Rng::random_range(&mut rng, -3.0..3.0)).collect();
            assert_abs_diff_eq!(delta_bound(&a).unwrap(), delta_oracle(&a), epsilon = 1e-9);
        }
    }
}

#[test]
fn delta_bound_rejects_repeats() {
    assert!(matches!(
        delta_bound(&[1.0, 2.0, 1.0]),
        Err(Error::RepeatedCoefficient { first: 0, second: 2 })
    ));
    assert!(PerturbationParams::new(vec![1.0, 1.0], 0.01).is_err());
}

#[test]
fn point_on_sphere_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let unit = SupportSurface::unit_sphere(dim(2));
    let big = SupportSurface::sphere(dim(2), 2.5).unwrap();
    for _ in 0..10 {
        let u = dim(2).random_unit(&mut rng);
        assert!((unit.point_on_surface(&u).unwrap() - &u).norm() < 1e-15);
        assert!((big.point_on_surface(&u).unwrap() - &u * 2.5).norm() < 1e-14);
    }
    let not_unit = DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]);
    assert!(matches!(unit.point_on_surface(&not_unit), Err(Error::NotUnit { .. })));
}

#[test]
fn perturbed_sphere_support_value() {
    let s = SupportSurface::perturbed_sphere(lemma_params()).unwrap();
    let u = dim(2).e_x(0);
    let q = s.point_on_surface(&u).unwrap();
    let expected = 1.0 + 0.1 * (0.5 + 0.1 / 3.0);
    assert_abs_diff_eq!(q.dot(&u), expected, epsilon = 1e-15);
    assert_abs_diff_eq!(s.support(&u), expected, epsilon = 1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let u = dim(2).random_unit(&mut rng);
        let h = 1.0 + 0.1 * lemma6_f(&u, &lemma_params());
        assert_abs_diff_eq!(s.support(&u), h, epsilon = 1e-13);
        // grad h is the tangential part of eps * grad f
        let g = tangent_part_of(&u, &(lemma6_grad_f(&u, &lemma_params()) * 0.1));
        assert!((s.gradient(&u) - g).norm() < 1e-13);
    }
}

fn tangent_part_of(u: &AmbientVector, v: &AmbientVector) -> AmbientVector {
    v - u * u.dot(v)
}

#[test]
fn lemma6_examples() {
    let p = lemma_params();
    let e = dim(2).e_x(0);
    assert_abs_diff_eq!(lemma6_f(&e, &p), 0.5 + 0.1 / 3.0, epsilon = 1e-15);
    let g = lemma6_grad_f(&e, &p);
    assert_abs_diff_eq!(g[0], 1.1, epsilon = 1e-15);
    assert_eq!(g.iter().skip(1).copied().collect::<Vec<_>>(), vec![0.0; 3]);
    assert_eq!(lemma6_f(&dim(2).zeros(), &p), 0.0);
    assert_eq!(lemma6_grad_f(&dim(2).zeros(), &p), dim(2).zeros());
}

#[test]
fn lemma6_gradient_and_hessian_match_finite_differences() {
    let p = PerturbationParams::new(vec![1.0, 2.0, 3.5], 0.2).unwrap();
    let d = dim(3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = 1e-6;
    for _ in 0..100 {
        let x = d.random_unit(&mut rng) * 1.3;
        let g = lemma6_grad_f(&x, &p);
        let h = lemma6_hess_f(&x, &p);
        for k in 0..6 {
            let mut e = d.zeros();
            e[k] = t;
            let fd = (lemma6_f(&(&x + &e), &p) - lemma6_f(&(&x - &e), &p)) / (2.0 * t);
            assert!((fd - g[k]).abs() < 1e-6);
            let fd_col = (lemma6_grad_f(&(&x + &e), &p) - lemma6_grad_f(&(&x - &e), &p)) / (2.0 * t);
            assert!((fd_col - h.column(k)).norm() < 1e-6);
        }
    }
}

proptest! {
    #[test]
    fn lemma6_f_is_z3_invariant(seed in any::<u64>(), k in 1i64..3) {
        let p = PerturbationParams::new(vec![0.5, 2.0, -1.0], 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = dim(3).random_unit(&mut rng);
        let diff = lemma6_f(&cube_root_rotate(&u, k), &p) - lemma6_f(&u, &p);
        prop_assert!(diff.abs() < 1e-12);
    }
}

#[test]
fn characteristic_direction_examples() {
    assert_eq!(characteristic_direction(&dim(1).e_x(0)), dim(1).e_y(0));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let u = dim(3).random_unit(&mut rng);
        let xi = characteristic_direction(&u);
        assert!(xi.dot(&u).abs() < 1e-15);
        assert_abs_diff_eq!(xi.norm(), 1.0, epsilon = 1e-14);
    }
}

fn test_surfaces() -> Vec<SupportSurface> {
    vec![
        SupportSurface::sphere(dim(2), 1.3).unwrap(),
        SupportSurface::ellipsoid(vec![1.0, 1.4, 2.0, 0.7]).unwrap(),
        SupportSurface::perturbed_sphere(lemma_params()).unwrap(),
        SupportSurface::ellipsoid(vec![1.0, 1.5]).unwrap(),
        SupportSurface::perturbed_sphere(PerturbationParams::new(vec![1.0, 2.0, 3.0], 0.1).unwrap())
            .unwrap(),
    ]
}

#[test]
fn gradient_is_tangential_and_support_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for s in test_surfaces() {
        for _ in 0..100 {
            let u = s.dim().random_unit(&mut rng);
            assert!(s.gradient(&u).dot(&u).abs() < 1e-8);
            assert!(s.support(&u) > 0.0);
            assert_abs_diff_eq!(s.point(&u).dot(&u), s.support(&u), epsilon = 1e-12);
        }
    }
}

#[test]
fn support_property_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for s in test_surfaces() {
        let normals: Vec<_> = (0..200).map(|_| s.dim().random_unit(&mut rng)).collect();
        let points: Vec<_> = normals.iter().map(|u| s.point(u)).collect();
        for u in &normals {
            let h = s.support(u);
            for q in &points {
                assert!(q.dot(u) <= h + 1e-9);
            }
        }
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for s in test_surfaces() {
        let n = s.dim().ambient();
        for _ in 0..20 {
            let u = s.dim().random_unit(&mut rng);
            let jac = s.point_jacobian(&u);
            assert!((&jac - jac.transpose()).amax() < 1e-12);
            assert!((&jac * &u).norm() < 1e-12);
            let basis = tangent_basis(&u);
            for c in 0..n - 1 {
                let v: AmbientVector = basis.column(c).into_owned();
                let t = 1e-6;
                let plus = (&u + &v * t).normalize();
                let minus = (&u - &v * t).normalize();
                let fd = (s.point(&plus) - s.point(&minus)) / (2.0 * t);
                assert!((fd - &jac * &v).norm() < 1e-7, "{}", s.kind_name());
            }
        }
    }
}

#[test]
fn gauss_map_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for s in test_surfaces() {
        for _ in 0..50 {
            let u = s.dim().random_unit(&mut rng);
            let n = s.normal_from_differential(&u);
            assert!((n - &u).norm() < 1e-6, "{}", s.kind_name());
        }
    }
}

#[test]
fn ellipsoid_points_lie_on_quadric() {
    let b = vec![1.0, 1.4, 2.0, 0.7, 3.0, 1.1];
    let s = SupportSurface::ellipsoid(b.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..200 {
        let u = s.dim().random_unit(&mut rng);
        let q = s.point(&u);
        let level: f64 = q.iter().zip(&b).map(|(qk, bk)| (qk / bk).powi(2)).sum();
        assert_abs_diff_eq!(level, 1.0, epsilon = 1e-9);
    }
}

#[test]
fn constructors() {
    let s = SupportSurface::unit_sphere(dim(3));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = dim(3).random_unit(&mut rng);
    assert_eq!(s.support(&u), 1.0);
    let e = SupportSurface::ellipsoid(vec![1.0; 4]).unwrap();
    let u = dim(2).random_unit(&mut rng);
    assert!((e.point(&u) - &u).norm() < 1e-15);
    assert_abs_diff_eq!(e.diameter(), 2.0, epsilon = 1e-12);
    assert!(SupportSurface::perturbed_sphere(lemma_params()).is_ok());
    assert!(SupportSurface::ellipsoid(vec![1.0, -2.0]).is_err());
    assert!(SupportSurface::ellipsoid(vec![1.0, 2.0, 3.0]).is_err());
    assert!(SupportSurface::sphere(dim(1), 0.0).is_err());
}

#[test]
fn default_eps_policy() {
    assert_eq!(default_eps(&[1.0, 2.0]).unwrap(), 0.05);
    let tight = default_eps(&[1.0, 1.01]).unwrap();
    assert_abs_diff_eq!(tight, 0.5 * (0.01f64 * 0.01 / 2.0).sqrt(), epsilon = 1e-15);
    let p = PerturbationParams::with_default_eps(vec![1.0, 1.01]).unwrap();
    assert!(p.eps() * p.eps() < p.delta());
}

#[test]
fn non_convex_support_function_is_rejected() {
    // h = 1 + 0.3 cos(3 theta) has radius of curvature h + h'' = 1 - 2.4 cos(3 theta) < 0 somewhere
    let f = (dim(1), |u: &AmbientVector| {
        let theta = u[1].atan2(u[0]);
        1.0 + 0.3 * (3.0 * theta).cos()
    });
    match SupportSurface::custom(Arc::new(f), "wavy") {
        Err(Error::NotConvex { direction, min_radius }) => {
            assert_eq!(direction.len(), 2);
            assert!(min_radius < 0.0);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn finite_difference_surface_matches_analytic() {
    let b = vec![1.0, 1.5, 2.0, 0.8];
    let bb = b.clone();
    let f = (dim(2), move |u: &AmbientVector| {
        bb.iter().zip(u.iter()).map(|(b, x)| b * b * x * x).sum::<f64>().sqrt()
    });
    let custom = SupportSurface::custom(Arc::new(f), "ellipsoid-fd").unwrap();
    let exact = SupportSurface::ellipsoid(b).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let u = dim(2).random_unit(&mut rng);
        assert!(custom.gradient(&u).dot(&u).abs() < 1e-5);
        assert!((custom.point(&u) - exact.point(&u)).norm() < 1e-8);
        assert!((custom.point_jacobian(&u) - exact.point_jacobian(&u)).amax() < 1e-4);
    }
}

#[test]
fn translation_shifts_points() {
    let s = SupportSurface::ellipsoid(vec![1.0, 1.5]).unwrap();
    let t = DVector::from_vec(vec![0.2, -0.1]);
    let moved = s.translated(&t).unwrap();
    let u = DVector::from_vec(vec![0.6, 0.8]);
    assert!((moved.point(&u) - s.point(&u) - &t).norm() < 1e-15);
    assert_abs_diff_eq!(moved.support(&u), s.support(&u) + t.dot(&u), epsilon = 1e-15);
    let far = DVector::from_vec(vec![5.0, 0.0]);
    assert!(matches!(s.translated(&far), Err(Error::OriginNotInterior { .. })));
}
