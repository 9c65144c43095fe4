use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::surface::SupportSurface;
use crate::symplectic::normalized;

use super::closure::{closure_residual, closure_system, ClosureForm};
use super::{OrbitSolution, TangencyTuple};

#[derive(Debug, Clone, Copy)]
pub struct PolishOptions {
    /// Convergence threshold on the closure residual norm.
    pub tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Smallest Jacobian singular value for an orbit to count as isolated.
    pub isolation_threshold: f64,
    /// Consecutive tangency points closer than this are a backtracking orbit.
    pub backtrack_tol: f64,
    /// Orbits with `|F| <= zero_area_factor * diameter^2` are rejected.
    pub zero_area_factor: f64,
}

impl Default for PolishOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 50,
            max_halvings: 20,
            isolation_threshold: 1e-8,
            backtrack_tol: 1e-6,
            zero_area_factor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rejection {
    /// Two consecutive tangency points coincide.
    Backtracking,
    /// Multipliers of both signs or a vanishing multiplier; for a strictly
    /// convex surface this only happens on backtracking solutions.
    MixedOrientation,
    /// The inscribed polygon has (numerically) zero symplectic area.
    ZeroArea,
}

impl Rejection {
    pub fn is_fake(self) -> bool {
        matches!(self, Rejection::Backtracking | Rejection::MixedOrientation)
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Backtracking => f.write_str("fake orbit (backtracking)"),
            Rejection::MixedOrientation => f.write_str("fake orbit (mixed orientation)"),
            Rejection::ZeroArea => f.write_str("zero symplectic area"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum PolishOutcome {
    Converged(Box<OrbitSolution>),
    Rejected {
        reason: Rejection,
        tuple: TangencyTuple,
        residual: f64,
    },
    Failed {
        best_residual: f64,
        iterations: usize,
    },
}

impl PolishOutcome {
    pub fn solution(&self) -> Option<&OrbitSolution> {
        match self {
            PolishOutcome::Converged(sol) => Some(sol),
            _ => None,
        }
    }

    pub fn into_solution(self) -> Option<OrbitSolution> {
        match self {
            PolishOutcome::Converged(sol) => Some(*sol),
            _ => None,
        }
    }
}

fn screen(s: &SupportSurface, tuple: &TangencyTuple, opts: &PolishOptions) -> Option<Rejection> {
    let q = tuple.tangency_points(s);
    let n = q.len();
    if (0..n).any(|i| (&q[i] - &q[(i + 1) % n]).norm() <= opts.backtrack_tol) {
        return Some(Rejection::Backtracking);
    }
    let a = tuple.multipliers();
    let scale = s.diameter() * 1e-9;
    let positive = a.iter().all(|&x| x > scale);
    let negative = a.iter().all(|&x| x < -scale);
    if !(positive || negative) {
        return Some(Rejection::MixedOrientation);
    }
    None
}

fn step_tuple(tuple: &TangencyTuple, delta: &DVector<f64>, t: f64) -> TangencyTuple {
    let n = tuple.period();
    let d = tuple.normals()[0].len();
    let normals = tuple
        .normals()
        .iter()
        .enumerate()
        .map(|(i, u)| normalized(&(u + delta.rows(i * d, d) * t)))
        .collect();
    let multipliers = tuple
        .multipliers()
        .iter()
        .enumerate()
        .map(|(i, a)| a + t * delta[n * d + i])
        .collect();
    TangencyTuple::new(normals, multipliers).expect("normalized unit normals")
}

fn solve_least_squares(jac: DMatrix<f64>, rhs: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let svd = jac.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let step = svd.solve(rhs, 1e-12 * smax.max(1e-300)).ok()?;
    step.iter().all(|v| v.is_finite()).then_some((step, smin))
}

/// Damped Newton on the bordered closure system with a normalization
/// retraction per normal. Steps are least-squares (pseudo-inverse) so that
/// degenerate families still converge.
pub fn newton_polish(s: &SupportSurface, seed: &TangencyTuple, opts: &PolishOptions) -> PolishOutcome {
    let n = seed.period();
    if let Some(reason @ Rejection::Backtracking) = screen(s, seed, opts) {
        return PolishOutcome::Rejected {
            reason,
            tuple: seed.clone(),
            residual: closure_residual(s, seed).norm(),
        };
    }
    let form = ClosureForm::for_period(n);
    let mut tuple = seed.clone();
    let mut merit = closure_residual(s, &tuple).norm();
    let mut iterations = 0;
    let mut polished = false;
    loop {
        let converged = merit < opts.tol;
        if converged && (polished || merit == 0.0) {
            break;
        }
        if iterations >= opts.max_iterations {
            if converged {
                break;
            }
            return PolishOutcome::Failed {
                best_residual: merit,
                iterations,
            };
        }
        iterations += 1;
        let (res, jac) = closure_system(s, &tuple, form);
        let Some((delta, _)) = solve_least_squares(jac, &(-res)) else {
            return PolishOutcome::Failed {
                best_residual: merit,
                iterations,
            };
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let cand = step_tuple(&tuple, &delta, t);
            let r = closure_residual(s, &cand).norm();
            if r < merit {
                tuple = cand;
                merit = r;
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
            return PolishOutcome::Failed {
                best_residual: merit,
                iterations,
            };
        }
    }

    if let Some(reason) = screen(s, &tuple, opts) {
        return PolishOutcome::Rejected {
            reason,
            tuple,
            residual: merit,
        };
    }
    let mut sol = OrbitSolution::from_tuple(s, tuple, merit);
    let diam = s.diameter();
    if sol.area_value.abs() <= opts.zero_area_factor * diam * diam {
        return PolishOutcome::Rejected {
            reason: Rejection::ZeroArea,
            tuple: sol.tuple,
            residual: merit,
        };
    }
    let (_, jac) = closure_system(s, &sol.tuple, form);
    let smin = jac.singular_values().min();
    sol.min_singular_value = smin;
    sol.is_isolated = smin > opts.isolation_threshold;
    sol.iterations = iterations;
    PolishOutcome::Converged(Box::new(sol))
}
