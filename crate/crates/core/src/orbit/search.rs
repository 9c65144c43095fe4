use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dual_map::{dual_map, Direction};
use crate::error::Result;
use crate::surface::SupportSurface;
use crate::symplectic::{cube_root_rotate, AmbientVector, SQRT_3};

use super::dihedral::{canonicalize_mod_dihedral, dihedral_distance};
use super::functional::functional_f_gradient;
use super::newton::{newton_polish, PolishOptions, PolishOutcome, Rejection};
use super::{OrbitSolution, TangencyTuple};

pub const DEFAULT_STARTS: usize = 2000;
pub const DEFAULT_SEED: u64 = 0x5eed_0d0b;
pub const DEFAULT_DEDUP_TOLERANCE: f64 = 1e-6;
/// Non-isolated solutions whose `|F|` agree to this fraction of `diam^2`
/// are taken to lie on the same family.
const FAMILY_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub n_starts: usize,
    pub rng_seed: u64,
    pub period: usize,
    pub dedup_tolerance: f64,
    pub polish: PolishOptions,
    /// Polished before the random seeds, in order.
    pub extra_seeds: Vec<TangencyTuple>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            n_starts: DEFAULT_STARTS,
            rng_seed: DEFAULT_SEED,
            period: 3,
            dedup_tolerance: DEFAULT_DEDUP_TOLERANCE,
            polish: PolishOptions::default(),
            extra_seeds: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub attempted: usize,
    pub converged: usize,
    pub failed: usize,
    pub rejected_backtracking: usize,
    pub rejected_zero_area: usize,
    pub rejected_duplicates: usize,
    pub non_isolated: usize,
}

/// A continuum of non-isolated solutions, reported once.
#[derive(Debug, Clone)]
pub struct OrbitFamily {
    pub representative: OrbitSolution,
    /// Number of polished seeds that landed on this family.
    pub hits: usize,
}

#[derive(Debug, Clone)]
pub struct OrbitSet {
    /// Isolated orbits, canonical and pairwise distinct modulo the dihedral
    /// group, in order of discovery.
    pub orbits: Vec<OrbitSolution>,
    pub families: Vec<OrbitFamily>,
    pub dedup_tolerance: f64,
    pub stats: SearchStats,
}

impl OrbitSet {
    fn new(dedup_tolerance: f64) -> Self {
        Self {
            orbits: Vec::new(),
            families: Vec::new(),
            dedup_tolerance,
            stats: SearchStats::default(),
        }
    }

    /// Number of distinct isolated orbits; families are not counted.
    pub fn count(&self) -> usize {
        self.orbits.len()
    }

    pub fn has_families(&self) -> bool {
        !self.families.is_empty()
    }

    /// Index of the stored orbit within the dedup tolerance of `orbit`.
    pub fn find(&self, orbit: &OrbitSolution) -> Option<usize> {
        self.orbits
            .iter()
            .position(|o| dihedral_distance(o, orbit) <= self.dedup_tolerance)
    }

    fn merge(&mut self, outcome: PolishOutcome, diam: f64) {
        self.stats.attempted += 1;
        let sol = match outcome {
            PolishOutcome::Converged(sol) => *sol,
            PolishOutcome::Failed { .. } => {
                self.stats.failed += 1;
                return;
            }
            PolishOutcome::Rejected { reason, .. } => {
                match reason {
                    Rejection::ZeroArea => self.stats.rejected_zero_area += 1,
                    _ => self.stats.rejected_backtracking += 1,
                }
                return;
            }
        };
        self.stats.converged += 1;
        let sol = canonicalize_mod_dihedral(&sol);
        if !sol.is_isolated {
            self.stats.non_isolated += 1;
            let tol = FAMILY_TOL * diam * diam;
            match self.families.iter_mut().find(|f| {
                (f.representative.area_value.abs() - sol.area_value.abs()).abs() <= tol
            }) {
                Some(family) => family.hits += 1,
                None => self.families.push(OrbitFamily {
                    representative: sol,
                    hits: 1,
                }),
            }
            return;
        }
        if self.find(&sol).is_some() {
            self.stats.rejected_duplicates += 1;
        } else {
            self.orbits.push(sol);
        }
    }
}

/// `(u, lambda u, lambda^2 u)` with every multiplier `sqrt(3)` times the
/// mean support value about the surface center, which is exact for round
/// spheres of any radius and position.
pub fn sphere_ansatz_seed(s: &SupportSurface, u: &AmbientVector) -> Result<TangencyTuple> {
    let normals: Vec<_> = (0..3).map(|k| cube_root_rotate(u, k)).collect();
    let c = s.center();
    let mean = normals
        .iter()
        .map(|v| s.support(v) - c.dot(v))
        .sum::<f64>()
        / 3.0;
    TangencyTuple::from_directions(normals, vec![SQRT_3 * mean; 3])
}

fn random_seed<R: Rng + ?Sized>(s: &SupportSurface, n: usize, rng: &mut R) -> Result<TangencyTuple> {
    let u = s.dim().random_unit(rng);
    if n == 3 {
        return sphere_ansatz_seed(s, &u);
    }
    let winding = rng.random_range(1..=n / 2);
    let c = s.center();
    let radius = s.support(&u) - c.dot(&u);
    TangencyTuple::regular(&u, n, winding, radius)
}

/// Multistart search with default options.
pub fn multistart_search(s: &SupportSurface, n_starts: usize, rng_seed: u64) -> Result<OrbitSet> {
    multistart_search_with(
        s,
        &SearchOptions {
            n_starts,
            rng_seed,
            ..SearchOptions::default()
        },
    )
}

/// Seeds are generated up front from `rng_seed`, polished in parallel, and
/// merged in seed order, so the result does not depend on the thread count.
pub fn multistart_search_with(s: &SupportSurface, opts: &SearchOptions) -> Result<OrbitSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    let mut seeds = opts.extra_seeds.clone();
    for _ in 0..opts.n_starts {
        seeds.push(random_seed(s, opts.period, &mut rng)?);
    }
    let outcomes: Vec<PolishOutcome> = seeds
        .par_iter()
        .map(|seed| newton_polish(s, seed, &opts.polish))
        .collect();
    let mut set = OrbitSet::new(opts.dedup_tolerance);
    let diam = s.diameter();
    for outcome in outcomes {
        set.merge(outcome, diam);
    }
    Ok(set)
}

/// Norm of the tangential gradient of `F` at the orbit's normals.
pub fn criticality_check(s: &SupportSurface, orbit: &OrbitSolution) -> f64 {
    functional_f_gradient(s, &orbit.tuple)
        .iter()
        .map(|g| g.norm_squared())
        .sum::<f64>()
        .sqrt()
}

/// `max_i |T(z_i) - z_{i+1}|`, with `T` the forward map when the multipliers
/// are positive and the backward map otherwise.
pub fn round_trip_defect(s: &SupportSurface, orbit: &OrbitSolution) -> Result<f64> {
    let n = orbit.period();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let direction = if orbit.tuple.multipliers()[i] > 0.0 {
            Direction::Forward
        } else {
            Direction::Backward
        };
        let image = dual_map(s, &orbit.vertices[i], direction)?.image;
        worst = worst.max((image - &orbit.vertices[(i + 1) % n]).norm());
    }
    Ok(worst)
}
