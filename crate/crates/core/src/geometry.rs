//! Hyperplane objective of the compatible region, its candidate facet normals,
//! and a grid-sampled oracle for the same infimum.
//!
//! Each effect contributes the generator `(1, eta_i n_i)` of a zonotope in
//! four dimensions. A hyperplane `(c0, c)` with `|c| = 1` bounds the region of
//! unbiased simulable measurements at distance
//! `sum_i alpha_i |c0 + eta_i c.n_i|` from the origin, and the smallest such
//! distance is attained on facet normals, which are orthogonal to three
//! generators (two in the x-z plane).

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bloch::{QubitPovm, UnitVec3, Vec3};
use crate::error::{Error, Result};

/// Cross products shorter than this span no facet.
pub const DEGENERATE_TOL: f64 = 1e-10;
/// Generators closer than this are treated as one direction.
const SAME_DIRECTION_TOL: f64 = 1e-12;
const DEDUP_QUANTUM: f64 = 1e-9;

/// `sum_i alpha_i |c0 + eta_i c.n_i|`.
pub fn objective(povm: &QubitPovm, c0: f64, c: &UnitVec3) -> f64 {
    povm.effects
        .iter()
        .map(|e| e.alpha * (c0 + e.eta * c.dot(&e.n)).abs())
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    Triple([usize; 3]),
    Pair([usize; 2]),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneCandidate {
    pub c0: f64,
    pub c: UnitVec3,
    pub source: CandidateSource,
}

/// Distinct generator directions `eta_i n_i`, keyed by the first effect index
/// carrying each one.
pub(crate) fn distinct_generators(povm: &QubitPovm) -> Vec<(usize, Vec3)> {
    let mut out: Vec<(usize, Vec3)> = Vec::with_capacity(povm.len());
    for (i, e) in povm.effects.iter().enumerate() {
        let v = e.bloch();
        if out.iter().all(|(_, w)| (*w - v).norm_inf() > SAME_DIRECTION_TOL) {
            out.push((i, v));
        }
    }
    out
}

/// Calls `f(c0, c, source)` for both orientations of every non-degenerate
/// triple of generators.
pub(crate) fn visit_general(gens: &[(usize, Vec3)], mut f: impl FnMut(f64, Vec3, [usize; 3])) {
    let k = gens.len();
    for a in 0..k {
        for b in a + 1..k {
            let dab = gens[a].1 - gens[b].1;
            for c in b + 1..k {
                let normal = dab.cross(&(gens[a].1 - gens[c].1));
                let len = normal.norm();
                if len < DEGENERATE_TOL {
                    continue;
                }
                let unit = normal * (1.0 / len);
                let c0 = -unit.dot(&gens[a].1);
                let src = [gens[a].0, gens[b].0, gens[c].0];
                f(c0, unit, src);
                f(-c0, -unit, src);
            }
        }
    }
}

/// Planar analogue of [`visit_general`]: `(c0, c) ∝ (1, v_a) x (1, v_b)` in
/// the embedding `(1, v_x, v_z)`.
pub(crate) fn visit_planar(gens: &[(usize, Vec3)], mut f: impl FnMut(f64, Vec3, [usize; 2])) {
    let k = gens.len();
    for a in 0..k {
        let va = gens[a].1;
        for b in a + 1..k {
            let vb = gens[b].1;
            let c0 = va.x * vb.z - va.z * vb.x;
            let cx = va.z - vb.z;
            let cz = vb.x - va.x;
            let len = (cx * cx + cz * cz).sqrt();
            if len < DEGENERATE_TOL {
                continue;
            }
            let (c0, c) = (c0 / len, Vec3::new(cx / len, 0.0, cz / len));
            let src = [gens[a].0, gens[b].0];
            f(c0, c, src);
            f(-c0, -c, src);
        }
    }
}

fn quantize(c0: f64, c: &Vec3) -> [i64; 4] {
    let q = |v: f64| (v / DEDUP_QUANTUM).round() as i64;
    [q(c0), q(c.x), q(c.y), q(c.z)]
}

/// Candidate facet normals from every triple of distinct generators, with
/// coincident hyperplanes removed.
pub fn facet_candidates(povm: &QubitPovm) -> Result<Vec<HyperplaneCandidate>> {
    let gens = distinct_generators(povm);
    if gens.len() < 3 {
        return Err(Error::TooFewEffects {
            needed: 3,
            found: gens.len(),
        });
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    visit_general(&gens, |c0, c, src| {
        if seen.insert(quantize(c0, &c)) {
            out.push(HyperplaneCandidate {
                c0,
                c: UnitVec3::normalize(c).expect("non-degenerate normal"),
                source: CandidateSource::Triple(src),
            });
        }
    });
    Ok(out)
}

/// Candidate edge normals of the planar region, one line per generator pair.
pub fn facet_candidates_planar(povm: &QubitPovm) -> Result<Vec<HyperplaneCandidate>> {
    if !povm.planar {
        return Err(Error::NotPlanar);
    }
    let gens = distinct_generators(povm);
    if gens.len() < 2 {
        return Err(Error::TooFewEffects {
            needed: 2,
            found: gens.len(),
        });
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    visit_planar(&gens, |c0, c, src| {
        if seen.insert(quantize(c0, &c)) {
            out.push(HyperplaneCandidate {
                c0,
                c: UnitVec3::normalize(c).expect("non-degenerate normal"),
                source: CandidateSource::Pair(src),
            });
        }
    });
    Ok(out)
}

/// Grid resolution of [`sampled_min`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Directions on the sphere (or circle when planar).
    pub grid_points: usize,
    /// Uniform `c0` samples on `[-1, 1]`.
    pub c0_steps: usize,
    /// Rotates the lattice; `0` keeps the canonical orientation.
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            grid_points: 20_000,
            c0_steps: 41,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn with_grid(grid_points: usize) -> Self {
        OracleConfig {
            grid_points,
            ..OracleConfig::default()
        }
    }
}

const REFINE_SEEDS: usize = 16;

/// Minimizes the objective by brute force: a Fibonacci lattice of directions
/// (uniform angles when planar) times a uniform `c0` grid, then a pattern
/// search from the best grid points. Independent of facet enumeration.
pub fn sampled_min(povm: &QubitPovm, cfg: &OracleConfig) -> Result<f64> {
    if cfg.grid_points < 100 {
        return Err(Error::OutOfRange {
            what: "oracle grid_points",
            value: cfg.grid_points as f64,
        });
    }
    if cfg.c0_steps < 2 {
        return Err(Error::OutOfRange {
            what: "oracle c0_steps",
            value: cfg.c0_steps as f64,
        });
    }
    let alphas: Vec<f64> = povm.effects.iter().map(|e| e.alpha).collect();
    let gens: Vec<Vec3> = povm.effects.iter().map(|e| e.bloch()).collect();
    let c0_grid: Vec<f64> = (0..cfg.c0_steps)
        .map(|k| -1.0 + 2.0 * k as f64 / (cfg.c0_steps - 1) as f64)
        .collect();
    let mut dots = vec![0.0; gens.len()];

    let grid_value = |dir: &Vec3, dots: &mut [f64]| -> f64 {
        for (d, g) in dots.iter_mut().zip(&gens) {
            *d = dir.dot(g);
        }
        c0_grid
            .iter()
            .map(|&c0| {
                alphas
                    .iter()
                    .zip(dots.iter())
                    .map(|(a, s)| a * (c0 + s).abs())
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    };

    let mut seeds: Vec<(f64, Vec3)> = Vec::with_capacity(REFINE_SEEDS + 1);
    let mut push_seed = |value: f64, dir: Vec3| {
        if seeds.len() < REFINE_SEEDS || value < seeds[seeds.len() - 1].0 {
            let pos = seeds.partition_point(|s| s.0 <= value);
            seeds.insert(pos, (value, dir));
            seeds.truncate(REFINE_SEEDS);
        }
    };

    // Seeds are ranked by the exact minimum over c0 at each lattice
    // direction; the optimal c0 often falls between grid values.
    let inner = |dir: &Vec3| exact_inner_min(&alphas, &gens, dir);
    let mut grid_best = f64::INFINITY;

    if povm.planar {
        let offset = if cfg.seed == 0 {
            0.0
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let u: f64 = rand::Rng::random(&mut rng);
            u * std::f64::consts::TAU / cfg.grid_points as f64
        };
        for k in 0..cfg.grid_points {
            let phi = offset + std::f64::consts::TAU * k as f64 / cfg.grid_points as f64;
            let dir = Vec3::new(phi.cos(), 0.0, phi.sin());
            let v = grid_value(&dir, &mut dots);
            grid_best = grid_best.min(v);
            push_seed(inner(&dir), dir);
        }
        let step0 = 2.0 * std::f64::consts::TAU / cfg.grid_points as f64;
        let mut best = grid_best.min(seeds[0].0);
        for &(_, dir) in &seeds {
            let phi0 = dir.z.atan2(dir.x);
            let f = |phi: f64| inner(&Vec3::new(phi.cos(), 0.0, phi.sin()));
            best = best.min(pattern_search_1d(f, phi0, step0));
        }
        return Ok(best);
    }

    let rotation = random_rotation(cfg.seed);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let n = cfg.grid_points;
    for k in 0..n {
        let z = 1.0 - (2 * k + 1) as f64 / n as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden * k as f64;
        let dir = Vec3::new(r * phi.cos(), r * phi.sin(), z).transform(&rotation);
        let v = grid_value(&dir, &mut dots);
        grid_best = grid_best.min(v);
        push_seed(inner(&dir), dir);
    }
    let step0 = 2.0 * (4.0 * std::f64::consts::PI / n as f64).sqrt();
    let mut best = grid_best.min(seeds[0].0);
    for &(_, dir) in &seeds {
        best = best.min(pattern_search_sphere(&inner, dir, step0));
    }
    Ok(best)
}

/// `min_{c0 in [-1,1]} sum_i alpha_i |c0 + g_i.dir|`, attained at a weighted median.
fn exact_inner_min(alphas: &[f64], gens: &[Vec3], dir: &Vec3) -> f64 {
    let mut pts: Vec<(f64, f64)> = alphas
        .iter()
        .zip(gens)
        .map(|(&a, g)| (-dir.dot(g), a))
        .collect();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let total: f64 = alphas.iter().sum();
    let mut acc = 0.0;
    let mut c0 = pts.last().map_or(0.0, |p| p.0);
    for &(x, a) in &pts {
        acc += a;
        if acc >= 0.5 * total {
            c0 = x;
            break;
        }
    }
    let c0 = c0.clamp(-1.0, 1.0);
    pts.iter().map(|&(x, a)| a * (c0 - x).abs()).sum()
}

fn pattern_search_1d(f: impl Fn(f64) -> f64, x0: f64, step0: f64) -> f64 {
    let (mut x, mut fx, mut step) = (x0, f(x0), step0);
    while step > 1e-11 {
        let (fl, fr) = (f(x - step), f(x + step));
        if fl < fx && fl <= fr {
            x -= step;
            fx = fl;
        } else if fr < fx {
            x += step;
            fx = fr;
        } else {
            step *= 0.5;
        }
    }
    fx
}

/// Compass search on the unit sphere with a direction set that rotates every
/// iteration, so kinks of the piecewise-linear objective cannot pin it.
fn pattern_search_sphere(f: &impl Fn(&Vec3) -> f64, start: Vec3, step0: f64) -> f64 {
    const DIRS: usize = 8;
    // Rotated direction sets tried before the step shrinks.
    const PATIENCE: usize = 6;
    let mut misses = 0;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut c = start;
    let mut fc = f(&c);
    let mut step = step0;
    let mut phase = 0.0;
    let mut iters = 0;
    while step > 1e-10 && iters < 50_000 {
        iters += 1;
        let (e1, e2) = tangent_basis(&c);
        let mut best: Option<(f64, Vec3)> = None;
        for j in 0..DIRS {
            let t = phase + std::f64::consts::TAU * j as f64 / DIRS as f64;
            let trial = c + (e1 * t.cos() + e2 * t.sin()) * step;
            let trial = trial * (1.0 / trial.norm());
            let ft = f(&trial);
            if ft < fc && best.is_none_or(|b| ft < b.0) {
                best = Some((ft, trial));
            }
        }
        phase += golden;
        match best {
            Some((ft, trial)) => {
                fc = ft;
                c = trial;
                misses = 0;
            }
            None => {
                misses += 1;
                if misses == PATIENCE {
                    step *= 0.5;
                    misses = 0;
                }
            }
        }
    }
    fc
}

pub(crate) fn tangent_basis(c: &Vec3) -> (Vec3, Vec3) {
    let helper = if c.x.abs() < 0.9 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    let e1 = helper.cross(c);
    let e1 = e1 * (1.0 / e1.norm());
    let e2 = c.cross(&e1);
    (e1, e2)
}

/// Haar-random rotation from a seed; seed `0` is the identity.
fn random_rotation(seed: u64) -> [[f64; 3]; 3] {
    if seed == 0 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: [f64; 4] = [0.0; 4];
    for v in q.iter_mut() {
        *v = StandardNormal.sample(&mut rng);
    }
    let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / norm);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}
