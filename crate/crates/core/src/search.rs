//! Randomized search for parent POVMs with large compatibility radius.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{QubitEffect, QubitPovm, UnitVec3, Vec3};
use crate::error::{Error, Result};
use crate::geometry::tangent_basis;
use crate::radius::{compat_radius, radius_value};
use crate::weights::closest_weights;

/// Environment variable capping the number of search worker threads.
pub const THREADS_ENV: &str = "COMPAT_THREADS";

const MAX_ATTEMPTS: usize = 1000;
const INITIAL_SCALE: f64 = 0.2;
const SCALE_DECAY: f64 = 0.95;
const SCALE_FLOOR: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n: usize,
    pub planar: bool,
    pub samples: usize,
    pub refine_iters: usize,
    pub seed: u64,
    #[serde(default)]
    pub time_budget_ms: Option<u64>,
}

impl SearchConfig {
    pub fn new(n: usize, planar: bool) -> Self {
        SearchConfig {
            n,
            planar,
            samples: 1000,
            refine_iters: 100,
            seed: 0,
            time_budget_ms: None,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::OutOfRange {
                what: "outcome count",
                value: self.n as f64,
            });
        }
        if self.samples == 0 {
            return Err(Error::OutOfRange {
                what: "samples",
                value: 0.0,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub iteration: usize,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_povm: QubitPovm,
    pub best_radius: f64,
    /// Best radius so far after each completed sample.
    pub history: Vec<HistoryPoint>,
    pub seed: u64,
    pub completed_samples: usize,
    /// Set when the time budget stopped the search before every sample ran.
    pub budget_exhausted: bool,
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        let len = v.norm();
        if len > 1e-9 {
            return v * (1.0 / len);
        }
    }
}

fn random_directions(n: usize, planar: bool, rng: &mut ChaCha8Rng) -> Vec<UnitVec3> {
    if planar {
        return (0..n)
            .map(|_| UnitVec3::in_plane(rng.random::<f64>() * std::f64::consts::TAU))
            .collect();
    }
    if n == 3 {
        // Three directions balance only on a great circle; pick one at random.
        let (e1, e2) = tangent_basis(&random_unit(rng));
        return (0..3)
            .map(|_| {
                let t = rng.random::<f64>() * std::f64::consts::TAU;
                UnitVec3::normalize(e1 * t.cos() + e2 * t.sin()).expect("unit combination")
            })
            .collect();
    }
    (0..n)
        .map(|_| UnitVec3::normalize(random_unit(rng)).expect("unit sample"))
        .collect()
}

fn assemble(dirs: &[UnitVec3], weights: &[f64], planar: bool) -> Result<QubitPovm> {
    QubitPovm::new(
        dirs.iter()
            .zip(weights)
            .map(|(&d, &w)| QubitEffect::projective(w, d))
            .collect(),
        planar,
    )
}

/// Random rank-one POVM: uniform directions, flat-simplex weights repaired to
/// the closest valid ones. Draws again when the directions cannot balance.
pub fn sample_povm(n: usize, planar: bool, seed: u64) -> Result<QubitPovm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(n, planar, &mut rng)
}

fn sample_with(n: usize, planar: bool, rng: &mut ChaCha8Rng) -> Result<QubitPovm> {
    if n < 3 {
        return Err(Error::OutOfRange {
            what: "outcome count",
            value: n as f64,
        });
    }
    for _ in 0..MAX_ATTEMPTS {
        let dirs = random_directions(n, planar, rng);
        let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = raw.iter().sum();
        let target: Vec<f64> = raw.iter().map(|w| w / total).collect();
        if let Some(w) = closest_weights(&dirs, &target, planar) {
            if let Ok(p) = assemble(&dirs, &w, planar) {
                return Ok(p);
            }
        }
    }
    Err(Error::SamplingStuck {
        attempts: MAX_ATTEMPTS,
    })
}

/// Local search from `start`: each round perturbs every effect in turn
/// (direction by a Gaussian angle, weight by a log-normal factor), repairs
/// the weights, and keeps the change if the radius grows. The angle scale
/// decays after rounds without any accepted move.
fn refine(start: QubitPovm, rounds: usize, rng: &mut ChaCha8Rng) -> (QubitPovm, f64) {
    let planar = start.planar;
    let mut dirs: Vec<UnitVec3> = start.effects.iter().map(|e| e.n).collect();
    let mut weights: Vec<f64> = start.effects.iter().map(|e| e.alpha).collect();
    let mut best = start;
    let mut value = radius_value(&best);
    let mut scale = INITIAL_SCALE;
    for _ in 0..rounds {
        let mut accepted = false;
        for j in 0..dirs.len() {
            let mut trial_dirs = dirs.clone();
            let g1: f64 = StandardNormal.sample(rng);
            let g2: f64 = StandardNormal.sample(rng);
            let g3: f64 = StandardNormal.sample(rng);
            trial_dirs[j] = if planar {
                let theta = dirs[j].z.atan2(dirs[j].x) + scale * g1;
                UnitVec3::in_plane(theta)
            } else {
                let (e1, e2) = tangent_basis(&dirs[j]);
                UnitVec3::normalize(dirs[j].get() + (e1 * g1 + e2 * g2) * scale).expect("small step")
            };
            let mut target = weights.clone();
            target[j] *= (scale * g3).exp();
            let Some(w) = closest_weights(&trial_dirs, &target, planar) else {
                continue;
            };
            let Ok(p) = assemble(&trial_dirs, &w, planar) else {
                continue;
            };
            if p.len() != dirs.len() {
                // A weight collapsed to zero; keep the effect count fixed.
                continue;
            }
            let v = radius_value(&p);
            if v > value {
                value = v;
                dirs = trial_dirs;
                weights = w;
                best = p;
                accepted = true;
            }
        }
        if !accepted {
            scale = (scale * SCALE_DECAY).max(SCALE_FLOOR);
        }
    }
    (best, value)
}

fn worker_threads() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .map_or(available, |cap| cap.min(available))
}

/// Best radius over `samples` refined random POVMs. Sample `k` draws from a
/// generator seeded with `seed ^ k`, so results do not depend on the thread
/// count; ties go to the smallest index.
pub fn maximize_radius(cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.check()?;
    let start = Instant::now();
    let deadline = cfg.time_budget_ms.map(Duration::from_millis);
    let run = |k: usize| -> Result<Option<(QubitPovm, f64)>> {
        if deadline.is_some_and(|d| start.elapsed() >= d) {
            return Ok(None);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ k as u64);
        let p = sample_with(cfg.n, cfg.planar, &mut rng)?;
        Ok(Some(refine(p, cfg.refine_iters, &mut rng)))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads())
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let outcomes: Vec<Option<(QubitPovm, f64)>> =
        pool.install(|| (0..cfg.samples).into_par_iter().map(run).collect::<Result<_>>())?;

    let mut best: Option<(QubitPovm, f64)> = None;
    let mut history = Vec::new();
    let mut completed = 0;
    for (k, outcome) in outcomes.into_iter().enumerate() {
        let Some((p, v)) = outcome else { continue };
        completed += 1;
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((p, v));
        }
        history.push(HistoryPoint {
            iteration: k,
            radius: best.as_ref().map_or(v, |b| b.1),
        });
    }
    let (best_povm, _) = best.ok_or_else(|| {
        Error::Infeasible("time budget expired before the first sample finished".into())
    })?;
    let best_radius = compat_radius(&best_povm)?.value;
    Ok(SearchResult {
        best_povm,
        best_radius,
        history,
        seed: cfg.seed,
        completed_samples: completed,
        budget_exhausted: completed < cfg.samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_examples() {
        for seed in 0..20 {
            let p = sample_povm(3, true, seed).unwrap();
            assert!(p.planar && p.validate(1e-9).valid);
            assert!(compat_radius(&p).unwrap().value <= 0.5 + 1e-9);
            let p = sample_povm(4, false, seed).unwrap();
            assert!(compat_radius(&p).unwrap().value <= 1.0 / 3.0 + 1e-9);
            let p = sample_povm(3, false, seed).unwrap();
            assert!(compat_radius(&p).unwrap().value.abs() < 1e-9);
        }
        assert!(sample_povm(2, true, 0).is_err());
    }

    #[test]
    fn search_is_deterministic_and_monotone() {
        let cfg = SearchConfig {
            samples: 12,
            refine_iters: 10,
            seed: 5,
            ..SearchConfig::new(5, true)
        };
        let a = maximize_radius(&cfg).unwrap();
        let b = maximize_radius(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.history.len(), 12);
        assert!(a.history.windows(2).all(|w| w[0].radius <= w[1].radius));
        assert!((a.best_radius - a.history.last().unwrap().radius).abs() < 1e-12);
        assert!(a.best_radius <= 1.0 / 5.0 / (std::f64::consts::PI / 10.0).tan() + 1e-9);
        assert!(!a.budget_exhausted);
    }

    #[test]
    fn refinement_improves_on_sampling() {
        let cfg = SearchConfig {
            samples: 4,
            refine_iters: 0,
            seed: 1,
            ..SearchConfig::new(4, true)
        };
        let raw = maximize_radius(&cfg).unwrap().best_radius;
        let refined = maximize_radius(&SearchConfig {
            refine_iters: 60,
            ..cfg
        })
        .unwrap()
        .best_radius;
        assert!(refined >= raw);
        assert!(refined > 0.45, "{refined}");
    }

    #[test]
    fn zero_budget_stops_early() {
        let cfg = SearchConfig {
            samples: 50,
            time_budget_ms: Some(0),
            ..SearchConfig::new(4, false)
        };
        assert!(maximize_radius(&cfg).is_err());
    }
}
