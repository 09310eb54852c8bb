//! Named parent POVM families: regular polygons in the x-z plane, the five
//! Platonic solids, and minimal-energy (Thomson) point sets.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bloch::{QubitEffect, QubitPovm, UnitVec3, Vec3};
use crate::error::{Error, Result};
use crate::weights::closest_weights;

/// Equal-weight projective POVM on `n` directions at angles `2 pi i / n`,
/// `i = 1..=n`, in the x-z plane.
pub fn rotsym_planar(n: usize) -> Result<QubitPovm> {
    if n < 2 {
        return Err(Error::OutOfRange {
            what: "polygon size",
            value: n as f64,
        });
    }
    let dirs: Vec<UnitVec3> = (1..=n)
        .map(|i| UnitVec3::in_plane(2.0 * PI * i as f64 / n as f64))
        .collect();
    QubitPovm::uniform(&dirs, true)
}

/// Radius of [`rotsym_planar`]: `cot(pi/2n) cos(pi/2n) / n` for odd `n`,
/// `2 cot(pi/n) / n` for even `n`.
pub fn rotsym_planar_radius_closed_form(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::OutOfRange {
            what: "polygon size",
            value: n as f64,
        });
    }
    let nf = n as f64;
    Ok(if n % 2 == 1 {
        let a = PI / (2.0 * nf);
        a.cos() * a.cos() / (a.sin() * nf)
    } else {
        2.0 / (nf * (PI / nf).tan())
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlatonicKind {
    Tetrahedron,
    Octahedron,
    Cube,
    Icosahedron,
    Dodecahedron,
}

impl PlatonicKind {
    pub const ALL: [PlatonicKind; 5] = [
        PlatonicKind::Tetrahedron,
        PlatonicKind::Octahedron,
        PlatonicKind::Cube,
        PlatonicKind::Icosahedron,
        PlatonicKind::Dodecahedron,
    ];

    pub fn outcomes(self) -> usize {
        match self {
            PlatonicKind::Tetrahedron => 4,
            PlatonicKind::Octahedron => 6,
            PlatonicKind::Cube => 8,
            PlatonicKind::Icosahedron => 12,
            PlatonicKind::Dodecahedron => 20,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PlatonicKind::Tetrahedron => "tetrahedron",
            PlatonicKind::Octahedron => "octahedron",
            PlatonicKind::Cube => "cube",
            PlatonicKind::Icosahedron => "icosahedron",
            PlatonicKind::Dodecahedron => "dodecahedron",
        }
    }

    /// Closed-form compatibility radius of the vertex POVM.
    pub fn radius_closed_form(self) -> f64 {
        let phi = golden_ratio();
        match self {
            PlatonicKind::Tetrahedron | PlatonicKind::Octahedron => 1.0 / 3.0,
            PlatonicKind::Cube => 6f64.sqrt() / 6.0,
            PlatonicKind::Icosahedron => {
                phi.powi(3) * (1.0 + (1.0 - phi).powi(2)).sqrt() / (3.0 * (1.0 + phi * phi))
            }
            PlatonicKind::Dodecahedron => (5.0f64 / 6.0).sqrt() * phi * phi / 5.0,
        }
    }
}

impl std::str::FromStr for PlatonicKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PlatonicKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Unsupported(format!("unknown solid {s:?}")))
    }
}

fn golden_ratio() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

fn signs() -> impl Iterator<Item = (f64, f64)> {
    [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].into_iter()
}

/// The three cyclic placements of `(0, ±a, ±b)`, scaled to unit length.
fn cyclic_rectangles(a: f64, b: f64) -> Vec<Vec3> {
    let s = 1.0 / (a * a + b * b).sqrt();
    let mut out = Vec::with_capacity(12);
    for (p, q) in signs() {
        out.push(Vec3::new(0.0, p * a * s, q * b * s));
    }
    for (p, q) in signs() {
        out.push(Vec3::new(p * b * s, 0.0, q * a * s));
    }
    for (p, q) in signs() {
        out.push(Vec3::new(p * a * s, q * b * s, 0.0));
    }
    out
}

fn cube_vertices() -> Vec<Vec3> {
    let s = 1.0 / 3f64.sqrt();
    let mut out = Vec::with_capacity(8);
    for x in [1.0, -1.0] {
        for y in [1.0, -1.0] {
            for z in [1.0, -1.0] {
                out.push(Vec3::new(x * s, y * s, z * s));
            }
        }
    }
    out
}

/// Equal-weight projective POVM on the vertices of a Platonic solid.
pub fn platonic(kind: PlatonicKind) -> QubitPovm {
    let phi = golden_ratio();
    let vertices: Vec<Vec3> = match kind {
        PlatonicKind::Tetrahedron => cube_vertices()
            .into_iter()
            .filter(|v| v.x * v.y * v.z > 0.0)
            .collect(),
        PlatonicKind::Octahedron => vec![
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 0.0, -1.0),
        ],
        PlatonicKind::Cube => cube_vertices(),
        PlatonicKind::Icosahedron => cyclic_rectangles(1.0, phi),
        PlatonicKind::Dodecahedron => {
            let mut v = cube_vertices();
            v.extend(cyclic_rectangles(1.0, phi * phi));
            v
        }
    };
    let dirs: Vec<UnitVec3> = vertices
        .into_iter()
        .map(|v| UnitVec3::new(v).expect("vertex on the unit sphere"))
        .collect();
    QubitPovm::uniform(&dirs, false).expect("Platonic vertices are balanced")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThomsonConfig {
    pub n: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
}

impl ThomsonConfig {
    pub fn new(n: usize) -> Self {
        ThomsonConfig {
            n,
            restarts: 50,
            seed: 0,
            max_iters: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThomsonOutcome {
    pub povm: QubitPovm,
    /// Coulomb energy `sum_{i<j} 1/|p_i - p_j|` of the directions.
    pub energy: f64,
    /// Whether the equal-weight POVM was already balanced (centroid within 1e-6).
    pub uniform_weights: bool,
    /// Norm of the equal-weight centroid `sum_i n_i / n`.
    pub centroid_norm: f64,
}

const UNIFORM_CENTROID_TOL: f64 = 1e-6;
const GRADIENT_TOL: f64 = 1e-10;

fn coulomb_energy(p: &[Vec3]) -> f64 {
    let mut e = 0.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            e += 1.0 / (p[i] - p[j]).norm();
        }
    }
    e
}

/// Tangential part of the energy gradient at each point.
fn tangent_gradient(p: &[Vec3], out: &mut [Vec3]) -> f64 {
    for g in out.iter_mut() {
        *g = Vec3::ZERO;
    }
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let d = p[i] - p[j];
            let r = d.norm();
            let f = d * (1.0 / (r * r * r));
            out[i] = out[i] - f;
            out[j] += f;
        }
    }
    let mut norm2 = 0.0;
    for (g, x) in out.iter_mut().zip(p) {
        *g = *g - *x * g.dot(x);
        norm2 += g.dot(g);
    }
    norm2.sqrt()
}

/// Projected gradient descent with step halving from one starting point.
fn descend(mut p: Vec<Vec3>, max_iters: usize) -> (Vec<Vec3>, f64) {
    let mut energy = coulomb_energy(&p);
    let mut grad = vec![Vec3::ZERO; p.len()];
    let mut trial = p.clone();
    let mut step = 0.1;
    for _ in 0..max_iters {
        let gnorm = tangent_gradient(&p, &mut grad);
        if gnorm < GRADIENT_TOL {
            break;
        }
        let mut accepted = false;
        while step > 1e-16 {
            for ((t, x), g) in trial.iter_mut().zip(&p).zip(&grad) {
                let moved = *x - *g * step;
                *t = moved * (1.0 / moved.norm());
            }
            let e = coulomb_energy(&trial);
            if e < energy {
                energy = e;
                std::mem::swap(&mut p, &mut trial);
                step *= 1.5;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (p, energy)
}

/// Multi-start Coulomb energy minimization on the sphere. Equal weights are
/// kept when they already balance; otherwise the weights closest to uniform
/// that complete the POVM are used.
pub fn thomson(cfg: &ThomsonConfig) -> Result<ThomsonOutcome> {
    if cfg.n < 4 {
        return Err(Error::OutOfRange {
            what: "Thomson point count",
            value: cfg.n as f64,
        });
    }
    if cfg.restarts == 0 {
        return Err(Error::OutOfRange {
            what: "Thomson restarts",
            value: 0.0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(Vec<Vec3>, f64)> = None;
    for _ in 0..cfg.restarts {
        let start: Vec<Vec3> = (0..cfg.n)
            .map(|_| loop {
                let v = Vec3::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                );
                let len = v.norm();
                if len > 1e-6 {
                    break v * (1.0 / len);
                }
            })
            .collect();
        let (p, e) = descend(start, cfg.max_iters);
        if best.as_ref().is_none_or(|b| e < b.1) {
            best = Some((p, e));
        }
    }
    let (points, energy) = best.expect("at least one restart");
    let dirs: Vec<UnitVec3> = points
        .iter()
        .map(|&v| UnitVec3::normalize(v).expect("point on the sphere"))
        .collect();

    let n = cfg.n as f64;
    let mut centroid = Vec3::ZERO;
    for d in &dirs {
        centroid += d.get() * (1.0 / n);
    }
    let centroid_norm = centroid.norm();
    let weights = closest_weights(&dirs, &vec![1.0 / n; cfg.n], false).ok_or(Error::InfeasibleWeights)?;
    let effects = dirs
        .iter()
        .zip(&weights)
        .map(|(&d, &w)| QubitEffect::projective(w, d))
        .collect();
    Ok(ThomsonOutcome {
        povm: QubitPovm::new(effects, false)?,
        energy,
        uniform_weights: centroid_norm <= UNIFORM_CENTROID_TOL,
        centroid_norm,
    })
}

/// Sorted pairwise angles between directions, a rotation-invariant fingerprint.
pub fn angle_spectrum(povm: &QubitPovm) -> Vec<f64> {
    let mut out = Vec::new();
    for (i, a) in povm.effects.iter().enumerate() {
        for b in &povm.effects[i + 1..] {
            out.push(a.n.dot(&b.n).clamp(-1.0, 1.0).acos());
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radius::compat_radius;

    #[test]
    fn closed_form_examples() {
        assert!((rotsym_planar_radius_closed_form(3).unwrap() - 0.5).abs() < 1e-15);
        assert!((rotsym_planar_radius_closed_form(4).unwrap() - 0.5).abs() < 1e-15);
        assert!((rotsym_planar_radius_closed_form(5).unwrap() - 0.5854).abs() < 1e-4);
        assert!((rotsym_planar_radius_closed_form(6).unwrap() - 0.5774).abs() < 1e-4);
        assert!(rotsym_planar_radius_closed_form(2).is_err());
    }

    #[test]
    fn rotsym_examples() {
        let p = rotsym_planar(4).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.planar);
        assert!((compat_radius(&p).unwrap().value - 0.5).abs() < 1e-12);
        let p = rotsym_planar(7).unwrap();
        let a = PI / 14.0;
        let expected = a.cos() / a.tan() / 7.0;
        assert!((compat_radius(&p).unwrap().value - expected).abs() < 1e-12);
        assert!((expected - 0.6102).abs() < 1e-4);
        assert!(rotsym_planar(1).is_err());
    }

    #[test]
    fn platonic_sizes_and_validity() {
        for kind in PlatonicKind::ALL {
            let p = platonic(kind);
            assert_eq!(p.len(), kind.outcomes());
            assert!(p.validate(1e-12).valid, "{kind:?}");
            let r = compat_radius(&p).unwrap().value;
            assert!((r - kind.radius_closed_form()).abs() < 1e-12, "{kind:?}: {r}");
        }
        assert!((PlatonicKind::Icosahedron.radius_closed_form() - 0.4588).abs() < 1e-4);
        assert_eq!("cube".parse::<PlatonicKind>().unwrap(), PlatonicKind::Cube);
        assert!("torus".parse::<PlatonicKind>().is_err());
    }

    #[test]
    fn thomson_four_is_tetrahedron() {
        let out = thomson(&ThomsonConfig {
            restarts: 5,
            ..ThomsonConfig::new(4)
        })
        .unwrap();
        assert!(out.uniform_weights);
        let tetra = angle_spectrum(&platonic(PlatonicKind::Tetrahedron));
        for (a, b) in angle_spectrum(&out.povm).iter().zip(&tetra) {
            assert!((a - b).abs() < 1e-5);
        }
        assert!((compat_radius(&out.povm).unwrap().value - 1.0 / 3.0).abs() < 1e-6);
        // Known minimum energy for four points.
        assert!((out.energy - 3.674_234_614).abs() < 1e-6);
    }

    #[test]
    fn thomson_five_is_bipyramid() {
        let out = thomson(&ThomsonConfig {
            restarts: 10,
            ..ThomsonConfig::new(5)
        })
        .unwrap();
        assert!((out.energy - 6.474_691_495).abs() < 1e-6);
        assert!((compat_radius(&out.povm).unwrap().value - 0.3464).abs() < 2e-3);
    }

    #[test]
    fn thomson_rejects_small_n() {
        assert!(thomson(&ThomsonConfig::new(3)).is_err());
    }

    #[test]
    fn odd_polygons_beat_even_neighbours() {
        for k in 2..30 {
            let odd = rotsym_planar_radius_closed_form(2 * k + 1).unwrap();
            assert!(odd > rotsym_planar_radius_closed_form(2 * k).unwrap());
            assert!(odd > rotsym_planar_radius_closed_form(2 * k + 2).unwrap());
        }
    }
}
