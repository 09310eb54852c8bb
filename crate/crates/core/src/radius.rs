//! Compatibility radii by exact facet enumeration, with the minimizing
//! hyperplane as a witness.
//!
//! The radius is the largest `r` for which every projective child of noise
//! `r` decomposes over the parent. Whether arbitrary POVM children give the
//! same value is only settled for planar triangles and tetrahedra.

use serde::{Deserialize, Serialize};

use crate::bloch::{QubitPovm, UnitVec3, Vec3};
use crate::error::{Error, Result};
use crate::geometry::{distinct_generators, objective, visit_general, visit_planar, DEGENERATE_TOL};

/// Values within this of the minimum count as ties for the witness choice.
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusMethod {
    FacetGeneral,
    FacetPlanar,
    Symmetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusResult {
    pub value: f64,
    pub witness_c0: f64,
    pub witness_c: UnitVec3,
    pub method: RadiusMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub r: f64,
    pub r_sym: f64,
    pub ok: bool,
}

fn lex_less(a: (f64, Vec3), b: (f64, Vec3)) -> bool {
    let ka = [a.0, a.1.x, a.1.y, a.1.z];
    let kb = [b.0, b.1.x, b.1.y, b.1.z];
    ka.iter()
        .zip(&kb)
        .find(|(p, q)| p != q)
        .is_some_and(|(p, q)| p < q)
}

/// Picks the lexicographically smallest `(c0, c)` among candidates whose
/// value is within [`TIE_TOL`] of the minimum.
fn select(cands: &[(f64, f64, Vec3)]) -> Option<(f64, Vec3)> {
    let min = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    cands
        .iter()
        .filter(|c| c.0 <= min + TIE_TOL)
        .map(|c| (c.1, c.2))
        .reduce(|best, c| if lex_less(c, best) { c } else { best })
}

/// A hyperplane containing every generator when they span less than a facet:
/// the normal is orthogonal to the line (or point) they lie on.
fn degenerate_witness(gens: &[(usize, Vec3)], planar: bool) -> (f64, Vec3) {
    let base = gens.first().map_or(Vec3::ZERO, |g| g.1);
    let dir = gens
        .iter()
        .map(|g| g.1 - base)
        .max_by(|p, q| p.norm().total_cmp(&q.norm()))
        .unwrap_or(Vec3::ZERO);
    let c = if planar {
        if dir.norm() < DEGENERATE_TOL {
            Vec3::new(1.0, 0.0, 0.0)
        } else {
            Vec3::new(-dir.z, 0.0, dir.x) * (1.0 / dir.norm())
        }
    } else if dir.norm() < DEGENERATE_TOL {
        Vec3::new(0.0, 0.0, 1.0)
    } else {
        let helper = if dir.x.abs() <= dir.y.abs().min(dir.z.abs()) {
            Vec3::new(1.0, 0.0, 0.0)
        } else if dir.y.abs() <= dir.z.abs() {
            Vec3::new(0.0, 1.0, 0.0)
        } else {
            Vec3::new(0.0, 0.0, 1.0)
        };
        let c = dir.cross(&helper);
        c * (1.0 / c.norm())
    };
    (-c.dot(&base), c)
}

fn finish(povm: &QubitPovm, c0: f64, c: Vec3, method: RadiusMethod) -> Result<RadiusResult> {
    let witness_c = UnitVec3::normalize(c).ok_or_else(|| Error::Internal("zero witness normal".into()))?;
    let value = objective(povm, c0, &witness_c);
    if value < -TIE_TOL || !value.is_finite() {
        return Err(Error::Internal(format!("radius evaluated to {value}")));
    }
    Ok(RadiusResult {
        value,
        witness_c0: c0,
        witness_c,
        method,
    })
}

struct Terms {
    alpha: Vec<f64>,
    gen: Vec<Vec3>,
}

impl Terms {
    fn new(povm: &QubitPovm) -> Self {
        Terms {
            alpha: povm.effects.iter().map(|e| e.alpha).collect(),
            gen: povm.effects.iter().map(|e| e.bloch()).collect(),
        }
    }

    fn eval(&self, c0: f64, c: &Vec3) -> f64 {
        self.alpha
            .iter()
            .zip(&self.gen)
            .map(|(a, v)| a * (c0 + c.dot(v)).abs())
            .sum()
    }
}

/// The compatibility radius: the minimum of the hyperplane objective over all
/// facet candidates (edge candidates for planar POVMs).
///
/// Generators spanning less than a facet (fewer than three distinct
/// directions, or all collinear) give a flat region and radius 0.
pub fn compat_radius(povm: &QubitPovm) -> Result<RadiusResult> {
    povm.ensure_valid()?;
    let gens = distinct_generators(povm);
    let terms = Terms::new(povm);
    let mut cands = Vec::new();
    let method = if povm.planar {
        visit_planar(&gens, |c0, c, _| cands.push((terms.eval(c0, &c), c0, c)));
        RadiusMethod::FacetPlanar
    } else {
        visit_general(&gens, |c0, c, _| cands.push((terms.eval(c0, &c), c0, c)));
        RadiusMethod::FacetGeneral
    };
    let (c0, c) = select(&cands).unwrap_or_else(|| degenerate_witness(&gens, povm.planar));
    finish(povm, c0, c, method)
}

/// Radius value only, for inner loops. Skips validation and witness selection.
pub fn radius_value(povm: &QubitPovm) -> f64 {
    let gens = distinct_generators(povm);
    let terms = Terms::new(povm);
    let mut best = f64::INFINITY;
    if povm.planar {
        visit_planar(&gens, |c0, c, _| best = best.min(terms.eval(c0, &c)));
    } else {
        visit_general(&gens, |c0, c, _| best = best.min(terms.eval(c0, &c)));
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

/// Radius of the centrally symmetrized POVM: the smallest
/// `sum_i alpha_i eta_i |c.n_i|` over normals orthogonal to two generators
/// (one generator in the plane).
pub fn compat_radius_sym(povm: &QubitPovm) -> Result<RadiusResult> {
    povm.ensure_valid()?;
    let gens = distinct_generators(povm);
    let terms = Terms::new(povm);
    let mut cands = Vec::new();
    let mut push = |c: Vec3| {
        let len = c.norm();
        if len >= DEGENERATE_TOL {
            let c = c * (1.0 / len);
            cands.push((terms.eval(0.0, &c), 0.0, c));
        }
    };
    if povm.planar {
        for (_, v) in &gens {
            push(Vec3::new(-v.z, 0.0, v.x));
            push(Vec3::new(v.z, 0.0, -v.x));
        }
    } else {
        for (a, (_, va)) in gens.iter().enumerate() {
            for (_, vb) in &gens[a + 1..] {
                let c = va.cross(vb);
                push(c);
                push(-c);
            }
        }
    }
    let (c0, c) = select(&cands).unwrap_or_else(|| {
        let (_, c) = degenerate_witness(&gens, povm.planar);
        // The symmetrized generators include the origin, so c0 = 0 still fits.
        (0.0, c)
    });
    finish(povm, c0, c, RadiusMethod::Symmetric)
}

/// Both radii and whether `R <= R_sym` holds within 1e-9.
pub fn inradius_chain_check(povm: &QubitPovm) -> Result<ChainCheck> {
    let r = compat_radius(povm)?.value;
    let r_sym = compat_radius_sym(povm)?.value;
    Ok(ChainCheck {
        r,
        r_sym,
        ok: r <= r_sym + 1e-9,
    })
}
