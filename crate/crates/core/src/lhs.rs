//! Simulating noisy spin measurements with a parent POVM, and the resulting
//! local-hidden-state models for Werner states.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bloch::{Assemblage, Outcome, QubitPovm, UnitVec3, Vec3};
use crate::error::{Error, Result};
use crate::lp;
use crate::radius::compat_radius;

/// Response probabilities `q_i` for the `+` outcome of a child measurement
/// with Bloch vector `target`, post-processing the parent outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChildDecomposition {
    pub q: Vec<f64>,
    pub target: Vec3,
}

/// Finds `q in [0,1]^n` with `sum_i q_i alpha_i = 1/2` and
/// `2 sum_i q_i alpha_i eta_i n_i = target`.
pub fn decompose_child(povm: &QubitPovm, target: Vec3) -> Result<ChildDecomposition> {
    povm.ensure_valid()?;
    let norm = target.norm();
    if !target.is_finite() || norm > 1.0 + 1e-12 {
        return Err(Error::OutOfRange {
            what: "child Bloch vector norm",
            value: norm,
        });
    }
    let mut a = vec![povm.effects.iter().map(|e| e.alpha).collect::<Vec<f64>>()];
    for k in 0..3 {
        a.push(
            povm.effects
                .iter()
                .map(|e| 2.0 * e.alpha * e.bloch().to_array()[k])
                .collect(),
        );
    }
    let t = target.to_array();
    let b = [0.5, t[0], t[1], t[2]];
    let upper = vec![1.0; povm.len()];
    let q = lp::find_feasible(&a, &b, Some(&upper), lp::FEASIBILITY_TOL).ok_or_else(|| {
        Error::Infeasible(format!(
            "child with Bloch vector {target} is outside the compatible region"
        ))
    })?;
    Ok(ChildDecomposition { q, target })
}

fn tolerant_sign(v: f64) -> f64 {
    if v.abs() < 1e-12 {
        0.0
    } else {
        v.signum()
    }
}

/// Closed-form responses of the `n`-gon parent (directions at `2 pi i / n`,
/// `i = 1..=n`) simulating the child of maximal length in direction `theta`.
///
/// The child Bloch vector lies in the polygon's inscribed zonogon; `theta` is
/// reduced to the nearest vertex sector, whose two adjacent edge normals
/// `m1`, `m2` split the parent directions into the `+` and `-` halves.
pub fn planar_response(n: usize, theta: f64) -> Result<Vec<f64>> {
    if n < 3 {
        return Err(Error::OutOfRange {
            what: "polygon size",
            value: n as f64,
        });
    }
    if !theta.is_finite() {
        return Err(Error::OutOfRange {
            what: "angle",
            value: theta,
        });
    }
    let nf = n as f64;
    let spacing = if n.is_multiple_of(2) { 2.0 * PI / nf } else { PI / nf };
    let half = spacing / 2.0;
    let phase = (PI / 2.0 - PI / nf).rem_euclid(spacing) + half;
    let k = ((theta - phase) / spacing).round();
    let centre = phase + k * spacing;
    let x = theta - centre;
    let (m1, m2) = (centre - half, centre + half);
    let denom = 2.0 * half.sin();
    Ok((1..=n)
        .map(|i| {
            let psi = 2.0 * PI * i as f64 / nf;
            let s1 = tolerant_sign((psi - m1).cos());
            let s2 = tolerant_sign((psi - m2).cos());
            (0.5 * (1.0 + (s1 * (half - x).sin() + s2 * (half + x).sin()) / denom)).clamp(0.0, 1.0)
        })
        .collect())
}

/// Response of the continuum parent (uniform over the circle) to the child
/// along `t`: the `+` outcome whenever the parent direction has `t.n > 0`.
pub fn continuum_response(t: &UnitVec3, n: &UnitVec3) -> f64 {
    (1.0 + tolerant_sign(t.dot(n))) / 2.0
}

/// Weight and Bloch vector of the child simulated by the continuum parent in
/// direction `theta`, integrated by composite Simpson on `panels` panels per
/// smooth piece. The exact answer is `(1/2, (2/pi) t)`.
pub fn continuum_child(theta: f64, panels: usize) -> (f64, Vec3) {
    let t = UnitVec3::in_plane(theta);
    let panels = panels.max(2) + panels % 2;
    let breaks = [theta - PI / 2.0, theta + PI / 2.0, theta + 3.0 * PI / 2.0];
    let mut weight = 0.0;
    let mut bloch = Vec3::ZERO;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        // Evaluate at interior points only, away from the jumps of the response.
        let mid = 0.5 * (a + b);
        let inside = continuum_response(&t, &UnitVec3::in_plane(mid));
        let h = (b - a) / panels as f64;
        for j in 0..=panels {
            let psi = a + j as f64 * h;
            let c = if j == 0 || j == panels {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let f = c * h / 3.0 * inside / (2.0 * PI);
            weight += f;
            bloch += UnitVec3::in_plane(psi).get() * (2.0 * f);
        }
    }
    (weight, bloch)
}

/// Hidden-state model: the source sends index `i` with probability `p[i]`,
/// Bob holds the state with Bloch vector `hidden_bloch[i]`, and Alice answers
/// setting `x` with `+` with probability `response[x].plus[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LhsModel {
    pub p: Vec<f64>,
    pub hidden_bloch: Vec<Vec3>,
    pub settings: Vec<UnitVec3>,
    pub response: Vec<SettingResponse>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingResponse {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl LhsModel {
    pub fn size(&self) -> usize {
        self.p.len()
    }

    pub fn response(&self, outcome: Outcome, setting: usize, index: usize) -> f64 {
        let r = &self.response[setting];
        match outcome {
            Outcome::Plus => r.plus[index],
            Outcome::Minus => r.minus[index],
        }
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.p.len();
        if self.hidden_bloch.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} hidden states for {n} probabilities",
                self.hidden_bloch.len()
            )));
        }
        if self.response.len() != self.settings.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} response rows for {} settings",
                self.response.len(),
                self.settings.len()
            )));
        }
        if let Some(bad) = self
            .response
            .iter()
            .find(|r| r.plus.len() != n || r.minus.len() != n)
        {
            return Err(Error::ShapeMismatch(format!(
                "response row of length {}/{} for {n} hidden states",
                bad.plus.len(),
                bad.minus.len()
            )));
        }
        Ok(())
    }
}

/// Hidden states are the singlet conditionals of the parent outcomes; the
/// responses decompose each noisy child `r n_x` into the parent.
pub fn build_lhs_werner(parent: &QubitPovm, r: f64, settings: &[UnitVec3]) -> Result<LhsModel> {
    parent.ensure_valid()?;
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::OutOfRange {
            what: "Werner parameter",
            value: r,
        });
    }
    let radius = compat_radius(parent)?.value;
    if r > radius + 1e-12 {
        return Err(Error::Infeasible(format!(
            "r = {r} exceeds the parent's compatibility radius {radius}"
        )));
    }
    let response = settings
        .iter()
        .map(|s| {
            let d = decompose_child(parent, s.get() * r)?;
            Ok(SettingResponse {
                minus: d.q.iter().map(|q| 1.0 - q).collect(),
                plus: d.q,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LhsModel {
        p: parent.effects.iter().map(|e| e.alpha).collect(),
        hidden_bloch: parent.effects.iter().map(|e| -e.bloch()).collect(),
        settings: settings.to_vec(),
        response,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LhsCheck {
    pub ok: bool,
    pub max_dev: f64,
}

/// Largest deviation, over outcomes and settings, between the model's
/// `(weight, weight * bloch)` and the assemblage's.
pub fn verify_lhs(model: &LhsModel, assemblage: &Assemblage, tol: f64) -> Result<LhsCheck> {
    model.check_shape()?;
    if model.settings.len() != assemblage.settings.len() {
        return Err(Error::ShapeMismatch(format!(
            "model has {} settings, assemblage {}",
            model.settings.len(),
            assemblage.settings.len()
        )));
    }
    let mut max_dev: f64 = 0.0;
    for x in 0..model.settings.len() {
        for outcome in Outcome::BOTH {
            let entry = assemblage.get(outcome, x).ok_or_else(|| {
                Error::ShapeMismatch(format!("assemblage lacks entry ({}, {x})", outcome.sign()))
            })?;
            let mut weight = 0.0;
            let mut bloch = Vec3::ZERO;
            for i in 0..model.size() {
                let w = model.response(outcome, x, i) * model.p[i];
                weight += w;
                bloch += model.hidden_bloch[i] * w;
            }
            let dev = (bloch - entry.bloch * entry.weight)
                .norm_inf()
                .max((weight - entry.weight).abs());
            max_dev = max_dev.max(dev);
        }
    }
    Ok(LhsCheck {
        ok: max_dev <= tol,
        max_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::werner_assemblage;
    use crate::constructions::{platonic, rotsym_planar, rotsym_planar_radius_closed_form, PlatonicKind};

    fn check_constraints(povm: &QubitPovm, d: &ChildDecomposition) {
        let mut w = 0.0;
        let mut v = Vec3::ZERO;
        for (e, q) in povm.effects.iter().zip(&d.q) {
            assert!((0.0..=1.0).contains(q));
            w += q * e.alpha;
            v += e.bloch() * (2.0 * q * e.alpha);
        }
        assert!((w - 0.5).abs() < 1e-9);
        assert!((v - d.target).norm_inf() < 1e-9);
    }

    #[test]
    fn tetrahedron_decompositions() {
        let tetra = platonic(PlatonicKind::Tetrahedron);
        let d = decompose_child(&tetra, Vec3::ZERO).unwrap();
        check_constraints(&tetra, &d);
        let d = decompose_child(&tetra, Vec3::new(1.0 / 3.0, 0.0, 0.0)).unwrap();
        check_constraints(&tetra, &d);
        // Along x the region reaches 1/sqrt(3); the tight directions are the
        // witness normals.
        let d = decompose_child(&tetra, Vec3::new(0.57, 0.0, 0.0)).unwrap();
        check_constraints(&tetra, &d);
        let witness = compat_radius(&tetra).unwrap().witness_c;
        assert!(matches!(
            decompose_child(&tetra, witness.get() * 0.34),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            decompose_child(&tetra, Vec3::new(0.58, 0.0, 0.0)),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            decompose_child(&tetra, Vec3::new(1.1, 0.0, 0.0)),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn tetrahedron_zero_target_is_a_fair_coin() {
        // The only decomposition of the zero child with four affinely
        // independent generators is the constant one.
        let tetra = platonic(PlatonicKind::Tetrahedron);
        let d = decompose_child(&tetra, Vec3::ZERO).unwrap();
        for q in d.q {
            assert!((q - 0.5).abs() < 1e-12);
        }
    }

    fn reconstruct(n: usize, p: &[f64]) -> (f64, Vec3) {
        let mut w = 0.0;
        let mut v = Vec3::ZERO;
        for (i, pi) in p.iter().enumerate() {
            let a = 1.0 / n as f64;
            w += pi * a;
            v += UnitVec3::in_plane(2.0 * PI * (i + 1) as f64 / n as f64).get() * (2.0 * pi * a);
        }
        (w, v)
    }

    #[test]
    fn planar_response_examples() {
        let p = planar_response(4, 0.0).unwrap();
        let (w, v) = reconstruct(4, &p);
        assert!((w - 0.5).abs() < 1e-12);
        assert!((v - Vec3::new(0.5, 0.0, 0.0)).norm() < 1e-12);

        let p = planar_response(3, PI / 6.0).unwrap();
        let (w, v) = reconstruct(3, &p);
        assert!((w - 0.5).abs() < 1e-12);
        assert!((v.norm() - 0.5).abs() < 1e-12);
        assert!(planar_response(2, 0.0).is_err());
    }

    #[test]
    fn planar_response_reconstructs_closed_form() {
        for n in 3..=32 {
            let r = rotsym_planar_radius_closed_form(n).unwrap();
            for k in 0..997 {
                let theta = -PI + 2.0 * PI * k as f64 / 997.0;
                let p = planar_response(n, theta).unwrap();
                assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
                let (w, v) = reconstruct(n, &p);
                assert!((w - 0.5).abs() < 1e-9, "n={n} theta={theta}");
                assert!((v - UnitVec3::in_plane(theta).get() * r).norm() < 1e-9, "n={n} theta={theta}");
            }
        }
    }

    #[test]
    fn continuum_limit() {
        for theta in [0.0, 0.3, 2.0, -1.1] {
            let (w, v) = continuum_child(theta, 2000);
            assert!((w - 0.5).abs() < 1e-6);
            assert!((v - UnitVec3::in_plane(theta).get() * (2.0 / PI)).norm() < 1e-6);
        }
    }

    #[test]
    fn tetrahedron_model_round_trip() {
        let tetra = platonic(PlatonicKind::Tetrahedron);
        let settings = [UnitVec3::X, UnitVec3::Y, UnitVec3::Z];
        let model = build_lhs_werner(&tetra, 1.0 / 3.0, &settings).unwrap();
        assert_eq!(model.size(), 4);
        let asm = werner_assemblage(1.0 / 3.0, &settings).unwrap();
        let check = verify_lhs(&model, &asm, 1e-9).unwrap();
        assert!(check.ok, "{}", check.max_dev);
        let wrong = werner_assemblage(1.0 / 3.0 + 0.1, &settings).unwrap();
        assert!(!verify_lhs(&model, &wrong, 1e-9).unwrap().ok);
        assert!(matches!(
            build_lhs_werner(&tetra, 0.34, &settings),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn triangle_and_trivial_models() {
        let tri = rotsym_planar(3).unwrap();
        let settings: Vec<UnitVec3> = (0..8).map(|k| UnitVec3::in_plane(0.4 * k as f64)).collect();
        let model = build_lhs_werner(&tri, 0.5, &settings).unwrap();
        let asm = werner_assemblage(0.5, &settings).unwrap();
        assert!(verify_lhs(&model, &asm, 1e-9).unwrap().ok);

        let ico = platonic(PlatonicKind::Icosahedron);
        let model = build_lhs_werner(&ico, 0.0, &[UnitVec3::Z]).unwrap();
        let asm = werner_assemblage(0.0, &[UnitVec3::Z]).unwrap();
        assert!(verify_lhs(&model, &asm, 1e-9).unwrap().ok);
    }

    #[test]
    fn empty_settings_and_shape_errors() {
        let tetra = platonic(PlatonicKind::Tetrahedron);
        let model = build_lhs_werner(&tetra, 0.2, &[]).unwrap();
        let empty = werner_assemblage(0.2, &[]).unwrap();
        assert_eq!(verify_lhs(&model, &empty, 1e-9).unwrap(), LhsCheck { ok: true, max_dev: 0.0 });
        let asm = werner_assemblage(0.2, &[UnitVec3::X]).unwrap();
        assert!(matches!(verify_lhs(&model, &asm, 1e-9), Err(Error::ShapeMismatch(_))));
        let mut bad = build_lhs_werner(&tetra, 0.2, &[UnitVec3::X]).unwrap();
        bad.p.pop();
        assert!(matches!(verify_lhs(&bad, &asm, 1e-9), Err(Error::ShapeMismatch(_))));
    }
}
