//! Bloch-vector algebra, qubit POVMs in Pauli form, and Werner-state assemblages.
//!
//! Every effect is stored as `alpha * (I + eta * n.sigma)` with a unit Bloch
//! direction `n`. A list of effects is a POVM when the weights sum to one and
//! the weighted Bloch vectors cancel.

use std::fmt;
use std::ops::{Add, AddAssign, Deref, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for the POVM completion constraints.
pub const POVM_TOL: f64 = 1e-9;
/// Unit-vector inputs this close to norm one are renormalized; others are rejected.
pub const UNIT_TOL: f64 = 1e-9;
/// Effects lighter than this are dropped when a POVM is normalized.
pub const MIN_WEIGHT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Applies a row-major 3x3 matrix.
    pub fn transform(&self, m: &[[f64; 3]; 3]) -> Vec3 {
        Vec3::new(
            m[0][0] * self.x + m[0][1] * self.y + m[0][2] * self.z,
            m[1][0] * self.x + m[1][1] * self.y + m[1][2] * self.z,
            m[2][0] * self.x + m[2][1] * self.y + m[2][2] * self.z,
        )
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6}, {:.6})", self.x, self.y, self.z)
    }
}

/// A Bloch direction of norm one (within 1e-12 after construction).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    pub const X: UnitVec3 = UnitVec3(Vec3::new(1.0, 0.0, 0.0));
    pub const Y: UnitVec3 = UnitVec3(Vec3::new(0.0, 1.0, 0.0));
    pub const Z: UnitVec3 = UnitVec3(Vec3::new(0.0, 0.0, 1.0));

    /// Accepts `v` if its norm is within [`UNIT_TOL`] of one, renormalizing it.
    pub fn new(v: Vec3) -> Result<Self> {
        let norm = v.norm();
        if !v.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit(norm));
        }
        Ok(UnitVec3(v * (1.0 / norm)))
    }

    /// Normalizes any non-zero finite vector.
    pub fn normalize(v: Vec3) -> Option<Self> {
        let norm = v.norm();
        if !v.is_finite() || norm <= f64::MIN_POSITIVE {
            return None;
        }
        Some(UnitVec3(v * (1.0 / norm)))
    }

    /// Direction in the x-z plane at angle `theta` from +x towards +z.
    pub fn in_plane(theta: f64) -> Self {
        UnitVec3(Vec3::new(theta.cos(), 0.0, theta.sin()))
    }

    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let s = theta.sin();
        UnitVec3(Vec3::new(s * phi.cos(), s * phi.sin(), theta.cos()))
    }

    pub fn get(&self) -> Vec3 {
        self.0
    }

    pub fn rotated(&self, m: &[[f64; 3]; 3]) -> UnitVec3 {
        UnitVec3::normalize(self.0.transform(m)).expect("rotation of a unit vector")
    }
}

impl Deref for UnitVec3 {
    type Target = Vec3;
    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

impl Neg for UnitVec3 {
    type Output = UnitVec3;
    fn neg(self) -> UnitVec3 {
        UnitVec3(-self.0)
    }
}

impl TryFrom<[f64; 3]> for UnitVec3 {
    type Error = Error;
    fn try_from(a: [f64; 3]) -> Result<Self> {
        UnitVec3::new(a.into())
    }
}

impl From<UnitVec3> for [f64; 3] {
    fn from(v: UnitVec3) -> Self {
        v.0.to_array()
    }
}

/// The positive operator `alpha * (I + eta * n.sigma)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitEffect {
    pub alpha: f64,
    pub eta: f64,
    pub n: UnitVec3,
}

impl QubitEffect {
    pub fn new(alpha: f64, eta: f64, n: UnitVec3) -> Self {
        QubitEffect { alpha, eta, n }
    }

    /// Rank-one effect `alpha * (I + n.sigma)`.
    pub fn projective(alpha: f64, n: UnitVec3) -> Self {
        QubitEffect { alpha, eta: 1.0, n }
    }

    /// The Bloch vector `eta * n` of the normalized effect.
    pub fn bloch(&self) -> Vec3 {
        self.n.get() * self.eta
    }
}

/// One violated POVM constraint and how badly it is violated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: String,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            valid: violations.is_empty(),
            violations,
        }
    }

    pub fn magnitude_of(&self, constraint: &str) -> Option<f64> {
        self.violations
            .iter()
            .find(|v| v.constraint == constraint)
            .map(|v| v.magnitude)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{} ({:.3e})", v.constraint, v.magnitude))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// A qubit POVM in Pauli form.
///
/// `planar` selects the in-plane (x-z) radius algorithms; it is never inferred.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitPovm {
    pub effects: Vec<QubitEffect>,
    #[serde(default)]
    pub planar: bool,
}

impl QubitPovm {
    /// Drops effects lighter than [`MIN_WEIGHT`] and validates at [`POVM_TOL`].
    pub fn new(effects: Vec<QubitEffect>, planar: bool) -> Result<Self> {
        let povm = QubitPovm::new_unchecked(effects, planar).normalized();
        povm.ensure_valid()?;
        Ok(povm)
    }

    pub fn new_unchecked(effects: Vec<QubitEffect>, planar: bool) -> Self {
        QubitPovm { effects, planar }
    }

    /// Equal-weight rank-one POVM on the given directions.
    pub fn uniform(directions: &[UnitVec3], planar: bool) -> Result<Self> {
        let w = 1.0 / directions.len() as f64;
        QubitPovm::new(
            directions
                .iter()
                .map(|&n| QubitEffect::projective(w, n))
                .collect(),
            planar,
        )
    }

    /// Copy without the effects lighter than [`MIN_WEIGHT`].
    pub fn normalized(mut self) -> Self {
        self.effects.retain(|e| e.alpha >= MIN_WEIGHT);
        self
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.effects.iter().map(|e| e.alpha).sum()
    }

    /// `sum_i alpha_i eta_i n_i`, which vanishes for a POVM.
    pub fn centroid(&self) -> Vec3 {
        let mut acc = Vec3::ZERO;
        for e in &self.effects {
            acc += e.bloch() * e.alpha;
        }
        acc
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        validate_povm(self, tol)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate(POVM_TOL);
        if report.valid {
            Ok(())
        } else {
            Err(Error::InvalidPovm(report))
        }
    }

    pub fn symmetric_extension(&self) -> Result<QubitPovm> {
        symmetric_extension(self)
    }

    pub fn rank1_reduce(&self) -> Result<QubitPovm> {
        rank1_reduce(self)
    }

    /// Applies a common orthogonal map to every direction. The planar flag
    /// survives only if the image still lies in the x-z plane.
    pub fn rotated(&self, m: &[[f64; 3]; 3]) -> QubitPovm {
        let effects: Vec<QubitEffect> = self
            .effects
            .iter()
            .map(|e| QubitEffect::new(e.alpha, e.eta, e.n.rotated(m)))
            .collect();
        let planar = self.planar && effects.iter().all(|e| e.n.y.abs() <= POVM_TOL);
        QubitPovm { effects, planar }
    }
}

/// Checks the completion constraints and per-effect ranges. Never fails.
pub fn validate_povm(povm: &QubitPovm, tol: f64) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |name: &str, magnitude: f64| {
        violations.push(Violation {
            constraint: name.to_string(),
            magnitude,
        })
    };

    if povm.effects.is_empty() {
        push("empty", 1.0);
        return ValidationReport::from_violations(violations);
    }

    for e in &povm.effects {
        if !e.alpha.is_finite() || !e.eta.is_finite() || !e.n.is_finite() {
            push("non-finite", f64::INFINITY);
            continue;
        }
        let alpha_excess = (-e.alpha).max(e.alpha - 1.0);
        if alpha_excess > tol {
            push("alpha-range", alpha_excess);
        }
        let eta_excess = (-e.eta).max(e.eta - 1.0);
        if eta_excess > tol {
            push("eta-range", eta_excess);
        }
    }

    let sum_dev = (povm.weight_sum() - 1.0).abs();
    if !(sum_dev <= tol) {
        push("weight-sum", sum_dev);
    }
    let completion = povm.centroid().norm();
    if !(completion <= tol) {
        push("completion", completion);
    }
    if povm.planar {
        let off_plane = povm
            .effects
            .iter()
            .map(|e| e.n.y.abs())
            .fold(0.0, f64::max);
        if off_plane > tol {
            push("planarity", off_plane);
        }
    }
    ValidationReport::from_violations(violations)
}

/// Splits every effect into the antipodal pair `{alpha/2, eta, +n}`, `{alpha/2, eta, -n}`.
pub fn symmetric_extension(povm: &QubitPovm) -> Result<QubitPovm> {
    povm.ensure_valid()?;
    let mut effects = Vec::with_capacity(2 * povm.len());
    for e in &povm.effects {
        effects.push(QubitEffect::new(e.alpha / 2.0, e.eta, e.n));
        effects.push(QubitEffect::new(e.alpha / 2.0, e.eta, -e.n));
    }
    QubitPovm::new(effects, povm.planar)
}

/// Replaces every effect by its rank-one part, reweighted by `alpha_i eta_i`.
/// Effects with `alpha_i eta_i = 0` disappear.
pub fn rank1_reduce(povm: &QubitPovm) -> Result<QubitPovm> {
    povm.ensure_valid()?;
    let total: f64 = povm.effects.iter().map(|e| e.alpha * e.eta).sum();
    if total <= MIN_WEIGHT {
        return Err(Error::DegeneratePovm);
    }
    let effects = povm
        .effects
        .iter()
        .filter(|e| e.alpha * e.eta > 0.0)
        .map(|e| QubitEffect::projective(e.alpha * e.eta / total, e.n))
        .collect();
    QubitPovm::new(effects, povm.planar)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }
}

/// Subnormalized Bob state `weight * (I + bloch.sigma) / 2` for one (outcome, setting).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblageEntry {
    pub outcome: Outcome,
    pub setting: usize,
    pub weight: f64,
    pub bloch: Vec3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assemblage {
    pub settings: Vec<UnitVec3>,
    pub entries: Vec<AssemblageEntry>,
}

impl Assemblage {
    pub fn get(&self, outcome: Outcome, setting: usize) -> Option<&AssemblageEntry> {
        self.entries
            .iter()
            .find(|e| e.outcome == outcome && e.setting == setting)
    }

    /// Bob's reduced Bloch vector (times its trace) as seen from setting `x`.
    pub fn reduced_state(&self, setting: usize) -> (f64, Vec3) {
        let mut weight = 0.0;
        let mut bloch = Vec3::ZERO;
        for e in self.entries.iter().filter(|e| e.setting == setting) {
            weight += e.weight;
            bloch += e.bloch * e.weight;
        }
        (weight, bloch)
    }

    /// Largest spread of the reduced state across settings.
    pub fn signalling_deviation(&self) -> f64 {
        if self.settings.is_empty() {
            return 0.0;
        }
        let (w0, b0) = self.reduced_state(0);
        (1..self.settings.len())
            .map(|x| {
                let (w, b) = self.reduced_state(x);
                (w - w0).abs().max((b - b0).norm_inf())
            })
            .fold(0.0, f64::max)
    }
}

/// Assemblage generated by spin measurements along `settings` on the Werner
/// state with singlet weight `r`: `sigma_{+-|n} = (I -+ r n.sigma) / 4`.
pub fn werner_assemblage(r: f64, settings: &[UnitVec3]) -> Result<Assemblage> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::OutOfRange {
            what: "singlet weight r",
            value: r,
        });
    }
    let mut entries = Vec::with_capacity(2 * settings.len());
    for (x, n) in settings.iter().enumerate() {
        for outcome in Outcome::BOTH {
            entries.push(AssemblageEntry {
                outcome,
                setting: x,
                weight: 0.5,
                bloch: n.get() * (-outcome.sign() * r),
            });
        }
    }
    Ok(Assemblage {
        settings: settings.to_vec(),
        entries,
    })
}
