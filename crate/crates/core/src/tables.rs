//! Reproduction of the published radius tables and the Werner threshold
//! demonstrations, with the published values for comparison.

use serde::{Deserialize, Serialize};

use crate::bloch::{werner_assemblage, QubitEffect, QubitPovm, UnitVec3};
use crate::bounds::UNSTEERABLE_THRESHOLD;
use crate::constructions::{
    platonic, rotsym_planar, rotsym_planar_radius_closed_form, thomson, PlatonicKind, ThomsonConfig,
};
use crate::error::{Error, Result};
use crate::lhs::{build_lhs_werner, decompose_child, verify_lhs};
use crate::radius::compat_radius;
use crate::search::{maximize_radius, SearchConfig};

/// Published lower bounds on the best radius with `n` outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PublishedRow {
    pub n: usize,
    pub planar_symmetric: f64,
    pub planar_numeric: f64,
    /// `None` where no value was published.
    pub thomson: Option<f64>,
    pub general_numeric: Option<f64>,
}

const fn row(n: usize, ps: f64, pn: f64, th: Option<f64>, gn: Option<f64>) -> PublishedRow {
    PublishedRow {
        n,
        planar_symmetric: ps,
        planar_numeric: pn,
        thomson: th,
        general_numeric: gn,
    }
}

pub const PUBLISHED_TABLE2: [PublishedRow; 10] = [
    row(3, 0.5, 0.5, Some(0.0), Some(0.0)),
    row(4, 0.5, 0.5274, Some(0.3333), Some(0.3333)),
    row(5, 0.5854, 0.5854, Some(0.3464), Some(0.3716)),
    row(6, 0.5774, 0.5927, Some(0.3333), Some(0.4004)),
    row(7, 0.6102, 0.6102, Some(0.2857), Some(0.4060)),
    row(8, 0.6035, 0.6111, Some(0.4392), None),
    row(9, 0.6206, 0.6206, Some(0.4446), None),
    row(10, 0.6155, 0.6213, Some(0.4376), None),
    row(11, 0.6259, 0.6259, None, None),
    row(12, 0.6220, 0.6265, Some(0.4588), None),
];

pub fn published_row(n: usize) -> Option<PublishedRow> {
    PUBLISHED_TABLE2.iter().copied().find(|r| r.n == n)
}

/// Published decimals for the Platonic parents.
pub fn published_platonic(kind: PlatonicKind) -> f64 {
    match kind {
        PlatonicKind::Tetrahedron | PlatonicKind::Octahedron => 0.333,
        PlatonicKind::Cube => 0.408,
        PlatonicKind::Icosahedron => 0.4588,
        PlatonicKind::Dodecahedron => 0.4780,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Skipped,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: usize,
    pub planar_symmetric: Option<f64>,
    pub planar_numeric: Option<f64>,
    pub thomson: Option<f64>,
    pub general_numeric: Option<f64>,
    pub status: RowStatus,
}

/// Work per numeric table cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableBudget {
    pub samples: usize,
    pub refine_iters: usize,
    pub thomson_restarts: usize,
    /// Largest `n` with a general numeric cell.
    pub general_max_n: usize,
    /// Skip the searched columns entirely.
    pub skip_search: bool,
}

impl Default for TableBudget {
    fn default() -> Self {
        TableBudget {
            samples: 5000,
            refine_iters: 200,
            thomson_restarts: 50,
            general_max_n: 7,
            skip_search: false,
        }
    }
}

/// Equal-weight Thomson parents only count where equal weights balance.
/// Three points are an equilateral triangle on a great circle, radius 0.
pub fn thomson_cell(n: usize, restarts: usize, seed: u64) -> Result<(Option<f64>, RowStatus)> {
    if n == 3 {
        let tri = QubitPovm::new(rotsym_planar(3)?.effects, false)?;
        return Ok((Some(compat_radius(&tri)?.value), RowStatus::Ok));
    }
    let cfg = ThomsonConfig {
        restarts,
        seed,
        ..ThomsonConfig::new(n)
    };
    match thomson(&cfg) {
        Ok(out) if out.uniform_weights => Ok((Some(compat_radius(&out.povm)?.value), RowStatus::Ok)),
        Ok(_) | Err(Error::InfeasibleWeights) => Ok((None, RowStatus::Infeasible)),
        Err(e) => Err(e),
    }
}

fn search_cell(n: usize, planar: bool, seed: u64, budget: &TableBudget) -> Result<f64> {
    Ok(maximize_radius(&SearchConfig {
        n,
        planar,
        samples: budget.samples,
        refine_iters: budget.refine_iters,
        seed,
        time_budget_ms: None,
    })?
    .best_radius)
}

pub fn reproduce_table2_row(n: usize, seed: u64, budget: &TableBudget) -> Result<TableRow> {
    let (thomson, thomson_status) = thomson_cell(n, budget.thomson_restarts, seed)?;
    let (planar_numeric, general_numeric) = if budget.skip_search {
        (None, None)
    } else {
        let general = if n <= budget.general_max_n {
            Some(search_cell(n, false, seed, budget)?)
        } else {
            None
        };
        (Some(search_cell(n, true, seed, budget)?), general)
    };
    let status = if thomson_status == RowStatus::Infeasible {
        RowStatus::Infeasible
    } else if budget.skip_search {
        RowStatus::Skipped
    } else {
        RowStatus::Ok
    };
    Ok(TableRow {
        n,
        planar_symmetric: Some(rotsym_planar_radius_closed_form(n)?),
        planar_numeric,
        thomson,
        general_numeric,
        status,
    })
}

pub fn reproduce_table2(ns: &[usize], seed: u64, budget: &TableBudget) -> Result<Vec<TableRow>> {
    ns.iter().map(|&n| reproduce_table2_row(n, seed, budget)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlatonicRow {
    pub kind: PlatonicKind,
    pub outcomes: usize,
    pub computed: f64,
    pub closed_form: f64,
    pub published: f64,
    pub dev_closed_form: f64,
    pub dev_published: f64,
}

pub fn reproduce_platonic() -> Result<Vec<PlatonicRow>> {
    PlatonicKind::ALL
        .into_iter()
        .map(|kind| {
            let computed = compat_radius(&platonic(kind))?.value;
            let closed_form = kind.radius_closed_form();
            let published = published_platonic(kind);
            Ok(PlatonicRow {
                kind,
                outcomes: kind.outcomes(),
                computed,
                closed_form,
                published,
                dev_closed_form: (computed - closed_form).abs(),
                dev_published: (computed - published).abs(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ProbeOutcome {
    /// A model with `size` hidden states reproduces the assemblage.
    ModelBuilt { size: usize, max_dev: f64 },
    /// The child along the tight direction cannot be decomposed.
    Infeasible { direction: UnitVec3 },
    /// No listed parent reaches `r`.
    BeyondAllParents { best_radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdProbe {
    pub r: f64,
    pub parent: String,
    pub outcome: ProbeOutcome,
}

fn probe_settings() -> Vec<UnitVec3> {
    let mut s = vec![UnitVec3::X, UnitVec3::Y, UnitVec3::Z];
    for k in 0..9 {
        let t = k as f64 * 0.7;
        s.push(UnitVec3::from_spherical(0.3 + 0.29 * k as f64, t));
    }
    s
}

fn model_probe(parent: &QubitPovm, name: &str, r: f64) -> Result<ThresholdProbe> {
    let settings = probe_settings();
    let model = build_lhs_werner(parent, r, &settings)?;
    let check = verify_lhs(&model, &werner_assemblage(r, &settings)?, 1e-9)?;
    if !check.ok {
        return Err(Error::Internal(format!("model deviates by {}", check.max_dev)));
    }
    Ok(ThresholdProbe {
        r,
        parent: name.into(),
        outcome: ProbeOutcome::ModelBuilt {
            size: model.size(),
            max_dev: check.max_dev,
        },
    })
}

/// Best radius among the Platonic and Thomson parents.
fn best_listed_radius(restarts: usize) -> Result<(f64, String)> {
    let mut best = (0.0, String::new());
    for kind in PlatonicKind::ALL {
        let r = compat_radius(&platonic(kind))?.value;
        if r > best.0 {
            best = (r, kind.name().to_string());
        }
    }
    for n in 4..=12 {
        let cfg = ThomsonConfig {
            restarts,
            ..ThomsonConfig::new(n)
        };
        let r = compat_radius(&thomson(&cfg)?.povm)?.value;
        if r > best.0 {
            best = (r, format!("thomson-{n}"));
        }
    }
    Ok(best)
}

/// Demonstrates the Werner cost regimes: a one-state model for the product
/// state, a four-state model up to 1/3, the tetrahedron failing just above
/// 1/3, and no listed parent reaching past 1/2.
pub fn table1_thresholds(restarts: usize) -> Result<Vec<ThresholdProbe>> {
    let trivial = QubitPovm::new(vec![QubitEffect::new(1.0, 0.0, UnitVec3::Z)], false)?;
    let tetra = platonic(PlatonicKind::Tetrahedron);
    let mut out = vec![
        model_probe(&trivial, "trivial", 0.0)?,
        model_probe(&tetra, "tetrahedron", 1.0 / 3.0)?,
    ];

    let witness = compat_radius(&tetra)?.witness_c;
    let r = 0.34;
    match decompose_child(&tetra, witness.get() * r) {
        Err(Error::Infeasible(_)) => out.push(ThresholdProbe {
            r,
            parent: "tetrahedron".into(),
            outcome: ProbeOutcome::Infeasible { direction: witness },
        }),
        Ok(_) => return Err(Error::Internal("tetrahedron simulated a child past its radius".into())),
        Err(e) => return Err(e),
    }

    let r = 0.51;
    let (best_radius, name) = best_listed_radius(restarts)?;
    if best_radius >= r || best_radius > UNSTEERABLE_THRESHOLD {
        return Err(Error::Internal(format!("{name} reaches radius {best_radius}")));
    }
    out.push(ThresholdProbe {
        r,
        parent: name,
        outcome: ProbeOutcome::BeyondAllParents { best_radius },
    });
    Ok(out)
}
