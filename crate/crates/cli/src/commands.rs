use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use compat_core::bloch::{werner_assemblage, QubitPovm, UnitVec3};
use compat_core::bounds::{bound_reports, BoundKind};
use compat_core::constructions::{platonic, rotsym_planar, thomson, PlatonicKind, ThomsonConfig};
use compat_core::geometry::{sampled_min, OracleConfig};
use compat_core::lhs::{build_lhs_werner, verify_lhs, LhsModel};
use compat_core::radius::{compat_radius, compat_radius_sym, RadiusMethod, RadiusResult};
use compat_core::search::{maximize_radius, SearchConfig};
use compat_core::tables::{
    published_row, reproduce_platonic, reproduce_table2, table1_thresholds, ProbeOutcome, RowStatus, TableBudget,
    TableRow,
};
use compat_core::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::output::{csv_text, write_text, Sink};
use crate::CliError;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(path.to_path_buf(), e))
}

#[derive(Serialize)]
struct EffectRow {
    alpha: f64,
    eta: f64,
    nx: f64,
    ny: f64,
    nz: f64,
}

fn effect_rows(p: &QubitPovm) -> Vec<EffectRow> {
    p.effects
        .iter()
        .map(|e| EffectRow {
            alpha: e.alpha,
            eta: e.eta,
            nx: e.n.x,
            ny: e.n.y,
            nz: e.n.z,
        })
        .collect()
}

pub fn validate(path: &Path, tol: f64, sink: &Sink) -> Result<(), CliError> {
    let povm: QubitPovm = read_json(path)?;
    let report = povm.validate(tol);
    #[derive(Serialize)]
    struct Row<'a> {
        constraint: &'a str,
        magnitude: f64,
    }
    let rows: Vec<Row> = report
        .violations
        .iter()
        .map(|v| Row {
            constraint: &v.constraint,
            magnitude: v.magnitude,
        })
        .collect();
    sink.emit(&report, &rows)?;
    if report.valid {
        Ok(())
    } else {
        Err(CliError::Validation(report.to_string()))
    }
}

#[derive(Args, Debug)]
pub struct RadiusArgs {
    #[arg(long)]
    povm: PathBuf,
    /// Radius of the symmetric extension instead.
    #[arg(long)]
    sym: bool,
    /// Cross-check against a brute-force minimum over this many grid directions.
    #[arg(long, value_name = "GRID")]
    oracle: Option<usize>,
    /// Rotates the oracle lattice.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Serialize)]
struct RadiusReport {
    #[serde(flatten)]
    result: RadiusResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_dev: Option<f64>,
}

#[derive(Serialize)]
struct RadiusRow {
    value: f64,
    witness_c0: f64,
    witness_cx: f64,
    witness_cy: f64,
    witness_cz: f64,
    method: RadiusMethod,
    oracle_value: Option<f64>,
    oracle_dev: Option<f64>,
}

pub fn radius(args: &RadiusArgs, tol: f64, sink: &Sink) -> Result<(), CliError> {
    let povm: QubitPovm = read_json(&args.povm)?;
    let report = povm.validate(tol);
    if !report.valid {
        return Err(Error::InvalidPovm(report).into());
    }
    let (result, target) = if args.sym {
        let ext = povm.symmetric_extension()?;
        (compat_radius_sym(&povm)?, ext)
    } else {
        (compat_radius(&povm)?, povm)
    };
    let oracle_value = match args.oracle {
        Some(grid) => Some(sampled_min(
            &target,
            &OracleConfig {
                seed: args.seed,
                ..OracleConfig::with_grid(grid)
            },
        )?),
        None => None,
    };
    let oracle_dev = oracle_value.map(|o| (o - result.value).abs());
    let row = RadiusRow {
        value: result.value,
        witness_c0: result.witness_c0,
        witness_cx: result.witness_c.x,
        witness_cy: result.witness_c.y,
        witness_cz: result.witness_c.z,
        method: result.method,
        oracle_value,
        oracle_dev,
    };
    sink.emit(
        &RadiusReport {
            result,
            oracle_value,
            oracle_dev,
        },
        &[row],
    )
}

#[derive(Subcommand, Debug)]
pub enum ConstructKind {
    /// Regular polygon in the x-z plane with equal weights.
    Rotsym {
        #[arg(long)]
        n: usize,
    },
    /// Vertices of a Platonic solid with equal weights.
    Platonic {
        #[arg(long, value_parser = ["tetrahedron", "octahedron", "cube", "icosahedron", "dodecahedron"])]
        kind: String,
    },
    /// Minimum-energy point charges on the sphere; weights repaired when unbalanced.
    Thomson {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

pub fn construct(kind: &ConstructKind, sink: &Sink) -> Result<(), CliError> {
    match kind {
        ConstructKind::Rotsym { n } => {
            let p = rotsym_planar(*n)?;
            sink.emit(&p, &effect_rows(&p))
        }
        ConstructKind::Platonic { kind } => {
            let p = platonic(kind.parse::<PlatonicKind>()?);
            sink.emit(&p, &effect_rows(&p))
        }
        ConstructKind::Thomson { n, restarts, seed } => {
            let out = thomson(&ThomsonConfig {
                restarts: *restarts,
                seed: *seed,
                ..ThomsonConfig::new(*n)
            })?;
            if !out.uniform_weights {
                eprintln!(
                    "note: equal weights do not balance (centroid norm {:.3e}); weights were repaired",
                    out.centroid_norm
                );
            }
            sink.emit(&out, &effect_rows(&out.povm))
        }
    }
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long)]
    n: usize,
    /// Restrict to the x-z plane.
    #[arg(long)]
    planar: bool,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Refinement rounds per sample.
    #[arg(long, default_value_t = 100)]
    refine: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop starting new samples after this many milliseconds.
    #[arg(long)]
    time_budget_ms: Option<u64>,
    /// Also write the best-so-far history as CSV.
    #[arg(long, value_name = "FILE")]
    history: Option<PathBuf>,
}

pub fn search(args: &SearchArgs, sink: &Sink) -> Result<(), CliError> {
    let cfg = SearchConfig {
        n: args.n,
        planar: args.planar,
        samples: args.samples,
        refine_iters: args.refine,
        seed: args.seed,
        time_budget_ms: args.time_budget_ms,
    };
    let result = match maximize_radius(&cfg) {
        Err(Error::Infeasible(msg)) if cfg.time_budget_ms.is_some() => return Err(CliError::BudgetExhausted(msg)),
        r => r?,
    };
    if let Some(path) = &args.history {
        write_text(Some(path), &csv_text(&result.history)?)?;
    }
    #[derive(Serialize)]
    struct Row {
        n: usize,
        planar: bool,
        seed: u64,
        samples: usize,
        completed_samples: usize,
        budget_exhausted: bool,
        best_radius: f64,
    }
    let row = Row {
        n: cfg.n,
        planar: cfg.planar,
        seed: cfg.seed,
        samples: cfg.samples,
        completed_samples: result.completed_samples,
        budget_exhausted: result.budget_exhausted,
        best_radius: result.best_radius,
    };
    sink.emit(&result, &[row])?;
    if result.budget_exhausted {
        return Err(CliError::BudgetExhausted(format!(
            "{} of {} samples finished",
            result.completed_samples, cfg.samples
        )));
    }
    Ok(())
}

#[derive(Subcommand, Debug)]
pub enum LhsAction {
    /// Model for the Werner state of weight `r` from a parent POVM.
    Build {
        /// Parent POVM JSON.
        #[arg(long)]
        parent: PathBuf,
        #[arg(long)]
        r: f64,
        /// JSON array of unit Bloch vectors `[[x, y, z], ...]`.
        #[arg(long)]
        settings: PathBuf,
    },
    /// Check a model against the Werner assemblage of weight `r`.
    Verify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        r: f64,
    },
}

pub fn lhs(action: &LhsAction, tol: f64, sink: &Sink) -> Result<(), CliError> {
    match action {
        LhsAction::Build { parent, r, settings } => {
            let parent: QubitPovm = read_json(parent)?;
            let settings: Vec<UnitVec3> = read_json(settings)?;
            let model = build_lhs_werner(&parent, *r, &settings)?;
            #[derive(Serialize)]
            struct Row {
                index: usize,
                p: f64,
                hidden_x: f64,
                hidden_y: f64,
                hidden_z: f64,
            }
            let rows: Vec<Row> = model
                .p
                .iter()
                .zip(&model.hidden_bloch)
                .enumerate()
                .map(|(index, (&p, b))| Row {
                    index,
                    p,
                    hidden_x: b.x,
                    hidden_y: b.y,
                    hidden_z: b.z,
                })
                .collect();
            sink.emit(&model, &rows)
        }
        LhsAction::Verify { model, r } => {
            let model: LhsModel = read_json(model)?;
            let assemblage = werner_assemblage(*r, &model.settings)?;
            let check = verify_lhs(&model, &assemblage, tol)?;
            sink.emit(&check, &[check])?;
            if check.ok {
                Ok(())
            } else {
                Err(CliError::Validation(format!(
                    "model deviates from the assemblage by {:.3e} (tolerance {tol:.1e})",
                    check.max_dev
                )))
            }
        }
    }
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// Largest outcome count for the radius caps.
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    /// Noise parameters for the cost bounds (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.55, 0.58, 0.6, 0.62, 0.63])]
    r: Vec<f64>,
}

pub fn bounds(args: &BoundsArgs, sink: &Sink) -> Result<(), CliError> {
    let ns: Vec<usize> = (3..=args.n_max).collect();
    let reports = bound_reports(&ns, &args.r)?;
    #[derive(Serialize)]
    struct Row<'a> {
        name: &'a str,
        at: f64,
        value: f64,
        kind: BoundKind,
    }
    let rows: Vec<Row> = reports
        .iter()
        .map(|b| Row {
            name: &b.name,
            at: b.at,
            value: b.value,
            kind: b.kind,
        })
        .collect();
    sink.emit(&reports, &rows)
}

#[derive(Subcommand, Debug)]
pub enum ReproduceTable {
    /// Best radii per outcome count: closed forms, Thomson parents, searched parents.
    Table2 {
        /// Outcome counts (comma separated).
        #[arg(long, value_delimiter = ',', default_values_t = (3..=12).collect::<Vec<usize>>())]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5000)]
        samples: usize,
        /// Refinement rounds per sample.
        #[arg(long, default_value_t = 200)]
        refine: usize,
        /// Thomson restarts.
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        /// Largest `n` with a searched general (non-planar) cell.
        #[arg(long, default_value_t = 7)]
        general_max_n: usize,
        /// Leave the searched columns empty.
        #[arg(long)]
        skip_search: bool,
    },
    /// Radii of the five Platonic parents.
    Platonic,
    /// Threshold probes: trivial model, tetrahedron model, its boundary, and past every parent.
    Table1 {
        /// Thomson restarts for the parents checked in the last probe.
        #[arg(long, default_value_t = 20)]
        restarts: usize,
    },
}

#[derive(Serialize)]
struct Table2Row {
    n: usize,
    status: RowStatus,
    planar_symmetric: Option<f64>,
    planar_symmetric_ref: Option<f64>,
    planar_symmetric_dev: Option<f64>,
    planar_numeric: Option<f64>,
    planar_numeric_ref: Option<f64>,
    planar_numeric_dev: Option<f64>,
    thomson: Option<f64>,
    thomson_ref: Option<f64>,
    thomson_dev: Option<f64>,
    general_numeric: Option<f64>,
    general_numeric_ref: Option<f64>,
    general_numeric_dev: Option<f64>,
}

fn dev(value: Option<f64>, reference: Option<f64>) -> Option<f64> {
    Some((value? - reference?).abs())
}

fn table2_row(row: &TableRow) -> Table2Row {
    let published = published_row(row.n);
    let ps = published.map(|p| p.planar_symmetric);
    let pn = published.map(|p| p.planar_numeric);
    let th = published.and_then(|p| p.thomson);
    let gn = published.and_then(|p| p.general_numeric);
    Table2Row {
        n: row.n,
        status: row.status,
        planar_symmetric: row.planar_symmetric,
        planar_symmetric_ref: ps,
        planar_symmetric_dev: dev(row.planar_symmetric, ps),
        planar_numeric: row.planar_numeric,
        planar_numeric_ref: pn,
        planar_numeric_dev: dev(row.planar_numeric, pn),
        thomson: row.thomson,
        thomson_ref: th,
        thomson_dev: dev(row.thomson, th),
        general_numeric: row.general_numeric,
        general_numeric_ref: gn,
        general_numeric_dev: dev(row.general_numeric, gn),
    }
}

#[derive(Serialize)]
struct Table1Row<'a> {
    r: f64,
    parent: &'a str,
    result: &'static str,
    size: Option<usize>,
    max_dev: Option<f64>,
    best_radius: Option<f64>,
    direction_x: Option<f64>,
    direction_y: Option<f64>,
    direction_z: Option<f64>,
}

pub fn reproduce(table: &ReproduceTable, sink: &Sink) -> Result<(), CliError> {
    match table {
        ReproduceTable::Table2 {
            ns,
            seed,
            samples,
            refine,
            restarts,
            general_max_n,
            skip_search,
        } => {
            let budget = TableBudget {
                samples: *samples,
                refine_iters: *refine,
                thomson_restarts: *restarts,
                general_max_n: *general_max_n,
                skip_search: *skip_search,
            };
            let rows = reproduce_table2(ns, *seed, &budget)?;
            let flat: Vec<Table2Row> = rows.iter().map(table2_row).collect();
            sink.emit(&flat, &flat)
        }
        ReproduceTable::Platonic => {
            let rows = reproduce_platonic()?;
            sink.emit(&rows, &rows)
        }
        ReproduceTable::Table1 { restarts } => {
            let probes = table1_thresholds(*restarts)?;
            let rows: Vec<Table1Row> = probes
                .iter()
                .map(|p| {
                    let mut row = Table1Row {
                        r: p.r,
                        parent: &p.parent,
                        result: "",
                        size: None,
                        max_dev: None,
                        best_radius: None,
                        direction_x: None,
                        direction_y: None,
                        direction_z: None,
                    };
                    match &p.outcome {
                        ProbeOutcome::ModelBuilt { size, max_dev } => {
                            row.result = "model_built";
                            row.size = Some(*size);
                            row.max_dev = Some(*max_dev);
                        }
                        ProbeOutcome::Infeasible { direction } => {
                            row.result = "infeasible";
                            row.direction_x = Some(direction.x);
                            row.direction_y = Some(direction.y);
                            row.direction_z = Some(direction.z);
                        }
                        ProbeOutcome::BeyondAllParents { best_radius } => {
                            row.result = "beyond_all_parents";
                            row.best_radius = Some(*best_radius);
                        }
                    }
                    row
                })
                .collect();
            sink.emit(&probes, &rows)
        }
    }
}
