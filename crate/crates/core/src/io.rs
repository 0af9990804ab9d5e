//! File formats.
//!
//! Ensembles are JSON objects `{"dim": d, "states": [...]}` where each state
//! is an array of rows and each entry a `[re, im]` pair. POVMs use the same
//! layout under `"members"`. Iteration traces are CSV with the header
//! `round,alpha,info_nats,residual,K,accepted`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ensemble::{Ensemble, LogBase, Povm};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermMatrix};
use crate::optimizer::{OptimizationResult, TraceRow};

type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Serialize, Deserialize)]
struct EnsembleFile {
    dim: usize,
    states: Vec<MatrixRows>,
}

#[derive(Serialize, Deserialize)]
struct PovmFile {
    dim: usize,
    members: Vec<MatrixRows>,
}

fn to_rows(m: &HermMatrix) -> MatrixRows {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn from_rows(rows: &MatrixRows, dim: usize, what: &str, index: usize) -> Result<HermMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Parse(format!(
            "{what} {index} is not a {dim}x{dim} matrix"
        )));
    }
    let m = CMatrix::from_fn(dim, dim, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    });
    HermMatrix::new(m).map_err(|e| Error::Parse(format!("{what} {index}: {e}")))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn ensemble_to_json(e: &Ensemble) -> String {
    let file = EnsembleFile {
        dim: e.dim(),
        states: e.states().iter().map(to_rows).collect(),
    };
    serde_json::to_string_pretty(&file).expect("ensemble serializes")
}

/// Parses and validates an ensemble.
pub fn ensemble_from_json(text: &str) -> Result<Ensemble> {
    let file: EnsembleFile = parse(text)?;
    let states = file
        .states
        .iter()
        .enumerate()
        .map(|(i, rows)| from_rows(rows, file.dim, "state", i))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(states)
}

fn povm_file(m: &Povm) -> PovmFile {
    PovmFile {
        dim: m.dim(),
        members: m.members().iter().map(to_rows).collect(),
    }
}

pub fn povm_to_json(m: &Povm) -> String {
    serde_json::to_string_pretty(&povm_file(m)).expect("POVM serializes")
}

pub fn povm_from_json(text: &str) -> Result<Povm> {
    let file: PovmFile = parse(text)?;
    let members = file
        .members
        .iter()
        .enumerate()
        .map(|(i, rows)| from_rows(rows, file.dim, "member", i))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(members)
}

/// Floats in traces carry 17 significant digits.
fn sci17(x: f64) -> String {
    format!("{x:.16e}")
}

pub const TRACE_HEADER: &str = "round,alpha,info_nats,residual,K,accepted";

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.round,
            sci17(r.alpha),
            sci17(r.info),
            sci17(r.residual),
            r.k,
            u8::from(r.accepted)
        );
    }
    out
}

/// Result summary as JSON: final POVM, objective value in nats and in the
/// requested base, residual and round count.
pub fn result_to_json(result: &OptimizationResult, functional: &str, base: LogBase) -> String {
    let information = functional != "helstrom";
    let mut doc = json!({
        "functional": functional,
        "converged": result.converged,
        "rounds": result.rounds_used,
        "residual": result.residual,
        "K": result.povm.len(),
        "seed": result.seed,
        "povm": serde_json::to_value(povm_file(&result.povm)).expect("POVM serializes"),
    });
    let obj = doc.as_object_mut().expect("object literal");
    if information {
        obj.insert("info_nats".into(), Value::from(result.info_value));
        obj.insert(
            "info".into(),
            Value::from(base.from_nats(result.info_value)),
        );
        obj.insert("unit".into(), Value::from(base.unit()));
    } else {
        obj.insert("success_rate".into(), Value::from(result.info_value));
    }
    serde_json::to_string_pretty(&doc).expect("result serializes")
}
