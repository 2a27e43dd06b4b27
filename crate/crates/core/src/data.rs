//! Bundled reference data: explicit maximally entangled states, their full
//! enumerator tables, existence-scan annotations, and the grids behind the
//! tripartite constructions.  Everything ships inside the binary via
//! `include_str!`, so lookups never touch the filesystem.

use serde_json::Value;

use crate::ame::{Annotation, CellStatus, GridSolution};
use crate::error::{CoreError, CoreResult};
use crate::hilbert::MixedState;
use crate::multiset::DimensionMultiset;
use crate::rational::{rational_from_str, Rational};

/// Names of the bundled explicit states.
pub const STATE_NAMES: [&str; 6] = ["ame223", "ame233", "ame234", "ame334", "ame344", "ame2333"];

/// Names of the bundled tripartite grids.
pub const GRID_NAMES: [&str; 5] = ["ame223", "ame233", "ame234", "ame334", "ame344"];

fn state_text(name: &str) -> CoreResult<&'static str> {
    Ok(match name {
        "ame223" => include_str!("../data/states/ame223.json"),
        "ame233" => include_str!("../data/states/ame233.json"),
        "ame234" => include_str!("../data/states/ame234.json"),
        "ame334" => include_str!("../data/states/ame334.json"),
        "ame344" => include_str!("../data/states/ame344.json"),
        "ame2333" => include_str!("../data/states/ame2333.json"),
        _ => return Err(CoreError::Parse(format!("unknown bundled state {name:?}"))),
    })
}

/// Loads one of the bundled states by name.
pub fn bundled_state(name: &str) -> CoreResult<MixedState> {
    MixedState::from_json_str(state_text(name)?)
}

/// One row of a bundled enumerator table: every family's exact value for a
/// single dimension multiset.
#[derive(Clone, Debug)]
pub struct ExpectedRow {
    pub multiset: DimensionMultiset,
    pub a: Rational,
    pub b: Rational,
    pub shadow: Rational,
    pub a_prime: Rational,
    pub b_prime: Rational,
    pub cal_a: Rational,
    pub cal_b: Rational,
}

fn table_text(name: &str) -> CoreResult<&'static str> {
    Ok(match name {
        "ame223" => include_str!("../data/expected/ame223.json"),
        "ame233" => include_str!("../data/expected/ame233.json"),
        "ame234" => include_str!("../data/expected/ame234.json"),
        "ame334" => include_str!("../data/expected/ame334.json"),
        "ame344" => include_str!("../data/expected/ame344.json"),
        "ame2333" => include_str!("../data/expected/ame2333.json"),
        _ => return Err(CoreError::Parse(format!("unknown bundled table {name:?}"))),
    })
}

/// Loads the reference enumerator table for a bundled state, rows in
/// canonical sub-multiset order.
pub fn expected_table(name: &str) -> CoreResult<Vec<ExpectedRow>> {
    let value: Value = serde_json::from_str(table_text(name)?)?;
    let rows = value
        .get("rows")
        .and_then(|r| r.as_array())
        .ok_or_else(|| CoreError::Parse(format!("table {name:?} lacks a rows array")))?;
    rows.iter()
        .map(|row| {
            let field = |key: &str| -> CoreResult<Rational> {
                let text = row.get(key).and_then(|v| v.as_str()).ok_or_else(|| {
                    CoreError::Parse(format!("table {name:?} row lacks {key:?}"))
                })?;
                rational_from_str(text)
            };
            let multiset = row
                .get("multiset")
                .ok_or_else(|| CoreError::Parse(format!("table {name:?} row lacks a multiset")))?;
            Ok(ExpectedRow {
                multiset: DimensionMultiset::from_json(multiset)?,
                a: field("a")?,
                b: field("b")?,
                shadow: field("s")?,
                a_prime: field("a_prime")?,
                b_prime: field("b_prime")?,
                cal_a: field("cal_a")?,
                cal_b: field("cal_b")?,
            })
        })
        .collect()
}

/// Known-state annotations for a scan over the given dimension pair.  Pairs
/// without a bundled file yield an empty list.
pub fn annotations(d_small: u32, d_large: u32) -> CoreResult<Vec<Annotation>> {
    let text = match (d_small, d_large) {
        (2, 3) => include_str!("../data/annotations/scan_2_3.json"),
        (3, 4) => include_str!("../data/annotations/scan_3_4.json"),
        _ => return Ok(Vec::new()),
    };
    let value: Value = serde_json::from_str(text)?;
    let cells = value
        .get("cells")
        .and_then(|c| c.as_array())
        .ok_or_else(|| CoreError::Parse("annotation file lacks a cells array".into()))?;
    cells
        .iter()
        .map(|cell| {
            let count = |key: &str| -> CoreResult<u32> {
                cell.get(key)
                    .and_then(|v| v.as_u64())
                    .and_then(|v| u32::try_from(v).ok())
                    .ok_or_else(|| CoreError::Parse(format!("annotation lacks integer {key:?}")))
            };
            let status = cell
                .get("status")
                .and_then(|v| v.as_str())
                .ok_or_else(|| CoreError::Parse("annotation lacks a status".into()))?;
            let note = cell
                .get("note")
                .and_then(|v| v.as_str())
                .unwrap_or_default()
                .to_string();
            Ok(Annotation {
                n_small: count("n_small")?,
                n_large: count("n_large")?,
                status: CellStatus::parse(status)?,
                note,
            })
        })
        .collect()
}

fn grid_text(name: &str) -> CoreResult<&'static str> {
    Ok(match name {
        "ame223" => include_str!("../data/grids/ame223.json"),
        "ame233" => include_str!("../data/grids/ame233.json"),
        "ame234" => include_str!("../data/grids/ame234.json"),
        "ame334" => include_str!("../data/grids/ame334.json"),
        "ame344" => include_str!("../data/grids/ame344.json"),
        _ => return Err(CoreError::Parse(format!("unknown bundled grid {name:?}"))),
    })
}

/// Loads the grid behind one of the bundled tripartite states.
pub fn bundled_grid(name: &str) -> CoreResult<GridSolution> {
    GridSolution::from_json_str(grid_text(name)?)
}
