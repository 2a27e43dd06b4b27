//! Maximal entanglement: closed-form profiles, existence scans, and the
//! tripartite grid constructor.
//!
//! A pure state is absolutely maximally entangled when every subsystem `S`
//! with `dim S <= sqrt(dim[n])` is maximally mixed.  That condition pins the
//! whole enumerator profile down, so each family can be evaluated in closed
//! form from the dimension list alone, without a state vector.  A negative
//! closed-form shadow coefficient then rules out existence outright, which is
//! what [`ame_scan`] exploits cell by cell.  For three parties the converse
//! direction is constructive: a weighted label grid satisfying four balance
//! rules yields an explicit state, found here by [`grid_construct`].

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::data;
use crate::enumerators::{EnumeratorProfile, Family};
use crate::error::{CoreError, CoreResult};
use crate::hilbert::{DensityOperator, IndexSubset, MixedState};
use crate::lp::{solve_feasibility, LinearConstraint, LpProblem, LpVerdict};
use crate::multiset::{binomial, sub_multisets, DimensionMultiset, DimensionSpec};
use crate::rational::{big_to_rational, rational_from_str, rational_to_f64, rational_to_string, Rational};
use crate::transforms::krawtchouk;

/// Largest party count accepted by [`ame_scan`].
pub const MAX_SCAN_PARTIES: u32 = 16;

/// Candidate budget for the grid labeling search.
pub const GRID_NODE_BUDGET: u64 = 10_000_000;

/// Largest tolerated entry deviation between a reduced state and the
/// maximally mixed one in [`ame_verify`].
pub const AME_TOL: f64 = 1e-9;

/// A hypothetical maximally entangled system over a fixed dimension list.
///
/// Stores the squared balanced-cut bound so that "`dim S` at most
/// `sqrt(dim[n])`" can be tested without leaving integer arithmetic.
#[derive(Clone, Debug)]
pub struct AmeSpec {
    spec: DimensionSpec,
    delta_sq: BigUint,
}

impl AmeSpec {
    pub fn new(spec: DimensionSpec) -> Self {
        let delta_sq = spec.total_dim();
        Self { spec, delta_sq }
    }

    pub fn spec(&self) -> &DimensionSpec {
        &self.spec
    }

    /// Square of the balanced-cut bound, i.e. the total dimension.
    pub fn delta_sq(&self) -> &BigUint {
        &self.delta_sq
    }

    /// Whether `dim w <= sqrt(dim[n])`, tested as `(dim w)^2 <= dim[n]`.
    pub fn within_delta(&self, w: &DimensionMultiset) -> bool {
        let dim = w.dim();
        &dim * &dim <= self.delta_sq
    }

    /// Schmidt rank across the cut separating `w` from its complement:
    /// `min(dim w, dim[n] / dim w)`.
    pub fn cut_rank(&self, w: &DimensionMultiset) -> Rational {
        let dim = w.dim();
        if &dim * &dim <= self.delta_sq {
            big_to_rational(&dim)
        } else {
            Rational::new(BigInt::from(self.delta_sq.clone()), BigInt::from(dim))
        }
    }
}

/// Number of index subsets whose dimension multiset equals `w`.
fn placements(total: &DimensionMultiset, w: &DimensionMultiset) -> Rational {
    let mut count = BigUint::one();
    for (d, m_w) in w.iter() {
        count *= binomial(u64::from(total.multiplicity(d)), u64::from(m_w));
    }
    big_to_rational(&count)
}

/// Unitary enumerator profile forced on any maximally entangled state:
/// `A'_w = cut_rank(w)^{-1} prod_d binom(m_d(N), m_d(w))`.
pub fn ame_unitary_profile(spec: &DimensionSpec) -> EnumeratorProfile {
    let ame = AmeSpec::new(spec.clone());
    let total = spec.multiset();
    let mut values = BTreeMap::new();
    for w in sub_multisets(&total) {
        let value = placements(&total, &w) / ame.cut_rank(&w);
        values.insert(w, value);
    }
    EnumeratorProfile::new(Family::APrime, spec.clone(), values).expect("one value per sub-multiset")
}

/// Shor-Laflamme profile forced on any maximally entangled state, via the
/// alternating sum over sub-multisets of each `w`.  Every `w` with
/// `(dim w)^2 <= dim[n]` comes out as zero.
pub fn ame_a_profile(spec: &DimensionSpec) -> EnumeratorProfile {
    let ame = AmeSpec::new(spec.clone());
    let total = spec.multiset();
    let mut values = BTreeMap::new();
    for w in sub_multisets(&total) {
        let mut sum = Rational::zero();
        for v in sub_multisets(&w) {
            let mut term = Rational::one();
            for (d, m_w) in w.iter() {
                let m_v = v.multiplicity(d);
                let factor = binomial(u64::from(m_w), u64::from(m_v)) * BigUint::from(d).pow(m_v);
                term *= big_to_rational(&factor);
            }
            if (w.cardinality() - v.cardinality()) % 2 == 1 {
                term = -term;
            }
            sum += term / ame.cut_rank(&v);
        }
        values.insert(w.clone(), placements(&total, &w) * sum);
    }
    EnumeratorProfile::new(Family::A, spec.clone(), values).expect("one value per sub-multiset")
}

/// Shadow profile forced on any maximally entangled state, as a Krawtchouk
/// sum over all sub-multisets of the full system.
pub fn ame_shadow_profile(spec: &DimensionSpec) -> EnumeratorProfile {
    let ame = AmeSpec::new(spec.clone());
    let total = spec.multiset();
    let subs = sub_multisets(&total);
    let mut values = BTreeMap::new();
    for w in &subs {
        let mut sum = Rational::zero();
        for v in &subs {
            let mut term = Rational::one();
            for (d, m_n) in total.iter() {
                let j = m_n - w.multiplicity(d);
                let k = v.multiplicity(d);
                let coeff =
                    krawtchouk(j, k, m_n) * BigInt::from(binomial(u64::from(m_n), u64::from(k)));
                term *= Rational::from_integer(coeff);
            }
            sum += term / ame.cut_rank(v);
        }
        values.insert(w.clone(), sum);
    }
    EnumeratorProfile::new(Family::Shadow, spec.clone(), values).expect("one value per sub-multiset")
}

/// Existence verdict for one cell of a two-dimension scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellStatus {
    /// Some closed-form shadow coefficient is negative; no such state exists.
    Forbidden,
    /// All closed-form shadow coefficients are nonnegative.
    Open,
    /// An explicit state is known.
    KnownExists,
    /// Ruled out by arguments beyond shadow positivity.
    KnownNotExists,
}

impl CellStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Forbidden => "forbidden",
            CellStatus::Open => "open",
            CellStatus::KnownExists => "known_exists",
            CellStatus::KnownNotExists => "known_not_exists",
        }
    }

    pub fn parse(s: &str) -> CoreResult<Self> {
        match s {
            "forbidden" => Ok(CellStatus::Forbidden),
            "open" => Ok(CellStatus::Open),
            "known_exists" => Ok(CellStatus::KnownExists),
            "known_not_exists" => Ok(CellStatus::KnownNotExists),
            other => Err(CoreError::Parse(format!("unknown cell status {other:?}"))),
        }
    }
}

impl std::fmt::Display for CellStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One cell of an existence scan over mixed party counts.
#[derive(Clone, Debug)]
pub struct HeatmapCell {
    pub n_small: u32,
    pub n_large: u32,
    pub status: CellStatus,
    /// First multiset with a negative shadow coefficient, when forbidden.
    pub witness: Option<DimensionMultiset>,
    pub note: Option<String>,
}

/// Externally known existence fact merged into a scan.
#[derive(Clone, Debug)]
pub struct Annotation {
    pub n_small: u32,
    pub n_large: u32,
    pub status: CellStatus,
    pub note: String,
}

/// Scans every mixture of `n_small` parties of dimension `d_small` and
/// `n_large` parties of dimension `d_large` with `1 <= n_small + n_large <=
/// max_parties`.  A cell is forbidden as soon as one closed-form shadow
/// coefficient is negative; the first offending multiset in canonical order
/// is kept as a witness.  Bundled annotations upgrade open cells to known
/// results and attach notes.
pub fn ame_scan(d_small: u32, d_large: u32, max_parties: u32) -> CoreResult<Vec<HeatmapCell>> {
    if d_small < 2 || d_small >= d_large {
        return Err(CoreError::Hypothesis(format!(
            "scan dimensions must satisfy 2 <= d_small < d_large, got ({d_small}, {d_large})"
        )));
    }
    if d_large > 36 {
        return Err(CoreError::InvalidDimension(format!(
            "scan dimension {d_large} exceeds 36"
        )));
    }
    if max_parties > MAX_SCAN_PARTIES {
        return Err(CoreError::TooLarge(format!(
            "{max_parties} parties exceed the scan limit {MAX_SCAN_PARTIES}"
        )));
    }
    let mut coords = Vec::new();
    for n_small in 0..=max_parties {
        for n_large in 0..=max_parties {
            let parties = n_small + n_large;
            if parties >= 1 && parties <= max_parties {
                coords.push((n_small, n_large));
            }
        }
    }
    let mut cells: Vec<HeatmapCell> = coords
        .par_iter()
        .map(|&(n_small, n_large)| {
            let mut dims = vec![d_small; n_small as usize];
            dims.extend(std::iter::repeat(d_large).take(n_large as usize));
            let spec = DimensionSpec::new(dims).expect("scan dimensions already validated");
            let shadow = ame_shadow_profile(&spec);
            let witness = shadow.rows().into_iter().find(|(_, s)| s.is_negative());
            match witness {
                Some((w, _)) => HeatmapCell {
                    n_small,
                    n_large,
                    status: CellStatus::Forbidden,
                    witness: Some(w),
                    note: None,
                },
                None => HeatmapCell {
                    n_small,
                    n_large,
                    status: CellStatus::Open,
                    witness: None,
                    note: None,
                },
            }
        })
        .collect();
    for ann in data::annotations(d_small, d_large)? {
        let hit = cells
            .iter_mut()
            .find(|c| c.n_small == ann.n_small && c.n_large == ann.n_large);
        if let Some(cell) = hit {
            if cell.status == CellStatus::Open {
                cell.status = ann.status;
            }
            cell.note = Some(ann.note.clone());
        }
    }
    Ok(cells)
}

/// CSV rendering of a scan: `n_small,n_large,status,witness` per cell.
pub fn scan_to_csv(cells: &[HeatmapCell]) -> String {
    let mut out = String::from("n_small,n_large,status,witness\n");
    for cell in cells {
        let witness = cell
            .witness
            .as_ref()
            .map(|w| w.to_elements_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            cell.n_small,
            cell.n_large,
            cell.status.as_str(),
            witness
        ));
    }
    out
}

/// A weighted, labeled `d1 x d2` grid describing a tripartite state.
///
/// Cell `(j, k)` carries a nonnegative weight and, when the weight is
/// nonzero, a partition label below `d3`.  Rows sum to `1/d1`, columns to
/// `1/d2`, each label class to `1/d3`, and no label repeats within a row or
/// column.  The encoded state puts amplitude `phase * sqrt(weight)` on
/// `|j, k, label>`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSolution {
    pub d1: u32,
    pub d2: u32,
    pub d3: u32,
    pub weights: Vec<Vec<Rational>>,
    pub labels: Vec<Vec<Option<u32>>>,
    pub phases: Vec<Vec<Complex64>>,
}

impl GridSolution {
    /// Assembles a grid with all phases `+1` and checks every rule.
    pub fn new(
        d1: u32,
        d2: u32,
        d3: u32,
        weights: Vec<Vec<Rational>>,
        labels: Vec<Vec<Option<u32>>>,
    ) -> CoreResult<Self> {
        let phases = vec![vec![Complex64::new(1.0, 0.0); d2 as usize]; d1 as usize];
        let grid = Self { d1, d2, d3, weights, labels, phases };
        grid.validate()?;
        Ok(grid)
    }

    /// Checks the side hypothesis, array shapes, and the four balance rules.
    pub fn validate(&self) -> CoreResult<()> {
        if self.d1 == 0 || self.d2 == 0 || self.d3 == 0 {
            return Err(CoreError::Hypothesis("grid sides must be positive".into()));
        }
        let (p1, p2, p3) = (u64::from(self.d1), u64::from(self.d2), u64::from(self.d3));
        if !(p1 <= p2 && p2 <= p1 * p3 && p3 <= p1 * p2) {
            return Err(CoreError::Hypothesis(format!(
                "({}, {}, {}) violates d1 <= d2, d2 <= d1*d3, d3 <= d1*d2",
                self.d1, self.d2, self.d3
            )));
        }
        let (rows, cols) = (self.d1 as usize, self.d2 as usize);
        let shaped = self.weights.len() == rows
            && self.labels.len() == rows
            && self.phases.len() == rows
            && self.weights.iter().all(|r| r.len() == cols)
            && self.labels.iter().all(|r| r.len() == cols)
            && self.phases.iter().all(|r| r.len() == cols);
        if !shaped {
            return Err(CoreError::DimensionMismatch(format!(
                "grid arrays must all be {rows} x {cols}"
            )));
        }
        let mut part_sums = vec![Rational::zero(); self.d3 as usize];
        for j in 0..rows {
            for k in 0..cols {
                let w = &self.weights[j][k];
                if w.is_negative() {
                    return Err(CoreError::InvalidState(format!(
                        "negative weight at ({j}, {k})"
                    )));
                }
                match self.labels[j][k] {
                    Some(t) if t >= self.d3 => {
                        return Err(CoreError::InvalidState(format!(
                            "label {t} at ({j}, {k}) is outside 0..{}",
                            self.d3
                        )));
                    }
                    Some(t) => {
                        if w.is_zero() {
                            return Err(CoreError::InvalidState(format!(
                                "labeled cell ({j}, {k}) has zero weight"
                            )));
                        }
                        part_sums[t as usize] += w;
                    }
                    None => {
                        if !w.is_zero() {
                            return Err(CoreError::InvalidState(format!(
                                "unlabeled cell ({j}, {k}) has nonzero weight"
                            )));
                        }
                    }
                }
                if (self.phases[j][k].norm() - 1.0).abs() > AME_TOL {
                    return Err(CoreError::InvalidState(format!(
                        "phase at ({j}, {k}) is not unimodular"
                    )));
                }
            }
        }
        let row_target = Rational::new(BigInt::one(), BigInt::from(self.d1));
        for (j, row) in self.weights.iter().enumerate() {
            let sum: Rational = row.iter().sum();
            if sum != row_target {
                return Err(CoreError::InvalidState(format!(
                    "row {j} sums to {} instead of 1/{}",
                    rational_to_string(&sum),
                    self.d1
                )));
            }
        }
        let col_target = Rational::new(BigInt::one(), BigInt::from(self.d2));
        for k in 0..cols {
            let sum: Rational = (0..rows).map(|j| self.weights[j][k].clone()).sum();
            if sum != col_target {
                return Err(CoreError::InvalidState(format!(
                    "column {k} sums to {} instead of 1/{}",
                    rational_to_string(&sum),
                    self.d2
                )));
            }
        }
        let part_target = Rational::new(BigInt::one(), BigInt::from(self.d3));
        for (t, sum) in part_sums.iter().enumerate() {
            if sum != &part_target {
                return Err(CoreError::InvalidState(format!(
                    "partition {t} sums to {} instead of 1/{}",
                    rational_to_string(sum),
                    self.d3
                )));
            }
        }
        for j in 0..rows {
            let mut seen: Vec<u32> = self.labels[j].iter().flatten().copied().collect();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != self.labels[j].iter().flatten().count() {
                return Err(CoreError::InvalidState(format!("row {j} repeats a label")));
            }
        }
        for k in 0..cols {
            let mut seen: Vec<u32> = (0..rows).filter_map(|j| self.labels[j][k]).collect();
            let before = seen.len();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != before {
                return Err(CoreError::InvalidState(format!("column {k} repeats a label")));
            }
        }
        Ok(())
    }

    pub fn to_json_value(&self) -> Value {
        let weights: Vec<Value> = self
            .weights
            .iter()
            .map(|row| {
                Value::Array(row.iter().map(|w| Value::from(rational_to_string(w))).collect())
            })
            .collect();
        let labels: Vec<Value> = self
            .labels
            .iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|cell| match cell {
                            Some(t) => Value::from(*t),
                            None => Value::Null,
                        })
                        .collect(),
                )
            })
            .collect();
        let mut value = json!({
            "d1": self.d1,
            "d2": self.d2,
            "d3": self.d3,
            "weights": weights,
            "labels": labels,
        });
        let trivial = Complex64::new(1.0, 0.0);
        if self.phases.iter().flatten().any(|p| *p != trivial) {
            let phases: Vec<Value> = self
                .phases
                .iter()
                .map(|row| {
                    Value::Array(row.iter().map(|p| json!([p.re, p.im])).collect())
                })
                .collect();
            value["phases"] = Value::Array(phases);
        }
        value
    }

    pub fn from_json_value(value: &Value) -> CoreResult<Self> {
        let side = |key: &str| -> CoreResult<u32> {
            value
                .get(key)
                .and_then(|v| v.as_u64())
                .and_then(|v| u32::try_from(v).ok())
                .ok_or_else(|| CoreError::Parse(format!("grid JSON lacks integer {key:?}")))
        };
        let (d1, d2, d3) = (side("d1")?, side("d2")?, side("d3")?);
        let rows_of = |key: &str| -> CoreResult<&Vec<Value>> {
            value
                .get(key)
                .and_then(|v| v.as_array())
                .ok_or_else(|| CoreError::Parse(format!("grid JSON lacks array {key:?}")))
        };
        let mut weights = Vec::new();
        for row in rows_of("weights")? {
            let cells = row
                .as_array()
                .ok_or_else(|| CoreError::Parse("weight row must be an array".into()))?;
            let mut parsed = Vec::new();
            for cell in cells {
                let text = cell
                    .as_str()
                    .ok_or_else(|| CoreError::Parse(format!("bad weight entry {cell}")))?;
                parsed.push(rational_from_str(text)?);
            }
            weights.push(parsed);
        }
        let mut labels = Vec::new();
        for row in rows_of("labels")? {
            let cells = row
                .as_array()
                .ok_or_else(|| CoreError::Parse("label row must be an array".into()))?;
            let mut parsed = Vec::new();
            for cell in cells {
                let label = match cell {
                    Value::Null => None,
                    other => Some(
                        other
                            .as_u64()
                            .and_then(|v| u32::try_from(v).ok())
                            .ok_or_else(|| {
                                CoreError::Parse(format!("bad label entry {other}"))
                            })?,
                    ),
                };
                parsed.push(label);
            }
            labels.push(parsed);
        }
        let phases = match value.get("phases") {
            None => vec![vec![Complex64::new(1.0, 0.0); d2 as usize]; d1 as usize],
            Some(raw) => {
                let rows = raw
                    .as_array()
                    .ok_or_else(|| CoreError::Parse("phases must be an array".into()))?;
                let mut parsed_rows = Vec::new();
                for row in rows {
                    let cells = row
                        .as_array()
                        .ok_or_else(|| CoreError::Parse("phase row must be an array".into()))?;
                    let mut parsed = Vec::new();
                    for cell in cells {
                        let pair = cell.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                            CoreError::Parse(format!("phase entry {cell} is not [re, im]"))
                        })?;
                        let re = pair[0].as_f64().unwrap_or(f64::NAN);
                        let im = pair[1].as_f64().unwrap_or(f64::NAN);
                        parsed.push(Complex64::new(re, im));
                    }
                    parsed_rows.push(parsed);
                }
                parsed_rows
            }
        };
        let grid = Self { d1, d2, d3, weights, labels, phases };
        grid.validate()?;
        Ok(grid)
    }

    pub fn from_json_str(s: &str) -> CoreResult<Self> {
        let value: Value = serde_json::from_str(s)?;
        Self::from_json_value(&value)
    }
}

struct GridSearch {
    d1: usize,
    d2: usize,
    d3: u32,
    labels: Vec<Vec<Option<u32>>>,
    budget: u64,
}

impl GridSearch {
    fn place(&mut self, i: usize, j: usize, max_used: u32) -> CoreResult<Option<GridSolution>> {
        let remaining = ((self.d1 - 1 - i) * self.d2 + (self.d2 - 1 - j)) as u32;
        let row_has_label = self.labels[i][..j].iter().any(|c| c.is_some());
        let col_has_label = (0..i).any(|r| self.labels[r][j].is_some());
        let must_label =
            (j + 1 == self.d2 && !row_has_label) || (i + 1 == self.d1 && !col_has_label);

        let mut candidates: Vec<Option<u32>> = Vec::new();
        for t in 0..=max_used {
            let in_row = self.labels[i][..j].contains(&Some(t));
            let in_col = (0..i).any(|r| self.labels[r][j] == Some(t));
            if !in_row && !in_col {
                candidates.push(Some(t));
            }
        }
        if max_used + 1 < self.d3 {
            candidates.push(Some(max_used + 1));
        }
        if !must_label {
            candidates.push(None);
        }

        for cand in candidates {
            if self.budget == 0 {
                return Err(CoreError::TooLarge(format!(
                    "grid search exceeded {GRID_NODE_BUDGET} candidates"
                )));
            }
            self.budget -= 1;
            let new_max = match cand {
                Some(t) if t > max_used => t,
                _ => max_used,
            };
            if self.d3 - (new_max + 1) > remaining {
                continue;
            }
            self.labels[i][j] = cand;
            let found = if j + 1 == self.d2 {
                if i + 1 == self.d1 {
                    self.finish(new_max)?
                } else {
                    self.place(i + 1, 0, new_max)?
                }
            } else {
                self.place(i, j + 1, new_max)?
            };
            if found.is_some() {
                return Ok(found);
            }
        }
        self.labels[i][j] = None;
        Ok(None)
    }

    fn finish(&mut self, max_used: u32) -> CoreResult<Option<GridSolution>> {
        if max_used + 1 != self.d3 {
            return Ok(None);
        }
        self.solve_weights()
    }

    /// Solves for exact weights under the current complete labeling.  Rows,
    /// columns, and partitions each pin their sums; nonnegativity is implicit
    /// in the solver.  Cells solved to zero weight are returned unlabeled.
    fn solve_weights(&self) -> CoreResult<Option<GridSolution>> {
        let mut cells = Vec::new();
        for i in 0..self.d1 {
            for j in 0..self.d2 {
                if let Some(t) = self.labels[i][j] {
                    cells.push((i, j, t));
                }
            }
        }
        let mut problem = LpProblem {
            var_names: cells.iter().map(|&(i, j, _)| format!("a[{i},{j}]")).collect(),
            ..LpProblem::default()
        };
        for i in 0..self.d1 {
            problem.equalities.push(LinearConstraint {
                label: format!("row {i}"),
                coeffs: indicator(&cells, |&(ci, _, _)| ci == i),
                rhs: Rational::new(BigInt::one(), BigInt::from(self.d1 as u64)),
            });
        }
        for j in 0..self.d2 {
            problem.equalities.push(LinearConstraint {
                label: format!("col {j}"),
                coeffs: indicator(&cells, |&(_, cj, _)| cj == j),
                rhs: Rational::new(BigInt::one(), BigInt::from(self.d2 as u64)),
            });
        }
        for t in 0..self.d3 {
            problem.equalities.push(LinearConstraint {
                label: format!("part {t}"),
                coeffs: indicator(&cells, |&(_, _, ct)| ct == t),
                rhs: Rational::new(BigInt::one(), BigInt::from(self.d3)),
            });
        }
        match solve_feasibility(&problem)? {
            LpVerdict::Infeasible { .. } => Ok(None),
            LpVerdict::Feasible { point } => {
                let mut weights = vec![vec![Rational::zero(); self.d2]; self.d1];
                let mut labels = vec![vec![None; self.d2]; self.d1];
                for (pos, &(i, j, t)) in cells.iter().enumerate() {
                    if !point[pos].is_zero() {
                        weights[i][j] = point[pos].clone();
                        labels[i][j] = Some(t);
                    }
                }
                let grid = GridSolution {
                    d1: self.d1 as u32,
                    d2: self.d2 as u32,
                    d3: self.d3,
                    weights,
                    labels,
                    phases: vec![vec![Complex64::new(1.0, 0.0); self.d2]; self.d1],
                };
                grid.validate()?;
                Ok(Some(grid))
            }
        }
    }
}

fn indicator<F>(cells: &[(usize, usize, u32)], pred: F) -> Vec<Rational>
where
    F: Fn(&(usize, usize, u32)) -> bool,
{
    cells
        .iter()
        .map(|cell| if pred(cell) { Rational::one() } else { Rational::zero() })
        .collect()
}

/// Searches for a grid on sides `(d1, d2, d3)`.
///
/// Labelings are enumerated depth-first in a canonical order: row 0 is fixed
/// to the labels `0..r` followed by empty cells, densest `r` first, and every
/// later cell tries existing labels in ascending order, then one fresh label,
/// then empty.  Each complete labeling that uses all `d3` labels is handed to
/// the exact solver; the first feasible one wins, so the result is
/// deterministic.  `Ok(None)` means the whole space was exhausted.
pub fn grid_construct(d1: u32, d2: u32, d3: u32) -> CoreResult<Option<GridSolution>> {
    if d1 == 0 || d2 == 0 || d3 == 0 {
        return Err(CoreError::Hypothesis("grid sides must be positive".into()));
    }
    let (p1, p2, p3) = (u64::from(d1), u64::from(d2), u64::from(d3));
    if !(p1 <= p2 && p2 <= p1 * p3 && p3 <= p1 * p2) {
        return Err(CoreError::Hypothesis(format!(
            "({d1}, {d2}, {d3}) violates d1 <= d2, d2 <= d1*d3, d3 <= d1*d2"
        )));
    }
    let mut search = GridSearch {
        d1: d1 as usize,
        d2: d2 as usize,
        d3,
        labels: vec![vec![None; d2 as usize]; d1 as usize],
        budget: GRID_NODE_BUDGET,
    };
    for r in (1..=d2.min(d3) as usize).rev() {
        for k in 0..search.d2 {
            search.labels[0][k] = if k < r { Some(k as u32) } else { None };
        }
        let found = if search.d1 == 1 {
            if r == search.d2 {
                search.finish(r as u32 - 1)?
            } else {
                None
            }
        } else {
            search.place(1, 0, r as u32 - 1)?
        };
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Expands a grid into the tripartite state it encodes: amplitude
/// `phase * sqrt(weight)` on `|j, k, label>` for every labeled cell.
pub fn grid_to_state(grid: &GridSolution) -> CoreResult<MixedState> {
    grid.validate()?;
    let spec = DimensionSpec::new_allowing_unit(vec![grid.d1, grid.d2, grid.d3])?;
    let dim = spec.total_dim_usize()?;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for j in 0..grid.d1 as usize {
        for k in 0..grid.d2 as usize {
            if let Some(i) = grid.labels[j][k] {
                let index = (j * grid.d2 as usize + k) * grid.d3 as usize + i as usize;
                let magnitude = rational_to_f64(&grid.weights[j][k]).sqrt();
                amps[index] = grid.phases[j][k] * magnitude;
            }
        }
    }
    MixedState::new(spec, amps)
}

/// Outcome of checking every balanced-or-smaller subsystem of a pure state.
#[derive(Clone, Debug)]
pub struct AmeVerifyReport {
    pub is_ame: bool,
    pub failing_subsets: Vec<IndexSubset>,
    /// Number of subsystems checked.
    pub checked: usize,
    /// Largest entry deviation seen against the maximally mixed state.
    pub max_deviation: f64,
}

/// Checks that every subsystem `S` with `(dim S)^2 <= dim[n]` is maximally
/// mixed to within [`AME_TOL`].
pub fn ame_verify(psi: &MixedState) -> CoreResult<AmeVerifyReport> {
    let spec = psi.spec();
    let ame = AmeSpec::new(spec.clone());
    let mut failing = Vec::new();
    let mut checked = 0;
    let mut max_deviation = 0.0f64;
    for subset in IndexSubset::all_subsets(spec.len()) {
        if subset.is_empty() || !ame.within_delta(&subset.multiset(spec)) {
            continue;
        }
        let rho = psi.reduced_density(&subset)?;
        let dims = subset
            .sites()
            .iter()
            .map(|&site| spec.dims()[site - 1])
            .collect();
        let mixed = DensityOperator::maximally_mixed(dims);
        let deviation = rho.max_deviation(mixed.matrix());
        checked += 1;
        max_deviation = max_deviation.max(deviation);
        if deviation > AME_TOL {
            failing.push(subset);
        }
    }
    Ok(AmeVerifyReport {
        is_ame: failing.is_empty(),
        failing_subsets: failing,
        checked,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};
    use crate::transforms::{a_unitary_from_a, s_from_a};

    fn spec(dims: &[u32]) -> DimensionSpec {
        DimensionSpec::new(dims.to_vec()).unwrap()
    }

    fn ms(elements: &[u32]) -> DimensionMultiset {
        DimensionMultiset::from_elements(elements)
    }

    #[test]
    fn unitary_profile_anchors() {
        let profile = ame_unitary_profile(&spec(&[2, 3, 3, 3]));
        assert_eq!(profile.value(&ms(&[])).unwrap(), &rat_int(1));
        assert_eq!(profile.value(&ms(&[3])).unwrap(), &rat_int(1));
        let profile = ame_unitary_profile(&spec(&[3, 4, 4]));
        assert_eq!(profile.value(&ms(&[4])).unwrap(), &rat(1, 2));
    }

    #[test]
    fn a_profile_anchors() {
        let profile = ame_a_profile(&spec(&[2, 3, 3, 3]));
        assert_eq!(profile.value(&ms(&[3, 3])).unwrap(), &rat(3, 2));
        assert_eq!(profile.value(&ms(&[2, 3, 3])).unwrap(), &rat(27, 2));
        assert_eq!(profile.value(&ms(&[3, 3, 3])).unwrap(), &rat_int(11));
        assert_eq!(profile.value(&ms(&[2, 3, 3, 3])).unwrap(), &rat_int(27));
        let profile = ame_a_profile(&spec(&[2, 3, 4]));
        assert_eq!(profile.value(&ms(&[2, 3])).unwrap(), &rat(1, 2));
        assert_eq!(profile.value(&ms(&[3, 4])).unwrap(), &rat_int(5));
    }

    #[test]
    fn a_profile_vanishes_below_balance() {
        for dims in [vec![2, 3, 3, 3], vec![3, 4, 4], vec![2, 2, 3, 3]] {
            let spec = DimensionSpec::new(dims).unwrap();
            let ame = AmeSpec::new(spec.clone());
            let profile = ame_a_profile(&spec);
            for (w, value) in profile.rows() {
                if !w.is_empty_multiset() && ame.within_delta(&w) {
                    assert!(value.is_zero(), "A_{{{w}}} = {value}");
                }
            }
        }
    }

    #[test]
    fn shadow_profile_anchors() {
        let profile = ame_shadow_profile(&spec(&[2, 2, 2, 3]));
        assert_eq!(profile.value(&ms(&[])).unwrap(), &rat(-1, 6));
        let profile = ame_shadow_profile(&spec(&[2, 3, 3, 3]));
        assert_eq!(profile.value(&ms(&[2, 3])).unwrap(), &rat_int(6));
        assert_eq!(profile.value(&ms(&[3, 3])).unwrap(), &rat_int(4));
        assert_eq!(profile.value(&ms(&[2, 3, 3, 3])).unwrap(), &rat_int(6));
        let profile = ame_shadow_profile(&spec(&[2, 3]));
        assert!(profile.rows().iter().all(|(_, s)| !s.is_negative()));
    }

    #[test]
    fn closed_forms_match_transforms() {
        for dims in [vec![2, 3, 3, 3], vec![2, 2, 2, 3], vec![3, 4, 4], vec![2, 3, 4]] {
            let spec = DimensionSpec::new(dims).unwrap();
            let a = ame_a_profile(&spec);
            assert_eq!(s_from_a(&a).unwrap().rows(), ame_shadow_profile(&spec).rows());
            assert_eq!(
                a_unitary_from_a(&a).unwrap().rows(),
                ame_unitary_profile(&spec).rows()
            );
        }
    }

    #[test]
    fn scan_marks_eight_party_wall() {
        let cells = ame_scan(2, 3, 8).unwrap();
        for cell in &cells {
            if cell.n_small + cell.n_large == 8 {
                assert_eq!(cell.status, CellStatus::Forbidden, "({}, {})", cell.n_small, cell.n_large);
            }
        }
        let cell = cells
            .iter()
            .find(|c| c.n_small == 3 && c.n_large == 1)
            .unwrap();
        assert_eq!(cell.status, CellStatus::Forbidden);
        assert_eq!(cell.witness.as_ref().unwrap(), &DimensionMultiset::empty());
    }

    #[test]
    fn scan_merges_annotations() {
        let cells = ame_scan(2, 3, 8).unwrap();
        let find = |ns: u32, nl: u32| cells.iter().find(|c| c.n_small == ns && c.n_large == nl).unwrap();
        assert_eq!(find(5, 0).status, CellStatus::KnownExists);
        assert_eq!(find(7, 0).status, CellStatus::KnownNotExists);
        assert!(find(7, 0).witness.is_none());
        assert_eq!(find(4, 0).status, CellStatus::Forbidden);
        assert!(find(4, 0).note.is_some());
        assert_eq!(find(1, 2).status, CellStatus::KnownExists);
    }

    #[test]
    fn scan_rejects_bad_arguments() {
        assert!(ame_scan(3, 2, 5).is_err());
        assert!(ame_scan(1, 3, 5).is_err());
        assert!(ame_scan(2, 3, 17).is_err());
    }

    #[test]
    fn scan_csv_lists_cells() {
        let cells = ame_scan(2, 3, 2).unwrap();
        let csv = scan_to_csv(&cells);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n_small,n_large,status,witness"));
        assert_eq!(csv.lines().count(), cells.len() + 1);
        assert!(csv.contains("0,1,open,"));
        assert!(csv.contains("2,0,known_exists,"));
    }

    #[test]
    fn constructs_canonical_two_two_three_grid() {
        let grid = grid_construct(2, 2, 3).unwrap().unwrap();
        assert_eq!(grid.labels, vec![vec![Some(0), Some(1)], vec![Some(1), Some(2)]]);
        assert_eq!(
            grid.weights,
            vec![vec![rat(1, 3), rat(1, 6)], vec![rat(1, 6), rat(1, 3)]]
        );
        grid.validate().unwrap();
    }

    #[test]
    fn grid_search_is_deterministic() {
        let first = grid_construct(2, 3, 4).unwrap().unwrap();
        let second = grid_construct(2, 3, 4).unwrap().unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn construct_rejects_bad_sides() {
        assert!(grid_construct(3, 2, 4).is_err());
        assert!(grid_construct(2, 3, 7).is_err());
        assert!(grid_construct(2, 5, 2).is_err());
    }

    #[test]
    fn end_to_end_construction_verifies() {
        let grid = grid_construct(2, 3, 4).unwrap().unwrap();
        let state = grid_to_state(&grid).unwrap();
        let report = ame_verify(&state).unwrap();
        assert!(report.is_ame, "failing: {:?}", report.failing_subsets);
    }

    #[test]
    fn single_cell_grid_gives_basis_ket() {
        let grid = grid_construct(1, 1, 1).unwrap().unwrap();
        let state = grid_to_state(&grid).unwrap();
        assert_eq!(state.dim(), 1);
        assert!((state.amplitudes()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn product_state_fails_verification() {
        let spec = spec(&[2, 2, 2]);
        let mut amps = vec![Complex64::new(0.0, 0.0); 8];
        amps[0] = Complex64::new(1.0, 0.0);
        let state = MixedState::new(spec, amps).unwrap();
        let report = ame_verify(&state).unwrap();
        assert!(!report.is_ame);
        assert_eq!(report.failing_subsets[0].sites(), &[1]);
    }

    #[test]
    fn grid_json_round_trip() {
        let grid = grid_construct(2, 3, 4).unwrap().unwrap();
        let value = grid.to_json_value();
        let back = GridSolution::from_json_value(&value).unwrap();
        assert_eq!(grid, back);
    }

    #[test]
    fn validate_rejects_broken_rows() {
        let mut grid = grid_construct(2, 2, 3).unwrap().unwrap();
        grid.weights[0][0] = rat(1, 2);
        assert!(grid.validate().is_err());
    }
}
