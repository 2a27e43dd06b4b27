//! Brute-force weight enumerators over the shift/clock error basis.
//!
//! Five weight distributions are computed for a pair of Hermitian operators
//! `M`, `N` on a mixed-radix system, each indexed by the dimension multiset
//! `v` of an error support:
//!
//! * `A_v = sum Tr(E M) Tr(E^dag N)` over errors with `D(supp E) = v`,
//! * `B_v = sum Tr(E M E^dag N)` likewise,
//! * the calligraphic pair `A'_S = Tr(Tr_{S^c}M Tr_{S^c}N)` and
//!   `B'_S = A'_{S^c}` per site subset `S`, whose sums over `D(S) = w` give
//!   the primed enumerators `A'_w`, `B'_w`,
//! * the shadow `S_w`, the subset-signed combination of the calligraphic
//!   values.
//!
//! Sums are accumulated in floating point and snapped back to exact
//! rationals; snapping fails loudly rather than guess, so results are either
//! exact or an error.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{CoreError, CoreResult};
use crate::hilbert::{error_basis, DensityOperator, IndexSubset, MixedState, MonomialOp};
use crate::multiset::{sub_multisets, DimensionMultiset, DimensionSpec};
use crate::rational::{rational_from_str, rational_to_string, Rational, SnapConfig};

/// Largest system dimension accepted by the brute-force paths.
pub const MAX_BRUTE_DIM: usize = 4096;

const IMAG_TOL: f64 = 1e-8;

/// The five enumerator families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    A,
    B,
    APrime,
    BPrime,
    Shadow,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::A => "A",
            Family::B => "B",
            Family::APrime => "A'",
            Family::BPrime => "B'",
            Family::Shadow => "S",
        }
    }

    pub fn parse(s: &str) -> CoreResult<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Family::A),
            "b" => Ok(Family::B),
            "a'" | "aprime" | "ap" => Ok(Family::APrime),
            "b'" | "bprime" | "bp" => Ok(Family::BPrime),
            "s" | "shadow" => Ok(Family::Shadow),
            other => Err(CoreError::Parse(format!("unknown enumerator family {other:?}"))),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One enumerator family evaluated on every sub-multiset of the system's
/// dimension multiset, with exact rational values.
#[derive(Clone, Debug, PartialEq)]
pub struct EnumeratorProfile {
    family: Family,
    spec: DimensionSpec,
    values: BTreeMap<DimensionMultiset, Rational>,
}

impl EnumeratorProfile {
    pub fn new(
        family: Family,
        spec: DimensionSpec,
        values: BTreeMap<DimensionMultiset, Rational>,
    ) -> CoreResult<Self> {
        let expected = sub_multisets(&spec.multiset());
        if values.len() != expected.len() || expected.iter().any(|m| !values.contains_key(m)) {
            return Err(CoreError::Inconsistent(format!(
                "profile carries {} entries, system {spec} has {} sub-multisets",
                values.len(),
                expected.len()
            )));
        }
        Ok(Self { family, spec, values })
    }

    pub fn zero(family: Family, spec: DimensionSpec) -> Self {
        let values = sub_multisets(&spec.multiset())
            .into_iter()
            .map(|m| (m, Rational::zero()))
            .collect();
        Self { family, spec, values }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn spec(&self) -> &DimensionSpec {
        &self.spec
    }

    pub fn value(&self, multiset: &DimensionMultiset) -> CoreResult<&Rational> {
        self.values.get(multiset).ok_or_else(|| {
            CoreError::NotSubMultiset {
                child: multiset.to_string(),
                parent: self.spec.multiset().to_string(),
            }
        })
    }

    pub fn set_value(&mut self, multiset: &DimensionMultiset, value: Rational) -> CoreResult<()> {
        match self.values.get_mut(multiset) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(CoreError::NotSubMultiset {
                child: multiset.to_string(),
                parent: self.spec.multiset().to_string(),
            }),
        }
    }

    /// Rows in canonical sub-multiset order.
    pub fn rows(&self) -> Vec<(DimensionMultiset, Rational)> {
        sub_multisets(&self.spec.multiset())
            .into_iter()
            .map(|m| {
                let v = self.values[&m].clone();
                (m, v)
            })
            .collect()
    }

    pub fn to_json_value(&self) -> Value {
        let rows: Vec<Value> = self
            .rows()
            .iter()
            .map(|(m, v)| json!({"multiset": m.to_json(), "value": rational_to_string(v)}))
            .collect();
        json!({"family": self.family.as_str(), "dims": self.spec.to_json(), "values": rows})
    }

    pub fn from_json_value(value: &Value) -> CoreResult<Self> {
        let family = Family::parse(
            value
                .get("family")
                .and_then(|f| f.as_str())
                .ok_or_else(|| CoreError::Parse("profile JSON lacks \"family\"".into()))?,
        )?;
        let spec = DimensionSpec::from_json(
            value
                .get("dims")
                .ok_or_else(|| CoreError::Parse("profile JSON lacks \"dims\"".into()))?,
        )?;
        let rows = value
            .get("values")
            .and_then(|v| v.as_array())
            .ok_or_else(|| CoreError::Parse("profile JSON lacks \"values\" array".into()))?;
        let mut values = BTreeMap::new();
        for row in rows {
            let m = DimensionMultiset::from_json(
                row.get("multiset")
                    .ok_or_else(|| CoreError::Parse("profile row lacks \"multiset\"".into()))?,
            )?;
            let v = rational_from_str(
                row.get("value")
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| CoreError::Parse("profile row lacks string \"value\"".into()))?,
            )?;
            if values.insert(m, v).is_some() {
                return Err(CoreError::Parse("duplicate multiset in profile JSON".into()));
            }
        }
        Self::new(family, spec, values)
    }

    /// Two-column CSV, `multiset,value`, in canonical order. Multisets render
    /// as space-separated dimensions so the column stays comma-free.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("multiset,value\n");
        for (m, v) in self.rows() {
            out.push_str(&format!("{},{}\n", m.to_elements_string(), rational_to_string(&v)));
        }
        out
    }
}

/// Calligraphic enumerators, one exact value per site subset.
#[derive(Clone, Debug, PartialEq)]
pub struct CalligraphicTable {
    spec: DimensionSpec,
    values: Vec<Rational>,
}

impl CalligraphicTable {
    pub fn spec(&self) -> &DimensionSpec {
        &self.spec
    }

    /// `A'_S`.
    pub fn a_prime(&self, subset: &IndexSubset) -> &Rational {
        &self.values[subset.mask() as usize]
    }

    /// `B'_S = A'_{S^c}`.
    pub fn b_prime(&self, subset: &IndexSubset) -> &Rational {
        let full = (1u64 << self.spec.len()) - 1;
        &self.values[(full ^ subset.mask()) as usize]
    }

    pub fn subsets(&self) -> Vec<IndexSubset> {
        IndexSubset::all_subsets(self.spec.len())
    }

    /// Sums `A'_S` over subsets with `D(S) = w` for every `w`.
    pub fn grouped_a_prime(&self) -> BTreeMap<DimensionMultiset, Rational> {
        let mut out: BTreeMap<DimensionMultiset, Rational> = sub_multisets(&self.spec.multiset())
            .into_iter()
            .map(|m| (m, Rational::zero()))
            .collect();
        for subset in self.subsets() {
            let ms = subset.multiset(&self.spec);
            *out.get_mut(&ms).expect("subset multiset") += self.a_prime(&subset).clone();
        }
        out
    }

    pub fn to_json_value(&self) -> Value {
        let rows: Vec<Value> = self
            .subsets()
            .iter()
            .map(|s| {
                json!({
                    "sites": s.sites(),
                    "a_prime": rational_to_string(self.a_prime(s)),
                    "b_prime": rational_to_string(self.b_prime(s)),
                })
            })
            .collect();
        json!({"dims": self.spec.to_json(), "subsets": rows})
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sites,a_prime,b_prime\n");
        for s in self.subsets() {
            let sites = s
                .sites()
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            out.push_str(&format!(
                "{},{},{}\n",
                if sites.is_empty() { "∅".to_string() } else { sites },
                rational_to_string(self.a_prime(&s)),
                rational_to_string(self.b_prime(&s)),
            ));
        }
        out
    }
}

/// A Hermitian operator fed to the brute-force enumerators, either a pure
/// state (kept as amplitudes for `O(dim)` traces) or a dense matrix.
#[derive(Clone, Debug)]
pub enum HermitianOp {
    Pure(MixedState),
    Dense {
        spec: DimensionSpec,
        mat: Array2<Complex64>,
    },
}

impl HermitianOp {
    pub fn from_state(state: &MixedState) -> Self {
        HermitianOp::Pure(state.clone())
    }

    pub fn from_matrix(spec: DimensionSpec, mat: Array2<Complex64>) -> CoreResult<Self> {
        let dim = spec.total_dim_usize()?;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(CoreError::DimensionMismatch(format!(
                "matrix is {}x{}, system {spec} has dimension {dim}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let mut dev: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                dev = dev.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
            }
        }
        if dev > 1e-9 {
            return Err(CoreError::InvalidState(format!(
                "matrix is not Hermitian, max |M - M^dag| = {dev}"
            )));
        }
        Ok(HermitianOp::Dense { spec, mat })
    }

    pub fn spec(&self) -> &DimensionSpec {
        match self {
            HermitianOp::Pure(state) => state.spec(),
            HermitianOp::Dense { spec, .. } => spec,
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            HermitianOp::Pure(_) => 1.0,
            HermitianOp::Dense { mat, .. } => mat.diag().sum().re,
        }
    }

    fn trace_with(&self, mono: &MonomialOp) -> Complex64 {
        match self {
            HermitianOp::Pure(state) => mono.expectation(state.amplitudes()),
            HermitianOp::Dense { mat, .. } => mono.trace_with(mat),
        }
    }

    fn trace_adj_with(&self, mono: &MonomialOp) -> Complex64 {
        match self {
            HermitianOp::Pure(state) => mono.expectation(state.amplitudes()).conj(),
            HermitianOp::Dense { mat, .. } => mono.trace_adj_with(mat),
        }
    }

    /// `Tr(E self E^dag other)`.
    fn conjugated_trace_with(&self, other: &HermitianOp, mono: &MonomialOp) -> Complex64 {
        match (self, other) {
            (HermitianOp::Pure(a), HermitianOp::Pure(b)) => {
                let cross = mono.cross_expectation(b.amplitudes(), a.amplitudes());
                Complex64::new(cross.norm_sqr(), 0.0)
            }
            (HermitianOp::Pure(a), HermitianOp::Dense { mat, .. }) => {
                let v = apply_monomial(mono, a.amplitudes());
                quadratic_form(&v, mat)
            }
            (HermitianOp::Dense { mat, .. }, HermitianOp::Pure(b)) => {
                let w = apply_monomial_adjoint(mono, b.amplitudes());
                quadratic_form(&w, mat)
            }
            (HermitianOp::Dense { mat: a, .. }, HermitianOp::Dense { mat: b, .. }) => {
                mono.sandwich_trace(a, b)
            }
        }
    }

    fn reduced(&self, keep: &IndexSubset) -> CoreResult<DensityOperator> {
        match self {
            HermitianOp::Pure(state) => state.reduced_density(keep),
            HermitianOp::Dense { spec, mat } => {
                crate::hilbert::partial_trace_full(mat, spec, keep)
            }
        }
    }
}

fn apply_monomial(mono: &MonomialOp, amps: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for k in 0..amps.len() {
        out[mono.perm[k]] = mono.phase[k] * amps[k];
    }
    out
}

fn apply_monomial_adjoint(mono: &MonomialOp, amps: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for k in 0..amps.len() {
        out[k] = mono.phase[k].conj() * amps[mono.perm[k]];
    }
    out
}

/// `v^dag M v`.
fn quadratic_form(v: &[Complex64], mat: &Array2<Complex64>) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..v.len() {
        if v[i].norm_sqr() == 0.0 {
            continue;
        }
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..v.len() {
            row += mat[(i, j)] * v[j];
        }
        acc += v[i].conj() * row;
    }
    acc
}

fn check_pair(m: &HermitianOp, n_op: &HermitianOp) -> CoreResult<DimensionSpec> {
    if m.spec() != n_op.spec() {
        return Err(CoreError::DimensionMismatch(format!(
            "operator systems differ: {} vs {}",
            m.spec(),
            n_op.spec()
        )));
    }
    let dim = m.spec().total_dim_usize()?;
    if dim > MAX_BRUTE_DIM {
        return Err(CoreError::TooLarge(format!(
            "brute-force enumeration over dimension {dim} (limit {MAX_BRUTE_DIM})"
        )));
    }
    Ok(m.spec().clone())
}

fn snap_real(value: Complex64, what: &str, cfg: &SnapConfig) -> CoreResult<Rational> {
    if value.im.abs() > IMAG_TOL {
        return Err(CoreError::Inconsistent(format!(
            "{what} has imaginary part {}",
            value.im
        )));
    }
    cfg.snap(value.re)
}

fn profile_floats(
    m: &HermitianOp,
    n_op: &HermitianOp,
) -> CoreResult<(
    BTreeMap<DimensionMultiset, Complex64>,
    BTreeMap<DimensionMultiset, Complex64>,
)> {
    let spec = check_pair(m, n_op)?;
    let n = spec.len();
    let mut a: BTreeMap<DimensionMultiset, Complex64> = sub_multisets(&spec.multiset())
        .into_iter()
        .map(|ms| (ms, Complex64::new(0.0, 0.0)))
        .collect();
    let mut b = a.clone();
    for mask in 0u64..1 << n {
        let support = IndexSubset::from_mask(mask, n);
        let ms = support.multiset(&spec);
        let mut acc_a = Complex64::new(0.0, 0.0);
        let mut acc_b = Complex64::new(0.0, 0.0);
        for err in error_basis(&spec, &support) {
            let mono = err.monomial(&spec)?;
            acc_a += m.trace_with(&mono) * n_op.trace_adj_with(&mono);
            acc_b += m.conjugated_trace_with(n_op, &mono);
        }
        *a.get_mut(&ms).expect("support multiset") += acc_a;
        *b.get_mut(&ms).expect("support multiset") += acc_b;
    }
    Ok((a, b))
}

fn snap_profile(
    family: Family,
    spec: &DimensionSpec,
    floats: BTreeMap<DimensionMultiset, Complex64>,
    cfg: &SnapConfig,
) -> CoreResult<EnumeratorProfile> {
    let mut values = BTreeMap::new();
    for (ms, v) in floats {
        let label = format!("{}[{}]", family.as_str(), ms);
        values.insert(ms, snap_real(v, &label, cfg)?);
    }
    EnumeratorProfile::new(family, spec.clone(), values)
}

/// The Shor-Laflamme pair `(A, B)` of two operators, brute-forced over the
/// full error basis and snapped to rationals.
pub fn shor_laflamme_profiles(
    m: &HermitianOp,
    n_op: &HermitianOp,
    cfg: &SnapConfig,
) -> CoreResult<(EnumeratorProfile, EnumeratorProfile)> {
    let spec = check_pair(m, n_op)?;
    let (a_f, b_f) = profile_floats(m, n_op)?;
    Ok((
        snap_profile(Family::A, &spec, a_f, cfg)?,
        snap_profile(Family::B, &spec, b_f, cfg)?,
    ))
}

/// Calligraphic values `A'_S = Tr(Tr_{S^c}M Tr_{S^c}N)` for every subset.
pub fn calligraphic_table(
    m: &HermitianOp,
    n_op: &HermitianOp,
    cfg: &SnapConfig,
) -> CoreResult<CalligraphicTable> {
    let spec = check_pair(m, n_op)?;
    let n = spec.len();
    let mut values = Vec::with_capacity(1 << n);
    for mask in 0u64..1 << n {
        let subset = IndexSubset::from_mask(mask, n);
        let rho_m = m.reduced(&subset)?;
        let rho_n = n_op.reduced(&subset)?;
        let mut acc = Complex64::new(0.0, 0.0);
        let d = rho_m.dim();
        for i in 0..d {
            for j in 0..d {
                acc += rho_m.matrix()[(i, j)] * rho_n.matrix()[(j, i)];
            }
        }
        values.push(snap_real(acc, &format!("A'[{subset}]"), cfg)?);
    }
    Ok(CalligraphicTable { spec, values })
}

/// The primed pair `(A', B')`, grouped from the calligraphic table.
pub fn unitary_profiles(
    m: &HermitianOp,
    n_op: &HermitianOp,
    cfg: &SnapConfig,
) -> CoreResult<(EnumeratorProfile, EnumeratorProfile)> {
    let table = calligraphic_table(m, n_op, cfg)?;
    unitary_profiles_from_table(&table)
}

pub fn unitary_profiles_from_table(
    table: &CalligraphicTable,
) -> CoreResult<(EnumeratorProfile, EnumeratorProfile)> {
    let spec = table.spec().clone();
    let grouped = table.grouped_a_prime();
    let total = spec.multiset();
    let mut b_values = BTreeMap::new();
    for (ms, _) in &grouped {
        let complement = ms.complement_in(&total)?;
        b_values.insert(ms.clone(), grouped[&complement].clone());
    }
    Ok((
        EnumeratorProfile::new(Family::APrime, spec.clone(), grouped.clone())?,
        EnumeratorProfile::new(Family::BPrime, spec, b_values)?,
    ))
}

/// The shadow from the subset-signed combination
/// `S_T = sum_S (-1)^{|S ∩ T^c|} A'_S`, summed over `D(T) = w`.
pub fn shadow_profile_brute(
    m: &HermitianOp,
    n_op: &HermitianOp,
    cfg: &SnapConfig,
) -> CoreResult<EnumeratorProfile> {
    let table = calligraphic_table(m, n_op, cfg)?;
    shadow_profile_from_table(&table)
}

pub fn shadow_profile_from_table(table: &CalligraphicTable) -> CoreResult<EnumeratorProfile> {
    let spec = table.spec().clone();
    let n = spec.len();
    let full: u64 = (1 << n) - 1;
    let mut shadow = EnumeratorProfile::zero(Family::Shadow, spec.clone());
    for t_mask in 0u64..1 << n {
        let t = IndexSubset::from_mask(t_mask, n);
        let ms = t.multiset(&spec);
        let mut acc = Rational::zero();
        for s_mask in 0u64..1 << n {
            let overlap = (s_mask & (full ^ t_mask)).count_ones();
            let term = table.values[s_mask as usize].clone();
            if overlap % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let updated = shadow.value(&ms)?.clone() + acc;
        shadow.set_value(&ms, updated)?;
    }
    Ok(shadow)
}

/// Every enumerator family of a pure state, sharing one calligraphic pass.
#[derive(Clone, Debug)]
pub struct StateEnumerators {
    pub a: EnumeratorProfile,
    pub b: EnumeratorProfile,
    pub a_prime: EnumeratorProfile,
    pub b_prime: EnumeratorProfile,
    pub shadow: EnumeratorProfile,
    pub calligraphic: CalligraphicTable,
}

pub fn enumerate_state(state: &MixedState, cfg: &SnapConfig) -> CoreResult<StateEnumerators> {
    let op = HermitianOp::from_state(state);
    let (a, b) = shor_laflamme_profiles(&op, &op, cfg)?;
    let calligraphic = calligraphic_table(&op, &op, cfg)?;
    let (a_prime, b_prime) = unitary_profiles_from_table(&calligraphic)?;
    let shadow = shadow_profile_from_table(&calligraphic)?;
    Ok(StateEnumerators { a, b, a_prime, b_prime, shadow, calligraphic })
}

/// One Knill-Laflamme failure: `A_v != K B_v` below the claimed distance.
#[derive(Clone, Debug)]
pub struct KlViolation {
    pub multiset: DimensionMultiset,
    pub a_value: Rational,
    pub kb_value: Rational,
}

/// Outcome of testing a projector against the Knill-Laflamme conditions.
#[derive(Clone, Debug)]
pub struct CodeReport {
    pub k: u64,
    pub distance: u64,
    pub a: EnumeratorProfile,
    pub b: EnumeratorProfile,
    pub is_code: bool,
    pub is_pure: bool,
    pub violations: Vec<KlViolation>,
}

/// Tests whether a projector of trace `K` is a code of the claimed distance:
/// `A_v = K B_v` must hold exactly for every `v` with `dim v < D`, and a pure
/// code additionally has `A_v = 0` for nonempty such `v`.
pub fn check_code(
    projector: &HermitianOp,
    distance: u64,
    cfg: &SnapConfig,
) -> CoreResult<CodeReport> {
    if distance < 1 {
        return Err(CoreError::InvalidState("distance must be at least 1".into()));
    }
    let trace = projector.trace();
    let k = trace.round();
    if (trace - k).abs() > 1e-6 || k < 1.0 {
        return Err(CoreError::InvalidState(format!(
            "projector trace {trace} is not a positive integer"
        )));
    }
    if let HermitianOp::Dense { mat, .. } = projector {
        let sq = mat.dot(mat);
        let mut dev: f64 = 0.0;
        for (x, y) in sq.iter().zip(mat.iter()) {
            dev = dev.max((x - y).norm());
        }
        if dev > 1e-8 {
            return Err(CoreError::InvalidState(format!(
                "operator is not idempotent, max |P^2 - P| = {dev}"
            )));
        }
    }
    let k = k as u64;
    let (a, b) = shor_laflamme_profiles(projector, projector, cfg)?;
    let k_rat = Rational::from_integer(k.into());
    let d_big = BigUint::from(distance);
    let mut violations = Vec::new();
    let mut pure = true;
    for (ms, a_v) in a.rows() {
        if ms.dim() >= d_big {
            continue;
        }
        let kb = &k_rat * b.value(&ms)?;
        if a_v != kb {
            violations.push(KlViolation { multiset: ms.clone(), a_value: a_v.clone(), kb_value: kb });
        }
        if !ms.is_empty_multiset() && !a_v.is_zero() {
            pure = false;
        }
    }
    let is_code = violations.is_empty();
    Ok(CodeReport {
        k,
        distance,
        a,
        b,
        is_code,
        is_pure: is_code && pure,
        violations,
    })
}
