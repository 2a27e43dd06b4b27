//! Dense Hilbert-space layer for mixed-radix systems.
//!
//! States and operators live on `n` parties with local dimensions given by a
//! [`DimensionSpec`]; basis kets are indexed in mixed radix with site 1 most
//! significant. The error basis is the shift/clock (Weyl-Heisenberg) basis
//! `X^a Z^b` per site. A tensor product of such operators is a monomial
//! matrix, so traces against it cost `O(dim)` instead of a matrix product;
//! [`MonomialOp`] exploits that and `to_matrix` stays available for oracles.

use ndarray::Array2;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{CoreError, CoreResult};
use crate::multiset::{DimensionMultiset, DimensionSpec};

const NORM_TOL: f64 = 1e-12;

/// Guard for dense matrix materialization.
const MAX_DENSE_DIM: usize = 4096;

/// Subset of party indices, 1-based and strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexSubset {
    sites: Vec<usize>,
}

impl IndexSubset {
    pub fn new(sites: Vec<usize>, n: usize) -> CoreResult<Self> {
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::InvalidState(format!(
                "subset {sites:?} is not strictly increasing"
            )));
        }
        if sites.iter().any(|&s| s < 1 || s > n) {
            return Err(CoreError::InvalidState(format!(
                "subset {sites:?} has entries outside 1..={n}"
            )));
        }
        Ok(Self { sites })
    }

    pub fn empty() -> Self {
        Self { sites: Vec::new() }
    }

    pub fn full(n: usize) -> Self {
        Self { sites: (1..=n).collect() }
    }

    /// Sites encoded as bits: bit `i-1` set means site `i` is present.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Self {
            sites: (1..=n).filter(|&s| mask & (1 << (s - 1)) != 0).collect(),
        }
    }

    pub fn mask(&self) -> u64 {
        self.sites.iter().fold(0u64, |m, &s| m | (1 << (s - 1)))
    }

    /// All `2^n` subsets ordered by ascending mask value.
    pub fn all_subsets(n: usize) -> Vec<Self> {
        assert!(n < 63, "subset enumeration over {n} sites");
        (0u64..1 << n).map(|m| Self::from_mask(m, n)).collect()
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn complement(&self, n: usize) -> Self {
        Self {
            sites: (1..=n).filter(|s| !self.contains(*s)).collect(),
        }
    }

    /// The dimension multiset `D(S)` carried by this subset.
    pub fn multiset(&self, spec: &DimensionSpec) -> DimensionMultiset {
        let picked: Vec<u32> = self.sites.iter().map(|&s| spec.dims()[s - 1]).collect();
        DimensionMultiset::from_elements(&picked)
    }

    pub fn dim(&self, spec: &DimensionSpec) -> usize {
        self.sites
            .iter()
            .map(|&s| spec.dims()[s - 1] as usize)
            .product()
    }
}

impl std::fmt::Display for IndexSubset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.sites.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// Mixed-radix index helpers for one dimension spec.
fn strides(dims: &[u32]) -> Vec<usize> {
    let n = dims.len();
    let mut s = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1] as usize;
    }
    s
}

fn digits_of(mut index: usize, dims: &[u32]) -> Vec<u32> {
    let mut out = vec![0u32; dims.len()];
    for j in (0..dims.len()).rev() {
        let d = dims[j] as usize;
        out[j] = (index % d) as u32;
        index /= d;
    }
    out
}

/// Pure state of the full system, stored as a dense amplitude vector.
#[derive(Clone, Debug)]
pub struct MixedState {
    spec: DimensionSpec,
    amps: Vec<Complex64>,
}

impl MixedState {
    /// Requires the amplitude vector to be normalized within `1e-12`.
    pub fn new(spec: DimensionSpec, amps: Vec<Complex64>) -> CoreResult<Self> {
        let dim = spec.total_dim_usize()?;
        if amps.len() != dim {
            return Err(CoreError::DimensionMismatch(format!(
                "amplitude vector has length {}, system dimension is {dim}",
                amps.len()
            )));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(CoreError::InvalidState(format!(
                "state norm^2 = {norm_sq} is not 1 within {NORM_TOL}"
            )));
        }
        Ok(Self { spec, amps })
    }

    /// Rescales to unit norm before constructing; errors on the zero vector.
    pub fn new_normalized(spec: DimensionSpec, mut amps: Vec<Complex64>) -> CoreResult<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(CoreError::InvalidState("zero state vector".into()));
        }
        for a in &mut amps {
            *a /= norm;
        }
        let dim = spec.total_dim_usize()?;
        if amps.len() != dim {
            return Err(CoreError::DimensionMismatch(format!(
                "amplitude vector has length {}, system dimension is {dim}",
                amps.len()
            )));
        }
        Ok(Self { spec, amps })
    }

    pub fn spec(&self) -> &DimensionSpec {
        &self.spec
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Mixed-radix index of a digit string, site 1 most significant.
    pub fn index_of_ket(&self, digits: &[u32]) -> CoreResult<usize> {
        index_of_ket(&self.spec, digits)
    }

    pub fn ket_of_index(&self, index: usize) -> Vec<u32> {
        digits_of(index, self.spec.dims())
    }

    /// Dense projector |psi><psi|.
    pub fn density_matrix(&self) -> Array2<Complex64> {
        let dim = self.dim();
        Array2::from_shape_fn((dim, dim), |(i, j)| self.amps[i] * self.amps[j].conj())
    }

    /// Reduced density operator on `keep`, traced directly from amplitudes.
    pub fn reduced_density(&self, keep: &IndexSubset) -> CoreResult<DensityOperator> {
        let n = self.spec.len();
        let dims = self.spec.dims();
        let all = strides(dims);
        let kept: Vec<usize> = keep.sites().iter().map(|&s| s - 1).collect();
        let rest: Vec<usize> = (0..n).filter(|p| !kept.contains(p)).collect();
        let kept_dims: Vec<u32> = kept.iter().map(|&p| dims[p]).collect();
        let rest_dims: Vec<u32> = rest.iter().map(|&p| dims[p]).collect();
        let dim_keep: usize = kept_dims.iter().map(|&d| d as usize).product();
        let dim_rest: usize = rest_dims.iter().map(|&d| d as usize).product();

        let offset = |positions: &[usize], pos_dims: &[u32], idx: usize| -> usize {
            let digits = digits_of(idx, pos_dims);
            positions
                .iter()
                .zip(&digits)
                .map(|(&p, &dig)| dig as usize * all[p])
                .sum()
        };
        let kept_offsets: Vec<usize> =
            (0..dim_keep).map(|a| offset(&kept, &kept_dims, a)).collect();
        let rest_offsets: Vec<usize> =
            (0..dim_rest).map(|r| offset(&rest, &rest_dims, r)).collect();

        let mut mat = Array2::<Complex64>::zeros((dim_keep, dim_keep));
        for a in 0..dim_keep {
            for b in 0..dim_keep {
                let mut acc = Complex64::new(0.0, 0.0);
                for ro in &rest_offsets {
                    acc += self.amps[kept_offsets[a] + ro] * self.amps[kept_offsets[b] + ro].conj();
                }
                mat[(a, b)] = acc;
            }
        }
        DensityOperator::new(kept_dims, mat)
    }

    pub fn to_json_value(&self) -> Value {
        let dims = self.spec.dims();
        let wide = dims.iter().any(|&d| d > 10);
        let mut terms = Vec::new();
        for (idx, amp) in self.amps.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let digits = digits_of(idx, dims);
            let ket = if wide {
                digits
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            } else {
                digits.iter().map(|d| d.to_string()).collect::<String>()
            };
            terms.push(json!({"ket": ket, "amp_re": amp.re, "amp_im": amp.im}));
        }
        json!({"dims": self.spec.to_json(), "terms": terms})
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("state JSON")
    }

    pub fn from_json_value(value: &Value) -> CoreResult<Self> {
        let spec = DimensionSpec::from_json(
            value
                .get("dims")
                .ok_or_else(|| CoreError::Parse("state JSON lacks \"dims\"".into()))?,
        )?;
        let terms = value
            .get("terms")
            .and_then(|t| t.as_array())
            .ok_or_else(|| CoreError::Parse("state JSON lacks \"terms\" array".into()))?;
        let dim = spec.total_dim_usize()?;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        let wide = spec.dims().iter().any(|&d| d > 10);
        for term in terms {
            let ket = term
                .get("ket")
                .and_then(|k| k.as_str())
                .ok_or_else(|| CoreError::Parse("term lacks string \"ket\"".into()))?;
            let digits: Vec<u32> = if wide {
                ket.split(',')
                    .map(|p| {
                        p.trim()
                            .parse::<u32>()
                            .map_err(|_| CoreError::Parse(format!("bad ket digit {p:?}")))
                    })
                    .collect::<CoreResult<_>>()?
            } else {
                ket.chars()
                    .map(|c| {
                        c.to_digit(10)
                            .ok_or_else(|| CoreError::Parse(format!("bad ket digit {c:?}")))
                    })
                    .collect::<CoreResult<_>>()?
            };
            let idx = index_of_ket(&spec, &digits)?;
            if amps[idx].norm_sqr() != 0.0 {
                return Err(CoreError::Parse(format!("duplicate ket {ket:?}")));
            }
            let re = term.get("amp_re").and_then(|v| v.as_f64()).unwrap_or(0.0);
            let im = term.get("amp_im").and_then(|v| v.as_f64()).unwrap_or(0.0);
            amps[idx] = Complex64::new(re, im);
        }
        Self::new(spec, amps)
    }

    pub fn from_json_str(s: &str) -> CoreResult<Self> {
        let value: Value = serde_json::from_str(s)?;
        Self::from_json_value(&value)
    }
}

pub fn index_of_ket(spec: &DimensionSpec, digits: &[u32]) -> CoreResult<usize> {
    let dims = spec.dims();
    if digits.len() != dims.len() {
        return Err(CoreError::DimensionMismatch(format!(
            "ket has {} digits for {} sites",
            digits.len(),
            dims.len()
        )));
    }
    let mut idx = 0usize;
    for (j, (&dig, &d)) in digits.iter().zip(dims).enumerate() {
        if dig >= d {
            return Err(CoreError::InvalidState(format!(
                "ket digit {dig} at site {} exceeds dimension {d}",
                j + 1
            )));
        }
        idx = idx * d as usize + dig as usize;
    }
    Ok(idx)
}

/// Dense Hermitian operator together with the local dimensions of the sites
/// it acts on.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    dims: Vec<u32>,
    mat: Array2<Complex64>,
}

impl DensityOperator {
    pub fn new(dims: Vec<u32>, mat: Array2<Complex64>) -> CoreResult<Self> {
        let dim: usize = dims.iter().map(|&d| d as usize).product();
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(CoreError::DimensionMismatch(format!(
                "matrix is {}x{}, dimensions {dims:?} require {dim}x{dim}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { dims, mat })
    }

    /// The maximally mixed operator `I / dim` on the given sites.
    pub fn maximally_mixed(dims: Vec<u32>) -> Self {
        let dim: usize = dims.iter().map(|&d| d as usize).product();
        let mat = Array2::from_diag_elem(dim, Complex64::new(1.0 / dim as f64, 0.0));
        Self { dims, mat }
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.diag().sum()
    }

    /// `Re Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.mat[(i, j)] * self.mat[(j, i)];
            }
        }
        acc.re
    }

    /// Largest entrywise deviation from another operator of equal shape.
    pub fn max_deviation(&self, other: &Array2<Complex64>) -> f64 {
        let mut dev: f64 = 0.0;
        for (a, b) in self.mat.iter().zip(other.iter()) {
            dev = dev.max((a - b).norm());
        }
        dev
    }

    /// Partial trace onto the 1-based positions `keep` of this operator's
    /// own site list.
    pub fn partial_trace(&self, keep: &[usize]) -> CoreResult<DensityOperator> {
        let m = self.dims.len();
        if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&p| p < 1 || p > m) {
            return Err(CoreError::InvalidState(format!(
                "keep positions {keep:?} invalid for {m} sites"
            )));
        }
        let kept: Vec<usize> = keep.iter().map(|&p| p - 1).collect();
        let rest: Vec<usize> = (0..m).filter(|p| !kept.contains(p)).collect();
        let all = strides(&self.dims);
        let kept_dims: Vec<u32> = kept.iter().map(|&p| self.dims[p]).collect();
        let rest_dims: Vec<u32> = rest.iter().map(|&p| self.dims[p]).collect();
        let dim_keep: usize = kept_dims.iter().map(|&d| d as usize).product();
        let dim_rest: usize = rest_dims.iter().map(|&d| d as usize).product();

        let offset = |positions: &[usize], pos_dims: &[u32], idx: usize| -> usize {
            let digits = digits_of(idx, pos_dims);
            positions
                .iter()
                .zip(&digits)
                .map(|(&p, &dig)| dig as usize * all[p])
                .sum()
        };
        let kept_offsets: Vec<usize> =
            (0..dim_keep).map(|a| offset(&kept, &kept_dims, a)).collect();
        let rest_offsets: Vec<usize> =
            (0..dim_rest).map(|r| offset(&rest, &rest_dims, r)).collect();

        let mut mat = Array2::<Complex64>::zeros((dim_keep, dim_keep));
        for a in 0..dim_keep {
            for b in 0..dim_keep {
                let mut acc = Complex64::new(0.0, 0.0);
                for ro in &rest_offsets {
                    acc += self.mat[(kept_offsets[a] + ro, kept_offsets[b] + ro)];
                }
                mat[(a, b)] = acc;
            }
        }
        DensityOperator::new(kept_dims, mat)
    }
}

/// `X^a Z^b` on one site: `X|k> = |k+1 mod d>`, `Z|k> = omega^k |k>`.
pub fn weyl_matrix(d: u32, a: u32, b: u32) -> CoreResult<Array2<Complex64>> {
    if d < 1 {
        return Err(CoreError::InvalidDimension("weyl_matrix needs d >= 1".into()));
    }
    if a >= d || b >= d {
        return Err(CoreError::InvalidState(format!(
            "labels ({a},{b}) out of range for dimension {d}"
        )));
    }
    let du = d as usize;
    let mut mat = Array2::<Complex64>::zeros((du, du));
    for k in 0..du {
        let phase = 2.0 * std::f64::consts::PI * (b as f64) * (k as f64) / d as f64;
        mat[((k + a as usize) % du, k)] = Complex64::from_polar(1.0, phase);
    }
    Ok(mat)
}

/// Tensor factor `X^{a_i} Z^{b_i}` on each site of `support`, identity
/// elsewhere; every support site carries a non-identity label.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorOperator {
    support: IndexSubset,
    labels: Vec<(u32, u32)>,
}

impl ErrorOperator {
    pub fn new(support: IndexSubset, labels: Vec<(u32, u32)>) -> CoreResult<Self> {
        if labels.len() != support.len() {
            return Err(CoreError::DimensionMismatch(format!(
                "{} labels for {} support sites",
                labels.len(),
                support.len()
            )));
        }
        if labels.iter().any(|&(a, b)| a == 0 && b == 0) {
            return Err(CoreError::InvalidState(
                "identity label (0,0) inside an error support".into(),
            ));
        }
        Ok(Self { support, labels })
    }

    pub fn identity() -> Self {
        Self { support: IndexSubset::empty(), labels: Vec::new() }
    }

    pub fn support(&self) -> &IndexSubset {
        &self.support
    }

    pub fn labels(&self) -> &[(u32, u32)] {
        &self.labels
    }

    /// `D(supp E)`.
    pub fn multiset(&self, spec: &DimensionSpec) -> DimensionMultiset {
        self.support.multiset(spec)
    }

    /// Monomial form: permutation plus per-column phase.
    pub fn monomial(&self, spec: &DimensionSpec) -> CoreResult<MonomialOp> {
        let dims = spec.dims();
        for (&site, &(a, b)) in self.support.sites().iter().zip(&self.labels) {
            let d = dims[site - 1];
            if a >= d || b >= d {
                return Err(CoreError::InvalidState(format!(
                    "labels ({a},{b}) out of range for site {site} of dimension {d}"
                )));
            }
        }
        let dim = spec.total_dim_usize()?;
        let st = strides(dims);
        let mut perm = vec![0usize; dim];
        let mut phase = vec![Complex64::new(1.0, 0.0); dim];
        for k in 0..dim {
            let digits = digits_of(k, dims);
            let mut target = k;
            let mut angle = 0.0f64;
            for (&site, &(a, b)) in self.support.sites().iter().zip(&self.labels) {
                let p = site - 1;
                let d = dims[p];
                let old = digits[p];
                let new = (old + a) % d;
                target = target - old as usize * st[p] + new as usize * st[p];
                angle += 2.0 * std::f64::consts::PI * (b as f64) * (old as f64) / d as f64;
            }
            perm[k] = target;
            phase[k] = Complex64::from_polar(1.0, angle);
        }
        Ok(MonomialOp { perm, phase })
    }

    /// Dense matrix on the full system.
    pub fn to_matrix(&self, spec: &DimensionSpec) -> CoreResult<Array2<Complex64>> {
        let dim = spec.total_dim_usize()?;
        if dim > MAX_DENSE_DIM {
            return Err(CoreError::TooLarge(format!(
                "dense operator of dimension {dim}"
            )));
        }
        let mono = self.monomial(spec)?;
        let mut mat = Array2::<Complex64>::zeros((dim, dim));
        for k in 0..dim {
            mat[(mono.perm[k], k)] = mono.phase[k];
        }
        Ok(mat)
    }
}

/// A generalized permutation matrix: `E|k> = phase[k] |perm[k]>`.
#[derive(Clone, Debug)]
pub struct MonomialOp {
    pub perm: Vec<usize>,
    pub phase: Vec<Complex64>,
}

impl MonomialOp {
    /// `Tr(E M)` in `O(dim)`.
    pub fn trace_with(&self, m: &Array2<Complex64>) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..self.perm.len() {
            acc += self.phase[k] * m[(k, self.perm[k])];
        }
        acc
    }

    /// `Tr(E^dag M)` in `O(dim)`.
    pub fn trace_adj_with(&self, m: &Array2<Complex64>) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..self.perm.len() {
            acc += self.phase[k].conj() * m[(self.perm[k], k)];
        }
        acc
    }

    /// `<psi| E |psi>` in `O(dim)`.
    pub fn expectation(&self, amps: &[Complex64]) -> Complex64 {
        self.cross_expectation(amps, amps)
    }

    /// `<phi| E |psi>` in `O(dim)`.
    pub fn cross_expectation(&self, bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..self.perm.len() {
            acc += bra[self.perm[k]].conj() * self.phase[k] * ket[k];
        }
        acc
    }

    /// `Tr(E M E^dag N)` in `O(dim^2)`.
    pub fn sandwich_trace(&self, m: &Array2<Complex64>, n: &Array2<Complex64>) -> Complex64 {
        let dim = self.perm.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..dim {
            for k in 0..dim {
                acc += self.phase[j] * m[(j, k)] * self.phase[k].conj()
                    * n[(self.perm[k], self.perm[j])];
            }
        }
        acc
    }
}

/// All error operators with support exactly `support`, i.e. every site
/// non-identity: `prod_i (D_i^2 - 1)` operators, labels in lexicographic
/// order with the last support site fastest.
pub fn error_basis(spec: &DimensionSpec, support: &IndexSubset) -> Vec<ErrorOperator> {
    let dims = spec.dims();
    let site_labels: Vec<Vec<(u32, u32)>> = support
        .sites()
        .iter()
        .map(|&s| {
            let d = dims[s - 1];
            (0..d)
                .flat_map(|a| (0..d).map(move |b| (a, b)))
                .filter(|&(a, b)| !(a == 0 && b == 0))
                .collect()
        })
        .collect();
    if site_labels.iter().any(|l| l.is_empty()) {
        // A dimension-1 site admits no non-identity operator.
        if !support.is_empty() {
            return Vec::new();
        }
    }
    let mut out = Vec::new();
    let k = site_labels.len();
    let mut idx = vec![0usize; k];
    'outer: loop {
        let labels: Vec<(u32, u32)> = idx
            .iter()
            .enumerate()
            .map(|(i, &j)| site_labels[i][j])
            .collect();
        out.push(ErrorOperator { support: support.clone(), labels });
        let mut pos = k;
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < site_labels[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
    out
}

/// All error operators with support contained in `region` (identity
/// included), grouped by exact support in ascending mask order.
pub fn error_basis_within(spec: &DimensionSpec, region: &IndexSubset) -> Vec<ErrorOperator> {
    let k = region.len();
    let mut out = Vec::new();
    for sub in 0u64..1 << k {
        let sites: Vec<usize> = region
            .sites()
            .iter()
            .enumerate()
            .filter(|(i, _)| sub & (1 << i) != 0)
            .map(|(_, &s)| s)
            .collect();
        let subset = IndexSubset { sites };
        out.extend(error_basis(spec, &subset));
    }
    out
}

pub fn kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::<Complex64>::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Embeds an operator acting on the sites of `subset` (ordered ascending)
/// into the full system, identity elsewhere.
pub fn embed_on_sites(
    op: &Array2<Complex64>,
    spec: &DimensionSpec,
    subset: &IndexSubset,
) -> CoreResult<Array2<Complex64>> {
    let dims = spec.dims();
    let n = spec.len();
    let dim = spec.total_dim_usize()?;
    if dim > MAX_DENSE_DIM {
        return Err(CoreError::TooLarge(format!("dense embedding of dimension {dim}")));
    }
    let sub_dim = subset.dim(spec);
    if op.nrows() != sub_dim || op.ncols() != sub_dim {
        return Err(CoreError::DimensionMismatch(format!(
            "operator is {}x{}, subset dimension is {sub_dim}",
            op.nrows(),
            op.ncols()
        )));
    }
    let all = strides(dims);
    let kept: Vec<usize> = subset.sites().iter().map(|&s| s - 1).collect();
    let rest: Vec<usize> = (0..n).filter(|p| !kept.contains(p)).collect();
    let kept_dims: Vec<u32> = kept.iter().map(|&p| dims[p]).collect();
    let rest_dims: Vec<u32> = rest.iter().map(|&p| dims[p]).collect();
    let dim_rest: usize = rest_dims.iter().map(|&d| d as usize).product();

    let offset = |positions: &[usize], pos_dims: &[u32], idx: usize| -> usize {
        let digits = digits_of(idx, pos_dims);
        positions
            .iter()
            .zip(&digits)
            .map(|(&p, &dig)| dig as usize * all[p])
            .sum()
    };
    let kept_offsets: Vec<usize> =
        (0..sub_dim).map(|a| offset(&kept, &kept_dims, a)).collect();
    let rest_offsets: Vec<usize> =
        (0..dim_rest).map(|r| offset(&rest, &rest_dims, r)).collect();

    let mut out = Array2::<Complex64>::zeros((dim, dim));
    for a in 0..sub_dim {
        for b in 0..sub_dim {
            let v = op[(a, b)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            for ro in &rest_offsets {
                out[(kept_offsets[a] + ro, kept_offsets[b] + ro)] = v;
            }
        }
    }
    Ok(out)
}

/// Partial trace of a full-system operator onto the subset `keep`.
pub fn partial_trace_full(
    mat: &Array2<Complex64>,
    spec: &DimensionSpec,
    keep: &IndexSubset,
) -> CoreResult<DensityOperator> {
    let full = DensityOperator::new(spec.dims().to_vec(), mat.clone())?;
    full.partial_trace(keep.sites())
}

/// Reconstructs `Tr_{S^c}(M) (tensor) I` from the Bloch expansion
/// `(dim S)^{-1} sum_{supp E in S} Tr(E^dag M) E` and cross-checks the two
/// against each other to `1e-9`.
pub fn bloch_reconstruct(
    mat: &Array2<Complex64>,
    spec: &DimensionSpec,
    subset: &IndexSubset,
) -> CoreResult<Array2<Complex64>> {
    let dim = spec.total_dim_usize()?;
    if dim > MAX_DENSE_DIM {
        return Err(CoreError::TooLarge(format!(
            "Bloch reconstruction of dimension {dim}"
        )));
    }
    let dim_s = subset.dim(spec) as f64;
    let mut out = Array2::<Complex64>::zeros((dim, dim));
    for err in error_basis_within(spec, subset) {
        let mono = err.monomial(spec)?;
        let coeff = mono.trace_adj_with(mat) / dim_s;
        if coeff.norm_sqr() == 0.0 {
            continue;
        }
        for k in 0..dim {
            out[(mono.perm[k], k)] += coeff * mono.phase[k];
        }
    }
    // Cross-check against the partial-trace route.
    let reduced = partial_trace_full(mat, spec, subset)?;
    let embedded = embed_on_sites(reduced.matrix(), spec, subset)?;
    let mut dev: f64 = 0.0;
    for (a, b) in out.iter().zip(embedded.iter()) {
        dev = dev.max((a - b).norm());
    }
    if dev > 1e-9 {
        return Err(CoreError::Inconsistent(format!(
            "Bloch expansion deviates from partial trace by {dev}"
        )));
    }
    Ok(out)
}
