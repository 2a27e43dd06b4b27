//! Dimension multisets over mixed-radix systems.
//!
//! A system of `n` parties with local dimensions `D_1, ..., D_n` is described
//! by a [`DimensionSpec`]. Weight enumerators are graded not by subset size
//! but by the *multiset of local dimensions* a subset of parties carries, so
//! the central type here is [`DimensionMultiset`]: multiplicities over the
//! distinct dimension values. The whole-system multiset is written `N`
//! throughout; every enumerator is indexed by the sub-multisets of `N`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::binomial as int_binomial;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{Map as JsonMap, Value};

use crate::error::{CoreError, CoreResult};

/// Binomial coefficient over arbitrary-precision integers; 0 when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    int_binomial(BigUint::from(n), BigUint::from(k))
}

/// Ordered list of local dimensions of a mixed-radix system.
///
/// Site indices are 1-based and site 1 is the most significant digit in the
/// mixed-radix index order used by the Hilbert-space layer. Every entry must
/// be at least 2; dimension-1 placeholder sites exist only behind the
/// crate-internal constructor used by degenerate grid constructions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DimensionSpec {
    dims: Vec<u32>,
}

impl DimensionSpec {
    pub fn new(dims: Vec<u32>) -> CoreResult<Self> {
        if dims.is_empty() {
            return Err(CoreError::InvalidDimension("empty dimension list".into()));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(CoreError::InvalidDimension(format!(
                "local dimension {d} is below 2"
            )));
        }
        if let Some(&d) = dims.iter().find(|&&d| d > 36) {
            return Err(CoreError::InvalidDimension(format!(
                "local dimension {d} exceeds the supported maximum of 36"
            )));
        }
        Ok(Self { dims })
    }

    pub(crate) fn new_allowing_unit(dims: Vec<u32>) -> CoreResult<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d < 1 || d > 36) {
            return Err(CoreError::InvalidDimension(format!("bad dimension list {dims:?}")));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    /// Number of parties `n`.
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Total Hilbert-space dimension `D_1 * ... * D_n`.
    pub fn total_dim(&self) -> BigUint {
        self.dims
            .iter()
            .fold(BigUint::one(), |acc, &d| acc * BigUint::from(d))
    }

    /// Total dimension as `usize`, for sizing dense arrays.
    pub fn total_dim_usize(&self) -> CoreResult<usize> {
        self.total_dim()
            .to_usize()
            .ok_or_else(|| CoreError::TooLarge(format!("total dimension of {:?}", self.dims)))
    }

    /// The whole-system dimension multiset `N`.
    pub fn multiset(&self) -> DimensionMultiset {
        DimensionMultiset::from_elements(&self.dims)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.dims.iter().map(|&d| Value::from(d)).collect())
    }

    pub fn from_json(value: &Value) -> CoreResult<Self> {
        let arr = value
            .as_array()
            .ok_or_else(|| CoreError::Parse("dimension spec must be a JSON array".into()))?;
        let dims = arr
            .iter()
            .map(|v| {
                v.as_u64()
                    .and_then(|d| u32::try_from(d).ok())
                    .ok_or_else(|| CoreError::Parse(format!("bad dimension entry {v}")))
            })
            .collect::<CoreResult<Vec<u32>>>()?;
        Self::new(dims)
    }
}

impl fmt::Display for DimensionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, d) in self.dims.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

/// Multiset of local dimensions: multiplicity `m_d` for each distinct value
/// `d`, stored in ascending order of `d` with no zero multiplicities.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DimensionMultiset {
    m: BTreeMap<u32, u32>,
}

impl DimensionMultiset {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_elements(elements: &[u32]) -> Self {
        let mut m = BTreeMap::new();
        for &d in elements {
            *m.entry(d).or_insert(0) += 1;
        }
        Self { m }
    }

    pub fn from_multiplicities(m: BTreeMap<u32, u32>) -> Self {
        let m = m.into_iter().filter(|&(_, mult)| mult > 0).collect();
        Self { m }
    }

    /// Multiplicity of dimension `d` (zero when absent).
    pub fn multiplicity(&self, d: u32) -> u32 {
        self.m.get(&d).copied().unwrap_or(0)
    }

    /// Distinct dimensions present, ascending.
    pub fn distinct_dims(&self) -> impl Iterator<Item = u32> + '_ {
        self.m.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.m.iter().map(|(&d, &mult)| (d, mult))
    }

    /// Total number of elements `|v|` counted with multiplicity.
    pub fn cardinality(&self) -> u32 {
        self.m.values().sum()
    }

    pub fn is_empty_multiset(&self) -> bool {
        self.m.is_empty()
    }

    /// Elements expanded with multiplicity, ascending.
    pub fn elements(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for (&d, &mult) in &self.m {
            out.extend(std::iter::repeat(d).take(mult as usize));
        }
        out
    }

    /// `dim v = prod_d d^{m_d}`; the empty multiset has dimension 1.
    pub fn dim(&self) -> BigUint {
        self.m.iter().fold(BigUint::one(), |acc, (&d, &mult)| {
            acc * BigUint::from(d).pow(mult)
        })
    }

    pub fn is_sub_multiset_of(&self, other: &Self) -> bool {
        self.m
            .iter()
            .all(|(&d, &mult)| mult <= other.multiplicity(d))
    }

    /// The complement `other \ self`; errors when `self` is not a sub-multiset.
    pub fn complement_in(&self, other: &Self) -> CoreResult<Self> {
        if !self.is_sub_multiset_of(other) {
            return Err(CoreError::NotSubMultiset {
                child: self.to_string(),
                parent: other.to_string(),
            });
        }
        let mut m = BTreeMap::new();
        for (&d, &mult) in &other.m {
            let rest = mult - self.multiplicity(d);
            if rest > 0 {
                m.insert(d, rest);
            }
        }
        Ok(Self { m })
    }

    /// Serializes as a JSON object `{"2": 1, "3": 3}` keyed by dimension.
    pub fn to_json(&self) -> Value {
        let mut obj = JsonMap::new();
        for (&d, &mult) in &self.m {
            obj.insert(d.to_string(), Value::from(mult));
        }
        Value::Object(obj)
    }

    pub fn from_json(value: &Value) -> CoreResult<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| CoreError::Parse("multiset must be a JSON object".into()))?;
        let mut m = BTreeMap::new();
        for (key, v) in obj {
            let d: u32 = key
                .parse()
                .map_err(|_| CoreError::Parse(format!("bad multiset key {key:?}")))?;
            let mult = v
                .as_u64()
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| CoreError::Parse(format!("bad multiplicity {v} for {key}")))?;
            if mult > 0 {
                m.insert(d, mult);
            }
        }
        Ok(Self { m })
    }

    /// Compact text form used in CSV columns: elements joined by spaces,
    /// `∅` for the empty multiset.
    pub fn to_elements_string(&self) -> String {
        if self.m.is_empty() {
            "∅".to_string()
        } else {
            self.elements()
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        }
    }
}

impl fmt::Display for DimensionMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m.is_empty() {
            return write!(f, "∅");
        }
        write!(f, "{{")?;
        for (i, d) in self.elements().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "}}")
    }
}

/// All sub-multisets of `n`, in lexicographic order of their multiplicity
/// vectors over ascending distinct dimensions (empty multiset first, `n`
/// itself last). The count is `prod_d (m_d(n) + 1)`.
pub fn sub_multisets(n: &DimensionMultiset) -> Vec<DimensionMultiset> {
    let dims: Vec<(u32, u32)> = n.iter().collect();
    let mut out = Vec::new();
    let mut current = vec![0u32; dims.len()];
    loop {
        let mut m = BTreeMap::new();
        for (i, &(d, _)) in dims.iter().enumerate() {
            if current[i] > 0 {
                m.insert(d, current[i]);
            }
        }
        out.push(DimensionMultiset { m });
        // Odometer increment with the last dimension fastest.
        let mut pos = dims.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if current[pos] < dims[pos].1 {
                current[pos] += 1;
                break;
            }
            current[pos] = 0;
        }
    }
}

/// Number of sub-multisets of `n` as a big integer, `prod_d (m_d + 1)`.
pub fn sub_multiset_count(n: &DimensionMultiset) -> BigUint {
    n.iter()
        .fold(BigUint::one(), |acc, (_, m)| acc * BigUint::from(m + 1))
}

/// Counting coefficient `C_{v,w}`: for any fixed subset of parties carrying
/// multiset `v`, the number of supersets carrying multiset `w` inside a
/// system with multiset `n`. Zero whenever `v` is not a sub-multiset of `w`.
pub fn count_supersets(
    v: &DimensionMultiset,
    w: &DimensionMultiset,
    n: &DimensionMultiset,
) -> BigUint {
    if !v.is_sub_multiset_of(w) || !w.is_sub_multiset_of(n) {
        return BigUint::zero();
    }
    let mut total = BigUint::one();
    for (d, m_n) in n.iter() {
        let m_v = v.multiplicity(d);
        let m_w = w.multiplicity(d);
        total *= binomial((m_n - m_v) as u64, (m_w - m_v) as u64);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ms(elements: &[u32]) -> DimensionMultiset {
        DimensionMultiset::from_elements(elements)
    }

    #[test]
    fn empty_multiset_has_dim_one() {
        assert_eq!(DimensionMultiset::empty().dim(), BigUint::from(1u32));
        assert_eq!(DimensionMultiset::empty().cardinality(), 0);
    }

    #[test]
    fn spec_rejects_bad_dimensions() {
        assert!(DimensionSpec::new(vec![]).is_err());
        assert!(DimensionSpec::new(vec![2, 1]).is_err());
        assert!(DimensionSpec::new(vec![37]).is_err());
        assert!(DimensionSpec::new(vec![2, 3, 3, 3]).is_ok());
    }

    #[test]
    fn total_dim_and_multiset() {
        let spec = DimensionSpec::new(vec![2, 3, 3, 3]).unwrap();
        assert_eq!(spec.total_dim(), BigUint::from(54u32));
        assert_eq!(spec.multiset(), ms(&[2, 3, 3, 3]));
        assert_eq!(spec.to_string(), "[2,3,3,3]");
    }

    #[test]
    fn sub_multisets_of_2333() {
        let n = ms(&[2, 3, 3, 3]);
        let subs = sub_multisets(&n);
        assert_eq!(subs.len(), 8);
        assert_eq!(subs[0], DimensionMultiset::empty());
        assert_eq!(subs.last().unwrap(), &n);
        // Lexicographic over multiplicity vectors (m_2, m_3).
        assert_eq!(subs[1], ms(&[3]));
        assert_eq!(subs[3], ms(&[3, 3, 3]));
        assert_eq!(subs[4], ms(&[2]));
        // No duplicates.
        let mut dedup = subs.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), subs.len());
        assert_eq!(
            sub_multiset_count(&n),
            BigUint::from(subs.len() as u64)
        );
    }

    #[test]
    fn superset_count_examples() {
        let n = ms(&[2, 3, 3, 3]);
        // From the empty set to {2,3}: one way to add the 2, three choices of 3.
        assert_eq!(
            count_supersets(&DimensionMultiset::empty(), &ms(&[2, 3]), &n),
            BigUint::from(3u32)
        );
        // v not contained in w gives zero.
        assert_eq!(count_supersets(&ms(&[2]), &ms(&[3]), &n), BigUint::zero());
        assert_eq!(
            count_supersets(&ms(&[3]), &ms(&[3, 3, 3]), &n),
            BigUint::from(1u32)
        );
    }

    /// Independent oracle: realize the system as concrete 1-based party
    /// indices and count supersets by exhaustive subset enumeration.
    fn count_supersets_brute(dims: &[u32], v: &DimensionMultiset, w: &DimensionMultiset) -> u64 {
        let n = dims.len();
        let multiset_of = |mask: u32| {
            let picked: Vec<u32> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| dims[i])
                .collect();
            DimensionMultiset::from_elements(&picked)
        };
        // Any fixed base subset with multiset v must give the same count;
        // assert that while computing.
        let mut counts = Vec::new();
        for base in 0u32..1 << n {
            if multiset_of(base) != *v {
                continue;
            }
            let c = (0u32..1 << n)
                .filter(|&sup| sup & base == base && multiset_of(sup) == *w)
                .count() as u64;
            counts.push(c);
        }
        assert!(!counts.is_empty(), "no subset realizes {v}");
        assert!(counts.windows(2).all(|p| p[0] == p[1]));
        counts[0]
    }

    #[test]
    fn superset_count_matches_brute_force() {
        for dims in [
            vec![2, 3, 3, 3],
            vec![2, 2, 5],
            vec![2, 3, 4],
            vec![2, 2, 3, 3, 5],
            vec![4, 4, 5, 5, 5, 2],
        ] {
            let n = DimensionMultiset::from_elements(&dims);
            for v in sub_multisets(&n) {
                for w in sub_multisets(&n) {
                    let fast = count_supersets(&v, &w, &n);
                    let brute = count_supersets_brute(&dims, &v, &w);
                    assert_eq!(fast, BigUint::from(brute), "C({v},{w}) over {n}");
                }
            }
        }
    }

    #[test]
    fn complement_requires_nesting() {
        let n = ms(&[2, 3, 3, 3]);
        assert_eq!(ms(&[3]).complement_in(&n).unwrap(), ms(&[2, 3, 3]));
        assert!(ms(&[5]).complement_in(&n).is_err());
        assert!(ms(&[3, 3, 3, 3]).complement_in(&n).is_err());
    }

    #[test]
    fn multiset_json_round_trip() {
        let m = ms(&[2, 3, 3, 3]);
        let json = m.to_json();
        assert_eq!(json.to_string(), r#"{"2":1,"3":3}"#);
        assert_eq!(DimensionMultiset::from_json(&json).unwrap(), m);
        let empty = DimensionMultiset::empty();
        assert_eq!(
            DimensionMultiset::from_json(&empty.to_json()).unwrap(),
            empty
        );
    }

    #[test]
    fn display_forms() {
        assert_eq!(ms(&[3, 2, 3]).to_string(), "{2,3,3}");
        assert_eq!(DimensionMultiset::empty().to_string(), "∅");
        assert_eq!(ms(&[3, 2, 3]).to_elements_string(), "2 3 3");
    }

    proptest! {
        #[test]
        fn complement_dims_multiply(elements in proptest::collection::vec(2u32..6, 1..7)) {
            let n = DimensionMultiset::from_elements(&elements);
            for w in sub_multisets(&n) {
                let c = w.complement_in(&n).unwrap();
                prop_assert_eq!(w.dim() * c.dim(), n.dim());
                prop_assert_eq!(w.cardinality() + c.cardinality(), n.cardinality());
            }
        }

        #[test]
        fn sub_multiset_enumeration_is_complete(elements in proptest::collection::vec(2u32..6, 1..7)) {
            let n = DimensionMultiset::from_elements(&elements);
            let subs = sub_multisets(&n);
            let expected: u64 = n.iter().map(|(_, m)| (m + 1) as u64).product();
            prop_assert_eq!(subs.len() as u64, expected);
            let mut sorted = subs.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), subs.len());
            for s in &subs {
                prop_assert!(s.is_sub_multiset_of(&n));
            }
        }
    }
}
