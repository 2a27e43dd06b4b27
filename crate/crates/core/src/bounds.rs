//! Hamming-, Singleton- and Scott-type bounds on code sizes.
//!
//! Distances are dimensional: a code of distance `D` satisfies the
//! Knill-Laflamme conditions for every error support whose dimension multiset
//! `v` has `dim v < D`. All verdicts are exact rational comparisons.

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{CoreError, CoreResult};
use crate::multiset::{binomial, sub_multisets, DimensionMultiset, DimensionSpec};
use crate::rational::{big_to_rational, rational_to_string, Rational};

/// Code parameters `((N, K, D))`; `pure` additionally demands `A_v = 0` for
/// nonempty `v` with `dim v < D`.
#[derive(Clone, Debug)]
pub struct CodeParams {
    pub spec: DimensionSpec,
    pub k: BigUint,
    pub distance: u64,
    pub pure: bool,
}

impl CodeParams {
    pub fn new(spec: DimensionSpec, k: BigUint, distance: u64, pure: bool) -> CoreResult<Self> {
        if k.is_zero() {
            return Err(CoreError::InvalidState("code size K must be positive".into()));
        }
        if distance < 1 {
            return Err(CoreError::InvalidState("distance must be at least 1".into()));
        }
        Ok(Self { spec, k, distance, pure })
    }
}

/// The object a bound verdict points at.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundWitness {
    /// A partition `N = w1 + w2 + w3` with `dim w1 < D` and `dim w2 < D`.
    TriPartition {
        w1: DimensionMultiset,
        w2: DimensionMultiset,
        w3: DimensionMultiset,
    },
    /// A nested pair `w1 strictly inside w2`.
    NestedPair {
        inner: DimensionMultiset,
        outer: DimensionMultiset,
    },
    /// A single sub-multiset.
    SubMultiset(DimensionMultiset),
    /// A dimensional error radius.
    Threshold(u64),
    None,
}

impl BoundWitness {
    pub fn to_json_value(&self) -> Value {
        match self {
            BoundWitness::TriPartition { w1, w2, w3 } => {
                json!({"tri_partition": [w1.to_json(), w2.to_json(), w3.to_json()]})
            }
            BoundWitness::NestedPair { inner, outer } => {
                json!({"nested_pair": [inner.to_json(), outer.to_json()]})
            }
            BoundWitness::SubMultiset(m) => json!({"sub_multiset": m.to_json()}),
            BoundWitness::Threshold(t) => json!({"threshold": t}),
            BoundWitness::None => Value::Null,
        }
    }
}

impl std::fmt::Display for BoundWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundWitness::TriPartition { w1, w2, w3 } => write!(f, "({w1}, {w2}, {w3})"),
            BoundWitness::NestedPair { inner, outer } => write!(f, "{inner} inside {outer}"),
            BoundWitness::SubMultiset(m) => write!(f, "{m}"),
            BoundWitness::Threshold(t) => write!(f, "T={t}"),
            BoundWitness::None => write!(f, "-"),
        }
    }
}

/// One exact bound comparison; the bound `holds` when `lhs <= rhs` for
/// packing-type bounds and `lhs >= rhs` for Scott pairs, as recorded.
#[derive(Clone, Debug)]
pub struct BoundVerdict {
    pub bound: String,
    pub holds: bool,
    pub lhs: Rational,
    pub rhs: Rational,
    pub witness: BoundWitness,
}

impl BoundVerdict {
    pub fn to_json_value(&self) -> Value {
        json!({
            "bound": self.bound,
            "holds": self.holds,
            "lhs": rational_to_string(&self.lhs),
            "rhs": rational_to_string(&self.rhs),
            "witness": self.witness.to_json_value(),
        })
    }
}

/// Largest `T >= 1` with `T^2 < D`: errors of support dimension up to `T`
/// are correctable by a distance-`D` code.
pub fn max_correctable_t(distance: u64) -> CoreResult<u64> {
    if distance < 2 {
        return Err(CoreError::InvalidState(
            "no correctable error radius below distance 2".into(),
        ));
    }
    Ok((distance - 1).sqrt())
}

/// Sphere-packing denominator: the number of error operators with support
/// dimension at most `t`.
fn packing_sum(spec: &DimensionSpec, t: u64) -> BigUint {
    let total = spec.multiset();
    let threshold = BigUint::from(t);
    let mut sum = BigUint::zero();
    for v in sub_multisets(&total) {
        if v.dim() > threshold {
            continue;
        }
        let mut ways = BigUint::one();
        for (d, m_n) in total.iter() {
            let m_v = v.multiplicity(d);
            let d_sq_minus_one = BigUint::from(d) * BigUint::from(d) - BigUint::one();
            ways *= binomial(m_n as u64, m_v as u64) * d_sq_minus_one.pow(m_v);
        }
        sum += ways;
    }
    sum
}

/// `K <= dim(N) / sum_{dim v <= t} #errors(v)`, the Hamming bound at error
/// radius `t >= 1`.
pub fn hamming_max_k(spec: &DimensionSpec, t: u64) -> CoreResult<BigUint> {
    if t < 1 {
        return Err(CoreError::InvalidState(
            "Hamming bound needs an error radius of at least 1".into(),
        ));
    }
    Ok(spec.total_dim() / packing_sum(spec, t))
}

pub fn hamming_check(params: &CodeParams) -> CoreResult<BoundVerdict> {
    let t = max_correctable_t(params.distance)?;
    let sum = packing_sum(&params.spec, t);
    let lhs = big_to_rational(&(&params.k * &sum));
    let rhs = big_to_rational(&params.spec.total_dim());
    Ok(BoundVerdict {
        bound: "hamming".into(),
        holds: lhs <= rhs,
        lhs,
        rhs,
        witness: BoundWitness::Threshold(t),
    })
}

/// Minimizes `dim w3` over partitions `N = w1 + w2 + w3` with
/// `dim w1 < D` and `dim w2 < D`; any code obeys `K <= dim w3`. The first
/// minimizer in canonical enumeration order is returned as witness.
pub fn singleton_max_k(
    spec: &DimensionSpec,
    distance: u64,
) -> CoreResult<(BigUint, BoundWitness)> {
    if distance < 1 {
        return Err(CoreError::InvalidState("distance must be at least 1".into()));
    }
    let total = spec.multiset();
    let d_big = BigUint::from(distance);
    let mut best: Option<(BigUint, BoundWitness)> = None;
    for w1 in sub_multisets(&total) {
        if w1.dim() >= d_big {
            continue;
        }
        let rest = w1.complement_in(&total)?;
        for w2 in sub_multisets(&rest) {
            if w2.dim() >= d_big {
                continue;
            }
            let w3 = w2.complement_in(&rest)?;
            let dim_w3 = w3.dim();
            let better = match &best {
                None => true,
                Some((current, _)) => dim_w3 < *current,
            };
            if better {
                best = Some((
                    dim_w3,
                    BoundWitness::TriPartition { w1: w1.clone(), w2, w3 },
                ));
            }
        }
    }
    best.ok_or_else(|| CoreError::Inconsistent("no admissible tri-partition".into()))
}

pub fn singleton_check(params: &CodeParams) -> CoreResult<BoundVerdict> {
    let (max_k, witness) = singleton_max_k(&params.spec, params.distance)?;
    let lhs = big_to_rational(&params.k);
    let rhs = big_to_rational(&max_k);
    Ok(BoundVerdict { bound: "singleton".into(), holds: lhs <= rhs, lhs, rhs, witness })
}

/// For pure codes, `K <= dim(N) / (dim s)^2` for every proper sub-multiset
/// `s` with `dim s < D`; returns the floor at the strongest such `s`.
pub fn pure_singleton_max_k(
    spec: &DimensionSpec,
    distance: u64,
) -> CoreResult<(BigUint, BoundWitness)> {
    if distance < 1 {
        return Err(CoreError::InvalidState("distance must be at least 1".into()));
    }
    let total = spec.multiset();
    let d_big = BigUint::from(distance);
    let mut best: Option<DimensionMultiset> = None;
    for s in sub_multisets(&total) {
        if s == total || s.dim() >= d_big {
            continue;
        }
        let better = match &best {
            None => true,
            Some(current) => s.dim() > current.dim(),
        };
        if better {
            best = Some(s);
        }
    }
    let s = best.ok_or_else(|| CoreError::Inconsistent("no proper sub-multiset".into()))?;
    let max_k = spec.total_dim() / (s.dim() * s.dim());
    Ok((max_k, BoundWitness::SubMultiset(s)))
}

pub fn pure_singleton_check(params: &CodeParams) -> CoreResult<BoundVerdict> {
    let (max_k, witness) = pure_singleton_max_k(&params.spec, params.distance)?;
    let lhs = big_to_rational(&params.k);
    let rhs = big_to_rational(&max_k);
    Ok(BoundVerdict { bound: "singleton_pure".into(), holds: lhs <= rhs, lhs, rhs, witness })
}

fn maximal_proper_subs(m: &DimensionMultiset) -> Vec<DimensionMultiset> {
    let mut out = Vec::new();
    for (d, _) in m.iter() {
        let mut reduced: Vec<u32> = Vec::new();
        for (d2, mult2) in m.iter() {
            let count = if d2 == d { mult2 - 1 } else { mult2 };
            for _ in 0..count {
                reduced.push(d2);
            }
        }
        out.push(DimensionMultiset::from_elements(&reduced));
    }
    out
}

/// Whether a nested pair `w1 strictly inside w2` is a Scott-admissible
/// witness against a maximally mixed family on `N`:
/// `(dim w1)^2 > dim N`, every proper sub-multiset of `w1` has squared
/// dimension at most `dim N`, and so does every proper sub-multiset of `w2`
/// other than `w1`.
fn scott_admissible(
    w1: &DimensionMultiset,
    w2: &DimensionMultiset,
    total_dim: &BigUint,
) -> bool {
    let dim_w1 = w1.dim();
    if &(&dim_w1 * &dim_w1) <= total_dim {
        return false;
    }
    for u in maximal_proper_subs(w1) {
        let d = u.dim();
        if &(&d * &d) > total_dim {
            return false;
        }
    }
    for v in maximal_proper_subs(w2) {
        if &v == w1 {
            continue;
        }
        let d = v.dim();
        if &(&d * &d) > total_dim {
            return false;
        }
    }
    true
}

/// Evaluates the Scott comparison for every admissible nested pair of the
/// system. Each verdict holds iff
/// `(dim w2)^2/dim N - 1 >= prod_d C(m_d(w2), m_d(w1)) ((dim w1)^2/dim N - 1)`;
/// a failing pair rules out a code or AME state with maximally mixed
/// reductions on all sub-multisets up to `w2`.
pub fn scott_check(spec: &DimensionSpec) -> CoreResult<Vec<BoundVerdict>> {
    let total = spec.multiset();
    let total_dim = total.dim();
    let total_dim_rat = big_to_rational(&total_dim);
    let mut out = Vec::new();
    for w2 in sub_multisets(&total) {
        for w1 in sub_multisets(&w2) {
            if w1 == w2 || !scott_admissible(&w1, &w2, &total_dim) {
                continue;
            }
            let dim_w1 = big_to_rational(&w1.dim());
            let dim_w2 = big_to_rational(&w2.dim());
            let lhs = &dim_w2 * &dim_w2 / &total_dim_rat - Rational::one();
            let mut pair_count = BigUint::one();
            for (d, m2) in w2.iter() {
                pair_count *= binomial(m2 as u64, w1.multiplicity(d) as u64);
            }
            let rhs = big_to_rational(&pair_count)
                * (&dim_w1 * &dim_w1 / &total_dim_rat - Rational::one());
            out.push(BoundVerdict {
                bound: "scott".into(),
                holds: lhs >= rhs,
                lhs,
                rhs,
                witness: BoundWitness::NestedPair { inner: w1, outer: w2.clone() },
            });
        }
    }
    Ok(out)
}

pub fn scott_all_hold(verdicts: &[BoundVerdict]) -> bool {
    verdicts.iter().all(|v| v.holds)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Largest homogeneous party count of the given parity for which every
/// Scott pair holds on `n` parties of local dimension `d`:
/// `2(d^2 - 1)` for even `n`, `2d(d+1) - 1` for odd `n`.
pub fn scott_homogeneous_max_n(d: u32, parity: Parity) -> u64 {
    let d = d as u64;
    match parity {
        Parity::Even => 2 * (d * d - 1),
        Parity::Odd => 2 * d * (d + 1) - 1,
    }
}

/// Convenience exact check used alongside the closed form.
pub fn scott_homogeneous_holds(d: u32, n: u32) -> CoreResult<bool> {
    let spec = DimensionSpec::new(vec![d; n as usize])?;
    Ok(scott_all_hold(&scott_check(&spec)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn spec(dims: &[u32]) -> DimensionSpec {
        DimensionSpec::new(dims.to_vec()).unwrap()
    }

    #[test]
    fn correctable_radius() {
        assert_eq!(max_correctable_t(2).unwrap(), 1);
        assert_eq!(max_correctable_t(3).unwrap(), 1);
        assert_eq!(max_correctable_t(4).unwrap(), 1);
        assert_eq!(max_correctable_t(5).unwrap(), 2);
        assert_eq!(max_correctable_t(10).unwrap(), 3);
        assert!(max_correctable_t(1).is_err());
    }

    #[test]
    fn hamming_two_qubits_one_five() {
        assert_eq!(hamming_max_k(&spec(&[2, 2, 5]), 2).unwrap(), BigUint::from(2u32));
    }

    #[test]
    fn hamming_five_qubits_is_tight_for_the_perfect_code() {
        // 32 / (1 + 5*3) = 2.
        assert_eq!(hamming_max_k(&spec(&[2; 5]), 2).unwrap(), BigUint::from(2u32));
        let params = CodeParams::new(spec(&[2; 5]), BigUint::from(2u32), 8, true).unwrap();
        let verdict = hamming_check(&params).unwrap();
        assert!(verdict.holds);
        assert_eq!(verdict.witness, BoundWitness::Threshold(2));
        let too_big = CodeParams::new(spec(&[2; 5]), BigUint::from(3u32), 8, false).unwrap();
        assert!(!hamming_check(&too_big).unwrap().holds);
    }

    #[test]
    fn singleton_two_qubits_one_five() {
        let (max_k, witness) = singleton_max_k(&spec(&[2, 2, 5]), 5).unwrap();
        assert_eq!(max_k, BigUint::from(5u32));
        match witness {
            BoundWitness::TriPartition { w3, .. } => {
                assert_eq!(w3.dim(), BigUint::from(5u32));
            }
            other => panic!("unexpected witness {other}"),
        }
    }

    #[test]
    fn singleton_five_qubits_dimensional_distance_eight() {
        let (max_k, _) = singleton_max_k(&spec(&[2; 5]), 8).unwrap();
        assert_eq!(max_k, BigUint::from(2u32));
    }

    #[test]
    fn pure_singleton_two_qubits_one_five() {
        let (max_k, witness) = pure_singleton_max_k(&spec(&[2, 2, 5]), 5).unwrap();
        assert_eq!(max_k, BigUint::from(1u32));
        assert_eq!(
            witness,
            BoundWitness::SubMultiset(DimensionMultiset::from_elements(&[2, 2]))
        );
    }

    #[test]
    fn scott_seven_qubits_and_a_qutrit_fails() {
        let verdicts = scott_check(&spec(&[2, 2, 2, 2, 2, 2, 2, 3])).unwrap();
        assert!(!verdicts.is_empty());
        let failing: Vec<_> = verdicts.iter().filter(|v| !v.holds).collect();
        assert!(!failing.is_empty());
        let known = failing.iter().find(|v| match &v.witness {
            BoundWitness::NestedPair { inner, outer } => {
                *inner == DimensionMultiset::from_elements(&[2; 5])
                    && *outer == DimensionMultiset::from_elements(&[2; 6])
            }
            _ => false,
        });
        let known = known.expect("the all-qubit nested pair");
        assert_eq!(known.lhs, rat(29, 3));
        assert_eq!(known.rhs, rat(10, 1));
    }

    #[test]
    fn scott_homogeneous_parity_maxima() {
        assert_eq!(scott_homogeneous_max_n(2, Parity::Even), 6);
        assert_eq!(scott_homogeneous_max_n(2, Parity::Odd), 11);
        assert_eq!(scott_homogeneous_max_n(3, Parity::Even), 16);
        assert_eq!(scott_homogeneous_max_n(3, Parity::Odd), 23);
        for d in [2u32, 3] {
            for parity in [Parity::Even, Parity::Odd] {
                let max_n = scott_homogeneous_max_n(d, parity);
                assert!(scott_homogeneous_holds(d, max_n as u32).unwrap(), "d={d} n={max_n}");
                assert!(
                    !scott_homogeneous_holds(d, max_n as u32 + 2).unwrap(),
                    "d={d} n={}",
                    max_n + 2
                );
            }
        }
    }

    #[test]
    fn scott_small_systems_are_unconstrained() {
        assert!(scott_check(&spec(&[2, 2])).unwrap().is_empty());
        assert!(scott_check(&spec(&[2, 3, 4])).unwrap().is_empty());
    }
}
