//! Exact MacWilliams-type transforms between enumerator families.
//!
//! Every transform is a rational linear map on profiles indexed by
//! sub-multisets of the system's dimension multiset `N`. The maps factor over
//! distinct local dimensions into products of generalized Krawtchouk
//! coefficients and binomials, so kernels are computed exactly and can be
//! exported for inspection.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::enumerators::{EnumeratorProfile, Family};
use crate::error::{CoreError, CoreResult};
use crate::multiset::{binomial, sub_multisets, DimensionMultiset};
use crate::rational::{big_to_rational, rational_to_string, Rational};

/// Refuse to materialize kernels beyond this many sub-multisets.
pub const MAX_KERNEL_MULTISETS: usize = 4096;

/// Generalized Krawtchouk coefficient
/// `K_j(k; n, gamma, delta) = sum_a (-1)^a C(n-k, j-a) C(k, a)
/// gamma^{(n-k)-(j-a)} delta^{j-a}`,
/// the coefficient of `x^{n-j} y^j` in `(gamma x + delta y)^{n-k} (x - y)^k`.
pub fn krawtchouk_general(j: u32, k: u32, n: u32, gamma: u64, delta: u64) -> BigInt {
    if k > n || j > n {
        return BigInt::zero();
    }
    let gamma = BigUint::from(gamma);
    let delta = BigUint::from(delta);
    let mut acc = BigInt::zero();
    for alpha in 0..=j.min(k) {
        let rest = j - alpha;
        if rest > n - k {
            continue;
        }
        let mag = binomial((n - k) as u64, rest as u64)
            * binomial(k as u64, alpha as u64)
            * gamma.pow((n - k) - rest)
            * delta.pow(rest);
        let term = BigInt::from(mag);
        if alpha % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Binary-weight Krawtchouk `K_j(k; n)`, the `gamma = delta = 1` case.
pub fn krawtchouk(j: u32, k: u32, n: u32) -> BigInt {
    krawtchouk_general(j, k, n, 1, 1)
}

/// A dense transform kernel over the canonical sub-multiset order:
/// `out[v] = sum_w rows[v][w] * in[w]`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    pub multisets: Vec<DimensionMultiset>,
    pub rows: Vec<Vec<Rational>>,
}

impl KernelMatrix {
    /// Square CSV with multisets labelling both axes; multisets render as
    /// space-separated dimensions to keep cells comma-free.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("out\\in");
        for m in &self.multisets {
            out.push(',');
            out.push_str(&m.to_elements_string());
        }
        out.push('\n');
        for (v, row) in self.multisets.iter().zip(&self.rows) {
            out.push_str(&v.to_elements_string());
            for entry in row {
                out.push(',');
                out.push_str(&rational_to_string(entry));
            }
            out.push('\n');
        }
        out
    }

    pub fn apply(
        &self,
        profile: &EnumeratorProfile,
        out_family: Family,
    ) -> CoreResult<EnumeratorProfile> {
        let mut values = BTreeMap::new();
        for (v, row) in self.multisets.iter().zip(&self.rows) {
            let mut acc = Rational::zero();
            for (w, coeff) in self.multisets.iter().zip(row) {
                if !coeff.is_zero() {
                    acc += coeff * profile.value(w)?;
                }
            }
            values.insert(v.clone(), acc);
        }
        EnumeratorProfile::new(out_family, profile.spec().clone(), values)
    }
}

fn kernel_multisets(total: &DimensionMultiset) -> CoreResult<Vec<DimensionMultiset>> {
    let subs = sub_multisets(total);
    if subs.len() > MAX_KERNEL_MULTISETS {
        return Err(CoreError::TooLarge(format!(
            "{} sub-multisets exceed the kernel limit {MAX_KERNEL_MULTISETS}",
            subs.len()
        )));
    }
    Ok(subs)
}

fn expect_family(profile: &EnumeratorProfile, family: Family) -> CoreResult<()> {
    if profile.family() != family {
        return Err(CoreError::Inconsistent(format!(
            "expected a {} profile, got {}",
            family,
            profile.family()
        )));
    }
    Ok(())
}

/// Kernel sending `A` to `B`:
/// `B_v = dim(N)^{-1} sum_w A_w prod_d K_{m_d(v)}(m_d(w); m_d(N), 1, d^2-1)`.
pub fn b_kernel(total: &DimensionMultiset) -> CoreResult<KernelMatrix> {
    let subs = kernel_multisets(total)?;
    let dim = big_to_rational(&total.dim());
    let rows = subs
        .iter()
        .map(|v| {
            subs.iter()
                .map(|w| {
                    let mut coeff = BigInt::one();
                    for (d, m_n) in total.iter() {
                        coeff *= krawtchouk_general(
                            v.multiplicity(d),
                            w.multiplicity(d),
                            m_n,
                            1,
                            (d as u64) * (d as u64) - 1,
                        );
                    }
                    Rational::from_integer(coeff) / &dim
                })
                .collect()
        })
        .collect();
    Ok(KernelMatrix { multisets: subs, rows })
}

/// Kernel sending `A` to the shadow `S`:
/// `S_v = dim(N)^{-1} sum_w (-1)^{|w|} A_w
///  prod_d K_{m_d(v)}(m_d(w); m_d(N), d-1, d+1)`.
pub fn shadow_kernel(total: &DimensionMultiset) -> CoreResult<KernelMatrix> {
    let subs = kernel_multisets(total)?;
    let dim = big_to_rational(&total.dim());
    let rows = subs
        .iter()
        .map(|v| {
            subs.iter()
                .map(|w| {
                    let mut coeff = BigInt::one();
                    for (d, m_n) in total.iter() {
                        coeff *= krawtchouk_general(
                            v.multiplicity(d),
                            w.multiplicity(d),
                            m_n,
                            (d as u64) - 1,
                            (d as u64) + 1,
                        );
                    }
                    if w.cardinality() % 2 == 1 {
                        coeff = -coeff;
                    }
                    Rational::from_integer(coeff) / &dim
                })
                .collect()
        })
        .collect();
    Ok(KernelMatrix { multisets: subs, rows })
}

/// Kernel sending `A` to `A'`:
/// `A'_w = dim(w)^{-1} sum_{v subset w} A_v
///  prod_d C(m_d(N)-m_d(v), m_d(w)-m_d(v))`.
pub fn unitary_from_a_kernel(total: &DimensionMultiset) -> CoreResult<KernelMatrix> {
    let subs = kernel_multisets(total)?;
    let rows = subs
        .iter()
        .map(|w| {
            let dim_w = big_to_rational(&w.dim());
            subs.iter()
                .map(|v| {
                    if !v.is_sub_multiset_of(w) {
                        return Rational::zero();
                    }
                    let mut coeff = BigUint::one();
                    for (d, m_n) in total.iter() {
                        coeff *= binomial(
                            (m_n - v.multiplicity(d)) as u64,
                            (w.multiplicity(d) - v.multiplicity(d)) as u64,
                        );
                    }
                    big_to_rational(&coeff) / &dim_w
                })
                .collect()
        })
        .collect();
    Ok(KernelMatrix { multisets: subs, rows })
}

/// Kernel inverting [`unitary_from_a_kernel`]:
/// `A_w = sum_{v subset w} (-1)^{|w|-|v|} A'_v
///  prod_d C(m_d(N)-m_d(v), m_d(w)-m_d(v)) d^{m_d(v)}`.
pub fn a_from_unitary_kernel(total: &DimensionMultiset) -> CoreResult<KernelMatrix> {
    let subs = kernel_multisets(total)?;
    let rows = subs
        .iter()
        .map(|w| {
            subs.iter()
                .map(|v| {
                    if !v.is_sub_multiset_of(w) {
                        return Rational::zero();
                    }
                    let mut mag = BigUint::one();
                    for (d, m_n) in total.iter() {
                        mag *= binomial(
                            (m_n - v.multiplicity(d)) as u64,
                            (w.multiplicity(d) - v.multiplicity(d)) as u64,
                        ) * BigUint::from(d).pow(v.multiplicity(d));
                    }
                    let mut coeff = BigInt::from(mag);
                    if (w.cardinality() - v.cardinality()) % 2 == 1 {
                        coeff = -coeff;
                    }
                    Rational::from_integer(coeff)
                })
                .collect()
        })
        .collect();
    Ok(KernelMatrix { multisets: subs, rows })
}

/// Kernel sending `A'` to the shadow:
/// `S_w = sum_v A'_v prod_d K_{m_d(N)-m_d(w)}(m_d(v); m_d(N))`.
pub fn shadow_from_unitary_kernel(total: &DimensionMultiset) -> CoreResult<KernelMatrix> {
    let subs = kernel_multisets(total)?;
    let rows = subs
        .iter()
        .map(|w| {
            subs.iter()
                .map(|v| {
                    let mut coeff = BigInt::one();
                    for (d, m_n) in total.iter() {
                        coeff *= krawtchouk(
                            m_n - w.multiplicity(d),
                            v.multiplicity(d),
                            m_n,
                        );
                    }
                    Rational::from_integer(coeff)
                })
                .collect()
        })
        .collect();
    Ok(KernelMatrix { multisets: subs, rows })
}

pub fn b_from_a(a: &EnumeratorProfile) -> CoreResult<EnumeratorProfile> {
    expect_family(a, Family::A)?;
    b_kernel(&a.spec().multiset())?.apply(a, Family::B)
}

pub fn s_from_a(a: &EnumeratorProfile) -> CoreResult<EnumeratorProfile> {
    expect_family(a, Family::A)?;
    shadow_kernel(&a.spec().multiset())?.apply(a, Family::Shadow)
}

pub fn a_unitary_from_a(a: &EnumeratorProfile) -> CoreResult<EnumeratorProfile> {
    expect_family(a, Family::A)?;
    unitary_from_a_kernel(&a.spec().multiset())?.apply(a, Family::APrime)
}

pub fn a_from_a_unitary(a_prime: &EnumeratorProfile) -> CoreResult<EnumeratorProfile> {
    expect_family(a_prime, Family::APrime)?;
    a_from_unitary_kernel(&a_prime.spec().multiset())?.apply(a_prime, Family::A)
}

pub fn shadow_from_a_unitary(a_prime: &EnumeratorProfile) -> CoreResult<EnumeratorProfile> {
    expect_family(a_prime, Family::APrime)?;
    shadow_from_unitary_kernel(&a_prime.spec().multiset())?.apply(a_prime, Family::Shadow)
}

/// `B'_w = A'_{N - w}`, a pure reindexing.
pub fn b_unitary_from_a_unitary(a_prime: &EnumeratorProfile) -> CoreResult<EnumeratorProfile> {
    expect_family(a_prime, Family::APrime)?;
    let total = a_prime.spec().multiset();
    let mut values = BTreeMap::new();
    for (w, _) in a_prime.rows() {
        let complement = w.complement_in(&total)?;
        values.insert(w.clone(), a_prime.value(&complement)?.clone());
    }
    EnumeratorProfile::new(Family::BPrime, a_prime.spec().clone(), values)
}

/// Evaluates the profile's generating polynomial
/// `P(x, y) = sum_v P_v prod_d x_d^{m_d(N)-m_d(v)} y_d^{m_d(v)}`
/// at one rational point `(x_d, y_d)` per distinct dimension.
pub fn evaluate_profile(
    profile: &EnumeratorProfile,
    point: &BTreeMap<u32, (Rational, Rational)>,
) -> CoreResult<Rational> {
    let total = profile.spec().multiset();
    for d in total.distinct_dims() {
        if !point.contains_key(&d) {
            return Err(CoreError::InvalidState(format!(
                "evaluation point lacks coordinates for dimension {d}"
            )));
        }
    }
    let mut acc = Rational::zero();
    for (v, coeff) in profile.rows() {
        if coeff.is_zero() {
            continue;
        }
        let mut term = coeff.clone();
        for (d, m_n) in total.iter() {
            let (x, y) = &point[&d];
            let m_v = v.multiplicity(d);
            term *= pow_rational(x, m_n - m_v) * pow_rational(y, m_v);
        }
        acc += term;
    }
    Ok(acc)
}

fn pow_rational(r: &Rational, exp: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= r;
    }
    acc
}

/// The point image `x'_d = (x_d + (d^2-1) y_d)/d`, `y'_d = (x_d - y_d)/d`
/// under which `B(x, y) = A(x', y')`; applying it twice returns the point.
pub fn macwilliams_point_image(
    point: &BTreeMap<u32, (Rational, Rational)>,
) -> BTreeMap<u32, (Rational, Rational)> {
    point
        .iter()
        .map(|(&d, (x, y))| {
            let d_rat = Rational::from_integer(d.into());
            let factor = Rational::from_integer((d as i64 * d as i64 - 1).into());
            let x_new = (x + &factor * y) / &d_rat;
            let y_new = (x - y) / &d_rat;
            (d, (x_new, y_new))
        })
        .collect()
}

/// Checks `B(x, y) = A(x', y')` exactly at one point.
pub fn macwilliams_eval_check(
    a: &EnumeratorProfile,
    b: &EnumeratorProfile,
    point: &BTreeMap<u32, (Rational, Rational)>,
) -> CoreResult<bool> {
    expect_family(a, Family::A)?;
    expect_family(b, Family::B)?;
    if a.spec() != b.spec() {
        return Err(CoreError::DimensionMismatch(
            "A and B profiles live on different systems".into(),
        ));
    }
    let lhs = evaluate_profile(b, point)?;
    let rhs = evaluate_profile(a, &macwilliams_point_image(point))?;
    Ok(lhs == rhs)
}
