//! Cross-module consistency checks on randomized and exhaustively small inputs.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qweight_core::ame::{ame_a_profile, ame_scan, ame_shadow_profile, ame_unitary_profile, CellStatus};
use qweight_core::bounds::{
    max_correctable_t, pure_singleton_max_k, scott_all_hold, scott_check, singleton_max_k,
    CodeParams,
};
use qweight_core::data::{bundled_state, STATE_NAMES};
use qweight_core::enumerators::enumerate_state;
use qweight_core::hilbert::{IndexSubset, MixedState};
use qweight_core::lp::{build_lp, code_feasible, verify_point, LpVerdict};
use qweight_core::multiset::{binomial, DimensionMultiset, DimensionSpec};
use qweight_core::rational::{big_to_rational, Rational, SnapConfig};
use qweight_core::transforms::b_kernel;

const UNIT_AMPS: [Complex64; 8] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(0.0, -1.0),
    Complex64::new(1.0, 1.0),
    Complex64::new(1.0, -1.0),
    Complex64::new(-1.0, 1.0),
    Complex64::new(-1.0, -1.0),
];

fn random_state(rng: &mut ChaCha8Rng, dims: &[u32]) -> MixedState {
    let spec = DimensionSpec::new(dims.to_vec()).expect("dimensions are in range");
    let dim = spec.total_dim_usize().expect("small system");
    let count = rng.gen_range(1..=dim.min(8));
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for index in sample(rng, dim, count) {
        amps[index] = UNIT_AMPS[rng.gen_range(0..UNIT_AMPS.len())];
    }
    MixedState::new_normalized(spec, amps).expect("at least one amplitude is nonzero")
}

fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> Array2<Complex64> {
    let mut u = Array2::eye(d);
    for _ in 0..2 * d * d {
        let p = rng.gen_range(0..d);
        let mut q = rng.gen_range(0..d);
        if d == 1 {
            break;
        }
        while q == p {
            q = rng.gen_range(0..d);
        }
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (c, s) = (theta.cos(), theta.sin());
        let phase = Complex64::from_polar(1.0, phi);
        for col in 0..d {
            let a = u[(p, col)];
            let b = u[(q, col)];
            u[(p, col)] = c * a + s * phase * b;
            u[(q, col)] = -s * phase.conj() * a + c * b;
        }
    }
    u
}

fn apply_local_unitary(state: &MixedState, site: usize, u: &Array2<Complex64>) -> MixedState {
    let spec = state.spec().clone();
    let dims = spec.dims();
    let d = dims[site] as usize;
    let stride: usize = dims[site + 1..].iter().map(|&x| x as usize).product();
    let block = d * stride;
    let old = state.amplitudes();
    let mut new = vec![Complex64::new(0.0, 0.0); old.len()];
    for base in (0..old.len()).step_by(block) {
        for offset in 0..stride {
            for row in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for col in 0..d {
                    acc += u[(row, col)] * old[base + col * stride + offset];
                }
                new[base + row * stride + offset] = acc;
            }
        }
    }
    MixedState::new(spec, new).expect("unitaries preserve the norm")
}

#[test]
fn purity_is_symmetric_under_complements() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dims in [&[2u32, 3][..], &[2, 2, 2], &[3, 4], &[2, 3, 3], &[4, 2]] {
        for _ in 0..4 {
            let state = random_state(&mut rng, dims);
            let n = dims.len();
            for subset in IndexSubset::all_subsets(n) {
                let rho = state.reduced_density(&subset).unwrap();
                let sigma = state.reduced_density(&subset.complement(n)).unwrap();
                assert!(
                    (rho.purity() - sigma.purity()).abs() <= 1e-9,
                    "purity split on {dims:?}, sites {:?}",
                    subset.sites()
                );
            }
        }
    }
}

#[test]
fn profiles_ignore_local_basis_changes() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let cfg = SnapConfig::default();
    for dims in [&[2u32, 2][..], &[2, 3], &[3, 3], &[2, 2, 3]] {
        let state = random_state(&mut rng, dims);
        let mut rotated = state.clone();
        for (site, &d) in dims.iter().enumerate() {
            let u = random_unitary(&mut rng, d as usize);
            rotated = apply_local_unitary(&rotated, site, &u);
        }
        let plain = enumerate_state(&state, &cfg).unwrap();
        let turned = enumerate_state(&rotated, &cfg).unwrap();
        assert_eq!(plain.a, turned.a, "A profile moved under local rotation on {dims:?}");
        assert_eq!(plain.b, turned.b, "B profile moved under local rotation on {dims:?}");
        assert_eq!(plain.a_prime, turned.a_prime, "A' moved under local rotation on {dims:?}");
        assert_eq!(plain.shadow, turned.shadow, "shadow moved under local rotation on {dims:?}");
    }
}

fn classical_krawtchouk(j: u64, k: u64, n: u64, d: u64) -> BigInt {
    let gamma = BigInt::from(d * d - 1);
    let mut acc = BigInt::zero();
    for alpha in 0..=j.min(k) {
        if j - alpha > n - k {
            continue;
        }
        let term = gamma.pow((j - alpha) as u32)
            * BigInt::from(binomial(n - k, j - alpha))
            * BigInt::from(binomial(k, alpha));
        if alpha % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

#[test]
fn homogeneous_b_kernel_is_the_classical_matrix() {
    for (d, max_n) in [(2u64, 5u64), (3, 3), (5, 2)] {
        for n in 1..=max_n {
            let total = DimensionMultiset::from_elements(&vec![d as u32; n as usize]);
            let kernel = b_kernel(&total).unwrap();
            let dim_n = big_to_rational(&BigUint::from(d).pow(n as u32));
            for (j, row) in kernel.rows.iter().enumerate() {
                for (k, entry) in row.iter().enumerate() {
                    let want = Rational::from_integer(classical_krawtchouk(
                        j as u64, k as u64, n, d,
                    )) / &dim_n;
                    assert_eq!(entry, &want, "d = {d}, n = {n}, entry ({j}, {k})");
                }
            }
        }
    }
}

#[test]
fn correctable_radius_brackets_every_distance() {
    for distance in 2..=500u64 {
        let t = max_correctable_t(distance).unwrap();
        assert!(t * t < distance, "radius too big at {distance}");
        assert!(distance <= (t + 1) * (t + 1), "radius too small at {distance}");
    }
}

#[test]
fn pure_singleton_never_beats_the_impure_bound() {
    let choices = [2u32, 3, 4, 5];
    let mut stack = vec![Vec::new()];
    let mut specs = Vec::new();
    while let Some(prefix) = stack.pop() {
        if !prefix.is_empty() {
            specs.push(prefix.clone());
        }
        if prefix.len() == 5 {
            continue;
        }
        let floor = prefix.last().copied().unwrap_or(2);
        for &d in choices.iter().filter(|&&d| d >= floor) {
            let mut next = prefix.clone();
            next.push(d);
            stack.push(next);
        }
    }
    for dims in specs {
        let spec = DimensionSpec::new(dims.clone()).unwrap();
        let total = spec.total_dim_usize().unwrap() as u64;
        for distance in 2..=total {
            let (loose, _) = singleton_max_k(&spec, distance).unwrap();
            let (tight, _) = pure_singleton_max_k(&spec, distance).unwrap();
            assert!(
                tight <= loose,
                "pure bound exceeds impure bound on {dims:?} at distance {distance}"
            );
        }
    }
}

#[test]
fn feasibility_verdicts_are_deterministic() {
    let spec = DimensionSpec::new(vec![2, 2, 5]).unwrap();
    for pure in [true, false] {
        let params = CodeParams::new(spec.clone(), BigUint::from(2u32), 5, pure).unwrap();
        let first = code_feasible(&params).unwrap();
        let second = code_feasible(&params).unwrap();
        match (first, second) {
            (LpVerdict::Feasible { point: a }, LpVerdict::Feasible { point: b }) => {
                assert_eq!(a, b, "feasible points drifted, pure = {pure}");
            }
            (LpVerdict::Infeasible { certificate: a }, LpVerdict::Infeasible { certificate: b }) => {
                assert_eq!(a.eq_multipliers, b.eq_multipliers, "pure = {pure}");
                assert_eq!(a.ineq_multipliers, b.ineq_multipliers, "pure = {pure}");
            }
            _ => panic!("verdict flipped between identical runs, pure = {pure}"),
        }
    }
}

#[test]
fn pure_feasibility_implies_impure_feasibility() {
    let shapes: [&[u32]; 5] = [&[2, 2], &[2, 3], &[2, 2, 2], &[5], &[2, 2, 5]];
    let mut pure_feasible_seen = 0;
    for dims in shapes {
        let spec = DimensionSpec::new(dims.to_vec()).unwrap();
        for k in [1u32, 2, 4] {
            for distance in [2u64, 3] {
                let pure =
                    CodeParams::new(spec.clone(), BigUint::from(k), distance, true).unwrap();
                if !code_feasible(&pure).unwrap().is_feasible() {
                    continue;
                }
                pure_feasible_seen += 1;
                let impure =
                    CodeParams::new(spec.clone(), BigUint::from(k), distance, false).unwrap();
                assert!(
                    code_feasible(&impure).unwrap().is_feasible(),
                    "{dims:?} with K = {k}, distance {distance}: pure feasible but impure not"
                );
            }
        }
    }
    assert!(pure_feasible_seen > 0, "the sweep never exercised a pure-feasible instance");
}

#[test]
fn bundled_profiles_match_every_closed_form() {
    let cfg = SnapConfig::default();
    for name in STATE_NAMES {
        let state = bundled_state(name).unwrap();
        let enums = enumerate_state(&state, &cfg).unwrap();
        let spec = state.spec();
        assert_eq!(enums.a, ame_a_profile(spec), "{name}: A");
        assert_eq!(enums.a_prime, ame_unitary_profile(spec), "{name}: A'");
        assert_eq!(enums.shadow, ame_shadow_profile(spec), "{name}: S");
    }
}

#[test]
fn bundled_profiles_are_feasible_lp_points() {
    let cfg = SnapConfig::default();
    for name in STATE_NAMES {
        let state = bundled_state(name).unwrap();
        let enums = enumerate_state(&state, &cfg).unwrap();
        let rows = enums.a.rows();
        let distance = rows
            .iter()
            .filter(|(w, value)| !w.is_empty_multiset() && !value.is_zero())
            .map(|(w, _)| w.dim().to_u64().expect("small dimensions"))
            .min()
            .expect("a pure state has nonzero coefficients beyond the empty multiset");
        let params =
            CodeParams::new(state.spec().clone(), BigUint::one(), distance, true).unwrap();
        let problem = build_lp(&params).unwrap();
        let point: Vec<Rational> = rows.into_iter().map(|(_, value)| value).collect();
        assert!(verify_point(&problem, &point), "{name}: profile rejected at distance {distance}");
    }
}

#[test]
fn scan_is_at_least_as_strict_as_trace_bounds() {
    for (d_small, d_large) in [(2u32, 3u32), (3, 4)] {
        let cells = ame_scan(d_small, d_large, 10).unwrap();
        let by_coord: BTreeMap<(u32, u32), CellStatus> =
            cells.iter().map(|c| ((c.n_small, c.n_large), c.status)).collect();
        for cell in &cells {
            let mut dims = vec![d_small; cell.n_small as usize];
            dims.extend(std::iter::repeat(d_large).take(cell.n_large as usize));
            let spec = DimensionSpec::new(dims).unwrap();
            let verdicts = scott_check(&spec).unwrap();
            if !scott_all_hold(&verdicts) {
                assert_eq!(
                    by_coord[&(cell.n_small, cell.n_large)],
                    CellStatus::Forbidden,
                    "trace bounds forbid ({}, {}) but the scan does not",
                    cell.n_small,
                    cell.n_large
                );
            }
        }
    }
}
