//! Exact rational arithmetic helpers and float-to-rational snapping.
//!
//! All enumerator coefficients in this crate are exact [`Rational`] values.
//! Floating-point quantities only appear at the Hilbert-space layer; they are
//! converted back to rationals with [`snap_to_rational`], which refuses to
//! guess when no small-denominator rational is close enough.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{CoreError, CoreResult};

pub type Rational = BigRational;

/// Default cap on snapped denominators; override per call or via the CLI's
/// `QWEIGHT_MAX_DENOM` environment variable.
pub const DEFAULT_MAX_DENOM: u64 = 1_000_000;

/// Absolute tolerance for accepting a snapped rational.
pub const SNAP_TOL: f64 = 1e-7;

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn big_to_rational(n: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(n.clone()))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Renders `p/q` in lowest terms, omitting the denominator when it is 1.
pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p` or `p/q` with optional sign; the inverse of
/// [`rational_to_string`].
pub fn rational_from_str(s: &str) -> CoreResult<Rational> {
    let s = s.trim();
    let parse_int = |t: &str| -> CoreResult<BigInt> {
        t.parse::<BigInt>()
            .map_err(|_| CoreError::Parse(format!("invalid integer {t:?} in rational")))
    };
    match s.split_once('/') {
        None => Ok(Rational::from_integer(parse_int(s)?)),
        Some((p, q)) => {
            let num = parse_int(p)?;
            let den = parse_int(q)?;
            if den.is_zero() {
                return Err(CoreError::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(num, den))
        }
    }
}

/// Snap parameters used wherever floats are converted back to rationals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapConfig {
    pub max_denom: u64,
    pub tol: f64,
}

impl Default for SnapConfig {
    fn default() -> Self {
        Self { max_denom: DEFAULT_MAX_DENOM, tol: SNAP_TOL }
    }
}

impl SnapConfig {
    pub fn with_max_denom(max_denom: u64) -> Self {
        Self { max_denom, ..Self::default() }
    }

    pub fn snap(&self, x: f64) -> CoreResult<Rational> {
        snap_to_rational(x, self.max_denom, self.tol)
    }
}

/// Finds the best rational approximation to `x` with denominator at most
/// `max_denom` via continued fractions, accepting it only when it lies within
/// `tol` of `x`.
pub fn snap_to_rational(x: f64, max_denom: u64, tol: f64) -> CoreResult<Rational> {
    if !x.is_finite() {
        return Err(CoreError::SnapFailed { value: x, max_denom, tol });
    }
    let negative = x < 0.0;
    let target = x.abs();

    // Convergents p_k/q_k of the continued fraction of `target`.
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p, mut q) = (BigInt::from(target.floor() as i64), BigInt::one());
    let mut frac = target.fract();
    let limit = BigInt::from(max_denom);
    for _ in 0..64 {
        if frac.abs() < f64::EPSILON {
            break;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        frac = inv.fract();
        let a_big = BigInt::from(a as i128);
        let p_next = &a_big * &p + &p_prev;
        let q_next = &a_big * &q + &q_prev;
        if q_next > limit {
            break;
        }
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
    }
    let mut best = Rational::new(p, q);
    if negative {
        best = -best;
    }
    let err = (rational_to_f64(&best) - x).abs();
    if err < tol {
        Ok(best)
    } else {
        Err(CoreError::SnapFailed { value: x, max_denom, tol })
    }
}

pub fn snap_default(x: f64) -> CoreResult<Rational> {
    snap_to_rational(x, DEFAULT_MAX_DENOM, SNAP_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_round_trip() {
        for s in ["0", "7", "-3", "3/2", "-95/6", "27"] {
            let r = rational_from_str(s).unwrap();
            assert_eq!(rational_to_string(&r), s);
        }
        assert_eq!(rational_to_string(&rational_from_str("6/4").unwrap()), "3/2");
        assert!(rational_from_str("1/0").is_err());
        assert!(rational_from_str("x").is_err());
    }

    #[test]
    fn snap_hits_exact_values() {
        assert_eq!(snap_default(0.5).unwrap(), rat(1, 2));
        assert_eq!(snap_default(-1.0 / 6.0).unwrap(), rat(-1, 6));
        assert_eq!(snap_default(95.0 / 6.0).unwrap(), rat(95, 6));
        assert_eq!(snap_default(0.0).unwrap(), rat_int(0));
        assert_eq!(snap_default(1e-13).unwrap(), rat_int(0));
        assert_eq!(snap_default(27.0).unwrap(), rat_int(27));
    }

    #[test]
    fn snap_rejects_far_values() {
        // sqrt(2) has no denominator-bounded rational within 1e-7 of it that
        // snapping should silently accept at this cap.
        assert!(snap_to_rational(std::f64::consts::SQRT_2, 100, 1e-7).is_err());
        assert!(snap_to_rational(f64::NAN, 100, 1e-7).is_err());
    }

    #[test]
    fn snap_respects_denominator_cap() {
        let x = 1.0 / 1024.0;
        assert_eq!(snap_to_rational(x, 2048, 1e-9).unwrap(), rat(1, 1024));
        assert!(snap_to_rational(x, 1000, 1e-9).is_err());
    }

    #[test]
    fn snap_round_trips_small_denominators() {
        for num in -50i64..=50 {
            for den in 1i64..=40 {
                let r = rat(num, den);
                let x = rational_to_f64(&r);
                assert_eq!(snap_default(x).unwrap(), r, "snap({num}/{den})");
            }
        }
    }
}
