//! Fixed-precision binary floating point used for spectral sums and bounds.
//!
//! A thin value type over [`astro_float::BigFloat`]. Every value carries its
//! own precision in bits; binary operations run at the larger of the two.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Working precision used when callers do not ask for one.
pub const DEFAULT_PRECISION: usize = 128;

/// Smallest precision accepted.
pub const MIN_PRECISION: usize = 64;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Clone)]
pub struct Real {
    value: BigFloat,
    prec: usize,
}

impl Real {
    fn wrap(value: BigFloat, prec: usize) -> Self {
        Real { value, prec }
    }

    pub fn zero(prec: usize) -> Self {
        Self::from_f64(0.0, prec)
    }

    pub fn one(prec: usize) -> Self {
        Self::from_f64(1.0, prec)
    }

    pub fn from_f64(x: f64, prec: usize) -> Self {
        let prec = prec.max(MIN_PRECISION);
        Self::wrap(BigFloat::from_f64(x, prec), prec)
    }

    pub fn from_u64(x: u64, prec: usize) -> Self {
        Self::from_biguint(&BigUint::from(x), prec)
    }

    pub fn from_biguint(x: &BigUint, prec: usize) -> Self {
        let prec = prec.max(MIN_PRECISION);
        if x.is_zero() {
            return Self::zero(prec);
        }
        let words = x.to_u64_digits();
        let exponent = (words.len() * 64) as i32;
        let mut value = BigFloat::from_words(&words, Sign::Pos, exponent);
        value.set_precision(prec, RM).expect("set precision");
        Self::wrap(value, prec)
    }

    pub fn from_bigint(x: &BigInt, prec: usize) -> Self {
        let r = Self::from_biguint(x.magnitude(), prec);
        if x.is_negative() {
            -r
        } else {
            r
        }
    }

    pub fn from_ratio(x: &BigRational, prec: usize) -> Self {
        let num = Self::from_bigint(x.numer(), prec + 64);
        let den = Self::from_bigint(x.denom(), prec + 64);
        let prec = prec.max(MIN_PRECISION);
        Self::wrap(num.value.div(&den.value, prec, RM), prec)
    }

    pub fn pi(prec: usize) -> Self {
        let prec = prec.max(MIN_PRECISION);
        Self::wrap(with_consts(|cc| cc.pi(prec, RM)), prec)
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn ln(&self) -> Self {
        let v = with_consts(|cc| self.value.ln(self.prec, RM, cc));
        Self::wrap(v, self.prec)
    }

    pub fn exp(&self) -> Self {
        let v = with_consts(|cc| self.value.exp(self.prec, RM, cc));
        Self::wrap(v, self.prec)
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(self.value.sqrt(self.prec, RM), self.prec)
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.value.abs(), self.prec)
    }

    pub fn powi(&self, k: usize) -> Self {
        Self::wrap(self.value.powi(k, self.prec, RM), self.prec)
    }

    pub fn mul_f64(&self, x: f64) -> Self {
        self * &Real::from_f64(x, self.prec)
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_nan(&self) -> bool {
        self.value.is_nan()
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_negative()
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Nearest `f64`; saturates to infinity and flushes to zero outside the
    /// double range.
    pub fn to_f64(&self) -> f64 {
        if self.value.is_nan() {
            return f64::NAN;
        }
        if self.value.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.value.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _bits, sign, exponent, _)) = self.value.as_raw_parts() else {
            return f64::NAN;
        };
        let Some(&top) = words.last() else {
            return 0.0;
        };
        if top == 0 {
            return 0.0;
        }
        let next = if words.len() > 1 { words[words.len() - 2] } else { 0 };
        // mantissa in [0.5, 1): top/2^64 + next/2^128
        let mantissa = top as f64 / 18446744073709551616.0 + next as f64 / 3.402823669209385e38;
        let e = exponent as i64;
        let magnitude = if e > 1100 {
            f64::INFINITY
        } else if e < -1200 {
            0.0
        } else {
            let half = (e / 2) as i32;
            mantissa * 2f64.powi(half) * 2f64.powi(e as i32 - half)
        };
        match sign {
            Sign::Neg => -magnitude,
            Sign::Pos => magnitude,
        }
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({:e}, {} bits)", self.to_f64(), self.prec)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.cmp(&other.value).map(|s| s.cmp(&0))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let p = self.prec.max(rhs.prec);
                Real::wrap(self.value.$method(&rhs.value, p, RM), p)
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::wrap(self.value.neg(), self.prec)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::wrap(self.value.clone().neg(), self.prec)
    }
}

/// `ln(sum_i exp(x_i))`, shifting by the maximum before exponentiating.
/// Returns `None` for an empty input.
pub fn log_sum_exp(terms: &[Real]) -> Option<Real> {
    let max = terms
        .iter()
        .filter(|t| !t.is_nan())
        .fold(None::<&Real>, |acc, t| match acc {
            Some(m) if m >= t => Some(m),
            _ => Some(t),
        })?
        .clone();
    let prec = max.precision();
    let mut acc = Real::zero(prec);
    // pairwise reduction keeps the summation order independent of scheduling
    let shifted: Vec<Real> = terms.iter().map(|t| (t - &max).exp()).collect();
    acc = acc + pairwise_sum(&shifted, prec);
    Some(max + acc.ln())
}

/// Deterministic pairwise (tree) summation.
pub fn pairwise_sum(values: &[Real], prec: usize) -> Real {
    match values.len() {
        0 => Real::zero(prec),
        1 => values[0].clone(),
        len => {
            let (a, b) = values.split_at(len / 2);
            pairwise_sum(a, prec) + pairwise_sum(b, prec)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_round_trip() {
        let big = BigUint::parse_bytes(b"815915283247897734345611269596115894272000000000", 10).unwrap();
        let r = Real::from_biguint(&big, 256);
        let rel = (r.to_f64() - 8.159152832478977e47).abs() / 8.159152832478977e47;
        assert!(rel < 1e-15);
        assert_eq!(Real::from_u64(0, 128).to_f64(), 0.0);
        assert_eq!(Real::from_bigint(&BigInt::from(-7), 128).to_f64(), -7.0);
    }

    #[test]
    fn ratio_and_transcendentals() {
        let third = Real::from_ratio(&BigRational::new(1.into(), 3.into()), 128);
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-17);
        let e = Real::one(128).exp();
        assert!((e.to_f64() - std::f64::consts::E).abs() < 1e-15);
        assert!((e.ln().to_f64() - 1.0).abs() < 1e-15);
        let two = Real::from_f64(2.0, 128);
        assert!((two.sqrt().to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn tiny_and_huge_values_saturate() {
        let tiny = Real::from_f64(-2000.0, 128).exp();
        assert_eq!(tiny.to_f64(), 0.0);
        assert!(!tiny.is_zero());
        let huge = Real::from_f64(2000.0, 128).exp();
        assert_eq!(huge.to_f64(), f64::INFINITY);
        let ok = Real::from_f64(-700.0, 128).exp();
        assert!((ok.to_f64() / (-700f64).exp() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn log_sum_exp_matches_direct_sum() {
        let xs: Vec<Real> = [-1.0, 0.5, 2.0, -30.0].iter().map(|&x| Real::from_f64(x, 128)).collect();
        let direct: f64 = [-1.0f64, 0.5, 2.0, -30.0].iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs).unwrap().to_f64() - direct).abs() < 1e-14);
        assert!(log_sum_exp(&[]).is_none());
    }
}
