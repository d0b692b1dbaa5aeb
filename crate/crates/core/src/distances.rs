//! ℓ² and total-variation distances to the uniform law.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::oracle::{chi_square_on, tv_on, GroupDistribution};
use crate::partitions::Partition;
use crate::real::{log_sum_exp, Real};
use crate::spectra::{walk_eigenvalue, ClassMeasure, Group, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeMode {
    Discrete,
    Continuous,
}

/// `ln x` for a big integer, in double precision.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::INFINITY, f64::ln);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn ratio_f64(r: &BigRational) -> f64 {
    crate::characters::ratio_to_f64(r)
}

struct Term<'a> {
    multiplicity: &'a BigUint,
    beta: &'a BigRational,
    ln_mult: f64,
    ln_abs_beta: f64,
    gap: f64,
    hi_ln_mult: OnceLock<Real>,
    hi_ln_abs_beta: OnceLock<Real>,
    hi_gap: OnceLock<Real>,
}

/// Prepared evaluator for repeated distance queries on one spectrum.
///
/// Per-entry logarithms are computed in double precision up front and in
/// high precision on demand, only for terms that can affect the result.
pub struct SpectralSum<'a> {
    spectrum: &'a Spectrum,
    prec: usize,
    terms: Vec<Term<'a>>,
}

/// Extra nats kept below the screening cut to absorb double-precision error.
const SCREEN_SLACK: f64 = 16.0;

impl<'a> SpectralSum<'a> {
    pub fn new(spectrum: &'a Spectrum, prec: usize) -> Self {
        let terms = spectrum
            .nontrivial()
            .map(|e| {
                let abs = e.eigenvalue.abs();
                let one_minus_abs = BigRational::one() - &abs;
                let ln_abs_beta = if abs.is_zero() {
                    f64::NEG_INFINITY
                } else if one_minus_abs < BigRational::new(1.into(), 2.into()) {
                    (-ratio_f64(&one_minus_abs)).ln_1p()
                } else {
                    ln_biguint(abs.numer().magnitude()) - ln_biguint(abs.denom().magnitude())
                };
                Term {
                    multiplicity: &e.multiplicity,
                    beta: &e.eigenvalue,
                    ln_mult: ln_biguint(&e.multiplicity),
                    ln_abs_beta,
                    gap: ratio_f64(&(BigRational::one() - &e.eigenvalue)),
                    hi_ln_mult: OnceLock::new(),
                    hi_ln_abs_beta: OnceLock::new(),
                    hi_gap: OnceLock::new(),
                }
            })
            .collect();
        SpectralSum { spectrum, prec, terms }
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    fn window(&self) -> f64 {
        self.prec as f64 * std::f64::consts::LN_2 + (self.terms.len().max(1) as f64).ln() + SCREEN_SLACK
    }

    fn reduce(&self, rough: Vec<f64>, exact: impl Fn(&Term<'a>) -> Real + Sync) -> Option<Real> {
        let max = rough.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return None;
        }
        let cut = max - self.window();
        let keep: Vec<usize> = (0..rough.len()).filter(|&i| rough[i] >= cut).collect();
        let logs: Vec<Real> = keep.par_iter().map(|&i| exact(&self.terms[i])).collect();
        log_sum_exp(&logs)
    }

    fn hi_ln_mult(&self, term: &Term<'a>) -> Real {
        term.hi_ln_mult.get_or_init(|| Real::from_biguint(term.multiplicity, self.prec).ln()).clone()
    }

    /// `ln d₂²` after `t` steps; `None` when the distance is exactly zero.
    pub fn log_sq_discrete(&self, t: u64) -> Option<Real> {
        if t == 0 {
            let total = self.spectrum.multiplicity_sum() - 1u32;
            if total.is_zero() {
                return None;
            }
            return Some(Real::from_biguint(&total, self.prec).ln());
        }
        let two_t = 2.0 * t as f64;
        let rough: Vec<f64> = self.terms.iter().map(|term| term.ln_mult + two_t * term.ln_abs_beta).collect();
        let scale = Real::from_u64(2 * t, self.prec);
        self.reduce(rough, |term| {
            let lb = term
                .hi_ln_abs_beta
                .get_or_init(|| Real::from_ratio(&term.beta.abs(), self.prec).ln())
                .clone();
            self.hi_ln_mult(term) + &scale * &lb
        })
    }

    /// `ln d₂²` at continuous time `t`; `None` when there is no non-trivial term.
    pub fn log_sq_continuous(&self, t: &Real) -> Option<Real> {
        let tf = t.to_f64();
        let rough: Vec<f64> = self.terms.iter().map(|term| term.ln_mult - 2.0 * tf * term.gap).collect();
        let two_t = t.mul_f64(2.0);
        self.reduce(rough, |term| {
            let g = term
                .hi_gap
                .get_or_init(|| Real::from_ratio(&(BigRational::one() - term.beta), self.prec))
                .clone();
            self.hi_ln_mult(term) - &two_t * &g
        })
    }

    pub fn discrete(&self, t: u64) -> Real {
        if let Some(exact) = self.exact_discrete(t) {
            return exact;
        }
        from_log_sq(self.log_sq_discrete(t), self.prec)
    }

    pub fn continuous(&self, t: &Real) -> Real {
        from_log_sq(self.log_sq_continuous(t), self.prec)
    }

    /// Rational evaluation of `Σ m β^{2t}` for small groups and short times.
    fn exact_discrete(&self, t: u64) -> Option<Real> {
        if self.spectrum.n() > 6 || t > 64 {
            return None;
        }
        let mut total = BigRational::zero();
        for term in &self.terms {
            let b2 = term.beta * term.beta;
            total += BigRational::from_integer(BigInt::from(term.multiplicity.clone())) * num_traits::pow(b2, t as usize);
        }
        Some(Real::from_ratio(&total, self.prec).sqrt())
    }
}

fn from_log_sq(log_sq: Option<Real>, prec: usize) -> Real {
    match log_sq {
        None => Real::zero(prec),
        Some(l) => l.mul_f64(0.5).exp(),
    }
}

/// `d₂(q^(t), u)` from a spectrum.
pub fn l2_discrete(spectrum: &Spectrum, t: u64, prec: usize) -> Real {
    SpectralSum::new(spectrum, prec).discrete(t)
}

/// `d₂(h_t, u)` from a spectrum.
pub fn l2_continuous(spectrum: &Spectrum, t: &Real, prec: usize) -> Real {
    SpectralSum::new(spectrum, prec).continuous(t)
}

/// Contribution of one block: `d_λ |β_λ|^t` or `d_λ e^{-t(1-β_λ)}`.
pub fn l2_single_term_lower(
    lambda: &Partition,
    q: &ClassMeasure,
    t: &Real,
    mode: TimeMode,
    prec: usize,
) -> Result<Real> {
    let beta = walk_eigenvalue(q, lambda)?;
    let ln_d = Real::from_biguint(&lambda.dimension()?, prec).ln();
    let exponent = match mode {
        TimeMode::Discrete => {
            if beta.is_zero() {
                return Ok(if t.is_zero() { ln_d.exp() } else { Real::zero(prec) });
            }
            t * &Real::from_ratio(&beta.abs(), prec).ln()
        }
        TimeMode::Continuous => -(t * &Real::from_ratio(&(BigRational::one() - beta), prec)),
    };
    Ok((ln_d + exponent).exp())
}

/// `sqrt((n-1)(n-2)) (1 - 1/n)^k`, the transpose-top lower bound.
pub fn transpose_top_lower(n: usize, k: u64, prec: usize) -> Real {
    if n < 2 {
        return Real::zero(prec);
    }
    let base = Real::from_u64(((n - 1) * (n - 2)) as u64, prec).sqrt();
    let ratio = Real::from_ratio(&BigRational::new(BigInt::from(n - 1), BigInt::from(n)), prec);
    base * ratio.powi(k as usize)
}

/// `d₂(p, u) = (|G| Σ |p(x) - 1/|G||²)^{1/2}` over all of `S_n`.
pub fn chi_square_of(dist: &GroupDistribution, prec: usize) -> Result<Real> {
    chi_square_on(dist, Group::Symmetric, prec)
}

/// `½ Σ |p(x) - 1/|G||` over all of `S_n`.
pub fn tv_of(dist: &GroupDistribution, prec: usize) -> Result<Real> {
    tv_on(dist, Group::Symmetric, prec)
}

/// Distances along a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceProfile {
    pub walk: String,
    pub group: Group,
    pub n: usize,
    pub mode: TimeMode,
    pub points: Vec<ProfilePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub t: f64,
    pub d2: f64,
    /// `ln d₂²`, finite even when `d₂` underflows a double.
    pub log_d2_sq: Option<f64>,
}

impl DistanceProfile {
    /// Evaluates `spectrum` at each time; discrete times are rounded up to integers.
    pub fn compute(walk: &str, spectrum: &Spectrum, mode: TimeMode, times: &[f64], prec: usize) -> Self {
        let sum = SpectralSum::new(spectrum, prec);
        let points = times
            .iter()
            .map(|&t| {
                let (t, log_sq) = match mode {
                    TimeMode::Discrete => {
                        let k = discrete_time(t);
                        let log_sq = match sum.exact_discrete(k) {
                            Some(d) if !d.is_zero() => Some((&d * &d).ln()),
                            Some(_) => None,
                            None => sum.log_sq_discrete(k),
                        };
                        (k as f64, log_sq)
                    }
                    TimeMode::Continuous => (t, sum.log_sq_continuous(&Real::from_f64(t, prec))),
                };
                let d2 = from_log_sq(log_sq.clone(), prec).to_f64();
                ProfilePoint { t, d2, log_d2_sq: log_sq.map(|l| l.to_f64()) }
            })
            .collect();
        DistanceProfile { walk: walk.to_string(), group: spectrum.group(), n: spectrum.n(), mode, points }
    }
}

/// Discrete step count for a real threshold.
pub fn discrete_time(threshold: f64) -> u64 {
    threshold.max(0.0).ceil() as u64
}
