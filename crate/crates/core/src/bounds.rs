//! Explicit analytic bounds and the term sums behind them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::characters::CycleType;
use crate::combinat::{binomial, factorial};
use crate::distances::{l2_continuous, l2_discrete};
use crate::error::{out_of_range, Result};
use crate::oracle::{chi_square_on, element_measure, for_each_power, Walk, MAX_ORACLE_N};
use crate::real::{pairwise_sum, Real};
use crate::spectra::{random_transposition_measure, spectrum, uniform_class_measure, Group};

/// Largest degree for which the transpose-top theorem is also checked by brute force.
pub const TTR_ORACLE_N: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    RtDiscrete,
    RtContinuous,
    Ttr,
    FourCycle,
    RandomInsertion,
}

impl BoundKind {
    pub const ALL: [BoundKind; 5] =
        [BoundKind::RtDiscrete, BoundKind::RtContinuous, BoundKind::Ttr, BoundKind::FourCycle, BoundKind::RandomInsertion];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::RtDiscrete => "rt_discrete",
            BoundKind::RtContinuous => "rt_continuous",
            BoundKind::Ttr => "ttr",
            BoundKind::FourCycle => "four_cycle",
            BoundKind::RandomInsertion => "random_insertion",
        }
    }
}

impl std::str::FromStr for BoundKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| out_of_range("bound", format!("unknown theorem '{s}'")))
    }
}

/// One theorem checked at one `(n, c)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub n: usize,
    pub c: f64,
    pub t: f64,
    pub guaranteed: f64,
    pub computed: f64,
    pub pass: bool,
    pub terms: Vec<(String, f64)>,
}

/// One lemma inequality `value ≤ bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub n: usize,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl LemmaCheck {
    fn new(name: &str, n: usize, value: &Real, bound: &Real) -> Self {
        LemmaCheck { name: name.to_string(), n, value: value.to_f64(), bound: bound.to_f64(), pass: value <= bound }
    }
}

/// `ln k!` for `k = 0..=n`.
pub fn ln_factorials_real(n: usize, prec: usize) -> Vec<Real> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = Real::zero(prec);
    out.push(acc.clone());
    for k in 1..=n {
        acc = &acc + &Real::from_u64(k as u64, prec).ln();
        out.push(acc.clone());
    }
    out
}

fn ratio(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Shared log-space pieces for term sums at a fixed `n`.
struct TermTable {
    n: usize,
    prec: usize,
    lnf: Vec<Real>,
    n_ln_n: Real,
    ln_n: Real,
}

impl TermTable {
    fn new(n: usize, prec: usize) -> Self {
        let lnf = ln_factorials_real(n, prec);
        let ln_n = Real::from_u64(n as u64, prec).ln();
        let n_ln_n = &ln_n * &Real::from_u64(n as u64, prec);
        TermTable { n, prec, lnf, n_ln_n, ln_n }
    }

    /// `ln((n!/(n-j)!)² / j!)`.
    fn ln_weight(&self, j: usize) -> Real {
        let fall = &self.lnf[self.n] - &self.lnf[self.n - j];
        fall.mul_f64(2.0) - &self.lnf[j]
    }

    fn exp_or_zero(&self, base: &BigRational, exponent: &Real, weight: Real) -> Real {
        if base.is_zero() {
            return Real::zero(self.prec);
        }
        (weight + exponent * &Real::from_ratio(base, self.prec).ln()).exp()
    }

    fn rt_a(&self, j: usize) -> Real {
        let n = self.n as i64;
        let j = j as i64;
        let base = BigRational::one() - ratio(2 * j, n) * (BigRational::one() - ratio(j - 1, n));
        self.exp_or_zero(&base, &self.n_ln_n, self.ln_weight(j as usize))
    }

    fn rt_b(&self, j: usize) -> Real {
        let base = BigRational::one() - ratio(j as i64, self.n as i64);
        self.exp_or_zero(&base, &self.n_ln_n, self.ln_weight(j))
    }

    fn cont_a(&self, j: usize) -> Real {
        let jr = Real::from_u64(j as u64, self.prec);
        let frac = Real::one(self.prec) - Real::from_ratio(&ratio(j as i64, self.n as i64), self.prec);
        let exponent = -(&(&jr * &self.ln_n).mul_f64(2.0) * &frac) - jr.mul_f64(2.0);
        (self.ln_weight(j) + exponent).exp()
    }

    fn cont_b(&self, j: usize) -> Real {
        let jr = Real::from_u64(j as u64, self.prec);
        let exponent = -(&jr * &self.ln_n) - jr.mul_f64(2.0);
        (self.ln_weight(j) + exponent).exp()
    }

    fn sum(&self, range: std::ops::RangeInclusive<usize>, f: impl Fn(&Self, usize) -> Real) -> Real {
        let terms: Vec<Real> = range.map(|j| f(self, j)).collect();
        pairwise_sum(&terms, self.prec)
    }
}

/// Discrete-time random-transposition term sums.
#[derive(Clone, Debug)]
pub struct RtDiscreteTerms {
    pub n: usize,
    /// `(j, A_j)` for `1 ≤ j ≤ ⌊n/2⌋`.
    pub a: Vec<(usize, Real)>,
    /// `(j, B_j)` for `⌈n/2⌉ ≤ j ≤ n`.
    pub b: Vec<(usize, Real)>,
    /// `Σ_{j=1}^{⌊n/4⌋} A_j`.
    pub phi0: Real,
    /// `Σ_{j=⌈n/4⌉}^{⌊n/2⌋} A_j`.
    pub phi1: Real,
    /// `Σ_{j=⌈n/2⌉}^{n} B_j`.
    pub phi2: Real,
}

pub fn rt_discrete_terms(n: usize, prec: usize) -> Result<RtDiscreteTerms> {
    if n < 14 {
        return Err(out_of_range("rt_discrete_terms", format!("needs n >= 14, got {n}")));
    }
    Ok(rt_discrete_terms_unchecked(n, prec))
}

fn rt_discrete_terms_unchecked(n: usize, prec: usize) -> RtDiscreteTerms {
    let table = TermTable::new(n, prec);
    let a: Vec<(usize, Real)> = (1..=n / 2).map(|j| (j, table.rt_a(j))).collect();
    let b: Vec<(usize, Real)> = (n.div_ceil(2)..=n).map(|j| (j, table.rt_b(j))).collect();
    let pick = |lo: usize, hi: usize| {
        let terms: Vec<Real> = a.iter().filter(|(j, _)| (lo..=hi).contains(j)).map(|(_, v)| v.clone()).collect();
        pairwise_sum(&terms, prec)
    };
    let phi0 = pick(1, n / 4);
    let phi1 = pick(n.div_ceil(4), n / 2);
    let phi2 = pairwise_sum(&b.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>(), prec);
    RtDiscreteTerms { n, a, b, phi0, phi1, phi2 }
}

/// `Σ_{j=⌈n/2⌉}^{n} B_j`, defined from `n ≥ 9`.
pub fn rt_phi2(n: usize, prec: usize) -> Result<Real> {
    if n < 9 {
        return Err(out_of_range("rt_phi2", format!("needs n >= 9, got {n}")));
    }
    let table = TermTable::new(n, prec);
    Ok(table.sum(n.div_ceil(2)..=n, TermTable::rt_b))
}

impl RtDiscreteTerms {
    pub fn checks(&self) -> Vec<LemmaCheck> {
        let prec = self.phi0.precision();
        let n = self.n as f64;
        let nln = n * n.ln();
        vec![
            LemmaCheck::new("A_1 <= 1", self.n, &self.a[0].1, &Real::one(prec)),
            LemmaCheck::new("phi0 <= 2", self.n, &self.phi0, &Real::from_u64(2, prec)),
            LemmaCheck::new("phi1 <= exp(2 - n log n / 6)", self.n, &self.phi1, &exp_real(2.0 - nln / 6.0, prec)),
            LemmaCheck::new("phi2 <= exp(1 - 3 n log n / 1000)", self.n, &self.phi2, &exp_real(1.0 - 3.0 * nln / 1000.0, prec)),
        ]
    }
}

fn exp_real(x: f64, prec: usize) -> Real {
    Real::from_f64(x, prec).exp()
}

/// Continuous-time random-transposition term sums.
#[derive(Clone, Debug)]
pub struct RtContinuousTerms {
    pub n: usize,
    /// `(j, A_j)` for `1 ≤ j ≤ ⌊n/2⌋`.
    pub a: Vec<(usize, Real)>,
    /// `(j, B_j)` for `⌈n/2⌉ ≤ j ≤ n`, with the falling factorial squared.
    pub b: Vec<(usize, Real)>,
    /// `Σ_{j=1}^{⌊n/4⌋} A_j`.
    pub a_low: Real,
    /// `Σ_{j=⌈n/4⌉}^{⌊n/2⌋} A_j`.
    pub a_mid: Real,
    /// `Σ_{j=⌈n/2⌉}^{n} B_j`.
    pub gamma: Real,
}

pub fn rt_continuous_terms(n: usize, prec: usize) -> Result<RtContinuousTerms> {
    if n < 10 {
        return Err(out_of_range("rt_continuous_terms", format!("needs n >= 10, got {n}")));
    }
    let table = TermTable::new(n, prec);
    let a: Vec<(usize, Real)> = (1..=n / 2).map(|j| (j, table.cont_a(j))).collect();
    let b: Vec<(usize, Real)> = (n.div_ceil(2)..=n).map(|j| (j, table.cont_b(j))).collect();
    let pick = |lo: usize, hi: usize| {
        let terms: Vec<Real> = a.iter().filter(|(j, _)| (lo..=hi).contains(j)).map(|(_, v)| v.clone()).collect();
        pairwise_sum(&terms, prec)
    };
    let a_low = pick(1, n / 4);
    let a_mid = pick(n.div_ceil(4), n / 2);
    let gamma = pairwise_sum(&b.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>(), prec);
    Ok(RtContinuousTerms { n, a, b, a_low, a_mid, gamma })
}

/// Continuous-time terms `A_j` and `B_j` at any `1 ≤ j ≤ n`.
pub fn rt_continuous_term_pair(n: usize, j: usize, prec: usize) -> Result<(Real, Real)> {
    if j == 0 || j > n {
        return Err(out_of_range("rt_continuous_term_pair", format!("need 1 <= j <= n, got j={j}, n={n}")));
    }
    let table = TermTable::new(n, prec);
    Ok((table.cont_a(j), table.cont_b(j)))
}

impl RtContinuousTerms {
    pub fn checks(&self) -> Vec<LemmaCheck> {
        let prec = self.gamma.precision();
        let two_over_e = Real::from_u64(2, prec) / Real::one(prec).exp();
        let gamma_bound = (two_over_e.ln().mul_f64(1.5 * self.n as f64)).exp().mul_f64(2.0);
        vec![
            LemmaCheck::new("sum A_j (j <= n/4) <= 2/3", self.n, &self.a_low, &Real::from_ratio(&ratio(2, 3), prec)),
            LemmaCheck::new("sum A_j (n/4 <= j <= n/2) <= 1/4", self.n, &self.a_mid, &Real::from_ratio(&ratio(1, 4), prec)),
            LemmaCheck::new("gamma <= 2 (2/e)^(3n/2)", self.n, &self.gamma, &gamma_bound),
        ]
    }
}

/// `Σ_{j=1}^{n-1} (n!/(n-j)!)² (1/j!) (1 - j/n)^{2t}`.
pub fn ttr_bound_sum(n: usize, t: u64, prec: usize) -> Real {
    if n < 2 {
        return Real::zero(prec);
    }
    let table = TermTable::new(n, prec);
    let exponent = Real::from_u64(2 * t, prec);
    table.sum(1..=n - 1, |tab, j| {
        tab.exp_or_zero(&(BigRational::one() - ratio(j as i64, n as i64)), &exponent, tab.ln_weight(j))
    })
}

/// Exact `d₂` of transpose-top at step `t` by brute force.
pub fn ttr_oracle_distance(n: usize, t: u64, prec: usize) -> Result<Real> {
    let q = element_measure(&Walk::TransposeTop, n)?;
    let mut out = None;
    for_each_power(&q, t, |s, law| {
        if s == t {
            out = Some(chi_square_on(law, Group::Symmetric, prec));
        }
    })?;
    out.expect("final power visited")
}

fn theorem_time(kind: BoundKind, n: usize, c: f64) -> f64 {
    let n_f = n as f64;
    let base = n_f.ln() + c;
    match kind {
        BoundKind::RtDiscrete => (n_f / 2.0 * base).ceil(),
        BoundKind::RtContinuous | BoundKind::FourCycle => n_f / 2.0 * base,
        BoundKind::Ttr => (n_f * base).ceil(),
        BoundKind::RandomInsertion => (2.0 * n_f * base).ceil(),
    }
}

fn check_range(kind: BoundKind, n: usize, c: f64) -> Result<()> {
    let (min_n, min_c) = match kind {
        BoundKind::RtDiscrete => (15, 0.0),
        BoundKind::Ttr => (2, 0.0),
        BoundKind::RtContinuous | BoundKind::RandomInsertion => (10, 2.0),
        BoundKind::FourCycle => (11, 2.0),
    };
    if n < min_n || !(c >= min_c) || !c.is_finite() {
        return Err(out_of_range(
            "theorem_bound",
            format!("{} needs n >= {min_n} and c >= {min_c}, got n={n}, c={c}", kind.name()),
        ));
    }
    Ok(())
}

/// Exact distance at the theorem's time threshold against its guaranteed constant.
pub fn theorem_bound(kind: BoundKind, n: usize, c: f64, prec: usize) -> Result<BoundReport> {
    check_range(kind, n, c)?;
    let t = theorem_time(kind, n, c);
    let mut terms = Vec::new();
    let (computed, guaranteed) = match kind {
        BoundKind::RtDiscrete => {
            let s = spectrum(&random_transposition_measure(n)?, Group::Symmetric)?;
            let d = l2_discrete(&s, t as u64, prec);
            let parts = rt_discrete_terms(n, prec)?;
            let scale = exp_real(-2.0 * c, prec);
            terms.push(("phi0".to_string(), parts.phi0.to_f64()));
            terms.push(("phi1".to_string(), parts.phi1.to_f64()));
            terms.push(("phi2".to_string(), parts.phi2.to_f64()));
            terms.push(("term_bound_sq".to_string(), (&scale * &(&(&parts.phi0 + &parts.phi1) + &parts.phi2)).to_f64()));
            (d, exp_real(-c, prec).mul_f64(2.0))
        }
        BoundKind::RtContinuous => {
            let s = spectrum(&random_transposition_measure(n)?, Group::Symmetric)?;
            let d = l2_continuous(&s, &Real::from_f64(t, prec), prec);
            let parts = rt_continuous_terms(n, prec)?;
            terms.push(("a_low".to_string(), parts.a_low.to_f64()));
            terms.push(("a_mid".to_string(), parts.a_mid.to_f64()));
            terms.push(("gamma".to_string(), parts.gamma.to_f64()));
            (d, exp_real(-(c - 2.0), prec))
        }
        BoundKind::Ttr => {
            let sum = ttr_bound_sum(n, t as u64, prec);
            terms.push(("bound_sum".to_string(), sum.to_f64()));
            let d = if n <= TTR_ORACLE_N.min(MAX_ORACLE_N) {
                let exact = ttr_oracle_distance(n, t as u64, prec)?;
                terms.push(("oracle_d2".to_string(), exact.to_f64()));
                exact
            } else {
                sum.sqrt()
            };
            (d, exp_real(-c, prec) * Real::from_u64(2, prec).sqrt())
        }
        BoundKind::FourCycle => {
            let q = uniform_class_measure(&CycleType::cycle(4, n)?)?;
            let s = spectrum(&q, Group::Symmetric)?;
            (l2_continuous(&s, &Real::from_f64(t, prec), prec), exp_real(-(c - 2.0), prec))
        }
        BoundKind::RandomInsertion => {
            let s = spectrum(&random_transposition_measure(n)?, Group::Symmetric)?;
            let slowed = Real::from_f64(t / 4.0, prec);
            terms.push(("rt_continuous_time".to_string(), t / 4.0));
            (l2_continuous(&s, &slowed, prec), exp_real(-(c - 2.0) / 2.0, prec))
        }
    };
    Ok(BoundReport {
        name: kind.name().to_string(),
        n,
        c,
        t,
        guaranteed: guaranteed.to_f64(),
        computed: computed.to_f64(),
        pass: computed <= guaranteed,
        terms,
    })
}

/// Probability under the uniform law of at least `j` fixed points.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchingTail {
    pub value: BigRational,
    /// `e⁻¹ / (j-1)!` for `j ≥ 2`.
    pub bound: Option<Real>,
}

pub fn matching_tail(n: usize, j: usize, prec: usize) -> Result<MatchingTail> {
    if j == 0 || j > n {
        return Err(out_of_range("matching_tail", format!("need 1 <= j <= n, got j={j}, n={n}")));
    }
    // Σ_{m≥j} (1/m!) Σ_{v≤n-m} (-1)^v/v! = Σ_{m≥j} C(n,m) D_{n-m} / n!
    let mut derangements = vec![BigInt::one(), BigInt::zero()];
    for k in 2..=n {
        let next = BigInt::from(k - 1) * (&derangements[k - 1] + &derangements[k - 2]);
        derangements.push(next);
    }
    let count: BigInt = (j..=n).map(|m| BigInt::from(binomial(n, m)) * &derangements[n - m]).sum();
    let value = BigRational::new(count, BigInt::from(factorial(n)));
    let bound = (j >= 2).then(|| (-Real::one(prec)).exp() / Real::from_biguint(&factorial(j - 1), prec));
    Ok(MatchingTail { value, bound })
}

/// `(√(2πn)(n/e)ⁿ, e^{1/(12n)}√(2πn)(n/e)ⁿ)`.
pub fn stirling_envelope(n: usize, prec: usize) -> Result<(Real, Real)> {
    if n == 0 {
        return Err(out_of_range("stirling_envelope", "needs n >= 1"));
    }
    let nr = Real::from_u64(n as u64, prec);
    let ln_base = (Real::pi(prec) * &nr).mul_f64(2.0).ln().mul_f64(0.5) + &nr * &(nr.ln() - Real::one(prec));
    let lower = ln_base.exp();
    let upper = (ln_base + Real::one(prec) / nr.mul_f64(12.0)).exp();
    Ok((lower, upper))
}

/// Whether `2 ln(1-x) ≥ -w x`.
pub fn calculus_claim(w: f64, x: f64) -> bool {
    if x >= 1.0 {
        return false;
    }
    2.0 * (-x).ln_1p() >= -w * x
}

#[cfg(test)]
mod tests {
    use super::*;

    const PREC: usize = 128;

    #[test]
    fn rt_first_term() {
        let t = rt_discrete_terms(20, PREC).unwrap();
        let a1 = t.a[0].1.to_f64();
        let direct = 400.0 * (1.0 - 0.1f64).powf(20.0 * 20f64.ln());
        assert!((a1 - direct).abs() < 1e-12 * direct);
        assert!(a1 <= 1.0);
        assert!(rt_discrete_terms(13, PREC).is_err());
        assert!(t.phi0.to_f64() <= 2.0);
    }

    #[test]
    fn continuous_terms_meet_at_half() {
        for n in [10usize, 12, 40] {
            let (a, b) = rt_continuous_term_pair(n, n / 2, PREC).unwrap();
            assert!((a.to_f64() / b.to_f64() - 1.0).abs() < 1e-25);
        }
        assert!(rt_continuous_terms(9, PREC).is_err());
    }

    #[test]
    fn ttr_sum_values() {
        let n = 25usize;
        let t0 = theorem_time(BoundKind::Ttr, n, 0.0) as u64;
        assert!(ttr_bound_sum(n, t0, PREC).to_f64() <= 2.0);
        let t1 = theorem_time(BoundKind::Ttr, n, 1.0) as u64;
        assert!(ttr_bound_sum(n, t1, PREC).to_f64() <= 2.0 * (-2f64).exp());
        let mut last = f64::INFINITY;
        for t in (0..400).step_by(40) {
            let v = ttr_bound_sum(n, t, PREC).to_f64();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn matching_tail_examples() {
        let top = matching_tail(7, 7, PREC).unwrap();
        assert_eq!(top.value, BigRational::new(1.into(), 5040.into()));
        let two = matching_tail(10, 2, PREC).unwrap();
        let v = crate::characters::ratio_to_f64(&two.value);
        assert!(v <= two.bound.unwrap().to_f64());
        assert!(matching_tail(4, 0, PREC).is_err());
        assert!(matching_tail(1, 1, PREC).unwrap().bound.is_none());
    }

    #[test]
    fn stirling_examples() {
        let (lo, hi) = stirling_envelope(10, PREC).unwrap();
        assert!(lo.to_f64() <= 3_628_800.0 && 3_628_800.0 <= hi.to_f64());
        let (lo, hi) = stirling_envelope(1, PREC).unwrap();
        assert!((lo.to_f64() - 0.922_137_0).abs() < 1e-6);
        assert!((hi.to_f64() - 1.002_274_0).abs() < 1e-6);
    }

    #[test]
    fn calculus_examples() {
        assert!(calculus_claim(4.0, 0.75));
        assert!(calculus_claim(4.0, 0.0));
        assert!(!calculus_claim(4.0, 0.9));
        assert!(!calculus_claim(4.0, 1.0));
    }

    #[test]
    fn theorem_examples() {
        let r = theorem_bound(BoundKind::RtDiscrete, 20, 0.0, PREC).unwrap();
        assert!(r.pass && r.computed <= 2.0);
        assert_eq!(r.t, 30.0);
        let r = theorem_bound(BoundKind::RtContinuous, 15, 2.0, PREC).unwrap();
        assert!(r.pass && r.computed <= 1.0);
        let r = theorem_bound(BoundKind::FourCycle, 11, 2.0, PREC).unwrap();
        assert!(r.pass && r.computed <= 1.0);
        assert!(theorem_bound(BoundKind::FourCycle, 10, 2.0, PREC).is_err());
        assert!(theorem_bound(BoundKind::RtContinuous, 12, 1.0, PREC).is_err());
        assert_eq!("four_cycle".parse::<BoundKind>().unwrap(), BoundKind::FourCycle);
    }
}
