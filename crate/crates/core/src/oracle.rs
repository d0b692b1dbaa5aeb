//! Brute-force computations over the whole of `S_n` for small `n`.
//!
//! Permutations are arrays of images on `0..n`, composed as
//! `(στ)(i) = σ(τ(i))`, and indexed by Lehmer code. A walk moves by right
//! multiplication, `X_{t+1} = X_t ξ`, so convolution is
//! `(f*q)(x) = Σ_y f(x y⁻¹) q(y)` and the kernel is `K(x,y) = q(x⁻¹y)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::characters::CycleType;
use crate::combinat::factorial;
use crate::error::{out_of_range, Error, Result};
use crate::real::{pairwise_sum, Real};
use crate::distances::{l2_continuous, l2_discrete};
use crate::spectra::{lazy_class_measure, random_transposition_measure, spectrum, uniform_class_measure, ClassMeasure, Group};

/// Largest degree the oracle will enumerate.
pub const MAX_ORACLE_N: usize = 8;
/// Largest degree for dense quadratic-form eigenproblems.
pub const MAX_FORM_N: usize = 6;
/// Largest degree for dense operator eigenvalues.
pub const MAX_EIGEN_N: usize = 7;

pub type Perm = Vec<u8>;

pub fn identity(n: usize) -> Perm {
    (0..n as u8).collect()
}

/// `(a b)(i) = a(b(i))`.
pub fn compose(a: &[u8], b: &[u8]) -> Perm {
    b.iter().map(|&i| a[i as usize]).collect()
}

pub fn inverse(p: &[u8]) -> Perm {
    let mut out = vec![0u8; p.len()];
    for (i, &v) in p.iter().enumerate() {
        out[v as usize] = i as u8;
    }
    out
}

pub fn fixed_points(p: &[u8]) -> usize {
    p.iter().enumerate().filter(|&(i, &v)| i == v as usize).count()
}

pub fn cycle_type_of(p: &[u8]) -> CycleType {
    let mut seen = vec![false; p.len()];
    let mut cycles = Vec::new();
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = p[i] as usize;
            len += 1;
        }
        cycles.push(len);
    }
    CycleType::new(cycles).expect("cycle lengths are positive")
}

pub fn is_even(p: &[u8]) -> bool {
    cycle_type_of(p).is_even()
}

/// Rank of `p` among all permutations of its degree in lexicographic order.
pub fn lehmer_rank(p: &[u8]) -> usize {
    let n = p.len();
    let mut rank = 0usize;
    for i in 0..n {
        let smaller = p[i + 1..].iter().filter(|&&v| v < p[i]).count();
        rank = rank * (n - i) + smaller;
    }
    rank
}

pub fn lehmer_unrank(n: usize, mut rank: usize) -> Perm {
    let mut digits = vec![0usize; n];
    for i in (0..n).rev() {
        let base = n - i;
        digits[i] = rank % base;
        rank /= base;
    }
    let mut pool: Vec<u8> = (0..n as u8).collect();
    digits.into_iter().map(|d| pool.remove(d)).collect()
}

/// All of `S_n` in Lehmer order.
#[derive(Clone, Debug)]
pub struct SymmetricGroup {
    n: usize,
    elements: Vec<Perm>,
}

impl SymmetricGroup {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_ORACLE_N {
            return Err(Error::ResourceGuard { what: "group oracle", n, limit: MAX_ORACLE_N });
        }
        let order = (1..=n).product::<usize>();
        Ok(SymmetricGroup { n, elements: (0..order).map(|r| lehmer_unrank(n, r)).collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn rank(&self, p: &[u8]) -> usize {
        lehmer_rank(p)
    }

    /// `x ↦ rank(x s)` for every `x`.
    fn right_table(&self, s: &[u8]) -> Vec<u32> {
        self.elements.iter().map(|x| lehmer_rank(&compose(x, s)) as u32).collect()
    }
}

/// Walks the oracle can build element by element.
#[derive(Clone, Debug, PartialEq)]
pub enum Walk {
    RandomTransposition,
    TransposeTop,
    RandomInsertion,
    Class(CycleType),
    Lazy(CycleType, BigRational),
}

impl Walk {
    /// Short name: `rt`, `ttr`, `ri`, `class:<cycles>` or `lazy:<cycles>:<eps>`.
    pub fn name(&self) -> String {
        let cycles = |c: &CycleType| c.nontrivial_cycles().iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Walk::RandomTransposition => "rt".to_string(),
            Walk::TransposeTop => "ttr".to_string(),
            Walk::RandomInsertion => "ri".to_string(),
            Walk::Class(c) => format!("class:{}", cycles(c)),
            Walk::Lazy(c, eps) => format!("lazy:{}:{eps}", cycles(c)),
        }
    }

    /// Parses the format of [`Walk::name`] for degree `n`. Cycle lengths are
    /// comma-separated and fixed points are implied; `eps` is a fraction
    /// (`1/2`) or a decimal (`0.25`).
    pub fn parse(spec: &str, n: usize) -> Result<Walk> {
        let bad = |detail: String| out_of_range("walk", detail);
        let cycles = |text: &str| -> Result<CycleType> {
            let lens = text
                .split(',')
                .map(|p| p.trim().parse::<usize>().map_err(|_| bad(format!("bad cycle length '{p}' in '{spec}'"))))
                .collect::<Result<Vec<_>>>()?;
            let c = CycleType::with_degree(lens, n)?;
            if c.is_identity() {
                return Err(bad(format!("'{spec}' is the identity class")));
            }
            Ok(c)
        };
        let mut parts = spec.splitn(3, ':');
        match (parts.next(), parts.next(), parts.next()) {
            (Some("rt"), None, None) => Ok(Walk::RandomTransposition),
            (Some("ttr"), None, None) => Ok(Walk::TransposeTop),
            (Some("ri"), None, None) => Ok(Walk::RandomInsertion),
            (Some("class"), Some(c), None) => Ok(Walk::Class(cycles(c)?)),
            (Some("lazy"), Some(c), Some(eps)) => {
                let eps = parse_ratio(eps)?;
                if !eps.is_positive() || eps >= BigRational::one() {
                    return Err(bad(format!("holding probability in '{spec}' must lie in (0,1)")));
                }
                Ok(Walk::Lazy(cycles(c)?, eps))
            }
            _ => Err(bad(format!("unknown walk '{spec}'"))),
        }
    }
}

/// Exact rational from `a/b` or a decimal literal.
pub fn parse_ratio(text: &str) -> Result<BigRational> {
    let bad = || out_of_range("ratio", format!("cannot parse '{text}'"));
    let text = text.trim();
    if let Some((a, b)) = text.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let numer: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(numer, denom);
    Ok(if negative { -r } else { r })
}

/// Random-insertion cycle `c_{i,j}` on 0-based positions: the card at
/// position `j` is moved to position `i`.
pub fn insertion_cycle(n: usize, i: usize, j: usize) -> Perm {
    let mut c = identity(n);
    if i < j {
        c[i] = j as u8;
        for k in i + 1..=j {
            c[k] = (k - 1) as u8;
        }
    } else if j < i {
        for k in j..i {
            c[k] = (k + 1) as u8;
        }
        c[i] = j as u8;
    }
    c
}

/// A probability measure or law on `S_n`, dense in Lehmer order.
#[derive(Clone, Debug)]
pub struct GroupDistribution {
    n: usize,
    values: Values,
}

#[derive(Clone, Debug)]
enum Values {
    /// `numer[x] / denom`.
    Exact { numer: Vec<BigUint>, denom: BigUint },
    Approx(Vec<Real>),
}

impl GroupDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        match &self.values {
            Values::Exact { numer, .. } => numer.len(),
            Values::Approx(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.values, Values::Exact { .. })
    }

    pub fn point_mass(n: usize) -> Result<Self> {
        let order = group_order(n)?;
        let mut numer = vec![BigUint::zero(); order];
        numer[0] = BigUint::one();
        Ok(GroupDistribution { n, values: Values::Exact { numer, denom: BigUint::one() } })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        let order = group_order(n)?;
        Ok(GroupDistribution {
            n,
            values: Values::Exact { numer: vec![BigUint::one(); order], denom: BigUint::from(order) },
        })
    }

    /// Exact probability of the element with Lehmer rank `x`; `None` for approximate laws.
    pub fn exact(&self, x: usize) -> Option<BigRational> {
        match &self.values {
            Values::Exact { numer, denom } => Some(BigRational::new(numer[x].clone().into(), denom.clone().into())),
            Values::Approx(_) => None,
        }
    }

    pub fn real(&self, x: usize, prec: usize) -> Real {
        match &self.values {
            Values::Exact { numer, denom } => {
                Real::from_biguint(&numer[x], prec + 64) / Real::from_biguint(denom, prec + 64)
            }
            Values::Approx(v) => v[x].clone(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.len()).map(|x| self.real(x, 64).to_f64()).collect()
    }

    /// Non-zero entries as `(rank, probability)`.
    pub fn support_f64(&self) -> Vec<(usize, f64)> {
        self.to_f64().into_iter().enumerate().filter(|&(_, p)| p != 0.0).collect()
    }

    /// Total mass as a real number.
    pub fn total(&self, prec: usize) -> Real {
        match &self.values {
            Values::Exact { numer, denom } => {
                let s: BigUint = numer.iter().sum();
                Real::from_biguint(&s, prec) / Real::from_biguint(denom, prec)
            }
            Values::Approx(v) => pairwise_sum(v, prec),
        }
    }

    /// True if every charged element is an even permutation.
    pub fn supported_on_alternating(&self, group: &SymmetricGroup) -> bool {
        (0..self.len()).all(|x| self.real(x, 64).is_zero() || is_even(&group.elements()[x]))
    }

    fn check_normalized(&self) -> Result<()> {
        match &self.values {
            Values::Exact { numer, denom } => {
                let s: BigUint = numer.iter().sum();
                if &s != denom {
                    let total = Real::from_biguint(&s, 64) / Real::from_biguint(denom, 64);
                    return Err(Error::Unnormalized { total: total.to_f64() });
                }
            }
            Values::Approx(v) => {
                let total = pairwise_sum(v, 128).to_f64();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Unnormalized { total });
                }
            }
        }
        Ok(())
    }
}

fn group_order(n: usize) -> Result<usize> {
    if n > MAX_ORACLE_N {
        return Err(Error::ResourceGuard { what: "group oracle", n, limit: MAX_ORACLE_N });
    }
    Ok((1..=n).product())
}

/// Per-element measure of a walk.
pub fn element_measure(walk: &Walk, n: usize) -> Result<GroupDistribution> {
    let order = group_order(n)?;
    if n == 0 {
        return GroupDistribution::point_mass(0);
    }
    let mut weights: Vec<(Perm, BigRational)> = Vec::new();
    let frac = |a: usize, b: usize| BigRational::new(BigInt::from(a), BigInt::from(b));
    match walk {
        Walk::RandomTransposition => {
            for i in 0..n {
                for j in 0..n {
                    let mut p = identity(n);
                    p.swap(i, j);
                    weights.push((p, frac(1, n * n)));
                }
            }
        }
        Walk::TransposeTop => {
            for i in 0..n {
                let mut p = identity(n);
                p.swap(0, i);
                weights.push((p, frac(1, n)));
            }
        }
        Walk::RandomInsertion => {
            for i in 0..n {
                for j in 0..n {
                    weights.push((insertion_cycle(n, i, j), frac(1, n * n)));
                }
            }
        }
        Walk::Class(class) | Walk::Lazy(class, _) => {
            if class.degree() != n {
                return Err(Error::DegreeMismatch { expected: n, found: class.degree() });
            }
            let group = SymmetricGroup::new(n)?;
            let members: Vec<&Perm> = group.elements().iter().filter(|p| cycle_type_of(p) == *class).collect();
            let (hold, step) = match walk {
                Walk::Lazy(_, eps) => {
                    if !eps.is_positive() || *eps >= BigRational::one() {
                        return Err(out_of_range("element_measure", format!("eps must lie in (0,1), got {eps}")));
                    }
                    (eps.clone(), BigRational::one() - eps)
                }
                _ => (BigRational::zero(), BigRational::one()),
            };
            if class.is_identity() {
                return Err(out_of_range("element_measure", "identity class is not a walk generator"));
            }
            weights.push((identity(n), hold));
            let each = step / BigRational::from_integer(BigInt::from(members.len()));
            for p in members {
                weights.push((p.clone(), each.clone()));
            }
        }
    }
    let mut dense = vec![BigRational::zero(); order];
    for (p, w) in weights {
        dense[lehmer_rank(&p)] += w;
    }
    from_rationals(n, dense)
}

/// Per-element measure of a class measure.
pub fn element_measure_of(q: &ClassMeasure) -> Result<GroupDistribution> {
    let group = SymmetricGroup::new(q.n())?;
    let dense: Vec<BigRational> = group.elements().iter().map(|p| q.element_probability(&cycle_type_of(p))).collect();
    from_rationals(q.n(), dense)
}

fn from_rationals(n: usize, dense: Vec<BigRational>) -> Result<GroupDistribution> {
    let denom = dense.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let numer: Vec<BigUint> = dense
        .iter()
        .map(|r| {
            let v = r.numer() * (&denom / r.denom());
            v.to_biguint().expect("probabilities are non-negative")
        })
        .collect();
    let dist = GroupDistribution { n, values: Values::Exact { numer, denom: denom.to_biguint().expect("positive") } };
    dist.check_normalized()?;
    Ok(dist)
}

/// Sparse exact form of a measure: `(element, index table, integer weight)` over a shared denominator.
struct Steps {
    tables: Vec<(Vec<u32>, BigUint)>,
    denom: BigUint,
}

fn steps(group: &SymmetricGroup, q: &GroupDistribution) -> Result<Steps> {
    let Values::Exact { numer, denom } = &q.values else {
        return Err(out_of_range("convolution", "step measure must be exact"));
    };
    let tables = numer
        .iter()
        .enumerate()
        .filter(|(_, w)| !w.is_zero())
        .map(|(y, w)| (group.right_table(&inverse(&group.elements()[y])), w.clone()))
        .collect();
    Ok(Steps { tables, denom: denom.clone() })
}

fn step_once(f: &[BigUint], steps: &Steps) -> Vec<BigUint> {
    (0..f.len())
        .into_par_iter()
        .map(|x| {
            let mut acc = BigUint::zero();
            for (table, w) in &steps.tables {
                let src = &f[table[x] as usize];
                if !src.is_zero() {
                    acc += src * w;
                }
            }
            acc
        })
        .collect()
}

/// `q^{(t)}`, exactly.
pub fn convolution_power(q: &GroupDistribution, t: u64) -> Result<GroupDistribution> {
    let group = SymmetricGroup::new(q.n)?;
    let st = steps(&group, q)?;
    let mut cur = GroupDistribution::point_mass(q.n)?;
    for _ in 0..t {
        cur = convolve_exact(&cur, &st)?;
    }
    Ok(cur)
}

fn convolve_exact(f: &GroupDistribution, st: &Steps) -> Result<GroupDistribution> {
    let Values::Exact { numer, denom } = &f.values else {
        return Err(out_of_range("convolution", "input must be exact"));
    };
    let next = step_once(numer, st);
    Ok(GroupDistribution { n: f.n, values: Values::Exact { numer: next, denom: denom * &st.denom } })
}

/// Convolution powers `q^{(0)}, ..., q^{(t_max)}` passed to `visit` in order.
pub fn for_each_power(
    q: &GroupDistribution,
    t_max: u64,
    mut visit: impl FnMut(u64, &GroupDistribution),
) -> Result<()> {
    let group = SymmetricGroup::new(q.n)?;
    let st = steps(&group, q)?;
    let mut cur = GroupDistribution::point_mass(q.n)?;
    visit(0, &cur);
    for s in 1..=t_max {
        cur = convolve_exact(&cur, &st)?;
        visit(s, &cur);
    }
    Ok(())
}

/// Poisson weights `e^{-t} t^s / s!` for `s = 0..=T`, with `T` the first index
/// whose cumulative mass reaches `1 - tail_tol`.
pub fn poisson_weights(t: &Real, tail_tol: f64, prec: usize) -> Vec<Real> {
    let one = Real::one(prec);
    let target = &one - &Real::from_f64(tail_tol, prec);
    let mut w = (-t).exp();
    let mut cumulative = w.clone();
    let mut out = vec![w.clone()];
    let mut s = 0u64;
    while cumulative < target {
        s += 1;
        w = &w * t / Real::from_u64(s, prec);
        cumulative = &cumulative + &w;
        out.push(w.clone());
        if s > 100_000 {
            break;
        }
    }
    out
}

/// Continuous-time laws `h_t` for several times, sharing convolution powers.
/// Returns each law with its truncation index.
pub fn continuous_laws(
    q: &GroupDistribution,
    times: &[Real],
    tail_tol: f64,
    prec: usize,
) -> Result<Vec<(GroupDistribution, usize)>> {
    let weights: Vec<Vec<Real>> = times.iter().map(|t| poisson_weights(t, tail_tol, prec)).collect();
    let t_max = weights.iter().map(|w| w.len() - 1).max().unwrap_or(0);
    let order = group_order(q.n)?;
    let mut acc: Vec<Vec<Real>> = vec![vec![Real::zero(prec); order]; times.len()];
    for_each_power(q, t_max as u64, |s, power| {
        let s = s as usize;
        let vals: Vec<Real> = (0..order).into_par_iter().map(|x| power.real(x, prec)).collect();
        for (k, w) in weights.iter().enumerate() {
            if let Some(ws) = w.get(s) {
                for (slot, v) in acc[k].iter_mut().zip(&vals) {
                    if !v.is_zero() {
                        *slot = &*slot + &(ws * v);
                    }
                }
            }
        }
    })?;
    Ok(acc
        .into_iter()
        .zip(&weights)
        .map(|(values, w)| (GroupDistribution { n: q.n, values: Values::Approx(values) }, w.len() - 1))
        .collect())
}

pub fn continuous_law(q: &GroupDistribution, t: &Real, tail_tol: f64, prec: usize) -> Result<(GroupDistribution, usize)> {
    Ok(continuous_laws(q, std::slice::from_ref(t), tail_tol, prec)?.remove(0))
}

/// `(|H| Σ_{x∈H} |p(x) - 1/|H||²)^{1/2}` for `H` the whole group or `A_n`.
pub fn chi_square_on(dist: &GroupDistribution, group: Group, prec: usize) -> Result<Real> {
    dist.check_normalized()?;
    let members = members(dist.n, group)?;
    let h = members.len();
    match &dist.values {
        Values::Exact { numer, denom } => {
            let h_big = BigInt::from(h);
            let d = BigInt::from(denom.clone());
            let mut total = BigInt::zero();
            for &x in &members {
                let diff = &h_big * BigInt::from(numer[x].clone()) - &d;
                total += &diff * &diff;
            }
            let outside: BigUint = (0..numer.len()).filter(|x| !members.contains(x)).map(|x| &numer[x]).sum();
            if !outside.is_zero() {
                return Err(out_of_range("chi_square", "law charges elements outside the subgroup"));
            }
            let sq = BigRational::new(total, &h_big * &d * &d);
            Ok(Real::from_ratio(&sq, prec).sqrt())
        }
        Values::Approx(v) => {
            let u = Real::one(prec) / Real::from_u64(h as u64, prec);
            let terms: Vec<Real> = members
                .iter()
                .map(|&x| {
                    let diff = &v[x] - &u;
                    &diff * &diff
                })
                .collect();
            Ok((pairwise_sum(&terms, prec) * Real::from_u64(h as u64, prec)).sqrt())
        }
    }
}

/// `½ Σ_{x∈H} |p(x) - 1/|H||`.
pub fn tv_on(dist: &GroupDistribution, group: Group, prec: usize) -> Result<Real> {
    dist.check_normalized()?;
    let members = members(dist.n, group)?;
    let h = members.len();
    match &dist.values {
        Values::Exact { numer, denom } => {
            let h_big = BigInt::from(h);
            let d = BigInt::from(denom.clone());
            let total: BigInt = members
                .iter()
                .map(|&x| (&h_big * BigInt::from(numer[x].clone()) - &d).abs())
                .sum();
            Ok(Real::from_ratio(&BigRational::new(total, BigInt::from(2) * &h_big * &d), prec))
        }
        Values::Approx(v) => {
            let u = Real::one(prec) / Real::from_u64(h as u64, prec);
            let terms: Vec<Real> = members.iter().map(|&x| (&v[x] - &u).abs()).collect();
            Ok(pairwise_sum(&terms, prec).mul_f64(0.5))
        }
    }
}

fn members(n: usize, group: Group) -> Result<Vec<usize>> {
    let g = SymmetricGroup::new(n)?;
    Ok(match group {
        Group::Symmetric => (0..g.order()).collect(),
        Group::Alternating => (0..g.order()).filter(|&x| is_even(&g.elements()[x])).collect(),
    })
}

/// A real-valued function on `S_n` in Lehmer order.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupFunction {
    pub n: usize,
    pub values: Vec<f64>,
}

impl GroupFunction {
    pub fn from_fn(n: usize, f: impl Fn(&[u8]) -> f64) -> Result<Self> {
        let g = SymmetricGroup::new(n)?;
        Ok(GroupFunction { n, values: g.elements().iter().map(|p| f(p)).collect() })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_fn(n, |_| c)
    }

    pub fn square_sum(&self) -> f64 {
        neumaier(self.values.iter().map(|v| v * v))
    }
}

/// Compensated summation.
pub fn neumaier(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Number of fixed points minus one.
pub fn fixed_point_function(n: usize) -> Result<GroupFunction> {
    GroupFunction::from_fn(n, |p| fixed_points(p) as f64 - 1.0)
}

/// Eigenfunction of transpose-top with eigenvalue `1 - 1/n`.
pub fn ttr_remark_function(n: usize) -> Result<GroupFunction> {
    if n < 3 {
        return Err(out_of_range("ttr_remark_function", "needs n >= 3"));
    }
    let scale = ((n - 1) as f64 / (n - 2) as f64).sqrt();
    GroupFunction::from_fn(n, |p| {
        let phi = fixed_points(p) as f64;
        if p[0] == 0 {
            scale * (phi - 2.0)
        } else {
            scale * (phi - 1.0 + 1.0 / (n - 1) as f64)
        }
    })
}

/// Eigenvalue of Wilson's function under random insertion, `(n+1)(n-2)/n²`.
pub fn ri_wilson_eigenvalue(n: usize) -> BigRational {
    BigRational::new(BigInt::from((n + 1) * n) - BigInt::from(2 * n + 2), BigInt::from(n * n))
}

/// Wilson's function `-n + 4/(n-1)^2 Σ_j σ(j) j` with positions `0..n`.
pub fn ri_wilson_function(n: usize) -> Result<GroupFunction> {
    if n < 2 {
        return Err(out_of_range("ri_wilson_function", "needs n >= 2"));
    }
    let c = 4.0 / ((n - 1) * (n - 1)) as f64;
    GroupFunction::from_fn(n, |p| {
        let s: usize = p.iter().enumerate().map(|(j, &v)| j * v as usize).sum();
        -(n as f64) + c * s as f64
    })
}

/// `Σ_σ f_ρ(σ)^2` for Wilson's function, exactly.
pub fn ri_wilson_square_sum_exact(n: usize) -> Result<BigRational> {
    let g = SymmetricGroup::new(n)?;
    let c = BigRational::new(4.into(), BigInt::from((n - 1) * (n - 1)));
    let mut total = BigRational::zero();
    for p in g.elements() {
        let s: usize = p.iter().enumerate().map(|(j, &v)| j * v as usize).sum();
        let f = BigRational::from_integer(-BigInt::from(n)) + &c * BigInt::from(s);
        total += &f * &f;
    }
    Ok(total)
}

struct Kernel {
    tables: Vec<(Vec<u32>, f64)>,
}

/// Right-multiplication tables for the support of `q`, both for `x ↦ x y`
/// (kernel rows) and `x ↦ x y⁻¹` (convolution).
fn kernel(q: &GroupDistribution, inverse_side: bool) -> Result<(SymmetricGroup, Kernel)> {
    let g = SymmetricGroup::new(q.n)?;
    let tables = q
        .support_f64()
        .into_iter()
        .map(|(y, w)| {
            let s = if inverse_side { inverse(&g.elements()[y]) } else { g.elements()[y].clone() };
            (g.right_table(&s), w)
        })
        .collect();
    Ok((g, Kernel { tables }))
}

fn check_degree(f: &GroupFunction, q: &GroupDistribution) -> Result<()> {
    if f.n != q.n {
        return Err(Error::DegreeMismatch { expected: q.n, found: f.n });
    }
    Ok(())
}

/// `f * q`.
pub fn convolve_function(f: &GroupFunction, q: &GroupDistribution) -> Result<GroupFunction> {
    check_degree(f, q)?;
    let (_, k) = kernel(q, true)?;
    let values = (0..f.values.len())
        .into_par_iter()
        .map(|x| neumaier(k.tables.iter().map(|(t, w)| f.values[t[x] as usize] * w)))
        .collect();
    Ok(GroupFunction { n: f.n, values })
}

/// `max_x |(f*q)(x) - β f(x)|`.
pub fn eigenfunction_residual(f: &GroupFunction, q: &GroupDistribution, beta: f64) -> Result<f64> {
    let fq = convolve_function(f, q)?;
    Ok(fq.values.iter().zip(&f.values).map(|(a, b)| (a - beta * b).abs()).fold(0.0, f64::max))
}

/// `max_x ½ Σ_y |g(x) - g(y)|² K(x,y)`.
pub fn square_gradient_sup(f: &GroupFunction, q: &GroupDistribution) -> Result<f64> {
    check_degree(f, q)?;
    let (_, k) = kernel(q, false)?;
    Ok((0..f.values.len())
        .into_par_iter()
        .map(|x| {
            0.5 * neumaier(k.tables.iter().map(|(t, w)| {
                let d = f.values[x] - f.values[t[x] as usize];
                d * d * w
            }))
        })
        .reduce(|| 0.0, f64::max))
}

/// `E(f,f) = ½ Σ_{x,y} (f(x) - f(y))² ν(x) K(x,y)` with `ν` uniform.
pub fn dirichlet_form(q: &GroupDistribution, f: &GroupFunction) -> Result<f64> {
    check_degree(f, q)?;
    let (g, k) = kernel(q, false)?;
    let per_x: Vec<f64> = (0..f.values.len())
        .into_par_iter()
        .map(|x| {
            neumaier(k.tables.iter().map(|(t, w)| {
                let d = f.values[x] - f.values[t[x] as usize];
                d * d * w
            }))
        })
        .collect();
    Ok(0.5 * neumaier(per_x) / g.order() as f64)
}

/// Dense `K(x,y) = q(x⁻¹y)`.
pub fn operator_matrix(q: &GroupDistribution) -> Result<DMatrix<f64>> {
    if q.n > MAX_EIGEN_N {
        return Err(Error::ResourceGuard { what: "dense operator", n: q.n, limit: MAX_EIGEN_N });
    }
    let (g, k) = kernel(q, false)?;
    let mut m = DMatrix::zeros(g.order(), g.order());
    for (table, w) in &k.tables {
        for x in 0..g.order() {
            m[(x, table[x] as usize)] += w;
        }
    }
    Ok(m)
}

/// Eigenvalues of the walk operator of a symmetric measure, in decreasing order.
pub fn operator_eigenvalues(q: &GroupDistribution) -> Result<Vec<f64>> {
    let m = operator_matrix(q)?;
    let sym = (&m + m.transpose()) * 0.5;
    let mut eigs: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    Ok(eigs)
}

/// Minimum eigenvalue of `a·E_q - E_q̃` in a `ν`-orthonormal basis; a
/// non-negative value certifies `E_q̃ ≤ a·E_q`.
pub fn comparison_gap(q: &GroupDistribution, q_tilde: &GroupDistribution, a: f64) -> Result<f64> {
    if q.n != q_tilde.n {
        return Err(Error::DegreeMismatch { expected: q.n, found: q_tilde.n });
    }
    if q.n > MAX_FORM_N {
        return Err(Error::ResourceGuard { what: "comparison_gap", n: q.n, limit: MAX_FORM_N });
    }
    let k = operator_matrix(q)?;
    let kt = operator_matrix(q_tilde)?;
    let size = k.nrows();
    let id = DMatrix::<f64>::identity(size, size);
    let form = (&id - &k) * a - (&id - &kt);
    let sym = (&form + form.transpose()) * 0.5;
    Ok(SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Smallest `a` with `E_q̃ ≤ a·E_q`, from the generalized eigenproblem on
/// functions orthogonal to constants. Needs `q` to generate an ergodic walk.
pub fn comparison_constant(q: &GroupDistribution, q_tilde: &GroupDistribution) -> Result<f64> {
    if q.n != q_tilde.n {
        return Err(Error::DegreeMismatch { expected: q.n, found: q_tilde.n });
    }
    if q.n > MAX_FORM_N {
        return Err(Error::ResourceGuard { what: "comparison_constant", n: q.n, limit: MAX_FORM_N });
    }
    let k = operator_matrix(q)?;
    let kt = operator_matrix(q_tilde)?;
    let size = k.nrows();
    let id = DMatrix::<f64>::identity(size, size);
    let flat = DMatrix::<f64>::from_element(size, size, 1.0 / size as f64);
    let b = &id - &k;
    let b = (&b + b.transpose()) * 0.5 + flat;
    let c = &id - &kt;
    let c = (&c + c.transpose()) * 0.5;
    let chol = nalgebra::Cholesky::new(b).ok_or_else(|| out_of_range("comparison_constant", "walk is not ergodic"))?;
    let l = chol.l();
    let x = l.solve_lower_triangular(&c).expect("triangular factor is invertible");
    let m = l.solve_lower_triangular(&x.transpose()).expect("triangular factor is invertible");
    let m = (&m + m.transpose()) * 0.5;
    Ok(SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// `d₂` from operator eigenvalues (trivial one excluded): `(Σ β^{2t})^{1/2}`.
pub fn l2_from_eigenvalues(eigs: &[f64], t: u64) -> f64 {
    let mut sorted = eigs.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    neumaier(sorted.iter().skip(1).map(|b| b.powi(2 * t as i32))).max(0.0).sqrt()
}

/// `(Σ e^{-2t(1-β)})^{1/2}` over operator eigenvalues, trivial one excluded.
pub fn l2_continuous_from_eigenvalues(eigs: &[f64], t: f64) -> f64 {
    let mut sorted = eigs.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    neumaier(sorted.iter().skip(1).map(|b| (-2.0 * t * (1.0 - b)).exp())).sqrt()
}

/// Agreement between brute-force and spectral `d₂` for one walk.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OracleCheck {
    pub walk: String,
    pub n: usize,
    /// `"spectrum"` for class walks, `"dense"` for operator eigenvalues.
    pub reference: String,
    pub comparisons: usize,
    pub max_rel_error: f64,
    /// Whether `2·TV ≤ d₂` held at every time.
    pub tv_dominated: bool,
    pub pass: bool,
}

/// Class measure of a walk, when it has one.
pub fn class_measure_of(walk: &Walk, n: usize) -> Result<Option<ClassMeasure>> {
    Ok(match walk {
        Walk::RandomTransposition => Some(random_transposition_measure(n)?),
        Walk::Class(c) => Some(uniform_class_measure(c)?),
        Walk::Lazy(c, eps) => Some(lazy_class_measure(c, eps)?),
        Walk::TransposeTop | Walk::RandomInsertion => None,
    })
}

/// Compares `d₂` from exact convolution powers `0..=t_max` and from
/// continuous laws at `times` against the spectral formulas, within `tol`
/// relative error.
pub fn cross_check(walk: &Walk, n: usize, t_max: u64, times: &[f64], tol: f64, prec: usize) -> Result<OracleCheck> {
    let q = element_measure(walk, n)?;
    let spec = class_measure_of(walk, n)?.map(|m| spectrum(&m, Group::Symmetric)).transpose()?;
    let eigs = match spec {
        Some(_) => None,
        None => Some(operator_eigenvalues(&q)?),
    };
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
    let mut worst = 0.0f64;
    let mut tv_ok = true;
    let mut count = 0usize;
    let mut failure = None;
    for_each_power(&q, t_max, |t, law| {
        let measured = chi_square_on(law, Group::Symmetric, prec).and_then(|chi| Ok((chi, tv_on(law, Group::Symmetric, prec)?)));
        match measured {
            Ok((chi, tv)) => {
                let chi = chi.to_f64();
                let reference = match (&spec, &eigs) {
                    (Some(s), _) => l2_discrete(s, t, prec).to_f64(),
                    (None, Some(e)) => l2_from_eigenvalues(e, t),
                    (None, None) => unreachable!(),
                };
                worst = worst.max(rel(chi, reference));
                tv_ok &= 2.0 * tv.to_f64() <= chi + 1e-12;
                count += 1;
            }
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let reals: Vec<Real> = times.iter().map(|&t| Real::from_f64(t, prec)).collect();
    for ((law, _), (t, tr)) in continuous_laws(&q, &reals, 1e-15, prec)?.iter().zip(times.iter().zip(&reals)) {
        let chi = chi_square_on(law, Group::Symmetric, prec)?.to_f64();
        let tv = tv_on(law, Group::Symmetric, prec)?.to_f64();
        let reference = match (&spec, &eigs) {
            (Some(s), _) => l2_continuous(s, tr, prec).to_f64(),
            (None, Some(e)) => l2_continuous_from_eigenvalues(e, *t),
            (None, None) => unreachable!(),
        };
        worst = worst.max(rel(chi, reference));
        tv_ok &= 2.0 * tv <= chi + 1e-12;
        count += 1;
    }
    Ok(OracleCheck {
        walk: walk.name(),
        n,
        reference: if spec.is_some() { "spectrum" } else { "dense" }.to_string(),
        comparisons: count,
        max_rel_error: worst,
        tv_dominated: tv_ok,
        pass: worst <= tol && tv_ok,
    })
}

/// Counts of permutations by number of fixed points.
pub fn fixed_point_census(n: usize) -> Result<Vec<BigUint>> {
    let g = SymmetricGroup::new(n)?;
    let mut counts = vec![BigUint::zero(); n + 1];
    for p in g.elements() {
        counts[fixed_points(p)] += 1u32;
    }
    Ok(counts)
}

/// `n!` as a `u64` for oracle-sized degrees.
pub fn order_u64(n: usize) -> u64 {
    factorial(n).to_u64().unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lehmer_round_trip() {
        for n in 0..=6 {
            let order: usize = (1..=n).product();
            for r in 0..order {
                assert_eq!(lehmer_rank(&lehmer_unrank(n, r)), r);
            }
        }
        assert_eq!(lehmer_unrank(3, 0), vec![0, 1, 2]);
        assert_eq!(lehmer_unrank(3, 5), vec![2, 1, 0]);
    }

    #[test]
    fn composition_convention() {
        let s = vec![1u8, 2, 0];
        let t = vec![1u8, 0, 2];
        assert_eq!(compose(&s, &t), vec![2, 1, 0]);
        assert_eq!(compose(&s, &inverse(&s)), identity(3));
        assert_eq!(cycle_type_of(&s), CycleType::new(vec![3]).unwrap());
    }

    #[test]
    fn insertion_cycles() {
        // c_{1,3} in 1-based labels is the cycle (3,2,1): 3 → 2 → 1 → 3
        let c = insertion_cycle(4, 0, 2);
        assert_eq!(c, vec![2, 0, 1, 3]);
        assert_eq!(cycle_type_of(&c), CycleType::new(vec![3, 1]).unwrap());
        assert_eq!(insertion_cycle(4, 2, 0), inverse(&c));
        assert_eq!(insertion_cycle(4, 1, 1), identity(4));
    }

    #[test]
    fn measures_have_the_right_masses() {
        let ttr = element_measure(&Walk::TransposeTop, 4).unwrap();
        let quarter = BigRational::new(1.into(), 4.into());
        for p in [vec![0u8, 1, 2, 3], vec![1, 0, 2, 3], vec![2, 1, 0, 3], vec![3, 1, 2, 0]] {
            assert_eq!(ttr.exact(lehmer_rank(&p)).unwrap(), quarter);
        }
        let ri = element_measure(&Walk::RandomInsertion, 4).unwrap();
        assert_eq!(ri.exact(0).unwrap(), quarter);
        let adjacent = vec![1u8, 0, 2, 3];
        assert_eq!(ri.exact(lehmer_rank(&adjacent)).unwrap(), BigRational::new(2.into(), 16.into()));
        let rt = element_measure(&Walk::RandomTransposition, 5).unwrap();
        assert_eq!(rt.exact(0).unwrap(), BigRational::new(1.into(), 5.into()));
        assert!(SymmetricGroup::new(9).is_err());
    }

    #[test]
    fn point_mass_and_uniform_distances() {
        let e = GroupDistribution::point_mass(4).unwrap();
        assert!((chi_square_on(&e, Group::Symmetric, 128).unwrap().to_f64() - 23f64.sqrt()).abs() < 1e-14);
        assert!((tv_on(&e, Group::Symmetric, 128).unwrap().to_f64() - 23.0 / 24.0).abs() < 1e-15);
        let u = GroupDistribution::uniform(4).unwrap();
        assert!(chi_square_on(&u, Group::Symmetric, 128).unwrap().is_zero());
        assert!(tv_on(&u, Group::Symmetric, 128).unwrap().is_zero());
    }

    #[test]
    fn poisson_truncation() {
        let t = Real::from_f64(8.0, 128);
        let w = poisson_weights(&t, 1e-14, 128);
        let total = pairwise_sum(&w, 128).to_f64();
        assert!(total >= 1.0 - 1e-14);
        let shorter = pairwise_sum(&w[..w.len() - 1], 128).to_f64();
        assert!(shorter < 1.0 - 1e-14);
    }
}
