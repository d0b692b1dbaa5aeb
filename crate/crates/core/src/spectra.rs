//! Walk measures and the eigenvalues of their convolution operators.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characters::{global_cache, CycleType};
use crate::combinat::factorial;
use crate::error::{out_of_range, Error, Result};
use crate::partitions::{enumerate_partitions, Partition};

/// A probability measure on `S_n` that is constant on conjugacy classes.
///
/// Each atom carries the total mass of its class.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassMeasure {
    n: usize,
    atoms: Vec<(CycleType, BigRational)>,
    name: String,
}

impl ClassMeasure {
    /// Merges repeated classes and drops zero weights.
    pub fn new(name: impl Into<String>, n: usize, atoms: Vec<(CycleType, BigRational)>) -> Result<Self> {
        let mut merged: Vec<(CycleType, BigRational)> = Vec::new();
        for (class, w) in atoms {
            if class.degree() != n {
                return Err(Error::DegreeMismatch { expected: n, found: class.degree() });
            }
            if w.is_negative() {
                return Err(out_of_range("class measure", format!("negative weight {w} on {class}")));
            }
            match merged.iter_mut().find(|(c, _)| *c == class) {
                Some((_, acc)) => *acc += w,
                None => merged.push((class, w)),
            }
        }
        merged.retain(|(_, w)| !w.is_zero());
        let total: BigRational = merged.iter().map(|(_, w)| w.clone()).sum();
        if !total.is_one() {
            return Err(Error::Unnormalized { total: crate::characters::ratio_to_f64(&total) });
        }
        merged.sort_by(|a, b| b.0.cmp(&a.0));
        Ok(ClassMeasure { n, atoms: merged, name: name.into() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> &[(CycleType, BigRational)] {
        &self.atoms
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// True when every charged class is even, so the walk stays in `A_n`.
    pub fn is_even(&self) -> bool {
        self.atoms.iter().all(|(c, _)| c.is_even())
    }

    /// Probability of one particular permutation of the given class.
    pub fn element_probability(&self, class: &CycleType) -> BigRational {
        self.atoms
            .iter()
            .find(|(c, _)| c == class)
            .map(|(c, w)| w / BigRational::from_integer(BigInt::from(c.class_size())))
            .unwrap_or_else(BigRational::zero)
    }
}

impl fmt::Display for ClassMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on S_{}", self.name, self.n)
    }
}

fn ratio(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

/// Identity with mass `1/n`, each transposition with mass `2/n^2`.
pub fn random_transposition_measure(n: usize) -> Result<ClassMeasure> {
    if n < 2 {
        return Err(out_of_range("random_transposition_measure", format!("need n >= 2, got {n}")));
    }
    let ni = n as i64;
    ClassMeasure::new(
        "rt",
        n,
        vec![(CycleType::identity(n), ratio(1, ni)), (CycleType::transposition(n)?, ratio(ni - 1, ni))],
    )
}

/// Uniform measure on one non-identity conjugacy class.
pub fn uniform_class_measure(class: &CycleType) -> Result<ClassMeasure> {
    if class.is_identity() {
        return Err(out_of_range("uniform_class_measure", "identity class is not a walk generator"));
    }
    ClassMeasure::new(format!("class{class}"), class.degree(), vec![(class.clone(), BigRational::one())])
}

/// Holds with probability `eps`, otherwise steps uniformly in `class`.
pub fn lazy_class_measure(class: &CycleType, eps: &BigRational) -> Result<ClassMeasure> {
    if class.is_identity() {
        return Err(out_of_range("lazy_class_measure", "identity class is not a walk generator"));
    }
    if !eps.is_positive() || *eps >= BigRational::one() {
        return Err(out_of_range("lazy_class_measure", format!("eps must lie in (0,1), got {eps}")));
    }
    let n = class.degree();
    ClassMeasure::new(
        format!("lazy{class}:{eps}"),
        n,
        vec![(CycleType::identity(n), eps.clone()), (class.clone(), BigRational::one() - eps)],
    )
}

/// Eigenvalue of convolution by `q` on the isotypic block of `λ`.
pub fn walk_eigenvalue(q: &ClassMeasure, lambda: &Partition) -> Result<BigRational> {
    if lambda.size() != q.n {
        return Err(Error::DegreeMismatch { expected: q.n, found: lambda.size() });
    }
    let cache = global_cache();
    let mut beta = BigRational::zero();
    for (class, w) in &q.atoms {
        if class.is_identity() {
            beta += w;
        } else {
            beta += w * cache.char_ratio(lambda, class)?;
        }
    }
    Ok(beta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "Sn")]
    Symmetric,
    #[serde(rename = "An")]
    Alternating,
}

impl Group {
    pub fn order(&self, n: usize) -> BigUint {
        match self {
            Group::Symmetric => factorial(n),
            Group::Alternating => factorial(n) / 2u32,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::Symmetric => "Sn",
            Group::Alternating => "An",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEntry {
    pub eigenvalue: BigRational,
    pub multiplicity: BigUint,
    pub partition: Partition,
}

/// Eigenvalues with multiplicities of a class-function walk.
///
/// On `A_n` the blocks of `λ` and its conjugate restrict to the same
/// eigenspace, so each conjugate pair is reported once with multiplicity
/// `d_λ^2`; a self-conjugate `λ` gets `d_λ^2 / 2`. The trivial entry is the
/// merged pair `(n), (1^n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    n: usize,
    group: Group,
    entries: Vec<SpectrumEntry>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    /// Everything except the trivial representation.
    pub fn nontrivial(&self) -> impl Iterator<Item = &SpectrumEntry> {
        self.entries.iter().filter(|e| e.partition.len() != 1)
    }

    pub fn multiplicity_sum(&self) -> BigUint {
        self.entries.iter().map(|e| &e.multiplicity).sum()
    }

    /// Largest `|β|` over non-trivial entries.
    pub fn second_largest_modulus(&self) -> BigRational {
        self.nontrivial().map(|e| e.eigenvalue.abs()).max().unwrap_or_else(BigRational::zero)
    }

    pub fn entry(&self, lambda: &Partition) -> Option<&SpectrumEntry> {
        self.entries
            .iter()
            .find(|e| e.partition == *lambda || (self.group == Group::Alternating && e.partition == lambda.conjugate()))
    }

    /// Replaces every eigenvalue by its square.
    pub fn squared(&self) -> Spectrum {
        let entries = self
            .entries
            .iter()
            .map(|e| SpectrumEntry {
                eigenvalue: &e.eigenvalue * &e.eigenvalue,
                multiplicity: e.multiplicity.clone(),
                partition: e.partition.clone(),
            })
            .collect();
        Spectrum { n: self.n, group: self.group, entries }
    }
}

fn per_partition(q: &ClassMeasure, f: impl Fn(&BigRational) -> BigRational + Sync) -> Result<Vec<SpectrumEntry>> {
    let lams = enumerate_partitions(q.n);
    lams.into_par_iter()
        .map(|lam| {
            let beta = walk_eigenvalue(q, &lam)?;
            let d = lam.dimension()?;
            Ok(SpectrumEntry { eigenvalue: f(&beta), multiplicity: &d * &d, partition: lam })
        })
        .collect()
}

fn merge_conjugates(entries: Vec<SpectrumEntry>) -> Vec<SpectrumEntry> {
    entries
        .into_iter()
        .filter_map(|e| {
            let conj = e.partition.conjugate();
            match e.partition.cmp(&conj) {
                std::cmp::Ordering::Less => None,
                std::cmp::Ordering::Equal => Some(SpectrumEntry { multiplicity: e.multiplicity / 2u32, ..e }),
                std::cmp::Ordering::Greater => Some(e),
            }
        })
        .collect()
}

/// Largest degree for which a full spectrum is enumerated (`p(50) = 204226` blocks).
pub const MAX_SPECTRUM_N: usize = 50;

fn check_size(n: usize) -> Result<()> {
    if n > MAX_SPECTRUM_N {
        return Err(Error::ResourceGuard { what: "spectrum", n, limit: MAX_SPECTRUM_N });
    }
    Ok(())
}

/// Spectrum of convolution by `q` on `S_n`, or on `A_n` for an even measure.
pub fn spectrum(q: &ClassMeasure, group: Group) -> Result<Spectrum> {
    check_size(q.n)?;
    match group {
        Group::Symmetric => Ok(Spectrum { n: q.n, group, entries: per_partition(q, |b| b.clone())? }),
        Group::Alternating => {
            if !q.is_even() {
                return Err(Error::OddMeasureOnAlternating(q.name.clone()));
            }
            if q.n < 2 {
                return Err(out_of_range("spectrum", "alternating group needs n >= 2"));
            }
            let entries = per_partition(q, |b| b.clone())?;
            Ok(Spectrum { n: q.n, group, entries: merge_conjugates(entries) })
        }
    }
}

/// Spectrum of `q * q` restricted to `A_n`. Works for odd measures, whose
/// square is supported on even permutations.
pub fn spectrum_of_square(q: &ClassMeasure) -> Result<Spectrum> {
    check_size(q.n)?;
    if q.n < 2 {
        return Err(out_of_range("spectrum_of_square", "alternating group needs n >= 2"));
    }
    let entries = per_partition(q, |b| b * b)?;
    Ok(Spectrum { n: q.n, group: Group::Alternating, entries: merge_conjugates(entries) })
}

/// Eigenvalue data of the transpose-top walk on the block of `λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransposeTopSigma {
    /// `λ_i - i` for each row `i`.
    pub sigma: Vec<i64>,
    /// `(σ_i + 1) / n`.
    pub alpha: Vec<BigRational>,
    /// `λ_1 / n`.
    pub alpha1: BigRational,
}

pub fn transpose_top_sigma(lambda: &Partition) -> TransposeTopSigma {
    let n = lambda.size().max(1) as i64;
    let sigma: Vec<i64> = lambda.parts().iter().enumerate().map(|(i, &p)| p as i64 - (i as i64 + 1)).collect();
    let alpha = sigma.iter().map(|&s| ratio(s + 1, n)).collect();
    TransposeTopSigma { sigma, alpha, alpha1: ratio(lambda.first_row() as i64, n) }
}
