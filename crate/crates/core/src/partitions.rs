//! Integer partitions as Young diagrams.
//!
//! Rows and columns are 1-based in every public accessor that takes a cell.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinat::{binomial, factorial};
use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    parts: Vec<usize>,
}

/// A cell of a diagram together with its hook length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HookCell {
    pub row: usize,
    pub col: usize,
    pub hook_length: usize,
}

impl Partition {
    /// Validates `parts`. Trailing zeros are dropped.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.contains(&0) {
            return Err(Error::InvalidPartition { parts, reason: "zero part before a positive part" });
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition { parts, reason: "parts must be non-increasing" });
        }
        Ok(Partition { parts })
    }

    pub fn empty() -> Self {
        Partition::default()
    }

    /// The one-row partition `(n)`.
    pub fn row(n: usize) -> Self {
        if n == 0 {
            Self::empty()
        } else {
            Partition { parts: vec![n] }
        }
    }

    /// The one-column partition `(1, ..., 1)`.
    pub fn column(n: usize) -> Self {
        Partition { parts: vec![1; n] }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Length of the first row, zero for the empty partition.
    pub fn first_row(&self) -> usize {
        self.parts.first().copied().unwrap_or(0)
    }

    /// `λ_i` with 1-based `i`; zero past the last row.
    pub fn part(&self, i: usize) -> usize {
        if i == 0 {
            return 0;
        }
        self.parts.get(i - 1).copied().unwrap_or(0)
    }

    pub fn conjugate(&self) -> Partition {
        let cols = self.first_row();
        let mut out = Vec::with_capacity(cols);
        for j in 1..=cols {
            out.push(self.parts.iter().take_while(|&&p| p >= j).count());
        }
        Partition { parts: out }
    }

    pub fn is_self_conjugate(&self) -> bool {
        self.conjugate() == *self
    }

    /// Hook length at the 1-based cell `(i, j)`, `None` outside the diagram.
    pub fn hook_length(&self, i: usize, j: usize) -> Option<usize> {
        if i == 0 || j == 0 || j > self.part(i) {
            return None;
        }
        let leg = self.parts.iter().skip(i).take_while(|&&p| p >= j).count();
        Some(self.part(i) - j + leg + 1)
    }

    /// All cells with their hook lengths, row by row.
    pub fn hooks(&self) -> Vec<HookCell> {
        let conj = self.conjugate();
        let mut out = Vec::with_capacity(self.size());
        for (r, &len) in self.parts.iter().enumerate() {
            for c in 0..len {
                out.push(HookCell {
                    row: r + 1,
                    col: c + 1,
                    hook_length: (len - c - 1) + (conj.parts[c] - r - 1) + 1,
                });
            }
        }
        out
    }

    /// Dimension of the irreducible representation via the hook formula.
    pub fn dimension(&self) -> Result<BigUint> {
        let n = self.size();
        let product = self
            .hooks()
            .iter()
            .fold(BigUint::one(), |acc, h| acc * h.hook_length as u64);
        let (q, r) = factorial(n).div_rem(&product);
        if !r.is_zero() {
            return Err(Error::HookDivision { n, parts: self.parts.clone() });
        }
        Ok(q)
    }

    /// Sum of the contents `j - i` over all cells.
    pub fn content_sum(&self) -> i64 {
        self.parts
            .iter()
            .enumerate()
            .map(|(r, &len)| {
                let len = len as i64;
                let r = r as i64;
                len * (len - 1) / 2 - r * len
            })
            .sum()
    }

    /// Dominance order on partitions of the same size.
    pub fn dominates(&self, other: &Partition) -> Result<bool> {
        if self.size() != other.size() {
            return Err(Error::DegreeMismatch { expected: self.size(), found: other.size() });
        }
        let rows = self.len().max(other.len());
        let (mut a, mut b) = (0usize, 0usize);
        for i in 1..=rows {
            a += self.part(i);
            b += other.part(i);
            if a < b {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True if the diagram fits in `rows` rows of at most `cols` boxes.
    pub fn fits_in_box(&self, rows: usize, cols: usize) -> bool {
        self.len() <= rows && self.first_row() <= cols
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("()");
        }
        f.write_str("(")?;
        for (k, p) in self.parts.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;
    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Partition::new(parts)
    }
}

/// Iterator over the partitions of `n` in reverse-lexicographic order.
#[derive(Clone, Debug)]
pub struct Partitions {
    next: Option<Vec<usize>>,
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        let current = self.next.take()?;
        // rightmost part greater than one gets decremented; the tail is refilled greedily
        if let Some(k) = current.iter().rposition(|&p| p > 1) {
            let mut succ = current[..k].to_vec();
            let m = current[k] - 1;
            let mut rest = current[k..].iter().sum::<usize>();
            while rest > 0 {
                let take = rest.min(m);
                succ.push(take);
                rest -= take;
            }
            self.next = Some(succ);
        }
        Some(Partition { parts: current })
    }
}

pub fn partitions(n: usize) -> Partitions {
    Partitions { next: Some(if n == 0 { Vec::new() } else { vec![n] }) }
}

pub fn enumerate_partitions(n: usize) -> Vec<Partition> {
    partitions(n).collect()
}

/// `C(n,l)^2 (n-l)!`, an upper bound on the sum of `d_λ^2` over `λ ⊢ n` with `λ_1 = l`.
pub fn dim_square_sum_bound(n: usize, l: usize) -> Result<BigUint> {
    if l == 0 || l > n {
        return Err(crate::error::out_of_range("dim_square_sum_bound", format!("need 1 <= l <= n, got n={n}, l={l}")));
    }
    let c = binomial(n, l);
    Ok(&c * &c * factorial(n - l))
}

/// Exact `Σ d_λ^2` over `λ ⊢ n` with first row `l`.
pub fn dim_square_sum_exact(n: usize, l: usize) -> Result<BigUint> {
    if l == 0 || l > n {
        return Err(crate::error::out_of_range("dim_square_sum_exact", format!("need 1 <= l <= n, got n={n}, l={l}")));
    }
    let mut total = BigUint::zero();
    // first row fixed at l; the rest is a partition of n-l with parts <= l
    for rest in partitions(n - l).filter(|p| p.first_row() <= l) {
        let mut parts = vec![l];
        parts.extend_from_slice(rest.parts());
        let d = Partition { parts }.dimension()?;
        total += &d * &d;
    }
    Ok(total)
}

/// `(n / (e (s + t - 1)))^n`, a lower bound on `d_λ` for `λ` inside an `s × t` box.
pub fn box_dim_lower_bound(lambda: &Partition, s: usize, t: usize, prec: usize) -> Result<Real> {
    if !lambda.fits_in_box(s, t) {
        return Err(Error::DoesNotFit { parts: lambda.parts.clone(), rows: s, cols: t });
    }
    let n = lambda.size();
    if n == 0 {
        return Ok(Real::one(prec));
    }
    let nn = Real::from_u64(n as u64, prec);
    let side = Real::from_u64((s + t - 1) as u64, prec);
    let log = &nn * &(nn.ln() - Real::one(prec) - side.ln());
    Ok(log.exp())
}

/// `⌊n/k⌋` rows of length `k = ⌈√n⌉` followed by a row of `n mod k`.
pub fn near_square_partition(n: usize) -> Result<Partition> {
    if n == 0 {
        return Err(crate::error::out_of_range("near_square_partition", "n must be positive"));
    }
    let k = ceil_sqrt(n);
    let mut parts = vec![k; n / k];
    if n % k != 0 {
        parts.push(n % k);
    }
    Ok(Partition { parts })
}

pub(crate) fn ceil_sqrt(n: usize) -> usize {
    let mut k = (n as f64).sqrt() as usize;
    while k * k < n {
        k += 1;
    }
    while k > 0 && (k - 1) * (k - 1) >= n {
        k -= 1;
    }
    k
}

/// `(m, m-1, ..., 1)`.
pub fn staircase_partition(m: usize) -> Result<Partition> {
    if m == 0 {
        return Err(crate::error::out_of_range("staircase_partition", "m must be positive"));
    }
    Ok(Partition { parts: (1..=m).rev().collect() })
}
