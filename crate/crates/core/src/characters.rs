//! Irreducible characters of the symmetric group.

use std::collections::HashMap;
use std::fmt;
use std::num::NonZeroUsize;
use std::sync::{Mutex, OnceLock, RwLock};

use lru::LruCache;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::combinat::factorial;
use crate::error::{out_of_range, Error, Result};
use crate::partitions::Partition;

/// Conjugacy class label: cycle lengths in non-increasing order, fixed points included.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CycleType {
    cycles: Vec<usize>,
}

impl CycleType {
    /// Sorts `cycles` into non-increasing order. Zero lengths are rejected.
    pub fn new(mut cycles: Vec<usize>) -> Result<Self> {
        if cycles.contains(&0) {
            return Err(Error::InvalidCycleType { cycles, reason: "cycle lengths must be positive" });
        }
        cycles.sort_unstable_by(|a, b| b.cmp(a));
        Ok(CycleType { cycles })
    }

    /// Pads `cycles` with fixed points up to degree `n`.
    pub fn with_degree(mut cycles: Vec<usize>, n: usize) -> Result<Self> {
        cycles.retain(|&c| c != 1);
        let moved: usize = cycles.iter().sum();
        if moved > n {
            return Err(Error::InvalidCycleType { cycles, reason: "cycles exceed the degree" });
        }
        cycles.extend(std::iter::repeat(1).take(n - moved));
        Self::new(cycles)
    }

    pub fn identity(n: usize) -> Self {
        CycleType { cycles: vec![1; n] }
    }

    pub fn transposition(n: usize) -> Result<Self> {
        Self::cycle(2, n)
    }

    /// Class of a single `k`-cycle in degree `n`.
    pub fn cycle(k: usize, n: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(out_of_range("cycle", format!("need 1 <= k <= n, got k={k}, n={n}")));
        }
        Self::with_degree(vec![k], n)
    }

    pub fn cycles(&self) -> &[usize] {
        &self.cycles
    }

    pub fn degree(&self) -> usize {
        self.cycles.iter().sum()
    }

    /// Number of points that are not fixed.
    pub fn support(&self) -> usize {
        self.degree() - self.fixed_points()
    }

    pub fn fixed_points(&self) -> usize {
        self.cycles.iter().filter(|&&c| c == 1).count()
    }

    pub fn is_identity(&self) -> bool {
        self.cycles.iter().all(|&c| c == 1)
    }

    pub fn is_even(&self) -> bool {
        self.cycles.iter().map(|c| c - 1).sum::<usize>() % 2 == 0
    }

    /// `+1` for even classes, `-1` for odd ones.
    pub fn sign(&self) -> i32 {
        if self.is_even() {
            1
        } else {
            -1
        }
    }

    /// Number of permutations in the class.
    pub fn class_size(&self) -> BigUint {
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for &c in &self.cycles {
            *counts.entry(c).or_default() += 1;
        }
        let centralizer = counts.iter().fold(BigUint::one(), |acc, (&k, &m)| {
            acc * BigUint::from(k).pow(m as u32) * factorial(m)
        });
        factorial(self.degree()) / centralizer
    }

    /// Non-trivial cycles only, e.g. `[4]` for `(4,1,1,1)`.
    pub fn nontrivial_cycles(&self) -> Vec<usize> {
        self.cycles.iter().copied().filter(|&c| c > 1).collect()
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Partition::new(self.cycles.clone()).map_err(|_| fmt::Error)?.fmt(f)
    }
}

/// Result of removing one rim hook from a diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewHookRemoval {
    pub remainder: Partition,
    pub leg_length: usize,
}

/// All rim hooks with `k` cells, one per cell of hook length `k`.
pub fn remove_skew_hooks(lambda: &Partition, k: usize) -> Vec<SkewHookRemoval> {
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    let parts = lambda.parts();
    let conj = lambda.conjugate();
    for (r, &len) in parts.iter().enumerate() {
        for c in 0..len {
            let bottom = conj.parts()[c];
            if (len - c - 1) + (bottom - r - 1) + 1 != k {
                continue;
            }
            // rows r..bottom shift up by one and lose a box; the bottom row ends at column c
            let mut rest = parts.to_vec();
            for row in r..bottom - 1 {
                rest[row] = parts[row + 1] - 1;
            }
            rest[bottom - 1] = c;
            while rest.last() == Some(&0) {
                rest.pop();
            }
            out.push(SkewHookRemoval {
                remainder: Partition::new(rest).expect("rim hook removal leaves a partition"),
                leg_length: bottom - 1 - r,
            });
        }
    }
    out
}

type Key = (Vec<usize>, Vec<usize>);

enum Store {
    Unbounded(RwLock<HashMap<Key, BigInt>>),
    Bounded(Mutex<LruCache<Key, BigInt>>),
}

/// Memo table for Murnaghan–Nakayama evaluations, safe to share across threads.
pub struct CharacterCache {
    store: Store,
}

impl Default for CharacterCache {
    fn default() -> Self {
        Self::new()
    }
}

impl CharacterCache {
    pub fn new() -> Self {
        CharacterCache { store: Store::Unbounded(RwLock::new(HashMap::new())) }
    }

    /// Keeps at most `cap` entries, evicting the least recently used.
    pub fn with_entry_cap(cap: usize) -> Self {
        let cap = NonZeroUsize::new(cap.max(1)).expect("nonzero");
        CharacterCache { store: Store::Bounded(Mutex::new(LruCache::new(cap))) }
    }

    pub fn len(&self) -> usize {
        match &self.store {
            Store::Unbounded(m) => m.read().expect("cache lock").len(),
            Store::Bounded(m) => m.lock().expect("cache lock").len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        match &self.store {
            Store::Unbounded(m) => m.write().expect("cache lock").clear(),
            Store::Bounded(m) => m.lock().expect("cache lock").clear(),
        }
    }

    fn get(&self, key: &Key) -> Option<BigInt> {
        match &self.store {
            Store::Unbounded(m) => m.read().expect("cache lock").get(key).cloned(),
            Store::Bounded(m) => m.lock().expect("cache lock").get(key).cloned(),
        }
    }

    fn put(&self, key: Key, value: BigInt) {
        match &self.store {
            Store::Unbounded(m) => {
                m.write().expect("cache lock").entry(key).or_insert(value);
            }
            Store::Bounded(m) => {
                m.lock().expect("cache lock").put(key, value);
            }
        }
    }

    /// `χ_λ(α)` by the Murnaghan–Nakayama rule, largest cycle first.
    pub fn character(&self, lambda: &Partition, alpha: &CycleType) -> Result<BigInt> {
        if lambda.size() != alpha.degree() {
            return Err(Error::DegreeMismatch { expected: lambda.size(), found: alpha.degree() });
        }
        self.mn(lambda, alpha.cycles())
    }

    fn mn(&self, lambda: &Partition, cycles: &[usize]) -> Result<BigInt> {
        match cycles.first() {
            None => return Ok(BigInt::one()),
            Some(1) => return Ok(BigInt::from(lambda.dimension()?)),
            Some(_) => {}
        }
        let key = (lambda.parts().to_vec(), cycles.to_vec());
        if let Some(v) = self.get(&key) {
            return Ok(v);
        }
        let mut total = BigInt::zero();
        for removal in remove_skew_hooks(lambda, cycles[0]) {
            let sub = self.mn(&removal.remainder, &cycles[1..])?;
            if removal.leg_length % 2 == 0 {
                total += sub;
            } else {
                total -= sub;
            }
        }
        self.put(key, total.clone());
        Ok(total)
    }

    pub fn char_ratio(&self, lambda: &Partition, alpha: &CycleType) -> Result<BigRational> {
        let chi = self.character(lambda, alpha)?;
        let d = BigInt::from(lambda.dimension()?);
        Ok(BigRational::new(chi, d))
    }
}

/// Process-wide cache used by the free functions.
pub fn global_cache() -> &'static CharacterCache {
    static CACHE: OnceLock<CharacterCache> = OnceLock::new();
    CACHE.get_or_init(CharacterCache::new)
}

pub fn character(lambda: &Partition, alpha: &CycleType) -> Result<BigInt> {
    global_cache().character(lambda, alpha)
}

/// `χ_λ(α) / d_λ` as a reduced fraction.
pub fn char_ratio(lambda: &Partition, alpha: &CycleType) -> Result<BigRational> {
    global_cache().char_ratio(lambda, alpha)
}

/// `M_{λ,2l} = Σ_j (λ_j - j)^l (λ_j - j + 1)^l - j^l (j - 1)^l`.
pub fn m_moment(lambda: &Partition, l: u32) -> BigInt {
    lambda
        .parts()
        .iter()
        .enumerate()
        .map(|(r, &p)| {
            let j = BigInt::from(r + 1);
            let s = BigInt::from(p) - &j;
            let up: BigInt = &s * (&s + 1);
            let down: BigInt = &j * (&j - 1);
            up.pow(l) - down.pow(l)
        })
        .sum()
}

/// Normalized four-cycle character from the first two M-moments.
pub fn r4_exact(lambda: &Partition) -> Result<BigRational> {
    let n = lambda.size();
    if n < 4 {
        return Err(out_of_range("r4_exact", format!("need n >= 4, got {n}")));
    }
    let numer = m_moment(lambda, 2) - BigInt::from(2 * (2 * n - 3)) * m_moment(lambda, 1);
    let falling = BigInt::from(n * (n - 1) * (n - 2) * (n - 3));
    Ok(BigRational::new(numer, falling))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Transposition,
    FourCycle,
}

/// Upper bound on the normalized character of a transposition or four-cycle,
/// depending only on `n` and `λ_1`.
pub fn char_ratio_bound(lambda: &Partition, kind: ClassKind) -> Result<BigRational> {
    let n = lambda.size();
    let l1 = lambda.first_row();
    let frac = |a: i64, b: i64| BigRational::new(a.into(), b.into());
    let (n_i, l_i) = (n as i64, l1 as i64);
    match kind {
        ClassKind::Transposition => {
            if n < 2 {
                return Err(out_of_range("char_ratio_bound", "transposition needs n >= 2"));
            }
            if 2 * l1 >= n {
                Ok(BigRational::one() - frac(2 * (n_i - l_i) * (l_i + 1), n_i * (n_i - 1)))
            } else {
                Ok(frac(l_i - 1, n_i - 1))
            }
        }
        ClassKind::FourCycle => {
            if n < 11 {
                return Err(out_of_range("char_ratio_bound", format!("four-cycle bound needs n >= 11, got {n}")));
            }
            if 2 * l1 >= n {
                Ok(BigRational::one() - frac(2 * l_i * (n_i - l_i), n_i * (n_i - 1)))
            } else {
                Ok(frac(l_i - 1, n_i - 1))
            }
        }
    }
}

/// Smallest `C` with `|r| <= C / sqrt(n)` scaled by `max(1, m^2 / n)`, where `m`
/// is the support of the class. Used for shape checks only.
pub fn rs_shape_constant(ratio: &BigRational, support: usize, n: usize) -> f64 {
    let r = ratio_to_f64(&ratio.abs());
    let m = support.max(1) as f64;
    let scale = (m * m / n as f64).max(1.0);
    r.powf(1.0 / m) * (n as f64).sqrt() / scale
}

/// Smallest `q` with `|r| <= q^{support}`. Used for shape checks only.
pub fn roichman_shape_constant(ratio: &BigRational, support: usize) -> f64 {
    ratio_to_f64(&ratio.abs()).powf(1.0 / support.max(1) as f64)
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}
