//! Simulation of shuffles and fixed-point statistics.
//!
//! Trajectory `i` draws from `ChaCha8` seeded with the run seed on stream
//! `i`, so any subset of trajectories can be replayed independently.

use std::sync::atomic::{AtomicU64, Ordering};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{DiscreteCDF, Poisson};

use crate::bounds::matching_tail;
use crate::characters::CycleType;
use crate::characters::ratio_to_f64;
use crate::error::{out_of_range, Error, Result};
use crate::oracle::Walk;

/// Fewest samples for which standard errors are reported.
pub const MIN_REPORTED_SAMPLES: u64 = 1000;

const CHUNK: u64 = 4096;
const PROGRESS_EVERY: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub walk: Walk,
    pub steps: u64,
    pub samples: u64,
    pub seed: u64,
    /// Fixed-point threshold.
    pub j: usize,
    /// Print a line to stderr every million trajectories.
    pub progress: bool,
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(out_of_range("simulate", "n must be positive"));
        }
        if self.samples == 0 {
            return Err(out_of_range("simulate", "need at least one sample"));
        }
        match &self.walk {
            Walk::Class(c) | Walk::Lazy(c, _) if c.degree() != self.n => {
                Err(Error::DegreeMismatch { expected: self.n, found: c.degree() })
            }
            Walk::Class(c) | Walk::Lazy(c, _) if c.is_identity() => {
                Err(out_of_range("simulate", "identity class is not a walk generator"))
            }
            Walk::Lazy(_, eps) if !(ratio_to_f64(eps) > 0.0 && ratio_to_f64(eps) < 1.0) => {
                Err(out_of_range("simulate", format!("eps must lie in (0,1), got {eps}")))
            }
            _ => Ok(()),
        }
    }
}

/// One step of a walk applied on the right: `X ← X ξ`.
struct Stepper {
    n: usize,
    kind: StepKind,
}

enum StepKind {
    Transposition,
    TransposeTop,
    Insertion,
    Class { cycles: Vec<usize>, hold: f64 },
}

impl Stepper {
    fn new(walk: &Walk, n: usize) -> Self {
        let kind = match walk {
            Walk::RandomTransposition => StepKind::Transposition,
            Walk::TransposeTop => StepKind::TransposeTop,
            Walk::RandomInsertion => StepKind::Insertion,
            Walk::Class(c) => StepKind::Class { cycles: c.nontrivial_cycles(), hold: 0.0 },
            Walk::Lazy(c, eps) => StepKind::Class { cycles: c.nontrivial_cycles(), hold: ratio_to_f64(eps) },
        };
        Stepper { n, kind }
    }

    fn step(&self, x: &mut [u32], scratch: &mut Vec<usize>, rng: &mut ChaCha8Rng) {
        let n = self.n;
        match &self.kind {
            StepKind::Transposition => {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                x.swap(a, b);
            }
            StepKind::TransposeTop => {
                let b = rng.gen_range(0..n);
                x.swap(0, b);
            }
            StepKind::Insertion => {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                if i < j {
                    x[i..=j].rotate_right(1);
                } else if j < i {
                    x[j..=i].rotate_left(1);
                }
            }
            StepKind::Class { cycles, hold } => {
                if *hold > 0.0 && rng.gen::<f64>() < *hold {
                    return;
                }
                // a uniform element of the class: cycles laid over a random
                // arrangement of the support points
                let support: usize = cycles.iter().sum();
                scratch.clear();
                scratch.extend(0..n);
                for k in 0..support {
                    let r = rng.gen_range(k..n);
                    scratch.swap(k, r);
                }
                let mut start = 0;
                for &len in cycles {
                    // (X ξ)(a_i) = X(a_{i+1}) for the cycle a_0 → a_1 → ... → a_0
                    let first = x[scratch[start]];
                    for k in start..start + len - 1 {
                        x[scratch[k]] = x[scratch[k + 1]];
                    }
                    x[scratch[start + len - 1]] = first;
                    start += len;
                }
            }
        }
    }
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Final state of trajectory `index` as an array of images.
pub fn trajectory(cfg: &SimConfig, index: u64) -> Result<Vec<u32>> {
    cfg.validate()?;
    let stepper = Stepper::new(&cfg.walk, cfg.n);
    let mut x: Vec<u32> = (0..cfg.n as u32).collect();
    let mut scratch = Vec::with_capacity(cfg.n);
    let mut rng = rng_for(cfg.seed, index);
    for _ in 0..cfg.steps {
        stepper.step(&mut x, &mut scratch, &mut rng);
    }
    Ok(x)
}

/// Empirical law of the number of fixed points after `steps` steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimStats {
    pub n: usize,
    pub steps: u64,
    pub samples: u64,
    /// `histogram[k]` trajectories ended with exactly `k` fixed points.
    pub histogram: Vec<u64>,
}

impl SimStats {
    /// Empirical probability of at least `j` fixed points.
    pub fn frequency_at_least(&self, j: usize) -> f64 {
        let hits: u64 = self.histogram.iter().skip(j).sum();
        hits as f64 / self.samples as f64
    }

    /// Normal-approximation standard error of [`Self::frequency_at_least`].
    pub fn std_error(&self, j: usize) -> f64 {
        let p = self.frequency_at_least(j);
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    pub fn mean_fixed_points(&self) -> f64 {
        let total: u64 = self.histogram.iter().enumerate().map(|(k, &c)| k as u64 * c).sum();
        total as f64 / self.samples as f64
    }
}

pub fn sample_walk(cfg: &SimConfig) -> Result<SimStats> {
    cfg.validate()?;
    let stepper = Stepper::new(&cfg.walk, cfg.n);
    let chunks = cfg.samples.div_ceil(CHUNK);
    let done = AtomicU64::new(0);
    let histogram = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(cfg.samples);
            let mut hist = vec![0u64; cfg.n + 1];
            let mut x: Vec<u32> = Vec::with_capacity(cfg.n);
            let mut scratch = Vec::with_capacity(cfg.n);
            for index in lo..hi {
                x.clear();
                x.extend(0..cfg.n as u32);
                let mut rng = rng_for(cfg.seed, index);
                for _ in 0..cfg.steps {
                    stepper.step(&mut x, &mut scratch, &mut rng);
                }
                let fixed = x.iter().enumerate().filter(|&(i, &v)| i as u32 == v).count();
                hist[fixed] += 1;
            }
            if cfg.progress {
                let before = done.fetch_add(hi - lo, Ordering::Relaxed);
                let after = before + (hi - lo);
                if after / PROGRESS_EVERY > before / PROGRESS_EVERY {
                    eprintln!("simulated {after}/{} trajectories", cfg.samples);
                }
            }
            hist
        })
        .reduce(
            || vec![0u64; cfg.n + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(SimStats { n: cfg.n, steps: cfg.steps, samples: cfg.samples, histogram })
}

/// Empirical `q^{(t)}(A_j) - u(A_j)` with `A_j` the permutations with at least `j` fixed points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvLowerEstimate {
    pub n: usize,
    pub steps: u64,
    pub j: usize,
    pub samples: u64,
    pub seed: u64,
    pub empirical: f64,
    pub uniform: f64,
    pub estimate: f64,
    pub std_error: f64,
}

pub fn fixed_point_tv_lower(cfg: &SimConfig) -> Result<TvLowerEstimate> {
    if cfg.j < 2 || cfg.j > cfg.n {
        return Err(out_of_range("fixed_point_tv_lower", format!("need 2 <= j <= n, got j={}, n={}", cfg.j, cfg.n)));
    }
    if cfg.samples < MIN_REPORTED_SAMPLES {
        return Err(out_of_range(
            "fixed_point_tv_lower",
            format!("need at least {MIN_REPORTED_SAMPLES} samples, got {}", cfg.samples),
        ));
    }
    let stats = sample_walk(cfg)?;
    let uniform = uniform_tail(cfg.n, cfg.j)?;
    let empirical = stats.frequency_at_least(cfg.j);
    Ok(TvLowerEstimate {
        n: cfg.n,
        steps: cfg.steps,
        j: cfg.j,
        samples: cfg.samples,
        seed: cfg.seed,
        empirical,
        uniform,
        estimate: empirical - uniform,
        std_error: stats.std_error(cfg.j),
    })
}

fn uniform_tail(n: usize, j: usize) -> Result<f64> {
    Ok(ratio_to_f64(&matching_tail(n, j, 64)?.value))
}

/// Moments of the number of draws until `n - j` of `n` boxes are filled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouponStats {
    pub n: usize,
    pub j: usize,
    /// `Σ_{i=1}^{n-j-1} n/(n-i)`.
    pub mean: f64,
    /// `n log(n/(j+1))`.
    pub mean_lower: f64,
    /// `Σ_{i=1}^{n-j-1} (n²/(n-i)² - n/(n-i))`.
    pub variance: f64,
    /// `n²/j`.
    pub variance_upper: f64,
    #[serde(skip)]
    pub exact_mean: BigRational,
    #[serde(skip)]
    pub exact_variance: BigRational,
}

pub fn coupon_stats(n: usize, j: usize) -> Result<CouponStats> {
    if j == 0 || j >= n {
        return Err(out_of_range("coupon_stats", format!("need 1 <= j < n, got j={j}, n={n}")));
    }
    let nb = BigRational::from_integer(n.into());
    let mut mean = BigRational::from_integer(0.into());
    let mut variance = BigRational::from_integer(0.into());
    for i in 1..n - j {
        let step = &nb / BigRational::from_integer((n - i).into());
        variance += &step * &step - &step;
        mean += step;
    }
    let nf = n as f64;
    Ok(CouponStats {
        n,
        j,
        mean: ratio_to_f64(&mean),
        mean_lower: nf * (nf / (j + 1) as f64).ln(),
        variance: ratio_to_f64(&variance),
        variance_upper: nf * nf / j as f64,
        exact_mean: mean,
        exact_variance: variance,
    })
}

/// Chebyshev bound `1 / (j (c - log(j+1))²)` on reaching `n - j` filled
/// boxes within `n log n - c n` draws; `None` unless `c > log(j+1)`.
pub fn chebyshev_tail(j: usize, c: f64) -> Option<f64> {
    let gap = c - ((j + 1) as f64).ln();
    (j > 0 && gap > 0.0).then(|| 1.0 / (j as f64 * gap * gap))
}

/// `P(X ≤ k + k^α)` for `X ~ Poisson(k)`.
pub fn poisson_window_mass(k: f64, alpha: f64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(out_of_range("poisson_window_mass", format!("k must be positive, got {k}")));
    }
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(out_of_range("poisson_window_mass", format!("alpha must lie in (1/2, 1), got {alpha}")));
    }
    let dist = Poisson::new(k).map_err(|e| out_of_range("poisson_window_mass", e.to_string()))?;
    let cut = (k + k.powf(alpha)).floor();
    Ok(dist.cdf(cut.to_u64().unwrap_or(u64::MAX)))
}

/// Uniform class walk on `S_n` for the given cycle lengths.
pub fn class_walk(cycles: Vec<usize>, n: usize) -> Result<Walk> {
    Ok(Walk::Class(CycleType::with_degree(cycles, n)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(walk: Walk, n: usize, steps: u64, samples: u64) -> SimConfig {
        SimConfig { n, walk, steps, samples, seed: 11, j: 2, progress: false }
    }

    #[test]
    fn time_zero_is_identity() {
        let s = sample_walk(&cfg(Walk::RandomTransposition, 30, 0, 500)).unwrap();
        assert_eq!(s.histogram[30], 500);
        for j in 0..=30 {
            assert_eq!(s.frequency_at_least(j), 1.0);
        }
    }

    #[test]
    fn replay_is_deterministic() {
        let c = cfg(Walk::RandomInsertion, 12, 40, 3000);
        assert_eq!(sample_walk(&c).unwrap(), sample_walk(&c).unwrap());
        assert_eq!(trajectory(&c, 17).unwrap(), trajectory(&c, 17).unwrap());
        assert_ne!(trajectory(&c, 17).unwrap(), trajectory(&c, 18).unwrap());
    }

    #[test]
    fn class_steps_have_the_right_cycle_type() {
        let c = cfg(class_walk(vec![4, 2, 2], 10).unwrap(), 10, 1, 1);
        for i in 0..50 {
            let x: Vec<u8> = trajectory(&c, i).unwrap().into_iter().map(|v| v as u8).collect();
            assert_eq!(crate::oracle::cycle_type_of(&x), CycleType::with_degree(vec![4, 2, 2], 10).unwrap());
        }
    }

    #[test]
    fn coupon_examples() {
        let s = coupon_stats(100, 3).unwrap();
        assert!(s.mean >= s.mean_lower);
        assert!(s.variance <= s.variance_upper);
        let empty = coupon_stats(10, 9).unwrap();
        assert_eq!(empty.mean, 0.0);
        assert!(coupon_stats(10, 10).is_err());
        assert!(chebyshev_tail(3, 1.0).is_none());
        assert!(chebyshev_tail(3, 4.0).unwrap() < 1.0);
    }

    #[test]
    fn poisson_examples() {
        assert!(poisson_window_mass(100.0, 0.75).unwrap() >= 0.99);
        let small = poisson_window_mass(100.0, 0.6).unwrap();
        let large = poisson_window_mass(1e4, 0.6).unwrap();
        assert!(large > small);
        assert!(poisson_window_mass(100.0, 0.5).is_err());
    }

    #[test]
    fn guards() {
        let mut c = cfg(Walk::TransposeTop, 10, 5, 999);
        c.j = 3;
        assert!(fixed_point_tv_lower(&c).is_err());
        c.samples = 1000;
        c.j = 1;
        assert!(fixed_point_tv_lower(&c).is_err());
        let bad = cfg(class_walk(vec![3], 5).unwrap(), 6, 1, 10);
        assert!(sample_walk(&bad).is_err());
    }
}
