//! Small exact integer helpers.

use num_bigint::BigUint;
use num_traits::One;

pub fn factorial(n: usize) -> BigUint {
    (2..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// `n (n-1) ... (n-j+1)`; zero when `j > n`.
pub fn falling_factorial(n: usize, j: usize) -> BigUint {
    if j > n {
        return BigUint::default();
    }
    ((n - j + 1) as u64..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    falling_factorial(n, k) / factorial(k)
}

/// `ln k!` for `k = 0..=n` in double precision.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}
