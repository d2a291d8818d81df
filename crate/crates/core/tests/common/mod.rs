//! Oracles shared by the integration tests. Nothing here calls the counting
//! or entropy code under test.
#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// Exact rational from a short decimal literal such as `"0.05"`.
pub fn dec(s: &str) -> BigRational {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let den = BigInt::from(10u32).pow(frac.len() as u32);
    let num: BigInt = format!("{int}{frac}").parse().unwrap();
    BigRational::new(num, den)
}

/// Number of `ψ: [m] → A` whose symbol frequencies are within TV `< eps` of
/// `target` (a law on single symbols), by walking every `ψ`.
///
/// The walk tallies frequency vectors once, then tests each vector exactly.
pub fn brute_force_single_site(m: usize, target: &[BigRational], eps: &BigRational) -> u64 {
    let k = target.len();
    let total = (k as u64).pow(m as u32);
    let mut tally: std::collections::HashMap<Vec<u32>, u64> = std::collections::HashMap::new();
    let mut psi = vec![0usize; m];
    for _ in 0..total {
        let mut freq = vec![0u32; k];
        for &a in &psi {
            freq[a] += 1;
        }
        *tally.entry(freq).or_insert(0) += 1;
        for x in psi.iter_mut() {
            *x += 1;
            if *x < k {
                break;
            }
            *x = 0;
        }
    }
    let mut good = 0;
    for (freq, n) in tally {
        let tv: BigRational = freq
            .iter()
            .zip(target)
            .map(|(&c, t)| (BigRational::new(BigInt::from(c), BigInt::from(m)) - t).abs())
            .fold(BigRational::zero(), |a, b| a + b)
            / BigRational::from_integer(BigInt::from(2));
        if &tv < eps {
            good += n;
        }
    }
    good
}

/// As above for the two-point window `{0, 1}` on the cycle `ℤ/m`: pattern at
/// `p` is `(ψ(p), ψ(p+1 mod m))`, compared with the law `target[a·k + b]`.
pub fn brute_force_pairs(m: usize, k: usize, target: &[BigRational], eps: &BigRational) -> u64 {
    let total = (k as u64).pow(m as u32);
    let mut psi = vec![0usize; m];
    let mut good = 0;
    for _ in 0..total {
        let mut freq = vec![0u32; k * k];
        for p in 0..m {
            freq[psi[p] * k + psi[(p + 1) % m]] += 1;
        }
        let tv: BigRational = freq
            .iter()
            .zip(target)
            .map(|(&c, t)| (BigRational::new(BigInt::from(c), BigInt::from(m)) - t).abs())
            .fold(BigRational::zero(), |a, b| a + b)
            / BigRational::from_integer(BigInt::from(2));
        if &tv < eps {
            good += 1;
        }
        for x in psi.iter_mut() {
            *x += 1;
            if *x < k {
                break;
            }
            *x = 0;
        }
    }
    good
}

/// Binary Shannon entropy in nats.
pub fn h2(p: f64) -> f64 {
    -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
}
