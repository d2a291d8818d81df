use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::table::{big_as_string, finite_or_null};
use crate::error::{Error, Result};
use crate::group::Window;
use crate::par::{chunk_seed, map_chunks};
use crate::process::{encode, Process};
use crate::rational::{ln_biguint, multinomial};
use crate::sofic::SoficMap;
use crate::stats::{Microstate, PatternReader, TvThreshold};

/// Largest `|A|^m` walked by plain enumeration.
pub const ENUMERATION_GUARD: f64 = 67_108_864.0; // 2^26
/// Largest number of frequency vectors visited by the `|W| = 1` count.
pub const COMPOSITION_GUARD: f64 = 1e7;
/// Largest live state set in the cyclic transfer count.
pub const TRANSFER_GUARD: usize = 1_000_000;
/// Largest total number of state expansions in one cyclic transfer count.
pub const TRANSFER_WORK_GUARD: u64 = 5_000_000;
/// Largest `|A|^m` for which good microstates are listed one by one.
pub const LISTING_GUARD: f64 = 4_194_304.0; // 2^22

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    /// Pick the cheapest applicable exact method.
    Auto,
    /// `|W| = 1`: sum multinomials over good frequency vectors.
    Frequency,
    /// σ a single cyclic block over ℤ: transfer over positions.
    CyclicTransfer,
    /// Walk all of `A^[m]`.
    Enumeration,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountMode {
    Exact {
        method: CountMethod,
    },
    MonteCarlo {
        samples: u64,
        hits: u64,
        /// 99% Wilson interval for the good fraction.
        ci_low: f64,
        ci_high: f64,
        /// No hits: `log_rate` is the upper end of the interval.
        upper_bound_only: bool,
    },
}

/// Size of `Map(d, ε, σ)` for one `(σ, W, ε)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MicrostateCount {
    pub sigma: String,
    pub m: usize,
    pub window: String,
    pub eps: f64,
    #[serde(serialize_with = "big_as_string")]
    pub count: BigUint,
    #[serde(serialize_with = "big_as_string")]
    pub total: BigUint,
    /// `(1/m) ln count`; `-∞` (null in JSON) when nothing is good.
    #[serde(serialize_with = "finite_or_null")]
    pub log_rate: f64,
    pub mode: CountMode,
}

impl MicrostateCount {
    pub fn mode_label(&self) -> &'static str {
        match &self.mode {
            CountMode::Exact { method } => match method {
                CountMethod::Auto => "exact",
                CountMethod::Frequency => "exact:frequency",
                CountMethod::CyclicTransfer => "exact:cyclic_transfer",
                CountMethod::Enumeration => "exact:enumeration",
            },
            CountMode::MonteCarlo { upper_bound_only: true, .. } => "mc:upper_bound",
            CountMode::MonteCarlo { .. } => "mc",
        }
    }

    /// The Monte Carlo interval mapped onto the `log_rate` scale.
    pub fn log_rate_interval(&self) -> Option<(f64, f64)> {
        match &self.mode {
            CountMode::MonteCarlo { ci_low, ci_high, .. } => {
                let base = (self.m as f64) * self.alphabet_log();
                let m = self.m as f64;
                Some(((base + ci_low.ln()) / m, (base + ci_high.ln()) / m))
            }
            CountMode::Exact { .. } => None,
        }
    }

    fn alphabet_log(&self) -> f64 {
        ln_biguint(&self.total) / self.m as f64
    }
}

struct Setup {
    thr: TvThreshold,
    k: usize,
    m: usize,
}

fn setup(sigma: &SoficMap, proc: &Process, w: &Window, eps: f64) -> Result<Setup> {
    if sigma.group() != proc.group() {
        return Err(Error::GroupMismatch(format!(
            "sofic map over {} but process over {}",
            sigma.group().name(),
            proc.group().name()
        )));
    }
    for g in w.elements() {
        sigma.group().check(g)?;
    }
    let target = proc.local_statistics(w)?;
    let thr = TvThreshold::new(&target, eps, sigma.m() as u64)?;
    Ok(Setup {
        thr,
        k: proc.alphabet().len(),
        m: sigma.m(),
    })
}

fn total_size(k: usize, m: usize) -> BigUint {
    BigUint::from(k).pow(m as u32)
}

fn exact_result(sigma: &SoficMap, w: &Window, eps: f64, k: usize, count: BigUint, method: CountMethod) -> MicrostateCount {
    let m = sigma.m();
    let log_rate = if count.is_zero() {
        f64::NEG_INFINITY
    } else {
        ln_biguint(&count) / m as f64
    };
    MicrostateCount {
        sigma: sigma.describe(),
        m,
        window: w.spec_string(),
        eps,
        count,
        total: total_size(k, m),
        log_rate,
        mode: CountMode::Exact { method },
    }
}

/// `|Map(d, ε, σ)|` for `d = d_W` against the process, by the chosen method.
pub fn count_microstates_with(
    sigma: &SoficMap,
    proc: &Process,
    w: &Window,
    eps: f64,
    method: CountMethod,
) -> Result<MicrostateCount> {
    let s = setup(sigma, proc, w, eps)?;
    let (count, used) = match method {
        CountMethod::Frequency => (frequency_count(&s, w)?, method),
        CountMethod::CyclicTransfer => (transfer_count(&s, sigma, w)?, method),
        CountMethod::Enumeration => (enumeration_count(&s, sigma, w)?, method),
        CountMethod::Auto => auto_count(&s, sigma, w)?,
    };
    Ok(exact_result(sigma, w, eps, s.k, count, used))
}

/// Exact count with automatic method choice.
pub fn count_microstates_exact(sigma: &SoficMap, proc: &Process, w: &Window, eps: f64) -> Result<MicrostateCount> {
    count_microstates_with(sigma, proc, w, eps, CountMethod::Auto)
}

fn auto_count(s: &Setup, sigma: &SoficMap, w: &Window) -> Result<(BigUint, CountMethod)> {
    if w.len() == 1 && compositions(s.m, s.k) <= COMPOSITION_GUARD {
        return Ok((frequency_count(s, w)?, CountMethod::Frequency));
    }
    if transfer_applies(sigma, w) {
        match transfer_count(s, sigma, w) {
            Ok(c) => return Ok((c, CountMethod::CyclicTransfer)),
            Err(e) if e.is_guard() && enumeration_size(s) <= ENUMERATION_GUARD => {}
            Err(e) => return Err(e),
        }
    }
    Ok((enumeration_count(s, sigma, w)?, CountMethod::Enumeration))
}

fn compositions(m: usize, k: usize) -> f64 {
    // C(m + k − 1, k − 1)
    let mut c = 1.0f64;
    for i in 1..k {
        c = c * (m + i) as f64 / i as f64;
    }
    c
}

fn enumeration_size(s: &Setup) -> f64 {
    (s.k as f64).powi(s.m as i32)
}

fn frequency_count(s: &Setup, w: &Window) -> Result<BigUint> {
    if w.len() != 1 {
        return Err(Error::invalid("method", "the frequency count needs a one-point window"));
    }
    let n = compositions(s.m, s.k);
    if n > COMPOSITION_GUARD {
        return Err(Error::guard("frequency vectors", n, COMPOSITION_GUARD, "use a smaller m or Monte Carlo"));
    }
    let mut total = BigUint::zero();
    let mut parts = vec![0u64; s.k];
    compositions_rec(s, 0, s.m as u64, &mut parts, &mut total);
    Ok(total)
}

fn compositions_rec(s: &Setup, i: usize, left: u64, parts: &mut Vec<u64>, total: &mut BigUint) {
    if i + 1 == parts.len() {
        parts[i] = left;
        let cells: Vec<(usize, u64)> = parts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(a, &c)| (a, c))
            .collect();
        if s.thr.is_good(s.m as u64, &cells) {
            *total += multinomial(parts);
        }
        return;
    }
    for c in 0..=left {
        parts[i] = c;
        compositions_rec(s, i + 1, left - c, parts, total);
    }
}

fn transfer_applies(sigma: &SoficMap, w: &Window) -> bool {
    match (sigma.cyclic_modulus(), w.as_ints()) {
        (Some(m), Some(ints)) => {
            let span = ints[ints.len() - 1] - ints[0] + 1;
            span as usize <= m
        }
        _ => false,
    }
}

/// Transfer count over a single cycle: fix the first `s − 1` symbols, walk
/// the remaining positions carrying the last `s − 1` symbols and the pattern
/// counts so far, then close the cycle.
fn transfer_count(s: &Setup, sigma: &SoficMap, w: &Window) -> Result<BigUint> {
    if !transfer_applies(sigma, w) {
        return Err(Error::invalid(
            "method",
            "the cyclic transfer count needs a cyclic approximation over Z and a window no wider than m",
        ));
    }
    let ints = w.as_ints().expect("checked");
    let offsets: Vec<usize> = ints.iter().map(|&x| (x - ints[0]) as usize).collect();
    let span = offsets[offsets.len() - 1] + 1;
    let ctx = span - 1;
    let k = s.k;
    let cells = k.pow(offsets.len() as u32);
    let prefixes = k.pow(ctx as u32);

    let pattern = |gram: &[u8]| offsets.iter().fold(0usize, |acc, &o| acc * k + gram[o] as usize);
    // shared across prefixes; exceeded iff the total work exceeds it, whatever the scheduling
    let work = AtomicU64::new(0);
    let over = |size: f64, limit: f64, what: &str| Error::guard(what, size, limit, "use a smaller window or Monte Carlo");

    let parts: Vec<Result<BigUint>> = (0..prefixes)
        .into_par_iter()
        .map(|pidx| {
            let prefix: Vec<u8> = crate::process::decode(pidx, k, ctx).into_iter().map(|a| a as u8).collect();
            let mut states: HashMap<(Vec<u8>, Vec<u32>), BigUint> = HashMap::new();
            states.insert((prefix.clone(), vec![0u32; cells]), BigUint::one());
            let mut gram = vec![0u8; span];
            for _ in ctx..s.m {
                let step = (states.len() * k) as u64;
                let done = work.fetch_add(step, Ordering::Relaxed) + step;
                if done > TRANSFER_WORK_GUARD {
                    return Err(over(done as f64, TRANSFER_WORK_GUARD as f64, "cyclic transfer work"));
                }
                let mut next: HashMap<(Vec<u8>, Vec<u32>), BigUint> = HashMap::with_capacity(states.len() * k);
                for ((tail, counts), mult) in states {
                    gram[..ctx].copy_from_slice(&tail);
                    for a in 0..k as u8 {
                        gram[ctx] = a;
                        let mut c = counts.clone();
                        c[pattern(&gram)] += 1;
                        let key = (gram[1..].to_vec(), c);
                        *next.entry(key).or_insert_with(BigUint::zero) += &mult;
                    }
                }
                if next.len() > TRANSFER_GUARD {
                    return Err(over(next.len() as f64, TRANSFER_GUARD as f64, "cyclic transfer states"));
                }
                states = next;
            }
            let mut good = BigUint::zero();
            for ((tail, mut counts), mult) in states {
                let ring: Vec<u8> = tail.iter().chain(prefix.iter()).copied().collect();
                for j in 0..ctx {
                    counts[pattern(&ring[j..j + span])] += 1;
                }
                let nz: Vec<(usize, u64)> = counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(i, &c)| (i, c as u64))
                    .collect();
                if s.thr.is_good(s.m as u64, &nz) {
                    good += mult;
                }
            }
            Ok(good)
        })
        .collect();
    let mut total = BigUint::zero();
    let mut guard = None;
    for p in parts {
        match p {
            Ok(c) => total += c,
            Err(e) if e.is_guard() => guard = Some(e),
            Err(e) => return Err(e),
        }
    }
    match guard {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// Digits of `idx` in base `k`, least significant first, into `psi`.
fn fill_digits(mut idx: u64, k: u64, psi: &mut [u8]) {
    for x in psi.iter_mut() {
        *x = (idx % k) as u8;
        idx /= k;
    }
}

fn bump(psi: &mut [u8], k: u8) {
    for x in psi.iter_mut() {
        *x += 1;
        if *x < k {
            return;
        }
        *x = 0;
    }
}

fn check_enumeration(s: &Setup, limit: f64) -> Result<u64> {
    let n = enumeration_size(s);
    if n > limit {
        return Err(Error::guard("|A|^m microstates", n, limit, "use Monte Carlo"));
    }
    if s.k > u8::MAX as usize {
        return Err(Error::invalid("alphabet", "enumeration supports at most 255 symbols"));
    }
    Ok(n as u64)
}

fn enumeration_count(s: &Setup, sigma: &SoficMap, w: &Window) -> Result<BigUint> {
    let n = check_enumeration(s, ENUMERATION_GUARD)?;
    let reader = PatternReader::new(sigma, w, s.k)?;
    let hits = map_chunks(n, |_, start, len| {
        let mut buf = reader.scratch();
        let mut psi = vec![0u8; s.m];
        fill_digits(start, s.k as u64, &mut psi);
        let mut hits = 0u64;
        for _ in 0..len {
            let cells = reader.counts(&psi, buf.as_mut());
            if s.thr.is_good(s.m as u64, &cells) {
                hits += 1;
            }
            bump(&mut psi, s.k as u8);
        }
        hits
    });
    Ok(BigUint::from(hits.iter().sum::<u64>()))
}

/// All of `Map(d, ε, σ)`, in increasing order of `Σ ψ(i) |A|^i`.
pub fn good_microstates(sigma: &SoficMap, proc: &Process, w: &Window, eps: f64) -> Result<Vec<Microstate>> {
    let s = setup(sigma, proc, w, eps)?;
    let n = check_enumeration(&s, LISTING_GUARD)?;
    let reader = PatternReader::new(sigma, w, s.k)?;
    let chunks = map_chunks(n, |_, start, len| {
        let mut buf = reader.scratch();
        let mut psi = vec![0u8; s.m];
        fill_digits(start, s.k as u64, &mut psi);
        let mut out = Vec::new();
        for _ in 0..len {
            let cells = reader.counts(&psi, buf.as_mut());
            if s.thr.is_good(s.m as u64, &cells) {
                out.push(psi.iter().map(|&a| a as usize).collect::<Vec<_>>());
            }
            bump(&mut psi, s.k as u8);
        }
        out
    });
    chunks
        .into_iter()
        .flatten()
        .map(|v| Microstate::new(v, s.k))
        .collect()
}

/// `z` with `P(|Z| ≤ z) = 0.99`.
fn z99() -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.995)
}

/// Wilson score interval at 99% for `hits` out of `n`.
pub fn wilson_99(hits: u64, n: u64) -> (f64, f64) {
    let z = z99();
    let n_f = n as f64;
    let p = hits as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Monte Carlo estimate of `|Map(d, ε, σ)|` from uniform microstates.
///
/// Samples are drawn in fixed chunks with per-chunk seeds, so the result does
/// not depend on the thread count.
pub fn estimate_microstates_mc(
    sigma: &SoficMap,
    proc: &Process,
    w: &Window,
    eps: f64,
    samples: u64,
    seed: u64,
) -> Result<MicrostateCount> {
    if samples == 0 {
        return Err(Error::invalid("samples", "at least one sample is required"));
    }
    let s = setup(sigma, proc, w, eps)?;
    if s.k > u8::MAX as usize {
        return Err(Error::invalid("alphabet", "sampling supports at most 255 symbols"));
    }
    let reader = PatternReader::new(sigma, w, s.k)?;
    let k = s.k as u8;
    let hits: u64 = map_chunks(samples, |c, _, len| {
        let mut rng = ChaCha8Rng::seed_from_u64(chunk_seed(seed, c));
        let mut buf = reader.scratch();
        let mut psi = vec![0u8; s.m];
        let mut hits = 0u64;
        for _ in 0..len {
            for x in psi.iter_mut() {
                *x = rng.random_range(0..k);
            }
            if s.thr.is_good(s.m as u64, &reader.counts(&psi, buf.as_mut())) {
                hits += 1;
            }
        }
        hits
    })
    .iter()
    .sum();

    let total = total_size(s.k, s.m);
    let (ci_low, ci_high) = wilson_99(hits, samples);
    let m = s.m as f64;
    let base = m * (s.k as f64).ln();
    let upper_bound_only = hits == 0;
    let frac = if upper_bound_only {
        ci_high
    } else {
        hits as f64 / samples as f64
    };
    let log_rate = (base + frac.ln()) / m;
    let count = &total * BigUint::from(hits) / BigUint::from(samples);
    Ok(MicrostateCount {
        sigma: sigma.describe(),
        m: s.m,
        window: w.spec_string(),
        eps,
        count,
        total,
        log_rate,
        mode: CountMode::MonteCarlo {
            samples,
            hits,
            ci_low,
            ci_high,
            upper_bound_only,
        },
    })
}

/// The exact good fraction `count / total`, as a float.
pub fn good_fraction(c: &MicrostateCount) -> f64 {
    let (n, d) = (ln_biguint(&c.count), ln_biguint(&c.total));
    if c.count.is_zero() {
        0.0
    } else {
        match (c.count.to_f64(), c.total.to_f64()) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
            _ => (n - d).exp(),
        }
    }
}

/// Index of a microstate in the order used by [`good_microstates`] blocks:
/// first coordinate most significant.
pub(crate) fn block_index(psi: &Microstate, k: usize) -> usize {
    encode(psi.values(), k)
}
