//! Classical, sofic and relative entropy, as finite tables and exact counts.

mod counting;
mod table;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

pub use counting::{
    count_microstates_exact, count_microstates_with, estimate_microstates_mc, good_fraction, good_microstates,
    wilson_99, CountMethod, CountMode, MicrostateCount, COMPOSITION_GUARD, ENUMERATION_GUARD, LISTING_GUARD,
    TRANSFER_GUARD, TRANSFER_WORK_GUARD,
};
pub use table::{emit_convergence_data, EntropyTable, TableRow};

use crate::error::{Error, Result};
use crate::group::{folner_box, GroupKind, Window};
use crate::par::chunk_seed;
use crate::process::{factor, factor_by_names, PatternDist, Process, ProcessKind};
use crate::rational::{ln_biguint, multinomial};
use crate::sofic::SoficMap;
use crate::stats::{shannon, shannon_dist, Microstate};

fn box_label(proc: &Process, n: usize) -> String {
    match proc.group().kind() {
        GroupKind::IntegerLine => format!("[1,{n}]"),
        GroupKind::IntegerLattice { dim } => format!("[1,{n}]^{dim}"),
        GroupKind::FiniteCayley { .. } => "G".to_string(),
    }
}

/// `H(φ^{F_n}) / |F_n|` along the standard boxes, `n = 1..=n_max`.
///
/// A box too large for exact statistics ends the table with a warning.
pub fn classical_entropy_sequence(proc: &Process, n_max: usize) -> Result<EntropyTable> {
    if n_max == 0 {
        return Err(Error::invalid("n_max", "n_max must be at least 1"));
    }
    let mut table = EntropyTable::new("classical");
    let finite = proc.group().order().is_some();
    for n in 1..=n_max {
        let step = folner_box(proc.group(), n).and_then(|f| {
            let d = proc.local_statistics(&f.as_window())?;
            Ok((f.len(), shannon_dist(&d)))
        });
        match step {
            Ok((size, h)) => table.push(TableRow::value(size, box_label(proc, n), h / size as f64, "classical"))?,
            Err(e) if e.is_guard() && n > 1 => {
                table.warnings.push(format!("stopped before n = {n}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        }
        if finite {
            // every box is the whole group
            break;
        }
    }
    table.summary = table.rows.last().map(|r| r.log_rate);
    Ok(table)
}

/// `H(φ^{[1,n]}) − H(φ^{[1,n−1]})`, the conditional entropy of the last
/// symbol given the `n − 1` before it.
pub fn conditional_window_entropy(proc: &Process, n: usize) -> Result<f64> {
    if !proc.group().is_integer_line() {
        return Err(Error::invalid("process", "conditional window entropy is defined over Z"));
    }
    if n < 2 {
        return Err(Error::invalid("n", "n must be at least 2"));
    }
    let h = |len: usize| -> Result<f64> {
        Ok(shannon_dist(&proc.local_statistics(&Window::interval(1, len as i64)?)?))
    };
    Ok(h(n)? - h(n - 1)?)
}

/// The entropy rate in closed form, where one is known.
pub fn exact_rate(proc: &Process) -> Option<f64> {
    match proc.kind() {
        ProcessKind::Bernoulli { omega } => shannon(omega).ok(),
        ProcessKind::MarkovZ { transition, stationary } => {
            let mut h = 0.0;
            for (pi, row) in stationary.iter().zip(transition) {
                h += pi * shannon(row).ok()?;
            }
            Some(h)
        }
        ProcessKind::Product { left, right } => Some(exact_rate(left)? + exact_rate(right)?),
        ProcessKind::Factor { map, inner } => factor_rate(proc, map, inner),
        ProcessKind::BlockIid { .. } => None,
    }
}

fn factor_rate(outer: &Process, map: &[usize], inner: &Process) -> Option<f64> {
    let mut seen = map.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() == map.len() {
        return exact_rate(inner);
    }
    if seen.len() == 1 {
        return Some(0.0);
    }
    match inner.kind() {
        ProcessKind::Bernoulli { omega } => {
            let mut push = vec![0.0; outer.alphabet().len()];
            for (a, &p) in omega.iter().enumerate() {
                push[map[a]] += p;
            }
            shannon(&push).ok()
        }
        ProcessKind::Product { left, right } => {
            let (nl, nr) = (left.alphabet().len(), right.alphabet().len());
            let target = outer.alphabet().to_vec();
            let on_left = (0..nl).all(|a| (0..nr).all(|b| map[a * nr + b] == map[a * nr]));
            let on_right = (0..nr).all(|b| (0..nl).all(|a| map[a * nr + b] == map[b]));
            if on_left {
                let induced = (0..nl).map(|a| map[a * nr]).collect();
                exact_rate(&factor(left, induced, target).ok()?)
            } else if on_right {
                let induced = (0..nr).map(|b| map[b]).collect();
                exact_rate(&factor(right, induced, target).ok()?)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// `h(X) − h(β∘X)` as a finite table of window differences
/// `[H(X^{F_n}) − H((β∘X)^{F_n})] / |F_n|`, and its closed form when both
/// rates have one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelativeEntropy {
    pub exact: Option<f64>,
    pub table: EntropyTable,
}

pub fn relative_entropy(proc: &Process, beta: &BTreeMap<String, String>, n_max: usize) -> Result<RelativeEntropy> {
    let y = factor_by_names(proc, beta)?;
    relative_entropy_of(proc, &y, n_max)
}

/// As [`relative_entropy`], with `y` already a factor of `x`.
pub fn relative_entropy_of(x: &Process, y: &Process, n_max: usize) -> Result<RelativeEntropy> {
    match y.kind() {
        ProcessKind::Factor { inner, .. } if inner.as_ref() == x => {}
        _ => return Err(Error::invalid("factor", "second process must be a symbol factor of the first")),
    }
    let hx = classical_entropy_sequence(x, n_max)?;
    let hy = classical_entropy_sequence(y, n_max)?;
    let mut table = EntropyTable::new("relative");
    table.warnings.extend(hx.warnings.iter().cloned());
    for (rx, ry) in hx.rows.iter().zip(&hy.rows) {
        table.push(TableRow::value(rx.m, rx.window.clone(), rx.log_rate - ry.log_rate, "relative"))?;
    }
    table.summary = table.rows.last().map(|r| r.log_rate);
    let exact = exact_rate(x).zip(exact_rate(y)).map(|(a, b)| a - b);
    Ok(RelativeEntropy { exact, table })
}

/// How [`sofic_entropy_estimate`] sizes each `Map(d, ε, σ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EstimateMode {
    Exact(CountMethod),
    MonteCarlo { samples: u64, seed: u64 },
}

/// Rows `(1/m) ln |Map(d_W, ε, σ)|` over an increasing schedule of sofic
/// maps, nested windows and decreasing ε. The summary is the minimum over
/// `(W, ε)` at the largest `m` reached.
pub fn sofic_entropy_estimate(
    sigmas: &[SoficMap],
    proc: &Process,
    windows: &[Window],
    eps_list: &[f64],
    mode: EstimateMode,
) -> Result<(EntropyTable, Vec<MicrostateCount>)> {
    if sigmas.is_empty() || windows.is_empty() || eps_list.is_empty() {
        return Err(Error::invalid("schedule", "sigmas, windows and eps must all be nonempty"));
    }
    if sigmas.windows(2).any(|p| p[0].m() >= p[1].m()) {
        return Err(Error::invalid("sigmas", "sizes m must be strictly increasing"));
    }
    if windows.windows(2).any(|p| !p[0].is_subset_of(&p[1]) || p[0] == p[1]) {
        return Err(Error::invalid("windows", "windows must be strictly nested"));
    }
    if eps_list.windows(2).any(|p| p[0].is_nan() || p[0] <= p[1]) {
        return Err(Error::invalid("eps", "eps must be strictly decreasing"));
    }
    if eps_list.iter().any(|e| e.is_nan() || *e <= 0.0) {
        return Err(Error::invalid("eps", "eps must be positive"));
    }
    let mut table = EntropyTable::new("sofic");
    let mut counts = Vec::new();
    let mut row_index = 0u64;
    'outer: for sigma in sigmas {
        for w in windows {
            for &eps in eps_list {
                let res = match mode {
                    EstimateMode::Exact(method) => count_microstates_with(sigma, proc, w, eps, method),
                    EstimateMode::MonteCarlo { samples, seed } => {
                        estimate_microstates_mc(sigma, proc, w, eps, samples, chunk_seed(seed, row_index))
                    }
                };
                row_index += 1;
                let c = match res {
                    Ok(c) => c,
                    Err(e) if e.is_guard() && !table.rows.is_empty() => {
                        table
                            .warnings
                            .push(format!("stopped at m = {}, W = {}, eps = {eps}: {e}", sigma.m(), w.spec_string()));
                        break 'outer;
                    }
                    Err(e) => return Err(e),
                };
                let ci = c.log_rate_interval();
                table.push(TableRow {
                    m: c.m,
                    window: c.window.clone(),
                    eps: Some(eps),
                    count: Some(c.count.to_string()),
                    total: Some(c.total.to_string()),
                    log_rate: c.log_rate,
                    mode: c.mode_label().to_string(),
                    ci_low: ci.map(|x| x.0),
                    ci_high: ci.map(|x| x.1),
                })?;
                counts.push(c);
            }
        }
    }
    if let Some(&last) = table.schedule.last() {
        table.summary = table
            .rows
            .iter()
            .filter(|r| r.m == last)
            .map(|r| r.log_rate)
            .reduce(f64::min);
    }
    Ok((table, counts))
}

/// A probability measure on `A^[m]`, stored as a pattern law on the window
/// `{1, …, m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMeasure {
    nu: PatternDist,
    m: usize,
}

impl BlockMeasure {
    pub fn new(alphabet: Vec<String>, m: usize, probs: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("m", "block length must be at least 1"));
        }
        let nu = PatternDist::new(Window::interval(1, m as i64)?, alphabet, probs)?;
        Ok(BlockMeasure { nu, m })
    }

    pub fn from_dist(nu: PatternDist) -> Result<Self> {
        let m = nu.window().len();
        if nu.window() != &Window::interval(1, m as i64)? {
            return Err(Error::invalid("nu", "block measures live on the window [1, m]"));
        }
        Ok(BlockMeasure { nu, m })
    }

    /// Uniform on the given distinct microstates.
    pub fn uniform_on(alphabet: Vec<String>, states: &[Microstate]) -> Result<Self> {
        let m = match states.first() {
            Some(s) => s.len(),
            None => return Err(Error::invalid("states", "at least one microstate is required")),
        };
        let k = alphabet.len();
        let cells = (k as f64).powi(m as i32);
        if cells > crate::process::EXACT_GUARD {
            return Err(Error::guard("block measure cells", cells, crate::process::EXACT_GUARD, "use a shorter block"));
        }
        let mut probs = vec![0.0; cells as usize];
        let w = 1.0 / states.len() as f64;
        for s in states {
            if s.len() != m || s.values().iter().any(|&a| a >= k) {
                return Err(Error::invalid("states", "microstates must share length and alphabet"));
            }
            let idx = counting::block_index(s, k);
            if probs[idx] > 0.0 {
                return Err(Error::invalid("states", "microstates must be distinct"));
            }
            probs[idx] = w;
        }
        BlockMeasure::new(alphabet, m, probs)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dist(&self) -> &PatternDist {
        &self.nu
    }

    pub fn entropy(&self) -> f64 {
        shannon_dist(&self.nu)
    }
}

/// `(1/m) Σ_i w_i H(ν_i)` for a weighted family of block measures of equal
/// length `m`.
pub fn upper_sofic_block_entropy(atoms: &[(f64, BlockMeasure)]) -> Result<f64> {
    let m = match atoms.first() {
        Some((_, b)) => b.m(),
        None => return Err(Error::invalid("atoms", "at least one atom is required")),
    };
    if atoms.iter().any(|(_, b)| b.m() != m) {
        return Err(Error::invalid("atoms", "all block measures must have the same m"));
    }
    if atoms.iter().any(|(w, _)| w.is_nan() || *w < 0.0) {
        return Err(Error::invalid("weights", "weights must be nonnegative"));
    }
    let total: f64 = atoms.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("weights", format!("weights sum to {total}, not 1")));
    }
    Ok(atoms.iter().map(|(w, b)| w * b.entropy()).sum::<f64>() / m as f64)
}

/// Size of the set of good functions on `m_n` points built from `kd` blocks
/// with empirical law exactly `ν`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodFunctionCount {
    pub log_count: f64,
    pub per_site: f64,
    /// The count itself when `kd` is small enough to form exactly.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "opt_big")]
    pub exact: Option<BigUint>,
}

fn opt_big<S: serde::Serializer>(x: &Option<BigUint>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

/// Beyond this many blocks the multinomial is taken through `ln Γ`.
pub const EXACT_BLOCKS: usize = 10_000;

/// `|A|^{m_n − kd·m} · (kd)! / Π_ξ (kd·ν(ξ))!`, in logs.
pub fn good_function_log_count(nu: &BlockMeasure, d: usize, k: usize, m_n: usize) -> Result<GoodFunctionCount> {
    let kd = k.checked_mul(d).ok_or(Error::Overflow)?;
    if kd == 0 {
        return Err(Error::invalid("kd", "k and d must be positive"));
    }
    let covered = kd.checked_mul(nu.m()).ok_or(Error::Overflow)?;
    if m_n < covered {
        return Err(Error::invalid("m_n", format!("m_n = {m_n} is smaller than kd·m = {covered}")));
    }
    let mut parts = Vec::new();
    for (i, &p) in nu.dist().probs().iter().enumerate() {
        let x = kd as f64 * p;
        let r = x.round();
        if (x - r).abs() > 1e-9 * x.max(1.0) {
            return Err(Error::invalid(
                "nu",
                format!("kd·nu({}) = {x} is not an integer", nu.dist().pattern_string(i)),
            ));
        }
        if r > 0.0 {
            parts.push(r as u64);
        }
    }
    if parts.iter().sum::<u64>() != kd as u64 {
        return Err(Error::invalid("nu", "kd·nu does not sum to kd"));
    }
    let a = nu.dist().alphabet().len();
    let free = (m_n - covered) as f64 * (a as f64).ln();
    let (log_count, exact) = if kd <= EXACT_BLOCKS {
        let count = BigUint::from(a).pow((m_n - covered) as u32) * multinomial(&parts);
        (ln_biguint(&count), Some(count))
    } else {
        let lm = ln_gamma(kd as f64 + 1.0) - parts.iter().map(|&c| ln_gamma(c as f64 + 1.0)).sum::<f64>();
        (free + lm, None)
    };
    Ok(GoodFunctionCount {
        log_count,
        per_site: log_count / m_n as f64,
        exact,
    })
}
