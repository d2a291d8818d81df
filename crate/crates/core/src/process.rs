//! Shift-invariant symbolic processes with a finite alphabet.
//!
//! A process is represented by its symbolic law: what matters is the joint
//! distribution of the symbols read at the elements of any finite window.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{GroupSpec, Window};
use crate::par;

/// Largest `|A|^|W|` handled by exact window computations.
pub const EXACT_GUARD: f64 = 1e7;

/// Symbols `"0"`, `"1"`, … .
pub fn default_alphabet(k: usize) -> Vec<String> {
    (0..k).map(|i| i.to_string()).collect()
}

fn cells(alphabet: usize, len: usize) -> Result<usize> {
    let size = (alphabet as f64).powi(len as i32);
    if size > EXACT_GUARD {
        return Err(Error::guard(
            "|A|^|W|",
            size,
            EXACT_GUARD,
            "use a smaller window or the Monte Carlo estimator",
        ));
    }
    Ok(alphabet.pow(len as u32))
}

fn check_distribution(field: &str, probs: &[f64], tol: f64) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::invalid(field, "probabilities must be finite and nonnegative"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::invalid(field, format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// A probability distribution on `A^W`.
///
/// Pattern `(a_1, …, a_n)` (symbols at the window elements in canonical order)
/// has index `Σ a_i |A|^{n-i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternDist {
    window: Window,
    alphabet: Vec<String>,
    probs: Vec<f64>,
}

impl PatternDist {
    pub fn new(window: Window, alphabet: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        let n = cells(alphabet.len(), window.len())?;
        if probs.len() != n {
            return Err(Error::invalid("probs", format!("expected {n} entries, got {}", probs.len())));
        }
        check_distribution("probs", &probs, 1e-12)?;
        Ok(PatternDist { window, alphabet, probs })
    }

    pub(crate) fn from_parts(window: Window, alphabet: Vec<String>, probs: Vec<f64>) -> Self {
        PatternDist { window, alphabet, probs }
    }

    pub fn point_mass(window: Window, alphabet: Vec<String>, pattern: &[usize]) -> Result<Self> {
        let n = cells(alphabet.len(), window.len())?;
        let mut probs = vec![0.0; n];
        let idx = encode(pattern, alphabet.len());
        probs[idx] = 1.0;
        Ok(PatternDist { window, alphabet, probs })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, pattern: &[usize]) -> f64 {
        self.probs[encode(pattern, self.alphabet.len())]
    }

    pub fn decode(&self, idx: usize) -> Vec<usize> {
        decode(idx, self.alphabet.len(), self.window.len())
    }

    /// Symbols joined by `|`, e.g. `0|1`.
    pub fn pattern_string(&self, idx: usize) -> String {
        self.decode(idx)
            .iter()
            .map(|&a| self.alphabet[a].as_str())
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Marginal on a sub-window.
    pub fn project(&self, sub: &Window) -> Result<PatternDist> {
        let pos: Vec<usize> = sub
            .elements()
            .iter()
            .map(|g| {
                self.window
                    .position(g)
                    .ok_or_else(|| Error::invalid("window", format!("{g} is not in {}", self.window.spec_string())))
            })
            .collect::<Result<_>>()?;
        let k = self.alphabet.len();
        let mut out = vec![0.0; k.pow(sub.len() as u32)];
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let digits = decode(idx, k, self.window.len());
            let j = pos.iter().fold(0usize, |acc, &i| acc * k + digits[i]);
            out[j] += p;
        }
        Ok(PatternDist::from_parts(sub.clone(), self.alphabet.clone(), out))
    }

    /// Coordinatewise pushforward under a symbol map.
    pub fn pushforward(&self, map: &[usize], target: &[String]) -> Result<PatternDist> {
        if map.len() != self.alphabet.len() || map.iter().any(|&b| b >= target.len()) {
            return Err(Error::invalid("map", "symbol map must be total into the target alphabet"));
        }
        let k = self.alphabet.len();
        let n = cells(target.len(), self.window.len())?;
        let mut out = vec![0.0; n];
        for (idx, &p) in self.probs.iter().enumerate() {
            let digits = decode(idx, k, self.window.len());
            let j = digits.iter().fold(0usize, |acc, &a| acc * target.len() + map[a]);
            out[j] += p;
        }
        Ok(PatternDist::from_parts(self.window.clone(), target.to_vec(), out))
    }

    /// `(pattern, probability)` rows for plotting.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("pattern,probability\n");
        for (idx, p) in self.probs.iter().enumerate() {
            s.push_str(&format!("{},{}\n", self.pattern_string(idx), p));
        }
        s
    }
}

pub(crate) fn encode(pattern: &[usize], k: usize) -> usize {
    pattern.iter().fold(0usize, |acc, &a| acc * k + a)
}

pub(crate) fn decode(mut idx: usize, k: usize, len: usize) -> Vec<usize> {
    let mut digits = vec![0usize; len];
    for d in digits.iter_mut().rev() {
        *d = idx % k;
        idx /= k;
    }
    digits
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProcessKind {
    /// i.i.d. symbols with law `omega`.
    Bernoulli { omega: Vec<f64> },
    /// Stationary Markov chain over ℤ.
    MarkovZ {
        transition: Vec<Vec<f64>>,
        stationary: Vec<f64>,
    },
    /// `β ∘ X` for a symbol map `β: A → B` (indices into the outer alphabet).
    Factor { map: Vec<usize>, inner: Box<Process> },
    /// Independent joining; the symbol `(a, b)` has index `a·|B| + b`.
    Product { left: Box<Process>, right: Box<Process> },
    /// Shift-averaged concatenation of i.i.d. blocks with law `nu` on `A^[1, block]`.
    BlockIid { nu: Vec<f64>, block: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Process {
    alphabet: Vec<String>,
    group: GroupSpec,
    kind: ProcessKind,
}

impl Process {
    pub fn bernoulli(group: GroupSpec, alphabet: Vec<String>, omega: Vec<f64>) -> Result<Self> {
        if alphabet.is_empty() || omega.len() != alphabet.len() {
            return Err(Error::invalid("omega", "one probability per symbol required"));
        }
        check_alphabet(&alphabet)?;
        check_distribution("omega", &omega, 1e-12)?;
        Ok(Process {
            alphabet,
            group,
            kind: ProcessKind::Bernoulli { omega },
        })
    }

    /// Bernoulli over ℤ with alphabet `0, 1, …`.
    pub fn bernoulli_z(omega: &[f64]) -> Result<Self> {
        Process::bernoulli(GroupSpec::integer_line(), default_alphabet(omega.len()), omega.to_vec())
    }

    pub fn markov(alphabet: Vec<String>, transition: Vec<Vec<f64>>, stationary: Vec<f64>) -> Result<Self> {
        let k = alphabet.len();
        if k == 0 || transition.len() != k || transition.iter().any(|r| r.len() != k) || stationary.len() != k {
            return Err(Error::invalid("transition", "matrix and stationary vector must match the alphabet"));
        }
        check_alphabet(&alphabet)?;
        for (a, row) in transition.iter().enumerate() {
            check_distribution(&format!("transition[{a}]"), row, 1e-10)?;
        }
        check_distribution("stationary", &stationary, 1e-10)?;
        for b in 0..k {
            let v: f64 = (0..k).map(|a| stationary[a] * transition[a][b]).sum();
            if (v - stationary[b]).abs() > 1e-10 {
                return Err(Error::invalid("stationary", "pi P differs from pi"));
            }
        }
        Ok(Process {
            alphabet,
            group: GroupSpec::integer_line(),
            kind: ProcessKind::MarkovZ { transition, stationary },
        })
    }

    /// Two-state chain that flips with probability `p`, started from `(½, ½)`.
    pub fn symmetric_markov(p: f64) -> Result<Self> {
        Process::markov(
            default_alphabet(2),
            vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
            vec![0.5, 0.5],
        )
    }

    pub fn block_iid(alphabet: Vec<String>, block: usize, nu: Vec<f64>) -> Result<Self> {
        if block == 0 {
            return Err(Error::invalid("block", "block length must be at least 1"));
        }
        check_alphabet(&alphabet)?;
        let n = cells(alphabet.len(), block)?;
        if nu.len() != n {
            return Err(Error::invalid("nu", format!("expected {n} block probabilities, got {}", nu.len())));
        }
        check_distribution("nu", &nu, 1e-12)?;
        Ok(Process {
            alphabet,
            group: GroupSpec::integer_line(),
            kind: ProcessKind::BlockIid { nu, block },
        })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn kind(&self) -> &ProcessKind {
        &self.kind
    }

    fn require_integer_window(&self, w: &Window) -> Result<Vec<i64>> {
        w.as_ints()
            .ok_or_else(|| Error::invalid("window", "this process needs a window in Z"))
    }

    /// Exact window statistics, the law of `(φ(T_w x))_{w ∈ W}`.
    pub fn local_statistics(&self, w: &Window) -> Result<PatternDist> {
        for g in w.elements() {
            self.group.check(g)?;
        }
        let k = self.alphabet.len();
        cells(k, w.len())?;
        let probs = match &self.kind {
            ProcessKind::Bernoulli { omega } => {
                let mut probs = vec![1.0];
                for _ in 0..w.len() {
                    probs = probs
                        .iter()
                        .flat_map(|p| omega.iter().map(move |q| p * q))
                        .collect();
                }
                probs
            }
            ProcessKind::MarkovZ { transition, stationary } => {
                let ints = self.require_integer_window(w)?;
                let mut probs = stationary.clone();
                for pair in ints.windows(2) {
                    let step = mat_pow(transition, (pair[1] - pair[0]) as u64);
                    let mut next = Vec::with_capacity(probs.len() * k);
                    for (idx, p) in probs.iter().enumerate() {
                        let last = idx % k;
                        next.extend(step[last].iter().map(|q| p * q));
                    }
                    probs = next;
                }
                probs
            }
            ProcessKind::Factor { map, inner } => {
                return inner.local_statistics(w)?.pushforward(map, &self.alphabet);
            }
            ProcessKind::Product { left, right } => {
                let l = left.local_statistics(w)?;
                let r = right.local_statistics(w)?;
                let (ka, kb, n) = (left.alphabet.len(), right.alphabet.len(), w.len());
                let mut probs = vec![0.0; k.pow(n as u32)];
                for (li, lp) in l.probs.iter().enumerate() {
                    if *lp == 0.0 {
                        continue;
                    }
                    let ld = decode(li, ka, n);
                    for (ri, rp) in r.probs.iter().enumerate() {
                        let rd = decode(ri, kb, n);
                        let j = ld.iter().zip(&rd).fold(0usize, |acc, (a, b)| acc * k + a * kb + b);
                        probs[j] = lp * rp;
                    }
                }
                probs
            }
            ProcessKind::BlockIid { nu, block } => {
                let ints = self.require_integer_window(w)?;
                block_iid_statistics(nu, *block, k, &ints)
            }
        };
        Ok(PatternDist::from_parts(w.clone(), self.alphabet.clone(), probs))
    }

    /// A reusable sampler for patterns on `w`.
    pub fn sampler(&self, w: &Window) -> Result<PatternSampler> {
        for g in w.elements() {
            self.group.check(g)?;
        }
        let n = w.len();
        Ok(match &self.kind {
            ProcessKind::Bernoulli { omega } => PatternSampler::Iid {
                symbol: weighted(omega)?,
                len: n,
            },
            ProcessKind::MarkovZ { transition, stationary } => {
                let ints = self.require_integer_window(w)?;
                let steps = ints
                    .windows(2)
                    .map(|p| {
                        mat_pow(transition, (p[1] - p[0]) as u64)
                            .iter()
                            .map(|row| weighted(row))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?;
                PatternSampler::Markov {
                    start: weighted(stationary)?,
                    steps,
                }
            }
            ProcessKind::Factor { map, inner } => PatternSampler::Factor {
                map: map.clone(),
                inner: Box::new(inner.sampler(w)?),
            },
            ProcessKind::Product { left, right } => PatternSampler::Product {
                right_size: right.alphabet.len(),
                left: Box::new(left.sampler(w)?),
                right: Box::new(right.sampler(w)?),
            },
            ProcessKind::BlockIid { nu, block } => PatternSampler::Blocks {
                cells: weighted(nu)?,
                block: *block,
                k: self.alphabet.len(),
                positions: self.require_integer_window(w)?,
            },
        })
    }

    /// One pattern drawn from the window law; a pure function of `seed`.
    pub fn sample_pattern(&self, w: &Window, seed: u64) -> Result<Vec<usize>> {
        let s = self.sampler(w)?;
        Ok(s.sample(&mut ChaCha8Rng::seed_from_u64(seed)))
    }

    /// `count` patterns, deterministic in `seed` regardless of thread count.
    pub fn sample_patterns(&self, w: &Window, count: u64, seed: u64) -> Result<Vec<Vec<usize>>> {
        let s = self.sampler(w)?;
        let chunks = par::map_chunks(count, |c, _, len| {
            let mut rng = ChaCha8Rng::seed_from_u64(par::chunk_seed(seed, c));
            (0..len).map(|_| s.sample(&mut rng)).collect::<Vec<_>>()
        });
        Ok(chunks.into_iter().flatten().collect())
    }
}

fn check_alphabet(alphabet: &[String]) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for a in alphabet {
        if a.contains('|') {
            return Err(Error::invalid("alphabet", format!("symbol {a:?} contains '|'")));
        }
        if !seen.insert(a) {
            return Err(Error::invalid("alphabet", format!("symbol {a:?} repeated")));
        }
    }
    Ok(())
}

/// `β ∘ X` for a total symbol map given by index.
pub fn factor(proc: &Process, map: Vec<usize>, target: Vec<String>) -> Result<Process> {
    if map.len() != proc.alphabet.len() {
        return Err(Error::invalid("map", "symbol map must be total on the alphabet"));
    }
    if map.iter().any(|&b| b >= target.len()) {
        return Err(Error::invalid("map", "symbol map leaves the target alphabet"));
    }
    check_alphabet(&target)?;
    Ok(Process {
        alphabet: target,
        group: proc.group.clone(),
        kind: ProcessKind::Factor {
            map,
            inner: Box::new(proc.clone()),
        },
    })
}

/// `β ∘ X` for a symbol map given by names. The target alphabet is the set of
/// images in order of first appearance.
pub fn factor_by_names(proc: &Process, beta: &BTreeMap<String, String>) -> Result<Process> {
    let mut target: Vec<String> = Vec::new();
    let mut map = Vec::with_capacity(proc.alphabet.len());
    for a in &proc.alphabet {
        let b = beta
            .get(a)
            .ok_or_else(|| Error::invalid("map", format!("symbol {a:?} has no image")))?;
        let j = match target.iter().position(|t| t == b) {
            Some(j) => j,
            None => {
                target.push(b.clone());
                target.len() - 1
            }
        };
        map.push(j);
    }
    factor(proc, map, target)
}

/// The independent joining of two processes over the same group.
pub fn product(x: &Process, y: &Process) -> Result<Process> {
    if x.group != y.group {
        return Err(Error::GroupMismatch("product of processes over different groups".into()));
    }
    let alphabet = x
        .alphabet
        .iter()
        .flat_map(|a| y.alphabet.iter().map(move |b| format!("({a},{b})")))
        .collect();
    Ok(Process {
        alphabet,
        group: x.group.clone(),
        kind: ProcessKind::Product {
            left: Box::new(x.clone()),
            right: Box::new(y.clone()),
        },
    })
}

pub(crate) fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

pub(crate) fn mat_pow(a: &[Vec<f64>], mut e: u64) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut acc: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    if e == 1 {
        return a.to_vec();
    }
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = mat_mul(&acc, &base);
        }
        base = mat_mul(&base, &base);
        e >>= 1;
    }
    acc
}

/// Window law of the block-concatenation process averaged over its `block`
/// phases. Blocks occupy `[im+1, im+m]`; under phase `j` position `w` reads
/// the unshifted sequence at `w + j`.
fn block_iid_statistics(nu: &[f64], block: usize, k: usize, ints: &[i64]) -> Vec<f64> {
    let m = block as i64;
    let n = ints.len();
    let mut total = vec![0.0; k.pow(n as u32)];
    for j in 1..=m {
        // consecutive window coordinates grouped by block index
        let mut groups: Vec<(i64, Vec<usize>)> = Vec::new();
        for &w in ints {
            let x = w + j;
            let b = (x - 1).div_euclid(m);
            let off = (x - 1).rem_euclid(m) as usize;
            match groups.last_mut() {
                Some((gb, offs)) if *gb == b => offs.push(off),
                _ => groups.push((b, vec![off])),
            }
        }
        let mut probs = vec![1.0];
        for (_, offs) in &groups {
            let mut marginal = vec![0.0; k.pow(offs.len() as u32)];
            for (idx, p) in nu.iter().enumerate() {
                if *p == 0.0 {
                    continue;
                }
                let digits = decode(idx, k, block);
                let j = offs.iter().fold(0usize, |acc, &o| acc * k + digits[o]);
                marginal[j] += p;
            }
            probs = probs
                .iter()
                .flat_map(|p| marginal.iter().map(move |q| p * q))
                .collect();
        }
        for (t, p) in total.iter_mut().zip(&probs) {
            *t += p / m as f64;
        }
    }
    total
}

fn weighted(probs: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(probs).map_err(|e| Error::invalid("probs", e.to_string()))
}

/// Prepared sampler for one process and window.
#[derive(Clone, Debug)]
pub enum PatternSampler {
    Iid {
        symbol: WeightedIndex<f64>,
        len: usize,
    },
    Markov {
        start: WeightedIndex<f64>,
        steps: Vec<Vec<WeightedIndex<f64>>>,
    },
    Factor {
        map: Vec<usize>,
        inner: Box<PatternSampler>,
    },
    Product {
        right_size: usize,
        left: Box<PatternSampler>,
        right: Box<PatternSampler>,
    },
    Blocks {
        cells: WeightedIndex<f64>,
        block: usize,
        k: usize,
        positions: Vec<i64>,
    },
}

impl PatternSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        match self {
            PatternSampler::Iid { symbol, len } => (0..*len).map(|_| symbol.sample(rng)).collect(),
            PatternSampler::Markov { start, steps } => {
                let mut out = Vec::with_capacity(steps.len() + 1);
                let mut a = start.sample(rng);
                out.push(a);
                for step in steps {
                    a = step[a].sample(rng);
                    out.push(a);
                }
                out
            }
            PatternSampler::Factor { map, inner } => inner.sample(rng).into_iter().map(|a| map[a]).collect(),
            PatternSampler::Product { right_size, left, right } => {
                let l = left.sample(rng);
                let r = right.sample(rng);
                l.into_iter().zip(r).map(|(a, b)| a * right_size + b).collect()
            }
            PatternSampler::Blocks {
                cells,
                block,
                k,
                positions,
            } => {
                let m = *block as i64;
                let phase = rng.random_range(1..=m);
                let mut current: Option<(i64, Vec<usize>)> = None;
                let mut out = Vec::with_capacity(positions.len());
                for &w in positions {
                    let x = w + phase;
                    let b = (x - 1).div_euclid(m);
                    if current.as_ref().is_none_or(|(cb, _)| *cb != b) {
                        current = Some((b, decode(cells.sample(rng), *k, *block)));
                    }
                    let digits = &current.as_ref().unwrap().1;
                    out.push(digits[(x - 1).rem_euclid(m) as usize]);
                }
                out
            }
        }
    }
}

/// True for kinds whose window statistics need a window in ℤ.
pub fn needs_integer_windows(proc: &Process) -> bool {
    match proc.kind() {
        ProcessKind::Bernoulli { .. } => false,
        ProcessKind::MarkovZ { .. } | ProcessKind::BlockIid { .. } => true,
        ProcessKind::Factor { inner, .. } => needs_integer_windows(inner),
        ProcessKind::Product { left, right } => needs_integer_windows(left) || needs_integer_windows(right),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn bernoulli_pairs_are_uniform() {
        let x = Process::bernoulli_z(&[0.5, 0.5]).unwrap();
        let d = x.local_statistics(&Window::from_ints(&[0, 1]).unwrap()).unwrap();
        assert!(d.probs().iter().all(|&p| p == 0.25));
    }

    #[test]
    fn markov_pair_statistics() {
        let x = Process::symmetric_markov(0.3).unwrap();
        let d = x.local_statistics(&Window::from_ints(&[0, 1]).unwrap()).unwrap();
        let expect = [0.35, 0.15, 0.15, 0.35];
        for (p, e) in d.probs().iter().zip(expect) {
            assert!(close(*p, e), "{p} vs {e}");
        }
        // gap bridged by P²: P(x0 = 0, x2 = 0) = ½ (0.7² + 0.3²)
        let g = x.local_statistics(&Window::from_ints(&[0, 2]).unwrap()).unwrap();
        assert!(close(g.prob(&[0, 0]), 0.5 * (0.49 + 0.09)));
    }

    #[test]
    fn markov_rejects_bad_inputs() {
        assert!(Process::markov(default_alphabet(2), vec![vec![0.5, 0.6], vec![0.5, 0.5]], vec![0.5, 0.5]).is_err());
        assert!(Process::markov(default_alphabet(2), vec![vec![0.9, 0.1], vec![0.5, 0.5]], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn factor_examples() {
        let x = Process::bernoulli_z(&[0.5, 0.25, 0.25]).unwrap();
        let w0 = Window::from_ints(&[0]).unwrap();
        let y = factor(&x, vec![0, 1, 1], default_alphabet(2)).unwrap();
        let d = y.local_statistics(&w0).unwrap();
        assert_eq!(d.probs(), &[0.5, 0.5]);

        let id = factor(&x, vec![0, 1, 2], default_alphabet(3)).unwrap();
        let w = Window::from_ints(&[0, 1, 3]).unwrap();
        assert_eq!(id.local_statistics(&w).unwrap().probs(), x.local_statistics(&w).unwrap().probs());

        let c = factor(&x, vec![0, 0, 0], vec!["c".into()]).unwrap();
        assert_eq!(c.local_statistics(&w).unwrap().probs(), &[1.0]);

        let partial: BTreeMap<String, String> = [("0".to_string(), "a".to_string())].into();
        assert!(factor_by_names(&x, &partial).is_err());
    }

    #[test]
    fn product_outer_product() {
        let x = Process::bernoulli_z(&[0.5, 0.5]).unwrap();
        let y = Process::bernoulli_z(&[0.3, 0.7]).unwrap();
        let xy = product(&x, &y).unwrap();
        let d = xy.local_statistics(&Window::from_ints(&[0]).unwrap()).unwrap();
        for (p, e) in d.probs().iter().zip([0.15, 0.35, 0.15, 0.35]) {
            assert!(close(*p, e));
        }
        assert_eq!(xy.alphabet()[1], "(0,1)");
    }

    #[test]
    fn block_iid_of_product_block_is_bernoulli() {
        let omega = [0.2, 0.8];
        let nu: Vec<f64> = (0..8)
            .map(|i| decode(i, 2, 3).iter().map(|&a| omega[a]).product())
            .collect();
        let b = Process::block_iid(default_alphabet(2), 3, nu).unwrap();
        let x = Process::bernoulli_z(&omega).unwrap();
        let w = Window::from_ints(&[-2, 0, 1, 5]).unwrap();
        let (p, q) = (b.local_statistics(&w).unwrap(), x.local_statistics(&w).unwrap());
        for (a, c) in p.probs().iter().zip(q.probs()) {
            assert!(close(*a, *c));
        }
    }

    #[test]
    fn block_iid_periodic_block() {
        // nu = point mass on "01": the process is the period-2 orbit, phase averaged
        let b = Process::block_iid(default_alphabet(2), 2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let d = b.local_statistics(&Window::from_ints(&[0, 1]).unwrap()).unwrap();
        assert_eq!(d.probs(), &[0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn guard_and_group_errors() {
        let x = Process::bernoulli_z(&[0.5, 0.5]).unwrap();
        assert!(x.local_statistics(&Window::interval(0, 30).unwrap()).unwrap_err().is_guard());
        let z2 = GroupSpec::integer_lattice(2).unwrap();
        let w = Window::ball(&z2, 0).unwrap();
        assert!(x.local_statistics(&w).is_err());
        let y = Process::bernoulli(z2.clone(), default_alphabet(2), vec![0.5, 0.5]).unwrap();
        assert_eq!(y.local_statistics(&w).unwrap().len(), 2);
    }

    #[test]
    fn sampler_point_mass_and_determinism() {
        let x = Process::bernoulli_z(&[0.0, 1.0]).unwrap();
        let w = Window::interval(0, 4).unwrap();
        for seed in 0..20 {
            assert_eq!(x.sample_pattern(&w, seed).unwrap(), vec![1; 5]);
        }
        let y = Process::symmetric_markov(0.3).unwrap();
        assert_eq!(y.sample_pattern(&w, 9).unwrap(), y.sample_pattern(&w, 9).unwrap());
    }

    #[test]
    fn fair_coin_frequency() {
        let x = Process::bernoulli_z(&[0.5, 0.5]).unwrap();
        let w = Window::from_ints(&[0]).unwrap();
        let samples = x.sample_patterns(&w, 100_000, 42).unwrap();
        let ones = samples.iter().filter(|s| s[0] == 1).count() as f64 / 1e5;
        assert!((ones - 0.5).abs() < 0.0047, "{ones}");
    }

    #[test]
    fn projection_and_csv() {
        let x = Process::symmetric_markov(0.25).unwrap();
        let big = x.local_statistics(&Window::from_ints(&[0, 1, 2]).unwrap()).unwrap();
        let small = Window::from_ints(&[0, 2]).unwrap();
        let p = big.project(&small).unwrap();
        let q = x.local_statistics(&small).unwrap();
        for (a, b) in p.probs().iter().zip(q.probs()) {
            assert!(close(*a, *b));
        }
        assert!(big.to_csv().starts_with("pattern,probability\n0|0|0,"));
    }
}
