//! Shannon entropy, total variation, and empirical window laws of microstates.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::group::Window;
use crate::process::{PatternDist, Process};
use crate::rational::{decimal_rational, to_f64};
use crate::sofic::SoficMap;

/// A function `ψ: [m] → A`, stored as symbol indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Microstate(Vec<usize>);

impl Microstate {
    pub fn new(psi: Vec<usize>, alphabet_size: usize) -> Result<Self> {
        if let Some(bad) = psi.iter().find(|&&a| a >= alphabet_size) {
            return Err(Error::invalid("psi", format!("symbol index {bad} out of range")));
        }
        Ok(Microstate(psi))
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `H(p) = -Σ p log p` in nats, with `0 log 0 = 0`.
pub fn shannon(probs: &[f64]) -> Result<f64> {
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::invalid("probs", format!("negative or non-finite mass {p}")));
    }
    // Neumaier summation: large supports of tiny equal masses are common here
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &p in probs {
        if p == 0.0 {
            continue;
        }
        let term = -p * p.ln();
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    Ok((sum + comp).max(0.0))
}

/// Entropy of a pattern distribution.
pub fn shannon_dist(d: &PatternDist) -> f64 {
    shannon(d.probs()).expect("pattern distributions are nonnegative")
}

/// `½ Σ |d1 - d2|` over all patterns.
pub fn tv_distance(d1: &PatternDist, d2: &PatternDist) -> Result<f64> {
    if d1.window() != d2.window() || d1.alphabet() != d2.alphabet() {
        return Err(Error::invalid("window", "distributions live on different pattern spaces"));
    }
    Ok(0.5 * d1.probs().iter().zip(d2.probs()).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// The exact empirical law of `p ↦ (w ↦ ψ(σ(w)p))` under uniform `p ∈ [m]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalDist {
    window: Window,
    alphabet_size: usize,
    m: u64,
    /// nonzero pattern counts; masses are `count / m`
    counts: BTreeMap<usize, u64>,
}

impl EmpiricalDist {
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    pub fn prob(&self, idx: usize) -> BigRational {
        let c = self.counts.get(&idx).copied().unwrap_or(0);
        BigRational::new(BigInt::from(c), BigInt::from(self.m))
    }

    pub fn to_pattern_dist(&self, alphabet: &[String]) -> Result<PatternDist> {
        if alphabet.len() != self.alphabet_size {
            return Err(Error::invalid("alphabet", "alphabet size differs"));
        }
        let cells = alphabet.len().pow(self.window.len() as u32);
        let mut probs = vec![0.0; cells];
        for (&idx, &c) in &self.counts {
            probs[idx] = c as f64 / self.m as f64;
        }
        PatternDist::new(self.window.clone(), alphabet.to_vec(), probs)
    }
}

/// Precomputed `σ(w)` for a window; turns a microstate into pattern indices.
#[derive(Clone, Debug)]
pub struct PatternReader {
    perms: Vec<Vec<u32>>,
    k: usize,
    m: usize,
}

impl PatternReader {
    pub fn new(sigma: &SoficMap, w: &Window, alphabet_size: usize) -> Result<Self> {
        let perms = sigma
            .window_perms(w)?
            .into_iter()
            .map(|p| p.images().to_vec())
            .collect();
        Ok(PatternReader {
            perms,
            k: alphabet_size,
            m: sigma.m(),
        })
    }

    pub fn cells(&self) -> usize {
        self.k.pow(self.perms.len() as u32)
    }

    #[inline]
    pub fn pattern_at<T: Copy + Into<usize>>(&self, psi: &[T], p: usize) -> usize {
        self.perms
            .iter()
            .fold(0usize, |acc, perm| acc * self.k + psi[perm[p] as usize].into())
    }

    /// Nonzero `(pattern, count)` cells, using `buf` (length [`cells`](Self::cells))
    /// as scratch when given.
    pub fn counts<T: Copy + Into<usize>>(&self, psi: &[T], buf: Option<&mut Vec<u64>>) -> Vec<(usize, u64)> {
        match buf {
            Some(buf) => {
                let mut touched = Vec::with_capacity(self.m);
                for p in 0..self.m {
                    let idx = self.pattern_at(psi, p);
                    if buf[idx] == 0 {
                        touched.push(idx);
                    }
                    buf[idx] += 1;
                }
                touched.sort_unstable();
                touched
                    .into_iter()
                    .map(|idx| (idx, std::mem::take(&mut buf[idx])))
                    .collect()
            }
            None => {
                let mut idxs: Vec<usize> = (0..self.m).map(|p| self.pattern_at(psi, p)).collect();
                idxs.sort_unstable();
                let mut out: Vec<(usize, u64)> = Vec::new();
                for idx in idxs {
                    match out.last_mut() {
                        Some((j, c)) if *j == idx => *c += 1,
                        _ => out.push((idx, 1)),
                    }
                }
                out
            }
        }
    }

    /// A scratch buffer when the pattern space is small enough to index densely.
    pub fn scratch(&self) -> Option<Vec<u64>> {
        let cells = (self.k as f64).powi(self.perms.len() as i32);
        (cells <= 1e6).then(|| vec![0u64; cells as usize])
    }
}

pub fn empirical_pushforward(sigma: &SoficMap, psi: &Microstate, w: &Window, alphabet_size: usize) -> Result<EmpiricalDist> {
    if psi.len() != sigma.m() {
        return Err(Error::invalid("psi", format!("length {} differs from m = {}", psi.len(), sigma.m())));
    }
    if psi.values().iter().any(|&a| a >= alphabet_size) {
        return Err(Error::invalid("psi", "symbol index out of range"));
    }
    let reader = PatternReader::new(sigma, w, alphabet_size)?;
    let counts = reader.counts(psi.values(), None).into_iter().collect();
    Ok(EmpiricalDist {
        window: w.clone(),
        alphabet_size,
        m: sigma.m() as u64,
        counts,
    })
}

/// Exact test of `TV(target, empirical) < ε` for empirical laws with
/// denominator `m`.
///
/// Target masses and ε enter as their decimal rationals. With common
/// denominator `L`, target masses `a_x / L` and `ε = e_n / e_d`,
/// `TV < ε  ⇔  e_d · Σ_x |c_x L − m a_x| < 2 m L e_n`. Cells with `c_x = 0`
/// contribute `m a_x` each, so only nonzero counts are visited.
#[derive(Clone, Debug)]
pub struct TvThreshold {
    arith: Arith,
    eps: f64,
}

#[derive(Clone, Debug)]
enum Arith {
    Small {
        a: Vec<i128>,
        l: i128,
        a_tot: i128,
        e_num: i128,
        e_den: i128,
    },
    Big {
        a: Vec<BigInt>,
        l: BigInt,
        a_tot: BigInt,
        e_num: BigInt,
        e_den: BigInt,
    },
}

impl TvThreshold {
    /// `m_max` bounds the denominators that will be tested.
    pub fn new(target: &PatternDist, eps: f64, m_max: u64) -> Result<Self> {
        if eps.is_nan() || eps < 0.0 {
            return Err(Error::invalid("eps", "eps must be nonnegative"));
        }
        let rats = target
            .probs()
            .iter()
            .map(|&p| decimal_rational(p))
            .collect::<Result<Vec<_>>>()?;
        let l = rats.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let a: Vec<BigInt> = rats.iter().map(|r| r.numer() * (&l / r.denom())).collect();
        let a_tot: BigInt = a.iter().sum();
        let e = decimal_rational(eps)?;
        let (e_num, e_den) = (e.numer().clone(), e.denom().clone());

        // both sides of the comparison stay below 2^120 ⇒ i128 is safe
        let m = BigInt::from(m_max.max(1));
        let lhs_bound = &e_den * (&m * (&l + &a_tot) + &a_tot) * 2;
        let rhs_bound = &m * &l * &e_num * 2;
        let limit = BigInt::one() << 120;
        let arith = if lhs_bound < limit && rhs_bound < limit {
            Arith::Small {
                a: a.iter().map(|x| x.to_i128().unwrap()).collect(),
                l: l.to_i128().unwrap(),
                a_tot: a_tot.to_i128().unwrap(),
                e_num: e_num.to_i128().unwrap(),
                e_den: e_den.to_i128().unwrap(),
            }
        } else {
            Arith::Big {
                a,
                l,
                a_tot,
                e_num,
                e_den,
            }
        };
        Ok(TvThreshold { arith, eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Strict `TV < ε` for nonzero `(pattern, count)` cells summing to `m`.
    pub fn is_good(&self, m: u64, cells: &[(usize, u64)]) -> bool {
        match &self.arith {
            Arith::Small {
                a,
                l,
                a_tot,
                e_num,
                e_den,
            } => {
                let m = m as i128;
                let mut s = 0i128;
                let mut seen = 0i128;
                for &(idx, c) in cells {
                    s += (c as i128 * l - m * a[idx]).abs();
                    seen += a[idx];
                }
                s += m * (a_tot - seen);
                e_den * s < 2 * m * l * e_num
            }
            Arith::Big { e_num, e_den, l, .. } => {
                let s = self.big_sum(m, cells);
                e_den * s < BigInt::from(2 * m) * l * e_num
            }
        }
    }

    fn big_sum(&self, m: u64, cells: &[(usize, u64)]) -> BigInt {
        let (a, l, a_tot): (Vec<BigInt>, BigInt, BigInt) = match &self.arith {
            Arith::Small { a, l, a_tot, .. } => (
                a.iter().map(|&x| BigInt::from(x)).collect(),
                BigInt::from(*l),
                BigInt::from(*a_tot),
            ),
            Arith::Big { a, l, a_tot, .. } => (a.clone(), l.clone(), a_tot.clone()),
        };
        let m = BigInt::from(m);
        let mut s = BigInt::zero();
        let mut seen = BigInt::zero();
        for &(idx, c) in cells {
            s += (BigInt::from(c) * &l - &m * &a[idx]).abs();
            seen += &a[idx];
        }
        s + &m * (a_tot - seen)
    }

    /// The exact total variation distance.
    pub fn tv(&self, m: u64, cells: &[(usize, u64)]) -> BigRational {
        let l = match &self.arith {
            Arith::Small { l, .. } => BigInt::from(*l),
            Arith::Big { l, .. } => l.clone(),
        };
        BigRational::new(self.big_sum(m, cells), BigInt::from(2 * m) * l)
    }
}

/// `d_W((σ, ψ), φ)` as an exact rational in the decimal reading of the
/// target masses.
pub fn d_w_exact(sigma: &SoficMap, psi: &Microstate, proc: &Process, w: &Window) -> Result<BigRational> {
    if sigma.group() != proc.group() {
        return Err(Error::GroupMismatch("sofic map and process act on different groups".into()));
    }
    let target = proc.local_statistics(w)?;
    let emp = empirical_pushforward(sigma, psi, w, proc.alphabet().len())?;
    let cells: Vec<(usize, u64)> = emp.counts.iter().map(|(&i, &c)| (i, c)).collect();
    Ok(TvThreshold::new(&target, 0.0, emp.m)?.tv(emp.m, &cells))
}

/// `d_W((σ, ψ), φ)`, the total variation between the process's window law and
/// the empirical window law of `ψ` along `σ`.
pub fn d_w(sigma: &SoficMap, psi: &Microstate, proc: &Process, w: &Window) -> Result<f64> {
    Ok(to_f64(&d_w_exact(sigma, psi, proc, w)?))
}

/// `d_W < ε` decided exactly.
pub fn is_good_microstate(sigma: &SoficMap, psi: &Microstate, proc: &Process, w: &Window, eps: f64) -> Result<bool> {
    let e = decimal_rational(eps)?;
    Ok(d_w_exact(sigma, psi, proc, w)? < e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::default_alphabet;
    use crate::sofic::cyclic_approximation;

    #[test]
    fn shannon_examples() {
        assert!((shannon(&[0.25; 4]).unwrap() - 4f64.ln()).abs() < 1e-15);
        assert_eq!(shannon(&[1.0, 0.0]).unwrap(), 0.0);
        let h = shannon(&[0.3, 0.7]).unwrap();
        assert!((h - 0.610864).abs() < 5e-7);
        assert!(shannon(&[-0.1, 1.1]).is_err());
    }

    #[test]
    fn tv_examples() {
        let w = Window::from_ints(&[0, 1]).unwrap();
        let a = default_alphabet(2);
        let u = PatternDist::new(w.clone(), a.clone(), vec![0.25; 4]).unwrap();
        let h = PatternDist::new(w.clone(), a.clone(), vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(tv_distance(&u, &u).unwrap(), 0.0);
        assert_eq!(tv_distance(&u, &h).unwrap(), 0.5);
        let p = PatternDist::point_mass(w.clone(), a.clone(), &[0, 0]).unwrap();
        let q = PatternDist::point_mass(w.clone(), a.clone(), &[1, 1]).unwrap();
        assert_eq!(tv_distance(&p, &q).unwrap(), 1.0);
        let other = PatternDist::new(Window::from_ints(&[0]).unwrap(), a, vec![0.5, 0.5]).unwrap();
        assert!(tv_distance(&u, &other).is_err());
    }

    #[test]
    fn empirical_examples() {
        let s = cyclic_approximation(4).unwrap();
        let psi = Microstate::new(vec![0, 1, 0, 1], 2).unwrap();
        let w = Window::from_ints(&[0, 1]).unwrap();
        let e = empirical_pushforward(&s, &psi, &w, 2).unwrap();
        assert_eq!(e.counts(), &BTreeMap::from([(1, 2), (2, 2)]));
        assert_eq!(e.prob(1), BigRational::new(1.into(), 2.into()));

        let c = Microstate::new(vec![1; 4], 2).unwrap();
        let e = empirical_pushforward(&s, &c, &w, 2).unwrap();
        assert_eq!(e.counts(), &BTreeMap::from([(3, 4)]));

        let id = Window::from_ints(&[0]).unwrap();
        let e = empirical_pushforward(&s, &psi, &id, 2).unwrap();
        assert_eq!(e.counts(), &BTreeMap::from([(0, 2), (1, 2)]));

        let short = Microstate::new(vec![0; 3], 2).unwrap();
        assert!(empirical_pushforward(&s, &short, &w, 2).is_err());
    }

    #[test]
    fn d_w_examples() {
        let s = cyclic_approximation(4).unwrap();
        let psi = Microstate::new(vec![0, 1, 0, 1], 2).unwrap();
        let x = Process::bernoulli_z(&[0.5, 0.5]).unwrap();
        assert_eq!(d_w(&s, &psi, &x, &Window::from_ints(&[0, 1]).unwrap()).unwrap(), 0.5);
        assert_eq!(d_w(&s, &psi, &x, &Window::from_ints(&[0]).unwrap()).unwrap(), 0.0);

        let point = Process::bernoulli_z(&[0.0, 1.0]).unwrap();
        let ones = Microstate::new(vec![1; 4], 2).unwrap();
        assert_eq!(d_w(&s, &ones, &point, &Window::from_ints(&[0, 1, 2]).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn threshold_is_strict_at_decimal_ties() {
        // |8/20 - 1/2| = 1/10 exactly; must not count as < 0.1
        let target = Process::bernoulli_z(&[0.5, 0.5])
            .unwrap()
            .local_statistics(&Window::from_ints(&[0]).unwrap())
            .unwrap();
        let t = TvThreshold::new(&target, 0.1, 20).unwrap();
        assert!(!t.is_good(20, &[(0, 12), (1, 8)]));
        assert!(t.is_good(20, &[(0, 11), (1, 9)]));
        assert_eq!(t.tv(20, &[(0, 12), (1, 8)]), BigRational::new(1.into(), 10.into()));
    }

    #[test]
    fn big_arithmetic_path_agrees() {
        let w = Window::from_ints(&[0]).unwrap();
        let target = PatternDist::new(w, default_alphabet(2), vec![1e-40, 1.0]).unwrap();
        let t = TvThreshold::new(&target, 0.3, 10).unwrap();
        assert!(matches!(t.arith, Arith::Big { .. }));
        assert!(t.is_good(10, &[(1, 10)]));
        assert!(t.is_good(10, &[(0, 3), (1, 7)]));
        assert!(!t.is_good(10, &[(0, 4), (1, 6)]));
    }
}
