//! Counting and entropy results checked against independent oracles.

mod common;

use std::collections::{BTreeMap, HashSet};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use sofic_core::entropy::{
    count_microstates_exact, count_microstates_with, estimate_microstates_mc, relative_entropy,
    upper_sofic_block_entropy, BlockMeasure, CountMethod, CountMode,
};
use sofic_core::group::{folner_box, invariance_ratios, GroupElement, GroupSpec, Window};
use sofic_core::process::{default_alphabet, Process};
use sofic_core::sofic::{cyclic_approximation, folner_partial_action, torus_approximation};

use common::{binomial, brute_force_pairs, brute_force_single_site, dec};

fn ints(xs: &[i64]) -> Window {
    Window::from_ints(xs).unwrap()
}

/// Shortest decimal form of a float as an exact rational, the reading the
/// library gives to probabilities.
fn exact(x: f64) -> BigRational {
    let s = format!("{x}");
    if s.contains('e') {
        panic!("oracle inputs must print without exponent: {s}");
    }
    dec(&s)
}

#[test]
fn single_site_shortcut_matches_brute_force() {
    let cases: [(&[&str], usize); 4] = [
        (&["0.5", "0.5"], 16),
        (&["0.3", "0.7"], 16),
        (&["0.2", "0.3", "0.5"], 10),
        (&["0.1", "0.1", "0.8"], 10),
    ];
    for (omega, m_max) in cases {
        let probs: Vec<f64> = omega.iter().map(|s| s.parse().unwrap()).collect();
        let target: Vec<BigRational> = omega.iter().map(|s| dec(s)).collect();
        let p = Process::bernoulli_z(&probs).unwrap();
        for m in 1..=m_max {
            let sigma = cyclic_approximation(m).unwrap();
            for eps in ["0.05", "0.1", "0.25", "0.3", "0.5"] {
                let got = count_microstates_with(&sigma, &p, &ints(&[0]), eps.parse().unwrap(), CountMethod::Frequency)
                    .unwrap();
                let want = brute_force_single_site(m, &target, &dec(eps));
                assert_eq!(got.count, BigUint::from(want), "omega {omega:?} m={m} eps={eps}");
            }
        }
    }
}

#[test]
fn markov_pair_law_is_stationary_times_transition() {
    let p = 0.3;
    let proc = Process::symmetric_markov(p).unwrap();
    let law = proc.local_statistics(&ints(&[0, 1])).unwrap();
    let t = [[1.0 - p, p], [p, 1.0 - p]];
    for a in 0..2 {
        for b in 0..2 {
            assert_eq!(law.probs()[a * 2 + b], 0.5 * t[a][b]);
        }
    }
    assert_eq!(law.probs(), &[0.35, 0.15, 0.15, 0.35]);
}

#[test]
fn pair_transfer_matches_brute_force() {
    let procs = [
        Process::bernoulli_z(&[0.5, 0.5]).unwrap(),
        Process::bernoulli_z(&[0.3, 0.7]).unwrap(),
        Process::symmetric_markov(0.3).unwrap(),
        Process::symmetric_markov(0.1).unwrap(),
    ];
    let w = ints(&[0, 1]);
    for proc in &procs {
        let target: Vec<BigRational> = proc.local_statistics(&w).unwrap().probs().iter().map(|&x| exact(x)).collect();
        for m in 2..=14 {
            let sigma = cyclic_approximation(m).unwrap();
            for eps in ["0.05", "0.1", "0.2", "0.3"] {
                let got = count_microstates_with(&sigma, proc, &w, eps.parse().unwrap(), CountMethod::CyclicTransfer)
                    .unwrap();
                let want = brute_force_pairs(m, 2, &target, &dec(eps));
                assert_eq!(got.count, BigUint::from(want), "{:?} m={m} eps={eps}", proc.kind());
            }
        }
    }
}

#[test]
fn fair_coin_counts_are_central_binomial_sums() {
    let p = Process::bernoulli_z(&[0.5, 0.5]).unwrap();
    for m in 1..=64usize {
        for (eps, pct) in [(0.1, 10u64), (0.05, 5)] {
            // |k/m − 1/2| < pct/100  ⇔  100·|2k − m| < 2·pct·m
            let inside = |k: u64| 100 * (2 * k as i64 - m as i64).unsigned_abs() < 2 * pct * m as u64;
            let want: BigUint = (0..=m as u64).filter(|&k| inside(k)).map(|k| binomial(m as u64, k)).sum();
            let got = count_microstates_exact(&cyclic_approximation(m).unwrap(), &p, &ints(&[0]), eps).unwrap();
            assert_eq!(got.count, want, "m={m} eps={eps}");
        }
    }
}

#[test]
fn point_mass_counts_are_binomial_tails() {
    for k in 2..=4usize {
        let mut omega = vec![0.0; k];
        omega[0] = 1.0;
        let p = Process::bernoulli_z(&omega).unwrap();
        let mut rates = Vec::new();
        for m in [5usize, 10, 20, 40, 80, 160] {
            // k/m < 1/20  ⇔  20k < m
            let want: BigUint = (0..=m as u64)
                .filter(|&j| 20 * j < m as u64)
                .map(|j| binomial(m as u64, j) * BigUint::from(k - 1).pow(j as u32))
                .sum();
            let got = count_microstates_exact(&cyclic_approximation(m).unwrap(), &p, &ints(&[0]), 0.05).unwrap();
            assert_eq!(got.count, want, "|A|={k} m={m}");
            rates.push(got.log_rate);
        }
        assert_eq!(rates[0], 0.0);
        assert!(rates.last().unwrap() < &0.25, "{rates:?}");
    }
}

#[test]
fn eps_above_one_admits_everything() {
    let p = Process::symmetric_markov(0.3).unwrap();
    for m in 2..=12 {
        for w in [ints(&[0]), ints(&[0, 1]), ints(&[0, 2])] {
            let c = count_microstates_exact(&cyclic_approximation(m).unwrap(), &p, &w, 1.5).unwrap();
            assert_eq!(c.count, BigUint::from(2u32).pow(m as u32));
            assert_eq!(c.count, c.total);
            assert!((c.log_rate - 2f64.ln()).abs() < 1e-12);
        }
    }
}

#[test]
fn monte_carlo_within_three_sigma_of_exact_fraction() {
    let p = Process::bernoulli_z(&[0.5, 0.5]).unwrap();
    let sigma = cyclic_approximation(20).unwrap();
    let exact = 520_676.0 / (1u64 << 20) as f64;
    let n = 100_000u64;
    let three_sigma = 3.0 * (exact * (1.0 - exact) / n as f64).sqrt();
    assert!((three_sigma - 0.0047).abs() < 1e-4);
    for seed in [1u64, 7, 42] {
        let c = estimate_microstates_mc(&sigma, &p, &ints(&[0]), 0.1, n, seed).unwrap();
        let CountMode::MonteCarlo { hits, samples, .. } = c.mode else {
            panic!("expected a Monte Carlo count");
        };
        assert_eq!(samples, n);
        let frac = hits as f64 / n as f64;
        assert!((frac - exact).abs() <= three_sigma, "seed {seed}: {frac}");
    }
}

#[test]
#[allow(clippy::approx_constant)]
fn merging_two_symbols_leaves_relative_entropy() {
    let p = Process::bernoulli_z(&[0.5, 0.25, 0.25]).unwrap();
    let beta: BTreeMap<String, String> = [("0", "0"), ("1", "1"), ("2", "1")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    let r = relative_entropy(&p, &beta, 6).unwrap();
    let h_x = -(0.5 * 0.5f64.ln() + 2.0 * 0.25 * 0.25f64.ln());
    let h_y = 2f64.ln();
    assert!((h_x - 1.039721).abs() < 5e-7 && (h_y - 0.693147).abs() < 5e-7);
    let want = h_x - h_y;
    assert!((want - 0.346574).abs() < 5e-7);
    assert!((r.exact.unwrap() - want).abs() < 1e-12);
    for v in r.table.values() {
        assert!((v - want).abs() < 1e-12);
    }
}

#[test]
fn lattice_invariance_ratios_match_set_enumeration() {
    let g = GroupSpec::integer_lattice(2).unwrap();
    let ks: [&[(i64, i64)]; 4] = [
        &[(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)],
        &[(1, 1)],
        &[(0, 0), (2, -1)],
        &[(3, 0), (0, 3), (-3, -3)],
    ];
    for n in 1..=6 {
        let f = folner_box(&g, n).unwrap();
        let f_set: HashSet<(i64, i64)> = (1..=n as i64).flat_map(|a| (1..=n as i64).map(move |b| (a, b))).collect();
        for k in ks {
            let kf: HashSet<(i64, i64)> = k.iter().flat_map(|&(x, y)| f_set.iter().map(move |&(a, b)| (a + x, b + y))).collect();
            let inter = kf.intersection(&f_set).count();
            let symdiff = kf.symmetric_difference(&f_set).count();
            let elems: Vec<GroupElement> = k.iter().map(|&(x, y)| GroupElement::Lattice(vec![x, y])).collect();
            let (i, s) = invariance_ratios(&g, &f, &elems).unwrap();
            let size = BigInt::from(n * n);
            assert_eq!(i, BigRational::new(BigInt::from(inter), size.clone()));
            assert_eq!(s, BigRational::new(BigInt::from(symdiff), size));
        }
    }
}

#[test]
fn folner_interval_wraps_last_point_to_first() {
    let z = GroupSpec::integer_line();
    let sigma = folner_partial_action(&z, &folner_box(&z, 5).unwrap()).unwrap();
    let images = sigma.eval(&GroupElement::Int(1)).unwrap().to_one_based();
    assert_eq!(images, vec![2, 3, 4, 5, 1]);
}

#[test]
fn torus_generator_is_two_transpositions() {
    let g = GroupSpec::integer_lattice(2).unwrap();
    let sigma = torus_approximation(&g, &[2, 2]).unwrap();
    let s = sigma.eval(&GroupElement::Lattice(vec![1, 0])).unwrap();
    assert_eq!(s.cycle_type(), vec![2, 2]);
}

#[test]
fn product_block_measure_has_product_entropy() {
    for omega in [vec![0.5f64, 0.5], vec![0.3, 0.7], vec![0.2, 0.3, 0.5]] {
        let k = omega.len();
        let h: f64 = omega.iter().map(|&p| -p * p.ln()).sum();
        for m in 1..=if k == 2 { 10 } else { 6 } {
            let probs: Vec<f64> = (0..k.pow(m as u32))
                .map(|mut idx| {
                    let mut p = 1.0;
                    for _ in 0..m {
                        p *= omega[idx % k];
                        idx /= k;
                    }
                    p
                })
                .collect();
            let direct: f64 = probs.iter().map(|&p| -p * p.ln()).sum::<f64>() / m as f64;
            let nu = BlockMeasure::new(default_alphabet(k), m, probs).unwrap();
            let got = upper_sofic_block_entropy(&[(1.0, nu)]).unwrap();
            assert!((got - h).abs() < 1e-12 && (got - direct).abs() < 1e-12, "omega {omega:?} m={m}");
        }
    }
}

#[test]
fn decimal_oracle_reads_literals_exactly() {
    assert_eq!(dec("0.05"), BigRational::new(BigInt::from(1), BigInt::from(20)));
    assert_eq!(dec("1"), BigRational::one());
    assert!(exact(0.0).is_zero());
}
