//! Finite permutation models `σ: G → Sym(m)`.
//!
//! Points are stored 0-based internally (`0..m`); the JSON form and the
//! human-facing examples use `1..=m`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{FolnerSet, GroupElement, GroupKind, GroupSpec, Window};
use crate::rational::{decimal_rational, ratio};

/// A permutation of `0..m` in array form: `p ↦ images[p]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Perm(Vec<u32>);

impl Perm {
    pub fn identity(m: usize) -> Self {
        Perm((0..m as u32).collect())
    }

    /// Validates that `images` is a bijection of `0..images.len()`.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &x in &images {
            if x >= m || seen[x] {
                return Err(Error::invalid("perm", "array is not a bijection"));
            }
            seen[x] = true;
        }
        Ok(Perm(images.into_iter().map(|x| x as u32).collect()))
    }

    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::invalid("perm", "1-based permutation contains 0"));
        }
        Perm::from_images(images.iter().map(|x| x - 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn apply(&self, p: usize) -> usize {
        self.0[p] as usize
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&x| x as usize + 1).collect()
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.len(), other.len());
        Perm(other.0.iter().map(|&q| self.0[q as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.len()];
        for (p, &q) in self.0.iter().enumerate() {
            inv[q as usize] = p as u32;
        }
        Perm(inv)
    }

    pub fn pow(&self, mut k: u64) -> Perm {
        let mut base = self.clone();
        let mut acc = Perm::identity(self.len());
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            k >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(p, &q)| p == q as usize)
    }

    /// Sorted cycle lengths.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut lens = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                p = self.apply(p);
                len += 1;
            }
            lens.push(len);
        }
        lens.sort_unstable();
        lens
    }
}

/// One block of a homomorphic sofic map: a genuine action on a contiguous
/// range of points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomAction {
    /// ℤᵈ acting by translation on `ℤ/dims[0] × ⋯ × ℤ/dims[d-1]`, points in
    /// row-major order. ℤ acting on `ℤ/m` is `dims = [m]`.
    Torus { dims: Vec<usize> },
    /// A finite group acting on itself by left multiplication.
    Regular,
}

impl HomAction {
    fn size(&self, group: &GroupSpec) -> usize {
        match self {
            HomAction::Torus { dims } => dims.iter().product(),
            HomAction::Regular => group.order().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomBlock {
    pub offset: usize,
    pub action: HomAction,
}

/// How `σ(g)` is evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalMode {
    /// Exact group arithmetic on each block, so `σ(gh) = σ(g)σ(h)`.
    Homomorphic(Vec<HomBlock>),
    /// Product of generator permutations along the canonical word of `g`.
    WordProduct,
    /// A user-supplied table for finitely many elements.
    Explicit(Vec<(GroupElement, Perm)>),
}

impl EvalMode {
    pub fn name(&self) -> &'static str {
        match self {
            EvalMode::Homomorphic(_) => "homomorphic",
            EvalMode::WordProduct => "word_product",
            EvalMode::Explicit(_) => "explicit",
        }
    }
}

/// A map `σ: G → Sym(m)`, not necessarily a homomorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoficMap {
    m: usize,
    group: GroupSpec,
    // aligned with group.generators()
    gen_perms: Vec<Perm>,
    mode: EvalMode,
}

impl SoficMap {
    /// A word-product map from one permutation per generator.
    pub fn from_generators(group: GroupSpec, gen_perms: Vec<Perm>) -> Result<Self> {
        if gen_perms.len() != group.generators().len() {
            return Err(Error::invalid(
                "generators",
                format!("expected {} permutations, got {}", group.generators().len(), gen_perms.len()),
            ));
        }
        let m = gen_perms.first().map(Perm::len).unwrap_or(1);
        if m == 0 || gen_perms.iter().any(|p| p.len() != m) {
            return Err(Error::invalid("generators", "permutations must share a positive size"));
        }
        Ok(SoficMap {
            m,
            group,
            gen_perms,
            mode: EvalMode::WordProduct,
        })
    }

    /// A map defined only on the listed elements.
    pub fn explicit(group: GroupSpec, table: Vec<(GroupElement, Perm)>) -> Result<Self> {
        let m = table
            .first()
            .map(|(_, p)| p.len())
            .ok_or_else(|| Error::invalid("table", "explicit table is empty"))?;
        if m == 0 || table.iter().any(|(_, p)| p.len() != m) {
            return Err(Error::invalid("table", "permutations must share a positive size"));
        }
        let mut seen = BTreeSet::new();
        for (g, _) in &table {
            group.check(g)?;
            if !seen.insert(g.clone()) {
                return Err(Error::invalid("table", format!("element {g} listed twice")));
            }
        }
        let gen_perms = group
            .generators()
            .iter()
            .map(|s| {
                table
                    .iter()
                    .find(|(g, _)| g == s)
                    .map(|(_, p)| p.clone())
                    .unwrap_or_else(|| Perm::identity(m))
            })
            .collect();
        Ok(SoficMap {
            m,
            group,
            gen_perms,
            mode: EvalMode::Explicit(table),
        })
    }

    /// A homomorphic map assembled from translation blocks laid out in order.
    pub fn homomorphic(group: GroupSpec, actions: Vec<HomAction>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::invalid("blocks", "no blocks"));
        }
        let mut blocks = Vec::with_capacity(actions.len());
        let mut offset = 0;
        for action in actions {
            match (&action, group.kind()) {
                (HomAction::Torus { dims }, GroupKind::IntegerLine) if dims.len() == 1 => {}
                (HomAction::Torus { dims }, GroupKind::IntegerLattice { dim }) if dims.len() == *dim => {}
                (HomAction::Regular, GroupKind::FiniteCayley { .. }) => {}
                _ => {
                    return Err(Error::invalid(
                        "dims",
                        format!("block {action:?} does not fit {}", group.name()),
                    ))
                }
            }
            if let HomAction::Torus { dims } = &action {
                if dims.contains(&0) {
                    return Err(Error::invalid("dims", "torus side lengths must be positive"));
                }
            }
            let size = action.size(&group);
            blocks.push(HomBlock { offset, action });
            offset += size;
        }
        let m = offset;
        let mut sigma = SoficMap {
            m,
            group,
            gen_perms: Vec::new(),
            mode: EvalMode::Homomorphic(blocks),
        };
        sigma.gen_perms = sigma
            .group
            .generators()
            .iter()
            .map(|s| sigma.eval(s))
            .collect::<Result<_>>()?;
        Ok(sigma)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn mode(&self) -> &EvalMode {
        &self.mode
    }

    pub fn generator_perms(&self) -> &[Perm] {
        &self.gen_perms
    }

    /// A short label for reports, e.g. `cyclic(20)` or `word_product(10)`.
    pub fn describe(&self) -> String {
        match &self.mode {
            EvalMode::Homomorphic(blocks) if blocks.len() == 1 => match &blocks[0].action {
                HomAction::Torus { dims } if dims.len() == 1 => format!("cyclic({})", dims[0]),
                HomAction::Torus { dims } => {
                    let d: Vec<String> = dims.iter().map(|x| x.to_string()).collect();
                    format!("torus({})", d.join("x"))
                }
                HomAction::Regular => format!("regular({})", self.m),
            },
            mode => format!("{}({})", mode.name(), self.m),
        }
    }

    /// The single cyclic block modulus, when σ is `cyclic_approximation(m)`.
    pub fn cyclic_modulus(&self) -> Option<usize> {
        match (&self.mode, self.group.kind()) {
            (EvalMode::Homomorphic(blocks), GroupKind::IntegerLine) if blocks.len() == 1 => match &blocks[0].action {
                HomAction::Torus { dims } => Some(dims[0]),
                HomAction::Regular => None,
            },
            _ => None,
        }
    }

    /// `σ(g)` as a permutation of `0..m`.
    pub fn eval(&self, g: &GroupElement) -> Result<Perm> {
        self.group.check(g)?;
        match &self.mode {
            EvalMode::Homomorphic(blocks) => {
                let mut images = vec![0u32; self.m];
                for block in blocks {
                    let size = block.action.size(&self.group);
                    for q in 0..size {
                        let image = hom_apply(&self.group, &block.action, g, q);
                        images[block.offset + q] = (block.offset + image) as u32;
                    }
                }
                Ok(Perm(images))
            }
            EvalMode::WordProduct => {
                let word = self.group.canonical_word(g)?;
                // σ(s_1 ⋯ s_n) = σ(s_1) ∘ ⋯ ∘ σ(s_n); runs of one letter use powers
                let mut acc = Perm::identity(self.m);
                let mut i = 0;
                while i < word.len() {
                    let mut j = i;
                    while j < word.len() && word[j] == word[i] {
                        j += 1;
                    }
                    acc = acc.compose(&self.gen_perms[word[i]].pow((j - i) as u64));
                    i = j;
                }
                Ok(acc)
            }
            EvalMode::Explicit(table) => table
                .iter()
                .find(|(h, _)| h == g)
                .map(|(_, p)| p.clone())
                .ok_or_else(|| Error::UnknownElement(g.to_string())),
        }
    }

    /// `σ(w)` for each element of the window, in window order.
    pub fn window_perms(&self, w: &Window) -> Result<Vec<Perm>> {
        w.elements().iter().map(|g| self.eval(g)).collect()
    }
}

fn hom_apply(group: &GroupSpec, action: &HomAction, g: &GroupElement, q: usize) -> usize {
    match (action, g) {
        (HomAction::Torus { dims }, GroupElement::Int(a)) => {
            let m = dims[0] as i64;
            (q as i64 + a.rem_euclid(m)).rem_euclid(m) as usize
        }
        (HomAction::Torus { dims }, GroupElement::Lattice(v)) => {
            // row-major coordinates
            let mut rest = q;
            let mut coords = vec![0usize; dims.len()];
            for k in (0..dims.len()).rev() {
                coords[k] = rest % dims[k];
                rest /= dims[k];
            }
            let mut idx = 0usize;
            for k in 0..dims.len() {
                let d = dims[k] as i64;
                let c = (coords[k] as i64 + v[k].rem_euclid(d)).rem_euclid(d) as usize;
                idx = idx * dims[k] + c;
            }
            idx
        }
        (HomAction::Regular, GroupElement::Finite(_)) => {
            match group.mul(g, &GroupElement::Finite(q)).expect("checked element") {
                GroupElement::Finite(i) => i,
                _ => unreachable!(),
            }
        }
        _ => unreachable!("block/element shapes validated at construction"),
    }
}

/// The homomorphism ℤ → Sym(m) with `σ(1)` the m-cycle `(1 2 … m)`.
pub fn cyclic_approximation(m: usize) -> Result<SoficMap> {
    if m == 0 {
        return Err(Error::invalid("m", "m must be positive"));
    }
    SoficMap::homomorphic(GroupSpec::integer_line(), vec![HomAction::Torus { dims: vec![m] }])
}

/// ℤᵈ acting by translation on the torus `Π ℤ/dims[k]`.
pub fn torus_approximation(group: &GroupSpec, dims: &[usize]) -> Result<SoficMap> {
    let d = match group.kind() {
        GroupKind::IntegerLine => 1,
        GroupKind::IntegerLattice { dim } => *dim,
        GroupKind::FiniteCayley { .. } => {
            return Err(Error::invalid("group", "torus approximations need Z or Z^d"));
        }
    };
    if dims.len() != d {
        return Err(Error::invalid("dims", format!("expected {d} side lengths, got {}", dims.len())));
    }
    SoficMap::homomorphic(group.clone(), vec![HomAction::Torus { dims: dims.to_vec() }])
}

/// A finite group acting on itself by left multiplication.
pub fn regular_approximation(group: &GroupSpec) -> Result<SoficMap> {
    if group.order().is_none() {
        return Err(Error::invalid("group", "regular action needs a finite group"));
    }
    SoficMap::homomorphic(group.clone(), vec![HomAction::Regular])
}

/// The partial translation action on a Følner set, completed to permutations.
///
/// Points are the elements of `f` in canonical order. For each generator `s`,
/// `σ(s)f = sf` whenever `sf ∈ F`; the remaining sources are matched to the
/// remaining targets in ascending order.
pub fn folner_partial_action(group: &GroupSpec, f: &FolnerSet) -> Result<SoficMap> {
    if matches!(group.kind(), GroupKind::FiniteCayley { .. }) {
        return Err(Error::invalid("group", "Følner partial actions need Z or Z^d"));
    }
    let m = f.len();
    let gen_perms = group
        .generators()
        .iter()
        .map(|s| {
            let mut images = vec![usize::MAX; m];
            let mut hit = vec![false; m];
            for (p, x) in f.elements().iter().enumerate() {
                if let Some(q) = f.position(&group.mul(s, x)?) {
                    images[p] = q;
                    hit[q] = true;
                }
            }
            let free_targets = (0..m).filter(|&q| !hit[q]);
            let free_sources: Vec<usize> = (0..m).filter(|&p| images[p] == usize::MAX).collect();
            for (p, q) in free_sources.into_iter().zip(free_targets) {
                images[p] = q;
            }
            Perm::from_images(images)
        })
        .collect::<Result<Vec<_>>>()?;
    SoficMap::from_generators(group.clone(), gen_perms)
}

/// `α·(σ_1, …, σ_n) = α_1σ_1 + ⋯ + α_nσ_n`: copies laid out on consecutive
/// blocks of points, in order.
pub fn block_sum(parts: &[SoficMap], multiplicities: &[usize]) -> Result<SoficMap> {
    if parts.is_empty() {
        return Err(Error::invalid("parts", "block sum of no maps"));
    }
    if parts.len() != multiplicities.len() {
        return Err(Error::invalid("multiplicities", "length differs from parts"));
    }
    if multiplicities.contains(&0) {
        return Err(Error::invalid("multiplicities", "multiplicities must be positive"));
    }
    let group = parts[0].group.clone();
    if parts.iter().any(|p| p.group != group) {
        return Err(Error::GroupMismatch("block sum parts act on different groups".into()));
    }
    let copies: Vec<&SoficMap> = parts
        .iter()
        .zip(multiplicities)
        .flat_map(|(p, &k)| std::iter::repeat_n(p, k))
        .collect();

    let sum_perms = |perms: &[Perm]| -> Perm {
        let mut images = Vec::with_capacity(perms.iter().map(Perm::len).sum());
        let mut offset = 0u32;
        for p in perms {
            images.extend(p.0.iter().map(|&x| x + offset));
            offset += p.len() as u32;
        }
        Perm(images)
    };

    if copies.iter().all(|s| matches!(s.mode, EvalMode::Homomorphic(_))) {
        let actions = copies
            .iter()
            .flat_map(|s| match &s.mode {
                EvalMode::Homomorphic(blocks) => blocks.iter().map(|b| b.action.clone()).collect::<Vec<_>>(),
                _ => unreachable!(),
            })
            .collect();
        return SoficMap::homomorphic(group, actions);
    }

    if copies.iter().any(|s| matches!(s.mode, EvalMode::Explicit(_))) {
        // defined exactly on the elements every explicit part defines
        let mut elems: Option<BTreeSet<GroupElement>> = None;
        for s in &copies {
            if let EvalMode::Explicit(t) = &s.mode {
                let here: BTreeSet<GroupElement> = t.iter().map(|(g, _)| g.clone()).collect();
                elems = Some(match elems {
                    None => here,
                    Some(prev) => prev.intersection(&here).cloned().collect(),
                });
            }
        }
        let table = elems
            .unwrap()
            .into_iter()
            .map(|g| {
                let perms = copies.iter().map(|s| s.eval(&g)).collect::<Result<Vec<_>>>()?;
                Ok((g, sum_perms(&perms)))
            })
            .collect::<Result<Vec<_>>>()?;
        return SoficMap::explicit(group, table);
    }

    let gen_perms = (0..group.generators().len())
        .map(|i| {
            let perms: Vec<Perm> = copies.iter().map(|s| s.gen_perms[i].clone()).collect();
            sum_perms(&perms)
        })
        .collect();
    SoficMap::from_generators(group, gen_perms)
}

/// Exact defect fractions per pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectStats {
    /// Fraction of points with `σ(g)σ(h)p ≠ σ(gh)p`.
    pub mult: BTreeMap<(GroupElement, GroupElement), BigRational>,
    /// Fraction of points with `σ(g)p = σ(h)p`, for `g ≠ h`.
    pub free: BTreeMap<(GroupElement, GroupElement), BigRational>,
}

pub fn defect_stats(
    sigma: &SoficMap,
    pairs: &[(GroupElement, GroupElement)],
    distinct: &[(GroupElement, GroupElement)],
) -> Result<DefectStats> {
    let group = &sigma.group;
    let m = sigma.m;
    let mut mult = BTreeMap::new();
    for (g, h) in pairs {
        let sg = sigma.eval(g)?;
        let sh = sigma.eval(h)?;
        let sgh = sigma.eval(&group.mul(g, h)?)?;
        let bad = (0..m)
            .into_par_iter()
            .filter(|&p| sg.apply(sh.apply(p)) != sgh.apply(p))
            .count();
        mult.insert((g.clone(), h.clone()), ratio(bad, m));
    }
    let mut free = BTreeMap::new();
    for (g, h) in distinct {
        if g == h {
            return Err(Error::invalid("distinct", format!("pair ({g}, {h}) is not distinct")));
        }
        let sg = sigma.eval(g)?;
        let sh = sigma.eval(h)?;
        let same = (0..m).into_par_iter().filter(|&p| sg.apply(p) == sh.apply(p)).count();
        free.insert((g.clone(), h.clone()), ratio(same, m));
    }
    Ok(DefectStats { mult, free })
}

/// A finitely supported distribution over sofic maps of a common size.
#[derive(Clone, Debug)]
pub struct RandomSoficApprox {
    atoms: Vec<(SoficMap, f64)>,
}

impl RandomSoficApprox {
    pub fn new(atoms: Vec<(SoficMap, f64)>) -> Result<Self> {
        let first = atoms
            .first()
            .ok_or_else(|| Error::invalid("atoms", "no atoms"))?;
        let (m, group) = (first.0.m, first.0.group.clone());
        for (s, w) in &atoms {
            if s.m != m {
                return Err(Error::invalid("atoms", "atoms have different sizes m"));
            }
            if s.group != group {
                return Err(Error::GroupMismatch("atoms act on different groups".into()));
            }
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::invalid("weight", format!("weight {w} is not positive")));
            }
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("weight", format!("weights sum to {total}, not 1")));
        }
        Ok(RandomSoficApprox { atoms })
    }

    pub fn dirac(sigma: SoficMap) -> Self {
        RandomSoficApprox {
            atoms: vec![(sigma, 1.0)],
        }
    }

    pub fn atoms(&self) -> &[(SoficMap, f64)] {
        &self.atoms
    }

    pub fn m(&self) -> usize {
        self.atoms[0].0.m
    }
}

/// Weight-averaged defects over the atoms.
///
/// Weights enter through their decimal form and are renormalised to sum to
/// exactly one, so e.g. three weights of `0.3333333333333333` average evenly.
pub fn random_defect_stats(
    kappa: &RandomSoficApprox,
    pairs: &[(GroupElement, GroupElement)],
    distinct: &[(GroupElement, GroupElement)],
) -> Result<DefectStats> {
    let weights = kappa
        .atoms
        .iter()
        .map(|(_, w)| decimal_rational(*w))
        .collect::<Result<Vec<_>>>()?;
    let total: BigRational = weights.iter().fold(BigRational::zero(), |a, w| a + w);
    let mut out = DefectStats {
        mult: BTreeMap::new(),
        free: BTreeMap::new(),
    };
    for ((sigma, _), w) in kappa.atoms.iter().zip(&weights) {
        let w = w / &total;
        let stats = defect_stats(sigma, pairs, distinct)?;
        for (k, v) in stats.mult {
            *out.mult.entry(k).or_insert_with(BigRational::zero) += &w * v;
        }
        for (k, v) in stats.free {
            *out.free.entry(k).or_insert_with(BigRational::zero) += &w * v;
        }
    }
    Ok(out)
}

/// A partial bijection `β: Q → Q'` between point sets (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosenessWitness {
    beta: BTreeMap<usize, usize>,
    q_prime: BTreeSet<usize>,
}

impl ClosenessWitness {
    /// `domain[i] ↦ image[i]`; `codomain` must be exactly the image set.
    pub fn new(domain: &[usize], codomain: &[usize], image: &[usize]) -> Result<Self> {
        if domain.len() != image.len() {
            return Err(Error::invalid("beta", "domain and image lengths differ"));
        }
        let mut beta = BTreeMap::new();
        for (&q, &q2) in domain.iter().zip(image) {
            if beta.insert(q, q2).is_some() {
                return Err(Error::invalid("Q", format!("point {} repeated", q + 1)));
            }
        }
        let img: BTreeSet<usize> = image.iter().copied().collect();
        if img.len() != image.len() {
            return Err(Error::invalid("beta", "beta is not injective"));
        }
        let q_prime: BTreeSet<usize> = codomain.iter().copied().collect();
        if q_prime != img {
            return Err(Error::invalid("Q'", "image of beta differs from Q'"));
        }
        Ok(ClosenessWitness { beta, q_prime })
    }

    /// `β = id` on `points`.
    pub fn identity(points: &[usize]) -> Result<Self> {
        ClosenessWitness::new(points, points, points)
    }

    pub fn beta(&self) -> &BTreeMap<usize, usize> {
        &self.beta
    }

    pub fn q_len(&self) -> usize {
        self.beta.len()
    }
}

/// Which closeness conditions hold for a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosenessReport {
    pub intertwines_forward: bool,
    pub intertwines_backward: bool,
    pub large_enough: bool,
    /// First offending `(w, q)` for each failed intertwining condition, 1-based points.
    pub forward_violation: Option<(GroupElement, usize)>,
    pub backward_violation: Option<(GroupElement, usize)>,
}

impl ClosenessReport {
    pub fn holds(&self) -> bool {
        self.intertwines_forward && self.intertwines_backward && self.large_enough
    }
}

/// Checks the three `(W, ε)`-closeness conditions for a supplied witness:
///
/// 1. `σ'(w)β(q) = β(σ(w)q)` whenever `σ(w)q ∈ Q`,
/// 2. `σ(w)β⁻¹(q') = β⁻¹(σ'(w)q')` whenever `σ'(w)q' ∈ Q'`,
/// 3. `|Q| ≥ (1-ε)m` and `|Q'| ≥ (1-ε)m'`.
pub fn verify_closeness_witness(
    sigma: &SoficMap,
    sigma_prime: &SoficMap,
    w: &Window,
    eps: f64,
    witness: &ClosenessWitness,
) -> Result<ClosenessReport> {
    if sigma.group != sigma_prime.group {
        return Err(Error::GroupMismatch("closeness compares maps on different groups".into()));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid("eps", "closeness needs eps in [0, 1]"));
    }
    if witness.beta.keys().any(|&q| q >= sigma.m) || witness.q_prime.iter().any(|&q| q >= sigma_prime.m) {
        return Err(Error::invalid("witness", "witness points out of range"));
    }
    let inverse: BTreeMap<usize, usize> = witness.beta.iter().map(|(&a, &b)| (b, a)).collect();
    let mut forward_violation = None;
    let mut backward_violation = None;
    for g in w.elements() {
        let s = sigma.eval(g)?;
        let s2 = sigma_prime.eval(g)?;
        if forward_violation.is_none() {
            for (&q, &bq) in &witness.beta {
                if let Some(&b_next) = witness.beta.get(&s.apply(q)) {
                    if s2.apply(bq) != b_next {
                        forward_violation = Some((g.clone(), q + 1));
                        break;
                    }
                }
            }
        }
        if backward_violation.is_none() {
            for (&q2, &binv) in &inverse {
                if let Some(&binv_next) = inverse.get(&s2.apply(q2)) {
                    if s.apply(binv) != binv_next {
                        backward_violation = Some((g.clone(), q2 + 1));
                        break;
                    }
                }
            }
        }
    }
    let eps = decimal_rational(eps)?;
    let one_minus = BigRational::one() - eps;
    let big = |k: usize| BigRational::from_integer(BigInt::from(k));
    let large_enough = big(witness.beta.len()) >= &one_minus * big(sigma.m)
        && big(witness.q_prime.len()) >= &one_minus * big(sigma_prime.m);
    Ok(ClosenessReport {
        intertwines_forward: forward_violation.is_none(),
        intertwines_backward: backward_violation.is_none(),
        large_enough,
        forward_violation,
        backward_violation,
    })
}

/// Brute-force search for a good closeness witness, for small instances
/// (`m·m' ≤ 10⁴`).
///
/// Every seed pair `(q₀, q₀')` is grown along `W ∪ W⁻¹` moves into a partial
/// bijection, points violating the intertwining conditions are pruned, and the
/// witness with the smallest required ε is returned with that ε. The result
/// always passes [`verify_closeness_witness`] at the returned ε, but it is not
/// guaranteed to be optimal.
pub fn find_closeness_witness(
    sigma: &SoficMap,
    sigma_prime: &SoficMap,
    w: &Window,
) -> Result<Option<(ClosenessWitness, BigRational)>> {
    let (m, m2) = (sigma.m, sigma_prime.m);
    if (m * m2) as f64 > 1e4 {
        return Err(Error::guard("m·m'", (m * m2) as f64, 1e4, "supply a witness instead"));
    }
    if sigma.group != sigma_prime.group {
        return Err(Error::GroupMismatch("closeness compares maps on different groups".into()));
    }
    let fwd: Vec<(Perm, Perm)> = w
        .elements()
        .iter()
        .map(|g| Ok((sigma.eval(g)?, sigma_prime.eval(g)?)))
        .collect::<Result<_>>()?;
    let moves: Vec<(Perm, Perm)> = fwd
        .iter()
        .flat_map(|(a, b)| [(a.clone(), b.clone()), (a.inverse(), b.inverse())])
        .collect();

    let mut best: Option<(ClosenessWitness, BigRational)> = None;
    for q0 in 0..m {
        for q0p in 0..m2 {
            let mut beta: HashMap<usize, usize> = HashMap::from([(q0, q0p)]);
            let mut used = vec![false; m2];
            used[q0p] = true;
            let mut queue = VecDeque::from([(q0, q0p)]);
            while let Some((q, qp)) = queue.pop_front() {
                for (a, b) in &moves {
                    let (x, y) = (a.apply(q), b.apply(qp));
                    if !beta.contains_key(&x) && !used[y] {
                        beta.insert(x, y);
                        used[y] = true;
                        queue.push_back((x, y));
                    }
                }
            }
            // prune until both intertwining conditions hold
            loop {
                let inv: HashMap<usize, usize> = beta.iter().map(|(&a, &b)| (b, a)).collect();
                let mut drop = BTreeSet::new();
                for (a, b) in &fwd {
                    for (&q, &bq) in &beta {
                        if let Some(&bn) = beta.get(&a.apply(q)) {
                            if b.apply(bq) != bn {
                                drop.insert(q);
                            }
                        }
                    }
                    for (&qp, &iq) in &inv {
                        if let Some(&inn) = inv.get(&b.apply(qp)) {
                            if a.apply(iq) != inn {
                                drop.insert(iq);
                            }
                        }
                    }
                }
                if drop.is_empty() {
                    break;
                }
                for q in drop {
                    beta.remove(&q);
                }
            }
            let size = beta.len();
            let need = std::cmp::max(ratio(m - size, m), ratio(m2 - size, m2));
            if best.as_ref().is_none_or(|(_, e)| need < *e) {
                let mut pairs: Vec<(usize, usize)> = beta.into_iter().collect();
                pairs.sort_unstable();
                let dom: Vec<usize> = pairs.iter().map(|p| p.0).collect();
                let img: Vec<usize> = pairs.iter().map(|p| p.1).collect();
                best = Some((ClosenessWitness::new(&dom, &img, &img)?, need));
            }
        }
    }
    Ok(best)
}

/// Largest enumeration allowed by [`r_approximation_check`].
pub const R_APPROX_GUARD: f64 = 1e6;

/// Checks whether `σ` is an r-approximation to `(G, S)`.
///
/// `V` is the set of points `v` such that for every sequence
/// `g_1, …, g_r ∈ S ∪ {e}`, `σ(g_1)⋯σ(g_r)v = σ(g_1⋯g_r)v`, and distinct
/// products send `v` to distinct points. Returns `(|V| ≥ (1 - 1/r)m, |V|/m)`.
pub fn r_approximation_check(
    sigma: &SoficMap,
    s: &[GroupElement],
    r: usize,
) -> Result<(bool, BigRational)> {
    if r == 0 {
        return Err(Error::invalid("r", "r must be positive"));
    }
    let group = &sigma.group;
    if !group.is_symmetric(s)? {
        return Err(Error::invalid("S", "generating set must satisfy S = S^-1"));
    }
    let mut letters: Vec<GroupElement> = s.to_vec();
    letters.push(group.identity());
    letters.sort();
    letters.dedup();
    let work = (letters.len() as f64).powi(r as i32);
    if work > R_APPROX_GUARD {
        return Err(Error::guard("|S ∪ {e}|^r", work, R_APPROX_GUARD, "use a smaller r"));
    }
    let letter_perms: Vec<Perm> = letters.iter().map(|g| sigma.eval(g)).collect::<Result<_>>()?;
    let m = sigma.m;
    let mut bad = vec![false; m];
    let mut product_perms: BTreeMap<GroupElement, Perm> = BTreeMap::new();

    // depth-first over sequences; `comp` is σ(g_1)∘⋯∘σ(g_j)
    let mut stack: Vec<(usize, GroupElement, Perm)> = vec![(0, group.identity(), Perm::identity(m))];
    while let Some((depth, prod, comp)) = stack.pop() {
        if depth == r {
            if !product_perms.contains_key(&prod) {
                let p = sigma.eval(&prod)?;
                product_perms.insert(prod.clone(), p);
            }
            let target = &product_perms[&prod];
            for v in 0..m {
                if comp.apply(v) != target.apply(v) {
                    bad[v] = true;
                }
            }
            continue;
        }
        for (g, pg) in letters.iter().zip(&letter_perms) {
            stack.push((depth + 1, group.mul(&prod, g)?, comp.compose(pg)));
        }
    }
    // freeness across distinct products
    for v in 0..m {
        let mut seen = HashMap::with_capacity(product_perms.len());
        for p in product_perms.values() {
            if seen.insert(p.apply(v), ()).is_some() {
                bad[v] = true;
                break;
            }
        }
    }
    let good = bad.iter().filter(|b| !**b).count();
    let fraction = ratio(good, m);
    let threshold = BigRational::from_integer(BigInt::from(m)) * (BigRational::one() - ratio(1, r));
    Ok((BigRational::from_integer(BigInt::from(good)) >= threshold, fraction))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(i: i64) -> GroupElement {
        GroupElement::Int(i)
    }

    fn one_based(p: &Perm) -> Vec<usize> {
        p.to_one_based()
    }

    #[test]
    fn cyclic_eval_examples() {
        let s = cyclic_approximation(5).unwrap();
        let p = s.eval(&int(7)).unwrap();
        assert_eq!(p.apply(0) + 1, 3);
        assert_eq!(p.apply(3) + 1, 1);
        assert!(s.eval(&int(0)).unwrap().is_identity());

        let c4 = cyclic_approximation(4).unwrap();
        assert_eq!(one_based(&c4.eval(&int(1)).unwrap()), vec![2, 3, 4, 1]);
        assert_eq!(c4.eval(&int(-1)).unwrap().apply(1), 0);
        assert_eq!(c4.eval(&int(-1)).unwrap(), c4.eval(&int(1)).unwrap().inverse());

        let c1 = cyclic_approximation(1).unwrap();
        for g in -3..=3 {
            assert!(c1.eval(&int(g)).unwrap().is_identity());
        }
    }

    #[test]
    fn torus_examples() {
        let z = GroupSpec::integer_line();
        assert_eq!(
            torus_approximation(&z, &[3]).unwrap().eval(&int(2)).unwrap(),
            cyclic_approximation(3).unwrap().eval(&int(2)).unwrap()
        );
        let z2 = GroupSpec::integer_lattice(2).unwrap();
        let t22 = torus_approximation(&z2, &[2, 2]).unwrap();
        assert_eq!(t22.eval(&GroupElement::Lattice(vec![1, 0])).unwrap().cycle_type(), vec![2, 2]);
        let t33 = torus_approximation(&z2, &[3, 3]).unwrap();
        assert!(t33.eval(&GroupElement::Lattice(vec![3, 3])).unwrap().is_identity());
        // (r, c) ↦ (r+1, c+1) mod 3, row-major points
        let p = t33.eval(&GroupElement::Lattice(vec![1, 1])).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(p.apply(r * 3 + c), ((r + 1) % 3) * 3 + (c + 1) % 3);
            }
        }
        assert!(torus_approximation(&z2, &[3]).is_err());
    }

    #[test]
    fn folner_partial_action_examples() {
        let z = GroupSpec::integer_line();
        let f = crate::group::folner_box(&z, 5).unwrap();
        let s = folner_partial_action(&z, &f).unwrap();
        assert_eq!(one_based(&s.eval(&int(1)).unwrap()), vec![2, 3, 4, 5, 1]);
        assert!(s.eval(&int(0)).unwrap().is_identity());
        assert_eq!(s.mode().name(), "word_product");

        let z2 = GroupSpec::integer_lattice(2).unwrap();
        let f2 = crate::group::folner_box(&z2, 2).unwrap();
        let s2 = folner_partial_action(&z2, &f2).unwrap();
        // points (1,1),(1,2),(2,1),(2,2); (1,0) moves row 1 to row 2, wraps in order
        assert_eq!(one_based(&s2.eval(&GroupElement::Lattice(vec![1, 0])).unwrap()), vec![3, 4, 1, 2]);
    }

    #[test]
    fn block_sum_examples() {
        let c4 = cyclic_approximation(4).unwrap();
        let c6 = cyclic_approximation(6).unwrap();
        let s = block_sum(&[c4, c6], &[1, 1]).unwrap();
        assert_eq!(s.m(), 10);
        assert_eq!(s.eval(&int(1)).unwrap().cycle_type(), vec![4, 6]);
        assert_eq!(s.mode().name(), "homomorphic");

        let c2 = cyclic_approximation(2).unwrap();
        let t = block_sum(std::slice::from_ref(&c2), &[3]).unwrap();
        assert_eq!(t.eval(&int(1)).unwrap().cycle_type(), vec![2, 2, 2]);

        let c3 = cyclic_approximation(3).unwrap();
        let a = block_sum(&[c2, c3], &[2, 1]).unwrap();
        assert_eq!(a.m(), 7);
        assert_eq!(one_based(&a.eval(&int(1)).unwrap()), vec![2, 1, 4, 3, 6, 7, 5]);

        assert!(block_sum(&[], &[]).is_err());
    }

    #[test]
    fn block_sum_of_word_product_maps() {
        let z = GroupSpec::integer_line();
        let f = folner_partial_action(&z, &crate::group::folner_box(&z, 3).unwrap()).unwrap();
        let c2 = cyclic_approximation(2).unwrap();
        let s = block_sum(&[f, c2], &[1, 2]).unwrap();
        assert_eq!(s.mode().name(), "word_product");
        assert_eq!(one_based(&s.eval(&int(1)).unwrap()), vec![2, 3, 1, 5, 4, 7, 6]);
    }

    #[test]
    fn defect_examples() {
        let c5 = cyclic_approximation(5).unwrap();
        let d = defect_stats(&c5, &[(int(2), int(9))], &[(int(0), int(5))]).unwrap();
        assert_eq!(d.mult[&(int(2), int(9))], ratio(0, 1));
        assert_eq!(d.free[&(int(0), int(5))], ratio(1, 1));
        assert!(defect_stats(&c5, &[], &[(int(1), int(1))]).is_err());

        let z = GroupSpec::integer_line();
        let f = folner_partial_action(&z, &crate::group::folner_box(&z, 10).unwrap()).unwrap();
        let d = defect_stats(&f, &[(int(1), int(1)), (int(1), int(-1))], &[]).unwrap();
        assert!(d.mult[&(int(1), int(1))] <= ratio(2, 10));
    }

    #[test]
    fn explicit_mode_rejects_unknown_elements() {
        let z = GroupSpec::integer_line();
        let s = SoficMap::explicit(z, vec![(int(1), Perm::from_one_based(&[2, 1]).unwrap())]).unwrap();
        assert!(s.eval(&int(1)).is_ok());
        assert!(matches!(s.eval(&int(2)), Err(Error::UnknownElement(_))));
    }

    #[test]
    fn random_defects_average_atoms() {
        let pairs = [(int(1), int(1))];
        let c8 = cyclic_approximation(8).unwrap();
        let dirac = RandomSoficApprox::dirac(c8.clone());
        assert_eq!(
            random_defect_stats(&dirac, &pairs, &[(int(0), int(2))]).unwrap(),
            defect_stats(&c8, &pairs, &[(int(0), int(2))]).unwrap()
        );

        // ½ cyclic(6) + ½ (3·cyclic(2)), distinct pair (0, 2)
        let c6 = cyclic_approximation(6).unwrap();
        let t = block_sum(&[cyclic_approximation(2).unwrap()], &[3]).unwrap();
        let k = RandomSoficApprox::new(vec![(c6, 0.5), (t, 0.5)]).unwrap();
        let d = random_defect_stats(&k, &pairs, &[(int(0), int(2))]).unwrap();
        assert_eq!(d.mult[&pairs[0]], ratio(0, 1));
        // cyclic(6): 2 ≢ 0 so free defect 0; 3·cyclic(2): 2 ≡ 0 so 1
        assert_eq!(d.free[&(int(0), int(2))], ratio(1, 2));

        let u = RandomSoficApprox::new(vec![(c8.clone(), 0.5), (c8.clone(), 0.5)]).unwrap();
        assert_eq!(
            random_defect_stats(&u, &pairs, &[]).unwrap(),
            defect_stats(&c8, &pairs, &[]).unwrap()
        );
        assert!(RandomSoficApprox::new(vec![(c8.clone(), 0.5)]).is_err());
        assert!(RandomSoficApprox::new(vec![(c8, 0.5), (cyclic_approximation(9).unwrap(), 0.5)]).is_err());
    }

    #[test]
    fn closeness_examples() {
        let c10 = cyclic_approximation(10).unwrap();
        let c11 = cyclic_approximation(11).unwrap();
        let w = Window::from_ints(&[1]).unwrap();
        let all: Vec<usize> = (0..10).collect();
        let id = ClosenessWitness::identity(&all).unwrap();
        assert!(verify_closeness_witness(&c10, &c10, &w, 0.0, &id).unwrap().holds());

        // Q = [10] fails condition 1 at q = 10 (σ(1)10 = 1 but σ'(1)10 = 11)
        let rep = verify_closeness_witness(&c10, &c11, &w, 1.0, &id).unwrap();
        assert!(!rep.intertwines_forward);
        assert_eq!(rep.forward_violation, Some((int(1), 10)));

        // Q = Q' = [9]: intertwines; needs 9 ≥ (1-ε)·11, i.e. ε ≥ 2/11
        let nine: Vec<usize> = (0..9).collect();
        let w9 = ClosenessWitness::identity(&nine).unwrap();
        let rep = verify_closeness_witness(&c10, &c11, &w, 0.1, &w9).unwrap();
        assert!(rep.intertwines_forward && rep.intertwines_backward && !rep.large_enough);
        assert!(verify_closeness_witness(&c10, &c11, &w, 0.19, &w9).unwrap().holds());

        assert!(ClosenessWitness::new(&[0, 1], &[0], &[0, 0]).is_err());
    }

    #[test]
    fn witness_search_finds_verified_witness() {
        let c10 = cyclic_approximation(10).unwrap();
        let c11 = cyclic_approximation(11).unwrap();
        let w = Window::from_ints(&[1]).unwrap();
        let (wit, eps) = find_closeness_witness(&c10, &c11, &w).unwrap().unwrap();
        assert!(eps <= ratio(2, 11));
        let e = crate::rational::to_f64(&eps) + 1e-12;
        assert!(verify_closeness_witness(&c10, &c11, &w, e, &wit).unwrap().holds());
        let big = cyclic_approximation(101).unwrap();
        assert!(find_closeness_witness(&big, &big, &w).unwrap_err().is_guard());
    }

    #[test]
    fn r_approximation_examples() {
        let pm = [int(1), int(-1)];
        let (ok, frac) = r_approximation_check(&cyclic_approximation(100).unwrap(), &pm, 3).unwrap();
        assert!(ok);
        assert_eq!(frac, ratio(1, 1));

        let (ok, frac) = r_approximation_check(&cyclic_approximation(2).unwrap(), &pm, 2).unwrap();
        assert!(!ok);
        assert_eq!(frac, ratio(0, 1));

        let (ok, _) = r_approximation_check(&cyclic_approximation(2).unwrap(), &pm, 1).unwrap();
        assert!(ok);

        assert!(r_approximation_check(&cyclic_approximation(5).unwrap(), &[int(1)], 2).is_err());
        assert!(r_approximation_check(&cyclic_approximation(5).unwrap(), &pm, 20)
            .unwrap_err()
            .is_guard());
    }

    #[test]
    fn perm_validation() {
        assert!(Perm::from_images(vec![0, 0]).is_err());
        assert!(Perm::from_one_based(&[0, 1]).is_err());
        let p = Perm::from_one_based(&[2, 3, 1]).unwrap();
        assert!(p.compose(&p.inverse()).is_identity());
        assert!(p.pow(3).is_identity());
    }
}
