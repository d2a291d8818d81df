//! Acting groups: ℤ, ℤᵈ and finite groups given by a Cayley table.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};

/// An element of one of the supported groups.
///
/// The derived ordering (integers numerically, lattice points
/// lexicographically, finite elements by index) is the canonical order used
/// for windows and Følner sets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupElement {
    Int(i64),
    Lattice(Vec<i64>),
    Finite(usize),
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Int(g) => write!(f, "{g}"),
            GroupElement::Lattice(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            GroupElement::Finite(i) => write!(f, "#{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    IntegerLine,
    IntegerLattice {
        dim: usize,
    },
    /// `table[g * order + h]` is the index of `g·h`.
    FiniteCayley {
        order: usize,
        table: Vec<usize>,
        identity: usize,
    },
}

/// A group together with a finite generating set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    kind: GroupKind,
    generators: Vec<GroupElement>,
    // finite groups only: inverse table and shortest generator words
    inverses: Vec<usize>,
    words: Vec<Option<Vec<usize>>>,
}

impl GroupSpec {
    /// ℤ with generators `{+1, -1}`.
    pub fn integer_line() -> Self {
        GroupSpec {
            kind: GroupKind::IntegerLine,
            generators: vec![GroupElement::Int(1), GroupElement::Int(-1)],
            inverses: Vec::new(),
            words: Vec::new(),
        }
    }

    /// ℤᵈ with generators `{+e_1, -e_1, …, +e_d, -e_d}`.
    pub fn integer_lattice(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("d", "lattice dimension must be at least 1"));
        }
        let mut generators = Vec::with_capacity(2 * dim);
        for k in 0..dim {
            for s in [1, -1] {
                let mut e = vec![0; dim];
                e[k] = s;
                generators.push(GroupElement::Lattice(e));
            }
        }
        Ok(GroupSpec {
            kind: GroupKind::IntegerLattice { dim },
            generators,
            inverses: Vec::new(),
            words: Vec::new(),
        })
    }

    /// A finite group from its multiplication table (`rows[g][h] = g·h`).
    ///
    /// When `generators` is `None` every non-identity element is a generator.
    /// A supplied generating set must be closed under inverses.
    pub fn finite_cayley(
        rows: Vec<Vec<usize>>,
        identity: usize,
        generators: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("table", "Cayley table is empty"));
        }
        if identity >= n {
            return Err(Error::invalid("identity", "identity index out of range"));
        }
        let mut table = Vec::with_capacity(n * n);
        for (g, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid("table", format!("row {g} has length {}", row.len())));
            }
            table.extend_from_slice(row);
        }
        if table.iter().any(|&x| x >= n) {
            return Err(Error::invalid("table", "entry out of range"));
        }
        // Latin square
        for g in 0..n {
            let mut row_seen = vec![false; n];
            let mut col_seen = vec![false; n];
            for h in 0..n {
                let r = table[g * n + h];
                let c = table[h * n + g];
                if row_seen[r] || col_seen[c] {
                    return Err(Error::invalid("table", "not a Latin square"));
                }
                row_seen[r] = true;
                col_seen[c] = true;
            }
        }
        for g in 0..n {
            if table[identity * n + g] != g || table[g * n + identity] != g {
                return Err(Error::invalid("identity", "identity row/column is not neutral"));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a * n + b];
                for c in 0..n {
                    if table[ab * n + c] != table[a * n + table[b * n + c]] {
                        return Err(Error::invalid("table", "multiplication is not associative"));
                    }
                }
            }
        }
        let inverses: Vec<usize> = (0..n)
            .map(|g| (0..n).find(|&h| table[g * n + h] == identity).unwrap())
            .collect();
        let gens: Vec<usize> = match generators {
            Some(gs) => {
                if gs.iter().any(|&g| g >= n) {
                    return Err(Error::invalid("generators", "generator index out of range"));
                }
                let set: BTreeSet<usize> = gs.iter().copied().collect();
                if set.iter().any(|g| !set.contains(&inverses[*g])) {
                    return Err(Error::invalid("generators", "generating set is not closed under inverses"));
                }
                set.into_iter().collect()
            }
            None => (0..n).filter(|&g| g != identity).collect(),
        };

        // breadth-first shortest words, ties broken by generator order
        let mut words: Vec<Option<Vec<usize>>> = vec![None; n];
        words[identity] = Some(Vec::new());
        let mut queue = VecDeque::from([identity]);
        while let Some(x) = queue.pop_front() {
            for (gi, &s) in gens.iter().enumerate() {
                let y = table[x * n + s];
                if words[y].is_none() {
                    let mut w = words[x].clone().unwrap();
                    w.push(gi);
                    words[y] = Some(w);
                    queue.push_back(y);
                }
            }
        }

        Ok(GroupSpec {
            kind: GroupKind::FiniteCayley {
                order: n,
                table,
                identity,
            },
            generators: gens.into_iter().map(GroupElement::Finite).collect(),
            inverses,
            words,
        })
    }

    /// ℤ/n as a Cayley table with generators `{1, n-1}`.
    pub fn cyclic_group(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "group order must be positive"));
        }
        let rows = (0..n).map(|g| (0..n).map(|h| (g + h) % n).collect()).collect();
        let gens = if n == 1 { vec![] } else { vec![1 % n, n - 1] };
        GroupSpec::finite_cayley(rows, 0, Some(gens))
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// Number of elements for a finite group.
    pub fn order(&self) -> Option<usize> {
        match &self.kind {
            GroupKind::FiniteCayley { order, .. } => Some(*order),
            _ => None,
        }
    }

    pub fn is_integer_line(&self) -> bool {
        matches!(self.kind, GroupKind::IntegerLine)
    }

    pub fn identity(&self) -> GroupElement {
        match &self.kind {
            GroupKind::IntegerLine => GroupElement::Int(0),
            GroupKind::IntegerLattice { dim } => GroupElement::Lattice(vec![0; *dim]),
            GroupKind::FiniteCayley { identity, .. } => GroupElement::Finite(*identity),
        }
    }

    /// Checks that `g` has the shape of an element of this group.
    pub fn check(&self, g: &GroupElement) -> Result<()> {
        let ok = match (&self.kind, g) {
            (GroupKind::IntegerLine, GroupElement::Int(_)) => true,
            (GroupKind::IntegerLattice { dim }, GroupElement::Lattice(v)) => v.len() == *dim,
            (GroupKind::FiniteCayley { order, .. }, GroupElement::Finite(i)) => i < order,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::GroupMismatch(format!("{g} is not an element of {}", self.name())))
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            GroupKind::IntegerLine => "Z".to_string(),
            GroupKind::IntegerLattice { dim } => format!("Z^{dim}"),
            GroupKind::FiniteCayley { order, .. } => format!("finite group of order {order}"),
        }
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        self.check(h)?;
        Ok(match (&self.kind, g, h) {
            (GroupKind::IntegerLine, GroupElement::Int(a), GroupElement::Int(b)) => {
                GroupElement::Int(a.checked_add(*b).ok_or(Error::Overflow)?)
            }
            (GroupKind::IntegerLattice { .. }, GroupElement::Lattice(a), GroupElement::Lattice(b)) => {
                let v = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| x.checked_add(*y).ok_or(Error::Overflow))
                    .collect::<Result<Vec<_>>>()?;
                GroupElement::Lattice(v)
            }
            (GroupKind::FiniteCayley { order, table, .. }, GroupElement::Finite(a), GroupElement::Finite(b)) => {
                GroupElement::Finite(table[a * order + b])
            }
            _ => unreachable!("checked above"),
        })
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        Ok(match g {
            GroupElement::Int(a) => GroupElement::Int(a.checked_neg().ok_or(Error::Overflow)?),
            GroupElement::Lattice(v) => GroupElement::Lattice(
                v.iter()
                    .map(|x| x.checked_neg().ok_or(Error::Overflow))
                    .collect::<Result<_>>()?,
            ),
            GroupElement::Finite(i) => GroupElement::Finite(self.inverses[*i]),
        })
    }

    /// Product of a sequence, `g_1 g_2 ⋯ g_r` (identity for an empty slice).
    pub fn product(&self, elems: &[GroupElement]) -> Result<GroupElement> {
        elems
            .iter()
            .try_fold(self.identity(), |acc, g| self.mul(&acc, g))
    }

    /// The canonical generator word for `g`, as indices into
    /// [`generators`](Self::generators), read left to right (`g = s_1 s_2 ⋯ s_n`).
    ///
    /// ℤ: `|g|` copies of `sign(g)`. ℤᵈ: coordinates in order, `|v_k|` copies
    /// of `±e_k` each. Finite groups: a shortest word, ties broken by
    /// generator order.
    pub fn canonical_word(&self, g: &GroupElement) -> Result<Vec<usize>> {
        self.check(g)?;
        match g {
            GroupElement::Int(a) => {
                let gi = if *a >= 0 { 0 } else { 1 };
                Ok(vec![gi; a.unsigned_abs() as usize])
            }
            GroupElement::Lattice(v) => {
                let mut w = Vec::new();
                for (k, x) in v.iter().enumerate() {
                    let gi = 2 * k + usize::from(*x < 0);
                    w.extend(std::iter::repeat_n(gi, x.unsigned_abs() as usize));
                }
                Ok(w)
            }
            GroupElement::Finite(i) => self.words[*i].clone().ok_or_else(|| {
                Error::invalid("generators", format!("{g} is not in the subgroup they generate"))
            }),
        }
    }

    /// True when `set` equals its set of inverses.
    pub fn is_symmetric(&self, set: &[GroupElement]) -> Result<bool> {
        let s: BTreeSet<&GroupElement> = set.iter().collect();
        for g in set {
            if !s.contains(&self.inverse(g)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every element of a finite group, in index order.
    pub fn all_elements(&self) -> Option<Vec<GroupElement>> {
        self.order().map(|n| (0..n).map(GroupElement::Finite).collect())
    }
}

/// A finite, nonempty set of group elements in canonical (sorted) order.
///
/// The order fixes how patterns in `A^W` are indexed: the first element is the
/// most significant digit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    elements: Vec<GroupElement>,
}

impl Window {
    pub fn new(group: &GroupSpec, elements: impl IntoIterator<Item = GroupElement>) -> Result<Self> {
        let set: BTreeSet<GroupElement> = elements.into_iter().collect();
        if set.is_empty() {
            return Err(Error::invalid("window", "window must be nonempty"));
        }
        for g in &set {
            group.check(g)?;
        }
        Ok(Window {
            elements: set.into_iter().collect(),
        })
    }

    /// `{e}`.
    pub fn identity(group: &GroupSpec) -> Self {
        Window {
            elements: vec![group.identity()],
        }
    }

    /// A window in ℤ from integers.
    pub fn from_ints(ints: &[i64]) -> Result<Self> {
        Window::new(&GroupSpec::integer_line(), ints.iter().map(|&i| GroupElement::Int(i)))
    }

    /// The integer interval `[a, b]`.
    pub fn interval(a: i64, b: i64) -> Result<Self> {
        Window::from_ints(&(a..=b).collect::<Vec<_>>())
    }

    /// The radius-`r` ball: `[-r, r]` in ℤ, `[-r, r]ᵈ` in ℤᵈ, and the elements of
    /// word length at most `r` in a finite group.
    pub fn ball(group: &GroupSpec, r: u32) -> Result<Self> {
        let r = i64::from(r);
        match group.kind() {
            GroupKind::IntegerLine => Window::interval(-r, r),
            GroupKind::IntegerLattice { dim } => {
                let side: Vec<i64> = (-r..=r).collect();
                Window::new(group, cartesian_power(&side, *dim).into_iter().map(GroupElement::Lattice))
            }
            GroupKind::FiniteCayley { order, .. } => {
                let elems = (0..*order)
                    .map(GroupElement::Finite)
                    .filter(|g| {
                        group
                            .canonical_word(g)
                            .map(|w| w.len() as i64 <= r)
                            .unwrap_or(false)
                    })
                    .collect::<Vec<_>>();
                Window::new(group, elems)
            }
        }
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_identity(&self, group: &GroupSpec) -> bool {
        self.elements.len() == 1 && self.elements[0] == group.identity()
    }

    pub fn position(&self, g: &GroupElement) -> Option<usize> {
        self.elements.binary_search(g).ok()
    }

    pub fn is_subset_of(&self, other: &Window) -> bool {
        self.elements.iter().all(|g| other.position(g).is_some())
    }

    /// The elements as integers, if this is a window in ℤ.
    pub fn as_ints(&self) -> Option<Vec<i64>> {
        self.elements
            .iter()
            .map(|g| match g {
                GroupElement::Int(i) => Some(*i),
                _ => None,
            })
            .collect()
    }

    /// A compact textual form, e.g. `{-1,0,1}`.
    pub fn spec_string(&self) -> String {
        let parts: Vec<String> = self.elements.iter().map(|g| g.to_string()).collect();
        format!("{{{}}}", parts.join(","))
    }
}

/// A finite nonempty subset of the group, used along a Følner sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FolnerSet {
    elements: Vec<GroupElement>,
}

impl FolnerSet {
    pub fn new(group: &GroupSpec, elements: impl IntoIterator<Item = GroupElement>) -> Result<Self> {
        let w = Window::new(group, elements)?;
        Ok(FolnerSet { elements: w.elements })
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, g: &GroupElement) -> Option<usize> {
        self.elements.binary_search(g).ok()
    }

    pub fn as_window(&self) -> Window {
        Window {
            elements: self.elements.clone(),
        }
    }
}

/// The box `{1..n}` (ℤ) or `{1..n}ᵈ` (ℤᵈ); the whole group when finite.
pub fn folner_box(group: &GroupSpec, n: usize) -> Result<FolnerSet> {
    if n == 0 {
        return Err(Error::invalid("n", "Følner box side must be positive"));
    }
    let side: Vec<i64> = (1..=n as i64).collect();
    match group.kind() {
        GroupKind::IntegerLine => FolnerSet::new(group, side.into_iter().map(GroupElement::Int)),
        GroupKind::IntegerLattice { dim } => {
            let count = (n as f64).powi(*dim as i32);
            if count > 1e8 {
                return Err(Error::guard("Følner box size", count, 1e8, "use a smaller side"));
            }
            FolnerSet::new(group, cartesian_power(&side, *dim).into_iter().map(GroupElement::Lattice))
        }
        GroupKind::FiniteCayley { .. } => FolnerSet::new(group, group.all_elements().unwrap()),
    }
}

/// Exact `(|KF ∩ F| / |F|, |KF Δ F| / |F|)` with `KF = {kf : k ∈ K, f ∈ F}`.
pub fn invariance_ratios(
    group: &GroupSpec,
    f: &FolnerSet,
    k: &[GroupElement],
) -> Result<(BigRational, BigRational)> {
    let f_set: BTreeSet<&GroupElement> = f.elements.iter().collect();
    let mut kf = BTreeSet::new();
    for a in k {
        for b in &f.elements {
            kf.insert(group.mul(a, b)?);
        }
    }
    let inter = kf.iter().filter(|g| f_set.contains(g)).count();
    let symdiff = kf.len() + f_set.len() - 2 * inter;
    let denom = BigInt::from(f.len());
    Ok((
        BigRational::new(BigInt::from(inter), denom.clone()),
        BigRational::new(BigInt::from(symdiff), denom),
    ))
}

/// All `d`-tuples over `side`, lexicographic.
pub(crate) fn cartesian_power(side: &[i64], d: usize) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..d {
        let mut next = Vec::with_capacity(out.len() * side.len());
        for prefix in &out {
            for &x in side {
                let mut v = prefix.clone();
                v.push(x);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn mul_examples() {
        let z = GroupSpec::integer_line();
        assert_eq!(z.mul(&GroupElement::Int(3), &GroupElement::Int(4)).unwrap(), GroupElement::Int(7));
        let z2 = GroupSpec::integer_lattice(2).unwrap();
        assert_eq!(
            z2.mul(&GroupElement::Lattice(vec![1, 0]), &GroupElement::Lattice(vec![0, -2])).unwrap(),
            GroupElement::Lattice(vec![1, -2])
        );
        let c3 = GroupSpec::cyclic_group(3).unwrap();
        assert_eq!(c3.mul(&GroupElement::Finite(1), &GroupElement::Finite(2)).unwrap(), GroupElement::Finite(0));
    }

    #[test]
    fn mul_rejects_mismatch_and_overflow() {
        let z = GroupSpec::integer_line();
        assert!(matches!(
            z.mul(&GroupElement::Int(1), &GroupElement::Finite(0)),
            Err(Error::GroupMismatch(_))
        ));
        assert!(matches!(
            z.mul(&GroupElement::Int(i64::MAX), &GroupElement::Int(1)),
            Err(Error::Overflow)
        ));
    }

    #[test]
    fn cayley_validation() {
        assert!(GroupSpec::finite_cayley(vec![vec![0, 1], vec![0, 1]], 0, None).is_err());
        assert!(GroupSpec::finite_cayley(vec![vec![1, 0], vec![0, 1]], 0, None).is_err());
        // {1} alone is not inverse-closed in Z/3
        let rows = vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]];
        assert!(GroupSpec::finite_cayley(rows, 0, Some(vec![1])).is_err());
    }

    #[test]
    fn folner_box_examples() {
        let z = GroupSpec::integer_line();
        let f = folner_box(&z, 5).unwrap();
        assert_eq!(f.elements(), (1..=5).map(GroupElement::Int).collect::<Vec<_>>().as_slice());
        assert_eq!(folner_box(&z, 1).unwrap().elements(), &[GroupElement::Int(1)]);
        let z2 = GroupSpec::integer_lattice(2).unwrap();
        let f2 = folner_box(&z2, 2).unwrap();
        let expect: Vec<GroupElement> = [[1, 1], [1, 2], [2, 1], [2, 2]]
            .iter()
            .map(|v| GroupElement::Lattice(v.to_vec()))
            .collect();
        assert_eq!(f2.elements(), expect.as_slice());
        assert!(folner_box(&z, 0).is_err());
        let c5 = GroupSpec::cyclic_group(5).unwrap();
        assert_eq!(folner_box(&c5, 17).unwrap().len(), 5);
    }

    #[test]
    fn invariance_ratio_examples() {
        let z = GroupSpec::integer_line();
        let k: Vec<GroupElement> = [-1, 0, 1].map(GroupElement::Int).to_vec();
        let (i, s) = invariance_ratios(&z, &folner_box(&z, 10).unwrap(), &k).unwrap();
        assert_eq!(i, BigRational::one());
        assert_eq!(s, ratio(2, 10));

        let (i, s) = invariance_ratios(&z, &folner_box(&z, 7).unwrap(), &[GroupElement::Int(0)]).unwrap();
        assert_eq!((i, s), (BigRational::one(), BigRational::zero()));

        let (i, s) = invariance_ratios(&z, &folner_box(&z, 1).unwrap(), &[GroupElement::Int(1)]).unwrap();
        assert_eq!((i, s), (BigRational::zero(), ratio(2, 1)));
    }

    #[test]
    fn box_symdiff_is_two_over_n() {
        let z = GroupSpec::integer_line();
        let k: Vec<GroupElement> = [-1, 0, 1].map(GroupElement::Int).to_vec();
        for n in 1..=60 {
            let (_, s) = invariance_ratios(&z, &folner_box(&z, n).unwrap(), &k).unwrap();
            assert_eq!(s, ratio(2, n as i64), "n = {n}");
        }
    }

    #[test]
    fn canonical_words() {
        let z = GroupSpec::integer_line();
        assert_eq!(z.canonical_word(&GroupElement::Int(-3)).unwrap(), vec![1, 1, 1]);
        assert!(z.canonical_word(&GroupElement::Int(0)).unwrap().is_empty());
        let z2 = GroupSpec::integer_lattice(2).unwrap();
        assert_eq!(z2.canonical_word(&GroupElement::Lattice(vec![2, -1])).unwrap(), vec![0, 0, 3]);
        let c6 = GroupSpec::cyclic_group(6).unwrap();
        assert_eq!(c6.canonical_word(&GroupElement::Finite(3)).unwrap().len(), 3);
        assert_eq!(c6.canonical_word(&GroupElement::Finite(5)).unwrap(), vec![1]);
    }

    #[test]
    fn window_canonical_order() {
        let a = Window::from_ints(&[3, -1, 0, 3]).unwrap();
        let b = Window::from_ints(&[0, 3, -1]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.as_ints().unwrap(), vec![-1, 0, 3]);
        assert!(Window::from_ints(&[]).is_err());
        let z2 = GroupSpec::integer_lattice(2).unwrap();
        assert_eq!(Window::ball(&z2, 1).unwrap().len(), 9);
    }
}
