//! JSON shapes for groups, windows, sofic maps, processes and pattern laws.
//!
//! Each `*Json` type mirrors one library type and converts both ways;
//! conversion back into the library validates everything the constructors do.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupKind, GroupSpec, Window};
use crate::process::{factor_by_names, product, PatternDist, Process, ProcessKind};
use crate::sofic::{EvalMode, HomAction, Perm, RandomSoficApprox, SoficMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKindJson {
    IntegerLine,
    IntegerLattice,
    FiniteCayley,
}

/// `{kind, d}` for ℤᵈ, `{kind, n, table, identity, generators?}` for a
/// finite group with row-major table `table[g·n + h] = g·h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupJson {
    pub kind: GroupKindJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<usize>>,
}

fn need<'a, T>(x: &'a Option<T>, field: &str, kind: &str) -> Result<&'a T> {
    x.as_ref()
        .ok_or_else(|| Error::invalid(field, format!("required for kind {kind}")))
}

fn forbid<T>(x: &Option<T>, field: &str, kind: &str) -> Result<()> {
    match x {
        Some(_) => Err(Error::invalid(field, format!("not used by kind {kind}"))),
        None => Ok(()),
    }
}

impl GroupJson {
    pub fn integer_line() -> Self {
        GroupJson {
            kind: GroupKindJson::IntegerLine,
            d: None,
            n: None,
            table: None,
            identity: None,
            generators: None,
        }
    }

    pub fn to_spec(&self) -> Result<GroupSpec> {
        match self.kind {
            GroupKindJson::IntegerLine => {
                for (x, f) in [(&self.d, "d"), (&self.n, "n"), (&self.identity, "identity")] {
                    forbid(x, f, "integer_line")?;
                }
                forbid(&self.table, "table", "integer_line")?;
                forbid(&self.generators, "generators", "integer_line")?;
                Ok(GroupSpec::integer_line())
            }
            GroupKindJson::IntegerLattice => {
                for (x, f) in [(&self.n, "n"), (&self.identity, "identity")] {
                    forbid(x, f, "integer_lattice")?;
                }
                forbid(&self.table, "table", "integer_lattice")?;
                forbid(&self.generators, "generators", "integer_lattice")?;
                GroupSpec::integer_lattice(*need(&self.d, "d", "integer_lattice")?)
            }
            GroupKindJson::FiniteCayley => {
                forbid(&self.d, "d", "finite_cayley")?;
                let n = *need(&self.n, "n", "finite_cayley")?;
                let table = need(&self.table, "table", "finite_cayley")?;
                let identity = *need(&self.identity, "identity", "finite_cayley")?;
                if n == 0 || table.len() != n * n {
                    return Err(Error::invalid("table", format!("expected {} entries for n = {n}", n * n)));
                }
                let rows = table.chunks(n).map(<[usize]>::to_vec).collect();
                GroupSpec::finite_cayley(rows, identity, self.generators.clone())
            }
        }
    }
}

impl From<&GroupSpec> for GroupJson {
    fn from(g: &GroupSpec) -> Self {
        match g.kind() {
            GroupKind::IntegerLine => GroupJson::integer_line(),
            GroupKind::IntegerLattice { dim } => GroupJson {
                kind: GroupKindJson::IntegerLattice,
                d: Some(*dim),
                ..GroupJson::integer_line()
            },
            GroupKind::FiniteCayley { order, table, identity } => GroupJson {
                kind: GroupKindJson::FiniteCayley,
                d: None,
                n: Some(*order),
                table: Some(table.clone()),
                identity: Some(*identity),
                generators: Some(
                    g.generators()
                        .iter()
                        .map(|s| match s {
                            GroupElement::Finite(i) => *i,
                            _ => unreachable!("finite group generators are finite elements"),
                        })
                        .collect(),
                ),
            },
        }
    }
}

/// An integer for ℤ and finite groups, an integer array for ℤᵈ.
pub fn element_to_json(g: &GroupElement) -> Value {
    match g {
        GroupElement::Int(x) => Value::from(*x),
        GroupElement::Lattice(v) => Value::from(v.clone()),
        GroupElement::Finite(i) => Value::from(*i),
    }
}

pub fn element_from_json(group: &GroupSpec, v: &Value) -> Result<GroupElement> {
    let bad = || Error::invalid("element", format!("{v} is not an element of {}", group.name()));
    let g = match group.kind() {
        GroupKind::IntegerLine => GroupElement::Int(v.as_i64().ok_or_else(bad)?),
        GroupKind::IntegerLattice { .. } => {
            let arr = v.as_array().ok_or_else(bad)?;
            GroupElement::Lattice(arr.iter().map(|x| x.as_i64().ok_or_else(bad)).collect::<Result<_>>()?)
        }
        GroupKind::FiniteCayley { .. } => GroupElement::Finite(v.as_u64().ok_or_else(bad)? as usize),
    };
    group.check(&g)?;
    Ok(g)
}

/// A window as an explicit element list or a word-metric ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowJson {
    Radius { radius: u32 },
    Elements(Vec<Value>),
}

impl WindowJson {
    pub fn to_window(&self, group: &GroupSpec) -> Result<Window> {
        match self {
            WindowJson::Radius { radius } => Window::ball(group, *radius),
            WindowJson::Elements(v) => Window::new(
                group,
                v.iter().map(|x| element_from_json(group, x)).collect::<Result<Vec<_>>>()?,
            ),
        }
    }
}

impl From<&Window> for WindowJson {
    fn from(w: &Window) -> Self {
        WindowJson::Elements(w.elements().iter().map(element_to_json).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorJson {
    pub element: Value,
    /// 1-based images.
    pub perm: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionJson {
    Torus(Vec<usize>),
    Regular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalModeJson {
    Homomorphic,
    WordProduct,
    Explicit,
}

/// `{m, group, generators: [{element, perm}], eval_mode}`.
///
/// For `explicit`, `generators` lists the whole table. For `homomorphic`,
/// `blocks` gives the actions laid out in order and `generators` is derived.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoficJson {
    pub m: usize,
    pub group: GroupJson,
    #[serde(default)]
    pub generators: Vec<GeneratorJson>,
    pub eval_mode: EvalModeJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<ActionJson>>,
}

impl SoficJson {
    pub fn to_sofic(&self) -> Result<SoficMap> {
        let group = self.group.to_spec()?;
        let entries = self
            .generators
            .iter()
            .map(|g| Ok((element_from_json(&group, &g.element)?, Perm::from_one_based(&g.perm)?)))
            .collect::<Result<Vec<_>>>()?;
        let sigma = match self.eval_mode {
            EvalModeJson::Explicit => SoficMap::explicit(group, entries)?,
            EvalModeJson::WordProduct => {
                let mut perms = Vec::with_capacity(group.generators().len());
                for s in group.generators() {
                    let p = entries
                        .iter()
                        .find(|(g, _)| g == s)
                        .map(|(_, p)| p.clone())
                        .ok_or_else(|| Error::invalid("generators", format!("no permutation for generator {s}")))?;
                    perms.push(p);
                }
                if entries.len() != perms.len() {
                    return Err(Error::invalid("generators", "entries must be exactly the group's generators"));
                }
                SoficMap::from_generators(group, perms)?
            }
            EvalModeJson::Homomorphic => {
                let blocks = self
                    .blocks
                    .as_ref()
                    .ok_or_else(|| Error::invalid("blocks", "homomorphic maps need blocks"))?;
                let actions = blocks
                    .iter()
                    .map(|b| match b {
                        ActionJson::Torus(dims) => HomAction::Torus { dims: dims.clone() },
                        ActionJson::Regular => HomAction::Regular,
                    })
                    .collect();
                let sigma = SoficMap::homomorphic(group, actions)?;
                for (g, p) in &entries {
                    if &sigma.eval(g)? != p {
                        return Err(Error::invalid("generators", format!("permutation for {g} disagrees with blocks")));
                    }
                }
                sigma
            }
        };
        if sigma.m() != self.m {
            return Err(Error::invalid("m", format!("m = {} but permutations have size {}", self.m, sigma.m())));
        }
        Ok(sigma)
    }
}

impl From<&SoficMap> for SoficJson {
    fn from(s: &SoficMap) -> Self {
        let gen = |g: &GroupElement, p: &Perm| GeneratorJson {
            element: element_to_json(g),
            perm: p.to_one_based(),
        };
        let (eval_mode, generators, blocks) = match s.mode() {
            EvalMode::Explicit(table) => (EvalModeJson::Explicit, table.iter().map(|(g, p)| gen(g, p)).collect(), None),
            mode => {
                let gens = s
                    .group()
                    .generators()
                    .iter()
                    .zip(s.generator_perms())
                    .map(|(g, p)| gen(g, p))
                    .collect();
                match mode {
                    EvalMode::Homomorphic(blocks) => (
                        EvalModeJson::Homomorphic,
                        gens,
                        Some(
                            blocks
                                .iter()
                                .map(|b| match &b.action {
                                    HomAction::Torus { dims } => ActionJson::Torus(dims.clone()),
                                    HomAction::Regular => ActionJson::Regular,
                                })
                                .collect(),
                        ),
                    ),
                    _ => (EvalModeJson::WordProduct, gens, None),
                }
            }
        };
        SoficJson {
            m: s.m(),
            group: s.group().into(),
            generators,
            eval_mode,
            blocks,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomJson {
    pub sofic: SoficJson,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSoficJson {
    pub atoms: Vec<AtomJson>,
}

impl RandomSoficJson {
    pub fn to_random(&self) -> Result<RandomSoficApprox> {
        RandomSoficApprox::new(
            self.atoms
                .iter()
                .map(|a| Ok((a.sofic.to_sofic()?, a.weight)))
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

impl From<&RandomSoficApprox> for RandomSoficJson {
    fn from(k: &RandomSoficApprox) -> Self {
        RandomSoficJson {
            atoms: k
                .atoms()
                .iter()
                .map(|(s, w)| AtomJson {
                    sofic: s.into(),
                    weight: *w,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKindJson {
    Bernoulli,
    Markov,
    Factor,
    Product,
    BlockIid,
}

impl ProcessKindJson {
    fn name(self) -> &'static str {
        match self {
            ProcessKindJson::Bernoulli => "bernoulli",
            ProcessKindJson::Markov => "markov",
            ProcessKindJson::Factor => "factor",
            ProcessKindJson::Product => "product",
            ProcessKindJson::BlockIid => "block_iid",
        }
    }
}

/// `{kind, alphabet, params…}`; symbols are strings without `|`.
///
/// * `bernoulli`: `alphabet`, `omega`, optional `group` (default ℤ)
/// * `markov`: `alphabet`, `transition`, `stationary`
/// * `factor`: `inner`, `map` (inner symbol → outer symbol, total)
/// * `product`: `left`, `right`
/// * `block_iid`: `alphabet`, `block`, `nu` as `[[pattern, prob], …]`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessJson {
    pub kind: ProcessKindJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<ProcessJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<Box<ProcessJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<Box<ProcessJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<(String, f64)>>,
}

impl ProcessJson {
    fn empty(kind: ProcessKindJson) -> Self {
        ProcessJson {
            kind,
            alphabet: None,
            omega: None,
            group: None,
            transition: None,
            stationary: None,
            inner: None,
            map: None,
            left: None,
            right: None,
            block: None,
            nu: None,
        }
    }

    fn check_fields(&self, used: &[&str]) -> Result<()> {
        let present = [
            ("alphabet", self.alphabet.is_some()),
            ("omega", self.omega.is_some()),
            ("group", self.group.is_some()),
            ("transition", self.transition.is_some()),
            ("stationary", self.stationary.is_some()),
            ("inner", self.inner.is_some()),
            ("map", self.map.is_some()),
            ("left", self.left.is_some()),
            ("right", self.right.is_some()),
            ("block", self.block.is_some()),
            ("nu", self.nu.is_some()),
        ];
        for (f, here) in present {
            if here && !used.contains(&f) {
                return Err(Error::invalid(f, format!("not used by kind {}", self.kind.name())));
            }
        }
        Ok(())
    }

    pub fn to_process(&self) -> Result<Process> {
        let kind = self.kind.name();
        match self.kind {
            ProcessKindJson::Bernoulli => {
                self.check_fields(&["alphabet", "omega", "group"])?;
                let group = match &self.group {
                    Some(g) => g.to_spec()?,
                    None => GroupSpec::integer_line(),
                };
                Process::bernoulli(
                    group,
                    need(&self.alphabet, "alphabet", kind)?.clone(),
                    need(&self.omega, "omega", kind)?.clone(),
                )
            }
            ProcessKindJson::Markov => {
                self.check_fields(&["alphabet", "transition", "stationary"])?;
                Process::markov(
                    need(&self.alphabet, "alphabet", kind)?.clone(),
                    need(&self.transition, "transition", kind)?.clone(),
                    need(&self.stationary, "stationary", kind)?.clone(),
                )
            }
            ProcessKindJson::Factor => {
                self.check_fields(&["inner", "map"])?;
                factor_by_names(&need(&self.inner, "inner", kind)?.to_process()?, need(&self.map, "map", kind)?)
            }
            ProcessKindJson::Product => {
                self.check_fields(&["left", "right"])?;
                product(
                    &need(&self.left, "left", kind)?.to_process()?,
                    &need(&self.right, "right", kind)?.to_process()?,
                )
            }
            ProcessKindJson::BlockIid => {
                self.check_fields(&["alphabet", "block", "nu"])?;
                let alphabet = need(&self.alphabet, "alphabet", kind)?;
                let block = *need(&self.block, "block", kind)?;
                if block == 0 {
                    return Err(Error::invalid("block", "block length must be at least 1"));
                }
                let w = Window::interval(1, block as i64)?;
                let dist = dist_from_pairs(w, alphabet.clone(), need(&self.nu, "nu", kind)?)?;
                Process::block_iid(alphabet.clone(), block, dist.probs().to_vec())
            }
        }
    }
}

impl From<&Process> for ProcessJson {
    fn from(p: &Process) -> Self {
        match p.kind() {
            ProcessKind::Bernoulli { omega } => ProcessJson {
                alphabet: Some(p.alphabet().to_vec()),
                omega: Some(omega.clone()),
                group: (!p.group().is_integer_line()).then(|| p.group().into()),
                ..ProcessJson::empty(ProcessKindJson::Bernoulli)
            },
            ProcessKind::MarkovZ { transition, stationary } => ProcessJson {
                alphabet: Some(p.alphabet().to_vec()),
                transition: Some(transition.clone()),
                stationary: Some(stationary.clone()),
                ..ProcessJson::empty(ProcessKindJson::Markov)
            },
            ProcessKind::Factor { map, inner } => ProcessJson {
                map: Some(
                    inner
                        .alphabet()
                        .iter()
                        .zip(map)
                        .map(|(a, &b)| (a.clone(), p.alphabet()[b].clone()))
                        .collect(),
                ),
                inner: Some(Box::new(inner.as_ref().into())),
                ..ProcessJson::empty(ProcessKindJson::Factor)
            },
            ProcessKind::Product { left, right } => ProcessJson {
                left: Some(Box::new(left.as_ref().into())),
                right: Some(Box::new(right.as_ref().into())),
                ..ProcessJson::empty(ProcessKindJson::Product)
            },
            ProcessKind::BlockIid { nu, block } => {
                let w = Window::interval(1, *block as i64).expect("block ≥ 1");
                let dist = PatternDist::new(w, p.alphabet().to_vec(), nu.clone()).expect("validated");
                ProcessJson {
                    alphabet: Some(p.alphabet().to_vec()),
                    block: Some(*block),
                    nu: Some(PatternDistJson::from(&dist).probs),
                    ..ProcessJson::empty(ProcessKindJson::BlockIid)
                }
            }
        }
    }
}

fn dist_from_pairs(window: Window, alphabet: Vec<String>, pairs: &[(String, f64)]) -> Result<PatternDist> {
    let k = alphabet.len();
    let cells = (k as f64).powi(window.len() as i32);
    if cells > crate::process::EXACT_GUARD {
        return Err(Error::guard("pattern cells", cells, crate::process::EXACT_GUARD, "use a smaller window"));
    }
    let index: BTreeMap<&str, usize> = alphabet.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    let mut probs = vec![0.0; cells as usize];
    for (pat, p) in pairs {
        let syms: Vec<&str> = pat.split('|').collect();
        if syms.len() != window.len() {
            return Err(Error::invalid("probs", format!("pattern {pat:?} has {} symbols, window has {}", syms.len(), window.len())));
        }
        let mut idx = 0usize;
        for s in syms {
            let a = index
                .get(s)
                .ok_or_else(|| Error::invalid("probs", format!("unknown symbol {s:?} in {pat:?}")))?;
            idx = idx * k + a;
        }
        if probs[idx] != 0.0 {
            return Err(Error::invalid("probs", format!("pattern {pat:?} listed twice")));
        }
        probs[idx] = *p;
    }
    PatternDist::new(window, alphabet, probs)
}

/// `{window, alphabet, probs: [[pattern-string, prob], …]}` with symbols
/// joined by `|`; zero-mass patterns are omitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternDistJson {
    pub window: Vec<Value>,
    pub alphabet: Vec<String>,
    pub probs: Vec<(String, f64)>,
}

impl PatternDistJson {
    pub fn to_dist(&self, group: &GroupSpec) -> Result<PatternDist> {
        let elems = self
            .window
            .iter()
            .map(|x| element_from_json(group, x))
            .collect::<Result<Vec<_>>>()?;
        let w = Window::new(group, elems.clone())?;
        if w.elements() != elems.as_slice() {
            return Err(Error::invalid("window", "window elements must be listed in increasing order without repeats"));
        }
        dist_from_pairs(w, self.alphabet.clone(), &self.probs)
    }
}

impl From<&PatternDist> for PatternDistJson {
    fn from(d: &PatternDist) -> Self {
        PatternDistJson {
            window: d.window().elements().iter().map(element_to_json).collect(),
            alphabet: d.alphabet().to_vec(),
            probs: d
                .probs()
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(i, &p)| (d.pattern_string(i), p))
                .collect(),
        }
    }
}

/// Parse with the path of the first offending field in the error.
pub fn from_json_str<T: serde::de::DeserializeOwned>(s: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(s);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let msg = e.into_inner().to_string();
        // unknown fields are reported at their parent
        let unknown = msg
            .strip_prefix("unknown field `")
            .and_then(|rest| rest.split('`').next())
            .map(str::to_string);
        let field = match (path.as_str(), unknown) {
            (".", Some(f)) => f,
            (p, Some(f)) if !p.ends_with(&f) => format!("{path}.{f}"),
            (".", None) | ("?", None) => "json".to_string(),
            _ => path,
        };
        Error::invalid(field, msg)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::default_alphabet;
    use crate::sofic::{block_sum, cyclic_approximation, folner_partial_action, torus_approximation};

    fn roundtrip_sofic(s: &SoficMap) {
        let json = serde_json::to_string(&SoficJson::from(s)).unwrap();
        let back: SoficJson = from_json_str(&json).unwrap();
        assert_eq!(&back.to_sofic().unwrap(), s);
    }

    #[test]
    fn groups_roundtrip() {
        for g in [
            GroupSpec::integer_line(),
            GroupSpec::integer_lattice(3).unwrap(),
            GroupSpec::cyclic_group(5).unwrap(),
        ] {
            let json = serde_json::to_string(&GroupJson::from(&g)).unwrap();
            let back: GroupJson = from_json_str(&json).unwrap();
            assert_eq!(back.to_spec().unwrap(), g);
        }
        let j: GroupJson = from_json_str(r#"{"kind":"integer_lattice","d":2}"#).unwrap();
        assert_eq!(j.to_spec().unwrap(), GroupSpec::integer_lattice(2).unwrap());
        let j: GroupJson = from_json_str(r#"{"kind":"integer_line","d":2}"#).unwrap();
        assert!(j.to_spec().is_err());
    }

    #[test]
    fn sofic_maps_roundtrip() {
        let z = GroupSpec::integer_line();
        let c = cyclic_approximation(5).unwrap();
        roundtrip_sofic(&c);
        roundtrip_sofic(&torus_approximation(&GroupSpec::integer_lattice(2).unwrap(), &[2, 3]).unwrap());
        let f = crate::group::folner_box(&z, 4).unwrap();
        roundtrip_sofic(&folner_partial_action(&z, &f).unwrap());
        roundtrip_sofic(&block_sum(&[c.clone(), cyclic_approximation(3).unwrap()], &[1, 2]).unwrap());
        let ex = SoficMap::explicit(
            z,
            vec![(GroupElement::Int(2), Perm::from_one_based(&[2, 3, 1]).unwrap())],
        )
        .unwrap();
        roundtrip_sofic(&ex);
    }

    #[test]
    fn sofic_json_shape() {
        let s: SoficJson = from_json_str(
            r#"{"m":3,"group":{"kind":"integer_line"},"eval_mode":"word_product",
                "generators":[{"element":1,"perm":[2,3,1]},{"element":-1,"perm":[3,1,2]}]}"#,
        )
        .unwrap();
        let sigma = s.to_sofic().unwrap();
        assert_eq!(sigma.eval(&GroupElement::Int(2)).unwrap().to_one_based(), vec![3, 1, 2]);
        let bad: SoficJson = from_json_str(
            r#"{"m":4,"group":{"kind":"integer_line"},"eval_mode":"word_product",
                "generators":[{"element":1,"perm":[2,3,1]},{"element":-1,"perm":[3,1,2]}]}"#,
        )
        .unwrap();
        assert!(bad.to_sofic().is_err());
    }

    #[test]
    fn processes_roundtrip() {
        let b = Process::bernoulli_z(&[0.3, 0.7]).unwrap();
        let m = Process::symmetric_markov(0.3).unwrap();
        let prod = product(&b, &m).unwrap();
        let beta: BTreeMap<String, String> = prod.alphabet().iter().map(|s| (s.clone(), s[1..2].to_string())).collect();
        let fac = factor_by_names(&prod, &beta).unwrap();
        let blk = Process::block_iid(default_alphabet(2), 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        for p in [b, m, prod, fac, blk] {
            let json = serde_json::to_string(&ProcessJson::from(&p)).unwrap();
            let back: ProcessJson = from_json_str(&json).unwrap();
            assert_eq!(back.to_process().unwrap(), p, "{json}");
        }
    }

    #[test]
    fn block_iid_from_pairs() {
        let p: ProcessJson = from_json_str(
            r#"{"kind":"block_iid","alphabet":["a","b"],"block":2,"nu":[["a|b",0.5],["b|a",0.5]]}"#,
        )
        .unwrap();
        let p = p.to_process().unwrap();
        match p.kind() {
            ProcessKind::BlockIid { nu, .. } => assert_eq!(nu, &vec![0.0, 0.5, 0.5, 0.0]),
            _ => panic!(),
        }
    }

    #[test]
    fn pattern_dist_roundtrip() {
        let p = Process::symmetric_markov(0.3).unwrap();
        let d = p.local_statistics(&Window::from_ints(&[0, 2]).unwrap()).unwrap();
        let json = serde_json::to_value(PatternDistJson::from(&d)).unwrap();
        assert_eq!(json["probs"][0][0], "0|0");
        let back: PatternDistJson = serde_json::from_value(json).unwrap();
        assert_eq!(back.to_dist(p.group()).unwrap(), d);
    }

    #[test]
    fn errors_name_the_field() {
        let e = from_json_str::<ProcessJson>(r#"{"kind":"markov","alphabet":["0","1"],"transition":[[1,0],[0,"x"]],"stationary":[0.5,0.5]}"#)
            .unwrap_err();
        match e {
            Error::Invalid { field, .. } => assert_eq!(field, "transition[1][1]"),
            other => panic!("{other}"),
        }
        assert!(from_json_str::<ProcessJson>(r#"{"kind":"poisson"}"#).is_err());
        match from_json_str::<ProcessJson>(r#"{"kind":"product","left":{"kind":"bernoulli","omgea":[1]}}"#) {
            Err(Error::Invalid { field, .. }) => assert_eq!(field, "left.omgea"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn windows_from_radius_or_list() {
        let z = GroupSpec::integer_line();
        let w: WindowJson = from_json_str(r#"{"radius":1}"#).unwrap();
        assert_eq!(w.to_window(&z).unwrap(), Window::from_ints(&[-1, 0, 1]).unwrap());
        let w: WindowJson = from_json_str("[2,0]").unwrap();
        assert_eq!(w.to_window(&z).unwrap(), Window::from_ints(&[0, 2]).unwrap());
    }
}
