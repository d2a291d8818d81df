//! Experiment configuration, `schema: 1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sofic_core::entropy::{BlockMeasure, CountMethod};
use sofic_core::group::{folner_box, GroupElement, GroupSpec};
use sofic_core::schema::{element_from_json, GroupJson, ProcessJson, SoficJson, WindowJson};
use sofic_core::sofic::{
    block_sum, cyclic_approximation, folner_partial_action, regular_approximation, torus_approximation,
};
use sofic_core::{Error, Process, RandomSoficApprox, Result, SoficMap, Window};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Classical,
    SoficCount,
    SoficMc,
    Defects,
    BlockEntropy,
    Relative,
    Compare,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Classical => "classical",
            Kind::SoficCount => "sofic-count",
            Kind::SoficMc => "sofic-mc",
            Kind::Defects => "defects",
            Kind::BlockEntropy => "block-entropy",
            Kind::Relative => "relative",
            Kind::Compare => "compare",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema: u32,
    #[serde(default)]
    pub kind: Option<Kind>,
    #[serde(default)]
    pub process: Option<ProcessJson>,
    /// Group for `defects` when no process is given; defaults to ℤ.
    #[serde(default)]
    pub group: Option<GroupJson>,
    #[serde(default)]
    pub sofic: Option<SoficPlan>,
    #[serde(default)]
    pub windows: Option<Vec<WindowJson>>,
    #[serde(default)]
    pub eps: Option<Vec<f64>>,
    #[serde(default)]
    pub method: Option<CountMethod>,
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub samples: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Reference rate for the residual column, in nats.
    #[serde(default)]
    pub target: Option<f64>,
    /// Symbol map for `relative`, inner name → factor name.
    #[serde(default)]
    pub beta: Option<BTreeMap<String, String>>,
    #[serde(default)]
    pub pairs: Option<Vec<(Value, Value)>>,
    #[serde(default)]
    pub distinct: Option<Vec<(Value, Value)>>,
    #[serde(default)]
    pub atoms: Option<Vec<BlockAtom>>,
    #[serde(default)]
    pub good_function: Option<GoodFunction>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Cyclic,
    Torus,
    Folner,
    Regular,
    Explicit,
    BlockSum,
    Random,
}

/// How to build the sofic maps of an experiment.
///
/// * `cyclic`: `m` list
/// * `torus`: `dims` list (one side-length vector per map), over ℤᵈ with `d = dims[i].len()`
/// * `folner`: `n` list of box sizes, over the process group
/// * `regular`: the process group acting on itself (finite groups)
/// * `explicit`: `maps`
/// * `block_sum`: `parts` (each a single-map plan) and `multiplicities`
/// * `random`: `atoms` of `{sofic, weight}`, each a single-map plan
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoficPlan {
    pub construction: Construction,
    #[serde(default)]
    pub m: Option<Vec<usize>>,
    #[serde(default)]
    pub dims: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub n: Option<Vec<usize>>,
    #[serde(default)]
    pub maps: Option<Vec<SoficJson>>,
    #[serde(default)]
    pub parts: Option<Vec<SoficPlan>>,
    #[serde(default)]
    pub multiplicities: Option<Vec<usize>>,
    #[serde(default)]
    pub atoms: Option<Vec<RandomAtom>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomAtom {
    pub sofic: SoficPlan,
    pub weight: f64,
}

/// A block measure on `A^[1, m]` with its weight.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockAtom {
    pub weight: f64,
    pub alphabet: Vec<String>,
    pub m: usize,
    /// `[[pattern, prob], …]`, symbols joined by `|`.
    pub probs: Vec<(String, f64)>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodFunction {
    pub d: usize,
    pub k: Vec<usize>,
    /// Defaults to `k·d·m` for each `k`.
    #[serde(default)]
    pub m_n: Option<Vec<usize>>,
}

fn need<'a, T>(x: &'a Option<T>, field: &str, kind: &str) -> Result<&'a T> {
    x.as_ref()
        .ok_or_else(|| Error::Invalid {
            field: field.to_string(),
            reason: format!("required for {kind}"),
        })
}

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let cfg: Config = sofic_core::schema::from_json_str(text)?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(invalid("schema", format!("unsupported schema {}, expected {SCHEMA_VERSION}", cfg.schema)));
        }
        Ok(cfg)
    }

    /// The experiment kind, reconciling the config with a subcommand.
    pub fn resolve_kind(&self, forced: Option<Kind>) -> Result<Kind> {
        match (self.kind, forced) {
            (Some(a), Some(b)) if a != b => Err(invalid(
                "kind",
                format!("config kind {} does not match subcommand {}", a.name(), b.name()),
            )),
            (Some(a), _) => Ok(a),
            (None, Some(b)) => Ok(b),
            (None, None) => Err(invalid("kind", "missing; set it in the config or use a subcommand")),
        }
    }

    pub fn process(&self, kind: Kind) -> Result<Process> {
        need(&self.process, "process", kind.name())?
            .to_process()
            .map_err(|e| prefix("process", e))
    }

    /// The group of the process if there is one, else `group`, else ℤ.
    pub fn group(&self, kind: Kind) -> Result<GroupSpec> {
        if self.process.is_some() {
            return Ok(self.process(kind)?.group().clone());
        }
        match &self.group {
            Some(g) => g.to_spec().map_err(|e| prefix("group", e)),
            None => Ok(GroupSpec::integer_line()),
        }
    }

    pub fn windows(&self, kind: Kind, group: &GroupSpec) -> Result<Vec<Window>> {
        need(&self.windows, "windows", kind.name())?
            .iter()
            .enumerate()
            .map(|(i, w)| w.to_window(group).map_err(|e| prefix(&format!("windows[{i}]"), e)))
            .collect()
    }

    pub fn eps(&self, kind: Kind) -> Result<Vec<f64>> {
        let eps = need(&self.eps, "eps", kind.name())?.clone();
        if eps.iter().any(|e| !e.is_finite() || *e <= 0.0) {
            return Err(invalid("eps", "every eps must be a positive number"));
        }
        Ok(eps)
    }

    pub fn n_max(&self, kind: Kind) -> Result<usize> {
        let n = *need(&self.n_max, "n_max", kind.name())?;
        if n == 0 {
            return Err(invalid("n_max", "must be at least 1"));
        }
        Ok(n)
    }

    pub fn sofic_maps(&self, kind: Kind, group: &GroupSpec) -> Result<Vec<SoficMap>> {
        need(&self.sofic, "sofic", kind.name())?
            .build(group)
            .map_err(|e| prefix("sofic", e))
    }

    pub fn random(&self, kind: Kind, group: &GroupSpec) -> Result<Option<RandomSoficApprox>> {
        let plan = need(&self.sofic, "sofic", kind.name())?;
        match plan.construction {
            Construction::Random => plan.build_random(group).map(Some).map_err(|e| prefix("sofic", e)),
            _ => Ok(None),
        }
    }

    pub fn element_pairs(
        &self,
        field: &str,
        group: &GroupSpec,
    ) -> Result<Vec<(GroupElement, GroupElement)>> {
        let list = match field {
            "pairs" => &self.pairs,
            _ => &self.distinct,
        };
        list.as_deref()
            .unwrap_or(&[])
            .iter()
            .enumerate()
            .map(|(i, (g, h))| {
                let f = |v: &Value, j: usize| {
                    element_from_json(group, v).map_err(|e| prefix(&format!("{field}[{i}][{j}]"), e))
                };
                Ok((f(g, 0)?, f(h, 1)?))
            })
            .collect()
    }

    pub fn block_atoms(&self) -> Result<Option<Vec<(f64, BlockMeasure)>>> {
        let Some(atoms) = &self.atoms else {
            return Ok(None);
        };
        atoms
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let json = sofic_core::schema::PatternDistJson {
                    window: (1..=a.m as i64).map(Value::from).collect(),
                    alphabet: a.alphabet.clone(),
                    probs: a.probs.clone(),
                };
                let measure = json
                    .to_dist(&GroupSpec::integer_line())
                    .and_then(BlockMeasure::from_dist)
                    .map_err(|e| prefix(&format!("atoms[{i}]"), e))?;
                Ok((a.weight, measure))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

/// Puts `outer` in front of the field an inner error names.
pub fn prefix(outer: &str, e: Error) -> Error {
    match e {
        Error::Invalid { field, reason } => Error::Invalid {
            field: if field.starts_with('[') {
                format!("{outer}{field}")
            } else {
                format!("{outer}.{field}")
            },
            reason,
        },
        other => other,
    }
}

impl SoficPlan {
    pub fn build(&self, group: &GroupSpec) -> Result<Vec<SoficMap>> {
        match self.construction {
            Construction::Cyclic => {
                if !group.is_integer_line() {
                    return Err(invalid("construction", "cyclic approximations act on Z"));
                }
                need(&self.m, "m", "cyclic")?
                    .iter()
                    .map(|&m| cyclic_approximation(m))
                    .collect()
            }
            Construction::Torus => need(&self.dims, "dims", "torus")?
                .iter()
                .map(|dims| torus_approximation(group, dims))
                .collect(),
            Construction::Folner => need(&self.n, "n", "folner")?
                .iter()
                .map(|&n| folner_partial_action(group, &folner_box(group, n)?))
                .collect(),
            Construction::Regular => Ok(vec![regular_approximation(group)?]),
            Construction::Explicit => need(&self.maps, "maps", "explicit")?
                .iter()
                .enumerate()
                .map(|(i, j)| {
                    let s = j.to_sofic().map_err(|e| prefix(&format!("maps[{i}]"), e))?;
                    if s.group() != group {
                        return Err(Error::GroupMismatch(format!("maps[{i}] acts on {}", s.group().name())));
                    }
                    Ok(s)
                })
                .collect(),
            Construction::BlockSum => {
                let parts = need(&self.parts, "parts", "block_sum")?
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p.single(group).map_err(|e| prefix(&format!("parts[{i}]"), e)))
                    .collect::<Result<Vec<_>>>()?;
                let mults = need(&self.multiplicities, "multiplicities", "block_sum")?;
                Ok(vec![block_sum(&parts, mults)?])
            }
            Construction::Random => Err(invalid("construction", "random approximations are only used by defects")),
        }
    }

    fn single(&self, group: &GroupSpec) -> Result<SoficMap> {
        let mut maps = self.build(group)?;
        if maps.len() != 1 {
            return Err(invalid("construction", "exactly one map is required here"));
        }
        Ok(maps.remove(0))
    }

    fn build_random(&self, group: &GroupSpec) -> Result<RandomSoficApprox> {
        let atoms = need(&self.atoms, "atoms", "random")?
            .iter()
            .enumerate()
            .map(|(i, a)| Ok((a.sofic.single(group).map_err(|e| prefix(&format!("atoms[{i}].sofic"), e))?, a.weight)))
            .collect::<Result<Vec<_>>>()?;
        RandomSoficApprox::new(atoms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_reconciliation() {
        let c = Config::parse(r#"{"schema":1,"kind":"classical"}"#).unwrap();
        assert_eq!(c.resolve_kind(None).unwrap(), Kind::Classical);
        assert!(c.resolve_kind(Some(Kind::Compare)).is_err());
        let c = Config::parse(r#"{"schema":1}"#).unwrap();
        assert!(c.resolve_kind(None).is_err());
        assert_eq!(c.resolve_kind(Some(Kind::SoficMc)).unwrap(), Kind::SoficMc);
    }

    #[test]
    fn schema_and_fields_checked() {
        assert!(Config::parse(r#"{"schema":2}"#).is_err());
        match Config::parse(r#"{"schema":1,"eps":[0.1,"x"]}"#) {
            Err(Error::Invalid { field, .. }) => assert_eq!(field, "eps[1]"),
            other => panic!("{other:?}"),
        }
        match Config::parse(r#"{"schema":1,"colour":1}"#) {
            Err(Error::Invalid { field, .. }) => assert_eq!(field, "colour"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn plans_build() {
        let z = GroupSpec::integer_line();
        let p: SoficPlan = serde_json::from_str(r#"{"construction":"cyclic","m":[3,5]}"#).unwrap();
        assert_eq!(p.build(&z).unwrap().iter().map(SoficMap::m).collect::<Vec<_>>(), vec![3, 5]);
        let p: SoficPlan = serde_json::from_str(
            r#"{"construction":"block_sum","parts":[{"construction":"cyclic","m":[2]},{"construction":"cyclic","m":[3]}],"multiplicities":[2,1]}"#,
        )
        .unwrap();
        assert_eq!(p.build(&z).unwrap()[0].m(), 7);
        let p: SoficPlan = serde_json::from_str(r#"{"construction":"folner","n":[4]}"#).unwrap();
        assert_eq!(p.build(&z).unwrap()[0].m(), 4);
    }
}
