//! Declarative JSON configuration: graphs, table groups, base systems and
//! command parameters, resolved into validated objects with referential
//! integrity checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::enumerate::BallCap;
use crate::error::{Error, Result};
use crate::fingroup::{ElemId, FiniteGroup};
use crate::graph::{build_graph, Graph};
use crate::measure::{make_space, Cocycle, GroupAction, ProbSpace, SmiCocycleSystem};
use crate::rat::parse_rat;

/// Top-level config document.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub groups: BTreeMap<String, GroupSpec>,
    /// Source-side vertex group names.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub source_groups: BTreeMap<String, String>,
    /// Target-side vertex group names.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub target_groups: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub systems: BTreeMap<String, SystemSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extension: Option<ExtensionSpec>,
    /// Word for the `reduce` command.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub word: Option<WordSpec>,
    /// System pair for `compose`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compose: Option<[String; 2]>,
    /// System pair for `product`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub product: Option<[String; 2]>,
    /// Default system for single-system commands.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
}

/// Vertex/system group: cyclic of an order, or an explicit table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cyclic: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<ElemId>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

/// A base cocycle system: space, action and cocycle tables on generators.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub source: String,
    pub target: String,
    /// Vertex this system sits at, for graph extensions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex: Option<String>,
    /// Defaults to a single point of weight 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    /// Generator element -> (point -> point); missing generators act
    /// trivially.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub action: BTreeMap<String, BTreeMap<String, String>>,
    /// Generator element -> (point -> target element).
    pub cocycle: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub points: Vec<String>,
    pub weights: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionSpec {
    /// `free` or `graph`.
    pub kind: String,
    /// Base system name.
    pub base: String,
    /// Free factor group name (free extensions only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordSpec {
    /// `source` or `target`.
    #[serde(default = "default_side")]
    pub side: String,
    pub syllables: Vec<(String, String)>,
}

fn default_side() -> String {
    "source".into()
}

/// Command parameters; CLI flags override these.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Interior/view radius for balls and coverage.
    #[serde(default = "default_radius")]
    pub radius: usize,
    /// Word-length bound for disjointness sweeps.
    #[serde(default = "default_words")]
    pub words: usize,
    /// Ambient view radius for disjointness; defaults to `words + radius`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub view: Option<usize>,
    /// Orbit search radius for coverage; defaults to the displacement margin.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<usize>,
    /// Radii for growth records.
    #[serde(default = "default_radii")]
    pub radii: Vec<usize>,
    #[serde(default = "default_ball_cap")]
    pub ball_cap: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads for verification sweeps; 0 keeps the library default.
    #[serde(default)]
    pub jobs: usize,
}

fn default_radius() -> usize {
    2
}

fn default_words() -> usize {
    3
}

fn default_radii() -> Vec<usize> {
    vec![0, 1, 2, 3]
}

fn default_ball_cap() -> usize {
    crate::enumerate::DEFAULT_BALL_CAP
}

impl Default for Params {
    fn default() -> Self {
        Params {
            radius: default_radius(),
            words: default_words(),
            view: None,
            search: None,
            radii: default_radii(),
            ball_cap: default_ball_cap(),
            seed: 0,
            jobs: 0,
        }
    }
}

/// Parses a config document, reporting syntax errors with their position.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))
}

/// Serializes a config back to JSON.
pub fn serialize_config(cfg: &ConfigFile) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

/// A resolved base system together with its groups.
#[derive(Debug, Clone)]
pub struct ResolvedSystem {
    pub name: String,
    pub system: SmiCocycleSystem,
    pub vertex: Option<String>,
}

/// Everything a command needs, resolved and cross-checked.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ConfigFile,
    pub graph: Option<Graph>,
    pub groups: BTreeMap<String, FiniteGroup>,
    pub systems: BTreeMap<String, ResolvedSystem>,
}

impl ConfigFile {
    /// Resolves and validates the whole document.
    pub fn resolve(self) -> Result<Scenario> {
        let graph = match &self.graph {
            Some(spec) => {
                let edges: Vec<(&str, &str)> =
                    spec.edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                Some(build_graph(&spec.vertices.iter().map(|s| s.as_str()).collect::<Vec<_>>(), &edges)?)
            }
            None => None,
        };
        let mut groups = BTreeMap::new();
        for (name, spec) in &self.groups {
            let group = match (&spec.cyclic, &spec.table) {
                (Some(n), None) => FiniteGroup::cyclic(*n)?,
                (None, Some(table)) => FiniteGroup::from_table(table.clone(), spec.names.clone())?,
                _ => {
                    return Err(Error::Config(format!(
                        "group `{name}` must give exactly one of `cyclic` or `table`"
                    )))
                }
            };
            groups.insert(name.clone(), group);
        }
        let lookup_group = |name: &str| -> Result<FiniteGroup> {
            groups
                .get(name)
                .cloned()
                .ok_or_else(|| Error::DanglingReference { kind: "group".into(), name: name.into() })
        };
        for side in [&self.source_groups, &self.target_groups] {
            for (vertex, group) in side {
                if let Some(g) = &graph {
                    g.vertex_index(vertex)?;
                }
                lookup_group(group)?;
            }
        }
        let mut systems = BTreeMap::new();
        for (name, spec) in &self.systems {
            let source = lookup_group(&spec.source)?;
            let target = lookup_group(&spec.target)?;
            if let (Some(v), Some(g)) = (&spec.vertex, &graph) {
                g.vertex_index(v)?;
            }
            let space = match &spec.space {
                Some(s) => {
                    let weights = s.weights.iter().map(|w| parse_rat(w)).collect::<Result<_>>()?;
                    make_space(s.points.clone(), weights)?
                }
                None => ProbSpace::point(),
            };
            let system = build_system(name, &source, &target, space, spec)?;
            systems.insert(
                name.clone(),
                ResolvedSystem { name: name.clone(), system, vertex: spec.vertex.clone() },
            );
        }
        if let Some(ext) = &self.extension {
            if !systems.contains_key(&ext.base) {
                return Err(Error::DanglingReference { kind: "system".into(), name: ext.base.clone() });
            }
            match ext.kind.as_str() {
                "free" => {
                    let factor = ext.factor.as_deref().ok_or_else(|| {
                        Error::Config("free extension needs a `factor` group".into())
                    })?;
                    lookup_group(factor)?;
                }
                "graph" => {
                    if graph.is_none() {
                        return Err(Error::Config("graph extension needs a `graph`".into()));
                    }
                }
                other => {
                    return Err(Error::Config(format!(
                        "extension kind must be `free` or `graph`, got `{other}`"
                    )))
                }
            }
        }
        for pair in [&self.compose, &self.product].into_iter().flatten() {
            for name in pair {
                if !systems.contains_key(name) {
                    return Err(Error::DanglingReference { kind: "system".into(), name: name.clone() });
                }
            }
        }
        if let Some(name) = &self.system {
            if !systems.contains_key(name) {
                return Err(Error::DanglingReference { kind: "system".into(), name: name.clone() });
            }
        }
        Ok(Scenario { config: self, graph, groups, systems })
    }
}

fn build_system(
    name: &str,
    source: &FiniteGroup,
    target: &FiniteGroup,
    space: ProbSpace,
    spec: &SystemSpec,
) -> Result<SmiCocycleSystem> {
    let mut gens: Vec<ElemId> = Vec::new();
    for token in spec.cocycle.keys().chain(spec.action.keys()) {
        let e = source
            .resolve(token)
            .map_err(|_| Error::Config(format!("system `{name}`: unknown generator `{token}`")))?;
        if !gens.contains(&e) {
            gens.push(e);
        }
    }
    if spec.cocycle.is_empty() {
        return Err(Error::Config(format!("system `{name}` gives no cocycle generators")));
    }
    let mut action_rows: BTreeMap<ElemId, Vec<usize>> = BTreeMap::new();
    for &g in &gens {
        action_rows.insert(g, (0..space.len()).collect());
    }
    for (token, row) in &spec.action {
        let g = source.resolve(token)?;
        let images = action_rows.get_mut(&g).expect("generator registered");
        for (from, to) in row {
            images[space.index_of(from)?] = space.index_of(to)?;
        }
    }
    let action = GroupAction::from_generators(source.clone(), space.clone(), &action_rows)?;
    let mut cocycle_rows: BTreeMap<ElemId, Vec<ElemId>> = BTreeMap::new();
    for &g in &gens {
        cocycle_rows.insert(g, vec![0; space.len()]);
    }
    for (token, row) in &spec.cocycle {
        let g = source.resolve(token)?;
        let values = cocycle_rows.get_mut(&g).expect("generator registered");
        for (point, value) in row {
            let x = action.space().index_of(point)?;
            values[x] = target.resolve(value).map_err(|_| {
                Error::Config(format!(
                    "system `{name}`: cocycle value `{value}` is not in the target group"
                ))
            })?;
        }
    }
    let cocycle = Cocycle::from_generators(action, target.clone(), &cocycle_rows)?;
    Ok(SmiCocycleSystem::new(cocycle))
}

impl Scenario {
    pub fn ball_cap(&self) -> BallCap {
        BallCap(self.config.params.ball_cap)
    }

    pub fn group(&self, name: &str) -> Result<&FiniteGroup> {
        self.groups
            .get(name)
            .ok_or_else(|| Error::DanglingReference { kind: "group".into(), name: name.into() })
    }

    pub fn system(&self, name: &str) -> Result<&ResolvedSystem> {
        self.systems
            .get(name)
            .ok_or_else(|| Error::DanglingReference { kind: "system".into(), name: name.into() })
    }

    /// Vertex group lists for both sides of a graph extension.
    pub fn side_groups(&self) -> Result<(Vec<FiniteGroup>, Vec<FiniteGroup>)> {
        let graph = self
            .graph
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs a `graph`".into()))?;
        let mut source = Vec::new();
        let mut target = Vec::new();
        for v in 0..graph.vertex_count() {
            let name = graph.vertex_name(v);
            let s = self.source_group_name(name)?;
            let t = self.target_group_name(name)?;
            source.push(self.group(&s)?.clone());
            target.push(self.group(&t)?.clone());
        }
        Ok((source, target))
    }

    fn source_group_name(&self, vertex: &str) -> Result<String> {
        self.config
            .source_groups
            .get(vertex)
            .cloned()
            .ok_or_else(|| Error::DanglingReference {
                kind: "source group for vertex".into(),
                name: vertex.into(),
            })
    }

    fn target_group_name(&self, vertex: &str) -> Result<String> {
        // target side defaults to the source side where unspecified
        match self.config.target_groups.get(vertex) {
            Some(name) => Ok(name.clone()),
            None => self.source_group_name(vertex),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn minimal_config() -> &'static str {
        r#"{
            "graph": { "vertices": ["v1", "v2"], "edges": [["v1", "v2"]] },
            "groups": { "Z2": { "cyclic": 2 } },
            "source_groups": { "v1": "Z2", "v2": "Z2" },
            "systems": {
                "base": {
                    "source": "Z2", "target": "Z2",
                    "cocycle": { "t": { "x0": "t" } }
                }
            }
        }"#
    }

    #[test]
    fn parses_and_resolves_minimal() {
        let cfg = parse_config(minimal_config()).unwrap();
        let scenario = cfg.resolve().unwrap();
        assert!(scenario.graph.is_some());
        let sys = scenario.system("base").unwrap();
        assert!(sys.system.certified());
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_config("{ not json").unwrap_err();
        match err {
            Error::Json(msg) => assert!(msg.contains("line") || msg.contains("column")),
            other => panic!("expected json error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_a_schema_error() {
        let err = parse_config(r#"{ "graf": {} }"#).unwrap_err();
        assert!(matches!(err, Error::Json(_)));
    }

    #[test]
    fn cocycle_value_outside_target_group() {
        let text = r#"{
            "groups": { "Z2": { "cyclic": 2 }, "Z4": { "cyclic": 4 } },
            "systems": {
                "bad": {
                    "source": "Z2", "target": "Z2",
                    "cocycle": { "t": { "x0": "t3" } }
                }
            }
        }"#;
        let err = parse_config(text).unwrap().resolve().unwrap_err();
        match err {
            Error::Config(msg) => assert!(msg.contains("t3")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dangling_vertex_reference() {
        let text = r#"{
            "graph": { "vertices": ["v1"] },
            "groups": { "Z2": { "cyclic": 2 } },
            "source_groups": { "v9": "Z2" }
        }"#;
        let err = parse_config(text).unwrap().resolve().unwrap_err();
        assert!(matches!(err, Error::UnknownVertex(_)));
    }

    #[test]
    fn dangling_group_reference() {
        let text = r#"{
            "groups": { "Z2": { "cyclic": 2 } },
            "systems": {
                "s": { "source": "Z2", "target": "Z9", "cocycle": { "t": { "x0": "t" } } }
            }
        }"#;
        let err = parse_config(text).unwrap().resolve().unwrap_err();
        assert!(matches!(err, Error::DanglingReference { .. }));
    }

    #[test]
    fn round_trip_reparse_is_semantically_stable() {
        let cfg = parse_config(minimal_config()).unwrap();
        let text = serialize_config(&cfg);
        let cfg2 = parse_config(&text).unwrap();
        assert_eq!(serialize_config(&cfg2), text);
    }

    #[test]
    fn weighted_space_and_nontrivial_action() {
        let text = r#"{
            "groups": { "Z2": { "cyclic": 2 }, "Z4": { "cyclic": 4 } },
            "systems": {
                "swap": {
                    "source": "Z2", "target": "Z4",
                    "space": { "points": ["a", "b"], "weights": ["1/2", "1/2"] },
                    "action": { "t": { "a": "b", "b": "a" } },
                    "cocycle": { "t": { "a": "t", "b": "t3" } }
                }
            }
        }"#;
        let scenario = parse_config(text).unwrap().resolve().unwrap();
        let sys = &scenario.system("swap").unwrap().system;
        assert!(sys.certified());
        assert_eq!(sys.cocycle().value(1, 1), 3);
    }
}
