//! Scenario files: JSON, UTF-8, integers only.
//!
//! A scenario is a single JSON object whose `kind` selects the pipeline:
//! `torus`, `presentation`, `periodic`, `equivariant`, or `gap`. Numbers
//! must be integers everywhere; float literals are rejected up front with
//! the offending path. See `docs/scenarios.md` for the documented schema
//! and one annotated example per kind.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use nielsen_core::group::{
    parse_free_word, reidemeister_classes_with_words, ClassId, Endomorphism, ExtraRelations,
    FiniteGroupTable, GroupModel, GroupWord, ReidemeisterClassSet,
};
use nielsen_core::trace::{ClassAction, FixedPointRecord};
use nielsen_core::IntMatrix;

use crate::error::{CliError, Result};

// ---------------------------------------------------------------------------
// JSON shapes
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum FiniteGroupJson {
    Cyclic { cyclic: usize },
    Symmetric { symmetric: usize },
    Table {
        table: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        names: Option<Vec<String>>,
    },
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum ModelJson {
    FreeAbelian { free_abelian: FreeAbelianJson },
    Finite { finite: FiniteGroupJson },
    Free { free: FreeJson },
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct FreeAbelianJson {
    pub rank: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct FreeJson {
    pub rank: usize,
    pub search_radius: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum EndoJson {
    /// The literal string "identity".
    Named(String),
    Matrix { matrix: Vec<Vec<i64>> },
    IndexMap { index_map: Vec<usize> },
    GeneratorImages { generator_images: Vec<String> },
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum ExtraJson {
    TwistedOnly,
    TwistedAndRhoOrbit,
}

/// A group word literal: an element index (finite models), a coordinate
/// vector (free abelian models), or a letter string (free models; `"1"`
/// is the empty word, `a`..`z` generators, `A`..`Z` inverses).
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum WordJson {
    Element(u64),
    Vector(Vec<i64>),
    Text(String),
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct RecordJson {
    pub id: String,
    pub index: i64,
    pub class_word: WordJson,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum ActionJson {
    Trivial { trivial: bool },
    Cyclic { cyclic: CyclicActionJson },
    Explicit { explicit: ExplicitActionJson },
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CyclicActionJson {
    pub order: usize,
    /// Pairs `[from, to]` of class words describing the generator.
    pub generator: Vec<(WordJson, WordJson)>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ExplicitActionJson {
    pub group: FiniteGroupJson,
    /// One list of `[from, to]` pairs per group element, in table order.
    pub maps: Vec<Vec<(WordJson, WordJson)>>,
}

/// Class-set data shared by presentation bodies, periodic components, and
/// equivariant stratum components.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ClassDataJson {
    pub group: ModelJson,
    pub phi: EndoJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<ExtraJson>,
    #[serde(default)]
    pub records: Vec<RecordJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionJson>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct PeriodicComponentJson {
    pub l: u64,
    #[serde(flatten)]
    pub data: ClassDataJson,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct EquivariantClassJson {
    pub class: usize,
    pub components: Vec<ClassDataJson>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct FullerGapJson {
    pub dim_m: i64,
    pub n: u64,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    Torus {
        matrix: Vec<Vec<i64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<u64>,
    },
    Presentation {
        #[serde(flatten)]
        data: ClassDataJson,
    },
    Periodic {
        n: u64,
        components: Vec<PeriodicComponentJson>,
    },
    Equivariant {
        group: FiniteGroupJson,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order_bound: Option<usize>,
        #[serde(default)]
        data: Vec<EquivariantClassJson>,
    },
    Gap {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strata: Option<BTreeMap<String, i64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inclusions: Option<Vec<(String, String)>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fuller: Option<FullerGapJson>,
    },
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Torus { .. } => "torus",
            Scenario::Presentation { .. } => "presentation",
            Scenario::Periodic { .. } => "periodic",
            Scenario::Equivariant { .. } => "equivariant",
            Scenario::Gap { .. } => "gap",
        }
    }

    /// The canonical JSON form of the scenario (sorted object keys).
    pub fn canonical_value(&self) -> Value {
        serde_json::to_value(self).expect("scenarios serialize")
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

fn reject_floats(value: &Value, path: &mut String, depth: usize) -> Result<()> {
    if depth > 64 {
        return Err(CliError::Input("scenario nesting exceeds depth 64".into()));
    }
    match value {
        Value::Number(n) => {
            if n.as_i64().is_none() && n.as_u64().is_none() {
                return Err(CliError::Schema {
                    path: path.clone(),
                    message: format!("float literal {n} (scenarios are integers-only)"),
                });
            }
            Ok(())
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                let len = path.len();
                path.push_str(&format!("[{i}]"));
                reject_floats(item, path, depth + 1)?;
                path.truncate(len);
            }
            Ok(())
        }
        Value::Object(map) => {
            for (key, item) in map {
                let len = path.len();
                path.push('.');
                path.push_str(key);
                reject_floats(item, path, depth + 1)?;
                path.truncate(len);
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

fn allowed_keys(kind: &str) -> Option<&'static [&'static str]> {
    match kind {
        "torus" => Some(&["kind", "matrix", "n"]),
        "presentation" => Some(&["kind", "group", "phi", "extra", "records", "action"]),
        "periodic" => Some(&["kind", "n", "components"]),
        "equivariant" => Some(&["kind", "group", "order_bound", "data"]),
        "gap" => Some(&["kind", "strata", "inclusions", "fuller"]),
        _ => None,
    }
}

/// Parses and validates scenario text. Floats are rejected, the top-level
/// key set is checked against the kind, and cross-references (divisors,
/// class indices, action domains) are validated.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let mut path = String::from("$");
    reject_floats(&value, &mut path, 0)?;

    let object = value.as_object().ok_or_else(|| CliError::Schema {
        path: "$".into(),
        message: "scenario must be a JSON object".into(),
    })?;
    let kind = object
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::Schema {
            path: "$.kind".into(),
            message: "missing or non-string \"kind\"".into(),
        })?;
    let allowed = allowed_keys(kind).ok_or_else(|| CliError::Schema {
        path: "$.kind".into(),
        message: format!(
            "unknown kind {kind:?} (expected torus, presentation, periodic, equivariant, or gap)"
        ),
    })?;
    for key in object.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(CliError::Schema {
                path: format!("$.{key}"),
                message: format!("unexpected field for kind {kind:?}"),
            });
        }
    }

    let scenario: Scenario = serde_path_to_error::deserialize(&value).map_err(|e| {
        CliError::Schema { path: format!("$.{}", e.path()), message: e.inner().to_string() }
    })?;
    validate(&scenario)?;
    Ok(scenario)
}

fn validate(scenario: &Scenario) -> Result<()> {
    match scenario {
        Scenario::Torus { matrix, n } => {
            let rows = matrix.len();
            if rows == 0 || matrix.iter().any(|r| r.len() != rows) {
                return Err(CliError::Input("torus matrix must be square and nonempty".into()));
            }
            if *n == Some(0) {
                return Err(CliError::Input("period n must be positive".into()));
            }
            Ok(())
        }
        Scenario::Presentation { .. } => Ok(()),
        Scenario::Periodic { n, components } => {
            if *n == 0 {
                return Err(CliError::Input("period n must be positive".into()));
            }
            let mut seen = Vec::new();
            for component in components {
                if *n % component.l != 0 || component.l == 0 {
                    return Err(CliError::Input(format!(
                        "component iterate {} does not divide n = {n}",
                        component.l
                    )));
                }
                if seen.contains(&component.l) {
                    return Err(CliError::Input(format!(
                        "duplicate component for iterate {}",
                        component.l
                    )));
                }
                seen.push(component.l);
            }
            for divisor in nielsen_core::fuller::divisors(*n) {
                if !seen.contains(&divisor) {
                    return Err(CliError::Input(format!(
                        "missing component for divisor {divisor}"
                    )));
                }
            }
            Ok(())
        }
        Scenario::Equivariant { data, .. } => {
            let mut seen = Vec::new();
            for entry in data {
                if seen.contains(&entry.class) {
                    return Err(CliError::Input(format!(
                        "duplicate data for subgroup class {}",
                        entry.class
                    )));
                }
                seen.push(entry.class);
            }
            Ok(())
        }
        Scenario::Gap { strata, inclusions, fuller } => {
            let explicit = strata.is_some() || inclusions.is_some();
            match (explicit, fuller.is_some()) {
                (true, true) => Err(CliError::Input(
                    "gap scenario takes either explicit strata or a fuller block, not both".into(),
                )),
                (false, false) => Err(CliError::Input(
                    "gap scenario needs strata dimensions or a fuller block".into(),
                )),
                _ => {
                    if let Some(f) = fuller {
                        if f.n == 0 {
                            return Err(CliError::Input("fuller period n must be positive".into()));
                        }
                    }
                    if strata.is_none() && inclusions.is_some() {
                        return Err(CliError::Input(
                            "inclusions were supplied without strata dimensions".into(),
                        ));
                    }
                    Ok(())
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Conversion to core types
// ---------------------------------------------------------------------------

pub fn build_finite_group(json: &FiniteGroupJson) -> Result<FiniteGroupTable> {
    match json {
        FiniteGroupJson::Cyclic { cyclic } => {
            if *cyclic == 0 {
                return Err(CliError::Input("cyclic group order must be positive".into()));
            }
            Ok(FiniteGroupTable::cyclic(*cyclic))
        }
        FiniteGroupJson::Symmetric { symmetric } => {
            if !(1..=5).contains(symmetric) {
                return Err(CliError::Input("symmetric groups are supported for n in 1..=5".into()));
            }
            Ok(FiniteGroupTable::symmetric(*symmetric))
        }
        FiniteGroupJson::Table { table, names } => {
            Ok(FiniteGroupTable::new(table.clone(), names.clone())?)
        }
    }
}

pub fn build_model(json: &ModelJson) -> Result<GroupModel> {
    match json {
        ModelJson::FreeAbelian { free_abelian } => {
            Ok(GroupModel::FreeAbelian { rank: free_abelian.rank })
        }
        ModelJson::Finite { finite } => Ok(GroupModel::Finite(build_finite_group(finite)?)),
        ModelJson::Free { free } => {
            if free.rank > 26 {
                return Err(CliError::Input(
                    "free models in scenarios are limited to rank 26 (letters a..z)".into(),
                ));
            }
            if free.search_radius == 0 {
                return Err(CliError::Input("search_radius must be positive".into()));
            }
            Ok(GroupModel::Free { rank: free.rank, search_radius: free.search_radius })
        }
    }
}

pub fn build_endomorphism(model: &GroupModel, json: &EndoJson) -> Result<Endomorphism> {
    match json {
        EndoJson::Named(name) if name == "identity" => Ok(Endomorphism::identity_for(model)),
        EndoJson::Named(name) => {
            Err(CliError::Input(format!("unknown endomorphism keyword {name:?}")))
        }
        EndoJson::Matrix { matrix } => Ok(Endomorphism::Matrix(IntMatrix::from_rows(matrix)?)),
        EndoJson::IndexMap { index_map } => Ok(Endomorphism::IndexMap(index_map.clone())),
        EndoJson::GeneratorImages { generator_images } => {
            let GroupModel::Free { rank, .. } = model else {
                return Err(CliError::Input(
                    "generator_images endomorphisms require a free model".into(),
                ));
            };
            let images = generator_images
                .iter()
                .map(|s| parse_free_word(s, *rank))
                .collect::<nielsen_core::Result<Vec<_>>>()?;
            Ok(Endomorphism::GeneratorImages(images))
        }
    }
}

pub fn build_word(model: &GroupModel, json: &WordJson) -> Result<GroupWord> {
    let word = match (model, json) {
        (GroupModel::FreeAbelian { .. }, WordJson::Vector(v)) => GroupWord::Vector(v.clone()),
        (GroupModel::Finite(_), WordJson::Element(i)) => GroupWord::Element(*i as usize),
        (GroupModel::Finite(table), WordJson::Text(name)) => {
            let index = table
                .element_names()
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| CliError::Input(format!("unknown element name {name:?}")))?;
            GroupWord::Element(index)
        }
        (GroupModel::Free { rank, .. }, WordJson::Text(s)) => {
            GroupWord::Letters(parse_free_word(s, *rank)?)
        }
        _ => {
            return Err(CliError::Input(format!(
                "word {json:?} does not match the group model"
            )))
        }
    };
    model.validate_word(&word)?;
    Ok(word)
}

fn extra_relations(extra: Option<ExtraJson>) -> ExtraRelations {
    match extra {
        None | Some(ExtraJson::TwistedOnly) => ExtraRelations::TwistedOnly,
        Some(ExtraJson::TwistedAndRhoOrbit) => ExtraRelations::TwistedAndRhoOrbit,
    }
}

/// Core data assembled from one [`ClassDataJson`] block.
pub struct CoreClassData {
    pub class_set: Arc<ReidemeisterClassSet>,
    pub records: Vec<FixedPointRecord>,
    pub action: Option<ClassAction>,
}

pub fn build_class_data(json: &ClassDataJson) -> Result<CoreClassData> {
    let model = build_model(&json.group)?;
    let phi = build_endomorphism(&model, &json.phi)?;
    let words = json
        .records
        .iter()
        .map(|r| build_word(&model, &r.class_word))
        .collect::<Result<Vec<_>>>()?;
    let class_set = Arc::new(reidemeister_classes_with_words(
        &model,
        &phi,
        extra_relations(json.extra),
        &words,
    )?);
    let records: Vec<FixedPointRecord> = json
        .records
        .iter()
        .zip(words)
        .map(|(r, word)| FixedPointRecord::new(r.id.clone(), r.index, word))
        .collect();
    let action = match &json.action {
        None => None,
        Some(action_json) => Some(build_action(&model, &class_set, &records, action_json)?),
    };
    Ok(CoreClassData { class_set, records, action })
}

/// The class ids an action must cover: every enumerated (or known) class
/// plus the classes of the supplied records.
fn action_domain(
    class_set: &Arc<ReidemeisterClassSet>,
    records: &[FixedPointRecord],
) -> Result<Vec<ClassId>> {
    let mut ids: Vec<ClassId> = class_set.known_ids().to_vec();
    for record in records {
        ids.push(class_set.class_of(&record.class_word)?.id().clone());
    }
    ids.sort();
    ids.dedup();
    Ok(ids)
}

fn resolve_pairs(
    model: &GroupModel,
    class_set: &Arc<ReidemeisterClassSet>,
    pairs: &[(WordJson, WordJson)],
) -> Result<BTreeMap<ClassId, ClassId>> {
    let mut out = BTreeMap::new();
    for (from, to) in pairs {
        let from_word = build_word(model, from)?;
        let to_word = build_word(model, to)?;
        let from_id = class_set.class_of(&from_word)?.id().clone();
        let to_id = class_set.class_of(&to_word)?.id().clone();
        if out.insert(from_id, to_id).is_some() {
            return Err(CliError::Input(format!(
                "action maps the class of {from:?} twice"
            )));
        }
    }
    Ok(out)
}

pub fn build_action(
    model: &GroupModel,
    class_set: &Arc<ReidemeisterClassSet>,
    records: &[FixedPointRecord],
    json: &ActionJson,
) -> Result<ClassAction> {
    let domain = action_domain(class_set, records)?;
    let action = match json {
        ActionJson::Trivial { trivial } => {
            if !trivial {
                return Err(CliError::Input("\"trivial\": false is not an action".into()));
            }
            ClassAction::trivial(FiniteGroupTable::cyclic(1), &domain)
        }
        ActionJson::Cyclic { cyclic } => {
            if cyclic.order == 0 {
                return Err(CliError::Input("cyclic action order must be positive".into()));
            }
            let mut generator = resolve_pairs(model, class_set, &cyclic.generator)?;
            // classes not mentioned are fixed by the generator
            for id in &domain {
                generator.entry(id.clone()).or_insert_with(|| id.clone());
            }
            ClassAction::cyclic(cyclic.order, &generator)?
        }
        ActionJson::Explicit { explicit } => {
            let group = build_finite_group(&explicit.group)?;
            if explicit.maps.len() != group.order() {
                return Err(CliError::Input(format!(
                    "explicit action supplies {} maps for a group of order {}",
                    explicit.maps.len(),
                    group.order()
                )));
            }
            let maps = explicit
                .maps
                .iter()
                .map(|pairs| {
                    let mut map = resolve_pairs(model, class_set, pairs)?;
                    for id in &domain {
                        map.entry(id.clone()).or_insert_with(|| id.clone());
                    }
                    Ok(map)
                })
                .collect::<Result<Vec<_>>>()?;
            ClassAction::new(group, maps)?
        }
    };
    Ok(action)
}
