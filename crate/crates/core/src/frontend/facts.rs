//! Persistent, language-neutral form of a [`DesignModel`]: a JSON "facts"
//! file. Saving is deterministic (fixed key order, arrays sorted by id), and
//! `load(save(m))` reproduces `m` exactly for every valid model, so the
//! format doubles as an interchange point for front ends of other languages.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{
    AttributeEntity, ClassEntity, DesignModel, Diagnostic, EntityId, MethodEntity, Visibility,
};

pub const FACTS_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FactsError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// The file does not match the facts schema.
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    /// The file matches the schema but describes an invalid model.
    #[error("{path}: invalid model:{}", format_diagnostics(.diagnostics))]
    Model { path: String, diagnostics: Vec<Diagnostic> },
}

fn format_diagnostics(diagnostics: &[Diagnostic]) -> String {
    let mut out = String::new();
    for d in diagnostics {
        let _ = write!(out, "\n  {d}");
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactsFile {
    version: u32,
    classes: Vec<FactsClass>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactsClass {
    id: String,
    name: String,
    superclass: Option<String>,
    is_external: bool,
    attributes: Vec<FactsAttribute>,
    methods: Vec<FactsMethod>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactsAttribute {
    id: String,
    name: String,
    visibility: FactsVisibility,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactsMethod {
    id: String,
    name: String,
    visibility: FactsVisibility,
    cyclomatic: u32,
    statement_count: u32,
    accessor_of: Option<String>,
    calls: Vec<String>,
    accesses: Vec<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FactsVisibility {
    Public,
    Private,
}

impl From<Visibility> for FactsVisibility {
    fn from(v: Visibility) -> Self {
        match v {
            Visibility::Public => FactsVisibility::Public,
            Visibility::Private => FactsVisibility::Private,
        }
    }
}

impl From<FactsVisibility> for Visibility {
    fn from(v: FactsVisibility) -> Self {
        match v {
            FactsVisibility::Public => Visibility::Public,
            FactsVisibility::Private => Visibility::Private,
        }
    }
}

/// Render a model as facts JSON. Entities appear sorted by id; key order is
/// fixed, so equal models produce byte-identical output.
pub fn facts_json(model: &DesignModel) -> String {
    let classes = model
        .classes()
        .map(|class| {
            let mut attribute_ids: Vec<&EntityId> = class.attributes.iter().collect();
            attribute_ids.sort();
            let mut method_ids: Vec<&EntityId> = class.methods.iter().collect();
            method_ids.sort();
            FactsClass {
                id: class.id.as_str().to_string(),
                name: class.name.clone(),
                superclass: class.superclass.as_ref().map(|s| s.as_str().to_string()),
                is_external: class.is_external,
                attributes: attribute_ids
                    .into_iter()
                    .filter_map(|id| model.attribute(id))
                    .map(|attr| FactsAttribute {
                        id: attr.id.as_str().to_string(),
                        name: attr.name.clone(),
                        visibility: attr.visibility.into(),
                    })
                    .collect(),
                methods: method_ids
                    .into_iter()
                    .filter_map(|id| model.method(id))
                    .map(|method| FactsMethod {
                        id: method.id.as_str().to_string(),
                        name: method.name.clone(),
                        visibility: method.visibility.into(),
                        cyclomatic: method.cyclomatic,
                        statement_count: method.statement_count,
                        accessor_of: method.accessor_of.as_ref().map(|a| a.as_str().to_string()),
                        calls: method.calls.iter().map(|c| c.as_str().to_string()).collect(),
                        accesses: method.accesses.iter().map(|a| a.as_str().to_string()).collect(),
                    })
                    .collect(),
            }
        })
        .collect();
    let file = FactsFile { version: FACTS_VERSION, classes };
    let mut out = serde_json::to_string_pretty(&file).expect("facts serialization cannot fail");
    out.push('\n');
    out
}

pub fn save_facts(model: &DesignModel, path: impl AsRef<Path>) -> Result<(), FactsError> {
    let path = path.as_ref();
    std::fs::write(path, facts_json(model)).map_err(|source| FactsError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parse facts JSON into a model. The result is validated; a schema-level
/// problem is a [`FactsError::Schema`], a well-formed file describing a
/// broken model (dangling references, cycles, ...) is a [`FactsError::Model`].
pub fn facts_from_json(text: &str, origin: &str) -> Result<DesignModel, FactsError> {
    let schema_err = |message: String| FactsError::Schema { path: origin.to_string(), message };

    let file: FactsFile =
        serde_json::from_str(text).map_err(|e| schema_err(e.to_string()))?;
    if file.version != FACTS_VERSION {
        return Err(schema_err(format!(
            "field `version` must be {FACTS_VERSION}, got {}",
            file.version
        )));
    }

    let mut classes = BTreeMap::new();
    let mut methods = BTreeMap::new();
    let mut attributes = BTreeMap::new();

    for class in &file.classes {
        let class_id = EntityId::from_raw(&class.id);
        let mut attribute_ids = Vec::new();
        let mut method_ids = Vec::new();

        for attr in &class.attributes {
            let attr_id = EntityId::from_raw(&attr.id);
            let owner = owner_from_member_id(&attr.id, "attr")
                .ok_or_else(|| schema_err(format!(
                    "field `id`: `{}` is not of the form attr:Class.name",
                    attr.id
                )))?;
            let entity = AttributeEntity {
                id: attr_id.clone(),
                name: attr.name.clone(),
                owner,
                visibility: attr.visibility.into(),
            };
            if attributes.insert(attr_id.clone(), entity).is_some() {
                return Err(schema_err(format!("duplicate attribute id `{}`", attr.id)));
            }
            attribute_ids.push(attr_id);
        }

        for method in &class.methods {
            if method.cyclomatic < 1 {
                return Err(schema_err(format!(
                    "field `cyclomatic` of `{}` must be >= 1",
                    method.id
                )));
            }
            let method_id = EntityId::from_raw(&method.id);
            let owner = owner_from_member_id(&method.id, "method")
                .ok_or_else(|| schema_err(format!(
                    "field `id`: `{}` is not of the form method:Class.name",
                    method.id
                )))?;
            let entity = MethodEntity {
                id: method_id.clone(),
                name: method.name.clone(),
                owner,
                visibility: method.visibility.into(),
                cyclomatic: method.cyclomatic,
                statement_count: method.statement_count,
                calls: method.calls.iter().map(EntityId::from_raw).collect::<BTreeSet<_>>(),
                accesses: method.accesses.iter().map(EntityId::from_raw).collect::<BTreeSet<_>>(),
                accessor_of: method.accessor_of.as_ref().map(EntityId::from_raw),
            };
            if methods.insert(method_id.clone(), entity).is_some() {
                return Err(schema_err(format!("duplicate method id `{}`", method.id)));
            }
            method_ids.push(method_id);
        }

        attribute_ids.sort();
        method_ids.sort();
        let entity = ClassEntity {
            id: class_id.clone(),
            name: class.name.clone(),
            superclass: class.superclass.as_ref().map(EntityId::from_raw),
            is_external: class.is_external,
            attributes: attribute_ids,
            methods: method_ids,
        };
        if classes.insert(class_id, entity).is_some() {
            return Err(schema_err(format!("duplicate class id `{}`", class.id)));
        }
    }

    let model = DesignModel::from_parts(classes, methods, attributes);
    let diagnostics = model.validate();
    if !diagnostics.is_empty() {
        return Err(FactsError::Model { path: origin.to_string(), diagnostics });
    }
    Ok(model)
}

pub fn load_facts(path: impl AsRef<Path>) -> Result<DesignModel, FactsError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| FactsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    facts_from_json(&text, &path.display().to_string())
}

/// Owning class id encoded in a member id, e.g. `method:A.m1` -> `class:A`.
fn owner_from_member_id(id: &str, expected_kind: &str) -> Option<EntityId> {
    let rest = id.strip_prefix(expected_kind)?.strip_prefix(':')?;
    let (class_name, member) = rest.rsplit_once('.')?;
    if class_name.is_empty() || member.is_empty() {
        return None;
    }
    Some(EntityId::class(class_name))
}
