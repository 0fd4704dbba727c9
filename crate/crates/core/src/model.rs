//! The design meta-model: classes, methods and attributes of an analyzed
//! system, plus the relations (inheritance, calls, attribute accesses) that
//! every metric is computed from.
//!
//! A [`DesignModel`] is immutable once built; all queries are read-only and
//! safe to run from any number of threads. Models come either from the
//! MiniOO frontend ([`crate::frontend::build_model`]) or from a facts file
//! ([`crate::frontend::load_facts`]).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Entity kind, encoded as the prefix of every [`EntityId`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityKind {
    Class,
    Method,
    Attribute,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Class => "class",
            EntityKind::Method => "method",
            EntityKind::Attribute => "attr",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Opaque, model-wide unique identifier in the form `kind:QualifiedName`,
/// e.g. `class:A`, `method:A.m1`, `attr:A.x`. The qualified name of a member
/// encodes its owning class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(String);

impl EntityId {
    pub fn class(name: &str) -> Self {
        EntityId(format!("class:{name}"))
    }

    pub fn method(class: &str, name: &str) -> Self {
        EntityId(format!("method:{class}.{name}"))
    }

    pub fn attribute(class: &str, name: &str) -> Self {
        EntityId(format!("attr:{class}.{name}"))
    }

    /// Wrap a raw id string as read from a facts file. No validation here;
    /// [`DesignModel::validate`] flags ids that do not resolve.
    pub fn from_raw(raw: impl Into<String>) -> Self {
        EntityId(raw.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Kind according to the id prefix, if the prefix is well formed.
    pub fn kind(&self) -> Option<EntityKind> {
        let prefix = self.0.split(':').next()?;
        match prefix {
            "class" => Some(EntityKind::Class),
            "method" => Some(EntityKind::Method),
            "attr" => Some(EntityKind::Attribute),
            _ => None,
        }
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Member visibility. MiniOO has exactly two levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Visibility {
    Public,
    Private,
}

impl Visibility {
    pub fn as_str(self) -> &'static str {
        match self {
            Visibility::Public => "public",
            Visibility::Private => "private",
        }
    }
}

/// A class of the analyzed system.
///
/// Classes referenced but not declared (library types, unknown parameter
/// types) are materialized with `is_external = true`. External classes
/// participate in coupling metrics but never appear in metric tables or
/// suspect reports. Their member lists hold only opaque members created on
/// demand when a call or access could not be resolved to a declared class.
///
/// Member id lists are kept sorted so that structurally equal models compare
/// equal regardless of declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassEntity {
    pub id: EntityId,
    pub name: String,
    pub superclass: Option<EntityId>,
    pub is_external: bool,
    pub attributes: Vec<EntityId>,
    pub methods: Vec<EntityId>,
}

/// A method, together with everything the metrics need to know about its
/// body: decision-point complexity, statement count, outgoing call edges,
/// attribute accesses, and whether the body is a pure getter/setter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodEntity {
    pub id: EntityId,
    pub name: String,
    pub owner: EntityId,
    pub visibility: Visibility,
    /// 1 + number of decision points in the body; always >= 1.
    pub cyclomatic: u32,
    pub statement_count: u32,
    pub calls: BTreeSet<EntityId>,
    pub accesses: BTreeSet<EntityId>,
    /// Set when the body is exactly `return this.f;` or `this.f = p;` for
    /// the single parameter `p`; `f` must be an attribute of the owner.
    pub accessor_of: Option<EntityId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeEntity {
    pub id: EntityId,
    pub name: String,
    pub owner: EntityId,
    pub visibility: Visibility,
}

/// Errors raised by model queries.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown class id `{0}`")]
    UnknownClass(EntityId),
    #[error("unknown method id `{0}`")]
    UnknownMethod(EntityId),
    #[error("unknown attribute id `{0}`")]
    UnknownAttribute(EntityId),
}

/// One invariant violation found by [`DesignModel::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub entity: EntityId,
    pub kind: DiagnosticKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    /// Following superclass links from this class revisits a class.
    InheritanceCycle,
    /// The superclass id does not resolve to a class in the model.
    DanglingSuperclass(EntityId),
    /// A member's owner does not resolve to a class in the model.
    DanglingOwner(EntityId),
    /// A member's owner exists but does not list the member.
    UnlistedMember(EntityId),
    /// A class lists a member id that does not resolve.
    DanglingMember(EntityId),
    /// A call or access edge points at an id that does not resolve.
    DanglingReference(EntityId),
    /// Method cyclomatic complexity below 1.
    CyclomaticBelowOne,
    /// accessor_of names an attribute that is not an attribute of the owner.
    AccessorNotOwnAttribute(EntityId),
    /// Map key, id prefix and entity id disagree.
    MalformedId,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DiagnosticKind::InheritanceCycle => {
                write!(f, "{}: inheritance cycle", self.entity)
            }
            DiagnosticKind::DanglingSuperclass(s) => {
                write!(f, "{}: superclass `{s}` does not resolve", self.entity)
            }
            DiagnosticKind::DanglingOwner(o) => {
                write!(f, "{}: dangling owner `{o}`", self.entity)
            }
            DiagnosticKind::UnlistedMember(o) => {
                write!(f, "{}: owner `{o}` does not list this member", self.entity)
            }
            DiagnosticKind::DanglingMember(m) => {
                write!(f, "{}: listed member `{m}` does not resolve", self.entity)
            }
            DiagnosticKind::DanglingReference(r) => {
                write!(f, "{}: reference `{r}` does not resolve", self.entity)
            }
            DiagnosticKind::CyclomaticBelowOne => {
                write!(f, "{}: cyclomatic complexity must be >= 1", self.entity)
            }
            DiagnosticKind::AccessorNotOwnAttribute(a) => {
                write!(f, "{}: accessor target `{a}` is not an attribute of the owner", self.entity)
            }
            DiagnosticKind::MalformedId => {
                write!(f, "{}: malformed or inconsistent id", self.entity)
            }
        }
    }
}

/// Immutable graph of design entities and their relations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DesignModel {
    classes: BTreeMap<EntityId, ClassEntity>,
    methods: BTreeMap<EntityId, MethodEntity>,
    attributes: BTreeMap<EntityId, AttributeEntity>,
}

impl DesignModel {
    /// Assemble a model from its entity maps. Construction does not check
    /// invariants; call [`DesignModel::validate`] to obtain diagnostics.
    pub fn from_parts(
        classes: BTreeMap<EntityId, ClassEntity>,
        methods: BTreeMap<EntityId, MethodEntity>,
        attributes: BTreeMap<EntityId, AttributeEntity>,
    ) -> Self {
        DesignModel { classes, methods, attributes }
    }

    pub fn class(&self, id: &EntityId) -> Option<&ClassEntity> {
        self.classes.get(id)
    }

    pub fn method(&self, id: &EntityId) -> Option<&MethodEntity> {
        self.methods.get(id)
    }

    pub fn attribute(&self, id: &EntityId) -> Option<&AttributeEntity> {
        self.attributes.get(id)
    }

    /// All classes, in id order.
    pub fn classes(&self) -> impl Iterator<Item = &ClassEntity> {
        self.classes.values()
    }

    /// All methods, in id order.
    pub fn methods(&self) -> impl Iterator<Item = &MethodEntity> {
        self.methods.values()
    }

    /// All attributes, in id order.
    pub fn attributes(&self) -> impl Iterator<Item = &AttributeEntity> {
        self.attributes.values()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Superclass chain of `c`, from immediate parent to root, excluding `c`
    /// itself. Empty for root classes. On a cyclic model (rejected by
    /// `validate`) the walk stops at the first repeated class.
    pub fn ancestors(&self, c: &EntityId) -> Result<Vec<EntityId>, ModelError> {
        let mut current = self
            .classes
            .get(c)
            .ok_or_else(|| ModelError::UnknownClass(c.clone()))?;
        let mut seen: BTreeSet<&EntityId> = BTreeSet::new();
        seen.insert(&current.id);
        let mut chain = Vec::new();
        while let Some(parent_id) = &current.superclass {
            let Some(parent) = self.classes.get(parent_id) else { break };
            if !seen.insert(&parent.id) {
                break;
            }
            chain.push(parent_id.clone());
            current = parent;
        }
        Ok(chain)
    }

    /// Classes whose superclass is exactly `c` (immediate subclasses only).
    pub fn subclasses_of(&self, c: &EntityId) -> Result<BTreeSet<EntityId>, ModelError> {
        if !self.classes.contains_key(c) {
            return Err(ModelError::UnknownClass(c.clone()));
        }
        Ok(self
            .classes
            .values()
            .filter(|cls| cls.superclass.as_ref() == Some(c))
            .map(|cls| cls.id.clone())
            .collect())
    }

    /// Methods listed on `c` itself; inherited methods are never included
    /// (each method has exactly one declaration site).
    pub fn declared_methods(&self, c: &EntityId) -> Result<&[EntityId], ModelError> {
        self.classes
            .get(c)
            .map(|cls| cls.methods.as_slice())
            .ok_or_else(|| ModelError::UnknownClass(c.clone()))
    }

    /// Check every model invariant and return one diagnostic per violation.
    /// An empty result means the model is well formed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();

        for (key, class) in &self.classes {
            if *key != class.id || class.id != EntityId::class(&class.name) {
                diags.push(Diagnostic { entity: class.id.clone(), kind: DiagnosticKind::MalformedId });
            }
            if let Some(sup) = &class.superclass {
                if !self.classes.contains_key(sup) {
                    diags.push(Diagnostic {
                        entity: class.id.clone(),
                        kind: DiagnosticKind::DanglingSuperclass(sup.clone()),
                    });
                }
            }
            for attr_id in &class.attributes {
                match self.attributes.get(attr_id) {
                    Some(attr) if attr.owner == class.id => {}
                    Some(_) | None => diags.push(Diagnostic {
                        entity: class.id.clone(),
                        kind: DiagnosticKind::DanglingMember(attr_id.clone()),
                    }),
                }
            }
            for method_id in &class.methods {
                match self.methods.get(method_id) {
                    Some(m) if m.owner == class.id => {}
                    Some(_) | None => diags.push(Diagnostic {
                        entity: class.id.clone(),
                        kind: DiagnosticKind::DanglingMember(method_id.clone()),
                    }),
                }
            }
            if self.has_cycle(&class.id) {
                diags.push(Diagnostic {
                    entity: class.id.clone(),
                    kind: DiagnosticKind::InheritanceCycle,
                });
            }
        }

        for (key, method) in &self.methods {
            if *key != method.id || Some(&method.id) != owner_qualified_id(EntityKind::Method, &method.owner, &method.name).as_ref() {
                diags.push(Diagnostic { entity: method.id.clone(), kind: DiagnosticKind::MalformedId });
            }
            match self.classes.get(&method.owner) {
                None => diags.push(Diagnostic {
                    entity: method.id.clone(),
                    kind: DiagnosticKind::DanglingOwner(method.owner.clone()),
                }),
                Some(owner) if !owner.methods.contains(&method.id) => diags.push(Diagnostic {
                    entity: method.id.clone(),
                    kind: DiagnosticKind::UnlistedMember(method.owner.clone()),
                }),
                Some(_) => {}
            }
            if method.cyclomatic < 1 {
                diags.push(Diagnostic {
                    entity: method.id.clone(),
                    kind: DiagnosticKind::CyclomaticBelowOne,
                });
            }
            for callee in &method.calls {
                if !self.methods.contains_key(callee) {
                    diags.push(Diagnostic {
                        entity: method.id.clone(),
                        kind: DiagnosticKind::DanglingReference(callee.clone()),
                    });
                }
            }
            for accessed in &method.accesses {
                if !self.attributes.contains_key(accessed) {
                    diags.push(Diagnostic {
                        entity: method.id.clone(),
                        kind: DiagnosticKind::DanglingReference(accessed.clone()),
                    });
                }
            }
            if let Some(target) = &method.accessor_of {
                let owns = self
                    .attributes
                    .get(target)
                    .is_some_and(|attr| attr.owner == method.owner);
                if !owns {
                    diags.push(Diagnostic {
                        entity: method.id.clone(),
                        kind: DiagnosticKind::AccessorNotOwnAttribute(target.clone()),
                    });
                }
            }
        }

        for (key, attr) in &self.attributes {
            if *key != attr.id || Some(&attr.id) != owner_qualified_id(EntityKind::Attribute, &attr.owner, &attr.name).as_ref() {
                diags.push(Diagnostic { entity: attr.id.clone(), kind: DiagnosticKind::MalformedId });
            }
            match self.classes.get(&attr.owner) {
                None => diags.push(Diagnostic {
                    entity: attr.id.clone(),
                    kind: DiagnosticKind::DanglingOwner(attr.owner.clone()),
                }),
                Some(owner) if !owner.attributes.contains(&attr.id) => diags.push(Diagnostic {
                    entity: attr.id.clone(),
                    kind: DiagnosticKind::UnlistedMember(attr.owner.clone()),
                }),
                Some(_) => {}
            }
        }

        diags
    }

    /// True when following superclass links from `start` revisits a class.
    fn has_cycle(&self, start: &EntityId) -> bool {
        let mut seen = BTreeSet::new();
        seen.insert(start.clone());
        let mut current = start;
        loop {
            let Some(class) = self.classes.get(current) else { return false };
            let Some(parent) = &class.superclass else { return false };
            if !seen.insert(parent.clone()) {
                return true;
            }
            if !self.classes.contains_key(parent) {
                return false;
            }
            current = parent;
        }
    }
}

/// Member id implied by an owner id and a member name, e.g. owner `class:A`
/// and name `m1` imply `method:A.m1`. None when the owner id is not a class
/// id; `validate` reports the mismatch separately.
fn owner_qualified_id(kind: EntityKind, owner: &EntityId, name: &str) -> Option<EntityId> {
    let owner_name = owner.as_str().strip_prefix("class:")?;
    Some(match kind {
        EntityKind::Method => EntityId::method(owner_name, name),
        EntityKind::Attribute => EntityId::attribute(owner_name, name),
        EntityKind::Class => EntityId::class(name),
    })
}
