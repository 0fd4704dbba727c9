//! Object-oriented design metrics over a [`DesignModel`].
//!
//! Class metrics: WMC, DIT, NOC, CBO, RFC, LCOM, TCC, ATFD, NOPA.
//! Method metrics: CC, MLOC.
//!
//! Pinned readings of the ambiguous definitions:
//! - WMC weights methods by cyclomatic complexity.
//! - CBO counts efferent coupling only (classes this class uses); the
//!   original definition can also be read bidirectionally.
//! - RFC is the declared methods plus directly called methods, one call
//!   level deep, no transitive closure.
//! - LCOM is floored at zero; TCC of classes with fewer than two methods
//!   is 1.0 so that missing evidence never reads as incohesion.
//! - LCOM/TCC share only the class's own attributes and consider all
//!   declared methods regardless of visibility.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::model::{DesignModel, EntityId, EntityKind};

/// Identity of a metric. `CC` and `MLOC` are method metrics, everything
/// else is a class metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Cc,
    Mloc,
    Nopa,
    Wmc,
    Dit,
    Noc,
    Cbo,
    Rfc,
    Lcom,
    Tcc,
    Atfd,
}

pub const ALL_METRICS: [Metric; 11] = [
    Metric::Cc,
    Metric::Mloc,
    Metric::Nopa,
    Metric::Wmc,
    Metric::Dit,
    Metric::Noc,
    Metric::Cbo,
    Metric::Rfc,
    Metric::Lcom,
    Metric::Tcc,
    Metric::Atfd,
];

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Cc => "CC",
            Metric::Mloc => "MLOC",
            Metric::Nopa => "NOPA",
            Metric::Wmc => "WMC",
            Metric::Dit => "DIT",
            Metric::Noc => "NOC",
            Metric::Cbo => "CBO",
            Metric::Rfc => "RFC",
            Metric::Lcom => "LCOM",
            Metric::Tcc => "TCC",
            Metric::Atfd => "ATFD",
        }
    }

    /// Kind of entity the metric is defined over.
    pub fn entity_kind(self) -> EntityKind {
        match self {
            Metric::Cc | Metric::Mloc => EntityKind::Method,
            _ => EntityKind::Class,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_METRICS.iter().copied().find(|m| m.name() == s).ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(EntityId),
    #[error("`{0}` is external; metrics are defined for declared entities only")]
    ExternalEntity(EntityId),
    #[error("`{id}` is a {found} entity but the metric needs a {expected}")]
    WrongKind { id: EntityId, expected: EntityKind, found: EntityKind },
}

/// One metric evaluated over every non-external entity of its kind.
/// This is the data set that detection-strategy filters reduce.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    metric: Metric,
    values: BTreeMap<EntityId, f64>,
}

impl MetricTable {
    pub fn from_values(metric: Metric, values: BTreeMap<EntityId, f64>) -> Self {
        MetricTable { metric, values }
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, id: &EntityId) -> Option<f64> {
        self.values.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EntityId, f64)> {
        self.values.iter().map(|(id, v)| (id, *v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &EntityId> {
        self.values.keys()
    }
}

/// Cyclomatic complexity of a method: 1 + decision points, as recorded by
/// the front end.
pub fn cc(model: &DesignModel, m: &EntityId) -> Result<u64, MetricError> {
    Ok(declared_method(model, m)?.cyclomatic as u64)
}

/// Statement count of a method body (nested statements included).
pub fn mloc(model: &DesignModel, m: &EntityId) -> Result<u64, MetricError> {
    Ok(declared_method(model, m)?.statement_count as u64)
}

/// Number of public attributes declared on the class.
pub fn nopa(model: &DesignModel, c: &EntityId) -> Result<u64, MetricError> {
    let class = declared_class(model, c)?;
    Ok(class
        .attributes
        .iter()
        .filter_map(|id| model.attribute(id))
        .filter(|attr| attr.visibility == crate::model::Visibility::Public)
        .count() as u64)
}

/// Weighted method count: sum of the cyclomatic complexities of the class's
/// declared methods. Zero for classes without methods.
pub fn wmc(model: &DesignModel, c: &EntityId) -> Result<u64, MetricError> {
    let class = declared_class(model, c)?;
    Ok(class
        .methods
        .iter()
        .filter_map(|id| model.method(id))
        .map(|m| m.cyclomatic as u64)
        .sum())
}

/// Depth of the inheritance tree: length of the superclass chain above the
/// class. Roots have depth zero.
pub fn dit(model: &DesignModel, c: &EntityId) -> Result<u64, MetricError> {
    declared_class(model, c)?;
    Ok(model.ancestors(c).expect("checked above").len() as u64)
}

/// Number of children: immediate subclasses only.
pub fn noc(model: &DesignModel, c: &EntityId) -> Result<u64, MetricError> {
    declared_class(model, c)?;
    Ok(model.subclasses_of(c).expect("checked above").len() as u64)
}

/// Coupling between objects: number of distinct other classes (external
/// ones included) whose methods are called or whose attributes are accessed
/// by methods of this class. Inheritance alone does not couple; the count
/// is efferent only.
pub fn cbo(model: &DesignModel, c: &EntityId) -> Result<u64, MetricError> {
    let class = declared_class(model, c)?;
    let mut coupled: BTreeSet<&EntityId> = BTreeSet::new();
    for method in class.methods.iter().filter_map(|id| model.method(id)) {
        for callee in &method.calls {
            if let Some(target) = model.method(callee) {
                if target.owner != class.id {
                    coupled.insert(&target.owner);
                }
            }
        }
        for accessed in &method.accesses {
            if let Some(attr) = model.attribute(accessed) {
                if attr.owner != class.id {
                    coupled.insert(&attr.owner);
                }
            }
        }
    }
    Ok(coupled.len() as u64)
}

/// Response for a class: declared methods plus the methods they directly
/// call (one level, no transitive closure).
pub fn rfc(model: &DesignModel, c: &EntityId) -> Result<u64, MetricError> {
    let class = declared_class(model, c)?;
    let mut response: BTreeSet<&EntityId> = class.methods.iter().collect();
    for method in class.methods.iter().filter_map(|id| model.method(id)) {
        response.extend(method.calls.iter());
    }
    Ok(response.len() as u64)
}

/// Lack of cohesion in methods: over unordered pairs of declared methods,
/// the number of pairs sharing no accessed own attribute minus the number
/// of pairs sharing at least one, floored at zero.
pub fn lcom(model: &DesignModel, c: &EntityId) -> Result<u64, MetricError> {
    let (disjoint, sharing) = cohesion_pairs(model, c)?;
    Ok(disjoint.saturating_sub(sharing))
}

/// Tight class cohesion: fraction of method pairs sharing at least one
/// accessed own attribute. Classes with fewer than two methods score 1.0.
pub fn tcc(model: &DesignModel, c: &EntityId) -> Result<f64, MetricError> {
    let (disjoint, sharing) = cohesion_pairs(model, c)?;
    let pairs = disjoint + sharing;
    if pairs == 0 {
        return Ok(1.0);
    }
    Ok(sharing as f64 / pairs as f64)
}

/// Access to foreign data: number of distinct classes outside the class and
/// its ancestors whose attributes this class reads or writes directly, or
/// reaches through accessor methods. External classes count only through
/// direct attribute access (their methods carry no accessor information).
pub fn atfd(model: &DesignModel, c: &EntityId) -> Result<u64, MetricError> {
    let class = declared_class(model, c)?;
    let mut excluded: BTreeSet<EntityId> =
        model.ancestors(c).expect("checked above").into_iter().collect();
    excluded.insert(class.id.clone());

    let mut foreign: BTreeSet<&EntityId> = BTreeSet::new();
    for method in class.methods.iter().filter_map(|id| model.method(id)) {
        for accessed in &method.accesses {
            if let Some(attr) = model.attribute(accessed) {
                if !excluded.contains(&attr.owner) {
                    foreign.insert(&attr.owner);
                }
            }
        }
        for callee in &method.calls {
            if let Some(target) = model.method(callee) {
                if target.accessor_of.is_some() && !excluded.contains(&target.owner) {
                    foreign.insert(&target.owner);
                }
            }
        }
    }
    Ok(foreign.len() as u64)
}

/// Evaluate a metric over every non-external entity of its kind.
pub fn compute_table(model: &DesignModel, metric: Metric) -> MetricTable {
    let mut values = BTreeMap::new();
    match metric.entity_kind() {
        EntityKind::Class => {
            for class in model.classes().filter(|c| !c.is_external) {
                let value = match metric {
                    Metric::Nopa => nopa(model, &class.id).map(|v| v as f64),
                    Metric::Wmc => wmc(model, &class.id).map(|v| v as f64),
                    Metric::Dit => dit(model, &class.id).map(|v| v as f64),
                    Metric::Noc => noc(model, &class.id).map(|v| v as f64),
                    Metric::Cbo => cbo(model, &class.id).map(|v| v as f64),
                    Metric::Rfc => rfc(model, &class.id).map(|v| v as f64),
                    Metric::Lcom => lcom(model, &class.id).map(|v| v as f64),
                    Metric::Tcc => tcc(model, &class.id),
                    Metric::Atfd => atfd(model, &class.id).map(|v| v as f64),
                    Metric::Cc | Metric::Mloc => unreachable!("method metrics"),
                };
                values.insert(class.id.clone(), value.expect("declared class"));
            }
        }
        EntityKind::Method => {
            for method in model.methods() {
                let owner_external =
                    model.class(&method.owner).is_none_or(|owner| owner.is_external);
                if owner_external {
                    continue;
                }
                let value = match metric {
                    Metric::Cc => cc(model, &method.id),
                    Metric::Mloc => mloc(model, &method.id),
                    _ => unreachable!("class metrics"),
                };
                values.insert(method.id.clone(), value.expect("declared method") as f64);
            }
        }
        EntityKind::Attribute => unreachable!("no attribute metrics"),
    }
    MetricTable { metric, values }
}

/// Shared pair enumeration for LCOM and TCC: (pairs with no shared accessed
/// own attribute, pairs with at least one).
fn cohesion_pairs(model: &DesignModel, c: &EntityId) -> Result<(u64, u64), MetricError> {
    let class = declared_class(model, c)?;
    let own_attrs: BTreeSet<&EntityId> = class.attributes.iter().collect();
    let access_sets: Vec<BTreeSet<&EntityId>> = class
        .methods
        .iter()
        .filter_map(|id| model.method(id))
        .map(|m| m.accesses.iter().filter(|a| own_attrs.contains(a)).collect())
        .collect();

    let mut disjoint = 0u64;
    let mut sharing = 0u64;
    for i in 0..access_sets.len() {
        for j in (i + 1)..access_sets.len() {
            if access_sets[i].intersection(&access_sets[j]).next().is_some() {
                sharing += 1;
            } else {
                disjoint += 1;
            }
        }
    }
    Ok((disjoint, sharing))
}

fn declared_class<'m>(
    model: &'m DesignModel,
    id: &EntityId,
) -> Result<&'m crate::model::ClassEntity, MetricError> {
    if let Some(class) = model.class(id) {
        if class.is_external {
            return Err(MetricError::ExternalEntity(id.clone()));
        }
        return Ok(class);
    }
    Err(wrong_kind_or_unknown(model, id, EntityKind::Class))
}

fn declared_method<'m>(
    model: &'m DesignModel,
    id: &EntityId,
) -> Result<&'m crate::model::MethodEntity, MetricError> {
    if let Some(method) = model.method(id) {
        let external = model.class(&method.owner).is_none_or(|owner| owner.is_external);
        if external {
            return Err(MetricError::ExternalEntity(id.clone()));
        }
        return Ok(method);
    }
    Err(wrong_kind_or_unknown(model, id, EntityKind::Method))
}

fn wrong_kind_or_unknown(model: &DesignModel, id: &EntityId, expected: EntityKind) -> MetricError {
    let found = if model.class(id).is_some() {
        Some(EntityKind::Class)
    } else if model.method(id).is_some() {
        Some(EntityKind::Method)
    } else if model.attribute(id).is_some() {
        Some(EntityKind::Attribute)
    } else {
        None
    };
    match found {
        Some(found) => MetricError::WrongKind { id: id.clone(), expected, found },
        None => MetricError::UnknownEntity(id.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{model_from_sources, SourceProgram};

    const F1: &str = include_str!("../../../fixtures/f1.moo");

    fn build(text: &str) -> DesignModel {
        model_from_sources(&SourceProgram::single("test.moo", text)).unwrap()
    }

    fn f1() -> DesignModel {
        build(F1)
    }

    fn class(name: &str) -> EntityId {
        EntityId::class(name)
    }

    fn method(class: &str, name: &str) -> EntityId {
        EntityId::method(class, name)
    }

    #[test]
    fn method_metrics_are_cc_and_mloc_only() {
        for metric in ALL_METRICS {
            let expected = matches!(metric, Metric::Cc | Metric::Mloc);
            assert_eq!(metric.entity_kind() == EntityKind::Method, expected, "{metric}");
        }
    }

    #[test]
    fn cc_golden_values() {
        let m = f1();
        assert_eq!(cc(&m, &method("A", "getX")).unwrap(), 1);
        assert_eq!(cc(&m, &method("A", "m2")).unwrap(), 2);
    }

    #[test]
    fn cc_counts_nested_decision_points() {
        let m = build("class A { public def m(n: int) { while (n > 0) { if (n == 1) { n = 0; } } } }");
        assert_eq!(cc(&m, &method("A", "m")).unwrap(), 3);
    }

    #[test]
    fn mloc_golden_values() {
        let m = f1();
        assert_eq!(mloc(&m, &method("A", "getX")).unwrap(), 1);
        assert_eq!(mloc(&m, &method("A", "m2")).unwrap(), 2);
    }

    #[test]
    fn mloc_of_empty_body_is_zero() {
        let m = build("class A { public def nop() { } }");
        assert_eq!(mloc(&m, &method("A", "nop")).unwrap(), 0);
    }

    #[test]
    fn nopa_counts_public_attributes_only() {
        let m = f1();
        assert_eq!(nopa(&m, &class("A")).unwrap(), 0);
        let m = build("class P { public var p: int; private var q: int; }");
        assert_eq!(nopa(&m, &class("P")).unwrap(), 1);
    }

    #[test]
    fn metrics_reject_external_classes() {
        let m = build("class A { public def m(q: Q) { } }");
        assert_eq!(
            nopa(&m, &class("Q")),
            Err(MetricError::ExternalEntity(class("Q")))
        );
        assert_eq!(
            wmc(&m, &class("Q")),
            Err(MetricError::ExternalEntity(class("Q")))
        );
    }

    #[test]
    fn metrics_reject_unknown_and_wrong_kind_ids() {
        let m = f1();
        assert_eq!(
            wmc(&m, &class("Nope")),
            Err(MetricError::UnknownEntity(class("Nope")))
        );
        assert!(matches!(
            cc(&m, &class("A")),
            Err(MetricError::WrongKind { .. })
        ));
    }

    #[test]
    fn wmc_golden_values() {
        let m = f1();
        assert_eq!(wmc(&m, &class("A")).unwrap(), 4);
        assert_eq!(wmc(&m, &class("B")).unwrap(), 1);
        assert_eq!(wmc(&m, &class("C")).unwrap(), 0);
    }

    #[test]
    fn dit_golden_values() {
        let m = f1();
        assert_eq!(dit(&m, &class("A")).unwrap(), 0);
        assert_eq!(dit(&m, &class("B")).unwrap(), 1);
        let chain = build("class A {} class B extends A {} class C extends B {}");
        assert_eq!(dit(&chain, &class("C")).unwrap(), 2);
    }

    #[test]
    fn noc_golden_values() {
        let m = f1();
        assert_eq!(noc(&m, &class("A")).unwrap(), 2);
        assert_eq!(noc(&m, &class("D")).unwrap(), 0);
        let chain = build("class A {} class B extends A {} class C extends B {}");
        assert_eq!(noc(&chain, &class("A")).unwrap(), 1);
    }

    #[test]
    fn cbo_golden_values() {
        let m = f1();
        assert_eq!(cbo(&m, &class("B")).unwrap(), 1);
        assert_eq!(cbo(&m, &class("A")).unwrap(), 0);
    }

    #[test]
    fn cbo_counts_distinct_target_owners() {
        let m = build(
            "class X { public def x() { } }\n\
             class Y { public def y() { } }\n\
             class Z { public var attr: int; }\n\
             class W { public def w(x: X, y: Y, z: Z) { var n: int; x.x(); y.y(); n = z.attr; } }",
        );
        assert_eq!(cbo(&m, &class("W")).unwrap(), 3);
    }

    #[test]
    fn rfc_golden_values() {
        let m = f1();
        assert_eq!(rfc(&m, &class("A")).unwrap(), 3);
        assert_eq!(rfc(&m, &class("B")).unwrap(), 2);
        assert_eq!(rfc(&m, &class("C")).unwrap(), 0);
    }

    #[test]
    fn lcom_golden_values() {
        let m = f1();
        assert_eq!(lcom(&m, &class("A")).unwrap(), 0);
        let disjoint = build(
            "class K { private var a: int; private var b: int;\n\
               public def ma() { this.a = 1; }\n\
               public def mb() { this.b = 1; } }",
        );
        assert_eq!(lcom(&disjoint, &class("K")).unwrap(), 1);
    }

    #[test]
    fn lcom_is_zero_without_method_pairs() {
        let m = build("class K { private var a: int; public def ma() { this.a = 1; } }");
        assert_eq!(lcom(&m, &class("K")).unwrap(), 0);
        let empty = build("class K { }");
        assert_eq!(lcom(&empty, &class("K")).unwrap(), 0);
    }

    #[test]
    fn tcc_golden_values() {
        let m = f1();
        assert_eq!(tcc(&m, &class("A")).unwrap(), 1.0);
        let third = build(
            "class K { private var a: int; private var b: int;\n\
               public def m1() { this.a = 1; }\n\
               public def m2() { this.a = 2; }\n\
               public def m3() { this.b = 1; } }",
        );
        assert_eq!(tcc(&third, &class("K")).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn tcc_of_small_classes_is_one() {
        let m = build("class K { private var a: int; public def only() { this.a = 1; } }");
        assert_eq!(tcc(&m, &class("K")).unwrap(), 1.0);
        let empty = build("class K { }");
        assert_eq!(tcc(&empty, &class("K")).unwrap(), 1.0);
    }

    #[test]
    fn atfd_golden_values() {
        let m = f1();
        assert_eq!(atfd(&m, &class("B")).unwrap(), 1);
        assert_eq!(atfd(&m, &class("A")).unwrap(), 0);
    }

    #[test]
    fn atfd_counts_direct_foreign_attribute_reads() {
        let m = build(
            "class P { public var q: int; }\n\
             class K { public def m(p: P) { var n: int; n = p.q; } }",
        );
        assert_eq!(atfd(&m, &class("K")).unwrap(), 1);
    }

    #[test]
    fn atfd_ignores_non_accessor_calls() {
        let m = build(
            "class P { private var q: int; public def work() { this.q = 0; } }\n\
             class K { public def m(p: P) { p.work(); } }",
        );
        assert_eq!(atfd(&m, &class("K")).unwrap(), 0);
    }

    #[test]
    fn atfd_excludes_ancestors() {
        let m = build(
            "class A { private var x: int; public def getX() { return this.x; } }\n\
             class B extends A { public def m() { this.getX(); } }",
        );
        assert_eq!(atfd(&m, &class("B")).unwrap(), 0);
    }

    #[test]
    fn compute_table_wmc_matches_per_class_values() {
        let m = f1();
        let table = compute_table(&m, Metric::Wmc);
        let got: Vec<(String, f64)> =
            table.iter().map(|(id, v)| (id.to_string(), v)).collect();
        assert_eq!(
            got,
            vec![
                ("class:A".to_string(), 4.0),
                ("class:B".to_string(), 1.0),
                ("class:C".to_string(), 0.0),
                ("class:D".to_string(), 1.0),
            ]
        );
    }

    #[test]
    fn compute_table_noc() {
        let m = f1();
        let table = compute_table(&m, Metric::Noc);
        assert_eq!(table.get(&class("A")), Some(2.0));
        assert_eq!(table.get(&class("B")), Some(0.0));
    }

    #[test]
    fn compute_table_on_empty_model_is_empty() {
        let m = DesignModel::default();
        for metric in ALL_METRICS {
            assert!(compute_table(&m, metric).is_empty());
        }
    }

    #[test]
    fn tables_exclude_external_entities() {
        let m = build("class A { public def m(q: Q) { q.frob(); } }");
        let wmc_table = compute_table(&m, Metric::Wmc);
        assert!(wmc_table.get(&class("Q")).is_none());
        let cc_table = compute_table(&m, Metric::Cc);
        assert!(cc_table.get(&method("Q", "frob")).is_none());
        assert_eq!(cc_table.len(), 1);
    }
}
