//! Shared test support: a deterministic PRNG, a generator for random valid
//! design models, and naive reference implementations of every metric.
//!
//! The reference implementations deliberately avoid the query helpers the
//! production metrics use (`declared_methods`, `ancestors`, `subclasses_of`):
//! they enumerate the raw entity maps instead, so the two paths can disagree
//! if either is wrong.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use oospect_core::frontend::{model_from_sources, SourceProgram};
use oospect_core::model::{
    AttributeEntity, ClassEntity, DesignModel, EntityId, MethodEntity, Visibility,
};

pub const F1_SOURCE: &str = include_str!("../../../../fixtures/f1.moo");
pub const PLANTED_SOURCE: &str = include_str!("../../../../fixtures/corpus/planted.moo");

pub fn fixture_f1() -> DesignModel {
    model_from_sources(&SourceProgram::single("f1.moo", F1_SOURCE)).unwrap()
}

pub fn planted_corpus_model() -> DesignModel {
    model_from_sources(&SourceProgram::single("planted.moo", PLANTED_SOURCE)).unwrap()
}

/// splitmix64; fixed seeds keep every generated case reproducible.
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform-ish value in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn chance(&mut self, percent: usize) -> bool {
        self.below(100) < percent
    }
}

/// Generate a random valid model: up to 8 declared classes with up to 5
/// methods each, a single-inheritance forest, optional external classes
/// with opaque members, and random call/access wiring.
pub fn random_model(rng: &mut SplitMix64) -> DesignModel {
    let n_classes = 1 + rng.below(8);
    let n_external = rng.below(3);

    struct ClassPlan {
        name: String,
        external: bool,
        superclass: Option<String>,
        attrs: Vec<(String, Visibility)>,
        methods: Vec<String>,
    }

    let mut plans: Vec<ClassPlan> = Vec::new();
    for i in 0..n_external {
        let n_attrs = rng.below(3);
        let n_methods = rng.below(3);
        plans.push(ClassPlan {
            name: format!("X{i}"),
            external: true,
            superclass: None,
            attrs: (0..n_attrs).map(|a| (format!("a{a}"), Visibility::Public)).collect(),
            methods: (0..n_methods).map(|m| format!("m{m}")).collect(),
        });
    }
    for i in 0..n_classes {
        let superclass = if i > 0 && rng.chance(50) {
            Some(format!("C{}", rng.below(i)))
        } else if n_external > 0 && rng.chance(15) {
            Some(format!("X{}", rng.below(n_external)))
        } else {
            None
        };
        let n_attrs = rng.below(5);
        let n_methods = rng.below(6);
        plans.push(ClassPlan {
            name: format!("C{i}"),
            external: false,
            superclass,
            attrs: (0..n_attrs)
                .map(|a| {
                    let vis =
                        if rng.chance(40) { Visibility::Public } else { Visibility::Private };
                    (format!("a{a}"), vis)
                })
                .collect(),
            methods: (0..n_methods).map(|m| format!("m{m}")).collect(),
        });
    }

    let all_method_ids: Vec<EntityId> = plans
        .iter()
        .flat_map(|p| p.methods.iter().map(|m| EntityId::method(&p.name, m)))
        .collect();
    let all_attr_ids: Vec<EntityId> = plans
        .iter()
        .flat_map(|p| p.attrs.iter().map(|(a, _)| EntityId::attribute(&p.name, a)))
        .collect();

    let mut classes = BTreeMap::new();
    let mut methods = BTreeMap::new();
    let mut attributes = BTreeMap::new();

    for plan in &plans {
        let class_id = EntityId::class(&plan.name);
        let mut attr_ids = Vec::new();
        for (attr_name, vis) in &plan.attrs {
            let id = EntityId::attribute(&plan.name, attr_name);
            attributes.insert(
                id.clone(),
                AttributeEntity {
                    id: id.clone(),
                    name: attr_name.clone(),
                    owner: class_id.clone(),
                    visibility: *vis,
                },
            );
            attr_ids.push(id);
        }

        let mut method_ids = Vec::new();
        for method_name in &plan.methods {
            let id = EntityId::method(&plan.name, method_name);
            let (cyclomatic, statement_count, calls, accesses, accessor_of) = if plan.external {
                // opaque members: no behaviour recorded
                (1u32, 0u32, BTreeSet::new(), BTreeSet::new(), None)
            } else {
                let mut calls = BTreeSet::new();
                for _ in 0..rng.below(4) {
                    if !all_method_ids.is_empty() {
                        calls.insert(all_method_ids[rng.below(all_method_ids.len())].clone());
                    }
                }
                let mut accesses = BTreeSet::new();
                for _ in 0..rng.below(4) {
                    if !all_attr_ids.is_empty() {
                        accesses.insert(all_attr_ids[rng.below(all_attr_ids.len())].clone());
                    }
                }
                let accessor_of = if !attr_ids.is_empty() && rng.chance(30) {
                    let target = attr_ids[rng.below(attr_ids.len())].clone();
                    accesses.insert(target.clone());
                    Some(target)
                } else {
                    None
                };
                (1 + rng.below(6) as u32, rng.below(30) as u32, calls, accesses, accessor_of)
            };
            methods.insert(
                id.clone(),
                MethodEntity {
                    id: id.clone(),
                    name: method_name.clone(),
                    owner: class_id.clone(),
                    visibility: if rng.chance(70) {
                        Visibility::Public
                    } else {
                        Visibility::Private
                    },
                    cyclomatic,
                    statement_count,
                    calls,
                    accesses,
                    accessor_of,
                },
            );
            method_ids.push(id);
        }

        attr_ids.sort();
        method_ids.sort();
        classes.insert(
            class_id.clone(),
            ClassEntity {
                id: class_id,
                name: plan.name.clone(),
                superclass: plan.superclass.as_deref().map(EntityId::class),
                is_external: plan.external,
                attributes: attr_ids,
                methods: method_ids,
            },
        );
    }

    let model = DesignModel::from_parts(classes, methods, attributes);
    let diagnostics = model.validate();
    assert!(diagnostics.is_empty(), "generator produced an invalid model: {diagnostics:?}");
    model
}

/// Naive reference metrics. Entity enumeration goes through the raw maps.
pub mod oracle {
    use super::*;

    fn methods_owned_by<'m>(
        model: &'m DesignModel,
        class_id: &'m EntityId,
    ) -> impl Iterator<Item = &'m MethodEntity> {
        model.methods().filter(move |m| &m.owner == class_id)
    }

    fn parent_of<'m>(model: &'m DesignModel, class_id: &EntityId) -> Option<&'m EntityId> {
        model.class(class_id).and_then(|c| c.superclass.as_ref())
    }

    fn ancestor_set(model: &DesignModel, class_id: &EntityId) -> BTreeSet<EntityId> {
        let mut out = BTreeSet::new();
        let mut current = class_id.clone();
        while let Some(parent) = parent_of(model, &current) {
            if !out.insert(parent.clone()) {
                break;
            }
            current = parent.clone();
        }
        out
    }

    pub fn cc(model: &DesignModel, m: &EntityId) -> u64 {
        model.method(m).unwrap().cyclomatic as u64
    }

    pub fn mloc(model: &DesignModel, m: &EntityId) -> u64 {
        model.method(m).unwrap().statement_count as u64
    }

    pub fn nopa(model: &DesignModel, c: &EntityId) -> u64 {
        model
            .attributes()
            .filter(|a| &a.owner == c && a.visibility == Visibility::Public)
            .count() as u64
    }

    pub fn wmc(model: &DesignModel, c: &EntityId) -> u64 {
        methods_owned_by(model, c).map(|m| m.cyclomatic as u64).sum()
    }

    pub fn dit(model: &DesignModel, c: &EntityId) -> u64 {
        fn depth(model: &DesignModel, c: &EntityId, fuel: usize) -> u64 {
            if fuel == 0 {
                return 0;
            }
            match parent_of(model, c) {
                Some(parent) => 1 + depth(model, parent, fuel - 1),
                None => 0,
            }
        }
        depth(model, c, model.class_count())
    }

    pub fn noc(model: &DesignModel, c: &EntityId) -> u64 {
        model.classes().filter(|cls| cls.superclass.as_ref() == Some(c)).count() as u64
    }

    pub fn cbo(model: &DesignModel, c: &EntityId) -> u64 {
        let mut count = 0;
        for other in model.classes() {
            if other.id == *c {
                continue;
            }
            let coupled = methods_owned_by(model, c).any(|m| {
                let calls_into = m
                    .calls
                    .iter()
                    .any(|t| model.method(t).is_some_and(|t| t.owner == other.id));
                let accesses_into = m
                    .accesses
                    .iter()
                    .any(|t| model.attribute(t).is_some_and(|t| t.owner == other.id));
                calls_into || accesses_into
            });
            if coupled {
                count += 1;
            }
        }
        count
    }

    pub fn rfc(model: &DesignModel, c: &EntityId) -> u64 {
        let mut response: BTreeSet<EntityId> = BTreeSet::new();
        for m in methods_owned_by(model, c) {
            response.insert(m.id.clone());
            for callee in &m.calls {
                response.insert(callee.clone());
            }
        }
        response.len() as u64
    }

    fn own_access_sets(model: &DesignModel, c: &EntityId) -> Vec<BTreeSet<EntityId>> {
        let own_attrs: BTreeSet<EntityId> = model
            .attributes()
            .filter(|a| &a.owner == c)
            .map(|a| a.id.clone())
            .collect();
        methods_owned_by(model, c)
            .map(|m| m.accesses.iter().filter(|a| own_attrs.contains(a)).cloned().collect())
            .collect()
    }

    pub fn lcom(model: &DesignModel, c: &EntityId) -> u64 {
        let sets = own_access_sets(model, c);
        let mut p = 0i64;
        let mut q = 0i64;
        for i in 0..sets.len() {
            for j in (i + 1)..sets.len() {
                if sets[i].intersection(&sets[j]).count() == 0 {
                    p += 1;
                } else {
                    q += 1;
                }
            }
        }
        (p - q).max(0) as u64
    }

    pub fn tcc(model: &DesignModel, c: &EntityId) -> f64 {
        let sets = own_access_sets(model, c);
        let n = sets.len();
        if n <= 1 {
            return 1.0;
        }
        let mut connected = 0u64;
        for i in 0..n {
            for j in (i + 1)..n {
                if sets[i].intersection(&sets[j]).count() > 0 {
                    connected += 1;
                }
            }
        }
        connected as f64 / (n * (n - 1) / 2) as f64
    }

    pub fn atfd(model: &DesignModel, c: &EntityId) -> u64 {
        let mut excluded = ancestor_set(model, c);
        excluded.insert(c.clone());
        let mut foreign: BTreeSet<EntityId> = BTreeSet::new();
        for m in methods_owned_by(model, c) {
            for target in &m.accesses {
                if let Some(attr) = model.attribute(target) {
                    if !excluded.contains(&attr.owner) {
                        foreign.insert(attr.owner.clone());
                    }
                }
            }
            for target in &m.calls {
                if let Some(callee) = model.method(target) {
                    if callee.accessor_of.is_some() && !excluded.contains(&callee.owner) {
                        foreign.insert(callee.owner.clone());
                    }
                }
            }
        }
        foreign.len() as u64
    }
}
