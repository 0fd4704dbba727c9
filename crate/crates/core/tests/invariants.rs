//! Structural invariants checked over randomly generated valid models.

mod common;

use std::collections::BTreeSet;

use common::{random_model, SplitMix64};
use oospect_core::metrics;
use oospect_core::model::EntityId;
use oospect_core::strategy::{evaluate, parse_strategy, Expr, StrategyAst};

#[test]
fn subclass_counts_sum_to_classes_with_superclass() {
    let mut rng = SplitMix64::new(0xabba_0001);
    for _ in 0..50 {
        let model = random_model(&mut rng);
        let total: usize = model
            .classes()
            .map(|c| model.subclasses_of(&c.id).unwrap().len())
            .sum();
        let with_super = model.classes().filter(|c| c.superclass.is_some()).count();
        assert_eq!(total, with_super);
    }
}

#[test]
fn declared_method_sets_are_disjoint() {
    let mut rng = SplitMix64::new(0xabba_0002);
    for _ in 0..50 {
        let model = random_model(&mut rng);
        let mut seen: BTreeSet<EntityId> = BTreeSet::new();
        for class in model.classes() {
            for method in model.declared_methods(&class.id).unwrap() {
                assert!(seen.insert(method.clone()), "{method} declared twice");
            }
        }
    }
}

#[test]
fn ancestors_terminate_within_class_count() {
    let mut rng = SplitMix64::new(0xabba_0003);
    for _ in 0..50 {
        let model = random_model(&mut rng);
        for class in model.classes() {
            let chain = model.ancestors(&class.id).unwrap();
            assert!(chain.len() < model.class_count());
        }
    }
}

#[test]
fn rfc_and_wmc_dominate_declared_method_count() {
    let mut rng = SplitMix64::new(0xabba_0004);
    for _ in 0..50 {
        let model = random_model(&mut rng);
        for class in model.classes().filter(|c| !c.is_external) {
            let declared = model.declared_methods(&class.id).unwrap().len() as u64;
            assert!(metrics::rfc(&model, &class.id).unwrap() >= declared);
            assert!(metrics::wmc(&model, &class.id).unwrap() >= declared);
        }
    }
}

#[test]
fn noc_sums_match_inheritance_edges() {
    let mut rng = SplitMix64::new(0xabba_0005);
    for _ in 0..50 {
        let model = random_model(&mut rng);
        let total: u64 = model
            .classes()
            .filter(|c| !c.is_external)
            .map(|c| metrics::noc(&model, &c.id).unwrap())
            .sum();
        // NOC is only defined for declared classes, so compare against the
        // inheritance edges whose target is declared.
        let declared: BTreeSet<&EntityId> = model
            .classes()
            .filter(|c| !c.is_external)
            .map(|c| &c.id)
            .collect();
        let edges = model
            .classes()
            .filter(|c| c.superclass.as_ref().is_some_and(|s| declared.contains(s)))
            .count() as u64;
        assert_eq!(total, edges);
    }
}

#[test]
fn atfd_never_counts_self_or_ancestors() {
    let mut rng = SplitMix64::new(0xabba_0006);
    for _ in 0..50 {
        let model = random_model(&mut rng);
        for class in model.classes().filter(|c| !c.is_external) {
            let excluded: BTreeSet<EntityId> = model
                .ancestors(&class.id)
                .unwrap()
                .into_iter()
                .chain([class.id.clone()])
                .collect();
            // an upper bound: every other class is reachable, so ATFD can
            // never exceed the non-excluded class count
            let ceiling = model.class_count() as u64 - excluded.len().min(model.class_count()) as u64;
            assert!(metrics::atfd(&model, &class.id).unwrap() <= ceiling);
        }
    }
}

#[test]
fn evaluation_is_invariant_under_atom_order() {
    fn swap(expr: &Expr) -> Expr {
        match expr {
            Expr::Atom { .. } => expr.clone(),
            Expr::And(l, r) => Expr::And(Box::new(swap(r)), Box::new(swap(l))),
            Expr::Or(l, r) => Expr::Or(Box::new(swap(r)), Box::new(swap(l))),
            // butnot is not commutative; keep operand order
            Expr::ButNot(l, r) => Expr::ButNot(Box::new(swap(l)), Box::new(swap(r))),
        }
    }

    let strategy = parse_strategy(
        "X := (WMC, TopValues(50%)) and (ATFD, HigherThan(0)) or (NOC, HigherThan(0));",
    )
    .unwrap();
    let swapped = StrategyAst {
        name: strategy.name.clone(),
        target_kind: strategy.target_kind,
        expr: swap(&strategy.expr),
    };

    let mut rng = SplitMix64::new(0xabba_0007);
    for _ in 0..50 {
        let model = random_model(&mut rng);
        let a = evaluate(&model, &strategy).unwrap();
        let b = evaluate(&model, &swapped).unwrap();
        assert_eq!(a.suspects, b.suspects);
        assert_eq!(a.evidence, b.evidence);
    }
}
