//! Registry of known design flaws and the built-in detection strategies.
//!
//! Every flaw the analyzer knows about is listed here, including those it
//! cannot detect yet (subsystem-level flaws need a subsystem entity in the
//! model, micro-design flaws have no agreed formula). Exactly three entries
//! carry runnable strategies: God class, God method and Data class. The
//! strategies live in `assets/builtin.sod`, shipped with the tool so users
//! can copy and adapt them.

use std::fmt;

use crate::model::{DesignModel, EntityKind};
use crate::strategy::{evaluate, parse_strategies, StrategyAst, StrategyError, SuspectReport};

/// The SOD source of the built-in strategies.
pub const BUILTIN_SOD: &str = include_str!("../assets/builtin.sod");

/// Granularity a flaw lives at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlawLevel {
    Class,
    Method,
    Subsystem,
    MicroDesign,
}

impl fmt::Display for FlawLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlawLevel::Class => "class",
            FlawLevel::Method => "method",
            FlawLevel::Subsystem => "subsystem",
            FlawLevel::MicroDesign => "micro-design",
        })
    }
}

/// Where a built-in strategy's formula comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Thresholds taken from the published detection-strategy literature.
    Literature,
    /// Defined by this tool; no agreed formula exists in the literature.
    ToolDefined,
    /// Name only; the registry records the flaw but cannot detect it.
    RegistryOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlawEntry {
    pub flaw_name: &'static str,
    pub level: FlawLevel,
    pub builtin_strategy: Option<StrategyAst>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown flaw or strategy `{0}`")]
    UnknownFlaw(String),
    #[error("`{0}` is registry-only: no built-in detection strategy exists for it")]
    NoStrategy(String),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// The full flaw taxonomy. Entries appear in a fixed order; `detect_all`
/// with [`Selection::AllBuiltin`] follows it.
pub fn builtin_registry() -> Vec<FlawEntry> {
    let mut strategies = parse_strategies(BUILTIN_SOD)
        .expect("embedded builtin.sod must parse")
        .into_iter();
    let mut next = |expected_name: &str, level: FlawLevel| -> StrategyAst {
        let strategy = strategies.next().expect("builtin.sod defines three strategies");
        assert_eq!(strategy.name, expected_name, "builtin.sod strategy order");
        let expected_kind = match level {
            FlawLevel::Class => EntityKind::Class,
            FlawLevel::Method => EntityKind::Method,
            _ => unreachable!("builtins are class or method level"),
        };
        assert_eq!(strategy.target_kind, expected_kind, "builtin strategy target kind");
        strategy
    };

    let god_class = next("GodClass", FlawLevel::Class);
    let data_class = next("DataClass", FlawLevel::Class);
    let god_method = next("GodMethod", FlawLevel::Method);

    let registry_only = |name: &'static str, level: FlawLevel| FlawEntry {
        flaw_name: name,
        level,
        builtin_strategy: None,
        provenance: Provenance::RegistryOnly,
    };

    vec![
        registry_only("Shotgun Surgery", FlawLevel::Class),
        registry_only("Wide subsystem interface", FlawLevel::Subsystem),
        registry_only("Feature Envy", FlawLevel::Method),
        registry_only("Misplaced class", FlawLevel::Subsystem),
        FlawEntry {
            flaw_name: "God class",
            level: FlawLevel::Class,
            builtin_strategy: Some(god_class),
            provenance: Provenance::Literature,
        },
        FlawEntry {
            flaw_name: "God method",
            level: FlawLevel::Method,
            builtin_strategy: Some(god_method),
            provenance: Provenance::ToolDefined,
        },
        registry_only("God package", FlawLevel::Subsystem),
        FlawEntry {
            flaw_name: "Data class",
            level: FlawLevel::Class,
            builtin_strategy: Some(data_class),
            provenance: Provenance::ToolDefined,
        },
        registry_only("Refused Bequest", FlawLevel::Class),
        registry_only("Lack of Bridge", FlawLevel::MicroDesign),
        registry_only("Lack of Strategy", FlawLevel::MicroDesign),
        registry_only("Lack of State", FlawLevel::MicroDesign),
        registry_only("Lack of Singleton", FlawLevel::MicroDesign),
        registry_only("Lack of Facade", FlawLevel::MicroDesign),
    ]
}

/// Which flaws to run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    /// Every entry with a built-in strategy, in registry order.
    AllBuiltin,
    /// Named flaws, in the given order. Names match loosely: "God class",
    /// "GodClass" and "god-class" all select the same entry.
    Names(Vec<String>),
}

/// `"God class"`, `"GodClass"`, `"god-class"` -> `"godclass"`.
fn normalize(name: &str) -> String {
    name.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase()
}

/// Find a registry entry by flaw name or by its strategy's name.
pub fn find_entry<'r>(registry: &'r [FlawEntry], name: &str) -> Option<&'r FlawEntry> {
    let wanted = normalize(name);
    registry.iter().find(|entry| {
        normalize(entry.flaw_name) == wanted
            || entry
                .builtin_strategy
                .as_ref()
                .is_some_and(|s| normalize(&s.name) == wanted)
    })
}

/// Run the selected built-in strategies over a model, one report per
/// selected flaw, in selection order.
pub fn detect_all(
    model: &DesignModel,
    selection: &Selection,
) -> Result<Vec<SuspectReport>, CatalogError> {
    let registry = builtin_registry();
    let mut reports = Vec::new();
    match selection {
        Selection::AllBuiltin => {
            for entry in &registry {
                if let Some(strategy) = &entry.builtin_strategy {
                    reports.push(evaluate(model, strategy)?);
                }
            }
        }
        Selection::Names(names) => {
            for name in names {
                let entry = find_entry(&registry, name)
                    .ok_or_else(|| CatalogError::UnknownFlaw(name.clone()))?;
                let strategy = entry
                    .builtin_strategy
                    .as_ref()
                    .ok_or_else(|| CatalogError::NoStrategy(entry.flaw_name.to_string()))?;
                reports.push(evaluate(model, strategy)?);
            }
        }
    }
    Ok(reports)
}
