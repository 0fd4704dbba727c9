//! Detection strategies: the filtering mechanism, the composition operators
//! and the SOD rule language.
//!
//! A strategy is a quantifiable rule: metric/filter atoms combined with
//! `and`, `or` and `butnot`. Filters reduce a metric's data set to the
//! entities with suspicious values; composition interprets several result
//! sets together. Evaluating a strategy over a model yields a
//! [`SuspectReport`] with the metric values that triggered each suspect.

pub mod ast;
pub mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use ast::{
    format_number, print_expr, ArgValue, Expr, FilterName, StrategyAst, StrategyTemplate,
    TemplateArg, TemplateAtom, TemplateExpr,
};
pub use parser::{parse_strategies, parse_strategy, parse_templates};

use crate::metrics::{compute_table, Metric, MetricTable};
use crate::model::{DesignModel, EntityId, EntityKind};

/// Relative filter parameter: an absolute entity count or a percentage of
/// the data set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Count {
    Absolute(u64),
    Percent(f64),
}

/// A data filter. Marginal filters keep one open end of the value range;
/// `Between` keeps an interval. Semantical filters (`HigherThan`,
/// `TopValues`, ...) take explicit thresholds; statistical filters
/// (`BoxPlot*`, `StdDev*`) derive the threshold from the data and only the
/// direction is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterSpec {
    /// Strictly greater than the threshold.
    HigherThan(f64),
    /// Strictly less than the threshold.
    LowerThan(f64),
    /// The k highest values (ties at the cutoff included).
    TopValues(Count),
    /// The k lowest values (ties at the cutoff included).
    BottomValues(Count),
    /// Above the Tukey upper fence Q3 + 1.5*IQR.
    BoxPlotUpper,
    /// Below the Tukey lower fence Q1 - 1.5*IQR.
    BoxPlotLower,
    /// Above mean + k*sigma (population sigma).
    StdDevAbove(f64),
    /// Below mean - k*sigma.
    StdDevBelow(f64),
    /// Strictly between the bounds; identical to
    /// `HigherThan(a) and LowerThan(b)`.
    Between(f64, f64),
}

impl fmt::Display for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterSpec::HigherThan(t) => write!(f, "HigherThan({})", format_number(*t)),
            FilterSpec::LowerThan(t) => write!(f, "LowerThan({})", format_number(*t)),
            FilterSpec::TopValues(count) => write!(f, "TopValues({count})"),
            FilterSpec::BottomValues(count) => write!(f, "BottomValues({count})"),
            FilterSpec::BoxPlotUpper => f.write_str("BoxPlotUpper"),
            FilterSpec::BoxPlotLower => f.write_str("BoxPlotLower"),
            FilterSpec::StdDevAbove(k) => write!(f, "StdDevAbove({})", format_number(*k)),
            FilterSpec::StdDevBelow(k) => write!(f, "StdDevBelow({})", format_number(*k)),
            FilterSpec::Between(a, b) => {
                write!(f, "Between({}, {})", format_number(*a), format_number(*b))
            }
        }
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Absolute(k) => write!(f, "{k}"),
            Count::Percent(p) => write!(f, "{}%", format_number(*p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StrategyError {
    #[error("{line}:{column}: {message}")]
    Parse { line: u32, column: u32, message: String },
    #[error("{line}:{column}: unknown metric `{name}`")]
    UnknownMetric { name: String, line: u32, column: u32 },
    #[error("{line}:{column}: unknown filter `{name}`")]
    UnknownFilter { name: String, line: u32, column: u32 },
    #[error("strategy `{strategy}` mixes entity kinds: `{metric}` is a {found} metric in a {expected} strategy")]
    TypeMismatch { strategy: String, metric: Metric, expected: EntityKind, found: EntityKind },
    #[error("invalid filter: {message}")]
    InvalidFilter { message: String },
    #[error("unbound hole `${name}`")]
    UnboundHole { name: String },
    #[error("{filter} needs at least {needed} values, the data set has {got}")]
    DegenerateTable { filter: String, needed: usize, got: usize },
}

/// Apply a filter to a metric table and return the surviving entities.
pub fn apply_filter(
    table: &MetricTable,
    filter: &FilterSpec,
) -> Result<BTreeSet<EntityId>, StrategyError> {
    let n = table.len();
    match filter {
        FilterSpec::HigherThan(t) => Ok(keep(table, |v| v > *t)),
        FilterSpec::LowerThan(t) => Ok(keep(table, |v| v < *t)),
        FilterSpec::Between(a, b) => {
            if a >= b {
                return Err(StrategyError::InvalidFilter {
                    message: format!("Between requires a < b, got ({a}, {b})"),
                });
            }
            Ok(keep(table, |v| v > *a && v < *b))
        }
        FilterSpec::TopValues(count) => {
            let k = resolve_count(count, n)?;
            if k == 0 {
                return Ok(BTreeSet::new());
            }
            let mut values = table_values(table);
            values.sort_by(|a, b| b.total_cmp(a));
            let cutoff = values[k - 1];
            Ok(keep(table, |v| v >= cutoff))
        }
        FilterSpec::BottomValues(count) => {
            let k = resolve_count(count, n)?;
            if k == 0 {
                return Ok(BTreeSet::new());
            }
            let mut values = table_values(table);
            values.sort_by(f64::total_cmp);
            let cutoff = values[k - 1];
            Ok(keep(table, |v| v <= cutoff))
        }
        FilterSpec::BoxPlotUpper | FilterSpec::BoxPlotLower => {
            if n < 4 {
                return Err(StrategyError::DegenerateTable {
                    filter: filter.to_string(),
                    needed: 4,
                    got: n,
                });
            }
            let mut values = table_values(table);
            values.sort_by(f64::total_cmp);
            let (q1, q3) = tukey_hinges(&values);
            let iqr = q3 - q1;
            if matches!(filter, FilterSpec::BoxPlotUpper) {
                let fence = q3 + 1.5 * iqr;
                Ok(keep(table, |v| v > fence))
            } else {
                let fence = q1 - 1.5 * iqr;
                Ok(keep(table, |v| v < fence))
            }
        }
        FilterSpec::StdDevAbove(k) | FilterSpec::StdDevBelow(k) => {
            if *k <= 0.0 {
                return Err(StrategyError::InvalidFilter {
                    message: format!("standard-deviation factor must be positive, got {k}"),
                });
            }
            if n < 2 {
                return Err(StrategyError::DegenerateTable {
                    filter: filter.to_string(),
                    needed: 2,
                    got: n,
                });
            }
            let values = table_values(table);
            let mean = values.iter().sum::<f64>() / n as f64;
            let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let sigma = variance.sqrt();
            if matches!(filter, FilterSpec::StdDevAbove(_)) {
                let bound = mean + k * sigma;
                Ok(keep(table, |v| v > bound))
            } else {
                let bound = mean - k * sigma;
                Ok(keep(table, |v| v < bound))
            }
        }
    }
}

fn keep(table: &MetricTable, predicate: impl Fn(f64) -> bool) -> BTreeSet<EntityId> {
    table
        .iter()
        .filter(|(_, v)| predicate(*v))
        .map(|(id, _)| id.clone())
        .collect()
}

fn table_values(table: &MetricTable) -> Vec<f64> {
    table.iter().map(|(_, v)| v).collect()
}

/// Turn a relative-filter parameter into an entity count, clamped to the
/// table size. Percentages use a ceiling so a non-empty table always yields
/// at least one entity.
fn resolve_count(count: &Count, n: usize) -> Result<usize, StrategyError> {
    match count {
        Count::Absolute(0) => Err(StrategyError::InvalidFilter {
            message: "count must be a positive integer, got 0".to_string(),
        }),
        Count::Absolute(k) => Ok((*k as usize).min(n)),
        Count::Percent(p) => {
            if !(*p > 0.0 && *p <= 100.0) {
                return Err(StrategyError::InvalidFilter {
                    message: format!("percentage must lie in (0, 100], got {p}"),
                });
            }
            // exact integer arithmetic for whole-number percentages
            let k = if p.fract() == 0.0 {
                (*p as usize * n).div_ceil(100)
            } else {
                ((p / 100.0) * n as f64).ceil() as usize
            };
            Ok(k.min(n))
        }
    }
}

/// Tukey hinges of an ascending-sorted slice with at least two elements:
/// the halves split at the median (which is excluded from both halves when
/// the length is odd), and Q1/Q3 are the medians of the halves.
fn tukey_hinges(sorted: &[f64]) -> (f64, f64) {
    let n = sorted.len();
    let half = n / 2;
    (median_of(&sorted[..half]), median_of(&sorted[n - half..]))
}

fn median_of(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Composition operator over suspect sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    /// Intersection: both symptoms present.
    And,
    /// Union: either symptom present.
    Or,
    /// Set difference: the left symptom without the right.
    ButNot,
}

/// Combine two result sets.
pub fn compose(
    a: &BTreeSet<EntityId>,
    op: SetOp,
    b: &BTreeSet<EntityId>,
) -> BTreeSet<EntityId> {
    match op {
        SetOp::And => a.intersection(b).cloned().collect(),
        SetOp::Or => a.union(b).cloned().collect(),
        SetOp::ButNot => a.difference(b).cloned().collect(),
    }
}

/// Result of evaluating one strategy: the suspect entities plus, for each
/// suspect, the value of every metric the strategy looked at.
#[derive(Debug, Clone, PartialEq)]
pub struct SuspectReport {
    pub strategy: String,
    pub suspects: BTreeSet<EntityId>,
    pub evidence: BTreeMap<EntityId, BTreeMap<Metric, f64>>,
}

/// Evaluate a strategy over a model. Atoms filter the metric tables of the
/// non-external entities; composition follows the expression tree. The
/// result is deterministic.
pub fn evaluate(model: &DesignModel, strategy: &StrategyAst) -> Result<SuspectReport, StrategyError> {
    let mut tables: BTreeMap<Metric, MetricTable> = BTreeMap::new();
    for metric in strategy.expr.metrics() {
        tables.insert(metric, compute_table(model, metric));
    }

    let suspects = eval_expr(&strategy.expr, &tables)?;
    let mut evidence = BTreeMap::new();
    for suspect in &suspects {
        let mut values = BTreeMap::new();
        for (metric, table) in &tables {
            if let Some(value) = table.get(suspect) {
                values.insert(*metric, value);
            }
        }
        evidence.insert(suspect.clone(), values);
    }
    Ok(SuspectReport { strategy: strategy.name.clone(), suspects, evidence })
}

fn eval_expr(
    expr: &Expr,
    tables: &BTreeMap<Metric, MetricTable>,
) -> Result<BTreeSet<EntityId>, StrategyError> {
    match expr {
        Expr::Atom { metric, filter } => {
            apply_filter(tables.get(metric).expect("table computed for every metric"), filter)
        }
        Expr::And(l, r) => Ok(compose(&eval_expr(l, tables)?, SetOp::And, &eval_expr(r, tables)?)),
        Expr::Or(l, r) => Ok(compose(&eval_expr(l, tables)?, SetOp::Or, &eval_expr(r, tables)?)),
        Expr::ButNot(l, r) => {
            Ok(compose(&eval_expr(l, tables)?, SetOp::ButNot, &eval_expr(r, tables)?))
        }
    }
}

/// Data sets smaller than this trip the relative-filter lint.
pub const DEFAULT_SMALL_MODEL_SIZE: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LintWarning {
    pub metric: Metric,
    pub message: String,
}

impl fmt::Display for LintWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Warn about percentage-parameterized relative filters on small data sets,
/// where absolute thresholds behave more predictably.
pub fn lint_strategy(strategy: &StrategyAst, model_size: usize) -> Vec<LintWarning> {
    lint_strategy_with(strategy, model_size, DEFAULT_SMALL_MODEL_SIZE)
}

pub fn lint_strategy_with(
    strategy: &StrategyAst,
    model_size: usize,
    small_size: usize,
) -> Vec<LintWarning> {
    if model_size >= small_size {
        return Vec::new();
    }
    strategy
        .expr
        .atoms()
        .into_iter()
        .filter(|(_, filter)| {
            matches!(
                filter,
                FilterSpec::TopValues(Count::Percent(_)) | FilterSpec::BottomValues(Count::Percent(_))
            )
        })
        .map(|(metric, filter)| LintWarning {
            metric: *metric,
            message: format!(
                "{filter} on {metric}: the data set has only {model_size} entities; \
                 prefer an absolute count on small systems"
            ),
        })
        .collect()
}
