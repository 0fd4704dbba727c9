//! Strategy syntax trees.
//!
//! Strategies exist in two forms: [`StrategyTemplate`] as parsed from SOD
//! text, whose filter arguments may still contain `$name` holes, and the
//! concrete [`StrategyAst`] obtained by binding every hole to a value. The
//! tuning machinery enumerates bindings; everything else works on the
//! concrete form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::metrics::Metric;
use crate::model::EntityKind;
use crate::strategy::{Count, FilterSpec, StrategyError};

/// A parsed detection strategy with every filter argument resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyAst {
    pub name: String,
    pub target_kind: EntityKind,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Atom { metric: Metric, filter: FilterSpec },
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    ButNot(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// All metrics referenced by the expression, deduplicated.
    pub fn metrics(&self) -> BTreeSet<Metric> {
        let mut out = BTreeSet::new();
        self.collect_metrics(&mut out);
        out
    }

    fn collect_metrics(&self, out: &mut BTreeSet<Metric>) {
        match self {
            Expr::Atom { metric, .. } => {
                out.insert(*metric);
            }
            Expr::And(l, r) | Expr::Or(l, r) | Expr::ButNot(l, r) => {
                l.collect_metrics(out);
                r.collect_metrics(out);
            }
        }
    }

    /// Atoms in left-to-right order.
    pub fn atoms(&self) -> Vec<(&Metric, &FilterSpec)> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'e>(&'e self, out: &mut Vec<(&'e Metric, &'e FilterSpec)>) {
        match self {
            Expr::Atom { metric, filter } => out.push((metric, filter)),
            Expr::And(l, r) | Expr::Or(l, r) | Expr::ButNot(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }
}

impl fmt::Display for StrategyAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} := {};", self.name, self.expr)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_expr(self))
    }
}

/// Print an expression so that parsing the result reproduces the same tree.
/// `and`/`butnot` bind tighter than `or`; all operators are left
/// associative, so only or-children of and-tier nodes and right children of
/// same-tier nodes need parentheses.
pub fn print_expr(expr: &Expr) -> String {
    print_prec(expr, false)
}

fn print_prec(expr: &Expr, parenthesize: bool) -> String {
    let (text, is_atom) = match expr {
        Expr::Atom { metric, filter } => (format!("({metric}, {filter})"), true),
        Expr::Or(l, r) => {
            let left = print_prec(l, false);
            let right = print_prec(r, matches!(**r, Expr::Or(..)));
            (format!("{left} or {right}"), false)
        }
        Expr::And(l, r) | Expr::ButNot(l, r) => {
            let op = if matches!(expr, Expr::And(..)) { "and" } else { "butnot" };
            let left = print_prec(l, matches!(**l, Expr::Or(..)));
            let right = print_prec(
                r,
                matches!(**r, Expr::Or(..) | Expr::And(..) | Expr::ButNot(..)),
            );
            (format!("{left} {op} {right}"), false)
        }
    };
    if parenthesize && !is_atom {
        format!("({text})")
    } else {
        text
    }
}

/// Format a number the way the SOD grammar writes it: integers without a
/// fractional part, everything else in plain decimal notation.
pub fn format_number(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}

/// A concrete filter argument: a plain number or a percentage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArgValue {
    Number(f64),
    Percent(f64),
}

impl fmt::Display for ArgValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgValue::Number(v) => f.write_str(&format_number(*v)),
            ArgValue::Percent(v) => write!(f, "{}%", format_number(*v)),
        }
    }
}

/// A filter argument in a template: either already a value or a `$hole`.
#[derive(Debug, Clone, PartialEq)]
pub enum TemplateArg {
    Value(ArgValue),
    Hole(String),
}

impl fmt::Display for TemplateArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateArg::Value(v) => v.fmt(f),
            TemplateArg::Hole(name) => write!(f, "${name}"),
        }
    }
}

/// Name of a filter in the SOD language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterName {
    HigherThan,
    LowerThan,
    TopValues,
    BottomValues,
    BoxPlotUpper,
    BoxPlotLower,
    StdDevAbove,
    StdDevBelow,
    Between,
}

pub const ALL_FILTER_NAMES: [FilterName; 9] = [
    FilterName::HigherThan,
    FilterName::LowerThan,
    FilterName::TopValues,
    FilterName::BottomValues,
    FilterName::BoxPlotUpper,
    FilterName::BoxPlotLower,
    FilterName::StdDevAbove,
    FilterName::StdDevBelow,
    FilterName::Between,
];

impl FilterName {
    pub fn as_str(self) -> &'static str {
        match self {
            FilterName::HigherThan => "HigherThan",
            FilterName::LowerThan => "LowerThan",
            FilterName::TopValues => "TopValues",
            FilterName::BottomValues => "BottomValues",
            FilterName::BoxPlotUpper => "BoxPlotUpper",
            FilterName::BoxPlotLower => "BoxPlotLower",
            FilterName::StdDevAbove => "StdDevAbove",
            FilterName::StdDevBelow => "StdDevBelow",
            FilterName::Between => "Between",
        }
    }

    pub fn lookup(name: &str) -> Option<FilterName> {
        ALL_FILTER_NAMES.iter().copied().find(|f| f.as_str() == name)
    }

    /// Number of arguments the filter takes.
    pub fn arity(self) -> usize {
        match self {
            FilterName::BoxPlotUpper | FilterName::BoxPlotLower => 0,
            FilterName::Between => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for FilterName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A strategy whose filter arguments may contain named holes.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyTemplate {
    pub name: String,
    pub target_kind: EntityKind,
    pub expr: TemplateExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TemplateExpr {
    Atom(TemplateAtom),
    And(Box<TemplateExpr>, Box<TemplateExpr>),
    Or(Box<TemplateExpr>, Box<TemplateExpr>),
    ButNot(Box<TemplateExpr>, Box<TemplateExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateAtom {
    pub metric: Metric,
    pub filter: FilterName,
    pub args: Vec<TemplateArg>,
}

impl StrategyTemplate {
    /// Names of all holes appearing in the template, without the `$`.
    pub fn holes(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        collect_holes(&self.expr, &mut out);
        out
    }

    /// Bind every hole and produce a concrete strategy. Fails when a hole
    /// has no binding or a resolved argument violates the filter's
    /// parameter rules.
    pub fn instantiate(
        &self,
        bindings: &BTreeMap<String, ArgValue>,
    ) -> Result<StrategyAst, StrategyError> {
        let expr = instantiate_expr(&self.expr, bindings)?;
        Ok(StrategyAst { name: self.name.clone(), target_kind: self.target_kind, expr })
    }
}

fn collect_holes(expr: &TemplateExpr, out: &mut BTreeSet<String>) {
    match expr {
        TemplateExpr::Atom(atom) => {
            for arg in &atom.args {
                if let TemplateArg::Hole(name) = arg {
                    out.insert(name.clone());
                }
            }
        }
        TemplateExpr::And(l, r) | TemplateExpr::Or(l, r) | TemplateExpr::ButNot(l, r) => {
            collect_holes(l, out);
            collect_holes(r, out);
        }
    }
}

fn instantiate_expr(
    expr: &TemplateExpr,
    bindings: &BTreeMap<String, ArgValue>,
) -> Result<Expr, StrategyError> {
    Ok(match expr {
        TemplateExpr::Atom(atom) => {
            let mut args = Vec::with_capacity(atom.args.len());
            for arg in &atom.args {
                args.push(match arg {
                    TemplateArg::Value(v) => *v,
                    TemplateArg::Hole(name) => *bindings
                        .get(name)
                        .ok_or_else(|| StrategyError::UnboundHole { name: name.clone() })?,
                });
            }
            Expr::Atom { metric: atom.metric, filter: resolve_filter(atom.filter, &args)? }
        }
        TemplateExpr::And(l, r) => Expr::And(
            Box::new(instantiate_expr(l, bindings)?),
            Box::new(instantiate_expr(r, bindings)?),
        ),
        TemplateExpr::Or(l, r) => Expr::Or(
            Box::new(instantiate_expr(l, bindings)?),
            Box::new(instantiate_expr(r, bindings)?),
        ),
        TemplateExpr::ButNot(l, r) => Expr::ButNot(
            Box::new(instantiate_expr(l, bindings)?),
            Box::new(instantiate_expr(r, bindings)?),
        ),
    })
}

/// Build a [`FilterSpec`] from a filter name and resolved arguments,
/// enforcing each filter's parameter rules.
pub fn resolve_filter(name: FilterName, args: &[ArgValue]) -> Result<FilterSpec, StrategyError> {
    let invalid = |message: String| StrategyError::InvalidFilter { message };
    if args.len() != name.arity() {
        return Err(invalid(format!(
            "{name} takes {} argument(s), got {}",
            name.arity(),
            args.len()
        )));
    }
    let number = |arg: &ArgValue| -> Result<f64, StrategyError> {
        match arg {
            ArgValue::Number(v) => Ok(*v),
            ArgValue::Percent(_) => {
                Err(invalid(format!("{name} does not accept a percentage argument")))
            }
        }
    };
    let count = |arg: &ArgValue| -> Result<Count, StrategyError> {
        match arg {
            ArgValue::Percent(p) => {
                if *p > 0.0 && *p <= 100.0 {
                    Ok(Count::Percent(*p))
                } else {
                    Err(invalid(format!("{name} percentage must lie in (0, 100], got {p}")))
                }
            }
            ArgValue::Number(k) => {
                if *k >= 1.0 && k.fract() == 0.0 {
                    Ok(Count::Absolute(*k as u64))
                } else {
                    Err(invalid(format!("{name} count must be a positive integer, got {k}")))
                }
            }
        }
    };
    Ok(match name {
        FilterName::HigherThan => FilterSpec::HigherThan(number(&args[0])?),
        FilterName::LowerThan => FilterSpec::LowerThan(number(&args[0])?),
        FilterName::TopValues => FilterSpec::TopValues(count(&args[0])?),
        FilterName::BottomValues => FilterSpec::BottomValues(count(&args[0])?),
        FilterName::BoxPlotUpper => FilterSpec::BoxPlotUpper,
        FilterName::BoxPlotLower => FilterSpec::BoxPlotLower,
        FilterName::StdDevAbove | FilterName::StdDevBelow => {
            let k = number(&args[0])?;
            if k <= 0.0 {
                return Err(invalid(format!("{name} factor must be positive, got {k}")));
            }
            if name == FilterName::StdDevAbove {
                FilterSpec::StdDevAbove(k)
            } else {
                FilterSpec::StdDevBelow(k)
            }
        }
        FilterName::Between => {
            let a = number(&args[0])?;
            let b = number(&args[1])?;
            if a >= b {
                return Err(invalid(format!("Between requires a < b, got ({a}, {b})")));
            }
            FilterSpec::Between(a, b)
        }
    })
}
