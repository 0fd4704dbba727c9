//! Parser for SOD strategy files.
//!
//! ```text
//! file     = {strategy} ;
//! strategy = IDENT ":=" orexpr ";" ;
//! orexpr   = andexpr {"or" andexpr} ;
//! andexpr  = atom {("and"|"butnot") atom} ;
//! atom     = "(" METRIC "," filter ")" | "(" orexpr ")" ;
//! filter   = NAME "(" arg {"," arg} ")" | NAME ;
//! arg      = NUMBER ["%"] | "$" IDENT ;
//! ```
//!
//! `#` starts a line comment. `$name` arguments are holes for the tuning
//! machinery; strategies meant for direct evaluation must not contain any.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::metrics::Metric;
use crate::strategy::ast::*;
use crate::strategy::StrategyError;

#[derive(Debug, Clone, PartialEq)]
enum SodToken {
    Ident(String),
    Number(f64),
    Hole(String),
    Assign,
    Percent,
    LParen,
    RParen,
    Comma,
    Semi,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct SodPos {
    line: u32,
    column: u32,
}

/// Parse a SOD file into templates, holes allowed.
pub fn parse_templates(text: &str) -> Result<Vec<StrategyTemplate>, StrategyError> {
    let tokens = lex(text)?;
    SodParser { tokens, index: 0 }.file()
}

/// Parse a SOD file into concrete strategies; any `$hole` is an error.
pub fn parse_strategies(text: &str) -> Result<Vec<StrategyAst>, StrategyError> {
    let empty = BTreeMap::new();
    parse_templates(text)?
        .iter()
        .map(|template| template.instantiate(&empty))
        .collect()
}

/// Parse a SOD file expected to define exactly one concrete strategy.
pub fn parse_strategy(text: &str) -> Result<StrategyAst, StrategyError> {
    let mut strategies = parse_strategies(text)?;
    match strategies.len() {
        1 => Ok(strategies.pop().expect("length checked")),
        n => Err(StrategyError::Parse {
            line: 1,
            column: 1,
            message: format!("expected exactly one strategy, found {n}"),
        }),
    }
}

fn lex(text: &str) -> Result<Vec<(SodToken, SodPos)>, StrategyError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1u32;
    let mut column = 1u32;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    column = 1;
                } else {
                    column += 1;
                }
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let pos = SodPos { line, column };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while let Some(&n) = chars.peek() {
                if n == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(&n) = chars.peek() {
                if n.is_ascii_alphanumeric() || n == '_' {
                    word.push(n);
                    bump!();
                } else {
                    break;
                }
            }
            tokens.push((SodToken::Ident(word), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(&n) = chars.peek() {
                if n.is_ascii_digit() || n == '.' {
                    digits.push(n);
                    bump!();
                } else {
                    break;
                }
            }
            let value: f64 = digits.parse().map_err(|_| StrategyError::Parse {
                line: pos.line,
                column: pos.column,
                message: format!("malformed number `{digits}`"),
            })?;
            tokens.push((SodToken::Number(value), pos));
            continue;
        }
        match c {
            '$' => {
                bump!();
                let mut name = String::new();
                while let Some(&n) = chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        name.push(n);
                        bump!();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return Err(StrategyError::Parse {
                        line: pos.line,
                        column: pos.column,
                        message: "`$` must be followed by a hole name".to_string(),
                    });
                }
                tokens.push((SodToken::Hole(name), pos));
            }
            ':' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    tokens.push((SodToken::Assign, pos));
                } else {
                    return Err(StrategyError::Parse {
                        line: pos.line,
                        column: pos.column,
                        message: "expected `:=`".to_string(),
                    });
                }
            }
            '%' => {
                bump!();
                tokens.push((SodToken::Percent, pos));
            }
            '(' => {
                bump!();
                tokens.push((SodToken::LParen, pos));
            }
            ')' => {
                bump!();
                tokens.push((SodToken::RParen, pos));
            }
            ',' => {
                bump!();
                tokens.push((SodToken::Comma, pos));
            }
            ';' => {
                bump!();
                tokens.push((SodToken::Semi, pos));
            }
            other => {
                return Err(StrategyError::Parse {
                    line: pos.line,
                    column: pos.column,
                    message: format!("illegal character `{other}`"),
                })
            }
        }
    }
    tokens.push((SodToken::Eof, SodPos { line, column }));
    Ok(tokens)
}

struct SodParser {
    tokens: Vec<(SodToken, SodPos)>,
    index: usize,
}

impl SodParser {
    fn peek(&self) -> &(SodToken, SodPos) {
        &self.tokens[self.index.min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> (SodToken, SodPos) {
        let token = self.tokens[self.index.min(self.tokens.len() - 1)].clone();
        if self.index < self.tokens.len() - 1 {
            self.index += 1;
        }
        token
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, StrategyError> {
        let (_, pos) = self.peek();
        Err(StrategyError::Parse { line: pos.line, column: pos.column, message: message.into() })
    }

    fn expect(&mut self, token: SodToken, what: &str) -> Result<(), StrategyError> {
        if self.peek().0 == token {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", describe(&self.peek().0)))
        }
    }

    fn file(&mut self) -> Result<Vec<StrategyTemplate>, StrategyError> {
        let mut strategies = Vec::new();
        while self.peek().0 != SodToken::Eof {
            strategies.push(self.strategy()?);
        }
        Ok(strategies)
    }

    fn strategy(&mut self) -> Result<StrategyTemplate, StrategyError> {
        let name = match self.bump() {
            (SodToken::Ident(name), _) => name,
            (other, pos) => {
                return Err(StrategyError::Parse {
                    line: pos.line,
                    column: pos.column,
                    message: format!("expected strategy name, found {}", describe(&other)),
                })
            }
        };
        self.expect(SodToken::Assign, "`:=`")?;
        let expr = self.or_expr()?;
        self.expect(SodToken::Semi, "`;`")?;

        let target_kind = check_kinds(&name, &expr)?;
        Ok(StrategyTemplate { name, target_kind, expr })
    }

    fn or_expr(&mut self) -> Result<TemplateExpr, StrategyError> {
        let mut lhs = self.and_expr()?;
        while let SodToken::Ident(word) = &self.peek().0 {
            if word != "or" {
                break;
            }
            self.bump();
            let rhs = self.and_expr()?;
            lhs = TemplateExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<TemplateExpr, StrategyError> {
        let mut lhs = self.atom()?;
        while let SodToken::Ident(word) = &self.peek().0 {
            let and = match word.as_str() {
                "and" => true,
                "butnot" => false,
                _ => break,
            };
            self.bump();
            let rhs = self.atom()?;
            lhs = if and {
                TemplateExpr::And(Box::new(lhs), Box::new(rhs))
            } else {
                TemplateExpr::ButNot(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<TemplateExpr, StrategyError> {
        self.expect(SodToken::LParen, "`(`")?;
        // `(` starting a grouped expression can only be followed by another
        // `(`; a metric atom always starts with an identifier.
        if self.peek().0 == SodToken::LParen {
            let inner = self.or_expr()?;
            self.expect(SodToken::RParen, "`)`")?;
            return Ok(inner);
        }
        let (token, pos) = self.bump();
        let SodToken::Ident(metric_name) = token else {
            return Err(StrategyError::Parse {
                line: pos.line,
                column: pos.column,
                message: format!("expected metric name, found {}", describe(&token)),
            });
        };
        let metric = Metric::from_str(&metric_name).map_err(|_| StrategyError::UnknownMetric {
            name: metric_name.clone(),
            line: pos.line,
            column: pos.column,
        })?;
        self.expect(SodToken::Comma, "`,`")?;
        let atom = self.filter(metric)?;
        self.expect(SodToken::RParen, "`)`")?;
        Ok(TemplateExpr::Atom(atom))
    }

    fn filter(&mut self, metric: Metric) -> Result<TemplateAtom, StrategyError> {
        let (token, pos) = self.bump();
        let SodToken::Ident(filter_name) = token else {
            return Err(StrategyError::Parse {
                line: pos.line,
                column: pos.column,
                message: format!("expected filter name, found {}", describe(&token)),
            });
        };
        let filter =
            FilterName::lookup(&filter_name).ok_or_else(|| StrategyError::UnknownFilter {
                name: filter_name.clone(),
                line: pos.line,
                column: pos.column,
            })?;
        let mut args = Vec::new();
        if self.peek().0 == SodToken::LParen {
            self.bump();
            loop {
                args.push(self.arg()?);
                if self.peek().0 == SodToken::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(SodToken::RParen, "`)`")?;
        }
        if args.len() != filter.arity() {
            return Err(StrategyError::InvalidFilter {
                message: format!(
                    "{filter} takes {} argument(s), got {}",
                    filter.arity(),
                    args.len()
                ),
            });
        }
        Ok(TemplateAtom { metric, filter, args })
    }

    fn arg(&mut self) -> Result<TemplateArg, StrategyError> {
        match self.bump() {
            (SodToken::Number(value), _) => {
                if self.peek().0 == SodToken::Percent {
                    self.bump();
                    Ok(TemplateArg::Value(ArgValue::Percent(value)))
                } else {
                    Ok(TemplateArg::Value(ArgValue::Number(value)))
                }
            }
            (SodToken::Hole(name), _) => Ok(TemplateArg::Hole(name)),
            (other, pos) => Err(StrategyError::Parse {
                line: pos.line,
                column: pos.column,
                message: format!("expected a number or `$hole`, found {}", describe(&other)),
            }),
        }
    }
}

/// Every atom's metric must live on the same entity kind; that kind becomes
/// the strategy's target kind.
fn check_kinds(strategy: &str, expr: &TemplateExpr) -> Result<crate::model::EntityKind, StrategyError> {
    fn first_atom(expr: &TemplateExpr) -> &TemplateAtom {
        match expr {
            TemplateExpr::Atom(atom) => atom,
            TemplateExpr::And(l, _) | TemplateExpr::Or(l, _) | TemplateExpr::ButNot(l, _) => {
                first_atom(l)
            }
        }
    }
    fn check(
        strategy: &str,
        expr: &TemplateExpr,
        expected: crate::model::EntityKind,
    ) -> Result<(), StrategyError> {
        match expr {
            TemplateExpr::Atom(atom) => {
                let found = atom.metric.entity_kind();
                if found != expected {
                    return Err(StrategyError::TypeMismatch {
                        strategy: strategy.to_string(),
                        metric: atom.metric,
                        expected,
                        found,
                    });
                }
                Ok(())
            }
            TemplateExpr::And(l, r) | TemplateExpr::Or(l, r) | TemplateExpr::ButNot(l, r) => {
                check(strategy, l, expected)?;
                check(strategy, r, expected)
            }
        }
    }
    let expected = first_atom(expr).metric.entity_kind();
    check(strategy, expr, expected)?;
    Ok(expected)
}

fn describe(token: &SodToken) -> String {
    match token {
        SodToken::Ident(name) => format!("`{name}`"),
        SodToken::Number(value) => format!("`{}`", format_number(*value)),
        SodToken::Hole(name) => format!("`${name}`"),
        SodToken::Assign => "`:=`".to_string(),
        SodToken::Percent => "`%`".to_string(),
        SodToken::LParen => "`(`".to_string(),
        SodToken::RParen => "`)`".to_string(),
        SodToken::Comma => "`,`".to_string(),
        SodToken::Semi => "`;`".to_string(),
        SodToken::Eof => "end of input".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{Count, FilterSpec};

    const GOD_CLASS: &str =
        "GodClass := (WMC, TopValues(50%)) and (ATFD, HigherThan(1)) and (TCC, BottomValues(50%));";

    #[test]
    fn god_class_parses_to_three_atom_and_chain() {
        let ast = parse_strategy(GOD_CLASS).unwrap();
        assert_eq!(ast.name, "GodClass");
        assert_eq!(ast.target_kind, crate::model::EntityKind::Class);
        let Expr::And(left, right) = &ast.expr else { panic!("expected and at the top") };
        let Expr::And(ll, lr) = &**left else { panic!("expected left-associative nesting") };
        assert!(matches!(
            &**ll,
            Expr::Atom { metric: Metric::Wmc, filter: FilterSpec::TopValues(Count::Percent(p)) }
                if *p == 50.0
        ));
        assert!(matches!(
            &**lr,
            Expr::Atom { metric: Metric::Atfd, filter: FilterSpec::HigherThan(t) } if *t == 1.0
        ));
        assert!(matches!(
            &**right,
            Expr::Atom { metric: Metric::Tcc, filter: FilterSpec::BottomValues(Count::Percent(p)) }
                if *p == 50.0
        ));
    }

    #[test]
    fn mixed_entity_kinds_are_a_type_error() {
        let err = parse_strategy("X := (WMC, TopValues(50%)) and (CC, HigherThan(5));").unwrap_err();
        assert!(matches!(err, StrategyError::TypeMismatch { metric: Metric::Cc, .. }), "{err:?}");
    }

    #[test]
    fn unknown_filter_is_a_name_error() {
        let err = parse_strategy("X := (WMC, Frobnicate(3));").unwrap_err();
        assert!(
            matches!(err, StrategyError::UnknownFilter { ref name, .. } if name == "Frobnicate"),
            "{err:?}"
        );
    }

    #[test]
    fn unknown_metric_is_a_name_error() {
        let err = parse_strategy("X := (XYZZY, HigherThan(3));").unwrap_err();
        assert!(
            matches!(err, StrategyError::UnknownMetric { ref name, .. } if name == "XYZZY"),
            "{err:?}"
        );
    }

    #[test]
    fn or_binds_looser_than_and() {
        let ast = parse_strategy(
            "X := (WMC, HigherThan(1)) and (NOC, HigherThan(2)) or (DIT, HigherThan(3));",
        )
        .unwrap();
        let Expr::Or(left, _) = &ast.expr else { panic!("expected or at the top") };
        assert!(matches!(**left, Expr::And(..)));
    }

    #[test]
    fn parentheses_override_precedence() {
        let ast = parse_strategy(
            "X := (WMC, HigherThan(1)) and ((NOC, HigherThan(2)) or (DIT, HigherThan(3)));",
        )
        .unwrap();
        let Expr::And(_, right) = &ast.expr else { panic!("expected and at the top") };
        assert!(matches!(**right, Expr::Or(..)));
    }

    #[test]
    fn bare_statistical_filter_parses() {
        let ast = parse_strategy("X := (WMC, BoxPlotUpper);").unwrap();
        assert!(matches!(ast.expr, Expr::Atom { filter: FilterSpec::BoxPlotUpper, .. }));
    }

    #[test]
    fn between_requires_increasing_bounds() {
        let err = parse_strategy("X := (WMC, Between(30, 20));").unwrap_err();
        assert!(matches!(err, StrategyError::InvalidFilter { .. }), "{err:?}");
    }

    #[test]
    fn zero_count_is_rejected() {
        let err = parse_strategy("X := (WMC, TopValues(0));").unwrap_err();
        assert!(matches!(err, StrategyError::InvalidFilter { .. }), "{err:?}");
    }

    #[test]
    fn out_of_range_percentage_is_rejected() {
        let err = parse_strategy("X := (WMC, TopValues(150%));").unwrap_err();
        assert!(matches!(err, StrategyError::InvalidFilter { .. }), "{err:?}");
    }

    #[test]
    fn holes_are_rejected_in_concrete_strategies() {
        let err = parse_strategy("X := (WMC, TopValues($p));").unwrap_err();
        assert!(matches!(err, StrategyError::UnboundHole { ref name } if name == "p"), "{err:?}");
    }

    #[test]
    fn holes_are_collected_from_templates() {
        let templates =
            parse_templates("X := (WMC, TopValues($p)) and (TCC, BottomValues($p));").unwrap();
        let holes = templates[0].holes();
        assert_eq!(holes.into_iter().collect::<Vec<_>>(), vec!["p".to_string()]);
    }

    #[test]
    fn comments_are_skipped() {
        let text = "# a comment\nX := (WMC, HigherThan(1)); # trailing\n";
        assert_eq!(parse_strategies(text).unwrap().len(), 1);
    }

    #[test]
    fn multiple_strategies_parse_in_order() {
        let text = "A := (WMC, HigherThan(1));\nB := (CC, HigherThan(2));";
        let strategies = parse_strategies(text).unwrap();
        assert_eq!(strategies[0].name, "A");
        assert_eq!(strategies[1].name, "B");
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_strategy("X := (WMC HigherThan(1));").unwrap_err();
        let StrategyError::Parse { line, column, .. } = err else { panic!("expected parse error") };
        assert_eq!(line, 1);
        assert!(column > 1);
    }

    #[test]
    fn decimal_arguments_parse() {
        let ast = parse_strategy("X := (TCC, LowerThan(0.33));").unwrap();
        assert!(matches!(
            ast.expr,
            Expr::Atom { filter: FilterSpec::LowerThan(t), .. } if t == 0.33
        ));
    }

    proptest::proptest! {
        #[test]
        fn sod_parser_never_panics(text in "[a-zA-Z0-9(),;:%$=. \n#]{0,120}") {
            let _ = parse_templates(&text);
        }
    }
}
