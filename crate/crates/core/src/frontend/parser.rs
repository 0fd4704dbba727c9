//! Recursive-descent parser for MiniOO.

use crate::frontend::ast::*;
use crate::frontend::lexer::{Pos, Token, TokenKind};
use crate::model::Visibility;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message} at {pos}")]
pub struct ParseError {
    pub message: String,
    pub pos: Pos,
}

pub fn parse_file(file: &str, tokens: &[Token]) -> Result<Vec<ClassDecl>, ParseError> {
    let mut parser = Parser { tokens, index: 0, file };
    parser.program()
}

struct Parser<'a> {
    tokens: &'a [Token],
    index: usize,
    file: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.index.min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> &Token {
        let token = &self.tokens[self.index.min(self.tokens.len() - 1)];
        if self.index < self.tokens.len() - 1 {
            self.index += 1;
        }
        token
    }

    fn at_keyword(&self, kw: &str) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Keyword && t.text == kw
    }

    fn at_punct(&self, p: &str) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Punct && t.text == p
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { message: message.into(), pos: self.peek().pos })
    }

    fn describe(token: &Token) -> String {
        match token.kind {
            TokenKind::Eof => "end of input".to_string(),
            _ => format!("`{}`", token.text),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<Pos, ParseError> {
        if self.at_keyword(kw) {
            Ok(self.bump().pos)
        } else {
            self.error(format!("expected `{kw}`, found {}", Self::describe(self.peek())))
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<Pos, ParseError> {
        if self.at_punct(p) {
            Ok(self.bump().pos)
        } else {
            self.error(format!("expected `{p}`, found {}", Self::describe(self.peek())))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Pos), ParseError> {
        if self.peek().kind == TokenKind::Identifier {
            if self.peek().text == "this" {
                return self.error("`this` is reserved and cannot be used as a name");
            }
            let t = self.bump();
            Ok((t.text.clone(), t.pos))
        } else {
            self.error(format!("expected identifier, found {}", Self::describe(self.peek())))
        }
    }

    fn program(&mut self) -> Result<Vec<ClassDecl>, ParseError> {
        let mut classes = Vec::new();
        while self.peek().kind != TokenKind::Eof {
            classes.push(self.class_decl()?);
        }
        Ok(classes)
    }

    fn class_decl(&mut self) -> Result<ClassDecl, ParseError> {
        let pos = self.expect_keyword("class")?;
        let (name, _) = self.expect_ident()?;
        let superclass = if self.eat_keyword("extends") {
            Some(self.expect_ident()?.0)
        } else {
            None
        };
        self.expect_punct("{")?;
        let mut attributes = Vec::new();
        let mut methods = Vec::new();
        while !self.at_punct("}") {
            let vis_pos = self.peek().pos;
            let visibility = if self.eat_keyword("public") {
                Visibility::Public
            } else if self.eat_keyword("private") {
                Visibility::Private
            } else {
                return self.error(format!(
                    "expected `public`, `private` or `}}`, found {}",
                    Self::describe(self.peek())
                ));
            };
            if self.eat_keyword("var") {
                let (name, _) = self.expect_ident()?;
                self.expect_punct(":")?;
                let (type_name, _) = self.expect_ident()?;
                self.expect_punct(";")?;
                attributes.push(AttrDecl { visibility, name, type_name, pos: vis_pos });
            } else if self.eat_keyword("def") {
                let (name, _) = self.expect_ident()?;
                self.expect_punct("(")?;
                let params = self.params()?;
                self.expect_punct(")")?;
                let body = self.block()?;
                methods.push(MethodDecl { visibility, name, params, body, pos: vis_pos });
            } else {
                return self.error(format!(
                    "expected `var` or `def`, found {}",
                    Self::describe(self.peek())
                ));
            }
        }
        self.expect_punct("}")?;
        Ok(ClassDecl {
            name,
            superclass,
            attributes,
            methods,
            file: self.file.to_string(),
            pos,
        })
    }

    fn params(&mut self) -> Result<Vec<Param>, ParseError> {
        let mut params = Vec::new();
        if self.at_punct(")") {
            return Ok(params);
        }
        loop {
            let (name, pos) = self.expect_ident()?;
            self.expect_punct(":")?;
            let (type_name, _) = self.expect_ident()?;
            params.push(Param { name, type_name, pos });
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(params)
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.at_punct("}") {
            if self.peek().kind == TokenKind::Eof {
                return self.error("expected `}`, found end of input");
            }
            stmts.push(self.stmt()?);
        }
        self.expect_punct("}")?;
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let pos = self.peek().pos;
        if self.eat_keyword("var") {
            let (name, _) = self.expect_ident()?;
            self.expect_punct(":")?;
            let (type_name, _) = self.expect_ident()?;
            let init = if self.eat_punct("=") { Some(self.expr()?) } else { None };
            self.expect_punct(";")?;
            return Ok(Stmt::VarDecl { name, type_name, init, pos });
        }
        if self.eat_keyword("if") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let then_block = self.block()?;
            let else_block = if self.eat_keyword("else") { Some(self.block()?) } else { None };
            return Ok(Stmt::If { cond, then_block, else_block, pos });
        }
        if self.eat_keyword("while") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let body = self.block()?;
            return Ok(Stmt::While { cond, body, pos });
        }
        if self.eat_keyword("for") {
            self.expect_punct("(")?;
            let init = if self.at_punct(";") { None } else { Some(self.assign_clause()?) };
            self.expect_punct(";")?;
            let cond = if self.at_punct(";") { None } else { Some(self.expr()?) };
            self.expect_punct(";")?;
            let step = if self.at_punct(")") { None } else { Some(self.assign_clause()?) };
            self.expect_punct(")")?;
            let body = self.block()?;
            return Ok(Stmt::For { init, cond, step, body, pos });
        }
        if self.eat_keyword("return") {
            let value = if self.at_punct(";") { None } else { Some(self.expr()?) };
            self.expect_punct(";")?;
            return Ok(Stmt::Return { value, pos });
        }
        // assignment or expression statement, decided by the `=` after the
        // leading expression
        let expr = self.expr()?;
        if self.at_punct("=") {
            let target = self.expr_to_lvalue(expr)?;
            self.bump();
            let value = self.expr()?;
            self.expect_punct(";")?;
            return Ok(Stmt::Assign { target, value, pos });
        }
        self.expect_punct(";")?;
        Ok(Stmt::Expr { expr, pos })
    }

    /// `lvalue "=" expr` without the trailing semicolon (for-loop clauses).
    fn assign_clause(&mut self) -> Result<(LValue, Expr), ParseError> {
        let expr = self.expr()?;
        let target = self.expr_to_lvalue(expr)?;
        self.expect_punct("=")?;
        let value = self.expr()?;
        Ok((target, value))
    }

    /// Reinterpret an expression as an assignment target. Valid shapes per
    /// the grammar: `x`, `x.f`, `this.f`, `this.f.g`.
    fn expr_to_lvalue(&self, expr: Expr) -> Result<LValue, ParseError> {
        fn collect(expr: &Expr, fields: &mut Vec<String>) -> Option<LRoot> {
            match expr {
                Expr::Var { name, .. } => Some(LRoot::Var(name.clone())),
                Expr::This { .. } => Some(LRoot::This),
                Expr::Field { base, name, .. } => {
                    let root = collect(base, fields)?;
                    fields.push(name.clone());
                    Some(root)
                }
                _ => None,
            }
        }
        let pos = expr.pos();
        let mut fields = Vec::new();
        let root = collect(&expr, &mut fields);
        let ok = match &root {
            Some(LRoot::Var(_)) => fields.len() <= 1,
            Some(LRoot::This) => (1..=2).contains(&fields.len()),
            None => false,
        };
        if !ok {
            return Err(ParseError { message: "invalid assignment target".to_string(), pos });
        }
        Ok(LValue { root: root.unwrap(), fields, pos })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.postfix()?;
        while self.at_punct(">") || self.at_punct("<") || self.at_punct("==") {
            let pos = self.peek().pos;
            let op = match self.bump().text.as_str() {
                ">" => CmpOp::Gt,
                "<" => CmpOp::Lt,
                _ => CmpOp::Eq,
            };
            let rhs = self.postfix()?;
            lhs = Expr::Cmp { op, lhs: Box::new(lhs), rhs: Box::new(rhs), pos };
        }
        Ok(lhs)
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut expr = self.primary()?;
        while self.at_punct(".") {
            let pos = self.bump().pos;
            let (name, _) = self.expect_ident()?;
            if self.eat_punct("(") {
                let args = self.args()?;
                self.expect_punct(")")?;
                expr = Expr::Call { receiver: Some(Box::new(expr)), name, args, pos };
            } else {
                expr = Expr::Field { base: Box::new(expr), name, pos };
            }
        }
        Ok(expr)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let token = self.peek().clone();
        match token.kind {
            TokenKind::Identifier if token.text == "this" => {
                self.bump();
                Ok(Expr::This { pos: token.pos })
            }
            TokenKind::Identifier => {
                self.bump();
                if self.eat_punct("(") {
                    let args = self.args()?;
                    self.expect_punct(")")?;
                    Ok(Expr::Call { receiver: None, name: token.text, args, pos: token.pos })
                } else {
                    Ok(Expr::Var { name: token.text, pos: token.pos })
                }
            }
            TokenKind::Integer => {
                self.bump();
                let value: i64 = token.text.parse().map_err(|_| ParseError {
                    message: format!("integer literal `{}` out of range", token.text),
                    pos: token.pos,
                })?;
                Ok(Expr::Int { value, pos: token.pos })
            }
            _ => self.error(format!("expected expression, found {}", Self::describe(&token))),
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut args = Vec::new();
        if self.at_punct(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(args)
    }
}
