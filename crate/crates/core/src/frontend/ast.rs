//! Syntax tree for MiniOO programs. Every node carries the source position
//! of its first token.

use crate::frontend::lexer::Pos;
use crate::model::Visibility;

/// One parsed program, possibly merged from several source files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub classes: Vec<ClassDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    pub superclass: Option<String>,
    pub attributes: Vec<AttrDecl>,
    pub methods: Vec<MethodDecl>,
    pub file: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrDecl {
    pub visibility: Visibility,
    pub name: String,
    pub type_name: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDecl {
    pub visibility: Visibility,
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub type_name: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Stmt {
    VarDecl { name: String, type_name: String, init: Option<Expr>, pos: Pos },
    Assign { target: LValue, value: Expr, pos: Pos },
    Expr { expr: Expr, pos: Pos },
    If { cond: Expr, then_block: Vec<Stmt>, else_block: Option<Vec<Stmt>>, pos: Pos },
    While { cond: Expr, body: Vec<Stmt>, pos: Pos },
    For {
        init: Option<(LValue, Expr)>,
        cond: Option<Expr>,
        step: Option<(LValue, Expr)>,
        body: Vec<Stmt>,
        pos: Pos,
    },
    Return { value: Option<Expr>, pos: Pos },
}

impl Stmt {
    pub fn pos(&self) -> Pos {
        match self {
            Stmt::VarDecl { pos, .. }
            | Stmt::Assign { pos, .. }
            | Stmt::Expr { pos, .. }
            | Stmt::If { pos, .. }
            | Stmt::While { pos, .. }
            | Stmt::For { pos, .. }
            | Stmt::Return { pos, .. } => *pos,
        }
    }
}

/// Assignment target: `x`, `x.f`, `this.f` or `this.f.g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LValue {
    pub root: LRoot,
    pub fields: Vec<String>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LRoot {
    This,
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    This { pos: Pos },
    Var { name: String, pos: Pos },
    Int { value: i64, pos: Pos },
    Field { base: Box<Expr>, name: String, pos: Pos },
    /// `receiver.name(args)`; a missing receiver is a call on the own class.
    Call { receiver: Option<Box<Expr>>, name: String, args: Vec<Expr>, pos: Pos },
    Cmp { op: CmpOp, lhs: Box<Expr>, rhs: Box<Expr>, pos: Pos },
}

impl Expr {
    pub fn pos(&self) -> Pos {
        match self {
            Expr::This { pos }
            | Expr::Var { pos, .. }
            | Expr::Int { pos, .. }
            | Expr::Field { pos, .. }
            | Expr::Call { pos, .. }
            | Expr::Cmp { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Gt,
    Lt,
    Eq,
}
