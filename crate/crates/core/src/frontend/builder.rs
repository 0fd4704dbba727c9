//! Turns a parsed MiniOO program into a [`DesignModel`]: resolves names to
//! entities, records call and access relations, and computes per-method
//! cyclomatic complexity and statement counts.
//!
//! Resolution follows declared static types. A member reference that cannot
//! be resolved against declared classes is attached to the external class at
//! the top of the receiver's inheritance chain as an opaque member; if there
//! is no external class in the chain, the reference is an error.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::frontend::ast::*;
use crate::frontend::lexer::Pos;
use crate::frontend::FrontendError;
use crate::model::{
    AttributeEntity, ClassEntity, DesignModel, EntityId, MethodEntity, Visibility,
};

/// The single built-in primitive type. It never becomes a class entity.
pub const PRIMITIVE_INT: &str = "int";

#[derive(Debug, Clone, PartialEq, Eq)]
enum TypeRef {
    Int,
    Class(EntityId),
    /// Result of a method call or an opaque attribute; has no members.
    Unknown,
}

struct ClassInfo {
    id: EntityId,
    name: String,
    superclass: Option<EntityId>,
    is_external: bool,
    attrs_by_name: BTreeMap<String, EntityId>,
    methods_by_name: BTreeMap<String, EntityId>,
}

pub fn build_model(program: &Program) -> Result<DesignModel, FrontendError> {
    Builder::default().run(program)
}

#[derive(Default)]
struct Builder {
    classes: BTreeMap<EntityId, ClassInfo>,
    by_name: BTreeMap<String, EntityId>,
    methods: BTreeMap<EntityId, MethodEntity>,
    attributes: BTreeMap<EntityId, AttributeEntity>,
    attr_types: BTreeMap<EntityId, TypeRef>,
}

impl Builder {
    fn run(mut self, program: &Program) -> Result<DesignModel, FrontendError> {
        self.register_classes(program)?;
        self.register_members(program)?;
        for decl in &program.classes {
            for method in &decl.methods {
                self.analyze_body(decl, method)?;
            }
        }
        Ok(self.finish())
    }

    fn err<T>(&self, file: &str, pos: Pos, message: impl Into<String>) -> Result<T, FrontendError> {
        Err(FrontendError::Model { file: file.to_string(), message: message.into(), pos })
    }

    fn register_classes(&mut self, program: &Program) -> Result<(), FrontendError> {
        for decl in &program.classes {
            if decl.name == PRIMITIVE_INT || decl.name == "this" {
                return self.err(&decl.file, decl.pos, format!("reserved type name `{}`", decl.name));
            }
            if self.by_name.contains_key(&decl.name) {
                return self.err(&decl.file, decl.pos, format!("duplicate class `{}`", decl.name));
            }
            let id = EntityId::class(&decl.name);
            self.by_name.insert(decl.name.clone(), id.clone());
            self.classes.insert(
                id.clone(),
                ClassInfo {
                    id,
                    name: decl.name.clone(),
                    superclass: None,
                    is_external: false,
                    attrs_by_name: BTreeMap::new(),
                    methods_by_name: BTreeMap::new(),
                },
            );
        }
        for decl in &program.classes {
            let Some(super_name) = &decl.superclass else { continue };
            if super_name == PRIMITIVE_INT {
                return self.err(&decl.file, decl.pos, "cannot extend the primitive type `int`");
            }
            let super_id = self.class_for_type(super_name);
            let id = EntityId::class(&decl.name);
            self.classes.get_mut(&id).expect("registered above").superclass = Some(super_id);
        }
        Ok(())
    }

    /// Id of the class backing a type name, materializing an external class
    /// for names with no declaration. Callers must rule out `int` first.
    fn class_for_type(&mut self, name: &str) -> EntityId {
        if let Some(id) = self.by_name.get(name) {
            return id.clone();
        }
        let id = EntityId::class(name);
        self.by_name.insert(name.to_string(), id.clone());
        self.classes.insert(
            id.clone(),
            ClassInfo {
                id: id.clone(),
                name: name.to_string(),
                superclass: None,
                is_external: true,
                attrs_by_name: BTreeMap::new(),
                methods_by_name: BTreeMap::new(),
            },
        );
        id
    }

    fn resolve_type(&mut self, name: &str) -> TypeRef {
        if name == PRIMITIVE_INT {
            TypeRef::Int
        } else {
            TypeRef::Class(self.class_for_type(name))
        }
    }

    fn register_members(&mut self, program: &Program) -> Result<(), FrontendError> {
        for decl in &program.classes {
            let class_id = EntityId::class(&decl.name);
            for attr in &decl.attributes {
                if attr.name == "this" {
                    return self.err(&decl.file, attr.pos, "reserved name `this`");
                }
                let attr_id = EntityId::attribute(&decl.name, &attr.name);
                let info = self.classes.get_mut(&class_id).expect("class registered");
                if info.attrs_by_name.insert(attr.name.clone(), attr_id.clone()).is_some() {
                    return self.err(
                        &decl.file,
                        attr.pos,
                        format!("duplicate attribute `{}` in class `{}`", attr.name, decl.name),
                    );
                }
                self.attributes.insert(
                    attr_id.clone(),
                    AttributeEntity {
                        id: attr_id.clone(),
                        name: attr.name.clone(),
                        owner: class_id.clone(),
                        visibility: attr.visibility,
                    },
                );
                let ty = self.resolve_type(&attr.type_name);
                self.attr_types.insert(attr_id, ty);
            }
            for method in &decl.methods {
                if method.name == "this" {
                    return self.err(&decl.file, method.pos, "reserved name `this`");
                }
                let method_id = EntityId::method(&decl.name, &method.name);
                let info = self.classes.get_mut(&class_id).expect("class registered");
                if info.methods_by_name.insert(method.name.clone(), method_id).is_some() {
                    return self.err(
                        &decl.file,
                        method.pos,
                        format!("duplicate method `{}` in class `{}`", method.name, decl.name),
                    );
                }
            }
        }
        Ok(())
    }

    fn analyze_body(&mut self, decl: &ClassDecl, method: &MethodDecl) -> Result<(), FrontendError> {
        let class_id = EntityId::class(&decl.name);
        let mut scope: BTreeMap<String, TypeRef> = BTreeMap::new();
        for param in &method.params {
            if param.name == "this" {
                return self.err(&decl.file, param.pos, "reserved name `this`");
            }
            let ty = self.resolve_type(&param.type_name);
            if scope.insert(param.name.clone(), ty).is_some() {
                return self.err(
                    &decl.file,
                    param.pos,
                    format!("duplicate parameter `{}`", param.name),
                );
            }
        }

        let mut ctx = BodyCtx {
            file: decl.file.clone(),
            class_id: class_id.clone(),
            scope,
            calls: BTreeSet::new(),
            accesses: BTreeSet::new(),
        };
        self.walk_block(&mut ctx, &method.body)?;

        let accessor_of = self.detect_accessor(&class_id, method);
        let method_id = EntityId::method(&decl.name, &method.name);
        self.methods.insert(
            method_id.clone(),
            MethodEntity {
                id: method_id,
                name: method.name.clone(),
                owner: class_id,
                visibility: method.visibility,
                cyclomatic: 1 + count_decision_points(&method.body),
                statement_count: count_statements(&method.body),
                calls: ctx.calls,
                accesses: ctx.accesses,
                accessor_of,
            },
        );
        Ok(())
    }

    /// Structural accessor detection: a getter body is exactly
    /// `return this.f;`, a setter body exactly `this.f = p;` for the single
    /// parameter `p`. `f` must be an attribute declared on the owner itself.
    fn detect_accessor(&self, class_id: &EntityId, method: &MethodDecl) -> Option<EntityId> {
        let own_attr = |name: &str| -> Option<EntityId> {
            self.classes.get(class_id)?.attrs_by_name.get(name).cloned()
        };
        if method.body.len() != 1 {
            return None;
        }
        match &method.body[0] {
            Stmt::Return { value: Some(Expr::Field { base, name, .. }), .. }
                if method.params.is_empty() && matches!(**base, Expr::This { .. }) =>
            {
                own_attr(name)
            }
            Stmt::Assign { target, value, .. } if method.params.len() == 1 => {
                let LValue { root: LRoot::This, fields, .. } = target else { return None };
                let [field] = fields.as_slice() else { return None };
                let Expr::Var { name, .. } = value else { return None };
                if *name == method.params[0].name {
                    own_attr(field)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn walk_block(&mut self, ctx: &mut BodyCtx, stmts: &[Stmt]) -> Result<(), FrontendError> {
        for stmt in stmts {
            self.walk_stmt(ctx, stmt)?;
        }
        Ok(())
    }

    fn walk_stmt(&mut self, ctx: &mut BodyCtx, stmt: &Stmt) -> Result<(), FrontendError> {
        match stmt {
            Stmt::VarDecl { name, type_name, init, pos } => {
                if name == "this" {
                    return self.err(&ctx.file.clone(), *pos, "reserved name `this`");
                }
                if let Some(init) = init {
                    self.resolve_expr(ctx, init)?;
                }
                let ty = self.resolve_type(type_name);
                if ctx.scope.insert(name.clone(), ty).is_some() {
                    let file = ctx.file.clone();
                    return self.err(&file, *pos, format!("duplicate local `{name}`"));
                }
            }
            Stmt::Assign { target, value, .. } => {
                self.resolve_expr(ctx, value)?;
                self.resolve_lvalue(ctx, target)?;
            }
            Stmt::Expr { expr, .. } => {
                self.resolve_expr(ctx, expr)?;
            }
            Stmt::If { cond, then_block, else_block, .. } => {
                self.resolve_expr(ctx, cond)?;
                self.walk_block(ctx, then_block)?;
                if let Some(else_block) = else_block {
                    self.walk_block(ctx, else_block)?;
                }
            }
            Stmt::While { cond, body, .. } => {
                self.resolve_expr(ctx, cond)?;
                self.walk_block(ctx, body)?;
            }
            Stmt::For { init, cond, step, body, .. } => {
                if let Some((target, value)) = init {
                    self.resolve_expr(ctx, value)?;
                    self.resolve_lvalue(ctx, target)?;
                }
                if let Some(cond) = cond {
                    self.resolve_expr(ctx, cond)?;
                }
                if let Some((target, value)) = step {
                    self.resolve_expr(ctx, value)?;
                    self.resolve_lvalue(ctx, target)?;
                }
                self.walk_block(ctx, body)?;
            }
            Stmt::Return { value, .. } => {
                if let Some(value) = value {
                    self.resolve_expr(ctx, value)?;
                }
            }
        }
        Ok(())
    }

    fn resolve_lvalue(&mut self, ctx: &mut BodyCtx, target: &LValue) -> Result<(), FrontendError> {
        let mut current = match &target.root {
            LRoot::This => TypeRef::Class(ctx.class_id.clone()),
            LRoot::Var(name) => {
                if let Some(ty) = ctx.scope.get(name) {
                    if target.fields.is_empty() {
                        return Ok(()); // plain write to a local or parameter
                    }
                    ty.clone()
                } else {
                    // a bare identifier may name an attribute of the own class
                    let attr = self.find_attribute(&ctx.class_id.clone(), name);
                    match attr {
                        Some(attr_id) => {
                            ctx.accesses.insert(attr_id.clone());
                            if target.fields.is_empty() {
                                return Ok(());
                            }
                            self.attr_types.get(&attr_id).cloned().unwrap_or(TypeRef::Unknown)
                        }
                        None => {
                            let file = ctx.file.clone();
                            return self.err(
                                &file,
                                target.pos,
                                format!("assignment to undeclared field `{name}`"),
                            );
                        }
                    }
                }
            }
        };
        for field in &target.fields {
            current = self.member_attribute(ctx, current, field, target.pos)?;
        }
        Ok(())
    }

    fn resolve_expr(&mut self, ctx: &mut BodyCtx, expr: &Expr) -> Result<TypeRef, FrontendError> {
        match expr {
            Expr::This { .. } => Ok(TypeRef::Class(ctx.class_id.clone())),
            Expr::Int { .. } => Ok(TypeRef::Int),
            Expr::Var { name, pos } => {
                if let Some(ty) = ctx.scope.get(name) {
                    return Ok(ty.clone());
                }
                let attr = self.find_attribute(&ctx.class_id.clone(), name);
                match attr {
                    Some(attr_id) => {
                        ctx.accesses.insert(attr_id.clone());
                        Ok(self.attr_types.get(&attr_id).cloned().unwrap_or(TypeRef::Unknown))
                    }
                    None => {
                        let file = ctx.file.clone();
                        self.err(&file, *pos, format!("undeclared identifier `{name}`"))
                    }
                }
            }
            Expr::Field { base, name, pos } => {
                let base_ty = self.resolve_expr(ctx, base)?;
                self.member_attribute(ctx, base_ty, name, *pos)
            }
            Expr::Call { receiver, name, args, pos } => {
                for arg in args {
                    self.resolve_expr(ctx, arg)?;
                }
                let receiver_ty = match receiver {
                    Some(receiver) => self.resolve_expr(ctx, receiver)?,
                    None => TypeRef::Class(ctx.class_id.clone()),
                };
                let class_id = self.require_class(ctx, receiver_ty, name, *pos)?;
                let method_id = self.find_method(ctx, &class_id, name, *pos)?;
                ctx.calls.insert(method_id);
                Ok(TypeRef::Unknown)
            }
            Expr::Cmp { lhs, rhs, .. } => {
                self.resolve_expr(ctx, lhs)?;
                self.resolve_expr(ctx, rhs)?;
                Ok(TypeRef::Int)
            }
        }
    }

    /// Resolve `.name` as an attribute of `base_ty`, record the access edge
    /// and return the attribute's declared type.
    fn member_attribute(
        &mut self,
        ctx: &mut BodyCtx,
        base_ty: TypeRef,
        name: &str,
        pos: Pos,
    ) -> Result<TypeRef, FrontendError> {
        let class_id = self.require_class(ctx, base_ty, name, pos)?;
        match self.find_attribute(&class_id, name) {
            Some(attr_id) => {
                ctx.accesses.insert(attr_id.clone());
                Ok(self.attr_types.get(&attr_id).cloned().unwrap_or(TypeRef::Unknown))
            }
            None => {
                let file = ctx.file.clone();
                let class = &self.classes[&class_id].name;
                self.err(
                    &file,
                    pos,
                    format!("no attribute `{name}` on class `{class}` or its ancestors"),
                )
            }
        }
    }

    fn require_class(
        &self,
        ctx: &BodyCtx,
        ty: TypeRef,
        member: &str,
        pos: Pos,
    ) -> Result<EntityId, FrontendError> {
        match ty {
            TypeRef::Class(id) => Ok(id),
            TypeRef::Int => self.err(
                &ctx.file,
                pos,
                format!("the primitive type `int` has no member `{member}`"),
            ),
            TypeRef::Unknown => self.err(
                &ctx.file,
                pos,
                format!("cannot resolve `{member}` on an untyped call result"),
            ),
        }
    }

    /// Search the inheritance chain of `class_id` for an attribute named
    /// `name`. When the search reaches an external class, an opaque
    /// attribute is materialized there.
    fn find_attribute(&mut self, class_id: &EntityId, name: &str) -> Option<EntityId> {
        let mut current = class_id.clone();
        let mut seen = BTreeSet::new();
        loop {
            if !seen.insert(current.clone()) {
                return None; // inheritance cycle; reported by validation
            }
            let info = self.classes.get(&current)?;
            if let Some(attr_id) = info.attrs_by_name.get(name) {
                return Some(attr_id.clone());
            }
            if info.is_external {
                let attr_id = EntityId::attribute(&info.name, name);
                let owner = info.id.clone();
                self.classes
                    .get_mut(&current)
                    .expect("checked above")
                    .attrs_by_name
                    .insert(name.to_string(), attr_id.clone());
                self.attributes.insert(
                    attr_id.clone(),
                    AttributeEntity {
                        id: attr_id.clone(),
                        name: name.to_string(),
                        owner,
                        visibility: Visibility::Public,
                    },
                );
                self.attr_types.insert(attr_id.clone(), TypeRef::Unknown);
                return Some(attr_id);
            }
            current = info.superclass.clone()?;
        }
    }

    /// Like [`Builder::find_attribute`] but for methods, and unresolved
    /// references on fully declared chains are errors.
    fn find_method(
        &mut self,
        ctx: &BodyCtx,
        class_id: &EntityId,
        name: &str,
        pos: Pos,
    ) -> Result<EntityId, FrontendError> {
        let mut current = class_id.clone();
        let mut seen = BTreeSet::new();
        loop {
            if !seen.insert(current.clone()) {
                break; // inheritance cycle; reported by validation
            }
            let Some(info) = self.classes.get(&current) else { break };
            if let Some(method_id) = info.methods_by_name.get(name) {
                return Ok(method_id.clone());
            }
            if info.is_external {
                let method_id = EntityId::method(&info.name, name);
                let owner = info.id.clone();
                self.classes
                    .get_mut(&current)
                    .expect("checked above")
                    .methods_by_name
                    .insert(name.to_string(), method_id.clone());
                self.methods.insert(
                    method_id.clone(),
                    MethodEntity {
                        id: method_id.clone(),
                        name: name.to_string(),
                        owner,
                        visibility: Visibility::Public,
                        cyclomatic: 1,
                        statement_count: 0,
                        calls: BTreeSet::new(),
                        accesses: BTreeSet::new(),
                        accessor_of: None,
                    },
                );
                return Ok(method_id);
            }
            match &info.superclass {
                Some(parent) => current = parent.clone(),
                None => break,
            }
        }
        let file = ctx.file.clone();
        let class = &self.classes[class_id].name;
        self.err(&file, pos, format!("no method `{name}` on class `{class}` or its ancestors"))
    }

    fn finish(self) -> DesignModel {
        let mut classes = BTreeMap::new();
        for (id, info) in self.classes {
            let mut attributes: Vec<EntityId> = info.attrs_by_name.into_values().collect();
            let mut methods: Vec<EntityId> = info.methods_by_name.into_values().collect();
            attributes.sort();
            methods.sort();
            classes.insert(
                id.clone(),
                ClassEntity {
                    id,
                    name: info.name,
                    superclass: info.superclass,
                    is_external: info.is_external,
                    attributes,
                    methods,
                },
            );
        }
        // Inheritance cycles (`class A extends A`) survive building on
        // purpose; model validation reports them to the caller.
        DesignModel::from_parts(classes, self.methods, self.attributes)
    }
}

struct BodyCtx {
    file: String,
    class_id: EntityId,
    scope: BTreeMap<String, TypeRef>,
    calls: BTreeSet<EntityId>,
    accesses: BTreeSet<EntityId>,
}

fn count_decision_points(stmts: &[Stmt]) -> u32 {
    let mut count = 0;
    for stmt in stmts {
        match stmt {
            Stmt::If { then_block, else_block, .. } => {
                count += 1 + count_decision_points(then_block);
                if let Some(else_block) = else_block {
                    count += count_decision_points(else_block);
                }
            }
            Stmt::While { body, .. } | Stmt::For { body, .. } => {
                count += 1 + count_decision_points(body);
            }
            _ => {}
        }
    }
    count
}

/// Number of statement nodes, nested statements included. The init/step
/// clauses of a `for` header belong to the `for` node and are not counted
/// separately.
fn count_statements(stmts: &[Stmt]) -> u32 {
    let mut count = 0;
    for stmt in stmts {
        count += 1;
        match stmt {
            Stmt::If { then_block, else_block, .. } => {
                count += count_statements(then_block);
                if let Some(else_block) = else_block {
                    count += count_statements(else_block);
                }
            }
            Stmt::While { body, .. } | Stmt::For { body, .. } => {
                count += count_statements(body);
            }
            _ => {}
        }
    }
    count
}
