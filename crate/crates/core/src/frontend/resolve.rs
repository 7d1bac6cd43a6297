//! Name resolution and type checking.
//!
//! Service integers (`int`) are evaluated at translation time and never become
//! symbolic. A bit-typed value in an `int` context is rejected here, which is
//! what guarantees that loop bounds, indices and slice ranges are concrete
//! during execution.

use std::collections::{BTreeMap, HashMap};

use super::ast::*;
use super::lexer::Attribute;
use super::{Diagnostic, Pos};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeclId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    Global,
    Local,
    Param,
    Function,
}

/// Static type of an expression. `Bits(None)` is a bit vector whose width is
/// only known during execution (slices with loop-dependent bounds).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    Int,
    Bits(Option<usize>),
    Void,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclInfo {
    pub name: String,
    pub kind: DeclKind,
    pub base: BaseType,
    /// Number of cells for `bit` variables (1 for scalars), return width for
    /// bit functions.
    pub width: usize,
    pub is_array: bool,
    pub attr: Option<Attribute>,
    pub pos: Pos,
    pub scope: usize,
    pub node: NodeId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scope {
    pub parent: Option<usize>,
    pub names: BTreeMap<String, DeclId>,
}

/// Scopes indexed by creation order; index 0 is the global scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeTree {
    pub scopes: Vec<Scope>,
}

impl ScopeTree {
    pub const ROOT: usize = 0;

    fn new() -> Self {
        ScopeTree {
            scopes: vec![Scope::default()],
        }
    }

    fn push(&mut self, parent: usize) -> usize {
        self.scopes.push(Scope {
            parent: Some(parent),
            names: BTreeMap::new(),
        });
        self.scopes.len() - 1
    }

    pub fn lookup(&self, mut scope: usize, name: &str) -> Option<DeclId> {
        loop {
            if let Some(d) = self.scopes[scope].names.get(name) {
                return Some(*d);
            }
            scope = self.scopes[scope].parent?;
        }
    }
}

/// A program with every name bound and every type checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolved {
    pub program: Program,
    pub scopes: ScopeTree,
    pub decls: Vec<DeclInfo>,
    /// Binding of every place and call to its declaration.
    pub uses: HashMap<NodeId, DeclId>,
    /// Declaration id for each declaring node (globals, locals, params, functions).
    pub decl_of_node: HashMap<NodeId, DeclId>,
    /// Initial values of global `int` variables and of initialized global
    /// `bit` variables.
    pub global_ints: BTreeMap<DeclId, i64>,
    /// Constant lengths of arrays and bit-array returns, keyed by declaring node.
    pub lengths: HashMap<NodeId, usize>,
    pub warnings: Vec<Diagnostic>,
}

impl Resolved {
    pub fn decl(&self, id: DeclId) -> &DeclInfo {
        &self.decls[id.0 as usize]
    }

    pub fn binding(&self, use_id: NodeId) -> DeclId {
        self.uses[&use_id]
    }

    pub fn decl_id(&self, node: NodeId) -> DeclId {
        self.decl_of_node[&node]
    }

    pub fn main(&self) -> &FunctionDecl {
        self.program.function("main").expect("resolved program has main")
    }

    /// Global declarations in source order.
    pub fn globals(&self) -> impl Iterator<Item = (DeclId, &VarDecl)> {
        self.program.globals().map(|d| (self.decl_id(d.id), d))
    }

    /// Total number of `__in` bits.
    pub fn input_width(&self) -> usize {
        self.globals()
            .filter(|(_, d)| d.attr == Some(Attribute::In))
            .map(|(id, _)| self.decl(id).width)
            .sum()
    }

    /// Total number of `__out` bits.
    pub fn output_width(&self) -> usize {
        self.globals()
            .filter(|(_, d)| d.attr == Some(Attribute::Out))
            .map(|(id, _)| self.decl(id).width)
            .sum()
    }
}

pub fn resolve(program: Program) -> Result<Resolved, Vec<Diagnostic>> {
    resolve_with(program, &BTreeMap::new())
}

/// Resolves `program`, replacing the initial values of the named global `int`
/// variables with `overrides`.
pub fn resolve_with(
    program: Program,
    overrides: &BTreeMap<String, i64>,
) -> Result<Resolved, Vec<Diagnostic>> {
    let mut r = Resolver {
        scopes: ScopeTree::new(),
        decls: Vec::new(),
        uses: HashMap::new(),
        decl_of_node: HashMap::new(),
        global_ints: BTreeMap::new(),
        lengths: HashMap::new(),
        errors: Vec::new(),
        warnings: Vec::new(),
        current_fn: None,
        calls: BTreeMap::new(),
        signatures: HashMap::new(),
    };
    r.run(&program, overrides);
    if r.errors.is_empty() {
        Ok(Resolved {
            program,
            scopes: r.scopes,
            decls: r.decls,
            uses: r.uses,
            decl_of_node: r.decl_of_node,
            global_ints: r.global_ints,
            lengths: r.lengths,
            warnings: r.warnings,
        })
    } else {
        Err(r.errors)
    }
}

struct Resolver {
    scopes: ScopeTree,
    decls: Vec<DeclInfo>,
    uses: HashMap<NodeId, DeclId>,
    decl_of_node: HashMap<NodeId, DeclId>,
    global_ints: BTreeMap<DeclId, i64>,
    lengths: HashMap<NodeId, usize>,
    errors: Vec<Diagnostic>,
    warnings: Vec<Diagnostic>,
    current_fn: Option<DeclId>,
    /// Call graph: caller -> [(callee, call position)].
    calls: BTreeMap<DeclId, Vec<(DeclId, Pos)>>,
    /// Parameter base types and widths per function.
    signatures: HashMap<DeclId, Vec<(BaseType, usize)>>,
}

impl Resolver {
    fn err(&mut self, msg: impl Into<String>, pos: Pos) {
        self.errors.push(Diagnostic::error(msg, pos));
    }

    fn declare(&mut self, scope: usize, info: DeclInfo) -> DeclId {
        let id = DeclId(self.decls.len() as u32);
        if self.scopes.scopes[scope].names.contains_key(&info.name) {
            self.err(format!("duplicate declaration of `{}`", info.name), info.pos);
        } else {
            self.scopes.scopes[scope].names.insert(info.name.clone(), id);
        }
        self.decl_of_node.insert(info.node, id);
        self.decls.push(info);
        id
    }

    fn run(&mut self, program: &Program, overrides: &BTreeMap<String, i64>) {
        let root = ScopeTree::ROOT;

        // Globals and function signatures first, so order of items does not
        // matter for them.
        for item in &program.items {
            match item {
                Item::Global(d) => self.global(d, overrides),
                Item::Function(f) => {
                    let width = match (&f.ret, &f.ret_len) {
                        (BaseType::Bit, Some(e)) => self.const_len(e, f.id).unwrap_or(1),
                        (BaseType::Bit, None) => 1,
                        (_, Some(e)) => {
                            self.err("only `bit` functions may return arrays", e.loc.0);
                            0
                        }
                        _ => 0,
                    };
                    let sig = f.params.iter().map(|p| (p.ty, self.param_width(p))).collect();
                    let fid = self.declare(
                        root,
                        DeclInfo {
                            name: f.name.clone(),
                            kind: DeclKind::Function,
                            base: f.ret,
                            width,
                            is_array: f.ret_len.is_some(),
                            attr: None,
                            pos: f.loc.0,
                            scope: root,
                            node: f.id,
                        },
                    );
                    self.signatures.insert(fid, sig);
                }
            }
        }
        for name in overrides.keys() {
            let ok = self
                .scopes
                .lookup(root, name)
                .map(|d| {
                    let d = &self.decls[d.0 as usize];
                    d.kind == DeclKind::Global && d.base == BaseType::Int
                })
                .unwrap_or(false);
            if !ok {
                self.err(
                    format!("override `{name}` does not name a global int"),
                    Pos::new(1, 1),
                );
            }
        }

        for f in program.functions() {
            self.function(f);
        }

        match program.function("main") {
            None => self.err("missing entry point: no function named `main`", Pos::new(1, 1)),
            Some(m) => {
                if m.ret != BaseType::Void || !m.params.is_empty() {
                    self.err("entry point must be declared as `void main()`", m.loc.0);
                }
            }
        }

        self.check_recursion();
    }

    fn global(&mut self, d: &VarDecl, overrides: &BTreeMap<String, i64>) {
        let root = ScopeTree::ROOT;
        let pos = d.loc.0;
        match (d.attr, d.ty) {
            (Some(Attribute::In | Attribute::Out), BaseType::Int | BaseType::Void) => self.err(
                format!(
                    "attribute `{}` requires a `bit` declaration, found `{}`",
                    d.attr.unwrap().as_str(),
                    d.ty.as_str()
                ),
                pos,
            ),
            (Some(Attribute::Mem), BaseType::Int | BaseType::Void) => {
                self.err("attribute `__mem` requires a `bit` declaration", pos)
            }
            (_, BaseType::Void) => self.err("variables cannot have type `void`", pos),
            _ => {}
        }
        if d.attr == Some(Attribute::In) && d.init.is_some() {
            self.err("an `__in` variable cannot have an initializer", pos);
        }
        let width = self.var_width(d);
        let id = self.declare(
            root,
            DeclInfo {
                name: d.name.clone(),
                kind: DeclKind::Global,
                base: d.ty,
                width,
                is_array: d.len.is_some(),
                attr: d.attr,
                pos,
                scope: root,
                node: d.id,
            },
        );
        if let Some(init) = &d.init {
            match self.const_eval(init) {
                Some(v) => {
                    self.global_ints.insert(id, v);
                }
                None => self.err(
                    "global initializers must be constant integer expressions",
                    init.loc.0,
                ),
            }
        } else if d.ty == BaseType::Int {
            self.global_ints.insert(id, 0);
        }
        if let Some(v) = overrides.get(&d.name) {
            if d.ty == BaseType::Int {
                self.global_ints.insert(id, *v);
            }
        }
    }

    fn var_width(&mut self, d: &VarDecl) -> usize {
        match (&d.len, d.ty) {
            (Some(len), BaseType::Bit) => self.const_len(len, d.id).unwrap_or(1),
            (Some(len), _) => {
                self.err("only `bit` variables can be arrays", len.loc.0);
                1
            }
            (None, _) => 1,
        }
    }

    fn const_len(&mut self, e: &Expr, node: NodeId) -> Option<usize> {
        match self.const_eval(e) {
            Some(v) if v > 0 => {
                self.lengths.insert(node, v as usize);
                Some(v as usize)
            }
            Some(v) => {
                self.err(format!("array length must be positive, found {v}"), e.loc.0);
                None
            }
            None => {
                self.err("array length must be a constant integer expression", e.loc.0);
                None
            }
        }
    }

    /// Evaluates integer literals, global ints and their operators at
    /// translation time.
    fn const_eval(&self, e: &Expr) -> Option<i64> {
        match &e.kind {
            ExprKind::Int(v) => Some(*v),
            ExprKind::Place(p) if matches!(p.sel, Selector::Whole) => {
                let d = self.scopes.lookup(ScopeTree::ROOT, &p.name)?;
                if self.decls[d.0 as usize].base != BaseType::Int {
                    return None;
                }
                self.global_ints.get(&d).copied()
            }
            ExprKind::Unary(op, inner) => {
                let v = self.const_eval(inner)?;
                Some(match op {
                    UnOp::Not => (v == 0) as i64,
                    UnOp::BitNot => !v,
                    UnOp::Neg => v.wrapping_neg(),
                })
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.const_eval(l)?;
                let b = self.const_eval(r)?;
                int_binop(*op, a, b).ok()
            }
            _ => None,
        }
    }

    fn param_width(&mut self, p: &Param) -> usize {
        match (p.ty, &p.len) {
            (BaseType::Void, _) => {
                self.err("parameters cannot have type `void`", p.loc.0);
                1
            }
            (BaseType::Int, Some(len)) => {
                self.err("only `bit` parameters can be arrays", len.loc.0);
                1
            }
            (BaseType::Bit, Some(len)) => self.const_len(len, p.id).unwrap_or(1),
            _ => 1,
        }
    }

    fn function(&mut self, f: &FunctionDecl) {
        let fid = self.decl_of_node[&f.id];
        self.current_fn = Some(fid);
        let scope = self.scopes.push(ScopeTree::ROOT);
        let sig = self.signatures.get(&fid).cloned().unwrap_or_default();
        for (p, &(_, width)) in f.params.iter().zip(&sig) {
            self.declare(
                scope,
                DeclInfo {
                    name: p.name.clone(),
                    kind: DeclKind::Param,
                    base: p.ty,
                    width,
                    is_array: p.len.is_some(),
                    attr: None,
                    pos: p.loc.0,
                    scope,
                    node: p.id,
                },
            );
        }
        // The body shares the parameter scope, as in C.
        self.stmts(&f.body.stmts, scope, true);
        if f.ret != BaseType::Void
            && !matches!(f.body.stmts.last(), Some(Stmt { kind: StmtKind::Return(Some(_)), .. }))
        {
            self.err(
                format!("function `{}` must end with a `return` statement", f.name),
                f.loc.0,
            );
        }
        self.current_fn = None;
    }

    fn stmts(&mut self, stmts: &[Stmt], scope: usize, fn_body: bool) {
        for (i, s) in stmts.iter().enumerate() {
            let last_in_fn = fn_body && i + 1 == stmts.len();
            self.stmt(s, scope, last_in_fn);
        }
    }

    fn block(&mut self, b: &Block, parent: usize) {
        let scope = self.scopes.push(parent);
        self.stmts(&b.stmts, scope, false);
    }

    fn stmt(&mut self, s: &Stmt, scope: usize, last_in_fn: bool) {
        let pos = s.loc.0;
        match &s.kind {
            StmtKind::Decl(d) => self.local(d, scope),
            StmtKind::Assign { place, op, value } => {
                let pt = self.place(place, scope, true);
                let vt = self.expr(value, scope);
                let rhs = match op.binop() {
                    None => vt,
                    Some(bop) => self.binop_type(bop, pt, vt, pos),
                };
                self.check_assign(pt, rhs, pos);
            }
            StmtKind::Step { place, .. } => {
                let t = self.place(place, scope, true);
                if t != Ty::Int && t != Ty::Void {
                    self.err("`++`/`--` require an `int` variable", pos);
                }
            }
            StmtKind::If {
                cond,
                then_block,
                else_branch,
            } => {
                let t = self.expr(cond, scope);
                if t == Ty::Void {
                    self.err("condition has no value", cond.loc.0);
                }
                self.block(then_block, scope);
                match else_branch {
                    Some(ElseBranch::Block(b)) => self.block(b, scope),
                    Some(ElseBranch::If(stmt)) => self.stmt(stmt, scope, false),
                    None => {}
                }
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                let loop_scope = self.scopes.push(scope);
                self.stmt(init, loop_scope, false);
                match self.expr(cond, loop_scope) {
                    Ty::Int => {}
                    _ => self.err(
                        "non-constant loop bound: loop conditions must be `int` expressions",
                        cond.loc.0,
                    ),
                }
                self.stmt(step, loop_scope, false);
                self.block(body, loop_scope);
            }
            StmtKind::Call(c) => {
                self.call(c, scope);
            }
            StmtKind::Return(e) => {
                let Some(fid) = self.current_fn else { return };
                if !last_in_fn {
                    self.err(
                        "`return` is only allowed as the last statement of a function body",
                        pos,
                    );
                }
                let (base, width) = {
                    let d = &self.decls[fid.0 as usize];
                    (d.base, d.width)
                };
                let t = e.as_ref().map(|e| self.expr(e, scope));
                match (base, t) {
                    (BaseType::Void, None) => {}
                    (BaseType::Void, Some(_)) => self.err("`void` function cannot return a value", pos),
                    (_, None) => self.err("missing return value", pos),
                    (BaseType::Int, Some(Ty::Int)) => {}
                    (BaseType::Int, Some(_)) => {
                        self.err("bit value used where a service int is required", pos)
                    }
                    (BaseType::Bit, Some(Ty::Void)) => self.err("return value has no value", pos),
                    (BaseType::Bit, Some(Ty::Bits(Some(w)))) if w > width => self.warnings.push(
                        Diagnostic::warning(
                            format!("return value of width {w} truncated to {width}"),
                            pos,
                        ),
                    ),
                    (BaseType::Bit, Some(_)) => {}
                }
            }
            StmtKind::Assert(e) => {
                if self.expr(e, scope) == Ty::Void {
                    self.err("assert expression has no value", e.loc.0);
                }
            }
            StmtKind::CoreVars(p) => {
                if let Ty::Int | Ty::Void = self.place(p, scope, false) {
                    self.err("core_vars requires a `bit` variable", p.loc.0);
                }
            }
            StmtKind::Block(b) => self.block(b, scope),
        }
    }

    fn local(&mut self, d: &VarDecl, scope: usize) {
        let pos = d.loc.0;
        match d.attr {
            Some(Attribute::In | Attribute::Out) => self.err(
                format!(
                    "attribute `{}` is only allowed on global `bit` declarations",
                    d.attr.unwrap().as_str()
                ),
                pos,
            ),
            Some(Attribute::Mem) if d.ty != BaseType::Bit => {
                self.err("attribute `__mem` requires a `bit` declaration", pos)
            }
            _ => {}
        }
        if d.ty == BaseType::Void {
            self.err("variables cannot have type `void`", pos);
        }
        let width = self.var_width(d);
        // The initializer sees the enclosing scope, not the new name.
        if let Some(init) = &d.init {
            let t = self.expr(init, scope);
            let target = match d.ty {
                BaseType::Int => Ty::Int,
                _ => Ty::Bits(Some(width)),
            };
            self.check_assign(target, t, init.loc.0);
        }
        self.declare(
            scope,
            DeclInfo {
                name: d.name.clone(),
                kind: DeclKind::Local,
                base: d.ty,
                width,
                is_array: d.len.is_some(),
                attr: d.attr,
                pos,
                scope,
                node: d.id,
            },
        );
    }

    fn check_assign(&mut self, target: Ty, value: Ty, pos: Pos) {
        match (target, value) {
            (Ty::Void, _) => {}
            (_, Ty::Void) => self.err("expression has no value", pos),
            (Ty::Int, Ty::Bits(_)) => {
                self.err("bit value used where a service int is required", pos)
            }
            _ => {}
        }
    }

    fn lookup_var(&mut self, name: &str, scope: usize, pos: Pos) -> Option<DeclId> {
        match self.scopes.lookup(scope, name) {
            None => {
                self.err(format!("undeclared identifier `{name}`"), pos);
                None
            }
            Some(d) if self.decls[d.0 as usize].kind == DeclKind::Function => {
                self.err(format!("`{name}` is a function, not a variable"), pos);
                None
            }
            Some(d) => Some(d),
        }
    }

    /// Type of a place; `Ty::Void` signals an error already reported.
    fn place(&mut self, p: &Place, scope: usize, _write: bool) -> Ty {
        let pos = p.loc.0;
        let Some(did) = self.lookup_var(&p.name, scope, pos) else {
            return Ty::Void;
        };
        self.uses.insert(p.id, did);
        let (base, width) = {
            let d = &self.decls[did.0 as usize];
            (d.base, d.width)
        };
        if base == BaseType::Int {
            if !matches!(p.sel, Selector::Whole) {
                self.err(format!("`{}` is an int and cannot be indexed", p.name), pos);
            }
            return Ty::Int;
        }
        match &p.sel {
            Selector::Whole => Ty::Bits(Some(width)),
            Selector::Index(i) => {
                self.int_operand(i, scope);
                if let Some(v) = self.const_eval_local(i) {
                    if v < 0 || v as usize >= width {
                        self.err(
                            format!("index {v} out of bounds for `{}` of length {width}", p.name),
                            i.loc.0,
                        );
                    }
                }
                Ty::Bits(Some(1))
            }
            Selector::Slice(lo, hi) => {
                self.int_operand(lo, scope);
                self.int_operand(hi, scope);
                match (self.const_eval_local(lo), self.const_eval_local(hi)) {
                    (Some(l), Some(h)) => {
                        if l < 0 || h as usize > width || l >= h {
                            self.err(
                                format!(
                                    "slice [{l}:{h}] out of bounds for `{}` of length {width}",
                                    p.name
                                ),
                                pos,
                            );
                            Ty::Bits(None)
                        } else {
                            Ty::Bits(Some((h - l) as usize))
                        }
                    }
                    _ => Ty::Bits(None),
                }
            }
        }
    }

    /// Constant folding restricted to literals (locals may shadow globals).
    fn const_eval_local(&self, e: &Expr) -> Option<i64> {
        match &e.kind {
            ExprKind::Int(v) => Some(*v),
            ExprKind::Unary(UnOp::Neg, inner) => self.const_eval_local(inner).map(i64::wrapping_neg),
            ExprKind::Binary(op, l, r) => {
                int_binop(*op, self.const_eval_local(l)?, self.const_eval_local(r)?).ok()
            }
            _ => None,
        }
    }

    fn int_operand(&mut self, e: &Expr, scope: usize) {
        match self.expr(e, scope) {
            Ty::Int | Ty::Void => {}
            Ty::Bits(_) => self.err(
                "bit value used where a service int is required",
                e.loc.0,
            ),
        }
    }

    fn call(&mut self, c: &Call, scope: usize) -> Ty {
        let pos = c.loc.0;
        let Some(fid) = self.scopes.lookup(scope, &c.name) else {
            self.err(format!("undeclared function `{}`", c.name), pos);
            for a in &c.args {
                self.expr(a, scope);
            }
            return Ty::Void;
        };
        let (kind, base, width) = {
            let d = &self.decls[fid.0 as usize];
            (d.kind, d.base, d.width)
        };
        if kind != DeclKind::Function {
            self.err(format!("`{}` is not a function", c.name), pos);
            return Ty::Void;
        }
        self.uses.insert(c.id, fid);
        if let Some(caller) = self.current_fn {
            self.calls.entry(caller).or_default().push((fid, pos));
        }
        let params = self.signatures.get(&fid).cloned().unwrap_or_default();
        let arg_types: Vec<Ty> = c.args.iter().map(|a| self.expr(a, scope)).collect();
        if params.len() != arg_types.len() {
            self.err(
                format!(
                    "function `{}` expects {} argument(s), found {}",
                    c.name,
                    params.len(),
                    arg_types.len()
                ),
                pos,
            );
        } else {
            for ((pbase, _), (t, a)) in params.iter().zip(arg_types.iter().zip(&c.args)) {
                match (pbase, t) {
                    (_, Ty::Void) => self.err("argument has no value", a.loc.0),
                    (BaseType::Int, Ty::Bits(_)) => {
                        self.err("bit value used where a service int is required", a.loc.0)
                    }
                    _ => {}
                }
            }
        }
        match base {
            BaseType::Void => Ty::Void,
            BaseType::Int => Ty::Int,
            BaseType::Bit => Ty::Bits(Some(width)),
        }
    }

    fn expr(&mut self, e: &Expr, scope: usize) -> Ty {
        let pos = e.loc.0;
        match &e.kind {
            ExprKind::Int(_) => Ty::Int,
            ExprKind::Place(p) => self.place(p, scope, false),
            ExprKind::Call(c) => self.call(c, scope),
            ExprKind::Unary(op, inner) => {
                let t = self.expr(inner, scope);
                match (op, t) {
                    (_, Ty::Void) => {
                        self.err("operand has no value", pos);
                        Ty::Void
                    }
                    (_, Ty::Int) => Ty::Int,
                    (UnOp::Not, Ty::Bits(_)) => Ty::Bits(Some(1)),
                    (_, t) => t,
                }
            }
            ExprKind::Binary(op, l, r) => {
                let lt = self.expr(l, scope);
                let rt = self.expr(r, scope);
                self.binop_type(*op, lt, rt, pos)
            }
        }
    }

    fn binop_type(&mut self, op: BinOp, lt: Ty, rt: Ty, pos: Pos) -> Ty {
        use BinOp::*;
        if lt == Ty::Void || rt == Ty::Void {
            self.err("operand has no value", pos);
            return Ty::Void;
        }
        match op {
            Div | Rem => {
                if lt != Ty::Int || rt != Ty::Int {
                    self.err(
                        format!("operator `{}` is only defined on service ints", op.as_str()),
                        pos,
                    );
                    return Ty::Void;
                }
                Ty::Int
            }
            Shl | Shr => {
                if rt != Ty::Int {
                    self.err("shift amount must be a service int", pos);
                    return Ty::Void;
                }
                lt
            }
            Or | And | Eq | Ne | Lt | Le | Gt | Ge => {
                if lt == Ty::Int && rt == Ty::Int {
                    Ty::Int
                } else {
                    Ty::Bits(Some(1))
                }
            }
            BitOr | BitXor | BitAnd | Add | Sub | Mul => match (lt, rt) {
                (Ty::Int, Ty::Int) => Ty::Int,
                (Ty::Bits(w), Ty::Int) | (Ty::Int, Ty::Bits(w)) => Ty::Bits(w),
                (Ty::Bits(Some(a)), Ty::Bits(Some(b))) => Ty::Bits(Some(a.max(b))),
                _ => Ty::Bits(None),
            },
        }
    }

    fn check_recursion(&mut self) {
        // Iterative DFS with colors over the call graph.
        let mut color: HashMap<DeclId, u8> = HashMap::new();
        let nodes: Vec<DeclId> = self.calls.keys().copied().collect();
        for start in nodes {
            if color.get(&start).copied().unwrap_or(0) != 0 {
                continue;
            }
            let mut stack: Vec<(DeclId, usize)> = vec![(start, 0)];
            color.insert(start, 1);
            while let Some((node, next)) = stack.pop() {
                let edges = self.calls.get(&node).cloned().unwrap_or_default();
                if next < edges.len() {
                    stack.push((node, next + 1));
                    let (callee, pos) = edges[next];
                    match color.get(&callee).copied().unwrap_or(0) {
                        0 => {
                            color.insert(callee, 1);
                            stack.push((callee, 0));
                        }
                        1 => {
                            let name = self.decls[callee.0 as usize].name.clone();
                            self.err(format!("recursive call to `{name}` is not supported"), pos);
                        }
                        _ => {}
                    }
                } else {
                    color.insert(node, 2);
                }
            }
        }
    }
}

/// Integer semantics shared by constant folding and execution: wrapping
/// arithmetic, logical results as 0/1, shifts by 64 or more produce 0.
pub fn int_binop(op: BinOp, a: i64, b: i64) -> Result<i64, &'static str> {
    use BinOp::*;
    Ok(match op {
        Or => ((a != 0) || (b != 0)) as i64,
        And => ((a != 0) && (b != 0)) as i64,
        BitOr => a | b,
        BitXor => a ^ b,
        BitAnd => a & b,
        Eq => (a == b) as i64,
        Ne => (a != b) as i64,
        Lt => (a < b) as i64,
        Le => (a <= b) as i64,
        Gt => (a > b) as i64,
        Ge => (a >= b) as i64,
        Shl | Shr => {
            if b < 0 {
                return Err("negative shift amount");
            }
            if b >= 64 {
                if op == Shr && a < 0 {
                    -1
                } else {
                    0
                }
            } else if op == Shl {
                a.wrapping_shl(b as u32)
            } else {
                a >> b
            }
        }
        Add => a.wrapping_add(b),
        Sub => a.wrapping_sub(b),
        Mul => a.wrapping_mul(b),
        Div => {
            if b == 0 {
                return Err("division by zero");
            }
            a.wrapping_div(b)
        }
        Rem => {
            if b == 0 {
                return Err("division by zero");
            }
            a.wrapping_rem(b)
        }
    })
}
