//! Syntax tree for `.alg` programs and its pretty-printer.
//!
//! Source locations are carried in [`Loc`], which never takes part in
//! equality: two trees compare equal when they have the same structure.

use std::fmt::{self, Write};

use super::lexer::Attribute;
use super::Pos;

/// Location wrapper that is ignored by `PartialEq`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Loc(pub Pos);

impl PartialEq for Loc {
    fn eq(&self, _: &Loc) -> bool {
        true
    }
}

impl Eq for Loc {}

/// Identity of a declaration or a name use. Assigned in parse order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseType {
    Bit,
    Int,
    Void,
}

impl BaseType {
    pub fn as_str(self) -> &'static str {
        match self {
            BaseType::Bit => "bit",
            BaseType::Int => "int",
            BaseType::Void => "void",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Global(VarDecl),
    Function(FunctionDecl),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub id: NodeId,
    pub attr: Option<Attribute>,
    pub ty: BaseType,
    pub name: String,
    pub len: Option<Expr>,
    pub init: Option<Expr>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub id: NodeId,
    pub ty: BaseType,
    pub name: String,
    pub len: Option<Expr>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDecl {
    pub id: NodeId,
    pub ret: BaseType,
    /// Width of a bit-array return value (`bit[8] f(...)`).
    pub ret_len: Option<Expr>,
    pub name: String,
    pub params: Vec<Param>,
    pub body: Block,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Decl(VarDecl),
    Assign {
        place: Place,
        op: AssignOp,
        value: Expr,
    },
    /// `x++` or `x--`.
    Step {
        place: Place,
        increment: bool,
    },
    If {
        cond: Expr,
        then_block: Block,
        else_branch: Option<ElseBranch>,
    },
    For {
        init: Box<Stmt>,
        cond: Expr,
        step: Box<Stmt>,
        body: Block,
    },
    Call(Call),
    Return(Option<Expr>),
    Assert(Expr),
    CoreVars(Place),
    Block(Block),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElseBranch {
    Block(Block),
    If(Box<Stmt>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Place {
    pub id: NodeId,
    pub name: String,
    pub sel: Selector,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    Whole,
    Index(Box<Expr>),
    /// Half-open range `[lo:hi]`.
    Slice(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Call {
    pub id: NodeId,
    pub name: String,
    pub args: Vec<Expr>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Place(Place),
    Call(Call),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    /// `!`
    Not,
    /// `~`
    BitNot,
    /// unary `-`
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Or,
    And,
    BitOr,
    BitXor,
    BitAnd,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Shl,
    Shr,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinOp {
    pub fn precedence(self) -> u8 {
        use BinOp::*;
        match self {
            Or => 1,
            And => 2,
            BitOr => 3,
            BitXor => 4,
            BitAnd => 5,
            Eq | Ne => 6,
            Lt | Le | Gt | Ge => 7,
            Shl | Shr => 8,
            Add | Sub => 9,
            Mul | Div | Rem => 10,
        }
    }

    pub fn as_str(self) -> &'static str {
        use BinOp::*;
        match self {
            Or => "||",
            And => "&&",
            BitOr => "|",
            BitXor => "^",
            BitAnd => "&",
            Eq => "==",
            Ne => "!=",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            Shl => "<<",
            Shr => ">>",
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Rem => "%",
        }
    }

    pub fn from_str(s: &str) -> Option<BinOp> {
        use BinOp::*;
        Some(match s {
            "||" => Or,
            "&&" => And,
            "|" => BitOr,
            "^" => BitXor,
            "&" => BitAnd,
            "==" => Eq,
            "!=" => Ne,
            "<" => Lt,
            "<=" => Le,
            ">" => Gt,
            ">=" => Ge,
            "<<" => Shl,
            ">>" => Shr,
            "+" => Add,
            "-" => Sub,
            "*" => Mul,
            "/" => Div,
            "%" => Rem,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssignOp {
    Set,
    Xor,
    And,
    Or,
    Add,
    Sub,
    Shl,
    Shr,
}

impl AssignOp {
    pub fn as_str(self) -> &'static str {
        match self {
            AssignOp::Set => "=",
            AssignOp::Xor => "^=",
            AssignOp::And => "&=",
            AssignOp::Or => "|=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
            AssignOp::Shl => "<<=",
            AssignOp::Shr => ">>=",
        }
    }

    pub fn from_str(s: &str) -> Option<AssignOp> {
        Some(match s {
            "=" => AssignOp::Set,
            "^=" => AssignOp::Xor,
            "&=" => AssignOp::And,
            "|=" => AssignOp::Or,
            "+=" => AssignOp::Add,
            "-=" => AssignOp::Sub,
            "<<=" => AssignOp::Shl,
            ">>=" => AssignOp::Shr,
            _ => return None,
        })
    }

    /// The binary operator a compound assignment applies.
    pub fn binop(self) -> Option<BinOp> {
        match self {
            AssignOp::Set => None,
            AssignOp::Xor => Some(BinOp::BitXor),
            AssignOp::And => Some(BinOp::BitAnd),
            AssignOp::Or => Some(BinOp::BitOr),
            AssignOp::Add => Some(BinOp::Add),
            AssignOp::Sub => Some(BinOp::Sub),
            AssignOp::Shl => Some(BinOp::Shl),
            AssignOp::Shr => Some(BinOp::Shr),
        }
    }
}

impl Program {
    pub fn functions(&self) -> impl Iterator<Item = &FunctionDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Function(f) => Some(f),
            _ => None,
        })
    }

    pub fn globals(&self) -> impl Iterator<Item = &VarDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Global(d) => Some(d),
            _ => None,
        })
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions().find(|f| f.name == name)
    }
}

// ---------------------------------------------------------------------------
// Pretty-printing

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            match item {
                Item::Global(d) => {
                    write_decl(&mut out, d);
                    out.push('\n');
                }
                Item::Function(func) => write_function(&mut out, func),
            }
        }
        f.write_str(&out)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self);
        f.write_str(&s)
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn write_decl(out: &mut String, d: &VarDecl) {
    if let Some(a) = d.attr {
        out.push_str(a.as_str());
        out.push(' ');
    }
    out.push_str(d.ty.as_str());
    out.push(' ');
    out.push_str(&d.name);
    if let Some(len) = &d.len {
        out.push('[');
        write_expr(out, len);
        out.push(']');
    }
    if let Some(init) = &d.init {
        out.push_str(" = ");
        write_expr(out, init);
    }
    out.push(';');
}

fn write_function(out: &mut String, func: &FunctionDecl) {
    out.push_str(func.ret.as_str());
    if let Some(len) = &func.ret_len {
        out.push('[');
        write_expr(out, len);
        out.push(']');
    }
    let _ = write!(out, " {}(", func.name);
    for (i, p) in func.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(p.ty.as_str());
        out.push(' ');
        out.push_str(&p.name);
        if let Some(len) = &p.len {
            out.push('[');
            write_expr(out, len);
            out.push(']');
        }
    }
    out.push_str(") ");
    write_block(out, &func.body, 0);
    out.push('\n');
}

fn write_block(out: &mut String, b: &Block, depth: usize) {
    out.push_str("{\n");
    for s in &b.stmts {
        indent(out, depth + 1);
        write_stmt(out, s, depth + 1);
        out.push('\n');
    }
    indent(out, depth);
    out.push('}');
}

/// Writes a statement without the trailing `;` for simple forms used in `for` headers.
fn write_simple(out: &mut String, s: &Stmt) {
    match &s.kind {
        StmtKind::Decl(d) => {
            write_decl(out, d);
            out.pop();
        }
        StmtKind::Assign { place, op, value } => {
            write_place(out, place);
            let _ = write!(out, " {} ", op.as_str());
            write_expr(out, value);
        }
        StmtKind::Step { place, increment } => {
            write_place(out, place);
            out.push_str(if *increment { "++" } else { "--" });
        }
        _ => unreachable!("not a simple statement"),
    }
}

fn write_stmt(out: &mut String, s: &Stmt, depth: usize) {
    match &s.kind {
        StmtKind::Decl(_) | StmtKind::Assign { .. } | StmtKind::Step { .. } => {
            write_simple(out, s);
            out.push(';');
        }
        StmtKind::If {
            cond,
            then_block,
            else_branch,
        } => {
            out.push_str("if (");
            write_expr(out, cond);
            out.push_str(") ");
            write_block(out, then_block, depth);
            match else_branch {
                None => {}
                Some(ElseBranch::Block(b)) => {
                    out.push_str(" else ");
                    write_block(out, b, depth);
                }
                Some(ElseBranch::If(stmt)) => {
                    out.push_str(" else ");
                    write_stmt(out, stmt, depth);
                }
            }
        }
        StmtKind::For {
            init,
            cond,
            step,
            body,
        } => {
            out.push_str("for (");
            write_simple(out, init);
            out.push_str("; ");
            write_expr(out, cond);
            out.push_str("; ");
            write_simple(out, step);
            out.push_str(") ");
            write_block(out, body, depth);
        }
        StmtKind::Call(c) => {
            write_call(out, c);
            out.push(';');
        }
        StmtKind::Return(e) => {
            out.push_str("return");
            if let Some(e) = e {
                out.push(' ');
                write_expr(out, e);
            }
            out.push(';');
        }
        StmtKind::Assert(e) => {
            out.push_str("assert(");
            write_expr(out, e);
            out.push_str(");");
        }
        StmtKind::CoreVars(p) => {
            out.push_str("core_vars(");
            write_place(out, p);
            out.push_str(");");
        }
        StmtKind::Block(b) => write_block(out, b, depth),
    }
}

fn write_place(out: &mut String, p: &Place) {
    out.push_str(&p.name);
    match &p.sel {
        Selector::Whole => {}
        Selector::Index(i) => {
            out.push('[');
            write_expr(out, i);
            out.push(']');
        }
        Selector::Slice(lo, hi) => {
            out.push('[');
            write_expr(out, lo);
            out.push(':');
            write_expr(out, hi);
            out.push(']');
        }
    }
}

fn write_call(out: &mut String, c: &Call) {
    out.push_str(&c.name);
    out.push('(');
    for (i, a) in c.args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, a);
    }
    out.push(')');
}

fn write_expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Int(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Place(p) => write_place(out, p),
        ExprKind::Call(c) => write_call(out, c),
        ExprKind::Unary(op, inner) => {
            out.push(match op {
                UnOp::Not => '!',
                UnOp::BitNot => '~',
                UnOp::Neg => '-',
            });
            let paren = matches!(inner.kind, ExprKind::Binary(..) | ExprKind::Unary(..));
            if paren {
                out.push('(');
            }
            write_expr(out, inner);
            if paren {
                out.push(')');
            }
        }
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            let lp = matches!(&l.kind, ExprKind::Binary(lo, ..) if lo.precedence() < p);
            let rp = matches!(&r.kind, ExprKind::Binary(ro, ..) if ro.precedence() <= p);
            if lp {
                out.push('(');
            }
            write_expr(out, l);
            if lp {
                out.push(')');
            }
            let _ = write!(out, " {} ", op.as_str());
            if rp {
                out.push('(');
            }
            write_expr(out, r);
            if rp {
                out.push(')');
            }
        }
    }
}
