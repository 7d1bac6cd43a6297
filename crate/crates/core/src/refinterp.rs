//! Direct concrete interpreter for resolved programs.
//!
//! It walks the syntax tree with plain Boolean vectors and arbitrary
//! precision arithmetic, without building any formula. It serves as the
//! reference the encoder is checked against.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::frontend::ast::*;
use crate::frontend::lexer::Attribute;
use crate::frontend::resolve::int_binop;
use crate::frontend::{DeclId, Pos, Resolved, RuntimeError};

/// Outcome of a concrete run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub outputs: Vec<bool>,
    /// Values recorded by `core_vars`, in execution order.
    pub core_vars: Vec<(String, Vec<bool>)>,
}

/// Runs `main` on the given input bits (declaration order of `__in` globals).
/// A violated assertion is reported as an error.
pub fn interpret(resolved: &Resolved, input: &[bool]) -> Result<Run, RuntimeError> {
    let want = resolved.input_width();
    if input.len() != want {
        return Err(RuntimeError::new(
            format!("expected {want} input bits, got {}", input.len()),
            Pos::new(1, 1),
        ));
    }
    let n_nodes = resolved
        .uses
        .keys()
        .chain(resolved.decl_of_node.keys())
        .map(|n| n.0 as usize + 1)
        .max()
        .unwrap_or(0);
    let mut ids = vec![None; n_nodes];
    for (n, d) in resolved.uses.iter().chain(&resolved.decl_of_node) {
        ids[n.0 as usize] = Some(*d);
    }
    let mut it = Interp {
        r: resolved,
        ids,
        vars: vec![vec![None; resolved.decls.len()]],
        core: Vec::new(),
    };
    let mut next_input = 0;
    let mut outs = Vec::new();
    for (did, d) in resolved.globals() {
        let info = resolved.decl(did);
        let v = match d.ty {
            BaseType::Int => Val::Int(resolved.global_ints.get(&did).copied().unwrap_or(0)),
            _ if d.attr == Some(Attribute::In) => {
                let bits = input[next_input..next_input + info.width].to_vec();
                next_input += info.width;
                Val::Bits(bits)
            }
            _ => Val::Bits(fit(
                Val::Int(resolved.global_ints.get(&did).copied().unwrap_or(0)),
                info.width,
            )),
        };
        if d.attr == Some(Attribute::Out) {
            outs.push(did);
        }
        it.vars[0][did.0 as usize] = Some(v);
    }
    it.exec_block(&resolved.main().body.stmts)?;
    let mut outputs = Vec::new();
    for did in outs {
        if let Some(Val::Bits(b)) = &it.vars[0][did.0 as usize] {
            outputs.extend_from_slice(b);
        }
    }
    Ok(Run {
        outputs,
        core_vars: it.core,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Val {
    Int(i64),
    Bits(Vec<bool>),
    Void,
}

/// Converts to a bit vector of exactly `w` bits: ints in two's complement,
/// bit vectors truncated or zero-extended.
fn fit(v: Val, w: usize) -> Vec<bool> {
    match v {
        Val::Int(x) => (0..w).map(|i| (x >> i.min(63)) & 1 == 1).collect(),
        Val::Bits(mut b) => {
            b.resize(w, false);
            b
        }
        Val::Void => vec![false; w],
    }
}

fn to_big(bits: &[bool]) -> BigUint {
    let mut n = BigUint::zero();
    for (i, &b) in bits.iter().enumerate() {
        if b {
            n.set_bit(i as u64, true);
        }
    }
    n
}

fn from_big(n: &BigUint, w: usize) -> Vec<bool> {
    (0..w).map(|i| n.bit(i as u64)).collect()
}

struct Interp<'a> {
    r: &'a Resolved,
    /// Declaration bound at each syntax node (uses and declarations).
    ids: Vec<Option<DeclId>>,
    /// Variable environments indexed by declaration; index 0 holds the
    /// globals and the locals of `main`, the last one the current frame.
    vars: Vec<Vec<Option<Val>>>,
    core: Vec<(String, Vec<bool>)>,
}

type R<T> = Result<T, RuntimeError>;

impl<'a> Interp<'a> {
    fn err<T>(&self, msg: impl Into<String>, pos: Pos) -> R<T> {
        Err(RuntimeError::new(msg, pos))
    }

    fn lookup(&mut self, did: DeclId) -> &mut Val {
        let top = self.vars.len() - 1;
        let d = did.0 as usize;
        if top > 0 && self.vars[top][d].is_some() {
            self.vars[top][d].as_mut().unwrap()
        } else {
            self.vars[0][d].as_mut().expect("bound variable")
        }
    }

    fn id(&self, node: crate::frontend::ast::NodeId) -> DeclId {
        self.ids[node.0 as usize].expect("resolved node")
    }

    fn exec_block(&mut self, stmts: &[Stmt]) -> R<Option<Val>> {
        let mut ret = None;
        for s in stmts {
            ret = self.exec(s)?;
        }
        Ok(ret)
    }

    fn exec(&mut self, s: &Stmt) -> R<Option<Val>> {
        let pos = s.loc.0;
        match &s.kind {
            StmtKind::Decl(d) => {
                let did = self.id(d.id);
                let init = match &d.init {
                    Some(e) => self.eval(e)?,
                    None => Val::Int(0),
                };
                let v = match d.ty {
                    BaseType::Int => init,
                    _ => Val::Bits(fit(init, self.r.decl(did).width)),
                };
                let top = self.vars.len() - 1;
                self.vars[top][did.0 as usize] = Some(v);
            }
            StmtKind::Assign { place, op, value } => {
                let (did, range) = self.place_range(place)?;
                let rhs = self.eval(value)?;
                let v = match op.binop() {
                    None => rhs,
                    Some(b) => {
                        let cur = self.read(did, range);
                        self.binop(b, cur, rhs, pos)?
                    }
                };
                self.store(did, range, v);
            }
            StmtKind::Step { place, increment } => {
                let did = self.id(place.id);
                if let Val::Int(x) = self.lookup(did) {
                    *x = x.wrapping_add(if *increment { 1 } else { -1 });
                }
            }
            StmtKind::If {
                cond,
                then_block,
                else_branch,
            } => {
                let c = self.eval(cond)?;
                if truthy(&c) {
                    self.exec_block(&then_block.stmts)?;
                } else {
                    match else_branch {
                        Some(ElseBranch::Block(b)) => {
                            self.exec_block(&b.stmts)?;
                        }
                        Some(ElseBranch::If(st)) => {
                            self.exec(st)?;
                        }
                        None => {}
                    }
                }
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                self.exec(init)?;
                let mut count: u64 = 0;
                loop {
                    match self.eval(cond)? {
                        Val::Int(0) => break,
                        Val::Int(_) => {}
                        _ => return self.err("non-constant loop bound", cond.loc.0),
                    }
                    count += 1;
                    if count > crate::symex::MAX_LOOP_ITERATIONS {
                        return self.err("loop exceeds the iteration limit", pos);
                    }
                    self.exec_block(&body.stmts)?;
                    self.exec(step)?;
                }
            }
            StmtKind::Call(c) => {
                self.call(c)?;
            }
            StmtKind::Return(e) => {
                return Ok(Some(match e {
                    Some(e) => self.eval(e)?,
                    None => Val::Void,
                }))
            }
            StmtKind::Assert(e) => {
                let v = self.eval(e)?;
                if !truthy(&v) {
                    return self.err("assertion failed", e.loc.0);
                }
            }
            StmtKind::CoreVars(p) => {
                let (did, range) = self.place_range(p)?;
                if let Val::Bits(b) = self.read(did, range) {
                    let mut label = Expr {
                        kind: ExprKind::Place(p.clone()),
                        loc: p.loc,
                    }
                    .to_string();
                    label.retain(|c| !c.is_whitespace());
                    self.core.push((label, b));
                }
            }
            StmtKind::Block(b) => {
                self.exec_block(&b.stmts)?;
            }
        }
        Ok(None)
    }

    /// Declaration and bit range `[lo, hi)` designated by a place; ints use `None`.
    fn place_range(&mut self, p: &Place) -> R<(DeclId, Option<(usize, usize)>)> {
        let did = self.id(p.id);
        let w = match self.lookup(did) {
            Val::Bits(b) => b.len(),
            _ => return Ok((did, None)),
        };
        let (lo, hi) = match &p.sel {
            Selector::Whole => (0, w as i64),
            Selector::Index(i) => {
                let i = self.int(i)?;
                (i, i + 1)
            }
            Selector::Slice(l, h) => (self.int(l)?, self.int(h)?),
        };
        if lo >= hi {
            return self.err(format!("empty slice [{lo}:{hi}] of `{}`", p.name), p.loc.0);
        }
        if lo < 0 || hi > w as i64 {
            return self.err(
                format!("index [{lo}:{hi}] out of bounds for `{}` of length {w}", p.name),
                p.loc.0,
            );
        }
        Ok((did, Some((lo as usize, hi as usize))))
    }

    fn read(&mut self, did: DeclId, range: Option<(usize, usize)>) -> Val {
        match (&*self.lookup(did), range) {
            (Val::Bits(b), Some((lo, hi))) => Val::Bits(b[lo..hi].to_vec()),
            (v, _) => v.clone(),
        }
    }

    fn store(&mut self, did: DeclId, range: Option<(usize, usize)>, v: Val) {
        let slot = self.lookup(did);
        match (slot, range) {
            (Val::Bits(b), Some((lo, hi))) => {
                let new = fit(v, hi - lo);
                b[lo..hi].copy_from_slice(&new);
            }
            (slot, _) => *slot = v,
        }
    }

    fn int(&mut self, e: &Expr) -> R<i64> {
        match self.eval(e)? {
            Val::Int(v) => Ok(v),
            _ => self.err("bit value used where a service int is required", e.loc.0),
        }
    }

    fn eval(&mut self, e: &Expr) -> R<Val> {
        let pos = e.loc.0;
        match &e.kind {
            ExprKind::Int(v) => Ok(Val::Int(*v)),
            ExprKind::Place(p) => {
                let (did, range) = self.place_range(p)?;
                Ok(self.read(did, range))
            }
            ExprKind::Call(c) => self.call(c),
            ExprKind::Unary(op, inner) => {
                let v = self.eval(inner)?;
                Ok(match (op, v) {
                    (UnOp::Not, Val::Int(x)) => Val::Int((x == 0) as i64),
                    (UnOp::BitNot, Val::Int(x)) => Val::Int(!x),
                    (UnOp::Neg, Val::Int(x)) => Val::Int(x.wrapping_neg()),
                    (UnOp::Not, Val::Bits(b)) => Val::Bits(vec![!b.iter().any(|&x| x)]),
                    (UnOp::BitNot, Val::Bits(b)) => Val::Bits(b.iter().map(|&x| !x).collect()),
                    (UnOp::Neg, Val::Bits(b)) => {
                        let w = b.len();
                        let modulus = BigUint::one() << w;
                        let n = (&modulus - to_big(&b)) % &modulus;
                        Val::Bits(from_big(&n, w))
                    }
                    (_, Val::Void) => return self.err("operand has no value", pos),
                })
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                self.binop(*op, a, b, pos)
            }
        }
    }

    fn binop(&mut self, op: BinOp, a: Val, b: Val, pos: Pos) -> R<Val> {
        use BinOp::*;
        match (&a, &b) {
            (Val::Int(x), Val::Int(y)) => {
                return int_binop(op, *x, *y).map(Val::Int).or_else(|m| self.err(m, pos))
            }
            (Val::Void, _) | (_, Val::Void) => return self.err("operand has no value", pos),
            _ => {}
        }
        if let Or | And = op {
            let r = if op == And {
                truthy(&a) && truthy(&b)
            } else {
                truthy(&a) || truthy(&b)
            };
            return Ok(Val::Bits(vec![r]));
        }
        if let Shl | Shr = op {
            let (Val::Bits(x), Val::Int(k)) = (a, b) else {
                return self.err("shift amount must be a service int", pos);
            };
            if k < 0 {
                return self.err("negative shift amount", pos);
            }
            let w = x.len();
            let n = to_big(&x);
            let shifted = if op == Shl {
                n << (k as usize).min(w)
            } else {
                n >> (k as usize).min(w)
            };
            return Ok(Val::Bits(from_big(&shifted, w)));
        }
        let w = match (&a, &b) {
            (Val::Bits(x), Val::Bits(y)) => x.len().max(y.len()),
            (Val::Bits(x), _) | (_, Val::Bits(x)) => x.len(),
            _ => unreachable!(),
        };
        let (x, y) = (fit(a, w), fit(b, w));
        match op {
            BitXor => return Ok(Val::Bits(x.iter().zip(&y).map(|(p, q)| p ^ q).collect())),
            BitAnd => return Ok(Val::Bits(x.iter().zip(&y).map(|(p, q)| p & q).collect())),
            BitOr => return Ok(Val::Bits(x.iter().zip(&y).map(|(p, q)| p | q).collect())),
            _ => {}
        }
        let (nx, ny) = (to_big(&x), to_big(&y));
        let modulus = BigUint::one() << w;
        Ok(Val::Bits(match op {
            Add => from_big(&((nx + ny) % &modulus), w),
            Sub => from_big(&((nx + &modulus - ny) % &modulus), w),
            Mul => from_big(&((nx * ny) % &modulus), w),
            Eq => vec![nx == ny],
            Ne => vec![nx != ny],
            Lt => vec![nx < ny],
            Le => vec![nx <= ny],
            Gt => vec![nx > ny],
            Ge => vec![nx >= ny],
            Div | Rem => {
                return self.err(format!("operator `{}` is only defined on service ints", op.as_str()), pos)
            }
            Or | And | Shl | Shr | BitXor | BitAnd | BitOr => unreachable!(),
        }))
    }

    fn call(&mut self, c: &Call) -> R<Val> {
        let f = self.r.program.function(&c.name).expect("resolved function");
        let fid = self.id(c.id);
        let mut frame = vec![None; self.r.decls.len()];
        let mut args = Vec::new();
        for a in &c.args {
            args.push(self.eval(a)?);
        }
        for (p, v) in f.params.iter().zip(args) {
            let did = self.id(p.id);
            let v = match p.ty {
                BaseType::Int => v,
                _ => Val::Bits(fit(v, self.r.decl(did).width)),
            };
            frame[did.0 as usize] = Some(v);
        }
        self.vars.push(frame);
        let ret = self.exec_block(&f.body.stmts);
        self.vars.pop();
        let ret = ret?;
        Ok(match (f.ret, ret) {
            (BaseType::Void, _) => Val::Void,
            (BaseType::Int, Some(v)) => v,
            (BaseType::Bit, Some(v)) => Val::Bits(fit(v, self.r.decl(fid).width)),
            _ => return self.err(format!("function `{}` did not return a value", c.name), c.loc.0),
        })
    }
}

fn truthy(v: &Val) -> bool {
    match v {
        Val::Int(x) => *x != 0,
        Val::Bits(b) => b.iter().any(|&x| x),
        Val::Void => false,
    }
}
