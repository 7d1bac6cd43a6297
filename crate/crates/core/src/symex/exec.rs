//! Symbolic execution of a resolved program over the node store.
//!
//! Every bit cell holds a [`BitRef`]. Service ints are concrete, so loops are
//! unrolled and indices resolved during execution. Conditionals on symbolic
//! bits run both branches on copies of memory and merge the results with
//! if-then-else nodes.

use std::collections::{BTreeSet, HashMap};

use crate::frontend::ast::*;
use crate::frontend::lexer::Attribute;
use crate::frontend::resolve::int_binop;
use crate::frontend::{DeclId, Pos, Resolved, RuntimeError};

use super::arith::{self, ArithOp, CmpOp};
use super::store::{BitRef, NodeId, NodeStore};

/// Upper bound on the iterations of a single loop.
pub const MAX_LOOP_ITERATIONS: u64 = 1 << 24;

/// A named group of bits as it appears in the template header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedBits {
    pub name: String,
    pub bits: Vec<BitRef>,
}

/// Result of executing a program: the formula DAG plus its roots.
#[derive(Debug, Clone)]
pub struct Encoding {
    pub store: NodeStore,
    /// Input nodes in declaration order; `inputs[i]` is `Input(i)`.
    pub inputs: Vec<NodeId>,
    pub input_groups: Vec<NamedBits>,
    pub outputs: Vec<BitRef>,
    pub output_groups: Vec<NamedBits>,
    /// Formulas that must be true.
    pub asserts: Vec<BitRef>,
    pub core_vars: Vec<NamedBits>,
    /// Nodes written to `__mem` variables; they keep their own CNF variable.
    pub mem_points: BTreeSet<NodeId>,
}

impl Encoding {
    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Output bits for a concrete input, by evaluating the DAG.
    pub fn eval_outputs(&self, input: &[bool]) -> Vec<bool> {
        let vals = self.store.eval(input);
        self.outputs.iter().map(|&r| NodeStore::value_of(&vals, r)).collect()
    }

    /// Whether every assertion holds for the given input.
    pub fn eval_asserts(&self, input: &[bool]) -> bool {
        let vals = self.store.eval(input);
        self.asserts.iter().all(|&r| NodeStore::value_of(&vals, r))
    }
}

/// Cell-wise merge of two memory states under condition `c`.
pub fn merge_conditional(
    store: &mut NodeStore,
    c: BitRef,
    then_mem: &[BitRef],
    else_mem: &[BitRef],
) -> Vec<BitRef> {
    assert_eq!(then_mem.len(), else_mem.len(), "memory layouts differ");
    then_mem
        .iter()
        .zip(else_mem)
        .map(|(&t, &e)| if t == e { t } else { store.ite(c, t, e) })
        .collect()
}

pub fn execute(resolved: &Resolved) -> Result<Encoding, RuntimeError> {
    let ex = Executor {
        r: resolved,
        store: NodeStore::new(),
        cells: Vec::new(),
        ints: Vec::new(),
        bit_slot: HashMap::new(),
        int_slot: HashMap::new(),
        path: BitRef::ONE,
        frames: Vec::new(),
        asserts: Vec::new(),
        core_vars: Vec::new(),
        mem_points: BTreeSet::new(),
    };
    ex.run()
}

#[derive(Debug, Clone)]
enum Value {
    Int(i64),
    Bits(Vec<BitRef>),
    Void,
}

enum Frame {
    Loop { pos: Pos, iteration: u64 },
    Call { name: String, pos: Pos },
}

struct Executor<'a> {
    r: &'a Resolved,
    store: NodeStore,
    cells: Vec<BitRef>,
    ints: Vec<i64>,
    bit_slot: HashMap<DeclId, (usize, usize)>,
    int_slot: HashMap<DeclId, usize>,
    /// Conjunction of the symbolic branch conditions currently in force.
    path: BitRef,
    frames: Vec<Frame>,
    asserts: Vec<BitRef>,
    core_vars: Vec<NamedBits>,
    mem_points: BTreeSet<NodeId>,
}

type Res<T> = Result<T, RuntimeError>;

fn int_to_bits(v: i64, w: usize) -> Vec<BitRef> {
    (0..w).map(|i| BitRef::Const((v >> i.min(63)) & 1 == 1)).collect()
}

fn cmp_op(op: BinOp) -> Option<CmpOp> {
    Some(match op {
        BinOp::Eq => CmpOp::Eq,
        BinOp::Ne => CmpOp::Ne,
        BinOp::Lt => CmpOp::Lt,
        BinOp::Le => CmpOp::Le,
        BinOp::Gt => CmpOp::Gt,
        BinOp::Ge => CmpOp::Ge,
        _ => return None,
    })
}

impl<'a> Executor<'a> {
    fn error(&self, msg: impl Into<String>, pos: Pos) -> RuntimeError {
        let mut e = RuntimeError::new(msg, pos);
        e.trace = self
            .frames
            .iter()
            .map(|f| match f {
                Frame::Loop { pos, iteration } => format!("in iteration {iteration} of the loop at {pos}"),
                Frame::Call { name, pos } => format!("in the call to `{name}` at {pos}"),
            })
            .collect();
        e
    }

    fn run(mut self) -> Res<Encoding> {
        let r = self.r;
        let mut inputs = Vec::new();
        let mut input_groups = Vec::new();
        let mut out_decls = Vec::new();
        for (did, d) in r.globals() {
            let info = r.decl(did);
            match d.ty {
                BaseType::Int => {
                    self.int_slot.insert(did, self.ints.len());
                    self.ints.push(r.global_ints.get(&did).copied().unwrap_or(0));
                }
                BaseType::Bit => {
                    let w = info.width;
                    let bits: Vec<BitRef> = if d.attr == Some(Attribute::In) {
                        (0..w)
                            .map(|_| {
                                let b = self.store.input(inputs.len() as u32);
                                inputs.push(b.node().unwrap());
                                b
                            })
                            .collect()
                    } else if let Some(&v) = r.global_ints.get(&did) {
                        int_to_bits(v, w)
                    } else {
                        vec![BitRef::ZERO; w]
                    };
                    if d.attr == Some(Attribute::In) {
                        input_groups.push(NamedBits {
                            name: d.name.clone(),
                            bits: bits.clone(),
                        });
                    }
                    if d.attr == Some(Attribute::Out) {
                        out_decls.push(did);
                    }
                    self.bit_slot.insert(did, (self.cells.len(), w));
                    self.mark_mem(did, &bits);
                    self.cells.extend(bits);
                }
                BaseType::Void => {}
            }
        }
        let main = r.main();
        self.stmts(&main.body.stmts)?;

        let mut outputs = Vec::new();
        let mut output_groups = Vec::new();
        for did in out_decls {
            let (off, w) = self.bit_slot[&did];
            let bits = self.cells[off..off + w].to_vec();
            outputs.extend_from_slice(&bits);
            output_groups.push(NamedBits {
                name: r.decl(did).name.clone(),
                bits,
            });
        }
        Ok(Encoding {
            store: self.store,
            inputs,
            input_groups,
            outputs,
            output_groups,
            asserts: self.asserts,
            core_vars: self.core_vars,
            mem_points: self.mem_points,
        })
    }

    fn mark_mem(&mut self, did: DeclId, bits: &[BitRef]) {
        if self.r.decl(did).attr != Some(Attribute::Mem) {
            return;
        }
        for &b in bits {
            if let BitRef::Node(n) = b {
                let node = self.store.node(n);
                let id = if node.kind == super::NodeKind::Not {
                    node.children[0]
                } else {
                    n
                };
                self.mem_points.insert(id);
            }
        }
    }

    // -- statements -------------------------------------------------------

    fn stmts(&mut self, stmts: &[Stmt]) -> Res<Option<Value>> {
        let mut ret = None;
        for s in stmts {
            if let Some(v) = self.stmt(s)? {
                ret = Some(v);
            }
        }
        Ok(ret)
    }

    fn scoped<T>(&mut self, f: impl FnOnce(&mut Self) -> Res<T>) -> Res<T> {
        let (c, i) = (self.cells.len(), self.ints.len());
        let out = f(self)?;
        self.cells.truncate(c);
        self.ints.truncate(i);
        Ok(out)
    }

    fn block(&mut self, b: &Block) -> Res<()> {
        self.scoped(|ex| ex.stmts(&b.stmts).map(|_| ()))
    }

    /// Returns the value of a `return` statement.
    fn stmt(&mut self, s: &Stmt) -> Res<Option<Value>> {
        let pos = s.loc.0;
        self.store.set_origin(Some(pos));
        match &s.kind {
            StmtKind::Decl(d) => self.decl(d)?,
            StmtKind::Assign { place, op, value } => {
                let target = self.locate(place)?;
                let v = self.expr(value)?;
                let v = match op.binop() {
                    None => v,
                    Some(bop) => {
                        let cur = self.read_target(&target);
                        self.binary(bop, cur, v, pos)?
                    }
                };
                self.write(&target, v, pos)?;
            }
            StmtKind::Step { place, increment } => {
                let target = self.locate(place)?;
                let Target::Int(slot) = target else {
                    return Err(self.error("`++`/`--` require an `int` variable", pos));
                };
                let d = if *increment { 1 } else { -1 };
                self.ints[slot] = self.ints[slot].wrapping_add(d);
            }
            StmtKind::If {
                cond,
                then_block,
                else_branch,
            } => self.if_stmt(cond, then_block, else_branch.as_ref(), pos)?,
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => self.scoped(|ex| ex.for_loop(init, cond, step, body, pos))?,
            StmtKind::Call(c) => {
                self.call(c)?;
            }
            StmtKind::Return(e) => {
                return Ok(Some(match e {
                    Some(e) => self.expr(e)?,
                    None => Value::Void,
                }))
            }
            StmtKind::Assert(e) => {
                let v = self.expr(e)?;
                let b = self.truth(v);
                let not_path = self.store.not(self.path);
                let guarded = self.store.or2(not_path, b);
                self.asserts.push(guarded);
            }
            StmtKind::CoreVars(p) => {
                let target = self.locate(p)?;
                let Value::Bits(bits) = self.read_target(&target) else {
                    return Err(self.error("core_vars requires a `bit` variable", pos));
                };
                let mut label = String::new();
                let mut pretty = Expr {
                    kind: ExprKind::Place(p.clone()),
                    loc: p.loc,
                }
                .to_string();
                pretty.retain(|c| !c.is_whitespace());
                label.push_str(&pretty);
                self.core_vars.push(NamedBits { name: label, bits });
            }
            StmtKind::Block(b) => self.block(b)?,
        }
        Ok(None)
    }

    fn decl(&mut self, d: &VarDecl) -> Res<()> {
        let did = self.r.decl_id(d.id);
        let init = match &d.init {
            Some(e) => Some((self.expr(e)?, e.loc.0)),
            None => None,
        };
        match d.ty {
            BaseType::Int => {
                let v = match init {
                    Some((Value::Int(v), _)) => v,
                    Some((_, p)) => return Err(self.error("bit value used where a service int is required", p)),
                    None => 0,
                };
                self.int_slot.insert(did, self.ints.len());
                self.ints.push(v);
            }
            BaseType::Bit => {
                let w = self.r.decl(did).width;
                let bits = match init {
                    Some((v, p)) => self.to_bits(v, w, p)?,
                    None => vec![BitRef::ZERO; w],
                };
                self.bit_slot.insert(did, (self.cells.len(), w));
                self.mark_mem(did, &bits);
                self.cells.extend(bits);
            }
            BaseType::Void => {}
        }
        Ok(())
    }

    fn if_stmt(&mut self, cond: &Expr, then_block: &Block, else_branch: Option<&ElseBranch>, pos: Pos) -> Res<()> {
        let v = self.expr(cond)?;
        let c = self.truth(v);
        let run_else = |ex: &mut Self| -> Res<()> {
            match else_branch {
                None => Ok(()),
                Some(ElseBranch::Block(b)) => ex.block(b),
                Some(ElseBranch::If(s)) => ex.stmt(s).map(|_| ()),
            }
        };
        match c {
            BitRef::Const(true) => self.block(then_block),
            BitRef::Const(false) => run_else(self),
            BitRef::Node(_) => {
                let saved_cells = self.cells.clone();
                let saved_ints = self.ints.clone();
                let saved_path = self.path;
                self.path = self.store.and2(saved_path, c);
                self.block(then_block)?;
                let then_cells = std::mem::replace(&mut self.cells, saved_cells);
                let then_ints = std::mem::replace(&mut self.ints, saved_ints);
                let nc = self.store.not(c);
                self.path = self.store.and2(saved_path, nc);
                run_else(self)?;
                self.path = saved_path;
                if then_ints != self.ints {
                    return Err(self.error(
                        "service int assigned differently in the branches of a symbolic condition",
                        pos,
                    ));
                }
                let else_cells = std::mem::take(&mut self.cells);
                self.cells = merge_conditional(&mut self.store, c, &then_cells, &else_cells);
                Ok(())
            }
        }
    }

    fn for_loop(&mut self, init: &Stmt, cond: &Expr, step: &Stmt, body: &Block, pos: Pos) -> Res<()> {
        self.stmt(init)?;
        self.frames.push(Frame::Loop { pos, iteration: 0 });
        let mut n: u64 = 0;
        loop {
            let Value::Int(c) = self.expr(cond)? else {
                return Err(self.error("non-constant loop bound", cond.loc.0));
            };
            if c == 0 {
                break;
            }
            if n >= MAX_LOOP_ITERATIONS {
                return Err(self.error(
                    format!("loop exceeds the iteration limit of {MAX_LOOP_ITERATIONS}"),
                    pos,
                ));
            }
            if let Some(Frame::Loop { iteration, .. }) = self.frames.last_mut() {
                *iteration = n;
            }
            self.block(body)?;
            self.stmt(step)?;
            n += 1;
        }
        self.frames.pop();
        Ok(())
    }

    // -- places -----------------------------------------------------------

    fn locate(&mut self, p: &Place) -> Res<Target> {
        let did = self.r.binding(p.id);
        if let Some(&slot) = self.int_slot.get(&did).filter(|_| self.r.decl(did).base == BaseType::Int) {
            return Ok(Target::Int(slot));
        }
        let (off, w) = self.bit_slot[&did];
        let (lo, hi) = match &p.sel {
            Selector::Whole => (0, w),
            Selector::Index(i) => {
                let i = self.int_expr(i)?;
                if i < 0 || i as usize >= w {
                    return Err(self.error(
                        format!("index {i} out of bounds for `{}` of length {w}", p.name),
                        p.loc.0,
                    ));
                }
                (i as usize, i as usize + 1)
            }
            Selector::Slice(lo, hi) => {
                let l = self.int_expr(lo)?;
                let h = self.int_expr(hi)?;
                if l >= h {
                    return Err(self.error(format!("empty slice [{l}:{h}] of `{}`", p.name), p.loc.0));
                }
                if l < 0 || h as usize > w {
                    return Err(self.error(
                        format!("slice [{l}:{h}] out of bounds for `{}` of length {w}", p.name),
                        p.loc.0,
                    ));
                }
                (l as usize, h as usize)
            }
        };
        Ok(Target::Bits {
            decl: did,
            start: off + lo,
            len: hi - lo,
        })
    }

    fn read_target(&self, t: &Target) -> Value {
        match *t {
            Target::Int(slot) => Value::Int(self.ints[slot]),
            Target::Bits { start, len, .. } => Value::Bits(self.cells[start..start + len].to_vec()),
        }
    }

    fn write(&mut self, t: &Target, v: Value, pos: Pos) -> Res<()> {
        match *t {
            Target::Int(slot) => match v {
                Value::Int(x) => self.ints[slot] = x,
                _ => return Err(self.error("bit value used where a service int is required", pos)),
            },
            Target::Bits { decl, start, len } => {
                let bits = self.to_bits(v, len, pos)?;
                self.mark_mem(decl, &bits);
                self.cells[start..start + len].copy_from_slice(&bits);
            }
        }
        Ok(())
    }

    // -- expressions ------------------------------------------------------

    fn to_bits(&self, v: Value, w: usize, pos: Pos) -> Res<Vec<BitRef>> {
        match v {
            Value::Int(x) => Ok(int_to_bits(x, w)),
            Value::Bits(b) => Ok(arith::zero_extend(&b, w)),
            Value::Void => Err(self.error("expression has no value", pos)),
        }
    }

    fn truth(&mut self, v: Value) -> BitRef {
        match v {
            Value::Int(x) => BitRef::Const(x != 0),
            Value::Bits(b) => self.store.or(&b),
            Value::Void => BitRef::ZERO,
        }
    }

    fn int_expr(&mut self, e: &Expr) -> Res<i64> {
        match self.expr(e)? {
            Value::Int(v) => Ok(v),
            _ => Err(self.error("bit value used where a service int is required", e.loc.0)),
        }
    }

    fn expr(&mut self, e: &Expr) -> Res<Value> {
        let pos = e.loc.0;
        match &e.kind {
            ExprKind::Int(v) => Ok(Value::Int(*v)),
            ExprKind::Place(p) => {
                let t = self.locate(p)?;
                Ok(self.read_target(&t))
            }
            ExprKind::Call(c) => self.call(c),
            ExprKind::Unary(op, inner) => {
                let v = self.expr(inner)?;
                Ok(match (op, v) {
                    (_, Value::Void) => return Err(self.error("operand has no value", pos)),
                    (UnOp::Not, Value::Int(x)) => Value::Int((x == 0) as i64),
                    (UnOp::BitNot, Value::Int(x)) => Value::Int(!x),
                    (UnOp::Neg, Value::Int(x)) => Value::Int(x.wrapping_neg()),
                    (UnOp::Not, Value::Bits(b)) => {
                        let any = self.store.or(&b);
                        Value::Bits(vec![self.store.not(any)])
                    }
                    (UnOp::BitNot, Value::Bits(b)) => Value::Bits(b.iter().map(|&x| self.store.not(x)).collect()),
                    (UnOp::Neg, Value::Bits(b)) => Value::Bits(arith::negate(&mut self.store, &b)),
                })
            }
            ExprKind::Binary(op @ (BinOp::BitXor | BinOp::BitAnd | BinOp::BitOr), _, _) => {
                let mut leaves = Vec::new();
                collect_chain(*op, e, &mut leaves);
                let mut vals = Vec::with_capacity(leaves.len());
                for l in &leaves {
                    vals.push(self.expr(l)?);
                }
                if vals.iter().all(|v| matches!(v, Value::Bits(_))) {
                    let w = vals
                        .iter()
                        .map(|v| match v {
                            Value::Bits(b) => b.len(),
                            _ => 0,
                        })
                        .max()
                        .unwrap_or(0);
                    let cols: Vec<Vec<BitRef>> = vals
                        .into_iter()
                        .map(|v| match v {
                            Value::Bits(b) => arith::zero_extend(&b, w),
                            _ => unreachable!(),
                        })
                        .collect();
                    let out = (0..w)
                        .map(|i| {
                            let col: Vec<BitRef> = cols.iter().map(|c| c[i]).collect();
                            match op {
                                BinOp::BitXor => self.store.xor(&col),
                                BinOp::BitAnd => self.store.and(&col),
                                _ => self.store.or(&col),
                            }
                        })
                        .collect();
                    Ok(Value::Bits(out))
                } else {
                    let mut it = vals.into_iter();
                    self.fold_chain(*op, e, &mut it)
                }
            }
            ExprKind::Binary(op, l, r) => {
                let lv = self.expr(l)?;
                let rv = self.expr(r)?;
                self.binary(*op, lv, rv, pos)
            }
        }
    }

    /// Pairwise evaluation of an associative chain whose leaves were already
    /// evaluated, following the original tree shape.
    fn fold_chain(&mut self, op: BinOp, e: &Expr, leaves: &mut impl Iterator<Item = Value>) -> Res<Value> {
        match &e.kind {
            ExprKind::Binary(o, l, r) if *o == op => {
                let lv = self.fold_chain(op, l, leaves)?;
                let rv = self.fold_chain(op, r, leaves)?;
                self.binary(op, lv, rv, e.loc.0)
            }
            _ => Ok(leaves.next().expect("chain leaf")),
        }
    }

    fn binary(&mut self, op: BinOp, lv: Value, rv: Value, pos: Pos) -> Res<Value> {
        use BinOp::*;
        if matches!(lv, Value::Void) || matches!(rv, Value::Void) {
            return Err(self.error("operand has no value", pos));
        }
        if let (Value::Int(a), Value::Int(b)) = (&lv, &rv) {
            return int_binop(op, *a, *b).map(Value::Int).map_err(|m| self.error(m, pos));
        }
        match op {
            Or | And => {
                let a = self.truth(lv);
                let b = self.truth(rv);
                Ok(Value::Bits(vec![if op == And {
                    self.store.and2(a, b)
                } else {
                    self.store.or2(a, b)
                }]))
            }
            Shl | Shr => {
                let Value::Int(k) = rv else {
                    return Err(self.error("shift amount must be a service int", pos));
                };
                if k < 0 {
                    return Err(self.error("negative shift amount", pos));
                }
                let Value::Bits(a) = lv else { unreachable!() };
                Ok(Value::Bits(arith::shift(&a, k as usize, op == Shl)))
            }
            Div | Rem => Err(self.error(format!("operator `{}` is only defined on service ints", op.as_str()), pos)),
            _ => {
                let (a, b) = self.operands(lv, rv);
                Ok(Value::Bits(match op {
                    BitXor | BitAnd | BitOr => a
                        .iter()
                        .zip(&b)
                        .map(|(&x, &y)| match op {
                            BitXor => self.store.xor2(x, y),
                            BitAnd => self.store.and2(x, y),
                            _ => self.store.or2(x, y),
                        })
                        .collect(),
                    Add => arith::bitvec_arith(&mut self.store, ArithOp::Add, &a, &b),
                    Sub => arith::bitvec_arith(&mut self.store, ArithOp::Sub, &a, &b),
                    Mul => arith::bitvec_arith(&mut self.store, ArithOp::Mul, &a, &b),
                    _ => vec![arith::compare(&mut self.store, cmp_op(op).unwrap(), &a, &b)],
                }))
            }
        }
    }

    /// Brings two operands to a common width. An int takes the width of the
    /// bit operand; two bit vectors are zero-extended to the wider one.
    fn operands(&self, lv: Value, rv: Value) -> (Vec<BitRef>, Vec<BitRef>) {
        match (lv, rv) {
            (Value::Bits(a), Value::Int(x)) => {
                let b = int_to_bits(x, a.len());
                (a, b)
            }
            (Value::Int(x), Value::Bits(b)) => (int_to_bits(x, b.len()), b),
            (Value::Bits(a), Value::Bits(b)) => {
                let w = a.len().max(b.len());
                (arith::zero_extend(&a, w), arith::zero_extend(&b, w))
            }
            _ => unreachable!("int/int and void handled by caller"),
        }
    }

    fn call(&mut self, c: &Call) -> Res<Value> {
        let fid = self.r.binding(c.id);
        let f = self
            .r
            .program
            .function(&c.name)
            .expect("resolved call target exists");
        let mut args = Vec::with_capacity(c.args.len());
        for a in &c.args {
            args.push((self.expr(a)?, a.loc.0));
        }
        self.frames.push(Frame::Call {
            name: c.name.clone(),
            pos: c.loc.0,
        });
        let ret = self.scoped(|ex| {
            for (p, (v, apos)) in f.params.iter().zip(args) {
                let did = ex.r.decl_id(p.id);
                match p.ty {
                    BaseType::Int => {
                        let Value::Int(x) = v else {
                            return Err(ex.error("bit value used where a service int is required", apos));
                        };
                        ex.int_slot.insert(did, ex.ints.len());
                        ex.ints.push(x);
                    }
                    _ => {
                        let w = ex.r.decl(did).width;
                        let bits = ex.to_bits(v, w, apos)?;
                        ex.bit_slot.insert(did, (ex.cells.len(), w));
                        ex.cells.extend(bits);
                    }
                }
            }
            ex.stmts(&f.body.stmts)
        })?;
        self.frames.pop();
        let info = self.r.decl(fid);
        Ok(match (f.ret, ret) {
            (BaseType::Void, _) => Value::Void,
            (BaseType::Int, Some(v @ Value::Int(_))) => v,
            (BaseType::Bit, Some(v)) => Value::Bits(self.to_bits(v, info.width, c.loc.0)?),
            _ => return Err(self.error(format!("function `{}` did not return a value", c.name), c.loc.0)),
        })
    }
}

enum Target {
    Int(usize),
    Bits { decl: DeclId, start: usize, len: usize },
}

fn collect_chain<'e>(op: BinOp, e: &'e Expr, out: &mut Vec<&'e Expr>) {
    match &e.kind {
        ExprKind::Binary(o, l, r) if *o == op => {
            collect_chain(op, l, out);
            collect_chain(op, r, out);
        }
        _ => out.push(e),
    }
}
