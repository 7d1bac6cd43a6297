//! Hash-consed Boolean formula DAG.

use std::collections::HashMap;
use std::fmt;

use crate::frontend::Pos;

/// Index of a node in a [`NodeStore`]. Children always have smaller ids than
/// their parents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Value of one memory cell: a constant or a formula node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BitRef {
    Const(bool),
    Node(NodeId),
}

impl BitRef {
    pub const ZERO: BitRef = BitRef::Const(false);
    pub const ONE: BitRef = BitRef::Const(true);

    pub fn node(self) -> Option<NodeId> {
        match self {
            BitRef::Node(n) => Some(n),
            BitRef::Const(_) => None,
        }
    }
}

impl From<bool> for BitRef {
    fn from(b: bool) -> Self {
        BitRef::Const(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Input(u32),
    And,
    Or,
    Not,
    Xor,
    Ite,
    Table,
}

/// Truth table of a k-ary function; row `r` holds the value for the
/// assignment where child `i` takes bit `i` of `r`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    arity: u8,
    words: Vec<u64>,
}

impl TruthTable {
    pub const MAX_ARITY: usize = 16;

    pub fn new(arity: usize) -> Self {
        assert!(arity <= Self::MAX_ARITY, "truth table arity {arity} exceeds 16");
        let rows = 1usize << arity;
        TruthTable {
            arity: arity as u8,
            words: vec![0; rows.div_ceil(64)],
        }
    }

    pub fn from_fn(arity: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut t = Self::new(arity);
        for r in 0..t.rows() {
            t.set(r, f(r));
        }
        t
    }

    pub fn from_bits(bits: &[bool]) -> Option<Self> {
        let arity = bits.len().trailing_zeros() as usize;
        if !bits.len().is_power_of_two() || arity > Self::MAX_ARITY {
            return None;
        }
        Some(Self::from_fn(arity, |r| bits[r]))
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    pub fn rows(&self) -> usize {
        1 << self.arity
    }

    pub fn get(&self, row: usize) -> bool {
        (self.words[row / 64] >> (row % 64)) & 1 == 1
    }

    pub fn set(&mut self, row: usize, value: bool) {
        let w = &mut self.words[row / 64];
        if value {
            *w |= 1 << (row % 64);
        } else {
            *w &= !(1 << (row % 64));
        }
    }

    pub fn count_ones(&self) -> usize {
        (0..self.rows()).filter(|&r| self.get(r)).count()
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable({}, ", self.arity)?;
        for r in 0..self.rows().min(64) {
            f.write_str(if self.get(r) { "1" } else { "0" })?;
        }
        if self.rows() > 64 {
            f.write_str("...")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaNode {
    pub kind: NodeKind,
    pub children: Vec<NodeId>,
    pub table: Option<TruthTable>,
    pub origin: Option<Pos>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct NodeKey {
    kind: NodeKind,
    children: Vec<NodeId>,
    table: Option<TruthTable>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum NodeError {
    #[error("{kind:?} node requires {expected} children, got {got}")]
    Arity {
        kind: NodeKind,
        expected: &'static str,
        got: usize,
    },
    #[error("table node requires a truth table with {0} inputs")]
    MissingTable(usize),
}

/// Append-only node arena with a structural cons table.
#[derive(Debug, Clone, Default)]
pub struct NodeStore {
    nodes: Vec<FormulaNode>,
    cons: HashMap<NodeKey, NodeId>,
    origin: Option<Pos>,
}

impl NodeStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &FormulaNode {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &FormulaNode)> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (NodeId(i as u32), n))
    }

    /// Source position attached to nodes created from now on.
    pub fn set_origin(&mut self, pos: Option<Pos>) {
        self.origin = pos;
    }

    fn cons(&mut self, kind: NodeKind, children: Vec<NodeId>, table: Option<TruthTable>) -> NodeId {
        let key = NodeKey {
            kind,
            children,
            table,
        };
        if let Some(&id) = self.cons.get(&key) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(FormulaNode {
            kind: key.kind,
            children: key.children.clone(),
            table: key.table.clone(),
            origin: self.origin,
        });
        self.cons.insert(key, id);
        id
    }

    /// Looks up a node by structure without allocating.
    pub fn find(&self, kind: NodeKind, children: &[NodeId], table: Option<&TruthTable>) -> Option<NodeId> {
        self.cons
            .get(&NodeKey {
                kind,
                children: children.to_vec(),
                table: table.cloned(),
            })
            .copied()
    }

    pub fn input(&mut self, index: u32) -> BitRef {
        BitRef::Node(self.cons(NodeKind::Input(index), Vec::new(), None))
    }

    /// Generic constructor. Children are simplified and normalized before the
    /// cons-table lookup; only a structurally new node is allocated.
    pub fn mk_node(
        &mut self,
        kind: NodeKind,
        children: &[BitRef],
        table: Option<&TruthTable>,
    ) -> Result<BitRef, NodeError> {
        let arity = |expected: &'static str| NodeError::Arity {
            kind,
            expected,
            got: children.len(),
        };
        match kind {
            NodeKind::Input(i) => {
                if !children.is_empty() {
                    return Err(arity("0"));
                }
                Ok(self.input(i))
            }
            NodeKind::Not => match children {
                [a] => Ok(self.not(*a)),
                _ => Err(arity("1")),
            },
            NodeKind::And | NodeKind::Or | NodeKind::Xor if children.len() < 2 => Err(arity("2 or more")),
            NodeKind::And => Ok(self.and(children)),
            NodeKind::Or => Ok(self.or(children)),
            NodeKind::Xor => Ok(self.xor(children)),
            NodeKind::Ite => match children {
                [c, a, b] => Ok(self.ite(*c, *a, *b)),
                _ => Err(arity("3")),
            },
            NodeKind::Table => {
                let t = table.ok_or(NodeError::MissingTable(children.len()))?;
                if t.arity() != children.len() {
                    return Err(NodeError::MissingTable(children.len()));
                }
                Ok(self.table(children, t))
            }
        }
    }

    fn negated(&self, r: BitRef) -> Option<NodeId> {
        match r {
            BitRef::Node(n) if self.node(n).kind == NodeKind::Not => Some(self.node(n).children[0]),
            _ => None,
        }
    }

    pub fn not(&mut self, a: BitRef) -> BitRef {
        match a {
            BitRef::Const(b) => BitRef::Const(!b),
            BitRef::Node(n) => match self.negated(a) {
                Some(inner) => BitRef::Node(inner),
                None => BitRef::Node(self.cons(NodeKind::Not, vec![n], None)),
            },
        }
    }

    /// Shared path of And/Or: `absorbing` is the constant that decides the
    /// result, the other constant is the identity.
    fn junction(&mut self, kind: NodeKind, children: &[BitRef], absorbing: bool) -> BitRef {
        let mut ids = Vec::with_capacity(children.len());
        for c in children {
            match c {
                BitRef::Const(b) if *b == absorbing => return BitRef::Const(absorbing),
                BitRef::Const(_) => {}
                BitRef::Node(n) => ids.push(*n),
            }
        }
        ids.sort_unstable();
        ids.dedup();
        for &id in &ids {
            if let Some(inner) = self.negated(BitRef::Node(id)) {
                if ids.binary_search(&inner).is_ok() {
                    return BitRef::Const(absorbing);
                }
            }
        }
        match ids.len() {
            0 => BitRef::Const(!absorbing),
            1 => BitRef::Node(ids[0]),
            _ => BitRef::Node(self.cons(kind, ids, None)),
        }
    }

    pub fn and(&mut self, children: &[BitRef]) -> BitRef {
        self.junction(NodeKind::And, children, false)
    }

    pub fn or(&mut self, children: &[BitRef]) -> BitRef {
        self.junction(NodeKind::Or, children, true)
    }

    pub fn and2(&mut self, a: BitRef, b: BitRef) -> BitRef {
        self.and(&[a, b])
    }

    pub fn or2(&mut self, a: BitRef, b: BitRef) -> BitRef {
        self.or(&[a, b])
    }

    pub fn xor2(&mut self, a: BitRef, b: BitRef) -> BitRef {
        self.xor(&[a, b])
    }

    /// Xor with constants folded into a parity bit, negations pulled out of
    /// the children and equal children cancelled pairwise.
    pub fn xor(&mut self, children: &[BitRef]) -> BitRef {
        let mut parity = false;
        let mut ids = Vec::with_capacity(children.len());
        for &c in children {
            match c {
                BitRef::Const(b) => parity ^= b,
                BitRef::Node(n) => match self.negated(c) {
                    Some(inner) => {
                        parity = !parity;
                        ids.push(inner);
                    }
                    None => ids.push(n),
                },
            }
        }
        ids.sort_unstable();
        let mut kept: Vec<NodeId> = Vec::with_capacity(ids.len());
        for id in ids {
            if kept.last() == Some(&id) {
                kept.pop();
            } else {
                kept.push(id);
            }
        }
        let base = match kept.len() {
            0 => return BitRef::Const(parity),
            1 => BitRef::Node(kept[0]),
            _ => BitRef::Node(self.cons(NodeKind::Xor, kept, None)),
        };
        if parity {
            self.not(base)
        } else {
            base
        }
    }

    pub fn ite(&mut self, c: BitRef, a: BitRef, b: BitRef) -> BitRef {
        if let BitRef::Const(cv) = c {
            return if cv { a } else { b };
        }
        if a == b {
            return a;
        }
        if let Some(inner) = self.negated(c) {
            return self.ite(BitRef::Node(inner), b, a);
        }
        let not_c = self.not(c);
        match (a, b) {
            (BitRef::Const(true), BitRef::Const(false)) => return c,
            (BitRef::Const(false), BitRef::Const(true)) => return not_c,
            (BitRef::Const(true), _) => return self.or2(c, b),
            (BitRef::Const(false), _) => return self.and2(not_c, b),
            (_, BitRef::Const(true)) => return self.or2(not_c, a),
            (_, BitRef::Const(false)) => return self.and2(c, a),
            _ => {}
        }
        if a == c {
            return self.or2(c, b);
        }
        if b == c {
            return self.and2(c, a);
        }
        if a == not_c {
            return self.and2(not_c, b);
        }
        if b == not_c {
            return self.or2(not_c, a);
        }
        let not_a = self.not(a);
        if b == not_a {
            // c ? a : !a  ==  !(c ^ a)
            let x = self.xor2(c, a);
            return self.not(x);
        }
        let (c, a, b) = (c.node().unwrap(), a.node().unwrap(), b.node().unwrap());
        BitRef::Node(self.cons(NodeKind::Ite, vec![c, a, b], None))
    }

    /// Table node over `children`. Constant children are cofactored away,
    /// negated children absorbed into the table, duplicates merged, unused
    /// children dropped and the rest sorted by id.
    pub fn table(&mut self, children: &[BitRef], tt: &TruthTable) -> BitRef {
        assert_eq!(children.len(), tt.arity());
        // Each original child becomes (position in the reduced list, flip) or a constant.
        enum Src {
            Const(bool),
            Var(usize, bool),
        }
        let mut distinct: Vec<NodeId> = Vec::new();
        let mut srcs = Vec::with_capacity(children.len());
        for &c in children {
            match c {
                BitRef::Const(b) => srcs.push(Src::Const(b)),
                BitRef::Node(n) => {
                    let (id, flip) = match self.negated(c) {
                        Some(inner) => (inner, true),
                        None => (n, false),
                    };
                    let pos = match distinct.iter().position(|&d| d == id) {
                        Some(p) => p,
                        None => {
                            distinct.push(id);
                            distinct.len() - 1
                        }
                    };
                    srcs.push(Src::Var(pos, flip));
                }
            }
        }
        let mut order: Vec<usize> = (0..distinct.len()).collect();
        order.sort_by_key(|&i| distinct[i]);
        // rank[i] = position of distinct[i] in the sorted list
        let mut rank = vec![0; distinct.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let sorted: Vec<NodeId> = order.iter().map(|&i| distinct[i]).collect();
        let eval_row = |row: usize| -> bool {
            let mut orig = 0usize;
            for (i, s) in srcs.iter().enumerate() {
                let v = match *s {
                    Src::Const(b) => b,
                    Src::Var(p, flip) => ((row >> rank[p]) & 1 == 1) ^ flip,
                };
                if v {
                    orig |= 1 << i;
                }
            }
            tt.get(orig)
        };
        let mut reduced = TruthTable::from_fn(sorted.len(), eval_row);
        let mut kids = sorted;
        // Drop children the function does not depend on.
        let mut i = 0;
        while i < kids.len() {
            let depends = (0..reduced.rows()).any(|r| reduced.get(r) != reduced.get(r ^ (1 << i)));
            if depends {
                i += 1;
                continue;
            }
            let low = (1usize << i) - 1;
            reduced = TruthTable::from_fn(kids.len() - 1, |r| {
                let full = (r & low) | ((r & !low) << 1);
                reduced.get(full)
            });
            kids.remove(i);
        }
        match kids.len() {
            0 => BitRef::Const(reduced.get(0)),
            1 => {
                let x = BitRef::Node(kids[0]);
                if reduced.get(1) {
                    x
                } else {
                    self.not(x)
                }
            }
            _ => BitRef::Node(self.cons(NodeKind::Table, kids, Some(reduced))),
        }
    }

    /// Concrete value of every node for the given input assignment.
    pub fn eval(&self, inputs: &[bool]) -> Vec<bool> {
        let mut vals = vec![false; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            let c = |k: usize| vals[n.children[k].index()];
            vals[i] = match n.kind {
                NodeKind::Input(ix) => inputs[ix as usize],
                NodeKind::Not => !c(0),
                NodeKind::And => n.children.iter().all(|ch| vals[ch.index()]),
                NodeKind::Or => n.children.iter().any(|ch| vals[ch.index()]),
                NodeKind::Xor => n.children.iter().fold(false, |acc, ch| acc ^ vals[ch.index()]),
                NodeKind::Ite => {
                    if c(0) {
                        c(1)
                    } else {
                        c(2)
                    }
                }
                NodeKind::Table => {
                    let row = n
                        .children
                        .iter()
                        .enumerate()
                        .fold(0usize, |acc, (k, ch)| acc | ((vals[ch.index()] as usize) << k));
                    n.table.as_ref().expect("table node").get(row)
                }
            };
        }
        vals
    }

    pub fn value_of(vals: &[bool], r: BitRef) -> bool {
        match r {
            BitRef::Const(b) => b,
            BitRef::Node(n) => vals[n.index()],
        }
    }
}
