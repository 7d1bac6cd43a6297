//! Collapsing single-fan-out cones into truth-table nodes.
//!
//! Cut points (nodes that keep a CNF variable) are inputs, outputs,
//! assertion roots, `core_vars` bits, `__mem` points and every node whose
//! fan-out is not exactly one. Each remaining cut point absorbs fan-out-one
//! children greedily, highest id first, while the support of its cone stays
//! within the arity limit; a rejected child becomes a cut point itself.
//!
//! Parity does not compress well into two-level form, so cones containing an
//! xor are limited to [`XOR_TABLE_MAX`] inputs. A wide and/or/xor root keeps
//! its operator: same-operator children are flattened into it, plain leaves
//! stay direct operands and the remaining child cones are packed into shared
//! tables of at most `max_arity` inputs.

use std::collections::{BTreeSet, BinaryHeap, HashMap};

use crate::symex::{BitRef, Encoding, NamedBits, NodeId, NodeKind, NodeStore, TruthTable};

pub const DEFAULT_MAX_ARITY: usize = 8;

/// Support limit for cones that contain an xor node.
pub const XOR_TABLE_MAX: usize = 4;

#[derive(Debug, Clone)]
struct Cone {
    leaves: Vec<NodeId>,
    /// Absorbed nodes in ascending id order; the cone root is last.
    internal: Vec<NodeId>,
}

#[derive(Debug, Clone)]
struct Bin {
    /// Child references (possibly negated) combined by the root operator.
    items: Vec<NodeId>,
    leaves: BTreeSet<NodeId>,
    internal: Vec<NodeId>,
}

#[derive(Debug, Clone)]
enum Plan {
    /// The node keeps its kind; its children are all cut points.
    Keep,
    Table(Cone),
    /// A wide and/or/xor over `direct` operands and packed `bins`.
    Split { op: NodeKind, direct: Vec<NodeId>, bins: Vec<Bin> },
}

struct Planner<'a> {
    store: &'a NodeStore,
    max_arity: usize,
    cut: Vec<bool>,
    heap: BinaryHeap<NodeId>,
}

impl<'a> Planner<'a> {
    fn under(&self, n: NodeId) -> (NodeId, bool) {
        let node = self.store.node(n);
        if node.kind == NodeKind::Not {
            (node.children[0], true)
        } else {
            (n, false)
        }
    }

    fn is_input(&self, n: NodeId) -> bool {
        matches!(self.store.node(n).kind, NodeKind::Input(_))
    }

    fn is_xor(&self, n: NodeId) -> bool {
        self.store.node(n).kind == NodeKind::Xor
    }

    fn make_cut(&mut self, n: NodeId) {
        if !self.cut[n.index()] {
            self.cut[n.index()] = true;
            self.heap.push(n);
        }
    }

    fn limit(&self, has_xor: bool) -> usize {
        if has_xor {
            XOR_TABLE_MAX.min(self.max_arity)
        } else {
            self.max_arity
        }
    }

    /// Greedy cone growth from `root`. `None` when the root's own children
    /// already exceed the limit.
    fn grow(&mut self, root: NodeId) -> Option<Cone> {
        let mut has_xor = self.is_xor(root);
        let mut leaves: BTreeSet<NodeId> = self
            .store
            .node(root)
            .children
            .iter()
            .map(|&c| self.under(c).0)
            .collect();
        if leaves.len() > self.limit(has_xor) {
            return None;
        }
        let mut internal = vec![root];
        loop {
            let cand = leaves
                .iter()
                .rev()
                .copied()
                .find(|&l| !self.cut[l.index()] && !self.is_input(l));
            let Some(l) = cand else { break };
            let mut grown = leaves.clone();
            grown.remove(&l);
            grown.extend(self.store.node(l).children.iter().map(|&c| self.under(c).0));
            let xor_after = has_xor || self.is_xor(l);
            if grown.len() <= self.limit(xor_after) {
                leaves = grown;
                internal.push(l);
                has_xor = xor_after;
            } else {
                self.make_cut(l);
            }
        }
        internal.sort_unstable();
        Some(Cone {
            leaves: leaves.into_iter().collect(),
            internal,
        })
    }

    /// Operands of a wide associative root after flattening fan-out-one
    /// children with the same operator. Returns the operand references and
    /// the flattened nodes.
    fn flatten(&self, root: NodeId, op: NodeKind) -> (Vec<NodeId>, Vec<NodeId>) {
        let mut operands = Vec::new();
        let mut absorbed = Vec::new();
        let mut stack: Vec<NodeId> = self.store.node(root).children.iter().rev().copied().collect();
        while let Some(c) = stack.pop() {
            let (u, neg) = self.under(c);
            if !neg && !self.cut[u.index()] && !self.is_input(u) && self.store.node(u).kind == op {
                absorbed.push(u);
                stack.extend(self.store.node(u).children.iter().rev().copied());
            } else {
                operands.push(c);
            }
        }
        (operands, absorbed)
    }

    fn plan(&mut self, v: NodeId, plans: &mut HashMap<NodeId, Plan>) {
        if self.max_arity < 2 {
            for c in self.store.node(v).children.clone() {
                let u = self.under(c).0;
                self.make_cut(u);
            }
            plans.insert(v, Plan::Keep);
            return;
        }
        if let Some(cone) = self.grow(v) {
            plans.insert(v, Plan::Table(cone));
            return;
        }
        let op = self.store.node(v).kind;
        if !matches!(op, NodeKind::And | NodeKind::Or | NodeKind::Xor) {
            for c in self.store.node(v).children.clone() {
                let u = self.under(c).0;
                self.make_cut(u);
            }
            plans.insert(v, Plan::Keep);
            return;
        }
        let (operands, _) = self.flatten(v, op);
        let mut direct = Vec::new();
        let mut candidates: Vec<(NodeId, Cone)> = Vec::new();
        for c in operands {
            let u = self.under(c).0;
            if self.cut[u.index()] || self.is_input(u) {
                direct.push(c);
                continue;
            }
            match self.grow(u) {
                Some(cone) => candidates.push((c, cone)),
                None => {
                    self.make_cut(u);
                    direct.push(c);
                }
            }
        }
        // First fit, largest support first.
        candidates.sort_by(|a, b| b.1.leaves.len().cmp(&a.1.leaves.len()).then(a.0.cmp(&b.0)));
        let mut bins: Vec<Bin> = Vec::new();
        for (c, cone) in candidates {
            let fit = bins.iter().position(|b| {
                let mut u = b.leaves.clone();
                u.extend(cone.leaves.iter().copied());
                u.len() <= self.max_arity
            });
            match fit {
                Some(i) => {
                    let b = &mut bins[i];
                    b.items.push(c);
                    b.leaves.extend(cone.leaves);
                    b.internal.extend(cone.internal);
                }
                None => bins.push(Bin {
                    items: vec![c],
                    leaves: cone.leaves.into_iter().collect(),
                    internal: cone.internal,
                }),
            }
        }
        let mut packed = Vec::new();
        for mut b in bins {
            if b.items.len() == 1 {
                // A lone cone is just a table node in its own right.
                let c = b.items[0];
                let u = self.under(c).0;
                self.cut[u.index()] = true;
                b.internal.sort_unstable();
                plans.insert(
                    u,
                    Plan::Table(Cone {
                        leaves: b.leaves.into_iter().collect(),
                        internal: b.internal,
                    }),
                );
                direct.push(c);
            } else {
                b.internal.sort_unstable();
                packed.push(b);
            }
        }
        plans.insert(
            v,
            Plan::Split {
                op,
                direct,
                bins: packed,
            },
        );
    }
}

/// Rewrites the live part of `enc`; see the module documentation for the
/// policy. With `max_arity < 2` the live part is copied unchanged.
pub fn fuse_tables(enc: &Encoding, live: &[bool], max_arity: usize) -> Encoding {
    let store = &enc.store;
    let len = store.len();
    let under = |n: NodeId| -> (NodeId, bool) {
        let node = store.node(n);
        if node.kind == NodeKind::Not {
            (node.children[0], true)
        } else {
            (n, false)
        }
    };
    let mut fanout = vec![0u32; len];
    let mut pos_refs = vec![0u32; len];
    let mut neg_refs = vec![0u32; len];
    let mut forced = vec![false; len];
    let mut count = |n: NodeId, fanout: &mut Vec<u32>| {
        let (u, neg) = under(n);
        fanout[u.index()] += 1;
        if neg {
            neg_refs[u.index()] += 1;
        } else {
            pos_refs[u.index()] += 1;
        }
        u
    };
    for (id, n) in store.nodes() {
        if !live[id.index()] || n.kind == NodeKind::Not {
            continue;
        }
        for &ch in &n.children {
            count(ch, &mut fanout);
        }
    }
    let roots = enc
        .outputs
        .iter()
        .chain(&enc.asserts)
        .chain(enc.core_vars.iter().flat_map(|c| c.bits.iter()));
    let mut scratch = vec![0u32; len];
    for r in roots {
        if let BitRef::Node(n) = *r {
            let u = count(n, &mut scratch);
            forced[u.index()] = true;
        }
    }
    for &m in &enc.mem_points {
        forced[m.index()] = true;
        pos_refs[m.index()] += 1;
    }

    let cut: Vec<bool> = store
        .nodes()
        .map(|(id, n)| {
            live[id.index()]
                && n.kind != NodeKind::Not
                && (matches!(n.kind, NodeKind::Input(_)) || forced[id.index()] || fanout[id.index()] != 1)
        })
        .collect();
    let heap = store
        .nodes()
        .filter(|(id, n)| cut[id.index()] && !matches!(n.kind, NodeKind::Input(_)))
        .map(|(id, _)| id)
        .collect();
    let mut planner = Planner {
        store,
        max_arity,
        cut,
        heap,
    };
    let mut plans: HashMap<NodeId, Plan> = HashMap::new();
    while let Some(v) = planner.heap.pop() {
        if !plans.contains_key(&v) {
            planner.plan(v, &mut plans);
        }
    }
    let cut = planner.cut;

    // Rebuild the cut points bottom-up in a fresh store.
    let mut out = NodeStore::new();
    let mut map: HashMap<NodeId, BitRef> = HashMap::new();
    for (i, &inp) in enc.inputs.iter().enumerate() {
        map.insert(inp, out.input(i as u32));
    }
    let new_ref = |map: &HashMap<NodeId, BitRef>, out: &mut NodeStore, r: BitRef| -> BitRef {
        match r {
            BitRef::Const(_) => r,
            BitRef::Node(n) => {
                let (u, neg) = under(n);
                let m = map[&u];
                if neg {
                    out.not(m)
                } else {
                    m
                }
            }
        }
    };
    for (id, n) in store.nodes() {
        if !cut[id.index()] || matches!(n.kind, NodeKind::Input(_)) {
            continue;
        }
        out.set_origin(n.origin);
        let r = match &plans[&id] {
            Plan::Keep => {
                let kids: Vec<BitRef> = n
                    .children
                    .iter()
                    .map(|&c| new_ref(&map, &mut out, BitRef::Node(c)))
                    .collect();
                out.mk_node(n.kind, &kids, n.table.as_ref()).expect("arity preserved")
            }
            Plan::Table(cone) => {
                let flip = pos_refs[id.index()] == 0 && neg_refs[id.index()] > 0;
                let tt = cone_table(store, &cone.leaves, &cone.internal, |val| val[&id], flip);
                let kids: Vec<BitRef> = cone
                    .leaves
                    .iter()
                    .map(|&l| new_ref(&map, &mut out, BitRef::Node(l)))
                    .collect();
                let t = out.table(&kids, &tt);
                if flip {
                    out.not(t)
                } else {
                    t
                }
            }
            Plan::Split { op, direct, bins } => {
                let mut kids: Vec<BitRef> = direct
                    .iter()
                    .map(|&c| new_ref(&map, &mut out, BitRef::Node(c)))
                    .collect();
                for b in bins {
                    let leaves: Vec<NodeId> = b.leaves.iter().copied().collect();
                    let items = &b.items;
                    let tt = cone_table(
                        store,
                        &leaves,
                        &b.internal,
                        |val| {
                            let mut it = items.iter().map(|&c| {
                                let (u, neg) = under(c);
                                val[&u] ^ neg
                            });
                            match op {
                                NodeKind::And => it.all(|x| x),
                                NodeKind::Or => it.any(|x| x),
                                _ => it.fold(false, |a, x| a ^ x),
                            }
                        },
                        false,
                    );
                    let lk: Vec<BitRef> = leaves
                        .iter()
                        .map(|&l| new_ref(&map, &mut out, BitRef::Node(l)))
                        .collect();
                    kids.push(out.table(&lk, &tt));
                }
                out.mk_node(*op, &kids, None)
                    .unwrap_or_else(|_| kids.first().copied().unwrap_or(BitRef::ZERO))
            }
        };
        map.insert(id, r);
    }
    out.set_origin(None);

    let remap = |out: &mut NodeStore, bits: &[BitRef]| -> Vec<BitRef> {
        bits.iter().map(|&b| new_ref(&map, out, b)).collect()
    };
    let outputs = remap(&mut out, &enc.outputs);
    let asserts = remap(&mut out, &enc.asserts);
    let regroup = |out: &mut NodeStore, groups: &[NamedBits]| -> Vec<NamedBits> {
        groups
            .iter()
            .map(|g| NamedBits {
                name: g.name.clone(),
                bits: remap(out, &g.bits),
            })
            .collect()
    };
    let input_groups = regroup(&mut out, &enc.input_groups);
    let output_groups = regroup(&mut out, &enc.output_groups);
    let core_vars = regroup(&mut out, &enc.core_vars);
    let mut mem_points = BTreeSet::new();
    for &m in &enc.mem_points {
        if let Some(BitRef::Node(n)) = map.get(&m).copied() {
            let node = out.node(n);
            mem_points.insert(if node.kind == NodeKind::Not { node.children[0] } else { n });
        }
    }
    let inputs = (0..enc.inputs.len())
        .map(|i| out.input(i as u32).node().unwrap())
        .collect();
    Encoding {
        store: out,
        inputs,
        input_groups,
        outputs,
        output_groups,
        asserts,
        core_vars,
        mem_points,
    }
}

/// Truth table over `leaves` of the value `result` reads from the evaluated
/// cone nodes `internal` (ascending ids).
fn cone_table(
    store: &NodeStore,
    leaves: &[NodeId],
    internal: &[NodeId],
    result: impl Fn(&HashMap<NodeId, bool>) -> bool,
    complement: bool,
) -> TruthTable {
    let mut val: HashMap<NodeId, bool> = HashMap::with_capacity(leaves.len() + internal.len());
    TruthTable::from_fn(leaves.len(), |row| {
        val.clear();
        for (i, &l) in leaves.iter().enumerate() {
            val.insert(l, row >> i & 1 == 1);
        }
        for &n in internal {
            let node = store.node(n);
            let get = |c: NodeId| -> bool {
                let cn = store.node(c);
                if cn.kind == NodeKind::Not {
                    !val[&cn.children[0]]
                } else {
                    val[&c]
                }
            };
            let v = match node.kind {
                NodeKind::And => node.children.iter().all(|&c| get(c)),
                NodeKind::Or => node.children.iter().any(|&c| get(c)),
                NodeKind::Xor => node.children.iter().fold(false, |a, &c| a ^ get(c)),
                NodeKind::Ite => {
                    if get(node.children[0]) {
                        get(node.children[1])
                    } else {
                        get(node.children[2])
                    }
                }
                NodeKind::Table => {
                    let r = node
                        .children
                        .iter()
                        .enumerate()
                        .fold(0usize, |a, (k, &c)| a | (get(c) as usize) << k);
                    node.table.as_ref().unwrap().get(r)
                }
                NodeKind::Not | NodeKind::Input(_) => unreachable!("not a cone node"),
            };
            val.insert(n, v);
        }
        result(&val) ^ complement
    })
}
