//! Variable numbering and gate clauses.

use std::collections::{BTreeMap, HashMap};

use crate::cnf::Cnf;
use crate::symex::{BitRef, Encoding, NodeId, NodeKind, TruthTable};

use super::minimize::minimize_table;
use super::{CoreLit, CoreRecord, EncodeError, EncodeOptions, TemplateCnf};

/// Number of fresh variables used to split an `k`-ary xor into pieces of at
/// most `d` operands.
fn chain_len(mut k: usize, d: usize) -> usize {
    let mut fresh = 0;
    while k > d {
        let full = k / d;
        fresh += full;
        k = full + k % d;
    }
    fresh
}

/// Clauses of `out = xor(lits)`: every assignment of odd total parity is
/// forbidden.
fn xor_clauses(cnf: &mut Cnf, lits: &[i32], out: i32) {
    let all: Vec<i32> = lits.iter().copied().chain(std::iter::once(out)).collect();
    for mask in 0u32..1 << all.len() {
        if mask.count_ones() % 2 == 0 {
            continue;
        }
        // The clause excludes the assignment where literal j is true iff bit j is set.
        let clause = all
            .iter()
            .enumerate()
            .map(|(j, &l)| if mask >> j & 1 == 1 { -l } else { l })
            .collect();
        cnf.add(clause);
    }
}

enum OutSlot {
    Node(NodeId),
    Fresh(BitRef),
}

/// Builds the template CNF for the live nodes of `enc`.
pub fn tseitin(enc: &Encoding, live: &[bool], opts: &EncodeOptions) -> Result<TemplateCnf, EncodeError> {
    let store = &enc.store;
    let d = opts.xor_direct_max;
    let under = |n: NodeId| -> (NodeId, bool) {
        let node = store.node(n);
        if node.kind == NodeKind::Not {
            (node.children[0], true)
        } else {
            (n, false)
        }
    };
    let n_in = enc.inputs.len() as u64;
    let mut var = vec![0u32; store.len()];
    for (i, &inp) in enc.inputs.iter().enumerate() {
        var[inp.index()] = i as u32 + 1;
    }

    let mut claimed = vec![false; store.len()];
    let slots: Vec<OutSlot> = enc
        .outputs
        .iter()
        .map(|&r| match r {
            BitRef::Node(x) => {
                let (u, neg) = under(x);
                if neg || matches!(store.node(u).kind, NodeKind::Input(_)) || claimed[u.index()] {
                    OutSlot::Fresh(r)
                } else {
                    claimed[u.index()] = true;
                    OutSlot::Node(u)
                }
            }
            BitRef::Const(_) => OutSlot::Fresh(r),
        })
        .collect();

    // Count first so the budget check happens before any allocation.
    let gates: Vec<NodeId> = store
        .nodes()
        .filter(|(id, n)| live[id.index()] && !matches!(n.kind, NodeKind::Not | NodeKind::Input(_)))
        .map(|(id, _)| id)
        .collect();
    let chains: u64 = gates
        .iter()
        .map(|&g| {
            let n = store.node(g);
            if n.kind == NodeKind::Xor {
                chain_len(n.children.len(), d) as u64
            } else {
                0
            }
        })
        .sum();
    let interior = gates.iter().filter(|g| !claimed[g.index()]).count() as u64;
    let total = n_in + chains + interior + slots.len() as u64;
    if total > opts.var_budget as u64 {
        return Err(EncodeError::VarBudget {
            needed: total,
            budget: opts.var_budget,
        });
    }

    let mut next = n_in as u32 + 1;
    let mut chain_start: BTreeMap<NodeId, u32> = BTreeMap::new();
    let mut var_to_node = BTreeMap::new();
    for (i, &inp) in enc.inputs.iter().enumerate() {
        var_to_node.insert(i as u32 + 1, inp);
    }
    for &g in &gates {
        let node = store.node(g);
        if node.kind == NodeKind::Xor {
            let c = chain_len(node.children.len(), d) as u32;
            if c > 0 {
                chain_start.insert(g, next);
                next += c;
            }
        }
        if !claimed[g.index()] {
            var[g.index()] = next;
            var_to_node.insert(next, g);
            next += 1;
        }
    }
    let mut out_vars = Vec::with_capacity(slots.len());
    for s in &slots {
        if let OutSlot::Node(u) = s {
            var[u.index()] = next;
            var_to_node.insert(next, *u);
        }
        out_vars.push(next);
        next += 1;
    }
    let num_vars = next - 1;

    let lit = |r: BitRef| -> Option<i32> {
        match r {
            BitRef::Const(_) => None,
            BitRef::Node(x) => {
                let (u, neg) = under(x);
                let v = var[u.index()] as i32;
                debug_assert!(v > 0, "unnumbered node {u:?}");
                Some(if neg { -v } else { v })
            }
        }
    };
    let child_lits = |g: NodeId| -> Vec<i32> {
        store
            .node(g)
            .children
            .iter()
            .map(|&c| lit(BitRef::Node(c)).unwrap())
            .collect()
    };

    let mut cnf = Cnf::new(num_vars);
    let mut table_cache: HashMap<TruthTable, Vec<Vec<i32>>> = HashMap::new();
    for &g in &gates {
        let node = store.node(g);
        let x = var[g.index()] as i32;
        let cs = child_lits(g);
        match node.kind {
            NodeKind::And => {
                for &c in &cs {
                    cnf.add(vec![-x, c]);
                }
                cnf.add(cs.iter().map(|c| -c).chain([x]).collect());
            }
            NodeKind::Or => {
                for &c in &cs {
                    cnf.add(vec![x, -c]);
                }
                cnf.add(cs.iter().copied().chain([-x]).collect());
            }
            NodeKind::Xor => {
                let mut ops = cs;
                let mut fresh = chain_start.get(&g).copied().unwrap_or(0) as i32;
                while ops.len() > d {
                    let full = ops.len() / d;
                    let mut reduced = Vec::with_capacity(full + d);
                    for chunk in ops.chunks(d).take(full) {
                        xor_clauses(&mut cnf, chunk, fresh);
                        reduced.push(fresh);
                        fresh += 1;
                    }
                    reduced.extend_from_slice(&ops[full * d..]);
                    ops = reduced;
                }
                xor_clauses(&mut cnf, &ops, x);
            }
            NodeKind::Ite => {
                let (c, a, b) = (cs[0], cs[1], cs[2]);
                cnf.add(vec![-c, -a, x]);
                cnf.add(vec![-c, a, -x]);
                cnf.add(vec![c, -b, x]);
                cnf.add(vec![c, b, -x]);
                if opts.ite_redundant {
                    cnf.add(vec![-a, -b, x]);
                    cnf.add(vec![a, b, -x]);
                }
            }
            NodeKind::Table => {
                let tt = node.table.as_ref().expect("table node carries a table");
                let local = table_cache
                    .entry(tt.clone())
                    .or_insert_with(|| minimize_table(tt).expect("table arity checked at construction"));
                let k = cs.len() as i32;
                for cl in local.iter() {
                    cnf.add(
                        cl.iter()
                            .map(|&l| {
                                let v = l.abs();
                                let g = if v == k + 1 { x } else { cs[(v - 1) as usize] };
                                if l < 0 {
                                    -g
                                } else {
                                    g
                                }
                            })
                            .collect(),
                    );
                }
            }
            NodeKind::Not | NodeKind::Input(_) => unreachable!(),
        }
    }

    for (s, &o) in slots.iter().zip(&out_vars) {
        let o = o as i32;
        if let OutSlot::Fresh(r) = s {
            match lit(*r) {
                Some(l) => {
                    cnf.add(vec![-o, l]);
                    cnf.add(vec![o, -l]);
                }
                None => cnf.add(vec![if *r == BitRef::ONE { o } else { -o }]),
            }
        }
    }

    for &a in &enc.asserts {
        match lit(a) {
            Some(l) => cnf.add(vec![l]),
            None if a == BitRef::ONE => {}
            None => {
                if cnf.num_vars == 0 {
                    cnf.num_vars = 1;
                }
                cnf.add(vec![1]);
                cnf.add(vec![-1]);
            }
        }
    }

    let core = enc
        .core_vars
        .iter()
        .map(|c| CoreRecord {
            label: c.name.clone(),
            lits: c
                .bits
                .iter()
                .map(|&b| match lit(b) {
                    Some(l) => CoreLit::Lit(l),
                    None => CoreLit::Const(b == BitRef::ONE),
                })
                .collect(),
        })
        .collect();

    let mut seen = vec![false; cnf.num_vars as usize + 1];
    for c in &cnf.clauses {
        for &l in c.lits() {
            seen[l.unsigned_abs() as usize] = true;
        }
    }
    let inputs: Vec<u32> = (1..=n_in as u32).collect();
    let unused_inputs = inputs.iter().copied().filter(|&v| !seen[v as usize]).collect();

    Ok(TemplateCnf {
        cnf,
        inputs,
        outputs: out_vars,
        core,
        unused_inputs,
        var_to_node,
        extra_header: Vec::new(),
    })
}
