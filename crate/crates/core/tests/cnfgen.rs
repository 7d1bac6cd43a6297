use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tencoder::cnfgen::{
    encode, fuse_tables, minimize_table, naive_clauses, parse_template, prune, simulate_aiger, to_aiger, to_dimacs,
    EncodeError, EncodeOptions, TemplateCnf,
};
use tencoder::corpus::PROGRAMS;
use tencoder::frontend::{compile, compile_with, Resolved, SourceProgram};
use tencoder::refinterp::interpret;
use tencoder::symex::{execute, Encoding, NodeKind, TruthTable};

fn program(src: &str) -> (Resolved, Encoding) {
    let r = compile(&SourceProgram::in_memory(src)).unwrap_or_else(|d| panic!("{d:?}"));
    let e = execute(&r).unwrap();
    (r, e)
}

fn template(src: &str, opts: &EncodeOptions) -> TemplateCnf {
    encode(&program(src).1, opts).unwrap()
}

fn no_fusion() -> EncodeOptions {
    EncodeOptions { max_arity: 0, ..Default::default() }
}

fn clauses(t: &TemplateCnf) -> BTreeSet<Vec<i32>> {
    t.cnf.clauses.iter().map(|c| c.lits().to_vec()).collect()
}

fn set(cs: &[&[i32]]) -> BTreeSet<Vec<i32>> {
    cs.iter()
        .map(|c| {
            let mut v = c.to_vec();
            v.sort_by_key(|l| (l.abs(), *l));
            v
        })
        .collect()
}

fn normalized(t: &TemplateCnf) -> BTreeSet<Vec<i32>> {
    clauses(t)
        .into_iter()
        .map(|mut c| {
            c.sort_by_key(|l| (l.abs(), *l));
            c
        })
        .collect()
}

/// Model set of `cs` over variables `1..=n`, by brute force.
fn models(cs: &[Vec<i32>], n: u32) -> Vec<u32> {
    (0..1u32 << n)
        .filter(|m| {
            cs.iter()
                .all(|c| c.iter().any(|&l| (m >> (l.unsigned_abs() - 1) & 1 == 1) == (l > 0)))
        })
        .collect()
}

#[test]
fn and_gate_clauses() {
    let t = template("__in bit a; __in bit b; __out bit w; void main() { w = a & b; }", &no_fusion());
    assert_eq!(t.num_vars(), 3);
    assert_eq!(normalized(&t), set(&[&[-3, 1], &[2, -3], &[-1, -2, 3]]));
}

#[test]
fn identity_gets_fresh_output() {
    let t = template("__in bit x; __out bit y; void main() { y = x; }", &EncodeOptions::default());
    assert_eq!((t.inputs.clone(), t.outputs.clone()), (vec![1], vec![2]));
    assert_eq!(normalized(&t), set(&[&[-1, 2], &[1, -2]]));
}

#[test]
fn constant_output_is_a_unit_on_a_fresh_variable() {
    let t = template("__in bit x; __out bit y[2]; void main() { y[0] = 1; y[1] = x; }", &EncodeOptions::default());
    assert_eq!(t.outputs, vec![2, 3]);
    assert!(clauses(&t).contains(&vec![2]));
}

#[test]
fn lfsr_single_step() {
    let src = PROGRAMS.iter().find(|(n, _)| *n == "lfsr19").unwrap().1;
    let defs = BTreeMap::from([("E".to_string(), 1)]);
    let r = compile_with(&SourceProgram::in_memory(src), &defs).unwrap();
    let t = encode(&execute(&r).unwrap(), &EncodeOptions::default()).unwrap();
    assert_eq!(t.num_vars(), 20);
    assert_eq!(t.outputs, vec![20]);
    // Remap {1,2,3,6,20} onto 1..5 and compare model sets with the parity relation.
    let map = |l: i32| {
        let v = [1, 2, 3, 6, 20].iter().position(|&x| x == l.abs()).unwrap() as i32 + 1;
        if l > 0 { v } else { -v }
    };
    let cs: Vec<Vec<i32>> = clauses(&t).iter().map(|c| c.iter().map(|&l| map(l)).collect()).collect();
    let want: Vec<u32> = (0..32u32).filter(|m| m.count_ones() % 2 == 0).collect();
    assert_eq!(models(&cs, 5), want);

    let text = to_dimacs(&t);
    assert!(text.starts_with("c t-encoding v1\nc input 1 2 3 4 5 6 7 8 9 10 11 12 13 14 15 16 17 18 19\nc output 20\n"));
    assert!(!text.contains("\r"));
    assert!(text.lines().filter(|l| !l.starts_with('c')).skip(1).all(|l| l.ends_with(" 0") && l != "0"));
    assert_eq!(parse_template(&text).unwrap().cnf, t.cnf);
}

#[test]
fn dimacs_of_tiny_template() {
    let t = template("__in bit a; __out bit y; void main() { y = ~a; }", &no_fusion());
    let text = to_dimacs(&t);
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('c')).collect();
    assert_eq!(body, ["p cnf 2 2", "-1 -2 0", "1 2 0"]);
    assert_eq!(to_dimacs(&t), text);
}

#[test]
fn nand_fuses_into_one_table() {
    let (_, enc) = program("__in bit a; __in bit b; __in bit c; __out bit y; void main() { y = ~(a & b) ^ c; }");
    let fused = fuse_tables(&enc, &prune(&enc), 8);
    let tables: Vec<_> = fused.store.nodes().filter(|(_, n)| n.kind == NodeKind::Table).collect();
    assert_eq!(tables.len(), 1);
    let live = prune(&fused);
    assert!(fused
        .store
        .nodes()
        .all(|(id, n)| !live[id.index()] || !matches!(n.kind, NodeKind::And | NodeKind::Not)));
    for v in 0..8u32 {
        let x: Vec<bool> = (0..3).map(|i| v >> i & 1 == 1).collect();
        assert_eq!(fused.eval_outputs(&x), enc.eval_outputs(&x));
    }
    let t = encode(&enc, &EncodeOptions::default()).unwrap();
    assert_eq!(t.num_vars(), 4);
}

#[test]
fn mem_mark_stops_fusion() {
    let body = "bit m; void main() { m = a & b; y = m | c; }";
    let plain = format!("__in bit a; __in bit b; __in bit c; __out bit y; {body}");
    let marked = plain.replace("bit m;", "__mem bit m;");
    let opts = EncodeOptions::default();
    assert_eq!(template(&plain, &opts).num_vars(), 4);
    assert_eq!(template(&marked, &opts).num_vars(), 5);
}

#[test]
fn shared_node_is_not_fused() {
    let src = "__in bit a; __in bit b; __in bit c; __out bit y[2];
        void main() { bit t = a & b; y[0] = t | c; y[1] = t ^ c; }";
    assert_eq!(template(src, &EncodeOptions::default()).num_vars(), 6);
}

#[test]
fn trivial_assert_leaves_encoding_alone() {
    let base = "__in bit a; __in bit b; __out bit y; void main() { y = a & b; }";
    let with = base.replace("y = a & b;", "assert(1); y = a & b;");
    let opts = EncodeOptions::default();
    assert_eq!(template(base, &opts).cnf, template(&with, &opts).cnf);
    let never = base.replace("y = a & b;", "assert(0); y = a & b;");
    let t = template(&never, &opts);
    assert!(models(&clauses(&t).into_iter().collect::<Vec<_>>(), t.num_vars()).is_empty());
}

#[test]
fn variable_budget() {
    let (_, enc) = program("__in bit a[4]; __out bit y[4]; void main() { y = a * a; }");
    let opts = EncodeOptions { var_budget: 5, ..Default::default() };
    assert!(matches!(encode(&enc, &opts), Err(EncodeError::VarBudget { .. })));
}

#[test]
fn aiger_simulates_lfsr() {
    let src = PROGRAMS.iter().find(|(n, _)| *n == "lfsr19").unwrap().1;
    let (r, enc) = program(src);
    let aag = to_aiger(&enc).unwrap();
    assert!(aag.starts_with("aag "));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let x: Vec<bool> = (0..19).map(|_| rng.gen()).collect();
        assert_eq!(simulate_aiger(&aag, &x).unwrap(), interpret(&r, &x).unwrap().outputs);
    }
}

fn check_layout(name: &str, t: &TemplateCnf) {
    let n = t.inputs.len() as u32;
    let m = t.outputs.len() as u32;
    let nv = t.num_vars();
    assert_eq!(t.inputs, (1..=n).collect::<Vec<_>>(), "{name}");
    assert_eq!(t.outputs, (nv - m + 1..=nv).collect::<Vec<_>>(), "{name}");
    let mut seen = vec![false; nv as usize + 1];
    for c in &t.cnf.clauses {
        let lits = c.lits();
        assert!(!lits.is_empty() && lits.iter().all(|&l| l != 0 && l.unsigned_abs() <= nv), "{name}");
        let vars: BTreeSet<u32> = lits.iter().map(|l| l.unsigned_abs()).collect();
        assert_eq!(vars.len(), lits.len(), "{name}: repeated or complementary literal in {lits:?}");
        if lits.len() == 1 && t.outputs.contains(&lits[0].unsigned_abs()) {
            // Only a constant output bit may be pinned.
            let v = lits[0].unsigned_abs();
            let uses = t.cnf.clauses.iter().filter(|c| c.lits().iter().any(|l| l.unsigned_abs() == v)).count();
            assert_eq!(uses, 1, "{name}: unit on output {v}");
        }
        for v in vars {
            seen[v as usize] = true;
        }
    }
    for v in 1..=nv {
        assert!(seen[v as usize] || t.unused_inputs.contains(&v), "{name}: gap at {v}");
    }
}

#[test]
fn corpus_layout_and_fusion_bound() {
    for (name, src) in PROGRAMS {
        let (_, enc) = program(src);
        let fused = encode(&enc, &EncodeOptions::default()).unwrap();
        let plain = encode(&enc, &no_fusion()).unwrap();
        check_layout(name, &fused);
        check_layout(name, &plain);
        let (f, p) = (fused.metrics(), plain.metrics());
        assert!(f.clauses <= p.clauses || f.vars < p.vars, "{name}: {f:?} vs {p:?}");
    }
}

#[test]
fn fused_tables_minimize_exactly() {
    for (name, src) in PROGRAMS {
        let (_, enc) = program(src);
        let fused = fuse_tables(&enc, &prune(&enc), 8);
        for (id, node) in fused.store.nodes() {
            let Some(tt) = &node.table else { continue };
            let k = tt.arity() as u32;
            let a = models(&minimize_table(tt).unwrap(), k + 1);
            let b = models(&naive_clauses(tt), k + 1);
            assert_eq!(a, b, "{name}: table at {id:?}");
        }
    }
}

proptest! {
    #[test]
    fn minimization_is_exact_up_to_eight_inputs(k in 1usize..=8, seed in any::<u64>(), density in 0u32..=100) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tt = TruthTable::from_fn(k, |_| rng.gen_range(0..100) < density);
        let k = k as u32;
        prop_assert_eq!(models(&minimize_table(&tt).unwrap(), k + 1), models(&naive_clauses(&tt), k + 1));
    }

    #[test]
    fn random_programs_keep_layout(ops in prop::collection::vec((0usize..5, 0usize..5, 0usize..5), 1..12), arity in 0usize..=12) {
        let mut body = String::from("bit t[5] = x;\n");
        for (op, i, j) in &ops {
            body.push_str(&match op {
                0 => format!("t[{i}] = t[{i}] & t[{j}];"),
                1 => format!("t[{i}] = t[{i}] | t[{j}];"),
                2 => format!("t[{i}] = t[{i}] ^ t[{j}] ^ x[{i}];"),
                3 => format!("if (t[{j}]) {{ t[{i}] = ~t[{i}]; }}"),
                _ => "t = t + x;".to_string(),
            });
            body.push('\n');
        }
        let src = format!("__in bit x[5]; __out bit y[3]; void main() {{ {body} y = t[1:4]; }}");
        let (r, enc) = program(&src);
        let t = encode(&enc, &EncodeOptions { max_arity: arity, ..Default::default() }).unwrap();
        check_layout("random", &t);
        // The projection of the models onto (inputs, outputs) is the function graph.
        let cs: Vec<Vec<i32>> = clauses(&t).into_iter().collect();
        let nv = t.num_vars();
        prop_assume!(nv <= 20);
        let mut graph = BTreeSet::new();
        for m in models(&cs, nv) {
            let x: Vec<bool> = (0..5).map(|i| m >> i & 1 == 1).collect();
            let y: Vec<bool> = t.outputs.iter().map(|&v| m >> (v - 1) & 1 == 1).collect();
            graph.insert((x, y));
        }
        prop_assert_eq!(graph.len(), 32);
        for (x, y) in graph {
            prop_assert_eq!(interpret(&r, &x).unwrap().outputs, y);
        }
    }
}
