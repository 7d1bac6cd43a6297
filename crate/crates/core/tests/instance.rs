use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tencoder::cnfgen::{parse_template, EncodeOptions, TemplateCnf};
use tencoder::corpus::PROGRAMS;
use tencoder::frontend::SourceProgram;
use tencoder::instance::{
    add_switches, add_switching, bind_input, bind_output, collision_instance, estimate_gd, guess_family, measure_mu,
    project, set_switch, write_stream, EstimateError, EstimateSolver, GuessMode, InstanceError, InstanceKind,
};
use tencoder::pipeline::{build, Compiled};
use tencoder::refinterp::interpret;
use tencoder::satcore::{enumerate_models, solve, unit_propagate, SolveResult, SolverConfig, UpResult};

fn compiled(src: &str) -> Compiled {
    build(&SourceProgram::in_memory(src), &BTreeMap::new(), &EncodeOptions::default()).unwrap()
}

fn corpus(name: &str) -> Compiled {
    compiled(PROGRAMS.iter().find(|(n, _)| *n == name).unwrap().1)
}

fn bits(v: u32, n: usize) -> Vec<bool> {
    (0..n).map(|i| v >> i & 1 == 1).collect()
}

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

/// Brute-force preimage table of a compiled program.
fn preimages(c: &Compiled) -> BTreeMap<Vec<bool>, Vec<Vec<bool>>> {
    let n = c.template.inputs.len();
    let mut map: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for v in 0..1u32 << n {
        let x = bits(v, n);
        if let Ok(r) = interpret(&c.resolved, &x) {
            map.entry(r.outputs).or_default().push(x);
        }
    }
    map
}

fn check_parsimony(c: &Compiled) {
    let t = &c.template;
    let m = t.outputs.len();
    let table = preimages(c);
    for v in 0..1u32 << m {
        let y = bits(v, m);
        let inst = bind_output(t, &y).unwrap();
        let e = enumerate_models(&inst.to_cnf(), None, 1 << 12, &cfg());
        assert!(!e.truncated && !e.incomplete);
        let mut got: Vec<Vec<bool>> = e.models.iter().map(|m| project(m, &t.inputs)).collect();
        got.sort();
        let mut want = table.get(&y).cloned().unwrap_or_default();
        want.sort();
        assert_eq!(got, want, "y = {y:?}");
        for x in &got {
            assert_eq!(interpret(&c.resolved, x).unwrap().outputs, y);
        }
    }
}

#[test]
fn preimages_are_exact_on_small_functions() {
    for name in ["toyhash6to3", "adder4", "perm6"] {
        check_parsimony(&corpus(name));
    }
    check_parsimony(&compiled(
        "__in bit x[9]; __out bit y[4]; void main() { bit a[4] = x[0:4]; bit b[4] = x[4:8]; y = a * b ^ (a + x[8]); }",
    ));
}

#[test]
fn input_binding_determines_everything() {
    let id = compiled("__in bit x[3]; __out bit y[3]; void main() { y = x; }");
    let UpResult::Fixpoint(a) = unit_propagate(&bind_input(&id.template, &[false; 3]).unwrap().to_cnf(), &[]) else {
        panic!()
    };
    assert_eq!(id.template.outputs.iter().map(|&v| a.value(v)).collect::<Vec<_>>(), vec![Some(false); 3]);

    let lfsr = corpus("lfsr19");
    let mut seed = vec![false; 19];
    seed[0] = true;
    let UpResult::Fixpoint(a) = unit_propagate(&bind_input(&lfsr.template, &seed).unwrap().to_cnf(), &[]) else {
        panic!()
    };
    let got: Vec<bool> = lfsr.template.outputs.iter().map(|&v| a.value(v).unwrap()).collect();
    assert_eq!(got, interpret(&lfsr.resolved, &seed).unwrap().outputs);

    // a = 3, b = 1, least significant bit first.
    let add = corpus("adder4");
    let UpResult::Fixpoint(a) =
        unit_propagate(&bind_input(&add.template, &[true, true, true, false]).unwrap().to_cnf(), &[])
    else {
        panic!()
    };
    let sum: Vec<bool> = add.template.outputs.iter().map(|&v| a.value(v).unwrap()).collect();
    assert_eq!(sum, vec![false, false, true]);
}

#[test]
fn length_mismatch() {
    let t = corpus("adder4").template;
    assert!(matches!(bind_input(&t, &[true]), Err(InstanceError::Length { expected: 4, got: 1 })));
    assert!(matches!(bind_output(&t, &[true; 4]), Err(InstanceError::Length { expected: 3, got: 4 })));
}

#[test]
fn and_preimage_is_unique() {
    let c = compiled("__in bit x[2]; __out bit y; void main() { y = x[0] & x[1]; }");
    let s = solve(&bind_output(&c.template, &[true]).unwrap().to_cnf(), &[], &cfg());
    assert_eq!(project(s.result.model().unwrap(), &c.template.inputs), vec![true, true]);
}

#[test]
fn collisions_of_the_adder() {
    let c = corpus("adder4");
    let (inst, vars) = collision_instance(&c.template);
    assert_eq!(inst.kind, InstanceKind::Collision);
    let e = enumerate_models(&inst.to_cnf(), Some(&[c.template.inputs.clone(), vars.inputs2.clone()].concat()), 1 << 10, &cfg());
    let pairs: BTreeSet<(Vec<bool>, Vec<bool>)> = e
        .models
        .iter()
        .map(|m| {
            let (a, b) = (project(m, &c.template.inputs), project(m, &vars.inputs2));
            assert_eq!(interpret(&c.resolved, &a).unwrap().outputs, interpret(&c.resolved, &b).unwrap().outputs);
            if a < b { (a, b) } else { (b, a) }
        })
        .collect();
    let want: usize = preimages(&c).values().map(|p| p.len() * (p.len() - 1) / 2).sum();
    assert_eq!(pairs.len(), want);
    assert_eq!(e.models.len(), 2 * want);
}

#[test]
fn switching_constraints_select_relaxations() {
    let c = corpus("lfsr19");
    let t = &c.template;
    // Constraint k pins input k to the value it has in a fixed secret.
    let secret: Vec<bool> = bits(0b101_1001_1100_0110_1011, 19);
    let constraints: Vec<Vec<Vec<i32>>> = (0..12)
        .map(|k| vec![vec![if secret[k] { t.inputs[k] as i32 } else { -(t.inputs[k] as i32) }]])
        .collect();
    let (inst, us) = add_switches(t, &constraints).unwrap();
    assert_eq!(us, (t.num_vars() + 1..=t.num_vars() + 12).collect::<Vec<_>>());
    let cnf = inst.to_cnf();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let active: Vec<usize> = (0..12).filter(|_| rng.gen()).collect();
        let on: Vec<u32> = active.iter().map(|&k| us[k]).collect();
        let mu = measure_mu(&cnf, &on, &t.inputs);
        assert_eq!(mu.count, active.len());
        assert!(!mu.conflict);
        let m = solve(&cnf, &on.iter().map(|&u| u as i32).collect::<Vec<_>>(), &cfg()).result;
        let m = m.model().unwrap().to_vec();
        for &k in &active {
            assert_eq!(m[t.inputs[k] as usize], secret[k]);
        }
    }
    assert_eq!(measure_mu(&cnf, &[], &t.inputs).count, 0);
}

#[test]
fn mu_flags_conflicts() {
    let t = corpus("adder4").template;
    let (inst, us) = add_switches(&t, &[vec![vec![1]], vec![vec![-1]]]).unwrap();
    let mu = measure_mu(&inst.to_cnf(), &us, &t.inputs);
    assert!(mu.conflict);
    assert_eq!(mu.count, 0);
}

#[test]
fn activated_unit_forces_models() {
    let c = corpus("toyhash6to3");
    let (mut inst, u) = add_switching(&c.template, &[vec![1]]).unwrap();
    set_switch(&mut inst, u, true);
    let e = enumerate_models(&inst.to_cnf(), Some(&c.template.inputs), 100, &cfg());
    assert_eq!(e.models.len(), 32);
    assert!(e.models.iter().all(|m| m[1]));
}

#[test]
fn unknown_switch_variable() {
    let t = corpus("adder4").template;
    assert!(matches!(add_switching(&t, &[vec![99]]), Err(InstanceError::UnknownVariable(99))));
}

#[test]
fn guessing_all_inputs_leaves_one_sat_instance_per_preimage() {
    let c = corpus("toyhash6to3");
    let t = &c.template;
    for (y, pre) in preimages(&c) {
        let fam = guess_family(t, &y, &t.inputs, GuessMode::Exhaustive).unwrap();
        assert_eq!(fam.len(), 64);
        let sat: Vec<Vec<bool>> = fam
            .filter_map(|inst| solve(&inst.to_cnf(), &[], &cfg()).result.model().map(|m| project(m, &t.inputs)))
            .collect();
        assert_eq!(sat, pre);
    }
}

#[test]
fn guess_family_shapes() {
    let t = corpus("toyhash6to3").template;
    let y = [true, false, true];
    let mut empty = guess_family(&t, &y, &[], GuessMode::Exhaustive).unwrap();
    assert_eq!(empty.len(), 1);
    assert_eq!(empty.next().unwrap(), bind_output(&t, &y).unwrap());
    assert!(empty.next().is_none());

    let fam: Vec<_> = guess_family(&t, &y, &[1, 2, 3], GuessMode::Exhaustive).unwrap().collect();
    assert_eq!(fam.len(), 8);
    assert!(fam.iter().all(|i| i.kind == InstanceKind::Guessed));
    assert!(fam[5].header.contains(&"guess 1=1 2=0 3=1".to_string()));

    let sample = GuessMode::Sample { count: 100, seed: 1 };
    let a: Vec<_> = guess_family(&t, &y, &[1, 2, 3, 4], sample).unwrap().collect();
    let b: Vec<_> = guess_family(&t, &y, &[1, 2, 3, 4], sample).unwrap().collect();
    assert_eq!(a.len(), 100);
    assert_eq!(write_stream(&a), write_stream(&b));

    let big = corpus("s_geffe160").template;
    let ys = vec![false; big.outputs.len()];
    let b31: Vec<u32> = (1..=31).collect();
    assert!(matches!(
        guess_family(&big, &ys, &b31, GuessMode::Exhaustive),
        Err(InstanceError::TooManyGuesses(31))
    ));
    assert!(guess_family(&big, &ys, &b31, GuessMode::Sample { count: 2, seed: 0 }).is_ok());
    assert!(guess_family(&t, &y, &[1, 1], GuessMode::Exhaustive).is_err());
    assert!(guess_family(&t, &y, &[0], GuessMode::Exhaustive).is_err());
}

#[test]
fn stream_and_headers() {
    let t = corpus("adder4").template;
    let a = bind_output(&t, &[true, false, true]).unwrap();
    let b = bind_input(&t, &[true, true, false, false]).unwrap();
    let text = write_stream([&a, &b]);
    assert!(text.starts_with("c --- instance 0 ---\nc t-encoding v1\n"));
    assert!(text.contains("c --- instance 1 ---\n"));
    let parsed: TemplateCnf = parse_template(&a.to_dimacs()).unwrap();
    assert!(parsed.extra_header.contains(&"bound output 101".to_string()));
    assert_eq!(parsed.cnf, a.to_cnf());
}

#[test]
fn estimate_basics() {
    let t = corpus("toyhash6to3").template;
    let solver = EstimateSolver::Embedded(cfg());
    let e = estimate_gd(&t, &t.inputs, 40, &solver, 9).unwrap();
    assert_eq!(e.rho, 1.0);
    assert_eq!(e.solved, 40);
    assert_eq!(e.estimator, "simplified estimator");
    assert_eq!(e.epsilon, 1.0 / 80.0);
    let total = e.total_cost.unwrap();
    assert!((total - 64.0 * e.mean_cost.unwrap()).abs() < 1e-9);
    assert_eq!(estimate_gd(&t, &t.inputs, 40, &solver, 9).unwrap(), e);
    assert!(matches!(estimate_gd(&t, &t.inputs, 0, &solver, 9), Err(EstimateError::NoSamples)));

    // No guessed bits: the estimate is the mean cost of solving directly.
    let d = estimate_gd(&t, &[], 40, &solver, 9).unwrap();
    assert_eq!(d.rho, 1.0);
    assert_eq!(d.total_cost, d.mean_cost);
}

#[test]
fn estimate_tracks_exhaustive_family_cost() {
    let c = corpus("geffe_small");
    let t = &c.template;
    let b: Vec<u32> = t.inputs[..10].to_vec();
    let solver = EstimateSolver::Embedded(cfg());
    let est = estimate_gd(t, &b, 200, &solver, 2024).unwrap();
    assert_eq!(est.rho, 1.0);
    let predicted = est.total_cost.unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let x: Vec<bool> = (0..t.inputs.len()).map(|_| rng.gen()).collect();
    let y = interpret(&c.resolved, &x).unwrap().outputs;
    let mut measured = 0u64;
    let mut sat = 0;
    for inst in guess_family(t, &y, &b, GuessMode::Exhaustive).unwrap() {
        let s = solve(&inst.to_cnf(), &[], &cfg());
        sat += matches!(s.result, SolveResult::Sat(_)) as usize;
        measured += s.stats.propagations;
    }
    assert!(sat >= 1);
    let ratio = predicted / measured as f64;
    assert!((0.1..=10.0).contains(&ratio), "predicted {predicted}, measured {measured}");
}

proptest! {
    #[test]
    fn deactivated_switches_are_neutral(
        constraint in prop::collection::vec(prop::collection::vec((1i32..=9, any::<bool>()), 1..4), 1..4),
        off_by_unit in any::<bool>(),
    ) {
        let c = corpus("toyhash6to3");
        let t = &c.template;
        prop_assert_eq!(t.num_vars(), 9);
        let clauses: Vec<Vec<i32>> = constraint
            .iter()
            .map(|cl| cl.iter().map(|&(v, s)| if s { v } else { -v }).collect())
            .collect();
        let (mut inst, u) = add_switching(t, &clauses).unwrap();
        if off_by_unit {
            set_switch(&mut inst, u, false);
        }
        let base: Vec<u32> = (1..=t.num_vars()).collect();
        let proj = |cnf| {
            enumerate_models(&cnf, Some(&base), 1 << 12, &cfg())
                .models
                .iter()
                .map(|m| project(m, &base))
                .collect::<BTreeSet<_>>()
        };
        prop_assert_eq!(proj(inst.to_cnf()), proj(t.cnf.clone()));
    }
}
