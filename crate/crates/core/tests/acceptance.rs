//! End-to-end acceptance checks. Runs without the libtest harness so that
//! one PASS/FAIL line per criterion is always printed.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tencoder::cnfgen::{minimize_table, naive_clauses, to_dimacs, EncodeOptions, TemplateCnf};
use tencoder::corpus::{self, PROGRAMS};
use tencoder::frontend::{Resolved, SourceProgram};
use tencoder::instance::{
    add_switches, bind_input, bind_output, collision_instance, estimate_gd, guess_family, measure_mu, project, set_switch,
    write_stream, EstimateSolver, GuessMode,
};
use tencoder::pipeline::{build, propagate_input, Compiled};
use tencoder::refinterp::interpret;
use tencoder::satcore::{enumerate_models, solve, unit_propagate, Budget, SolveResult, SolverConfig};
use tencoder::symex::TruthTable;

type Outcome = Result<String, String>;

fn compiled(name: &str) -> Compiled {
    compiled_with(name, &[])
}

fn compiled_with(name: &str, defines: &[(&str, i64)]) -> Compiled {
    let src = SourceProgram::new(corpus::source(name).expect("shipped program"), name);
    let defs: BTreeMap<String, i64> = defines.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    build(&src, &defs, &EncodeOptions::default()).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn bits(v: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| v >> i & 1 == 1).collect()
}

fn run(r: &Resolved, x: &[bool]) -> Vec<bool> {
    interpret(r, x).expect("interpreter").outputs
}

/// Brute-force image of every input.
fn table(c: &Compiled) -> Vec<Vec<bool>> {
    let n = c.template.inputs.len();
    (0..1u64 << n).map(|x| run(&c.resolved, &bits(x, n))).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn up_completeness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    for (name, _) in PROGRAMS {
        let c = compiled(name);
        let t = &c.template;
        for _ in 0..100 {
            let x: Vec<bool> = (0..t.inputs.len()).map(|_| rng.gen()).collect();
            let cnf = bind_input(t, &x).unwrap().to_cnf();
            let up = unit_propagate(&cnf, &[]);
            let a = up.fixpoint().ok_or_else(|| format!("{name}: conflict"))?;
            ensure(a.is_total(), || format!("{name}: {} of {} assigned", a.num_assigned(), t.num_vars()))?;
            let got: Vec<bool> = t.outputs.iter().map(|&v| a.value(v).unwrap()).collect();
            ensure(got == run(&c.resolved, &x), || format!("{name}: outputs differ from the interpreter"))?;
            checked += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!("{checked} samples over {} programs in {secs:.1}s", PROGRAMS.len()))
}

fn round_trip() -> Outcome {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let mut preimage_checks = 0;
    let mut unreachable: Vec<(&str, Vec<bool>)> = Vec::new();
    for name in ["toyhash6to3", "adder4"] {
        let c = compiled(name);
        let t = &c.template;
        let images = table(&c);
        let mut by_y: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
        for y in &images {
            *by_y.entry(y.clone()).or_default() += 1;
        }
        for (x, y) in images.iter().enumerate() {
            let inst = bind_output(t, y).unwrap();
            let e = enumerate_models(&inst.to_cnf(), Some(&t.inputs), 1 << 10, &cfg);
            ensure(!e.models.is_empty(), || format!("{name}: x={x} gives UNSAT"))?;
            for m in &e.models {
                ensure(run(&c.resolved, &project(m, &t.inputs)) == *y, || format!("{name}: bad preimage"))?;
            }
            preimage_checks += 1;
        }
        let m = t.outputs.len();
        for v in 0..1u64 << m {
            let y = bits(v, m);
            if !by_y.contains_key(&y) {
                unreachable.push((name, y));
            }
        }
    }
    // Top up from the 4x4 multiplier, whose range is sparse.
    let mul = compiled("mul4");
    let range: BTreeSet<Vec<bool>> = table(&mul).into_iter().collect();
    let mut v = 0u64;
    while unreachable.len() < 20 {
        let y = bits(v, 8);
        if !range.contains(&y) {
            unreachable.push(("mul4", y));
        }
        v += 1;
    }
    let mut templates: HashMap<&str, TemplateCnf> = HashMap::new();
    for (name, y) in &unreachable {
        let t = templates.entry(name).or_insert_with(|| compiled(name).template);
        let r = solve(&bind_output(t, y).unwrap().to_cnf(), &[], &cfg).result;
        ensure(r == SolveResult::Unsat, || format!("{name}: unreachable y is not UNSAT"))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "{preimage_checks} images round-trip, {} unreachable outputs UNSAT, {secs:.1}s",
        unreachable.len()
    ))
}

fn parsimony() -> Outcome {
    let c = compiled("toyhash6to3");
    let t = &c.template;
    let mut count: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
    for y in table(&c) {
        *count.entry(y).or_default() += 1;
    }
    for (y, &k) in &count {
        let e = enumerate_models(&bind_output(t, y).unwrap().to_cnf(), None, 1000, &SolverConfig::default());
        ensure(e.models.len() == k && !e.truncated, || {
            format!("y={y:?}: {} models, {k} preimages", e.models.len())
        })?;
    }
    Ok(format!("{} reachable outputs, model counts match", count.len()))
}

fn collisions() -> Outcome {
    let c = compiled("toyhash6to3");
    let t = &c.template;
    let images = table(&c);
    let mut brute = 0;
    for a in 0..images.len() {
        for b in a + 1..images.len() {
            if images[a] == images[b] {
                brute += 1;
            }
        }
    }
    let (inst, vars) = collision_instance(t);
    let mut proj = t.inputs.clone();
    proj.extend(&vars.inputs2);
    let e = enumerate_models(&inst.to_cnf(), Some(&proj), 1 << 13, &SolverConfig::default());
    for m in &e.models {
        let (x1, x2) = (project(m, &t.inputs), project(m, &vars.inputs2));
        ensure(x1 != x2 && run(&c.resolved, &x1) == run(&c.resolved, &x2), || "model is not a collision".into())?;
    }
    ensure(e.models.len() == 2 * brute, || {
        format!("{} ordered model pairs, {brute} brute-force pairs", e.models.len())
    })?;
    let perm = compiled("perm6");
    let images = table(&perm);
    ensure(images.iter().collect::<BTreeSet<_>>().len() == images.len(), || "perm6 is not injective".into())?;
    let (pinst, _) = collision_instance(&perm.template);
    let r = solve(&pinst.to_cnf(), &[], &SolverConfig::default()).result;
    ensure(r == SolveResult::Unsat, || "permutation collision instance is satisfiable".into())?;
    Ok(format!("{brute} collision pairs match; permutation UNSAT"))
}

fn lfsr_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for e in [1usize, 8, 30] {
        let c = compiled_with("lfsr19", &[("E", e as i64)]);
        let t = &c.template;
        ensure(t.num_vars() as usize == 19 + e, || format!("e={e}: {} variables", t.num_vars()))?;
        ensure(t.outputs == (20..20 + e as u32).collect::<Vec<_>>(), || format!("e={e}: output numbering"))?;
        for _ in 0..10 {
            let x: Vec<bool> = (0..19).map(|_| rng.gen()).collect();
            let up = propagate_input(t, &x);
            let a = up.fixpoint().ok_or("conflict")?;
            let v = |i: usize| a.value(i as u32).unwrap();
            for s in 1..=e {
                ensure(v(s + 19) == (v(s) ^ v(s + 1) ^ v(s + 2) ^ v(s + 5)), || format!("e={e}: relation at t={s}"))?;
                for tap in [s, s + 1, s + 2, s + 5].into_iter().filter(|&p| p <= 19) {
                    let mut x2 = x.clone();
                    x2[tap - 1] ^= true;
                    let up2 = propagate_input(t, &x2);
                    let a2 = up2.fixpoint().ok_or("conflict")?;
                    ensure(a2.value((s + 19) as u32) != Some(v(s + 19)), || {
                        format!("e={e}: flipping v{tap} does not flip v{}", s + 19)
                    })?;
                }
            }
        }
    }
    Ok("e in {1, 8, 30}: n+e variables, feedback relation and tap flips hold".into())
}

fn size_ballpark() -> Outcome {
    let targets = [("bivium", 1172usize, 7405usize), ("grain_v1", 1945, 34165), ("s_geffe160", 1000, 6474)];
    let mut report = Vec::new();
    let mut bad = Vec::new();
    for (name, tv, tc) in targets {
        let m = compiled(name).template.metrics();
        let within = |got: usize, want: usize| got * 2 >= want && got <= want * 2;
        let line = format!("{name} {}/{} (target {tv}/{tc})", m.vars, m.clauses);
        if !(within(m.vars as usize, tv) && within(m.clauses, tc)) {
            bad.push(line.clone());
        }
        report.push(line);
    }
    ensure(bad.is_empty(), || format!("outside factor 2: {}", bad.join(", ")))?;
    Ok(report.join(", "))
}

fn geffe_inversion() -> Outcome {
    let c = compiled("geffe_small");
    let t = &c.template;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let x: Vec<bool> = (0..t.inputs.len()).map(|_| rng.gen()).collect();
    let y = run(&c.resolved, &x);
    let start = Instant::now();
    let s = solve(&bind_output(t, &y).unwrap().to_cnf(), &[], &SolverConfig::default());
    let secs = start.elapsed().as_secs_f64();
    let m = s.result.model().ok_or("no model")?;
    let seed = project(m, &t.inputs);
    ensure(run(&c.resolved, &seed) == y, || "recovered seed does not regenerate the keystream".into())?;
    ensure(secs < 10.0, || format!("took {secs:.2}s"))?;
    Ok(format!("{} keystream bits inverted in {secs:.3}s ({} decisions)", y.len(), s.stats.decisions))
}

fn clause_models(clauses: &[Vec<i32>], vars: usize) -> Vec<u32> {
    (0..1u32 << vars)
        .filter(|a| {
            clauses
                .iter()
                .all(|c| c.iter().any(|&l| (a >> (l.unsigned_abs() - 1) & 1 == 1) == (l > 0)))
        })
        .collect()
}

fn minimization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut saved = 0usize;
    for i in 0..500 {
        let k = rng.gen_range(1..=8);
        let tt = TruthTable::from_fn(k, |_| rng.gen());
        let min = minimize_table(&tt).map_err(|e| e.to_string())?;
        let naive = naive_clauses(&tt);
        ensure(clause_models(&min, k + 1) == clause_models(&naive, k + 1), || format!("table {i} differs"))?;
        saved += naive.len() - min.len().min(naive.len());
    }
    Ok(format!("500 tables equivalent; {saved} clauses saved over row-wise encoding"))
}

fn switching() -> Outcome {
    let src = "__in bit x[3]; __out bit y[2]; void main() { y[0] = x[0]; y[1] = x[1] ^ x[2]; }";
    let t = build(&SourceProgram::in_memory(src), &BTreeMap::new(), &EncodeOptions::default())
        .map_err(|e| e.to_string())?
        .template;
    let n = t.num_vars();
    let (y0, y1) = (t.outputs[0] as i32, t.outputs[1] as i32);
    let constraints = vec![vec![vec![y0]], vec![vec![y1], vec![-2, 3]], vec![vec![-1, -y1]]];
    let (inst, us) = add_switches(&t, &constraints).map_err(|e| e.to_string())?;
    let cfg = SolverConfig::default();
    let base_vars: Vec<u32> = (1..=n).collect();
    let base: BTreeSet<Vec<bool>> = enumerate_models(&t.cnf, None, 1 << 12, &cfg)
        .models
        .iter()
        .map(|m| project(m, &base_vars))
        .collect();
    let mut off = inst.clone();
    for &u in &us {
        set_switch(&mut off, u, false);
    }
    let relaxed: BTreeSet<Vec<bool>> = enumerate_models(&off.to_cnf(), None, 1 << 12, &cfg)
        .models
        .iter()
        .map(|m| project(m, &base_vars))
        .collect();
    ensure(base == relaxed && base.len() == 8, || "switches off changed the model set".into())?;
    let cnf = inst.to_cnf();
    let none = measure_mu(&cnf, &[], &t.inputs);
    let pinned = measure_mu(&cnf, &us[..1], &t.inputs);
    ensure(none.count == 0 && !none.conflict, || format!("mu with nothing active = {}", none.count))?;
    ensure(pinned.count >= 1 && !pinned.conflict, || "pinning an input copy derives nothing".into())?;
    let lfsr = compiled("lfsr19").template;
    let l = measure_mu(&lfsr.cnf, &[], &lfsr.inputs);
    ensure(l.count == 0, || "lfsr template derives inputs on its own".into())?;
    Ok(format!("model set unchanged ({} models); mu = 0 idle, {} pinned", base.len(), pinned.count))
}

fn determinism() -> Outcome {
    for name in ["bivium", "grain_v1", "geffe_small", "toyhash6to3"] {
        ensure(to_dimacs(&compiled(name).template) == to_dimacs(&compiled(name).template), || {
            format!("{name}: encodings differ")
        })?;
    }
    let c = compiled("geffe_small");
    let t = &c.template;
    let y = run(&c.resolved, &bits(0x2d5a3, t.inputs.len()));
    let stream = || {
        let fam = guess_family(t, &y, &[1, 2, 3, 4, 5], GuessMode::Sample { count: 100, seed: 1 }).unwrap();
        write_stream(&fam.collect::<Vec<_>>())
    };
    ensure(stream() == stream(), || "guess family streams differ".into())?;
    let coll = || collision_instance(&compiled("toyhash6to3").template).0.to_dimacs();
    ensure(coll() == coll(), || "collision instances differ".into())?;
    let solver = EstimateSolver::Embedded(SolverConfig {
        budget: Budget::propagations(200_000),
        ..Default::default()
    });
    let est = || format!("{:?}", estimate_gd(t, &[1, 2, 3, 4, 5, 6], 40, &solver, 9).unwrap());
    ensure(est() == est(), || "estimates differ".into())?;
    Ok("encode, instantiate and estimate repeat byte-identically".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("UP-completeness on the corpus", up_completeness),
        ("preimage round-trip and unreachable outputs", round_trip),
        ("parsimony of output-bound instances", parsimony),
        ("collision instances", collisions),
        ("LFSR template structure", lfsr_structure),
        ("encoding size ballpark", size_ballpark),
        ("Geffe known-keystream inversion", geffe_inversion),
        ("table minimization equivalence", minimization),
        ("switching variables and mu", switching),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (label, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {label}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {label}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
