//! The encoder against the reference interpreter on every shipped program:
//! exhaustive for up to 12 input bits, 1000 seeded random inputs otherwise.
//! Both the formula DAG and unit propagation on the template are checked.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tencoder::cnfgen::EncodeOptions;
use tencoder::corpus::PROGRAMS;
use tencoder::frontend::SourceProgram;
use tencoder::pipeline::{build, propagate_input};
use tencoder::refinterp::interpret;

fn inputs(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<bool>> {
    if n <= 12 {
        (0..1u32 << n).map(|v| (0..n).map(|i| v >> i & 1 == 1).collect()).collect()
    } else {
        (0..1000).map(|_| (0..n).map(|_| rng.gen()).collect()).collect()
    }
}

fn check(name: &str) {
    let src = PROGRAMS.iter().find(|(n, _)| *n == name).unwrap().1;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c = build(&SourceProgram::new(src, name), &BTreeMap::new(), &EncodeOptions::default())
        .unwrap_or_else(|e| panic!("{name}: {e}"));
    let t = &c.template;
    assert_eq!(c.encoding.num_inputs(), c.resolved.input_width(), "{name}");
    assert_eq!(c.encoding.num_outputs(), c.resolved.output_width(), "{name}");
    for x in inputs(t.inputs.len(), &mut rng) {
        let want = interpret(&c.resolved, &x).unwrap().outputs;
        assert_eq!(c.encoding.eval_outputs(&x), want, "{name}: DAG");
        let up = propagate_input(t, &x);
        let a = up.fixpoint().unwrap_or_else(|| panic!("{name}: conflict"));
        assert!(a.is_total(), "{name}: unassigned variables");
        let got: Vec<bool> = t.outputs.iter().map(|&v| a.value(v).unwrap()).collect();
        assert_eq!(got, want, "{name}: propagation");
    }
}

macro_rules! oracle {
    ($($name:ident),* $(,)?) => {
        $(#[test]
        fn $name() {
            check(stringify!($name));
        })*

        #[test]
        fn every_program_is_covered() {
            let covered = [$(stringify!($name)),*];
            for (name, _) in PROGRAMS {
                assert!(covered.contains(name), "{name} has no oracle test");
            }
        }
    };
}

oracle!(lfsr19, geffe_small, s_geffe160, wolfram128, bivium, grain_v1, toyhash6to3, adder4, mul4, perm6);
