use tencoder::cnfgen::{encode, EncodeOptions};
use tencoder::corpus::PROGRAMS;
use tencoder::frontend::{compile, SourceProgram};
use tencoder::symex::execute;

fn main() {
    let arity: usize = std::env::args().nth(1).map(|a| a.parse().unwrap()).unwrap_or(8);
    for (name, src) in PROGRAMS {
        let r = compile(&SourceProgram::new(*src, *name)).unwrap();
        let enc = execute(&r).unwrap();
        let t = std::time::Instant::now();
        let opts = EncodeOptions { max_arity: arity, ..Default::default() };
        let tpl = encode(&enc, &opts).unwrap();
        let m = tpl.metrics();
        println!("{name:12} vars={:6} clauses={:7} lits={:8} ({:?})", m.vars, m.clauses, m.literals, t.elapsed());
    }
}
