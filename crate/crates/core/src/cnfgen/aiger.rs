//! ASCII AIGER export of pure circuits and a small simulator for it.

use std::collections::HashMap;
use std::fmt::Write;

use crate::symex::{BitRef, Encoding, NodeKind};

use super::prune;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AigerError {
    #[error("AIGER export requires a pure circuit (the program has assertions)")]
    Assertions,
    #[error("AIGER export requires a pure circuit (table nodes present)")]
    Tables,
    #[error("malformed AIGER: {0}")]
    Parse(String),
    #[error("expected {expected} input bits, got {got}")]
    InputLength { expected: usize, got: usize },
}

struct Aig {
    num_inputs: u32,
    ands: Vec<(u32, u32, u32)>,
    strash: HashMap<(u32, u32), u32>,
}

impl Aig {
    fn and(&mut self, a: u32, b: u32) -> u32 {
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        if lo == 0 {
            return 0;
        }
        if lo == 1 {
            return hi;
        }
        if hi == lo {
            return hi;
        }
        if hi == lo ^ 1 {
            return 0;
        }
        if let Some(&l) = self.strash.get(&(hi, lo)) {
            return l;
        }
        let lhs = 2 * (self.num_inputs + self.ands.len() as u32 + 1);
        self.ands.push((lhs, hi, lo));
        self.strash.insert((hi, lo), lhs);
        lhs
    }

    fn or(&mut self, a: u32, b: u32) -> u32 {
        self.and(a ^ 1, b ^ 1) ^ 1
    }

    fn xor(&mut self, a: u32, b: u32) -> u32 {
        let both = self.and(a, b);
        let neither = self.and(a ^ 1, b ^ 1);
        self.and(both ^ 1, neither ^ 1)
    }
}

/// Lowers the live part of `enc` to an and-inverter graph.
pub fn to_aiger(enc: &Encoding) -> Result<String, AigerError> {
    if enc.asserts.iter().any(|&a| a != BitRef::ONE) {
        return Err(AigerError::Assertions);
    }
    let live = prune(enc);
    let store = &enc.store;
    let mut aig = Aig {
        num_inputs: enc.inputs.len() as u32,
        ands: Vec::new(),
        strash: HashMap::new(),
    };
    let mut lit = vec![0u32; store.len()];
    for (id, n) in store.nodes() {
        if !live[id.index()] {
            continue;
        }
        let cs: Vec<u32> = n.children.iter().map(|c| lit[c.index()]).collect();
        lit[id.index()] = match n.kind {
            NodeKind::Input(i) => 2 * (i + 1),
            NodeKind::Not => cs[0] ^ 1,
            NodeKind::And => cs.iter().fold(1, |acc, &c| aig.and(acc, c)),
            NodeKind::Or => cs.iter().fold(0, |acc, &c| aig.or(acc, c)),
            NodeKind::Xor => cs.iter().fold(0, |acc, &c| aig.xor(acc, c)),
            NodeKind::Ite => {
                let t = aig.and(cs[0], cs[1]);
                let e = aig.and(cs[0] ^ 1, cs[2]);
                aig.or(t, e)
            }
            NodeKind::Table => return Err(AigerError::Tables),
        };
    }
    let outs: Vec<u32> = enc
        .outputs
        .iter()
        .map(|r| match r {
            BitRef::Const(b) => *b as u32,
            BitRef::Node(n) => lit[n.index()],
        })
        .collect();
    let i = aig.num_inputs;
    let a = aig.ands.len() as u32;
    let mut s = String::new();
    let _ = writeln!(s, "aag {} {} 0 {} {}", i + a, i, outs.len(), a);
    for k in 1..=i {
        let _ = writeln!(s, "{}", 2 * k);
    }
    for o in &outs {
        let _ = writeln!(s, "{o}");
    }
    for (lhs, r0, r1) in &aig.ands {
        let _ = writeln!(s, "{lhs} {r0} {r1}");
    }
    Ok(s)
}

/// Evaluates an ASCII AIGER circuit without latches on one input vector.
pub fn simulate_aiger(text: &str, input: &[bool]) -> Result<Vec<bool>, AigerError> {
    let bad = |m: &str| AigerError::Parse(m.to_string());
    let mut lines = text.lines();
    let header: Vec<u32> = lines
        .next()
        .and_then(|h| h.strip_prefix("aag "))
        .ok_or_else(|| bad("missing aag header"))?
        .split_whitespace()
        .map(|w| w.parse().map_err(|_| bad("bad header number")))
        .collect::<Result<_, _>>()?;
    let [m, i, l, o, a] = header[..] else {
        return Err(bad("header needs five numbers"));
    };
    if l != 0 {
        return Err(bad("latches are not supported"));
    }
    if input.len() != i as usize {
        return Err(AigerError::InputLength {
            expected: i as usize,
            got: input.len(),
        });
    }
    let mut next_nums = |count: u32, width: usize| -> Result<Vec<Vec<u32>>, AigerError> {
        (0..count)
            .map(|_| {
                let line = lines.next().ok_or_else(|| bad("truncated file"))?;
                let nums: Vec<u32> = line
                    .split_whitespace()
                    .map(|w| w.parse().map_err(|_| bad("bad literal")))
                    .collect::<Result<_, _>>()?;
                if nums.len() != width {
                    return Err(bad("wrong number of literals on a line"));
                }
                Ok(nums)
            })
            .collect()
    };
    let ins = next_nums(i, 1)?;
    let outs = next_nums(o, 1)?;
    let mut ands = next_nums(a, 3)?;
    ands.sort_by_key(|g| g[0]);
    let mut val = vec![false; m as usize + 1];
    for (k, lit) in ins.iter().enumerate() {
        val[(lit[0] / 2) as usize] = input[k];
    }
    let get = |val: &[bool], lit: u32| -> bool { val[(lit / 2) as usize] ^ (lit & 1 == 1) };
    for g in &ands {
        val[(g[0] / 2) as usize] = get(&val, g[1]) && get(&val, g[2]);
    }
    Ok(outs.iter().map(|lit| get(&val, lit[0])).collect())
}
