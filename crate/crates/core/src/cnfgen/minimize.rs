//! Two-level minimization of `v <-> phi(x_1..x_k)` with Quine-McCluskey
//! prime generation and a greedy cover.
//!
//! Clause variables are numbered locally: `1..=k` for the table inputs
//! (input `i` of the table is variable `i + 1`) and `k + 1` for `v`.

use std::collections::{BTreeSet, HashSet};

use crate::symex::TruthTable;

/// Largest arity handled by Quine-McCluskey; wider tables use one clause per row.
pub const QM_MAX_ARITY: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("truth table arity {0} out of range 1..=16")]
pub struct ArityError(pub usize);

/// A product term: bits in `mask` are free, the others must equal `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    pub value: u32,
    pub mask: u32,
}

impl Cube {
    pub fn covers(&self, minterm: u32) -> bool {
        (minterm & !self.mask) == self.value
    }

    pub fn literals(&self, k: usize) -> usize {
        k - self.mask.count_ones() as usize
    }

    fn minterms(&self, k: usize) -> impl Iterator<Item = u32> + '_ {
        let free: Vec<u32> = (0..k as u32).filter(|i| self.mask >> i & 1 == 1).collect();
        (0..1u32 << free.len()).map(move |sub| {
            let mut m = self.value;
            for (j, &bit) in free.iter().enumerate() {
                if sub >> j & 1 == 1 {
                    m |= 1 << bit;
                }
            }
            m
        })
    }
}

/// All prime implicants of the function whose on-set is `on`.
pub fn prime_implicants(on: &[u32], k: usize) -> Vec<Cube> {
    let mut level: BTreeSet<Cube> = on.iter().map(|&m| Cube { value: m, mask: 0 }).collect();
    let mut primes = Vec::new();
    while !level.is_empty() {
        let lookup: HashSet<Cube> = level.iter().copied().collect();
        let mut merged: HashSet<Cube> = HashSet::new();
        let mut next = BTreeSet::new();
        for c in &level {
            for i in 0..k as u32 {
                let bit = 1 << i;
                if c.mask & bit != 0 || c.value & bit != 0 {
                    continue;
                }
                let partner = Cube {
                    value: c.value | bit,
                    mask: c.mask,
                };
                if lookup.contains(&partner) {
                    merged.insert(*c);
                    merged.insert(partner);
                    next.insert(Cube {
                        value: c.value,
                        mask: c.mask | bit,
                    });
                }
            }
        }
        primes.extend(level.iter().filter(|c| !merged.contains(c)).copied());
        level = next;
    }
    primes.sort();
    primes
}

/// Selects primes covering every minterm of `on`: essential primes first,
/// then greedily the prime covering most uncovered minterms (fewest literals,
/// then smallest cube on ties).
pub fn cover(primes: &[Cube], on: &[u32], k: usize) -> Vec<Cube> {
    let n = 1usize << k;
    let mut covering: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut is_on = vec![false; n];
    for &m in on {
        is_on[m as usize] = true;
    }
    let lists: Vec<Vec<u32>> = primes
        .iter()
        .map(|p| p.minterms(k).filter(|&m| is_on[m as usize]).collect())
        .collect();
    for (pi, ms) in lists.iter().enumerate() {
        for &m in ms {
            covering[m as usize].push(pi);
        }
    }
    let mut uncovered = is_on.clone();
    let mut left = on.len();
    let mut chosen = Vec::new();
    let mut taken = vec![false; primes.len()];
    let mut take = |pi: usize, uncovered: &mut Vec<bool>, left: &mut usize, chosen: &mut Vec<usize>| {
        if taken[pi] {
            return;
        }
        taken[pi] = true;
        chosen.push(pi);
        for &m in &lists[pi] {
            if uncovered[m as usize] {
                uncovered[m as usize] = false;
                *left -= 1;
            }
        }
    };
    for &m in on {
        if let [only] = covering[m as usize][..] {
            take(only, &mut uncovered, &mut left, &mut chosen);
        }
    }
    while left > 0 {
        let best = (0..primes.len())
            .filter(|&pi| !chosen.contains(&pi))
            .max_by(|&a, &b| {
                let ga = lists[a].iter().filter(|&&m| uncovered[m as usize]).count();
                let gb = lists[b].iter().filter(|&&m| uncovered[m as usize]).count();
                ga.cmp(&gb)
                    .then(primes[b].literals(k).cmp(&primes[a].literals(k)))
                    .then(primes[b].cmp(&primes[a]))
            })
            .expect("primes cover the on-set");
        take(best, &mut uncovered, &mut left, &mut chosen);
    }
    chosen.sort_unstable();
    chosen.into_iter().map(|pi| primes[pi]).collect()
}

/// Clause for `cube -> out_lit`: the negated cube literals plus `out_lit`.
fn implication(cube: &Cube, k: usize, out_lit: i32) -> Vec<i32> {
    let mut lits: Vec<i32> = (0..k)
        .filter(|&i| cube.mask >> i & 1 == 0)
        .map(|i| {
            let var = i as i32 + 1;
            if cube.value >> i & 1 == 1 {
                -var
            } else {
                var
            }
        })
        .collect();
    lits.push(out_lit);
    lits
}

/// One clause per row of the table: the row's assignment implies the value.
pub fn naive_clauses(tt: &TruthTable) -> Vec<Vec<i32>> {
    let k = tt.arity();
    let v = k as i32 + 1;
    (0..tt.rows() as u32)
        .map(|r| {
            let cube = Cube { value: r, mask: 0 };
            implication(&cube, k, if tt.get(r as usize) { v } else { -v })
        })
        .collect()
}

/// CNF for `v <-> phi` over local variables (see module docs).
pub fn minimize_table(tt: &TruthTable) -> Result<Vec<Vec<i32>>, ArityError> {
    let k = tt.arity();
    if k == 0 || k > TruthTable::MAX_ARITY {
        return Err(ArityError(k));
    }
    if k > QM_MAX_ARITY {
        return Ok(naive_clauses(tt));
    }
    let v = k as i32 + 1;
    let (on, off): (Vec<u32>, Vec<u32>) = (0..tt.rows() as u32).partition(|&r| tt.get(r as usize));
    let mut clauses = Vec::new();
    // Implicants of phi force v, implicants of !phi force !v.
    for (set, lit) in [(&on, v), (&off, -v)] {
        if set.is_empty() {
            continue;
        }
        let primes = prime_implicants(set, k);
        for c in cover(&primes, set, k) {
            clauses.push(implication(&c, k, lit));
        }
    }
    Ok(clauses)
}
