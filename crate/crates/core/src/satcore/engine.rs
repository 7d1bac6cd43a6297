use std::time::Instant;

use crate::cnf::Cnf;

use super::{Assignment, Branching, Reason, SolveResult, SolverConfig, Stats};

fn idx(l: i32) -> usize {
    (l.unsigned_abs() as usize) << 1 | (l < 0) as usize
}

struct Level {
    trail_pos: usize,
    lit: i32,
    flipped: bool,
}

pub(super) struct Engine {
    /// Literals of all clauses back to back; clause `i` is
    /// `lits[start[i]..start[i + 1]]`.
    lits: Vec<i32>,
    start: Vec<usize>,
    units: Vec<usize>,
    /// Clauses watching a literal, keyed by that literal.
    watches: Vec<Vec<usize>>,
    /// Per variable: 0 unassigned, 1 true, -1 false.
    value: Vec<i8>,
    reason: Vec<Reason>,
    trail: Vec<i32>,
    qhead: usize,
    levels: Vec<Level>,
    activity: Vec<f64>,
    bump: f64,
    pub(super) stats: Stats,
}

impl Engine {
    pub(super) fn new(cnf: &Cnf) -> Self {
        let n = cnf.num_vars as usize;
        let mut watches = vec![Vec::new(); 2 * n + 2];
        let mut units = Vec::new();
        let mut lits = Vec::with_capacity(cnf.num_literals());
        let mut start = Vec::with_capacity(cnf.clauses.len() + 1);
        for (i, c) in cnf.clauses.iter().map(|c| c.lits()).enumerate() {
            start.push(lits.len());
            lits.extend_from_slice(c);
            if c.len() == 1 {
                units.push(i);
            } else {
                watches[idx(c[0])].push(i);
                watches[idx(c[1])].push(i);
            }
        }
        start.push(lits.len());
        Engine {
            lits,
            start,
            units,
            watches,
            value: vec![0; n + 1],
            reason: vec![Reason::Decision; n + 1],
            trail: Vec::new(),
            qhead: 0,
            levels: Vec::new(),
            activity: vec![0.0; n + 1],
            bump: 1.0,
            stats: Stats::default(),
        }
    }

    fn lit_val(value: &[i8], l: i32) -> i8 {
        let v = value[l.unsigned_abs() as usize];
        if l < 0 {
            -v
        } else {
            v
        }
    }

    fn enqueue(&mut self, l: i32, r: Reason) {
        let v = l.unsigned_abs() as usize;
        self.value[v] = if l > 0 { 1 } else { -1 };
        self.reason[v] = r;
        self.trail.push(l);
    }

    /// Assumptions, unit clauses, then propagation. `Err` carries the
    /// conflicting clause (`None` for clashing assumptions).
    pub(super) fn start(&mut self, assumptions: &[i32]) -> Result<(), Option<usize>> {
        for &a in assumptions {
            assert!(a != 0 && a.unsigned_abs() as usize <= self.value.len() - 1, "assumption out of range");
            match Self::lit_val(&self.value, a) {
                1 => {}
                -1 => return Err(None),
                _ => self.enqueue(a, Reason::Assumption),
            }
        }
        for k in 0..self.units.len() {
            let ci = self.units[k];
            let l = self.lits[self.start[ci]];
            match Self::lit_val(&self.value, l) {
                1 => {}
                -1 => return Err(Some(ci)),
                _ => self.enqueue(l, Reason::Propagated(ci)),
            }
        }
        match self.propagate() {
            Some(c) => Err(Some(c)),
            None => Ok(()),
        }
    }

    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = -p;
            let mut ws = std::mem::take(&mut self.watches[idx(false_lit)]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let c = &mut self.lits[self.start[ci]..self.start[ci + 1]];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                if Self::lit_val(&self.value, c[0]) == 1 {
                    ws[j] = ci;
                    j += 1;
                    continue;
                }
                if let Some(k) = (2..c.len()).find(|&k| Self::lit_val(&self.value, c[k]) != -1) {
                    c.swap(1, k);
                    self.watches[idx(c[1])].push(ci);
                    continue;
                }
                ws[j] = ci;
                j += 1;
                let first = c[0];
                if Self::lit_val(&self.value, first) == -1 {
                    conflict = Some(ci);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                    break;
                }
                self.enqueue(first, Reason::Propagated(ci));
            }
            ws.truncate(j);
            self.watches[idx(false_lit)] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    pub(super) fn assignment(&self) -> Assignment {
        let values = self
            .value
            .iter()
            .enumerate()
            .map(|(v, &x)| if v == 0 || x == 0 { None } else { Some(x > 0) })
            .collect();
        let trail = self
            .trail
            .iter()
            .map(|&l| (l, self.reason[l.unsigned_abs() as usize]))
            .collect();
        Assignment { values, trail }
    }

    fn undo(&mut self, pos: usize) {
        for &l in &self.trail[pos..] {
            self.value[l.unsigned_abs() as usize] = 0;
        }
        self.trail.truncate(pos);
        self.qhead = pos;
    }

    fn pick(&self, branching: Branching) -> Option<u32> {
        let free = (1..self.value.len()).filter(|&v| self.value[v] == 0);
        match branching {
            Branching::Fixed => free.map(|v| v as u32).next(),
            Branching::Vsids => free
                .max_by(|&a, &b| self.activity[a].total_cmp(&self.activity[b]).then(b.cmp(&a)))
                .map(|v| v as u32),
        }
    }

    fn bump_clause(&mut self, ci: usize) {
        for &l in &self.lits[self.start[ci]..self.start[ci + 1]] {
            self.activity[l.unsigned_abs() as usize] += self.bump;
        }
        self.bump /= 0.95;
        if self.bump > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.bump *= 1e-100;
        }
    }

    /// Chronological DPLL from a conflict-free level-0 fixpoint.
    pub(super) fn search(&mut self, config: &SolverConfig) -> SolveResult {
        let started = Instant::now();
        let budget = config.budget;
        loop {
            if let Some(ci) = self.propagate() {
                self.stats.conflicts += 1;
                if config.branching == Branching::Vsids {
                    self.bump_clause(ci);
                }
                loop {
                    match self.levels.last_mut() {
                        None => return SolveResult::Unsat,
                        Some(top) if top.flipped => {
                            let pos = top.trail_pos;
                            self.levels.pop();
                            self.undo(pos);
                        }
                        Some(top) => {
                            top.flipped = true;
                            let (pos, lit) = (top.trail_pos, top.lit);
                            self.undo(pos);
                            self.enqueue(-lit, Reason::Decision);
                            break;
                        }
                    }
                }
                if budget.conflicts.is_some_and(|m| self.stats.conflicts >= m) {
                    return SolveResult::Unknown;
                }
            }
            if budget.propagations.is_some_and(|m| self.stats.propagations >= m)
                || budget.time.is_some_and(|t| started.elapsed() >= t)
            {
                return SolveResult::Unknown;
            }
            if self.qhead < self.trail.len() {
                continue;
            }
            let Some(v) = self.pick(config.branching) else {
                let model = self.value.iter().map(|&x| x > 0).collect();
                return SolveResult::Sat(model);
            };
            self.stats.decisions += 1;
            let lit = -(v as i32);
            self.levels.push(Level {
                trail_pos: self.trail.len(),
                lit,
                flipped: false,
            });
            self.enqueue(lit, Reason::Decision);
        }
    }
}
