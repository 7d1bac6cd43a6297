//! Clause and formula containers shared by the encoder, the solver and the
//! instance layer. Literals use the DIMACS convention: variable `v` is `v`,
//! its negation `-v`, variables start at 1.

use std::fmt;

/// A normalized clause: literals sorted by variable, no duplicates, never a
/// tautology, never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause(Vec<i32>);

impl Clause {
    /// Normalizes `lits`. Returns `None` for tautologies.
    ///
    /// # Panics
    /// On an empty literal list or a zero literal.
    pub fn new(mut lits: Vec<i32>) -> Option<Clause> {
        assert!(!lits.is_empty(), "empty clause");
        assert!(lits.iter().all(|&l| l != 0), "zero literal");
        lits.sort_unstable_by_key(|&l| (l.unsigned_abs(), l > 0));
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == -w[1]) {
            return None;
        }
        Some(Clause(lits))
    }

    /// Builds a clause that is known to be normalized already.
    pub fn from_sorted(lits: Vec<i32>) -> Clause {
        debug_assert_eq!(Clause::new(lits.clone()).as_ref(), Some(&Clause(lits.clone())));
        Clause(lits)
    }

    pub fn unit(lit: i32) -> Clause {
        Clause(vec![lit])
    }

    pub fn lits(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_var(&self) -> u32 {
        self.0.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0)
    }

    /// Truth value under a total assignment indexed by variable (index 0 unused).
    pub fn satisfied_by(&self, model: &[bool]) -> bool {
        self.0.iter().any(|&l| model[l.unsigned_abs() as usize] == (l > 0))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l} ")?;
        }
        f.write_str("0")
    }
}

/// A CNF formula.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Clause>,
}

impl Cnf {
    pub fn new(num_vars: u32) -> Self {
        Cnf {
            num_vars,
            clauses: Vec::new(),
        }
    }

    /// Adds a clause after normalization; tautologies are dropped. Grows
    /// `num_vars` when the clause mentions a new variable.
    pub fn add(&mut self, lits: Vec<i32>) {
        if let Some(c) = Clause::new(lits) {
            self.num_vars = self.num_vars.max(c.max_var());
            self.clauses.push(c);
        }
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn num_literals(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    /// Whether a total assignment (index 0 unused) satisfies every clause.
    pub fn satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.satisfied_by(model))
    }

    /// Plain DIMACS text without any comment header.
    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            s.push_str(&c.to_string());
            s.push('\n');
        }
        s
    }
}
