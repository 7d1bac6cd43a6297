//! A small embedded SAT core: unit propagation, chronological DPLL with two
//! watched literals, model enumeration and a bridge to external solvers.
//!
//! There is no clause learning. A CDCL engine would slot in behind
//! [`solve`] by replacing the chronological backtracking in `Engine::search`.

mod engine;
pub mod external;

use std::time::Duration;

use crate::cnf::Cnf;

use engine::Engine;
pub use external::{external_solve, parse_solver_output, ExternalError};

/// Why a variable is on the trail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    Decision,
    /// Forced by the clause with this index in the input CNF.
    Propagated(usize),
    Assumption,
}

/// Partial assignment with its trail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    /// Indexed by variable; index 0 is unused.
    pub values: Vec<Option<bool>>,
    pub trail: Vec<(i32, Reason)>,
}

impl Assignment {
    pub fn value(&self, var: u32) -> Option<bool> {
        self.values.get(var as usize).copied().flatten()
    }

    pub fn lit_value(&self, lit: i32) -> Option<bool> {
        self.value(lit.unsigned_abs()).map(|v| v == (lit > 0))
    }

    pub fn num_assigned(&self) -> usize {
        self.trail.len()
    }

    /// Every variable `1..=num_vars` has a value.
    pub fn is_total(&self) -> bool {
        self.values.iter().skip(1).all(Option::is_some)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UpResult {
    Fixpoint(Assignment),
    /// The falsified clause, or `None` when the assumptions contradict each
    /// other.
    Conflict(Option<usize>),
}

impl UpResult {
    pub fn fixpoint(&self) -> Option<&Assignment> {
        match self {
            UpResult::Fixpoint(a) => Some(a),
            UpResult::Conflict(_) => None,
        }
    }
}

/// Unit propagation to the least fixpoint of `cnf` plus the assumption
/// literals.
pub fn unit_propagate(cnf: &Cnf, assumptions: &[i32]) -> UpResult {
    let mut e = Engine::new(cnf);
    match e.start(assumptions) {
        Err(c) => UpResult::Conflict(c),
        Ok(()) => UpResult::Fixpoint(e.assignment()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branching {
    /// Lowest unassigned variable first.
    Fixed,
    /// Highest conflict activity first, ties to the lowest variable.
    #[default]
    Vsids,
}

/// Limits on a search; `None` means unlimited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Budget {
    pub conflicts: Option<u64>,
    pub propagations: Option<u64>,
    pub time: Option<Duration>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn conflicts(n: u64) -> Self {
        Budget {
            conflicts: Some(n),
            ..Budget::default()
        }
    }

    pub fn propagations(n: u64) -> Self {
        Budget {
            propagations: Some(n),
            ..Budget::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverConfig {
    pub branching: Branching,
    pub budget: Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct Stats {
    pub decisions: u64,
    pub conflicts: u64,
    /// Trail literals processed by propagation; the deterministic cost unit.
    pub propagations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    /// A total model indexed by variable (index 0 unused).
    Sat(Vec<bool>),
    Unsat,
    /// The budget ran out.
    Unknown,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn model(&self) -> Option<&[bool]> {
        match self {
            SolveResult::Sat(m) => Some(m),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solved {
    pub result: SolveResult,
    pub stats: Stats,
}

/// DPLL search under `assumptions`.
///
/// # Panics
/// If a model found by the search fails to satisfy `cnf` or the assumptions.
pub fn solve(cnf: &Cnf, assumptions: &[i32], config: &SolverConfig) -> Solved {
    let mut e = Engine::new(cnf);
    let result = match e.start(assumptions) {
        Err(_) => SolveResult::Unsat,
        Ok(()) => e.search(config),
    };
    if let SolveResult::Sat(m) = &result {
        assert!(cnf.satisfied_by(m), "solver returned a non-model");
        assert!(
            assumptions.iter().all(|&l| m[l.unsigned_abs() as usize] == (l > 0)),
            "solver model violates an assumption"
        );
    }
    Solved {
        result,
        stats: e.stats,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    /// Total models in discovery order.
    pub models: Vec<Vec<bool>>,
    /// More models exist beyond the cap.
    pub truncated: bool,
    /// The search budget ran out before enumeration finished.
    pub incomplete: bool,
}

/// Models of `cnf` that differ on `projection` (all variables when `None`),
/// at most `cap` of them. Each found model is excluded by a blocking clause
/// over the projection.
///
/// # Panics
/// If `cap` is zero or a projection variable is out of range.
pub fn enumerate_models(cnf: &Cnf, projection: Option<&[u32]>, cap: usize, config: &SolverConfig) -> Enumeration {
    assert!(cap >= 1, "cap must be positive");
    let proj: Vec<u32> = match projection {
        Some(p) => p.to_vec(),
        None => (1..=cnf.num_vars).collect(),
    };
    assert!(proj.iter().all(|&v| v >= 1 && v <= cnf.num_vars), "projection variable out of range");
    let mut work = cnf.clone();
    let mut models = Vec::new();
    loop {
        let s = solve(&work, &[], config);
        match s.result {
            SolveResult::Unsat => {
                return Enumeration {
                    models,
                    truncated: false,
                    incomplete: false,
                }
            }
            SolveResult::Unknown => {
                return Enumeration {
                    models,
                    truncated: false,
                    incomplete: true,
                }
            }
            SolveResult::Sat(m) => {
                if models.len() == cap {
                    return Enumeration {
                        models,
                        truncated: true,
                        incomplete: false,
                    };
                }
                if proj.is_empty() {
                    models.push(m);
                    return Enumeration {
                        models,
                        truncated: false,
                        incomplete: false,
                    };
                }
                work.add(proj.iter().map(|&v| if m[v as usize] { -(v as i32) } else { v as i32 }).collect());
                models.push(m);
            }
        }
    }
}
