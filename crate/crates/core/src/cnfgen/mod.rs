//! From formula DAG to template CNF: pruning, table fusion, Tseitin
//! clauses, DIMACS and AIGER output.

pub mod aiger;
pub mod dimacs;
pub mod fuse;
pub mod minimize;
pub mod prune;
pub mod tseitin;

use std::collections::BTreeMap;
use std::fmt;

use crate::cnf::Cnf;
use crate::symex::{Encoding, NodeId};

pub use aiger::{simulate_aiger, to_aiger, AigerError};
pub use dimacs::{parse_template, to_dimacs, TemplateParseError};
pub use fuse::{fuse_tables, DEFAULT_MAX_ARITY};
pub use minimize::{minimize_table, naive_clauses};
pub use prune::prune;
pub use tseitin::tseitin;

/// One entry of a `core_vars` record: a literal or a constant bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoreLit {
    Lit(i32),
    Const(bool),
}

impl fmt::Display for CoreLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreLit::Lit(l) => write!(f, "{l}"),
            CoreLit::Const(true) => f.write_str("+0"),
            CoreLit::Const(false) => f.write_str("-0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreRecord {
    pub label: String,
    pub lits: Vec<CoreLit>,
}

/// CNF encoding of a program with free input and output variables.
///
/// Inputs are variables `1..=n` in declaration order and outputs are the
/// last `m` variables. Instances built on top of a template keep this layout
/// and add clauses, variables and header lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateCnf {
    pub cnf: Cnf,
    pub inputs: Vec<u32>,
    pub outputs: Vec<u32>,
    pub core: Vec<CoreRecord>,
    /// Declared inputs that no clause mentions.
    pub unused_inputs: Vec<u32>,
    /// Node each variable was created for (not serialized).
    pub var_to_node: BTreeMap<u32, NodeId>,
    /// Additional header comment lines, without the leading `c `.
    pub extra_header: Vec<String>,
}

/// Size figures of an encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Metrics {
    pub vars: u32,
    pub clauses: usize,
    pub literals: usize,
}

impl TemplateCnf {
    pub fn num_vars(&self) -> u32 {
        self.cnf.num_vars
    }

    pub fn metrics(&self) -> Metrics {
        Metrics {
            vars: self.cnf.num_vars,
            clauses: self.cnf.num_clauses(),
            literals: self.cnf.num_literals(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodeOptions {
    /// Largest table arity produced by fusion; below 2 disables fusion.
    pub max_arity: usize,
    /// Xor nodes with more children than this are split with fresh variables.
    pub xor_direct_max: usize,
    /// Add the two redundant clauses of the if-then-else encoding.
    pub ite_redundant: bool,
    /// Upper bound on the number of variables.
    pub var_budget: u32,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            max_arity: DEFAULT_MAX_ARITY,
            xor_direct_max: 3,
            ite_redundant: false,
            var_budget: 1 << 26,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("encoding needs {needed} variables, more than the budget of {budget}")]
    VarBudget { needed: u64, budget: u32 },
    #[error("invalid option: {0}")]
    Option(String),
}

/// Prunes, fuses and converts an encoding into a template.
pub fn encode(enc: &Encoding, opts: &EncodeOptions) -> Result<TemplateCnf, EncodeError> {
    if opts.max_arity > minimize::QM_MAX_ARITY {
        return Err(EncodeError::Option(format!(
            "table arity {} exceeds {}",
            opts.max_arity,
            minimize::QM_MAX_ARITY
        )));
    }
    if opts.xor_direct_max < 2 {
        return Err(EncodeError::Option("xor threshold must be at least 2".into()));
    }
    let live = prune(enc);
    let fused = fuse_tables(enc, &live, opts.max_arity);
    let live = prune(&fused);
    tseitin(&fused, &live, opts)
}
