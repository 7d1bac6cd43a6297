//! Translation of bit-level algorithm descriptions into CNF templates, and
//! the tooling around them: instance construction, a small DPLL solver and
//! guess-and-determine estimation.

pub mod cnf;
pub mod cnfgen;
pub mod corpus;
pub mod frontend;
pub mod instance;
pub mod pipeline;
pub mod refinterp;
pub mod satcore;
pub mod symex;
