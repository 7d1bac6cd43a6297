//! Symbolic execution: turns a resolved program into a Boolean formula DAG.

pub mod arith;
pub mod exec;
pub mod store;

pub use arith::{bitvec_arith, ArithOp, CmpOp};
pub use exec::{execute, merge_conditional, Encoding, NamedBits, MAX_LOOP_ITERATIONS};
pub use store::{BitRef, FormulaNode, NodeError, NodeId, NodeKind, NodeStore, TruthTable};
