//! Source text to template in one call.

use std::collections::BTreeMap;
use std::fmt;

use crate::cnfgen::{encode, EncodeError, EncodeOptions, TemplateCnf};
use crate::frontend::{compile_with, Diagnostic, Resolved, RuntimeError, SourceProgram};
use crate::satcore::{unit_propagate, UpResult};
use crate::symex::{execute, Encoding};

#[derive(Debug)]
pub struct Compiled {
    pub resolved: Resolved,
    pub encoding: Encoding,
    pub template: TemplateCnf,
}

#[derive(Debug)]
pub enum PipelineError {
    Frontend(Vec<Diagnostic>),
    Runtime(RuntimeError),
    Encode(EncodeError),
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Frontend(ds) => {
                for (i, d) in ds.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
            PipelineError::Runtime(e) => write!(f, "{e}"),
            PipelineError::Encode(e) => write!(f, "error: {e}"),
        }
    }
}

impl std::error::Error for PipelineError {}

/// Compiles, executes symbolically and encodes `src`.
pub fn build(
    src: &SourceProgram,
    defines: &BTreeMap<String, i64>,
    opts: &EncodeOptions,
) -> Result<Compiled, PipelineError> {
    let resolved = compile_with(src, defines).map_err(PipelineError::Frontend)?;
    let encoding = execute(&resolved).map_err(PipelineError::Runtime)?;
    let template = encode(&encoding, opts).map_err(PipelineError::Encode)?;
    Ok(Compiled {
        resolved,
        encoding,
        template,
    })
}

/// Unit propagation on the template with the inputs fixed to `x`.
///
/// # Panics
/// If `x` does not have one bit per input.
pub fn propagate_input(t: &TemplateCnf, x: &[bool]) -> UpResult {
    assert_eq!(x.len(), t.inputs.len(), "input length");
    // Assumptions propagate exactly like the unit clauses of `bind_input`.
    let lits: Vec<i32> = t
        .inputs
        .iter()
        .zip(x)
        .map(|(&v, &b)| if b { v as i32 } else { -(v as i32) })
        .collect();
    unit_propagate(&t.cnf, &lits)
}

/// Outputs computed by unit propagation, or `None` on a conflict or an
/// unassigned output.
pub fn forward_outputs(t: &TemplateCnf, x: &[bool]) -> Option<Vec<bool>> {
    let up = propagate_input(t, x);
    let a = up.fixpoint()?;
    t.outputs.iter().map(|&v| a.value(v)).collect()
}
