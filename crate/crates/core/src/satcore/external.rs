//! Running a SAT-competition style solver as a subprocess.

use std::io::Write;
use std::process::Command;

use crate::cnf::Cnf;
use crate::cnfgen::dimacs::parse_clauses;

use super::SolveResult;

#[derive(Debug, thiserror::Error)]
pub enum ExternalError {
    #[error("cannot run solver `{command}`: {message}")]
    Spawn { command: String, message: String },
    #[error("unparseable solver output: {0}")]
    Unparseable(String),
    #[error("solver model fails verification: {0}")]
    Verification(String),
    #[error("invalid DIMACS input: {0}")]
    Input(String),
}

/// Interprets `s` and `v` lines. Variables missing from the `v` lines are
/// false. The model is not checked here.
pub fn parse_solver_output(stdout: &str, num_vars: u32) -> Result<SolveResult, ExternalError> {
    let mut status = None;
    let mut lits = Vec::new();
    for line in stdout.lines() {
        let line = line.trim();
        if let Some(s) = line.strip_prefix("s ") {
            status = Some(match s.trim() {
                "SATISFIABLE" => 10,
                "UNSATISFIABLE" => 20,
                "UNKNOWN" => 0,
                other => return Err(ExternalError::Unparseable(format!("unknown status `{other}`"))),
            });
        } else if let Some(v) = line.strip_prefix("v ").or_else(|| (line == "v").then_some("")) {
            for w in v.split_whitespace() {
                let l: i64 = w
                    .parse()
                    .map_err(|_| ExternalError::Unparseable(format!("bad value literal `{w}`")))?;
                if l != 0 {
                    lits.push(l);
                }
            }
        }
    }
    match status {
        None => Err(ExternalError::Unparseable("no status line".into())),
        Some(20) => Ok(SolveResult::Unsat),
        Some(0) => Ok(SolveResult::Unknown),
        _ => {
            if lits.is_empty() && num_vars > 0 {
                return Err(ExternalError::Unparseable("SAT answer without value lines".into()));
            }
            let mut model = vec![false; num_vars as usize + 1];
            for l in lits {
                let v = l.unsigned_abs();
                if v == 0 || v > num_vars as u64 {
                    return Err(ExternalError::Verification(format!("value for unknown variable {v}")));
                }
                model[v as usize] = l > 0;
            }
            Ok(SolveResult::Sat(model))
        }
    }
}

/// Writes `dimacs` to a temporary file, runs `command <file>` (the command
/// string is split on whitespace) and checks any model against the formula.
pub fn external_solve(dimacs: &str, command: &str) -> Result<SolveResult, ExternalError> {
    let (declared, clauses) = parse_clauses(dimacs).map_err(|e| ExternalError::Input(e.to_string()))?;
    let mut cnf = Cnf::new(declared.unwrap_or(0));
    for c in clauses {
        cnf.num_vars = cnf.num_vars.max(c.max_var());
        cnf.clauses.push(c);
    }
    let mut parts = command.split_whitespace();
    let program = parts.next().ok_or_else(|| ExternalError::Spawn {
        command: command.into(),
        message: "empty command".into(),
    })?;
    let spawn_err = |message: String| ExternalError::Spawn {
        command: command.into(),
        message,
    };
    let mut file = tempfile::Builder::new()
        .suffix(".cnf")
        .tempfile()
        .map_err(|e| spawn_err(e.to_string()))?;
    file.write_all(dimacs.as_bytes()).map_err(|e| spawn_err(e.to_string()))?;
    file.flush().map_err(|e| spawn_err(e.to_string()))?;
    let out = Command::new(program)
        .args(parts)
        .arg(file.path())
        .output()
        .map_err(|e| spawn_err(e.to_string()))?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let result = parse_solver_output(&stdout, cnf.num_vars).map_err(|e| match e {
        ExternalError::Unparseable(m) if !out.status.success() => {
            ExternalError::Unparseable(format!("{m} (solver exited with {})", out.status))
        }
        e => e,
    })?;
    if let SolveResult::Sat(m) = &result {
        if let Some(c) = cnf.clauses.iter().find(|c| !c.satisfied_by(m)) {
            return Err(ExternalError::Verification(format!("clause `{c}` is falsified")));
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sat_answer() {
        let r = parse_solver_output("c hi\ns SATISFIABLE\nv 1 -2\nv 3 0\n", 3).unwrap();
        assert_eq!(r, SolveResult::Sat(vec![false, true, false, true]));
        assert_eq!(parse_solver_output("s UNSATISFIABLE\n", 3).unwrap(), SolveResult::Unsat);
        assert!(matches!(parse_solver_output("", 3), Err(ExternalError::Unparseable(_))));
    }

    #[test]
    fn missing_program() {
        let e = external_solve("p cnf 1 1\n1 0\n", "/nonexistent/solver-binary").unwrap_err();
        assert!(matches!(e, ExternalError::Spawn { .. }));
    }
}
