//! DIMACS text with the template comment header.

use std::collections::BTreeMap;

use crate::cnf::{Clause, Cnf};

use super::{CoreLit, CoreRecord, TemplateCnf};

pub const MAGIC: &str = "t-encoding v1";

fn join(vars: impl Iterator<Item = String>) -> String {
    vars.collect::<Vec<_>>().join(" ")
}

fn header_line(out: &mut String, key: &str, rest: &str) {
    out.push_str("c ");
    out.push_str(key);
    if !rest.is_empty() {
        out.push(' ');
        out.push_str(rest);
    }
    out.push('\n');
}

/// Serializes a template (or an instance built on one).
pub fn to_dimacs(t: &TemplateCnf) -> String {
    let mut s = String::new();
    s.push_str("c ");
    s.push_str(MAGIC);
    s.push('\n');
    header_line(&mut s, "input", &join(t.inputs.iter().map(u32::to_string)));
    header_line(&mut s, "output", &join(t.outputs.iter().map(u32::to_string)));
    for c in &t.core {
        let rest = format!("{} {}", c.label, join(c.lits.iter().map(CoreLit::to_string)));
        header_line(&mut s, "core", rest.trim_end());
    }
    if !t.unused_inputs.is_empty() {
        header_line(&mut s, "unused-input", &join(t.unused_inputs.iter().map(u32::to_string)));
    }
    for line in &t.extra_header {
        s.push_str("c ");
        s.push_str(line);
        s.push('\n');
    }
    s.push_str(&t.cnf.to_dimacs());
    s
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateParseError {
    #[error("not a t-encoding template")]
    NotTemplate,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

fn syntax(line: usize, message: impl Into<String>) -> TemplateParseError {
    TemplateParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_vars(line: usize, words: &[&str]) -> Result<Vec<u32>, TemplateParseError> {
    words
        .iter()
        .map(|w| w.parse::<u32>().map_err(|_| syntax(line, format!("bad variable `{w}`"))))
        .collect()
}

/// Reads plain DIMACS clauses (after the `p cnf` line or without one).
/// Returns the declared variable count, if any, and the clauses.
pub fn parse_clauses(text: &str) -> Result<(Option<u32>, Vec<Clause>), TemplateParseError> {
    let mut declared = None;
    let mut clauses = Vec::new();
    let mut cur: Vec<i32> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p ") {
            let w: Vec<&str> = rest.split_whitespace().collect();
            if w.len() != 3 || w[0] != "cnf" {
                return Err(syntax(i + 1, "malformed problem line"));
            }
            declared = Some(w[1].parse().map_err(|_| syntax(i + 1, "bad variable count"))?);
            continue;
        }
        for w in line.split_whitespace() {
            let l: i32 = w.parse().map_err(|_| syntax(i + 1, format!("bad literal `{w}`")))?;
            if l == 0 {
                if cur.is_empty() {
                    return Err(syntax(i + 1, "empty clause"));
                }
                if let Some(c) = Clause::new(std::mem::take(&mut cur)) {
                    clauses.push(c);
                }
            } else {
                cur.push(l);
            }
        }
    }
    if !cur.is_empty() {
        return Err(syntax(text.lines().count(), "clause not terminated by 0"));
    }
    Ok((declared, clauses))
}

/// Parses text written by [`to_dimacs`]. Header lines other than the
/// template schema end up in `extra_header`.
pub fn parse_template(text: &str) -> Result<TemplateCnf, TemplateParseError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == format!("c {MAGIC}") => {}
        _ => return Err(TemplateParseError::NotTemplate),
    }
    let mut inputs = None;
    let mut outputs = None;
    let mut core = Vec::new();
    let mut unused = Vec::new();
    let mut extra = Vec::new();
    for (i, raw) in lines {
        let line = raw.trim();
        let Some(body) = line.strip_prefix('c') else { break };
        let body = body.trim_start();
        let words: Vec<&str> = body.split_whitespace().collect();
        match words.first().copied() {
            Some("input") => inputs = Some(parse_vars(i + 1, &words[1..])?),
            Some("output") => outputs = Some(parse_vars(i + 1, &words[1..])?),
            Some("unused-input") => unused = parse_vars(i + 1, &words[1..])?,
            Some("core") => {
                let label = words.get(1).ok_or_else(|| syntax(i + 1, "core record without label"))?;
                let lits = words[2..]
                    .iter()
                    .map(|w| match *w {
                        "+0" => Ok(CoreLit::Const(true)),
                        "-0" => Ok(CoreLit::Const(false)),
                        _ => w
                            .parse::<i32>()
                            .map(CoreLit::Lit)
                            .map_err(|_| syntax(i + 1, format!("bad core literal `{w}`"))),
                    })
                    .collect::<Result<_, _>>()?;
                core.push(CoreRecord {
                    label: label.to_string(),
                    lits,
                });
            }
            _ => extra.push(body.to_string()),
        }
    }
    let (declared, clauses) = parse_clauses(text)?;
    let num_vars = declared.ok_or_else(|| syntax(0, "missing `p cnf` line"))?;
    let mut cnf = Cnf::new(num_vars);
    cnf.clauses = clauses;
    if cnf.clauses.iter().any(|c| c.max_var() > num_vars) {
        return Err(syntax(0, "clause mentions a variable above the declared count"));
    }
    let inputs = inputs.ok_or_else(|| syntax(0, "missing `c input` line"))?;
    let outputs = outputs.ok_or_else(|| syntax(0, "missing `c output` line"))?;
    if inputs.iter().chain(&outputs).any(|&v| v == 0 || v > num_vars) {
        return Err(syntax(0, "input or output variable out of range"));
    }
    Ok(TemplateCnf {
        cnf,
        inputs,
        outputs,
        core,
        unused_inputs: unused,
        var_to_node: BTreeMap::new(),
        extra_header: extra,
    })
}
