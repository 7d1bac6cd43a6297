//! Concrete problems built from a template: fixed inputs or outputs,
//! collisions, guarded relaxation constraints and guessed-bit families.

mod estimate;
mod guess;

use crate::cnf::{Clause, Cnf};
use crate::cnfgen::{to_dimacs, TemplateCnf};
use crate::satcore::{unit_propagate, UpResult};

pub use estimate::{estimate_gd, Estimate, EstimateError, EstimateSolver, EPSILON_NOTE};
pub use guess::{guess_family, GuessFamily, GuessMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    InputBound,
    OutputBound,
    Collision,
    Relaxed,
    Guessed,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("expected {expected} bits, got {got}")]
    Length { expected: usize, got: usize },
    #[error("variable {0} is not in the template")]
    UnknownVariable(i64),
    #[error("variable {0} appears twice in the guessed set")]
    DuplicateVariable(u32),
    #[error("{0} guessed bits are too many for exhaustive mode (limit 30)")]
    TooManyGuesses(usize),
}

/// A template plus instance clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundInstance {
    pub base: TemplateCnf,
    pub extra: Vec<Clause>,
    /// Base variables plus fresh ones introduced by the instance.
    pub num_vars: u32,
    pub kind: InstanceKind,
    /// Header lines added on top of the template header, without `c `.
    pub header: Vec<String>,
}

pub fn bits_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn lit(var: u32, value: bool) -> i32 {
    if value {
        var as i32
    } else {
        -(var as i32)
    }
}

impl BoundInstance {
    fn new(base: &TemplateCnf, kind: InstanceKind) -> Self {
        BoundInstance {
            base: base.clone(),
            extra: Vec::new(),
            num_vars: base.num_vars(),
            kind,
            header: Vec::new(),
        }
    }

    fn push(&mut self, lits: Vec<i32>) {
        if let Some(c) = Clause::new(lits) {
            self.num_vars = self.num_vars.max(c.max_var());
            self.extra.push(c);
        }
    }

    /// Template clauses followed by the instance clauses.
    pub fn to_cnf(&self) -> Cnf {
        let mut cnf = self.base.cnf.clone();
        cnf.num_vars = self.num_vars;
        cnf.clauses.extend(self.extra.iter().cloned());
        cnf
    }

    /// The instance as a template-shaped formula, so that further
    /// constructions can be layered on it.
    pub fn to_template(&self) -> TemplateCnf {
        let mut t = self.base.clone();
        t.cnf = self.to_cnf();
        t.extra_header.extend(self.header.iter().cloned());
        t
    }

    pub fn to_dimacs(&self) -> String {
        to_dimacs(&self.to_template())
    }
}

fn check_len(expected: usize, got: usize) -> Result<(), InstanceError> {
    if expected == got {
        Ok(())
    } else {
        Err(InstanceError::Length { expected, got })
    }
}

/// Unit clauses fixing the inputs to `x`.
pub fn bind_input(t: &TemplateCnf, x: &[bool]) -> Result<BoundInstance, InstanceError> {
    check_len(t.inputs.len(), x.len())?;
    let mut inst = BoundInstance::new(t, InstanceKind::InputBound);
    for (&v, &b) in t.inputs.iter().zip(x) {
        inst.push(vec![lit(v, b)]);
    }
    inst.header.push(format!("bound input {}", bits_string(x)));
    Ok(inst)
}

/// Unit clauses fixing the outputs to `y`.
pub fn bind_output(t: &TemplateCnf, y: &[bool]) -> Result<BoundInstance, InstanceError> {
    check_len(t.outputs.len(), y.len())?;
    let mut inst = BoundInstance::new(t, InstanceKind::OutputBound);
    for (&v, &b) in t.outputs.iter().zip(y) {
        inst.push(vec![lit(v, b)]);
    }
    inst.header.push(format!("bound output {}", bits_string(y)));
    Ok(inst)
}

/// Variables of the second copy and the difference variables of a collision
/// instance, as recorded in its header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionVars {
    pub inputs2: Vec<u32>,
    pub outputs2: Vec<u32>,
    pub diffs: Vec<u32>,
}

/// Two copies of the template with equal outputs and different inputs.
///
/// The second copy shifts every variable by the template's variable count.
/// Input difference `d_i <-> x_i ^ x'_i` gets a fresh variable and one
/// clause requires some `d_i`.
pub fn collision_instance(t: &TemplateCnf) -> (BoundInstance, CollisionVars) {
    let off = t.num_vars();
    let shift = |l: i32| if l > 0 { l + off as i32 } else { l - off as i32 };
    let mut inst = BoundInstance::new(t, InstanceKind::Collision);
    for c in &t.cnf.clauses {
        inst.extra.push(Clause::from_sorted(c.lits().iter().map(|&l| shift(l)).collect()));
    }
    inst.num_vars = 2 * off;
    let inputs2: Vec<u32> = t.inputs.iter().map(|v| v + off).collect();
    let outputs2: Vec<u32> = t.outputs.iter().map(|v| v + off).collect();
    for (&a, &b) in t.outputs.iter().zip(&outputs2) {
        let (a, b) = (a as i32, b as i32);
        inst.push(vec![-a, b]);
        inst.push(vec![a, -b]);
    }
    let mut diffs = Vec::with_capacity(t.inputs.len());
    for (k, (&a, &b)) in t.inputs.iter().zip(&inputs2).enumerate() {
        let d = (2 * off + 1 + k as u32) as i32;
        let (a, b) = (a as i32, b as i32);
        inst.push(vec![-d, a, b]);
        inst.push(vec![-d, -a, -b]);
        inst.push(vec![d, -a, b]);
        inst.push(vec![d, a, -b]);
        diffs.push(d as u32);
    }
    if !diffs.is_empty() {
        inst.push(diffs.iter().map(|&d| d as i32).collect());
    } else {
        // No inputs: two runs can never differ.
        inst.push(vec![1]);
        inst.push(vec![-1]);
    }
    let join = |vs: &[u32]| vs.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
    inst.header.push(format!("input2 {}", join(&inputs2)).trim_end().to_string());
    inst.header.push(format!("output2 {}", join(&outputs2)).trim_end().to_string());
    inst.header.push(format!("diff {}", join(&diffs)).trim_end().to_string());
    (
        inst,
        CollisionVars {
            inputs2,
            outputs2,
            diffs,
        },
    )
}

/// Guards each constraint (a clause list over template variables) with its
/// own fresh switching variable `u`: every clause gets `-u` appended, so the
/// constraint only binds when `u` is true. Returns the switching variables.
pub fn add_switches(t: &TemplateCnf, constraints: &[Vec<Vec<i32>>]) -> Result<(BoundInstance, Vec<u32>), InstanceError> {
    let n = t.num_vars();
    for cl in constraints.iter().flatten() {
        if let Some(&l) = cl.iter().find(|l| **l == 0 || l.unsigned_abs() > n) {
            return Err(InstanceError::UnknownVariable(l as i64));
        }
    }
    let mut inst = BoundInstance::new(t, InstanceKind::Relaxed);
    let mut us = Vec::with_capacity(constraints.len());
    for (k, r) in constraints.iter().enumerate() {
        let u = n + 1 + k as u32;
        for cl in r {
            let mut lits = cl.clone();
            lits.push(-(u as i32));
            inst.push(lits);
        }
        inst.num_vars = inst.num_vars.max(u);
        inst.header.push(format!("switch {u}"));
        us.push(u);
    }
    Ok((inst, us))
}

/// Single-constraint form of [`add_switches`].
pub fn add_switching(t: &TemplateCnf, constraint: &[Vec<i32>]) -> Result<(BoundInstance, u32), InstanceError> {
    let (inst, us) = add_switches(t, &[constraint.to_vec()])?;
    Ok((inst, us[0]))
}

/// Adds the unit clause `(u)` or `(-u)` for switching variable `u`.
pub fn set_switch(inst: &mut BoundInstance, u: u32, on: bool) {
    inst.push(vec![lit(u, on)]);
    inst.header.push(format!("{} {u}", if on { "activate" } else { "deactivate" }));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Mu {
    pub count: usize,
    pub conflict: bool,
}

/// Number of `targets` that unit propagation assigns once the switching
/// variables in `activated` are set true. A conflict gives count 0 and the
/// flag.
pub fn measure_mu(cnf: &Cnf, activated: &[u32], targets: &[u32]) -> Mu {
    let assumptions: Vec<i32> = activated.iter().map(|&u| u as i32).collect();
    match unit_propagate(cnf, &assumptions) {
        UpResult::Conflict(_) => Mu {
            count: 0,
            conflict: true,
        },
        UpResult::Fixpoint(a) => Mu {
            count: targets.iter().filter(|&&v| a.value(v).is_some()).count(),
            conflict: false,
        },
    }
}

/// Values of `vars` in a total model.
pub fn project(model: &[bool], vars: &[u32]) -> Vec<bool> {
    vars.iter().map(|&v| model[v as usize]).collect()
}

/// Concatenates instances with numbered separator lines.
pub fn write_stream<'a>(instances: impl IntoIterator<Item = &'a BoundInstance>) -> String {
    let mut s = String::new();
    for (k, inst) in instances.into_iter().enumerate() {
        s.push_str(&format!("c --- instance {k} ---\n"));
        s.push_str(&inst.to_dimacs());
    }
    s
}
