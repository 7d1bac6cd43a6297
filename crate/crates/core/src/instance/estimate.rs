use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cnfgen::TemplateCnf;
use crate::satcore::{external_solve, solve, unit_propagate, ExternalError, SolveResult, SolverConfig, UpResult};

use super::guess::check_guessed;
use super::{bind_input, bind_output, lit, InstanceError};

/// How the floor on the success rate is chosen.
pub const EPSILON_NOTE: &str = "rho is floored at epsilon = 1/(2N)";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EstimateSolver {
    /// Embedded DPLL; the budget in the configuration is the per-instance
    /// limit and cost is counted in propagations.
    Embedded(SolverConfig),
    /// External command; cost is wall-clock seconds.
    External(String),
}

#[derive(Debug, thiserror::Error)]
pub enum EstimateError {
    #[error("sample size must be positive")]
    NoSamples,
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    External(#[from] ExternalError),
    #[error("forward propagation left variable {0} unassigned")]
    Incomplete(u32),
}

/// Result of a guess-and-determine estimate.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub estimator: &'static str,
    pub seed: u64,
    pub samples: usize,
    /// Samples whose input violates an assertion of the program.
    pub rejected: usize,
    pub guessed: usize,
    pub solved: usize,
    pub rho: f64,
    pub epsilon: f64,
    /// Mean cost over solved instances.
    pub mean_cost: Option<f64>,
    pub cost_unit: &'static str,
    /// `2^|B| * mean_cost / max(rho, epsilon)`.
    pub total_cost: Option<f64>,
}

enum Sample {
    Rejected,
    Unsolved,
    Solved(f64),
}

fn run_sample(t: &TemplateCnf, b: &[u32], x: &[bool], solver: &EstimateSolver) -> Result<Sample, EstimateError> {
    let fwd = bind_input(t, x)?.to_cnf();
    let a = match unit_propagate(&fwd, &[]) {
        UpResult::Conflict(_) => return Ok(Sample::Rejected),
        UpResult::Fixpoint(a) => a,
    };
    let value = |v: u32| a.value(v).ok_or(EstimateError::Incomplete(v));
    let y = t.outputs.iter().map(|&v| value(v)).collect::<Result<Vec<_>, _>>()?;
    let mut inst = bind_output(t, &y)?;
    for &v in b {
        inst.push(vec![lit(v, value(v)?)]);
    }
    match solver {
        EstimateSolver::Embedded(cfg) => {
            let s = solve(&inst.to_cnf(), &[], cfg);
            Ok(match s.result {
                SolveResult::Unknown => Sample::Unsolved,
                _ => Sample::Solved(s.stats.propagations as f64),
            })
        }
        EstimateSolver::External(cmd) => {
            let start = Instant::now();
            let r = external_solve(&inst.to_cnf().to_dimacs(), cmd)?;
            let secs = start.elapsed().as_secs_f64();
            Ok(match r {
                SolveResult::Unknown => Sample::Unsolved,
                _ => Sample::Solved(secs),
            })
        }
    }
}

/// Monte Carlo estimate of the cost of solving the whole guessed-bit family
/// for `b` (the "simplified estimator").
///
/// Each of the `samples` random inputs is run forward by unit propagation.
/// The guessed bits then take their true values from that run, and the
/// output-bound instance is solved. Samples run in parallel, but results are
/// aggregated in sample order.
pub fn estimate_gd(
    t: &TemplateCnf,
    b: &[u32],
    samples: usize,
    solver: &EstimateSolver,
    seed: u64,
) -> Result<Estimate, EstimateError> {
    if samples == 0 {
        return Err(EstimateError::NoSamples);
    }
    check_guessed(t, b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<Vec<bool>> = (0..samples)
        .map(|_| (0..t.inputs.len()).map(|_| rng.gen::<bool>()).collect())
        .collect();
    let results = xs
        .par_iter()
        .map(|x| run_sample(t, b, x, solver))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rejected = 0;
    let mut costs = Vec::new();
    for r in &results {
        match r {
            Sample::Rejected => rejected += 1,
            Sample::Unsolved => {}
            Sample::Solved(c) => costs.push(*c),
        }
    }
    let valid = samples - rejected;
    let rho = if valid == 0 { 0.0 } else { costs.len() as f64 / valid as f64 };
    let epsilon = 1.0 / (2.0 * samples as f64);
    let mean_cost = (!costs.is_empty()).then(|| costs.iter().sum::<f64>() / costs.len() as f64);
    let total_cost = mean_cost.map(|m| 2f64.powi(b.len() as i32) * m / rho.max(epsilon));
    Ok(Estimate {
        estimator: "simplified estimator",
        seed,
        samples,
        rejected,
        guessed: b.len(),
        solved: costs.len(),
        rho,
        epsilon,
        mean_cost,
        cost_unit: match solver {
            EstimateSolver::Embedded(_) => "propagations",
            EstimateSolver::External(_) => "seconds",
        },
        total_cost,
    })
}
