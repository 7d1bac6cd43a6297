use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnfgen::TemplateCnf;

use super::{bind_output, lit, BoundInstance, InstanceError, InstanceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuessMode {
    /// All `2^|B|` assignments in counting order (bit `j` of the counter is
    /// the value of `B[j]`).
    Exhaustive,
    Sample { count: usize, seed: u64 },
}

/// Stream of `bind_output(t, y)` instances with the guessed variables fixed.
#[derive(Debug, Clone)]
pub struct GuessFamily {
    base: BoundInstance,
    guessed: Vec<u32>,
    mode: GuessMode,
    next: u64,
    rng: ChaCha8Rng,
}

impl GuessFamily {
    pub fn guessed(&self) -> &[u32] {
        &self.guessed
    }

    /// Number of instances the stream yields in total.
    pub fn len(&self) -> u64 {
        match self.mode {
            GuessMode::Exhaustive => 1u64 << self.guessed.len(),
            GuessMode::Sample { count, .. } => count as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn instance(&self, values: &[bool]) -> BoundInstance {
        let mut inst = self.base.clone();
        if self.guessed.is_empty() {
            return inst;
        }
        inst.kind = InstanceKind::Guessed;
        for (&v, &b) in self.guessed.iter().zip(values) {
            inst.push(vec![lit(v, b)]);
        }
        let desc: Vec<String> = self
            .guessed
            .iter()
            .zip(values)
            .map(|(v, &b)| format!("{v}={}", b as u8))
            .collect();
        inst.header.push(format!("guess {}", desc.join(" ")));
        inst
    }
}

impl Iterator for GuessFamily {
    type Item = BoundInstance;

    fn next(&mut self) -> Option<BoundInstance> {
        if self.next >= self.len() {
            return None;
        }
        let k = self.next;
        self.next += 1;
        let values: Vec<bool> = match self.mode {
            GuessMode::Exhaustive => (0..self.guessed.len()).map(|j| k >> j & 1 == 1).collect(),
            GuessMode::Sample { .. } => {
                let rng = &mut self.rng;
                (0..self.guessed.len()).map(|_| rng.gen::<bool>()).collect()
            }
        };
        Some(self.instance(&values))
    }
}

/// Checks that `b` lists distinct variables of `t`.
pub(super) fn check_guessed(t: &TemplateCnf, b: &[u32]) -> Result<(), InstanceError> {
    let mut seen = std::collections::HashSet::new();
    for &v in b {
        if v == 0 || v > t.num_vars() {
            return Err(InstanceError::UnknownVariable(v as i64));
        }
        if !seen.insert(v) {
            return Err(InstanceError::DuplicateVariable(v));
        }
    }
    Ok(())
}

pub fn guess_family(t: &TemplateCnf, y: &[bool], b: &[u32], mode: GuessMode) -> Result<GuessFamily, InstanceError> {
    check_guessed(t, b)?;
    if mode == GuessMode::Exhaustive && b.len() > 30 {
        return Err(InstanceError::TooManyGuesses(b.len()));
    }
    let seed = match mode {
        GuessMode::Sample { seed, .. } => seed,
        GuessMode::Exhaustive => 0,
    };
    Ok(GuessFamily {
        base: bind_output(t, y)?,
        guessed: b.to_vec(),
        mode,
        next: 0,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}
