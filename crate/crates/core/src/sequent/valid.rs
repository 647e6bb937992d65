use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Proof, Sequent};
use crate::oracle::TableEval;
use crate::term::{free_vars, Assignment, EvalError, ExtAxiomSet, PropVar, DEFAULT_ORACLE_CAP};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Validity {
    Valid,
    Countermodel(Assignment),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

fn sequent_vars(s: &Sequent, ax: &ExtAxiomSet) -> BTreeSet<PropVar> {
    s.formulas().flat_map(|f| free_vars(f, ax)).collect()
}

/// Valid iff every assignment falsifies an antecedent formula or satisfies
/// a succedent formula.
pub fn sequent_valid(s: &Sequent, ax: &ExtAxiomSet) -> Result<Validity, EvalError> {
    let vars: Vec<PropVar> = sequent_vars(s, ax).into_iter().collect();
    let mut te = TableEval::new(vars.clone(), ax, DEFAULT_ORACLE_CAP)?;
    Ok(match te.falsifying_row(&s.ante, &s.succ)? {
        None => Validity::Valid,
        Some(i) => Validity::Countermodel(Assignment::from_index(&vars, i)),
    })
}

/// Outcome of the soundness harness.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Soundness {
    AllValid { lines: usize, rows: usize },
    Invalid { line: usize, countermodel: Assignment },
}

impl Soundness {
    pub fn is_sound(&self) -> bool {
        matches!(self, Soundness::AllValid { .. })
    }
}

/// Evaluates every line of `p` over all assignments to the proof's free
/// variables (at most `cap` of them).
pub fn check_soundness(p: &Proof, cap: usize) -> Result<Soundness, EvalError> {
    let vars: BTreeSet<PropVar> = p.lines.iter().flat_map(|l| sequent_vars(&l.seq, &p.axioms)).collect();
    let vars: Vec<PropVar> = vars.into_iter().collect();
    let mut te = TableEval::new(vars.clone(), &p.axioms, cap)?;
    for (n, l) in p.lines.iter().enumerate() {
        if let Some(i) = te.falsifying_row(&l.seq.ante, &l.seq.succ)? {
            return Ok(Soundness::Invalid { line: n, countermodel: Assignment::from_index(&vars, i) });
        }
    }
    Ok(Soundness::AllValid { lines: p.lines.len(), rows: te.rows() })
}

/// Evaluates every line of `p` on `samples` seeded random assignments.
pub fn check_soundness_sampled(p: &Proof, samples: usize, seed: u64) -> Result<Soundness, EvalError> {
    let vars: BTreeSet<PropVar> = p.lines.iter().flat_map(|l| sequent_vars(&l.seq, &p.axioms)).collect();
    let vars: Vec<PropVar> = vars.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut te, rows) = TableEval::random(&vars, samples, &p.axioms, &mut rng);
    for (n, l) in p.lines.iter().enumerate() {
        if let Some(i) = te.falsifying_row(&l.seq.ante, &l.seq.succ)? {
            return Ok(Soundness::Invalid { line: n, countermodel: rows[i].clone() });
        }
    }
    Ok(Soundness::AllValid { lines: p.lines.len(), rows: samples })
}
