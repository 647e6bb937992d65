//! Seeded random corpus of eLNDT proofs of positive sequents.
//!
//! Each item starts from a valid positive sequent over at most five
//! variables, proved by cut-free search in eLNDT⁺ and desugared into eLNDT.
//! Detours are then spliced in below the conclusion: a general decision
//! `dec(x, q, y)` (usually not positive) is introduced on both sides from
//! weakened copies of the proof and cut away again, sometimes behind an
//! extension variable. The decision variable may be a fresh sixth variable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dialect::Dialect;
use crate::sequent::{prove_by_search, sequent_valid, Builder, LineId, Proof, Sequent};
use crate::sim::desugar_into;
use crate::term::{desugar, ExtAxiomSet, ExtVar, Formula, Literal, PropVar};

#[derive(Clone, Debug)]
pub struct CorpusItem {
    /// Positive conclusion in positive-decision form.
    pub target: Sequent,
    /// eLNDT proof of the desugared target.
    pub proof: Proof,
}

#[derive(Clone, Copy, Debug)]
pub struct CorpusOptions {
    pub max_vars: usize,
    pub max_tokens: u64,
    pub max_detours: usize,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions { max_vars: 6, max_tokens: 2000, max_detours: 3 }
    }
}

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn var(&mut self, m: usize) -> PropVar {
        PropVar(self.rng.gen_range(0..m as u32))
    }

    fn positive(&mut self, m: usize, depth: u32) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.25) {
            return match self.rng.gen_range(0..12) {
                0 => Formula::zero(),
                1 => Formula::one(),
                _ => Formula::var(self.var(m)),
            };
        }
        let (a, b) = (self.positive(m, depth - 1), self.positive(m, depth - 1));
        if self.rng.gen_bool(0.4) {
            Formula::or(a, b)
        } else {
            Formula::pdec(a, Literal::pos(self.var(m)), b)
        }
    }

    /// eLNDT formula with general decisions.
    fn general(&mut self, m: usize, depth: u32) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return match self.rng.gen_range(0..10) {
                0 => Formula::zero(),
                1 => Formula::one(),
                _ => Formula::var(self.var(m)),
            };
        }
        let (a, b) = (self.general(m, depth - 1), self.general(m, depth - 1));
        if self.rng.gen_bool(0.3) {
            Formula::or(a, b)
        } else {
            Formula::dec(a, Literal::pos(self.var(m)), b)
        }
    }

    /// A valid positive sequent, by rejection sampling with a fallback to
    /// `f ⊢ g ∨ f`.
    fn sequent(&mut self, m: usize, depth: u32) -> Sequent {
        let ax = ExtAxiomSet::new();
        for _ in 0..200 {
            let n_ante = self.rng.gen_range(1..=2);
            let ante: Vec<Formula> = (0..n_ante).map(|_| self.positive(m, depth)).collect();
            let succ = vec![self.positive(m, depth)];
            let s = Sequent::new(ante, succ);
            if s.formulas().all(|f| f.tokens() > 1) && sequent_valid(&s, &ax).expect("small").is_valid() {
                return s;
            }
        }
        let f = self.positive(m, depth);
        let g = self.positive(m, depth);
        Sequent::new(vec![f.clone()], vec![Formula::or(g, f)])
    }
}

/// `Γ ⊢ Δ, d` and `Γ, d ⊢ Δ` for `d = dec(x, q, y)` from `root = Γ ⊢ Δ`.
fn decision_pair(b: &mut Builder, root: LineId, x: &Formula, q: PropVar, y: &Formula) -> (LineId, LineId, Formula) {
    let d = Formula::dec(x.clone(), Literal::pos(q), y.clone());
    let qf = Formula::var(q);
    let r1 = b.weaken(root, &[], &[x.clone(), qf.clone()]);
    let r2 = b.weaken(root, &[qf.clone()], &[y.clone()]);
    let right = b.pr(r1, r2, &d);
    let l1 = b.weaken(root, &[x.clone()], &[qf.clone()]);
    let l2 = b.weaken(root, &[qf, y.clone()], &[]);
    let left = b.pl(l1, l2, &d);
    (right, left, d)
}

fn item(g: &mut Gen, opts: &CorpusOptions, serial: &mut u32) -> Option<CorpusItem> {
    let base_vars = g.rng.gen_range(1..=opts.max_vars.saturating_sub(1).max(1));
    let depth = g.rng.gen_range(1..=3);
    let target = g.sequent(base_vars, depth);
    let searched = prove_by_search(&target, &ExtAxiomSet::new()).ok()?.proof()?;
    let mut b = Builder::new(Dialect::Elndt, ExtAxiomSet::new());
    let mut root = desugar_into(&mut b, &searched).ok()?;
    let all_vars = (base_vars + 1).min(opts.max_vars);
    let detours = g.rng.gen_range(0..=opts.max_detours);
    for _ in 0..detours {
        let q = g.var(all_vars);
        let dd = g.rng.gen_range(0..=2);
        let (x, y) = (g.general(all_vars, dd), g.general(all_vars, dd));
        let (right, left, d) = decision_pair(&mut b, root, &x, q, &y);
        root = if g.rng.gen_bool(0.35) {
            let e = ExtVar::Plain(*serial);
            *serial += 1;
            b.ax.push(e.clone(), d.clone()).expect("fresh variable");
            let up = b.ext_r(&e);
            let down = b.ext_l(&e);
            let r = b.cut_merge(right, up, &d);
            let l = b.cut_merge(down, left, &d);
            b.cut_merge(r, l, &Formula::ext(e))
        } else {
            b.cut_merge(right, left, &d)
        };
    }
    let want = Sequent::new(target.ante.iter().map(desugar).collect(), target.succ.iter().map(desugar).collect());
    let proof = b.finish_as(root, &want, false);
    (proof.size() <= opts.max_tokens).then_some(CorpusItem { target, proof })
}

/// `count` corpus items for `seed`. Items over the token budget are
/// resampled, so the result is deterministic in `(seed, count, opts)`.
pub fn random_corpus(seed: u64, count: usize, opts: &CorpusOptions) -> Vec<CorpusItem> {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed) };
    let mut serial = 0;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if let Some(it) = item(&mut g, opts, &mut serial) {
            out.push(it);
        }
    }
    out
}
