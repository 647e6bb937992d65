//! Exhaustive search for token-minimal cut-free proofs of small positive
//! sequents.
//!
//! Besides the introduction rules the search may drop a formula by
//! weakening, and it may rewrite a formula along a one-formula lemma
//! `X ⊢ Y`: an extension axiom or a hypothesis. A rewrite of `X` into `Y`
//! on the left (or of `Y` into `X` on the right) is a cut on the lemma, so
//! the result is cut-free up to those cuts. Costs are exact token counts of
//! the lines the builder emits for a tree-shaped proof; shared subproofs
//! only make the real proof smaller. The state space is exponential in the
//! sequent, which is fine for the lemma skeletons this exists for.

use std::collections::HashMap;

use super::{Builder, LineId, Proof, SeqKey, Sequent};
use crate::dialect::Dialect;
use crate::term::{ExtAxiomSet, ExtVar, Formula, Kind, Literal};

#[derive(Clone, Debug)]
enum LemmaSource {
    ExtL(ExtVar),
    ExtR(ExtVar),
    Hyp(String),
}

#[derive(Clone, Debug)]
struct Lemma {
    from: Formula,
    to: Formula,
    source: LemmaSource,
}

#[derive(Clone, Debug)]
enum Step {
    Ax0,
    Ax1,
    Id(Literal),
    Weaken { left: bool, f: Formula },
    Intro { left: bool, f: Formula },
    Rewrite { left: bool, lemma: usize },
}

struct Min {
    lemmas: Vec<Lemma>,
    memo: HashMap<SeqKey, Option<(u64, Step)>>,
}

fn remove(v: &[Formula], f: &Formula) -> Vec<Formula> {
    let mut v = v.to_vec();
    let i = v.iter().position(|g| g == f).expect("formula present");
    v.remove(i);
    v
}

fn added(v: &[Formula], fs: &[&Formula]) -> Vec<Formula> {
    let mut v = v.to_vec();
    v.extend(fs.iter().map(|f| (*f).clone()));
    v
}

/// Multiset difference `big − small`, or `None` if `small` does not fit.
fn minus(big: &[Formula], small: &[Formula]) -> Option<Vec<Formula>> {
    let mut rest = big.to_vec();
    for f in small {
        let i = rest.iter().position(|g| g == f)?;
        rest.remove(i);
    }
    Some(rest)
}

/// Tokens of the lines that weaken `from` up to `to`, excluding `from`.
fn weaken_cost(from: &Sequent, to: &Sequent) -> u64 {
    let extra_l = minus(&to.ante, &from.ante).expect("weakening target");
    let extra_r = minus(&to.succ, &from.succ).expect("weakening target");
    let mut cur = from.clone();
    let mut cost = 0;
    for f in extra_l {
        cur.ante.push(f);
        cost += cur.tokens();
    }
    for f in extra_r {
        cur.succ.push(f);
        cost += cur.tokens();
    }
    cost
}

/// Distinct formulas of a cedent, in first-occurrence order.
fn distinct(v: &[Formula]) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::new();
    for f in v {
        if !out.contains(f) {
            out.push(f.clone());
        }
    }
    out
}

impl Min {
    fn solve(&mut self, s: &Sequent) -> Option<u64> {
        let key = s.key();
        if let Some(r) = self.memo.get(&key) {
            return r.as_ref().map(|(c, _)| *c);
        }
        // Guards against rewrite cycles; the real result replaces it.
        self.memo.insert(key.clone(), None);
        let mut best: Option<(u64, Step)> = None;
        let offer = |best: &mut Option<(u64, Step)>, cost: u64, step: Step| {
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                *best = Some((cost, step));
            }
        };

        let here = s.tokens();
        let (zero, one) = (Formula::zero(), Formula::one());
        if s.ante.contains(&zero) {
            let base = Sequent::new(vec![zero.clone()], vec![]);
            offer(&mut best, base.tokens() + weaken_cost(&base, s), Step::Ax0);
        }
        if s.succ.contains(&one) {
            let base = Sequent::new(vec![], vec![one.clone()]);
            offer(&mut best, base.tokens() + weaken_cost(&base, s), Step::Ax1);
        }
        for f in distinct(&s.ante) {
            if let Some(l) = f.as_lit() {
                if s.succ.contains(&f) {
                    let base = Sequent::new(vec![f.clone()], vec![f.clone()]);
                    offer(&mut best, base.tokens() + weaken_cost(&base, s), Step::Id(l));
                }
            }
        }

        for left in [true, false] {
            let side = if left { &s.ante } else { &s.succ };
            for f in distinct(side) {
                // Weakening.
                let smaller = if left {
                    Sequent::new(remove(&s.ante, &f), s.succ.clone())
                } else {
                    Sequent::new(s.ante.clone(), remove(&s.succ, &f))
                };
                if let Some(c) = self.solve(&smaller) {
                    offer(&mut best, here + c, Step::Weaken { left, f: f.clone() });
                }
                // Introduction.
                let premises: Option<Vec<Sequent>> = match (left, f.kind()) {
                    (true, Kind::Or(a, b)) => {
                        let g = remove(&s.ante, &f);
                        Some(vec![
                            Sequent::new(added(&g, &[a]), s.succ.clone()),
                            Sequent::new(added(&g, &[b]), s.succ.clone()),
                        ])
                    }
                    (true, Kind::PosDec(a, l, b)) => {
                        let g = remove(&s.ante, &f);
                        let lf = Formula::lit(*l);
                        Some(vec![
                            Sequent::new(added(&g, &[a]), s.succ.clone()),
                            Sequent::new(added(&g, &[&lf, b]), s.succ.clone()),
                        ])
                    }
                    (false, Kind::Or(a, b)) => {
                        let d = remove(&s.succ, &f);
                        Some(vec![Sequent::new(s.ante.clone(), added(&d, &[a, b]))])
                    }
                    (false, Kind::PosDec(a, l, b)) => {
                        let d = remove(&s.succ, &f);
                        let lf = Formula::lit(*l);
                        Some(vec![
                            Sequent::new(s.ante.clone(), added(&d, &[a, &lf])),
                            Sequent::new(s.ante.clone(), added(&d, &[a, b])),
                        ])
                    }
                    _ => None,
                };
                if let Some(ps) = premises {
                    let mut total = Some(here);
                    for p in &ps {
                        total = match (total, self.solve(p)) {
                            (Some(t), Some(c)) => Some(t + c),
                            _ => None,
                        };
                    }
                    if let Some(t) = total {
                        offer(&mut best, t, Step::Intro { left, f: f.clone() });
                    }
                }
                // Rewriting along a lemma.
                for i in 0..self.lemmas.len() {
                    let lem = self.lemmas[i].clone();
                    if let Some(c) = self.rewrite_cost(s, left, &f, &lem) {
                        offer(&mut best, c, Step::Rewrite { left, lemma: i });
                    }
                }
            }
        }
        let r = best.as_ref().map(|(c, _)| *c);
        self.memo.insert(key, best);
        r
    }

    /// The sequents around a rewrite of `f` in `s`: the lemma weakened to
    /// the cut's first premise, the cut's second premise, and the sequent
    /// the second premise is weakened from.
    fn rewrite_shape(s: &Sequent, left: bool, f: &Formula, lem: &Lemma) -> Option<(Sequent, Sequent, Sequent)> {
        // Extension axioms are only used to unfold, which keeps the search
        // from folding and unfolding the same variable forever.
        let (left_ok, right_ok) = match lem.source {
            LemmaSource::ExtL(_) => (true, false),
            LemmaSource::ExtR(_) => (false, true),
            LemmaSource::Hyp(_) => (true, true),
        };
        if left && left_ok && *f == lem.from {
            // Γ, X ⊢ Δ, Y   and   Γ, X, Y ⊢ Δ   from   Γ, Y ⊢ Δ
            let g = remove(&s.ante, f);
            let first = Sequent::new(s.ante.clone(), added(&s.succ, &[&lem.to]));
            let second = Sequent::new(added(&s.ante, &[&lem.to]), s.succ.clone());
            let inner = Sequent::new(added(&g, &[&lem.to]), s.succ.clone());
            Some((first, second, inner))
        } else if !left && right_ok && *f == lem.to {
            // Γ ⊢ Δ, Y, X   from   Γ ⊢ Δ, X   and   Γ, X ⊢ Δ, Y
            let d = remove(&s.succ, f);
            let first = Sequent::new(s.ante.clone(), added(&s.succ, &[&lem.from]));
            let second = Sequent::new(added(&s.ante, &[&lem.from]), s.succ.clone());
            let inner = Sequent::new(s.ante.clone(), added(&d, &[&lem.from]));
            Some((first, second, inner))
        } else {
            None
        }
    }

    fn rewrite_cost(&mut self, s: &Sequent, left: bool, f: &Formula, lem: &Lemma) -> Option<u64> {
        let (first, second, inner) = Self::rewrite_shape(s, left, f, lem)?;
        let lemma_seq = Sequent::new(vec![lem.from.clone()], vec![lem.to.clone()]);
        let c = self.solve(&inner)?;
        let (weakened, derived) = if left { (&first, &second) } else { (&second, &first) };
        Some(lemma_seq.tokens() + weaken_cost(&lemma_seq, weakened) + c + derived.tokens() + s.tokens())
    }

    fn build(&mut self, b: &mut Builder, s: &Sequent) -> LineId {
        let (_, step) = self.memo[&s.key()].clone().expect("solved sequent");
        match step {
            Step::Ax0 => {
                let l = b.ax0();
                b.structural_to(l, s)
            }
            Step::Ax1 => {
                let l = b.ax1();
                b.structural_to(l, s)
            }
            Step::Id(lit) => {
                let l = b.id(lit);
                b.structural_to(l, s)
            }
            Step::Weaken { left, f } => {
                if left {
                    let l = self.build(b, &Sequent::new(remove(&s.ante, &f), s.succ.clone()));
                    b.wl(l, &f)
                } else {
                    let l = self.build(b, &Sequent::new(s.ante.clone(), remove(&s.succ, &f)));
                    b.wr(l, &f)
                }
            }
            Step::Intro { left, f } => match (left, f.kind()) {
                (true, Kind::Or(a, c)) | (true, Kind::PosDec(a, _, c)) => {
                    let g = remove(&s.ante, &f);
                    let l1 = self.build(b, &Sequent::new(added(&g, &[a]), s.succ.clone()));
                    let second = match f.kind() {
                        Kind::PosDec(_, l, _) => added(&g, &[&Formula::lit(*l), c]),
                        _ => added(&g, &[c]),
                    };
                    let l2 = self.build(b, &Sequent::new(second, s.succ.clone()));
                    match f.kind() {
                        Kind::Or(..) => b.orl(l1, l2, &f),
                        _ => b.posl(l1, l2, &f),
                    }
                }
                (false, Kind::Or(a, c)) => {
                    let d = remove(&s.succ, &f);
                    let l = self.build(b, &Sequent::new(s.ante.clone(), added(&d, &[a, c])));
                    b.orr(l, &f)
                }
                (false, Kind::PosDec(a, lit, c)) => {
                    let d = remove(&s.succ, &f);
                    let lf = Formula::lit(*lit);
                    let l1 = self.build(b, &Sequent::new(s.ante.clone(), added(&d, &[a, &lf])));
                    let l2 = self.build(b, &Sequent::new(s.ante.clone(), added(&d, &[a, c])));
                    b.posr(l1, l2, &f)
                }
                _ => unreachable!("only introductions are recorded"),
            },
            Step::Rewrite { left, lemma } => {
                let lem = self.lemmas[lemma].clone();
                let f = if left { lem.from.clone() } else { lem.to.clone() };
                let (first, second, inner) = Self::rewrite_shape(s, left, &f, &lem).expect("recorded rewrite fits");
                let base = match &lem.source {
                    LemmaSource::ExtL(e) => b.ext_l(e),
                    LemmaSource::ExtR(e) => b.ext_r(e),
                    LemmaSource::Hyp(name) => b.hyp(name, Sequent::new(vec![lem.from.clone()], vec![lem.to.clone()])),
                };
                let inner_line = self.build(b, &inner);
                if left {
                    let l1 = b.structural_to(base, &first);
                    let l2 = b.wl(inner_line, &f);
                    b.cut(l1, l2, &lem.to)
                } else {
                    let l1 = b.wr(inner_line, &f);
                    let l2 = b.structural_to(base, &second);
                    b.cut(l1, l2, &lem.from)
                }
            }
        }
    }
}

/// Token-minimal proof of a small positive sequent over the extension
/// axioms `ax` and one-formula hypotheses `hyps` (name, `X ⊢ Y`), or `None`
/// if there is none. The proof is marked intermediate, so extension
/// variables may occur in its conclusion.
pub fn prove_minimal(s: &Sequent, ax: &ExtAxiomSet, hyps: &[(String, Sequent)]) -> Option<Proof> {
    let mut lemmas = Vec::new();
    for (e, body) in ax.iter() {
        let ef = Formula::ext(e.clone());
        lemmas.push(Lemma { from: ef.clone(), to: body.clone(), source: LemmaSource::ExtL(e.clone()) });
        lemmas.push(Lemma { from: body.clone(), to: ef, source: LemmaSource::ExtR(e.clone()) });
    }
    for (name, h) in hyps {
        assert!(h.ante.len() == 1 && h.succ.len() == 1, "hypothesis {name} must have one formula per side");
        lemmas.push(Lemma { from: h.ante[0].clone(), to: h.succ[0].clone(), source: LemmaSource::Hyp(name.clone()) });
    }
    let mut m = Min { lemmas, memo: HashMap::new() };
    m.solve(s)?;
    let mut b = Builder::new(Dialect::Plus, ax.clone());
    let root = m.build(&mut b, s);
    Some(b.finish_as(root, s, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequent::check_proof;
    use crate::term::PropVar;

    #[test]
    fn minimal_proofs_check_and_beat_search() {
        let [p, q, r] = [0, 1, 2].map(|i| Formula::var(PropVar(i)));
        let lhs = Formula::pdec(Formula::or(p.clone(), q.clone()), Literal::pos(PropVar(2)), r.clone());
        let rhs = Formula::or(Formula::or(r, q), p);
        let s = Sequent::new(vec![lhs], vec![rhs]);
        let ax = ExtAxiomSet::new();
        let min = prove_minimal(&s, &ax, &[]).expect("valid");
        check_proof(&min).expect("checks");
        let searched = crate::sequent::prove_by_search(&s, &ax).unwrap().proof().unwrap();
        assert!(min.size() <= searched.size());
    }

    #[test]
    fn hypotheses_are_used_as_rewrites() {
        let [a, b] = [0, 1].map(|i| Formula::var(PropVar(i)));
        let hyps = [("h".to_string(), Sequent::new(vec![a.clone()], vec![b.clone()]))];
        let s = Sequent::new(vec![a.clone()], vec![Formula::or(b, Formula::zero())]);
        let p = prove_minimal(&s, &ExtAxiomSet::new(), &hyps).expect("derivable from h");
        check_proof(&p).expect("checks");
        assert!(prove_minimal(&s, &ExtAxiomSet::new(), &[]).is_none());
    }
}
