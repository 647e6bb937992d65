//! Incremental construction of dag-like proofs.
//!
//! Every pushed line is indexed by its multiset key, so asking for a
//! sequent that was already derived returns the existing line. Generators
//! rely on this for sharing: a lemma instance requested twice is proved
//! once.

use std::collections::{HashMap, HashSet};

use rustc_hash::FxHashMap;

use super::{msort, Justification, Line, Proof, Rule, SeqKey, Sequent};
use crate::dialect::Dialect;
use crate::term::{ExtAxiomSet, ExtVar, Formula, Kind, Literal, PropVar};

pub type LineId = usize;

#[derive(Clone)]
pub struct Builder {
    pub dialect: Dialect,
    pub ax: ExtAxiomSet,
    lines: Vec<Line>,
    index: FxHashMap<SeqKey, LineId>,
    hyps: Vec<(String, Sequent)>,
    sharing: bool,
}

fn remove_first(v: &mut Vec<Formula>, x: &Formula) -> Option<usize> {
    let i = v.iter().position(|y| y == x)?;
    v.remove(i);
    Some(i)
}

fn count(fs: &[Formula], f: &Formula) -> usize {
    fs.iter().filter(|g| *g == f).count()
}

/// Marks one unused copy of `f` in `fs`; cedents are short, so a linear
/// scan beats hashing.
fn take(fs: &[Formula], used: &mut [bool], f: &Formula) -> bool {
    match (0..fs.len()).find(|&i| !used[i] && fs[i] == *f) {
        Some(i) => {
            used[i] = true;
            true
        }
        None => false,
    }
}

/// Multiset maximum, keeping the order of `a` followed by the surplus of `b`.
fn mmax(a: &[Formula], b: &[Formula]) -> Vec<Formula> {
    let mut used = vec![false; a.len()];
    let mut out = a.to_vec();
    for f in b {
        if !take(a, &mut used, f) {
            out.push(f.clone());
        }
    }
    out
}

/// `target − have` as a multiset; `None` unless `have ⊆ target`.
fn mdiff(target: &[Formula], have: &[Formula]) -> Option<Vec<Formula>> {
    let mut used = vec![false; target.len()];
    for f in have {
        if !take(target, &mut used, f) {
            return None;
        }
    }
    Some(target.iter().zip(&used).filter(|(_, u)| !**u).map(|(f, _)| f.clone()).collect())
}

impl Builder {
    pub fn new(dialect: Dialect, ax: ExtAxiomSet) -> Self {
        Builder { dialect, ax, lines: Vec::new(), index: FxHashMap::default(), hyps: Vec::new(), sharing: true }
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn seq(&self, id: LineId) -> &Sequent {
        &self.lines[id].seq
    }

    pub fn line(&self, id: LineId) -> &Line {
        &self.lines[id]
    }

    /// With sharing off every request appends a fresh line, even for a
    /// sequent that is already derived; lookups keep the first line.
    pub fn set_sharing(&mut self, on: bool) {
        self.sharing = on;
    }

    pub fn find(&self, s: &Sequent) -> Option<LineId> {
        self.index.get(&s.key()).copied()
    }

    fn push(&mut self, seq: Sequent, just: Justification) -> LineId {
        let key = seq.key();
        if self.sharing {
            if let Some(&id) = self.index.get(&key) {
                return id;
            }
        }
        let id = self.lines.len();
        self.lines.push(Line { seq, just });
        self.index.entry(key).or_insert(id);
        id
    }

    // -- initial sequents ---------------------------------------------------

    pub fn ax0(&mut self) -> LineId {
        self.push(Sequent::new(vec![Formula::zero()], vec![]), Justification::Axiom0)
    }

    pub fn ax1(&mut self) -> LineId {
        self.push(Sequent::new(vec![], vec![Formula::one()]), Justification::Axiom1)
    }

    pub fn id(&mut self, l: Literal) -> LineId {
        let f = Formula::lit(l);
        self.push(Sequent::new(vec![f.clone()], vec![f]), Justification::Id(l))
    }

    pub fn neg_l(&mut self, p: PropVar) -> LineId {
        self.push(Sequent::new(vec![Formula::var(p), Formula::neg(p)], vec![]), Justification::NegL(p))
    }

    pub fn neg_r(&mut self, p: PropVar) -> LineId {
        self.push(Sequent::new(vec![], vec![Formula::var(p), Formula::neg(p)]), Justification::NegR(p))
    }

    fn thr_pair(&self, i: usize) -> [Formula; 2] {
        let Dialect::Tk { k, vars } = &self.dialect else {
            panic!("threshold initial sequents need the threshold dialect");
        };
        let mut rest = vars.clone();
        let p = rest.remove(i);
        [Formula::var(p), Formula::thr(&rest, *k)]
    }

    pub fn thr_l(&mut self, i: usize) -> LineId {
        let pair = self.thr_pair(i);
        self.push(Sequent::new(pair.to_vec(), vec![]), Justification::ThrL(i))
    }

    pub fn thr_r(&mut self, i: usize) -> LineId {
        let pair = self.thr_pair(i);
        self.push(Sequent::new(vec![], pair.to_vec()), Justification::ThrR(i))
    }

    fn body(&self, e: &ExtVar) -> Formula {
        self.ax.body(e).unwrap_or_else(|| panic!("no axiom for {e}")).clone()
    }

    /// `e ⊢ body(e)`
    pub fn ext_l(&mut self, e: &ExtVar) -> LineId {
        let b = self.body(e);
        self.push(Sequent::new(vec![Formula::ext(e.clone())], vec![b]), Justification::ExtLR(e.clone()))
    }

    /// `body(e) ⊢ e`
    pub fn ext_r(&mut self, e: &ExtVar) -> LineId {
        let b = self.body(e);
        self.push(Sequent::new(vec![b], vec![Formula::ext(e.clone())]), Justification::ExtRL(e.clone()))
    }

    pub fn hyp(&mut self, name: &str, s: Sequent) -> LineId {
        match self.hyps.iter().find(|(n, _)| n == name) {
            Some((_, old)) => assert!(old.same_as(&s), "hypothesis {name} redeclared with a different sequent"),
            None => self.hyps.push((name.to_string(), s.clone())),
        }
        self.push(s, Justification::Hypothesis(name.to_string()))
    }

    // -- rules ----------------------------------------------------------------

    /// Applies `rule` with principal formula `x`, computing the conclusion
    /// from the first premise and asserting that all premises fit.
    pub fn rule(&mut self, rule: Rule, premises: &[LineId], x: &Formula) -> LineId {
        assert_eq!(premises.len(), rule.arity(), "{} arity", rule.name());
        let p = self.seq(premises[0]).clone();
        let (mut ante, mut succ) = (p.ante.clone(), p.succ.clone());
        let fail = |what: &str| -> ! { panic!("{}: {what} in premise {p} (principal {x})", rule.name()) };
        match (rule, x.kind()) {
            (Rule::Cut, _) => {
                remove_first(&mut succ, x).unwrap_or_else(|| fail("cut formula missing"));
            }
            (Rule::WL, _) => ante.push(x.clone()),
            (Rule::WR, _) => succ.push(x.clone()),
            (Rule::CL, _) => {
                remove_first(&mut ante, x).unwrap_or_else(|| fail("contracted formula missing"));
            }
            (Rule::CR, _) => {
                remove_first(&mut succ, x).unwrap_or_else(|| fail("contracted formula missing"));
            }
            (Rule::PL, Kind::Dec(a, l, _)) => {
                let i = remove_first(&mut ante, a).unwrap_or_else(|| fail("left branch missing"));
                ante.insert(i, x.clone());
                remove_first(&mut succ, &Formula::lit(*l)).unwrap_or_else(|| fail("decision literal missing"));
            }
            (Rule::PosPL, Kind::PosDec(a, _, _)) | (Rule::OrL, Kind::Or(a, _)) => {
                let i = remove_first(&mut ante, a).unwrap_or_else(|| fail("left component missing"));
                ante.insert(i, x.clone());
            }
            (Rule::PR | Rule::PosPR, Kind::Dec(a, l, _) | Kind::PosDec(a, l, _)) => {
                let i = remove_first(&mut succ, a).unwrap_or_else(|| fail("left branch missing"));
                remove_first(&mut succ, &Formula::lit(*l)).unwrap_or_else(|| fail("decision literal missing"));
                succ.insert(i.min(succ.len()), x.clone());
            }
            (Rule::OrR, Kind::Or(a, b)) => {
                let i = remove_first(&mut succ, a).unwrap_or_else(|| fail("left disjunct missing"));
                remove_first(&mut succ, b).unwrap_or_else(|| fail("right disjunct missing"));
                succ.insert(i.min(succ.len()), x.clone());
            }
            _ => fail("principal formula has the wrong shape"),
        }
        let concl = Sequent::new(ante, succ);
        if let Some(q) = premises.get(1) {
            let want = self.second_premise(rule, &concl, x);
            let have = self.seq(*q);
            if msort(&have.ante) != msort(&want.ante) || msort(&have.succ) != msort(&want.succ) {
                panic!("{}: second premise is {have}, expected {want}", rule.name());
            }
        }
        self.push(concl, Justification::Rule { rule, premises: premises.to_vec(), principal: x.clone() })
    }

    fn second_premise(&self, rule: Rule, c: &Sequent, x: &Formula) -> Sequent {
        let without = |v: &[Formula]| {
            let mut v = v.to_vec();
            remove_first(&mut v, x);
            v
        };
        let with = |v: Vec<Formula>, extra: &[&Formula]| {
            let mut v = v;
            v.extend(extra.iter().map(|f| (*f).clone()));
            v
        };
        match (rule, x.kind()) {
            (Rule::Cut, _) => Sequent::new(with(c.ante.clone(), &[x]), c.succ.clone()),
            (Rule::PL, Kind::Dec(_, l, b)) | (Rule::PosPL, Kind::PosDec(_, l, b)) => {
                Sequent::new(with(without(&c.ante), &[&Formula::lit(*l), b]), c.succ.clone())
            }
            (Rule::PR, Kind::Dec(_, l, b)) => {
                Sequent::new(with(c.ante.clone(), &[&Formula::lit(*l)]), with(without(&c.succ), &[b]))
            }
            (Rule::PosPR, Kind::PosDec(a, _, b)) => Sequent::new(c.ante.clone(), with(without(&c.succ), &[a, b])),
            (Rule::OrL, Kind::Or(_, b)) => Sequent::new(with(without(&c.ante), &[b]), c.succ.clone()),
            _ => unreachable!("rule {} has one premise", rule.name()),
        }
    }

    pub fn cut(&mut self, l1: LineId, l2: LineId, a: &Formula) -> LineId {
        self.rule(Rule::Cut, &[l1, l2], a)
    }

    pub fn wl(&mut self, l: LineId, x: &Formula) -> LineId {
        self.rule(Rule::WL, &[l], x)
    }

    pub fn wr(&mut self, l: LineId, x: &Formula) -> LineId {
        self.rule(Rule::WR, &[l], x)
    }

    pub fn cl(&mut self, l: LineId, x: &Formula) -> LineId {
        self.rule(Rule::CL, &[l], x)
    }

    pub fn cr(&mut self, l: LineId, x: &Formula) -> LineId {
        self.rule(Rule::CR, &[l], x)
    }

    pub fn orl(&mut self, l1: LineId, l2: LineId, x: &Formula) -> LineId {
        self.rule(Rule::OrL, &[l1, l2], x)
    }

    pub fn orr(&mut self, l: LineId, x: &Formula) -> LineId {
        self.rule(Rule::OrR, &[l], x)
    }

    pub fn posl(&mut self, l1: LineId, l2: LineId, x: &Formula) -> LineId {
        self.rule(Rule::PosPL, &[l1, l2], x)
    }

    pub fn posr(&mut self, l1: LineId, l2: LineId, x: &Formula) -> LineId {
        self.rule(Rule::PosPR, &[l1, l2], x)
    }

    pub fn pl(&mut self, l1: LineId, l2: LineId, x: &Formula) -> LineId {
        self.rule(Rule::PL, &[l1, l2], x)
    }

    pub fn pr(&mut self, l1: LineId, l2: LineId, x: &Formula) -> LineId {
        self.rule(Rule::PR, &[l1, l2], x)
    }

    // -- structural conveniences ------------------------------------------------

    pub fn weaken(&mut self, l: LineId, ante: &[Formula], succ: &[Formula]) -> LineId {
        let mut cur = l;
        for f in ante {
            cur = self.wl(cur, f);
        }
        for f in succ {
            cur = self.wr(cur, f);
        }
        cur
    }

    /// Reaches `target` from line `l` by contracting surplus copies and then
    /// weakening. Every formula of `l` must occur in `target`.
    pub fn structural_to(&mut self, l: LineId, target: &Sequent) -> LineId {
        let mut cur = l;
        for left in [true, false] {
            loop {
                let s = self.seq(cur);
                let (have, want) = if left { (&s.ante, &target.ante) } else { (&s.succ, &target.succ) };
                let surplus = have.iter().find(|f| count(have, f) > count(want, f)).cloned();
                match surplus {
                    None => break,
                    Some(f) => {
                        assert!(want.contains(&f), "structural_to: {f} of {} is absent from target {target}", self.seq(cur));
                        cur = if left { self.cl(cur, &f) } else { self.cr(cur, &f) };
                    }
                }
            }
        }
        let s = self.seq(cur).clone();
        let ante = mdiff(&target.ante, &s.ante).expect("antecedent fits after contraction");
        let succ = mdiff(&target.succ, &s.succ).expect("succedent fits after contraction");
        self.weaken(cur, &ante, &succ)
    }

    /// Cut with context splitting: from `Γ1 ⊢ Δ1, a` and `Γ2, a ⊢ Δ2`
    /// derives `Γ1 ∪ Γ2 ⊢ Δ1 ∪ Δ2` (multiset maximum) by weakening both
    /// premises to a shared context first.
    pub fn cut_merge(&mut self, l1: LineId, l2: LineId, a: &Formula) -> LineId {
        let (s1, s2) = (self.seq(l1).clone(), self.seq(l2).clone());
        let mut d1 = s1.succ.clone();
        remove_first(&mut d1, a).unwrap_or_else(|| panic!("cut_merge: {a} not on the right of {s1}"));
        let mut g2 = s2.ante.clone();
        remove_first(&mut g2, a).unwrap_or_else(|| panic!("cut_merge: {a} not on the left of {s2}"));
        let g = mmax(&s1.ante, &g2);
        let d = mmax(&d1, &s2.succ);
        let mut d_a = d.clone();
        d_a.push(a.clone());
        let mut g_a = g.clone();
        g_a.push(a.clone());
        let left = self.structural_to(l1, &Sequent::new(g.clone(), d_a));
        let right = self.structural_to(l2, &Sequent::new(g_a, d));
        self.cut(left, right, a)
    }

    /// `cut_merge` on the unique formula shared by the right of `l1` and
    /// the left of `l2`.
    pub fn trans(&mut self, l1: LineId, l2: LineId) -> LineId {
        let s1 = self.seq(l1);
        let s2 = self.seq(l2);
        let shared: HashSet<&Formula> = s1.succ.iter().filter(|f| s2.ante.contains(f)).collect();
        assert_eq!(shared.len(), 1, "trans: ambiguous or missing cut formula between {s1} and {s2}");
        let a = (*shared.iter().next().unwrap()).clone();
        self.cut_merge(l1, l2, &a)
    }

    /// Folds [`Builder::trans`] over a chain of lines.
    pub fn chain(&mut self, ls: &[LineId]) -> LineId {
        let mut cur = ls[0];
        for &l in &ls[1..] {
            cur = self.trans(cur, l);
        }
        cur
    }

    // -- import and export ------------------------------------------------------

    /// Replays `p` into this builder, merging axioms. Hypothesis lines of `p`
    /// are replaced by the lines given in `plug`, which must prove the same
    /// sequents; unplugged hypotheses are carried over.
    pub fn import(&mut self, p: &Proof, plug: &HashMap<String, LineId>) -> LineId {
        self.ax.extend_from(&p.axioms).expect("imported axioms are consistent");
        let mut map = Vec::with_capacity(p.lines.len());
        for line in &p.lines {
            let id = match &line.just {
                Justification::Hypothesis(h) if plug.contains_key(h) => {
                    let l = plug[h];
                    assert!(self.seq(l).same_as(&line.seq), "plugged line for {h} proves a different sequent");
                    l
                }
                Justification::Hypothesis(h) => self.hyp(h, line.seq.clone()),
                Justification::Rule { rule, premises, principal } => {
                    let prem: Vec<LineId> = premises.iter().map(|i| map[*i]).collect();
                    self.push(
                        line.seq.clone(),
                        Justification::Rule { rule: *rule, premises: prem, principal: principal.clone() },
                    )
                }
                j => self.push(line.seq.clone(), j.clone()),
            };
            map.push(id);
        }
        *map.last().expect("non-empty proof")
    }

    /// Extracts the lines `root` depends on, renumbered, with the axiom set
    /// pruned to the cones of the extension variables that occur.
    pub fn finish(&self, root: LineId, intermediate: bool) -> Proof {
        let mut keep = vec![false; root + 1];
        keep[root] = true;
        for i in (0..=root).rev() {
            if keep[i] {
                for &q in self.lines[i].just.premises() {
                    keep[q] = true;
                }
            }
        }
        let mut renum = vec![usize::MAX; root + 1];
        let mut lines = Vec::new();
        for i in 0..=root {
            if !keep[i] {
                continue;
            }
            renum[i] = lines.len();
            let mut line = self.lines[i].clone();
            if let Justification::Rule { premises, .. } = &mut line.just {
                for q in premises.iter_mut() {
                    *q = renum[*q];
                }
            }
            lines.push(line);
        }
        let mut used: Vec<ExtVar> = Vec::new();
        let mut seen = HashSet::new();
        for l in &lines {
            if let Justification::ExtLR(e) | Justification::ExtRL(e) = &l.just {
                if seen.insert(e.clone()) {
                    used.push(e.clone());
                }
            }
            for f in l.seq.formulas() {
                for e in f.ext_vars() {
                    if seen.insert(e.clone()) {
                        used.push(e);
                    }
                }
            }
        }
        let mut needed: HashSet<ExtVar> = HashSet::new();
        let mut stack = used;
        while let Some(e) = stack.pop() {
            if !needed.insert(e.clone()) {
                continue;
            }
            if let Some(b) = self.ax.body(&e) {
                stack.extend(b.ext_vars());
            }
            if let ExtVar::RefThr { left, right, .. } = &e {
                stack.extend(left.ext_vars());
                stack.extend(right.ext_vars());
            }
        }
        let mut axioms = ExtAxiomSet::new();
        for (e, b) in self.ax.iter() {
            if needed.contains(e) {
                axioms.push(e.clone(), b.clone()).expect("fresh set");
            }
        }
        let used_hyps: HashSet<&str> = lines
            .iter()
            .filter_map(|l| match &l.just {
                Justification::Hypothesis(h) => Some(h.as_str()),
                _ => None,
            })
            .collect();
        let hypotheses = self.hyps.iter().filter(|(n, _)| used_hyps.contains(n.as_str())).cloned().collect();
        Proof { dialect: self.dialect.clone(), axioms, hypotheses, lines, intermediate }
    }

    /// Like [`Builder::finish`], but the conclusion is printed exactly as
    /// `target`, which must be the same multiset sequent.
    pub fn finish_as(&self, root: LineId, target: &Sequent, intermediate: bool) -> Proof {
        let mut p = self.finish(root, intermediate);
        let last = p.lines.last_mut().expect("non-empty");
        assert!(last.seq.same_as(target), "conclusion {} differs from {target}", last.seq);
        last.seq = target.clone();
        p
    }
}
