//! Generators for the basic positive lemmas and the counting library.
//!
//! All generators write into one [`Lemmas`] store wrapping a [`Builder`].
//! A lemma instance is identified by the sequent it proves: before doing
//! any work a generator asks the builder whether that sequent already has a
//! line, so inductions that request the same instance along several paths
//! (every threshold induction does) produce it once.

use std::collections::HashMap;
use std::sync::OnceLock;

use thiserror::Error;

use crate::dialect::Dialect;
use crate::sequent::{prove_by_search, prove_minimal, Builder, Justification, LineId, Proof, Sequent};
use crate::term::{ExtAxiomSet, ExtVar, Formula, Kind, Literal, PropVar, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LemmaError {
    #[error("formula {0} is not positive")]
    NotPositive(String),
    #[error("{0} is not a permutation of the word")]
    NotPermutation(String),
    #[error("{var} does not occur in the word")]
    NotInWord { var: PropVar },
    #[error("index {index} is out of range for a word of length {len}")]
    Index { index: usize, len: usize },
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("hypothesis {name} is {got}, expected the shape {want}")]
    HypothesisShape { name: String, got: String, want: String },
}

/// Equivalence `a ⊢ b` and `b ⊢ a` as a pair of lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Equiv {
    pub fwd: LineId,
    pub bwd: LineId,
}

fn drop_one(v: &[Formula], x: &Formula) -> Option<Vec<Formula>> {
    let i = v.iter().position(|y| y == x)?;
    let mut v = v.to_vec();
    v.remove(i);
    Some(v)
}

fn plus(v: &[Formula], extra: &[&Formula]) -> Vec<Formula> {
    let mut v = v.to_vec();
    v.extend(extra.iter().map(|f| (*f).clone()));
    v
}

/// Proof store for lemma instances.
pub struct Lemmas {
    pub b: Builder,
}

impl Lemmas {
    pub fn new(dialect: Dialect, ax: ExtAxiomSet) -> Self {
        Lemmas { b: Builder::new(dialect, ax) }
    }

    pub fn positive() -> Self {
        Self::new(Dialect::Plus, ExtAxiomSet::new())
    }

    pub fn from_builder(b: Builder) -> Self {
        Lemmas { b }
    }

    pub fn into_builder(self) -> Builder {
        self.b
    }

    fn known(&self, ante: &[Formula], succ: &[Formula]) -> Option<LineId> {
        self.b.find(&Sequent::new(ante.to_vec(), succ.to_vec()))
    }

    /// `thr[word; k]` as a formula, instantiating its axiom cone.
    pub fn thr(&mut self, word: &[PropVar], k: i64) -> Formula {
        Formula::ext(self.b.ax.instantiate_thr(word, k))
    }

    fn thr_body(&mut self, word: &[PropVar], k: i64) -> Formula {
        let t = self.thr(word, k);
        self.b.ax.body(t.as_ext().expect("thr is an extension variable")).expect("instantiated").clone()
    }

    /// `thr[word; k] ≡ body`, straight from the axioms.
    fn thr_unfold(&mut self, word: &[PropVar], k: i64) -> Equiv {
        let t = self.thr(word, k);
        let e = t.as_ext().expect("extension variable").clone();
        Equiv { fwd: self.b.ext_l(&e), bwd: self.b.ext_r(&e) }
    }

    /// Cut `l1 = Γ1 ⊢ Δ1, a` against `l2 = Γ2, a ⊢ Δ2` after weakening
    /// both to the context `ante ⊢ succ`, which is the conclusion.
    pub fn cut_into(&mut self, l1: LineId, l2: LineId, a: &Formula, ante: &[Formula], succ: &[Formula]) -> LineId {
        let left = self.b.structural_to(l1, &Sequent::new(ante.to_vec(), plus(succ, &[a])));
        let right = self.b.structural_to(l2, &Sequent::new(plus(ante, &[a]), succ.to_vec()));
        self.b.cut(left, right, a)
    }

    /// Composes two equivalences through their shared middle formula.
    pub fn compose(&mut self, x: Equiv, y: Equiv, mid: &Formula) -> Equiv {
        Equiv { fwd: self.b.cut_merge(x.fwd, y.fwd, mid), bwd: self.b.cut_merge(y.bwd, x.bwd, mid) }
    }

    /// Folds [`Lemmas::compose`] over a chain `f0 ≡ f1 ≡ … ≡ fn`, where
    /// `steps[i]` proves `f_i ≡ f_{i+1}`.
    pub fn equiv_chain(&mut self, fs: &[Formula], steps: &[Equiv]) -> Equiv {
        assert_eq!(fs.len(), steps.len() + 1);
        let mut acc = steps[0];
        for (i, s) in steps.iter().enumerate().skip(1) {
            acc = self.compose(acc, *s, &fs[i]);
        }
        acc
    }

    // -- identity and truth conditions ----------------------------------------

    /// `a ⊢ a` by induction along the axiom order; subformula identities
    /// are shared through the store.
    pub fn identity(&mut self, a: &Formula) -> LineId {
        if let Some(l) = self.known(std::slice::from_ref(a), std::slice::from_ref(a)) {
            return l;
        }
        match a.kind().clone() {
            Kind::Lit(l) => self.b.id(l),
            Kind::Zero => {
                let z = self.b.ax0();
                self.b.wr(z, a)
            }
            Kind::One => {
                let o = self.b.ax1();
                self.b.wl(o, a)
            }
            Kind::Ext(e) => {
                // The identity on the body would sit between the two axiom
                // lines, but a cut against an identity returns the other
                // premise, so the two axioms are cut directly.
                let body = self.b.ax.body(&e).unwrap_or_else(|| panic!("no axiom for {e}")).clone();
                let l = self.b.ext_l(&e);
                let r = self.b.ext_r(&e);
                self.b.cut_merge(l, r, &body)
            }
            Kind::Or(x, y) => {
                let ix = self.identity(&x);
                let iy = self.identity(&y);
                let lx = self.b.wr(ix, &y);
                let ly = self.b.structural_to(iy, &Sequent::new(vec![y.clone()], vec![x.clone(), y.clone()]));
                let both = self.b.orl(lx, ly, a);
                self.b.orr(both, a)
            }
            Kind::PosDec(x, p, y) => {
                let pf = Formula::lit(p);
                let ix = self.identity(&x);
                let iy = self.identity(&y);
                let ip = self.b.id(p);
                let x1 = self.b.wr(ix, &pf);
                let x2 = self.b.wr(ix, &y);
                let left = self.b.posr(x1, x2, a);
                let y1 = self.b.structural_to(ip, &Sequent::new(vec![pf.clone(), y.clone()], vec![x.clone(), pf.clone()]));
                let y2 = self.b.structural_to(iy, &Sequent::new(vec![pf.clone(), y.clone()], vec![x.clone(), y.clone()]));
                let right = self.b.posr(y1, y2, a);
                self.b.posl(left, right, a)
            }
            // General decisions only arise in the non-positive dialects.
            Kind::Dec(x, p, y) => self.dec_identity(&x, p, &y, a),
        }
    }

    /// `dec(x,p,y) ⊢ dec(x,p,y)` with the general decision rules: `pL`
    /// over `x ⊢ dec, p` and `p, y ⊢ dec`, each obtained by `pR`.
    fn dec_identity(&mut self, x: &Formula, p: Literal, y: &Formula, a: &Formula) -> LineId {
        let pf = Formula::lit(p);
        let ix = self.identity(x);
        let iy = self.identity(y);
        let ip = self.b.id(p);
        let a1 = self.b.structural_to(ix, &Sequent::new(vec![x.clone()], vec![pf.clone(), x.clone(), pf.clone()]));
        let a2 = self.b.structural_to(ip, &Sequent::new(vec![x.clone(), pf.clone()], vec![pf.clone(), y.clone()]));
        let left = self.b.pr(a1, a2, a);
        let b1 = self.b.structural_to(ip, &Sequent::new(vec![pf.clone(), y.clone()], vec![x.clone(), pf.clone()]));
        let b2 = self.b.structural_to(iy, &Sequent::new(vec![pf.clone(), y.clone(), pf.clone()], vec![y.clone()]));
        let right = self.b.pr(b1, b2, a);
        self.b.pl(left, right, a)
    }

    /// `pdec(a,l,b) ⊢ a, l`
    pub fn truth1(&mut self, a: &Formula, l: Literal, b: &Formula) -> LineId {
        let d = Formula::pdec(a.clone(), l, b.clone());
        let lf = Formula::lit(l);
        if let Some(x) = self.known(&[d.clone()], &[a.clone(), lf.clone()]) {
            return x;
        }
        let ia = self.identity(a);
        let first = self.b.wr(ia, &lf);
        let il = self.b.id(l);
        let second = self.b.structural_to(il, &Sequent::new(vec![lf.clone(), b.clone()], vec![a.clone(), lf]));
        self.b.posl(first, second, &d)
    }

    /// `pdec(a,l,b) ⊢ a, b`
    pub fn truth2(&mut self, a: &Formula, l: Literal, b: &Formula) -> LineId {
        let d = Formula::pdec(a.clone(), l, b.clone());
        let lf = Formula::lit(l);
        if let Some(x) = self.known(&[d.clone()], &[a.clone(), b.clone()]) {
            return x;
        }
        let ia = self.identity(a);
        let first = self.b.wr(ia, b);
        let ib = self.identity(b);
        let second = self.b.structural_to(ib, &Sequent::new(vec![lf, b.clone()], vec![a.clone(), b.clone()]));
        self.b.posl(first, second, &d)
    }

    /// `a ⊢ pdec(a,l,b)`
    pub fn truth3(&mut self, a: &Formula, l: Literal, b: &Formula) -> LineId {
        let d = Formula::pdec(a.clone(), l, b.clone());
        if let Some(x) = self.known(&[a.clone()], &[d.clone()]) {
            return x;
        }
        let ia = self.identity(a);
        let first = self.b.wr(ia, &Formula::lit(l));
        let second = self.b.wr(ia, b);
        self.b.posr(first, second, &d)
    }

    /// `l, b ⊢ pdec(a,l,b)`
    pub fn truth4(&mut self, a: &Formula, l: Literal, b: &Formula) -> LineId {
        let d = Formula::pdec(a.clone(), l, b.clone());
        let lf = Formula::lit(l);
        if let Some(x) = self.known(&[lf.clone(), b.clone()], &[d.clone()]) {
            return x;
        }
        let il = self.b.id(l);
        let first = self.b.structural_to(il, &Sequent::new(vec![lf.clone(), b.clone()], vec![a.clone(), lf.clone()]));
        let ib = self.identity(b);
        let second = self.b.structural_to(ib, &Sequent::new(vec![lf, b.clone()], vec![a.clone(), b.clone()]));
        self.b.posr(first, second, &d)
    }

    // -- replacement and medial -------------------------------------------------

    /// From `h1 = Γ, a ⊢ Δ, a2` and `h2 = Γ, b ⊢ Δ, b2` derives
    /// `Γ, pdec(a,l,b) ⊢ Δ, pdec(a2,l,b2)`. The contexts are read off `h1`.
    #[allow(clippy::too_many_arguments)]
    pub fn replace(
        &mut self,
        h1: LineId,
        h2: LineId,
        a: &Formula,
        a2: &Formula,
        b: &Formula,
        b2: &Formula,
        l: Literal,
    ) -> Result<LineId, LemmaError> {
        let s1 = self.b.seq(h1).clone();
        let shape = |name: &str, got: &Sequent, want: String| LemmaError::HypothesisShape {
            name: name.to_string(),
            got: got.to_string(),
            want,
        };
        let g = drop_one(&s1.ante, a).ok_or_else(|| shape("h1", &s1, format!("Γ, {a} ⊢ Δ, {a2}")))?;
        let d = drop_one(&s1.succ, a2).ok_or_else(|| shape("h1", &s1, format!("Γ, {a} ⊢ Δ, {a2}")))?;
        let want2 = Sequent::new(plus(&g, &[b]), plus(&d, &[b2]));
        let s2 = self.b.seq(h2).clone();
        if !s2.same_as(&want2) {
            return Err(shape("h2", &s2, want2.to_string()));
        }
        let src = Formula::pdec(a.clone(), l, b.clone());
        let dst = Formula::pdec(a2.clone(), l, b2.clone());
        if let Some(x) = self.known(&plus(&g, &[&src]), &plus(&d, &[&dst])) {
            return Ok(x);
        }
        let t3 = self.truth3(a2, l, b2);
        let left = self.cut_into(h1, t3, a2, &plus(&g, &[a]), &plus(&d, &[&dst]));
        let t4 = self.truth4(a2, l, b2);
        let lf = Formula::lit(l);
        let right = self.cut_into(h2, t4, b2, &plus(&g, &[&lf, b]), &plus(&d, &[&dst]));
        Ok(self.b.posl(left, right, &src))
    }

    /// Both directions of the positive medial
    /// `pdec(pdec(a,q,b),p,pdec(c,q,d)) ≡ pdec(pdec(a,p,c),q,pdec(b,p,d))`,
    /// replayed from a proof of the four-atom skeleton found by search.
    pub fn medial(&mut self, a: &Formula, b: &Formula, c: &Formula, d: &Formula, p: Literal, q: Literal) -> Equiv {
        let (fwd_skel, bwd_skel) = medial_skeletons();
        let [sa, sb, sc, sd, sp, sq, _, _] = SKELETON_VARS;
        let sigma: HashMap<PropVar, Formula> = [
            (sa, a.clone()),
            (sb, b.clone()),
            (sc, c.clone()),
            (sd, d.clone()),
            (sp, Formula::lit(p)),
            (sq, Formula::lit(q)),
        ]
        .into_iter()
        .collect();
        let sub = Subst { atoms: sigma, ext: HashMap::new(), hyps: HashMap::new() };
        Equiv { fwd: self.replay(fwd_skel, &sub), bwd: self.replay(bwd_skel, &sub) }
    }

    /// Inductive step of the case analysis, `thr[p w2; k] ≡ thr[q p x; k]`
    /// where `w2` is `x` with `q` inserted and `ih0`, `ih1` prove
    /// `thr[w2; k] ≡ thr[q x; k]` and the same at `k-1`. Replayed from a
    /// size-minimal skeleton in which the thresholds over `w2` and `x` are
    /// atoms and the remaining thresholds are extension variables.
    #[allow(clippy::too_many_arguments)]
    fn case_step(&mut self, w2: &[PropVar], x: &[PropVar], p: PropVar, q: PropVar, k: i64, ih0: Equiv, ih1: Equiv) -> Equiv {
        let (fwd_skel, bwd_skel) = case_skeletons();
        let [s_a, s_b, sa, sb, sc, sp, sq, _] = SKELETON_VARS;
        let pw2: Word = [p].iter().chain(w2).copied().collect();
        let qx: Word = [q].iter().chain(x).copied().collect();
        let px: Word = [p].iter().chain(x).copied().collect();
        let qpx: Word = [q, p].iter().chain(x).copied().collect();
        let mut atoms = HashMap::new();
        atoms.insert(s_a, self.thr(w2, k));
        atoms.insert(s_b, self.thr(w2, k - 1));
        for (s, kk) in [(sa, k), (sb, k - 1), (sc, k - 2)] {
            atoms.insert(s, self.thr(x, kk));
        }
        atoms.insert(sp, Formula::var(p));
        atoms.insert(sq, Formula::var(q));
        let mut ext = HashMap::new();
        let named = [(&pw2, k), (&qx, k), (&qx, k - 1), (&px, k), (&px, k - 1), (&qpx, k)];
        for (i, (w, kk)) in named.into_iter().enumerate() {
            let t = self.thr(w, kk);
            ext.insert(ExtVar::Plain(i as u32), t.as_ext().expect("extension variable").clone());
        }
        let fwd_hyps = [("h0".to_string(), ih0.fwd), ("h1".to_string(), ih1.fwd)].into_iter().collect();
        let bwd_hyps = [("h0".to_string(), ih0.bwd), ("h1".to_string(), ih1.bwd)].into_iter().collect();
        let mut sub = Subst { atoms, ext, hyps: fwd_hyps };
        let fwd = self.replay(fwd_skel, &sub);
        sub.hyps = bwd_hyps;
        let bwd = self.replay(bwd_skel, &sub);
        Equiv { fwd, bwd }
    }

    /// Replays a skeleton proof under a substitution of its atoms and a
    /// renaming of its extension variables.
    /// Identity lines on substituted atoms become general identities.
    fn replay(&mut self, p: &Proof, sigma: &Subst) -> LineId {
        let mut map = Vec::with_capacity(p.lines.len());
        for line in &p.lines {
            let id = match &line.just {
                Justification::Axiom0 => self.b.ax0(),
                Justification::Axiom1 => self.b.ax1(),
                Justification::Id(l) => {
                    let img = subst_plain(&Formula::lit(*l), sigma);
                    self.identity(&img)
                }
                Justification::ExtLR(e) => self.b.ext_l(&sigma.ext[e]),
                Justification::ExtRL(e) => self.b.ext_r(&sigma.ext[e]),
                Justification::Hypothesis(h) => sigma.hyps[h],
                Justification::Rule { rule, premises, principal } => {
                    let prem: Vec<LineId> = premises.iter().map(|i| map[*i]).collect();
                    let x = subst_plain(principal, sigma);
                    self.b.rule(*rule, &prem, &x)
                }
                j => panic!("skeleton proofs only use axioms, identities, extension axioms and rules, found {}", j.label()),
            };
            map.push(id);
        }
        *map.last().expect("non-empty skeleton")
    }

    // -- threshold monotonicity -------------------------------------------------

    /// `⊢ thr[w; 0]`
    pub fn mono0(&mut self, w: &[PropVar]) -> LineId {
        let t = self.thr(w, 0);
        if let Some(x) = self.known(&[], std::slice::from_ref(&t)) {
            return x;
        }
        let e = t.as_ext().expect("extension variable").clone();
        let unfold = self.b.ext_r(&e);
        let body = self.thr_body(w, 0);
        let body_line = match w.split_first() {
            None => self.b.ax1(),
            Some((p, rest)) => {
                let ih = self.mono0(rest);
                let a = self.thr(rest, 0);
                let b = self.thr(rest, -1);
                let t3 = self.truth3(&a, Literal::pos(*p), &b);
                self.b.cut_merge(ih, t3, &a)
            }
        };
        self.b.cut_merge(body_line, unfold, &body)
    }

    /// `thr[w; k+1] ⊢ thr[w; k]` for `k ≥ 0`.
    pub fn mono1(&mut self, w: &[PropVar], k: i64) -> Result<LineId, LemmaError> {
        if k < 0 {
            return Err(LemmaError::Range(format!("monotonicity needs k ≥ 0, got {k}")));
        }
        let hi = self.thr(w, k + 1);
        let lo = self.thr(w, k);
        if let Some(x) = self.known(std::slice::from_ref(&hi), std::slice::from_ref(&lo)) {
            return Ok(x);
        }
        Ok(match w.split_first() {
            None => {
                let unfold = self.b.ext_l(hi.as_ext().expect("extension variable"));
                let z = self.b.ax0();
                let absurd = self.b.cut_merge(unfold, z, &Formula::zero());
                self.b.wr(absurd, &lo)
            }
            // thr[w;0] is provable outright, while thr[w';0] ⊢ thr[w';-1]
            // is not valid, so the replacement step cannot be used here.
            Some(_) if k == 0 => {
                let top = self.mono0(w);
                self.b.wl(top, &hi)
            }
            Some((p, rest)) => {
                let h1 = self.mono1(rest, k)?;
                let h2 = self.mono1(rest, k - 1)?;
                let (r1, r0, rm) = (self.thr(rest, k + 1), self.thr(rest, k), self.thr(rest, k - 1));
                let rep = self.replace(h1, h2, &r1, &r0, &r0, &rm, Literal::pos(*p))?;
                let down = self.b.ext_l(hi.as_ext().expect("extension variable"));
                let up = self.b.ext_r(lo.as_ext().expect("extension variable"));
                self.b.chain(&[down, rep, up])
            }
        })
    }

    /// `thr[w; k] ⊢` for `k > |w|`.
    pub fn mono2(&mut self, w: &[PropVar], k: i64) -> Result<LineId, LemmaError> {
        if k <= w.len() as i64 {
            return Err(LemmaError::Range(format!("thr[{}; {k}] is satisfiable", word_text(w))));
        }
        let t = self.thr(w, k);
        if let Some(x) = self.known(std::slice::from_ref(&t), &[]) {
            return Ok(x);
        }
        let unfold = self.b.ext_l(t.as_ext().expect("extension variable"));
        Ok(match w.split_first() {
            None => {
                let z = self.b.ax0();
                self.b.cut_merge(unfold, z, &Formula::zero())
            }
            Some((p, rest)) => {
                let (a, b) = (self.thr(rest, k), self.thr(rest, k - 1));
                let body = Formula::pdec(a.clone(), Literal::pos(*p), b.clone());
                let t2 = self.truth2(&a, Literal::pos(*p), &b);
                let split = self.b.cut_merge(unfold, t2, &body);
                let m = self.mono1(rest, k - 1)?;
                let one = self.b.cut_merge(split, m, &a);
                let one = self.b.structural_to(one, &Sequent::new(vec![t.clone()], vec![b.clone()]));
                let ih = self.mono2(rest, k - 1)?;
                self.b.cut_merge(one, ih, &b)
            }
        })
    }

    // -- symmetry -----------------------------------------------------------------

    /// `thr[pre q post; k] ≡ thr[q pre post; k]` by induction on `pre`.
    pub fn case_analysis(&mut self, pre: &[PropVar], q: PropVar, post: &[PropVar], k: i64) -> Equiv {
        let w: Word = pre.iter().chain([&q]).chain(post).copied().collect();
        let v: Word = [q].iter().chain(pre).chain(post).copied().collect();
        let (tw, tv) = (self.thr(&w, k), self.thr(&v, k));
        if let (Some(fwd), Some(bwd)) = (
            self.known(std::slice::from_ref(&tw), std::slice::from_ref(&tv)),
            self.known(std::slice::from_ref(&tv), std::slice::from_ref(&tw)),
        ) {
            return Equiv { fwd, bwd };
        }
        let Some((&p, pre2)) = pre.split_first() else {
            let id = self.identity(&tw);
            return Equiv { fwd: id, bwd: id };
        };
        // Both sides are constant at these thresholds, which also keeps the
        // induction from descending through every smaller threshold.
        if k == 0 {
            let (a, b) = (self.mono0(&v), self.mono0(&w));
            return Equiv { fwd: self.b.wl(a, &tw), bwd: self.b.wl(b, &tv) };
        }
        if k > w.len() as i64 {
            let a = self.mono2(&w, k).expect("k exceeds the length");
            let b = self.mono2(&v, k).expect("k exceeds the length");
            return Equiv { fwd: self.b.wr(a, &tv), bwd: self.b.wr(b, &tw) };
        }
        let w2: Word = pre2.iter().chain([&q]).chain(post).copied().collect();
        let x: Word = pre2.iter().chain(post).copied().collect();

        let ih0 = self.case_analysis(pre2, q, post, k);
        let ih1 = self.case_analysis(pre2, q, post, k - 1);
        self.case_step(&w2, &x, p, q, k, ih0, ih1)
    }

    /// `thr[w; k] ≡ thr[target; k]` for a permutation `target` of `w`,
    /// moving the last target variable to the front first.
    pub fn symmetry(&mut self, w: &[PropVar], target: &[PropVar], k: i64) -> Result<Equiv, LemmaError> {
        let mut a = w.to_vec();
        let mut b = target.to_vec();
        a.sort();
        b.sort();
        if a != b {
            return Err(LemmaError::NotPermutation(word_text(target)));
        }
        let n = w.len();
        // The longest suffix of the target already in order inside `w` never
        // has to move: the moved variables end up in front of it.
        let mut keep = 0;
        let mut pos = n;
        while keep < n {
            match w[..pos].iter().rposition(|v| *v == target[n - 1 - keep]) {
                Some(p) => {
                    pos = p;
                    keep += 1;
                }
                None => break,
            }
        }
        let mut cur = w.to_vec();
        let mut acc: Option<Equiv> = None;
        for i in (0..n - keep).rev() {
            let lo = n - keep - 1 - i;
            let j = lo + cur[lo..].iter().position(|v| *v == target[i]).expect("permutation");
            if j == 0 {
                continue;
            }
            let step = self.case_analysis(&cur[..j], cur[j], &cur[j + 1..], k);
            let mid = self.thr(&cur, k);
            acc = Some(match acc {
                None => step,
                Some(prev) => self.compose(prev, step, &mid),
            });
            let q = cur.remove(j);
            cur.insert(0, q);
        }
        assert_eq!(cur, target);
        Ok(match acc {
            Some(e) => e,
            None => {
                let t = self.thr(w, k);
                let id = self.identity(&t);
                Equiv { fwd: id, bwd: id }
            }
        })
    }

    // -- merging and splitting ------------------------------------------------------

    /// `thr[p; k], thr[q; l] ⊢ thr[p q; k+l]`
    pub fn merge(&mut self, p: &[PropVar], q: &[PropVar], k: i64, l: i64) -> LineId {
        let pq: Word = p.iter().chain(q).copied().collect();
        let (tp, tq, tpq) = (self.thr(p, k), self.thr(q, l), self.thr(&pq, k + l));
        if let Some(x) = self.known(&[tp.clone(), tq.clone()], std::slice::from_ref(&tpq)) {
            return x;
        }
        match p.split_first() {
            None if k == 0 => {
                let id = self.identity(&tq);
                self.b.wl(id, &tp)
            }
            None => {
                let unfold = self.b.ext_l(tp.as_ext().expect("extension variable"));
                let z = self.b.ax0();
                let absurd = self.b.cut_merge(unfold, z, &Formula::zero());
                self.b.weaken(absurd, &[tq], &[tpq])
            }
            Some((v, rest)) => {
                let h1 = self.merge(rest, q, k, l);
                let h2 = self.merge(rest, q, k - 1, l);
                let rq: Word = rest.iter().chain(q).copied().collect();
                let (a, b) = (self.thr(rest, k), self.thr(rest, k - 1));
                let (a2, b2) = (self.thr(&rq, k + l), self.thr(&rq, k + l - 1));
                let lit = Literal::pos(*v);
                let rep = self.replace(h1, h2, &a, &a2, &b, &b2, lit).expect("merge shapes");
                let down = self.b.ext_l(tp.as_ext().expect("extension variable"));
                let up = self.b.ext_r(tpq.as_ext().expect("extension variable"));
                let body_p = Formula::pdec(a, lit, b);
                let body_pq = Formula::pdec(a2, lit, b2);
                let x = self.b.cut_merge(down, rep, &body_p);
                self.b.cut_merge(x, up, &body_pq)
            }
        }
    }

    /// `thr[p q; k+l] ⊢ thr[p; k+1], thr[q; l]` for `k ≥ -1` and `l ≥ 0`.
    pub fn split(&mut self, p: &[PropVar], q: &[PropVar], k: i64, l: i64) -> Result<LineId, LemmaError> {
        if k < -1 || l < 0 {
            return Err(LemmaError::Range(format!("split needs k ≥ -1 and l ≥ 0, got k = {k}, l = {l}")));
        }
        let pq: Word = p.iter().chain(q).copied().collect();
        let (tpq, tp, tq) = (self.thr(&pq, k + l), self.thr(p, k + 1), self.thr(q, l));
        if let Some(x) = self.known(std::slice::from_ref(&tpq), &[tp.clone(), tq.clone()]) {
            return Ok(x);
        }
        // At k = -1 the left threshold is thr[p; 0], which holds outright;
        // the base case below would otherwise need thr[q; l-1] ⊢ thr[q; l].
        if k == -1 {
            let top = self.mono0(p);
            return Ok(self.b.weaken(top, &[tpq], &[tq]));
        }
        Ok(match p.split_first() {
            None => {
                let mut steps = Vec::new();
                for j in (l..k + l).rev() {
                    steps.push(self.mono1(q, j)?);
                }
                let down = if steps.is_empty() { self.identity(&tq) } else { self.b.chain(&steps) };
                self.b.wr(down, &tp)
            }
            Some((v, rest)) => {
                let h1 = self.split(rest, q, k, l)?;
                let h2 = self.split(rest, q, k - 1, l)?;
                let rq: Word = rest.iter().chain(q).copied().collect();
                let (a, b) = (self.thr(&rq, k + l), self.thr(&rq, k + l - 1));
                let (a2, b2) = (self.thr(rest, k + 1), self.thr(rest, k));
                let lit = Literal::pos(*v);
                let rep = self.replace(h1, h2, &a, &a2, &b, &b2, lit)?;
                let down = self.b.ext_l(tpq.as_ext().expect("extension variable"));
                let up = self.b.ext_r(tp.as_ext().expect("extension variable"));
                let x = self.b.cut_merge(down, rep, &Formula::pdec(a, lit, b));
                self.b.cut_merge(x, up, &Formula::pdec(a2, lit, b2))
            }
        })
    }

    // -- unit thresholds and increment --------------------------------------------

    /// `q ≡ thr[q; 1]`
    pub fn unit_eq(&mut self, q: PropVar) -> Equiv {
        let qf = Formula::var(q);
        let t = self.thr(&[q], 1);
        if let (Some(fwd), Some(bwd)) = (self.known(&[qf.clone()], &[t.clone()]), self.known(&[t.clone()], &[qf.clone()])) {
            return Equiv { fwd, bwd };
        }
        let (zero, one) = (Formula::zero(), Formula::one());
        let (e1, e0) = (self.thr(&[], 1), self.thr(&[], 0));
        let ql = Literal::pos(q);
        let body = Formula::pdec(e1.clone(), ql, e0.clone());
        let simple = Formula::pdec(zero.clone(), ql, one.clone());
        let unfold = self.thr_unfold(&[q], 1);
        let u1 = self.thr_unfold(&[], 1);
        let u0 = self.thr_unfold(&[], 0);

        let t4 = self.truth4(&zero, ql, &one);
        let ax1 = self.b.ax1();
        let q_simple = self.b.cut_merge(ax1, t4, &one);
        let ax0 = self.b.ax0();
        let zero_e1 = self.b.wr(ax0, &e1);
        let rep = self.replace(zero_e1, u0.bwd, &zero, &e1, &one, &e0, ql).expect("unit shapes");
        let fwd = self.b.chain(&[q_simple, rep, unfold.bwd]);

        let one_e0 = self.b.wl(ax1, &e0);
        let rep = self.replace(u1.fwd, one_e0, &e1, &zero, &e0, &one, ql).expect("unit shapes");
        let t1 = self.truth1(&zero, ql, &one);
        let simple_q = self.b.cut_merge(t1, ax0, &zero);
        let x = self.b.cut_merge(unfold.fwd, rep, &body);
        let bwd = self.b.cut_merge(x, simple_q, &simple);
        Equiv { fwd, bwd }
    }

    /// `qs[j] ⊢ thr[qs; 1]`
    pub fn unit(&mut self, qs: &[PropVar], j: usize) -> Result<LineId, LemmaError> {
        if j >= qs.len() {
            return Err(LemmaError::Index { index: j, len: qs.len() });
        }
        let eq = self.unit_eq(qs[j]);
        if qs.len() == 1 {
            return Ok(eq.fwd);
        }
        let c = |i: usize| i64::from(i <= j);
        let last = qs.len() - 1;
        let start = self.thr(&qs[last..], c(last));
        let mut cur = self.identity(&start);
        for i in (0..last).rev() {
            let m = self.merge(&qs[i..=i], &qs[i + 1..], i64::from(i == j), c(i + 1));
            let mid = self.thr(&qs[i + 1..], c(i + 1));
            cur = self.b.cut_merge(cur, m, &mid);
        }
        for i in (0..qs.len()).filter(|i| *i != j) {
            let top = self.mono0(&qs[i..=i]);
            let t = self.thr(&qs[i..=i], 0);
            cur = self.b.cut_merge(top, cur, &t);
        }
        let t = self.thr(&qs[j..=j], 1);
        Ok(self.b.cut_merge(eq.fwd, cur, &t))
    }

    /// `p_i, thr[p∖i; k] ⊢ thr[p; k+1]` and `thr[p; k] ⊢ p_i, thr[p∖i; k]`.
    pub fn thresh_increment(&mut self, p: &[PropVar], i: usize, k: i64) -> Result<(LineId, LineId), LemmaError> {
        if i >= p.len() {
            return Err(LemmaError::Index { index: i, len: p.len() });
        }
        if k < 0 {
            return Err(LemmaError::Range(format!("increment needs k ≥ 0, got {k}")));
        }
        let pi = p[i];
        let rest: Word = p.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
        let front: Word = [pi].iter().chain(&rest).copied().collect();
        let eq = self.unit_eq(pi);
        let single = self.thr(&[pi], 1);

        let m = self.merge(&[pi], &rest, 1, k);
        let mut left = self.b.cut_merge(eq.fwd, m, &single);
        if i > 0 {
            let ca = self.case_analysis(&p[..i], pi, &p[i + 1..], k + 1);
            let t = self.thr(&front, k + 1);
            left = self.b.cut_merge(left, ca.bwd, &t);
        }

        let s = self.split(&[pi], &rest, 0, k)?;
        let mut right = self.b.cut_merge(s, eq.bwd, &single);
        if i > 0 {
            let ca = self.case_analysis(&p[..i], pi, &p[i + 1..], k);
            let t = self.thr(&front, k);
            right = self.b.cut_merge(ca.fwd, right, &t);
        }
        Ok((left, right))
    }
}

fn word_text(w: &[PropVar]) -> String {
    w.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

/// Atoms of the lemma skeletons.
/// They sit at the top of the index space so that they never collide with
/// the variables of a caller.
const SKELETON_VARS: [PropVar; 8] = [
    PropVar(u32::MAX - 7),
    PropVar(u32::MAX - 6),
    PropVar(u32::MAX - 5),
    PropVar(u32::MAX - 4),
    PropVar(u32::MAX - 3),
    PropVar(u32::MAX - 2),
    PropVar(u32::MAX - 1),
    PropVar(u32::MAX),
];

fn medial_sides() -> (Formula, Formula) {
    let [a, b, c, d] = [0, 1, 2, 3].map(|i| Formula::var(SKELETON_VARS[i]));
    let (pl, ql) = (Literal::pos(SKELETON_VARS[4]), Literal::pos(SKELETON_VARS[5]));
    let lhs = Formula::pdec(Formula::pdec(a.clone(), ql, b.clone()), pl, Formula::pdec(c.clone(), ql, d.clone()));
    let rhs = Formula::pdec(Formula::pdec(a, pl, c), ql, Formula::pdec(b, pl, d));
    (lhs, rhs)
}

fn medial_skeletons() -> &'static (Proof, Proof) {
    static SKELETONS: OnceLock<(Proof, Proof)> = OnceLock::new();
    SKELETONS.get_or_init(|| {
        let (lhs, rhs) = medial_sides();
        let ax = ExtAxiomSet::new();
        let prove = |a: &Formula, b: &Formula| {
            prove_by_search(&Sequent::new(vec![a.clone()], vec![b.clone()]), &ax)
                .expect("skeleton is positive")
                .proof()
                .expect("the medial is valid")
        };
        (prove(&lhs, &rhs), prove(&rhs, &lhs))
    })
}

/// Skeletons for [`Lemmas::case_step`]. Atoms `A B` stand for the
/// thresholds over `w2` at `k` and `k-1`, atoms `a b c` for those over `x`
/// at `k`, `k-1`, `k-2`. The extension variables are, in order, the
/// thresholds over `p w2` at `k`, `q x` at `k` and `k-1`, `p x` at `k` and
/// `k-1`, and `q p x` at `k`. The hypotheses `h0`, `h1` relate `A`, `B` to
/// the thresholds over `q x`, left to right in the forward skeleton and
/// right to left in the backward one.
fn case_skeletons() -> &'static (Proof, Proof) {
    static SKELETONS: OnceLock<(Proof, Proof)> = OnceLock::new();
    SKELETONS.get_or_init(|| {
        let [big_a, big_b, a, b, c] = [0, 1, 2, 3, 4].map(|i| Formula::var(SKELETON_VARS[i]));
        let (pl, ql) = (Literal::pos(SKELETON_VARS[5]), Literal::pos(SKELETON_VARS[6]));
        let e = |i: u32| Formula::ext(ExtVar::Plain(i));
        let mut ax = ExtAxiomSet::new();
        let bodies = [
            Formula::pdec(big_a.clone(), pl, big_b.clone()),
            Formula::pdec(a.clone(), ql, b.clone()),
            Formula::pdec(b.clone(), ql, c.clone()),
            Formula::pdec(a, pl, b.clone()),
            Formula::pdec(b, pl, c),
            Formula::pdec(e(3), ql, e(4)),
        ];
        for (i, body) in bodies.into_iter().enumerate() {
            ax.push(ExtVar::Plain(i as u32), body).expect("fresh skeleton variable");
        }
        let one = |x: &Formula, y: &Formula| Sequent::new(vec![x.clone()], vec![y.clone()]);
        let fwd_hyps = [("h0".to_string(), one(&big_a, &e(1))), ("h1".to_string(), one(&big_b, &e(2)))];
        let bwd_hyps = [("h0".to_string(), one(&e(1), &big_a)), ("h1".to_string(), one(&e(2), &big_b))];
        let fwd = prove_minimal(&one(&e(0), &e(5)), &ax, &fwd_hyps).expect("the forward step is derivable");
        let bwd = prove_minimal(&one(&e(5), &e(0)), &ax, &bwd_hyps).expect("the backward step is derivable");
        (fwd, bwd)
    })
}

/// Atom substitution plus extension renaming; decision positions must map
/// to literals.
struct Subst {
    atoms: HashMap<PropVar, Formula>,
    ext: HashMap<ExtVar, ExtVar>,
    hyps: HashMap<String, LineId>,
}

fn subst_plain(f: &Formula, sigma: &Subst) -> Formula {
    match f.kind() {
        Kind::Zero | Kind::One => f.clone(),
        Kind::Ext(e) => match sigma.ext.get(e) {
            Some(e2) => Formula::ext(e2.clone()),
            None => f.clone(),
        },
        Kind::Lit(l) => match sigma.atoms.get(&l.var) {
            Some(img) if l.positive => img.clone(),
            Some(img) => Formula::lit(img.as_lit().expect("literal image").complement()),
            None => f.clone(),
        },
        Kind::Or(a, b) => Formula::or(subst_plain(a, sigma), subst_plain(b, sigma)),
        Kind::PosDec(a, l, b) => {
            let l2 = subst_lit(*l, sigma);
            Formula::pdec(subst_plain(a, sigma), l2, subst_plain(b, sigma))
        }
        Kind::Dec(a, l, b) => {
            let l2 = subst_lit(*l, sigma);
            Formula::dec(subst_plain(a, sigma), l2, subst_plain(b, sigma))
        }
    }
}

fn subst_lit(l: Literal, sigma: &Subst) -> Literal {
    match sigma.atoms.get(&l.var) {
        Some(img) => {
            let m = img.as_lit().expect("decision variables map to literals");
            if l.positive {
                m
            } else {
                m.complement()
            }
        }
        None => l,
    }
}

// ---------------------------------------------------------------------------
// Stand-alone generators

/// Smallest dialect in which the formulas can be reasoned about.
fn dialect_for<'a>(fs: impl IntoIterator<Item = &'a Formula>, ax: &ExtAxiomSet) -> Dialect {
    let fs: Vec<&Formula> = fs.into_iter().collect();
    let bodies = || ax.iter().map(|(_, b)| b);
    if fs.iter().copied().chain(bodies()).any(Formula::has_dec) {
        Dialect::Elndt
    } else if fs.iter().copied().chain(bodies()).any(Formula::has_negative_literal) {
        Dialect::PlusMinus
    } else {
        Dialect::Plus
    }
}

fn store_for<'a>(fs: impl IntoIterator<Item = &'a Formula>, ax: &ExtAxiomSet) -> Lemmas {
    Lemmas::new(dialect_for(fs, ax), ax.clone())
}

fn done(l: &Lemmas, root: LineId) -> Proof {
    l.b.finish(root, true)
}

/// Like [`done`], printing the conclusion in the order of `ante ⊢ succ`.
fn done_as(l: &Lemmas, root: LineId, ante: Vec<Formula>, succ: Vec<Formula>) -> Proof {
    l.b.finish_as(root, &Sequent::new(ante, succ), true)
}

fn done_pair(l: &Lemmas, e: Equiv) -> (Proof, Proof) {
    (done(l, e.fwd), done(l, e.bwd))
}

pub fn gen_identity(a: &Formula, ax: &ExtAxiomSet) -> Proof {
    let mut l = store_for([a], ax);
    let root = l.identity(a);
    done(&l, root)
}

/// The four truth conditions of `pdec(a, p, b)`, in order
/// `pdec ⊢ a,p`, `pdec ⊢ a,b`, `a ⊢ pdec`, `p,b ⊢ pdec`.
pub fn gen_truth(a: &Formula, p: Literal, b: &Formula, ax: &ExtAxiomSet) -> [Proof; 4] {
    let d = Formula::pdec(a.clone(), p, b.clone());
    let mut l = store_for([&d], ax);
    let r = [l.truth1(a, p, b), l.truth2(a, p, b), l.truth3(a, p, b), l.truth4(a, p, b)];
    r.map(|root| done(&l, root))
}

/// Derivation of `Γ, pdec(a,p,b) ⊢ Δ, pdec(a2,p,b2)` from the hypotheses
/// `h1: Γ, a ⊢ Δ, a2` and `h2: Γ, b ⊢ Δ, b2`.
#[allow(clippy::too_many_arguments)]
pub fn gen_replacement(
    gamma: &[Formula],
    delta: &[Formula],
    a: &Formula,
    a2: &Formula,
    b: &Formula,
    b2: &Formula,
    p: Literal,
    ax: &ExtAxiomSet,
) -> Result<Proof, LemmaError> {
    let all = gamma.iter().chain(delta).chain([a, a2, b, b2]);
    let mut l = store_for(all, ax);
    let h1 = l.b.hyp("h1", Sequent::new(plus(gamma, &[a]), plus(delta, &[a2])));
    let h2 = l.b.hyp("h2", Sequent::new(plus(gamma, &[b]), plus(delta, &[b2])));
    let root = l.replace(h1, h2, a, a2, b, b2, p)?;
    Ok(done(&l, root))
}

pub fn gen_pos_medial(
    a: &Formula,
    b: &Formula,
    c: &Formula,
    d: &Formula,
    p: Literal,
    q: Literal,
    ax: &ExtAxiomSet,
) -> (Proof, Proof) {
    let mut l = store_for([a, b, c, d], ax);
    let e = l.medial(a, b, c, d, p, q);
    done_pair(&l, e)
}

/// Proofs of `⊢ thr[w;0]`, `thr[w;k+1] ⊢ thr[w;k]` and, when `k > |w|`,
/// `thr[w;k] ⊢`.
#[derive(Clone, Debug)]
pub struct MonotoneProofs {
    pub top: Proof,
    pub step: Proof,
    pub absurd: Option<Proof>,
}

pub fn gen_thr_monotone(word: &[PropVar], k: i64) -> Result<MonotoneProofs, LemmaError> {
    let mut l = Lemmas::positive();
    let top = l.mono0(word);
    let step = l.mono1(word, k)?;
    let absurd = if k > word.len() as i64 { Some(l.mono2(word, k)?) } else { None };
    Ok(MonotoneProofs { top: done(&l, top), step: done(&l, step), absurd: absurd.map(|r| done(&l, r)) })
}

/// `thr[pre q post; k] ⊢ thr[q pre post; k]` and its converse.
pub fn gen_case_analysis(pre: &[PropVar], q: PropVar, post: &[PropVar], k: i64) -> (Proof, Proof) {
    let mut l = Lemmas::positive();
    let e = l.case_analysis(pre, q, post, k);
    done_pair(&l, e)
}

/// `thr[word; k] ≡ thr[permuted; k]`.
pub fn gen_symmetry(word: &[PropVar], permuted: &[PropVar], k: i64) -> Result<(Proof, Proof), LemmaError> {
    let mut l = Lemmas::positive();
    let e = l.symmetry(word, permuted, k)?;
    Ok(done_pair(&l, e))
}

pub fn gen_merge(p: &[PropVar], q: &[PropVar], k: i64, l: i64) -> Proof {
    let mut s = Lemmas::positive();
    let root = s.merge(p, q, k, l);
    let pq: Word = p.iter().chain(q).copied().collect();
    let ante = vec![s.thr(p, k), s.thr(q, l)];
    let succ = vec![s.thr(&pq, k + l)];
    done_as(&s, root, ante, succ)
}

pub fn gen_split(p: &[PropVar], q: &[PropVar], k: i64, l: i64) -> Result<Proof, LemmaError> {
    let mut s = Lemmas::positive();
    let root = s.split(p, q, k, l)?;
    let pq: Word = p.iter().chain(q).copied().collect();
    let ante = vec![s.thr(&pq, k + l)];
    let succ = vec![s.thr(p, k + 1), s.thr(q, l)];
    Ok(done_as(&s, root, ante, succ))
}

/// `q ≡ thr[q; 1]`.
pub fn gen_unit_eq(q: PropVar) -> (Proof, Proof) {
    let mut l = Lemmas::positive();
    let e = l.unit_eq(q);
    done_pair(&l, e)
}

/// `q ⊢ thr[qs; 1]` for a variable `q` of `qs`.
pub fn gen_unit_thr(q: PropVar, qs: &[PropVar]) -> Result<Proof, LemmaError> {
    let j = qs.iter().position(|v| *v == q).ok_or(LemmaError::NotInWord { var: q })?;
    let mut l = Lemmas::positive();
    let root = l.unit(qs, j)?;
    Ok(done(&l, root))
}

/// `p_i, thr[p∖i; k] ⊢ thr[p; k+1]` and `thr[p; k] ⊢ p_i, thr[p∖i; k]`.
pub fn gen_thresh_increment(p: &[PropVar], i: usize, k: i64) -> Result<(Proof, Proof), LemmaError> {
    let mut l = Lemmas::positive();
    let (a, b) = l.thresh_increment(p, i, k)?;
    let rest: Word = p.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
    let (pi, tr, tk, tk1) = (Formula::var(p[i]), l.thr(&rest, k), l.thr(p, k), l.thr(p, k + 1));
    Ok((
        done_as(&l, a, vec![pi.clone(), tr.clone()], vec![tk1]),
        done_as(&l, b, vec![tk], vec![pi, tr]),
    ))
}
