//! Simulation of eLNDT proofs of positive sequents by eLNDT⁺ proofs.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`translate_to_minus`] rewrites every general decision `dec(a, p, b)`
//!    as `pdec(0, ~p, a') ∨ pdec(0, p, b')`, giving an eLNDT⁺₋ proof, and
//!    [`strip_negtrans`] cuts the translated conclusion back to the
//!    original positive sequent.
//! 2. For every threshold `k`, [`translate_to_tk`] replaces each negative
//!    literal `~p_i` by `thr[p∖i; k]` and each positive decision on `~p_i`
//!    by a threshold decision, giving a proof in the threshold dialect.
//! 3. [`eliminate_tk`] brackets every line of such a proof between
//!    `thr[p; k]` on the left and `thr[p; k+1]` on the right, which turns
//!    the threshold initial sequents into increment lemmas.
//! 4. [`simulate`] cuts the bracketed proofs together, starting from
//!    `⊢ thr[p; 0]` and ending at `thr[p; m+1] ⊢`.
//!
//! Extension variables of the source proof are copied once per `k` as
//! [`ExtVar::Scoped`] variables, so the per-`k` axiom sets never clash.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::dialect::Dialect;
use crate::lemmas::{Equiv, LemmaError, Lemmas};
use crate::sequent::{check_proof, Builder, CheckError, Justification, LineId, Proof, Rule, Sequent};
use crate::term::{desugar, AxiomError, ExtAxiomSet, ExtVar, Formula, Kind, Literal, PropVar, Word};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("input proof does not check: {0}")]
    Check(#[from] CheckError),
    #[error("expected a proof in {want}, got {got}")]
    Dialect { want: String, got: String },
    #[error("{0} is not a positive, extension-free sequent in positive-decision form")]
    NotPositive(String),
    #[error("proof concludes {got}, expected {want}")]
    Conclusion { got: String, want: String },
    #[error("line {line}: {what} is not supported here")]
    Unsupported { line: usize, what: String },
    #[error("variable {0} is outside the simulation context")]
    UnknownVar(PropVar),
    #[error("extension variable {0} has no axiom")]
    UndefinedExt(String),
    #[error(transparent)]
    Lemma(#[from] LemmaError),
    #[error(transparent)]
    Axiom(#[from] AxiomError),
}

fn unsupported(line: usize, j: &Justification) -> SimError {
    SimError::Unsupported { line, what: format!("a {} line", j.label()) }
}

fn fit(b: &mut Builder, l: LineId, ante: &[&Formula], succ: &[&Formula]) -> LineId {
    let s = Sequent::new(ante.iter().map(|f| (*f).clone()).collect(), succ.iter().map(|f| (*f).clone()).collect());
    b.structural_to(l, &s)
}

/// `cut_merge`, first weakening `a` back in where a premise lost it to a
/// merged duplicate (decisions like `pdec(p, p, b)` produce those).
fn cut(b: &mut Builder, l1: LineId, l2: LineId, a: &Formula) -> LineId {
    let l1 = if b.seq(l1).succ.contains(a) { l1 } else { b.wr(l1, a) };
    let l2 = if b.seq(l2).ante.contains(a) { l2 } else { b.wl(l2, a) };
    b.cut_merge(l1, l2, a)
}

fn find(b: &Builder, ante: &[&Formula], succ: &[&Formula]) -> Option<LineId> {
    let s = Sequent::new(ante.iter().map(|f| (*f).clone()).collect(), succ.iter().map(|f| (*f).clone()).collect());
    b.find(&s)
}

fn map_seq(s: &Sequent, mut f: impl FnMut(&Formula) -> Result<Formula, SimError>) -> Result<Sequent, SimError> {
    Ok(Sequent::new(
        s.ante.iter().map(&mut f).collect::<Result<_, _>>()?,
        s.succ.iter().map(&mut f).collect::<Result<_, _>>()?,
    ))
}

// ---------------------------------------------------------------------------
// Negative translation

/// Memoised negative translation. Positive decisions are desugared first,
/// so the map is total.
#[derive(Default)]
struct NegTrans {
    memo: HashMap<Formula, Formula>,
}

impl NegTrans {
    fn apply(&mut self, f: &Formula) -> Formula {
        if !f.has_dec() && !f.has_posdec() {
            return f.clone();
        }
        if let Some(g) = self.memo.get(f) {
            return g.clone();
        }
        let g = match f.kind() {
            Kind::Or(a, b) => Formula::or(self.apply(a), self.apply(b)),
            Kind::Dec(a, l, b) => neg_dec(&self.apply(a), *l, &self.apply(b)),
            Kind::PosDec(..) => self.apply(&desugar(f)),
            _ => f.clone(),
        };
        self.memo.insert(f.clone(), g.clone());
        g
    }
}

/// `pdec(0, ~l, na) ∨ pdec(0, l, nb)`, the image of `dec(a, l, b)`.
fn neg_dec(na: &Formula, l: Literal, nb: &Formula) -> Formula {
    Formula::or(
        Formula::pdec(Formula::zero(), l.complement(), na.clone()),
        Formula::pdec(Formula::zero(), l, nb.clone()),
    )
}

pub fn negtrans(f: &Formula) -> Formula {
    NegTrans::default().apply(f)
}

/// Translates every body, keeping the variables and their order.
pub fn negtrans_axioms(ax: &ExtAxiomSet) -> ExtAxiomSet {
    let nt = std::cell::RefCell::new(NegTrans::default());
    ax.map_bodies(|b| nt.borrow_mut().apply(b))
}

/// Truth conditions of `d = neg_dec(na, l, nb)`:
/// `d ⊢ na, l`, `d, l ⊢ nb`, `na ⊢ d, l` and `l, nb ⊢ d`.
fn neg_truth(lem: &mut Lemmas, item: usize, na: &Formula, l: Literal, nb: &Formula) -> LineId {
    let z = Formula::zero();
    let (lf, nl) = (Formula::lit(l), Formula::lit(l.complement()));
    let x = Formula::pdec(z.clone(), l.complement(), na.clone());
    let y = Formula::pdec(z.clone(), l, nb.clone());
    let d = Formula::or(x.clone(), y.clone());
    let (ante, succ): (Vec<&Formula>, Vec<&Formula>) = match item {
        1 => (vec![&d], vec![na, &lf]),
        2 => (vec![&d, &lf], vec![nb]),
        3 => (vec![na], vec![&d, &lf]),
        4 => (vec![&lf, nb], vec![&d]),
        _ => panic!("truth items are numbered 1 to 4"),
    };
    if let Some(done) = find(&lem.b, &ante, &succ) {
        return done;
    }
    match item {
        1 => {
            let a0 = lem.b.ax0();
            let zero = fit(&mut lem.b, a0, &[&z], &[na, &lf]);
            let ia = lem.identity(na);
            let xs = fit(&mut lem.b, ia, &[&nl, na], &[na, &lf]);
            let xc = lem.b.posl(zero, xs, &x);
            let il = lem.b.id(l);
            let ys = fit(&mut lem.b, il, &[&lf, nb], &[na, &lf]);
            let yc = lem.b.posl(zero, ys, &y);
            lem.b.orl(xc, yc, &d)
        }
        2 => {
            let a0 = lem.b.ax0();
            let zero = fit(&mut lem.b, a0, &[&lf, &z], &[nb]);
            let neg = lem.b.neg_l(l.var);
            let xs = fit(&mut lem.b, neg, &[&lf, &nl, na], &[nb]);
            let xc = lem.b.posl(zero, xs, &x);
            let ib = lem.identity(nb);
            let ys = fit(&mut lem.b, ib, &[&lf, &lf, nb], &[nb]);
            let yc = lem.b.posl(zero, ys, &y);
            lem.b.orl(xc, yc, &d)
        }
        3 => {
            let neg = lem.b.neg_r(l.var);
            let first = fit(&mut lem.b, neg, &[na], &[&lf, &z, &nl]);
            let ia = lem.identity(na);
            let second = fit(&mut lem.b, ia, &[na], &[&lf, &z, na]);
            let xr = lem.b.posr(first, second, &x);
            let w = lem.b.wr(xr, &y);
            lem.b.orr(w, &d)
        }
        _ => {
            let il = lem.b.id(l);
            let first = fit(&mut lem.b, il, &[&lf, nb], &[&z, &lf]);
            let ib = lem.identity(nb);
            let second = fit(&mut lem.b, ib, &[&lf, nb], &[&z, nb]);
            let yr = lem.b.posr(first, second, &y);
            let w = lem.b.wr(yr, &x);
            lem.b.orr(w, &d)
        }
    }
}

/// The four truth conditions of `negtrans(dec(a, p, b))` over the
/// translated axioms of `ax`, in the order `d ⊢ a', p`, `d, p ⊢ b'`,
/// `a' ⊢ d, p`, `p, b' ⊢ d`, where `a'` and `b'` are the translations.
pub fn gen_negtrans_truth(a: &Formula, p: Literal, b: &Formula, ax: &ExtAxiomSet) -> [Proof; 4] {
    let mut nt = NegTrans::default();
    let (na, nb) = (nt.apply(a), nt.apply(b));
    let mut lem = Lemmas::new(Dialect::PlusMinus, negtrans_axioms(ax));
    [1, 2, 3, 4].map(|i| {
        let root = neg_truth(&mut lem, i, &na, p, &nb);
        lem.b.finish(root, true)
    })
}

fn require_dialect(p: &Proof, ok: impl Fn(&Dialect) -> bool, want: &str) -> Result<(), SimError> {
    if ok(&p.dialect) {
        Ok(())
    } else {
        Err(SimError::Dialect { want: want.to_string(), got: p.dialect.to_string() })
    }
}

/// Rewrites an eLNDT proof into an eLNDT⁺₋ proof of the translated
/// conclusion. Decision steps become two cuts against the truth conditions
/// of the translated decision; every other step is carried over.
pub fn translate_to_minus(p: &Proof) -> Result<Proof, SimError> {
    require_dialect(p, |d| matches!(d, Dialect::Lndt | Dialect::Elndt), "eLNDT")?;
    check_proof(p)?;
    let mut lem = Lemmas::new(Dialect::PlusMinus, negtrans_axioms(&p.axioms));
    let mut nt = NegTrans::default();
    let mut map: Vec<LineId> = Vec::with_capacity(p.lines.len());
    for (n, line) in p.lines.iter().enumerate() {
        let b = &mut lem.b;
        let id = match &line.just {
            Justification::Axiom0 => b.ax0(),
            Justification::Axiom1 => b.ax1(),
            Justification::Id(l) => b.id(*l),
            Justification::ExtLR(e) => b.ext_l(e),
            Justification::ExtRL(e) => b.ext_r(e),
            Justification::Rule { rule, premises, principal } => {
                let prem: Vec<LineId> = premises.iter().map(|i| map[*i]).collect();
                match (rule, principal.kind()) {
                    (Rule::PL, Kind::Dec(a, l, bb)) => {
                        let (na, nb) = (nt.apply(a), nt.apply(bb));
                        let i1 = neg_truth(&mut lem, 1, &na, *l, &nb);
                        let i2 = neg_truth(&mut lem, 2, &na, *l, &nb);
                        let c1 = cut(&mut lem.b, i1, prem[0], &na);
                        let c2 = cut(&mut lem.b, i2, prem[1], &nb);
                        let c3 = cut(&mut lem.b, c1, c2, &Formula::lit(*l));
                        let want = map_seq(&line.seq, |f| Ok(nt.apply(f)))?;
                        lem.b.structural_to(c3, &want)
                    }
                    (Rule::PR, Kind::Dec(a, l, bb)) => {
                        let (na, nb) = (nt.apply(a), nt.apply(bb));
                        let i3 = neg_truth(&mut lem, 3, &na, *l, &nb);
                        let i4 = neg_truth(&mut lem, 4, &na, *l, &nb);
                        let c1 = cut(&mut lem.b, prem[0], i3, &na);
                        let c2 = cut(&mut lem.b, prem[1], i4, &nb);
                        let c3 = cut(&mut lem.b, c1, c2, &Formula::lit(*l));
                        let want = map_seq(&line.seq, |f| Ok(nt.apply(f)))?;
                        lem.b.structural_to(c3, &want)
                    }
                    _ => b.rule(*rule, &prem, &nt.apply(principal)),
                }
            }
            j => return Err(unsupported(n, j)),
        };
        map.push(id);
    }
    let root = *map.last().expect("checked proofs are non-empty");
    Ok(lem.b.finish(root, p.intermediate))
}

/// `a ≡ negtrans(desugar(a))` for a positive, extension-free `a`.
fn pos_equiv(lem: &mut Lemmas, nt: &mut NegTrans, a: &Formula) -> Equiv {
    let n = nt.apply(&desugar(a));
    if n == *a {
        let i = lem.identity(a);
        return Equiv { fwd: i, bwd: i };
    }
    if let (Some(fwd), Some(bwd)) = (find(&lem.b, &[a], &[&n]), find(&lem.b, &[&n], &[a])) {
        return Equiv { fwd, bwd };
    }
    match a.kind() {
        Kind::Or(x, y) => {
            let (ex, ey) = (pos_equiv(lem, nt, x), pos_equiv(lem, nt, y));
            let (nx, ny) = (nt.apply(&desugar(x)), nt.apply(&desugar(y)));
            let f1 = fit(&mut lem.b, ex.fwd, &[x], &[&nx, &ny]);
            let f1 = lem.b.orr(f1, &n);
            let f2 = fit(&mut lem.b, ey.fwd, &[y], &[&nx, &ny]);
            let f2 = lem.b.orr(f2, &n);
            let fwd = lem.b.orl(f1, f2, a);
            let g1 = fit(&mut lem.b, ex.bwd, &[&nx], &[x, y]);
            let g1 = lem.b.orr(g1, a);
            let g2 = fit(&mut lem.b, ey.bwd, &[&ny], &[x, y]);
            let g2 = lem.b.orr(g2, a);
            let bwd = lem.b.orl(g1, g2, &n);
            Equiv { fwd, bwd }
        }
        Kind::PosDec(x, l, y) => {
            let lf = Formula::lit(*l);
            let xy = Formula::or(x.clone(), y.clone());
            let (ex, exy) = (pos_equiv(lem, nt, x), pos_equiv(lem, nt, &xy));
            let (nx, nxy) = (nt.apply(&desugar(x)), nt.apply(&desugar(&xy)));
            debug_assert_eq!(neg_dec(&nx, *l, &nxy), n);

            let e1 = lem.truth1(x, *l, y);
            let t3 = neg_truth(lem, 3, &nx, *l, &nxy);
            let eq3 = cut(&mut lem.b, ex.fwd, t3, &nx);
            let x1 = cut(&mut lem.b, e1, eq3, x);
            let t2 = lem.truth2(x, *l, y);
            let o = lem.b.orr(t2, &xy);
            let e2 = lem.b.wl(o, &lf);
            let t4 = neg_truth(lem, 4, &nx, *l, &nxy);
            let eq4 = cut(&mut lem.b, exy.fwd, t4, &nxy);
            let x2 = cut(&mut lem.b, e2, eq4, &xy);
            let fwd = cut(&mut lem.b, x1, x2, &lf);

            let eq5 = lem.truth3(x, *l, y);
            let eq6 = lem.truth4(x, *l, y);
            let t1 = neg_truth(lem, 1, &nx, *l, &nxy);
            let eq7 = cut(&mut lem.b, t1, ex.bwd, &nx);
            let y1 = cut(&mut lem.b, eq7, eq5, x);
            let t2n = neg_truth(lem, 2, &nx, *l, &nxy);
            let eq8 = cut(&mut lem.b, t2n, exy.bwd, &nxy);
            let w5 = lem.b.wl(eq5, &lf);
            let z = lem.b.orl(w5, eq6, &xy);
            let y2 = cut(&mut lem.b, eq8, z, &xy);
            let bwd = cut(&mut lem.b, y1, y2, &lf);
            Equiv { fwd, bwd }
        }
        _ => unreachable!("atoms are fixed by the translation"),
    }
}

fn require_positive(s: &Sequent) -> Result<(), SimError> {
    let bad = s.formulas().any(|f| f.has_ext() || f.has_dec() || f.has_negative_literal());
    if bad {
        Err(SimError::NotPositive(s.to_string()))
    } else {
        Ok(())
    }
}

/// From an eLNDT⁺₋ proof of `negtrans(Γ) ⊢ negtrans(Δ)` derives `Γ ⊢ Δ`,
/// cutting each translated formula against its equivalence with the
/// original.
pub fn strip_negtrans(pm: &Proof, target: &Sequent) -> Result<Proof, SimError> {
    require_dialect(pm, |d| *d == Dialect::PlusMinus, "eLNDT+-")?;
    require_positive(target)?;
    let mut nt = NegTrans::default();
    let want = map_seq(target, |f| Ok(nt.apply(&desugar(f))))?;
    if !pm.conclusion().same_as(&want) {
        return Err(SimError::Conclusion { got: pm.conclusion().to_string(), want: want.to_string() });
    }
    let mut lem = Lemmas::new(Dialect::PlusMinus, ExtAxiomSet::new());
    let mut cur = lem.b.import(pm, &HashMap::new());
    for a in &target.ante {
        let n = nt.apply(&desugar(a));
        if n != *a {
            let e = pos_equiv(&mut lem, &mut nt, a);
            cur = cut(&mut lem.b, e.fwd, cur, &n);
        }
    }
    for a in &target.succ {
        let n = nt.apply(&desugar(a));
        if n != *a {
            let e = pos_equiv(&mut lem, &mut nt, a);
            cur = cut(&mut lem.b, cur, e.bwd, &n);
        }
    }
    let root = lem.b.structural_to(cur, target);
    Ok(lem.b.finish_as(root, target, false))
}

// ---------------------------------------------------------------------------
// Threshold decisions

/// Truth conditions of `R = rthr[w; k; a; b]` with `t = thr[w; k]`:
/// `R ⊢ a, t`, `R ⊢ a, b`, `a ⊢ R` and `t, b ⊢ R`, by induction on `w`.
struct RefThr<'f> {
    a: &'f Formula,
    b: &'f Formula,
}

impl RefThr<'_> {
    fn r(&self, lem: &mut Lemmas, w: &[PropVar], k: i64) -> Formula {
        Formula::ext(lem.b.ax.instantiate_refthr(w, k, self.a, self.b))
    }

    fn parts(&self, lem: &mut Lemmas, w: &[PropVar], k: i64) -> (Formula, Formula) {
        (self.r(lem, w, k), lem.thr(w, k))
    }

    fn ext(f: &Formula) -> ExtVar {
        f.as_ext().expect("extension variable").clone()
    }

    fn item(&self, lem: &mut Lemmas, n: usize, w: &[PropVar], k: i64) -> Result<LineId, LemmaError> {
        let (a, b) = (self.a, self.b);
        let (r, t) = self.parts(lem, w, k);
        let (ante, succ): (Vec<&Formula>, Vec<&Formula>) = match n {
            1 => (vec![&r], vec![a, &t]),
            2 => (vec![&r], vec![a, b]),
            3 => (vec![a], vec![&r]),
            4 => (vec![&t, b], vec![&r]),
            _ => panic!("truth items are numbered 1 to 4"),
        };
        if let Some(done) = find(&lem.b, &ante, &succ) {
            return Ok(done);
        }
        let ab = Formula::or(a.clone(), b.clone());
        let Some((p, rest)) = w.split_first() else {
            return Ok(self.base(lem, n, k, &r, &t, &ab));
        };
        let p = Literal::pos(*p);
        let (rk, tk) = self.parts(lem, rest, k);
        let (rk1, tk1) = self.parts(lem, rest, k - 1);
        let body_r = Formula::pdec(rk.clone(), p, rk1.clone());
        let body_t = Formula::pdec(tk.clone(), p, tk1.clone());
        let (down_r, up_r) = (lem.b.ext_l(&Self::ext(&r)), lem.b.ext_r(&Self::ext(&r)));
        let h1 = self.item(lem, n, rest, k)?;
        let h2 = self.item(lem, n, rest, k - 1)?;
        Ok(match n {
            1 => {
                let rep = lem.replace(h1, h2, &rk, &tk, &rk1, &tk1, p)?;
                let c = cut(&mut lem.b, down_r, rep, &body_r);
                let up_t = lem.b.ext_r(&Self::ext(&t));
                cut(&mut lem.b, c, up_t, &body_t)
            }
            2 => {
                let second = fit(&mut lem.b, h2, &[&Formula::lit(p), &rk1], &[a, b]);
                let l = lem.b.posl(h1, second, &body_r);
                cut(&mut lem.b, down_r, l, &body_r)
            }
            3 => {
                let first = fit(&mut lem.b, h1, &[a], &[&rk, &Formula::lit(p)]);
                let second = fit(&mut lem.b, h2, &[a], &[&rk, &rk1]);
                let l = lem.b.posr(first, second, &body_r);
                cut(&mut lem.b, l, up_r, &body_r)
            }
            _ => {
                let rep = lem.replace(h1, h2, &tk, &rk, &tk1, &rk1, p)?;
                let down_t = lem.b.ext_l(&Self::ext(&t));
                let c = cut(&mut lem.b, down_t, rep, &body_t);
                cut(&mut lem.b, c, up_r, &body_r)
            }
        })
    }

    fn base(&self, lem: &mut Lemmas, n: usize, k: i64, r: &Formula, t: &Formula, ab: &Formula) -> LineId {
        let (a, b) = (self.a, self.b);
        let er = Self::ext(r);
        let et = Self::ext(t);
        match (n, k == 0) {
            (1, true) => {
                let one = lem.b.ax1();
                let up = lem.b.ext_r(&et);
                let top = cut(&mut lem.b, one, up, &Formula::one());
                fit(&mut lem.b, top, &[r], &[a, t])
            }
            (1, false) | (2, false) => {
                let down = lem.b.ext_l(&er);
                let succ: &[&Formula] = if n == 1 { &[a, t] } else { &[a, b] };
                fit(&mut lem.b, down, &[r], succ)
            }
            (2, true) => {
                let down = lem.b.ext_l(&er);
                let ia = lem.identity(a);
                let la = fit(&mut lem.b, ia, &[a], &[a, b]);
                let ib = lem.identity(b);
                let lb = fit(&mut lem.b, ib, &[b], &[a, b]);
                let split = lem.b.orl(la, lb, ab);
                cut(&mut lem.b, down, split, ab)
            }
            (3, true) => {
                let ia = lem.identity(a);
                let w = fit(&mut lem.b, ia, &[a], &[a, b]);
                let o = lem.b.orr(w, ab);
                let up = lem.b.ext_r(&er);
                cut(&mut lem.b, o, up, ab)
            }
            (3, false) => lem.b.ext_r(&er),
            (_, true) => {
                let ib = lem.identity(b);
                let w = fit(&mut lem.b, ib, &[b], &[a, b]);
                let o = lem.b.orr(w, ab);
                let up = lem.b.ext_r(&er);
                let c = cut(&mut lem.b, o, up, ab);
                fit(&mut lem.b, c, &[t, b], &[r])
            }
            (_, false) => {
                let down = lem.b.ext_l(&et);
                let z = lem.b.ax0();
                let c = cut(&mut lem.b, down, z, &Formula::zero());
                fit(&mut lem.b, c, &[t, b], &[r])
            }
        }
    }
}

/// The four truth conditions of `rthr[word; k; a; b]`, in the order
/// `R ⊢ a, thr`, `R ⊢ a, b`, `a ⊢ R`, `thr, b ⊢ R`.
pub fn gen_refthr_truth(word: &[PropVar], k: i64, a: &Formula, b: &Formula, ax: &ExtAxiomSet) -> Result<[Proof; 4], LemmaError> {
    let mut lem = Lemmas::new(Dialect::Plus, ax.clone());
    let rt = RefThr { a, b };
    let mut out = Vec::with_capacity(4);
    for n in 1..=4 {
        let root = rt.item(&mut lem, n, word, k)?;
        out.push(lem.b.finish(root, true));
    }
    Ok(out.try_into().expect("four items"))
}

// ---------------------------------------------------------------------------
// Threshold translation

/// Variables of a proof: every literal and decision variable in its lines
/// and axiom bodies, sorted.
pub fn proof_vars(p: &Proof) -> Vec<PropVar> {
    let mut vars = BTreeSet::new();
    for line in &p.lines {
        for f in line.seq.formulas() {
            vars.extend(f.syntactic_vars());
        }
    }
    for (_, body) in p.axioms.iter() {
        vars.extend(body.syntactic_vars());
    }
    vars.into_iter().collect()
}

fn without(vars: &[PropVar], i: usize) -> Word {
    vars.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect()
}

/// Substitution of thresholds for negative literals at a fixed `k`.
pub struct TkTranslation {
    pub k: i64,
    pub vars: Vec<PropVar>,
    index: HashMap<PropVar, usize>,
    scoped: HashMap<ExtVar, ExtVar>,
    memo: HashMap<Formula, Formula>,
}

impl TkTranslation {
    pub fn new(k: i64, vars: &[PropVar]) -> Self {
        let index = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        TkTranslation { k, vars: vars.to_vec(), index, scoped: HashMap::new(), memo: HashMap::new() }
    }

    fn idx(&self, p: PropVar) -> Result<usize, SimError> {
        self.index.get(&p).copied().ok_or(SimError::UnknownVar(p))
    }

    /// `thr[vars∖i; k]`, the image of `~p_i`.
    fn neg_image(&self, ax: &mut ExtAxiomSet, p: PropVar) -> Result<Formula, SimError> {
        let rest = without(&self.vars, self.idx(p)?);
        Ok(Formula::ext(ax.instantiate_thr(&rest, self.k)))
    }

    /// Copies the source axioms as scoped variables with translated bodies.
    pub fn translate_axioms(&mut self, ax: &mut ExtAxiomSet, src: &ExtAxiomSet) -> Result<(), SimError> {
        for (index, (e, body)) in src.iter().enumerate() {
            let body = self.apply(ax, body)?;
            let scope = u32::try_from(self.k).expect("k is non-negative");
            let copy = ExtVar::Scoped { index: index as u32, scope };
            ax.push(copy.clone(), body)?;
            self.scoped.insert(e.clone(), copy);
        }
        Ok(())
    }

    fn scoped(&self, e: &ExtVar) -> Result<ExtVar, SimError> {
        self.scoped.get(e).cloned().ok_or_else(|| SimError::UndefinedExt(e.to_string()))
    }

    pub fn apply(&mut self, ax: &mut ExtAxiomSet, f: &Formula) -> Result<Formula, SimError> {
        if !f.has_negative_literal() && !f.has_ext() {
            return Ok(f.clone());
        }
        if let Some(g) = self.memo.get(f) {
            return Ok(g.clone());
        }
        let g = match f.kind() {
            Kind::Lit(l) if !l.positive => self.neg_image(ax, l.var)?,
            Kind::Ext(e) => Formula::ext(self.scoped(e)?),
            Kind::Or(a, b) => Formula::or(self.apply(ax, a)?, self.apply(ax, b)?),
            Kind::PosDec(a, l, b) => {
                let (ta, tb) = (self.apply(ax, a)?, self.apply(ax, b)?);
                if l.positive {
                    Formula::pdec(ta, *l, tb)
                } else {
                    let rest = without(&self.vars, self.idx(l.var)?);
                    Formula::ext(ax.instantiate_refthr(&rest, self.k, &ta, &tb))
                }
            }
            Kind::Dec(..) => return Err(SimError::NotPositive(f.to_string())),
            _ => f.clone(),
        };
        self.memo.insert(f.clone(), g.clone());
        Ok(g)
    }
}

/// Translates an eLNDT⁺₋ proof into the threshold dialect at `k` over
/// `vars`, which must contain every variable of the proof.
pub fn translate_to_tk(pm: &Proof, k: i64, vars: &[PropVar]) -> Result<Proof, SimError> {
    require_dialect(pm, |d| *d == Dialect::PlusMinus, "eLNDT+-")?;
    if k < 0 {
        return Err(LemmaError::Range(format!("threshold translation needs k ≥ 0, got {k}")).into());
    }
    let mut tt = TkTranslation::new(k, vars);
    let mut lem = Lemmas::new(Dialect::Tk { k, vars: vars.to_vec() }, ExtAxiomSet::new());
    for i in 0..vars.len() {
        lem.b.ax.instantiate_thr(&without(vars, i), k);
    }
    tt.translate_axioms(&mut lem.b.ax, &pm.axioms)?;
    let mut map: Vec<LineId> = Vec::with_capacity(pm.lines.len());
    for (n, line) in pm.lines.iter().enumerate() {
        let id = match &line.just {
            Justification::Axiom0 => lem.b.ax0(),
            Justification::Axiom1 => lem.b.ax1(),
            Justification::Id(l) if l.positive => lem.b.id(*l),
            Justification::Id(l) => {
                let t = tt.neg_image(&mut lem.b.ax, l.var)?;
                lem.identity(&t)
            }
            Justification::NegL(p) => lem.b.thr_l(tt.idx(*p)?),
            Justification::NegR(p) => lem.b.thr_r(tt.idx(*p)?),
            Justification::ExtLR(e) => lem.b.ext_l(&tt.scoped(e)?),
            Justification::ExtRL(e) => lem.b.ext_r(&tt.scoped(e)?),
            Justification::Rule { rule, premises, principal } => {
                let prem: Vec<LineId> = premises.iter().map(|i| map[*i]).collect();
                match (rule, principal.kind()) {
                    (Rule::PosPL | Rule::PosPR, Kind::PosDec(a, l, b)) if !l.positive => {
                        let (ta, tb) = (tt.apply(&mut lem.b.ax, a)?, tt.apply(&mut lem.b.ax, b)?);
                        let t = tt.neg_image(&mut lem.b.ax, l.var)?;
                        let rest = without(vars, tt.idx(l.var)?);
                        let rt = RefThr { a: &ta, b: &tb };
                        let c3 = if *rule == Rule::PosPL {
                            let i1 = rt.item(&mut lem, 1, &rest, k)?;
                            let i2 = rt.item(&mut lem, 2, &rest, k)?;
                            let c1 = cut(&mut lem.b, i2, prem[1], &tb);
                            let c2 = cut(&mut lem.b, i1, c1, &t);
                            cut(&mut lem.b, c2, prem[0], &ta)
                        } else {
                            let i3 = rt.item(&mut lem, 3, &rest, k)?;
                            let i4 = rt.item(&mut lem, 4, &rest, k)?;
                            let c1 = cut(&mut lem.b, prem[1], i4, &tb);
                            let c2 = cut(&mut lem.b, prem[0], c1, &t);
                            cut(&mut lem.b, c2, i3, &ta)
                        };
                        let want = map_seq(&line.seq, |f| tt.apply(&mut lem.b.ax, f))?;
                        lem.b.structural_to(c3, &want)
                    }
                    _ => {
                        let x = tt.apply(&mut lem.b.ax, principal)?;
                        lem.b.rule(*rule, &prem, &x)
                    }
                }
            }
            j => return Err(unsupported(n, j)),
        };
        map.push(id);
    }
    let root = *map.last().expect("non-empty proof");
    Ok(lem.b.finish(root, pm.intermediate))
}

// ---------------------------------------------------------------------------
// Bracketing and stitching

/// Replays a threshold-dialect proof into `g`, with `thr[vars; k]` added on
/// the left and `thr[vars; k+1]` on the right of every line. Returns the
/// line of the bracketed conclusion.
fn eliminate_into(g: &mut Lemmas, pk: &Proof) -> Result<LineId, SimError> {
    let Dialect::Tk { k, vars } = &pk.dialect else {
        return Err(SimError::Dialect { want: "T[k; vars]".to_string(), got: pk.dialect.to_string() });
    };
    let k = *k;
    g.b.ax.extend_from(&pk.axioms)?;
    let lo = g.thr(vars, k);
    let hi = g.thr(vars, k + 1);
    let mut map: Vec<LineId> = Vec::with_capacity(pk.lines.len());
    for (n, line) in pk.lines.iter().enumerate() {
        let initial = match &line.just {
            Justification::Axiom0 => Some(g.b.ax0()),
            Justification::Axiom1 => Some(g.b.ax1()),
            Justification::Id(l) => Some(g.b.id(*l)),
            Justification::ExtLR(e) => Some(g.b.ext_l(e)),
            Justification::ExtRL(e) => Some(g.b.ext_r(e)),
            _ => None,
        };
        let id = match (&line.just, initial) {
            (_, Some(l)) => g.b.weaken(l, std::slice::from_ref(&lo), std::slice::from_ref(&hi)),
            (Justification::ThrL(i), None) => {
                let (left, _) = g.thresh_increment(vars, *i, k)?;
                g.b.wl(left, &lo)
            }
            (Justification::ThrR(i), None) => {
                let (_, right) = g.thresh_increment(vars, *i, k)?;
                g.b.wr(right, &hi)
            }
            (Justification::Rule { rule, premises, principal }, None) => {
                let prem: Vec<LineId> = premises.iter().map(|i| map[*i]).collect();
                g.b.rule(*rule, &prem, principal)
            }
            (j, None) => return Err(unsupported(n, j)),
        };
        map.push(id);
    }
    Ok(*map.last().expect("non-empty proof"))
}

/// Bracketed eLNDT⁺ proof `thr[vars; k], Γ ⊢ Δ, thr[vars; k+1]` of a
/// threshold-dialect proof of `Γ ⊢ Δ`.
pub fn eliminate_tk(pk: &Proof) -> Result<Proof, SimError> {
    let mut g = Lemmas::positive();
    let root = eliminate_into(&mut g, pk)?;
    Ok(g.b.finish(root, true))
}

/// Token sizes of the pipeline stages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimReport {
    pub vars: usize,
    pub input: u64,
    pub minus: u64,
    pub stripped: u64,
    pub per_k: Vec<u64>,
    pub output: u64,
    pub lines: usize,
    pub rule_histogram: BTreeMap<String, usize>,
}

/// Simulates an eLNDT proof of `desugar(Γ) ⊢ desugar(Δ)` by an eLNDT⁺ proof
/// of `Γ ⊢ Δ`, for a positive, extension-free target in positive-decision
/// form.
pub fn simulate(p: &Proof, target: &Sequent) -> Result<Proof, SimError> {
    simulate_report(p, target, 1).map(|(q, _)| q)
}

/// [`simulate`] with stage sizes, running the per-`k` translations on up to
/// `jobs` threads.
pub fn simulate_report(p: &Proof, target: &Sequent, jobs: usize) -> Result<(Proof, SimReport), SimError> {
    require_positive(target)?;
    let source = map_seq(target, |f| Ok(desugar(f)))?;
    if !p.conclusion().same_as(&source) {
        return Err(SimError::Conclusion { got: p.conclusion().to_string(), want: source.to_string() });
    }
    let minus = translate_to_minus(p)?;
    let stripped = strip_negtrans(&minus, target)?;
    let vars = proof_vars(&stripped);
    let m = vars.len() as i64;

    let ks: Vec<i64> = (0..=m).collect();
    let jobs = jobs.max(1).min(ks.len());
    let mut tks: Vec<Option<Result<Proof, SimError>>> = (0..ks.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let chunks: Vec<_> = tks.chunks_mut(ks.len().div_ceil(jobs)).zip(ks.chunks(ks.len().div_ceil(jobs))).collect();
        for (out, kk) in chunks {
            let (stripped, vars) = (&stripped, &vars);
            s.spawn(move || {
                for (slot, k) in out.iter_mut().zip(kk) {
                    *slot = Some(translate_to_tk(stripped, *k, vars));
                }
            });
        }
    });
    let tks: Vec<Proof> = tks.into_iter().map(|t| t.expect("every k translated")).collect::<Result<_, _>>()?;

    let mut g = Lemmas::positive();
    let mut cur = g.mono0(&vars);
    for (k, pk) in ks.iter().zip(&tks) {
        let e = eliminate_into(&mut g, pk)?;
        let t = g.thr(&vars, *k);
        cur = cut(&mut g.b, cur, e, &t);
    }
    let end = g.mono2(&vars, m + 1)?;
    let t = g.thr(&vars, m + 1);
    cur = cut(&mut g.b, cur, end, &t);
    let root = g.b.structural_to(cur, target);
    let out = g.b.finish_as(root, target, false);
    debug_assert!(out.lines.iter().all(|l| l.seq.formulas().all(|f| !f.has_dec() && !f.has_negative_literal())));

    let report = SimReport {
        vars: vars.len(),
        input: p.size(),
        minus: minus.size(),
        stripped: stripped.size(),
        per_k: tks.iter().map(Proof::size).collect(),
        output: out.size(),
        lines: out.lines.len(),
        rule_histogram: out.rule_histogram(),
    };
    Ok((out, report))
}

// ---------------------------------------------------------------------------
// Positive to general decisions

/// Rewrites an eLNDT⁺ proof into eLNDT by desugaring every positive
/// decision. Each positive decision step becomes one general decision step
/// with a disjunction step on its right branch.
pub fn desugar_proof(p: &Proof) -> Result<Proof, SimError> {
    require_dialect(p, |d| *d == Dialect::Plus, "eLNDT+")?;
    let mut b = Builder::new(Dialect::Elndt, p.axioms.map_bodies(desugar));
    let root = desugar_into(&mut b, p)?;
    Ok(b.finish(root, p.intermediate))
}

/// Replays `p` into `b` with positive decisions desugared.
pub fn desugar_into(b: &mut Builder, p: &Proof) -> Result<LineId, SimError> {
    let mut map: Vec<LineId> = Vec::with_capacity(p.lines.len());
    for (n, line) in p.lines.iter().enumerate() {
        let id = match &line.just {
            Justification::Axiom0 => b.ax0(),
            Justification::Axiom1 => b.ax1(),
            Justification::Id(l) => b.id(*l),
            Justification::ExtLR(e) => b.ext_l(e),
            Justification::ExtRL(e) => b.ext_r(e),
            Justification::Rule { rule, premises, principal } => {
                let prem: Vec<LineId> = premises.iter().map(|i| map[*i]).collect();
                match (rule, principal.kind()) {
                    (Rule::PosPL, Kind::PosDec(x, l, y)) => {
                        let (dx, dy) = (desugar(x), desugar(y));
                        let (d, lf, or) = (desugar(principal), Formula::lit(*l), Formula::or(dx, dy));
                        let first = b.wr(prem[0], &lf);
                        let w = b.wl(prem[0], &lf);
                        let second = b.orl(w, prem[1], &or);
                        b.pl(first, second, &d)
                    }
                    (Rule::PosPR, Kind::PosDec(x, l, y)) => {
                        let (dx, dy) = (desugar(x), desugar(y));
                        let (d, lf, or) = (desugar(principal), Formula::lit(*l), Formula::or(dx, dy));
                        let o = b.orr(prem[1], &or);
                        let second = b.wl(o, &lf);
                        b.pr(prem[0], second, &d)
                    }
                    _ => b.rule(*rule, &prem, &desugar(principal)),
                }
            }
            j => return Err(unsupported(n, j)),
        };
        map.push(id);
    }
    Ok(*map.last().expect("non-empty proof"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequent::{check_soundness, prove_by_search};
    use crate::term::{eval, parse_formula_any, Assignment};

    fn f(s: &str) -> Formula {
        parse_formula_any(s).unwrap()
    }

    fn seq(ante: &[&str], succ: &[&str]) -> Sequent {
        Sequent::new(ante.iter().map(|s| f(s)).collect(), succ.iter().map(|s| f(s)).collect())
    }

    fn elndt_proof(target: &Sequent) -> Proof {
        let p = prove_by_search(target, &ExtAxiomSet::new()).unwrap().proof().unwrap();
        desugar_proof(&p).unwrap()
    }

    #[test]
    fn negtrans_examples() {
        assert_eq!(negtrans(&f("p3")), f("p3"));
        assert_eq!(negtrans(&f("dec(0, p1, 1)")), f("or(pdec(0, ~p1, 0), pdec(0, p1, 1))"));
    }

    #[test]
    fn negtrans_preserves_semantics() {
        let g = f("dec(or(p0, dec(p2, p1, 0)), p0, dec(1, p2, p1))");
        let ng = negtrans(&g);
        let ax = ExtAxiomSet::new();
        for bits in 0..8u32 {
            let a = Assignment::from_ones((0..3).filter(|i| bits >> i & 1 == 1).map(PropVar));
            assert_eq!(eval(&g, &ax, &a).unwrap(), eval(&ng, &ax, &a).unwrap());
        }
    }

    #[test]
    fn negtrans_truth_items_check() {
        for (a, b) in [("0", "1"), ("p1", "or(p2, p0)"), ("dec(p2, p0, 1)", "p2")] {
            for p in gen_negtrans_truth(&f(a), Literal::pos(PropVar(0)), &f(b), &ExtAxiomSet::new()) {
                check_proof(&p).unwrap();
                assert!(check_soundness(&p, 12).unwrap().is_sound());
            }
        }
    }

    #[test]
    fn refthr_truth_items_check() {
        let w = [PropVar(0), PropVar(1)];
        for k in -1..=3 {
            for p in gen_refthr_truth(&w, k, &f("p2"), &f("1"), &ExtAxiomSet::new()).unwrap() {
                check_proof(&p).unwrap();
                assert!(check_soundness(&p, 12).unwrap().is_sound(), "k = {k}");
            }
        }
    }

    #[test]
    fn desugared_search_proofs_are_elndt() {
        let s = seq(&["pdec(p0, p1, p2)"], &["or(p0, p2)"]);
        let p = elndt_proof(&s);
        assert_eq!(p.dialect, Dialect::Elndt);
        check_proof(&p).unwrap();
        assert!(p.conclusion().same_as(&map_seq(&s, |x| Ok(desugar(x))).unwrap()));
    }

    #[test]
    fn minus_and_strip_round_trip() {
        let s = seq(&["pdec(0, p0, p1)", "p2"], &["pdec(p2, p1, p0)"]);
        let p = elndt_proof(&s);
        let m = translate_to_minus(&p).unwrap();
        check_proof(&m).unwrap();
        let st = strip_negtrans(&m, &s).unwrap();
        check_proof(&st).unwrap();
        assert_eq!(st.conclusion(), &s);
        assert!(check_soundness(&st, 12).unwrap().is_sound());
    }

    #[test]
    fn tk_translations_check() {
        let s = seq(&["pdec(0, p0, p1)"], &["pdec(0, p1, p0)"]);
        let st = strip_negtrans(&translate_to_minus(&elndt_proof(&s)).unwrap(), &s).unwrap();
        let vars = proof_vars(&st);
        for k in 0..=vars.len() as i64 {
            let pk = translate_to_tk(&st, k, &vars).unwrap();
            check_proof(&pk).unwrap();
            let e = eliminate_tk(&pk).unwrap();
            check_proof(&e).unwrap();
            assert!(check_soundness(&e, 14).unwrap().is_sound());
        }
    }

    #[test]
    fn simulation_keeps_the_conclusion() {
        let s = seq(&["p0"], &["or(p0, p1)"]);
        let p = elndt_proof(&s);
        let q = simulate(&p, &s).unwrap();
        check_proof(&q).unwrap();
        assert_eq!(q.conclusion(), &s);
        assert_eq!(q.dialect, Dialect::Plus);
        q.axioms.check().unwrap();
    }

    #[test]
    fn simulation_rejects_negative_targets() {
        let s = seq(&["~p0"], &["~p0"]);
        let p = Proof {
            dialect: Dialect::Elndt,
            axioms: ExtAxiomSet::new(),
            hypotheses: vec![],
            lines: vec![],
            intermediate: false,
        };
        assert!(matches!(simulate(&p, &s), Err(SimError::NotPositive(_))));
    }
}
