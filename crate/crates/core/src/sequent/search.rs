//! Cut-free proof search for positive sequents.
//!
//! All logical rules of the positive calculus are invertible, so search
//! never backtracks: the principal formula is the leftmost non-atomic
//! formula, antecedent first. Extension variables are unfolded by cutting
//! against their axioms. Atomic sequents close by `0 ⊢`, `⊢ 1`, an identity
//! or a negation initial sequent, followed by weakenings; otherwise they
//! yield a countermodel.

use rustc_hash::FxHashMap;

use thiserror::Error;

use super::{Builder, LineId, Proof, SeqKey, Sequent};
use crate::dialect::Dialect;
use crate::term::{is_positive, Assignment, ExtAxiomSet, Formula, Kind, Literal};

pub const DEFAULT_SEARCH_LINES: usize = 500_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("formula {0} is not positive")]
    NotPositive(String),
    #[error("undefined extension variable {0}")]
    Undefined(String),
    #[error("search exceeded {0} lines")]
    ResourceCap(usize),
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Proof(Proof),
    Countermodel(Assignment),
}

impl SearchOutcome {
    pub fn proof(self) -> Option<Proof> {
        match self {
            SearchOutcome::Proof(p) => Some(p),
            SearchOutcome::Countermodel(_) => None,
        }
    }
}

struct Search<'b> {
    b: &'b mut Builder,
    failed: FxHashMap<SeqKey, Assignment>,
    cap: usize,
}

fn without(v: &[Formula], i: usize) -> Vec<Formula> {
    let mut v = v.to_vec();
    v.remove(i);
    v
}

fn with(mut v: Vec<Formula>, extra: &[&Formula]) -> Vec<Formula> {
    v.extend(extra.iter().map(|f| (*f).clone()));
    v
}

impl Search<'_> {
    fn run(&mut self, s: &Sequent) -> Result<Result<LineId, Assignment>, SearchError> {
        if let Some(id) = self.b.find(s) {
            return Ok(Ok(id));
        }
        let key = s.key();
        if let Some(a) = self.failed.get(&key) {
            return Ok(Err(a.clone()));
        }
        if self.b.len() > self.cap {
            return Err(SearchError::ResourceCap(self.cap));
        }
        let r = self.step(s)?;
        if let Err(a) = &r {
            self.failed.insert(key, a.clone());
        }
        Ok(r)
    }

    fn step(&mut self, s: &Sequent) -> Result<Result<LineId, Assignment>, SearchError> {
        let (g, d) = (&s.ante, &s.succ);
        if let Some(i) = g.iter().position(|f| !f.is_atomic()) {
            let x = g[i].clone();
            let rest = without(g, i);
            return Ok(match x.kind() {
                Kind::Or(a, b) => {
                    let l1 = self.run(&Sequent::new(with(rest.clone(), &[a]), d.clone()))?;
                    let l1 = match l1 {
                        Ok(l) => l,
                        Err(m) => return Ok(Err(m)),
                    };
                    match self.run(&Sequent::new(with(rest, &[b]), d.clone()))? {
                        Ok(l2) => Ok(self.b.orl(l1, l2, &x)),
                        Err(m) => Err(m),
                    }
                }
                Kind::PosDec(a, p, b) => {
                    let pf = Formula::lit(*p);
                    let l1 = match self.run(&Sequent::new(with(rest.clone(), &[a]), d.clone()))? {
                        Ok(l) => l,
                        Err(m) => return Ok(Err(m)),
                    };
                    match self.run(&Sequent::new(with(rest, &[&pf, b]), d.clone()))? {
                        Ok(l2) => Ok(self.b.posl(l1, l2, &x)),
                        Err(m) => Err(m),
                    }
                }
                Kind::Ext(e) => {
                    let body = self.b.ax.body(e).ok_or_else(|| SearchError::Undefined(e.to_string()))?.clone();
                    match self.run(&Sequent::new(with(rest.clone(), &[&body]), d.clone()))? {
                        Ok(l) => {
                            // Γ,e ⊢ Δ,A  and  Γ,e,A ⊢ Δ, cut on A
                            let ax = self.b.ext_l(e);
                            let left = self.b.weaken(ax, &rest, d);
                            let right = self.b.wl(l, &x);
                            Ok(self.b.cut(left, right, &body))
                        }
                        Err(m) => Err(m),
                    }
                }
                _ => return Err(SearchError::NotPositive(x.to_string())),
            });
        }
        if let Some(i) = d.iter().position(|f| !f.is_atomic()) {
            let x = d[i].clone();
            let rest = without(d, i);
            return Ok(match x.kind() {
                Kind::Or(a, b) => match self.run(&Sequent::new(g.clone(), with(rest, &[a, b])))? {
                    Ok(l) => Ok(self.b.orr(l, &x)),
                    Err(m) => Err(m),
                },
                Kind::PosDec(a, p, b) => {
                    let pf = Formula::lit(*p);
                    let l1 = match self.run(&Sequent::new(g.clone(), with(rest.clone(), &[a, &pf])))? {
                        Ok(l) => l,
                        Err(m) => return Ok(Err(m)),
                    };
                    match self.run(&Sequent::new(g.clone(), with(rest, &[a, b])))? {
                        Ok(l2) => Ok(self.b.posr(l1, l2, &x)),
                        Err(m) => Err(m),
                    }
                }
                Kind::Ext(e) => {
                    let body = self.b.ax.body(e).ok_or_else(|| SearchError::Undefined(e.to_string()))?.clone();
                    match self.run(&Sequent::new(g.clone(), with(rest.clone(), &[&body])))? {
                        Ok(l) => {
                            // Γ ⊢ Δ,e,A  and  Γ,A ⊢ Δ,e, cut on A
                            let left = self.b.wr(l, &x);
                            let ax = self.b.ext_r(e);
                            let right = self.b.weaken(ax, g, &rest);
                            Ok(self.b.cut(left, right, &body))
                        }
                        Err(m) => Err(m),
                    }
                }
                _ => return Err(SearchError::NotPositive(x.to_string())),
            });
        }
        Ok(self.close_atomic(s))
    }

    fn close_atomic(&mut self, s: &Sequent) -> Result<LineId, Assignment> {
        let (g, d) = (&s.ante, &s.succ);
        let zero = Formula::zero();
        let one = Formula::one();
        let init = if g.contains(&zero) {
            Some(self.b.ax0())
        } else if d.contains(&one) {
            Some(self.b.ax1())
        } else if let Some(f) = g.iter().find(|f| d.contains(f)) {
            Some(self.b.id(f.as_lit().expect("atomic")))
        } else {
            let lits = |side: &[Formula]| side.iter().filter_map(Formula::as_lit).collect::<Vec<Literal>>();
            let (gl, dl) = (lits(g), lits(d));
            if let Some(l) = gl.iter().find(|l| l.positive && gl.contains(&l.complement())) {
                Some(self.b.neg_l(l.var))
            } else if let Some(l) = dl.iter().find(|l| l.positive && dl.contains(&l.complement())) {
                Some(self.b.neg_r(l.var))
            } else {
                None
            }
        };
        match init {
            Some(l) => Ok(self.b.structural_to(l, s)),
            None => {
                let mut a = Assignment::new();
                for f in g {
                    if let Some(l) = f.as_lit() {
                        a.set(l.var, l.positive);
                    }
                }
                for f in d {
                    if let Some(l) = f.as_lit() {
                        if !l.positive {
                            a.set(l.var, true);
                        }
                    }
                }
                Err(a)
            }
        }
    }
}

/// Searches inside an existing builder, sharing its lines.
pub fn search_in(b: &mut Builder, s: &Sequent, cap: usize) -> Result<Result<LineId, Assignment>, SearchError> {
    Search { b, failed: FxHashMap::default(), cap }.run(s)
}

/// Cut-free search for a positive sequent. Returns a checkable proof or an
/// assignment falsifying the sequent.
pub fn prove_by_search(s: &Sequent, ax: &ExtAxiomSet) -> Result<SearchOutcome, SearchError> {
    for f in s.formulas() {
        if f.has_dec() || (!is_positive(f) && !f.has_negative_literal()) {
            return Err(SearchError::NotPositive(f.to_string()));
        }
    }
    let negative = s.formulas().any(Formula::has_negative_literal)
        || ax.iter().any(|(_, b)| b.has_negative_literal());
    let dialect = if negative { Dialect::PlusMinus } else { Dialect::Plus };
    let mut b = Builder::new(dialect, ax.clone());
    Ok(match search_in(&mut b, s, DEFAULT_SEARCH_LINES)? {
        Ok(root) => SearchOutcome::Proof(b.finish_as(root, s, s.has_ext())),
        Err(a) => SearchOutcome::Countermodel(a),
    })
}
