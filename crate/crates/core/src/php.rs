//! The pigeonhole sequents and their three-stage positive proofs.
//!
//! Pigeon `i` (1-based, `i ≤ n+1`) in hole `j` (1-based, `j ≤ n`) is the
//! variable `p_{(i-1)·n + (j-1)}`, so the row words concatenate to the
//! variables in index order.

use crate::lemmas::Lemmas;
use crate::sequent::{LineId, Proof, Sequent};
use crate::term::{Formula, Literal, PropVar, Word};

pub fn pij(n: usize, i: usize, j: usize) -> PropVar {
    assert!((1..=n + 1).contains(&i) && (1..=n).contains(&j), "p[{i},{j}] out of range for n = {n}");
    PropVar(((i - 1) * n + (j - 1)) as u32)
}

/// `P_i`: the holes of pigeon `i`.
pub fn row(n: usize, i: usize) -> Word {
    (1..=n).map(|j| pij(n, i, j)).collect()
}

/// `P_j` read down a column: the pigeons of hole `j`.
pub fn column(n: usize, j: usize) -> Word {
    (1..=n + 1).map(|i| pij(n, i, j)).collect()
}

/// All rows concatenated.
pub fn rows(n: usize) -> Word {
    (1..=n + 1).flat_map(|i| row(n, i)).collect()
}

/// All columns concatenated; a permutation of [`rows`].
pub fn columns(n: usize) -> Word {
    (1..=n).flat_map(|j| column(n, j)).collect()
}

/// The collision terms `pdec(0, p_ij, p_i'j)` in `(j, i, i')` order.
fn collision_terms(n: usize) -> Vec<Formula> {
    let mut out = Vec::new();
    for j in 1..=n {
        for i in 1..=n {
            for i2 in i + 1..=n + 1 {
                out.push(hole_term(pij(n, i, j), pij(n, i2, j)));
            }
        }
    }
    out
}

fn hole_term(a: PropVar, b: PropVar) -> Formula {
    Formula::pdec(Formula::zero(), Literal::pos(a), Formula::var(b))
}

pub fn lphp(n: usize) -> Vec<Formula> {
    (1..=n + 1).map(|i| Formula::or_fold(row(n, i).into_iter().map(Formula::var))).collect()
}

pub fn rphp(n: usize) -> Formula {
    Formula::or_fold(collision_terms(n))
}

/// `PHP_n`: every pigeon sits in some hole, so some hole holds two.
pub fn php_sequent(n: usize) -> Sequent {
    assert!(n >= 1, "PHP needs at least one hole");
    Sequent::new(lphp(n), vec![rphp(n)])
}

/// Generators for the pigeonhole stages over one shared lemma store.
pub struct Php {
    pub n: usize,
    pub lem: Lemmas,
}

impl Php {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "PHP needs at least one hole");
        Php { n, lem: Lemmas::positive() }
    }

    /// `⋁ P_i ⊢ thr[P_i; 1]` by `orL` over the unit lemmas of the row.
    fn row_to_thr(&mut self, i: usize) -> LineId {
        let r = row(self.n, i);
        let mut disj = Formula::var(r[0]);
        let mut cur = self.lem.unit(&r, 0).expect("index in range");
        for j in 1..r.len() {
            let next = self.lem.unit(&r, j).expect("index in range");
            disj = Formula::or(disj, Formula::var(r[j]));
            cur = self.lem.b.orl(cur, next, &disj);
        }
        cur
    }

    /// `LPHP_n ⊢ thr[P; n+1]`
    pub fn left(&mut self) -> LineId {
        let n = self.n;
        let all = rows(n);
        // suffix(i) is the word of rows i..=n+1, which must reach n+2-i.
        let suffix = |i: usize| all[(i - 1) * n..].to_vec();
        let last = self.lem.thr(&suffix(n + 1), 1);
        let mut cur = self.lem.identity(&last);
        for i in (1..=n).rev() {
            let m = self.lem.merge(&row(n, i), &suffix(i + 1), 1, (n + 1 - i) as i64);
            let mid = self.lem.thr(&suffix(i + 1), (n + 1 - i) as i64);
            cur = self.lem.b.cut_merge(cur, m, &mid);
        }
        for i in 1..=n + 1 {
            let r = self.row_to_thr(i);
            let t = self.lem.thr(&row(n, i), 1);
            cur = self.lem.b.cut_merge(r, cur, &t);
        }
        cur
    }

    /// `thr[P; n+1] ⊢ thr[P^T; n+1]`
    pub fn transpose(&mut self) -> LineId {
        let k = self.n as i64 + 1;
        self.lem.symmetry(&rows(self.n), &columns(self.n), k).expect("transpose is a permutation").fwd
    }

    /// `q, thr[qs; 1] ⊢ {pdec(0, q, q_i)}_i`
    pub fn x_and_thr1(&mut self, q: PropVar, qs: &[PropVar]) -> LineId {
        let qf = Formula::var(q);
        let terms: Vec<Formula> = qs.iter().map(|v| hole_term(q, *v)).collect();
        let singles: Vec<Formula> = qs.iter().map(|v| self.lem.thr(&[*v], 1)).collect();
        let disj = Formula::or_fold(singles.iter().cloned());
        let t1 = self.lem.thr(qs, 1);

        // q, ⋁ thr[q_i; 1] ⊢ terms
        let mut from_disj: Option<LineId> = None;
        let mut acc = Formula::zero();
        for (idx, v) in qs.iter().enumerate() {
            let t4 = self.lem.truth4(&Formula::zero(), Literal::pos(q), &Formula::var(*v));
            let eq = self.lem.unit_eq(*v);
            let one = self.lem.b.cut_merge(eq.bwd, t4, &Formula::var(*v));
            let one = self.lem.b.structural_to(one, &Sequent::new(vec![qf.clone(), singles[idx].clone()], terms.clone()));
            from_disj = Some(match from_disj {
                None => {
                    acc = singles[idx].clone();
                    one
                }
                Some(prev) => {
                    acc = Formula::or(acc, singles[idx].clone());
                    self.lem.b.orl(prev, one, &acc)
                }
            });
        }
        let from_disj = match from_disj {
            Some(l) => l,
            None => {
                let z = self.lem.b.ax0();
                self.lem.b.wl(z, &qf)
            }
        };

        // thr[qs; 1] ⊢ ⋁ thr[q_i; 1]
        let to_disj = if qs.is_empty() {
            self.lem.b.ext_l(t1.as_ext().expect("extension variable"))
        } else {
            let mut cur = self.lem.identity(&t1);
            for s in 0..qs.len().saturating_sub(1) {
                let sp = self.lem.split(&qs[s..=s], &qs[s + 1..], 0, 1).expect("split parameters");
                let mid = self.lem.thr(&qs[s..], 1);
                cur = self.lem.b.cut_merge(cur, sp, &mid);
            }
            let mut acc = singles[0].clone();
            for s in &singles[1..] {
                acc = Formula::or(acc, s.clone());
                cur = self.lem.b.orr(cur, &acc);
            }
            cur
        };
        self.lem.b.cut_merge(to_disj, from_disj, &disj)
    }

    /// `thr[qs; 2] ⊢ {pdec(0, q_i, q_i')}_{i<i'}`
    pub fn two_in_hole(&mut self, qs: &[PropVar]) -> LineId {
        let t2 = self.lem.thr(qs, 2);
        let Some((&q, rest)) = qs.split_first() else {
            let unfold = self.lem.b.ext_l(t2.as_ext().expect("extension variable"));
            let z = self.lem.b.ax0();
            return self.lem.b.cut_merge(unfold, z, &Formula::zero());
        };
        let qf = Formula::var(q);
        let (single1, single2) = (self.lem.thr(&[q], 1), self.lem.thr(&[q], 2));
        let (rest2, rest1) = (self.lem.thr(rest, 2), self.lem.thr(rest, 1));

        let s1 = self.lem.split(&[q], rest, 0, 2).expect("split parameters");
        let eq = self.lem.unit_eq(q);
        let q_or_rest2 = self.lem.b.cut_merge(s1, eq.bwd, &single1);
        let s2 = self.lem.split(&[q], rest, 1, 1).expect("split parameters");
        let absurd = self.lem.mono2(&[q], 2).expect("2 exceeds one variable");
        let rest1_line = self.lem.b.cut_merge(s2, absurd, &single2);
        let x = self.x_and_thr1(q, rest);
        let with_q = self.lem.b.cut_merge(rest1_line, x, &rest1);
        let firsts = self.lem.b.cut_merge(q_or_rest2, with_q, &qf);
        let ih = self.two_in_hole(rest);
        self.lem.b.cut_merge(firsts, ih, &rest2)
    }

    /// `thr[P^T; n+1] ⊢ RPHP_n`
    pub fn right(&mut self) -> LineId {
        let n = self.n;
        let all = columns(n);
        let from = |j: usize| all[(j - 1) * (n + 1)..].to_vec();
        let top = self.lem.thr(&all, n as i64 + 1);
        let mut cur = self.lem.identity(&top);
        for j in 1..n {
            let l = (n + 1 - j) as i64;
            let sp = self.lem.split(&column(n, j), &from(j + 1), 1, l).expect("split parameters");
            let mid = self.lem.thr(&from(j), l + 1);
            cur = self.lem.b.cut_merge(cur, sp, &mid);
        }
        for j in 1..=n {
            let col = column(n, j);
            let h = self.two_in_hole(&col);
            let t = self.lem.thr(&col, 2);
            cur = self.lem.b.cut_merge(cur, h, &t);
        }
        let terms = collision_terms(n);
        let mut acc = terms[0].clone();
        for t in &terms[1..] {
            acc = Formula::or(acc, t.clone());
            cur = self.lem.b.orr(cur, &acc);
        }
        cur
    }

    /// `PHP_n` by cutting the three stages together.
    pub fn full(&mut self) -> LineId {
        let l = self.left();
        let t = self.transpose();
        let r = self.right();
        let k = self.n as i64 + 1;
        let (a, b) = (self.lem.thr(&rows(self.n), k), self.lem.thr(&columns(self.n), k));
        // The two cuts are emitted even when their conclusions already occur
        // inside a stage, which happens for n = 1.
        self.lem.b.set_sharing(false);
        let x = self.lem.b.cut_merge(l, t, &a);
        let root = self.lem.b.cut_merge(x, r, &b);
        self.lem.b.set_sharing(true);
        root
    }
}

fn stage(n: usize, f: impl FnOnce(&mut Php) -> LineId, target: impl FnOnce(&mut Php) -> Sequent) -> Proof {
    let mut p = Php::new(n);
    let root = f(&mut p);
    let t = target(&mut p);
    p.lem.b.finish_as(root, &t, true)
}

pub fn gen_php_left(n: usize) -> Proof {
    stage(n, Php::left, |p| {
        let t = p.lem.thr(&rows(n), n as i64 + 1);
        Sequent::new(lphp(n), vec![t])
    })
}

pub fn gen_php_transpose(n: usize) -> Proof {
    stage(n, Php::transpose, |p| {
        let k = n as i64 + 1;
        Sequent::new(vec![p.lem.thr(&rows(n), k)], vec![p.lem.thr(&columns(n), k)])
    })
}

pub fn gen_two_in_hole(qs: &[PropVar]) -> Proof {
    let mut p = Php::new(1);
    let root = p.two_in_hole(qs);
    let mut terms = Vec::new();
    for i in 0..qs.len() {
        for i2 in i + 1..qs.len() {
            terms.push(hole_term(qs[i], qs[i2]));
        }
    }
    let t = p.lem.thr(qs, 2);
    p.lem.b.finish_as(root, &Sequent::new(vec![t], terms), true)
}

pub fn gen_php_right(n: usize) -> Proof {
    stage(n, Php::right, |p| {
        let t = p.lem.thr(&columns(n), n as i64 + 1);
        Sequent::new(vec![t], vec![rphp(n)])
    })
}

/// Proof of exactly [`php_sequent`]`(n)`; extension variables occur only
/// on interior lines.
pub fn gen_php(n: usize) -> Proof {
    let mut p = Php::new(n);
    let root = p.full();
    p.lem.b.finish_as(root, &php_sequent(n), false)
}
