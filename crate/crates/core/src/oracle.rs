//! Bit-parallel brute-force semantics.
//!
//! A formula's table is a bit vector with one bit per row, where a row is
//! either one of the `2^n` assignments over the variable list or an
//! explicitly supplied sample. Tables are cached per formula node, so an
//! extension variable's body is evaluated once for all rows.

use rustc_hash::FxHashMap as HashMap;
use std::sync::Arc;

use rand::Rng;

use crate::term::{Assignment, EvalError, ExtAxiomSet, Formula, Kind, PropVar};

pub type Table = Arc<Vec<u64>>;

pub struct TableEval<'a> {
    ax: &'a ExtAxiomSet,
    rows: usize,
    var_tables: HashMap<PropVar, Table>,
    full: Table,
    cache: HashMap<Formula, Table>,
}

fn blocks(rows: usize) -> usize {
    rows.div_ceil(64).max(1)
}

impl<'a> TableEval<'a> {
    /// All `2^n` assignments over `vars`, in [`Assignment::from_index`] order.
    pub fn new(vars: Vec<PropVar>, ax: &'a ExtAxiomSet, cap: usize) -> Result<Self, EvalError> {
        if vars.len() > cap {
            return Err(EvalError::CapExceeded { vars: vars.len(), cap });
        }
        let n = vars.len();
        let rows = 1usize << n;
        let mut var_tables = HashMap::default();
        for (j, v) in vars.iter().enumerate() {
            let shift = n - 1 - j;
            let mut t = vec![0u64; blocks(rows)];
            for i in 0..rows {
                if (i >> shift) & 1 == 1 {
                    t[i / 64] |= 1 << (i % 64);
                }
            }
            if var_tables.insert(*v, Arc::new(t)).is_some() {
                return Err(EvalError::DuplicateVar(*v));
            }
        }
        Ok(Self::finish(ax, rows, var_tables))
    }

    /// Explicit rows; variables absent from every sample read as 0.
    pub fn from_samples(samples: &[Assignment], ax: &'a ExtAxiomSet) -> Self {
        let rows = samples.len();
        let mut var_tables: HashMap<PropVar, Vec<u64>> = HashMap::default();
        for (i, s) in samples.iter().enumerate() {
            for v in s.ones() {
                var_tables.entry(v).or_insert_with(|| vec![0u64; blocks(rows)])[i / 64] |= 1 << (i % 64);
            }
        }
        let var_tables = var_tables.into_iter().map(|(v, t)| (v, Arc::new(t))).collect();
        Self::finish(ax, rows, var_tables)
    }

    /// `count` uniformly random assignments over `vars`.
    pub fn random<R: Rng>(vars: &[PropVar], count: usize, ax: &'a ExtAxiomSet, rng: &mut R) -> (Self, Vec<Assignment>) {
        let samples: Vec<Assignment> =
            (0..count).map(|_| Assignment::from_ones(vars.iter().copied().filter(|_| rng.gen::<bool>()))).collect();
        (Self::from_samples(&samples, ax), samples)
    }

    fn finish(ax: &'a ExtAxiomSet, rows: usize, var_tables: HashMap<PropVar, Table>) -> Self {
        let mut full = vec![u64::MAX; blocks(rows)];
        let tail = rows % 64;
        if tail != 0 {
            *full.last_mut().unwrap() = (1u64 << tail) - 1;
        }
        if rows == 0 {
            full = vec![0];
        }
        TableEval { ax, rows, var_tables, full: Arc::new(full), cache: HashMap::default() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn bit(t: &[u64], i: usize) -> bool {
        (t[i / 64] >> (i % 64)) & 1 == 1
    }

    fn zeros(&self) -> Vec<u64> {
        vec![0; self.full.len()]
    }

    fn var(&self, v: PropVar) -> Table {
        self.var_tables.get(&v).cloned().unwrap_or_else(|| Arc::new(self.zeros()))
    }

    pub fn table(&mut self, f: &Formula) -> Result<Table, EvalError> {
        if let Some(t) = self.cache.get(f) {
            return Ok(t.clone());
        }
        let full = self.full.clone();
        let t: Table = match f.kind() {
            Kind::Zero => Arc::new(self.zeros()),
            Kind::One => full.clone(),
            Kind::Lit(l) => {
                let t = self.var(l.var);
                if l.positive {
                    t
                } else {
                    Arc::new(t.iter().zip(full.iter()).map(|(x, m)| !x & m).collect())
                }
            }
            Kind::Ext(e) => {
                let body = self.ax.body(e).ok_or_else(|| EvalError::Undefined(e.to_string()))?.clone();
                self.table(&body)?
            }
            Kind::Or(a, b) => {
                let (ta, tb) = (self.table(a)?, self.table(b)?);
                Arc::new(ta.iter().zip(tb.iter()).map(|(x, y)| x | y).collect())
            }
            Kind::Dec(a, l, b) => {
                let (ta, tb) = (self.table(a)?, self.table(b)?);
                let tp = self.table(&Formula::lit(*l))?;
                Arc::new((0..ta.len()).map(|i| (!tp[i] & ta[i]) | (tp[i] & tb[i])).collect())
            }
            Kind::PosDec(a, l, b) => {
                let (ta, tb) = (self.table(a)?, self.table(b)?);
                let tp = self.table(&Formula::lit(*l))?;
                Arc::new((0..ta.len()).map(|i| ta[i] | (tp[i] & tb[i])).collect())
            }
        };
        self.cache.insert(f.clone(), t.clone());
        Ok(t)
    }

    /// First row where every antecedent holds and every succedent fails.
    pub fn falsifying_row(&mut self, ante: &[Formula], succ: &[Formula]) -> Result<Option<usize>, EvalError> {
        let mut acc: Vec<u64> = self.full.to_vec();
        for f in ante {
            let t = self.table(f)?;
            for (x, y) in acc.iter_mut().zip(t.iter()) {
                *x &= y;
            }
        }
        for f in succ {
            let t = self.table(f)?;
            for (x, y) in acc.iter_mut().zip(t.iter()) {
                *x &= !y;
            }
        }
        Ok(acc.iter().enumerate().find(|(_, w)| **w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize))
    }
}
