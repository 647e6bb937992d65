//! Non-deterministic branching programs as explicit DAGs.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::term::{Assignment, ExtAxiomSet, ExtVar, Formula, Literal, PropVar, TruthTable};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum NodeLabel {
    Var(PropVar),
    Sink(bool),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NbpError {
    #[error("node {0} does not exist")]
    NoSuchNode(usize),
    #[error("sink {0} has outgoing edges")]
    SinkWithEdges(usize),
    #[error("the program contains a cycle through node {0}")]
    Cycle(usize),
    #[error("root {0} has incoming edges")]
    RootHasParent(usize),
    #[error("node {0} is unreachable from the root")]
    Unreachable(usize),
    #[error("more than one sink labelled {0}")]
    DuplicateSink(u8),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A rooted DAG whose inner nodes test variables and whose edges carry the
/// bit they follow. A run on `α` accepts if it can reach the 1-sink.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Nbp {
    labels: Vec<NodeLabel>,
    root: usize,
    e0: BTreeSet<(usize, usize)>,
    e1: BTreeSet<(usize, usize)>,
}

impl Nbp {
    /// Builds and validates a program.
    pub fn new(
        labels: Vec<NodeLabel>,
        root: usize,
        e0: impl IntoIterator<Item = (usize, usize)>,
        e1: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, NbpError> {
        let g = Nbp { labels, root, e0: e0.into_iter().collect(), e1: e1.into_iter().collect() };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<(), NbpError> {
        let n = self.labels.len();
        if self.root >= n {
            return Err(NbpError::NoSuchNode(self.root));
        }
        for s in [false, true] {
            if self.labels.iter().filter(|l| **l == NodeLabel::Sink(s)).count() > 1 {
                return Err(NbpError::DuplicateSink(s as u8));
            }
        }
        for &(u, v) in self.e0.iter().chain(self.e1.iter()) {
            if u >= n {
                return Err(NbpError::NoSuchNode(u));
            }
            if v >= n {
                return Err(NbpError::NoSuchNode(v));
            }
            if matches!(self.labels[u], NodeLabel::Sink(_)) {
                return Err(NbpError::SinkWithEdges(u));
            }
            if v == self.root {
                return Err(NbpError::RootHasParent(v));
            }
        }
        self.topo_order()?;
        let reach = self.reachable();
        for (v, l) in self.labels.iter().enumerate() {
            if matches!(l, NodeLabel::Var(_)) && !reach[v] {
                return Err(NbpError::Unreachable(v));
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn zero_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.e0
    }

    pub fn one_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.e1
    }

    pub fn vars(&self) -> BTreeSet<PropVar> {
        self.labels
            .iter()
            .filter_map(|l| match l {
                NodeLabel::Var(p) => Some(*p),
                _ => None,
            })
            .collect()
    }

    fn succ(&self, u: usize, bit: bool) -> impl Iterator<Item = usize> + '_ {
        let e = if bit { &self.e1 } else { &self.e0 };
        e.range((u, 0)..(u + 1, 0)).map(|&(_, v)| v)
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.labels.len()];
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            if std::mem::replace(&mut seen[u], true) {
                continue;
            }
            stack.extend(self.succ(u, false).chain(self.succ(u, true)));
        }
        seen
    }

    /// Post-order from the root (children before parents), or the cycle.
    fn topo_order(&self) -> Result<Vec<usize>, NbpError> {
        // 0 = new, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.labels.len()];
        let mut order = Vec::new();
        let mut starts = vec![self.root];
        starts.extend(0..self.labels.len());
        for s in starts {
            if state[s] != 0 {
                continue;
            }
            let mut stack = vec![(s, false)];
            while let Some((u, expanded)) = stack.pop() {
                if expanded {
                    state[u] = 2;
                    order.push(u);
                    continue;
                }
                if state[u] == 2 {
                    continue;
                }
                if state[u] == 1 {
                    return Err(NbpError::Cycle(u));
                }
                state[u] = 1;
                stack.push((u, true));
                let kids: Vec<usize> = self.succ(u, false).chain(self.succ(u, true)).collect();
                for v in kids.into_iter().rev() {
                    match state[v] {
                        1 => return Err(NbpError::Cycle(v)),
                        0 => stack.push((v, false)),
                        _ => {}
                    }
                }
            }
        }
        Ok(order)
    }

    /// Single-node program that is the sink `b`.
    pub fn constant(b: bool) -> Self {
        Nbp { labels: vec![NodeLabel::Sink(b)], root: 0, e0: BTreeSet::new(), e1: BTreeSet::new() }
    }

    /// Reachability of the 1-sink along edges consistent with `a`.
    pub fn eval(&self, a: &Assignment) -> bool {
        let mut seen = vec![false; self.labels.len()];
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            if std::mem::replace(&mut seen[u], true) {
                continue;
            }
            match self.labels[u] {
                NodeLabel::Sink(true) => return true,
                NodeLabel::Sink(false) => {}
                NodeLabel::Var(p) => stack.extend(self.succ(u, a.get(p))),
            }
        }
        false
    }

    pub fn truth_table(&self, vars: &[PropVar]) -> TruthTable {
        TruthTable::from_fn(vars.to_vec(), |a| self.eval(a)).expect("duplicate-free variable list")
    }

    /// Every 0-edge has a parallel 1-edge.
    pub fn is_positive(&self) -> bool {
        self.e0.is_subset(&self.e1)
    }

    /// Same nodes; the 1-edges become `E0 ∪ E1`.
    pub fn positive_closure(&self) -> Nbp {
        let mut g = self.clone();
        g.e1.extend(self.e0.iter().copied());
        g
    }

    /// No path from the root tests a variable twice.
    pub fn is_read_once(&self) -> bool {
        let order = self.topo_order().expect("validated programs are acyclic");
        let reach = self.reachable();
        let mut below: HashMap<usize, BTreeSet<PropVar>> = HashMap::new();
        for u in order {
            let mut s = BTreeSet::new();
            for v in self.succ(u, false).chain(self.succ(u, true)) {
                if let NodeLabel::Var(q) = self.labels[v] {
                    s.insert(q);
                }
                s.extend(below[&v].iter().copied());
            }
            if let NodeLabel::Var(p) = self.labels[u] {
                if reach[u] && s.contains(&p) {
                    return false;
                }
            }
            below.insert(u, s);
        }
        true
    }

    /// Encodes the program as an eNDT formula with one extension variable
    /// per reachable inner node, numbered children first.
    ///
    /// Positive programs map a node with 0-successors `S0` and 1-successors
    /// `S1 ⊇ S0` to `pdec(⋁S0, p, ⋁(S1∖S0))`. Otherwise a deterministic
    /// node becomes `dec(a, p, b)` and any other node the left-folded
    /// disjunction of `dec(v, p, 0)` over `S0` followed by `dec(0, p, v)`
    /// over `S1`. Empty disjunctions are `0`.
    pub fn to_endt(&self) -> (Formula, ExtAxiomSet) {
        let positive = self.is_positive();
        let reach = self.reachable();
        let order = self.topo_order().expect("acyclic");
        let mut ax = ExtAxiomSet::new();
        let mut name: HashMap<usize, Formula> = HashMap::new();
        let mut next = 0u32;
        for u in order {
            if !reach[u] {
                continue;
            }
            let f = match self.labels[u] {
                NodeLabel::Sink(b) => {
                    if b {
                        Formula::one()
                    } else {
                        Formula::zero()
                    }
                }
                NodeLabel::Var(p) => {
                    let s0: Vec<usize> = self.succ(u, false).collect();
                    let s1: Vec<usize> = self.succ(u, true).collect();
                    let l = Literal::pos(p);
                    let body = if positive {
                        let a = Formula::or_fold(s0.iter().map(|v| name[v].clone()));
                        let b = Formula::or_fold(s1.iter().filter(|v| !s0.contains(v)).map(|v| name[v].clone()));
                        Formula::pdec(a, l, b)
                    } else if s0.len() == 1 && s1.len() == 1 {
                        Formula::dec(name[&s0[0]].clone(), l, name[&s1[0]].clone())
                    } else {
                        let zero = Formula::zero;
                        Formula::or_fold(
                            s0.iter()
                                .map(|v| Formula::dec(name[v].clone(), l, zero()))
                                .chain(s1.iter().map(|v| Formula::dec(zero(), l, name[v].clone()))),
                        )
                    };
                    let e = ExtVar::Plain(next);
                    next += 1;
                    ax.push(e.clone(), body).expect("fresh variable");
                    Formula::ext(e)
                }
            };
            name.insert(u, f);
        }
        (name[&self.root].clone(), ax)
    }

    /// Graphviz rendering: 0-edges dotted, 1-edges solid.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph nbp {\n");
        for (i, l) in self.labels.iter().enumerate() {
            let (label, shape) = match l {
                NodeLabel::Var(p) => (p.to_string(), "circle"),
                NodeLabel::Sink(b) => ((*b as u8).to_string(), "box"),
            };
            let _ = writeln!(s, "  n{i} [label=\"{label}\", shape={shape}];");
        }
        for &(u, v) in &self.e0 {
            let _ = writeln!(s, "  n{u} -> n{v} [style=dotted];");
        }
        for &(u, v) in &self.e1 {
            let _ = writeln!(s, "  n{u} -> n{v} [style=solid];");
        }
        s.push_str("}\n");
        s
    }

    /// Adjacency text: `root R`, `node I pN`, `sink I B`, `edge0 U V`,
    /// `edge1 U V`, one item per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("root {}\n", self.root);
        for (i, l) in self.labels.iter().enumerate() {
            match l {
                NodeLabel::Var(p) => {
                    let _ = writeln!(s, "node {i} {p}");
                }
                NodeLabel::Sink(b) => {
                    let _ = writeln!(s, "sink {i} {}", *b as u8);
                }
            }
        }
        for &(u, v) in &self.e0 {
            let _ = writeln!(s, "edge0 {u} {v}");
        }
        for &(u, v) in &self.e1 {
            let _ = writeln!(s, "edge1 {u} {v}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Nbp, NbpError> {
        let mut labels: Vec<Option<NodeLabel>> = Vec::new();
        let mut root = 0;
        let (mut e0, mut e1) = (Vec::new(), Vec::new());
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = t.split_whitespace().collect();
            let bad = |msg: &str| NbpError::Parse { line, msg: msg.to_string() };
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad("expected a number"));
            match parts.as_slice() {
                ["root", r] => root = num(r)?,
                ["node", i, p] => {
                    let i = num(i)?;
                    let v = p.strip_prefix('p').and_then(|d| d.parse().ok()).ok_or_else(|| bad("expected pN"))?;
                    if labels.len() <= i {
                        labels.resize(i + 1, None);
                    }
                    labels[i] = Some(NodeLabel::Var(PropVar(v)));
                }
                ["sink", i, b] => {
                    let i = num(i)?;
                    if labels.len() <= i {
                        labels.resize(i + 1, None);
                    }
                    labels[i] = Some(NodeLabel::Sink(*b == "1"));
                }
                ["edge0", u, v] => e0.push((num(u)?, num(v)?)),
                ["edge1", u, v] => e1.push((num(u)?, num(v)?)),
                _ => return Err(bad("unrecognised line")),
            }
        }
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| l.ok_or(NbpError::Parse { line: 0, msg: format!("node {i} is not declared") }))
            .collect::<Result<Vec<_>, _>>()?;
        Nbp::new(labels, root, e0, e1)
    }
}

/// Layered OBDD on `p1 … pn` computing "exactly `k` ones". Level `i`
/// holds one node per count `0..=i` of ones read so far.
pub fn build_exact_obdd(n: usize, k: i64) -> Nbp {
    if n == 0 {
        return Nbp::constant(k == 0);
    }
    let mut labels = Vec::new();
    let mut index = HashMap::new();
    for i in 0..n {
        for c in 0..=i {
            index.insert((i, c), labels.len());
            labels.push(NodeLabel::Var(PropVar(i as u32 + 1)));
        }
    }
    let sink0 = labels.len();
    labels.push(NodeLabel::Sink(false));
    let sink1 = labels.len();
    labels.push(NodeLabel::Sink(true));
    let target = |i: usize, c: usize| {
        if i + 1 < n {
            index[&(i + 1, c)]
        } else if c as i64 == k {
            sink1
        } else {
            sink0
        }
    };
    let (mut e0, mut e1) = (Vec::new(), Vec::new());
    for i in 0..n {
        for c in 0..=i {
            let u = index[&(i, c)];
            e0.push((u, target(i, c)));
            e1.push((u, target(i, c + 1)));
        }
    }
    Nbp::new(labels, 0, e0, e1).expect("layered construction is well formed")
}

/// Random ordered (hence read-once) program over `p0 … p(vars-1)`: inner
/// node `i` tests a variable no smaller than its parents' and edges only
/// go to strictly later variables or sinks.
pub fn random_read_once<R: Rng>(rng: &mut R, vars: usize, inner: usize, edge_p: f64) -> Nbp {
    random_program(rng, vars, inner, edge_p, true)
}

/// Random program whose inner nodes may repeat variables along a path.
pub fn random_nbp<R: Rng>(rng: &mut R, vars: usize, inner: usize, edge_p: f64) -> Nbp {
    random_program(rng, vars, inner, edge_p, false)
}

fn random_program<R: Rng>(rng: &mut R, vars: usize, inner: usize, edge_p: f64, ordered: bool) -> Nbp {
    let inner = inner.max(1);
    let mut var_of: Vec<u32> = (0..inner).map(|_| rng.gen_range(0..vars as u32)).collect();
    if ordered {
        var_of.sort_unstable();
    }
    let mut labels: Vec<NodeLabel> = var_of.iter().map(|v| NodeLabel::Var(PropVar(*v))).collect();
    let sink0 = labels.len();
    labels.push(NodeLabel::Sink(false));
    let sink1 = labels.len();
    labels.push(NodeLabel::Sink(true));
    let (mut e0, mut e1) = (Vec::new(), Vec::new());
    for u in 0..inner {
        let targets: Vec<usize> =
            ((u + 1)..inner).filter(|&v| !ordered || var_of[v] > var_of[u]).chain([sink0, sink1]).collect();
        for bit in [false, true] {
            let mut any = false;
            for &v in &targets {
                if rng.gen_bool(edge_p) {
                    any = true;
                    if bit { e1.push((u, v)) } else { e0.push((u, v)) }
                }
            }
            if !any && rng.gen_bool(0.5) {
                let v = targets[rng.gen_range(0..targets.len())];
                if bit { e1.push((u, v)) } else { e0.push((u, v)) }
            }
        }
    }
    // keep only what the root reaches, so validation accepts the program
    let g = Nbp { labels, root: 0, e0: e0.into_iter().collect(), e1: e1.into_iter().collect() };
    let reach = g.reachable();
    let keep: Vec<usize> = (0..g.labels.len()).filter(|&v| reach[v] || v == sink0 || v == sink1).collect();
    let renum: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let labels = keep.iter().map(|&v| g.labels[v]).collect();
    let map = |es: &BTreeSet<(usize, usize)>| -> Vec<(usize, usize)> {
        es.iter().filter(|(u, _)| reach[*u]).map(|(u, v)| (renum[u], renum[v])).collect()
    };
    Nbp::new(labels, 0, map(&g.e0), map(&g.e1)).expect("random program is well formed")
}

pub fn eval_nbp(g: &Nbp, a: &Assignment) -> bool {
    g.eval(a)
}

pub fn is_positive_nbp(g: &Nbp) -> bool {
    g.is_positive()
}

pub fn positive_closure(g: &Nbp) -> Nbp {
    g.positive_closure()
}

pub fn is_read_once(g: &Nbp) -> bool {
    g.is_read_once()
}

pub fn nbp_to_endt(g: &Nbp) -> (Formula, ExtAxiomSet) {
    g.to_endt()
}
