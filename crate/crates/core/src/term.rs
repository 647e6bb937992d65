//! eNDT formulas in a hash-consed term graph, extension-axiom sets and
//! single-assignment semantics.
//!
//! Every formula is interned: two formulas are structurally equal exactly
//! when they are the same node, so equality and hashing are O(1).

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, LazyLock, Mutex};

use indexmap::IndexMap;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::dialect::Dialect;
use crate::oracle::TableEval;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PropVar(pub u32);

impl fmt::Display for PropVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Literal {
    pub var: PropVar,
    pub positive: bool,
}

impl Literal {
    pub fn pos(v: PropVar) -> Self {
        Literal { var: v, positive: true }
    }

    pub fn neg(v: PropVar) -> Self {
        Literal { var: v, positive: false }
    }

    pub fn complement(self) -> Self {
        Literal { var: self.var, positive: !self.positive }
    }

    pub fn holds(self, a: &Assignment) -> bool {
        a.get(self.var) == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.var)
        } else {
            write!(f, "~{}", self.var)
        }
    }
}

pub type Word = Vec<PropVar>;

/// Identity of an extension variable. Counting families are keyed by their
/// parameters, so requesting `thr[p q; 1]` twice names the same variable.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ExtVar {
    Plain(u32),
    /// Copy of `Plain(index)` living in a separate namespace `scope`; used
    /// when one axiom set is translated several times.
    Scoped { index: u32, scope: u32 },
    Exact { word: Word, k: i64 },
    Thr { word: Word, k: i64 },
    /// Threshold decision: semantically `left ∨ (thr[word; k] ∧ right)`.
    RefThr { word: Word, k: i64, left: Formula, right: Formula },
}

impl ExtVar {
    pub fn thr(word: &[PropVar], k: i64) -> Self {
        ExtVar::Thr { word: word.to_vec(), k }
    }

    pub fn exact(word: &[PropVar], k: i64) -> Self {
        ExtVar::Exact { word: word.to_vec(), k }
    }

    pub fn refthr(word: &[PropVar], k: i64, left: Formula, right: Formula) -> Self {
        ExtVar::RefThr { word: word.to_vec(), k, left, right }
    }
}

fn write_word(f: &mut fmt::Formatter<'_>, word: &[PropVar]) -> fmt::Result {
    for (i, v) in word.iter().enumerate() {
        if i > 0 {
            write!(f, " ")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

impl fmt::Display for ExtVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtVar::Plain(i) => write!(f, "e{i}"),
            ExtVar::Scoped { index, scope } => write!(f, "e{index}@{scope}"),
            ExtVar::Exact { word, k } => {
                write!(f, "ex[")?;
                write_word(f, word)?;
                write!(f, "; {k}]")
            }
            ExtVar::Thr { word, k } => {
                write!(f, "thr[")?;
                write_word(f, word)?;
                write!(f, "; {k}]")
            }
            ExtVar::RefThr { word, k, left, right } => {
                write!(f, "rthr[")?;
                write_word(f, word)?;
                write!(f, "; {k}; {left}; {right}]")
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Kind {
    Zero,
    One,
    Lit(Literal),
    Ext(ExtVar),
    Or(Formula, Formula),
    /// `Dec(a, p, b)`: if `p` then `b` else `a`.
    Dec(Formula, Literal, Formula),
    /// `PosDec(a, p, b)`: `a ∨ (p ∧ b)`.
    PosDec(Formula, Literal, Formula),
}

const HAS_EXT: u8 = 1;
const HAS_NEG: u8 = 2;
const HAS_DEC: u8 = 4;
const HAS_POSDEC: u8 = 8;

struct Node {
    id: u64,
    kind: Kind,
    tokens: u64,
    flags: u8,
}

/// Handle to an interned formula node.
#[derive(Clone)]
pub struct Formula(Arc<Node>);

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}

impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state);
    }
}

impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Formula {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.id.cmp(&other.0.id)
    }
}

struct Interner {
    table: FxHashMap<Kind, Formula>,
    next: u64,
}

static INTERNER: LazyLock<Mutex<Interner>> =
    LazyLock::new(|| Mutex::new(Interner { table: FxHashMap::default(), next: 0 }));

fn intern(kind: Kind) -> Formula {
    let (tokens, flags) = match &kind {
        Kind::Zero | Kind::One => (1, 0),
        Kind::Lit(l) => (1, if l.positive { 0 } else { HAS_NEG }),
        Kind::Ext(_) => (1, HAS_EXT),
        Kind::Or(a, b) => (a.tokens().saturating_add(b.tokens()).saturating_add(1), a.0.flags | b.0.flags),
        Kind::Dec(a, l, b) | Kind::PosDec(a, l, b) => {
            let own = match &kind {
                Kind::Dec(..) => HAS_DEC,
                _ => HAS_POSDEC,
            };
            let neg = if l.positive { 0 } else { HAS_NEG };
            (
                a.tokens().saturating_add(b.tokens()).saturating_add(3),
                a.0.flags | b.0.flags | own | neg,
            )
        }
    };
    let mut guard = INTERNER.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(f) = guard.table.get(&kind) {
        return f.clone();
    }
    let id = guard.next;
    guard.next += 1;
    let f = Formula(Arc::new(Node { id, kind: kind.clone(), tokens, flags }));
    guard.table.insert(kind, f.clone());
    f
}

impl Formula {
    pub fn zero() -> Self {
        intern(Kind::Zero)
    }

    pub fn one() -> Self {
        intern(Kind::One)
    }

    pub fn lit(l: Literal) -> Self {
        intern(Kind::Lit(l))
    }

    pub fn var(v: PropVar) -> Self {
        Self::lit(Literal::pos(v))
    }

    pub fn neg(v: PropVar) -> Self {
        Self::lit(Literal::neg(v))
    }

    pub fn ext(e: ExtVar) -> Self {
        intern(Kind::Ext(e))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        intern(Kind::Or(a, b))
    }

    pub fn dec(a: Formula, p: Literal, b: Formula) -> Self {
        intern(Kind::Dec(a, p, b))
    }

    pub fn pdec(a: Formula, p: Literal, b: Formula) -> Self {
        intern(Kind::PosDec(a, p, b))
    }

    pub fn thr(word: &[PropVar], k: i64) -> Self {
        Self::ext(ExtVar::thr(word, k))
    }

    pub fn exact(word: &[PropVar], k: i64) -> Self {
        Self::ext(ExtVar::exact(word, k))
    }

    /// Left fold of `or` over a non-empty list; `0` for the empty list.
    pub fn or_fold<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Self::zero(),
            Some(first) => it.fold(first, Formula::or),
        }
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    /// Interning id; stable only within one process.
    pub fn id(&self) -> u64 {
        self.0.id
    }

    /// Token count of the notation tree: atoms and extension variables are 1,
    /// `or` adds 1, decisions add 3.
    pub fn tokens(&self) -> u64 {
        self.0.tokens
    }

    pub fn has_ext(&self) -> bool {
        self.0.flags & HAS_EXT != 0
    }

    pub fn has_negative_literal(&self) -> bool {
        self.0.flags & HAS_NEG != 0
    }

    pub fn has_dec(&self) -> bool {
        self.0.flags & HAS_DEC != 0
    }

    pub fn has_posdec(&self) -> bool {
        self.0.flags & HAS_POSDEC != 0
    }

    pub fn as_ext(&self) -> Option<&ExtVar> {
        match self.kind() {
            Kind::Ext(e) => Some(e),
            _ => None,
        }
    }

    pub fn as_lit(&self) -> Option<Literal> {
        match self.kind() {
            Kind::Lit(l) => Some(*l),
            _ => None,
        }
    }

    /// Constants and literals.
    pub fn is_atomic(&self) -> bool {
        matches!(self.kind(), Kind::Zero | Kind::One | Kind::Lit(_))
    }

    /// Extension variables occurring in this formula, in first-occurrence
    /// order. Bodies are not unfolded.
    pub fn ext_vars(&self) -> Vec<ExtVar> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut stack = vec![self.clone()];
        while let Some(f) = stack.pop() {
            if !f.has_ext() || !seen.insert(f.clone()) {
                continue;
            }
            match f.kind() {
                Kind::Ext(e) => out.push(e.clone()),
                Kind::Or(a, b) | Kind::Dec(a, _, b) | Kind::PosDec(a, _, b) => {
                    stack.push(b.clone());
                    stack.push(a.clone());
                }
                _ => {}
            }
        }
        out
    }

    /// Propositional variables occurring syntactically (bodies not unfolded,
    /// counting-family words included).
    pub fn syntactic_vars(&self) -> BTreeSet<PropVar> {
        let mut seen = HashSet::new();
        let mut out = BTreeSet::new();
        let mut stack = vec![self.clone()];
        while let Some(f) = stack.pop() {
            if !seen.insert(f.clone()) {
                continue;
            }
            match f.kind() {
                Kind::Zero | Kind::One => {}
                Kind::Lit(l) => {
                    out.insert(l.var);
                }
                Kind::Ext(e) => match e {
                    ExtVar::Plain(_) | ExtVar::Scoped { .. } => {}
                    ExtVar::Exact { word, .. } | ExtVar::Thr { word, .. } => out.extend(word.iter().copied()),
                    ExtVar::RefThr { word, left, right, .. } => {
                        out.extend(word.iter().copied());
                        stack.push(left.clone());
                        stack.push(right.clone());
                    }
                },
                Kind::Or(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Kind::Dec(a, l, b) | Kind::PosDec(a, l, b) => {
                    out.insert(l.var);
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
            }
        }
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            Kind::Zero => write!(f, "0"),
            Kind::One => write!(f, "1"),
            Kind::Lit(l) => write!(f, "{l}"),
            Kind::Ext(e) => write!(f, "{e}"),
            Kind::Or(a, b) => write!(f, "or({a}, {b})"),
            Kind::Dec(a, l, b) => write!(f, "dec({a}, {l}, {b})"),
            Kind::PosDec(a, l, b) => write!(f, "pdec({a}, {l}, {b})"),
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("extension variable in decision position at byte {pos}")]
    ExtInDecision { pos: usize },
    #[error("dialect {dialect} forbids {what} in {formula}")]
    Dialect { dialect: String, what: String, formula: String },
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError::Syntax { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), FormulaError> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_ascii_alphabetic() {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.src[start..self.pos].to_string()
    }

    fn int(&mut self) -> Result<i64, FormulaError> {
        self.skip_ws();
        let start = self.pos;
        if self.src[self.pos..].starts_with('-') {
            self.pos += 1;
        }
        while self.src[self.pos..].chars().next().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| FormulaError::Syntax { pos: start, msg: "expected integer".into() })
    }

    fn var_index(&mut self) -> Result<PropVar, FormulaError> {
        // directly after the 'p', no whitespace allowed
        let start = self.pos;
        while self.src[self.pos..].chars().next().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected variable index");
        }
        match self.src[start..self.pos].parse() {
            Ok(i) => Ok(PropVar(i)),
            Err(_) => self.err("variable index out of range"),
        }
    }

    fn literal(&mut self) -> Result<Literal, FormulaError> {
        let start = {
            self.skip_ws();
            self.pos
        };
        let negative = if self.peek() == Some('~') {
            self.pos += 1;
            true
        } else {
            false
        };
        let id = self.ident();
        match id.as_str() {
            "p" => {
                let v = self.var_index()?;
                Ok(if negative { Literal::neg(v) } else { Literal::pos(v) })
            }
            "e" | "ex" | "thr" | "rthr" => Err(FormulaError::ExtInDecision { pos: start }),
            _ => Err(FormulaError::Syntax { pos: start, msg: "expected literal".into() }),
        }
    }

    fn word(&mut self) -> Result<Word, FormulaError> {
        let mut w = Vec::new();
        while self.peek() == Some('p') {
            self.pos += 1;
            w.push(self.var_index()?);
        }
        Ok(w)
    }

    fn formula(&mut self) -> Result<Formula, FormulaError> {
        match self.peek() {
            Some('0') => {
                self.pos += 1;
                return Ok(Formula::zero());
            }
            Some('1') => {
                self.pos += 1;
                return Ok(Formula::one());
            }
            Some('~') => return Ok(Formula::lit(self.literal()?)),
            None => return self.err("unexpected end of input"),
            _ => {}
        }
        let start = self.pos;
        let id = self.ident();
        match id.as_str() {
            "p" => Ok(Formula::var(self.var_index()?)),
            "e" => {
                let index = self.var_index()?.0;
                if self.src[self.pos..].starts_with('@') {
                    self.pos += 1;
                    let scope = self.var_index()?.0;
                    Ok(Formula::ext(ExtVar::Scoped { index, scope }))
                } else {
                    Ok(Formula::ext(ExtVar::Plain(index)))
                }
            }
            "ex" | "thr" | "rthr" => {
                self.expect('[')?;
                let word = self.word()?;
                self.expect(';')?;
                let k = self.int()?;
                let e = if id == "rthr" {
                    self.expect(';')?;
                    let left = self.formula()?;
                    self.expect(';')?;
                    let right = self.formula()?;
                    ExtVar::RefThr { word, k, left, right }
                } else if id == "ex" {
                    ExtVar::Exact { word, k }
                } else {
                    ExtVar::Thr { word, k }
                };
                self.expect(']')?;
                Ok(Formula::ext(e))
            }
            "or" => {
                self.expect('(')?;
                let a = self.formula()?;
                self.expect(',')?;
                let b = self.formula()?;
                self.expect(')')?;
                Ok(Formula::or(a, b))
            }
            "dec" | "pdec" => {
                self.expect('(')?;
                let a = self.formula()?;
                self.expect(',')?;
                let l = self.literal()?;
                self.expect(',')?;
                let b = self.formula()?;
                self.expect(')')?;
                Ok(if id == "dec" { Formula::dec(a, l, b) } else { Formula::pdec(a, l, b) })
            }
            _ => Err(FormulaError::Syntax { pos: start, msg: format!("unknown constructor '{id}'") }),
        }
    }
}

/// Parses one formula starting at byte `pos`; returns it with the byte
/// offset just after it.
pub fn parse_formula_at(text: &str, pos: usize) -> Result<(Formula, usize), FormulaError> {
    let mut p = Parser { src: text, pos };
    let f = p.formula()?;
    Ok((f, p.pos))
}

/// Parses a formula without any dialect restriction.
pub fn parse_formula_any(text: &str) -> Result<Formula, FormulaError> {
    let mut p = Parser { src: text, pos: 0 };
    let f = p.formula()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(f)
}

/// Parses a formula and rejects constructs that `dialect` does not admit.
pub fn parse_formula(text: &str, dialect: &Dialect) -> Result<Formula, FormulaError> {
    let f = parse_formula_any(text)?;
    dialect.check_formula(&f)?;
    Ok(f)
}

// ---------------------------------------------------------------------------
// Positivity and desugaring

/// True iff there are no negative literals and every general decision has
/// the shape `Dec(a, p, or(a, c))`.
pub fn is_positive(f: &Formula) -> bool {
    if f.has_negative_literal() {
        return false;
    }
    if !f.has_dec() {
        return true;
    }
    let mut seen = HashSet::new();
    let mut stack = vec![f.clone()];
    while let Some(g) = stack.pop() {
        if !g.has_dec() || !seen.insert(g.clone()) {
            continue;
        }
        match g.kind() {
            Kind::Dec(a, _, b) => {
                match b.kind() {
                    Kind::Or(a2, _) if a2 == a => {}
                    _ => return false,
                }
                stack.push(a.clone());
                stack.push(b.clone());
            }
            Kind::Or(a, b) | Kind::PosDec(a, _, b) => {
                stack.push(a.clone());
                stack.push(b.clone());
            }
            _ => {}
        }
    }
    true
}

fn map_memo(f: &Formula, memo: &mut HashMap<Formula, Formula>, node: &dyn Fn(&Formula, &[Formula]) -> Formula) -> Formula {
    if let Some(g) = memo.get(f) {
        return g.clone();
    }
    let kids: Vec<Formula> = match f.kind() {
        Kind::Or(a, b) | Kind::Dec(a, _, b) | Kind::PosDec(a, _, b) => {
            vec![map_memo(a, memo, node), map_memo(b, memo, node)]
        }
        _ => Vec::new(),
    };
    let g = node(f, &kids);
    memo.insert(f.clone(), g.clone());
    g
}

/// Replaces every `PosDec(a, p, b)` by `Dec(a, p, or(a, b))`. The left
/// subterm is one shared node in both positions.
pub fn desugar(f: &Formula) -> Formula {
    if !f.has_posdec() {
        return f.clone();
    }
    map_memo(f, &mut HashMap::new(), &|f, k| match f.kind() {
        Kind::Or(..) => Formula::or(k[0].clone(), k[1].clone()),
        Kind::Dec(_, l, _) => Formula::dec(k[0].clone(), *l, k[1].clone()),
        Kind::PosDec(_, l, _) => Formula::dec(k[0].clone(), *l, Formula::or(k[0].clone(), k[1].clone())),
        _ => f.clone(),
    })
}

/// Inverse of [`desugar`] on positive decisions: `Dec(a, p, or(a, c))`
/// becomes `PosDec(a, p, c)`. Other decisions are left alone.
pub fn resugar(f: &Formula) -> Formula {
    if !f.has_dec() {
        return f.clone();
    }
    let mut memo = HashMap::new();
    fn go(f: &Formula, memo: &mut HashMap<Formula, Formula>) -> Formula {
        if let Some(g) = memo.get(f) {
            return g.clone();
        }
        let g = match f.kind() {
            Kind::Or(a, b) => Formula::or(go(a, memo), go(b, memo)),
            Kind::PosDec(a, l, b) => Formula::pdec(go(a, memo), *l, go(b, memo)),
            Kind::Dec(a, l, b) => match b.kind() {
                Kind::Or(a2, c) if a2 == a => Formula::pdec(go(a, memo), *l, go(c, memo)),
                _ => Formula::dec(go(a, memo), *l, go(b, memo)),
            },
            _ => f.clone(),
        };
        memo.insert(f.clone(), g.clone());
        g
    }
    go(f, &mut memo)
}

/// Right-nested positive decision chain computing the conjunction of `vars`.
pub fn posterm(vars: &[PropVar]) -> Option<Formula> {
    let (last, init) = vars.split_last()?;
    Some(
        init.iter()
            .rev()
            .fold(Formula::var(*last), |acc, v| Formula::pdec(Formula::zero(), Literal::pos(*v), acc)),
    )
}

/// Positive sequent that is valid iff the DNF `terms` is. Each negative
/// literal `~p` is renamed to a fresh `p'`, numbered above every variable
/// of the DNF; the antecedent holds `p ∨ p'` for every variable and the
/// succedent the [`posterm`] of every renamed term (`1` for an empty one).
pub fn dnf_to_positive_sequent(terms: &[Vec<Literal>]) -> crate::sequent::Sequent {
    let vars: BTreeSet<PropVar> = terms.iter().flatten().map(|l| l.var).collect();
    let offset = vars.iter().next_back().map_or(0, |v| v.0 + 1);
    let primed = |v: PropVar| PropVar(v.0 + offset);
    let ante = vars.iter().map(|v| Formula::or(Formula::var(*v), Formula::var(primed(*v)))).collect();
    let succ = terms
        .iter()
        .map(|t| {
            let renamed: Vec<PropVar> = t.iter().map(|l| if l.positive { l.var } else { primed(l.var) }).collect();
            posterm(&renamed).unwrap_or_else(Formula::one)
        })
        .collect();
    crate::sequent::Sequent::new(ante, succ)
}

// ---------------------------------------------------------------------------
// Extension axioms

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AxiomError {
    #[error("entry {index} ({var}) mentions {offending}, which is not strictly earlier")]
    NotEarlier { index: usize, var: String, offending: String },
    #[error("extension variable {0} is redefined with a different body")]
    Conflict(String),
    #[error("undefined extension variable {0}")]
    Undefined(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Ordered extension axioms `e ↔ body`. The entry order is the witness
/// order: a body may only mention variables of strictly earlier entries.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct ExtAxiomSet {
    entries: IndexMap<ExtVar, Formula>,
}

impl ExtAxiomSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ExtVar, &Formula)> {
        self.entries.iter()
    }

    pub fn body(&self, e: &ExtVar) -> Option<&Formula> {
        self.entries.get(e)
    }

    pub fn position(&self, e: &ExtVar) -> Option<usize> {
        self.entries.get_index_of(e)
    }

    pub fn contains(&self, e: &ExtVar) -> bool {
        self.entries.contains_key(e)
    }

    /// Appends `e ↔ body` unless `e` is already defined with the same body.
    pub fn push(&mut self, e: ExtVar, body: Formula) -> Result<(), AxiomError> {
        match self.entries.get(&e) {
            Some(old) if *old == body => Ok(()),
            Some(_) => Err(AxiomError::Conflict(e.to_string())),
            None => {
                self.entries.insert(e, body);
                Ok(())
            }
        }
    }

    /// Appends every entry of `other` not already present.
    pub fn extend_from(&mut self, other: &ExtAxiomSet) -> Result<(), AxiomError> {
        for (e, b) in other.iter() {
            self.push(e.clone(), b.clone())?;
        }
        Ok(())
    }

    /// Certifies well-foundedness: each body only mentions variables of
    /// strictly earlier entries.
    pub fn check(&self) -> Result<(), AxiomError> {
        for (index, (e, body)) in self.entries.iter().enumerate() {
            for v in body.ext_vars() {
                match self.position(&v) {
                    Some(j) if j < index => {}
                    _ => {
                        return Err(AxiomError::NotEarlier {
                            index,
                            var: e.to_string(),
                            offending: v.to_string(),
                        })
                    }
                }
            }
        }
        Ok(())
    }

    /// Stage of every entry: 0 when the body mentions no extension variable
    /// of another stage-carrying family, otherwise one more than the largest
    /// stage among threshold decisions and scoped copies it depends on.
    /// Counting families stay at stage 0 because their cones are closed.
    pub fn stages(&self) -> HashMap<ExtVar, u32> {
        let mut st: HashMap<ExtVar, u32> = HashMap::new();
        for (e, body) in self.entries.iter() {
            let s = match e {
                ExtVar::Thr { .. } | ExtVar::Exact { .. } => 0,
                ExtVar::RefThr { left, right, .. } => {
                    1 + left.ext_vars().iter().chain(right.ext_vars().iter()).map(|v| st.get(v).copied().unwrap_or(0)).max().unwrap_or(0)
                }
                _ => body.ext_vars().iter().map(|v| st.get(v).copied().unwrap_or(0)).max().unwrap_or(0),
            };
            st.insert(e.clone(), s);
        }
        st
    }

    /// Copies the axiom cone of `e` from `src` (dependencies first).
    pub fn import_cone(&mut self, src: &ExtAxiomSet, e: &ExtVar) -> Result<(), AxiomError> {
        if self.contains(e) {
            return Ok(());
        }
        let body = src.body(e).ok_or_else(|| AxiomError::Undefined(e.to_string()))?.clone();
        for v in body.ext_vars() {
            self.import_cone(src, &v)?;
        }
        self.push(e.clone(), body)
    }

    /// Instantiates the exact-count cone below `ex[word; k]`.
    pub fn instantiate_exact(&mut self, word: &[PropVar], k: i64) -> ExtVar {
        let e = ExtVar::exact(word, k);
        if self.contains(&e) {
            return e;
        }
        let body = match word.split_first() {
            None => {
                if k == 0 {
                    Formula::one()
                } else {
                    Formula::zero()
                }
            }
            Some((p, rest)) => {
                let a = self.instantiate_exact(rest, k);
                let b = self.instantiate_exact(rest, k - 1);
                Formula::dec(Formula::ext(a), Literal::pos(*p), Formula::ext(b))
            }
        };
        self.entries.insert(e.clone(), body);
        e
    }

    /// Instantiates the threshold cone below `thr[word; k]`.
    pub fn instantiate_thr(&mut self, word: &[PropVar], k: i64) -> ExtVar {
        let e = ExtVar::thr(word, k);
        if self.contains(&e) {
            return e;
        }
        let body = match word.split_first() {
            None => {
                if k == 0 {
                    Formula::one()
                } else {
                    Formula::zero()
                }
            }
            Some((p, rest)) => {
                let a = self.instantiate_thr(rest, k);
                let b = self.instantiate_thr(rest, k - 1);
                Formula::pdec(Formula::ext(a), Literal::pos(*p), Formula::ext(b))
            }
        };
        self.entries.insert(e.clone(), body);
        e
    }

    /// Instantiates the threshold-decision cone below `rthr[word; k; a; b]`.
    /// Extension variables of `a` and `b` must already be defined.
    pub fn instantiate_refthr(&mut self, word: &[PropVar], k: i64, a: &Formula, b: &Formula) -> ExtVar {
        let e = ExtVar::refthr(word, k, a.clone(), b.clone());
        if self.contains(&e) {
            return e;
        }
        let body = match word.split_first() {
            None => {
                if k == 0 {
                    Formula::or(a.clone(), b.clone())
                } else {
                    a.clone()
                }
            }
            Some((p, rest)) => {
                let l = self.instantiate_refthr(rest, k, a, b);
                let r = self.instantiate_refthr(rest, k - 1, a, b);
                Formula::pdec(Formula::ext(l), Literal::pos(*p), Formula::ext(r))
            }
        };
        self.entries.insert(e.clone(), body);
        e
    }

    /// Instantiates the cone of every counting-family variable (`ex`, `thr`,
    /// `rthr`) occurring in `f` that is not yet defined. Plain and scoped
    /// variables are left alone.
    pub fn instantiate_families(&mut self, f: &Formula) {
        for e in f.ext_vars() {
            if self.contains(&e) {
                continue;
            }
            match &e {
                ExtVar::Thr { word, k } => {
                    self.instantiate_thr(word, *k);
                }
                ExtVar::Exact { word, k } => {
                    self.instantiate_exact(word, *k);
                }
                ExtVar::RefThr { word, k, left, right } => {
                    self.instantiate_families(left);
                    self.instantiate_families(right);
                    self.instantiate_refthr(word, *k, left, right);
                }
                ExtVar::Plain(_) | ExtVar::Scoped { .. } => {}
            }
        }
    }

    /// Maps every body through `f`, keeping variables and order.
    pub fn map_bodies(&self, f: impl Fn(&Formula) -> Formula) -> ExtAxiomSet {
        ExtAxiomSet { entries: self.entries.iter().map(|(e, b)| (e.clone(), f(b))).collect() }
    }

    /// One `NAME <-> F` per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (e, b) in self.entries.iter() {
            s.push_str(&format!("{e} <-> {b}\n"));
        }
        s
    }

    /// Parses the `NAME <-> F` format; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Result<ExtAxiomSet, AxiomError> {
        let mut ax = ExtAxiomSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lhs, rhs) = line
                .split_once("<->")
                .ok_or_else(|| AxiomError::Parse { line: i + 1, msg: "missing '<->'".into() })?;
            let head = parse_formula_any(lhs).map_err(|e| AxiomError::Parse { line: i + 1, msg: e.to_string() })?;
            let e = head
                .as_ext()
                .ok_or_else(|| AxiomError::Parse { line: i + 1, msg: "left side is not an extension variable".into() })?
                .clone();
            let body = parse_formula_any(rhs).map_err(|e| AxiomError::Parse { line: i + 1, msg: e.to_string() })?;
            ax.push(e, body).map_err(|e| AxiomError::Parse { line: i + 1, msg: e.to_string() })?;
        }
        Ok(ax)
    }
}

// ---------------------------------------------------------------------------
// Semantics

/// Assignment of bits to propositional variables; 0 outside the support.
#[derive(Clone, Default, PartialEq, Eq, Hash, Debug)]
pub struct Assignment(BTreeSet<PropVar>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_ones<I: IntoIterator<Item = PropVar>>(ones: I) -> Self {
        Assignment(ones.into_iter().collect())
    }

    /// The `index`-th assignment over `vars` in lexicographic order: the
    /// first variable is the most significant bit.
    pub fn from_index(vars: &[PropVar], index: usize) -> Self {
        let n = vars.len();
        Assignment(vars.iter().enumerate().filter(|(j, _)| (index >> (n - 1 - j)) & 1 == 1).map(|(_, v)| *v).collect())
    }

    pub fn get(&self, v: PropVar) -> bool {
        self.0.contains(&v)
    }

    pub fn set(&mut self, v: PropVar, bit: bool) {
        if bit {
            self.0.insert(v);
        } else {
            self.0.remove(&v);
        }
    }

    pub fn ones(&self) -> impl Iterator<Item = PropVar> + '_ {
        self.0.iter().copied()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}=1")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("undefined extension variable {0}")]
    Undefined(String),
    #[error("{vars} variables exceed the oracle cap of {cap}")]
    CapExceeded { vars: usize, cap: usize },
    #[error("duplicate variable {0} in truth-table variable list")]
    DuplicateVar(PropVar),
    #[error("free variable {0} not covered by the variable list")]
    Uncovered(PropVar),
}

struct Evaluator<'a> {
    ax: &'a ExtAxiomSet,
    a: &'a Assignment,
    memo: FxHashMap<Formula, bool>,
    unfolding: Vec<ExtVar>,
    trace: Option<Trace>,
}

impl Evaluator<'_> {
    fn eval(&mut self, f: &Formula) -> Result<bool, EvalError> {
        if let Some(b) = self.memo.get(f) {
            return Ok(*b);
        }
        let v = match f.kind() {
            Kind::Zero => false,
            Kind::One => true,
            Kind::Lit(l) => l.holds(self.a),
            Kind::Ext(e) => {
                let body = self.ax.body(e).ok_or_else(|| EvalError::Undefined(e.to_string()))?.clone();
                if let Some(t) = self.trace.as_mut() {
                    t.push((self.unfolding.last().cloned(), e.clone()));
                }
                self.unfolding.push(e.clone());
                let r = self.eval(&body);
                self.unfolding.pop();
                r?
            }
            Kind::Or(a, b) => self.eval(a)? || self.eval(b)?,
            Kind::Dec(a, l, b) => {
                if l.holds(self.a) {
                    self.eval(b)?
                } else {
                    self.eval(a)?
                }
            }
            Kind::PosDec(a, l, b) => self.eval(a)? || (l.holds(self.a) && self.eval(b)?),
        };
        self.memo.insert(f.clone(), v);
        Ok(v)
    }
}

/// Evaluates `f` under `ax` at `a`, memoising each extension variable.
pub fn eval(f: &Formula, ax: &ExtAxiomSet, a: &Assignment) -> Result<bool, EvalError> {
    Evaluator { ax, a, memo: FxHashMap::default(), unfolding: Vec::new(), trace: None }.eval(f)
}

/// Unfoldings in evaluation order as `(enclosing, unfolded)`.
pub type Trace = Vec<(Option<ExtVar>, ExtVar)>;

/// Like [`eval`], also returning every unfolding.
pub fn eval_traced(f: &Formula, ax: &ExtAxiomSet, a: &Assignment) -> Result<(bool, Trace), EvalError> {
    let mut ev = Evaluator { ax, a, memo: FxHashMap::default(), unfolding: Vec::new(), trace: Some(Vec::new()) };
    let v = ev.eval(f)?;
    Ok((v, ev.trace.unwrap_or_default()))
}

/// Propositional variables `f` depends on, unfolding extension bodies.
pub fn free_vars(f: &Formula, ax: &ExtAxiomSet) -> BTreeSet<PropVar> {
    let mut out = BTreeSet::new();
    let mut seen = HashSet::new();
    let mut stack = vec![f.clone()];
    while let Some(g) = stack.pop() {
        if !seen.insert(g.clone()) {
            continue;
        }
        match g.kind() {
            Kind::Zero | Kind::One => {}
            Kind::Lit(l) => {
                out.insert(l.var);
            }
            Kind::Ext(e) => match ax.body(e) {
                Some(b) => stack.push(b.clone()),
                None => out.extend(g.syntactic_vars()),
            },
            Kind::Or(a, b) => {
                stack.push(a.clone());
                stack.push(b.clone());
            }
            Kind::Dec(a, l, b) | Kind::PosDec(a, l, b) => {
                out.insert(l.var);
                stack.push(a.clone());
                stack.push(b.clone());
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Truth tables

pub const DEFAULT_ORACLE_CAP: usize = 16;

/// Output bits of a Boolean function over `vars`, indexed as in
/// [`Assignment::from_index`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruthTable {
    vars: Vec<PropVar>,
    bits: Vec<bool>,
}

impl TruthTable {
    pub fn new(vars: Vec<PropVar>, bits: Vec<bool>) -> Result<Self, EvalError> {
        let mut seen = HashSet::new();
        for v in &vars {
            if !seen.insert(*v) {
                return Err(EvalError::DuplicateVar(*v));
            }
        }
        assert_eq!(bits.len(), 1usize << vars.len(), "truth table length must be 2^n");
        Ok(TruthTable { vars, bits })
    }

    pub fn from_fn(vars: Vec<PropVar>, f: impl Fn(&Assignment) -> bool) -> Result<Self, EvalError> {
        let bits = (0..1usize << vars.len()).map(|i| f(&Assignment::from_index(&vars, i))).collect();
        TruthTable::new(vars, bits)
    }

    pub fn vars(&self) -> &[PropVar] {
        &self.vars
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// Bit mask of variable `j` in the index encoding.
    fn mask(&self, j: usize) -> usize {
        1 << (self.vars.len() - 1 - j)
    }

    /// Checks every single-bit-flip cover `α < α + e_j`.
    pub fn is_monotone(&self) -> bool {
        (0..self.vars.len()).all(|j| {
            let m = self.mask(j);
            (0..self.bits.len()).filter(|i| i & m == 0).all(|i| !self.bits[i] || self.bits[i | m])
        })
    }

    /// Least monotone function above this one: 1 at α iff some β ≤ α is 1.
    pub fn monotone_closure(&self) -> TruthTable {
        let mut bits = self.bits.clone();
        for j in 0..self.vars.len() {
            let m = self.mask(j);
            for i in 0..bits.len() {
                if i & m != 0 && bits[i ^ m] {
                    bits[i] = true;
                }
            }
        }
        TruthTable { vars: self.vars.clone(), bits }
    }
}

/// Truth table of `f` over `vars` with the default oracle cap.
pub fn truth_table(f: &Formula, ax: &ExtAxiomSet, vars: &[PropVar]) -> Result<TruthTable, EvalError> {
    truth_table_capped(f, ax, vars, DEFAULT_ORACLE_CAP)
}

pub fn truth_table_capped(f: &Formula, ax: &ExtAxiomSet, vars: &[PropVar], cap: usize) -> Result<TruthTable, EvalError> {
    if vars.len() > cap {
        return Err(EvalError::CapExceeded { vars: vars.len(), cap });
    }
    for v in free_vars(f, ax) {
        if !vars.contains(&v) {
            return Err(EvalError::Uncovered(v));
        }
    }
    let mut te = TableEval::new(vars.to_vec(), ax, cap)?;
    let t = te.table(f)?;
    let bits = (0..1usize << vars.len()).map(|i| TableEval::bit(&t, i)).collect();
    TruthTable::new(vars.to_vec(), bits)
}

// ---------------------------------------------------------------------------
// Substitution

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubstError {
    #[error("substitution puts non-literal {image} in the decision position of {var}")]
    NonLiteralDecision { var: PropVar, image: String },
    #[error("negative literal ~{var} cannot be mapped to non-literal {image}")]
    NonLiteralNegation { var: PropVar, image: String },
    #[error(transparent)]
    Axiom(#[from] AxiomError),
}

/// Capture-free substitution of formulas for propositional variables.
pub struct Substitution<'a> {
    sigma: &'a HashMap<PropVar, Formula>,
    src: &'a ExtAxiomSet,
    out: ExtAxiomSet,
    memo: HashMap<Formula, Formula>,
    renamed: HashMap<ExtVar, ExtVar>,
    next_plain: u32,
}

impl<'a> Substitution<'a> {
    pub fn new(sigma: &'a HashMap<PropVar, Formula>, src: &'a ExtAxiomSet) -> Self {
        let next_plain = src
            .iter()
            .filter_map(|(e, _)| match e {
                ExtVar::Plain(i) => Some(i + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        Substitution { sigma, src, out: src.clone(), memo: HashMap::new(), renamed: HashMap::new(), next_plain }
    }

    pub fn into_axioms(self) -> ExtAxiomSet {
        self.out
    }

    fn touches(&self, f: &Formula) -> bool {
        free_vars(f, self.src).iter().any(|v| self.sigma.contains_key(v))
    }

    fn decision_literal(&self, l: Literal) -> Result<Literal, SubstError> {
        match self.sigma.get(&l.var) {
            None => Ok(l),
            Some(img) => match img.as_lit() {
                Some(m) => Ok(if l.positive { m } else { m.complement() }),
                None => Err(SubstError::NonLiteralDecision { var: l.var, image: img.to_string() }),
            },
        }
    }

    /// Renames a counting word when every touched variable maps to a
    /// positive literal.
    fn rename_word(&self, word: &[PropVar]) -> Option<Word> {
        word.iter()
            .map(|v| match self.sigma.get(v) {
                None => Some(*v),
                Some(img) => img.as_lit().filter(|l| l.positive).map(|l| l.var),
            })
            .collect()
    }

    fn ext(&mut self, e: &ExtVar, whole: &Formula) -> Result<Formula, SubstError> {
        if let Some(r) = self.renamed.get(e) {
            return Ok(Formula::ext(r.clone()));
        }
        if !self.touches(whole) {
            if self.src.contains(e) {
                self.out.import_cone(self.src, e)?;
            }
            return Ok(whole.clone());
        }
        let renamed = match e {
            ExtVar::Thr { word, k } => self.rename_word(word).map(|w| self.out.instantiate_thr(&w, *k)),
            ExtVar::Exact { word, k } => self.rename_word(word).map(|w| self.out.instantiate_exact(&w, *k)),
            ExtVar::RefThr { word, k, left, right } => match self.rename_word(word) {
                Some(w) => {
                    let a = self.apply(left)?;
                    let b = self.apply(right)?;
                    Some(self.out.instantiate_refthr(&w, *k, &a, &b))
                }
                None => None,
            },
            _ => None,
        };
        let r = match renamed {
            Some(r) => r,
            None => {
                let body = self.src.body(e).ok_or_else(|| AxiomError::Undefined(e.to_string()))?.clone();
                let nb = self.apply(&body)?;
                let fresh = ExtVar::Plain(self.next_plain);
                self.next_plain += 1;
                self.out.push(fresh.clone(), nb)?;
                fresh
            }
        };
        self.renamed.insert(e.clone(), r.clone());
        Ok(Formula::ext(r))
    }

    pub fn apply(&mut self, f: &Formula) -> Result<Formula, SubstError> {
        if let Some(g) = self.memo.get(f) {
            return Ok(g.clone());
        }
        let g = match f.kind() {
            Kind::Zero | Kind::One => f.clone(),
            Kind::Lit(l) => match self.sigma.get(&l.var) {
                None => f.clone(),
                Some(img) if l.positive => img.clone(),
                Some(img) => match img.kind() {
                    Kind::Lit(m) => Formula::lit(m.complement()),
                    Kind::Zero => Formula::one(),
                    Kind::One => Formula::zero(),
                    _ => return Err(SubstError::NonLiteralNegation { var: l.var, image: img.to_string() }),
                },
            },
            Kind::Ext(e) => self.ext(e, f)?,
            Kind::Or(a, b) => Formula::or(self.apply(a)?, self.apply(b)?),
            Kind::Dec(a, l, b) => {
                let l2 = self.decision_literal(*l)?;
                Formula::dec(self.apply(a)?, l2, self.apply(b)?)
            }
            Kind::PosDec(a, l, b) => {
                let l2 = self.decision_literal(*l)?;
                Formula::pdec(self.apply(a)?, l2, self.apply(b)?)
            }
        };
        self.memo.insert(f.clone(), g.clone());
        Ok(g)
    }
}

/// Substitutes `sigma` into `f`; affected extension variables get fresh
/// definitions appended to a copy of `ax`.
pub fn substitute(
    f: &Formula,
    sigma: &HashMap<PropVar, Formula>,
    ax: &ExtAxiomSet,
) -> Result<(Formula, ExtAxiomSet), SubstError> {
    let mut s = Substitution::new(sigma, ax);
    let g = s.apply(f)?;
    Ok((g, s.into_axioms()))
}
