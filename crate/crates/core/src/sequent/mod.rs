//! Sequents, dag-like proofs, the checker, brute-force validity, proof
//! search and the line-based text format.

mod builder;
mod check;
mod minimal;
mod search;
mod text;
mod valid;

use std::collections::BTreeMap;
use std::fmt;

pub use builder::{Builder, LineId};
pub use check::{check_proof, CheckError, Failure};
pub use minimal::prove_minimal;
pub use search::{prove_by_search, search_in, SearchError, SearchOutcome, DEFAULT_SEARCH_LINES};
pub use text::{parse_proof, parse_sequent, write_proof, ProofParseError};
pub use valid::{check_soundness, check_soundness_sampled, sequent_valid, Soundness, Validity};

use crate::dialect::Dialect;
use crate::term::{ExtAxiomSet, ExtVar, Formula, Literal, PropVar};

/// `ante ⊢ succ`. Both cedents are multisets; the stored order only
/// affects printing.
#[derive(Clone, Debug)]
pub struct Sequent {
    pub ante: Vec<Formula>,
    pub succ: Vec<Formula>,
}

/// Canonical multiset key of a sequent.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SeqKey(Vec<u64>, Vec<u64>);

pub(crate) fn msort(fs: &[Formula]) -> Vec<u64> {
    let mut v: Vec<u64> = fs.iter().map(Formula::id).collect();
    v.sort_unstable();
    v
}

fn cedent_tokens(fs: &[Formula]) -> u64 {
    let commas = fs.len().saturating_sub(1) as u64;
    fs.iter().map(Formula::tokens).sum::<u64>() + commas
}

impl Sequent {
    pub fn new(ante: Vec<Formula>, succ: Vec<Formula>) -> Self {
        Sequent { ante, succ }
    }

    pub fn key(&self) -> SeqKey {
        SeqKey(msort(&self.ante), msort(&self.succ))
    }

    /// Multiset equality.
    pub fn same_as(&self, other: &Sequent) -> bool {
        self.ante.len() == other.ante.len() && self.succ.len() == other.succ.len() && self.key() == other.key()
    }

    /// Formulas plus separating commas plus the arrow.
    pub fn tokens(&self) -> u64 {
        cedent_tokens(&self.ante) + cedent_tokens(&self.succ) + 1
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.ante.iter().chain(self.succ.iter())
    }

    pub fn has_ext(&self) -> bool {
        self.formulas().any(Formula::has_ext)
    }
}

impl PartialEq for Sequent {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for Sequent {}

fn write_cedent(f: &mut fmt::Formatter<'_>, fs: &[Formula]) -> fmt::Result {
    for (i, x) in fs.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_cedent(f, &self.ante)?;
        if self.ante.is_empty() {
            write!(f, "|-")?;
        } else {
            write!(f, " |-")?;
        }
        if !self.succ.is_empty() {
            write!(f, " ")?;
        }
        write_cedent(f, &self.succ)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Rule {
    Cut,
    WL,
    WR,
    CL,
    CR,
    PL,
    PR,
    PosPL,
    PosPR,
    OrL,
    OrR,
}

impl Rule {
    pub const ALL: [Rule; 11] =
        [Rule::Cut, Rule::WL, Rule::WR, Rule::CL, Rule::CR, Rule::PL, Rule::PR, Rule::PosPL, Rule::PosPR, Rule::OrL, Rule::OrR];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Cut => "cut",
            Rule::WL => "wL",
            Rule::WR => "wR",
            Rule::CL => "cL",
            Rule::CR => "cR",
            Rule::PL => "pL",
            Rule::PR => "pR",
            Rule::PosPL => "posPL",
            Rule::PosPR => "posPR",
            Rule::OrL => "orL",
            Rule::OrR => "orR",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == s)
    }

    pub fn arity(self) -> usize {
        match self {
            Rule::WL | Rule::WR | Rule::CL | Rule::CR | Rule::OrR => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Justification {
    /// `0 ⊢`
    Axiom0,
    /// `⊢ 1`
    Axiom1,
    /// `l ⊢ l` for a literal.
    Id(Literal),
    /// `p, ~p ⊢`
    NegL(PropVar),
    /// `⊢ p, ~p`
    NegR(PropVar),
    /// `p_i, thr[vars∖i; k] ⊢` in the threshold dialect.
    ThrL(usize),
    /// `⊢ p_i, thr[vars∖i; k]` in the threshold dialect.
    ThrR(usize),
    /// `e ⊢ body(e)`
    ExtLR(ExtVar),
    /// `body(e) ⊢ e`
    ExtRL(ExtVar),
    Hypothesis(String),
    /// Premises are indices of earlier lines; `principal` is the cut
    /// formula, the weakened or contracted formula, or the introduced
    /// compound formula.
    Rule { rule: Rule, premises: Vec<usize>, principal: Formula },
}

impl Justification {
    pub fn label(&self) -> &'static str {
        match self {
            Justification::Axiom0 => "ax0",
            Justification::Axiom1 => "ax1",
            Justification::Id(_) => "id",
            Justification::NegL(_) => "negL",
            Justification::NegR(_) => "negR",
            Justification::ThrL(_) => "thrL",
            Justification::ThrR(_) => "thrR",
            Justification::ExtLR(_) => "extL",
            Justification::ExtRL(_) => "extR",
            Justification::Hypothesis(_) => "hyp",
            Justification::Rule { rule, .. } => rule.name(),
        }
    }

    pub fn premises(&self) -> &[usize] {
        match self {
            Justification::Rule { premises, .. } => premises,
            _ => &[],
        }
    }
}

#[derive(Clone, Debug)]
pub struct Line {
    pub seq: Sequent,
    pub just: Justification,
}

/// A dag-like proof: a list of justified lines whose last line is the
/// conclusion.
#[derive(Clone, Debug)]
pub struct Proof {
    pub dialect: Dialect,
    pub axioms: ExtAxiomSet,
    pub hypotheses: Vec<(String, Sequent)>,
    pub lines: Vec<Line>,
    /// Permits extension variables in the conclusion.
    pub intermediate: bool,
}

impl Proof {
    pub fn conclusion(&self) -> &Sequent {
        &self.lines.last().expect("proof has at least one line").seq
    }

    /// Token count; shared lines count once.
    pub fn size(&self) -> u64 {
        self.lines.iter().map(|l| l.seq.tokens()).sum()
    }

    pub fn rule_histogram(&self) -> BTreeMap<String, usize> {
        let mut h = BTreeMap::new();
        for l in &self.lines {
            *h.entry(l.just.label().to_string()).or_insert(0) += 1;
        }
        h
    }
}

/// Size of a proof in tokens.
pub fn proof_size(p: &Proof) -> u64 {
    p.size()
}
