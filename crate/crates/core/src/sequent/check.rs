use std::fmt;

use thiserror::Error;

use super::{msort, Justification, Proof, Rule, Sequent};
use crate::dialect::Dialect;
use crate::term::{AxiomError, Formula, Kind, Literal};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Failure {
    PremiseOutOfRange(usize),
    WrongArity { expected: usize, got: usize },
    RuleNotInDialect(&'static str),
    BadInitial(&'static str),
    UnknownHypothesis(String),
    HypothesisMismatch(String),
    PrincipalShape(&'static str),
    PrincipalMissing,
    PremiseMismatch { premise: usize, expected: String },
    Dialect(String),
    UndefinedExt(String),
    ExtAxiomMismatch(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::PremiseOutOfRange(i) => write!(f, "premise L{} does not precede this line", i + 1),
            Failure::WrongArity { expected, got } => write!(f, "expected {expected} premises, got {got}"),
            Failure::RuleNotInDialect(r) => write!(f, "rule {r} is not part of this dialect"),
            Failure::BadInitial(r) => write!(f, "sequent is not an instance of initial sequent {r}"),
            Failure::UnknownHypothesis(h) => write!(f, "unknown hypothesis {h}"),
            Failure::HypothesisMismatch(h) => write!(f, "sequent differs from hypothesis {h}"),
            Failure::PrincipalShape(s) => write!(f, "principal formula must be {s}"),
            Failure::PrincipalMissing => write!(f, "principal formula does not occur in the conclusion"),
            Failure::PremiseMismatch { premise, expected } => {
                write!(f, "premise L{} does not match; expected {expected}", premise + 1)
            }
            Failure::Dialect(m) => write!(f, "{m}"),
            Failure::UndefinedExt(e) => write!(f, "extension variable {e} has no axiom"),
            Failure::ExtAxiomMismatch(e) => write!(f, "sequent is not the axiom of {e}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("empty proof")]
    Empty,
    #[error("axiom set: {0}")]
    Axioms(#[from] AxiomError),
    #[error("axiom body of {var}: {msg}")]
    AxiomDialect { var: String, msg: String },
    #[error("L{}: {reason}", line + 1)]
    Line { line: usize, reason: Failure },
    #[error("conclusion mentions extension variables")]
    ConclusionHasExt,
}

impl CheckError {
    pub fn line(&self) -> Option<usize> {
        match self {
            CheckError::Line { line, .. } => Some(*line),
            _ => None,
        }
    }
}

fn remove_one(v: &mut Vec<u64>, x: u64) -> bool {
    match v.binary_search(&x) {
        Ok(i) => {
            v.remove(i);
            true
        }
        Err(_) => false,
    }
}

fn add(v: &[u64], extra: &[&Formula]) -> Vec<u64> {
    let mut out = v.to_vec();
    out.extend(extra.iter().map(|f| f.id()));
    out.sort_unstable();
    out
}

struct Ctx<'a> {
    proof: &'a Proof,
}

impl Ctx<'_> {
    fn premise(&self, own: usize, i: usize) -> Result<&Sequent, Failure> {
        if i >= own {
            return Err(Failure::PremiseOutOfRange(i));
        }
        Ok(&self.proof.lines[i].seq)
    }

    fn expect(&self, own: usize, i: usize, ante: Vec<u64>, succ: Vec<u64>, shown: impl Fn() -> String) -> Result<(), Failure> {
        let p = self.premise(own, i)?;
        if msort(&p.ante) == ante && msort(&p.succ) == succ {
            Ok(())
        } else {
            Err(Failure::PremiseMismatch { premise: i, expected: shown() })
        }
    }

    fn check_formulas(&self, s: &Sequent) -> Result<(), Failure> {
        let d = &self.proof.dialect;
        for f in s.formulas() {
            d.check_formula(f).map_err(|e| Failure::Dialect(e.to_string()))?;
            for e in f.ext_vars() {
                if !self.proof.axioms.contains(&e) {
                    return Err(Failure::UndefinedExt(e.to_string()));
                }
            }
        }
        Ok(())
    }

    fn line(&self, n: usize) -> Result<(), Failure> {
        let line = &self.proof.lines[n];
        let s = &line.seq;
        let d = &self.proof.dialect;
        self.check_formulas(s)?;
        let exact = |ante: &[Formula], succ: &[Formula], name: &'static str| {
            if s.same_as(&Sequent::new(ante.to_vec(), succ.to_vec())) {
                Ok(())
            } else {
                Err(Failure::BadInitial(name))
            }
        };
        match &line.just {
            Justification::Axiom0 => exact(&[Formula::zero()], &[], "0 |-"),
            Justification::Axiom1 => exact(&[], &[Formula::one()], "|- 1"),
            Justification::Id(l) => {
                if !l.positive && !d.negation_axioms() {
                    return Err(Failure::RuleNotInDialect("id on negative literals"));
                }
                exact(&[Formula::lit(*l)], &[Formula::lit(*l)], "id")
            }
            Justification::NegL(p) | Justification::NegR(p) => {
                if !d.negation_axioms() {
                    return Err(Failure::RuleNotInDialect("negation initial sequents"));
                }
                let pair = [Formula::var(*p), Formula::neg(*p)];
                if matches!(line.just, Justification::NegL(_)) {
                    exact(&pair, &[], "negL")
                } else {
                    exact(&[], &pair, "negR")
                }
            }
            Justification::ThrL(i) | Justification::ThrR(i) => {
                let Dialect::Tk { k, vars } = d else {
                    return Err(Failure::RuleNotInDialect("threshold initial sequents"));
                };
                if *i >= vars.len() {
                    return Err(Failure::BadInitial("threshold index out of range"));
                }
                let mut rest = vars.clone();
                let p = rest.remove(*i);
                let pair = [Formula::var(p), Formula::thr(&rest, *k)];
                if matches!(line.just, Justification::ThrL(_)) {
                    exact(&pair, &[], "thrL")
                } else {
                    exact(&[], &pair, "thrR")
                }
            }
            Justification::ExtLR(e) | Justification::ExtRL(e) => {
                if !d.allows_ext() {
                    return Err(Failure::RuleNotInDialect("extension axioms"));
                }
                let body = self.proof.axioms.body(e).ok_or_else(|| Failure::UndefinedExt(e.to_string()))?;
                let v = Formula::ext(e.clone());
                let want = if matches!(line.just, Justification::ExtLR(_)) {
                    Sequent::new(vec![v], vec![body.clone()])
                } else {
                    Sequent::new(vec![body.clone()], vec![v])
                };
                if s.same_as(&want) {
                    Ok(())
                } else {
                    Err(Failure::ExtAxiomMismatch(e.to_string()))
                }
            }
            Justification::Hypothesis(h) => {
                let (_, hs) = self
                    .proof
                    .hypotheses
                    .iter()
                    .find(|(name, _)| name == h)
                    .ok_or_else(|| Failure::UnknownHypothesis(h.clone()))?;
                if s.same_as(hs) {
                    Ok(())
                } else {
                    Err(Failure::HypothesisMismatch(h.clone()))
                }
            }
            Justification::Rule { rule, premises, principal } => self.rule(n, *rule, premises, principal),
        }
    }

    fn rule(&self, n: usize, rule: Rule, premises: &[usize], x: &Formula) -> Result<(), Failure> {
        let d = &self.proof.dialect;
        if premises.len() != rule.arity() {
            return Err(Failure::WrongArity { expected: rule.arity(), got: premises.len() });
        }
        match rule {
            Rule::PL | Rule::PR if !d.general_rules() => return Err(Failure::RuleNotInDialect(rule.name())),
            Rule::PosPL | Rule::PosPR if !d.positive_rules() => return Err(Failure::RuleNotInDialect(rule.name())),
            _ => {}
        }
        d.check_formula(x).map_err(|e| Failure::Dialect(e.to_string()))?;
        let s = &self.proof.lines[n].seq;
        let ga = msort(&s.ante);
        let de = msort(&s.succ);
        let left_rule = matches!(rule, Rule::WL | Rule::CL | Rule::PL | Rule::PosPL | Rule::OrL);
        // context with the principal formula removed from its side
        let (mut g, mut dl) = (ga.clone(), de.clone());
        if rule != Rule::Cut {
            let side = if left_rule { &mut g } else { &mut dl };
            if !remove_one(side, x.id()) {
                return Err(Failure::PrincipalMissing);
            }
        }
        let lit = |l: &Literal| Formula::lit(*l);
        let p0 = premises[0];
        let show = |a: &[&Formula], b: &[&Formula]| {
            let ante: Vec<String> = a.iter().map(|f| f.to_string()).collect();
            let succ: Vec<String> = b.iter().map(|f| f.to_string()).collect();
            format!("context plus [{}] |- context plus [{}]", ante.join(", "), succ.join(", "))
        };
        match rule {
            Rule::Cut => {
                self.expect(n, p0, ga.clone(), add(&de, &[x]), || show(&[], &[x]))?;
                self.expect(n, premises[1], add(&ga, &[x]), de.clone(), || show(&[x], &[]))
            }
            Rule::WL => self.expect(n, p0, g, de, || "conclusion without the weakened formula".into()),
            Rule::WR => self.expect(n, p0, ga, dl, || "conclusion without the weakened formula".into()),
            Rule::CL => self.expect(n, p0, add(&ga, &[x]), de, || show(&[x, x], &[])),
            Rule::CR => self.expect(n, p0, ga, add(&de, &[x]), || show(&[], &[x, x])),
            Rule::PL | Rule::PR => {
                let Kind::Dec(a, p, b) = x.kind() else {
                    return Err(Failure::PrincipalShape("a general decision"));
                };
                let pf = lit(p);
                if rule == Rule::PL {
                    self.expect(n, p0, add(&g, &[a]), add(&de, &[&pf]), || show(&[a], &[&pf]))?;
                    self.expect(n, premises[1], add(&g, &[&pf, b]), de.clone(), || show(&[&pf, b], &[]))
                } else {
                    self.expect(n, p0, ga.clone(), add(&dl, &[a, &pf]), || show(&[], &[a, &pf]))?;
                    self.expect(n, premises[1], add(&ga, &[&pf]), add(&dl, &[b]), || show(&[&pf], &[b]))
                }
            }
            Rule::PosPL | Rule::PosPR => {
                let Kind::PosDec(a, p, b) = x.kind() else {
                    return Err(Failure::PrincipalShape("a positive decision"));
                };
                let pf = lit(p);
                if rule == Rule::PosPL {
                    self.expect(n, p0, add(&g, &[a]), de.clone(), || show(&[a], &[]))?;
                    self.expect(n, premises[1], add(&g, &[&pf, b]), de.clone(), || show(&[&pf, b], &[]))
                } else {
                    self.expect(n, p0, ga.clone(), add(&dl, &[a, &pf]), || show(&[], &[a, &pf]))?;
                    self.expect(n, premises[1], ga.clone(), add(&dl, &[a, b]), || show(&[], &[a, b]))
                }
            }
            Rule::OrL => {
                let Kind::Or(a, b) = x.kind() else {
                    return Err(Failure::PrincipalShape("a disjunction"));
                };
                self.expect(n, p0, add(&g, &[a]), de.clone(), || show(&[a], &[]))?;
                self.expect(n, premises[1], add(&g, &[b]), de.clone(), || show(&[b], &[]))
            }
            Rule::OrR => {
                let Kind::Or(a, b) = x.kind() else {
                    return Err(Failure::PrincipalShape("a disjunction"));
                };
                self.expect(n, p0, ga, add(&dl, &[a, b]), || show(&[], &[a, b]))
            }
        }
    }
}

/// Checks every line of `p` against its dialect, axiom set and hypotheses.
/// Contexts are shared between premises exactly as the rules state; there
/// is no implicit weakening or contraction.
pub fn check_proof(p: &Proof) -> Result<(), CheckError> {
    if p.lines.is_empty() {
        return Err(CheckError::Empty);
    }
    p.axioms.check()?;
    for (e, body) in p.axioms.iter() {
        p.dialect
            .check_formula(body)
            .map_err(|err| CheckError::AxiomDialect { var: e.to_string(), msg: err.to_string() })?;
    }
    let ctx = Ctx { proof: p };
    for n in 0..p.lines.len() {
        ctx.line(n).map_err(|reason| CheckError::Line { line: n, reason })?;
    }
    if !p.intermediate && p.hypotheses.is_empty() && p.conclusion().has_ext() {
        return Err(CheckError::ConclusionHasExt);
    }
    Ok(())
}
