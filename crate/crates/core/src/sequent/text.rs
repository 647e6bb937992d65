//! Line-based proof files.
//!
//! ```text
//! dialect: eLNDT+
//! intermediate: true
//! axiom: thr[p1; 1] <-> pdec(thr[; 1], p1, thr[; 0])
//! hyp H1: p1 |- p2
//! L1: p1 |- p1 ; id[p1]
//! L2: p1, p2 |- p1 ; wL[p2](L1)
//! ```
//!
//! Header lines come first and are optional except `dialect`. Each proof
//! line is `Ln: antecedent |- succedent ; rule[argument](premises)`.
//! Blank lines and lines starting with `#` are ignored.

use thiserror::Error;

use super::{Justification, Line, Proof, Rule, Sequent};
use crate::dialect::Dialect;
use crate::term::{parse_formula_at, parse_formula_any, ExtAxiomSet, Formula, FormulaError, PropVar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProofParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing dialect header")]
    NoDialect,
    #[error("proof has no lines")]
    Empty,
}

fn just_text(j: &Justification) -> String {
    match j {
        Justification::Axiom0 => "ax0".into(),
        Justification::Axiom1 => "ax1".into(),
        Justification::Id(l) => format!("id[{l}]"),
        Justification::NegL(p) => format!("negL[{p}]"),
        Justification::NegR(p) => format!("negR[{p}]"),
        Justification::ThrL(i) => format!("thrL[{i}]"),
        Justification::ThrR(i) => format!("thrR[{i}]"),
        Justification::ExtLR(e) => format!("extL[{e}]"),
        Justification::ExtRL(e) => format!("extR[{e}]"),
        Justification::Hypothesis(h) => format!("hyp[{h}]"),
        Justification::Rule { rule, premises, principal } => {
            let ps: Vec<String> = premises.iter().map(|i| format!("L{}", i + 1)).collect();
            format!("{}[{principal}]({})", rule.name(), ps.join(", "))
        }
    }
}

/// Renders `p` in the line-based text format.
pub fn write_proof(p: &Proof) -> String {
    let mut s = format!("dialect: {}\n", p.dialect);
    if p.intermediate {
        s.push_str("intermediate: true\n");
    }
    for (e, b) in p.axioms.iter() {
        s.push_str(&format!("axiom: {e} <-> {b}\n"));
    }
    for (h, seq) in &p.hypotheses {
        s.push_str(&format!("hyp {h}: {seq}\n"));
    }
    for (i, l) in p.lines.iter().enumerate() {
        s.push_str(&format!("L{}: {} ; {}\n", i + 1, l.seq, just_text(&l.just)));
    }
    s
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ProofParseError> {
        Err(ProofParseError::Syntax { line: self.line, msg: format!("{} (column {})", msg.into(), self.pos + 1) })
    }

    fn ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn eat(&mut self, t: &str) -> bool {
        self.ws();
        if self.src[self.pos..].starts_with(t) {
            self.pos += t.len();
            true
        } else {
            false
        }
    }

    fn formula(&mut self) -> Result<Formula, ProofParseError> {
        match parse_formula_at(self.src, self.pos) {
            Ok((f, pos)) => {
                self.pos = pos;
                Ok(f)
            }
            Err(FormulaError::Syntax { pos, msg }) => {
                self.pos = pos;
                self.err(msg)
            }
            Err(e) => self.err(e.to_string()),
        }
    }

    /// Comma-separated formulas up to (and consuming) `stop`.
    /// An empty `stop` means end of input.
    fn cedent(&mut self, stop: &str) -> Result<Vec<Formula>, ProofParseError> {
        let mut out = Vec::new();
        let at_stop = |c: &mut Self| {
            if stop.is_empty() {
                c.ws();
                c.pos == c.src.len()
            } else {
                c.eat(stop)
            }
        };
        if at_stop(self) {
            return Ok(out);
        }
        loop {
            out.push(self.formula()?);
            if at_stop(self) {
                return Ok(out);
            }
            if !self.eat(",") {
                return self.err(format!("expected ',' or '{stop}'"));
            }
        }
    }

    fn sequent(&mut self, stop: &str) -> Result<Sequent, ProofParseError> {
        let ante = self.cedent("|-")?;
        let succ = self.cedent(stop)?;
        Ok(Sequent::new(ante, succ))
    }

    fn line_ref(&mut self) -> Result<usize, ProofParseError> {
        self.ws();
        if !self.eat("L") {
            return self.err("expected line reference");
        }
        let start = self.pos;
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
        }
        match self.src[start..self.pos].parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n - 1),
            _ => self.err("bad line reference"),
        }
    }

    /// Text between `[` and the matching `]`.
    fn bracket(&mut self) -> Result<&'a str, ProofParseError> {
        if !self.eat("[") {
            return self.err("expected '['");
        }
        let start = self.pos;
        let mut depth = 1;
        for (i, c) in self.src[start..].char_indices() {
            match c {
                '[' => depth += 1,
                ']' => {
                    depth -= 1;
                    if depth == 0 {
                        self.pos = start + i + 1;
                        return Ok(&self.src[start..start + i]);
                    }
                }
                _ => {}
            }
        }
        self.err("unclosed '['")
    }
}

fn parse_var(s: &str) -> Option<PropVar> {
    s.trim().strip_prefix('p')?.parse().ok().map(PropVar)
}

fn justification(c: &mut Cursor<'_>) -> Result<Justification, ProofParseError> {
    c.ws();
    let start = c.pos;
    while c.src[c.pos..].starts_with(|ch: char| ch.is_ascii_alphanumeric()) {
        c.pos += 1;
    }
    let name = &c.src[start..c.pos];
    let formula_arg = |c: &mut Cursor<'_>| -> Result<Formula, ProofParseError> {
        let arg = c.bracket()?;
        parse_formula_any(arg).or_else(|e| c.err(e.to_string()))
    };
    let j = match name {
        "ax0" => Justification::Axiom0,
        "ax1" => Justification::Axiom1,
        "id" => {
            let f = formula_arg(c)?;
            match f.as_lit() {
                Some(l) => Justification::Id(l),
                None => return c.err("id expects a literal"),
            }
        }
        "negL" | "negR" => {
            let arg = c.bracket()?;
            let Some(p) = parse_var(arg) else { return c.err("expected a variable") };
            if name == "negL" {
                Justification::NegL(p)
            } else {
                Justification::NegR(p)
            }
        }
        "thrL" | "thrR" => {
            let arg = c.bracket()?;
            let Ok(i) = arg.trim().parse() else { return c.err("expected an index") };
            if name == "thrL" {
                Justification::ThrL(i)
            } else {
                Justification::ThrR(i)
            }
        }
        "extL" | "extR" => {
            let f = formula_arg(c)?;
            let Some(e) = f.as_ext().cloned() else { return c.err("expected an extension variable") };
            if name == "extL" {
                Justification::ExtLR(e)
            } else {
                Justification::ExtRL(e)
            }
        }
        "hyp" => Justification::Hypothesis(c.bracket()?.trim().to_string()),
        _ => {
            let Some(rule) = Rule::from_name(name) else { return c.err(format!("unknown rule '{name}'")) };
            let principal = formula_arg(c)?;
            if !c.eat("(") {
                return c.err("expected '('");
            }
            let mut premises = Vec::new();
            if !c.eat(")") {
                loop {
                    premises.push(c.line_ref()?);
                    if c.eat(")") {
                        break;
                    }
                    if !c.eat(",") {
                        return c.err("expected ',' or ')'");
                    }
                }
            }
            Justification::Rule { rule, premises, principal }
        }
    };
    Ok(j)
}

/// Parses a single sequent `a, b |- c`.
pub fn parse_sequent(text: &str) -> Result<Sequent, ProofParseError> {
    Cursor { src: text, pos: 0, line: 1 }.sequent("")
}

/// Parses the line-based format. Line labels must be consecutive from L1.
pub fn parse_proof(text: &str) -> Result<Proof, ProofParseError> {
    let mut dialect = None;
    let mut axioms = ExtAxiomSet::new();
    let mut hypotheses = Vec::new();
    let mut lines = Vec::new();
    let mut intermediate = false;
    for (n, raw) in text.lines().enumerate() {
        let t = raw.trim();
        let lineno = n + 1;
        let syntax = |msg: String| ProofParseError::Syntax { line: lineno, msg };
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if let Some(rest) = t.strip_prefix("dialect:") {
            dialect = Some(Dialect::parse(rest).ok_or_else(|| syntax(format!("unknown dialect '{}'", rest.trim())))?);
        } else if let Some(rest) = t.strip_prefix("intermediate:") {
            intermediate = rest.trim() == "true";
        } else if let Some(rest) = t.strip_prefix("axiom:") {
            let one = ExtAxiomSet::parse(rest).map_err(|e| syntax(e.to_string()))?;
            axioms.extend_from(&one).map_err(|e| syntax(e.to_string()))?;
        } else if let Some(rest) = t.strip_prefix("hyp ") {
            let (name, seq) = rest.split_once(':').ok_or_else(|| syntax("expected 'hyp NAME: sequent'".into()))?;
            let mut c = Cursor { src: seq, pos: 0, line: lineno };
            let s = c.sequent("")?;
            c.ws();
            if c.pos != seq.len() {
                return c.err("trailing input after hypothesis");
            }
            hypotheses.push((name.trim().to_string(), s));
        } else if t.starts_with('L') {
            let (label, body) = t.split_once(':').ok_or_else(|| syntax("expected 'Ln:'".into()))?;
            if label.trim() != format!("L{}", lines.len() + 1) {
                return Err(syntax(format!("expected label L{}", lines.len() + 1)));
            }
            let mut c = Cursor { src: body, pos: 0, line: lineno };
            let seq = c.sequent(";")?;
            let just = justification(&mut c)?;
            c.ws();
            if c.pos != body.len() {
                return c.err("trailing input");
            }
            lines.push(Line { seq, just });
        } else {
            return Err(syntax(format!("unrecognised line '{t}'")));
        }
    }
    let dialect = dialect.ok_or(ProofParseError::NoDialect)?;
    if lines.is_empty() {
        return Err(ProofParseError::Empty);
    }
    Ok(Proof { dialect, axioms, hypotheses, lines, intermediate })
}
