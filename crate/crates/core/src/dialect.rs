//! Syntax and rule policies of the sequent dialects.

use std::fmt;

use crate::term::{Formula, FormulaError, PropVar};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Dialect {
    /// Decision rules only, no extension variables.
    Lndt,
    /// Decision rules plus extension axioms.
    Elndt,
    /// Positive fragment: positive decision rules, no general decisions and
    /// no negative literals, cut formulas included.
    Plus,
    /// Positive fragment with negative literals and the two negation
    /// initial sequents.
    PlusMinus,
    /// Positive fragment with the threshold initial sequents
    /// `p_i, thr[vars∖i; k] ⊢` and `⊢ p_i, thr[vars∖i; k]`.
    Tk { k: i64, vars: Vec<PropVar> },
}

impl Dialect {
    pub fn allows_ext(&self) -> bool {
        !matches!(self, Dialect::Lndt)
    }

    /// `pL`/`pR` on general decisions.
    pub fn general_rules(&self) -> bool {
        matches!(self, Dialect::Lndt | Dialect::Elndt)
    }

    /// `posPL`/`posPR` on positive decisions.
    pub fn positive_rules(&self) -> bool {
        !self.general_rules()
    }

    pub fn negation_axioms(&self) -> bool {
        matches!(self, Dialect::PlusMinus)
    }

    pub fn check_formula(&self, f: &Formula) -> Result<(), FormulaError> {
        let forbid = |what: &str| {
            Err(FormulaError::Dialect { dialect: self.to_string(), what: what.to_string(), formula: f.to_string() })
        };
        if !self.allows_ext() && f.has_ext() {
            return forbid("extension variables");
        }
        if self.general_rules() && f.has_posdec() {
            return forbid("positive decisions");
        }
        if self.positive_rules() && f.has_dec() {
            return forbid("general decisions");
        }
        if !self.negation_axioms() && f.has_negative_literal() {
            return forbid("negative literals");
        }
        Ok(())
    }

    pub fn parse(s: &str) -> Option<Dialect> {
        let s = s.trim();
        match s {
            "LNDT" => Some(Dialect::Lndt),
            "eLNDT" => Some(Dialect::Elndt),
            "eLNDT+" => Some(Dialect::Plus),
            "eLNDT+-" => Some(Dialect::PlusMinus),
            _ => {
                let inner = s.strip_prefix("T[")?.strip_suffix(']')?;
                let (k, vars) = inner.split_once(';')?;
                let k = k.trim().parse().ok()?;
                let vars = vars
                    .split_whitespace()
                    .map(|t| t.strip_prefix('p').and_then(|d| d.parse().ok()).map(PropVar))
                    .collect::<Option<Vec<_>>>()?;
                Some(Dialect::Tk { k, vars })
            }
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dialect::Lndt => write!(f, "LNDT"),
            Dialect::Elndt => write!(f, "eLNDT"),
            Dialect::Plus => write!(f, "eLNDT+"),
            Dialect::PlusMinus => write!(f, "eLNDT+-"),
            Dialect::Tk { k, vars } => {
                write!(f, "T[{k};")?;
                for v in vars {
                    write!(f, " {v}")?;
                }
                write!(f, "]")
            }
        }
    }
}
