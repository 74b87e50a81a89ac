//! Template rendering of formulas and proof steps into plain English.

use super::{Glossary, SftError};
use crate::logic::rules::find_atomic_instance;
use crate::logic::{Formula, RuleId, Term};

pub const LOGIC_SYMBOLS: [char; 7] = ['¬', '∧', '∨', '→', '∀', '∃', '⊥'];

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

/// Renders sentences, with the first letter capitalised and a full stop.
pub fn sentence(s: &str) -> String {
    let s = capitalize(s.trim());
    if s.ends_with('.') {
        s
    } else {
        s + "."
    }
}

impl Glossary {
    fn subject(&self, t: &Term, var_reading: &str) -> Result<String, SftError> {
        match t {
            Term::Var(_) => Ok(var_reading.to_string()),
            Term::Const(c) => self
                .constants
                .get(c)
                .cloned()
                .ok_or_else(|| SftError::GlossaryGap(c.clone())),
        }
    }

    fn phrase(&self, pred: &str) -> Result<&str, SftError> {
        self.predicates
            .get(pred)
            .map(String::as_str)
            .ok_or_else(|| SftError::GlossaryGap(pred.to_string()))
    }

    /// A unary literal as (predicate, positive) when it applies to `var`.
    fn literal_on<'f>(&self, f: &'f Formula, var: &str) -> Option<(&'f str, bool)> {
        match f {
            Formula::Atom { pred, args } if args.len() == 1 && args[0] == Term::Var(var.into()) => Some((pred, true)),
            Formula::Not(inner) => self.literal_on(inner, var).filter(|l| l.1).map(|(p, _)| (p, false)),
            _ => None,
        }
    }

    fn verb_phrase(&self, pred: &str, positive: bool) -> Result<String, SftError> {
        let p = self.phrase(pred)?;
        Ok(if positive {
            p.to_string()
        } else if let Some(rest) = p.strip_prefix("is ") {
            format!("is not {rest}")
        } else {
            format!("does not satisfy being {p}")
        })
    }

    fn render_with(&self, f: &Formula, var_reading: &str) -> Result<String, SftError> {
        Ok(match f {
            Formula::Atom { pred, args } if args.is_empty() => self.phrase(pred)?.to_string(),
            Formula::Atom { pred, args } if args.len() == 1 => {
                format!("{} {}", self.subject(&args[0], var_reading)?, self.phrase(pred)?)
            }
            Formula::Atom { pred, args } => {
                let subs = args
                    .iter()
                    .map(|a| self.subject(a, var_reading))
                    .collect::<Result<Vec<_>, _>>()?;
                format!("{} {}", subs.join(" and "), self.phrase(pred)?)
            }
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Atom { pred, args } if args.len() == 1 && self.phrase(pred)?.starts_with("is ") => {
                    format!("{} {}", self.subject(&args[0], var_reading)?, self.verb_phrase(pred, false)?)
                }
                other => format!("it is not the case that {}", self.render_with(other, var_reading)?),
            },
            Formula::And(a, b) => format!("{} and {}", self.render_with(a, var_reading)?, self.render_with(b, var_reading)?),
            Formula::Or(a, b) => format!("either {} or {}", self.render_with(a, var_reading)?, self.render_with(b, var_reading)?),
            Formula::Implies(a, b) => format!("if {}, then {}", self.render_with(a, var_reading)?, self.render_with(b, var_reading)?),
            Formula::ForAll(v, body) => {
                if let Formula::Implies(a, b) = body.as_ref() {
                    if let (Some((p, ps)), Some((q, qs))) = (self.literal_on(a, v), self.literal_on(b, v)) {
                        return Ok(format!("everything that {} {}", self.verb_phrase(p, ps)?, self.verb_phrase(q, qs)?));
                    }
                }
                format!("for anything, {}", self.render_with(body, "it")?)
            }
            Formula::Exists(v, body) => match self.literal_on(body, v) {
                Some((p, s)) => format!("something {}", self.verb_phrase(p, s)?),
                None => format!("there is something such that {}", self.render_with(body, "it")?),
            },
            Formula::Falsum => "a contradiction".into(),
        })
    }

    /// English reading of a closed formula, without final punctuation.
    pub fn render(&self, f: &Formula) -> Result<String, SftError> {
        self.render_with(f, "it")
    }
}

/// The rule-specific sentence for one derivation step.
pub fn derivation_sentence(g: &Glossary, premises: &[Formula], conclusion: &Formula) -> Result<String, SftError> {
    let rule = find_atomic_instance(premises, conclusion).map(|a| a.rule);
    // Put the general statement (rule or disjunction) first.
    let mut ordered: Vec<&Formula> = premises.iter().collect();
    ordered.sort_by_key(|f| matches!(f, Formula::Atom { .. } | Formula::Not(_)));
    let ps = ordered.iter().map(|f| g.render(f)).collect::<Result<Vec<_>, _>>()?;
    let c = g.render(conclusion)?;
    let joined = ps.join(", and ");
    let s = match rule {
        Some(RuleId::UniversalModusPonens | RuleId::ModusPonens) => format!("since {joined}, {c}"),
        Some(RuleId::UniversalModusTollens | RuleId::ModusTollens) => {
            format!("since {joined}, it must be that {c}")
        }
        Some(RuleId::ConjunctionIntro) => format!("because {joined}, we have both: {c}"),
        Some(RuleId::ConjunctionElim) => format!("since {joined}, in particular {c}"),
        Some(RuleId::DisjunctionIntro) => format!("since {joined}, it holds that {c}"),
        Some(RuleId::DisjunctiveSyllogism) => format!("since {joined}, the remaining option holds, so {c}"),
        Some(RuleId::Reiteration) => format!("as stated, {c}"),
        Some(RuleId::Contradiction) => format!("{joined} cannot both hold, which is a contradiction"),
        Some(_) => format!("since {joined}, equivalently {c}"),
        None => format!("from {joined}, it follows that {c}"),
    };
    Ok(s)
}

pub fn assumption_sentence(g: &Glossary, f: &Formula) -> Result<String, SftError> {
    Ok(format!("suppose, for the sake of contradiction, that {}", g.render(f)?))
}

pub fn reductio_sentence(g: &Glossary, assumption: &Formula, conclusion: &Formula) -> Result<String, SftError> {
    Ok(format!(
        "so the assumption that {} is false, and {}",
        g.render(assumption)?,
        g.render(conclusion)?
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn glossary() -> Glossary {
        let mut g = Glossary::default();
        g.predicates.insert("A".into(), "is a raised".into());
        g.predicates.insert("B".into(), "is big".into());
        g.predicates.insert("P".into(), "the fandango happens".into());
        g.constants.insert("a".into(), "this tablefork".into());
        g
    }

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn atoms_and_rules() {
        let g = glossary();
        assert_eq!(g.render(&f("A(a)")).unwrap(), "this tablefork is a raised");
        assert_eq!(g.render(&f("¬A(a)")).unwrap(), "this tablefork is not a raised");
        assert_eq!(g.render(&f("∀x (A(x) → B(x))")).unwrap(), "everything that is a raised is big");
        assert_eq!(g.render(&f("¬P")).unwrap(), "it is not the case that the fandango happens");
        assert_eq!(g.render(&f("∃x ¬B(x)")).unwrap(), "something is not big");
        assert_eq!(g.render(&f("C(a)")), Err(SftError::GlossaryGap("C".into())));
    }

    #[test]
    fn universal_modus_ponens_sentence() {
        let g = glossary();
        let s = derivation_sentence(&g, &[f("A(a)"), f("∀x (A(x) → B(x))")], &f("B(a)")).unwrap();
        assert_eq!(s, "since everything that is a raised is big, and this tablefork is a raised, this tablefork is big");
        assert!(!s.contains(LOGIC_SYMBOLS));
    }
}
