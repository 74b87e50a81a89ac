//! Atomic inference-rule catalog.
//!
//! Every rule here counts as one inference. Elimination and rewrite rules are
//! generated forwards from known formulas; introduction rules (∧I, ∨I, ∃I)
//! only fire towards a supplied set of target formulas, since their outputs
//! are otherwise unbounded.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::formula::{
    ac_eq, and, implies, match_instance, not, or, rename_apart, universal_prefix, Formula,
    Substitution, Term,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    UniversalModusPonens,
    ModusPonens,
    ModusTollens,
    UniversalModusTollens,
    ConjunctionIntro,
    ConjunctionElim,
    DisjunctionIntro,
    DisjunctiveSyllogism,
    DeMorgan,
    Contraposition,
    UniversalInstantiation,
    ExistentialIntro,
    Contradiction,
    Reductio,
    Reiteration,
}

impl RuleId {
    pub const ALL: [RuleId; 15] = [
        RuleId::UniversalModusPonens,
        RuleId::ModusPonens,
        RuleId::ModusTollens,
        RuleId::UniversalModusTollens,
        RuleId::ConjunctionIntro,
        RuleId::ConjunctionElim,
        RuleId::DisjunctionIntro,
        RuleId::DisjunctiveSyllogism,
        RuleId::DeMorgan,
        RuleId::Contraposition,
        RuleId::UniversalInstantiation,
        RuleId::ExistentialIntro,
        RuleId::Contradiction,
        RuleId::Reductio,
        RuleId::Reiteration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::UniversalModusPonens => "universal modus ponens",
            RuleId::ModusPonens => "modus ponens",
            RuleId::ModusTollens => "modus tollens",
            RuleId::UniversalModusTollens => "universal modus tollens",
            RuleId::ConjunctionIntro => "conjunction introduction",
            RuleId::ConjunctionElim => "conjunction elimination",
            RuleId::DisjunctionIntro => "disjunction introduction",
            RuleId::DisjunctiveSyllogism => "disjunctive syllogism",
            RuleId::DeMorgan => "De Morgan",
            RuleId::Contraposition => "contraposition",
            RuleId::UniversalInstantiation => "universal instantiation",
            RuleId::ExistentialIntro => "existential introduction",
            RuleId::Contradiction => "contradiction",
            RuleId::Reductio => "reductio ad absurdum",
            RuleId::Reiteration => "reiteration",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One instance of a catalog rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleApplication {
    pub rule: RuleId,
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
    #[serde(default, skip_serializing_if = "Substitution::is_empty")]
    pub substitution: Substitution,
}

impl RuleApplication {
    fn new(rule: RuleId, premises: Vec<Formula>, conclusion: Formula) -> Self {
        RuleApplication {
            rule,
            premises,
            conclusion,
            substitution: Substitution::new(),
        }
    }

    fn with_subst(mut self, s: Substitution) -> Self {
        self.substitution = s;
        self
    }
}

/// Classical complement: strips one negation or adds one.
pub fn complement(f: &Formula) -> Formula {
    match f {
        Formula::Not(g) => (**g).clone(),
        other => not(other.clone()),
    }
}

/// `g` is the complement of `f` (either direction, modulo ∧/∨ order).
pub fn is_complement(f: &Formula, g: &Formula) -> bool {
    match (f, g) {
        (_, Formula::Not(h)) if ac_eq(f, h) => true,
        (Formula::Not(h), _) if ac_eq(h, g) => true,
        _ => false,
    }
}

fn contains_ac(known: &[Formula], f: &Formula) -> Option<usize> {
    known.iter().position(|k| ac_eq(k, f))
}

/// Matches `pattern` (with free `vars`) against `target`, returning a complete
/// substitution for the variables occurring in `needed`.
fn match_closed(pattern: &Formula, target: &Formula, vars: &[String], needed: &Formula) -> Option<Substitution> {
    let mut s = Substitution::new();
    if !match_instance(pattern, target, vars, &mut s) {
        return None;
    }
    let free = needed.free_vars();
    if free.iter().all(|v| s.contains_key(v)) {
        Some(s)
    } else {
        None
    }
}

/// All applications of elimination and rewrite rules whose premises are drawn
/// from `known`. Universal instantiation uses `constants`.
pub fn forward_applications(known: &[Formula], constants: &BTreeSet<String>) -> Vec<RuleApplication> {
    let mut out = Vec::new();
    for p in known {
        match p {
            Formula::Implies(a, b) => {
                for q in known {
                    if ac_eq(q, a) {
                        out.push(RuleApplication::new(
                            RuleId::ModusPonens,
                            vec![p.clone(), q.clone()],
                            (**b).clone(),
                        ));
                    }
                    if is_complement(b, q) {
                        out.push(RuleApplication::new(
                            RuleId::ModusTollens,
                            vec![p.clone(), q.clone()],
                            complement(a),
                        ));
                    }
                }
                out.push(RuleApplication::new(
                    RuleId::Contraposition,
                    vec![p.clone()],
                    implies(complement(b), complement(a)),
                ));
            }
            Formula::ForAll(..) => {
                let renamed = rename_apart(p, "_u");
                let (vars, body) = universal_prefix(&renamed);
                let orig_names: Vec<String> = universal_prefix(p).0;
                let restore = |s: Substitution| -> Substitution {
                    s.into_iter()
                        .map(|(k, v)| {
                            let name = vars
                                .iter()
                                .position(|r| *r == k)
                                .map(|i| orig_names[i].clone())
                                .unwrap_or(k);
                            (name, v)
                        })
                        .collect()
                };
                if let Formula::Implies(a, b) = body {
                    for q in known {
                        if let Some(s) = match_closed(a, q, &vars, b) {
                            let concl = b.instantiate(&s);
                            if concl.is_closed() {
                                out.push(
                                    RuleApplication::new(
                                        RuleId::UniversalModusPonens,
                                        vec![p.clone(), q.clone()],
                                        concl,
                                    )
                                    .with_subst(restore(s)),
                                );
                            }
                        }
                        let neg_b = complement(b);
                        if let Some(s) = match_closed(&neg_b, q, &vars, a) {
                            let concl = complement(a).instantiate(&s);
                            if concl.is_closed() {
                                out.push(
                                    RuleApplication::new(
                                        RuleId::UniversalModusTollens,
                                        vec![p.clone(), q.clone()],
                                        concl,
                                    )
                                    .with_subst(restore(s.clone())),
                                );
                            }
                        }
                    }
                }
                let (orig_vars, orig_body) = universal_prefix(p);
                if let Formula::Implies(a, b) = orig_body {
                    let mut contra = implies(complement(b), complement(a));
                    for v in orig_vars.iter().rev() {
                        contra = Formula::ForAll(v.clone(), Box::new(contra));
                    }
                    out.push(RuleApplication::new(RuleId::Contraposition, vec![p.clone()], contra));
                }
                if let Formula::ForAll(v, body) = p {
                    for c in constants {
                        let inst = body.substitute(v, &Term::Const(c.clone()));
                        let mut s = Substitution::new();
                        s.insert(v.clone(), c.clone());
                        out.push(
                            RuleApplication::new(RuleId::UniversalInstantiation, vec![p.clone()], inst)
                                .with_subst(s),
                        );
                    }
                }
            }
            Formula::And(a, b) => {
                out.push(RuleApplication::new(RuleId::ConjunctionElim, vec![p.clone()], (**a).clone()));
                out.push(RuleApplication::new(RuleId::ConjunctionElim, vec![p.clone()], (**b).clone()));
                if let (Formula::Not(x), Formula::Not(y)) = (&**a, &**b) {
                    out.push(RuleApplication::new(
                        RuleId::DeMorgan,
                        vec![p.clone()],
                        not(or((**x).clone(), (**y).clone())),
                    ));
                }
            }
            Formula::Or(a, b) => {
                for q in known {
                    if is_complement(a, q) {
                        out.push(RuleApplication::new(
                            RuleId::DisjunctiveSyllogism,
                            vec![p.clone(), q.clone()],
                            (**b).clone(),
                        ));
                    }
                    if is_complement(b, q) {
                        out.push(RuleApplication::new(
                            RuleId::DisjunctiveSyllogism,
                            vec![p.clone(), q.clone()],
                            (**a).clone(),
                        ));
                    }
                }
                if let (Formula::Not(x), Formula::Not(y)) = (&**a, &**b) {
                    out.push(RuleApplication::new(
                        RuleId::DeMorgan,
                        vec![p.clone()],
                        not(and((**x).clone(), (**y).clone())),
                    ));
                }
            }
            Formula::Not(inner) => match &**inner {
                Formula::And(a, b) => out.push(RuleApplication::new(
                    RuleId::DeMorgan,
                    vec![p.clone()],
                    or(not((**a).clone()), not((**b).clone())),
                )),
                Formula::Or(a, b) => out.push(RuleApplication::new(
                    RuleId::DeMorgan,
                    vec![p.clone()],
                    and(not((**a).clone()), not((**b).clone())),
                )),
                _ => {}
            },
            _ => {}
        }
    }
    out
}

/// Contradiction applications (φ, ¬φ ⊢ ⊥) available in `known`.
pub fn contradiction_applications(known: &[Formula]) -> Vec<RuleApplication> {
    let mut out = Vec::new();
    for (i, p) in known.iter().enumerate() {
        for q in &known[i + 1..] {
            if is_complement(p, q) {
                out.push(RuleApplication::new(
                    RuleId::Contradiction,
                    vec![p.clone(), q.clone()],
                    Formula::Falsum,
                ));
            }
        }
    }
    out
}

/// Introduction-rule applications producing `target` from `known`.
pub fn introduction_applications(
    known: &[Formula],
    target: &Formula,
    constants: &BTreeSet<String>,
) -> Vec<RuleApplication> {
    let mut out = Vec::new();
    match target {
        Formula::And(a, b) => {
            if let (Some(i), Some(j)) = (contains_ac(known, a), contains_ac(known, b)) {
                out.push(RuleApplication::new(
                    RuleId::ConjunctionIntro,
                    vec![known[i].clone(), known[j].clone()],
                    target.clone(),
                ));
            }
        }
        Formula::Or(a, b) => {
            for side in [a, b] {
                if let Some(i) = contains_ac(known, side) {
                    out.push(RuleApplication::new(
                        RuleId::DisjunctionIntro,
                        vec![known[i].clone()],
                        target.clone(),
                    ));
                }
            }
        }
        Formula::Exists(v, body) => {
            for c in constants {
                let inst = body.substitute(v, &Term::Const(c.clone()));
                if let Some(i) = contains_ac(known, &inst) {
                    let mut s = Substitution::new();
                    s.insert(v.clone(), c.clone());
                    out.push(
                        RuleApplication::new(RuleId::ExistentialIntro, vec![known[i].clone()], target.clone())
                            .with_subst(s),
                    );
                }
            }
        }
        _ => {}
    }
    out
}

/// Every single-rule application from `known` whose conclusion matches `goal`
/// modulo ∧/∨ order.
pub fn applications_to(known: &[Formula], goal: &Formula, constants: &BTreeSet<String>) -> Vec<RuleApplication> {
    let mut out: Vec<RuleApplication> = forward_applications(known, constants)
        .into_iter()
        .filter(|a| ac_eq(&a.conclusion, goal))
        .collect();
    if matches!(goal, Formula::Falsum) {
        out.extend(contradiction_applications(known));
    }
    out.extend(introduction_applications(known, goal, constants));
    out
}

/// Re-checks that `app` is a genuine instance of its rule.
pub fn verify_application(app: &RuleApplication, constants: &BTreeSet<String>) -> bool {
    match app.rule {
        RuleId::Reiteration => app.premises.len() == 1 && ac_eq(&app.premises[0], &app.conclusion),
        RuleId::Reductio => {
            app.premises.len() == 2
                && matches!(app.premises[1], Formula::Falsum)
                && ac_eq(&app.conclusion, &complement(&app.premises[0]))
        }
        _ => {
            let mut consts = constants.clone();
            for f in app.premises.iter().chain(std::iter::once(&app.conclusion)) {
                consts.extend(f.constants());
            }
            applications_to(&app.premises, &app.conclusion, &consts)
                .iter()
                .any(|a| a.rule == app.rule && uses_all(a, &app.premises))
        }
    }
}

/// True when every formula in `stated` is one of the rule instance's premises.
pub fn uses_all(app: &RuleApplication, stated: &[Formula]) -> bool {
    stated.iter().all(|s| app.premises.iter().any(|p| ac_eq(p, s)))
        && app.premises.iter().all(|p| stated.iter().any(|s| ac_eq(p, s)))
}

/// Finds a single catalog rule instance that concludes `conclusion` and
/// consumes every stated premise. Restating a lone premise counts as
/// reiteration.
pub fn find_atomic_instance(premises: &[Formula], conclusion: &Formula) -> Option<RuleApplication> {
    let mut stated: Vec<Formula> = Vec::new();
    for p in premises {
        if !stated.iter().any(|s| ac_eq(s, p)) {
            stated.push(p.clone());
        }
    }
    if stated.len() == 1 && ac_eq(&stated[0], conclusion) {
        return Some(RuleApplication::new(RuleId::Reiteration, stated, conclusion.clone()));
    }
    let mut constants = BTreeSet::new();
    for f in stated.iter().chain(std::iter::once(conclusion)) {
        constants.extend(f.constants());
    }
    applications_to(&stated, conclusion, &constants)
        .into_iter()
        .find(|a| uses_all(a, &stated))
}
