//! Bounded entailment search over the rule catalog.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::formula::{ac_eq, print_formula, Formula, Term};
use super::rules::{
    applications_to, complement, find_atomic_instance, forward_applications, introduction_applications,
    RuleApplication, RuleId,
};
use super::semantics::{classify, domain_bound, find_countermodel, Fragment, Interpretation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntailError {
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
    #[error("formula is not closed: {0}")]
    OpenFormula(String),
}

/// Search limits for one entailment query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_depth: usize,
    pub max_nodes: usize,
    /// Wall-clock cap; `None` disables it.
    #[serde(default, with = "opt_millis")]
    pub time_limit: Option<Duration>,
}

mod opt_millis {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        d.map(|d| d.as_millis() as u64).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Ok(Option::<u64>::deserialize(d)?.map(Duration::from_millis))
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_depth: 3,
            max_nodes: 50_000,
            time_limit: Some(Duration::from_secs(2)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntailmentStatus {
    Valid,
    Invalid,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Derivation(Vec<RuleApplication>),
    Countermodel(Interpretation),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntailmentVerdict {
    pub status: EntailmentStatus,
    pub min_rule_count: Option<usize>,
    pub witness: Option<Witness>,
    /// Search stopped on the node or time budget rather than finishing.
    pub budget_exhausted: bool,
    pub nodes: usize,
}

impl EntailmentVerdict {
    pub fn derivation(&self) -> Option<&[RuleApplication]> {
        match &self.witness {
            Some(Witness::Derivation(d)) => Some(d),
            _ => None,
        }
    }

    pub fn countermodel(&self) -> Option<&Interpretation> {
        match &self.witness {
            Some(Witness::Countermodel(m)) => Some(m),
            _ => None,
        }
    }
}

struct Exhausted;

struct Searcher {
    goal: Formula,
    constants: BTreeSet<String>,
    targets: Vec<Formula>,
    budget: Budget,
    started: Instant,
    nodes: usize,
}

/// Ground instances (over `constants`) of every ∧ / ∨ / ∃ subformula; the
/// only formulas introduction rules are allowed to build.
fn introduction_targets(formulas: &[&Formula], constants: &BTreeSet<String>) -> Vec<Formula> {
    fn subformulas<'f>(f: &'f Formula, out: &mut Vec<&'f Formula>) {
        out.push(f);
        match f {
            Formula::Not(g) | Formula::ForAll(_, g) | Formula::Exists(_, g) => subformulas(g, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                subformulas(a, out);
                subformulas(b, out);
            }
            _ => {}
        }
    }
    let mut subs = Vec::new();
    for f in formulas {
        subformulas(f, &mut subs);
    }
    let mut out: Vec<Formula> = Vec::new();
    for s in subs {
        if !matches!(s, Formula::And(..) | Formula::Or(..) | Formula::Exists(..)) {
            continue;
        }
        let mut instances = vec![s.clone()];
        for v in s.free_vars() {
            instances = instances
                .into_iter()
                .flat_map(|i| {
                    constants
                        .iter()
                        .map(|c| i.substitute(&v, &Term::Const(c.clone())))
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        for i in instances {
            if i.is_closed() && !out.iter().any(|o| ac_eq(o, &i)) {
                out.push(i);
            }
        }
    }
    out
}

impl Searcher {
    fn tick(&mut self) -> Result<(), Exhausted> {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            return Err(Exhausted);
        }
        if let Some(limit) = self.budget.time_limit {
            if self.nodes % 64 == 0 && self.started.elapsed() > limit {
                return Err(Exhausted);
            }
        }
        Ok(())
    }

    fn candidates(&self, known: &[Formula]) -> Vec<(String, RuleApplication)> {
        let mut apps = forward_applications(known, &self.constants);
        for t in &self.targets {
            if !known.iter().any(|k| ac_eq(k, t)) {
                apps.extend(introduction_applications(known, t, &self.constants));
            }
        }
        let mut out: Vec<(String, RuleApplication)> = Vec::new();
        for a in apps {
            if known.iter().any(|k| ac_eq(k, &a.conclusion)) {
                continue;
            }
            if out.iter().any(|(_, b)| ac_eq(&b.conclusion, &a.conclusion)) {
                continue;
            }
            out.push((print_formula(&a.conclusion), a));
        }
        out.sort_by(|x, y| x.0.cmp(&y.0));
        out
    }

    /// Depth-limited DFS. Adjacent independent steps are only explored in
    /// increasing key order, which removes permutations of the same
    /// derivation without losing any minimal one.
    fn dfs(
        &mut self,
        known: &mut Vec<Formula>,
        path: &mut Vec<(String, RuleApplication)>,
        remaining: usize,
    ) -> Result<bool, Exhausted> {
        self.tick()?;
        if remaining == 1 {
            if let Some(app) = applications_to(known, &self.goal, &self.constants).into_iter().next() {
                path.push((String::new(), app));
                return Ok(true);
            }
            return Ok(false);
        }
        for (key, app) in self.candidates(known) {
            if let Some((prev_key, prev)) = path.last() {
                let uses_prev = app.premises.iter().any(|p| ac_eq(p, &prev.conclusion));
                if !uses_prev && key <= *prev_key {
                    continue;
                }
            }
            known.push(app.conclusion.clone());
            path.push((key, app));
            if self.dfs(known, path, remaining - 1)? {
                return Ok(true);
            }
            path.pop();
            known.pop();
        }
        Ok(false)
    }
}

fn check_inputs(premises: &[Formula], conclusion: &Formula, budget: &Budget) -> Result<(), EntailError> {
    if budget.max_depth == 0 || budget.max_nodes == 0 {
        return Err(EntailError::InvalidBudget(format!(
            "max_depth={} max_nodes={}",
            budget.max_depth, budget.max_nodes
        )));
    }
    if budget.time_limit == Some(Duration::ZERO) {
        return Err(EntailError::InvalidBudget("time_limit=0".into()));
    }
    for f in premises.iter().chain(std::iter::once(conclusion)) {
        if !f.is_closed() {
            return Err(EntailError::OpenFormula(print_formula(f)));
        }
    }
    Ok(())
}

fn valid(derivation: Vec<RuleApplication>, nodes: usize) -> EntailmentVerdict {
    EntailmentVerdict {
        status: EntailmentStatus::Valid,
        min_rule_count: Some(derivation.len()),
        witness: Some(Witness::Derivation(derivation)),
        budget_exhausted: false,
        nodes,
    }
}

/// Iterative-deepening derivation search, falling back to finite
/// countermodel search on the monadic/ground fragment.
pub fn entails(premises: &[Formula], conclusion: &Formula, budget: Budget) -> Result<EntailmentVerdict, EntailError> {
    check_inputs(premises, conclusion, &budget)?;

    if premises.iter().any(|p| ac_eq(p, conclusion)) {
        return Ok(EntailmentVerdict {
            status: EntailmentStatus::Valid,
            min_rule_count: Some(0),
            witness: Some(Witness::Derivation(Vec::new())),
            budget_exhausted: false,
            nodes: 0,
        });
    }

    let mut constants = BTreeSet::new();
    for f in premises.iter().chain(std::iter::once(conclusion)) {
        constants.extend(f.constants());
    }
    // Indirect route: assume the complement of the goal, derive ⊥, discharge.
    let assumed = complement(conclusion);
    let all: Vec<&Formula> = premises.iter().chain(std::iter::once(conclusion)).collect();
    let with_assumption: Vec<&Formula> = all.iter().copied().chain(std::iter::once(&assumed)).collect();
    let direct_targets = introduction_targets(&all, &constants);
    let indirect_targets = introduction_targets(&with_assumption, &constants);
    let mut searcher = Searcher {
        goal: conclusion.clone(),
        targets: Vec::new(),
        constants,
        budget,
        started: Instant::now(),
        nodes: 0,
    };

    let mut exhausted = false;
    for depth in 1..=budget.max_depth {
        searcher.goal = conclusion.clone();
        searcher.targets = direct_targets.clone();
        let mut known = premises.to_vec();
        let mut path = Vec::new();
        match searcher.dfs(&mut known, &mut path, depth) {
            Ok(true) => return Ok(valid(path.into_iter().map(|(_, a)| a).collect(), searcher.nodes)),
            Ok(false) => {}
            Err(Exhausted) => {
                exhausted = true;
                break;
            }
        }
        if depth < 2 {
            continue;
        }
        searcher.goal = Formula::Falsum;
        searcher.targets = indirect_targets.clone();
        let mut known = premises.to_vec();
        known.push(assumed.clone());
        let mut path = Vec::new();
        match searcher.dfs(&mut known, &mut path, depth - 1) {
            Ok(true) => {
                let mut derivation: Vec<RuleApplication> = path.into_iter().map(|(_, a)| a).collect();
                derivation.push(RuleApplication {
                    rule: RuleId::Reductio,
                    premises: vec![assumed.clone(), Formula::Falsum],
                    conclusion: conclusion.clone(),
                    substitution: Default::default(),
                });
                return Ok(valid(derivation, searcher.nodes));
            }
            Ok(false) => {}
            Err(Exhausted) => {
                exhausted = true;
                break;
            }
        }
    }
    let nodes = searcher.nodes;

    let owned: Vec<Formula> = all.iter().map(|f| (*f).clone()).collect();
    if classify(all.iter().copied()) != Fragment::General {
        let bound = domain_bound(&owned).unwrap_or(1);
        if let Some(model) = find_countermodel(premises, conclusion, bound) {
            return Ok(EntailmentVerdict {
                status: EntailmentStatus::Invalid,
                min_rule_count: None,
                witness: Some(Witness::Countermodel(model)),
                budget_exhausted: exhausted,
                nodes,
            });
        }
    }
    Ok(EntailmentVerdict {
        status: EntailmentStatus::Unknown,
        min_rule_count: None,
        witness: None,
        budget_exhausted: exhausted,
        nodes,
    })
}

/// Outcome of an atomicity query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AtomicCheck {
    pub atomic: bool,
    /// Set when the step could be neither derived nor refuted within budget.
    pub unknown: bool,
    pub instance: Option<RuleApplication>,
}

/// A step is atomic when one catalog rule instance derives the conclusion and
/// consumes every stated premise.
pub fn check_atomic(premises: &[Formula], conclusion: &Formula, budget: Budget) -> Result<AtomicCheck, EntailError> {
    check_inputs(premises, conclusion, &budget)?;
    if let Some(instance) = find_atomic_instance(premises, conclusion) {
        return Ok(AtomicCheck {
            atomic: true,
            unknown: false,
            instance: Some(instance),
        });
    }
    let verdict = entails(premises, conclusion, budget)?;
    Ok(AtomicCheck {
        atomic: false,
        unknown: verdict.status == EntailmentStatus::Unknown,
        instance: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_formula;
    use crate::logic::rules::verify_application;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn fs(v: &[&str]) -> Vec<Formula> {
        v.iter().map(|s| f(s)).collect()
    }

    #[test]
    fn one_step_universal_modus_ponens() {
        let v = entails(&fs(&["∀x (A(x) → B(x))", "A(a)"]), &f("B(a)"), Budget::default()).unwrap();
        assert_eq!(v.status, EntailmentStatus::Valid);
        assert_eq!(v.min_rule_count, Some(1));
    }

    #[test]
    fn two_step_chain() {
        let ps = fs(&["∀x (A(x) → B(x))", "∀x (B(x) → C(x))", "A(a)"]);
        let v = entails(&ps, &f("C(a)"), Budget::default()).unwrap();
        assert_eq!(v.status, EntailmentStatus::Valid);
        assert_eq!(v.min_rule_count, Some(2));
        let mut consts = BTreeSet::new();
        consts.insert("a".to_string());
        for app in v.derivation().unwrap() {
            assert!(verify_application(app, &consts));
        }
    }

    #[test]
    fn indirect_derivations() {
        let v = entails(&fs(&["∀x (¬A(x) → A(x))"]), &f("A(b)"), Budget::default()).unwrap();
        assert_eq!(v.status, EntailmentStatus::Valid);
        assert_eq!(v.min_rule_count, Some(3));
        let d = v.derivation().unwrap();
        assert_eq!(d.last().unwrap().rule, RuleId::Reductio);
        assert_eq!(d.last().unwrap().premises[0], f("¬A(b)"));
        let consts: BTreeSet<String> = ["b".to_string()].into();
        assert!(d.iter().all(|a| verify_application(a, &consts)));

        let v = entails(&fs(&["A(a)", "¬A(a)"]), &f("C(a)"), Budget::default()).unwrap();
        assert_eq!(v.min_rule_count, Some(2));
        // A direct route is preferred at equal depth.
        let v = entails(&fs(&["P → Q", "P"]), &f("Q"), Budget::default()).unwrap();
        assert_eq!(v.derivation().unwrap()[0].rule, RuleId::ModusPonens);
    }

    #[test]
    fn unrelated_is_invalid_with_countermodel() {
        let v = entails(&fs(&["A(a)"]), &f("B(a)"), Budget::default()).unwrap();
        assert_eq!(v.status, EntailmentStatus::Invalid);
        let m = v.countermodel().unwrap();
        assert_eq!(m.to_string(), "{domain {d0}, a=d0, A={d0}, B={}}");
        assert_eq!(v.min_rule_count, None);
    }

    #[test]
    fn needs_conjunction_intro_before_ump() {
        let ps = fs(&["∀x (A(x) ∧ B(x) → C(x))", "A(a)", "B(a)"]);
        let v = entails(&ps, &f("C(a)"), Budget::default()).unwrap();
        assert_eq!(v.min_rule_count, Some(2));
    }

    #[test]
    fn depth_limit_yields_unknown_for_valid_but_deep() {
        let ps = fs(&[
            "∀x (A(x) → B(x))",
            "∀x (B(x) → C(x))",
            "∀x (C(x) → D(x))",
            "∀x (D(x) → E(x))",
            "A(a)",
        ]);
        let shallow = Budget {
            max_depth: 2,
            ..Budget::default()
        };
        let v = entails(&ps, &f("E(a)"), shallow).unwrap();
        assert_eq!(v.status, EntailmentStatus::Unknown);
        let deep = Budget {
            max_depth: 4,
            ..Budget::default()
        };
        assert_eq!(entails(&ps, &f("E(a)"), deep).unwrap().min_rule_count, Some(4));
    }

    #[test]
    fn node_budget_exhaustion_is_not_an_error() {
        let ps = fs(&["∀x (A(x) → B(x))", "∀x (B(x) → C(x))", "∀x (C(x) → D(x))", "A(a)"]);
        let tiny = Budget {
            max_depth: 3,
            max_nodes: 2,
            time_limit: None,
        };
        let v = entails(&ps, &f("D(a)"), tiny).unwrap();
        assert!(v.budget_exhausted);
        assert_eq!(v.status, EntailmentStatus::Unknown);
    }

    #[test]
    fn invalid_budget_rejected() {
        let b = Budget {
            max_depth: 0,
            ..Budget::default()
        };
        assert!(matches!(entails(&[], &f("A"), b), Err(EntailError::InvalidBudget(_))));
    }

    #[test]
    fn atomicity_examples() {
        let b = Budget::default();
        assert!(check_atomic(&fs(&["P", "Q"]), &f("P ∧ Q"), b).unwrap().atomic);
        assert!(check_atomic(&fs(&["P ∨ Q", "¬P"]), &f("Q"), b).unwrap().atomic);
        let fused = check_atomic(
            &fs(&["∀x (A(x) → B(x))", "∀x (B(x) → C(x))", "A(a)"]),
            &f("C(a)"),
            b,
        )
        .unwrap();
        assert!(!fused.atomic);
        assert!(!fused.unknown);
    }

    #[test]
    fn adding_premises_never_increases_count() {
        let base = fs(&["∀x (A(x) → B(x))", "∀x (B(x) → C(x))", "A(a)"]);
        let v1 = entails(&base, &f("C(a)"), Budget::default()).unwrap();
        let mut more = base.clone();
        more.push(f("B(a)"));
        let v2 = entails(&more, &f("C(a)"), Budget::default()).unwrap();
        assert!(v2.min_rule_count.unwrap() <= v1.min_rule_count.unwrap());
        assert_eq!(v2.min_rule_count, Some(1));
    }
}
