//! Finite interpretations and the countermodel finder used by `entails`.
//!
//! The finder grounds formulas over a fixed domain and assigns ground atoms
//! one at a time, pruning with three-valued evaluation of the partial model.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::formula::{Formula, Term};

/// A finite first-order structure over the domain `{0, .., domain_size-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interpretation {
    pub domain_size: usize,
    pub constants: BTreeMap<String, usize>,
    /// Extension of each predicate; nullary predicates hold the empty tuple
    /// when true.
    pub relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl Interpretation {
    pub fn holds(&self, pred: &str, tuple: &[usize]) -> bool {
        self.relations.get(pred).is_some_and(|r| r.contains(tuple))
    }

    /// Evaluates a closed formula.
    pub fn satisfies(&self, f: &Formula) -> bool {
        self.eval(f, &mut Vec::new())
    }

    fn eval(&self, f: &Formula, env: &mut Vec<(String, usize)>) -> bool {
        match f {
            Formula::Atom { pred, args } => {
                let tuple: Vec<usize> = args
                    .iter()
                    .map(|t| match t {
                        Term::Const(c) => self.constants.get(c).copied().unwrap_or(0),
                        Term::Var(v) => env
                            .iter()
                            .rev()
                            .find(|(n, _)| n == v)
                            .map(|(_, e)| *e)
                            .unwrap_or(0),
                    })
                    .collect();
                self.holds(pred, &tuple)
            }
            Formula::Falsum => false,
            Formula::Not(g) => !self.eval(g, env),
            Formula::And(a, b) => self.eval(a, env) && self.eval(b, env),
            Formula::Or(a, b) => self.eval(a, env) || self.eval(b, env),
            Formula::Implies(a, b) => !self.eval(a, env) || self.eval(b, env),
            Formula::ForAll(v, g) | Formula::Exists(v, g) => {
                let universal = matches!(f, Formula::ForAll(..));
                for e in 0..self.domain_size {
                    env.push((v.clone(), e));
                    let r = self.eval(g, env);
                    env.pop();
                    if universal && !r {
                        return false;
                    }
                    if !universal && r {
                        return true;
                    }
                }
                universal
            }
        }
    }

    /// True when every premise holds and the conclusion fails.
    pub fn refutes(&self, premises: &[Formula], conclusion: &Formula) -> bool {
        premises.iter().all(|p| self.satisfies(p)) && !self.satisfies(conclusion)
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let elem = |e: usize| format!("d{e}");
        let dom: Vec<String> = (0..self.domain_size).map(elem).collect();
        write!(f, "{{domain {{{}}}", dom.join(","))?;
        for (c, e) in &self.constants {
            write!(f, ", {c}={}", elem(*e))?;
        }
        for (p, ext) in &self.relations {
            if ext.iter().all(|t| t.is_empty()) && !ext.is_empty() {
                write!(f, ", {p}=true")?;
                continue;
            }
            let items: Vec<String> = ext
                .iter()
                .map(|t| match t.len() {
                    1 => elem(t[0]),
                    _ => format!("({})", t.iter().map(|e| elem(*e)).collect::<Vec<_>>().join(",")),
                })
                .collect();
            write!(f, ", {p}={{{}}}", items.join(","))?;
        }
        write!(f, "}}")
    }
}

/// Syntactic class that decides whether finite search is conclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fragment {
    /// No quantifiers anywhere.
    Ground,
    /// Quantifiers present, all predicates at most unary.
    Monadic,
    /// Anything else.
    General,
}

pub fn classify<'a>(formulas: impl IntoIterator<Item = &'a Formula> + Clone) -> Fragment {
    let quantified = formulas.clone().into_iter().any(Formula::has_quantifier);
    if !quantified {
        return Fragment::Ground;
    }
    let monadic = formulas
        .into_iter()
        .all(|f| f.predicates().values().all(|&arity| arity <= 1));
    if monadic {
        Fragment::Monadic
    } else {
        Fragment::General
    }
}

/// Domain size up to which a countermodel search is treated as exhaustive:
/// the number of constants for ground input, `min(2^k, 4)` for monadic input
/// with `k` unary predicates.
pub fn domain_bound(formulas: &[Formula]) -> Option<usize> {
    let mut preds: BTreeMap<String, usize> = BTreeMap::new();
    let mut consts = BTreeSet::new();
    for f in formulas {
        preds.extend(f.predicates());
        consts.extend(f.constants());
    }
    match classify(formulas.iter()) {
        Fragment::Ground => Some(consts.len().max(1)),
        Fragment::Monadic => {
            let unary = preds.values().filter(|&&a| a == 1).count() as u32;
            Some(2usize.saturating_pow(unary).clamp(1, 4))
        }
        Fragment::General => None,
    }
}

type GroundAtom = (String, Vec<usize>);

struct PartialModel<'a> {
    domain_size: usize,
    constants: &'a BTreeMap<String, usize>,
    values: HashMap<GroundAtom, bool>,
}

impl PartialModel<'_> {
    /// Three-valued evaluation: `None` when the partial assignment does not
    /// yet fix the truth value.
    fn eval(&self, f: &Formula, env: &mut Vec<(String, usize)>) -> Option<bool> {
        match f {
            Formula::Atom { pred, args } => {
                let tuple: Vec<usize> = args
                    .iter()
                    .map(|t| match t {
                        Term::Const(c) => self.constants[c],
                        Term::Var(v) => env.iter().rev().find(|(n, _)| n == v).unwrap().1,
                    })
                    .collect();
                self.values.get(&(pred.clone(), tuple)).copied()
            }
            Formula::Falsum => Some(false),
            Formula::Not(g) => self.eval(g, env).map(|b| !b),
            Formula::And(a, b) => match (self.eval(a, env), self.eval(b, env)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            Formula::Or(a, b) => match (self.eval(a, env), self.eval(b, env)) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
            Formula::Implies(a, b) => match (self.eval(a, env), self.eval(b, env)) {
                (Some(false), _) | (_, Some(true)) => Some(true),
                (Some(true), Some(false)) => Some(false),
                _ => None,
            },
            Formula::ForAll(v, g) | Formula::Exists(v, g) => {
                let universal = matches!(f, Formula::ForAll(..));
                let mut unknown = false;
                for e in 0..self.domain_size {
                    env.push((v.clone(), e));
                    let r = self.eval(g, env);
                    env.pop();
                    match r {
                        Some(false) if universal => return Some(false),
                        Some(true) if !universal => return Some(true),
                        None => unknown = true,
                        _ => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(universal)
                }
            }
        }
    }
}

/// Restricted-growth assignments of `n` constants into a domain of `size`;
/// unnamed elements are interchangeable, so this covers every assignment up
/// to isomorphism.
fn constant_assignments(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        let limit = cur.iter().max().map(|m| m + 2).unwrap_or(1).min(size);
        for v in 0..limit {
            cur.push(v);
            go(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, size, &mut Vec::new(), &mut out);
    out
}

fn tuples(size: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..size).map(move |e| {
                    let mut t2 = t.clone();
                    t2.push(e);
                    t2
                })
            })
            .collect();
    }
    out
}

/// Searches for an interpretation with at most `max_domain` elements that
/// makes every premise true and the conclusion false. Smaller domains are
/// tried first.
pub fn find_countermodel(premises: &[Formula], conclusion: &Formula, max_domain: usize) -> Option<Interpretation> {
    let mut preds: BTreeMap<String, usize> = BTreeMap::new();
    let mut consts: BTreeSet<String> = BTreeSet::new();
    for f in premises.iter().chain(std::iter::once(conclusion)) {
        preds.extend(f.predicates());
        consts.extend(f.constants());
    }
    let consts: Vec<String> = consts.into_iter().collect();
    let negated = Formula::Not(Box::new(conclusion.clone()));
    let mut goals: Vec<&Formula> = premises.iter().collect();
    goals.push(&negated);

    for size in 1..=max_domain.max(1) {
        let atoms: Vec<GroundAtom> = preds
            .iter()
            .flat_map(|(p, &ar)| tuples(size, ar).into_iter().map(move |t| (p.clone(), t)))
            .collect();
        for assignment in constant_assignments(consts.len(), size) {
            let cmap: BTreeMap<String, usize> = consts.iter().cloned().zip(assignment).collect();
            let mut model = PartialModel {
                domain_size: size,
                constants: &cmap,
                values: HashMap::new(),
            };
            if search(&mut model, &atoms, 0, &goals) {
                let mut relations: BTreeMap<String, BTreeSet<Vec<usize>>> =
                    preds.keys().map(|p| (p.clone(), BTreeSet::new())).collect();
                for ((p, t), v) in &model.values {
                    if *v {
                        relations.get_mut(p).unwrap().insert(t.clone());
                    }
                }
                return Some(Interpretation {
                    domain_size: size,
                    constants: cmap,
                    relations,
                });
            }
        }
    }
    None
}

fn search(model: &mut PartialModel<'_>, atoms: &[GroundAtom], next: usize, goals: &[&Formula]) -> bool {
    let mut all_true = true;
    for g in goals {
        match model.eval(g, &mut Vec::new()) {
            Some(false) => return false,
            Some(true) => {}
            None => all_true = false,
        }
    }
    if all_true {
        // Remaining atoms are irrelevant; default them to false.
        for a in &atoms[next..] {
            model.values.entry(a.clone()).or_insert(false);
        }
        return true;
    }
    if next == atoms.len() {
        return false;
    }
    for value in [false, true] {
        model.values.insert(atoms[next].clone(), value);
        if search(model, atoms, next + 1, goals) {
            return true;
        }
    }
    model.values.remove(&atoms[next]);
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn countermodel_for_unrelated_predicates() {
        let m = find_countermodel(&[f("A(a)")], &f("B(a)"), 4).unwrap();
        assert_eq!(m.domain_size, 1);
        assert!(m.refutes(&[f("A(a)")], &f("B(a)")));
        assert_eq!(m.to_string(), "{domain {d0}, a=d0, A={d0}, B={}}");
    }

    #[test]
    fn no_countermodel_for_valid_entailment() {
        let ps = [f("∀x (A(x) → B(x))"), f("A(a)")];
        assert!(find_countermodel(&ps, &f("B(a)"), 4).is_none());
    }

    #[test]
    fn needs_two_elements() {
        // ∃x A(x) does not entail A(a): the witness must differ from a.
        let m = find_countermodel(&[f("∃x A(x)")], &f("A(a)"), 4).unwrap();
        assert_eq!(m.domain_size, 2);
    }

    #[test]
    fn fragment_classification() {
        assert_eq!(classify([f("A(a) ∧ B")].iter()), Fragment::Ground);
        assert_eq!(classify([f("∀x A(x)")].iter()), Fragment::Monadic);
        assert_eq!(classify([f("∀x R(x,a)")].iter()), Fragment::General);
        assert_eq!(domain_bound(&[f("∀x (A(x) → B(x))")]), Some(4));
        assert_eq!(domain_bound(&[f("∀x A(x)")]), Some(2));
        assert_eq!(domain_bound(&[f("A(a) ∧ B(b)")]), Some(2));
    }

    #[test]
    fn restricted_growth_counts() {
        // Bell-number style counts: 2 constants into size>=2 => 2 shapes.
        assert_eq!(constant_assignments(2, 3).len(), 2);
        assert_eq!(constant_assignments(3, 3).len(), 5);
        assert_eq!(constant_assignments(0, 2), vec![Vec::<usize>::new()]);
    }
}
