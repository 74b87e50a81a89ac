//! First-order formula AST, canonical printer and alpha-normalization.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

/// A term: either a named constant or a (bound) variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Const(String),
    Var(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Const(n) | Term::Var(n) => n,
        }
    }
}

/// First-order formula without equality or function symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    Atom { pred: String, args: Vec<Term> },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    ForAll(String, Box<Formula>),
    Exists(String, Box<Formula>),
    Falsum,
}

pub fn atom(pred: &str, consts: &[&str]) -> Formula {
    Formula::Atom {
        pred: pred.to_string(),
        args: consts.iter().map(|c| Term::Const(c.to_string())).collect(),
    }
}

pub fn prop(name: &str) -> Formula {
    atom(name, &[])
}

pub fn not(f: Formula) -> Formula {
    Formula::Not(Box::new(f))
}

pub fn and(a: Formula, b: Formula) -> Formula {
    Formula::And(Box::new(a), Box::new(b))
}

pub fn or(a: Formula, b: Formula) -> Formula {
    Formula::Or(Box::new(a), Box::new(b))
}

pub fn implies(a: Formula, b: Formula) -> Formula {
    Formula::Implies(Box::new(a), Box::new(b))
}

pub fn forall(var: &str, body: Formula) -> Formula {
    Formula::ForAll(var.to_string(), Box::new(body))
}

pub fn exists(var: &str, body: Formula) -> Formula {
    Formula::Exists(var.to_string(), Box::new(body))
}

/// Unary atom applied to a variable, for building quantified bodies.
pub fn var_atom(pred: &str, var: &str) -> Formula {
    Formula::Atom {
        pred: pred.to_string(),
        args: vec![Term::Var(var.to_string())],
    }
}

impl Formula {
    pub fn negate(&self) -> Formula {
        not(self.clone())
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom { .. } | Formula::Falsum => 1,
            Formula::Not(f) | Formula::ForAll(_, f) | Formula::Exists(_, f) => 1 + f.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Atom { .. })
    }

    /// Names of variables occurring free.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Atom { args, .. } => {
                    for t in args {
                        if let Term::Var(v) = t {
                            if !bound.contains(v) {
                                out.insert(v.clone());
                            }
                        }
                    }
                }
                Formula::Falsum => {}
                Formula::Not(g) => go(g, bound, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::ForAll(v, g) | Formula::Exists(v, g) => {
                    bound.push(v.clone());
                    go(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |_, args| {
            for t in args {
                if let Term::Const(c) = t {
                    out.insert(c.clone());
                }
            }
        });
        out
    }

    /// Predicate name to arity. The last occurrence wins when arities clash;
    /// use [`collect_arities`] to detect clashes.
    pub fn predicates(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        self.visit_atoms(&mut |p, args| {
            out.insert(p.to_string(), args.len());
        });
        out
    }

    pub fn visit_atoms(&self, f: &mut impl FnMut(&str, &[Term])) {
        match self {
            Formula::Atom { pred, args } => f(pred, args),
            Formula::Falsum => {}
            Formula::Not(g) | Formula::ForAll(_, g) | Formula::Exists(_, g) => g.visit_atoms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::Atom { .. } | Formula::Falsum => false,
            Formula::ForAll(..) | Formula::Exists(..) => true,
            Formula::Not(g) => g.has_quantifier(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.has_quantifier() || b.has_quantifier()
            }
        }
    }

    /// Replace free occurrences of `var` with `term`.
    pub fn substitute(&self, var: &str, term: &Term) -> Formula {
        match self {
            Formula::Atom { pred, args } => Formula::Atom {
                pred: pred.clone(),
                args: args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) if v == var => term.clone(),
                        other => other.clone(),
                    })
                    .collect(),
            },
            Formula::Falsum => Formula::Falsum,
            Formula::Not(g) => not(g.substitute(var, term)),
            Formula::And(a, b) => and(a.substitute(var, term), b.substitute(var, term)),
            Formula::Or(a, b) => or(a.substitute(var, term), b.substitute(var, term)),
            Formula::Implies(a, b) => implies(a.substitute(var, term), b.substitute(var, term)),
            Formula::ForAll(v, _) | Formula::Exists(v, _) if v == var => self.clone(),
            Formula::ForAll(v, g) => forall(v, g.substitute(var, term)),
            Formula::Exists(v, g) => exists(v, g.substitute(var, term)),
        }
    }

    /// Apply a variable-to-constant substitution to free occurrences.
    pub fn instantiate(&self, subst: &BTreeMap<String, String>) -> Formula {
        subst.iter().fold(self.clone(), |acc, (v, c)| {
            acc.substitute(v, &Term::Const(c.clone()))
        })
    }
}

/// Collects predicate arities across a batch of formulas, reporting the
/// first predicate used with two different arities.
pub fn collect_arities<'a>(
    formulas: impl IntoIterator<Item = &'a Formula>,
) -> Result<BTreeMap<String, usize>, (String, usize, usize)> {
    let mut out: BTreeMap<String, usize> = BTreeMap::new();
    let mut clash = None;
    for f in formulas {
        f.visit_atoms(&mut |p, args| {
            if clash.is_some() {
                return;
            }
            match out.get(p) {
                Some(&n) if n != args.len() => clash = Some((p.to_string(), n, args.len())),
                Some(_) => {}
                None => {
                    out.insert(p.to_string(), args.len());
                }
            }
        });
    }
    match clash {
        Some(c) => Err(c),
        None => Ok(out),
    }
}

/// Renames bound variables to `x1, x2, ...` in order of first binder
/// occurrence (pre-order). Idempotent.
pub fn normalize(f: &Formula) -> Formula {
    fn go(f: &Formula, scope: &mut Vec<(String, String)>, counter: &mut usize) -> Formula {
        match f {
            Formula::Atom { pred, args } => Formula::Atom {
                pred: pred.clone(),
                args: args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => match scope.iter().rev().find(|(old, _)| old == v) {
                            Some((_, new)) => Term::Var(new.clone()),
                            None => Term::Var(v.clone()),
                        },
                        c => c.clone(),
                    })
                    .collect(),
            },
            Formula::Falsum => Formula::Falsum,
            Formula::Not(g) => not(go(g, scope, counter)),
            Formula::And(a, b) => {
                let a = go(a, scope, counter);
                and(a, go(b, scope, counter))
            }
            Formula::Or(a, b) => {
                let a = go(a, scope, counter);
                or(a, go(b, scope, counter))
            }
            Formula::Implies(a, b) => {
                let a = go(a, scope, counter);
                implies(a, go(b, scope, counter))
            }
            Formula::ForAll(v, g) | Formula::Exists(v, g) => {
                *counter += 1;
                let fresh = format!("x{counter}");
                scope.push((v.clone(), fresh.clone()));
                let body = go(g, scope, counter);
                scope.pop();
                if matches!(f, Formula::ForAll(..)) {
                    Formula::ForAll(fresh, Box::new(body))
                } else {
                    Formula::Exists(fresh, Box::new(body))
                }
            }
        }
    }
    go(f, &mut Vec::new(), &mut 0)
}

/// Structural equality modulo bound-variable names.
pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    normalize(a) == normalize(b)
}

/// Equality modulo alpha-renaming and commutativity of ∧ / ∨.
///
/// Only used inside rule matching; formula identity elsewhere stays structural.
pub fn ac_eq(a: &Formula, b: &Formula) -> bool {
    fn go(a: &Formula, b: &Formula, env: &mut Vec<(String, String)>) -> bool {
        match (a, b) {
            (Formula::Falsum, Formula::Falsum) => true,
            (Formula::Atom { pred: p, args: x }, Formula::Atom { pred: q, args: y }) => {
                p == q
                    && x.len() == y.len()
                    && x.iter().zip(y).all(|(s, t)| match (s, t) {
                        (Term::Const(c), Term::Const(d)) => c == d,
                        (Term::Var(u), Term::Var(w)) => {
                            match env.iter().rev().find(|(l, r)| l == u || r == w) {
                                Some((l, r)) => l == u && r == w,
                                None => u == w,
                            }
                        }
                        _ => false,
                    })
            }
            (Formula::Not(x), Formula::Not(y)) => go(x, y, env),
            (Formula::Implies(a1, b1), Formula::Implies(a2, b2)) => go(a1, a2, env) && go(b1, b2, env),
            (Formula::And(a1, b1), Formula::And(a2, b2)) | (Formula::Or(a1, b1), Formula::Or(a2, b2)) => {
                (go(a1, a2, env) && go(b1, b2, env)) || (go(a1, b2, env) && go(b1, a2, env))
            }
            (Formula::ForAll(u, x), Formula::ForAll(w, y)) | (Formula::Exists(u, x), Formula::Exists(w, y)) => {
                env.push((u.clone(), w.clone()));
                let r = go(x, y, env);
                env.pop();
                r
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

// Printing levels, loosest to tightest.
const IMPLICATION: u8 = 0;
const DISJUNCTION: u8 = 1;
const CONJUNCTION: u8 = 2;
const UNARY: u8 = 3;

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) => IMPLICATION,
        Formula::Or(..) => DISJUNCTION,
        Formula::And(..) => CONJUNCTION,
        _ => UNARY,
    }
}

/// True when the printed form ends in an unparenthesized quantifier scope,
/// which would swallow any operator printed after it.
fn ends_open(f: &Formula) -> bool {
    match f {
        Formula::ForAll(..) | Formula::Exists(..) => true,
        Formula::Not(g) => ends_open(g),
        _ => false,
    }
}

fn write_term_list(out: &mut String, args: &[Term]) {
    if args.is_empty() {
        return;
    }
    out.push('(');
    for (i, t) in args.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(t.name());
    }
    out.push(')');
}

/// Writes `f` at least as tight as `min_level`; `trailing` is set when more
/// text follows at the same nesting depth.
fn write_formula(out: &mut String, f: &Formula, min_level: u8, trailing: bool) {
    let needs_parens = level(f) < min_level || (trailing && ends_open(f));
    if needs_parens {
        out.push('(');
        write_formula(out, f, IMPLICATION, false);
        out.push(')');
        return;
    }
    match f {
        Formula::Atom { pred, args } => {
            out.push_str(pred);
            write_term_list(out, args);
        }
        Formula::Falsum => out.push('⊥'),
        Formula::Not(g) => {
            out.push('¬');
            write_formula(out, g, UNARY, trailing);
        }
        Formula::And(a, b) => {
            write_formula(out, a, CONJUNCTION, true);
            out.push_str(" ∧ ");
            write_formula(out, b, UNARY, trailing);
        }
        Formula::Or(a, b) => {
            write_formula(out, a, DISJUNCTION, true);
            out.push_str(" ∨ ");
            write_formula(out, b, CONJUNCTION, trailing);
        }
        Formula::Implies(a, b) => {
            write_formula(out, a, DISJUNCTION, true);
            out.push_str(" → ");
            write_formula(out, b, IMPLICATION, trailing);
        }
        Formula::ForAll(v, g) | Formula::Exists(v, g) => {
            out.push(if matches!(f, Formula::ForAll(..)) { '∀' } else { '∃' });
            out.push_str(v);
            out.push(' ');
            if level(g) < UNARY {
                out.push('(');
                write_formula(out, g, IMPLICATION, false);
                out.push(')');
            } else {
                write_formula(out, g, UNARY, false);
            }
        }
    }
}

/// Canonical unicode rendering.
pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f, IMPLICATION, false);
    out
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

/// Variable-to-constant bindings produced while matching quantified schemas.
pub type Substitution = BTreeMap<String, String>;

/// One-sided matcher: binds the listed pattern variables to constants so that
/// `pattern` instantiated equals `target` modulo ∧/∨ commutativity.
pub fn match_instance(
    pattern: &Formula,
    target: &Formula,
    vars: &[String],
    subst: &mut Substitution,
) -> bool {
    fn go(
        p: &Formula,
        t: &Formula,
        vars: &[String],
        subst: &mut Substitution,
        env: &mut Vec<(String, String)>,
    ) -> bool {
        match (p, t) {
            (Formula::Falsum, Formula::Falsum) => true,
            (Formula::Atom { pred: p1, args: a1 }, Formula::Atom { pred: p2, args: a2 }) => {
                if p1 != p2 || a1.len() != a2.len() {
                    return false;
                }
                for (s, u) in a1.iter().zip(a2) {
                    let ok = match (s, u) {
                        (Term::Var(v), _) if env.iter().any(|(l, _)| l == v) => {
                            let (_, r) = env.iter().rev().find(|(l, _)| l == v).unwrap();
                            matches!(u, Term::Var(w) if w == r)
                        }
                        (Term::Var(v), Term::Const(c)) if vars.contains(v) => match subst.get(v) {
                            Some(bound) => bound == c,
                            None => {
                                subst.insert(v.clone(), c.clone());
                                true
                            }
                        },
                        (Term::Const(c), Term::Const(d)) => c == d,
                        (Term::Var(v), Term::Var(w)) => {
                            !vars.contains(v) && v == w && !env.iter().any(|(_, r)| r == w)
                        }
                        _ => false,
                    };
                    if !ok {
                        return false;
                    }
                }
                true
            }
            (Formula::Not(x), Formula::Not(y)) => go(x, y, vars, subst, env),
            (Formula::Implies(a1, b1), Formula::Implies(a2, b2)) => {
                go(a1, a2, vars, subst, env) && go(b1, b2, vars, subst, env)
            }
            (Formula::And(a1, b1), Formula::And(a2, b2)) | (Formula::Or(a1, b1), Formula::Or(a2, b2)) => {
                let saved = subst.clone();
                if go(a1, a2, vars, subst, env) && go(b1, b2, vars, subst, env) {
                    return true;
                }
                *subst = saved.clone();
                if go(a1, b2, vars, subst, env) && go(b1, a2, vars, subst, env) {
                    return true;
                }
                *subst = saved;
                false
            }
            (Formula::ForAll(u, x), Formula::ForAll(w, y)) | (Formula::Exists(u, x), Formula::Exists(w, y)) => {
                env.push((u.clone(), w.clone()));
                let r = go(x, y, vars, subst, env);
                env.pop();
                r
            }
            _ => false,
        }
    }
    go(pattern, target, vars, subst, &mut Vec::new())
}

/// Strips a prefix of universal quantifiers, returning the variables and body.
pub fn universal_prefix(f: &Formula) -> (Vec<String>, &Formula) {
    let mut vars = Vec::new();
    let mut cur = f;
    while let Formula::ForAll(v, body) = cur {
        vars.push(v.clone());
        cur = body;
    }
    (vars, cur)
}

/// Renames every bound variable apart so that distinct binders never share a
/// name; used before schema matching.
pub fn rename_apart(f: &Formula, prefix: &str) -> Formula {
    let mut counter = 0usize;
    fn go(f: &Formula, prefix: &str, counter: &mut usize, scope: &mut HashMap<String, Vec<String>>) -> Formula {
        match f {
            Formula::Atom { pred, args } => Formula::Atom {
                pred: pred.clone(),
                args: args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => Term::Var(
                            scope.get(v).and_then(|s| s.last()).cloned().unwrap_or_else(|| v.clone()),
                        ),
                        c => c.clone(),
                    })
                    .collect(),
            },
            Formula::Falsum => Formula::Falsum,
            Formula::Not(g) => not(go(g, prefix, counter, scope)),
            Formula::And(a, b) => and(go(a, prefix, counter, scope), go(b, prefix, counter, scope)),
            Formula::Or(a, b) => or(go(a, prefix, counter, scope), go(b, prefix, counter, scope)),
            Formula::Implies(a, b) => implies(go(a, prefix, counter, scope), go(b, prefix, counter, scope)),
            Formula::ForAll(v, g) | Formula::Exists(v, g) => {
                *counter += 1;
                let fresh = format!("{prefix}{counter}");
                scope.entry(v.clone()).or_default().push(fresh.clone());
                let body = go(g, prefix, counter, scope);
                scope.get_mut(v).unwrap().pop();
                if matches!(f, Formula::ForAll(..)) {
                    Formula::ForAll(fresh, Box::new(body))
                } else {
                    Formula::Exists(fresh, Box::new(body))
                }
            }
        }
    }
    go(f, prefix, &mut counter, &mut HashMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_canonical_forms() {
        assert_eq!(print_formula(&atom("A", &["a"])), "A(a)");
        assert_eq!(print_formula(&not(Formula::Falsum)), "¬⊥");
        let f = forall("x", implies(var_atom("A", "x"), var_atom("B", "x")));
        assert_eq!(print_formula(&f), "∀x (A(x) → B(x))");
        let g = implies(not(prop("C")), not(and(prop("F"), not(prop("E")))));
        assert_eq!(print_formula(&g), "¬C → ¬(F ∧ ¬E)");
    }

    #[test]
    fn quantifier_followed_by_operator_is_wrapped() {
        let f = and(forall("x", var_atom("A", "x")), prop("B"));
        assert_eq!(print_formula(&f), "(∀x A(x)) ∧ B");
        let g = and(prop("B"), forall("x", var_atom("A", "x")));
        assert_eq!(print_formula(&g), "B ∧ ∀x A(x)");
    }

    #[test]
    fn associativity_parens() {
        let left = implies(implies(prop("A"), prop("B")), prop("C"));
        assert_eq!(print_formula(&left), "(A → B) → C");
        let right = implies(prop("A"), implies(prop("B"), prop("C")));
        assert_eq!(print_formula(&right), "A → B → C");
        let conj = and(prop("A"), and(prop("B"), prop("C")));
        assert_eq!(print_formula(&conj), "A ∧ (B ∧ C)");
    }

    #[test]
    fn normalize_examples() {
        let f = forall("y", var_atom("A", "y"));
        assert_eq!(normalize(&f), forall("x1", var_atom("A", "x1")));
        let g = forall("x", var_atom("A", "x"));
        assert_eq!(normalize(&g), forall("x1", var_atom("A", "x1")));
        let r = |a: &str, b: &str| Formula::Atom {
            pred: "R".into(),
            args: vec![Term::Var(a.into()), Term::Var(b.into())],
        };
        let h = exists("z", forall("y", r("z", "y")));
        assert_eq!(normalize(&h), exists("x1", forall("x2", r("x1", "x2"))));
    }

    #[test]
    fn normalize_handles_shadowing() {
        let f = forall("x", and(var_atom("A", "x"), forall("x", var_atom("B", "x"))));
        let n = normalize(&f);
        assert_eq!(
            n,
            forall("x1", and(var_atom("A", "x1"), forall("x2", var_atom("B", "x2"))))
        );
        assert_eq!(normalize(&n), n);
    }

    #[test]
    fn ac_eq_ignores_operand_order() {
        let a = and(prop("A"), or(prop("B"), prop("C")));
        let b = and(or(prop("C"), prop("B")), prop("A"));
        assert!(ac_eq(&a, &b));
        assert_ne!(a, b);
        assert!(!ac_eq(&a, &implies(prop("A"), prop("B"))));
    }

    #[test]
    fn matcher_binds_constants() {
        let pat = and(var_atom("A", "x"), var_atom("B", "x"));
        let target = and(atom("B", &["a"]), atom("A", &["a"]));
        let mut s = Substitution::new();
        assert!(match_instance(&pat, &target, &["x".to_string()], &mut s));
        assert_eq!(s.get("x").map(String::as_str), Some("a"));
        let bad = and(atom("B", &["b"]), atom("A", &["a"]));
        let mut s = Substitution::new();
        assert!(!match_instance(&pat, &bad, &["x".to_string()], &mut s));
    }

    #[test]
    fn arity_clash_detected() {
        let fs = [atom("A", &["a"]), atom("A", &["a", "b"])];
        assert_eq!(collect_arities(fs.iter()), Err(("A".to_string(), 1, 2)));
    }
}
