//! Per-step validity, relevance and atomicity, and their sample-level
//! aggregates.

pub mod judge;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::formula::ac_eq;
use crate::logic::rules::{find_atomic_instance, is_complement};
use crate::logic::{entails, parse_formula, Budget, EntailmentStatus, Formula};
use crate::proof::graph::{resolve, Resolution};
use crate::proof::{assumption_blocks, Block, Dialect, Node, ProofChain, ProofStep, StepKind};

pub use judge::{parse_judge_reply, render_judge_prompt, JudgeError, JudgeKind, RemoteJudge, StepJudge};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Unknown,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Pass
    }

    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeSource {
    Symbolic,
    Remote,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepVerdict {
    pub label: String,
    pub kind: StepKind,
    pub v: Verdict,
    pub r: Verdict,
    pub a: Verdict,
    pub source: JudgeSource,
    /// Premises actually used, including implicit ones.
    pub premises: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_rule_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainVerdict {
    pub problem_id: String,
    pub steps: Vec<StepVerdict>,
    pub all_valid: bool,
    pub all_relevant: bool,
    pub all_atomic: bool,
    /// Empty chains are left out of aggregates.
    pub excluded: bool,
    pub malformed: bool,
}

impl ChainVerdict {
    /// Derives the chain-level flags from step verdicts.
    pub fn from_steps(problem_id: String, steps: Vec<StepVerdict>, malformed: bool) -> ChainVerdict {
        let all = |f: fn(&StepVerdict) -> Verdict| !malformed && steps.iter().all(|s| f(s).holds());
        ChainVerdict {
            all_valid: all(|s| s.v),
            all_relevant: all(|s| s.r),
            all_atomic: all(|s| s.a),
            excluded: steps.is_empty() && !malformed,
            malformed,
            problem_id,
            steps,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FactEntry {
    pub sentence: Option<String>,
    pub formula: Option<Formula>,
}

/// Given facts of a problem keyed by `factN` label.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FactTable {
    pub entries: BTreeMap<String, FactEntry>,
}

impl FactTable {
    pub fn from_formulas(formulas: &[Formula]) -> FactTable {
        let entries = formulas
            .iter()
            .enumerate()
            .map(|(i, f)| {
                (
                    format!("fact{}", i + 1),
                    FactEntry {
                        sentence: None,
                        formula: Some(f.clone()),
                    },
                )
            })
            .collect();
        FactTable { entries }
    }

    pub fn from_sentences<S: AsRef<str>>(sentences: &[S]) -> FactTable {
        let entries = sentences
            .iter()
            .enumerate()
            .map(|(i, s)| {
                (
                    format!("fact{}", i + 1),
                    FactEntry {
                        sentence: Some(s.as_ref().to_string()),
                        formula: None,
                    },
                )
            })
            .collect();
        FactTable { entries }
    }

    /// Adds facts the chain declared in its own preamble (existing entries win).
    pub fn with_declared(mut self, chain: &ProofChain) -> FactTable {
        for (label, text) in &chain.facts {
            let e = self.entries.entry(label.clone()).or_default();
            if e.formula.is_none() {
                e.formula = parse_formula(text).ok();
            }
            if e.sentence.is_none() {
                e.sentence = Some(text.clone());
            }
        }
        self
    }

    pub fn get(&self, label: &str) -> Option<&FactEntry> {
        self.entries.get(label)
    }

    pub fn labelled_sentences(&self) -> Vec<(String, String)> {
        self.entries
            .iter()
            .filter_map(|(l, e)| e.sentence.clone().map(|s| (l.clone(), s)))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckerConfig {
    pub budget: Budget,
}

/// One premise as used by a step.
#[derive(Clone, Debug)]
struct Premise {
    node: Node,
    label: String,
}

struct Ctx<'a> {
    chain: &'a ProofChain,
    blocks: Vec<Block>,
    facts: &'a FactTable,
}

impl Ctx<'_> {
    fn steps(&self) -> &[ProofStep] {
        &self.chain.steps
    }

    fn resolve_all(&self, k: usize) -> Result<Vec<Premise>, String> {
        let mut out = Vec::new();
        for label in &self.steps()[k].premises {
            let node = match resolve(self.steps(), &self.blocks, k, label) {
                Resolution::Step(j) => Node::Step(j),
                Resolution::Fact(f) if self.facts.get(&f).is_some() => Node::Fact(f),
                Resolution::OutOfScope(j) => {
                    return Err(format!("{label} (step {}) is inside a discharged assumption", j + 1))
                }
                _ => return Err(format!("unresolved reference {label}")),
            };
            out.push(Premise {
                node,
                label: label.clone(),
            });
        }
        Ok(out)
    }

    /// Every node available at step `k`: given facts plus in-scope earlier steps.
    fn available(&self, k: usize) -> Vec<Premise> {
        let mut out: Vec<Premise> = self
            .facts
            .entries
            .keys()
            .map(|l| Premise {
                node: Node::Fact(l.clone()),
                label: l.clone(),
            })
            .collect();
        for (j, s) in self.steps()[..k].iter().enumerate() {
            if resolve(self.steps(), &self.blocks, k, &s.label) == Resolution::Step(j) {
                out.push(Premise {
                    node: Node::Step(j),
                    label: s.label.clone(),
                });
            }
        }
        out
    }

    fn formula(&self, p: &Premise) -> Option<&Formula> {
        match &p.node {
            Node::Step(j) => self.steps()[*j].formula.as_ref(),
            Node::Fact(f) => self.facts.get(f)?.formula.as_ref(),
            Node::Missing(_) => None,
        }
    }

    fn text(&self, p: &Premise) -> String {
        let body = match &p.node {
            Node::Step(j) => self.steps()[*j].conclusion.clone(),
            Node::Fact(f) => self
                .facts
                .get(f)
                .and_then(|e| e.sentence.clone().or_else(|| e.formula.as_ref().map(|x| x.to_string())))
                .unwrap_or_default(),
            Node::Missing(_) => String::new(),
        };
        format!("{}: {body}", p.label)
    }
}

struct StepEval {
    v: Verdict,
    a: Verdict,
    source: JudgeSource,
    premises: Vec<Premise>,
    min_rule_count: Option<usize>,
    note: Option<String>,
}

impl StepEval {
    fn fail(note: String, premises: Vec<Premise>, source: JudgeSource) -> StepEval {
        StepEval {
            v: Verdict::Fail,
            a: Verdict::Fail,
            source,
            premises,
            min_rule_count: None,
            note: Some(note),
        }
    }

    fn pass(premises: Vec<Premise>, source: JudgeSource) -> StepEval {
        StepEval {
            v: Verdict::Pass,
            a: Verdict::Pass,
            source,
            premises,
            min_rule_count: None,
            note: None,
        }
    }
}

/// For contradiction steps citing nothing: the first complementary pair
/// among the formulas available at step `k`.
fn implicit_contradiction(ctx: &Ctx, k: usize) -> Vec<Premise> {
    let avail = ctx.available(k);
    for (i, p) in avail.iter().enumerate() {
        for q in &avail[i + 1..] {
            if let (Some(f), Some(g)) = (ctx.formula(p), ctx.formula(q)) {
                if is_complement(f, g) {
                    return vec![p.clone(), q.clone()];
                }
            }
        }
    }
    Vec::new()
}

/// The assumption and the ⊥ step a reductio discharge relies on.
fn reductio_premises(ctx: &Ctx, k: usize) -> Result<(Premise, Premise), String> {
    let block = ctx
        .blocks
        .iter()
        .find(|b| b.discharge == k)
        .ok_or("no assumption block ends here")?;
    let steps = ctx.steps();
    let assumption = Premise {
        node: Node::Step(block.assumption),
        label: steps[block.assumption].label.clone(),
    };
    let inside_falsum = |j: usize| block.contains(j) && steps[j].is_falsum();
    let cited = ctx.resolve_all(k)?;
    let falsum = cited
        .iter()
        .find(|p| matches!(p.node, Node::Step(j) if inside_falsum(j)))
        .cloned()
        .or_else(|| {
            let cites_other = cited
                .iter()
                .any(|p| p.node != assumption.node);
            if cites_other {
                return None;
            }
            (block.assumption..k).rev().find(|&j| inside_falsum(j)).map(|j| Premise {
                node: Node::Step(j),
                label: steps[j].label.clone(),
            })
        })
        .ok_or("reductio does not rest on a contradiction inside its assumption")?;
    Ok((assumption, falsum))
}

fn discharges(assumed: &Formula, conclusion: &Formula) -> bool {
    if ac_eq(conclusion, &Formula::Not(Box::new(assumed.clone()))) {
        return true;
    }
    matches!(assumed, Formula::Not(inner) if ac_eq(conclusion, inner))
}

fn eval_symbolic(ctx: &Ctx, k: usize, cfg: &CheckerConfig) -> StepEval {
    let step = &ctx.steps()[k];
    let src = JudgeSource::Symbolic;
    let Some(conclusion) = step.formula.clone() else {
        return StepEval::fail("conclusion unavailable".into(), Vec::new(), src);
    };
    match step.kind {
        StepKind::Assumption => StepEval::pass(Vec::new(), src),
        StepKind::GivenFact => match ctx.facts.get(&step.label).and_then(|e| e.formula.as_ref()) {
            Some(f) if ac_eq(f, &conclusion) => StepEval::pass(Vec::new(), src),
            Some(_) => StepEval::fail(format!("restatement differs from {}", step.label), Vec::new(), src),
            None => StepEval::fail(format!("no given fact {}", step.label), Vec::new(), src),
        },
        StepKind::ReductioDischarge => match reductio_premises(ctx, k) {
            Ok((assumption, falsum)) => {
                let ok = ctx.formula(&assumption).is_some_and(|a| discharges(a, &conclusion));
                let mut e = StepEval::pass(vec![assumption, falsum], src);
                if !ok {
                    e.v = Verdict::Fail;
                    e.a = Verdict::Fail;
                    e.note = Some("conclusion is not the negation of the assumption".into());
                }
                e
            }
            Err(note) => StepEval::fail(note, Vec::new(), src),
        },
        StepKind::Derivation | StepKind::FinalConclusion | StepKind::Contradiction => {
            let mut premises = match ctx.resolve_all(k) {
                Ok(p) => p,
                Err(note) => return StepEval::fail(note, Vec::new(), src),
            };
            if step.kind == StepKind::Contradiction && premises.is_empty() {
                premises = implicit_contradiction(ctx, k);
            }
            let formulas: Option<Vec<Formula>> = premises.iter().map(|p| ctx.formula(p).cloned()).collect();
            let Some(formulas) = formulas else {
                return StepEval::fail("premise without a formula".into(), premises, src);
            };
            let verdict = match entails(&formulas, &conclusion, cfg.budget) {
                Ok(v) => v,
                Err(e) => return StepEval::fail(e.to_string(), premises, src),
            };
            let v = match verdict.status {
                EntailmentStatus::Valid => Verdict::Pass,
                EntailmentStatus::Invalid => Verdict::Fail,
                EntailmentStatus::Unknown => Verdict::Unknown,
            };
            let a = if find_atomic_instance(&formulas, &conclusion).is_some() {
                Verdict::Pass
            } else if v == Verdict::Unknown {
                Verdict::Unknown
            } else {
                Verdict::Fail
            };
            StepEval {
                v,
                a,
                source: src,
                premises,
                min_rule_count: verdict.min_rule_count,
                note: verdict.budget_exhausted.then(|| "search budget exhausted".to_string()),
            }
        }
    }
}

fn fold(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn eval_natural(ctx: &Ctx, k: usize, judge: Option<&dyn StepJudge>) -> StepEval {
    let step = &ctx.steps()[k];
    let Some(judge) = judge else {
        return StepEval {
            v: Verdict::Unknown,
            a: Verdict::Unknown,
            source: JudgeSource::Skipped,
            premises: ctx.resolve_all(k).unwrap_or_default(),
            min_rule_count: None,
            note: Some("no judge configured".into()),
        };
    };
    let src = JudgeSource::Remote;
    let premises = match step.kind {
        StepKind::Assumption => return StepEval::pass(Vec::new(), src),
        StepKind::GivenFact => {
            let same = ctx
                .facts
                .get(&step.label)
                .and_then(|e| e.sentence.as_ref())
                .is_some_and(|s| fold(s) == fold(&step.conclusion));
            let mut e = StepEval::pass(Vec::new(), src);
            if !same {
                e.v = Verdict::Fail;
                e.a = Verdict::Fail;
            }
            return e;
        }
        StepKind::ReductioDischarge => match reductio_premises(ctx, k) {
            Ok((a, f)) => vec![a, f],
            Err(note) => return StepEval::fail(note, Vec::new(), src),
        },
        _ => match ctx.resolve_all(k) {
            Ok(p) => p,
            Err(note) => return StepEval::fail(note, Vec::new(), src),
        },
    };
    let premises_str = premises.iter().map(|p| ctx.text(p)).collect::<Vec<_>>().join(" ");
    let concl = format!("{}: {}", step.label, step.conclusion);
    let ask = |kind| match judge.judge(kind, &premises_str, &concl) {
        Ok(b) => (Verdict::from_bool(b), None),
        Err(e) => (Verdict::Unknown, Some(e.to_string())),
    };
    let (v, note_v) = ask(JudgeKind::Validity);
    let (a, note_a) = ask(JudgeKind::Atomicity);
    StepEval {
        v,
        a,
        source: src,
        premises,
        min_rule_count: None,
        note: note_v.or(note_a),
    }
}

/// Relevance: cited by a later step, the terminal step, or inside an
/// assumption block whose discharge is relevant.
fn relevance(n: usize, used: &[Vec<Premise>], terminal: Option<usize>, blocks: &[Block]) -> Vec<bool> {
    let mut cited = vec![false; n];
    for ps in used {
        for p in ps {
            if let Node::Step(j) = p.node {
                cited[j] = true;
            }
        }
    }
    let mut rel = cited;
    if let Some(t) = terminal {
        rel[t] = true;
    }
    for j in (0..n).rev() {
        if blocks.iter().any(|b| b.contains(j) && rel[b.discharge]) {
            rel[j] = true;
        }
    }
    rel
}

pub fn evaluate_chain(
    chain: &ProofChain,
    facts: &FactTable,
    cfg: &CheckerConfig,
    judge: Option<&dyn StepJudge>,
) -> ChainVerdict {
    let blocks = assumption_blocks(&chain.steps).unwrap_or_default();
    let ctx = Ctx { chain, blocks, facts };
    let evals: Vec<StepEval> = (0..chain.steps.len())
        .map(|k| match chain.dialect {
            Dialect::Symbolic => eval_symbolic(&ctx, k, cfg),
            Dialect::Natural => eval_natural(&ctx, k, judge),
        })
        .collect();
    let used: Vec<Vec<Premise>> = evals.iter().map(|e| e.premises.clone()).collect();
    let rel = relevance(chain.steps.len(), &used, chain.terminal_step(), &ctx.blocks);
    let steps = chain
        .steps
        .iter()
        .zip(evals)
        .zip(rel)
        .map(|((s, e), r)| StepVerdict {
            label: s.label.clone(),
            kind: s.kind,
            v: e.v,
            r: if e.source == JudgeSource::Skipped {
                Verdict::Unknown
            } else {
                Verdict::from_bool(r)
            },
            a: e.a,
            source: e.source,
            premises: e.premises.iter().map(|p| p.label.clone()).collect(),
            min_rule_count: e.min_rule_count,
            note: e.note,
        })
        .collect();
    ChainVerdict::from_steps(chain.problem_id.clone(), steps, chain.malformed)
}

/// Evaluates chains on the current rayon pool, preserving order.
pub fn evaluate_all(
    items: &[(ProofChain, FactTable)],
    cfg: &CheckerConfig,
    judge: Option<&dyn StepJudge>,
) -> Vec<ChainVerdict> {
    items
        .par_iter()
        .map(|(c, f)| evaluate_chain(c, f, cfg, judge))
        .collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AggregateError {
    #[error("no chains left to aggregate after exclusions")]
    EmptyCohort,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub chains: usize,
    pub excluded: usize,
    pub all_valid: f64,
    pub all_relevant: f64,
    pub all_atomic: f64,
    /// Fraction of steps whose validity came back unknown.
    pub unknown_validity_rate: f64,
    pub unknown_atomicity_rate: f64,
}

pub fn aggregate(verdicts: &[ChainVerdict]) -> Result<Aggregate, AggregateError> {
    let kept: Vec<&ChainVerdict> = verdicts.iter().filter(|v| !v.excluded).collect();
    if kept.is_empty() {
        return Err(AggregateError::EmptyCohort);
    }
    let n = kept.len() as f64;
    let frac = |f: fn(&ChainVerdict) -> bool| kept.iter().filter(|v| f(v)).count() as f64 / n;
    let total_steps: usize = kept.iter().map(|v| v.steps.len()).sum();
    let unknown = |f: fn(&StepVerdict) -> Verdict| {
        if total_steps == 0 {
            return 0.0;
        }
        kept.iter()
            .flat_map(|v| &v.steps)
            .filter(|s| f(s) == Verdict::Unknown)
            .count() as f64
            / total_steps as f64
    };
    Ok(Aggregate {
        chains: kept.len(),
        excluded: verdicts.len() - kept.len(),
        all_valid: frac(|v| v.all_valid),
        all_relevant: frac(|v| v.all_relevant),
        all_atomic: frac(|v| v.all_atomic),
        unknown_validity_rate: unknown(|s| s.v),
        unknown_atomicity_rate: unknown(|s| s.a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_batch;
    use crate::proof::parse_proof;

    fn facts(fs: &[&str]) -> FactTable {
        FactTable::from_formulas(&parse_batch(fs).unwrap())
    }

    fn eval(text: &str, fs: &[&str]) -> ChainVerdict {
        let chain = parse_proof(text, Dialect::Symbolic);
        evaluate_chain(&chain, &facts(fs), &CheckerConfig::default(), None)
    }

    #[test]
    fn universal_modus_ponens_step_is_valid() {
        let v = eval(
            "Step 1: From fact1, fact2, we derive:\nhypothesis: B(a)",
            &["∀x (A(x) → B(x))", "A(a)"],
        );
        assert!(v.all_valid && v.all_atomic && v.all_relevant);
    }

    #[test]
    fn non_sequitur_is_invalid() {
        let v = eval("Step 1: From fact1, we derive:\nint1: C(a)", &["A(a)"]);
        assert_eq!(v.steps[0].v, Verdict::Fail);
    }

    #[test]
    fn fused_step_valid_but_not_atomic() {
        let v = eval(
            "Step 1: From fact1, fact2, fact3, we derive:\nint2: C(a)",
            &["∀x (A(x) → B(x))", "∀x (B(x) → C(x))", "A(a)"],
        );
        assert_eq!(v.steps[0].v, Verdict::Pass);
        assert_eq!(v.steps[0].min_rule_count, Some(2));
        assert_eq!(v.steps[0].a, Verdict::Fail);
    }

    #[test]
    fn unused_extra_premise_is_not_atomic() {
        let v = eval(
            "Step 1: From fact1, fact2, fact3, we derive:\nint1: B(a)",
            &["∀x (A(x) → B(x))", "A(a)", "C(b)"],
        );
        assert_eq!(v.steps[0].v, Verdict::Pass);
        assert_eq!(v.steps[0].a, Verdict::Fail);
    }

    #[test]
    fn redundant_rederivation_is_irrelevant() {
        let v = eval(
            "Step 1: From fact1, fact2, we derive:\nint1: B(a)\n\
             Step 2: From fact1, fact2, we derive:\nint2: B(a)\n\
             Step 3: From int1, fact3, we derive:\nhypothesis: C(a)",
            &["∀x (A(x) → B(x))", "A(a)", "∀x (B(x) → C(x))"],
        );
        let r: Vec<Verdict> = v.steps.iter().map(|s| s.r).collect();
        assert_eq!(r, vec![Verdict::Pass, Verdict::Fail, Verdict::Pass]);
        assert!(v.all_valid && !v.all_relevant);
    }

    #[test]
    fn reductio_chain() {
        let v = eval(
            "Step 1: Assume for contradiction:\nassump1: A(b)\n\
             Step 2: From fact1, assump1, we derive:\nint1: B(b)\n\
             Step 3: Contradiction from int1, fact2:\n⊥\n\
             Step 4: By reductio ad absurdum from step3, assump1:\nhypothesis: ¬A(b)",
            &["∀x (A(x) → B(x))", "¬B(b)"],
        );
        assert!(v.all_valid && v.all_relevant && v.all_atomic, "{v:#?}");
    }

    #[test]
    fn implicit_contradiction_premises() {
        let v = eval(
            "Step 1: Assume for contradiction:\nassump1: A(b)\n\
             Step 2: Contradiction:\n⊥\n\
             Step 3: By reductio ad absurdum:\nhypothesis: ¬A(b)",
            &["¬A(b)"],
        );
        assert!(v.all_valid && v.all_relevant && v.all_atomic, "{v:#?}");
        assert_eq!(v.steps[1].premises, vec!["fact1", "assump1"]);
    }

    #[test]
    fn unresolved_reference_fails() {
        let v = eval("Step 1: From fact9, we derive:\nint1: A(a)", &["A(a)"]);
        assert_eq!(v.steps[0].v, Verdict::Fail);
    }

    #[test]
    fn natural_without_judge_is_unknown() {
        let chain = parse_proof("Step 1: From fact1, we derive:\nint1: x is y.", Dialect::Natural);
        let v = evaluate_chain(&chain, &FactTable::from_sentences(&["x is z."]), &CheckerConfig::default(), None);
        assert_eq!(v.steps[0].source, JudgeSource::Skipped);
        assert_eq!((v.steps[0].v, v.steps[0].r, v.steps[0].a), (Verdict::Unknown, Verdict::Unknown, Verdict::Unknown));
        assert!(!v.all_valid);
    }

    struct Always(bool);
    impl StepJudge for Always {
        fn judge(&self, _: JudgeKind, _: &str, _: &str) -> Result<bool, JudgeError> {
            Ok(self.0)
        }
    }

    #[test]
    fn natural_with_judge() {
        let chain = parse_proof("Step 1: From fact1, we derive:\nhypothesis: x is y.", Dialect::Natural);
        let facts = FactTable::from_sentences(&["x is z."]);
        let v = evaluate_chain(&chain, &facts, &CheckerConfig::default(), Some(&Always(true)));
        assert!(v.all_valid && v.all_atomic && v.all_relevant);
        let v = evaluate_chain(&chain, &facts, &CheckerConfig::default(), Some(&Always(false)));
        assert!(!v.all_valid);
    }

    #[test]
    fn aggregate_examples() {
        let mk = |v: bool, r: bool, a: bool| ChainVerdict {
            problem_id: String::new(),
            steps: vec![],
            all_valid: v,
            all_relevant: r,
            all_atomic: a,
            excluded: false,
            malformed: false,
        };
        let agg = aggregate(&[mk(true, true, true), mk(false, true, false), mk(true, true, false)]).unwrap();
        assert!((agg.all_valid - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(agg.all_relevant, 1.0);
        assert!((agg.all_atomic - 1.0 / 3.0).abs() < 1e-15);
        let mut empty = mk(true, true, true);
        empty.excluded = true;
        assert_eq!(aggregate(&[empty]), Err(AggregateError::EmptyCohort));
    }

    #[test]
    fn malformed_chain_fails_everything() {
        let v = eval("Step 1: From fact1, we derive:\nint1: A(", &["A(a)"]);
        assert!(v.malformed && !v.all_valid && !v.all_relevant && !v.all_atomic && !v.excluded);
    }

    #[test]
    fn empty_chain_is_excluded() {
        let v = eval("", &[]);
        assert!(v.excluded && v.all_valid);
    }
}
