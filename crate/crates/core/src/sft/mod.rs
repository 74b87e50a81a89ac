//! Supervised fine-tuning corpora in four supervision styles, generated from
//! gold symbolic proofs.

pub mod nl;
pub mod synth;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::prompts::HEAD;
use crate::bench::{DatasetKind, Label, Problem};
use crate::logic::{parse_formula, print_formula, Formula, Term};
use crate::probing::seeded_hash;
use crate::proof::{dependency_graph, parse_proof, render_step, Answer, Dialect, Node, ProofChain, ProofStep, StepKind};
use crate::steps::{evaluate_chain, ChainVerdict, CheckerConfig, FactTable};

pub const EXHAUSTED: &str =
    "The search path has been exhausted without finding a way to either prove or disprove the hypothesis.";
pub const STRUCT_PREAMBLE: &str = "Our problem-solving procedure begins by formalizing all given facts and the hypothesis into first-order logic using standardized predicate definitions.";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SftError {
    #[error("symbol {0} has no glossary reading")]
    GlossaryGap(String),
    #[error("problem {0} has no usable gold proof")]
    MissingGoldProof(String),
    #[error("problem {id}: formula does not parse: {formula}")]
    BadFormula { id: String, formula: String },
    #[error("bucket {bucket}: {have} gold problems, manifest needs {need}")]
    ManifestShortfall { bucket: String, have: usize, need: usize },
}

/// Natural-language readings of the symbols in a problem. Unary predicates
/// map to a verb phrase ("is a raised", read as "x is a raised"); nullary
/// ones map to a full clause.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Glossary {
    pub predicates: BTreeMap<String, String>,
    pub constants: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldProblem {
    pub problem: Problem,
    pub glossary: Glossary,
}

impl GoldProblem {
    pub fn chain(&self) -> Result<&ProofChain, SftError> {
        self.problem
            .gold_proof
            .as_ref()
            .filter(|c| !c.malformed)
            .ok_or_else(|| SftError::MissingGoldProof(self.problem.id.clone()))
    }

    pub fn fact_formulas(&self) -> Result<Vec<Formula>, SftError> {
        let ff = self
            .problem
            .facts_formula
            .as_ref()
            .ok_or_else(|| SftError::MissingGoldProof(self.problem.id.clone()))?;
        ff.iter().map(|s| self.parse(s)).collect()
    }

    pub fn hypothesis_formula(&self) -> Result<Formula, SftError> {
        let h = self
            .problem
            .hypothesis_formula
            .as_ref()
            .ok_or_else(|| SftError::MissingGoldProof(self.problem.id.clone()))?;
        self.parse(h)
    }

    fn parse(&self, s: &str) -> Result<Formula, SftError> {
        parse_formula(s).map_err(|_| SftError::BadFormula {
            id: self.problem.id.clone(),
            formula: s.to_string(),
        })
    }

    /// Every predicate and constant used anywhere must have a reading.
    pub fn check_glossary(&self) -> Result<(), SftError> {
        let mut fs = self.fact_formulas()?;
        fs.push(self.hypothesis_formula()?);
        fs.extend(self.chain()?.steps.iter().filter_map(|s| s.formula.clone()));
        for f in &fs {
            let mut gap = None;
            f.visit_atoms(&mut |pred, args| {
                if gap.is_some() {
                    return;
                }
                if !self.glossary.predicates.contains_key(pred) {
                    gap = Some(pred.to_string());
                }
                for a in args {
                    if let Term::Const(c) = a {
                        if !self.glossary.constants.contains_key(c) {
                            gap = Some(c.clone());
                        }
                    }
                }
            });
            if let Some(g) = gap {
                return Err(SftError::GlossaryGap(g));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SftStyle {
    #[serde(rename = "NL")]
    Nl,
    SymbStruct,
    SymbFilter,
    SymbDirect,
}

impl SftStyle {
    pub const ALL: [SftStyle; 4] = [SftStyle::Nl, SftStyle::SymbStruct, SftStyle::SymbFilter, SftStyle::SymbDirect];

    pub fn name(self) -> &'static str {
        match self {
            SftStyle::Nl => "NL",
            SftStyle::SymbStruct => "SymbStruct",
            SftStyle::SymbFilter => "SymbFilter",
            SftStyle::SymbDirect => "SymbDirect",
        }
    }

    pub fn is_symbolic(self) -> bool {
        self != SftStyle::Nl
    }
}

impl std::str::FromStr for SftStyle {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        SftStyle::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown style `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftSample {
    pub style: SftStyle,
    pub prompt: String,
    pub target: String,
    pub depth: Option<u32>,
    pub source_id: String,
}

/// Given-fact labels in the dependency closure of the concluding step.
pub fn necessary_facts(gold: &GoldProblem) -> Result<BTreeSet<String>, SftError> {
    let chain = gold.chain()?;
    let Some(t) = chain.terminal_step() else {
        return Ok(BTreeSet::new());
    };
    let g = dependency_graph(chain).map_err(|_| SftError::MissingGoldProof(gold.problem.id.clone()))?;
    let n = gold.problem.facts.len();
    Ok(g.fact_closure(t)
        .into_iter()
        .filter(|f| f.strip_prefix("fact").and_then(|k| k.parse::<usize>().ok()).is_some_and(|k| k >= 1 && k <= n))
        .collect())
}

/// Steps in the dependency closure of the concluding step, in order.
pub fn relevant_steps(chain: &ProofChain) -> Vec<usize> {
    let Some(t) = chain.terminal_step() else {
        return Vec::new();
    };
    let Ok(g) = dependency_graph(chain) else {
        return (0..chain.len()).collect();
    };
    let keep: BTreeSet<usize> = g
        .closure(t)
        .into_iter()
        .filter_map(|n| match n {
            Node::Step(i) => Some(i),
            _ => None,
        })
        .collect();
    keep.into_iter().collect()
}

/// Re-numbers a subsequence of steps, renaming positional `step<k>` labels
/// and the references to them.
fn renumber(steps: &[ProofStep], keep: &[usize]) -> Vec<ProofStep> {
    let rename: BTreeMap<String, String> = keep
        .iter()
        .enumerate()
        .filter(|(_, &i)| steps[i].label.starts_with("step"))
        .map(|(k, &i)| (steps[i].label.clone(), format!("step{}", k + 1)))
        .collect();
    keep.iter()
        .enumerate()
        .map(|(k, &i)| {
            let mut s = steps[i].clone();
            s.ordinal = k + 1;
            if let Some(l) = rename.get(&s.label) {
                s.label = l.clone();
            }
            for p in &mut s.premises {
                if let Some(l) = rename.get(p) {
                    *p = l.clone();
                }
            }
            s
        })
        .collect()
}

fn answer_of(p: &Problem) -> Answer {
    p.label.answer()
}

fn ending(p: &Problem) -> String {
    let a = answer_of(p);
    if a == Answer::Unknown {
        format!("{EXHAUSTED}\nFinal conclusion: {}", a.marker())
    } else {
        format!("Final conclusion: {}", a.marker())
    }
}

fn steps_block(steps: &[ProofStep]) -> String {
    steps.iter().map(render_step).collect::<Vec<_>>().join("\n")
}

fn prompt(facts: &[(String, String)], hypothesis: &str) -> String {
    let fs = facts.iter().map(|(l, s)| format!("{l}: {s}")).collect::<Vec<_>>().join(" ");
    format!("{HEAD}\nFacts:{fs}\nHypothesis:{hypothesis}")
}

fn nl_facts(p: &Problem, keep: Option<&BTreeSet<String>>) -> Vec<(String, String)> {
    p.facts
        .iter()
        .enumerate()
        .map(|(i, s)| (format!("fact{}", i + 1), s.clone()))
        .filter(|(l, _)| keep.is_none_or(|k| k.contains(l)))
        .collect()
}

fn symbols_in(fs: &[&Formula]) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut preds = BTreeSet::new();
    let mut consts = BTreeSet::new();
    for f in fs {
        f.visit_atoms(&mut |p, args| {
            preds.insert(p.to_string());
            for a in args {
                if let Term::Const(c) = a {
                    consts.insert(c.clone());
                }
            }
        });
    }
    (preds, consts)
}

fn structured_target(gold: &GoldProblem, keep_facts: Option<&BTreeSet<String>>, steps: &[ProofStep]) -> Result<String, SftError> {
    let facts = gold.fact_formulas()?;
    let hyp = gold.hypothesis_formula()?;
    let shown: Vec<(String, &Formula)> = facts
        .iter()
        .enumerate()
        .map(|(i, f)| (format!("fact{}", i + 1), f))
        .filter(|(l, _)| keep_facts.is_none_or(|k| k.contains(l)))
        .collect();
    let mut all: Vec<&Formula> = shown.iter().map(|(_, f)| *f).collect();
    all.push(&hyp);
    all.extend(steps.iter().filter_map(|s| s.formula.as_ref()));
    let (preds, consts) = symbols_in(&all);
    let arity = {
        let mut m = BTreeMap::new();
        for f in &all {
            m.extend(f.predicates());
        }
        m
    };
    let mut out = vec![STRUCT_PREAMBLE.to_string()];
    if !consts.is_empty() {
        out.push("We define the entities involved:".into());
        for c in &consts {
            let r = gold.glossary.constants.get(c).ok_or_else(|| SftError::GlossaryGap(c.clone()))?;
            out.push(format!("- {c}: {r}"));
        }
    }
    out.push("For the predicate, we denote:".into());
    for p in &preds {
        let r = gold.glossary.predicates.get(p).ok_or_else(|| SftError::GlossaryGap(p.clone()))?;
        if arity.get(p).copied().unwrap_or(0) == 0 {
            out.push(format!("{p}: {r}"));
        } else {
            out.push(format!("{p}(x): x {r}"));
        }
    }
    out.push("Facts:".into());
    for (l, f) in &shown {
        out.push(format!("{l}: {}", print_formula(f)));
    }
    out.push(format!("Hypothesis: {}", print_formula(&hyp)));
    if !steps.is_empty() {
        out.push(steps_block(steps));
    }
    out.push(ending(&gold.problem));
    Ok(out.join("\n"))
}

pub fn gen_symb_struct(gold: &GoldProblem) -> Result<SftSample, SftError> {
    let chain = gold.chain()?;
    gold.check_glossary()?;
    Ok(SftSample {
        style: SftStyle::SymbStruct,
        prompt: prompt(&nl_facts(&gold.problem, None), &gold.problem.hypothesis),
        target: structured_target(gold, None, &chain.steps)?,
        depth: gold.problem.depth,
        source_id: gold.problem.id.clone(),
    })
}

pub fn gen_symb_filter(gold: &GoldProblem) -> Result<SftSample, SftError> {
    let chain = gold.chain()?;
    gold.check_glossary()?;
    let keep = necessary_facts(gold)?;
    let steps = renumber(&chain.steps, &relevant_steps(chain));
    Ok(SftSample {
        style: SftStyle::SymbFilter,
        prompt: prompt(&nl_facts(&gold.problem, Some(&keep)), &gold.problem.hypothesis),
        target: structured_target(gold, Some(&keep), &steps)?,
        depth: gold.problem.depth,
        source_id: gold.problem.id.clone(),
    })
}

pub fn gen_symb_direct(gold: &GoldProblem) -> Result<SftSample, SftError> {
    let chain = gold.chain()?;
    let facts: Vec<(String, String)> = gold
        .fact_formulas()?
        .iter()
        .enumerate()
        .map(|(i, f)| (format!("fact{}", i + 1), print_formula(f)))
        .collect();
    let hyp = print_formula(&gold.hypothesis_formula()?);
    let mut target = steps_block(&chain.steps);
    if !target.is_empty() {
        target.push('\n');
    }
    target.push_str(&ending(&gold.problem));
    Ok(SftSample {
        style: SftStyle::SymbDirect,
        prompt: prompt(&facts, &hyp),
        target,
        depth: gold.problem.depth,
        source_id: gold.problem.id.clone(),
    })
}

pub fn gen_nl(gold: &GoldProblem) -> Result<SftSample, SftError> {
    let chain = gold.chain()?;
    gold.check_glossary()?;
    let facts = gold.fact_formulas()?;
    let g = &gold.glossary;
    let formula_of = |label: &str| -> Option<Formula> {
        if let Some(i) = label.strip_prefix("fact").and_then(|k| k.parse::<usize>().ok()) {
            return facts.get(i.wrapping_sub(1)).cloned();
        }
        chain.steps.iter().find(|s| s.label == label).and_then(|s| s.formula.clone())
    };
    let mut lines = Vec::with_capacity(chain.len() + 2);
    for (k, s) in chain.steps.iter().enumerate() {
        let concl = s.formula.clone().unwrap_or(Formula::Falsum);
        let prem: Vec<Formula> = s.premises.iter().filter_map(|p| formula_of(p)).collect();
        let text = match s.kind {
            StepKind::Assumption => nl::assumption_sentence(g, &concl)?,
            StepKind::ReductioDischarge => {
                let assumption = s
                    .premises
                    .iter()
                    .find(|p| p.starts_with("assump"))
                    .and_then(|p| formula_of(p))
                    .unwrap_or_else(|| concl.negate());
                nl::reductio_sentence(g, &assumption, &concl)?
            }
            StepKind::Contradiction if prem.len() == 2 => format!(
                "{} and {} cannot both hold, which is a contradiction",
                g.render(&prem[0])?,
                g.render(&prem[1])?
            ),
            _ => nl::derivation_sentence(g, &prem, &concl)?,
        };
        lines.push(format!("Step {}: {}", k + 1, nl::sentence(&text)));
    }
    lines.push(ending(&gold.problem));
    Ok(SftSample {
        style: SftStyle::Nl,
        prompt: prompt(&nl_facts(&gold.problem, None), &gold.problem.hypothesis),
        target: lines.join("\n"),
        depth: gold.problem.depth,
        source_id: gold.problem.id.clone(),
    })
}

pub fn generate(gold: &GoldProblem, style: SftStyle) -> Result<SftSample, SftError> {
    match style {
        SftStyle::Nl => gen_nl(gold),
        SftStyle::SymbStruct => gen_symb_struct(gold),
        SftStyle::SymbFilter => gen_symb_filter(gold),
        SftStyle::SymbDirect => gen_symb_direct(gold),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    Depth(u32),
    Unknown,
}

impl std::fmt::Display for Bucket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bucket::Depth(d) => write!(f, "depth {d}"),
            Bucket::Unknown => f.write_str("UNKNOWN"),
        }
    }
}

/// Problems with label UNKNOWN fill the UNKNOWN bucket; the others fill the
/// bucket of their depth.
pub fn bucket_of(p: &Problem) -> Option<Bucket> {
    match p.label {
        Label::Unknown => Some(Bucket::Unknown),
        _ => p.depth.map(Bucket::Depth),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub dataset: DatasetKind,
    pub buckets: Vec<(Bucket, usize)>,
}

impl CorpusManifest {
    /// 500 problems at each depth 0..=15 plus 1500 UNKNOWN.
    pub fn fld() -> Self {
        let mut buckets: Vec<(Bucket, usize)> = (0..=15).map(|d| (Bucket::Depth(d), 500)).collect();
        buckets.push((Bucket::Unknown, 1500));
        CorpusManifest {
            dataset: DatasetKind::Fld,
            buckets,
        }
    }

    /// 3200 three-hop problems.
    pub fn prontoqa() -> Self {
        CorpusManifest {
            dataset: DatasetKind::ProntoQa,
            buckets: vec![(Bucket::Depth(3), 3200)],
        }
    }

    pub fn total(&self) -> usize {
        self.buckets.iter().map(|b| b.1).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub style: SftStyle,
    pub depth: Option<u32>,
    pub label: Label,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub samples: Vec<SftSample>,
    pub counts: Vec<CountRow>,
}

/// Picks each bucket's quota from the pool (seeded, independent of pool
/// order) and renders the chosen problems in `style`.
pub fn select(golds: &[GoldProblem], manifest: &CorpusManifest, seed: u64) -> Result<Vec<usize>, SftError> {
    let mut pools: BTreeMap<Bucket, Vec<usize>> = BTreeMap::new();
    for (i, g) in golds.iter().enumerate() {
        if g.problem.dataset != manifest.dataset {
            continue;
        }
        if let Some(b) = bucket_of(&g.problem) {
            pools.entry(b).or_default().push(i);
        }
    }
    let mut chosen = Vec::with_capacity(manifest.total());
    for &(bucket, need) in &manifest.buckets {
        let mut pool = pools.remove(&bucket).unwrap_or_default();
        if pool.len() < need {
            return Err(SftError::ManifestShortfall {
                bucket: bucket.to_string(),
                have: pool.len(),
                need,
            });
        }
        pool.sort_by(|&a, &b| golds[a].problem.id.cmp(&golds[b].problem.id));
        let mut rng = ChaCha8Rng::seed_from_u64(seeded_hash(&bucket.to_string(), seed));
        pool.shuffle(&mut rng);
        pool.truncate(need);
        pool.sort_by(|&a, &b| golds[a].problem.id.cmp(&golds[b].problem.id));
        chosen.extend(pool);
    }
    Ok(chosen)
}

pub fn build_corpus(golds: &[GoldProblem], style: SftStyle, manifest: &CorpusManifest, seed: u64) -> Result<Corpus, SftError> {
    let chosen = select(golds, manifest, seed)?;
    let samples = chosen
        .par_iter()
        .map(|&i| generate(&golds[i], style))
        .collect::<Result<Vec<_>, _>>()?;
    let mut counts: BTreeMap<(Option<u32>, Label), usize> = BTreeMap::new();
    for &i in &chosen {
        let p = &golds[i].problem;
        *counts.entry((p.depth, p.label)).or_default() += 1;
    }
    Ok(Corpus {
        samples,
        counts: counts
            .into_iter()
            .map(|((depth, label), count)| CountRow {
                style,
                depth,
                label,
                count,
            })
            .collect(),
    })
}

/// Re-parses a symbolic target and checks it stepwise against the gold
/// problem's facts.
pub fn verify_sample(sample: &SftSample, gold: &GoldProblem) -> Result<ChainVerdict, SftError> {
    let facts = FactTable::from_formulas(&gold.fact_formulas()?);
    let mut chain = parse_proof(&sample.target, Dialect::Symbolic);
    chain.problem_id = sample.source_id.clone();
    Ok(evaluate_chain(&chain, &facts, &CheckerConfig::default(), None))
}
