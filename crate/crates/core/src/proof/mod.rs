//! Stepwise proof chains: parsing, answer markers, dependency structure and
//! canonical rendering.

mod answer;
pub(crate) mod graph;
mod parse;
mod render;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{parse_formula, Formula};

pub use answer::{extract_answer, strip_preamble, Answer, DEFAULT_ANSWER_TAG};
pub use graph::{assumption_blocks, dependency_graph, Block, DependencyGraph, GraphError, Node};
pub use parse::{parse_proof, parse_proof_with_facts};
pub use render::{render_chain, render_step};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dialect {
    #[default]
    Symbolic,
    Natural,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    GivenFact,
    Derivation,
    Assumption,
    Contradiction,
    ReductioDischarge,
    FinalConclusion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofStep {
    /// 1-based position in the chain.
    #[serde(skip)]
    pub ordinal: usize,
    pub label: String,
    pub kind: StepKind,
    pub premises: Vec<String>,
    /// Canonical formula text (symbolic) or the sentence (natural); "⊥" for
    /// contradiction steps.
    pub conclusion: String,
    /// The explanation line.
    pub text: String,
    #[serde(skip)]
    pub formula: Option<Formula>,
}

impl ProofStep {
    pub fn is_falsum(&self) -> bool {
        self.conclusion == "⊥"
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Error)]
#[error("step {ordinal}: {reason}")]
pub struct MalformedStep {
    pub ordinal: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofChain {
    pub problem_id: String,
    #[serde(default)]
    pub dialect: Dialect,
    pub steps: Vec<ProofStep>,
    pub final_label: Option<Answer>,
    pub malformed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<MalformedStep>,
    /// `factN: ...` lines declared before the first step.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub facts: BTreeMap<String, String>,
    #[serde(skip)]
    pub raw_text: String,
}

impl ProofChain {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Index of the step that concludes the proof: the final-conclusion step,
    /// a discharge labelled `hypothesis`, or else the last step.
    pub fn terminal_step(&self) -> Option<usize> {
        self.steps
            .iter()
            .rposition(|s| s.kind == StepKind::FinalConclusion || is_hypothesis_label(&s.label))
            .or_else(|| self.steps.len().checked_sub(1))
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("chain serializes")
    }

    /// Loads a chain from its JSONL form, re-parsing symbolic conclusions.
    pub fn from_json_line(line: &str) -> Result<ProofChain, ChainLoadError> {
        let mut chain: ProofChain = serde_json::from_str(line)?;
        for (i, step) in chain.steps.iter_mut().enumerate() {
            step.ordinal = i + 1;
            if chain.dialect == Dialect::Symbolic && !step.is_falsum() {
                match parse_formula(&step.conclusion) {
                    Ok(f) => step.formula = Some(f),
                    Err(e) => {
                        chain.malformed = true;
                        chain.errors.push(MalformedStep {
                            ordinal: i + 1,
                            reason: format!("conclusion does not parse: {e}"),
                        });
                    }
                }
            } else if step.is_falsum() {
                step.formula = Some(Formula::Falsum);
            }
        }
        Ok(chain)
    }
}

#[derive(Debug, Error)]
pub enum ChainLoadError {
    #[error("invalid chain json: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn is_hypothesis_label(label: &str) -> bool {
    label == "hypothesis" || label == "¬hypothesis"
}
