use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Problem;

pub(crate) const HEAD: &str = "Based on the provided facts, answer the question. Conclude with one of the markers: \
\"__PROVED__\" for proven, \"__DISPROVED__\" for disproven, or \"__UNKNOWN__\" if uncertain.";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    Direct,
    Cot,
    Fewshot,
}

impl std::str::FromStr for PromptMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "direct" => Ok(PromptMode::Direct),
            "cot" => Ok(PromptMode::Cot),
            "fewshot" => Ok(PromptMode::Fewshot),
            other => Err(format!("unknown prompt mode `{other}`")),
        }
    }
}

impl PromptMode {
    pub fn name(self) -> &'static str {
        match self {
            PromptMode::Direct => "direct",
            PromptMode::Cot => "cot",
            PromptMode::Fewshot => "fewshot",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("few-shot prompting needs at least one exemplar")]
    MissingExemplar,
}

/// Facts as `fact1: ... fact2: ...`, the labelled form the proofs cite.
pub fn render_facts<S: AsRef<str>>(facts: &[S]) -> String {
    facts
        .iter()
        .enumerate()
        .map(|(i, f)| format!("fact{}: {}", i + 1, f.as_ref()))
        .collect::<Vec<_>>()
        .join(" ")
}

/// One worked example for the few-shot template.
pub fn render_exemplar(problem: &Problem, solution: &str) -> String {
    format!(
        "Facts:{}\nHypothesis:{}\n{}",
        render_facts(&problem.facts),
        problem.hypothesis,
        solution
    )
}

pub fn build_prompt(problem: &Problem, mode: PromptMode, exemplars: &[String]) -> Result<String, PromptError> {
    let facts = render_facts(&problem.facts);
    let tail = format!("Facts:{facts}\nHypothesis:{}", problem.hypothesis);
    Ok(match mode {
        PromptMode::Direct => format!("{HEAD}\n{tail}"),
        PromptMode::Cot => format!("{HEAD}\n{tail}\nLet's analyze this step by step."),
        PromptMode::Fewshot => {
            if exemplars.is_empty() {
                return Err(PromptError::MissingExemplar);
            }
            let example = exemplars.join("\n\n");
            format!(
                "{HEAD}\nHere are some examples of proofs for your reference:\n[Start of example]\n\
                 For example, for this question:\n{example}\n[End of example]\n\
                 You can refer to the proof method of the above question, think step by step, \
                 and give the result of this question.\n{tail}"
            )
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{DatasetKind, Label};

    fn problem() -> Problem {
        Problem {
            id: "p".into(),
            dataset: DatasetKind::Custom,
            facts: vec!["the wug is red.".into(), "the wug is big.".into()],
            facts_formula: None,
            hypothesis: "the wug is red.".into(),
            hypothesis_formula: None,
            label: Label::T,
            depth: None,
            gold_proof: None,
        }
    }

    #[test]
    fn direct_is_byte_exact() {
        let p = build_prompt(&problem(), PromptMode::Direct, &[]).unwrap();
        assert_eq!(
            p,
            "Based on the provided facts, answer the question. Conclude with one of the markers: \
             \"__PROVED__\" for proven, \"__DISPROVED__\" for disproven, or \"__UNKNOWN__\" if uncertain.\n\
             Facts:fact1: the wug is red. fact2: the wug is big.\nHypothesis:the wug is red."
        );
    }

    #[test]
    fn cot_suffix() {
        let p = build_prompt(&problem(), PromptMode::Cot, &[]).unwrap();
        assert!(p.ends_with("\nLet's analyze this step by step."));
    }

    #[test]
    fn fewshot_layout() {
        assert_eq!(build_prompt(&problem(), PromptMode::Fewshot, &[]), Err(PromptError::MissingExemplar));
        let p = build_prompt(&problem(), PromptMode::Fewshot, &["EX".into()]).unwrap();
        assert!(p.contains("\nHere are some examples of proofs for your reference:\n[Start of example]\nFor example, for this question:\nEX\n[End of example]\nYou can refer to the proof method of the above question, think step by step, and give the result of this question.\nFacts:"));
    }
}
