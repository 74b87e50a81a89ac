use serde::{Deserialize, Serialize};

use super::prompts::{build_prompt, PromptError, PromptMode};
use super::{Label, Problem};
use crate::endpoint::{complete_batch, Completer};
use crate::proof::{extract_answer, strip_preamble, Answer};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub problem_id: String,
    pub raw_output: String,
    /// `None` serializes as `null` and means no marker was found.
    pub predicted: Option<Answer>,
    pub gold: Label,
    pub correct: bool,
    pub latency_ms: u64,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl EvalRecord {
    pub fn predicted_name(&self) -> &'static str {
        self.predicted.map_or("NONE", Answer::name)
    }
}

/// Scores one model reply. Only the text after `answer_tag` is read.
pub fn score_reply(problem: &Problem, reply: &str, answer_tag: &str) -> (Option<Answer>, bool) {
    let predicted = extract_answer(strip_preamble(reply, answer_tag));
    let correct = predicted == Some(problem.label.answer());
    (predicted, correct)
}

/// Prompts every problem and scores the replies. Endpoint failures become
/// records with no prediction; the batch never aborts.
pub fn run_eval<C: Completer + ?Sized>(
    problems: &[Problem],
    completer: &C,
    mode: PromptMode,
    exemplars: &[String],
    answer_tag: &str,
) -> Result<Vec<EvalRecord>, PromptError> {
    let prompts = problems
        .iter()
        .map(|p| build_prompt(p, mode, exemplars))
        .collect::<Result<Vec<_>, _>>()?;
    let replies = complete_batch(completer, &prompts);
    Ok(problems
        .iter()
        .zip(replies)
        .map(|(p, r)| match r {
            Ok(c) => {
                let (predicted, correct) = score_reply(p, &c.text, answer_tag);
                EvalRecord {
                    problem_id: p.id.clone(),
                    raw_output: c.text,
                    predicted,
                    gold: p.label,
                    correct,
                    latency_ms: c.latency_ms,
                    prompt_tokens: c.prompt_tokens,
                    completion_tokens: c.completion_tokens,
                    error: None,
                }
            }
            Err(e) => EvalRecord {
                problem_id: p.id.clone(),
                raw_output: String::new(),
                predicted: None,
                gold: p.label,
                correct: false,
                latency_ms: 0,
                prompt_tokens: None,
                completion_tokens: None,
                error: Some(e.to_string()),
            },
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::DatasetKind;
    use crate::endpoint::{Completion, EndpointError};

    struct Canned;
    impl Completer for Canned {
        fn complete(&self, prompt: &str) -> Result<Completion, EndpointError> {
            if prompt.contains("down") {
                return Err(EndpointError::Transport("refused".into()));
            }
            let text = if prompt.contains("Hypothesis:yes") { "Final conclusion: __PROVED__" } else { "no idea" };
            Ok(Completion {
                text: text.into(),
                latency_ms: 1,
                prompt_tokens: None,
                completion_tokens: None,
                cached: false,
            })
        }
    }

    fn p(id: &str, hyp: &str, label: Label) -> Problem {
        Problem {
            id: id.into(),
            dataset: DatasetKind::Custom,
            facts: vec![],
            facts_formula: None,
            hypothesis: hyp.into(),
            hypothesis_formula: None,
            label,
            depth: None,
            gold_proof: None,
        }
    }

    #[test]
    fn records_per_problem() {
        let ps = [p("a", "yes", Label::T), p("b", "plain", Label::F), p("c", "down", Label::T)];
        let rs = run_eval(&ps, &Canned, PromptMode::Direct, &[], "</think>").unwrap();
        assert_eq!(rs.iter().map(|r| r.correct).collect::<Vec<_>>(), vec![true, false, false]);
        assert_eq!(rs[1].predicted_name(), "NONE");
        assert!(rs[2].error.is_some());
    }

    #[test]
    fn preamble_markers_are_ignored() {
        let prob = p("a", "", Label::F);
        let (pred, ok) = score_reply(&prob, "<think>__DISPROVED__</think>so __PROVED__", "</think>");
        assert_eq!(pred, Some(Answer::Proved));
        assert!(!ok);
    }
}
