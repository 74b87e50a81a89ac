//! Remote true/false judge for natural-language steps.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::endpoint::{Completer, EndpointError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeKind {
    Validity,
    Atomicity,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JudgeError {
    #[error("remote judge unavailable: {0}")]
    Unavailable(#[from] EndpointError),
    #[error("judge reply does not start with true/false: {0:?}")]
    UnparseableReply(String),
}

pub trait StepJudge: Send + Sync {
    fn judge(&self, kind: JudgeKind, premises: &str, conclusion: &str) -> Result<bool, JudgeError>;
}

pub fn render_judge_prompt(kind: JudgeKind, premises_str: &str, concl_text_full: &str) -> String {
    let question = match kind {
        JudgeKind::Validity => "Do the premises entail the conclusion? Answer true or false only.",
        JudgeKind::Atomicity => "Is this inference atomic...? Answer true or false only.",
    };
    format!("Premises:\n{premises_str}\n\nConclusion:\n{concl_text_full}\n\n{question}")
}

/// Case-insensitive leading `true` / `false`, ignoring quotes and markup.
pub fn parse_judge_reply(reply: &str) -> Result<bool, JudgeError> {
    let t = reply
        .trim_start_matches(|c: char| c.is_whitespace() || matches!(c, '*' | '"' | '\'' | '`' | '_'))
        .to_lowercase();
    if t.starts_with("true") {
        Ok(true)
    } else if t.starts_with("false") {
        Ok(false)
    } else {
        Err(JudgeError::UnparseableReply(reply.chars().take(80).collect()))
    }
}

pub struct RemoteJudge<C> {
    completer: C,
}

impl<C: Completer> RemoteJudge<C> {
    pub fn new(completer: C) -> Self {
        RemoteJudge { completer }
    }

    pub fn completer(&self) -> &C {
        &self.completer
    }
}

impl<C: Completer> StepJudge for RemoteJudge<C> {
    fn judge(&self, kind: JudgeKind, premises: &str, conclusion: &str) -> Result<bool, JudgeError> {
        let prompt = render_judge_prompt(kind, premises, conclusion);
        let reply = self.completer.complete(&prompt)?;
        parse_judge_reply(&reply.text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validity_template() {
        let p = render_judge_prompt(JudgeKind::Validity, "fact1: a fact int1: a step", "int2: next");
        assert_eq!(
            p,
            "Premises:\nfact1: a fact int1: a step\n\nConclusion:\nint2: next\n\n\
             Do the premises entail the conclusion? Answer true or false only."
        );
        assert!(render_judge_prompt(JudgeKind::Atomicity, "", "").ends_with("Is this inference atomic...? Answer true or false only."));
    }

    #[test]
    fn reply_parsing() {
        assert_eq!(parse_judge_reply("True."), Ok(true));
        assert_eq!(parse_judge_reply("  **false**"), Ok(false));
        assert!(matches!(parse_judge_reply("It depends"), Err(JudgeError::UnparseableReply(_))));
    }
}
