use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoreError {
    #[error("prediction trace for {0} is empty")]
    EmptyTrace(String),
    #[error("no traces to score")]
    NoTraces,
    #[error("labels lack the {0} class")]
    MissingClass(&'static str),
    #[error("{predictions} predictions for {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
}

/// Per-step correctness of a probe over one problem's prefixes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionTrace {
    pub problem_id: String,
    /// `correct[i]` is whether the probe got prefix `i + 1` right.
    pub correct: Vec<bool>,
}

impl PredictionTrace {
    pub fn k(&self) -> usize {
        self.correct.len()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CssReading {
    /// τ is where the run of correct predictions reaching the last step
    /// begins. A wrong last step gives span 0.
    #[default]
    Suffix,
    /// τ is the first step that is correct while its predecessor is wrong (or
    /// step 1 when correct). A probe that is never correct gives span 0.
    Local,
}

/// Span `K − τ` of one trace.
pub fn trace_span(trace: &PredictionTrace, reading: CssReading) -> Result<usize, ScoreError> {
    let k = trace.k();
    if k == 0 {
        return Err(ScoreError::EmptyTrace(trace.problem_id.clone()));
    }
    Ok(match reading {
        CssReading::Suffix => {
            let run = trace.correct.iter().rev().take_while(|&&c| c).count();
            run.saturating_sub(1)
        }
        CssReading::Local => (0..k)
            .find(|&i| trace.correct[i] && (i == 0 || !trace.correct[i - 1]))
            .map_or(0, |i| k - (i + 1)),
    })
}

/// Mean span over traces.
pub fn css_score(traces: &[PredictionTrace], reading: CssReading) -> Result<f64, ScoreError> {
    if traces.is_empty() {
        return Err(ScoreError::NoTraces);
    }
    let mut total = 0usize;
    for t in traces {
        total += trace_span(t, reading)?;
    }
    Ok(total as f64 / traces.len() as f64)
}

/// ½(TPR + TNR) with `true` as the positive class.
pub fn balanced_accuracy(predictions: &[bool], labels: &[bool]) -> Result<f64, ScoreError> {
    if predictions.len() != labels.len() {
        return Err(ScoreError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    let (mut tp, mut pos, mut tn, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &l) in predictions.iter().zip(labels) {
        if l {
            pos += 1;
            tp += p as usize;
        } else {
            neg += 1;
            tn += !p as usize;
        }
    }
    if pos == 0 {
        return Err(ScoreError::MissingClass("positive"));
    }
    if neg == 0 {
        return Err(ScoreError::MissingClass("negative"));
    }
    Ok(0.5 * (tp as f64 / pos as f64 + tn as f64 / neg as f64))
}
