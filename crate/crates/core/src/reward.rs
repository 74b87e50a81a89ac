//! Multi-objective reward: answer accuracy plus weighted stepwise soundness
//! and an optional span signal from probing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::probing::{trace_span, CssReading, PredictionTrace};
use crate::steps::{ChainVerdict, StepVerdict, Verdict};

#[derive(Debug, Error, PartialEq)]
pub enum RewardError {
    #[error("component {name} = {value} is outside [0, 1]")]
    OutOfRangeComponent { name: &'static str, value: f64 },
    #[error("weight {name} = {value} must be finite and nonnegative")]
    InvalidWeight { name: &'static str, value: f64 },
    #[error("sample {sample_id}: verdict or trace belongs to {found}")]
    Alignment { sample_id: String, found: String },
    #[error("sample {0}: empty prediction trace")]
    EmptyTrace(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardWeights {
    pub w_v: f64,
    pub w_r: f64,
    pub w_a: f64,
    pub w_c: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            w_v: 1.0,
            w_r: 1.0,
            w_a: 1.0,
            w_c: 0.0,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<(), RewardError> {
        for (name, value) in [("w_v", self.w_v), ("w_r", self.w_r), ("w_a", self.w_a), ("w_c", self.w_c)] {
            if !value.is_finite() || value < 0.0 {
                return Err(RewardError::InvalidWeight { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardInputs {
    pub r_acc: f64,
    pub r_valid: f64,
    pub r_relevant: f64,
    pub r_atomic: f64,
    pub r_css: Option<f64>,
}

impl RewardInputs {
    pub fn validate(&self) -> Result<(), RewardError> {
        let css = self.r_css.unwrap_or(0.0);
        for (name, value) in [
            ("R_acc", self.r_acc),
            ("R_valid", self.r_valid),
            ("R_relevant", self.r_relevant),
            ("R_atomic", self.r_atomic),
            ("R_css", css),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(RewardError::OutOfRangeComponent { name, value });
            }
        }
        if self.r_acc != 0.0 && self.r_acc != 1.0 {
            return Err(RewardError::OutOfRangeComponent { name: "R_acc", value: self.r_acc });
        }
        Ok(())
    }
}

/// `R_acc + w_v R_valid + w_r R_relevant + w_a R_atomic + w_c R_css`, with an
/// absent span term counted as 0.
pub fn compute_reward(inputs: &RewardInputs, weights: &RewardWeights) -> Result<f64, RewardError> {
    inputs.validate()?;
    weights.validate()?;
    Ok(inputs.r_acc
        + weights.w_v * inputs.r_valid
        + weights.w_r * inputs.r_relevant
        + weights.w_a * inputs.r_atomic
        + weights.w_c * inputs.r_css.unwrap_or(0.0))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// Per-step pass rate.
    #[default]
    Fractional,
    /// 1 only when every step passes.
    AllOrNothing,
}

impl std::str::FromStr for RewardMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "fractional" => Ok(RewardMode::Fractional),
            "all_or_nothing" => Ok(RewardMode::AllOrNothing),
            other => Err(format!("unknown reward mode {other:?}")),
        }
    }
}

/// Span normalised to [0, 1] by `max(K - 1, 1)`.
pub fn normalized_span(trace: &PredictionTrace, reading: CssReading) -> Result<f64, RewardError> {
    let span = trace_span(trace, reading).map_err(|_| RewardError::EmptyTrace(trace.problem_id.clone()))?;
    let k = trace.correct.len();
    Ok(span as f64 / (k.saturating_sub(1).max(1)) as f64)
}

fn component(steps: &[StepVerdict], pick: impl Fn(&StepVerdict) -> Verdict, mode: RewardMode) -> f64 {
    let pass = steps.iter().filter(|s| pick(s).holds()).count();
    match mode {
        RewardMode::Fractional => pass as f64 / steps.len() as f64,
        RewardMode::AllOrNothing => f64::from(pass == steps.len()),
    }
}

/// Soundness components of one verdict. Empty or malformed chains earn 0.
pub fn stepwise_inputs(verdict: &ChainVerdict, mode: RewardMode) -> (f64, f64, f64) {
    if verdict.excluded || verdict.malformed || verdict.steps.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let s = &verdict.steps;
    (component(s, |v| v.v, mode), component(s, |v| v.r, mode), component(s, |v| v.a, mode))
}

pub struct RewardCase<'a> {
    pub sample_id: &'a str,
    pub correct: bool,
    pub verdict: &'a ChainVerdict,
    pub trace: Option<&'a PredictionTrace>,
}

/// One line of a reward report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardRow {
    pub sample_id: String,
    #[serde(rename = "R_acc")]
    pub r_acc: f64,
    #[serde(rename = "R_valid")]
    pub r_valid: f64,
    #[serde(rename = "R_relevant")]
    pub r_relevant: f64,
    #[serde(rename = "R_atomic")]
    pub r_atomic: f64,
    #[serde(rename = "R_css")]
    pub r_css: Option<f64>,
    #[serde(rename = "R_total")]
    pub r_total: f64,
}

pub fn reward_batch(cases: &[RewardCase<'_>], weights: &RewardWeights, mode: RewardMode, reading: CssReading) -> Result<Vec<RewardRow>, RewardError> {
    weights.validate()?;
    cases
        .iter()
        .map(|c| {
            let misaligned = |found: &str| RewardError::Alignment {
                sample_id: c.sample_id.to_string(),
                found: found.to_string(),
            };
            if c.verdict.problem_id != c.sample_id {
                return Err(misaligned(&c.verdict.problem_id));
            }
            let r_css = match c.trace {
                Some(t) if t.problem_id != c.sample_id => return Err(misaligned(&t.problem_id)),
                Some(t) => Some(normalized_span(t, reading)?),
                None => None,
            };
            let (r_valid, r_relevant, r_atomic) = stepwise_inputs(c.verdict, mode);
            let inputs = RewardInputs {
                r_acc: f64::from(c.correct),
                r_valid,
                r_relevant,
                r_atomic,
                r_css,
            };
            Ok(RewardRow {
                sample_id: c.sample_id.to_string(),
                r_acc: inputs.r_acc,
                r_valid,
                r_relevant,
                r_atomic,
                r_css,
                r_total: compute_reward(&inputs, weights)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proof::StepKind;
    use crate::steps::JudgeSource;

    fn step(v: Verdict) -> StepVerdict {
        StepVerdict {
            label: "int1".into(),
            kind: StepKind::Derivation,
            v,
            r: Verdict::Pass,
            a: Verdict::Pass,
            source: JudgeSource::Symbolic,
            premises: vec![],
            min_rule_count: None,
            note: None,
        }
    }

    fn chain(vs: &[Verdict]) -> ChainVerdict {
        ChainVerdict {
            problem_id: "s1".into(),
            steps: vs.iter().map(|&v| step(v)).collect(),
            all_valid: vs.iter().all(|v| v.holds()),
            all_relevant: true,
            all_atomic: true,
            excluded: vs.is_empty(),
            malformed: false,
        }
    }

    #[test]
    fn trivial_sums() {
        let ones = RewardInputs {
            r_acc: 1.0,
            r_valid: 1.0,
            r_relevant: 1.0,
            r_atomic: 1.0,
            r_css: Some(1.0),
        };
        let w1 = RewardWeights { w_v: 1.0, w_r: 1.0, w_a: 1.0, w_c: 1.0 };
        assert_eq!(compute_reward(&ones, &w1).unwrap(), 5.0);
        let w0 = RewardWeights { w_v: 0.0, w_r: 0.0, w_a: 0.0, w_c: 0.0 };
        assert_eq!(compute_reward(&ones, &w0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_out_of_range() {
        let bad = RewardInputs {
            r_acc: 1.0,
            r_valid: 1.5,
            r_relevant: 0.0,
            r_atomic: 0.0,
            r_css: None,
        };
        assert!(matches!(
            compute_reward(&bad, &RewardWeights::default()),
            Err(RewardError::OutOfRangeComponent { name: "R_valid", .. })
        ));
        let w = RewardWeights { w_v: -1.0, ..Default::default() };
        assert!(w.validate().is_err());
    }

    #[test]
    fn modes() {
        let c = chain(&[Verdict::Pass, Verdict::Fail, Verdict::Pass, Verdict::Pass]);
        assert_eq!(stepwise_inputs(&c, RewardMode::Fractional).0, 0.75);
        assert_eq!(stepwise_inputs(&c, RewardMode::AllOrNothing).0, 0.0);
        assert_eq!(stepwise_inputs(&chain(&[]), RewardMode::Fractional), (0.0, 0.0, 0.0));
    }

    #[test]
    fn batch_alignment_and_missing_trace() {
        let c = chain(&[Verdict::Pass]);
        let w = RewardWeights { w_c: 1.0, ..Default::default() };
        let rows = reward_batch(
            &[RewardCase { sample_id: "s1", correct: true, verdict: &c, trace: None }],
            &w,
            RewardMode::Fractional,
            CssReading::Suffix,
        )
        .unwrap();
        assert_eq!(rows[0].r_css, None);
        assert_eq!(rows[0].r_total, 4.0);
        let err = reward_batch(
            &[RewardCase { sample_id: "s2", correct: true, verdict: &c, trace: None }],
            &w,
            RewardMode::Fractional,
            CssReading::Suffix,
        );
        assert!(matches!(err, Err(RewardError::Alignment { .. })));
    }

    #[test]
    fn span_normalisation() {
        let t = |v: &[bool]| PredictionTrace { problem_id: "p".into(), correct: v.to_vec() };
        assert_eq!(normalized_span(&t(&[false, true, true, true, true]), CssReading::Suffix).unwrap(), 0.75);
        assert_eq!(normalized_span(&t(&[true]), CssReading::Suffix).unwrap(), 0.0);
        assert_eq!(normalized_span(&t(&[true, true, true]), CssReading::Suffix).unwrap(), 1.0);
    }

    #[test]
    fn report_field_names() {
        let row = RewardRow {
            sample_id: "s".into(),
            r_acc: 1.0,
            r_valid: 0.5,
            r_relevant: 1.0,
            r_atomic: 0.25,
            r_css: Some(0.5),
            r_total: 1.55,
        };
        let v: serde_json::Value = serde_json::to_value(&row).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        for k in ["sample_id", "R_acc", "R_valid", "R_relevant", "R_atomic", "R_css", "R_total"] {
            assert!(keys.contains(&k.to_string()));
        }
    }
}
