use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dump::{count_violations, Dump};
use super::probe::{train_probe, CvPoint, ProbeConfig, ProbeError, ProbeSample};
use super::score::{balanced_accuracy, css_score, CssReading, PredictionTrace, ScoreError};
use super::Task;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("problems in both splits: {0:?}")]
    SplitLeakage(Vec<String>),
    #[error("dump fails validation: {0:?}")]
    InvalidDump(Vec<String>),
    #[error("{task}: {source}")]
    Probe { task: Task, source: ProbeError },
    #[error("{task}: {source}")]
    Score { task: Task, source: ScoreError },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: Task,
    /// `css` (mean spanning steps) or `balanced_accuracy`.
    pub metric: String,
    pub score: f64,
    pub train_records: usize,
    pub test_records: usize,
    pub test_problems: usize,
    pub c: f64,
    pub cv: Vec<CvPoint>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub model_id: String,
    pub dim: usize,
    pub reading: CssReading,
    pub tasks: Vec<TaskReport>,
}

fn run_task(dump: &Dump, task: Task, train: &BTreeSet<&str>, test: &BTreeSet<&str>, cfg: &ProbeConfig, reading: CssReading) -> Result<Option<TaskReport>, SuiteError> {
    let recs: Vec<_> = dump.records.iter().filter(|r| r.task == task).collect();
    if recs.is_empty() {
        return Ok(None);
    }
    let train_s: Vec<ProbeSample> = recs
        .iter()
        .filter(|r| train.contains(r.problem_id.as_str()))
        .map(|r| ProbeSample::from(*r))
        .collect();
    let test_r: Vec<_> = recs.iter().filter(|r| test.contains(r.problem_id.as_str())).collect();
    let probe = train_probe(&train_s, cfg).map_err(|source| SuiteError::Probe { task, source })?;
    let score_err = |source| SuiteError::Score { task, source };
    let (metric, score) = match task {
        Task::Css => {
            let mut by_problem: BTreeMap<&str, Vec<(u32, bool)>> = BTreeMap::new();
            for r in &test_r {
                let ok = probe.predict(&r.vector) == r.label.is_positive();
                by_problem.entry(&r.problem_id).or_default().push((r.step_index, ok));
            }
            let traces: Vec<PredictionTrace> = by_problem
                .into_iter()
                .map(|(pid, mut xs)| {
                    xs.sort_by_key(|x| x.0);
                    PredictionTrace {
                        problem_id: pid.into(),
                        correct: xs.into_iter().map(|x| x.1).collect(),
                    }
                })
                .collect();
            ("css", css_score(&traces, reading).map_err(score_err)?)
        }
        Task::Rfi | Task::Nsd => {
            let preds: Vec<bool> = test_r.iter().map(|r| probe.predict(&r.vector)).collect();
            let labels: Vec<bool> = test_r.iter().map(|r| r.label.is_positive()).collect();
            ("balanced_accuracy", balanced_accuracy(&preds, &labels).map_err(score_err)?)
        }
    };
    let test_problems = test_r.iter().map(|r| r.problem_id.as_str()).collect::<BTreeSet<_>>().len();
    Ok(Some(TaskReport {
        task,
        metric: metric.into(),
        score,
        train_records: train_s.len(),
        test_records: test_r.len(),
        test_problems,
        c: probe.c,
        cv: probe.cv,
        seed: cfg.seed,
    }))
}

/// Trains one probe per task on the training problems and scores the held-out
/// problems. Tasks absent from the dump are skipped.
pub fn run_probing_suite(dump: &Dump, split: &SplitManifest, cfg: &ProbeConfig, reading: CssReading) -> Result<SuiteReport, SuiteError> {
    let train: BTreeSet<&str> = split.train.iter().map(String::as_str).collect();
    let test: BTreeSet<&str> = split.test.iter().map(String::as_str).collect();
    let leaked: Vec<String> = train.intersection(&test).map(|s| s.to_string()).collect();
    if !leaked.is_empty() {
        return Err(SuiteError::SplitLeakage(leaked));
    }
    let violations = count_violations(&dump.records);
    if !violations.is_empty() {
        return Err(SuiteError::InvalidDump(violations));
    }
    let results: Vec<_> = Task::ALL
        .par_iter()
        .map(|&t| run_task(dump, t, &train, &test, cfg, reading))
        .collect();
    let mut tasks = Vec::new();
    for r in results {
        if let Some(t) = r? {
            tasks.push(t);
        }
    }
    Ok(SuiteReport {
        model_id: dump.header.model_id.clone(),
        dim: dump.header.dim,
        reading,
        tasks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probing::{DumpHeader, InstanceLabel, RepresentationRecord};

    fn dump() -> Dump {
        let mut records = Vec::new();
        for p in 0..20 {
            let label = if p % 2 == 0 { InstanceLabel::T } else { InstanceLabel::F };
            for i in 1..=4u32 {
                // Signal grows with the step index.
                let s = if label == InstanceLabel::T { 1.0 } else { -1.0 } * i as f32;
                records.push(RepresentationRecord {
                    problem_id: format!("p{p}"),
                    task: Task::Css,
                    step_index: i,
                    candidate_id: None,
                    label,
                    vector: vec![s + (p as f32 * 0.37).sin(), (p * i) as f32 % 3.0],
                });
            }
        }
        Dump {
            header: DumpHeader::new("synthetic", 2),
            records,
        }
    }

    fn split() -> SplitManifest {
        SplitManifest {
            train: (0..14).map(|p| format!("p{p}")).collect(),
            test: (14..20).map(|p| format!("p{p}")).collect(),
        }
    }

    #[test]
    fn css_suite_deterministic() {
        let a = run_probing_suite(&dump(), &split(), &ProbeConfig::default(), CssReading::Suffix).unwrap();
        let b = run_probing_suite(&dump(), &split(), &ProbeConfig::default(), CssReading::Suffix).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tasks.len(), 1);
        assert_eq!(a.tasks[0].test_problems, 6);
        assert!(a.tasks[0].score <= 3.0);
    }

    #[test]
    fn leakage_rejected() {
        let mut s = split();
        s.test.push("p0".into());
        assert!(matches!(
            run_probing_suite(&dump(), &s, &ProbeConfig::default(), CssReading::Suffix),
            Err(SuiteError::SplitLeakage(v)) if v == vec!["p0".to_string()]
        ));
    }
}
