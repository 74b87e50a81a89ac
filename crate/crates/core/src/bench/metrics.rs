use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::run::EvalRecord;
use super::Problem;

pub const DEFAULT_DEPTH_BINS: [(u32, u32); 5] = [(0, 3), (4, 7), (8, 11), (12, 15), (16, 19)];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no records to score")]
    EmptyCohort,
    #[error("problem {0} has no depth")]
    DepthMissing(String),
    #[error("depth {depth} of problem {id} falls in no bin")]
    DepthOutsideBins { id: String, depth: u32 },
    #[error("record {0} has no matching problem")]
    UnknownProblem(String),
}

pub fn accuracy(records: &[EvalRecord]) -> Result<f64, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyCohort);
    }
    let correct = records.iter().filter(|r| r.correct).count();
    Ok(correct as f64 / records.len() as f64)
}

pub fn abstention_rate(records: &[EvalRecord]) -> Result<f64, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyCohort);
    }
    Ok(records.iter().filter(|r| r.predicted.is_none()).count() as f64 / records.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub dataset: String,
    pub mode: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub accuracy: f64,
    pub abstention_rate: f64,
}

impl AccuracyRow {
    pub fn new(dataset: &str, mode: &str, records: &[EvalRecord]) -> Result<Self, MetricsError> {
        Ok(AccuracyRow {
            dataset: dataset.into(),
            mode: mode.into(),
            n: records.len(),
            accuracy: accuracy(records)?,
            abstention_rate: abstention_rate(records)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthRow {
    pub dataset: String,
    pub mode: String,
    pub bin: String,
    pub lo: u32,
    pub hi: u32,
    pub count: usize,
    pub correct: usize,
    /// Absent when the bin is empty.
    pub accuracy: Option<f64>,
}

pub fn accuracy_by_depth(
    records: &[EvalRecord],
    problems: &[Problem],
    bins: &[(u32, u32)],
) -> Result<Vec<DepthRow>, MetricsError> {
    let depth: HashMap<&str, Option<u32>> = problems.iter().map(|p| (p.id.as_str(), p.depth)).collect();
    let mut tallies = vec![(0usize, 0usize); bins.len()];
    for r in records {
        let d = depth
            .get(r.problem_id.as_str())
            .ok_or_else(|| MetricsError::UnknownProblem(r.problem_id.clone()))?
            .ok_or_else(|| MetricsError::DepthMissing(r.problem_id.clone()))?;
        let b = bins
            .iter()
            .position(|&(lo, hi)| lo <= d && d <= hi)
            .ok_or_else(|| MetricsError::DepthOutsideBins {
                id: r.problem_id.clone(),
                depth: d,
            })?;
        tallies[b].0 += 1;
        tallies[b].1 += r.correct as usize;
    }
    Ok(bins
        .iter()
        .zip(tallies)
        .map(|(&(lo, hi), (count, correct))| DepthRow {
            dataset: String::new(),
            mode: String::new(),
            bin: format!("{lo}-{hi}"),
            lo,
            hi,
            count,
            correct,
            accuracy: (count > 0).then(|| correct as f64 / count as f64),
        })
        .collect())
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{DatasetKind, Label};

    fn rec(id: &str, correct: bool) -> EvalRecord {
        EvalRecord {
            problem_id: id.into(),
            raw_output: String::new(),
            predicted: None,
            gold: Label::T,
            correct,
            latency_ms: 0,
            prompt_tokens: None,
            completion_tokens: None,
            error: None,
        }
    }

    fn prob(id: &str, depth: Option<u32>) -> Problem {
        Problem {
            id: id.into(),
            dataset: DatasetKind::Fld,
            facts: vec![],
            facts_formula: None,
            hypothesis: String::new(),
            hypothesis_formula: None,
            label: Label::T,
            depth,
            gold_proof: None,
        }
    }

    #[test]
    fn accuracy_examples() {
        let rs = [rec("a", true), rec("b", true), rec("c", true), rec("d", false)];
        assert_eq!(accuracy(&rs).unwrap(), 0.75);
        assert_eq!(accuracy(&rs[..3]).unwrap(), 1.0);
        assert_eq!(accuracy(&[rec("x", false)]).unwrap(), 0.0);
        assert_eq!(accuracy(&[]), Err(MetricsError::EmptyCohort));
    }

    #[test]
    fn depth_table() {
        let ps = [prob("a", Some(2)), prob("b", Some(17)), prob("c", Some(5))];
        let rs = [rec("a", true), rec("b", false), rec("c", true)];
        let rows = accuracy_by_depth(&rs, &ps, &DEFAULT_DEPTH_BINS).unwrap();
        assert_eq!(rows[0].accuracy, Some(1.0));
        assert_eq!((rows[1].count, rows[1].accuracy), (1, Some(1.0)));
        assert_eq!(rows[2].accuracy, None);
        assert_eq!((rows[4].count, rows[4].accuracy), (1, Some(0.0)));
        assert_eq!(
            accuracy_by_depth(&rs, &[prob("a", None)], &DEFAULT_DEPTH_BINS),
            Err(MetricsError::DepthMissing("a".into()))
        );
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        write_csv(&[AccuracyRow::new("FLD", "direct", &[rec("a", true)]).unwrap()], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "dataset,mode,N,accuracy,abstention_rate\nFLD,direct,1,1.0,1.0\n");
    }
}
