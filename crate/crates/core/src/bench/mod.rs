//! Benchmark ingestion, prompting, generation and accuracy reporting.

pub mod adapters;
pub mod metrics;
pub mod prompts;
pub mod run;

use std::fmt;
use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::proof::{Answer, ProofChain};

pub use metrics::{accuracy, accuracy_by_depth, AccuracyRow, DepthRow, MetricsError, DEFAULT_DEPTH_BINS};
pub use prompts::{build_prompt, render_exemplar, render_facts, PromptError, PromptMode};
pub use run::{run_eval, EvalRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DatasetKind {
    #[serde(rename = "FLD")]
    Fld,
    #[serde(rename = "FOLIO")]
    Folio,
    #[serde(rename = "MultiLogiEval")]
    MultiLogiEval,
    #[serde(rename = "ProntoQA")]
    ProntoQa,
    #[serde(rename = "custom")]
    Custom,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Fld => "FLD",
            DatasetKind::Folio => "FOLIO",
            DatasetKind::MultiLogiEval => "MultiLogiEval",
            DatasetKind::ProntoQa => "ProntoQA",
            DatasetKind::Custom => "custom",
        }
    }

    pub fn labels(self) -> &'static [Label] {
        match self {
            DatasetKind::Fld | DatasetKind::Folio | DatasetKind::Custom => &[Label::T, Label::F, Label::Unknown],
            DatasetKind::MultiLogiEval | DatasetKind::ProntoQa => &[Label::T, Label::F],
        }
    }

    /// Expected size and depth range of the standard evaluation split.
    pub fn manifest(self) -> Option<Manifest> {
        let (count, depths) = match self {
            DatasetKind::Fld => (1100, Some(0..=19)),
            DatasetKind::Folio => (203, None),
            DatasetKind::MultiLogiEval => (390, None),
            DatasetKind::ProntoQa => (500, None),
            DatasetKind::Custom => return None,
        };
        Some(Manifest { count, depths })
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DatasetKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "fld" => Ok(DatasetKind::Fld),
            "folio" => Ok(DatasetKind::Folio),
            "multilogieval" => Ok(DatasetKind::MultiLogiEval),
            "prontoqa" => Ok(DatasetKind::ProntoQa),
            "custom" => Ok(DatasetKind::Custom),
            other => Err(format!("unknown dataset kind `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub count: usize,
    pub depths: Option<RangeInclusive<u32>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    T,
    F,
    #[serde(alias = "UNKNOWN")]
    Unknown,
}

impl Label {
    pub fn answer(self) -> Answer {
        match self {
            Label::T => Answer::Proved,
            Label::F => Answer::Disproved,
            Label::Unknown => Answer::Unknown,
        }
    }

    pub fn from_answer(a: Answer) -> Label {
        match a {
            Answer::Proved => Label::T,
            Answer::Disproved => Label::F,
            Answer::Unknown => Label::Unknown,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub id: String,
    pub dataset: DatasetKind,
    pub facts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facts_formula: Option<Vec<String>>,
    pub hypothesis: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis_formula: Option<String>,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "gold_chain")]
    pub gold_proof: Option<ProofChain>,
}

mod gold_chain {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(c: &Option<ProofChain>, s: S) -> Result<S::Ok, S::Error> {
        c.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ProofChain>, D::Error> {
        match Option::<Value>::deserialize(d)? {
            None | Some(Value::Null) => Ok(None),
            Some(v) => ProofChain::from_json_line(&v.to_string())
                .map(Some)
                .map_err(serde::de::Error::custom),
        }
    }
}

impl Problem {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("problem serializes")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountCheck {
    /// Only schema and label checks.
    #[default]
    Lenient,
    /// Also require the manifest's exact count and depth range.
    Strict,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("schema error at line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: label {label:?} is outside the {dataset} schema")]
    LabelOutOfSchema { line: usize, label: Label, dataset: DatasetKind },
    #[error("{dataset} manifest expects {expected} problems, found {found}")]
    CountMismatch {
        dataset: DatasetKind,
        expected: usize,
        found: usize,
    },
}

pub fn parse_dataset(text: &str, kind: DatasetKind, check: CountCheck) -> Result<Vec<Problem>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let p: Problem = serde_json::from_str(line).map_err(|e| DatasetError::Schema {
            line: line_no,
            message: e.to_string(),
        })?;
        let schema = |message: String| DatasetError::Schema { line: line_no, message };
        if kind != DatasetKind::Custom && p.dataset != kind {
            return Err(schema(format!("dataset {} in a {} file", p.dataset, kind)));
        }
        if !kind.labels().contains(&p.label) {
            return Err(DatasetError::LabelOutOfSchema {
                line: line_no,
                label: p.label,
                dataset: kind,
            });
        }
        if kind == DatasetKind::Fld && p.depth.is_none() {
            return Err(schema("FLD problems need a depth".into()));
        }
        if let Some(ff) = &p.facts_formula {
            if ff.len() != p.facts.len() {
                return Err(schema("facts_formula length differs from facts".into()));
            }
        }
        out.push(p);
    }
    if out.is_empty() {
        return Err(DatasetError::Schema {
            line: 0,
            message: "dataset is empty".into(),
        });
    }
    if check == CountCheck::Strict {
        if let Some(m) = kind.manifest() {
            if out.len() != m.count {
                return Err(DatasetError::CountMismatch {
                    dataset: kind,
                    expected: m.count,
                    found: out.len(),
                });
            }
            if let Some(range) = &m.depths {
                if let Some((i, p)) = out
                    .iter()
                    .enumerate()
                    .find(|(_, p)| !p.depth.is_some_and(|d| range.contains(&d)))
                {
                    return Err(DatasetError::Schema {
                        line: i + 1,
                        message: format!("depth {:?} of {} outside {range:?}", p.depth, p.id),
                    });
                }
            }
        }
    }
    Ok(out)
}

pub fn load_dataset(path: &Path, kind: DatasetKind, check: CountCheck) -> Result<Vec<Problem>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_dataset(&text, kind, check)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> std::io::Result<()> {
    let mut out = String::new();
    for it in items {
        out.push_str(&serde_json::to_string(it).map_err(std::io::Error::other)?);
        out.push('\n');
    }
    fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, label: &str, depth: Option<u32>) -> String {
        let mut v = serde_json::json!({"id": id, "dataset": "FLD", "facts": ["a"], "hypothesis": "h", "label": label});
        if let Some(d) = depth {
            v["depth"] = d.into();
        }
        v.to_string()
    }

    #[test]
    fn empty_file_is_schema_error() {
        assert!(matches!(
            parse_dataset("", DatasetKind::Fld, CountCheck::Lenient),
            Err(DatasetError::Schema { line: 0, .. })
        ));
    }

    #[test]
    fn label_schema_enforced() {
        let text = r#"{"id":"1","dataset":"ProntoQA","facts":[],"hypothesis":"h","label":"Unknown"}"#;
        assert!(matches!(
            parse_dataset(text, DatasetKind::ProntoQa, CountCheck::Lenient),
            Err(DatasetError::LabelOutOfSchema { line: 1, .. })
        ));
    }

    #[test]
    fn fld_requires_depth_and_manifest_count() {
        assert!(parse_dataset(&line("1", "T", None), DatasetKind::Fld, CountCheck::Lenient).is_err());
        let ok = parse_dataset(&line("1", "T", Some(3)), DatasetKind::Fld, CountCheck::Lenient).unwrap();
        assert_eq!(ok[0].depth, Some(3));
        assert!(matches!(
            parse_dataset(&line("1", "T", Some(3)), DatasetKind::Fld, CountCheck::Strict),
            Err(DatasetError::CountMismatch { expected: 1100, found: 1, .. })
        ));
        let full: String = (0..1100).map(|i| line(&i.to_string(), "F", Some(i % 20)) + "\n").collect();
        assert_eq!(parse_dataset(&full, DatasetKind::Fld, CountCheck::Strict).unwrap().len(), 1100);
    }

    #[test]
    fn manifests() {
        assert_eq!(DatasetKind::Folio.manifest().unwrap().count, 203);
        assert_eq!(DatasetKind::Fld.manifest().unwrap().depths, Some(0..=19));
    }

    #[test]
    fn gold_proof_round_trip() {
        let chain = crate::proof::parse_proof("Step 1: From fact1, we derive:\nhypothesis: A(a)", crate::proof::Dialect::Symbolic);
        let p = Problem {
            id: "x".into(),
            dataset: DatasetKind::Custom,
            facts: vec!["A(a)".into()],
            facts_formula: Some(vec!["A(a)".into()]),
            hypothesis: "A(a)".into(),
            hypothesis_formula: None,
            label: Label::T,
            depth: Some(1),
            gold_proof: Some(chain),
        };
        let back = parse_dataset(&p.to_json_line(), DatasetKind::Custom, CountCheck::Lenient).unwrap();
        let g = back[0].gold_proof.as_ref().unwrap();
        assert_eq!(g.steps[0].formula, p.gold_proof.as_ref().unwrap().steps[0].formula);
    }
}
