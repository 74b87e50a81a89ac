//! Converters from upstream dataset exports into the internal problem schema.
//!
//! * FLD: `context` / `context_formula` as `fact1: ... fact2: ...`, labels
//!   `PROVED` / `DISPROVED` / `UNKNOWN`, formulas in FLD notation
//!   (`{A}{a}`, `(x): {A}x -> {B}x`), proofs as `fact1 & fact2 -> int1: ...;`.
//! * FOLIO: `premises` (string or list), `conclusion`, `label` in
//!   `True` / `False` / `Uncertain`, optional `premises-FOL` / `conclusion-FOL`.
//! * MultiLogiEval: `context`, `question`, `answer` yes/no. yes maps to T and
//!   no maps to F.
//! * ProntoQA: either `context` / `question` / `answer` (`A` = true, `B` =
//!   false) or `question` / `query` / `answer` (`True` / `False`).

use std::sync::LazyLock;

use regex::Regex;
use serde_json::Value;
use thiserror::Error;

use super::{DatasetKind, Label, Problem};
use crate::logic::{parse_formula, print_formula};
use crate::proof::{parse_proof, Dialect, ProofChain};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AdapterError {
    #[error("record {index}: {message}")]
    Record { index: usize, message: String },
    #[error("input is neither JSONL nor a JSON array: {0}")]
    Format(String),
    #[error("no adapter for dataset kind {0}")]
    Unsupported(DatasetKind),
}

fn records(text: &str) -> Result<Vec<Value>, AdapterError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        return match serde_json::from_str::<Value>(trimmed) {
            Ok(Value::Array(v)) => Ok(v),
            Ok(_) => Err(AdapterError::Format("expected an array".into())),
            Err(e) => Err(AdapterError::Format(e.to_string())),
        };
    }
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| AdapterError::Format(e.to_string())))
        .collect()
}

pub fn convert(kind: DatasetKind, text: &str) -> Result<Vec<Problem>, AdapterError> {
    let recs = records(text)?;
    recs.iter()
        .enumerate()
        .map(|(i, v)| match kind {
            DatasetKind::Fld => fld(i, v),
            DatasetKind::Folio => folio(i, v),
            DatasetKind::MultiLogiEval => multilogieval(i, v),
            DatasetKind::ProntoQa => prontoqa(i, v),
            DatasetKind::Custom => Err(AdapterError::Unsupported(kind)),
        })
        .collect()
}

fn field<'a>(v: &'a Value, keys: &[&str]) -> Option<&'a Value> {
    keys.iter().find_map(|k| v.get(*k).filter(|x| !x.is_null()))
}

fn string(i: usize, v: &Value, keys: &[&str]) -> Result<String, AdapterError> {
    match field(v, keys) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(other) => Ok(other.to_string()),
        None => Err(AdapterError::Record {
            index: i,
            message: format!("missing field {}", keys.join("/")),
        }),
    }
}

fn id_of(i: usize, v: &Value, keys: &[&str]) -> String {
    match field(v, keys) {
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
        None => i.to_string(),
    }
}

static SENTENCE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[^.!?]+[.!?]?").unwrap());
static FACT_SPLIT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"fact(\d+):\s*").unwrap());

pub fn split_sentences(text: &str) -> Vec<String> {
    SENTENCE
        .find_iter(text)
        .map(|m| m.as_str().trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Splits `fact1: ... fact2: ...` into its bodies, ordered by fact number.
pub fn split_labelled_facts(text: &str) -> Vec<String> {
    let marks: Vec<(usize, usize, usize)> = FACT_SPLIT
        .captures_iter(text)
        .map(|c| {
            let m = c.get(0).unwrap();
            (c[1].parse().unwrap_or(0), m.start(), m.end())
        })
        .collect();
    let mut out: Vec<(usize, String)> = marks
        .iter()
        .enumerate()
        .map(|(k, &(n, _, end))| {
            let stop = marks.get(k + 1).map_or(text.len(), |m| m.1);
            (n, text[end..stop].trim().to_string())
        })
        .collect();
    out.sort_by_key(|(n, _)| *n);
    out.into_iter().map(|(_, s)| s).collect()
}

static FLD_EXISTS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\(E([a-z])\):").unwrap());
static FLD_FORALL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\(([a-z])\):").unwrap());
static FLD_GROUND: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\{([A-Z]+)\}\{([a-z]+)\}").unwrap());
static FLD_VAR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\{([A-Z]+)\}([a-z])\b").unwrap());
static FLD_PROP: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\{([A-Z]+)\}").unwrap());
static FLD_OR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\sv\s").unwrap());

/// Rewrites FLD notation into the formula grammar and canonicalizes it.
pub fn fld_formula(text: &str) -> Option<String> {
    let t = text.trim();
    if t == "#F#" {
        return Some("⊥".into());
    }
    let t = FLD_EXISTS.replace_all(t, "∃$1 ");
    let t = FLD_FORALL.replace_all(&t, "∀$1 ");
    let t = FLD_GROUND.replace_all(&t, "$1($2)");
    let t = FLD_VAR.replace_all(&t, "$1($2)");
    let t = FLD_PROP.replace_all(&t, "$1");
    let t = FLD_OR.replace_all(&t, " ∨ ");
    parse_formula(&t).ok().map(|f| print_formula(&f))
}

/// Builds a symbolic chain from an FLD `proofs_formula` string.
pub fn fld_proof(proof: &str, hypothesis_formula: Option<&str>) -> Option<ProofChain> {
    let mut lines = Vec::new();
    for (k, seg) in proof.split(';').map(str::trim).filter(|s| !s.is_empty()).enumerate() {
        let (lhs, rhs) = seg.split_once("->")?;
        let lhs = lhs.trim();
        let rhs = rhs.trim();
        let (label, formula) = match rhs.split_once(':') {
            Some((l, f)) => (l.trim().to_string(), fld_formula(f)?),
            None if rhs == "hypothesis" => ("hypothesis".to_string(), hypothesis_formula?.to_string()),
            None if rhs == "¬hypothesis" => ("hypothesis".to_string(), format!("¬({})", hypothesis_formula?)),
            None => return None,
        };
        let refs: Vec<String> = lhs
            .split('&')
            .map(|r| r.trim().trim_matches(['[', ']']).to_string())
            .filter(|r| !r.is_empty() && r != "void")
            .collect();
        let head = if lhs == "void" {
            "Assume for contradiction:".to_string()
        } else if lhs.contains('[') {
            format!("By reductio ad absurdum from {}:", refs.join(", "))
        } else if formula == "⊥" {
            format!("Contradiction from {}:", refs.join(", "))
        } else {
            format!("From {}, we derive:", refs.join(", "))
        };
        let body = if formula == "⊥" { "⊥".to_string() } else { format!("{label}: {formula}") };
        lines.push(format!("Step {}: {head}\n{body}", k + 1));
    }
    let chain = parse_proof(&lines.join("\n"), Dialect::Symbolic);
    (!chain.malformed).then_some(chain)
}

fn fld(i: usize, v: &Value) -> Result<Problem, AdapterError> {
    let label = match string(i, v, &["proof_label", "world_assump_label", "label"])?.as_str() {
        "PROVED" | "T" => Label::T,
        "DISPROVED" | "F" => Label::F,
        "UNKNOWN" | "Unknown" => Label::Unknown,
        other => {
            return Err(AdapterError::Record {
                index: i,
                message: format!("unknown FLD label {other}"),
            })
        }
    };
    let facts = split_labelled_facts(&string(i, v, &["context"])?);
    let facts_formula = field(v, &["context_formula"])
        .and_then(Value::as_str)
        .map(split_labelled_facts)
        .and_then(|fs| fs.iter().map(|f| fld_formula(f)).collect::<Option<Vec<_>>>())
        .filter(|fs| fs.len() == facts.len());
    let hypothesis_formula = field(v, &["hypothesis_formula"]).and_then(Value::as_str).and_then(fld_formula);
    let depth = field(v, &["depth", "original_tree_depth"])
        .and_then(Value::as_u64)
        .map(|d| d as u32)
        .or((label == Label::Unknown).then_some(0));
    let gold_proof = field(v, &["proofs_formula"])
        .and_then(|p| match p {
            Value::Array(a) => a.first().and_then(Value::as_str),
            Value::String(s) => Some(s.as_str()),
            _ => None,
        })
        .filter(|s| !s.trim().is_empty())
        .and_then(|s| fld_proof(s, hypothesis_formula.as_deref()));
    Ok(Problem {
        id: id_of(i, v, &["id", "hash"]),
        dataset: DatasetKind::Fld,
        facts,
        facts_formula,
        hypothesis: string(i, v, &["hypothesis"])?,
        hypothesis_formula,
        label,
        depth,
        gold_proof,
    })
}

fn lines_or_list(v: &Value) -> Vec<String> {
    match v {
        Value::Array(a) => a.iter().filter_map(Value::as_str).map(|s| s.trim().to_string()).collect(),
        Value::String(s) => s.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect(),
        _ => Vec::new(),
    }
}

fn folio(i: usize, v: &Value) -> Result<Problem, AdapterError> {
    let label = match string(i, v, &["label"])?.as_str() {
        "True" => Label::T,
        "False" => Label::F,
        "Uncertain" | "Unknown" => Label::Unknown,
        other => {
            return Err(AdapterError::Record {
                index: i,
                message: format!("unknown FOLIO label {other}"),
            })
        }
    };
    let facts = lines_or_list(field(v, &["premises"]).unwrap_or(&Value::Null));
    if facts.is_empty() {
        return Err(AdapterError::Record {
            index: i,
            message: "no premises".into(),
        });
    }
    let canon = |s: &str| parse_formula(s).ok().map(|f| print_formula(&f));
    let facts_formula = field(v, &["premises-FOL", "premises_fol"])
        .map(lines_or_list)
        .and_then(|fs| fs.iter().map(|f| canon(f)).collect::<Option<Vec<_>>>())
        .filter(|fs| fs.len() == facts.len());
    Ok(Problem {
        id: id_of(i, v, &["example_id", "id"]),
        dataset: DatasetKind::Folio,
        facts,
        facts_formula,
        hypothesis: string(i, v, &["conclusion"])?,
        hypothesis_formula: field(v, &["conclusion-FOL", "conclusion_fol"]).and_then(Value::as_str).and_then(canon),
        label,
        depth: None,
        gold_proof: None,
    })
}

fn multilogieval(i: usize, v: &Value) -> Result<Problem, AdapterError> {
    let label = match string(i, v, &["answer", "label"])?.trim().to_ascii_lowercase().as_str() {
        "yes" => Label::T,
        "no" => Label::F,
        other => {
            return Err(AdapterError::Record {
                index: i,
                message: format!("unknown MultiLogiEval answer {other}"),
            })
        }
    };
    Ok(Problem {
        id: id_of(i, v, &["id"]),
        dataset: DatasetKind::MultiLogiEval,
        facts: split_sentences(&string(i, v, &["context"])?),
        facts_formula: None,
        hypothesis: string(i, v, &["question"])?,
        hypothesis_formula: None,
        label,
        depth: field(v, &["depth"]).and_then(Value::as_u64).map(|d| d as u32),
        gold_proof: None,
    })
}

static PRONTO_PREFIX: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^\s*(is the following statement true or false\?|true or false:)\s*").unwrap()
});

fn prontoqa(i: usize, v: &Value) -> Result<Problem, AdapterError> {
    let (context, query) = if field(v, &["query"]).is_some() {
        (string(i, v, &["question"])?, string(i, v, &["query"])?)
    } else {
        (string(i, v, &["context"])?, string(i, v, &["question"])?)
    };
    let label = match string(i, v, &["answer", "label"])?.trim() {
        "A" | "True" | "true" => Label::T,
        "B" | "False" | "false" => Label::F,
        other => {
            return Err(AdapterError::Record {
                index: i,
                message: format!("unknown ProntoQA answer {other}"),
            })
        }
    };
    Ok(Problem {
        id: id_of(i, v, &["id"]),
        dataset: DatasetKind::ProntoQa,
        facts: split_sentences(&context),
        facts_formula: None,
        hypothesis: PRONTO_PREFIX.replace(&query, "").trim().to_string(),
        hypothesis_formula: None,
        label,
        depth: field(v, &["depth"]).and_then(Value::as_u64).map(|d| d as u32),
        gold_proof: None,
    })
}
