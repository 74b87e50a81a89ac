use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;

use super::graph::assumption_blocks;
use super::{extract_answer, is_hypothesis_label, Dialect, MalformedStep, ProofChain, ProofStep, StepKind};
use crate::logic::{parse_formula, print_formula, Formula};

static HEADER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*[*#]*\s*step\s*(\d+)\s*\**\s*[:.)]\s*\**\s*(.*?)\s*$").unwrap());
static LABELED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*(?:[-*]\s*)?((?:fact|int|assump)\d+|¬?hypothesis)\s*:\s*(.*?)\s*$").unwrap());
static INLINE_LABELED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i):\s*((?:fact|int|assump)\d+|¬?hypothesis)\s*:\s*(.+?)\s*$").unwrap());
static REF: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b((?:fact|int|assump)\d+|hypothesis|step\s*\d+)\b").unwrap());
static TERMINATOR: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*(final conclusion\s*:|the search path has been exhausted)").unwrap());

pub fn parse_proof(text: &str, dialect: Dialect) -> ProofChain {
    parse_proof_with_facts(text, dialect, &[])
}

struct Block<'a> {
    number: usize,
    header: &'a str,
    body: Vec<&'a str>,
}

/// Parses a stepwise solution. `known_facts` (label, sentence) lets the
/// natural dialect recover premises restated verbatim without a label.
pub fn parse_proof_with_facts(text: &str, dialect: Dialect, known_facts: &[(String, String)]) -> ProofChain {
    let mut chain = ProofChain {
        problem_id: String::new(),
        dialect,
        steps: Vec::new(),
        final_label: extract_answer(text),
        malformed: false,
        errors: Vec::new(),
        facts: BTreeMap::new(),
        raw_text: text.to_string(),
    };

    let mut blocks: Vec<Block> = Vec::new();
    let mut closed = false;
    for line in text.lines() {
        if let Some(c) = HEADER.captures(line) {
            closed = false;
            blocks.push(Block {
                number: c[1].parse().unwrap_or(usize::MAX),
                header: c.get(2).map_or("", |m| m.as_str()),
                body: Vec::new(),
            });
            continue;
        }
        if TERMINATOR.is_match(line) {
            closed = true;
            continue;
        }
        match blocks.last_mut() {
            Some(b) if !closed => {
                if !line.trim().is_empty() {
                    b.body.push(line.trim());
                }
            }
            None => {
                if let Some(c) = LABELED.captures(line) {
                    let label = c[1].to_lowercase();
                    if label.starts_with("fact") {
                        chain.facts.insert(label, c[2].to_string());
                    }
                }
            }
            _ => {}
        }
    }

    let folded_facts: Vec<(String, String)> =
        known_facts.iter().map(|(l, s)| (l.clone(), fold(s))).collect();
    for (i, block) in blocks.iter().enumerate() {
        let ordinal = i + 1;
        if block.number != ordinal {
            chain.errors.push(MalformedStep {
                ordinal,
                reason: format!("expected step number {ordinal}, found {}", block.number),
            });
        }
        match parse_step(ordinal, block, &blocks[..i], &chain.steps, dialect, &folded_facts) {
            Ok(step) => chain.steps.push(step),
            Err((reason, step)) => {
                chain.errors.push(MalformedStep { ordinal, reason });
                chain.steps.push(step);
            }
        }
    }

    if let Some(last_final) = chain
        .steps
        .iter()
        .rposition(|s| s.kind == StepKind::Derivation && is_hypothesis_label(&s.label))
    {
        chain.steps[last_final].kind = StepKind::FinalConclusion;
    }
    for s in &chain.steps {
        if matches!(s.kind, StepKind::Derivation | StepKind::FinalConclusion) && s.premises.is_empty() {
            chain.errors.push(MalformedStep {
                ordinal: s.ordinal,
                reason: "derivation cites no premises".into(),
            });
        }
    }
    if let Err(e) = assumption_blocks(&chain.steps) {
        chain.errors.push(e);
    }
    chain.errors.sort_by_key(|e| e.ordinal);
    chain.malformed = !chain.errors.is_empty();
    chain
}

fn fold(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
        .trim_end_matches(['.', '!'])
        .to_string()
}

fn natural_restatements(explanation: &str, facts: &[(String, String)], out: &mut Vec<String>) {
    const LEADS: [&str; 6] = ["since ", "because ", "given that ", "we know that ", "and ", "as "];
    for piece in explanation.split(['.', ';', ',']) {
        let mut p = fold(piece);
        for lead in LEADS {
            if let Some(rest) = p.strip_prefix(lead) {
                p = rest.to_string();
            }
        }
        if p.is_empty() {
            continue;
        }
        for (label, sentence) in facts {
            if *sentence == p && !out.contains(label) {
                out.push(label.clone());
            }
        }
    }
}

type StepResult = Result<ProofStep, (String, ProofStep)>;

fn parse_step(
    ordinal: usize,
    block: &Block,
    earlier_blocks: &[Block],
    earlier_steps: &[ProofStep],
    dialect: Dialect,
    facts: &[(String, String)],
) -> StepResult {
    let mut explanation = block.header.to_string();
    let mut labeled: Vec<(String, String)> = Vec::new();
    let mut plain: Vec<&str> = Vec::new();
    for line in &block.body {
        match LABELED.captures(line) {
            Some(c) => labeled.push((c[1].to_lowercase(), c[2].to_string())),
            None => plain.push(line),
        }
    }
    if labeled.is_empty() {
        let whole = LABELED.captures(block.header).map(|c| (c.get(0).unwrap().start(), c));
        let inline = INLINE_LABELED.captures(block.header).map(|c| (c.get(0).unwrap().start(), c));
        if let Some((start, c)) = whole.or(inline) {
            labeled.push((c[1].to_lowercase(), c[2].to_string()));
            explanation = block.header[..start].trim().to_string();
        }
    }

    let mut step = ProofStep {
        ordinal,
        label: format!("step{ordinal}"),
        kind: StepKind::Derivation,
        premises: Vec::new(),
        conclusion: String::new(),
        text: explanation.clone(),
        formula: None,
    };

    let mut problem: Option<String> = None;
    let conclusion_text = if labeled.len() > 1 {
        problem = Some("more than one labelled conclusion".into());
        labeled[0].1.clone()
    } else if let Some((label, text)) = labeled.first() {
        step.label = label.clone();
        text.clone()
    } else if plain.iter().any(|l| *l == "⊥") {
        "⊥".to_string()
    } else if let Some(first) = plain.first() {
        first.to_string()
    } else if dialect == Dialect::Natural && !explanation.is_empty() {
        explanation.clone()
    } else {
        problem = Some("missing conclusion".into());
        String::new()
    };

    for m in REF.find_iter(&explanation) {
        let raw: String = m.as_str().to_lowercase().split_whitespace().collect();
        let label = match raw.strip_prefix("step").and_then(|n| n.parse::<usize>().ok()) {
            Some(n) => match earlier_blocks.iter().position(|b| b.number == n) {
                Some(j) => earlier_steps[j].label.clone(),
                None => raw,
            },
            None => raw,
        };
        let dangling_hypothesis = label == "hypothesis" && !earlier_steps.iter().any(|s| s.label == label);
        if label != step.label && !dangling_hypothesis && !step.premises.contains(&label) {
            step.premises.push(label);
        }
    }
    if dialect == Dialect::Natural {
        natural_restatements(&explanation, facts, &mut step.premises);
        step.premises.retain(|p| *p != step.label);
    }

    let lower = explanation.to_lowercase();
    let falsum = conclusion_text.trim() == "⊥";
    step.kind = if lower.contains("reductio") {
        StepKind::ReductioDischarge
    } else if lower.contains("assume") || (step.label.starts_with("assump") && step.premises.is_empty()) {
        StepKind::Assumption
    } else if falsum {
        StepKind::Contradiction
    } else if step.label.starts_with("fact") && step.premises.is_empty() {
        StepKind::GivenFact
    } else {
        StepKind::Derivation
    };
    if step.kind == StepKind::Assumption {
        step.premises.clear();
    }

    if falsum {
        step.conclusion = "⊥".into();
        step.formula = Some(Formula::Falsum);
    } else if dialect == Dialect::Symbolic && problem.is_none() {
        match parse_formula(&conclusion_text) {
            Ok(f) => {
                step.conclusion = print_formula(&f);
                step.formula = Some(f);
            }
            Err(e) => {
                step.conclusion = conclusion_text;
                problem = Some(format!("conclusion does not parse: {e}"));
            }
        }
    } else {
        step.conclusion = conclusion_text;
    }
    if step.kind == StepKind::Contradiction && !falsum {
        problem.get_or_insert_with(|| "contradiction step must conclude ⊥".into());
    }

    match problem {
        Some(p) => Err((p, step)),
        None => Ok(step),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_step() {
        let c = parse_proof("Step 1: From fact1, fact2, we derive:\nint1: B(a)", Dialect::Symbolic);
        assert!(!c.malformed);
        let s = &c.steps[0];
        assert_eq!(s.kind, StepKind::Derivation);
        assert_eq!(s.label, "int1");
        assert_eq!(s.premises, vec!["fact1", "fact2"]);
        assert_eq!(s.conclusion, "B(a)");
    }

    #[test]
    fn assumption_step() {
        let c = parse_proof("Step 1: Assume for contradiction:\nassump1: A(b)", Dialect::Symbolic);
        assert_eq!(c.steps[0].kind, StepKind::Assumption);
        assert_eq!(c.steps[0].label, "assump1");
        assert!(c.malformed, "an undischarged assumption flags the chain");
    }

    #[test]
    fn empty_input() {
        let c = parse_proof("", Dialect::Symbolic);
        assert_eq!(c.len(), 0);
        assert!(!c.malformed);
    }

    #[test]
    fn unparseable_conclusion_is_malformed_not_fatal() {
        let c = parse_proof("Step 1: From fact1, we derive:\nint1: B(a", Dialect::Symbolic);
        assert!(c.malformed);
        assert_eq!(c.errors[0].ordinal, 1);
    }

    #[test]
    fn preamble_facts_and_final_marker() {
        let text = "fact1: ∀x (A(x) → B(x))\nfact2: A(a)\nHypothesis: B(a)\n\
                    Step 1: From fact1, fact2, we derive:\nhypothesis: B(a)\nFinal conclusion: __PROVED__";
        let c = parse_proof(text, Dialect::Symbolic);
        assert_eq!(c.facts.len(), 2);
        assert_eq!(c.steps.len(), 1);
        assert_eq!(c.steps[0].kind, StepKind::FinalConclusion);
        assert_eq!(c.final_label, Some(super::super::Answer::Proved));
    }

    #[test]
    fn step_number_references() {
        let text = "Step 1: From fact1, fact2, we derive:\nint1: B(a)\n\
                    Step 2: Using Step 1 and fact3, we derive:\nint2: C(a)";
        let c = parse_proof(text, Dialect::Symbolic);
        assert_eq!(c.steps[1].premises, vec!["int1", "fact3"]);
    }

    #[test]
    fn inline_label_on_header() {
        let c = parse_proof("Step 1: From fact1, we derive: int1: B(a)", Dialect::Symbolic);
        assert!(!c.malformed, "{:?}", c.errors);
        assert_eq!(c.steps[0].label, "int1");
        assert_eq!(c.steps[0].premises, vec!["fact1"]);
    }

    #[test]
    fn natural_restatement_matching() {
        let facts = vec![
            ("fact1".to_string(), "Every wug is a blick.".to_string()),
            ("fact2".to_string(), "Max is a wug.".to_string()),
        ];
        let text = "Step 1: Since every wug is a blick, and  MAX is a wug.\nint1: Max is a blick.";
        let c = parse_proof_with_facts(text, Dialect::Natural, &facts);
        assert_eq!(c.steps[0].premises, vec!["fact1", "fact2"]);
        assert_eq!(c.steps[0].conclusion, "Max is a blick.");
    }

    #[test]
    fn numbering_gap_is_malformed() {
        let c = parse_proof(
            "Step 1: From fact1, we derive:\nint1: A\nStep 3: From int1, we derive:\nint2: A",
            Dialect::Symbolic,
        );
        assert!(c.malformed);
    }
}
