use super::{ProofChain, ProofStep, StepKind};

/// Canonical text of one step, in the "Step k: explanation" / "label: formula"
/// two-line layout.
pub fn render_step(step: &ProofStep) -> String {
    let refs = step.premises.join(", ");
    let head = match step.kind {
        StepKind::Assumption => "Assume for contradiction:".to_string(),
        StepKind::GivenFact => "Given:".to_string(),
        StepKind::Contradiction if refs.is_empty() => "Contradiction:".to_string(),
        StepKind::Contradiction => format!("Contradiction from {refs}:"),
        StepKind::ReductioDischarge if refs.is_empty() => "By reductio ad absurdum:".to_string(),
        StepKind::ReductioDischarge => format!("By reductio ad absurdum from {refs}:"),
        StepKind::Derivation | StepKind::FinalConclusion => format!("From {refs}, we derive:"),
    };
    let body = if step.label.starts_with("step") {
        step.conclusion.clone()
    } else {
        format!("{}: {}", step.label, step.conclusion)
    };
    format!("Step {}: {head}\n{body}", step.ordinal)
}

pub fn render_chain(chain: &ProofChain) -> String {
    let mut lines: Vec<String> = chain.steps.iter().map(render_step).collect();
    if let Some(answer) = chain.final_label {
        lines.push(format!("Final conclusion: {}", answer.marker()));
    }
    lines.join("\n")
}
