mod common;

use std::collections::BTreeSet;

use logiceval::bench::{DatasetKind, Label};
use logiceval::logic::print_formula;
use logiceval::proof::{dependency_graph, extract_answer, parse_proof, render_chain, Answer, Dialect, Node, ProofChain};
use logiceval::sft::synth::{synth_problem, SynthSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Symbolic chain text with random labels (some repeated) and random
/// citations (some dangling). No assumption blocks.
fn random_chain_text(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=8);
    let mut labels: Vec<String> = Vec::new();
    let mut lines = Vec::new();
    for k in 1..=n {
        let mut refs = Vec::new();
        for _ in 0..rng.random_range(1..=3) {
            let r = match rng.random_range(0..6) {
                0..=2 if !labels.is_empty() => labels[rng.random_range(0..labels.len())].clone(),
                5 => format!("int{}", rng.random_range(50..60)),
                _ => format!("fact{}", rng.random_range(1..=6)),
            };
            if !refs.contains(&r) {
                refs.push(r);
            }
        }
        let label = if k == n {
            "hypothesis".to_string()
        } else if !labels.is_empty() && rng.random_bool(0.15) {
            labels[0].clone()
        } else {
            format!("int{k}")
        };
        let f = print_formula(&common::random_formula(&mut rng, 2, &mut Vec::new()));
        lines.push(format!("Step {k}: From {}, we derive:\n{label}: {f}", refs.join(", ")));
        labels.push(label);
    }
    if rng.random_bool(0.5) {
        lines.push(format!("Final conclusion: {}", Answer::ALL[rng.random_range(0..3)].marker()));
    }
    lines.join("\n")
}

fn gold_chain(seed: u64) -> ProofChain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = SynthSpec {
        dataset: DatasetKind::Fld,
        depth: rng.random_range(0..=10),
        label: [Label::T, Label::F, Label::Unknown][rng.random_range(0..3)],
        distractors: rng.random_range(0..=4),
        redundant_step: rng.random_bool(0.5),
    };
    synth_problem("g", &spec, seed).problem.gold_proof.unwrap()
}

fn shape(c: &ProofChain) -> Vec<(String, String, Vec<String>, String)> {
    c.steps
        .iter()
        .map(|s| (s.label.clone(), format!("{:?}", s.kind), s.premises.clone(), s.conclusion.clone()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn parse_proof_is_total(text in "\\PC*", natural in any::<bool>()) {
        let dialect = if natural { Dialect::Natural } else { Dialect::Symbolic };
        let _ = parse_proof(&text, dialect);
    }

    #[test]
    fn parse_proof_survives_mangled_chains(seed in any::<u64>(), cut in 0usize..400, junk in "[ \\n:A-Za-z0-9(),¬∧∨→∀∃⊥_]{0,20}") {
        let text = random_chain_text(seed);
        let mut at = cut.min(text.len());
        while !text.is_char_boundary(at) {
            at -= 1;
        }
        let mangled = format!("{}{junk}{}", &text[..at], &text[at..]);
        let _ = parse_proof(&mangled, Dialect::Symbolic);
        let _ = parse_proof(&mangled, Dialect::Natural);
    }

    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>(), gold in any::<bool>()) {
        let chain = if gold { gold_chain(seed) } else { parse_proof(&random_chain_text(seed), Dialect::Symbolic) };
        prop_assume!(!chain.malformed);
        let again = parse_proof(&render_chain(&chain), Dialect::Symbolic);
        prop_assert!(!again.malformed);
        prop_assert_eq!(shape(&again), shape(&chain));
        prop_assert_eq!(again.final_label, chain.final_label);
    }

    // Appended text starts with whitespace: an underscore glued to a marker
    // would make it a different token.
    #[test]
    fn answer_ignores_appended_text(seed in any::<u64>(), sep in "[ \\n\\t]", tail in "[A-Za-z0-9 .,:_\\n]{0,60}") {
        prop_assume!(Answer::ALL.iter().all(|a| !tail.contains(a.name())));
        let text = random_chain_text(seed);
        prop_assert_eq!(extract_answer(&format!("{text}{sep}{tail}")), extract_answer(&text));
    }

    #[test]
    fn graph_edges_are_exactly_the_citations(seed in any::<u64>(), gold in any::<bool>()) {
        let chain = if gold { gold_chain(seed) } else { parse_proof(&random_chain_text(seed), Dialect::Symbolic) };
        prop_assume!(!chain.malformed);
        let g = dependency_graph(&chain).unwrap();
        let mut expected = BTreeSet::new();
        for (k, s) in chain.steps.iter().enumerate() {
            for p in &s.premises {
                let source = match chain.steps[..k].iter().position(|e| &e.label == p) {
                    Some(j) => Node::Step(j),
                    None if p.starts_with("fact") => Node::Fact(p.clone()),
                    None => Node::Missing(p.clone()),
                };
                expected.insert((source, k));
            }
        }
        prop_assert_eq!(g.edges, expected);
    }
}
