//! Probing instances built from gold proofs. Every prefix starts with the full
//! problem statement (facts, then hypothesis).

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{seeded_hash, InstanceLabel, Task};
use crate::bench::{render_facts, Label, Problem};
use crate::proof::{dependency_graph, render_step, ProofChain, ProofStep, StepKind};

/// One prefix to be encoded by the extractor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub problem_id: String,
    pub task: Task,
    pub step_index: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_id: Option<String>,
    pub label: InstanceLabel,
    pub prefix_text: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("problem {0} has no gold proof")]
    MissingGoldProof(String),
    #[error("problem {0}: gold proof is malformed")]
    MalformedGoldProof(String),
    #[error("problem {id}: label {label:?} has no probing class")]
    UnsupportedLabel { id: String, label: Label },
    #[error("problem {id}: {have} {kind} facts, need {need}")]
    InsufficientFacts {
        id: String,
        kind: &'static str,
        have: usize,
        need: usize,
    },
    #[error("problem {id}: {have} usable anchors, need {need}")]
    InsufficientCandidates { id: String, have: usize, need: usize },
}

pub const RFI_PER_CLASS: usize = 3;
pub const NSD_ANCHORS: usize = 6;
pub const NSD_PER_CLASS: usize = 3;

fn gold(problem: &Problem) -> Result<&ProofChain, BuildError> {
    let g = problem
        .gold_proof
        .as_ref()
        .filter(|g| !g.is_empty())
        .ok_or_else(|| BuildError::MissingGoldProof(problem.id.clone()))?;
    if g.malformed {
        return Err(BuildError::MalformedGoldProof(problem.id.clone()));
    }
    Ok(g)
}

pub fn problem_statement(problem: &Problem) -> String {
    format!("Facts:{}\nHypothesis:{}", render_facts(&problem.facts), problem.hypothesis)
}

fn with_steps(statement: &str, steps: &[ProofStep]) -> String {
    let mut out = statement.to_string();
    for s in steps {
        out.push('\n');
        out.push_str(&render_step(s));
    }
    out
}

fn rng_for(problem: &Problem, seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seeded_hash(&problem.id, seed))
}

/// Prefix `i` holds the statement and gold steps `1..=i`.
pub fn build_css_prefixes(problem: &Problem) -> Result<Vec<Instance>, BuildError> {
    let g = gold(problem)?;
    let label = match problem.label {
        Label::T => InstanceLabel::T,
        Label::F => InstanceLabel::F,
        Label::Unknown => {
            return Err(BuildError::UnsupportedLabel {
                id: problem.id.clone(),
                label: problem.label,
            })
        }
    };
    let statement = problem_statement(problem);
    Ok((1..=g.steps.len())
        .map(|i| Instance {
            problem_id: problem.id.clone(),
            task: Task::Css,
            step_index: i as u32,
            candidate_id: None,
            label,
            prefix_text: with_steps(&statement, &g.steps[..i]),
        })
        .collect())
}

/// Necessary facts are those in the dependency closure of the concluding
/// step; the rest are redundant.
pub fn fact_pools(problem: &Problem) -> Result<(Vec<usize>, Vec<usize>), BuildError> {
    let g = gold(problem)?;
    let graph = dependency_graph(g).map_err(|_| BuildError::MalformedGoldProof(problem.id.clone()))?;
    let terminal = g.terminal_step().expect("chain is nonempty");
    let used: BTreeSet<String> = graph.fact_closure(terminal);
    Ok((0..problem.facts.len()).partition(|i| used.contains(&format!("fact{}", i + 1))))
}

pub fn build_rfi_instances(problem: &Problem, seed: u64) -> Result<Vec<Instance>, BuildError> {
    let (necessary, redundant) = fact_pools(problem)?;
    for (kind, pool) in [("necessary", &necessary), ("redundant", &redundant)] {
        if pool.len() < RFI_PER_CLASS {
            return Err(BuildError::InsufficientFacts {
                id: problem.id.clone(),
                kind,
                have: pool.len(),
                need: RFI_PER_CLASS,
            });
        }
    }
    let mut rng = rng_for(problem, seed);
    let statement = problem_statement(problem);
    let mut out = Vec::with_capacity(2 * RFI_PER_CLASS);
    for (pool, label) in [(&necessary, InstanceLabel::Necessary), (&redundant, InstanceLabel::Redundant)] {
        for &i in pool.choose_multiple(&mut rng, RFI_PER_CLASS) {
            let fact = format!("fact{}", i + 1);
            out.push(Instance {
                problem_id: problem.id.clone(),
                task: Task::Rfi,
                step_index: 0,
                candidate_id: Some(fact.clone()),
                label,
                prefix_text: format!("{statement}\n{fact}: {}", problem.facts[i]),
            });
        }
    }
    Ok(out)
}

/// Whether every premise of `cand` is a fact or a label concluded by one of
/// the first `t` steps.
fn derivable_at(steps: &[ProofStep], t: usize, cand: &ProofStep) -> bool {
    cand.premises
        .iter()
        .all(|p| p.starts_with("fact") || steps[..t].iter().any(|s| &s.label == p))
}

/// Later steps split by derivability at anchor `t` (steps `1..=t` shown).
pub fn nsd_candidates(steps: &[ProofStep], t: usize) -> (Vec<usize>, Vec<usize>) {
    (t..steps.len())
        .filter(|&j| matches!(steps[j].kind, StepKind::Derivation | StepKind::FinalConclusion))
        .partition(|&j| derivable_at(steps, t, &steps[j]))
}

pub fn build_nsd_instances(problem: &Problem, seed: u64) -> Result<Vec<Instance>, BuildError> {
    let g = gold(problem)?;
    let usable: Vec<usize> = (1..g.steps.len())
        .filter(|&t| {
            let (ok, bad) = nsd_candidates(&g.steps, t);
            ok.len() >= NSD_PER_CLASS && bad.len() >= NSD_PER_CLASS
        })
        .collect();
    if usable.len() < NSD_ANCHORS {
        return Err(BuildError::InsufficientCandidates {
            id: problem.id.clone(),
            have: usable.len(),
            need: NSD_ANCHORS,
        });
    }
    let mut rng = rng_for(problem, seed);
    let mut anchors: Vec<usize> = usable.choose_multiple(&mut rng, NSD_ANCHORS).copied().collect();
    anchors.sort_unstable();
    let statement = problem_statement(problem);
    let mut out = Vec::with_capacity(NSD_ANCHORS * 2 * NSD_PER_CLASS);
    for t in anchors {
        let prefix = with_steps(&statement, &g.steps[..t]);
        let (ok, bad) = nsd_candidates(&g.steps, t);
        for (pool, label) in [(&ok, InstanceLabel::Derivable), (&bad, InstanceLabel::NotDerivable)] {
            for &j in pool.choose_multiple(&mut rng, NSD_PER_CLASS) {
                let mut cand = g.steps[j].clone();
                cand.ordinal = t + 1;
                out.push(Instance {
                    problem_id: problem.id.clone(),
                    task: Task::Nsd,
                    step_index: t as u32,
                    candidate_id: Some(g.steps[j].label.clone()),
                    label,
                    prefix_text: format!("{prefix}\n{}", render_step(&cand)),
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::DatasetKind;
    use crate::proof::{parse_proof, Dialect};

    fn problem(n_facts: usize, proof: &str) -> Problem {
        Problem {
            id: "p1".into(),
            dataset: DatasetKind::Fld,
            facts: (1..=n_facts).map(|i| format!("sentence {i}.")).collect(),
            facts_formula: None,
            hypothesis: "H.".into(),
            hypothesis_formula: None,
            label: Label::T,
            depth: Some(2),
            gold_proof: Some(parse_proof(proof, Dialect::Symbolic)),
        }
    }

    /// A chain of `n` derivations; step k cites fact k and the previous step.
    fn long_chain(n: usize) -> String {
        (1..=n)
            .map(|k| {
                let refs = if k == 1 { "fact1".to_string() } else { format!("fact{k}, int{}", k - 1) };
                let label = if k == n { "hypothesis".to_string() } else { format!("int{k}") };
                format!("Step {k}: From {refs}, we derive:\n{label}: A{k}(a)")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn css_prefixes_grow() {
        let p = problem(3, &long_chain(3));
        let xs = build_css_prefixes(&p).unwrap();
        assert_eq!(xs.len(), 3);
        assert!(xs.windows(2).all(|w| w[0].prefix_text.len() < w[1].prefix_text.len()));
        assert!(xs[2].prefix_text.ends_with("hypothesis: A3(a)"));
        assert!(xs[0].prefix_text.starts_with("Facts:fact1: sentence 1."));
        let mut none = p.clone();
        none.gold_proof = None;
        assert_eq!(build_css_prefixes(&none), Err(BuildError::MissingGoldProof("p1".into())));
    }

    #[test]
    fn rfi_pools_and_seeding() {
        let proof = "Step 1: From fact1, fact3, we derive:\nint1: B(a)\nStep 2: From int1, fact5, we derive:\nhypothesis: C(a)";
        let p = problem(8, proof);
        let (nec, red) = fact_pools(&p).unwrap();
        assert_eq!(nec, vec![0, 2, 4]);
        assert_eq!(red, vec![1, 3, 5, 6, 7]);
        let a = build_rfi_instances(&p, 7).unwrap();
        assert_eq!(a.len(), 6);
        assert_eq!(a.iter().filter(|i| i.label == InstanceLabel::Necessary).count(), 3);
        assert_eq!(a, build_rfi_instances(&p, 7).unwrap());

        let short = problem(5, proof);
        assert!(matches!(
            build_rfi_instances(&short, 7),
            Err(BuildError::InsufficientFacts { kind: "redundant", have: 2, need: 3, .. })
        ));
    }

    #[test]
    fn nsd_derivability() {
        let p = problem(20, &long_chain(3));
        let steps = &p.gold_proof.as_ref().unwrap().steps;
        // At t=1, step 2 (cites int1) is derivable and step 3 (cites int2) is not.
        assert_eq!(nsd_candidates(steps, 1), (vec![1], vec![2]));
        assert!(matches!(
            build_nsd_instances(&p, 1),
            Err(BuildError::InsufficientCandidates { have: 0, .. })
        ));
    }

    #[test]
    fn nsd_counts() {
        // Fact-only steps stay derivable; int-citing steps become derivable
        // once their source appears.
        let mut lines = Vec::new();
        for k in 1..=10 {
            lines.push(format!("Step {k}: From fact{k}, we derive:\nint{k}: A{k}(a)"));
        }
        for k in 11..=20 {
            lines.push(format!("Step {k}: From int{}, int{}, we derive:\nint{k}: B{k}(a)", k - 10, k - 1));
        }
        let p = problem(10, &lines.join("\n"));
        let xs = build_nsd_instances(&p, 3).unwrap();
        assert_eq!(xs.len(), 36);
        let anchors: BTreeSet<u32> = xs.iter().map(|x| x.step_index).collect();
        assert_eq!(anchors.len(), 6);
        assert_eq!(xs, build_nsd_instances(&p, 3).unwrap());
    }
}
