use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use super::{MalformedStep, ProofChain, ProofStep, StepKind};

/// An assumption and the reductio step that discharges it (0-based indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub assumption: usize,
    pub discharge: usize,
}

impl Block {
    pub fn contains(&self, i: usize) -> bool {
        self.assumption <= i && i < self.discharge
    }
}

/// Pairs every assumption with its discharge. A reductio step discharges the
/// open assumption it cites, or the innermost one when it cites none.
pub fn assumption_blocks(steps: &[ProofStep]) -> Result<Vec<Block>, MalformedStep> {
    let mut open: Vec<usize> = Vec::new();
    let mut blocks = Vec::new();
    for (i, step) in steps.iter().enumerate() {
        let err = |reason: &str| MalformedStep {
            ordinal: i + 1,
            reason: reason.to_string(),
        };
        match step.kind {
            StepKind::Assumption => open.push(i),
            StepKind::ReductioDischarge => {
                let cited: Vec<usize> = open
                    .iter()
                    .copied()
                    .filter(|&a| step.premises.contains(&steps[a].label))
                    .collect();
                let target = match cited.as_slice() {
                    [] => *open.last().ok_or_else(|| err("reductio without an open assumption"))?,
                    [one] => *one,
                    _ => return Err(err("reductio cites more than one open assumption")),
                };
                if open.last() != Some(&target) {
                    return Err(err("reductio discharges an assumption that is not innermost"));
                }
                open.pop();
                blocks.push(Block {
                    assumption: target,
                    discharge: i,
                });
            }
            StepKind::FinalConclusion if !open.is_empty() => {
                return Err(err("final conclusion inside an undischarged assumption"));
            }
            _ => {}
        }
    }
    if let Some(&a) = open.first() {
        return Err(MalformedStep {
            ordinal: a + 1,
            reason: "assumption never discharged".into(),
        });
    }
    Ok(blocks)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Fact(String),
    Step(usize),
    /// A cited label that no earlier step or given fact provides.
    Missing(String),
}

/// How a premise label cited at some step resolves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Resolution {
    Step(usize),
    /// Candidate given fact; existence is checked against the fact table.
    Fact(String),
    OutOfScope(usize),
    Unresolved,
}

/// Earliest in-scope earlier step carrying `label`; re-derivations of a
/// label therefore never shadow the original.
pub(crate) fn resolve(steps: &[ProofStep], blocks: &[Block], at: usize, label: &str) -> Resolution {
    let mut out_of_scope = None;
    for (j, s) in steps[..at.min(steps.len())].iter().enumerate() {
        if s.label != label {
            continue;
        }
        if blocks.iter().any(|b| b.contains(j) && b.discharge < at) {
            out_of_scope.get_or_insert(j);
            continue;
        }
        return Resolution::Step(j);
    }
    if let Some(j) = out_of_scope {
        return Resolution::OutOfScope(j);
    }
    if label.starts_with("fact") {
        Resolution::Fact(label.to_string())
    } else {
        Resolution::Unresolved
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("chain is malformed")]
    Malformed,
    #[error("dependency cycle through step {0}")]
    CycleDetected(usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DependencyGraph {
    pub nodes: BTreeSet<Node>,
    /// `(source, target step index)`: the target cites the source.
    pub edges: BTreeSet<(Node, usize)>,
}

impl DependencyGraph {
    pub fn out_degree(&self, node: &Node) -> usize {
        self.edges.iter().filter(|(s, _)| s == node).count()
    }

    /// Every node reachable backwards from step `from`, including itself.
    pub fn closure(&self, from: usize) -> BTreeSet<Node> {
        let mut preds: BTreeMap<usize, Vec<&Node>> = BTreeMap::new();
        for (s, t) in &self.edges {
            preds.entry(*t).or_default().push(s);
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![Node::Step(from)];
        while let Some(n) = stack.pop() {
            if !seen.insert(n.clone()) {
                continue;
            }
            if let Node::Step(i) = n {
                for p in preds.get(&i).into_iter().flatten() {
                    stack.push((*p).clone());
                }
            }
        }
        seen
    }

    /// Given-fact labels in the closure of step `from`.
    pub fn fact_closure(&self, from: usize) -> BTreeSet<String> {
        self.closure(from)
            .into_iter()
            .filter_map(|n| match n {
                Node::Fact(f) => Some(f),
                _ => None,
            })
            .collect()
    }
}

pub fn dependency_graph(chain: &ProofChain) -> Result<DependencyGraph, GraphError> {
    if chain.malformed {
        return Err(GraphError::Malformed);
    }
    let blocks = assumption_blocks(&chain.steps).map_err(|_| GraphError::Malformed)?;
    let mut g = DependencyGraph::default();
    for (k, step) in chain.steps.iter().enumerate() {
        g.nodes.insert(Node::Step(k));
        for p in &step.premises {
            let source = match resolve(&chain.steps, &blocks, k, p) {
                Resolution::Step(j) | Resolution::OutOfScope(j) => {
                    if j >= k {
                        return Err(GraphError::CycleDetected(k + 1));
                    }
                    Node::Step(j)
                }
                Resolution::Fact(f) => Node::Fact(f),
                Resolution::Unresolved => Node::Missing(p.clone()),
            };
            g.nodes.insert(source.clone());
            g.edges.insert((source, k));
        }
    }
    Ok(g)
}
