//! Brute-force semantic entailment oracle.
//!
//! Enumerates every interpretation (constant denotations and predicate
//! extensions as bitmasks) over domains of size `1..=max_domain`. It shares no
//! evaluation code with the countermodel finder used by `entails`, so the two
//! can be cross-checked.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use super::formula::{Formula, Term};
use super::semantics::Interpretation;

/// Default cap on the number of interpretations enumerated.
pub const DEFAULT_INTERPRETATION_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("max-domain must be in [1, 4], got {0}")]
    DomainOutOfRange(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Inconclusive {
    /// No countermodel up to the bound, but the input is outside the
    /// monadic/ground fragment.
    OutsideFragment,
    /// The interpretation count exceeds the configured cap.
    CombinatorialLimit { count: u128, cap: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleOutcome {
    Entailed,
    Countermodel(Interpretation),
    Inconclusive(Inconclusive),
}

struct Signature {
    constants: Vec<String>,
    predicates: Vec<(String, usize)>,
}

/// Bitmask interpretation: `ext[p]` bit `i` is set when the `i`-th tuple
/// (mixed-radix index over the domain) is in predicate `p`.
struct Raw<'a> {
    size: usize,
    sig: &'a Signature,
    consts: Vec<usize>,
    ext: Vec<u64>,
}

impl Raw<'_> {
    fn value(&self, f: &Formula, env: &mut Vec<(String, usize)>) -> bool {
        match f {
            Formula::Falsum => false,
            Formula::Atom { pred, args } => {
                let p = self.sig.predicates.iter().position(|(n, _)| n == pred).unwrap();
                let mut index = 0usize;
                for t in args {
                    let e = match t {
                        Term::Const(c) => self.consts[self.sig.constants.iter().position(|n| n == c).unwrap()],
                        Term::Var(v) => env.iter().rev().find(|(n, _)| n == v).map(|(_, e)| *e).unwrap_or(0),
                    };
                    index = index * self.size + e;
                }
                self.ext[p] >> index & 1 == 1
            }
            Formula::Not(g) => !self.value(g, env),
            Formula::And(a, b) => self.value(a, env) & self.value(b, env),
            Formula::Or(a, b) => self.value(a, env) | self.value(b, env),
            Formula::Implies(a, b) => !self.value(a, env) | self.value(b, env),
            Formula::ForAll(v, g) => (0..self.size).all(|e| {
                env.push((v.clone(), e));
                let r = self.value(g, env);
                env.pop();
                r
            }),
            Formula::Exists(v, g) => (0..self.size).any(|e| {
                env.push((v.clone(), e));
                let r = self.value(g, env);
                env.pop();
                r
            }),
        }
    }

    fn to_interpretation(&self) -> Interpretation {
        let constants = self
            .sig
            .constants
            .iter()
            .cloned()
            .zip(self.consts.iter().copied())
            .collect();
        let mut relations = BTreeMap::new();
        for (p, (name, arity)) in self.sig.predicates.iter().enumerate() {
            let mut set = BTreeSet::new();
            let n_tuples = self.size.pow(*arity as u32);
            for idx in 0..n_tuples {
                if self.ext[p] >> idx & 1 == 1 {
                    let mut tuple = vec![0; *arity];
                    let mut rest = idx;
                    for slot in tuple.iter_mut().rev() {
                        *slot = rest % self.size;
                        rest /= self.size;
                    }
                    set.insert(tuple);
                }
            }
            relations.insert(name.clone(), set);
        }
        Interpretation {
            domain_size: self.size,
            constants,
            relations,
        }
    }
}

fn monadic_or_ground(formulas: &[&Formula]) -> bool {
    let quantified = formulas.iter().any(|f| f.has_quantifier());
    !quantified || formulas.iter().all(|f| f.predicates().values().all(|&a| a <= 1))
}

/// Number of interpretations over domain sizes `1..=max_domain`.
fn interpretation_count(sig: &Signature, max_domain: usize) -> u128 {
    let mut total: u128 = 0;
    for n in 1..=max_domain as u128 {
        let const_maps = n.saturating_pow(sig.constants.len() as u32);
        let bits: u128 = sig.predicates.iter().map(|(_, a)| n.pow(*a as u32)).sum();
        let exts = if bits >= 127 { u128::MAX } else { 1u128 << bits };
        total = total.saturating_add(const_maps.saturating_mul(exts));
    }
    total
}

pub fn semantic_entails_bruteforce(
    premises: &[Formula],
    conclusion: &Formula,
    max_domain: usize,
) -> Result<OracleOutcome, OracleError> {
    semantic_entails_bruteforce_with_cap(premises, conclusion, max_domain, DEFAULT_INTERPRETATION_CAP)
}

pub fn semantic_entails_bruteforce_with_cap(
    premises: &[Formula],
    conclusion: &Formula,
    max_domain: usize,
    cap: u64,
) -> Result<OracleOutcome, OracleError> {
    if !(1..=4).contains(&max_domain) {
        return Err(OracleError::DomainOutOfRange(max_domain));
    }
    let all: Vec<&Formula> = premises.iter().chain(std::iter::once(conclusion)).collect();
    let mut constants = BTreeSet::new();
    let mut predicates = BTreeMap::new();
    for f in &all {
        constants.extend(f.constants());
        predicates.extend(f.predicates());
    }
    let sig = Signature {
        constants: constants.into_iter().collect(),
        predicates: predicates.into_iter().collect(),
    };
    let count = interpretation_count(&sig, max_domain);
    if count > cap as u128 {
        return Ok(OracleOutcome::Inconclusive(Inconclusive::CombinatorialLimit { count, cap }));
    }

    for size in 1..=max_domain {
        let widths: Vec<u32> = sig.predicates.iter().map(|(_, a)| size.pow(*a as u32) as u32).collect();
        let n_consts = sig.constants.len();
        let const_maps = size.pow(n_consts as u32);
        for cm in 0..const_maps {
            let mut consts = vec![0; n_consts];
            let mut rest = cm;
            for slot in consts.iter_mut() {
                *slot = rest % size;
                rest /= size;
            }
            let mut raw = Raw {
                size,
                sig: &sig,
                consts,
                ext: vec![0; sig.predicates.len()],
            };
            loop {
                let premises_hold = premises.iter().all(|p| raw.value(p, &mut Vec::new()));
                if premises_hold && !raw.value(conclusion, &mut Vec::new()) {
                    return Ok(OracleOutcome::Countermodel(raw.to_interpretation()));
                }
                // Odometer increment over all extensions.
                let mut carried = true;
                for (p, w) in widths.iter().enumerate() {
                    let limit = 1u64 << w;
                    raw.ext[p] += 1;
                    if raw.ext[p] < limit {
                        carried = false;
                        break;
                    }
                    raw.ext[p] = 0;
                }
                if carried {
                    break;
                }
            }
        }
    }

    if monadic_or_ground(&all) {
        Ok(OracleOutcome::Entailed)
    } else {
        Ok(OracleOutcome::Inconclusive(Inconclusive::OutsideFragment))
    }
}
