//! First-order formulas, the inference-rule catalog and entailment checking.

pub mod formula;
pub mod oracle;
pub mod parse;
pub mod rules;
pub mod search;
pub mod semantics;

pub use formula::{alpha_eq, normalize, print_formula, Formula, Term};
pub use oracle::{semantic_entails_bruteforce, OracleOutcome};
pub use parse::{parse_batch, parse_formula, ParseError};
pub use rules::{RuleApplication, RuleId};
pub use search::{check_atomic, entails, AtomicCheck, Budget, EntailError, EntailmentStatus, EntailmentVerdict};
pub use semantics::Interpretation;
