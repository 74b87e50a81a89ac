//! Representation probing: task construction, dump I/O, linear probes and
//! the CSS / balanced-accuracy scores.

pub mod builders;
pub mod dump;
pub mod probe;
pub mod score;
pub mod suite;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use builders::{build_css_prefixes, build_nsd_instances, build_rfi_instances, BuildError, Instance};
pub use dump::{read_dump, validate_dump, write_dump, Dump, DumpError, DumpHeader, RepresentationRecord};
pub use probe::{train_probe, Probe, ProbeConfig, ProbeError, C_GRID};
pub use score::{balanced_accuracy, css_score, trace_span, CssReading, PredictionTrace, ScoreError};
pub use suite::{run_probing_suite, SplitManifest, SuiteError, SuiteReport, TaskReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "CSS")]
    Css,
    #[serde(rename = "RFI")]
    Rfi,
    #[serde(rename = "NSD")]
    Nsd,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Css, Task::Rfi, Task::Nsd];

    pub fn name(self) -> &'static str {
        match self {
            Task::Css => "CSS",
            Task::Rfi => "RFI",
            Task::Nsd => "NSD",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Class of a probing record. The first variant of each pair is the
/// positive class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InstanceLabel {
    T,
    F,
    #[serde(rename = "necessary")]
    Necessary,
    #[serde(rename = "redundant")]
    Redundant,
    #[serde(rename = "derivable")]
    Derivable,
    #[serde(rename = "not_derivable")]
    NotDerivable,
}

impl InstanceLabel {
    pub fn is_positive(self) -> bool {
        matches!(self, InstanceLabel::T | InstanceLabel::Necessary | InstanceLabel::Derivable)
    }

    pub fn task(self) -> Task {
        match self {
            InstanceLabel::T | InstanceLabel::F => Task::Css,
            InstanceLabel::Necessary | InstanceLabel::Redundant => Task::Rfi,
            InstanceLabel::Derivable | InstanceLabel::NotDerivable => Task::Nsd,
        }
    }
}

/// Stable 64-bit hash of a problem id under a seed.
pub fn seeded_hash(problem_id: &str, seed: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(problem_id.as_bytes());
    h.update([0u8]);
    h.update(seed.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}
