//! Run configuration: one TOML file, `${VAR}` references expanded from the
//! environment before parsing.

use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::bench::{DatasetKind, PromptMode, DEFAULT_DEPTH_BINS};
use crate::endpoint::EndpointConfig;
use crate::logic::Budget;
use crate::probing::{CssReading, C_GRID};
use crate::proof::{Dialect, DEFAULT_ANSWER_TAG};
use crate::reward::{RewardMode, RewardWeights};
use crate::sft::SftStyle;

static VAR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}").unwrap());

/// Replaces every `${NAME}` with the variable's value. Unset variables are an
/// error.
pub fn interpolate(text: &str, lookup: impl Fn(&str) -> Option<String>) -> Result<String, CliError> {
    let mut missing = Vec::new();
    let out = VAR.replace_all(text, |c: &regex::Captures| match lookup(&c[1]) {
        Some(v) => v,
        None => {
            missing.push(c[1].to_string());
            String::new()
        }
    });
    if missing.is_empty() {
        Ok(out.into_owned())
    } else {
        Err(CliError::Config(format!("unset environment variables: {}", missing.join(", "))))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub dataset: Option<DatasetSection>,
    pub generator: Option<EndpointConfig>,
    pub judge: Option<EndpointConfig>,
    pub bench: BenchSection,
    pub steps: StepsSection,
    pub probe: ProbeSection,
    pub sft: SftSection,
    pub reward: RewardSection,
    pub report: ReportSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub out: PathBuf,
    pub seed: u64,
    /// Worker threads; 0 means one per core.
    pub jobs: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            out: PathBuf::from("run"),
            seed: 0,
            jobs: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub kind: DatasetKind,
    pub path: PathBuf,
    #[serde(default)]
    pub strict_counts: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub mode: PromptMode,
    pub answer_tag: String,
    /// JSONL of `{"problem": .., "solution": ..}` worked examples.
    pub exemplars: Option<PathBuf>,
    pub depth_bins: Vec<(u32, u32)>,
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection {
            mode: PromptMode::Cot,
            answer_tag: DEFAULT_ANSWER_TAG.into(),
            exemplars: None,
            depth_bins: DEFAULT_DEPTH_BINS.to_vec(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepsSection {
    /// Proof chains, one JSON object per line.
    pub chains: Option<PathBuf>,
    /// Benchmark records whose raw outputs are parsed as proofs.
    pub outputs: Option<PathBuf>,
    pub dialect: Dialect,
    pub budget: Option<Budget>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub dump: Option<PathBuf>,
    pub split: Option<PathBuf>,
    pub folds: usize,
    pub grid: Vec<f64>,
    pub reading: CssReading,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection {
            dump: None,
            split: None,
            folds: 5,
            grid: C_GRID.to_vec(),
            reading: CssReading::Suffix,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SftSection {
    /// Gold problems with glossaries, one JSON object per line.
    pub pool: Option<PathBuf>,
    /// Generate a synthetic pool instead of reading one.
    pub synthetic: bool,
    pub dataset: DatasetKind,
    pub styles: Vec<SftStyle>,
}

impl Default for SftSection {
    fn default() -> Self {
        SftSection {
            pool: None,
            synthetic: false,
            dataset: DatasetKind::Fld,
            styles: SftStyle::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardSection {
    /// Chain verdicts from `eval-steps`.
    pub verdicts: Option<PathBuf>,
    /// Benchmark records from `eval-bench`, for answer correctness.
    pub records: Option<PathBuf>,
    /// Optional per-problem prediction traces.
    pub traces: Option<PathBuf>,
    pub mode: RewardMode,
    pub weights: RewardWeights,
    pub reading: CssReading,
}

impl Default for RewardSection {
    fn default() -> Self {
        RewardSection {
            verdicts: None,
            records: None,
            traces: None,
            mode: RewardMode::Fractional,
            weights: RewardWeights::default(),
            reading: CssReading::Suffix,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    /// Report files to merge; defaults to every `*.json` in the run directory.
    pub inputs: Vec<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads, interpolates and parses a config file. Relative paths inside
    /// are resolved against the file's directory.
    pub fn load(path: &Path) -> Result<(RunConfig, String), CliError> {
        let raw = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let text = interpolate(&raw, |k| std::env::var(k).ok())?;
        let mut cfg = RunConfig::parse(&text)?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok((cfg, raw))
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let fix_opt = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                fix(p)
            }
        };
        fix(&mut self.run.out);
        if let Some(d) = &mut self.dataset {
            fix(&mut d.path);
        }
        for e in [&mut self.generator, &mut self.judge].into_iter().flatten() {
            fix_opt(&mut e.cache_dir);
        }
        fix_opt(&mut self.bench.exemplars);
        fix_opt(&mut self.steps.chains);
        fix_opt(&mut self.steps.outputs);
        fix_opt(&mut self.probe.dump);
        fix_opt(&mut self.probe.split);
        fix_opt(&mut self.sft.pool);
        fix_opt(&mut self.reward.verdicts);
        fix_opt(&mut self.reward.records);
        fix_opt(&mut self.reward.traces);
        self.report.inputs.iter_mut().for_each(fix);
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

pub(crate) fn require_file(what: &str, p: Option<&PathBuf>) -> Result<PathBuf, CliError> {
    let p = p.ok_or_else(|| CliError::Config(format!("{what} is not configured")))?;
    if !p.is_file() {
        return Err(CliError::Config(format!("{what}: {} does not exist", p.display())));
    }
    Ok(p.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation() {
        let env = |k: &str| (k == "HOME_DIR").then(|| "/data".to_string());
        assert_eq!(interpolate("p = \"${HOME_DIR}/x\"", env).unwrap(), "p = \"/data/x\"");
        assert!(matches!(interpolate("${NOPE}", env), Err(CliError::Config(m)) if m.contains("NOPE")));
        assert_eq!(interpolate("$HOME_DIR", env).unwrap(), "$HOME_DIR");
    }

    #[test]
    fn parse_sections() {
        let c = RunConfig::parse(
            r#"
[run]
seed = 7
[dataset]
kind = "FLD"
path = "fld.jsonl"
[generator]
url = "http://localhost:1"
text_pointer = "/choices/0/text"
[reward.weights]
w_v = 0.4
w_r = 0.2
w_a = 0.2
w_c = 0.2
[sft]
styles = ["NL", "SymbFilter"]
"#,
        )
        .unwrap();
        assert_eq!(c.run.seed, 7);
        assert_eq!(c.dataset.unwrap().kind, DatasetKind::Fld);
        assert_eq!(c.reward.weights.w_v, 0.4);
        assert_eq!(c.sft.styles, vec![SftStyle::Nl, SftStyle::SymbFilter]);
        assert!(RunConfig::parse("[run]\nbogus = 1").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }
}
