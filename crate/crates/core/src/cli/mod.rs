//! Command-line driver. Every subcommand reads the shared config, writes its
//! outputs into the run directory, and leaves a manifest with digests of all
//! inputs and outputs next to them.

pub mod config;

use std::collections::{BTreeMap, HashMap};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bench::{self, AccuracyRow, CountCheck, EvalRecord, Problem};
use crate::endpoint::HttpCompleter;
use crate::logic::parse_formula;
use crate::probing::{self, PredictionTrace, ProbeConfig, SplitManifest};
use crate::proof::{parse_proof, Dialect, ProofChain};
use crate::reward::{reward_batch, RewardCase};
use crate::sft::{self, synth::synth_pool, CorpusManifest, GoldProblem};
use crate::steps::{self, ChainVerdict, CheckerConfig, FactTable, RemoteJudge, StepJudge};
pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0:#}")]
    Internal(#[from] anyhow::Error),
    #[error("{failed} of {total} records failed")]
    Partial { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Config(_) => 2,
            CliError::Partial { .. } => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Internal(_) => "internal",
            CliError::Config(_) => "config",
            CliError::Partial { .. } => "partial",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"error": self.kind(), "message": self.to_string(), "exit_code": self.exit_code()})
    }
}

#[derive(Debug, Parser)]
#[command(name = "logiceval", version, about = "Evaluate logical reasoning chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run directory; overrides `run.out`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; overrides `run.jobs`.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    pub dry_run: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Prompt a model on a benchmark and score final answers.
    EvalBench,
    /// Check proof chains step by step.
    EvalSteps,
    /// Train and score probes on a representation dump.
    Probe,
    /// Build supervised fine-tuning corpora.
    GenSft,
    /// Compute rewards from benchmark records and chain verdicts.
    Reward,
    /// Merge JSON reports into a plain-text and CSV summary.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::EvalBench => "eval-bench",
            Command::EvalSteps => "eval-steps",
            Command::Probe => "probe",
            Command::GenSft => "gen-sft",
            Command::Reward => "reward",
            Command::Report => "report",
        }
    }
}

/// What a run read and wrote, enough to repeat it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Ctx {
    fn input(&mut self, p: &Path) -> PathBuf {
        self.inputs.push(p.to_path_buf());
        p.to_path_buf()
    }

    fn write(&mut self, name: &str, body: &[u8]) -> anyhow::Result<()> {
        let p = self.out.join(name);
        fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
        self.outputs.push(p);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, v: &T) -> anyhow::Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    fn write_jsonl<T: Serialize>(&mut self, name: &str, items: &[T]) -> anyhow::Result<()> {
        let mut s = String::new();
        for it in items {
            s.push_str(&serde_json::to_string(it)?);
            s.push('\n');
        }
        self.write(name, s.as_bytes())
    }

    fn write_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> anyhow::Result<()> {
        let mut buf = Vec::new();
        bench::metrics::write_csv(rows, &mut buf)?;
        self.write(name, &buf)
    }
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), i + 1))))
        .collect()
}

fn load_problems(ctx: &mut Ctx) -> Result<Option<Vec<Problem>>, CliError> {
    let Some(d) = ctx.cfg.dataset.clone() else {
        return Ok(None);
    };
    let path = config::require_file("dataset.path", Some(&d.path))?;
    ctx.input(&path);
    let check = if d.strict_counts { CountCheck::Strict } else { CountCheck::Lenient };
    bench::load_dataset(&path, d.kind, check)
        .map(Some)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn fact_table(problem: Option<&Problem>) -> FactTable {
    let Some(p) = problem else {
        return FactTable::default();
    };
    match &p.facts_formula {
        Some(ff) => {
            let mut t = FactTable::from_sentences(&p.facts);
            for (i, f) in ff.iter().enumerate() {
                if let Some(e) = t.entries.get_mut(&format!("fact{}", i + 1)) {
                    e.formula = parse_formula(f).ok();
                }
            }
            t
        }
        None => FactTable::from_sentences(&p.facts),
    }
}

fn eval_bench(ctx: &mut Ctx) -> Result<(), CliError> {
    let problems = load_problems(ctx)?.ok_or_else(|| CliError::Config("dataset is not configured".into()))?;
    let gen = ctx
        .cfg
        .generator
        .clone()
        .ok_or_else(|| CliError::Config("generator endpoint is not configured".into()))?;
    let bc = ctx.cfg.bench.clone();
    let exemplars = match &bc.exemplars {
        Some(p) => {
            let p = ctx.input(p);
            #[derive(Deserialize)]
            struct Ex {
                problem: Problem,
                solution: String,
            }
            read_jsonl::<Ex>(&p)?
                .iter()
                .map(|e| bench::render_exemplar(&e.problem, &e.solution))
                .collect()
        }
        None => Vec::new(),
    };
    let completer = HttpCompleter::new(gen).map_err(|e| CliError::Config(e.to_string()))?;
    let records = bench::run_eval(&problems, &completer, bc.mode, &exemplars, &bc.answer_tag)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let dataset = ctx.cfg.dataset.as_ref().map(|d| d.kind.name()).unwrap_or("custom");
    ctx.write_jsonl("eval_records.jsonl", &records)?;
    let row = AccuracyRow::new(dataset, bc.mode.name(), &records).context("accuracy")?;
    ctx.write_json("accuracy.json", &row)?;
    ctx.write_csv("accuracy.csv", std::slice::from_ref(&row))?;
    if problems.iter().all(|p| p.depth.is_some()) {
        let mut rows = bench::accuracy_by_depth(&records, &problems, &bc.depth_bins).context("depth bins")?;
        for r in &mut rows {
            r.dataset = dataset.into();
            r.mode = bc.mode.name().into();
        }
        ctx.write_json("accuracy_by_depth.json", &rows)?;
        ctx.write_csv("accuracy_by_depth.csv", &rows)?;
    }
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        return Err(CliError::Partial {
            failed,
            total: records.len(),
        });
    }
    Ok(())
}

fn eval_steps(ctx: &mut Ctx) -> Result<(), CliError> {
    let problems = load_problems(ctx)?.unwrap_or_default();
    let by_id: HashMap<&str, &Problem> = problems.iter().map(|p| (p.id.as_str(), p)).collect();
    let sc = ctx.cfg.steps.clone();
    let chains: Vec<ProofChain> = match (&sc.chains, &sc.outputs) {
        (Some(p), _) => {
            let p = config::require_file("steps.chains", Some(p))?;
            ctx.input(&p);
            let text = fs::read_to_string(&p).context("reading chains")?;
            text.lines()
                .filter(|l| !l.trim().is_empty())
                .enumerate()
                .map(|(i, l)| ProofChain::from_json_line(l).map_err(|e| CliError::Config(format!("chain {}: {e}", i + 1))))
                .collect::<Result<_, _>>()?
        }
        (None, Some(p)) => {
            let p = config::require_file("steps.outputs", Some(p))?;
            ctx.input(&p);
            read_jsonl::<EvalRecord>(&p)?
                .into_iter()
                .map(|r| {
                    let mut c = parse_proof(&r.raw_output, sc.dialect);
                    c.problem_id = r.problem_id;
                    c
                })
                .collect()
        }
        (None, None) => return Err(CliError::Config("steps.chains or steps.outputs must be set".into())),
    };
    let natural = chains.iter().any(|c| c.dialect == Dialect::Natural);
    let judge: Option<Box<dyn StepJudge>> = match &ctx.cfg.judge {
        Some(j) => Some(Box::new(RemoteJudge::new(
            HttpCompleter::new(j.clone()).map_err(|e| CliError::Config(e.to_string()))?,
        ))),
        None => None,
    };
    if natural && judge.is_none() {
        eprintln!("warning: natural-language chains without a judge endpoint; their validity and atomicity stay unknown");
    }
    let cfg = CheckerConfig {
        budget: sc.budget.unwrap_or_default(),
    };
    let items: Vec<(ProofChain, FactTable)> = chains
        .into_iter()
        .map(|c| {
            let facts = fact_table(by_id.get(c.problem_id.as_str()).copied()).with_declared(&c);
            (c, facts)
        })
        .collect();
    let verdicts = steps::evaluate_all(&items, &cfg, judge.as_deref());
    ctx.write_jsonl("verdicts.jsonl", &verdicts)?;
    let agg = steps::aggregate(&verdicts).context("aggregating verdicts")?;
    ctx.write_json("steps_aggregate.json", &agg)?;
    Ok(())
}

fn probe(ctx: &mut Ctx) -> Result<(), CliError> {
    let pc = ctx.cfg.probe.clone();
    let dump_path = config::require_file("probe.dump", pc.dump.as_ref())?;
    let split_path = config::require_file("probe.split", pc.split.as_ref())?;
    ctx.input(&dump_path);
    let side = probing::dump::sidecar_path(&dump_path);
    if side.is_file() {
        ctx.input(&side);
    }
    ctx.input(&split_path);
    let dump = probing::read_dump(&dump_path).map_err(|e| CliError::Config(e.to_string()))?;
    let split: SplitManifest = serde_json::from_str(&fs::read_to_string(&split_path).context("reading split")?)
        .map_err(|e| CliError::Config(format!("split manifest: {e}")))?;
    let cfg = ProbeConfig {
        seed: ctx.cfg.run.seed,
        folds: pc.folds,
        grid: pc.grid.clone(),
        ..ProbeConfig::default()
    };
    let report = probing::run_probing_suite(&dump, &split, &cfg, pc.reading).map_err(|e| match e {
        probing::SuiteError::SplitLeakage(_) | probing::SuiteError::InvalidDump(_) => CliError::Config(e.to_string()),
        other => CliError::Internal(other.into()),
    })?;
    ctx.write_json("probe_report.json", &report)?;
    Ok(())
}

fn gen_sft(ctx: &mut Ctx) -> Result<(), CliError> {
    let sc = ctx.cfg.sft.clone();
    let seed = ctx.cfg.run.seed;
    let manifest = match sc.dataset {
        bench::DatasetKind::Fld => CorpusManifest::fld(),
        bench::DatasetKind::ProntoQa => CorpusManifest::prontoqa(),
        other => return Err(CliError::Config(format!("no SFT manifest for {other}"))),
    };
    let pool: Vec<GoldProblem> = match (&sc.pool, sc.synthetic) {
        (Some(p), _) => {
            let p = config::require_file("sft.pool", Some(p))?;
            ctx.input(&p);
            read_jsonl(&p)?
        }
        (None, true) => synth_pool(&manifest, 0, seed),
        (None, false) => return Err(CliError::Config("sft.pool is not configured and sft.synthetic is off".into())),
    };
    let mut counts = Vec::new();
    for style in &sc.styles {
        let corpus = sft::build_corpus(&pool, *style, &manifest, seed).map_err(|e| match e {
            sft::SftError::ManifestShortfall { .. } => CliError::Config(e.to_string()),
            other => CliError::Internal(other.into()),
        })?;
        ctx.write_jsonl(&format!("sft_{}.jsonl", style.name()), &corpus.samples)?;
        counts.extend(corpus.counts);
    }
    ctx.write_json("sft_counts.json", &counts)?;
    ctx.write_csv("sft_counts.csv", &counts)?;
    Ok(())
}

fn reward(ctx: &mut Ctx) -> Result<(), CliError> {
    let rc = ctx.cfg.reward.clone();
    let vpath = config::require_file("reward.verdicts", rc.verdicts.as_ref())?;
    let rpath = config::require_file("reward.records", rc.records.as_ref())?;
    ctx.input(&vpath);
    ctx.input(&rpath);
    let verdicts: Vec<ChainVerdict> = read_jsonl(&vpath)?;
    let records: Vec<EvalRecord> = read_jsonl(&rpath)?;
    let traces: Vec<PredictionTrace> = match &rc.traces {
        Some(p) => {
            let p = config::require_file("reward.traces", Some(p))?;
            ctx.input(&p);
            read_jsonl(&p)?
        }
        None => Vec::new(),
    };
    let by_id: HashMap<&str, &ChainVerdict> = verdicts.iter().map(|v| (v.problem_id.as_str(), v)).collect();
    let trace_by_id: HashMap<&str, &PredictionTrace> = traces.iter().map(|t| (t.problem_id.as_str(), t)).collect();
    let mut missing = Vec::new();
    let cases: Vec<RewardCase> = records
        .iter()
        .filter_map(|r| match by_id.get(r.problem_id.as_str()) {
            Some(v) => Some(RewardCase {
                sample_id: &r.problem_id,
                correct: r.correct,
                verdict: v,
                trace: trace_by_id.get(r.problem_id.as_str()).copied(),
            }),
            None => {
                missing.push(r.problem_id.clone());
                None
            }
        })
        .collect();
    let rows = reward_batch(&cases, &rc.weights, rc.mode, rc.reading).map_err(|e| CliError::Config(e.to_string()))?;
    ctx.write_jsonl("rewards.jsonl", &rows)?;
    let mean = |f: fn(&crate::reward::RewardRow) -> f64| {
        if rows.is_empty() {
            0.0
        } else {
            rows.iter().map(f).sum::<f64>() / rows.len() as f64
        }
    };
    ctx.write_json(
        "reward_summary.json",
        &json!({
            "samples": rows.len(),
            "unmatched": missing.len(),
            "mode": rc.mode,
            "weights": rc.weights,
            "mean_R_total": mean(|r| r.r_total),
            "mean_R_acc": mean(|r| r.r_acc),
        }),
    )?;
    if !missing.is_empty() {
        return Err(CliError::Partial {
            failed: missing.len(),
            total: records.len(),
        });
    }
    Ok(())
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&format!("{prefix}.{k}"), x, out)),
        Value::Array(xs) => xs.iter().enumerate().for_each(|(i, x)| flatten(&format!("{prefix}[{i}]"), x, out)),
        Value::String(s) => out.push((prefix.into(), s.clone())),
        other => out.push((prefix.into(), other.to_string())),
    }
}

pub const SUMMARY_TXT: &str = "summary.txt";
pub const SUMMARY_CSV: &str = "summary.csv";

fn report(ctx: &mut Ctx) -> Result<(), CliError> {
    let mut inputs = ctx.cfg.report.inputs.clone();
    if inputs.is_empty() {
        if let Ok(rd) = fs::read_dir(&ctx.out) {
            inputs = rd
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "json"))
                .filter(|p| !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with("manifest_")))
                .collect();
        }
    }
    inputs.sort();
    let mut rows = Vec::new();
    for p in &inputs {
        let p = ctx.input(p);
        let v: Value = serde_json::from_str(&fs::read_to_string(&p).context("reading report")?)
            .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        flatten(&name, &v, &mut rows);
    }
    let mut txt = String::new();
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    for (k, v) in &rows {
        txt.push_str(&format!("{k:width$}  {v}\n"));
    }
    ctx.write(SUMMARY_TXT, txt.as_bytes())?;
    #[derive(Serialize)]
    struct Row<'a> {
        key: &'a str,
        value: &'a str,
    }
    let csv_rows: Vec<Row> = rows.iter().map(|(k, v)| Row { key: k, value: v }).collect();
    ctx.write_csv(SUMMARY_CSV, &csv_rows)?;
    Ok(())
}

fn write_manifest(ctx: &Ctx, command: Command, config_text: &str) -> anyhow::Result<()> {
    let digests = |ps: &[PathBuf]| -> anyhow::Result<BTreeMap<String, String>> {
        ps.iter().map(|p| Ok((p.display().to_string(), sha256_file(p)?))).collect()
    };
    let m = RunManifest {
        command: command.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
        seed: ctx.cfg.run.seed,
        inputs: digests(&ctx.inputs)?,
        outputs: digests(&ctx.outputs)?,
    };
    let p = ctx.out.join(format!("manifest_{}.json", command.name().replace('-', "_")));
    fs::write(&p, serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let (mut cfg, raw) = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => (RunConfig::default(), String::new()),
    };
    if let Some(o) = &cli.out {
        cfg.run.out = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    if let Some(j) = cli.jobs {
        cfg.run.jobs = j;
    }
    if cli.dry_run {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let out = cfg.run.out.clone();
    fs::create_dir_all(&out).map_err(|e| CliError::Config(format!("{}: {e}", out.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.jobs)
        .build()
        .context("building worker pool")?;
    // Seeds and overrides are part of what the manifest hashes.
    let config_text = format!("{raw}\n# resolved\n{}", cfg.to_toml());
    let mut ctx = Ctx {
        cfg,
        out,
        inputs: Vec::new(),
        outputs: Vec::new(),
    };
    let result = pool.install(|| match cli.command {
        Command::EvalBench => eval_bench(&mut ctx),
        Command::EvalSteps => eval_steps(&mut ctx),
        Command::Probe => probe(&mut ctx),
        Command::GenSft => gen_sft(&mut ctx),
        Command::Reward => reward(&mut ctx),
        Command::Report => report(&mut ctx),
    });
    if matches!(result, Ok(()) | Err(CliError::Partial { .. })) {
        write_manifest(&ctx, cli.command, &config_text)?;
    }
    result
}

/// Parses arguments and runs one command; returns the process exit code.
/// Failures print a JSON object on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
