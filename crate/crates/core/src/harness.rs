//! Experiment orchestration: the built-in four-task environment, the eight
//! scenarios, seeded repetitions, aggregation and report files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::environment::{fmt_f64, uniform_grid, FunctionSpec, NoiseModel, Sample, TaskId, TaskSpec, RNG_ALGORITHM};
use crate::error::{Error, Result};
use crate::learner::{r_squared, MlpModel, TrainConfig, PARTIAL_RULE};
use crate::seed::{derive_seed, SEED_ALGORITHM};
use crate::transfer::{
    backward_transfer, forward_transfer, forward_transfer_at_times, isolated_model, join_ids, sequential_backward,
    task_splits, Direction, KnowledgeBase, TransferOutcome,
};

pub const NOISE_MEAN: f64 = 1.0;
pub const NOISE_STD: f64 = 2.0;

/// `y1 = −3x + 10`, `y2 = −3x − 5`, `y3 = −6x − 12`, `y4 = x²` on `[0, 10]`.
pub fn builtin_tasks(noise: NoiseModel, sample_size: usize) -> Vec<TaskSpec> {
    let make = |id: &str, function| TaskSpec {
        id: id.into(),
        function,
        noise,
        domain_lo: 0.0,
        domain_hi: 10.0,
        sample_size,
    };
    vec![
        make("f1", FunctionSpec::Linear { a: -3.0, b: 10.0 }),
        make("f2", FunctionSpec::Linear { a: -3.0, b: -5.0 }),
        make("f3", FunctionSpec::Linear { a: -6.0, b: -12.0 }),
        make("f4", FunctionSpec::Quadratic),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioId {
    Iso,
    IsoNoise,
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 8] = [
        ScenarioId::Iso,
        ScenarioId::IsoNoise,
        ScenarioId::S1,
        ScenarioId::S2,
        ScenarioId::S3,
        ScenarioId::S4,
        ScenarioId::S5,
        ScenarioId::S6,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioId::Iso => "iso",
            ScenarioId::IsoNoise => "iso_noise",
            ScenarioId::S1 => "s1",
            ScenarioId::S2 => "s2",
            ScenarioId::S3 => "s3",
            ScenarioId::S4 => "s4",
            ScenarioId::S5 => "s5",
            ScenarioId::S6 => "s6",
        }
    }

    /// Row label used in the markdown table.
    pub fn label(&self, noise: bool) -> String {
        let suffix = if noise { " (noise)" } else { "" };
        match self {
            ScenarioId::Iso => "Isolated learning".into(),
            ScenarioId::IsoNoise => format!("Isolated learning{suffix}"),
            other => format!("Scenario {}{suffix}", &other.as_str()[1..]),
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::validation(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    None,
    Forward,
    Backward,
    SequentialForward,
    SequentialBackward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    pub description: &'static str,
    pub source_ids: Vec<TaskId>,
    pub target_id: Option<TaskId>,
    pub direction: ScenarioKind,
    pub measured_tasks: Vec<TaskId>,
}

fn ids(list: &[&str]) -> Vec<TaskId> {
    list.iter().map(|s| TaskId::from(*s)).collect()
}

impl ScenarioSpec {
    /// For backward scenarios `target_id` is the task whose hypothesis is
    /// refined and `source_ids` are the tasks knowledge flows from.
    pub fn builtin(id: ScenarioId) -> ScenarioSpec {
        let (description, sources, target, direction, measured): (_, &[&str], Option<&str>, _, &[&str]) = match id {
            ScenarioId::Iso => ("isolated learning, noiseless", &[], None, ScenarioKind::None, &["f1", "f2", "f3", "f4"]),
            ScenarioId::IsoNoise => ("isolated learning, noisy", &[], None, ScenarioKind::None, &["f1", "f2", "f3", "f4"]),
            ScenarioId::S1 => ("forward transfer f1 -> f2", &["f1"], Some("f2"), ScenarioKind::Forward, &["f2"]),
            ScenarioId::S2 => ("backward transfer f2 -> f1", &["f2"], Some("f1"), ScenarioKind::Backward, &["f1"]),
            ScenarioId::S3 => (
                "forward transfer {f1, f2} -> f3",
                &["f1", "f2"],
                Some("f3"),
                ScenarioKind::SequentialForward,
                &["f3"],
            ),
            ScenarioId::S4 => (
                "backward transfer f2 -> f1, then f3 -> f1",
                &["f2", "f3"],
                Some("f1"),
                ScenarioKind::SequentialBackward,
                &["f1"],
            ),
            ScenarioId::S5 => ("forward transfer f1 -> f4 (unrelated)", &["f1"], Some("f4"), ScenarioKind::Forward, &["f4"]),
            ScenarioId::S6 => ("backward transfer f4 -> f1 (unrelated)", &["f4"], Some("f1"), ScenarioKind::Backward, &["f1"]),
        };
        ScenarioSpec {
            id,
            description,
            source_ids: ids(sources),
            target_id: target.map(TaskId::from),
            direction,
            measured_tasks: ids(measured),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReportFormat {
    Csv,
    Markdown,
    PlotData,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "plotdata" => Ok(ReportFormat::PlotData),
            other => Err(Error::validation(format!("unknown report format `{other}`"))),
        }
    }
}

impl ReportFormat {
    fn as_str(&self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "markdown",
            ReportFormat::PlotData => "plotdata",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub repetitions: usize,
    pub base_seed: u64,
    pub noise_enabled: bool,
    pub sample_size: usize,
    pub train_fraction: f64,
    pub train: TrainConfig,
    pub output_dir: PathBuf,
    pub formats: BTreeSet<ReportFormat>,
    /// Worker cap; `None` uses `CONTRAIL_WORKERS` or all cores.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            repetitions: 10,
            base_seed: 2023,
            noise_enabled: true,
            sample_size: 30,
            train_fraction: 0.75,
            train: TrainConfig::default(),
            output_dir: PathBuf::from("results"),
            formats: [ReportFormat::Csv, ReportFormat::Markdown].into_iter().collect(),
            workers: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::validation("repetitions must be positive"));
        }
        if self.sample_size < 2 {
            return Err(Error::validation("sample_size must be at least 2"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::validation("train_fraction must lie in (0, 1)"));
        }
        if self.workers == Some(0) {
            return Err(Error::validation("workers must be positive"));
        }
        self.train.validate()
    }

    fn noise_for(&self, scenario: ScenarioId) -> NoiseModel {
        if scenario == ScenarioId::Iso || !self.noise_enabled {
            NoiseModel::disabled()
        } else {
            NoiseModel::gaussian(NOISE_MEAN, NOISE_STD)
        }
    }

    /// Parses the flat `key = value` config format; `#` starts a comment and
    /// unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::validation(format!("config line {}: expected `key = value`", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::validation(format!("config line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("bad value `{v}` for `{key}`"))
        }
        match key {
            "repetitions" => self.repetitions = num(key, value)?,
            "base_seed" => self.base_seed = num(key, value)?,
            "noise_enabled" => self.noise_enabled = num(key, value)?,
            "sample_size" => self.sample_size = num(key, value)?,
            "train_fraction" => self.train_fraction = num(key, value)?,
            "learning_rate" => self.train.learning_rate = num(key, value)?,
            "max_epochs" => self.train.max_epochs = num(key, value)?,
            "convergence_tol" => self.train.convergence_tol = num(key, value)?,
            "convergence_patience" => self.train.convergence_patience = num(key, value)?,
            "partial_fraction" => self.train.partial_fraction = num(key, value)?,
            "hidden_lr_factor" => self.train.hidden_lr_factor = num(key, value)?,
            "hidden_units" => self.train.hidden_units = num(key, value)?,
            "train_seed" => self.train.seed = num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "formats" => {
                self.formats = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(ReportFormat::from_str)
                    .collect::<Result<_>>()
                    .map_err(|e| e.to_string())?
            }
            "workers" => self.workers = Some(num(key, value)?),
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Renders the config in the same format [`ExperimentConfig::parse`] reads,
    /// preceded by comment lines naming the algorithms the run depends on.
    /// `output_dir` and `workers` are left out: neither affects results.
    pub fn render(&self) -> String {
        let t = &self.train;
        let formats: Vec<_> = self.formats.iter().map(ReportFormat::as_str).collect();
        format!(
            "# rng = {RNG_ALGORITHM}\n\
             # seed_derivation = {SEED_ALGORITHM}\n\
             # {PARTIAL_RULE}\n\
             # activation = tanh, optimizer = full-batch gradient descent, per-task z-scoring\n\
             repetitions = {}\nbase_seed = {}\nnoise_enabled = {}\nsample_size = {}\ntrain_fraction = {}\n\
             learning_rate = {}\nmax_epochs = {}\nconvergence_tol = {}\nconvergence_patience = {}\n\
             partial_fraction = {}\nhidden_lr_factor = {}\nhidden_units = {}\ntrain_seed = {}\nformats = {}\n",
            self.repetitions,
            self.base_seed,
            self.noise_enabled,
            self.sample_size,
            self.train_fraction,
            t.learning_rate,
            t.max_epochs,
            t.convergence_tol,
            t.convergence_patience,
            t.partial_fraction,
            t.hidden_lr_factor,
            t.hidden_units,
            t.seed,
            formats.join(","),
        )
    }
}

/// Seed shared by every scenario for repetition `rep`; it drives sampling,
/// splitting and initialization, so all scenarios see the same data.
pub fn repetition_seed(base_seed: u64, rep: usize) -> u64 {
    derive_seed(base_seed, &["rep", &rep.to_string()])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// The result the scenario is scored on.
    Final,
    /// An earlier checkpoint or step (first source count in s3, first target in s4).
    Intermediate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRecord {
    pub scenario: ScenarioId,
    pub rep: usize,
    pub stage: Stage,
    pub outcome: TransferOutcome,
}

fn task<'a>(tasks: &'a [TaskSpec], id: &TaskId) -> Result<&'a TaskSpec> {
    tasks.iter().find(|t| t.id == *id).ok_or_else(|| Error::UnknownTask(id.to_string()))
}

fn run_repetition(spec: &ScenarioSpec, cfg: &ExperimentConfig, rep: usize) -> Result<Vec<ScenarioRecord>> {
    let seed = repetition_seed(cfg.base_seed, rep);
    let tasks = builtin_tasks(cfg.noise_for(spec.id), cfg.sample_size);
    let train = &cfg.train;
    let mut kb = KnowledgeBase::new(cfg.train_fraction)?;
    let record = |stage, outcome| ScenarioRecord { scenario: spec.id, rep, stage, outcome };

    let mut records = Vec::new();
    match spec.direction {
        ScenarioKind::None => {
            for id in &spec.measured_tasks {
                let (train_sample, test_sample) = task_splits(task(&tasks, id)?, cfg.train_fraction, seed)?;
                let model = isolated_model(&train_sample, train, seed)?;
                let r2 = r_squared(&model, &test_sample)?.r2;
                records.push(record(
                    Stage::Final,
                    TransferOutcome {
                        task_id: id.clone(),
                        direction: Direction::Isolated,
                        sources_used: vec![],
                        model,
                        r2_isolated_baseline: r2,
                        r2_after_transfer: r2,
                        repetition_seed: seed,
                    },
                ));
            }
        }
        ScenarioKind::Forward | ScenarioKind::SequentialForward => {
            let target = task(&tasks, spec.target_id.as_ref().ok_or_else(|| Error::validation("forward scenario without target"))?)?;
            for id in &spec.source_ids {
                kb.learn_task(task(&tasks, id)?, train, seed)?;
            }
            let outcomes = if spec.direction == ScenarioKind::Forward {
                vec![forward_transfer(&mut kb, &spec.source_ids, target, train, seed)?]
            } else {
                let times: Vec<usize> = (1..=spec.source_ids.len()).collect();
                forward_transfer_at_times(&mut kb, target, &times, train, seed)?
            };
            let last = outcomes.len() - 1;
            for (i, o) in outcomes.into_iter().enumerate() {
                records.push(record(if i == last { Stage::Final } else { Stage::Intermediate }, o));
            }
        }
        ScenarioKind::Backward | ScenarioKind::SequentialBackward => {
            let refined = spec.target_id.as_ref().ok_or_else(|| Error::validation("backward scenario without target"))?;
            kb.learn_task(task(&tasks, refined)?, train, seed)?;
            for id in &spec.source_ids {
                kb.learn_task(task(&tasks, id)?, train, seed)?;
            }
            let outcomes = if spec.direction == ScenarioKind::Backward {
                vec![backward_transfer(&mut kb, refined, &spec.source_ids[0], train, seed)?]
            } else {
                sequential_backward(&mut kb, refined, &spec.source_ids, train, seed)?
            };
            let last = outcomes.len() - 1;
            for (i, o) in outcomes.into_iter().enumerate() {
                records.push(record(if i == last { Stage::Final } else { Stage::Intermediate }, o));
            }
        }
    }
    kb.check_invariants()?;
    Ok(records)
}

fn worker_pool(cfg: &ExperimentConfig) -> Result<rayon::ThreadPool> {
    let workers = cfg.workers.or_else(|| std::env::var("CONTRAIL_WORKERS").ok().and_then(|v| v.parse().ok()));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers.filter(|&n| n > 0) {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::State(format!("cannot start worker pool: {e}")))
}

/// Runs every repetition of one scenario. Repetitions are independent and may
/// run in parallel; records come back ordered by repetition.
pub fn run_scenario(spec: &ScenarioSpec, cfg: &ExperimentConfig) -> Result<Vec<ScenarioRecord>> {
    cfg.validate()?;
    let pool = worker_pool(cfg)?;
    run_scenario_in(&pool, spec, cfg)
}

fn run_scenario_in(pool: &rayon::ThreadPool, spec: &ScenarioSpec, cfg: &ExperimentConfig) -> Result<Vec<ScenarioRecord>> {
    let per_rep: Vec<Result<Vec<ScenarioRecord>>> = pool.install(|| {
        (0..cfg.repetitions)
            .into_par_iter()
            .map(|rep| {
                run_repetition(spec, cfg, rep).map_err(|e| Error::Repetition {
                    scenario: spec.id.to_string(),
                    rep,
                    source: Box::new(e),
                })
            })
            .collect()
    });
    let mut out = Vec::new();
    for r in per_rep {
        out.extend(r?);
    }
    Ok(out)
}

/// Runs the given scenarios (all eight for a Table 1 reproduction).
pub fn run_many(scenarios: &[ScenarioId], cfg: &ExperimentConfig) -> Result<Vec<ScenarioRecord>> {
    cfg.validate()?;
    let pool = worker_pool(cfg)?;
    let mut out = Vec::new();
    for &id in scenarios {
        out.extend(run_scenario_in(&pool, &ScenarioSpec::builtin(id), cfg)?);
    }
    Ok(out)
}

/// Every scenario, summarized.
pub fn run_all(cfg: &ExperimentConfig) -> Result<(Vec<ScenarioRecord>, Vec<SummaryRow>)> {
    let records = run_many(&ScenarioId::ALL, cfg)?;
    let summary = summarize(&records)?;
    Ok((records, summary))
}

/// Label of the aggregate column over the three related tasks.
pub const COMBINED_TASK: &str = "f1,f2,f3";

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario: ScenarioId,
    pub task: String,
    pub r2_mean: f64,
    /// Sample standard deviation (n − 1 denominator); 0 for a single value.
    pub r2_std: f64,
    pub repetitions: usize,
    /// Set when the group had a single value, so the std carries no information.
    pub degenerate: bool,
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Mean and sample std of `r2_after_transfer` per (scenario, task) over the
/// final-stage records, ordered by scenario then task. The isolated scenarios
/// also get a combined `f1,f2,f3` row: mean of the three task means, std
/// across those three means.
pub fn summarize(records: &[ScenarioRecord]) -> Result<Vec<SummaryRow>> {
    let mut groups: BTreeMap<(ScenarioId, TaskId), Vec<(usize, f64)>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.stage == Stage::Final) {
        groups
            .entry((r.scenario, r.outcome.task_id.clone()))
            .or_default()
            .push((r.rep, r.outcome.r2_after_transfer));
    }
    if groups.is_empty() {
        return Err(Error::validation("nothing to summarize"));
    }
    let mut rows = Vec::new();
    let mut combined: BTreeMap<ScenarioId, Vec<f64>> = BTreeMap::new();
    for ((scenario, task), mut values) in groups {
        // fixed summation order regardless of how the records were gathered
        values.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let r2: Vec<f64> = values.iter().map(|v| v.1).collect();
        let (mean, std) = mean_and_std(&r2);
        if matches!(scenario, ScenarioId::Iso | ScenarioId::IsoNoise) && ["f1", "f2", "f3"].contains(&task.as_str()) {
            combined.entry(scenario).or_default().push(mean);
        }
        rows.push(SummaryRow {
            scenario,
            task: task.to_string(),
            r2_mean: mean,
            r2_std: std,
            repetitions: r2.len(),
            degenerate: r2.len() < 2,
        });
    }
    for (scenario, means) in combined.into_iter().filter(|(_, m)| m.len() == 3) {
        let (mean, std) = mean_and_std(&means);
        let reps = rows.iter().find(|r| r.scenario == scenario).map_or(0, |r| r.repetitions);
        rows.push(SummaryRow {
            scenario,
            task: COMBINED_TASK.into(),
            r2_mean: mean,
            r2_std: std,
            repetitions: reps,
            degenerate: reps < 2,
        });
    }
    rows.sort_by(|a, b| a.scenario.cmp(&b.scenario).then_with(|| a.task.cmp(&b.task)));
    Ok(rows)
}

/// Looks up one summary cell.
pub fn summary_cell<'a>(summary: &'a [SummaryRow], scenario: ScenarioId, task: &str) -> Option<&'a SummaryRow> {
    summary.iter().find(|r| r.scenario == scenario && r.task == task)
}

/// `scenario,task,direction,sources,rep,seed,r2_baseline,r2_after`, one row per record.
pub fn outcomes_csv(records: &[ScenarioRecord]) -> String {
    let mut out = String::from("scenario,task,direction,sources,rep,seed,r2_baseline,r2_after\n");
    for r in records {
        let o = &r.outcome;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.scenario,
            o.task_id,
            o.direction,
            join_ids(&o.sources_used),
            r.rep,
            o.repetition_seed,
            fmt_f64(o.r2_isolated_baseline),
            fmt_f64(o.r2_after_transfer)
        ));
    }
    out
}

pub fn summary_csv(summary: &[SummaryRow]) -> Result<String> {
    if summary.is_empty() {
        return Err(Error::validation("empty summary"));
    }
    let mut out = String::from("scenario,task,r2_mean,r2_std,repetitions\n");
    for r in summary {
        // the combined task label contains commas
        let task = if r.task.contains(',') { format!("\"{}\"", r.task) } else { r.task.clone() };
        out.push_str(&format!("{},{},{:.4},{:.4},{}\n", r.scenario, task, r.r2_mean, r.r2_std, r.repetitions));
    }
    Ok(out)
}

/// Table-shaped grid: one row per scenario, columns f1..f4 and the combined
/// column, `--` where a scenario does not measure a task.
pub fn summary_markdown(summary: &[SummaryRow], noise: bool) -> Result<String> {
    if summary.is_empty() {
        return Err(Error::validation("empty summary"));
    }
    let columns = ["f1", "f2", "f3", "f4", COMBINED_TASK];
    let mut out = String::from("| Scenario | R² f1 | R² f2 | R² f3 | R² f4 | R² f1, f2, f3 |\n|---|---|---|---|---|---|\n");
    let scenarios: BTreeSet<ScenarioId> = summary.iter().map(|r| r.scenario).collect();
    for scenario in scenarios {
        out.push_str(&format!("| {} |", scenario.label(noise)));
        for col in columns {
            match summary_cell(summary, scenario, col) {
                Some(r) => out.push_str(&format!(" {:.4} ± {:.4} |", r.r2_mean, r.r2_std)),
                None => out.push_str(" -- |"),
            }
        }
        out.push('\n');
    }
    out.push_str(
        "\nMean R² on held-out test splits and sample standard deviations over repetitions (`--`: not applicable).\n\
         The combined column is the mean of the f1, f2, f3 means; its spread is the standard deviation across those three means.\n",
    );
    if summary.iter().any(|r| r.degenerate) {
        out.push_str("Warning: some cells come from a single repetition; their standard deviation is reported as 0.\n");
    }
    Ok(out)
}

/// Writes the summary in `format` under `dir`, returning the file path.
pub fn emit_report(summary: &[SummaryRow], format: ReportFormat, dir: &Path, noise: bool) -> Result<PathBuf> {
    let (name, body) = match format {
        ReportFormat::Csv => ("summary.csv", summary_csv(summary)?),
        ReportFormat::Markdown => ("summary.md", summary_markdown(summary, noise)?),
        ReportFormat::PlotData => return Err(Error::validation("plot data is emitted with emit_plot_data")),
    };
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

/// Writes the config echo, per-repetition outcomes and the requested summary
/// formats for a finished run.
pub fn write_run(records: &[ScenarioRecord], summary: &[SummaryRow], cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let config_path = dir.join("config.txt");
    fs::write(&config_path, cfg.render())?;
    written.push(config_path);
    if cfg.formats.contains(&ReportFormat::Csv) {
        let path = dir.join("outcomes.csv");
        fs::write(&path, outcomes_csv(records))?;
        written.push(path);
    }
    for format in [ReportFormat::Csv, ReportFormat::Markdown] {
        if cfg.formats.contains(&format) {
            written.push(emit_report(summary, format, dir, cfg.noise_enabled)?);
        }
    }
    Ok(written)
}

pub const PLOT_GRID_POINTS: usize = 200;

/// One CSV per task: `kind,x,y_true,y_noisy_sample[,y_model]` with 200 `curve`
/// rows on a uniform grid over the task's domain, then one `sample` row per
/// sample point. Curve rows leave `y_noisy_sample` empty.
pub fn emit_plot_data(
    tasks: &[TaskSpec],
    samples: &[Sample],
    models: Option<&[MlpModel]>,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    if tasks.is_empty() {
        return Err(Error::validation("plot data needs at least one task"));
    }
    if let Some(m) = models {
        if m.len() != tasks.len() {
            return Err(Error::validation("one model per task is required"));
        }
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (i, t) in tasks.iter().enumerate() {
        let model = models.map(|m| &m[i]);
        let mut out = String::from("kind,x,y_true,y_noisy_sample");
        if model.is_some() {
            out.push_str(",y_model");
        }
        out.push('\n');
        let model_col = |x: f64| model.map_or(String::new(), |m| format!(",{}", fmt_f64(m.predict(x))));
        for x in uniform_grid(t.domain_lo, t.domain_hi, PLOT_GRID_POINTS) {
            out.push_str(&format!("curve,{},{},{}\n", fmt_f64(x), fmt_f64(t.function.eval(x)), model_col(x)));
        }
        for s in samples.iter().filter(|s| s.source_task == t.id) {
            for &(x, y) in &s.points {
                out.push_str(&format!(
                    "sample,{},{},{}{}\n",
                    fmt_f64(x),
                    fmt_f64(t.function.eval(x)),
                    fmt_f64(y),
                    model_col(x)
                ));
            }
        }
        let path = dir.join(format!("{}.csv", t.id));
        fs::write(&path, out)?;
        written.push(path);
    }
    Ok(written)
}

/// Plot data for the built-in tasks using the samples of repetition 0; with
/// `with_models`, each task also gets an isolated model trained on its
/// training split.
pub fn plot_builtin_tasks(cfg: &ExperimentConfig, with_models: bool, dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let seed = repetition_seed(cfg.base_seed, 0);
    let tasks = builtin_tasks(cfg.noise_for(ScenarioId::IsoNoise), cfg.sample_size);
    let mut samples = Vec::new();
    let mut models = Vec::new();
    for t in &tasks {
        let (train_sample, test_sample) = task_splits(t, cfg.train_fraction, seed)?;
        if with_models {
            models.push(isolated_model(&train_sample, &cfg.train, seed)?);
        }
        let mut points = train_sample.points.clone();
        points.extend_from_slice(&test_sample.points);
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        samples.push(Sample { points, ..train_sample });
    }
    emit_plot_data(&tasks, &samples, with_models.then_some(models.as_slice()), dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::generate_sample;

    #[test]
    fn builtin_task_values() {
        let t = builtin_tasks(NoiseModel::disabled(), 30);
        assert_eq!(t.len(), 4);
        assert_eq!(t[0].function.eval(0.0), 10.0);
        assert_eq!(t[2].function.eval(10.0), -72.0);
        assert_eq!(t[3].function.eval(10.0), 100.0);
        assert!(t.iter().all(|s| s.domain_lo == 0.0 && s.domain_hi == 10.0 && s.sample_size == 30));
    }

    #[test]
    fn scenario_map_matches_the_experiment_list() {
        let s = |id| ScenarioSpec::builtin(id);
        assert_eq!((s(ScenarioId::S1).source_ids, s(ScenarioId::S1).target_id), (ids(&["f1"]), Some("f2".into())));
        assert_eq!(s(ScenarioId::S2).direction, ScenarioKind::Backward);
        assert_eq!(s(ScenarioId::S2).measured_tasks, ids(&["f1"]));
        assert_eq!(s(ScenarioId::S3).source_ids, ids(&["f1", "f2"]));
        assert_eq!(s(ScenarioId::S4).source_ids, ids(&["f2", "f3"]));
        assert_eq!(s(ScenarioId::S5).target_id, Some("f4".into()));
        assert_eq!((s(ScenarioId::S6).source_ids, s(ScenarioId::S6).target_id), (ids(&["f4"]), Some("f1".into())));
        for id in ScenarioId::ALL {
            assert_eq!(id.as_str().parse::<ScenarioId>().unwrap(), id);
        }
        assert!("s7".parse::<ScenarioId>().is_err());
    }

    fn rec(scenario: ScenarioId, task: &str, rep: usize, r2: f64) -> ScenarioRecord {
        ScenarioRecord {
            scenario,
            rep,
            stage: Stage::Final,
            outcome: TransferOutcome {
                task_id: task.into(),
                direction: Direction::Forward,
                sources_used: vec![],
                model: MlpModel::zeros(1),
                r2_isolated_baseline: 0.0,
                r2_after_transfer: r2,
                repetition_seed: 0,
            },
        }
    }

    #[test]
    fn summary_statistics() {
        let rows = summarize(&[rec(ScenarioId::S1, "f2", 0, 0.9), rec(ScenarioId::S1, "f2", 1, 1.0)]).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].r2_mean - 0.95).abs() < 1e-15);
        assert!((rows[0].r2_std - 0.05f64.hypot(0.05)).abs() < 1e-15);
        let single = summarize(&[rec(ScenarioId::S1, "f2", 0, 0.7)]).unwrap();
        assert_eq!((single[0].r2_mean, single[0].r2_std, single[0].degenerate), (0.7, 0.0, true));
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn summary_ignores_input_order() {
        let mut recs: Vec<_> = (0..6).map(|i| rec(ScenarioId::S2, "f1", i, 0.8 + 0.031 * i as f64)).collect();
        recs.push(rec(ScenarioId::S1, "f2", 0, 0.5));
        let a = summarize(&recs).unwrap();
        recs.reverse();
        recs.swap(1, 4);
        assert_eq!(a, summarize(&recs).unwrap());
        assert_eq!(a[0].scenario, ScenarioId::S1);
    }

    #[test]
    fn combined_column_is_mean_of_means() {
        let recs = vec![
            rec(ScenarioId::IsoNoise, "f1", 0, 0.8),
            rec(ScenarioId::IsoNoise, "f1", 1, 0.9),
            rec(ScenarioId::IsoNoise, "f2", 0, 0.9),
            rec(ScenarioId::IsoNoise, "f2", 1, 0.9),
            rec(ScenarioId::IsoNoise, "f3", 0, 1.0),
            rec(ScenarioId::IsoNoise, "f3", 1, 1.0),
            rec(ScenarioId::IsoNoise, "f4", 0, 0.1),
            rec(ScenarioId::IsoNoise, "f4", 1, 0.2),
        ];
        let rows = summarize(&recs).unwrap();
        let c = summary_cell(&rows, ScenarioId::IsoNoise, COMBINED_TASK).unwrap();
        assert!((c.r2_mean - (0.85 + 0.9 + 1.0) / 3.0).abs() < 1e-15);
        let m = c.r2_mean;
        let expect = (((0.85 - m).powi(2) + (0.9 - m).powi(2) + (1.0 - m).powi(2)) / 2.0).sqrt();
        assert!((c.r2_std - expect).abs() < 1e-15);
    }

    #[test]
    fn report_rendering() {
        let rows = summarize(&[rec(ScenarioId::S2, "f1", 0, 0.96131), rec(ScenarioId::S2, "f1", 1, 0.96131)]).unwrap();
        let csv = summary_csv(&rows).unwrap();
        assert_eq!(csv, "scenario,task,r2_mean,r2_std,repetitions\ns2,f1,0.9613,0.0000,2\n");
        let md = summary_markdown(&rows, true).unwrap();
        assert!(md.contains("| Scenario 2 (noise) | 0.9613 ± 0.0000 | -- | -- | -- | -- |"), "{md}");
        assert!(summary_csv(&[]).is_err());
        assert!(summary_markdown(&[], true).is_err());
    }

    #[test]
    fn config_parse_render_round_trip() {
        let cfg = ExperimentConfig { repetitions: 3, base_seed: 99, noise_enabled: false, ..Default::default() };
        let back = ExperimentConfig::parse(&cfg.render()).unwrap();
        assert_eq!(ExperimentConfig { output_dir: cfg.output_dir.clone(), ..back }, cfg);
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
        assert!(ExperimentConfig::parse("repetitions = zero").is_err());
        assert!(ExperimentConfig::parse("repetitions = 0").is_err());
        assert!(ExperimentConfig::parse("formats = csv, pdf").is_err());
        let c = ExperimentConfig::parse("# comment\nrepetitions = 4 # trailing\nformats = csv\n").unwrap();
        assert_eq!(c.repetitions, 4);
        assert_eq!(c.formats.len(), 1);
    }

    #[test]
    fn plot_data_layout() {
        let dir = std::env::temp_dir().join(format!("contrail-plot-{}", std::process::id()));
        let tasks = builtin_tasks(NoiseModel::disabled(), 30);
        let samples: Vec<_> = tasks.iter().map(|t| generate_sample(t, 1).unwrap()).collect();
        let paths = emit_plot_data(&tasks, &samples, None, &dir).unwrap();
        assert_eq!(paths.len(), 4);
        let text = fs::read_to_string(&paths[0]).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "kind,x,y_true,y_noisy_sample");
        assert_eq!(lines.len(), 1 + 200 + 30);
        let first: Vec<f64> = lines[1].split(',').skip(1).take(2).map(|v| v.parse().unwrap()).collect();
        assert_eq!(first, vec![0.0, 10.0]);
        for l in lines.iter().filter(|l| l.starts_with("sample")) {
            let cols: Vec<&str> = l.split(',').collect();
            assert_eq!(cols[2], cols[3]);
        }
        assert!(emit_plot_data(&[], &[], None, &dir).is_err());
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn repetition_seeds_depend_only_on_base_and_index() {
        assert_eq!(repetition_seed(1, 3), repetition_seed(1, 3));
        assert_ne!(repetition_seed(1, 3), repetition_seed(1, 4));
        assert_ne!(repetition_seed(1, 3), repetition_seed(2, 3));
    }
}
