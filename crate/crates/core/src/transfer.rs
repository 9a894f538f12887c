//! The continual learner: a knowledge base of per-task snapshots and samples,
//! and the forward / backward transfer procedures that operate on it.
//!
//! Restricting the search to the equivalence class picked in the first step
//! of each procedure is realized by starting from a stored model and
//! fine-tuning with the hidden layer's learning rate scaled down by
//! `hidden_lr_factor`.

use std::collections::BTreeMap;
use std::fmt;

use crate::environment::{generate_sample, split_sample, Sample, TaskId, TaskSpec};
use crate::error::{Error, Result};
use crate::learner::{init_model, r_squared, train, train_pooled, MlpModel, TrainConfig, TrainMode};
use crate::seed::derive_seed;

/// Everything the learner keeps about one task.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeEntry {
    pub spec: TaskSpec,
    pub partial_model: MlpModel,
    pub converged_model: Option<MlpModel>,
    pub train_sample: Sample,
    pub test_sample: Sample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    entries: BTreeMap<TaskId, KnowledgeEntry>,
    arrival_order: Vec<TaskId>,
    train_fraction: f64,
}

/// Seeds for one task inside a repetition.
fn sample_seed(seed: u64, task: &TaskId) -> u64 {
    derive_seed(seed, &["sample", task.as_str()])
}

fn split_seed(seed: u64, task: &TaskId) -> u64 {
    derive_seed(seed, &["split", task.as_str()])
}

/// The train/test splits of `spec` for repetition seed `seed`.
pub fn task_splits(spec: &TaskSpec, train_fraction: f64, seed: u64) -> Result<(Sample, Sample)> {
    let sample = generate_sample(spec, sample_seed(seed, &spec.id))?;
    split_sample(&sample, train_fraction, split_seed(seed, &spec.id))
}

/// Initialization seed for the from-scratch models of `task`.
pub fn init_seed(seed: u64, task: &TaskId) -> u64 {
    derive_seed(seed, &["init", task.as_str()])
}

impl KnowledgeBase {
    pub fn new(train_fraction: f64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::validation(format!("train fraction must lie in (0, 1), got {train_fraction}")));
        }
        Ok(KnowledgeBase { entries: BTreeMap::new(), arrival_order: Vec::new(), train_fraction })
    }

    pub fn train_fraction(&self) -> f64 {
        self.train_fraction
    }

    pub fn arrival_order(&self) -> &[TaskId] {
        &self.arrival_order
    }

    pub fn len(&self) -> usize {
        self.arrival_order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrival_order.is_empty()
    }

    pub fn contains(&self, id: &TaskId) -> bool {
        self.entries.contains_key(id)
    }

    pub fn entry(&self, id: &TaskId) -> Result<&KnowledgeEntry> {
        self.entries.get(id).ok_or_else(|| Error::UnknownTask(id.to_string()))
    }

    fn entry_mut(&mut self, id: &TaskId) -> Result<&mut KnowledgeEntry> {
        self.entries.get_mut(id).ok_or_else(|| Error::UnknownTask(id.to_string()))
    }

    /// Stores a task. The snapshot must be a partially trained model.
    pub fn insert(&mut self, entry: KnowledgeEntry) -> Result<()> {
        let id = entry.spec.id.clone();
        if self.entries.contains_key(&id) {
            return Err(Error::State(format!("task {id} is already in the knowledge base")));
        }
        if entry.partial_model.converged {
            return Err(Error::State(format!("task {id}: stored partial model is marked converged")));
        }
        self.entries.insert(id.clone(), entry);
        self.arrival_order.push(id);
        Ok(())
    }

    /// Samples and splits `spec`, trains a from-scratch model partially on the
    /// training split and stores it.
    pub fn learn_task(&mut self, spec: &TaskSpec, cfg: &TrainConfig, seed: u64) -> Result<()> {
        let (train_sample, test_sample) = self.draw_splits(spec, seed)?;
        let init = init_model(cfg.hidden_units, init_seed(seed, &spec.id))?;
        let partial_model = train(&init, &train_sample, &cfg.unrestricted(), TrainMode::Partial)?;
        self.insert(KnowledgeEntry {
            spec: spec.clone(),
            partial_model,
            converged_model: None,
            train_sample,
            test_sample,
        })
    }

    fn draw_splits(&self, spec: &TaskSpec, seed: u64) -> Result<(Sample, Sample)> {
        task_splits(spec, self.train_fraction, seed)
    }

    /// Checks the structural invariants every entry must keep.
    pub fn check_invariants(&self) -> Result<()> {
        if self.entries.len() != self.arrival_order.len() {
            return Err(Error::State("arrival order and entries disagree".into()));
        }
        for id in &self.arrival_order {
            let e = self.entry(id)?;
            if e.partial_model.converged {
                return Err(Error::State(format!("task {id}: partial snapshot was overwritten by a converged model")));
            }
            if e.train_sample.source_task != *id || e.test_sample.source_task != *id {
                return Err(Error::State(format!("task {id}: retained samples belong to another task")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Direction {
    Isolated,
    Forward,
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Isolated => "none",
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

/// Result of one transfer, scored on the task's held-out split.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferOutcome {
    pub task_id: TaskId,
    pub direction: Direction,
    pub sources_used: Vec<TaskId>,
    pub model: MlpModel,
    pub r2_isolated_baseline: f64,
    pub r2_after_transfer: f64,
    pub repetition_seed: u64,
}

pub fn join_ids(ids: &[TaskId]) -> String {
    ids.iter().map(TaskId::as_str).collect::<Vec<_>>().join("+")
}

/// A from-scratch model trained to convergence on the task's own training split.
pub fn isolated_model(train_sample: &Sample, cfg: &TrainConfig, seed: u64) -> Result<MlpModel> {
    let init = init_model(cfg.hidden_units, init_seed(seed, &train_sample.source_task))?;
    train(&init, train_sample, &cfg.unrestricted(), TrainMode::Full)
}

/// The starting point that defines the restricted hypothesis space for a new
/// task: the stored partial model for a single source, otherwise a fresh
/// model fitted to the pooled training samples of all sources.
pub fn select_bias_forward(kb: &KnowledgeBase, source_ids: &[TaskId], cfg: &TrainConfig, seed: u64) -> Result<MlpModel> {
    match source_ids {
        [] => Err(Error::validation("forward transfer needs at least one source task")),
        [only] => Ok(kb.entry(only)?.partial_model.clone()),
        many => {
            let samples = many
                .iter()
                .map(|id| kb.entry(id).map(|e| &e.train_sample))
                .collect::<Result<Vec<_>>>()?;
            let init = init_model(cfg.hidden_units, derive_seed(seed, &["pool", &join_ids(many)]))?;
            train_pooled(&init, &samples, &cfg.unrestricted(), TrainMode::Full)
        }
    }
}

/// Learns `target` starting from the bias chosen by the sources, with the
/// hidden layer restricted, and scores it against an isolated learner on the
/// same splits. The target joins the knowledge base (with a from-scratch
/// partial snapshot) if it is not there yet.
pub fn forward_transfer(
    kb: &mut KnowledgeBase,
    source_ids: &[TaskId],
    target: &TaskSpec,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TransferOutcome> {
    cfg.validate()?;
    if source_ids.contains(&target.id) {
        return Err(Error::validation(format!("task {} cannot transfer forward into itself", target.id)));
    }
    let bias = select_bias_forward(kb, source_ids, cfg, seed)?;
    if !kb.contains(&target.id) {
        kb.learn_task(target, cfg, seed)?;
    }
    let entry = kb.entry(&target.id)?;
    let (train_sample, test_sample) = (entry.train_sample.clone(), entry.test_sample.clone());

    let transferred = train(&bias, &train_sample, cfg, TrainMode::Full)?;
    let baseline = isolated_model(&train_sample, cfg, seed)?;
    let outcome = TransferOutcome {
        task_id: target.id.clone(),
        direction: Direction::Forward,
        sources_used: source_ids.to_vec(),
        r2_isolated_baseline: r_squared(&baseline, &test_sample)?.r2,
        r2_after_transfer: r_squared(&transferred, &test_sample)?.r2,
        model: transferred.clone(),
        repetition_seed: seed,
    };
    kb.entry_mut(&target.id)?.converged_model = Some(transferred);
    Ok(outcome)
}

/// Forward transfer into `target` once per checkpoint, using the first `n`
/// tasks of the arrival order as sources at checkpoint `n`.
pub fn forward_transfer_at_times(
    kb: &mut KnowledgeBase,
    target: &TaskSpec,
    times: &[usize],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<Vec<TransferOutcome>> {
    let available = kb.arrival_order().iter().take_while(|id| **id != target.id).count();
    for pair in times.windows(2) {
        if pair[1] < pair[0] {
            return Err(Error::validation("checkpoints must be non-decreasing"));
        }
    }
    if let Some(&bad) = times.iter().find(|&&n| n == 0 || n > available) {
        return Err(Error::validation(format!(
            "checkpoint {bad} is outside 1..={available} source tasks"
        )));
    }
    times
        .iter()
        .map(|&n| {
            let sources = kb.arrival_order()[..n].to_vec();
            forward_transfer(kb, &sources, target, cfg, seed)
        })
        .collect()
}

/// Refines `source_id` from knowledge gathered on `target_id`: an auxiliary
/// learner starts at the source's partial snapshot and fits the pooled
/// source+target samples, then is fine-tuned (restricted) on the source alone.
pub fn backward_transfer(
    kb: &mut KnowledgeBase,
    source_id: &TaskId,
    target_id: &TaskId,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TransferOutcome> {
    backward_from_pool(kb, source_id, std::slice::from_ref(target_id), cfg, seed)
}

/// Backward transfer repeated for each target in order; step `k` pools the
/// source with the first `k` targets.
pub fn sequential_backward(
    kb: &mut KnowledgeBase,
    source_id: &TaskId,
    target_ids: &[TaskId],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<Vec<TransferOutcome>> {
    kb.entry(source_id)?;
    for id in target_ids {
        kb.entry(id)?;
    }
    (1..=target_ids.len())
        .map(|k| backward_from_pool(kb, source_id, &target_ids[..k], cfg, seed))
        .collect()
}

fn backward_from_pool(
    kb: &mut KnowledgeBase,
    source_id: &TaskId,
    target_ids: &[TaskId],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TransferOutcome> {
    cfg.validate()?;
    let source = kb.entry(source_id)?;
    if source.partial_model.converged {
        return Err(Error::State(format!("task {source_id} has no partial snapshot to refine")));
    }
    let mut pool = vec![&source.train_sample];
    for id in target_ids {
        pool.push(&kb.entry(id)?.train_sample);
    }
    let auxiliary = train_pooled(&source.partial_model, &pool, &cfg.unrestricted(), TrainMode::Full)?;
    let refined = train(&auxiliary, &source.train_sample, cfg, TrainMode::Full)?;
    let baseline = isolated_model(&source.train_sample, cfg, seed)?;
    let outcome = TransferOutcome {
        task_id: source_id.clone(),
        direction: Direction::Backward,
        sources_used: target_ids.to_vec(),
        r2_isolated_baseline: r_squared(&baseline, &source.test_sample)?.r2,
        r2_after_transfer: r_squared(&refined, &source.test_sample)?.r2,
        model: refined.clone(),
        repetition_seed: seed,
    };
    kb.entry_mut(source_id)?.converged_model = Some(refined);
    Ok(outcome)
}
