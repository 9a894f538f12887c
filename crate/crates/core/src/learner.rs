//! One-hidden-layer tanh regression network trained by full-batch gradient
//! descent.
//!
//! The network itself works in standardized coordinates: every task's inputs
//! and targets are z-scored with the statistics of the training sample the
//! model was last fitted on, and those statistics travel with the model.
//! [`MlpModel::forward`] is the raw network; [`MlpModel::predict`] maps an
//! original-scale `x` to an original-scale `y`.

use std::fmt;
use std::io::BufRead;

use rand_distr::{Distribution, Uniform};

use crate::environment::{fmt_f64, rng, Sample};
use crate::error::{Error, Result};

pub const MODEL_HEADER: &str = "contrail-model v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
}

impl Activation {
    pub fn name(&self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
        }
    }
}

/// Affine z-scoring of inputs and targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardization {
    pub x_mean: f64,
    pub x_std: f64,
    pub y_mean: f64,
    pub y_std: f64,
}

impl Standardization {
    pub const IDENTITY: Standardization = Standardization { x_mean: 0.0, x_std: 1.0, y_mean: 0.0, y_std: 1.0 };

    /// Mean and sample standard deviation of each coordinate; a zero spread
    /// falls back to 1 so constant columns stay representable.
    pub fn fit(s: &Sample) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::validation("cannot standardize an empty sample"));
        }
        let (x_mean, x_std) = mean_std(s.xs());
        let (y_mean, y_std) = mean_std(s.ys());
        Ok(Standardization { x_mean, x_std, y_mean, y_std })
    }

    pub fn to_unit(&self, (x, y): (f64, f64)) -> (f64, f64) {
        ((x - self.x_mean) / self.x_std, (y - self.y_mean) / self.y_std)
    }

    pub fn apply(&self, s: &Sample) -> Vec<(f64, f64)> {
        s.points.iter().map(|&p| self.to_unit(p)).collect()
    }
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 1.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt();
    (mean, if std > 0.0 && std.is_finite() { std } else { 1.0 })
}

/// Hypothesis `h(x) = w2 · tanh(w1·x + b1) + b2` with training-state metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub hidden_units: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    pub activation: Activation,
    pub scaling: Standardization,
    pub epochs_trained: usize,
    pub converged: bool,
}

/// Weights `U[-1/√fan_in, 1/√fan_in]`, zero biases.
pub fn init_model(hidden_units: usize, seed: u64) -> Result<MlpModel> {
    if hidden_units < 1 {
        return Err(Error::validation("a model needs at least one hidden unit"));
    }
    let mut rng = rng(seed);
    let hidden = Uniform::new_inclusive(-1.0, 1.0);
    let out_bound = 1.0 / (hidden_units as f64).sqrt();
    let output = Uniform::new_inclusive(-out_bound, out_bound);
    let w1 = (0..hidden_units).map(|_| hidden.sample(&mut rng)).collect();
    let w2 = (0..hidden_units).map(|_| output.sample(&mut rng)).collect();
    Ok(MlpModel {
        hidden_units,
        w1,
        b1: vec![0.0; hidden_units],
        w2,
        b2: 0.0,
        activation: Activation::Tanh,
        scaling: Standardization::IDENTITY,
        epochs_trained: 0,
        converged: false,
    })
}

impl MlpModel {
    /// All-zero network with identity scaling.
    pub fn zeros(hidden_units: usize) -> Self {
        MlpModel {
            hidden_units,
            w1: vec![0.0; hidden_units],
            b1: vec![0.0; hidden_units],
            w2: vec![0.0; hidden_units],
            b2: 0.0,
            activation: Activation::Tanh,
            scaling: Standardization::IDENTITY,
            epochs_trained: 0,
            converged: false,
        }
    }

    pub fn param_count(&self) -> usize {
        3 * self.hidden_units + 1
    }

    /// Parameters flattened in the order `w1, b1, w2, b2`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        p.extend_from_slice(&self.w1);
        p.extend_from_slice(&self.b1);
        p.extend_from_slice(&self.w2);
        p.push(self.b2);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let h = self.hidden_units;
        assert_eq!(p.len(), self.param_count(), "parameter vector length");
        self.w1.copy_from_slice(&p[..h]);
        self.b1.copy_from_slice(&p[h..2 * h]);
        self.w2.copy_from_slice(&p[2 * h..3 * h]);
        self.b2 = p[3 * h];
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|v| v.is_finite())
    }

    /// Raw network output in standardized coordinates.
    pub fn forward(&self, x: f64) -> f64 {
        self.w1
            .iter()
            .zip(&self.b1)
            .zip(&self.w2)
            .map(|((w1, b1), w2)| w2 * (w1 * x + b1).tanh())
            .sum::<f64>()
            + self.b2
    }

    /// Original-scale prediction.
    pub fn predict(&self, x: f64) -> f64 {
        let s = &self.scaling;
        s.y_mean + s.y_std * self.forward((x - s.x_mean) / s.x_std)
    }
}

/// Mean squared error of the raw network over points already in network coordinates.
fn loss_on(model: &MlpModel, points: &[(f64, f64)]) -> f64 {
    points.iter().map(|&(x, y)| (model.forward(x) - y).powi(2)).sum::<f64>() / points.len() as f64
}

/// Loss and exact gradient (order `w1, b1, w2, b2`) in one pass.
fn loss_and_grad(model: &MlpModel, points: &[(f64, f64)], grad: &mut [f64]) -> f64 {
    let h = model.hidden_units;
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut act = vec![0.0; h];
    let mut loss = 0.0;
    for &(x, y) in points {
        let mut out = model.b2;
        for j in 0..h {
            act[j] = (model.w1[j] * x + model.b1[j]).tanh();
            out += model.w2[j] * act[j];
        }
        let r = out - y;
        loss += r * r;
        for j in 0..h {
            let dz = r * model.w2[j] * (1.0 - act[j] * act[j]);
            grad[j] += dz * x;
            grad[h + j] += dz;
            grad[2 * h + j] += r * act[j];
        }
        grad[3 * h] += r;
    }
    let scale = 2.0 / points.len() as f64;
    grad.iter_mut().for_each(|g| *g *= scale);
    loss / points.len() as f64
}

fn non_empty(s: &Sample) -> Result<()> {
    if s.is_empty() {
        Err(Error::validation(format!("sample of task {} is empty", s.source_task)))
    } else {
        Ok(())
    }
}

/// `(1/m) Σ (h(xᵢ) − yᵢ)²` with the sample mapped through the model's scaling.
pub fn mse_loss(model: &MlpModel, s: &Sample) -> Result<f64> {
    non_empty(s)?;
    Ok(loss_on(model, &model.scaling.apply(s)))
}

/// Analytic gradient of [`mse_loss`] with respect to every parameter.
pub fn gradient(model: &MlpModel, s: &Sample) -> Result<Vec<f64>> {
    non_empty(s)?;
    let mut g = vec![0.0; model.param_count()];
    loss_and_grad(model, &model.scaling.apply(s), &mut g);
    Ok(g)
}

/// Central finite differences of [`mse_loss`]; the test oracle for [`gradient`].
pub fn numeric_gradient(model: &MlpModel, s: &Sample, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::validation(format!("finite-difference step must be positive, got {step}")));
    }
    non_empty(s)?;
    let points = model.scaling.apply(s);
    let base = model.params();
    let mut probe = model.clone();
    let mut out = Vec::with_capacity(base.len());
    let mut p = base.clone();
    for i in 0..base.len() {
        p[i] = base[i] + step;
        probe.set_params(&p);
        let up = loss_on(&probe, &points);
        p[i] = base[i] - step;
        probe.set_params(&p);
        let down = loss_on(&probe, &points);
        p[i] = base[i];
        out.push((up - down) / (2.0 * step));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    Full,
    Partial,
}

/// Gradient-descent hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Relative training-loss improvement below which an epoch counts as stalled.
    pub convergence_tol: f64,
    /// Consecutive stalled epochs that end a full run.
    pub convergence_patience: usize,
    /// Fraction of the full-run epoch count used by partial training.
    pub partial_fraction: f64,
    /// Learning-rate multiplier on `w1, b1` during restricted fine-tuning.
    pub hidden_lr_factor: f64,
    pub hidden_units: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 5e-3,
            max_epochs: 20_000,
            convergence_tol: 1e-6,
            convergence_patience: 20,
            partial_fraction: 0.25,
            hidden_lr_factor: 0.0,
            hidden_units: 10,
            seed: 0,
        }
    }
}

/// How partial training picks its epoch budget; echoed in run headers.
pub const PARTIAL_RULE: &str = "partial = ceil(partial_fraction * E*), E* = epochs of a full run from the same start";

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::validation(format!("train config: {what}")));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be positive");
        }
        if !(self.convergence_tol > 0.0) {
            return bad("convergence_tol must be positive");
        }
        if self.convergence_patience == 0 {
            return bad("convergence_patience must be positive");
        }
        if !(self.partial_fraction > 0.0 && self.partial_fraction <= 1.0) {
            return bad("partial_fraction must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.hidden_lr_factor) {
            return bad("hidden_lr_factor must lie in [0, 1]");
        }
        if self.hidden_units == 0 {
            return bad("hidden_units must be positive");
        }
        Ok(())
    }

    /// Same config with the hidden layer learning at the full rate.
    pub fn unrestricted(&self) -> TrainConfig {
        TrainConfig { hidden_lr_factor: 1.0, ..self.clone() }
    }
}

/// Fits the model's scaling to `s`, then runs gradient descent on it.
///
/// `Full` stops once the relative loss improvement stays below
/// `convergence_tol` for `convergence_patience` epochs (or at `max_epochs`).
/// `Partial` measures that epoch count `E*` and then trains the starting
/// model for `ceil(partial_fraction·E*)` epochs, leaving `converged` false.
pub fn train(model: &MlpModel, s: &Sample, cfg: &TrainConfig, mode: TrainMode) -> Result<MlpModel> {
    non_empty(s)?;
    let scaling = Standardization::fit(s)?;
    let mut start = model.clone();
    start.scaling = scaling;
    descend_mode(&start, &scaling.apply(s), cfg, mode)
}

/// Trains on the union of several samples, each standardized with its own
/// statistics so related tasks land on a shared scale. The returned model
/// carries the first sample's scaling.
pub fn train_pooled(model: &MlpModel, samples: &[&Sample], cfg: &TrainConfig, mode: TrainMode) -> Result<MlpModel> {
    let first = samples.first().ok_or_else(|| Error::validation("pooled training needs at least one sample"))?;
    let mut points = Vec::new();
    for s in samples {
        non_empty(s)?;
        points.extend(Standardization::fit(s)?.apply(s));
    }
    let mut start = model.clone();
    start.scaling = Standardization::fit(first)?;
    descend_mode(&start, &points, cfg, mode)
}

fn descend_mode(start: &MlpModel, points: &[(f64, f64)], cfg: &TrainConfig, mode: TrainMode) -> Result<MlpModel> {
    cfg.validate()?;
    match mode {
        TrainMode::Full => descend(start, points, cfg, None),
        TrainMode::Partial => {
            let full = descend(start, points, cfg, None)?;
            let full_epochs = full.epochs_trained - start.epochs_trained;
            let budget = ((cfg.partial_fraction * full_epochs as f64).ceil() as usize).max(1);
            descend(start, points, cfg, Some(budget))
        }
    }
}

/// Plain full-batch gradient descent. With `fixed_epochs` the convergence
/// test is skipped and the result is marked unconverged.
fn descend(start: &MlpModel, points: &[(f64, f64)], cfg: &TrainConfig, fixed_epochs: Option<usize>) -> Result<MlpModel> {
    let h = start.hidden_units;
    let mut model = start.clone();
    let mut params = model.params();
    let mut grad = vec![0.0; params.len()];
    let initial_params = params.clone();
    let hidden_lr = cfg.learning_rate * cfg.hidden_lr_factor;

    let mut initial_loss = f64::NAN;
    let mut prev = f64::NAN;
    let mut stalled = 0;
    let mut converged = false;
    let budget = fixed_epochs.unwrap_or(cfg.max_epochs);
    let mut epochs = 0;
    while epochs < budget {
        let loss = loss_and_grad(&model, points, &mut grad);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { epoch: epochs, reason: format!("training loss became {loss}") });
        }
        if epochs == 0 {
            initial_loss = loss;
        } else if fixed_epochs.is_none() {
            let improvement = (prev - loss) / prev.max(f64::MIN_POSITIVE);
            if improvement.abs() < cfg.convergence_tol {
                stalled += 1;
                if stalled >= cfg.convergence_patience {
                    converged = true;
                    break;
                }
            } else {
                stalled = 0;
            }
        }
        prev = loss;
        for (i, (p, g)) in params.iter_mut().zip(&grad).enumerate() {
            let lr = if i < 2 * h { hidden_lr } else { cfg.learning_rate };
            *p -= lr * g;
        }
        model.set_params(&params);
        epochs += 1;
    }

    let final_loss = loss_on(&model, points);
    if !final_loss.is_finite() {
        return Err(Error::Diverged { epoch: epochs, reason: format!("training loss became {final_loss}") });
    }
    if epochs > 0 && final_loss > initial_loss {
        // never hand back a model worse than the one we started from
        model.set_params(&initial_params);
    }
    model.epochs_trained = start.epochs_trained + epochs;
    model.converged = converged;
    Ok(model)
}

/// Coefficient of determination and MSE on the original scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub r2: f64,
    pub mse: f64,
    pub n_points: usize,
}

pub fn r_squared(model: &MlpModel, s: &Sample) -> Result<EvalReport> {
    r_squared_of(s, |x| model.predict(x))
}

/// R² of an arbitrary predictor; shared by [`r_squared`] and tests.
pub fn r_squared_of(s: &Sample, predict: impl Fn(f64) -> f64) -> Result<EvalReport> {
    if s.len() < 2 {
        return Err(Error::validation("R² needs at least two points"));
    }
    let n = s.len() as f64;
    let y_bar = s.ys().sum::<f64>() / n;
    let ss_tot: f64 = s.ys().map(|y| (y - y_bar).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::validation("R² is undefined for a sample with zero target variance"));
    }
    let ss_res: f64 = s.points.iter().map(|&(x, y)| (y - predict(x)).powi(2)).sum();
    Ok(EvalReport { r2: 1.0 - ss_res / ss_tot, mse: ss_res / n, n_points: s.len() })
}

impl fmt::Display for MlpModel {
    /// The versioned snapshot format: header, activation, hidden units,
    /// training state, four scaling statistics, then `w1, b1, w2, b2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{MODEL_HEADER}")?;
        writeln!(f, "{}", self.activation.name())?;
        writeln!(f, "{}", self.hidden_units)?;
        writeln!(f, "{} {}", self.epochs_trained, if self.converged { "converged" } else { "partial" })?;
        let s = &self.scaling;
        for v in [s.x_mean, s.x_std, s.y_mean, s.y_std].into_iter().chain(self.params()) {
            writeln!(f, "{}", fmt_f64(v))?;
        }
        Ok(())
    }
}

impl MlpModel {
    pub fn to_snapshot(&self) -> String {
        self.to_string()
    }

    pub fn from_snapshot(reader: impl BufRead) -> Result<MlpModel> {
        let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
        let bad = |what: &str| Error::validation(format!("model snapshot: {what}"));
        let mut it = lines.iter().map(|l| l.trim());
        if it.next() != Some(MODEL_HEADER) {
            return Err(bad("missing `contrail-model v1` header"));
        }
        let activation = match it.next() {
            Some("tanh") => Activation::Tanh,
            other => return Err(bad(&format!("unknown activation {other:?}"))),
        };
        let hidden_units: usize = it
            .next()
            .and_then(|l| l.parse().ok())
            .filter(|&h| h > 0)
            .ok_or_else(|| bad("bad hidden unit count"))?;
        let (epochs_trained, converged) = {
            let line = it.next().ok_or_else(|| bad("missing training state"))?;
            let mut parts = line.split_whitespace();
            let epochs = parts.next().and_then(|e| e.parse().ok()).ok_or_else(|| bad("bad epoch count"))?;
            let converged = match parts.next() {
                Some("converged") => true,
                Some("partial") => false,
                _ => return Err(bad("bad training state")),
            };
            (epochs, converged)
        };
        let values: Vec<f64> = it
            .filter(|l| !l.is_empty())
            .map(|l| l.parse::<f64>().map_err(|_| bad(&format!("bad number `{l}`"))))
            .collect::<Result<_>>()?;
        if values.len() != 4 + 3 * hidden_units + 1 {
            return Err(bad(&format!("expected {} values, found {}", 4 + 3 * hidden_units + 1, values.len())));
        }
        let mut model = MlpModel::zeros(hidden_units);
        model.activation = activation;
        model.scaling = Standardization { x_mean: values[0], x_std: values[1], y_mean: values[2], y_std: values[3] };
        model.set_params(&values[4..]);
        model.epochs_trained = epochs_trained;
        model.converged = converged;
        Ok(model)
    }
}

/// Finite-difference step used by [`gradient_check`].
pub const GRADCHECK_STEP: f64 = 1e-6;
pub const GRADCHECK_REL_TOL: f64 = 1e-4;
pub const GRADCHECK_ABS_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub trials: usize,
    /// Trials in which some component disagreed beyond tolerance.
    pub failures: usize,
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|, floor)` seen.
    pub worst_relative: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Compares [`gradient`] with [`numeric_gradient`] on `trials` random
/// (model, sample) pairs. Components agree when they are within
/// [`GRADCHECK_REL_TOL`] relative or [`GRADCHECK_ABS_FLOOR`] absolute.
pub fn gradient_check(trials: usize, seed: u64) -> Result<GradCheckReport> {
    let mut r = rng(seed);
    let mut report = GradCheckReport { trials, failures: 0, worst_relative: 0.0 };
    for _ in 0..trials {
        let hidden = Uniform::new_inclusive(1usize, 12).sample(&mut r);
        let n = Uniform::new_inclusive(2usize, 30).sample(&mut r);
        let mut model = init_model(hidden, Uniform::new_inclusive(0, u64::MAX).sample(&mut r))?;
        let jitter = Uniform::new(-0.5, 0.5);
        let p: Vec<f64> = model.params().iter().map(|v| v + jitter.sample(&mut r)).collect();
        model.set_params(&p);
        let (a, b) = (Uniform::new(-6.0, 6.0).sample(&mut r), Uniform::new(-12.0, 12.0).sample(&mut r));
        let points: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let x = Uniform::new(0.0, 10.0).sample(&mut r);
                (x, a * x + b + jitter.sample(&mut r))
            })
            .collect();
        let sample = Sample { points, seed, source_task: "gradcheck".into() };
        model.scaling = Standardization::fit(&sample)?;
        let analytic = gradient(&model, &sample)?;
        let numeric = numeric_gradient(&model, &sample, GRADCHECK_STEP)?;
        let mut ok = true;
        for (g, h) in analytic.iter().zip(&numeric) {
            let diff = (g - h).abs();
            let rel = diff / g.abs().max(h.abs()).max(GRADCHECK_ABS_FLOOR);
            report.worst_relative = report.worst_relative.max(rel);
            if diff > GRADCHECK_ABS_FLOOR && rel > GRADCHECK_REL_TOL {
                ok = false;
            }
        }
        if !ok {
            report.failures += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::TaskId;

    fn sample(points: &[(f64, f64)]) -> Sample {
        Sample { points: points.to_vec(), seed: 0, source_task: TaskId::new("t") }
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = init_model(10, 1).unwrap();
        assert_eq!(a, init_model(10, 1).unwrap());
        assert_ne!(a.params(), init_model(10, 2).unwrap().params());
        assert!(a.w1.iter().all(|w| w.abs() <= 1.0));
        assert!(a.b1.iter().all(|&b| b == 0.0));
        assert!(a.w2.iter().all(|w| w.abs() <= 1.0 / 10f64.sqrt()));
        assert_eq!(init_model(1, 5).unwrap().params().len(), 4);
        assert!(init_model(0, 1).is_err());
        assert!(!a.converged && a.epochs_trained == 0);
    }

    #[test]
    fn forward_examples() {
        assert_eq!(MlpModel::zeros(10).forward(3.7), 0.0);
        let mut m = MlpModel::zeros(1);
        m.set_params(&[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(m.forward(0.0), 0.0);
        m.set_params(&[1.0, 0.0, 2.0, 1.0]);
        assert!((m.forward(100.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mse_examples() {
        let zero = MlpModel::zeros(3);
        assert_eq!(mse_loss(&zero, &sample(&[(0.0, 3.0)])).unwrap(), 9.0);
        assert_eq!(mse_loss(&zero, &sample(&[(0.0, 1.0), (0.0, -1.0)])).unwrap(), 1.0);
        assert_eq!(mse_loss(&zero, &sample(&[(0.0, 0.0), (2.0, 0.0)])).unwrap(), 0.0);
        assert!(mse_loss(&zero, &sample(&[])).is_err());
        assert!(gradient(&zero, &sample(&[])).is_err());
    }

    #[test]
    fn gradient_vanishes_at_an_exact_fit() {
        let mut m = MlpModel::zeros(2);
        m.set_params(&[0.5, -1.0, 0.1, 0.3, 2.0, -0.5, 0.25]);
        let s = sample(&[(-1.0, m.forward(-1.0)), (0.5, m.forward(0.5)), (2.0, m.forward(2.0))]);
        assert!(gradient(&m, &s).unwrap().iter().all(|g| g.abs() < 1e-15));
    }

    #[test]
    fn gradient_is_invariant_to_duplication() {
        let m = init_model(4, 3).unwrap();
        let s = sample(&[(0.1, 1.0), (-0.7, 0.2), (1.3, -2.0)]);
        let mut doubled = s.clone();
        doubled.points.extend(s.points.clone());
        let a = gradient(&m, &s).unwrap();
        let b = gradient(&m, &doubled).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-15 * x.abs().max(1.0));
        }
    }

    #[test]
    fn numeric_gradient_of_a_single_linear_unit() {
        // with w1 tiny, tanh is ~linear; check against the closed form on b2 only,
        // where L(b2) = mean((c + b2 - y)²) is exactly quadratic
        let mut m = MlpModel::zeros(1);
        m.set_params(&[0.0, 0.0, 0.0, 0.7]);
        let s = sample(&[(1.0, 2.0), (3.0, -1.0)]);
        let num = numeric_gradient(&m, &s, 1e-6).unwrap();
        let exact_b2 = ((0.7 - 2.0) + (0.7 + 1.0)) * 2.0 / 2.0;
        assert!((num[3] - exact_b2).abs() < 1e-8);
        assert!(numeric_gradient(&m, &s, 0.0).is_err());
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let m = init_model(5, 9).unwrap();
        let s = sample(&[(0.3, 1.2), (-1.1, 0.4), (0.9, -0.8), (1.7, 2.2)]);
        let a = gradient(&m, &s).unwrap();
        let n = numeric_gradient(&m, &s, 1e-6).unwrap();
        for (x, y) in a.iter().zip(&n) {
            assert!((x - y).abs() <= 1e-5 * x.abs().max(y.abs()) + 1e-8, "{x} vs {y}");
        }
    }

    fn line_sample() -> Sample {
        let pts: Vec<_> = (0..23).map(|i| {
            let x = i as f64 * 10.0 / 22.0;
            (x, -3.0 * x + 10.0)
        }).collect();
        sample(&pts)
    }

    #[test]
    fn random_gradient_checks_pass() {
        let r = gradient_check(20, 11).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.trials, 20);
    }

    #[test]
    fn full_training_fits_a_noiseless_line() {
        let m = init_model(10, 1).unwrap();
        let s = line_sample();
        let trained = train(&m, &s, &TrainConfig::default().unrestricted(), TrainMode::Full).unwrap();
        let r2 = r_squared(&trained, &s).unwrap().r2;
        assert!(r2 >= 0.999, "training R² {r2} after {} epochs", trained.epochs_trained);
        assert!(trained.epochs_trained > 0);
    }

    #[test]
    fn partial_training_uses_a_quarter_of_the_full_budget() {
        let m = init_model(10, 1).unwrap();
        let s = line_sample();
        let cfg = TrainConfig::default().unrestricted();
        let full = train(&m, &s, &cfg, TrainMode::Full).unwrap();
        let partial = train(&m, &s, &cfg, TrainMode::Partial).unwrap();
        assert!(!partial.converged);
        assert_eq!(partial.epochs_trained, (0.25 * full.epochs_trained as f64).ceil() as usize);
    }

    #[test]
    fn huge_learning_rate_is_reported_as_divergence() {
        let m = init_model(10, 1).unwrap();
        let cfg = TrainConfig { learning_rate: 1e3, ..TrainConfig::default() };
        let err = train(&m, &line_sample(), &cfg, TrainMode::Full).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
    }

    #[test]
    fn training_is_deterministic_and_never_worse() {
        let m = init_model(10, 4).unwrap();
        let s = line_sample();
        let cfg = TrainConfig { max_epochs: 500, ..TrainConfig::default() };
        let a = train(&m, &s, &cfg, TrainMode::Full).unwrap();
        assert_eq!(a, train(&m, &s, &cfg, TrainMode::Full).unwrap());
        let mut start = m.clone();
        start.scaling = Standardization::fit(&s).unwrap();
        assert!(mse_loss(&a, &s).unwrap() <= mse_loss(&start, &s).unwrap());
    }

    #[test]
    fn r_squared_examples() {
        let s = sample(&[(0.0, 1.0), (1.0, 3.0), (2.0, 2.0)]);
        assert_eq!(r_squared_of(&s, |x| [1.0, 3.0, 2.0][x as usize]).unwrap().r2, 1.0);
        assert!(r_squared_of(&s, |_| 2.0).unwrap().r2.abs() < 1e-15);
        assert!(r_squared_of(&s, |_| 10.0).unwrap().r2 < 0.0);
        assert!(r_squared_of(&sample(&[(0.0, 1.0), (1.0, 1.0)]), |_| 1.0).is_err());
        assert!(r_squared_of(&sample(&[(0.0, 1.0)]), |_| 1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        assert!(TrainConfig { learning_rate: 0.0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { partial_fraction: 0.0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { hidden_lr_factor: 1.5, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn snapshot_round_trips() {
        let mut m = init_model(3, 8).unwrap();
        m.scaling = Standardization { x_mean: 5.0, x_std: 2.9, y_mean: -5.0, y_std: 8.6 };
        m.epochs_trained = 42;
        let text = m.to_snapshot();
        assert!(text.starts_with("contrail-model v1\ntanh\n3\n42 partial\n"));
        assert_eq!(text.lines().count(), 4 + 4 + 10);
        assert_eq!(MlpModel::from_snapshot(text.as_bytes()).unwrap(), m);
        assert!(MlpModel::from_snapshot("nope\n".as_bytes()).is_err());
    }
}
