//! Synthetic task environment: labeling functions, label noise, sampling and
//! the affine input-transformation group that relates tasks to each other.
//!
//! Randomness comes from [`ChaCha8Rng`] seeded through `seed_from_u64`, and
//! Gaussian noise from the ziggurat sampler in `rand_distr`. Both are
//! value-stable across platforms, so a `(spec, seed)` pair always reproduces
//! the same sample.

use std::fmt;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};

/// Identifier reported in config/report headers for the PRNG stack.
pub const RNG_ALGORITHM: &str = "chacha8 (rand_chacha 0.3, seed_from_u64) + ziggurat normal (rand_distr 0.4)";

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Name of a task in the environment, e.g. `f1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TaskId(String);

impl TaskId {
    pub fn new(id: impl Into<String>) -> Self {
        TaskId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TaskId {
    fn from(s: &str) -> Self {
        TaskId(s.to_owned())
    }
}

/// True labeling rule of a task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionSpec {
    /// `y = a·x + b`
    Linear { a: f64, b: f64 },
    /// `y = x²`
    Quadratic,
}

impl FunctionSpec {
    pub fn linear(a: f64, b: f64) -> Result<Self> {
        let spec = FunctionSpec::Linear { a, b };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FunctionSpec::Linear { a, b } => {
                if !a.is_finite() || a == 0.0 {
                    return Err(Error::validation(format!(
                        "linear slope must be finite and nonzero, got {a}"
                    )));
                }
                if !b.is_finite() {
                    return Err(Error::validation(format!("linear intercept must be finite, got {b}")));
                }
                Ok(())
            }
            FunctionSpec::Quadratic => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            FunctionSpec::Linear { a, b } => a * x + b,
            FunctionSpec::Quadratic => x * x,
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FunctionSpec::Linear { a, b } if b < 0.0 => write!(f, "y = {a}x - {}", -b),
            FunctionSpec::Linear { a, b } => write!(f, "y = {a}x + {b}"),
            FunctionSpec::Quadratic => f.write_str("y = x^2"),
        }
    }
}

/// Additive Gaussian label noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub mean: f64,
    pub std: f64,
    pub enabled: bool,
}

impl NoiseModel {
    pub const fn disabled() -> Self {
        NoiseModel { mean: 0.0, std: 0.0, enabled: false }
    }

    pub const fn gaussian(mean: f64, std: f64) -> Self {
        NoiseModel { mean, std, enabled: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.std >= 0.0) || !self.std.is_finite() || !self.mean.is_finite() {
            return Err(Error::validation(format!(
                "noise needs finite mean and std >= 0, got mean {} std {}",
                self.mean, self.std
            )));
        }
        Ok(())
    }
}

/// Distribution of one task: labeling function, noise, input interval and sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub id: TaskId,
    pub function: FunctionSpec,
    pub noise: NoiseModel,
    pub domain_lo: f64,
    pub domain_hi: f64,
    pub sample_size: usize,
}

impl TaskSpec {
    pub fn validate(&self) -> Result<()> {
        self.function.validate()?;
        self.noise.validate()?;
        if !(self.domain_lo < self.domain_hi) || !self.domain_lo.is_finite() || !self.domain_hi.is_finite() {
            return Err(Error::validation(format!(
                "task {}: empty or non-finite domain [{}, {}]",
                self.id, self.domain_lo, self.domain_hi
            )));
        }
        if self.sample_size < 2 {
            return Err(Error::validation(format!(
                "task {}: sample size must be at least 2, got {}",
                self.id, self.sample_size
            )));
        }
        Ok(())
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }
}

/// Labeled points drawn from one task.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub points: Vec<(f64, f64)>,
    pub seed: u64,
    pub source_task: TaskId,
}

impl Sample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + Clone + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn ys(&self) -> impl Iterator<Item = f64> + Clone + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// CSV with an `x,y` header and 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for &(x, y) in &self.points {
            out.push_str(&format!("{},{}\n", fmt_f64(x), fmt_f64(y)));
        }
        out
    }

    pub fn from_csv(reader: impl BufRead, source_task: TaskId, seed: u64) -> Result<Self> {
        let mut lines = reader.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "x,y" => {}
            Some(Err(e)) => return Err(e.into()),
            _ => return Err(Error::validation("sample csv must start with header `x,y`")),
        }
        let mut points = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| Error::validation(format!("bad sample row {}: `{line}`", i + 2)))
            };
            let mut cols = line.split(',');
            let x = parse(cols.next())?;
            let y = parse(cols.next())?;
            points.push((x, y));
        }
        Ok(Sample { points, seed, source_task })
    }
}

/// Round-trippable `f64` rendering with 17 significant digits.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Draws `spec.sample_size` points with `x ~ U[domain_lo, domain_hi]` and
/// `y = f(x) + ε`, `ε ~ N(noise.mean, noise.std)` when noise is enabled.
pub fn generate_sample(spec: &TaskSpec, seed: u64) -> Result<Sample> {
    spec.validate()?;
    let mut rng = rng(seed);
    let xdist = Uniform::new_inclusive(spec.domain_lo, spec.domain_hi);
    let noise = if spec.noise.enabled {
        Some(
            Normal::new(spec.noise.mean, spec.noise.std)
                .map_err(|e| Error::validation(format!("noise model: {e}")))?,
        )
    } else {
        None
    };
    let points = (0..spec.sample_size)
        .map(|_| {
            let x = xdist.sample(&mut rng);
            let eps = noise.as_ref().map_or(0.0, |n| n.sample(&mut rng));
            (x, spec.function.eval(x) + eps)
        })
        .collect();
    Ok(Sample { points, seed, source_task: spec.id.clone() })
}

/// Shuffles `s` with a seeded PRNG and splits it into a train part of
/// `round_half_up(train_fraction·|s|)` points and a test part with the rest.
pub fn split_sample(s: &Sample, train_fraction: f64, seed: u64) -> Result<(Sample, Sample)> {
    if s.is_empty() {
        return Err(Error::validation("cannot split an empty sample"));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::validation(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n_train = train_size(s.len(), train_fraction);
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.shuffle(&mut rng(seed));
    let pick = |idx: &[usize]| Sample {
        points: idx.iter().map(|&i| s.points[i]).collect(),
        seed: s.seed,
        source_task: s.source_task.clone(),
    };
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}

/// Half-up rounding of `fraction·n`: 0.75 of 30 is 22.5, giving 23.
pub fn train_size(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64) + 0.5).floor() as usize
}

/// Input transformation `x ↦ scale·x + shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform {
    pub scale: f64,
    pub shift: f64,
}

impl AffineTransform {
    pub const IDENTITY: AffineTransform = AffineTransform { scale: 1.0, shift: 0.0 };

    pub fn new(scale: f64, shift: f64) -> Result<Self> {
        if scale == 0.0 || !scale.is_finite() || !shift.is_finite() {
            return Err(Error::validation(format!(
                "affine transform needs a finite nonzero scale, got ({scale}, {shift})"
            )));
        }
        Ok(AffineTransform { scale, shift })
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.shift
    }

    /// `self ∘ other`, i.e. `x ↦ self(other(x))`.
    pub fn compose(&self, other: &AffineTransform) -> AffineTransform {
        AffineTransform {
            scale: self.scale * other.scale,
            shift: self.scale * other.shift + self.shift,
        }
    }

    pub fn invert(&self) -> Result<AffineTransform> {
        if self.scale == 0.0 {
            return Err(Error::validation("cannot invert an affine transform with zero scale"));
        }
        Ok(AffineTransform { scale: 1.0 / self.scale, shift: -self.shift / self.scale })
    }
}

/// Finds `t` with `target(x) = source(t(x))`. Only linear pairs are related;
/// anything involving the quadratic rule yields `None`.
pub fn relating_transform(source: &FunctionSpec, target: &FunctionSpec) -> Option<AffineTransform> {
    match (*source, *target) {
        (FunctionSpec::Linear { a: a1, b: b1 }, FunctionSpec::Linear { a: a2, b: b2 }) => {
            if a1 == 0.0 || a2 == 0.0 {
                return None;
            }
            Some(AffineTransform { scale: a2 / a1, shift: (b2 - b1) / a1 })
        }
        _ => None,
    }
}

/// `n` evenly spaced points covering `[lo, hi]` inclusive.
pub(crate) fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
