//! Closed-form sample-complexity and error-gap bounds for forward, backward
//! and continual transfer.
//!
//! Every `log` is the natural logarithm. VC dimensions and the learner
//! capacity `C(ε, H)` cannot be computed for neural networks, so they are
//! inputs: dimensions as plain numbers, capacity as a [`LogCapacity`] giving
//! `ln C` directly.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Default leading constant of the source-sample bound. A variant of the
/// sequential backward result states 8 instead; pass it through
/// [`min_source_sample_with`] to evaluate that form.
pub const SOURCE_SAMPLE_COEFFICIENT: f64 = 88.0;

/// `ln C(ε, H)` as a function of accuracy and number of tasks.
#[derive(Clone, Copy)]
pub enum LogCapacity<'a> {
    /// `K`, independent of `n`.
    Constant(f64),
    /// `K·n`: the boundary case where per-task requirements stop shrinking.
    Linear(f64),
    /// `K·√n`.
    Sqrt(f64),
    Custom(&'a dyn Fn(f64, usize) -> f64),
}

impl LogCapacity<'_> {
    pub fn eval(&self, eps: f64, n: usize) -> Result<f64> {
        let v = match *self {
            LogCapacity::Constant(k) => k,
            LogCapacity::Linear(k) => k * n as f64,
            LogCapacity::Sqrt(k) => k * (n as f64).sqrt(),
            LogCapacity::Custom(f) => f(eps, n),
        };
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::validation(format!("log-capacity must be finite and >= 0, got {v}")));
        }
        Ok(v)
    }

    pub fn preset(name: &str, k: f64) -> Result<LogCapacity<'static>> {
        match name {
            "constant" => Ok(LogCapacity::Constant(k)),
            "linear" => Ok(LogCapacity::Linear(k)),
            "sqrt" => Ok(LogCapacity::Sqrt(k)),
            other => Err(Error::validation(format!("unknown capacity preset `{other}` (constant, linear, sqrt)"))),
        }
    }
}

impl fmt::Debug for LogCapacity<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogCapacity::Constant(k) => write!(f, "Constant({k})"),
            LogCapacity::Linear(k) => write!(f, "Linear({k})"),
            LogCapacity::Sqrt(k) => write!(f, "Sqrt({k})"),
            LogCapacity::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// VC dimensions of the learner's hypothesis family, which must satisfy
/// `d_max ≤ d_H(n) ≤ VC-dim(H)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VcDimensions {
    pub d_max: f64,
    pub d_h_n: f64,
    pub vc_dim: f64,
}

impl VcDimensions {
    /// The large-`n` regime in which all three coincide.
    pub fn tied(d: f64) -> Self {
        VcDimensions { d_max: d, d_h_n: d, vc_dim: d }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_max >= 0.0 && self.d_max <= self.d_h_n && self.d_h_n <= self.vc_dim && self.vc_dim.is_finite()) {
            return Err(Error::validation(format!(
                "need 0 <= d_max <= d_H(n) <= VC-dim(H), got {} / {} / {}",
                self.d_max, self.d_h_n, self.vc_dim
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonVariant {
    /// Backward term `n(n − 1)·ε_b`.
    AsEq35,
    /// Backward term `n(n − 1)/2·ε_b`, the sum of the per-task gaps.
    AsEq31Summed,
}

/// An evaluated bound with the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: &'static str,
    pub value: f64,
    /// Integer ceiling (at least 1) for sample-size bounds; `None` for error gaps.
    pub ceiling: Option<u64>,
    pub params: BTreeMap<String, String>,
}

impl BoundReport {
    fn sample_size(name: &'static str, value: f64, params: &[(&str, String)]) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Domain(format!("{name} evaluated to {value}")));
        }
        Ok(BoundReport { name, value, ceiling: Some((value.ceil() as u64).max(1)), params: to_map(params) })
    }

    fn gap(name: &'static str, value: f64, params: &[(&str, String)]) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Domain(format!("{name} evaluated to {value}")));
        }
        Ok(BoundReport { name, value, ceiling: None, params: to_map(params) })
    }

    fn params_line(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v};")).collect()
    }

    /// `key=value` lines.
    pub fn to_kv(&self) -> String {
        let mut out = format!("bound={}\nvalue={}\n", self.name, self.value);
        if let Some(c) = self.ceiling {
            out.push_str(&format!("ceiling={c}\n"));
        }
        out.push_str("log=natural\n");
        for (k, v) in &self.params {
            out.push_str(&format!("param.{k}={v}\n"));
        }
        out
    }

    pub const CSV_HEADER: &'static str = "bound,value,ceiling,params";

    /// `bound,value,ceiling,params` with params as a sorted `k=v;` list.
    pub fn to_csv_row(&self) -> String {
        let ceiling = self.ceiling.map_or(String::new(), |c| c.to_string());
        format!("{},{},{},{}", self.name, self.value, ceiling, self.params_line())
    }
}

fn to_map(params: &[(&str, String)]) -> BTreeMap<String, String> {
    params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn check_eps(name: &str, eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::validation(format!("{name} must be positive, got {eps}")));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::validation(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

fn check_dim(name: &str, d: f64) -> Result<()> {
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::validation(format!("{name} must be finite and >= 0, got {d}")));
    }
    Ok(())
}

/// Target-task sample size for forward transfer:
/// `64/ε₁² · (2·d_max·ln(12/ε₁) + ln(8/δ))`.
pub fn min_target_sample(eps1: f64, delta: f64, d_max: f64) -> Result<BoundReport> {
    check_eps("epsilon1", eps1)?;
    check_delta(delta)?;
    check_dim("d_max", d_max)?;
    let value = 64.0 / (eps1 * eps1) * (2.0 * d_max * (12.0 / eps1).ln() + (8.0 / delta).ln());
    BoundReport::sample_size(
        "min_target_sample",
        value,
        &[("epsilon1", eps1.to_string()), ("delta", delta.to_string()), ("d_max", d_max.to_string())],
    )
}

/// Per-source sample size: `88/ε₂² · (2·d_H(n)·ln(22/ε₂) + ½·ln(8/δ))`.
pub fn min_source_sample(eps2: f64, delta: f64, d_h_n: f64) -> Result<BoundReport> {
    min_source_sample_with(SOURCE_SAMPLE_COEFFICIENT, eps2, delta, d_h_n)
}

pub fn min_source_sample_with(coefficient: f64, eps2: f64, delta: f64, d_h_n: f64) -> Result<BoundReport> {
    check_eps("coefficient", coefficient)?;
    check_eps("epsilon2", eps2)?;
    check_delta(delta)?;
    check_dim("d_h_n", d_h_n)?;
    let value = coefficient / (eps2 * eps2) * (2.0 * d_h_n * (22.0 / eps2).ln() + 0.5 * (8.0 / delta).ln());
    BoundReport::sample_size(
        "min_source_sample",
        value,
        &[
            ("coefficient", coefficient.to_string()),
            ("epsilon2", eps2.to_string()),
            ("delta", delta.to_string()),
            ("d_h_n", d_h_n.to_string()),
        ],
    )
}

/// Order of examples needed per task with `n` tasks: `(1/n)·ln C(ε, Hⁿ)`.
/// It shrinks with `n` only when the log-capacity grows sublinearly.
pub fn examples_per_task_scaling(n: usize, eps: f64, capacity: LogCapacity<'_>) -> Result<BoundReport> {
    if n == 0 {
        return Err(Error::validation("n must be at least 1"));
    }
    check_eps("epsilon", eps)?;
    let value = capacity.eval(eps, n)? / n as f64;
    BoundReport::sample_size(
        "examples_per_task_scaling",
        value,
        &[("n", n.to_string()), ("epsilon", eps.to_string()), ("capacity", format!("{capacity:?}"))],
    )
}

/// Extra error of task `i` of `n` learned with transfer both ways:
/// `(i − 1)·ε_f + (n − i)·ε_b`.
pub fn per_task_transfer_gap(i: usize, n: usize, eps_f: f64, eps_b: f64) -> Result<BoundReport> {
    if i == 0 || i > n {
        return Err(Error::validation(format!("task index must satisfy 1 <= i <= n, got i={i}, n={n}")));
    }
    check_dim("epsilon_f", eps_f)?;
    check_dim("epsilon_b", eps_b)?;
    let value = (i - 1) as f64 * eps_f + (n - i) as f64 * eps_b;
    BoundReport::gap(
        "per_task_transfer_gap",
        value,
        &[("i", i.to_string()), ("n", n.to_string()), ("epsilon_f", eps_f.to_string()), ("epsilon_b", eps_b.to_string())],
    )
}

/// Accumulated transfer slack over `n` tasks. The two variants differ only in
/// the backward term; see [`EpsilonVariant`].
pub fn continual_epsilon(n: usize, eps_f: f64, eps_b: f64, variant: EpsilonVariant) -> Result<BoundReport> {
    if n == 0 {
        return Err(Error::validation("n must be at least 1"));
    }
    check_dim("epsilon_f", eps_f)?;
    check_dim("epsilon_b", eps_b)?;
    let nf = n as f64;
    let forward = nf * (nf - 1.0) / 2.0 * eps_f;
    let backward = match variant {
        EpsilonVariant::AsEq35 => nf * (nf - 1.0) * eps_b,
        EpsilonVariant::AsEq31Summed => nf * (nf - 1.0) / 2.0 * eps_b,
    };
    let variant_name = match variant {
        EpsilonVariant::AsEq35 => "as_eq35",
        EpsilonVariant::AsEq31Summed => "as_eq31_summed",
    };
    BoundReport::gap(
        "continual_epsilon",
        forward + backward,
        &[
            ("n", n.to_string()),
            ("epsilon_f", eps_f.to_string()),
            ("epsilon_b", eps_b.to_string()),
            ("variant", variant_name.to_string()),
        ],
    )
}

/// Number of tasks needed to learn a good bias:
/// `max(256/ε² · (ln 8 + ln C(ε/32, H*) − ln δ), 64/ε²)`.
pub fn min_tasks(eps: f64, delta: f64, capacity_star: LogCapacity<'_>) -> Result<BoundReport> {
    check_eps("epsilon", eps)?;
    check_delta(delta)?;
    let log_c = capacity_star.eval(eps / 32.0, 1)?;
    let e2 = eps * eps;
    let value = (256.0 / e2 * (8f64.ln() + log_c - delta.ln())).max(64.0 / e2);
    BoundReport::sample_size(
        "min_tasks",
        value,
        &[("epsilon", eps.to_string()), ("delta", delta.to_string()), ("capacity", format!("{capacity_star:?}"))],
    )
}

/// Examples per task with `n` tasks:
/// `max(256/(n·ε²) · (ln 8 + ln C(ε/32, Hⁿ) − ln δ), 64/ε²)`.
pub fn min_examples_theorem3(n: usize, eps: f64, delta: f64, capacity_n: LogCapacity<'_>) -> Result<BoundReport> {
    if n == 0 {
        return Err(Error::validation("n must be at least 1"));
    }
    check_eps("epsilon", eps)?;
    check_delta(delta)?;
    let log_c = capacity_n.eval(eps / 32.0, n)?;
    let e2 = eps * eps;
    let value = (256.0 / (n as f64 * e2) * (8f64.ln() + log_c - delta.ln())).max(64.0 / e2);
    BoundReport::sample_size(
        "min_examples_theorem3",
        value,
        &[
            ("n", n.to_string()),
            ("epsilon", eps.to_string()),
            ("delta", delta.to_string()),
            ("capacity", format!("{capacity_n:?}")),
        ],
    )
}

/// Uniform deviation between true and empirical error with `m` examples and
/// dimension `d`: `sqrt(32/m · (d·ln(2εm/d) + ln(2/δ)))`. Requires `2εm/d > 1`.
pub fn generalization_gap(m: usize, d: f64, eps: f64, delta: f64) -> Result<BoundReport> {
    if m == 0 {
        return Err(Error::validation("m must be at least 1"));
    }
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::validation(format!("d must be positive, got {d}")));
    }
    check_eps("epsilon", eps)?;
    check_delta(delta)?;
    let ratio = 2.0 * eps * m as f64 / d;
    if !(ratio > 1.0) {
        return Err(Error::Domain(format!("log guard violated: 2*epsilon*m/d = {ratio} must exceed 1")));
    }
    let value = (32.0 / m as f64 * (d * ratio.ln() + (2.0 / delta).ln())).sqrt();
    BoundReport::gap(
        "generalization_gap",
        value,
        &[("m", m.to_string()), ("d", d.to_string()), ("epsilon", eps.to_string()), ("delta", delta.to_string())],
    )
}

/// Names accepted by [`evaluate`].
pub const BOUND_NAMES: [&str; 8] = [
    "min_target_sample",
    "min_source_sample",
    "examples_per_task_scaling",
    "per_task_transfer_gap",
    "continual_epsilon",
    "min_tasks",
    "min_examples_theorem3",
    "generalization_gap",
];

/// Evaluates a bound by name from string parameters, as the CLI receives
/// them. Capacity-based bounds read `capacity` (`constant`, `linear`, `sqrt`)
/// and `capacity_k`.
pub fn evaluate(name: &str, params: &BTreeMap<String, String>) -> Result<BoundReport> {
    let known: &[&str] = match name {
        "min_target_sample" => &["epsilon1", "delta", "d_max"],
        "min_source_sample" => &["epsilon2", "delta", "d_h_n", "coefficient"],
        "examples_per_task_scaling" => &["n", "epsilon", "capacity", "capacity_k"],
        "per_task_transfer_gap" => &["i", "n", "epsilon_f", "epsilon_b"],
        "continual_epsilon" => &["n", "epsilon_f", "epsilon_b", "variant"],
        "min_tasks" => &["epsilon", "delta", "capacity", "capacity_k"],
        "min_examples_theorem3" => &["n", "epsilon", "delta", "capacity", "capacity_k"],
        "generalization_gap" => &["m", "d", "epsilon", "delta"],
        other => {
            return Err(Error::validation(format!("unknown bound `{other}`; expected one of {}", BOUND_NAMES.join(", "))))
        }
    };
    if let Some(extra) = params.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Error::validation(format!("bound {name} does not take parameter `{extra}`")));
    }
    let real = |key: &str| -> Result<f64> {
        params
            .get(key)
            .ok_or_else(|| Error::validation(format!("missing parameter `{key}`")))?
            .parse()
            .map_err(|_| Error::validation(format!("parameter `{key}` is not a number")))
    };
    let int = |key: &str| -> Result<usize> {
        params
            .get(key)
            .ok_or_else(|| Error::validation(format!("missing parameter `{key}`")))?
            .parse()
            .map_err(|_| Error::validation(format!("parameter `{key}` is not a non-negative integer")))
    };
    let capacity = || -> Result<LogCapacity<'static>> {
        let preset = params.get("capacity").map_or("constant", String::as_str);
        LogCapacity::preset(preset, real("capacity_k")?)
    };
    match name {
        "min_target_sample" => min_target_sample(real("epsilon1")?, real("delta")?, real("d_max")?),
        "min_source_sample" => {
            let coefficient = if params.contains_key("coefficient") { real("coefficient")? } else { SOURCE_SAMPLE_COEFFICIENT };
            min_source_sample_with(coefficient, real("epsilon2")?, real("delta")?, real("d_h_n")?)
        }
        "examples_per_task_scaling" => examples_per_task_scaling(int("n")?, real("epsilon")?, capacity()?),
        "per_task_transfer_gap" => per_task_transfer_gap(int("i")?, int("n")?, real("epsilon_f")?, real("epsilon_b")?),
        "continual_epsilon" => {
            let variant = match params.get("variant").map_or("as_eq31_summed", String::as_str) {
                "as_eq35" => EpsilonVariant::AsEq35,
                "as_eq31_summed" => EpsilonVariant::AsEq31Summed,
                other => return Err(Error::validation(format!("unknown variant `{other}` (as_eq35, as_eq31_summed)"))),
            };
            continual_epsilon(int("n")?, real("epsilon_f")?, real("epsilon_b")?, variant)
        }
        "min_tasks" => min_tasks(real("epsilon")?, real("delta")?, capacity()?),
        "min_examples_theorem3" => min_examples_theorem3(int("n")?, real("epsilon")?, real("delta")?, capacity()?),
        "generalization_gap" => generalization_gap(int("m")?, real("d")?, real("epsilon")?, real("delta")?),
        _ => unreachable!("name checked above"),
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    // Reference values from a 40-digit evaluation of the same closed forms.
    #[test]
    fn high_precision_reference_values() {
        let cases = [
            (min_target_sample(0.1, 0.05, 10.0).unwrap().value, 645280.0554935983795625),
            (min_source_sample(0.1, 0.05, 10.0).unwrap().value, 971609.2129450444690549),
            (min_source_sample(0.1, 0.05, 0.0).unwrap().value, 22330.76478702883845542),
            (min_source_sample_with(8.0, 0.1, 0.05, 10.0).unwrap().value, 88328.11026773131536863),
            (min_tasks(1.0, 0.05, LogCapacity::Constant(0.0)).unwrap().value, 1299.244496699859691952),
            (min_examples_theorem3(4, 0.5, 0.05, LogCapacity::Constant(10.0)).unwrap().value, 3859.244496699859691952),
            (generalization_gap(1000, 10.0, 1.0, 0.05).unwrap().value, 1.346664657525034217632),
        ];
        for (got, want) in cases {
            assert!(rel(got, want) <= 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn source_sample_with_zero_dimension() {
        let r = min_source_sample(0.1, 0.05, 0.0).unwrap();
        assert!(rel(r.value, 4400.0 * 160f64.ln()) < 1e-12);
    }

    #[test]
    fn per_task_gap_examples() {
        assert_eq!(per_task_transfer_gap(1, 1, 0.1, 0.2).unwrap().value, 0.0);
        assert!((per_task_transfer_gap(1, 5, 0.1, 0.2).unwrap().value - 0.8).abs() < 1e-15);
        assert!((per_task_transfer_gap(5, 5, 0.1, 0.2).unwrap().value - 0.4).abs() < 1e-15);
        assert!(per_task_transfer_gap(0, 5, 0.1, 0.2).is_err());
        assert!(per_task_transfer_gap(6, 5, 0.1, 0.2).is_err());
    }

    #[test]
    fn continual_epsilon_examples() {
        for v in [EpsilonVariant::AsEq35, EpsilonVariant::AsEq31Summed] {
            assert_eq!(continual_epsilon(1, 0.1, 0.1, v).unwrap().value, 0.0);
        }
        assert!((continual_epsilon(3, 0.1, 0.1, EpsilonVariant::AsEq35).unwrap().value - 0.9).abs() < 1e-12);
        assert!((continual_epsilon(3, 0.1, 0.1, EpsilonVariant::AsEq31Summed).unwrap().value - 0.6).abs() < 1e-12);
    }

    #[test]
    fn scaling_examples() {
        let at = |n, c| examples_per_task_scaling(n, 0.1, c).unwrap().value;
        assert!(rel(at(2, LogCapacity::Constant(5.0)), at(1, LogCapacity::Constant(5.0)) / 2.0) < 1e-15);
        assert_eq!(at(7, LogCapacity::Linear(3.0)), at(1, LogCapacity::Linear(3.0)));
        assert!(rel(at(4, LogCapacity::Sqrt(3.0)), at(1, LogCapacity::Sqrt(3.0)) / 2.0) < 1e-15);
        let negative = |_: f64, _: usize| -1.0;
        assert!(examples_per_task_scaling(1, 0.1, LogCapacity::Custom(&negative)).is_err());
    }

    #[test]
    fn min_tasks_capacity_is_additive_in_log() {
        let base = min_tasks(0.5, 0.05, LogCapacity::Constant(3.0)).unwrap().value;
        let doubled = min_tasks(0.5, 0.05, LogCapacity::Constant(3.0 + 2f64.ln())).unwrap().value;
        assert!(rel(doubled - base, 2f64.ln() * 256.0 / 0.25) < 1e-9);
        let big = min_tasks(1e3, 0.5, LogCapacity::Constant(0.0)).unwrap();
        assert!(big.value < 1.0 && big.ceiling == Some(1));
    }

    #[test]
    fn examples_per_task_limits() {
        let one = min_examples_theorem3(1, 0.5, 0.05, LogCapacity::Constant(10.0)).unwrap().value;
        let single = min_tasks(0.5, 0.05, LogCapacity::Constant(10.0)).unwrap().value;
        assert_eq!(one, single);
        let far = min_examples_theorem3(1_000_000, 0.5, 0.05, LogCapacity::Sqrt(10.0)).unwrap().value;
        assert_eq!(far, 64.0 / 0.25);
    }

    #[test]
    fn generalization_gap_guard_and_shape() {
        assert!(matches!(generalization_gap(10, 10.0, 0.5, 0.05), Err(Error::Domain(_))));
        let g1 = generalization_gap(1000, 10.0, 1.0, 0.05).unwrap().value;
        let g4 = generalization_gap(4000, 10.0, 1.0, 0.05).unwrap().value;
        assert!(g4 < g1 && g4 > g1 / 2.0);
    }

    #[test]
    fn vc_dimension_ordering() {
        assert!(VcDimensions::tied(10.0).validate().is_ok());
        assert!(VcDimensions { d_max: 5.0, d_h_n: 4.0, vc_dim: 9.0 }.validate().is_err());
    }

    #[test]
    fn report_rendering() {
        let r = per_task_transfer_gap(1, 5, 0.1, 0.2).unwrap();
        assert_eq!(r.to_csv_row(), format!("per_task_transfer_gap,{},,epsilon_b=0.2;epsilon_f=0.1;i=1;n=5;", r.value));
        let t = min_target_sample(0.1, 0.05, 10.0).unwrap();
        assert!(t.to_kv().contains("ceiling=645281\n"));
        assert!(t.to_kv().contains("log=natural\n"));
    }

    #[test]
    fn evaluate_by_name() {
        let p = |pairs: &[(&str, &str)]| pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let r = evaluate("generalization_gap", &p(&[("m", "1000"), ("d", "10"), ("epsilon", "1"), ("delta", "0.05")])).unwrap();
        assert_eq!(r, generalization_gap(1000, 10.0, 1.0, 0.05).unwrap());
        let s = evaluate("min_source_sample", &p(&[("epsilon2", "0.1"), ("delta", "0.05"), ("d_h_n", "10"), ("coefficient", "8")])).unwrap();
        assert!(rel(s.value, min_source_sample(0.1, 0.05, 10.0).unwrap().value * 8.0 / 88.0) < 1e-12);
        assert!(evaluate("nope", &p(&[])).is_err());
        assert!(evaluate("min_tasks", &p(&[("epsilon", "1"), ("delta", "0.05")])).is_err());
        assert!(evaluate("min_tasks", &p(&[("epsilon", "1"), ("delta", "0.05"), ("capacity_k", "0"), ("zzz", "1")])).is_err());
        assert!(evaluate("continual_epsilon", &p(&[("n", "3"), ("epsilon_f", "0.1"), ("epsilon_b", "0.1"), ("variant", "x")])).is_err());
    }

    #[test]
    fn out_of_range_inputs_are_validation_errors() {
        assert!(min_target_sample(0.0, 0.05, 10.0).is_err());
        assert!(min_target_sample(0.1, 1.0, 10.0).is_err());
        assert!(min_target_sample(0.1, 0.05, -1.0).is_err());
        assert!(min_source_sample(0.1, 0.0, 1.0).is_err());
        assert!(min_tasks(0.1, 0.05, LogCapacity::Constant(-1.0)).is_err());
    }
}
