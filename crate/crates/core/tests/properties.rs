use contrail::environment::{generate_sample, split_sample, train_size, NoiseModel, Sample, TaskSpec};
use contrail::harness::builtin_tasks;
use contrail::learner::{init_model, r_squared, r_squared_of, MlpModel, Standardization};
use proptest::prelude::*;

fn task(i: usize, noisy: bool) -> TaskSpec {
    let noise = if noisy { NoiseModel::gaussian(1.0, 2.0) } else { NoiseModel::disabled() };
    builtin_tasks(noise, 30).swap_remove(i)
}

fn points() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..10.0, -100.0f64..100.0), 2..60)
        .prop_filter("targets must vary", |p| p.iter().any(|q| q.1 != p[0].1))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn r_squared_is_at_most_one(pts in points(), a in -5.0f64..5.0, b in -20.0f64..20.0) {
        let s = Sample { points: pts, seed: 0, source_task: "p".into() };
        let r = r_squared_of(&s, |x| a * x + b).unwrap();
        prop_assert!(r.r2 <= 1.0);
        prop_assert!(r.mse >= 0.0);
    }

    #[test]
    fn exact_predictions_score_one(pts in points()) {
        let s = Sample { points: pts, seed: 0, source_task: "p".into() };
        let lookup = s.points.clone();
        let r = r_squared_of(&s, |x| lookup.iter().rev().find(|p| p.0 == x).unwrap().1);
        // duplicate x values with different y cannot all be matched; skip those draws
        let distinct = s.points.iter().all(|p| s.points.iter().filter(|q| q.0 == p.0).all(|q| q.1 == p.1));
        if distinct {
            prop_assert_eq!(r.unwrap().r2, 1.0);
        }
    }

    #[test]
    fn mean_predictor_scores_zero(pts in points()) {
        let s = Sample { points: pts, seed: 0, source_task: "p".into() };
        let mean = s.ys().sum::<f64>() / s.len() as f64;
        prop_assert!(r_squared_of(&s, |_| mean).unwrap().r2.abs() < 1e-9);
    }

    #[test]
    fn samples_are_reproducible_and_in_domain(seed in any::<u64>(), t in 0usize..4, noisy in any::<bool>()) {
        let spec = task(t, noisy);
        let a = generate_sample(&spec, seed).unwrap();
        prop_assert_eq!(&a, &generate_sample(&spec, seed).unwrap());
        prop_assert_eq!(a.len(), 30);
        prop_assert!(a.xs().all(|x| (0.0..=10.0).contains(&x)));
        if !noisy {
            prop_assert!(a.points.iter().all(|&(x, y)| y == spec.function.eval(x)));
        }
    }

    #[test]
    fn splits_partition_the_sample(seed in any::<u64>(), frac in 0.05f64..0.95, n in 2usize..80) {
        let spec = TaskSpec { sample_size: n, ..task(0, true) };
        let s = generate_sample(&spec, seed).unwrap();
        let expected = train_size(n, frac);
        let (train, test) = split_sample(&s, frac, seed ^ 1).unwrap();
        prop_assert_eq!(train.len(), expected);
        prop_assert_eq!(train.len() + test.len(), n);
        let mut all: Vec<(f64, f64)> = train.points.iter().chain(&test.points).copied().collect();
        let mut orig = s.points.clone();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        orig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assert_eq!(all, orig);
    }

    #[test]
    fn snapshots_round_trip(h in 1usize..16, seed in any::<u64>(), t in 0usize..4) {
        let mut m = init_model(h, seed).unwrap();
        m.scaling = Standardization::fit(&generate_sample(&task(t, true), seed).unwrap()).unwrap();
        let back = MlpModel::from_snapshot(m.to_snapshot().as_bytes()).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn r_squared_of_an_untrained_model_is_finite() {
    let s = generate_sample(&task(3, true), 9).unwrap();
    let r = r_squared(&init_model(10, 9).unwrap(), &s).unwrap();
    assert!(r.r2.is_finite() && r.r2 <= 1.0);
}
