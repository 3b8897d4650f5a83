//! Property tests for invariants that hold for every input, not just the
//! fixtures.

mod common;

use std::collections::BTreeSet;

use common::oracle::random_problem;
use proptest::prelude::*;
use vulnscore::corpus::Dataset;
use vulnscore::eval::{run_rfe_rows, run_table1_grid, EvalConfig};
use vulnscore::findings::{aggregate_layer1, Category, Finding, FindingsReport};
use vulnscore::learn::{
    layer3_instance_weights, train_fda, train_svm, DesignMatrix, FeatureMask, ModelKind, SvmParams, TrainedModel,
};
use vulnscore::synth::{generate_corpus, generate_rfe_benchmark, SynthConfig};

fn fit(kind: ModelKind, m: &DesignMatrix) -> TrainedModel {
    match kind {
        ModelKind::Fda => train_fda(m, 1e-6).unwrap(),
        ModelKind::Svm => train_svm(m, &SvmParams::default()).unwrap(),
    }
}

fn decisions(model: &TrainedModel, m: &DesignMatrix) -> Vec<f64> {
    m.rows.iter().map(|r| model.decision_row(r)).collect()
}

fn kind() -> impl Strategy<Value = ModelKind> {
    prop_oneof![Just(ModelKind::Fda), Just(ModelKind::Svm)]
}

fn category() -> impl Strategy<Value = Category> {
    prop_oneof![
        Just(Category::BufferWrite),
        Just(Category::NullDeref),
        Just(Category::UseAfterFree),
        Just(Category::MemoryLeak),
        Just(Category::StackReturn),
        Just(Category::UseBeforeDef),
        Just(Category::Other),
    ]
}

fn finding() -> impl Strategy<Value = Finding> {
    (category(), 0..3usize, 1..6u32, prop_oneof![Just("cppcheck"), Just("splint")]).prop_map(|(c, f, line, tool)| {
        Finding {
            category: c,
            file: format!("src/f{f}.c"),
            line,
            tool: tool.to_string(),
            raw_message: String::new(),
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dataset_json_round_trips(seed in any::<u64>(), n in 4usize..30) {
        let d = generate_corpus(&SynthConfig { instances: n, ..SynthConfig::new(seed) });
        let back = Dataset::from_json(&d.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), d.to_json());
    }

    #[test]
    fn model_json_round_trip_is_exact(kind in kind(), seed in any::<u64>(), n in 6usize..30, p in 1usize..5) {
        let m = random_problem(seed, n, p);
        let model = fit(kind, &m);
        let back = TrainedModel::from_json(&model.to_json()).unwrap();
        for r in &m.rows {
            prop_assert_eq!(back.decision_row(r).to_bits(), model.decision_row(r).to_bits());
        }
    }

    #[test]
    fn swapping_labels_negates_decisions(kind in kind(), seed in any::<u64>(), n in 6usize..30, p in 1usize..5) {
        let m = random_problem(seed, n, p);
        let mut flipped = m.clone();
        flipped.labels.iter_mut().for_each(|y| *y = -*y);
        let a = decisions(&fit(kind, &m), &m);
        let b = decisions(&fit(kind, &flipped), &m);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x + y).abs() <= 1e-7 * (1.0 + x.abs()), "{} vs {}", x, y);
        }
    }

    #[test]
    fn positive_column_scaling_keeps_decisions(
        kind in kind(), seed in any::<u64>(), n in 6usize..30, p in 1usize..5, scale in 1e-3f64..1e3
    ) {
        let m = random_problem(seed, n, p);
        let mut scaled = m.clone();
        scaled.rows.iter_mut().for_each(|r| r[0] *= scale);
        let a = decisions(&fit(kind, &m), &m);
        let b = decisions(&fit(kind, &scaled), &scaled);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-6 * (1.0 + x.abs()), "{} vs {}", x, y);
        }
    }

    #[test]
    fn constant_column_contributes_nothing(kind in kind(), seed in any::<u64>(), n in 6usize..30, c in -50.0f64..50.0) {
        let m = random_problem(seed, n, 2);
        let mut wide = m.clone();
        wide.features.push("l2.constant".into());
        wide.imputation.push(c);
        wide.rows.iter_mut().for_each(|r| r.push(c));
        let model = fit(kind, &wide);
        prop_assert_eq!(model.w[2], 0.0);
        prop_assert_eq!(model.raw_coefficients().0[2], 0.0);
        let narrow = fit(kind, &m);
        for (r, rw) in m.rows.iter().zip(&wide.rows) {
            prop_assert!((narrow.decision_row(r) - model.decision_row(rw)).abs() <= 1e-9);
        }
    }

    #[test]
    fn instance_weights_are_bounded(seed in any::<u64>(), beta in 0.0f64..10.0) {
        let d = generate_corpus(&SynthConfig { instances: 25, ..SynthConfig::new(seed) });
        for w in layer3_instance_weights(&d, beta).unwrap() {
            prop_assert!((1.0..=1.0 + beta).contains(&w));
        }
    }

    #[test]
    fn layer1_counts_conserve_distinct_findings(
        a in prop::collection::vec(finding(), 0..30),
        b in prop::collection::vec(finding(), 0..30),
    ) {
        let report = |fs: &[Finding]| FindingsReport { tool: "mixed".into(), findings: fs.to_vec(), ..Default::default() };
        let counts = aggregate_layer1(&[report(&a), report(&b)]);
        let distinct: BTreeSet<_> = a.iter().chain(&b)
            .filter(|f| f.category != Category::Other)
            .map(|f| (f.tool.clone(), f.category, f.file.clone(), f.line))
            .collect();
        prop_assert_eq!(counts.len(), 6);
        prop_assert_eq!(counts.iter().map(|(_, v)| v).sum::<f64>(), distinct.len() as f64);
        prop_assert_eq!(aggregate_layer1(&[report(&b), report(&a)]), counts);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rfe_trace_is_nested(kind in kind(), seed in any::<u64>(), step in 1usize..4, noise in 1usize..6) {
        let d = generate_rfe_benchmark(seed, 40, 2, noise, 0.8);
        let rows: Vec<usize> = (0..d.len()).collect();
        let cfg = EvalConfig { rfe_step: step, ..Default::default() };
        let t = run_rfe_rows(&d, kind, &rows, &vec![1.0; d.len()], seed, &cfg).unwrap();
        let all = FeatureMask::all(&d.dictionary);
        let ranked: BTreeSet<&String> = t.ranking.iter().collect();
        prop_assert_eq!(ranked.len(), all.len());
        prop_assert!(all.names().iter().all(|n| ranked.contains(n)));
        let k = t.selected.len();
        prop_assert!(k >= 1);
        prop_assert_eq!(t.selected.names().iter().collect::<BTreeSet<_>>(), t.ranking[..k].iter().collect());
        prop_assert_eq!(t.eliminated.len() + k, all.len());
        prop_assert!(t.eliminated.iter().all(|e| e.rank > k && !t.selected.contains(&e.feature)));
        prop_assert!(t.curve.windows(2).all(|w| w[0].size > w[1].size));
        prop_assert!(t.curve.iter().all(|c| (0.0..=1.0).contains(&c.accuracy)));
    }

    #[test]
    fn grid_metrics_are_well_formed(seed in any::<u64>(), n in 12usize..30) {
        let d = generate_corpus(&SynthConfig { instances: n, ..SynthConfig::new(seed) });
        let cfg = EvalConfig { folds: 3, bootstraps: 8, ..Default::default() };
        let r = run_table1_grid(&d, seed, &cfg).unwrap();
        prop_assert_eq!(r.cells.len(), 6);
        for c in &r.cells {
            prop_assert!((0.0..=1.0).contains(&c.mean_acc) && (0.0..=1.0).contains(&c.test_acc));
            prop_assert!(c.fold_std >= 0.0);
            prop_assert!(c.fold_acc.iter().all(|a| (0.0..=1.0).contains(a)));
            let [lo, hi] = c.ci.unwrap();
            prop_assert!(0.0 <= lo && lo <= hi && hi <= 1.0);
        }
    }
}
