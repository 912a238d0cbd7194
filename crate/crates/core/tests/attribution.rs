use ndarray::Array2;
use procfair::attribution::{exact_shapley, explain_set, kernel_shap, ExplainedOutput, KernelShap, ShapConfig};
use procfair::model::{init_mlp, Classifier, MlpModel};
use procfair::rng::rng_for;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn normal_matrix(rows: usize, cols: usize, seed: u64, tag: &str) -> Array2<f64> {
    let mut rng = rng_for(seed, tag);
    Array2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(&mut rng))
}

fn random_mlp(d: usize, seed: u64) -> MlpModel<f64> {
    let mut m = init_mlp(d, 8, seed).unwrap();
    let mut rng = rng_for(seed, "bias");
    m.b1.mapv_inplace(|_| rng.random_range(-0.5..0.5));
    m
}

#[test]
fn full_enumeration_matches_exact_on_twenty_mlps() {
    for seed in 0..20u64 {
        let model = random_mlp(4, seed);
        let background = normal_matrix(30, 4, seed, "bg");
        let x = normal_matrix(5, 4, seed, "x");
        let cfg = ShapConfig::new(background.clone(), seed);
        let f = |z: &[f64]| model.predict_one(z);
        for row in x.rows() {
            let row = row.to_vec();
            let k = kernel_shap(&f, &row, &cfg).unwrap();
            let e = exact_shapley(&f, &row, &background).unwrap();
            assert!(k.local_accuracy_gap() <= 1e-6);
            for j in 0..4 {
                assert!((k.values[j] - e.values[j]).abs() <= 1e-6, "seed {seed} feature {j}");
            }
        }
    }
}

#[test]
fn ignored_feature_gets_nothing() {
    // d = 5 enumerates every coalition; d = 12 samples the default budget
    for d in [5usize, 12] {
        let mut model = random_mlp(d, 3);
        model.w1.column_mut(2).fill(0.0);
        let background = normal_matrix(40, d, 3, "bg");
        let x = normal_matrix(6, d, 3, "x");
        let f = |z: &[f64]| model.predict_one(z);
        let cfg = ShapConfig::new(background.clone(), 9);
        for row in x.rows() {
            let row = row.to_vec();
            if d <= 8 {
                assert!(exact_shapley(&f, &row, &background).unwrap().values[2].abs() <= 1e-8);
            }
            let k = kernel_shap(&f, &row, &cfg).unwrap();
            let max = k.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(k.values[2].abs() <= 0.01 * max, "d={d}: {:?}", k.values);
        }
    }
}

#[test]
fn explain_set_is_deterministic_and_locally_accurate() {
    let model = random_mlp(6, 1);
    let x = normal_matrix(25, 6, 1, "x");
    let names: Vec<String> = (0..6).map(|j| format!("f{j}")).collect();
    for output in [ExplainedOutput::Logit, ExplainedOutput::Probability] {
        let cfg = ShapConfig { output, n_coalitions: Some(30), ..ShapConfig::new(normal_matrix(20, 6, 1, "bg"), 5) };
        let a = explain_set(&model, &x, &names, &cfg).unwrap();
        assert_eq!(a, explain_set(&model, &x, &names, &cfg).unwrap());
        for (e, row) in a.rows.iter().zip(x.rows()) {
            let row = row.to_vec();
            let want = match output {
                ExplainedOutput::Logit => model.logit(&row),
                ExplainedOutput::Probability => model.predict_one(&row),
            };
            assert_eq!(e.target, want);
            assert!(e.local_accuracy_gap() <= 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_shap_is_exact_with_all_coalitions(seed in 0u64..10_000, d in 2usize..=8) {
        let model = random_mlp(d, seed);
        let background = normal_matrix(12, d, seed, "bg");
        let x: Vec<f64> = normal_matrix(1, d, seed, "x").row(0).to_vec();
        let f = |z: &[f64]| model.logit(z);
        let explainer = KernelShap::new(&ShapConfig::new(background.clone(), seed)).unwrap();
        prop_assert_eq!(explainer.n_coalitions(), (1 << d) - 2);
        let k = explainer.explain(&f, &x).unwrap();
        let e = exact_shapley(&f, &x, &background).unwrap();
        prop_assert!(k.local_accuracy_gap() <= 1e-6);
        for j in 0..d {
            prop_assert!((k.values[j] - e.values[j]).abs() <= 1e-6);
        }
    }

    #[test]
    fn sampled_kernel_shap_keeps_local_accuracy(seed in 0u64..10_000, budget in 12usize..60) {
        let model = random_mlp(10, seed);
        let x: Vec<f64> = normal_matrix(1, 10, seed, "x").row(0).to_vec();
        let cfg = ShapConfig { n_coalitions: Some(budget), ..ShapConfig::new(normal_matrix(10, 10, seed, "bg"), seed) };
        let f = |z: &[f64]| model.predict_one(z);
        prop_assert!(kernel_shap(&f, &x, &cfg).unwrap().local_accuracy_gap() <= 1e-6);
    }
}
