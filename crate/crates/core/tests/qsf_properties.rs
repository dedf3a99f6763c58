use proptest::prelude::*;

use atfnb::dataset::{random_dataset, Dataset, SyntheticShape};
use atfnb::indexes::{AaIndex, CaIndex, IndexPair};
use atfnb::nb::FrequencyModel;
use atfnb::qsf::{feasible_intervals, instance_coeffs, optimal_interval, sls_with_model};
use atfnb::weighting::fusion_weights;

const SMALL: SyntheticShape = SyntheticShape {
    max_instances: 60,
    max_attributes: 6,
    max_classes: 4,
    max_values: 4,
};

fn pairs() -> impl Strategy<Value = (CaIndex, AaIndex)> {
    (
        prop::sample::select(CaIndex::ALL.to_vec()),
        prop::sample::select(AaIndex::ALL.to_vec()),
    )
}

fn setup(seed: u64, ca: CaIndex, aa: AaIndex) -> (Dataset, FrequencyModel, IndexPair) {
    let data = random_dataset(seed, SMALL).unwrap();
    let model = FrequencyModel::fit(&data).unwrap();
    let pair = IndexPair::compute(&data, ca, aa).unwrap();
    (data, model, pair)
}

fn correct_at(data: &Dataset, model: &FrequencyModel, pair: &IndexPair, beta: f64) -> usize {
    model
        .correct_count(&fusion_weights(&pair.ca, &pair.aa, beta).unwrap(), data)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn affine_form_reproduces_class_scores(seed in any::<u64>(), (ca, aa) in pairs(), beta in 0.0..=1.0f64) {
        let (data, model, pair) = setup(seed, ca, aa);
        let w = fusion_weights(&pair.ca, &pair.aa, beta).unwrap();
        for (x, &label) in data.instances().iter().zip(data.labels()) {
            let coeffs = instance_coeffs(&model, &pair.ca, &pair.aa, x, label).unwrap();
            let scores = model.class_scores(&w, x).unwrap();
            for c in 0..data.n_classes() {
                prop_assert!((coeffs.score(c, beta) - scores.0[c]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn coverage_is_the_accuracy_at_the_representative(seed in any::<u64>(), (ca, aa) in pairs()) {
        let (data, model, pair) = setup(seed, ca, aa);
        let q = optimal_interval(&feasible_intervals(&model, &data, &pair.ca, &pair.aa).unwrap());
        prop_assert!(q.optimal.lo < q.representative && q.representative < q.optimal.hi);
        prop_assert_eq!(q.coverage, correct_at(&data, &model, &pair, q.representative));
    }

    #[test]
    fn qsf_dominates_the_grid(seed in any::<u64>(), (ca, aa) in pairs()) {
        let (data, model, pair) = setup(seed, ca, aa);
        let q = optimal_interval(&feasible_intervals(&model, &data, &pair.ca, &pair.aa).unwrap());
        let sls = sls_with_model(&model, &data, &pair.ca, &pair.aa, 0.01).unwrap();
        for &(beta, acc) in &sls.per_beta {
            prop_assert!(q.coverage as f64 >= acc * data.len() as f64 - 1e-9, "beta {} beats QSF", beta);
        }
    }

    #[test]
    fn intervals_predict_correctness(seed in any::<u64>(), (ca, aa) in pairs(), beta in 0.0..=1.0f64) {
        let (data, model, pair) = setup(seed, ca, aa);
        let intervals = feasible_intervals(&model, &data, &pair.ca, &pair.aa).unwrap();
        let w = fusion_weights(&pair.ca, &pair.aa, beta).unwrap();
        for ((x, &label), iv) in data.instances().iter().zip(data.labels()).zip(&intervals) {
            let near_edge = !iv.empty && ((beta - iv.lo).abs() < 1e-6 || (beta - iv.hi).abs() < 1e-6);
            if near_edge {
                continue;
            }
            let correct = model.predict(&w, x).unwrap() == label;
            prop_assert_eq!(iv.contains_strictly(beta), correct);
        }
    }
}

#[test]
fn optimum_covers_at_least_every_candidate() {
    for seed in 0..10 {
        let (data, model, pair) = setup(seed, CaIndex::InfoGain, AaIndex::Pearson);
        let q = optimal_interval(&feasible_intervals(&model, &data, &pair.ca, &pair.aa).unwrap());
        assert!(q.coverage <= data.len());
        assert!(q.candidates.iter().all(|c| c.coverage <= q.coverage));
    }
}
