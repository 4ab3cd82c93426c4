//! Randomized property checks for the pure kernels: projection geometry,
//! quality bounds, softmax normalization, and tokenizer invariants.

use proptest::prelude::*;

use cogload::mechanisms::attention_probabilities;
use cogload::model::{processing_quality, Disclosure, LoadMap, QualityTechnology};
use cogload::solver::project_budget;
use cogload::textmetrics::tokenize;

proptest! {
    #[test]
    fn projection_is_feasible_and_idempotent(
        x in proptest::collection::vec(-5.0f64..5.0, 1..8),
        budget in 0.1f64..4.0,
    ) {
        let p = project_budget(&x, budget);
        prop_assert!(p.iter().all(|&v| v >= 0.0));
        prop_assert!(p.iter().sum::<f64>() <= budget + 1e-9);
        let q = project_budget(&p, budget);
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_never_moves_feasible_points(
        x in proptest::collection::vec(0.0f64..0.2, 1..5),
    ) {
        let p = project_budget(&x, 1.0);
        prop_assert_eq!(p, x);
    }

    #[test]
    fn quality_stays_in_unit_interval(
        theta_a in 0.0f64..10.0,
        theta_w in 0.0f64..10.0,
        structure in 0.01f64..50.0,
        sat_a in 0.1f64..3.0,
        sat_w in 0.1f64..3.0,
    ) {
        let d = Disclosure::new("f", 1.0, structure, &LoadMap::default()).unwrap();
        let tech = QualityTechnology { saturation_attention: sat_a, saturation_memory: sat_w };
        let q = processing_quality(theta_a, theta_w, &d, &tech).unwrap();
        prop_assert!((0.0..=1.0).contains(&q));
    }

    #[test]
    fn softmax_is_a_probability_vector(
        loads in proptest::collection::vec(0.0f64..1e6, 1..12),
        gamma in 0.0f64..10.0,
    ) {
        let p = attention_probabilities(&loads, gamma);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&v| v >= 0.0 && v.is_finite()));
    }

    #[test]
    fn tokenizer_never_emits_empty_tokens(text in "\\PC{0,200}") {
        let t = tokenize(&text);
        prop_assert!(t.tokens.iter().all(|tok| !tok.is_empty()));
        prop_assert!(t.sentence_count <= t.tokens.len());
        if t.tokens.is_empty() {
            prop_assert_eq!(t.sentence_count, 0);
        }
    }
}
