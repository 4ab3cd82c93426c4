//! Null-treatment distribution check: with the load multiplier at 1.0 the
//! "treated" label is pure bookkeeping, so treated and control outcome
//! distributions must be statistically indistinguishable across seeds.

mod common;

use std::path::Path;

use cogload::config::ExperimentConfig;
use cogload::sim::run_simulation;

#[test]
fn null_treatment_outcomes_indistinguishable_over_20_seeds() {
    let cfg = ExperimentConfig::from_path(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/null.toml"),
    )
    .unwrap();
    assert_eq!(cfg.sim.treatment_load_multiplier, 1.0);

    for seed in 1..=20u64 {
        let mut sim_cfg = cfg.sim.clone();
        sim_cfg.rng_seed = seed;
        let out = run_simulation(
            &sim_cfg,
            &cfg.mechanisms,
            &cfg.quality,
            &cfg.load_map,
            &cfg.solver,
            false,
        )
        .unwrap();
        let treated: Vec<f64> = out
            .observations
            .iter()
            .filter(|o| o.treated == 1)
            .map(|o| o.log_speed)
            .collect();
        let control: Vec<f64> = out
            .observations
            .iter()
            .filter(|o| o.treated == 0)
            .map(|o| o.log_speed)
            .collect();
        assert!(treated.len() > 50 && control.len() > 50);
        let p = common::welch_p_value(&treated, &control);
        assert!(p > 0.01, "seed {seed}: location test p = {p}");
    }
}
