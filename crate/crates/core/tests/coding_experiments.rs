use poissonbc_core::codingsim::*;
use poissonbc_core::numeric::{wilson_interval, Z_95};
use poissonbc_core::*;

fn params() -> ChannelParams {
    ChannelParams::new(1.0, 0.1, 0.5, 0.2).unwrap()
}

#[test]
fn cloud_symbol_frequency_matches_aux_law() {
    // n = 2 blocks, two symbols: count symbol 0 over many codebooks
    let model = BlockInputModel::binary(0.1, 2, 0.3, 0.9, 0.1).unwrap();
    let rates = CodingRates { r_y: 0.0, r_cloud: 0.0 };
    let mut zeros = 0u64;
    let books = 5000u64;
    for seed in 0..books {
        let cb = build_codebook(&model, &rates, Setting::Independent, seed, DEFAULT_SYMBOL_CAP).unwrap();
        zeros += cb.cloud(0).iter().filter(|&&v| v == 0).count() as u64;
        assert!(cb.cloud(0).iter().all(|&v| v < 2));
    }
    // a 99.9% interval, wide enough for a fixed-seed check
    let (lo, hi) = wilson_interval(zeros, 2 * books, 3.29);
    assert!(lo <= 0.3 && 0.3 <= hi, "{lo} {hi}");
}

#[test]
fn ternary_cloud_for_degraded_message_sets() {
    let model = BlockInputModel::new(0.1, 400, vec![0.2, 0.5, 0.3], vec![0.9, 0.5, 0.0]).unwrap();
    let rates = CodingRates { r_y: 0.05, r_cloud: 0.05 };
    let cb = build_codebook(&model, &rates, Setting::DegradedMessageSets, 4, DEFAULT_SYMBOL_CAP).unwrap();
    let mut counts = [0u64; 3];
    for j in 0..cb.cloud_size {
        for &v in cb.cloud(j) {
            counts[v as usize] += 1;
        }
        // symbol 2 has on-probability 0
        for i in 0..cb.satellite_size {
            for (v, x) in cb.cloud(j).iter().zip(cb.satellite(j, i)) {
                if *v == 2 {
                    assert_eq!(*x, 0);
                }
            }
        }
    }
    let total: u64 = counts.iter().sum();
    for (c, p) in counts.iter().zip([0.2, 0.5, 0.3]) {
        let (lo, hi) = wilson_interval(*c, total, 3.29);
        assert!(lo <= p && p <= hi);
    }
}

#[test]
fn reproducible_bit_for_bit() {
    let model = BlockInputModel::binary(0.1, 100, 0.3, 0.9, 0.1).unwrap();
    let rates = CodingRates { r_y: 0.1, r_cloud: 0.03 };
    let cfg = ExperimentConfig::new(Setting::Independent, params(), model, rates, 200, 42);
    let a = serde_json::to_string(&run_experiment(&cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&run_experiment(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let mut fixed = cfg.clone();
    fixed.codebook_per_trial = false;
    let c = serde_json::to_string(&run_experiment(&fixed).unwrap()).unwrap();
    assert_eq!(c, serde_json::to_string(&run_experiment(&fixed).unwrap()).unwrap());
}

#[test]
fn threshold_extremes_select_failure_kind() {
    let model = BlockInputModel::binary(0.1, 100, 0.3, 0.9, 0.1).unwrap();
    let rates = CodingRates { r_y: 0.2, r_cloud: 0.0 };
    let base = ExperimentConfig::new(Setting::Independent, params(), model, rates, 400, 6);

    let mut tight = base.clone();
    tight.thresholds.gamma_y = 1e-9;
    let r = run_experiment(&tight).unwrap();
    assert!(r.errors_y.no_candidate > r.errors_y.ambiguous, "{r:?}");

    let mut loose = base.clone();
    loose.thresholds.gamma_y = 1e3;
    let r = run_experiment(&loose).unwrap();
    assert!(r.satellite_size > 1);
    assert!(r.errors_y.ambiguous > r.errors_y.no_candidate, "{r:?}");
    assert_eq!(r.errors_y.ambiguous, r.trials);
}

#[test]
fn union_bound_and_ci() {
    let model = BlockInputModel::new(0.1, 100, vec![0.2, 0.5, 0.3], vec![0.9, 0.5, 0.0]).unwrap();
    let rates = CodingRates { r_y: 0.05, r_cloud: 0.02 };
    let r = run_experiment(&ExperimentConfig::new(Setting::DegradedMessageSets, params(), model, rates, 300, 1)).unwrap();
    let (lo, hi) = wilson_interval(r.errors_total, r.trials, Z_95);
    assert_eq!((lo, hi), (r.ci_lo, r.ci_hi));
    assert!(r.pe_total <= r.pe_y + r.pe_z + 1e-15);
    assert!(r.errors_y.total() <= r.trials && r.errors_z.total() <= r.trials);
}

#[test]
fn oversized_codebook_is_rejected() {
    let model = BlockInputModel::binary(0.1, 200, 0.3, 0.9, 0.1).unwrap();
    let rates = CodingRates { r_y: 1.0, r_cloud: 0.5 };
    let cfg = ExperimentConfig::new(Setting::Independent, params(), model, rates, 10, 1);
    assert!(matches!(run_experiment(&cfg), Err(Error::CodebookTooLarge { .. })));
}
