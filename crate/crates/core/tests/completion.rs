use wlidoa::array_model::{leverage_inclusion_probability, project, sample_mask_leverage, sample_mask_random, Omega};
use wlidoa::completion::{admm_complete, admm_complete_block, nmse, AdmmConfig};
use wlidoa::harness::{realize, run_trial, trial_seed, ExperimentPlan, Method, Scenario, SweepAxis, TrialSettings};
use wlidoa::lifting::LiftingSpec;
use wlidoa::weights::{assemble_block_weights, design_weights, design_weights_block, WeightMode};
use wlidoa::Complex64;

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[test]
fn noiseless_solves_fit_the_data_and_keep_multipliers_bounded() {
    let s = TrialSettings::default();
    let spec = LiftingSpec::hankel(41, 21).unwrap();
    for t in 0..10 {
        let real = realize(&Scenario::Random { k: 2 }, &s, trial_seed(70, 0.0, t)).unwrap();
        let w = design_weights(&spec, &real.omega, WeightMode::Minimax, 0.05).unwrap();
        let y = &real.y_obs[0];
        let cfg = AdmmConfig {
            gamma: f64::INFINITY,
            ..AdmmConfig::default().with_rank(4)
        };
        let out = admm_complete(y, &real.omega, &spec, &w, &cfg).unwrap();
        let obs = project(&out.y_hat, &real.omega).unwrap();
        let resid: Vec<Complex64> = obs.iter().zip(y).map(|(a, b)| a - b).collect();
        assert!(norm(&resid) <= 1e-6 * norm(y), "trial {t}: residual {}", norm(&resid));
        assert!(out.max_multiplier_norm < 1e6 * scale(y), "trial {t}: {}", out.max_multiplier_norm);
    }
}

#[test]
fn completion_is_deterministic() {
    let s = TrialSettings::default();
    let spec = LiftingSpec::hankel(41, 21).unwrap();
    let real = realize(&Scenario::Random { k: 2 }, &s, 99).unwrap();
    let w = design_weights(&spec, &real.omega, WeightMode::Minimax, 0.05).unwrap();
    let cfg = AdmmConfig::default().with_rank(4);
    let a = admm_complete(&real.y_obs[0], &real.omega, &spec, &w, &cfg).unwrap();
    let b = admm_complete(&real.y_obs[0], &real.omega, &spec, &w, &cfg).unwrap();
    assert_eq!(a, b);

    let plan = ExperimentPlan {
        scenario: Scenario::Preset("table1-c".into()),
        axis: SweepAxis::Samples,
        values: vec![20.0],
        trials: 2,
        methods: vec![Method::WliEmac, Method::Emac, Method::Bp],
        base_seed: 5,
        settings: TrialSettings {
            n: 59,
            snr_db: Some(20.0),
            ..Default::default()
        },
    };
    let r1 = run_trial(&plan, 20.0, 1).unwrap();
    let r2 = run_trial(&plan, 20.0, 1).unwrap();
    assert_eq!(r1.len(), 3);
    assert!(r1.iter().zip(&r2).all(|(a, b)| a.same_outcome(b)));
}

#[test]
fn identical_snapshots_match_single_snapshot_recovery() {
    let s = TrialSettings::default();
    let real = realize(&Scenario::Random { k: 2 }, &s, 17).unwrap();
    let single = LiftingSpec::hankel(41, 21).unwrap();
    let w = design_weights(&single, &real.omega, WeightMode::Minimax, 0.05).unwrap();
    let cfg = AdmmConfig::default().with_rank(4);
    let one = admm_complete(&real.y_obs[0], &real.omega, &single, &w, &cfg).unwrap();

    let block = LiftingSpec::block_hankel(41, 21, 3, 1).unwrap();
    let omegas = vec![real.omega.clone(); 3];
    let per = design_weights_block(&block, &omegas, WeightMode::Minimax, 0.05).unwrap();
    let wb = assemble_block_weights(&block, &per).unwrap();
    let y = vec![real.y_obs[0].clone(); 3];
    let three = admm_complete_block(&y, &omegas, &block, &wb, &cfg).unwrap();
    for t in 0..3 {
        let err = nmse(&real.y_full[0], three.column(t)).unwrap();
        assert!(err <= 1e-6, "snapshot {t}: {err}");
        let diff = nmse(&one.y_hat, three.column(t)).unwrap();
        assert!(diff <= 1e-6, "snapshot {t}: {diff}");
    }
}

#[test]
fn single_block_reduces_to_plain_completion() {
    let s = TrialSettings::default();
    let real = realize(&Scenario::Random { k: 2 }, &s, 18).unwrap();
    let single = LiftingSpec::hankel(41, 21).unwrap();
    let block = LiftingSpec::block_hankel(41, 21, 1, 1).unwrap();
    let w = design_weights(&single, &real.omega, WeightMode::Minimax, 0.05).unwrap();
    let cfg = AdmmConfig::default().with_rank(4);
    let a = admm_complete(&real.y_obs[0], &real.omega, &single, &w, &cfg).unwrap();
    let b = admm_complete_block(&real.y_obs, &[real.omega.clone()], &block, &w, &cfg).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.y_hat, b.y_hat);
}

#[test]
fn recovery_probability_rises_with_samples() {
    let n = 41;
    let spec = LiftingSpec::hankel(n, 21).unwrap();
    let cfg = AdmmConfig::default().with_rank(4);
    let mut rates = Vec::new();
    for m in [6usize, 10, 14, 18, 22] {
        let s = TrialSettings {
            m,
            ..Default::default()
        };
        let ok = (0..50)
            .filter(|&t| {
                let real = realize(&Scenario::Random { k: 2 }, &s, trial_seed(80, m as f64, t)).unwrap();
                let w = design_weights(&spec, &real.omega, WeightMode::Minimax, 0.05).unwrap();
                admm_complete(&real.y_obs[0], &real.omega, &spec, &w, &cfg)
                    .map(|out| nmse(&real.y_full[0], &out.y_hat).unwrap() <= 1e-3)
                    .unwrap_or(false)
            })
            .count();
        rates.push(ok as f64 / 50.0);
    }
    assert!(rates.windows(2).all(|w| w[1] >= w[0]), "{rates:?}");
    assert!(rates[..4].iter().any(|&r| r >= 0.9), "{rates:?}");
}

#[test]
fn leverage_mask_matches_inclusion_probabilities() {
    let n = 30;
    let mu: Vec<f64> = (0..n).map(|i| 0.02 + 0.05 * (i % 7) as f64).collect();
    let draws = 4000;
    let mut hits = vec![0usize; n];
    for seed in 0..draws {
        for &i in sample_mask_leverage(&mu, 2, n, 0.05, seed).unwrap().indices() {
            hits[i] += 1;
        }
    }
    for i in 0..n {
        let p = leverage_inclusion_probability(mu[i], 2, n, 0.05);
        let freq = hits[i] as f64 / draws as f64;
        let sd = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((freq - p).abs() <= 5.0 * sd + 1e-12, "element {i}: {freq} vs {p}");
    }
}

#[test]
fn uniform_masks_have_requested_size() {
    for seed in 0..50 {
        let om = sample_mask_random(41, 18, seed).unwrap();
        assert_eq!(om.len(), 18);
        assert!(om.indices().windows(2).all(|w| w[0] < w[1]));
    }
    assert_eq!(Omega::full(5).len(), 5);
}
