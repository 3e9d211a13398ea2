//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.
//! Run with `cargo test --release -p wlidoa --test acceptance -- --nocapture`.

use std::time::Instant;

use wlidoa::array_model::{embed, project, random_sources, superpose};
use wlidoa::completion::{admm_complete, nmse, prox_nuclear_reference_from, AdmmConfig};
use wlidoa::doa::matrix_pencil;
use wlidoa::harness::{
    aggregate, realize, run_plan, trial_seed, ExperimentPlan, Method, Scenario, SummaryRow, SweepAxis, TrialRecord,
    TrialSettings,
};
use wlidoa::lifting::{adjoint, back_project, basis, lift, CMat, LiftingSpec};
use wlidoa::seed::mix_seed;
use wlidoa::weights::{design_weights, leverage_scores, RankRule, WeightMode, WeightPair};
use wlidoa::Complex64;

fn report(name: &str, ok: bool, detail: String) {
    println!("{name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn row(rows: &[SummaryRow], method: Method, value: f64) -> &SummaryRow {
    rows.iter()
        .find(|r| r.method == method && r.sweep_value == value)
        .expect("summary row present")
}

fn run(plan: &ExperimentPlan) -> (Vec<TrialRecord>, Vec<SummaryRow>) {
    let recs = run_plan(plan).expect("plan runs");
    let rows = aggregate(&recs);
    (recs, rows)
}

/// Uniform in `[0, 1)` from a seed and a word.
fn unit(seed: u64, word: u64) -> f64 {
    (mix_seed(seed, &[word]) >> 11) as f64 / (1u64 << 53) as f64
}

fn random_vec(seed: u64, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|i| Complex64::new(unit(seed, 2 * i as u64) - 0.5, unit(seed, 2 * i as u64 + 1) - 0.5))
        .collect()
}

#[test]
fn c1_noiseless_exact_recovery() {
    let start = Instant::now();
    let plan = ExperimentPlan {
        scenario: Scenario::Random { k: 2 },
        axis: SweepAxis::Samples,
        values: vec![18.0],
        trials: 50,
        methods: vec![Method::WliEmac],
        base_seed: 1,
        settings: TrialSettings {
            n: 41,
            m: 18,
            d: Some(21),
            ..Default::default()
        },
    };
    let (recs, _) = run(&plan);
    let secs = start.elapsed().as_secs_f64();
    let exact = recs.iter().filter(|r| r.nmse <= 1e-3).count();
    let ok = exact * 10 >= 9 * recs.len() && secs <= 300.0;
    report(
        "C1 noiseless exact recovery",
        ok,
        format!("{exact}/{} trials with NMSE <= 1e-3, {secs:.1} s", recs.len()),
    );
    assert!(ok);
}

#[test]
fn c2_weighting_beats_unweighted() {
    let plan = ExperimentPlan {
        scenario: Scenario::Preset("table1-c".into()),
        axis: SweepAxis::Samples,
        values: vec![24.0],
        trials: 50,
        methods: vec![Method::WliEmac, Method::Emac],
        base_seed: 2,
        settings: TrialSettings {
            n: 59,
            m: 24,
            snr_db: Some(30.0),
            ..Default::default()
        },
    };
    let (_, rows) = run(&plan);
    let wli = db(row(&rows, Method::WliEmac, 24.0).median_nmse);
    let emac = db(row(&rows, Method::Emac, 24.0).median_nmse);
    let ok = wli <= emac - 3.0;
    report(
        "C2 weighted vs unweighted",
        ok,
        format!("median NMSE wli-emac {wli:.1} dB, emac {emac:.1} dB, gap {:.1} dB", emac - wli),
    );
    assert!(ok);
}

#[test]
fn c3_recovery_curve_is_monotone() {
    let values = vec![8.0, 12.0, 16.0, 20.0, 24.0];
    let plan = ExperimentPlan {
        scenario: Scenario::Preset("table1-c".into()),
        axis: SweepAxis::Samples,
        values: values.clone(),
        trials: 50,
        methods: vec![Method::WliEmac],
        base_seed: 3,
        settings: TrialSettings {
            n: 59,
            ..Default::default()
        },
    };
    let (_, rows) = run(&plan);
    let rec: Vec<f64> = values.iter().map(|&v| row(&rows, Method::WliEmac, v).recovery).collect();
    let slack = 2.0 / 50f64.sqrt();
    let monotone = rec.windows(2).all(|w| w[1] >= w[0] - slack);
    let ok = monotone && rec[4] >= 0.8;
    report("C3 monotone recovery curve", ok, format!("recovery over M=8..24: {rec:?}"));
    assert!(ok);
}

#[test]
fn c4_gamma_sensitivity() {
    let plan = ExperimentPlan {
        scenario: Scenario::Preset("table1-d".into()),
        axis: SweepAxis::Gamma,
        values: vec![1e2, 1e5, 1e7],
        trials: 20,
        methods: vec![Method::WliEmac],
        base_seed: 4,
        settings: TrialSettings {
            n: 61,
            m: 30,
            snr_db: Some(20.0),
            iters: 5000,
            ..Default::default()
        },
    };
    let (_, rows) = run(&plan);
    let [lo, mid, hi] = [1e2, 1e5, 1e7].map(|g| row(&rows, Method::WliEmac, g).mean_nmse);
    let close = (mid - hi).abs() <= 0.2 * hi;
    let worse = lo > mid;
    let ok = close && worse;
    report(
        "C4 gamma sensitivity",
        ok,
        format!("mean NMSE gamma=1e2 {lo:.3e}, 1e5 {mid:.3e}, 1e7 {hi:.3e}"),
    );
    assert!(ok);
}

#[test]
fn c5_snapshot_gain() {
    let plan = ExperimentPlan {
        scenario: Scenario::Preset("table1-c".into()),
        axis: SweepAxis::Snapshots,
        values: vec![1.0, 10.0],
        trials: 20,
        methods: vec![Method::WliEmac],
        base_seed: 5,
        settings: TrialSettings {
            n: 41,
            m: 20,
            snr_db: Some(10.0),
            ..Default::default()
        },
    };
    let (_, rows) = run(&plan);
    let one = db(row(&rows, Method::WliEmac, 1.0).median_nmse);
    let ten = db(row(&rows, Method::WliEmac, 10.0).median_nmse);
    let ok = ten <= one - 6.0;
    report(
        "C5 snapshot gain",
        ok,
        format!("median NMSE T=1 {one:.1} dB, T=10 {ten:.1} dB, gain {:.1} dB", one - ten),
    );
    assert!(ok);
}

#[test]
fn c6_solver_matches_convex_reference() {
    let k = 2;
    let s = TrialSettings {
        n: 15,
        m: 10,
        ..Default::default()
    };
    let spec = LiftingSpec::hankel(15, 8).unwrap();
    let mut worst = 0.0f64;
    let mut agree = 0;
    for t in 0..20 {
        let real = realize(&Scenario::Random { k }, &s, trial_seed(6, 0.0, t)).unwrap();
        let y = &real.y_obs[0];
        let w = WeightPair::identity_for(&spec);
        let cfg = AdmmConfig::default().with_rank(k);
        let admm = admm_complete(y, &real.omega, &spec, &w, &cfg).unwrap();

        let scale = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let target = 1e-5 * scale;
        let mut lambda = scale;
        let mut g = embed(y, &real.omega).unwrap();
        loop {
            let step = lambda.max(target);
            g = prox_nuclear_reference_from(y, &real.omega, &spec, &w, step, 100, &g).unwrap().y_hat;
            if step <= target {
                break;
            }
            lambda *= 0.3;
        }
        let d = nmse(&g, &admm.y_hat).unwrap();
        worst = worst.max(d);
        if d <= 1e-3 {
            agree += 1;
        }
    }
    let ok = agree == 20;
    report(
        "C6 solver vs convex reference",
        ok,
        format!("{agree}/20 instances agree within NMSE 1e-3, worst {worst:.2e}"),
    );
    assert!(ok);
}

#[test]
fn c7_invariant_suites() {
    let mut failures: Vec<String> = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };

    for (case, spec) in [
        LiftingSpec::hankel(11, 6),
        LiftingSpec::hankel(8, 3),
        LiftingSpec::double_hankel(9, 4),
        LiftingSpec::double_hankel_reversed_conjugate(10, 5),
        LiftingSpec::block_hankel(7, 4, 3, 1),
    ]
    .into_iter()
    .enumerate()
    {
        let spec = spec.unwrap();
        let (rows, cols) = spec.shape();
        let x = random_vec(case as u64, spec.num_samples());
        let m = CMat::from_vec(rows, cols, random_vec(100 + case as u64, rows * cols));
        let l = lift(&spec, &x).unwrap();
        let lhs: Complex64 = l.iter().zip(m.iter()).map(|(a, b)| a.conj() * b).sum();
        let rhs: Complex64 = x.iter().zip(&adjoint(&spec, &m).unwrap()).map(|(a, b)| a.conj() * b).sum();
        let tol = 1e-12 * (1.0 + l.norm() * m.norm());
        let adj_ok = if spec.reversed_conjugate {
            (lhs.re - rhs.re).abs() <= tol
        } else {
            (lhs - rhs).norm() <= tol
        };
        check("adjoint identity", adj_ok);
        let back = back_project(&spec, &l).unwrap();
        check("back-projection", back.iter().zip(&x).all(|(a, b)| (a - b).norm() <= 1e-12));
        let dense: Vec<_> = basis(&spec).iter().map(|a| a.to_dense(rows, cols)).collect();
        check("basis unit norm", dense.iter().all(|a| (a.norm() - 1.0).abs() <= 1e-12));
        let orth = (0..dense.len()).all(|i| (i + 1..dense.len()).all(|j| dense[i].dot(&dense[j]).abs() <= 1e-12));
        check("basis orthogonality", orth);
    }

    for trial in 0..20u64 {
        let n = [21, 25, 31, 41][trial as usize % 4];
        let k = 1 + trial as usize % 3;
        let sources = random_sources(k, n, 0.5, mix_seed(7, &[trial])).unwrap();
        let y = superpose(&sources.taus(), &sources.amps(), n);
        let spec = LiftingSpec::hankel(n, n / 2 + 1).unwrap();
        let omega = wlidoa::array_model::sample_mask_random(n, n / 2, mix_seed(8, &[trial])).unwrap();
        let w = design_weights(&spec, &omega, WeightMode::Minimax, 0.05).unwrap();
        for v in [&w.w_left, &w.w_right] {
            check("weight simplex", (v.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            check("weight floor", v.iter().all(|&x| x >= 0.05 / v.len() as f64 - 1e-15));
        }
        let lifted = lift(&spec, &y).unwrap();
        let rep = leverage_scores(&spec, &lifted, &w, RankRule::Relative(1e-8)).unwrap();
        check("leverage bound", rep.normalized_sum() <= 4.0 * (n as f64).ln() && rep.bound_ok);
        let scaled = WeightPair {
            w_left: w.w_left.iter().map(|v| v * 7.5).collect(),
            w_right: w.w_right.iter().map(|v| v * 0.2).collect(),
            floor: w.floor,
        };
        let rep2 = leverage_scores(&spec, &lifted, &scaled, RankRule::Relative(1e-8)).unwrap();
        check(
            "leverage scale invariance",
            rep.mu.iter().zip(&rep2.mu).all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + a.abs())),
        );

        let est = matrix_pencil(&y, k, None, 1e-8).unwrap();
        let mut truth = sources.taus();
        truth.sort_by(f64::total_cmp);
        let exact = est.len() == k
            && est.residual <= 1e-8
            && est.taus.iter().zip(&truth).all(|(a, b)| wlidoa::doa::wrap_tau(a - b).abs() <= 1e-8);
        check("pencil exactness", exact);
    }

    let s = TrialSettings::default();
    let spec = LiftingSpec::hankel(41, 21).unwrap();
    let real = realize(&Scenario::Random { k: 2 }, &s, 123).unwrap();
    let w = design_weights(&spec, &real.omega, WeightMode::Minimax, 0.05).unwrap();
    let cfg = AdmmConfig::default().with_rank(4);
    let a = admm_complete(&real.y_obs[0], &real.omega, &spec, &w, &cfg).unwrap();
    let b = admm_complete(&real.y_obs[0], &real.omega, &spec, &w, &cfg).unwrap();
    check("determinism", a == b && project(&a.y_hat, &real.omega).is_ok());
    let plan = ExperimentPlan {
        scenario: Scenario::Random { k: 2 },
        axis: SweepAxis::Samples,
        values: vec![14.0],
        trials: 4,
        methods: vec![Method::WliEmac, Method::Bp],
        base_seed: 9,
        settings: TrialSettings::default(),
    };
    let r1 = run_plan(&plan).unwrap();
    let r2 = run_plan(&plan).unwrap();
    check("determinism", r1.len() == r2.len() && r1.iter().zip(&r2).all(|(x, y)| x.same_outcome(y)));

    failures.dedup();
    let ok = failures.is_empty();
    let detail = if ok {
        "lifting, weights, leverage, pencil, determinism".to_string()
    } else {
        format!("failed: {}", failures.join(", "))
    };
    report("C7 invariant suites", ok, detail);
    assert!(ok);
}
