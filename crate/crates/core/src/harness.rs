//! Monte-Carlo experiment runner: synthesize, mask, weight, complete, extract, score.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array_model::{
    presets, random_sources, sample_mask_random, superpose, synthesize_snapshots, AmplitudeMode, ArrayScene,
    NoiseLevel, Omega, SourceSet,
};
use crate::completion::{admm_complete, admm_complete_block, nmse, AdmmConfig, GStep};
use crate::doa::{bp_grid, cluster_taus, matrix_pencil, DoaEstimate, GridSpec};
use crate::error::{Error, Result};
use crate::lifting::{default_pencil, LiftingSpec};
use crate::seed::mix_seed;
use crate::weights::{assemble_block_weights, design_weights, design_weights_block, WeightMode, WeightPair, DEFAULT_FLOOR};

/// Sine-domain tolerance of a correct detection.
pub const SUCCESS_TOL: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    WliEmac,
    Emac,
    WliDemac,
    Demac,
    Bp,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::WliEmac, Method::Emac, Method::WliDemac, Method::Demac, Method::Bp];

    pub fn name(self) -> &'static str {
        match self {
            Method::WliEmac => "wli-emac",
            Method::Emac => "emac",
            Method::WliDemac => "wli-demac",
            Method::Demac => "demac",
            Method::Bp => "bp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    fn weighted(self) -> bool {
        matches!(self, Method::WliEmac | Method::WliDemac)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Samples,
    SnrDb,
    Gamma,
    Snapshots,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Samples => "samples",
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::Gamma => "gamma",
            SweepAxis::Snapshots => "snapshots",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// A named preset, see [`presets::by_name`].
    Preset(String),
    /// `k` random separated sources redrawn for every trial.
    Random { k: usize },
    /// The same explicit sources in every trial.
    Sources(SourceSet),
}

/// Settings shared by all sweep points; the sweep axis overrides one of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSettings {
    pub n: usize,
    pub m: usize,
    pub snr_db: Option<f64>,
    pub snapshots: usize,
    pub spacing_ratio: f64,
    /// Pencil parameter of the lifting; `None` selects `⌈(N+1)/2⌉`.
    pub d: Option<usize>,
    pub weight_mode: WeightMode,
    pub floor: f64,
    pub rho: f64,
    pub gamma: f64,
    pub iters: usize,
    /// Factor width; `None` selects twice the source count.
    pub rank: Option<usize>,
    pub g_step: GStep,
    pub amplitude_mode: AmplitudeMode,
    pub grid: GridSpec,
    /// Upper bound on the extracted source count; `None` uses the true count.
    pub k_max: Option<usize>,
}

impl Default for TrialSettings {
    fn default() -> Self {
        Self {
            n: 41,
            m: 18,
            snr_db: None,
            snapshots: 1,
            spacing_ratio: 0.5,
            d: None,
            weight_mode: WeightMode::Minimax,
            floor: DEFAULT_FLOOR,
            rho: 1e3,
            gamma: 1e5,
            iters: 2000,
            rank: None,
            g_step: GStep::default(),
            amplitude_mode: AmplitudeMode::RandomPhase,
            grid: GridSpec::default(),
            k_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub scenario: Scenario,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub base_seed: u64,
    pub settings: TrialSettings,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.values.is_empty() {
            return Err(Error::InvalidArgument("sweep value list is empty".into()));
        }
        if self.values.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidArgument("sweep values must be sorted".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("no methods selected".into()));
        }
        if let Scenario::Preset(name) = &self.scenario {
            if presets::by_name(name).is_none() {
                return Err(Error::InvalidArgument(format!("unknown preset '{name}'")));
            }
        }
        for &v in &self.values {
            self.settings_at(v)?;
        }
        Ok(())
    }

    /// Settings with the sweep axis set to `value`.
    pub fn settings_at(&self, value: f64) -> Result<TrialSettings> {
        let mut s = self.settings.clone();
        let count = |v: f64| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidArgument(format!(
                    "{} sweep needs positive integers, got {v}",
                    self.axis.name()
                )))
            }
        };
        match self.axis {
            SweepAxis::Samples => s.m = count(value)?,
            SweepAxis::Snapshots => s.snapshots = count(value)?,
            SweepAxis::SnrDb => s.snr_db = Some(value),
            SweepAxis::Gamma => s.gamma = value,
        }
        if s.m == 0 || s.m > s.n {
            return Err(Error::InvalidArgument(format!("M={} outside 1..={}", s.m, s.n)));
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub method: Method,
    pub axis: SweepAxis,
    pub sweep_value: f64,
    pub trial: usize,
    pub seed: u64,
    /// Infinite when the solver failed.
    pub nmse: f64,
    pub success: bool,
    /// Per-true-source squared angle errors (deg²), misses at the cap.
    pub sq_errors: Vec<f64>,
    pub wall_ms: f64,
    pub failure: Option<String>,
}

impl TrialRecord {
    pub fn rmse_deg(&self) -> f64 {
        if self.sq_errors.is_empty() {
            return 0.0;
        }
        (self.sq_errors.iter().sum::<f64>() / self.sq_errors.len() as f64).sqrt()
    }

    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let a = Self { wall_ms: 0.0, ..self.clone() };
        let b = Self { wall_ms: 0.0, ..other.clone() };
        a == b || (a.nmse.is_nan() && b.nmse.is_nan())
    }
}

/// One paired realization: truth, observation set and noisy observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub sources: SourceSet,
    pub omega: Omega,
    /// Noiseless full-array snapshots.
    pub y_full: Vec<Vec<Complex64>>,
    pub y_obs: Vec<Vec<Complex64>>,
}

pub fn trial_seed(base: u64, value: f64, trial: usize) -> u64 {
    mix_seed(base, &[value.to_bits(), trial as u64])
}

pub fn realize(scenario: &Scenario, s: &TrialSettings, seed: u64) -> Result<Realization> {
    let sources = match scenario {
        Scenario::Preset(name) => {
            presets::by_name(name).ok_or_else(|| Error::InvalidArgument(format!("unknown preset '{name}'")))?
        }
        Scenario::Random { k } => random_sources(*k, s.n, s.spacing_ratio, mix_seed(seed, &[1]))?,
        Scenario::Sources(set) => set.clone(),
    };
    let omega = sample_mask_random(s.n, s.m, mix_seed(seed, &[2]))?;
    let noise = s.snr_db.map_or(NoiseLevel::NONE, NoiseLevel::SnrDb);
    let scene = ArrayScene::new(s.n, omega.clone(), noise, mix_seed(seed, &[3]))?.with_snapshots(s.snapshots);
    let mode = if s.snapshots > 1 { s.amplitude_mode } else { AmplitudeMode::Fixed };
    let snaps = synthesize_snapshots(&sources, &scene, mode)?;
    let (y_full, y_obs) = snaps
        .into_iter()
        .map(|sn| (sn.y_full.expect("synthesis keeps the clean vector"), sn.y_obs))
        .unzip();
    Ok(Realization {
        sources,
        omega,
        y_full,
        y_obs,
    })
}

/// Completed full-array snapshots for a completion method.
pub fn complete(method: Method, real: &Realization, s: &TrialSettings) -> Result<Vec<Vec<Complex64>>> {
    let n = s.n;
    let d = s.d.unwrap_or_else(|| default_pencil(n));
    let k = real.sources.len();
    let t = real.y_obs.len();
    let double = matches!(method, Method::WliDemac | Method::Demac);
    let mode = if method.weighted() { s.weight_mode } else { WeightMode::Identity };
    let base = AdmmConfig {
        rho: s.rho,
        gamma: s.gamma,
        iters: s.iters,
        rank: 1,
        tol: 1e-8,
        seed: 0,
        g_step: s.g_step,
    };
    if t == 1 {
        let spec = if double {
            LiftingSpec::double_hankel(n, d)?
        } else {
            LiftingSpec::hankel(n, d)?
        };
        let weights = design_weights(&spec, &real.omega, mode, s.floor)?;
        let cfg = base.with_rank(s.rank.unwrap_or_else(|| AdmmConfig::default_rank(k, spec.shape())));
        let out = admm_complete(&real.y_obs[0], &real.omega, &spec, &weights, &cfg)?;
        Ok(vec![out.y_hat])
    } else {
        if double {
            return Err(Error::InvalidArgument(
                "double-Hankel lifting is single-snapshot only".into(),
            ));
        }
        let spec = LiftingSpec::block_hankel(n, d, t, 1)?;
        let omegas = vec![real.omega.clone(); t];
        let weights = assemble_block_weights(&spec, &design_weights_block(&spec, &omegas, mode, s.floor)?)?;
        let cfg = base.with_rank(s.rank.unwrap_or_else(|| AdmmConfig::default_rank(k, spec.shape())));
        let out = admm_complete_block(&real.y_obs, &omegas, &spec, &weights, &cfg)?;
        Ok((0..t).map(|c| out.column(c).to_vec()).collect())
    }
}

fn extract(cols: &[Vec<Complex64>], k: usize, spacing: f64) -> Result<DoaEstimate> {
    let per: Vec<DoaEstimate> = cols
        .iter()
        .map(|y| matrix_pencil(y, k, None, 1e-6).map(|e| e.with_spacing(spacing)))
        .collect::<Result<_>>()?;
    if per.len() == 1 {
        return Ok(per.into_iter().next().expect("one column"));
    }
    let radius = 0.5 / cols[0].len() as f64;
    Ok(cluster_taus(&per, k, radius))
}

fn run_method(method: Method, real: &Realization, s: &TrialSettings) -> Result<(f64, DoaEstimate)> {
    let k = s.k_max.unwrap_or(real.sources.len());
    let (recon, est) = match method {
        Method::Bp => {
            let grid = GridSpec {
                spacing_ratio: s.spacing_ratio,
                ..s.grid
            };
            let per: Vec<DoaEstimate> = real
                .y_obs
                .iter()
                .map(|y| bp_grid(y, &real.omega, &grid))
                .collect::<Result<_>>()?;
            let recon: Vec<Vec<Complex64>> = per.iter().map(|e| superpose(&e.taus, &e.amps, s.n)).collect();
            let est = if per.len() == 1 {
                per.into_iter().next().expect("one column")
            } else {
                cluster_taus(&per, k.max(1) * 4, 0.5 / s.n as f64)
            };
            (recon, est)
        }
        _ => {
            let cols = complete(method, real, s)?;
            let est = extract(&cols, k, s.spacing_ratio)?;
            (cols, est)
        }
    };
    let truth: Vec<Complex64> = real.y_full.concat();
    let err = nmse(&truth, &recon.concat())?;
    Ok((err, est))
}

/// Runs one (value, trial) cell for all methods on the same realization.
pub fn run_trial(plan: &ExperimentPlan, value: f64, trial: usize) -> Result<Vec<TrialRecord>> {
    let s = plan.settings_at(value)?;
    let seed = trial_seed(plan.base_seed, value, trial);
    let real = realize(&plan.scenario, &s, seed)?;
    let truth = real.sources.thetas();
    Ok(plan
        .methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let outcome = run_method(method, &real, &s);
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let (nmse, success, sq_errors, failure) = match outcome {
                Ok((e, est)) => {
                    let est_thetas: Vec<f64> = est.thetas.iter().flatten().copied().collect();
                    let ok = success_rule(&real.sources, &est);
                    (e, ok, squared_errors(&truth, &est_thetas), None)
                }
                Err(err) => (f64::INFINITY, false, vec![90.0 * 90.0; truth.len()], Some(err.to_string())),
            };
            TrialRecord {
                method,
                axis: plan.axis,
                sweep_value: value,
                trial,
                seed,
                nmse,
                success,
                sq_errors,
                wall_ms,
                failure,
            }
        })
        .collect())
}

/// All trials of a plan, in (value, trial, method) order. Trials run in
/// parallel on the current rayon pool; results do not depend on scheduling.
pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<TrialRecord>> {
    plan.validate()?;
    let cells: Vec<(f64, usize)> = plan
        .values
        .iter()
        .flat_map(|&v| (0..plan.trials).map(move |t| (v, t)))
        .collect();
    let nested: Vec<Vec<TrialRecord>> = cells
        .par_iter()
        .map(|&(v, t)| run_trial(plan, v, t))
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// [`run_plan`] on a dedicated pool of `threads` workers.
pub fn run_plan_with_threads(plan: &ExperimentPlan, threads: usize) -> Result<Vec<TrialRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| run_plan(plan))
}

fn sin_deg(t: f64) -> f64 {
    t.to_radians().sin()
}

/// Greedy nearest matching: repeatedly pairs the closest unmatched
/// (truth, estimate) under `dist`. Returns the estimate index per truth.
fn greedy_match(truth: &[f64], est: &[f64], dist: impl Fn(f64, f64) -> f64) -> Vec<Option<usize>> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(truth.len() * est.len());
    for (i, &a) in truth.iter().enumerate() {
        for (j, &b) in est.iter().enumerate() {
            pairs.push((dist(a, b), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut by_truth = vec![None; truth.len()];
    let mut used = vec![false; est.len()];
    for (_, i, j) in pairs {
        if by_truth[i].is_none() && !used[j] {
            by_truth[i] = Some(j);
            used[j] = true;
        }
    }
    by_truth
}

/// Every true angle is matched by exactly one estimate within
/// [`SUCCESS_TOL`] in `sin θ`, and no other estimate falls within the
/// tolerance of a true angle.
pub fn success_rule(truth: &SourceSet, est: &DoaEstimate) -> bool {
    let t: Vec<f64> = truth.thetas().iter().map(|&v| sin_deg(v)).collect();
    let e: Vec<f64> = est.taus.iter().map(|&tau| tau / est.spacing_ratio).collect();
    if t.is_empty() {
        return true;
    }
    let matched = greedy_match(&t, &e, |a, b| (a - b).abs());
    let mut used = vec![false; e.len()];
    for (i, m) in matched.iter().enumerate() {
        match m {
            Some(j) if (t[i] - e[*j]).abs() <= SUCCESS_TOL => used[*j] = true,
            _ => return false,
        }
    }
    !e.iter()
        .enumerate()
        .any(|(j, &ej)| !used[j] && t.iter().any(|&ti| (ti - ej).abs() <= SUCCESS_TOL))
}

/// Squared angle errors per true source after greedy nearest matching in
/// degrees. Unmatched truths cost `min(90°, 2 × worst matched error)²`.
pub fn squared_errors(truth_thetas: &[f64], est_thetas: &[f64]) -> Vec<f64> {
    let matched = greedy_match(truth_thetas, est_thetas, |a, b| (a - b).abs());
    let errs: Vec<Option<f64>> = matched
        .iter()
        .enumerate()
        .map(|(i, m)| m.map(|j| (truth_thetas[i] - est_thetas[j]).abs()))
        .collect();
    let worst = errs.iter().flatten().cloned().fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    let cap = worst.map_or(90.0, |w| (2.0 * w).min(90.0));
    errs.iter().map(|e| e.unwrap_or(cap).powi(2)).collect()
}

/// Root mean square angle error over sources and trials.
pub fn rmse(truth_thetas: &[f64], est_thetas_per_trial: &[Vec<f64>]) -> f64 {
    let all: Vec<f64> = est_thetas_per_trial
        .iter()
        .flat_map(|est| squared_errors(truth_thetas, est))
        .collect();
    if all.is_empty() {
        return 0.0;
    }
    (all.iter().sum::<f64>() / all.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub sweep_value: f64,
    pub trials: usize,
    pub mean_nmse: f64,
    pub median_nmse: f64,
    pub recovery: f64,
    pub rmse_deg: f64,
    pub mean_wall_ms: f64,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    if v.len() % 2 == 1 {
        v[h]
    } else {
        0.5 * (v[h - 1] + v[h])
    }
}

/// Per (method, sweep value) statistics, in order of first appearance.
pub fn aggregate(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Method, u64)> = Vec::new();
    for r in records {
        let key = (r.method, r.sweep_value.to_bits());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(method, bits)| {
            let group: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.method == method && r.sweep_value.to_bits() == bits)
                .collect();
            let count = group.len() as f64;
            let nmses: Vec<f64> = group.iter().map(|r| r.nmse).collect();
            let sq: Vec<f64> = group.iter().flat_map(|r| r.sq_errors.iter().copied()).collect();
            SummaryRow {
                method,
                sweep_value: f64::from_bits(bits),
                trials: group.len(),
                mean_nmse: nmses.iter().sum::<f64>() / count,
                median_nmse: median(&nmses),
                recovery: group.iter().filter(|r| r.success).count() as f64 / count,
                rmse_deg: if sq.is_empty() {
                    0.0
                } else {
                    (sq.iter().sum::<f64>() / sq.len() as f64).sqrt()
                },
                mean_wall_ms: group.iter().map(|r| r.wall_ms).sum::<f64>() / count,
            }
        })
        .collect()
}

/// One row per record. Wall time is left empty unless `timing` is set, so
/// reruns produce identical files.
pub fn write_records_csv<W: Write>(records: &[TrialRecord], timing: bool, mut out: W) -> std::io::Result<()> {
    writeln!(out, "method,sweep_axis,sweep_value,trial,seed,nmse,success,rmse_deg,wall_ms")?;
    for r in records {
        let wall = if timing { format!("{:.3}", r.wall_ms) } else { String::new() };
        writeln!(
            out,
            "{},{},{},{},{},{:.9e},{},{:.9e},{}",
            r.method.name(),
            r.axis.name(),
            r.sweep_value,
            r.trial,
            r.seed,
            r.nmse,
            r.success,
            r.rmse_deg(),
            wall
        )?;
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "method,sweep_value,mean_nmse,median_nmse,recovery,rmse_deg,crb,zzb")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:.9e},{:.9e},{:.6},{:.9e},,",
            r.method.name(),
            r.sweep_value,
            r.mean_nmse,
            r.median_nmse,
            r.recovery,
            r.rmse_deg
        )?;
    }
    Ok(())
}

/// Noise-aware tolerance `c · √M · η · N / min p²` of the convex
/// super-resolution step, reported for reference only.
pub fn kappa_diagnostic(m: usize, eta: f64, n: usize, min_weight: f64, c: f64) -> f64 {
    c * (m as f64).sqrt() * eta * n as f64 / (min_weight * min_weight)
}

/// `σ √(2 ln N)`: high-probability bound on the largest noise magnitude.
pub fn eta_from_sigma(sigma: f64, n: usize) -> f64 {
    sigma * (2.0 * (n as f64).ln()).sqrt()
}

pub fn weights_for(method: Method, spec: &LiftingSpec, omega: &Omega, s: &TrialSettings) -> Result<WeightPair> {
    let mode = if method.weighted() { s.weight_mode } else { WeightMode::Identity };
    design_weights(spec, omega, mode, s.floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::Source;

    fn set(thetas: &[f64]) -> SourceSet {
        SourceSet::new(
            thetas
                .iter()
                .map(|&t| Source {
                    theta_deg: t,
                    amp: Complex64::new(1.0, 0.0),
                })
                .collect(),
            0.5,
        )
        .unwrap()
    }

    fn est(thetas: &[f64]) -> DoaEstimate {
        let y = vec![Complex64::new(0.0, 0.0); 3];
        let mut e = matrix_pencil(&y, 1, None, 1e-8).unwrap();
        e.taus = thetas.iter().map(|t| 0.5 * sin_deg(*t)).collect();
        e.amps = vec![Complex64::new(1.0, 0.0); thetas.len()];
        e.thetas = thetas.iter().map(|&t| Some(t)).collect();
        e
    }

    #[test]
    fn success_examples() {
        let shifted = (sin_deg(10.0) + 0.004).asin().to_degrees();
        assert!(success_rule(&set(&[10.0]), &est(&[shifted])));
        let far = (sin_deg(10.0) + 0.006).asin().to_degrees();
        assert!(!success_rule(&set(&[10.0]), &est(&[far])));
        assert!(!success_rule(&set(&[10.0]), &est(&[])));
        let near = (sin_deg(10.0) + 0.002).asin().to_degrees();
        assert!(!success_rule(&set(&[10.0]), &est(&[10.0, near])));
        assert!(success_rule(&set(&[10.0, -40.0]), &est(&[-40.0, 10.0, 70.0])));
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[10.0, 20.0], &[vec![10.0, 20.0]]), 0.0);
        assert!((rmse(&[10.0], &[vec![11.0]]) - 1.0).abs() < 1e-12);
        assert!((rmse(&[10.0, 20.0], &[vec![11.0, 23.0]]) - 5f64.sqrt()).abs() < 1e-12);
        // a miss costs twice the worst matched error
        assert!((rmse(&[10.0, 50.0], &[vec![11.0]]) - (2.5f64).sqrt()).abs() < 1e-12);
        assert!((rmse(&[10.0], &[vec![]]) - 90.0).abs() < 1e-12);
    }

    fn record(method: Method, value: f64, nmse: f64, success: bool) -> TrialRecord {
        TrialRecord {
            method,
            axis: SweepAxis::Samples,
            sweep_value: value,
            trial: 0,
            seed: 0,
            nmse,
            success,
            sq_errors: vec![],
            wall_ms: 1.0,
            failure: None,
        }
    }

    #[test]
    fn aggregate_examples() {
        let recs: Vec<TrialRecord> = (0..10).map(|_| record(Method::Emac, 5.0, 0.1, true)).collect();
        let rows = aggregate(&recs);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].recovery, 1.0);
        let recs = vec![record(Method::Bp, 1.0, 0.1, false), record(Method::Bp, 1.0, 0.3, true)];
        let rows = aggregate(&recs);
        assert!((rows[0].mean_nmse - 0.2).abs() < 1e-15);
        assert!((rows[0].recovery - 0.5).abs() < 1e-15);
        assert!(aggregate(&[]).is_empty());
    }

    #[test]
    fn plan_validation() {
        let mut plan = ExperimentPlan {
            scenario: Scenario::Preset("table1-d".into()),
            axis: SweepAxis::Samples,
            values: vec![20.0],
            trials: 1,
            methods: vec![Method::Emac],
            base_seed: 1,
            settings: TrialSettings {
                n: 31,
                iters: 50,
                ..TrialSettings::default()
            },
        };
        assert!(plan.validate().is_ok());
        plan.values = vec![20.0, 10.0];
        assert!(plan.validate().is_err());
        plan.values = vec![40.0];
        assert!(plan.validate().is_err());
        plan.values = vec![20.0];
        plan.trials = 0;
        assert!(plan.validate().is_err());
    }

    #[test]
    fn one_trial_one_record() {
        let plan = ExperimentPlan {
            scenario: Scenario::Preset("table1-d".into()),
            axis: SweepAxis::Samples,
            values: vec![20.0],
            trials: 1,
            methods: vec![Method::Emac],
            base_seed: 1,
            settings: TrialSettings {
                n: 31,
                iters: 50,
                ..TrialSettings::default()
            },
        };
        let recs = run_plan(&plan).unwrap();
        assert_eq!(recs.len(), 1);
        let again = run_plan(&plan).unwrap();
        assert!(recs[0].same_outcome(&again[0]));
    }
}
