//! Array measurement model: steering atoms, source superposition, additive
//! noise and the sampling masks that turn a uniform array into a sparse one.
//!
//! Positions inside the steering exponent run over `0..N`, so the first
//! element of the array always carries zero phase. Observation indices are
//! 0-based throughout the library; the text file formats write them 1-based.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::mix_seed;

/// A single narrow-band source: arrival angle (degrees) and complex amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub theta_deg: f64,
    pub amp: Complex64,
}

/// The set of impinging sources plus the element spacing `s_d / λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSet {
    pub sources: Vec<Source>,
    pub spacing_ratio: f64,
}

impl SourceSet {
    pub fn new(sources: Vec<Source>, spacing_ratio: f64) -> Result<Self> {
        if !(spacing_ratio > 0.0) || !spacing_ratio.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "spacing ratio must be positive, got {spacing_ratio}"
            )));
        }
        for s in &sources {
            if !(-90.0..=90.0).contains(&s.theta_deg) {
                return Err(Error::InvalidArgument(format!(
                    "source angle {} outside [-90, 90] degrees",
                    s.theta_deg
                )));
            }
            if !s.amp.re.is_finite() || !s.amp.im.is_finite() {
                return Err(Error::InvalidArgument("non-finite source amplitude".into()));
            }
        }
        Ok(Self {
            sources,
            spacing_ratio,
        })
    }

    /// Half-wavelength spacing from `(theta_deg, amplitude)` pairs.
    pub fn from_angles(pairs: &[(f64, Complex64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(theta_deg, amp)| Source { theta_deg, amp })
                .collect(),
            0.5,
        )
    }

    /// Builds sources from normalized frequencies; requires `|τ| ≤ spacing_ratio`.
    pub fn from_taus(pairs: &[(f64, Complex64)], spacing_ratio: f64) -> Result<Self> {
        let mut sources = Vec::with_capacity(pairs.len());
        for &(tau, amp) in pairs {
            let s = tau / spacing_ratio;
            if !(-1.0..=1.0).contains(&s) {
                return Err(Error::InvalidArgument(format!(
                    "tau {tau} not reachable with spacing ratio {spacing_ratio}"
                )));
            }
            sources.push(Source {
                theta_deg: s.asin().to_degrees(),
                amp,
            });
        }
        Self::new(sources, spacing_ratio)
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn taus(&self) -> Vec<f64> {
        self.sources
            .iter()
            .map(|s| self.spacing_ratio * s.theta_deg.to_radians().sin())
            .collect()
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.sources.iter().map(|s| s.theta_deg).collect()
    }

    pub fn amps(&self) -> Vec<Complex64> {
        self.sources.iter().map(|s| s.amp).collect()
    }
}

/// Sorted, duplicate-free set of observed positions of an `n`-element ULA.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Omega {
    n: usize,
    indices: Vec<usize>,
}

impl Omega {
    /// Validates and sorts 0-based indices.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidOmega { index: bad, n });
        }
        Ok(Self { n, indices })
    }

    /// Accepts 1-based indices as written in the text formats.
    pub fn from_one_based(indices: &[usize], n: usize) -> Result<Self> {
        let mut zero = Vec::with_capacity(indices.len());
        for &i in indices {
            if i == 0 || i > n {
                return Err(Error::InvalidOmega { index: i, n });
            }
            zero.push(i - 1);
        }
        Self::new(zero, n)
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            indices: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Boolean membership mask of length `n`.
    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &i in &self.indices {
            m[i] = true;
        }
        m
    }

    /// Indices not in the set.
    pub fn complement(&self) -> Vec<usize> {
        let m = self.mask();
        (0..self.n).filter(|&i| !m[i]).collect()
    }
}

/// Additive noise specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseLevel {
    /// Circular Gaussian rescaled so the largest element magnitude equals `eta`.
    MaxAmplitude(f64),
    /// Circular Gaussian with variance from `SNR = ||y||² / (N σ²)` in dB.
    SnrDb(f64),
}

impl NoiseLevel {
    pub const NONE: NoiseLevel = NoiseLevel::MaxAmplitude(0.0);
}

/// Per-snapshot amplitude behaviour for multi-snapshot scenes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AmplitudeMode {
    #[default]
    Fixed,
    /// Magnitudes kept, phases redrawn uniformly per snapshot.
    RandomPhase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayScene {
    pub n: usize,
    pub omega: Omega,
    pub noise: NoiseLevel,
    pub snapshots: usize,
    pub seed: u64,
}

impl ArrayScene {
    pub fn new(n: usize, omega: Omega, noise: NoiseLevel, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("array length must be positive".into()));
        }
        if omega.n() != n {
            return Err(Error::InvalidArgument(format!(
                "observation set built for N={} used with N={n}",
                omega.n()
            )));
        }
        if let NoiseLevel::MaxAmplitude(eta) = noise {
            if !(eta >= 0.0) {
                return Err(Error::InvalidArgument(format!("eta must be >= 0, got {eta}")));
            }
        }
        Ok(Self {
            n,
            omega,
            noise,
            snapshots: 1,
            seed,
        })
    }

    pub fn with_snapshots(mut self, t: usize) -> Self {
        self.snapshots = t.max(1);
        self
    }

    pub fn m(&self) -> usize {
        self.omega.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    /// Noiseless uniform-array samples.
    pub y_full: Option<Vec<Complex64>>,
    /// Noisy samples at the observed positions.
    pub y_obs: Vec<Complex64>,
    /// Noise realization added to every uniform-array position.
    pub noise: Option<Vec<Complex64>>,
}

impl Snapshot {
    /// Largest realized noise magnitude, 0 when noiseless.
    pub fn realized_eta(&self) -> f64 {
        self.noise
            .as_ref()
            .map(|e| e.iter().map(|v| v.norm()).fold(0.0, f64::max))
            .unwrap_or(0.0)
    }
}

/// `exp(-j 2π s n sin θ)` for element position `n`.
pub fn steering_atom(theta_deg: f64, n: usize, spacing_ratio: f64) -> Complex64 {
    tau_atom(spacing_ratio * theta_deg.to_radians().sin(), n)
}

/// Steering atom in the normalized-frequency coordinate.
#[inline]
pub fn tau_atom(tau: f64, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * tau * n as f64)
}

/// Noiseless superposition `Σ_k b_k exp(-j2πτ_k n)` for `n = 0..len`.
pub fn superpose(taus: &[f64], amps: &[Complex64], len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|n| {
            taus.iter()
                .zip(amps)
                .map(|(&t, &b)| b * tau_atom(t, n))
                .sum()
        })
        .collect()
}

fn draw_noise(rng: &mut ChaCha8Rng, y: &[Complex64], level: NoiseLevel) -> Option<Vec<Complex64>> {
    let n = y.len();
    let mut e: Vec<Complex64> = (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect();
    match level {
        NoiseLevel::MaxAmplitude(eta) => {
            if eta == 0.0 {
                return None;
            }
            let peak = e.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let s = if peak > 0.0 { eta / peak } else { 0.0 };
            e.iter_mut().for_each(|v| *v *= s);
        }
        NoiseLevel::SnrDb(snr) => {
            let power = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
            let sigma = (power / 10f64.powf(snr / 10.0)).sqrt();
            e.iter_mut().for_each(|v| *v *= sigma);
        }
    }
    Some(e)
}

/// Noise standard deviation implied by an SNR for a given clean vector.
pub fn sigma_for_snr(y: &[Complex64], snr_db: f64) -> f64 {
    let power = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len().max(1) as f64;
    (power / 10f64.powf(snr_db / 10.0)).sqrt()
}

/// Single-snapshot synthesis; uses the scene seed.
pub fn synthesize(sources: &SourceSet, scene: &ArrayScene) -> Result<Snapshot> {
    let mut all = synthesize_snapshots(sources, &scene.clone().with_snapshots(1), AmplitudeMode::Fixed)?;
    Ok(all.remove(0))
}

/// Generates `scene.snapshots` snapshots sharing one observation set.
pub fn synthesize_snapshots(
    sources: &SourceSet,
    scene: &ArrayScene,
    amps: AmplitudeMode,
) -> Result<Vec<Snapshot>> {
    if scene.n == 0 {
        return Err(Error::InvalidArgument("array length must be positive".into()));
    }
    let taus = sources.taus();
    let base = sources.amps();
    (0..scene.snapshots)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(scene.seed, &[t as u64]));
            let b: Vec<Complex64> = match amps {
                AmplitudeMode::Fixed => base.clone(),
                AmplitudeMode::RandomPhase => base
                    .iter()
                    .map(|b| Complex64::from_polar(b.norm(), rng.random_range(0.0..2.0 * PI)))
                    .collect(),
            };
            let clean = superpose(&taus, &b, scene.n);
            let noise = draw_noise(&mut rng, &clean, scene.noise);
            let noisy: Vec<Complex64> = match &noise {
                Some(e) => clean.iter().zip(e).map(|(a, b)| a + b).collect(),
                None => clean.clone(),
            };
            Ok(Snapshot {
                y_obs: project(&noisy, &scene.omega)?,
                y_full: Some(clean),
                noise,
            })
        })
        .collect()
}

/// Keeps the entries of `y` listed in `omega`.
pub fn project(y: &[Complex64], omega: &Omega) -> Result<Vec<Complex64>> {
    omega
        .indices()
        .iter()
        .map(|&i| {
            y.get(i)
                .copied()
                .ok_or(Error::InvalidOmega { index: i, n: y.len() })
        })
        .collect()
}

/// Adjoint of [`project`]: zero-fills the unobserved positions.
pub fn embed(y_obs: &[Complex64], omega: &Omega) -> Result<Vec<Complex64>> {
    if y_obs.len() != omega.len() {
        return Err(Error::shape(omega.len(), y_obs.len()));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); omega.n()];
    for (&i, &v) in omega.indices().iter().zip(y_obs) {
        out[i] = v;
    }
    Ok(out)
}

/// Uniformly random `m`-subset of `0..n`.
pub fn sample_mask_random(n: usize, m: usize, seed: u64) -> Result<Omega> {
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= M <= N, got M={m}, N={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Omega::new(index::sample(&mut rng, n, m).into_vec(), n)
}

/// Inclusion probability `min{1, c μ_n K̃² log³(N) / N}`.
pub fn leverage_inclusion_probability(mu: f64, k_tilde: usize, n: usize, c: f64) -> f64 {
    let nf = n as f64;
    (c * mu * (k_tilde * k_tilde) as f64 * nf.ln().powi(3) / nf).min(1.0)
}

/// Independent Bernoulli sampling driven by leverage scores.
pub fn sample_mask_leverage(mu: &[f64], k_tilde: usize, n: usize, c: f64, seed: u64) -> Result<Omega> {
    if mu.len() != n {
        return Err(Error::shape(n, mu.len()));
    }
    if let Some(bad) = mu.iter().find(|&&v| !(v >= 0.0)) {
        return Err(Error::InvalidArgument(format!("negative leverage score {bad}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = mu
        .iter()
        .enumerate()
        .filter_map(|(i, &m)| {
            let p = leverage_inclusion_probability(m, k_tilde, n, c);
            let u: f64 = rng.random();
            (u < p).then_some(i)
        })
        .collect();
    Omega::new(picked, n)
}

/// Named source presets.
pub mod presets {
    use super::*;

    fn real(pairs: &[(f64, f64)]) -> SourceSet {
        SourceSet::from_angles(
            &pairs
                .iter()
                .map(|&(t, a)| (t, Complex64::new(a, 0.0)))
                .collect::<Vec<_>>(),
        )
        .expect("preset angles are within range")
    }

    /// Eight sources, two nearly co-located pairs.
    pub fn table1_a() -> SourceSet {
        real(&[
            (-71.56, 3.79),
            (-34.58, 3.06),
            (-34.44, 3.89),
            (-14.58, 4.14),
            (8.74, 2.18),
            (26.80, 2.02),
            (26.92, 3.85),
            (48.08, 2.18),
        ])
    }

    /// Nine sources, two nearly co-located triplets.
    pub fn table1_b() -> SourceSet {
        real(&[
            (-36.17, 3.07),
            (-22.66, 2.28),
            (35.20, 2.17),
            (35.48, 2.18),
            (35.76, 3.43),
            (49.60, 2.78),
            (59.66, 2.46),
            (60.11, 3.60),
            (60.58, 3.31),
        ])
    }

    /// Five sources: a close triplet and a close pair.
    pub fn table1_c() -> SourceSet {
        real(&[
            (-25.48, 2.66),
            (-24.04, 2.59),
            (-22.79, 2.61),
            (47.12, 3.75),
            (48.83, 2.83),
        ])
    }

    pub fn table1_d() -> SourceSet {
        real(&[(-30.46, 2.62), (-6.89, 3.86), (41.29, 3.48)])
    }

    pub fn by_name(name: &str) -> Option<SourceSet> {
        match name {
            "table1-a" => Some(table1_a()),
            "table1-b" => Some(table1_b()),
            "table1-c" => Some(table1_c()),
            "table1-d" => Some(table1_d()),
            _ => None,
        }
    }

    pub const NAMES: [&str; 4] = ["table1-a", "table1-b", "table1-c", "table1-d"];
}

/// `k` sources with angles uniform on [-90°, 90°] and random-phase amplitudes
/// of magnitude in [2, 4], redrawn until the separation condition holds on an
/// `n`-element array.
pub fn random_sources(k: usize, n: usize, spacing_ratio: f64, seed: u64) -> Result<SourceSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let sources: Vec<Source> = (0..k)
            .map(|_| Source {
                theta_deg: rng.random_range(-90.0..=90.0),
                amp: Complex64::from_polar(rng.random_range(2.0..4.0), rng.random_range(0.0..2.0 * PI)),
            })
            .collect();
        let set = SourceSet::new(sources, spacing_ratio)?;
        if k < 2 || crate::doa::separation_ok(&set.thetas(), n, spacing_ratio)? {
            return Ok(set);
        }
    }
    Err(Error::InvalidArgument(format!(
        "could not draw {k} separated sources for N={n}"
    )))
}
