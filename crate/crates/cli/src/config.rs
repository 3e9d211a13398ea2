use std::path::{Path, PathBuf};

use serde::Deserialize;
use wlidoa::array_model::{presets, random_sources, sample_mask_random, NoiseLevel, Omega, Source, SourceSet};
use wlidoa::completion::{AdmmConfig, GStep};
use wlidoa::doa::GridSpec;
use wlidoa::harness::{ExperimentPlan, Method, Scenario, SweepAxis, TrialSettings};
use wlidoa::seed::mix_seed;
use wlidoa::weights::{WeightMode, DEFAULT_FLOOR};
use wlidoa::Complex64;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scene: SceneConfig,
    pub sources: SourcesConfig,
    pub lifting: LiftingConfig,
    pub weights: WeightsConfig,
    pub solver: SolverConfig,
    pub extract: ExtractConfig,
    pub experiment: ExperimentConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Amplitudes {
    Fixed,
    #[default]
    RandomPhase,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub n: usize,
    /// 1-based element indices.
    pub omega: Option<Vec<usize>>,
    pub m: Option<usize>,
    pub snr_db: Option<f64>,
    pub eta: Option<f64>,
    pub snapshots: usize,
    pub spacing_ratio: f64,
    pub seed: u64,
    pub amplitudes: Amplitudes,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            n: 41,
            omega: None,
            m: None,
            snr_db: None,
            eta: None,
            snapshots: 1,
            spacing_ratio: 0.5,
            seed: 0,
            amplitudes: Amplitudes::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEntry {
    pub theta_deg: f64,
    /// `[re, im]`.
    pub amp: [f64; 2],
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourcesConfig {
    pub preset: Option<String>,
    pub list: Option<Vec<SourceEntry>>,
    /// Number of random separated sources.
    pub random: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftKind {
    #[default]
    Hankel,
    DoubleHankel,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LiftingConfig {
    pub kind: LiftKind,
    pub d: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightsConfig {
    pub mode: WeightMode,
    pub floor: f64,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        Self {
            mode: WeightMode::default(),
            floor: DEFAULT_FLOOR,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub rho: f64,
    pub gamma: f64,
    pub iters: usize,
    pub rank: Option<usize>,
    pub tol: f64,
    pub g_step: GStep,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = AdmmConfig::default();
        Self {
            rho: d.rho,
            gamma: d.gamma,
            iters: d.iters,
            rank: None,
            tol: d.tol,
            g_step: d.g_step,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractMethod {
    #[default]
    Pencil,
    Bp,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractConfig {
    pub method: ExtractMethod,
    pub k_max: Option<usize>,
    pub grid_resolution: usize,
    pub lambda_reg: Option<f64>,
    pub noise_tol: f64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            method: ExtractMethod::default(),
            k_max: None,
            grid_resolution: GridSpec::default().resolution,
            lambda_reg: None,
            noise_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub sweep: SweepAxis,
    pub values: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            sweep: SweepAxis::Samples,
            values: Vec::new(),
            trials: 10,
            methods: vec![Method::WliEmac.name().to_string()],
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    /// Record wall-clock times in experiment output.
    pub timing: bool,
}

fn config_err(key: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {message}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string() + &span_hint(&e, text)))
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            resolution: self.extract.grid_resolution,
            lambda_reg: self.extract.lambda_reg,
            spacing_ratio: self.scene.spacing_ratio,
            ..GridSpec::default()
        }
    }

    pub fn noise(&self) -> Result<NoiseLevel, CliError> {
        match (self.scene.snr_db, self.scene.eta) {
            (Some(_), Some(_)) => Err(config_err("scene", "set at most one of snr_db and eta")),
            (Some(snr), None) => Ok(NoiseLevel::SnrDb(snr)),
            (None, Some(eta)) if eta >= 0.0 => Ok(NoiseLevel::MaxAmplitude(eta)),
            (None, Some(eta)) => Err(config_err("scene.eta", format!("must be nonnegative, got {eta}"))),
            (None, None) => Ok(NoiseLevel::NONE),
        }
    }

    pub fn omega(&self, seed: u64) -> Result<Omega, CliError> {
        let n = self.scene.n;
        match (&self.scene.omega, self.scene.m) {
            (Some(_), Some(_)) => Err(config_err("scene", "set at most one of omega and m")),
            (Some(list), None) => Omega::from_one_based(list, n).map_err(|e| config_err("scene.omega", e)),
            (None, Some(m)) => sample_mask_random(n, m, mix_seed(seed, &[2])).map_err(|e| config_err("scene.m", e)),
            (None, None) => Ok(Omega::full(n)),
        }
    }

    fn source_choice(&self) -> Result<(), CliError> {
        let s = &self.sources;
        let set = [s.preset.is_some(), s.list.is_some(), s.random.is_some()];
        match set.iter().filter(|&&b| b).count() {
            1 => Ok(()),
            0 => Err(config_err("sources", "one of preset, list or random is required")),
            _ => Err(config_err("sources", "preset, list and random are mutually exclusive")),
        }
    }

    fn explicit_sources(&self, list: &[SourceEntry]) -> Result<SourceSet, CliError> {
        let sources = list
            .iter()
            .map(|e| Source {
                theta_deg: e.theta_deg,
                amp: Complex64::new(e.amp[0], e.amp[1]),
            })
            .collect();
        SourceSet::new(sources, self.scene.spacing_ratio).map_err(|e| config_err("sources.list", e))
    }

    fn preset(&self, name: &str) -> Result<SourceSet, CliError> {
        let set = presets::by_name(name).ok_or_else(|| {
            config_err(
                "sources.preset",
                format!("unknown preset '{name}', expected one of {}", presets::NAMES.join(", ")),
            )
        })?;
        Ok(SourceSet {
            spacing_ratio: self.scene.spacing_ratio,
            ..set
        })
    }

    pub fn sources(&self, seed: u64) -> Result<SourceSet, CliError> {
        self.source_choice()?;
        let s = &self.sources;
        if let Some(name) = &s.preset {
            self.preset(name)
        } else if let Some(list) = &s.list {
            self.explicit_sources(list)
        } else {
            let k = s.random.expect("checked");
            random_sources(k, self.scene.n, self.scene.spacing_ratio, mix_seed(seed, &[1]))
                .map_err(|e| config_err("sources.random", e))
        }
    }

    pub fn methods(&self) -> Result<Vec<Method>, CliError> {
        self.experiment
            .methods
            .iter()
            .map(|m| {
                Method::parse(m).ok_or_else(|| {
                    let known: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                    config_err("experiment.methods", format!("unknown method '{m}', expected one of {}", known.join(", ")))
                })
            })
            .collect()
    }

    pub fn plan(&self, base_seed: u64) -> Result<ExperimentPlan, CliError> {
        self.source_choice()?;
        let scenario = if let Some(name) = &self.sources.preset {
            self.preset(name)?;
            Scenario::Preset(name.clone())
        } else if let Some(list) = &self.sources.list {
            Scenario::Sources(self.explicit_sources(list)?)
        } else {
            Scenario::Random {
                k: self.sources.random.expect("checked"),
            }
        };
        if self.scene.omega.is_some() {
            return Err(config_err("scene.omega", "experiments draw random masks; use scene.m"));
        }
        if self.scene.eta.is_some() {
            return Err(config_err("scene.eta", "experiments are parameterized by scene.snr_db"));
        }
        if self.lifting.kind != LiftKind::Hankel {
            return Err(config_err("lifting.kind", "experiments pick the lifting from the method list"));
        }
        let settings = TrialSettings {
            n: self.scene.n,
            m: self.scene.m.unwrap_or(TrialSettings::default().m),
            snr_db: self.scene.snr_db,
            snapshots: self.scene.snapshots,
            spacing_ratio: self.scene.spacing_ratio,
            d: self.lifting.d,
            weight_mode: self.weights.mode,
            floor: self.weights.floor,
            rho: self.solver.rho,
            gamma: self.solver.gamma,
            iters: self.solver.iters,
            rank: self.solver.rank,
            g_step: self.solver.g_step,
            amplitude_mode: self.scene.amplitudes.into(),
            grid: self.grid(),
            k_max: self.extract.k_max,
        };
        let plan = ExperimentPlan {
            scenario,
            axis: self.experiment.sweep,
            values: self.experiment.values.clone(),
            trials: self.experiment.trials,
            methods: self.methods()?,
            base_seed,
            settings,
        };
        plan.validate().map_err(|e| config_err("experiment", e))?;
        Ok(plan)
    }
}

impl From<Amplitudes> for wlidoa::array_model::AmplitudeMode {
    fn from(a: Amplitudes) -> Self {
        match a {
            Amplitudes::Fixed => Self::Fixed,
            Amplitudes::RandomPhase => Self::RandomPhase,
        }
    }
}

fn span_hint(e: &toml::de::Error, text: &str) -> String {
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!(" (line {line})")
        }
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_takes_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.scene.n, 41);
        assert_eq!(c.weights.mode, WeightMode::Minimax);
        assert_eq!(c.extract.grid_resolution, 4096);
        assert_eq!(c.solver.iters, 2000);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse("[scene]\nfoo = 1\n").unwrap_err();
        assert!(err.to_string().contains("foo"), "{err}");
        let err = RunConfig::parse("foo = 1\n").unwrap_err();
        assert!(err.to_string().contains("foo"), "{err}");
    }

    #[test]
    fn sources_must_be_unique() {
        let c = RunConfig::parse("[sources]\npreset = \"table1-d\"\nrandom = 2\n").unwrap();
        assert!(c.sources(0).is_err());
        let c = RunConfig::parse("").unwrap();
        assert!(c.sources(0).is_err());
    }

    #[test]
    fn explicit_list_parses() {
        let c = RunConfig::parse("[[sources.list]]\ntheta_deg = 10.0\namp = [1.0, -0.5]\n").unwrap();
        let s = c.sources(0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.amps()[0], Complex64::new(1.0, -0.5));
    }
}
