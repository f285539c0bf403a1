//! Archivable run configurations and run records (TOML).
//!
//! A record embeds the fully resolved configuration, its SHA-256 hash and
//! the schema version, so feeding a record back in reproduces the run.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernel::{cstar, CorrelationKernel, InitialData, ModelParams};
use crate::renewal::{
    blowup_time_drift, blowup_time_unbounded, blowup_time_unbounded_reduced, RenewalProblem,
    UnboundedVariant,
};
use crate::simulator::{
    detect_explosion, DeterministicRun, Diagnostics, Drift, Grid, LagRule, NoiseSpec, ReactionSpec,
    Scheme, Sigma, SimOptions, Simulation, SimulationOutput,
};

pub const SCHEMA_VERSION: &str = "fracspde-run/1";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseConfig {
    #[default]
    White,
    Riesz {
        omega: f64,
    },
    /// `f(x, y) = φ(|x - y|)`, piecewise linear through `(r, f)` and
    /// constant past the last node
    Radial {
        r: Vec<f64>,
        f: Vec<f64>,
    },
}

impl NoiseConfig {
    pub fn spec(&self) -> Result<NoiseSpec> {
        Ok(match self {
            NoiseConfig::White => NoiseSpec::White,
            NoiseConfig::Riesz { omega } => {
                NoiseSpec::Colored(CorrelationKernel::Riesz { omega: *omega })
            }
            NoiseConfig::Radial { r, f } => {
                let ok = r.len() >= 2
                    && r.len() == f.len()
                    && r[0] == 0.0
                    && r.windows(2).all(|w| w[1] > w[0])
                    && f.iter().all(|v| v.is_finite());
                if !ok {
                    return Err(Error::Config(
                        "radial noise needs matching r and f tables with r increasing from 0"
                            .into(),
                    ));
                }
                let floor = f.iter().copied().fold(f64::INFINITY, f64::min);
                let radius = *r.last().unwrap_or(&0.0);
                let (r, f) = (r.clone(), f.clone());
                let phi = move |x: &[f64], y: &[f64]| {
                    let d = x
                        .iter()
                        .zip(y)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    let k = r.partition_point(|&v| v <= d);
                    if k >= r.len() {
                        return f[f.len() - 1];
                    }
                    let w = (d - r[k - 1]) / (r[k] - r[k - 1]);
                    f[k - 1] + w * (f[k] - f[k - 1])
                };
                NoiseSpec::Colored(CorrelationKernel::Tabulated {
                    f: std::sync::Arc::new(phi),
                    floor,
                    radius,
                })
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Constant { value: f64 },
    Ball { radius: f64, level: f64 },
}

impl InitialConfig {
    pub fn data(&self) -> InitialData {
        match *self {
            InitialConfig::Constant { value } => InitialData::Constant(value),
            InitialConfig::Ball { radius, level } => InitialData::Ball { radius, level },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub steps: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    #[serde(default = "one")]
    pub paths: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig { paths: 1, seed: 0 }
    }
}

fn threshold() -> f64 {
    1e8
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub lag: LagRule,
    #[serde(default)]
    pub scheme: Scheme,
    /// defaults to the origin
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<Vec<f64>>,
    #[serde(default = "two")]
    pub order: f64,
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default)]
    pub record_points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            threshold: threshold(),
            lag: LagRule::default(),
            scheme: Scheme::default(),
            probe: None,
            order: two(),
            record_every: 1,
            record_points: vec![],
            snapshot_every: None,
        }
    }
}

/// The structured-text form of a [`Simulation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub model: ModelParams,
    pub reaction: ReactionSpec,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub initial: InitialConfig,
    pub grid: Grid,
    pub time: TimeConfig,
    #[serde(default)]
    pub paths: PathConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// overrides the automatic renewal prediction used in the verdict
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renewal_prediction: Option<f64>,
}

impl SimConfig {
    /// Parses a configuration, or the configuration embedded in a run record.
    pub fn from_toml(text: &str) -> Result<Self> {
        let value: toml::Value =
            toml::from_str(text).map_err(|e| Error::Config(format!("invalid TOML: {e}")))?;
        if let Some(schema) = value.get("schema_version") {
            if schema.as_str() != Some(SCHEMA_VERSION) {
                return Err(Error::Config(format!(
                    "unsupported schema version {schema}, expected {SCHEMA_VERSION}"
                )));
            }
            let record: RunRecord = value
                .try_into()
                .map_err(|e| Error::Config(format!("invalid run record: {e}")))?;
            return Ok(record.config);
        }
        value
            .try_into()
            .map_err(|e| Error::Config(format!("invalid configuration: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn hash(&self) -> Result<String> {
        config_hash(self)
    }

    pub fn simulation(&self) -> Result<Simulation> {
        let noise = self.noise.spec()?;
        let mut options = SimOptions::for_dim(self.model.d);
        let o = &self.output;
        options.threshold = o.threshold;
        options.lag = o.lag;
        options.scheme = o.scheme;
        if let Some(p) = &o.probe {
            options.probe = p.clone();
        }
        options.order = o.order;
        options.record_every = o.record_every;
        options.record_points = o.record_points.clone();
        options.snapshot_every = o.snapshot_every;
        let sim = Simulation {
            params: self.model,
            reaction: self.reaction,
            noise,
            initial: self.initial.data(),
            grid: self.grid,
            dt: self.time.dt,
            n_steps: self.time.steps,
            n_paths: self.paths.paths,
            seed: self.paths.seed,
            options,
        };
        sim.validate()?;
        Ok(sim)
    }

    /// Blow-up time predicted by the renewal lower bound, `∞` for runs
    /// expected to stay finite, `None` when no prediction applies.
    pub fn prediction(&self) -> Option<f64> {
        if self.renewal_prediction.is_some() {
            return self.renewal_prediction;
        }
        let kappa = match self.initial {
            InitialConfig::Constant { value } if value > 0.0 => Some(value),
            _ => None,
        };
        match (self.reaction.sigma, self.reaction.drift) {
            (Sigma::PowerLaw { gamma }, Drift::None) if self.noise == NoiseConfig::White => {
                let p = self.model;
                let rp =
                    RenewalProblem::new(kappa? * kappa?, cstar(&p).ok()?, gamma, p.theta()).ok()?;
                if rp.is_subcritical() {
                    blowup_time_unbounded(&rp, UnboundedVariant::Constant).ok()
                } else {
                    blowup_time_unbounded_reduced(&rp, UnboundedVariant::Constant).ok()
                }
            }
            (Sigma::Zero, Drift::PowerLaw { eta }) => blowup_time_drift(kappa?, eta).ok(),
            (_, Drift::None) if !matches!(self.reaction.sigma, Sigma::PowerLaw { .. }) => {
                Some(f64::INFINITY)
            }
            _ => None,
        }
    }
}

/// SHA-256 of the canonical TOML serialization, hex encoded.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let text = toml::to_string(config).map_err(|e| Error::Config(e.to_string()))?;
    Ok(hex(&Sha256::digest(text.as_bytes())))
}

#[derive(Serialize)]
struct CommandRecord<'a, T, R> {
    schema_version: &'a str,
    config_hash: String,
    command: &'a str,
    config: &'a T,
    #[serde(skip_serializing_if = "Option::is_none")]
    results: Option<&'a R>,
}

/// Run record of a non-simulation command: its resolved arguments plus
/// schema version and hash, and optionally a results table.
pub fn command_record<T: Serialize, R: Serialize>(
    command: &str,
    config: &T,
    results: Option<&R>,
) -> Result<String> {
    let rec = CommandRecord {
        schema_version: SCHEMA_VERSION,
        config_hash: config_hash(config)?,
        command,
        config,
        results,
    };
    toml::to_string(&rec).map_err(|e| Error::Config(e.to_string()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn digest_series(series: &[&[f64]]) -> String {
    let mut h = Sha256::new();
    for s in series {
        for v in *s {
            h.update(v.to_le_bytes());
        }
    }
    hex(&h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub final_time: f64,
    /// moment estimate (stochastic runs) or probe value (deterministic runs)
    pub final_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_stderr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exploded_at: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renewal_prediction: Option<f64>,
    pub verdict: String,
    /// SHA-256 of the raw bits of every output series
    pub output_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cstar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: String,
    pub config_hash: String,
    pub mode: String,
    pub config: SimConfig,
    pub results: RunSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
    pub constants: Constants,
}

impl RunRecord {
    fn new(
        cfg: &SimConfig,
        mode: &str,
        results: RunSummary,
        diagnostics: Option<Diagnostics>,
    ) -> Result<Self> {
        Ok(RunRecord {
            schema_version: SCHEMA_VERSION.into(),
            config_hash: cfg.hash()?,
            mode: mode.into(),
            config: cfg.clone(),
            results,
            diagnostics,
            constants: Constants {
                cstar: cstar(&cfg.model).ok(),
            },
        })
    }

    pub fn from_simulation(cfg: &SimConfig, out: &SimulationOutput) -> Result<Self> {
        let ms = &out.moments;
        let last = ms.times.len() - 1;
        let prediction = cfg.prediction();
        let verdict = match prediction.and_then(|p| detect_explosion(ms, p)) {
            Some(v) => v.line(),
            None => match ms.exploded_at {
                Some(t) => format!("EXPLODED at t={t} (no renewal prediction)"),
                None => format!("NO EXPLOSION up to t={}", ms.times[last]),
            },
        };
        let results = RunSummary {
            final_time: ms.times[last],
            final_value: ms.estimates[last],
            final_stderr: Some(ms.stderr[last]),
            exploded_at: ms.exploded_at,
            renewal_prediction: prediction,
            verdict,
            output_digest: digest_series(&[&ms.times, &ms.estimates, &ms.stderr, &ms.mean]),
        };
        RunRecord::new(cfg, "stochastic", results, Some(out.diagnostics.clone()))
    }

    pub fn from_deterministic(cfg: &SimConfig, run: &DeterministicRun) -> Result<Self> {
        let last = run.times.len() - 1;
        let prediction = cfg.prediction();
        let verdict = match run.exploded_at {
            Some(t) => format!("EXPLODED at t={t}"),
            None => format!("NO EXPLOSION up to t={}", run.horizon),
        };
        let results = RunSummary {
            final_time: run.times[last],
            final_value: run.probe[last],
            final_stderr: None,
            exploded_at: run.exploded_at,
            renewal_prediction: prediction,
            verdict,
            output_digest: digest_series(&[&run.times, &run.sup_norm, &run.probe]),
        };
        RunRecord::new(cfg, "deterministic", results, None)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}
