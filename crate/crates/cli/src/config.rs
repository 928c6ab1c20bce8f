//! TOML run configuration. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use pssmp::{Direction, Family, LevyModel, PathConfig, PredictionProblem};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Brownian,
    CramerLundberg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub family: FamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default)]
    pub q: f64,
    pub alpha: f64,
    pub direction: Direction,
}

impl ProblemSpec {
    pub fn from_problem(p: &PredictionProblem) -> Self {
        let q = p.model.killing_rate();
        let (alpha, direction) = (p.alpha, p.direction);
        match p.model.family() {
            Family::BrownianDrift { sigma, mu } => Self {
                family: FamilyName::Brownian,
                sigma: Some(sigma),
                mu: Some(mu),
                d: None,
                lambda: None,
                rho: None,
                q,
                alpha,
                direction,
            },
            Family::CramerLundberg {
                d,
                jump_rate,
                jump_mean_inv,
            } => Self {
                family: FamilyName::CramerLundberg,
                sigma: None,
                mu: None,
                d: Some(d),
                lambda: Some(jump_rate),
                rho: Some(jump_mean_inv),
                q,
                alpha,
                direction,
            },
        }
    }

    pub fn build(&self) -> CliResult<PredictionProblem> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| CliError::Config(format!("problem.{name} is required for this family")))
        };
        let forbid = |v: Option<f64>, name: &str| match v {
            Some(_) => Err(CliError::Config(format!("problem.{name} does not apply to this family"))),
            None => Ok(()),
        };
        let model = match self.family {
            FamilyName::Brownian => {
                forbid(self.d, "d")?;
                forbid(self.lambda, "lambda")?;
                forbid(self.rho, "rho")?;
                LevyModel::brownian(need(self.sigma, "sigma")?, need(self.mu, "mu")?, self.q)?
            }
            FamilyName::CramerLundberg => {
                forbid(self.sigma, "sigma")?;
                forbid(self.mu, "mu")?;
                LevyModel::cramer_lundberg(
                    need(self.d, "d")?,
                    need(self.lambda, "lambda")?,
                    need(self.rho, "rho")?,
                    self.q,
                )?
            }
        };
        Ok(PredictionProblem::new(model, self.alpha, self.direction)?)
    }
}

/// Points `(x, s)` for the maximum or `(x, i)` for the minimum.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Thresholds `K`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    /// Thresholds as multiples of the optimal one; ignored when `grid` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    /// Threshold `K`; defaults to the optimal one.
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub big_k: Option<f64>,
    /// Per-path CSV dump.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub ungated: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemSpec>,
    #[serde(default)]
    pub value: ValueSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub simulate: SimulateSpec,
    #[serde(default)]
    pub mc: McSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Replace a preset name by its parameters so the resolved config
    /// describes the run on its own.
    pub fn resolve_problem(&mut self) -> CliResult<Option<PredictionProblem>> {
        match (&self.preset, &self.problem) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "give either a preset or a [problem] table, not both".into(),
            )),
            (Some(name), None) => {
                let p = pssmp::preset(name)?;
                self.problem = Some(ProblemSpec::from_problem(&p));
                Ok(Some(p))
            }
            (None, Some(spec)) => Ok(Some(spec.build()?)),
            (None, None) => Ok(None),
        }
    }

    pub fn path_config(&self, defaults: PathConfig) -> CliResult<PathConfig> {
        let mc = &self.mc;
        let cfg = PathConfig {
            dt: mc.dt.unwrap_or(defaults.dt),
            horizon: mc.horizon.or(defaults.horizon),
            n_paths: mc.paths.unwrap_or(defaults.n_paths),
            seed: mc.seed.unwrap_or(defaults.seed),
            x0: mc.x0.unwrap_or(defaults.x0),
            threads: mc.threads.or(defaults.threads),
            ungated: mc.ungated,
            ..defaults
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// SHA-256 of the canonical JSON form. Settings that cannot change the
    /// numbers (output destination, worker count) are left out.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut canonical = self.clone();
        canonical.output = OutputSpec::default();
        canonical.mc.threads = None;
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
