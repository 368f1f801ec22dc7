//! Configuration schema. JSON with a versioned `schema` field; unknown keys
//! are rejected everywhere. Sequences come as polynomial coefficient
//! arrays, constants, or explicit tables.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use ladderkit::{
    build_example1, build_explicit, build_geometric, build_hypergeometric, classical_preset,
    ChainSpec, ChainTolerances, ClassicalFamily, Example1Params, ExplicitParams, FaultTarget,
    GeometricParams, Grid, HypergeometricParams, SequenceSpec,
};

pub const SCHEMA: &str = "ladderkit/v1";

/// Error that must surface as exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub a: i64,
    pub b: i64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    Charlier {
        mu: f64,
    },
    Meixner {
        beta: f64,
        c: f64,
    },
    Kravchuk {
        p: f64,
    },
    Hahn {
        alpha: f64,
        beta: f64,
    },
    Hypergeometric {
        alpha: [f64; 3],
        b_origin: f64,
        c_origin: f64,
        g_diff: f64,
    },
    Example1 {
        alpha: [f64; 3],
        f0: SequenceSpec,
        c0: SequenceSpec,
        f_origin: f64,
        g0_origin: f64,
        g1_origin: f64,
    },
    Geometric {
        gamma: Vec<f64>,
        alpha: Vec<f64>,
        f0: SequenceSpec,
        c0: SequenceSpec,
        b0: SequenceSpec,
        #[serde(default)]
        r0: Option<Vec<f64>>,
    },
    Explicit {
        z: SequenceSpec,
        w: SequenceSpec,
        v: SequenceSpec,
    },
}

impl FamilyConfig {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyConfig::Charlier { .. } => "charlier",
            FamilyConfig::Meixner { .. } => "meixner",
            FamilyConfig::Kravchuk { .. } => "kravchuk",
            FamilyConfig::Hahn { .. } => "hahn",
            FamilyConfig::Hypergeometric { .. } => "hypergeometric",
            FamilyConfig::Example1 { .. } => "example1",
            FamilyConfig::Geometric { .. } => "geometric",
            FamilyConfig::Explicit { .. } => "explicit",
        }
    }

    /// Families whose chains carry the polynomial generators.
    pub fn supports_polynomials(&self) -> bool {
        matches!(
            self,
            FamilyConfig::Charlier { .. }
                | FamilyConfig::Meixner { .. }
                | FamilyConfig::Kravchuk { .. }
                | FamilyConfig::Hahn { .. }
                | FamilyConfig::Hypergeometric { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectConfig {
    pub target: FaultTarget,
    pub level: usize,
    pub index: i64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub format: OutputFormat,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

fn default_trials() -> usize {
    50
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub schema: String,
    pub grid: GridConfig,
    pub levels: usize,
    pub family: FamilyConfig,
    #[serde(default)]
    pub tolerances: ChainTolerances,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub rng_seed: u64,
    #[serde(default)]
    pub normalize_weight: bool,
    #[serde(default)]
    pub inject: Option<InjectConfig>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

impl ChainConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let config: ChainConfig = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("invalid config {}: {e}", path.display())))?;
        if config.schema != SCHEMA {
            return Err(ConfigError(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                config.schema
            )));
        }
        Ok(config)
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        Grid::new(self.grid.a, self.grid.b).map_err(|e| ConfigError(e.to_string()))
    }

    /// Builds the configured chain. Precondition and validation failures
    /// map to configuration errors.
    pub fn build_chain(&self) -> Result<ChainSpec, ConfigError> {
        let grid = self.grid()?;
        let tol = self.tolerances;
        let err = |e: ladderkit::Error| ConfigError(e.to_string());
        let chain = match &self.family {
            FamilyConfig::Charlier { mu } => {
                let p = classical_preset(ClassicalFamily::Charlier { mu: *mu }, grid, self.levels)
                    .map_err(err)?;
                build_hypergeometric(&p, tol).map_err(err)?
            }
            FamilyConfig::Meixner { beta, c } => {
                let p = classical_preset(
                    ClassicalFamily::Meixner { beta: *beta, c: *c },
                    grid,
                    self.levels,
                )
                .map_err(err)?;
                build_hypergeometric(&p, tol).map_err(err)?
            }
            FamilyConfig::Kravchuk { p } => {
                let p = classical_preset(ClassicalFamily::Kravchuk { p: *p }, grid, self.levels)
                    .map_err(err)?;
                build_hypergeometric(&p, tol).map_err(err)?
            }
            FamilyConfig::Hahn { alpha, beta } => {
                let p = classical_preset(
                    ClassicalFamily::Hahn {
                        alpha: *alpha,
                        beta: *beta,
                    },
                    grid,
                    self.levels,
                )
                .map_err(err)?;
                build_hypergeometric(&p, tol).map_err(err)?
            }
            FamilyConfig::Hypergeometric {
                alpha,
                b_origin,
                c_origin,
                g_diff,
            } => build_hypergeometric(
                &HypergeometricParams {
                    alpha: *alpha,
                    b_origin: *b_origin,
                    c_origin: *c_origin,
                    g_diff: *g_diff,
                    grid,
                    levels: self.levels,
                },
                tol,
            )
            .map_err(err)?,
            FamilyConfig::Example1 {
                alpha,
                f0,
                c0,
                f_origin,
                g0_origin,
                g1_origin,
            } => {
                let (chain, _) = build_example1(
                    &Example1Params {
                        alpha: *alpha,
                        f0: f0.clone(),
                        c0: c0.clone(),
                        f_origin: *f_origin,
                        g0_origin: *g0_origin,
                        g1_origin: *g1_origin,
                        grid,
                        levels: self.levels,
                    },
                    tol,
                )
                .map_err(err)?;
                chain
            }
            FamilyConfig::Geometric {
                gamma,
                alpha,
                f0,
                c0,
                b0,
                r0,
            } => {
                if gamma.len() != self.levels {
                    return Err(ConfigError(format!(
                        "geometric family needs {} gamma entries for levels = {}, got {}",
                        self.levels,
                        self.levels,
                        gamma.len()
                    )));
                }
                let (chain, _) = build_geometric(
                    &GeometricParams {
                        gamma: gamma.clone(),
                        alpha: alpha.clone(),
                        f0: f0.clone(),
                        c0: c0.clone(),
                        b0: b0.clone(),
                        r0: r0.clone(),
                        grid,
                    },
                    tol,
                )
                .map_err(err)?;
                chain
            }
            FamilyConfig::Explicit { z, w, v } => build_explicit(
                &ExplicitParams {
                    z: z.clone(),
                    w: w.clone(),
                    v: v.clone(),
                    grid,
                    levels: self.levels,
                },
                tol,
            )
            .map_err(err)?,
        };
        Ok(chain)
    }

    /// Builds the chain and applies any configured fault.
    pub fn build_with_fault(&self) -> Result<ChainSpec, ConfigError> {
        let mut chain = self.build_chain()?;
        if let Some(inject) = &self.inject {
            chain
                .inject_fault(inject.target, inject.level, inject.index, inject.delta)
                .map_err(|e| ConfigError(e.to_string()))?;
        }
        Ok(chain)
    }
}
