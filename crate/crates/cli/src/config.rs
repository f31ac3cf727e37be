//! Run configuration files.

use std::fmt;
use std::path::{Path, PathBuf};

use crawlerlab_core::ode::Tolerances;
use crawlerlab_core::params::DEFAULT_EPS;
use crawlerlab_core::simulate::DEFAULT_SKIP;
use crawlerlab_core::{DimensionalParams, Groups};
use serde::de::DeserializeOwned;
use serde::Deserialize;

/// Problem with the configuration itself; reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Parameter block given inline or as a path to a JSON file, resolved
/// relative to the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Inline(T),
    File(PathBuf),
}

impl<T: DeserializeOwned> Source<T> {
    fn resolve(self, base: &Path) -> anyhow::Result<T> {
        match self {
            Source::Inline(v) => Ok(v),
            Source::File(p) => {
                let path = base.join(p);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateOptions {
    /// Initial `(V, v_com, s, v_s)`; defaults to a seeded perturbation of `x_+`.
    pub x0: Option<[f64; 4]>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Transient discarded before cycle metrics; defaults to the core
    /// default, capped at `t_end / 2`.
    pub skip: Option<f64>,
    /// Resampling interval for the trajectory CSV; accepted steps if absent.
    pub sample_dt: Option<f64>,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        SimulateOptions { x0: None, t_end: default_t_end(), skip: None, sample_dt: None }
    }
}

impl SimulateOptions {
    pub fn skip(&self) -> f64 {
        self.skip.unwrap_or_else(|| default_skip(self.t_end))
    }
}

fn default_skip(t_end: f64) -> f64 {
    DEFAULT_SKIP.min(0.5 * t_end)
}

fn default_t_end() -> f64 {
    200.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HbOptions {
    /// Relay output level; read off the critical manifold if absent.
    #[serde(rename = "M")]
    pub m: Option<f64>,
    #[serde(default = "default_z_min")]
    pub z_min: f64,
    #[serde(default = "default_z_max")]
    pub z_max: f64,
    #[serde(default = "default_z_steps")]
    pub z_steps: usize,
    /// Horizon of the relay simulation compared with the optimum; skipped if absent.
    pub t_end: Option<f64>,
}

impl Default for HbOptions {
    fn default() -> Self {
        HbOptions { m: None, z_min: default_z_min(), z_max: default_z_max(), z_steps: default_z_steps(), t_end: None }
    }
}

fn default_z_min() -> f64 {
    0.05
}

fn default_z_max() -> f64 {
    1.0
}

fn default_z_steps() -> usize {
    20
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    /// Group name as spelled in the groups block.
    pub name: String,
    pub min: f64,
    pub max: f64,
    /// Number of grid points, endpoints included; zero gives an empty sweep.
    pub steps: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.steps)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOptions {
    pub axes: Vec<Axis>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    pub skip: Option<f64>,
}

impl SweepOptions {
    pub fn skip(&self) -> f64 {
        self.skip.unwrap_or_else(|| default_skip(self.t_end))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    groups: Option<Source<Groups>>,
    dimensional: Option<Source<DimensionalParams>>,
    eps: Option<f64>,
    simulate: Option<SimulateOptions>,
    hb: Option<HbOptions>,
    sweep: Option<SweepOptions>,
    tolerances: Option<Tolerances>,
    out: Option<PathBuf>,
    #[serde(default)]
    seed: u64,
}

/// Validated configuration with the parameters resolved to groups.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub groups: Groups,
    pub simulate: SimulateOptions,
    pub hb: HbOptions,
    pub sweep: Option<SweepOptions>,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e.downcast::<ConfigError>() {
            Ok(c) => config_error(format!("{}: {c}", path.display())),
            Err(e) => e,
        })
    }

    pub fn parse(text: &str, base: &Path) -> anyhow::Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| config_error(e.to_string()))?;
        let eps = raw.eps.unwrap_or(DEFAULT_EPS);
        let groups = match (raw.groups, raw.dimensional) {
            (Some(g), None) => {
                let g = g.resolve(base)?;
                g.validate().map_err(|e| config_error(e.to_string()))?;
                g
            }
            (None, Some(p)) => crawlerlab_core::params::nondimensionalize(&p.resolve(base)?, eps)
                .map_err(|e| config_error(e.to_string()))?,
            _ => return Err(config_error("exactly one of `groups` and `dimensional` must be given")),
        };
        let simulate = raw.simulate.unwrap_or_default();
        positive("simulate.t_end", simulate.t_end)?;
        if let Some(dt) = simulate.sample_dt {
            positive("simulate.sample_dt", dt)?;
        }
        let hb = raw.hb.unwrap_or_default();
        if !(hb.z_min > 0.0 && hb.z_min <= hb.z_max && hb.z_max <= 1.0) {
            return Err(config_error(format!("hb Z range must satisfy 0 < z_min <= z_max <= 1, got [{}, {}]", hb.z_min, hb.z_max)));
        }
        if let Some(sw) = &raw.sweep {
            positive("sweep.t_end", sw.t_end)?;
            for a in &sw.axes {
                if groups.get(&a.name).is_none() {
                    return Err(config_error(format!("sweep axis `{}` is not a group name", a.name)));
                }
                if !(a.min.is_finite() && a.max.is_finite() && a.min <= a.max) {
                    return Err(config_error(format!("sweep axis `{}` has invalid range [{}, {}]", a.name, a.min, a.max)));
                }
            }
        }
        Ok(RunConfig {
            groups,
            simulate,
            hb,
            sweep: raw.sweep,
            tolerances: raw.tolerances.unwrap_or_default(),
            out: raw.out,
            seed: raw.seed,
        })
    }
}

fn positive(name: &str, x: f64) -> anyhow::Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(config_error(format!("`{name}` must be positive, got {x}")))
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| if k == n - 1 { b } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect(),
    }
}
