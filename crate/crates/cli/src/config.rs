//! Run configuration (TOML).
//!
//! Every key is optional; missing keys take the reference values below. Unknown
//! keys are rejected.
//!
//! ```toml
//! seed = 0                      # corpus, noise and random forcing seed
//!
//! [grid]
//! n = 128                       # power of two
//! length = 6.283185307179586    # box side L
//!
//! [model]
//! alpha = 0.8                   # 2/3 < alpha < 1
//! p = 4.0                       # 2/(2 alpha - 1) < r <= p < 4/alpha
//! q = 2.0                       # 1 <= q < inf
//! r = 4.0
//! sigma = 0.4                   # alpha - 2/p < sigma < 2/p, default alpha/2
//! period = 1.0                  # T
//!
//! [forcing]
//! amplitude = 1e-3              # delta
//! temporal = "cosine"           # "cosine" | "constant" | "table"
//! phase = 0.0                   # cosine phase
//! table = []                    # values at i T / m, linearly interpolated
//! # spatial profile: a sum of sin(k . x + phase) terms,
//! # default sin x1 + cos 2 x2
//! modes = [{ m = [1, 0] }, { m = [0, 2], phase = 1.5707963267948966 }]
//! # or random = { gamma = 2.0 } for a seeded |k|^-gamma field
//!
//! [iteration]
//! max_iter = 40
//! tol_b = 1e-9
//! cutoff_offset = 4             # iterate n+1 uses S_{n + offset}
//! start = "theta0.sqgf"         # optional restart datum
//! start_noise = 0.0             # relative noise added to the restart datum
//!
//! [stepper]
//! dt = 1e-3
//! store_every = 1
//!
//! [output]
//! dir = "run"                   # overridden by --out
//! snapshot_every = 50           # every k-th stored sample, plus the last
//!
//! [evolve]
//! periods = 1.0                 # integration length in units of T
//!
//! [probes]
//! n = 64
//! select = ["semigroup_decay", "smoothing", "positivity", "bilinear", "commutator", "product_semigroup"]
//! ceilings = { bilinear = 3.3 }  # overrides of the built-in ceilings
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sqg_core::dynamics::StepperConfig;
use sqg_core::fixpoint::IterationConfig;
use sqg_core::periodic::{PeriodicForcing, Temporal};
use sqg_core::{corpus, Field, Grid};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub grid: GridSection,
    pub model: ModelSection,
    pub forcing: ForcingSection,
    pub iteration: IterationSection,
    pub stepper: StepperSection,
    pub output: OutputSection,
    pub evolve: EvolveSection,
    pub probes: ProbeSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub sigma: Option<f64>,
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub m: [i64; 2],
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomProfile {
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemporalKind {
    Cosine,
    Constant,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForcingSection {
    pub amplitude: f64,
    pub temporal: TemporalKind,
    pub phase: f64,
    pub table: Vec<f64>,
    pub modes: Vec<Mode>,
    pub random: Option<RandomProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterationSection {
    pub max_iter: usize,
    pub tol_b: f64,
    pub cutoff_offset: i32,
    pub start: Option<PathBuf>,
    pub start_noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepperSection {
    pub dt: f64,
    pub store_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSection {
    pub periods: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub n: usize,
    pub select: Vec<String>,
    pub ceilings: BTreeMap<String, f64>,
}

pub const PROBES: [&str; 6] = [
    "semigroup_decay",
    "smoothing",
    "positivity",
    "bilinear",
    "commutator",
    "product_semigroup",
];

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 128, length: 2.0 * PI }
    }
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            p: 4.0,
            q: 2.0,
            r: 4.0,
            sigma: None,
            period: 1.0,
        }
    }
}

impl Default for ForcingSection {
    fn default() -> Self {
        Self {
            amplitude: 1e-3,
            temporal: TemporalKind::Cosine,
            phase: 0.0,
            table: Vec::new(),
            modes: vec![
                Mode { m: [1, 0], amplitude: 1.0, phase: 0.0 },
                Mode { m: [0, 2], amplitude: 1.0, phase: PI / 2.0 },
            ],
            random: None,
        }
    }
}

impl Default for IterationSection {
    fn default() -> Self {
        Self {
            max_iter: 40,
            tol_b: 1e-9,
            cutoff_offset: 4,
            start: None,
            start_noise: 0.0,
        }
    }
}

impl Default for StepperSection {
    fn default() -> Self {
        Self { dt: 1e-3, store_every: 1 }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("run"),
            snapshot_every: 50,
        }
    }
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self { periods: 1.0 }
    }
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self {
            n: 64,
            select: PROBES.iter().map(|s| s.to_string()).collect(),
            ceilings: BTreeMap::new(),
        }
    }
}

/// A configuration together with the text it was read from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub source: String,
}

impl LoadedConfig {
    pub fn from_str(source: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(source).map_err(|e| CliError::Config(e.message().to_string()))?;
        Ok(Self {
            config,
            source: source.to_string(),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_str(&text)
    }

    /// Reference configuration, with its canonical TOML as the source text.
    pub fn reference() -> Self {
        let config = RunConfig::default();
        let source = toml::to_string(&config).expect("config serializes");
        Self { config, source }
    }

    /// Git-style content hash: SHA-256 of `"blob <len>\0" + text`.
    pub fn hash(&self) -> String {
        content_hash(self.source.as_bytes())
    }
}

pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl RunConfig {
    /// All checks that do not need a computation, naming the violated
    /// constraint.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        self.iteration_config()?;
        self.grid()?;
        let f = &self.forcing;
        if !f.amplitude.is_finite() || f.amplitude < 0.0 {
            return fail(format!("forcing.amplitude≥0 violated ({})", f.amplitude));
        }
        if f.temporal == TemporalKind::Table && f.table.is_empty() {
            return fail("forcing.table non-empty violated for temporal = \"table\"".into());
        }
        if f.random.is_none() && f.modes.is_empty() {
            return fail("forcing needs modes or a random profile".into());
        }
        if f.random.is_some() && f.modes != ForcingSection::default().modes && !f.modes.is_empty() {
            return fail("forcing.modes and forcing.random are exclusive".into());
        }
        for m in &f.modes {
            let limit = (self.grid.n / 3) as i64;
            if m.m[0].abs() > limit || m.m[1].abs() > limit {
                return fail(format!("forcing mode {:?} outside the dealiased range |m|≤{limit}", m.m));
            }
        }
        if self.output.snapshot_every == 0 {
            return fail("output.snapshot_every≥1 violated".into());
        }
        if !(self.evolve.periods > 0.0) {
            return fail(format!("evolve.periods>0 violated ({})", self.evolve.periods));
        }
        if !(self.iteration.start_noise >= 0.0) {
            return fail(format!("iteration.start_noise≥0 violated ({})", self.iteration.start_noise));
        }
        for name in &self.probes.select {
            if !PROBES.contains(&name.as_str()) {
                return fail(format!("unknown probe \"{name}\""));
            }
        }
        for name in self.probes.ceilings.keys() {
            if !PROBES.contains(&name.as_str()) {
                return fail(format!("ceiling for unknown probe \"{name}\""));
            }
        }
        Grid::new(self.probes.n, 2.0 * PI).map_err(|e| CliError::Config(format!("probes.n: {e}")))?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.length).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn stepper(&self) -> Result<StepperConfig> {
        StepperConfig::new(self.stepper.dt, self.stepper.store_every).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn iteration_config(&self) -> Result<IterationConfig> {
        let m = &self.model;
        let cfg = IterationConfig {
            alpha: m.alpha,
            p: m.p,
            q: m.q,
            r: m.r,
            sigma: m.sigma.unwrap_or(m.alpha / 2.0),
            period: m.period,
            max_iter: self.iteration.max_iter,
            tol_b: self.iteration.tol_b,
            cutoff_offset: self.iteration.cutoff_offset,
            stepper: self.stepper()?,
        };
        cfg.validate().map_err(|e| match e {
            sqg_core::Error::Config(msg) => CliError::Config(msg),
            other => CliError::Config(other.to_string()),
        })?;
        Ok(cfg)
    }

    pub fn temporal(&self) -> Temporal {
        match self.forcing.temporal {
            TemporalKind::Cosine => Temporal::Cosine { phase: self.forcing.phase },
            TemporalKind::Constant => Temporal::Constant,
            TemporalKind::Table => Temporal::Table(self.forcing.table.clone()),
        }
    }

    pub fn spatial_profile(&self, grid: &Grid) -> Field {
        if let Some(random) = &self.forcing.random {
            return corpus::smooth_field(grid, random.gamma, self.seed);
        }
        let mut acc = Field::zeros(grid);
        for m in &self.forcing.modes {
            let term = corpus::single_mode(grid, m.m[0], m.m[1], m.amplitude, m.phase);
            acc = acc.add(&term).expect("same grid");
        }
        acc
    }

    pub fn forcing(&self) -> Result<PeriodicForcing> {
        let grid = self.grid()?;
        PeriodicForcing::new(
            self.model.period,
            self.spatial_profile(&grid),
            self.temporal(),
            self.forcing.amplitude,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn ceiling(&self, probe: &str, default: f64) -> f64 {
        self.probes.ceilings.get(probe).copied().unwrap_or(default)
    }
}
