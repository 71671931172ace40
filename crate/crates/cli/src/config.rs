//! Scenario files: one JSON document per scenario.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use ghostspin_core::interference::TwoSlitConfig;
use ghostspin_core::spinor_field::definition::FieldDefinition;
use ghostspin_core::spinor_field::SampleGrid;

/// Description of the shadow-phase generator, echoed in reports.
pub const PHASE_GENERATOR: &str =
    "ChaCha8Rng::seed_from_u64(seed); per shadow: c1 ~ U[-pi, pi), c2 = c1 + U[-pi/3, pi/3]";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldDefinition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twoslit: Option<TwoSlitSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn kappa(&self) -> Result<f64> {
        match self.kappa {
            Some(k) if k > 0.0 && k.is_finite() => Ok(k),
            Some(k) => bail!("kappa must be positive and finite, got {k}"),
            None => bail!("config has no `kappa`"),
        }
    }

    pub fn field(&self) -> Result<&FieldDefinition> {
        self.field.as_ref().context("config has no `field` section")
    }

    pub fn grid(&self) -> Result<SampleGrid> {
        self.grid
            .as_ref()
            .context("config has no `grid` section")?
            .build()
    }

    pub fn twoslit(&self) -> Result<&TwoSlitSection> {
        self.twoslit
            .as_ref()
            .context("config has no `twoslit` section")
    }
}

/// A scalar used on all four axes, or one value per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<T> {
    All(T),
    Each([T; 4]),
}

impl<T: Copy> PerAxis<T> {
    pub fn expand(&self) -> [T; 4] {
        match *self {
            PerAxis::All(v) => [v; 4],
            PerAxis::Each(v) => v,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lo: PerAxis<f64>,
    pub hi: PerAxis<f64>,
    pub samples: PerAxis<usize>,
}

impl GridConfig {
    pub fn build(&self) -> Result<SampleGrid> {
        Ok(SampleGrid::new(
            self.lo.expand(),
            self.hi.expand(),
            self.samples.expand(),
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Twoslit,
    Ghostreal,
}

fn default_samples() -> usize {
    2001
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSlitSection {
    #[serde(default)]
    pub mode: Mode,
    /// Slit geometry and phases (two-slit mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slits: Option<TwoSlitConfig>,
    /// Shadow count; phases come from `slits.shadow_phases` when that list is
    /// long enough, otherwise from the seeded generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Screen range (`x` in two-slit mode, `x3` in ghost/real mode).
    pub range: [f64; 2],
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Divide every shadow factor by its maximum over the range.
    #[serde(default)]
    pub normalize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    /// Defaults to the value where `8 e^{2 kappa x2} = 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x2: Option<f64>,
    /// Shadow counts for `sweep-shadows`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_values: Vec<usize>,
}

impl TwoSlitSection {
    pub fn slits(&self) -> Result<&TwoSlitConfig> {
        self.slits
            .as_ref()
            .context("twoslit section has no `slits`")
    }

    /// Slit configuration with exactly `n` shadow phases.
    pub fn with_shadows(&self, n: usize) -> Result<(TwoSlitConfig, PhaseSource)> {
        let mut cfg = self.slits()?.clone();
        let explicit = cfg.shadow_phases.len();
        let source = if explicit >= n && explicit > 0 {
            cfg.shadow_phases.truncate(n);
            PhaseSource::Explicit
        } else if explicit == 0 {
            cfg.shadow_phases = generate_shadow_phases(n, self.seed);
            PhaseSource::Generated {
                seed: self.seed,
                generator: PHASE_GENERATOR.into(),
            }
        } else {
            bail!("slits.shadow_phases has {explicit} entries but n = {n}");
        };
        Ok((cfg, source))
    }

    /// Shadow count for `interfere`: override, then `n`, then the explicit list.
    pub fn resolve_n(&self, n_override: Option<usize>) -> Result<usize> {
        Ok(n_override
            .or(self.n)
            .unwrap_or(self.slits()?.shadow_phases.len()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum PhaseSource {
    Explicit,
    Generated { seed: u64, generator: String },
}

/// Deterministic shadow phases. Draws are sequential, so the first `k`
/// entries do not depend on `n`. The phase difference of each pair stays
/// within `±π/3`, which keeps every shadow factor single-humped.
pub fn generate_shadow_phases(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let c1 = rng.gen_range(-PI..PI);
            let delta = rng.gen_range(-PI / 3.0..=PI / 3.0);
            [c1, c1 + delta]
        })
        .collect()
}
