use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::band::ModelParams;
use crate::dilation::pulses::DEFAULT_COUPLING_HZ;
use crate::dilation::Integrator;
use crate::error::{Error, Result};
use crate::linalg::{Vec2, C64};

/// How the per-k azimuths and energies are produced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Closed-form eigensystem.
    #[default]
    Exact,
    /// Trotterized dilated simulation, then fit.
    Fit,
    /// Compiled pulse program with ideal pulses (density-matrix circuit), then fit.
    Dilated,
    /// Compiled pulse program with miscalibrated pulses, then fit.
    Noisy,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NoiseDistribution {
    /// `1 + level·g`, `g` standard normal.
    #[default]
    Gaussian,
    /// `1 + level·u`, `u` uniform on `[−1, 1]`.
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub level: f64,
    pub distribution: NoiseDistribution,
    /// Also miscalibrate the ancilla preparation and readout rotations.
    pub circuit_pulses: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { level: 0.0, distribution: NoiseDistribution::Gaussian, circuit_pulses: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub csv: String,
    pub summary: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, csv: "scan.csv".into(), summary: "summary.json".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelParams,
    pub mode: Mode,
    pub k_points: usize,
    pub winding_grid: usize,
    pub horizon: f64,
    pub samples: usize,
    /// `None` picks η₀ per k by doubling search.
    pub eta0: Option<f64>,
    /// Trotter slices over the horizon (rounded up to a multiple of `samples − 1`).
    pub slices: usize,
    pub integrator: Integrator,
    pub coupling_hz: f64,
    pub noise: NoiseConfig,
    pub seed: Option<u64>,
    pub restarts: usize,
    /// Initial system state as `[[re, im], [re, im]]`.
    pub initial_state: [[f64; 2]; 2],
    pub output: OutputConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::experimental(1.0),
            mode: Mode::Exact,
            k_points: 25,
            winding_grid: crate::topology::DEFAULT_GRID,
            horizon: 3.0,
            samples: 30,
            eta0: None,
            slices: 1000,
            integrator: Integrator::Trotter,
            coupling_hz: DEFAULT_COUPLING_HZ,
            noise: NoiseConfig::default(),
            seed: None,
            restarts: 8,
            initial_state: [[1.0, 0.0], [0.0, 0.0]],
            output: OutputConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.model.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.k_points < 3 {
            return bad(format!("k_points must be at least 3, got {}", self.k_points));
        }
        if self.winding_grid < 8 {
            return bad(format!("winding_grid must be at least 8, got {}", self.winding_grid));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.samples < crate::extraction::fit::MIN_SAMPLES {
            return bad(format!("samples must be at least {}, got {}", crate::extraction::fit::MIN_SAMPLES, self.samples));
        }
        if self.slices == 0 {
            return bad("slices must be positive".into());
        }
        if let Some(e) = self.eta0 {
            if !(e > 0.0 && e.is_finite()) {
                return bad(format!("eta0 must be positive, got {e}"));
            }
        }
        if !(self.coupling_hz != 0.0 && self.coupling_hz.is_finite()) {
            return bad(format!("coupling_hz must be nonzero, got {}", self.coupling_hz));
        }
        if !(self.noise.level >= 0.0 && self.noise.level.is_finite()) {
            return bad(format!("noise level must be non-negative, got {}", self.noise.level));
        }
        if self.noise.level > 0.0 && self.seed.is_none() {
            return bad("a seed is required when noise level > 0".into());
        }
        if self.restarts == 0 {
            return bad("restarts must be positive".into());
        }
        if self.initial_state.iter().flatten().any(|x| !x.is_finite()) || self.psi0().norm() == 0.0 {
            return bad("initial_state must be finite and nonzero".into());
        }
        Ok(())
    }

    pub fn psi0(&self) -> Vec2 {
        let [a, b] = self.initial_state;
        Vec2::new(C64::new(a[0], a[1]), C64::new(b[0], b[1]))
    }

    /// Slices between consecutive samples.
    pub fn slices_per_sample(&self) -> usize {
        self.slices.div_ceil(self.samples - 1)
    }

    pub fn total_slices(&self) -> usize {
        self.slices_per_sample() * (self.samples - 1)
    }

    pub fn sample_times(&self) -> Vec<f64> {
        (0..self.samples).map(|i| self.horizon * i as f64 / (self.samples - 1) as f64).collect()
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
