//! Dilation of a non-Hermitian two-level Hamiltonian into a Hermitian
//! system ⊗ ancilla Hamiltonian, its Trotterization, pulse compilation and
//! ancilla-conditioned readout.
//!
//! The ancilla frame is `a_j = R_x(π/2)|j⟩`, in which `σ_z a₀ = i a₁`. The dilated
//! state is `ψ ⊗ a₀ + ηψ ⊗ a₁`, so after `R_x(−π/2)` the ancilla-`|0⟩` branch carries
//! the non-unitarily evolved system state.

pub mod metric;
pub mod pulses;
pub mod readout;
pub mod schedule;
pub mod trotter;

use serde::{Deserialize, Serialize};

pub use metric::{auto_eta0, metric_eta, MetricState};
pub use pulses::{compile_pulses, parse_program, write_program, PulseProgram, PulseSlice};
pub use readout::{apply_readout_rotation, dephase, project_readout};
pub use schedule::{dilated_schedule, DilatedSchedule, PauliCoefficients};
pub use trotter::{initial_dilated_state, trotter_evolve, DilatedState, Integrator};

use crate::band::ComplexField;
use crate::dynamics::{SeriesSource, TextureSeries};
use crate::error::{Error, Result};
use crate::linalg::Vec2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationConfig {
    /// `None` selects η₀ by [`auto_eta0`].
    pub eta0: Option<f64>,
    pub horizon: f64,
    pub slices: usize,
    pub integrator: Integrator,
}

impl Default for DilationConfig {
    fn default() -> Self {
        Self { eta0: None, horizon: 3.0, slices: 1000, integrator: Integrator::Trotter }
    }
}

impl DilationConfig {
    pub fn tau(&self) -> f64 {
        self.horizon / self.slices as f64
    }

    pub fn resolve_eta0(&self, h: &ComplexField) -> Result<f64> {
        match self.eta0 {
            Some(e) => Ok(e),
            None => auto_eta0(h, self.horizon, 2 * self.slices + 1, metric::AUTO_ETA0_FLOOR),
        }
    }

    pub fn schedule(&self, h: &ComplexField) -> Result<DilatedSchedule> {
        if self.slices == 0 || !(self.horizon > 0.0) {
            return Err(Error::InvalidInput("dilation needs a positive horizon and slice count".into()));
        }
        dilated_schedule(h, self.resolve_eta0(h)?, self.tau(), self.slices)
    }
}

/// Ancilla-conditioned textures at `t = 0` and after every `record_every` slices.
pub fn dilated_texture_series(
    schedule: &DilatedSchedule,
    psi0: &Vec2,
    integrator: Integrator,
    record_every: usize,
) -> Result<TextureSeries> {
    if record_every == 0 {
        return Err(Error::InvalidInput("record interval must be positive".into()));
    }
    let start = initial_dilated_state(psi0, schedule.eta0)?;
    let states = trotter::evolve_schedule(schedule, &start, integrator)?;
    let mut times = vec![0.0];
    let mut textures = vec![readout::projected_texture(&apply_readout_rotation(&start))?];
    for (m, psi) in states.iter().enumerate() {
        if (m + 1) % record_every == 0 {
            times.push(schedule.time_after(m));
            textures.push(readout::projected_texture(&apply_readout_rotation(psi))?);
        }
    }
    Ok(TextureSeries {
        times,
        sx: textures.iter().map(|s| s[0]).collect(),
        sy: textures.iter().map(|s| s[1]).collect(),
        sz: Some(textures.iter().map(|s| s[2]).collect()),
        k: schedule.k,
        source: SeriesSource::Dilated,
    })
}
