use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::schedule::{DilatedSchedule, PauliCoefficients};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_exp4, kron, pauli, pauli_string_exp, rx, ry, su2_rotation, Mat2, Mat4, Vec2, Vec4, C64, I};

/// System ⊗ ancilla amplitudes; index `2·s + a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DilatedState {
    pub amplitudes: Vec4,
}

impl DilatedState {
    pub fn new(amplitudes: Vec4) -> Result<Self> {
        if !(amplitudes.norm() > 0.0) {
            return Err(Error::InvalidInput("dilated state must be nonzero".into()));
        }
        Ok(Self { amplitudes })
    }

    pub fn product(system: &Vec2, ancilla: &Vec2) -> Self {
        let mut amplitudes = Vec4::zeros();
        for s in 0..2 {
            for a in 0..2 {
                amplitudes[2 * s + a] = system[s] * ancilla[a];
            }
        }
        Self { amplitudes }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn apply(&self, u: &Mat4) -> Self {
        Self { amplitudes: u * self.amplitudes }
    }
}

/// Ancilla preparation `R_x(π/2) R_y(2 arctan η₀)|0⟩ = (a₀ + η₀ a₁)/√(1+η₀²)`
/// with `a_j = R_x(π/2)|j⟩`.
pub fn ancilla_preparation(eta0: f64, noise: [f64; 2]) -> Mat2 {
    rx(FRAC_PI_2 * noise[0]) * ry(2.0 * eta0.atan() * noise[1])
}

/// `ψ₀ ⊗ (a₀ + η₀ a₁)` normalized, i.e. `ψ ⊗ a₀ + η(0)ψ ⊗ a₁`.
pub fn initial_dilated_state(psi0: &Vec2, eta0: f64) -> Result<DilatedState> {
    let n = psi0.norm();
    if !(n > 0.0) {
        return Err(Error::InvalidInput("initial system state must be nonzero".into()));
    }
    let ancilla = ancilla_preparation(eta0, [1.0, 1.0]) * Vec2::new(C64::from(1.0), C64::from(0.0));
    Ok(DilatedState::product(&(psi0 / C64::from(n)), &ancilla))
}

/// Factor order of the slice product: `U₁ U₂ U₃ U₄ U₅`, `U₅` acting first.
/// `U₁ = e^{-iτ(λ_x σ_x + λ_y σ_y)⊗I}`, `U₂ = e^{-iτ(λ_z σ_z⊗I + γ_0 I⊗σ_z)}`,
/// `U₃ = e^{-iτγ_x σ_xσ_z}`, `U₄ = e^{-iτγ_y σ_yσ_z}`, `U₅ = e^{-iτγ_z σ_zσ_z}`,
/// times the global phase `e^{-iτλ_0}`.
pub fn slice_unitary(c: &PauliCoefficients, tau: f64) -> Mat4 {
    let (l, g) = (&c.lambda, &c.gamma);
    let r = l[1].hypot(l[2]);
    let u1 = if r > 0.0 {
        kron(&su2_rotation(tau * r, [l[1] / r, l[2] / r, 0.0]), &Mat2::identity())
    } else {
        Mat4::identity()
    };
    let u2 = kron(&su2_rotation(tau * l[3], [0.0, 0.0, 1.0]), &su2_rotation(tau * g[0], [0.0, 0.0, 1.0]));
    let z = pauli(3);
    let u3 = pauli_string_exp(tau * g[1], &kron(&pauli(1), &z));
    let u4 = pauli_string_exp(tau * g[2], &kron(&pauli(2), &z));
    let u5 = pauli_string_exp(tau * g[3], &kron(&z, &z));
    u1 * u2 * u3 * u4 * u5 * (-I * tau * l[0]).exp()
}

/// `exp(-iτ H_sa)` without splitting.
pub fn exact_slice_unitary(c: &PauliCoefficients, tau: f64) -> Mat4 {
    hermitian_exp4(&c.to_matrix(), tau)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Trotter,
    Exact,
}

pub fn step_unitary(c: &PauliCoefficients, tau: f64, integrator: Integrator) -> Mat4 {
    match integrator {
        Integrator::Trotter => slice_unitary(c, tau),
        Integrator::Exact => exact_slice_unitary(c, tau),
    }
}

/// State after every slice.
pub fn evolve_schedule(schedule: &DilatedSchedule, psi0: &DilatedState, integrator: Integrator) -> Result<Vec<DilatedState>> {
    if schedule.is_empty() {
        return Err(Error::InvalidInput("empty schedule".into()));
    }
    let mut psi = *psi0;
    Ok(schedule
        .slices
        .iter()
        .map(|c| {
            psi = psi.apply(&step_unitary(c, schedule.tau, integrator));
            psi
        })
        .collect())
}

pub fn trotter_evolve(schedule: &DilatedSchedule, psi0: &DilatedState) -> Result<Vec<DilatedState>> {
    evolve_schedule(schedule, psi0, Integrator::Trotter)
}
