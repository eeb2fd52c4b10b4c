use serde::{Deserialize, Serialize};

use super::metric::{metric_at, MetricState, POSITIVITY_MARGIN};
use crate::band::{eigensystem, ComplexField, EigenSystem};
use crate::error::{Error, Result};
use crate::linalg::{anti_hermitian_residue, hermitian_part, inverse2, kron, pauli, pauli_coefficients, sylvester_symmetric, Mat2, Mat4, C64, I};

pub const HERMITICITY_TOLERANCE: f64 = 1e-6;

/// Pauli coefficients of `H_sa = Σ_α λ_α σ_α⊗I + Σ_α γ_α σ_α⊗σ_z`,
/// indexed 0: identity, 1: x, 2: y, 3: z. System qubit first.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PauliCoefficients {
    pub lambda: [f64; 4],
    pub gamma: [f64; 4],
}

impl PauliCoefficients {
    pub fn from_blocks(lambda: &Mat2, gamma: &Mat2) -> Self {
        Self { lambda: pauli_coefficients(lambda), gamma: pauli_coefficients(gamma) }
    }

    pub fn lambda_matrix(&self) -> Mat2 {
        (0..4).map(|a| pauli(a) * C64::from(self.lambda[a])).sum()
    }

    pub fn gamma_matrix(&self) -> Mat2 {
        (0..4).map(|a| pauli(a) * C64::from(self.gamma[a])).sum()
    }

    /// The 4x4 dilated Hamiltonian.
    pub fn to_matrix(&self) -> Mat4 {
        kron(&self.lambda_matrix(), &Mat2::identity()) + kron(&self.gamma_matrix(), &pauli(3))
    }

    pub fn is_finite(&self) -> bool {
        self.lambda.iter().chain(self.gamma.iter()).all(|x| x.is_finite())
    }
}

/// Raw `Λ`, `Γ` blocks before Hermitization, with the metric used.
#[derive(Clone, Copy, Debug)]
pub struct GeneratorBlocks {
    pub lambda: Mat2,
    pub gamma: Mat2,
    pub metric: MetricState,
}

impl GeneratorBlocks {
    pub fn residue(&self) -> f64 {
        anti_hermitian_residue(&self.lambda).max(anti_hermitian_residue(&self.gamma))
    }
}

/// `Λ = {H + [iη' + ηH]η} M⁻¹` and `Γ = i[Hη − ηH − iη'] M⁻¹` with `η'` from
/// a centered difference of step `dt`.
pub fn generator_blocks(es: &EigenSystem, h: &ComplexField, eta0: f64, t: f64) -> Result<GeneratorBlocks> {
    let here = metric_at(es, eta0, t, POSITIVITY_MARGIN)?;
    let hm = h.matrix();
    let eta = here.eta;
    // dM/dt = -i (H^dag M - M H), then eta eta' + eta' eta = dM/dt
    let m_dot = (hm.adjoint() * here.metric - here.metric * hm) * (-I);
    let eta_dot = sylvester_symmetric(&eta, &m_dot)
        .ok_or_else(|| Error::InvalidInput(format!("singular metric derivative at t = {t}")))?;
    let m_inv = inverse2(&(Mat2::identity() + eta * eta));
    let lambda = (hm + (eta_dot * I + eta * hm) * eta) * m_inv;
    let gamma = (hm * eta - eta * hm - eta_dot * I) * m_inv * I;
    Ok(GeneratorBlocks { lambda, gamma, metric: here })
}

/// Hermitized Pauli coefficients at time `t`; `NonHermitianResidual` when the raw
/// blocks carry an anti-Hermitian part above tolerance.
pub fn generator_at(es: &EigenSystem, h: &ComplexField, eta0: f64, t: f64) -> Result<PauliCoefficients> {
    let blocks = generator_blocks(es, h, eta0, t)?;
    let residue = blocks.residue();
    if !(residue <= HERMITICITY_TOLERANCE) {
        return Err(Error::NonHermitianResidual { t, residue });
    }
    let out = PauliCoefficients::from_blocks(&hermitian_part(&blocks.lambda), &hermitian_part(&blocks.gamma));
    if !out.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite generator at t = {t}")));
    }
    Ok(out)
}

/// Piecewise-constant dilated Hamiltonian over `[0, tau·n)`, one entry per slice,
/// evaluated at slice midpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilatedSchedule {
    pub tau: f64,
    pub eta0: f64,
    pub k: Option<f64>,
    pub slices: Vec<PauliCoefficients>,
}

impl DilatedSchedule {
    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.tau * self.slices.len() as f64
    }

    /// End time of slice `m`.
    pub fn time_after(&self, m: usize) -> f64 {
        self.tau * (m + 1) as f64
    }
}

pub fn dilated_schedule(h: &ComplexField, eta0: f64, tau: f64, n_slices: usize) -> Result<DilatedSchedule> {
    if !(tau > 0.0 && tau.is_finite()) || n_slices == 0 {
        return Err(Error::InvalidInput("schedule needs tau > 0 and at least one slice".into()));
    }
    if !(eta0 > 0.0 && eta0.is_finite()) {
        return Err(Error::InvalidInput(format!("eta0 must be positive, got {eta0}")));
    }
    let es = eigensystem(h)?;
    for j in 0..=2 * n_slices {
        metric_at(&es, eta0, 0.5 * tau * j as f64, POSITIVITY_MARGIN)?;
    }
    let slices = (0..n_slices)
        .map(|m| generator_at(&es, h, eta0, (m as f64 + 0.5) * tau))
        .collect::<Result<Vec<_>>>()?;
    Ok(DilatedSchedule { tau, eta0, k: None, slices })
}
