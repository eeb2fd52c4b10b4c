use std::f64::consts::FRAC_PI_2;

use super::trotter::DilatedState;
use crate::band::Axis;
use crate::error::{Error, Result};
use crate::linalg::{kron, pauli, rx, spin_texture, Mat2, Mat4, Vec2, C64};

pub const EMPTY_PROJECTION: f64 = 1e-12;

/// `I ⊗ R_x(−π/2·scale)`: maps the ancilla frame `a_j` back to `|j⟩` when `scale = 1`.
pub fn readout_rotation(scale: f64) -> Mat4 {
    kron(&Mat2::identity(), &rx(-FRAC_PI_2 * scale))
}

pub fn apply_readout_rotation(psi: &DilatedState) -> DilatedState {
    psi.apply(&readout_rotation(1.0))
}

/// System amplitudes on the ancilla-`|0⟩` branch and their weight.
pub fn ancilla_zero_branch(psi: &DilatedState) -> (Vec2, f64) {
    let v = Vec2::new(psi.amplitudes[0], psi.amplitudes[2]);
    let w = v.norm_squared();
    (v, w)
}

/// `⟨σ_α ⊗ |0⟩⟨0|⟩ / ⟨I ⊗ |0⟩⟨0|⟩` of an already rotated state.
pub fn project_readout(psi: &DilatedState, axis: Axis) -> Result<f64> {
    Ok(projected_texture(psi)?[axis.index()])
}

pub fn projected_texture(psi: &DilatedState) -> Result<[f64; 3]> {
    let (v, w) = ancilla_zero_branch(psi);
    let total = psi.amplitudes.norm_squared();
    if !(w >= EMPTY_PROJECTION * total) || w == 0.0 {
        return Err(Error::EmptyProjection { weight: w / total.max(f64::MIN_POSITIVE) });
    }
    Ok(spin_texture(&v))
}

pub fn density(psi: &DilatedState) -> Mat4 {
    psi.amplitudes * psi.amplitudes.adjoint()
}

/// Zero the computational-basis coherences.
pub fn dephase(rho: &Mat4) -> Mat4 {
    Mat4::from_diagonal(&rho.diagonal())
}

/// Normalized system texture of `ρ` conditioned on ancilla `|0⟩`.
pub fn density_texture(rho: &Mat4) -> Result<[f64; 3]> {
    let block = Mat2::new(rho[(0, 0)], rho[(0, 2)], rho[(2, 0)], rho[(2, 2)]);
    let w = block.trace().re;
    let total = rho.trace().re;
    if !(w >= EMPTY_PROJECTION * total) || w <= 0.0 {
        return Err(Error::EmptyProjection { weight: w / total.max(f64::MIN_POSITIVE) });
    }
    let mut out = [0.0; 3];
    for (a, o) in out.iter_mut().enumerate() {
        *o = ((pauli(a + 1) * block).trace() / C64::from(w)).re;
    }
    Ok(out)
}
