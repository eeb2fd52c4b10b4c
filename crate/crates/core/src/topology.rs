//! Winding numbers over the Brillouin zone: the per-band `w_μ`, the eigenstate
//! invariant `w_t = w₊ + w₋`, and the energy winding `ν_E`.
//!
//! `w_μ` is a trapezoidal quadrature on the uniform periodic grid. `w_t` and
//! `ν_E` are computed by unwrapping a sampled angle around the closed loop and
//! dividing the total increment by π (resp. 2π).

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::band::{principal_sqrt, re_phi_yx, Band, ComplexField, ModelParams, EP_THRESHOLD};
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Default number of k samples for winding integrals.
pub const DEFAULT_GRID: usize = 721;
/// Residual below which a winding number is reported as rounded.
pub const ROUNDING_TOLERANCE: f64 = 1e-2;

/// Uniform periodic grid `k_j = −π + 2πj/n`, `j = 0..n`; `k = π` is identified with `−π`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KGrid {
    n: usize,
}

impl KGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidInput(format!("k grid needs at least 8 points, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn k(&self, j: usize) -> f64 {
        -PI + self.spacing() * j as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.k(j)).collect()
    }
}

impl Default for KGrid {
    fn default() -> Self {
        Self { n: DEFAULT_GRID }
    }
}

/// An integer invariant together with the unrounded value it came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantized {
    pub value: i64,
    pub raw: f64,
    pub residual: f64,
    /// `false` when the residual exceeded [`ROUNDING_TOLERANCE`]; `value` is then only the nearest integer.
    pub rounded: bool,
}

impl Quantized {
    pub fn from_raw(raw: f64) -> Self {
        let value = raw.round();
        let residual = (raw - value).abs();
        Self { value: value as i64, raw, residual, rounded: residual < ROUNDING_TOLERANCE }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingReport {
    /// `None` when the bands exchange around the loop (odd `ν_E`), so no single-band branch closes.
    pub w_plus: Option<f64>,
    pub w_minus: Option<f64>,
    pub w_t: Quantized,
    pub nu_e: Quantized,
    pub grid: KGrid,
}

/// A field sampled on a grid together with `∂_k h`.
pub trait BlochField: Sync {
    fn sample(&self, grid: &KGrid) -> Result<Vec<(ComplexField, ComplexField)>>;
}

impl BlochField for ModelParams {
    fn sample(&self, grid: &KGrid) -> Result<Vec<(ComplexField, ComplexField)>> {
        Ok(grid
            .points()
            .into_par_iter()
            .map(|k| (self.field(k), self.field_derivative(k)))
            .collect())
    }
}

/// A field given only as values on the grid; derivatives by periodic central differences.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedField {
    pub values: Vec<ComplexField>,
}

impl BlochField for TabulatedField {
    fn sample(&self, grid: &KGrid) -> Result<Vec<(ComplexField, ComplexField)>> {
        let n = self.values.len();
        if n != grid.len() {
            return Err(Error::LengthMismatch { left: n, right: grid.len() });
        }
        let inv = 1.0 / (2.0 * grid.spacing());
        Ok((0..n)
            .map(|j| {
                let a = &self.values[(j + 1) % n];
                let b = &self.values[(j + n - 1) % n];
                let d = ComplexField::new((a.hx - b.hx) * inv, (a.hy - b.hy) * inv, (a.hz - b.hz) * inv);
                (self.values[j], d)
            })
            .collect())
    }
}

/// Continue `E₊(k)` from the principal root at `k = −π` by nearest-value tracking.
///
/// Fails when the two candidate roots are nearly equidistant from the previous
/// value, or when the continued branch does not close on itself around the loop
/// (odd energy winding swaps the bands).
pub fn track_energy(fields: &[ComplexField], grid: &KGrid) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(fields.len());
    let mut prev: Option<C64> = None;
    for (j, h) in fields.iter().enumerate() {
        let e2 = h.energy_squared();
        if e2.norm() < EP_THRESHOLD {
            return Err(Error::ExceptionalPoint { magnitude: e2.norm(), threshold: EP_THRESHOLD });
        }
        let (root, _) = principal_sqrt(e2);
        let e = match prev {
            None => root,
            Some(p) => {
                let (near, far) = if (root - p).norm() <= (root + p).norm() { (root, -root) } else { (-root, root) };
                let (dn, df) = ((near - p).norm(), (far - p).norm());
                if dn > 0.5 * df {
                    return Err(Error::BandTrackingLost {
                        k: grid.k(j),
                        reason: format!("jump {dn:.3e} vs alternative {df:.3e}"),
                    });
                }
                near
            }
        };
        out.push(e);
        prev = Some(e);
    }
    let first = out[0];
    let last = *out.last().unwrap();
    if (first - last).norm() > (first + last).norm() {
        return Err(Error::BandTrackingLost { k: PI, reason: "branch does not close around the loop".into() });
    }
    Ok(out)
}

/// Per-band winding `w_μ = (1/2π) ∮ (hx ∂hy − hy ∂hx) / (E_μ (E_μ − hz)) dk`.
pub fn winding_w_mu(field: &dyn BlochField, band: Band, grid: &KGrid) -> Result<f64> {
    let samples = field.sample(grid)?;
    let fields: Vec<ComplexField> = samples.iter().map(|s| s.0).collect();
    let energies = track_energy(&fields, grid)?;
    let sum: C64 = samples
        .iter()
        .zip(energies.iter())
        .map(|((h, d), e_plus)| {
            let e = e_plus * band.sign();
            (h.hx * d.hy - h.hy * d.hx) / (e * (e - h.hz))
        })
        .sum();
    Ok((sum * grid.spacing() / TAU).re)
}

/// Unwrap a sampled closed loop of angles defined modulo `period`, returning the
/// total increment including the closing segment from the last sample back to the first.
pub fn loop_increment(angles: &[f64], period: f64, max_jump: f64) -> Result<f64> {
    let n = angles.len();
    let mut total = 0.0;
    for j in 0..n {
        let next = angles[(j + 1) % n];
        let raw = next - angles[j];
        let jump = raw - period * (raw / period).round();
        if jump.abs() > max_jump {
            return Err(Error::UnwrapAmbiguous { index: j, jump, limit: max_jump });
        }
        total += jump;
    }
    Ok(total)
}

/// `w_t = (1/π) ∮ ∂_k Re φ_yx dk`.
pub fn winding_w_t(field: &dyn BlochField, grid: &KGrid) -> Result<Quantized> {
    let samples = field.sample(grid)?;
    let phi = samples.iter().map(|(h, _)| re_phi_yx(h)).collect::<Result<Vec<_>>>()?;
    let inc = loop_increment(&phi, PI, FRAC_PI_4)?;
    Ok(Quantized::from_raw(inc / PI))
}

/// Largest adjacent jump accepted when resolving an angle defined modulo `period`.
pub fn series_jump_limit(period: f64) -> f64 {
    FRAC_PI_4.min(0.45 * period)
}

/// Winding from measured `(k, angle)` samples whose angles carry an unknown
/// `n·period` offset each (for the assembled azimuth, `period = π/2`).
///
/// Each offset is resolved by continuation from the previous sample; the
/// constant offset drops out of the loop integral.
pub fn winding_from_phi_series(samples: &[(f64, f64)], period: f64) -> Result<Quantized> {
    check_series(samples)?;
    let angles: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let inc = loop_increment(&angles, period, series_jump_limit(period))?;
    Ok(Quantized::from_raw(inc / PI))
}

/// `ν_E` from sampled complex energies `(k, E)`; uses `arg E²` so the band label is irrelevant.
pub fn winding_from_energy_series(samples: &[(f64, C64)]) -> Result<Quantized> {
    let ks: Vec<(f64, f64)> = samples.iter().map(|s| (s.0, 0.0)).collect();
    check_series(&ks)?;
    let args: Vec<f64> = samples.iter().map(|s| (s.1 * s.1).arg()).collect();
    let inc = loop_increment(&args, TAU, FRAC_PI_4)?;
    Ok(Quantized::from_raw(inc / TAU))
}

fn check_series(samples: &[(f64, f64)]) -> Result<()> {
    if samples.len() < 3 {
        return Err(Error::InvalidInput("series needs at least 3 samples".into()));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidInput("k must be strictly increasing".into()));
    }
    let span = samples.last().unwrap().0 - samples[0].0;
    if span >= TAU {
        return Err(Error::InvalidInput("samples must lie within one period of k".into()));
    }
    Ok(())
}

/// `ν_E = (1/2π) ∮ ∂_k arg E²(k) dk`.
pub fn winding_nu_e(field: &dyn BlochField, grid: &KGrid) -> Result<Quantized> {
    let samples = field.sample(grid)?;
    let mut args = Vec::with_capacity(samples.len());
    for (h, _) in &samples {
        let e2 = h.energy_squared();
        if e2.norm() < EP_THRESHOLD {
            return Err(Error::ExceptionalPoint { magnitude: e2.norm(), threshold: EP_THRESHOLD });
        }
        args.push(e2.arg());
    }
    let inc = loop_increment(&args, TAU, FRAC_PI_4)?;
    Ok(Quantized::from_raw(inc / TAU))
}

/// All invariants on one grid.
pub fn winding_report(field: &dyn BlochField, grid: &KGrid) -> Result<WindingReport> {
    let per_band = |band| match winding_w_mu(field, band, grid) {
        Ok(w) => Ok(Some(w)),
        Err(Error::BandTrackingLost { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    Ok(WindingReport {
        w_plus: per_band(Band::Plus)?,
        w_minus: per_band(Band::Minus)?,
        w_t: winding_w_t(field, grid)?,
        nu_e: winding_nu_e(field, grid)?,
        grid: *grid,
    })
}
