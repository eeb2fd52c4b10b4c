use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::config::NoiseDistribution;
use crate::dilation::pulses::{CircuitNoise, PulseSlice};
use crate::error::{Error, Result};

/// Independent draw streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum NoiseDomain {
    Pulse = 0,
    Preparation = 1,
    Readout = 2,
}

/// One unit draw, a pure function of `(seed, domain, index, field)`.
pub fn unit_draw(seed: u64, domain: NoiseDomain, index: u64, field: u64, dist: NoiseDistribution) -> f64 {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    key[16..24].copy_from_slice(&field.to_le_bytes());
    key[24] = domain as u8;
    let mut rng = ChaCha8Rng::from_seed(key);
    match dist {
        NoiseDistribution::Gaussian => rng.sample(StandardNormal),
        NoiseDistribution::Uniform => rng.random_range(-1.0..=1.0),
    }
}

fn factor(level: f64, seed: u64, domain: NoiseDomain, index: u64, field: u64, dist: NoiseDistribution) -> f64 {
    if level == 0.0 {
        1.0
    } else {
        1.0 + level * unit_draw(seed, domain, index, field, dist)
    }
}

/// Scale each amplitude `B1`, `B2`, `B3` by `1 + level·g`; durations are untouched.
pub fn inject_pulse_noise(pulses: &[PulseSlice], level: f64, seed: u64, dist: NoiseDistribution) -> Result<Vec<PulseSlice>> {
    if !(level >= 0.0 && level.is_finite()) {
        return Err(Error::InvalidInput(format!("noise level must be non-negative, got {level}")));
    }
    Ok(pulses
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let f = |field| factor(level, seed, NoiseDomain::Pulse, i as u64, field, dist);
            PulseSlice { b1: p.b1 * f(0), b2: p.b2 * f(1), b3: p.b3 * f(2), ..*p }
        })
        .collect())
}

/// Miscalibration of the ancilla preparation pulses and of each readout pulse.
pub fn circuit_noise(samples: usize, level: f64, seed: u64, dist: NoiseDistribution) -> CircuitNoise {
    CircuitNoise {
        preparation: [0, 1].map(|field| factor(level, seed, NoiseDomain::Preparation, 0, field, dist)),
        readout: (0..samples).map(|i| factor(level, seed, NoiseDomain::Readout, i as u64, 0, dist)).collect(),
    }
}

/// Per-k seed so that scan rows do not share draws.
pub fn k_seed(seed: u64, k_index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k_index as u64 + 1);
    rng.random()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RmsSource {
    /// Simulation with pulse noise (experiment-like).
    Noisy,
    Clean,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RmsReport {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub source: RmsSource,
    pub samples: usize,
}

/// `√(Σ (m_i − t_i)² / N)`.
pub fn rms_error(measured: &[f64], theory: &[f64]) -> Result<f64> {
    if measured.len() != theory.len() {
        return Err(Error::LengthMismatch { left: measured.len(), right: theory.len() });
    }
    if measured.is_empty() {
        return Err(Error::InvalidInput("rms of an empty series".into()));
    }
    let sum: f64 = measured.iter().zip(theory).map(|(m, t)| (m - t).powi(2)).sum();
    Ok((sum / measured.len() as f64).sqrt())
}
