//! Exact non-unitary two-level dynamics by spectral decomposition, normalized
//! spin-texture time series, and long-time-averaged azimuths.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::band::{eigensystem, Band, ComplexField, EigenSystem};
use crate::error::{Error, Result};
use crate::linalg::{spin_texture, wrap_angle, Vec2, C64, I};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Right,
    Left,
}

/// An unnormalized two-component state.
///
/// Right states are kets evolving under `H`. Left states are the kets
/// `|ψ^L⟩ = Σ_μ c_μ |φ^L_μ⟩`, carried along with the same band phases
/// `e^{-iE_μ t}` as their right partners, so that `⟨ψ^L(t)| = Σ c*_μ e^{iE*_μ t}⟨φ^L_μ|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateVec {
    pub amplitudes: Vec2,
    pub side: Side,
}

impl StateVec {
    pub fn new(amplitudes: Vec2, side: Side) -> Result<Self> {
        if amplitudes.norm() == 0.0 || !amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidInput("state must be finite and nonzero".into()));
        }
        Ok(Self { amplitudes, side })
    }

    pub fn right(a: C64, b: C64) -> Result<Self> {
        Self::new(Vec2::new(a, b), Side::Right)
    }

    pub fn texture(&self) -> [f64; 3] {
        spin_texture(&self.amplitudes)
    }
}

/// Band weights `c_±` of an initial state `Σ c_μ |φ^R_μ⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialWeights {
    pub plus: C64,
    pub minus: C64,
}

impl InitialWeights {
    pub fn new(plus: C64, minus: C64) -> Self {
        Self { plus, minus }
    }

    /// `ratio : 1`, with the larger weight on the band with the larger `Im E`
    /// (the band that dominates at long times); ties go to `+`.
    pub fn dominant(es: &EigenSystem, ratio: f64) -> Self {
        if es.energy_plus.im >= 0.0 {
            Self::new(C64::from(ratio), C64::from(1.0))
        } else {
            Self::new(C64::from(1.0), C64::from(ratio))
        }
    }

    pub fn get(&self, band: Band) -> C64 {
        match band {
            Band::Plus => self.plus,
            Band::Minus => self.minus,
        }
    }

    pub fn both_nonzero(&self) -> bool {
        self.plus.norm() > 0.0 && self.minus.norm() > 0.0
    }

    /// The state with these weights on the given side.
    pub fn state(&self, es: &EigenSystem, side: Side) -> StateVec {
        let amplitudes = match side {
            Side::Right => es.right(Band::Plus) * self.plus + es.right(Band::Minus) * self.minus,
            Side::Left => es.left_ket(Band::Plus) * self.plus + es.left_ket(Band::Minus) * self.minus,
        };
        StateVec { amplitudes, side }
    }
}

/// Band weights of a state in its own side's eigenbasis.
pub fn weights_of(es: &EigenSystem, psi: &StateVec) -> InitialWeights {
    match psi.side {
        Side::Right => {
            let c = es.coefficients(&psi.amplitudes);
            InitialWeights::new(c[0], c[1])
        }
        Side::Left => {
            // ⟨φ^R_μ|φ^L_ν⟩ = δ_μν
            let c0 = es.right(Band::Plus).dotc(&psi.amplitudes);
            let c1 = es.right(Band::Minus).dotc(&psi.amplitudes);
            InitialWeights::new(c0, c1)
        }
    }
}

fn evolve_with(es: &EigenSystem, side: Side, w: &InitialWeights, t: f64) -> Vec2 {
    evolve_rescaled(es, side, w, t, 0.0)
}

/// Evolution times `e^{-growth·t}`; textures are unaffected and long horizons stay finite.
fn evolve_rescaled(es: &EigenSystem, side: Side, w: &InitialWeights, t: f64, growth: f64) -> Vec2 {
    let mut out = Vec2::zeros();
    for band in Band::BOTH {
        let phase = (-I * es.energy(band) * t - growth * t).exp() * w.get(band);
        let basis = match side {
            Side::Right => *es.right(band),
            Side::Left => es.left_ket(band),
        };
        out += basis * phase;
    }
    out
}

/// Exact evolution of `psi0` to time `t ≥ 0`.
pub fn evolve_state(h: &ComplexField, psi0: &StateVec, t: f64) -> Result<StateVec> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(*psi0);
    }
    let es = eigensystem(h)?;
    let w = weights_of(&es, psi0);
    Ok(StateVec { amplitudes: evolve_with(&es, psi0.side, &w, t), side: psi0.side })
}

/// Schrödinger evolution under `H†`: `e^{-iH†t}|ψ⟩`.
///
/// Paired with a right state under `H`, the overlap `⟨ψ^L(t)|ψ^R(t)⟩` is conserved.
pub fn evolve_adjoint(h: &ComplexField, ket: &Vec2, t: f64) -> Result<Vec2> {
    let es = eigensystem(h)?;
    let mut out = Vec2::zeros();
    for band in Band::BOTH {
        let c = es.right(band).dotc(ket);
        out += es.left_ket(band) * ((-I * es.energy(band).conj() * t).exp() * c);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesSource {
    Exact,
    Dilated,
    Noisy,
}

/// Normalized spin textures sampled in time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextureSeries {
    pub times: Vec<f64>,
    pub sx: Vec<f64>,
    pub sy: Vec<f64>,
    pub sz: Option<Vec<f64>>,
    pub k: Option<f64>,
    pub source: SeriesSource,
}

impl TextureSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        for len in [self.sx.len(), self.sy.len()] {
            if len != n {
                return Err(Error::LengthMismatch { left: n, right: len });
            }
        }
        if let Some(sz) = &self.sz {
            if sz.len() != n {
                return Err(Error::LengthMismatch { left: n, right: sz.len() });
            }
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("times must be strictly increasing".into()));
        }
        Ok(())
    }
}

pub fn texture_series(h: &ComplexField, psi0: &StateVec, times: &[f64]) -> Result<TextureSeries> {
    let es = eigensystem(h)?;
    let w = weights_of(&es, psi0);
    let growth = es.energy_plus.im.abs();
    let (mut sx, mut sy, mut sz) = (vec![], vec![], vec![]);
    for &t in times {
        let v = if t == 0.0 { psi0.amplitudes } else { evolve_rescaled(&es, psi0.side, &w, t, growth) };
        let s = spin_texture(&v);
        sx.push(s[0]);
        sy.push(s[1]);
        sz.push(s[2]);
    }
    let series = TextureSeries {
        times: times.to_vec(),
        sx,
        sy,
        sz: Some(sz),
        k: None,
        source: SeriesSource::Exact,
    };
    series.validate()?;
    Ok(series)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongTimeConfig {
    /// Averaging horizon; `None` uses `horizon_factor / gap`.
    pub horizon: Option<f64>,
    pub horizon_factor: f64,
    /// Allowed angle drift between the `[0, T]` and `[0, T/2]` averages.
    pub tol: f64,
    /// Samples per fastest beat period `2π / (2|Re E|)`.
    pub points_per_period: usize,
    pub min_points: usize,
    /// Raise `NotConverged` instead of only flagging it.
    pub strict: bool,
}

impl Default for LongTimeConfig {
    fn default() -> Self {
        Self { horizon: None, horizon_factor: 200.0, tol: 1e-3, points_per_period: 40, min_points: 1000, strict: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongTimeAverage {
    /// `atan2(⟨σ_y⟩‾, ⟨σ_x⟩‾)` in (−π, π].
    pub angle: f64,
    pub mean_sx: f64,
    pub mean_sy: f64,
    pub horizon: f64,
    /// Angle difference between the full and half-horizon averages.
    pub drift: f64,
    pub converged: bool,
}

/// `gap = max(|Re(E₊ − E₋)|, |Im(E₊ − E₋)|)`.
pub fn spectral_gap(es: &EigenSystem) -> f64 {
    let d = es.energy_plus * 2.0;
    d.re.abs().max(d.im.abs())
}

/// Long-time average of the normalized texture of `Σ c_μ e^{-iE_μ t}|φ^β_μ⟩`.
pub fn long_time_phi(
    h: &ComplexField,
    weights: &InitialWeights,
    side: Side,
    cfg: &LongTimeConfig,
) -> Result<LongTimeAverage> {
    if !weights.both_nonzero() {
        return Err(Error::InvalidInput("both band weights must be nonzero".into()));
    }
    let es = eigensystem(h)?;
    let horizon = match cfg.horizon {
        Some(t) if t > 0.0 => t,
        Some(t) => return Err(Error::InvalidInput(format!("horizon must be positive, got {t}"))),
        None => cfg.horizon_factor / spectral_gap(&es),
    };
    let re_e = es.energy_plus.re.abs();
    let beat_period = if re_e > 0.0 { PI / re_e } else { f64::INFINITY };
    let by_period = (cfg.points_per_period as f64 * horizon / beat_period).ceil();
    let mut intervals = (by_period as usize).max(cfg.min_points);
    if intervals % 2 == 1 {
        intervals += 1;
    }
    let dt = horizon / intervals as f64;
    let half = intervals / 2;
    let growth = es.energy_plus.im.abs();

    // trapezoid over [0, T] and [0, T/2] from one sweep
    let (mut sum_x, mut sum_y, mut half_x, mut half_y) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..=intervals {
        let v = evolve_rescaled(&es, side, weights, dt * i as f64, growth);
        let s = spin_texture(&v);
        let wgt = if i == 0 || i == intervals { 0.5 } else { 1.0 };
        sum_x += wgt * s[0];
        sum_y += wgt * s[1];
        if i <= half {
            let hw = if i == 0 || i == half { 0.5 } else { 1.0 };
            half_x += hw * s[0];
            half_y += hw * s[1];
        }
    }
    let mean_sx = sum_x * dt / horizon;
    let mean_sy = sum_y * dt / horizon;
    if mean_sx.abs() < 1e-9 && mean_sy.abs() < 1e-9 {
        return Err(Error::DegenerateAverage);
    }
    let angle = mean_sy.atan2(mean_sx);
    let half_angle = half_y.atan2(half_x);
    let drift = wrap_angle(angle - half_angle).abs();
    let converged = drift <= cfg.tol;
    if cfg.strict && !converged {
        return Err(Error::NotConverged(format!("long-time average drift {drift:.3e} > {:.1e}", cfg.tol)));
    }
    Ok(LongTimeAverage { angle, mean_sx, mean_sy, horizon, drift, converged })
}

/// `(φ^{RR} + φ^{LL}) / 2`, defined modulo π/2.
pub fn long_time_re_phi(h: &ComplexField, weights: &InitialWeights, cfg: &LongTimeConfig) -> Result<f64> {
    let rr = long_time_phi(h, weights, Side::Right, cfg)?;
    let ll = long_time_phi(h, weights, Side::Left, cfg)?;
    Ok(((rr.angle + ll.angle) * 0.5).rem_euclid(FRAC_PI_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band::{re_phi_yx, ModelParams};
    use crate::linalg::{angle_distance_mod, ONE, ZERO};
    use approx::assert_relative_eq;

    fn showcase() -> ComplexField {
        ModelParams::experimental(1.0).field(-0.448 * PI)
    }

    #[test]
    fn sigma_x_half_period() {
        let h = ComplexField::real(1.0, 0.0, 0.0);
        let psi = StateVec::right(ONE, ZERO).unwrap();
        let out = evolve_state(&h, &psi, PI / 2.0).unwrap();
        // e^{-iσx π/2} = -iσx
        assert!((out.amplitudes - Vec2::new(ZERO, -I)).norm() < 1e-14);
    }

    #[test]
    fn zero_time_is_identity() {
        let psi = StateVec::right(C64::new(0.3, 0.1), C64::new(-0.2, 0.9)).unwrap();
        assert_eq!(evolve_state(&showcase(), &psi, 0.0).unwrap(), psi);
        assert!(evolve_state(&showcase(), &psi, -1.0).is_err());
        assert!(StateVec::right(ZERO, ZERO).is_err());
    }

    #[test]
    fn eigenstate_texture_is_stationary() {
        let h = showcase();
        let es = eigensystem(&h).unwrap();
        let psi = StateVec::new(*es.right(Band::Plus), Side::Right).unwrap();
        let times: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        let s = texture_series(&h, &psi, &times).unwrap();
        for i in 0..s.len() {
            assert_relative_eq!(s.sx[i], s.sx[0], epsilon = 1e-12);
            assert_relative_eq!(s.sy[i], s.sy[0], epsilon = 1e-12);
        }
    }

    #[test]
    fn rabi_precession_oracle() {
        // H = σx: Bloch vector rotates about x at angular rate 2.
        let h = ComplexField::real(1.0, 0.0, 0.0);
        let psi = StateVec::right(ONE, ZERO).unwrap();
        let times: Vec<f64> = (0..40).map(|i| 0.07 * i as f64).collect();
        let s = texture_series(&h, &psi, &times).unwrap();
        for (i, &t) in times.iter().enumerate() {
            assert_relative_eq!(s.sx[i], 0.0, epsilon = 1e-13);
            assert_relative_eq!(s.sy[i], -(2.0 * t).sin(), epsilon = 1e-13);
            assert_relative_eq!(s.sz.as_ref().unwrap()[i], (2.0 * t).cos(), epsilon = 1e-13);
        }
    }

    #[test]
    fn stationary_long_time_average() {
        let h = showcase();
        let es = eigensystem(&h).unwrap();
        let w = InitialWeights::new(ONE, C64::from(1e-300));
        let cfg = LongTimeConfig { horizon: Some(5.0), ..Default::default() };
        let avg = long_time_phi(&h, &w, Side::Right, &cfg).unwrap();
        assert_relative_eq!(avg.angle, es.azimuth(Band::Plus), epsilon = 1e-12);
        assert!(long_time_phi(&h, &InitialWeights::new(ONE, ZERO), Side::Right, &cfg).is_err());
    }

    #[test]
    fn dominant_band_wins_at_long_times() {
        let h = showcase();
        let es = eigensystem(&h).unwrap();
        assert!(es.energy_plus.im > 0.0);
        let w = InitialWeights::new(ONE, ONE);
        let gap_im = 2.0 * es.energy_plus.im;
        let cfg = LongTimeConfig { horizon: Some(4000.0 / gap_im), min_points: 200_000, ..Default::default() };
        let avg = long_time_phi(&h, &w, Side::Right, &cfg).unwrap();
        let d = angle_distance_mod(avg.angle, es.azimuth(Band::Plus), 2.0 * PI);
        assert!(d < 1e-3, "{d}");
    }

    #[test]
    fn degenerate_average_in_hermitian_limit() {
        // Equal weights on a Hermitian field: averaged Bloch vector has no transverse part.
        let h = ComplexField::real(0.0, 0.0, 1.0);
        let w = InitialWeights::new(ONE, ONE);
        let cfg = LongTimeConfig { horizon: Some(PI * 10.0), ..Default::default() };
        assert!(matches!(long_time_phi(&h, &w, Side::Right, &cfg), Err(Error::DegenerateAverage)));
    }

    #[test]
    fn strict_mode_reports_non_convergence() {
        let h = showcase();
        let es = eigensystem(&h).unwrap();
        let w = InitialWeights::dominant(&es, 2.0);
        let cfg = LongTimeConfig { horizon: Some(2.0), strict: true, tol: 1e-12, ..Default::default() };
        assert!(matches!(long_time_phi(&h, &w, Side::Right, &cfg), Err(Error::NotConverged(_))));
    }

    #[test]
    fn long_time_average_recovers_azimuth() {
        let params = ModelParams::experimental(1.0);
        for &k in &[-2.0, -1.2, 0.9, 2.4] {
            let h = params.field(k);
            let es = eigensystem(&h).unwrap();
            let got = long_time_re_phi(&h, &InitialWeights::dominant(&es, 2.0), &LongTimeConfig::default()).unwrap();
            assert!(angle_distance_mod(got, re_phi_yx(&h).unwrap(), FRAC_PI_2) < 1e-2);
        }
    }

    #[test]
    fn adjoint_pairing_conserves_overlap() {
        let h = showcase();
        let psi_r = Vec2::new(C64::new(0.6, 0.1), C64::new(-0.3, 0.5));
        let psi_l = Vec2::new(C64::new(0.2, -0.4), C64::new(0.7, 0.3));
        let right = StateVec::new(psi_r, Side::Right).unwrap();
        let o0 = psi_l.dotc(&psi_r);
        for &t in &[0.3, 1.0, 2.7] {
            let r = evolve_state(&h, &right, t).unwrap().amplitudes;
            let l = evolve_adjoint(&h, &psi_l, t).unwrap();
            assert!((l.dotc(&r) - o0).norm() < 1e-10);
        }
    }
}
