use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::lm::{minimize, LeastSquares, LmConfig};
use crate::band::{eigensystem, Band, ComplexField};
use crate::dynamics::{SeriesSource, TextureSeries};
use crate::error::{Error, Result};
use crate::linalg::{spin_texture, Vec2, C64, I};

pub const MIN_SAMPLES: usize = 12;
pub const SINGLE_BAND_RATIO: f64 = 1e-3;
const DEGENERATE_TEXTURE: f64 = 1e-9;
const FLAT_SERIES: f64 = 1e-12;
const PARAMS: usize = 8;

/// Two-band model `ψ(t) = v₊ e^{-iEt} + v₋ e^{iEt}` of the evolving right state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitModel {
    pub energy: C64,
    pub v_plus: Vec2,
    pub v_minus: Vec2,
}

impl FitModel {
    /// Model of `psi0` evolving under `h`: `v_μ = c_μ |φ^R_μ⟩`, canonicalized.
    pub fn from_field(h: &ComplexField, psi0: &Vec2) -> Result<Self> {
        let es = eigensystem(h)?;
        let c = es.coefficients(psi0);
        Ok(Self { energy: es.energy_plus, v_plus: es.right(Band::Plus) * c[0], v_minus: es.right(Band::Minus) * c[1] }
            .canonical())
    }

    pub fn state(&self, t: f64) -> Vec2 {
        let damp = -self.energy.im.abs() * t;
        self.v_plus * (-I * self.energy * t + damp).exp() + self.v_minus * (I * self.energy * t + damp).exp()
    }

    pub fn texture_at(&self, t: f64) -> [f64; 3] {
        spin_texture(&self.state(t))
    }

    pub fn series(&self, times: &[f64]) -> TextureSeries {
        let tex: Vec<[f64; 3]> = times.iter().map(|&t| self.texture_at(t)).collect();
        TextureSeries {
            times: times.to_vec(),
            sx: tex.iter().map(|s| s[0]).collect(),
            sy: tex.iter().map(|s| s[1]).collect(),
            sz: Some(tex.iter().map(|s| s[2]).collect()),
            k: None,
            source: SeriesSource::Exact,
        }
    }

    pub fn band_vector(&self, band: Band) -> &Vec2 {
        match band {
            Band::Plus => &self.v_plus,
            Band::Minus => &self.v_minus,
        }
    }

    /// `min(‖v₊‖, ‖v₋‖) / max(‖v₊‖, ‖v₋‖)`.
    pub fn amplitude_ratio(&self) -> f64 {
        let (a, b) = (self.v_plus.norm(), self.v_minus.norm());
        a.min(b) / a.max(b)
    }

    /// `Re E ≥ 0`, `‖v₊‖ = 1`, first nonzero component of `v₊` real positive.
    pub fn canonical(self) -> Self {
        let m = if self.energy.re < 0.0 {
            Self { energy: -self.energy, v_plus: self.v_minus, v_minus: self.v_plus }
        } else {
            self
        };
        let n = m.v_plus.norm();
        if !(n > 0.0) {
            return m;
        }
        let lead = if m.v_plus[0].norm() > 1e-14 * n { m.v_plus[0] } else { m.v_plus[1] };
        let gauge = C64::from(n) * lead / C64::from(lead.norm());
        Self { energy: m.energy, v_plus: m.v_plus / gauge, v_minus: m.v_minus / gauge }
    }

    /// The texture-equivalent partner `σ_x ψ*`: `E → E*` with band vectors exchanged.
    pub fn mirrored(&self) -> Self {
        let flip = |v: &Vec2| Vec2::new(v[1].conj(), v[0].conj());
        Self { energy: self.energy.conj(), v_plus: flip(&self.v_minus), v_minus: flip(&self.v_plus) }.canonical()
    }

    fn to_params(self) -> DVector<f64> {
        let m = self.canonical();
        let theta = m.v_plus[1].norm().atan2(m.v_plus[0].norm());
        let chi = m.v_plus[1].arg() - m.v_plus[0].arg();
        DVector::from_vec(vec![
            m.energy.re,
            m.energy.im,
            theta,
            chi,
            m.v_minus[0].re,
            m.v_minus[0].im,
            m.v_minus[1].re,
            m.v_minus[1].im,
        ])
    }

    fn from_params(p: &DVector<f64>) -> Self {
        Self {
            energy: C64::new(p[0], p[1]),
            v_plus: Vec2::new(C64::from(p[2].cos()), (I * p[3]).exp() * p[2].sin()),
            v_minus: Vec2::new(C64::new(p[4], p[5]), C64::new(p[6], p[7])),
        }
    }
}

struct TextureProblem<'a> {
    times: &'a [f64],
    sx: &'a [f64],
    sy: &'a [f64],
}

impl TextureProblem<'_> {
    /// Scaled state and its parameter derivatives. A common complex factor on
    /// `ψ` does not move the normalized texture, so the damping factor is
    /// treated as constant.
    fn state_and_derivatives(p: &DVector<f64>, t: f64) -> (Vec2, [Vec2; PARAMS]) {
        let m = FitModel::from_params(p);
        let damp = -p[1].abs() * t;
        let fwd = (-I * m.energy * t + damp).exp();
        let bwd = (I * m.energy * t + damp).exp();
        let vp = m.v_plus * fwd;
        let vm = m.v_minus * bwd;
        let (s, c) = p[2].sin_cos();
        let phase = (I * p[3]).exp();
        let d = [
            vp * (-I * t) + vm * (I * t),
            vp * C64::from(t) - vm * C64::from(t),
            Vec2::new(C64::from(-s), phase * c) * fwd,
            Vec2::new(C64::from(0.0), I * phase * s) * fwd,
            Vec2::new(bwd, C64::from(0.0)),
            Vec2::new(I * bwd, C64::from(0.0)),
            Vec2::new(C64::from(0.0), bwd),
            Vec2::new(C64::from(0.0), I * bwd),
        ];
        (vp + vm, d)
    }
}

impl LeastSquares for TextureProblem<'_> {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        let m = FitModel::from_params(p);
        let n = self.times.len();
        let mut r = DVector::zeros(2 * n);
        for (i, &t) in self.times.iter().enumerate() {
            let s = m.texture_at(t);
            r[i] = s[0] - self.sx[i];
            r[n + i] = s[1] - self.sy[i];
        }
        r
    }

    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let n = self.times.len();
        let mut jac = DMatrix::zeros(2 * n, PARAMS);
        for (i, &t) in self.times.iter().enumerate() {
            let (psi, d) = Self::state_and_derivatives(p, t);
            let (a, b) = (psi[0], psi[1]);
            let norm = a.norm_sqr() + b.norm_sqr();
            let cross = a.conj() * b;
            let sx = 2.0 * cross.re / norm;
            let sy = 2.0 * cross.im / norm;
            for (j, dj) in d.iter().enumerate() {
                let dcross = dj[0].conj() * b + a.conj() * dj[1];
                let dnorm = 2.0 * (a.conj() * dj[0] + b.conj() * dj[1]).re;
                jac[(i, j)] = (2.0 * dcross.re - sx * dnorm) / norm;
                jac[(n + i, j)] = (2.0 * dcross.im - sy * dnorm) / norm;
            }
        }
        jac
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Independent random stream per fit (e.g. the k index).
    pub stream: u64,
    pub lm: LmConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { restarts: 8, seed: 0, stream: 0, lm: LmConfig::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    /// `[band][axis]` with band 0: `+`, 1: `−` and axis 0: x, 1: y.
    pub textures: [[f64; 2]; 2],
    pub phi_pp: f64,
    pub phi_mm: f64,
    pub residual_rms: f64,
    pub converged: bool,
    pub restarts: usize,
}

/// An angle known only modulo `period`, reported in `[0, period)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModAngle {
    pub value: f64,
    pub period: f64,
}

impl ModAngle {
    pub fn new(angle: f64, period: f64) -> Self {
        Self { value: angle.rem_euclid(period), period }
    }
}

/// Angular frequency of the strongest peak of the mean-removed series,
/// from a direct transform zero-padded to `16·N` bins up to Nyquist.
pub fn dominant_frequency(times: &[f64], values: &[f64]) -> f64 {
    let n = times.len();
    if n < 3 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let span = times[n - 1] - times[0];
    let nyquist = PI * (n - 1) as f64 / span;
    let bins = 16 * n;
    let mut best = (0.0, 0.0);
    for b in 1..=bins {
        let w = nyquist * b as f64 / bins as f64;
        let mut acc = C64::from(0.0);
        for (t, v) in times.iter().zip(values) {
            acc += (-I * w * t).exp() * (v - mean);
        }
        if acc.norm_sqr() > best.1 {
            best = (w, acc.norm_sqr());
        }
    }
    best.0
}

/// Bin width `2π / span` of the unpadded transform.
pub fn frequency_resolution(times: &[f64]) -> f64 {
    TAU / (times[times.len() - 1] - times[0])
}

/// Decay rate of the oscillation envelope: slope of `log max|x − mean|` over
/// windows of one period.
fn envelope_rate(times: &[f64], values: &[f64], omega: f64) -> f64 {
    if !(omega > 0.0) {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let period = TAU / omega;
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let mut pts = Vec::new();
    let mut start = t0;
    while start + period <= t1 + 1e-12 {
        let amp = times
            .iter()
            .zip(values)
            .filter(|(t, _)| **t >= start && **t < start + period)
            .map(|(_, v)| (v - mean).abs())
            .fold(0.0, f64::max);
        if amp > 0.0 {
            pts.push((start + 0.5 * period, amp.ln()));
        }
        start += period;
    }
    if pts.len() < 2 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let num: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_start(rng: &mut ChaCha8Rng, energy: C64) -> FitModel {
    let g = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };
    let re = energy.re * (1.0 + 0.1 * g(rng));
    let im = energy.im + 0.1 * energy.norm().max(0.1) * g(rng);
    let theta: f64 = rng.random_range(0.0..FRAC_PI_2);
    let chi: f64 = rng.random_range(-PI..PI);
    let vm = Vec2::new(C64::new(g(rng), g(rng)), C64::new(g(rng), g(rng)));
    FitModel {
        energy: C64::new(re, im),
        v_plus: Vec2::new(C64::from(theta.cos()), (I * chi).exp() * theta.sin()),
        v_minus: vm * C64::from(0.5),
    }
}

/// `π / dt` for a uniformly sampled series: shifting `E` by it multiplies every
/// sample by `±1` and leaves all textures unchanged.
pub fn alias_period(times: &[f64]) -> Option<f64> {
    let n = times.len();
    if n < 2 {
        return None;
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    let uniform = times.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt);
    uniform.then_some(PI / dt)
}

/// Fold `Re E` into `(−P/2, P/2]` for alias period `P`.
fn fold_alias(m: FitModel, period: Option<f64>) -> FitModel {
    match period {
        Some(p) => {
            let mut re = m.energy.re.rem_euclid(p);
            if re > 0.5 * p {
                re -= p;
            }
            FitModel { energy: C64::new(re, m.energy.im), ..m }
        }
        None => m,
    }
}

fn validate_series(series: &TextureSeries) -> Result<()> {
    series.validate()?;
    if series.len() < MIN_SAMPLES {
        return Err(Error::InvalidInput(format!("fit needs at least {MIN_SAMPLES} samples, got {}", series.len())));
    }
    if series.sx.iter().chain(&series.sy).chain(&series.times).any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("series contains non-finite values".into()));
    }
    Ok(())
}

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

fn band_textures(m: &FitModel) -> [[f64; 2]; 2] {
    let p = spin_texture(&m.v_plus);
    let q = spin_texture(&m.v_minus);
    [[p[0], p[1]], [q[0], q[1]]]
}

fn texture_distance(a: &FitModel, b: &FitModel) -> f64 {
    let (x, y) = (band_textures(a), band_textures(b));
    (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| (x[i][j] - y[i][j]).abs()).sum()
}

/// Pick between a model and its texture-equivalent mirror.
fn resolve_mirror(m: FitModel, nominal: Option<&FitModel>) -> FitModel {
    let alt = m.mirrored();
    match nominal {
        Some(nom) => {
            let (d0, d1) = ((m.energy - nom.energy).norm(), (alt.energy - nom.energy).norm());
            let scale = 1e-9 * nom.energy.norm().max(1e-12);
            if (d0 - d1).abs() > scale {
                if d0 <= d1 {
                    m
                } else {
                    alt
                }
            } else if texture_distance(&m, nom) <= texture_distance(&alt, nom) {
                m
            } else {
                alt
            }
        }
        None if m.energy.im < 0.0 => alt,
        None => m,
    }
}

/// Fit `(E, v₊, v₋)` to the normalized `sx`, `sy` series. `nominal` (e.g. from
/// the band model at the series' k) seeds the first restart and selects the
/// branch among texture-equivalent solutions.
pub fn fit_series(series: &TextureSeries, cfg: &FitConfig, nominal: Option<&FitModel>) -> Result<FitResult> {
    validate_series(series)?;
    if spread(&series.sx).max(spread(&series.sy)) < FLAT_SERIES {
        return Err(Error::SingleBandDegenerate { ratio: 0.0 });
    }
    let times = &series.times;
    let axis = if spread(&series.sx) >= spread(&series.sy) { &series.sx } else { &series.sy };
    let omega = dominant_frequency(times, axis);
    let rate = envelope_rate(times, axis, omega);
    let spectral = C64::new(0.5 * omega, 0.5 * rate.abs());

    let problem = TextureProblem { times, sx: &series.sx, sy: &series.sy };
    let mut rng = stream_rng(cfg.seed, cfg.stream);
    let nominal = nominal.map(|m| m.canonical());
    let mut starts = Vec::with_capacity(cfg.restarts.max(1));
    if let Some(nom) = nominal {
        starts.push(nom);
        starts.push(FitModel { energy: spectral, ..nom });
    }
    while starts.len() < cfg.restarts.max(1) {
        let base = nominal.map(|n| n.energy).unwrap_or(spectral);
        starts.push(random_start(&mut rng, base));
    }

    let mut best: Option<(f64, bool, FitModel)> = None;
    let n_starts = starts.len();
    for start in starts {
        let rep = minimize(&problem, start.to_params(), &cfg.lm);
        if !rep.cost.is_finite() {
            continue;
        }
        let better = match &best {
            None => true,
            Some((c, conv, _)) => (rep.converged && !conv) || (rep.converged == *conv && rep.cost < *c),
        };
        if better {
            best = Some((rep.cost, rep.converged, FitModel::from_params(&rep.params)));
        }
    }
    let (cost, converged, model) = best.ok_or_else(|| Error::NotConverged("every fit restart diverged".into()))?;
    if !converged {
        return Err(Error::NotConverged(format!("no restart reached the gradient tolerance (best cost {cost:.3e})")));
    }
    let model = resolve_mirror(fold_alias(model, alias_period(times)).canonical(), nominal.as_ref());
    let ratio = model.amplitude_ratio();
    if ratio < SINGLE_BAND_RATIO {
        return Err(Error::SingleBandDegenerate { ratio });
    }
    let textures = band_textures(&model);
    Ok(FitResult {
        model,
        textures,
        phi_pp: textures[0][1].atan2(textures[0][0]),
        phi_mm: textures[1][1].atan2(textures[1][0]),
        residual_rms: (cost / series.len() as f64).sqrt(),
        converged,
        restarts: n_starts,
    })
}

/// `(φ^{++} + φ^{−−}) / 2`, defined modulo π/2.
pub fn re_phi_from_fit(fit: &FitResult) -> Result<ModAngle> {
    if !fit.converged {
        return Err(Error::NotConverged("fit did not converge".into()));
    }
    if fit.textures.iter().any(|t| t[0].abs() < DEGENERATE_TEXTURE && t[1].abs() < DEGENERATE_TEXTURE) {
        return Err(Error::DegenerateTexture);
    }
    Ok(ModAngle::new(0.5 * (fit.phi_pp + fit.phi_mm), FRAC_PI_2))
}
