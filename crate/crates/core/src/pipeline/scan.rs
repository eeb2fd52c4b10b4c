use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Mode, ScenarioConfig};
use super::noise::{circuit_noise, inject_pulse_noise, k_seed, rms_error, RmsReport, RmsSource};
use crate::band::{eigensystem, Band, ComplexField};
use crate::dilation::pulses::{compile_pulses, simulate_program, CircuitNoise};
use crate::dilation::{dilated_texture_series, DilationConfig};
use crate::dynamics::{texture_series, SeriesSource, StateVec, TextureSeries};
use crate::error::{Error, Result};
use crate::extraction::{fit_series, re_phi_from_fit, FitConfig, FitModel, ModAngle};
use crate::linalg::C64;
use crate::topology::{winding_from_energy_series, winding_from_phi_series, winding_report, KGrid, WindingReport};

/// One k-point of a scan, before flattening into a CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct KPoint {
    pub k: f64,
    pub phi_pp: f64,
    pub phi_mm: f64,
    pub re_phi: ModAngle,
    pub energy: C64,
    pub eta0: Option<f64>,
    pub residual_rms: Option<f64>,
    /// Simulated series and the exact non-unitary series on the same times.
    pub series: Option<(TextureSeries, TextureSeries)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub k: f64,
    pub phi_pp: f64,
    pub phi_mm: f64,
    pub re_phi: f64,
    #[serde(rename = "reE")]
    pub re_e: f64,
    #[serde(rename = "imE")]
    pub im_e: f64,
    pub status: String,
}

impl ScanRow {
    fn ok(p: &KPoint) -> Self {
        Self {
            k: p.k,
            phi_pp: p.phi_pp,
            phi_mm: p.phi_mm,
            re_phi: p.re_phi.value,
            re_e: p.energy.re,
            im_e: p.energy.im,
            status: "ok".into(),
        }
    }

    fn failed(k: f64, e: &Error) -> Self {
        Self { k, phi_pp: f64::NAN, phi_mm: f64::NAN, re_phi: f64::NAN, re_e: f64::NAN, im_e: f64::NAN, status: e.tag().into() }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailedPoint {
    pub index: usize,
    pub k: f64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invariant {
    pub value: Option<i64>,
    pub raw: Option<f64>,
    pub error: Option<String>,
}

impl Invariant {
    fn from(r: Result<crate::topology::Quantized>) -> Self {
        match r {
            Ok(q) if q.rounded => Self { value: Some(q.value), raw: Some(q.raw), error: None },
            Ok(q) => Self { value: None, raw: Some(q.raw), error: Some("not quantized".into()) },
            Err(e) => Self { value: None, raw: None, error: Some(e.to_string()) },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub mode: Mode,
    /// From the sampled azimuth series.
    pub w_t: Invariant,
    /// From the sampled energy series.
    pub nu_e: Invariant,
    /// Dense-grid invariants of the model itself.
    pub exact: Option<WindingReport>,
    pub exact_error: Option<String>,
    pub failed: Vec<FailedPoint>,
    pub rms: Option<RmsReport>,
    pub max_fit_residual: Option<f64>,
    pub seed: Option<u64>,
    pub config: ScenarioConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOutput {
    pub rows: Vec<ScanRow>,
    pub points: Vec<Option<KPoint>>,
    pub summary: ScanSummary,
}

fn exact_point(h: &ComplexField, k: f64) -> Result<KPoint> {
    let es = eigensystem(h)?;
    let textures_vanish = |b| {
        use crate::band::Axis;
        es.texture(b, Axis::X).abs() < 1e-9 && es.texture(b, Axis::Y).abs() < 1e-9
    };
    if textures_vanish(Band::Plus) || textures_vanish(Band::Minus) {
        return Err(Error::DegenerateTexture);
    }
    let (phi_pp, phi_mm) = (es.azimuth(Band::Plus), es.azimuth(Band::Minus));
    Ok(KPoint {
        k,
        phi_pp,
        phi_mm,
        re_phi: ModAngle::new(0.5 * (phi_pp + phi_mm), FRAC_PI_2),
        energy: es.energy_plus,
        eta0: None,
        residual_rms: None,
        series: None,
    })
}

/// Simulated texture series for one k, per mode; returns the η₀ used.
pub fn simulate_series(cfg: &ScenarioConfig, h: &ComplexField, k_index: usize) -> Result<(TextureSeries, f64)> {
    let dil = DilationConfig {
        eta0: cfg.eta0,
        horizon: cfg.horizon,
        slices: cfg.total_slices(),
        integrator: cfg.integrator,
    };
    let schedule = dil.schedule(h)?;
    let psi0 = cfg.psi0();
    let spp = cfg.slices_per_sample();
    match cfg.mode {
        Mode::Exact => Err(Error::InvalidInput("exact mode has no simulated series".into())),
        Mode::Fit => Ok((dilated_texture_series(&schedule, &psi0, cfg.integrator, spp)?, schedule.eta0)),
        Mode::Dilated | Mode::Noisy => {
            let mut program = compile_pulses(&schedule, cfg.coupling_hz)?;
            let noisy = cfg.mode == Mode::Noisy && cfg.noise.level > 0.0;
            let noise = if noisy {
                let seed = k_seed(cfg.seed_or_default(), k_index);
                program.slices = inject_pulse_noise(&program.slices, cfg.noise.level, seed, cfg.noise.distribution)?;
                let circuit_level = if cfg.noise.circuit_pulses { cfg.noise.level } else { 0.0 };
                circuit_noise(cfg.samples, circuit_level, seed, cfg.noise.distribution)
            } else {
                CircuitNoise::ideal(cfg.samples)
            };
            let record: Vec<usize> = (0..cfg.samples).map(|i| i * spp).collect();
            let tex = simulate_program(&program, &psi0, &record, &noise)?;
            let series = TextureSeries {
                times: record.iter().map(|&m| m as f64 * schedule.tau).collect(),
                sx: tex.iter().map(|s| s[0]).collect(),
                sy: tex.iter().map(|s| s[1]).collect(),
                sz: Some(tex.iter().map(|s| s[2]).collect()),
                k: None,
                source: if noisy { SeriesSource::Noisy } else { SeriesSource::Dilated },
            };
            Ok((series, schedule.eta0))
        }
    }
}

/// Full per-k evaluation for the configured mode.
pub fn evaluate_k(cfg: &ScenarioConfig, k: f64, k_index: usize) -> Result<KPoint> {
    let h = cfg.model.field(k);
    if cfg.mode == Mode::Exact {
        return exact_point(&h, k);
    }
    let psi0 = cfg.psi0();
    let nominal = FitModel::from_field(&h, &psi0)?;
    let (mut series, eta0) = simulate_series(cfg, &h, k_index)?;
    series.k = Some(k);
    let theory = texture_series(&h, &StateVec::right(psi0[0], psi0[1])?, &series.times)?;
    let fit_cfg = FitConfig { restarts: cfg.restarts, seed: cfg.seed_or_default(), stream: k_index as u64, ..Default::default() };
    let fit = fit_series(&series, &fit_cfg, Some(&nominal))?;
    let re_phi = re_phi_from_fit(&fit)?;
    Ok(KPoint {
        k,
        phi_pp: fit.phi_pp,
        phi_mm: fit.phi_mm,
        re_phi,
        energy: fit.model.energy,
        eta0: Some(eta0),
        residual_rms: Some(fit.residual_rms),
        series: Some((series, theory)),
    })
}

fn pooled_rms(points: &[Option<KPoint>], source: RmsSource) -> Result<Option<RmsReport>> {
    let (mut mx, mut tx, mut my, mut ty) = (vec![], vec![], vec![], vec![]);
    for (sim, th) in points.iter().flatten().filter_map(|p| p.series.as_ref()) {
        mx.extend_from_slice(&sim.sx);
        tx.extend_from_slice(&th.sx);
        my.extend_from_slice(&sim.sy);
        ty.extend_from_slice(&th.sy);
    }
    if mx.is_empty() {
        return Ok(None);
    }
    Ok(Some(RmsReport { sigma_x: rms_error(&mx, &tx)?, sigma_y: rms_error(&my, &ty)?, source, samples: mx.len() }))
}

/// Sweep k over `[−π, π)`, in parallel, rows in k order. Failed k-points are
/// kept as flagged rows and listed in the summary.
pub fn run_scan(cfg: &ScenarioConfig) -> Result<ScanOutput> {
    cfg.validate()?;
    let grid = KGrid::new(cfg.k_points)?;
    let ks = grid.points();
    let results: Vec<Result<KPoint>> = ks.par_iter().enumerate().map(|(i, &k)| evaluate_k(cfg, k, i)).collect();

    let mut rows = Vec::with_capacity(ks.len());
    let mut points = Vec::with_capacity(ks.len());
    let mut failed = Vec::new();
    for (i, (r, &k)) in results.into_iter().zip(&ks).enumerate() {
        match r {
            Ok(p) => {
                rows.push(ScanRow::ok(&p));
                points.push(Some(p));
            }
            Err(e) => {
                rows.push(ScanRow::failed(k, &e));
                failed.push(FailedPoint { index: i, k, error: e.to_string() });
                points.push(None);
            }
        }
    }

    let (w_t, nu_e) = if failed.is_empty() {
        let phi: Vec<(f64, f64)> = points.iter().flatten().map(|p| (p.k, p.re_phi.value)).collect();
        let energy: Vec<(f64, C64)> = points.iter().flatten().map(|p| (p.k, p.energy)).collect();
        (
            Invariant::from(winding_from_phi_series(&phi, FRAC_PI_2)),
            Invariant::from(winding_from_energy_series(&energy)),
        )
    } else {
        let missing = Invariant { value: None, raw: None, error: Some(format!("{} k-points failed", failed.len())) };
        (missing.clone(), missing)
    };

    let (exact, exact_error) = match KGrid::new(cfg.winding_grid).and_then(|g| winding_report(&cfg.model, &g)) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let source = if cfg.mode == Mode::Noisy && cfg.noise.level > 0.0 { RmsSource::Noisy } else { RmsSource::Clean };
    let rms = pooled_rms(&points, source)?;
    let max_fit_residual = points.iter().flatten().filter_map(|p| p.residual_rms).reduce(f64::max);

    Ok(ScanOutput {
        rows,
        points,
        summary: ScanSummary {
            mode: cfg.mode,
            w_t,
            nu_e,
            exact,
            exact_error,
            failed,
            rms,
            max_fit_residual,
            seed: cfg.seed,
            config: cfg.clone(),
        },
    })
}
