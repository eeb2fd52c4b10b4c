use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::band::ModelParams;
use crate::error::{Error, Result};
use crate::topology::{winding_nu_e, winding_w_t, KGrid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis1d {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis1d {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        (0..self.steps).map(|i| self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64).collect()
    }
}

/// Sweep of `(J0, J2)` at fixed `J1`, `δ`, `hz`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseDiagramConfig {
    pub j0: Axis1d,
    pub j2: Axis1d,
    pub j1: f64,
    pub delta: f64,
    pub hz: f64,
    pub grid: usize,
}

impl Default for PhaseDiagramConfig {
    fn default() -> Self {
        Self {
            j0: Axis1d { min: -3.0, max: 3.0, steps: 61 },
            j2: Axis1d { min: -2.0, max: 2.0, steps: 41 },
            j1: 1.0,
            delta: 0.3,
            hz: 0.5,
            grid: crate::topology::DEFAULT_GRID,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub j0: f64,
    pub j2: f64,
    pub w_t: Option<i64>,
    pub w_t_raw: Option<f64>,
    pub nu_e: Option<i64>,
    pub nu_e_raw: Option<f64>,
    pub status: String,
}

fn phase_point(cfg: &PhaseDiagramConfig, grid: &KGrid, j0: f64, j2: f64) -> PhaseRow {
    let model = match ModelParams::new(j0, cfg.j1, j2, cfg.delta, cfg.hz) {
        Ok(m) => m,
        Err(e) => return PhaseRow { j0, j2, w_t: None, w_t_raw: None, nu_e: None, nu_e_raw: None, status: e.tag().into() },
    };
    let w = winding_w_t(&model, grid);
    let n = winding_nu_e(&model, grid);
    let status = match (&w, &n) {
        (Err(e), _) | (_, Err(e)) => e.tag().to_string(),
        (Ok(a), Ok(b)) if !(a.rounded && b.rounded) => "not_quantized".to_string(),
        _ => "ok".to_string(),
    };
    let w = w.ok();
    let n = n.ok();
    PhaseRow {
        j0,
        j2,
        w_t: w.filter(|q| q.rounded).map(|q| q.value),
        w_t_raw: w.map(|q| q.raw),
        nu_e: n.filter(|q| q.rounded).map(|q| q.value),
        nu_e_raw: n.map(|q| q.raw),
        status,
    }
}

/// Rows ordered with `J0` outermost.
pub fn phase_diagram(cfg: &PhaseDiagramConfig) -> Result<Vec<PhaseRow>> {
    if cfg.j0.steps == 0 || cfg.j2.steps == 0 {
        return Err(Error::Config("phase diagram axes need at least one step".into()));
    }
    let grid = KGrid::new(cfg.grid)?;
    let cells: Vec<(f64, f64)> =
        cfg.j0.values().into_iter().flat_map(|a| cfg.j2.values().into_iter().map(move |b| (a, b))).collect();
    Ok(cells.par_iter().map(|&(a, b)| phase_point(cfg, &grid, a, b)).collect())
}
