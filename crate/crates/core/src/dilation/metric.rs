use crate::band::{eigensystem, Band, ComplexField, EigenSystem};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermitian_part, hermitian_sqrt, Mat2, C64, I};

pub const POSITIVITY_MARGIN: f64 = 1e-6;
/// Minimum `M − I` eigenvalue demanded by [`auto_eta0`].
pub const AUTO_ETA0_FLOOR: f64 = 1e-3;
pub const AUTO_ETA0_START: f64 = 0.5;
const AUTO_ETA0_MAX_DOUBLINGS: usize = 60;

/// Metric `M(t)` of the dilation and its square-root partner `η(t) = √(M − I)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricState {
    pub t: f64,
    pub metric: Mat2,
    pub eta: Mat2,
    pub eta0: f64,
}

impl MetricState {
    pub fn min_excess(&self) -> f64 {
        hermitian_eigenvalues(&(self.metric - Mat2::identity()))[0]
    }
}

/// `e^{iHt} = Σ_μ e^{iE_μ t} |φ^R_μ⟩⟨φ^L_μ|`.
pub fn forward_factor(es: &EigenSystem, t: f64) -> Mat2 {
    let mut out = Mat2::zeros();
    for band in Band::BOTH {
        out += es.right(band) * es.left(band) * (I * es.energy(band) * t).exp();
    }
    out
}

/// `M(t) = (η₀² + 1) e^{-iH†t} e^{iHt}`, Hermitized.
pub fn metric_matrix(es: &EigenSystem, eta0: f64, t: f64) -> Mat2 {
    let a = forward_factor(es, t);
    hermitian_part(&(a.adjoint() * a * C64::from(eta0 * eta0 + 1.0)))
}

/// Metric and `η` at one time; `PositivityLost` when `min eig(M − I) ≤ margin`.
pub fn metric_at(es: &EigenSystem, eta0: f64, t: f64, margin: f64) -> Result<MetricState> {
    let metric = metric_matrix(es, eta0, t);
    let excess = metric - Mat2::identity();
    let min_eig = hermitian_eigenvalues(&excess)[0];
    if !(min_eig > margin) {
        return Err(Error::PositivityLost { t, min_eig });
    }
    Ok(MetricState { t, metric, eta: hermitian_sqrt(&excess), eta0 })
}

fn check_eta0(eta0: f64) -> Result<()> {
    if eta0 > 0.0 && eta0.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("eta0 must be positive, got {eta0}")))
    }
}

pub fn metric_eta(h: &ComplexField, eta0: f64, times: &[f64]) -> Result<Vec<MetricState>> {
    check_eta0(eta0)?;
    let es = eigensystem(h)?;
    times.iter().map(|&t| metric_at(&es, eta0, t, POSITIVITY_MARGIN)).collect()
}

/// Smallest eigenvalue of `M(t) − I` over `times`.
pub fn min_metric_excess(es: &EigenSystem, eta0: f64, times: &[f64]) -> f64 {
    times
        .iter()
        .map(|&t| hermitian_eigenvalues(&(metric_matrix(es, eta0, t) - Mat2::identity()))[0])
        .fold(f64::INFINITY, f64::min)
}

/// Smallest `η₀ = 0.5·2^n` keeping `M(t) − I ≥ floor` on `samples` points of `[0, horizon]`.
pub fn auto_eta0(h: &ComplexField, horizon: f64, samples: usize, floor: f64) -> Result<f64> {
    if !(horizon > 0.0) || samples < 2 {
        return Err(Error::InvalidInput("auto eta0 needs a positive horizon and at least 2 samples".into()));
    }
    let es = eigensystem(h)?;
    let times: Vec<f64> = (0..samples).map(|i| horizon * i as f64 / (samples - 1) as f64).collect();
    let mut eta0 = AUTO_ETA0_START;
    for _ in 0..AUTO_ETA0_MAX_DOUBLINGS {
        if min_metric_excess(&es, eta0, &times) >= floor {
            return Ok(eta0);
        }
        eta0 *= 2.0;
    }
    let min_eig = min_metric_excess(&es, eta0, &times);
    Err(Error::PositivityLost { t: horizon, min_eig })
}
