//! Damped Gauss-Newton (Levenberg-Marquardt) for small dense problems.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Stop when `‖Jᵀr‖∞` falls below this.
    pub gradient_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self { max_iterations: 200, gradient_tolerance: 1e-10, initial_damping: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmReport {
    pub params: DVector<f64>,
    /// `½‖r‖²`.
    pub cost: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Residual vector and Jacobian at a point.
pub trait LeastSquares {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64>;
    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64>;
}

fn half_norm2(r: &DVector<f64>) -> f64 {
    0.5 * r.norm_squared()
}

/// Accepted steps never increase the cost. Convergence means a gradient below
/// tolerance, or a step that no damping can improve at machine precision.
pub fn minimize(problem: &dyn LeastSquares, p0: DVector<f64>, cfg: &LmConfig) -> LmReport {
    let mut p = p0;
    let mut r = problem.residuals(&p);
    let mut cost = half_norm2(&r);
    let mut mu = cfg.initial_damping;
    let mut iterations = 0;
    let mut gradient_norm = f64::INFINITY;
    let mut stalled = false;
    if !cost.is_finite() {
        return LmReport { params: p, cost, gradient_norm, iterations, converged: false };
    }
    while iterations < cfg.max_iterations {
        let jac = problem.jacobian(&p);
        let grad = jac.transpose() * &r;
        gradient_norm = grad.amax();
        if gradient_norm < cfg.gradient_tolerance {
            break;
        }
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let scale: DVector<f64> = jtj.diagonal().map(|d| d.max(1e-12));
        let mut accepted = false;
        while mu < 1e20 {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += mu * scale[i];
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    mu *= 10.0;
                    continue;
                }
            };
            let trial = &p + &step;
            let r_trial = problem.residuals(&trial);
            let c_trial = half_norm2(&r_trial);
            if c_trial.is_finite() && c_trial < cost {
                let negligible = step.norm() <= 1e-15 * (p.norm() + 1e-15);
                p = trial;
                r = r_trial;
                cost = c_trial;
                mu = (mu / 3.0).max(1e-15);
                accepted = true;
                stalled = negligible;
                break;
            }
            mu *= 4.0;
        }
        if !accepted || stalled {
            stalled = true;
            break;
        }
    }
    if iterations == cfg.max_iterations || stalled {
        let jac = problem.jacobian(&p);
        gradient_norm = (jac.transpose() * &r).amax();
    }
    let converged = gradient_norm < cfg.gradient_tolerance || (stalled && gradient_norm < 1e-6 * (1.0 + cost.sqrt()));
    LmReport { params: p, cost, gradient_norm, iterations, converged }
}
