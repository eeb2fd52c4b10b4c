use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64 as C64;

use nhtopo::band::{eigensystem, ComplexField, ModelParams};
use nhtopo::dilation::metric::metric_matrix;
use nhtopo::dilation::pulses::{compile_pulses, hardware_export, hardware_unitary, pulse_unitary, DEFAULT_COUPLING_HZ};
use nhtopo::dilation::readout::{ancilla_zero_branch, apply_readout_rotation};
use nhtopo::dilation::trotter::{evolve_schedule, exact_slice_unitary, slice_unitary};
use nhtopo::dilation::{dilated_schedule, initial_dilated_state, DilationConfig, Integrator};
use nhtopo::dynamics::{evolve_state, Side, StateVec};
use nhtopo::linalg::pauli_coefficients;

type M2 = Matrix2<C64>;

fn showcase() -> ComplexField {
    ModelParams::experimental(1.0).field(-0.448 * PI)
}

fn pauli_matrix(h: &ComplexField) -> M2 {
    let i = C64::i();
    Matrix2::new(h.hz, h.hx - i * h.hy, h.hx + i * h.hy, -h.hz)
}

/// RK4 for `dM/dt = -i(H†M − MH)`.
fn metric_rk4(h: &M2, m0: M2, t: f64, steps: usize) -> M2 {
    let dt = t / steps as f64;
    let f = |m: &M2| (h.adjoint() * m - m * h) * C64::new(0.0, -1.0);
    let mut y = m0;
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&(y + k1 * C64::from(dt / 2.0)));
        let k3 = f(&(y + k2 * C64::from(dt / 2.0)));
        let k4 = f(&(y + k3 * C64::from(dt)));
        y += (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(dt / 6.0);
    }
    y
}

#[test]
fn metric_matches_ode_oracle() {
    let h = showcase();
    let es = eigensystem(&h).unwrap();
    let eta0 = 2.0;
    let m0 = M2::identity() * C64::from(eta0 * eta0 + 1.0);
    for t in [0.5, 1.5, 3.0] {
        let oracle = metric_rk4(&pauli_matrix(&h), m0, t, 20_000);
        let ours = metric_matrix(&es, eta0, t);
        assert!((ours - oracle).norm() / oracle.norm() < 1e-8, "t = {t}");
    }
}

/// The ancilla-|0⟩ branch after readout is `ψ(t)/√(1+η₀²)`, not just parallel to it.
#[test]
fn dilated_state_carries_the_non_unitary_state() {
    let h = showcase();
    let psi0 = Vector2::new(C64::from(1.0), C64::from(0.0));
    let eta0 = 2.0;
    let n = 3000;
    let tau = 3.0 / n as f64;
    let schedule = dilated_schedule(&h, eta0, tau, n).unwrap();
    let start = initial_dilated_state(&psi0, eta0).unwrap();
    let states = evolve_schedule(&schedule, &start, Integrator::Exact).unwrap();
    let norm = (1.0 + eta0 * eta0).sqrt();
    for m in [299, 1499, 2999] {
        let t = schedule.time_after(m);
        let (branch, _) = ancilla_zero_branch(&apply_readout_rotation(&states[m]));
        let exact = evolve_state(&h, &StateVec::right(psi0[0], psi0[1]).unwrap(), t).unwrap().amplitudes / C64::from(norm);
        assert!((branch - exact).norm() < 1e-6, "t = {t}: {}", (branch - exact).norm());
    }
}

#[test]
fn dilated_evolution_is_unitary() {
    let schedule = DilationConfig::default().schedule(&showcase()).unwrap();
    let start = initial_dilated_state(&Vector2::new(C64::from(0.6), C64::new(0.0, 0.8)), schedule.eta0).unwrap();
    for integrator in [Integrator::Trotter, Integrator::Exact] {
        let states = evolve_schedule(&schedule, &start, integrator).unwrap();
        for s in states.iter().step_by(97) {
            assert!((s.norm() - 1.0).abs() < 1e-10);
        }
    }
}

fn max_trotter_deviation(h: &ComplexField, slices: usize) -> f64 {
    let cfg = DilationConfig { eta0: Some(2.0), horizon: 3.0, slices, integrator: Integrator::Trotter };
    let schedule = cfg.schedule(h).unwrap();
    let psi0 = Vector2::new(C64::from(1.0), C64::from(0.0));
    let states = evolve_schedule(&schedule, &initial_dilated_state(&psi0, 2.0).unwrap(), Integrator::Trotter).unwrap();
    let mut worst: f64 = 0.0;
    for (m, s) in states.iter().enumerate() {
        let (branch, _) = ancilla_zero_branch(&apply_readout_rotation(s));
        let sim = StateVec::new(branch, Side::Right).unwrap().texture();
        let exact = evolve_state(h, &StateVec::right(psi0[0], psi0[1]).unwrap(), schedule.time_after(m)).unwrap().texture();
        for a in 0..3 {
            worst = worst.max((sim[a] - exact[a]).abs());
        }
    }
    worst
}

#[test]
fn trotter_error_is_first_order() {
    let h = showcase();
    let d: Vec<f64> = [250, 500, 1000].iter().map(|&n| max_trotter_deviation(&h, n)).collect();
    for w in d.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.8..2.2).contains(&ratio), "ratio {ratio} from {d:?}");
    }
}

#[test]
fn hermitian_limit_has_no_ancilla_coupling() {
    let h = ModelParams::new(0.7, 1.0, 0.4, 0.0, 0.3).unwrap().field(2.2);
    let schedule = dilated_schedule(&h, 1.0, 0.01, 50).unwrap();
    let want = pauli_coefficients(&pauli_matrix(&h));
    for c in &schedule.slices {
        for a in 0..4 {
            assert!((c.lambda[a] - want[a]).abs() < 1e-10);
            assert!(c.gamma[a].abs() < 1e-10);
        }
    }
}

#[test]
fn pulse_program_reproduces_each_slice() {
    let schedule = DilationConfig::default().schedule(&showcase()).unwrap();
    let program = compile_pulses(&schedule, DEFAULT_COUPLING_HZ).unwrap();
    let hardware = hardware_export(&program);
    let tau = schedule.tau;
    for (m, c) in schedule.slices.iter().enumerate() {
        let phase = C64::from_polar(1.0, -tau * c.lambda[0]);
        let want = slice_unitary(c, tau);
        let got = pulse_unitary(&program.slices[m], tau, DEFAULT_COUPLING_HZ) * phase;
        assert!((got - want).norm() < 1e-8, "slice {m}");
        // hardware form agrees up to a global phase
        let hw = hardware_unitary(&hardware[m], tau, DEFAULT_COUPLING_HZ);
        let overlap = (hw.adjoint() * want).trace() / C64::from(4.0);
        assert!((overlap.norm() - 1.0).abs() < 1e-8, "slice {m}");
    }
}

#[test]
fn trotter_and_exact_slice_agree_to_second_order() {
    let schedule = DilationConfig::default().schedule(&showcase()).unwrap();
    let c = &schedule.slices[400];
    let e1 = (slice_unitary(c, 1e-2) - exact_slice_unitary(c, 1e-2)).norm();
    let e2 = (slice_unitary(c, 5e-3) - exact_slice_unitary(c, 5e-3)).norm();
    assert!((3.6..4.4).contains(&(e1 / e2)), "{}", e1 / e2);
}
