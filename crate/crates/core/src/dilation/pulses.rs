//! Compilation of a dilated schedule into RF pulse amplitudes and J-coupling
//! free-evolution durations, and pulse-level simulation of the resulting circuit.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::readout::{density, density_texture, readout_rotation};
use super::schedule::DilatedSchedule;
use super::trotter::{ancilla_preparation, DilatedState};
use crate::error::{Error, Result};
use crate::linalg::{kron, pauli, pauli_string_exp, rx, ry, su2_rotation, Mat2, Mat4, Vec2, C64};

/// Scalar J coupling of the two-spin register (Hz).
pub const DEFAULT_COUPLING_HZ: f64 = 215.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PulseSlice {
    /// Rotation of the system RF burst in units of π (unit-duration pulse).
    pub b1: f64,
    pub phi1: f64,
    /// System z-rotation rate (π/s), realized as a y-pulse inside an x sandwich.
    pub b2: f64,
    /// Ancilla z-rotation rate, same realization.
    pub b3: f64,
    /// Signed free-evolution durations for the σxσz, σyσz, σzσz couplings.
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseProgram {
    pub tau: f64,
    pub coupling_hz: f64,
    pub eta0: f64,
    pub slices: Vec<PulseSlice>,
}

pub fn compile_pulses(schedule: &DilatedSchedule, coupling_hz: f64) -> Result<PulseProgram> {
    if !(coupling_hz != 0.0 && coupling_hz.is_finite()) {
        return Err(Error::InvalidInput(format!("J coupling must be finite and nonzero, got {coupling_hz}")));
    }
    let tau = schedule.tau;
    let per_coupling = 2.0 * tau / (PI * coupling_hz);
    let slices = schedule
        .slices
        .iter()
        .map(|c| {
            let (l, g) = (&c.lambda, &c.gamma);
            PulseSlice {
                b1: tau / PI * l[1].hypot(l[2]),
                phi1: l[2].atan2(l[1]),
                b2: l[3] / PI,
                b3: g[0] / PI,
                tau1: g[1] * per_coupling,
                tau2: g[2] * per_coupling,
                tau3: g[3] * per_coupling,
            }
        })
        .collect();
    Ok(PulseProgram { tau, coupling_hz, eta0: schedule.eta0, slices })
}

fn on_system(u: &Mat2) -> Mat4 {
    kron(u, &Mat2::identity())
}

fn on_ancilla(u: &Mat2) -> Mat4 {
    kron(&Mat2::identity(), u)
}

/// Free evolution `exp(-i (πJ/2) σ_zσ_z d)`.
pub fn coupling_evolution(coupling_hz: f64, duration: f64) -> Mat4 {
    pauli_string_exp(0.5 * PI * coupling_hz * duration, &kron(&pauli(3), &pauli(3)))
}

/// `R_x(π/2) e^{-iπ b τ σ_y} R_x(−π/2)`, a z-rotation built from x and y pulses.
fn z_from_sandwich(b: f64, tau: f64) -> Mat2 {
    rx(FRAC_PI_2) * su2_rotation(PI * b * tau, [0.0, 1.0, 0.0]) * rx(-FRAC_PI_2)
}

/// Unitary of one compiled slice with ideal pulses (no global phase).
pub fn pulse_unitary(p: &PulseSlice, tau: f64, coupling_hz: f64) -> Mat4 {
    let u1 = on_system(&su2_rotation(PI * p.b1, [p.phi1.cos(), p.phi1.sin(), 0.0]));
    let u2 = on_system(&z_from_sandwich(p.b2, tau)) * on_ancilla(&z_from_sandwich(p.b3, tau));
    let u3 = on_system(&ry(FRAC_PI_2)) * coupling_evolution(coupling_hz, p.tau1) * on_system(&ry(-FRAC_PI_2));
    let u4 = on_system(&rx(-FRAC_PI_2)) * coupling_evolution(coupling_hz, p.tau2) * on_system(&rx(FRAC_PI_2));
    let u5 = coupling_evolution(coupling_hz, p.tau3);
    u1 * u2 * u3 * u4 * u5
}

/// Slice with non-negative durations; a flipped coupling has its sandwich
/// pulses phase-shifted by π (a π-pulse pair for the bare σzσz term).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardwareSlice {
    pub pulse: PulseSlice,
    pub flipped: [bool; 3],
}

pub fn hardware_export(program: &PulseProgram) -> Vec<HardwareSlice> {
    program
        .slices
        .iter()
        .map(|p| {
            let flipped = [p.tau1 < 0.0, p.tau2 < 0.0, p.tau3 < 0.0];
            let pulse = PulseSlice { tau1: p.tau1.abs(), tau2: p.tau2.abs(), tau3: p.tau3.abs(), ..*p };
            HardwareSlice { pulse, flipped }
        })
        .collect()
}

pub fn hardware_unitary(h: &HardwareSlice, tau: f64, coupling_hz: f64) -> Mat4 {
    let p = &h.pulse;
    let sign = |f: bool| if f { -1.0 } else { 1.0 };
    let u1 = on_system(&su2_rotation(PI * p.b1, [p.phi1.cos(), p.phi1.sin(), 0.0]));
    let u2 = on_system(&z_from_sandwich(p.b2, tau)) * on_ancilla(&z_from_sandwich(p.b3, tau));
    let s1 = sign(h.flipped[0]);
    let u3 = on_system(&ry(s1 * FRAC_PI_2)) * coupling_evolution(coupling_hz, p.tau1) * on_system(&ry(-s1 * FRAC_PI_2));
    let s2 = sign(h.flipped[1]);
    let u4 = on_system(&rx(-s2 * FRAC_PI_2)) * coupling_evolution(coupling_hz, p.tau2) * on_system(&rx(s2 * FRAC_PI_2));
    let u5 = if h.flipped[2] {
        on_system(&rx(PI)) * coupling_evolution(coupling_hz, p.tau3) * on_system(&rx(-PI))
    } else {
        coupling_evolution(coupling_hz, p.tau3)
    };
    u1 * u2 * u3 * u4 * u5
}

const PROGRAM_HEADER: &str = "index B1 Phi1 B2 B3 tau1 tau2 tau3";

fn fmt_num(x: f64) -> String {
    format!("{x:.15e}")
}

/// Line-oriented program text; `#` lines carry metadata and the column header.
pub fn write_program(program: &PulseProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# tau {} coupling_hz {} eta0 {}",
        fmt_num(program.tau),
        fmt_num(program.coupling_hz),
        fmt_num(program.eta0)
    );
    let _ = writeln!(out, "# {PROGRAM_HEADER}");
    for (i, p) in program.slices.iter().enumerate() {
        let cols = [p.b1, p.phi1, p.b2, p.b3, p.tau1, p.tau2, p.tau3].map(fmt_num);
        let _ = writeln!(out, "{i} {}", cols.join(" "));
    }
    out
}

/// Hardware variant: same columns (durations non-negative) plus three sandwich phases.
pub fn write_hardware_program(program: &PulseProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# tau {} coupling_hz {}", fmt_num(program.tau), fmt_num(program.coupling_hz));
    let _ = writeln!(out, "# {PROGRAM_HEADER} phase1 phase2 phase3");
    for (i, h) in hardware_export(program).iter().enumerate() {
        let p = &h.pulse;
        let mut cols: Vec<String> = [p.b1, p.phi1, p.b2, p.b3, p.tau1, p.tau2, p.tau3].map(fmt_num).to_vec();
        cols.extend(h.flipped.iter().map(|&f| fmt_num(if f { PI } else { 0.0 })));
        let _ = writeln!(out, "{i} {}", cols.join(" "));
    }
    out
}

pub fn parse_program(text: &str) -> Result<PulseProgram> {
    let mut meta = (None, None, None);
    let mut slices = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let words: Vec<&str> = rest.split_whitespace().collect();
            for pair in words.chunks(2) {
                if let [key, value] = pair {
                    let parsed = value.parse::<f64>().ok();
                    match *key {
                        "tau" => meta.0 = parsed,
                        "coupling_hz" => meta.1 = parsed,
                        "eta0" => meta.2 = parsed,
                        _ => {}
                    }
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 8 {
            return Err(Error::Config(format!("line {}: expected 8 columns, got {}", line_no + 1, fields.len())));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|_| Error::Config(format!("line {}: bad index", line_no + 1)))?;
        if index != slices.len() {
            return Err(Error::Config(format!("line {}: index {index} out of order", line_no + 1)));
        }
        let mut v = [0.0; 7];
        for (dst, src) in v.iter_mut().zip(&fields[1..]) {
            *dst = src
                .parse()
                .map_err(|_| Error::Config(format!("line {}: bad number {src}", line_no + 1)))?;
        }
        slices.push(PulseSlice { b1: v[0], phi1: v[1], b2: v[2], b3: v[3], tau1: v[4], tau2: v[5], tau3: v[6] });
    }
    match meta {
        (Some(tau), Some(coupling_hz), eta0) => {
            Ok(PulseProgram { tau, coupling_hz, eta0: eta0.unwrap_or(f64::NAN), slices })
        }
        _ => Err(Error::Config("pulse program missing tau/coupling_hz metadata".into())),
    }
}

/// Multiplicative miscalibration of the state-preparation and readout pulses.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitNoise {
    /// Factors on the ancilla `R_x(π/2)` and `R_y(2 arctan η₀)` preparation angles.
    pub preparation: [f64; 2],
    /// Factor on the readout `R_x(−π/2)` angle, one per recorded sample.
    pub readout: Vec<f64>,
}

impl CircuitNoise {
    pub fn ideal(samples: usize) -> Self {
        Self { preparation: [1.0, 1.0], readout: vec![1.0; samples] }
    }
}

/// Unitary taking `|0⟩` to the normalized `psi`.
pub fn state_preparation(psi: &Vec2) -> Result<Mat2> {
    let n = psi.norm();
    if !(n > 0.0) {
        return Err(Error::InvalidInput("initial system state must be nonzero".into()));
    }
    let (a, b) = (psi[0] / C64::from(n), psi[1] / C64::from(n));
    Ok(Mat2::new(a, -b.conj(), b, a.conj()))
}

/// Density-matrix simulation of the full circuit from `|0⟩_s|0⟩_a`: dephase,
/// prepare, run the program, and read out the conditioned system texture after
/// the first `record[i]` slices.
pub fn simulate_program(
    program: &PulseProgram,
    psi0: &Vec2,
    record: &[usize],
    noise: &CircuitNoise,
) -> Result<Vec<[f64; 3]>> {
    if noise.readout.len() != record.len() {
        return Err(Error::LengthMismatch { left: record.len(), right: noise.readout.len() });
    }
    if record.windows(2).any(|w| w[1] < w[0]) || record.last().is_some_and(|&m| m > program.slices.len()) {
        return Err(Error::InvalidInput("record indices must be ascending and within the program".into()));
    }
    let ground = DilatedState::product(&Vec2::new(C64::from(1.0), C64::from(0.0)), &Vec2::new(C64::from(1.0), C64::from(0.0)));
    let rho0 = super::readout::dephase(&density(&ground));
    let prep = kron(&state_preparation(psi0)?, &ancilla_preparation(program.eta0, noise.preparation));
    let mut rho = prep * rho0 * prep.adjoint();
    let mut out = Vec::with_capacity(record.len());
    let mut done = 0;
    for (&stop, &scale) in record.iter().zip(&noise.readout) {
        while done < stop {
            let u = pulse_unitary(&program.slices[done], program.tau, program.coupling_hz);
            rho = u * rho * u.adjoint();
            done += 1;
        }
        let r = readout_rotation(scale);
        out.push(density_texture(&(r * rho * r.adjoint()))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::schedule::PauliCoefficients;
    use crate::dilation::trotter::slice_unitary;
    use crate::linalg::I;

    fn schedule_of(c: PauliCoefficients, tau: f64) -> DilatedSchedule {
        DilatedSchedule { tau, eta0: 1.0, k: None, slices: vec![c] }
    }

    #[test]
    fn amplitude_example() {
        let c = PauliCoefficients { lambda: [0.0, 0.3, 0.4, 0.0], gamma: [0.0; 4] };
        let p = compile_pulses(&schedule_of(c, 0.01), DEFAULT_COUPLING_HZ).unwrap().slices[0];
        assert!((p.b1 - 0.01 / PI * 0.5).abs() < 1e-16);
        assert!((p.phi1 - 0.9273).abs() < 1e-4);
        assert_eq!(p.tau1, 0.0);
        assert!(compile_pulses(&schedule_of(c, 0.01), 0.0).is_err());
    }

    #[test]
    fn pulse_unitary_matches_slice() {
        let c = PauliCoefficients { lambda: [0.3, -0.5, 0.9, 0.2], gamma: [0.1, 0.7, -0.4, 0.6] };
        let tau = 0.003;
        let p = compile_pulses(&schedule_of(c, tau), DEFAULT_COUPLING_HZ).unwrap();
        let u = pulse_unitary(&p.slices[0], tau, DEFAULT_COUPLING_HZ) * (-I * tau * c.lambda[0]).exp();
        assert!((u - slice_unitary(&c, tau)).norm() < 1e-12);
    }

    #[test]
    fn hardware_export_is_equivalent() {
        let c = PauliCoefficients { lambda: [0.0, 0.2, 0.1, -0.3], gamma: [0.5, -0.7, -0.4, -0.6] };
        let tau = 0.01;
        let program = compile_pulses(&schedule_of(c, tau), DEFAULT_COUPLING_HZ).unwrap();
        let hw = hardware_export(&program);
        assert_eq!(hw[0].flipped, [true, true, true]);
        assert!(hw[0].pulse.tau1 >= 0.0 && hw[0].pulse.tau2 >= 0.0 && hw[0].pulse.tau3 >= 0.0);
        let a = pulse_unitary(&program.slices[0], tau, DEFAULT_COUPLING_HZ);
        let b = hardware_unitary(&hw[0], tau, DEFAULT_COUPLING_HZ);
        // π-pulse pairs may differ by a global sign
        let phase = (a.adjoint() * b).trace() / C64::from(4.0);
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!((a * phase - b).norm() < 1e-12);
    }

    #[test]
    fn program_text_roundtrip() {
        let c = PauliCoefficients { lambda: [0.0, 0.2, 0.1, -0.3], gamma: [0.5, -0.7, 0.4, 0.6] };
        let mut program = compile_pulses(&schedule_of(c, 0.003), DEFAULT_COUPLING_HZ).unwrap();
        program.slices.push(program.slices[0]);
        let text = write_program(&program);
        let back = parse_program(&text).unwrap();
        assert_eq!(back.slices.len(), 2);
        for (a, b) in back.slices.iter().zip(&program.slices) {
            for (x, y) in [(a.b1, b.b1), (a.phi1, b.phi1), (a.tau2, b.tau2), (a.tau3, b.tau3)] {
                assert!((x - y).abs() <= 1e-14 * y.abs().max(1e-300));
            }
        }
        assert_eq!(back.tau, program.tau);
        assert!(parse_program("0 1 2 3").is_err());
        assert!(write_hardware_program(&program).lines().nth(2).unwrap().split_whitespace().count() == 11);
    }

    #[test]
    fn state_preparation_maps_ground_state() {
        let psi = Vec2::new(C64::new(0.3, 0.4), C64::new(-0.5, 0.1));
        let u = state_preparation(&psi).unwrap();
        let out = u * Vec2::new(C64::from(1.0), C64::from(0.0));
        assert!((out - psi / C64::from(psi.norm())).norm() < 1e-15);
        assert!((u * u.adjoint() - Mat2::identity()).norm() < 1e-15);
    }

    #[test]
    fn empty_record_is_fine() {
        let c = PauliCoefficients::default();
        let program = compile_pulses(&schedule_of(c, 0.01), DEFAULT_COUPLING_HZ).unwrap();
        let psi = Vec2::new(C64::from(1.0), C64::from(0.0));
        assert!(simulate_program(&program, &psi, &[], &CircuitNoise::ideal(0)).unwrap().is_empty());
        assert!(simulate_program(&program, &psi, &[2], &CircuitNoise::ideal(1)).is_err());
    }
}
