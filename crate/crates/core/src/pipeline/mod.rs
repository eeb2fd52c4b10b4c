//! Scenario configuration, k-sweeps, noise injection, RMS analysis and
//! CSV/JSON emission.

pub mod config;
pub mod noise;
pub mod output;
pub mod phase;
pub mod scan;

pub use config::{Mode, NoiseConfig, NoiseDistribution, ScenarioConfig};
pub use noise::{inject_pulse_noise, rms_error, RmsReport, RmsSource};
pub use phase::{phase_diagram, PhaseDiagramConfig, PhaseRow};
pub use scan::{evaluate_k, run_scan, KPoint, ScanOutput, ScanRow, ScanSummary};
