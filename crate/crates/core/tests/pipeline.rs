use nhtopo::band::ModelParams;
use nhtopo::pipeline::output::{read_scan_csv, scan_csv, write_scan};
use nhtopo::pipeline::{run_scan, Mode, ScenarioConfig};

fn scenario(j0: f64, mode: Mode) -> ScenarioConfig {
    ScenarioConfig { model: ModelParams::experimental(j0), mode, ..Default::default() }
}

fn noisy(seed: u64) -> ScenarioConfig {
    let mut cfg = scenario(1.0, Mode::Noisy);
    cfg.noise.level = 0.01;
    cfg.seed = Some(seed);
    cfg
}

#[test]
fn simulated_scans_reproduce_windings() {
    for mode in [Mode::Fit, Mode::Dilated] {
        for (j0, w) in [(1.0, 1), (0.3, 2)] {
            let out = run_scan(&scenario(j0, mode)).unwrap();
            assert!(out.summary.failed.is_empty(), "{mode:?} {j0}: {:?}", out.summary.failed);
            assert_eq!(out.summary.w_t.value, Some(w), "{mode:?} {j0}");
            assert_eq!(out.summary.nu_e.value, Some(0), "{mode:?} {j0}");
        }
    }
}

#[test]
fn clean_simulation_tracks_theory() {
    let out = run_scan(&scenario(1.0, Mode::Dilated)).unwrap();
    let rms = out.summary.rms.unwrap();
    assert!(rms.sigma_x < 1e-3 && rms.sigma_y < 1e-3, "{rms:?}");
    assert_eq!(rms.samples, 25 * 30);
}

#[test]
fn noisy_scan_is_deterministic_and_seeded() {
    let a = scan_csv(&run_scan(&noisy(42)).unwrap().rows).unwrap();
    let b = scan_csv(&run_scan(&noisy(42)).unwrap().rows).unwrap();
    let c = scan_csv(&run_scan(&noisy(43)).unwrap().rows).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn output_is_independent_of_thread_count() {
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let out = run_scan(&noisy(7)).unwrap();
            (scan_csv(&out.rows).unwrap(), serde_json::to_string(&out.summary).unwrap())
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn noise_without_seed_is_a_config_error() {
    let mut cfg = noisy(1);
    cfg.seed = None;
    assert!(matches!(run_scan(&cfg), Err(nhtopo::Error::Config(_))));
}

#[test]
fn scan_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scan(&scenario(0.3, Mode::Exact)).unwrap();
    let (csv_path, json_path) = write_scan(&out, dir.path()).unwrap();
    let rows = read_scan_csv(&std::fs::read_to_string(csv_path).unwrap()).unwrap();
    assert_eq!(rows, out.rows);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json_path).unwrap()).unwrap();
    assert_eq!(summary["w_t"]["value"], 2);
    assert_eq!(summary["config"]["model"]["j0"], 0.3);
}
